use std::fmt;
use std::ops::Not;

/// A propositional variable. Index 0 is reserved and never handed out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(pub(crate) u32);

impl Var {
    pub fn new(index: u32) -> Var {
        assert!(index > 0, "variable 0 is reserved");
        Var(index)
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn pos(self) -> Lit {
        Lit(self.0 << 1)
    }

    #[inline]
    #[allow(clippy::should_implement_trait)]
    pub fn neg(self) -> Lit {
        Lit((self.0 << 1) | 1)
    }
}

/// A literal: a variable with a polarity, packed as `var << 1 | negated`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit(u32);

impl Lit {
    #[inline]
    pub fn new(var: Var, positive: bool) -> Lit {
        if positive {
            var.pos()
        } else {
            var.neg()
        }
    }

    #[inline]
    pub fn var(self) -> Var {
        Var(self.0 >> 1)
    }

    #[inline]
    pub fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }

    #[inline]
    pub(crate) fn code(self) -> usize {
        self.0 as usize
    }

    pub fn to_dimacs(self) -> i32 {
        let v = (self.0 >> 1) as i32;
        if self.is_positive() {
            v
        } else {
            -v
        }
    }

    /// Returns `None` for 0.
    pub fn from_dimacs(x: i32) -> Option<Lit> {
        if x == 0 {
            return None;
        }
        let var = Var(x.unsigned_abs());
        Some(Lit::new(var, x > 0))
    }
}

impl Not for Lit {
    type Output = Lit;

    #[inline]
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl fmt::Debug for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimacs_round_trip() {
        for x in [-7, -1, 1, 3, 1000] {
            assert_eq!(Lit::from_dimacs(x).unwrap().to_dimacs(), x);
        }
        assert!(Lit::from_dimacs(0).is_none());
    }

    #[test]
    fn negation_flips_polarity_only() {
        let l = Var::new(5).pos();
        assert!(!(!l).is_positive());
        assert_eq!((!l).var(), l.var());
        assert_eq!(!!l, l);
    }
}
