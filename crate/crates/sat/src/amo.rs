//! At-most-one encodings.
//!
//! Each scheme implements [`AmoEncoding`]; [`REGISTRY`] maps the names used
//! on the command line to configurations.

use crate::{ClauseSink, Lit, SatError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AmoScheme {
    Pairwise,
    Binary,
    Bimander,
}

/// How many groups bimander splits `n` literals into.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupRule {
    Half,
    Sqrt,
}

impl GroupRule {
    pub fn groups(self, n: usize) -> usize {
        let m = match self {
            GroupRule::Half => n.div_ceil(2),
            GroupRule::Sqrt => (n as f64).sqrt().ceil() as usize,
        };
        m.clamp(1, n.max(1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AmoConfig {
    pub scheme: AmoScheme,
    pub bimander_groups: GroupRule,
}

impl Default for AmoConfig {
    fn default() -> Self {
        AmoConfig {
            scheme: AmoScheme::Pairwise,
            bimander_groups: GroupRule::Half,
        }
    }
}

pub const REGISTRY: &[(&str, AmoConfig)] = &[
    (
        "pairwise",
        AmoConfig {
            scheme: AmoScheme::Pairwise,
            bimander_groups: GroupRule::Half,
        },
    ),
    (
        "binary",
        AmoConfig {
            scheme: AmoScheme::Binary,
            bimander_groups: GroupRule::Half,
        },
    ),
    (
        "bimander-half",
        AmoConfig {
            scheme: AmoScheme::Bimander,
            bimander_groups: GroupRule::Half,
        },
    ),
    (
        "bimander-sqrt",
        AmoConfig {
            scheme: AmoScheme::Bimander,
            bimander_groups: GroupRule::Sqrt,
        },
    ),
];

impl AmoConfig {
    pub fn from_name(name: &str) -> Result<AmoConfig, SatError> {
        REGISTRY
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, c)| *c)
            .ok_or_else(|| SatError::UnknownAmoScheme(name.to_string()))
    }

    pub fn name(&self) -> &'static str {
        REGISTRY
            .iter()
            .find(|(_, c)| c == self)
            .map(|(n, _)| *n)
            .unwrap_or("pairwise")
    }

    pub fn encoder(&self) -> Box<dyn AmoEncoding> {
        match self.scheme {
            AmoScheme::Pairwise => Box::new(Pairwise),
            AmoScheme::Binary => Box::new(Binary),
            AmoScheme::Bimander => Box::new(Bimander {
                groups: self.bimander_groups,
            }),
        }
    }
}

pub trait AmoEncoding: Send + Sync {
    fn name(&self) -> &'static str;
    /// Emit clauses that hold iff at most one of `lits` is true. Fewer than
    /// two literals is a no-op.
    fn encode(&self, sink: &mut dyn ClauseSink, lits: &[Lit]) -> Result<(), SatError>;
}

fn ceil_log2(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

fn pairwise(sink: &mut dyn ClauseSink, lits: &[Lit]) -> Result<(), SatError> {
    for (i, &a) in lits.iter().enumerate() {
        for &b in &lits[i + 1..] {
            sink.emit(&[!a, !b])?;
        }
    }
    Ok(())
}

/// Ties every literal in `groups[i]` to the binary code of `i` over fresh bits.
fn binary_commit(sink: &mut dyn ClauseSink, groups: &[&[Lit]]) -> Result<(), SatError> {
    let bits: Vec<Lit> = (0..ceil_log2(groups.len()))
        .map(|_| sink.fresh_var().pos())
        .collect();
    for (i, group) in groups.iter().enumerate() {
        for &x in group.iter() {
            for (j, &b) in bits.iter().enumerate() {
                let bit = if (i >> j) & 1 == 1 { b } else { !b };
                sink.emit(&[!x, bit])?;
            }
        }
    }
    Ok(())
}

/// `C(n, 2)` binary clauses, no auxiliaries.
pub struct Pairwise;

impl AmoEncoding for Pairwise {
    fn name(&self) -> &'static str {
        "pairwise"
    }

    fn encode(&self, sink: &mut dyn ClauseSink, lits: &[Lit]) -> Result<(), SatError> {
        if lits.len() < 2 {
            return Ok(());
        }
        pairwise(sink, lits)
    }
}

/// `n * ceil(log2 n)` clauses over `ceil(log2 n)` auxiliary bits.
pub struct Binary;

impl AmoEncoding for Binary {
    fn name(&self) -> &'static str {
        "binary"
    }

    fn encode(&self, sink: &mut dyn ClauseSink, lits: &[Lit]) -> Result<(), SatError> {
        if lits.len() < 2 {
            return Ok(());
        }
        let singletons: Vec<&[Lit]> = lits.chunks(1).collect();
        binary_commit(sink, &singletons)
    }
}

/// Pairwise inside groups, binary commander bits across groups.
pub struct Bimander {
    pub groups: GroupRule,
}

impl AmoEncoding for Bimander {
    fn name(&self) -> &'static str {
        match self.groups {
            GroupRule::Half => "bimander-half",
            GroupRule::Sqrt => "bimander-sqrt",
        }
    }

    fn encode(&self, sink: &mut dyn ClauseSink, lits: &[Lit]) -> Result<(), SatError> {
        let n = lits.len();
        if n < 2 {
            return Ok(());
        }
        let m = self.groups.groups(n);
        let size = n.div_ceil(m);
        let groups: Vec<&[Lit]> = lits.chunks(size).collect();
        for g in &groups {
            pairwise(sink, g)?;
        }
        binary_commit(sink, &groups)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{ClauseList, Var};

    fn lits(n: u32) -> Vec<Lit> {
        (1..=n).map(|i| Var::new(i).pos()).collect()
    }

    #[test]
    fn pairwise_three_gives_three_clauses() {
        let mut sink = ClauseList::with_vars(3);
        Pairwise.encode(&mut sink, &lits(3)).unwrap();
        assert_eq!(sink.clauses.len(), 3);
        assert_eq!(sink.num_vars, 3);
    }

    #[test]
    fn binary_four_gives_eight_clauses_two_aux() {
        let mut sink = ClauseList::with_vars(4);
        Binary.encode(&mut sink, &lits(4)).unwrap();
        assert_eq!(sink.clauses.len(), 8);
        assert_eq!(sink.num_vars, 6);
    }

    #[test]
    fn fewer_than_two_is_noop() {
        for (_, cfg) in REGISTRY {
            let mut sink = ClauseList::with_vars(1);
            cfg.encoder().encode(&mut sink, &lits(1)).unwrap();
            assert!(sink.clauses.is_empty());
            assert_eq!(sink.num_vars, 1);
        }
    }

    #[test]
    fn group_rules() {
        assert_eq!(GroupRule::Half.groups(8), 4);
        assert_eq!(GroupRule::Half.groups(3), 2);
        assert_eq!(GroupRule::Sqrt.groups(8), 3);
        assert_eq!(GroupRule::Sqrt.groups(2), 2);
    }

    #[test]
    fn ceil_log2_values() {
        assert_eq!(
            (1..=9).map(ceil_log2).collect::<Vec<_>>(),
            vec![0, 1, 2, 2, 3, 3, 3, 3, 4]
        );
    }

    #[test]
    fn registry_names_round_trip() {
        for (name, cfg) in REGISTRY {
            assert_eq!(AmoConfig::from_name(name).unwrap().name(), *name);
            assert_eq!(cfg.encoder().name(), *name);
        }
        assert!(AmoConfig::from_name("ladder").is_err());
    }
}
