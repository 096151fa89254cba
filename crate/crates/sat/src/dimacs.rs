//! DIMACS CNF reading and writing.

use std::io::{self, BufRead, Write};

use crate::Lit;

pub fn write_cnf<W: Write>(out: &mut W, num_vars: u32, clauses: &[Vec<Lit>]) -> io::Result<()> {
    writeln!(out, "p cnf {} {}", num_vars, clauses.len())?;
    for c in clauses {
        for l in c {
            write!(out, "{} ", l.to_dimacs())?;
        }
        writeln!(out, "0")?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cnf {
    pub num_vars: u32,
    pub clauses: Vec<Vec<Lit>>,
}

pub fn read_cnf<R: BufRead>(input: R) -> io::Result<Cnf> {
    let bad = |msg: String| io::Error::new(io::ErrorKind::InvalidData, msg);
    let mut num_vars = 0u32;
    let mut clauses = Vec::new();
    let mut current = Vec::new();
    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('c') || t.starts_with('%') {
            continue;
        }
        if t.starts_with('p') {
            let parts: Vec<&str> = t.split_whitespace().collect();
            if parts.len() != 4 || parts[1] != "cnf" {
                return Err(bad(format!("line {}: malformed header", lineno + 1)));
            }
            num_vars = parts[2]
                .parse()
                .map_err(|_| bad(format!("line {}: bad variable count", lineno + 1)))?;
            continue;
        }
        for tok in t.split_whitespace() {
            let x: i32 = tok
                .parse()
                .map_err(|_| bad(format!("line {}: bad literal `{tok}`", lineno + 1)))?;
            match Lit::from_dimacs(x) {
                None => clauses.push(std::mem::take(&mut current)),
                Some(l) => {
                    num_vars = num_vars.max(l.var().index() as u32);
                    current.push(l);
                }
            }
        }
    }
    if !current.is_empty() {
        clauses.push(current);
    }
    Ok(Cnf { num_vars, clauses })
}
