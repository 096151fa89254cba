//! Time and quality scores used by the benchmark harness.

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ScoreError {
    #[error("time limit must exceed one second, got {0}")]
    BadLimit(f64),
}

/// `min(1, 1 - ln t / ln T)` for solved runs, 0 otherwise. Times below one
/// second count as one second.
pub fn ipc_score(t: f64, limit: f64, solved: bool) -> Result<f64, ScoreError> {
    if limit.is_nan() || limit <= 1.0 {
        return Err(ScoreError::BadLimit(limit));
    }
    if !solved {
        return Ok(0.0);
    }
    let t = t.max(1.0);
    Ok((1.0 - t.ln() / limit.ln()).clamp(0.0, 1.0))
}

/// `C_ref / C` for solved runs, 0 otherwise. Two empty plans score 1; an
/// empty reference against a non-empty plan scores 0.
pub fn quality_score(len: usize, best: usize, solved: bool) -> f64 {
    match (solved, len, best) {
        (false, _, _) => 0.0,
        (true, 0, 0) => 1.0,
        (true, _, 0) => 0.0,
        (true, c, r) => (r as f64 / c as f64).min(1.0),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreRow {
    pub instance: String,
    pub domain: String,
    pub config: String,
    pub solved: bool,
    pub seconds: f64,
    pub plan_length: Option<usize>,
    pub methods_developed: usize,
    pub ipc_score: f64,
    pub quality_score: f64,
}
