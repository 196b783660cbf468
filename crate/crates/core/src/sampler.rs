//! Per-offset sampling of a uniformly random mismatch.
//!
//! Erasing each pattern position with probability `1 - q` and running the
//! one-mismatch algorithm leaves, at an offset with `m_i` mismatches, exactly
//! one surviving mismatch with probability `m_i q (1-q)^(m_i - 1)`. That
//! survivor is uniform over the `m_i` mismatches.

use rand::Rng;

use crate::error::Result;
use crate::metric::{check_alignment, SymbolString, WILDCARD};
use crate::one_mismatch::{one_mismatch, MismatchReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SampleOutcome {
    /// No surviving mismatch.
    Match,
    /// Exactly one surviving mismatch, at this pattern position.
    Found(usize),
    /// Two or more survived.
    Nothing,
}

/// Keeps each position with probability `q`, otherwise replaces it with a
/// wildcard. Existing wildcards stay wildcards.
pub fn subsample_pattern<R: Rng + ?Sized>(pattern: &SymbolString, q: f64, rng: &mut R) -> SymbolString {
    assert!(q > 0.0 && q <= 1.0, "keep probability must lie in (0, 1]");
    if q == 1.0 {
        return pattern.clone();
    }
    pattern
        .iter()
        .map(|&c| if rng.random::<f64>() < q { c } else { WILDCARD })
        .collect()
}

/// One subsampled one-mismatch run.
pub fn sample<R: Rng + ?Sized>(
    q: f64,
    text: &SymbolString,
    pattern: &SymbolString,
    rng: &mut R,
) -> Result<Vec<SampleOutcome>> {
    check_alignment(text, pattern)?;
    let thinned = subsample_pattern(pattern, q, rng);
    Ok(one_mismatch(text, &thinned)?
        .into_iter()
        .map(|r| match r {
            MismatchReport::Match => SampleOutcome::Match,
            MismatchReport::Location(j) => SampleOutcome::Found(j),
            MismatchReport::Many => SampleOutcome::Nothing,
        })
        .collect())
}

/// Sweeps `q = 1, 1/2, 1/4, …` down to the last value `≥ 1/m` and returns, per
/// offset, the first mismatch position found.
pub fn sample_uniform_mismatch<R: Rng + ?Sized>(
    text: &SymbolString,
    pattern: &SymbolString,
    rng: &mut R,
) -> Result<Vec<Option<usize>>> {
    check_alignment(text, pattern)?;
    let floor = 1.0 / pattern.len() as f64;
    let mut found: Vec<Option<usize>> = vec![None; text.len() - pattern.len() + 1];
    let mut q = 1.0;
    while q >= floor {
        for (slot, outcome) in found.iter_mut().zip(sample(q, text, pattern, rng)?) {
            if let (None, SampleOutcome::Found(j)) = (*slot, outcome) {
                *slot = Some(j);
            }
        }
        if found.iter().all(Option::is_some) {
            break;
        }
        q /= 2.0;
    }
    Ok(found)
}
