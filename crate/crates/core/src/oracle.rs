//! Quadratic reference implementations. Clarity over speed.

use rand::Rng;
use serde::Serialize;

use crate::error::Result;
use crate::hash_family::{HashFamily, HashFunction};
use crate::metric::{check_alignment, MetricSpace, Symbol, SymbolString, WILDCARD};
use crate::profile::DistanceProfile;

/// `S[i] = Σ_j d(t_{i+j}, p_j)`, skipping positions where either side is a wildcard.
pub fn naive_profile(text: &SymbolString, pattern: &SymbolString, ms: &MetricSpace) -> Result<DistanceProfile> {
    check_alignment(text, pattern)?;
    text.check_alphabet(ms.size())?;
    pattern.check_alphabet(ms.size())?;
    let m = pattern.len();
    let values = (0..=text.len() - m)
        .map(|i| {
            let mut sum = 0.0;
            for j in 0..m {
                let (t, p) = (text[i + j], pattern[j]);
                if t != WILDCARD && p != WILDCARD {
                    sum += ms.d(t, p);
                }
            }
            sum * ms.scale()
        })
        .collect();
    Ok(DistanceProfile::exact(values, ms.scale()))
}

/// Number of non-wildcard positions where the two strings differ at offset `i`.
pub fn mismatch_count(text: &[Symbol], pattern: &[Symbol], i: usize) -> usize {
    mismatch_positions(text, pattern, i).len()
}

pub fn mismatch_positions(text: &[Symbol], pattern: &[Symbol], i: usize) -> Vec<usize> {
    pattern
        .iter()
        .enumerate()
        .filter(|&(j, &p)| {
            let t = text[i + j];
            p != WILDCARD && t != WILDCARD && p != t
        })
        .map(|(j, _)| j)
        .collect()
}

/// Exact contents of the level-`D` bucket `[D, 2D)` at one offset.
#[derive(Clone, Debug, PartialEq)]
pub struct BucketStats {
    pub positions: Vec<usize>,
    pub count: usize,
    pub mass: f64,
}

/// Distances are in the metric's current units.
pub fn bucket_stats(
    text: &SymbolString,
    pattern: &SymbolString,
    ms: &MetricSpace,
    offset: usize,
    threshold: f64,
) -> BucketStats {
    let mut positions = Vec::new();
    let mut mass = 0.0;
    for (j, &p) in pattern.iter().enumerate() {
        let t = text[offset + j];
        if p == WILDCARD || t == WILDCARD {
            continue;
        }
        let d = ms.d(t, p);
        if d >= threshold && d < 2.0 * threshold {
            positions.push(j);
            mass += d;
        }
    }
    BucketStats {
        count: positions.len(),
        positions,
        mass,
    }
}

/// The set of positions a hash separates at one offset.
pub fn separated_positions(hash: &HashFunction, text: &[Symbol], pattern: &[Symbol], offset: usize) -> Vec<usize> {
    pattern
        .iter()
        .enumerate()
        .filter(|&(j, &p)| {
            let t = text[offset + j];
            p != WILDCARD && t != WILDCARD && hash.bucket(p) != hash.bucket(t)
        })
        .map(|(j, _)| j)
        .collect()
}

/// Fraction of `draws` hash samples that put `x` and `y` in different buckets.
pub fn empirical_separation<R: Rng + ?Sized>(
    family: &HashFamily,
    x: Symbol,
    y: Symbol,
    draws: usize,
    rng: &mut R,
) -> f64 {
    assert!(draws >= 1);
    let separated = (0..draws)
        .filter(|_| {
            let h = family.sample(rng);
            h.bucket(x) != h.bucket(y)
        })
        .count();
    separated as f64 / draws as f64
}

/// Empirical check of both separation conditions over `draws` samples.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FamilyReport {
    pub family: &'static str,
    #[serde(rename = "D")]
    pub threshold: f64,
    /// Separation factor `C`.
    pub factor: f64,
    pub draws: usize,
    /// Pairs with `d ≥ D`.
    pub condition1_pairs: usize,
    /// (draw, pair) events where a pair with `d ≥ D` shared a bucket.
    pub condition1_violations: usize,
    /// Pairs with `0 < d < D`.
    pub condition2_pairs: usize,
    /// Pairs whose separation frequency exceeds `min(1, C·d/D)` by more than 3 standard errors.
    pub condition2_violations: usize,
    /// Largest observed `frequency / (C·d/D)` over the condition-2 pairs.
    pub condition2_worst_ratio: f64,
}

pub fn family_report<R: Rng + ?Sized>(family: &HashFamily, draws: usize, rng: &mut R) -> FamilyReport {
    let ms = family.metric();
    let size = ms.size();
    let threshold = family.threshold();
    let mut separated = vec![0usize; size * size];
    for _ in 0..draws {
        let h = family.sample(rng);
        let table = h.table();
        for x in 0..size {
            for y in x + 1..size {
                if table[x] != table[y] {
                    separated[x * size + y] += 1;
                }
            }
        }
    }
    let factor = family.factor();
    let mut report = FamilyReport {
        family: family.kind().name(),
        threshold,
        factor,
        draws,
        condition1_pairs: 0,
        condition1_violations: 0,
        condition2_pairs: 0,
        condition2_violations: 0,
        condition2_worst_ratio: 0.0,
    };
    for x in 0..size {
        for y in x + 1..size {
            let d = ms.d(x as Symbol, y as Symbol);
            let count = separated[x * size + y];
            if d >= threshold {
                report.condition1_pairs += 1;
                report.condition1_violations += draws - count;
            } else {
                report.condition2_pairs += 1;
                let bound = (factor * d / threshold).min(1.0);
                let freq = count as f64 / draws as f64;
                let se = (bound * (1.0 - bound) / draws as f64).sqrt();
                if freq > bound + 3.0 * se {
                    report.condition2_violations += 1;
                }
                report.condition2_worst_ratio = report.condition2_worst_ratio.max(freq / (factor * d / threshold));
            }
        }
    }
    report
}
