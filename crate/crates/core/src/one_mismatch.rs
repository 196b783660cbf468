//! Exact-or-one-mismatch labelling of every alignment, with don't cares on
//! both sides.
//!
//! With codes `c ≥ 1` for symbols and masks `c' ∈ {0, 1}`:
//!
//! ```text
//! A0[i] = Σ_j p'_j t'_{i+j} (p_j − t_{i+j})²
//! A1[i] = Σ_j j · p'_j t'_{i+j} (p_j − t_{i+j})²
//! ```
//!
//! Both expand into three exact integer correlations each. A single mismatch
//! at `r` gives `A1 = r · A0`; with two or more, `A0` strictly exceeds every
//! single squared difference, so the verification step never misfires.

use crate::convolution::{correlate_combinations_with, Backend, Term, EXACT_LIMIT};
use crate::error::{Error, Result};
use crate::metric::{check_alignment, SymbolString, WILDCARD};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MismatchReport {
    Match,
    /// Exactly one non-wildcard mismatch, at this pattern position.
    Location(usize),
    Many,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Encoded {
    /// `id + 1` for symbols, 0 for wildcards.
    pub codes: Vec<u64>,
    /// 1 for symbols, 0 for wildcards.
    pub mask: Vec<u64>,
}

pub fn encode(s: &[u32]) -> Encoded {
    let codes = s.iter().map(|&c| code(c)).collect();
    let mask = s.iter().map(|&c| u64::from(c != WILDCARD)).collect();
    Encoded { codes, mask }
}

/// Patterns with at most this many non-wildcard positions are evaluated term
/// by term when all sums fit in 32 bits.
pub const SPARSE_NARROW_CUTOFF: usize = 256;

/// Same, when the sums need 64 bits.
pub const SPARSE_WIDE_CUTOFF: usize = 64;

enum Sums {
    Narrow(Vec<u32>, Vec<u32>),
    Wide(Vec<u64>, Vec<u64>),
}

impl Sums {
    fn widen(self) -> (Vec<u64>, Vec<u64>) {
        match self {
            Sums::Narrow(a0, a1) => (
                a0.into_iter().map(u64::from).collect(),
                a1.into_iter().map(u64::from).collect(),
            ),
            Sums::Wide(a0, a1) => (a0, a1),
        }
    }
}

/// `id + 1`, and 0 for the wildcard (`u32::MAX` wraps around).
#[inline]
fn code(c: u32) -> u64 {
    c.wrapping_add(1) as u64
}

/// The `A0` and `A1` arrays, one entry per offset.
pub fn mismatch_sums(text: &SymbolString, pattern: &SymbolString) -> Result<(Vec<u64>, Vec<u64>)> {
    mismatch_sums_with(text, pattern, Backend::Auto)
}

/// [`mismatch_sums`] with a forced backend. `Direct` evaluates the sums term by
/// term over the non-wildcard pattern positions.
pub fn mismatch_sums_with(
    text: &SymbolString,
    pattern: &SymbolString,
    backend: Backend,
) -> Result<(Vec<u64>, Vec<u64>)> {
    compute_sums(text, pattern, backend).map(Sums::widen)
}

fn compute_sums(text: &SymbolString, pattern: &SymbolString, backend: Backend) -> Result<Sums> {
    check_alignment(text, pattern)?;
    let kept: Vec<usize> = (0..pattern.len()).filter(|&j| pattern[j] != WILDCARD).collect();
    let t_max = text.iter().map(|&c| code(c)).max().unwrap_or(0);
    let bound = sparse_bound(t_max, pattern, &kept);
    let direct = match backend {
        Backend::Direct => true,
        Backend::Transform => false,
        Backend::Auto => {
            let cutoff = if bound <= u32::MAX as u128 {
                SPARSE_NARROW_CUTOFF
            } else {
                SPARSE_WIDE_CUTOFF
            };
            kept.len() <= cutoff
        }
    };
    if !direct {
        return transform_sums(text, pattern, backend);
    }
    if bound > EXACT_LIMIT {
        return Err(Error::OverflowRisk {
            bound,
            limit: EXACT_LIMIT,
        });
    }
    let offsets = text.len() - pattern.len() + 1;
    let kernel: Vec<(usize, u64)> = kept.iter().map(|&j| (j, code(pattern[j]))).collect();
    if bound <= u32::MAX as u128 {
        let codes: Vec<u32> = text.iter().map(|&c| c.wrapping_add(1)).collect();
        // all ones on symbols, zero on wildcards
        let mask: Vec<u32> = text.iter().map(|&c| if c == WILDCARD { 0 } else { u32::MAX }).collect();
        let kernel: Vec<(usize, u32)> = kernel.into_iter().map(|(j, c)| (j, c as u32)).collect();
        let mut a0 = vec![0u32; offsets];
        let mut a1 = vec![0u32; offsets];
        narrow_dispatch(&codes, &mask, &kernel, &mut a0, &mut a1);
        return Ok(Sums::Narrow(a0, a1));
    }
    let t = encode(text);
    let mut a0 = vec![0u64; offsets];
    let mut a1 = vec![0u64; offsets];
    for (j, pj) in kernel {
        let weight = j as u64;
        let codes = &t.codes[j..j + offsets];
        let mask = &t.mask[j..j + offsets];
        for (((s0, s1), &c), &k) in a0.iter_mut().zip(a1.iter_mut()).zip(codes).zip(mask) {
            let d = pj.abs_diff(c);
            let term = k.wrapping_mul(d.wrapping_mul(d));
            *s0 = s0.wrapping_add(term);
            *s1 = s1.wrapping_add(weight.wrapping_mul(term));
        }
    }
    Ok(Sums::Wide(a0, a1))
}

/// Upper bound on every partial sum of the term-by-term evaluation.
fn sparse_bound(t_max: u64, pattern: &[u32], kept: &[usize]) -> u128 {
    let mut bound: u128 = 0;
    for &j in kept {
        let diff = t_max.max(code(pattern[j])) as u128;
        bound = bound.saturating_add((j.max(1) as u128).saturating_mul(diff * diff));
    }
    bound
}

/// Three exact correlations per sum.
fn transform_sums(text: &SymbolString, pattern: &SymbolString, backend: Backend) -> Result<Sums> {
    let t = encode(text);
    let p = encode(pattern);
    let t_sq: Vec<u64> = t.codes.iter().map(|c| c * c).collect();
    let p_sq: Vec<u64> = p.codes.iter().map(|c| c * c).collect();
    let weighted = |v: &[u64]| -> Vec<u64> { v.iter().enumerate().map(|(j, x)| j as u64 * x).collect() };
    let (jp_mask, jp, jp_sq) = (weighted(&p.mask), weighted(&p.codes), weighted(&p_sq));

    // text 0: mask, 1: codes, 2: squared codes
    let a0 = [
        Term { text: 0, pattern: &p_sq, coeff: 1 },
        Term { text: 1, pattern: &p.codes, coeff: -2 },
        Term { text: 2, pattern: &p.mask, coeff: 1 },
    ];
    let a1 = [
        Term { text: 0, pattern: &jp_sq, coeff: 1 },
        Term { text: 1, pattern: &jp, coeff: -2 },
        Term { text: 2, pattern: &jp_mask, coeff: 1 },
    ];
    let mut sums = correlate_combinations_with(&[&t.mask, &t.codes, &t_sq], &[&a0, &a1], backend)?;
    let a1 = sums.pop().expect("two combinations");
    let a0 = sums.pop().expect("two combinations");
    let to_unsigned = |v: Vec<i64>| -> Vec<u64> {
        v.into_iter()
            .map(|x| {
                debug_assert!(x >= 0, "sum of squares came out negative");
                x as u64
            })
            .collect()
    };
    Ok(Sums::Wide(to_unsigned(a0), to_unsigned(a1)))
}

/// Offsets processed together, sized so the working set stays in L1.
const TILE: usize = 1024;

#[inline(always)]
fn narrow_loop(codes: &[u32], mask: &[u32], kernel: &[(usize, u32)], a0: &mut [u32], a1: &mut [u32]) {
    for (tile, (a0, a1)) in a0.chunks_mut(TILE).zip(a1.chunks_mut(TILE)).enumerate() {
        let start = tile * TILE;
        let len = a0.len();
        for &(j, pj) in kernel {
            let weight = j as u32;
            let codes = &codes[start + j..start + j + len];
            let mask = &mask[start + j..start + j + len];
            // the caller's bound rules out overflow; wrapping ops keep the loop branch-free
            for i in 0..len {
                let d = pj.abs_diff(codes[i]) & mask[i];
                let term = d.wrapping_mul(d);
                a0[i] = a0[i].wrapping_add(term);
                a1[i] = a1[i].wrapping_add(weight.wrapping_mul(term));
            }
        }
    }
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx2")]
unsafe fn narrow_loop_avx2(codes: &[u32], mask: &[u32], kernel: &[(usize, u32)], a0: &mut [u32], a1: &mut [u32]) {
    narrow_loop(codes, mask, kernel, a0, a1)
}

fn narrow_dispatch(codes: &[u32], mask: &[u32], kernel: &[(usize, u32)], a0: &mut [u32], a1: &mut [u32]) {
    #[cfg(target_arch = "x86_64")]
    if std::arch::is_x86_feature_detected!("avx2") {
        // SAFETY: the CPU supports AVX2, checked just above.
        unsafe { narrow_loop_avx2(codes, mask, kernel, a0, a1) };
        return;
    }
    narrow_loop(codes, mask, kernel, a0, a1)
}

/// Labels every offset `i = 0..=n-m` as a match, a single mismatch (with its
/// position in the pattern) or more than one mismatch.
pub fn one_mismatch(text: &SymbolString, pattern: &SymbolString) -> Result<Vec<MismatchReport>> {
    let m = pattern.len();
    Ok(match compute_sums(text, pattern, Backend::Auto)? {
        Sums::Narrow(a0, a1) => label_all(text, pattern, m, &a0, &a1),
        Sums::Wide(a0, a1) => label_all(text, pattern, m, &a0, &a1),
    })
}

fn label_all<T: Copy + Into<u64>>(text: &[u32], pattern: &[u32], m: usize, a0: &[T], a1: &[T]) -> Vec<MismatchReport> {
    a0.iter()
        .zip(a1)
        .enumerate()
        .map(|(i, (&s0, &s1))| classify(text, pattern, m, i, s0.into(), s1.into()))
        .collect()
}

fn classify(text: &[u32], pattern: &[u32], m: usize, i: usize, a0: u64, a1: u64) -> MismatchReport {
    if a0 == 0 {
        return MismatchReport::Match;
    }
    if !a1.is_multiple_of(a0) {
        return MismatchReport::Many;
    }
    let r = (a1 / a0) as usize;
    if r >= m {
        return MismatchReport::Many;
    }
    let (p, t) = (pattern[r], text[i + r]);
    if p == WILDCARD || t == WILDCARD {
        return MismatchReport::Many;
    }
    let diff = (p as i64 - t as i64).unsigned_abs();
    if diff * diff == a0 {
        MismatchReport::Location(r)
    } else {
        MismatchReport::Many
    }
}
