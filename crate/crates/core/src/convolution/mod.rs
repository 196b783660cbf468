//! Sliding cross-correlation `V[i] = Σ_j A[i+j]·B[j]` for `i = 0..=n-m`.
//!
//! Integer correlations are exact. Short or sparse kernels go through a direct
//! loop over the kernel's nonzero entries; everything else goes through an
//! overlap-save number-theoretic transform. Real-valued correlations (used by
//! the per-letter distance profile) go through a floating-point FFT.

pub mod ntt;

use std::collections::HashMap;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::metric::{check_alignment, MetricSpace, Symbol, SymbolString, WILDCARD};
use crate::profile::DistanceProfile;

/// Kernels no longer than this are always correlated directly.
pub const SCHOOLBOOK_CUTOFF: usize = 64;

/// Kernels with at most this many nonzero entries are correlated directly,
/// whatever their length. The direct cost is `O(n · nnz)`.
pub const SPARSE_CUTOFF: usize = 64;

/// Largest magnitude any exact correlation result may reach. Both backends are
/// exact below it: the direct loop accumulates in `i64` and the transform works
/// modulo a prime larger than `2 · EXACT_LIMIT`.
pub const EXACT_LIMIT: u128 = 1 << 62;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Backend {
    /// Pick by kernel length and sparsity.
    Auto,
    Direct,
    Transform,
}

/// One summand `coeff · (texts[text] ⊗ pattern)` of a linear combination.
#[derive(Clone, Copy, Debug)]
pub struct Term<'a> {
    pub text: usize,
    pub pattern: &'a [u64],
    pub coeff: i64,
}

/// Exact correlation of two nonnegative integer arrays.
///
/// The magnitude bound is taken from the data: `m · max(A) · max(B)` must not
/// exceed [`EXACT_LIMIT`].
pub fn correlate(a: &[u64], b: &[u64]) -> Result<Vec<u64>> {
    correlate_with(a, b, Backend::Auto)
}

pub fn correlate_with(a: &[u64], b: &[u64], backend: Backend) -> Result<Vec<u64>> {
    let terms = [Term {
        text: 0,
        pattern: b,
        coeff: 1,
    }];
    let mut out = correlate_combinations_with(&[a], &[&terms], backend)?;
    Ok(out
        .pop()
        .expect("one combination requested")
        .into_iter()
        .map(|v| v as u64)
        .collect())
}

/// Evaluates several linear combinations of correlations that share text arrays.
///
/// All texts must have the same length `n` and all patterns the same length
/// `m ≤ n`. Each output has `n - m + 1` entries.
pub fn correlate_combinations(texts: &[&[u64]], combos: &[&[Term<'_>]]) -> Result<Vec<Vec<i64>>> {
    correlate_combinations_with(texts, combos, Backend::Auto)
}

pub fn correlate_combinations_with(
    texts: &[&[u64]],
    combos: &[&[Term<'_>]],
    backend: Backend,
) -> Result<Vec<Vec<i64>>> {
    let n = texts.first().map_or(0, |t| t.len());
    if texts.iter().any(|t| t.len() != n) {
        return Err(Error::InvalidParameter("text arrays differ in length".into()));
    }
    let m = combos
        .iter()
        .flat_map(|c| c.iter())
        .map(|t| t.pattern.len())
        .next()
        .unwrap_or(0);
    if m == 0 {
        return Err(Error::EmptyPattern);
    }
    if m > n {
        return Err(Error::PatternTooLong { m, n });
    }
    for term in combos.iter().flat_map(|c| c.iter()) {
        if term.pattern.len() != m || term.text >= texts.len() {
            return Err(Error::InvalidParameter(
                "pattern length or text index mismatch".into(),
            ));
        }
    }

    let text_max: Vec<u64> = texts.iter().map(|t| t.iter().copied().max().unwrap_or(0)).collect();
    let mut union_nonzero = vec![false; m];
    for combo in combos {
        let mut bound: u128 = 0;
        for term in combo.iter() {
            let mut nnz = 0u128;
            let mut pmax = 0u64;
            for (j, &v) in term.pattern.iter().enumerate() {
                if v != 0 {
                    nnz += 1;
                    pmax = pmax.max(v);
                    union_nonzero[j] = true;
                }
            }
            bound = bound.saturating_add(
                (term.coeff.unsigned_abs() as u128)
                    .saturating_mul(nnz)
                    .saturating_mul(text_max[term.text] as u128)
                    .saturating_mul(pmax as u128),
            );
        }
        if bound > EXACT_LIMIT {
            return Err(Error::OverflowRisk {
                bound,
                limit: EXACT_LIMIT,
            });
        }
    }

    let nnz = union_nonzero.iter().filter(|&&b| b).count();
    let backend = match backend {
        Backend::Auto if m <= SCHOOLBOOK_CUTOFF || nnz <= SPARSE_CUTOFF => Backend::Direct,
        Backend::Auto => Backend::Transform,
        other => other,
    };
    Ok(match backend {
        Backend::Direct => direct(texts, combos, n, m),
        _ => transform(texts, combos, n, m),
    })
}

fn direct(texts: &[&[u64]], combos: &[&[Term<'_>]], n: usize, m: usize) -> Vec<Vec<i64>> {
    let offsets = n - m + 1;
    combos
        .iter()
        .map(|combo| {
            let mut out = vec![0i64; offsets];
            for term in combo.iter() {
                let text = texts[term.text];
                for (j, &w) in term.pattern.iter().enumerate() {
                    if w == 0 {
                        continue;
                    }
                    let w = term.coeff * w as i64;
                    for (o, &t) in out.iter_mut().zip(&text[j..j + offsets]) {
                        *o += w * t as i64;
                    }
                }
            }
            out
        })
        .collect()
}

fn transform(texts: &[&[u64]], combos: &[&[Term<'_>]], n: usize, m: usize) -> Vec<Vec<i64>> {
    let offsets = n - m + 1;
    let len = (4 * m).next_power_of_two().min(n.next_power_of_two()).max(2);
    let plan = ntt::Plan::new(len);
    let step = len - m + 1;

    // Kernel spectra: reversed and zero-padded so output k of a block lands at k + m - 1.
    let spectra: Vec<Vec<(usize, Vec<u64>)>> = combos
        .iter()
        .map(|combo| {
            combo
                .iter()
                .map(|term| {
                    let mut buf = vec![0u64; len];
                    let c = ntt::from_i64(term.coeff);
                    for (k, &v) in term.pattern.iter().rev().enumerate() {
                        buf[k] = ntt::mul(v % ntt::MODULUS, c);
                    }
                    plan.forward(&mut buf);
                    (term.text, buf)
                })
                .collect()
        })
        .collect();

    let used: Vec<bool> = (0..texts.len())
        .map(|t| combos.iter().any(|c| c.iter().any(|term| term.text == t)))
        .collect();

    let mut out = vec![vec![0i64; offsets]; combos.len()];
    let mut text_spectra: Vec<Vec<u64>> = vec![vec![0u64; len]; texts.len()];
    let mut acc = vec![0u64; len];
    let mut start = 0;
    while start < offsets {
        for (t, text) in texts.iter().enumerate() {
            if !used[t] {
                continue;
            }
            let buf = &mut text_spectra[t];
            let end = (start + len).min(n);
            buf[..end - start].copy_from_slice(&text[start..end]);
            buf[end - start..].fill(0);
            plan.forward(buf);
        }
        let count = step.min(offsets - start);
        for (c, combo) in spectra.iter().enumerate() {
            acc.fill(0);
            for (t, spectrum) in combo {
                for ((a, &x), &y) in acc.iter_mut().zip(&text_spectra[*t]).zip(spectrum) {
                    *a = ntt::add(*a, ntt::mul(x, y));
                }
            }
            plan.inverse(&mut acc);
            for k in 0..count {
                out[c][start + k] = ntt::to_i64(acc[k + m - 1]);
            }
        }
        start += step;
    }
    out
}

/// Real-valued sliding correlation through a floating-point FFT.
pub fn correlate_real(a: &[f64], b: &[f64]) -> Vec<f64> {
    assert!(!b.is_empty() && b.len() <= a.len());
    let mut planner = FftPlanner::new();
    let (len, fa) = real_spectrum(&mut planner, a, a.len() + b.len() - 1);
    let (_, fb) = real_spectrum(&mut planner, &reversed(b), len);
    let mut prod: Vec<Complex<f64>> = fa.iter().zip(&fb).map(|(x, y)| x * y).collect();
    planner.plan_fft_inverse(len).process(&mut prod);
    let norm = len as f64;
    (0..=a.len() - b.len())
        .map(|i| prod[i + b.len() - 1].re / norm)
        .collect()
}

fn reversed(b: &[f64]) -> Vec<f64> {
    b.iter().rev().copied().collect()
}

fn real_spectrum(planner: &mut FftPlanner<f64>, a: &[f64], min_len: usize) -> (usize, Vec<Complex<f64>>) {
    let len = min_len.next_power_of_two();
    let mut buf = vec![Complex::new(0.0, 0.0); len];
    for (dst, &v) in buf.iter_mut().zip(a) {
        dst.re = v;
    }
    planner.plan_fft_forward(len).process(&mut buf);
    (len, buf)
}

/// Exact distance profile as a sum of one real correlation per pattern letter:
/// `S = Σ_a T_a ⊗ χ_a(P)` with `T_a[i] = d(a, t_i)`.
///
/// Wildcards are rejected. Transform round-off is removed by snapping values
/// below half the minimal nonzero distance to zero: a true profile value is
/// either 0 or at least that distance.
pub fn exact_profile_per_letter(
    text: &SymbolString,
    pattern: &SymbolString,
    ms: &MetricSpace,
) -> Result<DistanceProfile> {
    check_alignment(text, pattern)?;
    if text.contains(&WILDCARD) || pattern.contains(&WILDCARD) {
        return Err(Error::WildcardDistance);
    }
    text.check_alphabet(ms.size())?;
    pattern.check_alphabet(ms.size())?;

    let (n, m) = (text.len(), pattern.len());
    let mut positions: HashMap<Symbol, Vec<usize>> = HashMap::new();
    for (j, &a) in pattern.iter().enumerate() {
        positions.entry(a).or_default().push(j);
    }
    let mut letters: Vec<Symbol> = positions.keys().copied().collect();
    letters.sort_unstable();

    let mut planner = FftPlanner::new();
    let len = (n + m - 1).next_power_of_two();
    let mut total = vec![Complex::new(0.0, 0.0); len];
    for a in letters {
        let row: Vec<f64> = text.iter().map(|&t| ms.d(a, t)).collect();
        let (_, ft) = real_spectrum(&mut planner, &row, len);
        let mut indicator = vec![0.0; m];
        for &j in &positions[&a] {
            indicator[m - 1 - j] = 1.0;
        }
        let (_, fp) = real_spectrum(&mut planner, &indicator, len);
        for ((acc, x), y) in total.iter_mut().zip(&ft).zip(&fp) {
            *acc += x * y;
        }
    }
    planner.plan_fft_inverse(len).process(&mut total);

    let floor = ms.min_nonzero_distance() / 2.0;
    let values = (0..=n - m)
        .map(|i| {
            let v = total[i + m - 1].re / len as f64;
            if v < floor {
                0.0
            } else {
                v * ms.scale()
            }
        })
        .collect();
    Ok(DistanceProfile::exact(values, ms.scale()))
}
