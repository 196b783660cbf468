//! `(1 ± ε)` approximation of the distance profile.
//!
//! Distances are split into levels `[D, 2D)` for `D = 1, 2, 4, …` up to the
//! dynamic range. For each level and each keep-probability `q`, `K` sampling
//! runs are made on `π(T)` and `π(P)` where `π` is a fresh draw from a
//! separating family at threshold `D`. Per offset, the `q` with enough
//! matches and the largest `q · m0` is kept, and the level contributes
//!
//! ```text
//! S_D(i) = (1 − q) / (q · m0) · Σ_{j ∈ M1} d(t_{i+j}, p_j)
//! ```
//!
//! where `M1` holds the returned positions whose true distance falls in the
//! level's bucket. The estimate is `R(i) = Σ_D S_D(i)`.
//!
//! All randomness comes from streams keyed by the run's grid coordinates, and
//! per-chunk partial sums are folded in a fixed order, so the output does not
//! depend on the number of threads.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hash_family::{FamilyKind, HashFamily, DEFAULT_PARTITION_CONSTANT};
use crate::metric::{check_alignment, MetricSpace, SymbolString};
use crate::profile::{DistanceProfile, LevelDiagnostics, LevelEstimate, Mode};
use crate::rng::{stream, Purpose, StreamKey};
use crate::sampler::{sample, SampleOutcome};

pub const DEFAULT_SEED: u64 = 0x6d65_7472_6963;

/// `e^{-4} · K ≥ 1` needs at least this many iterations.
pub const MIN_ITERATIONS: usize = 55;

/// Iterations per parallel task. Fixed so partial sums fold identically on any thread count.
const CHUNK: usize = 32;

#[derive(Clone, Debug, PartialEq)]
pub struct ApproxParams {
    /// Relative error target in `(0, 1)`.
    pub epsilon: f64,
    /// Confidence exponent, at least 1: per-offset failure target `e^{-t}`.
    pub t: f64,
    /// Multiplier `c0` in `K = ⌈c0 · C · t / ε²⌉`.
    pub k_const: f64,
    pub master_seed: u64,
    /// The q sweep keeps values `> q_floor_factor / m`.
    pub q_floor_factor: f64,
    /// Upper bound on the total number of sampling runs.
    pub max_sample_runs: u64,
    /// `c` in the partition family's factor `c · ln(σ + 1)`.
    pub partition_constant: f64,
}

impl Default for ApproxParams {
    fn default() -> Self {
        Self {
            epsilon: 0.25,
            t: 3.0,
            k_const: 4.0,
            master_seed: DEFAULT_SEED,
            q_floor_factor: 1.0,
            max_sample_runs: 50_000_000,
            partition_constant: DEFAULT_PARTITION_CONSTANT,
        }
    }
}

impl ApproxParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return bad(format!("epsilon must lie in (0, 1), got {}", self.epsilon));
        }
        if !(self.t >= 1.0 && self.t.is_finite()) {
            return bad(format!("t must be at least 1, got {}", self.t));
        }
        if !(self.k_const > 0.0 && self.k_const.is_finite()) {
            return bad(format!("k_const must be positive, got {}", self.k_const));
        }
        if !(self.q_floor_factor > 0.0 && self.q_floor_factor.is_finite()) {
            return bad(format!("q_floor_factor must be positive, got {}", self.q_floor_factor));
        }
        if !(self.partition_constant > 0.0 && self.partition_constant.is_finite()) {
            return bad(format!(
                "partition_constant must be positive, got {}",
                self.partition_constant
            ));
        }
        Ok(())
    }

    /// `K = max(55, ⌈c0 · C · t / ε²⌉)` for a family with factor `C`.
    pub fn iterations(&self, factor: f64) -> usize {
        let k = (self.k_const * factor * self.t / (self.epsilon * self.epsilon)).ceil();
        (k as usize).max(MIN_ITERATIONS)
    }
}

/// `1/2, 1/4, …` while `q > floor_factor / m`. Always contains `1/2`.
pub fn q_sweep(m: usize, floor_factor: f64) -> Vec<f64> {
    let floor = floor_factor / m as f64;
    let mut qs = vec![0.5];
    let mut q = 0.25;
    while q > floor {
        qs.push(q);
        q /= 2.0;
    }
    qs
}

/// Level thresholds from the top power of two down to 1.
pub fn levels(ms: &MetricSpace) -> Vec<f64> {
    let mut out = Vec::new();
    let mut d = ms.top_level();
    while d >= 1.0 {
        out.push(d);
        d /= 2.0;
    }
    out
}

/// Among the `q` values with `m0 ≥ e^{-4} K`, the index maximizing `q · m0`;
/// ties go to the larger `q`. `None` when no `q` qualifies.
pub fn choose_q(m0_by_q: &[u32], q_values: &[f64], iterations: usize) -> Option<usize> {
    let needed = (-4.0f64).exp() * iterations as f64;
    let mut best: Option<(usize, f64)> = None;
    for (k, (&m0, &q)) in m0_by_q.iter().zip(q_values).enumerate() {
        if (m0 as f64) < needed {
            continue;
        }
        let score = q * m0 as f64;
        match best {
            Some((b, s)) if score < s || (score == s && q_values[b] >= q) => {}
            _ => best = Some((k, score)),
        }
    }
    best.map(|(k, _)| k)
}

/// `S_D = (1 − q) / (q · m0) · Σ_{j ∈ M1} d_j`.
pub fn estimate_bucket_mass(m0: u32, q: f64, in_bucket_sum: f64) -> Result<f64> {
    if m0 == 0 {
        return Err(Error::DivisionGuard);
    }
    Ok((1.0 - q) / (q * m0 as f64) * in_bucket_sum)
}

#[derive(Clone)]
struct Tally {
    m0: Vec<u32>,
    m1: Vec<u32>,
    sum: Vec<f64>,
}

impl Tally {
    fn new(offsets: usize) -> Self {
        Self {
            m0: vec![0; offsets],
            m1: vec![0; offsets],
            sum: vec![0.0; offsets],
        }
    }

    fn absorb(&mut self, other: &Tally) {
        for (a, b) in self.m0.iter_mut().zip(&other.m0) {
            *a += b;
        }
        for (a, b) in self.m1.iter_mut().zip(&other.m1) {
            *a += b;
        }
        for (a, b) in self.sum.iter_mut().zip(&other.sum) {
            *a += b;
        }
    }
}

struct Level<'a> {
    exponent: u32,
    threshold: f64,
    family: HashFamily<'a>,
}

struct Run<'a> {
    text: &'a SymbolString,
    pattern: &'a SymbolString,
    ms: &'a MetricSpace,
    seed: u64,
    offsets: usize,
}

impl Run<'_> {
    fn chunk(&self, level: &Level<'_>, q_index: usize, q: f64, iterations: std::ops::Range<usize>) -> Result<Tally> {
        let mut tally = Tally::new(self.offsets);
        let upper = 2.0 * level.threshold;
        for iteration in iterations {
            let key = StreamKey {
                level: level.exponent,
                q_index: q_index as u32,
                iteration: iteration as u64,
            };
            let hash = level.family.sample(&mut stream(self.seed, Purpose::HashDraw, key));
            let hashed_text = hash.apply(self.text);
            let hashed_pattern = hash.apply(self.pattern);
            let mut rng = stream(self.seed, Purpose::Subsample, key);
            let outcomes = sample(q, &hashed_text, &hashed_pattern, &mut rng)?;
            for (i, outcome) in outcomes.into_iter().enumerate() {
                match outcome {
                    SampleOutcome::Match => tally.m0[i] += 1,
                    SampleOutcome::Found(j) => {
                        let d = self.ms.d(self.text[i + j], self.pattern[j]);
                        debug_assert!(d > 0.0, "hash separated equal symbols");
                        if d >= level.threshold && d < upper {
                            tally.m1[i] += 1;
                            tally.sum[i] += d;
                        }
                    }
                    SampleOutcome::Nothing => {}
                }
            }
        }
        Ok(tally)
    }

    /// Tallies for every q at one level, folded in chunk order.
    fn level_tallies(&self, level: &Level<'_>, q_values: &[f64], iterations: usize) -> Result<Vec<Tally>> {
        let chunks = iterations.div_ceil(CHUNK);
        let tasks: Vec<(usize, usize)> = (0..q_values.len())
            .flat_map(|qi| (0..chunks).map(move |c| (qi, c)))
            .collect();
        let mut totals = vec![Tally::new(self.offsets); q_values.len()];
        // waves bound the memory held by unfolded partials
        let wave = (2 * rayon::current_num_threads()).max(1);
        for batch in tasks.chunks(wave) {
            let partials: Vec<Tally> = batch
                .par_iter()
                .map(|&(qi, c)| {
                    let range = c * CHUNK..((c + 1) * CHUNK).min(iterations);
                    self.chunk(level, qi, q_values[qi], range)
                })
                .collect::<Result<_>>()?;
            for (&(qi, _), partial) in batch.iter().zip(&partials) {
                totals[qi].absorb(partial);
            }
        }
        Ok(totals)
    }
}

/// Approximates `S[i] = Σ_j d(t_{i+j}, p_j)` for every offset.
///
/// The metric is normalized internally; returned values are in the metric's
/// original units. Wildcards in either string contribute nothing.
pub fn approximate_profile(
    text: &SymbolString,
    pattern: &SymbolString,
    ms: &MetricSpace,
    family: FamilyKind,
    params: &ApproxParams,
) -> Result<DistanceProfile> {
    check_alignment(text, pattern)?;
    params.validate()?;
    text.check_alphabet(ms.size())?;
    pattern.check_alphabet(ms.size())?;
    let ms = ms.normalize()?;

    let offsets = text.len() - pattern.len() + 1;
    let q_values = q_sweep(pattern.len(), params.q_floor_factor);
    let levels: Vec<Level<'_>> = levels(&ms)
        .into_iter()
        .map(|threshold| {
            Ok(Level {
                exponent: threshold.log2().round() as u32,
                threshold,
                family: HashFamily::new(family, &ms, threshold)?
                    .with_partition_constant(params.partition_constant),
            })
        })
        .collect::<Result<_>>()?;
    let iterations = params.iterations(levels[0].family.factor());

    let required = (levels.len() * q_values.len()) as u64 * iterations as u64;
    if required > params.max_sample_runs {
        return Err(Error::BudgetExceeded {
            required,
            cap: params.max_sample_runs,
        });
    }

    let run = Run {
        text,
        pattern,
        ms: &ms,
        seed: params.master_seed,
        offsets,
    };
    let mut estimate = vec![0.0; offsets];
    let mut diagnostics = Vec::with_capacity(levels.len());
    for level in &levels {
        let tallies = run.level_tallies(level, &q_values, iterations)?;
        let mut estimates = Vec::with_capacity(offsets);
        let mut m0_by_q = vec![0u32; q_values.len()];
        for (i, total) in estimate.iter_mut().enumerate() {
            for (slot, tally) in m0_by_q.iter_mut().zip(&tallies) {
                *slot = tally.m0[i];
            }
            let entry = match choose_q(&m0_by_q, &q_values, iterations) {
                Some(k) => {
                    let q = q_values[k];
                    let t = &tallies[k];
                    let s_d = estimate_bucket_mass(t.m0[i], q, t.sum[i])?;
                    LevelEstimate {
                        threshold: level.threshold,
                        chosen_q: Some(q),
                        m0: t.m0[i],
                        m1: t.m1[i],
                        s_d,
                        low_confidence: false,
                    }
                }
                None => LevelEstimate {
                    threshold: level.threshold,
                    chosen_q: None,
                    m0: 0,
                    m1: 0,
                    s_d: 0.0,
                    low_confidence: true,
                },
            };
            *total += entry.s_d;
            estimates.push(entry);
        }
        diagnostics.push(LevelDiagnostics {
            threshold: level.threshold,
            q_values: q_values.clone(),
            iterations,
            estimates,
        });
    }

    Ok(DistanceProfile {
        mode: Mode::Approx,
        values: estimate.into_iter().map(|v| v * ms.scale()).collect(),
        scale: ms.scale(),
        levels: diagnostics,
        sample_runs: required,
    })
}
