use serde::Serialize;

/// Which method produced a profile.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Approx,
}

/// Per-offset, per-level outcome of the approximator.
///
/// `s_d` is in normalized metric units; `D` is the level threshold.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelEstimate {
    #[serde(rename = "D")]
    pub threshold: f64,
    pub chosen_q: Option<f64>,
    pub m0: u32,
    pub m1: u32,
    pub s_d: f64,
    pub low_confidence: bool,
}

/// Everything recorded for one level `D` of the approximator.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelDiagnostics {
    pub threshold: f64,
    pub q_values: Vec<f64>,
    pub iterations: usize,
    /// One entry per offset.
    pub estimates: Vec<LevelEstimate>,
}

/// Compact per-level summary suitable for serialization.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelSummary {
    #[serde(rename = "D")]
    pub threshold: f64,
    pub q_values: Vec<f64>,
    pub iterations: usize,
    /// How often each q in `q_values` was chosen across offsets.
    pub chosen_q_counts: Vec<usize>,
    pub low_confidence: usize,
    pub mean_m0: f64,
    pub mean_m1: f64,
    pub total_s_d: f64,
}

impl LevelDiagnostics {
    pub fn summary(&self) -> LevelSummary {
        let mut chosen_q_counts = vec![0; self.q_values.len()];
        for e in &self.estimates {
            if let Some(q) = e.chosen_q {
                if let Some(k) = self.q_values.iter().position(|&v| v == q) {
                    chosen_q_counts[k] += 1;
                }
            }
        }
        let count = self.estimates.len().max(1) as f64;
        LevelSummary {
            threshold: self.threshold,
            q_values: self.q_values.clone(),
            iterations: self.iterations,
            chosen_q_counts,
            low_confidence: self.estimates.iter().filter(|e| e.low_confidence).count(),
            mean_m0: self.estimates.iter().map(|e| e.m0 as f64).sum::<f64>() / count,
            mean_m1: self.estimates.iter().map(|e| e.m1 as f64).sum::<f64>() / count,
            total_s_d: self.estimates.iter().map(|e| e.s_d).sum(),
        }
    }
}

/// Distance of the pattern at every offset `0..=n-m`, in the metric's original units.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceProfile {
    pub mode: Mode,
    pub values: Vec<f64>,
    /// Divisor that was applied to raw distances internally; values are already rescaled.
    pub scale: f64,
    /// Empty for exact profiles.
    pub levels: Vec<LevelDiagnostics>,
    /// Number of sampling runs performed (0 for exact profiles).
    pub sample_runs: u64,
}

impl DistanceProfile {
    pub fn exact(values: Vec<f64>, scale: f64) -> Self {
        Self {
            mode: Mode::Exact,
            values,
            scale,
            levels: Vec::new(),
            sample_runs: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Offsets where some level had no usable q.
    pub fn low_confidence_offsets(&self) -> Vec<usize> {
        (0..self.values.len())
            .filter(|&i| self.levels.iter().any(|l| l.estimates[i].low_confidence))
            .collect()
    }
}
