//! Probabilistically separating hash families.
//!
//! A family at threshold `D` with factor `C` must satisfy, for every draw `π`
//! and every pair of symbols:
//!
//! 1. `d(x, y) ≥ D  ⇒  π(x) ≠ π(y)`;
//! 2. `Pr[π(x) ≠ π(y)] ≤ C · d(x, y) / D`.
//!
//! Normed alphabets use a randomly shifted grid with cell side
//! `D / dim^(1/p)`, which gives `C = dim`. Finite metrics use a ball-growing
//! random partition (random radius in `[D/4, D/2)`, random center order).
//! All thresholds are in normalized metric units.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::metric::{MetricKind, MetricSpace, Symbol, SymbolString, WILDCARD};

/// Calibration constant of the partition family: `C = c · ln(σ + 1)`.
pub const DEFAULT_PARTITION_CONSTANT: f64 = 8.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FamilyKind {
    Grid,
    Partition,
}

impl FamilyKind {
    /// The natural family for a metric: grid for normed alphabets, partition otherwise.
    pub fn for_metric(ms: &MetricSpace) -> Self {
        match ms.kind() {
            MetricKind::Normed => FamilyKind::Grid,
            MetricKind::Finite => FamilyKind::Partition,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::Grid => "grid",
            FamilyKind::Partition => "partition",
        }
    }
}

/// A sampled relabeling `symbol → bucket`, buckets numbered from 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HashFunction {
    table: Vec<u32>,
    buckets: u32,
}

impl HashFunction {
    /// Builds a hash from arbitrary labels, renumbering them densely by first occurrence.
    pub fn from_labels<K: std::hash::Hash + Eq>(labels: impl IntoIterator<Item = K>) -> Self {
        let mut ids: HashMap<K, u32> = HashMap::new();
        let table = labels
            .into_iter()
            .map(|k| {
                let next = ids.len() as u32 + 1;
                *ids.entry(k).or_insert(next)
            })
            .collect();
        Self {
            table,
            buckets: ids.len() as u32,
        }
    }

    pub fn identity(size: usize) -> Self {
        Self::from_labels(0..size)
    }

    pub fn constant(size: usize) -> Self {
        Self::from_labels(std::iter::repeat_n((), size))
    }

    #[inline]
    pub fn bucket(&self, x: Symbol) -> u32 {
        self.table[x as usize]
    }

    pub fn buckets(&self) -> u32 {
        self.buckets
    }

    pub fn table(&self) -> &[u32] {
        &self.table
    }

    /// Relabels a string: symbol `x` becomes symbol `bucket(x) - 1`; wildcards pass through.
    pub fn apply(&self, s: &SymbolString) -> SymbolString {
        s.iter()
            .map(|&c| if c == WILDCARD { WILDCARD } else { self.table[c as usize] - 1 })
            .collect()
    }
}

/// A separating family at one threshold, bound to a normalized metric.
#[derive(Clone, Debug)]
pub struct HashFamily<'a> {
    kind: FamilyKind,
    threshold: f64,
    metric: &'a MetricSpace,
    partition_constant: f64,
}

impl<'a> HashFamily<'a> {
    pub fn new(kind: FamilyKind, metric: &'a MetricSpace, threshold: f64) -> Result<Self> {
        if !(threshold >= 1.0) || !threshold.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "threshold must be a finite value ≥ 1, got {threshold}"
            )));
        }
        if kind == FamilyKind::Grid && metric.kind() != MetricKind::Normed {
            return Err(Error::WrongMetricKind { expected: "normed" });
        }
        Ok(Self {
            kind,
            threshold,
            metric,
            partition_constant: DEFAULT_PARTITION_CONSTANT,
        })
    }

    pub fn grid(metric: &'a MetricSpace, threshold: f64) -> Result<Self> {
        Self::new(FamilyKind::Grid, metric, threshold)
    }

    /// Partition family. Accepts normed metrics too, since it only needs distances.
    pub fn partition(metric: &'a MetricSpace, threshold: f64) -> Result<Self> {
        Self::new(FamilyKind::Partition, metric, threshold)
    }

    pub fn with_partition_constant(mut self, c: f64) -> Self {
        self.partition_constant = c;
        self
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn metric(&self) -> &'a MetricSpace {
        self.metric
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// Separation factor `C`.
    pub fn factor(&self) -> f64 {
        match self.kind {
            FamilyKind::Grid => self.metric.norm().map_or(1, |(dim, _)| dim) as f64,
            FamilyKind::Partition => partition_factor(self.metric.size(), self.partition_constant),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> HashFunction {
        match self.kind {
            FamilyKind::Grid => grid_hash_sample(self.metric, self.threshold, rng),
            FamilyKind::Partition => partition_hash_sample(self.metric, self.threshold, rng),
        }
        .expect("family construction checked the metric kind")
    }
}

pub fn partition_factor(size: usize, constant: f64) -> f64 {
    constant * ((size + 1) as f64).ln()
}

/// `π(x) = ⌊x / Δ − ε⌋` per coordinate with `ε` uniform in `[0,1)^dim` and
/// `Δ = D / dim^(1/p)` in normalized units.
pub fn grid_hash_sample<R: Rng + ?Sized>(ms: &MetricSpace, threshold: f64, rng: &mut R) -> Result<HashFunction> {
    let (dim, p) = ms.norm().ok_or(Error::WrongMetricKind { expected: "normed" })?;
    let root = if p.is_infinite() { 1.0 } else { (dim as f64).powf(p.recip()) };
    // coordinates are raw; the cell side is converted back to raw units
    let cell = threshold * ms.scale() / root;
    let shift: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
    let cells = (0..ms.size() as Symbol).map(|x| {
        let point = ms.point(x).expect("normed metric has points");
        point
            .iter()
            .zip(&shift)
            .map(|(&c, &e)| (c / cell - e).floor() as i64)
            .collect::<Vec<i64>>()
    });
    Ok(HashFunction::from_labels(cells))
}

/// Ball-growing partition: radius uniform in `[D/4, D/2)`, centers in random
/// order, each symbol joins the first center within the radius. Every cluster
/// has diameter at most `2r < D`.
pub fn partition_hash_sample<R: Rng + ?Sized>(ms: &MetricSpace, threshold: f64, rng: &mut R) -> Result<HashFunction> {
    let size = ms.size();
    let radius = rng.random_range(threshold / 4.0..threshold / 2.0);
    let mut order: Vec<Symbol> = (0..size as Symbol).collect();
    order.shuffle(rng);
    let mut owner = vec![u32::MAX; size];
    for &center in &order {
        for x in 0..size {
            if owner[x] == u32::MAX && ms.d(center, x as Symbol) <= radius {
                owner[x] = center;
            }
        }
    }
    Ok(HashFunction::from_labels(owner))
}
