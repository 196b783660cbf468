//! Alphabet metrics and symbol strings.
//!
//! A [`MetricSpace`] is either an explicit `σ × σ` distance matrix or a set of
//! `σ` points in `R^dim` under an `L_p` norm. Both kinds carry a `scale`: the
//! divisor that has been applied to the raw distances. [`MetricSpace::normalize`]
//! picks the scale so that the smallest nonzero distance is exactly 1, after
//! which every nonzero distance lies in `[1, b_d]`.

use std::ops::Deref;

use crate::error::{Error, Result};

/// Dense symbol id in `0..σ`.
pub type Symbol = u32;

/// Distinguished id for a "don't care" position. Never a valid alphabet index.
pub const WILDCARD: Symbol = Symbol::MAX;

/// Text or pattern as a sequence of symbol ids, possibly containing [`WILDCARD`]s.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct SymbolString(Vec<Symbol>);

impl SymbolString {
    pub fn new(symbols: Vec<Symbol>) -> Self {
        Self(symbols)
    }

    pub fn into_inner(self) -> Vec<Symbol> {
        self.0
    }

    pub fn is_wildcard(&self, index: usize) -> bool {
        self.0[index] == WILDCARD
    }

    pub fn has_wildcards(&self) -> bool {
        self.0.contains(&WILDCARD)
    }

    /// Checks that every non-wildcard id is below `size`.
    pub fn check_alphabet(&self, size: usize) -> Result<()> {
        match self.0.iter().find(|&&s| s != WILDCARD && s as usize >= size) {
            Some(&symbol) => Err(Error::SymbolOutOfRange { symbol, size }),
            None => Ok(()),
        }
    }
}

impl Deref for SymbolString {
    type Target = [Symbol];

    fn deref(&self) -> &[Symbol] {
        &self.0
    }
}

impl From<Vec<Symbol>> for SymbolString {
    fn from(symbols: Vec<Symbol>) -> Self {
        Self(symbols)
    }
}

impl FromIterator<Symbol> for SymbolString {
    fn from_iter<I: IntoIterator<Item = Symbol>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

/// Checks the usual preconditions for aligning `pattern` against `text`.
pub(crate) fn check_alignment(text: &SymbolString, pattern: &SymbolString) -> Result<()> {
    if pattern.is_empty() {
        return Err(Error::EmptyPattern);
    }
    if pattern.len() > text.len() {
        return Err(Error::PatternTooLong {
            m: pattern.len(),
            n: text.len(),
        });
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MetricKind {
    Finite,
    Normed,
}

#[derive(Clone, Debug)]
enum Geometry {
    /// Row-major `σ × σ` matrix, already divided by `scale`.
    Finite { matrix: Vec<f64> },
    /// Raw coordinates, row-major `σ × dim`. Distances are divided by `scale` on lookup.
    Normed { p: f64, dim: usize, points: Vec<f64> },
}

/// Validation strictness for finite metrics.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Validation {
    Full,
    /// Skip the O(σ³) triangle check for trusted inputs.
    SkipTriangle,
}

/// Relative slack allowed on the triangle inequality for floating-point input.
const TRIANGLE_SLACK: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct MetricSpace {
    geometry: Geometry,
    size: usize,
    scale: f64,
    b_d: f64,
    max_distance: f64,
    min_nonzero: f64,
}

impl MetricSpace {
    /// Validates a raw distance matrix with all metric axioms checked.
    pub fn validate(raw: &[Vec<f64>]) -> Result<Self> {
        Self::validate_with(raw, Validation::Full)
    }

    pub fn validate_with(raw: &[Vec<f64>], validation: Validation) -> Result<Self> {
        let size = raw.len();
        if size == 0 {
            return Err(Error::MalformedMatrix("empty matrix".into()));
        }
        let mut matrix = Vec::with_capacity(size * size);
        for (x, row) in raw.iter().enumerate() {
            if row.len() != size {
                return Err(Error::MalformedMatrix(format!(
                    "row {x} has {} entries, expected {size}",
                    row.len()
                )));
            }
            for (y, &v) in row.iter().enumerate() {
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::MalformedMatrix(format!(
                        "entry ({x},{y}) = {v} is not a finite nonnegative real"
                    )));
                }
            }
            matrix.extend_from_slice(row);
        }
        let at = |x: usize, y: usize| matrix[x * size + y];

        for x in 0..size {
            if at(x, x) != 0.0 {
                return Err(Error::NonzeroDiagonal { x, value: at(x, x) });
            }
            for y in x + 1..size {
                if at(x, y) != at(y, x) {
                    return Err(Error::AsymmetricMetric {
                        x,
                        y,
                        forward: at(x, y),
                        backward: at(y, x),
                    });
                }
                if at(x, y) == 0.0 {
                    return Err(Error::ZeroOffDiagonal { x, y });
                }
            }
        }

        if validation == Validation::Full {
            for x in 0..size {
                for z in x + 1..size {
                    let direct = at(x, z);
                    for y in 0..size {
                        let via = at(x, y) + at(y, z);
                        if direct > via * (1.0 + TRIANGLE_SLACK) {
                            return Err(Error::TriangleViolation {
                                x,
                                y,
                                z,
                                direct,
                                via_first: at(x, y),
                                via_second: at(y, z),
                            });
                        }
                    }
                }
            }
        }

        let (min_nonzero, max_distance) = extremes(size, at);
        Ok(Self {
            geometry: Geometry::Finite { matrix },
            size,
            scale: 1.0,
            b_d: ratio(min_nonzero, max_distance),
            max_distance,
            min_nonzero,
        })
    }

    /// Points in `R^dim` under the `L_p` norm; `p = f64::INFINITY` selects the max norm.
    pub fn normed(points: &[Vec<f64>], p: f64) -> Result<Self> {
        if !(p >= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "norm exponent must lie in [1, inf], got {p}"
            )));
        }
        let size = points.len();
        let dim = points.first().map_or(0, Vec::len);
        if size == 0 || dim == 0 {
            return Err(Error::MalformedMatrix("no points or zero dimension".into()));
        }
        let mut flat = Vec::with_capacity(size * dim);
        for (x, point) in points.iter().enumerate() {
            if point.len() != dim {
                return Err(Error::MalformedMatrix(format!(
                    "point {x} has dimension {}, expected {dim}",
                    point.len()
                )));
            }
            if point.iter().any(|c| !c.is_finite()) {
                return Err(Error::MalformedMatrix(format!(
                    "point {x} has a non-finite coordinate"
                )));
            }
            flat.extend_from_slice(point);
        }
        let mut ms = Self {
            geometry: Geometry::Normed {
                p,
                dim,
                points: flat,
            },
            size,
            scale: 1.0,
            b_d: 1.0,
            max_distance: 0.0,
            min_nonzero: 0.0,
        };
        for x in 0..size {
            for y in x + 1..size {
                if ms.d(x as Symbol, y as Symbol) == 0.0 {
                    return Err(Error::ZeroOffDiagonal { x, y });
                }
            }
        }
        let (min_nonzero, max_distance) = extremes(size, |x, y| ms.d(x as Symbol, y as Symbol));
        ms.min_nonzero = min_nonzero;
        ms.max_distance = max_distance;
        ms.b_d = ratio(min_nonzero, max_distance);
        Ok(ms)
    }

    /// Rescales so that the minimal nonzero distance is exactly 1. Idempotent.
    pub fn normalize(&self) -> Result<Self> {
        if self.size < 2 {
            return Err(Error::DegenerateAlphabet { size: self.size });
        }
        let mut out = self.clone();
        match &mut out.geometry {
            Geometry::Finite { matrix } => {
                let divisor = self.min_nonzero;
                out.scale = self.scale * divisor;
                for v in matrix.iter_mut() {
                    *v /= divisor;
                }
            }
            Geometry::Normed { p, dim, points } => {
                // scale is the raw minimum itself, so the closest pair divides to exactly 1
                let (raw_min, _) = extremes(self.size, |x, y| {
                    lp_distance(
                        &points[x * *dim..(x + 1) * *dim],
                        &points[y * *dim..(y + 1) * *dim],
                        *p,
                    )
                });
                out.scale = raw_min;
            }
        }
        let (min_nonzero, max_distance) = extremes(out.size, |x, y| out.d(x as Symbol, y as Symbol));
        out.min_nonzero = min_nonzero;
        out.max_distance = max_distance;
        out.b_d = ratio(min_nonzero, max_distance);
        Ok(out)
    }

    pub fn kind(&self) -> MetricKind {
        match self.geometry {
            Geometry::Finite { .. } => MetricKind::Finite,
            Geometry::Normed { .. } => MetricKind::Normed,
        }
    }

    /// Alphabet size σ.
    pub fn size(&self) -> usize {
        self.size
    }

    /// Total divisor applied to the raw distances.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Dynamic range: max distance over min nonzero distance.
    pub fn b_d(&self) -> f64 {
        self.b_d
    }

    /// Smallest power of two that is at least `b_d`; the top level of the approximator.
    pub fn top_level(&self) -> f64 {
        // the tolerance keeps 64.00000000001 from rounding up to 128
        let exponent = (self.b_d.log2() - 1e-9).ceil().max(0.0);
        2f64.powi(exponent as i32)
    }

    pub fn max_distance(&self) -> f64 {
        self.max_distance
    }

    pub fn min_nonzero_distance(&self) -> f64 {
        self.min_nonzero
    }

    pub fn is_normalized(&self) -> bool {
        self.min_nonzero == 1.0
    }

    /// Dimension and norm exponent for normed metrics.
    pub fn norm(&self) -> Option<(usize, f64)> {
        match self.geometry {
            Geometry::Normed { p, dim, .. } => Some((dim, p)),
            Geometry::Finite { .. } => None,
        }
    }

    /// Raw coordinates of a normed symbol.
    pub fn point(&self, x: Symbol) -> Option<&[f64]> {
        match &self.geometry {
            Geometry::Normed { dim, points, .. } => {
                let at = x as usize * dim;
                Some(&points[at..at + dim])
            }
            Geometry::Finite { .. } => None,
        }
    }

    /// Checked distance between two symbols.
    pub fn dist(&self, x: Symbol, y: Symbol) -> Result<f64> {
        if x == WILDCARD || y == WILDCARD {
            return Err(Error::WildcardDistance);
        }
        for s in [x, y] {
            if s as usize >= self.size {
                return Err(Error::SymbolOutOfRange {
                    symbol: s,
                    size: self.size,
                });
            }
        }
        Ok(self.d(x, y))
    }

    /// Unchecked distance lookup for hot loops. Panics on out-of-range ids.
    #[inline]
    pub fn d(&self, x: Symbol, y: Symbol) -> f64 {
        match &self.geometry {
            Geometry::Finite { matrix } => matrix[x as usize * self.size + y as usize],
            Geometry::Normed { p, dim, points } => {
                if x == y {
                    return 0.0;
                }
                let a = &points[x as usize * dim..(x as usize + 1) * dim];
                let b = &points[y as usize * dim..(y as usize + 1) * dim];
                lp_distance(a, b, *p) / self.scale
            }
        }
    }

    /// The full matrix of current-unit distances, row-major.
    pub fn to_matrix(&self) -> Vec<Vec<f64>> {
        (0..self.size)
            .map(|x| {
                (0..self.size)
                    .map(|y| self.d(x as Symbol, y as Symbol))
                    .collect()
            })
            .collect()
    }
}

/// `||a - b||_p`, with `p = inf` meaning the max coordinate difference.
pub fn lp_distance(a: &[f64], b: &[f64], p: f64) -> f64 {
    let diffs = a.iter().zip(b).map(|(u, v)| (u - v).abs());
    if p == 1.0 {
        diffs.sum()
    } else if p == 2.0 {
        diffs.map(|d| d * d).sum::<f64>().sqrt()
    } else if p.is_infinite() {
        diffs.fold(0.0, f64::max)
    } else {
        diffs.map(|d| d.powf(p)).sum::<f64>().powf(p.recip())
    }
}

fn extremes(size: usize, d: impl Fn(usize, usize) -> f64) -> (f64, f64) {
    let mut min_nonzero = f64::INFINITY;
    let mut max = 0.0f64;
    for x in 0..size {
        for y in x + 1..size {
            let v = d(x, y);
            max = max.max(v);
            if v > 0.0 {
                min_nonzero = min_nonzero.min(v);
            }
        }
    }
    (if min_nonzero.is_finite() { min_nonzero } else { 0.0 }, max)
}

fn ratio(min_nonzero: f64, max: f64) -> f64 {
    if min_nonzero > 0.0 {
        (max / min_nonzero).max(1.0)
    } else {
        1.0
    }
}
