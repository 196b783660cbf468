//! Random instance generators shared by tests, benchmarks and the CLI `bench` command.

use rand::Rng;

use crate::metric::{MetricSpace, Symbol, SymbolString, WILDCARD};

/// Uniform metric: every pair of distinct symbols at distance 1.
pub fn hamming_matrix(size: usize) -> Vec<Vec<f64>> {
    (0..size)
        .map(|x| (0..size).map(|y| if x == y { 0.0 } else { 1.0 }).collect())
        .collect()
}

pub fn hamming(size: usize) -> MetricSpace {
    MetricSpace::validate(&hamming_matrix(size)).expect("uniform metric is valid")
}

/// Random valid metric whose dynamic range is exactly `b_d` when `size ≥ 3`.
///
/// Distances are `1 + (b_d - 1)·ρ(x, y)` for `x ≠ y`, where `ρ` is the max-norm
/// distance between random points of the unit square. Any map `s ↦ 1 + c·s`
/// applied to a pseudometric off the diagonal is again a metric. Symbols 0 and
/// 1 sit on opposite corners (distance `b_d`) and symbol 2 shares a corner with
/// symbol 0 (distance 1).
pub fn random_metric_matrix<R: Rng + ?Sized>(size: usize, b_d: f64, rng: &mut R) -> Vec<Vec<f64>> {
    assert!(b_d >= 1.0);
    let points: Vec<[f64; 2]> = (0..size)
        .map(|x| match x {
            0 | 2 => [0.0, 0.0],
            1 => [1.0, 1.0],
            _ => [rng.random::<f64>(), rng.random::<f64>()],
        })
        .collect();
    (0..size)
        .map(|x| {
            (0..size)
                .map(|y| {
                    if x == y {
                        0.0
                    } else {
                        let rho = (points[x][0] - points[y][0])
                            .abs()
                            .max((points[x][1] - points[y][1]).abs());
                        1.0 + (b_d - 1.0) * rho
                    }
                })
                .collect()
        })
        .collect()
}

pub fn random_metric<R: Rng + ?Sized>(size: usize, b_d: f64, rng: &mut R) -> MetricSpace {
    MetricSpace::validate(&random_metric_matrix(size, b_d, rng)).expect("generator yields a metric")
}

/// `size` distinct random points in `[0, extent)^dim`.
pub fn random_points<R: Rng + ?Sized>(size: usize, dim: usize, extent: f64, rng: &mut R) -> Vec<Vec<f64>> {
    (0..size)
        .map(|_| (0..dim).map(|_| rng.random::<f64>() * extent).collect())
        .collect()
}

pub fn random_string<R: Rng + ?Sized>(len: usize, size: usize, rng: &mut R) -> SymbolString {
    (0..len)
        .map(|_| rng.random_range(0..size) as Symbol)
        .collect()
}

/// Replaces each position with a wildcard independently with probability `rate`.
pub fn sprinkle_wildcards<R: Rng + ?Sized>(s: &SymbolString, rate: f64, rng: &mut R) -> SymbolString {
    s.iter()
        .map(|&c| if rng.random::<f64>() < rate { WILDCARD } else { c })
        .collect()
}

/// Copies `text[offset..offset + len]` and then changes exactly `mismatches`
/// distinct positions to a different symbol.
pub fn planted_pattern<R: Rng + ?Sized>(
    text: &SymbolString,
    offset: usize,
    len: usize,
    mismatches: usize,
    size: usize,
    rng: &mut R,
) -> SymbolString {
    assert!(size >= 2 && mismatches <= len);
    let mut p: Vec<Symbol> = text[offset..offset + len].to_vec();
    let positions = rand::seq::index::sample(rng, len, mismatches);
    for j in positions {
        let orig = if p[j] == WILDCARD { 0 } else { p[j] };
        let shift = rng.random_range(1..size) as Symbol;
        p[j] = (orig + shift) % size as Symbol;
    }
    SymbolString::new(p)
}
