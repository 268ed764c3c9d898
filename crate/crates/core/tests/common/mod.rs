#![allow(dead_code)]

pub mod precise;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use resforge::PiecewiseConstantStructure;

/// Cells of random widths on `[0, length]` with values uniform in
/// `[n_lo, n_hi]`.
pub fn random_structure(rng: &mut ChaCha8Rng, length: f64, cells: usize, n_lo: f64, n_hi: f64) -> PiecewiseConstantStructure {
    let mut cuts: Vec<f64> = (0..cells - 1).map(|_| rng.gen_range(0.05..0.95) * length).collect();
    cuts.sort_by(f64::total_cmp);
    let mut edges = vec![0.0];
    edges.extend(cuts);
    edges.push(length);
    let built = edges
        .windows(2)
        .map(|w| resforge::Cell { x0: w[0], x1: w[1], n: rng.gen_range(n_lo..=n_hi) })
        .collect();
    PiecewiseConstantStructure::new(length, built).unwrap_or_else(|_| random_structure(rng, length, cells, n_lo, n_hi))
}

/// Equal cells with values uniform in `[n_lo, n_hi]`, mirrored about the
/// midpoint when `symmetric`.
pub fn random_grid(rng: &mut ChaCha8Rng, length: f64, cells: usize, n_lo: f64, n_hi: f64, symmetric: bool) -> PiecewiseConstantStructure {
    let mut v: Vec<f64> = (0..cells).map(|_| rng.gen_range(n_lo..=n_hi)).collect();
    if symmetric {
        for i in 0..cells / 2 {
            v[cells - 1 - i] = v[i];
        }
    }
    PiecewiseConstantStructure::from_values(length, &v).unwrap()
}
