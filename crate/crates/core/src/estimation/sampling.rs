//! Latin hypercube sampling of multi-start points.

use crate::estimation::ParamBox;
use crate::network::N_PARAMS;
use crate::rng::make_rng;
use rand::seq::SliceRandom;
use rand::Rng;

/// Draws `m` points in the box, stratified per coordinate: each of the `m`
/// equal bins of every interval receives exactly one sample, bins are
/// assigned by an independent uniform permutation per coordinate, and the
/// position within a bin is uniform. Deterministic in `(m, box, seed)`.
pub fn latin_hypercube(m: usize, box_: &ParamBox, seed: u64) -> Vec<[f64; N_PARAMS]> {
    let mut rng = make_rng(seed);
    let mut samples = vec![[0.0f64; N_PARAMS]; m];
    for dim in 0..N_PARAMS {
        let width = (box_.hi[dim] - box_.lo[dim]) / m as f64;
        let mut vals: Vec<f64> = (0..m)
            .map(|bin| box_.lo[dim] + (bin as f64 + rng.random::<f64>()) * width)
            .collect();
        vals.shuffle(&mut rng);
        for (sample, v) in samples.iter_mut().zip(vals) {
            sample[dim] = v;
        }
    }
    samples
}
