//! The reduced two-variable model of the slow species, its integrator, and
//! the closed forms that tie it back to the full chain.
//!
//! In the multiscale regime the scaled slow species `(Z_A1, Z_A2)` follow
//!
//! ```text
//! dZ_A1/dt = kappa0 - f(Z_A1, Z_A2, z_A4)
//! dZ_A2/dt = f(Z_A1, Z_A2, z_A4) - g(Z_A2)
//! ```
//!
//! with `Z_A4` frozen at its initial value. `f` is the PFK-mediated
//! phosphorylation flux (a z_A2^2-weighted blend of the low-activity and
//! activated Michaelis-Menten branches) and `g` the enzymatic ADP
//! degradation flux. Both are determined by the eight effective parameters.
//!
//! The module also exposes the stationary means of the fast subsystem under
//! frozen slow coordinates, the averaged reaction intensities built from
//! them, and a residual check confirming that those averages collapse to
//! exactly `f` and `g`.

mod solver;

pub use solver::{solve, OdeSolution, SolverOptions, SolverStats};

use crate::error::{Error, Result};
use crate::network::{EffectiveParams, RateConstants, Reaction};
use serde::{Deserialize, Serialize};

/// Scaled slow coordinates `(z_A1, z_A2, z_A4)`; `z_A4` must be positive
/// (the averaged model is singular at zero ATP).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlowState {
    pub a1: f64,
    pub a2: f64,
    pub a4: f64,
}

impl SlowState {
    pub fn new(a1: f64, a2: f64, a4: f64) -> Result<Self> {
        if !(a1 >= 0.0 && a1.is_finite()) || !(a2 >= 0.0 && a2.is_finite()) {
            return Err(Error::domain(format!(
                "slow coordinates must be finite and >= 0, got ({a1}, {a2})"
            )));
        }
        if !(a4 > 0.0 && a4.is_finite()) {
            return Err(Error::domain(format!(
                "z_A4 must be finite and > 0, got {a4}"
            )));
        }
        Ok(SlowState { a1, a2, a4 })
    }
}

/// Phosphorylation flux `f`: consumption rate of F6P by both PFK forms,
/// averaged over the fast subsystem.
///
/// ```text
/// f(z) = [J1b*K1*z1*z4/(K_M1 + z1) + J1s*z1*z2^2/(K_M1s + z1)] / (K1*z4 + z2^2)
/// ```
///
/// Bounded by `J1_bullet + J1_star` whenever `z_A4 > 0`.
pub fn phosphorylation_flux(theta: &EffectiveParams, z: &SlowState) -> f64 {
    let z1 = z.a1.max(0.0);
    let z2 = z.a2.max(0.0);
    let z2sq = z2 * z2;
    let weight = theta.k1 * z.a4 + z2sq;
    let low = theta.j1_bullet * theta.k1 * z1 * z.a4 / (theta.k_m1 + z1);
    let activated = theta.j1_star * z1 * z2sq / (theta.k_m1_star + z1);
    (low + activated) / weight
}

/// ADP degradation flux `g`: Michaelis-Menten in `z_A2` with maximal rate
/// `J2_bullet` and half-saturation `K_M2`.
pub fn degradation_flux(theta: &EffectiveParams, z_a2: f64) -> f64 {
    let z2 = z_a2.max(0.0);
    theta.j2_bullet * z2 / (theta.k_m2 + z2)
}

/// Stationary means of the seven fast coordinates when the slow state is
/// frozen at `z`, in the order `(A3, E1, E1star, E1A1, E1starA1, E2, E2A2)`.
///
/// The E2 family splits like a two-state exchange; A3 is a birth-death
/// balance between the adenylate kinase directions; the E1 family first
/// splits between the low-activity and activated pools through the
/// activation balance, then within each pool between free and bound forms
/// through the binding balance.
pub fn stationary_fast_means(
    kappa: &RateConstants,
    j1: f64,
    j2: f64,
    z: &SlowState,
) -> Result<[f64; 7]> {
    kappa.validate_positive()?;
    if !(j1 > 0.0 && j2 > 0.0) {
        return Err(Error::domain(format!(
            "conservation totals must be > 0, got J1 = {j1}, J2 = {j2}"
        )));
    }
    let z1 = z.a1;
    let z2 = z.a2;
    let z4 = z.a4;
    let z2sq = z2 * z2;

    let a3 = kappa.k8 * z2sq / (kappa.km8 * z4);

    // Pool weights: activated pool carries k8*k7*z2^2, low-activity pool
    // km8*km7*z4.
    let act = kappa.k8 * kappa.k7 * z2sq + kappa.km8 * kappa.km7 * z4;
    let den1 = kappa.km1 + kappa.k2 + kappa.k1 * z1;
    let den3 = kappa.km3 + kappa.k4 + kappa.k3 * z1;
    let low_pool = kappa.km8 * kappa.km7 * j1 * z4 / act;
    let star_pool = kappa.k8 * kappa.k7 * j1 * z2sq / act;
    let e1 = low_pool * (kappa.km1 + kappa.k2) / den1;
    let e1a1 = low_pool * kappa.k1 * z1 / den1;
    let e1star = star_pool * (kappa.km3 + kappa.k4) / den3;
    let e1stara1 = star_pool * kappa.k3 * z1 / den3;

    let den5 = kappa.km5 + kappa.k6 + kappa.k5 * z2;
    let e2 = j2 * (kappa.km5 + kappa.k6) / den5;
    let e2a2 = j2 * kappa.k5 * z2 / den5;

    Ok([a3, e1, e1star, e1a1, e1stara1, e2, e2a2])
}

/// Averaged intensity of a reaction under the frozen-fast stationary means.
/// The propensities are linear in the fast coordinates, so the average is
/// the propensity with each fast coordinate replaced by its mean; the
/// adenylate kinase forward intensity reduces to `k8 * z_A2^2`.
///
/// The four activation reactions involve mixed moments with no closed form;
/// requesting them is an error.
pub fn averaged_intensity(
    k: Reaction,
    kappa: &RateConstants,
    j1: f64,
    j2: f64,
    z: &SlowState,
) -> Result<f64> {
    use Reaction::*;
    if matches!(k, R7 | Rm7 | R7p | Rm7p) {
        return Err(Error::UnsupportedReaction(k.name()));
    }
    let mu = stationary_fast_means(kappa, j1, j2, z)?;
    let [a3, e1, e1star, e1a1, e1stara1, e2, e2a2] = mu;
    Ok(match k {
        R0 => kappa.k0,
        R1 => kappa.k1 * e1 * z.a1,
        Rm1 => kappa.km1 * e1a1,
        R2 => kappa.k2 * e1a1,
        R3 => kappa.k3 * e1star * z.a1,
        Rm3 => kappa.km3 * e1stara1,
        R4 => kappa.k4 * e1stara1,
        R5 => kappa.k5 * e2 * z.a2,
        Rm5 => kappa.km5 * e2a2,
        R6 => kappa.k6 * e2a2,
        R8 => kappa.k8 * z.a2 * z.a2,
        Rm8 => kappa.km8 * a3 * z.a4,
        R7 | Rm7 | R7p | Rm7p => unreachable!(),
    })
}

/// Residuals of the identity between the two forms of the limit drift: the
/// averaged-intensity combinations for `A1` and `A2` must equal `-f` and
/// `f - g`. Both residuals vanish to rounding when `theta` is the effective
/// parameter vector of `(kappa, j1, j2)`.
pub fn drift_identity_residuals(
    theta: &EffectiveParams,
    kappa: &RateConstants,
    j1: f64,
    j2: f64,
    z: &SlowState,
) -> Result<(f64, f64)> {
    let derived = EffectiveParams::from_rates(kappa, j1, j2)?;
    for ((name, a), b) in crate::network::PARAM_NAMES
        .iter()
        .zip(theta.as_array())
        .zip(derived.as_array())
    {
        if (a - b).abs() > 1e-9 * b.abs().max(1.0) {
            return Err(Error::domain(format!(
                "theta is not the effective parameter vector of the given rates: {name} = {a}, derived {b}"
            )));
        }
    }

    let bar = |k| averaged_intensity(k, kappa, j1, j2, z).expect("non-activation reaction");
    use Reaction::*;
    let drift_a1 = -bar(R1) + bar(Rm1) - bar(R3) + bar(Rm3);
    let drift_a2 = bar(R2) + bar(R4) - bar(R5) + bar(Rm5) - 2.0 * bar(R8) + 2.0 * bar(Rm8);

    let f = phosphorylation_flux(theta, z);
    let g = degradation_flux(theta, z.a2);
    Ok(((drift_a1 + f).abs(), (drift_a2 - (f - g)).abs()))
}
