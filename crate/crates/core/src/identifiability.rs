//! Generalized Vandermonde diagnostic: certifies numerically that a set of
//! orbit points pins down the effective parameters.
//!
//! Twelve orbit points `(z_A1(k), z_A2(k))` assemble into a 12x12 matrix
//! whose rows are the monomials `x^a y^b`, `a <= 3`, `b <= 2`, evaluated at
//! `x = z_A1(k)` and `y = z_A2(k)^2`. Invertibility of that matrix (plus
//! positivity side conditions) guarantees equality of the reduced vector
//! field on the points forces equality of parameters. Determinants of such
//! matrices are scale-incommensurable, so invertibility is decided by the
//! condition number against a threshold instead of `|det| > 0`.

use crate::error::{Error, Result};
use crate::linalg::{determinant, singular_values};
use crate::reduced::OdeSolution;
use crate::rng::make_rng;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Twelve slow-orbit samples at a fixed `z_A4 > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitPoints {
    /// `(z_A1, z_A2)` pairs.
    pub points: [(f64, f64); 12],
    pub z_a4: f64,
}

/// The monomial row `(1, y, y^2, x, xy, xy^2, x^2, x^2 y, x^2 y^2, x^3,
/// x^3 y, x^3 y^2)`.
pub fn vandermonde_row(x: f64, y: f64) -> [f64; 12] {
    let y2 = y * y;
    let x2 = x * x;
    let x3 = x2 * x;
    [
        1.0,
        y,
        y2,
        x,
        x * y,
        x * y2,
        x2,
        x2 * y,
        x2 * y2,
        x3,
        x3 * y,
        x3 * y2,
    ]
}

/// Assembles the 12x12 matrix with rows `V(z_A1(k), z_A2(k)^2)`.
pub fn assemble_matrix(points: &OrbitPoints) -> [[f64; 12]; 12] {
    let mut m = [[0.0; 12]; 12];
    for (row, (a1, a2)) in m.iter_mut().zip(points.points) {
        *row = vandermonde_row(a1, a2 * a2);
    }
    m
}

/// Outcome of the identifiability diagnostic. Failed conditions are
/// reported, never thrown.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IdentReport {
    pub points: Vec<(f64, f64)>,
    pub z_a4: f64,
    pub determinant: f64,
    pub sigma_max: f64,
    pub sigma_min: f64,
    /// `sigma_max / sigma_min`; infinite when the matrix is numerically rank
    /// deficient.
    pub condition: f64,
    pub tol_cond: f64,
    /// Condition number at most `tol_cond`.
    pub invertible: bool,
    /// Side condition: every `z_A1(k) > 0`.
    pub all_a1_positive: bool,
    /// Side condition: two points with distinct, positive `z_A2`.
    pub distinct_positive_a2: bool,
    /// Informational only: whether the origin is among the points. The
    /// underlying argument can dispense with it, so it does not gate
    /// `identifies`.
    pub contains_origin: bool,
    /// All hypotheses hold: the point set identifies the parameters.
    pub identifies: bool,
}

/// Runs the diagnostic on twelve orbit points.
pub fn check(points: &OrbitPoints, tol_cond: f64) -> IdentReport {
    let m = assemble_matrix(points);
    let det = determinant(&m);
    let sv = singular_values(&m);
    let sigma_max = sv[0];
    let sigma_min = sv[11];
    let condition = if sigma_min > 0.0 {
        sigma_max / sigma_min
    } else {
        f64::INFINITY
    };
    let invertible = condition <= tol_cond;
    let all_a1_positive = points.points.iter().all(|&(a1, _)| a1 > 0.0);
    let contains_origin = points.points.iter().any(|&(a1, a2)| a1 == 0.0 && a2 == 0.0);
    let distinct_positive_a2 = points
        .points
        .iter()
        .any(|&(_, a2)| a2 > 0.0 && points.points.iter().any(|&(_, b2)| b2 > 0.0 && b2 != a2));
    IdentReport {
        points: points.points.to_vec(),
        z_a4: points.z_a4,
        determinant: det,
        sigma_max,
        sigma_min,
        condition,
        tol_cond,
        invertible,
        all_a1_positive,
        distinct_positive_a2,
        contains_origin,
        identifies: invertible && all_a1_positive && distinct_positive_a2,
    }
}

/// How orbit points are picked from a reduced solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionStrategy {
    /// Twelve samples at `t = j T / 13`, `j = 1..12`.
    Equitime,
    /// Seeded random search over candidate subsets (equitime included);
    /// keeps the subset maximizing the smallest singular value.
    Greedy { candidates: usize },
}

/// Samples twelve orbit points from a reduced solution.
pub fn select_points(
    solution: &OdeSolution,
    strategy: SelectionStrategy,
    seed: u64,
) -> Result<OrbitPoints> {
    let t_end = solution.horizon;
    if t_end.is_nan() || t_end <= 0.0 {
        return Err(Error::domain("solution horizon must be positive"));
    }
    let at_times = |ts: &[f64; 12]| -> OrbitPoints {
        let mut points = [(0.0, 0.0); 12];
        for (p, &t) in points.iter_mut().zip(ts.iter()) {
            let [a1, a2] = solution.eval(t);
            *p = (a1, a2);
        }
        OrbitPoints {
            points,
            z_a4: solution.z_a4,
        }
    };

    let equitime_ts = {
        let mut ts = [0.0; 12];
        for (j, t) in ts.iter_mut().enumerate() {
            *t = (j as f64 + 1.0) * t_end / 13.0;
        }
        ts
    };

    match strategy {
        SelectionStrategy::Equitime => Ok(at_times(&equitime_ts)),
        SelectionStrategy::Greedy { candidates } => {
            let mut rng = make_rng(seed);
            let mut best = at_times(&equitime_ts);
            let mut best_sigma = singular_values(&assemble_matrix(&best))[11];
            for _ in 0..candidates {
                let mut ts = [0.0; 12];
                for t in ts.iter_mut() {
                    *t = rng.random::<f64>() * t_end;
                }
                ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
                let cand = at_times(&ts);
                let sigma = singular_values(&assemble_matrix(&cand))[11];
                if sigma > best_sigma {
                    best_sigma = sigma;
                    best = cand;
                }
            }
            Ok(best)
        }
    }
}
