//! Box-constrained Nelder-Mead: the standard simplex iteration with every
//! candidate point projected componentwise onto the box before evaluation.
//! Projection keeps the objective finite and the simplex well defined; a
//! minimizer outside the box converges to its projection.

use crate::error::{Error, Result};
use crate::estimation::ParamBox;
use crate::network::N_PARAMS;

/// Simplex coefficients and termination thresholds. The coefficients are
/// the classical ones: reflection 1, expansion 2, contraction 0.5, shrink
/// 0.5.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadOptions {
    pub alpha: f64,
    pub gamma: f64,
    pub rho: f64,
    pub sigma: f64,
    /// Terminate when the simplex diameter falls below `x_tol` relative to
    /// `max(1, |x_best|_inf)`.
    pub x_tol: f64,
    /// Terminate when the objective spread over the simplex falls below
    /// `f_tol` relative to the larger magnitude of the extreme values.
    pub f_tol: f64,
    pub max_iters: usize,
    /// Relative per-coordinate perturbation building the initial simplex.
    pub init_step: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        NelderMeadOptions {
            alpha: 1.0,
            gamma: 2.0,
            rho: 0.5,
            sigma: 0.5,
            x_tol: 1e-6,
            f_tol: 1e-10,
            max_iters: 5000,
            init_step: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadResult {
    pub x_best: [f64; N_PARAMS],
    pub f_best: f64,
    pub iterations: usize,
    pub evals: usize,
    pub converged: bool,
}

#[inline]
fn key(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

/// Minimizes `objective` over the box starting from `x0` (which must lie in
/// the box). Errors if the objective is non-finite at the start.
pub fn nelder_mead<F>(
    mut objective: F,
    x0: [f64; N_PARAMS],
    box_: &ParamBox,
    opts: &NelderMeadOptions,
) -> Result<NelderMeadResult>
where
    F: FnMut(&[f64; N_PARAMS]) -> f64,
{
    if !box_.contains(&x0) {
        return Err(Error::domain("start point must lie inside the box"));
    }
    let mut evals = 0usize;
    let mut eval = |x: &[f64; N_PARAMS], evals: &mut usize| -> f64 {
        *evals += 1;
        objective(x)
    };

    let f0 = eval(&x0, &mut evals);
    if !f0.is_finite() {
        return Err(Error::domain(format!(
            "objective is not finite at the start point ({f0})"
        )));
    }

    // x0 plus a perturbation in each coordinate, clamped to the box; flip
    // the direction if clamping collapses the vertex onto x0.
    let n = N_PARAMS;
    let mut xs: Vec<[f64; N_PARAMS]> = Vec::with_capacity(n + 1);
    let mut fs: Vec<f64> = Vec::with_capacity(n + 1);
    xs.push(x0);
    fs.push(f0);
    for i in 0..n {
        let step = opts.init_step * x0[i].abs().max(opts.init_step * (box_.hi[i] - box_.lo[i]));
        let mut v = x0;
        v[i] = (x0[i] + step).clamp(box_.lo[i], box_.hi[i]);
        if (v[i] - x0[i]).abs() < 1e-12 * x0[i].abs().max(1e-12) {
            v[i] = (x0[i] - step).clamp(box_.lo[i], box_.hi[i]);
        }
        let fv = eval(&v, &mut evals);
        xs.push(v);
        fs.push(fv);
    }

    let mut order: Vec<usize> = (0..=n).collect();
    let mut iterations = 0usize;
    let mut converged = false;

    while iterations < opts.max_iters {
        order.sort_by(|&a, &b| key(fs[a]).partial_cmp(&key(fs[b])).unwrap());
        let best = order[0];
        let worst = order[n];
        let second_worst = order[n - 1];

        // Termination: relative simplex diameter or relative f spread.
        let scale = xs[best].iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        let diameter = order
            .iter()
            .map(|&i| {
                xs[i]
                    .iter()
                    .zip(&xs[best])
                    .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
            })
            .fold(0.0f64, f64::max);
        let spread = (fs[worst] - fs[best]).abs();
        let f_scale = fs[worst].abs().max(fs[best].abs()).max(f64::MIN_POSITIVE);
        if diameter <= opts.x_tol * scale || spread <= opts.f_tol * f_scale {
            converged = true;
            break;
        }

        iterations += 1;

        // Centroid of all vertices but the worst.
        let mut centroid = [0.0f64; N_PARAMS];
        for &i in order.iter().take(n) {
            for (c, v) in centroid.iter_mut().zip(&xs[i]) {
                *c += v;
            }
        }
        for c in centroid.iter_mut() {
            *c /= n as f64;
        }

        let blend = |from: &[f64; N_PARAMS], towards: &[f64; N_PARAMS], coeff: f64| {
            let mut out = [0.0; N_PARAMS];
            for i in 0..N_PARAMS {
                out[i] = from[i] + coeff * (towards[i] - from[i]);
            }
            box_.project(&out)
        };

        // Reflection.
        let xr = blend(&centroid, &xs[worst], -opts.alpha);
        let fr = eval(&xr, &mut evals);

        if key(fr) < key(fs[best]) {
            // Expansion.
            let xe = blend(&centroid, &xr, opts.gamma);
            let fe = eval(&xe, &mut evals);
            if key(fe) < key(fr) {
                xs[worst] = xe;
                fs[worst] = fe;
            } else {
                xs[worst] = xr;
                fs[worst] = fr;
            }
            continue;
        }
        if key(fr) < key(fs[second_worst]) {
            xs[worst] = xr;
            fs[worst] = fr;
            continue;
        }

        // Contraction, outside or inside of the reflection.
        let (xc, fc) = if key(fr) < key(fs[worst]) {
            let xc = blend(&centroid, &xr, opts.rho);
            let fc = eval(&xc, &mut evals);
            if key(fc) <= key(fr) {
                (Some(xc), fc)
            } else {
                (None, fc)
            }
        } else {
            let xc = blend(&centroid, &xs[worst], opts.rho);
            let fc = eval(&xc, &mut evals);
            if key(fc) < key(fs[worst]) {
                (Some(xc), fc)
            } else {
                (None, fc)
            }
        };
        if let Some(xc) = xc {
            xs[worst] = xc;
            fs[worst] = fc;
            continue;
        }

        // Shrink towards the best vertex.
        let xb = xs[best];
        for &i in order.iter().skip(1) {
            xs[i] = blend(&xb, &xs[i], opts.sigma);
            fs[i] = eval(&xs[i], &mut evals);
        }
    }

    order.sort_by(|&a, &b| key(fs[a]).partial_cmp(&key(fs[b])).unwrap());
    let best = order[0];
    Ok(NelderMeadResult {
        x_best: xs[best],
        f_best: fs[best],
        iterations,
        evals,
        converged,
    })
}
