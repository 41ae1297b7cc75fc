//! Parameter estimation of the reduced model from slow-species data:
//! trajectory-mismatch loss, Latin-hypercube multi-start over a
//! box-constrained Nelder-Mead, and the summary statistics of the
//! estimation experiments.

mod nelder_mead;
mod sampling;

pub use nelder_mead::{nelder_mead, NelderMeadOptions, NelderMeadResult};
pub use sampling::latin_hypercube;

use crate::error::{Error, Result};
use crate::network::{EffectiveParams, ScalingRegime, Species, N_PARAMS};
use crate::reduced::{solve, OdeSolution, SlowState, SolverOptions};
use crate::ssa::Trajectory;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Observed slow data: piecewise-constant paths `z_A1(t)`, `z_A2(t)` on
/// `[0, T]` plus the initial scaled ATP level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    times: Vec<f64>,
    a1: Vec<f64>,
    a2: Vec<f64>,
    pub z_a4_0: f64,
    pub horizon: f64,
    pub meta: DatasetMeta,
}

/// Provenance carried along with a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct DatasetMeta {
    pub n: Option<u64>,
    pub seed: Option<u64>,
}

impl Dataset {
    pub fn new(
        times: Vec<f64>,
        a1: Vec<f64>,
        a2: Vec<f64>,
        z_a4_0: f64,
        horizon: f64,
        meta: DatasetMeta,
    ) -> Result<Self> {
        if times.is_empty() || times[0] != 0.0 {
            return Err(Error::domain("dataset must start at t = 0"));
        }
        if times.len() != a1.len() || times.len() != a2.len() {
            return Err(Error::domain("dataset columns must have equal length"));
        }
        if !times.windows(2).all(|w| w[1] > w[0]) {
            return Err(Error::domain("dataset times must be strictly increasing"));
        }
        if horizon.is_nan() || horizon <= 0.0 || *times.last().unwrap() > horizon {
            return Err(Error::domain("dataset horizon must bound all sample times"));
        }
        if z_a4_0.is_nan() || z_a4_0 <= 0.0 {
            return Err(Error::domain(format!("z_A4(0) must be > 0, got {z_a4_0}")));
        }
        if a1
            .iter()
            .chain(a2.iter())
            .any(|v| !v.is_finite() || *v < 0.0)
        {
            return Err(Error::domain(
                "dataset paths must be finite and nonnegative",
            ));
        }
        Ok(Dataset {
            times,
            a1,
            a2,
            z_a4_0,
            horizon,
            meta,
        })
    }

    /// Scaled slow view of a simulated path: `(z_A1, z_A2)` at every
    /// recorded time (scaled by `1/n`) plus `z_A4(0) = x_A4(0)/n^2`.
    pub fn from_trajectory(traj: &Trajectory, regime: &ScalingRegime) -> Result<Self> {
        let n = regime.n as f64;
        let mut times = Vec::with_capacity(traj.len());
        let mut a1 = Vec::with_capacity(traj.len());
        let mut a2 = Vec::with_capacity(traj.len());
        for (i, t) in traj.times.iter().enumerate() {
            let x = traj.state_at(i);
            times.push(*t);
            a1.push(x.get(Species::A1) as f64 / n);
            a2.push(x.get(Species::A2) as f64 / n);
        }
        let z_a4_0 = traj.initial_state().get(Species::A4) as f64 / (n * n);
        Dataset::new(
            times,
            a1,
            a2,
            z_a4_0,
            traj.horizon,
            DatasetMeta {
                n: Some(regime.n),
                seed: Some(traj.seed),
            },
        )
    }

    /// Samples a reduced solution on a uniform grid of `intervals + 1`
    /// points. Matching the grid of the loss quadrature makes the sampling
    /// staircase invisible to the loss.
    pub fn from_ode(solution: &OdeSolution, intervals: usize) -> Result<Self> {
        if intervals == 0 {
            return Err(Error::domain("need at least one sampling interval"));
        }
        let t_end = solution.horizon;
        let mut times = Vec::with_capacity(intervals + 1);
        let mut a1 = Vec::with_capacity(intervals + 1);
        let mut a2 = Vec::with_capacity(intervals + 1);
        for i in 0..=intervals {
            let t = t_end * i as f64 / intervals as f64;
            let [y1, y2] = solution.eval(t);
            times.push(t);
            a1.push(y1.max(0.0));
            a2.push(y2.max(0.0));
        }
        Dataset::new(times, a1, a2, solution.z_a4, t_end, DatasetMeta::default())
    }

    /// Path value at `t` (cadlag piecewise-constant: the sample at the last
    /// time `<= t`).
    pub fn eval(&self, t: f64) -> (f64, f64) {
        let i = match self
            .times
            .binary_search_by(|probe| probe.partial_cmp(&t).unwrap())
        {
            Ok(i) => i,
            Err(0) => 0,
            Err(i) => i - 1,
        };
        (self.a1[i], self.a2[i])
    }

    /// The slow state the reduced model is solved from when fitting this
    /// dataset.
    pub fn initial_slow_state(&self) -> Result<SlowState> {
        SlowState::new(self.a1[0], self.a2[0], self.z_a4_0)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Quadrature and penalty configuration of the loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossOptions {
    /// Number of uniform trapezoid intervals on `[0, T]`.
    pub grid_intervals: usize,
    /// Finite value returned (flagged) when the reduced solve fails.
    pub penalty: f64,
    pub solver: SolverOptions,
}

impl Default for LossOptions {
    fn default() -> Self {
        LossOptions {
            grid_intervals: 2000,
            penalty: 1e12,
            solver: SolverOptions::default(),
        }
    }
}

/// A loss value, with a flag marking the integration-failure penalty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossEval {
    pub value: f64,
    pub penalized: bool,
}

/// Composite-trapezoid approximation of the squared mismatch between the
/// data paths and a reference curve on the uniform grid.
fn squared_mismatch(
    data: &Dataset,
    reference: impl Fn(f64) -> [f64; 2],
    grid_intervals: usize,
) -> f64 {
    let t_end = data.horizon;
    let dt = t_end / grid_intervals as f64;
    let mut acc = 0.0;
    for i in 0..=grid_intervals {
        let t = if i == grid_intervals {
            t_end
        } else {
            i as f64 * dt
        };
        let (d1, d2) = data.eval(t);
        let [r1, r2] = reference(t);
        let sq = (d1 - r1).powi(2) + (d2 - r2).powi(2);
        let w = if i == 0 || i == grid_intervals {
            0.5
        } else {
            1.0
        };
        acc += w * sq;
    }
    acc * dt
}

/// Trajectory-mismatch loss: the integrated squared distance between the
/// observed slow paths and the reduced solution started from the data's own
/// initial point. A failed solve yields the configured penalty, flagged.
pub fn loss(theta: &EffectiveParams, data: &Dataset, opts: &LossOptions) -> LossEval {
    let z0 = match data.initial_slow_state() {
        Ok(z) => z,
        Err(_) => {
            return LossEval {
                value: opts.penalty,
                penalized: true,
            }
        }
    };
    match solve(theta, &z0, data.horizon, &opts.solver) {
        Ok(sol) => LossEval {
            value: squared_mismatch(data, |t| sol.eval(t), opts.grid_intervals),
            penalized: false,
        },
        Err(_) => LossEval {
            value: opts.penalty,
            penalized: true,
        },
    }
}

/// Closed box `[lo_i, hi_i]^8` with strictly positive lower bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamBox {
    pub lo: [f64; N_PARAMS],
    pub hi: [f64; N_PARAMS],
}

impl ParamBox {
    pub fn new(lo: [f64; N_PARAMS], hi: [f64; N_PARAMS]) -> Result<Self> {
        for i in 0..N_PARAMS {
            if !(lo[i] > 0.0 && lo[i] < hi[i] && hi[i].is_finite()) {
                return Err(Error::domain(format!(
                    "invalid interval [{}, {}] for parameter {}",
                    lo[i],
                    hi[i],
                    crate::network::PARAM_NAMES[i]
                )));
            }
        }
        Ok(ParamBox { lo, hi })
    }

    /// The search intervals used in the benchmark estimation experiments.
    pub fn benchmark_intervals() -> Self {
        ParamBox {
            lo: [0.01; N_PARAMS],
            hi: [1.0, 4.0, 3.0, 2.0, 3.0, 1.0, 3.0, 2.0],
        }
    }

    pub fn contains(&self, x: &[f64; N_PARAMS]) -> bool {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(v, (lo, hi))| *v >= *lo && *v <= *hi)
    }

    /// Componentwise projection onto the box.
    pub fn project(&self, x: &[f64; N_PARAMS]) -> [f64; N_PARAMS] {
        let mut out = *x;
        for ((v, lo), hi) in out.iter_mut().zip(&self.lo).zip(&self.hi) {
            *v = v.clamp(*lo, *hi);
        }
        out
    }
}

/// One multi-start run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StartOutcome {
    pub start: [f64; N_PARAMS],
    pub theta: EffectiveParams,
    pub loss: f64,
    pub penalized: bool,
    pub iterations: usize,
    /// The optimizer's own termination flag (tolerance reached before the
    /// iteration budget).
    pub nm_converged: bool,
    /// Loss within the 10% band of the best run; these runs enter the
    /// dispersion statistics.
    pub converged: bool,
}

/// Multi-start estimation output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationResult {
    pub theta_best: EffectiveParams,
    pub loss_best: f64,
    pub starts: Vec<StartOutcome>,
    pub m: usize,
    pub m_prime: usize,
    /// Per-parameter dispersion over converged runs:
    /// `sigma_i / mean_i` with
    /// `sigma_i = sqrt(sum_j (theta_ji - mean_i)^2) / sqrt(m' - 1)`.
    /// Absent when fewer than two runs converged.
    pub relative_sd: Option<[f64; N_PARAMS]>,
}

/// Everything that parameterizes a multi-start run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultistartOptions {
    pub m: usize,
    pub seed: u64,
    /// Worker threads; `None` uses the global pool. The result is identical
    /// for every setting.
    pub jobs: Option<usize>,
    /// Simplex restarts chained after the first run of each start. A fresh
    /// simplex at the current best point escapes the degenerate-simplex
    /// stalls Nelder-Mead is prone to in eight dimensions; the chain stops
    /// early once a restart no longer improves the loss.
    pub restarts: usize,
    pub nm: NelderMeadOptions,
    pub loss: LossOptions,
}

impl MultistartOptions {
    pub fn new(m: usize, seed: u64) -> Self {
        MultistartOptions {
            m,
            seed,
            jobs: None,
            restarts: 3,
            nm: NelderMeadOptions::default(),
            loss: LossOptions::default(),
        }
    }
}

/// Loss-band convergence filter. Runs within 10% of the best loss count as
/// converged; a zero best loss falls back to the absolute tolerance.
fn converged_band(l: f64, l_best: f64, f_tol: f64) -> bool {
    if l_best == 0.0 {
        l <= f_tol
    } else {
        (l - l_best).abs() / l_best.abs() <= 0.1
    }
}

/// Multi-start minimization of an arbitrary objective over the box. The
/// result is a pure function of `(objective, box, m, seed, restarts, nm
/// options)`: runs are independently derived from Latin-hypercube starts
/// and merged by start index, so thread count cannot change the outcome.
pub fn multistart_minimize<F>(
    objective: F,
    box_: &ParamBox,
    m: usize,
    seed: u64,
    jobs: Option<usize>,
    restarts: usize,
    nm_opts: &NelderMeadOptions,
) -> Result<Vec<(usize, [f64; N_PARAMS], NelderMeadResult)>>
where
    F: Fn(&[f64; N_PARAMS]) -> f64 + Sync,
{
    if m == 0 {
        return Err(Error::domain("need at least one start"));
    }
    let starts = latin_hypercube(m, box_, seed);
    let run = |j: usize| -> Result<(usize, [f64; N_PARAMS], NelderMeadResult)> {
        let x0 = starts[j];
        let mut result = nelder_mead(|x| objective(x), x0, box_, nm_opts)?;
        for _ in 0..restarts {
            let again = nelder_mead(|x| objective(x), result.x_best, box_, nm_opts)?;
            let improved =
                again.f_best < result.f_best - nm_opts.f_tol * result.f_best.abs().max(1e-300);
            let chained = NelderMeadResult {
                iterations: result.iterations + again.iterations,
                evals: result.evals + again.evals,
                ..if again.f_best < result.f_best {
                    again
                } else {
                    result
                }
            };
            result = chained;
            if !improved {
                break;
            }
        }
        Ok((j, x0, result))
    };
    let outcomes: Result<Vec<_>> = match jobs {
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::domain(format!("thread pool: {e}")))?
            .install(|| (0..m).into_par_iter().map(run).collect()),
        None => (0..m).into_par_iter().map(run).collect(),
    };
    outcomes
}

/// Runs `nelder_mead` against the trajectory-mismatch loss from `m` Latin
/// hypercube starts and assembles the estimation report.
pub fn multistart_estimate(
    data: &Dataset,
    box_: &ParamBox,
    opts: &MultistartOptions,
) -> Result<EstimationResult> {
    let objective =
        |x: &[f64; N_PARAMS]| loss(&EffectiveParams::from_array(*x), data, &opts.loss).value;
    let runs = multistart_minimize(
        objective,
        box_,
        opts.m,
        opts.seed,
        opts.jobs,
        opts.restarts,
        &opts.nm,
    )?;

    let loss_best = runs
        .iter()
        .map(|(_, _, r)| r.f_best)
        .fold(f64::INFINITY, f64::min);
    let best_index = runs
        .iter()
        .position(|(_, _, r)| r.f_best == loss_best)
        .expect("at least one run");

    let starts: Vec<StartOutcome> = runs
        .iter()
        .map(|(_, x0, r)| {
            let eval = loss(&EffectiveParams::from_array(r.x_best), data, &opts.loss);
            StartOutcome {
                start: *x0,
                theta: EffectiveParams::from_array(r.x_best),
                loss: r.f_best,
                penalized: eval.penalized,
                iterations: r.iterations,
                nm_converged: r.converged,
                converged: converged_band(r.f_best, loss_best, opts.nm.f_tol),
            }
        })
        .collect();

    let m_prime = starts.iter().filter(|s| s.converged).count();
    let relative_sd = relative_sd_over(
        starts
            .iter()
            .filter(|s| s.converged)
            .map(|s| s.theta.as_array()),
        m_prime,
    );

    Ok(EstimationResult {
        theta_best: starts[best_index].theta,
        loss_best,
        starts,
        m: opts.m,
        m_prime,
        relative_sd,
    })
}

fn relative_sd_over(
    thetas: impl Iterator<Item = [f64; N_PARAMS]> + Clone,
    m_prime: usize,
) -> Option<[f64; N_PARAMS]> {
    if m_prime < 2 {
        return None;
    }
    let mut mean = [0.0; N_PARAMS];
    for theta in thetas.clone() {
        for (m, v) in mean.iter_mut().zip(theta) {
            *m += v;
        }
    }
    for m in mean.iter_mut() {
        *m /= m_prime as f64;
    }
    let mut ssq = [0.0; N_PARAMS];
    for theta in thetas {
        for (s, (v, m)) in ssq.iter_mut().zip(theta.iter().zip(&mean)) {
            *s += (v - m).powi(2);
        }
    }
    let mut out = [0.0; N_PARAMS];
    for ((o, ssq), mean) in out.iter_mut().zip(ssq).zip(mean) {
        let sigma = ssq.sqrt() / (m_prime as f64 - 1.0).sqrt();
        *o = sigma / mean;
    }
    Some(out)
}

/// `||theta_true - theta_hat||_1 / ||theta_true||_1 * 100`.
pub fn relative_error(theta_hat: &EffectiveParams, theta_true: &EffectiveParams) -> f64 {
    let num: f64 = theta_true
        .as_array()
        .iter()
        .zip(theta_hat.as_array())
        .map(|(t, h)| (t - h).abs())
        .sum();
    let den: f64 = theta_true.as_array().iter().map(|t| t.abs()).sum();
    num / den * 100.0
}

/// One row of the estimation report: best estimates, dispersion, and (when
/// the truth is known) the relative error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub estimates: [f64; N_PARAMS],
    pub relative_sd: Option<[f64; N_PARAMS]>,
    pub relative_error: Option<f64>,
    pub m: usize,
    pub m_prime: usize,
    pub loss_best: f64,
}

pub fn summarize(result: &EstimationResult, theta_true: Option<&EffectiveParams>) -> ReportRow {
    ReportRow {
        estimates: result.theta_best.as_array(),
        relative_sd: result.relative_sd,
        relative_error: theta_true.map(|t| relative_error(&result.theta_best, t)),
        m: result.m,
        m_prime: result.m_prime,
        loss_best: result.loss_best,
    }
}
