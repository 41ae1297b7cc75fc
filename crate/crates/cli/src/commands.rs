//! The six batch commands. Every command is a pure function of
//! (config, seed): reruns reproduce outputs byte for byte, independent of
//! the worker-pool size, because all randomness flows through derived
//! per-task seeds and results are merged by index.

use crate::config::{Config, DataSource, IdentifyStrategy, RecordingChoice};
use glyco_core::estimation::{
    multistart_estimate, summarize, Dataset, LossOptions, MultistartOptions, NelderMeadOptions,
    ReportRow,
};
use glyco_core::export::{
    to_json_pretty, trajectory_from_csv, trajectory_to_csv, TrajectorySidecar,
};
use glyco_core::identifiability::{check, select_points, IdentReport, SelectionStrategy};
use glyco_core::network::{EffectiveParams, ScalingRegime, Species, State};
use glyco_core::reduced::{solve, stationary_fast_means, SlowState, SolverOptions};
use glyco_core::rng::{derive_seed, make_rng};
use glyco_core::ssa::{
    simulate, simulate_frozen_fast, time_average_fast, time_average_fast_fn, FastState, Recording,
    FAST_NAMES,
};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::fmt::Write as _;
use std::path::Path;

/// Command failures, split by exit code: configuration/input problems exit
/// with 2, numerical or IO failures with 3.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<crate::config::ConfigError> for CliError {
    fn from(e: crate::config::ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

type CmdResult = Result<(), CliError>;

fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

fn numerical_err(e: impl std::fmt::Display) -> CliError {
    CliError::Numerical(e.to_string())
}

fn write_file(dir: &Path, name: &str, contents: &str) -> CmdResult {
    std::fs::create_dir_all(dir)
        .map_err(|e| numerical_err(format!("creating {}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, contents)
        .map_err(|e| numerical_err(format!("writing {}: {e}", path.display())))
}

/// Initial molecule counts from the configured scaled slow start and fast
/// copy numbers.
fn initial_state(cfg: &Config) -> State {
    let n = cfg.n as f64;
    let mut x = State::zero();
    x.set(Species::A1, (cfg.init_z_a1 * n).round() as u64);
    x.set(Species::A2, (cfg.init_z_a2 * n).round() as u64);
    x.set(Species::A4, (cfg.init_z_a4 * n * n).round() as u64);
    x.set(Species::A3, cfg.init_a3);
    x.set(Species::E1, cfg.init_e1);
    x.set(Species::E1Star, cfg.init_e1star);
    x.set(Species::E1A1, cfg.init_e1a1);
    x.set(Species::E1StarA1, cfg.init_e1star_a1);
    x.set(Species::E2, cfg.init_e2);
    x.set(Species::E2A2, cfg.init_e2a2);
    x
}

fn recording(cfg: &Config) -> Recording {
    match cfg.sim_recording {
        RecordingChoice::Full => Recording::Full,
        RecordingChoice::Slow => Recording::SlowJumps,
        RecordingChoice::Grid => Recording::Grid {
            dt: cfg.sim_record_dt.unwrap_or(cfg.t / 2000.0),
        },
        RecordingChoice::EveryNth => Recording::EveryNth(cfg.sim_record_stride),
    }
}

fn regime(cfg: &Config) -> Result<ScalingRegime, CliError> {
    ScalingRegime::new(cfg.n).map_err(config_err)
}

/// Slow start matched to the (rounded) initial molecule counts, so SSA and
/// reduced runs begin at identical scaled coordinates.
fn matched_slow_start(cfg: &Config, x0: &State) -> Result<SlowState, CliError> {
    let n = cfg.n as f64;
    SlowState::new(
        x0.get(Species::A1) as f64 / n,
        x0.get(Species::A2) as f64 / n,
        x0.get(Species::A4) as f64 / (n * n),
    )
    .map_err(config_err)
}

fn effective_from_config(cfg: &Config) -> Result<EffectiveParams, CliError> {
    let (j1, j2) = cfg.enzyme_totals();
    if j1 == 0 || j2 == 0 {
        return Err(CliError::Config(
            "keys \"model.init.e*\": both enzyme families need positive totals".into(),
        ));
    }
    EffectiveParams::from_rates(&cfg.kappa, j1 as f64, j2 as f64).map_err(config_err)
}

fn run_in_pool<T: Send>(jobs: usize, work: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    if jobs == 0 {
        Ok(work())
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| numerical_err(format!("thread pool: {e}")))?;
        Ok(pool.install(work))
    }
}

/// `simulate`: one trajectory CSV + JSON sidecar per replicate, with
/// replicate seeds derived from the base seed.
pub fn cmd_simulate(cfg: &Config, out: &Path) -> CmdResult {
    let regime = regime(cfg)?;
    cfg.kappa.validate().map_err(config_err)?;
    let x0 = initial_state(cfg);
    let rec = recording(cfg);

    let runs: Result<Vec<(String, String, String)>, CliError> = run_in_pool(cfg.jobs, || {
        (0..cfg.sim_replicates)
            .into_par_iter()
            .map(|r| {
                let seed = derive_seed(cfg.seed, r as u64);
                let traj =
                    simulate(x0, &cfg.kappa, &regime, cfg.t, seed, rec).map_err(numerical_err)?;
                let csv = trajectory_to_csv(&traj);
                let sidecar = to_json_pretty(&TrajectorySidecar::new(&traj, &cfg.kappa))
                    .map_err(numerical_err)?;
                Ok((format!("traj_r{r:03}"), csv, sidecar))
            })
            .collect()
    })?;

    for (stem, csv, sidecar) in runs? {
        write_file(out, &format!("{stem}.csv"), &csv)?;
        write_file(out, &format!("{stem}.json"), &sidecar)?;
    }
    println!(
        "simulate: {} replicate(s), n = {}, T = {} -> {}",
        cfg.sim_replicates,
        cfg.n,
        cfg.t,
        out.display()
    );
    Ok(())
}

#[derive(Debug, Serialize)]
struct CompareSummary {
    n: u64,
    seed: u64,
    horizon: f64,
    grid: usize,
    sup_z_a1: f64,
    sup_z_a2: f64,
}

/// `compare`: one SSA path against the reduced solution from matched
/// initials, on an aligned uniform grid.
pub fn cmd_compare(cfg: &Config, out: &Path) -> CmdResult {
    let regime = regime(cfg)?;
    cfg.kappa.validate().map_err(config_err)?;
    let x0 = initial_state(cfg);
    let theta = effective_from_config(cfg)?;
    let z0 = matched_slow_start(cfg, &x0)?;

    let dt = cfg.t / cfg.compare_grid as f64;
    let seed = derive_seed(cfg.seed, 0);
    let traj = simulate(x0, &cfg.kappa, &regime, cfg.t, seed, Recording::Grid { dt })
        .map_err(numerical_err)?;
    let sol = solve(
        &theta,
        &z0,
        cfg.t,
        &SolverOptions::with_tol(cfg.reduced_tol),
    )
    .map_err(numerical_err)?;

    let n = cfg.n as f64;
    let mut csv = String::from("t,ssa_z_A1,ssa_z_A2,ode_Z_A1,ode_Z_A2\n");
    let mut sup1 = 0.0f64;
    let mut sup2 = 0.0f64;
    for i in 0..=cfg.compare_grid {
        let t = if i == cfg.compare_grid {
            cfg.t
        } else {
            i as f64 * dt
        };
        let x = traj.eval(t);
        let z1 = x.get(Species::A1) as f64 / n;
        let z2 = x.get(Species::A2) as f64 / n;
        let [o1, o2] = sol.eval(t);
        sup1 = sup1.max((z1 - o1).abs());
        sup2 = sup2.max((z2 - o2).abs());
        writeln!(csv, "{t},{z1},{z2},{o1},{o2}").expect("string write");
    }

    let summary = CompareSummary {
        n: cfg.n,
        seed,
        horizon: cfg.t,
        grid: cfg.compare_grid,
        sup_z_a1: sup1,
        sup_z_a2: sup2,
    };
    if cfg.output_formats.csv {
        write_file(out, "compare.csv", &csv)?;
    }
    if cfg.output_formats.json {
        write_file(
            out,
            "compare_summary.json",
            &to_json_pretty(&summary).map_err(numerical_err)?,
        )?;
    }
    println!(
        "compare: n = {}, sup |z_A1 - Z_A1| = {:.6}, sup |z_A2 - Z_A2| = {:.6}",
        cfg.n, sup1, sup2
    );
    Ok(())
}

#[derive(Debug, Serialize)]
struct CoordCheck {
    name: &'static str,
    empirical_mean: f64,
    closed_form: f64,
    std_error: f64,
    deviation_in_se: f64,
    within_3se: bool,
}

#[derive(Debug, Serialize)]
struct BalanceCheck {
    mean_residual: f64,
    std_error: f64,
    deviation_in_se: f64,
    within_3se: bool,
}

#[derive(Debug, Serialize)]
pub struct ValidationReport {
    replicates: usize,
    horizon_per_replicate: f64,
    total_time: f64,
    burn_in: f64,
    z_slow: SlowState,
    j1: u64,
    j2: u64,
    coords: Vec<CoordCheck>,
    activation_balance: BalanceCheck,
    pub all_within_3se: bool,
}

/// `validate-averaging`: frozen-fast replicates against the closed-form
/// stationary means, plus the activation-balance residual.
///
/// The frozen-fast generator conserves the split of the E1 family between
/// its low-activity and activated pools (the activation exchanges run on an
/// intermediate time scale and are not part of it), so each replicate draws
/// its initial split from the binomial the activation balance pins down;
/// everything else mixes on its own and the Monte-Carlo averages target the
/// constrained stationary values.
pub fn cmd_validate_averaging(cfg: &Config, out: &Path) -> CmdResult {
    cfg.kappa.validate_positive().map_err(config_err)?;
    let (j1, j2) = cfg.enzyme_totals();
    if j1 == 0 || j2 == 0 {
        return Err(CliError::Config(
            "keys \"model.init.e*\": both enzyme families need positive totals".into(),
        ));
    }
    let zs = SlowState::new(cfg.init_z_a1, cfg.init_z_a2, cfg.init_z_a4).map_err(config_err)?;
    let mu = stationary_fast_means(&cfg.kappa, j1 as f64, j2 as f64, &zs).map_err(config_err)?;

    // Low-activity pool weight from the activation balance.
    let k = &cfg.kappa;
    let low_weight = k.km7 * k.km8 * zs.a4;
    let p_low = low_weight / (low_weight + k.k7 * k.k8 * zs.a2 * zs.a2);

    let reps = cfg.validate_replicates;
    let per_rep: Result<Vec<([f64; 7], f64)>, CliError> = run_in_pool(cfg.jobs, || {
        (0..reps)
            .into_par_iter()
            .map(|r| {
                let mut split_rng = make_rng(derive_seed(cfg.seed, 2 * r as u64));
                let pool_low = (0..j1)
                    .filter(|_| split_rng.random::<f64>() < p_low)
                    .count() as u64;
                let zf0 = FastState([cfg.init_a3, pool_low, j1 - pool_low, 0, 0, j2, 0]);
                let traj = simulate_frozen_fast(
                    &zs,
                    zf0,
                    &cfg.kappa,
                    cfg.validate_t,
                    derive_seed(cfg.seed, 2 * r as u64 + 1),
                )
                .map_err(numerical_err)?;
                let avg = time_average_fast(&traj, cfg.validate_burn_in).map_err(numerical_err)?;
                let lhs = time_average_fast_fn(&traj, cfg.validate_burn_in, |s| {
                    (s.0[1] + s.0[3]) as f64 * s.0[0] as f64
                })
                .map_err(numerical_err)?;
                let rhs =
                    time_average_fast_fn(&traj, cfg.validate_burn_in, |s| (s.0[2] + s.0[4]) as f64)
                        .map_err(numerical_err)?;
                Ok((avg, k.k7 * lhs - k.km7 * rhs))
            })
            .collect()
    })?;
    let per_rep = per_rep?;

    let mean_se = |values: &[f64]| -> (f64, f64) {
        let m = values.iter().sum::<f64>() / values.len() as f64;
        let var = values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (values.len() as f64 - 1.0);
        (m, (var / values.len() as f64).sqrt())
    };

    let mut coords = Vec::new();
    let mut all_ok = true;
    for (i, name) in FAST_NAMES.iter().enumerate() {
        let values: Vec<f64> = per_rep.iter().map(|(avg, _)| avg[i]).collect();
        let (mean, se) = mean_se(&values);
        let dev = if se > 0.0 {
            (mean - mu[i]).abs() / se
        } else if (mean - mu[i]).abs() == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        let ok = dev <= 3.0;
        all_ok &= ok;
        coords.push(CoordCheck {
            name,
            empirical_mean: mean,
            closed_form: mu[i],
            std_error: se,
            deviation_in_se: dev,
            within_3se: ok,
        });
    }
    let residuals: Vec<f64> = per_rep.iter().map(|(_, r)| *r).collect();
    let (res_mean, res_se) = mean_se(&residuals);
    let res_dev = if res_se > 0.0 {
        res_mean.abs() / res_se
    } else if res_mean == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    let balance_ok = res_dev <= 3.0;
    all_ok &= balance_ok;

    let report = ValidationReport {
        replicates: reps,
        horizon_per_replicate: cfg.validate_t,
        total_time: cfg.validate_t * reps as f64,
        burn_in: cfg.validate_burn_in,
        z_slow: zs,
        j1,
        j2,
        coords,
        activation_balance: BalanceCheck {
            mean_residual: res_mean,
            std_error: res_se,
            deviation_in_se: res_dev,
            within_3se: balance_ok,
        },
        all_within_3se: all_ok,
    };
    write_file(
        out,
        "validate_averaging.json",
        &to_json_pretty(&report).map_err(numerical_err)?,
    )?;
    println!(
        "validate-averaging: {} replicates x T = {}, all within 3 SE: {}",
        reps, cfg.validate_t, all_ok
    );
    Ok(())
}

#[derive(Debug, Serialize)]
struct EstimateOutput<'a> {
    row: &'a ReportRow,
    theta_true: Option<EffectiveParams>,
    data_n: Option<u64>,
    data_seed: Option<u64>,
    result: &'a glyco_core::estimation::EstimationResult,
}

fn report_row_csv(row: &ReportRow) -> String {
    let mut csv = String::from(
        "stat,kappa0,K1,K_M1,K_M1_star,K_M2,J1_bullet,J1_star,J2_bullet,m,m_prime,loss_best,relative_error_pct\n",
    );
    csv.push_str("estimate");
    for v in row.estimates {
        write!(csv, ",{v}").expect("string write");
    }
    write!(csv, ",{},{},{}", row.m, row.m_prime, row.loss_best).expect("string write");
    match row.relative_error {
        Some(err) => writeln!(csv, ",{err}").expect("string write"),
        None => csv.push_str(",\n"),
    }
    csv.push_str("relative_sd");
    match row.relative_sd {
        Some(sd) => {
            for v in sd {
                write!(csv, ",{v}").expect("string write");
            }
        }
        None => csv.push_str(&",".repeat(8)),
    }
    csv.push_str(",,,,\n");
    csv
}

/// `estimate`: build (or load) the slow dataset, run the multi-start fit,
/// and write the report row.
pub fn cmd_estimate(cfg: &Config, out: &Path) -> CmdResult {
    let box_ = cfg.param_box().map_err(config_err)?;
    let theta_true = effective_from_config(cfg).ok();

    let data = match cfg.estimate_data {
        DataSource::Ssa => {
            let regime = regime(cfg)?;
            cfg.kappa.validate().map_err(config_err)?;
            let x0 = initial_state(cfg);
            let traj = simulate(
                x0,
                &cfg.kappa,
                &regime,
                cfg.t,
                derive_seed(cfg.seed, 0),
                recording(cfg),
            )
            .map_err(numerical_err)?;
            Dataset::from_trajectory(&traj, &regime).map_err(numerical_err)?
        }
        DataSource::Ode => {
            let theta = effective_from_config(cfg)?;
            let z0 =
                SlowState::new(cfg.init_z_a1, cfg.init_z_a2, cfg.init_z_a4).map_err(config_err)?;
            let sol = solve(
                &theta,
                &z0,
                cfg.t,
                &SolverOptions::with_tol(cfg.estimate_tol),
            )
            .map_err(numerical_err)?;
            Dataset::from_ode(&sol, cfg.estimate_grid).map_err(numerical_err)?
        }
        DataSource::File => {
            let stem = cfg
                .estimate_data_path
                .as_ref()
                .expect("validated by config");
            let csv = std::fs::read_to_string(format!("{stem}.csv"))
                .map_err(|e| config_err(format!("key \"estimate.data_path\": {stem}.csv: {e}")))?;
            let sidecar_text = std::fs::read_to_string(format!("{stem}.json"))
                .map_err(|e| config_err(format!("key \"estimate.data_path\": {stem}.json: {e}")))?;
            let sidecar: TrajectorySidecar =
                glyco_core::export::from_json(&sidecar_text).map_err(config_err)?;
            let traj = trajectory_from_csv(&csv, &sidecar).map_err(config_err)?;
            let regime = ScalingRegime::new(sidecar.n).map_err(config_err)?;
            Dataset::from_trajectory(&traj, &regime).map_err(numerical_err)?
        }
    };

    let opts = MultistartOptions {
        m: cfg.estimate_m,
        seed: derive_seed(cfg.seed, 1),
        jobs: if cfg.jobs == 0 { None } else { Some(cfg.jobs) },
        restarts: cfg.estimate_restarts,
        nm: NelderMeadOptions {
            max_iters: cfg.nm_max_iters,
            x_tol: cfg.nm_x_tol,
            f_tol: cfg.nm_f_tol,
            ..NelderMeadOptions::default()
        },
        loss: LossOptions {
            grid_intervals: cfg.estimate_grid,
            penalty: cfg.estimate_penalty,
            solver: SolverOptions::with_tol(cfg.estimate_tol),
        },
    };
    let result = multistart_estimate(&data, &box_, &opts).map_err(numerical_err)?;
    let row = summarize(&result, theta_true.as_ref());

    if cfg.output_formats.json {
        let output = EstimateOutput {
            row: &row,
            theta_true,
            data_n: data.meta.n,
            data_seed: data.meta.seed,
            result: &result,
        };
        write_file(
            out,
            "estimate.json",
            &to_json_pretty(&output).map_err(numerical_err)?,
        )?;
    }
    if cfg.output_formats.csv {
        write_file(out, "estimate.csv", &report_row_csv(&row))?;
    }
    match row.relative_error {
        Some(err) => println!(
            "estimate: m = {}, m' = {}, loss_best = {:.3e}, relative error = {:.2}%",
            row.m, row.m_prime, row.loss_best, err
        ),
        None => println!(
            "estimate: m = {}, m' = {}, loss_best = {:.3e}",
            row.m, row.m_prime, row.loss_best
        ),
    }
    Ok(())
}

/// `identify`: solve the reduced model, select orbit points, run the
/// Vandermonde diagnostic.
pub fn cmd_identify(cfg: &Config, out: &Path) -> CmdResult {
    let theta = effective_from_config(cfg)?;
    let z0 = SlowState::new(cfg.init_z_a1, cfg.init_z_a2, cfg.init_z_a4).map_err(config_err)?;
    let sol = solve(
        &theta,
        &z0,
        cfg.t,
        &SolverOptions::with_tol(cfg.reduced_tol),
    )
    .map_err(numerical_err)?;
    let strategy = match cfg.identify_strategy {
        IdentifyStrategy::Equitime => SelectionStrategy::Equitime,
        IdentifyStrategy::Greedy => SelectionStrategy::Greedy {
            candidates: cfg.identify_candidates,
        },
    };
    let points = select_points(&sol, strategy, derive_seed(cfg.seed, 7)).map_err(numerical_err)?;
    let report: IdentReport = check(&points, cfg.identify_tol_cond);
    write_file(
        out,
        "identifiability.json",
        &to_json_pretty(&report).map_err(numerical_err)?,
    )?;
    println!(
        "identify: condition = {:.3e}, invertible = {}, identifies = {}",
        report.condition, report.invertible, report.identifies
    );
    Ok(())
}

/// `map-params`: print and write the effective-parameter vector for the
/// configured rates and the explicitly supplied conservation totals.
pub fn cmd_map_params(cfg: &Config, out: &Path) -> CmdResult {
    let j1 = cfg
        .map_j1
        .ok_or_else(|| CliError::Config("missing required key \"map.j1\"".into()))?;
    let j2 = cfg
        .map_j2
        .ok_or_else(|| CliError::Config("missing required key \"map.j2\"".into()))?;
    let theta = EffectiveParams::from_rates(&cfg.kappa, j1, j2).map_err(config_err)?;
    let json = to_json_pretty(&theta).map_err(numerical_err)?;
    println!("{json}");
    write_file(out, "theta.json", &json)?;
    Ok(())
}

/// Shared by tests: run a command name against a parsed config.
pub fn dispatch(command: &str, cfg: &Config, out: &Path) -> CmdResult {
    match command {
        "simulate" => cmd_simulate(cfg, out),
        "compare" => cmd_compare(cfg, out),
        "validate-averaging" => cmd_validate_averaging(cfg, out),
        "estimate" => cmd_estimate(cfg, out),
        "identify" => cmd_identify(cfg, out),
        "map-params" => cmd_map_params(cfg, out),
        other => Err(CliError::Config(format!("unknown command {other}"))),
    }
}
