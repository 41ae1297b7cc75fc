//! CSV and JSON serialization of the domain types.
//!
//! CSVs are UTF-8 with a header row, '.' decimal separator, and shortest
//! round-trip float formatting (`{}` on f64), so every emitted file parses
//! back into the exact same values. Writers return strings; callers do the
//! file IO.

use crate::error::{Error, Result};
use crate::network::{RateConstants, Species, N_REACTIONS, N_SPECIES};
use crate::reduced::OdeSolution;
use crate::ssa::Trajectory;
use serde::{Deserialize, Serialize};

/// Metadata written next to each trajectory CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySidecar {
    pub seed: u64,
    pub n: u64,
    pub horizon: f64,
    pub kappa: RateConstants,
    pub reaction_counts: [u64; N_REACTIONS],
}

impl TrajectorySidecar {
    pub fn new(traj: &Trajectory, kappa: &RateConstants) -> Self {
        TrajectorySidecar {
            seed: traj.seed,
            n: traj.n,
            horizon: traj.horizon,
            kappa: *kappa,
            reaction_counts: traj.reaction_counts,
        }
    }
}

/// Trajectory CSV: `t` plus the ten species columns, one row per recorded
/// state.
pub fn trajectory_to_csv(traj: &Trajectory) -> String {
    let mut out = String::from("t");
    for s in Species::ALL {
        out.push(',');
        out.push_str(s.name());
    }
    out.push('\n');
    for (i, t) in traj.times.iter().enumerate() {
        let x = traj.state_at(i);
        out.push_str(&format!("{t}"));
        for v in x.0 {
            out.push_str(&format!(",{v}"));
        }
        out.push('\n');
    }
    out
}

/// Parses a trajectory CSV together with its sidecar back into a
/// [`Trajectory`].
pub fn trajectory_from_csv(csv: &str, sidecar: &TrajectorySidecar) -> Result<Trajectory> {
    let mut lines = csv.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::domain("empty trajectory CSV"))?;
    let expected = {
        let mut h = String::from("t");
        for s in Species::ALL {
            h.push(',');
            h.push_str(s.name());
        }
        h
    };
    if header != expected {
        return Err(Error::domain(format!("unexpected CSV header: {header}")));
    }
    let mut times = Vec::new();
    let mut states = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let t: f64 = fields
            .next()
            .ok_or_else(|| Error::domain(format!("line {}: missing time", lineno + 2)))?
            .parse()
            .map_err(|e| Error::domain(format!("line {}: {e}", lineno + 2)))?;
        times.push(t);
        let mut count = 0;
        for field in fields {
            let v: u64 = field
                .parse()
                .map_err(|e| Error::domain(format!("line {}: {e}", lineno + 2)))?;
            states.push(v);
            count += 1;
        }
        if count != N_SPECIES {
            return Err(Error::domain(format!(
                "line {}: expected {N_SPECIES} species columns, got {count}",
                lineno + 2
            )));
        }
    }
    Trajectory::from_parts(
        times,
        states,
        sidecar.reaction_counts,
        sidecar.horizon,
        sidecar.seed,
        sidecar.n,
    )
}

/// Reduced-solution CSV on a uniform grid: `t,Z_A1,Z_A2`.
pub fn ode_solution_to_csv(sol: &OdeSolution, grid_points: usize) -> String {
    let mut out = String::from("t,Z_A1,Z_A2\n");
    let m = grid_points.max(2);
    for i in 0..m {
        let t = sol.horizon * i as f64 / (m - 1) as f64;
        let [a1, a2] = sol.eval(t);
        out.push_str(&format!("{t},{a1},{a2}\n"));
    }
    out
}

/// Parses the reduced-solution CSV back into `(t, Z_A1, Z_A2)` rows.
pub fn ode_csv_rows(csv: &str) -> Result<Vec<(f64, f64, f64)>> {
    let mut lines = csv.lines();
    match lines.next() {
        Some("t,Z_A1,Z_A2") => {}
        other => return Err(Error::domain(format!("unexpected header: {other:?}"))),
    }
    let mut rows = Vec::new();
    for line in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(Error::domain(format!("bad row: {line}")));
        }
        let parse =
            |s: &str| -> Result<f64> { s.parse().map_err(|e| Error::domain(format!("{e}: {s}"))) };
        rows.push((parse(fields[0])?, parse(fields[1])?, parse(fields[2])?));
    }
    Ok(rows)
}

/// Pretty-printed JSON for any serializable report.
pub fn to_json_pretty<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| Error::domain(format!("json: {e}")))
}

pub fn from_json<'a, T: Deserialize<'a>>(s: &'a str) -> Result<T> {
    serde_json::from_str(s).map_err(|e| Error::domain(format!("json: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{ScalingRegime, State};
    use crate::ssa::{simulate, Recording};

    fn sample_trajectory() -> (Trajectory, RateConstants) {
        let regime = ScalingRegime::new(20).unwrap();
        let kappa = RateConstants::benchmark();
        let mut x0 = State::zero();
        x0.set(Species::A1, 20);
        x0.set(Species::A2, 20);
        x0.set(Species::A4, 400);
        x0.set(Species::E1, 5);
        x0.set(Species::E2, 5);
        let traj = simulate(x0, &kappa, &regime, 1.5, 77, Recording::Full).unwrap();
        (traj, kappa)
    }

    #[test]
    fn trajectory_csv_round_trip_is_lossless() {
        let (traj, kappa) = sample_trajectory();
        let csv = trajectory_to_csv(&traj);
        let sidecar = TrajectorySidecar::new(&traj, &kappa);
        let back = trajectory_from_csv(&csv, &sidecar).unwrap();
        assert_eq!(back, traj);
    }

    #[test]
    fn sidecar_json_round_trip() {
        let (traj, kappa) = sample_trajectory();
        let sidecar = TrajectorySidecar::new(&traj, &kappa);
        let json = to_json_pretty(&sidecar).unwrap();
        let back: TrajectorySidecar = from_json(&json).unwrap();
        assert_eq!(back, sidecar);
    }

    #[test]
    fn ode_csv_round_trip() {
        use crate::network::EffectiveParams;
        use crate::reduced::{solve, SlowState, SolverOptions};
        let sol = solve(
            &EffectiveParams::benchmark_truth(),
            &SlowState::new(1.0, 1.0, 1.0).unwrap(),
            5.0,
            &SolverOptions::default(),
        )
        .unwrap();
        let csv = ode_solution_to_csv(&sol, 101);
        let rows = ode_csv_rows(&csv).unwrap();
        assert_eq!(rows.len(), 101);
        for (t, a1, a2) in rows {
            let [e1, e2] = sol.eval(t);
            assert_eq!(a1, e1);
            assert_eq!(a2, e2);
        }
    }

    #[test]
    fn rejects_malformed_csv() {
        let (traj, kappa) = sample_trajectory();
        let sidecar = TrajectorySidecar::new(&traj, &kappa);
        assert!(trajectory_from_csv("", &sidecar).is_err());
        assert!(trajectory_from_csv("bad,header\n", &sidecar).is_err());
        let mut truncated = trajectory_to_csv(&traj);
        truncated.push_str("0.1,1,2\n");
        assert!(trajectory_from_csv(&truncated, &sidecar).is_err());
    }
}
