//! Exact stochastic simulation (Gillespie direct method) of the glycolytic
//! CTMC, plus the frozen-slow fast subsystem used to validate stochastic
//! averaging.
//!
//! Each step draws an exponential holding time from the total propensity and
//! a categorical reaction index; with sixteen reactions a linear scan is the
//! fastest and simplest reproducible choice. Reaction counters are exact for
//! every path; state snapshots can be thinned (see [`Recording`]) because a
//! full per-jump record costs O(n·T) memory.

use crate::error::{Error, Result};
use crate::network::{
    conservation_totals, Network, RateConstants, ScalingRegime, State, N_REACTIONS, N_SPECIES,
};
use crate::reduced::SlowState;
use crate::rng::{make_rng, SimRng};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Which jumps get a state snapshot. Reaction counters and the final state
/// are exact under every mode.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Recording {
    /// Every jump. O(total jumps) memory.
    Full,
    /// Only jumps that change a slow species (A1, A2, A4), so the scaled
    /// slow view is still exact at every time. Default.
    #[default]
    SlowJumps,
    /// Every m-th jump.
    EveryNth(usize),
    /// States sampled on the fixed grid `0, dt, 2dt, ..., T`; evaluation at
    /// grid times is exact.
    Grid { dt: f64 },
}

/// One exact sample path of the molecule-count process.
///
/// `times` is strictly increasing and starts at 0; the state at `times[j]`
/// is `state_at(j)` and the path is constant between recorded times. The
/// last snapshot always equals the exact final state, so
/// `final = initial + sum_k net[k] * reaction_counts[k]` holds under every
/// recording mode.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    states: Vec<u64>,
    pub reaction_counts: [u64; N_REACTIONS],
    pub horizon: f64,
    pub seed: u64,
    pub n: u64,
}

impl Trajectory {
    /// Reassembles a trajectory from its raw parts (used when parsing
    /// exported files); validates the structural invariants.
    pub fn from_parts(
        times: Vec<f64>,
        states: Vec<u64>,
        reaction_counts: [u64; N_REACTIONS],
        horizon: f64,
        seed: u64,
        n: u64,
    ) -> Result<Self> {
        if times.is_empty() || times[0] != 0.0 {
            return Err(Error::domain("trajectory must start at t = 0"));
        }
        if states.len() != times.len() * N_SPECIES {
            return Err(Error::domain("state rows must match time rows"));
        }
        if !times.windows(2).all(|w| w[1] > w[0]) {
            return Err(Error::domain("times must be strictly increasing"));
        }
        if *times.last().unwrap() > horizon {
            return Err(Error::domain("recorded times must not exceed the horizon"));
        }
        Ok(Trajectory {
            times,
            states,
            reaction_counts,
            horizon,
            seed,
            n,
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn state_at(&self, i: usize) -> State {
        let mut s = [0u64; N_SPECIES];
        s.copy_from_slice(&self.states[i * N_SPECIES..(i + 1) * N_SPECIES]);
        State(s)
    }

    pub fn initial_state(&self) -> State {
        self.state_at(0)
    }

    pub fn final_state(&self) -> State {
        self.state_at(self.len() - 1)
    }

    pub fn states_iter(&self) -> impl Iterator<Item = State> + '_ {
        (0..self.len()).map(|i| self.state_at(i))
    }

    /// Value of the piecewise-constant path at time `t` (cadlag: the state
    /// at the last recorded time `<= t`).
    pub fn eval(&self, t: f64) -> State {
        let i = match self
            .times
            .binary_search_by(|probe| probe.partial_cmp(&t).unwrap())
        {
            Ok(i) => i,
            Err(0) => 0,
            Err(i) => i - 1,
        };
        self.state_at(i)
    }
}

fn push_state(states: &mut Vec<u64>, x: &State) {
    states.extend_from_slice(&x.0);
}

/// Exact SSA sample path over `[0, t_max]` with unscaled propensities derived
/// from the scaled constants and the regime. Identical inputs reproduce the
/// identical path bit for bit. If the total propensity hits zero the chain is
/// absorbed (cannot happen when k0 > 0).
pub fn simulate(
    x0: State,
    kappa: &RateConstants,
    regime: &ScalingRegime,
    t_max: f64,
    seed: u64,
    recording: Recording,
) -> Result<Trajectory> {
    if !t_max.is_finite() || t_max <= 0.0 {
        return Err(Error::domain(format!("horizon T must be > 0, got {t_max}")));
    }
    kappa.validate()?;
    if let Recording::EveryNth(m) = recording {
        if m == 0 {
            return Err(Error::domain("recording stride must be >= 1"));
        }
    }
    if let Recording::Grid { dt } = recording {
        if !dt.is_finite() || dt <= 0.0 {
            return Err(Error::domain(format!("recording dt must be > 0, got {dt}")));
        }
    }

    let network = Network::new();
    let rates = kappa.unscaled(regime);
    // Reactions whose firing changes a slow species.
    let slow_changing: [bool; N_REACTIONS] = {
        let mut out = [false; N_REACTIONS];
        for (k, row) in network.net.iter().enumerate() {
            out[k] = row[0] != 0 || row[1] != 0 || row[3] != 0;
        }
        out
    };

    let mut rng = make_rng(seed);
    let mut x = x0;
    let mut t = 0.0f64;
    let mut counts = [0u64; N_REACTIONS];

    let mut times = vec![0.0];
    let mut states = Vec::new();
    push_state(&mut states, &x);
    let mut jump_index: u64 = 0;
    // Next grid time to fill, for Recording::Grid.
    let mut grid_next: u64 = 1;

    let mut propensities = [0.0f64; N_REACTIONS];
    loop {
        let mut total = 0.0;
        for (k, p) in propensities.iter_mut().enumerate() {
            *p = network.propensity(&x, crate::network::Reaction::ALL[k], &rates);
            total += *p;
        }
        if total <= 0.0 {
            break; // absorbed
        }

        let u: f64 = rng.random();
        let tau = -(1.0 - u).ln() / total;
        let t_next = t + tau;
        if t_next > t_max {
            break;
        }

        // Snapshot grid points strictly before the jump with the pre-jump state.
        if let Recording::Grid { dt } = recording {
            let mut g = grid_next as f64 * dt;
            while g < t_next && g <= t_max {
                times.push(g);
                push_state(&mut states, &x);
                grid_next += 1;
                g = grid_next as f64 * dt;
            }
        }

        let r: f64 = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut chosen = None;
        for (k, p) in propensities.iter().enumerate() {
            acc += p;
            if r < acc {
                chosen = Some(k);
                break;
            }
        }
        // Floating-point slack in the cumulative scan: fall back to the last
        // reaction with positive propensity.
        let k = chosen.unwrap_or_else(|| {
            propensities
                .iter()
                .rposition(|&p| p > 0.0)
                .expect("total propensity > 0")
        });

        x.apply(&network.net[k]);
        counts[k] += 1;
        t = t_next;
        jump_index += 1;

        let record = match recording {
            Recording::Full => true,
            Recording::SlowJumps => slow_changing[k],
            Recording::EveryNth(m) => jump_index.is_multiple_of(m as u64),
            Recording::Grid { .. } => false,
        };
        if record {
            times.push(t);
            push_state(&mut states, &x);
        }
    }

    // Close out the record with the exact final state.
    match recording {
        Recording::Grid { dt } => {
            let mut g = grid_next as f64 * dt;
            while g <= t_max {
                times.push(g);
                push_state(&mut states, &x);
                grid_next += 1;
                g = grid_next as f64 * dt;
            }
            if *times.last().unwrap() < t_max {
                times.push(t_max);
                push_state(&mut states, &x);
            }
        }
        _ => {
            if t > *times.last().unwrap() {
                times.push(t);
                push_state(&mut states, &x);
            }
        }
    }

    Ok(Trajectory {
        times,
        states,
        reaction_counts: counts,
        horizon: t_max,
        seed,
        n: regime.n,
    })
}

/// The seven fast coordinates, in order
/// `(A3, E1, E1star, E1A1, E1starA1, E2, E2A2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FastState(pub [u64; 7]);

pub const FAST_NAMES: [&str; 7] = ["A3", "E1", "E1star", "E1A1", "E1starA1", "E2", "E2A2"];

impl FastState {
    /// E1-family total (conserved by the frozen-fast dynamics).
    pub fn e1_family(&self) -> u64 {
        self.0[1] + self.0[2] + self.0[3] + self.0[4]
    }

    /// E2-family total (conserved by the frozen-fast dynamics).
    pub fn e2_family(&self) -> u64 {
        self.0[5] + self.0[6]
    }
}

/// A sample path of the frozen-slow fast subsystem (every jump recorded).
#[derive(Debug, Clone, PartialEq)]
pub struct FastTrajectory {
    pub times: Vec<f64>,
    states: Vec<u64>,
    pub horizon: f64,
    pub seed: u64,
}

impl FastTrajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn state_at(&self, i: usize) -> FastState {
        let mut s = [0u64; 7];
        s.copy_from_slice(&self.states[i * 7..(i + 1) * 7]);
        FastState(s)
    }

    pub fn states_iter(&self) -> impl Iterator<Item = FastState> + '_ {
        (0..self.len()).map(|i| self.state_at(i))
    }
}

/// The eleven jump channels of the fast subsystem when the slow coordinates
/// are frozen at `zs`. The activation exchanges (reactions 7/7' and their
/// reverses) run on an intermediate time scale and do not appear here; they
/// enter the averaged model only through a stationarity balance, so the
/// E1-pool split `E1 + E1A1` vs `E1star + E1starA1` is conserved along any
/// frozen-fast path.
struct FastChannels {
    // (rate coefficient already multiplied with frozen slow factors, kind)
    rates: [f64; 11],
    unary: [Option<usize>; 11],
    deltas: [[i32; 7]; 11],
}

fn fast_channels(zs: &SlowState, kappa: &RateConstants) -> FastChannels {
    // Indices into FastState: 0 A3, 1 E1, 2 E1star, 3 E1A1, 4 E1starA1, 5 E2, 6 E2A2.
    FastChannels {
        rates: [
            kappa.k1 * zs.a1,
            kappa.km1,
            kappa.k2,
            kappa.k3 * zs.a1,
            kappa.km3,
            kappa.k4,
            kappa.k5 * zs.a2,
            kappa.km5,
            kappa.k6,
            kappa.k8 * zs.a2 * zs.a2,
            kappa.km8 * zs.a4,
        ],
        unary: [
            Some(1),
            Some(3),
            Some(3),
            Some(2),
            Some(4),
            Some(4),
            Some(5),
            Some(6),
            Some(6),
            None,
            Some(0),
        ],
        deltas: [
            [0, -1, 0, 1, 0, 0, 0],
            [0, 1, 0, -1, 0, 0, 0],
            [0, 1, 0, -1, 0, 0, 0],
            [0, 0, -1, 0, 1, 0, 0],
            [0, 0, 1, 0, -1, 0, 0],
            [0, 0, 1, 0, -1, 0, 0],
            [0, 0, 0, 0, 0, -1, 1],
            [0, 0, 0, 0, 0, 1, -1],
            [0, 0, 0, 0, 0, 1, -1],
            [1, 0, 0, 0, 0, 0, 0],
            [-1, 0, 0, 0, 0, 0, 0],
        ],
    }
}

/// Exact SSA of the frozen-fast subsystem over `[0, t_max]`.
pub fn simulate_frozen_fast(
    zs: &SlowState,
    zf0: FastState,
    kappa: &RateConstants,
    t_max: f64,
    seed: u64,
) -> Result<FastTrajectory> {
    if !zs.a4.is_finite() || zs.a4 <= 0.0 {
        return Err(Error::domain(format!(
            "frozen z_A4 must be > 0, got {}",
            zs.a4
        )));
    }
    if !t_max.is_finite() || t_max <= 0.0 {
        return Err(Error::domain(format!("horizon T must be > 0, got {t_max}")));
    }
    kappa.validate()?;

    let ch = fast_channels(zs, kappa);
    let mut rng: SimRng = make_rng(seed);
    let mut x = zf0;
    let mut t = 0.0f64;
    let mut times = vec![0.0];
    let mut states = Vec::new();
    states.extend_from_slice(&x.0);

    loop {
        let mut props = [0.0f64; 11];
        let mut total = 0.0;
        for ((p, rate), unary) in props.iter_mut().zip(&ch.rates).zip(&ch.unary) {
            *p = match unary {
                Some(s) => rate * x.0[*s] as f64,
                None => *rate,
            };
            total += *p;
        }
        if total <= 0.0 {
            break;
        }
        let u: f64 = rng.random();
        let tau = -(1.0 - u).ln() / total;
        let t_next = t + tau;
        if t_next > t_max {
            break;
        }
        let r: f64 = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut chosen = None;
        for (i, p) in props.iter().enumerate() {
            acc += p;
            if r < acc {
                chosen = Some(i);
                break;
            }
        }
        let i = chosen.unwrap_or_else(|| props.iter().rposition(|&p| p > 0.0).expect("total > 0"));
        for (c, d) in x.0.iter_mut().zip(&ch.deltas[i]) {
            *c = c.wrapping_add_signed(i64::from(*d));
        }
        t = t_next;
        times.push(t);
        states.extend_from_slice(&x.0);
    }

    Ok(FastTrajectory {
        times,
        states,
        horizon: t_max,
        seed,
    })
}

/// Time-weighted mean of each fast coordinate over the window
/// `[burn_in * T, T]` (the path is constant after its last jump).
pub fn time_average_fast(traj: &FastTrajectory, burn_in: f64) -> Result<[f64; 7]> {
    if !(0.0..1.0).contains(&burn_in) {
        return Err(Error::domain(format!(
            "burn-in fraction must lie in [0, 1), got {burn_in}"
        )));
    }
    if traj.times.is_empty() {
        return Err(Error::domain("empty trajectory"));
    }
    let t_end = traj.horizon;
    let w0 = burn_in * t_end;
    let window = t_end - w0;
    if window <= 0.0 || window.is_nan() {
        return Err(Error::domain("empty averaging window"));
    }

    let mut acc = [0.0f64; 7];
    let m = traj.len();
    for j in 0..m {
        let seg_start = traj.times[j];
        let seg_end = if j + 1 < m { traj.times[j + 1] } else { t_end };
        let lo = seg_start.max(w0);
        let hi = seg_end.min(t_end);
        if hi > lo {
            let w = hi - lo;
            let s = traj.state_at(j);
            for (a, c) in acc.iter_mut().zip(s.0) {
                *a += c as f64 * w;
            }
        }
    }
    for a in acc.iter_mut() {
        *a /= window;
    }
    Ok(acc)
}

/// Time-weighted mean of an arbitrary function of the fast state over
/// `[burn_in * T, T]`; used for the activation-balance covariances.
pub fn time_average_fast_fn(
    traj: &FastTrajectory,
    burn_in: f64,
    f: impl Fn(&FastState) -> f64,
) -> Result<f64> {
    if !(0.0..1.0).contains(&burn_in) {
        return Err(Error::domain(format!(
            "burn-in fraction must lie in [0, 1), got {burn_in}"
        )));
    }
    if traj.times.is_empty() {
        return Err(Error::domain("empty trajectory"));
    }
    let t_end = traj.horizon;
    let w0 = burn_in * t_end;
    let window = t_end - w0;
    if window <= 0.0 || window.is_nan() {
        return Err(Error::domain("empty averaging window"));
    }
    let mut acc = 0.0;
    let m = traj.len();
    for j in 0..m {
        let seg_start = traj.times[j];
        let seg_end = if j + 1 < m { traj.times[j + 1] } else { t_end };
        let lo = seg_start.max(w0);
        let hi = seg_end.min(t_end);
        if hi > lo {
            acc += f(&traj.state_at(j)) * (hi - lo);
        }
    }
    Ok(acc / window)
}

/// Sanity check used by tests and the validation command: both conservation
/// totals must be identical at every recorded state.
pub fn conservation_constant(traj: &Trajectory) -> bool {
    let first = conservation_totals(&traj.initial_state());
    traj.states_iter().all(|x| conservation_totals(&x) == first)
}
