//! Shared fixtures for the criterion benchmarks.

use glyco_core::network::{RateConstants, ScalingRegime, Species, State};
use glyco_core::reduced::SlowState;

pub fn benchmark_rates() -> RateConstants {
    RateConstants::benchmark()
}

/// Standard initial state: scaled slow start (1, 1, 1) with the default
/// enzyme totals.
pub fn initial_state(n: u64) -> State {
    let mut x = State::zero();
    x.set(Species::A1, n);
    x.set(Species::A2, n);
    x.set(Species::A4, n * n);
    x.set(Species::A3, 1);
    x.set(Species::E1, 5);
    x.set(Species::E2, 5);
    x
}

pub fn regime(n: u64) -> ScalingRegime {
    ScalingRegime::new(n).expect("n >= 1")
}

pub fn unit_slow() -> SlowState {
    SlowState::new(1.0, 1.0, 1.0).expect("valid slow state")
}
