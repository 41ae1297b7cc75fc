//! Static description of the Othmer-Aldridge glycolytic reaction system:
//! species, stoichiometry, mass-action propensities, abundance/speed scaling,
//! conservation totals, and the map onto the reduced model's effective
//! parameters.
//!
//! The mechanism has ten species and sixteen reactions. `A1` (F6P) enters at
//! a constant rate and is phosphorylated by either form of PFK (`E1` low
//! activity, `E1star` activated); the product `A2` (ADP) is degraded by `E2`
//! and interconverts with `A3` (AMP) and `A4` (ATP) through the adenylate
//! kinase reaction `2 A2 <-> A3 + A4`. AMP activates PFK by binding the free
//! and substrate-bound low-activity forms.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// The ten chemical species, in the fixed state-vector order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[repr(usize)]
pub enum Species {
    /// Fructose-6-phosphate.
    A1 = 0,
    /// ADP.
    A2 = 1,
    /// AMP.
    A3 = 2,
    /// ATP.
    A4 = 3,
    /// Low-activity PFK.
    E1 = 4,
    /// Activated PFK.
    E1Star = 5,
    /// PFK-F6P complex.
    E1A1 = 6,
    /// Activated-PFK-F6P complex.
    E1StarA1 = 7,
    /// ADP-degrading enzyme.
    E2 = 8,
    /// E2-ADP complex.
    E2A2 = 9,
}

pub const N_SPECIES: usize = 10;

impl Species {
    pub const ALL: [Species; N_SPECIES] = [
        Species::A1,
        Species::A2,
        Species::A3,
        Species::A4,
        Species::E1,
        Species::E1Star,
        Species::E1A1,
        Species::E1StarA1,
        Species::E2,
        Species::E2A2,
    ];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    /// Column name used in CSV exports.
    pub fn name(self) -> &'static str {
        match self {
            Species::A1 => "A1",
            Species::A2 => "A2",
            Species::A3 => "A3",
            Species::A4 => "A4",
            Species::E1 => "E1",
            Species::E1Star => "E1star",
            Species::E1A1 => "E1A1",
            Species::E1StarA1 => "E1starA1",
            Species::E2 => "E2",
            Species::E2A2 => "E2A2",
        }
    }
}

/// The sixteen reactions. `P` marks the primed activation reactions (AMP
/// binding the substrate-bound PFK), `M` a reverse direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[repr(usize)]
pub enum Reaction {
    /// `∅ -> A1`, constant inflow.
    R0 = 0,
    /// `E1 + A1 -> E1A1`.
    R1 = 1,
    /// `E1A1 -> E1 + A1`.
    Rm1 = 2,
    /// `E1A1 -> E1 + A2`, catalytic step of low-activity PFK.
    R2 = 3,
    /// `E1star + A1 -> E1starA1`.
    R3 = 4,
    /// `E1starA1 -> E1star + A1`.
    Rm3 = 5,
    /// `E1starA1 -> E1star + A2`, catalytic step of activated PFK.
    R4 = 6,
    /// `E2 + A2 -> E2A2`.
    R5 = 7,
    /// `E2A2 -> E2 + A2`.
    Rm5 = 8,
    /// `E2A2 -> E2` (+ untracked product), ADP degradation.
    R6 = 9,
    /// `E1 + A3 -> E1star`, activation of free PFK.
    R7 = 10,
    /// `E1star -> E1 + A3`.
    Rm7 = 11,
    /// `E1A1 + A3 -> E1starA1`, activation of bound PFK.
    R7p = 12,
    /// `E1starA1 -> E1A1 + A3`.
    Rm7p = 13,
    /// `2 A2 -> A3 + A4`, adenylate kinase forward.
    R8 = 14,
    /// `A3 + A4 -> 2 A2`, adenylate kinase reverse.
    Rm8 = 15,
}

pub const N_REACTIONS: usize = 16;

impl Reaction {
    pub const ALL: [Reaction; N_REACTIONS] = [
        Reaction::R0,
        Reaction::R1,
        Reaction::Rm1,
        Reaction::R2,
        Reaction::R3,
        Reaction::Rm3,
        Reaction::R4,
        Reaction::R5,
        Reaction::Rm5,
        Reaction::R6,
        Reaction::R7,
        Reaction::Rm7,
        Reaction::R7p,
        Reaction::Rm7p,
        Reaction::R8,
        Reaction::Rm8,
    ];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Reaction::R0 => "R0",
            Reaction::R1 => "R1",
            Reaction::Rm1 => "R-1",
            Reaction::R2 => "R2",
            Reaction::R3 => "R3",
            Reaction::Rm3 => "R-3",
            Reaction::R4 => "R4",
            Reaction::R5 => "R5",
            Reaction::Rm5 => "R-5",
            Reaction::R6 => "R6",
            Reaction::R7 => "R7",
            Reaction::Rm7 => "R-7",
            Reaction::R7p => "R7'",
            Reaction::Rm7p => "R-7'",
            Reaction::R8 => "R8",
            Reaction::Rm8 => "R-8",
        }
    }

    /// The rate constant driving this reaction. The primed activation
    /// reactions share their constants with the unprimed ones.
    pub fn rate(self) -> RateIndex {
        match self {
            Reaction::R0 => RateIndex::K0,
            Reaction::R1 => RateIndex::K1,
            Reaction::Rm1 => RateIndex::Km1,
            Reaction::R2 => RateIndex::K2,
            Reaction::R3 => RateIndex::K3,
            Reaction::Rm3 => RateIndex::Km3,
            Reaction::R4 => RateIndex::K4,
            Reaction::R5 => RateIndex::K5,
            Reaction::Rm5 => RateIndex::Km5,
            Reaction::R6 => RateIndex::K6,
            Reaction::R7 | Reaction::R7p => RateIndex::K7,
            Reaction::Rm7 | Reaction::Rm7p => RateIndex::Km7,
            Reaction::R8 => RateIndex::K8,
            Reaction::Rm8 => RateIndex::Km8,
        }
    }
}

/// Index into the fourteen rate constants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(usize)]
pub enum RateIndex {
    K0 = 0,
    K1 = 1,
    Km1 = 2,
    K2 = 3,
    K3 = 4,
    Km3 = 5,
    K4 = 6,
    K5 = 7,
    Km5 = 8,
    K6 = 9,
    K7 = 10,
    Km7 = 11,
    K8 = 12,
    Km8 = 13,
}

pub const N_RATES: usize = 14;

impl RateIndex {
    pub const ALL: [RateIndex; N_RATES] = [
        RateIndex::K0,
        RateIndex::K1,
        RateIndex::Km1,
        RateIndex::K2,
        RateIndex::K3,
        RateIndex::Km3,
        RateIndex::K4,
        RateIndex::K5,
        RateIndex::Km5,
        RateIndex::K6,
        RateIndex::K7,
        RateIndex::Km7,
        RateIndex::K8,
        RateIndex::Km8,
    ];
}

/// The fourteen reaction-rate constants, in scaled ("per unit of the slow
/// time scale") form. Reactions 7/7' share `k7` and -7/-7' share `km7`, so
/// fourteen values drive sixteen reactions.
///
/// Entries must be finite and nonnegative; blocks of zero rates are valid
/// and switch the corresponding reactions off.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateConstants {
    pub k0: f64,
    pub k1: f64,
    pub km1: f64,
    pub k2: f64,
    pub k3: f64,
    pub km3: f64,
    pub k4: f64,
    pub k5: f64,
    pub km5: f64,
    pub k6: f64,
    pub k7: f64,
    pub km7: f64,
    pub k8: f64,
    pub km8: f64,
}

impl RateConstants {
    /// Validates that every constant is finite and nonnegative.
    pub fn validate(&self) -> Result<()> {
        for (idx, v) in RateIndex::ALL.iter().zip(self.as_array()) {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::domain(format!(
                    "rate constant {idx:?} must be finite and >= 0, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Validates that every constant is strictly positive (required by the
    /// effective-parameter map).
    pub fn validate_positive(&self) -> Result<()> {
        self.validate()?;
        for (idx, v) in RateIndex::ALL.iter().zip(self.as_array()) {
            if v <= 0.0 {
                return Err(Error::domain(format!(
                    "rate constant {idx:?} must be > 0, got {v}"
                )));
            }
        }
        Ok(())
    }

    pub fn get(&self, idx: RateIndex) -> f64 {
        self.as_array()[idx as usize]
    }

    pub fn as_array(&self) -> [f64; N_RATES] {
        [
            self.k0, self.k1, self.km1, self.k2, self.k3, self.km3, self.k4, self.k5, self.km5,
            self.k6, self.k7, self.km7, self.k8, self.km8,
        ]
    }

    pub fn from_array(a: [f64; N_RATES]) -> Self {
        RateConstants {
            k0: a[0],
            k1: a[1],
            km1: a[2],
            k2: a[3],
            k3: a[4],
            km3: a[5],
            k4: a[6],
            k5: a[7],
            km5: a[8],
            k6: a[9],
            k7: a[10],
            km7: a[11],
            k8: a[12],
            km8: a[13],
        }
    }

    /// The benchmark rate set used throughout the numerical experiments
    /// (1.7321 is the truncation of sqrt(3) that makes K1 = 3 up to 3e-5).
    pub fn benchmark() -> Self {
        RateConstants {
            k0: 0.5,
            k1: 1.0,
            km1: 1.94,
            k2: 0.06,
            k3: 5.0,
            km3: 4.6,
            k4: 0.4,
            k5: 1.0,
            km5: 1.7,
            k6: 0.3,
            k7: 1.0,
            km7: 1.7321,
            k8: 1.0,
            km8: 1.7321,
        }
    }

    /// Converts scaled constants into the unscaled constants that drive the
    /// molecule-count process: `k^(n) = n^beta * k` per rate.
    pub fn unscaled(&self, regime: &ScalingRegime) -> RateConstants {
        let n = regime.n as f64;
        let mut out = self.as_array();
        for (i, idx) in RateIndex::ALL.iter().enumerate() {
            out[i] *= n.powf(regime.beta(*idx));
        }
        RateConstants::from_array(out)
    }
}

/// The fixed multiscale regime: abundance exponents per species, speed
/// exponents per rate, and the scaling parameter `n` (the only free value;
/// the exponents are the ones under which the two-variable reduction holds).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScalingRegime {
    pub n: u64,
}

impl ScalingRegime {
    pub fn new(n: u64) -> Result<Self> {
        if n < 1 {
            return Err(Error::domain("scaling parameter n must be >= 1"));
        }
        Ok(ScalingRegime { n })
    }

    /// Abundance exponent: species counts are O(n^alpha).
    pub fn alpha(&self, s: Species) -> i32 {
        match s {
            Species::A4 => 2,
            Species::A1 | Species::A2 => 1,
            _ => 0,
        }
    }

    /// Speed exponent: unscaled rate constants are n^beta times the scaled ones.
    pub fn beta(&self, r: RateIndex) -> f64 {
        use RateIndex::*;
        match r {
            K0 | Km1 | K2 | Km3 | K4 | Km5 | K6 => 1.0,
            K7 | Km7 => 0.5,
            K1 | K3 | K5 => 0.0,
            K8 | Km8 => -1.0,
        }
    }

    /// Scales a molecule-count state into concentration-like coordinates:
    /// `z_i = n^(-alpha_i) x_i`.
    pub fn scale_state(&self, x: &State) -> [f64; N_SPECIES] {
        let n = self.n as f64;
        let mut z = [0.0; N_SPECIES];
        for s in Species::ALL {
            z[s.index()] = x.get(s) as f64 * n.powi(-self.alpha(s));
        }
        z
    }
}

/// Molecule copy numbers for the ten species.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct State(pub [u64; N_SPECIES]);

impl State {
    pub fn zero() -> Self {
        State([0; N_SPECIES])
    }

    #[inline]
    pub fn get(&self, s: Species) -> u64 {
        self.0[s.index()]
    }

    #[inline]
    pub fn set(&mut self, s: Species, v: u64) {
        self.0[s.index()] = v;
    }

    /// Applies the net change of one reaction firing. Only valid when the
    /// reaction's propensity is positive at `self` (mass-action propensities
    /// vanish exactly when a required reactant is missing, so counts stay
    /// nonnegative along any simulated path).
    #[inline]
    pub fn apply(&mut self, net: &[i32; N_SPECIES]) {
        for (c, d) in self.0.iter_mut().zip(net) {
            *c = c.wrapping_add_signed(i64::from(*d));
        }
    }
}

/// Conserved enzyme totals: `J1 = E1 + E1A1 + E1star + E1starA1` and
/// `J2 = E2 + E2A2`. Unchanged by every reaction.
pub fn conservation_totals(x: &State) -> (u64, u64) {
    let j1 = x.get(Species::E1)
        + x.get(Species::E1A1)
        + x.get(Species::E1Star)
        + x.get(Species::E1StarA1);
    let j2 = x.get(Species::E2) + x.get(Species::E2A2);
    (j1, j2)
}

/// Mass-action form of a propensity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PropensityKind {
    /// State-independent rate (the A1 inflow).
    Constant,
    /// `k * x_s`.
    Unary(Species),
    /// `k * x_s * x_t`.
    Binary(Species, Species),
    /// `k * x_A2 * (x_A2 - 1)`, the dimerization-style adenylate kinase form.
    A2Pair,
}

/// The reaction system: net stoichiometry and propensity form per reaction.
#[derive(Debug, Clone)]
pub struct Network {
    /// `net[k][i]` is the change in species `i` when reaction `k` fires.
    pub net: [[i32; N_SPECIES]; N_REACTIONS],
    pub kinds: [PropensityKind; N_REACTIONS],
}

impl Network {
    pub fn new() -> Self {
        use PropensityKind::*;
        use Species::*;
        let mut net = [[0i32; N_SPECIES]; N_REACTIONS];
        let mut add = |r: Reaction, changes: &[(Species, i32)]| {
            for &(s, d) in changes {
                net[r.index()][s.index()] = d;
            }
        };
        add(Reaction::R0, &[(A1, 1)]);
        add(Reaction::R1, &[(A1, -1), (E1, -1), (E1A1, 1)]);
        add(Reaction::Rm1, &[(A1, 1), (E1, 1), (E1A1, -1)]);
        add(Reaction::R2, &[(A2, 1), (E1, 1), (E1A1, -1)]);
        add(Reaction::R3, &[(A1, -1), (E1Star, -1), (E1StarA1, 1)]);
        add(Reaction::Rm3, &[(A1, 1), (E1Star, 1), (E1StarA1, -1)]);
        add(Reaction::R4, &[(A2, 1), (E1Star, 1), (E1StarA1, -1)]);
        add(Reaction::R5, &[(A2, -1), (E2, -1), (E2A2, 1)]);
        add(Reaction::Rm5, &[(A2, 1), (E2, 1), (E2A2, -1)]);
        // R6 releases an untracked product; only the complex turns over.
        add(Reaction::R6, &[(E2, 1), (E2A2, -1)]);
        add(Reaction::R7, &[(A3, -1), (E1, -1), (E1Star, 1)]);
        add(Reaction::Rm7, &[(A3, 1), (E1, 1), (E1Star, -1)]);
        add(Reaction::R7p, &[(A3, -1), (E1A1, -1), (E1StarA1, 1)]);
        add(Reaction::Rm7p, &[(A3, 1), (E1A1, 1), (E1StarA1, -1)]);
        add(Reaction::R8, &[(A2, -2), (A3, 1), (A4, 1)]);
        add(Reaction::Rm8, &[(A2, 2), (A3, -1), (A4, -1)]);

        let kinds = [
            Constant,           // R0
            Binary(E1, A1),     // R1
            Unary(E1A1),        // R-1
            Unary(E1A1),        // R2
            Binary(E1Star, A1), // R3
            Unary(E1StarA1),    // R-3
            Unary(E1StarA1),    // R4
            Binary(E2, A2),     // R5
            Unary(E2A2),        // R-5
            Unary(E2A2),        // R6
            Binary(E1, A3),     // R7
            Unary(E1Star),      // R-7
            Binary(E1A1, A3),   // R7'
            Unary(E1StarA1),    // R-7'
            A2Pair,             // R8
            Binary(A3, A4),     // R-8
        ];
        Network { net, kinds }
    }

    /// Propensity of reaction `k` at state `x` under the given (unscaled)
    /// rate table. Zero is a valid return; it occurs exactly when a required
    /// reactant is absent.
    #[inline]
    pub fn propensity(&self, x: &State, k: Reaction, rates: &RateConstants) -> f64 {
        let kappa = rates.get(k.rate());
        match self.kinds[k.index()] {
            PropensityKind::Constant => kappa,
            PropensityKind::Unary(s) => kappa * x.get(s) as f64,
            PropensityKind::Binary(s, t) => kappa * x.get(s) as f64 * x.get(t) as f64,
            PropensityKind::A2Pair => {
                let a2 = x.get(Species::A2) as f64;
                kappa * a2 * (a2 - 1.0)
            }
        }
    }

    /// Scaled intensity of reaction `k` at scaled state `z` (scaled rate
    /// constants, concentration-like coordinates). The adenylate kinase
    /// forward intensity carries the finite-size correction
    /// `k8 * z_A2 * (z_A2 - 1/n)`. Analysis form; the simulator always works
    /// with molecule counts and [`Network::propensity`].
    pub fn scaled_intensity(
        &self,
        z: &[f64; N_SPECIES],
        k: Reaction,
        kappa: &RateConstants,
        n: u64,
    ) -> f64 {
        let rate = kappa.get(k.rate());
        match self.kinds[k.index()] {
            PropensityKind::Constant => rate,
            PropensityKind::Unary(s) => rate * z[s.index()],
            PropensityKind::Binary(s, t) => rate * z[s.index()] * z[t.index()],
            PropensityKind::A2Pair => {
                let a2 = z[Species::A2.index()];
                rate * a2 * (a2 - 1.0 / n as f64)
            }
        }
    }
}

impl Default for Network {
    fn default() -> Self {
        Network::new()
    }
}

/// The eight effective parameters of the reduced two-variable model:
/// the inflow rate, the activation equilibrium ratio, three Michaelis
/// constants, and three maximal-rate constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveParams {
    pub kappa0: f64,
    pub k1: f64,
    pub k_m1: f64,
    pub k_m1_star: f64,
    pub k_m2: f64,
    pub j1_bullet: f64,
    pub j1_star: f64,
    pub j2_bullet: f64,
}

pub const N_PARAMS: usize = 8;

impl EffectiveParams {
    /// Aggregates the fourteen rate constants and the limiting conservation
    /// totals into the reduced model's parameters:
    ///
    /// ```text
    /// theta = (k0, km7*km8/(k7*k8), (km1+k2)/k1, (km3+k4)/k3, (km5+k6)/k5,
    ///          k2*J1, k4*J1, k6*J2)
    /// ```
    pub fn from_rates(kappa: &RateConstants, j1: f64, j2: f64) -> Result<Self> {
        kappa.validate_positive()?;
        if !(j1 > 0.0 && j1.is_finite()) || !(j2 > 0.0 && j2.is_finite()) {
            return Err(Error::domain(format!(
                "conservation totals must be finite and > 0, got J1 = {j1}, J2 = {j2}"
            )));
        }
        Ok(EffectiveParams {
            kappa0: kappa.k0,
            k1: kappa.km7 * kappa.km8 / (kappa.k7 * kappa.k8),
            k_m1: (kappa.km1 + kappa.k2) / kappa.k1,
            k_m1_star: (kappa.km3 + kappa.k4) / kappa.k3,
            k_m2: (kappa.km5 + kappa.k6) / kappa.k5,
            j1_bullet: kappa.k2 * j1,
            j1_star: kappa.k4 * j1,
            j2_bullet: kappa.k6 * j2,
        })
    }

    /// The true parameter values of the benchmark rate set with J1 = J2 = 5.
    pub fn benchmark_truth() -> Self {
        EffectiveParams {
            kappa0: 0.5,
            k1: 3.0,
            k_m1: 2.0,
            k_m1_star: 1.0,
            k_m2: 2.0,
            j1_bullet: 0.3,
            j1_star: 2.0,
            j2_bullet: 1.5,
        }
    }

    pub fn as_array(&self) -> [f64; N_PARAMS] {
        [
            self.kappa0,
            self.k1,
            self.k_m1,
            self.k_m1_star,
            self.k_m2,
            self.j1_bullet,
            self.j1_star,
            self.j2_bullet,
        ]
    }

    pub fn from_array(a: [f64; N_PARAMS]) -> Self {
        EffectiveParams {
            kappa0: a[0],
            k1: a[1],
            k_m1: a[2],
            k_m1_star: a[3],
            k_m2: a[4],
            j1_bullet: a[5],
            j1_star: a[6],
            j2_bullet: a[7],
        }
    }

    pub fn validate_positive(&self) -> Result<()> {
        for (name, v) in PARAM_NAMES.iter().zip(self.as_array()) {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::domain(format!(
                    "effective parameter {name} must be finite and > 0, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Parameter names in `as_array` order, used in reports.
pub const PARAM_NAMES: [&str; N_PARAMS] = [
    "kappa0",
    "K1",
    "K_M1",
    "K_M1_star",
    "K_M2",
    "J1_bullet",
    "J1_star",
    "J2_bullet",
];

#[cfg(test)]
mod tests {
    use super::*;

    fn net() -> Network {
        Network::new()
    }

    #[test]
    fn adenylate_kinase_stoichiometry() {
        let n = net();
        assert_eq!(n.net[Reaction::R8.index()][Species::A2.index()], -2);
        assert_eq!(n.net[Reaction::R8.index()][Species::A3.index()], 1);
        assert_eq!(n.net[Reaction::R8.index()][Species::A4.index()], 1);
        for i in 0..N_SPECIES {
            assert_eq!(
                n.net[Reaction::Rm8.index()][i],
                -n.net[Reaction::R8.index()][i]
            );
        }
    }

    #[test]
    fn enzyme_families_conserved_by_every_reaction() {
        let n = net();
        for k in Reaction::ALL {
            let row = &n.net[k.index()];
            let e1_family = row[Species::E1.index()]
                + row[Species::E1Star.index()]
                + row[Species::E1A1.index()]
                + row[Species::E1StarA1.index()];
            let e2_family = row[Species::E2.index()] + row[Species::E2A2.index()];
            assert_eq!(e1_family, 0, "E1 family not conserved by {}", k.name());
            assert_eq!(e2_family, 0, "E2 family not conserved by {}", k.name());
        }
    }

    #[test]
    fn product_of_r6_is_untracked() {
        let n = net();
        assert_eq!(n.net[Reaction::R6.index()][Species::A2.index()], 0);
        // R6 only converts the complex back to free enzyme.
        let row = &n.net[Reaction::R6.index()];
        assert_eq!(row.iter().filter(|&&d| d != 0).count(), 2);
    }

    #[test]
    fn propensity_adenylate_kinase_vanishes_at_one_copy() {
        let n = net();
        let rates = RateConstants::benchmark();
        let mut x = State::zero();
        x.set(Species::A2, 1);
        assert_eq!(n.propensity(&x, Reaction::R8, &rates), 0.0);
    }

    #[test]
    fn propensity_binary_mass_action() {
        // Direct evaluation of k1 * x_E1 * x_A1 = 1 * 3 * 7.
        let n = net();
        let mut rates = RateConstants::benchmark();
        rates.k1 = 1.0;
        let mut x = State::zero();
        x.set(Species::E1, 3);
        x.set(Species::A1, 7);
        assert_eq!(n.propensity(&x, Reaction::R1, &rates), 21.0);
    }

    #[test]
    fn propensity_inflow_is_state_independent() {
        let n = net();
        let rates = RateConstants::benchmark();
        let mut x = State::zero();
        assert_eq!(n.propensity(&x, Reaction::R0, &rates), rates.k0);
        x.set(Species::A1, 123);
        x.set(Species::A4, 456);
        assert_eq!(n.propensity(&x, Reaction::R0, &rates), rates.k0);
    }

    #[test]
    fn scaled_intensity_matches_count_propensity() {
        // lambda_k(x) = n^c * l_k(z(x)) with c = 1 for every reaction except
        // the activation exchanges, which carry c = 1/2.
        let n = 50u64;
        let regime = ScalingRegime::new(n).unwrap();
        let kappa = RateConstants::benchmark();
        let unscaled = kappa.unscaled(&regime);
        let net = Network::new();
        let mut x = State::zero();
        x.set(Species::A1, 120);
        x.set(Species::A2, 80);
        x.set(Species::A3, 2);
        x.set(Species::A4, 2600);
        x.set(Species::E1, 3);
        x.set(Species::E1Star, 1);
        x.set(Species::E1A1, 1);
        x.set(Species::E2, 4);
        x.set(Species::E2A2, 1);
        let z = regime.scale_state(&x);
        for k in Reaction::ALL {
            let c = match k {
                Reaction::R7 | Reaction::Rm7 | Reaction::R7p | Reaction::Rm7p => 0.5,
                _ => 1.0,
            };
            let lhs = net.propensity(&x, k, &unscaled);
            let rhs = (n as f64).powf(c) * net.scaled_intensity(&z, k, &kappa, n);
            assert!(
                (lhs - rhs).abs() <= 1e-9 * lhs.abs().max(1.0),
                "{}: {lhs} vs {rhs}",
                k.name()
            );
        }
    }

    #[test]
    fn scaled_intensity_finite_size_correction_fades() {
        let kappa = RateConstants::benchmark();
        let net = Network::new();
        let mut z = [0.0; N_SPECIES];
        z[Species::A2.index()] = 2.0;
        let small_n = net.scaled_intensity(&z, Reaction::R8, &kappa, 10);
        let large_n = net.scaled_intensity(&z, Reaction::R8, &kappa, 1_000_000);
        assert!((small_n - kappa.k8 * 2.0 * 1.9).abs() < 1e-12);
        assert!((large_n - kappa.k8 * 4.0).abs() < 1e-5);
    }

    #[test]
    fn unscaled_rates_follow_speed_exponents() {
        let regime = ScalingRegime::new(100).unwrap();
        let mut kappa = RateConstants::benchmark();
        kappa.k7 = 1.0;
        kappa.k8 = 1.0;
        let un = kappa.unscaled(&regime);
        assert!((un.k7 - 10.0).abs() < 1e-12); // beta = 1/2
        assert!((un.k8 - 0.01).abs() < 1e-15); // beta = -1
        assert!((un.k0 - kappa.k0 * 100.0).abs() < 1e-12); // beta = 1
        assert_eq!(un.k1, kappa.k1); // beta = 0
    }

    #[test]
    fn unscaled_rates_identity_at_n_equals_one() {
        let regime = ScalingRegime::new(1).unwrap();
        let kappa = RateConstants::benchmark();
        assert_eq!(kappa.unscaled(&regime), kappa);
    }

    #[test]
    fn effective_params_benchmark_row() {
        let theta = EffectiveParams::from_rates(&RateConstants::benchmark(), 5.0, 5.0).unwrap();
        let truth = EffectiveParams::benchmark_truth();
        for (got, want) in theta.as_array().iter().zip(truth.as_array()) {
            assert!(
                (got - want).abs() <= 5e-3,
                "effective parameter {got} vs {want}"
            );
        }
    }

    #[test]
    fn effective_params_all_ones() {
        // Direct substitution by hand: (1, 1, 2, 2, 2, 1, 1, 1).
        let kappa = RateConstants::from_array([1.0; N_RATES]);
        let theta = EffectiveParams::from_rates(&kappa, 1.0, 1.0).unwrap();
        let want = [1.0, 1.0, 2.0, 2.0, 2.0, 1.0, 1.0, 1.0];
        for (got, want) in theta.as_array().iter().zip(want) {
            assert!((got - want).abs() < 1e-15);
        }
    }

    #[test]
    fn effective_params_rejects_nonpositive() {
        let mut kappa = RateConstants::benchmark();
        kappa.k5 = 0.0;
        assert!(EffectiveParams::from_rates(&kappa, 5.0, 5.0).is_err());
        let kappa = RateConstants::benchmark();
        assert!(EffectiveParams::from_rates(&kappa, 0.0, 5.0).is_err());
        assert!(EffectiveParams::from_rates(&kappa, 5.0, -1.0).is_err());
    }

    #[test]
    fn scale_state_uses_abundance_exponents() {
        let regime = ScalingRegime::new(100).unwrap();
        let mut x = State::zero();
        x.set(Species::A4, 40_000);
        x.set(Species::E1, 3);
        x.set(Species::A1, 250);
        let z = regime.scale_state(&x);
        assert!((z[Species::A4.index()] - 4.0).abs() < 1e-12);
        assert!((z[Species::E1.index()] - 3.0).abs() < 1e-12);
        assert!((z[Species::A1.index()] - 2.5).abs() < 1e-12);
    }

    #[test]
    fn conservation_totals_sum_enzyme_families() {
        let mut x = State::zero();
        assert_eq!(conservation_totals(&x), (0, 0));
        x.set(Species::E1, 2);
        x.set(Species::E1A1, 1);
        x.set(Species::E1Star, 1);
        x.set(Species::E1StarA1, 1);
        x.set(Species::E2, 3);
        x.set(Species::E2A2, 4);
        assert_eq!(conservation_totals(&x), (5, 7));
    }

    #[test]
    fn conservation_totals_unchanged_by_r7() {
        let n = net();
        let mut x = State::zero();
        x.set(Species::E1, 2);
        x.set(Species::A3, 1);
        x.set(Species::E1A1, 1);
        let before = conservation_totals(&x);
        x.apply(&n.net[Reaction::R7.index()]);
        assert_eq!(conservation_totals(&x), before);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn arb_state() -> impl Strategy<Value = State> {
            proptest::array::uniform10(0u64..50).prop_map(State)
        }

        proptest! {
            // Counts stay nonnegative exactly because propensities vanish
            // when a reactant is missing.
            #[test]
            fn positive_propensity_implies_applicable(x in arb_state()) {
                let n = Network::new();
                let rates = RateConstants::benchmark();
                for k in Reaction::ALL {
                    if n.propensity(&x, k, &rates) > 0.0 {
                        for (i, d) in n.net[k.index()].iter().enumerate() {
                            let c = x.0[i] as i64 + *d as i64;
                            prop_assert!(c >= 0, "reaction {} makes species {} negative", k.name(), i);
                        }
                    }
                }
            }

            #[test]
            fn conservation_totals_invariant_under_all_reactions(x in arb_state()) {
                let n = Network::new();
                // Lift the state so every reaction is applicable.
                let mut x = x;
                for s in Species::ALL {
                    x.set(s, x.get(s) + 2);
                }
                let before = conservation_totals(&x);
                for k in Reaction::ALL {
                    let mut y = x;
                    y.apply(&n.net[k.index()]);
                    prop_assert_eq!(conservation_totals(&y), before);
                }
            }

            #[test]
            fn propensity_linear_in_rate_constant(x in arb_state(), c in 0.1f64..10.0) {
                let n = Network::new();
                let rates = RateConstants::benchmark();
                for k in Reaction::ALL {
                    let mut scaled = rates;
                    let mut a = scaled.as_array();
                    a[k.rate() as usize] *= c;
                    scaled = RateConstants::from_array(a);
                    let lhs = n.propensity(&x, k, &scaled);
                    let rhs = c * n.propensity(&x, k, &rates);
                    prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1.0));
                }
            }

            #[test]
            fn effective_params_depend_on_activation_ratios_only(c in 0.1f64..10.0) {
                let kappa = RateConstants::benchmark();
                let theta = EffectiveParams::from_rates(&kappa, 5.0, 5.0).unwrap();
                let mut scaled = kappa;
                scaled.k7 *= c;
                scaled.km7 *= c;
                let theta7 = EffectiveParams::from_rates(&scaled, 5.0, 5.0).unwrap();
                let mut scaled8 = kappa;
                scaled8.k8 *= c;
                scaled8.km8 *= c;
                let theta8 = EffectiveParams::from_rates(&scaled8, 5.0, 5.0).unwrap();
                for ((a, b), d) in theta
                    .as_array()
                    .iter()
                    .zip(theta7.as_array())
                    .zip(theta8.as_array())
                {
                    prop_assert!((a - b).abs() <= 1e-12 * a.abs());
                    prop_assert!((a - d).abs() <= 1e-12 * a.abs());
                }
            }
        }
    }
}
