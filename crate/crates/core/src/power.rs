//! Controller measurement, conditioned and non-conditioned fidelities, and
//! the witness-based bounds on the controller's power.
//!
//! The controller measures in the basis B_k = V|k⟩⟨k|V† with
//! V = tI + i(y₁σ_x + y₂σ_y + y₃σ_z). The power for outcome k is
//! f_C(ρ_AB^(k)) − f_NC(ρ_AB), both fidelities taken by the trace-norm
//! route. The partial tangle is then τ = 3f_C − 2.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::chsh::{m_value, paulis, PlaneLabel};
use crate::error::{check_range, Error, Result};
use crate::linalg::{c, kron_all, ComplexMatrix, ComplexVector};
use crate::states::{BellLabel, DensityMatrix};
use crate::teleport::{fidelity_from_trace_norm, singlet_fraction, CLASSICAL_FIDELITY};
use crate::witness::{witness_expectation, AffineExpectation, WitnessSpec};

/// Norm tolerance on t² + |y|².
pub const DIRECTION_TOL: f64 = 1e-10;
/// Outcomes less likely than this have no post-measurement state.
pub const DEGENERATE_PROBABILITY: f64 = 1e-12;
/// Power can never exceed this.
pub const POWER_CEILING: f64 = 0.5;

/// Printed GHZ direction (t, y₁, y₂, y₃); its norm is 1.00115.
pub const GHZ_PRINTED: [f64; 4] = [-0.74, -0.25, -0.49, 0.39];
/// Printed direction for the amplitude-damped W state.
pub const AD_PRINTED: [f64; 4] = [
    0.9615239544277027,
    -0.00000006450287021375004,
    -0.000000029154369318260298,
    0.2747211110648374,
];
/// Printed direction for the phase-damped W state.
pub const PD_PRINTED: [f64; 4] = [
    0.9615239543413954,
    0.000002698965323056848,
    -0.000000004258892841348826,
    0.2747211523762679,
];

/// Unit 4-vector (t, y₁, y₂, y₃) fixing the controller's measurement basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementDirection {
    pub t: f64,
    pub y: [f64; 3],
}

impl MeasurementDirection {
    pub fn new(t: f64, y: [f64; 3]) -> Result<Self> {
        let d = Self { t, y };
        let n2 = d.norm_sqr();
        if !n2.is_finite() || (n2 - 1.0).abs() > DIRECTION_TOL {
            return Err(Error::Unnormalized(n2));
        }
        Ok(d)
    }

    /// Scales (t, y) to unit norm. Returns the direction and |norm − 1|.
    pub fn renormalized(t: f64, y: [f64; 3]) -> Result<(Self, f64)> {
        let n = (t * t + y.iter().map(|v| v * v).sum::<f64>()).sqrt();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::Unnormalized(n * n));
        }
        let deviation = (n - 1.0).abs();
        if deviation > DIRECTION_TOL {
            log::info!("renormalized measurement direction (norm {n})");
        }
        let d = Self {
            t: t / n,
            y: [y[0] / n, y[1] / n, y[2] / n],
        };
        Ok((d, deviation))
    }

    pub fn from_components(v: [f64; 4]) -> Result<Self> {
        Self::new(v[0], [v[1], v[2], v[3]])
    }

    /// V = I: measurement in the computational basis.
    pub fn computational() -> Self {
        Self {
            t: 1.0,
            y: [0.0; 3],
        }
    }

    /// t = cos χ, y = sin χ·(sin θ cos φ, sin θ sin φ, cos θ).
    pub fn from_angles(chi: f64, theta: f64, phi: f64) -> Self {
        let (sc, cc) = chi.sin_cos();
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        Self {
            t: cc,
            y: [sc * st * cp, sc * st * sp, sc * ct],
        }
    }

    pub fn ghz_printed() -> Self {
        Self::renormalized_components(GHZ_PRINTED)
    }

    pub fn amplitude_damping_printed() -> Self {
        Self::renormalized_components(AD_PRINTED)
    }

    pub fn phase_damping_printed() -> Self {
        Self::renormalized_components(PD_PRINTED)
    }

    fn renormalized_components(v: [f64; 4]) -> Self {
        Self::renormalized(v[0], [v[1], v[2], v[3]])
            .expect("nonzero constant")
            .0
    }

    pub fn components(&self) -> [f64; 4] {
        [self.t, self.y[0], self.y[1], self.y[2]]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.t * self.t + self.y.iter().map(|v| v * v).sum::<f64>()
    }

    /// V = tI + i y·σ.
    pub fn unitary(&self) -> ComplexMatrix {
        let [x, y, z] = paulis();
        let rot = &(&x.scale_real(self.y[0]) + &y.scale_real(self.y[1])) + &z.scale_real(self.y[2]);
        &ComplexMatrix::identity(2).scale_real(self.t) + &rot.scale(c(0.0, 1.0))
    }
}

impl fmt::Display for MeasurementDirection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{},{}", self.t, self.y[0], self.y[1], self.y[2])
    }
}

/// `t,y1,y2,y3`, renormalized to unit length.
impl FromStr for MeasurementDirection {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 4 {
            return Err(Error::Parse {
                token: s.to_string(),
                reason: "expected four comma-separated reals t,y1,y2,y3".into(),
            });
        }
        let mut v = [0.0; 4];
        for (slot, raw) in v.iter_mut().zip(&parts) {
            *slot = raw.parse().map_err(|_| Error::Parse {
                token: raw.to_string(),
                reason: "not a number".into(),
            })?;
        }
        Ok(Self::renormalized(v[0], [v[1], v[2], v[3]])?.0)
    }
}

fn check_outcome(outcome: usize) -> Result<()> {
    if outcome > 1 {
        return Err(Error::OutOfRange {
            name: "outcome",
            value: outcome as f64,
            range: "{0, 1}",
        });
    }
    Ok(())
}

/// Rank-one projector B_k = V|k⟩⟨k|V†.
pub fn measurement_operator(dir: &MeasurementDirection, outcome: usize) -> Result<ComplexMatrix> {
    check_outcome(outcome)?;
    let dir = MeasurementDirection::new(dir.t, dir.y)?;
    let k = ComplexMatrix::projector(&ComplexVector::basis(2, outcome));
    Ok(dir.unitary().conjugate(&k))
}

/// Outcome probability and the normalized two-qubit state left behind.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CollapseResult {
    pub outcome: usize,
    pub probability: f64,
    pub post_state: DensityMatrix,
}

/// Measures the controller qubit at `controller_slot` and traces it out.
pub fn collapse(
    rho3: &DensityMatrix,
    controller_slot: usize,
    dir: &MeasurementDirection,
    outcome: usize,
) -> Result<CollapseResult> {
    rho3.require_qubits(3)?;
    if controller_slot > 2 {
        return Err(Error::OutOfRange {
            name: "controller_slot",
            value: controller_slot as f64,
            range: "{0, 1, 2}",
        });
    }
    let b = measurement_operator(dir, outcome)?;
    let id = ComplexMatrix::identity(2);
    let mut factors = [&id, &id, &id];
    factors[controller_slot] = &b;
    let projected = kron_all(&factors).conjugate(rho3.matrix());
    let probability = projected.trace().re;
    if probability < DEGENERATE_PROBABILITY {
        return Err(Error::DegenerateOutcome {
            outcome,
            probability,
        });
    }
    let normalized = DensityMatrix::new(projected.scale_real(1.0 / probability))?;
    Ok(CollapseResult {
        outcome,
        probability,
        post_state: normalized.trace_out(controller_slot)?,
    })
}

/// Trace-norm fidelity of the sender/receiver marginal.
pub fn non_conditioned_fidelity(rho3: &DensityMatrix, controller_slot: usize) -> Result<f64> {
    rho3.require_qubits(3)?;
    fidelity_from_trace_norm(&rho3.trace_out(controller_slot)?)
}

/// Trace-norm fidelity of the post-measurement state.
pub fn conditioned_fidelity(collapse: &CollapseResult) -> Result<f64> {
    fidelity_from_trace_norm(&collapse.post_state)
}

/// (4a/3)(1 − √M) − (2/3)Tr[Wρ] with both quantities given.
pub fn power_lower_bound_from_parts(expectation: f64, a: f64, m: f64) -> f64 {
    4.0 * a / 3.0 * (1.0 - m.sqrt()) - 2.0 / 3.0 * expectation
}

/// Witness-based lower bound on the power for a collapsed state the
/// witness detects.
pub fn power_lower_bound(collapse: &CollapseResult, witness: &WitnessSpec) -> Result<f64> {
    let w = witness_expectation(witness, &collapse.post_state)?;
    if w >= 0.0 {
        return Err(Error::NotDetected(w));
    }
    let m = m_value(&collapse.post_state)?;
    Ok(power_lower_bound_from_parts(w, witness.a, m))
}

/// Reasons a report falls outside the regime its bounds assume.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flag {
    /// f_C ≤ 2/3.
    ConditionedNotAboveClassical,
    /// f_NC > 2/3.
    NonConditionedAboveClassical,
    /// Tr[Wρ^(k)] ≥ 0, so no lower bound.
    WitnessNotDetecting,
    /// No a on the scan grid puts Tr[W^NC ρ_AB] in [0, 1/4].
    NonConditionedRestrictionUnmet,
    /// Noise parameter outside the window where the printed formulas apply.
    OutsideNoiseWindow,
}

impl Flag {
    pub fn as_str(self) -> &'static str {
        match self {
            Flag::ConditionedNotAboveClassical => "conditioned_not_above_classical",
            Flag::NonConditionedAboveClassical => "non_conditioned_above_classical",
            Flag::WitnessNotDetecting => "witness_not_detecting",
            Flag::NonConditionedRestrictionUnmet => "non_conditioned_restriction_unmet",
            Flag::OutsideNoiseWindow => "outside_noise_window",
        }
    }
}

impl fmt::Display for Flag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Witness on the marginal, with a picked from the scan grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NonConditionedWitness {
    pub spec: WitnessSpec,
    pub expectation: f64,
}

/// Step and length of the a-grid scanned for the marginal's witness.
pub const NC_SCAN_STEP: f64 = 0.01;
pub const NC_SCAN_STEPS: usize = 1000;

/// Smallest a = 0.01·j with 0 ≤ Tr[W^NC ρ_AB] ≤ 1/4.
pub fn non_conditioned_witness(
    marginal: &DensityMatrix,
    bell: BellLabel,
    plane: PlaneLabel,
) -> Result<Option<NonConditionedWitness>> {
    let line = AffineExpectation::new(marginal, bell, plane)?;
    for j in 1..=NC_SCAN_STEPS {
        let a = NC_SCAN_STEP * j as f64;
        let w = line.at(a);
        if (0.0..=0.25).contains(&w) {
            let spec = WitnessSpec::new(bell, plane, a)?;
            return Ok(Some(NonConditionedWitness {
                spec,
                expectation: witness_expectation(&spec, marginal)?,
            }));
        }
    }
    Ok(None)
}

/// Probability and fidelity for one controller outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OutcomeSummary {
    pub outcome: usize,
    pub probability: f64,
    pub f_c: f64,
    pub power: f64,
}

/// Everything known about one controller outcome.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerReport {
    pub outcome: usize,
    pub probability: f64,
    pub f_nc: f64,
    pub f_c: f64,
    /// f_c − f_nc.
    pub power: f64,
    /// 1/6 + (2τ − ‖T_AB‖₁)/6, equal to `power` up to rounding.
    pub power_reformulated: f64,
    /// Witness lower bound; absent when the witness misses ρ^(k).
    pub power_lower: Option<f64>,
    pub power_upper: f64,
    /// 3 f_c − 2.
    pub tau: f64,
    /// 4a(1 − √M) − 2Tr[Wρ^(k)].
    pub tau_lower: f64,
    pub norm_t_marginal: f64,
    pub m_collapsed: f64,
    pub m_marginal: f64,
    pub singlet_fraction_collapsed: f64,
    pub singlet_fraction_marginal: f64,
    pub witness: WitnessSpec,
    pub witness_expectation: f64,
    pub detected: bool,
    pub nc_witness: Option<NonConditionedWitness>,
    /// 1 − 4Tr[W^NC ρ_AB], lower estimate of ‖T_AB‖₁.
    pub norm_t_lower: Option<f64>,
    /// 1/3 + (2/3)Tr[W^NC ρ_AB].
    pub power_upper_from_nc: Option<f64>,
    /// Both outcomes, degenerate ones omitted.
    pub per_outcome: Vec<OutcomeSummary>,
    pub flags: Vec<Flag>,
}

impl PowerReport {
    pub fn has_flag(&self, flag: Flag) -> bool {
        self.flags.contains(&flag)
    }
}

/// Full report for one measurement direction and outcome.
pub fn controller_power(
    rho3: &DensityMatrix,
    controller_slot: usize,
    dir: &MeasurementDirection,
    outcome: usize,
    witness: &WitnessSpec,
) -> Result<PowerReport> {
    let marginal = rho3.trace_out(controller_slot)?;
    let f_nc = fidelity_from_trace_norm(&marginal)?;
    let norm_t_marginal = 6.0 * f_nc - 3.0;
    let col = collapse(rho3, controller_slot, dir, outcome)?;
    let f_c = conditioned_fidelity(&col)?;
    let tau = 3.0 * f_c - 2.0;

    let mut per_outcome = Vec::with_capacity(2);
    for k in 0..2 {
        match collapse(rho3, controller_slot, dir, k) {
            Ok(other) => {
                let fc = conditioned_fidelity(&other)?;
                per_outcome.push(OutcomeSummary {
                    outcome: k,
                    probability: other.probability,
                    f_c: fc,
                    power: fc - f_nc,
                });
            }
            Err(Error::DegenerateOutcome { .. }) => {}
            Err(e) => return Err(e),
        }
    }

    let w = witness_expectation(witness, &col.post_state)?;
    let m_collapsed = m_value(&col.post_state)?;
    let detected = w < 0.0;
    let nc = non_conditioned_witness(&marginal, witness.bell, witness.plane)?;

    let mut flags = Vec::new();
    if f_c <= CLASSICAL_FIDELITY {
        flags.push(Flag::ConditionedNotAboveClassical);
    }
    if f_nc > CLASSICAL_FIDELITY {
        flags.push(Flag::NonConditionedAboveClassical);
    }
    if !detected {
        flags.push(Flag::WitnessNotDetecting);
    }
    if nc.is_none() {
        flags.push(Flag::NonConditionedRestrictionUnmet);
    }

    Ok(PowerReport {
        outcome,
        probability: col.probability,
        f_nc,
        f_c,
        power: f_c - f_nc,
        power_reformulated: (1.0 + 2.0 * tau - norm_t_marginal) / 6.0,
        power_lower: detected.then(|| power_lower_bound_from_parts(w, witness.a, m_collapsed)),
        power_upper: POWER_CEILING,
        tau,
        tau_lower: 4.0 * witness.a * (1.0 - m_collapsed.sqrt()) - 2.0 * w,
        norm_t_marginal,
        m_collapsed,
        m_marginal: m_value(&marginal)?,
        singlet_fraction_collapsed: singlet_fraction(&col.post_state)?,
        singlet_fraction_marginal: singlet_fraction(&marginal)?,
        witness: *witness,
        witness_expectation: w,
        detected,
        norm_t_lower: nc.map(|n| 1.0 - 4.0 * n.expectation),
        power_upper_from_nc: nc.map(|n| 1.0 / 3.0 + 2.0 / 3.0 * n.expectation),
        nc_witness: nc,
        per_outcome,
        flags,
    })
}

/// Interval estimate of the CHSH-game winning probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbabilityInterval {
    pub lower: f64,
    pub upper: f64,
    pub upper_open: bool,
}

impl ProbabilityInterval {
    pub fn contains(&self, p: f64) -> bool {
        p >= self.lower
            && if self.upper_open {
                p < self.upper
            } else {
                p <= self.upper
            }
    }
}

/// Slack on F = 1/2 so product states land in the F ≤ 1/2 branch.
pub const SINGLET_BRANCH_TOL: f64 = 1e-12;

/// Estimate from the witness: [3/4 − Tr[Wρ]/(8a), 1] when F ≤ 1/2,
/// otherwise [0, 3/4 − Tr[Wρ]/(8a)).
pub fn chsh_game_estimate(
    rho: &DensityMatrix,
    witness: &WitnessSpec,
) -> Result<ProbabilityInterval> {
    let pivot = 0.75 - witness_expectation(witness, rho)? / (8.0 * witness.a);
    let f = singlet_fraction(rho)?;
    Ok(if f <= 0.5 + SINGLET_BRANCH_TOL {
        ProbabilityInterval {
            lower: pivot,
            upper: 1.0,
            upper_open: false,
        }
    } else {
        ProbabilityInterval {
            lower: 0.0,
            upper: pivot,
            upper_open: true,
        }
    })
}

/// (2/3)(1 − Tr[W^NC ρ_AB]): lower estimate of f_NC under the restriction.
pub fn non_conditioned_fidelity_floor(expectation: f64) -> Result<f64> {
    check_range("Tr[W rho]", expectation, 0.0, 0.25, "[0, 1/4]")?;
    Ok(2.0 / 3.0 * (1.0 - expectation))
}
