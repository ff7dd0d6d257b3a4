//! Amplitude- and phase-damping channels on one qubit, and the noisy
//! standard-W pipeline.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{check_range, Error, Result};
use crate::linalg::{kron_all, ComplexMatrix};
use crate::power::{controller_power, Flag, MeasurementDirection, PowerReport};
use crate::states::{w_standard, DensityMatrix, Params, ThreeQubitState};
use crate::witness::WitnessSpec;

/// p-range where the amplitude-damped state meets both teleportation
/// assumptions. The upper end is 2√2 − 2 to the printed precision.
pub const AD_FIDELITY_WINDOW: (f64, f64) = (0.75, 0.82842);
/// p-range and largest a for the amplitude-damped power bound.
pub const AD_BOUND_WINDOW: (f64, f64) = (0.75, 0.8164);
pub const AD_BOUND_A_MAX: f64 = 0.005;
/// p-range for the phase-damped power bound and witness detection.
pub const PD_WINDOW: (f64, f64) = (0.5, 0.859);
/// Largest a quoted for phase-damped detection.
pub const PD_DETECTION_A_MAX: f64 = 0.035;
/// Largest a quoted for the phase-damped power interval.
pub const PD_BOUND_A_MAX: f64 = 0.005;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelKind {
    AmplitudeDamping,
    PhaseDamping,
}

/// Damping channel with strength p ∈ [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub kind: ChannelKind,
    pub p: f64,
}

impl ChannelSpec {
    pub fn new(kind: ChannelKind, p: f64) -> Result<Self> {
        check_range("p", p, 0.0, 1.0, "[0, 1]")?;
        Ok(Self { kind, p })
    }

    pub fn amplitude_damping(p: f64) -> Result<Self> {
        Self::new(ChannelKind::AmplitudeDamping, p)
    }

    pub fn phase_damping(p: f64) -> Result<Self> {
        Self::new(ChannelKind::PhaseDamping, p)
    }

    /// Whether p lies where the printed fidelity formulas and the
    /// teleportation assumptions hold together.
    pub fn in_validity_window(&self) -> bool {
        let (lo, hi) = match self.kind {
            ChannelKind::AmplitudeDamping => AD_FIDELITY_WINDOW,
            ChannelKind::PhaseDamping => PD_WINDOW,
        };
        (lo..=hi).contains(&self.p)
    }
}

impl fmt::Display for ChannelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.kind {
            ChannelKind::AmplitudeDamping => "ad",
            ChannelKind::PhaseDamping => "pd",
        };
        write!(f, "{tag}:p={}", self.p)
    }
}

/// `ad:p=0.8` or `pd:p=0.6`.
impl FromStr for ChannelSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, body) = match s.split_once(':') {
            Some((n, b)) => (n.trim(), Some(b)),
            None => (s, None),
        };
        let kind = match name {
            "ad" => ChannelKind::AmplitudeDamping,
            "pd" => ChannelKind::PhaseDamping,
            other => {
                return Err(Error::Parse {
                    token: other.to_string(),
                    reason: "unknown channel (expected ad or pd)".into(),
                })
            }
        };
        let params = Params::parse(s, body)?;
        params.only(&["p"])?;
        let p = params.real("p")?;
        Self::new(kind, p).map_err(|e| Error::Parse {
            token: p.to_string(),
            reason: e.to_string(),
        })
    }
}

/// Single-qubit Kraus operators.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KrausSet {
    pub operators: Vec<ComplexMatrix>,
}

impl KrausSet {
    /// max |Σ K†K − I|.
    pub fn completeness_deviation(&self) -> f64 {
        let mut sum = ComplexMatrix::zeros(2);
        for k in &self.operators {
            sum = &sum + &(&k.adjoint() * k);
        }
        sum.max_abs_diff(&ComplexMatrix::identity(2))
    }
}

pub fn kraus_set(spec: &ChannelSpec) -> KrausSet {
    let p = spec.p;
    let q = (1.0 - p).sqrt();
    let operators = match spec.kind {
        ChannelKind::AmplitudeDamping => vec![
            ComplexMatrix::diag(&[1.0, q]),
            ComplexMatrix::from_real_rows(&[&[0.0, p.sqrt()], &[0.0, 0.0]]).unwrap(),
        ],
        ChannelKind::PhaseDamping => vec![
            ComplexMatrix::diag(&[q, q]),
            ComplexMatrix::diag(&[p.sqrt(), 0.0]),
            ComplexMatrix::diag(&[0.0, p.sqrt()]),
        ],
    };
    KrausSet { operators }
}

/// Σ_k (K_k on `target_qubit`) ρ (K_k on `target_qubit`)†.
pub fn apply_channel(
    rho: &DensityMatrix,
    spec: &ChannelSpec,
    target_qubit: usize,
) -> Result<DensityMatrix> {
    let n = rho.qubits();
    if target_qubit >= n {
        return Err(Error::OutOfRange {
            name: "target_qubit",
            value: target_qubit as f64,
            range: "a qubit index of the state",
        });
    }
    let id = ComplexMatrix::identity(2);
    let mut out = ComplexMatrix::zeros(rho.dim());
    for k in &kraus_set(spec).operators {
        let mut factors = vec![&id; n];
        factors[target_qubit] = k;
        out = &out + &kron_all(&factors).conjugate(rho.matrix());
    }
    DensityMatrix::new(out)
}

/// Standard W state with the channel applied to Bob's qubit.
pub fn noisy_w_state(spec: &ChannelSpec) -> Result<ThreeQubitState> {
    let w = w_standard().density();
    let rho = apply_channel(&w.rho, spec, w.roles.bob)?;
    ThreeQubitState::new(rho, w.roles)
}

/// Noisy W state followed by the controller's measurement. Reports outside
/// the channel's validity window carry [`Flag::OutsideNoiseWindow`].
pub fn noisy_w_pipeline(
    spec: &ChannelSpec,
    dir: &MeasurementDirection,
    outcome: usize,
    witness: &WitnessSpec,
) -> Result<PowerReport> {
    let state = noisy_w_state(spec)?;
    let mut report = controller_power(&state.rho, state.roles.charlie, dir, outcome, witness)?;
    if !spec.in_validity_window() {
        report.flags.push(Flag::OutsideNoiseWindow);
    }
    Ok(report)
}
