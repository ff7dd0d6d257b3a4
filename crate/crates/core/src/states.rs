//! Density matrices and the catalog of two- and three-qubit states.
//!
//! Basis ordering is big-endian: `|abc⟩` has index `4a + 2b + c`. Three-qubit
//! constructors carry a [`QubitRoles`] map so that tracing out or measuring
//! the controller always hits the right tensor slot, whatever order the
//! state was written in.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{check_range, Error, Result};
use crate::linalg::{
    hermitian_eigenvalues, partial_trace, partial_transpose, re, ComplexMatrix, ComplexVector,
};

pub const TRACE_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = 1e-9;

/// Largest θ accepted by [`rho_theta`].
pub const RHO_THETA_MAX: f64 = 0.4175 * PI;

/// Hermitian, unit-trace, positive semidefinite matrix on 1 to 3 qubits.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityMatrix {
    mat: ComplexMatrix,
    qubits: usize,
}

impl DensityMatrix {
    /// Validates `mat` as a density matrix. Hermitian deviations up to
    /// 1e-10 are folded back with (m + m†)/2.
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        let qubits = match mat.dim() {
            2 => 1,
            4 => 2,
            8 => 3,
            d => return Err(Error::InvalidDimension(d)),
        };
        let values = hermitian_eigenvalues(&mat)?;
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidTrace(tr.re));
        }
        let min = values.last().copied().unwrap_or(0.0);
        if min < -PSD_TOL {
            return Err(Error::NotPositive(min));
        }
        Ok(Self {
            mat: mat.hermitian_part(),
            qubits,
        })
    }

    /// Normalizes a nonzero positive operator by its trace before validating.
    pub fn from_unnormalized(mat: ComplexMatrix) -> Result<Self> {
        let tr = mat.trace().re;
        if !(tr.is_finite() && tr > 0.0) {
            return Err(Error::InvalidTrace(tr));
        }
        Self::new(mat.scale_real(1.0 / tr))
    }

    pub fn from_pure(psi: &ComplexVector) -> Result<Self> {
        let n = psi.norm();
        if (n - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidTrace(n * n));
        }
        Self::new(ComplexMatrix::projector(psi))
    }

    pub fn maximally_mixed(qubits: usize) -> Self {
        let dim = 1 << qubits;
        Self {
            mat: ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64),
            qubits,
        }
    }

    #[inline]
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    #[inline]
    pub fn qubits(&self) -> usize {
        self.qubits
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    /// Re Tr[O ρ].
    pub fn expectation(&self, op: &ComplexMatrix) -> f64 {
        op.trace_product(&self.mat).re
    }

    /// ⟨ψ|ρ|ψ⟩.
    pub fn overlap(&self, psi: &ComplexVector) -> f64 {
        psi.inner(&self.mat.apply(psi)).re
    }

    /// w·self + (1 − w)·other.
    pub fn mix(&self, other: &Self, w: f64) -> Result<Self> {
        check_range("weight", w, 0.0, 1.0, "[0, 1]")?;
        if self.qubits != other.qubits {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Self::new(&self.mat.scale_real(w) + &other.mat.scale_real(1.0 - w))
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.mat).expect("density matrix is Hermitian")
    }

    /// Traces out qubit `slot`.
    pub fn trace_out(&self, slot: usize) -> Result<Self> {
        if self.qubits < 2 {
            return Err(Error::InvalidDimension(self.dim()));
        }
        let dims = vec![2; self.qubits];
        Self::new(partial_trace(&self.mat, &dims, slot)?)
    }

    /// Smallest eigenvalue of the partial transpose on qubit 0. Negative
    /// values certify entanglement of a two-qubit state.
    pub fn min_partial_transpose_eigenvalue(&self) -> Result<f64> {
        if self.qubits != 2 {
            return Err(Error::DimensionMismatch {
                expected: 4,
                found: self.dim(),
            });
        }
        let pt = partial_transpose(&self.mat, &[2, 2], 0)?;
        Ok(*hermitian_eigenvalues(&pt)?.last().unwrap())
    }

    pub(crate) fn require_qubits(&self, n: usize) -> Result<()> {
        if self.qubits == n {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: 1 << n,
                found: self.dim(),
            })
        }
    }
}

/// The four Bell states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BellLabel {
    #[serde(rename = "phi+")]
    PhiPlus,
    #[serde(rename = "phi-")]
    PhiMinus,
    #[serde(rename = "psi+")]
    PsiPlus,
    #[serde(rename = "psi-")]
    PsiMinus,
}

impl BellLabel {
    pub const ALL: [BellLabel; 4] = [
        BellLabel::PhiPlus,
        BellLabel::PhiMinus,
        BellLabel::PsiPlus,
        BellLabel::PsiMinus,
    ];

    pub fn vector(self) -> ComplexVector {
        let s = FRAC_1_SQRT_2;
        let amps = match self {
            BellLabel::PhiPlus => [s, 0.0, 0.0, s],
            BellLabel::PhiMinus => [s, 0.0, 0.0, -s],
            BellLabel::PsiPlus => [0.0, s, s, 0.0],
            BellLabel::PsiMinus => [0.0, s, -s, 0.0],
        };
        ComplexVector::from_real(&amps)
    }

    pub fn projector(self) -> ComplexMatrix {
        ComplexMatrix::projector(&self.vector())
    }

    /// Bell state with the largest overlap ⟨A|ρ|A⟩ (first in `ALL` on ties).
    pub fn best_for(rho: &DensityMatrix) -> BellLabel {
        let mut best = BellLabel::PhiPlus;
        let mut best_val = f64::NEG_INFINITY;
        for label in Self::ALL {
            let v = rho.overlap(&label.vector());
            if v > best_val + 1e-12 {
                best = label;
                best_val = v;
            }
        }
        best
    }
}

impl fmt::Display for BellLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BellLabel::PhiPlus => "phi+",
            BellLabel::PhiMinus => "phi-",
            BellLabel::PsiPlus => "psi+",
            BellLabel::PsiMinus => "psi-",
        })
    }
}

impl FromStr for BellLabel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "phi+" => Ok(BellLabel::PhiPlus),
            "phi-" => Ok(BellLabel::PhiMinus),
            "psi+" => Ok(BellLabel::PsiPlus),
            "psi-" => Ok(BellLabel::PsiMinus),
            other => Err(Error::Parse {
                token: other.to_string(),
                reason: "expected one of phi+, phi-, psi+, psi-".into(),
            }),
        }
    }
}

pub fn bell_state(label: BellLabel) -> ComplexVector {
    label.vector()
}

/// Which tensor slot holds which party.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QubitRoles {
    pub alice: usize,
    pub bob: usize,
    pub charlie: usize,
}

impl QubitRoles {
    /// Slots written as A, B, C.
    pub const ABC: QubitRoles = QubitRoles {
        alice: 0,
        bob: 1,
        charlie: 2,
    };
    /// Slots written as C, A, B.
    pub const CAB: QubitRoles = QubitRoles {
        alice: 1,
        bob: 2,
        charlie: 0,
    };
    /// Slots written as B, A, C.
    pub const BAC: QubitRoles = QubitRoles {
        alice: 1,
        bob: 0,
        charlie: 2,
    };
}

/// Three-qubit pure state plus its party layout.
#[derive(Debug, Clone, PartialEq)]
pub struct ThreeQubitKet {
    pub ket: ComplexVector,
    pub roles: QubitRoles,
}

impl ThreeQubitKet {
    pub fn density(&self) -> ThreeQubitState {
        ThreeQubitState {
            rho: DensityMatrix::from_pure(&self.ket).expect("catalog kets are normalized"),
            roles: self.roles,
        }
    }
}

/// Three-qubit density matrix plus its party layout.
#[derive(Debug, Clone, PartialEq)]
pub struct ThreeQubitState {
    pub rho: DensityMatrix,
    pub roles: QubitRoles,
}

impl ThreeQubitState {
    pub fn new(rho: DensityMatrix, roles: QubitRoles) -> Result<Self> {
        rho.require_qubits(3)?;
        Ok(Self { rho, roles })
    }

    /// Two-qubit Alice/Bob marginal with the controller traced out. The
    /// remaining qubits keep their relative order.
    pub fn sender_receiver_marginal(&self) -> Result<DensityMatrix> {
        self.rho.trace_out(self.roles.charlie)
    }
}

fn ket3(amps: [(usize, f64); 3]) -> ComplexVector {
    let mut v = [0.0; 8];
    for (i, a) in amps {
        v[i] += a;
    }
    ComplexVector::from_real(&v)
}

/// λ0|000⟩ + λ4|111⟩ with λ0 = √(1 − λ4²), slots ordered C, A, B.
pub fn ghz(lambda4: f64) -> Result<ThreeQubitKet> {
    check_range("lambda4", lambda4, 0.0, 1.0, "[0, 1]")?;
    let lambda0 = (1.0 - lambda4 * lambda4).max(0.0).sqrt();
    Ok(ThreeQubitKet {
        ket: ket3([(0b000, lambda0), (0b111, lambda4), (0, 0.0)]),
        roles: QubitRoles::CAB,
    })
}

/// Maximal slice state λ0|000⟩ + λ1|100⟩ + |111⟩/√2, slots ordered A, B, C.
/// Unit norm forces λ0² + λ1² = 1/2.
pub fn maximal_slice(lambda0: f64, lambda1: f64) -> Result<ThreeQubitKet> {
    let norm = lambda0 * lambda0 + lambda1 * lambda1;
    if !norm.is_finite() || (norm - 0.5).abs() > 1e-10 {
        return Err(Error::Precondition(format!(
            "maximal slice needs lambda0² + lambda1² = 1/2, got {norm}"
        )));
    }
    Ok(ThreeQubitKet {
        ket: ket3([(0b000, lambda0), (0b100, lambda1), (0b111, FRAC_1_SQRT_2)]),
        roles: QubitRoles::ABC,
    })
}

/// Maximal slice state parametrized by λ1 ∈ [0, 1/√2], with λ0 ≥ 0.
pub fn maximal_slice_from_lambda1(lambda1: f64) -> Result<ThreeQubitKet> {
    check_range("lambda1", lambda1, 0.0, FRAC_1_SQRT_2, "[0, 1/√2]")?;
    let lambda0 = (0.5 - lambda1 * lambda1).max(0.0).sqrt();
    maximal_slice(lambda0, lambda1)
}

/// (|100⟩ + √n|010⟩ + √(n+1)|001⟩)/√(2+2n), slots ordered A, B, C.
pub fn w_n(n: u32) -> Result<ThreeQubitKet> {
    if n < 1 {
        return Err(Error::OutOfRange {
            name: "n",
            value: n as f64,
            range: "n ≥ 1",
        });
    }
    let n = n as f64;
    let s = 1.0 / (2.0 + 2.0 * n).sqrt();
    Ok(ThreeQubitKet {
        ket: ket3([
            (0b100, s),
            (0b010, s * n.sqrt()),
            (0b001, s * (n + 1.0).sqrt()),
        ]),
        roles: QubitRoles::ABC,
    })
}

/// (|000⟩ + |101⟩ + |110⟩)/√3, slots ordered B, A, C.
pub fn w_standard() -> ThreeQubitKet {
    let s = 1.0 / 3f64.sqrt();
    ThreeQubitKet {
        ket: ket3([(0b000, s), (0b101, s), (0b110, s)]),
        roles: QubitRoles::BAC,
    }
}

/// Isotropic (Werner-like) state p|φ+⟩⟨φ+| + (1 − p)I/4.
pub fn isotropic(p: f64) -> Result<DensityMatrix> {
    check_range("p", p, 0.0, 1.0, "[0, 1]")?;
    let mat = &BellLabel::PhiPlus.projector().scale_real(p)
        + &ComplexMatrix::identity(4).scale_real((1.0 - p) / 4.0);
    DensityMatrix::new(mat)
}

/// F|φ+⟩⟨φ+| + (1 − F)|01⟩⟨01|. Entangled with singlet fraction F on
/// (1/3, 1/2]; other F in (0, 1] are accepted with a warning.
pub fn rho_f(f: f64) -> Result<DensityMatrix> {
    if !(f.is_finite() && f > 0.0 && f <= 1.0) {
        return Err(Error::OutOfRange {
            name: "F",
            value: f,
            range: "(0, 1]",
        });
    }
    if f <= 1.0 / 3.0 || f > 0.5 {
        log::warn!("rho_F with F = {f} is outside (1/3, 1/2]");
    }
    let mat = &BellLabel::PhiPlus.projector().scale_real(f)
        + &ComplexMatrix::projector(&ComplexVector::basis(4, 0b01)).scale_real(1.0 - f);
    DensityMatrix::new(mat)
}

/// X-shaped state with entries a(θ)…e(θ), halved, for 0 ≤ θ ≤ 0.4175π.
pub fn rho_theta(theta: f64) -> Result<DensityMatrix> {
    check_range("theta", theta, 0.0, RHO_THETA_MAX, "[0, 0.4175π]")?;
    let (s2, c2) = (theta.sin().powi(2), theta.cos().powi(2));
    let a = (3.0 - 2.0 * SQRT_2) * s2;
    let b = (3.0 - 2.0 * SQRT_2) * c2;
    let c = (1.0 - SQRT_2) * theta.cos();
    let d = 1.0 + (2.0 * SQRT_2 - 2.0) * s2;
    let e = (2.0 * SQRT_2 - 2.0) * c2;
    let mat = ComplexMatrix::from_real_rows(&[
        &[a, 0.0, 0.0, 0.0],
        &[0.0, b, c, 0.0],
        &[0.0, c, d, 0.0],
        &[0.0, 0.0, 0.0, e],
    ])?
    .scale_real(0.5);
    DensityMatrix::new(mat)
}

/// Catalog entry named by the `name[:key=value,...]` mini-grammar.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum StateSpec {
    Bell {
        label: BellLabel,
    },
    Ghz {
        lambda4: f64,
    },
    Mss {
        lambda0: f64,
        lambda1: f64,
    },
    Wn {
        n: u32,
    },
    WStandard,
    Isotropic {
        p: f64,
    },
    #[serde(rename = "rhoF")]
    RhoF {
        f: f64,
    },
    #[serde(rename = "rhoTheta")]
    RhoTheta {
        theta: f64,
    },
}

/// A state built from a [`StateSpec`].
#[derive(Debug, Clone, PartialEq)]
pub enum PreparedState {
    TwoQubit(DensityMatrix),
    ThreeQubit(ThreeQubitState),
}

impl StateSpec {
    pub fn build(&self) -> Result<PreparedState> {
        Ok(match *self {
            StateSpec::Bell { label } => {
                PreparedState::TwoQubit(DensityMatrix::from_pure(&label.vector())?)
            }
            StateSpec::Ghz { lambda4 } => PreparedState::ThreeQubit(ghz(lambda4)?.density()),
            StateSpec::Mss { lambda0, lambda1 } => {
                PreparedState::ThreeQubit(maximal_slice(lambda0, lambda1)?.density())
            }
            StateSpec::Wn { n } => PreparedState::ThreeQubit(w_n(n)?.density()),
            StateSpec::WStandard => PreparedState::ThreeQubit(w_standard().density()),
            StateSpec::Isotropic { p } => PreparedState::TwoQubit(isotropic(p)?),
            StateSpec::RhoF { f } => PreparedState::TwoQubit(rho_f(f)?),
            StateSpec::RhoTheta { theta } => PreparedState::TwoQubit(rho_theta(theta)?),
        })
    }
}

impl fmt::Display for StateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateSpec::Bell { label } => write!(f, "bell:{label}"),
            StateSpec::Ghz { lambda4 } => write!(f, "ghz:lambda4={lambda4}"),
            StateSpec::Mss { lambda0, lambda1 } => {
                write!(f, "mss:lambda0={lambda0},lambda1={lambda1}")
            }
            StateSpec::Wn { n } => write!(f, "wn:n={n}"),
            StateSpec::WStandard => write!(f, "w"),
            StateSpec::Isotropic { p } => write!(f, "iso:p={p}"),
            StateSpec::RhoF { f: v } => write!(f, "rhoF:F={v}"),
            StateSpec::RhoTheta { theta } => write!(f, "rhoTheta:theta={theta}"),
        }
    }
}

/// `key=value` pairs after the first `:` of a spec string.
pub(crate) struct Params<'a> {
    context: &'a str,
    pairs: Vec<(&'a str, &'a str)>,
}

impl<'a> Params<'a> {
    pub(crate) fn parse(context: &'a str, body: Option<&'a str>) -> Result<Self> {
        let mut pairs = Vec::new();
        if let Some(body) = body {
            for item in body.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                let (k, v) = item.split_once('=').ok_or_else(|| Error::Parse {
                    token: item.to_string(),
                    reason: format!("expected key=value in `{context}`"),
                })?;
                pairs.push((k.trim(), v.trim()));
            }
        }
        Ok(Self { context, pairs })
    }

    /// Rejects any key not in `allowed`.
    pub(crate) fn only(&self, allowed: &[&str]) -> Result<()> {
        for (k, _) in &self.pairs {
            if !allowed.contains(k) {
                return Err(Error::Parse {
                    token: k.to_string(),
                    reason: format!(
                        "unknown parameter `{k}` for `{}` (expected {})",
                        self.context,
                        if allowed.is_empty() {
                            "none".to_string()
                        } else {
                            allowed.join(", ")
                        }
                    ),
                });
            }
        }
        Ok(())
    }

    pub(crate) fn real(&self, key: &str) -> Result<f64> {
        let raw = self
            .pairs
            .iter()
            .find(|(k, _)| *k == key)
            .map(|(_, v)| *v)
            .ok_or_else(|| Error::Parse {
                token: self.context.to_string(),
                reason: format!("missing parameter `{key}`"),
            })?;
        let v: f64 = raw.parse().map_err(|_| Error::Parse {
            token: raw.to_string(),
            reason: format!("`{key}` is not a number"),
        })?;
        if !v.is_finite() {
            return Err(Error::Parse {
                token: raw.to_string(),
                reason: format!("`{key}` must be finite"),
            });
        }
        Ok(v)
    }
}

impl FromStr for StateSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, body) = match s.split_once(':') {
            Some((n, b)) => (n.trim(), Some(b)),
            None => (s, None),
        };
        let params = Params::parse(s, body);
        match name {
            "bell" => {
                let label = body.ok_or_else(|| Error::Parse {
                    token: s.to_string(),
                    reason: "bell needs a label, e.g. bell:phi+".into(),
                })?;
                Ok(StateSpec::Bell {
                    label: label.parse()?,
                })
            }
            "ghz" => {
                let p = params?;
                p.only(&["lambda4"])?;
                Ok(StateSpec::Ghz {
                    lambda4: p.real("lambda4")?,
                })
            }
            "mss" => {
                let p = params?;
                p.only(&["lambda0", "lambda1"])?;
                Ok(StateSpec::Mss {
                    lambda0: p.real("lambda0")?,
                    lambda1: p.real("lambda1")?,
                })
            }
            "wn" => {
                let p = params?;
                p.only(&["n"])?;
                let n = p.real("n")?;
                if n < 1.0 || n.fract() != 0.0 || n > u32::MAX as f64 {
                    return Err(Error::Parse {
                        token: n.to_string(),
                        reason: "`n` must be a positive integer".into(),
                    });
                }
                Ok(StateSpec::Wn { n: n as u32 })
            }
            "w" => {
                params?.only(&[])?;
                Ok(StateSpec::WStandard)
            }
            "iso" => {
                let p = params?;
                p.only(&["p"])?;
                Ok(StateSpec::Isotropic { p: p.real("p")? })
            }
            "rhoF" => {
                let p = params?;
                p.only(&["F"])?;
                Ok(StateSpec::RhoF { f: p.real("F")? })
            }
            "rhoTheta" => {
                let p = params?;
                p.only(&["theta"])?;
                Ok(StateSpec::RhoTheta {
                    theta: p.real("theta")?,
                })
            }
            other => Err(Error::Parse {
                token: other.to_string(),
                reason: "unknown state (expected bell, ghz, mss, wn, w, iso, rhoF, rhoTheta)"
                    .into(),
            }),
        }
    }
}

/// |0⟩⟨0| on one qubit, handy for building product states.
pub fn ket0_projector() -> ComplexMatrix {
    ComplexMatrix::diag(&[1.0, 0.0])
}

/// |ψ⟩ built from real amplitudes, normalized.
pub fn real_ket(amps: &[f64]) -> ComplexVector {
    ComplexVector::new(amps.iter().map(|&a| re(a)).collect()).normalized()
}
