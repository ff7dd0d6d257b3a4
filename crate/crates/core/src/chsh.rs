//! Pauli algebra, correlation tensors and the plane Bell-CHSH operators.

use std::f64::consts::SQRT_2;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    c, hermitian_eigenvalues, kron, re, singular_values, trace_norm, ComplexMatrix,
};
use crate::states::DensityMatrix;

/// σ_x.
pub fn sigma_x() -> ComplexMatrix {
    ComplexMatrix::from_row_major(2, vec![re(0.0), re(1.0), re(1.0), re(0.0)]).unwrap()
}

/// σ_y = [[0, −i], [i, 0]].
pub fn sigma_y() -> ComplexMatrix {
    ComplexMatrix::from_row_major(2, vec![re(0.0), c(0.0, -1.0), c(0.0, 1.0), re(0.0)]).unwrap()
}

/// σ_z.
pub fn sigma_z() -> ComplexMatrix {
    ComplexMatrix::diag(&[1.0, -1.0])
}

/// σ_x, σ_y, σ_z in that order.
pub fn paulis() -> [ComplexMatrix; 3] {
    [sigma_x(), sigma_y(), sigma_z()]
}

/// Plane spanned by two distinct Pauli axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlaneLabel {
    Xy,
    Yz,
    Zx,
}

impl PlaneLabel {
    pub const ALL: [PlaneLabel; 3] = [PlaneLabel::Xy, PlaneLabel::Yz, PlaneLabel::Zx];

    /// Pauli indices (0 = x, 1 = y, 2 = z) of the two axes.
    pub fn axes(self) -> (usize, usize) {
        match self {
            PlaneLabel::Xy => (0, 1),
            PlaneLabel::Yz => (1, 2),
            PlaneLabel::Zx => (2, 0),
        }
    }
}

impl fmt::Display for PlaneLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PlaneLabel::Xy => "xy",
            PlaneLabel::Yz => "yz",
            PlaneLabel::Zx => "zx",
        })
    }
}

impl FromStr for PlaneLabel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "xy" | "yx" => Ok(PlaneLabel::Xy),
            "yz" | "zy" => Ok(PlaneLabel::Yz),
            "zx" | "xz" => Ok(PlaneLabel::Zx),
            other => Err(Error::Parse {
                token: other.to_string(),
                reason: "expected a plane: xy, yz or zx".into(),
            }),
        }
    }
}

/// Real 3×3 matrix t_ij = Tr[ρ σ_i⊗σ_j].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationTensor {
    pub t: [[f64; 3]; 3],
}

impl CorrelationTensor {
    pub fn as_matrix(&self) -> ComplexMatrix {
        let rows: Vec<&[f64]> = self.t.iter().map(|r| r.as_slice()).collect();
        ComplexMatrix::from_real_rows(&rows).expect("3x3 finite")
    }

    /// Tᵀ T.
    pub fn gram(&self) -> [[f64; 3]; 3] {
        let mut g = [[0.0; 3]; 3];
        for (i, gi) in g.iter_mut().enumerate() {
            for (j, gij) in gi.iter_mut().enumerate() {
                *gij = (0..3).map(|k| self.t[k][i] * self.t[k][j]).sum();
            }
        }
        g
    }

    /// Sum of singular values.
    pub fn trace_norm(&self) -> f64 {
        trace_norm(&self.as_matrix())
    }
}

pub fn correlation_tensor(rho: &DensityMatrix) -> Result<CorrelationTensor> {
    rho.require_qubits(2)?;
    let p = paulis();
    let mut t = [[0.0; 3]; 3];
    for (i, row) in t.iter_mut().enumerate() {
        for (j, tij) in row.iter_mut().enumerate() {
            *tij = rho.expectation(&kron(&p[i], &p[j]));
        }
    }
    Ok(CorrelationTensor { t })
}

/// Sum of the two largest eigenvalues of TᵀT. Values above 1 mean some
/// CHSH inequality is violated.
pub fn m_value(rho: &DensityMatrix) -> Result<f64> {
    let g = correlation_tensor(rho)?.gram();
    let rows: Vec<&[f64]> = g.iter().map(|r| r.as_slice()).collect();
    let u = hermitian_eigenvalues(&ComplexMatrix::from_real_rows(&rows)?)?;
    Ok(u[0] + u[1])
}

/// M via the two largest singular values of T, s₁² + s₂².
pub fn m_value_from_singular_values(rho: &DensityMatrix) -> Result<f64> {
    let s = singular_values(&correlation_tensor(rho)?.as_matrix());
    Ok(s[0] * s[0] + s[1] * s[1])
}

/// √2 (σ_i⊗σ_i + σ_j⊗σ_j) for the plane (i, j).
pub fn bell_operator(plane: PlaneLabel) -> ComplexMatrix {
    let p = paulis();
    let (i, j) = plane.axes();
    (&kron(&p[i], &p[i]) + &kron(&p[j], &p[j])).scale_real(SQRT_2)
}

/// Tr[B_ij ρ].
pub fn bell_expectation(rho: &DensityMatrix, plane: PlaneLabel) -> Result<f64> {
    rho.require_qubits(2)?;
    Ok(rho.expectation(&bell_operator(plane)))
}

/// (1 + ⟨B_ij⟩/4)/2. Values above 3/4 beat every classical strategy.
pub fn chsh_game_probability(rho: &DensityMatrix, plane: PlaneLabel) -> Result<f64> {
    Ok(chsh_game_probability_from_expectation(bell_expectation(
        rho, plane,
    )?))
}

#[inline]
pub fn chsh_game_probability_from_expectation(bell: f64) -> f64 {
    0.5 * (1.0 + bell / 4.0)
}
