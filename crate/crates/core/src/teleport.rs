//! Singlet fraction and the two teleportation-fidelity routes.
//!
//! `fidelity_from_singlet_fraction` is the optimal fidelity (2F + 1)/3;
//! `fidelity_from_trace_norm` is (3 + ‖T‖₁)/6. The two agree on
//! Bell-diagonal states, and in general (2F + 1)/3 ≤ (3 + ‖T‖₁)/6.

use serde::Serialize;

use crate::chsh::{correlation_tensor, m_value};
use crate::error::{check_range, Error, Result};
use crate::linalg::{c, hermitian_eigenvalues, ComplexMatrix, ComplexVector};
use crate::states::{BellLabel, DensityMatrix};
use crate::witness::{witness_expectation, WitnessSpec};

/// Classical teleportation threshold.
pub const CLASSICAL_FIDELITY: f64 = 2.0 / 3.0;

/// Magic basis |φ+⟩, i|φ−⟩, i|ψ+⟩, |ψ−⟩. Maximally entangled states are
/// exactly the real unit vectors in this basis, up to a global phase.
pub fn magic_basis() -> [ComplexVector; 4] {
    let i = c(0.0, 1.0);
    [
        BellLabel::PhiPlus.vector(),
        BellLabel::PhiMinus.vector().scale(i),
        BellLabel::PsiPlus.vector().scale(i),
        BellLabel::PsiMinus.vector(),
    ]
}

/// Largest overlap of ρ with a maximally entangled state, computed as the
/// top eigenvalue of Re(ρ) written in the magic basis.
pub fn singlet_fraction(rho: &DensityMatrix) -> Result<f64> {
    rho.require_qubits(2)?;
    let basis = magic_basis();
    let mut rows = [[0.0; 4]; 4];
    for (k, row) in rows.iter_mut().enumerate() {
        for (l, v) in row.iter_mut().enumerate() {
            *v = basis[k].inner(&rho.matrix().apply(&basis[l])).re;
        }
    }
    let rows: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
    let values = hermitian_eigenvalues(&ComplexMatrix::from_real_rows(&rows)?)?;
    Ok(values[0])
}

/// (2F + 1)/3.
pub fn fidelity_from_singlet_fraction(f: f64) -> Result<f64> {
    check_range("F", f, 0.0, 1.0, "[0, 1]")?;
    Ok((2.0 * f + 1.0) / 3.0)
}

/// (3 + ‖T‖₁)/6.
pub fn fidelity_from_trace_norm(rho: &DensityMatrix) -> Result<f64> {
    Ok((3.0 + correlation_tensor(rho)?.trace_norm()) / 6.0)
}

/// Both fidelity routes side by side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FidelityBundle {
    pub singlet_fraction: f64,
    pub fidelity_from_f: f64,
    pub fidelity_from_trace_norm: f64,
    /// fidelity_from_trace_norm − fidelity_from_f, never negative beyond rounding.
    pub route_gap: f64,
    /// fidelity_from_f strictly above 2/3.
    pub useful: bool,
}

pub fn fidelity_bundle(rho: &DensityMatrix) -> Result<FidelityBundle> {
    let f = singlet_fraction(rho)?;
    let from_f = fidelity_from_singlet_fraction(f.clamp(0.0, 1.0))?;
    let from_t = fidelity_from_trace_norm(rho)?;
    Ok(FidelityBundle {
        singlet_fraction: f,
        fidelity_from_f: from_f,
        fidelity_from_trace_norm: from_t,
        route_gap: from_t - from_f,
        useful: from_f > CLASSICAL_FIDELITY,
    })
}

/// Largest witness parameter for which the fidelity bound is meaningful,
/// (1/2 + Tr[Wρ]) / (2(1 − √M)). Infinite when M = 1.
pub fn result3_max_a(expectation: f64, m: f64) -> f64 {
    let gap = 1.0 - m.sqrt();
    if gap <= 0.0 {
        f64::INFINITY
    } else {
        (0.5 + expectation) / (2.0 * gap)
    }
}

/// (2/3)(1 − Tr[Wρ] + 2a(1 − √M)), with no preconditions checked.
pub fn result3_bound_from_parts(expectation: f64, a: f64, m: f64) -> f64 {
    2.0 / 3.0 * (1.0 - expectation + 2.0 * a * (1.0 - m.sqrt()))
}

/// Witness-based lower bound on the teleportation fidelity of a detected
/// state that satisfies every CHSH inequality.
pub fn result3_fidelity_lower_bound(rho: &DensityMatrix, witness: &WitnessSpec) -> Result<f64> {
    let w = witness_expectation(witness, rho)?;
    if w >= 0.0 {
        return Err(Error::NotDetected(w));
    }
    let m = m_value(rho)?;
    if m > 1.0 {
        return Err(Error::Precondition(format!(
            "M = {m} > 1: state violates a CHSH inequality"
        )));
    }
    let a_max = result3_max_a(w, m);
    if witness.a > a_max {
        return Err(Error::Precondition(format!(
            "a = {} exceeds the admissible maximum {a_max}",
            witness.a
        )));
    }
    Ok(result3_bound_from_parts(w, witness.a, m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chsh::PlaneLabel;
    use crate::states::{isotropic, rho_f, rho_theta};

    #[test]
    fn magic_basis_is_orthonormal() {
        let b = magic_basis();
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((b[i].inner(&b[j]).norm() - want).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn singlet_fraction_examples() {
        for label in BellLabel::ALL {
            let rho = DensityMatrix::from_pure(&label.vector()).unwrap();
            assert!((singlet_fraction(&rho).unwrap() - 1.0).abs() < 1e-12);
        }
        for p in [0.0, 0.3, 0.9] {
            let f = singlet_fraction(&isotropic(p).unwrap()).unwrap();
            assert!((f - (1.0 + 3.0 * p) / 4.0).abs() < 1e-12);
        }
        for f in [0.34, 0.4, 0.5] {
            assert!((singlet_fraction(&rho_f(f).unwrap()).unwrap() - f).abs() < 1e-9);
        }
    }

    #[test]
    fn product_state_has_half_singlet_fraction() {
        let rho = DensityMatrix::from_pure(&ComplexVector::basis(4, 0)).unwrap();
        assert!((singlet_fraction(&rho).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn fidelity_formulas() {
        assert_eq!(fidelity_from_singlet_fraction(1.0).unwrap(), 1.0);
        assert!((fidelity_from_singlet_fraction(0.5).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!(fidelity_from_singlet_fraction(1.1).is_err());
        let phi = DensityMatrix::from_pure(&BellLabel::PhiPlus.vector()).unwrap();
        assert!((fidelity_from_trace_norm(&phi).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn routes_agree_on_bell_diagonal_states() {
        for p in [0.2, 0.6, 1.0] {
            let b = fidelity_bundle(&isotropic(p).unwrap()).unwrap();
            assert!(b.route_gap.abs() < 1e-9, "{b:?}");
        }
    }

    #[test]
    fn usefulness_is_strict() {
        let b = fidelity_bundle(&isotropic(1.0 / 3.0).unwrap()).unwrap();
        assert!((b.fidelity_from_f - 2.0 / 3.0).abs() < 1e-12);
        let b = fidelity_bundle(&isotropic(0.5).unwrap()).unwrap();
        assert!(b.useful);
    }

    #[test]
    fn result3_bound_on_rho_theta() {
        let rho = rho_theta(0.2 * std::f64::consts::PI).unwrap();
        let spec = WitnessSpec::new(BellLabel::PsiMinus, PlaneLabel::Xy, 1e-3).unwrap();
        let bound = result3_fidelity_lower_bound(&rho, &spec).unwrap();
        let f = singlet_fraction(&rho).unwrap();
        assert!(bound > 2.0 / 3.0);
        assert!(bound <= fidelity_from_singlet_fraction(f).unwrap() + 1e-12);
    }

    #[test]
    fn result3_bound_hits_one_at_max_a() {
        for (w, m) in [(-0.01, 0.5), (-0.2, 0.9), (-0.4, 0.1)] {
            let a = result3_max_a(w, m);
            assert!((result3_bound_from_parts(w, a, m) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn result3_rejects_undetected_and_nonlocal() {
        let spec = WitnessSpec::new(BellLabel::PhiPlus, PlaneLabel::Xy, 0.01).unwrap();
        let mixed = DensityMatrix::maximally_mixed(2);
        assert!(matches!(
            result3_fidelity_lower_bound(&mixed, &spec),
            Err(Error::NotDetected(_))
        ));
        let phi = DensityMatrix::from_pure(&BellLabel::PhiPlus.vector()).unwrap();
        assert!(matches!(
            result3_fidelity_lower_bound(&phi, &spec),
            Err(Error::Precondition(_))
        ));
    }
}
