//! Witness family W = (1/2 + 2a)I − |A⟩⟨A| − a·B_ij and the bounds built
//! on it.
//!
//! At fixed ρ the expectation is affine in a:
//! Tr[Wρ] = (1/2 − ⟨A|ρ|A⟩) + a·(2 − ⟨B_ij⟩). Detection questions are
//! answered from that line directly.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::chsh::{bell_expectation, bell_operator, m_value, PlaneLabel};
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::sampling::{random_product_state, random_separable_mixture, seeded_rng};
use crate::states::{BellLabel, DensityMatrix, Params};
use crate::teleport::singlet_fraction;

/// Bell state A, plane (i, j) and parameter a > 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WitnessSpec {
    pub bell: BellLabel,
    pub plane: PlaneLabel,
    pub a: f64,
}

impl WitnessSpec {
    pub fn new(bell: BellLabel, plane: PlaneLabel, a: f64) -> Result<Self> {
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::OutOfRange {
                name: "a",
                value: a,
                range: "a > 0",
            });
        }
        Ok(Self { bell, plane, a })
    }

    pub fn with_a(&self, a: f64) -> Result<Self> {
        Self::new(self.bell, self.plane, a)
    }
}

impl fmt::Display for WitnessSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:a={}", self.bell, self.plane, self.a)
    }
}

/// `bell:plane:a=value`, e.g. `phi+:xy:a=0.01`.
impl FromStr for WitnessSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let mut parts = s.splitn(3, ':');
        let (bell, plane, rest) = match (parts.next(), parts.next(), parts.next()) {
            (Some(b), Some(p), Some(r)) => (b, p, r),
            _ => {
                return Err(Error::Parse {
                    token: s.to_string(),
                    reason: "expected bell:plane:a=value, e.g. phi+:xy:a=0.01".into(),
                })
            }
        };
        let params = Params::parse(s, Some(rest))?;
        params.only(&["a"])?;
        let a = params.real("a")?;
        Self::new(bell.parse()?, plane.parse()?, a).map_err(|e| Error::Parse {
            token: rest.to_string(),
            reason: e.to_string(),
        })
    }
}

/// The 4×4 witness matrix.
pub fn build_witness(spec: &WitnessSpec) -> ComplexMatrix {
    let a = spec.a;
    let id = ComplexMatrix::identity(4).scale_real(0.5 + 2.0 * a);
    &(&id - &spec.bell.projector()) - &bell_operator(spec.plane).scale_real(a)
}

/// Tr[Wρ]. Negative values certify entanglement.
pub fn witness_expectation(spec: &WitnessSpec, rho: &DensityMatrix) -> Result<f64> {
    rho.require_qubits(2)?;
    Ok(rho.expectation(&build_witness(spec)))
}

/// Tr[Wρ] as the line intercept + slope·a.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AffineExpectation {
    /// 1/2 − ⟨A|ρ|A⟩.
    pub intercept: f64,
    /// 2 − ⟨B_ij⟩.
    pub slope: f64,
}

impl AffineExpectation {
    pub fn new(rho: &DensityMatrix, bell: BellLabel, plane: PlaneLabel) -> Result<Self> {
        rho.require_qubits(2)?;
        Ok(Self {
            intercept: 0.5 - rho.overlap(&bell.vector()),
            slope: 2.0 - bell_expectation(rho, plane)?,
        })
    }

    #[inline]
    pub fn at(&self, a: f64) -> f64 {
        self.intercept + self.slope * a
    }

    /// Zero of the line, if it has one.
    pub fn root(&self) -> Option<f64> {
        (self.slope != 0.0).then(|| -self.intercept / self.slope)
    }
}

/// Result-1 sandwich on Tr[Wρ].
///
/// Stated in the literature as U(a) ≤ Tr[Wρ] ≤ L(a), so `lower` is U and
/// `upper` is L.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundPair {
    pub lower: f64,
    pub upper: f64,
}

/// lower = 1/2 − F + 2a(1 − √M), upper = 1/2 − ⟨A|ρ|A⟩ + 4a. Only valid
/// for states obeying every CHSH inequality (M ≤ 1).
pub fn result1_bounds(spec: &WitnessSpec, rho: &DensityMatrix) -> Result<BoundPair> {
    let m = m_value(rho)?;
    if m > 1.0 {
        return Err(Error::Precondition(format!(
            "M = {m} > 1: bounds need a state without CHSH violation"
        )));
    }
    let f = singlet_fraction(rho)?;
    let overlap = rho.overlap(&spec.bell.vector());
    Ok(BoundPair {
        lower: 0.5 - f + 2.0 * spec.a * (1.0 - m.sqrt()),
        upper: 0.5 - overlap + 4.0 * spec.a,
    })
}

/// (⟨A|ρ|A⟩ − 1/2)/4: any a in (0, that] detects ρ in every plane.
pub fn result2_max_a(rho: &DensityMatrix, bell: BellLabel) -> Result<f64> {
    let f = singlet_fraction(rho)?;
    if f <= 0.5 {
        return Err(Error::Precondition(format!(
            "singlet fraction {f} must exceed 1/2"
        )));
    }
    let overlap = rho.overlap(&bell.vector());
    if overlap <= 0.5 {
        return Err(Error::Precondition(format!(
            "overlap with {bell} is {overlap}, must exceed 1/2"
        )));
    }
    Ok((overlap - 0.5) / 4.0)
}

/// Sub-interval of (0, a_max] on which the witness is negative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetectionInterval {
    pub lower: f64,
    pub upper: f64,
    pub lower_closed: bool,
    pub upper_closed: bool,
}

impl DetectionInterval {
    pub fn contains(&self, a: f64) -> bool {
        let above = if self.lower_closed {
            a >= self.lower
        } else {
            a > self.lower
        };
        let below = if self.upper_closed {
            a <= self.upper
        } else {
            a < self.upper
        };
        above && below
    }
}

impl fmt::Display for DetectionInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{}, {}{}",
            if self.lower_closed { '[' } else { '(' },
            self.lower,
            self.upper,
            if self.upper_closed { ']' } else { ')' }
        )
    }
}

/// Detection window in a, from the sign of the affine expectation.
pub fn detection_range(
    rho: &DensityMatrix,
    bell: BellLabel,
    plane: PlaneLabel,
    a_max: f64,
) -> Result<Option<DetectionInterval>> {
    if !(a_max.is_finite() && a_max > 0.0) {
        return Err(Error::OutOfRange {
            name: "a_max",
            value: a_max,
            range: "a_max > 0",
        });
    }
    Ok(detection_window(
        AffineExpectation::new(rho, bell, plane)?,
        a_max,
    ))
}

/// Intercepts this close to zero are rounding noise and count as zero.
pub const INTERCEPT_TOL: f64 = 1e-13;

/// Sign analysis of intercept + slope·a over (0, a_max].
pub fn detection_window(line: AffineExpectation, a_max: f64) -> Option<DetectionInterval> {
    let AffineExpectation {
        mut intercept,
        slope,
    } = line;
    if intercept.abs() <= INTERCEPT_TOL {
        intercept = 0.0;
    }
    if slope > 0.0 {
        // negative for a < root
        let root = -intercept / slope;
        if root <= 0.0 {
            return None;
        }
        Some(DetectionInterval {
            lower: 0.0,
            upper: root.min(a_max),
            lower_closed: false,
            upper_closed: root > a_max,
        })
    } else if slope < 0.0 {
        // negative for a > root
        let root = -intercept / slope;
        if root >= a_max {
            return None;
        }
        Some(DetectionInterval {
            lower: root.max(0.0),
            upper: a_max,
            lower_closed: false,
            upper_closed: true,
        })
    } else if intercept < 0.0 {
        Some(DetectionInterval {
            lower: 0.0,
            upper: a_max,
            lower_closed: false,
            upper_closed: true,
        })
    } else {
        None
    }
}

/// Smallest witness expectation over Haar-random product states and
/// random convex mixtures of up to four of them. Non-negative (up to
/// rounding) for every valid witness.
pub fn separable_minimum(spec: &WitnessSpec, products: usize, mixtures: usize, seed: u64) -> f64 {
    let w = build_witness(spec);
    let mut rng = seeded_rng(seed);
    let mut min = f64::INFINITY;
    for _ in 0..products {
        min = min.min(random_product_state(2, &mut rng).expectation(&w));
    }
    for _ in 0..mixtures {
        let terms = rng.gen_range(2..=4);
        min = min.min(random_separable_mixture(terms, &mut rng).expectation(&w));
    }
    min
}
