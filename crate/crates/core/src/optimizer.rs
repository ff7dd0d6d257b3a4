//! Search over controller measurement directions, and scans over the
//! witness parameter.
//!
//! The coarse stage evaluates a shifted Halton point set mapped onto the
//! unit 3-sphere. The best few points are then polished by Nelder-Mead on
//! the angles (χ, θ, φ) with t = cos χ, y = sin χ·(sin θ cos φ, sin θ sin φ, cos θ).

use std::f64::consts::TAU;

use rand::Rng;
use serde::Serialize;

use crate::chsh::{m_value, PlaneLabel};
use crate::error::{Error, Result};
use crate::power::{
    collapse, conditioned_fidelity, power_lower_bound_from_parts, CollapseResult,
    MeasurementDirection,
};
use crate::sampling::seeded_rng;
use crate::states::{BellLabel, DensityMatrix};
use crate::witness::{witness_expectation, WitnessSpec};

/// Coarse points handed to the simplex stage.
pub const REFINE_STARTS: usize = 4;
/// Nelder-Mead stops when every vertex is this close to the best one.
pub const SIMPLEX_DIAMETER_TOL: f64 = 1e-9;
const INITIAL_STEP: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SearchConfig {
    pub grid_points: usize,
    pub refine_iters: usize,
    pub seed: u64,
    /// Fidelities within this of the best count as ties.
    pub tolerance: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            grid_points: 2000,
            refine_iters: 200,
            seed: 0,
            tolerance: 1e-7,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_points < 8 {
            return Err(Error::OutOfRange {
                name: "grid_points",
                value: self.grid_points as f64,
                range: "grid_points ≥ 8",
            });
        }
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(Error::OutOfRange {
                name: "tolerance",
                value: self.tolerance,
                range: "tolerance > 0",
            });
        }
        Ok(())
    }
}

/// Best direction found and how it was reached.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SearchResult {
    pub direction: MeasurementDirection,
    pub fidelity: f64,
    pub coarse_best: f64,
    pub evaluations: usize,
}

/// Radical inverse of `i` in base `b`.
fn radical_inverse(mut i: u64, b: u64) -> f64 {
    let inv = 1.0 / b as f64;
    let (mut x, mut f) = (0.0, inv);
    while i > 0 {
        x += (i % b) as f64 * f;
        i /= b;
        f *= inv;
    }
    x
}

/// Uniform map from the unit cube to the unit 3-sphere.
fn cube_to_sphere(u: [f64; 3]) -> MeasurementDirection {
    let (r1, r2) = ((1.0 - u[0]).sqrt(), u[0].sqrt());
    let (s1, c1) = (TAU * u[1]).sin_cos();
    let (s2, c2) = (TAU * u[2]).sin_cos();
    MeasurementDirection {
        t: r2 * c2,
        y: [r1 * s1, r1 * c1, r2 * s2],
    }
}

/// `n` low-discrepancy directions; the seed picks a Cranley-Patterson shift.
pub fn sphere_points(n: usize, seed: u64) -> Vec<MeasurementDirection> {
    let mut rng = seeded_rng(seed);
    let shift: [f64; 3] = if seed == 0 {
        [0.0; 3]
    } else {
        [rng.gen(), rng.gen(), rng.gen()]
    };
    (1..=n as u64)
        .map(|i| {
            let h = [
                radical_inverse(i, 2),
                radical_inverse(i, 3),
                radical_inverse(i, 5),
            ];
            cube_to_sphere([
                (h[0] + shift[0]).fract(),
                (h[1] + shift[1]).fract(),
                (h[2] + shift[2]).fract(),
            ])
        })
        .collect()
}

fn to_angles(d: &MeasurementDirection) -> [f64; 3] {
    let chi = d.t.clamp(-1.0, 1.0).acos();
    let s = chi.sin();
    if s < 1e-12 {
        return [chi, 0.0, 0.0];
    }
    let theta = (d.y[2] / s).clamp(-1.0, 1.0).acos();
    let phi = d.y[1].atan2(d.y[0]);
    [chi, theta, phi]
}

fn from_angles(x: &[f64; 3]) -> MeasurementDirection {
    MeasurementDirection::from_angles(x[0], x[1], x[2])
}

/// Nelder-Mead maximization of `f` from `start`. Returns the best vertex,
/// its value and the evaluation count.
fn nelder_mead<F: FnMut(&[f64; 3]) -> f64>(
    mut f: F,
    start: [f64; 3],
    max_iters: usize,
) -> ([f64; 3], f64, usize) {
    // minimize g = −f
    let mut g = |x: &[f64; 3]| -f(x);
    let mut simplex: Vec<([f64; 3], f64)> = Vec::with_capacity(4);
    simplex.push((start, g(&start)));
    for k in 0..3 {
        let mut x = start;
        x[k] += INITIAL_STEP;
        simplex.push((x, g(&x)));
    }
    let mut evals = 4;
    let combine = |a: &[f64; 3], b: &[f64; 3], t: f64| -> [f64; 3] {
        [
            a[0] + t * (b[0] - a[0]),
            a[1] + t * (b[1] - a[1]),
            a[2] + t * (b[2] - a[2]),
        ]
    };

    for _ in 0..max_iters {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].0;
        let diameter = simplex[1..]
            .iter()
            .map(|(x, _)| (0..3).map(|k| (x[k] - best[k]).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if diameter < SIMPLEX_DIAMETER_TOL {
            break;
        }
        let mut centroid = [0.0; 3];
        for (x, _) in &simplex[..3] {
            for k in 0..3 {
                centroid[k] += x[k] / 3.0;
            }
        }
        let (worst, f_worst) = simplex[3];
        // centroid + 1·(centroid − worst)
        let reflected = combine(&centroid, &worst, -1.0);
        let f_r = g(&reflected);
        evals += 1;
        if f_r < simplex[0].1 {
            let expanded = combine(&centroid, &worst, -2.0);
            let f_e = g(&expanded);
            evals += 1;
            simplex[3] = if f_e < f_r {
                (expanded, f_e)
            } else {
                (reflected, f_r)
            };
        } else if f_r < simplex[2].1 {
            simplex[3] = (reflected, f_r);
        } else {
            let (target, f_target) = if f_r < f_worst {
                (reflected, f_r)
            } else {
                (worst, f_worst)
            };
            let contracted = combine(&centroid, &target, 0.5);
            let f_c = g(&contracted);
            evals += 1;
            if f_c < f_target {
                simplex[3] = (contracted, f_c);
            } else {
                for v in simplex.iter_mut().skip(1) {
                    let x = combine(&best, &v.0, 0.5);
                    *v = (x, g(&x));
                    evals += 1;
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    (simplex[0].0, -simplex[0].1, evals)
}

fn lexicographic_less(a: &MeasurementDirection, b: &MeasurementDirection) -> bool {
    a.components()
        .iter()
        .zip(b.components().iter())
        .find(|(x, y)| x != y)
        .is_some_and(|(x, y)| x < y)
}

/// Direction maximizing f_C for the given outcome.
pub fn maximize_conditioned_fidelity(
    rho3: &DensityMatrix,
    controller_slot: usize,
    outcome: usize,
    config: &SearchConfig,
) -> Result<SearchResult> {
    config.validate()?;
    rho3.require_qubits(3)?;
    let mut hard_error = None;
    let mut objective = |d: &MeasurementDirection| -> f64 {
        match collapse(rho3, controller_slot, d, outcome).and_then(|c| conditioned_fidelity(&c)) {
            Ok(f) => f,
            Err(Error::DegenerateOutcome { .. }) => f64::NEG_INFINITY,
            Err(e) => {
                hard_error.get_or_insert(e);
                f64::NEG_INFINITY
            }
        }
    };

    let mut candidates: Vec<(MeasurementDirection, f64)> =
        sphere_points(config.grid_points, config.seed)
            .into_iter()
            .map(|d| {
                let v = objective(&d);
                (d, v)
            })
            .collect();
    let mut evaluations = candidates.len();
    let coarse_best = candidates
        .iter()
        .map(|c| c.1)
        .fold(f64::NEG_INFINITY, f64::max);
    if coarse_best == f64::NEG_INFINITY {
        return Err(hard_error.unwrap_or(Error::DegenerateOutcome {
            outcome,
            probability: 0.0,
        }));
    }

    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&i, &j| candidates[j].1.total_cmp(&candidates[i].1).then(i.cmp(&j)));
    let starts: Vec<MeasurementDirection> = order
        .iter()
        .take(REFINE_STARTS)
        .map(|&i| candidates[i].0)
        .collect();
    for start in starts {
        let (x, v, n) = nelder_mead(
            |x| objective(&from_angles(x)),
            to_angles(&start),
            config.refine_iters,
        );
        evaluations += n;
        candidates.push((from_angles(&x), v));
    }
    if let Some(e) = hard_error {
        return Err(e);
    }

    let best = candidates
        .iter()
        .map(|c| c.1)
        .fold(f64::NEG_INFINITY, f64::max);
    let floor = (best - config.tolerance).max(coarse_best);
    let (direction, fidelity) = candidates
        .iter()
        .filter(|c| c.1 >= floor)
        .fold(
            None::<(MeasurementDirection, f64)>,
            |acc, &(d, v)| match acc {
                Some((ad, av)) if !lexicographic_less(&d, &ad) => Some((ad, av)),
                _ => Some((d, v)),
            },
        )
        .expect("the best candidate passes its own floor");
    Ok(SearchResult {
        direction,
        fidelity,
        coarse_best,
        evaluations,
    })
}

/// One row of a witness-parameter scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanRow {
    pub a: f64,
    pub expectation: f64,
    /// Power lower bound; absent where the witness does not detect.
    pub lower_bound: Option<f64>,
    pub detected: bool,
}

/// Witness expectation and power lower bound along an increasing a-grid.
pub fn scan_witness_parameter(
    collapse: &CollapseResult,
    bell: BellLabel,
    plane: PlaneLabel,
    a_grid: &[f64],
) -> Result<Vec<ScanRow>> {
    if a_grid.is_empty() {
        return Err(Error::Precondition("empty a-grid".into()));
    }
    if a_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Precondition(
            "a-grid must be strictly increasing".into(),
        ));
    }
    let m = m_value(&collapse.post_state)?;
    a_grid
        .iter()
        .map(|&a| {
            let spec = WitnessSpec::new(bell, plane, a)?;
            let w = witness_expectation(&spec, &collapse.post_state)?;
            let detected = w < 0.0;
            Ok(ScanRow {
                a,
                expectation: w,
                lower_bound: detected.then(|| power_lower_bound_from_parts(w, a, m)),
                detected,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{ghz, w_n};

    #[test]
    fn halton_prefix() {
        assert_eq!(radical_inverse(1, 2), 0.5);
        assert_eq!(radical_inverse(3, 2), 0.75);
        assert!((radical_inverse(5, 3) - 7.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn sphere_points_are_unit() {
        for seed in [0, 7] {
            for d in sphere_points(200, seed) {
                assert!((d.norm_sqr() - 1.0).abs() < 1e-12);
            }
        }
        assert_ne!(sphere_points(10, 0), sphere_points(10, 1));
    }

    #[test]
    fn angle_round_trip() {
        for d in sphere_points(50, 3) {
            let back = from_angles(&to_angles(&d));
            let diff = d
                .components()
                .iter()
                .zip(back.components())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(diff < 1e-12);
        }
    }

    #[test]
    fn nelder_mead_finds_quadratic_peak() {
        let (x, v, _) = nelder_mead(
            |x| -((x[0] - 0.3).powi(2) + (x[1] + 0.2).powi(2) + (x[2] - 1.0).powi(2)),
            [0.0; 3],
            500,
        );
        assert!(v > -1e-12);
        assert!(
            (x[0] - 0.3).abs() < 1e-6 && (x[1] + 0.2).abs() < 1e-6 && (x[2] - 1.0).abs() < 1e-6
        );
    }

    #[test]
    fn config_validation() {
        assert!(SearchConfig {
            grid_points: 4,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(SearchConfig {
            tolerance: 0.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(SearchConfig::default().validate().is_ok());
    }

    #[test]
    fn w1_reaches_unit_fidelity() {
        let s = w_n(1).unwrap().density();
        let cfg = SearchConfig {
            grid_points: 400,
            ..Default::default()
        };
        let r = maximize_conditioned_fidelity(&s.rho, 2, 0, &cfg).unwrap();
        assert!(r.fidelity >= 0.9999, "{r:?}");
        assert!(r.fidelity >= r.coarse_best);
        assert!((r.direction.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn search_is_deterministic() {
        let s = ghz(0.6).unwrap().density();
        let cfg = SearchConfig {
            grid_points: 100,
            refine_iters: 50,
            seed: 5,
            ..Default::default()
        };
        let a = maximize_conditioned_fidelity(&s.rho, 0, 0, &cfg).unwrap();
        let b = maximize_conditioned_fidelity(&s.rho, 0, 0, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn scan_flags_undetected_rows() {
        let s = w_n(1).unwrap().density();
        let col = collapse(&s.rho, 2, &MeasurementDirection::computational(), 0).unwrap();
        let rows =
            scan_witness_parameter(&col, BellLabel::PsiPlus, PlaneLabel::Yz, &[0.01, 0.1, 0.3])
                .unwrap();
        assert!(rows[0].detected && rows[1].detected);
        assert!(!rows[2].detected && rows[2].lower_bound.is_none());
        assert!(scan_witness_parameter(&col, BellLabel::PsiPlus, PlaneLabel::Yz, &[]).is_err());
        assert!(
            scan_witness_parameter(&col, BellLabel::PsiPlus, PlaneLabel::Yz, &[0.2, 0.1]).is_err()
        );
    }
}
