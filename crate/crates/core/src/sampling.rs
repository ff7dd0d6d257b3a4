//! Seeded random states and unitaries for property checks and oracles.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::linalg::{c, kron_all, ComplexMatrix, ComplexVector, C64};
use crate::states::DensityMatrix;

pub type SeededRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    c(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-random unit vector in C^dim.
pub fn haar_ket<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexVector {
    ComplexVector::new((0..dim).map(|_| gaussian(rng)).collect()).normalized()
}

/// Haar-random unitary: Gram-Schmidt on a Ginibre matrix, columns in order.
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let mut cols: Vec<ComplexVector> = Vec::with_capacity(dim);
    while cols.len() < dim {
        let mut v = ComplexVector::new((0..dim).map(|_| gaussian(rng)).collect());
        for u in &cols {
            let proj = u.inner(&v);
            v = &v + &u.scale(-proj);
        }
        if v.norm() > 1e-8 {
            cols.push(v.normalized());
        }
    }
    let mut m = ComplexMatrix::zeros(dim);
    for (j, col) in cols.iter().enumerate() {
        for i in 0..dim {
            m[(i, j)] = col[i];
        }
    }
    m
}

/// Product of independent Haar-random single-qubit pure states.
pub fn random_product_state<R: Rng + ?Sized>(qubits: usize, rng: &mut R) -> DensityMatrix {
    let factors: Vec<ComplexMatrix> = (0..qubits)
        .map(|_| ComplexMatrix::projector(&haar_ket(2, rng)))
        .collect();
    let refs: Vec<&ComplexMatrix> = factors.iter().collect();
    DensityMatrix::new(kron_all(&refs)).expect("product of pure states")
}

/// Flat-Dirichlet weights: normalized Exp(1) draws.
pub fn dirichlet_weights<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

/// Dirichlet-weighted mixture of `terms` two-qubit product states.
pub fn random_separable_mixture<R: Rng + ?Sized>(terms: usize, rng: &mut R) -> DensityMatrix {
    let weights = dirichlet_weights(terms, rng);
    let mut acc = ComplexMatrix::zeros(4);
    for w in weights {
        acc = &acc + &random_product_state(2, rng).matrix().scale_real(w);
    }
    DensityMatrix::from_unnormalized(acc).expect("mixture of product states")
}

/// G G† / Tr for a Ginibre G: full-rank random mixed state.
pub fn random_density_matrix<R: Rng + ?Sized>(qubits: usize, rng: &mut R) -> DensityMatrix {
    let dim = 1 << qubits;
    let g = ComplexMatrix::from_row_major(dim, (0..dim * dim).map(|_| gaussian(rng)).collect())
        .expect("finite Gaussian entries");
    DensityMatrix::from_unnormalized(&g * &g.adjoint()).expect("G G† is positive")
}

/// Random pure state on `qubits` qubits.
pub fn random_pure_state<R: Rng + ?Sized>(qubits: usize, rng: &mut R) -> DensityMatrix {
    DensityMatrix::from_pure(&haar_ket(1 << qubits, rng)).expect("normalized ket")
}
