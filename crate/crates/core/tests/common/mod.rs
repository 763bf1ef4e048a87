#![allow(dead_code)]

use gmcap::linalg::{self, Matrix, Vector};
use gmcap::symplectic::{self, build_symplectic_form, CovarianceMatrix, SymplecticSpace};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn space(s: usize) -> SymplecticSpace {
    build_symplectic_form(s).unwrap()
}

pub fn diag(values: &[f64]) -> CovarianceMatrix {
    CovarianceMatrix::new(Matrix::from_diagonal(&Vector::from_row_slice(values))).unwrap()
}

pub fn scaled_identity(dim: usize, x: f64) -> Matrix {
    Matrix::identity(dim, dim) * x
}

pub fn random_pd<R: Rng>(rng: &mut R, dim: usize) -> Matrix {
    let a = Matrix::from_fn(dim, dim, |_, _| rng.gen_range(-1.0..1.0));
    &a * a.transpose() + Matrix::identity(dim, dim) * 0.2
}

pub fn random_invertible<R: Rng>(rng: &mut R, dim: usize) -> Matrix {
    loop {
        let k = Matrix::from_fn(dim, dim, |_, _| rng.gen_range(-2.0..2.0));
        if k.determinant().abs() > 0.1 {
            return k;
        }
    }
}

pub fn random_valid<R: Rng>(rng: &mut R, space: &SymplecticSpace) -> CovarianceMatrix {
    symplectic::random_valid_covariance(rng, space, 2.0, 0.4)
}

pub fn random_pure<R: Rng>(rng: &mut R, space: &SymplecticSpace) -> CovarianceMatrix {
    let s = symplectic::random_symplectic(rng, space, 0.3);
    let vac = Matrix::identity(space.dim(), space.dim()) * 0.5;
    CovarianceMatrix::new(linalg::symmetrize(&(s.transpose() * vac * &s))).unwrap()
}

pub fn max_abs(m: &Matrix) -> f64 {
    m.amax()
}
