//! Gaussian measurement model at the level of phase-space moments.
//!
//! A Gaussian POVM is given by `(K, beta)`: measuring a state with mean `m`
//! and covariance `alpha` yields outcomes `z ~ N(K^{-1} m, K^{-1}(alpha + beta)K^{-t})`.
//! Densities are taken with respect to plain Lebesgue measure.

use std::f64::consts::{E, PI};

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Error, Result};
use crate::linalg::{self, Matrix, Vector};
use crate::symplectic::{self, CovarianceMatrix, SymplecticSpace};

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    pub mean: Vector,
    pub covariance: CovarianceMatrix,
}

impl GaussianState {
    pub fn new(mean: Vector, covariance: CovarianceMatrix, space: &SymplecticSpace) -> Result<Self> {
        if mean.len() != space.dim() {
            return invalid(format!(
                "state mean has length {}, expected {}",
                mean.len(),
                space.dim()
            ));
        }
        symplectic::require_quantum_valid(&covariance, space)?;
        Ok(Self { mean, covariance })
    }

    pub fn centered(covariance: CovarianceMatrix, space: &SymplecticSpace) -> Result<Self> {
        Self::new(Vector::zeros(space.dim()), covariance, space)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMeasurement {
    k_matrix: Matrix,
    beta: CovarianceMatrix,
}

impl GaussianMeasurement {
    pub fn new(k_matrix: Matrix, beta: CovarianceMatrix, space: &SymplecticSpace) -> Result<Self> {
        space.check_dim(&k_matrix, "K matrix")?;
        let det = k_matrix.determinant();
        if !det.is_finite() || det.abs() <= 1e-300 || k_matrix.clone().try_inverse().is_none() {
            return invalid("K matrix is singular");
        }
        symplectic::require_quantum_valid(&beta, space)?;
        Ok(Self { k_matrix, beta })
    }

    /// The `K = I` measurement with noise covariance `beta`.
    pub fn canonical(beta: CovarianceMatrix, space: &SymplecticSpace) -> Result<Self> {
        Self::new(Matrix::identity(space.dim(), space.dim()), beta, space)
    }

    pub fn k_matrix(&self) -> &Matrix {
        &self.k_matrix
    }

    pub fn beta(&self) -> &CovarianceMatrix {
        &self.beta
    }

    pub fn is_canonical(&self) -> bool {
        self.k_matrix == Matrix::identity(self.k_matrix.nrows(), self.k_matrix.ncols())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeDistribution {
    pub mean: Vector,
    pub covariance: Matrix,
}

impl OutcomeDistribution {
    /// Lebesgue density at `z`.
    pub fn density(&self, z: &Vector) -> Result<f64> {
        let d = self.mean.len() as f64;
        let chol = linalg::symmetrize(&self.covariance)
            .cholesky()
            .ok_or_else(|| Error::InvalidInput("outcome covariance is not positive definite".into()))?;
        let whitened = chol
            .l()
            .solve_lower_triangular(&(z - &self.mean))
            .expect("Cholesky factor is invertible");
        let q = whitened.norm_squared();
        let logdet = 2.0 * chol.l().diagonal().iter().map(|x| x.ln()).sum::<f64>();
        Ok((-0.5 * q - 0.5 * logdet - 0.5 * d * (2.0 * PI).ln()).exp())
    }

    /// Image under the linear map `z -> map z`.
    pub fn pushforward(&self, map: &Matrix) -> Self {
        Self {
            mean: map * &self.mean,
            covariance: linalg::symmetrize(&(map * &self.covariance * map.transpose())),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CanonicalMeasurement {
    pub canonical: GaussianMeasurement,
    /// `K`: a raw outcome `z` corresponds to the canonical outcome `K z`.
    pub outcome_map: Matrix,
}

pub fn canonicalize_measurement(m: &GaussianMeasurement) -> CanonicalMeasurement {
    let dim = m.k_matrix.nrows();
    CanonicalMeasurement {
        canonical: GaussianMeasurement {
            k_matrix: Matrix::identity(dim, dim),
            beta: m.beta.clone(),
        },
        outcome_map: m.k_matrix.clone(),
    }
}

pub fn outcome_distribution(state: &GaussianState, m: &GaussianMeasurement) -> Result<OutcomeDistribution> {
    if state.mean.len() != m.k_matrix.nrows() || state.covariance.dim() != m.beta.dim() {
        return invalid("state and measurement dimensions differ");
    }
    let total = state.covariance.matrix() + m.beta.matrix();
    if m.is_canonical() {
        return Ok(OutcomeDistribution {
            mean: state.mean.clone(),
            covariance: total,
        });
    }
    let k_inv = linalg::inverse(&m.k_matrix)?;
    Ok(OutcomeDistribution {
        mean: &k_inv * &state.mean,
        covariance: linalg::symmetrize(&(&k_inv * total * k_inv.transpose())),
    })
}

/// `(1/2) log det sigma + s log(2 pi e)` nats for a `2s x 2s` covariance.
pub fn gaussian_differential_entropy(sigma: &Matrix) -> Result<f64> {
    if !sigma.is_square() || sigma.nrows() == 0 {
        return invalid("entropy needs a non-empty square covariance");
    }
    let scale = linalg::frobenius(sigma).max(f64::MIN_POSITIVE);
    if !linalg::is_symmetric(sigma, symplectic::SYMMETRY_TOL * scale) {
        return invalid("covariance is not symmetric");
    }
    let logdet = linalg::logdet_pd(sigma)?;
    let half_dim = sigma.nrows() as f64 / 2.0;
    Ok(0.5 * logdet + half_dim * (2.0 * PI * E).ln())
}

/// Reproducible stream of standard normal vectors.
///
/// Backed by ChaCha20, a counter-based generator: `(seed, stream)` pairs
/// give independent, platform-stable sequences.
#[derive(Debug, Clone)]
pub struct NormalStream {
    rng: ChaCha20Rng,
}

impl NormalStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { rng }
    }

    pub fn next_scalar(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    pub fn next_vector(&mut self, dim: usize) -> Vector {
        Vector::from_iterator(dim, (0..dim).map(|_| self.next_scalar()))
    }

    pub fn next_uniform(&mut self) -> f64 {
        rand::Rng::gen::<f64>(&mut self.rng)
    }
}

/// Draws `mean + L xi` with `L Lᵗ = covariance`.
#[derive(Debug, Clone)]
pub struct GaussianSampler {
    mean: Vector,
    factor: Matrix,
}

impl GaussianSampler {
    pub fn new(mean: Vector, covariance: &Matrix) -> Self {
        Self {
            mean,
            factor: linalg::psd_factor(covariance),
        }
    }

    pub fn centered(covariance: &Matrix) -> Self {
        Self::new(Vector::zeros(covariance.nrows()), covariance)
    }

    pub fn draw(&self, stream: &mut NormalStream) -> Vector {
        let xi = stream.next_vector(self.mean.len());
        &self.mean + &self.factor * xi
    }
}

/// `n` i.i.d. outcomes of measuring `state` with `m`.
pub fn sample_outcomes(
    state: &GaussianState,
    m: &GaussianMeasurement,
    n: usize,
    seed: u64,
) -> Result<Vec<Vector>> {
    if n == 0 {
        return invalid("sample count must be at least 1");
    }
    let dist = outcome_distribution(state, m)?;
    let sampler = GaussianSampler::new(dist.mean, &dist.covariance);
    let mut stream = NormalStream::new(seed, 0);
    Ok((0..n).map(|_| sampler.draw(&mut stream)).collect())
}
