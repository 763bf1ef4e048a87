//! Energy-constrained classical capacity of a Gaussian measurement channel.
//!
//! For noise covariance `beta` with complex structure `J_beta` the pipeline is
//!
//! 1. maximize `det(alpha + beta)` over quantum covariances with
//!    `Sp(epsilon alpha) <= E`, giving `alpha_E`;
//! 2. check `alpha_E >= (1/2) Delta J_beta`;
//! 3. report `C = (1/2) log det(alpha_E + beta) - (1/2) log det(beta + (1/2) Delta J_beta)`,
//!    attained by `J_beta`-coherent states displaced by `z ~ N(0, alpha_E - (1/2) Delta J_beta)`.
//!
//! When step 2 fails the same number is only an upper bound.

pub mod optimizer;

use std::f64::consts::LN_2;

use crate::channel::{self, GaussianMeasurement};
use crate::error::{invalid, Error, Result};
use crate::linalg::{self, Matrix};
use crate::symplectic::{self, ComplexStructure, CovarianceMatrix, SymplecticSpace};

pub use optimizer::{build_optimizer, optimizer_names, CovarianceOptimizer};

/// Largest supported energy.
pub const MAX_ENERGY: f64 = 1e6;
/// Relative tolerance of the threshold matrix inequality.
pub const THRESHOLD_TOL: f64 = 1e-10;
/// Required agreement between the two algebraic capacity forms.
pub const FORM_AGREEMENT_TOL: f64 = 1e-10;

pub(crate) fn feasibility_margin(e_min: f64) -> f64 {
    1e-12 * e_min.max(1.0)
}

/// Quadratic Hamiltonian `H = R epsilon Rᵗ` with energy budget `E`, so the
/// constraint reads `Sp(epsilon alpha) <= E`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyConstraint {
    epsilon: Matrix,
    energy: f64,
}

impl EnergyConstraint {
    pub fn new(epsilon: Matrix, energy: f64) -> Result<Self> {
        check_epsilon(&epsilon)?;
        if !energy.is_finite() || energy <= 0.0 {
            return invalid(format!("energy must be positive and finite, got {energy}"));
        }
        if energy > MAX_ENERGY {
            return invalid(format!("energy {energy} exceeds the supported cap {MAX_ENERGY}"));
        }
        Ok(Self { epsilon, energy })
    }

    pub fn epsilon(&self) -> &Matrix {
        &self.epsilon
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn with_energy(&self, energy: f64) -> Result<Self> {
        Self::new(self.epsilon.clone(), energy)
    }
}

fn check_epsilon(epsilon: &Matrix) -> Result<()> {
    if !epsilon.is_square() || epsilon.nrows() == 0 || epsilon.nrows() % 2 != 0 {
        return invalid("epsilon must be a non-empty square matrix of even size");
    }
    let scale = linalg::frobenius(epsilon).max(f64::MIN_POSITIVE);
    if !linalg::is_symmetric(epsilon, symplectic::SYMMETRY_TOL * scale) {
        return invalid("epsilon is not symmetric");
    }
    if linalg::min_eigenvalue(epsilon) <= 1e-14 * scale {
        return invalid("epsilon is not positive definite");
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct MinEnergy {
    pub e_min: f64,
    pub ground_covariance: CovarianceMatrix,
}

/// Minimum of `Sp(epsilon alpha)` over quantum covariances.
///
/// The minimizer is the pure state whose complex structure is that of
/// `epsilon^{-1}`; the minimum equals the sum of the symplectic
/// eigenvalues of `epsilon`.
pub fn min_energy(epsilon: &Matrix, space: &SymplecticSpace) -> Result<MinEnergy> {
    check_epsilon(epsilon)?;
    space.check_dim(epsilon, "epsilon")?;
    let eps_inv = CovarianceMatrix::new(linalg::symmetrize(&linalg::inverse(epsilon)?))?;
    let j = symplectic::polar_structure(&eps_inv, space)?;
    let ground = symplectic::pure_covariance(&j, space)?;
    let e_min = (epsilon * ground.matrix()).trace();
    Ok(MinEnergy {
        e_min,
        ground_covariance: ground,
    })
}

/// Maximizer of `det(alpha + beta)` under the energy constraint, using the
/// `auto` strategy.
pub fn optimal_input_covariance(
    constraint: &EnergyConstraint,
    beta: &CovarianceMatrix,
    space: &SymplecticSpace,
) -> Result<CovarianceMatrix> {
    optimal_input_covariance_with(&optimizer::Auto::default(), constraint, beta, space)
}

pub fn optimal_input_covariance_with(
    optimizer: &dyn CovarianceOptimizer,
    constraint: &EnergyConstraint,
    beta: &CovarianceMatrix,
    space: &SymplecticSpace,
) -> Result<CovarianceMatrix> {
    space.check_dim(constraint.epsilon(), "epsilon")?;
    space.check_dim(beta.matrix(), "beta")?;
    symplectic::require_quantum_valid(beta, space)?;
    let ground = min_energy(constraint.epsilon(), space)?;
    let margin = feasibility_margin(ground.e_min);
    if constraint.energy() < ground.e_min - margin {
        return Err(Error::InfeasibleEnergy {
            energy: constraint.energy(),
            e_min: ground.e_min,
        });
    }
    if constraint.energy() <= ground.e_min + margin {
        return Ok(ground.ground_covariance);
    }
    optimizer.maximize(constraint, beta, space)
}

/// `(1/2) Delta J_beta`, the pure state with the noise's complex structure.
pub fn noise_vacuum(
    beta: &CovarianceMatrix,
    space: &SymplecticSpace,
) -> Result<(ComplexStructure, CovarianceMatrix)> {
    let j = symplectic::complex_structure(beta, space)?;
    let vac = symplectic::pure_covariance(&j, space)?;
    Ok((j, vac))
}

/// `alpha - (1/2) Delta J_beta >= 0`, up to `THRESHOLD_TOL * |alpha|_2`.
pub fn threshold_check(
    alpha: &CovarianceMatrix,
    beta: &CovarianceMatrix,
    space: &SymplecticSpace,
) -> Result<bool> {
    space.check_dim(alpha.matrix(), "alpha")?;
    let (_, vac) = noise_vacuum(beta, space)?;
    Ok(threshold_margin(alpha, &vac) >= 0.0)
}

/// Smallest eigenvalue of `alpha - vac` plus the tolerance allowance.
fn threshold_margin(alpha: &CovarianceMatrix, vac: &CovarianceMatrix) -> f64 {
    let norm = linalg::sorted_sym_eigen(alpha.matrix()).0.amax();
    linalg::min_eigenvalue(&(alpha.matrix() - vac.matrix())) + THRESHOLD_TOL * norm
}

/// Smallest energy at which the water-filling maximizer dominates
/// `(1/2) Delta J_beta`:
/// `2s * lambda_max(epsilon^{1/2} (beta + vac) epsilon^{1/2}) - Sp(epsilon beta)`.
pub fn threshold_energy(epsilon: &Matrix, beta: &CovarianceMatrix, space: &SymplecticSpace) -> Result<f64> {
    check_epsilon(epsilon)?;
    space.check_dim(epsilon, "epsilon")?;
    let (_, vac) = noise_vacuum(beta, space)?;
    let root = linalg::sqrt_psd(epsilon);
    let pencil = &root * (beta.matrix() + vac.matrix()) * &root;
    let top = linalg::sorted_sym_eigen(&pencil).0.max();
    Ok(space.dim() as f64 * top - (epsilon * beta.matrix()).trace())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CapacityStatus {
    Exact,
    UpperBoundOnly,
}

impl CapacityStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            CapacityStatus::Exact => "exact",
            CapacityStatus::UpperBoundOnly => "upper_bound_only",
        }
    }
}

/// Capacity-attaining ensemble: coherent states with covariance
/// `coherent_covariance`, displaced by `z ~ N(0, mean_covariance)`.
#[derive(Debug, Clone)]
pub struct OptimalEnsemble {
    pub coherent_covariance: CovarianceMatrix,
    pub mean_covariance: Matrix,
}

impl OptimalEnsemble {
    pub fn is_point_mass(&self) -> bool {
        self.mean_covariance.iter().all(|&x| x == 0.0)
    }
}

pub fn optimal_ensemble(
    alpha_opt: &CovarianceMatrix,
    beta: &CovarianceMatrix,
    space: &SymplecticSpace,
) -> Result<OptimalEnsemble> {
    let (_, vac) = noise_vacuum(beta, space)?;
    if threshold_margin(alpha_opt, &vac) < 0.0 {
        return Err(Error::Threshold(
            "alpha_E - (1/2) Delta J_beta is not positive semidefinite; no coherent-state ensemble".into(),
        ));
    }
    let mean_covariance = alpha_opt.matrix() - vac.matrix();
    Ok(OptimalEnsemble {
        coherent_covariance: vac,
        mean_covariance,
    })
}

#[derive(Debug, Clone)]
pub struct CapacityResult {
    pub alpha_opt: CovarianceMatrix,
    pub threshold_ok: bool,
    pub capacity_nats: f64,
    pub capacity_bits: f64,
    pub status: CapacityStatus,
    /// `None` when the threshold fails.
    pub ensemble: Option<OptimalEnsemble>,
    pub e_min: f64,
    pub j_beta: ComplexStructure,
    pub noise_vacuum: CovarianceMatrix,
    /// `log det(alpha_E + beta)`.
    pub logdet_out: f64,
    /// `log det(beta + (1/2) Delta J_beta)`.
    pub logdet_min: f64,
    /// `(1/2) log det[I + (alpha_E - (1/2) Delta J_beta)(beta + (1/2) Delta J_beta)^{-1}]`.
    pub ratio_form_nats: f64,
    /// Set when `E` sits at the minimal energy: only the ground state is
    /// admissible and the capacity is zero.
    pub degenerate: bool,
}

impl CapacityResult {
    pub fn capacity_in(&self, base: LogBase) -> f64 {
        match base {
            LogBase::Two => self.capacity_bits,
            LogBase::E => self.capacity_nats,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogBase {
    Two,
    E,
}

pub fn capacity(
    constraint: &EnergyConstraint,
    m: &GaussianMeasurement,
    space: &SymplecticSpace,
) -> Result<CapacityResult> {
    capacity_with(&optimizer::Auto::default(), constraint, m, space)
}

pub fn capacity_with(
    optimizer: &dyn CovarianceOptimizer,
    constraint: &EnergyConstraint,
    m: &GaussianMeasurement,
    space: &SymplecticSpace,
) -> Result<CapacityResult> {
    // The outcome relabeling K never changes the capacity.
    let canonical = channel::canonicalize_measurement(m).canonical;
    let beta = canonical.beta();
    space.check_dim(beta.matrix(), "beta")?;
    space.check_dim(constraint.epsilon(), "epsilon")?;
    symplectic::require_quantum_valid(beta, space)?;

    let ground = min_energy(constraint.epsilon(), space)?;
    let margin = feasibility_margin(ground.e_min);
    if constraint.energy() < ground.e_min - margin {
        return Err(Error::InfeasibleEnergy {
            energy: constraint.energy(),
            e_min: ground.e_min,
        });
    }
    let degenerate = constraint.energy() <= ground.e_min + margin;
    let alpha_opt = if degenerate {
        ground.ground_covariance.clone()
    } else {
        optimizer.maximize(constraint, beta, space)?
    };

    let (j_beta, vac) = noise_vacuum(beta, space)?;
    let threshold_ok = threshold_margin(&alpha_opt, &vac) >= 0.0;
    if threshold_ok && !symplectic::symplectic_spectrum(&alpha_opt, space)?.valid {
        return Err(Error::Numerical(
            "maximizer dominates the noise vacuum but is not a quantum covariance".into(),
        ));
    }

    let logdet_out = linalg::logdet_pd(&(alpha_opt.matrix() + beta.matrix()))?;
    let min_out = beta.matrix() + vac.matrix();
    let logdet_min = linalg::logdet_pd(&min_out)?;
    let difference_form = 0.5 * (logdet_out - logdet_min);
    let dim = space.dim();
    let ratio = Matrix::identity(dim, dim) + (alpha_opt.matrix() - vac.matrix()) * linalg::inverse(&min_out)?;
    let ratio_det = ratio.determinant();
    if ratio_det <= 0.0 {
        return Err(Error::Numerical(
            "non-positive determinant in the ratio form".into(),
        ));
    }
    let ratio_form_nats = 0.5 * ratio_det.ln();
    if (difference_form - ratio_form_nats).abs() > FORM_AGREEMENT_TOL * difference_form.abs().max(1.0) {
        return Err(Error::Numerical(format!(
            "capacity forms disagree: {difference_form} vs {ratio_form_nats}"
        )));
    }

    let (capacity_nats, status, ensemble, threshold_ok) = if degenerate {
        let ensemble = OptimalEnsemble {
            coherent_covariance: alpha_opt.clone(),
            mean_covariance: Matrix::zeros(dim, dim),
        };
        (0.0, CapacityStatus::Exact, Some(ensemble), true)
    } else if threshold_ok {
        let ensemble = optimal_ensemble(&alpha_opt, beta, space)?;
        // Nonnegative in exact arithmetic since alpha_E >= vac.
        (
            difference_form.max(0.0),
            CapacityStatus::Exact,
            Some(ensemble),
            true,
        )
    } else {
        (difference_form, CapacityStatus::UpperBoundOnly, None, false)
    };

    Ok(CapacityResult {
        alpha_opt,
        threshold_ok,
        capacity_nats,
        capacity_bits: capacity_nats / LN_2,
        status,
        ensemble,
        e_min: ground.e_min,
        j_beta,
        noise_vacuum: vac,
        logdet_out,
        logdet_min,
        ratio_form_nats,
        degenerate,
    })
}

/// Maximal output entropy minus minimal output entropy, via differential
/// entropies rather than log-determinants.
pub fn entropy_gap_nats(result: &CapacityResult, beta: &CovarianceMatrix) -> Result<f64> {
    let h_max = channel::gaussian_differential_entropy(&(result.alpha_opt.matrix() + beta.matrix()))?;
    let h_min = channel::gaussian_differential_entropy(&(result.noise_vacuum.matrix() + beta.matrix()))?;
    Ok(h_max - h_min)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeterodyneCapacity {
    pub capacity_nats: f64,
    pub threshold_bound: f64,
}

/// `(1/2)(max{sqrt(b1/b2), sqrt(b2/b1)} + |b2 - b1|)`.
pub fn heterodyne_threshold_bound(beta1: f64, beta2: f64) -> f64 {
    let ratio = (beta1 / beta2).sqrt().max((beta2 / beta1).sqrt());
    0.5 * (ratio + (beta2 - beta1).abs())
}

/// Single mode, `epsilon = I/2`, noise `diag(beta1, beta2)`:
/// `C = log((2E + beta1 + beta2) / (2 sqrt(beta1 beta2) + 1))`.
pub fn heterodyne_closed_form(beta1: f64, beta2: f64, energy: f64) -> Result<HeterodyneCapacity> {
    if !(beta1 > 0.0 && beta2 > 0.0) || !beta1.is_finite() || !beta2.is_finite() {
        return invalid("noise variances must be positive and finite");
    }
    if beta1 * beta2 < 0.25 * (1.0 - 1e-12) {
        return Err(Error::Uncertainty {
            min_value: (beta1 * beta2).sqrt(),
        });
    }
    let threshold_bound = heterodyne_threshold_bound(beta1, beta2);
    if energy < threshold_bound - 1e-12 * threshold_bound.max(1.0) {
        return Err(Error::Threshold(format!(
            "energy {energy} is below the threshold bound {threshold_bound}"
        )));
    }
    let capacity_nats = ((2.0 * energy + beta1 + beta2) / (2.0 * (beta1 * beta2).sqrt() + 1.0)).ln();
    Ok(HeterodyneCapacity {
        capacity_nats,
        threshold_bound,
    })
}
