//! Monte Carlo simulation of the measurement channel on input ensembles,
//! with mutual-information estimators to check analytic capacities.

pub mod estimators;

use crate::capacity::OptimalEnsemble;
use crate::channel::{GaussianMeasurement, GaussianSampler, GaussianState, NormalStream};
use crate::error::{invalid, Result};
use crate::linalg::{self, Matrix, Vector};
use crate::symplectic::{self, CovarianceMatrix, SymplecticSpace};

pub use estimators::{
    build_estimator, estimate_with_stderr, estimator_names, mi_binned, mi_plugin, BinnedEstimator,
    MiEstimate, MiEstimator, PluginEstimator,
};

/// Coherent states `D(z) rho_0 D(z)*` with `z ~ N(0, mean_covariance)`.
#[derive(Debug, Clone)]
pub struct GaussianCoherentEnsemble {
    coherent_covariance: CovarianceMatrix,
    mean_covariance: Matrix,
}

impl GaussianCoherentEnsemble {
    pub fn new(
        coherent_covariance: CovarianceMatrix,
        mean_covariance: Matrix,
        space: &SymplecticSpace,
    ) -> Result<Self> {
        space.check_dim(&mean_covariance, "mean covariance")?;
        if !symplectic::symplectic_spectrum(&coherent_covariance, space)?.pure {
            return invalid("coherent-state covariance is not pure");
        }
        let scale = linalg::frobenius(&mean_covariance).max(1.0);
        if !linalg::is_symmetric(&mean_covariance, symplectic::SYMMETRY_TOL * scale)
            || linalg::min_eigenvalue(&mean_covariance) < -1e-9 * scale
        {
            return invalid("mean covariance is not symmetric positive semidefinite");
        }
        Ok(Self {
            coherent_covariance,
            mean_covariance: linalg::symmetrize(&mean_covariance),
        })
    }

    pub fn from_optimal(e: &OptimalEnsemble, space: &SymplecticSpace) -> Result<Self> {
        Self::new(e.coherent_covariance.clone(), e.mean_covariance.clone(), space)
    }

    pub fn coherent_covariance(&self) -> &CovarianceMatrix {
        &self.coherent_covariance
    }

    pub fn mean_covariance(&self) -> &Matrix {
        &self.mean_covariance
    }

    /// Same coherent states with the displacement covariance scaled.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            coherent_covariance: self.coherent_covariance.clone(),
            mean_covariance: &self.mean_covariance * factor,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DiscreteEnsemble {
    entries: Vec<(f64, GaussianState)>,
}

impl DiscreteEnsemble {
    pub fn new(entries: Vec<(f64, GaussianState)>) -> Result<Self> {
        if entries.is_empty() {
            return invalid("discrete ensemble is empty");
        }
        if entries.iter().any(|(w, _)| !(*w > 0.0) || !w.is_finite()) {
            return invalid("ensemble weights must be positive");
        }
        let total: f64 = entries.iter().map(|(w, _)| w).sum();
        if (total - 1.0).abs() > 1e-12 {
            return invalid(format!("ensemble weights sum to {total}, not 1"));
        }
        let dim = entries[0].1.mean.len();
        if entries.iter().any(|(_, s)| s.mean.len() != dim) {
            return invalid("ensemble states have different dimensions");
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[(f64, GaussianState)] {
        &self.entries
    }

    /// Shannon entropy of the weights, in nats.
    pub fn input_entropy(&self) -> f64 {
        -self.entries.iter().map(|(w, _)| w * w.ln()).sum::<f64>()
    }
}

#[derive(Debug, Clone, Copy)]
pub enum Ensemble<'a> {
    Gaussian(&'a GaussianCoherentEnsemble),
    Discrete(&'a DiscreteEnsemble),
}

/// Paired channel inputs and outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSamples {
    /// Displacement (state mean) of each input.
    pub inputs: Vec<Vector>,
    /// Ensemble member index, for discrete ensembles.
    pub input_index: Option<Vec<usize>>,
    pub outputs: Vec<Vector>,
    /// Maps an input displacement to its mean outcome (`K^{-1}`).
    pub signal_map: Matrix,
    pub seed: u64,
}

impl ChannelSamples {
    pub fn len(&self) -> usize {
        self.outputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outputs.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.outputs.first().map_or(0, |v| v.len())
    }

    /// `outputs - signal_map * inputs`.
    pub fn residuals(&self) -> Vec<Vector> {
        self.inputs
            .iter()
            .zip(&self.outputs)
            .map(|(z, w)| w - &self.signal_map * z)
            .collect()
    }

    /// Relabels outcomes by the linear bijection `u = map w`.
    pub fn pushforward(&self, map: &Matrix) -> Self {
        Self {
            inputs: self.inputs.clone(),
            input_index: self.input_index.clone(),
            outputs: self.outputs.iter().map(|w| map * w).collect(),
            signal_map: map * &self.signal_map,
            seed: self.seed,
        }
    }

    /// Contiguous sub-sample `[start, end)`.
    pub fn slice(&self, start: usize, end: usize) -> Self {
        Self {
            inputs: self.inputs[start..end].to_vec(),
            input_index: self.input_index.as_ref().map(|ix| ix[start..end].to_vec()),
            outputs: self.outputs[start..end].to_vec(),
            signal_map: self.signal_map.clone(),
            seed: self.seed,
        }
    }
}

/// Draws `n` (input, output) pairs; stream 0 drives inputs, stream 1 noise.
pub fn simulate_ensemble(
    ensemble: Ensemble<'_>,
    m: &GaussianMeasurement,
    n: usize,
    seed: u64,
) -> Result<ChannelSamples> {
    if n == 0 {
        return invalid("sample count must be at least 1");
    }
    let dim = m.k_matrix().nrows();
    let signal_map = if m.is_canonical() {
        Matrix::identity(dim, dim)
    } else {
        linalg::inverse(m.k_matrix())?
    };
    let mut input_stream = NormalStream::new(seed, 0);
    let mut noise_stream = NormalStream::new(seed, 1);
    let mut inputs = Vec::with_capacity(n);
    let mut outputs = Vec::with_capacity(n);

    let input_index = match ensemble {
        Ensemble::Gaussian(e) => {
            if e.mean_covariance.nrows() != dim {
                return invalid("ensemble and measurement dimensions differ");
            }
            let displacement = GaussianSampler::centered(&e.mean_covariance);
            let noise = GaussianSampler::centered(&(e.coherent_covariance.matrix() + m.beta().matrix()));
            for _ in 0..n {
                let z = displacement.draw(&mut input_stream);
                let w = &signal_map * (&z + noise.draw(&mut noise_stream));
                inputs.push(z);
                outputs.push(w);
            }
            None
        }
        Ensemble::Discrete(e) => {
            if e.entries[0].1.mean.len() != dim {
                return invalid("ensemble and measurement dimensions differ");
            }
            let noises: Vec<GaussianSampler> = e
                .entries
                .iter()
                .map(|(_, s)| GaussianSampler::centered(&(s.covariance.matrix() + m.beta().matrix())))
                .collect();
            let mut cumulative = Vec::with_capacity(e.entries.len());
            let mut acc = 0.0;
            for (w, _) in &e.entries {
                acc += w;
                cumulative.push(acc);
            }
            let mut index = Vec::with_capacity(n);
            for _ in 0..n {
                let u = input_stream.next_uniform() * acc;
                let i = cumulative.partition_point(|&c| c <= u).min(e.entries.len() - 1);
                let z = e.entries[i].1.mean.clone();
                let w = &signal_map * (&z + noises[i].draw(&mut noise_stream));
                index.push(i);
                inputs.push(z);
                outputs.push(w);
            }
            Some(index)
        }
    };

    Ok(ChannelSamples {
        inputs,
        input_index,
        outputs,
        signal_map,
        seed,
    })
}

/// Both sides of `h(p) = -h(p || p_H) + theta E_p[H_c] + log m` for
/// `p = N(0, sigma)`, `H_c(z) = zᵗ hc z / 2`, `p_H = exp(-theta H_c) / m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyDecomposition {
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
    pub relative_entropy: f64,
    pub mean_energy_term: f64,
    pub log_normalizer: f64,
}

pub fn entropy_decomposition_check(
    sigma: &Matrix,
    hc_matrix: &Matrix,
    theta: f64,
) -> Result<EntropyDecomposition> {
    if !(theta > 0.0) || !theta.is_finite() {
        return invalid("theta must be positive");
    }
    if sigma.shape() != hc_matrix.shape() || !sigma.is_square() {
        return invalid("sigma and hc_matrix must be square of equal size");
    }
    let d = sigma.nrows() as f64;
    let lhs = crate::channel::gaussian_differential_entropy(sigma)?;

    // p_H = N(0, (theta hc)^{-1}).
    let precision = hc_matrix * theta;
    let logdet_precision = linalg::logdet_pd(&precision)?;
    let logdet_sigma = linalg::logdet_pd(sigma)?;
    let relative_entropy = 0.5 * ((&precision * sigma).trace() - d - logdet_precision - logdet_sigma);
    let mean_energy_term = theta * 0.5 * (hc_matrix * sigma).trace();
    let log_normalizer = 0.5 * d * (2.0 * std::f64::consts::PI).ln() - 0.5 * logdet_precision;
    let rhs = -relative_entropy + mean_energy_term + log_normalizer;
    Ok(EntropyDecomposition {
        lhs,
        rhs,
        gap: (lhs - rhs).abs(),
        relative_entropy,
        mean_energy_term,
        log_normalizer,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::build_symplectic_form;
    use std::f64::consts::{LN_2, PI};

    fn vacuum_measurement(sp: &SymplecticSpace) -> GaussianMeasurement {
        GaussianMeasurement::canonical(CovarianceMatrix::vacuum(sp), sp).unwrap()
    }

    #[test]
    fn simulation_is_deterministic() {
        let sp = build_symplectic_form(1).unwrap();
        let e = GaussianCoherentEnsemble::new(CovarianceMatrix::vacuum(&sp), Matrix::identity(2, 2), &sp)
            .unwrap();
        let m = vacuum_measurement(&sp);
        let a = simulate_ensemble(Ensemble::Gaussian(&e), &m, 500, 9).unwrap();
        let b = simulate_ensemble(Ensemble::Gaussian(&e), &m, 500, 9).unwrap();
        assert_eq!(a, b);
        assert!(simulate_ensemble(Ensemble::Gaussian(&e), &m, 0, 9).is_err());
    }

    #[test]
    fn optimal_ensemble_moments() {
        let sp = build_symplectic_form(1).unwrap();
        let e = GaussianCoherentEnsemble::new(CovarianceMatrix::vacuum(&sp), Matrix::identity(2, 2), &sp)
            .unwrap();
        let s = simulate_ensemble(Ensemble::Gaussian(&e), &vacuum_measurement(&sp), 100_000, 3).unwrap();
        let out = linalg::sample_covariance(&s.outputs).unwrap();
        let two_i = Matrix::identity(2, 2) * 2.0;
        assert!((&out - &two_i).norm() < 0.03 * two_i.norm());
        let res = linalg::sample_covariance(&s.residuals()).unwrap();
        let id = Matrix::identity(2, 2);
        assert!((&res - &id).norm() < 0.03 * id.norm());
    }

    #[test]
    fn ensemble_validation() {
        let sp = build_symplectic_form(1).unwrap();
        let mixed = CovarianceMatrix::from_row_major(2, &[1.0, 0.0, 0.0, 1.0]).unwrap();
        assert!(GaussianCoherentEnsemble::new(mixed, Matrix::identity(2, 2), &sp).is_err());
        assert!(
            GaussianCoherentEnsemble::new(CovarianceMatrix::vacuum(&sp), -Matrix::identity(2, 2), &sp)
                .is_err()
        );

        let st = GaussianState::centered(CovarianceMatrix::vacuum(&sp), &sp).unwrap();
        assert!(DiscreteEnsemble::new(vec![]).is_err());
        assert!(DiscreteEnsemble::new(vec![(0.5, st.clone())]).is_err());
        assert!(DiscreteEnsemble::new(vec![(1.5, st.clone()), (-0.5, st.clone())]).is_err());
        assert!(DiscreteEnsemble::new(vec![(1.0, st)]).is_ok());
    }

    #[test]
    fn discrete_simulation_respects_weights() {
        let sp = build_symplectic_form(1).unwrap();
        let vac = CovarianceMatrix::vacuum(&sp);
        let a = GaussianState::new(Vector::from_vec(vec![1.0, 0.0]), vac.clone(), &sp).unwrap();
        let b = GaussianState::new(Vector::from_vec(vec![-1.0, 0.0]), vac, &sp).unwrap();
        let e = DiscreteEnsemble::new(vec![(0.25, a), (0.75, b)]).unwrap();
        let s = simulate_ensemble(Ensemble::Discrete(&e), &vacuum_measurement(&sp), 40_000, 1).unwrap();
        let idx = s.input_index.as_ref().unwrap();
        let frac = idx.iter().filter(|&&i| i == 0).count() as f64 / idx.len() as f64;
        assert!((frac - 0.25).abs() < 3.0 * (0.25f64 * 0.75 / 40_000.0).sqrt() * 1.5);
        assert!((e.input_entropy() - (-(0.25f64 * 0.25f64.ln() + 0.75 * 0.75f64.ln()))).abs() < 1e-15);
    }

    #[test]
    fn entropy_decomposition_hand_case() {
        let id = Matrix::identity(2, 2);
        let r = entropy_decomposition_check(&id, &id, 0.5).unwrap();
        let expected = 1.0 + LN_2 + PI.ln();
        assert!((r.lhs - expected).abs() < 1e-14);
        assert!((r.rhs - expected).abs() < 1e-14);
        assert!(r.gap <= 1e-12);
        assert!((r.relative_entropy - (4f64.ln() - 1.0) / 2.0).abs() < 1e-15);
        assert!((r.mean_energy_term - 0.5).abs() < 1e-15);
        assert!((r.log_normalizer - (4.0 * PI).ln()).abs() < 1e-14);
    }

    #[test]
    fn entropy_decomposition_matched_case() {
        // sigma = (theta hc)^{-1} makes p equal to p_H.
        let hc = linalg::from_row_major(2, 2, &[2.0, 0.5, 0.5, 1.0]).unwrap();
        let theta = 0.8;
        let sigma = linalg::inverse(&(&hc * theta)).unwrap();
        let r = entropy_decomposition_check(&sigma, &hc, theta).unwrap();
        assert!(r.relative_entropy.abs() < 1e-14);
        assert!((r.lhs - (r.mean_energy_term + r.log_normalizer)).abs() < 1e-13);
    }

    #[test]
    fn entropy_decomposition_rejects_bad_inputs() {
        let id = Matrix::identity(2, 2);
        assert!(entropy_decomposition_check(&id, &id, 0.0).is_err());
        assert!(entropy_decomposition_check(&(-&id), &id, 1.0).is_err());
        assert!(entropy_decomposition_check(&id, &(-&id), 1.0).is_err());
    }
}
