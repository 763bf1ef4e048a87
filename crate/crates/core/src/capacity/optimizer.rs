//! Maximizers of `log det(alpha + beta)` over quantum covariances with
//! bounded energy `Sp(epsilon alpha) <= E`.
//!
//! Strategies are registered by name and selected at runtime:
//!
//! | name          | method                                                    |
//! |---------------|-----------------------------------------------------------|
//! | `water-filling` | stationarity closed form; fails if not a valid covariance |
//! | `barrier`     | log-barrier Newton method on the full constraint set      |
//! | `auto`        | closed form, falling back to `barrier`                    |

use std::collections::BTreeMap;

use nalgebra::Complex;
use once_cell::sync::Lazy;

use super::{min_energy, EnergyConstraint};
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, Vector};
use crate::symplectic::{self, CovarianceMatrix, SymplecticSpace};

type CMatrix = nalgebra::DMatrix<Complex<f64>>;

pub trait CovarianceOptimizer: Send + Sync {
    fn name(&self) -> &'static str;

    fn maximize(
        &self,
        constraint: &EnergyConstraint,
        beta: &CovarianceMatrix,
        space: &SymplecticSpace,
    ) -> Result<CovarianceMatrix>;
}

type Constructor = fn() -> Box<dyn CovarianceOptimizer>;

static REGISTRY: Lazy<BTreeMap<&'static str, Constructor>> = Lazy::new(|| {
    let mut m: BTreeMap<&'static str, Constructor> = BTreeMap::new();
    m.insert("water-filling", || Box::new(WaterFilling));
    m.insert("barrier", || Box::new(BarrierMethod::default()));
    m.insert("auto", || Box::new(Auto::default()));
    m
});

pub fn optimizer_names() -> Vec<&'static str> {
    REGISTRY.keys().copied().collect()
}

pub fn build_optimizer(name: &str) -> Result<Box<dyn CovarianceOptimizer>> {
    REGISTRY.get(name).map(|ctor| ctor()).ok_or_else(|| {
        Error::InvalidInput(format!(
            "unknown optimizer '{name}' (available: {})",
            optimizer_names().join(", ")
        ))
    })
}

/// `alpha = epsilon^{-1} (E + Sp(epsilon beta)) / 2s - beta`, from
/// `(alpha + beta)^{-1} = lambda epsilon` with the trace constraint active.
pub fn water_filling_candidate(
    constraint: &EnergyConstraint,
    beta: &CovarianceMatrix,
    space: &SymplecticSpace,
) -> Result<Matrix> {
    let eps = constraint.epsilon();
    let eps_inv = linalg::inverse(eps)?;
    let level = (constraint.energy() + (eps * beta.matrix()).trace()) / space.dim() as f64;
    Ok(linalg::symmetrize(&(eps_inv * level - beta.matrix())))
}

#[derive(Debug, Clone, Copy, Default)]
pub struct WaterFilling;

impl CovarianceOptimizer for WaterFilling {
    fn name(&self) -> &'static str {
        "water-filling"
    }

    fn maximize(
        &self,
        constraint: &EnergyConstraint,
        beta: &CovarianceMatrix,
        space: &SymplecticSpace,
    ) -> Result<CovarianceMatrix> {
        let alpha = CovarianceMatrix::new(water_filling_candidate(constraint, beta, space)?)?;
        let psd = linalg::min_eigenvalue(alpha.matrix()) >= 0.0;
        if !psd || !symplectic::symplectic_spectrum(&alpha, space)?.valid {
            return Err(Error::Numerical(
                "water-filling candidate violates the uncertainty relation".into(),
            ));
        }
        Ok(alpha)
    }
}

/// Log-barrier interior-point method.
///
/// Minimizes `-t log det(alpha + beta) - log det(alpha + (i/2) Delta)`
/// subject to `Sp(epsilon alpha) = E` with equality-constrained Newton
/// steps, for an increasing sequence of `t`.
#[derive(Debug, Clone)]
pub struct BarrierMethod {
    pub t0: f64,
    pub growth: f64,
    /// Stop once the barrier suboptimality bound `2s / t` drops below this.
    pub gap_tol: f64,
    pub newton_tol: f64,
    pub max_iterations: usize,
}

impl Default for BarrierMethod {
    fn default() -> Self {
        Self {
            t0: 1.0,
            growth: 10.0,
            gap_tol: 1e-11,
            newton_tol: 1e-12,
            max_iterations: 10_000,
        }
    }
}

/// Coordinates of a symmetric matrix: the upper triangle, with each
/// off-diagonal basis element `e_a e_bᵗ + e_b e_aᵗ`.
struct SymCoords {
    pairs: Vec<(usize, usize)>,
    dim: usize,
}

impl SymCoords {
    fn new(dim: usize) -> Self {
        let pairs = (0..dim).flat_map(|a| (a..dim).map(move |b| (a, b))).collect();
        Self { pairs, dim }
    }

    fn len(&self) -> usize {
        self.pairs.len()
    }

    fn to_matrix(&self, x: &Vector) -> Matrix {
        let mut m = Matrix::zeros(self.dim, self.dim);
        for (k, &(a, b)) in self.pairs.iter().enumerate() {
            m[(a, b)] = x[k];
            m[(b, a)] = x[k];
        }
        m
    }

    fn coords_of(&self, m: &Matrix) -> Vector {
        Vector::from_iterator(self.len(), self.pairs.iter().map(|&(a, b)| m[(a, b)]))
    }

    /// `tr(G E_k)` for each basis element.
    fn pair_with(&self, g: &Matrix) -> Vector {
        Vector::from_iterator(
            self.len(),
            self.pairs
                .iter()
                .map(|&(a, b)| if a == b { g[(a, a)] } else { g[(a, b)] + g[(b, a)] }),
        )
    }

    fn entries(&self, k: usize) -> ([(usize, usize); 2], usize) {
        let (a, b) = self.pairs[k];
        if a == b {
            ([(a, a), (a, a)], 1)
        } else {
            ([(a, b), (b, a)], 2)
        }
    }

    /// Adds `scale * Re tr(W E_k W E_l)` to `hess`.
    fn add_hessian<T: Copy>(
        &self,
        w: &nalgebra::DMatrix<T>,
        scale: f64,
        re: impl Fn(T, T) -> f64,
        hess: &mut Matrix,
    ) {
        let n = self.len();
        for k in 0..n {
            let (ek, nk) = self.entries(k);
            for l in k..n {
                let (el, nl) = self.entries(l);
                let mut acc = 0.0;
                for &(a, b) in &ek[..nk] {
                    for &(c, d) in &el[..nl] {
                        // tr(W e_a e_bᵗ W e_c e_dᵗ) = W[d, a] W[b, c]
                        acc += re(w[(d, a)], w[(b, c)]);
                    }
                }
                hess[(k, l)] += scale * acc;
                if l != k {
                    hess[(l, k)] += scale * acc;
                }
            }
        }
    }
}

fn hermitian_constraint(alpha: &Matrix, space: &SymplecticSpace) -> CMatrix {
    let delta = space.delta();
    CMatrix::from_fn(alpha.nrows(), alpha.ncols(), |i, j| {
        Complex::new(alpha[(i, j)], 0.5 * delta[(i, j)])
    })
}

/// `log det` of a Hermitian positive definite matrix, `None` if not PD.
fn logdet_hermitian(m: &CMatrix) -> Option<f64> {
    let chol = m.clone().cholesky()?;
    Some(2.0 * chol.l().diagonal().iter().map(|d| d.re.ln()).sum::<f64>())
}

fn logdet_real(m: &Matrix) -> Option<f64> {
    let chol = m.clone().cholesky()?;
    Some(2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>())
}

struct BarrierProblem<'a> {
    coords: SymCoords,
    beta: &'a Matrix,
    space: &'a SymplecticSpace,
}

impl BarrierProblem<'_> {
    /// Barrier objective at `x`, `None` outside the domain.
    fn value(&self, x: &Vector, t: f64) -> Option<f64> {
        let alpha = self.coords.to_matrix(x);
        let out = logdet_real(&(&alpha + self.beta))?;
        let cone = logdet_hermitian(&hermitian_constraint(&alpha, self.space))?;
        Some(-t * out - cone)
    }

    fn gradient_hessian(&self, x: &Vector, t: f64) -> Result<(Vector, Matrix)> {
        let alpha = self.coords.to_matrix(x);
        let b = linalg::inverse(&(&alpha + self.beta))?;
        let w = hermitian_constraint(&alpha, self.space)
            .try_inverse()
            .ok_or_else(|| Error::Numerical("singular constraint matrix".into()))?;
        let w_re = w.map(|z| z.re);
        let grad = -(self.coords.pair_with(&b) * t) - self.coords.pair_with(&w_re);
        let n = self.coords.len();
        let mut hess = Matrix::zeros(n, n);
        self.coords.add_hessian(&b, t, |p, q| p * q, &mut hess);
        self.coords
            .add_hessian(&w, 1.0, |p: Complex<f64>, q| (p * q).re, &mut hess);
        Ok((grad, hess))
    }
}

impl BarrierMethod {
    fn solve(
        &self,
        constraint: &EnergyConstraint,
        beta: &CovarianceMatrix,
        space: &SymplecticSpace,
    ) -> Result<CovarianceMatrix> {
        let ground = min_energy(constraint.epsilon(), space)?;
        let dim = space.dim();
        let slack = constraint.energy() - ground.e_min;
        if slack <= super::feasibility_margin(ground.e_min) {
            return Ok(ground.ground_covariance);
        }
        // Strictly feasible start: ground state plus an epsilon^{-1} push.
        let eps_inv = linalg::inverse(constraint.epsilon())?;
        let start = ground.ground_covariance.matrix() + &eps_inv * (slack / dim as f64);

        let problem = BarrierProblem {
            coords: SymCoords::new(dim),
            beta: beta.matrix(),
            space,
        };
        let n = problem.coords.len();
        let a = problem.coords.pair_with(constraint.epsilon());
        let mut x = problem.coords.coords_of(&start);
        let mut t = self.t0;
        let mut iterations = 0;

        loop {
            loop {
                iterations += 1;
                if iterations > self.max_iterations {
                    return Err(Error::NonConvergence(format!(
                        "barrier method exceeded {} Newton iterations (t = {t:.3e})",
                        self.max_iterations
                    )));
                }
                let (grad, hess) = problem.gradient_hessian(&x, t)?;
                let mut kkt = Matrix::zeros(n + 1, n + 1);
                kkt.view_mut((0, 0), (n, n)).copy_from(&hess);
                kkt.view_mut((0, n), (n, 1)).copy_from(&a);
                kkt.view_mut((n, 0), (1, n)).copy_from(&a.transpose());
                let mut rhs = Vector::zeros(n + 1);
                rhs.rows_mut(0, n).copy_from(&(-&grad));
                let sol = kkt
                    .lu()
                    .solve(&rhs)
                    .ok_or_else(|| Error::Numerical("singular KKT system".into()))?;
                let step = sol.rows(0, n).into_owned();
                let decrement = -grad.dot(&step);
                if decrement / 2.0 <= self.newton_tol {
                    break;
                }
                let f0 = problem
                    .value(&x, t)
                    .ok_or_else(|| Error::Numerical("iterate left the feasible set".into()))?;
                let mut s = 1.0;
                let mut progressed = false;
                while s >= 1e-16 {
                    let trial = &x + &step * s;
                    if let Some(f) = problem.value(&trial, t) {
                        if f <= f0 - 0.25 * s * decrement {
                            progressed = f < f0;
                            x = trial;
                            break;
                        }
                    }
                    s *= 0.5;
                }
                if !progressed {
                    // Centered to working precision at this t.
                    break;
                }
            }
            if dim as f64 / t <= self.gap_tol {
                break;
            }
            t *= self.growth;
        }

        let mut alpha = problem.coords.to_matrix(&x);
        // Remove accumulated drift off the trace hyperplane.
        let drift = constraint.energy() - (constraint.epsilon() * &alpha).trace();
        if drift.abs() > 1e-12 * constraint.energy().max(1.0) {
            return Err(Error::NonConvergence(format!(
                "energy constraint violated by {drift:.3e}"
            )));
        }
        alpha += &eps_inv * (drift / dim as f64);
        CovarianceMatrix::new(alpha)
    }
}

impl CovarianceOptimizer for BarrierMethod {
    fn name(&self) -> &'static str {
        "barrier"
    }

    fn maximize(
        &self,
        constraint: &EnergyConstraint,
        beta: &CovarianceMatrix,
        space: &SymplecticSpace,
    ) -> Result<CovarianceMatrix> {
        self.solve(constraint, beta, space)
    }
}

#[derive(Debug, Clone, Default)]
pub struct Auto {
    pub fallback: BarrierMethod,
}

impl CovarianceOptimizer for Auto {
    fn name(&self) -> &'static str {
        "auto"
    }

    fn maximize(
        &self,
        constraint: &EnergyConstraint,
        beta: &CovarianceMatrix,
        space: &SymplecticSpace,
    ) -> Result<CovarianceMatrix> {
        match WaterFilling.maximize(constraint, beta, space) {
            Ok(alpha) => Ok(alpha),
            Err(Error::Numerical(_)) => self.fallback.maximize(constraint, beta, space),
            Err(e) => Err(e),
        }
    }
}
