//! Symplectic linear algebra on phase space `Z = R^{2s}`.
//!
//! Covariance matrices follow the `hbar = 1` convention: the vacuum of a
//! single mode is `I/2`, and a real symmetric `alpha` is a quantum
//! covariance iff `alpha + (i/2) Delta >= 0`, i.e. iff every symplectic
//! eigenvalue is at least `1/2`.

use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};
use crate::linalg::{self, Matrix, Vector};

/// Relative tolerance for validity and purity of symplectic spectra.
pub const SPECTRUM_TOL: f64 = 1e-9;
/// Relative tolerance for the symmetry check on covariance inputs.
pub const SYMMETRY_TOL: f64 = 1e-10;
/// Relative tolerance used when checking complex-structure identities.
pub const STRUCTURE_TOL: f64 = 1e-9;
/// Relative gap below which squared symplectic eigenvalues are treated
/// as one degenerate cluster.
const CLUSTER_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticSpace {
    modes: usize,
    delta: Matrix,
}

impl SymplecticSpace {
    /// Block-diagonal form with `modes` copies of `[[0, 1], [-1, 0]]`.
    pub fn new(modes: usize) -> Result<Self> {
        if modes == 0 {
            return invalid("number of modes must be at least 1");
        }
        let dim = 2 * modes;
        let mut delta = Matrix::zeros(dim, dim);
        for j in 0..modes {
            delta[(2 * j, 2 * j + 1)] = 1.0;
            delta[(2 * j + 1, 2 * j)] = -1.0;
        }
        Ok(Self { modes, delta })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    /// Phase-space dimension `2s`.
    pub fn dim(&self) -> usize {
        2 * self.modes
    }

    pub fn delta(&self) -> &Matrix {
        &self.delta
    }

    /// `Delta^{-1} = -Delta`.
    pub fn delta_inv(&self) -> Matrix {
        -&self.delta
    }

    pub(crate) fn check_dim(&self, m: &Matrix, what: &str) -> Result<()> {
        if m.nrows() != self.dim() || m.ncols() != self.dim() {
            return invalid(format!(
                "{what} is {}x{}, expected {}x{}",
                m.nrows(),
                m.ncols(),
                self.dim(),
                self.dim()
            ));
        }
        Ok(())
    }
}

/// Real symmetric `2s x 2s` matrix of second moments.
///
/// Construction only checks symmetry; quantum validity is a property
/// reported by [`symplectic_spectrum`].
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix(Matrix);

impl CovarianceMatrix {
    pub fn new(m: Matrix) -> Result<Self> {
        if !m.is_square() || m.nrows() % 2 != 0 || m.nrows() == 0 {
            return invalid(format!(
                "covariance must be a non-empty square matrix of even size, got {}x{}",
                m.nrows(),
                m.ncols()
            ));
        }
        if m.iter().any(|x| !x.is_finite()) {
            return invalid("covariance has non-finite entries");
        }
        let scale = linalg::frobenius(&m).max(f64::MIN_POSITIVE);
        if !linalg::is_symmetric(&m, SYMMETRY_TOL * scale) {
            return invalid("covariance matrix is not symmetric");
        }
        Ok(Self(linalg::symmetrize(&m)))
    }

    pub fn from_row_major(dim: usize, data: &[f64]) -> Result<Self> {
        Self::new(linalg::from_row_major(dim, dim, data)?)
    }

    /// `(1/2) I`, the vacuum of the standard complex structure.
    pub fn vacuum(space: &SymplecticSpace) -> Self {
        Self(Matrix::identity(space.dim(), space.dim()) * 0.5)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    /// Symplectic congruence `Sᵗ alpha S`.
    pub fn congruence(&self, s: &Matrix) -> Self {
        Self(linalg::symmetrize(&(s.transpose() * &self.0 * s)))
    }
}

/// Operator `J` with `J² = -I` and `Delta J` symmetric positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexStructure(Matrix);

impl ComplexStructure {
    /// Validates the complex-structure identities before wrapping `m`.
    pub fn new(m: Matrix, space: &SymplecticSpace) -> Result<Self> {
        space.check_dim(&m, "complex structure")?;
        let dim = space.dim();
        let scale = linalg::frobenius(&m).max(1.0);
        let sq = &m * &m + Matrix::identity(dim, dim);
        if sq.norm() > STRUCTURE_TOL * scale * scale {
            return invalid("J² != -I");
        }
        let dj = space.delta() * &m;
        if !linalg::is_symmetric(&dj, STRUCTURE_TOL * scale) {
            return invalid("Delta J is not symmetric");
        }
        if linalg::min_eigenvalue(&dj) < -STRUCTURE_TOL * scale {
            return invalid("Delta J is not positive semidefinite");
        }
        Ok(Self(m))
    }

    /// The standard structure `Delta^{-1}` whose vacuum is `I/2`.
    pub fn standard(space: &SymplecticSpace) -> Self {
        Self(space.delta_inv())
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticSpectrum {
    /// One value per mode, sorted descending.
    pub values: Vec<f64>,
    pub valid: bool,
    pub pure: bool,
}

impl SymplecticSpectrum {
    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone)]
pub struct SymplecticBasisDecomposition {
    pub e_vectors: Vec<Vector>,
    pub h_vectors: Vec<Vector>,
    /// Symplectic eigenvalues, sorted descending, paired with the vectors.
    pub values: Vec<f64>,
}

pub fn build_symplectic_form(modes: usize) -> Result<SymplecticSpace> {
    SymplecticSpace::new(modes)
}

/// `alpha^{1/2} Delta^{-1} alpha^{1/2}`: antisymmetric, similar to
/// `Delta^{-1} alpha` when `alpha` is invertible.
fn symmetrized_generator(sqrt_alpha: &Matrix, space: &SymplecticSpace) -> Matrix {
    let g = sqrt_alpha * space.delta_inv() * sqrt_alpha;
    (&g - g.transpose()) * 0.5
}

fn check_psd(alpha: &CovarianceMatrix) -> Result<()> {
    let scale = linalg::frobenius(alpha.matrix()).max(f64::MIN_POSITIVE);
    if linalg::min_eigenvalue(alpha.matrix()) < -SYMMETRY_TOL * scale {
        return invalid("covariance matrix is not positive semidefinite");
    }
    Ok(())
}

fn check_pd(alpha: &CovarianceMatrix) -> Result<()> {
    let scale = linalg::frobenius(alpha.matrix()).max(f64::MIN_POSITIVE);
    if linalg::min_eigenvalue(alpha.matrix()) <= 1e-14 * scale {
        return invalid("covariance matrix is singular or not positive definite");
    }
    Ok(())
}

/// Moduli of the eigenvalues of `Delta^{-1} alpha`, one per mode.
pub fn symplectic_spectrum(alpha: &CovarianceMatrix, space: &SymplecticSpace) -> Result<SymplecticSpectrum> {
    space.check_dim(alpha.matrix(), "covariance")?;
    check_psd(alpha)?;
    let root = linalg::sqrt_psd(alpha.matrix());
    let gen = symmetrized_generator(&root, space);
    let (squares, _) = linalg::sorted_sym_eigen(&(gen.transpose() * &gen));
    // Eigenvalues of -gen² come in equal pairs.
    let mut values: Vec<f64> = (0..space.modes())
        .map(|j| (0.5 * (squares[2 * j] + squares[2 * j + 1])).max(0.0).sqrt())
        .collect();
    values.sort_by(|a, b| b.total_cmp(a));
    let tol = SPECTRUM_TOL * values[0].max(0.5);
    let valid = values.iter().all(|&v| v >= 0.5 - tol);
    let pure = values.iter().all(|&v| (v - 0.5).abs() <= tol);
    Ok(SymplecticSpectrum { values, valid, pure })
}

/// Checks `alpha + (i/2) Delta >= 0`, reporting the violation.
pub fn require_quantum_valid(alpha: &CovarianceMatrix, space: &SymplecticSpace) -> Result<()> {
    let spec = symplectic_spectrum(alpha, space)?;
    if spec.valid {
        Ok(())
    } else {
        Err(Error::Uncertainty {
            min_value: spec.min(),
        })
    }
}

/// Symplectic basis `{e_j, h_j}` of a positive definite covariance.
///
/// Within a degenerate eigenspace the vectors come from Gram-Schmidt on
/// the projected canonical coordinates, so the output does not depend on
/// the eigensolver's choice of basis.
pub fn symplectic_basis(
    alpha: &CovarianceMatrix,
    space: &SymplecticSpace,
) -> Result<SymplecticBasisDecomposition> {
    space.check_dim(alpha.matrix(), "covariance")?;
    check_pd(alpha)?;
    let dim = space.dim();
    let root = linalg::sqrt_psd(alpha.matrix());
    let root_inv = linalg::inverse(&root)?;
    let gen = symmetrized_generator(&root, space);
    let (squares, vectors) = linalg::sorted_sym_eigen(&(gen.transpose() * &gen));

    let scale = squares[dim - 1].max(f64::MIN_POSITIVE);
    let mut clusters: Vec<(usize, usize)> = Vec::new();
    let mut start = 0;
    for i in 1..=dim {
        if i == dim || squares[i] - squares[i - 1] > CLUSTER_TOL * scale {
            clusters.push((start, i));
            start = i;
        }
    }

    // (alpha_j, f_j, g_j) in the symmetrized frame.
    let mut pairs: Vec<(f64, Vector, Vector)> = Vec::with_capacity(space.modes());
    for &(lo, hi) in &clusters {
        let size = hi - lo;
        if size % 2 != 0 {
            return Err(Error::Numerical(format!(
                "odd-dimensional symplectic eigenspace (size {size}); spectrum too close to degenerate"
            )));
        }
        let basis = vectors.columns(lo, size);
        let projector = basis * basis.transpose();
        let mut chosen: Vec<Vector> = Vec::with_capacity(size);
        let mut k = 0;
        while chosen.len() < size {
            if k == dim {
                return Err(Error::Numerical(
                    "failed to span a degenerate symplectic eigenspace".into(),
                ));
            }
            let mut v = projector.column(k).into_owned();
            k += 1;
            for _ in 0..2 {
                for c in &chosen {
                    let proj = c.dot(&v);
                    v.axpy(-proj, c, 1.0);
                }
            }
            let norm = v.norm();
            if norm < 1e-6 {
                continue;
            }
            let f = v / norm;
            let gf = &gen * &f;
            let a = gf.norm();
            let mut g = gf / a;
            for c in &chosen {
                let proj = c.dot(&g);
                g.axpy(-proj, c, 1.0);
            }
            g.normalize_mut();
            chosen.push(f.clone());
            chosen.push(g.clone());
            pairs.push((a, f, g));
        }
    }
    pairs.sort_by(|x, y| y.0.total_cmp(&x.0));

    let mut decomposition = SymplecticBasisDecomposition {
        e_vectors: Vec::with_capacity(space.modes()),
        h_vectors: Vec::with_capacity(space.modes()),
        values: Vec::with_capacity(space.modes()),
    };
    for (a, f, g) in pairs {
        let w = a.sqrt();
        decomposition.e_vectors.push(&root_inv * f * w);
        decomposition.h_vectors.push(&root_inv * g * w);
        decomposition.values.push(a);
    }
    Ok(decomposition)
}

/// `J_alpha = (-A²)^{-1/2} A` with `A = Delta^{-1} alpha`, the orthogonal
/// polar factor of `A` in the `alpha` metric.
pub fn complex_structure(alpha: &CovarianceMatrix, space: &SymplecticSpace) -> Result<ComplexStructure> {
    require_quantum_valid(alpha, space)?;
    polar_structure(alpha, space)
}

/// The polar factor for any positive definite `alpha`. It is invariant
/// under rescaling `alpha`, so quantum validity is not required.
pub(crate) fn polar_structure(alpha: &CovarianceMatrix, space: &SymplecticSpace) -> Result<ComplexStructure> {
    space.check_dim(alpha.matrix(), "covariance")?;
    check_pd(alpha)?;
    let root = linalg::sqrt_psd(alpha.matrix());
    let root_inv = linalg::inverse(&root)?;
    let gen = symmetrized_generator(&root, space);
    let inv_abs = linalg::sym_fn(&(gen.transpose() * &gen), |x| 1.0 / x.sqrt());
    // In the symmetrized frame the polar factor is orthogonal and
    // antisymmetric; clean it up before mapping back.
    let polar = &inv_abs * &gen;
    let polar = (&polar - polar.transpose()) * 0.5;
    Ok(ComplexStructure(&root_inv * polar * &root))
}

/// `(1/2) Delta J`, the covariance of the `J`-vacuum.
pub fn pure_covariance(j: &ComplexStructure, space: &SymplecticSpace) -> Result<CovarianceMatrix> {
    space.check_dim(j.matrix(), "complex structure")?;
    let m = space.delta() * j.matrix() * 0.5;
    CovarianceMatrix::new(linalg::symmetrize(&m))
}

/// Random symplectic matrix `exp(Delta H)` with `H` a symmetric Gaussian
/// matrix of entry scale `scale`.
pub fn random_symplectic<R: Rng + ?Sized>(rng: &mut R, space: &SymplecticSpace, scale: f64) -> Matrix {
    let dim = space.dim();
    let raw = Matrix::from_fn(dim, dim, |_, _| rng.sample::<f64, _>(StandardNormal));
    let h = linalg::symmetrize(&raw) * scale;
    (space.delta() * h).exp()
}

/// Random quantum-valid covariance `Sᵗ diag(nu_j) S` with symplectic
/// eigenvalues `nu_j` drawn from `[1/2, 1/2 + spread]`.
pub fn random_valid_covariance<R: Rng + ?Sized>(
    rng: &mut R,
    space: &SymplecticSpace,
    spread: f64,
    squeeze: f64,
) -> CovarianceMatrix {
    let nus: Vec<f64> = (0..space.modes())
        .flat_map(|_| {
            let nu = 0.5 + spread * rng.gen::<f64>();
            [nu, nu]
        })
        .collect();
    let diag = Matrix::from_diagonal(&DVector::from_vec(nus));
    let s = random_symplectic(rng, space, squeeze);
    CovarianceMatrix(linalg::symmetrize(&(s.transpose() * diag * &s)))
}
