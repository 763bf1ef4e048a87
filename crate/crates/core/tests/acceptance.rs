//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::f64::consts::{LN_2, PI};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use gmcap::capacity::{self, CapacityStatus, EnergyConstraint};
use gmcap::channel::{GaussianMeasurement, GaussianState};
use gmcap::linalg::{self, Matrix, Vector};
use gmcap::montecarlo::{
    self, estimate_with_stderr, mi_binned, mi_plugin, BinnedEstimator, DiscreteEnsemble, Ensemble,
    GaussianCoherentEnsemble, PluginEstimator,
};
use gmcap::symplectic::{self, build_symplectic_form, CovarianceMatrix, SymplecticSpace};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn diag(values: &[f64]) -> CovarianceMatrix {
    CovarianceMatrix::new(Matrix::from_diagonal(&Vector::from_row_slice(values))).unwrap()
}

fn half_identity(dim: usize) -> Matrix {
    Matrix::identity(dim, dim) * 0.5
}

fn random_pd<R: Rng>(rng: &mut R, dim: usize) -> Matrix {
    let a = Matrix::from_fn(dim, dim, |_, _| rng.gen_range(-1.0..1.0));
    &a * a.transpose() + Matrix::identity(dim, dim) * 0.2
}

fn random_invertible<R: Rng>(rng: &mut R, dim: usize) -> Matrix {
    loop {
        let k = Matrix::from_fn(dim, dim, |_, _| rng.gen_range(-2.0..2.0));
        if k.determinant().abs() > 0.1 {
            return k;
        }
    }
}

/// Closed-form single-mode heterodyne-type capacity in nats.
fn closed_form_nats(b1: f64, b2: f64, e: f64) -> f64 {
    ((2.0 * e + b1 + b2) / (2.0 * (b1 * b2).sqrt() + 1.0)).ln()
}

fn closed_form_bound(b1: f64, b2: f64) -> f64 {
    0.5 * ((b1 / b2).sqrt().max((b2 / b1).sqrt()) + (b2 - b1).abs())
}

fn criterion_1() -> Outcome {
    let space = build_symplectic_form(1).unwrap();
    let beta = diag(&[1.0, 0.25]);
    let constraint = EnergyConstraint::new(half_identity(2), 2.0).unwrap();
    let start = Instant::now();
    let alpha = capacity::optimal_input_covariance(&constraint, &beta, &space).unwrap();
    let elapsed = start.elapsed();
    let (b1, b2, e) = (1.0, 0.25, 2.0);
    let expected = Matrix::from_diagonal(&Vector::from_vec(vec![e + (b2 - b1) / 2.0, e - (b2 - b1) / 2.0]));
    let err = (alpha.matrix() - &expected).amax();
    outcome(
        err <= 1e-12 && elapsed < Duration::from_millis(1),
        format!("max |alpha - diag(1.625, 2.375)| = {err:.2e}, runtime {elapsed:?}"),
    )
}

fn criterion_2() -> Outcome {
    let space = build_symplectic_form(1).unwrap();
    let eps = half_identity(2);
    let grid: Vec<f64> = (0..20)
        .map(|i| 10f64.powf(-1.5 + 3.0 * i as f64 / 19.0))
        .collect();
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    let mut not_exact = 0;
    for &b1 in &grid {
        for &b2 in &grid {
            if b1 * b2 < 0.25 {
                continue;
            }
            let bound = closed_form_bound(b1, b2);
            let m = GaussianMeasurement::canonical(diag(&[b1, b2]), &space).unwrap();
            for k in 0..10 {
                let e = bound * (1.0 + 0.5 * k as f64);
                let c = EnergyConstraint::new(eps.clone(), e).unwrap();
                let r = capacity::capacity(&c, &m, &space).unwrap();
                let want = closed_form_nats(b1, b2, e);
                // At E = e_min the exact value is 0 and the oracle only
                // carries its own roundoff.
                let err = if want.abs() < 1e-14 {
                    (r.capacity_nats - want).abs() / 1e-4
                } else {
                    (r.capacity_nats - want).abs() / want.abs()
                };
                worst = worst.max(err);
                if r.status != CapacityStatus::Exact {
                    not_exact += 1;
                }
                cases += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= 1e-10 && not_exact == 0 && elapsed < Duration::from_secs(1),
        format!(
            "{cases} cases, worst relative error {worst:.2e}, {not_exact} not exact, runtime {elapsed:?}"
        ),
    )
}

fn criterion_3() -> Outcome {
    let space = build_symplectic_form(1).unwrap();
    let grid: Vec<f64> = (0..25)
        .map(|i| 10f64.powf(-2.0 + 4.0 * i as f64 / 24.0))
        .collect();
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for &b1 in &grid {
        for &b2 in &grid {
            if b1 * b2 < 0.25 {
                continue;
            }
            let j = symplectic::complex_structure(&diag(&[b1, b2]), &space).unwrap();
            let expected = Matrix::from_row_slice(2, 2, &[0.0, -(b2 / b1).sqrt(), (b1 / b2).sqrt(), 0.0]);
            let err = (j.matrix() - &expected).amax() / expected.amax().max(1.0);
            worst = worst.max(err);
            cases += 1;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst_square: f64 = 0.0;
    let mut worst_psd: f64 = 0.0;
    for s in 1..=5 {
        let space = build_symplectic_form(s).unwrap();
        let dim = 2 * s;
        for _ in 0..40 {
            let beta = symplectic::random_valid_covariance(&mut rng, &space, 3.0, 0.4);
            let j = symplectic::complex_structure(&beta, &space).unwrap();
            let jm = j.matrix();
            let scale = jm.amax().powi(2).max(1.0);
            worst_square = worst_square.max((jm * jm + Matrix::identity(dim, dim)).amax() / scale);
            let dj = space.delta() * jm;
            let asym = (&dj - dj.transpose()).amax() / scale;
            let min_eig = linalg::min_eigenvalue(&linalg::symmetrize(&dj)) / scale;
            worst_psd = worst_psd.max(asym).max(-min_eig);
        }
    }
    outcome(
        worst <= 1e-12 && worst_square <= 1e-10 && worst_psd <= 1e-10,
        format!(
            "{cases} diagonal cases, worst scaled J error {worst:.2e}; s<=5: |J^2+I| {worst_square:.2e}, Delta J asymmetry/negativity {worst_psd:.2e}"
        ),
    )
}

fn criterion_4() -> Outcome {
    let space = build_symplectic_form(1).unwrap();
    let beta = diag(&[1.0, 0.25]);
    let eps = half_identity(2);
    let holds = |e: f64| {
        let c = EnergyConstraint::new(eps.clone(), e).unwrap();
        let alpha = capacity::optimal_input_covariance(&c, &beta, &space).unwrap();
        capacity::threshold_check(&alpha, &beta, &space).unwrap()
    };
    let (mut lo, mut hi) = (1.0, 2.0);
    if holds(lo) || !holds(hi) {
        return outcome(false, "threshold does not bracket [1, 2]");
    }
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if holds(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let bound = closed_form_bound(1.0, 0.25);
    let flip = 0.5 * (lo + hi);
    let reported = capacity::threshold_energy(&eps, &beta, &space).unwrap();
    outcome(
        (flip - 1.375).abs() <= 1e-9 && (bound - 1.375).abs() < 1e-15 && (reported - bound).abs() <= 1e-12,
        format!("flip at E = {flip:.12}, bound expression {bound}, reported bound {reported:.12}"),
    )
}

fn criterion_5() -> Outcome {
    let space = build_symplectic_form(1).unwrap();
    let beta = CovarianceMatrix::new(half_identity(2)).unwrap();
    let m = GaussianMeasurement::canonical(beta, &space).unwrap();
    let c = EnergyConstraint::new(half_identity(2), 1.5).unwrap();
    let r = capacity::capacity(&c, &m, &space).unwrap();
    let ensemble = GaussianCoherentEnsemble::from_optimal(r.ensemble.as_ref().unwrap(), &space).unwrap();
    let n = 100_000;

    let start = Instant::now();
    let samples = montecarlo::simulate_ensemble(Ensemble::Gaussian(&ensemble), &m, n, 0).unwrap();
    let single = mi_plugin(&samples).unwrap();
    let single_elapsed = start.elapsed();
    let gap_bits = (single - r.capacity_nats).abs() / LN_2;

    let start = Instant::now();
    let mut within = 0;
    for seed in 0..100 {
        let samples = montecarlo::simulate_ensemble(Ensemble::Gaussian(&ensemble), &m, n, seed).unwrap();
        let est = estimate_with_stderr(&PluginEstimator, &samples).unwrap();
        if (est.value - r.capacity_nats).abs() <= 3.0 * est.stderr {
            within += 1;
        }
    }
    let sweep_elapsed = start.elapsed();
    outcome(
        (r.capacity_bits - 1.0).abs() < 1e-12
            && gap_bits <= 0.02
            && within >= 99
            && single_elapsed < Duration::from_secs(10),
        format!(
            "seed 0: |MI - C| = {gap_bits:.5} bits ({single_elapsed:?}); {within}/100 seeds within 3 SE ({sweep_elapsed:?})"
        ),
    )
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    let mut worst_lib: f64 = 0.0;
    let mut count = 0;
    while count < 1000 {
        let s = 1 + count % 3;
        let space = build_symplectic_form(s).unwrap();
        let dim = 2 * s;
        let eps = random_pd(&mut rng, dim);
        let beta = symplectic::random_valid_covariance(&mut rng, &space, 2.0, 0.5);
        let bound = capacity::threshold_energy(&eps, &beta, &space).unwrap();
        let e_min = capacity::min_energy(&eps, &space).unwrap().e_min;
        let e = bound.max(e_min) + rng.gen_range(0.01..5.0);
        let m = GaussianMeasurement::canonical(beta.clone(), &space).unwrap();
        let r = capacity::capacity(&EnergyConstraint::new(eps, e).unwrap(), &m, &space).unwrap();
        if !r.threshold_ok {
            return outcome(
                false,
                format!("input {count} above the bound failed the threshold"),
            );
        }
        let alpha = r.alpha_opt.matrix();
        let vac = r.noise_vacuum.matrix();
        let b = beta.matrix();
        let difference = 0.5 * ((alpha + b).determinant().ln() - (b + vac).determinant().ln());
        let min_out = b + vac;
        let ratio_matrix =
            Matrix::identity(dim, dim) + (alpha - vac) * min_out.clone().try_inverse().unwrap();
        let ratio = 0.5 * ratio_matrix.determinant().ln();
        worst = worst.max((difference - ratio).abs() / difference.abs().max(1.0));
        worst_lib = worst_lib.max((r.capacity_nats - ratio).abs() / ratio.abs().max(1.0));
        count += 1;
    }
    outcome(
        worst <= 1e-10 && worst_lib <= 1e-10,
        format!("1000 inputs, worst form disagreement {worst:.2e}, pipeline vs ratio form {worst_lib:.2e}"),
    )
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for i in 0..1000 {
        let dim = 1 + i % 6;
        let sigma = random_pd(&mut rng, dim);
        let hc = random_pd(&mut rng, dim);
        let theta = rng.gen_range(0.05..5.0);
        let d = montecarlo::entropy_decomposition_check(&sigma, &hc, theta).unwrap();
        worst = worst.max(d.gap);
    }
    let hand = montecarlo::entropy_decomposition_check(&Matrix::identity(2, 2), &Matrix::identity(2, 2), 0.5)
        .unwrap();
    let want = 1.0 + 2f64.ln() + PI.ln();
    let hand_err = (hand.lhs - want).abs().max((hand.rhs - want).abs());
    outcome(
        worst <= 1e-10 && hand_err <= 1e-12,
        format!(
            "1000 triples, worst gap {worst:.2e}; hand case lhs {:.12} rhs {:.12}",
            hand.lhs, hand.rhs
        ),
    )
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let space = build_symplectic_form(1).unwrap();
    let beta = diag(&[1.0, 0.25]);
    let eps = half_identity(2);
    let c = EnergyConstraint::new(eps, 2.0).unwrap();
    let canonical = GaussianMeasurement::canonical(beta.clone(), &space).unwrap();
    let base = capacity::capacity(&c, &canonical, &space).unwrap();
    let ensemble = GaussianCoherentEnsemble::from_optimal(base.ensemble.as_ref().unwrap(), &space).unwrap();
    let n = 20_000;
    let base_samples =
        montecarlo::simulate_ensemble(Ensemble::Gaussian(&ensemble), &canonical, n, 11).unwrap();
    let base_mi = estimate_with_stderr(&PluginEstimator, &base_samples).unwrap();

    let mut worst_analytic: f64 = 0.0;
    let mut worst_mc: f64 = 0.0;
    let mut worst_z: f64 = 0.0;
    for _ in 0..100 {
        let k = random_invertible(&mut rng, 2);
        let m = GaussianMeasurement::new(k, beta.clone(), &space).unwrap();
        let r = capacity::capacity(&c, &m, &space).unwrap();
        worst_analytic = worst_analytic.max((r.capacity_nats - base.capacity_nats).abs());
        let samples = montecarlo::simulate_ensemble(Ensemble::Gaussian(&ensemble), &m, n, 11).unwrap();
        let est = estimate_with_stderr(&PluginEstimator, &samples).unwrap();
        worst_mc = worst_mc.max((est.value - base_mi.value).abs());
        worst_z = worst_z.max((est.value - r.capacity_nats).abs() / est.stderr);
    }
    outcome(
        worst_analytic <= 1e-12 && worst_mc <= base_mi.stderr && worst_z <= 4.0,
        format!(
            "100 K: capacity drift {worst_analytic:.2e}; plug-in drift {worst_mc:.2e} (SE {:.2e}); max |MI - C|/SE {worst_z:.2}",
            base_mi.stderr
        ),
    )
}

fn criterion_9() -> Outcome {
    let space = build_symplectic_form(1).unwrap();
    let vac = CovarianceMatrix::new(half_identity(2)).unwrap();
    let m = GaussianMeasurement::canonical(vac.clone(), &space).unwrap();
    let state = |x: f64| GaussianState::new(Vector::from_vec(vec![x, 0.0]), vac.clone(), &space).unwrap();
    let ensemble = DiscreteEnsemble::new(vec![(0.5, state(-1.0)), (0.5, state(1.0))]).unwrap();
    let samples = montecarlo::simulate_ensemble(Ensemble::Discrete(&ensemble), &m, 200_000, 9).unwrap();
    let plugin = estimate_with_stderr(&PluginEstimator, &samples).unwrap();
    let chain: Vec<_> = [4, 16, 64]
        .iter()
        .map(|&b| estimate_with_stderr(&BinnedEstimator::new(b), &samples).unwrap())
        .collect();
    let monotone = chain
        .windows(2)
        .all(|w| w[1].value >= w[0].value - 2.0 * w[0].stderr.max(w[1].stderr));
    let below = chain
        .iter()
        .all(|e| e.value <= plugin.value + 2.0 * plugin.stderr.max(e.stderr));
    let exact_chain = [4, 16, 64].map(|b| mi_binned(&samples, b).unwrap());
    outcome(
        monotone && below && exact_chain.iter().all(|&v| v <= ensemble.input_entropy()),
        format!(
            "binned 4/16/64 = {:.5}/{:.5}/{:.5} nats (SE {:.1e}), plug-in {:.5} (SE {:.1e})",
            chain[0].value, chain[1].value, chain[2].value, chain[2].stderr, plugin.value, plugin.stderr
        ),
    )
}

fn criterion_10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut degenerate_ok = true;
    for i in 0..30 {
        let s = 1 + i % 3;
        let space = build_symplectic_form(s).unwrap();
        let eps = random_pd(&mut rng, 2 * s);
        let beta = symplectic::random_valid_covariance(&mut rng, &space, 1.0, 0.3);
        let e_min = capacity::min_energy(&eps, &space).unwrap().e_min;
        let m = GaussianMeasurement::canonical(beta, &space).unwrap();
        let r = capacity::capacity(&EnergyConstraint::new(eps, e_min).unwrap(), &m, &space).unwrap();
        let point = r.ensemble.as_ref().is_some_and(|e| e.is_point_mass());
        degenerate_ok &= r.capacity_nats == 0.0 && r.status == CapacityStatus::Exact && point;
    }
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let s = 1 + i % 5;
        let space = build_symplectic_form(s).unwrap();
        let beta = pure_state(&mut rng, &space);
        let j = symplectic::complex_structure(&beta, &space).unwrap();
        let back = symplectic::pure_covariance(&j, &space).unwrap();
        worst = worst.max((back.matrix() - beta.matrix()).amax());
    }
    outcome(
        degenerate_ok && worst <= 1e-12,
        format!("E = e_min on 30 inputs: zero capacity and point mass = {degenerate_ok}; pure beta round trip {worst:.2e}"),
    )
}

fn pure_state<R: Rng>(rng: &mut R, space: &SymplecticSpace) -> CovarianceMatrix {
    let s = symplectic::random_symplectic(rng, space, 0.3);
    CovarianceMatrix::new(linalg::symmetrize(
        &(s.transpose() * half_identity(space.dim()) * &s),
    ))
    .unwrap()
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("maximizer worked example", criterion_1),
        ("capacity closed form grid", criterion_2),
        ("complex structure", criterion_3),
        ("threshold boundary", criterion_4),
        ("Monte Carlo validation", criterion_5),
        ("two capacity forms agree", criterion_6),
        ("entropy decomposition", criterion_7),
        ("K-invariance", criterion_8),
        ("binning refinement chain", criterion_9),
        ("degenerate cases", criterion_10),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        if !o.pass {
            failures += 1;
        }
        println!(
            "{} criterion {:>2} {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
