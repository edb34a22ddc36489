//! Property tests for the contracts the library promises on random inputs:
//! factor reconstruction, norm identities, membership bounds, and the
//! convexity and growth inequalities.

use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use specter::matrix::{vec_norm2, ComplexMatrix};
use specter::numcore;
use specter::problems;
use specter::pseudospectra::{self, Mode, PencilProblem, Strategy};
use specter::transient;

fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> ComplexMatrix {
    let data: Vec<Complex64> = (0..rows * cols)
        .map(|_| Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng)))
        .collect();
    ComplexMatrix::new(rows, cols, data).unwrap()
}

/// Hermitian positive definite matrix with eigenvalues spread over
/// [lo, hi], deterministic in the seed.
fn random_hpd(n: usize, lo: f64, hi: f64, seed: u64) -> ComplexMatrix {
    let lambdas: Vec<Complex64> = (0..n)
        .map(|k| {
            let f = if n == 1 { 0.0 } else { k as f64 / (n - 1) as f64 };
            Complex64::new(lo + (hi - lo) * f, 0.0)
        })
        .collect();
    problems::normal_from_spectrum(&lambdas, seed)
        .unwrap()
        .a()
        .clone()
}

fn max_entry_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            worst = worst.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    worst
}

fn is_near_identity(m: &ComplexMatrix, tol: f64) -> bool {
    max_entry_diff(m, &ComplexMatrix::identity(m.rows())) <= tol
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn svd_reconstructs_and_factors_are_unitary(seed in 0u64..10_000, m in 1usize..6, n in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = gaussian(&mut rng, m, n);
        let dec = numcore::svd(&a).unwrap();
        prop_assert!(is_near_identity(&(&dec.u.adjoint() * &dec.u), 1e-12));
        prop_assert!(is_near_identity(&(&dec.v.adjoint() * &dec.v), 1e-12));
        let mut rebuilt = ComplexMatrix::zeros(m, n);
        for (k, s) in dec.sigma.iter().enumerate() {
            let uk = dec.u.column(k);
            let vk = dec.v.column(k);
            for i in 0..m {
                for j in 0..n {
                    rebuilt[(i, j)] += uk[i] * Complex64::new(*s, 0.0) * vk[j].conj();
                }
            }
        }
        prop_assert!(max_entry_diff(&rebuilt, &a) <= 1e-12 * (1.0 + a.max_abs()));
    }

    #[test]
    fn cholesky_roundtrips_random_hpd(seed in 0u64..10_000, n in 1usize..8) {
        let m = random_hpd(n, 0.3, 6.0, seed);
        let f = numcore::cholesky_upper(&m).unwrap();
        let diff = max_entry_diff(&f.reconstruct(), &m);
        prop_assert!(diff <= 1e-12 * m.max_abs());
    }

    #[test]
    fn geneig_residuals_are_small(seed in 0u64..10_000, n in 2usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = gaussian(&mut rng, n, n);
        let m = random_hpd(n, 0.5, 4.0, seed.wrapping_add(1));
        let pairs = numcore::geneig(&a, &m).unwrap();
        let vectors = pairs.vectors.as_ref().unwrap();
        let a_norm = numcore::op_norm(&a).unwrap();
        let m_norm = numcore::op_norm(&m).unwrap();
        for (k, lam) in pairs.lambdas.iter().enumerate() {
            let e = vectors.column(k);
            let ae = a.mul_vec(&e);
            let me = m.mul_vec(&e);
            let res: Vec<Complex64> = ae.iter().zip(&me).map(|(x, y)| x - lam * y).collect();
            let bound = 1e-8 * (a_norm + lam.norm() * m_norm);
            prop_assert!(vec_norm2(&res) <= bound);
        }
    }

    #[test]
    fn singular_values_survive_unitary_rotation(seed in 0u64..10_000, n in 2usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = gaussian(&mut rng, n, n);
        let h = random_hpd(n, -1.0, 1.0, seed.wrapping_add(7));
        let q = numcore::expm(&h.scale(Complex64::new(0.0, 1.0))).unwrap();
        prop_assert!(is_near_identity(&(&q.adjoint() * &q), 1e-12));
        let sa = numcore::singular_values(&a).unwrap();
        let sqa = numcore::singular_values(&(&q * &a)).unwrap();
        for (x, y) in sa.iter().zip(&sqa) {
            prop_assert!((x - y).abs() <= 1e-10 * (1.0 + sa[0]));
        }
    }

    #[test]
    fn svd_sigma_squares_are_gram_eigenvalues(seed in 0u64..10_000, n in 2usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = gaussian(&mut rng, n, n);
        let sigma = numcore::singular_values(&a).unwrap();
        let gram = &a.adjoint() * &a;
        let sym = (&gram + &gram.adjoint()).scale(Complex64::new(0.5, 0.0));
        let eig = numcore::eig_hermitian(&sym).unwrap();
        let scale = sigma[0] * sigma[0] + 1.0;
        for (k, s) in sigma.iter().enumerate() {
            let lam = eig.lambdas[n - 1 - k].re;
            prop_assert!((s * s - lam).abs() <= 1e-8 * scale);
        }
    }

    #[test]
    fn minimizing_vector_attains_eps_b_and_resolvent_is_reciprocal(
        seed in 0u64..10_000,
        n in 2usize..7,
        zre in -2.0f64..2.0,
        zim in -2.0f64..2.0,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = gaussian(&mut rng, n, n);
        let p = PencilProblem::standard(a.clone()).unwrap();
        let z = Complex64::new(zre, zim);
        let eps = pseudospectra::eps_b(&p, z, Mode::Standard).unwrap();
        let shifted = ComplexMatrix::from_fn(n, n, |i, j| {
            a[(i, j)] - if i == j { z } else { Complex64::ZERO }
        });
        let dec = numcore::svd(&shifted).unwrap();
        let u = dec.v.column(n - 1);
        prop_assert!((vec_norm2(&u) - 1.0).abs() <= 1e-12);
        let image = shifted.mul_vec(&u);
        prop_assert!((vec_norm2(&image) - eps).abs() <= 1e-10 * (1.0 + eps));
        // resolvent norm check only away from the spectrum
        if eps > 1e-6 {
            let inv = numcore::solve(&shifted, &ComplexMatrix::identity(n)).unwrap();
            let inv_norm = numcore::op_norm(&inv).unwrap();
            prop_assert!((inv_norm - 1.0 / eps).abs() <= 1e-8 * inv_norm);
        }
    }

    #[test]
    fn pseudospectrum_sublevel_sets_nest(seed in 0u64..10_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = gaussian(&mut rng, 4, 4);
        let p = PencilProblem::standard(a).unwrap();
        let region = pseudospectra::Region::new(-2.0, 2.0, -2.0, 2.0).unwrap();
        let g = pseudospectra::grid(&p, region, 7, 7, Mode::Standard).unwrap();
        let (eps_small, eps_large) = (0.05, 0.5);
        for v in &g.values {
            prop_assert!(*v >= 0.0 && v.is_finite());
            if *v <= eps_small {
                prop_assert!(*v <= eps_large);
            }
        }
    }

    #[test]
    fn scatter_samples_stay_inside_the_pseudospectrum(
        seed in 0u64..10_000,
        strat_pick in 0usize..3,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = gaussian(&mut rng, 4, 4);
        let p = PencilProblem::standard(a).unwrap();
        let strategy = [Strategy::Full, Strategy::Rank1, Strategy::Residual][strat_pick];
        let eps = 0.08;
        let s = pseudospectra::perturbation_scatter(&p, eps, 5, seed, strategy, Mode::Standard)
            .unwrap();
        prop_assert_eq!(s.eigenvalues.len(), 20);
        for z in &s.eigenvalues {
            let v = pseudospectra::eps_b(&p, *z, Mode::Standard).unwrap();
            prop_assert!(v <= eps * (1.0 + 1e-8) + 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn bsv_factor_contracts_hold_on_random_shapes(
        seed in 0u64..10_000,
        n in 2usize..5,
        extra_a in 0usize..3,
        mb_delta in 0i64..3,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m_a = n + extra_a;
        // m_b sweeps below, at, and above n so the rank-deficient path runs
        let m_b = ((n as i64) + mb_delta - 1).max(1) as usize;
        let a = gaussian(&mut rng, m_a, n);
        let b = gaussian(&mut rng, m_b, n);
        let dec = specter::gsvd::bsv(&a, &b).unwrap();

        prop_assert!(is_near_identity(&(&dec.u.adjoint() * &dec.u), 1e-10));
        prop_assert!(is_near_identity(&(&dec.v.adjoint() * &dec.v), 1e-10));
        let x_min = numcore::sigma_min(&dec.x).unwrap();
        prop_assert!(x_min > 0.0, "X must be nonsingular");

        let a_norm = numcore::op_norm(&a).unwrap();
        let b_norm = numcore::op_norm(&b).unwrap().max(1e-30);
        let x_norm = numcore::op_norm(&dec.x).unwrap();
        let ua = &(&dec.u.adjoint() * &a) * &dec.x;
        let vb = &(&dec.v.adjoint() * &b) * &dec.x;
        for i in 0..m_a {
            for j in 0..n {
                let want = if i == j {
                    Complex64::new(dec.alphas[j], 0.0)
                } else {
                    Complex64::ZERO
                };
                prop_assert!((ua[(i, j)] - want).norm() <= 1e-8 * a_norm.max(1e-30) * x_norm);
            }
        }
        for i in 0..m_b {
            for j in 0..n {
                let want = if i == j {
                    Complex64::new(dec.betas[j], 0.0)
                } else {
                    Complex64::ZERO
                };
                prop_assert!((vb[(i, j)] - want).norm() <= 1e-8 * b_norm * x_norm);
            }
        }

        // beta ordering and rank consistency
        for w in dec.betas.windows(2) {
            prop_assert!(w[0] >= w[1] - 1e-12);
        }
        for (j, beta) in dec.betas.iter().enumerate() {
            if j < dec.rank_b {
                prop_assert!(*beta > 0.0);
            } else {
                prop_assert!(*beta == 0.0);
            }
        }
        let alpha_max = dec.alphas.iter().cloned().fold(0.0f64, f64::max);
        let rederived = (dec.rank_b..n)
            .any(|j| dec.alphas[j] <= specter::gsvd::DEGENERACY_RTOL * alpha_max);
        prop_assert_eq!(dec.degenerate, rederived);
    }

    #[test]
    fn growth_bounds_hold_on_random_stable_matrices(seed in 0u64..10_000, t in 0.0f64..2.5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = gaussian(&mut rng, 4, 4);
        let nrm = numcore::op_norm(&g).unwrap();
        let a = ComplexMatrix::from_fn(4, 4, |i, j| {
            g[(i, j)] / Complex64::new(nrm, 0.0)
                - if i == j {
                    Complex64::new(1.3, 0.0)
                } else {
                    Complex64::ZERO
                }
        });
        let p = PencilProblem::standard(a).unwrap();
        let growth = match transient::growth_factor_eig(&p, t) {
            Ok((g, _)) => g,
            // a nearly defective draw is outside this property's domain
            Err(specter::Error::NearDefective { .. }) => return Ok(()),
            Err(e) => return Err(TestCaseError::fail(format!("{e}"))),
        };
        let (g0, _) = transient::growth_factor_eig(&p, 0.0).unwrap();
        prop_assert!((g0 - 1.0).abs() <= 1e-10);

        let lambdas = p.eigenvalues().unwrap();
        let lower = lambdas
            .iter()
            .map(|l| (2.0 * l.re * t).exp())
            .fold(0.0f64, f64::max);
        prop_assert!(growth >= lower - 1e-8);

        let pairs = p.eigenpairs().unwrap();
        let vm = p.cholesky().matrix() * pairs.vectors.as_ref().unwrap();
        let sv = numcore::singular_values(&vm).unwrap();
        let cond = sv[0] / sv.last().unwrap();
        let max_re = lambdas.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max);
        let upper = cond * cond * (2.0 * max_re * t).exp() + 1e-6;
        prop_assert!(growth <= upper);
    }

    #[test]
    fn support_polyline_is_convex_for_random_matrices(seed in 0u64..10_000, n in 2usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = gaussian(&mut rng, n, n);
        let p = PencilProblem::standard(a).unwrap();
        let nr = transient::numerical_range(&p, 40).unwrap();
        let pts = &nr.support_points;
        let k = pts.len();
        let scale = pts.iter().map(|z| z.norm()).fold(1.0f64, f64::max);
        for i in 0..k {
            let o = pts[i];
            let u = pts[(i + 1) % k];
            let w = pts[(i + 2) % k];
            let cr = (u.re - o.re) * (w.im - o.im) - (u.im - o.im) * (w.re - o.re);
            prop_assert!(cr >= -1e-10 * scale * scale);
        }
    }

    #[test]
    fn st_singular_values_scale_linearly(seed in 0u64..10_000, n in 2usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = gaussian(&mut rng, n, n);
        let s = random_hpd(n, 0.5, 3.0, seed.wrapping_add(11));
        let t = random_hpd(n, 0.5, 3.0, seed.wrapping_add(12));
        let base = specter::gsvd::st_singular_values(&a, &s, &t).unwrap();
        for c in [Complex64::new(2.0, 0.0), Complex64::new(1.0, 1.0)] {
            let scaled = specter::gsvd::st_singular_values(&a.scale(c), &s, &t).unwrap();
            for (x, y) in base.mus.iter().zip(&scaled.mus) {
                prop_assert!((c.norm() * x - y).abs() <= 1e-10 * (1.0 + c.norm() * x));
            }
        }
    }
}
