//! Property tests over seeded random problems.

use bse_doubling::cayley::{build_ssf1, cayley, inverse_cayley, select_alpha, DEFAULT_RHO};
use bse_doubling::cli::solve_problem;
use bse_doubling::dct::DctParams;
use bse_doubling::doubling::{doubling_step, SolverConfig};
use bse_doubling::extract::{self, DensityKind};
use bse_doubling::matkernel::{self, c64, CMatrix};
use bse_doubling::oracle;
use bse_doubling::problem::{generate, load_mtx, save_mtx, BseHamiltonian, GeneratorKind, GeneratorSpec};
use bse_doubling::trirec;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn problem(kind: GeneratorKind, n: usize, seed: u64, gap: f64) -> BseHamiltonian {
    generate(&GeneratorSpec::new(kind, n, seed).with_gap(gap)).unwrap()
}

fn gapped(n: usize, seed: u64) -> BseHamiltonian {
    problem(GeneratorKind::RandomComplex, n, seed, 4.0 * (n as f64).sqrt())
}

fn kind() -> impl Strategy<Value = GeneratorKind> {
    prop_oneof![Just(GeneratorKind::RandomComplex), Just(GeneratorKind::RandomReal)]
}

fn random_matrix(n: usize, seed: u64) -> CMatrix {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    CMatrix::from_fn(n, n, |_, _| c64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

/// Greedy-matched spectra agree to `tol` relative to `max(1, |λ|)`.
fn same_spectrum(a: &[c64], b: &[c64], tol: f64) -> bool {
    let Ok(order) = matkernel::greedy_match(a, b) else { return false };
    a.iter().zip(&order).all(|(x, &j)| (x - b[j]).norm() <= tol * x.norm().max(1.0))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn solve_has_small_residual(n in 1usize..=16, seed in any::<u64>(), kind in kind()) {
        let p = problem(kind, n, seed, 4.0 * (n as f64).sqrt());
        let run = solve_problem(&p, &SolverConfig::default()).unwrap();
        prop_assert!(run.converged);
        let res = run.residuals.unwrap();
        prop_assert!(res.decomposition_residual <= 1e-10, "residual {}", res.decomposition_residual);
        prop_assert!(res.rayleigh_residual <= 1e-9, "rayleigh {}", res.rayleigh_residual);
    }

    #[test]
    fn spectrum_is_closed_under_mirror(n in 1usize..=12, seed in any::<u64>(), kind in kind()) {
        let p = problem(kind, n, seed, 4.0 * (n as f64).sqrt());
        let r = solve_problem(&p, &SolverConfig::default()).unwrap().result.unwrap();
        let v = &r.full_values;
        for j in 0..v.len() {
            prop_assert_eq!(v[r.pairing[j]], -v[j].conj());
            prop_assert_eq!(r.pairing[r.pairing[j]], j);
        }
        prop_assert!(r.stable_values.iter().all(|z| z.re < 0.0));
        if kind == GeneratorKind::RandomReal {
            // Real data adds λ ↦ λ̄, completing the quadruple.
            let conj: Vec<c64> = v.iter().map(|z| z.conj()).collect();
            prop_assert!(same_spectrum(v, &conj, 1e-9));
        }
    }

    #[test]
    fn adjoint_keeps_singular_values(n in 1usize..=10, seed in any::<u64>()) {
        let m = random_matrix(n, seed);
        let s = matkernel::singular_values(&m).unwrap();
        let t = matkernel::singular_values(&matkernel::adjoint(&m)).unwrap();
        for (x, y) in s.iter().zip(&t) {
            prop_assert!((x - y).abs() <= 1e-12 * s[0].max(1.0));
        }
    }

    #[test]
    fn transpose_keeps_eigenvalues(n in 1usize..=10, seed in any::<u64>()) {
        let m = random_matrix(n, seed);
        let a = matkernel::eigenvalues(&m).unwrap();
        let b = matkernel::eigenvalues(&matkernel::transpose(&m)).unwrap();
        prop_assert!(same_spectrum(&a, &b, 1e-9));
    }

    #[test]
    fn auto_shift_bounds(n in 1usize..=24, seed in any::<u64>(), kind in kind(), gap in 0.0f64..10.0) {
        let p = problem(kind, n, seed, gap);
        let alpha = select_alpha(&p, DEFAULT_RHO, None).unwrap().alpha;
        let pair = build_ssf1(&p, alpha).unwrap();
        prop_assert!(matkernel::singular_values(&pair.f).unwrap()[0] < 1.0);
        for z in matkernel::eigenvalues(&pair.e).unwrap() {
            let dist = c64::new(z.re - z.re.clamp(0.0, 2.0), z.im).norm();
            prop_assert!(dist > 0.0, "eigenvalue {} of E0 on [0, 2]", z);
        }
    }

    #[test]
    fn moebius_round_trip(re in -1e3f64..-1e-3, im in -1e3f64..1e3, alpha in 1e-2f64..1e2) {
        let lambda = c64::new(re, im);
        let nu = cayley(lambda, alpha);
        prop_assert!(nu.norm() < 1.0);
        let back = inverse_cayley(nu, alpha);
        prop_assert!((back - lambda).norm() <= 1e-9 * lambda.norm().max(alpha));
        prop_assert!(cayley(-lambda.conj(), alpha).norm() > 1.0);
    }

    #[test]
    fn dct_map_stays_in_unit_disc(re in -1e2f64..-1e-3, im in -1e2f64..1e2, k0 in 1u32..6, kappa in 2.0f64..10.0) {
        let params = DctParams::new(1.0, 1.0, kappa, k0);
        prop_assert!(params.nu(c64::new(re, im), 1.0).norm() < 1.0);
    }

    #[test]
    fn doubling_squares_pencil_spectrum(n in 1usize..=6, seed in any::<u64>()) {
        let p = gapped(n, seed);
        let alpha = select_alpha(&p, DEFAULT_RHO, None).unwrap().alpha;
        let pair = build_ssf1(&p, alpha).unwrap();
        let base = pair.pencil_eigenvalues().unwrap();
        let next = doubling_step(&pair, 1e-8).unwrap();
        let squared: Vec<c64> = base.iter().map(|z| z * z).collect();
        prop_assert!(same_spectrum(&squared, &next.pencil_eigenvalues().unwrap(), 1e-8));
    }

    #[test]
    fn three_recursion_keeps_pencil_spectrum(n in 1usize..=6, seed in any::<u64>()) {
        let p = gapped(n, seed);
        let alpha = select_alpha(&p, DEFAULT_RHO, None).unwrap().alpha;
        let pair = build_ssf1(&p, alpha).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let z = trirec::random_symmetric(n, 1.0, &mut rng);
        let Ok(s) = trirec::init_three(&pair, &z, 1e-8) else {
            // An ill-conditioned draw is rejected, which is the documented behavior.
            return Ok(());
        };
        let base = pair.pencil_eigenvalues().unwrap();
        prop_assert!(same_spectrum(&base, &s.pencil_eigenvalues().unwrap(), 1e-8));
        let stepped = trirec::three_step(&s, 1e-8).unwrap();
        let squared: Vec<c64> = base.iter().map(|z| z * z).collect();
        prop_assert!(same_spectrum(&squared, &stepped.pencil_eigenvalues().unwrap(), 1e-7));
    }

    #[test]
    fn oracles_agree(n in 1usize..=12, seed in any::<u64>(), kind in kind()) {
        let p = problem(kind, n, seed, 4.0 * (n as f64).sqrt());
        let direct = oracle::eig_direct(&p).unwrap();
        let pencil = oracle::eig_pencil(&p).unwrap();
        prop_assert!(oracle::prec(&direct.values, &pencil.values).unwrap() < -9.0);
        let run = solve_problem(&p, &SolverConfig::default()).unwrap();
        prop_assert!(oracle::prec(&direct.values, &run.result.unwrap().full_values).unwrap() < -9.0);
    }

    #[test]
    fn dos_integrates_to_one(n in 1usize..=12, seed in any::<u64>()) {
        let p = gapped(n, seed);
        let r = solve_problem(&p, &SolverConfig::default()).unwrap().result.unwrap();
        let grid = extract::covering_grid(&r.full_values, 1.5, 4001);
        let width = extract::default_broadening(&r.full_values);
        let dos = extract::spectral_density(&r, &grid, width, DensityKind::Dos, None).unwrap();
        prop_assert!((dos.integral() - 1.0).abs() <= 1e-3);
        prop_assert!(dos.values.iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn matrix_market_round_trip(n in 1usize..=8, seed in any::<u64>(), kind in kind()) {
        let p = problem(kind, n, seed, 1.0);
        let dir = tempfile::tempdir().unwrap();
        let (a, b) = (dir.path().join("a.mtx"), dir.path().join("b.mtx"));
        save_mtx(&p, &a, &b, &[]).unwrap();
        let q = load_mtx(&a, &b, 1e-12).unwrap();
        prop_assert_eq!(&**p.a(), &**q.a());
        prop_assert_eq!(&**p.b(), &**q.b());
    }
}
