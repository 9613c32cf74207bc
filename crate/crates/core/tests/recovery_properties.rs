use l1cert_core::bounds::{beta_sufficient_for_alpha, compute_alphas, s_bound_alphas};
use l1cert_core::gen::{generate, Family, GenSpec};
use l1cert_core::oracle::{empirical_goodness, random_sparse_signal};
use l1cert_core::recovery::{
    l1_recover, noisy_error_bound, rip_implied_bounds, weighted_scaling_optimize, ErrorBoundInputs, RecoveryProblem,
    SCALING_TOL,
};
use l1cert_core::{hard_threshold, Beta, ObservationNorm, SensingMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn gaussian(k: usize, n: usize, seed: u64) -> SensingMatrix {
    generate(&GenSpec { family: Family::Gaussian, k, n, seed, normalize: true }).unwrap()
}

fn l1(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

#[test]
fn certified_levels_recover() {
    for seed in 0..3 {
        let a = gaussian(12, 28, 300 + seed);
        let c = s_bound_alphas(&a, Beta::INFINITY, ObservationNorm::L2).unwrap();
        assert!(c.s_certified >= 1);
        let r = empirical_goodness(&a, c.s_certified, 30, seed);
        assert_eq!(r.failures, 0, "seed {seed}: worst {}", r.worst_error);
    }
}

/// A (upsilon, nu)-optimal point built by perturbing the exact minimizer; the
/// returned upsilon and nu over-estimate the true slack.
fn perturbed_solution(
    a: &SensingMatrix,
    y: &[f64],
    eps: f64,
    norm: ObservationNorm,
    rng: &mut ChaCha8Rng,
) -> (Vec<f64>, f64, f64) {
    let p = RecoveryProblem { a: a.clone(), y: y.to_vec(), epsilon: eps, norm };
    let x_opt = l1_recover(&p).unwrap();
    let size = 10f64.powf(rng.random_range(-4.0..-1.0));
    let x_hat: Vec<f64> = x_opt.iter().map(|v| v + size * rng.random_range(-1.0..1.0)).collect();
    let r: Vec<f64> = a.apply(&x_hat).iter().zip(y).map(|(p, q)| p - q).collect();
    let upsilon = (norm.eval(&r) - eps).max(0.0);
    // Opt <= ||x_opt||_1 up to the LP gap
    let nu = (l1(&x_hat) - l1(&x_opt)).max(0.0) + 1e-7;
    (x_hat, upsilon, nu)
}

#[test]
fn noisy_bound_holds() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for norm in [ObservationNorm::L1, ObservationNorm::Linf] {
        let a = gaussian(14, 30, 17);
        let beta = match norm {
            ObservationNorm::L1 => beta_sufficient_for_alpha(&a, norm).unwrap(),
            _ => Beta::new(5.0).unwrap(),
        };
        let c = s_bound_alphas(&a, beta, norm).unwrap();
        let s = c.s_certified;
        assert!(s >= 1, "{norm:?}");
        for t in 0..25u64 {
            let mut w = random_sparse_signal(30, s, 99, t);
            let tail_scale = rng.random_range(0.0..0.05);
            w.iter_mut().for_each(|v| *v += tail_scale * rng.random_range(-1.0..1.0));
            let tail = l1(&w) - l1(&hard_threshold(&w, s));
            let eps = rng.random_range(0.0..0.1);
            let dir: Vec<f64> = (0..14).map(|_| rng.random_range(-1.0..1.0)).collect();
            let scale = eps * rng.random_range(0.0..1.0) / norm.eval(&dir);
            let y: Vec<f64> = a.apply(&w).iter().zip(&dir).map(|(p, d)| p + scale * d).collect();
            let (x_hat, upsilon, nu) = perturbed_solution(&a, &y, eps, norm, &mut rng);
            let bound = noisy_error_bound(&ErrorBoundInputs {
                gammahat: c.bound_value,
                beta: c.beta.value(),
                epsilon: eps,
                upsilon,
                nu,
                tail,
            })
            .unwrap();
            let err: f64 = x_hat.iter().zip(&w).map(|(p, q)| (p - q).abs()).sum();
            assert!(err <= bound + 1e-8, "{norm:?} trial {t}: {err} > {bound}");
        }
    }
}

#[test]
fn scaling_with_unit_floor_is_plain_alpha() {
    let a = gaussian(6, 14, 8);
    for beta in [Beta::INFINITY, Beta::new(2.0).unwrap()] {
        let norm = ObservationNorm::Linf;
        let (plain, _) = compute_alphas(&a, 2, beta, norm).unwrap();
        let r = weighted_scaling_optimize(&a, 2, beta, norm, 1.0).unwrap();
        assert!((r.achieved - plain).abs() <= SCALING_TOL);
        assert!(r.lambdas.iter().all(|&l| l == 1.0));
    }
}

#[test]
fn scaling_undoes_a_column_rescale() {
    let g = gaussian(8, 18, 12);
    let c = s_bound_alphas(&g, Beta::INFINITY, ObservationNorm::L2).unwrap();
    assert!(c.s_certified >= 1);
    let s = c.s_certified;
    let (target, _) = compute_alphas(&g, s, Beta::INFINITY, ObservationNorm::L2).unwrap();
    let mut d = vec![1.0; 18];
    d[3] = 10.0;
    let a = g.scale_columns(&d).unwrap();
    let r = weighted_scaling_optimize(&a, s, Beta::INFINITY, ObservationNorm::L2, 0.05).unwrap();
    assert!(r.achieved <= target + SCALING_TOL, "{} > {target}", r.achieved);
    let fixed = r.weighted_matrix(&a).unwrap();
    assert!(s_bound_alphas(&fixed, Beta::INFINITY, ObservationNorm::L2).unwrap().s_certified >= s);
}

#[test]
fn rip_bounds_increase_with_delta() {
    let mut prev: Option<(f64, f64)> = None;
    for i in 1..41 {
        let delta = i as f64 * 0.01;
        let b = rip_implied_bounds(delta, 3, Some(50)).unwrap();
        let cur = (b.gammahat_bound, b.alpha1_bound.unwrap());
        if let Some(p) = prev {
            assert!(cur.0 > p.0 && cur.1 > p.1, "delta {delta}");
        }
        prev = Some(cur);
    }
}
