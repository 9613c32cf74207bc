use l1cert_core::bounds::{
    compute_alpha1, compute_alphas, improved_s_from_corrector, performance_limit, s_bound_alphas, s_bound_mu,
};
use l1cert_core::gen::{generate, Family, GenSpec};
use l1cert_core::lower::{sca_detailed, sca_lower_bound, s_upper_bound, ScaConfig};
use l1cert_core::oracle::{gammahat_exact, submatrix_kernel_check, DEFAULT_ORACLE_LIMIT};
use l1cert_core::{norm_s1, Beta, ObservationNorm, SensingMatrix};

fn gaussian(k: usize, n: usize, seed: u64) -> SensingMatrix {
    generate(&GenSpec { family: Family::Gaussian, k, n, seed, normalize: true }).unwrap()
}

#[test]
fn alphas_nondecreasing_in_s_and_below_s_alpha1() {
    for seed in 0..3 {
        let a = gaussian(5, 12, seed);
        let (a1, _) = compute_alpha1(&a, Beta::INFINITY, ObservationNorm::L2).unwrap();
        let mut prev = 0.0;
        for s in 1..=5 {
            let (v, _) = compute_alphas(&a, s, Beta::INFINITY, ObservationNorm::L2).unwrap();
            assert!(prev <= v + 1e-8, "seed {seed} s {s}: {prev} > {v}");
            assert!(v <= s as f64 * a1 + 1e-8, "seed {seed} s {s}: {v} > {s} * {a1}");
            prev = v;
        }
    }
}

#[test]
fn alphas_nonincreasing_in_beta() {
    let a = gaussian(3, 8, 4);
    for norm in [ObservationNorm::L1, ObservationNorm::Linf] {
        let grid = [0.05, 0.2, 0.5, 1.0, 2.0, 8.0];
        let vals: Vec<f64> =
            grid.iter().map(|&b| compute_alphas(&a, 2, Beta::new(b).unwrap(), norm).unwrap().0).collect();
        let (inf, _) = compute_alphas(&a, 2, Beta::INFINITY, norm).unwrap();
        for w in vals.windows(2) {
            assert!(w[0] >= w[1] - 1e-8, "{norm:?}: {vals:?}");
        }
        assert!(vals[vals.len() - 1] >= inf - 1e-8);
    }
}

#[test]
fn bound_chain() {
    for seed in 0..4 {
        let a = gaussian(8, 20, 40 + seed);
        let mu = s_bound_mu(&a).unwrap().s_certified;
        let (_, y) = compute_alpha1(&a, Beta::INFINITY, ObservationNorm::L2).unwrap();
        let s1 = improved_s_from_corrector(&a, &y).unwrap();
        let c = s_bound_alphas(&a, Beta::INFINITY, ObservationNorm::L2).unwrap();
        let bar = s_upper_bound(&a, &ScaConfig::default(), 1).unwrap().s_bar;
        assert!(mu <= s1 && s1 <= c.s_certified && c.s_certified <= bar, "seed {seed}: {mu} {s1} {} {bar}", c.s_certified);
        assert!(c.verify(&a).unwrap());
    }
}

#[test]
fn improved_s_matches_direct_rescan() {
    let a = gaussian(4, 16, 9);
    let (_, y) = compute_alpha1(&a, Beta::INFINITY, ObservationNorm::L2).unwrap();
    // columns of I - Y^T A, scanned one level at a time
    let r = nalgebra::DMatrix::<f64>::identity(16, 16) - y.y().transpose() * a.matrix();
    let mut direct = 0;
    for s in 1..=16 {
        let worst = (0..16)
            .map(|j| norm_s1(&r.column(j).iter().copied().collect::<Vec<_>>(), s).unwrap())
            .fold(0.0f64, f64::max);
        if worst < 0.5 {
            direct = s;
        } else {
            break;
        }
    }
    assert_eq!(improved_s_from_corrector(&a, &y).unwrap(), direct);
}

#[test]
fn certified_levels_have_injective_submatrices() {
    for seed in 0..3 {
        let a = gaussian(10, 24, 70 + seed);
        let c = s_bound_alphas(&a, Beta::INFINITY, ObservationNorm::L2).unwrap();
        assert!(c.s_certified >= 1);
        for s in 1..=c.s_certified {
            assert!(submatrix_kernel_check(&a, s, 500), "seed {seed} s {s}");
        }
    }
}

#[test]
fn sqrt_k_limit_small() {
    // n = 32 k with k = 2
    let a = gaussian(2, 64, 3);
    for s in 1..=4 {
        let (v, _) = compute_alphas(&a, s, Beta::INFINITY, ObservationNorm::L2).unwrap();
        let lim = performance_limit(2, 64, s);
        assert!(lim.applicable);
        assert!(v >= lim.value - 1e-6, "s {s}: {v} < {}", lim.value);
    }
}

#[test]
fn sca_restarts_are_monotone() {
    for seed in 0..4 {
        let a = gaussian(4, 10, 20 + seed);
        for s in 1..=3 {
            let out = sca_detailed(&a, s, &ScaConfig::default().with_seed(seed)).unwrap();
            assert_eq!(out.traces.len(), ScaConfig::default().restarts);
            for t in &out.traces {
                for w in t.windows(2) {
                    assert!(w[1] >= w[0] - 1e-10, "{t:?}");
                }
            }
            assert!(out.witness.is_valid_for(&a));
        }
    }
}

#[test]
fn sca_usually_finds_the_optimum() {
    let mut hits = 0;
    for seed in 0..10 {
        let a = gaussian(3, 6, 200 + seed);
        let exact = gammahat_exact(&a, 2, DEFAULT_ORACLE_LIMIT).unwrap();
        let (v, _) = sca_lower_bound(&a, 2, &ScaConfig::default()).unwrap();
        assert!(v <= exact + 1e-9);
        if v >= exact - 1e-6 {
            hits += 1;
        }
    }
    assert!(hits >= 8, "{hits}/10");
}
