//! Bounds against exhaustive ground truth on oracle-sized instances.

use l1cert_core::bounds::{compute_alpha1, compute_alphas, s_bound_alphas, s_bound_mu};
use l1cert_core::gen::{generate, Family, GenSpec};
use l1cert_core::lower::{sca_lower_bound, s_upper_bound, ScaConfig};
use l1cert_core::oracle::{gammahat_circuits, gammahat_exact, s_star_exact, DEFAULT_ORACLE_LIMIT};
use l1cert_core::{Beta, ObservationNorm, SensingMatrix};

const TOL: f64 = 1e-6;

fn gaussian(k: usize, n: usize, seed: u64) -> SensingMatrix {
    generate(&GenSpec { family: Family::Gaussian, k, n, seed, normalize: true }).unwrap()
}

fn instances() -> Vec<(SensingMatrix, usize)> {
    (0..30u64)
        .map(|i| {
            let k = [2, 3, 4][i as usize % 3];
            let n = [6, 8, 10][i as usize / 3 % 3];
            let s = [1, 2, 3][i as usize / 9 % 3];
            (gaussian(k, n, 100 + i), s)
        })
        .collect()
}

#[test]
fn lower_oracle_upper() {
    for (idx, (a, s)) in instances().into_iter().enumerate() {
        let exact = gammahat_exact(&a, s, DEFAULT_ORACLE_LIMIT).unwrap();
        let (lower, w) = sca_lower_bound(&a, s, &ScaConfig::default()).unwrap();
        let (upper, _) = compute_alphas(&a, s, Beta::INFINITY, ObservationNorm::L2).unwrap();
        assert!(w.is_valid_for(&a));
        assert!(lower <= exact + TOL, "#{idx}: sca {lower} > oracle {exact}");
        assert!(exact <= upper + TOL, "#{idx}: oracle {exact} > alpha_s {upper}");
    }
}

#[test]
fn alpha1_is_exact() {
    for (idx, (a, _)) in instances().into_iter().enumerate() {
        let exact = gammahat_exact(&a, 1, DEFAULT_ORACLE_LIMIT).unwrap();
        let (v, _) = compute_alpha1(&a, Beta::INFINITY, ObservationNorm::L2).unwrap();
        assert!((v - exact).abs() <= TOL, "#{idx}: alpha_1 {v} vs {exact}");
    }
}

#[test]
fn certified_levels_bracket_the_truth() {
    for (idx, (a, _)) in instances().into_iter().enumerate() {
        let star = s_star_exact(&a, DEFAULT_ORACLE_LIMIT).unwrap();
        let mu = s_bound_mu(&a).unwrap().s_certified;
        let cert = s_bound_alphas(&a, Beta::INFINITY, ObservationNorm::L2).unwrap().s_certified;
        let bar = s_upper_bound(&a, &ScaConfig::default(), 1).unwrap().s_bar;
        assert!(mu <= cert, "#{idx}: mu {mu} > alpha {cert}");
        assert!(cert <= star && star <= bar, "#{idx}: {cert} <= {star} <= {bar} violated");
    }
}

#[test]
fn two_oracles_agree() {
    for k in 1..=3 {
        for n in (k + 1)..=8 {
            let a = gaussian(k, n, (10 * k + n) as u64);
            for s in 1..=n.min(3) {
                let v = gammahat_exact(&a, s, DEFAULT_ORACLE_LIMIT).unwrap();
                let c = gammahat_circuits(&a, s, DEFAULT_ORACLE_LIMIT).unwrap();
                assert!((v - c).abs() <= TOL, "{k}x{n} s={s}: {v} vs {c}");
            }
        }
    }
}

#[test]
fn oracle_is_monotone_and_starts_at_alpha1() {
    let a = gaussian(3, 7, 5);
    let vals: Vec<f64> = (1..=4).map(|s| gammahat_exact(&a, s, DEFAULT_ORACLE_LIMIT).unwrap()).collect();
    for w in vals.windows(2) {
        assert!(w[0] <= w[1] + TOL, "{vals:?}");
    }
}
