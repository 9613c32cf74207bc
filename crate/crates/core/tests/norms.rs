use l1cert_core::{argmax_over_ps, hard_threshold, mutual_incoherence, norm_s1, SensingMatrix};
use proptest::prelude::*;

fn vector(n: std::ops::Range<usize>) -> impl Strategy<Value = Vec<f64>> {
    n.prop_flat_map(|n| prop::collection::vec(-10.0..10.0f64, n))
}

/// Sum of the s largest magnitudes by full sort.
fn sorted_sum(x: &[f64], s: usize) -> f64 {
    let mut m: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    m.sort_by(|a, b| b.partial_cmp(a).unwrap());
    m.iter().take(s).sum()
}

/// max_{i != j} |a_i^T a_j| / ||a_i||^2, straight from the definition.
fn incoherence_double_loop(a: &SensingMatrix) -> f64 {
    let col = |j: usize| -> Vec<f64> { (0..a.k()).map(|i| a.get(i, j)).collect() };
    let mut mu: f64 = 0.0;
    for i in 0..a.n() {
        let ai = col(i);
        let nn: f64 = ai.iter().map(|v| v * v).sum();
        for j in 0..a.n() {
            if i != j {
                let d: f64 = ai.iter().zip(col(j)).map(|(p, q)| p * q).sum();
                mu = mu.max(d.abs() / nn);
            }
        }
    }
    mu
}

proptest! {
    #[test]
    fn matches_sorting(x in vector(1..40), s in 1usize..45) {
        let s = s.min(x.len());
        prop_assert!((norm_s1(&x, s).unwrap() - sorted_sum(&x, s)).abs() < 1e-12);
    }

    #[test]
    fn endpoints_and_monotone(x in vector(1..40)) {
        let n = x.len();
        let inf = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let l1: f64 = x.iter().map(|v| v.abs()).sum();
        prop_assert_eq!(norm_s1(&x, 1).unwrap(), inf);
        prop_assert!((norm_s1(&x, n).unwrap() - l1).abs() < 1e-12);
        for s in 1..n {
            prop_assert!(norm_s1(&x, s).unwrap() <= norm_s1(&x, s + 1).unwrap());
        }
    }

    #[test]
    fn is_a_norm(
        (x, y, s) in (1usize..30).prop_flat_map(|n| (
            prop::collection::vec(-10.0..10.0f64, n),
            prop::collection::vec(-10.0..10.0f64, n),
            1..=n,
        )),
        t in -5.0..5.0f64,
    ) {
        let sum: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
        let scaled: Vec<f64> = x.iter().map(|a| t * a).collect();
        let (nx, ny) = (norm_s1(&x, s).unwrap(), norm_s1(&y, s).unwrap());
        prop_assert!(norm_s1(&sum, s).unwrap() <= nx + ny + 1e-12);
        prop_assert!((norm_s1(&scaled, s).unwrap() - t.abs() * nx).abs() < 1e-12 * (1.0 + nx * t.abs()));
    }

    #[test]
    fn argmax_attains_the_norm(x in vector(1..40), s in 1usize..40) {
        let s = s.min(x.len());
        let u = argmax_over_ps(&x, s).unwrap();
        prop_assert_eq!(u.dot(&x), norm_s1(&x, s).unwrap());
        prop_assert_eq!(u.support().len(), s);
    }

    #[test]
    fn euclidean_comparison(x in vector(1..40), s in 1usize..40) {
        let n = x.len();
        let s = s.min(n);
        let l2sq: f64 = x.iter().map(|v| v * v).sum();
        let ns = norm_s1(&x, s).unwrap();
        let factor = (n as f64 / (s * s) as f64).max(1.0);
        prop_assert!(l2sq <= ns * ns * factor * (1.0 + 1e-12));
    }

    #[test]
    fn thresholding_keeps_the_mass(x in vector(1..30), s in 1usize..30) {
        let s = s.min(x.len());
        let h = hard_threshold(&x, s);
        let kept: f64 = h.iter().map(|v| v.abs()).sum();
        prop_assert!((kept - norm_s1(&x, s).unwrap()).abs() < 1e-12);
        prop_assert!(h.iter().filter(|v| **v != 0.0).count() <= s);
    }

    #[test]
    fn incoherence_double_loop_and_symmetries(
        (k, n, entries, perm_seed, flips) in (1usize..6, 2usize..9).prop_flat_map(|(k, n)| (
            Just(k),
            Just(n),
            prop::collection::vec(prop_oneof![-2.0..-0.1f64, 0.1..2.0f64], k * n),
            any::<u64>(),
            prop::collection::vec(any::<bool>(), n),
        )),
    ) {
        let a = SensingMatrix::from_row_major(k, n, &entries).unwrap();
        let mu = mutual_incoherence(&a).unwrap();
        prop_assert!((mu - incoherence_double_loop(&a)).abs() < 1e-12);

        let mut order: Vec<usize> = (0..n).collect();
        let mut state = perm_seed;
        for i in (1..n).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            order.swap(i, (state >> 33) as usize % (i + 1));
        }
        let permuted: Vec<f64> = (0..k).flat_map(|i| order.iter().map(|&j| entries[i * n + j]).collect::<Vec<_>>()).collect();
        let p = SensingMatrix::from_row_major(k, n, &permuted).unwrap();
        prop_assert!((mutual_incoherence(&p).unwrap() - mu).abs() < 1e-12);

        let unit = a.normalized().unwrap();
        let signs: Vec<f64> = flips.iter().map(|&f| if f { -1.0 } else { 1.0 }).collect();
        let flipped = unit.scale_columns(&signs).unwrap();
        prop_assert!((mutual_incoherence(&flipped).unwrap() - mutual_incoherence(&unit).unwrap()).abs() < 1e-12);
    }
}

#[test]
fn seeded_sign_matrix_incoherence() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    let (k, n) = (16, 32);
    let v: Vec<f64> = (0..k * n).map(|_| if rng.random::<bool>() { 0.25 } else { -0.25 }).collect();
    let a = SensingMatrix::from_row_major(k, n, &v).unwrap();
    assert!((mutual_incoherence(&a).unwrap() - incoherence_double_loop(&a)).abs() < 1e-12);
}
