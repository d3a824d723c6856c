use aadp_core::features::{
    feature_map, generate_frequencies, hadamard, kernel_estimate, FeatureSet, FeatureStyle, FourierConfig, FrequencyMode,
};
use aadp_testkit::rbf;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn points(n: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect()).collect()
}

#[test]
fn hadamard_rows_are_orthogonal_up_to_order_ten() {
    for order in 0..=10u32 {
        let h = hadamard(order).unwrap();
        let n = 1usize << order;
        for i in 0..n {
            for j in 0..n {
                let dot: i64 = (0..n).map(|c| (h[i][c] * h[j][c]) as i64).sum();
                assert_eq!(dot, if i == j { n as i64 } else { 0 }, "order {order} ({i},{j})");
            }
        }
    }
}

#[test]
fn paired_kernel_is_one_on_the_diagonal() {
    for mode in [FrequencyMode::Gaussian, FrequencyMode::HadamardRademacher] {
        let f = generate_frequencies(3, 256, mode, 0.7, 5, true).unwrap();
        for x in points(20, 3, 1) {
            let k = kernel_estimate(&x, &x, &f, FeatureStyle::PairedCosSin).unwrap();
            assert!((k - 1.0).abs() <= 1e-12, "{mode:?}: {k}");
        }
    }
}

/// Median absolute kernel error over 100 random pairs in R^3, then the median
/// of that over 20 seeds.
fn kernel_error(m: usize) -> f64 {
    let pts = points(200, 3, 99);
    let mut per_seed: Vec<f64> = (0..20)
        .map(|seed| {
            let f = generate_frequencies(3, m, FrequencyMode::Gaussian, 1.0, seed, true).unwrap();
            let mut errs: Vec<f64> = (0..100)
                .map(|i| {
                    let (x, y) = (&pts[2 * i], &pts[2 * i + 1]);
                    (kernel_estimate(x, y, &f, FeatureStyle::PairedCosSin).unwrap() - rbf(x, y, 1.0)).abs()
                })
                .collect();
            errs.sort_by(f64::total_cmp);
            0.5 * (errs[49] + errs[50])
        })
        .collect();
    per_seed.sort_by(f64::total_cmp);
    0.5 * (per_seed[9] + per_seed[10])
}

#[test]
fn kernel_error_shrinks_with_more_features() {
    let errs: Vec<f64> = [64, 256, 1024].iter().map(|&m| kernel_error(m)).collect();
    assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
    assert!(errs[2] <= 0.1, "{errs:?}");
}

#[test]
fn hadamard_kernel_also_approximates_the_rbf() {
    let pts = points(200, 3, 4);
    let f = generate_frequencies(3, 1024, FrequencyMode::HadamardRademacher, 1.0, 8, true).unwrap();
    let mut errs: Vec<f64> = (0..100)
        .map(|i| {
            let (x, y) = (&pts[2 * i], &pts[2 * i + 1]);
            (kernel_estimate(x, y, &f, FeatureStyle::PairedCosSin).unwrap() - rbf(x, y, 1.0)).abs()
        })
        .collect();
    errs.sort_by(f64::total_cmp);
    assert!(errs[50] <= 0.1, "median error {}", errs[50]);
}

#[test]
fn squared_radii_follow_a_chi_square_law() {
    // Row norms at unit bandwidth are the chi radii: mean dim, variance 2 dim.
    let dim = 3;
    let f = generate_frequencies(dim, 20_000, FrequencyMode::HadamardRademacher, 1.0, 3, true).unwrap();
    let sq: Vec<f64> = f.rows.iter().map(|w| w.iter().map(|v| v * v).sum()).collect();
    let n = sq.len() as f64;
    let mean = sq.iter().sum::<f64>() / n;
    let var = sq.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    assert!((mean - dim as f64).abs() < 0.1, "mean {mean}");
    assert!((var - 2.0 * dim as f64).abs() < 0.4, "variance {var}");
}

#[test]
fn kernel_gram_matrix_is_positive_semidefinite() {
    let pts = points(40, 2, 12);
    for style in [FeatureStyle::CosOnly, FeatureStyle::PairedCosSin] {
        let f = generate_frequencies(2, 64, FrequencyMode::Gaussian, 0.5, 2, true).unwrap();
        let gram = DMatrix::from_fn(pts.len(), pts.len(), |i, j| kernel_estimate(&pts[i], &pts[j], &f, style).unwrap());
        let min = gram.symmetric_eigenvalues().min();
        let scale = gram.diagonal().max();
        assert!(min >= -1e-10 * scale, "{style:?}: smallest eigenvalue {min}");
    }
}

#[test]
fn feature_sets_are_deterministic_in_the_seed() {
    let states = points(30, 2, 6);
    let cfg = FourierConfig::default();
    let a = FeatureSet::state_action_fourier(&states, 2, 16, &cfg, 77).unwrap();
    let b = FeatureSet::state_action_fourier(&states, 2, 16, &cfg, 77).unwrap();
    let c = FeatureSet::state_action_fourier(&states, 2, 16, &cfg, 78).unwrap();
    assert_eq!(a.combine(&[1.0; 16]), b.combine(&[1.0; 16]));
    assert_ne!(a.combine(&[1.0; 16]), c.combine(&[1.0; 16]));
}

#[test]
fn cos_only_features_match_the_projection() {
    let f = generate_frequencies(2, 8, FrequencyMode::Gaussian, 1.0, 0, false).unwrap();
    let x = [0.3, -0.2];
    let proj = f.project(&x).unwrap();
    let v = feature_map(&x, &f, FeatureStyle::CosOnly).unwrap();
    for (p, c) in proj.iter().zip(&v) {
        assert_eq!(p.cos(), *c);
    }
}
