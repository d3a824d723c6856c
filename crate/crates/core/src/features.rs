//! Random Fourier features for the RBF kernel
//! `K(x, y) = exp(-|x - y|^2 / (2 sigma^2))`.
//!
//! Frequencies are drawn either i.i.d. Gaussian, `N(0, I / sigma^2)`, or from
//! stacked Hadamard-Rademacher blocks: each block is `H D / sqrt(d_pad)` with
//! `H` the Sylvester-Hadamard matrix and `D` a random +-1 diagonal, so the rows
//! of a block are orthonormal. Each row is then stretched by an independent
//! `chi(d)` radius, which gives the rows the same norm distribution as
//! Gaussian rows, and divided by the bandwidth.
//!
//! Inputs whose dimension is not a power of two are zero-padded to `d_pad`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest Hadamard order accepted by [`hadamard`] (2^16 rows).
pub const MAX_HADAMARD_ORDER: u32 = 16;

#[derive(Debug, Error, PartialEq)]
pub enum FeatureError {
    #[error("Hadamard order {0} exceeds the cap of {MAX_HADAMARD_ORDER}")]
    OrderTooLarge(u32),
    #[error("input has dimension {got}, frequencies expect {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("need at least one frequency/feature")]
    Empty,
    #[error("bandwidth must be positive and finite, got {0}")]
    Bandwidth(f64),
    #[error("feature table covers {got} points, expected {expected}")]
    Coverage { expected: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrequencyMode {
    Gaussian,
    HadamardRademacher,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureStyle {
    /// `cos(w_i . x)` for each frequency, unscaled.
    CosOnly,
    /// `[cos(w_i . x), sin(w_i . x)] / sqrt(m)`, interleaved per frequency.
    PairedCosSin,
}

/// Sylvester-Hadamard matrix of order `2^order`, built by the block
/// recursion `H_k = [[H, H], [H, -H]]` from `H_0 = [1]`.
pub fn hadamard(order: u32) -> Result<Vec<Vec<i32>>, FeatureError> {
    if order > MAX_HADAMARD_ORDER {
        return Err(FeatureError::OrderTooLarge(order));
    }
    let mut h = vec![vec![1]];
    for _ in 0..order {
        let n = h.len();
        let mut next = vec![vec![0; 2 * n]; 2 * n];
        for i in 0..n {
            for j in 0..n {
                next[i][j] = h[i][j];
                next[i][j + n] = h[i][j];
                next[i + n][j] = h[i][j];
                next[i + n][j + n] = -h[i][j];
            }
        }
        h = next;
    }
    Ok(h)
}

/// Entry `(i, j)` of the Sylvester-Hadamard matrix without materializing it.
fn hadamard_entry(i: usize, j: usize) -> f64 {
    if (i & j).count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Rows of random frequency vectors plus everything needed to regenerate them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyMatrix {
    pub mode: FrequencyMode,
    /// Input dimension `d`.
    pub dim: usize,
    /// Length of each row: `d` for Gaussian rows, the next power of two for
    /// Hadamard-Rademacher rows.
    pub padded_dim: usize,
    pub bandwidth: f64,
    pub seed: u64,
    /// Whether Hadamard-Rademacher rows carry chi radii.
    pub radii: bool,
    pub rows: Vec<Vec<f64>>,
}

/// Draws `count` frequency vectors for inputs of dimension `dim`.
/// Deterministic in all arguments.
pub fn generate_frequencies(
    dim: usize,
    count: usize,
    mode: FrequencyMode,
    bandwidth: f64,
    seed: u64,
    radii: bool,
) -> Result<FrequencyMatrix, FeatureError> {
    if count == 0 || dim == 0 {
        return Err(FeatureError::Empty);
    }
    if !(bandwidth > 0.0 && bandwidth.is_finite()) {
        return Err(FeatureError::Bandwidth(bandwidth));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (padded_dim, rows) = match mode {
        FrequencyMode::Gaussian => {
            let rows = (0..count)
                .map(|_| {
                    (0..dim)
                        .map(|_| {
                            let z: f64 = StandardNormal.sample(&mut rng);
                            z / bandwidth
                        })
                        .collect()
                })
                .collect();
            (dim, rows)
        }
        FrequencyMode::HadamardRademacher => {
            let d_pad = dim.next_power_of_two();
            let chi2 = ChiSquared::new(dim as f64).expect("dim >= 1");
            let norm = (d_pad as f64).sqrt();
            let mut rows = Vec::with_capacity(count);
            while rows.len() < count {
                let signs: Vec<f64> = (0..d_pad).map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 }).collect();
                for i in 0..d_pad.min(count - rows.len()) {
                    let radius = if radii { chi2.sample(&mut rng).sqrt() } else { 1.0 };
                    let scale = radius / (norm * bandwidth);
                    rows.push((0..d_pad).map(|j| hadamard_entry(i, j) * signs[j] * scale).collect());
                }
            }
            (d_pad, rows)
        }
    };
    Ok(FrequencyMatrix {
        mode,
        dim,
        padded_dim,
        bandwidth,
        seed,
        radii,
        rows,
    })
}

impl FrequencyMatrix {
    pub fn count(&self) -> usize {
        self.rows.len()
    }

    /// `w_i . x` for every row; `x` is implicitly zero-padded.
    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>, FeatureError> {
        if x.len() != self.dim {
            return Err(FeatureError::Dimension {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(self
            .rows
            .iter()
            .map(|w| w.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }
}

/// Feature vector of `x`: `m` cosines, or `2m` scaled cosine/sine pairs.
pub fn feature_map(x: &[f64], freq: &FrequencyMatrix, style: FeatureStyle) -> Result<Vec<f64>, FeatureError> {
    let proj = freq.project(x)?;
    Ok(match style {
        FeatureStyle::CosOnly => proj.iter().map(|p| p.cos()).collect(),
        FeatureStyle::PairedCosSin => {
            let scale = 1.0 / (proj.len() as f64).sqrt();
            proj.iter()
                .flat_map(|p| {
                    let (s, c) = p.sin_cos();
                    [c * scale, s * scale]
                })
                .collect()
        }
    })
}

/// Kernel estimate `phi(x) . phi(y)`.
pub fn kernel_estimate(x: &[f64], y: &[f64], freq: &FrequencyMatrix, style: FeatureStyle) -> Result<f64, FeatureError> {
    let fx = feature_map(x, freq, style)?;
    let fy = feature_map(y, freq, style)?;
    Ok(fx.iter().zip(&fy).map(|(a, b)| a * b).sum())
}

/// Median of all pairwise Euclidean distances; the default bandwidth.
/// Falls back to 1 when every point coincides.
pub fn median_pairwise_distance(points: &[Vec<f64>]) -> f64 {
    let mut d: Vec<f64> = Vec::with_capacity(points.len() * points.len().saturating_sub(1) / 2);
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            d.push(
                points[i]
                    .iter()
                    .zip(&points[j])
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt(),
            );
        }
    }
    if d.is_empty() {
        return 1.0;
    }
    let mid = d.len() / 2;
    let (_, m, _) = d.select_nth_unstable_by(mid, f64::total_cmp);
    if *m > 0.0 {
        *m
    } else {
        1.0
    }
}

/// How a set of Fourier features is generated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourierConfig {
    pub style: FeatureStyle,
    pub mode: FrequencyMode,
    /// `None` uses [`median_pairwise_distance`] of the states.
    pub bandwidth: Option<f64>,
    pub radii: bool,
}

impl Default for FourierConfig {
    fn default() -> Self {
        FourierConfig {
            style: FeatureStyle::CosOnly,
            mode: FrequencyMode::HadamardRademacher,
            bandwidth: None,
            radii: true,
        }
    }
}

/// What the rows of a [`FeatureSet`] index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FeatureDomain {
    States { n_states: usize },
    StateActions { n_states: usize, n_actions: usize },
}

impl FeatureDomain {
    pub fn n_points(&self) -> usize {
        match *self {
            FeatureDomain::States { n_states } => n_states,
            FeatureDomain::StateActions { n_states, n_actions } => n_states * n_actions,
        }
    }
}

/// Basis functions evaluated on every state (`psi`) or state-action pair
/// (`phi`, state-major). `frequencies` is empty for non-Fourier bases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSet {
    pub domain: FeatureDomain,
    pub style: Option<FeatureStyle>,
    /// One matrix per action for state-action features, one in total for
    /// state features.
    pub frequencies: Vec<FrequencyMatrix>,
    n_features: usize,
    /// Row-major `n_points x n_features`.
    values: Vec<f64>,
}

/// Seed of the `stream`-th independent generator derived from `seed`.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl FeatureSet {
    pub fn from_table(domain: FeatureDomain, n_features: usize, values: Vec<f64>) -> Result<Self, FeatureError> {
        if n_features == 0 {
            return Err(FeatureError::Empty);
        }
        if values.len() != domain.n_points() * n_features {
            return Err(FeatureError::Coverage {
                expected: domain.n_points() * n_features,
                got: values.len() / n_features,
            });
        }
        Ok(FeatureSet {
            domain,
            style: None,
            frequencies: Vec::new(),
            n_features,
            values,
        })
    }

    /// One indicator per state-action pair: `Phi = I`.
    pub fn state_action_indicators(n_states: usize, n_actions: usize) -> Self {
        let n = n_states * n_actions;
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            values[i * n + i] = 1.0;
        }
        FeatureSet {
            domain: FeatureDomain::StateActions { n_states, n_actions },
            style: None,
            frequencies: Vec::new(),
            n_features: n,
            values,
        }
    }

    /// One indicator per state: `Psi = I`.
    pub fn state_indicators(n_states: usize) -> Self {
        let mut values = vec![0.0; n_states * n_states];
        for i in 0..n_states {
            values[i * n_states + i] = 1.0;
        }
        FeatureSet {
            domain: FeatureDomain::States { n_states },
            style: None,
            frequencies: Vec::new(),
            n_features: n_states,
            values,
        }
    }

    /// `phi_i(x, u)` from a separate frequency matrix per action.
    pub fn state_action_fourier(
        states: &[Vec<f64>],
        n_actions: usize,
        k: usize,
        config: &FourierConfig,
        seed: u64,
    ) -> Result<Self, FeatureError> {
        let bandwidth = config.bandwidth.unwrap_or_else(|| median_pairwise_distance(states));
        let dim = states.first().map_or(0, Vec::len);
        let freqs = (0..n_actions)
            .map(|u| {
                generate_frequencies(
                    dim,
                    frequency_count(k, config.style),
                    config.mode,
                    bandwidth,
                    derive_seed(seed, u as u64),
                    config.radii,
                )
            })
            .collect::<Result<Vec<_>, _>>()?;
        let per_state: Vec<Vec<f64>> = states
            .par_iter()
            .map(|x| {
                let mut row = Vec::with_capacity(n_actions * k);
                for f in &freqs {
                    let mut v = feature_map(x, f, config.style)?;
                    v.truncate(k);
                    row.extend(v);
                }
                Ok(row)
            })
            .collect::<Result<_, FeatureError>>()?;
        Ok(FeatureSet {
            domain: FeatureDomain::StateActions {
                n_states: states.len(),
                n_actions,
            },
            style: Some(config.style),
            frequencies: freqs,
            n_features: k,
            values: per_state.concat(),
        })
    }

    /// `psi_j(x)` from a single frequency matrix.
    pub fn state_fourier(states: &[Vec<f64>], l: usize, config: &FourierConfig, seed: u64) -> Result<Self, FeatureError> {
        let bandwidth = config.bandwidth.unwrap_or_else(|| median_pairwise_distance(states));
        let dim = states.first().map_or(0, Vec::len);
        let freq = generate_frequencies(dim, frequency_count(l, config.style), config.mode, bandwidth, seed, config.radii)?;
        let rows: Vec<Vec<f64>> = states
            .par_iter()
            .map(|x| {
                let mut v = feature_map(x, &freq, config.style)?;
                v.truncate(l);
                Ok(v)
            })
            .collect::<Result<_, FeatureError>>()?;
        Ok(FeatureSet {
            domain: FeatureDomain::States { n_states: states.len() },
            style: Some(config.style),
            frequencies: vec![freq],
            n_features: l,
            values: rows.concat(),
        })
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_points(&self) -> usize {
        self.domain.n_points()
    }

    /// Feature values at one point (state, or state-action pair).
    pub fn row(&self, point: usize) -> &[f64] {
        &self.values[point * self.n_features..(point + 1) * self.n_features]
    }

    pub fn value(&self, point: usize, feature: usize) -> f64 {
        self.values[point * self.n_features + feature]
    }

    /// One basis function over all points.
    pub fn column(&self, feature: usize) -> Vec<f64> {
        (0..self.n_points()).map(|p| self.value(p, feature)).collect()
    }

    /// `sum_i weights_i * feature_i`, over all points.
    pub fn combine(&self, weights: &[f64]) -> Vec<f64> {
        (0..self.n_points())
            .map(|p| self.row(p).iter().zip(weights).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn check_state_actions(&self, n_states: usize, n_actions: usize) -> Result<(), FeatureError> {
        match self.domain {
            FeatureDomain::StateActions { n_states: s, n_actions: u } if s == n_states && u == n_actions => Ok(()),
            _ => Err(FeatureError::Coverage {
                expected: n_states * n_actions,
                got: self.n_points(),
            }),
        }
    }

    pub fn check_states(&self, n_states: usize) -> Result<(), FeatureError> {
        match self.domain {
            FeatureDomain::States { n_states: s } if s == n_states => Ok(()),
            _ => Err(FeatureError::Coverage {
                expected: n_states,
                got: self.n_points(),
            }),
        }
    }
}

/// Number of frequencies needed for `features` basis functions.
fn frequency_count(features: usize, style: FeatureStyle) -> usize {
    match style {
        FeatureStyle::CosOnly => features,
        FeatureStyle::PairedCosSin => features.div_ceil(2),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_hadamard_matrices() {
        assert_eq!(hadamard(0).unwrap(), vec![vec![1]]);
        assert_eq!(hadamard(1).unwrap(), vec![vec![1, 1], vec![1, -1]]);
        assert_eq!(hadamard(17), Err(FeatureError::OrderTooLarge(17)));
        let h = hadamard(3).unwrap();
        for (i, row) in h.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                assert_eq!(v as f64, hadamard_entry(i, j));
            }
        }
    }

    #[test]
    fn hadamard_rows_are_orthogonal_without_radii() {
        let f = generate_frequencies(4, 4, FrequencyMode::HadamardRademacher, 1.0, 3, false).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let dot: f64 = f.rows[i].iter().zip(&f.rows[j]).map(|(a, b)| a * b).sum();
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((dot - expected).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn non_power_of_two_dimensions_are_padded() {
        let f = generate_frequencies(3, 10, FrequencyMode::HadamardRademacher, 1.0, 1, true).unwrap();
        assert_eq!(f.padded_dim, 4);
        assert_eq!(f.count(), 10);
        assert!(f.rows.iter().all(|r| r.len() == 4));
        assert_eq!(f.project(&[1.0, 2.0, 3.0]).unwrap().len(), 10);
        assert!(f.project(&[1.0]).is_err());
    }

    #[test]
    fn bandwidth_scales_frequencies() {
        for mode in [FrequencyMode::Gaussian, FrequencyMode::HadamardRademacher] {
            let a = generate_frequencies(2, 8, mode, 1.0, 9, true).unwrap();
            let b = generate_frequencies(2, 8, mode, 2.0, 9, true).unwrap();
            for (ra, rb) in a.rows.iter().zip(&b.rows) {
                for (x, y) in ra.iter().zip(rb) {
                    assert_eq!(*y, *x / 2.0);
                }
            }
        }
    }

    #[test]
    fn cos_only_at_origin_is_all_ones() {
        let f = generate_frequencies(3, 5, FrequencyMode::Gaussian, 1.0, 0, true).unwrap();
        assert_eq!(feature_map(&[0.0; 3], &f, FeatureStyle::CosOnly).unwrap(), vec![1.0; 5]);
    }

    #[test]
    fn invalid_arguments() {
        assert_eq!(
            generate_frequencies(2, 0, FrequencyMode::Gaussian, 1.0, 0, true),
            Err(FeatureError::Empty)
        );
        assert_eq!(
            generate_frequencies(2, 3, FrequencyMode::Gaussian, 0.0, 0, true),
            Err(FeatureError::Bandwidth(0.0))
        );
    }

    #[test]
    fn indicator_sets() {
        let phi = FeatureSet::state_action_indicators(2, 3);
        assert_eq!(phi.n_features(), 6);
        assert_eq!(phi.value(4, 4), 1.0);
        assert_eq!(phi.value(4, 3), 0.0);
        assert!(phi.check_state_actions(2, 3).is_ok());
        assert!(phi.check_states(2).is_err());
        assert_eq!(FeatureSet::state_indicators(3).combine(&[1.0, 2.0, 3.0]), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn fourier_sets_have_requested_shape() {
        let states: Vec<Vec<f64>> = (0..7).map(|i| vec![i as f64, 1.0]).collect();
        for style in [FeatureStyle::CosOnly, FeatureStyle::PairedCosSin] {
            let cfg = FourierConfig { style, ..FourierConfig::default() };
            let phi = FeatureSet::state_action_fourier(&states, 2, 5, &cfg, 4).unwrap();
            assert_eq!((phi.n_points(), phi.n_features()), (14, 5));
            assert_eq!(phi.frequencies.len(), 2);
            assert_ne!(phi.frequencies[0].rows, phi.frequencies[1].rows);
            let psi = FeatureSet::state_fourier(&states, 3, &cfg, 4).unwrap();
            assert_eq!((psi.n_points(), psi.n_features()), (7, 3));
        }
    }

    #[test]
    fn median_distance_of_collinear_points() {
        let pts = vec![vec![0.0], vec![1.0], vec![3.0]];
        // distances 1, 2, 3
        assert_eq!(median_pairwise_distance(&pts), 2.0);
        assert_eq!(median_pairwise_distance(&[vec![1.0], vec![1.0]]), 1.0);
    }
}
