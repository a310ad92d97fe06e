//! Categorical beliefs over a finite hypothesis set and their Bayesian
//! update under a symmetric Dirichlet observation channel.
//!
//! A tool with sharpness `c` answers with a point `y` on the simplex drawn
//! from `Dir(base·1 + c·e_θ)`, where `θ` is the hypothesis the observation is
//! generated under. The likelihood of hypothesis `θ` is the Dirichlet density
//! of `y` under the same concentration, so the posterior is
//! `b'(θ) ∝ b(θ) · Dir(y; base·1 + c·e_θ)`.

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Result, TcaError};

/// Guard added inside the logarithm of [`entropy`].
pub const DEFAULT_EPS: f64 = 1e-12;

/// Tolerance on the unit sum of probability vectors.
pub const SIMPLEX_TOL: f64 = 1e-9;

fn check_simplex(values: &[f64], what: &str) -> std::result::Result<(), String> {
    if values.is_empty() {
        return Err(format!("{what} is empty"));
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
        return Err(format!("{what} has an invalid entry {v}"));
    }
    let sum: f64 = values.iter().sum();
    if (sum - 1.0).abs() > SIMPLEX_TOL {
        return Err(format!("{what} sums to {sum}"));
    }
    Ok(())
}

/// Probability vector over hypotheses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Belief {
    probs: Vec<f64>,
}

impl Belief {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        check_simplex(&probs, "belief").map_err(TcaError::InvalidBelief)?;
        Ok(Self { probs })
    }

    /// Uniform prior over `n` hypotheses.
    pub fn uniform(n: usize) -> Self {
        assert!(n > 0, "belief needs at least one hypothesis");
        Self {
            probs: vec![1.0 / n as f64; n],
        }
    }

    pub fn point_mass(n: usize, index: usize) -> Result<Self> {
        if index >= n {
            return Err(TcaError::HypothesisOutOfRange { index, count: n });
        }
        let mut probs = vec![0.0; n];
        probs[index] = 1.0;
        Ok(Self { probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Entropy in nats with the default log guard.
    pub fn entropy(&self) -> f64 {
        entropy(self, DEFAULT_EPS)
    }

    /// Most probable hypothesis; ties resolve to the lowest index.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, p) in self.probs.iter().enumerate() {
            if *p > self.probs[best] {
                best = i;
            }
        }
        best
    }

    /// Draws a hypothesis index with probability `b(i)`.
    pub fn sample_hypothesis<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.quantile(rng.random())
    }

    /// Inverse CDF: the first index whose cumulative mass exceeds `u ∈ [0, 1)`.
    pub fn quantile(&self, u: f64) -> usize {
        let mut acc = 0.0;
        for (i, p) in self.probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return i;
            }
        }
        // Rounding left `acc` just below 1; fall back to the last supported index.
        self.probs.iter().rposition(|p| *p > 0.0).unwrap_or(0)
    }

    /// Builds a belief from nonnegative weights by normalizing them.
    pub(crate) fn from_weights(mut weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total.is_finite() && total > 0.0) {
            return Err(TcaError::DegenerateLikelihood);
        }
        weights.iter_mut().for_each(|w| *w /= total);
        Ok(Self { probs: weights })
    }
}

impl TryFrom<Vec<f64>> for Belief {
    type Error = TcaError;

    fn try_from(probs: Vec<f64>) -> Result<Self> {
        Self::new(probs)
    }
}

impl From<Belief> for Vec<f64> {
    fn from(b: Belief) -> Self {
        b.probs
    }
}

/// Categorical entropy `-Σ b(i)·ln(b(i) + eps)` in nats.
pub fn entropy(b: &Belief, eps: f64) -> f64 {
    entropy_of(b.probs(), eps)
}

pub(crate) fn entropy_of(probs: &[f64], eps: f64) -> f64 {
    -probs
        .iter()
        .filter(|p| **p > 0.0)
        .map(|p| p * (p + eps).ln())
        .sum::<f64>()
}

/// A point on the simplex returned by a tool query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    point: Vec<f64>,
}

impl Observation {
    pub fn new(point: Vec<f64>) -> Result<Self> {
        check_simplex(&point, "observation").map_err(TcaError::InvalidObservation)?;
        Ok(Self { point })
    }

    pub fn point(&self) -> &[f64] {
        &self.point
    }

    pub fn len(&self) -> usize {
        self.point.len()
    }

    pub fn is_empty(&self) -> bool {
        self.point.is_empty()
    }
}

/// Dirichlet observation channel of one tool.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservationModel {
    sharpness: f64,
    base: f64,
}

impl ObservationModel {
    /// `sharpness` is the concentration boost on the generating hypothesis,
    /// `base` the symmetric concentration shared by all coordinates.
    ///
    /// Sharpness zero is accepted and gives an uninformative channel.
    pub fn new(sharpness: f64, base: f64) -> Result<Self> {
        if !(sharpness.is_finite() && sharpness >= 0.0) {
            return Err(TcaError::InvalidModel(format!(
                "sharpness must be finite and nonnegative, got {sharpness}"
            )));
        }
        if !(base.is_finite() && base >= 1.0) {
            return Err(TcaError::InvalidModel(format!(
                "base concentration must be finite and at least 1, got {base}"
            )));
        }
        Ok(Self { sharpness, base })
    }

    pub fn sharpness(&self) -> f64 {
        self.sharpness
    }

    pub fn base(&self) -> f64 {
        self.base
    }

    /// Concentration vector `base·1 + sharpness·e_hypothesis`.
    pub fn concentration(&self, n: usize, hypothesis: usize) -> Vec<f64> {
        let mut alpha = vec![self.base; n];
        alpha[hypothesis] += self.sharpness;
        alpha
    }

    /// `ln Γ(Σα) - Σ ln Γ(α_i)`, identical for every hypothesis by symmetry.
    fn log_normalizer(&self, n: usize) -> f64 {
        let total = n as f64 * self.base + self.sharpness;
        ln_gamma(total) - (n as f64 - 1.0) * ln_gamma(self.base) - ln_gamma(self.base + self.sharpness)
    }

    fn log_kernel(&self, point: &[f64], hypothesis: usize) -> f64 {
        point
            .iter()
            .enumerate()
            .map(|(i, y)| {
                let a = if i == hypothesis {
                    self.base + self.sharpness
                } else {
                    self.base
                };
                // (a - 1)·ln y with 0·ln 0 = 0 on the boundary.
                if a == 1.0 {
                    0.0
                } else {
                    (a - 1.0) * y.ln()
                }
            })
            .sum()
    }

    /// Log Dirichlet density of `obs` when `hypothesis` generated it.
    pub fn log_density(&self, obs: &Observation, hypothesis: usize) -> Result<f64> {
        let n = obs.len();
        if hypothesis >= n {
            return Err(TcaError::HypothesisOutOfRange {
                index: hypothesis,
                count: n,
            });
        }
        Ok(self.log_normalizer(n) + self.log_kernel(obs.point(), hypothesis))
    }

    /// Draws an observation over `n` hypotheses generated by `true_hypothesis`.
    pub fn sample<R: Rng + ?Sized>(
        &self,
        n: usize,
        true_hypothesis: usize,
        rng: &mut R,
    ) -> Result<Observation> {
        if true_hypothesis >= n {
            return Err(TcaError::HypothesisOutOfRange {
                index: true_hypothesis,
                count: n,
            });
        }
        Ok(Observation {
            point: self.sample_point(n, true_hypothesis, rng),
        })
    }

    pub(crate) fn sample_point<R: Rng + ?Sized>(
        &self,
        n: usize,
        true_hypothesis: usize,
        rng: &mut R,
    ) -> Vec<f64> {
        let shared = Gamma::new(self.base, 1.0).expect("base validated at construction");
        let boosted =
            Gamma::new(self.base + self.sharpness, 1.0).expect("sharpness validated at construction");
        loop {
            let mut point: Vec<f64> = (0..n)
                .map(|i| {
                    if i == true_hypothesis {
                        boosted.sample(rng)
                    } else {
                        shared.sample(rng)
                    }
                })
                .collect();
            let total: f64 = point.iter().sum();
            // Every coordinate underflowing to zero is astronomically unlikely;
            // redraw rather than divide by zero.
            if total > 0.0 && total.is_finite() {
                point.iter_mut().for_each(|y| *y /= total);
                return point;
            }
        }
    }
}

/// Draws a tool observation generated by `true_hypothesis`.
pub fn sample_observation<R: Rng + ?Sized>(
    model: &ObservationModel,
    hypothesis_count: usize,
    true_hypothesis: usize,
    rng: &mut R,
) -> Result<Observation> {
    model.sample(hypothesis_count, true_hypothesis, rng)
}

/// Posterior `b'(θ) ∝ b(θ)·Dir(obs; base·1 + c·e_θ)`. The input is untouched.
pub fn bayes_update(b: &Belief, obs: &Observation, model: &ObservationModel) -> Result<Belief> {
    if obs.len() != b.len() {
        return Err(TcaError::DimensionMismatch {
            expected: b.len(),
            actual: obs.len(),
        });
    }
    posterior_from_point(b.probs(), obs.point(), model)
}

pub(crate) fn posterior_from_point(
    prior: &[f64],
    point: &[f64],
    model: &ObservationModel,
) -> Result<Belief> {
    let log_norm = model.log_normalizer(prior.len());
    let log_post: Vec<f64> = prior
        .iter()
        .enumerate()
        .map(|(h, p)| {
            if *p > 0.0 {
                p.ln() + log_norm + model.log_kernel(point, h)
            } else {
                f64::NEG_INFINITY
            }
        })
        .collect();
    let peak = log_post
        .iter()
        .copied()
        .filter(|v| !v.is_nan())
        .fold(f64::NEG_INFINITY, f64::max);
    if !peak.is_finite() {
        return Err(TcaError::DegenerateLikelihood);
    }
    let weights = log_post
        .iter()
        .map(|v| if v.is_nan() { 0.0 } else { (v - peak).exp() })
        .collect();
    Belief::from_weights(weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn entropy_reference_values() {
        assert!((Belief::uniform(5).entropy() - 5f64.ln()).abs() < 1e-9);
        assert!((Belief::uniform(5).entropy() - 1.6094).abs() < 1e-4);
        let point = Belief::point_mass(5, 0).unwrap();
        assert_eq!(entropy(&point, 0.0), 0.0);
        let half = Belief::new(vec![0.5, 0.5]).unwrap();
        assert!((entropy(&half, 0.0) - std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn eps_does_not_move_entropy_at_eight_decimals() {
        let b = Belief::uniform(5);
        assert!((entropy(&b, 0.0) - entropy(&b, DEFAULT_EPS)).abs() < 1e-8);
    }

    #[test]
    fn rejects_off_simplex_vectors() {
        assert!(Belief::new(vec![0.5, 0.6]).is_err());
        assert!(Belief::new(vec![-0.1, 1.1]).is_err());
        assert!(Belief::new(vec![]).is_err());
        assert!(Observation::new(vec![f64::NAN, 1.0]).is_err());
        assert!(Belief::point_mass(3, 3).is_err());
    }

    #[test]
    fn model_validation() {
        assert!(ObservationModel::new(-1.0, 1.0).is_err());
        assert!(ObservationModel::new(1.0, 0.5).is_err());
        assert!(ObservationModel::new(f64::INFINITY, 1.0).is_err());
        assert!(ObservationModel::new(0.0, 1.0).is_ok());
    }

    #[test]
    fn invalid_true_hypothesis_is_an_error() {
        let model = ObservationModel::new(2.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(matches!(
            model.sample(5, 5, &mut rng),
            Err(TcaError::HypothesisOutOfRange { index: 5, count: 5 })
        ));
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let model = ObservationModel::new(2.0, 1.0).unwrap();
        let a = model.sample(5, 2, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = model.sample(5, 2, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
        assert!((a.point().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn huge_sharpness_concentrates_on_truth() {
        let model = ObservationModel::new(1e6, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let obs = model.sample(5, 3, &mut rng).unwrap();
            assert!(obs.point()[3] > 0.999);
        }
    }

    #[test]
    fn zero_sharpness_draws_are_symmetric() {
        let model = ObservationModel::new(0.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let draws = 10_000;
        let mut sums = [0.0; 5];
        for _ in 0..draws {
            let obs = model.sample(5, 0, &mut rng).unwrap();
            for (s, y) in sums.iter_mut().zip(obs.point()) {
                *s += y;
            }
        }
        // Dir(1,...,1) coordinates have variance (1/5)(4/5)/6; the mean's
        // standard error over 10k draws is about 0.0016.
        let se = ((0.2 * 0.8 / 6.0) / draws as f64).sqrt();
        for s in sums {
            assert!((s / draws as f64 - 0.2).abs() < 4.0 * se);
        }
    }

    #[test]
    fn zero_sharpness_posterior_equals_prior() {
        let model = ObservationModel::new(0.0, 1.0).unwrap();
        let prior = Belief::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let obs = Observation::new(vec![0.7, 0.1, 0.1, 0.1]).unwrap();
        let post = bayes_update(&prior, &obs, &model).unwrap();
        for (a, b) in post.probs().iter().zip(prior.probs()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn vertex_observation_points_at_its_hypothesis() {
        let model = ObservationModel::new(20.0, 2.0).unwrap();
        let obs = Observation::new(vec![0.01, 0.01, 0.96, 0.01, 0.01]).unwrap();
        let post = bayes_update(&Belief::uniform(5), &obs, &model).unwrap();
        assert_eq!(post.argmax(), 2);
        assert!(post.probs()[2] > 0.99);
    }

    #[test]
    fn density_matches_closed_form_ratio() {
        // For a symmetric channel the likelihood ratio between hypotheses
        // reduces to (y_i / y_j)^c.
        let model = ObservationModel::new(2.5, 1.5).unwrap();
        let obs = Observation::new(vec![0.5, 0.3, 0.2]).unwrap();
        let l0 = model.log_density(&obs, 0).unwrap();
        let l2 = model.log_density(&obs, 2).unwrap();
        assert!((l0 - l2 - 2.5 * (0.5f64 / 0.2).ln()).abs() < 1e-12);
    }

    #[test]
    fn density_integrates_to_one_on_two_simplex() {
        // Dir(a, b) on the 1-simplex is Beta(a, b); integrate by midpoint rule.
        let model = ObservationModel::new(3.0, 2.0).unwrap();
        let steps = 20_000;
        let mut total = 0.0;
        for k in 0..steps {
            let y = (k as f64 + 0.5) / steps as f64;
            let obs = Observation::new(vec![y, 1.0 - y]).unwrap();
            total += model.log_density(&obs, 0).unwrap().exp() / steps as f64;
        }
        assert!((total - 1.0).abs() < 1e-6);
    }

    #[test]
    fn update_leaves_input_untouched_and_checks_dimension() {
        let model = ObservationModel::new(2.0, 1.0).unwrap();
        let prior = Belief::uniform(3);
        let obs = Observation::new(vec![0.6, 0.3, 0.1]).unwrap();
        let post = bayes_update(&prior, &obs, &model).unwrap();
        assert_eq!(prior, Belief::uniform(3));
        assert_ne!(post, prior);
        let short = Observation::new(vec![0.5, 0.5]).unwrap();
        assert!(matches!(
            bayes_update(&prior, &short, &model),
            Err(TcaError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn zero_coordinate_against_every_supported_hypothesis_is_degenerate() {
        let model = ObservationModel::new(2.0, 1.0).unwrap();
        let prior = Belief::point_mass(3, 1).unwrap();
        let obs = Observation::new(vec![0.5, 0.0, 0.5]).unwrap();
        assert!(matches!(
            bayes_update(&prior, &obs, &model),
            Err(TcaError::DegenerateLikelihood)
        ));
    }

    #[test]
    fn repeated_evidence_matches_direct_density_ratio() {
        // 50 sequential updates must agree with the batch posterior
        // b_0(θ)·Π_k y_k(θ)^c computed directly in log space.
        let model = ObservationModel::new(1.5, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let truth = 3;
        let mut belief = Belief::uniform(5);
        let mut log_weights = [0.0f64; 5];
        for _ in 0..50 {
            let obs = model.sample(5, truth, &mut rng).unwrap();
            belief = bayes_update(&belief, &obs, &model).unwrap();
            for (w, y) in log_weights.iter_mut().zip(obs.point()) {
                *w += 1.5 * y.ln();
            }
        }
        let peak = log_weights.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let z: f64 = log_weights.iter().map(|w| (w - peak).exp()).sum();
        for (p, w) in belief.probs().iter().zip(log_weights) {
            assert!((p - (w - peak).exp() / z).abs() < 1e-9);
        }
        assert!(belief.probs()[truth] > 0.999);
        assert!(belief.entropy() < 0.01);
    }
}
