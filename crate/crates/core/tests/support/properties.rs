//! Property bodies shared by the property suite and the acceptance target.

use proptest::prelude::*;
use proptest::test_runner::TestCaseError;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tca_core::controller::{estimate_voi, net_utility};
use tca_core::environment::{apply_query, observe, reset};
use tca_core::rng::{stream_rng, Stream};
use tca_core::*;

pub const SIMPLEX_CASES: u32 = 10_000;
pub const UTILITY_CASES: u32 = 2_000;
pub const STOP_CASES: u32 = 500;
pub const DECOUPLING_CASES: u32 = 500;
pub const VOI_KS: [usize; 4] = [8, 32, 128, 512];

pub fn belief(weights: &[f64]) -> Belief {
    let total: f64 = weights.iter().sum();
    Belief::new(weights.iter().map(|w| w / total).collect()).unwrap()
}

fn weights(n: std::ops::Range<usize>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(1e-6f64..1.0, n)
}

fn terms() -> impl Strategy<Value = CostTerms> {
    (any::<bool>(), any::<bool>(), any::<bool>(), any::<bool>()).prop_map(|(a, b, c, d)| CostTerms {
        use_stop: a,
        use_space: b,
        use_time: c,
        use_live_congestion: d,
    })
}

pub type SimplexCase = (Vec<f64>, f64, f64, usize, u64);

pub fn simplex_cases() -> impl Strategy<Value = SimplexCase> {
    (weights(2..9), 0.0f64..8.0, 1.0f64..3.0, 0usize..8, any::<u64>())
}

/// One Bayes update keeps the belief on the simplex with bounded entropy.
pub fn check_simplex((w, sharpness, base, truth, seed): SimplexCase) -> std::result::Result<(), TestCaseError> {
    let b = belief(&w);
    let n = b.len();
    let model = ObservationModel::new(sharpness, base).unwrap();
    let obs = model.sample(n, truth % n, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
    let post = bayes_update(&b, &obs, &model).unwrap();
    let total: f64 = post.probs().iter().sum();
    prop_assert!((total - 1.0).abs() < 1e-9);
    prop_assert!(post.probs().iter().all(|p| (0.0..=1.0).contains(p)));
    // The ε inside the log lets a point mass dip to -ln(1 + ε).
    for h in [b.entropy(), post.entropy()] {
        prop_assert!(h >= -2e-12 && h <= (n as f64).ln() + 1e-9, "entropy {h}");
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct UtilityCase {
    voi: f64,
    t: f64,
    c: f64,
    dt: f64,
    dc: f64,
    tau: f64,
    omega: f64,
    alpha: f64,
    terms: CostTerms,
}

pub fn utility_cases() -> impl Strategy<Value = UtilityCase> {
    (
        (0.0f64..1.7, 0.0f64..300.0, 0.0f64..500.0, 0.0f64..100.0, 0.0f64..200.0),
        (1.0f64..60.0, 0.0f64..80.0, 0.0f64..0.05, terms()),
    )
        .prop_map(|((voi, t, c, dt, dc), (tau, omega, alpha, terms))| UtilityCase {
            voi,
            t,
            c,
            dt,
            dc,
            tau,
            omega,
            alpha,
            terms,
        })
}

/// Net utility never rises with elapsed time or congestion.
pub fn check_utility(u: UtilityCase) -> std::result::Result<(), TestCaseError> {
    let cfg = ControllerConfig {
        alpha: u.alpha,
        terms: u.terms,
        ..ControllerConfig::emdg_default()
    };
    let tool = ToolSpec {
        name: "x".into(),
        tau: u.tau,
        omega: u.omega,
        sharpness: 1.0,
        expected_gain: 0.5,
    };
    let before = net_utility(u.voi, StateView { t: u.t, congestion: u.c }, &tool, &cfg);
    let after = net_utility(
        u.voi,
        StateView {
            t: u.t + u.dt,
            congestion: u.c + u.dc,
        },
        &tool,
        &cfg,
    );
    prop_assert!(after <= before + 1e-12);
    Ok(())
}

pub type StopCase = (Vec<f64>, f64, f64, Vec<(f64, f64)>, f64, f64, u64);

pub fn stop_cases() -> impl Strategy<Value = StopCase> {
    (
        weights(5..6),
        0.0f64..120.0,
        0.0f64..200.0,
        prop::collection::vec((0.0f64..50.0, 0.0f64..100.0), 1..6),
        0.005f64..0.03,
        prop::sample::select(vec![0.0, 0.1, 0.5]),
        any::<u64>(),
    )
}

/// Once stopping is optimal, costlier states under the same belief stop too.
pub fn check_stop_absorbing((w, t, c, steps, alpha, eta, seed): StopCase) -> std::result::Result<(), TestCaseError> {
    let env = EnvConfig::emdg_default();
    let cfg = ControllerConfig {
        alpha,
        eta,
        ..ControllerConfig::emdg_default()
    };
    let b = belief(&w);
    let decide_at = |view: StateView| decide(&b, view, &env, &cfg, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
    let mut view = StateView { t, congestion: c };
    let mut stopped = decide_at(view).is_stop();
    for (dt, dc) in steps {
        view = StateView {
            t: view.t + dt,
            congestion: view.congestion + dc,
        };
        let now = decide_at(view).is_stop();
        prop_assert!(!stopped || now, "left the stop region at {view:?}");
        stopped = now;
    }
    Ok(())
}

pub type DecouplingCase = (u64, u64, Vec<usize>, u64, u64);

pub fn decoupling_cases() -> impl Strategy<Value = DecouplingCase> {
    (
        any::<u64>(),
        any::<u64>(),
        prop::collection::vec(0usize..2, 1..6),
        any::<u64>(),
        any::<u64>(),
    )
}

/// Rollout draws never reach the realized observations.
pub fn check_decoupling((master, index, actions, rollout_a, rollout_b): DecouplingCase) -> std::result::Result<(), TestCaseError> {
    let env = EnvConfig::emdg_default();
    let cfg = ControllerConfig::emdg_default();
    let trace = |rollout_seed: u64| {
        let mut env_rng = stream_rng(master, index, Stream::Environment);
        let mut rollout_rng = stream_rng(rollout_seed, index, Stream::Rollout);
        let mut state = reset(&env, &mut env_rng);
        let mut b = Belief::uniform(env.hypothesis_count);
        let mut out = Vec::new();
        for &a in &actions {
            decide(&b, StateView::from(&state), &env, &cfg, &mut rollout_rng).unwrap();
            let tool = &env.tools[a];
            state = apply_query(&state, tool, &env);
            let obs = observe(&state, tool, &env, &mut env_rng).unwrap();
            b = bayes_update(&b, &obs, &tool.model(env.observation_base).unwrap()).unwrap();
            out.push((state.clone(), obs));
        }
        out
    };
    prop_assert_eq!(trace(rollout_a), trace(rollout_b));
    Ok(())
}

fn voi_std(b: &Belief, model: &ObservationModel, k: usize, reps: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xs: Vec<f64> = (0..reps).map(|_| estimate_voi(b, model, k, &mut rng).unwrap()).collect();
    let mean = xs.iter().sum::<f64>() / reps as f64;
    (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (reps - 1) as f64).sqrt()
}

/// Worst spread of `std·√K` over [`VOI_KS`], as a max/min ratio.
pub fn voi_std_spread() -> f64 {
    let env = EnvConfig::emdg_default();
    let beliefs = [Belief::uniform(5), belief(&[0.6, 0.2, 0.1, 0.07, 0.03])];
    let mut worst = 1.0f64;
    for b in &beliefs {
        for tool in &env.tools {
            let model = tool.model(env.observation_base).unwrap();
            let scaled: Vec<f64> = VOI_KS
                .iter()
                .map(|&k| voi_std(b, &model, k, 300, k as u64) * (k as f64).sqrt())
                .collect();
            let (lo, hi) = scaled
                .iter()
                .fold((f64::MAX, 0.0f64), |(lo, hi), s| (lo.min(*s), hi.max(*s)));
            worst = worst.max(hi / lo);
        }
    }
    worst
}
