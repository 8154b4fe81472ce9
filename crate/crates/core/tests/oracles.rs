//! Library results checked against independent reference computations.

mod common;

use std::collections::HashMap;

use common::*;
use minimax_bayes::bandits::{
    bandit_regret_seeded, gittins_regret_exact, gittins_table, ArmRule, BanditMcConfig, BetaProductPrior,
};
use minimax_bayes::beliefs::{
    beta_reward_score, digamma, dirichlet_sample, dirichlet_score, ln_gamma, log_density, simplex_project,
    BeliefVector, BetaRewardPrior, DirichletProductPrior,
};
use minimax_bayes::cutting_plane::{cutting_plane_run_with, hit_and_run, CutPolytope, CuttingPlaneConfig, HitAndRunConfig};
use minimax_bayes::game::solve_matrix_game;
use minimax_bayes::mdp::{FiniteMdp, HistoryPolicyTree, InitialState, Policy};
use minimax_bayes::policy::{utility_gradient, utility_gradient_enumerate, utility_gradient_mc, utility_hessian, Partition};
use minimax_bayes::regret::{bayes_optimal_tree, bayes_optimal_value, psrl_evaluate, MdpSet, PsrlConfig};
use minimax_bayes::SoftmaxPolicy;
use rand::Rng;
use rand_distr::{Distribution, Exp1};
use statrs::distribution::{Beta as BetaDist, Continuous};

#[test]
fn special_functions_match_statrs() {
    let mut r = rng(1);
    for _ in 0..2000 {
        let x: f64 = 10f64.powf(r.random_range(-2.0..2.5));
        let (d, g) = (digamma(x), ln_gamma(x));
        assert!((d - statrs::function::gamma::digamma(x)).abs() < 1e-10 * (1.0 + d.abs()), "digamma({x})");
        assert!((g - statrs::function::gamma::ln_gamma(x)).abs() < 1e-10 * (1.0 + g.abs()), "ln_gamma({x})");
    }
}

#[test]
fn bayes_optimal_value_matches_brute_force_over_trees() {
    for seed in 0..10 {
        let set = random_set(3, 2, 2, 2, seed);
        let belief = BeliefVector::random(3, &mut rng(seed));
        let mut best = f64::NEG_INFINITY;
        for code in 0..32u32 {
            let bit = |k: u32| ((code >> k) & 1) as usize;
            let mut tree = HistoryPolicyTree::new(2);
            tree.insert_action(vec![0], bit(0)).unwrap();
            for (k, (a, s)) in [(0, 0), (0, 1), (1, 0), (1, 1)].into_iter().enumerate() {
                tree.insert_action(vec![0, a, s], bit(k as u32 + 1)).unwrap();
            }
            let v: f64 = set.mdps().iter().zip(belief.weights()).map(|(m, w)| w * tree_utility(&tree, m)).sum();
            best = best.max(v);
        }
        let lib = bayes_optimal_value(&set, &belief).unwrap();
        assert!((lib - best).abs() < 1e-12, "seed {seed}: {lib} vs {best}");
    }
}

#[test]
fn bayes_optimal_tree_matches_posterior_recursion() {
    for seed in 0..20 {
        let n = 2 + seed as usize % 3;
        let set = random_set(n, 2 + seed as usize % 2, 2, 4, 100 + seed);
        let belief = BeliefVector::random(n, &mut rng(seed));
        let oracle = bayes_value_oracle(&set, belief.weights());
        let bo = bayes_optimal_tree(&set, &belief).unwrap();
        let realised: f64 =
            set.mdps().iter().zip(belief.weights()).map(|(m, w)| w * tree_utility(&bo.policy, m)).sum();
        assert!((bo.value - oracle).abs() < 1e-12);
        assert!((realised - oracle).abs() < 1e-12);
        for (m, u) in set.mdps().iter().zip(set.optimal_utilities()) {
            assert!((u - optimal_utility(m)).abs() < 1e-12);
        }
    }
}

/// Mean and standard error of the discounted return over `n` simulated episodes.
fn rollout_utility<P: Policy<f64>>(policy: &P, mdp: &FiniteMdp<f64>, n: usize, seed: u64) -> (f64, f64) {
    let mut r = rng(seed);
    let pick = |w: &[f64], r: &mut rand_chacha::ChaCha8Rng| {
        let mut u: f64 = r.random();
        for (i, &p) in w.iter().enumerate() {
            if u < p {
                return i;
            }
            u -= p;
        }
        w.len() - 1
    };
    let mut xs = Vec::with_capacity(n);
    for _ in 0..n {
        let mut h = vec![pick(mdp.initial(), &mut r)];
        let (mut total, mut g) = (0.0, 1.0);
        for _ in 0..mdp.horizon() {
            let s = *h.last().unwrap();
            let a = pick(&policy.action_probs(&h).unwrap(), &mut r);
            total += g * mdp.reward(s, a);
            g *= mdp.discount();
            h.push(a);
            h.push(pick(mdp.p(s, a), &mut r));
        }
        xs.push(total);
    }
    let m = xs.iter().sum::<f64>() / n as f64;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64;
    (m, (v / n as f64).sqrt())
}

#[test]
fn exact_utilities_agree_with_simulation() {
    for seed in 0..4 {
        let set = random_set(2, 3, 2, 4, seed);
        let mdp = set.get(0).clone().with_discount(0.9).unwrap();
        let tree = HistoryPolicyTree::random(3, 2, 4, &mut rng(seed)).unwrap();
        let (m, se) = rollout_utility(&tree, &mdp, 40_000, seed);
        assert!((tree.utility(&mdp).unwrap() - m).abs() < 4.0 * se);
        let part = Partition::SuffixWindow { n_states: 3, n_actions: 2, window: 1 };
        let soft = SoftmaxPolicy::random(part, 1.0, &mut rng(seed + 9));
        let (m, se) = rollout_utility(&soft, &mdp, 40_000, seed + 1);
        assert!((soft.utility(&mdp).unwrap() - m).abs() < 4.0 * se);
    }
}

#[test]
fn psrl_estimate_matches_exact_mixture_regret() {
    let set = random_set(3, 3, 2, 4, 7);
    let belief = BeliefVector::new(vec![0.5, 0.3, 0.2]).unwrap();
    // PSRL with one-step episodes plays, at each step, the optimal action of a fresh draw.
    let plans: Vec<Vec<Vec<usize>>> = set
        .mdps()
        .iter()
        .map(|m| {
            let mut v = vec![0.0; 3];
            let mut plan = vec![vec![0; 3]; 4];
            for t in (0..4).rev() {
                let mut next = vec![0.0; 3];
                for s in 0..3 {
                    let q: Vec<f64> = (0..2).map(|a| m.reward(s, a) + dot(m.p(s, a), &v)).collect();
                    plan[t][s] = if q[1] > q[0] { 1 } else { 0 };
                    next[s] = q[plan[t][s]];
                }
                v = next;
            }
            plan
        })
        .collect();
    let mut exact = 0.0;
    for (i, m) in set.mdps().iter().enumerate() {
        let mut v = vec![0.0; 3];
        for t in (0..4).rev() {
            v = (0..3)
                .map(|s| {
                    plans
                        .iter()
                        .zip(belief.weights())
                        .map(|(p, w)| {
                            let a = p[t][s];
                            w * (m.reward(s, a) + dot(m.p(s, a), &v))
                        })
                        .sum()
                })
                .collect();
        }
        exact += belief.weights()[i] * (optimal_utility(m) - v[0]);
    }
    let cfg = PsrlConfig { n_mc: 40_000, ..PsrlConfig::default() };
    let est = psrl_evaluate(&set, &belief, &cfg, &mut rng(3)).unwrap();
    assert!((est.mean - exact).abs() < 4.0 * est.se, "{} ± {} vs {exact}", est.mean, est.se);
}

fn central_diff(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    (0..x.len())
        .map(|k| {
            let mut up = x.to_vec();
            let mut dn = x.to_vec();
            up[k] += h;
            dn[k] -= h;
            (f(&up) - f(&dn)) / (2.0 * h)
        })
        .collect()
}

#[test]
fn utility_gradient_matches_finite_differences() {
    let parts = [
        Partition::FullHistory { n_states: 2, n_actions: 2, horizon: 3 },
        Partition::SuffixWindow { n_states: 3, n_actions: 2, window: 1 },
        Partition::SuffixWindow { n_states: 2, n_actions: 3, window: 2 },
    ];
    for (k, part) in parts.into_iter().enumerate() {
        let set = random_set(1, part.n_states(), part.n_actions(), 3 + k, 40 + k as u64);
        let mdp = set.get(0).clone().with_discount(0.8).unwrap();
        let policy = SoftmaxPolicy::random(part, 1.0, &mut rng(k as u64));
        let fd = central_diff(|w| policy.with_weights(w.to_vec()).unwrap().utility(&mdp).unwrap(), policy.weights(), 1e-6);
        let exact = utility_gradient(&policy, &mdp).unwrap();
        let enumerated = utility_gradient_enumerate(&policy, &mdp).unwrap();
        let scale = fd.iter().map(|x| x.abs()).fold(0.0, f64::max);
        for i in 0..fd.len() {
            assert!((exact[i] - fd[i]).abs() < 1e-7 * (1.0 + scale), "{part:?} [{i}]");
            assert!((enumerated[i] - exact[i]).abs() < 1e-12);
        }
        // Rarely visited cells have too few nonzero samples for a reliable SE,
        // hence the small absolute slack.
        let mc = utility_gradient_mc(&policy, &mdp, 40_000, &mut rng(77)).unwrap();
        for i in 0..fd.len() {
            assert!((mc.grad[i] - exact[i]).abs() < 5.0 * mc.se[i] + 1e-4, "{part:?} mc [{i}]: {} ± {} vs {}", mc.grad[i], mc.se[i], exact[i]);
        }
    }
}

#[test]
fn hessian_matches_finite_differences_of_the_gradient() {
    let part = Partition::FullHistory { n_states: 2, n_actions: 2, horizon: 3 };
    let set = random_set(1, 2, 2, 3, 5);
    let mdp = set.get(0);
    let policy = SoftmaxPolicy::random(part, 1.0, &mut rng(6));
    let hess = utility_hessian(&policy, mdp).unwrap();
    let n = policy.n_params();
    let h = 1e-5;
    for j in 0..n {
        let mut up = policy.weights().to_vec();
        let mut dn = up.clone();
        up[j] += h;
        dn[j] -= h;
        let gu = utility_gradient(&policy.with_weights(up).unwrap(), mdp).unwrap();
        let gd = utility_gradient(&policy.with_weights(dn).unwrap(), mdp).unwrap();
        for i in 0..n {
            let fd = (gu[i] - gd[i]) / (2.0 * h);
            assert!((hess.hessian[i * n + j] - fd).abs() < 1e-7, "H[{i},{j}]");
            assert!((hess.hessian[i * n + j] - hess.hessian[j * n + i]).abs() < 1e-12);
            assert!((hess.g1[i * n + j] + hess.g2[i * n + j] - hess.hessian[i * n + j]).abs() < 1e-12);
        }
    }
}

fn dirichlet_prior(seed: u64) -> DirichletProductPrior<f64> {
    let mut r = rng(seed);
    let alpha: Vec<f64> = (0..3 * 2 * 3).map(|_| r.random_range(0.2..5.0)).collect();
    DirichletProductPrior::new(3, 2, alpha, vec![0.5; 6], 4, 1.0, InitialState::State(0)).unwrap()
}

/// `ln Dir(μ | α)` over all rows, written with statrs' gamma function.
fn dirichlet_log_pdf(alpha: &[f64], mdp: &FiniteMdp<f64>) -> f64 {
    let lg = statrs::function::gamma::ln_gamma;
    alpha
        .chunks(3)
        .zip(mdp.transition_table().chunks(3))
        .map(|(a, m)| {
            lg(a.iter().sum()) + a.iter().zip(m).map(|(a, m)| (a - 1.0) * m.ln() - lg(*a)).sum::<f64>()
        })
        .sum()
}

#[test]
fn dirichlet_score_matches_finite_differences() {
    for seed in 0..5 {
        let prior = dirichlet_prior(seed);
        let mdp = dirichlet_sample(&prior, &mut rng(seed + 50));
        let lib_ld = log_density(&prior, &mdp).unwrap();
        assert!(rel_err(lib_ld, dirichlet_log_pdf(prior.alpha(), &mdp)) < 1e-10);
        let fd = central_diff(|a| dirichlet_log_pdf(a, &mdp), prior.alpha(), 1e-6);
        let score = dirichlet_score(&prior, &mdp).unwrap();
        for (s, f) in score.iter().zip(&fd) {
            assert!((s - f).abs() < 1e-6 * (1.0 + f.abs()), "{s} vs {f}");
        }
    }
}

#[test]
fn beta_reward_score_matches_finite_differences() {
    let mut r = rng(8);
    let p: Vec<f64> = (0..6).map(|_| r.random_range(0.1..0.9)).collect();
    let n: Vec<f64> = (0..6).map(|_| r.random_range(0.5..8.0)).collect();
    let prior = dirichlet_prior(2).with_reward_prior(BetaRewardPrior::from_mean_count(&p, &n).unwrap()).unwrap();
    let mdp = dirichlet_sample(&prior, &mut r);
    let score = beta_reward_score(&prior, &mdp).unwrap();
    let ln_beta = |a: f64, b: f64, x: f64| BetaDist::new(a, b).unwrap().ln_pdf(x);
    let h = 1e-6;
    for k in 0..6 {
        let x = mdp.reward_table()[k];
        let (a, b) = (p[k] * n[k], n[k] * (1.0 - p[k]));
        let da = (ln_beta(a + h, b, x) - ln_beta(a - h, b, x)) / (2.0 * h);
        let db = (ln_beta(a, b + h, x) - ln_beta(a, b - h, x)) / (2.0 * h);
        let pn = |p: f64, n: f64| ln_beta(p * n, n * (1.0 - p), x);
        let dp = (pn(p[k] + h, n[k]) - pn(p[k] - h, n[k])) / (2.0 * h);
        let dn = (pn(p[k], n[k] + h) - pn(p[k], n[k] - h)) / (2.0 * h);
        for (lib, fd) in [(score.d_alpha[k], da), (score.d_beta[k], db), (score.d_p[k], dp), (score.d_n[k], dn)] {
            assert!((lib - fd).abs() < 1e-6 * (1.0 + fd.abs()), "{k}: {lib} vs {fd}");
        }
    }
}

fn uniform_simplex(n: usize, r: &mut impl Rng) -> Vec<f64> {
    let e: Vec<f64> = (0..n).map(|_| Exp1.sample(r)).collect();
    let z: f64 = e.iter().sum();
    e.into_iter().map(|x| x / z).collect()
}

#[test]
fn hit_and_run_matches_rejection_sampling() {
    let mut r = rng(12);
    let reference: Vec<Vec<f64>> = (0..400_000).map(|_| uniform_simplex(3, &mut r)).collect();
    for trial in 0..4 {
        let c1: Vec<f64> = (0..3).map(|_| r.random_range(-1.0..1.0)).collect();
        let c2: Vec<f64> = (0..3).map(|_| r.random_range(-1.0..1.0)).collect();
        let b1 = dot(&c1, &[1.0 / 3.0; 3]) - 0.1;
        let b2 = dot(&c2, &[1.0 / 3.0; 3]);
        let inside: Vec<&Vec<f64>> = reference.iter().filter(|x| dot(&c1, x) >= b1).collect();
        let mut centroid = vec![0.0; 3];
        for x in &inside {
            centroid.iter_mut().zip(x.iter()).for_each(|(c, v)| *c += v / inside.len() as f64);
        }
        let fraction = inside.iter().filter(|x| dot(&c2, x) >= b2).count() as f64 / inside.len() as f64;

        let mut poly = CutPolytope::simplex(3);
        poly.add_cut(c1.clone(), b1);
        poly.set_interior(centroid.clone()).unwrap();
        let cfg = HitAndRunConfig { n_samples: 20_000, ..HitAndRunConfig::default() };
        let hr = hit_and_run(&poly, &cfg, &mut rng(trial)).unwrap();
        assert!(hr.samples.iter().all(|x| poly.contains(x)));
        let hr_fraction = hr.samples.iter().filter(|x| dot(&c2, x) >= b2).count() as f64 / hr.samples.len() as f64;
        assert!((hr_fraction - fraction).abs() < 0.02, "trial {trial}: {hr_fraction} vs {fraction}");
        for (a, b) in hr.centroid.iter().zip(&centroid) {
            assert!((a - b).abs() < 0.01, "trial {trial}: {:?} vs {centroid:?}", hr.centroid);
        }
    }
}

/// Brute-force index: bisection on the retirement reward, each probe a full
/// backward pass on the posterior lattice below `Beta(a, b)`.
fn gittins_oracle(a: f64, b: f64, gamma: f64) -> f64 {
    let depth = 400;
    let continue_margin = |lambda: f64| {
        let retire = lambda / (1.0 - gamma);
        let mut v: Vec<f64> = (0..=depth).map(|s| ((a + s as f64) / (a + b + depth as f64)).max(lambda) / (1.0 - gamma)).collect();
        let mut q0 = 0.0;
        for n in (0..depth).rev() {
            for s in 0..=n {
                let p = (a + s as f64) / (a + b + n as f64);
                let q = p * (1.0 + gamma * v[s + 1]) + (1.0 - p) * gamma * v[s];
                if n == 0 {
                    q0 = q;
                }
                v[s] = q.max(retire);
            }
        }
        q0 - retire
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..50 {
        let mid = 0.5 * (lo + hi);
        if continue_margin(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn gittins_indices_match_bisection_oracle() {
    for gamma in [0.5, 0.9, 0.95] {
        let table = gittins_table(gamma, 200).unwrap();
        for (s, f) in [(0, 0), (1, 0), (0, 1), (3, 2), (1, 6), (10, 4)] {
            let oracle = gittins_oracle(1.0 + s as f64, 1.0 + f as f64, gamma);
            let lib = table.index(s, f);
            assert!((lib - oracle).abs() < 1e-3, "γ={gamma} ({s},{f}): {lib} vs {oracle}");
        }
    }
    // Published value for Beta(1, 1) at γ = 0.9.
    assert!((gittins_table(0.9, 200).unwrap().index(0, 0) - 0.7029).abs() < 1e-3);
}

#[test]
fn gittins_monte_carlo_regret_matches_exact_evaluation() {
    let prior = BetaProductPrior::new(vec![(1.0, 1.0), (2.0, 3.0)]).unwrap();
    let horizon = 60;
    let exact = gittins_regret_exact(&prior, 0.9, horizon).unwrap();
    let cfg = BanditMcConfig { n_mc: 40_000, horizon_trunc: horizon, n_max: horizon };
    let mc = bandit_regret_seeded(&prior, ArmRule::Gittins, 0.9, &cfg, 11).unwrap();
    assert!((mc.mean - exact).abs() < 3.0 * mc.se, "{} ± {} vs {exact}", mc.mean, mc.se);
}

/// `E[max(θ1, θ2)]` by 2-D midpoint quadrature of the Beta densities.
fn expected_max(p1: (f64, f64), p2: (f64, f64)) -> f64 {
    let m = 1500;
    let grid: Vec<f64> = (0..m).map(|i| (i as f64 + 0.5) / m as f64).collect();
    let f1: Vec<f64> = grid.iter().map(|&x| BetaDist::new(p1.0, p1.1).unwrap().pdf(x)).collect();
    let f2: Vec<f64> = grid.iter().map(|&x| BetaDist::new(p2.0, p2.1).unwrap().pdf(x)).collect();
    let mut total = 0.0;
    for (i, x) in grid.iter().enumerate() {
        for (j, y) in grid.iter().enumerate() {
            total += x.max(*y) * f1[i] * f2[j];
        }
    }
    total / (m * m) as f64
}

#[test]
fn exact_bandit_evaluator_matches_memoised_dp() {
    let arms = [(1.0, 1.0), (2.0, 3.0)];
    let prior = BetaProductPrior::new(arms.to_vec()).unwrap();
    let (gamma, horizon) = (0.9, 40);
    let table_a = minimax_bayes::bandits::gittins_table_for(1.0, 1.0, gamma, horizon).unwrap();
    let table_b = minimax_bayes::bandits::gittins_table_for(2.0, 3.0, gamma, horizon).unwrap();
    type Key = (usize, usize, usize, usize);
    // `index_rule`: follow the index tables; otherwise maximise over both arms.
    fn value(
        k: Key,
        horizon: usize,
        gamma: f64,
        arms: &[(f64, f64); 2],
        rule: &dyn Fn(Key) -> Option<usize>,
        memo: &mut HashMap<Key, f64>,
    ) -> f64 {
        let (s1, f1, s2, f2) = k;
        if s1 + f1 + s2 + f2 == horizon {
            return 0.0;
        }
        if let Some(&v) = memo.get(&k) {
            return v;
        }
        let q = |arm: usize, memo: &mut HashMap<Key, f64>| {
            let (s, f) = if arm == 0 { (s1, f1) } else { (s2, f2) };
            let p = (arms[arm].0 + s as f64) / (arms[arm].0 + arms[arm].1 + (s + f) as f64);
            let (win, lose) = if arm == 0 { ((s1 + 1, f1, s2, f2), (s1, f1 + 1, s2, f2)) } else { ((s1, f1, s2 + 1, f2), (s1, f1, s2, f2 + 1)) };
            p * (1.0 + gamma * value(win, horizon, gamma, arms, rule, memo))
                + (1.0 - p) * gamma * value(lose, horizon, gamma, arms, rule, memo)
        };
        let v = match rule(k) {
            Some(arm) => q(arm, memo),
            None => q(0, memo).max(q(1, memo)),
        };
        memo.insert(k, v);
        v
    }
    let gittins = |(s1, f1, s2, f2): Key| Some(if table_a.index(s1, f1) >= table_b.index(s2, f2) { 0 } else { 1 });
    let scale = (1.0 - gamma.powi(horizon as i32)) / (1.0 - gamma);
    let emax = expected_max(arms[0], arms[1]);
    let dp = emax * scale - value((0, 0, 0, 0), horizon, gamma, &arms, &gittins, &mut HashMap::new());
    let lib = gittins_regret_exact(&prior, gamma, horizon).unwrap();
    assert!((lib - dp).abs() < 1e-5, "{lib} vs {dp}");

    // The finite-horizon Bayes-optimal policy does at least as well, and Gittins is
    // within the discounted tail of it.
    let optimal = emax * scale - value((0, 0, 0, 0), horizon, gamma, &arms, &|_| None, &mut HashMap::new());
    assert!(optimal <= lib + 1e-9);
    assert!(lib - optimal <= gamma.powi(horizon as i32) / (1.0 - gamma) + 1e-3, "{lib} vs {optimal}");
}

#[test]
fn gittins_beats_greedy() {
    let cfg = BanditMcConfig { n_mc: 20_000, horizon_trunc: 150, n_max: 150 };
    for (k, a) in [(2, 1.0), (3, 0.5), (2, 2.0)] {
        let prior = BetaProductPrior::symmetric(k, a).unwrap();
        let g = bandit_regret_seeded(&prior, ArmRule::Gittins, 0.9, &cfg, 5).unwrap();
        let m = bandit_regret_seeded(&prior, ArmRule::Greedy, 0.9, &cfg, 5).unwrap();
        assert!(g.mean <= m.mean + 3.0 * (g.se.powi(2) + m.se.powi(2)).sqrt(), "K={k} a={a}: {} vs {}", g.mean, m.mean);
    }
}

#[test]
fn simplex_projection_satisfies_kkt() {
    let mut r = rng(21);
    for _ in 0..2000 {
        let n = r.random_range(1..8);
        let v: Vec<f64> = (0..n).map(|_| r.random_range(-3.0..3.0)).collect();
        let p = simplex_project(&v);
        let w = p.weights();
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        // p_i = max(v_i − τ, 0) for a single threshold τ.
        let tau: Vec<f64> = w.iter().zip(&v).filter(|(p, _)| **p > 0.0).map(|(p, v)| v - p).collect();
        assert!(!tau.is_empty());
        for t in &tau {
            assert!((t - tau[0]).abs() < 1e-9);
        }
        for (p, x) in w.iter().zip(&v) {
            if *p == 0.0 {
                assert!(*x <= tau[0] + 1e-9);
            }
        }
    }
}

#[test]
fn matrix_game_matches_grid_search() {
    let mut r = rng(33);
    for _ in 0..50 {
        let rows = r.random_range(2..7);
        let loss: Vec<Vec<f64>> = (0..rows).map(|_| vec![r.random::<f64>(), r.random::<f64>()]).collect();
        let sol = solve_matrix_game(&loss).unwrap();
        // Two columns: maximise min_i (L q)_i over q on a fine grid.
        let grid = (0..=100_000)
            .map(|k| {
                let q = k as f64 / 100_000.0;
                loss.iter().map(|l| q * l[0] + (1.0 - q) * l[1]).fold(f64::INFINITY, f64::min)
            })
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((sol.value - grid).abs() < 1e-5);
        // Both strategies certify the value.
        for j in 0..2 {
            let col: f64 = (0..rows).map(|i| sol.row_strategy[i] * loss[i][j]).sum();
            assert!(col <= sol.value + 1e-9);
        }
        for l in &loss {
            assert!(dot(l, &sol.col_strategy) >= sol.value - 1e-9);
        }
    }
}

#[test]
fn cutting_plane_tolerates_an_approximate_oracle() {
    for seed in 0..3 {
        let set = random_set(3, 2, 2, 3, 60 + seed);
        let value = game_value(&set);
        let cfg = CuttingPlaneConfig { iterations: 25, ..CuttingPlaneConfig::default() };
        // Best response to a belief shrunk 5% towards uniform: an ε-optimal oracle.
        let run = cutting_plane_run_with(&set, &cfg, &mut rng(seed), |b| {
            let shrunk: Vec<f64> = b.weights().iter().map(|w| 0.95 * w + 0.05 / 3.0).collect();
            Ok(bayes_optimal_tree(&set, &BeliefVector::new(shrunk)?)?.policy)
        })
        .unwrap();
        let beta = BeliefVector::new(run.beta_star.clone()).unwrap();
        let reached = dot(beta.weights(), set.optimal_utilities()) - bayes_optimal_value(&set, &beta).unwrap();
        assert!(reached <= value + 1e-9);
        assert!(reached >= value - 0.05, "seed {seed}: {reached} vs {value}");
    }
}

#[test]
fn mdp_set_rejects_mismatched_members() {
    let a = random_set(1, 2, 2, 3, 1).get(0).clone();
    let b = random_set(1, 3, 2, 3, 1).get(0).clone();
    assert!(MdpSet::new(vec![a, b]).is_err());
}
