//! Minimax-Bayes reinforcement learning.
//!
//! Nature picks a prior over MDPs to maximise the agent's Bayesian regret; the
//! agent picks a policy to minimise it. This crate computes both sides:
//!
//! - [`mdp`]: finite-horizon MDPs, policies and exact evaluation.
//! - [`beliefs`]: finite simplex beliefs and Dirichlet-product priors.
//! - [`regret`]: the three regret notions, exact Bayes-optimal trees, PSRL.
//! - [`policy`]: softmax policies over history partitions and their derivatives.
//! - [`gda`]: stochastic gradient descent-ascent on `Ř(π, β)`.
//! - [`cutting_plane`]: centroid cutting planes for the maximin belief.
//! - [`game`]: matrix-game LP for minimax mixtures.
//! - [`bandits`]: Gittins indices and Bayesian-regret surfaces for Bernoulli bandits.
//! - [`experiments`]: desk-scale experiment drivers used by the `mmbrl` binary.
//!
//! The model types are generic over [`scalar::Real`] (`f32` or `f64`); the
//! optimisation layers work in `f64`.

pub mod bandits;
pub mod beliefs;
pub mod cutting_plane;
pub mod error;
pub mod experiments;
pub mod game;
pub mod gda;
pub mod mdp;
pub mod policy;
pub mod regret;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Mdp = mdp::FiniteMdp<f64>;
pub type Belief = beliefs::BeliefVector<f64>;
pub type MdpSet = regret::MdpSet<f64>;
pub type DirichletPrior = beliefs::DirichletProductPrior<f64>;
pub type TreePolicy = mdp::HistoryPolicyTree<f64>;
pub type SoftmaxPolicy = policy::SoftmaxPartitionPolicy<f64>;

pub type MdpF32 = mdp::FiniteMdp<f32>;
pub type BeliefF32 = beliefs::BeliefVector<f32>;
pub type MdpSetF32 = regret::MdpSet<f32>;
pub type DirichletPriorF32 = beliefs::DirichletProductPrior<f32>;
pub type TreePolicyF32 = mdp::HistoryPolicyTree<f32>;
pub type SoftmaxPolicyF32 = policy::SoftmaxPartitionPolicy<f32>;
