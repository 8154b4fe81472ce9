//! Softmax policies over a partition of histories, with exact gradients.

mod gradient;
mod partition;
mod softmax;

pub use gradient::{
    utility_gradient, utility_gradient_enumerate, utility_gradient_mc, utility_hessian, GradientEstimate, HessianParts,
};
pub use partition::Partition;
pub use softmax::{softmax, SoftmaxPartitionPolicy};
