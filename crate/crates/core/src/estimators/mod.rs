//! Advantage estimators and the recurrent actor they feed.

mod advantage;
mod policy;

pub use advantage::{
    central_v_advantage, coma_advantage, eca_advantage, ia2c_advantage, rola_advantage,
    AdvantageVector,
};
pub use policy::{
    act, epsilon_schedule, policy_gradient_step, surrogate_loss_and_grad, Actor,
    PolicyDistribution,
};
