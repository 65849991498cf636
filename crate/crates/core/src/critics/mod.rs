//! Centralized, local and value critics with their TD targets.

mod networks;
mod returns;
mod targets;

pub use networks::{
    critic_update, regression_loss_and_grad, sync_targets, CentralizedCritic, HistoryValueCritic,
    LocalCritic, StateValueCritic, TargetPair,
};
pub use returns::{lambda_return, nstep_return, nstep_returns};
pub use targets::{
    centralized_lambda_target, centralized_td_target, history_value_target,
    joint_action_distribution, local_td_target, sample_joint_action, state_value_target,
    TdTargetBatch,
};

/// Default softmax temperature for sampling joint next actions.
pub const DEFAULT_TEMPERATURE: f64 = 1.0;
