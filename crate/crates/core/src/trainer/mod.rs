//! Joint training of the latent space and the HAN.

mod checkpoint;
mod config;
mod grad_check;
mod model;
mod objective;
mod sgd;
mod train;

pub use checkpoint::{
    load_checkpoint, model_from_bytes, model_to_bytes, save_checkpoint, Checkpoint, CONFIG_FILE,
    MODEL_FILE, MODEL_MAGIC, MODEL_VERSION, VOCAB_FILE,
};
pub use config::{TrainingConfig, CONFIG_KEYS};
pub use grad_check::{
    analytic_gradient, compare_gradients, grad_check, grad_check_each, numeric_gradient, objective_value,
    tiny_problem, GradCheckConfig, GradCheckReport, GroupReport, NumericGradient, Objective,
};
pub use model::{group_of, Model, ModelDims};
pub use objective::{joint_grad, joint_loss, LossParts};
pub use sgd::{clip_global_norm, sgd_step};
pub use train::{
    history_csv, train, train_with, EpochRecord, TrainOutput, TrainState, LOG_FILE,
};
