//! Kernel support vector machines built from scratch: the three kernels,
//! binary soft-margin training by sequential minimal optimization,
//! one-vs-one multiclass voting, text model files, and an independent
//! quadratic-programming reference solver for validation.

pub mod io;
pub mod kernel;
pub mod multiclass;
pub mod oracle;
pub mod smo;

pub use io::{load_model, model_from_text, model_to_text, save_model, TrainingSetFile};
pub use kernel::{kernel_eval, KernelKind, KernelSpec};
pub use multiclass::{
    classification_accuracy, ovo_classify, ovo_train, MulticlassSvmModel, PairModel, TrainingSet,
};
pub use smo::{smo_train, BinarySvmModel, SmoOutcome, TrainConfig};
