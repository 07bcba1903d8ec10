//! Cross-validated averaging of predictors built on foundation representations.
//!
//! Unsupervised learners (PCA, kernel PCA, or user supplied) are fitted on unlabeled
//! rows. Each candidate concatenates some of their outputs and feeds a downstream
//! model (ridge or softmax regression). Candidate predictions are combined with
//! simplex weights chosen by K-fold cross-validation of a surrogate loss.
//!
//! ```no_run
//! use pearl::prelude::*;
//! # fn demo(unlabeled: UnlabeledDataset, train: LabeledDataset) -> pearl::Result<()> {
//! let frls = fit_frls(&FrlConfig::synthetic_defaults(), &unlabeled)?;
//! let pool = CandidatePool::frl_subsets(frls.iter().map(FittedFrl::output_dim).collect())?;
//! let plan = make_cv_plan(train.nrows(), 5, 7)?;
//! let fitted = fit_pipeline(
//!     &train,
//!     frls,
//!     pool,
//!     &plan,
//!     &DownstreamConfig::ridge(1e-6),
//!     SurrogateLoss::SquaredError,
//!     &SolverOptions::default(),
//! )?;
//! println!("{:?}", fitted.model.weights());
//! # Ok(())
//! # }
//! ```

pub mod baselines;
pub mod bench;
pub mod candidates;
pub mod config;
pub mod csv_io;
pub mod data;
pub mod downstream;
pub mod error;
pub mod frl;
pub mod loss;
pub mod metrics;
pub mod rng;
pub mod weights;

pub use error::{PearlError, Result, Warning};

pub mod prelude {
    pub use crate::baselines::{run_baseline, BaselineKind};
    pub use crate::candidates::{CandidatePool, CandidateSpec};
    pub use crate::data::{LabeledDataset, PredictionBlock, Targets, TaskKind, UnlabeledDataset};
    pub use crate::downstream::{DownstreamConfig, FittedPredictor};
    pub use crate::frl::{fit_frls, FittedFrl, FrlConfig, KernelSpec};
    pub use crate::loss::SurrogateLoss;
    pub use crate::weights::{fit_pipeline, make_cv_plan, PearlModel, SolverOptions, WeightVector};
    pub use crate::{PearlError, Result};
}
