//! Cross-validated averaging weights and the end-to-end predictor.

pub mod cv;
pub mod pipeline;
pub mod simplex;
pub mod solver;

pub use cv::{cv_predictions, make_cv_plan, CvPlan, CvPredictionTable};
pub use pipeline::{fit_pipeline, pearl_fit_predict, solve_weights_naive, FittedPipeline, PearlModel};
pub use simplex::{project_to_simplex, WeightVector};
pub use solver::{minimize_on_simplex, objective, solve_weights, SolveReport, SolverOptions};
