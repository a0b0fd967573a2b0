//! The self-improvement construction: from a pointwise p-Hardy inequality
//! and a two-point curve Poincaré condition at `p'`, a curve whose integral
//! is controlled by `M_{q,K d}` for some `q < p`.

pub mod experiment;
pub mod gaps;
pub mod levels;
pub mod params;
pub mod pipeline;

pub use experiment::{self_improve_experiment, ExperimentConfig, ExperimentReport, RunRecord, SummaryRow, TauReport};
pub use gaps::{gap_decompose, Gap, GapDecomposition};
pub use levels::{build_h, essential_estimate_check, feasibility_level, level_sets, LevelSets};
pub use params::{absorbed_constant, quantitative_exponents, ImprovementParams, ParamInputs};
pub use pipeline::{construct_improved_curve, scale_to_feasible, AlphaSurrogate, ImprovedCurve};
