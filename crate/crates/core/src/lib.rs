//! Estimation and model-based bootstrap inference for current status and
//! interval-censored data.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bootstrap;
pub mod data;
pub mod distribution;
pub mod error;
pub mod gcm;
pub mod io;
pub mod limit;
pub mod npmle;
pub mod one_step;
pub mod rng;
pub mod sim;

pub use bootstrap::{
    basic_ci, bmse_curve, bootstrap_roots, resample_subject, select_bandwidth, BootstrapConfig,
    BootstrapResult, BootstrapScheme, RootEstimator, RootRate,
};
pub use data::{CensoringInterval, CurrentStatusSample, Dataset, MixedCaseSubject, StatusRecord};
pub use distribution::{Cdf, SmoothedDistribution, StepDistribution};
pub use error::{Error, Result};
pub use gcm::{gcm_left_slopes, isotonic_weighted, CusumDiagram, IsotonicFit};
pub use io::{load_breast_cancer, parse_dataset, serialize_dataset, DatasetFormat};
pub use limit::{empirical_quantile, kappa_case2, kappa_cs, simulate_chernoff, ChernoffConfig};
pub use npmle::{
    npmle_current_status, npmle_dataset, npmle_interval_censored, IcmOptions, IntervalNpmle,
};
pub use one_step::icm_one_step;
pub use sim::{
    coverage_experiment, figure1_density_data, figure2_quantile_trajectory, sample_scenario,
    true_mse_curve, CoverageReport, Design, EventLaw, ExperimentConfig, Scenario,
};
