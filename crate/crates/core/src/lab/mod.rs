//! Batch experiments: configuration, sweeps, the transition scan, the
//! test-function scaling experiment and report emission.

pub mod config;
pub mod report;
pub mod scan;
pub mod sweep;
pub mod testfn;

pub use config::{
    apply_overrides, load_config, parse_rational, CertificateConfig, CriteriaConfig, EllConfig, EvolveConfig,
    ExactNumber, KernelConfig, KernelKind, ProblemConfig, RvfConfig, SweepConfig, TestfnConfig,
};
pub use report::{emit_report, write_json, EmittedFiles, RunRecord};
pub use scan::{fujita_transition_scan, ScanConfig, ScanReport, ScanStatus};
pub use sweep::{expand_axes, run_sweep, sweep_csv, write_sweep_csv, SweepResult, SweepRow};
pub use testfn::{testfn_experiment, write_testfn_csv, TestFunctionSpec, TestfnTable, TimeScaling};
