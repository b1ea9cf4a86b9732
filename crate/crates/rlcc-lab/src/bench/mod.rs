//! Benchmark surface: scenario runner, metrics, theory comparison,
//! parameter sweeps, latency ablation, and the explainability probe.

mod ablation;
mod metrics;
mod probe;
mod runner;
mod sweep;
mod theory;

pub use ablation::{
    ablation_csv, drops_csv, drops_table, latency_ablation, AblationRow, DropsRow,
    ABLATION_CSV_HEADER, ABLATION_LATENCIES_US, DROPS_CSV_HEADER,
};
pub use metrics::{
    jain_index, port_utilization_ok, report_from_engine, tagged_rate_series, MetricsReport,
    METRICS_CSV_HEADER, PACKET_BITS,
};
pub use probe::{
    probe_policy, Condition, ProbeTable, SignPatternCheck, CONDITIONS, DEFAULT_CONGESTED_DELTA,
};
pub use runner::{run_benchmark, run_scenario, ControllerSetup, EcnParams};
pub use sweep::{
    parameter_sweep, sweep_csv, sweep_threads, SweepPoint, FAILURE_GOODPUT, SWEEP_CSV_HEADER,
};
pub use theory::{
    fit_sqrt_curve, theory_curve, theory_vs_practice, TheoryRow, TheoryTable, THEORY_CSV_HEADER,
};
