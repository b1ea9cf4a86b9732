//! Deterministic discrete-event, fluid-flow network simulator.
//!
//! Rates are in Gbps, times in microseconds, queue state in bits
//! (1 Gbps = 1000 bits/us). A single switch is modeled as one fluid FIFO
//! queue per congested egress port; congestion control decisions happen at
//! RTT-probe granularity with a configurable decision latency between probe
//! receipt and rate actuation.

mod engine;
mod event;
mod queue;
mod scenario;
mod trace;

pub use engine::{Engine, FlowPhase, FlowRuntime, FlowSpec, FlowTag};
pub use event::{Event, EventKind, FlowId, PortId};
pub use queue::{PortQueue, GBPS_TO_BITS_PER_US};
pub use scenario::{
    build_scenario, ScenarioKind, ScenarioSpec, DEFAULT_DURATION_US, DEFAULT_SHORT_BYTES,
    DEFAULT_WARMUP_US,
};
pub use trace::{FlowSample, MetricsTrace, PortSample, SampleRecord, TRACE_CSV_HEADER};

use crate::error::{Error, Result};

/// Global simulation parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub line_rate_gbps: f64,
    pub base_rtt_us: f64,
    /// Buffer limit per egress port.
    pub buffer_bits: f64,
    /// Lower rate clamp; prevents collapse to zero under multiplicative decrease.
    pub min_rate_gbps: f64,
    pub seed: u64,
    /// Default simulated horizon for plain `simulate` runs.
    pub duration_us: f64,
    /// Delay between probe receipt and rate actuation, emulating controller
    /// inference cost.
    pub decision_latency_us: f64,
    pub sample_interval_us: f64,
    /// Rate at which flows start transmitting; defaults to line rate.
    pub initial_rate_gbps: Option<f64>,
    /// Flow start times are jittered uniformly within this span to break
    /// lockstep symmetry between otherwise identical flows.
    pub start_jitter_us: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            line_rate_gbps: 100.0,
            base_rtt_us: 10.0,
            buffer_bits: 4.0e6,
            min_rate_gbps: 0.1,
            seed: 1,
            duration_us: 50_000.0,
            decision_latency_us: 2.0,
            sample_interval_us: 50.0,
            initial_rate_gbps: None,
            start_jitter_us: 50.0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.line_rate_gbps > 0.0) {
            return Err(Error::validation("line_rate_gbps must be > 0"));
        }
        if !(self.base_rtt_us > 0.0) {
            return Err(Error::validation("base_rtt_us must be > 0"));
        }
        if !(self.buffer_bits > 0.0) {
            return Err(Error::validation("buffer_bits must be > 0"));
        }
        if !(self.min_rate_gbps > 0.0 && self.min_rate_gbps <= self.line_rate_gbps) {
            return Err(Error::validation(
                "min_rate_gbps must lie in (0, line_rate_gbps]",
            ));
        }
        if !(self.duration_us > 0.0) {
            return Err(Error::validation("duration_us must be > 0"));
        }
        if !(self.decision_latency_us >= 0.0) {
            return Err(Error::validation("decision_latency_us must be >= 0"));
        }
        if !(self.sample_interval_us > 0.0) {
            return Err(Error::validation("sample_interval_us must be > 0"));
        }
        if let Some(r) = self.initial_rate_gbps {
            if !(r >= self.min_rate_gbps && r <= self.line_rate_gbps) {
                return Err(Error::validation(
                    "initial_rate_gbps must lie in [min_rate, line_rate]",
                ));
            }
        }
        if !(self.start_jitter_us >= 0.0) {
            return Err(Error::validation("start_jitter_us must be >= 0"));
        }
        Ok(())
    }

    pub fn initial_rate(&self) -> f64 {
        self.initial_rate_gbps.unwrap_or(self.line_rate_gbps)
    }
}

/// Everything a controller sees when a probe measurement becomes actionable.
pub struct ProbeContext<'a> {
    pub now_us: f64,
    /// Round-trip time measured by the probe, possibly `decision_latency_us`
    /// stale by the time the controller runs.
    pub measured_rtt_us: f64,
    /// ECN mark observed by this probe (meaningful only when a marker is
    /// installed).
    pub ecn_marked: bool,
    pub current_rate_gbps: f64,
    /// Bits injected by this flow since its previous decision.
    pub bits_sent: f64,
    /// Time since this flow's previous decision.
    pub elapsed_us: f64,
    pub cfg: &'a SimConfig,
}

/// Per-flow congestion controller. Returns the desired next transmission
/// rate; the engine clamps it to `[min_rate, line_rate]`.
pub trait Controller {
    fn decide(&mut self, ctx: &ProbeContext<'_>) -> f64;
}
