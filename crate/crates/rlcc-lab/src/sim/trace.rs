//! Metrics trace recorded at the configured sampling cadence.

use std::fmt::Write as _;

use crate::sim::{FlowId, PortId};

pub const TRACE_CSV_HEADER: &str =
    "time_us,flow_id,rate_gbps,rtt_us,port_occupancy_bits,dropped_bits,delivered_bits";

#[derive(Debug, Clone, PartialEq)]
pub struct FlowSample {
    pub flow: FlowId,
    pub active: bool,
    pub rate_gbps: f64,
    /// Most recent probe RTT measured by this flow (base RTT before the
    /// first probe returns).
    pub rtt_us: f64,
    /// Cumulative bits injected by this flow.
    pub injected_bits: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PortSample {
    pub occupancy_bits: f64,
    pub injected_bits: f64,
    pub delivered_bits: f64,
    pub dropped_bits: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleRecord {
    pub time_us: f64,
    pub flows: Vec<FlowSample>,
    pub ports: Vec<PortSample>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MetricsTrace {
    pub samples: Vec<SampleRecord>,
    /// Destination port of each flow, for attaching port columns to flow rows.
    pub flow_ports: Vec<PortId>,
}

impl MetricsTrace {
    pub fn push(&mut self, record: SampleRecord) {
        if let Some(last) = self.samples.last() {
            debug_assert!(record.time_us > last.time_us, "sample times must increase");
        }
        self.samples.push(record);
    }

    /// One CSV row per (sample, flow); the port columns are those of the
    /// flow's destination port.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(TRACE_CSV_HEADER);
        out.push('\n');
        for sample in &self.samples {
            for fs in &sample.flows {
                let port = self.flow_ports[fs.flow.0];
                let ps = &sample.ports[port.0];
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    sample.time_us,
                    fs.flow.0,
                    fs.rate_gbps,
                    fs.rtt_us,
                    ps.occupancy_bits,
                    ps.dropped_bits,
                    ps.delivered_bits
                );
            }
        }
        out
    }
}
