//! Post-warmup metrics computed from an engine's trace and counters.

use crate::error::{Error, Result};
use crate::sim::{Engine, FlowTag, ScenarioSpec, GBPS_TO_BITS_PER_US};

/// 64 KB write request expressed in bits; fluid drops are reported in these
/// packet equivalents.
pub const PACKET_BITS: f64 = 64.0 * 1024.0 * 8.0;

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub normalized_goodput: f64,
    pub mean_latency_us: f64,
    pub p99_latency_us: f64,
    pub drops_per_flow: f64,
    pub jain_fairness: f64,
    pub steady_state_inflation: f64,
    /// Long flows' post-warmup throughput over line rate; long-short only.
    pub long_bw_normalized: Option<f64>,
    /// Mean short completion over ideal unimpeded completion; long-short only.
    pub slowdown: Option<f64>,
    /// Mean short completion normalized to base RTT; long-short only.
    pub slowdown_base_rtt: Option<f64>,
}

pub const METRICS_CSV_HEADER: &str = "scenario,controller,normalized_goodput,mean_latency_us,\
p99_latency_us,drops_per_flow,jain_fairness,steady_state_inflation,long_bw_normalized,slowdown,\
slowdown_base_rtt";

impl MetricsReport {
    pub fn csv_row(&self, scenario: &str, controller: &str) -> String {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        format!(
            "{scenario},{controller},{},{},{},{},{},{},{},{},{}",
            self.normalized_goodput,
            self.mean_latency_us,
            self.p99_latency_us,
            self.drops_per_flow,
            self.jain_fairness,
            self.steady_state_inflation,
            opt(self.long_bw_normalized),
            opt(self.slowdown),
            opt(self.slowdown_base_rtt),
        )
    }
}

/// `(sum r)^2 / (N * sum r^2)`; 1 when all flows receive equal throughput.
pub fn jain_index(rates: &[f64]) -> f64 {
    if rates.is_empty() {
        return 1.0;
    }
    let sum: f64 = rates.iter().sum();
    let sumsq: f64 = rates.iter().map(|r| r * r).sum();
    if sumsq == 0.0 {
        return 1.0;
    }
    sum * sum / (rates.len() as f64 * sumsq)
}

fn percentile(sorted: &[f64], p: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let idx = ((p * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len()) - 1;
    sorted[idx]
}

/// Computes the report over `[warmup, duration]`: goodput from delivered
/// bits, latency from the sampled probe RTTs, fairness from time-averaged
/// per-flow rates.
pub fn report_from_engine(engine: &Engine, spec: &ScenarioSpec) -> Result<MetricsReport> {
    let trace = engine.trace();
    let cfg = engine.cfg();
    let start = trace
        .samples
        .iter()
        .position(|s| s.time_us >= spec.warmup_us)
        .ok_or_else(|| Error::contract("trace has no post-warmup samples"))?;
    let first = &trace.samples[start];
    let last = trace
        .samples
        .last()
        .ok_or_else(|| Error::contract("empty trace"))?;
    let window_us = last.time_us - first.time_us;
    if !(window_us > 0.0) {
        return Err(Error::contract("measurement window is empty"));
    }

    // Ports that carry at least one flow.
    let mut port_used = vec![false; engine.ports().len()];
    for f in engine.flows() {
        port_used[f.port.0] = true;
    }
    let ports_in_use = port_used.iter().filter(|u| **u).count().max(1);

    let delivered: f64 = (0..engine.ports().len())
        .filter(|p| port_used[*p])
        .map(|p| last.ports[p].delivered_bits - first.ports[p].delivered_bits)
        .sum();
    let dropped: f64 = (0..engine.ports().len())
        .map(|p| last.ports[p].dropped_bits - first.ports[p].dropped_bits)
        .sum();
    let capacity_bits = window_us * GBPS_TO_BITS_PER_US * cfg.line_rate_gbps * ports_in_use as f64;
    let normalized_goodput = delivered / capacity_bits;

    let n_flows = engine.flows().len().max(1);
    let drops_per_flow = dropped / PACKET_BITS / n_flows as f64;

    // Probe RTTs, subsampled at the trace cadence, active flows only.
    let mut rtts: Vec<f64> = Vec::new();
    for s in &trace.samples[start..] {
        for f in s.flows.iter().filter(|f| f.active) {
            rtts.push(f.rtt_us);
        }
    }
    rtts.sort_by(f64::total_cmp);
    let mean_latency_us = if rtts.is_empty() {
        cfg.base_rtt_us
    } else {
        rtts.iter().sum::<f64>() / rtts.len() as f64
    };
    let p99_latency_us = if rtts.is_empty() {
        cfg.base_rtt_us
    } else {
        percentile(&rtts, 0.99)
    };
    let steady_state_inflation = mean_latency_us / cfg.base_rtt_us;

    // Time-averaged per-flow rates over the window.
    let per_flow_rate: Vec<f64> = engine
        .flows()
        .iter()
        .map(|f| {
            let inj0 = first.flows.get(f.id.0).map_or(0.0, |s| s.injected_bits);
            let inj1 = last.flows.get(f.id.0).map_or(0.0, |s| s.injected_bits);
            (inj1 - inj0) / (window_us * GBPS_TO_BITS_PER_US)
        })
        .collect();
    let jain_fairness = jain_index(&per_flow_rate);

    let (long_bw_normalized, slowdown, slowdown_base_rtt) = if spec.kind
        == crate::sim::ScenarioKind::LongShort
    {
        let long_rate: f64 = engine
            .flows()
            .iter()
            .zip(&per_flow_rate)
            .filter(|(f, _)| f.tag == FlowTag::Long)
            .map(|(_, r)| r)
            .sum();
        let short_bits = spec.short_bytes as f64 * 8.0;
        let ideal_us = short_bits / (cfg.line_rate_gbps * GBPS_TO_BITS_PER_US) + cfg.base_rtt_us;
        let mut sum_sd = 0.0;
        let mut sum_sd_rtt = 0.0;
        let mut n_short = 0usize;
        for f in engine.flows().iter().filter(|f| f.tag == FlowTag::Short) {
            // Completion is known to the sender one base RTT after the last
            // bit is injected; unfinished shorts are censored at the horizon.
            let done = f
                .completion_time_us
                .unwrap_or(spec.duration_us)
                .max(f.start_time_us);
            let elapsed = done - f.start_time_us + cfg.base_rtt_us;
            sum_sd += elapsed / ideal_us;
            sum_sd_rtt += elapsed / cfg.base_rtt_us;
            n_short += 1;
        }
        if n_short > 0 {
            (
                Some(long_rate / cfg.line_rate_gbps),
                Some(sum_sd / n_short as f64),
                Some(sum_sd_rtt / n_short as f64),
            )
        } else {
            (None, None, None)
        }
    } else {
        (None, None, None)
    };

    Ok(MetricsReport {
        normalized_goodput,
        mean_latency_us,
        p99_latency_us,
        drops_per_flow,
        jain_fairness,
        steady_state_inflation,
        long_bw_normalized,
        slowdown,
        slowdown_base_rtt,
    })
}

/// Aggregate transmission rate of tagged flows at each sample, from injected
/// bit differences. Used by reaction-time analysis.
pub fn tagged_rate_series(engine: &Engine, tag: FlowTag) -> Vec<(f64, f64)> {
    let trace = engine.trace();
    let ids: Vec<usize> = engine
        .flows()
        .iter()
        .filter(|f| f.tag == tag)
        .map(|f| f.id.0)
        .collect();
    let mut out = Vec::with_capacity(trace.samples.len().saturating_sub(1));
    for pair in trace.samples.windows(2) {
        let dt = pair[1].time_us - pair[0].time_us;
        if dt <= 0.0 {
            continue;
        }
        let bits: f64 = ids
            .iter()
            .map(|&i| pair[1].flows[i].injected_bits - pair[0].flows[i].injected_bits)
            .sum();
        out.push((pair[1].time_us, bits / (dt * GBPS_TO_BITS_PER_US)));
    }
    out
}

/// Sum of per-flow goodput over any window never exceeds port capacity.
pub fn port_utilization_ok(engine: &Engine, tolerance: f64) -> bool {
    let trace = engine.trace();
    for pair in trace.samples.windows(2) {
        let dt = pair[1].time_us - pair[0].time_us;
        if dt <= 0.0 {
            continue;
        }
        for (p, port) in engine.ports().iter().enumerate() {
            let delivered = pair[1].ports[p].delivered_bits - pair[0].ports[p].delivered_bits;
            let cap = port.capacity_gbps * GBPS_TO_BITS_PER_US * dt;
            if delivered > cap * (1.0 + tolerance) {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::FixedRateController;
    use crate::sim::{build_scenario, SimConfig};

    #[test]
    fn jain_basics() {
        assert_eq!(jain_index(&[10.0, 10.0, 10.0]), 1.0);
        assert!(jain_index(&[1.0, 0.0, 0.0]) - 1.0 / 3.0 < 1e-12);
        // Scale invariance.
        let a = jain_index(&[1.0, 2.0, 3.0]);
        let b = jain_index(&[10.0, 20.0, 30.0]);
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn fair_share_scenario_reports_unit_jain_and_goodput() {
        let spec = ScenarioSpec::many_to_one(4, 1).with_horizon(20_000.0, 4_000.0);
        let cfg = SimConfig { start_jitter_us: 0.0, ..SimConfig::default() };
        let mut engine = build_scenario(&spec, &cfg, &mut |_| {
            Box::new(FixedRateController::new(25.0))
        })
        .unwrap();
        engine.run(spec.duration_us).unwrap();
        let report = report_from_engine(&engine, &spec).unwrap();
        assert!((report.jain_fairness - 1.0).abs() < 1e-9);
        assert!((report.normalized_goodput - 1.0).abs() < 1e-6);
        assert_eq!(report.drops_per_flow, 0.0);
        assert!((report.steady_state_inflation - 1.0).abs() < 1e-9);
        assert!(port_utilization_ok(&engine, 1e-6));
    }

    #[test]
    fn single_greedy_flow_has_unit_goodput_no_drops() {
        let spec = ScenarioSpec::many_to_one(1, 1).with_horizon(10_000.0, 2_000.0);
        let cfg = SimConfig { start_jitter_us: 0.0, ..SimConfig::default() };
        let mut engine = build_scenario(&spec, &cfg, &mut |_| {
            Box::new(FixedRateController::new(100.0))
        })
        .unwrap();
        engine.run(spec.duration_us).unwrap();
        let report = report_from_engine(&engine, &spec).unwrap();
        assert!((report.normalized_goodput - 1.0).abs() < 1e-9);
        assert_eq!(report.drops_per_flow, 0.0);
    }

    #[test]
    fn lone_short_flow_has_unit_slowdown() {
        let mut spec = ScenarioSpec::long_short(1, 1, 1_000_000);
        spec = spec.with_horizon(50_000.0, 5_000.0);
        let cfg = SimConfig { start_jitter_us: 0.0, ..SimConfig::default() };
        // The long flow idles at the minimum rate so the short is unimpeded
        // up to fluid tolerance.
        let mut engine = build_scenario(&spec, &cfg, &mut |i| {
            if i == 0 {
                Box::new(FixedRateController::new(0.1))
            } else {
                Box::new(FixedRateController::new(100.0))
            }
        })
        .unwrap();
        engine.run(spec.duration_us).unwrap();
        let report = report_from_engine(&engine, &spec).unwrap();
        let sd = report.slowdown.unwrap();
        assert!((sd - 1.0).abs() < 0.05, "slowdown {sd}");
        assert!(sd >= 1.0 - 1e-9);
    }
}
