//! Event loop driving flows, queues, and controllers.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::baselines::EcnMarker;
use crate::error::{Error, Result};
use crate::sim::event::NO_FLOW;
use crate::sim::{
    Controller, Event, EventKind, FlowId, FlowSample, MetricsTrace, PortId, PortQueue,
    PortSample, ProbeContext, SampleRecord, SimConfig, GBPS_TO_BITS_PER_US,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowPhase {
    Pending,
    Active,
    Done,
}

/// Role of a flow inside a scenario, used by metrics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowTag {
    Normal,
    Long,
    Short,
}

/// Install-time description of a flow.
#[derive(Debug, Clone)]
pub struct FlowSpec {
    pub src: usize,
    pub dst: usize,
    pub port: PortId,
    pub start_time_us: f64,
    /// Finite transfer size in bits; `None` for infinite flows.
    pub size_bits: Option<f64>,
    pub tag: FlowTag,
}

pub struct FlowRuntime {
    pub id: FlowId,
    pub src: usize,
    pub dst: usize,
    pub port: PortId,
    pub tag: FlowTag,
    pub phase: FlowPhase,
    pub rate_gbps: f64,
    pub start_time_us: f64,
    pub completion_time_us: Option<f64>,
    pub bytes_remaining_bits: Option<f64>,
    pub injected_bits: f64,
    pub probe_seq: u64,
    pub last_rtt_us: f64,
    last_progress_us: f64,
    last_decision_us: f64,
    injected_at_last_decision: f64,
    end_generation: u64,
    controller: Box<dyn Controller>,
}

pub struct Engine {
    cfg: SimConfig,
    ports: Vec<PortQueue>,
    port_aggregate_gbps: Vec<f64>,
    flows: Vec<FlowRuntime>,
    events: BinaryHeap<Reverse<Event>>,
    now_us: f64,
    next_seq: u64,
    ecn: Option<EcnMarker>,
    trace: MetricsTrace,
    next_sample_us: f64,
    sampling_scheduled: bool,
}

impl Engine {
    pub fn new(cfg: SimConfig, n_ports: usize) -> Result<Engine> {
        cfg.validate()?;
        if n_ports == 0 {
            return Err(Error::validation("engine needs at least one port"));
        }
        let ports = (0..n_ports)
            .map(|_| PortQueue::new(cfg.line_rate_gbps, cfg.buffer_bits))
            .collect();
        Ok(Engine {
            port_aggregate_gbps: vec![0.0; n_ports],
            ports,
            flows: Vec::new(),
            events: BinaryHeap::new(),
            now_us: 0.0,
            next_seq: 0,
            ecn: None,
            trace: MetricsTrace::default(),
            next_sample_us: 0.0,
            sampling_scheduled: false,
            cfg,
        })
    }

    pub fn set_ecn(&mut self, marker: EcnMarker) {
        self.ecn = Some(marker);
    }

    pub fn cfg(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn now_us(&self) -> f64 {
        self.now_us
    }

    pub fn ports(&self) -> &[PortQueue] {
        &self.ports
    }

    pub fn flows(&self) -> &[FlowRuntime] {
        &self.flows
    }

    pub fn trace(&self) -> &MetricsTrace {
        &self.trace
    }

    pub fn add_flow(&mut self, spec: FlowSpec, controller: Box<dyn Controller>) -> Result<FlowId> {
        if spec.port.0 >= self.ports.len() {
            return Err(Error::validation(format!(
                "flow targets unknown port {}",
                spec.port.0
            )));
        }
        if spec.start_time_us < self.now_us {
            return Err(Error::validation("flow starts in the past"));
        }
        if let Some(size) = spec.size_bits {
            if !(size > 0.0) {
                return Err(Error::validation("finite flow size must be > 0"));
            }
        }
        let id = FlowId(self.flows.len());
        self.flows.push(FlowRuntime {
            id,
            src: spec.src,
            dst: spec.dst,
            port: spec.port,
            tag: spec.tag,
            phase: FlowPhase::Pending,
            rate_gbps: self.cfg.initial_rate(),
            start_time_us: spec.start_time_us,
            completion_time_us: None,
            bytes_remaining_bits: spec.size_bits,
            injected_bits: 0.0,
            probe_seq: 0,
            last_rtt_us: self.cfg.base_rtt_us,
            last_progress_us: spec.start_time_us,
            last_decision_us: spec.start_time_us,
            injected_at_last_decision: 0.0,
            end_generation: 0,
            controller,
        });
        self.schedule(spec.start_time_us, id, EventKind::FlowStart);
        self.trace.flow_ports.push(spec.port);
        Ok(id)
    }

    fn schedule(&mut self, time_us: f64, flow: FlowId, kind: EventKind) {
        let seq = self.next_seq;
        self.next_seq += 1;
        self.events.push(Reverse(Event { time_us, flow, seq, kind }));
    }

    fn advance_port(&mut self, port: PortId, now_us: f64) -> Result<()> {
        let aggregate = self.port_aggregate_gbps[port.0].max(0.0);
        self.ports[port.0].advance(aggregate, now_us)
    }

    /// Integrates a flow's injection up to `now`, draining finite transfers.
    fn update_flow_progress(&mut self, idx: usize, now_us: f64) {
        let flow = &mut self.flows[idx];
        let dt = now_us - flow.last_progress_us;
        if dt <= 0.0 {
            flow.last_progress_us = now_us;
            return;
        }
        let sent = flow.rate_gbps * GBPS_TO_BITS_PER_US * dt;
        flow.injected_bits += sent;
        if let Some(rem) = flow.bytes_remaining_bits.as_mut() {
            *rem = (*rem - sent).max(0.0);
        }
        flow.last_progress_us = now_us;
    }

    fn schedule_flow_end(&mut self, idx: usize, now_us: f64) {
        let flow = &mut self.flows[idx];
        let Some(rem) = flow.bytes_remaining_bits else {
            return;
        };
        flow.end_generation += 1;
        let generation = flow.end_generation;
        let eta = if rem <= 0.0 {
            now_us
        } else {
            now_us + rem / (flow.rate_gbps * GBPS_TO_BITS_PER_US)
        };
        let id = flow.id;
        self.schedule(eta, id, EventKind::FlowEnd { generation });
    }

    fn issue_probe(&mut self, idx: usize, now_us: f64) {
        let port = self.flows[idx].port;
        let rtt = self.ports[port.0].rtt_us(self.cfg.base_rtt_us);
        let id = self.flows[idx].id;
        self.flows[idx].probe_seq += 1;
        self.schedule(now_us + rtt, id, EventKind::ProbeArrival { issued_us: now_us });
    }

    /// Pops and processes the earliest event. Returns `false` when the event
    /// queue is empty.
    pub fn step(&mut self) -> Result<bool> {
        let Some(Reverse(event)) = self.events.pop() else {
            return Ok(false);
        };
        debug_assert!(event.time_us >= self.now_us, "event times must be nondecreasing");
        self.now_us = event.time_us;
        let now = self.now_us;

        match event.kind {
            EventKind::MetricsSample => {
                self.record_sample(now)?;
                self.next_sample_us = now + self.cfg.sample_interval_us;
                let t = self.next_sample_us;
                self.schedule(t, NO_FLOW, EventKind::MetricsSample);
                return Ok(true);
            }
            _ => {}
        }

        let idx = event.flow.0;
        if idx >= self.flows.len() {
            return Err(Error::contract(format!("event for unknown flow {idx}")));
        }

        match event.kind {
            EventKind::FlowStart => {
                debug_assert_eq!(self.flows[idx].phase, FlowPhase::Pending);
                let port = self.flows[idx].port;
                self.advance_port(port, now)?;
                self.flows[idx].phase = FlowPhase::Active;
                self.flows[idx].last_progress_us = now;
                self.flows[idx].last_decision_us = now;
                self.port_aggregate_gbps[port.0] += self.flows[idx].rate_gbps;
                self.schedule_flow_end(idx, now);
                self.issue_probe(idx, now);
            }
            EventKind::ProbeArrival { issued_us } => {
                if self.flows[idx].phase != FlowPhase::Active {
                    return Ok(true);
                }
                let port = self.flows[idx].port;
                self.advance_port(port, now)?;
                let measured = now - issued_us;
                self.flows[idx].last_rtt_us = measured;
                let ecn_marked = match self.ecn.as_mut() {
                    Some(marker) => marker.mark(self.ports[port.0].occupancy_bits),
                    None => false,
                };
                let t = now + self.cfg.decision_latency_us;
                self.schedule(
                    t,
                    self.flows[idx].id,
                    EventKind::DecisionReady { measured_rtt_us: measured, ecn_marked },
                );
            }
            EventKind::DecisionReady { measured_rtt_us, ecn_marked } => {
                if self.flows[idx].phase != FlowPhase::Active {
                    return Ok(true);
                }
                self.update_flow_progress(idx, now);
                let flow = &mut self.flows[idx];
                let ctx = ProbeContext {
                    now_us: now,
                    measured_rtt_us,
                    ecn_marked,
                    current_rate_gbps: flow.rate_gbps,
                    bits_sent: flow.injected_bits - flow.injected_at_last_decision,
                    elapsed_us: now - flow.last_decision_us,
                    cfg: &self.cfg,
                };
                let desired = flow.controller.decide(&ctx);
                if !desired.is_finite() {
                    return Err(Error::NonFinite(format!("controller output for flow {idx}")));
                }
                let new_rate = desired.clamp(self.cfg.min_rate_gbps, self.cfg.line_rate_gbps);
                flow.last_decision_us = now;
                flow.injected_at_last_decision = flow.injected_bits;
                let old_rate = flow.rate_gbps;
                let port = flow.port;
                self.advance_port(port, now)?;
                self.port_aggregate_gbps[port.0] += new_rate - old_rate;
                self.flows[idx].rate_gbps = new_rate;
                self.schedule_flow_end(idx, now);
                self.issue_probe(idx, now);
            }
            EventKind::FlowEnd { generation } => {
                if self.flows[idx].phase != FlowPhase::Active
                    || generation != self.flows[idx].end_generation
                {
                    return Ok(true);
                }
                self.update_flow_progress(idx, now);
                let flow = &mut self.flows[idx];
                flow.bytes_remaining_bits = Some(0.0);
                flow.phase = FlowPhase::Done;
                flow.completion_time_us = Some(now);
                let rate = flow.rate_gbps;
                let port = flow.port;
                self.advance_port(port, now)?;
                self.port_aggregate_gbps[port.0] =
                    (self.port_aggregate_gbps[port.0] - rate).max(0.0);
            }
            EventKind::MetricsSample => unreachable!(),
        }
        Ok(true)
    }

    fn record_sample(&mut self, now_us: f64) -> Result<()> {
        for p in 0..self.ports.len() {
            self.advance_port(PortId(p), now_us)?;
        }
        let ports = self
            .ports
            .iter()
            .map(|p| PortSample {
                occupancy_bits: p.occupancy_bits,
                injected_bits: p.injected_bits,
                delivered_bits: p.delivered_bits,
                dropped_bits: p.dropped_bits,
            })
            .collect();
        let flows = self
            .flows
            .iter()
            .map(|f| {
                let active = f.phase == FlowPhase::Active;
                let live_injected = if active {
                    f.injected_bits
                        + f.rate_gbps * GBPS_TO_BITS_PER_US * (now_us - f.last_progress_us)
                } else {
                    f.injected_bits
                };
                FlowSample {
                    flow: f.id,
                    active,
                    rate_gbps: if active { f.rate_gbps } else { 0.0 },
                    rtt_us: f.last_rtt_us,
                    injected_bits: live_injected,
                }
            })
            .collect();
        self.trace.push(SampleRecord { time_us: now_us, flows, ports });
        Ok(())
    }

    /// Processes events until the simulated clock reaches `duration_us`,
    /// sampling metrics at the configured interval. Identical (config, seed,
    /// scenario) inputs produce bit-identical traces.
    pub fn run(&mut self, duration_us: f64) -> Result<&MetricsTrace> {
        if !self.sampling_scheduled {
            self.sampling_scheduled = true;
            let t = self.now_us;
            self.schedule(t, NO_FLOW, EventKind::MetricsSample);
        }
        while let Some(Reverse(ev)) = self.events.peek() {
            if ev.time_us > duration_us {
                break;
            }
            self.step()?;
        }
        self.now_us = self.now_us.max(duration_us);
        Ok(&self.trace)
    }

    /// Relative conservation error across all ports.
    pub fn max_conservation_error(&self) -> f64 {
        self.ports
            .iter()
            .map(|p| p.conservation_error())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::FixedRateController;

    fn cfg() -> SimConfig {
        SimConfig {
            start_jitter_us: 0.0,
            ..SimConfig::default()
        }
    }

    fn spec(port: usize, start: f64) -> FlowSpec {
        FlowSpec {
            src: 0,
            dst: 1,
            port: PortId(port),
            start_time_us: start,
            size_bits: None,
            tag: FlowTag::Normal,
        }
    }

    #[test]
    fn empty_engine_records_all_zero_samples() {
        let mut engine = Engine::new(cfg(), 1).unwrap();
        let trace = engine.run(1_000.0).unwrap();
        assert!(!trace.samples.is_empty());
        for s in &trace.samples {
            assert_eq!(s.ports[0].occupancy_bits, 0.0);
            assert_eq!(s.ports[0].dropped_bits, 0.0);
            assert!(s.flows.is_empty());
        }
    }

    #[test]
    fn greedy_single_flow_fills_link_without_drops() {
        let mut engine = Engine::new(cfg(), 1).unwrap();
        engine
            .add_flow(spec(0, 0.0), Box::new(FixedRateController::new(100.0)))
            .unwrap();
        engine.run(10_000.0).unwrap();
        let port = &engine.ports()[0];
        assert!((port.delivered_bits - 100.0 * 1_000.0 * 10_000.0).abs() < 1.0);
        assert_eq!(port.dropped_bits, 0.0);
        assert!(engine.max_conservation_error() < 1e-9);
    }

    #[test]
    fn fair_share_flows_keep_queue_empty() {
        let mut c = cfg();
        c.initial_rate_gbps = Some(25.0);
        let mut engine = Engine::new(c, 1).unwrap();
        for _ in 0..4 {
            engine
                .add_flow(spec(0, 0.0), Box::new(FixedRateController::new(25.0)))
                .unwrap();
        }
        engine.run(5_000.0).unwrap();
        let port = &engine.ports()[0];
        assert!(port.occupancy_bits < 1e-6);
        assert_eq!(port.dropped_bits, 0.0);
        // Goodput is the full line rate.
        assert!((port.delivered_bits - 100.0 * 1_000.0 * 5_000.0).abs() / port.delivered_bits < 1e-9);
    }

    #[test]
    fn single_flow_probe_cadence_is_base_rtt_when_uncongested() {
        // A 50 Gbps flow never builds a queue, so probes land exactly one
        // base RTT after issue and decisions every base_rtt + latency.
        let mut c = cfg();
        c.decision_latency_us = 0.0;
        c.initial_rate_gbps = Some(50.0);
        let mut engine = Engine::new(c, 1).unwrap();
        engine
            .add_flow(spec(0, 0.0), Box::new(FixedRateController::new(50.0)))
            .unwrap();
        engine.run(100.0).unwrap();
        let flow = &engine.flows()[0];
        assert_eq!(flow.last_rtt_us, 10.0);
        // Probes issued at t = 0, 10, ..., 100: one per base RTT.
        assert_eq!(flow.probe_seq, 11);
    }

    #[test]
    fn decision_latency_delays_reaction() {
        struct StepDown;
        impl Controller for StepDown {
            fn decide(&mut self, ctx: &ProbeContext<'_>) -> f64 {
                ctx.current_rate_gbps * 0.5
            }
        }
        let mut c = cfg();
        c.decision_latency_us = 450.0;
        let mut engine = Engine::new(c, 1).unwrap();
        engine.add_flow(spec(0, 0.0), Box::new(StepDown)).unwrap();
        engine.run(455.0).unwrap();
        // Probe at t=10, decision only at t=460 > horizon: rate unchanged.
        assert_eq!(engine.flows()[0].rate_gbps, 100.0);
        let mut engine2 = Engine::new(
            SimConfig { decision_latency_us: 450.0, ..cfg() },
            1,
        )
        .unwrap();
        engine2.add_flow(spec(0, 0.0), Box::new(StepDown)).unwrap();
        engine2.run(461.0).unwrap();
        assert_eq!(engine2.flows()[0].rate_gbps, 50.0);
    }

    #[test]
    fn finite_flow_completes_and_frees_the_port() {
        let mut c = cfg();
        c.initial_rate_gbps = Some(10.0);
        let mut engine = Engine::new(c, 1).unwrap();
        let mut fs = spec(0, 0.0);
        fs.size_bits = Some(10.0 * 1_000.0 * 123.0); // exactly 123 us at 10 Gbps
        engine
            .add_flow(fs, Box::new(FixedRateController::new(10.0)))
            .unwrap();
        engine.run(1_000.0).unwrap();
        let flow = &engine.flows()[0];
        assert_eq!(flow.phase, FlowPhase::Done);
        let done = flow.completion_time_us.unwrap();
        assert!((done - 123.0).abs() < 1e-9, "completion at {done}");
        assert_eq!(engine.port_aggregate_gbps[0], 0.0);
        assert!((flow.injected_bits - 10.0 * 1_000.0 * 123.0).abs() < 1e-6);
    }

    #[test]
    fn identical_config_and_seed_reproduce_the_trace() {
        let build = || {
            let mut engine = Engine::new(cfg(), 1).unwrap();
            for i in 0..3 {
                engine
                    .add_flow(
                        spec(0, i as f64),
                        Box::new(FixedRateController::new(40.0 + i as f64)),
                    )
                    .unwrap();
            }
            engine
        };
        let mut a = build();
        let mut b = build();
        let ta = a.run(3_000.0).unwrap().clone();
        let tb = b.run(3_000.0).unwrap().clone();
        assert_eq!(ta.to_csv(), tb.to_csv());
        assert_eq!(ta, tb);
    }

    #[test]
    fn monotone_congestion_when_overloaded() {
        let mut engine = Engine::new(cfg(), 1).unwrap();
        for _ in 0..3 {
            engine
                .add_flow(spec(0, 0.0), Box::new(FixedRateController::new(50.0)))
                .unwrap();
        }
        engine.run(40_000.0).unwrap();
        let trace = engine.trace();
        let mut prev = -1.0;
        let mut hit_buffer = false;
        for s in &trace.samples {
            let occ = s.ports[0].occupancy_bits;
            if hit_buffer {
                assert_eq!(occ, engine.cfg().buffer_bits);
            } else {
                assert!(occ >= prev, "occupancy decreased while overloaded");
            }
            if occ == engine.cfg().buffer_bits {
                hit_buffer = true;
            }
            prev = occ;
        }
        assert!(hit_buffer, "50 Gbps x3 should overflow a 4 Mbit buffer");
        assert!(engine.max_conservation_error() < 1e-9);
    }
}
