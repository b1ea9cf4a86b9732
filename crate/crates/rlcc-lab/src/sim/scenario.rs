//! Benchmark scenario construction.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::sim::{Controller, Engine, FlowSpec, FlowTag, PortId, SimConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    ManyToOne,
    AllToAll,
    LongShort,
}

impl ScenarioKind {
    pub fn name(&self) -> &'static str {
        match self {
            ScenarioKind::ManyToOne => "many_to_one",
            ScenarioKind::AllToAll => "all_to_all",
            ScenarioKind::LongShort => "long_short",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "many_to_one" => Ok(ScenarioKind::ManyToOne),
            "all_to_all" => Ok(ScenarioKind::AllToAll),
            "long_short" => Ok(ScenarioKind::LongShort),
            other => Err(Error::validation(format!("unknown scenario kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    pub hosts: usize,
    /// Many-to-one: flows per sending host. All-to-all: flows per
    /// (source, destination) pair.
    pub flows_per_host: usize,
    pub n_long: usize,
    pub n_short: usize,
    pub short_bytes: u64,
    pub duration_us: f64,
    pub warmup_us: f64,
}

pub const DEFAULT_DURATION_US: f64 = 50_000.0;
pub const DEFAULT_WARMUP_US: f64 = 10_000.0;
pub const DEFAULT_SHORT_BYTES: u64 = 1_000_000;

impl ScenarioSpec {
    pub fn many_to_one(hosts: usize, flows_per_host: usize) -> Self {
        ScenarioSpec {
            kind: ScenarioKind::ManyToOne,
            hosts,
            flows_per_host,
            n_long: 0,
            n_short: 0,
            short_bytes: 0,
            duration_us: DEFAULT_DURATION_US,
            warmup_us: DEFAULT_WARMUP_US,
        }
    }

    pub fn all_to_all(hosts: usize, flows_per_pair: usize) -> Self {
        ScenarioSpec {
            kind: ScenarioKind::AllToAll,
            hosts,
            flows_per_host: flows_per_pair,
            n_long: 0,
            n_short: 0,
            short_bytes: 0,
            duration_us: DEFAULT_DURATION_US,
            warmup_us: DEFAULT_WARMUP_US,
        }
    }

    pub fn long_short(n_long: usize, n_short: usize, short_bytes: u64) -> Self {
        ScenarioSpec {
            kind: ScenarioKind::LongShort,
            hosts: n_long,
            flows_per_host: 1,
            n_long,
            n_short,
            short_bytes,
            duration_us: DEFAULT_DURATION_US,
            warmup_us: DEFAULT_WARMUP_US,
        }
    }

    pub fn with_horizon(mut self, duration_us: f64, warmup_us: f64) -> Self {
        self.duration_us = duration_us;
        self.warmup_us = warmup_us;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration_us > 0.0) {
            return Err(Error::validation("scenario duration must be > 0"));
        }
        if !(self.warmup_us >= 0.0 && self.warmup_us < self.duration_us) {
            return Err(Error::validation("warmup must lie in [0, duration)"));
        }
        match self.kind {
            ScenarioKind::ManyToOne => {
                if self.hosts == 0 || self.flows_per_host == 0 {
                    return Err(Error::validation("many_to_one needs hosts and flows >= 1"));
                }
            }
            ScenarioKind::AllToAll => {
                if self.hosts < 2 || self.flows_per_host == 0 {
                    return Err(Error::validation(
                        "all_to_all needs >= 2 hosts and flows >= 1",
                    ));
                }
            }
            ScenarioKind::LongShort => {
                if self.n_long == 0 || self.n_short == 0 {
                    return Err(Error::validation("long_short needs long and short flows"));
                }
                if self.short_bytes == 0 {
                    return Err(Error::validation("short flow size must be > 0 bytes"));
                }
            }
        }
        Ok(())
    }

    pub fn total_flows(&self) -> usize {
        match self.kind {
            ScenarioKind::ManyToOne => self.hosts * self.flows_per_host,
            ScenarioKind::AllToAll => self.hosts * (self.hosts - 1) * self.flows_per_host,
            ScenarioKind::LongShort => self.n_long + self.n_short,
        }
    }

    pub fn n_ports(&self) -> usize {
        match self.kind {
            ScenarioKind::ManyToOne | ScenarioKind::LongShort => 1,
            ScenarioKind::AllToAll => self.hosts,
        }
    }

    pub fn label(&self) -> String {
        match self.kind {
            ScenarioKind::LongShort => format!(
                "long_short/{}l+{}s",
                self.n_long, self.n_short
            ),
            _ => format!("{}/{}", self.kind.name(), self.total_flows()),
        }
    }
}

/// Builds an engine with all flows of the scenario installed. `make` is
/// called once per flow, in flow-id order, to produce its controller.
pub fn build_scenario(
    spec: &ScenarioSpec,
    cfg: &SimConfig,
    make: &mut dyn FnMut(usize) -> Box<dyn Controller>,
) -> Result<Engine> {
    spec.validate()?;
    let mut engine = Engine::new(cfg.clone(), spec.n_ports())?;
    // Sub-stream 0xA5 of the run seed drives scenario layout randomness only.
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_mul(0x9e3779b97f4a7c15) ^ 0xa5);
    let jitter = |rng: &mut ChaCha8Rng| -> f64 {
        if cfg.start_jitter_us > 0.0 {
            rng.gen_range(0.0..cfg.start_jitter_us)
        } else {
            0.0
        }
    };
    let mut idx = 0usize;
    match spec.kind {
        ScenarioKind::ManyToOne => {
            // All flows share the receiver's single egress queue.
            for host in 0..spec.hosts {
                for _ in 0..spec.flows_per_host {
                    let start = jitter(&mut rng);
                    engine.add_flow(
                        FlowSpec {
                            src: host,
                            dst: spec.hosts,
                            port: PortId(0),
                            start_time_us: start,
                            size_bits: None,
                            tag: FlowTag::Normal,
                        },
                        make(idx),
                    )?;
                    idx += 1;
                }
            }
        }
        ScenarioKind::AllToAll => {
            // One queue per destination host; every host sends to all others.
            for src in 0..spec.hosts {
                for dst in 0..spec.hosts {
                    if src == dst {
                        continue;
                    }
                    for _ in 0..spec.flows_per_host {
                        let start = jitter(&mut rng);
                        engine.add_flow(
                            FlowSpec {
                                src,
                                dst,
                                port: PortId(dst),
                                start_time_us: start,
                                size_bits: None,
                                tag: FlowTag::Normal,
                            },
                            make(idx),
                        )?;
                        idx += 1;
                    }
                }
            }
        }
        ScenarioKind::LongShort => {
            for host in 0..spec.n_long {
                let start = jitter(&mut rng);
                engine.add_flow(
                    FlowSpec {
                        src: host,
                        dst: spec.n_long,
                        port: PortId(0),
                        start_time_us: start,
                        size_bits: None,
                        tag: FlowTag::Long,
                    },
                    make(idx),
                )?;
                idx += 1;
            }
            // Shorts burst in together at a seeded-random time after warmup,
            // desynchronized by at most one base RTT each.
            let span = spec.duration_us - spec.warmup_us;
            let burst = spec.warmup_us + (0.15 + 0.1 * rng.gen::<f64>()) * span;
            for k in 0..spec.n_short {
                let start = burst + rng.gen_range(0.0..cfg.base_rtt_us);
                engine.add_flow(
                    FlowSpec {
                        src: spec.n_long + 1 + k,
                        dst: spec.n_long,
                        port: PortId(0),
                        start_time_us: start,
                        size_bits: Some(spec.short_bytes as f64 * 8.0),
                        tag: FlowTag::Short,
                    },
                    make(idx),
                )?;
                idx += 1;
            }
        }
    }
    Ok(engine)
}
