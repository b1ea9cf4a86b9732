//! INI-style configuration: `[section]` headers with `key = value` pairs,
//! `#`/`;` comments. Sections: `[sim]`, `[scenario]`, `[controller]`,
//! `[train]`, `[distill]`.

use std::collections::BTreeMap;
use std::path::Path;

use crate::baselines::{DcqcnConfig, SwiftConfig};
use crate::bench::EcnParams;
use crate::error::{Error, Result};
use crate::gbt::FitConfig;
use crate::policy::RewardParams;
use crate::sim::{ScenarioKind, ScenarioSpec, SimConfig};
use crate::train::{GradientWeighting, TrainConfig};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct IniDoc {
    sections: BTreeMap<String, BTreeMap<String, String>>,
}

impl IniDoc {
    pub fn parse(text: &str) -> Result<IniDoc> {
        let mut doc = IniDoc::default();
        let mut current = String::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                current = name.trim().to_string();
                doc.sections.entry(current.clone()).or_default();
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::parse(
                    "config",
                    format!("line {}: expected key = value, got {line:?}", lineno + 1),
                ));
            };
            if current.is_empty() {
                return Err(Error::parse(
                    "config",
                    format!("line {}: key outside any [section]", lineno + 1),
                ));
            }
            doc.sections
                .get_mut(&current)
                .unwrap()
                .insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(doc)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<IniDoc> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| Error::parse("config", format!("{}: {e}", path.as_ref().display())))?;
        Self::parse(&text)
    }

    pub fn section(&self, name: &str) -> Option<&BTreeMap<String, String>> {
        self.sections.get(name)
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.sections.get(section).and_then(|s| s.get(key)).map(String::as_str)
    }

    fn typed<T: std::str::FromStr>(&self, section: &str, key: &str) -> Result<Option<T>> {
        match self.get(section, key) {
            None => Ok(None),
            Some(raw) => raw.parse::<T>().map(Some).map_err(|_| {
                Error::parse("config", format!("[{section}] {key}: cannot parse {raw:?}"))
            }),
        }
    }

    fn f64_into(&self, section: &str, key: &str, slot: &mut f64) -> Result<()> {
        if let Some(v) = self.typed::<f64>(section, key)? {
            *slot = v;
        }
        Ok(())
    }

    fn usize_into(&self, section: &str, key: &str, slot: &mut usize) -> Result<()> {
        if let Some(v) = self.typed::<usize>(section, key)? {
            *slot = v;
        }
        Ok(())
    }
}

/// Controller selection from the `[controller]` section.
#[derive(Debug, Clone, PartialEq)]
pub enum ControllerChoice {
    Dcqcn { dcqcn: DcqcnConfig, ecn: EcnParams },
    Swift(SwiftConfig),
    RlccMlp { checkpoint: Option<String>, params: RewardParams },
    RlccTree { model: Option<String>, checkpoint: Option<String>, params: RewardParams },
    Fixed(f64),
    Oracle(RewardParams),
}

impl Default for ControllerChoice {
    fn default() -> Self {
        ControllerChoice::Swift(SwiftConfig::default())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabConfig {
    pub sim: SimConfig,
    pub scenario: ScenarioSpec,
    pub controller: ControllerChoice,
    pub train: TrainConfig,
    pub fit: FitConfig,
    pub distill_samples: usize,
}

impl Default for LabConfig {
    fn default() -> Self {
        LabConfig {
            sim: SimConfig::default(),
            scenario: ScenarioSpec::many_to_one(8, 1),
            controller: ControllerChoice::default(),
            train: TrainConfig::default(),
            fit: FitConfig::default(),
            distill_samples: 100_000,
        }
    }
}

pub fn reward_params_from(doc: &IniDoc, section: &str) -> Result<RewardParams> {
    let defaults = RewardParams::default();
    let target = doc.typed::<f64>(section, "target")?.unwrap_or(defaults.target);
    let beta = doc.typed::<f64>(section, "beta")?.unwrap_or(defaults.beta);
    RewardParams::new(target, beta)
}

impl LabConfig {
    pub fn from_doc(doc: &IniDoc) -> Result<LabConfig> {
        let mut lab = LabConfig::default();

        let sim = &mut lab.sim;
        doc.f64_into("sim", "line_rate_gbps", &mut sim.line_rate_gbps)?;
        doc.f64_into("sim", "base_rtt_us", &mut sim.base_rtt_us)?;
        doc.f64_into("sim", "buffer_bits", &mut sim.buffer_bits)?;
        doc.f64_into("sim", "min_rate_gbps", &mut sim.min_rate_gbps)?;
        doc.f64_into("sim", "duration_us", &mut sim.duration_us)?;
        doc.f64_into("sim", "decision_latency_us", &mut sim.decision_latency_us)?;
        doc.f64_into("sim", "sample_interval_us", &mut sim.sample_interval_us)?;
        doc.f64_into("sim", "start_jitter_us", &mut sim.start_jitter_us)?;
        if let Some(seed) = doc.typed::<u64>("sim", "seed")? {
            sim.seed = seed;
        }
        if let Some(r) = doc.typed::<f64>("sim", "initial_rate_gbps")? {
            sim.initial_rate_gbps = Some(r);
        }
        sim.validate()?;

        if let Some(kind) = doc.get("scenario", "kind") {
            let kind = ScenarioKind::parse(kind)?;
            lab.scenario = match kind {
                ScenarioKind::ManyToOne => ScenarioSpec::many_to_one(8, 1),
                ScenarioKind::AllToAll => ScenarioSpec::all_to_all(8, 1),
                ScenarioKind::LongShort => {
                    ScenarioSpec::long_short(4, 100, crate::sim::DEFAULT_SHORT_BYTES)
                }
            };
        }
        doc.usize_into("scenario", "hosts", &mut lab.scenario.hosts)?;
        doc.usize_into("scenario", "flows_per_host", &mut lab.scenario.flows_per_host)?;
        doc.usize_into("scenario", "n_long", &mut lab.scenario.n_long)?;
        doc.usize_into("scenario", "n_short", &mut lab.scenario.n_short)?;
        if let Some(v) = doc.typed::<u64>("scenario", "short_bytes")? {
            lab.scenario.short_bytes = v;
        }
        lab.scenario.duration_us = lab.sim.duration_us;
        lab.scenario.warmup_us = 0.2 * lab.sim.duration_us;
        doc.f64_into("scenario", "duration_us", &mut lab.scenario.duration_us)?;
        doc.f64_into("scenario", "warmup_us", &mut lab.scenario.warmup_us)?;
        lab.scenario.validate()?;

        lab.controller = Self::controller_from(doc)?;

        let train = &mut lab.train;
        train.params = reward_params_from(doc, "train")?;
        doc.f64_into("train", "learning_rate", &mut train.learning_rate)?;
        doc.usize_into("train", "buffer_size", &mut train.buffer_size)?;
        doc.usize_into("train", "epochs", &mut train.epochs)?;
        doc.f64_into("train", "episode_us", &mut train.episode_us)?;
        doc.usize_into("train", "eval_every", &mut train.eval_every)?;
        doc.f64_into("train", "convergence_mean_abs_delta", &mut train.convergence_mean_abs_delta)?;
        doc.usize_into("train", "window", &mut train.window_len)?;
        doc.usize_into("train", "hidden", &mut train.hidden_dim)?;
        doc.f64_into("train", "init_scale", &mut train.init_scale)?;
        if let Some(seed) = doc.typed::<u64>("train", "seed")? {
            train.seed = seed;
        }
        if let Some(w) = doc.get("train", "weighting") {
            train.weighting = match w {
                "per_step" => GradientWeighting::PerStep,
                "trajectory_average" => GradientWeighting::TrajectoryAverage,
                other => {
                    return Err(Error::parse(
                        "config",
                        format!("[train] weighting: unknown value {other:?}"),
                    ))
                }
            };
        }
        train.validate()?;

        let fit = &mut lab.fit;
        doc.usize_into("distill", "rounds", &mut fit.rounds)?;
        doc.usize_into("distill", "max_depth", &mut fit.max_depth)?;
        doc.f64_into("distill", "shrinkage", &mut fit.shrinkage)?;
        doc.usize_into("distill", "min_leaf", &mut fit.min_leaf)?;
        doc.usize_into("distill", "n_thresholds", &mut fit.n_thresholds)?;
        doc.usize_into("distill", "samples", &mut lab.distill_samples)?;
        fit.validate()?;

        Ok(lab)
    }

    fn controller_from(doc: &IniDoc) -> Result<ControllerChoice> {
        let Some(kind) = doc.get("controller", "kind") else {
            return Ok(ControllerChoice::default());
        };
        let params = reward_params_from(doc, "controller")?;
        let choice = match kind {
            "dcqcn" => {
                let mut dcqcn = DcqcnConfig::default();
                doc.f64_into("controller", "g", &mut dcqcn.g)?;
                doc.f64_into("controller", "rate_ai_gbps", &mut dcqcn.rate_ai_gbps)?;
                doc.f64_into("controller", "rate_hai_gbps", &mut dcqcn.rate_hai_gbps)?;
                doc.f64_into("controller", "timer_us", &mut dcqcn.timer_us)?;
                doc.f64_into("controller", "byte_counter_bits", &mut dcqcn.byte_counter_bits)?;
                let mut ecn = EcnParams::default();
                doc.f64_into("controller", "k_min_bits", &mut ecn.k_min_bits)?;
                doc.f64_into("controller", "k_max_bits", &mut ecn.k_max_bits)?;
                doc.f64_into("controller", "p_max", &mut ecn.p_max)?;
                ControllerChoice::Dcqcn { dcqcn, ecn }
            }
            "swift" => {
                let mut swift = SwiftConfig::default();
                doc.f64_into("controller", "target_delay_us", &mut swift.target_delay_us)?;
                doc.f64_into("controller", "ai_gbps", &mut swift.ai_gbps)?;
                doc.f64_into("controller", "md_beta", &mut swift.md_beta)?;
                doc.f64_into("controller", "max_md", &mut swift.max_md)?;
                ControllerChoice::Swift(swift)
            }
            "rlcc-mlp" => ControllerChoice::RlccMlp {
                checkpoint: doc.get("controller", "checkpoint").map(String::from),
                params,
            },
            "rlcc-tree" => ControllerChoice::RlccTree {
                model: doc.get("controller", "model").map(String::from),
                checkpoint: doc.get("controller", "checkpoint").map(String::from),
                params,
            },
            "fixed" => {
                let rate = doc
                    .typed::<f64>("controller", "rate_gbps")?
                    .ok_or_else(|| Error::validation("[controller] fixed needs rate_gbps"))?;
                ControllerChoice::Fixed(rate)
            }
            "oracle" => ControllerChoice::Oracle(params),
            other => {
                return Err(Error::validation(format!("unknown controller kind {other:?}")))
            }
        };
        Ok(choice)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<LabConfig> {
        Self::from_doc(&IniDoc::load(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_keys_and_comments() {
        let doc = IniDoc::parse(
            "# comment\n[sim]\nseed = 7\nline_rate_gbps = 200\n\n; other\n[controller]\nkind = dcqcn\ng = 0.0625\n",
        )
        .unwrap();
        assert_eq!(doc.get("sim", "seed"), Some("7"));
        assert_eq!(doc.get("controller", "kind"), Some("dcqcn"));
        assert_eq!(doc.get("missing", "x"), None);
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(IniDoc::parse("[sim]\nnot a pair\n").is_err());
        assert!(IniDoc::parse("key = before section\n").is_err());
    }

    #[test]
    fn lab_config_roundtrip_defaults_and_overrides() {
        let doc = IniDoc::parse(
            "[sim]\nseed = 9\nduration_us = 10000\n[scenario]\nkind = many_to_one\nhosts = 16\nflows_per_host = 2\n[controller]\nkind = swift\nai_gbps = 2\n",
        )
        .unwrap();
        let lab = LabConfig::from_doc(&doc).unwrap();
        assert_eq!(lab.sim.seed, 9);
        assert_eq!(lab.scenario.total_flows(), 32);
        assert_eq!(lab.scenario.duration_us, 10_000.0);
        assert_eq!(lab.scenario.warmup_us, 2_000.0);
        match lab.controller {
            ControllerChoice::Swift(s) => assert_eq!(s.ai_gbps, 2.0),
            other => panic!("wrong controller {other:?}"),
        }
    }

    #[test]
    fn invalid_values_are_validation_errors() {
        let doc = IniDoc::parse("[sim]\nline_rate_gbps = -5\n").unwrap();
        let err = LabConfig::from_doc(&doc).unwrap_err();
        assert!(err.is_validation());
        let doc = IniDoc::parse("[controller]\nkind = warp\n").unwrap();
        assert!(LabConfig::from_doc(&doc).is_err());
    }
}
