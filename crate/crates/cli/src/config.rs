//! Run configuration: the model, the schedule and the watched symbols.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use thermoshift::{
    build_example, AnnealSchedule, FiniteShift, MarkovPotential, PotentialSpec, RenewalExample,
    ShiftFamily, ShiftSpec,
};

/// Default truncation for named models.
pub const DEFAULT_K: usize = 25;

/// Config file: shift and potential specs plus optional run settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub shift: ShiftSpec,
    pub potential: PotentialSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<ScheduleSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub watch: Option<Vec<usize>>,
    /// Truncation sizes for `truncate`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_list: Option<Vec<usize>>,
}

/// Either an explicit list of `t` values or a geometric schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScheduleSpec {
    List(Vec<f64>),
    Geometric(Geometric),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Geometric {
    pub t0: f64,
    pub ratio: f64,
    pub steps: usize,
}

impl ScheduleSpec {
    pub fn build(&self) -> Result<AnnealSchedule> {
        Ok(match self {
            ScheduleSpec::List(t) => AnnealSchedule::new(t.clone())?,
            ScheduleSpec::Geometric(g) => AnnealSchedule::geometric(g.t0, g.ratio, g.steps)?,
        })
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("invalid config {}", path.display()))
    }
}

/// Where the shift and potential come from.
#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Named(RenewalExample),
    Spec(ShiftSpec, PotentialSpec),
}

impl Source {
    pub fn name(&self) -> String {
        match self {
            Source::Named(which) => format!("renewal:{}", which.name()),
            Source::Spec(s, p) => format!("{:?}:{:?}", s.kind, p.kind).to_lowercase(),
        }
    }

    pub fn family(&self) -> Result<ShiftFamily> {
        Ok(match self {
            Source::Named(_) => ShiftFamily::Renewal,
            Source::Spec(s, _) => s.family()?,
        })
    }

    pub fn default_k(&self) -> usize {
        match self {
            Source::Named(_) => DEFAULT_K,
            Source::Spec(s, _) => s.n_states,
        }
    }

    /// Shift and potential at `k` states.
    pub fn build(&self, k: usize) -> Result<(FiniteShift, MarkovPotential)> {
        match self {
            Source::Named(which) => {
                let (shift, pot, _) = build_example(*which, k)?;
                Ok((shift, pot))
            }
            Source::Spec(s, p) => {
                let shift = ShiftSpec {
                    n_states: k,
                    ..s.clone()
                }
                .build()?;
                let pot = p.build(&shift)?;
                Ok((shift, pot))
            }
        }
    }
}

/// Everything a model command needs, with flags already merged over the
/// config file.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub source: Source,
    pub k: usize,
    pub schedule: AnnealSchedule,
    pub watch: Option<Vec<usize>>,
    pub k_list: Option<Vec<usize>>,
}

/// Flag values, before merging.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub model: Option<String>,
    pub config: Option<std::path::PathBuf>,
    pub k: Option<usize>,
    pub t: Option<Vec<f64>>,
    pub geometric: Option<Geometric>,
    pub watch: Option<Vec<usize>>,
}

pub fn resolve(o: &Overrides) -> Result<Resolved> {
    let (source, schedule_spec, watch, k_list) = match (&o.model, &o.config) {
        (Some(name), None) => {
            let which: RenewalExample = name.parse()?;
            (Source::Named(which), None, None, None)
        }
        (None, Some(path)) => {
            let cfg = RunConfig::load(path)?;
            (Source::Spec(cfg.shift, cfg.potential), cfg.schedule, cfg.watch, cfg.k_list)
        }
        (Some(_), Some(_)) => bail!("--model and --config are mutually exclusive"),
        (None, None) => bail!("one of --model or --config is required"),
    };
    let schedule_spec = match (&o.t, o.geometric) {
        (Some(t), _) => Some(ScheduleSpec::List(t.clone())),
        (None, Some(g)) => Some(ScheduleSpec::Geometric(g)),
        (None, None) => schedule_spec,
    };
    let schedule = match schedule_spec {
        Some(s) => s.build()?,
        None => AnnealSchedule::default(),
    };
    Ok(Resolved {
        k: o.k.unwrap_or_else(|| source.default_k()),
        source,
        schedule,
        watch: o.watch.clone().or(watch),
        k_list,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trip_and_unknown_keys() {
        let text = r#"{"shift":{"kind":"renewal","n_states":8},"potential":{"type":"neg_x0"},
            "schedule":{"t0":1,"ratio":2,"steps":3},"watch":[1,2]}"#;
        let cfg: RunConfig = serde_json::from_str(text).unwrap();
        assert_eq!(cfg.shift.n_states, 8);
        assert_eq!(cfg.schedule.as_ref().unwrap().build().unwrap().t_values(), &[1.0, 2.0, 4.0]);
        let again: RunConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(again, cfg);
        let bad = r#"{"shift":{"kind":"renewal","n_states":8},"potential":{"type":"neg_x0"},"colour":1}"#;
        assert!(serde_json::from_str::<RunConfig>(bad).is_err());
        let list = r#"{"shift":{"kind":"full","n_states":2},"potential":{"type":"constant","kappa":0},"schedule":[1,3]}"#;
        let cfg: RunConfig = serde_json::from_str(list).unwrap();
        assert_eq!(cfg.schedule, Some(ScheduleSpec::List(vec![1.0, 3.0])));
    }

    #[test]
    fn flags_override_the_config() {
        let o = Overrides {
            model: Some("renewal:x0_minus_x1".into()),
            k: Some(10),
            t: Some(vec![1.0, 2.0]),
            ..Default::default()
        };
        let r = resolve(&o).unwrap();
        assert_eq!(r.k, 10);
        assert_eq!(r.schedule.t_values(), &[1.0, 2.0]);
        assert_eq!(r.source.name(), "renewal:x0_minus_x1");
        assert!(resolve(&Overrides::default()).is_err());
        let bad = Overrides {
            model: Some("renewal:nope".into()),
            ..Default::default()
        };
        assert!(resolve(&bad).is_err());
    }
}
