//! Flat `key = value` scenario files.
//!
//! One setting per line, `#` starts a comment.  Keys that do not apply to
//! the selected model are rejected, as are duplicates.  Anything left out
//! takes its default.

use qkdleak_core::{
    ChannelParams, EngineConfig, LeakageModel, OptimizerGrid, PhaseDistribution, PmScenario,
    SourceScenario, ThaScenario,
};
use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    /// 1-based line of the offending entry, 0 when it concerns the whole file.
    pub line: usize,
    pub msg: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line > 0 {
            write!(f, "line {}: {}", self.line, self.msg)
        } else {
            f.write_str(&self.msg)
        }
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(line: usize, msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError { line, msg: msg.into() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Scope {
    Any,
    General,
    /// Both Trojan-horse models.
    Leak,
    Pm,
    /// Discrete general scenarios and both Trojan-horse models.
    Phases,
}

#[derive(Debug, Clone, Copy)]
enum Kind {
    /// Real value in [lo, hi]; `open_lo` excludes the lower end.
    Real { lo: f64, hi: f64, open_lo: bool },
    Count { min: u64 },
    Word(&'static [&'static str]),
    Flag,
}

const fn real(lo: f64, hi: f64) -> Kind {
    Kind::Real { lo, hi, open_lo: false }
}

const fn positive(hi: f64) -> Kind {
    Kind::Real { lo: 0.0, hi, open_lo: true }
}

const INF: f64 = f64::INFINITY;

const KEYS: &[(&str, Scope, Kind)] = &[
    ("model", Scope::Any, Kind::Word(&["general_epsilon", "characterized_tha", "extra_pm"])),
    ("epsilon", Scope::General, real(0.0, 1.0)),
    ("phase.kind", Scope::General, Kind::Word(&["uniform", "discrete"])),
    ("phase.N", Scope::Phases, Kind::Count { min: 1 }),
    ("tha.I", Scope::Leak, real(0.0, INF)),
    ("pm.I_l", Scope::Pm, real(0.0, INF)),
    ("pm.cutoff", Scope::Pm, Kind::Count { min: 1 }),
    ("channel.eta_det", Scope::Any, positive(1.0)),
    ("channel.p_d", Scope::Any, real(0.0, 1.0)),
    ("channel.alpha_db", Scope::Any, real(0.0, INF)),
    ("channel.delta_a", Scope::Any, real(0.0, std::f64::consts::FRAC_PI_2)),
    ("channel.f_ec", Scope::Any, real(1.0, INF)),
    ("source.omega", Scope::Any, real(0.0, INF)),
    ("source.p_mu", Scope::Any, positive(1.0)),
    ("source.p_z", Scope::Any, positive(1.0)),
    ("source.n_cut", Scope::Any, Kind::Count { min: 1 }),
    ("grid.mu_min", Scope::Any, positive(INF)),
    ("grid.mu_max", Scope::Any, positive(INF)),
    ("grid.mu_points", Scope::Any, Kind::Count { min: 1 }),
    ("grid.nu_min", Scope::Any, positive(INF)),
    ("grid.nu_max_ratio", Scope::Any, positive(1.0)),
    ("grid.nu_points", Scope::Any, Kind::Count { min: 1 }),
    ("grid.refine_rounds", Scope::Any, Kind::Count { min: 0 }),
    ("grid.refine_points", Scope::Any, Kind::Count { min: 1 }),
    ("grid.shrink", Scope::Any, positive(INF)),
    ("distance.start", Scope::Any, real(0.0, INF)),
    ("distance.stop", Scope::Any, real(0.0, INF)),
    ("distance.step", Scope::Any, positive(INF)),
    ("solver.restarts", Scope::Any, Kind::Count { min: 1 }),
    ("solver.lp_rounds", Scope::Any, Kind::Count { min: 1 }),
    ("solver.sdp_tol", Scope::Any, positive(INF)),
    ("seed", Scope::Any, Kind::Count { min: 0 }),
    ("plot", Scope::Any, Kind::Flag),
];

/// Distances `start, start + step, …` up to and including `stop`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl DistanceGrid {
    pub fn points(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let mut i = 0u32;
        loop {
            let d = self.start + self.step * i as f64;
            if d > self.stop + 1e-9 * self.step {
                break;
            }
            out.push(d);
            i += 1;
        }
        out
    }
}

impl Default for DistanceGrid {
    fn default() -> Self {
        Self { start: 0.0, stop: 150.0, step: 5.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: SourceScenario,
    pub engine: EngineConfig,
    pub distances: DistanceGrid,
    pub plot: bool,
}

#[derive(Debug, Clone)]
struct Entry {
    line: usize,
    value: String,
}

struct Entries(BTreeMap<&'static str, Entry>);

impl Entries {
    fn line(&self, key: &str) -> usize {
        self.0.get(key).map_or(0, |e| e.line)
    }

    fn kind(key: &str) -> Kind {
        KEYS.iter().find(|k| k.0 == key).map(|k| k.2).expect("known key")
    }

    fn real(&self, key: &str, default: Option<f64>) -> Result<f64, ConfigError> {
        let Some(e) = self.0.get(key) else {
            return default.map_or_else(|| err(0, format!("missing key `{key}`")), Ok);
        };
        let Ok(v) = e.value.parse::<f64>() else {
            return err(e.line, format!("`{key}` expects a number, got `{}`", e.value));
        };
        let Kind::Real { lo, hi, open_lo } = Self::kind(key) else { unreachable!() };
        let below = if open_lo { v <= lo } else { v < lo };
        if !v.is_finite() || below || v > hi {
            let l = if open_lo { "(" } else { "[" };
            return err(e.line, format!("`{key}` = {v} is outside {l}{lo}, {hi}]"));
        }
        Ok(v)
    }

    fn count(&self, key: &str, default: Option<u64>) -> Result<u64, ConfigError> {
        let Some(e) = self.0.get(key) else {
            return default.map_or_else(|| err(0, format!("missing key `{key}`")), Ok);
        };
        let Ok(v) = e.value.parse::<u64>() else {
            return err(e.line, format!("`{key}` expects a nonnegative integer, got `{}`", e.value));
        };
        let Kind::Count { min } = Self::kind(key) else { unreachable!() };
        if v < min {
            return err(e.line, format!("`{key}` must be at least {min}, got {v}"));
        }
        Ok(v)
    }

    fn word(&self, key: &str, default: Option<&'static str>) -> Result<&'static str, ConfigError> {
        let Kind::Word(options) = Self::kind(key) else { unreachable!() };
        let Some(e) = self.0.get(key) else {
            return default.map_or_else(|| err(0, format!("missing key `{key}`")), Ok);
        };
        match options.iter().find(|o| **o == e.value) {
            Some(o) => Ok(o),
            None => err(e.line, format!("`{key}` must be one of {}, got `{}`", options.join(", "), e.value)),
        }
    }

    fn flag(&self, key: &str, default: bool) -> Result<bool, ConfigError> {
        let Some(e) = self.0.get(key) else { return Ok(default) };
        match e.value.as_str() {
            "true" | "yes" | "on" => Ok(true),
            "false" | "no" | "off" => Ok(false),
            v => err(e.line, format!("`{key}` expects true or false, got `{v}`")),
        }
    }
}

fn tokenize(text: &str) -> Result<Entries, ConfigError> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((k, v)) = content.split_once('=') else {
            return err(line, format!("expected `key = value`, got `{content}`"));
        };
        let (k, v) = (k.trim(), v.trim());
        let Some(&(key, _, _)) = KEYS.iter().find(|e| e.0 == k) else {
            return err(line, format!("unknown key `{k}`"));
        };
        if v.is_empty() {
            return err(line, format!("`{key}` has no value"));
        }
        if let Some(prev) = map.insert(key, Entry { line, value: v.to_string() }) {
            return err(line, format!("`{key}` already set on line {}", prev.line));
        }
    }
    Ok(Entries(map))
}

fn applies(scope: Scope, model: &str, discrete: bool) -> bool {
    match scope {
        Scope::Any => true,
        Scope::General => model == "general_epsilon",
        Scope::Leak => model != "general_epsilon",
        Scope::Pm => model == "extra_pm",
        Scope::Phases => model != "general_epsilon" || discrete,
    }
}

/// Parses a scenario file.
pub fn parse(text: &str) -> Result<RunConfig, ConfigError> {
    let e = tokenize(text)?;
    let model = e.word("model", None)?;
    let discrete = model == "general_epsilon" && e.word("phase.kind", Some("uniform"))? == "discrete";
    for (key, entry) in &e.0 {
        let scope = KEYS.iter().find(|k| k.0 == *key).map(|k| k.1).expect("known key");
        if !applies(scope, model, discrete) {
            return err(entry.line, format!("`{key}` does not apply to model {model} here"));
        }
    }

    let phases = |min: u64| -> Result<usize, ConfigError> {
        let n = e.count("phase.N", None)?;
        if n < min {
            return err(e.line("phase.N"), format!("`phase.N` must be at least {min} for this model, got {n}"));
        }
        Ok(n as usize)
    };
    let lm = match model {
        "general_epsilon" => {
            let epsilon = e.real("epsilon", None)?;
            let dist = if discrete {
                PhaseDistribution::DiscreteUniform { n: phases(2)? }
            } else {
                PhaseDistribution::UniformContinuous
            };
            LeakageModel::GeneralEpsilon { epsilon, dist }
        }
        "characterized_tha" => {
            let leak = e.real("tha.I", None)?;
            let s = ThaScenario::new(leak, phases(2)?).or_else(|x| err(e.line("tha.I"), x.to_string()))?;
            LeakageModel::CharacterizedTha(s)
        }
        _ => {
            let leak = e.real("tha.I", None)?;
            let leak_pm = e.real("pm.I_l", None)?;
            let mut s = PmScenario::new(leak, leak_pm, phases(1)?).or_else(|x| err(e.line("tha.I"), x.to_string()))?;
            if e.0.contains_key("pm.cutoff") {
                s.cutoff = Some(e.count("pm.cutoff", None)? as usize);
            }
            LeakageModel::ExtraPm(s)
        }
    };

    let mut scenario = SourceScenario::new(lm);
    scenario.omega = e.real("source.omega", Some(scenario.omega))?;
    scenario.p_mu = e.real("source.p_mu", Some(scenario.p_mu))?;
    scenario.p_z = e.real("source.p_z", Some(scenario.p_z))?;
    scenario.n_cut = e.count("source.n_cut", Some(scenario.n_cut as u64))? as usize;
    scenario.validate().or_else(|x| err(0, x.to_string()))?;

    let d = ChannelParams::default();
    let channel = ChannelParams {
        eta_det: e.real("channel.eta_det", Some(d.eta_det))?,
        p_d: e.real("channel.p_d", Some(d.p_d))?,
        alpha_db: e.real("channel.alpha_db", Some(d.alpha_db))?,
        delta_a: e.real("channel.delta_a", Some(d.delta_a))?,
        f_ec: e.real("channel.f_ec", Some(d.f_ec))?,
    };
    let g = OptimizerGrid::default();
    let grid = OptimizerGrid {
        mu_min: e.real("grid.mu_min", Some(g.mu_min))?,
        mu_max: e.real("grid.mu_max", Some(g.mu_max))?,
        mu_points: e.count("grid.mu_points", Some(g.mu_points as u64))? as usize,
        nu_min: e.real("grid.nu_min", Some(g.nu_min))?,
        nu_max_ratio: e.real("grid.nu_max_ratio", Some(g.nu_max_ratio))?,
        nu_points: e.count("grid.nu_points", Some(g.nu_points as u64))? as usize,
        refine_rounds: e.count("grid.refine_rounds", Some(g.refine_rounds as u64))? as usize,
        refine_points: e.count("grid.refine_points", Some(g.refine_points as u64))? as usize,
        shrink: e.real("grid.shrink", Some(g.shrink))?,
    };
    if grid.mu_min > grid.mu_max {
        return err(e.line("grid.mu_min").max(e.line("grid.mu_max")), "`grid.mu_min` exceeds `grid.mu_max`");
    }
    if grid.shrink <= 1.0 {
        return err(e.line("grid.shrink"), "`grid.shrink` must exceed 1");
    }
    grid.validate().or_else(|x| err(0, x.to_string()))?;

    let c = EngineConfig::default();
    let engine = EngineConfig {
        channel,
        grid,
        restarts: e.count("solver.restarts", Some(c.restarts as u64))? as usize,
        lp_rounds: e.count("solver.lp_rounds", Some(c.lp_rounds as u64))? as usize,
        sdp_tol: e.real("solver.sdp_tol", Some(c.sdp_tol))?,
        seed: e.count("seed", Some(c.seed))?,
    };
    let dg = DistanceGrid::default();
    let distances = DistanceGrid {
        start: e.real("distance.start", Some(dg.start))?,
        stop: e.real("distance.stop", Some(dg.stop))?,
        step: e.real("distance.step", Some(dg.step))?,
    };
    let plot = e.flag("plot", true)?;
    Ok(RunConfig { scenario, engine, distances, plot })
}

impl RunConfig {
    /// Every setting in effect, as `(key, value)` pairs that parse back to
    /// the same configuration.
    pub fn resolved(&self) -> Vec<(&'static str, String)> {
        let mut out: Vec<(&'static str, String)> = Vec::new();
        let mut put = |k: &'static str, v: String| out.push((k, v));
        match self.scenario.model {
            LeakageModel::GeneralEpsilon { epsilon, dist } => {
                put("model", "general_epsilon".into());
                put("epsilon", epsilon.to_string());
                match dist {
                    PhaseDistribution::UniformContinuous => put("phase.kind", "uniform".into()),
                    PhaseDistribution::DiscreteUniform { n } => {
                        put("phase.kind", "discrete".into());
                        put("phase.N", n.to_string());
                    }
                }
            }
            LeakageModel::CharacterizedTha(s) => {
                put("model", "characterized_tha".into());
                put("phase.N", s.phases.to_string());
                put("tha.I", s.leak.to_string());
            }
            LeakageModel::ExtraPm(s) => {
                put("model", "extra_pm".into());
                put("phase.N", s.phases.to_string());
                put("tha.I", s.leak.to_string());
                put("pm.I_l", s.leak_pm.to_string());
                if let Some(m) = s.cutoff {
                    put("pm.cutoff", m.to_string());
                }
            }
        }
        let ch = &self.engine.channel;
        put("channel.eta_det", ch.eta_det.to_string());
        put("channel.p_d", ch.p_d.to_string());
        put("channel.alpha_db", ch.alpha_db.to_string());
        put("channel.delta_a", ch.delta_a.to_string());
        put("channel.f_ec", ch.f_ec.to_string());
        let s = &self.scenario;
        put("source.omega", s.omega.to_string());
        put("source.p_mu", s.p_mu.to_string());
        put("source.p_z", s.p_z.to_string());
        put("source.n_cut", s.n_cut.to_string());
        let g = &self.engine.grid;
        put("grid.mu_min", g.mu_min.to_string());
        put("grid.mu_max", g.mu_max.to_string());
        put("grid.mu_points", g.mu_points.to_string());
        put("grid.nu_min", g.nu_min.to_string());
        put("grid.nu_max_ratio", g.nu_max_ratio.to_string());
        put("grid.nu_points", g.nu_points.to_string());
        put("grid.refine_rounds", g.refine_rounds.to_string());
        put("grid.refine_points", g.refine_points.to_string());
        put("grid.shrink", g.shrink.to_string());
        put("distance.start", self.distances.start.to_string());
        put("distance.stop", self.distances.stop.to_string());
        put("distance.step", self.distances.step.to_string());
        put("solver.restarts", self.engine.restarts.to_string());
        put("solver.lp_rounds", self.engine.lp_rounds.to_string());
        put("solver.sdp_tol", self.engine.sdp_tol.to_string());
        put("seed", self.engine.seed.to_string());
        put("plot", self.plot.to_string());
        out
    }

    pub fn to_text(&self) -> String {
        self.resolved().iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}
