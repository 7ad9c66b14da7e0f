//! Flat `section.key = value` run configuration.

use std::collections::BTreeSet;
use std::fmt;
use std::path::PathBuf;

use sha2::{Digest, Sha256};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Theorem1,
    Theorem2,
    Ode,
    Oracle,
    Sweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Theorem1 => "theorem1",
            Command::Theorem2 => "theorem2",
            Command::Ode => "ode",
            Command::Oracle => "oracle",
            Command::Sweep => "sweep",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DataFamily {
    ThetaStar,
    Thm1,
    Thm2,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DtSetting {
    Auto,
    Fixed(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum OdeCheck {
    Trapping,
    Decay,
    Reciprocal,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Sequence {
    /// `a_j = r^j`.
    Geometric(f64),
    /// `a_j = j^{-p}`.
    Power(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FrameChoice {
    A1,
    A2,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SweepGrid {
    pub delta: Vec<f64>,
    pub epsilon: Vec<f64>,
    pub gamma: Vec<f64>,
    pub n: Vec<usize>,
}

impl SweepGrid {
    pub fn is_empty(&self) -> bool {
        self.delta.is_empty() && self.epsilon.is_empty() && self.gamma.is_empty() && self.n.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub n: usize,
    pub gamma: f64,
    pub dt: DtSetting,
    pub t_end: f64,
    pub checkpoint_interval: f64,
    pub time_scale: f64,
    pub family: DataFamily,
    pub delta: f64,
    pub epsilon: f64,
    pub blend_width: f64,
    pub snapshots: bool,
    pub pgm: bool,
    pub frame: FrameChoice,
    pub box_eps: f64,
    pub helper_c: Option<f64>,
    pub growth_from: f64,
    pub fit_window: (f64, f64),
    pub ode_checks: Vec<OdeCheck>,
    pub ode_eps: f64,
    pub ode_samples: usize,
    pub ode_random_draws: usize,
    pub ode_n_legs: usize,
    pub ode_draws: usize,
    pub ode_bound: f64,
    pub ode_beta0: f64,
    pub ode_sequence: Sequence,
    pub ode_n_max: usize,
    pub sweep: SweepGrid,
    pub sweep_workers: usize,
    pub seed: u64,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n: 128,
            gamma: 1.0,
            dt: DtSetting::Auto,
            t_end: 1.0,
            checkpoint_interval: 0.5,
            time_scale: 1.0,
            family: DataFamily::ThetaStar,
            delta: 0.05,
            epsilon: 0.05,
            blend_width: 0.1,
            snapshots: false,
            pgm: false,
            frame: FrameChoice::A1,
            box_eps: 0.01,
            helper_c: None,
            growth_from: 0.5,
            fit_window: (1.0, f64::INFINITY),
            ode_checks: vec![OdeCheck::Trapping, OdeCheck::Decay, OdeCheck::Reciprocal],
            ode_eps: 0.01,
            ode_samples: 1000,
            ode_random_draws: 5,
            ode_n_legs: 10,
            ode_draws: 20,
            ode_bound: 0.009,
            ode_beta0: 0.2,
            ode_sequence: Sequence::Geometric(0.5),
            ode_n_max: 20,
            sweep: SweepGrid::default(),
            sweep_workers: 1,
            seed: 0,
            output_dir: PathBuf::from("runs"),
        }
    }
}

/// Every accepted key, in serialization order.
pub const KEYS: &[&str] = &[
    "sim.N",
    "sim.gamma",
    "sim.dt",
    "sim.t_end",
    "sim.checkpoint_interval",
    "sim.time_scale",
    "data.family",
    "data.delta",
    "data.epsilon",
    "data.blend_width",
    "diag.snapshots",
    "diag.pgm",
    "tracer.frame",
    "tracer.box_eps",
    "thm2.C",
    "thm2.growth_from",
    "thm2.fit_start",
    "thm2.fit_end",
    "ode.checks",
    "ode.eps",
    "ode.samples",
    "ode.random_draws",
    "ode.n_legs",
    "ode.draws",
    "ode.bound",
    "ode.beta0",
    "ode.sequence",
    "ode.n_max",
    "sweep.delta",
    "sweep.epsilon",
    "sweep.gamma",
    "sweep.N",
    "sweep.workers",
    "run.seed",
    "run.output_dir",
];

/// Keys that do not affect results and are left out of the run hash.
const UNHASHED: &[&str] = &["run.output_dir", "sweep.workers"];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

fn num(key: &str, v: &str) -> Result<f64, ConfigError> {
    match v.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => err(format!("{key}: expected a finite number, got '{v}'")),
    }
}

fn int<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, ConfigError> {
    v.parse::<T>().or_else(|_| err(format!("{key}: expected a nonnegative integer, got '{v}'")))
}

fn boolean(key: &str, v: &str) -> Result<bool, ConfigError> {
    match v {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => err(format!("{key}: expected true or false, got '{v}'")),
    }
}

fn list<T>(key: &str, v: &str, f: impl Fn(&str, &str) -> Result<T, ConfigError>) -> Result<Vec<T>, ConfigError> {
    if v.is_empty() {
        return Ok(Vec::new());
    }
    v.split(',').map(|x| f(key, x.trim())).collect()
}

fn join<T: fmt::Display>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    /// Parses configuration text. Unknown or repeated keys are errors.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        let mut seen = BTreeSet::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return err(format!("line {}: expected key = value", lineno + 1));
            };
            let (k, v) = (k.trim(), v.trim());
            if !seen.insert(k.to_string()) {
                return err(format!("line {}: duplicate key {k}", lineno + 1));
            }
            cfg.set(k, v).map_err(|e| ConfigError(format!("line {}: {}", lineno + 1, e.0)))?;
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, v: &str) -> Result<(), ConfigError> {
        match key {
            "sim.N" => self.n = int(key, v)?,
            "sim.gamma" => self.gamma = num(key, v)?,
            "sim.dt" => {
                self.dt = if v == "auto" { DtSetting::Auto } else { DtSetting::Fixed(num(key, v)?) }
            }
            "sim.t_end" => self.t_end = num(key, v)?,
            "sim.checkpoint_interval" => self.checkpoint_interval = num(key, v)?,
            "sim.time_scale" => self.time_scale = num(key, v)?,
            "data.family" => {
                self.family = match v {
                    "theta_star" => DataFamily::ThetaStar,
                    "thm1" => DataFamily::Thm1,
                    "thm2" => DataFamily::Thm2,
                    _ => return err(format!("{key}: expected theta_star, thm1 or thm2, got '{v}'")),
                }
            }
            "data.delta" => self.delta = num(key, v)?,
            "data.epsilon" => self.epsilon = num(key, v)?,
            "data.blend_width" => self.blend_width = num(key, v)?,
            "diag.snapshots" => self.snapshots = boolean(key, v)?,
            "diag.pgm" => self.pgm = boolean(key, v)?,
            "tracer.frame" => {
                self.frame = match v {
                    "a1" => FrameChoice::A1,
                    "a2" => FrameChoice::A2,
                    _ => return err(format!("{key}: expected a1 or a2, got '{v}'")),
                }
            }
            "tracer.box_eps" => self.box_eps = num(key, v)?,
            "thm2.C" => self.helper_c = if v == "none" { None } else { Some(num(key, v)?) },
            "thm2.growth_from" => self.growth_from = num(key, v)?,
            "thm2.fit_start" => self.fit_window.0 = num(key, v)?,
            "thm2.fit_end" => {
                self.fit_window.1 = if v == "end" { f64::INFINITY } else { num(key, v)? }
            }
            "ode.checks" => {
                let mut c = list(key, v, |k, x| match x {
                    "trapping" => Ok(OdeCheck::Trapping),
                    "decay" => Ok(OdeCheck::Decay),
                    "reciprocal" => Ok(OdeCheck::Reciprocal),
                    _ => err(format!("{k}: unknown check '{x}' (trapping, decay, reciprocal)")),
                })?;
                c.sort();
                c.dedup();
                self.ode_checks = c;
            }
            "ode.eps" => self.ode_eps = num(key, v)?,
            "ode.samples" => self.ode_samples = int(key, v)?,
            "ode.random_draws" => self.ode_random_draws = int(key, v)?,
            "ode.n_legs" => self.ode_n_legs = int(key, v)?,
            "ode.draws" => self.ode_draws = int(key, v)?,
            "ode.bound" => self.ode_bound = num(key, v)?,
            "ode.beta0" => self.ode_beta0 = num(key, v)?,
            "ode.sequence" => {
                let (kind, p) = v.split_once(':').unwrap_or((v, ""));
                self.ode_sequence = match kind {
                    "geometric" => Sequence::Geometric(if p.is_empty() { 0.5 } else { num(key, p)? }),
                    "power" => Sequence::Power(if p.is_empty() { 2.0 } else { num(key, p)? }),
                    _ => return err(format!("{key}: expected geometric[:r] or power[:p], got '{v}'")),
                }
            }
            "ode.n_max" => self.ode_n_max = int(key, v)?,
            "sweep.delta" => self.sweep.delta = list(key, v, num)?,
            "sweep.epsilon" => self.sweep.epsilon = list(key, v, num)?,
            "sweep.gamma" => self.sweep.gamma = list(key, v, num)?,
            "sweep.N" => self.sweep.n = list(key, v, int)?,
            "sweep.workers" => self.sweep_workers = int(key, v)?,
            "run.seed" => self.seed = int(key, v)?,
            "run.output_dir" => self.output_dir = PathBuf::from(v),
            _ => return err(format!("unknown key {key}")),
        }
        Ok(())
    }

    fn value_of(&self, key: &str) -> String {
        match key {
            "sim.N" => self.n.to_string(),
            "sim.gamma" => self.gamma.to_string(),
            "sim.dt" => match self.dt {
                DtSetting::Auto => "auto".into(),
                DtSetting::Fixed(d) => d.to_string(),
            },
            "sim.t_end" => self.t_end.to_string(),
            "sim.checkpoint_interval" => self.checkpoint_interval.to_string(),
            "sim.time_scale" => self.time_scale.to_string(),
            "data.family" => match self.family {
                DataFamily::ThetaStar => "theta_star",
                DataFamily::Thm1 => "thm1",
                DataFamily::Thm2 => "thm2",
            }
            .into(),
            "data.delta" => self.delta.to_string(),
            "data.epsilon" => self.epsilon.to_string(),
            "data.blend_width" => self.blend_width.to_string(),
            "diag.snapshots" => self.snapshots.to_string(),
            "diag.pgm" => self.pgm.to_string(),
            "tracer.frame" => match self.frame {
                FrameChoice::A1 => "a1",
                FrameChoice::A2 => "a2",
            }
            .into(),
            "tracer.box_eps" => self.box_eps.to_string(),
            "thm2.C" => self.helper_c.map_or("none".into(), |c| c.to_string()),
            "thm2.growth_from" => self.growth_from.to_string(),
            "thm2.fit_start" => self.fit_window.0.to_string(),
            "thm2.fit_end" => {
                if self.fit_window.1.is_infinite() {
                    "end".into()
                } else {
                    self.fit_window.1.to_string()
                }
            }
            "ode.checks" => self
                .ode_checks
                .iter()
                .map(|c| match c {
                    OdeCheck::Trapping => "trapping",
                    OdeCheck::Decay => "decay",
                    OdeCheck::Reciprocal => "reciprocal",
                })
                .collect::<Vec<_>>()
                .join(","),
            "ode.eps" => self.ode_eps.to_string(),
            "ode.samples" => self.ode_samples.to_string(),
            "ode.random_draws" => self.ode_random_draws.to_string(),
            "ode.n_legs" => self.ode_n_legs.to_string(),
            "ode.draws" => self.ode_draws.to_string(),
            "ode.bound" => self.ode_bound.to_string(),
            "ode.beta0" => self.ode_beta0.to_string(),
            "ode.sequence" => match self.ode_sequence {
                Sequence::Geometric(r) => format!("geometric:{r}"),
                Sequence::Power(p) => format!("power:{p}"),
            },
            "ode.n_max" => self.ode_n_max.to_string(),
            "sweep.delta" => join(&self.sweep.delta),
            "sweep.epsilon" => join(&self.sweep.epsilon),
            "sweep.gamma" => join(&self.sweep.gamma),
            "sweep.N" => join(&self.sweep.n),
            "sweep.workers" => self.sweep_workers.to_string(),
            "run.seed" => self.seed.to_string(),
            "run.output_dir" => self.output_dir.display().to_string(),
            _ => unreachable!("unknown key {key}"),
        }
    }

    /// Every key with its value, one `key = value` line each.
    pub fn to_text(&self) -> String {
        KEYS.iter().map(|k| format!("{k} = {}\n", self.value_of(k))).collect()
    }

    /// SHA-256 over the command name and every result-affecting key.
    pub fn hash(&self, command: Command) -> String {
        let mut h = Sha256::new();
        h.update(format!("command = {}\n", command.name()));
        for k in KEYS.iter().filter(|k| !UNHASHED.contains(k)) {
            h.update(format!("{k} = {}\n", self.value_of(k)));
        }
        hex::encode(h.finalize())
    }

    pub fn flags(&self) -> Vec<String> {
        let mut f = Vec::new();
        let gammas = std::iter::once(self.gamma).chain(self.sweep.gamma.iter().copied());
        if gammas.into_iter().any(|g| g < 1.0) {
            f.push("gamma<1: global existence unknown".into());
        }
        if self.time_scale != 1.0 {
            f.push(format!("time_scale={}: equivalent rescaled run", self.time_scale));
        }
        f
    }

    /// Range checks for the parts of the configuration `command` uses.
    pub fn validate(&self, command: Command) -> Result<(), ConfigError> {
        let sim = matches!(command, Command::Simulate | Command::Theorem1 | Command::Theorem2 | Command::Sweep);
        if sim {
            self.validate_sim()?;
        }
        match command {
            Command::Theorem1 => {
                if self.family != DataFamily::Thm1 {
                    return err("theorem1 needs data.family = thm1");
                }
                if !(self.box_eps > 0.0 && self.box_eps <= 0.02) {
                    return err(format!("tracer.box_eps must lie in (0, 0.02], got {}", self.box_eps));
                }
                let per_unit = 1.0 / self.checkpoint_interval;
                if (per_unit - per_unit.round()).abs() > 1e-9 {
                    return err("theorem1 needs a checkpoint at every integer time: 1 / checkpoint_interval must be an integer");
                }
            }
            Command::Theorem2 => {
                if self.family != DataFamily::Thm2 {
                    return err("theorem2 needs data.family = thm2");
                }
                if let Some(c) = self.helper_c {
                    if !(c > 0.0) {
                        return err(format!("thm2.C must be positive, got {c}"));
                    }
                }
                if !(self.fit_window.0 >= 0.0 && self.fit_window.1 > self.fit_window.0) {
                    return err("thm2.fit_start must be nonnegative and below thm2.fit_end");
                }
                if !(self.growth_from >= 0.0 && self.growth_from < self.t_end) {
                    return err("thm2.growth_from must lie in [0, t_end)");
                }
            }
            Command::Ode => self.validate_ode()?,
            Command::Sweep => {
                if self.sweep.is_empty() {
                    return err("sweep needs at least one nonempty sweep.* list");
                }
                for &n in &self.sweep.n {
                    check_n(n)?;
                }
                for &g in &self.sweep.gamma {
                    check_gamma(g)?;
                }
                for &d in &self.sweep.delta {
                    check_delta(d)?;
                }
                for &e in &self.sweep.epsilon {
                    check_epsilon(e)?;
                }
                if self.sweep_workers == 0 {
                    return err("sweep.workers must be at least 1");
                }
            }
            Command::Simulate | Command::Oracle => {}
        }
        Ok(())
    }

    fn validate_sim(&self) -> Result<(), ConfigError> {
        check_n(self.n)?;
        check_gamma(self.gamma)?;
        if let DtSetting::Fixed(d) = self.dt {
            if !(d > 0.0 && d <= 1.0) {
                return err(format!("sim.dt must be auto or lie in (0, 1], got {d}"));
            }
        }
        if !(self.t_end > 0.0 && self.t_end <= 1e4) {
            return err(format!("sim.t_end must lie in (0, 1e4], got {}", self.t_end));
        }
        if !(self.checkpoint_interval > 0.0 && self.checkpoint_interval <= self.t_end) {
            return err("sim.checkpoint_interval must lie in (0, t_end]");
        }
        if !(self.time_scale > 0.0 && self.time_scale <= 1e3) {
            return err(format!("sim.time_scale must lie in (0, 1e3], got {}", self.time_scale));
        }
        match self.family {
            DataFamily::Thm1 => check_delta(self.delta)?,
            DataFamily::Thm2 => check_epsilon(self.epsilon)?,
            DataFamily::ThetaStar => {}
        }
        if !(self.blend_width > 0.0 && self.blend_width < 1.0) {
            return err(format!("data.blend_width must lie in (0, 1), got {}", self.blend_width));
        }
        Ok(())
    }

    fn validate_ode(&self) -> Result<(), ConfigError> {
        if self.ode_checks.is_empty() {
            return err("ode.checks selects nothing");
        }
        if !(self.ode_eps > 0.0 && self.ode_eps <= 0.01) {
            return err(format!("ode.eps must lie in (0, 0.01], got {}", self.ode_eps));
        }
        if self.ode_samples < 100 {
            return err(format!("ode.samples must be at least 100, got {}", self.ode_samples));
        }
        if self.ode_n_legs < 5 {
            return err(format!("ode.n_legs must be at least 5, got {}", self.ode_n_legs));
        }
        if !(self.ode_bound >= 0.0 && self.ode_bound < 0.01) {
            return err(format!("ode.bound must lie in [0, 0.01), got {}", self.ode_bound));
        }
        if !(self.ode_beta0 > 0.0 && self.ode_beta0 <= 1.0) {
            return err(format!("ode.beta0 must lie in (0, 1], got {}", self.ode_beta0));
        }
        if !(1..=1000).contains(&self.ode_n_max) {
            return err(format!("ode.n_max must lie in [1, 1000], got {}", self.ode_n_max));
        }
        match self.ode_sequence {
            Sequence::Geometric(r) if !(r > 0.0 && r < 1.0) => err(format!("geometric ratio must lie in (0, 1), got {r}")),
            Sequence::Power(p) if !(p > 1.0 && p <= 50.0) => err(format!("power exponent must lie in (1, 50], got {p}")),
            _ => Ok(()),
        }
    }
}

fn check_n(n: usize) -> Result<(), ConfigError> {
    if !(n.is_power_of_two() && (8..=4096).contains(&n)) {
        return err(format!("sim.N must be a power of two in [8, 4096], got {n}"));
    }
    Ok(())
}

fn check_gamma(g: f64) -> Result<(), ConfigError> {
    if !(g > 0.0 && g <= 2.0) {
        return err(format!("sim.gamma must lie in (0, 2], got {g}"));
    }
    Ok(())
}

fn check_delta(d: f64) -> Result<(), ConfigError> {
    if !(d > 0.0 && d <= 0.1) {
        return err(format!("data.delta must lie in (0, 0.1], got {d}"));
    }
    Ok(())
}

fn check_epsilon(e: f64) -> Result<(), ConfigError> {
    if !(e > 0.0 && e <= 0.1) {
        return err(format!("data.epsilon must lie in (0, 0.1], got {e}"));
    }
    Ok(())
}
