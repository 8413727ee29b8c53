//! Experiment configuration: defaults, flat key=value files, and validation.
//!
//! A run is described by ~15 scalars. They default to the reference
//! experimental parameter set (`V_A = 10`, `β = 0.93`, `ε = 0.02`,
//! `η = 0.552`, `v_el = 0.015`, `f_rep = 1 MHz`, `m̄ = 0.01`, `m_L = 0.01`),
//! can be loaded from a flat `key=value` file, and are overridden by
//! command-line flags. Validation happens before any file is created.

use std::fmt;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::intermod::ModulationConfig;
use crate::security::{DetectorModel, LinkModel, ProtocolParams};
use crate::spectrum::ChannelPlan;

/// Which channel plan a run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlanSelection {
    Low,
    Medium,
    High,
    Custom(usize),
}

impl PlanSelection {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "low" => Ok(PlanSelection::Low),
            "medium" => Ok(PlanSelection::Medium),
            "high" => Ok(PlanSelection::High),
            other => {
                if let Some(n) = other.strip_prefix("custom:") {
                    let n: usize = n.parse().map_err(|_| {
                        Error::Config(format!("invalid channel count in plan `{other}`"))
                    })?;
                    if n == 0 {
                        return Err(Error::Config("custom plan needs at least 1 channel".into()));
                    }
                    Ok(PlanSelection::Custom(n))
                } else {
                    Err(Error::Config(format!(
                        "unknown plan `{other}` (expected low|medium|high|custom:N)"
                    )))
                }
            }
        }
    }

    pub fn to_plan(self) -> Result<ChannelPlan> {
        match self {
            PlanSelection::Low => Ok(ChannelPlan::low()),
            PlanSelection::Medium => Ok(ChannelPlan::medium()),
            PlanSelection::High => Ok(ChannelPlan::high()),
            PlanSelection::Custom(n) => ChannelPlan::custom(n),
        }
    }
}

impl fmt::Display for PlanSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlanSelection::Low => write!(f, "low"),
            PlanSelection::Medium => write!(f, "medium"),
            PlanSelection::High => write!(f, "high"),
            PlanSelection::Custom(n) => write!(f, "custom:{n}"),
        }
    }
}

/// The swept quantity of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Distance,
    MeanIndex,
}

impl SweepAxis {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "distance" => Ok(SweepAxis::Distance),
            "mbar" => Ok(SweepAxis::MeanIndex),
            other => Err(Error::Config(format!(
                "unknown sweep axis `{other}` (expected distance|mbar)"
            ))),
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SweepAxis::Distance => write!(f, "distance"),
            SweepAxis::MeanIndex => write!(f, "mbar"),
        }
    }
}

/// An inclusive arithmetic grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub from: f64,
    pub to: f64,
    pub step: f64,
}

impl Grid {
    pub fn new(from: f64, to: f64, step: f64) -> Result<Self> {
        if !from.is_finite() || !to.is_finite() || !(step > 0.0) || to < from {
            return Err(Error::Config(format!(
                "invalid sweep grid from={from} to={to} step={step}"
            )));
        }
        Ok(Grid { from, to, step })
    }

    /// Grid points `from, from+step, ...` up to `to` (inclusive, with a
    /// half-ulp-ish guard against step accumulation).
    pub fn values(&self) -> Vec<f64> {
        let count = ((self.to - self.from) / self.step + 1e-9).floor() as usize + 1;
        (0..count).map(|i| self.from + i as f64 * self.step).collect()
    }
}

/// Default distance grid in km.
pub const DEFAULT_DISTANCE_GRID: Grid = Grid {
    from: 0.0,
    to: 120.0,
    step: 1.0,
};

/// Default mean-index grid.
pub const DEFAULT_MBAR_GRID: Grid = Grid {
    from: 0.001,
    to: 0.02,
    step: 0.0005,
};

/// Fully resolved run description.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Selected plan; `None` means "the command's natural default"
    /// (the high-count plan for single-plan views, all three canonical
    /// plans for comparison views).
    pub plan: Option<PlanSelection>,
    pub mbar: f64,
    pub va: f64,
    pub mlo: f64,
    pub beta: f64,
    pub eps: f64,
    pub eta: f64,
    pub vel: f64,
    pub frep: f64,
    pub sweep: Option<SweepAxis>,
    pub from: Option<f64>,
    pub to: Option<f64>,
    pub step: Option<f64>,
    /// Fixed distance (km) for runs that sweep the mean index.
    pub distance: f64,
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub trials: u64,
    pub svg: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            plan: None,
            mbar: 0.01,
            va: 10.0,
            mlo: 0.01,
            beta: 0.93,
            eps: 0.02,
            eta: 0.552,
            vel: 0.015,
            frep: 1e6,
            sweep: None,
            from: None,
            to: None,
            step: None,
            distance: 50.0,
            out: None,
            seed: 42,
            trials: 1_000_000,
            svg: false,
        }
    }
}

impl ExperimentConfig {
    /// Applies a flat `key=value` file on top of the current values.
    /// Blank lines and `#` comments are skipped.
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        for (line_no, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!(
                    "{}:{}: expected key=value, got `{line}`",
                    path.display(),
                    line_no + 1
                ))
            })?;
            self.apply_kv(key.trim(), value.trim())?;
        }
        Ok(())
    }

    /// Applies one `key=value` pair; keys mirror the long flag names.
    pub fn apply_kv(&mut self, key: &str, value: &str) -> Result<()> {
        fn num(key: &str, value: &str) -> Result<f64> {
            value
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("`{key}` expects a number, got `{value}`")))
        }
        match key {
            "plan" => self.plan = Some(PlanSelection::parse(value)?),
            "mbar" => self.mbar = num(key, value)?,
            "va" => self.va = num(key, value)?,
            "mlo" => self.mlo = num(key, value)?,
            "beta" => self.beta = num(key, value)?,
            "eps" => self.eps = num(key, value)?,
            "eta" => self.eta = num(key, value)?,
            "vel" => self.vel = num(key, value)?,
            "frep" => self.frep = num(key, value)?,
            "sweep" => self.sweep = Some(SweepAxis::parse(value)?),
            "from" => self.from = Some(num(key, value)?),
            "to" => self.to = Some(num(key, value)?),
            "step" => self.step = Some(num(key, value)?),
            "distance" => self.distance = num(key, value)?,
            "out" => self.out = Some(PathBuf::from(value)),
            "seed" => {
                self.seed = value.parse().map_err(|_| {
                    Error::Config(format!("`seed` expects an integer, got `{value}`"))
                })?
            }
            "trials" => {
                self.trials = value.parse().map_err(|_| {
                    Error::Config(format!("`trials` expects an integer, got `{value}`"))
                })?
            }
            "svg" => {
                self.svg = match value {
                    "true" | "1" | "yes" => true,
                    "false" | "0" | "no" => false,
                    other => {
                        return Err(Error::Config(format!(
                            "`svg` expects true|false, got `{other}`"
                        )))
                    }
                }
            }
            other => return Err(Error::Config(format!("unknown config key `{other}`"))),
        }
        Ok(())
    }

    /// Range-checks every numeric field by building the domain objects.
    pub fn validate(&self) -> Result<()> {
        self.modulation()?;
        self.protocol()?;
        self.detector()?;
        self.link_at(self.distance)?;
        if let Some(sel) = self.plan {
            sel.to_plan()?;
        }
        if let (Some(from), Some(to), Some(step)) = (self.from, self.to, self.step) {
            Grid::new(from, to, step)?;
        }
        if self.step == Some(0.0) {
            return Err(Error::Config("sweep step must be positive".into()));
        }
        Ok(())
    }

    pub fn modulation(&self) -> Result<ModulationConfig> {
        ModulationConfig::new(self.mbar, self.va, self.mlo)
    }

    pub fn protocol(&self) -> Result<ProtocolParams> {
        ProtocolParams::new(self.va, self.beta, self.frep)
    }

    pub fn detector(&self) -> Result<DetectorModel> {
        DetectorModel::new(self.eta, self.vel)
    }

    pub fn link_at(&self, distance_km: f64) -> Result<LinkModel> {
        LinkModel::from_distance(distance_km, self.eps)
    }

    /// The sweep grid, with per-axis defaults filled in.
    pub fn grid(&self, axis: SweepAxis) -> Result<Grid> {
        let default = match axis {
            SweepAxis::Distance => DEFAULT_DISTANCE_GRID,
            SweepAxis::MeanIndex => DEFAULT_MBAR_GRID,
        };
        Grid::new(
            self.from.unwrap_or(default.from),
            self.to.unwrap_or(default.to),
            self.step.unwrap_or(default.step),
        )
    }

    /// Plans a comparison view runs over: the explicit selection, or the
    /// three canonical plans.
    pub fn comparison_plans(&self) -> Result<Vec<ChannelPlan>> {
        match self.plan {
            Some(sel) => Ok(vec![sel.to_plan()?]),
            None => Ok(vec![
                ChannelPlan::high(),
                ChannelPlan::medium(),
                ChannelPlan::low(),
            ]),
        }
    }

    /// Single plan for per-channel views; defaults to the high-count plan.
    pub fn single_plan(&self) -> Result<ChannelPlan> {
        self.plan.unwrap_or(PlanSelection::High).to_plan()
    }

    /// `# key=value` provenance lines recording the full resolved
    /// configuration; embedded at the top of every CSV.
    pub fn provenance(&self, command: &str) -> String {
        let plan = self
            .plan
            .map(|p| p.to_string())
            .unwrap_or_else(|| "default".into());
        let sweep = self
            .sweep
            .map(|s| s.to_string())
            .unwrap_or_else(|| "none".into());
        let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_else(|| "default".into());
        format!(
            "# subcarrier-cvqkd {command}\n\
             # plan={plan} mbar={} va={} mlo={} beta={} eps={} eta={} vel={} frep={}\n\
             # sweep={sweep} from={} to={} step={} distance={} seed={} trials={} svg={}\n",
            self.mbar,
            self.va,
            self.mlo,
            self.beta,
            self.eps,
            self.eta,
            self.vel,
            self.frep,
            opt(self.from),
            opt(self.to),
            opt(self.step),
            self.distance,
            self.seed,
            self.trials,
            self.svg,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plan_selection_round_trip() {
        for s in ["low", "medium", "high", "custom:7"] {
            assert_eq!(PlanSelection::parse(s).unwrap().to_string(), s);
        }
        assert!(PlanSelection::parse("custom:0").is_err());
        assert!(PlanSelection::parse("ultra").is_err());
        assert!(PlanSelection::parse("custom:x").is_err());
    }

    #[test]
    fn grid_values_inclusive() {
        let g = Grid::new(0.0, 10.0, 2.5).unwrap();
        assert_eq!(g.values(), vec![0.0, 2.5, 5.0, 7.5, 10.0]);
        let g = Grid::new(0.001, 0.02, 0.0005).unwrap();
        assert_eq!(g.values().len(), 39);
        assert!(Grid::new(1.0, 0.0, 0.5).is_err());
        assert!(Grid::new(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn kv_overrides() {
        let mut cfg = ExperimentConfig::default();
        cfg.apply_kv("mbar", "0.005").unwrap();
        cfg.apply_kv("plan", "custom:12").unwrap();
        cfg.apply_kv("sweep", "mbar").unwrap();
        cfg.apply_kv("svg", "true").unwrap();
        cfg.apply_kv("seed", "7").unwrap();
        assert_eq!(cfg.mbar, 0.005);
        assert_eq!(cfg.plan, Some(PlanSelection::Custom(12)));
        assert_eq!(cfg.sweep, Some(SweepAxis::MeanIndex));
        assert!(cfg.svg);
        assert_eq!(cfg.seed, 7);
        assert!(cfg.apply_kv("mbar", "abc").is_err());
        assert!(cfg.apply_kv("nope", "1").is_err());
    }

    #[test]
    fn validation_rejects_out_of_range() {
        let mut cfg = ExperimentConfig::default();
        cfg.eta = 1.5;
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::default();
        cfg.mbar = -0.01;
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::default();
        cfg.beta = 0.0;
        assert!(cfg.validate().is_err());
        assert!(ExperimentConfig::default().validate().is_ok());
    }

    #[test]
    fn file_parsing() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        std::fs::write(
            &path,
            "# comment\n\nplan=low\nmbar = 0.002\ntrials=50000\n",
        )
        .unwrap();
        let mut cfg = ExperimentConfig::default();
        cfg.apply_file(&path).unwrap();
        assert_eq!(cfg.plan, Some(PlanSelection::Low));
        assert_eq!(cfg.mbar, 0.002);
        assert_eq!(cfg.trials, 50_000);

        std::fs::write(&path, "mbar\n").unwrap();
        assert!(cfg.apply_file(&path).is_err());
        assert!(cfg.apply_file(&dir.path().join("missing.conf")).is_err());
    }
}
