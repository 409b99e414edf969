//! Experiment configuration: JSON with documented defaults for every key.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use holonomy_core::adiabatic::Ramp;
use holonomy_core::holonomy::Plane;
use serde::{Deserialize, Serialize};

/// Environment variable naming the directory searched for `holonomy.json`.
pub const CONFIG_DIR_ENV: &str = "HOLONOMY_CONFIG_DIR";
pub const CONFIG_FILE: &str = "holonomy.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Directory receiving CSV and JSON outputs.
    pub output_dir: PathBuf,
    /// Trap frequency; all outputs are in units of it.
    pub nu: f64,
    pub verify: VerifyConfig,
    pub gate: GateConfig,
    pub adiabatic: AdiabaticConfig,
    pub resilience: ResilienceConfig,
    pub measure: MeasureConfig,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            output_dir: PathBuf::from("holonomy-out"),
            nu: 1.0,
            verify: VerifyConfig::default(),
            gate: GateConfig::default(),
            adiabatic: AdiabaticConfig::default(),
            resilience: ResilienceConfig::default(),
            measure: MeasureConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    /// Fock levels for the spectrum check.
    pub spectrum_n_max: usize,
    /// Highest excitation compared with the dressed-state formula.
    pub spectrum_levels: usize,
    /// Random points per manifold for the connection check.
    pub points: usize,
    pub seed: u64,
    /// Finite-difference step of the connection oracle.
    pub h: f64,
    pub r1_cap: f64,
    pub alpha_cap: f64,
    /// `r1` cap for checks that only use closed forms.
    pub r1_cap_analytic: f64,
    pub r2_cap: f64,
    pub connection_tol: f64,
    /// Side of the plaquette in the curvature check.
    pub plaquette: f64,
    pub curvature_rel_tol: f64,
    pub transport_steps: usize,
    pub area_law_tol: f64,
    pub ledger_file: String,
    pub report_file: String,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            spectrum_n_max: 80,
            spectrum_levels: 30,
            points: 100,
            seed: 7,
            h: 1e-4,
            r1_cap: 1.0,
            alpha_cap: 1.0,
            r1_cap_analytic: 3.0,
            r2_cap: 0.8,
            connection_tol: 1e-5,
            plaquette: 1e-2,
            curvature_rel_tol: 0.05,
            transport_steps: 400,
            area_law_tol: 1e-5,
            ledger_file: "conventions.json".into(),
            report_file: "verify.json".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    #[default]
    Analytic,
    Numeric,
}

/// Axis-aligned rectangle `[u0, u1] × [v0, v1]` on a tagged plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rectangle {
    pub plane: Plane,
    pub u: [f64; 2],
    pub v: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GateConfig {
    pub plane: Option<Plane>,
    pub sigma: Option<f64>,
    pub loop_file: Option<PathBuf>,
    pub rectangle: Option<Rectangle>,
    pub steps: usize,
    pub closed_form: bool,
    pub source: Source,
    /// Transport steps of the calibration probes.
    pub calibration_steps: usize,
}

impl Default for GateConfig {
    fn default() -> Self {
        GateConfig {
            plane: None,
            sigma: None,
            loop_file: None,
            rectangle: None,
            steps: 2000,
            closed_form: false,
            source: Source::Analytic,
            calibration_steps: 400,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdiabaticConfig {
    pub rectangle: Rectangle,
    pub loop_file: Option<PathBuf>,
    /// Run the constant loop at the origin instead.
    pub static_loop: bool,
    pub times: Vec<f64>,
    pub ramp: Ramp,
    /// Fock levels for one-qubit loops.
    pub n_max: usize,
    /// Fock levels per mode for two-qubit loops.
    pub n_max_pair: usize,
    pub leakage_budget: f64,
    pub max_slope: f64,
    pub csv_file: String,
}

impl Default for AdiabaticConfig {
    fn default() -> Self {
        AdiabaticConfig {
            rectangle: Rectangle { plane: Plane::CI, u: [0.0, 0.5], v: [0.0, 0.8] },
            loop_file: None,
            static_loop: false,
            times: vec![100.0, 200.0, 400.0],
            ramp: Ramp::Smooth,
            n_max: 150,
            n_max_pair: 25,
            leakage_budget: 0.02,
            max_slope: -0.8,
            csv_file: "adiabatic.csv".into(),
        }
    }
}

/// `n` points evenly covering `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        let mut v = holonomy_core::resilience::linspace(self.lo, self.hi, self.n);
        // exact zero where the grid crosses it
        let tol = 1e-12 * (self.hi - self.lo).abs();
        v.iter_mut().filter(|x| x.abs() < tol).for_each(|x| *x = 0.0);
        v
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResilienceConfig {
    pub x: f64,
    pub r1: f64,
    pub eps1_grid: Grid,
    pub eps2_grid: Grid,
    pub edges: Vec<f64>,
    pub sigma1: f64,
    pub sigma2: f64,
    pub trials: usize,
    pub seed: u64,
    /// Full transport for every trial instead of the calibrated area law.
    pub slow: bool,
    pub slow_steps: usize,
    pub surface_file: String,
    pub monte_carlo_file: String,
}

impl Default for ResilienceConfig {
    fn default() -> Self {
        let grid = Grid { lo: -0.05, hi: 0.05, n: 21 };
        ResilienceConfig {
            x: 1.0,
            r1: 2.0,
            eps1_grid: grid,
            eps2_grid: grid,
            edges: vec![0.5, 1.0, 1.5, 2.0],
            sigma1: 0.0,
            sigma2: 0.01,
            trials: 500,
            seed: 2024,
            slow: false,
            slow_steps: 2000,
            surface_file: "sensitivity.csv".into(),
            monte_carlo_file: "monte_carlo.csv".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeasureConfig {
    /// `logical0`, `logical1` or `superposition(a, b)`.
    pub state: String,
    pub n_max: usize,
}

impl Default for MeasureConfig {
    fn default() -> Self {
        MeasureConfig { state: "logical1".into(), n_max: 12 }
    }
}

impl Config {
    pub fn from_file(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let cfg: Config =
            serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Explicit file, else `$HOLONOMY_CONFIG_DIR/holonomy.json` when present, else defaults.
    pub fn load(explicit: Option<&Path>) -> anyhow::Result<Self> {
        if let Some(p) = explicit {
            return Self::from_file(p);
        }
        if let Some(dir) = std::env::var_os(CONFIG_DIR_ENV) {
            let p = Path::new(&dir).join(CONFIG_FILE);
            if p.exists() {
                return Self::from_file(&p);
            }
        }
        Ok(Config::default())
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if !(self.nu > 0.0 && self.nu.is_finite()) {
            bail!("nu must be positive, got {}", self.nu);
        }
        if self.verify.points == 0 {
            bail!("verify.points must be at least 1");
        }
        if self.adiabatic.times.iter().any(|t| !t.is_finite() || *t <= 0.0) {
            bail!("adiabatic.times must be positive");
        }
        for (name, g) in [("eps1_grid", &self.resilience.eps1_grid), ("eps2_grid", &self.resilience.eps2_grid)] {
            if g.n == 0 || !(g.lo.is_finite() && g.hi.is_finite()) || g.lo > g.hi {
                bail!("resilience.{name} needs n >= 1 and lo <= hi");
            }
        }
        if self.resilience.sigma1 < 0.0 || self.resilience.sigma2 < 0.0 {
            bail!("resilience noise widths must be non-negative");
        }
        Ok(())
    }

    pub fn output_path(&self, file: &str) -> PathBuf {
        self.output_dir.join(file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}
