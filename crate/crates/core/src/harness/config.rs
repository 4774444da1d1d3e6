//! Experiment configuration, read from TOML.
//!
//! Every section and key is optional; omitted values take the defaults
//! below. Unknown keys are rejected.
//!
//! ```toml
//! [experiment]
//! modes = ["unconstrained", "max_power_backoff", "strict_per_rru"]
//! snr_db = [0, 5, 10, 15, 20, 25, 30]
//! trials = 200
//! seed = 1
//! threads = 0            # 0: one worker per core
//! output = "results.csv"
//!
//! [shape]                # (Nt x Nr, Ns)^K with N_RRU RRUs per transmitter;
//! users = 3              # omitted: (4x6,2)^3 with 4 RRUs for Rayleigh
//!                        # sweeps, (15x5,2)^7 with 5 RRUs for cell runs
//! tx_antennas = 4
//! rx_antennas = 6
//! streams = 2
//! rrus = 4
//!
//! [solver]
//! tol = 1e-8             # stop when leakage / P <= tol
//! max_iters = 5000
//!
//! [backoff]
//! exponent = "tx_antennas"   # or "rrus"
//! convention = "complex"     # or "real"
//! auto_select = false
//! oracle_draws = 100000
//!
//! [cell]
//! cell_radius_m = 300.0
//! total_power_dbm = 46.0
//! noise_power_dbm = -106.0
//! distance_bins_m = [0, 50, 100, 150, 200, 240, 300]
//! drops_per_bin = 100
//! grid_step_m = 50.0
//! drops_per_point = 20
//! algorithms = ["colocated_ia", "das_max_power_backoff", "das_strict_per_rru", "rru_selection"]
//! colocated_per_antenna = false
//! solver_tol = 1e-6
//! solver_max_iters = 1000
//!
//! [cell.propagation]
//! pathloss_exponent = 3.7
//! reference_loss_db = 38.5
//! shadow_std_db = 8.0
//!
//! [properness]
//! users = [3, 4]
//! tx_antennas = [1, 2, 3, 4, 5, 6, 7, 8]
//! rx_antennas = [1, 2, 3, 4, 5, 6, 7, 8]
//! streams = [1, 2]
//! rrus = []              # explicit RRU counts, in addition to per-antenna
//! per_antenna = true
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::alignment::SolverOptions;
use crate::channel::{Propagation, SystemShape};
use crate::error::{Error, Result};
use crate::metrics::{ChiSquareConvention, ExponentVariant};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintMode {
    Unconstrained,
    MaxPowerBackoff,
    StrictPerRru,
}

impl ConstraintMode {
    pub fn label(&self) -> &'static str {
        match self {
            ConstraintMode::Unconstrained => "unconstrained",
            ConstraintMode::MaxPowerBackoff => "max_power_backoff",
            ConstraintMode::StrictPerRru => "strict_per_rru",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelModel {
    Rayleigh,
    Das,
}

/// Transmission schemes compared in the cellular experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellAlgorithm {
    /// All antennas at the cell centre, total power constraint only.
    ColocatedIa,
    DasMaxPowerBackoff,
    DasStrictPerRru,
    RruSelection,
}

impl CellAlgorithm {
    pub const ALL: [CellAlgorithm; 4] = [
        CellAlgorithm::ColocatedIa,
        CellAlgorithm::DasMaxPowerBackoff,
        CellAlgorithm::DasStrictPerRru,
        CellAlgorithm::RruSelection,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            CellAlgorithm::ColocatedIa => "colocated_ia",
            CellAlgorithm::DasMaxPowerBackoff => "das_max_power_backoff",
            CellAlgorithm::DasStrictPerRru => "das_strict_per_rru",
            CellAlgorithm::RruSelection => "rru_selection",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentSection {
    /// Implied by the experiment when omitted.
    pub channel_model: Option<ChannelModel>,
    pub modes: Vec<ConstraintMode>,
    pub snr_db: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub threads: usize,
    pub output: Option<PathBuf>,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        Self {
            channel_model: None,
            modes: vec![
                ConstraintMode::Unconstrained,
                ConstraintMode::MaxPowerBackoff,
                ConstraintMode::StrictPerRru,
            ],
            snr_db: (0..=6).map(|i| 5.0 * i as f64).collect(),
            trials: 200,
            seed: 1,
            threads: 0,
            output: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ShapeSection {
    pub users: usize,
    pub tx_antennas: usize,
    pub rx_antennas: usize,
    pub streams: usize,
    pub rrus: usize,
}

impl ShapeSection {
    pub const RAYLEIGH_DEFAULT: ShapeSection =
        ShapeSection { users: 3, tx_antennas: 4, rx_antennas: 6, streams: 2, rrus: 4 };
    pub const CELL_DEFAULT: ShapeSection =
        ShapeSection { users: 7, tx_antennas: 15, rx_antennas: 5, streams: 2, rrus: 5 };
}

impl Default for ShapeSection {
    fn default() -> Self {
        Self::RAYLEIGH_DEFAULT
    }
}

impl ShapeSection {
    pub fn build(&self) -> Result<SystemShape> {
        SystemShape::new(self.users, self.tx_antennas, self.rx_antennas, self.streams, self.rrus)
            .map_err(|e| Error::Config(e.to_string()))
    }
}

impl From<SystemShape> for ShapeSection {
    fn from(s: SystemShape) -> Self {
        Self {
            users: s.users(),
            tx_antennas: s.tx_antennas(),
            rx_antennas: s.rx_antennas(),
            streams: s.streams(),
            rrus: s.rrus(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for SolverSection {
    fn default() -> Self {
        let d = SolverOptions::default();
        Self { tol: d.tol, max_iters: d.max_iters }
    }
}

impl SolverSection {
    pub fn options(&self) -> SolverOptions {
        SolverOptions { tol: self.tol, max_iters: self.max_iters }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExponentSetting {
    TxAntennas,
    Rrus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConventionSetting {
    Complex,
    Real,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BackoffSection {
    pub exponent: ExponentSetting,
    pub convention: ConventionSetting,
    /// Pick the variant whose predicted loss best matches a Monte Carlo
    /// sample of Haar back-off factors.
    pub auto_select: bool,
    pub oracle_draws: usize,
}

impl Default for BackoffSection {
    fn default() -> Self {
        Self {
            exponent: ExponentSetting::TxAntennas,
            convention: ConventionSetting::Complex,
            auto_select: false,
            oracle_draws: 100_000,
        }
    }
}

impl BackoffSection {
    pub fn variant(&self) -> (ExponentVariant, ChiSquareConvention) {
        let e = match self.exponent {
            ExponentSetting::TxAntennas => ExponentVariant::TxAntennas,
            ExponentSetting::Rrus => ExponentVariant::Rrus,
        };
        let c = match self.convention {
            ConventionSetting::Complex => ChiSquareConvention::Complex,
            ConventionSetting::Real => ChiSquareConvention::Real,
        };
        (e, c)
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CellSection {
    pub cell_radius_m: f64,
    pub total_power_dbm: f64,
    pub noise_power_dbm: f64,
    pub distance_bins_m: Vec<f64>,
    pub drops_per_bin: usize,
    pub grid_step_m: f64,
    /// Drops per position of the cell map.
    pub drops_per_point: usize,
    pub algorithms: Vec<CellAlgorithm>,
    /// Apply per-antenna back-off to the co-located baseline.
    pub colocated_per_antenna: bool,
    /// Leakage tolerance in noise-normalised units.
    pub solver_tol: f64,
    pub solver_max_iters: usize,
    pub propagation: Propagation,
}

impl Default for CellSection {
    fn default() -> Self {
        Self {
            cell_radius_m: 300.0,
            total_power_dbm: 46.0,
            noise_power_dbm: -106.0,
            distance_bins_m: vec![0.0, 50.0, 100.0, 150.0, 200.0, 240.0, 300.0],
            drops_per_bin: 100,
            grid_step_m: 50.0,
            drops_per_point: 20,
            algorithms: CellAlgorithm::ALL.to_vec(),
            colocated_per_antenna: false,
            solver_tol: 1e-6,
            solver_max_iters: 1000,
            propagation: Propagation::default(),
        }
    }
}

impl CellSection {
    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions { tol: self.solver_tol, max_iters: self.solver_max_iters }
    }

    /// `P / σ²` as a linear ratio.
    pub fn snr_linear(&self) -> f64 {
        10f64.powf((self.total_power_dbm - self.noise_power_dbm) / 10.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PropernessSection {
    pub users: Vec<usize>,
    pub tx_antennas: Vec<usize>,
    pub rx_antennas: Vec<usize>,
    pub streams: Vec<usize>,
    pub rrus: Vec<usize>,
    pub per_antenna: bool,
}

impl Default for PropernessSection {
    fn default() -> Self {
        Self {
            users: vec![3, 4],
            tx_antennas: (1..=8).collect(),
            rx_antennas: (1..=8).collect(),
            streams: vec![1, 2],
            rrus: vec![],
            per_antenna: true,
        }
    }
}

impl PropernessSection {
    /// Every valid shape in the grid, in lexicographic order
    /// `(K, Nt, Nr, Ns, N_RRU)`.
    pub fn shapes(&self) -> Vec<SystemShape> {
        let mut out = Vec::new();
        for &k in &self.users {
            for &nt in &self.tx_antennas {
                for &nr in &self.rx_antennas {
                    for &ns in &self.streams {
                        let mut rrus: Vec<usize> = self.rrus.clone();
                        if self.per_antenna {
                            rrus.push(nt);
                        }
                        rrus.sort_unstable();
                        rrus.dedup();
                        out.extend(rrus.into_iter().filter_map(|r| SystemShape::new(k, nt, nr, ns, r).ok()));
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub experiment: ExperimentSection,
    pub shape: Option<ShapeSection>,
    pub solver: SolverSection,
    pub backoff: BackoffSection,
    pub cell: CellSection,
    pub properness: PropernessSection,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// The configured shape, or the default for `model`.
    pub fn shape_for(&self, model: ChannelModel) -> Result<SystemShape> {
        match (&self.shape, model) {
            (Some(s), _) => s.build(),
            (None, ChannelModel::Rayleigh) => ShapeSection::RAYLEIGH_DEFAULT.build(),
            (None, ChannelModel::Das) => ShapeSection::CELL_DEFAULT.build(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let e = &self.experiment;
        if e.trials == 0 {
            return Err(Error::Config("experiment.trials must be at least 1".into()));
        }
        if e.snr_db.is_empty() || e.snr_db.iter().any(|s| !s.is_finite()) {
            return Err(Error::Config("experiment.snr_db must be a non-empty list of finite values".into()));
        }
        if e.modes.is_empty() {
            return Err(Error::Config("experiment.modes must not be empty".into()));
        }
        if let Some(s) = &self.shape {
            s.build()?;
        }
        if !(self.solver.tol >= 0.0) || self.solver.max_iters == 0 {
            return Err(Error::Config("solver.tol must be >= 0 and solver.max_iters >= 1".into()));
        }
        if self.backoff.oracle_draws == 0 {
            return Err(Error::Config("backoff.oracle_draws must be at least 1".into()));
        }
        let c = &self.cell;
        if !(c.cell_radius_m > 0.0) || !(c.grid_step_m > 0.0) || c.drops_per_bin == 0 || c.drops_per_point == 0 {
            return Err(Error::Config("cell radius, grid step and drop counts must be positive".into()));
        }
        if c.algorithms.is_empty() {
            return Err(Error::Config("cell.algorithms must not be empty".into()));
        }
        if c.distance_bins_m.first().is_some_and(|&lo| lo >= c.cell_radius_m) {
            return Err(Error::Config("cell.distance_bins_m must start inside the cell".into()));
        }
        if c.distance_bins_m.len() < 2 || c.distance_bins_m.windows(2).any(|w| !(w[1] > w[0])) || c.distance_bins_m[0] < 0.0 {
            return Err(Error::Config("cell.distance_bins_m must be increasing, non-negative, with at least two edges".into()));
        }
        if !(c.solver_tol >= 0.0) || c.solver_max_iters == 0 {
            return Err(Error::Config("cell.solver_tol must be >= 0 and cell.solver_max_iters >= 1".into()));
        }
        if !(c.propagation.shadow_std_db >= 0.0) || !c.propagation.pathloss_exponent.is_finite() {
            return Err(Error::Config("invalid propagation parameters".into()));
        }
        Ok(())
    }

    /// Rejects a channel model that contradicts the experiment being run.
    pub fn require_channel_model(&self, model: ChannelModel) -> Result<()> {
        match self.experiment.channel_model {
            Some(m) if m != model => Err(Error::Config(format!(
                "experiment needs channel_model = {model:?}, config sets {m:?}"
            ))),
            _ => Ok(()),
        }
    }
}
