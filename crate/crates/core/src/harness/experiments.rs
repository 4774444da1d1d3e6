//! Experiment drivers: Rayleigh SNR sweeps, back-off prediction, the
//! seven-cell rate-versus-distance study and cell map, and the properness
//! table.

use rayon::prelude::*;

use super::baseline::rru_selection_baseline;
use super::config::{CellAlgorithm, CellSection, ChannelModel, ConstraintMode, ExperimentConfig, PropernessSection};
use super::output::{mean_std, Coordinate, ResultRow};
use crate::alignment::{apply_backoff, solve_strict, solve_unconstrained, IASolution, Precoder, SolverOptions};
use crate::channel::{
    draw_das_channels, draw_rayleigh, hexagon_contains, ChannelSet, DasRealization, NetworkGeometry, Point,
    SystemShape,
};
use crate::error::{Error, Result};
use crate::feasibility::{is_proper, Classification, ConstraintSet, PropernessReport};
use crate::mathcore::RandomSeed;
use crate::metrics::{empirical_beta2, expected_rate_loss, sum_rate, BackoffModel, EmpiricalBeta2};

/// Noise power for an SNR in dB with unit transmit power.
pub fn noise_for_snr_db(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 10.0)
}

/// Seed of trial `index` under `master`.
pub fn trial_seed(master: u64, index: usize) -> RandomSeed {
    RandomSeed::new(master, index as u64)
}

struct ModeOutcome {
    converged: bool,
    /// One per SNR point.
    rates: Vec<Vec<f64>>,
}

fn sweep_trial(
    channels: &ChannelSet,
    modes: &[ConstraintMode],
    snr_db: &[f64],
    opts: &SolverOptions,
    seed: RandomSeed,
) -> Result<Vec<ModeOutcome>> {
    let shape = *channels.shape();
    let mut unconstrained: Option<IASolution> = None;
    let mut out = Vec::with_capacity(modes.len());
    for mode in modes {
        let needs_unconstrained = matches!(mode, ConstraintMode::Unconstrained | ConstraintMode::MaxPowerBackoff);
        if needs_unconstrained && unconstrained.is_none() {
            unconstrained = Some(solve_unconstrained(channels, 1.0, opts, seed.child(1))?);
        }
        let sol = match mode {
            ConstraintMode::Unconstrained => unconstrained.clone().expect("solved above"),
            ConstraintMode::MaxPowerBackoff => {
                apply_backoff(unconstrained.as_ref().expect("solved above"), &shape, 1.0)?.0
            }
            ConstraintMode::StrictPerRru => solve_strict(channels, 1.0, opts, seed.child(2))?,
        };
        let rates = snr_db
            .iter()
            .map(|&s| Ok(sum_rate(channels, &sol.precoders, noise_for_snr_db(s))?.per_user_rate))
            .collect::<Result<Vec<_>>>()?;
        out.push(ModeOutcome { converged: sol.converged, rates });
    }
    Ok(out)
}

fn per_user_means(samples: &[&Vec<f64>]) -> Vec<f64> {
    let users = samples.first().map_or(0, |s| s.len());
    (0..users)
        .map(|u| samples.iter().map(|s| s[u]).sum::<f64>() / samples.len() as f64)
        .collect()
}

/// Mean sum-rate versus SNR for each configured constraint mode over
/// i.i.d. Rayleigh channels.
///
/// Trial `t` draws its channels from seed `(master, t)`. The precoders do
/// not depend on the noise level, so each trial is solved once and scored
/// at every SNR point.
pub fn run_snr_sweep(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    cfg.require_channel_model(ChannelModel::Rayleigh)?;
    let shape = cfg.shape_for(ChannelModel::Rayleigh)?;
    let e = &cfg.experiment;
    let opts = cfg.solver.options();
    let outcomes: Vec<Vec<ModeOutcome>> = (0..e.trials)
        .into_par_iter()
        .map(|t| {
            let seed = trial_seed(e.seed, t);
            let channels = draw_rayleigh(shape, seed.child(0));
            sweep_trial(&channels, &e.modes, &e.snr_db, &opts, seed)
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::with_capacity(e.modes.len() * e.snr_db.len());
    for (m, mode) in e.modes.iter().enumerate() {
        let converged = outcomes.iter().filter(|o| o[m].converged).count();
        for (i, &snr) in e.snr_db.iter().enumerate() {
            let samples: Vec<&Vec<f64>> = outcomes.iter().map(|o| &o[m].rates[i]).collect();
            let sums: Vec<f64> = samples.iter().map(|s| s.iter().sum()).collect();
            let (mean, std) = mean_std(&sums);
            rows.push(ResultRow {
                experiment: "sweep".into(),
                shape: shape.to_string(),
                constraint_mode: mode.label().into(),
                coordinate: Coordinate::SnrDb(snr),
                mean_sum_rate: mean,
                std_sum_rate: std,
                convergence_rate: converged as f64 / e.trials as f64,
                trials: e.trials,
                seed: e.seed,
                per_user_means: per_user_means(&samples),
                high_snr_valid: None,
            });
        }
    }
    Ok(rows)
}

/// How a back-off model variant is judged against Monte Carlo samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VariantCriterion {
    /// Closest mean of `log2(N_RRU β² / P)`.
    RateLoss,
    /// Smallest Kolmogorov-Smirnov distance.
    Ks,
}

/// Scores every variant of `base` against `empirical` and returns the best
/// together with its score. Ties keep the earlier variant.
pub fn select_backoff_model(
    base: &BackoffModel,
    empirical: &EmpiricalBeta2,
    criterion: VariantCriterion,
) -> Result<(BackoffModel, f64)> {
    let p = empirical.total_power;
    let mut best: Option<(BackoffModel, f64)> = None;
    for m in base.variants() {
        let score = match criterion {
            VariantCriterion::RateLoss => (m.expected_log_backoff(p)? - empirical.mean_log_backoff()).abs(),
            VariantCriterion::Ks => empirical.ks_distance(|x| m.cdf(x, p))?,
        };
        if best.as_ref().is_none_or(|(_, s)| score < *s) {
            best = Some((m, score));
        }
    }
    Ok(best.expect("four variants"))
}

/// The back-off model used for prediction: the configured variant, or with
/// `auto_select` the variant matching a Haar Monte Carlo sample best.
pub fn backoff_model_for(cfg: &ExperimentConfig, shape: &SystemShape) -> Result<BackoffModel> {
    let (exponent, convention) = cfg.backoff.variant();
    let base = BackoffModel::new(shape.tx_antennas(), shape.streams(), shape.rrus())?
        .with_variant(exponent, convention);
    if !cfg.backoff.auto_select {
        return Ok(base);
    }
    let emp = empirical_beta2(&base, 1.0, cfg.backoff.oracle_draws, RandomSeed::new(cfg.experiment.seed, u64::MAX))?;
    Ok(select_backoff_model(&base, &emp, VariantCriterion::RateLoss)?.0)
}

pub const PREDICTED_LABEL: &str = "predicted_backoff";

/// Simulated unconstrained and backed-off sum-rates next to the prediction
/// `unconstrained − expected_rate_loss`. Rows carry `high_snr_valid`, true
/// from 30 dB up where the loss analysis applies.
pub fn run_backoff_prediction(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    cfg.require_channel_model(ChannelModel::Rayleigh)?;
    let shape = cfg.shape_for(ChannelModel::Rayleigh)?;
    if shape.streams() != 1 {
        return Err(Error::Config(format!(
            "back-off prediction is defined for single-stream shapes, got {shape}"
        )));
    }
    let model = backoff_model_for(cfg, &shape)?;
    let loss = expected_rate_loss(&model, shape.users(), 1.0, 1.0)?;

    let mut sweep_cfg = cfg.clone();
    sweep_cfg.experiment.modes = vec![ConstraintMode::Unconstrained, ConstraintMode::MaxPowerBackoff];
    let rows = run_snr_sweep(&sweep_cfg)?;
    let n = cfg.experiment.snr_db.len();
    let mut out = Vec::with_capacity(3 * n);
    for mut r in rows.iter().cloned() {
        r.experiment = "backoff_predict".into();
        r.high_snr_valid = Some(matches!(r.coordinate, Coordinate::SnrDb(s) if s >= 30.0));
        out.push(r);
    }
    for base in &rows[..n] {
        let mut r = base.clone();
        r.experiment = "backoff_predict".into();
        r.constraint_mode = PREDICTED_LABEL.into();
        r.mean_sum_rate = base.mean_sum_rate - loss;
        let per_user_loss = loss / shape.users() as f64;
        r.per_user_means = base.per_user_means.iter().map(|m| m - per_user_loss).collect();
        r.high_snr_valid = Some(matches!(r.coordinate, Coordinate::SnrDb(s) if s >= 30.0));
        out.push(r);
    }
    Ok(out)
}

/// Area of the intersection of a hexagon of circumradius `r_hex` with a
/// concentric disk of radius `rho`.
pub fn hexagon_disk_area(r_hex: f64, rho: f64) -> f64 {
    let h = 3f64.sqrt() / 2.0 * r_hex;
    if rho <= 0.0 {
        0.0
    } else if rho <= h {
        std::f64::consts::PI * rho * rho
    } else if rho < r_hex {
        let cap = rho * rho * (h / rho).acos() - h * (rho * rho - h * h).sqrt();
        std::f64::consts::PI * rho * rho - 6.0 * cap
    } else {
        1.5 * 3f64.sqrt() * r_hex * r_hex
    }
}

/// Fraction of the hexagon's area at distances in `[lo, hi)`.
pub fn annulus_share(r_hex: f64, lo: f64, hi: f64) -> f64 {
    (hexagon_disk_area(r_hex, hi) - hexagon_disk_area(r_hex, lo)) / hexagon_disk_area(r_hex, r_hex)
}

/// Rates of the centre user for one network drop.
#[derive(Debug, Clone, PartialEq)]
pub struct CellDrop {
    pub position: Point,
    /// In the order of `cell.algorithms`.
    pub rates: Vec<f64>,
    /// Solver convergence; always true for RRU selection.
    pub converged: Vec<bool>,
}

/// Everything needed to evaluate drops of the seven-cell network.
pub struct CellRunner {
    pub shape: SystemShape,
    pub geometry: NetworkGeometry,
    pub algorithms: Vec<CellAlgorithm>,
    /// Channels are scaled by `sqrt(P / σ²)` so that transmit and noise
    /// powers are both one.
    amplitude: f64,
    opts: SolverOptions,
    colocated_per_antenna: bool,
}

impl CellRunner {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        cfg.require_channel_model(ChannelModel::Das)?;
        let shape = cfg.shape_for(ChannelModel::Das)?;
        let c: &CellSection = &cfg.cell;
        let geometry = NetworkGeometry::cluster(c.cell_radius_m, c.propagation)?;
        if shape.users() != geometry.cells() {
            return Err(Error::UnsupportedTopology(format!(
                "the cluster has {} cells, shape has {} users",
                geometry.cells(),
                shape.users()
            )));
        }
        if shape.rrus() != geometry.rrus() {
            return Err(Error::GeometryMismatch(format!(
                "the cluster has {} RRUs per cell, shape has {}",
                geometry.rrus(),
                shape.rrus()
            )));
        }
        if cfg.cell.algorithms.contains(&CellAlgorithm::RruSelection) && shape.streams() > shape.antennas_per_rru() {
            return Err(Error::StreamsExceedRruAntennas {
                streams: shape.streams(),
                per_rru: shape.antennas_per_rru(),
            });
        }
        Ok(Self {
            shape,
            geometry,
            algorithms: c.algorithms.clone(),
            amplitude: c.snr_linear().sqrt(),
            opts: c.solver_options(),
            colocated_per_antenna: c.colocated_per_antenna,
        })
    }

    /// Places the other users uniformly, puts the centre user at `center`
    /// and scores every algorithm for the centre user.
    pub fn drop_at(&self, center: Point, seed: RandomSeed) -> Result<CellDrop> {
        let mut geom = self.geometry.clone();
        geom.place_users_uniformly(&mut seed.child(0).rng());
        geom.user_positions[0] = center;

        let needs_das = self.algorithms.iter().any(|a| *a != CellAlgorithm::ColocatedIa);
        let das = if needs_das {
            let raw = draw_das_channels(&geom, self.shape, seed.child(1))?;
            Some(DasRealization { channels: raw.channels.scaled(self.amplitude), gains_db: raw.gains_db })
        } else {
            None
        };
        let mut unconstrained: Option<IASolution> = None;
        let mut rates = Vec::with_capacity(self.algorithms.len());
        let mut converged = Vec::with_capacity(self.algorithms.len());
        for alg in &self.algorithms {
            let (rate, conv) = match alg {
                CellAlgorithm::ColocatedIa => self.colocated(&geom, seed)?,
                CellAlgorithm::DasMaxPowerBackoff => {
                    let das = das.as_ref().expect("drawn above");
                    if unconstrained.is_none() {
                        unconstrained = Some(solve_unconstrained(&das.channels, 1.0, &self.opts, seed.child(3))?);
                    }
                    let sol = unconstrained.as_ref().expect("solved above");
                    let (scaled, _) = apply_backoff(sol, &self.shape, 1.0)?;
                    (sum_rate(&das.channels, &scaled.precoders, 1.0)?.per_user_rate[0], sol.converged)
                }
                CellAlgorithm::DasStrictPerRru => {
                    let das = das.as_ref().expect("drawn above");
                    let sol = solve_strict(&das.channels, 1.0, &self.opts, seed.child(4))?;
                    (sum_rate(&das.channels, &sol.precoders, 1.0)?.per_user_rate[0], sol.converged)
                }
                CellAlgorithm::RruSelection => {
                    let das = das.as_ref().expect("drawn above");
                    (rru_selection_baseline(das, 1.0, 1.0)?.per_user_rate[0], true)
                }
            };
            rates.push(rate);
            converged.push(conv);
        }
        Ok(CellDrop { position: center, rates, converged })
    }

    fn colocated(&self, geom: &NetworkGeometry, seed: RandomSeed) -> Result<(f64, bool)> {
        let shape = self.shape.with_rrus(1)?;
        let raw = draw_das_channels(&geom.colocated(), shape, seed.child(2))?;
        let channels = raw.channels.scaled(self.amplitude);
        let sol = solve_unconstrained(&channels, 1.0, &self.opts, seed.child(5))?;
        let precoders = if self.colocated_per_antenna {
            let per_antenna = self.shape.with_rrus(self.shape.tx_antennas())?;
            let split = IASolution {
                precoders: sol
                    .precoders
                    .iter()
                    .map(|p| Precoder::new(p.owner(), p.matrix().clone(), per_antenna.rrus()))
                    .collect::<Result<_>>()?,
                ..sol.clone()
            };
            apply_backoff(&split, &per_antenna, 1.0)?.0.precoders
        } else {
            sol.precoders
        };
        Ok((sum_rate(&channels, &precoders, 1.0)?.per_user_rate[0], sol.converged))
    }

    /// Uniform point of the centre cell with distance in `[lo, hi)`.
    pub fn sample_in_ring(&self, seed: RandomSeed, lo: f64, hi: f64) -> Result<Point> {
        let r = self.geometry.cell_radius;
        if lo >= r || hi <= lo {
            return Err(Error::Config(format!("distance bin [{lo}, {hi}) misses the cell")));
        }
        let mut rng = seed.child(6).rng();
        for _ in 0..1_000_000 {
            let p = self.geometry.sample_in_cell(&mut rng, 0);
            let d = p.norm();
            if d >= lo && d < hi {
                return Ok(p);
            }
        }
        Err(Error::Config(format!("distance bin [{lo}, {hi}) is too thin to sample")))
    }
}

/// Per-bin drops of the rate-versus-distance study.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceBin {
    pub lo: f64,
    pub hi: f64,
    pub drops: Vec<CellDrop>,
}

impl DistanceBin {
    pub fn mean_rate(&self, alg_index: usize) -> f64 {
        let v: Vec<f64> = self.drops.iter().map(|d| d.rates[alg_index]).collect();
        mean_std(&v).0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceStudy {
    pub shape: SystemShape,
    pub algorithms: Vec<CellAlgorithm>,
    pub cell_radius: f64,
    pub seed: u64,
    pub bins: Vec<DistanceBin>,
}

impl DistanceStudy {
    pub fn algorithm_index(&self, alg: CellAlgorithm) -> Option<usize> {
        self.algorithms.iter().position(|a| *a == alg)
    }

    /// Mean rate of `alg` over all drops with distance above `min_r`.
    pub fn mean_beyond(&self, alg: CellAlgorithm, min_r: f64) -> Option<f64> {
        let i = self.algorithm_index(alg)?;
        let v: Vec<f64> = self
            .bins
            .iter()
            .flat_map(|b| &b.drops)
            .filter(|d| d.position.norm() > min_r)
            .map(|d| d.rates[i])
            .collect();
        (!v.is_empty()).then(|| mean_std(&v).0)
    }

    /// Share of the cell area beyond `min_r` lying in bins where `a` has
    /// the higher mean rate than `b`, i.e. the fraction of uniformly placed
    /// users there that `a` serves better on average.
    pub fn area_fraction_better(&self, a: CellAlgorithm, b: CellAlgorithm, min_r: f64) -> Option<f64> {
        let (ia, ib) = (self.algorithm_index(a)?, self.algorithm_index(b)?);
        let r = self.cell_radius;
        let mut better = 0.0;
        let mut total = 0.0;
        for bin in &self.bins {
            let lo = bin.lo.max(min_r);
            let hi = bin.hi.min(r);
            if hi <= lo || bin.drops.is_empty() {
                continue;
            }
            let w = annulus_share(r, lo, hi);
            total += w;
            if bin.mean_rate(ia) > bin.mean_rate(ib) {
                better += w;
            }
        }
        (total > 0.0).then(|| better / total)
    }

    /// Fraction of individual drops beyond `min_r` in which `a` beats `b`.
    pub fn drop_fraction_better(&self, a: CellAlgorithm, b: CellAlgorithm, min_r: f64) -> Option<f64> {
        let (ia, ib) = (self.algorithm_index(a)?, self.algorithm_index(b)?);
        let drops: Vec<&CellDrop> =
            self.bins.iter().flat_map(|b| &b.drops).filter(|d| d.position.norm() > min_r).collect();
        let wins = drops.iter().filter(|d| d.rates[ia] > d.rates[ib]).count();
        (!drops.is_empty()).then(|| wins as f64 / drops.len() as f64)
    }

    pub fn rows(&self) -> Vec<ResultRow> {
        let mut rows = Vec::new();
        for (i, alg) in self.algorithms.iter().enumerate() {
            for bin in &self.bins {
                let v: Vec<f64> = bin.drops.iter().map(|d| d.rates[i]).collect();
                let (mean, std) = mean_std(&v);
                let conv = bin.drops.iter().filter(|d| d.converged[i]).count();
                rows.push(ResultRow {
                    experiment: "rate_vs_distance".into(),
                    shape: self.shape.to_string(),
                    constraint_mode: alg.label().into(),
                    coordinate: Coordinate::DistanceM(0.5 * (bin.lo + bin.hi)),
                    mean_sum_rate: mean,
                    std_sum_rate: std,
                    convergence_rate: conv as f64 / bin.drops.len() as f64,
                    trials: bin.drops.len(),
                    seed: self.seed,
                    per_user_means: Vec::new(),
                    high_snr_valid: None,
                });
            }
        }
        rows
    }
}

/// Rate of the centre user versus its distance from the cell centre. Bin
/// `b` holds `drops_per_bin` drops; drop `d` of bin `b` uses trial seed
/// `b * drops_per_bin + d`.
pub fn run_rate_vs_distance(cfg: &ExperimentConfig) -> Result<DistanceStudy> {
    let runner = CellRunner::new(cfg)?;
    let c = &cfg.cell;
    let edges = &c.distance_bins_m;
    let n = c.drops_per_bin;
    let jobs: Vec<(usize, usize)> = (0..edges.len() - 1).flat_map(|b| (0..n).map(move |d| (b, d))).collect();
    let drops: Vec<CellDrop> = jobs
        .par_iter()
        .map(|&(b, d)| {
            let seed = trial_seed(cfg.experiment.seed, b * n + d);
            let p = runner.sample_in_ring(seed, edges[b], edges[b + 1])?;
            runner.drop_at(p, seed)
        })
        .collect::<Result<_>>()?;
    let mut it = drops.into_iter();
    let bins = (0..edges.len() - 1)
        .map(|b| DistanceBin { lo: edges[b], hi: edges[b + 1], drops: it.by_ref().take(n).collect() })
        .collect();
    Ok(DistanceStudy {
        shape: runner.shape,
        algorithms: runner.algorithms.clone(),
        cell_radius: c.cell_radius_m,
        seed: cfg.experiment.seed,
        bins,
    })
}

/// Grid points with spacing `step` inside a hexagon of circumradius `r`
/// centred at the origin, ordered by `y` then `x`.
pub fn hexagon_grid(r: f64, step: f64) -> Vec<Point> {
    let n = (r / step).floor() as i64;
    let mut pts = Vec::new();
    for j in -n..=n {
        for i in -n..=n {
            let p = Point::new(i as f64 * step, j as f64 * step);
            if hexagon_contains(r, &p) {
                pts.push(p);
            }
        }
    }
    pts
}

/// Mean rate of the centre user at each point of a square grid over its
/// cell, with the other users placed uniformly. Point `i` uses trial seeds
/// `i * drops_per_point ..`.
pub fn run_cell_map(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let runner = CellRunner::new(cfg)?;
    let c = &cfg.cell;
    let points = hexagon_grid(c.cell_radius_m, c.grid_step_m);
    let n = c.drops_per_point;
    let drops: Vec<CellDrop> = (0..points.len() * n)
        .into_par_iter()
        .map(|j| runner.drop_at(points[j / n], trial_seed(cfg.experiment.seed, j)))
        .collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(points.len() * runner.algorithms.len());
    for (a, alg) in runner.algorithms.iter().enumerate() {
        for (i, p) in points.iter().enumerate() {
            let ds = &drops[i * n..(i + 1) * n];
            let v: Vec<f64> = ds.iter().map(|d| d.rates[a]).collect();
            let (mean, std) = mean_std(&v);
            let conv = ds.iter().filter(|d| d.converged[a]).count();
            rows.push(ResultRow {
                experiment: "cellmap".into(),
                shape: runner.shape.to_string(),
                constraint_mode: alg.label().into(),
                coordinate: Coordinate::Grid { x: p.x, y: p.y },
                mean_sum_rate: mean,
                std_sum_rate: std,
                convergence_rate: conv as f64 / n as f64,
                trials: n,
                seed: cfg.experiment.seed,
                per_user_means: Vec::new(),
                high_snr_valid: None,
            });
        }
    }
    Ok(rows)
}

/// Both cellular sub-experiments: the cell map followed by the
/// rate-versus-distance rows.
pub fn run_cell_experiments(cfg: &ExperimentConfig) -> Result<(Vec<ResultRow>, Vec<ResultRow>)> {
    Ok((run_cell_map(cfg)?, run_rate_vs_distance(cfg)?.rows()))
}

/// One line of the properness table.
#[derive(Debug, Clone, PartialEq)]
pub struct PropernessRow {
    pub report: PropernessReport,
    pub classification: Classification,
}

pub fn properness_table(grid: &PropernessSection) -> Vec<PropernessRow> {
    grid.shapes()
        .iter()
        .map(|s| {
            let report = is_proper(s, ConstraintSet::StrictPerRru);
            PropernessRow { report, classification: report.classification() }
        })
        .collect()
}

/// Fixed-width text rendering of the properness table.
pub fn format_properness_table(rows: &[PropernessRow]) -> String {
    let mut s = format!(
        "{:<22} {:>6} {:>6} {:>6}  {}\n",
        "shape", "N_v", "N_e1", "N_e2", "classification"
    );
    for r in rows {
        let p = &r.report;
        s.push_str(&format!(
            "{:<22} {:>6} {:>6} {:>6}  {}\n",
            p.shape.to_string(),
            p.n_vars,
            p.n_eqs_alignment,
            p.n_eqs_power,
            r.classification
        ));
    }
    s
}

pub fn write_properness_csv<W: std::io::Write>(out: W, rows: &[PropernessRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "experiment",
        "users",
        "tx_antennas",
        "rx_antennas",
        "streams",
        "rrus",
        "n_vars",
        "n_eqs_alignment",
        "n_eqs_power",
        "proper_unconstrained",
        "proper_strict",
        "classification",
    ])?;
    for r in rows {
        let p = &r.report;
        let s = &p.shape;
        w.write_record([
            "properness".to_string(),
            s.users().to_string(),
            s.tx_antennas().to_string(),
            s.rx_antennas().to_string(),
            s.streams().to_string(),
            s.rrus().to_string(),
            p.n_vars.to_string(),
            p.n_eqs_alignment.to_string(),
            p.n_eqs_power.to_string(),
            p.proper_unconstrained.to_string(),
            p.proper_strict.to_string(),
            r.classification.label().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
