//! Interference alignment by alternating leakage minimisation.
//!
//! [`solve_unconstrained`] alternates the combiner and precoder updates that
//! each minimise the total leakage interference with the other side held
//! fixed. [`solve_strict`] adds a projection after every precoder update that
//! rescales each RRU block to exactly `P / N_RRU`. Precoders that ignore the
//! per-RRU limits can be made to respect a maximum per-RRU power by
//! [`apply_backoff`].

use nalgebra::DMatrixView;
use num_complex::Complex64;
use rand::Rng;

use crate::channel::{ChannelSet, SystemShape};
use crate::error::{Error, Result};
use crate::mathcore::{gaussian_matrix, haar_frame_from, smallest_eigvecs, smallest_eigvecs_near, ComplexMatrix, RandomSeed};

/// Block norms below this are treated as zero by the strict projection.
pub const ZERO_BLOCK_NORM: f64 = 1e-300;

/// `Nt x Ns` precoder of one transmitter, split row-wise into RRU blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct Precoder {
    owner: usize,
    matrix: ComplexMatrix,
    rrus: usize,
}

impl Precoder {
    pub fn new(owner: usize, matrix: ComplexMatrix, rrus: usize) -> Result<Self> {
        if rrus == 0 || matrix.nrows() % rrus != 0 {
            return Err(Error::DimensionMismatch(format!(
                "{} precoder rows cannot be split over {rrus} RRUs",
                matrix.nrows()
            )));
        }
        Ok(Self { owner, matrix, rrus })
    }

    pub fn owner(&self) -> usize {
        self.owner
    }
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }
    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }
    pub fn rrus(&self) -> usize {
        self.rrus
    }
    pub fn rows_per_rru(&self) -> usize {
        self.matrix.nrows() / self.rrus
    }

    /// Rows `[r * Nt/N_RRU, (r + 1) * Nt/N_RRU)`.
    pub fn block(&self, r: usize) -> DMatrixView<'_, Complex64> {
        let n = self.rows_per_rru();
        self.matrix.rows(r * n, n)
    }

    pub fn block_power(&self, r: usize) -> f64 {
        self.block(r).norm_squared()
    }

    pub fn block_powers(&self) -> Vec<f64> {
        (0..self.rrus).map(|r| self.block_power(r)).collect()
    }

    /// Total power `‖F‖_F²`.
    pub fn power(&self) -> f64 {
        self.matrix.norm_squared()
    }

    fn scale_block(&mut self, r: usize, factor: f64) {
        let n = self.rows_per_rru();
        self.matrix.rows_mut(r * n, n).scale_mut(factor);
    }
}

/// `Nr x Ns` receive combiner with orthonormal columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Combiner {
    owner: usize,
    matrix: ComplexMatrix,
}

impl Combiner {
    pub fn new(owner: usize, matrix: ComplexMatrix) -> Self {
        Self { owner, matrix }
    }
    pub fn owner(&self) -> usize {
        self.owner
    }
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Stop once `leakage / P` falls to this value.
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: 1e-8, max_iters: 5000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IASolution {
    pub precoders: Vec<Precoder>,
    pub combiners: Vec<Combiner>,
    /// Leakage of the initial point followed by one value per iteration.
    pub leakage_trace: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    /// Strict solver only: blocks re-drawn because their norm vanished.
    pub reinitialized_blocks: usize,
}

impl IASolution {
    pub fn final_leakage(&self) -> f64 {
        self.leakage_trace.last().copied().unwrap_or(0.0)
    }

    pub fn precoder_matrices(&self) -> Vec<ComplexMatrix> {
        self.precoders.iter().map(|p| p.matrix().clone()).collect()
    }
}

/// Read-only view handed to solver observers after every iteration.
pub struct Iterate<'a> {
    pub iteration: usize,
    pub precoders: &'a [Precoder],
    pub combiners: &'a [Combiner],
    pub leakage: f64,
}

fn check_users(channels: &ChannelSet, n: usize, what: &str) -> Result<()> {
    if n != channels.users() {
        return Err(Error::DimensionMismatch(format!(
            "{n} {what} for {} users",
            channels.users()
        )));
    }
    Ok(())
}

/// Total leakage `Σ_l Σ_{k≠l} ‖W_k* H_kl F_l‖_F²`.
pub fn leakage(channels: &ChannelSet, precoders: &[Precoder], combiners: &[Combiner]) -> Result<f64> {
    check_users(channels, precoders.len(), "precoders")?;
    check_users(channels, combiners.len(), "combiners")?;
    let k = channels.users();
    let mut total = 0.0;
    for rx in 0..k {
        let w = combiners[rx].matrix();
        for tx in (0..k).filter(|&tx| tx != rx) {
            let h = channels.link(rx, tx);
            let f = precoders[tx].matrix();
            if w.nrows() != h.nrows() || f.nrows() != h.ncols() {
                return Err(Error::DimensionMismatch(format!(
                    "W is {}x{}, H is {}x{}, F is {}x{}",
                    w.nrows(),
                    w.ncols(),
                    h.nrows(),
                    h.ncols(),
                    f.nrows(),
                    f.ncols()
                )));
            }
            total += (w.adjoint() * (h * f)).norm_squared();
        }
    }
    Ok(total)
}

/// Interference covariance seen by receiver `rx`: `Σ_{l≠k} H_kl F_l F_l* H_kl*`.
pub fn interference_covariance(channels: &ChannelSet, precoders: &[Precoder], rx: usize) -> ComplexMatrix {
    let nr = channels.shape().rx_antennas();
    let mut q = ComplexMatrix::zeros(nr, nr);
    for tx in (0..channels.users()).filter(|&tx| tx != rx) {
        let b = channels.link(rx, tx) * precoders[tx].matrix();
        q += &b * b.adjoint();
    }
    q
}

/// Each `W_k` spans the `Ns` least dominant eigenvectors of receiver `k`'s
/// interference covariance.
pub fn update_combiners(channels: &ChannelSet, precoders: &[Precoder]) -> Result<Vec<Combiner>> {
    check_users(channels, precoders.len(), "precoders")?;
    let ns = channels.shape().streams();
    (0..channels.users())
        .map(|rx| {
            let q = interference_covariance(channels, precoders, rx);
            Ok(Combiner::new(rx, smallest_eigvecs(&q, ns)?))
        })
        .collect()
}

/// Each `F_k` spans the `Ns` least dominant eigenvectors of
/// `Σ_{l≠k} H_lk* W_l W_l* H_lk`, with every column at power `P / Ns`.
pub fn update_precoders(channels: &ChannelSet, combiners: &[Combiner], total_power: f64) -> Result<Vec<Precoder>> {
    precoder_step(channels, combiners, total_power, None)
}

/// Relative width of an eigenvalue cluster treated as a tie.
pub const EIGEN_TIE_TOL: f64 = 1e-10;

/// [`update_precoders`] where a minimal eigenspace wider than `Ns` (for
/// instance a null space of dimension `Nt − (K − 1) Ns > Ns`) is resolved
/// towards `previous`: the new frame is the orthonormal frame in that
/// eigenspace closest to the previous precoder.
pub fn update_precoders_near(
    channels: &ChannelSet,
    combiners: &[Combiner],
    total_power: f64,
    previous: &[Precoder],
) -> Result<Vec<Precoder>> {
    check_users(channels, previous.len(), "previous precoders")?;
    precoder_step(channels, combiners, total_power, Some(previous))
}

fn precoder_step(
    channels: &ChannelSet,
    combiners: &[Combiner],
    total_power: f64,
    previous: Option<&[Precoder]>,
) -> Result<Vec<Precoder>> {
    check_users(channels, combiners.len(), "combiners")?;
    let shape = channels.shape();
    let nt = shape.tx_antennas();
    let ns = shape.streams();
    let amp = (total_power / ns as f64).sqrt();
    (0..channels.users())
        .map(|tx| {
            let mut q = ComplexMatrix::zeros(nt, nt);
            for rx in (0..channels.users()).filter(|&rx| rx != tx) {
                let c = channels.link(rx, tx).adjoint() * combiners[rx].matrix();
                q += &c * c.adjoint();
            }
            let frame = match previous {
                Some(prev) => smallest_eigvecs_near(&q, ns, prev[tx].matrix(), EIGEN_TIE_TOL)?,
                None => smallest_eigvecs(&q, ns)?,
            };
            Precoder::new(tx, frame.scale(amp), shape.rrus())
        })
        .collect()
}

fn haar_precoders<R: Rng + ?Sized>(rng: &mut R, shape: &SystemShape, total_power: f64) -> Result<Vec<Precoder>> {
    let amp = (total_power / shape.streams() as f64).sqrt();
    (0..shape.users())
        .map(|k| {
            let f = haar_frame_from(rng, shape.tx_antennas(), shape.streams())?.scale(amp);
            Precoder::new(k, f, shape.rrus())
        })
        .collect()
}

/// Rescales every RRU block to power `P / N_RRU`; vanishing blocks are
/// re-drawn first. Returns the number of re-drawn blocks.
fn project_strict<R: Rng + ?Sized>(rng: &mut R, precoders: &mut [Precoder], total_power: f64) -> usize {
    let mut redrawn = 0;
    for p in precoders.iter_mut() {
        let target = (total_power / p.rrus() as f64).sqrt();
        let rows = p.rows_per_rru();
        let cols = p.matrix.ncols();
        for r in 0..p.rrus() {
            let mut norm = p.block(r).norm();
            if !(norm >= ZERO_BLOCK_NORM) {
                let fresh = gaussian_matrix(rng, rows, cols);
                p.matrix.rows_mut(r * rows, rows).copy_from(&fresh);
                norm = p.block(r).norm();
                redrawn += 1;
            }
            p.scale_block(r, target / norm);
        }
    }
    redrawn
}

fn alternate<O>(
    channels: &ChannelSet,
    total_power: f64,
    opts: &SolverOptions,
    seed: RandomSeed,
    strict: bool,
    mut observer: O,
) -> Result<IASolution>
where
    O: FnMut(&Iterate<'_>),
{
    if !(total_power > 0.0 && total_power.is_finite()) {
        return Err(Error::DomainError(format!("total power must be positive, got {total_power}")));
    }
    let shape = *channels.shape();
    let mut rng = seed.rng();
    let mut precoders = haar_precoders(&mut rng, &shape, total_power)?;
    let mut reinitialized_blocks = 0;
    if strict {
        reinitialized_blocks += project_strict(&mut rng, &mut precoders, total_power);
    }
    let mut combiners = update_combiners(channels, &precoders)?;
    let mut current = leakage(channels, &precoders, &combiners)?;
    let mut trace = vec![current];
    observer(&Iterate { iteration: 0, precoders: &precoders, combiners: &combiners, leakage: current });

    let mut iterations = 0;
    while current / total_power > opts.tol && iterations < opts.max_iters {
        iterations += 1;
        combiners = update_combiners(channels, &precoders)?;
        precoders = if strict {
            update_precoders_near(channels, &combiners, total_power, &precoders)?
        } else {
            update_precoders(channels, &combiners, total_power)?
        };
        if strict {
            reinitialized_blocks += project_strict(&mut rng, &mut precoders, total_power);
        }
        current = leakage(channels, &precoders, &combiners)?;
        if !current.is_finite() {
            return Err(Error::Numerical(format!("leakage became {current} at iteration {iterations}")));
        }
        trace.push(current);
        observer(&Iterate { iteration: iterations, precoders: &precoders, combiners: &combiners, leakage: current });
    }

    Ok(IASolution {
        precoders,
        combiners,
        leakage_trace: trace,
        converged: current / total_power <= opts.tol,
        iterations,
        reinitialized_blocks,
    })
}

/// Alternating minimisation under a total power constraint only, started
/// from Haar-random precoders drawn from `seed`.
pub fn solve_unconstrained(
    channels: &ChannelSet,
    total_power: f64,
    opts: &SolverOptions,
    seed: RandomSeed,
) -> Result<IASolution> {
    alternate(channels, total_power, opts, seed, false, |_| {})
}

/// [`solve_unconstrained`] with a callback after every iteration.
pub fn solve_unconstrained_observed<O: FnMut(&Iterate<'_>)>(
    channels: &ChannelSet,
    total_power: f64,
    opts: &SolverOptions,
    seed: RandomSeed,
    observer: O,
) -> Result<IASolution> {
    alternate(channels, total_power, opts, seed, false, observer)
}

/// Alternating minimisation with every RRU block projected to power
/// `P / N_RRU` after each precoder update. The leakage trace is not
/// guaranteed to decrease; a non-converged run returns its final iterate.
///
/// Precoder updates use [`update_precoders_near`]: when the transmit null
/// space is wider than `Ns` the frame is chosen next to the projected
/// iterate instead of wherever the eigensolver lands, so successive
/// projections can settle on equal block powers.
pub fn solve_strict(
    channels: &ChannelSet,
    total_power: f64,
    opts: &SolverOptions,
    seed: RandomSeed,
) -> Result<IASolution> {
    alternate(channels, total_power, opts, seed, true, |_| {})
}

/// [`solve_strict`] with a callback after every iteration.
pub fn solve_strict_observed<O: FnMut(&Iterate<'_>)>(
    channels: &ChannelSet,
    total_power: f64,
    opts: &SolverOptions,
    seed: RandomSeed,
    observer: O,
) -> Result<IASolution> {
    alternate(channels, total_power, opts, seed, true, observer)
}

/// Back-off factors and the scaling applied to each precoder.
#[derive(Debug, Clone, PartialEq)]
pub struct BackoffResult {
    /// `β_k² = max_r ‖F_k^(r)‖_F²`.
    pub per_user_beta_sq: Vec<f64>,
    /// `sqrt(P / N_RRU) / β_k`.
    pub scale_factors: Vec<f64>,
}

/// Scales each precoder by `sqrt(P / N_RRU) / β_k` so that its strongest RRU
/// block sits exactly at the per-RRU limit. Column spans, and with them
/// alignment, are unchanged.
pub fn apply_backoff(
    solution: &IASolution,
    shape: &SystemShape,
    total_power: f64,
) -> Result<(IASolution, BackoffResult)> {
    let cap = total_power / shape.rrus() as f64;
    let mut out = solution.clone();
    let mut per_user_beta_sq = Vec::with_capacity(out.precoders.len());
    let mut scale_factors = Vec::with_capacity(out.precoders.len());
    for p in out.precoders.iter_mut() {
        if p.rrus() != shape.rrus() {
            return Err(Error::DimensionMismatch(format!(
                "precoder has {} RRU blocks, shape has {}",
                p.rrus(),
                shape.rrus()
            )));
        }
        let beta_sq = p.block_powers().into_iter().fold(0.0, f64::max);
        if !(beta_sq > 0.0) {
            return Err(Error::ZeroPrecoder { user: p.owner() });
        }
        let scale = (cap / beta_sq).sqrt();
        p.matrix.scale_mut(scale);
        per_user_beta_sq.push(beta_sq);
        scale_factors.push(scale);
    }
    Ok((out, BackoffResult { per_user_beta_sq, scale_factors }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::draw_rayleigh;
    use crate::mathcore::orthonormality_error;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn identity_channels_leak_two() {
        let shape = SystemShape::new(2, 2, 2, 1, 1).unwrap();
        let eye = ComplexMatrix::identity(2, 2);
        let h = ChannelSet::from_links(shape, vec![eye.clone(); 4]).unwrap();
        let e1 = ComplexMatrix::from_column_slice(2, 1, &[c(1.0), c(0.0)]);
        let f: Vec<_> = (0..2).map(|k| Precoder::new(k, e1.clone(), 1).unwrap()).collect();
        let w: Vec<_> = (0..2).map(|k| Combiner::new(k, e1.clone())).collect();
        assert_eq!(leakage(&h, &f, &w).unwrap(), 2.0);
        assert!(matches!(leakage(&h, &f[..1], &w), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn combiner_avoids_interference_direction() {
        let shape = SystemShape::new(2, 2, 2, 1, 1).unwrap();
        let eye = ComplexMatrix::identity(2, 2);
        let h = ChannelSet::from_links(shape, vec![eye; 4]).unwrap();
        let e1 = ComplexMatrix::from_column_slice(2, 1, &[c(1.0), c(0.0)]);
        let f: Vec<_> = (0..2).map(|k| Precoder::new(k, e1.clone(), 1).unwrap()).collect();
        let w = update_combiners(&h, &f).unwrap();
        for wk in &w {
            assert!((wk.matrix()[(1, 0)] - c(1.0)).norm() < 1e-14);
        }
        assert!(leakage(&h, &f, &w).unwrap() < 1e-28);
    }

    #[test]
    fn zero_interference_still_orthonormal() {
        let shape = SystemShape::new(3, 4, 3, 2, 1).unwrap();
        let h = draw_rayleigh(shape, RandomSeed::new(1, 1));
        let f: Vec<_> = (0..3)
            .map(|k| Precoder::new(k, ComplexMatrix::zeros(4, 2), 1).unwrap())
            .collect();
        let w = update_combiners(&h, &f).unwrap();
        for wk in &w {
            assert!(orthonormality_error(wk.matrix()) < 1e-12);
        }
        assert_eq!(leakage(&h, &f, &w).unwrap(), 0.0);
    }

    #[test]
    fn precoder_power_is_exact() {
        let shape = SystemShape::new(3, 4, 6, 2, 4).unwrap();
        let h = draw_rayleigh(shape, RandomSeed::new(2, 0));
        let f = haar_precoders(&mut RandomSeed::new(3, 0).rng(), &shape, 2.5).unwrap();
        let w = update_combiners(&h, &f).unwrap();
        for p in update_precoders(&h, &w, 2.5).unwrap() {
            assert!((p.power() - 2.5).abs() < 1e-12);
        }
    }

    #[test]
    fn single_user_has_no_leakage() {
        let shape = SystemShape::new(1, 4, 4, 2, 1).unwrap();
        let h = draw_rayleigh(shape, RandomSeed::new(4, 0));
        let sol = solve_unconstrained(&h, 1.0, &SolverOptions::default(), RandomSeed::new(5, 0)).unwrap();
        assert_eq!(sol.iterations, 0);
        assert!(sol.converged);
        assert_eq!(sol.leakage_trace, vec![0.0]);
    }

    #[test]
    fn backoff_boundary_cases() {
        let shape = SystemShape::new(1, 4, 4, 1, 4).unwrap();
        let flat = ComplexMatrix::from_element(4, 1, c(0.5));
        let sol = IASolution {
            precoders: vec![Precoder::new(0, flat.clone(), 4).unwrap()],
            combiners: vec![],
            leakage_trace: vec![0.0],
            converged: true,
            iterations: 0,
            reinitialized_blocks: 0,
        };
        let (scaled, res) = apply_backoff(&sol, &shape, 1.0).unwrap();
        assert!((res.scale_factors[0] - 1.0).abs() < 1e-15);
        assert!((scaled.precoders[0].matrix() - &flat).norm() < 1e-15);

        let spike = ComplexMatrix::from_column_slice(4, 1, &[c(1.0), c(0.0), c(0.0), c(0.0)]);
        let sol = IASolution { precoders: vec![Precoder::new(0, spike, 4).unwrap()], ..sol };
        let (scaled, res) = apply_backoff(&sol, &shape, 1.0).unwrap();
        assert!((res.scale_factors[0] - 0.5).abs() < 1e-15);
        assert!((scaled.precoders[0].power() - 0.25).abs() < 1e-15);

        let zero = IASolution {
            precoders: vec![Precoder::new(0, ComplexMatrix::zeros(4, 1), 4).unwrap()],
            ..sol
        };
        assert!(matches!(apply_backoff(&zero, &shape, 1.0), Err(Error::ZeroPrecoder { user: 0 })));
    }

    #[test]
    fn projection_redraws_vanished_blocks() {
        let mut p = vec![Precoder::new(0, ComplexMatrix::zeros(4, 1), 2).unwrap()];
        let n = project_strict(&mut RandomSeed::new(0, 0).rng(), &mut p, 2.0);
        assert_eq!(n, 2);
        for r in 0..2 {
            assert!((p[0].block_power(r) - 1.0).abs() < 1e-14);
        }
    }
}
