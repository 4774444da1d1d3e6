//! Achievable rates and the statistics of the power back-off factor.

use nalgebra::Cholesky;
use rayon::prelude::*;

use crate::alignment::{Combiner, Precoder};
use crate::channel::ChannelSet;
use crate::error::{Error, Result};
use crate::mathcore::{chisq_cdf, haar_frame_from, real_chisq_cdf, ComplexMatrix, RandomSeed};

#[derive(Debug, Clone, PartialEq)]
pub struct RateSample {
    /// Bits/s/Hz for each user.
    pub per_user_rate: Vec<f64>,
    pub sum_rate: f64,
}

impl RateSample {
    pub fn from_per_user(per_user_rate: Vec<f64>) -> Self {
        let sum_rate = per_user_rate.iter().sum();
        Self { per_user_rate, sum_rate }
    }
}

/// `log2 det(I + S* R^{-1} S)` for Hermitian positive definite `R`.
fn log2_det_gain(r: ComplexMatrix, s: &ComplexMatrix) -> Result<f64> {
    let chol = Cholesky::new(r).ok_or_else(|| Error::Numerical("covariance is not positive definite".into()))?;
    let x = chol
        .l()
        .solve_lower_triangular(s)
        .ok_or_else(|| Error::Numerical("singular covariance factor".into()))?;
    let m = ComplexMatrix::identity(s.ncols(), s.ncols()) + x.adjoint() * x;
    let chol = Cholesky::new(m).ok_or_else(|| Error::Numerical("gain matrix is not positive definite".into()))?;
    let l = chol.l();
    let rate = 2.0 * (0..l.nrows()).map(|i| l[(i, i)].re.log2()).sum::<f64>();
    Ok(rate.max(0.0))
}

fn check_noise(noise_power: f64) -> Result<()> {
    if noise_power > 0.0 && noise_power.is_finite() {
        Ok(())
    } else {
        Err(Error::DomainError(format!("noise power must be positive, got {noise_power}")))
    }
}

/// Per-user `log2 det(I + (σ²I + Σ_{l≠k} H_kl F_l F_l* H_kl*)^{-1} H_kk F_k F_k* H_kk*)`:
/// Gaussian signalling, optimal receive processing, interference treated
/// as noise. Combiners are not used.
pub fn sum_rate(channels: &ChannelSet, precoders: &[Precoder], noise_power: f64) -> Result<RateSample> {
    check_noise(noise_power)?;
    let k = channels.users();
    if precoders.len() != k {
        return Err(Error::DimensionMismatch(format!("{} precoders for {k} users", precoders.len())));
    }
    let nr = channels.shape().rx_antennas();
    let rates = (0..k)
        .map(|rx| {
            let mut cov = ComplexMatrix::identity(nr, nr).scale(noise_power);
            for tx in (0..k).filter(|&tx| tx != rx) {
                let b = channels.link(rx, tx) * precoders[tx].matrix();
                cov += &b * b.adjoint();
            }
            let s = channels.link(rx, rx) * precoders[rx].matrix();
            log2_det_gain(cov, &s)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RateSample::from_per_user(rates))
}

/// Rate after the zero-forcing combiners:
/// `log2 det((σ²I + J_k)^{-1}(σ²I + J_k + S_k))` with `J_k` the residual
/// interference and `S_k` the desired signal covariance after `W_k`.
pub fn zf_rate(
    channels: &ChannelSet,
    precoders: &[Precoder],
    combiners: &[Combiner],
    noise_power: f64,
) -> Result<RateSample> {
    check_noise(noise_power)?;
    let k = channels.users();
    if precoders.len() != k || combiners.len() != k {
        return Err(Error::DimensionMismatch(format!(
            "{} precoders and {} combiners for {k} users",
            precoders.len(),
            combiners.len()
        )));
    }
    let rates = (0..k)
        .map(|rx| {
            let w = combiners[rx].matrix();
            if w.nrows() != channels.shape().rx_antennas() {
                return Err(Error::DimensionMismatch(format!(
                    "combiner has {} rows, receivers have {} antennas",
                    w.nrows(),
                    channels.shape().rx_antennas()
                )));
            }
            let ns = w.ncols();
            let mut cov = ComplexMatrix::identity(ns, ns).scale(noise_power);
            for tx in (0..k).filter(|&tx| tx != rx) {
                let b = w.adjoint() * (channels.link(rx, tx) * precoders[tx].matrix());
                cov += &b * b.adjoint();
            }
            let t = w.adjoint() * (channels.link(rx, rx) * precoders[rx].matrix());
            log2_det_gain(cov, &t)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RateSample::from_per_user(rates))
}

/// Power applied to the chi-squared CDF in the back-off approximation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExponentVariant {
    /// `Q(·)^Nt`.
    TxAntennas,
    /// `Q(·)^N_RRU`, one factor per RRU block.
    Rrus,
}

/// How "chi-squared with r degrees of freedom" is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChiSquareConvention {
    /// Squared norm of `r` standard complex Gaussians, `Gamma(r, 1)`.
    Complex,
    /// Sum of `r` squared standard real Gaussians.
    Real,
}

/// Analytical approximation of the distribution of `β² = max_r ‖F^(r)‖_F²`
/// for Haar precoders:
///
/// `P(β² ≤ x) ≈ Q(Nt·x; Ns·Nt/N_RRU)^e`, with `e` chosen by
/// [`ExponentVariant`] and `x` on the orthonormal-frame scale (`‖F‖_F² = Ns`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackoffModel {
    tx_antennas: usize,
    streams: usize,
    rrus: usize,
    pub exponent: ExponentVariant,
    pub convention: ChiSquareConvention,
}

impl BackoffModel {
    pub fn new(tx_antennas: usize, streams: usize, rrus: usize) -> Result<Self> {
        if tx_antennas == 0 || streams == 0 || rrus == 0 || tx_antennas % rrus != 0 || streams > tx_antennas {
            return Err(Error::InvalidShape(format!(
                "invalid back-off model Nt={tx_antennas}, Ns={streams}, N_RRU={rrus}"
            )));
        }
        Ok(Self {
            tx_antennas,
            streams,
            rrus,
            exponent: ExponentVariant::TxAntennas,
            convention: ChiSquareConvention::Complex,
        })
    }

    pub fn with_variant(mut self, exponent: ExponentVariant, convention: ChiSquareConvention) -> Self {
        self.exponent = exponent;
        self.convention = convention;
        self
    }

    /// All four combinations of exponent and convention.
    pub fn variants(&self) -> [BackoffModel; 4] {
        use ChiSquareConvention::*;
        use ExponentVariant::*;
        [
            self.with_variant(TxAntennas, Complex),
            self.with_variant(Rrus, Complex),
            self.with_variant(TxAntennas, Real),
            self.with_variant(Rrus, Real),
        ]
    }

    pub fn tx_antennas(&self) -> usize {
        self.tx_antennas
    }
    pub fn streams(&self) -> usize {
        self.streams
    }
    pub fn rrus(&self) -> usize {
        self.rrus
    }

    /// CDF of `β²` for orthonormal frames (`‖F‖_F² = Ns`).
    pub fn frame_cdf(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(Error::DomainError(format!("back-off factor must be non-negative, got {x}")));
        }
        let nt = self.tx_antennas as f64;
        let dof = (self.streams * self.tx_antennas) as f64 / self.rrus as f64;
        let q = match self.convention {
            ChiSquareConvention::Complex => chisq_cdf(nt * x, dof)?,
            ChiSquareConvention::Real => real_chisq_cdf(nt * x, dof)?,
        };
        let e = match self.exponent {
            ExponentVariant::TxAntennas => self.tx_antennas,
            ExponentVariant::Rrus => self.rrus,
        };
        Ok(q.powi(e as i32))
    }

    /// CDF of `β²` for precoders with `‖F‖_F² = total_power`, obtained by
    /// mapping `x → x·Ns/P` onto the frame scale.
    pub fn cdf(&self, x: f64, total_power: f64) -> Result<f64> {
        if !(total_power > 0.0) {
            return Err(Error::DomainError(format!("total power must be positive, got {total_power}")));
        }
        self.frame_cdf(x * self.streams as f64 / total_power)
    }

    /// `E[log2(N_RRU β² / P)]`, the per-stream high-SNR back-off loss.
    pub fn expected_log_backoff(&self, total_power: f64) -> Result<f64> {
        let lo = total_power / self.rrus as f64;
        let hi = total_power;
        let g = |x: f64| (self.rrus as f64 * x / total_power).log2();
        expected_of_increasing(g, |x| 1.0 / (x * std::f64::consts::LN_2), |x| self.cdf(x, total_power), lo, hi)
    }
}

/// `P(β² ≤ x)` for back-off factors of precoders at power `total_power`.
pub fn beta2_cdf(model: &BackoffModel, x: f64, total_power: f64) -> Result<f64> {
    model.cdf(x, total_power)
}

/// Absolute tolerance of the rate-loss quadrature, in bits.
pub const QUADRATURE_TOL: f64 = 1e-6;
const QUADRATURE_MAX_DEPTH: u32 = 48;

/// `E[g(X)]` for `X` supported on `[lo, hi]` (mass outside is clamped to the
/// end points) using `E[g] = g(hi) − ∫ g'(x) F(x) dx`.
pub fn expected_of_increasing<G, D, F>(g: G, dg: D, cdf: F, lo: f64, hi: f64) -> Result<f64>
where
    G: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
    F: Fn(f64) -> Result<f64>,
{
    if !(hi > lo) {
        return Ok(g(hi));
    }
    let integrand = |x: f64| -> Result<f64> { Ok(dg(x) * cdf(x)?.clamp(0.0, 1.0)) };
    Ok(g(hi) - adaptive_simpson(&integrand, lo, hi, QUADRATURE_TOL)?)
}

fn adaptive_simpson<F>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let fa = f(a)?;
    let fb = f(b)?;
    let m = 0.5 * (a + b);
    let fm = f(m)?;
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, QUADRATURE_MAX_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm)?;
    let frm = f(rm)?;
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(Error::QuadratureFailure { tol: QUADRATURE_TOL, max_depth: QUADRATURE_MAX_DEPTH });
    }
    Ok(simpson_step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)?
        + simpson_step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)?)
}

/// Predicted mean sum-rate loss of power back-off at high SNR:
/// `K · Ns · E[log2(N_RRU β² / P)]`. Independent of the noise power.
pub fn expected_rate_loss(model: &BackoffModel, users: usize, total_power: f64, _noise_power: f64) -> Result<f64> {
    Ok(users as f64 * model.streams as f64 * model.expected_log_backoff(total_power)?)
}

/// Monte Carlo sample of `β²` for Haar precoders scaled to `total_power`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalBeta2 {
    /// Sorted ascending.
    pub samples: Vec<f64>,
    /// How often each RRU block attained the maximum.
    pub argmax_counts: Vec<usize>,
    pub total_power: f64,
    pub rrus: usize,
}

impl EmpiricalBeta2 {
    /// Fraction of samples `≤ x`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.samples.partition_point(|&s| s <= x) as f64 / self.samples.len() as f64
    }

    /// Sample mean of `log2(N_RRU β² / P)`.
    pub fn mean_log_backoff(&self) -> f64 {
        let n = self.rrus as f64;
        self.samples.iter().map(|b| (n * b / self.total_power).log2()).sum::<f64>() / self.samples.len() as f64
    }

    /// Kolmogorov-Smirnov distance to a continuous CDF.
    pub fn ks_distance<F: Fn(f64) -> Result<f64>>(&self, cdf: F) -> Result<f64> {
        let n = self.samples.len() as f64;
        let mut worst = 0.0f64;
        for (i, &x) in self.samples.iter().enumerate() {
            let c = cdf(x)?;
            worst = worst.max((c - i as f64 / n).abs()).max(((i + 1) as f64 / n - c).abs());
        }
        Ok(worst)
    }
}

/// `n_draws` samples of `max_r ‖F^(r)‖_F²` with `F` a Haar `Nt x Ns` frame
/// scaled to `‖F‖_F² = total_power`. Draw `i` uses its own sub-seed, so the
/// result does not depend on thread scheduling.
pub fn empirical_beta2(model: &BackoffModel, total_power: f64, n_draws: usize, seed: RandomSeed) -> Result<EmpiricalBeta2> {
    if n_draws == 0 {
        return Err(Error::DomainError("at least one draw is required".into()));
    }
    let nt = model.tx_antennas;
    let ns = model.streams;
    let rrus = model.rrus;
    let per = nt / rrus;
    let scale = total_power / ns as f64;
    let draws: Vec<(f64, usize)> = (0..n_draws)
        .into_par_iter()
        .map(|i| {
            let mut rng = seed.child(i as u64).rng();
            let f = haar_frame_from(&mut rng, nt, ns)?;
            let mut best = (f64::NEG_INFINITY, 0);
            for r in 0..rrus {
                let p = f.rows(r * per, per).norm_squared() * scale;
                if p > best.0 {
                    best = (p, r);
                }
            }
            Ok(best)
        })
        .collect::<Result<_>>()?;
    let mut argmax_counts = vec![0; rrus];
    let mut samples = Vec::with_capacity(n_draws);
    for (b, r) in draws {
        argmax_counts[r] += 1;
        samples.push(b);
    }
    samples.sort_by(f64::total_cmp);
    Ok(EmpiricalBeta2 { samples, argmax_counts, total_power, rrus })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::SystemShape;
    use num_complex::Complex64;

    #[test]
    fn isotropic_single_user_rate() {
        let shape = SystemShape::new(1, 2, 2, 2, 1).unwrap();
        let h = ChannelSet::from_links(shape, vec![ComplexMatrix::identity(2, 2)]).unwrap();
        let (p, noise) = (4.0, 0.5);
        let f = ComplexMatrix::identity(2, 2).scale((p / 2.0f64).sqrt());
        let r = sum_rate(&h, &[Precoder::new(0, f, 1).unwrap()], noise).unwrap();
        let expected = 2.0 * (1.0 + p / (2.0 * noise)).log2();
        assert!((r.sum_rate - expected).abs() < 1e-12);
    }

    #[test]
    fn zero_precoders_give_zero_rate() {
        let shape = SystemShape::new(2, 2, 2, 1, 1).unwrap();
        let h = crate::channel::draw_rayleigh(shape, RandomSeed::new(0, 0));
        let f: Vec<_> = (0..2).map(|k| Precoder::new(k, ComplexMatrix::zeros(2, 1), 1).unwrap()).collect();
        assert_eq!(sum_rate(&h, &f, 1.0).unwrap().sum_rate, 0.0);
        assert!(sum_rate(&h, &f, 0.0).is_err());
    }

    #[test]
    fn combiner_orthogonal_to_signal_gives_zero() {
        let shape = SystemShape::new(1, 2, 2, 1, 1).unwrap();
        let h = ChannelSet::from_links(shape, vec![ComplexMatrix::identity(2, 2)]).unwrap();
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let f = ComplexMatrix::from_column_slice(2, 1, &[one, zero]);
        let w = ComplexMatrix::from_column_slice(2, 1, &[zero, one]);
        let r = zf_rate(&h, &[Precoder::new(0, f, 1).unwrap()], &[Combiner::new(0, w)], 0.1).unwrap();
        assert_eq!(r.sum_rate, 0.0);
    }

    #[test]
    fn cdf_limits_and_domain() {
        let m = BackoffModel::new(8, 1, 8).unwrap();
        assert_eq!(m.frame_cdf(0.0).unwrap(), 0.0);
        assert!((m.frame_cdf(1e3).unwrap() - 1.0).abs() < 1e-12);
        assert!(m.frame_cdf(-0.1).is_err());
        let mut prev = 0.0;
        for i in 0..200 {
            let c = m.cdf(i as f64 * 0.01, 2.0).unwrap();
            assert!(c >= prev);
            prev = c;
        }
        assert!(BackoffModel::new(6, 1, 4).is_err());
    }

    #[test]
    fn degenerate_backoff_costs_nothing() {
        let m = BackoffModel::new(4, 1, 1).unwrap();
        assert_eq!(expected_rate_loss(&m, 3, 1.0, 0.1).unwrap(), 0.0);
        let v = expected_of_increasing(|x| (4.0 * x).log2(), |x| 1.0 / (x * std::f64::consts::LN_2), |_| Ok(1.0), 0.25, 1.0)
            .unwrap();
        assert!(v.abs() < QUADRATURE_TOL);
    }

    #[test]
    fn rate_loss_is_nonnegative() {
        for (nt, ns, rrus) in [(2, 1, 2), (4, 1, 4), (8, 2, 4), (16, 1, 16)] {
            for m in BackoffModel::new(nt, ns, rrus).unwrap().variants() {
                assert!(expected_rate_loss(&m, 3, 1.0, 1.0).unwrap() >= 0.0);
            }
        }
    }

    #[test]
    fn empirical_support_and_single_block() {
        let m = BackoffModel::new(8, 2, 4).unwrap();
        let e = empirical_beta2(&m, 3.0, 2000, RandomSeed::new(1, 0)).unwrap();
        assert!(e.samples.iter().all(|&b| b >= 3.0 / 4.0 - 1e-12 && b <= 3.0 + 1e-12));
        let m = BackoffModel::new(8, 2, 1).unwrap();
        let e = empirical_beta2(&m, 3.0, 100, RandomSeed::new(1, 0)).unwrap();
        assert!(e.samples.iter().all(|&b| (b - 3.0).abs() < 1e-12));
        assert!(empirical_beta2(&m, 3.0, 0, RandomSeed::new(1, 0)).is_err());
    }
}
