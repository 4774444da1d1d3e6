//! RRU selection: each user is served by the strongest RRU of its own cell
//! with single-user eigenbeamforming.

use crate::alignment::Precoder;
use crate::channel::DasRealization;
use crate::error::{Error, Result};
use crate::mathcore::{smallest_eigvecs, ComplexMatrix};
use crate::metrics::{sum_rate, RateSample};

/// Index of the serving-cell RRU with the largest large-scale gain towards
/// user `k`. Fast fading plays no part.
pub fn select_rru(das: &DasRealization, k: usize) -> usize {
    let rrus = das.channels.shape().rrus();
    (0..rrus)
        .max_by(|&a, &b| das.gain_db(k, k, a).total_cmp(&das.gain_db(k, k, b)).then(b.cmp(&a)))
        .unwrap_or(0)
}

/// Precoders that radiate only from the selected RRU, along the `Ns`
/// dominant right singular vectors of its subchannel, with `P / N_RRU`
/// split equally across streams.
pub fn rru_selection_precoders(das: &DasRealization, total_power: f64) -> Result<Vec<Precoder>> {
    let shape = *das.channels.shape();
    let per = shape.antennas_per_rru();
    let ns = shape.streams();
    if ns > per {
        return Err(Error::StreamsExceedRruAntennas { streams: ns, per_rru: per });
    }
    let amp = (total_power / shape.rrus() as f64 / ns as f64).sqrt();
    (0..shape.users())
        .map(|k| {
            let r = select_rru(das, k);
            let sub = das.channels.link(k, k).columns(r * per, per).into_owned();
            let gram = sub.adjoint() * &sub;
            let v = smallest_eigvecs(&(-gram), ns)?;
            let mut f = ComplexMatrix::zeros(shape.tx_antennas(), ns);
            f.rows_mut(r * per, per).copy_from(&v.scale(amp));
            Precoder::new(k, f, shape.rrus())
        })
        .collect()
}

/// Rates of the RRU selection baseline, treating every other cell's
/// transmission as noise.
pub fn rru_selection_baseline(das: &DasRealization, total_power: f64, noise_power: f64) -> Result<RateSample> {
    let precoders = rru_selection_precoders(das, total_power)?;
    sum_rate(&das.channels, &precoders, noise_power)
}
