//! System shapes and channel realizations.
//!
//! Two generators are provided: i.i.d. Rayleigh fading, used for the
//! analytical validations, and a seven-cell distributed-antenna layout with
//! log-distance pathloss, lognormal shadowing per RRU-user link and Rayleigh
//! fast fading.

use std::fmt;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::mathcore::{complex_gaussian, ensure_finite, gaussian_matrix, ComplexMatrix, RandomSeed};

/// A symmetric `(Nt x Nr, Ns)^K` network whose transmitters each split their
/// `Nt` antennas evenly over `rrus` remote radio units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SystemShape {
    users: usize,
    tx_antennas: usize,
    rx_antennas: usize,
    streams: usize,
    rrus: usize,
}

impl SystemShape {
    pub fn new(
        users: usize,
        tx_antennas: usize,
        rx_antennas: usize,
        streams: usize,
        rrus: usize,
    ) -> Result<Self> {
        if users == 0 || tx_antennas == 0 || rx_antennas == 0 || streams == 0 || rrus == 0 {
            return Err(Error::InvalidShape("all dimensions must be at least 1".into()));
        }
        if tx_antennas % rrus != 0 {
            return Err(Error::InvalidShape(format!(
                "{rrus} RRUs do not evenly split {tx_antennas} transmit antennas"
            )));
        }
        if streams > tx_antennas.min(rx_antennas) {
            return Err(Error::InvalidShape(format!(
                "{streams} streams exceed min(Nt, Nr) = {}",
                tx_antennas.min(rx_antennas)
            )));
        }
        Ok(Self { users, tx_antennas, rx_antennas, streams, rrus })
    }

    /// Per-antenna constraints: every antenna is its own RRU.
    pub fn per_antenna(users: usize, tx_antennas: usize, rx_antennas: usize, streams: usize) -> Result<Self> {
        Self::new(users, tx_antennas, rx_antennas, streams, tx_antennas)
    }

    pub fn users(&self) -> usize {
        self.users
    }
    pub fn tx_antennas(&self) -> usize {
        self.tx_antennas
    }
    pub fn rx_antennas(&self) -> usize {
        self.rx_antennas
    }
    pub fn streams(&self) -> usize {
        self.streams
    }
    pub fn rrus(&self) -> usize {
        self.rrus
    }
    pub fn antennas_per_rru(&self) -> usize {
        self.tx_antennas / self.rrus
    }

    /// Same antenna counts with a different RRU split.
    pub fn with_rrus(&self, rrus: usize) -> Result<Self> {
        Self::new(self.users, self.tx_antennas, self.rx_antennas, self.streams, rrus)
    }
}

impl fmt::Display for SystemShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}x{},{})^{} rru={}",
            self.tx_antennas, self.rx_antennas, self.streams, self.users, self.rrus
        )
    }
}

/// Transmit power budget per transmitter and noise power per receive antenna.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerConfig {
    total_power: f64,
    noise_power: f64,
}

impl PowerConfig {
    pub fn new(total_power: f64, noise_power: f64) -> Result<Self> {
        if !(total_power > 0.0 && total_power.is_finite()) || !(noise_power > 0.0 && noise_power.is_finite()) {
            return Err(Error::DomainError("powers must be positive and finite".into()));
        }
        Ok(Self { total_power, noise_power })
    }

    /// Unit transmit power with noise set so that `P / σ²` equals `snr_db`.
    pub fn from_snr_db(snr_db: f64) -> Result<Self> {
        Self::new(1.0, 10f64.powf(-snr_db / 10.0))
    }

    pub fn total_power(&self) -> f64 {
        self.total_power
    }
    pub fn noise_power(&self) -> f64 {
        self.noise_power
    }
}

/// The `K x K` grid of `Nr x Nt` channels; `link(k, l)` is the channel from
/// transmitter `l` to receiver `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    shape: SystemShape,
    links: Vec<ComplexMatrix>,
}

impl ChannelSet {
    /// Builds a channel set from row-major links (`links[k * K + l]`).
    pub fn from_links(shape: SystemShape, links: Vec<ComplexMatrix>) -> Result<Self> {
        let k = shape.users();
        if links.len() != k * k {
            return Err(Error::DimensionMismatch(format!(
                "expected {} links, got {}",
                k * k,
                links.len()
            )));
        }
        for h in &links {
            if h.nrows() != shape.rx_antennas() || h.ncols() != shape.tx_antennas() {
                return Err(Error::DimensionMismatch(format!(
                    "link is {}x{}, shape needs {}x{}",
                    h.nrows(),
                    h.ncols(),
                    shape.rx_antennas(),
                    shape.tx_antennas()
                )));
            }
            ensure_finite(h)?;
        }
        Ok(Self { shape, links })
    }

    pub fn shape(&self) -> &SystemShape {
        &self.shape
    }

    pub fn users(&self) -> usize {
        self.shape.users()
    }

    pub fn link(&self, rx: usize, tx: usize) -> &ComplexMatrix {
        &self.links[rx * self.shape.users() + tx]
    }

    pub fn links(&self) -> &[ComplexMatrix] {
        &self.links
    }

    /// Every link multiplied by `factor` (e.g. to express gains in noise units).
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            shape: self.shape,
            links: self.links.iter().map(|h| h.scale(factor)).collect(),
        }
    }

    /// The reciprocal network: receivers become transmitters and
    /// `H'_{kl} = H_{lk}*`. RRU structure is dropped (one RRU per node).
    pub fn reciprocal(&self) -> Result<Self> {
        let s = &self.shape;
        let shape = SystemShape::new(s.users(), s.rx_antennas(), s.tx_antennas(), s.streams(), 1)?;
        let k = s.users();
        let links = (0..k * k)
            .map(|i| self.link(i % k, i / k).adjoint())
            .collect();
        Ok(Self { shape, links })
    }
}

/// i.i.d. CN(0, 1) channels for every link.
pub fn draw_rayleigh(shape: SystemShape, seed: RandomSeed) -> ChannelSet {
    let mut rng = seed.rng();
    let k = shape.users();
    let links = (0..k * k)
        .map(|_| gaussian_matrix(&mut rng, shape.rx_antennas(), shape.tx_antennas()))
        .collect();
    ChannelSet { shape, links }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize, serde::Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn polar(radius: f64, angle_rad: f64) -> Self {
        Self::new(radius * angle_rad.cos(), radius * angle_rad.sin())
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn offset(&self, d: &Point) -> Point {
        Point::new(self.x + d.x, self.y + d.y)
    }
}

/// Large-scale propagation parameters.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Propagation {
    pub pathloss_exponent: f64,
    /// Loss at the 1 m reference distance.
    pub reference_loss_db: f64,
    pub shadow_std_db: f64,
}

impl Default for Propagation {
    fn default() -> Self {
        Self { pathloss_exponent: 3.7, reference_loss_db: 38.5, shadow_std_db: 8.0 }
    }
}

impl Propagation {
    /// Distances below this are clamped before evaluating the pathloss.
    pub const MIN_DISTANCE_M: f64 = 1.0;

    pub fn pathloss_db(&self, distance_m: f64) -> f64 {
        self.reference_loss_db + 10.0 * self.pathloss_exponent * distance_m.max(Self::MIN_DISTANCE_M).log10()
    }
}

/// Number of cells in the hexagonal cluster.
pub const CLUSTER_CELLS: usize = 7;

/// Seven hexagonal cells (centre cell at the origin) with the same RRU
/// layout in every cell and one user per cell.
///
/// Hexagons have circumradius `cell_radius` with vertices at 0°, 60°, ...;
/// neighbouring centres therefore sit `√3·R` away at 30°, 90°, ....
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkGeometry {
    pub cell_radius: f64,
    pub cell_centers: Vec<Point>,
    pub rru_offsets: Vec<Point>,
    pub user_positions: Vec<Point>,
    pub propagation: Propagation,
}

impl NetworkGeometry {
    /// Cluster layout with users not yet placed (all at their cell centres).
    pub fn cluster(cell_radius: f64, propagation: Propagation) -> Result<Self> {
        if !(cell_radius > 0.0 && cell_radius.is_finite()) {
            return Err(Error::DomainError(format!("cell radius must be positive, got {cell_radius}")));
        }
        let spacing = 3f64.sqrt() * cell_radius;
        let mut cell_centers = vec![Point::ORIGIN];
        cell_centers.extend((0..6).map(|j| {
            Point::polar(spacing, (30.0 + 60.0 * j as f64).to_radians())
        }));
        let mut rru_offsets = vec![Point::ORIGIN];
        rru_offsets.extend((0..4).map(|j| {
            Point::polar(2.0 * cell_radius / 3.0, (90.0 * j as f64).to_radians())
        }));
        let user_positions = cell_centers.clone();
        Ok(Self { cell_radius, cell_centers, rru_offsets, user_positions, propagation })
    }

    /// The same cells and users served by one co-located array per cell.
    pub fn colocated(&self) -> Self {
        Self { rru_offsets: vec![Point::ORIGIN], ..self.clone() }
    }

    pub fn cells(&self) -> usize {
        self.cell_centers.len()
    }

    pub fn rrus(&self) -> usize {
        self.rru_offsets.len()
    }

    pub fn rru_position(&self, cell: usize, rru: usize) -> Point {
        self.cell_centers[cell].offset(&self.rru_offsets[rru])
    }

    pub fn contains(&self, cell: usize, p: &Point) -> bool {
        let c = &self.cell_centers[cell];
        hexagon_contains(self.cell_radius, &Point::new(p.x - c.x, p.y - c.y))
    }

    /// Uniform position inside `cell`, by rejection from the bounding box.
    pub fn sample_in_cell<R: Rng + ?Sized>(&self, rng: &mut R, cell: usize) -> Point {
        let r = self.cell_radius;
        let h = r * 3f64.sqrt() / 2.0;
        loop {
            let local = Point::new(rng.random_range(-r..=r), rng.random_range(-h..=h));
            if hexagon_contains(r, &local) {
                return self.cell_centers[cell].offset(&local);
            }
        }
    }

    /// Redraws every user uniformly inside its own cell.
    pub fn place_users_uniformly<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        self.user_positions = (0..self.cells()).map(|c| self.sample_in_cell(rng, c)).collect();
    }
}

/// Membership test for a hexagon of circumradius `r` centred at the origin
/// with vertices on the x axis.
pub fn hexagon_contains(r: f64, p: &Point) -> bool {
    let s3 = 3f64.sqrt();
    let (x, y) = (p.x.abs(), p.y.abs());
    y <= s3 / 2.0 * r && s3 * x + y <= s3 * r
}

/// Seven-cell cluster with five RRUs per cell (centre plus four at `2R/3`
/// on the axes) and one uniformly placed user per cell.
pub fn build_geometry(cell_radius: f64, users: usize, seed: RandomSeed) -> Result<NetworkGeometry> {
    if users != CLUSTER_CELLS {
        return Err(Error::UnsupportedTopology(format!(
            "the hexagonal cluster serves exactly {CLUSTER_CELLS} users, got {users}"
        )));
    }
    let mut geom = NetworkGeometry::cluster(cell_radius, Propagation::default())?;
    geom.place_users_uniformly(&mut seed.rng());
    Ok(geom)
}

/// A distributed-antenna channel draw together with the large-scale gains
/// that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct DasRealization {
    pub channels: ChannelSet,
    /// Large-scale gain in dB, indexed `[(k * K + l) * N_RRU + r]` for the
    /// link from RRU `r` of transmitter `l` to receiver `k`.
    pub gains_db: Vec<f64>,
}

impl DasRealization {
    pub fn gain_db(&self, rx: usize, tx: usize, rru: usize) -> f64 {
        let s = self.channels.shape();
        self.gains_db[(rx * s.users() + tx) * s.rrus() + rru]
    }

    pub fn gain(&self, rx: usize, tx: usize, rru: usize) -> f64 {
        10f64.powf(self.gain_db(rx, tx, rru) / 10.0)
    }
}

/// Channels for a geometry: the `Nt/N_RRU` columns of RRU `r` of
/// transmitter `l` seen by user `k` are `sqrt(g_{k,l,r})` times i.i.d.
/// CN(0, 1) entries, with `g` the pathloss plus lognormal shadowing.
///
/// Shadowing and fast fading use separate sub-streams of `seed`.
pub fn draw_das_channels(geom: &NetworkGeometry, shape: SystemShape, seed: RandomSeed) -> Result<DasRealization> {
    if shape.rrus() != geom.rrus() {
        return Err(Error::GeometryMismatch(format!(
            "shape has {} RRUs per transmitter, geometry has {}",
            shape.rrus(),
            geom.rrus()
        )));
    }
    if shape.users() != geom.cells() || geom.user_positions.len() != geom.cells() {
        return Err(Error::GeometryMismatch(format!(
            "shape has {} users, geometry has {} cells and {} users",
            shape.users(),
            geom.cells(),
            geom.user_positions.len()
        )));
    }
    let k = shape.users();
    let n_rru = shape.rrus();
    let per_rru = shape.antennas_per_rru();
    let prop = geom.propagation;

    let mut shadow_rng = seed.child(0).rng();
    let shadow = Normal::new(0.0, prop.shadow_std_db.max(0.0))
        .map_err(|e| Error::DomainError(e.to_string()))?;
    let mut gains_db = Vec::with_capacity(k * k * n_rru);
    for rx in 0..k {
        for tx in 0..k {
            for r in 0..n_rru {
                let d = geom.user_positions[rx].distance(&geom.rru_position(tx, r));
                let s = if prop.shadow_std_db > 0.0 { shadow.sample(&mut shadow_rng) } else { 0.0 };
                gains_db.push(-prop.pathloss_db(d) + s);
            }
        }
    }

    let mut fading_rng = seed.child(1).rng();
    let mut links = Vec::with_capacity(k * k);
    for rx in 0..k {
        for tx in 0..k {
            let mut h = ComplexMatrix::zeros(shape.rx_antennas(), shape.tx_antennas());
            for i in 0..shape.rx_antennas() {
                for j in 0..shape.tx_antennas() {
                    let r = j / per_rru;
                    let amp = 10f64.powf(gains_db[(rx * k + tx) * n_rru + r] / 20.0);
                    h[(i, j)] = complex_gaussian(&mut fading_rng) * amp;
                }
            }
            links.push(h);
        }
    }
    let channels = ChannelSet::from_links(shape, links)?;
    Ok(DasRealization { channels, gains_db })
}
