//! Numerical primitives shared by the solvers and the experiment drivers.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Dense complex matrix. Row/column counts are at least one wherever a
/// matrix enters a public operation, and entries are finite.
pub type ComplexMatrix = DMatrix<Complex64>;

/// Maximum entrywise asymmetry accepted by [`smallest_eigvecs`], relative to
/// `max(1, max |A_ij|)`.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Orthonormality tolerance for eigenvector and combiner frames.
pub const ORTHONORMAL_TOL: f64 = 1e-9;

/// A reproducible random stream identifier.
///
/// Each `(master, stream)` pair selects an independent ChaCha8 stream: the
/// master value keys the generator and the stream value selects the ChaCha
/// stream counter, so trials sharing a master seed never overlap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct RandomSeed {
    pub master: u64,
    pub stream: u64,
}

impl RandomSeed {
    pub const fn new(master: u64, stream: u64) -> Self {
        Self { master, stream }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master);
        rng.set_stream(self.stream);
        rng
    }

    /// Sub-seed for an independent purpose within the same trial
    /// (channels, initialisation, geometry, ...).
    pub fn child(&self, tag: u64) -> Self {
        Self {
            master: splitmix64(self.master ^ splitmix64(tag.wrapping_add(0x5eed))),
            stream: self.stream,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// One draw from CN(0, 1).
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// `rows x cols` matrix of i.i.d. CN(0, 1) entries, filled row-major.
pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    let data: Vec<Complex64> = (0..rows * cols).map(|_| complex_gaussian(rng)).collect();
    DMatrix::from_row_slice(rows, cols, &data)
}

pub fn ensure_finite(m: &ComplexMatrix) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

/// Largest entrywise deviation `|A - A*|`.
pub fn hermitian_asymmetry(a: &ComplexMatrix) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `‖V*V − I‖_F`.
pub fn orthonormality_error(v: &ComplexMatrix) -> f64 {
    let gram = v.adjoint() * v;
    (gram - ComplexMatrix::identity(v.ncols(), v.ncols())).norm()
}

/// Eigenvectors belonging to the `m` smallest eigenvalues of a Hermitian
/// matrix, returned as the columns of an `n x m` frame together with those
/// eigenvalues in ascending order.
///
/// Ties are broken by the solver's original column index. Each column is
/// rotated so that its entry of largest magnitude (lowest row on ties) is
/// real and non-negative.
pub fn smallest_eigenpairs(a: &ComplexMatrix, m: usize) -> Result<(ComplexMatrix, Vec<f64>)> {
    let (vectors, values) = sorted_eigen(a, m)?;
    Ok((vectors.columns(0, m).into_owned(), values[..m].to_vec()))
}

/// Full eigendecomposition with eigenvalues ascending and the phase
/// convention applied to every column.
fn sorted_eigen(a: &ComplexMatrix, m: usize) -> Result<(ComplexMatrix, Vec<f64>)> {
    let n = a.nrows();
    if n == 0 || a.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "expected a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if m == 0 || m > n {
        return Err(Error::DimensionMismatch(format!(
            "requested {m} eigenvectors of a {n}x{n} matrix"
        )));
    }
    ensure_finite(a)?;
    let scale = a.iter().fold(1.0f64, |acc, z| acc.max(z.norm()));
    let asymmetry = hermitian_asymmetry(a);
    if asymmetry > HERMITIAN_TOL * scale {
        return Err(Error::NonHermitianInput { asymmetry });
    }

    let sym = (a + a.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[i]
            .total_cmp(&eig.eigenvalues[j])
            .then(i.cmp(&j))
    });

    let mut frame = ComplexMatrix::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (col, &idx) in order.iter().enumerate() {
        let v = eig.eigenvectors.column(idx);
        let mut pivot = 0;
        for row in 1..n {
            if v[row].norm() > v[pivot].norm() {
                pivot = row;
            }
        }
        let p = v[pivot];
        let phase = if p.norm() > 0.0 {
            p.conj() / p.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        frame.set_column(col, &(v * phase));
        values.push(eig.eigenvalues[idx]);
    }
    Ok((frame, values))
}

/// Like [`smallest_eigvecs`], but when more than `m` eigenvalues tie for
/// the smallest (within `tie_tol` times the spectral radius) the frame is
/// taken from that whole eigenspace as the orthonormal frame closest to
/// `reference` in Frobenius norm.
pub fn smallest_eigvecs_near(
    a: &ComplexMatrix,
    m: usize,
    reference: &ComplexMatrix,
    tie_tol: f64,
) -> Result<ComplexMatrix> {
    let (vectors, values) = sorted_eigen(a, m)?;
    if reference.nrows() != a.nrows() || reference.ncols() != m {
        return Err(Error::DimensionMismatch(format!(
            "reference frame is {}x{}, expected {}x{m}",
            reference.nrows(),
            reference.ncols(),
            a.nrows()
        )));
    }
    let radius = values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let cutoff = values[m - 1] + tie_tol * radius;
    let d = values.iter().take_while(|&&v| v <= cutoff).count().max(m);
    if d == m {
        return Ok(vectors.columns(0, m).into_owned());
    }
    let e = vectors.columns(0, d);
    let c = e.adjoint() * reference;
    let svd = c.svd(true, true);
    let (u, v_t) = (svd.u.expect("requested"), svd.v_t.expect("requested"));
    Ok(e * (u * v_t))
}

/// The `m` least dominant eigenvectors of a Hermitian matrix.
pub fn smallest_eigvecs(a: &ComplexMatrix, m: usize) -> Result<ComplexMatrix> {
    smallest_eigenpairs(a, m).map(|(v, _)| v)
}

/// Haar-distributed `n x m` frame (orthonormal columns) drawn from `rng`.
///
/// A CN(0,1) matrix is orthonormalised by Householder QR and each column of
/// Q is rotated so that the matching diagonal entry of R is positive real,
/// which makes the result uniform on the Stiefel manifold.
pub fn haar_frame_from<R: Rng + ?Sized>(rng: &mut R, n: usize, m: usize) -> Result<ComplexMatrix> {
    if n == 0 || m == 0 || m > n {
        return Err(Error::DimensionMismatch(format!(
            "cannot draw a {n}x{m} orthonormal frame"
        )));
    }
    let g = gaussian_matrix(rng, n, m);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..m {
        let d = r[(j, j)];
        if d.norm() > 0.0 {
            let phase = d / d.norm();
            let col = q.column(j) * phase;
            q.set_column(j, &col);
        }
    }
    Ok(q)
}

/// Haar-distributed `n x m` frame reproducible from `seed`.
pub fn haar_frame(n: usize, m: usize, seed: RandomSeed) -> Result<ComplexMatrix> {
    haar_frame_from(&mut seed.rng(), n, m)
}

/// CDF of the squared norm of `r` standard complex Gaussians, i.e. the
/// regularized lower incomplete gamma function `P(r, x)`.
pub fn chisq_cdf(x: f64, r: f64) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::DomainError(format!("degrees of freedom must be positive, got {r}")));
    }
    if !(x >= 0.0) {
        return Err(Error::DomainError(format!("argument must be non-negative, got {x}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    Ok(statrs::function::gamma::gamma_lr(r, x).clamp(0.0, 1.0))
}

/// CDF of the ordinary (real) chi-squared distribution with `r` degrees of
/// freedom, `P(r/2, x/2)`.
pub fn real_chisq_cdf(x: f64, r: f64) -> Result<f64> {
    chisq_cdf(x / 2.0, r / 2.0)
}
