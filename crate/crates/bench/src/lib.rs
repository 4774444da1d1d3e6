//! Fixtures shared by the criterion benchmarks in `benches/`.

use iadas::{draw_rayleigh, ChannelSet, ComplexMatrix, RandomSeed, SolverOptions, SystemShape};

/// Rayleigh channels for `(nt x nr, ns)^k` with `rrus` RRUs, seeded.
pub fn rayleigh(k: usize, nt: usize, nr: usize, ns: usize, rrus: usize) -> ChannelSet {
    let shape = SystemShape::new(k, nt, nr, ns, rrus).expect("valid benchmark shape");
    draw_rayleigh(shape, RandomSeed::new(2024, 0))
}

/// A Hermitian positive semi-definite `n x n` matrix `G G*`.
pub fn gram(n: usize) -> ComplexMatrix {
    let g = iadas::mathcore::gaussian_matrix(&mut RandomSeed::new(7, n as u64).rng(), n, n);
    &g * g.adjoint()
}

/// A fixed iteration budget with no early exit.
pub fn fixed_iterations(n: usize) -> SolverOptions {
    SolverOptions { tol: 0.0, max_iters: n }
}
