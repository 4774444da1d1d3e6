//! Properness counting for symmetric IA systems.
//!
//! A system is proper when the free variables in the precoders and combiners
//! are at least as many as the scalar equations that must be satisfied. For
//! symmetric systems the full equation set suffices; subsets need not be
//! examined.

use std::fmt;

use crate::channel::SystemShape;

/// Which equation set properness is evaluated against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConstraintSet {
    /// Alignment equations only (total power constraint).
    Unconstrained,
    /// Alignment equations plus equal per-RRU power.
    StrictPerRru,
}

/// Free variables `N_v = K (Nt + Nr − 2Ns) Ns`.
pub fn count_free_variables(shape: &SystemShape) -> u64 {
    let (k, nt, nr, ns) = dims(shape);
    k * (nt + nr - 2 * ns) * ns
}

/// Alignment equations `N_e^(1) = K (K − 1) Ns²`.
pub fn count_alignment_equations(shape: &SystemShape) -> u64 {
    let (k, _, _, ns) = dims(shape);
    k * (k - 1) * ns * ns
}

/// Non-trivially satisfied per-RRU power equations,
/// `N_e^(2) = max{K (N_RRU − Ns), 0}`.
pub fn count_power_equations(shape: &SystemShape) -> u64 {
    let (k, _, _, ns) = dims(shape);
    let rrus = shape.rrus() as u64;
    k * rrus.saturating_sub(ns)
}

fn dims(shape: &SystemShape) -> (u64, u64, u64, u64) {
    (
        shape.users() as u64,
        shape.tx_antennas() as u64,
        shape.rx_antennas() as u64,
        shape.streams() as u64,
    )
}

/// Closed form for the unconstrained case: `Nt + Nr ≥ (K + 1) Ns`.
pub fn unconstrained_inequality(shape: &SystemShape) -> bool {
    let (k, nt, nr, ns) = dims(shape);
    nt + nr >= (k + 1) * ns
}

/// Closed form for strict per-RRU constraints:
/// `(Nr + Nt) Ns ≥ (K + 1) Ns² + max{N_RRU − Ns, 0}`.
pub fn strict_inequality(shape: &SystemShape) -> bool {
    let (k, nt, nr, ns) = dims(shape);
    (nr + nt) * ns >= (k + 1) * ns * ns + (shape.rrus() as u64).saturating_sub(ns)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PropernessReport {
    pub shape: SystemShape,
    pub mode: ConstraintSet,
    pub n_vars: u64,
    pub n_eqs_alignment: u64,
    pub n_eqs_power: u64,
    pub proper_unconstrained: bool,
    pub proper_strict: bool,
}

impl PropernessReport {
    /// Properness under the constraint set the report was requested for.
    pub fn is_proper(&self) -> bool {
        match self.mode {
            ConstraintSet::Unconstrained => self.proper_unconstrained,
            ConstraintSet::StrictPerRru => self.proper_strict,
        }
    }

    pub fn classification(&self) -> Classification {
        match (self.proper_unconstrained, self.proper_strict) {
            (_, true) => Classification::StrictlyFeasible,
            (true, false) => Classification::FeasibleWithoutPerRru,
            (false, false) => Classification::Infeasible,
        }
    }
}

/// Counts both equation sets and evaluates properness in both modes.
pub fn is_proper(shape: &SystemShape, mode: ConstraintSet) -> PropernessReport {
    let n_vars = count_free_variables(shape);
    let n_eqs_alignment = count_alignment_equations(shape);
    let n_eqs_power = count_power_equations(shape);
    PropernessReport {
        shape: *shape,
        mode,
        n_vars,
        n_eqs_alignment,
        n_eqs_power,
        proper_unconstrained: n_vars >= n_eqs_alignment,
        proper_strict: n_vars >= n_eqs_alignment + n_eqs_power,
    }
}

/// Three-way feasibility prediction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Classification {
    Infeasible,
    FeasibleWithoutPerRru,
    StrictlyFeasible,
}

impl Classification {
    pub fn label(&self) -> &'static str {
        match self {
            Classification::Infeasible => "infeasible",
            Classification::FeasibleWithoutPerRru => "feasible only without per-RRU constraints",
            Classification::StrictlyFeasible => "strictly feasible",
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shape(k: usize, nt: usize, nr: usize, ns: usize, rrus: usize) -> SystemShape {
        SystemShape::new(k, nt, nr, ns, rrus).unwrap()
    }

    #[test]
    fn counting_examples() {
        assert_eq!(count_free_variables(&shape(3, 4, 6, 2, 4)), 36);
        assert_eq!(count_free_variables(&shape(3, 2, 2, 1, 2)), 6);
        assert_eq!(count_free_variables(&shape(3, 2, 2, 2, 1)), 0);
        assert_eq!(count_alignment_equations(&shape(3, 2, 2, 1, 1)), 6);
        assert_eq!(count_alignment_equations(&shape(3, 4, 6, 2, 1)), 24);
        assert_eq!(count_alignment_equations(&shape(1, 4, 6, 2, 1)), 0);
        assert_eq!(count_power_equations(&shape(3, 4, 6, 2, 4)), 6);
        assert_eq!(count_power_equations(&shape(3, 4, 6, 2, 2)), 0);
        assert_eq!(count_power_equations(&shape(3, 2, 2, 1, 2)), 3);
    }

    #[test]
    fn reference_classifications() {
        let r = is_proper(&shape(3, 2, 2, 1, 2), ConstraintSet::StrictPerRru);
        assert!(!r.is_proper());
        assert!(r.proper_unconstrained);
        assert_eq!(r.classification(), Classification::FeasibleWithoutPerRru);

        let r = is_proper(&shape(3, 4, 6, 2, 4), ConstraintSet::StrictPerRru);
        assert!(r.is_proper());
        assert_eq!(r.classification(), Classification::StrictlyFeasible);

        let r = is_proper(&shape(7, 4, 5, 1, 4), ConstraintSet::Unconstrained);
        assert!(r.is_proper());
        assert_eq!(r.classification(), Classification::FeasibleWithoutPerRru);

        let r = is_proper(&shape(3, 1, 1, 1, 1), ConstraintSet::Unconstrained);
        assert_eq!(r.classification(), Classification::Infeasible);
    }

    #[test]
    fn single_stream_per_antenna_needs_nr_at_least_k() {
        for k in 2..=8 {
            for nt in 1..=8 {
                for nr in 1..=8 {
                    let s = shape(k, nt, nr, 1, nt);
                    assert_eq!(strict_inequality(&s), nr >= k, "{s}");
                    assert_eq!(is_proper(&s, ConstraintSet::StrictPerRru).proper_strict, nr >= k);
                }
            }
        }
    }
}
