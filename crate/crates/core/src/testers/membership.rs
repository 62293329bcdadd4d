//! Is `|ψ⟩` one of a known finite set of pure states?

use rand::Rng;

use super::{membership_copies, TESTER_OR_EPSILON};
use crate::amplification::MwResult;
use crate::error::{invalid, Result};
use crate::power::PowerFamily;
use crate::state::{same, trace_distance_pure, PureState};

/// OR test over `|φ⟩⟨φ|^{⊗k}` for each candidate `φ`, on `|ψ⟩^{⊗k}`.
#[derive(Debug, Clone)]
pub struct MembershipTester {
    candidates: Vec<PureState>,
    family: PowerFamily,
}

impl MembershipTester {
    /// Copy count from [`membership_copies`].
    pub fn new(candidates: Vec<PureState>, psi: PureState, epsilon: f64) -> Result<Self> {
        let k = membership_copies(candidates.len(), epsilon)?;
        Self::with_copies(candidates, psi, k)
    }

    pub fn with_copies(candidates: Vec<PureState>, psi: PureState, copies: usize) -> Result<Self> {
        if candidates.is_empty() {
            return Err(invalid("candidates", "empty candidate set"));
        }
        for c in &candidates {
            same(c.shape(), psi.shape())?;
        }
        let projectors = candidates.iter().map(PureState::projector).collect();
        let family = PowerFamily::new(psi, projectors, copies)?;
        Ok(Self { candidates, family })
    }

    pub fn candidates(&self) -> &[PureState] {
        &self.candidates
    }

    pub fn copies(&self) -> usize {
        self.family.power()
    }

    pub fn family(&self) -> &PowerFamily {
        &self.family
    }

    /// `|⟨φ_i|ψ⟩|^{2k}`.
    pub fn measurement_accept(&self, i: usize) -> f64 {
        self.family.accept_probability(i)
    }

    /// `min_φ D(φ, ψ)`.
    pub fn min_distance(&self) -> Result<f64> {
        let mut best = f64::INFINITY;
        for c in &self.candidates {
            best = best.min(trace_distance_pure(c, self.family.factor())?);
        }
        Ok(best)
    }

    pub fn accept_probability(&self) -> Result<f64> {
        self.family.or_accept_probability(TESTER_OR_EPSILON)
    }

    pub fn run<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<MwResult> {
        self.family.run_or_test(TESTER_OR_EPSILON, rng)
    }
}

/// Accepts if `ψ` looks like a member of `candidates`.
pub fn state_membership_test<R: Rng + ?Sized>(
    candidates: &[PureState],
    psi: &PureState,
    epsilon: f64,
    rng: &mut R,
) -> Result<bool> {
    let t = MembershipTester::new(candidates.to_vec(), psi.clone(), epsilon)?;
    Ok(t.run(rng)?.accepted)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::register::RegisterShape;

    #[test]
    fn member_is_accepted_exactly() {
        let q = RegisterShape::qubits(1).unwrap();
        let zero = PureState::basis(q.clone(), 0).unwrap();
        let one = PureState::basis(q, 1).unwrap();
        let t = MembershipTester::new(vec![zero.clone(), one], zero, 0.5).unwrap();
        assert_eq!(t.copies(), 15);
        assert!((t.measurement_accept(0) - 1.0).abs() < 1e-15);
        assert!(t.accept_probability().unwrap() >= 1.0 / 7.0);
    }

    #[test]
    fn empty_set_is_an_error() {
        assert!(MembershipTester::new(vec![], PureState::plus(), 0.5).is_err());
    }
}
