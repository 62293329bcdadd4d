//! Testers for unitaries accessed through their Choi states `|U⟩ = (U ⊗ I)|Φ⟩`.
//!
//! `|Φ⟩ = d^{-1/2} Σ_j |j⟩|j⟩`, so `⟨U|V⟩ = tr(U†V)/d` and
//! `(A ⊗ B)|V⟩ = |A V Bᵀ⟩` for any matrices.

use rand::Rng;

use super::{eigen_copies, membership_copies, EigenTester, MembershipTester, UnitaryCircuit, UnitarySet};
use crate::amplification::MwResult;
use crate::error::{Error, Result};
use crate::gates::{register_swap, GateSpec};
use crate::linalg::{self, real, Matrix, Vector, C64, STATE_TOL};
use crate::register::RegisterShape;
use crate::state::PureState;

/// Row-major `vec(M)/√d`: the amplitudes of `(M ⊗ I)|Φ⟩`.
pub fn choi_vector(m: &Matrix) -> Vector {
    let d = m.nrows();
    let s = real(1.0 / (d as f64).sqrt());
    Vector::from_fn(d * m.ncols(), |idx, _| m[(idx / d, idx % d)] * s)
}

/// `|U⟩` on registers `[d, d]`.
pub fn choi_state(u: &Matrix) -> Result<PureState> {
    check_unitary(u)?;
    let d = u.nrows();
    let shape = RegisterShape::new(vec![d, d])?;
    PureState::new(shape, choi_vector(u))
}

/// `tr(U†V)/d`.
pub fn hs_inner(u: &Matrix, v: &Matrix) -> Result<C64> {
    if u.shape() != v.shape() {
        return Err(Error::DimensionMismatch {
            expected: u.nrows(),
            found: v.nrows(),
        });
    }
    Ok(linalg::trace(&(u.adjoint() * v)) / real(u.nrows() as f64))
}

/// `D(U, V) = √(1 − |⟨U, V⟩|²)`.
pub fn dist_d(u: &Matrix, v: &Matrix) -> Result<f64> {
    check_unitary(u)?;
    check_unitary(v)?;
    let z = hs_inner(u, v)?;
    Ok((1.0 - z.norm_sqr()).max(0.0).sqrt())
}

fn check_unitary(u: &Matrix) -> Result<()> {
    if u.nrows() != u.ncols() {
        return Err(Error::InvalidShape(format!("{}x{} matrix", u.nrows(), u.ncols())));
    }
    let dev = linalg::unitary_deviation(u);
    if dev > STATE_TOL {
        return Err(Error::NotUnitary(dev));
    }
    Ok(())
}

/// Membership of `|U⟩` among the Choi states of `candidates`; one oracle use per copy.
pub fn unitary_set_tester(candidates: &UnitarySet, oracle: &Matrix, epsilon: f64) -> Result<MembershipTester> {
    let states = candidates
        .unitaries()
        .iter()
        .map(choi_state)
        .collect::<Result<Vec<_>>>()?;
    let psi = choi_state(oracle)?;
    let k = membership_copies(states.len(), epsilon)?;
    MembershipTester::with_copies(states, psi, k)
}

pub fn unitary_set_test<R: Rng + ?Sized>(
    candidates: &UnitarySet,
    oracle: &Matrix,
    epsilon: f64,
    rng: &mut R,
) -> Result<bool> {
    Ok(unitary_set_tester(candidates, oracle, epsilon)?.run(rng)?.accepted)
}

/// Is `W = UVU†` for some `U ∈ S`?
///
/// Each copy is `|V⟩|W⟩` on `[d, d, d, d]`. For each `U`, `U'` applies
/// `U ⊗ U*` to the first pair, `U† ⊗ Uᵀ` to the second, and swaps the pairs,
/// so `⟨ψ|U'|ψ⟩ = |⟨UVU†, W⟩|²`. A distance `D ≥ ε` therefore shows up as an
/// overlap at most `1 − ε²`, and the eigen-tester runs with parameter `ε²`.
#[derive(Debug, Clone)]
pub struct UnitaryIsoTester {
    set: UnitarySet,
    v: Matrix,
    w: Matrix,
    eigen: EigenTester,
}

impl UnitaryIsoTester {
    pub fn new(set: UnitarySet, v: Matrix, w: Matrix, epsilon: f64) -> Result<Self> {
        let k = eigen_copies(set.len(), epsilon * epsilon)?;
        Self::with_copies(set, v, w, k)
    }

    pub fn with_copies(set: UnitarySet, v: Matrix, w: Matrix, copies: usize) -> Result<Self> {
        let d = set.dim();
        for m in [&v, &w] {
            if m.nrows() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: m.nrows(),
                });
            }
        }
        let psi = choi_state(&v)?.tensor(&choi_state(&w)?);
        let unitaries = set
            .unitaries()
            .iter()
            .map(|u| conjugation_swap(psi.shape(), u))
            .collect::<Result<Vec<_>>>()?;
        let eigen = EigenTester::new(unitaries, psi, copies)?;
        Ok(Self { set, v, w, eigen })
    }

    pub fn eigen(&self) -> &EigenTester {
        &self.eigen
    }

    pub fn copies(&self) -> usize {
        self.eigen.copies()
    }

    /// `⟨ψ|U'_i|ψ⟩` from the gates.
    pub fn overlap(&self, i: usize) -> Result<C64> {
        self.eigen.unitaries()[i].expectation(self.eigen.psi())
    }

    /// `|⟨U_i V U_i†, W⟩|²` from the matrices.
    pub fn predicted_overlap(&self, i: usize) -> Result<f64> {
        let u = &self.set.unitaries()[i];
        Ok(hs_inner(&(u * &self.v * u.adjoint()), &self.w)?.norm_sqr())
    }

    /// `min_U D(UVU†, W)`.
    pub fn min_distance(&self) -> Result<f64> {
        let mut best = f64::INFINITY;
        for u in self.set.unitaries() {
            best = best.min(dist_d(&(u * &self.v * u.adjoint()), &self.w)?);
        }
        Ok(best)
    }

    pub fn accept_probability(&self) -> Result<f64> {
        self.eigen.accept_probability()
    }

    pub fn run<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<MwResult> {
        self.eigen.run(rng)
    }
}

fn conjugation_swap(shape: &RegisterShape, u: &Matrix) -> Result<UnitaryCircuit> {
    let first = linalg::kron(u, &u.conjugate());
    let second = linalg::kron(&u.adjoint(), &u.transpose());
    let gates = vec![
        GateSpec::new(vec![0, 1], first, Vec::new())?,
        GateSpec::new(vec![2, 3], second, Vec::new())?,
        register_swap(shape, &[0, 1], &[2, 3])?,
    ];
    UnitaryCircuit::new(shape.clone(), gates)
}

pub fn unitary_s_iso_test<R: Rng + ?Sized>(
    set: &UnitarySet,
    v: &Matrix,
    w: &Matrix,
    epsilon: f64,
    rng: &mut R,
) -> Result<bool> {
    Ok(UnitaryIsoTester::new(set.clone(), v.clone(), w.clone(), epsilon)?
        .run(rng)?
        .accepted)
}
