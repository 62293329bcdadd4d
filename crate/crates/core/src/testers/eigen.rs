//! Testing whether `|ψ⟩` is fixed by some unitary in a known set.
//!
//! The tester measures `((|0⟩ + |1⟩)/√2 ⊗ |ψ⟩)^{⊗k} ⊗ |0⟩` with one
//! projective measurement `M_i` per unitary: controlled-`U_i` on every copy,
//! Hadamard on every control, flip the last qubit if all controls read 0,
//! read it (1 accepts), and undo the first three steps.

use rand::Rng;

use super::{eigen_copies, UnitaryCircuit, UnitarySet, TESTER_OR_EPSILON};
use crate::amplification::MwResult;
use crate::error::{invalid, Error, Result};
use crate::gates::{apply_circuit, circuit_matrix, hadamard, pauli_x, GateSpec};
use crate::linalg::{real, Matrix, Vector};
use crate::measurement::{Branch, Collapse, Outcome, ZERO_BRANCH};
use crate::power::PowerFamily;
use crate::register::RegisterShape;
use crate::state::{same, HermitianOperator, PureState};

#[derive(Debug, Clone)]
pub struct EigenTester {
    psi: PureState,
    unitaries: Vec<UnitaryCircuit>,
    copies: usize,
}

impl EigenTester {
    pub fn new(unitaries: Vec<UnitaryCircuit>, psi: PureState, copies: usize) -> Result<Self> {
        if unitaries.is_empty() {
            return Err(invalid("unitaries", "need at least one unitary"));
        }
        if copies == 0 {
            return Err(invalid("k", "need at least one copy"));
        }
        for u in &unitaries {
            same(u.shape(), psi.shape())?;
        }
        Ok(Self { psi, unitaries, copies })
    }

    /// Wraps each matrix as a single gate on all of `psi`'s registers.
    pub fn from_set(set: &UnitarySet, psi: PureState, copies: usize) -> Result<Self> {
        if set.dim() != psi.dim() {
            return Err(Error::DimensionMismatch {
                expected: psi.dim(),
                found: set.dim(),
            });
        }
        let unitaries = set
            .unitaries()
            .iter()
            .map(|u| UnitaryCircuit::from_matrix(psi.shape().clone(), u.clone()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(unitaries, psi, copies)
    }

    pub fn psi(&self) -> &PureState {
        &self.psi
    }

    pub fn unitaries(&self) -> &[UnitaryCircuit] {
        &self.unitaries
    }

    pub fn copies(&self) -> usize {
        self.copies
    }

    pub fn len(&self) -> usize {
        self.unitaries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.unitaries.is_empty()
    }

    /// `[2, ψ registers…]`.
    pub fn copy_shape(&self) -> RegisterShape {
        RegisterShape::qubits(1).expect("valid").tensor(self.psi.shape())
    }

    /// `copy_shape^{×k} × [2]`; the last register is the flag qubit.
    pub fn circuit_shape(&self) -> Result<RegisterShape> {
        let mut dims = Vec::new();
        for _ in 0..self.copies {
            dims.extend_from_slice(self.copy_shape().dims());
        }
        dims.push(2);
        RegisterShape::new(dims)
    }

    /// `(|+⟩|ψ⟩)` for one copy.
    pub fn copy_state(&self) -> PureState {
        PureState::plus().tensor(&self.psi)
    }

    /// `(|+⟩|ψ⟩)^{⊗k} |0⟩` as a dense vector.
    pub fn initial_state(&self) -> Result<PureState> {
        let shape = self.circuit_shape()?;
        let body = self.copy_state().power(self.copies)?;
        let mut v = Vector::zeros(shape.total_dim());
        for (x, a) in body.amplitudes().iter().enumerate() {
            v[2 * x] = *a;
        }
        PureState::new(shape, v)
    }

    /// Steps 1 to 3 of `M_i` on the full circuit.
    pub fn forward_gates(&self, i: usize) -> Result<Vec<GateSpec>> {
        let stride = 1 + self.psi.shape().len();
        let flag = self.copies * stride;
        let mut gates = Vec::new();
        for c in 0..self.copies {
            gates.extend(self.unitaries[i].embedded(c * stride + 1, (c * stride, 1))?);
        }
        for c in 0..self.copies {
            gates.push(GateSpec::on(c * stride, hadamard())?);
        }
        let controls = (0..self.copies).map(|c| (c * stride, 0)).collect();
        gates.push(GateSpec::new(vec![flag], pauli_x(), controls)?);
        Ok(gates)
    }

    /// One full `M_i` cycle on a circuit state: forward, read the flag, undo.
    pub fn measure_cycle(&self, i: usize, state: PureState, branch: Branch<'_>) -> Result<Collapse> {
        same(state.shape(), &self.circuit_shape()?)?;
        let gates = self.forward_gates(i)?;
        let mid = apply_circuit(state, &gates)?;
        let p_accept: f64 = mid.amplitudes().iter().skip(1).step_by(2).map(|a| a.norm_sqr()).sum();
        let p_accept = p_accept.clamp(0.0, 1.0);
        let outcome = match branch {
            Branch::Forced(o) => o,
            Branch::Sampled(rng) => {
                if rng.random::<f64>() < p_accept {
                    Outcome::Accept
                } else {
                    Outcome::Reject
                }
            }
        };
        let (keep, probability) = match outcome {
            Outcome::Accept => (1, p_accept),
            Outcome::Reject => (0, 1.0 - p_accept),
        };
        if probability < ZERO_BRANCH {
            return Err(Error::ZeroProbabilityBranch(probability));
        }
        let shape = mid.shape().clone();
        let mut v = mid.into_amplitudes();
        for (x, a) in v.iter_mut().enumerate() {
            if x % 2 != keep {
                *a = real(0.0);
            }
        }
        let mut state = PureState::normalized(shape, v)?;
        for g in gates.iter().rev() {
            state = crate::gates::apply_gate(state, &g.inverse())?;
        }
        Ok(Collapse {
            outcome,
            probability,
            state,
        })
    }

    /// Acceptance of `M_i` on the initial state by gate-level simulation.
    pub fn circuit_accept_probability(&self, i: usize) -> Result<f64> {
        let mid = apply_circuit(self.initial_state()?, &self.forward_gates(i)?)?;
        Ok(mid.amplitudes().iter().skip(1).step_by(2).map(|a| a.norm_sqr()).sum())
    }

    /// `p_i = V_i†(|0⟩⟨0| ⊗ I)V_i` on one copy, where `V_i` is controlled-`U_i` then Hadamard.
    pub fn copy_projector(&self, i: usize) -> Result<HermitianOperator> {
        let shape = self.copy_shape();
        let mut gates = self.unitaries[i].embedded(1, (0, 1))?;
        gates.push(GateSpec::on(0, hadamard())?);
        let v = circuit_matrix(&shape, &gates)?;
        let d = self.psi.dim();
        let mut p0 = Matrix::zeros(2 * d, 2 * d);
        for x in 0..d {
            p0[(x, x)] = real(1.0);
        }
        HermitianOperator::new(shape, v.adjoint() * p0 * v)
    }

    /// `{p_i^{⊗k}}` on `(|+⟩|ψ⟩)^{⊗k}`; the flag qubit stays in `|0⟩` throughout.
    pub fn family(&self) -> Result<PowerFamily> {
        let projectors = (0..self.len())
            .map(|i| self.copy_projector(i))
            .collect::<Result<Vec<_>>>()?;
        PowerFamily::new(self.copy_state(), projectors, self.copies)
    }

    /// `(1/2 + Re⟨ψ|U_i|ψ⟩/2)^k`.
    pub fn analytic_accept(&self, i: usize) -> Result<f64> {
        let z = self.unitaries[i].expectation(&self.psi)?;
        Ok((0.5 + 0.5 * z.re).clamp(0.0, 1.0).powi(self.copies as i32))
    }

    /// Exact acceptance of the OR test over all `M_i`.
    pub fn accept_probability(&self) -> Result<f64> {
        self.family()?.or_accept_probability(TESTER_OR_EPSILON)
    }

    pub fn run<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<MwResult> {
        self.family()?.run_or_test(TESTER_OR_EPSILON, rng)
    }
}

/// `(1/2 + Re⟨ψ|U|ψ⟩/2)^k`.
pub fn analytic_eigen_accept(u: &Matrix, psi: &PureState, k: usize) -> Result<f64> {
    if u.nrows() != psi.dim() || u.ncols() != psi.dim() {
        return Err(Error::DimensionMismatch {
            expected: psi.dim(),
            found: u.nrows(),
        });
    }
    let z = psi.amplitudes().dotc(&(u * psi.amplitudes()));
    Ok((0.5 + 0.5 * z.re).clamp(0.0, 1.0).powi(k as i32))
}

/// Accepts if `ψ` looks fixed by some `U_i`. Without `copies`, `k` follows [`eigen_copies`].
pub fn eigen_test<R: Rng + ?Sized>(
    unitaries: &UnitarySet,
    psi: &PureState,
    epsilon: f64,
    copies: Option<usize>,
    rng: &mut R,
) -> Result<bool> {
    let k = match copies {
        Some(k) => k,
        None => eigen_copies(unitaries.len(), epsilon)?,
    };
    Ok(EigenTester::from_set(unitaries, psi.clone(), k)?.run(rng)?.accepted)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amplification::{mw_accept_exact, OrTest};
    use crate::gates::pauli_z;
    use crate::linalg::identity;
    use crate::measurement::TwoOutcomeMeasurement;
    use crate::random::{random_state, random_unitary, trial_rng};
    use crate::state::QuantumState;

    #[test]
    fn closed_form_examples() {
        let plus = PureState::plus();
        assert_eq!(analytic_eigen_accept(&identity(2), &plus, 5).unwrap(), 1.0);
        assert!((analytic_eigen_accept(&pauli_z(), &plus, 2).unwrap() - 0.25).abs() < 1e-15);
        assert!((analytic_eigen_accept(&pauli_x(), &plus, 3).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn circuit_matches_closed_form() {
        let mut rng = trial_rng(11, 0);
        let shape = RegisterShape::qubits(1).unwrap();
        for k in 1..=3 {
            let psi = random_state(&shape, &mut rng);
            let set = UnitarySet::new(vec![random_unitary(2, &mut rng), pauli_z()]).unwrap();
            let t = EigenTester::from_set(&set, psi.clone(), k).unwrap();
            let fam = t.family().unwrap();
            for i in 0..2 {
                let a = analytic_eigen_accept(&set.unitaries()[i], &psi, k).unwrap();
                assert!((t.circuit_accept_probability(i).unwrap() - a).abs() < 1e-9);
                assert!((fam.accept_probability(i) - a).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn family_matches_full_circuit_or_test() {
        let mut rng = trial_rng(12, 0);
        let shape = RegisterShape::qubits(1).unwrap();
        let psi = random_state(&shape, &mut rng);
        let set = UnitarySet::new(vec![random_unitary(2, &mut rng), random_unitary(2, &mut rng)]).unwrap();
        let t = EigenTester::from_set(&set, psi, 2).unwrap();
        let full = t.circuit_shape().unwrap();
        let dim = full.total_dim();
        let mut flag = Matrix::zeros(dim, dim);
        for x in (1..dim).step_by(2) {
            flag[(x, x)] = real(1.0);
        }
        let ms: Vec<_> = (0..2)
            .map(|i| {
                let w = circuit_matrix(&full, &t.forward_gates(i).unwrap()).unwrap();
                let lambda = HermitianOperator::new(full.clone(), w.adjoint() * &flag * w).unwrap();
                TwoOutcomeMeasurement::projective(lambda).unwrap()
            })
            .collect();
        let or = OrTest::new(&ms, TESTER_OR_EPSILON).unwrap();
        let init = QuantumState::Pure(t.initial_state().unwrap());
        let dense = mw_accept_exact(or.averaged(), &init, or.repetitions()).unwrap();
        assert!((dense - t.accept_probability().unwrap()).abs() < 1e-10);
    }

    #[test]
    fn measure_cycle_restores_fixed_state() {
        let psi = PureState::plus();
        let set = UnitarySet::new(vec![pauli_x()]).unwrap();
        let t = EigenTester::from_set(&set, psi, 2).unwrap();
        let init = t.initial_state().unwrap();
        let c = t
            .measure_cycle(0, init.clone(), Branch::Forced(Outcome::Accept))
            .unwrap();
        assert!((c.probability - 1.0).abs() < 1e-12);
        assert!((init.inner(&c.state).unwrap().norm() - 1.0).abs() < 1e-12);
    }
}
