//! `G`-isomorphism of functions: is `g = f∘σ` for some `σ ∈ G`?
//!
//! Each copy is `(|0⟩|f⟩ + |1⟩|g⟩)/√2` on registers `[b, X, Y]`, built with one
//! query to each function. For every `σ` the unitary `U'_σ` applies the
//! permutation `x ↦ σ⁻¹(x)` when `b = 0`, `x ↦ σ(x)` when `b = 1`, then flips
//! `b`, so that `⟨ψ|U'_σ|ψ⟩ = 1 − d(f∘σ, g)`.

use rand::Rng;

use super::functions::{distance, function_state, FunctionTable};
use super::{eigen_copies, EigenTester, UnitaryCircuit};
use crate::amplification::MwResult;
use crate::error::{invalid, Error, Result};
use crate::gates::{pauli_x, permutation_unitary, GateSpec, PermutationAction};
use crate::linalg::{real, C64};
use crate::state::PureState;

#[derive(Debug, Clone)]
pub struct GIsoTester {
    f: FunctionTable,
    g: FunctionTable,
    group: Vec<PermutationAction>,
    eigen: EigenTester,
}

impl GIsoTester {
    /// Copy count from [`eigen_copies`] with `n = |G|`.
    pub fn new(f: FunctionTable, g: FunctionTable, group: Vec<PermutationAction>, epsilon: f64) -> Result<Self> {
        let k = eigen_copies(group.len(), epsilon)?;
        Self::with_copies(f, g, group, k)
    }

    pub fn with_copies(
        f: FunctionTable,
        g: FunctionTable,
        group: Vec<PermutationAction>,
        copies: usize,
    ) -> Result<Self> {
        if f.domain_size() != g.domain_size() {
            return Err(Error::DimensionMismatch {
                expected: f.domain_size(),
                found: g.domain_size(),
            });
        }
        if group.is_empty() {
            return Err(invalid("group", "need at least one group element"));
        }
        let codomain = f.codomain_size().max(g.codomain_size());
        let f = f.with_codomain(codomain)?;
        let g = g.with_codomain(codomain)?;
        let psi = pair_state(&f, &g);
        let unitaries = group
            .iter()
            .map(|sigma| swap_unitary(&psi, sigma))
            .collect::<Result<Vec<_>>>()?;
        let eigen = EigenTester::new(unitaries, psi, copies)?;
        Ok(Self { f, g, group, eigen })
    }

    pub fn group(&self) -> &[PermutationAction] {
        &self.group
    }

    pub fn eigen(&self) -> &EigenTester {
        &self.eigen
    }

    pub fn copies(&self) -> usize {
        self.eigen.copies()
    }

    /// Queries to `f` and to `g`: one each per copy.
    pub fn queries(&self) -> (usize, usize) {
        (self.copies(), self.copies())
    }

    /// `⟨ψ|U'_σ|ψ⟩` from the gates.
    pub fn overlap(&self, index: usize) -> Result<C64> {
        self.eigen.unitaries()[index].expectation(self.eigen.psi())
    }

    /// `d(f∘σ, g)` by counting.
    pub fn distance(&self, index: usize) -> Result<f64> {
        distance(&self.f.compose(&self.group[index])?, &self.g)
    }

    /// `min_σ d(f∘σ, g)`.
    pub fn min_distance(&self) -> Result<f64> {
        let mut best = f64::INFINITY;
        for i in 0..self.group.len() {
            best = best.min(self.distance(i)?);
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

/// `(|0⟩|f⟩ + |1⟩|g⟩)/√2` on `[2, X, Y]`.
pub fn pair_state(f: &FunctionTable, g: &FunctionTable) -> PureState {
    let ket = |b: usize| PureState::basis(crate::register::RegisterShape::qubits(1).expect("valid"), b).expect("valid");
    let a = ket(0).tensor(&function_state(f));
    let b = ket(1).tensor(&function_state(g));
    let s = real(std::f64::consts::FRAC_1_SQRT_2);
    let v = (a.amplitudes() + b.amplitudes()) * s;
    PureState::new(a.shape().clone(), v).expect("orthogonal halves")
}

fn swap_unitary(psi: &PureState, sigma: &PermutationAction) -> Result<UnitaryCircuit> {
    let shape = psi.shape().clone();
    let padded = pad(sigma, shape.dim(1))?;
    let gates = vec![
        permutation_unitary(&padded.inverse(), 1)?.controlled_on(0, 0)?,
        permutation_unitary(&padded, 1)?.controlled_on(0, 1)?,
        GateSpec::on(0, pauli_x())?,
    ];
    UnitaryCircuit::new(shape, gates)
}

// The X register has dimension at least 2; extra labels stay fixed.
fn pad(sigma: &PermutationAction, dim: usize) -> Result<PermutationAction> {
    if sigma.len() > dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: sigma.len(),
        });
    }
    let mut images = sigma.images().to_vec();
    images.extend(sigma.len()..dim);
    PermutationAction::new(images)
}

/// Accepts if `g` looks like `f∘σ` for some `σ ∈ G`.
pub fn g_iso_test<R: Rng + ?Sized>(
    f: &FunctionTable,
    g: &FunctionTable,
    group: &[PermutationAction],
    epsilon: f64,
    rng: &mut R,
) -> Result<bool> {
    for sigma in group {
        if sigma.len() != f.domain_size() {
            return Err(invalid(
                "group",
                format!("permutation on {} points, domain has {}", sigma.len(), f.domain_size()),
            ));
        }
    }
    let t = GIsoTester::new(f.clone(), g.clone(), group.to_vec(), epsilon)?;
    Ok(t.run(rng)?.accepted)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::trial_rng;

    #[test]
    fn overlap_identity_on_small_domain() {
        let f = FunctionTable::new(vec![0, 1, 1, 2], 3).unwrap();
        let g = FunctionTable::new(vec![1, 1, 0, 2], 3).unwrap();
        let group = vec![
            PermutationAction::identity(4),
            PermutationAction::new(vec![2, 0, 1, 3]).unwrap(),
            PermutationAction::new(vec![3, 2, 1, 0]).unwrap(),
        ];
        let t = GIsoTester::with_copies(f, g, group, 1).unwrap();
        for i in 0..3 {
            let z = t.overlap(i).unwrap();
            assert!((z.re - (1.0 - t.distance(i).unwrap())).abs() < 1e-12);
            assert!(z.im.abs() < 1e-12);
        }
    }

    #[test]
    fn trivial_group_accepts_equal_functions() {
        let f = FunctionTable::new(vec![0, 1], 2).unwrap();
        let t = GIsoTester::new(f.clone(), f, vec![PermutationAction::identity(2)], 0.5).unwrap();
        assert!((t.accept_probability().unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(t.queries(), (t.copies(), t.copies()));
        let mut rng = trial_rng(0, 0);
        assert!(t.run(&mut rng).unwrap().accepted);
    }

    #[test]
    fn single_point_domain_is_padded() {
        let f = FunctionTable::new(vec![0], 1).unwrap();
        let g = FunctionTable::new(vec![0], 1).unwrap();
        let t = GIsoTester::with_copies(f, g, vec![PermutationAction::identity(1)], 2).unwrap();
        assert!((t.overlap(0).unwrap().re - 1.0).abs() < 1e-12);
    }
}
