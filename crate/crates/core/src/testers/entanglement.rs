//! Product tests across cuts and a tester for genuine multipartite entanglement.
//!
//! Parts are the registers of the input state. The cut test is the swap test
//! between the `S` registers of two copies; it accepts with probability
//! `(1 + tr ρ_S²)/2`, which is 1 exactly when the state is product across `S:Sᶜ`.

use rand::Rng;

use super::{genuine_copies, TESTER_OR_EPSILON};
use crate::amplification::MwResult;
use crate::error::{invalid, Error, Result};
use crate::gates::{apply_circuit, circuit_matrix, hadamard, register_swap, GateSpec};
use crate::linalg::{self, real, Vector};
use crate::power::PowerFamily;
use crate::register::RegisterShape;
use crate::state::{subsystem_purity, HermitianOperator, PureState};

fn check_cut(parts: usize, cut: &[usize]) -> Result<()> {
    if cut.is_empty() || cut.len() >= parts {
        return Err(invalid(
            "cut",
            format!("{cut:?} is not a proper nonempty subset of {parts} parts"),
        ));
    }
    for (i, &p) in cut.iter().enumerate() {
        if p >= parts {
            return Err(Error::RegisterOutOfRange { index: p, count: parts });
        }
        if cut[..i].contains(&p) {
            return Err(invalid("cut", format!("part {p} repeated")));
        }
    }
    Ok(())
}

/// All `2^{n−1} − 1` cuts, each given by the side containing part 0.
pub fn cuts(parts: usize) -> Result<Vec<Vec<usize>>> {
    if !(2..=16).contains(&parts) {
        return Err(invalid("parts", format!("{parts} parts; need 2 to 16")));
    }
    let full = (1usize << parts) - 1;
    Ok((0..full)
        .filter(|m| m & 1 == 1)
        .map(|m| (0..parts).filter(|p| m >> p & 1 == 1).collect())
        .collect())
}

/// Gates of the swap test on `[copy A, copy B, flag]`: H, controlled swap of the cut, H.
fn swap_test_gates(shape: &RegisterShape, parts: usize, cut: &[usize]) -> Result<Vec<GateSpec>> {
    let flag = 2 * parts;
    let b: Vec<usize> = cut.iter().map(|p| p + parts).collect();
    Ok(vec![
        GateSpec::on(flag, hadamard())?,
        register_swap(shape, cut, &b)?.controlled_on(flag, 1)?,
        GateSpec::on(flag, hadamard())?,
    ])
}

fn swap_test_input(psi: &PureState) -> Result<PureState> {
    let pair = psi.tensor(psi);
    let mut dims = pair.shape().dims().to_vec();
    dims.push(2);
    let shape = RegisterShape::new(dims)?;
    let mut v = Vector::zeros(shape.total_dim());
    for (x, a) in pair.amplitudes().iter().enumerate() {
        v[2 * x] = *a;
    }
    PureState::new(shape, v)
}

/// Acceptance of the two-copy swap test across `cut`, by gate-level simulation.
pub fn cut_product_accept(psi: &PureState, cut: &[usize]) -> Result<f64> {
    let parts = psi.shape().len();
    check_cut(parts, cut)?;
    let input = swap_test_input(psi)?;
    let gates = swap_test_gates(input.shape(), parts, cut)?;
    let out = apply_circuit(input, &gates)?;
    Ok(out
        .amplitudes()
        .iter()
        .step_by(2)
        .map(|a| a.norm_sqr())
        .sum::<f64>()
        .clamp(0.0, 1.0))
}

/// One run of the cut test; consumes two copies of `psi`.
pub fn cut_product_test<R: Rng + ?Sized>(psi: &PureState, cut: &[usize], rng: &mut R) -> Result<bool> {
    let p = cut_product_accept(psi, cut)?;
    Ok(rng.random::<f64>() < p)
}

/// `(I + SWAP_S)/2` on two copies, the accepting projector of the cut test.
pub fn cut_pair_projector(shape: &RegisterShape, cut: &[usize]) -> Result<HermitianOperator> {
    let parts = shape.len();
    check_cut(parts, cut)?;
    let pair = shape.tensor(shape);
    let b: Vec<usize> = cut.iter().map(|p| p + parts).collect();
    let swap = circuit_matrix(&pair, &[register_swap(&pair, cut, &b)?])?;
    let p = (linalg::identity(pair.total_dim()) + swap) * real(0.5);
    HermitianOperator::new(pair, p)
}

/// OR test over cuts, where cut `S` accepts when all `k/2` pair tests across `S` accept.
#[derive(Debug, Clone)]
pub struct GenuineEntanglementTester {
    psi: PureState,
    cuts: Vec<Vec<usize>>,
    family: PowerFamily,
}

impl GenuineEntanglementTester {
    /// Copy count from [`genuine_copies`].
    pub fn new(psi: PureState, epsilon: f64) -> Result<Self> {
        let k = genuine_copies(psi.shape().len(), epsilon)?;
        Self::with_copies(psi, k)
    }

    /// `copies` must be even; copies are paired `(1,2), (3,4), …` within every cut.
    pub fn with_copies(psi: PureState, copies: usize) -> Result<Self> {
        if copies == 0 || !copies.is_multiple_of(2) {
            return Err(invalid("k", format!("{copies} copies; need a positive even count")));
        }
        let cuts = cuts(psi.shape().len())?;
        let projectors = cuts
            .iter()
            .map(|c| cut_pair_projector(psi.shape(), c))
            .collect::<Result<Vec<_>>>()?;
        let family = PowerFamily::new(psi.tensor(&psi), projectors, copies / 2)?;
        Ok(Self { psi, cuts, family })
    }

    pub fn psi(&self) -> &PureState {
        &self.psi
    }

    pub fn cuts(&self) -> &[Vec<usize>] {
        &self.cuts
    }

    pub fn copies(&self) -> usize {
        2 * self.family.power()
    }

    pub fn family(&self) -> &PowerFamily {
        &self.family
    }

    /// `((1 + tr ρ_S²)/2)^{k/2}` for cut `i`.
    pub fn cut_accept(&self, i: usize) -> Result<f64> {
        let purity = subsystem_purity(&self.psi, &self.cuts[i])?;
        Ok(((1.0 + purity) / 2.0).powi(self.family.power() as i32))
    }

    /// Exact probability of accepting ("product across some cut").
    pub fn accept_probability(&self) -> Result<f64> {
        self.family.or_accept_probability(TESTER_OR_EPSILON)
    }

    pub fn run<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<MwResult> {
        self.family.run_or_test(TESTER_OR_EPSILON, rng)
    }
}

/// Accepts if `psi` looks product across some cut; rejection indicates genuine entanglement.
pub fn genuine_ent_test<R: Rng + ?Sized>(
    psi: &PureState,
    epsilon: f64,
    copies: Option<usize>,
    rng: &mut R,
) -> Result<bool> {
    let t = match copies {
        Some(k) => GenuineEntanglementTester::with_copies(psi.clone(), k)?,
        None => GenuineEntanglementTester::new(psi.clone(), epsilon)?,
    };
    Ok(t.run(rng)?.accepted)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zero_bell() -> PureState {
        let q = RegisterShape::qubits(1).unwrap();
        let bell = PureState::bell().reshaped(RegisterShape::qubits(2).unwrap()).unwrap();
        PureState::basis(q, 0).unwrap().tensor(&bell)
    }

    #[test]
    fn enumerates_cuts() {
        assert_eq!(cuts(3).unwrap(), vec![vec![0], vec![0, 1], vec![0, 2]]);
        assert_eq!(cuts(5).unwrap().len(), 15);
        assert!(cuts(1).is_err());
    }

    #[test]
    fn swap_test_matches_purity() {
        let ghz = PureState::ghz(3).unwrap();
        for c in cuts(3).unwrap() {
            assert!((cut_product_accept(&ghz, &c).unwrap() - 0.75).abs() < 1e-12);
        }
        let psi = zero_bell();
        assert!((cut_product_accept(&psi, &[0]).unwrap() - 1.0).abs() < 1e-12);
        assert!((cut_product_accept(&psi, &[0, 1]).unwrap() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn pair_projector_expectation_matches_circuit() {
        let psi = zero_bell();
        for c in cuts(3).unwrap() {
            let p = cut_pair_projector(psi.shape(), &c).unwrap();
            let e = p.expectation(&psi.tensor(&psi)).unwrap();
            assert!((e - cut_product_accept(&psi, &c).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn product_state_is_accepted() {
        let zero = PureState::basis(RegisterShape::qubits(3).unwrap(), 0).unwrap();
        let t = GenuineEntanglementTester::new(zero, 0.5).unwrap();
        assert!((t.accept_probability().unwrap() - 1.0).abs() < 1e-9);
        assert!(GenuineEntanglementTester::with_copies(zero_bell(), 3).is_err());
        assert!(check_cut(3, &[0, 1, 2]).is_err());
        assert!(check_cut(3, &[0, 0]).is_err());
    }
}
