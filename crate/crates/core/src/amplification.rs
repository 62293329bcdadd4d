//! Gap amplification by alternating two projective measurements.
//!
//! Given `Λ ⊗ |0⟩⟨0| = ΔΠΔ`, a run prepares `ρ ⊗ |0⟩⟨0|` and then, for up to
//! `N` rounds, measures `{Π, I−Π}` (accepting on `Π`) followed by `{Δ, I−Δ}`
//! (accepting on `I−Δ`). It rejects if neither ever fires.
//!
//! For an eigenvector of `Λ` with eigenvalue `λ`, one round without acceptance
//! multiplies the amplitude by `1 − λ`, so
//! `p_acc(N) = Σ_i |α_i|² (1 − (1 − λ_i)^{2N})`. [`mw_accept_exact`] evaluates
//! this from the spectrum of `Λ`; [`mw_accept_survival`] instead applies
//! `(Δ(I−Π))^N` to the embedded state, and the two must agree.

use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::linalg::{self, Vector, STATE_TOL};
use crate::measurement::{build_averaged_naimark, NaimarkForm, TwoOutcomeMeasurement};
use crate::state::{same, HermitianOperator, PureState, QuantumState};

/// `1 − e^{-1}`.
pub const LOWER_BOUND_FACTOR: f64 = 1.0 - 0.367_879_441_171_442_33;

#[derive(Debug, Clone, PartialEq)]
pub struct MwInstance {
    naimark: NaimarkForm,
    initial: QuantumState,
    repetitions: usize,
}

impl MwInstance {
    pub fn new(naimark: NaimarkForm, initial: impl Into<QuantumState>, repetitions: usize) -> Result<Self> {
        let initial = initial.into();
        if repetitions == 0 {
            return Err(invalid("N", "repetition count must be at least 1"));
        }
        same(naimark.system(), initial.shape())?;
        Ok(Self {
            naimark,
            initial,
            repetitions,
        })
    }

    /// Instance for a single measurement, using its own Naimark form.
    pub fn for_measurement(
        m: &TwoOutcomeMeasurement,
        initial: impl Into<QuantumState>,
        repetitions: usize,
    ) -> Result<Self> {
        Self::new(m.naimark()?, initial, repetitions)
    }

    pub fn naimark(&self) -> &NaimarkForm {
        &self.naimark
    }

    pub fn initial(&self) -> &QuantumState {
        &self.initial
    }

    pub fn repetitions(&self) -> usize {
        self.repetitions
    }

    /// The POVM element realised by the Naimark form.
    pub fn lambda(&self) -> HermitianOperator {
        self.naimark.effective_lambda()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HaltingStep {
    /// `{Π, I−Π}` returned `Π`.
    Projector,
    /// `{Δ, I−Δ}` returned `I−Δ`.
    AncillaCheck,
    /// All rounds completed without acceptance.
    Exhausted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MwResult {
    pub accepted: bool,
    pub rounds_used: usize,
    pub halting_step: HaltingStep,
}

/// Simulate one run.
///
/// Random numbers are drawn in a fixed order: one to pick a pure component of a
/// mixed input, then per round one for the `Π` measurement and, if it
/// rejected, one for the `Δ` measurement.
pub fn run_mw_sampled<R: Rng + ?Sized>(inst: &MwInstance, rng: &mut R) -> Result<MwResult> {
    let psi = sample_component(&inst.initial, rng)?;
    let form = &inst.naimark;
    let mut v = form.embed(psi.amplitudes());
    for round in 1..=inst.repetitions {
        let on_pi: Vector = form.pi() * &v;
        let p_pi = on_pi.norm_squared().clamp(0.0, 1.0);
        if rng.random::<f64>() < p_pi {
            return Ok(MwResult {
                accepted: true,
                rounds_used: round,
                halting_step: HaltingStep::Projector,
            });
        }
        v -= on_pi;
        normalize(&mut v);
        let on_delta: Vector = form.delta() * &v;
        let p_off = (1.0 - on_delta.norm_squared()).clamp(0.0, 1.0);
        if rng.random::<f64>() < p_off {
            return Ok(MwResult {
                accepted: true,
                rounds_used: round,
                halting_step: HaltingStep::AncillaCheck,
            });
        }
        v = on_delta;
        normalize(&mut v);
    }
    Ok(MwResult {
        accepted: false,
        rounds_used: inst.repetitions,
        halting_step: HaltingStep::Exhausted,
    })
}

fn normalize(v: &mut Vector) {
    let n = v.norm();
    if n > 0.0 {
        *v /= linalg::real(n);
    }
}

pub(crate) fn sample_component<R: Rng + ?Sized>(state: &QuantumState, rng: &mut R) -> Result<PureState> {
    match state {
        QuantumState::Pure(p) => Ok(p.clone()),
        QuantumState::Mixed(_) => {
            let ensemble = state.ensemble()?;
            let u: f64 = rng.random();
            let mut acc = 0.0;
            for (w, psi) in &ensemble {
                acc += w;
                if u < acc {
                    return Ok(psi.clone());
                }
            }
            Ok(ensemble.last().expect("nonempty ensemble").1.clone())
        }
    }
}

fn check_contraction(lambda: &HermitianOperator) -> Result<()> {
    let (lo, hi) = lambda.spectral_range()?;
    if lo < -STATE_TOL {
        return Err(Error::NotContraction(lo));
    }
    if hi > 1.0 + STATE_TOL {
        return Err(Error::NotContraction(hi));
    }
    Ok(())
}

/// `Σ_i |α_i|² (1 − (1 − λ_i)^{2N})`, averaged over the spectral ensemble of a
/// mixed input.
pub fn mw_accept_exact(lambda: &HermitianOperator, state: &QuantumState, repetitions: usize) -> Result<f64> {
    if repetitions == 0 {
        return Err(invalid("N", "repetition count must be at least 1"));
    }
    same(lambda.shape(), state.shape())?;
    check_contraction(lambda)?;
    let dec = lambda.eigendecompose()?;
    let exponent = 2 * repetitions as i32;
    let mut total = 0.0;
    for (weight, psi) in state.ensemble()? {
        let coeffs = dec.eigenvectors.adjoint() * psi.amplitudes();
        let p: f64 = dec
            .eigenvalues
            .iter()
            .zip(coeffs.iter())
            .map(|(&l, a)| a.norm_sqr() * (1.0 - (1.0 - l.clamp(0.0, 1.0)).powi(exponent)))
            .sum();
        total += weight * p;
    }
    Ok(total.clamp(0.0, 1.0))
}

/// `1 − ‖(Δ(I−Π))^N (|ψ⟩ ⊗ |0⟩)‖²` by direct application of the projectors.
///
/// A mixed input is propagated as a density operator, `τ ↦ K τ K†` with
/// `K = Δ(I−Π)`, without diagonalizing it.
pub fn mw_accept_survival(inst: &MwInstance) -> Result<f64> {
    let form = &inst.naimark;
    let survived = match &inst.initial {
        QuantumState::Pure(psi) => {
            let mut v = form.embed(psi.amplitudes());
            for _ in 0..inst.repetitions {
                let on_pi: Vector = form.pi() * &v;
                v = form.delta() * (v - on_pi);
            }
            v.norm_squared()
        }
        QuantumState::Mixed(rho) => {
            let d = rho.dim();
            let e = linalg::Matrix::from_fn(form.extended_dim(), d, |r, c| {
                let mut basis = Vector::zeros(d);
                basis[c] = linalg::real(1.0);
                form.embed(&basis)[r]
            });
            let k = form.delta() * (linalg::identity(form.extended_dim()) - form.pi());
            let mut tau = &e * rho.matrix() * e.adjoint();
            for _ in 0..inst.repetitions {
                tau = &k * tau * k.adjoint();
            }
            linalg::trace(&tau).re
        }
    };
    Ok((1.0 - survived).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MwBounds {
    /// `(1 − e^{-1}) tr(P_{≥1/(2N)} ρ)`.
    pub lower: f64,
    /// `min(1, 2N tr(Λρ))`.
    pub upper: f64,
}

impl MwBounds {
    pub fn contains(&self, p: f64, tol: f64) -> bool {
        self.lower <= p + tol && p <= self.upper + tol
    }
}

pub fn mw_bounds(lambda: &HermitianOperator, state: &QuantumState, repetitions: usize) -> Result<MwBounds> {
    if repetitions == 0 {
        return Err(invalid("N", "repetition count must be at least 1"));
    }
    same(lambda.shape(), state.shape())?;
    check_contraction(lambda)?;
    let dec = lambda.eigendecompose()?;
    let threshold = 1.0 / (2.0 * repetitions as f64);
    let rho = state.to_density();
    let mut weight_high = 0.0;
    for (k, &l) in dec.eigenvalues.iter().enumerate() {
        if l >= threshold {
            let v = dec.eigenvector(k);
            weight_high += v.dotc(&(rho.matrix() * &v)).re;
        }
    }
    let upper = (2.0 * repetitions as f64 * state.expectation(lambda)?).min(1.0);
    Ok(MwBounds {
        lower: LOWER_BOUND_FACTOR * weight_high.clamp(0.0, 1.0),
        upper: upper.max(0.0),
    })
}

/// `⌈numerator / denominator⌉`, snapping quotients within 1e-9 of an integer
/// onto it so that values such as `2 / (2/3)` give 3 rather than 4.
pub fn ceil_ratio(numerator: f64, denominator: f64) -> usize {
    let x = numerator / denominator;
    let nearest = x.round();
    if (x - nearest).abs() <= 1e-9 * nearest.abs().max(1.0) {
        nearest as usize
    } else {
        x.ceil() as usize
    }
}

/// Repetition count `⌈n / (1 − ε)⌉` used by the OR test.
pub fn or_repetitions(n: usize, epsilon: f64) -> usize {
    ceil_ratio(n as f64, 1.0 - epsilon)
}

/// One-copy test for "some `Λ_i` accepts with probability ≥ 1 − ε" versus
/// "`E_j tr(Λ_j ρ) ≤ δ`", via amplification of `Λ = (1/n) Σ_j Λ_j`.
#[derive(Debug, Clone)]
pub struct OrTest {
    naimark: NaimarkForm,
    averaged: HermitianOperator,
    epsilon: f64,
    count: usize,
    repetitions: usize,
}

impl OrTest {
    pub fn new(measurements: &[TwoOutcomeMeasurement], epsilon: f64) -> Result<Self> {
        if !(0.0..=0.5).contains(&epsilon) {
            return Err(invalid("epsilon", format!("{epsilon} is outside [0, 1/2]")));
        }
        let naimark = build_averaged_naimark(measurements)?;
        let ops: Vec<HermitianOperator> = measurements.iter().map(|m| m.lambda().clone()).collect();
        let averaged = HermitianOperator::average(&ops)?;
        let count = measurements.len();
        Ok(Self {
            naimark,
            averaged,
            epsilon,
            count,
            repetitions: or_repetitions(count, epsilon),
        })
    }

    pub fn naimark(&self) -> &NaimarkForm {
        &self.naimark
    }

    pub fn averaged(&self) -> &HermitianOperator {
        &self.averaged
    }

    pub fn repetitions(&self) -> usize {
        self.repetitions
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn instance(&self, state: impl Into<QuantumState>) -> Result<MwInstance> {
        MwInstance::new(self.naimark.clone(), state, self.repetitions)
    }

    /// Exact acceptance probability of one run.
    pub fn accept_probability(&self, state: &QuantumState) -> Result<f64> {
        mw_accept_exact(&self.averaged, state, self.repetitions)
    }

    pub fn run<R: Rng + ?Sized>(&self, state: impl Into<QuantumState>, rng: &mut R) -> Result<MwResult> {
        run_mw_sampled(&self.instance(state)?, rng)
    }

    /// `(1 − ε)²/7`, guaranteed when some `tr(Λ_i ρ) ≥ 1 − ε`.
    pub fn case1_bound(&self) -> f64 {
        (1.0 - self.epsilon).powi(2) / 7.0
    }

    /// `4δn`, guaranteed when `E_j tr(Λ_j ρ) ≤ δ`.
    pub fn case2_bound(&self, delta: f64) -> f64 {
        4.0 * delta * self.count as f64
    }
}

/// Single run of the OR test; returns whether it accepted.
pub fn or_test<R: Rng + ?Sized>(
    measurements: &[TwoOutcomeMeasurement],
    state: impl Into<QuantumState>,
    epsilon: f64,
    rng: &mut R,
) -> Result<bool> {
    Ok(OrTest::new(measurements, epsilon)?.run(state, rng)?.accepted)
}

/// Search over basis witnesses: given `0 ≤ Γ ≤ I` on `A ⊗ B` (B the last
/// register, dimension `d`), amplify `Λ = (1/d) Σ_j Γ_j` with
/// `Γ_j = (I ⊗ ⟨j|) Γ (I ⊗ |j⟩)` for `N = ⌈d/η⌉` rounds.
#[derive(Debug, Clone)]
pub struct Demerlinizer {
    slices: Vec<HermitianOperator>,
    lambda: HermitianOperator,
    eta: f64,
    repetitions: usize,
}

impl Demerlinizer {
    pub fn new(gamma: &HermitianOperator, eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(invalid("eta", format!("{eta} is outside (0, 1]")));
        }
        check_contraction(gamma)?;
        let slices = witness_slices(gamma)?;
        let lambda = HermitianOperator::average(&slices)?;
        let d = slices.len();
        Ok(Self {
            slices,
            lambda,
            eta,
            repetitions: ceil_ratio(d as f64, eta),
        })
    }

    pub fn slices(&self) -> &[HermitianOperator] {
        &self.slices
    }

    pub fn lambda(&self) -> &HermitianOperator {
        &self.lambda
    }

    pub fn repetitions(&self) -> usize {
        self.repetitions
    }

    pub fn witness_dim(&self) -> usize {
        self.slices.len()
    }

    pub fn accept_probability(&self, psi: &PureState) -> Result<f64> {
        mw_accept_exact(&self.lambda, &QuantumState::Pure(psi.clone()), self.repetitions)
    }

    pub fn instance(&self, psi: &PureState) -> Result<MwInstance> {
        let m = TwoOutcomeMeasurement::new(self.lambda.clone())?;
        MwInstance::for_measurement(&m, psi.clone(), self.repetitions)
    }

    pub fn run<R: Rng + ?Sized>(&self, psi: &PureState, rng: &mut R) -> Result<MwResult> {
        run_mw_sampled(&self.instance(psi)?, rng)
    }

    /// `η²/7`, guaranteed when some witness is accepted with probability ≥ η.
    pub fn case1_bound(&self) -> f64 {
        self.eta * self.eta / 7.0
    }

    /// `2ζ⌈d/η⌉`, guaranteed when every witness is accepted with probability ≤ ζ.
    pub fn case2_bound(&self, zeta: f64) -> f64 {
        2.0 * zeta * self.repetitions as f64
    }
}

/// `Γ_j` for each basis state `|j⟩` of the last register.
pub fn witness_slices(gamma: &HermitianOperator) -> Result<Vec<HermitianOperator>> {
    let shape = gamma.shape();
    if shape.len() < 2 {
        return Err(invalid("gamma", "needs a system register and a witness register"));
    }
    let d = shape.dim(shape.len() - 1);
    let system = shape.select(&(0..shape.len() - 1).collect::<Vec<_>>())?;
    let da = system.total_dim();
    let g = gamma.matrix();
    Ok((0..d)
        .map(|j| {
            let block = linalg::Matrix::from_fn(da, da, |a, b| g[(a * d + j, b * d + j)]);
            HermitianOperator::from_parts_unchecked(system.clone(), block)
        })
        .collect())
}

/// `max_σ tr Γ(ψ ⊗ σ)`: the top eigenvalue of `(⟨ψ| ⊗ I) Γ (|ψ⟩ ⊗ I)`.
pub fn best_witness_acceptance(gamma: &HermitianOperator, psi: &PureState) -> Result<f64> {
    let shape = gamma.shape();
    if shape.len() < 2 {
        return Err(invalid("gamma", "needs a system register and a witness register"));
    }
    let d = shape.dim(shape.len() - 1);
    let da = shape.total_dim() / d;
    if psi.dim() != da {
        return Err(Error::DimensionMismatch {
            expected: da,
            found: psi.dim(),
        });
    }
    let g = gamma.matrix();
    let a = psi.amplitudes();
    let w = linalg::Matrix::from_fn(d, d, |j, k| {
        let mut acc = linalg::C64::new(0.0, 0.0);
        for x in 0..da {
            for y in 0..da {
                acc += a[x].conj() * g[(x * d + j, y * d + k)] * a[y];
            }
        }
        acc
    });
    let (values, _) = linalg::hermitian_eigen(&linalg::symmetrize(&w))?;
    Ok(values[0])
}

/// Single run of the de-Merlinized test.
pub fn demerlinize_test<R: Rng + ?Sized>(
    gamma: &HermitianOperator,
    psi: &PureState,
    eta: f64,
    rng: &mut R,
) -> Result<bool> {
    Ok(Demerlinizer::new(gamma, eta)?.run(psi, rng)?.accepted)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::trial_rng;
    use crate::register::RegisterShape;

    fn qubit() -> RegisterShape {
        RegisterShape::qubits(1).unwrap()
    }

    fn ket(i: usize) -> PureState {
        PureState::basis(qubit(), i).unwrap()
    }

    #[test]
    fn exact_oracle_examples() {
        let p0 = ket(0).projector();
        let plus: QuantumState = PureState::plus().into();
        assert!((mw_accept_exact(&p0, &ket(0).into(), 5).unwrap() - 1.0).abs() < 1e-14);
        assert!((mw_accept_exact(&p0, &plus, 1).unwrap() - 0.5).abs() < 1e-14);
        let half = p0.scale(0.5);
        assert!((mw_accept_exact(&half, &plus, 2).unwrap() - 0.46875).abs() < 1e-14);
    }

    #[test]
    fn zero_repetitions_rejected() {
        let p0 = ket(0).projector();
        assert!(mw_accept_exact(&p0, &ket(0).into(), 0).is_err());
        let m = TwoOutcomeMeasurement::projective(p0).unwrap();
        assert!(MwInstance::for_measurement(&m, ket(0), 0).is_err());
    }

    #[test]
    fn survival_in_kernel_is_zero() {
        let m = TwoOutcomeMeasurement::projective(ket(0).projector()).unwrap();
        let inst = MwInstance::for_measurement(&m, ket(1), 4).unwrap();
        assert!(mw_accept_survival(&inst).unwrap().abs() < 1e-14);
    }

    #[test]
    fn bounds_examples() {
        let p0 = ket(0).projector();
        let b = mw_bounds(&p0, &ket(0).into(), 1).unwrap();
        assert!((b.lower - LOWER_BOUND_FACTOR).abs() < 1e-14);
        assert!((b.upper - 1.0).abs() < 1e-14);
        assert!((LOWER_BOUND_FACTOR - 0.6321).abs() < 1e-4);
        let zero = HermitianOperator::zero(qubit());
        let b = mw_bounds(&zero, &PureState::plus().into(), 3).unwrap();
        assert_eq!((b.lower, b.upper), (0.0, 0.0));
        assert_eq!(mw_accept_exact(&zero, &PureState::plus().into(), 3).unwrap(), 0.0);
    }

    #[test]
    fn sampled_run_degenerate_cases() {
        let mut rng = trial_rng(11, 0);
        let m = TwoOutcomeMeasurement::projective(ket(0).projector()).unwrap();
        let inst = MwInstance::new(build_averaged_naimark(std::slice::from_ref(&m)).unwrap(), ket(0), 1).unwrap();
        for _ in 0..100 {
            assert!(run_mw_sampled(&inst, &mut rng).unwrap().accepted);
        }
        let zero = TwoOutcomeMeasurement::projective(HermitianOperator::zero(qubit())).unwrap();
        let inst = MwInstance::for_measurement(&zero, PureState::plus(), 7).unwrap();
        for _ in 0..100 {
            let r = run_mw_sampled(&inst, &mut rng).unwrap();
            assert!(!r.accepted);
            assert_eq!(r.halting_step, HaltingStep::Exhausted);
            assert_eq!(r.rounds_used, 7);
        }
    }

    #[test]
    fn ceil_ratio_snaps_near_integers() {
        assert_eq!(ceil_ratio(2.0, 2.0 / 3.0), 3);
        assert_eq!(ceil_ratio(2.0, 0.5), 4);
        assert_eq!(or_repetitions(8, 0.0), 8);
        assert_eq!(or_repetitions(3, 0.5), 6);
        assert_eq!(or_repetitions(3, 0.25), 4);
    }

    #[test]
    fn or_test_rejects_large_epsilon() {
        let m = TwoOutcomeMeasurement::projective(ket(0).projector()).unwrap();
        assert!(OrTest::new(&[m], 0.6).is_err());
    }

    #[test]
    fn or_test_zero_operators_never_accept() {
        let zero = TwoOutcomeMeasurement::projective(HermitianOperator::zero(qubit())).unwrap();
        let test = OrTest::new(&vec![zero; 3], 0.25).unwrap();
        let p = test.accept_probability(&PureState::plus().into()).unwrap();
        assert_eq!(p, 0.0);
        assert!(p <= test.case2_bound(0.0));
    }

    #[test]
    fn witness_slices_of_product() {
        let shape = RegisterShape::new(vec![2, 2]).unwrap();
        let gamma = ket(0).projector().tensor(&ket(0).projector());
        let slices = witness_slices(&gamma).unwrap();
        assert_eq!(slices.len(), 2);
        assert!(linalg::max_abs(&(slices[0].matrix() - ket(0).projector().matrix())) < 1e-15);
        assert!(linalg::max_abs(slices[1].matrix()) < 1e-15);
        assert_eq!(gamma.shape(), &shape);
        let best = best_witness_acceptance(&gamma, &ket(0)).unwrap();
        assert!((best - 1.0).abs() < 1e-12);
    }

    #[test]
    fn demerlinizer_zero_gamma() {
        let shape = RegisterShape::new(vec![4, 2]).unwrap();
        let dm = Demerlinizer::new(&HermitianOperator::zero(shape), 0.5).unwrap();
        let psi = PureState::basis(RegisterShape::single(4).unwrap(), 2).unwrap();
        assert_eq!(dm.accept_probability(&psi).unwrap(), 0.0);
        assert_eq!(dm.repetitions(), 4);
    }
}
