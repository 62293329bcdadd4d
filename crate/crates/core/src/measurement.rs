//! Two-outcome measurements, their Naimark forms, and the sequential
//! measurement bounds (gentle measurement, quantum union bound, anti-Zeno).

use std::f64::consts::PI;

use rand::{Rng, RngCore};

use crate::error::{invalid, Error, Result};
use crate::gates::qft_matrix;
use crate::linalg::{self, kron, outer, real, spectral_map, Matrix, Vector, DECOMP_TOL, STATE_TOL};
use crate::register::RegisterShape;
use crate::state::{same, DensityOperator, HermitianOperator, PureState, QuantumState};

/// Branches below this probability cannot be selected deterministically.
pub const ZERO_BRANCH: f64 = 1e-12;
/// Largest sequence length the trajectory enumerator accepts.
pub const MAX_ENUMERATED: usize = 12;

/// `Accept` is the outcome associated with `Λ` ("outcome 1").
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Accept,
    Reject,
}

impl Outcome {
    pub fn is_accept(self) -> bool {
        self == Outcome::Accept
    }
}

/// The measurement `{Λ, I − Λ}` with `0 ≤ Λ ≤ I`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoOutcomeMeasurement {
    lambda: HermitianOperator,
    is_projector: bool,
}

impl TwoOutcomeMeasurement {
    pub fn new(lambda: HermitianOperator) -> Result<Self> {
        let (lo, hi) = lambda.spectral_range()?;
        if lo < -STATE_TOL {
            return Err(Error::NotContraction(lo));
        }
        if hi > 1.0 + STATE_TOL {
            return Err(Error::NotContraction(hi));
        }
        let is_projector = lambda.projector_deviation() <= DECOMP_TOL;
        Ok(Self { lambda, is_projector })
    }

    /// Like [`new`](Self::new) but fails unless `Λ² = Λ`.
    pub fn projective(lambda: HermitianOperator) -> Result<Self> {
        let dev = lambda.projector_deviation();
        if dev > DECOMP_TOL {
            return Err(Error::NotProjector(dev));
        }
        Self::new(lambda)
    }

    pub fn lambda(&self) -> &HermitianOperator {
        &self.lambda
    }

    pub fn is_projector(&self) -> bool {
        self.is_projector
    }

    pub fn shape(&self) -> &RegisterShape {
        self.lambda.shape()
    }

    /// `{I − Λ, Λ}`: the same measurement with the outcomes relabelled.
    pub fn complement(&self) -> Self {
        Self {
            lambda: self.lambda.complement(),
            is_projector: self.is_projector,
        }
    }

    /// Naimark form: trivial (`Π = Λ`, no ancilla) for projectors, otherwise
    /// the one-qubit dilation.
    pub fn naimark(&self) -> Result<NaimarkForm> {
        if self.is_projector {
            Ok(NaimarkForm::trivial(self))
        } else {
            NaimarkForm::dilation(self)
        }
    }

    fn element(&self, outcome: Outcome) -> Matrix {
        match outcome {
            Outcome::Accept => self.lambda.matrix().clone(),
            Outcome::Reject => linalg::identity(self.lambda.dim()) - self.lambda.matrix(),
        }
    }
}

/// `tr(Λρ)`, clipped to `[0, 1]`.
pub fn accept_probability(m: &TwoOutcomeMeasurement, state: &QuantumState) -> Result<f64> {
    Ok(state.expectation(m.lambda())?.clamp(0.0, 1.0))
}

/// How [`measure_collapse`] picks the outcome.
pub enum Branch<'a> {
    Forced(Outcome),
    Sampled(&'a mut dyn RngCore),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Collapse {
    pub outcome: Outcome,
    pub probability: f64,
    pub state: PureState,
}

/// Projective measurement of `psi` with collapse to the observed branch.
pub fn measure_collapse(m: &TwoOutcomeMeasurement, psi: &PureState, branch: Branch<'_>) -> Result<Collapse> {
    if !m.is_projector() {
        return Err(Error::NotProjector(m.lambda().projector_deviation()));
    }
    same(m.shape(), psi.shape())?;
    let projected = m.lambda().matrix() * psi.amplitudes();
    let p_accept = projected.norm_squared().clamp(0.0, 1.0);
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
    let (probability, residual) = match outcome {
        Outcome::Accept => (p_accept, projected),
        Outcome::Reject => (1.0 - p_accept, psi.amplitudes() - projected),
    };
    if probability < ZERO_BRANCH {
        return Err(Error::ZeroProbabilityBranch(probability));
    }
    let state = PureState::normalized(psi.shape().clone(), residual)?;
    Ok(Collapse {
        outcome,
        probability,
        state,
    })
}

/// Both sides of the gentle-measurement inequality
/// `‖ρ − √Λρ√Λ / tr(Λρ)‖_tr ≤ √tr((I−Λ)ρ)`, with `‖·‖_tr` half the trace norm.
pub fn gentle_measurement_gap(rho: &DensityOperator, lambda: &HermitianOperator) -> Result<(f64, f64)> {
    same(rho.shape(), lambda.shape())?;
    let (lo, hi) = lambda.spectral_range()?;
    if lo < -STATE_TOL || hi > 1.0 + STATE_TOL {
        return Err(Error::NotContraction(if lo < 0.0 { lo } else { hi }));
    }
    let p = lambda.expectation_mixed(rho)?;
    if p <= ZERO_BRANCH {
        return Err(Error::ZeroProbabilityBranch(p));
    }
    let root = spectral_map(lambda.matrix(), |v| v.clamp(0.0, 1.0).sqrt())?;
    let post = (&root * rho.matrix() * &root).scale(1.0 / p);
    let lhs = linalg::half_trace_norm(&linalg::symmetrize(&(rho.matrix() - post)))?;
    let rhs = (1.0 - p).max(0.0).sqrt();
    Ok((lhs, rhs))
}

/// One branch of a sequential measurement record.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub outcomes: Vec<Outcome>,
    pub probability: f64,
    /// Normalised post-measurement state; `None` for branches of probability ≤ 1e-15.
    pub final_state: Option<DensityOperator>,
}

/// All `2^T` outcome sequences of projective measurements applied in order to `rho`.
pub fn enumerate_trajectories(
    measurements: &[TwoOutcomeMeasurement],
    rho: &DensityOperator,
) -> Result<Vec<TrajectoryRecord>> {
    if measurements.len() > MAX_ENUMERATED {
        return Err(Error::TooLarge(format!(
            "{} measurements; enumeration limited to {MAX_ENUMERATED}",
            measurements.len()
        )));
    }
    for m in measurements {
        if !m.is_projector() {
            return Err(Error::NotProjector(m.lambda().projector_deviation()));
        }
        same(m.shape(), rho.shape())?;
    }
    let mut frontier: Vec<(Vec<Outcome>, Matrix)> = vec![(Vec::new(), rho.matrix().clone())];
    for m in measurements {
        let mut next = Vec::with_capacity(frontier.len() * 2);
        for (outcomes, tau) in frontier {
            for o in [Outcome::Accept, Outcome::Reject] {
                let k = m.element(o);
                let branch = &k * &tau * &k;
                let mut path = outcomes.clone();
                path.push(o);
                next.push((path, branch));
            }
        }
        frontier = next;
    }
    Ok(frontier
        .into_iter()
        .map(|(outcomes, tau)| {
            let probability = linalg::trace(&tau).re.max(0.0);
            let final_state = (probability > 1e-15)
                .then(|| DensityOperator::from_parts_unchecked(rho.shape().clone(), tau.scale(1.0 / probability)));
            TrajectoryRecord {
                outcomes,
                probability,
                final_state,
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnionBoundCheck {
    /// Probability that at least one measurement accepts, by exhaustive enumeration.
    pub p_any_one: f64,
    /// `4Tε`.
    pub bound: f64,
    pub epsilon: f64,
}

impl UnionBoundCheck {
    pub fn holds(&self, tol: f64) -> bool {
        self.p_any_one <= self.bound + tol
    }
}

/// Exhaustive check of the quantum union bound for a projective sequence.
///
/// `epsilon` defaults to `max_t tr(Λ_t ρ)`; a supplied value must dominate it.
pub fn union_bound_bruteforce(
    measurements: &[TwoOutcomeMeasurement],
    rho: &DensityOperator,
    epsilon: Option<f64>,
) -> Result<UnionBoundCheck> {
    let trajectories = enumerate_trajectories(measurements, rho)?;
    let state = QuantumState::Mixed(rho.clone());
    let mut worst: f64 = 0.0;
    for m in measurements {
        worst = worst.max(accept_probability(m, &state)?);
    }
    let epsilon = match epsilon {
        Some(e) if e + STATE_TOL < worst => {
            return Err(invalid(
                "epsilon",
                format!("a measurement accepts with probability {worst} > {e}"),
            ))
        }
        Some(e) => e,
        None => worst,
    };
    let p_any_one = trajectories
        .iter()
        .filter(|t| t.outcomes.iter().any(|o| o.is_accept()))
        .map(|t| t.probability)
        .sum();
    Ok(UnionBoundCheck {
        p_any_one,
        bound: 4.0 * measurements.len() as f64 * epsilon,
        epsilon,
    })
}

/// Realisation `ΔΠΔ = Λ ⊗ |0⟩⟨0|` of a POVM element on an ancilla-extended space.
///
/// The ancilla is a single register of dimension `ancilla_dim` placed after
/// the system registers. `ancilla_dim = 1` means no ancilla (`Π = Λ`, `Δ = I`).
#[derive(Debug, Clone, PartialEq)]
pub struct NaimarkForm {
    system: RegisterShape,
    ancilla_dim: usize,
    pi: Matrix,
    delta: Matrix,
}

impl NaimarkForm {
    /// Wrap a caller-supplied `(Π, Δ)`, checking both are projectors.
    pub fn new(system: RegisterShape, ancilla_dim: usize, pi: Matrix, delta: Matrix) -> Result<Self> {
        let d = system.total_dim() * ancilla_dim;
        for m in [&pi, &delta] {
            if m.nrows() != d || m.ncols() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: m.nrows(),
                });
            }
            let dev = linalg::max_abs(&(m * m - m)).max(linalg::hermitian_deviation(m));
            if dev > DECOMP_TOL {
                return Err(Error::NotProjector(dev));
            }
        }
        Ok(Self {
            system,
            ancilla_dim,
            pi,
            delta,
        })
    }

    fn trivial(m: &TwoOutcomeMeasurement) -> Self {
        let d = m.lambda().dim();
        Self {
            system: m.shape().clone(),
            ancilla_dim: 1,
            pi: m.lambda().matrix().clone(),
            delta: linalg::identity(d),
        }
    }

    /// One-qubit dilation `Π = [[Λ, √(Λ(I−Λ))], [√(Λ(I−Λ)), I−Λ]]` in ancilla blocks.
    pub fn dilation(m: &TwoOutcomeMeasurement) -> Result<Self> {
        let lambda = m.lambda().matrix();
        let d = lambda.nrows();
        let cross = spectral_map(lambda, |v| {
            let v = v.clamp(0.0, 1.0);
            (v * (1.0 - v)).sqrt()
        })?;
        let comp = linalg::identity(d) - lambda;
        let e = |a: usize, b: usize| {
            let mut u = Matrix::zeros(2, 2);
            u[(a, b)] = real(1.0);
            u
        };
        let pi = kron(lambda, &e(0, 0)) + kron(&cross, &e(0, 1)) + kron(&cross, &e(1, 0)) + kron(&comp, &e(1, 1));
        let delta = kron(&linalg::identity(d), &e(0, 0));
        Ok(Self {
            system: m.shape().clone(),
            ancilla_dim: 2,
            pi: linalg::symmetrize(&pi),
            delta,
        })
    }

    pub fn system(&self) -> &RegisterShape {
        &self.system
    }

    pub fn ancilla_dim(&self) -> usize {
        self.ancilla_dim
    }

    pub fn extended_dim(&self) -> usize {
        self.system.total_dim() * self.ancilla_dim
    }

    pub fn pi(&self) -> &Matrix {
        &self.pi
    }

    pub fn delta(&self) -> &Matrix {
        &self.delta
    }

    /// `|ψ⟩ ⊗ |0⟩` on the extended space.
    pub fn embed(&self, psi: &Vector) -> Vector {
        let mut anc = Vector::zeros(self.ancilla_dim);
        anc[0] = real(1.0);
        linalg::kron_vec(psi, &anc)
    }

    /// The operator `Λ` read off the ancilla-zero block of `ΔΠΔ`.
    pub fn effective_lambda(&self) -> HermitianOperator {
        let d = self.system.total_dim();
        let a = self.ancilla_dim;
        let dpd = &self.delta * &self.pi * &self.delta;
        let block = Matrix::from_fn(d, d, |i, j| dpd[(i * a, j * a)]);
        HermitianOperator::from_parts_unchecked(self.system.clone(), block)
    }

    /// Largest violation among `ΔΠΔ = Λ⊗|0⟩⟨0|`, `Π² = Π`, `Δ² = Δ`.
    pub fn invariant_error(&self, lambda: &HermitianOperator) -> f64 {
        let mut zero = Matrix::zeros(self.ancilla_dim, self.ancilla_dim);
        zero[(0, 0)] = real(1.0);
        let target = kron(lambda.matrix(), &zero);
        let dpd = &self.delta * &self.pi * &self.delta;
        let e1 = linalg::max_abs(&(dpd - target));
        let e2 = linalg::max_abs(&(&self.pi * &self.pi - &self.pi));
        let e3 = linalg::max_abs(&(&self.delta * &self.delta - &self.delta));
        e1.max(e2).max(e3)
    }
}

/// `Π = Σ_i Λ_{i+1} ⊗ Q|i⟩⟨i|Q⁻¹` and `Δ = I ⊗ |0⟩⟨0|`, with `Q` the Fourier
/// transform on `Z_n`; then `ΔΠΔ = (1/n Σ_j Λ_j) ⊗ |0⟩⟨0|`.
pub fn build_averaged_naimark(measurements: &[TwoOutcomeMeasurement]) -> Result<NaimarkForm> {
    let first = measurements
        .first()
        .ok_or_else(|| invalid("measurements", "need at least one projector"))?;
    let n = measurements.len();
    let d = first.lambda().dim();
    for m in measurements {
        same(first.shape(), m.shape())?;
        if !m.is_projector() {
            return Err(Error::NotProjector(m.lambda().projector_deviation()));
        }
    }
    let q = qft_matrix(n, false);
    let mut pi = Matrix::zeros(d * n, d * n);
    for (i, m) in measurements.iter().enumerate() {
        let col: Vector = q.column(i).into_owned();
        pi += kron(m.lambda().matrix(), &outer(&col, &col));
    }
    let mut zero = Matrix::zeros(n, n);
    zero[(0, 0)] = real(1.0);
    Ok(NaimarkForm {
        system: first.shape().clone(),
        ancilla_dim: n,
        pi: linalg::symmetrize(&pi),
        delta: kron(&linalg::identity(d), &zero),
    })
}

/// `cos(πk/2n)|0⟩ + sin(πk/2n)|1⟩`.
pub fn anti_zeno_state(n: usize, k: usize) -> PureState {
    let theta = PI * k as f64 / (2.0 * n as f64);
    PureState::new(
        RegisterShape::qubits(1).unwrap(),
        Vector::from_vec(vec![real(theta.cos()), real(theta.sin())]),
    )
    .expect("unit vector")
}

/// `M_k = {I − |ψ_k⟩⟨ψ_k|, |ψ_k⟩⟨ψ_k|}` for `k = 1..=n`; accept is the first outcome.
pub fn anti_zeno_sequence(n: usize) -> Result<Vec<TwoOutcomeMeasurement>> {
    if n == 0 {
        return Err(invalid("n", "need at least one measurement"));
    }
    (1..=n)
        .map(|k| TwoOutcomeMeasurement::projective(anti_zeno_state(n, k).projector().complement()))
        .collect()
}

/// Outcome of running projective measurements in order on a pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct SequentialRun {
    /// Probability that some measurement accepts.
    pub accept_ever: f64,
    /// Probability that each measurement rejects given all earlier ones did.
    pub step_reject: Vec<f64>,
    /// State after every measurement rejected, if that branch has nonzero weight.
    pub all_reject_state: Option<PureState>,
}

pub fn sequential_reject_path(measurements: &[TwoOutcomeMeasurement], psi: &PureState) -> Result<SequentialRun> {
    let mut survival = 1.0;
    let mut state = Some(psi.clone());
    let mut step_reject = Vec::with_capacity(measurements.len());
    for m in measurements {
        let Some(current) = state.take() else {
            step_reject.push(0.0);
            continue;
        };
        match measure_collapse(m, &current, Branch::Forced(Outcome::Reject)) {
            Ok(c) => {
                survival *= c.probability;
                step_reject.push(c.probability);
                state = Some(c.state);
            }
            Err(Error::ZeroProbabilityBranch(p)) => {
                survival = 0.0;
                step_reject.push(p.max(0.0));
            }
            Err(e) => return Err(e),
        }
    }
    Ok(SequentialRun {
        accept_ever: 1.0 - survival,
        step_reject,
        all_reject_state: state,
    })
}
