//! Single-copy sequential test with a control qubit and a rare coherence check.
//!
//! The state lives on `control ⊗ system` and starts as `|+⟩⟨+| ⊗ ρ`. Each
//! iteration either (with probability `q = 1/(ηn + 1)`) applies a Hadamard to
//! the control and halts on the measured bit (0 rejects, 1 accepts), or
//! measures `|1⟩⟨1| ⊗ Λ_j` for a uniformly random `j`, accepting on the first
//! outcome and continuing with the residual state otherwise.

use rand::Rng;

use crate::amplification::{ceil_ratio, sample_component};
use crate::error::{invalid, Error, Result};
use crate::linalg::{self, real, Matrix, Vector};
use crate::measurement::{anti_zeno_sequence, TwoOutcomeMeasurement};
use crate::register::RegisterShape;
use crate::state::{same, PureState, QuantumState};

/// Largest system dimension the exact recursion accepts.
pub const MAX_EXACT_DIM: usize = 64;

/// Tolerance for the per-iteration probability balance.
pub const CONSERVATION_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct SequentialInstance {
    measurements: Vec<TwoOutcomeMeasurement>,
    initial: QuantumState,
    eta: f64,
    iterations: usize,
}

impl SequentialInstance {
    pub fn new(measurements: Vec<TwoOutcomeMeasurement>, initial: impl Into<QuantumState>, eta: f64) -> Result<Self> {
        let initial = initial.into();
        if measurements.is_empty() {
            return Err(invalid("measurements", "need at least one measurement"));
        }
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(invalid("eta", format!("{eta} is outside (0, 1]")));
        }
        for m in &measurements {
            same(m.shape(), initial.shape())?;
            if !m.is_projector() {
                return Err(Error::NotProjector(m.lambda().projector_deviation()));
            }
        }
        let n = measurements.len() as f64;
        // 5n/η + 5/η² = (5nη + 5)/η²
        let iterations = ceil_ratio(5.0 * n * eta + 5.0, eta * eta);
        Ok(Self {
            measurements,
            initial,
            eta,
            iterations,
        })
    }

    pub fn measurements(&self) -> &[TwoOutcomeMeasurement] {
        &self.measurements
    }

    pub fn initial(&self) -> &QuantumState {
        &self.initial
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn len(&self) -> usize {
        self.measurements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.measurements.is_empty()
    }

    /// `k = ⌈5n/η + 5/η²⌉`.
    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// `q = 1/(ηn + 1)`.
    pub fn check_probability(&self) -> f64 {
        1.0 / (self.eta * self.len() as f64 + 1.0)
    }

    /// `max_j tr Λ_j ρ`.
    pub fn zeta(&self) -> Result<f64> {
        let mut z: f64 = 0.0;
        for m in &self.measurements {
            z = z.max(self.initial.expectation(m.lambda())?);
        }
        Ok(z)
    }

    /// `2kζ`.
    pub fn case2_bound(&self) -> Result<f64> {
        Ok(2.0 * self.iterations as f64 * self.zeta()?)
    }

    /// `η²/7 − 1/n`, the asserted case-1 floor.
    pub fn case1_floor(&self) -> f64 {
        self.eta * self.eta / 7.0 - 1.0 / self.len() as f64
    }
}

/// How a sampled run halted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SequentialHalt {
    /// The Hadamard check fired; `accepted` records its bit.
    Check,
    /// Some `|1⟩⟨1| ⊗ Λ_j` returned its first outcome.
    Measurement,
    /// All `k` iterations ran without halting.
    Exhausted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SequentialResult {
    pub accepted: bool,
    pub iterations_used: usize,
    pub halt: SequentialHalt,
}

/// One run of the sequential test.
///
/// RNG order: a mixed input first draws its ensemble component. Each iteration
/// then draws the check coin; if the check fires, one more draw decides its bit;
/// otherwise it draws `j` and then one number for the measurement outcome.
pub fn run_sequential_sampled<R: Rng + ?Sized>(inst: &SequentialInstance, rng: &mut R) -> Result<SequentialResult> {
    let psi = sample_component(&inst.initial, rng)?;
    let d = psi.dim();
    let n = inst.len();
    let q = inst.check_probability();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    // control-major layout: index = b·d + x
    let mut v = Vector::zeros(2 * d);
    for x in 0..d {
        v[x] = psi.amplitudes()[x] * s;
        v[d + x] = psi.amplitudes()[x] * s;
    }
    for it in 1..=inst.iterations {
        if rng.random::<f64>() < q {
            // Hadamard then read the control: P(1) = ‖(a₀ − a₁)/√2‖².
            let mut p1 = 0.0;
            for x in 0..d {
                p1 += ((v[x] - v[d + x]) * s).norm_sqr();
            }
            let accepted = rng.random::<f64>() < p1;
            return Ok(SequentialResult {
                accepted,
                iterations_used: it,
                halt: SequentialHalt::Check,
            });
        }
        let j = rng.random_range(0..n);
        let lambda = inst.measurements[j].lambda().matrix();
        let upper: Vector = v.rows(d, d).into_owned();
        let hit = lambda * &upper;
        let p = hit.norm_squared().clamp(0.0, 1.0);
        if rng.random::<f64>() < p {
            return Ok(SequentialResult {
                accepted: true,
                iterations_used: it,
                halt: SequentialHalt::Measurement,
            });
        }
        let rest = upper - hit;
        v.rows_mut(d, d).copy_from(&rest);
        let norm = v.norm();
        if norm < 1e-300 {
            break;
        }
        v /= real(norm);
    }
    Ok(SequentialResult {
        accepted: false,
        iterations_used: inst.iterations,
        halt: SequentialHalt::Exhausted,
    })
}

/// Exact halting masses of the sequential test.
#[derive(Debug, Clone, PartialEq)]
pub struct SequentialExact {
    /// Total probability of accepting.
    pub accept: f64,
    /// Part of `accept` from the `|1⟩⟨1| ⊗ Λ_j` measurements.
    pub measurement_accept: f64,
    /// Part of `accept` from the Hadamard check.
    pub check_accept: f64,
    pub reject: f64,
    /// Largest `|accept + reject + surviving − 1|` seen across iterations.
    pub max_conservation_error: f64,
}

/// Propagates the unhalted (unnormalized) density operator through all `k` iterations.
pub fn exact_sequential_accept(inst: &SequentialInstance) -> Result<SequentialExact> {
    let d = inst.initial.shape().total_dim();
    if d > MAX_EXACT_DIM {
        return Err(Error::TooLarge(format!("system dimension {d} exceeds {MAX_EXACT_DIM}")));
    }
    let n = inst.len();
    let q = inst.check_probability();
    let rho = inst.initial.to_density();
    let plus = Matrix::from_element(2, 2, real(0.5));
    let mut tau = linalg::kron(&plus, rho.matrix());
    let lambdas: Vec<&Matrix> = inst.measurements.iter().map(|m| m.lambda().matrix()).collect();

    let mut check_accept = 0.0;
    let mut measurement_accept = 0.0;
    let mut reject = 0.0;
    let mut max_err: f64 = 0.0;
    for _ in 0..inst.iterations {
        // blocks of τ in control basis: [[A, B], [B†, C]]
        let a = tau.view((0, 0), (d, d)).into_owned();
        let b = tau.view((0, d), (d, d)).into_owned();
        let cc = tau.view((d, d), (d, d)).into_owned();
        // ⟨−|τ|−⟩ summed over the system = tr(A + C − B − B†)/2
        let minus = 0.5 * (linalg::trace(&a) + linalg::trace(&cc) - linalg::trace(&b) - linalg::trace(&b).conj()).re;
        let total = (linalg::trace(&a) + linalg::trace(&cc)).re;
        check_accept += q * minus;
        reject += q * (total - minus);

        let mut next = Matrix::zeros(2 * d, 2 * d);
        let w = (1.0 - q) / n as f64;
        for l in &lambdas {
            measurement_accept += w * linalg::trace(&(*l * &cc)).re;
            let kc = &cc - *l * &cc;
            let kck = &kc - &kc * *l;
            let bk = &b - &b * *l;
            let mut v = next.view_mut((0, 0), (d, d));
            v += &a * real(w);
            let mut v = next.view_mut((0, d), (d, d));
            v += &bk * real(w);
            let mut v = next.view_mut((d, 0), (d, d));
            v += bk.adjoint() * real(w);
            let mut v = next.view_mut((d, d), (d, d));
            v += kck * real(w);
        }
        tau = next;
        let surviving = linalg::trace(&tau).re;
        let err = (check_accept + measurement_accept + reject + surviving - 1.0).abs();
        max_err = max_err.max(err);
    }
    reject += linalg::trace(&tau).re;
    Ok(SequentialExact {
        accept: check_accept + measurement_accept,
        measurement_accept,
        check_accept,
        reject,
        max_conservation_error: max_err,
    })
}

/// One row of a case-1 sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub n: usize,
    pub eta: f64,
    pub accept: f64,
    pub target: f64,
    pub floor: f64,
}

impl SweepRow {
    pub fn holds(&self, tol: f64) -> bool {
        self.accept + tol >= self.floor
    }
}

/// Evaluates `exact_sequential_accept` on `family(n)` for each `n`.
pub fn case1_sweep<F>(family: F, n_values: &[usize]) -> Result<Vec<SweepRow>>
where
    F: Fn(usize) -> Result<SequentialInstance>,
{
    n_values
        .iter()
        .map(|&n| {
            let inst = family(n)?;
            let exact = exact_sequential_accept(&inst)?;
            Ok(SweepRow {
                n: inst.len(),
                eta: inst.eta(),
                accept: exact.accept,
                target: inst.eta() * inst.eta() / 7.0,
                floor: inst.case1_floor(),
            })
        })
        .collect()
}

/// The rotating sequence `Λ_k = I − |ψ_k⟩⟨ψ_k|` on `|0⟩`.
///
/// `Λ_n = |0⟩⟨0|` accepts the input with certainty, so every state within
/// trace distance `η ≤ (√5 − 1)/2` of it has average acceptance at least `η/n`.
pub fn anti_zeno_instance(n: usize, eta: f64) -> Result<SequentialInstance> {
    let zero = PureState::basis(RegisterShape::qubits(1)?, 0)?;
    SequentialInstance::new(anti_zeno_sequence(n)?, zero, eta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_projector, random_state, trial_rng};
    use crate::state::HermitianOperator;

    fn qubit() -> RegisterShape {
        RegisterShape::qubits(1).unwrap()
    }

    #[test]
    fn iteration_count() {
        let zero = PureState::basis(qubit(), 0).unwrap();
        let m = TwoOutcomeMeasurement::projective(zero.projector()).unwrap();
        let inst = SequentialInstance::new(vec![m.clone()], zero.clone(), 1.0).unwrap();
        assert_eq!(inst.iterations(), 10);
        let inst = SequentialInstance::new(vec![m.clone(), m], zero, 0.5).unwrap();
        // 20 + 20
        assert_eq!(inst.iterations(), 40);
        assert!((inst.check_probability() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn undisturbed_control_fails_the_check() {
        let zero_op = TwoOutcomeMeasurement::projective(HermitianOperator::zero(qubit())).unwrap();
        let inst = SequentialInstance::new(vec![zero_op], PureState::plus(), 1.0).unwrap();
        let exact = exact_sequential_accept(&inst).unwrap();
        assert_eq!(exact.accept, 0.0);
        assert!((exact.reject - 1.0).abs() < 1e-12);
        let mut rng = trial_rng(1, 0);
        for _ in 0..200 {
            assert!(!run_sequential_sampled(&inst, &mut rng).unwrap().accepted);
        }
    }

    #[test]
    fn single_exact_measurement_accepts_often() {
        let zero = PureState::basis(qubit(), 0).unwrap();
        let m = TwoOutcomeMeasurement::projective(zero.projector()).unwrap();
        let inst = SequentialInstance::new(vec![m], zero, 1.0).unwrap();
        let exact = exact_sequential_accept(&inst).unwrap();
        assert!(exact.max_conservation_error < CONSERVATION_TOL);
        assert!(exact.accept >= 1.0 / 7.0, "{}", exact.accept);
    }

    #[test]
    fn conservation_on_random_instances() {
        let mut rng = trial_rng(3, 0);
        let shape = RegisterShape::single(3).unwrap();
        for t in 0..10 {
            let ms: Vec<_> = (0..1 + t % 4)
                .map(|_| TwoOutcomeMeasurement::projective(random_projector(&shape, 1, &mut rng)).unwrap())
                .collect();
            let inst = SequentialInstance::new(ms, random_state(&shape, &mut rng), 0.5 + 0.05 * t as f64).unwrap();
            let exact = exact_sequential_accept(&inst).unwrap();
            assert!(exact.max_conservation_error < CONSERVATION_TOL);
            assert!((exact.accept + exact.reject - 1.0).abs() < CONSERVATION_TOL);
            assert!(exact.accept <= inst.case2_bound().unwrap() + 1e-9);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        let zero = PureState::basis(qubit(), 0).unwrap();
        let m = TwoOutcomeMeasurement::projective(zero.projector()).unwrap();
        assert!(SequentialInstance::new(vec![m.clone()], zero.clone(), 0.0).is_err());
        assert!(SequentialInstance::new(vec![m], zero.clone(), 1.5).is_err());
        assert!(SequentialInstance::new(vec![], zero.clone(), 0.5).is_err());
        let half = TwoOutcomeMeasurement::new(HermitianOperator::identity(qubit()).scale(0.5)).unwrap();
        assert!(matches!(
            SequentialInstance::new(vec![half], zero, 0.5),
            Err(Error::NotProjector(_))
        ));
    }
}
