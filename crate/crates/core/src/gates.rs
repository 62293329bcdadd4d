//! Matrix-free gate application on [`PureState`]s.
//!
//! A gate acts on a list of target registers, optionally conditioned on other
//! registers holding given values. Application walks the amplitude array by
//! register strides, so a gate on a few registers of a 20-qubit state costs one
//! pass over the vector and never materialises the full operator.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{self, real, Matrix, Vector, C64, STATE_TOL};
use crate::register::RegisterShape;
use crate::state::PureState;

/// A bijection on `{0, …, n−1}`, stored as its image list.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PermutationAction {
    images: Vec<usize>,
}

impl PermutationAction {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        if n == 0 {
            return Err(Error::NotBijective("empty mapping".into()));
        }
        let mut seen = vec![false; n];
        for &y in &images {
            if y >= n {
                return Err(Error::NotBijective(format!("image {y} out of range 0..{n}")));
            }
            if std::mem::replace(&mut seen[y], true) {
                return Err(Error::NotBijective(format!("image {y} repeated")));
            }
        }
        Ok(Self { images })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            images: (0..n).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn apply(&self, x: usize) -> usize {
        self.images[x]
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.images.len()];
        for (x, &y) in self.images.iter().enumerate() {
            inv[y] = x;
        }
        Self { images: inv }
    }

    /// `self ∘ other`, i.e. `x ↦ self(other(x))`.
    pub fn compose(&self, other: &PermutationAction) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: other.len(),
            });
        }
        Ok(Self {
            images: other.images.iter().map(|&x| self.images[x]).collect(),
        })
    }
}

/// A unitary on target registers, optionally controlled on `(register, value)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct GateSpec {
    targets: Vec<usize>,
    matrix: Matrix,
    controls: Vec<(usize, usize)>,
}

impl GateSpec {
    pub fn new(targets: Vec<usize>, matrix: Matrix, controls: Vec<(usize, usize)>) -> Result<Self> {
        if targets.is_empty() {
            return Err(crate::error::invalid("targets", "at least one target register"));
        }
        let dev = linalg::unitary_deviation(&matrix);
        if dev > STATE_TOL {
            return Err(Error::NotUnitary(dev));
        }
        let mut seen: Vec<usize> = Vec::with_capacity(targets.len() + controls.len());
        for r in targets.iter().copied().chain(controls.iter().map(|&(r, _)| r)) {
            if seen.contains(&r) {
                return Err(Error::OverlappingRegisters(r));
            }
            seen.push(r);
        }
        Ok(Self {
            targets,
            matrix,
            controls,
        })
    }

    /// Uncontrolled gate on one register.
    pub fn on(target: usize, matrix: Matrix) -> Result<Self> {
        Self::new(vec![target], matrix, Vec::new())
    }

    /// Add a control: the gate fires only when `register` holds `value`.
    pub fn controlled_on(mut self, register: usize, value: usize) -> Result<Self> {
        if self.targets.contains(&register) || self.controls.iter().any(|&(r, _)| r == register) {
            return Err(Error::OverlappingRegisters(register));
        }
        self.controls.push((register, value));
        Ok(self)
    }

    pub fn inverse(&self) -> Self {
        Self {
            targets: self.targets.clone(),
            matrix: self.matrix.adjoint(),
            controls: self.controls.clone(),
        }
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    pub fn controls(&self) -> &[(usize, usize)] {
        &self.controls
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    fn check_against(&self, shape: &RegisterShape) -> Result<()> {
        for &r in &self.targets {
            shape.check_register(r)?;
        }
        for &(r, v) in &self.controls {
            shape.check_register(r)?;
            if v >= shape.dim(r) {
                return Err(crate::error::invalid(
                    "controls",
                    format!("value {v} exceeds dimension of register {r}"),
                ));
            }
        }
        let t: usize = self.targets.iter().map(|&r| shape.dim(r)).product();
        if t != self.matrix.nrows() {
            return Err(Error::DimensionMismatch {
                expected: t,
                found: self.matrix.nrows(),
            });
        }
        Ok(())
    }
}

/// Apply `gate` to `state`.
pub fn apply_gate(state: PureState, gate: &GateSpec) -> Result<PureState> {
    let shape = state.shape().clone();
    let mut amps = state.into_amplitudes();
    apply_to_vector(&shape, &mut amps, gate)?;
    Ok(PureState::from_parts_unchecked(shape, amps))
}

/// Apply a sequence of gates in order.
pub fn apply_circuit(state: PureState, gates: &[GateSpec]) -> Result<PureState> {
    gates.iter().try_fold(state, apply_gate)
}

/// Strided kernel shared by states and unnormalised vectors.
pub(crate) fn apply_to_vector(shape: &RegisterShape, amps: &mut Vector, gate: &GateSpec) -> Result<()> {
    gate.check_against(shape)?;
    if amps.len() != shape.total_dim() {
        return Err(Error::DimensionMismatch {
            expected: shape.total_dim(),
            found: amps.len(),
        });
    }
    let strides = shape.strides();
    let tdim = gate.matrix.nrows();

    // Offset of each target configuration relative to the block base.
    let mut offsets = vec![0usize; tdim];
    for (t, off) in offsets.iter_mut().enumerate() {
        let mut rem = t;
        for &r in gate.targets.iter().rev() {
            *off += (rem % shape.dim(r)) * strides[r];
            rem /= shape.dim(r);
        }
    }

    let fixed: Vec<usize> = gate
        .targets
        .iter()
        .copied()
        .chain(gate.controls.iter().map(|&(r, _)| r))
        .collect();
    // Registers after the last fixed one form a contiguous run of length `inner`.
    let last_fixed = fixed.iter().copied().max().expect("gate has a target");
    let inner = strides[last_fixed];
    let free: Vec<usize> = (0..last_fixed).filter(|r| !fixed.contains(r)).collect();
    let base0: usize = gate.controls.iter().map(|&(r, v)| v * strides[r]).sum();

    // Row-major copy of the gate for the inner loop.
    let rows: Vec<C64> = (0..tdim)
        .flat_map(|i| (0..tdim).map(move |j| (i, j)))
        .map(|(i, j)| gate.matrix[(i, j)])
        .collect();

    let data = amps.as_mut_slice();
    let mut inp = vec![C64::new(0.0, 0.0); tdim];
    let mut counter = vec![0usize; free.len()];
    let mut base = base0;
    loop {
        if tdim == 2 {
            let (o0, o1) = (offsets[0], offsets[1]);
            let (m00, m01, m10, m11) = (rows[0], rows[1], rows[2], rows[3]);
            let block = &mut data[base..base + inner + o0.max(o1)];
            for j in 0..inner {
                let x = block[j + o0];
                let y = block[j + o1];
                block[j + o0] = m00 * x + m01 * y;
                block[j + o1] = m10 * x + m11 * y;
            }
        } else {
            for j in 0..inner {
                let b = base + j;
                for (slot, &off) in inp.iter_mut().zip(&offsets) {
                    *slot = data[b + off];
                }
                for (i, &off) in offsets.iter().enumerate() {
                    let row = &rows[i * tdim..(i + 1) * tdim];
                    let mut acc = C64::new(0.0, 0.0);
                    for (m, x) in row.iter().zip(&inp) {
                        acc += m * x;
                    }
                    data[b + off] = acc;
                }
            }
        }
        // Odometer over the free registers.
        let mut k = free.len();
        loop {
            if k == 0 {
                return Ok(());
            }
            k -= 1;
            let r = free[k];
            counter[k] += 1;
            base += strides[r];
            if counter[k] < shape.dim(r) {
                break;
            }
            base -= strides[r] * shape.dim(r);
            counter[k] = 0;
        }
    }
}

/// Dense matrix of a circuit on `shape`, built column by column.
pub fn circuit_matrix(shape: &RegisterShape, gates: &[GateSpec]) -> Result<Matrix> {
    let d = shape.total_dim();
    if d > 1 << 12 {
        return Err(Error::TooLarge(format!("dense operator of dimension {d}")));
    }
    let mut m = Matrix::zeros(d, d);
    for j in 0..d {
        let mut v = Vector::zeros(d);
        v[j] = real(1.0);
        for g in gates {
            apply_to_vector(shape, &mut v, g)?;
        }
        m.set_column(j, &v);
    }
    Ok(m)
}

pub fn hadamard() -> Matrix {
    qft_matrix(2, false)
}

pub fn pauli_x() -> Matrix {
    linalg::permutation_matrix(&[1, 0])
}

pub fn pauli_z() -> Matrix {
    Matrix::from_diagonal(&Vector::from_vec(vec![real(1.0), real(-1.0)]))
}

/// `Q|j⟩ = n^{-1/2} Σ_k e^{2πijk/n}|k⟩`, or its inverse.
pub fn qft_matrix(n: usize, inverse: bool) -> Matrix {
    let sign = if inverse { -1.0 } else { 1.0 };
    let norm = 1.0 / (n as f64).sqrt();
    Matrix::from_fn(n, n, |k, j| {
        let phase = sign * 2.0 * PI * ((j * k) % n) as f64 / n as f64;
        C64::from_polar(norm, phase)
    })
}

/// Quantum Fourier transform over `Z_n` on one register of dimension `n`.
pub fn qft_zn(state: PureState, register: usize, inverse: bool) -> Result<PureState> {
    state.shape().check_register(register)?;
    let n = state.shape().dim(register);
    apply_gate(state, &GateSpec::on(register, qft_matrix(n, inverse))?)
}

/// `U_σ|x⟩ = |σ(x)⟩` on one register.
pub fn permutation_unitary(sigma: &PermutationAction, register: usize) -> Result<GateSpec> {
    GateSpec::on(register, linalg::permutation_matrix(sigma.images()))
}

/// Gate swapping register `a[i]` with `b[i]` for every `i`.
pub fn register_swap(shape: &RegisterShape, a: &[usize], b: &[usize]) -> Result<GateSpec> {
    if a.len() != b.len() || a.is_empty() {
        return Err(crate::error::invalid(
            "swap",
            "register lists must be nonempty and equal length",
        ));
    }
    for (&x, &y) in a.iter().zip(b) {
        if shape.dim(x) != shape.dim(y) {
            return Err(Error::DimensionMismatch {
                expected: shape.dim(x),
                found: shape.dim(y),
            });
        }
    }
    let targets: Vec<usize> = a.iter().chain(b).copied().collect();
    let sub = shape.select(&targets)?;
    let n = a.len();
    let images: Vec<usize> = (0..sub.total_dim())
        .map(|idx| {
            let mut digits = sub.digits(idx);
            let (left, right) = digits.split_at_mut(n);
            left.swap_with_slice(right);
            sub.index(&digits)
        })
        .collect();
    GateSpec::new(targets, linalg::permutation_matrix(&images), Vec::new())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &Vector, b: &Vector, tol: f64) -> bool {
        (a - b).iter().all(|z| z.norm() < tol)
    }

    #[test]
    fn hadamard_on_zero() {
        let s = PureState::basis(RegisterShape::qubits(1).unwrap(), 0).unwrap();
        let out = apply_gate(s, &GateSpec::on(0, hadamard()).unwrap()).unwrap();
        assert!(close(out.amplitudes(), PureState::plus().amplitudes(), 1e-15));
    }

    #[test]
    fn control_not_satisfied() {
        let shape = RegisterShape::qubits(2).unwrap();
        let s = PureState::from_digits(shape, &[0, 1]).unwrap();
        let cx = GateSpec::on(1, pauli_x()).unwrap().controlled_on(0, 1).unwrap();
        let out = apply_gate(s.clone(), &cx).unwrap();
        assert_eq!(out, s);
        let cx0 = GateSpec::on(1, pauli_x()).unwrap().controlled_on(0, 0).unwrap();
        let flipped = apply_gate(s, &cx0).unwrap();
        assert!((flipped.amplitudes()[0] - real(1.0)).norm() < 1e-15);
    }

    #[test]
    fn qft_examples() {
        let s = PureState::basis(RegisterShape::single(3).unwrap(), 0).unwrap();
        let out = qft_zn(s.clone(), 0, false).unwrap();
        let third = (1.0f64 / 3.0).sqrt();
        assert!(out.amplitudes().iter().all(|z| (z - real(third)).norm() < 1e-12));
        let back = qft_zn(out, 0, true).unwrap();
        assert!(close(back.amplitudes(), s.amplitudes(), 1e-12));
        assert!(linalg::max_abs(&(qft_matrix(2, false) - hadamard())) < 1e-15);
    }

    #[test]
    fn qft_bad_register() {
        let s = PureState::plus();
        assert!(matches!(qft_zn(s, 1, false), Err(Error::RegisterOutOfRange { .. })));
    }

    #[test]
    fn permutation_examples() {
        let id = permutation_unitary(&PermutationAction::identity(3), 0).unwrap();
        assert!(linalg::max_abs(&(id.matrix() - linalg::identity(3))) < 1e-15);
        let swap = PermutationAction::new(vec![1, 0]).unwrap();
        let x = permutation_unitary(&swap, 0).unwrap();
        assert!(linalg::max_abs(&(x.matrix() - pauli_x())) < 1e-15);
        // Bit swap on the labels of {0,1}²: 01 ↦ 10.
        let bit_swap = PermutationAction::new(vec![0, 2, 1, 3]).unwrap();
        let shape = RegisterShape::single(4).unwrap();
        let s = PureState::basis(shape, 1).unwrap();
        let out = apply_gate(s, &permutation_unitary(&bit_swap, 0).unwrap()).unwrap();
        assert!((out.amplitudes()[2] - real(1.0)).norm() < 1e-15);
    }

    #[test]
    fn invalid_gates_rejected() {
        let not_unitary = Matrix::from_element(2, 2, real(1.0));
        assert!(matches!(GateSpec::on(0, not_unitary), Err(Error::NotUnitary(_))));
        assert!(matches!(
            GateSpec::new(vec![0], pauli_x(), vec![(0, 1)]),
            Err(Error::OverlappingRegisters(0))
        ));
        assert!(PermutationAction::new(vec![0, 0]).is_err());
        let s = PureState::plus();
        let g = GateSpec::on(3, pauli_x()).unwrap();
        assert!(apply_gate(s, &g).is_err());
    }

    #[test]
    fn register_swap_exchanges_digits() {
        let shape = RegisterShape::new(vec![2, 3, 2, 3]).unwrap();
        let g = register_swap(&shape, &[0, 1], &[2, 3]).unwrap();
        let s = PureState::from_digits(shape.clone(), &[1, 2, 0, 1]).unwrap();
        let out = apply_gate(s, &g).unwrap();
        let expected = PureState::from_digits(shape, &[0, 1, 1, 2]).unwrap();
        assert!(close(out.amplitudes(), expected.amplitudes(), 1e-15));
    }
}
