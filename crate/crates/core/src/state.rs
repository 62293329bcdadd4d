//! States and operators on a [`RegisterShape`].

use crate::error::{Error, Result};
use crate::linalg::{
    self, hermitian_deviation, hermitian_eigen, kron, outer, real, Matrix, Vector, C64, DECOMP_TOL, STATE_TOL,
};
use crate::register::RegisterShape;

/// A normalised state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    shape: RegisterShape,
    amplitudes: Vector,
}

impl PureState {
    pub fn new(shape: RegisterShape, amplitudes: Vector) -> Result<Self> {
        check_len(&shape, amplitudes.len())?;
        let norm_sqr = amplitudes.norm_squared();
        if (norm_sqr - 1.0).abs() > STATE_TOL {
            return Err(Error::NotNormalized(norm_sqr));
        }
        Ok(Self { shape, amplitudes })
    }

    /// Normalise `amplitudes`; fails on a (numerically) zero vector.
    pub fn normalized(shape: RegisterShape, amplitudes: Vector) -> Result<Self> {
        check_len(&shape, amplitudes.len())?;
        let norm = amplitudes.norm();
        if norm < 1e-300 || !norm.is_finite() {
            return Err(Error::NotNormalized(norm * norm));
        }
        Ok(Self {
            shape,
            amplitudes: amplitudes / real(norm),
        })
    }

    pub fn basis(shape: RegisterShape, index: usize) -> Result<Self> {
        let dim = shape.total_dim();
        if index >= dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: index,
            });
        }
        let mut amplitudes = Vector::zeros(dim);
        amplitudes[index] = real(1.0);
        Ok(Self { shape, amplitudes })
    }

    /// Basis state given one digit per register.
    pub fn from_digits(shape: RegisterShape, digits: &[usize]) -> Result<Self> {
        if digits.len() != shape.len() || digits.iter().zip(shape.dims()).any(|(&x, &d)| x >= d) {
            return Err(Error::InvalidShape(format!(
                "digits {digits:?} do not fit dims {:?}",
                shape.dims()
            )));
        }
        let index = shape.index(digits);
        Self::basis(shape, index)
    }

    /// `(|0⟩ + |1⟩)/√2`.
    pub fn plus() -> Self {
        let h = 0.5f64.sqrt();
        Self {
            shape: RegisterShape::qubits(1).unwrap(),
            amplitudes: Vector::from_vec(vec![real(h), real(h)]),
        }
    }

    /// `(|0…0⟩ + |1…1⟩)/√2` on `n` qubits.
    pub fn ghz(n: usize) -> Result<Self> {
        let shape = RegisterShape::qubits(n)?;
        let dim = shape.total_dim();
        let mut amplitudes = Vector::zeros(dim);
        amplitudes[0] = real(0.5f64.sqrt());
        amplitudes[dim - 1] = real(0.5f64.sqrt());
        Ok(Self { shape, amplitudes })
    }

    pub fn bell() -> Self {
        Self::ghz(2).unwrap()
    }

    pub fn shape(&self) -> &RegisterShape {
        &self.shape
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &Vector {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vector {
        self.amplitudes
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> Result<C64> {
        self.same_shape(other)?;
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    pub fn tensor(&self, other: &PureState) -> PureState {
        PureState {
            shape: self.shape.tensor(&other.shape),
            amplitudes: linalg::kron_vec(&self.amplitudes, &other.amplitudes),
        }
    }

    /// `|self⟩^{⊗k}`.
    pub fn power(&self, k: usize) -> Result<PureState> {
        if k == 0 {
            return Err(crate::error::invalid("k", "tensor power needs k >= 1"));
        }
        let mut out = self.clone();
        for _ in 1..k {
            out = out.tensor(self);
        }
        RegisterShape::new(out.shape.dims().to_vec())?;
        Ok(out)
    }

    /// Same amplitudes, reinterpreted on a shape of equal total dimension.
    pub fn reshaped(self, shape: RegisterShape) -> Result<PureState> {
        check_len(&shape, self.amplitudes.len())?;
        Ok(PureState {
            shape,
            amplitudes: self.amplitudes,
        })
    }

    pub fn projector(&self) -> HermitianOperator {
        HermitianOperator {
            shape: self.shape.clone(),
            matrix: outer(&self.amplitudes, &self.amplitudes),
        }
    }

    pub fn density(&self) -> DensityOperator {
        DensityOperator {
            shape: self.shape.clone(),
            matrix: outer(&self.amplitudes, &self.amplitudes),
        }
    }

    pub(crate) fn same_shape(&self, other: &PureState) -> Result<()> {
        same(&self.shape, &other.shape)
    }

    pub(crate) fn from_parts_unchecked(shape: RegisterShape, amplitudes: Vector) -> Self {
        Self { shape, amplitudes }
    }
}

/// Hermitian matrix on a register shape.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    shape: RegisterShape,
    matrix: Matrix,
}

impl HermitianOperator {
    pub fn new(shape: RegisterShape, matrix: Matrix) -> Result<Self> {
        check_square(&shape, &matrix)?;
        let dev = hermitian_deviation(&matrix);
        if dev > STATE_TOL {
            return Err(Error::NotHermitian(dev));
        }
        Ok(Self { shape, matrix })
    }

    pub fn identity(shape: RegisterShape) -> Self {
        let d = shape.total_dim();
        Self {
            shape,
            matrix: linalg::identity(d),
        }
    }

    pub fn zero(shape: RegisterShape) -> Self {
        let d = shape.total_dim();
        Self {
            shape,
            matrix: Matrix::zeros(d, d),
        }
    }

    /// `Σ_k values[k] |k⟩⟨k|`.
    pub fn diagonal(shape: RegisterShape, values: &[f64]) -> Result<Self> {
        check_len(&shape, values.len())?;
        let diag = Vector::from_iterator(values.len(), values.iter().map(|&v| real(v)));
        Ok(Self {
            shape,
            matrix: Matrix::from_diagonal(&diag),
        })
    }

    pub fn shape(&self) -> &RegisterShape {
        &self.shape
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> Matrix {
        self.matrix
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            shape: self.shape.clone(),
            matrix: self.matrix.scale(factor),
        }
    }

    pub fn tensor(&self, other: &HermitianOperator) -> Self {
        Self {
            shape: self.shape.tensor(&other.shape),
            matrix: kron(&self.matrix, &other.matrix),
        }
    }

    /// `I − self`.
    pub fn complement(&self) -> Self {
        Self {
            shape: self.shape.clone(),
            matrix: linalg::identity(self.dim()) - &self.matrix,
        }
    }

    /// Arithmetic mean of operators on a common shape.
    pub fn average(ops: &[HermitianOperator]) -> Result<Self> {
        let first = ops
            .first()
            .ok_or_else(|| crate::error::invalid("operators", "empty list"))?;
        let mut sum = Matrix::zeros(first.dim(), first.dim());
        for op in ops {
            same(&first.shape, &op.shape)?;
            sum += &op.matrix;
        }
        Ok(Self {
            shape: first.shape.clone(),
            matrix: sum.scale(1.0 / ops.len() as f64),
        })
    }

    /// `⟨ψ|A|ψ⟩` (real part).
    pub fn expectation(&self, psi: &PureState) -> Result<f64> {
        same(&self.shape, psi.shape())?;
        Ok(psi.amplitudes().dotc(&(&self.matrix * psi.amplitudes())).re)
    }

    /// `tr(Aρ)` (real part).
    pub fn expectation_mixed(&self, rho: &DensityOperator) -> Result<f64> {
        same(&self.shape, rho.shape())?;
        Ok(linalg::trace(&(&self.matrix * rho.matrix())).re)
    }

    pub fn eigendecompose(&self) -> Result<EigenDecomposition> {
        eigendecompose(self)
    }

    /// Largest entry of `|A² − A|`.
    pub fn projector_deviation(&self) -> f64 {
        linalg::max_abs(&(&self.matrix * &self.matrix - &self.matrix))
    }

    /// Smallest and largest eigenvalue.
    pub fn spectral_range(&self) -> Result<(f64, f64)> {
        let (values, _) = hermitian_eigen(&self.matrix)?;
        Ok((*values.last().unwrap(), values[0]))
    }

    pub(crate) fn from_parts_unchecked(shape: RegisterShape, matrix: Matrix) -> Self {
        Self {
            shape,
            matrix: linalg::symmetrize(&matrix),
        }
    }
}

/// A Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    shape: RegisterShape,
    matrix: Matrix,
}

impl DensityOperator {
    pub fn new(shape: RegisterShape, matrix: Matrix) -> Result<Self> {
        check_square(&shape, &matrix)?;
        let dev = hermitian_deviation(&matrix);
        if dev > STATE_TOL {
            return Err(Error::NotHermitian(dev));
        }
        let tr = linalg::trace(&matrix).re;
        if (tr - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidDensity(format!("trace {tr}")));
        }
        let (values, _) = hermitian_eigen(&matrix)?;
        let min = *values.last().unwrap();
        if min < -STATE_TOL {
            return Err(Error::InvalidDensity(format!("eigenvalue {min}")));
        }
        Ok(Self { shape, matrix })
    }

    pub fn maximally_mixed(shape: RegisterShape) -> Self {
        let d = shape.total_dim();
        Self {
            shape,
            matrix: linalg::identity(d).scale(1.0 / d as f64),
        }
    }

    /// Convex combination `Σ w_i ψ_i`; weights must be nonnegative and sum to 1.
    pub fn mixture(parts: &[(f64, PureState)]) -> Result<Self> {
        let (_, first) = parts
            .first()
            .ok_or_else(|| crate::error::invalid("parts", "empty mixture"))?;
        let d = first.dim();
        let mut m = Matrix::zeros(d, d);
        for (w, psi) in parts {
            same(first.shape(), psi.shape())?;
            if *w < 0.0 {
                return Err(crate::error::invalid("weight", format!("{w} < 0")));
            }
            m += outer(psi.amplitudes(), psi.amplitudes()).scale(*w);
        }
        Self::new(first.shape().clone(), m)
    }

    pub fn shape(&self) -> &RegisterShape {
        &self.shape
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn tensor(&self, other: &DensityOperator) -> Self {
        Self {
            shape: self.shape.tensor(&other.shape),
            matrix: kron(&self.matrix, &other.matrix),
        }
    }

    /// Spectral ensemble `{(p_i, |v_i⟩)}` keeping weights above 1e-14.
    pub fn eigen_ensemble(&self) -> Result<Vec<(f64, PureState)>> {
        let (values, vectors) = hermitian_eigen(&self.matrix)?;
        Ok(values
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 1e-14)
            .map(|(k, &p)| {
                let v: Vector = vectors.column(k).into_owned();
                (p, PureState::from_parts_unchecked(self.shape.clone(), v))
            })
            .collect())
    }

    pub fn purity(&self) -> f64 {
        linalg::trace(&(&self.matrix * &self.matrix)).re
    }

    pub(crate) fn from_parts_unchecked(shape: RegisterShape, matrix: Matrix) -> Self {
        Self {
            shape,
            matrix: linalg::symmetrize(&matrix),
        }
    }
}

/// Either kind of input state; most procedures accept both.
#[derive(Debug, Clone, PartialEq)]
pub enum QuantumState {
    Pure(PureState),
    Mixed(DensityOperator),
}

impl QuantumState {
    pub fn shape(&self) -> &RegisterShape {
        match self {
            QuantumState::Pure(p) => p.shape(),
            QuantumState::Mixed(m) => m.shape(),
        }
    }

    pub fn to_density(&self) -> DensityOperator {
        match self {
            QuantumState::Pure(p) => p.density(),
            QuantumState::Mixed(m) => m.clone(),
        }
    }

    /// Pure components with their weights.
    pub fn ensemble(&self) -> Result<Vec<(f64, PureState)>> {
        match self {
            QuantumState::Pure(p) => Ok(vec![(1.0, p.clone())]),
            QuantumState::Mixed(m) => m.eigen_ensemble(),
        }
    }

    /// `tr(Aρ)`.
    pub fn expectation(&self, op: &HermitianOperator) -> Result<f64> {
        match self {
            QuantumState::Pure(p) => op.expectation(p),
            QuantumState::Mixed(m) => op.expectation_mixed(m),
        }
    }
}

impl From<PureState> for QuantumState {
    fn from(p: PureState) -> Self {
        QuantumState::Pure(p)
    }
}

impl From<DensityOperator> for QuantumState {
    fn from(m: DensityOperator) -> Self {
        QuantumState::Mixed(m)
    }
}

/// Spectral decomposition with eigenvalues in descending order.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors, one per column, matching `eigenvalues`.
    pub eigenvectors: Matrix,
}

impl EigenDecomposition {
    pub fn reconstruct(&self) -> Matrix {
        let diag = Vector::from_iterator(self.eigenvalues.len(), self.eigenvalues.iter().map(|&v| real(v)));
        &self.eigenvectors * Matrix::from_diagonal(&diag) * self.eigenvectors.adjoint()
    }

    pub fn eigenvector(&self, k: usize) -> Vector {
        self.eigenvectors.column(k).into_owned()
    }
}

pub fn eigendecompose(op: &HermitianOperator) -> Result<EigenDecomposition> {
    let (eigenvalues, eigenvectors) = hermitian_eigen(&op.matrix)?;
    let dec = EigenDecomposition {
        eigenvalues,
        eigenvectors,
    };
    let scale = linalg::frobenius(&op.matrix).max(1.0);
    let err = linalg::frobenius(&(dec.reconstruct() - &op.matrix));
    debug_assert!(err <= DECOMP_TOL * scale, "reconstruction error {err}");
    Ok(dec)
}

/// `√(1 − |⟨a|b⟩|²)`, the trace distance between two pure states.
pub fn trace_distance_pure(a: &PureState, b: &PureState) -> Result<f64> {
    let overlap = a.inner(b)?.norm_sqr();
    Ok((1.0 - overlap).max(0.0).sqrt())
}

/// `½‖ρ − σ‖₁`.
pub fn trace_distance(a: &DensityOperator, b: &DensityOperator) -> Result<f64> {
    same(a.shape(), b.shape())?;
    linalg::half_trace_norm(&(a.matrix() - b.matrix()))
}

/// Reduced state of `psi` on the registers in `subset`, listed in ascending order.
pub fn reduced_density(psi: &PureState, subset: &[usize]) -> Result<DensityOperator> {
    let (kept, rest) = split_registers(psi.shape(), subset)?;
    let a = bipartite_matrix(psi, &kept, &rest)?;
    let shape = psi.shape().select(&kept)?;
    Ok(DensityOperator::from_parts_unchecked(shape, &a * a.adjoint()))
}

/// `tr ρ_S²` for the reduction of `psi` onto `subset`.
pub fn subsystem_purity(psi: &PureState, subset: &[usize]) -> Result<f64> {
    let (kept, rest) = split_registers(psi.shape(), subset)?;
    let a = bipartite_matrix(psi, &kept, &rest)?;
    // Use the smaller Gram matrix; both reductions share a spectrum.
    let gram = if a.nrows() <= a.ncols() {
        &a * a.adjoint()
    } else {
        a.adjoint() * &a
    };
    Ok(gram.iter().map(|z| z.norm_sqr()).sum())
}

/// Amplitudes arranged as a `dim(kept) × dim(rest)` matrix.
pub(crate) fn bipartite_matrix(psi: &PureState, kept: &[usize], rest: &[usize]) -> Result<Matrix> {
    let shape = psi.shape();
    let kept_shape = shape.select(kept)?;
    let rest_dim: usize = rest.iter().map(|&r| shape.dim(r)).product();
    let mut a = Matrix::zeros(kept_shape.total_dim(), rest_dim);
    for (idx, amp) in psi.amplitudes().iter().enumerate() {
        let digits = shape.digits(idx);
        let row = kept.iter().fold(0, |acc, &r| acc * shape.dim(r) + digits[r]);
        let col = rest.iter().fold(0, |acc, &r| acc * shape.dim(r) + digits[r]);
        a[(row, col)] = *amp;
    }
    Ok(a)
}

fn split_registers(shape: &RegisterShape, subset: &[usize]) -> Result<(Vec<usize>, Vec<usize>)> {
    let mut kept: Vec<usize> = subset.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if kept.len() != subset.len() {
        return Err(Error::InvalidSubset("repeated register".into()));
    }
    for &r in &kept {
        shape.check_register(r)?;
    }
    if kept.is_empty() || kept.len() == shape.len() {
        return Err(Error::InvalidSubset("subset must be proper and nonempty".into()));
    }
    let rest = (0..shape.len()).filter(|r| !kept.contains(r)).collect();
    Ok((kept, rest))
}

pub(crate) fn same(a: &RegisterShape, b: &RegisterShape) -> Result<()> {
    if a.total_dim() != b.total_dim() {
        return Err(Error::DimensionMismatch {
            expected: a.total_dim(),
            found: b.total_dim(),
        });
    }
    if a != b {
        return Err(Error::InvalidShape(format!(
            "register dims {:?} vs {:?}",
            a.dims(),
            b.dims()
        )));
    }
    Ok(())
}

fn check_len(shape: &RegisterShape, len: usize) -> Result<()> {
    if shape.total_dim() != len {
        return Err(Error::DimensionMismatch {
            expected: shape.total_dim(),
            found: len,
        });
    }
    Ok(())
}

fn check_square(shape: &RegisterShape, m: &Matrix) -> Result<()> {
    let d = shape.total_dim();
    if m.nrows() != d || m.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: m.nrows().max(m.ncols()),
        });
    }
    Ok(())
}
