use crate::error::{Error, Result};

/// Ordered subsystem dimensions of a composite system.
///
/// Basis indices are laid out with the last register varying fastest, so the
/// stride of register `i` is the product of the dimensions after it.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RegisterShape {
    dims: Vec<usize>,
}

impl RegisterShape {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidShape("no registers".into()));
        }
        if let Some(d) = dims.iter().find(|&&d| d < 2) {
            return Err(Error::InvalidShape(format!("register dimension {d} < 2")));
        }
        let total = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| Error::InvalidShape("total dimension overflows".into()))?;
        if total > 1 << 26 {
            return Err(Error::TooLarge(format!("total dimension {total}")));
        }
        Ok(Self { dims })
    }

    /// `n` qubit registers.
    pub fn qubits(n: usize) -> Result<Self> {
        Self::new(vec![2; n])
    }

    pub fn single(dim: usize) -> Result<Self> {
        Self::new(vec![dim])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn dim(&self, register: usize) -> usize {
        self.dims[register]
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.dims.len()];
        for i in (0..self.dims.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.dims[i + 1];
        }
        strides
    }

    pub fn stride(&self, register: usize) -> usize {
        self.dims[register + 1..].iter().product()
    }

    /// Per-register digits of a basis index.
    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        for (slot, &d) in out.iter_mut().zip(&self.dims).rev() {
            *slot = index % d;
            index /= d;
        }
        out
    }

    pub fn index(&self, digits: &[usize]) -> usize {
        digits.iter().zip(&self.dims).fold(0, |acc, (&x, &d)| acc * d + x)
    }

    /// Shape of `self ⊗ other`.
    pub fn tensor(&self, other: &RegisterShape) -> RegisterShape {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        RegisterShape { dims }
    }

    /// Shape obtained by keeping the listed registers, in the listed order.
    pub fn select(&self, registers: &[usize]) -> Result<RegisterShape> {
        let dims = registers
            .iter()
            .map(|&r| self.check_register(r).map(|_| self.dims[r]))
            .collect::<Result<Vec<_>>>()?;
        RegisterShape::new(dims)
    }

    pub fn check_register(&self, register: usize) -> Result<()> {
        if register >= self.dims.len() {
            return Err(Error::RegisterOutOfRange {
                index: register,
                count: self.dims.len(),
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digits_roundtrip() {
        let shape = RegisterShape::new(vec![2, 3, 4]).unwrap();
        assert_eq!(shape.total_dim(), 24);
        assert_eq!(shape.strides(), vec![12, 4, 1]);
        for i in 0..24 {
            assert_eq!(shape.index(&shape.digits(i)), i);
        }
        assert_eq!(shape.digits(13), vec![1, 0, 1]);
    }

    #[test]
    fn rejects_degenerate_registers() {
        assert!(RegisterShape::new(vec![]).is_err());
        assert!(RegisterShape::new(vec![2, 1]).is_err());
    }
}
