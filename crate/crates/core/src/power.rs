//! Amplification on tensor powers.
//!
//! The testers measure `|φ⟩^{⊗k}` with projectors of the form `Λ_i = p_i^{⊗k}`,
//! where `p_i` acts on one factor. At the copy counts the testers need, the
//! state has far too many amplitudes to store, but every vector the procedure
//! produces is a combination of product vectors `(p_{w_m}⋯p_{w_1}|φ⟩)^{⊗k}`
//! indexed by words `w` over the projector labels. Inner products of such
//! vectors are `⟨v_w|v_{w'}⟩^k`, so norms and probabilities only need
//! single-factor vectors and a Gram matrix over the words that occur.

use std::collections::BTreeMap;

use rand::Rng;

use crate::amplification::{or_repetitions, HaltingStep, MwResult};
use crate::error::{invalid, Error, Result};
use crate::gates::qft_matrix;
use crate::linalg::{self, real, Matrix, Vector, C64, DECOMP_TOL};
use crate::measurement::TwoOutcomeMeasurement;
use crate::register::RegisterShape;
use crate::state::{same, HermitianOperator, PureState};

type Word = Vec<u8>;

/// `{p_i^{⊗k}}` acting on `|φ⟩^{⊗k}`.
#[derive(Debug, Clone)]
pub struct PowerFamily {
    factor: PureState,
    projectors: Vec<HermitianOperator>,
    power: usize,
}

impl PowerFamily {
    pub fn new(factor: PureState, projectors: Vec<HermitianOperator>, power: usize) -> Result<Self> {
        if power == 0 {
            return Err(invalid("k", "tensor power must be at least 1"));
        }
        if projectors.is_empty() {
            return Err(invalid("projectors", "need at least one projector"));
        }
        if projectors.len() > u8::MAX as usize {
            return Err(Error::TooLarge(format!("{} projectors", projectors.len())));
        }
        for p in &projectors {
            same(p.shape(), factor.shape())?;
            let dev = p.projector_deviation();
            if dev > DECOMP_TOL {
                return Err(Error::NotProjector(dev));
            }
        }
        Ok(Self {
            factor,
            projectors,
            power,
        })
    }

    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }

    pub fn power(&self) -> usize {
        self.power
    }

    pub fn factor(&self) -> &PureState {
        &self.factor
    }

    pub fn projectors(&self) -> &[HermitianOperator] {
        &self.projectors
    }

    /// `⟨φ|p_i|φ⟩^k`.
    pub fn accept_probability(&self, i: usize) -> f64 {
        let single = self.projectors[i]
            .expectation(&self.factor)
            .unwrap_or(0.0)
            .clamp(0.0, 1.0);
        single.powi(self.power as i32)
    }

    /// `E_j ⟨φ|p_j|φ⟩^k`.
    pub fn mean_accept(&self) -> f64 {
        (0..self.len()).map(|i| self.accept_probability(i)).sum::<f64>() / self.len() as f64
    }

    pub fn max_accept(&self) -> f64 {
        (0..self.len()).map(|i| self.accept_probability(i)).fold(0.0, f64::max)
    }

    /// Exact `1 − ‖(I − Λ)^N |φ⟩^{⊗k}‖²` for `Λ = (1/n) Σ_i p_i^{⊗k}`.
    pub fn mw_accept_exact(&self, repetitions: usize) -> Result<f64> {
        if repetitions == 0 {
            return Err(invalid("N", "repetition count must be at least 1"));
        }
        let n = self.len() as f64;
        let mut cache = WordCache::new(self);
        let mut x: BTreeMap<Word, C64> = BTreeMap::new();
        x.insert(Word::new(), real(1.0));
        for _ in 0..repetitions {
            let mut next = x.clone();
            for (w, &c) in &x {
                for i in 0..self.len() {
                    let key = cache.extend(w, i);
                    *next.entry(key).or_insert(real(0.0)) -= c / n;
                }
            }
            x = next;
        }
        let norm = cache.norm_sqr_scalar(&x);
        Ok((1.0 - norm).clamp(0.0, 1.0))
    }

    /// Exact acceptance of the OR test with parameter `epsilon`.
    pub fn or_accept_probability(&self, epsilon: f64) -> Result<f64> {
        check_epsilon(epsilon)?;
        self.mw_accept_exact(or_repetitions(self.len(), epsilon))
    }

    /// One sampled run with the averaged Naimark form
    /// `Π = Σ_i p_{i+1}^{⊗k} ⊗ Q|i⟩⟨i|Q⁻¹`, `Δ = I ⊗ |0⟩⟨0|`.
    ///
    /// Draws one number for each `Π` measurement and one for each `Δ` measurement.
    pub fn run_mw_sampled<R: Rng + ?Sized>(&self, repetitions: usize, rng: &mut R) -> Result<MwResult> {
        if repetitions == 0 {
            return Err(invalid("N", "repetition count must be at least 1"));
        }
        let n = self.len();
        let q = qft_matrix(n, false);
        let fourier: Vec<Matrix> = (0..n)
            .map(|i| {
                let col: Vector = q.column(i).into_owned();
                linalg::outer(&col, &col)
            })
            .collect();
        let mut cache = WordCache::new(self);
        let mut anc0 = Vector::zeros(n);
        anc0[0] = real(1.0);
        let mut x: BTreeMap<Word, Vector> = BTreeMap::new();
        x.insert(Word::new(), anc0);

        for round in 1..=repetitions {
            let mut on_pi: BTreeMap<Word, Vector> = BTreeMap::new();
            for (w, alpha) in &x {
                for (i, f) in fourier.iter().enumerate() {
                    let key = cache.extend(w, i);
                    let add = f * alpha;
                    on_pi.entry(key).and_modify(|v| *v += &add).or_insert(add);
                }
            }
            let p_pi = cache.norm_sqr_ancilla(&on_pi).clamp(0.0, 1.0);
            if rng.random::<f64>() < p_pi {
                return Ok(MwResult {
                    accepted: true,
                    rounds_used: round,
                    halting_step: HaltingStep::Projector,
                });
            }
            for (w, v) in on_pi {
                x.entry(w).and_modify(|a| *a -= &v).or_insert_with(|| -v);
            }
            let norm = cache.norm_sqr_ancilla(&x);
            scale_all(&mut x, 1.0 / norm.max(1e-300).sqrt());
            let mut kept = x.clone();
            for a in kept.values_mut() {
                for t in 1..n {
                    a[t] = real(0.0);
                }
            }
            let p_off = (1.0 - cache.norm_sqr_ancilla(&kept)).clamp(0.0, 1.0);
            if rng.random::<f64>() < p_off {
                return Ok(MwResult {
                    accepted: true,
                    rounds_used: round,
                    halting_step: HaltingStep::AncillaCheck,
                });
            }
            let norm = cache.norm_sqr_ancilla(&kept);
            x = kept;
            scale_all(&mut x, 1.0 / norm.max(1e-300).sqrt());
        }
        Ok(MwResult {
            accepted: false,
            rounds_used: repetitions,
            halting_step: HaltingStep::Exhausted,
        })
    }

    pub fn run_or_test<R: Rng + ?Sized>(&self, epsilon: f64, rng: &mut R) -> Result<MwResult> {
        check_epsilon(epsilon)?;
        self.run_mw_sampled(or_repetitions(self.len(), epsilon), rng)
    }

    /// Explicit `(Λ_i, |φ⟩^{⊗k})`; only for small powers.
    pub fn to_dense(&self) -> Result<(Vec<TwoOutcomeMeasurement>, PureState)> {
        let d = self.factor.dim();
        let total = (d as f64).powi(self.power as i32);
        if total > 4096.0 {
            return Err(Error::TooLarge(format!("dense tensor power of dimension {total}")));
        }
        let state = self.factor.power(self.power)?;
        let shape: RegisterShape = state.shape().clone();
        let ms = self
            .projectors
            .iter()
            .map(|p| {
                let mut m = p.matrix().clone();
                for _ in 1..self.power {
                    m = linalg::kron(&m, p.matrix());
                }
                TwoOutcomeMeasurement::projective(HermitianOperator::new(shape.clone(), linalg::symmetrize(&m))?)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((ms, state))
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(0.0..=0.5).contains(&epsilon) {
        return Err(invalid("epsilon", format!("{epsilon} is outside [0, 1/2]")));
    }
    Ok(())
}

fn scale_all(x: &mut BTreeMap<Word, Vector>, s: f64) {
    for v in x.values_mut() {
        *v *= real(s);
    }
}

/// Single-factor vectors `p_{w_m}⋯p_{w_1}|φ⟩` and their `k`-th power overlaps.
struct WordCache<'a> {
    family: &'a PowerFamily,
    vectors: BTreeMap<Word, Vector>,
    overlaps: BTreeMap<(Word, Word), C64>,
}

impl<'a> WordCache<'a> {
    fn new(family: &'a PowerFamily) -> Self {
        let mut vectors = BTreeMap::new();
        vectors.insert(Word::new(), family.factor.amplitudes().clone());
        Self {
            family,
            vectors,
            overlaps: BTreeMap::new(),
        }
    }

    /// Key of `w` followed by projector `i`; `p_i p_i = p_i` collapses repeats.
    fn extend(&mut self, w: &Word, i: usize) -> Word {
        if w.last() == Some(&(i as u8)) {
            return w.clone();
        }
        let mut key = w.clone();
        key.push(i as u8);
        if !self.vectors.contains_key(&key) {
            let v = self.family.projectors[i].matrix() * &self.vectors[w];
            self.vectors.insert(key.clone(), v);
        }
        key
    }

    /// `⟨v_a|v_b⟩^k`.
    fn overlap(&mut self, a: &Word, b: &Word) -> C64 {
        let key = (a.clone(), b.clone());
        if let Some(&z) = self.overlaps.get(&key) {
            return z;
        }
        let z = self.vectors[a].dotc(&self.vectors[b]).powi(self.family.power as i32);
        self.overlaps.insert(key, z);
        z
    }

    fn norm_sqr_scalar(&mut self, x: &BTreeMap<Word, C64>) -> f64 {
        let entries: Vec<(&Word, &C64)> = x.iter().collect();
        let mut total = C64::new(0.0, 0.0);
        for (a, ca) in &entries {
            for (b, cb) in &entries {
                total += ca.conj() * **cb * self.overlap(a, b);
            }
        }
        total.re
    }

    fn norm_sqr_ancilla(&mut self, x: &BTreeMap<Word, Vector>) -> f64 {
        let entries: Vec<(&Word, &Vector)> = x.iter().collect();
        let mut total = C64::new(0.0, 0.0);
        for (a, va) in &entries {
            for (b, vb) in &entries {
                let anc = va.dotc(vb);
                if anc.norm() == 0.0 {
                    continue;
                }
                total += anc * self.overlap(a, b);
            }
        }
        total.re
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amplification::{mw_accept_exact, OrTest};
    use crate::random::{random_projector, random_state, trial_rng};
    use crate::state::QuantumState;

    #[test]
    fn matches_dense_oracle_for_small_powers() {
        let mut rng = trial_rng(5, 0);
        let shape = RegisterShape::single(3).unwrap();
        for trial in 0..10 {
            let n = 1 + trial % 3;
            let phi = random_state(&shape, &mut rng);
            let ps: Vec<_> = (0..n)
                .map(|_| random_projector(&shape, 1 + trial % 2, &mut rng))
                .collect();
            for k in 1..=3 {
                let fam = PowerFamily::new(phi.clone(), ps.clone(), k).unwrap();
                let (ms, state) = fam.to_dense().unwrap();
                for big_n in [1, 2, 5] {
                    let test = OrTest::new(&ms, 0.0).unwrap();
                    let dense = mw_accept_exact(test.averaged(), &QuantumState::Pure(state.clone()), big_n).unwrap();
                    let words = fam.mw_accept_exact(big_n).unwrap();
                    assert!((dense - words).abs() < 1e-10, "k={k} N={big_n}: {dense} vs {words}");
                }
            }
        }
    }

    #[test]
    fn accept_probability_is_power_of_single_factor() {
        let phi = PureState::plus();
        let p0 = PureState::basis(RegisterShape::qubits(1).unwrap(), 0)
            .unwrap()
            .projector();
        let fam = PowerFamily::new(phi, vec![p0], 4).unwrap();
        assert!((fam.accept_probability(0) - 0.0625).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_projectors() {
        let phi = PureState::plus();
        let half = HermitianOperator::identity(RegisterShape::qubits(1).unwrap()).scale(0.5);
        assert!(matches!(
            PowerFamily::new(phi.clone(), vec![half], 2),
            Err(Error::NotProjector(_))
        ));
        let p = PureState::plus().projector();
        assert!(PowerFamily::new(phi, vec![p], 0).is_err());
    }
}
