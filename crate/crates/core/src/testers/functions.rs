//! Finite functions `f: X → Y` on flat index sets and their superposition states.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};
use crate::gates::PermutationAction;
use crate::linalg::{real, Vector};
use crate::register::RegisterShape;
use crate::state::PureState;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionTable {
    codomain: usize,
    values: Vec<usize>,
}

impl FunctionTable {
    pub fn new(values: Vec<usize>, codomain: usize) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid("domain", "function needs a nonempty domain"));
        }
        if let Some(&bad) = values.iter().find(|&&y| y >= codomain) {
            return Err(invalid(
                "values",
                format!("value {bad} outside codomain of size {codomain}"),
            ));
        }
        Ok(Self { codomain, values })
    }

    pub fn domain_size(&self) -> usize {
        self.values.len()
    }

    pub fn codomain_size(&self) -> usize {
        self.codomain
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    pub fn eval(&self, x: usize) -> usize {
        self.values[x]
    }

    /// `x ↦ f(σ(x))`.
    pub fn compose(&self, sigma: &PermutationAction) -> Result<Self> {
        if sigma.len() != self.domain_size() {
            return Err(Error::DimensionMismatch {
                expected: self.domain_size(),
                found: sigma.len(),
            });
        }
        let values = (0..self.domain_size()).map(|x| self.values[sigma.apply(x)]).collect();
        Self::new(values, self.codomain)
    }

    /// Same table over a larger codomain.
    pub fn with_codomain(&self, codomain: usize) -> Result<Self> {
        Self::new(self.values.clone(), codomain)
    }

    /// Text form: one `x y` line per domain point.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (x, y) in self.values.iter().enumerate() {
            writeln!(out, "{x} {y}").unwrap();
        }
        out
    }
}

impl FromStr for FunctionTable {
    type Err = Error;

    /// Lines `x y` in decimal; blank lines and `#` comments are skipped.
    /// Every `x` in `0..|X|` must appear exactly once; `|Y|` is one more than the largest value.
    fn from_str(text: &str) -> Result<Self> {
        // (line, x, y)
        let mut pairs: Vec<(usize, usize, usize)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parse_err = |reason: String| Error::Parse { line: i + 1, reason };
            let mut it = line.split_whitespace();
            let (Some(x), Some(y), None) = (it.next(), it.next(), it.next()) else {
                return Err(parse_err(format!("expected `x y`, got `{line}`")));
            };
            let x: usize = x.parse().map_err(|e| parse_err(format!("x: {e}")))?;
            let y: usize = y.parse().map_err(|e| parse_err(format!("y: {e}")))?;
            pairs.push((i + 1, x, y));
        }
        if pairs.is_empty() {
            return Err(Error::Parse {
                line: 0,
                reason: "no entries".into(),
            });
        }
        let domain = pairs.len();
        let mut values = vec![None; domain];
        for &(line, x, y) in &pairs {
            if x >= domain {
                return Err(Error::Parse {
                    line,
                    reason: format!("x = {x} but only {domain} entries"),
                });
            }
            if values[x].replace(y).is_some() {
                return Err(Error::Parse {
                    line,
                    reason: format!("x = {x} listed twice"),
                });
            }
        }
        let values: Vec<usize> = values.into_iter().map(|v| v.expect("every slot filled")).collect();
        let codomain = values.iter().max().copied().unwrap_or(0) + 1;
        Self::new(values, codomain)
    }
}

/// `d(f, g)`: fraction of the domain where `f` and `g` differ.
pub fn distance(f: &FunctionTable, g: &FunctionTable) -> Result<f64> {
    if f.domain_size() != g.domain_size() {
        return Err(Error::DimensionMismatch {
            expected: f.domain_size(),
            found: g.domain_size(),
        });
    }
    let differ = f.values.iter().zip(&g.values).filter(|(a, b)| a != b).count();
    Ok(differ as f64 / f.domain_size() as f64)
}

/// Register shape `[X, Y]` used for function states; each register has dimension at least 2.
pub fn function_shape(domain: usize, codomain: usize) -> RegisterShape {
    RegisterShape::new(vec![domain.max(2), codomain.max(2)]).expect("dimensions at least 2")
}

/// `|X|^{-1/2} Σ_x |x⟩|f(x)⟩`.
pub fn function_state(f: &FunctionTable) -> PureState {
    let shape = function_shape(f.domain_size(), f.codomain_size());
    let amp = real(1.0 / (f.domain_size() as f64).sqrt());
    let mut v = Vector::zeros(shape.total_dim());
    for (x, &y) in f.values.iter().enumerate() {
        v[shape.index(&[x, y])] = amp;
    }
    PureState::new(shape, v).expect("normalized by construction")
}

/// One permutation per line, as space-separated images.
pub fn parse_group(text: &str) -> Result<Vec<PermutationAction>> {
    let mut group = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let images = line
            .split_whitespace()
            .map(|t| {
                t.parse::<usize>().map_err(|e| Error::Parse {
                    line: i + 1,
                    reason: e.to_string(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        group.push(PermutationAction::new(images)?);
    }
    if group.is_empty() {
        return Err(invalid("group", "no permutations listed"));
    }
    Ok(group)
}
