//! Component sequences: deterministic, random-access families `j ↦ σ_j`
//! with `|σ_j| = j`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perm::Permutation;
use crate::permuton::Permuton;
use crate::seed::SeedStream;

/// How an unconstrained block of a given length is filled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FillerRule {
    #[default]
    Identity,
    Decreasing,
}

impl FillerRule {
    /// A permutation of length `len`; `None` when `len = 0`.
    pub fn fill(self, len: usize) -> Option<Permutation> {
        match (len, self) {
            (0, _) => None,
            (_, FillerRule::Identity) => Some(Permutation::identity(len)),
            (_, FillerRule::Decreasing) => Some(Permutation::decreasing(len)),
        }
    }
}

/// `pad ⊕ body`, where an absent pad is left out.
pub(crate) fn pad_then(pad: Option<Permutation>, body: Permutation) -> Permutation {
    match pad {
        Some(p) => p.direct_sum(&body),
        None => body,
    }
}

/// A sequence of permutations indexed by `j ≥ 1`.
pub trait PermutationSequence {
    /// `|σ_j|`, computed without building the term.
    fn term_len(&self, j: u64) -> Result<u64>;
    fn term(&self, j: u64) -> Result<Permutation>;
}

fn check_index(j: u64) -> Result<usize> {
    if j == 0 {
        return Err(Error::invalid_argument("sequence indices start at 1"));
    }
    usize::try_from(j).map_err(|_| Error::invalid_argument(format!("index {j} is too large")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ComponentSequence {
    /// `σ_j` is a Γ-random permutation of length `j`, drawn from a stream
    /// determined by `(seed, j)` alone.
    Permuton { descriptor: Permuton, seed: u64 },
    /// `σ_j = ψ ⊕ ⊕^{⌊j/|β|⌋} β` with `|ψ| = j mod |β|`.
    Periodic {
        base: Permutation,
        #[serde(default)]
        filler: FillerRule,
    },
    /// Terms given outright; the term of length `j` is looked up by length.
    Explicit { terms: Vec<Permutation> },
    /// `σ_L = ψ ⊕ (a_r ⊡ b_r⁻¹)` with `r = ⌊√L⌋` and `|ψ| = L − r²`.
    BoxPair {
        forward: Box<ComponentSequence>,
        inverse: Box<ComponentSequence>,
        #[serde(default)]
        filler: FillerRule,
    },
}

impl ComponentSequence {
    pub fn permuton(descriptor: Permuton, seed: u64) -> Self {
        ComponentSequence::Permuton { descriptor, seed }
    }

    pub fn periodic(base: Permutation) -> Self {
        ComponentSequence::Periodic {
            base,
            filler: FillerRule::Identity,
        }
    }

    pub fn box_pair(forward: ComponentSequence, inverse: ComponentSequence) -> Self {
        ComponentSequence::BoxPair {
            forward: Box::new(forward),
            inverse: Box::new(inverse),
            filler: FillerRule::Identity,
        }
    }

    /// The componentwise inverse sequence `j ↦ σ_j⁻¹`, when it has a closed form.
    pub fn inverted(&self) -> Result<ComponentSequence> {
        match self {
            ComponentSequence::Periodic { base, filler } => Ok(ComponentSequence::Periodic {
                base: base.inverse(),
                filler: *filler,
            }),
            ComponentSequence::Explicit { terms } => Ok(ComponentSequence::Explicit {
                terms: terms.iter().map(Permutation::inverse).collect(),
            }),
            ComponentSequence::BoxPair {
                forward,
                inverse,
                filler,
            } => Ok(ComponentSequence::BoxPair {
                forward: inverse.clone(),
                inverse: forward.clone(),
                filler: *filler,
            }),
            ComponentSequence::Permuton { .. } => Err(Error::invalid_argument(
                "the inverse of a permuton-random sequence has no descriptor here",
            )),
        }
    }
}

/// `a ⊡ b⁻¹`, of length `|a|·|b|`.
pub fn box_pair_term(forward: &Permutation, inverse: &Permutation) -> Permutation {
    forward.box_product(&inverse.inverse())
}

impl PermutationSequence for ComponentSequence {
    fn term_len(&self, j: u64) -> Result<u64> {
        check_index(j)?;
        if let ComponentSequence::Explicit { terms } = self {
            if !terms.iter().any(|t| t.len() as u64 == j) {
                return Err(Error::invalid_argument(format!(
                    "explicit sequence has no term of length {j}"
                )));
            }
        }
        Ok(j)
    }

    fn term(&self, j: u64) -> Result<Permutation> {
        let len = check_index(j)?;
        match self {
            ComponentSequence::Permuton { descriptor, seed } => {
                let mut rng = SeedStream::new(*seed).child(j).rng();
                descriptor.sample_permutation(len, &mut rng)
            }
            ComponentSequence::Periodic { base, filler } => {
                let b = base.len();
                let body = (len >= b)
                    .then(|| base.direct_sum_power(len / b))
                    .transpose()?;
                let pad = filler.fill(len % b);
                Ok(match (pad, body) {
                    (pad, Some(body)) => pad_then(pad, body),
                    (Some(pad), None) => pad,
                    (None, None) => unreachable!("len ≥ 1"),
                })
            }
            ComponentSequence::Explicit { terms } => terms
                .iter()
                .find(|t| t.len() == len)
                .cloned()
                .ok_or_else(|| {
                    Error::invalid_argument(format!(
                        "explicit sequence has no term of length {len}"
                    ))
                }),
            ComponentSequence::BoxPair {
                forward,
                inverse,
                filler,
            } => {
                let r = j.isqrt();
                let body = box_pair_term(&forward.term(r)?, &inverse.term(r)?);
                Ok(pad_then(filler.fill(len - body.len()), body))
            }
        }
    }
}
