use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::expand;
use super::rigid::{detect_with_invariants, IsoInvariants, IsoSearch, RigidIso};
use crate::exactlat::parallel_ratio;
use crate::model::{ModelError, TubularGroup};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SequenceStatus {
    /// `history[index]` is primitive.
    Terminated { index: usize },
    /// `witness` is a rigid isomorphism `history[i] → history[j]`.
    Recurrent {
        i: usize,
        j: usize,
        witness: RigidIso,
    },
    /// `budget` nontrivial expansions ran without either outcome.
    Exhausted { budget: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpansionOutcome {
    pub history: Vec<TubularGroup>,
    pub status: SequenceStatus,
}

impl ExpansionOutcome {
    /// Number of nontrivial expansions performed.
    pub fn steps(&self) -> usize {
        self.history.len() - 1
    }

    pub fn target(&self) -> Option<&TubularGroup> {
        match self.status {
            SequenceStatus::Terminated { index } => self.history.get(index),
            _ => None,
        }
    }

    /// Re-checks the outcome from its own data: every term is the expansion
    /// of the previous one, and the status claim holds.
    pub fn verify(&self) -> Result<(), String> {
        let Some(first) = self.history.first() else {
            return Err("empty history".into());
        };
        first.ensure_valid().map_err(|e| e.to_string())?;
        for (k, pair) in self.history.windows(2).enumerate() {
            let (next, trivial) = expand(&pair[0]).map_err(|e| e.to_string())?;
            if trivial || next != pair[1] {
                return Err(format!("term {} is not the expansion of term {k}", k + 1));
            }
        }
        match &self.status {
            SequenceStatus::Terminated { index } => {
                if *index + 1 != self.history.len() || !self.history[*index].is_primitive() {
                    return Err("terminal term is not primitive".into());
                }
            }
            SequenceStatus::Recurrent { i, j, witness } => {
                if i >= j || *j >= self.history.len() {
                    return Err(format!("bad recurrence indices ({i}, {j})"));
                }
                witness.verify(&self.history[*i], &self.history[*j])?;
            }
            SequenceStatus::Exhausted { budget } => {
                if *budget + 1 != self.history.len() {
                    return Err("history length does not match the budget".into());
                }
            }
        }
        Ok(())
    }
}

/// Iterates [`expand`] until the current term is primitive, a term is
/// rigidly isomorphic to an earlier one, or `budget` nontrivial steps ran.
pub fn run_sequence(g: &TubularGroup, budget: usize) -> Result<ExpansionOutcome, ModelError> {
    if budget == 0 {
        return Err(ModelError::InvalidParameters(
            "budget must be at least 1".into(),
        ));
    }
    g.ensure_valid()?;
    let mut history = vec![g.clone()];
    let mut invariants = vec![IsoInvariants::of(g)];
    let mut canonical: HashMap<String, usize> = HashMap::from([(g.to_json(), 0)]);
    loop {
        let current = history.last().expect("nonempty");
        if current.is_primitive() {
            let index = history.len() - 1;
            return Ok(ExpansionOutcome {
                history,
                status: SequenceStatus::Terminated { index },
            });
        }
        if history.len() > budget {
            return Ok(ExpansionOutcome {
                history,
                status: SequenceStatus::Exhausted { budget },
            });
        }
        let (next, trivial) = expand(current)?;
        debug_assert!(!trivial, "non-primitive groups expand nontrivially");
        let j = history.len();
        let inv = IsoInvariants::of(&next);
        let key = next.to_json();
        let mut found = None;
        if let Some(&i) = canonical.get(&key) {
            found = Some((i, RigidIso::identity(&next)));
        } else {
            for (i, (earlier, inv_i)) in history.iter().zip(&invariants).enumerate() {
                if let IsoSearch::Found(w) = detect_with_invariants(earlier, inv_i, &next, &inv) {
                    found = Some((i, w));
                    break;
                }
            }
        }
        history.push(next);
        if let Some((i, witness)) = found {
            return Ok(ExpansionOutcome {
                history,
                status: SequenceStatus::Recurrent { i, j, witness },
            });
        }
        invariants.push(inv);
        canonical.insert(key, j);
    }
}

/// `Σ_e [⟨ū_e⟩ : ⟨u_e⟩]` for a primitive target `target` of `g`: the number
/// of nontrivial expansions needed to reach it is at most this sum.
pub fn length_bound(g: &TubularGroup, target: &TubularGroup) -> Option<BigInt> {
    let mut total = BigInt::zero();
    for e in g.edges() {
        let t = target.edge(&e.id)?;
        let r = parallel_ratio(&t.u, &e.u).ok()??;
        total += r.abs().to_integer()?;
    }
    Some(total)
}
