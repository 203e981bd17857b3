//! Residual-finiteness verdicts with embedded certificates.
//!
//! Two routes reach a verdict. The expansion route follows the expansion
//! sequence of the group (and, if that runs out of budget, of every proper
//! connected subtubular group): a primitive target proves residual
//! finiteness, a recurrence disproves it. For a single vertex the regulating
//! tuple search is a complete decision and is authoritative; the expansion
//! route is run alongside it as a cross-check.

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use super::sequence::{length_bound, run_sequence, ExpansionOutcome, SequenceStatus};
use crate::exactlat::int_string;
use crate::model::{ModelError, TubularGroup};
use crate::regulating::{
    primitive_domain, single_vertex_decide, NoTupleReason, RegulatingError, SingleVertexVerdict,
    TupleCertificate,
};

pub const DEFAULT_BUDGET: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecideOptions {
    /// Nontrivial expansions allowed per sequence.
    pub budget: usize,
    /// Also run the expansion route on single-vertex groups and fail if it
    /// contradicts the regulating search.
    pub cross_check: bool,
}

impl Default for DecideOptions {
    fn default() -> Self {
        DecideOptions {
            budget: DEFAULT_BUDGET,
            cross_check: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VerdictKind {
    #[serde(rename = "RF")]
    Rf,
    #[serde(rename = "NotRF")]
    NotRf,
    Unknown,
}

impl std::fmt::Display for VerdictKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            VerdictKind::Rf => "RF",
            VerdictKind::NotRf => "NotRF",
            VerdictKind::Unknown => "Unknown",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Evidence {
    /// The expansion sequence of the whole group reached a primitive group.
    PrimitiveTarget {
        outcome: ExpansionOutcome,
        #[serde(with = "int_string")]
        length_bound: BigInt,
    },
    /// The subtubular group on `edges` has a recurrent expansion sequence.
    Recurrent {
        edges: Vec<String>,
        outcome: ExpansionOutcome,
    },
    RegulatingTuple {
        certificate: TupleCertificate,
        primitive_domain: TubularGroup,
    },
    /// The single-vertex subtubular group on `edges` has no regulating tuple.
    NoTuple {
        edges: Vec<String>,
        reason: NoTupleReason,
    },
    /// The sequence of the subtubular group on `edges` ran out of budget.
    Exhausted {
        edges: Vec<String>,
        outcome: ExpansionOutcome,
    },
}

impl Evidence {
    /// The verdict this piece of evidence supports on its own.
    pub fn supports(&self) -> VerdictKind {
        match self {
            Evidence::PrimitiveTarget { .. } | Evidence::RegulatingTuple { .. } => VerdictKind::Rf,
            Evidence::Recurrent { .. } | Evidence::NoTuple { .. } => VerdictKind::NotRf,
            Evidence::Exhausted { .. } => VerdictKind::Unknown,
        }
    }

    /// Re-checks the evidence against `g` from its own data.
    pub fn verify(&self, g: &TubularGroup) -> Result<(), String> {
        let sub = |edges: &[String]| g.subtubular(edges).map_err(|e| e.to_string());
        let starts_at = |outcome: &ExpansionOutcome, h: &TubularGroup| {
            if outcome.history.first() == Some(h) {
                Ok(())
            } else {
                Err("history does not start at the group".to_string())
            }
        };
        match self {
            Evidence::PrimitiveTarget {
                outcome,
                length_bound: bound,
            } => {
                outcome.verify()?;
                starts_at(outcome, g)?;
                let target = outcome.target().ok_or("sequence did not terminate")?;
                let recomputed = length_bound(g, target).ok_or("target edges do not match")?;
                if &recomputed != bound {
                    return Err(format!("length bound is {recomputed}, recorded {bound}"));
                }
                if *bound < BigInt::from(outcome.steps()) {
                    return Err("sequence is longer than the length bound".into());
                }
                Ok(())
            }
            Evidence::Recurrent { edges, outcome } => {
                outcome.verify()?;
                starts_at(outcome, &sub(edges)?)?;
                match outcome.status {
                    SequenceStatus::Recurrent { .. } => Ok(()),
                    _ => Err("sequence is not recurrent".into()),
                }
            }
            Evidence::RegulatingTuple {
                certificate,
                primitive_domain: domain,
            } => {
                certificate.verify(g).map_err(|e| e.to_string())?;
                let rebuilt = primitive_domain(g, certificate).map_err(|e| e.to_string())?;
                if &rebuilt != domain || !domain.is_primitive() {
                    return Err("primitive domain does not match the certificate".into());
                }
                Ok(())
            }
            Evidence::NoTuple { edges, reason } => SingleVertexVerdict::NoTuple {
                reason: reason.clone(),
            }
            .verify(&sub(edges)?)
            .map_err(|e| e.to_string()),
            Evidence::Exhausted { edges, outcome } => {
                outcome.verify()?;
                starts_at(outcome, &sub(edges)?)?;
                match outcome.status {
                    SequenceStatus::Exhausted { .. } => Ok(()),
                    _ => Err("sequence is not exhausted".into()),
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub verdict: VerdictKind,
    pub group: TubularGroup,
    pub evidence: Vec<Evidence>,
}

impl Verdict {
    /// Re-checks every piece of evidence and that the verdict follows from
    /// it, without repeating any search.
    pub fn verify(&self) -> Result<(), String> {
        self.group.ensure_valid().map_err(|e| e.to_string())?;
        for (i, e) in self.evidence.iter().enumerate() {
            e.verify(&self.group)
                .map_err(|m| format!("evidence {i}: {m}"))?;
        }
        let has = |k: VerdictKind| self.evidence.iter().any(|e| e.supports() == k);
        if has(VerdictKind::Rf) && has(VerdictKind::NotRf) {
            return Err("evidence supports both verdicts".into());
        }
        let ok = match self.verdict {
            VerdictKind::Rf => has(VerdictKind::Rf),
            VerdictKind::NotRf => has(VerdictKind::NotRf),
            VerdictKind::Unknown => !has(VerdictKind::Rf) && !has(VerdictKind::NotRf),
        };
        if !ok {
            return Err(format!(
                "evidence does not support the verdict {}",
                self.verdict
            ));
        }
        Ok(())
    }

    /// The recurrence evidence, if any.
    pub fn recurrence(&self) -> Option<(&[String], &ExpansionOutcome)> {
        self.evidence.iter().find_map(|e| match e {
            Evidence::Recurrent { edges, outcome } => Some((edges.as_slice(), outcome)),
            _ => None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DecideError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Regulating(#[from] RegulatingError),
    #[error("the regulating search says {regulating} but the expansion route says {expansion}")]
    RouteDisagreement {
        regulating: VerdictKind,
        expansion: VerdictKind,
    },
}

/// Verdict of a single route with its evidence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RouteVerdict {
    pub kind: VerdictKind,
    pub evidence: Vec<Evidence>,
}

fn all_edges(g: &TubularGroup) -> Vec<String> {
    g.edge_ids().map(str::to_string).collect()
}

/// The expansion route: the group's own sequence, then the sequences of its
/// proper connected subtubular groups looking for a recurrence.
pub fn expansion_route(g: &TubularGroup, budget: usize) -> Result<RouteVerdict, DecideError> {
    let outcome = run_sequence(g, budget)?;
    match &outcome.status {
        SequenceStatus::Terminated { .. } => {
            let bound = length_bound(g, outcome.target().expect("terminated"))
                .expect("targets keep the edge set and directions");
            return Ok(RouteVerdict {
                kind: VerdictKind::Rf,
                evidence: vec![Evidence::PrimitiveTarget {
                    outcome,
                    length_bound: bound,
                }],
            });
        }
        SequenceStatus::Recurrent { .. } => {
            return Ok(RouteVerdict {
                kind: VerdictKind::NotRf,
                evidence: vec![Evidence::Recurrent {
                    edges: all_edges(g),
                    outcome,
                }],
            });
        }
        SequenceStatus::Exhausted { .. } => {}
    }
    let mut exhausted = vec![Evidence::Exhausted {
        edges: all_edges(g),
        outcome,
    }];
    let full = g.edges().len();
    for edges in g.connected_edge_subsets() {
        if edges.len() == full {
            continue;
        }
        let out = run_sequence(&g.subtubular(&edges)?, budget)?;
        match out.status {
            SequenceStatus::Recurrent { .. } => {
                return Ok(RouteVerdict {
                    kind: VerdictKind::NotRf,
                    evidence: vec![Evidence::Recurrent {
                        edges,
                        outcome: out,
                    }],
                });
            }
            SequenceStatus::Exhausted { .. } => exhausted.push(Evidence::Exhausted {
                edges,
                outcome: out,
            }),
            SequenceStatus::Terminated { .. } => {}
        }
    }
    Ok(RouteVerdict {
        kind: VerdictKind::Unknown,
        evidence: exhausted,
    })
}

/// The regulating route for a single-vertex group: complete.
pub fn regulating_route(g: &TubularGroup) -> Result<RouteVerdict, DecideError> {
    Ok(match single_vertex_decide(g)? {
        SingleVertexVerdict::Regulating { certificate, .. } => {
            let domain = primitive_domain(g, &certificate)?;
            RouteVerdict {
                kind: VerdictKind::Rf,
                evidence: vec![Evidence::RegulatingTuple {
                    certificate,
                    primitive_domain: domain,
                }],
            }
        }
        SingleVertexVerdict::NoTuple { reason } => RouteVerdict {
            kind: VerdictKind::NotRf,
            evidence: vec![Evidence::NoTuple {
                edges: all_edges(g),
                reason,
            }],
        },
    })
}

pub fn decide(g: &TubularGroup, options: DecideOptions) -> Result<Verdict, DecideError> {
    g.ensure_valid()?;
    if options.budget == 0 {
        return Err(ModelError::InvalidParameters("budget must be at least 1".into()).into());
    }
    let (kind, evidence) = if g.is_single_vertex() {
        let reg = regulating_route(g)?;
        let mut evidence = reg.evidence;
        if options.cross_check {
            let exp = expansion_route(g, options.budget)?;
            if exp.kind != VerdictKind::Unknown && exp.kind != reg.kind {
                return Err(DecideError::RouteDisagreement {
                    regulating: reg.kind,
                    expansion: exp.kind,
                });
            }
            // Exhausted histories add nothing to a complete decision.
            if exp.kind != VerdictKind::Unknown {
                evidence.extend(exp.evidence);
            }
        }
        (reg.kind, evidence)
    } else {
        let exp = expansion_route(g, options.budget)?;
        if exp.kind != VerdictKind::Unknown {
            (exp.kind, exp.evidence)
        } else {
            match single_vertex_obstruction(g)? {
                Some(e) => (VerdictKind::NotRf, vec![e]),
                None => (VerdictKind::Unknown, exp.evidence),
            }
        }
    };
    Ok(Verdict {
        verdict: kind,
        group: g.clone(),
        evidence,
    })
}

/// A single-vertex subtubular group without a regulating tuple, which
/// obstructs residual finiteness of the whole group.
fn single_vertex_obstruction(g: &TubularGroup) -> Result<Option<Evidence>, DecideError> {
    for edges in g.connected_edge_subsets() {
        let sub = g.subtubular(&edges)?;
        if !sub.is_single_vertex() {
            continue;
        }
        if let SingleVertexVerdict::NoTuple { reason } = single_vertex_decide(&sub)? {
            return Ok(Some(Evidence::NoTuple { edges, reason }));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactlat::{Lattice2, Mat2, QVec2, Rat};
    use crate::model::{snowflake, Edge, Vertex};

    fn v(x: i64, y: i64) -> QVec2 {
        QVec2::from_ints(x, y)
    }

    fn non_recurrent_example() -> TubularGroup {
        TubularGroup::single_vertex(
            Lattice2::z2(),
            &[("s", v(1, 0), v(2, 0)), ("t", v(0, 1), v(1, 1))],
        )
    }

    #[test]
    fn first_example_is_rf() {
        let g = TubularGroup::single_vertex(
            Lattice2::z2(),
            &[("s", v(1, 0), v(2, 2)), ("t", v(0, 1), v(1, 1))],
        );
        let verdict = decide(&g, DecideOptions::default()).unwrap();
        assert_eq!(verdict.verdict, VerdictKind::Rf);
        verdict.verify().unwrap();
        assert!(verdict
            .evidence
            .iter()
            .any(|e| matches!(e, Evidence::PrimitiveTarget { .. })));
    }

    #[test]
    fn non_recurrent_example_is_caught_by_a_subtubular_group() {
        let g = non_recurrent_example();
        let route = expansion_route(&g, DEFAULT_BUDGET).unwrap();
        assert_eq!(route.kind, VerdictKind::NotRf);
        let verdict = decide(&g, DecideOptions::default()).unwrap();
        assert_eq!(verdict.verdict, VerdictKind::NotRf);
        verdict.verify().unwrap();
        let (edges, outcome) = verdict.recurrence().unwrap();
        assert_eq!(edges, ["s".to_string()]);
        let SequenceStatus::Recurrent { witness, .. } = &outcome.status else {
            panic!("not recurrent");
        };
        assert_eq!(
            witness.vertices[0].matrix.inverse().unwrap(),
            Mat2::diag(Rat::from_int(2), Rat::one())
        );
    }

    #[test]
    fn verdict_json_round_trips_and_rechecks() {
        let g = snowflake(5, 3).unwrap();
        let verdict = decide(&g, DecideOptions::default()).unwrap();
        assert_eq!(verdict.verdict, VerdictKind::NotRf);
        let text = serde_json::to_string(&verdict).unwrap();
        assert!(text.starts_with("{\"verdict\":\"NotRF\""));
        let back: Verdict = serde_json::from_str(&text).unwrap();
        assert_eq!(back, verdict);
        back.verify().unwrap();
    }

    #[test]
    fn tampered_verdicts_fail_recheck() {
        let g = snowflake(3, 2).unwrap();
        let mut verdict = decide(&g, DecideOptions::default()).unwrap();
        assert_eq!(verdict.verdict, VerdictKind::Rf);
        verdict.verdict = VerdictKind::NotRf;
        assert!(verdict.verify().is_err());
        let mut verdict = decide(&g, DecideOptions::default()).unwrap();
        verdict.group = snowflake(3, 1).unwrap();
        assert!(verdict.verify().is_err());
    }

    #[test]
    fn multi_vertex_groups_use_the_expansion_route() {
        let g = TubularGroup::checked(
            vec![
                Vertex {
                    id: "a".into(),
                    lattice: Lattice2::z2(),
                },
                Vertex {
                    id: "b".into(),
                    lattice: Lattice2::z2(),
                },
            ],
            vec![
                Edge::new("e", "a", "b", v(2, 0), v(0, 1)),
                Edge::new("f", "b", "b", v(1, 0), v(0, 1)),
            ],
        )
        .unwrap();
        let verdict = decide(&g, DecideOptions::default()).unwrap();
        assert_eq!(verdict.verdict, VerdictKind::Rf);
        verdict.verify().unwrap();

        // a loop with commensurable distinct images obstructs
        let h = TubularGroup::checked(
            vec![
                Vertex {
                    id: "a".into(),
                    lattice: Lattice2::z2(),
                },
                Vertex {
                    id: "b".into(),
                    lattice: Lattice2::z2(),
                },
            ],
            vec![
                Edge::new("e", "a", "b", v(1, 0), v(0, 1)),
                Edge::new("f", "b", "b", v(1, 0), v(3, 0)),
            ],
        )
        .unwrap();
        let verdict = decide(&h, DecideOptions::default()).unwrap();
        assert_eq!(verdict.verdict, VerdictKind::NotRf);
        verdict.verify().unwrap();
    }

    #[test]
    fn zero_budget_is_rejected() {
        let g = snowflake(2, 1).unwrap();
        let opts = DecideOptions {
            budget: 0,
            cross_check: true,
        };
        assert!(decide(&g, opts).is_err());
    }
}
