//! Constructive decompositions: express a lattice vector as the shadow of a
//! signed edge multiset, then reshape that multiset into matchings.

mod bidc;
mod bounded;
mod cascade;
mod config;
mod leave;
mod matching_pair;

pub use bidc::{bidc_reduce, declared_bound, sq_decompose, SqTerm};
pub use bounded::decompose_bounded;
pub use cascade::{build_cascade, random_cascade_seed, verify_cascade, Cascade};
pub use config::{centered_order, make_config, random_configs, SharedPart, ZeroSumConfig};
pub use leave::{cover_leave, edge_radius, push_down, zero_sum_support};
pub use matching_pair::{to_matching_pair, MatchingPair};

use serde::Serialize;

use crate::board::Edge;
use crate::error::{Result, TorqError};
use crate::lattice::{Generator, SignedEdgeSet, SupportVector};

/// One entry of a decomposition's audit log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum AuditItem {
    Generator(Generator),
    Edge { edge: Edge, mult: i64 },
    Config { a: usize, b: usize, c: usize, s: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PhaseReport {
    pub name: String,
    pub gadgets: usize,
    /// Net change of |phi| during the phase; the values sum to |phi|.
    pub edges_added: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecompositionResult {
    pub target: SupportVector,
    pub phi: SignedEdgeSet,
    pub steps: Vec<(String, AuditItem)>,
    pub phases: Vec<PhaseReport>,
}

impl DecompositionResult {
    pub fn size(&self) -> i64 {
        self.phi.size()
    }

    /// Recompute the shadow from scratch and compare with the target.
    pub fn verify(&self) -> Result<()> {
        let shadow = self.phi.shadow();
        let mut diff = shadow.minus(&self.target);
        diff.kind = self.target.kind;
        if diff.is_zero() {
            Ok(())
        } else {
            let (v, w) = diff.entries().next().expect("nonzero");
            Err(TorqError::Verification(format!(
                "shadow differs from target at {v} by {w}"
            )))
        }
    }
}

/// Accumulates phi, the audit log and per-phase size accounting.
pub(crate) struct Recorder {
    pub phi: SignedEdgeSet,
    steps: Vec<(String, AuditItem)>,
    phases: Vec<PhaseReport>,
    current: Option<(String, usize, i64)>,
}

impl Recorder {
    pub fn new(n: usize) -> Self {
        Recorder { phi: SignedEdgeSet::new(n), steps: Vec::new(), phases: Vec::new(), current: None }
    }

    pub fn begin(&mut self, name: &str) {
        self.end();
        self.current = Some((name.to_string(), 0, self.phi.size()));
    }

    pub fn end(&mut self) {
        if let Some((name, gadgets, start)) = self.current.take() {
            self.phases.push(PhaseReport { name, gadgets, edges_added: self.phi.size() - start });
        }
    }

    fn log(&mut self, item: AuditItem) {
        let phase = match &mut self.current {
            Some((name, gadgets, _)) => {
                *gadgets += 1;
                name.clone()
            }
            None => String::new(),
        };
        self.steps.push((phase, item));
    }

    /// Note a rewrite that adds no edges.
    pub fn note(&mut self, item: AuditItem) {
        self.log(item);
    }

    pub fn add_edge(&mut self, edge: Edge, mult: i64) {
        if mult == 0 {
            return;
        }
        self.phi.add(edge, mult);
        self.log(AuditItem::Edge { edge, mult });
    }

    pub fn add_generator(&mut self, g: Generator, edges: &SignedEdgeSet, times: i64) {
        if times == 0 {
            return;
        }
        self.phi.add_scaled(edges, times);
        self.log(AuditItem::Generator(Generator { sign: g.sign * times.signum(), ..g }));
    }

    pub fn finish(mut self, target: &SupportVector) -> Result<DecompositionResult> {
        self.end();
        let out = DecompositionResult {
            target: target.clone(),
            phi: self.phi,
            steps: self.steps,
            phases: self.phases,
        };
        out.verify()?;
        Ok(out)
    }
}
