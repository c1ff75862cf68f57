//! Versioned JSON documents for every result type.
//!
//! Each document carries `"schema": "torq/1"`. Loading validates the schema
//! tag, ranges and canonical ordering, and reports failures with the path to
//! the offending field (for example `entries[3].coord`).

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::board::{AttackMode, Edge, Matching, Part, Vertex};
use crate::decomposition::{DecompositionResult, MatchingPair, PhaseReport};
use crate::error::{Result, TorqError};
use crate::lattice::{LatticeKind, SignedEdgeSet, SupportVector};
use crate::solvers::{CaseKind, ClassicalPlacement, Placement, WSet, WTuple};

pub const SCHEMA: &str = "torq/1";

fn schema() -> String {
    SCHEMA.to_string()
}

fn bad(path: impl std::fmt::Display, msg: impl std::fmt::Display) -> TorqError {
    TorqError::InvalidArgument(format!("{path}: {msg}"))
}

/// Compact JSON followed by a newline.
pub fn to_json<T: Serialize>(doc: &T) -> String {
    let mut s = serde_json::to_string(doc).expect("documents always serialize");
    s.push('\n');
    s
}

/// Parse a document, reporting the failing field path on error.
pub fn from_json<T: DeserializeOwned + Versioned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let doc: T = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        bad(if path == "." { "document".to_string() } else { path }, e.into_inner())
    })?;
    if doc.schema() != SCHEMA {
        return Err(bad("schema", format!("expected \"{SCHEMA}\", got \"{}\"", doc.schema())));
    }
    Ok(doc)
}

pub trait Versioned {
    fn schema(&self) -> &str;
}

macro_rules! versioned {
    ($($t:ty),*) => {$(
        impl Versioned for $t {
            fn schema(&self) -> &str {
                &self.schema
            }
        }
    )*};
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightEntry {
    pub part: Part,
    pub coord: usize,
    pub weight: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SupportVectorDoc {
    #[serde(default = "schema")]
    pub schema: String,
    pub n: usize,
    pub kind: LatticeKind,
    pub entries: Vec<WeightEntry>,
}

impl From<&SupportVector> for SupportVectorDoc {
    fn from(v: &SupportVector) -> Self {
        SupportVectorDoc {
            schema: schema(),
            n: v.n,
            kind: v.kind,
            entries: v.entries().map(|(u, w)| WeightEntry { part: u.part, coord: u.coord, weight: w }).collect(),
        }
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(bad("n", "must be positive"));
    }
    Ok(())
}

impl SupportVectorDoc {
    pub fn to_vector(&self) -> Result<SupportVector> {
        check_n(self.n)?;
        let mut prev: Option<Vertex> = None;
        for (i, e) in self.entries.iter().enumerate() {
            if e.coord >= self.n {
                return Err(bad(format!("entries[{i}].coord"), format!("{} is not below n = {}", e.coord, self.n)));
            }
            if e.weight == 0 {
                return Err(bad(format!("entries[{i}].weight"), "zero weights are not stored"));
            }
            if !self.kind.parts().contains(&e.part) {
                return Err(bad(format!("entries[{i}].part"), "part D does not exist for kind semi"));
            }
            let v = Vertex::new(e.part, e.coord);
            if prev.is_some_and(|p| p >= v) {
                return Err(bad(format!("entries[{i}]"), "entries must be sorted by (part, coord) without repeats"));
            }
            prev = Some(v);
        }
        Ok(SupportVector::from_entries(
            self.n,
            self.kind,
            self.entries.iter().map(|e| (Vertex::new(e.part, e.coord), e.weight)),
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeEntry {
    pub x: usize,
    pub y: usize,
    pub mult: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignedEdgeSetDoc {
    #[serde(default = "schema")]
    pub schema: String,
    pub n: usize,
    pub entries: Vec<EdgeEntry>,
}

impl From<&SignedEdgeSet> for SignedEdgeSetDoc {
    fn from(s: &SignedEdgeSet) -> Self {
        SignedEdgeSetDoc {
            schema: schema(),
            n: s.n,
            entries: s.entries().map(|(e, m)| EdgeEntry { x: e.x, y: e.y, mult: m }).collect(),
        }
    }
}

impl SignedEdgeSetDoc {
    pub fn to_edges(&self) -> Result<SignedEdgeSet> {
        check_edge_entries(self.n, &self.entries, "entries")?;
        Ok(SignedEdgeSet::from_entries(self.n, self.entries.iter().map(|e| (Edge { x: e.x, y: e.y }, e.mult))))
    }
}

fn check_edge_entries(n: usize, entries: &[EdgeEntry], field: &str) -> Result<()> {
    check_n(n)?;
    let mut prev: Option<Edge> = None;
    for (i, e) in entries.iter().enumerate() {
        if e.x >= n || e.y >= n {
            return Err(bad(format!("{field}[{i}]"), format!("({}, {}) is off the board", e.x, e.y)));
        }
        if e.mult == 0 {
            return Err(bad(format!("{field}[{i}].mult"), "zero multiplicities are not stored"));
        }
        let edge = Edge { x: e.x, y: e.y };
        if prev.is_some_and(|p| p >= edge) {
            return Err(bad(format!("{field}[{i}]"), "entries must be sorted by (x, y) without repeats"));
        }
        prev = Some(edge);
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseDoc {
    pub name: String,
    pub gadgets: usize,
    pub edges_added: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecompositionDoc {
    #[serde(default = "schema")]
    pub schema: String,
    pub target: SupportVectorDoc,
    pub phi: SignedEdgeSetDoc,
    pub phases: Vec<PhaseDoc>,
    pub size: i64,
}

impl From<&DecompositionResult> for DecompositionDoc {
    fn from(r: &DecompositionResult) -> Self {
        DecompositionDoc {
            schema: schema(),
            target: (&r.target).into(),
            phi: (&r.phi).into(),
            phases: r
                .phases
                .iter()
                .map(|p: &PhaseReport| PhaseDoc { name: p.name.clone(), gadgets: p.gadgets, edges_added: p.edges_added })
                .collect(),
            size: r.size(),
        }
    }
}

impl DecompositionDoc {
    /// Target and phi, after checking that the shadow of phi is the target
    /// and the recorded size is consistent.
    pub fn to_parts(&self) -> Result<(SupportVector, SignedEdgeSet)> {
        let target = self.target.to_vector().map_err(|e| nest("target", e))?;
        let phi = self.phi.to_edges().map_err(|e| nest("phi", e))?;
        if phi.n != target.n {
            return Err(bad("phi.n", "board size differs from target.n"));
        }
        if phi.size() != self.size {
            return Err(bad("size", format!("recorded {} but phi has size {}", self.size, phi.size())));
        }
        if phi.shadow() != target {
            return Err(TorqError::Verification("shadow of phi differs from the target".into()));
        }
        Ok((target, phi))
    }
}

fn nest(prefix: &str, e: TorqError) -> TorqError {
    match e {
        TorqError::InvalidArgument(m) => TorqError::InvalidArgument(format!("{prefix}.{m}")),
        other => other,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatchingPairDoc {
    #[serde(default = "schema")]
    pub schema: String,
    pub n: usize,
    pub plus: Vec<(usize, usize)>,
    pub minus: Vec<(usize, usize)>,
}

impl MatchingPairDoc {
    pub fn new(n: usize, pair: &MatchingPair) -> Self {
        let pairs = |m: &Matching| m.edges.iter().map(|e| (e.x, e.y)).collect();
        MatchingPairDoc { schema: schema(), n, plus: pairs(&pair.plus), minus: pairs(&pair.minus) }
    }

    pub fn to_pair(&self) -> Result<MatchingPair> {
        check_n(self.n)?;
        let side = |field: &str, v: &[(usize, usize)]| -> Result<Matching> {
            for (i, &(x, y)) in v.iter().enumerate() {
                if x >= self.n || y >= self.n {
                    return Err(bad(format!("{field}[{i}]"), format!("({x}, {y}) is off the board")));
                }
            }
            Ok(Matching { edges: v.iter().map(|&(x, y)| Edge { x, y }).collect() })
        };
        Ok(MatchingPair { plus: side("plus", &self.plus)?, minus: side("minus", &self.minus)?, configs: Vec::new() })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlacementDoc {
    #[serde(default = "schema")]
    pub schema: String,
    pub n: usize,
    pub mode: AttackMode,
    pub queens: Vec<(usize, usize)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_queens: Option<Vec<(usize, usize)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub toroidal_attack_pairs: Option<Vec<(usize, usize)>>,
}

impl From<&Placement> for PlacementDoc {
    fn from(p: &Placement) -> Self {
        PlacementDoc {
            schema: schema(),
            n: p.n,
            mode: p.mode,
            queens: p.queens.clone(),
            fixed_queens: None,
            toroidal_attack_pairs: None,
        }
    }
}

impl From<&ClassicalPlacement> for PlacementDoc {
    fn from(p: &ClassicalPlacement) -> Self {
        PlacementDoc {
            fixed_queens: Some(p.fixed_queens.clone()),
            toroidal_attack_pairs: Some(p.toroidal_attack_pairs.clone()),
            ..(&p.placement).into()
        }
    }
}

impl PlacementDoc {
    pub fn to_placement(&self) -> Result<Placement> {
        check_n(self.n)?;
        for (i, &(r, c)) in self.queens.iter().enumerate() {
            if r >= self.n || c >= self.n {
                return Err(bad(format!("queens[{i}]"), format!("({r}, {c}) is off the board")));
            }
        }
        Ok(Placement { n: self.n, mode: self.mode, queens: self.queens.clone() })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WSetDoc {
    #[serde(default = "schema")]
    pub schema: String,
    pub n: usize,
    pub case: CaseKind,
    pub tuples: [WTuple; 3],
}

impl From<&WSet> for WSetDoc {
    fn from(w: &WSet) -> Self {
        WSetDoc { schema: schema(), n: w.n, case: w.case, tuples: w.tuples }
    }
}

impl WSetDoc {
    pub fn to_wset(&self) -> Result<WSet> {
        let w = WSet { n: self.n, case: self.case, tuples: self.tuples };
        crate::solvers::validate_wset(&w)?;
        Ok(w)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignRun {
    pub seed: u64,
    pub steps: usize,
    pub q_inside_fraction: f64,
    pub d_inside_fraction: f64,
    pub estimate_log: f64,
    pub estimate_normalized: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignSummary {
    pub inside_fraction_median: f64,
    pub estimate_mean_log: f64,
    pub estimate_mean_normalized: f64,
}

/// A batch of greedy runs, ordered by seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignDoc {
    #[serde(default = "schema")]
    pub schema: String,
    pub n: usize,
    pub seeds: Vec<u64>,
    pub b: f64,
    pub stop_fraction: f64,
    pub runs: Vec<CampaignRun>,
    pub summary: CampaignSummary,
}

impl CampaignDoc {
    pub fn new(n: usize, b: f64, stop_fraction: f64, mut runs: Vec<CampaignRun>) -> Self {
        runs.sort_by_key(|r| r.seed);
        let mut inside: Vec<f64> = runs.iter().map(|r| r.q_inside_fraction).collect();
        inside.sort_by(f64::total_cmp);
        let median = match inside.len() {
            0 => f64::NAN,
            k if k % 2 == 1 => inside[k / 2],
            k => (inside[k / 2 - 1] + inside[k / 2]) / 2.0,
        };
        let mean = |f: fn(&CampaignRun) -> f64| runs.iter().map(f).sum::<f64>() / runs.len() as f64;
        let summary = CampaignSummary {
            inside_fraction_median: median,
            estimate_mean_log: mean(|r| r.estimate_log),
            estimate_mean_normalized: mean(|r| r.estimate_normalized),
        };
        CampaignDoc { schema: schema(), n, seeds: runs.iter().map(|r| r.seed).collect(), b, stop_fraction, runs, summary }
    }
}

versioned!(SupportVectorDoc, SignedEdgeSetDoc, DecompositionDoc, MatchingPairDoc, PlacementDoc, WSetDoc, CampaignDoc);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn support_vector_round_trip() {
        let v = SupportVector::from_entries(
            7,
            LatticeKind::Queens,
            [(Vertex::new(Part::S, 3), -2), (Vertex::new(Part::X, 1), 1), (Vertex::new(Part::D, 6), 4)],
        );
        let text = to_json(&SupportVectorDoc::from(&v));
        assert!(text.starts_with("{\"schema\":\"torq/1\",\"n\":7,\"kind\":\"queens\""));
        let back: SupportVectorDoc = from_json(&text).unwrap();
        assert_eq!(back.to_vector().unwrap(), v);
        assert_eq!(to_json(&back), text);
    }

    #[test]
    fn negative_n_names_the_field() {
        let e = from_json::<SupportVectorDoc>(r#"{"schema":"torq/1","n":-3,"kind":"queens","entries":[]}"#).unwrap_err();
        assert!(e.to_string().contains("n: invalid value"), "{e}");
    }

    #[test]
    fn out_of_range_coord_names_the_entry() {
        let doc: SupportVectorDoc = from_json(
            r#"{"schema":"torq/1","n":5,"kind":"queens","entries":[{"part":"X","coord":1,"weight":1},{"part":"Y","coord":9,"weight":1}]}"#,
        )
        .unwrap();
        let e = doc.to_vector().unwrap_err();
        assert!(e.to_string().contains("entries[1].coord"), "{e}");
    }

    #[test]
    fn wrong_schema_and_malformed_json() {
        assert!(from_json::<SignedEdgeSetDoc>(r#"{"schema":"torq/0","n":5,"entries":[]}"#).is_err());
        let e = from_json::<SignedEdgeSetDoc>(r#"{"n":5,"entries":[{"x":1,"y":2}]}"#).unwrap_err();
        assert!(e.to_string().contains("entries[0]"), "{e}");
        assert!(from_json::<SignedEdgeSetDoc>("{").is_err());
    }

    #[test]
    fn placement_round_trip() {
        let p = Placement { n: 5, mode: AttackMode::Toroidal, queens: vec![(0, 0), (1, 2), (2, 4), (3, 1), (4, 3)] };
        let text = to_json(&PlacementDoc::from(&p));
        assert!(text.contains("\"mode\":\"toroidal\",\"queens\":[[0,0],[1,2]"));
        let back: PlacementDoc = from_json(&text).unwrap();
        assert_eq!(back.to_placement().unwrap(), p);
    }
}
