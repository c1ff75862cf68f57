//! The queens hypergraph universe: four vertex parts, edges dictated by
//! (row, column) pairs, coordinate views, intervals and matching checks.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Result, TorqError};

/// Vertex part: rows, columns, sum diagonals, difference diagonals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Part {
    X,
    Y,
    S,
    D,
}

impl Part {
    pub const ALL: [Part; 4] = [Part::X, Part::Y, Part::S, Part::D];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Part {
        Part::ALL[i]
    }

    pub fn parse(s: &str) -> Option<Part> {
        match s {
            "X" => Some(Part::X),
            "Y" => Some(Part::Y),
            "S" => Some(Part::S),
            "D" => Some(Part::D),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Part::X => "X",
            Part::Y => "Y",
            Part::S => "S",
            Part::D => "D",
        }
    }
}

/// A vertex: part plus canonical coordinate (a residue for toroidal boards).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Vertex {
    pub part: Part,
    pub coord: usize,
}

impl Vertex {
    pub fn new(part: Part, coord: usize) -> Self {
        Vertex { part, coord }
    }

    /// Vertex from a possibly negative or oversized coordinate, reduced mod n.
    pub fn wrap(n: usize, part: Part, coord: i64) -> Self {
        Vertex { part, coord: residue(n, coord) }
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}^{}", self.coord, self.part.name())
    }
}

/// A toroidal edge, determined by its row `x` and column `y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub x: usize,
    pub y: usize,
}

impl Edge {
    pub fn s(self, n: usize) -> usize {
        (self.x + self.y) % n
    }

    pub fn d(self, n: usize) -> usize {
        (self.x + n - self.y) % n
    }

    /// The four toroidal vertices of the edge.
    pub fn vertices(self, n: usize) -> [Vertex; 4] {
        [
            Vertex::new(Part::X, self.x),
            Vertex::new(Part::Y, self.y),
            Vertex::new(Part::S, self.s(n)),
            Vertex::new(Part::D, self.d(n)),
        ]
    }

    /// Edge from arbitrary integer coordinates, reduced mod n.
    pub fn wrap(n: usize, x: i64, y: i64) -> Self {
        Edge { x: residue(n, x), y: residue(n, y) }
    }
}

/// The unique edge through row `x` and column `y`.
pub fn edge_of(n: usize, x: usize, y: usize) -> Result<Edge> {
    if n == 0 || x >= n || y >= n {
        return Err(TorqError::InvalidArgument(format!(
            "coordinates ({x}, {y}) out of range for n = {n}"
        )));
    }
    Ok(Edge { x, y })
}

/// Canonical residue of `c` modulo `n`.
pub fn residue(n: usize, c: i64) -> usize {
    c.rem_euclid(n as i64) as usize
}

/// Lower and upper centered bounds: `[-(n-1)/2, (n-1)/2]` for odd n,
/// `[-n/2 + 1, n/2]` for even n.
pub fn centered_range(n: usize) -> (i64, i64) {
    let n = n as i64;
    if n % 2 == 1 {
        (-(n - 1) / 2, (n - 1) / 2)
    } else {
        (-n / 2 + 1, n / 2)
    }
}

/// Centered representative of a residue.
pub fn centered(n: usize, coord: usize) -> i64 {
    let (_, hi) = centered_range(n);
    let c = (coord % n) as i64;
    if c > hi {
        c - n as i64
    } else {
        c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoardKind {
    QueensToroidal,
    SemiqueensToroidal,
    QueensClassical,
}

/// One of the three boards, optionally with holes.
///
/// Classical boards index sum diagonals by `x + y` and difference diagonals
/// by `x - y + n - 1`, both in `0..2n-1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TorusGraph {
    pub n: usize,
    pub kind: BoardKind,
    pub removed: BTreeSet<Vertex>,
}

impl TorusGraph {
    pub fn new(n: usize, kind: BoardKind) -> Result<Self> {
        Self::with_removed(n, kind, BTreeSet::new())
    }

    pub fn queens(n: usize) -> Result<Self> {
        Self::new(n, BoardKind::QueensToroidal)
    }

    pub fn with_removed(n: usize, kind: BoardKind, removed: BTreeSet<Vertex>) -> Result<Self> {
        if n == 0 {
            return Err(TorqError::InvalidArgument("n must be at least 1".into()));
        }
        let g = TorusGraph { n, kind, removed: BTreeSet::new() };
        if let Some(v) = removed.iter().find(|v| !g.is_board_vertex(**v)) {
            return Err(TorqError::InvalidArgument(format!("{v} is not a vertex of the board")));
        }
        Ok(TorusGraph { removed, ..g })
    }

    pub fn parts(&self) -> &'static [Part] {
        match self.kind {
            BoardKind::SemiqueensToroidal => &Part::ALL[..3],
            _ => &Part::ALL,
        }
    }

    pub fn part_size(&self, p: Part) -> usize {
        match (self.kind, p) {
            (BoardKind::QueensClassical, Part::S | Part::D) => 2 * self.n - 1,
            _ => self.n,
        }
    }

    fn is_board_vertex(&self, v: Vertex) -> bool {
        self.parts().contains(&v.part) && v.coord < self.part_size(v.part)
    }

    pub fn contains_vertex(&self, v: Vertex) -> bool {
        self.is_board_vertex(v) && !self.removed.contains(&v)
    }

    /// All present vertices in (part, coord) order.
    pub fn vertices(&self) -> Vec<Vertex> {
        self.parts()
            .iter()
            .flat_map(|&p| (0..self.part_size(p)).map(move |c| Vertex::new(p, c)))
            .filter(|v| !self.removed.contains(v))
            .collect()
    }

    /// Vertices of an edge under this board's conventions.
    pub fn edge_vertices(&self, e: Edge) -> Vec<Vertex> {
        let n = self.n;
        match self.kind {
            BoardKind::QueensToroidal => e.vertices(n).to_vec(),
            BoardKind::SemiqueensToroidal => e.vertices(n)[..3].to_vec(),
            BoardKind::QueensClassical => vec![
                Vertex::new(Part::X, e.x),
                Vertex::new(Part::Y, e.y),
                Vertex::new(Part::S, e.x + e.y),
                Vertex::new(Part::D, e.x + n - 1 - e.y),
            ],
        }
    }

    pub fn has_edge(&self, e: Edge) -> bool {
        e.x < self.n
            && e.y < self.n
            && self.edge_vertices(e).iter().all(|v| !self.removed.contains(v))
    }

    /// All present edges sorted by (x, y).
    pub fn edges(&self) -> Vec<Edge> {
        let n = self.n;
        (0..n)
            .flat_map(|x| (0..n).map(move |y| Edge { x, y }))
            .filter(|&e| self.has_edge(e))
            .collect()
    }

    /// Edges of the board containing `v`, sorted by (x, y).
    pub fn edges_through(&self, v: Vertex) -> Vec<Edge> {
        if !self.contains_vertex(v) {
            return Vec::new();
        }
        let n = self.n as i64;
        let c = v.coord as i64;
        let classical = self.kind == BoardKind::QueensClassical;
        let mut out: Vec<Edge> = (0..n)
            .filter_map(|x| {
                let (ex, ey) = match v.part {
                    Part::X => (c, x),
                    Part::Y => (x, c),
                    Part::S if classical => (x, c - x),
                    Part::D if classical => (x, x + n - 1 - c),
                    Part::S => (x, (c - x).rem_euclid(n)),
                    Part::D => (x, (x - c).rem_euclid(n)),
                };
                (0..n).contains(&ey).then_some(Edge { x: ex as usize, y: ey as usize })
            })
            .filter(|&e| self.has_edge(e))
            .collect();
        out.sort();
        out
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.edges_through(v).len()
    }
}

/// Whether the centered sum or difference of an edge leaves the centered range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Wrap {
    None,
    Sum,
    Diff,
    Both,
}

pub fn wraps(n: usize, e: Edge) -> Wrap {
    let (lo, hi) = centered_range(n);
    let a = centered(n, e.x);
    let b = centered(n, e.y);
    let out = |v: i64| v < lo || v > hi;
    match (out(a + b), out(a - b)) {
        (false, false) => Wrap::None,
        (true, false) => Wrap::Sum,
        (false, true) => Wrap::Diff,
        (true, true) => Wrap::Both,
    }
}

/// Odd-n parity criterion for wrap-around: centered S and D coordinates of
/// different parity.
pub fn wrap_parity_test(n: usize, e: Edge) -> Result<bool> {
    if n.is_multiple_of(2) {
        return Err(TorqError::Unsupported(
            "the parity criterion for wrap-around holds only for odd n".into(),
        ));
    }
    let s = centered(n, e.s(n));
    let d = centered(n, e.d(n));
    Ok(s.rem_euclid(2) != d.rem_euclid(2))
}

/// Number of edges of `g` containing both `u` and `v`.
pub fn pair_degree(g: &TorusGraph, u: Vertex, v: Vertex) -> Result<usize> {
    if u.part == v.part {
        return Err(TorqError::InvalidArgument(format!("{u} and {v} lie in the same part")));
    }
    Ok(g.edges_through(u)
        .into_iter()
        .filter(|&e| g.edge_vertices(e).contains(&v))
        .count())
}

/// Box interval `I_s` or square interval `I'_s` in centered coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Shape {
    Box,
    Square,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interval {
    pub shape: Shape,
    pub s: usize,
}

impl Interval {
    pub fn boxed(s: usize) -> Self {
        Interval { shape: Shape::Box, s }
    }

    pub fn square(s: usize) -> Self {
        Interval { shape: Shape::Square, s }
    }

    /// Largest admissible |centered coordinate| in part `p`.
    pub fn radius(&self, p: Part) -> i64 {
        match (self.shape, p) {
            (Shape::Box, Part::X | Part::Y) => (2 * self.s / 3) as i64,
            _ => self.s as i64,
        }
    }

    pub fn contains(&self, n: usize, v: Vertex) -> bool {
        centered(n, v.coord).abs() <= self.radius(v.part)
    }
}

/// Edges through `v` whose other vertices all lie in `interval` (closed form).
pub fn edges_into(g: &TorusGraph, v: Vertex, interval: Interval) -> Vec<Edge> {
    g.edges_through(v)
        .into_iter()
        .filter(|&e| {
            g.edge_vertices(e)
                .iter()
                .filter(|&&u| u != v)
                .all(|&u| interval.contains(g.n, u))
        })
        .collect()
}

/// Edges through `v` with at least one other vertex in `interval` (open form).
pub fn edges_touching(g: &TorusGraph, v: Vertex, interval: Interval) -> Vec<Edge> {
    g.edges_through(v)
        .into_iter()
        .filter(|&e| {
            g.edge_vertices(e)
                .iter()
                .any(|&u| u != v && interval.contains(g.n, u))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttackMode {
    Classical,
    Toroidal,
}

/// Whether two queens at distinct squares attack each other.
pub fn attacks(n: usize, mode: AttackMode, q1: (usize, usize), q2: (usize, usize)) -> Result<bool> {
    if q1 == q2 {
        return Err(TorqError::InvalidArgument(format!("identical squares {q1:?}")));
    }
    let (r1, c1) = (q1.0 as i64, q1.1 as i64);
    let (r2, c2) = (q2.0 as i64, q2.1 as i64);
    if r1 == r2 || c1 == c2 {
        return Ok(true);
    }
    let n = n as i64;
    Ok(match mode {
        AttackMode::Classical => r1 + c1 == r2 + c2 || r1 - c1 == r2 - c2,
        AttackMode::Toroidal => {
            (r1 + c1 - r2 - c2).rem_euclid(n) == 0 || (r1 - c1 - r2 + c2).rem_euclid(n) == 0
        }
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Matching {
    pub edges: Vec<Edge>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchingReport {
    /// Edges pairwise disjoint and all present in the board.
    pub valid: bool,
    /// Every board vertex covered exactly once (only meaningful if requested).
    pub perfect: bool,
    /// First vertex covered twice, if any.
    pub conflict: Option<Vertex>,
    /// First edge not present in the board, if any.
    pub foreign_edge: Option<Edge>,
    pub uncovered: usize,
}

pub fn verify_matching(g: &TorusGraph, m: &Matching, require_perfect: bool) -> MatchingReport {
    let mut seen = BTreeSet::new();
    let mut conflict = None;
    let mut foreign_edge = None;
    for &e in &m.edges {
        if foreign_edge.is_none() && !g.has_edge(e) {
            foreign_edge = Some(e);
        }
        for v in g.edge_vertices(e) {
            if !seen.insert(v) && conflict.is_none() {
                conflict = Some(v);
            }
        }
    }
    let valid = conflict.is_none() && foreign_edge.is_none();
    let uncovered = g.vertices().iter().filter(|v| !seen.contains(v)).count();
    MatchingReport {
        valid,
        perfect: require_perfect && valid && uncovered == 0,
        conflict,
        foreign_edge,
        uncovered,
    }
}

/// Odd/even counts of centered coordinates in the two diagonal parts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParityCensus {
    pub odd_s: usize,
    pub even_s: usize,
    pub odd_d: usize,
    pub even_d: usize,
    pub disparity: usize,
}

pub fn parity_census<I: IntoIterator<Item = Vertex>>(n: usize, vertices: I) -> ParityCensus {
    let mut counts: BTreeMap<(Part, bool), usize> = BTreeMap::new();
    for v in vertices {
        if matches!(v.part, Part::S | Part::D) {
            *counts.entry((v.part, centered(n, v.coord).rem_euclid(2) == 1)).or_default() += 1;
        }
    }
    let get = |p, odd| counts.get(&(p, odd)).copied().unwrap_or(0);
    let (odd_s, odd_d) = (get(Part::S, true), get(Part::D, true));
    ParityCensus {
        odd_s,
        even_s: get(Part::S, false),
        odd_d,
        even_d: get(Part::D, false),
        disparity: odd_s.abs_diff(odd_d),
    }
}

pub fn graph_parity_census(g: &TorusGraph) -> ParityCensus {
    parity_census(g.n, g.vertices())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_of_examples() {
        let e = edge_of(5, 3, 4).unwrap();
        assert_eq!((e.s(5), e.d(5)), (2, 4));
        let e = edge_of(8, 7, 2).unwrap();
        assert_eq!((e.s(8), e.d(8)), (1, 5));
        assert!(edge_of(5, 5, 0).is_err());
    }

    #[test]
    fn centered_views() {
        assert_eq!(centered(5, 4), -1);
        assert_eq!(centered(5, 2), 2);
        assert_eq!(centered(6, 3), 3);
        assert_eq!(centered(6, 4), -2);
    }

    #[test]
    fn wrap_examples() {
        assert_eq!(wraps(5, Edge { x: 0, y: 0 }), Wrap::None);
        assert_eq!(wraps(5, Edge::wrap(5, -2, -1)), Wrap::Sum);
        assert!(!wrap_parity_test(7, Edge { x: 0, y: 0 }).unwrap());
        // (12, 12) is centered (-1, -1): s = -2 and d = 0 share parity.
        assert!(!wrap_parity_test(13, Edge { x: 12, y: 12 }).unwrap());
        assert_eq!(wraps(13, Edge { x: 12, y: 12 }), Wrap::None);
        assert!(wrap_parity_test(13, Edge { x: 6, y: 6 }).unwrap());
        assert!(wrap_parity_test(6, Edge { x: 0, y: 0 }).is_err());
    }

    #[test]
    fn no_double_wrap_for_odd_n() {
        for n in (1..=31).step_by(2) {
            let g = TorusGraph::queens(n).unwrap();
            assert!(g.edges().iter().all(|&e| wraps(n, e) != Wrap::Both));
        }
    }

    #[test]
    fn pair_degree_examples() {
        let g5 = TorusGraph::queens(5).unwrap();
        let x0 = Vertex::new(Part::X, 0);
        assert_eq!(pair_degree(&g5, x0, Vertex::new(Part::Y, 0)).unwrap(), 1);
        let g6 = TorusGraph::queens(6).unwrap();
        let s0 = Vertex::new(Part::S, 0);
        assert_eq!(pair_degree(&g6, s0, Vertex::new(Part::D, 0)).unwrap(), 2);
        assert_eq!(pair_degree(&g6, s0, Vertex::new(Part::D, 1)).unwrap(), 0);
        assert!(pair_degree(&g6, s0, Vertex::new(Part::S, 1)).is_err());
    }

    #[test]
    fn attack_examples() {
        assert!(attacks(8, AttackMode::Classical, (0, 0), (1, 1)).unwrap());
        assert!(attacks(8, AttackMode::Toroidal, (0, 0), (1, 1)).unwrap());
        assert!(!attacks(5, AttackMode::Classical, (0, 0), (1, 4)).unwrap());
        assert!(attacks(5, AttackMode::Toroidal, (0, 0), (1, 4)).unwrap());
        assert!(attacks(5, AttackMode::Toroidal, (0, 0), (0, 0)).is_err());
    }

    #[test]
    fn classical_board_sizes() {
        let g = TorusGraph::new(4, BoardKind::QueensClassical).unwrap();
        assert_eq!(g.vertices().len(), 4 + 4 + 7 + 7);
        assert_eq!(g.edges().len(), 16);
        let g = TorusGraph::new(4, BoardKind::SemiqueensToroidal).unwrap();
        assert_eq!(g.vertices().len(), 12);
    }

    #[test]
    fn matching_report() {
        let g = TorusGraph::queens(5).unwrap();
        let r = verify_matching(&g, &Matching::default(), true);
        assert!(r.valid && !r.perfect);
        let sol = Matching { edges: (0..5).map(|i| Edge { x: i, y: 2 * i % 5 }).collect() };
        let r = verify_matching(&g, &sol, true);
        assert!(r.valid && r.perfect);
        // (0,1) and (1,0) share S = 1.
        let bad = Matching { edges: vec![Edge { x: 0, y: 1 }, Edge { x: 1, y: 0 }] };
        let r = verify_matching(&g, &bad, false);
        assert_eq!(r.conflict, Some(Vertex::new(Part::S, 1)));
    }

    #[test]
    fn census_after_edge_removal() {
        let n = 7;
        let full = TorusGraph::queens(n).unwrap();
        assert_eq!(graph_parity_census(&full).disparity, 0);
        let cut = |e: Edge| {
            let removed = e.vertices(n).into_iter().collect();
            let g = TorusGraph::with_removed(n, BoardKind::QueensToroidal, removed).unwrap();
            graph_parity_census(&g).disparity
        };
        assert_eq!(cut(Edge { x: 1, y: 1 }), 0);
        assert_eq!(cut(Edge { x: 3, y: 3 }), 1);
    }
}
