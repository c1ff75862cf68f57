//! Integer vectors over the vertex set, signed edge multisets and their
//! shadows, generator families, and exact lattice-membership criteria.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::board::{residue, Edge, Part, Vertex};
use crate::error::{Result, TorqError};

/// Which hypergraph a vector lives over: four parts, or three (no D part).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LatticeKind {
    Queens,
    Semi,
}

impl LatticeKind {
    pub fn parts(self) -> &'static [Part] {
        match self {
            LatticeKind::Queens => &Part::ALL,
            LatticeKind::Semi => &Part::ALL[..3],
        }
    }
}

/// Integer weights on the vertices of the toroidal board. Zero weights are
/// never stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportVector {
    pub n: usize,
    pub kind: LatticeKind,
    entries: BTreeMap<Vertex, i64>,
}

impl SupportVector {
    pub fn new(n: usize, kind: LatticeKind) -> Self {
        SupportVector { n, kind, entries: BTreeMap::new() }
    }

    pub fn queens(n: usize) -> Self {
        Self::new(n, LatticeKind::Queens)
    }

    pub fn from_entries<I: IntoIterator<Item = (Vertex, i64)>>(
        n: usize,
        kind: LatticeKind,
        entries: I,
    ) -> Self {
        let mut v = Self::new(n, kind);
        for (u, w) in entries {
            v.add(u, w);
        }
        v
    }

    /// Weight 1 on every listed vertex.
    pub fn indicator<I: IntoIterator<Item = Vertex>>(n: usize, kind: LatticeKind, vs: I) -> Self {
        Self::from_entries(n, kind, vs.into_iter().map(|v| (v, 1)))
    }

    pub fn add(&mut self, v: Vertex, w: i64) {
        if w == 0 {
            return;
        }
        let v = Vertex::new(v.part, v.coord % self.n);
        let slot = self.entries.entry(v).or_insert(0);
        *slot += w;
        if *slot == 0 {
            self.entries.remove(&v);
        }
    }

    pub fn get(&self, v: Vertex) -> i64 {
        self.entries.get(&v).copied().unwrap_or(0)
    }

    pub fn entries(&self) -> impl Iterator<Item = (Vertex, i64)> + '_ {
        self.entries.iter().map(|(&v, &w)| (v, w))
    }

    pub fn support(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.entries.keys().copied()
    }

    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// The size `Σ|w|`.
    pub fn size(&self) -> i64 {
        self.entries.values().map(|w| w.abs()).sum()
    }

    pub fn add_scaled(&mut self, other: &SupportVector, factor: i64) {
        for (v, w) in other.entries() {
            self.add(v, w * factor);
        }
    }

    pub fn plus(&self, other: &SupportVector) -> SupportVector {
        let mut out = self.clone();
        out.add_scaled(other, 1);
        out
    }

    pub fn minus(&self, other: &SupportVector) -> SupportVector {
        let mut out = self.clone();
        out.add_scaled(other, -1);
        out
    }

    pub fn negated(&self) -> SupportVector {
        let mut out = Self::new(self.n, self.kind);
        out.add_scaled(self, -1);
        out
    }

    pub fn restrict(&self, part: Part) -> SupportVector {
        Self::from_entries(self.n, self.kind, self.entries().filter(|(v, _)| v.part == part))
    }

    pub fn part_sum(&self, part: Part) -> i64 {
        self.entries().filter(|(v, _)| v.part == part).map(|(_, w)| w).sum()
    }

    /// `Σ i·v_i` over part `p`, representatives `0..n`.
    pub fn linear_sum(&self, part: Part) -> BigInt {
        self.entries()
            .filter(|(v, _)| v.part == part)
            .map(|(v, w)| BigInt::from(v.coord) * w)
            .sum()
    }

    /// `Σ i²·v_i` over part `p`, representatives `0..n`.
    pub fn quadratic_sum(&self, part: Part) -> BigInt {
        self.entries()
            .filter(|(v, _)| v.part == part)
            .map(|(v, w)| BigInt::from(v.coord) * v.coord * w)
            .sum()
    }

    /// Weight on odd coordinates of part `p` (representatives `0..n`).
    pub fn odd_sum(&self, part: Part) -> i64 {
        self.entries()
            .filter(|(v, _)| v.part == part && v.coord % 2 == 1)
            .map(|(_, w)| w)
            .sum()
    }
}

/// Integer multiset of edges with signs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignedEdgeSet {
    pub n: usize,
    entries: BTreeMap<Edge, i64>,
}

impl SignedEdgeSet {
    pub fn new(n: usize) -> Self {
        SignedEdgeSet { n, entries: BTreeMap::new() }
    }

    pub fn from_entries<I: IntoIterator<Item = (Edge, i64)>>(n: usize, entries: I) -> Self {
        let mut s = Self::new(n);
        for (e, m) in entries {
            s.add(e, m);
        }
        s
    }

    pub fn add(&mut self, e: Edge, mult: i64) {
        if mult == 0 {
            return;
        }
        let e = Edge { x: e.x % self.n, y: e.y % self.n };
        let slot = self.entries.entry(e).or_insert(0);
        *slot += mult;
        if *slot == 0 {
            self.entries.remove(&e);
        }
    }

    pub fn add_scaled(&mut self, other: &SignedEdgeSet, factor: i64) {
        for (e, m) in other.entries() {
            self.add(e, m * factor);
        }
    }

    pub fn get(&self, e: Edge) -> i64 {
        self.entries.get(&e).copied().unwrap_or(0)
    }

    pub fn entries(&self) -> impl Iterator<Item = (Edge, i64)> + '_ {
        self.entries.iter().map(|(&e, &m)| (e, m))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `|Φ| = Σ|multiplicities|`.
    pub fn size(&self) -> i64 {
        self.entries.values().map(|m| m.abs()).sum()
    }

    pub fn negated(&self) -> SignedEdgeSet {
        let mut out = Self::new(self.n);
        out.add_scaled(self, -1);
        out
    }

    /// Vertex shadow on the four-part toroidal board.
    pub fn shadow(&self) -> SupportVector {
        let mut v = SupportVector::queens(self.n);
        for (e, m) in self.entries() {
            for u in e.vertices(self.n) {
                v.add(u, m);
            }
        }
        v
    }

    /// Vertex shadow on the three-part semi-queens board.
    pub fn shadow_semi(&self) -> SupportVector {
        let mut v = SupportVector::new(self.n, LatticeKind::Semi);
        for (e, m) in self.entries() {
            for u in &e.vertices(self.n)[..3] {
                v.add(*u, m);
            }
        }
        v
    }
}

/// Outcome of a membership test: `None` when every condition holds, else the
/// label of the first violated one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub failed: Option<&'static str>,
}

impl Verdict {
    pub const PASS: Verdict = Verdict { failed: None };

    fn fail(label: &'static str) -> Verdict {
        Verdict { failed: Some(label) }
    }

    pub fn holds(&self) -> bool {
        self.failed.is_none()
    }
}

fn divides(m: usize, x: &BigInt) -> bool {
    (x % BigInt::from(m)).is_zero()
}

/// Exact membership in the lattice spanned by edge shadows of the toroidal
/// queens hypergraph.
///
/// Odd n uses conditions (i)-(iv). Even n uses (a)-(c) plus the 2n
/// divisibility (d), and one further parity condition (e): the total weight
/// on odd S coordinates equals that on odd D coordinates. Without (e) the even
/// criterion accepts vectors outside the lattice (an edge `(x, y)` has
/// `s ≡ d (mod 2)`, so this balance is invariant).
pub fn in_lattice_queens(v: &SupportVector) -> Verdict {
    let n = v.n;
    let even = n.is_multiple_of(2);
    let sums: Vec<i64> = Part::ALL.iter().map(|&p| v.part_sum(p)).collect();
    if sums.iter().any(|&s| s != sums[0]) {
        return Verdict::fail(if even { "a" } else { "i" });
    }
    let lin = |p| v.linear_sum(p);
    if !divides(n, &(lin(Part::X) + lin(Part::Y) - lin(Part::S))) {
        return Verdict::fail(if even { "b" } else { "ii" });
    }
    if !divides(n, &(lin(Part::X) - lin(Part::Y) - lin(Part::D))) {
        return Verdict::fail(if even { "c" } else { "iii" });
    }
    let quad = |p| v.quadratic_sum(p);
    let q = quad(Part::S) + quad(Part::D) - (quad(Part::X) + quad(Part::Y)) * 2;
    if !even {
        if !divides(n, &q) {
            return Verdict::fail("iv");
        }
        return Verdict::PASS;
    }
    if !divides(2 * n, &q) {
        return Verdict::fail("d");
    }
    if v.odd_sum(Part::S) != v.odd_sum(Part::D) {
        return Verdict::fail("e");
    }
    Verdict::PASS
}

/// Exact membership in the semi-queens lattice (parts X, Y, S).
pub fn in_lattice_semiqueens(v: &SupportVector) -> Verdict {
    let n = v.n;
    if v.part_sum(Part::D) != 0 || v.support().any(|u| u.part == Part::D) {
        return Verdict::fail("i");
    }
    let (x, y, s) = (v.part_sum(Part::X), v.part_sum(Part::Y), v.part_sum(Part::S));
    if x != y || y != s {
        return Verdict::fail("i");
    }
    let q = v.linear_sum(Part::X) + v.linear_sum(Part::Y) - v.linear_sum(Part::S);
    if !divides(n, &q) {
        return Verdict::fail("ii");
    }
    Verdict::PASS
}

/// Membership in the one-part sublattice of queens-lattice vectors supported
/// on S alone. Even n additionally needs the odd-coordinate weight to vanish.
pub fn in_sublattice_s(v: &SupportVector) -> Verdict {
    let n = v.n;
    if v.support().any(|u| u.part != Part::S) {
        return Verdict::fail("support");
    }
    if v.part_sum(Part::S) != 0 {
        return Verdict::fail("sum");
    }
    if !divides(n, &v.linear_sum(Part::S)) {
        return Verdict::fail("linear");
    }
    let m = if n.is_multiple_of(2) { 2 * n } else { n };
    if !divides(m, &v.quadratic_sum(Part::S)) {
        return Verdict::fail("quadratic");
    }
    if n.is_multiple_of(2) && v.odd_sum(Part::S) != 0 {
        return Verdict::fail("parity");
    }
    Verdict::PASS
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GeneratorKind {
    /// +1 at (a, c) and (b, d), -1 at (a, d) and (b, c) in the row/column matrix.
    SimpleMatrix { rows: (usize, usize), cols: (usize, usize) },
    /// (1, -1, -1, 1) on S coordinates (a, b, c, b + c - a).
    SqGen { a: usize, b: usize, c: usize },
    /// (1, -1, -1, 1) on S coordinates (a, b, c, b + c - a) together with
    /// (-1, 1, 1, -1) on D coordinates (s - a, s - b, s - c, s - (b + c - a)).
    TwoPartGen { a: usize, b: usize, c: usize, s: usize },
    /// (1, -1, -1, 1, -1, 1, 1, -1) on S coordinates
    /// (a, a+b, a+c, a+b+c, s+a, s+a+b, s+a+c, s+a+b+c).
    QGen { a: usize, b: usize, c: usize, s: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Generator {
    pub kind: GeneratorKind,
    pub sign: i64,
}

impl Generator {
    pub fn new(kind: GeneratorKind) -> Self {
        Generator { kind, sign: 1 }
    }

    pub fn negated(self) -> Self {
        Generator { sign: -self.sign, ..self }
    }
}

/// Signed edges of the simple matrix with rows `x`, `c + x` and columns
/// `a - x`, `a + b - x`. Its S part is +1 at `a`, `a+b+c` and -1 at `a+b`,
/// `a+c`; its D part is +1 at `2x-a`, `2x+c-a-b` and -1 at `2x-a-b`,
/// `2x+c-a`. X and Y cancel.
pub fn offset_simple_matrix(n: usize, x: i64, a: i64, b: i64, c: i64) -> [(Edge, i64); 4] {
    [
        (Edge::wrap(n, x, a - x), 1),
        (Edge::wrap(n, c + x, a + b - x), 1),
        (Edge::wrap(n, x, a + b - x), -1),
        (Edge::wrap(n, c + x, a - x), -1),
    ]
}

fn inverse_of_two(n: usize) -> i64 {
    debug_assert!(n % 2 == 1);
    n.div_ceil(2) as i64
}

/// Solve `2x ≡ t (mod n)`, if possible.
fn halve(n: usize, t: i64) -> Option<i64> {
    if n % 2 == 1 {
        Some(residue(n, t * inverse_of_two(n)) as i64)
    } else if t.rem_euclid(2) == 0 {
        Some(t.rem_euclid(n as i64) / 2)
    } else {
        None
    }
}

/// Whether a Q-gen with offsets `b`, `c`, `s` lies in the queens lattice.
/// Always true for odd n; for even n at least one offset must be even.
pub fn qgen_is_valid(n: usize, b: usize, c: usize, s: usize) -> bool {
    n % 2 == 1 || b.is_multiple_of(2) || c.is_multiple_of(2) || s.is_multiple_of(2)
}

/// Edges realising `Q(a; b, c, s)`: the difference of two offset simple
/// matrices whose D parts coincide. The three offsets play symmetric roles,
/// so for even n an even offset is used as the shift.
pub fn realize_qgen(n: usize, a: usize, b: usize, c: usize, s: usize) -> Result<[(Edge, i64); 8]> {
    let (bb, cc, h) = if n % 2 == 1 || s.is_multiple_of(2) {
        (b, c, s)
    } else if b.is_multiple_of(2) {
        (s, c, b)
    } else if c.is_multiple_of(2) {
        (b, s, c)
    } else {
        return Err(TorqError::Precondition(format!(
            "Q-gen offsets ({b}, {c}, {s}) are all odd for even n = {n}; not in the lattice"
        )));
    };
    let shift = halve(n, h as i64).expect("shift parity checked");
    let first = offset_simple_matrix(n, 0, a as i64, bb as i64, cc as i64);
    let second = offset_simple_matrix(n, shift, (a + h) as i64, bb as i64, cc as i64);
    let mut out = [(Edge { x: 0, y: 0 }, 0); 8];
    for (i, (e, m)) in first.into_iter().enumerate() {
        out[i] = (e, m);
    }
    for (i, (e, m)) in second.into_iter().enumerate() {
        out[4 + i] = (e, -m);
    }
    Ok(out)
}

/// Weight pattern of a generator as a support vector.
pub fn expand(n: usize, g: &Generator) -> SupportVector {
    let mut v = SupportVector::queens(n);
    let sv = |c: i64| Vertex::wrap(n, Part::S, c);
    let dv = |c: i64| Vertex::wrap(n, Part::D, c);
    match g.kind {
        GeneratorKind::SimpleMatrix { .. } => {
            v = realize(n, g).expect("simple matrices are always realisable").shadow();
            return v;
        }
        GeneratorKind::SqGen { a, b, c } => {
            let (a, b, c) = (a as i64, b as i64, c as i64);
            for (p, w) in [(a, 1), (b, -1), (c, -1), (b + c - a, 1)] {
                v.add(sv(p), w * g.sign);
            }
            v.kind = LatticeKind::Semi;
        }
        GeneratorKind::TwoPartGen { a, b, c, s } => {
            let (a, b, c, s) = (a as i64, b as i64, c as i64, s as i64);
            for (p, w) in [(a, 1), (b, -1), (c, -1), (b + c - a, 1)] {
                v.add(sv(p), w * g.sign);
                v.add(dv(s - p), -w * g.sign);
            }
        }
        GeneratorKind::QGen { a, b, c, s } => {
            let (a, b, c, s) = (a as i64, b as i64, c as i64, s as i64);
            for (p, w) in [(a, 1), (a + b, -1), (a + c, -1), (a + b + c, 1)] {
                v.add(sv(p), w * g.sign);
                v.add(sv(p + s), -w * g.sign);
            }
        }
    }
    v
}

/// Signed edges whose shadow is the generator's expansion. SQ-gens are
/// realised in the semi-queens board (their D trace is ignored there).
pub fn realize(n: usize, g: &Generator) -> Result<SignedEdgeSet> {
    let mut out = SignedEdgeSet::new(n);
    match g.kind {
        GeneratorKind::SimpleMatrix { rows: (a, b), cols: (c, d) } => {
            for (e, m) in [((a, c), 1), ((b, d), 1), ((a, d), -1), ((b, c), -1)] {
                out.add(Edge { x: e.0 % n, y: e.1 % n }, m * g.sign);
            }
        }
        GeneratorKind::SqGen { a, b, c } => {
            let (a, b, c) = (a as i64, b as i64, c as i64);
            for (x, y, m) in [(a, 0, 1), (b, c - a, 1), (a, c - a, -1), (b, 0, -1)] {
                out.add(Edge::wrap(n, x, y), m * g.sign);
            }
        }
        GeneratorKind::TwoPartGen { a, b, c, s } => {
            let (a, b, c, s) = (a as i64, b as i64, c as i64, s as i64);
            let (bb, cc) = (b - a, c - a);
            let (x, bb, cc) = match halve(n, s - cc) {
                Some(x) => (x, bb, cc),
                None => match halve(n, s - bb) {
                    Some(x) => (x, cc, bb),
                    None => {
                        return Err(TorqError::Precondition(format!(
                            "2-part generator ({a}, {b}, {c}, {s}) is not in the lattice for n = {n}"
                        )))
                    }
                },
            };
            for (e, m) in offset_simple_matrix(n, x, a, bb, cc) {
                out.add(e, m * g.sign);
            }
        }
        GeneratorKind::QGen { a, b, c, s } => {
            for (e, m) in realize_qgen(n, a, b, c, s)? {
                out.add(e, m * g.sign);
            }
        }
    }
    Ok(out)
}

/// Decompose a zero-marginal integer matrix into simple matrices.
///
/// Each step picks the smallest `(a, c)` with a positive entry, then the
/// smallest row `b` with a negative entry in column `c`, then the smallest
/// column `d` with a negative entry in row `a`.
pub fn simple_matrix_decompose(matrix: &[Vec<i64>]) -> Result<Vec<Generator>> {
    let rows = matrix.len();
    let cols = matrix.first().map_or(0, |r| r.len());
    if matrix.iter().any(|r| r.len() != cols) {
        return Err(TorqError::InvalidArgument("ragged matrix".into()));
    }
    for (i, r) in matrix.iter().enumerate() {
        if r.iter().sum::<i64>() != 0 {
            return Err(TorqError::InvalidArgument(format!("row {i} has nonzero sum")));
        }
    }
    for j in 0..cols {
        if matrix.iter().map(|r| r[j]).sum::<i64>() != 0 {
            return Err(TorqError::InvalidArgument(format!("column {j} has nonzero sum")));
        }
    }
    let mut m: Vec<Vec<i64>> = matrix.to_vec();
    let mut out = Vec::new();
    while let Some((a, c)) = (0..rows).flat_map(|i| (0..cols).map(move |j| (i, j))).find(|&(i, j)| m[i][j] > 0) {
        let b = (0..rows).find(|&i| m[i][c] < 0).expect("zero column sum");
        let d = (0..cols).find(|&j| m[a][j] < 0).expect("zero row sum");
        m[a][c] -= 1;
        m[b][d] -= 1;
        m[a][d] += 1;
        m[b][c] += 1;
        out.push(Generator::new(GeneratorKind::SimpleMatrix { rows: (a, b), cols: (c, d) }));
    }
    Ok(out)
}

/// Sum of the simple matrices in `gens` as an `rows x cols` matrix.
pub fn simple_matrix_sum(rows: usize, cols: usize, gens: &[Generator]) -> Vec<Vec<i64>> {
    let mut m = vec![vec![0i64; cols]; rows];
    for g in gens {
        if let GeneratorKind::SimpleMatrix { rows: (a, b), cols: (c, d) } = g.kind {
            m[a][c] += g.sign;
            m[b][d] += g.sign;
            m[a][d] -= g.sign;
            m[b][c] -= g.sign;
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ones(n: usize) -> SupportVector {
        SupportVector::indicator(
            n,
            LatticeKind::Queens,
            Part::ALL.iter().flat_map(|&p| (0..n).map(move |c| Vertex::new(p, c))),
        )
    }

    #[test]
    fn all_ones_membership() {
        assert!(in_lattice_queens(&ones(5)).holds());
        assert_eq!(in_lattice_queens(&ones(6)).failed, Some("b"));
        assert_eq!(in_lattice_queens(&ones(9)).failed, Some("iv"));
        assert!(in_lattice_queens(&ones(7)).holds());
    }

    #[test]
    fn semiqueens_all_ones() {
        let semi = |n: usize| {
            SupportVector::indicator(
                n,
                LatticeKind::Semi,
                Part::ALL[..3].iter().flat_map(|&p| (0..n).map(move |c| Vertex::new(p, c))),
            )
        };
        assert!(in_lattice_semiqueens(&semi(5)).holds());
        assert!(!in_lattice_semiqueens(&semi(4)).holds());
    }

    #[test]
    fn qgen_example_n7() {
        let g = Generator::new(GeneratorKind::QGen { a: 0, b: 1, c: 2, s: 3 });
        let v = expand(7, &g);
        let want = [(0, 1), (1, -1), (2, -1), (4, 1), (5, 1), (6, -1)];
        let got: Vec<(usize, i64)> = v.entries().map(|(u, w)| (u.coord, w)).collect();
        assert_eq!(got, want);
        assert!(in_sublattice_s(&v).holds());
        assert_eq!(realize(7, &g).unwrap().shadow(), v);
    }

    #[test]
    fn sqgen_is_not_in_queens_sublattice() {
        let v = expand(7, &Generator::new(GeneratorKind::SqGen { a: 0, b: 2, c: 3 }));
        let got: Vec<(usize, i64)> = v.entries().map(|(u, w)| (u.coord, w)).collect();
        assert_eq!(got, vec![(0, 1), (2, -1), (3, -1), (5, 1)]);
        let mut q = SupportVector::queens(7);
        q.add_scaled(&v, 1);
        assert_eq!(in_sublattice_s(&q).failed, Some("quadratic"));
    }

    #[test]
    fn all_odd_qgen_rejected_for_even_n() {
        let v = expand(6, &Generator::new(GeneratorKind::QGen { a: 0, b: 1, c: 3, s: 5 }));
        assert!(!in_sublattice_s(&v).holds());
        assert!(realize(6, &Generator::new(GeneratorKind::QGen { a: 0, b: 1, c: 3, s: 5 })).is_err());
        let ok = Generator::new(GeneratorKind::QGen { a: 1, b: 1, c: 3, s: 4 });
        assert_eq!(realize(6, &ok).unwrap().shadow(), expand(6, &ok));
    }

    #[test]
    fn simple_matrix_examples() {
        assert!(simple_matrix_decompose(&[vec![0, 0], vec![0, 0]]).unwrap().is_empty());
        let m = vec![vec![1, -1, 0], vec![-1, 1, 0], vec![0, 0, 0]];
        assert_eq!(simple_matrix_decompose(&m).unwrap().len(), 1);
        assert!(simple_matrix_decompose(&[vec![1, 0], vec![0, 0]]).is_err());
    }
}
