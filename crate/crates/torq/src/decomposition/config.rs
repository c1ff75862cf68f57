use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::board::{residue, Edge, Part, Vertex};
use crate::lattice::SignedEdgeSet;

/// The 16-vertex gadget with matchings M+ and M- of equal shadow.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ZeroSumConfig {
    pub n: usize,
    /// (a, b, c, s) as residues.
    pub params: (usize, usize, usize, usize),
    pub d: usize,
    /// P1..P4 = (a, b+s), (b, d+s), (c, a+s), (d, c+s).
    pub positive: [Edge; 4],
    /// N1..N4 = (a, c+s), (b, a+s), (c, d+s), (d, b+s).
    pub negative: [Edge; 4],
    /// All 16 covered vertices distinct.
    pub valid: bool,
}

/// Part through which P1 meets one of the negative edges: X with N1, S with
/// N2, D with N3, Y with N4.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SharedPart {
    X,
    Y,
    S,
    D,
}

impl SharedPart {
    pub fn of(part: Part) -> Self {
        match part {
            Part::X => SharedPart::X,
            Part::Y => SharedPart::Y,
            Part::S => SharedPart::S,
            Part::D => SharedPart::D,
        }
    }

    /// Index of the negative edge meeting P1 in this part.
    pub fn negative_index(self) -> usize {
        match self {
            SharedPart::X => 0,
            SharedPart::S => 1,
            SharedPart::D => 2,
            SharedPart::Y => 3,
        }
    }
}

pub fn make_config(n: usize, a: usize, b: usize, c: usize, s: usize) -> ZeroSumConfig {
    let (a, b, c, s) = (a % n, b % n, c % n, s % n);
    let d = residue(n, b as i64 + c as i64 - a as i64);
    let e = |x: usize, y: usize| Edge { x, y: y % n };
    let positive = [e(a, b + s), e(b, d + s), e(c, a + s), e(d, c + s)];
    let negative = [e(a, c + s), e(b, a + s), e(c, d + s), e(d, b + s)];
    let covered: BTreeSet<Vertex> = positive.iter().flat_map(|p| p.vertices(n)).collect();
    let edges: BTreeSet<Edge> = positive.iter().chain(negative.iter()).copied().collect();
    ZeroSumConfig {
        n,
        params: (a, b, c, s),
        d,
        positive,
        negative,
        valid: covered.len() == 16 && edges.len() == 8,
    }
}

impl ZeroSumConfig {
    /// M+ with multiplicity +1 and M- with -1; its shadow is zero.
    pub fn signed_edges(&self) -> SignedEdgeSet {
        let mut s = SignedEdgeSet::new(self.n);
        for &e in &self.positive {
            s.add(e, 1);
        }
        for &e in &self.negative {
            s.add(e, -1);
        }
        s
    }

    pub fn vertices(&self) -> BTreeSet<Vertex> {
        self.positive.iter().flat_map(|p| p.vertices(self.n)).collect()
    }

    /// Configurations whose P1 is `p1` and whose negative edge meeting P1 in
    /// `part` is `neg`, one per value of the remaining free parameter, in
    /// order of increasing |centered value|.
    pub fn through(n: usize, p1: Edge, neg: Edge, part: SharedPart) -> impl Iterator<Item = ZeroSumConfig> {
        let (x1, y1) = (p1.x as i64, p1.y as i64);
        let (x2, y2) = (neg.x as i64, neg.y as i64);
        centered_order(n).map(move |f| {
            let (a, b, c, s) = match part {
                SharedPart::X => (x1, y1 - f, y2 - f, f),
                SharedPart::Y => (x1, y1 - f, x2 + x1 - y1 + f, f),
                SharedPart::S => (x1, x2, f, y2 - x1),
                SharedPart::D => (x1, y1 - f, x2, f),
            };
            let r = |v: i64| residue(n, v);
            make_config(n, r(a), r(b), r(c), r(s))
        })
    }
}

/// `count` configurations with uniform random (a, b, c, s), reproducible
/// from `seed`.
pub fn random_configs(n: usize, count: usize, seed: u64) -> Vec<ZeroSumConfig> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| make_config(n, rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n)))
        .collect()
}

/// Residues ordered 0, 1, -1, 2, -2, ... by centered value.
pub fn centered_order(n: usize) -> impl Iterator<Item = i64> {
    let (lo, hi) = crate::board::centered_range(n);
    let mut v: Vec<i64> = (lo..=hi).collect();
    v.sort_by_key(|&x| (x.abs(), x < 0));
    v.into_iter()
}
