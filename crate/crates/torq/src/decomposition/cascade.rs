use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::board::{residue, Edge, Matching, MatchingReport, TorusGraph, Vertex, verify_matching};
use crate::error::{Result, TorqError};

use super::config::{centered_order, make_config, SharedPart, ZeroSumConfig};

/// A 64-vertex gadget admitting one perfect matching that contains the seed
/// edge `e` and another that contains `T1..T4`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Cascade {
    pub seed: (Edge, [Edge; 4]),
    /// Z' followed by Z1..Z4.
    pub configs: Vec<ZeroSumConfig>,
    /// Contains `e`.
    pub matching1: Matching,
    /// Contains `T1..T4`.
    pub matching2: Matching,
}

impl Cascade {
    pub fn vertices(&self, n: usize) -> BTreeSet<Vertex> {
        self.matching1.edges.iter().flat_map(|e| e.vertices(n)).collect()
    }
}

/// Build a cascade around the seed `(e, T1..T4)` inside `g`, keeping every
/// non-seed vertex out of `avoid`.
pub fn build_cascade(g: &TorusGraph, e: Edge, t: [Edge; 4], avoid: &BTreeSet<Vertex>) -> Result<Cascade> {
    let n = g.n;
    let ev = e.vertices(n);
    let mut meet = Vec::with_capacity(4);
    for (i, ti) in t.iter().enumerate() {
        let common: Vec<Vertex> = ti.vertices(n).into_iter().filter(|v| ev.contains(v)).collect();
        if common.len() != 1 {
            return Err(TorqError::Precondition(format!("T{} must meet e in exactly one vertex", i + 1)));
        }
        meet.push(common[0]);
    }
    let parts: BTreeSet<_> = meet.iter().map(|v| v.part).collect();
    if parts.len() != 4 {
        return Err(TorqError::Precondition("the meeting vertices must lie in four distinct parts".into()));
    }
    let mut t_others: BTreeSet<Vertex> = BTreeSet::new();
    for ti in &t {
        for v in ti.vertices(n) {
            if ev.contains(&v) {
                continue;
            }
            if !t_others.insert(v) {
                return Err(TorqError::Precondition(format!("seed edges T_i intersect at {v}")));
            }
        }
    }

    let usable = |v: &Vertex| g.contains_vertex(*v) && !avoid.contains(v);
    // Z': P1 = e with free (s, c).
    let mut zprime = None;
    'outer: for s in centered_order(n) {
        for c in centered_order(n) {
            let b = e.y as i64 - s;
            let z = make_config(n, e.x, residue(n, b), residue(n, c), residue(n, s));
            if !z.valid || z.positive[0] != e {
                continue;
            }
            let vs = z.vertices();
            if vs.iter().any(|v| t_others.contains(v) || (!ev.contains(v) && !usable(v))) {
                continue;
            }
            if z.positive.iter().chain(z.negative.iter()).all(|&f| g.has_edge(f)) {
                zprime = Some(z);
                break 'outer;
            }
        }
    }
    let zprime = zprime.ok_or_else(|| TorqError::Capacity("no admissible outer configuration".into()))?;

    let mut used: BTreeSet<Vertex> = zprime.vertices();
    used.extend(t_others.iter().copied());
    let mut configs = vec![zprime.clone()];
    let mut m1: Vec<Edge> = zprime.positive.to_vec();
    let mut m2: Vec<Edge> = Vec::new();
    for (i, ti) in t.iter().enumerate() {
        let part = SharedPart::of(meet[i].part);
        let k = part.negative_index();
        let si = zprime.negative[k];
        let own: BTreeSet<Vertex> = ti.vertices(n).into_iter().chain(si.vertices(n)).collect();
        let zi = ZeroSumConfig::through(n, *ti, si, part)
            .find(|z| {
                z.valid
                    && z.positive.iter().chain(z.negative.iter()).all(|&f| g.has_edge(f))
                    && z.vertices().iter().filter(|v| !own.contains(v)).all(|v| !used.contains(v) && usable(v))
            })
            .ok_or_else(|| TorqError::Capacity(format!("no admissible configuration for T{}", i + 1)))?;
        used.extend(zi.vertices());
        m1.extend(zi.negative.iter().filter(|&&f| f != si));
        m2.extend(zi.positive.iter());
        configs.push(zi);
    }

    let cascade = Cascade {
        seed: (e, t),
        configs,
        matching1: Matching { edges: m1 },
        matching2: Matching { edges: m2 },
    };
    verify_cascade(g, &cascade)?;
    Ok(cascade)
}

/// A random cascade seed: an edge `e` and one edge through each of its four
/// vertices, otherwise pairwise disjoint. Reproducible from `seed`.
pub fn random_cascade_seed(n: usize, seed: u64) -> Result<(Edge, [Edge; 4])> {
    if n < 5 {
        return Err(TorqError::InvalidArgument(format!("n = {n} is too small for a cascade seed")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let (x, y) = (rng.gen_range(0..n) as i64, rng.gen_range(0..n) as i64);
        let e = Edge::wrap(n, x, y);
        let mut r = || rng.gen_range(1..n) as i64;
        let (u1, u2, u3, u4) = (r(), r(), r(), r());
        let t = [
            Edge::wrap(n, x, y + u1),
            Edge::wrap(n, x + u2, y),
            Edge::wrap(n, x + u3, y - u3),
            Edge::wrap(n, x + u4, y + u4),
        ];
        if seed_is_proper(n, e, &t) {
            return Ok((e, t));
        }
    }
}

fn seed_is_proper(n: usize, e: Edge, t: &[Edge; 4]) -> bool {
    let ev = e.vertices(n);
    let mut others = BTreeSet::new();
    t.iter().all(|ti| {
        let vs = ti.vertices(n);
        vs.iter().filter(|v| ev.contains(v)).count() == 1
            && vs.iter().filter(|v| !ev.contains(v)).all(|&v| others.insert(v))
    })
}

/// Both matchings valid in `g`, 16 edges each, covering the same 64 vertices.
pub fn verify_cascade(g: &TorusGraph, c: &Cascade) -> Result<()> {
    let n = g.n;
    let ok = |r: MatchingReport| r.valid;
    let (m1, m2) = (&c.matching1, &c.matching2);
    if !ok(verify_matching(g, m1, false)) || !ok(verify_matching(g, m2, false)) {
        return Err(TorqError::Verification("cascade side is not a matching".into()));
    }
    let v1: BTreeSet<Vertex> = m1.edges.iter().flat_map(|e| e.vertices(n)).collect();
    let v2: BTreeSet<Vertex> = m2.edges.iter().flat_map(|e| e.vertices(n)).collect();
    if m1.edges.len() != 16 || m2.edges.len() != 16 || v1 != v2 || v1.len() != 64 {
        return Err(TorqError::Verification("cascade matchings do not cover a common 64-vertex set".into()));
    }
    if !m1.edges.contains(&c.seed.0) || c.seed.1.iter().any(|t| !m2.edges.contains(t)) {
        return Err(TorqError::Verification("cascade matchings lost a seed edge".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Seed with e = (0, 0) and one T_i through each of its four vertices.
    pub(crate) fn seed(n: usize) -> (Edge, [Edge; 4]) {
        let e = Edge { x: 0, y: 0 };
        let w = |x: i64, y: i64| Edge::wrap(n, x, y);
        // X vertex 0, Y vertex 0, S vertex 0, D vertex 0.
        (e, [w(0, 40), w(45, 0), w(20, -20), w(-30, -30)])
    }

    #[test]
    fn hand_picked_seed() {
        let n = 101;
        let g = TorusGraph::queens(n).unwrap();
        let (e, t) = seed(n);
        let c = build_cascade(&g, e, t, &BTreeSet::new()).unwrap();
        assert_eq!(c.vertices(n).len(), 64);
        assert_eq!(c.configs.len(), 5);
    }

    #[test]
    fn bad_seed_rejected() {
        let n = 101;
        let g = TorusGraph::queens(n).unwrap();
        let e = Edge { x: 0, y: 0 };
        let t = [Edge { x: 0, y: 5 }, Edge { x: 0, y: 7 }, Edge { x: 3, y: 3 }, Edge { x: 9, y: 1 }];
        assert!(matches!(build_cascade(&g, e, t, &BTreeSet::new()), Err(TorqError::Precondition(_))));
    }
}
