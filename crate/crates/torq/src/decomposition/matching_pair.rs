use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::board::{Edge, Interval, Matching, Part, Vertex};
use crate::error::{Result, TorqError};
use crate::lattice::SignedEdgeSet;

use super::config::{SharedPart, ZeroSumConfig};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MatchingPair {
    pub plus: Matching,
    pub minus: Matching,
    /// Zero-sum configurations applied on the way.
    #[serde(skip)]
    pub configs: Vec<ZeroSumConfig>,
}

fn part_rank(p: Part) -> u8 {
    match p {
        Part::D => 0,
        Part::S => 1,
        Part::Y => 2,
        Part::X => 3,
    }
}

/// Per-vertex (plus, minus) edge-copy counts.
fn coverage(phi: &SignedEdgeSet) -> BTreeMap<Vertex, (i64, i64)> {
    let mut out: BTreeMap<Vertex, (i64, i64)> = BTreeMap::new();
    for (e, m) in phi.entries() {
        for v in e.vertices(phi.n) {
            let c = out.entry(v).or_default();
            if m > 0 {
                c.0 += m;
            } else {
                c.1 -= m;
            }
        }
    }
    out
}

/// Rewrite `phi` as M+ - M- with M+ and M- matchings.
///
/// Every vertex of the original `phi` touched by two or more edge copies is
/// relieved by swapping one intersecting (e+, e-) pair for a zero-sum
/// configuration with P1 = e- and e+ among its negative edges. The nine
/// fresh vertices of the configuration must be uncovered and lie in
/// `region`; the first admissible free parameter in centered order is used.
pub fn to_matching_pair(phi: &SignedEdgeSet, region: Interval) -> Result<MatchingPair> {
    let n = phi.n;
    let target = phi.shadow();
    if let Some((v, w)) = target.entries().find(|&(_, w)| w.abs() > 1) {
        return Err(TorqError::Precondition(format!("shadow weight {w} at {v} is not in {{-1, 0, 1}}")));
    }
    let mut work = phi.clone();
    let mut configs = Vec::new();
    let mut order: Vec<Vertex> = coverage(phi).into_keys().collect();
    order.sort_by_key(|v| (part_rank(v.part), v.coord));

    for v in order {
        loop {
            let cov = coverage(&work);
            let (p, m) = cov.get(&v).copied().unwrap_or_default();
            if p + m < 2 {
                break;
            }
            let through: Vec<(Edge, i64)> =
                work.entries().filter(|(e, _)| e.vertices(n).contains(&v)).collect();
            let plus = through.iter().find(|&&(_, m)| m > 0).map(|&(e, _)| e);
            let minus = through.iter().find(|&&(_, m)| m < 0).map(|&(e, _)| e);
            let (Some(ep), Some(em)) = (plus, minus) else {
                return Err(TorqError::Capacity(format!("no opposite-sign edge pair through {v}")));
            };
            let old: BTreeSet<Vertex> = ep.vertices(n).into_iter().chain(em.vertices(n)).collect();
            let fresh_ok = |z: &ZeroSumConfig| {
                z.valid
                    && z.vertices()
                        .iter()
                        .filter(|u| !old.contains(u))
                        .all(|u| !cov.contains_key(u) && region.contains(n, *u))
            };
            let Some(z) = ZeroSumConfig::through(n, em, ep, SharedPart::of(v.part)).find(fresh_ok) else {
                return Err(TorqError::Capacity(format!("no free zero-sum configuration relieves {v}")));
            };
            work.add_scaled(&z.signed_edges(), 1);
            configs.push(z);
        }
    }

    let mut plus = Vec::new();
    let mut minus = Vec::new();
    for (e, m) in work.entries() {
        let side = if m > 0 { &mut plus } else { &mut minus };
        side.extend(std::iter::repeat_n(e, m.unsigned_abs() as usize));
    }
    for side in [&plus, &minus] {
        let mut seen = BTreeSet::new();
        for e in side.iter() {
            for u in e.vertices(n) {
                if !seen.insert(u) {
                    return Err(TorqError::Verification(format!("{u} covered twice on one side")));
                }
            }
        }
    }
    if work.shadow() != target {
        return Err(TorqError::Verification("matching pair changed the shadow".into()));
    }
    Ok(MatchingPair { plus: Matching { edges: plus }, minus: Matching { edges: minus }, configs })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disjoint_pair_is_unchanged() {
        let n = 31;
        let phi = SignedEdgeSet::from_entries(n, [(Edge { x: 1, y: 2 }, 1), (Edge { x: 5, y: 9 }, -1)]);
        let out = to_matching_pair(&phi, Interval::square(15)).unwrap();
        assert!(out.configs.is_empty());
        assert_eq!(out.plus.edges, vec![Edge { x: 1, y: 2 }]);
        assert_eq!(out.minus.edges, vec![Edge { x: 5, y: 9 }]);
    }

    #[test]
    fn shared_x_vertex_uses_one_config() {
        let n = 31;
        let phi = SignedEdgeSet::from_entries(n, [(Edge { x: 3, y: 2 }, 1), (Edge { x: 3, y: 7 }, -1)]);
        let out = to_matching_pair(&phi, Interval::square(15)).unwrap();
        assert_eq!(out.configs.len(), 1);
        assert_eq!(out.plus.edges.len() + out.minus.edges.len(), 6);
    }

    #[test]
    fn tiny_region_is_a_capacity_error() {
        let n = 31;
        let phi = SignedEdgeSet::from_entries(n, [(Edge { x: 0, y: 0 }, 1), (Edge { x: 0, y: 1 }, -1)]);
        assert!(matches!(to_matching_pair(&phi, Interval::square(1)), Err(TorqError::Capacity(_))));
    }
}
