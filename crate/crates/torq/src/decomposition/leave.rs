//! Push-down, zero-summing with dummy units, and covering of small central
//! leaves.

use crate::board::{centered, centered_range, Edge, Interval, Part, Vertex};
use crate::error::{Result, TorqError};
use crate::lattice::{in_lattice_queens, SignedEdgeSet, SupportVector};

use super::{DecompositionResult, Recorder};

fn sign(w: i64) -> i64 {
    w.signum()
}

/// Signed edges (centered coordinates) that cancel one unit of weight `sigma`
/// at centered coordinate `c` of `part`, leaving new units within half the
/// radius.
fn push_recipe(part: Part, c: i64, sigma: i64) -> Vec<(i64, i64, i64)> {
    let i = c.rem_euclid(2);
    let a = (c + i) / 2;
    match part {
        Part::S if i == 0 => vec![(a, a, -sigma)],
        Part::S => vec![(a, a - 1, -sigma)],
        Part::D if i == 0 => vec![(a, -a, -sigma)],
        Part::D => vec![(a, -a + 1, -sigma)],
        Part::X => vec![(c, 0, -sigma), (a, a - i, sigma), (a, -a + i, sigma)],
        Part::Y => vec![(0, c, -sigma), (a - i, a, sigma), (-a + i, a, sigma)],
    }
}

/// One round of support push-down from the square interval of radius `t`
/// to radius `t / 2`. Returns `(phi, u + shadow(phi))`.
///
/// An X or Y unit needs three edges and leaves seven units behind (the
/// cancelled unit's mate at 0, two units at the midpoint and four small
/// ones), so the growth bound checked here is `|u'| <= 7|u|`.
pub fn push_down(u: &SupportVector, t: usize) -> Result<(SignedEdgeSet, SupportVector)> {
    if t == 0 || t % 2 == 1 {
        return Err(TorqError::InvalidArgument(format!("push-down radius must be even and positive, got {t}")));
    }
    let n = u.n;
    let outer = Interval::square(t);
    if let Some(v) = u.support().find(|&v| !outer.contains(n, v)) {
        return Err(TorqError::Precondition(format!("{v} lies outside the square interval of radius {t}")));
    }
    let half = (t / 2) as i64;
    let mut phi = SignedEdgeSet::new(n);
    for (v, w) in u.entries() {
        let c = centered(n, v.coord);
        if c.abs() <= half {
            continue;
        }
        for (x, y, m) in push_recipe(v.part, c, sign(w)) {
            phi.add(Edge::wrap(n, x, y), m * w.abs());
        }
    }
    let out = u.plus(&phi.shadow());
    let inner = Interval::square(t / 2);
    if let Some(v) = out.support().find(|&v| !inner.contains(n, v)) {
        return Err(TorqError::Verification(format!("push-down left weight at {v}")));
    }
    if out.size() > 7 * u.size() || phi.size() > 3 * u.size() {
        return Err(TorqError::Verification("push-down growth bound exceeded".into()));
    }
    Ok((phi, out))
}

/// Edge with centered S coordinate `s` and D coordinate `d` of equal parity.
fn edge_from_sd(n: usize, s: i64, d: i64) -> Edge {
    Edge::wrap(n, (s + d) / 2, (s - d) / 2)
}

/// Edge with S residue `s` and D residue `d` for odd n, via the inverse of 2.
fn edge_from_sd_mod(n: usize, s: i64, d: i64) -> Edge {
    let inv2 = n.div_ceil(2) as i64;
    Edge::wrap(n, (s + d) * inv2 % n as i64, (s - d) * inv2 % n as i64)
}

/// Units of one part as a list of (centered coordinate, sign), one entry per
/// unit of weight.
fn units(u: &SupportVector, part: Part) -> Vec<(i64, i64)> {
    u.entries()
        .filter(|(v, _)| v.part == part)
        .flat_map(|(v, w)| std::iter::repeat_n((centered(u.n, v.coord), sign(w)), w.unsigned_abs() as usize))
        .collect()
}

/// Signed edges moving all S and D weight of `u` onto X and Y.
///
/// With `avoid_wrap` (always for even n) S and D units are paired within a
/// parity class, so every edge is non-wrapping; unmatched units of one part
/// are paired through a dummy vertex of the other part (centered 0 or 1).
pub fn zero_sum_support(u: &SupportVector, avoid_wrap: bool) -> Result<SignedEdgeSet> {
    let n = u.n;
    let by_parity = avoid_wrap || n.is_multiple_of(2);
    let classes: Vec<i64> = if by_parity { vec![0, 1] } else { vec![0] };
    let class_of = |c: i64| if by_parity { c.rem_euclid(2) } else { 0 };
    let mut phi = SignedEdgeSet::new(n);
    let s_units = units(u, Part::S);
    let d_units = units(u, Part::D);
    for &p in &classes {
        let pick = |list: &[(i64, i64)], sg: i64| -> Vec<i64> {
            list.iter().filter(|&&(c, s)| s == sg && class_of(c) == p).map(|&(c, _)| c).collect()
        };
        let (sp, sm) = (pick(&s_units, 1), pick(&s_units, -1));
        let (dp, dm) = (pick(&d_units, 1), pick(&d_units, -1));
        if sp.len() as i64 - sm.len() as i64 != dp.len() as i64 - dm.len() as i64 {
            return Err(TorqError::Precondition(format!(
                "parity class {p}: S and D weights differ ({} vs {})",
                sp.len() as i64 - sm.len() as i64,
                dp.len() as i64 - dm.len() as i64
            )));
        }
        let edge = |s: i64, d: i64| if by_parity { edge_from_sd(n, s, d) } else { edge_from_sd_mod(n, s, d) };
        for (sg, ss, dd) in [(1, &sp, &dp), (-1, &sm, &dm)] {
            for (&s, &d) in ss.iter().zip(dd.iter()) {
                phi.add(edge(s, d), -sg);
            }
        }
        let dummy = if by_parity { p } else { 0 };
        // Leftovers: equal numbers of +/- units remain in exactly one part.
        let k_s = sp.len().min(dp.len());
        let k_sm = sm.len().min(dm.len());
        for (&plus, &minus) in sp[k_s..].iter().zip(sm[k_sm..].iter()) {
            phi.add(edge(plus, dummy), -1);
            phi.add(edge(minus, dummy), 1);
        }
        for (&plus, &minus) in dp[k_s..].iter().zip(dm[k_sm..].iter()) {
            phi.add(edge(dummy, plus), -1);
            phi.add(edge(dummy, minus), 1);
        }
    }
    let out = u.plus(&phi.shadow());
    if out.support().any(|v| matches!(v.part, Part::S | Part::D)) {
        return Err(TorqError::Verification("zero-summing left diagonal weight".into()));
    }
    Ok(phi)
}

/// Cover a small central 0/1 leave: returns phi with shadow exactly `leave`.
///
/// Rejections name the violated qualifying-leave condition: 1 (lattice
/// membership), 2 (support inside the square interval of `radius`) or
/// 4 (equal odd counts on S and D).
pub fn cover_leave(leave: &SupportVector, radius: usize) -> Result<DecompositionResult> {
    let n = leave.n;
    if let Some((v, w)) = leave.entries().find(|&(_, w)| w != 1) {
        return Err(TorqError::InvalidArgument(format!("leave must be 0/1, found weight {w} at {v}")));
    }
    if let Some(c) = in_lattice_queens(leave).failed {
        return Err(TorqError::Precondition(format!(
            "qualifying-leave condition 1: not in the lattice (condition {c})"
        )));
    }
    let square = Interval::square(radius);
    if let Some(v) = leave.support().find(|&v| !square.contains(n, v)) {
        return Err(TorqError::Precondition(format!(
            "qualifying-leave condition 2: {v} outside the square interval of radius {radius}"
        )));
    }
    let odd = |p: Part| leave.support().filter(|v| v.part == p && centered(n, v.coord).rem_euclid(2) == 1).count();
    if odd(Part::S) != odd(Part::D) {
        return Err(TorqError::Precondition(format!(
            "qualifying-leave condition 4: {} odd S vertices vs {} odd D vertices",
            odd(Part::S),
            odd(Part::D)
        )));
    }
    let t0 = radius.max(1).next_power_of_two();
    let (_, hi) = centered_range(n);
    if leave.is_zero() {
        return Recorder::new(n).finish(leave);
    }
    if (2 * t0) as i64 > hi {
        return Err(TorqError::Capacity(format!(
            "radius {radius} rounds to {t0}, too large to stay wrap-free for n = {n}"
        )));
    }
    let mut rec = Recorder::new(n);
    let mut u = leave.negated();
    let mut t = t0;
    while t > 1 {
        rec.begin(&format!("push_down_{t}"));
        let (phi, next) = push_down(&u, t)?;
        for (e, m) in phi.entries() {
            rec.add_edge(e, m);
        }
        u = next;
        t /= 2;
    }
    rec.begin("zero_sum");
    let phi = zero_sum_support(&u, true)?;
    for (e, m) in phi.entries() {
        rec.add_edge(e, m);
    }
    u = u.plus(&phi.shadow());
    rec.begin("central_gadget");
    let alpha = u.get(Vertex::wrap(n, Part::X, 1));
    let gadget = [((0, -1), -1), ((0, 1), -1), ((-1, 0), 1), ((1, 0), 1)];
    for ((x, y), m) in gadget {
        rec.add_edge(Edge::wrap(n, x, y), -alpha * m);
    }
    let result = rec.finish(leave)?;
    Ok(result)
}

/// Largest |centered coordinate| over all vertices of edges in `phi`.
pub fn edge_radius(phi: &SignedEdgeSet) -> i64 {
    phi.entries()
        .flat_map(|(e, _)| e.vertices(phi.n))
        .map(|v| centered(phi.n, v.coord).abs())
        .max()
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_s_unit_example() {
        let n = 101;
        let u = SupportVector::from_entries(n, crate::lattice::LatticeKind::Queens, [(Vertex::new(Part::S, 6), 1)]);
        let (phi, out) = push_down(&u, 8).unwrap();
        assert_eq!(phi.entries().collect::<Vec<_>>(), vec![(Edge { x: 3, y: 3 }, -1)]);
        let want = SupportVector::from_entries(
            n,
            crate::lattice::LatticeKind::Queens,
            [(Vertex::new(Part::X, 3), -1), (Vertex::new(Part::Y, 3), -1), (Vertex::new(Part::D, 0), -1)],
        );
        assert_eq!(out, want);
        assert!(push_down(&u, 7).is_err());
        assert!(push_down(&u, 4).is_err());
    }

    #[test]
    fn every_recipe_cancels_its_unit() {
        let n = 101;
        for part in Part::ALL {
            for c in -16i64..=16 {
                for sigma in [1, -1] {
                    let mut u = SupportVector::queens(n);
                    u.add(Vertex::wrap(n, part, c), sigma);
                    let (_, out) = push_down(&u, 16).unwrap();
                    if c.abs() > 8 {
                        assert_eq!(out.get(Vertex::wrap(n, part, c)), 0);
                    }
                }
            }
        }
    }

    #[test]
    fn zero_sum_examples() {
        let n = 31;
        let q = crate::lattice::LatticeKind::Queens;
        let u = SupportVector::from_entries(n, q, [(Vertex::new(Part::S, 3), 1), (Vertex::new(Part::D, 5), 1)]);
        let phi = zero_sum_support(&u, true).unwrap();
        assert_eq!(phi.size(), 1);
        let u = SupportVector::from_entries(n, q, [(Vertex::new(Part::S, 3), 1), (Vertex::new(Part::S, 5), -1)]);
        let phi = zero_sum_support(&u, true).unwrap();
        assert_eq!(phi.size(), 2);
        assert!(phi.shadow().restrict(Part::D).is_zero());
    }

    #[test]
    fn cover_three_edge_leave() {
        let n = 201;
        let edges = [(1, 2), (-3, 4), (5, -1)];
        let leave = SignedEdgeSet::from_entries(n, edges.iter().map(|&(x, y)| (Edge::wrap(n, x, y), 1))).shadow();
        let r = cover_leave(&leave, 8).unwrap();
        assert_eq!(r.phi.shadow(), leave);
        assert!(edge_radius(&r.phi) <= 8);
        assert!(cover_leave(&SupportVector::queens(n), 8).unwrap().phi.is_empty());
    }

    #[test]
    fn cover_rejections_name_the_condition() {
        let n = 201;
        let q = crate::lattice::LatticeKind::Queens;
        let far = SignedEdgeSet::from_entries(n, [(Edge::wrap(n, 40, 0), 1)]).shadow();
        let err = cover_leave(&far, 8).unwrap_err().to_string();
        assert!(err.contains("condition 2"), "{err}");
        let odd = SupportVector::from_entries(n, q, [(Vertex::new(Part::S, 1), 1)]);
        let err = cover_leave(&odd, 8).unwrap_err().to_string();
        assert!(err.contains("condition 1"), "{err}");
    }
}
