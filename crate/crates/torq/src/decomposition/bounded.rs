use crate::board::{Edge, Part, TorusGraph, Vertex};
use crate::error::{Result, TorqError};
use crate::lattice::{in_lattice_queens, realize, Generator, GeneratorKind, LatticeKind, SupportVector};

use super::bidc::{bidc_into, sq_decompose};
use super::{DecompositionResult, Recorder};

/// Decompose any vector of the queens lattice into a signed edge multiset.
///
/// Phases: greedy per-vertex edge cover, X/Y elimination, D elimination by
/// simple matrices whose D part is an SQ-gen, then the S-only reduction.
/// X/Y elimination runs before the D step because SQ decomposition of the D
/// part needs its weights to sum to zero, which holds only once X is empty.
pub fn decompose_bounded(target: &SupportVector) -> Result<DecompositionResult> {
    let n = target.n;
    if target.kind != LatticeKind::Queens {
        return Err(TorqError::InvalidArgument("target must be a queens support vector".into()));
    }
    if let Some(label) = in_lattice_queens(target).failed {
        return Err(TorqError::Precondition(format!("target is not in the lattice: condition ({label}) fails")));
    }
    let g = TorusGraph::queens(n)?;
    let mut rec = Recorder::new(n);
    let mut r = target.clone();
    let apply = |rec: &mut Recorder, r: &mut SupportVector, e: Edge, m: i64| {
        rec.add_edge(e, m);
        for v in e.vertices(n) {
            r.add(v, -m);
        }
    };

    rec.begin("vertex_cover");
    let order: Vec<Vertex> = target.support().collect();
    for v in order {
        while r.get(v) != 0 {
            let sigma = r.get(v).signum();
            let gain = |e: &Edge| -> i64 {
                e.vertices(n).iter().map(|&u| r.get(u).abs() - (r.get(u) - sigma).abs()).sum()
            };
            let best = g.edges_through(v).into_iter().map(|e| (gain(&e), e)).max_by_key(|&(gn, e)| (gn, std::cmp::Reverse(e)));
            match best {
                Some((gn, e)) if gn > 0 => apply(&mut rec, &mut r, e, sigma),
                _ => break,
            }
        }
    }

    rec.begin("xy_zero_sum");
    let signed_units = |r: &SupportVector, part: Part, sign: i64| -> Vec<usize> {
        r.entries()
            .filter(|(u, w)| u.part == part && w.signum() == sign)
            .flat_map(|(u, w)| std::iter::repeat_n(u.coord, w.unsigned_abs() as usize))
            .collect()
    };
    for sign in [1, -1] {
        let xs = signed_units(&r, Part::X, sign);
        let ys = signed_units(&r, Part::Y, sign);
        for (&x, &y) in xs.iter().zip(ys.iter()) {
            apply(&mut rec, &mut r, Edge { x, y }, sign);
        }
    }
    // Remaining X (or Y) weight comes in +/- pairs; route them through a dummy
    // vertex 0 of the other part.
    for part in [Part::X, Part::Y] {
        let plus = signed_units(&r, part, 1);
        let minus = signed_units(&r, part, -1);
        if plus.len() != minus.len() {
            return Err(TorqError::Verification(format!("unbalanced {} weight after pairing", part.name())));
        }
        for (&p, &q) in plus.iter().zip(minus.iter()) {
            let e = |c: usize| if part == Part::X { Edge { x: c, y: 0 } } else { Edge { x: 0, y: c } };
            apply(&mut rec, &mut r, e(p), 1);
            apply(&mut rec, &mut r, e(q), -1);
        }
    }

    // The simple matrix with rows 0, C and columns -a, -a-B has D part
    // SQ(a; B, C) and X, Y parts zero.
    rec.begin("d_reduction");
    for t in sq_decompose(&r, Part::D)? {
        let res = |x: i64| crate::board::residue(n, x);
        let (a, b, c) = (t.a as i64, t.b as i64, t.c as i64);
        let gen = Generator {
            kind: GeneratorKind::SimpleMatrix { rows: (0, res(c)), cols: (res(-a), res(-a - b)) },
            sign: t.sign,
        };
        let edges = realize(n, &gen)?;
        r.add_scaled(&edges.shadow(), -1);
        rec.add_generator(Generator { sign: 1, ..gen }, &edges, 1);
    }
    if r.support().any(|v| v.part != Part::S) {
        return Err(TorqError::Verification("residual has weight outside S before the S-only reduction".into()));
    }

    bidc_into(&mut rec, &r)?;
    rec.finish(target)
}
