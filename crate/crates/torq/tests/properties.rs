//! Randomized invariants across the whole crate.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::Zero;
use proptest::prelude::*;

use torq::board::{
    edge_of, edges_into, graph_parity_census, wrap_parity_test, wraps, AttackMode, BoardKind, Edge, Interval,
    Matching, Part, TorusGraph, Vertex, Wrap,
};
use torq::decomposition::{
    bidc_reduce, declared_bound, decompose_bounded, make_config, push_down, to_matching_pair, zero_sum_support,
};
use torq::greedy::{audit_trace, run_greedy, wrap_class, Envelope};
use torq::hnf::hnf_oracle;
use torq::io::{from_json, to_json, SignedEdgeSetDoc, SupportVectorDoc};
use torq::lattice::{
    expand, in_lattice_queens, in_sublattice_s, qgen_is_valid, realize_qgen, simple_matrix_decompose,
    simple_matrix_sum, Generator, GeneratorKind, LatticeKind, SignedEdgeSet, SupportVector,
};
use torq::solvers::{count_classical, count_toroidal, solutions, verify_placement};

fn signed_edges(n: usize, raw: &[(usize, usize, i64)]) -> SignedEdgeSet {
    SignedEdgeSet::from_entries(n, raw.iter().map(|&(x, y, m)| (Edge { x: x % n, y: y % n }, m)))
}

fn qgen_sum(n: usize, raw: &[(usize, usize, usize, usize, i64)]) -> SignedEdgeSet {
    let mut phi = SignedEdgeSet::new(n);
    for &(a, b, c, s, m) in raw {
        let (a, b, c, s) = (a % n, b % n, c % n, s % n);
        if let Ok(edges) = realize_qgen(n, a, b, c, s) {
            for (e, w) in edges {
                phi.add(e, w * m);
            }
        }
    }
    phi
}

fn odd_n() -> impl Strategy<Value = usize> {
    (2usize..16).prop_map(|k| 2 * k + 1)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn edge_of_roundtrips_and_degrees(n in 1usize..40, x in 0usize..40, y in 0usize..40) {
        let (x, y) = (x % n, y % n);
        let e = edge_of(n, x, y).unwrap();
        prop_assert_eq!((e.x, e.y), (x, y));
        let g = TorusGraph::queens(n).unwrap();
        for v in e.vertices(n) {
            prop_assert_eq!(g.degree(v), n);
        }
    }

    #[test]
    fn shadow_is_linear(
        n in 3usize..20,
        a in prop::collection::vec((0usize..20, 0usize..20, -3i64..4), 0..12),
        b in prop::collection::vec((0usize..20, 0usize..20, -3i64..4), 0..12),
    ) {
        let (pa, pb) = (signed_edges(n, &a), signed_edges(n, &b));
        let mut sum = pa.clone();
        sum.add_scaled(&pb, 1);
        prop_assert_eq!(sum.shadow(), pa.shadow().plus(&pb.shadow()));
    }

    #[test]
    fn shadows_are_lattice_vectors(
        n in 5usize..14,
        raw in prop::collection::vec((0usize..14, 0usize..14, -4i64..5), 1..16),
    ) {
        let v = signed_edges(n, &raw).shadow();
        prop_assert!(in_lattice_queens(&v).holds(), "{:?}", in_lattice_queens(&v));
    }

    #[test]
    fn membership_agrees_with_hnf(
        n in prop::sample::select(vec![4usize, 5, 6, 7, 9]),
        raw in prop::collection::vec((0usize..9, 0usize..9, -2i64..3), 0..6),
        noise in prop::collection::vec((0usize..4, 0usize..9, -2i64..3), 0..3),
    ) {
        let mut v = signed_edges(n, &raw).shadow();
        for &(p, c, w) in &noise {
            v.add(Vertex::new(Part::from_index(p), c % n), w);
        }
        prop_assert_eq!(in_lattice_queens(&v).holds(), hnf_oracle(n, LatticeKind::Queens, &v).unwrap());
    }

    #[test]
    fn s_sublattice_agrees_with_hnf(
        n in prop::sample::select(vec![4usize, 5, 6, 7, 9]),
        qs in prop::collection::vec((0usize..9, 0usize..9, 0usize..9, 0usize..9, -2i64..3), 0..3),
        noise in prop::collection::vec((0usize..9, -2i64..3), 0..3),
    ) {
        let mut v = SupportVector::queens(n);
        for &(a, b, c, s, m) in &qs {
            let g = Generator::new(GeneratorKind::QGen { a: a % n, b: b % n, c: c % n, s: s % n });
            v.add_scaled(&expand(n, &g), m);
        }
        for &(c, w) in &noise {
            v.add(Vertex::new(Part::S, c % n), w);
        }
        prop_assert_eq!(in_sublattice_s(&v).holds(), hnf_oracle(n, LatticeKind::Queens, &v).unwrap());
    }

    #[test]
    fn qgen_sums_vanish(n in 3usize..30, a in 0usize..30, b in 0usize..30, c in 0usize..30, s in 0usize..30) {
        let g = Generator::new(GeneratorKind::QGen { a: a % n, b: b % n, c: c % n, s: s % n });
        let v = expand(n, &g);
        prop_assert_eq!(v.part_sum(Part::S), 0);
        let lin = v.linear_sum(Part::S);
        prop_assert!((lin % BigInt::from(n)).is_zero());
        if n % 2 == 0 {
            prop_assert!((v.quadratic_sum(Part::S) % BigInt::from(2 * n)).is_zero());
        }
    }

    #[test]
    fn simple_matrices_round_trip(rows in 2usize..6, cols in 2usize..6, raw in prop::collection::vec((0usize..6, 0usize..6, 0usize..6, 0usize..6, 1i64..3), 0..6)) {
        let mut m = vec![vec![0i64; cols]; rows];
        for &(a, b, c, d, w) in &raw {
            let (a, b, c, d) = (a % rows, b % rows, c % cols, d % cols);
            m[a][c] += w;
            m[b][d] += w;
            m[a][d] -= w;
            m[b][c] -= w;
        }
        let gens = simple_matrix_decompose(&m).unwrap();
        prop_assert_eq!(simple_matrix_sum(rows, cols, &gens), m.clone());
        let total: i64 = m.iter().flatten().map(|x| x.abs()).sum();
        prop_assert!(gens.len() as i64 <= (total + 1) / 2);
    }

    #[test]
    fn bidc_is_exact_and_bounded(
        n in prop::sample::select(vec![31usize, 32, 33]),
        raw in prop::collection::vec((0usize..33, 0usize..33, 0usize..33, 0usize..33, -2i64..3), 1..4),
    ) {
        let phi = qgen_sum(n, &raw);
        let target = phi.shadow();
        let r = bidc_reduce(&target).unwrap();
        prop_assert_eq!(r.phi.shadow(), target.clone());
        let k: i64 = raw.iter().map(|t| t.4.abs()).sum();
        prop_assert!(r.size() <= declared_bound(8 * k, n));
        let net: i64 = r.phases.iter().map(|p| p.edges_added).sum();
        prop_assert_eq!(net, r.size());
    }

    #[test]
    fn bounded_pipeline_is_exact(
        n in prop::sample::select(vec![31usize, 32, 33]),
        raw in prop::collection::vec((0usize..33, 0usize..33, -2i64..3), 1..8),
    ) {
        let target = signed_edges(n, &raw).shadow();
        let r = decompose_bounded(&target).unwrap();
        prop_assert_eq!(r.phi.shadow(), target);
        r.verify().unwrap();
    }

    #[test]
    fn non_members_are_rejected(n in 20usize..40, p in 0usize..4, c in 0usize..40) {
        let v = SupportVector::from_entries(n, LatticeKind::Queens, [(Vertex::new(Part::from_index(p), c % n), 1)]);
        prop_assert!(decompose_bounded(&v).is_err());
        prop_assert!(bidc_reduce(&v).is_err());
    }

    #[test]
    fn gadgets_are_neutral(
        n in 5usize..60,
        params in (0usize..60, 0usize..60, 0usize..60, 0usize..60),
        raw in prop::collection::vec((0usize..60, 0usize..60, -3i64..4), 0..10),
    ) {
        let z = make_config(n, params.0, params.1, params.2, params.3);
        let base = signed_edges(n, &raw);
        let mut with = base.clone();
        with.add_scaled(&z.signed_edges(), 1);
        prop_assert_eq!(with.shadow(), base.shadow());
        if z.valid {
            prop_assert_eq!(z.vertices().len(), 16);
        }
    }

    #[test]
    fn push_down_growth(n in prop::sample::select(vec![61usize, 81, 101]), raw in prop::collection::vec((0usize..4, -12i64..13, -2i64..3), 1..5)) {
        let t = 16;
        let mut u = SupportVector::queens(n);
        for &(p, c, w) in &raw {
            u.add(Vertex::wrap(n, Part::from_index(p), c), w);
        }
        prop_assume!(!u.is_zero());
        let (phi, rest) = push_down(&u, t).unwrap();
        prop_assert!(rest.size() <= 7 * u.size());
        prop_assert!(phi.size() <= 3 * u.size());
        prop_assert_eq!(rest.minus(&phi.shadow()), u);
        prop_assert!(rest.support().all(|v| Interval::square(t / 2).contains(n, v)));
    }

    #[test]
    fn zero_sum_support_is_exact(n in prop::sample::select(vec![31usize, 32, 101]), raw in prop::collection::vec((0usize..4, -6i64..7), 1..5)) {
        // Equal numbers of +1 and -1 on each part, by pairing.
        let mut u = SupportVector::queens(n);
        for &(p, c) in &raw {
            let part = Part::from_index(p);
            u.add(Vertex::wrap(n, part, c), 1);
            u.add(Vertex::wrap(n, part, c + 2), -1);
        }
        let phi = zero_sum_support(&u, true).unwrap();
        let out = u.plus(&phi.shadow());
        prop_assert!(out.support().all(|v| matches!(v.part, Part::X | Part::Y)));
        prop_assert!(phi.entries().all(|(e, _)| wraps(n, e) == Wrap::None));
    }

    #[test]
    fn matching_pair_preserves_shadow(
        plus in prop::collection::vec((-6i64..7, -6i64..7), 1..5),
        minus in prop::collection::vec((-6i64..7, -6i64..7), 0..5),
    ) {
        // A matching minus a matching: the shadow stays in {-1, 0, 1} but
        // vertices may carry edges of both signs.
        let n = 101;
        let disjoint = |raw: &[(i64, i64)]| {
            let mut used = BTreeSet::new();
            raw.iter()
                .map(|&(x, y)| Edge::wrap(n, x, y))
                .filter(|e| {
                    let vs = e.vertices(n);
                    vs.iter().all(|v| !used.contains(v)) && { used.extend(vs); true }
                })
                .collect::<Vec<_>>()
        };
        let mut phi = SignedEdgeSet::new(n);
        disjoint(&plus).into_iter().for_each(|e| phi.add(e, 1));
        disjoint(&minus).into_iter().for_each(|e| phi.add(e, -1));
        prop_assume!(phi.shadow().entries().all(|(_, w)| w.abs() <= 1));
        let pair = to_matching_pair(&phi, Interval::square(40)).unwrap();
        let g = TorusGraph::queens(n).unwrap();
        prop_assert!(torq::board::verify_matching(&g, &pair.plus, false).valid);
        prop_assert!(torq::board::verify_matching(&g, &pair.minus, false).valid);
        let mut diff = SignedEdgeSet::new(n);
        pair.plus.edges.iter().for_each(|&e| diff.add(e, 1));
        pair.minus.edges.iter().for_each(|&e| diff.add(e, -1));
        prop_assert_eq!(diff.shadow(), phi.shadow());
    }

    #[test]
    fn greedy_is_deterministic_and_audited(n in 5usize..40, seed in any::<u64>()) {
        let g = TorusGraph::queens(n).unwrap();
        let a = run_greedy(&g, seed, 1.0).unwrap();
        let b = run_greedy(&g, seed, 1.0).unwrap();
        prop_assert_eq!(&a, &b);
        audit_trace(&a).unwrap();
        let v0 = a.initial_vertices;
        for s in &a.steps {
            prop_assert!((s.p - (1.0 - 4.0 * s.i as f64 / v0 as f64)).abs() < 1e-12);
        }
        prop_assert!(torq::board::verify_matching(&g, &a.matching, false).valid);
    }

    #[test]
    fn envelopes_grow_as_p_falls(b in 0.001f64..0.5, n in 5.0f64..5000.0, p in 0.01f64..1.0, q in 0.01f64..1.0) {
        let (hi, lo) = if p > q { (p, q) } else { (q, p) };
        let e = Envelope::new(b, n);
        prop_assert!(e.e_q(lo) >= e.e_q(hi) && e.e_q(hi) >= 0.0);
        prop_assert!(e.e_d(lo) >= e.e_d(hi) && e.e_d(hi) >= 0.0);
        let f = Envelope::new(b as f32, n as f32);
        prop_assert!(f.e_q(lo as f32) >= f.e_q(hi as f32));
    }

    #[test]
    fn parity_moves_by_wrap_class(n in odd_n(), raw in prop::collection::vec((0usize..33, 0usize..33), 1..8)) {
        let mut used = BTreeSet::new();
        let mut m = Vec::new();
        for &(x, y) in &raw {
            let e = Edge { x: x % n, y: y % n };
            let vs = e.vertices(n);
            if vs.iter().all(|v| !used.contains(v)) {
                used.extend(vs);
                m.push(e);
            }
        }
        let before = graph_parity_census(&TorusGraph::queens(n).unwrap());
        let removed: BTreeSet<Vertex> = m.iter().flat_map(|e| e.vertices(n)).collect();
        let after = graph_parity_census(&TorusGraph::with_removed(n, BoardKind::QueensToroidal, removed).unwrap());
        let signed = |c: torq::board::ParityCensus| c.odd_s as i64 - c.odd_d as i64;
        let expected: i64 = m.iter().map(|&e| wrap_class(n, e)).sum();
        prop_assert_eq!(signed(after) - signed(before), expected);
    }

    #[test]
    fn json_round_trips(n in 1usize..50, raw in prop::collection::vec((0usize..4, 0usize..50, -5i64..6), 0..10), edges in prop::collection::vec((0usize..50, 0usize..50, -5i64..6), 0..10)) {
        let v = SupportVector::from_entries(n, LatticeKind::Queens, raw.iter().map(|&(p, c, w)| (Vertex::new(Part::from_index(p), c % n), w)));
        let text = to_json(&SupportVectorDoc::from(&v));
        let back: SupportVectorDoc = from_json(&text).unwrap();
        prop_assert_eq!(back.to_vector().unwrap(), v);
        let phi = signed_edges(n, &edges);
        let text = to_json(&SignedEdgeSetDoc::from(&phi));
        let back: SignedEdgeSetDoc = from_json(&text).unwrap();
        prop_assert_eq!(back.to_edges().unwrap(), phi);
    }

    #[test]
    fn qgen_validity_matches_even_rule(n in 4usize..30, b in 0usize..30, c in 0usize..30, s in 0usize..30) {
        let (b, c, s) = (b % n, c % n, s % n);
        if n % 2 == 1 {
            prop_assert!(qgen_is_valid(n, b, c, s));
        } else {
            prop_assert_eq!(qgen_is_valid(n, b, c, s), b % 2 == 0 || c % 2 == 0 || s % 2 == 0);
        }
    }
}

#[test]
fn wrap_parity_equivalence_for_odd_boards() {
    for n in (1..=31).step_by(2) {
        for x in 0..n {
            for y in 0..n {
                let e = Edge { x, y };
                assert_eq!(wrap_parity_test(n, e).unwrap(), wraps(n, e) != Wrap::None, "n = {n}, e = {e:?}");
            }
        }
    }
}

/// Even boards: whether an edge can wrap in both diagonals, recorded per n.
#[test]
fn even_board_double_wraps() {
    let both: Vec<(usize, usize)> = (2..=20)
        .step_by(2)
        .map(|n| {
            let k = (0..n).flat_map(|x| (0..n).map(move |y| Edge { x, y })).filter(|&e| wraps(n, e) == Wrap::Both).count();
            (n, k)
        })
        .collect();
    assert!(both.iter().all(|&(_, k)| k == 0), "{both:?}");
}

#[test]
fn box_interval_edge_counts() {
    for n in 3..=49usize {
        let g = TorusGraph::queens(n).unwrap();
        let t0 = if n % 2 == 1 { (n - 1) / 2 } else { n / 2 };
        let t1 = 4 * t0 / 5;
        let (i0, i1) = (Interval::boxed(t0), Interval::boxed(t1));
        for v in g.vertices() {
            let k = edges_into(&g, v, i0).len() as i64;
            assert!(k >= (n / 3) as i64 - 2 && k <= (2 * n).div_ceil(3) as i64 + 2, "(i) n = {n}, v = {v}: {k}");
            if i0.contains(n, v) {
                let k1 = edges_into(&g, v, i1).len() as f64;
                assert!(k1 >= n as f64 / 30.0 - 2.0, "(ii) n = {n}, v = {v}: {k1}");
            }
        }
    }
}

#[test]
fn board_sizes() {
    for n in 1..=12 {
        let g = TorusGraph::queens(n).unwrap();
        assert_eq!(g.edges().len(), n * n);
        let all: BTreeSet<Edge> = (0..n).flat_map(|x| (0..n).map(move |y| edge_of(n, x, y).unwrap())).collect();
        assert_eq!(all.len(), n * n);
    }
}

#[test]
fn toroidal_solutions_are_classical_and_lattice_consistent() {
    for n in 1..=12 {
        let classical: BTreeSet<Vec<usize>> = solutions(n, AttackMode::Classical).unwrap().into_iter().collect();
        let toroidal = solutions(n, AttackMode::Toroidal).unwrap();
        assert_eq!(toroidal.len() as u64, count_toroidal(n).unwrap());
        assert!(count_classical(n).unwrap() >= toroidal.len() as u64);
        for s in &toroidal {
            assert!(classical.contains(s), "n = {n}");
            let m = Matching { edges: s.iter().enumerate().map(|(r, &c)| Edge { x: r, y: c }).collect() };
            let g = TorusGraph::queens(n).unwrap();
            assert!(torq::board::verify_matching(&g, &m, true).perfect);
            let shadow = SignedEdgeSet::from_entries(n, m.edges.iter().map(|&e| (e, 1))).shadow();
            assert!(in_lattice_queens(&shadow).holds());
            let q: Vec<_> = s.iter().enumerate().map(|(r, &c)| (r, c)).collect();
            assert!(verify_placement(n, &q, AttackMode::Toroidal).unwrap().is_empty());
        }
    }
}

#[test]
fn first_greedy_edge_is_uniform() {
    let g = TorusGraph::queens(5).unwrap();
    let trials = 100_000u64;
    let mut counts = [0u64; 25];
    for seed in 0..trials {
        let t = run_greedy(&g, seed, 0.25).unwrap();
        let e = t.matching.edges[0];
        counts[e.x * 5 + e.y] += 1;
    }
    let expected = trials as f64 / 25.0;
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    // 24 degrees of freedom: P(chi2 > 51.18) = 0.001.
    assert!(chi2 < 51.18, "chi-square {chi2}");
}

#[test]
fn knuth_estimator_n7() {
    let g = TorusGraph::queens(7).unwrap();
    let exact = 5040.0 * count_toroidal(7).unwrap() as f64;
    let est = torq::greedy::knuth_count_estimator(&g, 200_000, 11);
    assert!((est - exact).abs() / exact < 0.1, "{est} vs {exact}");
}
