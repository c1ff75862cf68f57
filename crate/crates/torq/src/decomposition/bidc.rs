//! Reduction of an S-only sublattice vector to zero by SQ-gen and Q-gen
//! rewriting.
//!
//! Notation: `SQ(a; B, C)` is +1 at `a` and `a+B+C`, -1 at `a+B` and `a+C`
//! (S coordinates mod n). `Q(a; B, C, s) = SQ(a; B, C) - SQ(a+s; B, C)` is
//! realisable by eight edges whenever it lies in the lattice. The reduction
//! keeps `v = shadow(phi) + sum of pending SQ terms` and rewrites the pending
//! terms into ever more rigid shapes until none remain.

use serde::Serialize;

use crate::board::{residue, Part};
use crate::error::{Result, TorqError};
use crate::lattice::{in_sublattice_s, realize, Generator, GeneratorKind, LatticeKind, SupportVector};

use super::{AuditItem, DecompositionResult, Recorder};

/// `sign * SQ(a; b, c)` with offsets `b`, `c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SqTerm {
    pub sign: i64,
    pub a: usize,
    pub b: usize,
    pub c: usize,
}

impl SqTerm {
    pub fn generator(&self, n: usize) -> Generator {
        Generator {
            kind: GeneratorKind::SqGen { a: self.a, b: (self.a + self.b) % n, c: (self.a + self.c) % n },
            sign: self.sign,
        }
    }

    /// Add this term's weights on `part` of `v`.
    pub fn add_to(&self, v: &mut SupportVector, part: Part) {
        let n = v.n;
        let (a, b, c) = (self.a as i64, self.b as i64, self.c as i64);
        for (p, w) in [(a, 1), (a + b, -1), (a + c, -1), (a + b + c, 1)] {
            v.add(crate::board::Vertex::wrap(n, part, p), w * self.sign);
        }
    }
}

fn units(v: &SupportVector, part: Part, sign: i64) -> Vec<usize> {
    v.entries()
        .filter(|(u, w)| u.part == part && w.signum() == sign)
        .flat_map(|(u, w)| std::iter::repeat_n(u.coord, w.unsigned_abs() as usize))
        .collect()
}

/// Write the `part` component of `v` as a sum of SQ terms.
///
/// Each step takes two units of one sign (`a`, `b`) and one unit `a'` of the
/// other, and cancels them with `SQ(a'; a-a', b-a')`, which leaves one new
/// unit at `a+b-a'`. The size drops by at least two per step, so at most
/// `|v|/2` terms are produced.
pub fn sq_decompose(v: &SupportVector, part: Part) -> Result<Vec<SqTerm>> {
    let n = v.n;
    let mut r = v.restrict(part);
    if r.part_sum(part) != 0 {
        return Err(TorqError::Precondition(format!("{} weights do not sum to zero", part.name())));
    }
    let linear = r.linear_sum(part) % num_bigint::BigInt::from(n);
    if linear != num_bigint::BigInt::from(0) {
        return Err(TorqError::Precondition(format!("{} linear sum is nonzero mod {n}", part.name())));
    }
    let mut terms = Vec::new();
    let guard = 2 * r.size() + 10;
    while !r.is_zero() {
        if terms.len() as i64 > guard {
            return Err(TorqError::Verification("SQ decomposition failed to terminate".into()));
        }
        let pos = units(&r, part, 1);
        let neg = units(&r, part, -1);
        let (pair, other, sign) = if pos.len() >= 2 {
            ((pos[0], pos[1]), neg[0], -1)
        } else if neg.len() >= 2 {
            ((neg[0], neg[1]), pos[0], 1)
        } else {
            return Err(TorqError::Precondition(format!("{} part is not a sum of SQ-gens", part.name())));
        };
        let (a, b) = pair;
        let term = SqTerm {
            sign,
            a: other,
            b: residue(n, a as i64 - other as i64),
            c: residue(n, b as i64 - other as i64),
        };
        // r - term cancels the three chosen units.
        let mut neg_term = term;
        neg_term.sign = -sign;
        neg_term.add_to(&mut r, part);
        terms.push(term);
    }
    Ok(terms)
}

/// Declared bound on |phi| for an input of size `m`: `16 m (ceil(log2 n) + 1)^4`.
pub fn declared_bound(m: i64, n: usize) -> i64 {
    let l = (usize::BITS - (n.max(2) - 1).leading_zeros()) as i64 + 1;
    16 * m * l.pow(4)
}

fn log2_floor(x: usize) -> u32 {
    usize::BITS - 1 - x.leading_zeros()
}

/// Powers of two (as exponents) summing to `x`, largest first.
fn bits(x: usize) -> Vec<u32> {
    (0..usize::BITS).rev().filter(|&k| (x >> k) & 1 == 1).collect()
}

struct Emitter<'r> {
    rec: &'r mut Recorder,
    n: usize,
}

impl Emitter<'_> {
    /// phi += times * Q(a; b, c, s).
    fn q(&mut self, times: i64, a: i64, b: i64, c: i64, s: i64) -> Result<()> {
        let r = |x: i64| residue(self.n, x);
        // Any zero offset makes the generator vanish.
        if times == 0 || r(b) == 0 || r(c) == 0 || r(s) == 0 {
            return Ok(());
        }
        let g = Generator::new(GeneratorKind::QGen { a: r(a), b: r(b), c: r(c), s: r(s) });
        let edges = realize(self.n, &g)?;
        self.rec.add_generator(g, &edges, times);
        Ok(())
    }
}

/// Run the six reduction phases, adding edges to `rec` whose shadow is `v`.
pub(crate) fn bidc_into(rec: &mut Recorder, v: &SupportVector) -> Result<()> {
    let n = v.n;
    if let Some(label) = in_sublattice_s(v).failed {
        return Err(TorqError::Precondition(format!("S-sublattice condition failed: {label}")));
    }
    let pow = |k: u32| -> i64 { ((1u128 << k) % n as u128) as i64 };

    rec.begin("sq_decompose");
    let terms = sq_decompose(v, Part::S)?;
    for t in &terms {
        rec.note(AuditItem::Generator(t.generator(n)));
    }

    // SQ(a; B1+B2, C) = SQ(a; B1, C) + SQ(a+B1; B2, C), first on B then on C.
    rec.begin("power_of_2");
    let mut split: Vec<(i64, usize, u32, u32)> = Vec::new();
    for t in &terms {
        let mut a = t.a;
        for kb in bits(t.b) {
            let mut a2 = a;
            for kc in bits(t.c) {
                split.push((t.sign, a2, kb, kc));
                a2 = (a2 + (1usize << kc)) % n;
            }
            a = (a + (1usize << kb)) % n;
        }
    }
    for &(sign, a, x, y) in &split {
        rec.note(AuditItem::Generator(SqTerm { sign, a, b: 1 << x, c: 1 << y }.generator(n)));
    }

    // SQ(a; 2B, C) = SQ(a; B, 2C) + Q(a; B, C, C) - Q(a; B, C, B); then split
    // the resulting C = 2^(x+y) mod n into powers again.
    rec.begin("shift_to_1");
    let mut em = Emitter { rec, n };
    let mut ones: Vec<(i64, usize, u32)> = Vec::new();
    for &(sign, a, x0, y0) in &split {
        // SQ is symmetric in its offsets. Swapping (1, 0) avoids the all-odd
        // Q(a; 1, 1, 1), which is outside the lattice for even n.
        let (mut x, mut y) = if (x0, y0) == (1, 0) { (0, 1) } else { (x0, y0) };
        while x > 0 {
            let (bb, cc) = (pow(x - 1), pow(y));
            em.q(sign, a as i64, bb, cc, cc)?;
            em.q(-sign, a as i64, bb, cc, bb)?;
            x -= 1;
            y += 1;
        }
        let c = pow(y) as usize;
        let mut a2 = a;
        for k in bits(c) {
            ones.push((sign, a2, k));
            a2 = (a2 + (1usize << k)) % n;
        }
    }

    // SQ(a; 1, 2^k) = SQ(base; 1, 2^k) - Q(base; 1, 2^k, a - base).
    em.rec.begin("shift_to_base");
    let top = log2_floor(n.max(2)) + 2;
    let mut coef = vec![0i64; top as usize + 1];
    let mut odd_base = 0i64;
    for &(sign, a, k) in &ones {
        let base = if n.is_multiple_of(2) && k == 0 { a % 2 } else { 0 };
        em.q(-sign, base as i64, 1, pow(k), a as i64 - base as i64)?;
        if base == 1 {
            odd_base += sign;
        } else {
            coef[k as usize] += sign;
        }
    }
    if n.is_multiple_of(2) {
        if coef[0] != odd_base {
            return Err(TorqError::Verification(format!(
                "unbalanced SQ(0;1,1) / SQ(1;1,1) coefficients {} and {odd_base}",
                coef[0]
            )));
        }
        // SQ(0; 1, 1) + SQ(1; 1, 1) = SQ(0; 1, 2).
        coef[1] += coef[0];
        coef[0] = 0;
    }

    // Quadratic sum of sum c_k SQ(0; 1, 2^k) is 2M with M = sum c_k 2^k; remove
    // multiples of n using 0 = sum_j SQ(0; 1, 2^kj) - sum_j Q(0; 1, 2^kj, P_j)
    // over the binary digits kj of n.
    em.rec.begin("zero_sum");
    let m: i128 = coef.iter().enumerate().map(|(k, &c)| c as i128 * (1i128 << k)).sum();
    if m % n as i128 != 0 {
        return Err(TorqError::Verification(format!("residual quadratic weight {m} not divisible by {n}")));
    }
    if !n.is_power_of_two() {
        let mut digits: Vec<u32> = bits(n);
        digits.reverse();
        let reps = (m / n as i128).unsigned_abs();
        let dir: i64 = if m > 0 { 1 } else { -1 };
        for _ in 0..reps {
            let mut prefix = 0i64;
            for &k in &digits {
                coef[k as usize] -= dir;
                em.q(dir, 0, 1, pow(k), prefix)?;
                prefix += 1i64 << k;
            }
        }
    }

    // 2 SQ(0; 1, 2^k) = SQ(0; 1, 2^(k+1)) + Q(0; 1, 2^k, 2^k).
    em.rec.begin("binary_carry");
    for k in 0..top as usize {
        let c = coef[k];
        if c == 0 {
            continue;
        }
        if pow(k as u32) == 0 {
            coef[k] = 0;
            continue;
        }
        if c % 2 != 0 {
            return Err(TorqError::Verification(format!("odd carry coefficient {c} at 2^{k}")));
        }
        let h = c / 2;
        em.q(h, 0, 1, pow(k as u32), pow(k as u32))?;
        coef[k] = 0;
        coef[k + 1] += h;
    }
    if coef.iter().any(|&c| c != 0) && pow(top) != 0 {
        return Err(TorqError::Verification("binary carry left a nonzero coefficient".into()));
    }
    em.rec.end();
    Ok(())
}

/// Decompose an S-only sublattice vector into a signed edge multiset.
pub fn bidc_reduce(v: &SupportVector) -> Result<DecompositionResult> {
    let mut target = v.clone();
    target.kind = LatticeKind::Queens;
    let mut rec = Recorder::new(v.n);
    bidc_into(&mut rec, &target)?;
    rec.finish(&target)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::board::Vertex;
    use crate::lattice::expand;

    fn qgen(n: usize, a: usize, b: usize, c: usize, s: usize) -> SupportVector {
        expand(n, &Generator::new(GeneratorKind::QGen { a, b, c, s }))
    }

    #[test]
    fn zero_gives_empty() {
        let r = bidc_reduce(&SupportVector::queens(31)).unwrap();
        assert!(r.phi.is_empty());
        assert_eq!(r.phases.iter().map(|p| p.edges_added).sum::<i64>(), 0);
    }

    #[test]
    fn single_qgens() {
        for n in [31, 32, 33, 16, 9] {
            for (a, b, c, s) in [(0, 1, 2, 3), (5, 7, 2, 4), (3, 3, 3, 2), (n - 2, n - 1, 1, 6)] {
                let v = qgen(n, a % n, b % n, c % n, s % n);
                let r = bidc_reduce(&v).unwrap();
                assert_eq!(r.phases.len(), 6);
                assert_eq!(r.phases.iter().map(|p| p.edges_added).sum::<i64>(), r.size());
                assert!(r.size() <= declared_bound(8, n));
            }
        }
    }

    #[test]
    fn sq_terms_sum_back() {
        let n = 17;
        let v = qgen(n, 1, 4, 6, 9);
        let terms = sq_decompose(&v, Part::S).unwrap();
        let mut sum = SupportVector::queens(n);
        for t in &terms {
            t.add_to(&mut sum, Part::S);
        }
        assert_eq!(sum, v);
        assert!(terms.len() as i64 <= v.size() / 2);
    }

    #[test]
    fn rejects_non_members() {
        let n = 31;
        let v = SupportVector::from_entries(n, LatticeKind::Queens, [(Vertex::new(Part::S, 1), 1), (Vertex::new(Part::S, 2), -1)]);
        assert!(matches!(bidc_reduce(&v), Err(TorqError::Precondition(_))));
    }
}
