//! Twelve fixed queens with exactly six toroidal (but no classical) attacks,
//! and the 48 removed vertices W that make the all-ones vector of the rest
//! a lattice vector.
//!
//! Tuple values live in 1..=n. A queen with values (r, c) sits at row r-1,
//! column c-1, so a value-space vertex maps to the board by X, Y -> v-1,
//! S -> v-2, D -> v. This is a board automorphism, so lattice membership is
//! unaffected.

use std::collections::BTreeSet;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::board::{AttackMode, Part, Vertex};
use crate::error::{Result, TorqError};
use crate::lattice::{in_lattice_queens, SupportVector, Verdict};

use super::{verify_placement, Placement};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaseKind {
    #[serde(rename = "even-3div")]
    Even3Div,
    #[serde(rename = "even-3ndiv")]
    Even3NDiv,
    #[serde(rename = "odd-3div")]
    Odd3Div,
}

impl CaseKind {
    pub fn of(n: usize) -> Option<Self> {
        match (n.is_multiple_of(2), n.is_multiple_of(3)) {
            (true, true) => Some(CaseKind::Even3Div),
            (true, false) => Some(CaseKind::Even3NDiv),
            (false, true) => Some(CaseKind::Odd3Div),
            (false, false) => None,
        }
    }

    /// Divisor k of the shifted diagonals `+ n/k`.
    fn k(self) -> usize {
        match self {
            CaseKind::Even3Div => 6,
            CaseKind::Even3NDiv => 2,
            CaseKind::Odd3Div => 3,
        }
    }

    /// The per-case congruence on `sum = sum_i (a_i + b_i + c_i - d_i)`.
    pub fn congruence_holds(self, n: usize, sum: i64) -> bool {
        let n = n as i64;
        match self {
            CaseKind::Odd3Div => (1 + 2 * sum).rem_euclid(3) == 0,
            CaseKind::Even3Div => (2 + n % 12 + 2 * sum).rem_euclid(12) == 0,
            CaseKind::Even3NDiv => (2 + n % 12 + 2 * sum).rem_euclid(4) == 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WTuple {
    pub a: usize,
    pub b: usize,
    pub x: usize,
    pub y: usize,
    pub c: usize,
    pub d: usize,
    pub w: usize,
    pub z: usize,
}

impl WTuple {
    fn values(&self) -> [usize; 8] {
        [self.a, self.b, self.x, self.y, self.c, self.d, self.w, self.z]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WSet {
    pub n: usize,
    pub case: CaseKind,
    pub tuples: [WTuple; 3],
}

fn vx(n: usize, part: Part, v: i64) -> Vertex {
    let shift = match part {
        Part::X | Part::Y => -1,
        Part::S => -2,
        Part::D => 0,
    };
    Vertex::wrap(n, part, v + shift)
}

/// The 16 removed vertices contributed by one tuple.
fn tuple_vertices(n: usize, case: CaseKind, t: &WTuple) -> [Vertex; 16] {
    let h = (n / case.k()) as i64;
    let [a, b, x, y, c, d, w, z] = t.values().map(|v| v as i64);
    [
        vx(n, Part::X, a),
        vx(n, Part::X, x),
        vx(n, Part::Y, b),
        vx(n, Part::Y, y),
        vx(n, Part::S, a + b),
        vx(n, Part::S, a + b + h),
        vx(n, Part::D, a - b),
        vx(n, Part::D, x - y),
        vx(n, Part::X, c),
        vx(n, Part::X, w),
        vx(n, Part::Y, d),
        vx(n, Part::Y, z),
        vx(n, Part::S, c + d),
        vx(n, Part::S, w + z),
        vx(n, Part::D, c - d),
        vx(n, Part::D, c - d + h),
    ]
}

/// All removed vertices (48 for a valid set), in board coordinates.
pub fn wset_vertices(w: &WSet) -> Vec<Vertex> {
    w.tuples.iter().flat_map(|t| tuple_vertices(w.n, w.case, t)).collect()
}

/// The twelve fixed queens (row, column), tuple by tuple:
/// (a, b), (x, y), (c, d), (w, z).
pub fn fixed_queens(w: &WSet) -> Vec<(usize, usize)> {
    w.tuples
        .iter()
        .flat_map(|t| [(t.a - 1, t.b - 1), (t.x - 1, t.y - 1), (t.c - 1, t.d - 1), (t.w - 1, t.z - 1)])
        .collect()
}

/// Weight 1 on every vertex outside W, checked against the lattice criteria.
pub fn verify_tstar_lattice(w: &WSet) -> Verdict {
    let n = w.n;
    let removed: BTreeSet<Vertex> = wset_vertices(w).into_iter().collect();
    let v = SupportVector::indicator(
        n,
        crate::lattice::LatticeKind::Queens,
        Part::ALL.iter().flat_map(|&p| (0..n).map(move |c| Vertex::new(p, c))).filter(|u| !removed.contains(u)),
    );
    in_lattice_queens(&v)
}

fn invariant_error(w: &WSet) -> Option<String> {
    let n = w.n as i64;
    let half = n / 2;
    let mut values = BTreeSet::new();
    let mut s = BTreeSet::new();
    let mut d = BTreeSet::new();
    let mut sum = 0i64;
    for t in &w.tuples {
        let [a, b, x, y, c, dd, ww, z] = t.values().map(|v| v as i64);
        if t.values().iter().any(|&v| v == 0 || v as i64 > n) {
            return Some("value outside 1..=n".into());
        }
        if !(a + b <= half && x + y == a + b + n && c - dd >= 1 && c - dd <= half && ww - z == c - dd - n) {
            return Some("tuple equations fail".into());
        }
        values.extend(t.values());
        s.extend([(a + b).rem_euclid(n), (c + dd).rem_euclid(n), (ww + z).rem_euclid(n)]);
        d.extend([(a - b).rem_euclid(n), (x - y).rem_euclid(n), (c - dd).rem_euclid(n)]);
        sum += a + b + c - dd;
    }
    if values.len() != 24 {
        return Some("the 24 values are not distinct".into());
    }
    if s.len() != 9 || d.len() != 9 {
        return Some("diagonal residues are not distinct".into());
    }
    if !w.case.congruence_holds(w.n, sum) {
        return Some("case congruence fails".into());
    }
    let vs: BTreeSet<Vertex> = wset_vertices(w).into_iter().collect();
    if vs.len() != 48 {
        return Some(format!("W has {} distinct vertices, expected 48", vs.len()));
    }
    None
}

/// Check every W-set invariant and lattice membership.
pub fn validate_wset(w: &WSet) -> Result<()> {
    if CaseKind::of(w.n) != Some(w.case) {
        return Err(TorqError::InvalidArgument(format!("case {:?} does not match n = {}", w.case, w.n)));
    }
    if let Some(e) = invariant_error(w) {
        return Err(TorqError::Precondition(e));
    }
    if let Some(c) = verify_tstar_lattice(w).failed {
        return Err(TorqError::Precondition(format!("all-ones vector off W fails lattice condition ({c})")));
    }
    Ok(())
}

struct Dfs {
    n: usize,
    case: CaseKind,
    used: Vec<bool>,
    s_used: Vec<bool>,
    d_used: Vec<bool>,
    w_used: BTreeSet<Vertex>,
    tuples: Vec<WTuple>,
    nodes: u64,
    limit: u64,
}

impl Dfs {
    fn res(&self, v: i64) -> usize {
        v.rem_euclid(self.n as i64) as usize
    }

    fn tuple(&mut self) -> Option<WSet> {
        let n = self.n as i64;
        if self.tuples.len() == 3 {
            let w = WSet { n: self.n, case: self.case, tuples: [self.tuples[0], self.tuples[1], self.tuples[2]] };
            let sum: i64 = w.tuples.iter().map(|t| (t.a + t.b + t.c) as i64 - t.d as i64).sum();
            if self.case.congruence_holds(self.n, sum) && verify_tstar_lattice(&w).holds() {
                return Some(w);
            }
            return None;
        }
        for a in 1..=n {
            for b in 1..=(n / 2 - a) {
                if self.used[a as usize] || self.used[b as usize] || a == b {
                    continue;
                }
                let (sab, dab) = (self.res(a + b), self.res(a - b));
                if self.s_used[sab] || self.d_used[dab] {
                    continue;
                }
                for x in 1..=n {
                    let y = a + b + n - x;
                    if y < 1 || y > n || x == y || [a, b].contains(&x) || [a, b].contains(&y) {
                        continue;
                    }
                    if self.used[x as usize] || self.used[y as usize] {
                        continue;
                    }
                    let dxy = self.res(x - y);
                    if self.d_used[dxy] || dxy == dab {
                        continue;
                    }
                    self.nodes += 1;
                    if self.nodes > self.limit {
                        return None;
                    }
                    let first = [a, b, x, y];
                    for v in first {
                        self.used[v as usize] = true;
                    }
                    self.s_used[sab] = true;
                    self.d_used[dab] = true;
                    self.d_used[dxy] = true;
                    let found = self.second_half(a, b, x, y);
                    for v in first {
                        self.used[v as usize] = false;
                    }
                    self.s_used[sab] = false;
                    self.d_used[dab] = false;
                    self.d_used[dxy] = false;
                    if found.is_some() || self.nodes > self.limit {
                        return found;
                    }
                }
            }
        }
        None
    }

    fn second_half(&mut self, a: i64, b: i64, x: i64, y: i64) -> Option<WSet> {
        let n = self.n as i64;
        for c in 1..=n {
            if self.used[c as usize] {
                continue;
            }
            for d in (c - n / 2).max(1)..c {
                if self.used[d as usize] {
                    continue;
                }
                let (scd, dcd) = (self.res(c + d), self.res(c - d));
                if self.s_used[scd] || self.d_used[dcd] {
                    continue;
                }
                for w in 1..=n {
                    let z = w - (c - d) + n;
                    if z < 1 || z > n || w == z || [c, d].contains(&w) || [c, d].contains(&z) {
                        continue;
                    }
                    if self.used[w as usize] || self.used[z as usize] {
                        continue;
                    }
                    let swz = self.res(w + z);
                    if self.s_used[swz] || swz == scd {
                        continue;
                    }
                    self.nodes += 1;
                    if self.nodes > self.limit {
                        return None;
                    }
                    let t = WTuple {
                        a: a as usize,
                        b: b as usize,
                        x: x as usize,
                        y: y as usize,
                        c: c as usize,
                        d: d as usize,
                        w: w as usize,
                        z: z as usize,
                    };
                    let vs = tuple_vertices(self.n, self.case, &t);
                    let fresh: BTreeSet<Vertex> = vs.iter().copied().collect();
                    if fresh.len() != 16 || fresh.iter().any(|v| self.w_used.contains(v)) {
                        continue;
                    }
                    let second = [c, d, w, z];
                    for v in second {
                        self.used[v as usize] = true;
                    }
                    self.s_used[scd] = true;
                    self.s_used[swz] = true;
                    self.d_used[dcd] = true;
                    self.w_used.extend(fresh.iter().copied());
                    self.tuples.push(t);
                    let found = self.tuple();
                    self.tuples.pop();
                    for v in &fresh {
                        self.w_used.remove(v);
                    }
                    for v in second {
                        self.used[v as usize] = false;
                    }
                    self.s_used[scd] = false;
                    self.s_used[swz] = false;
                    self.d_used[dcd] = false;
                    if found.is_some() || self.nodes > self.limit {
                        return found;
                    }
                }
            }
        }
        None
    }
}

/// Lexicographically smallest W-set for `n` (tuple fields in the order
/// a, b, x, y, c, d, w, z, tuple by tuple).
pub fn build_wset(n: usize) -> Result<WSet> {
    let Some(case) = CaseKind::of(n) else {
        return Err(TorqError::InvalidArgument(format!("n = {n} is 1 or 5 mod 6; no W-set is needed")));
    };
    if n < 26 {
        return Err(TorqError::InvalidArgument(format!("n = {n} is too small for 24 constrained values")));
    }
    let mut dfs = Dfs {
        n,
        case,
        used: vec![false; n + 1],
        s_used: vec![false; n],
        d_used: vec![false; n],
        w_used: BTreeSet::new(),
        tuples: Vec::new(),
        nodes: 0,
        limit: 50_000_000,
    };
    let w = dfs
        .tuple()
        .ok_or_else(|| TorqError::Capacity(format!("no W-set found for n = {n} within {} nodes", dfs.limit)))?;
    validate_wset(&w).map_err(|e| TorqError::Verification(format!("constructed W-set is invalid: {e}")))?;
    Ok(w)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Budget {
    pub seconds: f64,
    pub restarts: u64,
    pub seed: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { seconds: 60.0, restarts: u64::MAX, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassicalPlacement {
    /// Fixed queens first, then the matching of the remaining board.
    pub placement: Placement,
    pub fixed_queens: Vec<(usize, usize)>,
    pub toroidal_attack_pairs: Vec<(usize, usize)>,
}

/// Fraction of rows placed greedily before the exhaustive completion.
const GREEDY_FRACTION: f64 = 0.9;

/// Free rows, columns and diagonal residues of T* = T(n) with W removed.
struct Residual {
    n: usize,
    rows: Vec<usize>,
    col_free: Vec<bool>,
    s_free: Vec<bool>,
    d_free: Vec<bool>,
}

struct Attempt<'a> {
    r: &'a Residual,
    col_free: Vec<bool>,
    s_free: Vec<bool>,
    d_free: Vec<bool>,
    queens: Vec<(usize, usize)>,
}

impl Attempt<'_> {
    fn fits(&self, r: usize, c: usize) -> bool {
        let n = self.r.n;
        self.col_free[c] && self.s_free[(r + c) % n] && self.d_free[(r + n - c) % n]
    }

    fn set(&mut self, r: usize, c: usize, free: bool) {
        let n = self.r.n;
        self.col_free[c] = free;
        self.s_free[(r + c) % n] = free;
        self.d_free[(r + n - c) % n] = free;
    }

    /// Exhaustive most-constrained-row backtracking over `rows`.
    fn complete(&mut self, rows: &mut Vec<usize>) -> bool {
        let n = self.r.n;
        let Some((k, _)) = rows
            .iter()
            .enumerate()
            .map(|(k, &r)| (k, (0..n).filter(|&c| self.fits(r, c)).count()))
            .min_by_key(|&(_, cnt)| cnt)
        else {
            return true;
        };
        let r = rows.swap_remove(k);
        for c in 0..n {
            if !self.fits(r, c) {
                continue;
            }
            self.set(r, c, false);
            self.queens.push((r, c));
            if self.complete(rows) {
                return true;
            }
            self.queens.pop();
            self.set(r, c, true);
        }
        rows.push(r);
        let last = rows.len() - 1;
        rows.swap(k, last);
        false
    }
}

impl Residual {
    fn attempt(&self, seed: u64, stream: u64) -> Option<Vec<(usize, usize)>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let mut at = Attempt {
            r: self,
            col_free: self.col_free.clone(),
            s_free: self.s_free.clone(),
            d_free: self.d_free.clone(),
            queens: Vec::with_capacity(self.rows.len()),
        };
        let mut rest = self.rows.clone();
        let target = (GREEDY_FRACTION * rest.len() as f64).floor() as usize;
        while at.queens.len() < target {
            // Most constrained row, ties broken at random.
            let counts: Vec<usize> =
                rest.iter().map(|&r| (0..self.n).filter(|&c| at.fits(r, c)).count()).collect();
            let min = *counts.iter().min().expect("rows remain");
            if min == 0 {
                return None;
            }
            let ties: Vec<usize> = (0..rest.len()).filter(|&k| counts[k] == min).collect();
            let k = *ties.choose(&mut rng).expect("nonempty");
            let r = rest.swap_remove(k);
            let opts: Vec<usize> = (0..self.n).filter(|&c| at.fits(r, c)).collect();
            let c = *opts.choose(&mut rng).expect("nonempty");
            at.set(r, c, false);
            at.queens.push((r, c));
        }
        at.complete(&mut rest).then_some(at.queens)
    }
}

/// Search for a perfect matching of T* (the board with W removed) and extend
/// it by the twelve fixed queens. Restarts run on all cores; the successful
/// restart with the smallest index wins, so the result depends only on the
/// seed whenever the budget is not hit. The returned placement is verified.
pub fn extend_classical(w: &WSet, budget: Budget) -> Result<ClassicalPlacement> {
    validate_wset(w)?;
    let n = w.n;
    let removed: BTreeSet<Vertex> = wset_vertices(w).into_iter().collect();
    let free = |p: Part| -> Vec<bool> { (0..n).map(|c| !removed.contains(&Vertex::new(p, c))).collect() };
    let residual = Residual {
        n,
        rows: (0..n).filter(|&r| !removed.contains(&Vertex::new(Part::X, r))).collect(),
        col_free: free(Part::Y),
        s_free: free(Part::S),
        d_free: free(Part::D),
    };
    let start = Instant::now();
    let next = AtomicU64::new(0);
    let best = AtomicU64::new(u64::MAX);
    let found = Mutex::new(None::<(u64, Vec<(usize, usize)>)>);
    let workers = std::thread::available_parallelism().map_or(1, |p| p.get());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= budget.restarts || i >= best.load(Ordering::Relaxed) {
                    break;
                }
                if start.elapsed().as_secs_f64() >= budget.seconds {
                    break;
                }
                if let Some(q) = residual.attempt(budget.seed, i) {
                    best.fetch_min(i, Ordering::Relaxed);
                    let mut f = found.lock().expect("worker panicked");
                    if f.as_ref().is_none_or(|(j, _)| i < *j) {
                        *f = Some((i, q));
                    }
                }
            });
        }
    });
    match found.into_inner().expect("worker panicked") {
        Some((_, mut matching)) => {
            matching.sort_unstable();
            let fixed = fixed_queens(w);
            let mut queens = fixed.clone();
            queens.extend(matching);
            certify(n, fixed, queens)
        }
        None => {
            let tried = next.load(Ordering::Relaxed).min(budget.restarts);
            Err(TorqError::Timeout(format!("no completion for n = {n} after about {tried} restarts")))
        }
    }
}

fn certify(n: usize, fixed: Vec<(usize, usize)>, queens: Vec<(usize, usize)>) -> Result<ClassicalPlacement> {
    if queens.len() != n {
        return Err(TorqError::Verification(format!("{} queens placed, expected {n}", queens.len())));
    }
    if !verify_placement(n, &queens, AttackMode::Classical)?.is_empty() {
        return Err(TorqError::Verification("placement has classical attacks".into()));
    }
    let pairs = verify_placement(n, &queens, AttackMode::Toroidal)?;
    let sum_pairs = pairs.iter().filter(|&&(i, j)| (queens[i].0 + queens[i].1) % n == (queens[j].0 + queens[j].1) % n).count();
    if pairs.len() != 6 || sum_pairs != 3 || pairs.iter().any(|&(i, j)| i >= 12 || j >= 12) {
        return Err(TorqError::Verification(format!("unexpected toroidal attacks {pairs:?}")));
    }
    Ok(ClassicalPlacement {
        placement: Placement { n, mode: AttackMode::Classical, queens },
        fixed_queens: fixed,
        toroidal_attack_pairs: pairs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn case_kinds() {
        assert_eq!(CaseKind::of(30), Some(CaseKind::Even3Div));
        assert_eq!(CaseKind::of(28), Some(CaseKind::Even3NDiv));
        assert_eq!(CaseKind::of(27), Some(CaseKind::Odd3Div));
        assert_eq!(CaseKind::of(29), None);
        assert!(build_wset(29).is_err());
        assert!(build_wset(12).is_err());
    }
}
