//! Exact backtracking counters, maximum partial toroidal solutions and
//! placement verification.
//!
//! All counters walk rows in ascending order and columns in ascending
//! order, pruning with bitmasks on columns and both diagonal families. No
//! symmetry reduction is applied, so counts are raw.

mod wset;

pub use wset::{
    build_wset, extend_classical, fixed_queens, validate_wset, verify_tstar_lattice, wset_vertices, Budget, CaseKind,
    ClassicalPlacement, WSet, WTuple,
};

use serde::Serialize;

use crate::board::{attacks, AttackMode};
use crate::error::{Result, TorqError};

pub const DEFAULT_MAX_COUNT: usize = 13;
pub const DEFAULT_MAX_MONSKY: usize = 16;
/// Hard ceiling from the 32-bit masks.
const MASK_LIMIT: usize = 32;

/// Exhaustive bound: `TORQ_MAX_EXHAUSTIVE` if set, else `default`.
pub fn exhaustive_bound(default: usize) -> usize {
    std::env::var("TORQ_MAX_EXHAUSTIVE").ok().and_then(|s| s.parse().ok()).unwrap_or(default).min(MASK_LIMIT)
}

fn check_bound(n: usize, bound: usize, what: &str) -> Result<()> {
    if n == 0 {
        return Err(TorqError::InvalidArgument("n must be positive".into()));
    }
    if n > bound {
        return Err(TorqError::Unsupported(format!("{what} is limited to n <= {bound}, got {n}")));
    }
    Ok(())
}

fn rotl(mask: u32, r: usize, n: usize) -> u32 {
    let full = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    let r = r % n;
    if r == 0 {
        return mask & full;
    }
    ((mask << r) | (mask >> (n - r))) & full
}

fn rotr(mask: u32, r: usize, n: usize) -> u32 {
    rotl(mask, (n - r % n) % n, n)
}

/// Board rules for the row-by-row search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Rules {
    Classical,
    Toroidal,
    SemiToroidal,
    SemiClassical,
}

struct Search {
    n: usize,
    rules: Rules,
    full: u32,
    row: Vec<usize>,
    count: u64,
    keep: Option<Vec<Vec<usize>>>,
}

impl Search {
    fn new(n: usize, rules: Rules, keep: bool) -> Self {
        let full = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
        Search { n, rules, full, row: Vec::with_capacity(n), count: 0, keep: keep.then(Vec::new) }
    }

    /// Columns free in row `r`. For the classical rules the diagonal masks
    /// are shifted per row; for the toroidal rules they are indexed by
    /// residue and rotated into column space.
    fn free(&self, r: usize, cols: u32, s: u64, d: u64) -> u32 {
        let n = self.n;
        match self.rules {
            Rules::Classical => !cols & !((s >> r) as u32) & !((d >> (n - 1 - r)) as u32) & self.full,
            Rules::SemiClassical => !cols & !((s >> r) as u32) & self.full,
            Rules::Toroidal => !cols & !rotr(s as u32, r, n) & !rotl(d as u32, r, n) & self.full,
            Rules::SemiToroidal => !cols & !rotr(s as u32, r, n) & self.full,
        }
    }

    fn mark(&self, r: usize, c: usize) -> (u64, u64) {
        let n = self.n;
        match self.rules {
            Rules::Classical | Rules::SemiClassical => (1u64 << (r + c), 1u64 << (c + n - 1 - r)),
            Rules::Toroidal | Rules::SemiToroidal => (1u64 << ((r + c) % n), 1u64 << ((c + n - r) % n)),
        }
    }

    fn go(&mut self, r: usize, cols: u32, s: u64, d: u64) {
        if r == self.n {
            self.count += 1;
            if let Some(k) = &mut self.keep {
                k.push(self.row.clone());
            }
            return;
        }
        let mut free = self.free(r, cols, s, d);
        while free != 0 {
            let c = free.trailing_zeros() as usize;
            free &= free - 1;
            let (ms, md) = self.mark(r, c);
            self.row.push(c);
            self.go(r + 1, cols | (1 << c), s | ms, d | md);
            self.row.pop();
        }
    }
}

fn run(n: usize, rules: Rules, keep: bool) -> (u64, Vec<Vec<usize>>) {
    let mut s = Search::new(n, rules, keep);
    s.go(0, 0, 0, 0);
    (s.count, s.keep.unwrap_or_default())
}

/// Number of classical n-queens solutions.
pub fn count_classical(n: usize) -> Result<u64> {
    check_bound(n, exhaustive_bound(DEFAULT_MAX_COUNT), "classical counting")?;
    Ok(run(n, Rules::Classical, false).0)
}

/// Number of toroidal n-queens solutions (perfect matchings of T(n)).
pub fn count_toroidal(n: usize) -> Result<u64> {
    check_bound(n, exhaustive_bound(DEFAULT_MAX_COUNT), "toroidal counting")?;
    Ok(run(n, Rules::Toroidal, false).0)
}

pub fn count_semiqueens(n: usize, mode: AttackMode) -> Result<u64> {
    check_bound(n, exhaustive_bound(DEFAULT_MAX_COUNT), "semi-queens counting")?;
    let rules = match mode {
        AttackMode::Toroidal => Rules::SemiToroidal,
        AttackMode::Classical => Rules::SemiClassical,
    };
    Ok(run(n, rules, false).0)
}

/// All solutions under `mode`, each as the column of the queen in each row.
pub fn solutions(n: usize, mode: AttackMode) -> Result<Vec<Vec<usize>>> {
    check_bound(n, exhaustive_bound(DEFAULT_MAX_COUNT), "solution enumeration")?;
    let rules = match mode {
        AttackMode::Toroidal => Rules::Toroidal,
        AttackMode::Classical => Rules::Classical,
    };
    Ok(run(n, rules, true).1)
}

/// Whether `k` mutually non-attacking toroidal queens fit on the n x n torus
/// with row `n-1` and column `n-1` empty (always arrangeable by translation
/// when `k < n`).
fn partial_exists(n: usize, k: usize) -> bool {
    struct P {
        n: usize,
        rows: usize,
        full: u32,
    }
    impl P {
        fn go(&self, r: usize, placed: usize, k: usize, cols: u32, s: u32, d: u32) -> bool {
            if placed == k {
                return true;
            }
            if r == self.rows || self.rows - r < k - placed {
                return false;
            }
            let mut free = !cols & !rotr(s, r, self.n) & !rotl(d, r, self.n) & self.full;
            while free != 0 {
                let c = free.trailing_zeros() as usize;
                free &= free - 1;
                let ms = 1u32 << ((r + c) % self.n);
                let md = 1u32 << ((c + self.n - r) % self.n);
                if self.go(r + 1, placed + 1, k, cols | (1 << c), s | ms, d | md) {
                    return true;
                }
            }
            self.go(r + 1, placed, k, cols, s, d)
        }
    }
    let (rows, cols) = if k == n { (n, n) } else { (n - 1, n - 1) };
    let full = if cols == 32 { u32::MAX } else { (1u32 << cols) - 1 };
    P { n, rows, full }.go(0, 0, k, 0, 0, 0)
}

/// Largest number of mutually non-attacking queens on the n x n torus.
pub fn max_partial_toroidal(n: usize) -> Result<usize> {
    check_bound(n, exhaustive_bound(DEFAULT_MAX_MONSKY), "maximum partial search")?;
    Ok((1..=n).rev().find(|&k| partial_exists(n, k)).unwrap_or(0))
}

/// Closed form: n if n = 1, 5 mod 6; n-1 if neither 3 nor 4 divides n;
/// otherwise n-2.
pub fn monsky_closed_form(n: usize) -> usize {
    if n % 6 == 1 || n % 6 == 5 {
        n
    } else if !n.is_multiple_of(3) && !n.is_multiple_of(4) {
        n - 1
    } else {
        n.saturating_sub(2).max(1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Placement {
    pub n: usize,
    pub mode: AttackMode,
    /// (row, column), 0-based.
    pub queens: Vec<(usize, usize)>,
}

/// All attacking index pairs `(i, j)`, `i < j`, among `queens` under `mode`.
pub fn verify_placement(n: usize, queens: &[(usize, usize)], mode: AttackMode) -> Result<Vec<(usize, usize)>> {
    if let Some(q) = queens.iter().find(|q| q.0 >= n || q.1 >= n) {
        return Err(TorqError::InvalidArgument(format!("square {q:?} is off the {n} x {n} board")));
    }
    let mut pairs = Vec::new();
    for i in 0..queens.len() {
        for j in i + 1..queens.len() {
            if queens[i] == queens[j] {
                return Err(TorqError::InvalidArgument(format!("two queens on square {:?}", queens[i])));
            }
            if attacks(n, mode, queens[i], queens[j])? {
                pairs.push((i, j));
            }
        }
    }
    Ok(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_counts() {
        assert_eq!(count_classical(1).unwrap(), 1);
        assert_eq!(count_classical(4).unwrap(), 2);
        assert_eq!(count_classical(8).unwrap(), 92);
        assert_eq!(count_toroidal(5).unwrap(), 10);
        assert_eq!(count_toroidal(7).unwrap(), 28);
        assert_eq!(count_toroidal(6).unwrap(), 0);
        assert_eq!(count_semiqueens(3, AttackMode::Toroidal).unwrap(), 3);
        assert_eq!(count_semiqueens(4, AttackMode::Toroidal).unwrap(), 0);
        assert_eq!(count_semiqueens(1, AttackMode::Classical).unwrap(), 1);
        assert!(matches!(count_classical(40), Err(TorqError::Unsupported(_))));
    }

    #[test]
    fn monsky_small() {
        for n in 1..=10 {
            assert_eq!(max_partial_toroidal(n).unwrap(), monsky_closed_form(n), "n = {n}");
        }
    }

    #[test]
    fn toroidal_witnesses_are_classical() {
        let classical: std::collections::BTreeSet<_> = solutions(7, AttackMode::Classical).unwrap().into_iter().collect();
        for s in solutions(7, AttackMode::Toroidal).unwrap() {
            assert!(classical.contains(&s));
            let q: Vec<_> = s.iter().enumerate().map(|(r, &c)| (r, c)).collect();
            assert!(verify_placement(7, &q, AttackMode::Toroidal).unwrap().is_empty());
        }
    }

    #[test]
    fn placement_pairs() {
        assert_eq!(verify_placement(4, &[(0, 0), (0, 3)], AttackMode::Classical).unwrap(), vec![(0, 1)]);
        assert!(verify_placement(4, &[(1, 1), (1, 1)], AttackMode::Classical).is_err());
    }
}
