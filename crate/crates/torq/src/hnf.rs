//! Independent lattice-membership oracle: row echelon (Hermite) form of the
//! edge-shadow matrix over exact integers.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use crate::board::{Edge, Vertex};
use crate::error::{Result, TorqError};
use crate::lattice::{LatticeKind, SupportVector};

/// Largest board side the oracle accepts.
pub const MAX_ORACLE_N: usize = 15;

/// Echelon basis of the integer span of all edge shadows.
#[derive(Debug, Clone)]
pub struct HnfOracle {
    n: usize,
    kind: LatticeKind,
    /// Pivot column -> basis row (positive pivot, zeros left of it).
    basis: BTreeMap<usize, Vec<BigInt>>,
}

fn column(n: usize, v: Vertex) -> usize {
    v.part.index() * n + v.coord
}

impl HnfOracle {
    pub fn new(n: usize, kind: LatticeKind) -> Result<Self> {
        if n == 0 || n > MAX_ORACLE_N {
            return Err(TorqError::Unsupported(format!(
                "HNF oracle supports 1 <= n <= {MAX_ORACLE_N}, got {n}"
            )));
        }
        let width = kind.parts().len() * n;
        let mut oracle = HnfOracle { n, kind, basis: BTreeMap::new() };
        for x in 0..n {
            for y in 0..n {
                let mut row = vec![BigInt::zero(); width];
                for v in (Edge { x, y }).vertices(n).iter().take(kind.parts().len()) {
                    row[column(n, *v)] += 1;
                }
                oracle.insert(row);
            }
        }
        Ok(oracle)
    }

    fn insert(&mut self, mut row: Vec<BigInt>) {
        while let Some(j) = row.iter().position(|x| !x.is_zero()) {
            let Some(b) = self.basis.get(&j) else {
                if row[j].is_negative() {
                    row.iter_mut().for_each(|x| *x = -x.clone());
                }
                self.basis.insert(j, row);
                return;
            };
            let (p, q) = (b[j].clone(), row[j].clone());
            let eg = p.extended_gcd(&q);
            let (g, s, t) = (eg.gcd, eg.x, eg.y);
            let pg = &p / &g;
            let qg = &q / &g;
            let new_b: Vec<BigInt> = b.iter().zip(&row).map(|(bi, ri)| &s * bi + &t * ri).collect();
            let rest: Vec<BigInt> = b.iter().zip(&row).map(|(bi, ri)| &pg * ri - &qg * bi).collect();
            let mut new_b = new_b;
            if new_b[j].is_negative() {
                new_b.iter_mut().for_each(|x| *x = -x.clone());
            }
            self.basis.insert(j, new_b);
            row = rest;
        }
    }

    /// Whether `v` lies in the integer span of edge shadows.
    pub fn contains(&self, v: &SupportVector) -> bool {
        let parts = self.kind.parts();
        if v.support().any(|u| !parts.contains(&u.part)) {
            return false;
        }
        let mut row = vec![BigInt::zero(); parts.len() * self.n];
        for (u, w) in v.entries() {
            row[column(self.n, u)] += w;
        }
        for (&j, b) in &self.basis {
            if row[j].is_zero() {
                continue;
            }
            if row[..j].iter().any(|x| !x.is_zero()) {
                return false;
            }
            let (q, r) = row[j].div_rem(&b[j]);
            if !r.is_zero() {
                return false;
            }
            for (x, bi) in row.iter_mut().zip(b) {
                *x -= &q * bi;
            }
        }
        row.iter().all(|x| x.is_zero())
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }
}

/// One-shot oracle query.
pub fn hnf_oracle(n: usize, kind: LatticeKind, v: &SupportVector) -> Result<bool> {
    Ok(HnfOracle::new(n, kind)?.contains(v))
}
