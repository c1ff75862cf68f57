//! The random greedy matching process and its reference trajectories.
//!
//! Randomness: each run draws from `ChaCha8Rng::seed_from_u64(seed)` with
//! stream `trial` (0 for single runs), so runs are reproducible per
//! `(seed, trial)` and independent across trials.

use std::io::Write;

use num_traits::Float;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::board::{centered, wraps, Edge, Matching, Part, TorusGraph, Vertex, Wrap};
use crate::error::{Result, TorqError};

pub const RNG_NAME: &str = "ChaCha8 (seed_from_u64, stream = trial)";

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepRecord {
    pub i: usize,
    /// Remaining edges.
    pub q: u64,
    pub d_min: u32,
    pub d_max: u32,
    /// Odd S count minus odd D count (centered coordinates) of the remaining vertices.
    pub parity_disparity: i64,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GreedyTrace {
    pub n: usize,
    pub seed: u64,
    pub rng: &'static str,
    pub initial_vertices: usize,
    /// One record before each selection, plus one for the final state.
    pub steps: Vec<StepRecord>,
    pub matching: Matching,
    /// The matching covers every vertex of the graph.
    pub completed: bool,
}

fn rng_for(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn vertex_index(n: usize, v: Vertex) -> usize {
    v.part.index() * 2 * n + v.coord
}

fn parity_sign(n: usize, v: Vertex) -> i64 {
    let odd = centered(n, v.coord).rem_euclid(2) == 1;
    match (v.part, odd) {
        (Part::S, true) => 1,
        (Part::D, true) => -1,
        _ => 0,
    }
}

/// Mutable state of one run: edge pool with swap-remove, degrees and a
/// degree histogram.
struct Process<'g> {
    g: &'g TorusGraph,
    pool: Vec<u32>,
    pos: Vec<u32>,
    alive: Vec<bool>,
    degree: Vec<u32>,
    hist: Vec<u32>,
    d_min: u32,
    d_max: u32,
    live_vertices: usize,
    disparity: i64,
}

const ABSENT: u32 = u32::MAX;

impl<'g> Process<'g> {
    fn new(g: &'g TorusGraph) -> Self {
        let n = g.n;
        let mut pool = Vec::with_capacity(n * n);
        let mut pos = vec![ABSENT; n * n];
        let mut degree = vec![0u32; 8 * n];
        let mut alive = vec![false; 8 * n];
        for e in g.edges() {
            let id = (e.x * n + e.y) as u32;
            pos[id as usize] = pool.len() as u32;
            pool.push(id);
            for v in g.edge_vertices(e) {
                degree[vertex_index(n, v)] += 1;
            }
        }
        let mut hist = vec![0u32; 2 * n + 2];
        let mut disparity = 0;
        let verts = g.vertices();
        for &v in &verts {
            let k = vertex_index(n, v);
            alive[k] = true;
            hist[degree[k] as usize] += 1;
            disparity += parity_sign(n, v);
        }
        let d_min = verts.iter().map(|&v| degree[vertex_index(n, v)]).min().unwrap_or(0);
        let d_max = verts.iter().map(|&v| degree[vertex_index(n, v)]).max().unwrap_or(0);
        Process { g, pool, pos, alive, degree, hist, d_min, d_max, live_vertices: verts.len(), disparity }
    }

    fn record(&self, i: usize, v0: usize) -> StepRecord {
        StepRecord {
            i,
            q: self.pool.len() as u64,
            d_min: self.d_min,
            d_max: self.d_max,
            parity_disparity: self.disparity,
            p: 1.0 - 4.0 * i as f64 / v0 as f64,
        }
    }

    fn edge(&self, id: u32) -> Edge {
        let n = self.g.n as u32;
        Edge { x: (id / n) as usize, y: (id % n) as usize }
    }

    fn set_degree(&mut self, k: usize, d: u32) {
        self.hist[self.degree[k] as usize] -= 1;
        self.hist[d as usize] += 1;
        self.degree[k] = d;
        self.d_min = self.d_min.min(d);
    }

    fn drop_edge(&mut self, id: u32) {
        let at = self.pos[id as usize];
        if at == ABSENT {
            return;
        }
        let last = *self.pool.last().expect("pool nonempty");
        self.pool.swap_remove(at as usize);
        if last != id {
            self.pos[last as usize] = at;
        }
        self.pos[id as usize] = ABSENT;
        let n = self.g.n;
        for v in self.g.edge_vertices(self.edge(id)) {
            let k = vertex_index(n, v);
            if self.alive[k] {
                let d = self.degree[k] - 1;
                self.set_degree(k, d);
            }
        }
    }

    fn remove_vertex(&mut self, v: Vertex) {
        let n = self.g.n;
        let k = vertex_index(n, v);
        self.alive[k] = false;
        self.hist[self.degree[k] as usize] -= 1;
        self.live_vertices -= 1;
        self.disparity -= parity_sign(n, v);
        for e in self.g.edges_through(v) {
            self.drop_edge((e.x * n + e.y) as u32);
        }
    }

    fn refresh_extremes(&mut self) {
        if self.live_vertices == 0 {
            self.d_min = 0;
            self.d_max = 0;
            return;
        }
        while self.hist[self.d_max as usize] == 0 {
            self.d_max -= 1;
        }
        while self.hist[self.d_min as usize] == 0 {
            self.d_min += 1;
        }
    }

    fn select<R: Rng>(&mut self, rng: &mut R) -> Edge {
        let id = self.pool[rng.gen_range(0..self.pool.len())];
        let e = self.edge(id);
        for v in self.g.edge_vertices(e) {
            self.remove_vertex(v);
        }
        self.refresh_extremes();
        e
    }
}

fn run(g: &TorusGraph, seed: u64, stop_fraction: f64) -> GreedyTrace {
    let mut rng = rng_for(seed, 0);
    let mut proc = Process::new(g);
    let v0 = proc.live_vertices;
    let target = ((stop_fraction * g.n as f64).ceil() as usize).min(v0 / 4);
    let mut steps = Vec::new();
    let mut edges = Vec::new();
    let mut i = 0;
    loop {
        steps.push(proc.record(i, v0));
        if i >= target || proc.pool.is_empty() {
            break;
        }
        edges.push(proc.select(&mut rng));
        i += 1;
    }
    GreedyTrace {
        n: g.n,
        seed,
        rng: RNG_NAME,
        initial_vertices: v0,
        steps,
        matching: Matching { edges },
        completed: proc.live_vertices == 0,
    }
}

/// Run the process on `g` until `ceil(stop_fraction * n)` edges are chosen
/// or no edge remains.
pub fn run_greedy(g: &TorusGraph, seed: u64, stop_fraction: f64) -> Result<GreedyTrace> {
    if !(stop_fraction > 0.0 && stop_fraction <= 1.0) {
        return Err(TorqError::InvalidArgument(format!("stop fraction {stop_fraction} not in (0, 1]")));
    }
    if g.edges().is_empty() {
        return Err(TorqError::InvalidArgument("graph has no edges".into()));
    }
    Ok(run(g, seed, stop_fraction))
}

/// Check the trace audit inequalities: Q strictly decreasing,
/// `Q(i+1) >= Q(i) - 4 d_max(i)`, and `|V(i)| = |V(0)| - 4i` via p.
pub fn audit_trace(trace: &GreedyTrace) -> Result<()> {
    for w in trace.steps.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b.q >= a.q || b.q + 4 * u64::from(a.d_max) < a.q {
            return Err(TorqError::Verification(format!("Q decrement out of range at step {}", a.i)));
        }
        if b.i != a.i + 1 {
            return Err(TorqError::Verification(format!("step index gap after {}", a.i)));
        }
    }
    Ok(())
}

/// Reference trajectory envelopes `e_q = 2(1 - 4 ln p) b n^2` and
/// `e_d = 2(1 - 4 ln p) b^(2/3) n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Envelope<F> {
    pub b: F,
    pub n: F,
}

impl<F: Float> Envelope<F> {
    pub fn new(b: F, n: F) -> Self {
        Envelope { b, n }
    }

    fn growth(p: F) -> F {
        let two = F::one() + F::one();
        let four = two + two;
        two * (F::one() - four * p.ln())
    }

    pub fn e_q(&self, p: F) -> F {
        Self::growth(p) * self.b * self.n * self.n
    }

    pub fn e_d(&self, p: F) -> F {
        let three = F::one() + F::one() + F::one();
        let two = F::one() + F::one();
        Self::growth(p) * self.b.powf(two / three) * self.n
    }

    /// `n^2 p^4`.
    pub fn q_trajectory(&self, p: F) -> F {
        self.n * self.n * p.powi(4)
    }

    /// `n p^3`.
    pub fn d_trajectory(&self, p: F) -> F {
        self.n * p.powi(3)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvelopeReport {
    /// Per step: (Q inside, degrees inside).
    pub flags: Vec<(bool, bool)>,
    pub q_inside_fraction: f64,
    pub d_inside_fraction: f64,
    pub first_q_violation: Option<usize>,
    pub first_d_violation: Option<usize>,
}

pub fn envelope_check(trace: &GreedyTrace, b: f64) -> EnvelopeReport {
    let env = Envelope::new(b, trace.n as f64);
    let flags: Vec<(bool, bool)> = trace
        .steps
        .iter()
        .map(|s| {
            if s.p <= 0.0 {
                return (s.q == 0, true);
            }
            let q_ok = (s.q as f64 - env.q_trajectory(s.p)).abs() <= env.e_q(s.p);
            let np3 = env.d_trajectory(s.p);
            let dev = (s.d_min as f64 - np3).abs().max((s.d_max as f64 - np3).abs());
            (q_ok, dev <= env.e_d(s.p))
        })
        .collect();
    let frac = |k: usize| {
        if flags.is_empty() {
            1.0
        } else {
            flags.iter().filter(|f| if k == 0 { f.0 } else { f.1 }).count() as f64 / flags.len() as f64
        }
    };
    EnvelopeReport {
        q_inside_fraction: frac(0),
        d_inside_fraction: frac(1),
        first_q_violation: flags.iter().position(|f| !f.0),
        first_d_violation: flags.iter().position(|f| !f.1),
        flags,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CountEstimate {
    /// Sum over chosen steps of `ln Q(i) - ln(n - i)`.
    pub log_total: f64,
    /// `log_total / n`, comparable with `ln n - 3`.
    pub normalized: f64,
}

pub fn count_estimate(trace: &GreedyTrace) -> CountEstimate {
    let m = trace.matching.edges.len();
    let n = trace.n as f64;
    let log_total: f64 = trace.steps.iter().take(m).map(|s| (s.q as f64).ln() - (n - s.i as f64).ln()).sum();
    CountEstimate { log_total, normalized: if trace.n == 0 { 0.0 } else { log_total / n } }
}

/// Mean over `trials` runs of the product of remaining edge counts along the
/// path, counting runs that die early as 0. Unbiased for the number of
/// ordered perfect matchings, i.e. `(|V|/4)!` times the matching count.
pub fn knuth_count_estimator(g: &TorusGraph, trials: u64, seed: u64) -> f64 {
    if trials == 0 {
        return 0.0;
    }
    let logs: Vec<f64> = (0..trials)
        .filter_map(|t| {
            let mut rng = rng_for(seed, t);
            let mut proc = Process::new(g);
            let mut log = 0.0;
            while !proc.pool.is_empty() {
                log += (proc.pool.len() as f64).ln();
                proc.select(&mut rng);
            }
            (proc.live_vertices == 0).then_some(log)
        })
        .collect();
    let Some(max) = logs.iter().copied().reduce(f64::max) else {
        return 0.0;
    };
    let sum: f64 = logs.iter().map(|l| (l - max).exp()).sum();
    (max + sum.ln() - (trials as f64).ln()).exp()
}

/// +1 for a wrap edge with even S and odd D (centered), -1 for odd S and
/// even D, 0 for non-wrap edges. Removing an edge changes the disparity by
/// this amount.
pub fn wrap_class(n: usize, e: Edge) -> i64 {
    if wraps(n, e) == Wrap::None {
        return 0;
    }
    let s = centered(n, e.s(n)).rem_euclid(2);
    let d = centered(n, e.d(n)).rem_euclid(2);
    match (s, d) {
        (0, 1) => 1,
        (1, 0) => -1,
        _ => 0,
    }
}

/// Disparity after each step, cross-checked against the cumulative wrap
/// classes of the chosen edges.
pub fn parity_track(trace: &GreedyTrace) -> Result<Vec<i64>> {
    let n = trace.n;
    if n.is_multiple_of(2) {
        return Err(TorqError::Unsupported("parity tracking is defined for odd n only".into()));
    }
    let out: Vec<i64> = trace.steps.iter().map(|s| s.parity_disparity).collect();
    let mut expect = out.first().copied().unwrap_or(0);
    for (k, &e) in trace.matching.edges.iter().enumerate() {
        expect += wrap_class(n, e);
        if out.get(k + 1).is_some_and(|&d| d != expect) {
            return Err(TorqError::Verification(format!("parity disparity mismatch after step {k}")));
        }
    }
    Ok(out)
}

/// Write the trace as CSV with columns
/// `i, Q, p, n2p4, eq, dmin, dmax, np3, ed, parity_disparity`.
pub fn write_trace_csv<W: Write>(trace: &GreedyTrace, b: f64, out: W) -> Result<()> {
    let env = Envelope::new(b, trace.n as f64);
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| TorqError::InvalidArgument(format!("csv output failed: {e}"));
    w.write_record(["i", "Q", "p", "n2p4", "eq", "dmin", "dmax", "np3", "ed", "parity_disparity"]).map_err(io)?;
    for s in &trace.steps {
        let p = s.p.max(f64::MIN_POSITIVE);
        w.write_record([
            s.i.to_string(),
            s.q.to_string(),
            s.p.to_string(),
            env.q_trajectory(s.p).to_string(),
            env.e_q(p).to_string(),
            s.d_min.to_string(),
            s.d_max.to_string(),
            env.d_trajectory(s.p).to_string(),
            env.e_d(p).to_string(),
            s.parity_disparity.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| TorqError::InvalidArgument(format!("csv output failed: {e}")))?;
    Ok(())
}
