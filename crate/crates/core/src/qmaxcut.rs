//! Quantum Max-d-Cut on cloud blow-ups of weighted graphs.
//!
//! Each vertex becomes a cloud of `k` qudits restricted to `Sym^k(C^d)`, so the
//! blown-up Hamiltonian lives on `⊗_v Sym^k(C^d)`. Coherent product states give
//! the classical energy, and the level-1 relaxation is a unit-diagonal PSD
//! program solved by full-rank factorization.

use std::collections::BTreeSet;
use std::path::Path;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::coherent::ProjectivePoint;
use crate::error::{Error, Result};
use crate::exec::{sub_seed, Exec};
use crate::spectral::{dense_extremal, hermitian_eigh, lanczos_extremal, Extremal, LanczosConfig, LinearOperator};
use crate::symspace::{sym_dim, SymBasis};
use crate::{CMatrix, C64, DEFAULT_DENSE_THRESHOLD};

/// Largest product dimension handled matrix-free.
pub const MAX_CLOUD_DIM: usize = 1 << 18;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
}

/// Simple graph with non-negative edge weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedGraph {
    vertices: usize,
    edges: Vec<Edge>,
}

impl WeightedGraph {
    pub fn new(vertices: usize, edges: Vec<(usize, usize, f64)>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::with_capacity(edges.len());
        for (u, v, weight) in edges {
            if u >= vertices || v >= vertices {
                return Err(Error::invalid(format!("edge ({u}, {v}) out of range for {vertices} vertices")));
            }
            if u == v {
                return Err(Error::invalid(format!("self-loop at vertex {u}")));
            }
            if !weight.is_finite() || weight < 0.0 {
                return Err(Error::invalid(format!("edge ({u}, {v}) has invalid weight {weight}")));
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(Error::invalid(format!("duplicate edge ({u}, {v})")));
            }
            out.push(Edge { u, v, weight });
        }
        Ok(WeightedGraph { vertices, edges: out })
    }

    pub fn empty(vertices: usize) -> Self {
        WeightedGraph { vertices, edges: Vec::new() }
    }

    pub fn single_edge() -> Self {
        WeightedGraph { vertices: 2, edges: vec![Edge { u: 0, v: 1, weight: 1.0 }] }
    }

    /// Complete graph with unit weights.
    pub fn complete(vertices: usize) -> Self {
        let mut edges = Vec::new();
        for u in 0..vertices {
            for v in u + 1..vertices {
                edges.push(Edge { u, v, weight: 1.0 });
            }
        }
        WeightedGraph { vertices, edges }
    }

    pub fn triangle() -> Self {
        Self::complete(3)
    }

    pub fn cycle(vertices: usize) -> Result<Self> {
        if vertices < 3 {
            return Err(Error::invalid("cycle needs at least 3 vertices"));
        }
        let edges = (0..vertices).map(|u| (u, (u + 1) % vertices, 1.0)).collect();
        Self::new(vertices, edges)
    }

    /// Parse `u v weight` lines (0-indexed, `#` comments). The vertex count is
    /// `max index + 1` unless `vertices` is given.
    pub fn parse(text: &str, vertices: Option<usize>) -> Result<Self> {
        let mut edges = Vec::new();
        let mut max_index: Option<usize> = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(Error::Parse(format!("line {}: expected `u v weight`, got {raw:?}", lineno + 1)));
            }
            let parse_idx = |s: &str| {
                s.parse::<usize>()
                    .map_err(|e| Error::Parse(format!("line {}: bad vertex {s:?}: {e}", lineno + 1)))
            };
            let u = parse_idx(fields[0])?;
            let v = parse_idx(fields[1])?;
            let w: f64 = fields[2]
                .parse()
                .map_err(|e| Error::Parse(format!("line {}: bad weight {:?}: {e}", lineno + 1, fields[2])))?;
            max_index = Some(max_index.map_or(u.max(v), |m| m.max(u).max(v)));
            edges.push((u, v, w));
        }
        let inferred = max_index.map_or(0, |m| m + 1);
        let n = match vertices {
            Some(n) if n < inferred => {
                return Err(Error::Parse(format!("edge index {} exceeds vertex count {n}", inferred - 1)))
            }
            Some(n) => n,
            None => inferred,
        };
        Self::new(n, edges).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn read(path: &Path, vertices: Option<usize>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?, vertices)
    }

    pub fn vertices(&self) -> usize {
        self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn total_weight(&self) -> f64 {
        // An empty float sum is -0.0; `+ 0.0` normalizes it for JSON output.
        self.edges.iter().map(|e| e.weight).sum::<f64>() + 0.0
    }
}

/// Generalized Gell-Mann matrices: `d² − 1` traceless Hermitian generators
/// with `Tr(X_α X_β) = 2δ_{αβ}` (Pauli matrices at `d = 2`, in order X, Y, Z).
pub fn generators(d: usize) -> Result<Vec<CMatrix>> {
    if d < 2 {
        return Err(Error::invalid("generators need d >= 2"));
    }
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    let mut out = Vec::with_capacity(d * d - 1);
    for p in 0..d {
        for q in p + 1..d {
            let mut sym = CMatrix::zeros(d, d);
            sym[(p, q)] = one;
            sym[(q, p)] = one;
            out.push(sym);
            let mut anti = CMatrix::zeros(d, d);
            anti[(p, q)] = -i;
            anti[(q, p)] = i;
            out.push(anti);
        }
    }
    for l in 1..d {
        let c = (2.0 / (l * (l + 1)) as f64).sqrt();
        let mut diag = CMatrix::zeros(d, d);
        for j in 0..l {
            diag[(j, j)] = C64::new(c, 0.0);
        }
        diag[(l, l)] = C64::new(-c * l as f64, 0.0);
        out.push(diag);
    }
    Ok(out)
}

/// `I − Σ_α X_α ⊗ X_α` on `C^d ⊗ C^d` (row index `a·d + b`).
pub fn edge_term(d: usize) -> Result<CMatrix> {
    let mut h = CMatrix::identity(d * d, d * d);
    for x in generators(d)? {
        h -= x.kronecker(&x);
    }
    Ok(h)
}

/// `dΓ(X) = Σ_{pq} X_{pq} a_p^† a_q` on `Sym^k(C^d)`.
pub fn second_quantize(x: &CMatrix, k: usize) -> Result<CMatrix> {
    let d = x.nrows();
    let basis = SymBasis::shared(d, k)?;
    let mut m = CMatrix::zeros(basis.len(), basis.len());
    for (col, alpha) in basis.indices().iter().enumerate() {
        for q in 0..d {
            let aq = alpha.get(q);
            if aq == 0 {
                continue;
            }
            let lowered = alpha.with_delta(q, -1).expect("occupied mode");
            for p in 0..d {
                if x[(p, q)] == C64::new(0.0, 0.0) {
                    continue;
                }
                let beta = lowered.with_delta(p, 1).expect("raising never fails");
                let amp = ((aq * beta.get(p)) as f64).sqrt();
                m[(basis.rank_of(&beta), col)] += x[(p, q)] * amp;
            }
        }
    }
    Ok(m)
}

/// `⟨z|X_α|z⟩` for every generator.
pub fn expectations(z: &ProjectivePoint, gens: &[CMatrix]) -> Vec<f64> {
    let v = nalgebra::DVector::from_column_slice(z.vector());
    gens.iter().map(|x| (v.adjoint() * x * &v)[(0, 0)].re).collect()
}

/// Compressed blown-up Hamiltonian on `⊗_v Sym^k(C^d)`, applied matrix-free.
///
/// Per edge `(v, w, wt)` the term is `wt·[1 − k⁻² Σ_α dΓ_v(X_α) dΓ_w(X_α)]`.
/// Register 0 is the most significant tensor factor.
#[derive(Debug, Clone)]
pub struct CloudHamiltonian {
    graph: WeightedGraph,
    d: usize,
    k: usize,
    local_dim: usize,
    dim: usize,
    /// `Σ_α dΓ(X_α) ⊗ dΓ(X_α)` on two registers.
    pair: CMatrix,
    exec: Exec,
}

impl CloudHamiltonian {
    pub fn new(graph: &WeightedGraph, d: usize, k: usize) -> Result<Self> {
        Self::with_capacity(graph, d, k, MAX_CLOUD_DIM)
    }

    pub fn with_capacity(graph: &WeightedGraph, d: usize, k: usize, limit: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::invalid("cloud size k must be at least 1"));
        }
        let gens = generators(d)?;
        let local_dim = sym_dim(d, k)?;
        let mut dim: usize = 1;
        for _ in 0..graph.vertices() {
            dim = dim
                .checked_mul(local_dim)
                .filter(|&x| x <= limit)
                .ok_or(Error::CapacityExceeded { dim: usize::MAX, limit })?;
        }
        let s2 = local_dim * local_dim;
        let mut pair = CMatrix::zeros(s2, s2);
        for x in &gens {
            let g = second_quantize(x, k)?;
            pair += g.kronecker(&g);
        }
        Ok(CloudHamiltonian { graph: graph.clone(), d, k, local_dim, dim, pair, exec: Exec::default() })
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub fn graph(&self) -> &WeightedGraph {
        &self.graph
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    fn stride(&self, register: usize) -> usize {
        self.local_dim.pow((self.graph.vertices() - 1 - register) as u32)
    }

    /// `wt·(x − k⁻² P_{uv} x)` for one edge.
    fn apply_edge(&self, e: &Edge, x: &[C64]) -> Vec<C64> {
        let s = self.local_dim;
        let (su, sv) = (self.stride(e.u), self.stride(e.v));
        let inv_k2 = 1.0 / (self.k * self.k) as f64;
        let mut y: Vec<C64> = x.iter().map(|c| c * e.weight).collect();
        let mut local = vec![C64::new(0.0, 0.0); s * s];
        for base in 0..self.dim {
            if (base / su) % s != 0 || (base / sv) % s != 0 {
                continue;
            }
            for a in 0..s {
                for b in 0..s {
                    local[a * s + b] = x[base + a * su + b * sv];
                }
            }
            for a in 0..s {
                for b in 0..s {
                    let row = a * s + b;
                    let mut acc = C64::new(0.0, 0.0);
                    for (col, l) in local.iter().enumerate() {
                        acc += self.pair[(row, col)] * l;
                    }
                    y[base + a * su + b * sv] -= acc * (e.weight * inv_k2);
                }
            }
        }
        y
    }

    /// Materialize; refuses above `threshold`.
    pub fn to_dense(&self, threshold: usize) -> Result<CMatrix> {
        if self.dim > threshold {
            return Err(Error::CapacityExceeded { dim: self.dim, limit: threshold });
        }
        let cols = self.exec.map(self.dim, |c| {
            let mut e = vec![C64::new(0.0, 0.0); self.dim];
            e[c] = C64::new(1.0, 0.0);
            LinearOperator::apply(self, &e)
        });
        Ok(CMatrix::from_fn(self.dim, self.dim, |r, c| cols[c][r]))
    }

    /// `⟨ψ|H|ψ⟩` for a product of per-register vectors.
    pub fn product_expectation(&self, factors: &[Vec<C64>]) -> Result<C64> {
        if factors.len() != self.graph.vertices() || factors.iter().any(|f| f.len() != self.local_dim) {
            return Err(Error::DimensionMismatch { expected: self.local_dim, got: factors.first().map_or(0, Vec::len) });
        }
        let psi = tensor_product(factors);
        let hpsi = LinearOperator::apply(self, &psi);
        Ok(psi.iter().zip(&hpsi).map(|(a, b)| a.conj() * b).sum())
    }
}

impl LinearOperator for CloudHamiltonian {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &[C64]) -> Vec<C64> {
        let edges = self.graph.edges();
        let parts = self.exec.map(edges.len(), |i| self.apply_edge(&edges[i], x));
        let mut y = vec![C64::new(0.0, 0.0); self.dim];
        for part in parts {
            for (yi, pi) in y.iter_mut().zip(part) {
                *yi += pi;
            }
        }
        y
    }
}

/// Kronecker product of vectors, first factor most significant.
pub fn tensor_product(factors: &[Vec<C64>]) -> Vec<C64> {
    factors.iter().fold(vec![C64::new(1.0, 0.0)], |acc, f| {
        acc.iter().flat_map(|a| f.iter().map(move |b| a * b)).collect()
    })
}

pub fn cloud_hamiltonian(graph: &WeightedGraph, d: usize, k: usize) -> Result<CloudHamiltonian> {
    CloudHamiltonian::new(graph, d, k)
}

/// `λ_max(H)`: dense below [`DEFAULT_DENSE_THRESHOLD`], Lanczos above.
pub fn max_energy(h: &CloudHamiltonian, tol: f64, seed: u64) -> Result<f64> {
    max_energy_with(h, tol, seed, DEFAULT_DENSE_THRESHOLD)
}

pub fn max_energy_with(h: &CloudHamiltonian, tol: f64, seed: u64, dense_threshold: usize) -> Result<f64> {
    if h.graph.edges().is_empty() {
        return Ok(0.0);
    }
    if h.dim <= dense_threshold {
        return Ok(dense_extremal(&h.to_dense(dense_threshold)?, Extremal::Largest).value);
    }
    let cfg = LanczosConfig { tol, seed, ..Default::default() };
    Ok(lanczos_extremal(h, Extremal::Largest, &cfg)?.value)
}

fn check_assignment(graph: &WeightedGraph, d: usize, assignment: &[ProjectivePoint]) -> Result<()> {
    if assignment.len() != graph.vertices() {
        return Err(Error::DimensionMismatch { expected: graph.vertices(), got: assignment.len() });
    }
    if let Some(z) = assignment.iter().find(|z| z.d() != d) {
        return Err(Error::DimensionMismatch { expected: d, got: z.d() });
    }
    Ok(())
}

/// `Σ_e wt·(1 − Σ_α ⟨z_u|X_α|z_u⟩⟨z_v|X_α|z_v⟩)`.
pub fn classical_energy(graph: &WeightedGraph, d: usize, assignment: &[ProjectivePoint]) -> Result<f64> {
    check_assignment(graph, d, assignment)?;
    let gens = generators(d)?;
    let ex: Vec<Vec<f64>> = assignment.iter().map(|z| expectations(z, &gens)).collect();
    Ok(graph
        .edges()
        .iter()
        .map(|e| {
            let dot: f64 = ex[e.u].iter().zip(&ex[e.v]).map(|(a, b)| a * b).sum();
            e.weight * (1.0 - dot)
        })
        .sum::<f64>()
        + 0.0)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassicalSolution {
    pub assignment: Vec<ProjectivePoint>,
    pub value: f64,
}

const SWEEP_LIMIT: usize = 2000;
const SWEEP_TOL: f64 = 1e-14;

/// Multistart block-coordinate ascent over `(CP^{d−1})^{|V|}`.
///
/// With the others fixed, the energy is affine in `|z_v⟩⟨z_v|` with matrix
/// `−Σ_w wt·(2|z_w⟩⟨z_w| − 2/d)`, so each block update is an exact best
/// response: the bottom eigenvector of `Σ_w wt|z_w⟩⟨z_w|`.
pub fn classical_opt(graph: &WeightedGraph, d: usize, restarts: usize, seed: u64, exec: Exec) -> Result<ClassicalSolution> {
    if d < 2 {
        return Err(Error::invalid("classical_opt needs d >= 2"));
    }
    let n = graph.vertices();
    let mut nbrs: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for e in graph.edges() {
        nbrs[e.u].push((e.v, e.weight));
        nbrs[e.v].push((e.u, e.weight));
    }
    let runs = exec.map(restarts.max(1), |r| {
        let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, r as u64));
        let mut z: Vec<ProjectivePoint> = (0..n).map(|_| ProjectivePoint::random(d, &mut rng)).collect();
        let mut value = classical_energy(graph, d, &z)?;
        for _ in 0..SWEEP_LIMIT {
            for v in 0..n {
                if nbrs[v].is_empty() {
                    continue;
                }
                let mut b = CMatrix::zeros(d, d);
                for &(w, wt) in &nbrs[v] {
                    let zw = nalgebra::DVector::from_column_slice(z[w].vector());
                    b += (&zw * zw.adjoint()) * C64::new(wt, 0.0);
                }
                let (_, vecs) = hermitian_eigh(&b);
                z[v] = ProjectivePoint::new(vecs.column(0).iter().copied().collect())?;
            }
            let next = classical_energy(graph, d, &z)?;
            let done = next - value <= SWEEP_TOL * value.abs().max(1.0);
            value = value.max(next);
            if done {
                break;
            }
        }
        let value = classical_energy(graph, d, &z)?;
        Ok::<_, Error>(ClassicalSolution { assignment: z, value })
    });
    let mut best: Option<ClassicalSolution> = None;
    for run in runs {
        let run = run?;
        if best.as_ref().is_none_or(|b| run.value > b.value) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one restart"))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SdpResult {
    /// Primal value `Σ wt·(1 − c·M_uv)` at the best factorization found.
    pub value: f64,
    /// Dual-certificate upper bound on the optimum.
    pub upper_bound: f64,
    /// `c = 2 − 2/d`, the squared norm of a coherent Bloch vector.
    pub scale: f64,
    pub converged: bool,
}

const SDP_TOL: f64 = 1e-6;

/// Level-1 relaxation `max Σ wt·(1 − c·M_uv)` over PSD `M` with unit
/// diagonal, `c = 2 − 2/d` (so `c = 1` at `d = 2`), via full-rank
/// Burer–Monteiro block updates `x_v ← −normalize(Σ_w wt x_w)`.
pub fn grothendieck_sdp1(graph: &WeightedGraph, d: usize, restarts: usize, seed: u64, exec: Exec) -> Result<SdpResult> {
    if d < 2 {
        return Err(Error::invalid("grothendieck_sdp1 needs d >= 2"));
    }
    let n = graph.vertices();
    if n > 200 {
        return Err(Error::CapacityExceeded { dim: n, limit: 200 });
    }
    let c = 2.0 - 2.0 / d as f64;
    let total = graph.total_weight();
    if graph.edges().is_empty() || total == 0.0 {
        return Ok(SdpResult { value: total, upper_bound: total, scale: c, converged: true });
    }
    let mut w = DMatrix::<f64>::zeros(n, n);
    for e in graph.edges() {
        w[(e.u, e.v)] += e.weight;
        w[(e.v, e.u)] += e.weight;
    }
    let w = &w;
    let runs = exec.map(restarts.max(1), |r| {
        let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, r as u64));
        let mut x = DMatrix::<f64>::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
        for mut col in x.column_iter_mut() {
            col.normalize_mut();
        }
        let objective = |x: &DMatrix<f64>| (x.transpose() * x).component_mul(w).sum() / 2.0;
        let mut value = objective(&x);
        for _ in 0..20 * SWEEP_LIMIT {
            for v in 0..n {
                let g = &x * w.column(v);
                let nrm = g.norm();
                if nrm > 1e-300 {
                    x.set_column(v, &(-g / nrm));
                }
            }
            let next = objective(&x);
            let done = value - next <= 1e-15 * total;
            value = next;
            if done {
                break;
            }
        }
        x
    });
    let mut best: Option<(f64, f64)> = None;
    for x in runs {
        let m = x.transpose() * &x;
        let primal_min = m.component_mul(w).sum() / 2.0;
        // Dual of min ⟨W/2, M⟩ s.t. diag M = 1: y_v = (W M)_vv / 2, shifted by
        // λ_min(W/2 − Diag(y)) to make it feasible.
        let half = w / 2.0;
        let y: Vec<f64> = (0..n).map(|v| (half.row(v) * m.column(v))[(0, 0)]).collect();
        let mut s = half.clone();
        for (v, yv) in y.iter().enumerate() {
            s[(v, v)] -= yv;
        }
        let lam = s.symmetric_eigenvalues().min();
        let dual_min = y.iter().sum::<f64>() + n as f64 * lam.min(0.0);
        let value = total - c * primal_min;
        let upper = total - c * dual_min;
        if best.is_none_or(|(bv, _)| value > bv) {
            best = Some((value, upper));
        }
    }
    let (value, upper) = best.expect("at least one restart");
    let upper = upper.max(value);
    Ok(SdpResult { value, upper_bound: upper, scale: c, converged: upper - value <= SDP_TOL * value.abs().max(1.0) })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GapReport {
    pub k: usize,
    pub quantum: f64,
    pub classical: f64,
    pub sdp1: f64,
    /// `quantum / classical`; absent when `classical = 0`.
    pub quantum_ratio: Option<f64>,
    /// `sdp1 / classical`; absent when `classical = 0`.
    pub sdp_ratio: Option<f64>,
    /// `classical ≤ quantum` and `classical ≤ sdp1` within `1e−9`.
    pub contained: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct GapConfig {
    pub restarts: usize,
    pub tol: f64,
    pub exec: Exec,
}

impl Default for GapConfig {
    fn default() -> Self {
        GapConfig { restarts: 16, tol: 1e-9, exec: Exec::default() }
    }
}

const CONTAINMENT_SLACK: f64 = 1e-9;

/// One [`GapReport`] per cloud size. Classical and SDP values do not depend
/// on `k` and are computed once.
pub fn gap_experiment(graph: &WeightedGraph, d: usize, k_list: &[usize], seed: u64, cfg: &GapConfig) -> Result<Vec<GapReport>> {
    let classical = classical_opt(graph, d, cfg.restarts, seed, cfg.exec)?.value;
    let sdp1 = grothendieck_sdp1(graph, d, cfg.restarts, sub_seed(seed, 1 << 32), cfg.exec)?.value;
    let ratio = |x: f64| (classical > 0.0).then(|| x / classical);
    k_list
        .iter()
        .map(|&k| {
            let h = CloudHamiltonian::new(graph, d, k)?.with_exec(cfg.exec);
            let quantum = max_energy(&h, cfg.tol, seed)?;
            Ok(GapReport {
                k,
                quantum,
                classical,
                sdp1,
                quantum_ratio: ratio(quantum),
                sdp_ratio: ratio(sdp1),
                contained: classical <= quantum + CONTAINMENT_SLACK && classical <= sdp1 + CONTAINMENT_SLACK,
            })
        })
        .collect()
}

/// `quantum − classical` is non-increasing along the report order.
pub fn gap_non_increasing(reports: &[GapReport], tol: f64) -> bool {
    reports
        .windows(2)
        .all(|w| w[1].quantum - w[1].classical <= w[0].quantum - w[0].classical + tol)
}
