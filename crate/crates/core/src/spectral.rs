//! Extremal eigenpairs of Hermitian operators: dense diagonalization for small
//! matrices and restarted Lanczos with full reorthogonalization for
//! matrix-free operators.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::{CMatrix, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extremal {
    Largest,
    Smallest,
}

/// Hermitian operator available only through matrix-vector products.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[C64]) -> Vec<C64>;
}

impl LinearOperator for CMatrix {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &[C64]) -> Vec<C64> {
        let n = self.nrows();
        let mut y = vec![C64::new(0.0, 0.0); n];
        for j in 0..self.ncols() {
            let xj = x[j];
            if xj == C64::new(0.0, 0.0) {
                continue;
            }
            for (i, yi) in y.iter_mut().enumerate() {
                *yi += self[(i, j)] * xj;
            }
        }
        y
    }
}

#[derive(Debug, Clone)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<C64>,
    /// `‖Av − λv‖`.
    pub residual: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct LanczosConfig {
    pub tol: f64,
    pub seed: u64,
    pub krylov_dim: usize,
    pub max_restarts: usize,
}

impl Default for LanczosConfig {
    fn default() -> Self {
        LanczosConfig { tol: 1e-9, seed: 0, krylov_dim: 60, max_restarts: 20 }
    }
}

/// All eigenvalues (ascending) and eigenvectors (columns) of a Hermitian matrix.
pub fn hermitian_eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let hermitian = hermitize(m);
    let eig = SymmetricEigen::new(hermitian);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(m.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut v: Vec<f64> = SymmetricEigen::new(hermitize(m)).eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// `(M + M†)/2`; removes rounding-level anti-Hermitian parts.
pub fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

pub fn dense_extremal(m: &CMatrix, which: Extremal) -> EigenPair {
    let (values, vectors) = hermitian_eigh(m);
    let idx = match which {
        Extremal::Largest => values.len() - 1,
        Extremal::Smallest => 0,
    };
    let vector: Vec<C64> = vectors.column(idx).iter().copied().collect();
    let residual = residual_norm(m, values[idx], &vector);
    EigenPair { value: values[idx], vector, residual }
}

fn residual_norm<O: LinearOperator + ?Sized>(op: &O, lambda: f64, v: &[C64]) -> f64 {
    op.apply(v)
        .iter()
        .zip(v)
        .map(|(av, x)| (av - x * lambda).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn normalize(a: &mut [C64]) -> f64 {
    let nrm = norm(a);
    if nrm > 0.0 {
        a.iter_mut().for_each(|x| *x /= nrm);
    }
    nrm
}

fn random_unit(dim: usize, rng: &mut ChaCha8Rng) -> Vec<C64> {
    let mut v: Vec<C64> = (0..dim)
        .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    normalize(&mut v);
    v
}

/// Restarted Lanczos for one extremal eigenpair of a Hermitian operator.
///
/// Each cycle builds a fully reorthogonalized Krylov basis of size
/// `min(krylov_dim, dim)` and restarts from the best Ritz vector. Convergence
/// means `‖Av − λv‖ ≤ tol · max(1, |θ|_max)` with `θ` the Ritz values.
pub fn lanczos_extremal<O: LinearOperator + ?Sized>(
    op: &O,
    which: Extremal,
    cfg: &LanczosConfig,
) -> Result<EigenPair> {
    let dim = op.dim();
    if dim == 0 {
        return Err(Error::invalid("empty operator"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut start = random_unit(dim, &mut rng);
    let m_max = cfg.krylov_dim.min(dim).max(1);
    let mut best: Option<EigenPair> = None;

    for _ in 0..=cfg.max_restarts {
        let mut basis: Vec<Vec<C64>> = Vec::with_capacity(m_max);
        let mut alphas: Vec<f64> = Vec::with_capacity(m_max);
        let mut betas: Vec<f64> = Vec::with_capacity(m_max);
        basis.push(start.clone());

        loop {
            let j = basis.len() - 1;
            let mut w = op.apply(&basis[j]);
            let a = dot(&basis[j], &w).re;
            alphas.push(a);
            // Full reorthogonalization, applied twice for stability.
            for _ in 0..2 {
                for q in &basis {
                    let h = dot(q, &w);
                    for (wi, qi) in w.iter_mut().zip(q) {
                        *wi -= h * qi;
                    }
                }
            }
            let b = norm(&w);
            if basis.len() == m_max || b <= 1e-14 * a.abs().max(1.0) {
                break;
            }
            betas.push(b);
            w.iter_mut().for_each(|x| *x /= b);
            basis.push(w);
        }

        let m = alphas.len();
        let tri = DMatrix::<f64>::from_fn(m, m, |r, c| {
            if r == c {
                alphas[r]
            } else if r == c + 1 {
                betas[c]
            } else if c == r + 1 {
                betas[r]
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(tri);
        let idx = (0..m)
            .reduce(|best_i, i| {
                let better = match which {
                    Extremal::Largest => eig.eigenvalues[i] > eig.eigenvalues[best_i],
                    Extremal::Smallest => eig.eigenvalues[i] < eig.eigenvalues[best_i],
                };
                if better {
                    i
                } else {
                    best_i
                }
            })
            .expect("non-empty Krylov space");
        let theta = eig.eigenvalues[idx];
        let scale = eig.eigenvalues.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
        let mut ritz = vec![C64::new(0.0, 0.0); dim];
        for (k, q) in basis.iter().enumerate() {
            let s = eig.eigenvectors[(k, idx)];
            for (r, qi) in ritz.iter_mut().zip(q) {
                *r += qi * s;
            }
        }
        normalize(&mut ritz);
        let residual = residual_norm(op, theta, &ritz);
        let pair = EigenPair { value: theta, vector: ritz.clone(), residual };
        if residual <= cfg.tol * scale {
            return Ok(pair);
        }
        best = Some(pair);
        start = ritz;
    }
    let best = best.expect("at least one cycle");
    Err(Error::NonConvergence {
        iterations: (cfg.max_restarts + 1) * m_max,
        residual: best.residual,
    })
}
