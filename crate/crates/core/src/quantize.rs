//! Q- and P-quantization of Hermitian bihomogeneous polynomials on
//! `Sym^n(C^d)`, the spectral sandwich `λ_max(A^P) ≤ sup f ≤ λ_max(A^Q)`, and
//! Husimi rounding of eigenvectors back to points of `CP^{d−1}`.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::coherent::{batch_means_stderr, fs_moment, HusimiSampler, HusimiTarget, ProjectivePoint, SamplerConfig};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::fock::{apply_word_counted, OperatorWord, SymVector};
use crate::spectral::{dense_extremal, lanczos_extremal, Extremal, LanczosConfig, LinearOperator};
use crate::symspace::{enumerate_indices, ln_factorial, sym_dim, MultiIndex, SymBasis};
use crate::{CMatrix, C64, DEFAULT_DENSE_THRESHOLD};

/// `f(z) = Σ c_{αβ} z̄^α z^β` with `|α| = |β| = k` and `c_{βα} = conj(c_{αβ})`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianPoly {
    d: usize,
    k: usize,
    terms: BTreeMap<(MultiIndex, MultiIndex), C64>,
}

const HERMITIAN_TOL: f64 = 1e-12;

impl HermitianPoly {
    /// Validates degrees and Hermitian closure; never repairs.
    pub fn new(d: usize, k: usize, terms: Vec<(MultiIndex, MultiIndex, C64)>) -> Result<Self> {
        if d == 0 {
            return Err(Error::invalid("d must be at least 1"));
        }
        let mut map = BTreeMap::new();
        for (alpha, beta, c) in terms {
            if alpha.dim() != d || beta.dim() != d {
                return Err(Error::DimensionMismatch { expected: d, got: alpha.dim().max(beta.dim()) });
            }
            if alpha.weight() != k || beta.weight() != k {
                return Err(Error::invalid(format!(
                    "term ({alpha:?}, {beta:?}) is not of bidegree ({k}, {k})"
                )));
            }
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(Error::invalid(format!("non-finite coefficient at ({alpha:?}, {beta:?})")));
            }
            if map.insert((alpha.clone(), beta.clone()), c).is_some() {
                return Err(Error::invalid(format!("duplicate term ({alpha:?}, {beta:?})")));
            }
        }
        for ((alpha, beta), c) in &map {
            let partner = map.get(&(beta.clone(), alpha.clone()));
            let ok = partner.is_some_and(|p| (p.conj() - c).norm() <= HERMITIAN_TOL * (1.0 + c.norm()));
            if !ok {
                return Err(Error::NonHermitian {
                    alpha: alpha.entries().to_vec(),
                    beta: beta.entries().to_vec(),
                });
            }
        }
        Ok(HermitianPoly { d, k, terms: map })
    }

    /// `f ≡ c` (bidegree 0).
    pub fn constant(d: usize, c: f64) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert((MultiIndex::zeros(d), MultiIndex::zeros(d)), C64::new(c, 0.0));
        HermitianPoly { d, k: 0, terms }
    }

    /// `|z_i|^{2p}`.
    pub fn abs_power(d: usize, i: usize, p: usize) -> Self {
        let e = MultiIndex::unit(d, i, p);
        let mut terms = BTreeMap::new();
        terms.insert((e.clone(), e), C64::new(1.0, 0.0));
        HermitianPoly { d, k: p, terms }
    }

    /// Dense random polynomial: Gaussian coefficients on every `(α, β)` with
    /// Hermitian symmetry enforced.
    pub fn random<R: Rng + ?Sized>(d: usize, k: usize, rng: &mut R) -> Result<Self> {
        let idx = enumerate_indices(d, k)?;
        let mut terms = Vec::new();
        for (i, a) in idx.iter().enumerate() {
            for b in &idx[i..] {
                if a == b {
                    terms.push((a.clone(), b.clone(), C64::new(rng.sample(StandardNormal), 0.0)));
                } else {
                    let c = C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)) * 0.5f64.sqrt();
                    terms.push((a.clone(), b.clone(), c));
                    terms.push((b.clone(), a.clone(), c.conj()));
                }
            }
        }
        Self::new(d, k, terms)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of stored nonzero coefficients.
    pub fn nnz(&self) -> usize {
        self.terms.values().filter(|c| c.norm() != 0.0).count()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &MultiIndex, &C64)> {
        self.terms.iter().map(|((a, b), c)| (a, b, c))
    }

    pub fn evaluate_complex(&self, z: &ProjectivePoint) -> Result<C64> {
        if z.d() != self.d {
            return Err(Error::DimensionMismatch { expected: self.d, got: z.d() });
        }
        Ok(self
            .terms()
            .map(|(a, b, c)| c * z.monomial(a).conj() * z.monomial(b))
            .sum())
    }

    /// `Σ c_{αβ} z̄^α z^β` (real for Hermitian `f`).
    pub fn evaluate(&self, z: &ProjectivePoint) -> Result<f64> {
        self.evaluate_complex(z).map(|v| v.re)
    }

    /// Wirtinger derivative `∂f/∂z̄`, the ascent direction for real `f`.
    pub fn grad_conj(&self, z: &ProjectivePoint) -> Vec<C64> {
        let mut g = vec![C64::new(0.0, 0.0); self.d];
        for (a, b, c) in self.terms() {
            let zb = z.monomial(b);
            for (i, gi) in g.iter_mut().enumerate() {
                if let Some(lower) = a.with_delta(i, -1) {
                    *gi += c * (a.get(i) as f64) * z.monomial(&lower).conj() * zb;
                }
            }
        }
        g
    }

    /// `Σ |c_{αβ}|`, a crude scale for step sizes.
    pub fn l1_norm(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).sum()
    }
}

#[derive(Debug, Clone)]
pub enum OperatorRepr {
    Dense(CMatrix),
    /// `scale · Σ words`.
    Words { words: Vec<OperatorWord>, scale: f64 },
}

/// Hermitian operator on `Sym^n(C^d)`.
#[derive(Debug, Clone)]
pub struct SymOperator {
    d: usize,
    n: usize,
    repr: OperatorRepr,
    exec: Exec,
}

impl SymOperator {
    pub fn dense(d: usize, n: usize, m: CMatrix) -> Result<Self> {
        let dim = sym_dim(d, n)?;
        if m.nrows() != dim || m.ncols() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: m.nrows() });
        }
        Ok(SymOperator { d, n, repr: OperatorRepr::Dense(m), exec: Exec::default() })
    }

    pub fn words(d: usize, n: usize, words: Vec<OperatorWord>, scale: f64) -> Self {
        SymOperator { d, n, repr: OperatorRepr::Words { words, scale }, exec: Exec::default() }
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        sym_dim(self.d, self.n).expect("validated at construction")
    }

    pub fn repr(&self) -> &OperatorRepr {
        &self.repr
    }

    pub fn apply(&self, v: &SymVector) -> Result<SymVector> {
        self.apply_counted(v).map(|(out, _)| out)
    }

    /// Apply, also returning the number of ladder-operator applications
    /// (zero for dense operators).
    pub fn apply_counted(&self, v: &SymVector) -> Result<(SymVector, usize)> {
        if (v.d(), v.n()) != (self.d, self.n) {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: v.len() });
        }
        match &self.repr {
            OperatorRepr::Dense(m) => {
                let out = m.apply(v.coeffs());
                Ok((SymVector::from_coeffs(self.d, self.n, out)?, 0))
            }
            OperatorRepr::Words { words, scale } => {
                let parts = self.exec.map(words.len(), |i| apply_word_counted(&words[i], v));
                let mut acc = SymVector::zeros(self.d, self.n)?;
                let mut count = 0;
                for part in parts {
                    let (w, c) = part?;
                    if (w.d(), w.n()) != (self.d, self.n) {
                        return Err(Error::invalid("word does not preserve particle number"));
                    }
                    acc.axpy(C64::new(*scale, 0.0), &w);
                    count += c;
                }
                Ok((acc, count))
            }
        }
    }

    /// Materialize; refuses when `sym_dim > threshold`.
    pub fn to_dense(&self, threshold: usize) -> Result<CMatrix> {
        let dim = self.dim();
        if dim > threshold {
            return Err(Error::CapacityExceeded { dim, limit: threshold });
        }
        match &self.repr {
            OperatorRepr::Dense(m) => Ok(m.clone()),
            OperatorRepr::Words { .. } => {
                let basis = SymBasis::shared(self.d, self.n)?;
                let cols = self.exec.map(dim, |c| {
                    SymVector::basis_state(basis.at(c)).and_then(|e| self.apply(&e))
                });
                let mut m = CMatrix::zeros(dim, dim);
                for (c, col) in cols.into_iter().enumerate() {
                    for (r, v) in col?.coeffs().iter().enumerate() {
                        m[(r, c)] = *v;
                    }
                }
                Ok(m)
            }
        }
    }
}

impl LinearOperator for SymOperator {
    fn dim(&self) -> usize {
        SymOperator::dim(self)
    }

    fn apply(&self, x: &[C64]) -> Vec<C64> {
        let v = SymVector::from_coeffs(self.d, self.n, x.to_vec()).expect("dimension checked by caller");
        SymOperator::apply(self, &v).expect("operator application").into_coeffs()
    }
}

/// Normal-ordered quantization `((n−k)!/n!) Σ c_{αβ} (a^*)^α a^β` on
/// `Sym^n`, satisfying `⟨z^{⊗n}|A|z^{⊗n}⟩ = f(z)`.
pub fn q_quantize(f: &HermitianPoly, n: usize) -> Result<SymOperator> {
    if n < f.k {
        return Err(Error::invalid(format!("level n={n} below degree k={}", f.k)));
    }
    sym_dim(f.d, n)?;
    let scale = (ln_factorial(n - f.k) - ln_factorial(n)).exp();
    let words = f
        .terms()
        .filter(|(_, _, c)| c.norm() != 0.0)
        .map(|(a, b, c)| OperatorWord::normal(a.clone(), b.clone(), *c))
        .collect();
    Ok(SymOperator::words(f.d, n, words, scale))
}

/// Toeplitz / P-quantization `sym_dim(d,n) ∫ f(z) |z^{⊗n}⟩⟨z^{⊗n}| dμ`,
/// assembled from exact Fubini–Study moments.
pub fn p_quantize(f: &HermitianPoly, n: usize) -> Result<SymOperator> {
    p_quantize_with(f, n, DEFAULT_DENSE_THRESHOLD)
}

pub fn p_quantize_with(f: &HermitianPoly, n: usize, dense_threshold: usize) -> Result<SymOperator> {
    let basis = SymBasis::shared(f.d, n)?;
    let dim = basis.len();
    if dim > dense_threshold {
        return Err(Error::CapacityExceeded { dim, limit: dense_threshold });
    }
    let d = f.d;
    let ln_dim = (dim as f64).ln();
    let ln_n = ln_factorial(n);
    let mut m = CMatrix::zeros(dim, dim);
    for (row, mu) in basis.indices().iter().enumerate() {
        let ln_m_mu = ln_n - mu.ln_factorial();
        for (alpha, beta, c) in f.terms() {
            // ⟨μ|A|ν⟩ picks ν = μ + β − α and the moment of z^{μ+β} z̄^{ν+α}.
            let Some(nu) = mu.add(beta).checked_sub(alpha) else { continue };
            let gamma = mu.add(beta);
            let col = basis.rank_of(&nu);
            let ln_m_nu = ln_n - nu.ln_factorial();
            let ln_val = ln_dim + 0.5 * (ln_m_mu + ln_m_nu) + fs_moment(&gamma, &gamma, d).ln();
            m[(row, col)] += c * ln_val.exp();
        }
    }
    SymOperator::dense(d, n, m)
}

#[derive(Debug, Clone, Copy)]
pub struct EigConfig {
    pub tol: f64,
    pub seed: u64,
    pub dense_threshold: usize,
}

impl Default for EigConfig {
    fn default() -> Self {
        EigConfig { tol: 1e-9, seed: 0, dense_threshold: DEFAULT_DENSE_THRESHOLD }
    }
}

/// Extremal eigenpair: dense below the threshold, matrix-free Lanczos above.
pub fn extremal_eigpair(a: &SymOperator, which: Extremal, cfg: &EigConfig) -> Result<(f64, SymVector)> {
    let dim = a.dim();
    let pair = match a.repr() {
        OperatorRepr::Dense(m) => dense_extremal(m, which),
        OperatorRepr::Words { .. } if dim <= cfg.dense_threshold => {
            dense_extremal(&a.to_dense(cfg.dense_threshold)?, which)
        }
        OperatorRepr::Words { .. } => {
            let lz = LanczosConfig { tol: cfg.tol, seed: cfg.seed, ..Default::default() };
            lanczos_extremal(a, which, &lz)?
        }
    };
    Ok((pair.value, SymVector::from_coeffs(a.d(), a.n(), pair.vector)?))
}

pub fn top_eigpair(a: &SymOperator, cfg: &EigConfig) -> Result<(f64, SymVector)> {
    extremal_eigpair(a, Extremal::Largest, cfg)
}

pub fn bottom_eigpair(a: &SymOperator, cfg: &EigConfig) -> Result<(f64, SymVector)> {
    extremal_eigpair(a, Extremal::Smallest, cfg)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RoundStrategy {
    /// Best `f` over Husimi samples.
    Sample,
    /// Projected gradient ascent of `f` from Husimi-sampled starts.
    Ascend,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RoundingConfig {
    pub strategy: RoundStrategy,
    pub samples: usize,
    pub burn_in: usize,
    /// Ascent starts (first draws of the chain); ignored by `Sample`.
    pub starts: usize,
    pub iterations: usize,
    /// Fixed ascent step; `None` means `0.1 / max(1, k Σ|c|)`.
    pub step: Option<f64>,
}

impl Default for RoundingConfig {
    fn default() -> Self {
        RoundingConfig {
            strategy: RoundStrategy::Ascend,
            samples: 2000,
            burn_in: 500,
            starts: 8,
            iterations: 500,
            step: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RoundResult {
    pub point: ProjectivePoint,
    pub value: f64,
    /// Husimi-sample mean of `f` (equals `⟨ψ|A^P|ψ⟩` in expectation).
    pub sample_mean: f64,
    pub sample_stderr: f64,
}

/// Round `psi` to a feasible point by Husimi sampling, optionally followed by
/// projected gradient ascent on the sphere.
pub fn round_state(psi: &SymVector, f: &HermitianPoly, cfg: &RoundingConfig, seed: u64) -> Result<RoundResult> {
    if psi.d() != f.d() {
        return Err(Error::DimensionMismatch { expected: f.d(), got: psi.d() });
    }
    if cfg.samples == 0 {
        return Err(Error::invalid("rounding needs at least one sample"));
    }
    let sampler_cfg = SamplerConfig { seed, burn_in: cfg.burn_in, step_size: None, thin: 1 };
    let mut sampler = HusimiSampler::new(HusimiTarget::Pure(psi.clone()), &sampler_cfg)?;
    let points = sampler.draw(cfg.samples)?;
    let values: Vec<f64> = points.iter().map(|z| f.evaluate(z)).collect::<Result<_>>()?;

    let mut best_i = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best_i] {
            best_i = i;
        }
    }
    let mut best = (points[best_i].clone(), values[best_i]);

    if cfg.strategy == RoundStrategy::Ascend {
        let step = cfg.step.unwrap_or(0.1 / (f.k().max(1) as f64 * f.l1_norm()).max(1.0));
        let stride = (points.len() / cfg.starts.max(1)).max(1);
        for start in points.iter().step_by(stride).take(cfg.starts.max(1)) {
            let (z, v) = ascend(f, start, step, cfg.iterations)?;
            if v > best.1 {
                best = (z, v);
            }
        }
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    Ok(RoundResult {
        point: best.0,
        value: best.1,
        sample_mean: mean,
        sample_stderr: batch_means_stderr(&values, 50),
    })
}

/// Fixed-step Riemannian gradient ascent; returns the best iterate.
pub fn ascend(f: &HermitianPoly, start: &ProjectivePoint, step: f64, iterations: usize) -> Result<(ProjectivePoint, f64)> {
    let mut z = start.clone();
    let mut best = (z.clone(), f.evaluate(&z)?);
    for _ in 0..iterations {
        let g = f.grad_conj(&z);
        let radial: C64 = z.vector().iter().zip(&g).map(|(a, b)| a.conj() * b).sum();
        let next: Vec<C64> = z
            .vector()
            .iter()
            .zip(&g)
            .map(|(zi, gi)| zi + (gi - radial * zi) * step)
            .collect();
        z = ProjectivePoint::new(next)?;
        let v = f.evaluate(&z)?;
        if v > best.1 {
            best = (z.clone(), v);
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundReport {
    pub level: usize,
    /// `λ_max` of the P-quantization.
    pub lower: f64,
    /// `λ_max` of the Q-quantization.
    pub upper: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub rounded_point: Option<ProjectivePoint>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub rounded_value: Option<f64>,
}

impl BoundReport {
    pub fn gap(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn is_consistent(&self) -> bool {
        self.lower <= self.upper + 1e-9 && self.rounded_value.is_none_or(|v| v <= self.upper + 1e-9)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SandwichConfig {
    pub eig: EigConfig,
    pub rounding: Option<RoundingConfig>,
}

/// `(λ_max(A^P_n), λ_max(A^Q_n))`, optionally rounding the Q eigenvector.
pub fn sandwich_bounds(f: &HermitianPoly, n: usize, cfg: &SandwichConfig) -> Result<BoundReport> {
    let q = q_quantize(f, n)?;
    let p = p_quantize_with(f, n, cfg.eig.dense_threshold)?;
    let (upper, psi) = top_eigpair(&q, &cfg.eig)?;
    let (lower, _) = top_eigpair(&p, &cfg.eig)?;
    let mut report = BoundReport { level: n, lower, upper, rounded_point: None, rounded_value: None };
    if let Some(rc) = &cfg.rounding {
        let r = round_state(&psi, f, rc, cfg.eig.seed)?;
        report.rounded_point = Some(r.point);
        report.rounded_value = Some(r.value);
    }
    Ok(report)
}

/// Random unit vector helper for callers without their own generator.
pub fn random_state(d: usize, n: usize, seed: u64) -> Result<SymVector> {
    SymVector::random(d, n, &mut ChaCha8Rng::seed_from_u64(seed))
}
