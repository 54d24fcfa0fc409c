//! Exact de Finetti verification on the symmetric subspace.
//!
//! Everything is computed in occupation bases through the splitting identity
//!
//! ```text
//! |γ⟩_{n+k} = Σ_{ν ≤ γ, |ν| = k} √(∏_i C(γ_i, ν_i) / C(n+k, k)) |γ−ν⟩_n ⊗ |ν⟩_k
//! ```
//!
//! which gives the partial trace `Tr_{n−k} ρ`, the coherent-state mixture
//! `σ = sym_dim(d,n) ∫ |z^{⊗k}⟩⟨z^{⊗k}| ⟨z^{⊗n}|ρ|z^{⊗n}⟩ dμ` and the
//! `r`-almost product states without ever touching `(C^d)^{⊗n}`.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::coherent::ProjectivePoint;
use crate::error::{Error, Result};
use crate::exec::{sub_seed, Exec};
use crate::fock::SymVector;
use crate::spectral::{hermitian_eigenvalues, hermitian_eigh};
use crate::symspace::{
    definetti_bound, exp_hilbert_dim, ln_factorial, multinomial, sym_dim, BoundParams, BoundVariant,
    MultiIndex, SymBasis,
};
use crate::{CMatrix, C64};

/// Density operator on `⊗_j Sym^{n_j}(C^{d_j})`, first register most significant.
#[derive(Debug, Clone, PartialEq)]
pub struct SymDensity {
    registers: Vec<(usize, usize)>,
    matrix: CMatrix,
}

impl SymDensity {
    pub fn new(registers: Vec<(usize, usize)>, matrix: CMatrix) -> Result<Self> {
        let dim = product_dim(&registers)?;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: matrix.nrows() });
        }
        Ok(SymDensity { registers, matrix })
    }

    pub fn pure(psi: &SymVector) -> Self {
        let v = DVector::from_column_slice(psi.coeffs());
        SymDensity { registers: vec![(psi.d(), psi.n())], matrix: &v * v.adjoint() }
    }

    pub fn maximally_mixed(d: usize, n: usize) -> Result<Self> {
        let dim = sym_dim(d, n)?;
        Ok(SymDensity {
            registers: vec![(d, n)],
            matrix: CMatrix::identity(dim, dim).scale(1.0 / dim as f64),
        })
    }

    /// Haar-random pure state on a single register.
    pub fn random_pure<R: Rng + ?Sized>(d: usize, n: usize, rng: &mut R) -> Result<Self> {
        Ok(Self::pure(&SymVector::random(d, n, rng)?))
    }

    /// Normalized Wishart state `G G† / Tr(G G†)` with complex Gaussian `G`.
    pub fn random_mixed<R: Rng + ?Sized>(registers: &[(usize, usize)], rng: &mut R) -> Result<Self> {
        let dim = product_dim(registers)?;
        let g = CMatrix::from_fn(dim, dim, |_, _| {
            C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        let w = &g * g.adjoint();
        let tr = w.trace().re;
        Ok(SymDensity { registers: registers.to_vec(), matrix: w.scale(1.0 / tr) })
    }

    pub fn registers(&self) -> &[(usize, usize)] {
        &self.registers
    }

    /// Local dimension of the first register.
    pub fn d(&self) -> usize {
        self.registers[0].0
    }

    pub fn single_register(&self) -> Result<(usize, usize)> {
        match self.registers.as_slice() {
            [reg] => Ok(*reg),
            regs => Err(Error::invalid(format!("expected one register, got {}", regs.len()))),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn matrix_mut(&mut self) -> &mut CMatrix {
        &mut self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// Hermitian, trace one and PSD, each to `tol`.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let herm = (&self.matrix - self.matrix.adjoint()).norm();
        if herm > tol {
            return Err(Error::invalid(format!("density not Hermitian (defect {herm:e})")));
        }
        let tr = self.matrix.trace();
        if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
            return Err(Error::invalid(format!("density trace {tr} != 1")));
        }
        let min = hermitian_eigenvalues(&self.matrix)[0];
        if min < -tol {
            return Err(Error::invalid(format!("density has negative eigenvalue {min:e}")));
        }
        Ok(())
    }
}

fn product_dim(registers: &[(usize, usize)]) -> Result<usize> {
    if registers.is_empty() {
        return Err(Error::invalid("density needs at least one register"));
    }
    registers.iter().try_fold(1usize, |acc, &(d, n)| {
        let dim = sym_dim(d, n)?;
        acc.checked_mul(dim).ok_or_else(|| Error::Overflow("register product dimension".into()))
    })
}

fn ln_binomial(a: usize, b: usize) -> f64 {
    ln_factorial(a) - ln_factorial(b) - ln_factorial(a - b)
}

/// `√(∏ C(γ_i, ν_i) / C(|γ|, |ν|))` for `ν ≤ γ`.
pub fn split_coeff(gamma: &MultiIndex, nu: &MultiIndex) -> f64 {
    debug_assert!(nu.dominated_by(gamma));
    let num: f64 = gamma
        .entries()
        .iter()
        .zip(nu.entries())
        .map(|(&g, &v)| ln_binomial(g, v))
        .sum();
    (0.5 * (num - ln_binomial(gamma.weight(), nu.weight()))).exp()
}

/// Linear map between operator spaces, `out[(a, b)] += c · in[(x, y)]`.
#[derive(Debug, Clone)]
pub struct Superop {
    pub dim_in: usize,
    pub dim_out: usize,
    pub entries: Vec<SuperopEntry>,
}

#[derive(Debug, Clone, Copy)]
pub struct SuperopEntry {
    pub out_row: usize,
    pub out_col: usize,
    pub in_row: usize,
    pub in_col: usize,
    pub coef: f64,
}

impl Superop {
    pub fn apply(&self, m: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim_out, self.dim_out);
        for e in &self.entries {
            out[(e.out_row, e.out_col)] += m[(e.in_row, e.in_col)] * e.coef;
        }
        out
    }

    /// Apply to register `reg` of a product-basis operator with per-register
    /// input dimensions `dims`.
    pub fn apply_on_register(&self, m: &CMatrix, dims: &[usize], reg: usize) -> CMatrix {
        debug_assert_eq!(dims[reg], self.dim_in);
        let pre: usize = dims[..reg].iter().product();
        let post: usize = dims[reg + 1..].iter().product();
        let din = self.dim_in;
        let dout = self.dim_out;
        let total_out = pre * dout * post;
        let mut out = CMatrix::zeros(total_out, total_out);
        let idx_in = |p: usize, x: usize, q: usize| (p * din + x) * post + q;
        let idx_out = |p: usize, a: usize, q: usize| (p * dout + a) * post + q;
        for pr in 0..pre {
            for qr in 0..post {
                for pc in 0..pre {
                    for qc in 0..post {
                        for e in &self.entries {
                            out[(idx_out(pr, e.out_row, qr), idx_out(pc, e.out_col, qc))] +=
                                m[(idx_in(pr, e.in_row, qr), idx_in(pc, e.in_col, qc))] * e.coef;
                        }
                    }
                }
            }
        }
        out
    }
}

fn check_k(n: usize, k: usize) -> Result<()> {
    if k > n {
        return Err(Error::invalid(format!("k={k} exceeds n={n}")));
    }
    Ok(())
}

/// Superoperator of `Tr_{n−k}: Sym^n → Sym^k`.
pub fn reduce_superop(d: usize, n: usize, k: usize) -> Result<Superop> {
    check_k(n, k)?;
    let small = SymBasis::shared(d, k)?;
    let rest = SymBasis::shared(d, n - k)?;
    let big = SymBasis::shared(d, n)?;
    let mut entries = Vec::new();
    for (a, nu) in small.indices().iter().enumerate() {
        for (b, nu2) in small.indices().iter().enumerate() {
            for omega in rest.indices() {
                let x = nu.add(omega);
                let y = nu2.add(omega);
                entries.push(SuperopEntry {
                    out_row: a,
                    out_col: b,
                    in_row: big.rank_of(&x),
                    in_col: big.rank_of(&y),
                    coef: split_coeff(&x, nu) * split_coeff(&y, nu2),
                });
            }
        }
    }
    Ok(Superop { dim_in: big.len(), dim_out: small.len(), entries })
}

/// Superoperator of `ρ ↦ (D_n/D_{n+k}) Tr_n[(ρ ⊗ I_k) P_sym^{(n+k)}]`, the
/// coherent-state mixture built from the Husimi weights of `ρ`.
pub fn mixture_superop(d: usize, n: usize, k: usize) -> Result<Superop> {
    let small = SymBasis::shared(d, k)?;
    let big = SymBasis::shared(d, n)?;
    let joint = SymBasis::shared(d, n + k)?;
    let scale = big.len() as f64 / joint.len() as f64;
    let mut entries = Vec::new();
    for gamma in joint.indices() {
        let subs: Vec<(usize, &MultiIndex)> = small
            .indices()
            .iter()
            .enumerate()
            .filter(|(_, nu)| nu.dominated_by(gamma))
            .collect();
        for &(a, nu) in &subs {
            for &(b, nu2) in &subs {
                let x = gamma.checked_sub(nu2).expect("dominated");
                let y = gamma.checked_sub(nu).expect("dominated");
                entries.push(SuperopEntry {
                    out_row: a,
                    out_col: b,
                    in_row: big.rank_of(&x),
                    in_col: big.rank_of(&y),
                    coef: scale * split_coeff(gamma, nu) * split_coeff(gamma, nu2),
                });
            }
        }
    }
    Ok(Superop { dim_in: big.len(), dim_out: small.len(), entries })
}

fn apply_per_register<F>(rho: &SymDensity, k: usize, dense_threshold: usize, build: F) -> Result<SymDensity>
where
    F: Fn(usize, usize, usize) -> Result<Superop>,
{
    if rho.dim() > dense_threshold {
        return Err(Error::CapacityExceeded { dim: rho.dim(), limit: dense_threshold });
    }
    let mut dims: Vec<usize> = rho.registers.iter().map(|&(d, n)| sym_dim(d, n)).collect::<Result<_>>()?;
    let mut m = rho.matrix.clone();
    let mut registers = rho.registers.clone();
    for reg in 0..registers.len() {
        let (d, n) = registers[reg];
        check_k(n, k)?;
        let op = build(d, n, k)?;
        m = if dims.len() == 1 { op.apply(&m) } else { op.apply_on_register(&m, &dims, reg) };
        dims[reg] = op.dim_out;
        registers[reg] = (d, k);
    }
    Ok(SymDensity { registers, matrix: m })
}

/// `Tr_{n−k}` on every register.
pub fn reduce_state(rho: &SymDensity, k: usize) -> Result<SymDensity> {
    apply_per_register(rho, k, crate::DEFAULT_DENSE_THRESHOLD, reduce_superop)
}

/// Coherent-state mixture on every register, i.e. over the product phase
/// space `(CP^{d−1})^m` for `m` registers.
pub fn construct_mixture(rho: &SymDensity, k: usize) -> Result<SymDensity> {
    for &(d, n) in &rho.registers {
        let joint = sym_dim(d, n + k)?;
        if joint > crate::DEFAULT_DENSE_THRESHOLD {
            return Err(Error::CapacityExceeded { dim: joint, limit: crate::DEFAULT_DENSE_THRESHOLD });
        }
    }
    apply_per_register(rho, k, crate::DEFAULT_DENSE_THRESHOLD, mixture_superop)
}

/// Half the Schatten-1 norm of `m`.
pub fn half_trace_norm(m: &CMatrix) -> f64 {
    0.5 * hermitian_eigenvalues(m).iter().map(|v| v.abs()).sum::<f64>()
}

pub fn trace_distance(a: &SymDensity, b: &SymDensity) -> Result<f64> {
    if a.registers != b.registers {
        return Err(Error::invalid(format!(
            "shape mismatch: {:?} vs {:?}",
            a.registers, b.registers
        )));
    }
    Ok(half_trace_norm(&(&a.matrix - &b.matrix)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixtureReport {
    pub distance: f64,
    pub bound: f64,
    pub variant: BoundVariant,
    pub pass: bool,
}

pub const PASS_SLACK: f64 = 1e-9;

/// Distance between the `k`-body marginal and the coherent-state mixture,
/// against the closed-form bound of `variant`.
pub fn verify_definetti(rho: &SymDensity, k: usize, variant: BoundVariant) -> Result<MixtureReport> {
    let (d, n) = rho.registers[0];
    if rho.registers.iter().any(|&r| r != (d, n)) {
        return Err(Error::invalid("all registers must share (d, n)"));
    }
    let m = rho.registers.len();
    match variant {
        BoundVariant::Standard | BoundVariant::ExactRatio if m == 1 => {}
        BoundVariant::MultiSym => {}
        other => {
            return Err(Error::invalid(format!(
                "variant {other:?} not applicable to {m} register(s)"
            )))
        }
    }
    let reduced = reduce_state(rho, k)?;
    let mixture = construct_mixture(rho, k)?;
    let distance = trace_distance(&reduced, &mixture)?;
    let params = BoundParams { d, n, k, m, ..Default::default() };
    let bound = definetti_bound(&params, variant)?;
    Ok(MixtureReport { distance, bound, variant, pass: distance <= bound + PASS_SLACK })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrialState {
    /// Wishart-distributed mixed state.
    Mixed,
    /// Haar-random pure state.
    Pure,
}

#[derive(Debug, Clone, Copy)]
pub struct TrialConfig {
    pub d: usize,
    pub n: usize,
    pub k: usize,
    /// Number of registers (`> 1` only for the multi-symmetric variant).
    pub m: usize,
    pub trials: usize,
    pub variant: BoundVariant,
    pub state: TrialState,
    pub seed: u64,
}

/// Randomized verification; trial `i` uses seed `sub_seed(seed, i)`.
pub fn run_trials(cfg: &TrialConfig, exec: Exec) -> Result<Vec<MixtureReport>> {
    let registers = vec![(cfg.d, cfg.n); cfg.m.max(1)];
    exec.map(cfg.trials, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(cfg.seed, i as u64));
        let rho = match cfg.state {
            TrialState::Mixed => SymDensity::random_mixed(&registers, &mut rng)?,
            TrialState::Pure if registers.len() == 1 => SymDensity::random_pure(cfg.d, cfg.n, &mut rng)?,
            TrialState::Pure => {
                let dim = product_dim(&registers)?;
                let v = DVector::from_fn(dim, |_, _| {
                    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
                })
                .normalize();
                SymDensity::new(registers.clone(), &v * v.adjoint())?
            }
        };
        verify_definetti(&rho, cfg.k, cfg.variant)
    })
    .into_iter()
    .collect()
}

/// Normalized `P_sym(ψ ⊗ z^{⊗(n−r)})` for `ψ ∈ Sym^r`.
pub fn r_almost_product_state(psi: &SymVector, z: &ProjectivePoint, n: usize) -> Result<SymVector> {
    let mut v = almost_product_unnormalized(psi, z, n)?;
    if v.norm() <= 1e-300 {
        return Err(Error::ZeroProjection);
    }
    v.normalize()?;
    Ok(v)
}

fn almost_product_unnormalized(psi: &SymVector, z: &ProjectivePoint, n: usize) -> Result<SymVector> {
    let (d, r) = (psi.d(), psi.n());
    if z.d() != d {
        return Err(Error::DimensionMismatch { expected: d, got: z.d() });
    }
    if r > n {
        return Err(Error::invalid(format!("r={r} exceeds n={n}")));
    }
    let small = SymBasis::shared(d, r)?;
    let big = SymBasis::shared(d, n)?;
    let coeffs = big
        .indices()
        .iter()
        .map(|gamma| {
            small
                .indices()
                .iter()
                .zip(psi.coeffs())
                .filter(|(nu, c)| **c != C64::new(0.0, 0.0) && nu.dominated_by(gamma))
                .map(|(nu, c)| {
                    let omega = gamma.checked_sub(nu).expect("dominated");
                    c * split_coeff(gamma, nu) * z.monomial(&omega) * multinomial(&omega).sqrt()
                })
                .sum()
        })
        .collect();
    SymVector::from_coeffs(d, n, coeffs)
}

/// Span of the `r`-almost product coherent states `v ⊗ z^{⊗(n−k)}`, with
/// `v = P_sym(ψ ⊗ z^{⊗(k−r)}) ∈ Sym^k`, inside `Sym^k ⊗ Sym^{n−k}`.
///
/// For `r ≤ k ≤ n − r` the span has dimension `exp_hilbert_dim(d, n, r)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AlmostProductSpace {
    pub d: usize,
    pub n: usize,
    pub k: usize,
    pub r: usize,
}

impl AlmostProductSpace {
    pub fn new(d: usize, n: usize, k: usize, r: usize) -> Result<Self> {
        if d == 0 || r > k || k + r > n {
            return Err(Error::invalid(format!("need r <= k <= n - r, got n={n} k={k} r={r}")));
        }
        Ok(AlmostProductSpace { d, n, k, r })
    }

    /// Default embedding `k = ⌊n/2⌋`.
    pub fn balanced(d: usize, n: usize, r: usize) -> Result<Self> {
        Self::new(d, n, n / 2, r)
    }

    pub fn ambient_dim(&self) -> Result<usize> {
        Ok(sym_dim(self.d, self.k)? * sym_dim(self.d, self.n - self.k)?)
    }

    /// `dim V_z = dim Sym^r(C^d)`.
    pub fn fiber_dim(&self) -> Result<usize> {
        sym_dim(self.d, self.r)
    }

    /// Columns span `V_z`; one column per occupation state of `Sym^r`.
    pub fn fiber_basis(&self, z: &ProjectivePoint) -> Result<CMatrix> {
        let small = SymBasis::shared(self.d, self.r)?;
        let tail = crate::coherent::coherent_vector(z, self.n - self.k)?;
        let tail_len = tail.len();
        let ambient = self.ambient_dim()?;
        let mut out = CMatrix::zeros(ambient, small.len());
        for (col, nu) in small.indices().iter().enumerate() {
            let head = almost_product_unnormalized(&SymVector::basis_state(nu)?, z, self.k)?;
            for (a, ha) in head.coeffs().iter().enumerate() {
                for (b, tb) in tail.coeffs().iter().enumerate() {
                    out[(a * tail_len + b, col)] = ha * tb;
                }
            }
        }
        Ok(out)
    }

    pub fn fiber_projector(&self, z: &ProjectivePoint) -> Result<CMatrix> {
        let q = self.fiber_basis(z)?.qr().q();
        Ok(&q * q.adjoint())
    }

    /// Monte Carlo estimate of `∫ P_{V_z} dμ_FS(z)` over Haar-random `z`.
    pub fn average_fiber_projector(&self, samples: usize, seed: u64, exec: Exec) -> Result<CMatrix> {
        const CHUNKS: usize = 64;
        let ambient = self.ambient_dim()?;
        let partials = exec.map(CHUNKS, |c| -> Result<CMatrix> {
            let count = samples / CHUNKS + usize::from(c < samples % CHUNKS);
            let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, c as u64));
            let mut acc = CMatrix::zeros(ambient, ambient);
            for _ in 0..count {
                let z = ProjectivePoint::random(self.d, &mut rng);
                acc += self.fiber_projector(&z)?;
            }
            Ok(acc)
        });
        let mut total = CMatrix::zeros(ambient, ambient);
        for p in partials {
            total += p?;
        }
        Ok(total.scale(1.0 / samples.max(1) as f64))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlmostProductReport {
    /// `‖(dim H / dim V) · avg P_{V_z} − P_H‖₁`.
    pub defect: f64,
    /// Numerical rank of the sampled span.
    pub span_rank: usize,
    /// `exp_hilbert_dim(d, n, r)`.
    pub expected_dim: u128,
}

pub fn almost_product_diagnostics(
    space: &AlmostProductSpace,
    samples: usize,
    seed: u64,
    exec: Exec,
) -> Result<AlmostProductReport> {
    if samples == 0 {
        return Err(Error::invalid("need at least one sample"));
    }
    let avg = space.average_fiber_projector(samples, seed, exec)?;
    let expected_dim = exp_hilbert_dim(space.d, space.n, space.r)?;
    let (values, vectors) = hermitian_eigh(&avg);
    let top = values.last().copied().unwrap_or(0.0);
    let support: Vec<usize> = (0..values.len()).filter(|&i| values[i] > 1e-9 * top).collect();
    let scale = expected_dim as f64 / space.fiber_dim()? as f64;
    let mut diff = avg.scale(scale);
    for &i in &support {
        let v = vectors.column(i);
        diff -= v * v.adjoint();
    }
    let defect = hermitian_eigenvalues(&diff).iter().map(|v| v.abs()).sum();
    Ok(AlmostProductReport { defect, span_rank: support.len(), expected_dim })
}

/// POVM defect of the `r`-almost product states at the balanced embedding
/// `k = ⌊n/2⌋`.
pub fn almost_product_povm_defect(d: usize, n: usize, r: usize, samples: usize, seed: u64) -> Result<f64> {
    let space = AlmostProductSpace::balanced(d, n, r)?;
    Ok(almost_product_diagnostics(&space, samples, seed, Exec::default())?.defect)
}
