//! Coherent states `|z^{⊗n}⟩` on `CP^{d−1}`, Husimi densities, Fubini–Study
//! moments and coherent-state POVM diagnostics.
//!
//! The volume measure has total mass 1; the POVM weight is the explicit factor
//! `sym_dim(d, n)`, so `sym_dim · ∫ |z^{⊗n}⟩⟨z^{⊗n}| dμ = I` and Husimi
//! densities integrate to 1.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::definetti::SymDensity;
use crate::error::{Error, Result};
use crate::exec::{sub_seed, Exec};
use crate::fock::SymVector;
use crate::spectral::hermitian_eigenvalues;
use crate::symspace::{ln_factorial, multinomial, sym_dim, MultiIndex, SymBasis};
use crate::{CMatrix, C64};

/// Unit representative of a point of `CP^{d−1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectivePoint {
    vector: Vec<C64>,
}

impl ProjectivePoint {
    /// Normalizes `vector`; rejects zero and non-finite input.
    pub fn new(vector: Vec<C64>) -> Result<Self> {
        let nrm = vector.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if vector.is_empty() || nrm == 0.0 || !nrm.is_finite() {
            return Err(Error::invalid("projective point needs a finite nonzero vector"));
        }
        Ok(ProjectivePoint { vector: vector.into_iter().map(|c| c / nrm).collect() })
    }

    pub fn from_real(v: &[f64]) -> Result<Self> {
        Self::new(v.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    /// `e_i` in `C^d`.
    pub fn basis(d: usize, i: usize) -> Self {
        let mut v = vec![C64::new(0.0, 0.0); d];
        v[i] = C64::new(1.0, 0.0);
        ProjectivePoint { vector: v }
    }

    /// Haar-random point (normalized complex Gaussian).
    pub fn random<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Self {
        loop {
            let v: Vec<C64> = (0..d)
                .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                .collect();
            if let Ok(p) = Self::new(v) {
                return p;
            }
        }
    }

    pub fn d(&self) -> usize {
        self.vector.len()
    }

    pub fn vector(&self) -> &[C64] {
        &self.vector
    }

    /// `⟨self, other⟩ = Σ conj(z_i) w_i`.
    pub fn inner(&self, other: &ProjectivePoint) -> C64 {
        self.vector.iter().zip(&other.vector).map(|(a, b)| a.conj() * b).sum()
    }

    /// `|⟨z, w⟩|²`, phase invariant.
    pub fn fidelity(&self, other: &ProjectivePoint) -> f64 {
        self.inner(other).norm_sqr()
    }

    pub fn with_phase(&self, theta: f64) -> ProjectivePoint {
        let ph = C64::from_polar(1.0, theta);
        ProjectivePoint { vector: self.vector.iter().map(|c| c * ph).collect() }
    }

    /// `z^α = ∏ z_i^{α_i}`.
    pub fn monomial(&self, alpha: &MultiIndex) -> C64 {
        self.vector
            .iter()
            .zip(alpha.entries())
            .fold(C64::new(1.0, 0.0), |acc, (z, &a)| acc * z.powu(a as u32))
    }
}

/// `|z^{⊗n}⟩` in the occupation basis: coefficients `√multinomial(n, α) · z^α`.
pub fn coherent_vector(z: &ProjectivePoint, n: usize) -> Result<SymVector> {
    let basis = SymBasis::shared(z.d(), n)?;
    let coeffs = basis
        .indices()
        .iter()
        .map(|alpha| z.monomial(alpha) * multinomial(alpha).sqrt())
        .collect();
    SymVector::from_coeffs(z.d(), n, coeffs)
}

/// `⟨z^{⊗n}, w^{⊗n}⟩ = ⟨z, w⟩^n`.
pub fn overlap(z: &ProjectivePoint, w: &ProjectivePoint, n: usize) -> C64 {
    z.inner(w).powu(n as u32)
}

/// `∫ z^ν z̄^μ dμ_vol = δ_{μν} μ!(d−1)!/(|μ|+d−1)!` for the unit-mass
/// Fubini–Study volume measure.
pub fn fs_moment(mu: &MultiIndex, nu: &MultiIndex, d: usize) -> f64 {
    debug_assert!(mu.dim() == d && nu.dim() == d);
    if mu != nu {
        return 0.0;
    }
    (mu.ln_factorial() + ln_factorial(d - 1) - ln_factorial(mu.weight() + d - 1)).exp()
}

/// `G = sym_dim(d,n) · ∫ |z^{⊗n}⟩⟨z^{⊗n}| dμ_vol`, assembled from exact moments.
pub fn povm_matrix(d: usize, n: usize) -> Result<CMatrix> {
    let basis = SymBasis::shared(d, n)?;
    let dim = basis.len() as f64;
    let idx = basis.indices();
    Ok(CMatrix::from_fn(idx.len(), idx.len(), |r, c| {
        // ⟨μ|z^n⟩⟨z^n|ν⟩ = √(m_μ m_ν) z^μ z̄^ν
        let m = fs_moment(&idx[c], &idx[r], d);
        if m == 0.0 {
            return C64::new(0.0, 0.0);
        }
        C64::new(dim * (multinomial(&idx[r]) * multinomial(&idx[c])).sqrt() * m, 0.0)
    }))
}

/// `‖G − I‖₁` for the coherent-state POVM at level `n`.
pub fn povm_defect(d: usize, n: usize, dense_threshold: usize) -> Result<f64> {
    let dim = sym_dim(d, n)?;
    if dim > dense_threshold {
        return Err(Error::CapacityExceeded { dim, limit: dense_threshold });
    }
    let g = povm_matrix(d, n)? - CMatrix::identity(dim, dim);
    Ok(hermitian_eigenvalues(&g).iter().map(|v| v.abs()).sum())
}

/// `sym_dim(d,n) · ⟨z^{⊗n}|ρ|z^{⊗n}⟩`.
pub fn husimi_density(rho: &SymDensity, z: &ProjectivePoint) -> Result<f64> {
    let (d, n) = rho.single_register()?;
    if z.d() != d {
        return Err(Error::DimensionMismatch { expected: d, got: z.d() });
    }
    let cz = coherent_vector(z, n)?;
    let c = cz.coeffs();
    let m = rho.matrix();
    let mut acc = C64::new(0.0, 0.0);
    for (r, cr) in c.iter().enumerate() {
        let mut row = C64::new(0.0, 0.0);
        for (col, cc) in c.iter().enumerate() {
            row += m[(r, col)] * cc;
        }
        acc += cr.conj() * row;
    }
    Ok(c.len() as f64 * acc.re)
}

/// `sym_dim(d,n) · |⟨z^{⊗n}|ψ⟩|²`.
pub fn husimi_density_pure(psi: &SymVector, z: &ProjectivePoint) -> Result<f64> {
    if z.d() != psi.d() {
        return Err(Error::DimensionMismatch { expected: psi.d(), got: z.d() });
    }
    let cz = coherent_vector(z, psi.n())?;
    Ok(psi.len() as f64 * cz.inner(psi).norm_sqr())
}

/// State whose Husimi density is sampled.
#[derive(Debug, Clone)]
pub enum HusimiTarget {
    Pure(SymVector),
    Mixed(SymDensity),
}

impl HusimiTarget {
    pub fn d(&self) -> usize {
        match self {
            HusimiTarget::Pure(v) => v.d(),
            HusimiTarget::Mixed(r) => r.d(),
        }
    }

    pub fn n(&self) -> Result<usize> {
        match self {
            HusimiTarget::Pure(v) => Ok(v.n()),
            HusimiTarget::Mixed(r) => r.single_register().map(|(_, n)| n),
        }
    }

    pub fn density(&self, z: &ProjectivePoint) -> Result<f64> {
        match self {
            HusimiTarget::Pure(v) => husimi_density_pure(v, z),
            HusimiTarget::Mixed(r) => husimi_density(r, z),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub seed: u64,
    pub burn_in: usize,
    /// Gaussian step on the representative; `None` means `0.3/√n`.
    pub step_size: Option<f64>,
    /// Chain steps between emitted samples.
    pub thin: usize,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig { seed: 0, burn_in: 1000, step_size: None, thin: 1 }
    }
}

/// Metropolis chain on the unit sphere of `C^d` with the Husimi density as
/// its stationary law.
///
/// Proposals perturb the representative by an isotropic complex Gaussian and
/// renormalize. The proposal kernel depends only on `Re⟨z, z'⟩`, so it is
/// symmetric and the acceptance ratio is the density ratio.
pub struct HusimiSampler {
    target: HusimiTarget,
    rng: ChaCha8Rng,
    current: ProjectivePoint,
    current_density: f64,
    step: f64,
    thin: usize,
    proposed: u64,
    accepted: u64,
}

impl HusimiSampler {
    pub fn new(target: HusimiTarget, cfg: &SamplerConfig) -> Result<Self> {
        let n = target.n()?;
        let step = cfg.step_size.unwrap_or(0.3 / (n.max(1) as f64).sqrt());
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::invalid("step size must be positive"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let d = target.d();
        // Start from the densest of a few Haar draws.
        let mut current = ProjectivePoint::random(d, &mut rng);
        let mut current_density = checked_density(&target, &current)?;
        for _ in 0..63 {
            let z = ProjectivePoint::random(d, &mut rng);
            let q = checked_density(&target, &z)?;
            if q > current_density {
                current = z;
                current_density = q;
            }
        }
        let mut sampler = HusimiSampler {
            target,
            rng,
            current,
            current_density,
            step,
            thin: cfg.thin.max(1),
            proposed: 0,
            accepted: 0,
        };
        for _ in 0..cfg.burn_in {
            sampler.step_once()?;
        }
        Ok(sampler)
    }

    fn step_once(&mut self) -> Result<()> {
        let step = self.step;
        let proposal: Vec<C64> = self
            .current
            .vector()
            .iter()
            .map(|c| {
                c + C64::new(self.rng.sample::<f64, _>(StandardNormal), self.rng.sample::<f64, _>(StandardNormal))
                    * step
            })
            .collect();
        let u: f64 = self.rng.random();
        self.proposed += 1;
        let Ok(z) = ProjectivePoint::new(proposal) else {
            return Ok(());
        };
        let q = checked_density(&self.target, &z)?;
        if q >= self.current_density || u * self.current_density < q {
            self.current = z;
            self.current_density = q;
            self.accepted += 1;
        }
        Ok(())
    }

    pub fn next_point(&mut self) -> Result<ProjectivePoint> {
        for _ in 0..self.thin {
            self.step_once()?;
        }
        Ok(self.current.clone())
    }

    pub fn draw(&mut self, count: usize) -> Result<Vec<ProjectivePoint>> {
        (0..count).map(|_| self.next_point()).collect()
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.proposed == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }
}

fn checked_density(target: &HusimiTarget, z: &ProjectivePoint) -> Result<f64> {
    let q = target.density(z)?;
    if !q.is_finite() {
        return Err(Error::NonFiniteDensity);
    }
    Ok(q.max(0.0))
}

/// `count` Husimi samples from a single chain.
pub fn husimi_sample(target: HusimiTarget, cfg: &SamplerConfig, count: usize) -> Result<Vec<ProjectivePoint>> {
    HusimiSampler::new(target, cfg)?.draw(count)
}

/// Independent chains seeded by `sub_seed(cfg.seed, chain)`, concatenated in
/// chain order.
pub fn husimi_sample_chains(
    target: &HusimiTarget,
    cfg: &SamplerConfig,
    chains: usize,
    per_chain: usize,
    exec: Exec,
) -> Result<Vec<ProjectivePoint>> {
    let runs = exec.map(chains, |c| {
        let chain_cfg = SamplerConfig { seed: sub_seed(cfg.seed, c as u64), ..*cfg };
        husimi_sample(target.clone(), &chain_cfg, per_chain)
    });
    let mut out = Vec::with_capacity(chains * per_chain);
    for run in runs {
        out.extend(run?);
    }
    Ok(out)
}

/// Monte Carlo standard error of the mean by non-overlapping batch means.
pub fn batch_means_stderr(values: &[f64], batches: usize) -> f64 {
    let batches = batches.max(2).min(values.len().max(2));
    let size = values.len() / batches;
    if size == 0 {
        return f64::INFINITY;
    }
    let means: Vec<f64> = values
        .chunks_exact(size)
        .take(batches)
        .map(|c| c.iter().sum::<f64>() / size as f64)
        .collect();
    let grand = means.iter().sum::<f64>() / means.len() as f64;
    let var = means.iter().map(|m| (m - grand).powi(2)).sum::<f64>() / (means.len() - 1) as f64;
    (var / means.len() as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::hermitian_eigenvalues;

    fn mi(v: &[usize]) -> MultiIndex {
        MultiIndex::new(v.to_vec())
    }

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn coherent_vector_basis_point() {
        let v = coherent_vector(&ProjectivePoint::basis(2, 0), 3).unwrap();
        assert!((v.coeff(&mi(&[3, 0])) - C64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((v.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn coherent_vector_balanced_point() {
        let s = 0.5f64.sqrt();
        let z = ProjectivePoint::from_real(&[s, s]).unwrap();
        let v = coherent_vector(&z, 2).unwrap();
        let expected = [0.5, 2f64.sqrt() / 2.0, 0.5];
        for (c, e) in v.coeffs().iter().zip(expected) {
            assert!((c - C64::new(e, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn coherent_vectors_are_unit() {
        let mut r = rng(1);
        for _ in 0..50 {
            let z = ProjectivePoint::random(3, &mut r);
            assert!((coherent_vector(&z, 5).unwrap().norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn overlap_examples() {
        let e1 = ProjectivePoint::basis(2, 0);
        let e2 = ProjectivePoint::basis(2, 1);
        assert_eq!(overlap(&e1, &e2, 3).norm(), 0.0);
        assert!((overlap(&e1, &e1, 4) - C64::new(1.0, 0.0)).norm() < 1e-15);
        let s = 0.5f64.sqrt();
        let w = ProjectivePoint::from_real(&[s, s]).unwrap();
        assert!((overlap(&e1, &w, 2) - C64::new(0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn overlap_matches_vector_inner_product_and_tensorizes() {
        let mut r = rng(2);
        for _ in 0..20 {
            let z = ProjectivePoint::random(3, &mut r);
            let w = ProjectivePoint::random(3, &mut r);
            for n in 0..6 {
                let via_vectors = coherent_vector(&z, n).unwrap().inner(&coherent_vector(&w, n).unwrap());
                assert!((via_vectors - overlap(&z, &w, n)).norm() < 1e-12);
            }
            let lhs = overlap(&z, &w, 5);
            let rhs = overlap(&z, &w, 2) * overlap(&z, &w, 3);
            assert!((lhs - rhs).norm() < 1e-12);
        }
    }

    #[test]
    fn fs_moment_examples() {
        assert!((fs_moment(&mi(&[1, 0]), &mi(&[1, 0]), 2) - 0.5).abs() < 1e-15);
        assert_eq!(fs_moment(&mi(&[2, 0]), &mi(&[1, 1]), 2), 0.0);
        assert!((fs_moment(&mi(&[1, 1]), &mi(&[1, 1]), 2) - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn fs_moments_match_monte_carlo_haar() {
        let mut r = rng(4);
        let samples = 200_000;
        let mut acc = 0.0;
        for _ in 0..samples {
            let z = ProjectivePoint::random(3, &mut r);
            acc += z.vector()[0].norm_sqr().powi(2) * z.vector()[1].norm_sqr();
        }
        let est = acc / samples as f64;
        let exact = fs_moment(&mi(&[2, 1, 0]), &mi(&[2, 1, 0]), 3);
        assert!((est - exact).abs() < 5e-4, "{est} vs {exact}");
    }

    #[test]
    fn povm_is_exact() {
        assert!(povm_defect(2, 3, 4096).unwrap() < 1e-12);
        assert!(povm_defect(3, 2, 4096).unwrap() < 1e-12);
        let g = povm_matrix(3, 4).unwrap();
        for i in 0..g.nrows() {
            assert!((g[(i, i)].re - 1.0).abs() < 1e-12);
        }
        assert!(matches!(povm_defect(3, 10, 10), Err(Error::CapacityExceeded { .. })));
    }

    #[test]
    fn husimi_density_examples() {
        let (d, n) = (2, 2);
        let mixed = SymDensity::maximally_mixed(d, n).unwrap();
        let mut r = rng(5);
        for _ in 0..10 {
            let z = ProjectivePoint::random(d, &mut r);
            assert!((husimi_density(&mixed, &z).unwrap() - 1.0).abs() < 1e-12);
        }
        let e1 = ProjectivePoint::basis(2, 0);
        let pure = SymDensity::pure(&coherent_vector(&e1, 2).unwrap());
        let s = 0.5f64.sqrt();
        let z = ProjectivePoint::from_real(&[s, s]).unwrap();
        assert!((husimi_density(&pure, &z).unwrap() - 0.75).abs() < 1e-14);

        let w = ProjectivePoint::random(3, &mut r);
        let rho = SymDensity::pure(&coherent_vector(&w, 4).unwrap());
        let z = ProjectivePoint::random(3, &mut r);
        let expected = 15.0 * z.fidelity(&w).powi(4);
        assert!((husimi_density(&rho, &z).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn husimi_density_is_phase_invariant() {
        let mut r = rng(6);
        let rho = SymDensity::random_mixed(&[(3, 3)], &mut r).unwrap();
        let z = ProjectivePoint::random(3, &mut r);
        let base = husimi_density(&rho, &z).unwrap();
        for theta in [0.1, 1.0, 2.5] {
            let rotated = husimi_density(&rho, &z.with_phase(theta)).unwrap();
            assert!((rotated - base).abs() <= 1e-13 * base.max(1.0));
        }
    }

    #[test]
    fn coherent_projector_is_rank_one() {
        let mut r = rng(7);
        let z = ProjectivePoint::random(3, &mut r);
        let rho = SymDensity::pure(&coherent_vector(&z, 3).unwrap());
        let ev = hermitian_eigenvalues(rho.matrix());
        let top = ev[ev.len() - 1];
        let second = ev[ev.len() - 2];
        assert!((top - 1.0).abs() < 1e-12);
        assert!(second.abs() <= 1e-10);
        assert!((rho.trace() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coherent_states_span_the_symmetric_subspace() {
        let mut r = rng(8);
        let (d, n) = (3, 3);
        let dim = sym_dim(d, n).unwrap();
        let vecs: Vec<SymVector> = (0..dim + 5)
            .map(|_| coherent_vector(&ProjectivePoint::random(d, &mut r), n).unwrap())
            .collect();
        let gram = CMatrix::from_fn(vecs.len(), vecs.len(), |a, b| vecs[a].inner(&vecs[b]));
        let ev = hermitian_eigenvalues(&gram);
        let top = ev[ev.len() - 1];
        let rank = ev.iter().filter(|&&v| v > 1e-10 * top).count();
        assert_eq!(rank, dim);
    }

    #[test]
    fn sampler_uniform_moments() {
        let (d, n) = (3, 2);
        let target = HusimiTarget::Mixed(SymDensity::maximally_mixed(d, n).unwrap());
        let cfg = SamplerConfig { seed: 10, burn_in: 500, step_size: Some(0.5), thin: 2 };
        let pts = husimi_sample(target, &cfg, 40_000).unwrap();
        let vals: Vec<f64> = pts.iter().map(|z| z.vector()[0].norm_sqr()).collect();
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let se = batch_means_stderr(&vals, 50);
        assert!((mean - 1.0 / d as f64).abs() <= 3.0 * se, "mean {mean}, se {se}");
    }

    #[test]
    fn sampler_concentrates_on_coherent_state() {
        let (d, n) = (2, 30);
        let mut r = rng(11);
        let w = ProjectivePoint::random(d, &mut r);
        let target = HusimiTarget::Pure(coherent_vector(&w, n).unwrap());
        let cfg = SamplerConfig { seed: 12, ..Default::default() };
        let pts = husimi_sample(target, &cfg, 20_000).unwrap();
        let vals: Vec<f64> = pts.iter().map(|z| z.fidelity(&w)).collect();
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let se = batch_means_stderr(&vals, 50);
        // E|⟨z,w⟩|² under the Husimi law = (n+1)/(n+d) ≥ n/(n+d).
        assert!(mean >= n as f64 / (n + d) as f64 - 3.0 * se);
        assert!((mean - (n + 1) as f64 / (n + d) as f64).abs() <= 4.0 * se);
    }

    #[test]
    fn sampler_is_deterministic() {
        let mut r = rng(13);
        let psi = SymVector::random(2, 3, &mut r).unwrap();
        let cfg = SamplerConfig { seed: 99, burn_in: 10, ..Default::default() };
        let a = husimi_sample(HusimiTarget::Pure(psi.clone()), &cfg, 100).unwrap();
        let b = husimi_sample(HusimiTarget::Pure(psi.clone()), &cfg, 100).unwrap();
        assert_eq!(a, b);
        let seq = husimi_sample_chains(&HusimiTarget::Pure(psi.clone()), &cfg, 4, 50, Exec::Sequential).unwrap();
        let par = husimi_sample_chains(&HusimiTarget::Pure(psi), &cfg, 4, 50, Exec::Parallel).unwrap();
        assert_eq!(seq, par);
    }

    #[test]
    fn sampler_rejects_corrupt_density() {
        let mut rho = SymDensity::maximally_mixed(2, 2).unwrap();
        rho.matrix_mut()[(0, 0)] = C64::new(f64::NAN, 0.0);
        let r = HusimiSampler::new(HusimiTarget::Mixed(rho), &SamplerConfig::default());
        assert!(matches!(r, Err(Error::NonFiniteDensity)));
    }
}
