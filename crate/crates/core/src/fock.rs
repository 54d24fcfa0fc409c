//! Matrix-free creation/annihilation operators on the occupation basis of
//! `Sym^n(C^d)`.
//!
//! Conventions: `a_i |α⟩ = √α_i |α − e_i⟩`, `a_i^* |α⟩ = √(α_i + 1) |α + e_i⟩`.
//! Mode indices are zero-based.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symspace::{rank, sym_dim, MultiIndex, SymBasis};
use crate::C64;

/// State in `Sym^n(C^d)`, coefficients in [`SymBasis`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct SymVector {
    d: usize,
    n: usize,
    coeffs: Vec<C64>,
}

impl SymVector {
    pub fn zeros(d: usize, n: usize) -> Result<Self> {
        Ok(SymVector { d, n, coeffs: vec![C64::new(0.0, 0.0); sym_dim(d, n)?] })
    }

    pub fn from_coeffs(d: usize, n: usize, coeffs: Vec<C64>) -> Result<Self> {
        let dim = sym_dim(d, n)?;
        if coeffs.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: coeffs.len() });
        }
        Ok(SymVector { d, n, coeffs })
    }

    /// Occupation-number state `|α⟩`.
    pub fn basis_state(alpha: &MultiIndex) -> Result<Self> {
        let mut v = SymVector::zeros(alpha.dim(), alpha.weight())?;
        v.coeffs[rank(alpha)] = C64::new(1.0, 0.0);
        Ok(v)
    }

    /// Haar-random unit vector (normalized complex Gaussian).
    pub fn random<R: Rng + ?Sized>(d: usize, n: usize, rng: &mut R) -> Result<Self> {
        let dim = sym_dim(d, n)?;
        let coeffs = (0..dim)
            .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let mut v = SymVector { d, n, coeffs };
        v.normalize()?;
        Ok(v)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [C64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<C64> {
        self.coeffs
    }

    pub fn coeff(&self, alpha: &MultiIndex) -> C64 {
        self.coeffs[rank(alpha)]
    }

    /// `⟨self, other⟩`, antilinear in `self`.
    pub fn inner(&self, other: &SymVector) -> C64 {
        debug_assert_eq!((self.d, self.n), (other.d, other.n));
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let nrm = self.norm();
        if nrm == 0.0 || !nrm.is_finite() {
            return Err(Error::invalid("cannot normalize a zero or non-finite vector"));
        }
        self.scale(C64::new(1.0 / nrm, 0.0));
        Ok(())
    }

    pub fn scale(&mut self, s: C64) {
        self.coeffs.iter_mut().for_each(|c| *c *= s);
    }

    /// `self += s · other`.
    pub fn axpy(&mut self, s: C64, other: &SymVector) {
        debug_assert_eq!((self.d, self.n), (other.d, other.n));
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += s * b;
        }
    }

    pub fn sub(&self, other: &SymVector) -> SymVector {
        let mut out = self.clone();
        out.axpy(C64::new(-1.0, 0.0), other);
        out
    }

    pub fn distance(&self, other: &SymVector) -> f64 {
        self.sub(other).norm()
    }
}

fn check_mode(i: usize, d: usize) -> Result<()> {
    if i >= d {
        return Err(Error::invalid(format!("mode {i} out of range for d={d}")));
    }
    Ok(())
}

/// `a_i v`, mapping `Sym^n → Sym^{n−1}`.
pub fn apply_annihilation(i: usize, v: &SymVector) -> Result<SymVector> {
    check_mode(i, v.d)?;
    if v.n == 0 {
        return Err(Error::InsufficientParticles { needed: 1, available: 0 });
    }
    let basis = SymBasis::shared(v.d, v.n)?;
    let mut out = SymVector::zeros(v.d, v.n - 1)?;
    for (alpha, &c) in basis.indices().iter().zip(&v.coeffs) {
        let occ = alpha.get(i);
        if occ == 0 || c == C64::new(0.0, 0.0) {
            continue;
        }
        let target = alpha.with_delta(i, -1).expect("occupied mode");
        out.coeffs[rank(&target)] += c * (occ as f64).sqrt();
    }
    Ok(out)
}

/// `a_i^* v`, mapping `Sym^n → Sym^{n+1}`.
pub fn apply_creation(i: usize, v: &SymVector) -> Result<SymVector> {
    check_mode(i, v.d)?;
    let basis = SymBasis::shared(v.d, v.n)?;
    let mut out = SymVector::zeros(v.d, v.n + 1)?;
    for (alpha, &c) in basis.indices().iter().zip(&v.coeffs) {
        if c == C64::new(0.0, 0.0) {
            continue;
        }
        let occ = alpha.get(i);
        let target = alpha.with_delta(i, 1).expect("creation never underflows");
        out.coeffs[rank(&target)] += c * ((occ + 1) as f64).sqrt();
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Ordering {
    /// Creations left of annihilations: `(a^*)^α a^β`.
    Normal,
    /// Annihilations left of creations: `a^β (a^*)^α`.
    AntiNormal,
}

/// `coefficient · (a^*)^α a^β` (or its anti-normal reordering).
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorWord {
    pub alpha: MultiIndex,
    pub beta: MultiIndex,
    pub ordering: Ordering,
    pub coefficient: C64,
}

impl OperatorWord {
    pub fn normal(alpha: MultiIndex, beta: MultiIndex, coefficient: C64) -> Self {
        OperatorWord { alpha, beta, ordering: Ordering::Normal, coefficient }
    }

    pub fn anti_normal(alpha: MultiIndex, beta: MultiIndex, coefficient: C64) -> Self {
        OperatorWord { alpha, beta, ordering: Ordering::AntiNormal, coefficient }
    }

    /// Number of single-mode ladder applications per vector application.
    pub fn ladder_count(&self) -> usize {
        self.alpha.weight() + self.beta.weight()
    }
}

fn annihilate_all(beta: &MultiIndex, mut v: SymVector, count: &mut usize) -> Result<SymVector> {
    for (i, &times) in beta.entries().iter().enumerate() {
        for _ in 0..times {
            v = apply_annihilation(i, &v)?;
            *count += 1;
        }
    }
    Ok(v)
}

fn create_all(alpha: &MultiIndex, mut v: SymVector, count: &mut usize) -> Result<SymVector> {
    for (i, &times) in alpha.entries().iter().enumerate() {
        for _ in 0..times {
            v = apply_creation(i, &v)?;
            *count += 1;
        }
    }
    Ok(v)
}

pub fn apply_word(w: &OperatorWord, v: &SymVector) -> Result<SymVector> {
    apply_word_counted(w, v).map(|(out, _)| out)
}

/// Like [`apply_word`], also returning how many ladder operators were applied.
pub fn apply_word_counted(w: &OperatorWord, v: &SymVector) -> Result<(SymVector, usize)> {
    if w.alpha.dim() != v.d || w.beta.dim() != v.d {
        return Err(Error::DimensionMismatch { expected: v.d, got: w.alpha.dim() });
    }
    let mut count = 0;
    let out = match w.ordering {
        Ordering::Normal => {
            if v.n < w.beta.weight() {
                return Err(Error::InsufficientParticles { needed: w.beta.weight(), available: v.n });
            }
            let lowered = annihilate_all(&w.beta, v.clone(), &mut count)?;
            create_all(&w.alpha, lowered, &mut count)?
        }
        Ordering::AntiNormal => {
            let raised = create_all(&w.alpha, v.clone(), &mut count)?;
            if raised.n < w.beta.weight() {
                return Err(Error::InsufficientParticles {
                    needed: w.beta.weight(),
                    available: raised.n,
                });
            }
            annihilate_all(&w.beta, raised, &mut count)?
        }
    };
    let mut out = out;
    out.scale(w.coefficient);
    Ok((out, count))
}
