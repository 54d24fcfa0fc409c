//! Multi-index combinatorics on the symmetric subspace, representation
//! dimensions, and closed-form de Finetti error bounds.
//!
//! Occupation-basis order is lexicographic ascending on the entry vector, so
//! for `d = 2, n = 2` the basis is `[(0,2), (1,1), (2,0)]`. Every other module
//! indexes vectors and matrices through [`SymBasis`].

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exponent vector / occupation numbers.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(entries: Vec<usize>) -> Self {
        MultiIndex(entries)
    }

    pub fn zeros(d: usize) -> Self {
        MultiIndex(vec![0; d])
    }

    /// `e_i` scaled by `count`.
    pub fn unit(d: usize, i: usize, count: usize) -> Self {
        let mut e = vec![0; d];
        e[i] = count;
        MultiIndex(e)
    }

    pub fn entries(&self) -> &[usize] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn weight(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn get(&self, i: usize) -> usize {
        self.0[i]
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `self − other`, or `None` if any entry would go negative.
    pub fn checked_sub(&self, other: &MultiIndex) -> Option<MultiIndex> {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.checked_sub(*b))
            .collect::<Option<Vec<_>>>()
            .map(MultiIndex)
    }

    pub fn with_delta(&self, i: usize, delta: isize) -> Option<MultiIndex> {
        let v = self.0[i] as isize + delta;
        if v < 0 {
            return None;
        }
        let mut e = self.0.clone();
        e[i] = v as usize;
        Some(MultiIndex(e))
    }

    /// Componentwise `≤`.
    pub fn dominated_by(&self, other: &MultiIndex) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// `ln(α!) = Σ ln(α_i!)`.
    pub fn ln_factorial(&self) -> f64 {
        self.0.iter().map(|&a| ln_factorial(a)).sum()
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// Exact binomial coefficient `C(n, k)`; zero when `k > n`.
pub fn binomial(n: u64, k: u64) -> Result<u128> {
    if k > n {
        return Ok(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1) at every step.
        acc = acc
            .checked_mul((n - i) as u128)
            .ok_or_else(|| Error::Overflow(format!("C({n}, {k})")))?
            / (i as u128 + 1);
    }
    Ok(acc)
}

fn binomial_usize(n: usize, k: usize) -> Result<usize> {
    let b = binomial(n as u64, k as u64)?;
    usize::try_from(b).map_err(|_| Error::Overflow(format!("C({n}, {k})")))
}

/// `dim Sym^n(C^d) = C(n + d − 1, d − 1)`.
pub fn sym_dim(d: usize, n: usize) -> Result<usize> {
    if d == 0 {
        return Err(Error::invalid("d must be at least 1"));
    }
    binomial_usize(n + d - 1, d - 1)
}

/// Weak compositions of `weight` into `parts` parts.
fn compositions(parts: usize, weight: usize) -> usize {
    if parts == 0 {
        return usize::from(weight == 0);
    }
    binomial_usize(weight + parts - 1, parts - 1).expect("composition count overflow")
}

/// All weight-`n` multi-indices of length `d`, lexicographically ascending.
pub fn enumerate_indices(d: usize, n: usize) -> Result<Vec<MultiIndex>> {
    if d == 0 {
        return Err(Error::invalid("d must be at least 1"));
    }
    let mut out = Vec::with_capacity(sym_dim(d, n)?);
    let mut cur = vec![0usize; d];
    fill(&mut cur, 0, n, &mut out);
    Ok(out)
}

fn fill(cur: &mut [usize], pos: usize, remaining: usize, out: &mut Vec<MultiIndex>) {
    if pos + 1 == cur.len() {
        cur[pos] = remaining;
        out.push(MultiIndex(cur.to_vec()));
        return;
    }
    for a in 0..=remaining {
        cur[pos] = a;
        fill(cur, pos + 1, remaining - a, out);
    }
}

/// Position of `alpha` in the lexicographic order of its weight class.
pub fn rank(alpha: &MultiIndex) -> usize {
    let d = alpha.dim();
    let mut w = alpha.weight();
    let mut r = 0;
    for i in 0..d.saturating_sub(1) {
        let a = alpha.0[i];
        let tail = d - i;
        r += compositions(tail, w) - compositions(tail, w - a);
        w -= a;
    }
    r
}

/// Inverse of [`rank`] for fixed `(d, n)`.
pub fn unrank(d: usize, n: usize, mut r: usize) -> Result<MultiIndex> {
    let dim = sym_dim(d, n)?;
    if r >= dim {
        return Err(Error::invalid(format!("rank {r} out of range for dim {dim}")));
    }
    let mut entries = vec![0; d];
    let mut w = n;
    for (i, entry) in entries.iter_mut().enumerate().take(d - 1) {
        let rest = d - i - 1;
        let mut a = 0;
        loop {
            let block = compositions(rest, w - a);
            if r < block {
                break;
            }
            r -= block;
            a += 1;
        }
        *entry = a;
        w -= a;
    }
    entries[d - 1] = w;
    Ok(MultiIndex(entries))
}

type BasisCache = HashMap<(usize, usize), Arc<SymBasis>>;

/// Occupation basis of `Sym^n(C^d)`.
#[derive(Debug, Clone)]
pub struct SymBasis {
    d: usize,
    n: usize,
    indices: Vec<MultiIndex>,
}

impl SymBasis {
    pub fn new(d: usize, n: usize) -> Result<Self> {
        Ok(SymBasis { d, n, indices: enumerate_indices(d, n)? })
    }

    /// Process-wide cached basis.
    pub fn shared(d: usize, n: usize) -> Result<Arc<SymBasis>> {
        static CACHE: OnceLock<Mutex<BasisCache>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(b) = cache.lock().expect("basis cache poisoned").get(&(d, n)) {
            return Ok(b.clone());
        }
        let basis = Arc::new(SymBasis::new(d, n)?);
        cache
            .lock()
            .expect("basis cache poisoned")
            .insert((d, n), basis.clone());
        Ok(basis)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn at(&self, r: usize) -> &MultiIndex {
        &self.indices[r]
    }

    pub fn rank_of(&self, alpha: &MultiIndex) -> usize {
        debug_assert_eq!(alpha.weight(), self.n);
        rank(alpha)
    }
}

pub fn ln_factorial(n: usize) -> f64 {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    const SIZE: usize = 4096;
    let table = TABLE.get_or_init(|| {
        let mut t = vec![0.0; SIZE];
        for i in 1..SIZE {
            t[i] = t[i - 1] + (i as f64).ln();
        }
        t
    });
    if n < SIZE {
        table[n]
    } else {
        table[SIZE - 1] + (SIZE..=n).map(|i| (i as f64).ln()).sum::<f64>()
    }
}

/// `n! / ∏ α_i!` as a float (exact whenever it fits in 2^53).
pub fn multinomial(alpha: &MultiIndex) -> f64 {
    let mut acc: u128 = 1;
    let mut total: u64 = 0;
    for &a in alpha.entries() {
        total += a as u64;
        match binomial(total, a as u64).ok().and_then(|b| acc.checked_mul(b)) {
            Some(v) => acc = v,
            None => return (ln_factorial(alpha.weight()) - alpha.ln_factorial()).exp(),
        }
    }
    acc as f64
}

/// Young diagram shape as weakly decreasing row lengths.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    parts: Vec<usize>,
}

impl Partition {
    pub fn new(mut parts: Vec<usize>) -> Result<Self> {
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::invalid(format!("partition {parts:?} is not weakly decreasing")));
        }
        while parts.last() == Some(&0) {
            parts.pop();
        }
        Ok(Partition { parts })
    }

    pub fn two_row(n: usize, i: usize) -> Result<Self> {
        if 2 * i > n {
            return Err(Error::invalid(format!("shape ({}, {i}) is not a partition", n.saturating_sub(i))));
        }
        Partition::new(vec![n - i, i])
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn size(&self) -> usize {
        self.parts.iter().sum()
    }

    pub fn rows(&self) -> usize {
        self.parts.len()
    }
}

pub const SSYT_MAX_BOXES: usize = 20;

/// Exhaustive count of semistandard Young tableaux of `shape` with entries in `1..=d`.
pub fn ssyt_count(shape: &Partition, d: usize) -> Result<u64> {
    if shape.size() > SSYT_MAX_BOXES {
        return Err(Error::CapacityExceeded { dim: shape.size(), limit: SSYT_MAX_BOXES });
    }
    if shape.rows() > d {
        return Ok(0);
    }
    let cells: Vec<(usize, usize)> = shape
        .parts()
        .iter()
        .enumerate()
        .flat_map(|(r, &len)| (0..len).map(move |c| (r, c)))
        .collect();
    let mut grid: Vec<Vec<usize>> = shape.parts().iter().map(|&l| vec![0; l]).collect();
    Ok(count_fillings(&cells, 0, &mut grid, d))
}

fn count_fillings(cells: &[(usize, usize)], pos: usize, grid: &mut [Vec<usize>], d: usize) -> u64 {
    if pos == cells.len() {
        return 1;
    }
    let (r, c) = cells[pos];
    let mut lo = 1;
    if c > 0 {
        lo = lo.max(grid[r][c - 1]);
    }
    if r > 0 {
        lo = lo.max(grid[r - 1][c] + 1);
    }
    let mut total = 0;
    for v in lo..=d {
        grid[r][c] = v;
        total += count_fillings(cells, pos + 1, grid, d);
    }
    grid[r][c] = 0;
    total
}

/// `dim S_{(n−i, i)}(C^d)` by the hook-content product
/// `((n−2i+1)/(n−i+1)) · C(n−i+d−1, d−1) · C(i+d−2, d−2)`.
pub fn two_row_dim(d: usize, n: usize, i: usize) -> Result<u128> {
    if d == 0 {
        return Err(Error::invalid("d must be at least 1"));
    }
    if 2 * i > n + 1 {
        return Err(Error::invalid(format!("shape ({}, {i}) is invalid", n as i64 - i as i64)));
    }
    if 2 * i == n + 1 {
        return Ok(0);
    }
    let first = binomial((n - i + d - 1) as u64, (d - 1) as u64)?;
    let second = if d == 1 {
        // C(i − 1, −1): 1 for i = 0, else 0.
        u128::from(i == 0)
    } else {
        binomial((i + d - 2) as u64, (d - 2) as u64)?
    };
    let num = ((n - 2 * i + 1) as u128)
        .checked_mul(first)
        .and_then(|v| v.checked_mul(second))
        .ok_or_else(|| Error::Overflow(format!("two_row_dim({d}, {n}, {i})")))?;
    let den = (n - i + 1) as u128;
    debug_assert_eq!(num % den, 0);
    Ok(num / den)
}

/// `C(n+d−r−1, d−1) · C(d+r−1, d−1)`: dimension of the span of `r`-almost
/// product states, valid for `2r ≤ n`.
pub fn exp_hilbert_dim(d: usize, n: usize, r: usize) -> Result<u128> {
    if d == 0 {
        return Err(Error::invalid("d must be at least 1"));
    }
    if 2 * r > n {
        return Err(Error::invalid(format!("need 2r <= n, got r={r}, n={n}")));
    }
    let a = binomial((n + d - r - 1) as u64, (d - 1) as u64)?;
    let b = binomial((d + r - 1) as u64, (d - 1) as u64)?;
    a.checked_mul(b)
        .ok_or_else(|| Error::Overflow(format!("exp_hilbert_dim({d}, {n}, {r})")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundVariant {
    /// `2dk/n`.
    Standard,
    /// `2mdk/n` for `m` registers.
    MultiSym,
    /// `2(1 − dim Sym^{n−k} / dim Sym^n)`.
    ExactRatio,
    /// `1 − (1 − 2dk/n)(1 + (d−1)/n)^r`.
    Exponential,
    /// `2R + 4δ`.
    ApproxPovm,
}

impl std::str::FromStr for BoundVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(BoundVariant::Standard),
            "multisym" | "multi-sym" => Ok(BoundVariant::MultiSym),
            "exact-ratio" => Ok(BoundVariant::ExactRatio),
            "exponential" => Ok(BoundVariant::Exponential),
            "approx-povm" => Ok(BoundVariant::ApproxPovm),
            other => Err(Error::invalid(format!("unknown bound variant '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub d: usize,
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub r: usize,
    /// Radon–Nikodym defect `R`.
    pub radon: f64,
    /// POVM incompleteness `δ`.
    pub delta: f64,
}

impl Default for BoundParams {
    fn default() -> Self {
        BoundParams { d: 2, n: 1, k: 0, m: 1, r: 0, radon: 0.0, delta: 0.0 }
    }
}

impl BoundParams {
    pub fn new(d: usize, n: usize, k: usize) -> Self {
        BoundParams { d, n, k, ..Default::default() }
    }

    pub fn validate(&self, variant: BoundVariant) -> Result<()> {
        if variant == BoundVariant::ApproxPovm {
            if !(self.radon.is_finite() && self.radon >= 0.0) {
                return Err(Error::invalid("R must be finite and non-negative"));
            }
            if !(self.delta.is_finite() && self.delta >= 0.0) {
                return Err(Error::invalid("delta must be finite and non-negative"));
            }
            return Ok(());
        }
        if self.d == 0 {
            return Err(Error::invalid("d must be at least 1"));
        }
        if self.n == 0 {
            return Err(Error::invalid("n must be positive for ratio bounds"));
        }
        if self.k > self.n {
            return Err(Error::invalid(format!("k={} exceeds n={}", self.k, self.n)));
        }
        if self.m == 0 {
            return Err(Error::invalid("m must be at least 1"));
        }
        if self.r > self.n {
            return Err(Error::invalid(format!("r={} exceeds n={}", self.r, self.n)));
        }
        Ok(())
    }
}

/// Closed-form trace-distance bound for the selected de Finetti variant.
pub fn definetti_bound(params: &BoundParams, variant: BoundVariant) -> Result<f64> {
    params.validate(variant)?;
    let BoundParams { d, n, k, m, r, radon, delta } = *params;
    let (d, n, k, m) = (d as f64, n as f64, k as f64, m as f64);
    Ok(match variant {
        BoundVariant::Standard => 2.0 * d * k / n,
        BoundVariant::MultiSym => 2.0 * m * d * k / n,
        BoundVariant::ExactRatio => 2.0 * (1.0 - sym_dim_ratio(params.d, params.n - params.k, params.n)),
        BoundVariant::Exponential => 1.0 - (1.0 - 2.0 * d * k / n) * (1.0 + (d - 1.0) / n).powi(r as i32),
        BoundVariant::ApproxPovm => 2.0 * radon + 4.0 * delta,
    })
}

/// `dim Sym^a / dim Sym^b = ∏_{i=1}^{d−1} (a+i)/(b+i)`.
pub fn sym_dim_ratio(d: usize, a: usize, b: usize) -> f64 {
    (1..d).map(|i| (a + i) as f64 / (b + i) as f64).product()
}

/// Both readings of the homogeneous-space bound `1 − dim_small/dim_large`:
/// with and without the leading factor 2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioBound {
    pub with_factor_two: f64,
    pub without_factor_two: f64,
}

pub fn homogeneous_ratio_bound(dim_small: u128, dim_large: u128) -> Result<RatioBound> {
    if dim_large == 0 || dim_small > dim_large {
        return Err(Error::invalid(format!(
            "need 0 < dim_small <= dim_large, got {dim_small} / {dim_large}"
        )));
    }
    let gap = 1.0 - dim_small as f64 / dim_large as f64;
    Ok(RatioBound { with_factor_two: 2.0 * gap, without_factor_two: gap })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mi(v: &[usize]) -> MultiIndex {
        MultiIndex::new(v.to_vec())
    }

    /// Brute force: every vector in {0..=n}^d with sum n.
    fn brute_force_count(d: usize, n: usize) -> usize {
        let mut count = 0;
        let total = (n + 1).pow(d as u32);
        for code in 0..total {
            let mut c = code;
            let mut s = 0;
            for _ in 0..d {
                s += c % (n + 1);
                c /= n + 1;
            }
            if s == n {
                count += 1;
            }
        }
        count
    }

    #[test]
    fn enumerate_small_cases() {
        assert_eq!(
            enumerate_indices(2, 2).unwrap(),
            vec![mi(&[0, 2]), mi(&[1, 1]), mi(&[2, 0])]
        );
        assert_eq!(enumerate_indices(1, 5).unwrap(), vec![mi(&[5])]);
        assert_eq!(enumerate_indices(3, 2).unwrap().len(), brute_force_count(3, 2));
        assert_eq!(brute_force_count(3, 2), 6);
        assert!(enumerate_indices(0, 2).is_err());
    }

    #[test]
    fn sym_dim_matches_enumeration() {
        assert_eq!(sym_dim(2, 3).unwrap(), brute_force_count(2, 3));
        assert_eq!(sym_dim(2, 3).unwrap(), 4);
        assert_eq!(sym_dim(1, 7).unwrap(), 1);
        assert_eq!(sym_dim(3, 2).unwrap(), 6);
        for d in 1..=4 {
            for n in 0..=6 {
                assert_eq!(sym_dim(d, n).unwrap(), brute_force_count(d, n), "d={d} n={n}");
            }
        }
    }

    #[test]
    fn sym_dim_overflow_is_reported() {
        assert!(matches!(sym_dim(200, 10_000), Err(Error::Overflow(_))));
    }

    #[test]
    fn enumeration_is_sorted() {
        let idx = enumerate_indices(4, 5).unwrap();
        assert!(idx.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn rank_unrank_roundtrip() {
        for d in 1..=4 {
            for n in 0..=6 {
                let basis = SymBasis::new(d, n).unwrap();
                for (r, alpha) in basis.indices().iter().enumerate() {
                    assert_eq!(rank(alpha), r);
                    assert_eq!(&unrank(d, n, r).unwrap(), alpha);
                }
                assert!(unrank(d, n, basis.len()).is_err());
            }
        }
    }

    #[test]
    fn two_row_dim_examples() {
        assert_eq!(two_row_dim(2, 4, 1).unwrap(), 3);
        assert_eq!(two_row_dim(3, 3, 1).unwrap(), 8);
        for d in 1..=5 {
            for n in 0..=8 {
                assert_eq!(two_row_dim(d, n, 0).unwrap(), sym_dim(d, n).unwrap() as u128);
            }
        }
        assert_eq!(two_row_dim(2, 3, 2).unwrap(), 0);
        assert!(two_row_dim(2, 3, 3).is_err());
        assert_eq!(two_row_dim(1, 4, 1).unwrap(), 0);
    }

    #[test]
    fn ssyt_examples() {
        assert_eq!(ssyt_count(&Partition::new(vec![4, 1]).unwrap(), 2).unwrap(), 4);
        assert_eq!(ssyt_count(&Partition::new(vec![7]).unwrap(), 1).unwrap(), 1);
        assert_eq!(ssyt_count(&Partition::new(vec![2, 1]).unwrap(), 3).unwrap(), 8);
        assert!(ssyt_count(&Partition::new(vec![21]).unwrap(), 2).is_err());
        assert!(Partition::new(vec![1, 2]).is_err());
    }

    #[test]
    fn two_row_dim_matches_ssyt() {
        for d in 1..=4 {
            for n in 0..=10 {
                for i in 0..=n / 2 {
                    let shape = Partition::two_row(n, i).unwrap();
                    assert_eq!(
                        two_row_dim(d, n, i).unwrap(),
                        ssyt_count(&shape, d).unwrap() as u128,
                        "d={d} n={n} i={i}"
                    );
                }
            }
        }
    }

    #[test]
    fn exp_hilbert_dim_examples() {
        assert_eq!(exp_hilbert_dim(2, 4, 1).unwrap(), 8);
        assert_eq!(exp_hilbert_dim(3, 4, 2).unwrap(), 36);
        assert_eq!(exp_hilbert_dim(3, 7, 0).unwrap(), sym_dim(3, 7).unwrap() as u128);
        assert!(exp_hilbert_dim(2, 3, 2).is_err());
    }

    #[test]
    fn exp_hilbert_dim_is_two_row_sum() {
        for d in 1..=5 {
            for n in 0..=20 {
                for r in 0..=n / 2 {
                    let sum: u128 = (0..=r).map(|i| two_row_dim(d, n, i).unwrap()).sum();
                    assert_eq!(exp_hilbert_dim(d, n, r).unwrap(), sum, "d={d} n={n} r={r}");
                }
            }
        }
    }

    #[test]
    fn bound_examples() {
        let std = definetti_bound(&BoundParams::new(2, 10, 1), BoundVariant::Standard).unwrap();
        assert!((std - 0.4).abs() < 1e-15);
        let ratio = definetti_bound(&BoundParams::new(2, 4, 2), BoundVariant::ExactRatio).unwrap();
        assert!((ratio - 0.8).abs() < 1e-15);
        let povm = BoundParams { radon: 0.1, delta: 0.05, ..Default::default() };
        assert!((definetti_bound(&povm, BoundVariant::ApproxPovm).unwrap() - 0.4).abs() < 1e-15);
        let multi = BoundParams { m: 2, ..BoundParams::new(2, 8, 1) };
        assert!((definetti_bound(&multi, BoundVariant::MultiSym).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn exponential_bound_reduces_at_r_zero() {
        for d in 1..=4 {
            for n in 1..=12 {
                for k in 0..=n {
                    let p = BoundParams::new(d, n, k);
                    let e = definetti_bound(&p, BoundVariant::Exponential).unwrap();
                    let s = definetti_bound(&p, BoundVariant::Standard).unwrap();
                    assert!((e - s).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn ratio_variants_reject_zero_n() {
        let p = BoundParams::new(2, 0, 0);
        assert!(definetti_bound(&p, BoundVariant::Standard).is_err());
        assert!(definetti_bound(&p, BoundVariant::ExactRatio).is_err());
        assert!(definetti_bound(&BoundParams::new(2, 3, 4), BoundVariant::Standard).is_err());
    }

    #[test]
    fn exact_ratio_matches_integer_dims() {
        for d in 1..=5 {
            for n in 1..=15 {
                for k in 0..=n {
                    let exact = sym_dim(d, n - k).unwrap() as f64 / sym_dim(d, n).unwrap() as f64;
                    assert!((sym_dim_ratio(d, n - k, n) - exact).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn homogeneous_ratio_exposes_both_readings() {
        let b = homogeneous_ratio_bound(3, 5).unwrap();
        assert!((b.without_factor_two - 0.4).abs() < 1e-15);
        assert!((b.with_factor_two - 0.8).abs() < 1e-15);
        assert!(homogeneous_ratio_bound(6, 5).is_err());
    }

    #[test]
    fn multinomial_values() {
        assert_eq!(multinomial(&mi(&[1, 1])), 2.0);
        assert_eq!(multinomial(&mi(&[2, 1, 1])), 12.0);
        let big = multinomial(&mi(&[60, 60, 60]));
        let expected = (ln_factorial(180) - 3.0 * ln_factorial(60)).exp();
        assert!((big / expected - 1.0).abs() < 1e-10);
    }

    proptest! {
        #[test]
        fn exact_ratio_never_exceeds_standard(d in 1usize..6, n in 1usize..40, kf in 0.0f64..1.0) {
            let k = ((n as f64) * kf) as usize;
            let p = BoundParams::new(d, n, k);
            let exact = definetti_bound(&p, BoundVariant::ExactRatio).unwrap();
            let standard = definetti_bound(&p, BoundVariant::Standard).unwrap();
            prop_assert!(exact <= standard + 1e-12);
        }

        #[test]
        fn rank_inverts_unrank(d in 1usize..6, n in 0usize..10, seed in 0usize..1000) {
            let dim = sym_dim(d, n).unwrap();
            let r = seed % dim;
            let alpha = unrank(d, n, r).unwrap();
            prop_assert_eq!(alpha.weight(), n);
            prop_assert_eq!(rank(&alpha), r);
        }
    }
}
