//! Finite von Neumann models `(N, J, τ)`.
//!
//! `N` is a direct sum of full matrix algebras `M_{n_1} ⊕ … ⊕ M_{n_k}`. Every
//! norm closed two-sided ideal of such an algebra is a sub-sum of blocks, so
//! the ideal `J` is a block mask and the quotient map `π : N → N/J` simply
//! forgets the ideal blocks. The trace is `τ = Σ λ_i Tr_i` with one positive
//! weight per block, and `K₀(J) ≅ ℤ^{#ideal blocks}` through per-block rank.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, C64};
use crate::tolerance::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Block {
    pub dim: usize,
    /// Trace weight `λ_i`.
    pub weight: f64,
    pub in_ideal: bool,
}

impl Block {
    pub fn new(dim: usize, weight: f64, in_ideal: bool) -> Self {
        Self { dim, weight, in_ideal }
    }
}

/// The algebra `N = ⊕ M_{n_i}(ℂ)` together with the ideal mask and trace weights.
#[derive(Debug, Clone, PartialEq)]
pub struct VnAlgebra {
    blocks: Vec<Block>,
}

impl VnAlgebra {
    pub fn new(blocks: Vec<Block>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::Model("algebra needs at least one block".into()));
        }
        for (i, b) in blocks.iter().enumerate() {
            if b.dim == 0 {
                return Err(Error::Model(format!("block {i} has dimension 0")));
            }
            if !(b.weight > 0.0 && b.weight.is_finite()) {
                return Err(Error::Model(format!("block {i} has non-positive weight {}", b.weight)));
            }
        }
        Ok(Self { blocks })
    }

    /// A single ideal block of the given dimension with unit weight.
    pub fn single_ideal(dim: usize) -> Result<Self> {
        Self::new(vec![Block::new(dim, 1.0, true)])
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.dim).collect()
    }

    pub fn total_dim(&self) -> usize {
        self.blocks.iter().map(|b| b.dim).sum()
    }

    pub fn is_ideal(&self, block: usize) -> bool {
        self.blocks[block].in_ideal
    }

    /// Indices of the blocks making up `J`, in order.
    pub fn ideal_blocks(&self) -> Vec<usize> {
        (0..self.blocks.len()).filter(|&i| self.blocks[i].in_ideal).collect()
    }

    /// Indices of the blocks that survive in `N/J`.
    pub fn quotient_blocks(&self) -> Vec<usize> {
        (0..self.blocks.len()).filter(|&i| !self.blocks[i].in_ideal).collect()
    }

    pub fn ideal_count(&self) -> usize {
        self.blocks.iter().filter(|b| b.in_ideal).count()
    }

    pub fn is_all_ideal(&self) -> bool {
        self.blocks.iter().all(|b| b.in_ideal)
    }

    /// The same algebra with a different ideal mask.
    pub fn with_ideal_mask(&self, mask: &[bool]) -> Result<Self> {
        if mask.len() != self.blocks.len() {
            return Err(Error::Shape(format!(
                "ideal mask has {} entries for {} blocks",
                mask.len(),
                self.blocks.len()
            )));
        }
        let blocks = self
            .blocks
            .iter()
            .zip(mask)
            .map(|(b, &m)| Block { in_ideal: m, ..*b })
            .collect();
        Self::new(blocks)
    }
}

/// An element of `N`: one square complex matrix per block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockOperator {
    blocks: Vec<CMat>,
}

impl BlockOperator {
    pub fn new(blocks: Vec<CMat>) -> Result<Self> {
        for (i, b) in blocks.iter().enumerate() {
            if b.nrows() != b.ncols() {
                return Err(Error::Shape(format!(
                    "block {i} is {}x{}, expected square",
                    b.nrows(),
                    b.ncols()
                )));
            }
        }
        Ok(Self { blocks })
    }

    /// Build an operator for `alg`, checking block shapes.
    pub fn for_algebra(alg: &VnAlgebra, blocks: Vec<CMat>) -> Result<Self> {
        let op = Self::new(blocks)?;
        op.conforms(alg)?;
        Ok(op)
    }

    pub fn zero(alg: &VnAlgebra) -> Self {
        Self { blocks: alg.blocks.iter().map(|b| CMat::zeros(b.dim, b.dim)).collect() }
    }

    pub fn identity(alg: &VnAlgebra) -> Self {
        Self { blocks: alg.blocks.iter().map(|b| linalg::identity(b.dim)).collect() }
    }

    /// Block diagonal operator with real diagonal entries.
    pub fn from_diagonals(diags: &[Vec<f64>]) -> Self {
        Self { blocks: diags.iter().map(|d| linalg::from_real_diag(d)).collect() }
    }

    pub fn from_fn(alg: &VnAlgebra, mut f: impl FnMut(usize, usize) -> CMat) -> Result<Self> {
        let blocks = alg.blocks.iter().enumerate().map(|(i, b)| f(i, b.dim)).collect();
        Self::for_algebra(alg, blocks)
    }

    pub fn blocks(&self) -> &[CMat] {
        &self.blocks
    }

    pub fn block(&self, i: usize) -> &CMat {
        &self.blocks[i]
    }

    pub fn into_blocks(self) -> Vec<CMat> {
        self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn conforms(&self, alg: &VnAlgebra) -> Result<()> {
        if self.blocks.len() != alg.blocks.len() {
            return Err(Error::Shape(format!(
                "operator has {} blocks, algebra has {}",
                self.blocks.len(),
                alg.blocks.len()
            )));
        }
        for (i, (m, b)) in self.blocks.iter().zip(&alg.blocks).enumerate() {
            if m.nrows() != b.dim || m.ncols() != b.dim {
                return Err(Error::Shape(format!(
                    "block {i} is {}x{}, algebra expects {}x{}",
                    m.nrows(),
                    m.ncols(),
                    b.dim,
                    b.dim
                )));
            }
        }
        Ok(())
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        let ok = self.blocks.len() == other.blocks.len()
            && self.blocks.iter().zip(&other.blocks).all(|(a, b)| a.shape() == b.shape());
        if ok {
            Ok(())
        } else {
            Err(Error::Shape("operators live in different algebras".into()))
        }
    }

    pub fn map_blocks(&self, f: impl Fn(&CMat) -> CMat) -> Self {
        Self { blocks: self.blocks.iter().map(f).collect() }
    }

    fn zip_blocks(&self, other: &Self, f: impl Fn(&CMat, &CMat) -> CMat) -> Self {
        self.same_shape(other).expect("block operators of different shapes");
        Self { blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| f(a, b)).collect() }
    }

    pub fn adjoint(&self) -> Self {
        self.map_blocks(|m| m.adjoint())
    }

    pub fn scale(&self, s: C64) -> Self {
        self.map_blocks(|m| m * s)
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(c(s, 0.0))
    }

    /// `(1 - s) a + s b`.
    pub fn lerp(a: &Self, b: &Self, s: f64) -> Self {
        a.zip_blocks(b, |x, y| x * c(1.0 - s, 0.0) + y * c(s, 0.0))
    }

    /// Operator norm in `N`: the largest blockwise spectral norm.
    pub fn norm(&self) -> f64 {
        self.blocks.iter().map(linalg::spectral_norm).fold(0.0, f64::max)
    }

    pub fn block_norms(&self) -> Vec<f64> {
        self.blocks.iter().map(linalg::spectral_norm).collect()
    }

    pub fn commutator(a: &Self, b: &Self) -> Self {
        &(a * b) - &(b * a)
    }

    /// `‖T − T*‖ ≤ ε (1 + ‖T‖)`.
    pub fn is_selfadjoint(&self, tol: &Tolerances) -> bool {
        let slack = tol.projection_slack(self.norm());
        self.blocks.iter().all(|m| linalg::spectral_norm(&(m - m.adjoint())) <= slack)
    }

    /// Blockwise `‖P² − P‖ ≤ ε` and `‖P − P*‖ ≤ ε`.
    pub fn is_projection(&self, tol: &Tolerances) -> bool {
        let slack = tol.projection_slack(self.norm());
        self.blocks.iter().all(|m| {
            linalg::spectral_norm(&(m * m - m)) <= slack
                && linalg::spectral_norm(&(m - m.adjoint())) <= slack
        })
    }

    /// `‖U*U − 1‖` and `‖UU* − 1‖` both within slack.
    pub fn is_unitary(&self, tol: &Tolerances) -> bool {
        let slack = tol.projection_slack(1.0);
        self.blocks.iter().all(|m| {
            let id = linalg::identity(m.nrows());
            linalg::spectral_norm(&(m.adjoint() * m - &id)) <= slack
                && linalg::spectral_norm(&(m * m.adjoint() - &id)) <= slack
        })
    }

    /// Per-block rank of a (near) projection: eigenvalues of the Hermitian
    /// part above 1/2.
    pub fn projection_ranks(&self) -> Vec<usize> {
        self.blocks
            .iter()
            .map(|m| linalg::eigvalsh(m).into_iter().filter(|&x| x > 0.5).count())
            .collect()
    }

    /// Restriction to a subset of blocks (`keep[i]` true keeps block `i`).
    pub fn restrict(&self, keep: &[bool]) -> Self {
        Self {
            blocks: self
                .blocks
                .iter()
                .zip(keep)
                .filter(|(_, &k)| k)
                .map(|(m, _)| m.clone())
                .collect(),
        }
    }
}

impl Add for &BlockOperator {
    type Output = BlockOperator;
    fn add(self, rhs: &BlockOperator) -> BlockOperator {
        self.zip_blocks(rhs, |a, b| a + b)
    }
}

impl Sub for &BlockOperator {
    type Output = BlockOperator;
    fn sub(self, rhs: &BlockOperator) -> BlockOperator {
        self.zip_blocks(rhs, |a, b| a - b)
    }
}

impl Mul for &BlockOperator {
    type Output = BlockOperator;
    fn mul(self, rhs: &BlockOperator) -> BlockOperator {
        self.zip_blocks(rhs, |a, b| a * b)
    }
}

impl Neg for &BlockOperator {
    type Output = BlockOperator;
    fn neg(self) -> BlockOperator {
        self.map_blocks(|m| -m)
    }
}

/// `‖π(T)‖`: the largest spectral norm over non-ideal blocks, 0 when `J = N`.
pub fn quotient_norm(t: &BlockOperator, alg: &VnAlgebra) -> Result<f64> {
    t.conforms(alg)?;
    Ok(alg
        .quotient_blocks()
        .into_iter()
        .map(|i| linalg::spectral_norm(t.block(i)))
        .fold(0.0, f64::max))
}

/// `τ(p) = Σ λ_i rank(p_i)` for a projection `p`.
pub fn tau(p: &BlockOperator, alg: &VnAlgebra, tol: &Tolerances) -> Result<f64> {
    p.conforms(alg)?;
    if !p.is_projection(tol) {
        return Err(Error::Precondition("tau expects a projection".into()));
    }
    Ok(p.projection_ranks()
        .iter()
        .zip(alg.blocks())
        .map(|(&r, b)| b.weight * r as f64)
        .sum())
}

/// An element of `K₀(J) ≅ ℤ^{#ideal blocks}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct K0Class {
    ranks: Vec<i64>,
}

impl K0Class {
    pub fn new(ranks: Vec<i64>) -> Self {
        Self { ranks }
    }

    pub fn zero(alg: &VnAlgebra) -> Self {
        Self { ranks: vec![0; alg.ideal_count()] }
    }

    pub fn ranks(&self) -> &[i64] {
        &self.ranks
    }

    pub fn is_zero(&self) -> bool {
        self.ranks.iter().all(|&r| r == 0)
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }

    fn check_len(&self, other: &Self) {
        assert_eq!(self.ranks.len(), other.ranks.len(), "K0 classes over different ideals");
    }
}

impl fmt::Display for K0Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, r) in self.ranks.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{r}")?;
        }
        write!(f, ")")
    }
}

impl Add for K0Class {
    type Output = K0Class;
    fn add(mut self, rhs: K0Class) -> K0Class {
        self += rhs;
        self
    }
}

impl AddAssign for K0Class {
    fn add_assign(&mut self, rhs: K0Class) {
        self.check_len(&rhs);
        for (a, b) in self.ranks.iter_mut().zip(rhs.ranks) {
            *a += b;
        }
    }
}

impl Sub for K0Class {
    type Output = K0Class;
    fn sub(self, rhs: K0Class) -> K0Class {
        self + (-rhs)
    }
}

impl Neg for K0Class {
    type Output = K0Class;
    fn neg(self) -> K0Class {
        K0Class { ranks: self.ranks.into_iter().map(|r| -r).collect() }
    }
}

impl Mul<K0Class> for i64 {
    type Output = K0Class;
    fn mul(self, rhs: K0Class) -> K0Class {
        K0Class { ranks: rhs.ranks.into_iter().map(|r| self * r).collect() }
    }
}

impl Sum for K0Class {
    /// Panics on an empty iterator; fold from [`K0Class::zero`] instead when
    /// the sum may be empty.
    fn sum<I: Iterator<Item = K0Class>>(mut iter: I) -> K0Class {
        let first = iter.next().expect("sum of an empty K0 sequence");
        iter.fold(first, |acc, x| acc + x)
    }
}

/// `τ_* : K₀(J) → ℝ`, `Σ λ_i ranks_i` over the ideal blocks.
pub fn tau_star(class: &K0Class, alg: &VnAlgebra) -> Result<f64> {
    let ideal = alg.ideal_blocks();
    if class.len() != ideal.len() {
        return Err(Error::Shape(format!(
            "class has {} entries, algebra has {} ideal blocks",
            class.len(),
            ideal.len()
        )));
    }
    Ok(class.ranks.iter().zip(&ideal).map(|(&r, &i)| alg.blocks()[i].weight * r as f64).sum())
}

/// Resolve the formal difference `[p] − [q]` of two projections whose
/// difference lives in `J` into a rank vector.
pub fn k0_of_difference(
    p: &BlockOperator,
    q: &BlockOperator,
    alg: &VnAlgebra,
    tol: &Tolerances,
) -> Result<K0Class> {
    p.conforms(alg)?;
    q.conforms(alg)?;
    if !p.is_projection(tol) || !q.is_projection(tol) {
        return Err(Error::Precondition("k0_of_difference expects projections".into()));
    }
    for i in alg.quotient_blocks() {
        let d = linalg::spectral_norm(&(p.block(i) - q.block(i)));
        if d > tol.projection_slack(1.0) {
            return Err(Error::ClassNotInK0(format!(
                "difference has norm {d:e} on non-ideal block {i}"
            )));
        }
    }
    let rp = p.projection_ranks();
    let rq = q.projection_ranks();
    Ok(K0Class::new(alg.ideal_blocks().into_iter().map(|i| rp[i] as i64 - rq[i] as i64).collect()))
}

/// A piecewise-linear path `t ↦ B_t` on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorPath {
    keyframes: Vec<(f64, BlockOperator)>,
}

impl OperatorPath {
    pub fn new(keyframes: Vec<(f64, BlockOperator)>) -> Result<Self> {
        if keyframes.len() < 2 {
            return Err(Error::Model("a path needs at least two keyframes".into()));
        }
        if keyframes[0].0 != 0.0 || keyframes[keyframes.len() - 1].0 != 1.0 {
            return Err(Error::Model("keyframes must start at t = 0 and end at t = 1".into()));
        }
        for w in keyframes.windows(2) {
            if w[1].0.partial_cmp(&w[0].0) != Some(std::cmp::Ordering::Greater) {
                return Err(Error::Model(format!(
                    "keyframe times must be strictly increasing ({} then {})",
                    w[0].0, w[1].0
                )));
            }
            w[0].1.same_shape(&w[1].1)?;
        }
        Ok(Self { keyframes })
    }

    /// The straight segment from `a` to `b`.
    pub fn linear(a: BlockOperator, b: BlockOperator) -> Result<Self> {
        Self::new(vec![(0.0, a), (1.0, b)])
    }

    /// Sample `f` at `n + 1` uniformly spaced times and interpolate linearly.
    pub fn sampled(n: usize, f: impl Fn(f64) -> BlockOperator) -> Result<Self> {
        let n = n.max(1);
        Self::new((0..=n).map(|k| {
            let t = if k == n { 1.0 } else { k as f64 / n as f64 };
            (t, f(t))
        }).collect())
    }

    pub fn keyframes(&self) -> &[(f64, BlockOperator)] {
        &self.keyframes
    }

    pub fn start(&self) -> &BlockOperator {
        &self.keyframes[0].1
    }

    pub fn end(&self) -> &BlockOperator {
        &self.keyframes[self.keyframes.len() - 1].1
    }

    pub fn conforms(&self, alg: &VnAlgebra) -> Result<()> {
        self.keyframes.iter().try_for_each(|(_, op)| op.conforms(alg))
    }

    /// Index `k` of the linear piece `[t_k, t_{k+1}]` containing `t`.
    pub fn segment_of(&self, t: f64) -> usize {
        let n = self.keyframes.len();
        match self.keyframes.binary_search_by(|(s, _)| s.total_cmp(&t)) {
            Ok(k) => k.min(n - 2),
            Err(k) => k.saturating_sub(1).min(n - 2),
        }
    }

    /// `B_t`, exact at keyframes.
    pub fn eval(&self, t: f64) -> BlockOperator {
        let t = t.clamp(0.0, 1.0);
        if let Ok(k) = self.keyframes.binary_search_by(|(s, _)| s.total_cmp(&t)) {
            return self.keyframes[k].1.clone();
        }
        let k = self.segment_of(t);
        let (t0, a) = &self.keyframes[k];
        let (t1, b) = &self.keyframes[k + 1];
        BlockOperator::lerp(a, b, (t - t0) / (t1 - t0))
    }

    /// Keyframe times that fall strictly inside `(a, b)`.
    pub fn breakpoints_in(&self, a: f64, b: f64) -> Vec<f64> {
        self.keyframes.iter().map(|(t, _)| *t).filter(|&t| t > a && t < b).collect()
    }

    /// The same path with extra keyframes inserted at `times`.
    pub fn refined(&self, times: &[f64]) -> Self {
        let mut ts: Vec<f64> = self.keyframes.iter().map(|(t, _)| *t).collect();
        ts.extend(times.iter().copied().filter(|t| *t > 0.0 && *t < 1.0));
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        Self { keyframes: ts.into_iter().map(|t| (t, self.eval(t))).collect() }
    }

    /// `t ↦ B_{1−t}`.
    pub fn reversed(&self) -> Self {
        let mut kf: Vec<(f64, BlockOperator)> =
            self.keyframes.iter().rev().map(|(t, op)| (1.0 - t, op.clone())).collect();
        let n = kf.len();
        kf[0].0 = 0.0;
        kf[n - 1].0 = 1.0;
        Self { keyframes: kf }
    }

    /// Run `self` on `[0, 1/2]` and `next` on `[1/2, 1]`.
    pub fn concat(&self, next: &Self, tol: &Tolerances) -> Result<Self> {
        let gap = (self.end() - next.start()).norm();
        if gap > tol.projection_slack(self.end().norm()) {
            return Err(Error::Precondition(format!(
                "paths do not meet: endpoint mismatch {gap:e}"
            )));
        }
        let mut kf: Vec<(f64, BlockOperator)> =
            self.keyframes.iter().map(|(t, op)| (0.5 * t, op.clone())).collect();
        kf.extend(next.keyframes.iter().skip(1).map(|(t, op)| (0.5 + 0.5 * t, op.clone())));
        let n = kf.len();
        kf[n - 1].0 = 1.0;
        Self::new(kf)
    }

    /// Apply `f` to every keyframe, keeping the times.
    pub fn map_keyframes(&self, f: impl Fn(&BlockOperator) -> BlockOperator) -> Self {
        Self { keyframes: self.keyframes.iter().map(|(t, op)| (*t, f(op))).collect() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn alg(blocks: &[(usize, f64, bool)]) -> VnAlgebra {
        VnAlgebra::new(blocks.iter().map(|&(d, w, i)| Block::new(d, w, i)).collect()).unwrap()
    }

    fn rank_one(dim: usize, idx: usize) -> CMat {
        let mut m = CMat::zeros(dim, dim);
        m[(idx, idx)] = c(1.0, 0.0);
        m
    }

    #[test]
    fn algebra_rejects_bad_blocks() {
        assert!(VnAlgebra::new(vec![]).is_err());
        assert!(VnAlgebra::new(vec![Block::new(0, 1.0, true)]).is_err());
        assert!(VnAlgebra::new(vec![Block::new(2, 0.0, true)]).is_err());
        assert!(VnAlgebra::new(vec![Block::new(2, -1.0, false)]).is_err());
    }

    #[test]
    fn quotient_norm_examples() {
        let all_ideal = alg(&[(2, 1.0, true), (3, 1.0, true)]);
        let t = BlockOperator::from_diagonals(&[vec![5.0, 1.0], vec![7.0, 0.0, 1.0]]);
        assert_eq!(quotient_norm(&t, &all_ideal).unwrap(), 0.0);

        let one = alg(&[(3, 1.0, false)]);
        let id = BlockOperator::identity(&one);
        assert!((quotient_norm(&id, &one).unwrap() - 1.0).abs() < 1e-14);

        let two = alg(&[(2, 1.0, false)]);
        let t = BlockOperator::from_diagonals(&[vec![3.0, -2.0]]);
        assert!((quotient_norm(&t, &two).unwrap() - 3.0).abs() < 1e-14);

        let wrong = BlockOperator::from_diagonals(&[vec![1.0]]);
        assert!(matches!(quotient_norm(&wrong, &two), Err(Error::Shape(_))));
    }

    #[test]
    fn tau_examples() {
        let tol = Tolerances::default();
        let a = alg(&[(2, 1.0, true), (3, 0.5, false)]);
        assert_eq!(tau(&BlockOperator::zero(&a), &a, &tol).unwrap(), 0.0);
        assert!((tau(&BlockOperator::identity(&a), &a, &tol).unwrap() - 3.5).abs() < 1e-15);

        let b = alg(&[(3, 0.25, true)]);
        let p = BlockOperator::new(vec![rank_one(3, 1)]).unwrap();
        assert!((tau(&p, &b, &tol).unwrap() - 0.25).abs() < 1e-15);

        let not_proj = BlockOperator::from_diagonals(&[vec![0.5, 0.0, 0.0]]);
        assert!(matches!(tau(&not_proj, &b, &tol), Err(Error::Precondition(_))));
    }

    #[test]
    fn tau_star_examples() {
        let a = alg(&[(2, 1.0, true), (2, 1.0, true)]);
        assert_eq!(tau_star(&K0Class::zero(&a), &a).unwrap(), 0.0);
        assert_eq!(tau_star(&K0Class::new(vec![1, -1]), &a).unwrap(), 0.0);
        let b = alg(&[(2, 0.5, true), (1, 9.0, false), (2, 0.25, true)]);
        assert!((tau_star(&K0Class::new(vec![2, -1]), &b).unwrap() - 0.75).abs() < 1e-15);
        assert!(matches!(tau_star(&K0Class::new(vec![1]), &b), Err(Error::Shape(_))));
    }

    #[test]
    fn k0_of_difference_examples() {
        let tol = Tolerances::default();
        let a = alg(&[(2, 1.0, true)]);
        let p = BlockOperator::identity(&a);
        assert!(k0_of_difference(&p, &p, &a, &tol).unwrap().is_zero());
        let z = BlockOperator::zero(&a);
        assert_eq!(k0_of_difference(&p, &z, &a, &tol).unwrap().ranks(), &[2]);

        let b = alg(&[(2, 1.0, true), (2, 1.0, true)]);
        let p = BlockOperator::new(vec![rank_one(2, 0), CMat::zeros(2, 2)]).unwrap();
        let q = BlockOperator::new(vec![CMat::zeros(2, 2), rank_one(2, 1)]).unwrap();
        assert_eq!(k0_of_difference(&p, &q, &b, &tol).unwrap().ranks(), &[1, -1]);

        let c = alg(&[(2, 1.0, true), (2, 1.0, false)]);
        let p = BlockOperator::new(vec![CMat::zeros(2, 2), rank_one(2, 0)]).unwrap();
        let q = BlockOperator::zero(&c);
        assert!(matches!(k0_of_difference(&p, &q, &c, &tol), Err(Error::ClassNotInK0(_))));
    }

    #[test]
    fn path_validation_and_eval() {
        let a = alg(&[(2, 1.0, true)]);
        let b0 = BlockOperator::from_diagonals(&[vec![1.0, -1.0]]);
        let b1 = BlockOperator::identity(&a);
        let path = OperatorPath::linear(b0.clone(), b1.clone()).unwrap();
        assert_eq!(path.eval(0.0), b0);
        assert_eq!(path.eval(1.0), b1);
        let mid = path.eval(0.5);
        assert!((mid.block(0)[(1, 1)].re - 0.0).abs() < 1e-15);

        assert!(OperatorPath::new(vec![(0.0, b0.clone())]).is_err());
        assert!(OperatorPath::new(vec![(0.1, b0.clone()), (1.0, b1.clone())]).is_err());
        assert!(OperatorPath::new(vec![(0.0, b0.clone()), (0.0, b0.clone()), (1.0, b1.clone())]).is_err());

        let refined = path.refined(&[0.25, 0.5]);
        assert_eq!(refined.keyframes().len(), 4);
        assert_eq!(refined.eval(0.5), path.eval(0.5));

        let rev = path.reversed();
        assert_eq!(rev.eval(0.0), b1);
        let tol = Tolerances::default();
        let loop_path = path.concat(&rev, &tol).unwrap();
        assert_eq!(loop_path.eval(0.5), b1);
        assert!(path.concat(&path, &tol).is_err());
    }
}
