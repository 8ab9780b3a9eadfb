#![allow(dead_code)]

use kflow::linalg::{c, CMat, C64};
use kflow::{Block, BlockOperator, OperatorPath, VnAlgebra};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| c(rng.sample(StandardNormal), rng.sample(StandardNormal)))
}

pub fn hermitian(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> CMat {
    let g = gaussian(rng, n, n);
    (&g + g.adjoint()) * c(0.5 * scale, 0.0)
}

/// Haar-ish unitary from the QR factor of a Gaussian matrix.
pub fn unitary(rng: &mut ChaCha8Rng, n: usize) -> CMat {
    if n == 0 {
        return CMat::zeros(0, 0);
    }
    gaussian(rng, n, n).qr().q()
}

/// Orthonormal columns spanning a random `rank`-dimensional subspace.
pub fn frame(rng: &mut ChaCha8Rng, n: usize, rank: usize) -> CMat {
    unitary(rng, n).columns(0, rank).into_owned()
}

pub fn projection(rng: &mut ChaCha8Rng, n: usize, rank: usize) -> CMat {
    let f = frame(rng, n, rank);
    &f * f.adjoint()
}

/// `V diag(values) V*` for a random unitary `V`.
pub fn with_spectrum(rng: &mut ChaCha8Rng, values: &[f64]) -> CMat {
    let v = unitary(rng, values.len());
    let d = CMat::from_diagonal(&DVector::from_iterator(values.len(), values.iter().map(|&x| c(x, 0.0))));
    &v * d * v.adjoint()
}

pub fn random_algebra(rng: &mut ChaCha8Rng, max_blocks: usize, max_dim: usize) -> VnAlgebra {
    let count = rng.random_range(1..=max_blocks);
    let blocks = (0..count)
        .map(|_| {
            let weight = [1.0, 0.5, 0.25, 2.0][rng.random_range(0..4)];
            Block::new(rng.random_range(1..=max_dim), weight, rng.random_bool(0.6))
        })
        .collect();
    VnAlgebra::new(blocks).unwrap()
}

pub fn hermitian_op(rng: &mut ChaCha8Rng, alg: &VnAlgebra, scale: f64) -> BlockOperator {
    BlockOperator::new(alg.dims().into_iter().map(|n| hermitian(rng, n, scale)).collect()).unwrap()
}

pub fn projection_op(rng: &mut ChaCha8Rng, alg: &VnAlgebra) -> BlockOperator {
    BlockOperator::new(
        alg.dims()
            .into_iter()
            .map(|n| {
                let r = rng.random_range(0..=n);
                projection(rng, n, r)
            })
            .collect(),
    )
    .unwrap()
}

pub fn unitary_op(rng: &mut ChaCha8Rng, alg: &VnAlgebra) -> BlockOperator {
    BlockOperator::new(alg.dims().into_iter().map(|n| unitary(rng, n)).collect()).unwrap()
}

/// Ideal-supported selfadjoint operator of norm `size`.
pub fn ideal_noise(rng: &mut ChaCha8Rng, alg: &VnAlgebra, size: f64) -> BlockOperator {
    let mut blocks = Vec::new();
    for (i, n) in alg.dims().into_iter().enumerate() {
        if alg.is_ideal(i) && n > 0 {
            let h = hermitian(rng, n, 1.0);
            let norm = h.clone().svd(false, false).singular_values.max();
            blocks.push(if norm > 0.0 { h * c(size / norm, 0.0) } else { h });
        } else {
            blocks.push(CMat::zeros(n, n));
        }
    }
    BlockOperator::new(blocks).unwrap()
}

/// Rank by Gaussian elimination with complete pivoting, entries below
/// `threshold` relative to the largest entry treated as zero.
pub fn elimination_rank(a: &CMat, threshold: f64) -> usize {
    let mut m = a.clone();
    let (rows, cols) = m.shape();
    let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0;
    }
    let mut rank = 0;
    for step in 0..rows.min(cols) {
        let mut best = (step, step, 0.0);
        for i in step..rows {
            for j in step..cols {
                let v = m[(i, j)].norm();
                if v > best.2 {
                    best = (i, j, v);
                }
            }
        }
        if best.2 <= threshold * scale {
            break;
        }
        m.swap_rows(step, best.0);
        m.swap_columns(step, best.1);
        let pivot: C64 = m[(step, step)];
        for i in step + 1..rows {
            let factor = m[(i, step)] / pivot;
            for j in step..cols {
                let sub = factor * m[(step, j)];
                m[(i, j)] -= sub;
            }
        }
        rank += 1;
    }
    rank
}

/// Per-block orthonormal frames; non-ideal blocks get rank `quotient_rank[i]`
/// (clamped to the block), ideal blocks a random rank.
pub fn random_frames(rng: &mut ChaCha8Rng, alg: &VnAlgebra, quotient_rank: &[usize]) -> Vec<CMat> {
    alg.dims()
        .into_iter()
        .enumerate()
        .map(|(i, n)| {
            let r = if alg.is_ideal(i) { rng.random_range(0..=n) } else { quotient_rank[i].min(n) };
            frame(rng, n, r)
        })
        .collect()
}

pub fn frames_projection(frames: &[CMat]) -> BlockOperator {
    BlockOperator::new(frames.iter().map(|f| f * f.adjoint()).collect()).unwrap()
}

/// Random `S ∈ qNp` with `p`, `q` the projections of `dom`, `cod`.
/// On non-ideal blocks the corner is invertible with singular values in
/// `[1, 2]`; on ideal blocks it has a random rank.
pub fn corner_operator(rng: &mut ChaCha8Rng, alg: &VnAlgebra, dom: &[CMat], cod: &[CMat]) -> BlockOperator {
    let blocks = (0..alg.num_blocks())
        .map(|i| {
            let (rp, rq) = (dom[i].ncols(), cod[i].ncols());
            let core = if alg.is_ideal(i) {
                let k = rng.random_range(0..=rp.min(rq));
                gaussian(rng, rq, k) * gaussian(rng, k, rp)
            } else {
                assert_eq!(rp, rq);
                let s: Vec<f64> = (0..rp).map(|_| rng.random_range(1.0..2.0)).collect();
                unitary(rng, rp) * kflow::linalg::from_real_diag(&s) * unitary(rng, rp)
            };
            &cod[i] * core * dom[i].adjoint()
        })
        .collect();
    BlockOperator::new(blocks).unwrap()
}

/// Per-ideal-block `rank(dom) − rank(cod)`.
pub fn rank_difference(alg: &VnAlgebra, dom: &[CMat], cod: &[CMat]) -> Vec<i64> {
    alg.ideal_blocks().into_iter().map(|i| dom[i].ncols() as i64 - cod[i].ncols() as i64).collect()
}

pub fn quotient_ranks(rng: &mut ChaCha8Rng, alg: &VnAlgebra) -> Vec<usize> {
    alg.dims().into_iter().map(|n| rng.random_range(0..=n)).collect()
}

/// Unitary `exp(i·angle·H)` with `‖H‖ ≤ 1`, per block.
pub fn near_identity(r: &mut ChaCha8Rng, alg: &VnAlgebra, angle: f64) -> BlockOperator {
    BlockOperator::new(
        alg.dims()
            .into_iter()
            .map(|n| {
                let h = hermitian(r, n, 1.0);
                let norm = kflow::linalg::spectral_norm(&h).max(1e-300);
                kflow::linalg::hermitian_cfn(&h, |x| c(0.0, angle * x / norm).exp())
            })
            .collect(),
    )
    .unwrap()
}

/// Piecewise-linear path of `V_t S V_t*` style keyframes: non-ideal blocks
/// keep a fixed invertible spectrum, ideal blocks are arbitrary.
pub fn random_fredholm_path(r: &mut ChaCha8Rng, alg: &VnAlgebra, keyframes: usize) -> OperatorPath {
    let spectra: Vec<Vec<f64>> = alg
        .dims()
        .into_iter()
        .map(|n| {
            (0..n)
                .map(|_| {
                    let m = r.random_range(1.0..2.0);
                    if r.random_bool(0.5) { m } else { -m }
                })
                .collect()
        })
        .collect();
    let base: Vec<CMat> = spectra.iter().map(|s| with_spectrum(r, s)).collect();
    let frames = (0..keyframes)
        .map(|k| {
            let t = k as f64 / (keyframes - 1) as f64;
            let rot = near_identity(r, alg, 0.15);
            let blocks = (0..alg.num_blocks())
                .map(|i| {
                    if alg.is_ideal(i) {
                        hermitian(r, base[i].nrows(), 1.0)
                    } else {
                        let v = rot.block(i);
                        v * &base[i] * v.adjoint()
                    }
                })
                .collect();
            (t, BlockOperator::new(blocks).unwrap())
        })
        .collect();
    OperatorPath::new(frames).unwrap()
}

/// A projection `p` and a unitary `u` with `[p, u] = 0` on the non-ideal blocks.
pub fn commuting_pair(r: &mut ChaCha8Rng, alg: &VnAlgebra) -> (BlockOperator, BlockOperator) {
    let mut pb = Vec::new();
    let mut ub = Vec::new();
    for (i, n) in alg.dims().into_iter().enumerate() {
        let rank = r.random_range(0..=n);
        let v = unitary(r, n);
        let d: Vec<f64> = (0..n).map(|j| if j < rank { 1.0 } else { 0.0 }).collect();
        pb.push(&v * kflow::linalg::from_real_diag(&d) * v.adjoint());
        if alg.is_ideal(i) {
            ub.push(unitary(r, n));
        } else {
            let mut inner = CMat::zeros(n, n);
            inner.view_mut((0, 0), (rank, rank)).copy_from(&unitary(r, rank));
            inner.view_mut((rank, rank), (n - rank, n - rank)).copy_from(&unitary(r, n - rank));
            ub.push(&v * inner * v.adjoint());
        }
    }
    (BlockOperator::new(pb).unwrap(), BlockOperator::new(ub).unwrap())
}

/// Selfadjoint `e` with spectrum in `(−0.2, 0.2) ∪ (0.8, 1.2)`, so `‖e² − e‖ < 1/4`.
pub fn near_projection(r: &mut ChaCha8Rng, alg: &VnAlgebra) -> BlockOperator {
    BlockOperator::new(
        alg.dims()
            .into_iter()
            .map(|n| {
                let s: Vec<f64> = (0..n)
                    .map(|_| r.random_range(-0.2..0.2) + if r.random_bool(0.5) { 1.0 } else { 0.0 })
                    .collect();
                with_spectrum(r, &s)
            })
            .collect(),
    )
    .unwrap()
}
