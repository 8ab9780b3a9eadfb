//! `K₀(J)`-valued spectral flow of paths of selfadjoint `J`-Fredholm operators.
//!
//! A path is first certified (its quotient image stays invertible), then cut
//! into pieces on which `π(χ(B_t))` moves by less than 1/2. With
//! `p_i = χ(B_{t_i})` the flow is
//!
//! ```text
//! sf{B_t} = Σ_i [(1 − p_i) ∩ p_{i−1}] − [(1 − p_{i−1}) ∩ p_i]
//! ```
//!
//! and must agree with the closed form
//! `[N(p_n⋯p_0) ∩ p_0] − [N(p_0⋯p_n) ∩ p_n]`; both are computed.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::proj_calc::{chi, chi_block, complement, null_projection, proj_intersection};
use crate::tolerance::Tolerances;
use crate::vn_model::{
    k0_of_difference, quotient_norm, tau_star, BlockOperator, K0Class, OperatorPath, VnAlgebra,
};

/// Witness that a path stays inside the selfadjoint `J`-Fredholm operators.
#[derive(Debug, Clone, PartialEq)]
pub struct PathCertificate {
    /// Smallest `|λ|` over quotient eigenvalues at the sampled times (`+∞` when `J = N`).
    pub min_gap: f64,
    /// Largest `‖π(Ḃ_t)‖` over the linear pieces.
    pub max_lipschitz: f64,
    /// Number of sampled times.
    pub samples: usize,
}

/// Distance from 0 of the quotient spectrum of `op`.
pub fn quotient_gap(op: &BlockOperator, alg: &VnAlgebra) -> f64 {
    alg.quotient_blocks()
        .into_iter()
        .flat_map(|i| linalg::eigvalsh(op.block(i)))
        .map(f64::abs)
        .fold(f64::INFINITY, f64::min)
}

fn check_selfadjoint_keyframes(path: &OperatorPath, alg: &VnAlgebra, tol: &Tolerances) -> Result<()> {
    path.conforms(alg)?;
    for (t, op) in path.keyframes() {
        if !op.is_selfadjoint(tol) {
            return Err(Error::Precondition(format!("keyframe at t = {t} is not selfadjoint")));
        }
    }
    Ok(())
}

/// Certify that every `π(B_t)` is invertible.
///
/// On a linear piece, Weyl's inequality bounds eigenvalue motion by
/// `‖π(B_s) − π(B_r)‖ = L |s − r|`, so `[a, b]` is certified once
/// `gap(a) + gap(b) > L (b − a)`; otherwise it is bisected.
pub fn certify_path(path: &OperatorPath, alg: &VnAlgebra, tol: &Tolerances) -> Result<PathCertificate> {
    check_selfadjoint_keyframes(path, alg, tol)?;
    if alg.is_all_ideal() {
        return Ok(PathCertificate { min_gap: f64::INFINITY, max_lipschitz: 0.0, samples: 0 });
    }
    let mut cert = PathCertificate { min_gap: f64::INFINITY, max_lipschitz: 0.0, samples: 0 };
    for w in path.keyframes().windows(2) {
        let (t0, b0) = (&w[0].0, &w[0].1);
        let (t1, b1) = (&w[1].0, &w[1].1);
        let slope = quotient_norm(&(b1 - b0), alg)? / (t1 - t0);
        cert.max_lipschitz = cert.max_lipschitz.max(slope);
        let g0 = sample_gap(path, alg, tol, *t0, &mut cert)?;
        let g1 = sample_gap(path, alg, tol, *t1, &mut cert)?;
        certify_piece(path, alg, tol, slope, (*t0, g0), (*t1, g1), 0, &mut cert)?;
    }
    Ok(cert)
}

fn sample_gap(
    path: &OperatorPath,
    alg: &VnAlgebra,
    tol: &Tolerances,
    t: f64,
    cert: &mut PathCertificate,
) -> Result<f64> {
    let g = quotient_gap(&path.eval(t), alg);
    cert.samples += 1;
    cert.min_gap = cert.min_gap.min(g);
    if g <= tol.gap {
        return Err(Error::PathNotFredholm { t, gap: g });
    }
    Ok(g)
}

#[allow(clippy::too_many_arguments)]
fn certify_piece(
    path: &OperatorPath,
    alg: &VnAlgebra,
    tol: &Tolerances,
    slope: f64,
    (a, ga): (f64, f64),
    (b, gb): (f64, f64),
    depth: u32,
    cert: &mut PathCertificate,
) -> Result<()> {
    // |λ(t)| ≥ g_a − L(t − a) and ≥ g_b − L(b − t); both bounds must stay above the gap
    if (ga - tol.gap) + (gb - tol.gap) > slope * (b - a) * (1.0 + 4.0 * f64::EPSILON) {
        return Ok(());
    }
    let mid = 0.5 * (a + b);
    if depth >= tol.max_depth {
        return Err(Error::PathNotFredholm { t: mid, gap: ga.min(gb) });
    }
    let gm = sample_gap(path, alg, tol, mid, cert)?;
    certify_piece(path, alg, tol, slope, (a, ga), (mid, gm), depth + 1, cert)?;
    certify_piece(path, alg, tol, slope, (mid, gm), (b, gb), depth + 1, cert)
}

/// Memoized `π(χ(B_t))`, one matrix per quotient block.
struct QuotientChi<'a> {
    path: &'a OperatorPath,
    blocks: Vec<usize>,
    tol: &'a Tolerances,
    cache: HashMap<u64, Vec<CMat>>,
}

impl<'a> QuotientChi<'a> {
    fn new(path: &'a OperatorPath, alg: &VnAlgebra, tol: &'a Tolerances) -> Self {
        Self { path, blocks: alg.quotient_blocks(), tol, cache: HashMap::new() }
    }

    fn at(&mut self, t: f64) -> &Vec<CMat> {
        let (path, blocks, tol) = (self.path, &self.blocks, self.tol);
        self.cache.entry(t.to_bits()).or_insert_with(|| {
            let op = path.eval(t);
            let eps = tol.zero_threshold(op.norm());
            blocks.iter().map(|&i| chi_block(op.block(i), eps)).collect()
        })
    }

    fn distance(&mut self, s: f64, t: f64) -> f64 {
        let a = self.at(s).clone();
        let b = self.at(t);
        a.iter().zip(b).map(|(x, y)| linalg::spectral_norm(&(x - y))).fold(0.0, f64::max)
    }
}

/// Partition `0 = t_0 < … < t_n = 1` with quotient projection distance
/// below `1/2 − margin` across every piece, found by bisection.
pub fn find_partition(path: &OperatorPath, alg: &VnAlgebra, tol: &Tolerances) -> Result<Vec<f64>> {
    path.conforms(alg)?;
    let mut out = vec![0.0];
    if alg.is_all_ideal() {
        out.push(1.0);
        return Ok(out);
    }
    let mut qchi = QuotientChi::new(path, alg, tol);
    let bound = 0.5 - tol.partition_margin;
    split(&mut qchi, 0.0, 1.0, 0, bound, tol, &mut out)?;
    Ok(out)
}

fn split(
    qchi: &mut QuotientChi<'_>,
    a: f64,
    b: f64,
    depth: u32,
    bound: f64,
    tol: &Tolerances,
    out: &mut Vec<f64>,
) -> Result<()> {
    let n = 1usize << tol.check_depth;
    let grid: Vec<f64> = (0..=n)
        .map(|k| if k == n { b } else { a + (b - a) * k as f64 / n as f64 })
        .collect();
    let mut worst: f64 = 0.0;
    for (i, &s) in grid.iter().enumerate() {
        for &t in &grid[i + 1..] {
            worst = worst.max(qchi.distance(s, t));
        }
    }
    if worst < bound {
        out.push(b);
        return Ok(());
    }
    if depth >= tol.max_depth {
        return Err(Error::PartitionFailure { start: a, end: b, distance: worst });
    }
    let mid = 0.5 * (a + b);
    split(qchi, a, mid, depth + 1, bound, tol, out)?;
    split(qchi, mid, b, depth + 1, bound, tol, out)
}

/// One partition point in the flow trace.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowStep {
    pub t: f64,
    /// Quotient spectral gap of `B_t`.
    pub gap: f64,
    /// `[(1 − p_i) ∩ p_{i−1}] − [(1 − p_{i−1}) ∩ p_i]`; zero for `t_0`.
    pub contribution: K0Class,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFlowReport {
    pub class: K0Class,
    pub certificate: PathCertificate,
    pub steps: Vec<FlowStep>,
}

impl SpectralFlowReport {
    pub fn partition(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.t).collect()
    }
}

/// Flow over an explicit partition. The partition is trusted; use
/// [`spectral_flow`] unless a specific (e.g. refined) partition is wanted.
pub fn spectral_flow_on_partition(
    path: &OperatorPath,
    alg: &VnAlgebra,
    partition: &[f64],
    tol: &Tolerances,
) -> Result<(K0Class, Vec<K0Class>)> {
    if partition.len() < 2 || partition[0] != 0.0 || partition[partition.len() - 1] != 1.0 {
        return Err(Error::Model("partition must run from 0 to 1".into()));
    }
    let projections: Vec<BlockOperator> =
        partition.iter().map(|&t| chi(&path.eval(t), tol)).collect::<Result<_>>()?;
    let mut steps = Vec::with_capacity(projections.len() - 1);
    let mut total = K0Class::zero(alg);
    for w in projections.windows(2) {
        let (prev, cur) = (&w[0], &w[1]);
        let down = proj_intersection(&complement(cur), prev, tol)?;
        let up = proj_intersection(&complement(prev), cur, tol)?;
        let step = k0_of_difference(&down, &up, alg, tol)?;
        total += step.clone();
        steps.push(step);
    }

    let closed = closed_form(&projections, alg, tol)?;
    if closed != total {
        return Err(Error::Consistency(format!(
            "partition sum {total} differs from closed form {closed}"
        )));
    }
    Ok((total, steps))
}

/// `[N(p_n⋯p_0) ∩ p_0] − [N(p_0⋯p_n) ∩ p_n]`.
fn closed_form(projections: &[BlockOperator], alg: &VnAlgebra, tol: &Tolerances) -> Result<K0Class> {
    let first = &projections[0];
    let last = &projections[projections.len() - 1];
    let product = projections[1..].iter().fold(first.clone(), |acc, p| p * &acc);
    let ker = proj_intersection(&null_projection(&product, tol), first, tol)?;
    let coker = proj_intersection(&null_projection(&product.adjoint(), tol), last, tol)?;
    k0_of_difference(&ker, &coker, alg, tol)
}

/// Spectral flow with the full partition trace.
pub fn spectral_flow_report(
    path: &OperatorPath,
    alg: &VnAlgebra,
    tol: &Tolerances,
) -> Result<SpectralFlowReport> {
    let certificate = certify_path(path, alg, tol)?;
    let partition = find_partition(path, alg, tol)?;
    let (class, contributions) = spectral_flow_on_partition(path, alg, &partition, tol)?;
    let steps = partition
        .iter()
        .enumerate()
        .map(|(i, &t)| FlowStep {
            t,
            gap: quotient_gap(&path.eval(t), alg),
            contribution: if i == 0 { K0Class::zero(alg) } else { contributions[i - 1].clone() },
        })
        .collect();
    Ok(SpectralFlowReport { class, certificate, steps })
}

pub fn spectral_flow(path: &OperatorPath, alg: &VnAlgebra, tol: &Tolerances) -> Result<K0Class> {
    spectral_flow_report(path, alg, tol).map(|r| r.class)
}

/// `τ_*(sf{B_t})`.
pub fn numeric_spectral_flow(path: &OperatorPath, alg: &VnAlgebra, tol: &Tolerances) -> Result<f64> {
    tau_star(&spectral_flow(path, alg, tol)?, alg)
}

/// One eigenvalue sample for CSV output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackPoint {
    pub t: f64,
    pub block: usize,
    pub index: usize,
    pub eigenvalue: f64,
}

/// Sorted eigenvalues of every block at `samples + 1` uniform times.
pub fn eigenvalue_tracks(path: &OperatorPath, samples: usize) -> Vec<TrackPoint> {
    let samples = samples.max(1);
    let mut out = Vec::new();
    for k in 0..=samples {
        let t = if k == samples { 1.0 } else { k as f64 / samples as f64 };
        let op = path.eval(t);
        for (block, m) in op.blocks().iter().enumerate() {
            for (index, eigenvalue) in linalg::eigvalsh(m).into_iter().enumerate() {
                out.push(TrackPoint { t, block, index, eigenvalue });
            }
        }
    }
    out
}
