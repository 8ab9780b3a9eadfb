//! Skew-corner Fredholm operators `S ∈ qNp` and their `K₀(J)`-valued index.
//!
//! `S` is `(q-p)`-Fredholm when `π(S)` is invertible as a map from
//! `π(p)` to `π(q)`. In the block model that is a statement about the
//! non-ideal blocks only: there the corner restriction of `S`, written in
//! orthonormal bases of `Im(p)` and `Im(q)`, must be a square matrix with a
//! positive smallest singular value. The index
//! `[N(S) ∩ p] − [N(S*) ∩ q]` then lives in the ideal blocks.

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::proj_calc::{null_projection, proj_intersection};
use crate::tolerance::Tolerances;
use crate::vn_model::{k0_of_difference, quotient_norm, BlockOperator, K0Class, VnAlgebra};

/// Outcome of a corner Fredholm test, with the quantitative witness.
#[derive(Debug, Clone, PartialEq)]
pub struct FredholmReport {
    pub fredholm: bool,
    /// Smallest singular value of the corner restriction over the non-ideal
    /// blocks; `0` for a rank mismatch, `+∞` when no non-ideal block constrains.
    pub min_gap: f64,
    /// Block attaining `min_gap`.
    pub worst_block: Option<usize>,
}

/// Orthonormal basis of the range of a projection block.
fn range_basis(p: &CMat) -> CMat {
    let (vals, vecs) = linalg::eigh(p);
    let cols: Vec<usize> = (0..vals.len()).filter(|&j| vals[j] > 0.5).collect();
    linalg::select_columns(&vecs, &cols)
}

/// The corner `q S p` on block `i` as a `rank(q_i) x rank(p_i)` matrix.
pub fn corner_restriction(s: &BlockOperator, p: &BlockOperator, q: &BlockOperator, i: usize) -> CMat {
    let pb = range_basis(p.block(i));
    let qb = range_basis(q.block(i));
    qb.adjoint() * s.block(i) * pb
}

fn check_corner(
    s: &BlockOperator,
    p: &BlockOperator,
    q: &BlockOperator,
    alg: &VnAlgebra,
    tol: &Tolerances,
) -> Result<()> {
    s.conforms(alg)?;
    p.conforms(alg)?;
    q.conforms(alg)?;
    if !p.is_projection(tol) || !q.is_projection(tol) {
        return Err(Error::Precondition("corner projections must be projections".into()));
    }
    let off = (s - &(&(q * s) * p)).norm();
    if off > tol.projection_slack(s.norm()) {
        return Err(Error::Precondition(format!("operator is not in qNp (‖S − qSp‖ = {off:e})")));
    }
    Ok(())
}

/// Decide whether `S ∈ qNp` is `(q-p)`-Fredholm.
pub fn is_corner_fredholm(
    s: &BlockOperator,
    p: &BlockOperator,
    q: &BlockOperator,
    alg: &VnAlgebra,
    tol: &Tolerances,
) -> Result<FredholmReport> {
    check_corner(s, p, q, alg, tol)?;
    let ranks_p = p.projection_ranks();
    let ranks_q = q.projection_ranks();
    let mut min_gap = f64::INFINITY;
    let mut worst_block = None;
    for i in alg.quotient_blocks() {
        let gap = if ranks_p[i] != ranks_q[i] {
            0.0
        } else if ranks_p[i] == 0 {
            f64::INFINITY
        } else {
            linalg::singular_values(&corner_restriction(s, p, q, i))
                .last()
                .copied()
                .unwrap_or(0.0)
        };
        if gap < min_gap {
            min_gap = gap;
            worst_block = Some(i);
        }
    }
    Ok(FredholmReport { fredholm: min_gap > tol.gap, min_gap, worst_block })
}

fn ensure_ideal_supported(x: &BlockOperator, alg: &VnAlgebra, tol: &Tolerances, what: &str) -> Result<()> {
    let n = quotient_norm(x, alg)?;
    if n > tol.projection_slack(1.0) {
        return Err(Error::ClassNotInK0(format!("{what} has quotient norm {n:e}")));
    }
    Ok(())
}

/// `Ind_{(q-p)}(S) = [N(S) ∩ p] − [N(S*) ∩ q]`.
pub fn corner_index(
    s: &BlockOperator,
    p: &BlockOperator,
    q: &BlockOperator,
    alg: &VnAlgebra,
    tol: &Tolerances,
) -> Result<K0Class> {
    let report = is_corner_fredholm(s, p, q, alg, tol)?;
    if !report.fredholm {
        return Err(Error::NotFredholm(format!(
            "corner gap {:e} on block {:?}",
            report.min_gap, report.worst_block
        )));
    }
    let ker = proj_intersection(&null_projection(s, tol), p, tol)?;
    let coker = proj_intersection(&null_projection(&s.adjoint(), tol), q, tol)?;
    ensure_ideal_supported(&ker, alg, tol, "N(S) ∩ p")?;
    ensure_ideal_supported(&coker, alg, tol, "N(S*) ∩ q")?;
    k0_of_difference(&ker, &coker, alg, tol)
}

/// `∂[π(S)] = [N(S)] − [N(S*)]` for `S` with `π(S)` unitary.
pub fn boundary_map(s: &BlockOperator, alg: &VnAlgebra, tol: &Tolerances) -> Result<K0Class> {
    s.conforms(alg)?;
    let id = BlockOperator::identity(alg);
    let left = quotient_norm(&(&(&s.adjoint() * s) - &id), alg)?;
    let right = quotient_norm(&(&(s * &s.adjoint()) - &id), alg)?;
    if left.max(right) > tol.gap {
        return Err(Error::Precondition(format!(
            "π(S) is not unitary (‖π(S*S − 1)‖ = {left:e}, ‖π(SS* − 1)‖ = {right:e})"
        )));
    }
    k0_of_difference(&null_projection(s, tol), &null_projection(&s.adjoint(), tol), alg, tol)
}
