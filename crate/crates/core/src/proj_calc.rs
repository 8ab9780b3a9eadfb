//! Projection calculus: spectral projections, polar phases, kernel and
//! range projections, intersections and nearest-projection repair.
//!
//! Every projection returned here is snapped: rebuilt from an orthonormal
//! eigenbasis with eigenvalues forced to exactly 0 or 1, so rank counts
//! downstream are integers with no tolerance games.

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::tolerance::Tolerances;
use crate::vn_model::BlockOperator;

fn require_selfadjoint(t: &BlockOperator, tol: &Tolerances, what: &str) -> Result<()> {
    if t.is_selfadjoint(tol) {
        Ok(())
    } else {
        Err(Error::Precondition(format!("{what} expects a selfadjoint operator")))
    }
}

fn require_projection(p: &BlockOperator, tol: &Tolerances, what: &str) -> Result<()> {
    if p.is_projection(tol) {
        Ok(())
    } else {
        Err(Error::Precondition(format!("{what} expects projections")))
    }
}

/// Spectral projection of a Hermitian block onto eigenvalues selected by `keep`.
fn spectral_block(m: &CMat, keep: impl Fn(f64) -> bool) -> CMat {
    let (vals, vecs) = linalg::eigh(m);
    linalg::span_projection(&vecs, (0..vals.len()).filter(|&j| keep(vals[j])))
}

/// Rebuild a near projection with eigenvalues rounded to {0, 1}.
pub fn snap(p: &BlockOperator) -> BlockOperator {
    p.map_blocks(|m| spectral_block(m, |x| x > 0.5))
}

/// `χ_{[0,∞)}(T)`: the nonnegative spectral projection.
///
/// Eigenvalues in `[-ε_zero, 0)` count as zero and land in the projection, so
/// exact zero modes are always on the nonnegative side.
pub fn chi(t: &BlockOperator, tol: &Tolerances) -> Result<BlockOperator> {
    require_selfadjoint(t, tol, "chi")?;
    let eps = tol.zero_threshold(t.norm());
    Ok(t.map_blocks(|m| spectral_block(m, |x| x >= -eps)))
}

/// `χ_{[0,∞)}` of a single Hermitian block, no checks.
pub(crate) fn chi_block(m: &CMat, eps: f64) -> CMat {
    spectral_block(m, |x| x >= -eps)
}

/// Partial isometry `u` of the polar decomposition `S = u|S|`.
pub fn polar_phase(s: &BlockOperator, tol: &Tolerances) -> BlockOperator {
    let eps = tol.kernel_threshold(s.norm());
    s.map_blocks(|m| {
        let d = linalg::svd(m);
        let keep: Vec<usize> = (0..d.s.len()).filter(|&j| d.s[j] > eps).collect();
        linalg::select_columns(&d.u, &keep) * linalg::select_columns(&d.v, &keep).adjoint()
    })
}

/// `N(S)`: projection onto the kernel.
pub fn null_projection(s: &BlockOperator, tol: &Tolerances) -> BlockOperator {
    let eps = tol.kernel_threshold(s.norm());
    s.map_blocks(|m| {
        let k = linalg::kernel_basis(m, eps);
        &k * k.adjoint()
    })
}

/// `R(S)`: projection onto the closure of the range.
pub fn range_projection(s: &BlockOperator, tol: &Tolerances) -> BlockOperator {
    let eps = tol.kernel_threshold(s.norm());
    s.map_blocks(|m| {
        let d = linalg::svd(m);
        let keep: Vec<usize> = (0..d.s.len()).filter(|&j| d.s[j] > eps).collect();
        let u = linalg::select_columns(&d.u, &keep);
        &u * u.adjoint()
    })
}

/// `1 − p`.
pub fn complement(p: &BlockOperator) -> BlockOperator {
    p.map_blocks(|m| linalg::identity(m.nrows()) - m)
}

/// `p ∩ q`: projection onto `Im(p) ∩ Im(q)`, the eigenvalue-2 eigenspace of `p + q`.
pub fn proj_intersection(
    p: &BlockOperator,
    q: &BlockOperator,
    tol: &Tolerances,
) -> Result<BlockOperator> {
    require_projection(p, tol, "proj_intersection")?;
    require_projection(q, tol, "proj_intersection")?;
    let cut = 2.0 - tol.intersection;
    Ok((p + q).map_blocks(|m| spectral_block(m, |x| x > cut)))
}

/// Spectral distance from 1/2 below which [`nearest_projection`] refuses to decide.
pub const HALF_GAP: f64 = 1e-12;

/// `χ_{(1/2,∞)}(e)` for a selfadjoint `e` with `‖e² − e‖ < 1/4`.
///
/// The result satisfies `‖p − e‖ < 1/2`.
pub fn nearest_projection(e: &BlockOperator, tol: &Tolerances) -> Result<BlockOperator> {
    require_selfadjoint(e, tol, "nearest_projection")?;
    let mut out = Vec::with_capacity(e.num_blocks());
    for (i, m) in e.blocks().iter().enumerate() {
        let (vals, vecs) = linalg::eigh(m);
        if let Some(&x) = vals.iter().find(|&&x| (x - 0.5).abs() <= HALF_GAP) {
            return Err(Error::NoSpectralGap { block: i, eigenvalue: x });
        }
        // ‖e² − e‖ = max |x² − x| over the spectrum.
        let defect = vals.iter().map(|&x| (x * x - x).abs()).fold(0.0, f64::max);
        if defect >= 0.25 {
            return Err(Error::Precondition(format!(
                "nearest_projection needs ‖e² − e‖ < 1/4, block {i} has {defect}"
            )));
        }
        out.push(linalg::span_projection(&vecs, (0..vals.len()).filter(|&j| vals[j] > 0.5)));
    }
    BlockOperator::new(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use crate::vn_model::{Block, VnAlgebra};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn diag(d: &[f64]) -> BlockOperator {
        BlockOperator::from_diagonals(&[d.to_vec()])
    }

    fn close(a: &BlockOperator, b: &BlockOperator, eps: f64) -> bool {
        (a - b).norm() <= eps
    }

    #[test]
    fn chi_examples() {
        let alg = VnAlgebra::new(vec![Block::new(3, 1.0, false)]).unwrap();
        let id = BlockOperator::identity(&alg);
        assert!(close(&chi(&id, &tol()).unwrap(), &id, 1e-14));
        assert!(close(&chi(&diag(&[1.0, -1.0]), &tol()).unwrap(), &diag(&[1.0, 0.0]), 1e-14));
        // zero belongs to [0, ∞)
        assert!(close(
            &chi(&diag(&[0.0, -0.5, 2.0]), &tol()).unwrap(),
            &diag(&[1.0, 0.0, 1.0]),
            1e-14
        ));
    }

    #[test]
    fn chi_rejects_non_selfadjoint() {
        let mut m = CMat::zeros(2, 2);
        m[(0, 1)] = c(1.0, 0.0);
        let t = BlockOperator::new(vec![m]).unwrap();
        assert!(matches!(chi(&t, &tol()), Err(Error::Precondition(_))));
    }

    #[test]
    fn polar_phase_examples() {
        let s = diag(&[2.0, 0.0]);
        assert!(close(&polar_phase(&s, &tol()), &diag(&[1.0, 0.0]), 1e-14));
        let z = diag(&[0.0, 0.0, 0.0]);
        assert!(close(&polar_phase(&z, &tol()), &z, 0.0));
        let mut u = CMat::zeros(2, 2);
        u[(0, 1)] = c(0.0, 1.0);
        u[(1, 0)] = c(1.0, 0.0);
        let u = BlockOperator::new(vec![u]).unwrap();
        assert!(close(&polar_phase(&u, &tol()), &u, 1e-13));
    }

    #[test]
    fn null_projection_examples() {
        assert!(null_projection(&diag(&[1.0, 2.0]), &tol()).norm() < 1e-14);
        let z = diag(&[0.0, 0.0, 0.0]);
        assert_eq!(null_projection(&z, &tol()).projection_ranks(), vec![3]);
        assert!(close(
            &null_projection(&diag(&[1.0, 0.0, 0.0]), &tol()),
            &diag(&[0.0, 1.0, 1.0]),
            1e-14
        ));
    }

    #[test]
    fn intersection_examples() {
        let p = diag(&[1.0, 1.0, 0.0]);
        assert!(close(&proj_intersection(&p, &p, &tol()).unwrap(), &p, 1e-14));
        let q = diag(&[0.0, 0.0, 1.0]);
        assert!(proj_intersection(&p, &q, &tol()).unwrap().norm() < 1e-14);

        let h = c(0.5, 0.0);
        let m = CMat::from_row_slice(2, 2, &[h, h, h, h]);
        let diag_proj = BlockOperator::new(vec![m]).unwrap();
        let e1 = diag(&[1.0, 0.0]);
        assert!(proj_intersection(&diag_proj, &e1, &tol()).unwrap().norm() < 1e-14);

        assert!(proj_intersection(&diag(&[0.5, 0.0]), &e1, &tol()).is_err());
    }

    #[test]
    fn nearest_projection_examples() {
        let p = diag(&[1.0, 0.0, 1.0]);
        assert!(close(&nearest_projection(&p, &tol()).unwrap(), &p, 1e-14));
        assert!(close(
            &nearest_projection(&diag(&[0.9, 0.1]), &tol()).unwrap(),
            &diag(&[1.0, 0.0]),
            1e-14
        ));
        assert!(matches!(
            nearest_projection(&diag(&[0.5, 0.5]), &tol()),
            Err(Error::NoSpectralGap { .. })
        ));
    }
}
