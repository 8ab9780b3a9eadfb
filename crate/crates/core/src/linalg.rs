//! Dense complex helpers shared by the operator layers.
//!
//! Everything here works on a single square block. Hermitian problems go
//! through `SymmetricEigen` on the symmetrized matrix; general problems go
//! through the SVD.

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;

pub fn c(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

/// Hermitian part `(a + a*) / 2`.
pub fn hermitian_part(a: &CMat) -> CMat {
    (a + a.adjoint()) * c(0.5, 0.0)
}

/// Eigenpairs of the Hermitian part of `a`, eigenvalues ascending.
pub fn eigh(a: &CMat) -> (Vec<f64>, CMat) {
    let n = a.nrows();
    if n == 0 {
        return (Vec::new(), CMat::zeros(0, 0));
    }
    let eig = SymmetricEigen::new(hermitian_part(a));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMat::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(i));
    }
    (values, vectors)
}

/// Eigenvalues of the Hermitian part of `a`, ascending.
pub fn eigvalsh(a: &CMat) -> Vec<f64> {
    if a.nrows() == 0 {
        return Vec::new();
    }
    let mut v: Vec<f64> = hermitian_part(a).symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Apply a real function to a Hermitian matrix through its eigendecomposition.
pub fn hermitian_fn(a: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let (vals, vecs) = eigh(a);
    let scaled = scale_columns(&vecs, vals.iter().map(|&x| c(f(x), 0.0)));
    &scaled * vecs.adjoint()
}

/// Same as [`hermitian_fn`] with a complex-valued function.
pub fn hermitian_cfn(a: &CMat, f: impl Fn(f64) -> C64) -> CMat {
    let (vals, vecs) = eigh(a);
    let scaled = scale_columns(&vecs, vals.iter().map(|&x| f(x)));
    &scaled * vecs.adjoint()
}

fn scale_columns(m: &CMat, factors: impl Iterator<Item = C64>) -> CMat {
    let mut out = m.clone();
    for (j, s) in factors.enumerate() {
        for x in out.column_mut(j).iter_mut() {
            *x *= s;
        }
    }
    out
}

/// Orthogonal projection onto the span of the selected columns of `vecs`.
pub fn span_projection(vecs: &CMat, cols: impl Iterator<Item = usize>) -> CMat {
    let n = vecs.nrows();
    let mut p = CMat::zeros(n, n);
    for j in cols {
        let v = vecs.column(j);
        p += v * v.adjoint();
    }
    p
}

/// Columns of `vecs` selected by `cols`, as an `n x k` isometry.
pub fn select_columns(vecs: &CMat, cols: &[usize]) -> CMat {
    let mut out = CMat::zeros(vecs.nrows(), cols.len());
    for (k, &j) in cols.iter().enumerate() {
        out.set_column(k, &vecs.column(j));
    }
    out
}

pub fn singular_values(a: &CMat) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = a.clone().singular_values().iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Operator (spectral) norm; zero for empty matrices.
pub fn spectral_norm(a: &CMat) -> f64 {
    singular_values(a).first().copied().unwrap_or(0.0)
}

/// SVD `a = U diag(s) V*` of a square matrix, `s` descending, `U` and `V` unitary.
pub struct Svd {
    pub u: CMat,
    pub s: Vec<f64>,
    pub v: CMat,
}

const JACOBI_SWEEPS: usize = 80;

/// One-sided (Hestenes) Jacobi SVD. The singular vectors of nalgebra's
/// bidiagonal SVD are unreliable on rank-deficient input.
pub fn svd(a: &CMat) -> Svd {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "svd expects a square matrix");
    if n == 0 {
        return Svd { u: CMat::zeros(0, 0), s: Vec::new(), v: CMat::zeros(0, 0) };
    }
    let mut w = a.clone();
    let mut v = identity(n);
    let eps = f64::EPSILON;
    for _ in 0..JACOBI_SWEEPS {
        let mut rotated = false;
        for i in 0..n {
            for j in i + 1..n {
                let alpha = w.column(i).norm_squared();
                let beta = w.column(j).norm_squared();
                let gamma = w.column(i).dotc(&w.column(j));
                let g = gamma.norm();
                if g == 0.0 || g <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                rotate(&mut w, i, j, cs, sn, phase);
                rotate(&mut v, i, j, cs, sn, phase);
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<f64> = (0..n).map(|j| w.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));
    let tiny = f64::MIN_POSITIVE.sqrt();
    let mut u = CMat::zeros(n, n);
    let mut vs = CMat::zeros(n, n);
    let mut filled = 0;
    for (k, &j) in order.iter().enumerate() {
        vs.set_column(k, &v.column(j));
        if norms[j] > tiny {
            u.set_column(k, &(w.column(j) / c(norms[j], 0.0)));
            filled = k + 1;
        }
    }
    complete_orthonormal(&mut u, filled);
    Svd { u, s: order.iter().map(|&j| norms[j]).collect(), v: vs }
}

/// Right-multiply columns `i`, `j` by the unitary
/// `[[c, s·phase], [−s·conj(phase), c]]`.
fn rotate(m: &mut CMat, i: usize, j: usize, cs: f64, sn: f64, phase: C64) {
    for r in 0..m.nrows() {
        let (x, y) = (m[(r, i)], m[(r, j)]);
        m[(r, i)] = x * cs - y * phase.conj() * sn;
        m[(r, j)] = x * phase * sn + y * cs;
    }
}

/// Fill columns `from..` of `u` so that all columns are orthonormal,
/// assuming the first `from` already are.
fn complete_orthonormal(u: &mut CMat, from: usize) {
    let n = u.nrows();
    for k in from..n {
        let residual = |e: usize, u: &CMat| {
            let mut x = DVector::<C64>::zeros(n);
            x[e] = c(1.0, 0.0);
            for _ in 0..2 {
                for j in 0..k {
                    let proj = u.column(j).dotc(&x);
                    x -= u.column(j) * proj;
                }
            }
            x
        };
        let best = (0..n)
            .map(|e| residual(e, u))
            .max_by(|x, y| x.norm().total_cmp(&y.norm()))
            .expect("n > 0");
        let norm = best.norm();
        u.set_column(k, &(best / c(norm, 0.0)));
    }
}

/// Orthonormal basis of the kernel of a square matrix: right singular
/// vectors with singular value `<= threshold`.
pub fn kernel_basis(a: &CMat, threshold: f64) -> CMat {
    let n = a.ncols();
    if n == 0 {
        return CMat::zeros(0, 0);
    }
    // Pad to square so the SVD returns a full right basis.
    let sq = if a.nrows() >= n {
        a.clone()
    } else {
        let mut m = CMat::zeros(n, n);
        m.view_mut((0, 0), (a.nrows(), n)).copy_from(a);
        m
    };
    let d = svd(&sq);
    let cols: Vec<usize> = (0..n).filter(|&j| d.s[j] <= threshold).collect();
    select_columns(&d.v, &cols)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn from_real_diag(d: &[f64]) -> CMat {
    CMat::from_diagonal(&DVector::from_iterator(d.len(), d.iter().map(|&x| c(x, 0.0))))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svd_of_rank_deficient_matrix() {
        // rank 2 in dimension 4, complex
        let x = CMat::from_fn(4, 2, |i, j| c((i + 2 * j) as f64 - 1.5, (i * j) as f64 * 0.5 - 0.25));
        let y = CMat::from_fn(2, 4, |i, j| c(1.0 / (1.0 + i as f64 + j as f64), (i as f64) - (j as f64) * 0.3));
        let a = &x * &y;
        let d = svd(&a);
        let back = &d.u * from_real_diag(&d.s) * d.v.adjoint();
        assert!((back - &a).norm() < 1e-12 * (1.0 + a.norm()));
        assert!((d.u.adjoint() * &d.u - identity(4)).norm() < 1e-13);
        assert!((d.v.adjoint() * &d.v - identity(4)).norm() < 1e-13);
        assert!(d.s.windows(2).all(|w| w[0] >= w[1]));
        assert!(d.s[2] < 1e-13 && d.s[1] > 1e-3);
        assert_eq!(kernel_basis(&a, 1e-10).ncols(), 2);
    }

    #[test]
    fn eigh_sorts_ascending() {
        let a = from_real_diag(&[3.0, -1.0, 2.0]);
        let (vals, vecs) = eigh(&a);
        assert_eq!(vals.len(), 3);
        assert!((vals[0] + 1.0).abs() < 1e-14);
        assert!((vals[2] - 3.0).abs() < 1e-14);
        let back = &vecs * from_real_diag(&vals) * vecs.adjoint();
        assert!((back - a).norm() < 1e-12);
    }

    #[test]
    fn spectral_norm_of_diag() {
        assert!((spectral_norm(&from_real_diag(&[3.0, -2.0])) - 3.0).abs() < 1e-14);
        assert_eq!(spectral_norm(&CMat::zeros(0, 0)), 0.0);
    }

    #[test]
    fn kernel_of_rank_one() {
        let a = from_real_diag(&[1.0, 0.0, 0.0]);
        let k = kernel_basis(&a, 1e-10);
        assert_eq!(k.ncols(), 2);
        assert!((&a * &k).norm() < 1e-14);
    }
}
