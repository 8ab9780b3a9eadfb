//! Reproducible model generators and an eigenvalue-crossing oracle.
//!
//! Everything here is deterministic given its arguments. The oracle follows
//! sorted eigenvalue curves along a path and counts sign changes, which is a
//! route to spectral flow independent of the projection calculus.

use std::fmt;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::kk_pairing::{pairing_via_boundary, Embedding, PairingData};
use crate::linalg::{self, c, CMat};
use crate::proj_calc::complement;
use crate::spec_flow::spectral_flow;
use crate::spectral_triple::{
    bounded_transform_path, conjugation_path, sf_unbounded, sf_unitary, VnTriple,
};
use crate::tolerance::Tolerances;
use crate::vn_model::{Block, BlockOperator, K0Class, OperatorPath, VnAlgebra};

/// Contribution of one eigenvalue moving from negative to positive.
///
/// Frozen by the dim-2 calibration path `diag(1, −1) → diag(1, 1)`, whose
/// spectral flow has rank vector `(−1)`.
pub const UPWARD_CROSSING_SIGN: i64 = -1;

/// Largest number of crossings [`random_crossing_path`] will schedule.
pub const MAX_CROSSINGS: usize = 14;

/// Keyframes per random crossing path.
pub const CROSSING_PATH_KEYFRAMES: usize = 65;

/// Fewest samples [`crossing_oracle`] accepts.
pub const MIN_ORACLE_SAMPLES: usize = 1000;

/// Eigenvalues this close to zero at an endpoint are treated as zero.
const ENDPOINT_ZERO: f64 = 1e-12;

/// The dim-2 all-ideal calibration instance `diag(1, −1) → diag(1, 1)`.
pub fn calibration_path() -> (VnAlgebra, OperatorPath) {
    let alg = VnAlgebra::single_ideal(2).expect("dim 2");
    let path = OperatorPath::linear(
        BlockOperator::from_diagonals(&[vec![1.0, -1.0]]),
        BlockOperator::from_diagonals(&[vec![1.0, 1.0]]),
    )
    .expect("linear path");
    (alg, path)
}

/// Blocks with the given dimensions, trace weights and ideal mask.
pub fn weighted_model(dims: &[usize], weights: &[f64], ideal_mask: &[bool]) -> Result<VnAlgebra> {
    if dims.len() != weights.len() || dims.len() != ideal_mask.len() {
        return Err(Error::Model(format!(
            "{} dims, {} weights and {} mask entries",
            dims.len(),
            weights.len(),
            ideal_mask.len()
        )));
    }
    VnAlgebra::new(
        dims.iter()
            .zip(weights)
            .zip(ideal_mask)
            .map(|((&d, &w), &m)| Block::new(d, w, m))
            .collect(),
    )
}

/// Truncated circle Dirac model on the window `j = −m..m`.
#[derive(Debug, Clone)]
pub struct DiracModel {
    pub triple: VnTriple,
    /// Name of the winding unitary among the generators.
    pub unitary: String,
    pub radius: usize,
    pub winding: i64,
}

/// `k`-step cyclic shift `e_j ↦ e_{j+k}` on `2m + 1` basis vectors indexed `−m..m`.
pub fn winding_shift(m: usize, k: i64) -> CMat {
    let n = 2 * m + 1;
    let shift = k.rem_euclid(n as i64) as usize;
    let mut u = CMat::zeros(n, n);
    for i in 0..n {
        u[((i + shift) % n, i)] = c(1.0, 0.0);
    }
    u
}

/// Single all-ideal block of dimension `2m + 1`, `D = diag(−m, …, m)`, the
/// winding-`k` shift `u`, and generators `{1, u, u*}`.
pub fn dirac_circle(m: usize, k: i64, tol: &Tolerances) -> Result<DiracModel> {
    if m < 2 {
        return Err(Error::Precondition(format!("window radius {m} is below 2")));
    }
    if k.unsigned_abs() as usize > m - 1 {
        return Err(Error::Precondition(format!("winding {k} does not fit the window of radius {m}")));
    }
    let n = 2 * m + 1;
    let alg = VnAlgebra::single_ideal(n)?;
    let radius = m as i64;
    let dirac = BlockOperator::from_diagonals(&[(-radius..=radius).map(|j| j as f64).collect()]);
    let u = BlockOperator::new(vec![winding_shift(m, k)])?;
    let generators = vec![
        ("1".to_string(), BlockOperator::identity(&alg)),
        ("u*".to_string(), u.adjoint()),
        ("u".to_string(), u),
    ];
    let triple = VnTriple::new(alg, generators, dirac, tol)?;
    Ok(DiracModel { triple, unitary: "u".into(), radius: m, winding: k })
}

impl DiracModel {
    pub fn unitary_op(&self) -> &BlockOperator {
        self.triple.generator(&self.unitary).expect("winding unitary is a generator")
    }

    /// `pup + 1 − p` with `p = χ(F_D)`.
    pub fn compressed_symbol(&self, tol: &Tolerances) -> Result<BlockOperator> {
        let p = self.triple.positive_projection(tol)?;
        Ok(&(&(&p * self.unitary_op()) * &p) + &complement(&p))
    }
}

/// The four routes to the winding class of a [`DiracModel`].
#[derive(Debug, Clone, PartialEq)]
pub struct DiracRoutes {
    pub sf_unitary: K0Class,
    /// `sf_unbounded` on `t ↦ D + t(u*Du − D)`.
    pub sf_unbounded: K0Class,
    /// `spectral_flow` on the bounded transforms of the same path.
    pub spectral_flow: K0Class,
    /// `pairing_via_boundary` with `ψ = id` and `p = χ(F_D)`.
    pub pairing: K0Class,
}

impl DiracRoutes {
    pub fn agree(&self) -> bool {
        self.sf_unitary == self.sf_unbounded
            && self.sf_unitary == self.spectral_flow
            && self.sf_unitary == self.pairing
    }
}

pub fn dirac_routes(model: &DiracModel, tol: &Tolerances) -> Result<DiracRoutes> {
    let triple = &model.triple;
    let alg = triple.algebra();
    let perturbation = conjugation_path(triple, &model.unitary)?;
    let bounded = bounded_transform_path(triple, &perturbation, 16, tol)?;
    let data = PairingData::new(
        alg.clone(),
        Embedding::Identity,
        triple.positive_projection(tol)?,
        model.unitary_op().clone(),
        tol,
    )?;
    Ok(DiracRoutes {
        sf_unitary: sf_unitary(triple, &model.unitary, tol)?,
        sf_unbounded: sf_unbounded(triple, &perturbation, tol)?,
        spectral_flow: spectral_flow(&bounded, alg, tol)?,
        pairing: pairing_via_boundary(&data, tol)?,
    })
}

/// Where the kernel and cokernel of the compressed symbol `pup + 1 − p` live.
///
/// In a finite window the two always have equal dimension, so the boundary
/// class vanishes. The winding is still visible in where they sit: one side
/// is pinned to the truncation edge and the other to the interior.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SymbolLocalization {
    pub kernel_dim: usize,
    pub cokernel_dim: usize,
    /// Kernel dimension carried by `|j| ≤ m/2`, rounded.
    pub interior_kernel: usize,
    /// Cokernel dimension carried by `|j| ≤ m/2`, rounded.
    pub interior_cokernel: usize,
}

impl SymbolLocalization {
    /// Interior kernel minus interior cokernel; `−k` for `m ≥ 2|k| + 2`.
    pub fn interior_index(&self) -> i64 {
        self.interior_kernel as i64 - self.interior_cokernel as i64
    }
}

pub fn symbol_localization(model: &DiracModel, tol: &Tolerances) -> Result<SymbolLocalization> {
    let s = model.compressed_symbol(tol)?;
    let s = s.block(0);
    let threshold = tol.kernel_threshold(linalg::spectral_norm(s));
    let m = model.radius as i64;
    let interior = DVector::from_iterator(
        s.nrows(),
        (-m..=m).map(|j| if 2 * j.abs() <= m { 1.0 } else { 0.0 }),
    );
    let localize = |basis: CMat| {
        let mut mass = 0.0;
        for col in basis.column_iter() {
            mass += col.iter().zip(interior.iter()).map(|(z, w)| z.norm_sqr() * w).sum::<f64>();
        }
        (basis.ncols(), mass.round() as usize)
    };
    let (kernel_dim, interior_kernel) = localize(linalg::kernel_basis(s, threshold));
    let (cokernel_dim, interior_cokernel) = localize(linalg::kernel_basis(&s.adjoint(), threshold));
    Ok(SymbolLocalization { kernel_dim, cokernel_dim, interior_kernel, interior_cokernel })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Crossing {
    /// An eigenvalue moves from negative to positive.
    Up,
    Down,
}

impl Crossing {
    pub fn direction(self) -> f64 {
        match self {
            Crossing::Up => 1.0,
            Crossing::Down => -1.0,
        }
    }
}

impl fmt::Display for Crossing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Crossing::Up => "+",
            Crossing::Down => "-",
        })
    }
}

impl std::str::FromStr for Crossing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "+" | "up" | "+1" => Ok(Crossing::Up),
            "-" | "down" | "-1" => Ok(Crossing::Down),
            other => Err(Error::Model(format!("unknown crossing {other:?}"))),
        }
    }
}

/// Net spectral flow of a crossing schedule under [`UPWARD_CROSSING_SIGN`].
pub fn net_crossings(crossings: &[Crossing]) -> i64 {
    crossings
        .iter()
        .map(|c| match c {
            Crossing::Up => UPWARD_CROSSING_SIGN,
            Crossing::Down => -UPWARD_CROSSING_SIGN,
        })
        .sum()
}

/// A path `B_t = V(t) diag(levels, curves(t)) V(t)*` on one all-ideal block.
///
/// The `n − c` fixed levels have modulus in `[0.5, 2]`. Crossing `j` is the
/// curve `±0.4 tanh(4(t − t_j))` with the `t_j` separated inside
/// `[0.15, 0.85]`, and `V(t) = exp(itH)` for a seeded Hermitian `H` of norm 1.
/// The path is sampled at [`CROSSING_PATH_KEYFRAMES`] uniform keyframes.
pub fn random_crossing_path(n: usize, crossings: &[Crossing], seed: u64) -> Result<OperatorPath> {
    if crossings.len() > MAX_CROSSINGS {
        return Err(Error::Precondition(format!(
            "{} crossings exceed the schedulable maximum of {MAX_CROSSINGS}",
            crossings.len()
        )));
    }
    if n < crossings.len() + 1 {
        return Err(Error::Precondition(format!(
            "dimension {n} cannot host {} crossings and a fixed level",
            crossings.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let levels: Vec<f64> = (0..n - crossings.len())
        .map(|_| {
            let magnitude = rng.random_range(0.5..=2.0);
            if rng.random_bool(0.5) { magnitude } else { -magnitude }
        })
        .collect();

    let spacing = 0.7 / crossings.len().max(1) as f64;
    let times: Vec<f64> = (0..crossings.len())
        .map(|j| 0.15 + spacing * (j as f64 + 0.5) + rng.random_range(-0.25..=0.25) * spacing)
        .collect();

    let mut h = CMat::from_fn(n, n, |_, _| c(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    h = linalg::hermitian_part(&h);
    let norm = linalg::spectral_norm(&h);
    if norm > 0.0 {
        h /= c(norm, 0.0);
    }
    let (h_eigs, h_vecs) = linalg::eigh(&h);

    OperatorPath::sampled(CROSSING_PATH_KEYFRAMES, |t| {
        let mut diag = levels.clone();
        diag.extend(
            crossings
                .iter()
                .zip(&times)
                .map(|(dir, &tj)| dir.direction() * 0.4 * (4.0 * (t - tj)).tanh()),
        );
        let phases = DVector::from_iterator(n, h_eigs.iter().map(|&e| c(0.0, t * e).exp()));
        let v = &h_vecs * CMat::from_diagonal(&phases) * h_vecs.adjoint();
        let b = &v * linalg::from_real_diag(&diag) * v.adjoint();
        BlockOperator::new(vec![linalg::hermitian_part(&b)]).expect("square block")
    })
}

/// Signed zero-crossing count per block, under [`UPWARD_CROSSING_SIGN`].
///
/// Eigenvalues are sorted at each of `samples + 1` uniform times; the `i`-th
/// sorted curve is followed from sample to sample. Two curves changing sign
/// in the same sample interval make the matching ambiguous and are reported
/// as an error.
pub fn crossing_oracle_by_block(path: &OperatorPath, samples: usize) -> Result<Vec<i64>> {
    if samples < MIN_ORACLE_SAMPLES {
        return Err(Error::Precondition(format!(
            "crossing oracle needs at least {MIN_ORACLE_SAMPLES} samples, got {samples}"
        )));
    }
    let spectra: Vec<Vec<Vec<f64>>> = (0..=samples)
        .map(|k| {
            let t = k as f64 / samples as f64;
            path.eval(t).blocks().iter().map(linalg::eigvalsh).collect()
        })
        .collect();

    let blocks = path.start().num_blocks();
    let mut counts = vec![0i64; blocks];
    for (b, count) in counts.iter_mut().enumerate() {
        for endpoint in [&spectra[0][b], &spectra[samples][b]] {
            if let Some(z) = endpoint.iter().find(|x| x.abs() <= ENDPOINT_ZERO) {
                return Err(Error::Precondition(format!(
                    "block {b} has eigenvalue {z:e} at an endpoint"
                )));
            }
        }
        // A curve sitting exactly on zero keeps its previous sign.
        let mut signs: Vec<bool> = spectra[0][b].iter().map(|&x| x > 0.0).collect();
        for (k, spectrum) in spectra.iter().enumerate().skip(1) {
            let mut changed = 0;
            for (i, &x) in spectrum[b].iter().enumerate() {
                if x == 0.0 {
                    continue;
                }
                let positive = x > 0.0;
                if positive != signs[i] {
                    changed += 1;
                    *count += if positive { UPWARD_CROSSING_SIGN } else { -UPWARD_CROSSING_SIGN };
                    signs[i] = positive;
                }
            }
            if changed > 1 {
                let t = k as f64 / samples as f64;
                return Err(Error::Numerical {
                    message: format!(
                        "{changed} eigenvalue curves of block {b} cross zero before t = {t}; increase samples"
                    ),
                    residual: 1.0 / samples as f64,
                });
            }
        }
    }
    Ok(counts)
}

/// Total signed zero-crossing count over all blocks. See [`crossing_oracle_by_block`].
pub fn crossing_oracle(path: &OperatorPath, samples: usize) -> Result<i64> {
    crossing_oracle_by_block(path, samples).map(|v| v.iter().sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vn_model::tau_star;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn calibration_fixes_the_oracle_sign() {
        let (alg, path) = calibration_path();
        let sf = spectral_flow(&path, &alg, &tol()).unwrap();
        assert_eq!(sf, K0Class::new(vec![-1]));
        // diag(1, −1) → diag(1, 1) has one upward crossing, at t = 1/2;
        // the oracle needs an endpoint free of zero, which this path has.
        assert_eq!(crossing_oracle(&path, 1000).unwrap(), -1);
        assert_eq!(crossing_oracle(&path.reversed(), 1000).unwrap(), 1);
    }

    #[test]
    fn oracle_on_half_shift_path() {
        // diag(1, t − 1/2)
        let path = OperatorPath::linear(
            BlockOperator::from_diagonals(&[vec![1.0, -0.5]]),
            BlockOperator::from_diagonals(&[vec![1.0, 0.5]]),
        )
        .unwrap();
        let alg = VnAlgebra::single_ideal(2).unwrap();
        let flow = spectral_flow(&path, &alg, &tol()).unwrap();
        assert_eq!(flow.ranks()[0], crossing_oracle(&path, 1000).unwrap());
    }

    #[test]
    fn oracle_constant_path_and_errors() {
        let a = BlockOperator::from_diagonals(&[vec![1.0, -2.0, 0.5]]);
        let path = OperatorPath::linear(a.clone(), a).unwrap();
        assert_eq!(crossing_oracle(&path, 1000).unwrap(), 0);
        assert!(matches!(crossing_oracle(&path, 10), Err(Error::Precondition(_))));

        let zero_end = OperatorPath::linear(
            BlockOperator::from_diagonals(&[vec![1.0, -1.0]]),
            BlockOperator::from_diagonals(&[vec![1.0, 0.0]]),
        )
        .unwrap();
        assert!(matches!(crossing_oracle(&zero_end, 1000), Err(Error::Precondition(_))));

        // Two eigenvalues cross zero at the same instant.
        let collision = OperatorPath::linear(
            BlockOperator::from_diagonals(&[vec![-1.0, -1.0]]),
            BlockOperator::from_diagonals(&[vec![1.0, 1.0]]),
        )
        .unwrap();
        let err = crossing_oracle(&collision, 1000).unwrap_err();
        assert!(err.to_string().contains("increase samples"));
    }

    #[test]
    fn random_paths_are_deterministic_and_match_schedule() {
        let sched = [Crossing::Up, Crossing::Up, Crossing::Down];
        let a = random_crossing_path(4, &sched, 7).unwrap();
        let b = random_crossing_path(4, &sched, 7).unwrap();
        assert_eq!(a.keyframes(), b.keyframes());
        let alg = VnAlgebra::single_ideal(4).unwrap();
        let oracle = crossing_oracle(&a, 2000).unwrap();
        assert_eq!(oracle, net_crossings(&sched));
        assert_eq!(oracle, -1);
        assert_eq!(spectral_flow(&a, &alg, &tol()).unwrap().ranks()[0], oracle);

        let empty = random_crossing_path(3, &[], 1).unwrap();
        assert!(spectral_flow(&empty, &VnAlgebra::single_ideal(3).unwrap(), &tol()).unwrap().is_zero());

        let single = random_crossing_path(2, &[Crossing::Up], 3).unwrap();
        let alg2 = VnAlgebra::single_ideal(2).unwrap();
        let (calib_alg, calib) = calibration_path();
        assert_eq!(
            tau_star(&spectral_flow(&single, &alg2, &tol()).unwrap(), &alg2).unwrap(),
            tau_star(&spectral_flow(&calib, &calib_alg, &tol()).unwrap(), &calib_alg).unwrap()
        );
    }

    #[test]
    fn infeasible_schedules_are_rejected() {
        assert!(random_crossing_path(2, &[Crossing::Up, Crossing::Down], 0).is_err());
        assert!(random_crossing_path(40, &[Crossing::Up; 15], 0).is_err());
    }

    #[test]
    fn weighted_models() {
        let alg = weighted_model(&[2], &[0.5], &[true]).unwrap();
        let (_, path) = calibration_path();
        let sf = spectral_flow(&path, &alg, &tol()).unwrap();
        assert_eq!(tau_star(&sf, &alg).unwrap(), -0.5);
        assert!(weighted_model(&[2, 2], &[1.0], &[true, true]).is_err());
    }

    #[test]
    fn dirac_circle_shape_and_errors() {
        let model = dirac_circle(3, 1, &tol()).unwrap();
        assert_eq!(model.triple.algebra().dims(), vec![7]);
        assert_eq!(model.triple.dirac().block(0)[(0, 0)].re, -3.0);
        assert!(model.unitary_op().is_unitary(&tol()));
        assert!(matches!(dirac_circle(1, 0, &tol()), Err(Error::Precondition(_))));
        assert!(matches!(dirac_circle(3, 3, &tol()), Err(Error::Precondition(_))));
        assert!(matches!(dirac_circle(3, -3, &tol()), Err(Error::Precondition(_))));
    }

    #[test]
    fn zero_winding_is_trivial() {
        let model = dirac_circle(4, 0, &tol()).unwrap();
        assert!((model.unitary_op() - &BlockOperator::identity(model.triple.algebra())).norm() == 0.0);
        let routes = dirac_routes(&model, &tol()).unwrap();
        assert!(routes.agree());
        assert!(routes.sf_unitary.is_zero());
    }

    #[test]
    fn symbol_localization_sees_the_winding() {
        for k in -3i64..=3 {
            let model = dirac_circle(8, k, &tol()).unwrap();
            let loc = symbol_localization(&model, &tol()).unwrap();
            assert_eq!(loc.kernel_dim, loc.cokernel_dim);
            assert_eq!(loc.kernel_dim, k.unsigned_abs() as usize);
            assert_eq!(loc.interior_index(), -k);
        }
    }
}
