//! Von Neumann spectral triples on the block model.
//!
//! An unbounded `D` is represented by a finite selfadjoint matrix read as a
//! truncation. The conditions that make `(𝒜, H, D)` a spectral triple relative
//! to `(N, J)` become quantities that can be measured: the quotient norm of
//! `a(i − D)⁻¹`, of `[F_D, a]`, of `a(1 − F_D²)` and so on.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::corner_index::{boundary_map, corner_index};
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat};
use crate::proj_calc::{chi, complement, proj_intersection};
use crate::quadrature::{adaptive_simpson, QuadConfig};
use crate::tolerance::Tolerances;
use crate::vn_model::{k0_of_difference, quotient_norm, BlockOperator, K0Class, OperatorPath, VnAlgebra};

/// `F_D = D (1 + D²)^{-1/2}`.
pub fn bounded_transform(d: &BlockOperator, tol: &Tolerances) -> Result<BlockOperator> {
    if !d.is_selfadjoint(tol) {
        return Err(Error::Precondition("bounded_transform expects a selfadjoint operator".into()));
    }
    Ok(d.map_blocks(|m| linalg::hermitian_fn(m, |x| x / (1.0 + x * x).sqrt())))
}

#[derive(Debug, Clone)]
pub struct VnTriple {
    alg: VnAlgebra,
    generators: Vec<(String, BlockOperator)>,
    dirac: BlockOperator,
    bounded: BlockOperator,
    p_f: BlockOperator,
    resolvent_defect: f64,
}

impl VnTriple {
    /// Validate and assemble a unital triple. The unit must be among the generators.
    pub fn new(
        alg: VnAlgebra,
        generators: Vec<(String, BlockOperator)>,
        dirac: BlockOperator,
        tol: &Tolerances,
    ) -> Result<Self> {
        dirac.conforms(&alg)?;
        if !dirac.is_selfadjoint(tol) {
            return Err(Error::Precondition("D must be selfadjoint".into()));
        }
        let id = BlockOperator::identity(&alg);
        let mut has_unit = false;
        for (k, (name, a)) in generators.iter().enumerate() {
            a.conforms(&alg)?;
            if generators[..k].iter().any(|(n, _)| n == name) {
                return Err(Error::Model(format!("duplicate generator name {name:?}")));
            }
            has_unit |= (a - &id).norm() <= tol.projection_slack(1.0);
        }
        if !has_unit {
            return Err(Error::Model("the generators must include the unit".into()));
        }
        let bounded = bounded_transform(&dirac, tol)?;
        let p_f = (&bounded + &id).scale_real(0.5);
        let resolvent = dirac.map_blocks(|m| linalg::hermitian_cfn(m, |x| c(0.0, 1.0) / c(-x, 1.0)));
        let mut resolvent_defect: f64 = 0.0;
        for (_, a) in &generators {
            resolvent_defect = resolvent_defect.max(quotient_norm(&(a * &resolvent), &alg)?);
        }
        Ok(Self { alg, generators, dirac, bounded, p_f, resolvent_defect })
    }

    pub fn algebra(&self) -> &VnAlgebra {
        &self.alg
    }

    pub fn generators(&self) -> &[(String, BlockOperator)] {
        &self.generators
    }

    pub fn generator(&self, name: &str) -> Result<&BlockOperator> {
        self.generators
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, a)| a)
            .ok_or_else(|| Error::Model(format!("unknown generator {name:?}")))
    }

    pub fn dirac(&self) -> &BlockOperator {
        &self.dirac
    }

    /// `F_D`.
    pub fn bounded(&self) -> &BlockOperator {
        &self.bounded
    }

    /// `p_F = (F_D + 1) / 2`.
    pub fn p_f(&self) -> &BlockOperator {
        &self.p_f
    }

    /// `max_a ‖π(a (i − D)⁻¹)‖` over the generators; zero for an exact triple.
    pub fn resolvent_defect(&self) -> f64 {
        self.resolvent_defect
    }

    /// Strict form of the ideal resolvent condition.
    pub fn check_ideal_resolvent(&self, tol: &Tolerances) -> Result<()> {
        if self.resolvent_defect > tol.projection_slack(1.0) {
            return Err(Error::Precondition(format!(
                "a(i − D)⁻¹ is not ideal supported (quotient norm {:e})",
                self.resolvent_defect
            )));
        }
        Ok(())
    }

    /// `p = χ(F_D)`.
    pub fn positive_projection(&self, tol: &Tolerances) -> Result<BlockOperator> {
        chi(&self.bounded, tol)
    }

    /// The same data over a different ideal mask.
    pub fn with_ideal_mask(&self, mask: &[bool], tol: &Tolerances) -> Result<Self> {
        Self::new(self.alg.with_ideal_mask(mask)?, self.generators.clone(), self.dirac.clone(), tol)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KasparovEntry {
    pub generator: String,
    /// `‖π([F_D, a])‖`
    pub commutator: f64,
    /// `‖π(a (1 − F_D²))‖`
    pub one_minus_f_squared: f64,
    /// `‖π(a (F_D − F_D*))‖`
    pub f_minus_adjoint: f64,
}

impl KasparovEntry {
    pub fn worst(&self) -> f64 {
        self.commutator.max(self.one_minus_f_squared).max(self.f_minus_adjoint)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KasparovReport {
    pub entries: Vec<KasparovEntry>,
    pub threshold: f64,
    pub passed: bool,
}

/// Measure the three Kasparov module conditions on every generator.
pub fn check_kasparov_module(triple: &VnTriple, tol: &Tolerances) -> Result<KasparovReport> {
    let f = &triple.bounded;
    let alg = &triple.alg;
    let id = BlockOperator::identity(alg);
    let one_minus_f2 = &id - &(f * f);
    let skew = f - &f.adjoint();
    let mut entries = Vec::with_capacity(triple.generators.len());
    for (name, a) in &triple.generators {
        entries.push(KasparovEntry {
            generator: name.clone(),
            commutator: quotient_norm(&BlockOperator::commutator(f, a), alg)?,
            one_minus_f_squared: quotient_norm(&(a * &one_minus_f2), alg)?,
            f_minus_adjoint: quotient_norm(&(a * &skew), alg)?,
        });
    }
    let passed = entries.iter().all(|e| e.worst() <= tol.gap);
    Ok(KasparovReport { entries, threshold: tol.gap, passed })
}

/// Result of comparing the resolvent integral with the direct commutator.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolventCheck {
    /// `‖integral − D[(1 + D²)^{-1/2}, a] b‖`
    pub residual: f64,
    /// `residual / ‖D[(1 + D²)^{-1/2}, a] b‖` (the residual itself when that vanishes).
    pub relative: f64,
    pub direct_norm: f64,
    /// Certified bound on the discarded tail `λ > tan²θ_max`.
    pub truncation_bound: f64,
    pub quadrature_error: f64,
    pub evaluations: usize,
}

/// Certified truncation target for the tail of the resolvent integral.
pub const TAIL_TOLERANCE: f64 = 1e-8;

/// Evaluate `(1/π) ∫_0^∞ λ^{-1/2} D[R(λ), a] b dλ`, `R(λ) = (1 + D² + λ)⁻¹`,
/// and compare with `D[(1 + D²)^{-1/2}, a] b` computed by eigendecomposition.
///
/// The substitution `λ = tan²θ` turns the integral into
/// `(2/π) ∫ sec²θ · D[R(tan²θ), a] b dθ` over `[0, θ_max]`. The tail is
/// bounded with `‖R(λ)‖ ≤ 1/(1+λ)` and `‖D R(λ)‖ ≤ 1/(2√(1+λ))`, which give
/// `‖D[R(λ), a] b‖ ≤ (5/4) ‖[a, D]‖ ‖b‖ / (1 + λ)`; `θ_max` is chosen so
/// the discarded part is at most [`TAIL_TOLERANCE`]. Resolvents on the
/// quadrature side are plain matrix inverses so the two routes share no
/// eigendecomposition.
pub fn resolvent_integral_check(
    triple: &VnTriple,
    a: &BlockOperator,
    b: &BlockOperator,
) -> Result<ResolventCheck> {
    let alg = &triple.alg;
    a.conforms(alg)?;
    b.conforms(alg)?;
    let d = &triple.dirac;

    let direct = {
        let inv_sqrt = d.map_blocks(|m| linalg::hermitian_fn(m, |x| 1.0 / (1.0 + x * x).sqrt()));
        &(d * &BlockOperator::commutator(&inv_sqrt, a)) * b
    };

    let scale = BlockOperator::commutator(a, d).norm() * b.norm();
    let tail_angle = if scale > 0.0 {
        (TAIL_TOLERANCE * PI / (2.5 * scale)).min(FRAC_PI_2)
    } else {
        0.0
    };
    let theta_max = FRAC_PI_2 - tail_angle;
    let truncation_bound = 2.5 * scale * tail_angle / PI;

    let cfg = QuadConfig { tolerance: 1e-11 * scale.max(1.0), ..QuadConfig::default() };
    let mut value = Vec::with_capacity(alg.num_blocks());
    let mut quadrature_error: f64 = 0.0;
    let mut evaluations = 0;
    for i in 0..alg.num_blocks() {
        let (dm, am, bm) = (d.block(i), a.block(i), b.block(i));
        let n = dm.nrows();
        let base = linalg::identity(n) + dm * dm;
        let integrand = |theta: f64| -> CMat {
            let tan = theta.tan();
            let lambda = tan * tan;
            let sec2 = 1.0 + lambda;
            let shifted = &base + linalg::identity(n) * c(lambda, 0.0);
            let r = shifted.try_inverse().unwrap_or_else(|| CMat::zeros(n, n));
            (dm * (&r * am - am * &r) * bm) * c(2.0 * sec2 / PI, 0.0)
        };
        let q = adaptive_simpson(integrand, 0.0, theta_max, &cfg)?;
        quadrature_error = quadrature_error.max(q.error_estimate);
        evaluations += q.evaluations;
        value.push(q.value);
    }
    let integral = BlockOperator::new(value)?;
    let residual = (&integral - &direct).norm();
    let direct_norm = direct.norm();
    let relative = if direct_norm > 0.0 { residual / direct_norm } else { residual };
    Ok(ResolventCheck { residual, relative, direct_norm, truncation_bound, quadrature_error, evaluations })
}

/// Every route to `sf(D, u*Du)` evaluated by [`sf_unitary_report`].
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryFlowReport {
    pub class: K0Class,
    /// `∂[π(p_F u p_F + 1 − p_F)]`
    pub via_p_f: K0Class,
    /// `Ind_{(p-p)}(pup)`
    pub via_corner: K0Class,
    /// `‖π([u, p])‖`
    pub commutator: f64,
}

/// `sf(D, u*Du) = ∂[π(pup + 1 − p)]` with `p = χ(F_D)`, cross-checked
/// against `∂[π(p_F u p_F + 1 − p_F)]` and `Ind_{(p-p)}(pup)`.
pub fn sf_unitary_report(triple: &VnTriple, unitary: &str, tol: &Tolerances) -> Result<UnitaryFlowReport> {
    let alg = &triple.alg;
    let u = triple.generator(unitary)?;
    if !u.is_unitary(tol) {
        return Err(Error::Precondition(format!("generator {unitary:?} is not unitary")));
    }
    let p = triple.positive_projection(tol)?;
    let commutator = quotient_norm(&BlockOperator::commutator(u, &p), alg)?;
    if commutator > tol.gap {
        return Err(Error::Precondition(format!(
            "[u, p] is not ideal supported (quotient norm {commutator:e})"
        )));
    }
    let compress = |q: &BlockOperator| &(&(q * u) * q) + &complement(q);
    let class = boundary_map(&compress(&p), alg, tol)?;
    let via_p_f = boundary_map(&compress(&triple.p_f), alg, tol)?;
    let via_corner = corner_index(&(&(&p * u) * &p), &p, &p, alg, tol)?;
    if via_p_f != class || via_corner != class {
        return Err(Error::Consistency(format!(
            "sf(D, u*Du): ∂ via χ(F_D) = {class}, via p_F = {via_p_f}, corner index = {via_corner}"
        )));
    }
    Ok(UnitaryFlowReport { class, via_p_f, via_corner, commutator })
}

pub fn sf_unitary(triple: &VnTriple, unitary: &str, tol: &Tolerances) -> Result<K0Class> {
    sf_unitary_report(triple, unitary, tol).map(|r| r.class)
}

/// Number of uniform samples used to watch `π(F_{D_t})` along a perturbation path.
pub const DRIFT_SAMPLES: usize = 32;

/// Spectral flow of `t ↦ D + A_t`. It depends only on the endpoints:
/// `[(1 − p_1) ∩ p_0] − [(1 − p_0) ∩ p_1]` with `p_i = χ(F_{D + A_i})`.
///
/// The quotient image `π(F_{D_t})` is required to stay at `π(F_{D_0})`
/// (within the gap tolerance) at the keyframes and at uniform samples.
pub fn sf_unbounded(triple: &VnTriple, perturbation: &OperatorPath, tol: &Tolerances) -> Result<K0Class> {
    let alg = &triple.alg;
    perturbation.conforms(alg)?;
    for (t, a) in perturbation.keyframes() {
        if !a.is_selfadjoint(tol) {
            return Err(Error::Precondition(format!("perturbation at t = {t} is not selfadjoint")));
        }
    }
    let transform_at = |t: f64| bounded_transform(&(&triple.dirac + &perturbation.eval(t)), tol);
    let f0 = transform_at(0.0)?;
    let f1 = transform_at(1.0)?;

    let mut times: Vec<f64> = perturbation.keyframes().iter().map(|(t, _)| *t).collect();
    times.extend((1..DRIFT_SAMPLES).map(|k| k as f64 / DRIFT_SAMPLES as f64));
    for t in times {
        let drift = quotient_norm(&(&transform_at(t)? - &f0), alg)?;
        if drift > tol.gap {
            return Err(Error::ModelViolation(format!(
                "π(F_(D+A_t)) drifts from π(F_D) by {drift:e} at t = {t}"
            )));
        }
    }
    let p0 = chi(&f0, tol)?;
    let p1 = chi(&f1, tol)?;
    k0_of_difference(
        &proj_intersection(&complement(&p1), &p0, tol)?,
        &proj_intersection(&complement(&p0), &p1, tol)?,
        alg,
        tol,
    )
}

/// The path `t ↦ F_{D + A_t}` sampled at the perturbation keyframes and at
/// `samples` uniform times, for use with [`crate::spec_flow`].
pub fn bounded_transform_path(
    triple: &VnTriple,
    perturbation: &OperatorPath,
    samples: usize,
    tol: &Tolerances,
) -> Result<OperatorPath> {
    let mut times: Vec<f64> = perturbation.keyframes().iter().map(|(t, _)| *t).collect();
    times.extend((1..samples.max(1)).map(|k| k as f64 / samples as f64));
    times.sort_by(f64::total_cmp);
    times.dedup();
    let keyframes = times
        .into_iter()
        .map(|t| Ok((t, bounded_transform(&(&triple.dirac + &perturbation.eval(t)), tol)?)))
        .collect::<Result<Vec<_>>>()?;
    OperatorPath::new(keyframes)
}

/// The linear path `A_t = t (u*Du − D)` from `D` to `u*Du`.
pub fn conjugation_path(triple: &VnTriple, unitary: &str) -> Result<OperatorPath> {
    let u = triple.generator(unitary)?;
    let d = &triple.dirac;
    let target = &(&(&u.adjoint() * d) * u) - d;
    OperatorPath::linear(BlockOperator::zero(&triple.alg), target)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PushforwardReport {
    /// `sf_B`, indexed by the blocks of the sub-ideal.
    pub sub_class: K0Class,
    /// `i_*(sf_B)`, zero padded to the blocks of `J`.
    pub pushed: K0Class,
    /// `sf` computed over `J` directly.
    pub full: K0Class,
}

/// C*-spectral flow over a designated sub-ideal `B ⊆ J` and its image under
/// the inclusion `i_* : K₀(B) → K₀(J)`.
///
/// `sub_ideal[i]` selects block `i`; it must select ideal blocks only. On
/// the blocks of `J` outside `B`, both `(1 + D²)⁻¹` and every `[F_D, a]` must
/// vanish to the gap tolerance.
pub fn pushforward_sf(
    triple: &VnTriple,
    unitary: &str,
    sub_ideal: &[bool],
    tol: &Tolerances,
) -> Result<PushforwardReport> {
    let alg = &triple.alg;
    if sub_ideal.len() != alg.num_blocks() {
        return Err(Error::Shape(format!(
            "sub-ideal mask has {} entries for {} blocks",
            sub_ideal.len(),
            alg.num_blocks()
        )));
    }
    for (i, &inside) in sub_ideal.iter().enumerate() {
        if inside && !alg.is_ideal(i) {
            return Err(Error::Model(format!("sub-ideal block {i} is not in J")));
        }
    }
    let resolvent = triple.dirac.map_blocks(|m| linalg::hermitian_fn(m, |x| 1.0 / (1.0 + x * x)));
    for i in alg.ideal_blocks().into_iter().filter(|&i| !sub_ideal[i]) {
        let r = linalg::spectral_norm(resolvent.block(i));
        if r > tol.gap {
            return Err(Error::SubIdealTooSmall(format!(
                "(1 + D²)⁻¹ has norm {r:e} on block {i} outside the sub-ideal"
            )));
        }
        for (name, a) in &triple.generators {
            let k = linalg::spectral_norm(BlockOperator::commutator(&triple.bounded, a).block(i));
            if k > tol.gap {
                return Err(Error::SubIdealTooSmall(format!(
                    "[F_D, {name}] has norm {k:e} on block {i} outside the sub-ideal"
                )));
            }
        }
    }
    let sub_triple = triple.with_ideal_mask(sub_ideal, tol)?;
    let sub_class = sf_unitary(&sub_triple, unitary, tol)?;
    let full = sf_unitary(triple, unitary, tol)?;

    let mut sub_iter = sub_class.ranks().iter();
    let pushed = K0Class::new(
        alg.ideal_blocks()
            .into_iter()
            .map(|i| if sub_ideal[i] { *sub_iter.next().expect("sub-ideal rank") } else { 0 })
            .collect(),
    );
    if pushed != full {
        return Err(Error::Consistency(format!("i_*(sf_B) = {pushed} but sf = {full}")));
    }
    Ok(PushforwardReport { sub_class, pushed, full })
}
