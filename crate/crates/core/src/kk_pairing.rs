//! The odd index pairing `[u] ⊗̂ [ψ, p]` as a boundary class.
//!
//! Given a unitary `u = exp(2πi q)` and a projection-mod-`J` `p` commuting
//! with `ψ(u)` modulo `J`, the product class is `∂[π(pψ(u)p + 1 − p)]`. The
//! route through the Kasparov product goes via the single off-diagonal
//! entry `W = −iψ(cos πq) + ψ(sin πq)(2p − 1)`; both routes are evaluated
//! and must agree.

use std::f64::consts::PI;

use nalgebra::Schur;

use crate::corner_index::boundary_map;
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat};
use crate::proj_calc::{complement, nearest_projection};
use crate::tolerance::Tolerances;
use crate::vn_model::{quotient_norm, BlockOperator, K0Class, VnAlgebra};

/// Unitarity and `u = exp(2πi q)` are enforced to this accuracy.
pub const LOG_TOLERANCE: f64 = 1e-10;

/// Block respecting unital `*`-homomorphism `ψ : N → N`.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum Embedding {
    #[default]
    Identity,
    /// `x ↦ w x w*` for a unitary `w ∈ N`.
    Conjugation(BlockOperator),
}

impl Embedding {
    pub fn apply(&self, x: &BlockOperator) -> BlockOperator {
        match self {
            Embedding::Identity => x.clone(),
            Embedding::Conjugation(w) => &(w * x) * &w.adjoint(),
        }
    }

    /// Largest defect of `ψ(xy) = ψ(x)ψ(y)`, `ψ(x*) = ψ(x)*` and `ψ(1) = 1` over `elements`.
    pub fn multiplicativity_defect(&self, alg: &VnAlgebra, elements: &[&BlockOperator]) -> f64 {
        let id = BlockOperator::identity(alg);
        let mut worst = (&self.apply(&id) - &id).norm();
        for x in elements {
            worst = worst.max((&self.apply(&x.adjoint()) - &self.apply(x).adjoint()).norm());
            for y in elements {
                let lhs = self.apply(&(*x * *y));
                let rhs = &self.apply(x) * &self.apply(y);
                worst = worst.max((&lhs - &rhs).norm());
            }
        }
        worst
    }
}

/// Selfadjoint `q` with `u = exp(2πi q)` and spectrum in `[0, 1)`.
///
/// The branch cut sits at eigenvalue 1 of `u`, which maps to 0.
pub fn unitary_log(u: &BlockOperator) -> Result<BlockOperator> {
    for (i, m) in u.blocks().iter().enumerate() {
        let id = linalg::identity(m.nrows());
        let defect = linalg::spectral_norm(&(m.adjoint() * m - &id))
            .max(linalg::spectral_norm(&(m * m.adjoint() - &id)));
        if defect > LOG_TOLERANCE {
            return Err(Error::Precondition(format!(
                "unitary_log: block {i} is not unitary (defect {defect:e})"
            )));
        }
    }
    let q = BlockOperator::new(u.blocks().iter().map(block_log).collect())?;
    let back = exp_2pi_i(&q);
    let err = (&back - u).norm();
    if err > LOG_TOLERANCE {
        return Err(Error::Numerical { message: "unitary logarithm lost accuracy".into(), residual: err });
    }
    Ok(q)
}

fn block_log(m: &CMat) -> CMat {
    let n = m.nrows();
    if n == 0 {
        return CMat::zeros(0, 0);
    }
    // A unitary is normal, so its complex Schur form is diagonal.
    let (z, t) = Schur::new(m.clone()).unpack();
    let angles = (0..n).map(|j| {
        let mut theta = t[(j, j)].arg() / (2.0 * PI);
        if theta < 0.0 {
            theta += 1.0;
        }
        if theta >= 1.0 - 1e-12 {
            theta = 0.0;
        }
        c(theta, 0.0)
    });
    let d = CMat::from_diagonal(&nalgebra::DVector::from_iterator(n, angles));
    linalg::hermitian_part(&(&z * d * z.adjoint()))
}

/// `exp(2πi q)` for selfadjoint `q`.
pub fn exp_2pi_i(q: &BlockOperator) -> BlockOperator {
    q.map_blocks(|m| linalg::hermitian_cfn(m, |x| c(0.0, 2.0 * PI * x).exp()))
}

fn cos_pi(q: &BlockOperator) -> BlockOperator {
    q.map_blocks(|m| linalg::hermitian_fn(m, |x| (PI * x).cos()))
}

fn sin_pi(q: &BlockOperator) -> BlockOperator {
    q.map_blocks(|m| linalg::hermitian_fn(m, |x| (PI * x).sin()))
}

/// `‖π(cos πq + 2q − 1)‖` for `q` with `π(q² − q) = 0` up to the gap tolerance.
pub fn cos_identity_check(q: &BlockOperator, alg: &VnAlgebra, tol: &Tolerances) -> Result<f64> {
    q.conforms(alg)?;
    if !q.is_selfadjoint(tol) {
        return Err(Error::Precondition("cos_identity_check expects a selfadjoint q".into()));
    }
    let defect = quotient_norm(&(&(q * q) - q), alg)?;
    if defect > tol.gap {
        return Err(Error::Precondition(format!("π(q² − q) has norm {defect:e}")));
    }
    let id = BlockOperator::identity(alg);
    quotient_norm(&(&(&cos_pi(q) + &q.scale_real(2.0)) - &id), alg)
}

/// `(min eigenvalue of sin πq, ‖sin²πq + cos²πq − 1‖)`.
pub fn trig_identity_check(q: &BlockOperator) -> (f64, f64) {
    let s = sin_pi(q);
    let co = cos_pi(q);
    let min_sin = s.blocks().iter().flat_map(linalg::eigvalsh).fold(f64::INFINITY, f64::min);
    let sum = &(&s * &s) + &(&co * &co);
    let defect = sum
        .blocks()
        .iter()
        .map(|m| linalg::spectral_norm(&(m - linalg::identity(m.nrows()))))
        .fold(0.0, f64::max);
    (min_sin, defect)
}

#[derive(Debug, Clone)]
pub struct PairingData {
    alg: VnAlgebra,
    psi: Embedding,
    p: BlockOperator,
    u: BlockOperator,
    q: BlockOperator,
    /// `‖π([p, ψ(u)])‖`
    commutator: f64,
    /// `‖π(p² − p)‖`
    projection_defect: f64,
}

impl PairingData {
    pub fn new(
        alg: VnAlgebra,
        psi: Embedding,
        p: BlockOperator,
        u: BlockOperator,
        tol: &Tolerances,
    ) -> Result<Self> {
        p.conforms(&alg)?;
        u.conforms(&alg)?;
        if let Embedding::Conjugation(w) = &psi {
            w.conforms(&alg)?;
        }
        if !p.is_selfadjoint(tol) {
            return Err(Error::Precondition("p must be selfadjoint".into()));
        }
        let projection_defect = quotient_norm(&(&(&p * &p) - &p), &alg)?;
        if projection_defect > tol.gap {
            return Err(Error::Precondition(format!(
                "p is not a projection modulo J (‖π(p² − p)‖ = {projection_defect:e})"
            )));
        }
        let q = unitary_log(&u)?;
        let psi_defect = psi.multiplicativity_defect(&alg, &[&u, &q]);
        if psi_defect > LOG_TOLERANCE {
            return Err(Error::Precondition(format!("ψ is not multiplicative (defect {psi_defect:e})")));
        }
        let commutator = quotient_norm(&BlockOperator::commutator(&p, &psi.apply(&u)), &alg)?;
        if commutator > tol.gap {
            return Err(Error::Precondition(format!(
                "[p, ψ(u)] is not ideal supported (quotient norm {commutator:e})"
            )));
        }
        Ok(Self { alg, psi, p, u, q, commutator, projection_defect })
    }

    pub fn algebra(&self) -> &VnAlgebra {
        &self.alg
    }

    pub fn psi(&self) -> &Embedding {
        &self.psi
    }

    pub fn p(&self) -> &BlockOperator {
        &self.p
    }

    pub fn u(&self) -> &BlockOperator {
        &self.u
    }

    pub fn q(&self) -> &BlockOperator {
        &self.q
    }

    pub fn commutator(&self) -> f64 {
        self.commutator
    }

    pub fn projection_defect(&self) -> f64 {
        self.projection_defect
    }
}

#[derive(Debug, Clone)]
pub struct IntermediateOperator {
    pub w: BlockOperator,
    /// `‖π(W*W − 1)‖`
    pub left_residual: f64,
    /// `‖π(WW* − 1)‖`
    pub right_residual: f64,
}

/// `W = −iψ(cos πq) + ψ(sin πq)(2p − 1)`, required to be unitary modulo `J`.
pub fn intermediate_operator(data: &PairingData, tol: &Tolerances) -> Result<IntermediateOperator> {
    let alg = &data.alg;
    let id = BlockOperator::identity(alg);
    let reflection = &data.p.scale_real(2.0) - &id;
    let w = &data.psi.apply(&cos_pi(&data.q)).scale(c(0.0, -1.0))
        + &(&data.psi.apply(&sin_pi(&data.q)) * &reflection);
    let left_residual = quotient_norm(&(&(&w.adjoint() * &w) - &id), alg)?;
    let right_residual = quotient_norm(&(&(&w * &w.adjoint()) - &id), alg)?;
    if left_residual.max(right_residual) > 10.0 * tol.gap {
        return Err(Error::Precondition(format!(
            "π(W) is not unitary (residuals {left_residual:e}, {right_residual:e})"
        )));
    }
    Ok(IntermediateOperator { w, left_residual, right_residual })
}

#[derive(Debug, Clone)]
pub struct PairingReport {
    /// `∂[π(pψ(u)p + 1 − p)]`
    pub class: K0Class,
    /// `∂[π(W)]`
    pub via_intermediate: K0Class,
    pub left_residual: f64,
    pub right_residual: f64,
    /// Whether `p` had to be replaced by its nearest projection.
    pub snapped: bool,
}

/// `[u] ⊗̂ [ψ, p] = ∂[π(pψ(u)p + (1 − p))]`, checked against `∂[π(W)]`.
pub fn pairing_report(data: &PairingData, tol: &Tolerances) -> Result<PairingReport> {
    let alg = &data.alg;
    let snapped = !data.p.is_projection(tol);
    let p = if snapped { nearest_projection(&data.p, tol)? } else { data.p.clone() };
    let psi_u = data.psi.apply(&data.u);
    let compressed = &(&(&p * &psi_u) * &p) + &complement(&p);
    let class = boundary_map(&compressed, alg, tol)?;

    let inter = intermediate_operator(data, tol)?;
    let loose = Tolerances { gap: 10.0 * tol.gap, ..*tol };
    let via_intermediate = boundary_map(&inter.w, alg, &loose)?;
    if via_intermediate != class {
        return Err(Error::Consistency(format!(
            "∂[π(pψ(u)p + 1 − p)] = {class} but ∂[π(W)] = {via_intermediate}"
        )));
    }
    Ok(PairingReport {
        class,
        via_intermediate,
        left_residual: inter.left_residual,
        right_residual: inter.right_residual,
        snapped,
    })
}

pub fn pairing_via_boundary(data: &PairingData, tol: &Tolerances) -> Result<K0Class> {
    pairing_report(data, tol).map(|r| r.class)
}
