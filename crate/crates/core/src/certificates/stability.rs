//! Transfer of wovenness between frames and their duals under small changes
//! of the frame operator.

use serde::{Deserialize, Serialize};

use crate::duality::{canonical_dual, canonical_parseval, perturbation_of, PerturbationSequence};
use crate::error::{Error, Result};
use crate::frame::{verify_duality, Frame};
use crate::numerics::{operator_norm, SpdPower};
use crate::weaving::exhaustive_multi;

use super::{
    bessel_sum, claim, frame_bounds, largest_satisfying, woven_pair, Builder, CertificateName, CertificateResult,
    Search,
};

/// Which operator is applied to `Ψ` when forming the pair whose universal
/// lower bound enters [`cert_perturbed_duals`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DualVariant {
    /// `(S_Φ⁻¹Φ, S_Φ⁻¹Ψ)`.
    #[default]
    SharedInverse,
    /// `(S_Φ⁻¹Φ, S_Ψ⁻¹Ψ)`, the pair of canonical duals.
    CanonicalDuals,
}

impl std::str::FromStr for DualVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "shared_inverse" => Ok(DualVariant::SharedInverse),
            "canonical_duals" => Ok(DualVariant::CanonicalDuals),
            _ => Err(Error::InvalidParameter(format!("unknown variant '{s}'"))),
        }
    }
}

/// Duals `{S_Φ⁻¹φᵢ + αuᵢ}` and `{S_Ψ⁻¹ψᵢ + αvᵢ}` of nearby frames are woven.
///
/// Requires `‖T_Φ − T_Ψ‖ < √A / (√B_Ψ ‖S_Φ⁻¹‖ ‖S_Ψ⁻¹‖ (√B_Ψ + √B_Φ))` and an
/// `α ∈ (0, 1)` with `‖S_Φ⁻¹ − S_Ψ⁻¹‖ + α(√B_U + √B_V)/√B_Ψ < √(A/B_Ψ)`.
/// Half the largest such `α` is emitted with bound
/// `(√A − α(√B_U + √B_V) − √B_Ψ ‖S_Ψ⁻¹ − S_Φ⁻¹‖)²`.
pub fn cert_perturbed_duals(
    phi: &Frame,
    psi: &Frame,
    u: &PerturbationSequence,
    v: &PerturbationSequence,
    variant: DualVariant,
) -> Result<CertificateResult> {
    phi.same_shape(psi)?;
    let bp = frame_bounds(phi)?;
    let bq = frame_bounds(psi)?;
    u.check_admissible(phi)?;
    v.check_admissible(psi)?;
    let s_phi_inv = phi.frame_operator_power(SpdPower::Inverse)?;
    let s_psi_inv = psi.frame_operator_power(SpdPower::Inverse)?;
    let hyp_pair = match variant {
        DualVariant::SharedInverse => (phi.apply(&s_phi_inv)?, psi.apply(&s_phi_inv)?),
        DualVariant::CanonicalDuals => (phi.apply(&s_phi_inv)?, psi.apply(&s_psi_inv)?),
    };
    let a = woven_pair(&hyp_pair.0, &hyp_pair.1, "transformed pair")?.universal_lower;
    let (b_u, b_v) = (u.bessel_bound(), v.bessel_bound());
    let n_phi_inv = operator_norm(&s_phi_inv)?;
    let n_psi_inv = operator_norm(&s_psi_inv)?;
    let delta_t = operator_norm(&(phi.synthesis() - psi.synthesis()))?;
    let delta_inv = operator_norm(&(&s_phi_inv - &s_psi_inv))?;
    let ab_rhs = a.sqrt() / (bq.upper.sqrt() * n_phi_inv * n_psi_inv * (bq.upper.sqrt() + bp.upper.sqrt()));
    let target = (a / bq.upper).sqrt();
    let step = (b_u.sqrt() + b_v.sqrt()) / bq.upper.sqrt();

    let mut b = Builder::new(CertificateName::PerturbedDuals);
    b.q("A", a)
        .q("B_phi", bp.upper)
        .q("B_psi", bq.upper)
        .q("B_U", b_u)
        .q("B_V", b_v)
        .q("norm_S_phi_inv", n_phi_inv)
        .q("norm_S_psi_inv", n_psi_inv)
        .q("delta_synthesis", delta_t)
        .q("delta_inverse", delta_inv)
        .q("synthesis_rhs", ab_rhs)
        .q("inverse_rhs", target)
        .flag("variant_canonical_duals", variant == DualVariant::CanonicalDuals);
    if delta_t >= ab_rhs {
        return Ok(b.reject("||T_phi - T_psi|| < sqrt(A) / (sqrt(B_psi) ||S_phi^-1|| ||S_psi^-1|| (sqrt(B_psi) + sqrt(B_phi)))"));
    }
    let alpha_max = match largest_satisfying(|t| target - delta_inv - t * step, Some(1.0)) {
        Search::Found(x) | Search::Capped(x) => x,
        Search::Unbounded | Search::Infeasible => {
            return Ok(b.reject("||S_phi^-1 - S_psi^-1|| + alpha (sqrt(B_U) + sqrt(B_V)) / sqrt(B_psi) < sqrt(A / B_psi) for some alpha in (0, 1)"));
        }
    };
    let alpha = alpha_max / 2.0;
    let lower = (a.sqrt() - alpha * (b_u.sqrt() + b_v.sqrt()) - bq.upper.sqrt() * delta_inv).max(0.0).powi(2);
    b.q("alpha_max", alpha_max).q("alpha", alpha);

    let phi_d = Frame::from_synthesis(&(&s_phi_inv * phi.synthesis()) + &u.synthesis().scale(alpha))?;
    let psi_d = Frame::from_synthesis(&(&s_psi_inv * psi.synthesis()) + &v.synthesis().scale(alpha))?;
    let upper = bessel_sum(&[&phi_d, &psi_d])?;
    Ok(b.conclude(vec![claim("phi^d_alpha, psi^d_alpha", vec![phi_d, psi_d], Some(lower), Some(upper))]))
}

/// Woven duals `Φᵈ, Ψᵈ` with `√B_U + √B_Ψ ‖S_Φᵈ − S_Ψᵈ‖ < √A` certify `(Φ, Ψ)`.
///
/// `U = Φᵈ − S_Φ⁻¹Φ` is recovered from the dual. The emitted bound is
/// `(√A − √B_U − √B_Ψ ‖S_Φᵈ − S_Ψᵈ‖)²`. The oracle verdict on `(Φ, Ψ)` is
/// recorded in `oracle_woven` and `oracle_lower`.
pub fn cert_duals_to_frames(phi: &Frame, psi: &Frame, phi_d: &Frame, psi_d: &Frame) -> Result<CertificateResult> {
    phi.same_shape(psi)?;
    phi.same_shape(phi_d)?;
    psi.same_shape(psi_d)?;
    frame_bounds(phi)?;
    let bq = frame_bounds(psi)?;
    if !verify_duality(phi, phi_d)? {
        return Err(Error::NotDual("phi^d is not a dual of phi".into()));
    }
    if !verify_duality(psi, psi_d)? {
        return Err(Error::NotDual("psi^d is not a dual of psi".into()));
    }
    let w = woven_pair(phi_d, psi_d, "phi^d and psi^d")?;
    let a = w.universal_lower;
    let u = perturbation_of(phi, phi_d)?;
    let b_u = u.bessel_bound();
    let delta_s = operator_norm(&(&phi_d.frame_operator() - &psi_d.frame_operator()))?;
    let lhs = b_u.sqrt() + bq.upper.sqrt() * delta_s;
    let oracle = exhaustive_multi(&[phi.clone(), psi.clone()])?;

    let mut b = Builder::new(CertificateName::DualsToFrames);
    b.q("A", a)
        .q("B", w.universal_upper)
        .q("B_U", b_u)
        .q("B_psi", bq.upper)
        .q("delta_dual_operator", delta_s)
        .q("lhs", lhs)
        .q("rhs", a.sqrt())
        .flag("oracle_woven", oracle.woven)
        .q("oracle_lower", oracle.universal_lower);
    if lhs >= a.sqrt() {
        return Ok(b.reject("sqrt(B_U) + sqrt(B_psi) ||S_phi^d - S_psi^d|| < sqrt(A)"));
    }
    let lower = (a.sqrt() - lhs).powi(2);
    let upper = bessel_sum(&[phi, psi])?;
    Ok(b.conclude(vec![claim("phi, psi", vec![phi.clone(), psi.clone()], Some(lower), Some(upper))]))
}

/// Direction of [`cert_canonical_pair`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Woven `(Φ, Ψ)` certifies the canonical duals.
    OriginalsToDuals,
    /// Woven canonical duals certify `(Φ, Ψ)`.
    DualsToOriginals,
}

impl std::str::FromStr for Direction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "originals_to_duals" => Ok(Direction::OriginalsToDuals),
            "duals_to_originals" => Ok(Direction::DualsToOriginals),
            _ => Err(Error::InvalidParameter(format!("unknown direction '{s}'"))),
        }
    }
}

/// Wovenness passes between a pair and its canonical duals when
/// `‖S_Φ⁻¹ − S_Ψ⁻¹‖ < √(A/B_Ψ)`, with bound `(√A − √B_Ψ ‖S_Φ⁻¹ − S_Ψ⁻¹‖)²`.
pub fn cert_canonical_pair(phi: &Frame, psi: &Frame, direction: Direction) -> Result<CertificateResult> {
    phi.same_shape(psi)?;
    frame_bounds(phi)?;
    let bq = frame_bounds(psi)?;
    let phi_t = canonical_dual(phi)?;
    let psi_t = canonical_dual(psi)?;
    let (hyp, concluded) = match direction {
        Direction::OriginalsToDuals => ((phi, psi), (phi_t.clone(), psi_t.clone())),
        Direction::DualsToOriginals => ((&phi_t, &psi_t), (phi.clone(), psi.clone())),
    };
    let a = woven_pair(hyp.0, hyp.1, "hypothesis pair")?.universal_lower;
    let s_phi_inv = phi.frame_operator_power(SpdPower::Inverse)?;
    let s_psi_inv = psi.frame_operator_power(SpdPower::Inverse)?;
    let delta = operator_norm(&(&s_phi_inv - &s_psi_inv))?;
    let rhs = (a / bq.upper).sqrt();

    let mut b = Builder::new(CertificateName::CanonicalPair);
    b.q("A", a)
        .q("B_psi", bq.upper)
        .q("delta_inverse", delta)
        .q("rhs", rhs)
        .q("slack", rhs - delta)
        .flag("direction_duals_to_originals", direction == Direction::DualsToOriginals);
    if delta >= rhs {
        return Ok(b.reject("||S_phi^-1 - S_psi^-1|| < sqrt(A / B_psi)"));
    }
    let lower = (a.sqrt() - bq.upper.sqrt() * delta).powi(2);
    let upper = bessel_sum(&[&concluded.0, &concluded.1])?;
    let label = match direction {
        Direction::OriginalsToDuals => "canonical duals",
        Direction::DualsToOriginals => "phi, psi",
    };
    Ok(b.conclude(vec![claim(label, vec![concluded.0, concluded.1], Some(lower), Some(upper))]))
}

/// A woven pair whose frame operators have close square roots has woven
/// canonical Parseval frames.
///
/// With `Δ = S_Φ^{-1/2} − S_Ψ^{-1/2}` the emitted bound is
/// `A − B_Φ‖Δ‖² − 2‖Δ‖ ‖S_Ψ^{-1/2}‖`; the upper bound is 2.
pub fn cert_canonical_parseval(phi: &Frame, psi: &Frame) -> Result<CertificateResult> {
    phi.same_shape(psi)?;
    let bp = frame_bounds(phi)?;
    frame_bounds(psi)?;
    let a = woven_pair(phi, psi, "phi and psi")?.universal_lower;
    let sqrt_phi = phi.frame_operator_power(SpdPower::Sqrt)?;
    let sqrt_psi = psi.frame_operator_power(SpdPower::Sqrt)?;
    let isqrt_phi = phi.frame_operator_power(SpdPower::InverseSqrt)?;
    let isqrt_psi = psi.frame_operator_power(SpdPower::InverseSqrt)?;
    let n_iphi = operator_norm(&isqrt_phi)?;
    let n_ipsi = operator_norm(&isqrt_psi)?;
    let delta_sqrt = operator_norm(&(&sqrt_phi - &sqrt_psi))?;
    let delta = operator_norm(&(&isqrt_phi - &isqrt_psi))?;
    let rhs = ((n_ipsi * n_ipsi + a * bp.upper).sqrt() - n_ipsi) / bp.upper / (n_iphi * n_ipsi);

    let mut b = Builder::new(CertificateName::CanonicalParseval);
    b.q("A", a)
        .q("B_phi", bp.upper)
        .q("norm_S_phi_inv_sqrt", n_iphi)
        .q("norm_S_psi_inv_sqrt", n_ipsi)
        .q("delta_sqrt", delta_sqrt)
        .q("delta_inv_sqrt", delta)
        .q("rhs", rhs);
    if delta_sqrt >= rhs {
        return Ok(b.reject("||S_phi^1/2 - S_psi^1/2|| below the canonical Parseval threshold"));
    }
    let lower = a - bp.upper * delta * delta - 2.0 * delta * n_ipsi;
    let pair = vec![canonical_parseval(phi)?, canonical_parseval(psi)?];
    Ok(b.conclude(vec![claim("canonical Parseval frames", pair, Some(lower), Some(2.0))]))
}
