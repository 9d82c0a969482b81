use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::numerics::{operator_norm, Matrix};
use crate::weaving::exhaustive_multi;

use super::{check_finite, claim, frame_bounds, woven_pair, Builder, CertificateName, CertificateResult};

/// Weaving of two frames whose synthesis matrices are close.
///
/// With `D = ‖T_Φ − T_Ψ‖`, applicable when `D < 1` and
/// `D(√B_Φ + √B_Ψ) ≤ A_Φ/2`; every weaving then has bounds
/// `A_Φ/2` and `B_Φ + B_Ψ`.
pub fn cert_synthesis_proximity(phi: &Frame, psi: &Frame) -> Result<CertificateResult> {
    phi.same_shape(psi)?;
    let bp = frame_bounds(phi)?;
    let bq = frame_bounds(psi)?;
    let d = operator_norm(&(phi.synthesis() - psi.synthesis()))?;
    let lhs = d * (bp.upper.sqrt() + bq.upper.sqrt());
    let rhs = bp.lower / 2.0;

    let mut b = Builder::new(CertificateName::SynthesisProximity);
    b.q("A_phi", bp.lower).q("B_phi", bp.upper).q("B_psi", bq.upper).q("delta_synthesis", d).q("lhs", lhs).q("rhs", rhs);
    if d >= 1.0 {
        return Ok(b.reject("||T_phi - T_psi|| < 1"));
    }
    if lhs > rhs {
        return Ok(b.reject("||T_phi - T_psi|| (sqrt(B_phi) + sqrt(B_psi)) <= A_phi / 2"));
    }
    Ok(b.conclude(vec![claim(
        "phi, psi",
        vec![phi.clone(), psi.clone()],
        Some(bp.lower / 2.0),
        Some(bp.upper + bq.upper),
    )]))
}

/// Weaving of `Φ` with its image `UΦ` under an operator close to the identity.
///
/// Applicable when `‖I − U‖² < A_Φ/B_Φ`, with universal lower bound
/// `(√A_Φ − √B_Φ‖I − U‖)²`.
pub fn cert_operator_multiplier(phi: &Frame, u: &Matrix) -> Result<CertificateResult> {
    let bp = frame_bounds(phi)?;
    let uphi = phi.apply(u)?;
    let dist = operator_norm(&(&Matrix::identity(phi.dim()) - u))?;
    let ratio = bp.lower / bp.upper;

    let mut b = Builder::new(CertificateName::OperatorMultiplier);
    b.q("A_phi", bp.lower).q("B_phi", bp.upper).q("delta_identity", dist).q("delta_identity_sq", dist * dist).q("bound_ratio", ratio);
    if dist * dist >= ratio {
        return Ok(b.reject("||I - U||^2 < A_phi / B_phi"));
    }
    let lower = (bp.lower.sqrt() - bp.upper.sqrt() * dist).powi(2);
    let b_uphi = uphi.bounds()?.upper;
    b.q("B_uphi", b_uphi);
    Ok(b.conclude(vec![claim("phi, U phi", vec![phi.clone(), uphi], Some(lower), Some(bp.upper + b_uphi))]))
}

/// Woven `(Φ, Ψ)` and `(Ψ, η)` imply woven `(Φ, η)` when `A₁ + A₂ − B_Ψ > 0`.
pub fn cert_transitive_bridge(a1: f64, a2: f64, b_psi: f64, b1: f64, b2: f64) -> Result<CertificateResult> {
    check_finite("bridge inputs", &[a1, a2, b_psi, b1, b2])?;
    let slack = a1 + a2 - b_psi;
    let mut b = Builder::new(CertificateName::TransitiveBridge);
    b.q("A1", a1).q("A2", a2).q("B_psi", b_psi).q("B1", b1).q("B2", b2).q("slack", slack);
    if slack <= 0.0 {
        return Ok(b.reject("A1 + A2 - B_psi > 0"));
    }
    Ok(b.conclude(vec![claim("phi, eta", Vec::new(), Some(slack), Some(b1 + b2))]))
}

/// [`cert_transitive_bridge`] with its inputs computed by the oracle, keeping
/// `(Φ, η)` as the concluded pair.
pub fn cert_transitive_bridge_frames(phi: &Frame, psi: &Frame, eta: &Frame) -> Result<CertificateResult> {
    phi.same_shape(psi)?;
    psi.same_shape(eta)?;
    let v1 = exhaustive_multi(&[phi.clone(), psi.clone()])?;
    let v2 = exhaustive_multi(&[psi.clone(), eta.clone()])?;
    let b_psi = psi.bounds()?.upper;
    let mut r = cert_transitive_bridge(v1.universal_lower, v2.universal_lower, b_psi, v1.universal_upper, v2.universal_upper)?;
    for c in &mut r.claims {
        c.frames = vec![phi.clone(), eta.clone()];
    }
    Ok(r)
}

/// Every weaving of Bessel families is Bessel with bound `Σ B_j`.
pub fn cert_bessel_union(frames: &[Frame]) -> Result<CertificateResult> {
    let first = frames.first().ok_or_else(|| Error::InvalidParameter("at least one family is required".into()))?;
    let mut b = Builder::upper_only(CertificateName::BesselUnion);
    let mut total = 0.0;
    for (j, f) in frames.iter().enumerate() {
        first.same_shape(f)?;
        let bj = f.bounds()?.upper;
        b.q(&format!("B_{}", j + 1), bj);
        total += bj;
    }
    b.q("bessel_sum", total);
    Ok(b.conclude(vec![claim("all families", frames.to_vec(), None, Some(total))]))
}

/// Scaling the vectors of a woven pair by scalars with `C ≤ |αᵢ|, |βᵢ| ≤ D`
/// keeps it woven with bounds `C²A` and `D²B`.
pub fn cert_scalar_weaving(phi: &Frame, psi: &Frame, alpha: &[f64], beta: &[f64]) -> Result<CertificateResult> {
    phi.same_shape(psi)?;
    check_finite("scalars", alpha)?;
    check_finite("scalars", beta)?;
    for s in [alpha, beta] {
        if s.len() != phi.len() {
            return Err(Error::DimensionMismatch(format!("{} scalars for {} vectors", s.len(), phi.len())));
        }
    }
    if let Some(index) = alpha.iter().chain(beta).position(|&s| s == 0.0) {
        return Err(Error::ZeroScalar { index: index % phi.len() });
    }
    let v = woven_pair(phi, psi, "phi and psi")?;
    let mags = || alpha.iter().chain(beta).map(|s| s.abs());
    let c = mags().fold(f64::INFINITY, f64::min);
    let d = mags().fold(0.0, f64::max);

    let mut b = Builder::new(CertificateName::ScalarWeaving);
    b.q("A", v.universal_lower).q("B", v.universal_upper).q("C", c).q("D", d);
    let scaled = vec![phi.scaled_elementwise(alpha)?, psi.scaled_elementwise(beta)?];
    Ok(b.conclude(vec![claim(
        "alpha phi, beta psi",
        scaled,
        Some(c * c * v.universal_lower),
        Some(d * d * v.universal_upper),
    )]))
}

#[cfg(test)]
mod tests {
    use super::super::check_soundness;
    use super::*;

    fn frame(vs: &[&[f64]]) -> Frame {
        Frame::new(vs[0].len(), vs).unwrap()
    }

    fn onb() -> Frame {
        Frame::orthonormal_basis(2)
    }

    #[test]
    fn synthesis_proximity_examples() {
        let r = cert_synthesis_proximity(&onb(), &onb()).unwrap();
        assert!(r.applicable);
        assert_eq!((r.guaranteed_lower, r.guaranteed_upper), (Some(0.5), Some(2.0)));

        let r = cert_synthesis_proximity(&onb(), &onb().scaled(0.99)).unwrap();
        assert!(r.applicable);
        assert!((r.quantity("delta_synthesis").unwrap() - 0.01).abs() < 1e-15);
        let s = check_soundness(&r).unwrap();
        assert!(s.sound);
        assert!((s.checks[0].oracle_lower - 0.9801).abs() < 1e-12);

        let r = cert_synthesis_proximity(&onb(), &frame(&[&[0.0, 1.0], &[1.0, 0.0]])).unwrap();
        assert!(!r.applicable);
        assert!((r.quantity("delta_synthesis").unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn operator_multiplier_examples() {
        let phi = frame(&[&[1.0, 1.0], &[2.0, 1.0], &[0.5, -1.0]]);
        let r = cert_operator_multiplier(&phi, &Matrix::identity(2)).unwrap();
        assert!(r.applicable);
        assert!((r.guaranteed_lower.unwrap() - phi.bounds().unwrap().lower).abs() < 1e-14);

        let r = cert_operator_multiplier(&onb(), &Matrix::identity(2).scale(0.9)).unwrap();
        assert!((r.guaranteed_lower.unwrap() - 0.81).abs() < 1e-12);
        let s = check_soundness(&r).unwrap();
        assert!((s.checks[0].oracle_lower - 0.81).abs() < 1e-12);

        let e1e1e2 = frame(&[&[1.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]]);
        let r = cert_operator_multiplier(&e1e1e2, &Matrix::identity(2).scale(0.2)).unwrap();
        assert!(!r.applicable);
        assert!((r.quantity("delta_identity_sq").unwrap() - 0.64).abs() < 1e-12);

        assert!(matches!(cert_operator_multiplier(&onb(), &Matrix::identity(3)), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn transitive_bridge_examples() {
        assert!(!cert_transitive_bridge(1.0, 1.0, 2.0, 2.0, 2.0).unwrap().applicable);
        let r = cert_transitive_bridge(1.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        assert_eq!((r.guaranteed_lower, r.guaranteed_upper), (Some(1.0), Some(2.0)));
        assert_eq!(cert_transitive_bridge(1.0, 1.0, 1.5, 2.0, 2.0).unwrap().guaranteed_lower, Some(0.5));
        assert!(cert_transitive_bridge(f64::NAN, 1.0, 1.0, 1.0, 1.0).is_err());

        let phi = frame(&[&[1.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]]);
        let psi = frame(&[&[1.0, 0.0], &[0.0, 1.0], &[0.0, 1.0]]);
        let eta = frame(&[&[1.0, 0.0], &[0.0, 1.0], &[1.0, 0.0]]);
        let r = cert_transitive_bridge_frames(&phi, &psi, &eta).unwrap();
        assert!(!r.applicable);
        assert_eq!(r.quantity("slack"), Some(0.0));
    }

    #[test]
    fn bessel_union_examples() {
        let phi = frame(&[&[1.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]]);
        let psi = frame(&[&[1.0, 0.0], &[0.0, 1.0], &[0.0, 1.0]]);
        let r = cert_bessel_union(&[phi.clone(), psi]).unwrap();
        assert!(r.applicable && r.guaranteed_lower.is_none());
        assert_eq!(r.guaranteed_upper, Some(4.0));
        let s = check_soundness(&r).unwrap();
        assert!(s.sound);
        assert_eq!(s.checks[0].oracle_upper, 2.0);

        assert_eq!(cert_bessel_union(std::slice::from_ref(&phi)).unwrap().guaranteed_upper, Some(2.0));
        let o = Frame::orthonormal_basis(3);
        assert_eq!(cert_bessel_union(&[o.clone(), o.clone(), o]).unwrap().guaranteed_upper, Some(3.0));
    }

    #[test]
    fn scalar_weaving_examples() {
        let phi = frame(&[&[1.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]]);
        let psi = frame(&[&[1.0, 0.0], &[0.0, 1.0], &[0.0, 1.0]]);
        let r = cert_scalar_weaving(&phi, &psi, &[1.0; 3], &[1.0; 3]).unwrap();
        assert_eq!((r.guaranteed_lower, r.guaranteed_upper), (Some(1.0), Some(2.0)));

        let r = cert_scalar_weaving(&phi, &psi, &[2.0; 3], &[2.0; 3]).unwrap();
        assert_eq!((r.guaranteed_lower, r.guaranteed_upper), (Some(4.0), Some(8.0)));
        let s = check_soundness(&r).unwrap();
        assert_eq!((s.checks[0].oracle_lower, s.checks[0].oracle_upper), (4.0, 8.0));

        let r = cert_scalar_weaving(&phi, &psi, &[1.0, -1.0, 1.0], &[-1.0, 1.0, -1.0]).unwrap();
        assert_eq!((r.guaranteed_lower, r.guaranteed_upper), (Some(1.0), Some(2.0)));

        assert!(matches!(
            cert_scalar_weaving(&phi, &psi, &[1.0, 0.0, 1.0], &[1.0; 3]),
            Err(Error::ZeroScalar { index: 1 })
        ));
        let eta = frame(&[&[1.0, 0.0], &[0.0, 1.0], &[1.0, 0.0]]);
        assert!(matches!(cert_scalar_weaving(&phi, &eta, &[1.0; 3], &[1.0; 3]), Err(Error::NotWoven(_))));
    }
}
