//! Certificates that weave a frame, or a woven pair, with members of its dual
//! family `{S⁻¹φᵢ + εuᵢ}`.

use crate::duality::{canonical_dual, PerturbationSequence};
use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::numerics::{operator_norm, Matrix, SpdPower};
use crate::weaving::exhaustive_multi;

use super::{
    bessel_sum, claim, frame_bounds, largest_satisfying, woven_pair, Builder, CertificateName, CertificateResult,
    Search,
};

/// Parseval tolerance on both frame bounds.
pub const PARSEVAL_TOL: f64 = 1e-8;

/// `{S⁻¹φᵢ + εuᵢ}`.
fn dual_member(canonical: &Frame, u: &PerturbationSequence, eps: f64) -> Result<Frame> {
    Frame::from_synthesis(canonical.synthesis() + &u.synthesis().scale(eps))
}

fn positive_part_sq(x: f64) -> f64 {
    x.max(0.0).powi(2)
}

/// Frame with small redundant elements, woven with `Φ^d_ε = {S⁻¹φᵢ + εuᵢ}`.
///
/// `Φ` is split greedily into a basis `φ` and redundant vectors `R`. With `A`
/// the oracle lower bound of `(φ, S_φ φ)`, the hypothesis is
/// `Σ_R ‖φᵢ‖² + 2√(ε B_U B_Φ) < √(A/B_Φ)`. The headline claim is on the pair
/// `(S_Φ Φ, Φ + ε S_Φ U)` with bound `(√A − √B_Φ Σ_R ‖φᵢ‖² − 2√(ε B_U) B_Φ)²`;
/// dividing by `‖S_Φ‖²` gives the bound for `(Φ, Φ^d_ε)`.
pub fn cert_redundant_small_norm(phi: &Frame, u: &PerturbationSequence, eps: f64) -> Result<CertificateResult> {
    if !(eps.is_finite() && eps >= 0.0) {
        return Err(Error::InvalidParameter(format!("epsilon must be finite and non-negative, got {eps}")));
    }
    let bp = frame_bounds(phi)?;
    u.check_admissible(phi)?;
    let split = phi.excess()?;
    if split.excess == 0 {
        return Err(Error::NoRedundancy);
    }
    let basis = phi.select(&split.riesz_indices)?;
    let basis_image = basis.apply(&basis.frame_operator())?;
    let a = exhaustive_multi(&[basis, basis_image])?.universal_lower;
    let red: f64 = split.redundant_indices.iter().map(|&i| phi.vector(i).iter().map(|x| x * x).sum::<f64>()).sum();

    let b_phi = bp.upper;
    let b_u = u.bessel_bound();
    let s = phi.frame_operator();
    let norm_s = operator_norm(&s)?;
    let hyp_cross = 2.0 * (eps * b_u * b_phi).sqrt();
    let bound_cross = 2.0 * (eps * b_u).sqrt() * b_phi;
    let lhs = red + hyp_cross;
    let rhs = (a.max(0.0) / b_phi).sqrt();

    let mut b = Builder::new(CertificateName::RedundantSmallNorm);
    b.q("A", a)
        .q("B_phi", b_phi)
        .q("B_U", b_u)
        .q("epsilon", eps)
        .q("excess", split.excess as f64)
        .q("redundant_norm_sq", red)
        .q("hypothesis_cross_term", hyp_cross)
        .q("bound_cross_term", bound_cross)
        .q("norm_S", norm_s)
        .q("lhs", lhs)
        .q("rhs", rhs);
    if lhs >= rhs {
        return Ok(b.reject("sum of redundant squared norms + 2 sqrt(eps B_U B_phi) < sqrt(A / B_phi)"));
    }

    let transformed_lower = positive_part_sq(a.max(0.0).sqrt() - b_phi.sqrt() * red - bound_cross);
    let derived_lower = transformed_lower / (norm_s * norm_s);
    b.q("lower_transformed", transformed_lower).q("lower_dual_pair", derived_lower);

    let s_phi = phi.apply(&s)?;
    let shifted = Frame::from_synthesis(phi.synthesis() + &(&s * u.synthesis()).scale(eps))?;
    let dual = dual_member(&canonical_dual(phi)?, u, eps)?;
    let up_t = bessel_sum(&[&s_phi, &shifted])?;
    let up_d = bessel_sum(&[phi, &dual])?;
    Ok(b.conclude(vec![
        claim("S phi, phi + eps S U", vec![s_phi, shifted], Some(transformed_lower), Some(up_t)),
        claim("phi, phi^d_eps", vec![phi.clone(), dual], Some(derived_lower), Some(up_d)),
    ]))
}

/// Woven `(Φ, Ψ)` transfers to `(Ψ, S_Φ Φ^d_ε)` for small `ε`.
///
/// With `A` the oracle lower bound of `(Φ, Ψ)` and
/// `A_α = α²‖S_Φ‖B_U + 2α√(B_U B_Φ ‖S_Φ‖)`, the largest `α` with `A_α < A`
/// is found by bisection and `ε = α/2` is emitted with bound `A − A_ε`. When
/// `B_U = 0` every `α` works and `ε = 1` is used.
///
/// `A_α` is not homogeneous in the scale of `Φ`; for `‖S_Φ‖ > 1` the bound can
/// exceed the true one (see the tests).
pub fn cert_dual_transfer(phi: &Frame, psi: &Frame, u: &PerturbationSequence) -> Result<CertificateResult> {
    frame_bounds(psi)?;
    let bp = frame_bounds(phi)?;
    u.check_admissible(phi)?;
    let v = woven_pair(phi, psi, "phi and psi")?;
    let a = v.universal_lower;
    let b_u = u.bessel_bound();
    let s = phi.frame_operator();
    let norm_s = operator_norm(&s)?;
    let a_of = |t: f64| t * t * norm_s * b_u + 2.0 * t * (b_u * bp.upper * norm_s).sqrt();

    let mut b = Builder::new(CertificateName::DualTransfer);
    b.q("A", a).q("B", v.universal_upper).q("B_U", b_u).q("B_phi", bp.upper).q("norm_S", norm_s);
    let eps = match largest_satisfying(|t| a - a_of(t), None) {
        Search::Infeasible => return Ok(b.reject("A_alpha < A for some alpha > 0")),
        Search::Unbounded => {
            b.flag("alpha_unbounded", true);
            1.0
        }
        Search::Found(alpha) | Search::Capped(alpha) => {
            b.q("alpha", alpha).flag("alpha_unbounded", false);
            alpha / 2.0
        }
    };
    let a_eps = a_of(eps);
    b.q("epsilon", eps).q("A_eps", a_eps);

    let image = dual_member(&canonical_dual(phi)?, u, eps)?.apply(&s)?;
    let upper = bessel_sum(&[psi, &image])?;
    Ok(b.conclude(vec![claim("psi, S phi^d_eps", vec![psi.clone(), image], Some(a - a_eps), Some(upper))]))
}

/// A frame close to Parseval is woven with its canonical dual.
///
/// Applicable when `‖I − S⁻¹‖ ≤ A/(2(B + √(B/A)))`, with bounds `A/2` and
/// `B + 1/A`.
pub fn cert_canonical_dual_self(phi: &Frame) -> Result<CertificateResult> {
    let bp = frame_bounds(phi)?;
    let (a, bb) = (bp.lower, bp.upper);
    let s_inv = phi.frame_operator_power(SpdPower::Inverse)?;
    let dist = operator_norm(&(&Matrix::identity(phi.dim()) - &s_inv))?;
    let rhs = a / (2.0 * (bb + (bb / a).sqrt()));

    let mut b = Builder::new(CertificateName::CanonicalDualSelf);
    b.q("A_phi", a).q("B_phi", bb).q("delta_inverse", dist).q("rhs", rhs);
    if dist > rhs {
        return Ok(b.reject("||I - S^-1|| <= A / (2 (B + sqrt(B / A)))"));
    }
    let dual = phi.apply(&s_inv)?;
    Ok(b.conclude(vec![claim("phi, canonical dual", vec![phi.clone(), dual], Some(a / 2.0), Some(bb + 1.0 / a))]))
}

/// A frame close to Parseval is woven with the duals `{S⁻¹φᵢ + αuᵢ}`.
///
/// The hypothesis is
/// `‖I − S⁻¹‖ < A/(2B(1 + √‖S⁻¹‖) + 2√(B_U B))`. The largest `α ∈ (0, 1)`
/// with `‖I − S⁻¹‖ + α√(B_U/B)` below the same right-hand side is found by
/// bisection and half of it is emitted. Bounds are `A/2` and
/// `B + (√(‖S⁻¹‖B) + α√B_U)²`.
pub fn cert_dual_family(phi: &Frame, u: &PerturbationSequence) -> Result<CertificateResult> {
    let bp = frame_bounds(phi)?;
    u.check_admissible(phi)?;
    let (a, bb) = (bp.lower, bp.upper);
    let b_u = u.bessel_bound();
    let s_inv = phi.frame_operator_power(SpdPower::Inverse)?;
    let norm_s_inv = operator_norm(&s_inv)?;
    let dist = operator_norm(&(&Matrix::identity(phi.dim()) - &s_inv))?;
    let rhs = a / (2.0 * bb * (1.0 + norm_s_inv.sqrt()) + 2.0 * (b_u * bb).sqrt());

    let mut b = Builder::new(CertificateName::DualFamily);
    b.q("A_phi", a).q("B_phi", bb).q("B_U", b_u).q("norm_S_inv", norm_s_inv).q("delta_inverse", dist).q("rhs", rhs);
    if dist >= rhs {
        return Ok(b.reject("||I - S^-1|| < A / (2 B (1 + sqrt(||S^-1||)) + 2 sqrt(B_U B))"));
    }
    let step = (b_u / bb).sqrt();
    let alpha_max = match largest_satisfying(|t| rhs - dist - t * step, Some(1.0)) {
        Search::Found(x) | Search::Capped(x) => x,
        Search::Unbounded | Search::Infeasible => {
            return Ok(b.reject("some alpha in (0, 1) meets the perturbed inequality"));
        }
    };
    let alpha = alpha_max / 2.0;
    b.q("alpha_max", alpha_max).q("alpha", alpha);

    let dual = dual_member(&canonical_dual(phi)?, u, alpha)?;
    let b_dual = ((norm_s_inv * bb).sqrt() + alpha * b_u.sqrt()).powi(2);
    b.q("B_dual_estimate", b_dual);
    Ok(b.conclude(vec![claim("phi, phi^d_alpha", vec![phi.clone(), dual], Some(a / 2.0), Some(bb + b_dual))]))
}

/// Largest `α₀` with
/// `α₀B_U + α₀B_V + 2√(α₀B_U B_Φ) + 2√(α₀B_V B_Ψ) < A`.
pub fn parseval_alpha0(a: f64, b_u: f64, b_v: f64, b_phi: f64, b_psi: f64) -> Search {
    largest_satisfying(|t| a - parseval_lhs(t, b_u, b_v, b_phi, b_psi), None)
}

fn parseval_lhs(t: f64, b_u: f64, b_v: f64, b_phi: f64, b_psi: f64) -> f64 {
    t * b_u + t * b_v + 2.0 * (t * b_u * b_phi).sqrt() + 2.0 * (t * b_v * b_psi).sqrt()
}

fn check_parseval(f: &Frame) -> Result<()> {
    let b = f.bounds()?;
    if (b.lower - 1.0).abs() > PARSEVAL_TOL || (b.upper - 1.0).abs() > PARSEVAL_TOL {
        return Err(Error::NotParseval { lower: b.lower, upper: b.upper });
    }
    Ok(())
}

/// Woven Parseval frames with duals `{φᵢ + αuᵢ}`, `{ψᵢ + αvᵢ}`.
///
/// `α₀` is the largest root bound from [`parseval_alpha0`]; the emitted
/// `α = min(α₀, 1)/2` with bound `A − LHS(α)`.
pub fn cert_parseval_dual_pair(
    phi: &Frame,
    psi: &Frame,
    u: &PerturbationSequence,
    v: &PerturbationSequence,
) -> Result<CertificateResult> {
    phi.same_shape(psi)?;
    check_parseval(phi)?;
    check_parseval(psi)?;
    u.check_admissible(phi)?;
    v.check_admissible(psi)?;
    let w = woven_pair(phi, psi, "phi and psi")?;
    let a = w.universal_lower;
    let (b_u, b_v) = (u.bessel_bound(), v.bessel_bound());
    let b_phi = phi.bounds()?.upper;
    let b_psi = psi.bounds()?.upper;

    let mut b = Builder::new(CertificateName::ParsevalDualPair);
    b.q("A", a).q("B_U", b_u).q("B_V", b_v).q("B_phi", b_phi).q("B_psi", b_psi);
    let alpha = match parseval_alpha0(a, b_u, b_v, b_phi, b_psi) {
        Search::Infeasible => return Ok(b.reject("LHS(alpha0) < A for some alpha0 > 0")),
        Search::Unbounded => {
            b.flag("alpha0_unbounded", true);
            0.5
        }
        Search::Found(x) | Search::Capped(x) => {
            b.q("alpha0", x).flag("alpha0_unbounded", false);
            x.min(1.0) / 2.0
        }
    };
    let lhs = parseval_lhs(alpha, b_u, b_v, b_phi, b_psi);
    b.q("alpha", alpha).q("lhs", lhs);

    let phi_d = dual_member(phi, u, alpha)?;
    let psi_d = dual_member(psi, v, alpha)?;
    let upper = bessel_sum(&[&phi_d, &psi_d])?;
    Ok(b.conclude(vec![claim("phi^d_alpha, psi^d_alpha", vec![phi_d, psi_d], Some(a - lhs), Some(upper))]))
}

#[cfg(test)]
mod tests {
    use super::super::check_soundness;
    use super::*;
    use crate::duality::{canonical_parseval, make_dual, perturbation_space};

    fn frame(vs: &[&[f64]]) -> Frame {
        Frame::new(vs[0].len(), vs).unwrap()
    }

    /// Seeded instance with `‖S_Φ‖ ≈ 24`: the oracle lower bound of the
    /// concluded pair is about 0.69 of the guarantee.
    #[test]
    fn dual_transfer_overestimates_for_large_frames() {
        let phi = frame(&[
            &[0.7478370687392643, -3.2962586555559974],
            &[-3.059436254696313, -3.0920046838099675],
            &[-3.7417784832008625, 1.869358875723195],
        ]);
        let psi = frame(&[
            &[0.5800061064788029, -3.5181845172681885],
            &[-3.0238608695279154, -3.320952887268302],
            &[-3.8981659372349315, 2.101848114156416],
        ]);
        let u = PerturbationSequence::from_synthesis(
            Matrix::from_columns(
                2,
                &[
                    [0.00337814658751063, -0.002080474098005916],
                    [-0.0021368222940291574, 0.0013159889068180511],
                    [0.0024223173228090566, -0.001491814613932712],
                ],
            )
            .unwrap(),
        )
        .unwrap();
        let r = cert_dual_transfer(&phi, &psi, &u).unwrap();
        assert!(r.applicable);
        let s = check_soundness(&r).unwrap();
        assert!(!s.sound);
        let c = &s.checks[0];
        assert!(c.woven && c.oracle_lower < 0.7 * c.guaranteed_lower.unwrap());
    }

    fn mercedes() -> Frame {
        let h = 3f64.sqrt() / 2.0;
        frame(&[&[0.0, 1.0], &[-h, -0.5], &[h, -0.5]])
    }

    fn zero_u(f: &Frame) -> PerturbationSequence {
        PerturbationSequence::zeros(f.dim(), f.len())
    }

    fn member(f: &Frame, coeffs: &[&[f64]]) -> PerturbationSequence {
        make_dual(&perturbation_space(f).unwrap(), &Matrix::from_rows(coeffs).unwrap()).unwrap().1
    }

    #[test]
    fn redundant_small_norm_examples() {
        let phi = frame(&[&[1.0, 0.0], &[0.0, 1.0], &[0.01, 0.0]]);
        let r = cert_redundant_small_norm(&phi, &zero_u(&phi), 0.0).unwrap();
        assert!(r.applicable);
        assert!((r.quantity("redundant_norm_sq").unwrap() - 1e-4).abs() < 1e-18);
        assert!(check_soundness(&r).unwrap().sound);

        let e1e1e2 = frame(&[&[1.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]]);
        let r = cert_redundant_small_norm(&e1e1e2, &zero_u(&e1e1e2), 0.0).unwrap();
        assert!(!r.applicable);

        let z = frame(&[&[1.0, 0.0], &[0.0, 2.0], &[0.0, 0.0]]);
        let r = cert_redundant_small_norm(&z, &zero_u(&z), 0.0).unwrap();
        let a = r.quantity("A").unwrap();
        assert!((r.claims[1].lower.unwrap() - a / 16.0).abs() < 1e-12);

        let onb = Frame::orthonormal_basis(2);
        assert!(matches!(cert_redundant_small_norm(&onb, &zero_u(&onb), 0.0), Err(Error::NoRedundancy)));
    }

    #[test]
    fn redundant_small_norm_records_both_cross_terms() {
        let phi = frame(&[&[1.0, 0.0], &[0.0, 1.3], &[0.05, 0.02]]);
        let u = member(&phi, &[&[0.01], &[-0.02]]);
        let r = cert_redundant_small_norm(&phi, &u, 0.3).unwrap();
        let b_phi = r.quantity("B_phi").unwrap();
        let h = r.quantity("hypothesis_cross_term").unwrap();
        let p = r.quantity("bound_cross_term").unwrap();
        assert!((h * b_phi.sqrt() - p).abs() < 1e-12);
    }

    #[test]
    fn dual_transfer_examples() {
        let phi = frame(&[&[1.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]]);
        let psi = frame(&[&[1.0, 0.0], &[0.0, 1.0], &[0.0, 1.0]]);
        let r = cert_dual_transfer(&phi, &psi, &zero_u(&phi)).unwrap();
        assert_eq!(r.guaranteed_lower, Some(1.0));
        assert_eq!(r.quantity("alpha_unbounded"), Some(1.0));

        // ‖S‖ = B_Φ = B_U = A = 1 reduces A_α < A to α² + 2α < 1.
        let onb = Frame::orthonormal_basis(2);
        let r = cert_dual_transfer(&onb, &onb, &zero_u(&onb)).unwrap();
        assert_eq!(r.guaranteed_lower, Some(1.0));
        let s = largest_satisfying(|t| 1.0 - (t * t + 2.0 * t), None).value().unwrap();
        assert!((s - (2f64.sqrt() - 1.0)).abs() < 1e-8);

        let eta = frame(&[&[1.0, 0.0], &[0.0, 1.0], &[1.0, 0.0]]);
        assert!(matches!(cert_dual_transfer(&phi, &eta, &zero_u(&phi)), Err(Error::NotWoven(_))));
    }

    #[test]
    fn dual_transfer_alpha_solves_quadratic() {
        let p = mercedes().scaled((2.0f64 / 3.0).sqrt());
        let u = member(&p, &[&[1.0], &[0.0]]);
        assert!((u.bessel_bound() - 1.0).abs() < 1e-12);
        let r = cert_dual_transfer(&p, &p, &u).unwrap();
        let a = r.quantity("A").unwrap();
        assert!((a - 1.0).abs() < 1e-12);
        let alpha = r.quantity("alpha").unwrap();
        assert!((alpha - (2f64.sqrt() - 1.0)).abs() < 1e-8);
        assert!((r.quantity("epsilon").unwrap() - alpha / 2.0).abs() < 1e-15);
    }

    #[test]
    fn canonical_dual_self_examples() {
        let p = mercedes().scaled((2.0f64 / 3.0).sqrt());
        let r = cert_canonical_dual_self(&p).unwrap();
        assert!(r.applicable);
        assert!((r.guaranteed_lower.unwrap() - 0.5).abs() < 1e-12);
        assert!((r.guaranteed_upper.unwrap() - 2.0).abs() < 1e-12);

        let phi = frame(&[&[1.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]]);
        let r = cert_canonical_dual_self(&phi).unwrap();
        assert!(!r.applicable);
        assert!((r.quantity("delta_inverse").unwrap() - 0.5).abs() < 1e-14);
        assert!((r.quantity("rhs").unwrap() - 1.0 / (2.0 * (2.0 + 2f64.sqrt()))).abs() < 1e-14);
        let oracle = exhaustive_multi(&[phi.clone(), canonical_dual(&phi).unwrap()]).unwrap();
        assert!(oracle.woven);

        let near = frame(&[&[0.999, 0.0], &[0.0, 1.0]]);
        let r = cert_canonical_dual_self(&near).unwrap();
        assert!(r.applicable);
        assert!(check_soundness(&r).unwrap().sound);
    }

    #[test]
    fn dual_family_examples() {
        let p = mercedes().scaled((2.0f64 / 3.0).sqrt());
        let r = cert_dual_family(&p, &zero_u(&p)).unwrap();
        assert!(r.applicable);
        assert!((r.guaranteed_lower.unwrap() - 0.5).abs() < 1e-12);
        assert!((r.guaranteed_upper.unwrap() - 2.0).abs() < 1e-12);

        let phi = frame(&[&[1.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]]);
        let r = cert_dual_family(&phi, &zero_u(&phi)).unwrap();
        assert!(!r.applicable);
        assert!((r.quantity("rhs").unwrap() - 1.0 / 8.0).abs() < 1e-14);

        let near = mercedes().scaled(0.82);
        let u = member(&near, &[&[0.01], &[0.02]]);
        let r = cert_dual_family(&near, &u).unwrap();
        assert!(r.applicable);
        assert!(check_soundness(&r).unwrap().sound);
    }

    #[test]
    fn parseval_alpha0_solves_sqrt_quadratic() {
        // 2t + 4√t = 1 with √t = (√6 − 2)/2.
        let s = parseval_alpha0(1.0, 1.0, 1.0, 1.0, 1.0).value().unwrap();
        let root = ((6f64.sqrt() - 2.0) / 2.0).powi(2);
        assert!((s - root).abs() < 1e-9);
        assert!((root - 0.050510).abs() < 1e-6);
    }

    #[test]
    fn parseval_dual_pair_examples() {
        let p = mercedes().scaled((2.0f64 / 3.0).sqrt());
        let r = cert_parseval_dual_pair(&p, &p, &zero_u(&p), &zero_u(&p)).unwrap();
        assert!(r.applicable);
        assert_eq!(r.quantity("alpha0_unbounded"), Some(1.0));
        assert!((r.guaranteed_lower.unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(r.claims[0].frames[0], p);

        let u = member(&p, &[&[0.3], &[-0.2]]);
        let r = cert_parseval_dual_pair(&p, &p, &u, &u).unwrap();
        assert!(r.applicable);
        assert!(check_soundness(&r).unwrap().sound);

        let phi = frame(&[&[1.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]]);
        assert!(matches!(
            cert_parseval_dual_pair(&phi, &phi, &zero_u(&phi), &zero_u(&phi)),
            Err(Error::NotParseval { .. })
        ));
        let cp = canonical_parseval(&phi).unwrap();
        assert!(cert_parseval_dual_pair(&cp, &cp, &zero_u(&cp), &zero_u(&cp)).unwrap().applicable);
    }
}
