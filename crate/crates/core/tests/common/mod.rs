//! Seeded instance generators shared by the integration suites.
#![allow(dead_code)]

use woven_core::certificates::{self as cert, CertificateName, CertificateResult, Direction, DualVariant};
use woven_core::duality::{canonical_parseval, random_dual, PerturbationSequence};
use woven_core::error::Result;
use woven_core::frame::Frame;
use woven_core::numerics::Matrix;
use woven_core::rng::SeededRng;
use woven_core::weaving::random_frame;

pub fn frame(vs: &[&[f64]]) -> Frame {
    Frame::new(vs[0].len(), vs).unwrap()
}

/// `10^u` with `u` uniform on `[log10(lo), log10(hi)]`.
pub fn log_uniform(rng: &mut SeededRng, lo: f64, hi: f64) -> f64 {
    10f64.powf(rng.uniform(lo.log10(), hi.log10()))
}

/// Random frame, Parseval-normalized half of the time, then scaled by a
/// log-uniform factor in `[0.2, 5]`.
pub fn base_frame(rng: &mut SeededRng, d: usize, n: usize) -> Result<Frame> {
    let mut f = random_frame(d, n, rng)?;
    if rng.unit() < 0.5 {
        f = canonical_parseval(&f)?;
    }
    Ok(f.scaled(log_uniform(rng, 0.2, 5.0)))
}

/// `f + δR` with `R` entries uniform on `[-1, 1]`.
pub fn nearby(rng: &mut SeededRng, f: &Frame, delta: f64) -> Result<Frame> {
    let (d, n) = (f.dim(), f.len());
    let r = Matrix::from_row_major(d, n, (0..d * n).map(|_| rng.symmetric(delta)).collect())?;
    Frame::from_synthesis(f.synthesis() + &r)
}

/// Nearby frame that is still a frame.
pub fn nearby_frame(rng: &mut SeededRng, f: &Frame, delta: f64) -> Result<Frame> {
    loop {
        let g = nearby(rng, f, delta)?;
        if g.is_frame()? {
            return Ok(g);
        }
    }
}

/// A scaled orthonormal basis followed by `n − d` short vectors.
pub fn small_redundancy(rng: &mut SeededRng, d: usize, n: usize) -> Result<Frame> {
    let basis = canonical_parseval(&random_frame(d, d, rng)?)?.scaled(log_uniform(rng, 0.2, 5.0));
    let mut vectors = basis.vectors();
    for _ in d..n {
        let len = log_uniform(rng, 1e-3, 0.3);
        let v: Vec<f64> = (0..d).map(|_| rng.symmetric(1.0)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        vectors.push(v.iter().map(|x| x * len / norm).collect());
    }
    Frame::new(d, &vectors)
}

/// An admissible perturbation for `f` of random size.
pub fn admissible(rng: &mut SeededRng, f: &Frame, lo: f64, hi: f64) -> Result<PerturbationSequence> {
    let scale = log_uniform(rng, lo, hi);
    Ok(random_dual(f, rng.split(), scale)?.1)
}

pub fn random_scalars(rng: &mut SeededRng, n: usize) -> Vec<f64> {
    (0..n)
        .map(|_| {
            let m = rng.uniform(0.5, 2.0);
            if rng.unit() < 0.5 {
                -m
            } else {
                m
            }
        })
        .collect()
}

/// One random instance of certificate `name` at `d`, `n`. Errors mean the
/// drawn input violates a precondition that the certificate reports as an error.
pub fn certificate_trial(name: CertificateName, rng: &mut SeededRng, d: usize, n: usize) -> Result<CertificateResult> {
    use CertificateName as N;
    let phi = base_frame(rng, d, n)?;
    let delta = log_uniform(rng, 1e-3, 0.5);
    match name {
        N::SynthesisProximity => {
            let psi = nearby_frame(rng, &phi, delta)?;
            cert::cert_synthesis_proximity(&phi, &psi)
        }
        N::OperatorMultiplier => {
            let r = Matrix::from_row_major(d, d, (0..d * d).map(|_| rng.symmetric(delta)).collect())?;
            cert::cert_operator_multiplier(&phi, &(&Matrix::identity(d) + &r))
        }
        N::TransitiveBridge => {
            let psi = nearby_frame(rng, &phi, delta)?;
            let delta2 = log_uniform(rng, 1e-3, 0.5);
            let eta = nearby_frame(rng, &psi, delta2)?;
            cert::cert_transitive_bridge_frames(&phi, &psi, &eta)
        }
        N::BesselUnion => {
            // Three families only while 3ⁿ stays inside one sequential chunk.
            let m = if n <= 6 { 3 } else { 2 };
            let mut fs = vec![phi];
            for _ in 1..m {
                fs.push(base_frame(rng, d, n)?);
            }
            cert::cert_bessel_union(&fs)
        }
        N::RedundantSmallNorm => {
            let phi = small_redundancy(rng, d, n)?;
            let u = admissible(rng, &phi, 1e-3, 1.0)?;
            let eps = rng.uniform(0.0, 2.0);
            cert::cert_redundant_small_norm(&phi, &u, eps)
        }
        N::DualTransfer => {
            let psi = nearby_frame(rng, &phi, delta)?;
            let u = admissible(rng, &phi, 1e-3, 1.0)?;
            cert::cert_dual_transfer(&phi, &psi, &u)
        }
        N::CanonicalDualSelf => {
            let f = nearby_frame(rng, &canonical_parseval(&phi)?, delta)?;
            cert::cert_canonical_dual_self(&f)
        }
        N::DualFamily => {
            let f = nearby_frame(rng, &canonical_parseval(&phi)?, delta)?;
            let u = admissible(rng, &f, 1e-3, 1.0)?;
            cert::cert_dual_family(&f, &u)
        }
        N::ParsevalDualPair => {
            let p = canonical_parseval(&phi)?;
            let q = canonical_parseval(&nearby_frame(rng, &p, delta)?)?;
            let u = admissible(rng, &p, 1e-3, 1.0)?;
            let v = admissible(rng, &q, 1e-3, 1.0)?;
            cert::cert_parseval_dual_pair(&p, &q, &u, &v)
        }
        N::PerturbedDuals => {
            let psi = nearby_frame(rng, &phi, delta)?;
            let u = admissible(rng, &phi, 1e-3, 1.0)?;
            let v = admissible(rng, &psi, 1e-3, 1.0)?;
            let variant = if rng.unit() < 0.5 { DualVariant::SharedInverse } else { DualVariant::CanonicalDuals };
            cert::cert_perturbed_duals(&phi, &psi, &u, &v, variant)
        }
        N::DualsToFrames => {
            let psi = nearby_frame(rng, &phi, delta)?;
            let (s1, s2) = (log_uniform(rng, 1e-3, 0.3), log_uniform(rng, 1e-3, 0.3));
            let phi_d = random_dual(&phi, rng.split(), s1)?.0;
            let psi_d = random_dual(&psi, rng.split(), s2)?.0;
            cert::cert_duals_to_frames(&phi, &psi, &phi_d, &psi_d)
        }
        N::CanonicalPair => {
            let psi = nearby_frame(rng, &phi, delta)?;
            let dir = if rng.unit() < 0.5 { Direction::OriginalsToDuals } else { Direction::DualsToOriginals };
            cert::cert_canonical_pair(&phi, &psi, dir)
        }
        N::CanonicalParseval => {
            let psi = nearby_frame(rng, &phi, delta)?;
            cert::cert_canonical_parseval(&phi, &psi)
        }
        N::ScalarWeaving => {
            let psi = nearby_frame(rng, &phi, delta)?;
            let alpha = random_scalars(rng, n);
            let beta = random_scalars(rng, n);
            cert::cert_scalar_weaving(&phi, &psi, &alpha, &beta)
        }
    }
}
