//! Sufficient conditions for wovenness, checked numerically.
//!
//! Each certificate verifies a hypothesis on its inputs and, when it holds,
//! emits guaranteed universal bounds for one or more concluded families. A
//! [`Claim`] carries the concluded frames so that [`check_soundness`] can hold
//! the guarantee against the exhaustive oracle.
//!
//! Hypotheses are compared in plain binary64 arithmetic with no added slack.
//! Universal lower bounds that a hypothesis needs as input are computed by the
//! exhaustive oracle.

mod duals;
mod perturbation;
mod stability;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{BoundsReport, Frame};
use crate::weaving::{exhaustive_multi, WeavingVerdict};

pub use duals::{
    cert_canonical_dual_self, cert_dual_family, cert_dual_transfer, cert_parseval_dual_pair,
    cert_redundant_small_norm, parseval_alpha0,
};
pub use perturbation::{
    cert_bessel_union, cert_operator_multiplier, cert_scalar_weaving, cert_synthesis_proximity,
    cert_transitive_bridge, cert_transitive_bridge_frames,
};
pub use stability::{
    cert_canonical_pair, cert_canonical_parseval, cert_duals_to_frames, cert_perturbed_duals, Direction,
    DualVariant,
};

/// Relative slack allowed when comparing a guarantee with oracle bounds.
pub const SOUNDNESS_TOL: f64 = 1e-9;

/// Margin by which a searched parameter must satisfy its strict inequality.
pub const SEARCH_MARGIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateName {
    SynthesisProximity,
    OperatorMultiplier,
    TransitiveBridge,
    BesselUnion,
    RedundantSmallNorm,
    DualTransfer,
    CanonicalDualSelf,
    DualFamily,
    ParsevalDualPair,
    PerturbedDuals,
    DualsToFrames,
    CanonicalPair,
    CanonicalParseval,
    ScalarWeaving,
}

impl CertificateName {
    pub const ALL: [CertificateName; 14] = [
        CertificateName::SynthesisProximity,
        CertificateName::OperatorMultiplier,
        CertificateName::TransitiveBridge,
        CertificateName::BesselUnion,
        CertificateName::RedundantSmallNorm,
        CertificateName::DualTransfer,
        CertificateName::CanonicalDualSelf,
        CertificateName::DualFamily,
        CertificateName::ParsevalDualPair,
        CertificateName::PerturbedDuals,
        CertificateName::DualsToFrames,
        CertificateName::CanonicalPair,
        CertificateName::CanonicalParseval,
        CertificateName::ScalarWeaving,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CertificateName::SynthesisProximity => "synthesis_proximity",
            CertificateName::OperatorMultiplier => "operator_multiplier",
            CertificateName::TransitiveBridge => "transitive_bridge",
            CertificateName::BesselUnion => "bessel_union",
            CertificateName::RedundantSmallNorm => "redundant_small_norm",
            CertificateName::DualTransfer => "dual_transfer",
            CertificateName::CanonicalDualSelf => "canonical_dual_self",
            CertificateName::DualFamily => "dual_family",
            CertificateName::ParsevalDualPair => "parseval_dual_pair",
            CertificateName::PerturbedDuals => "perturbed_duals",
            CertificateName::DualsToFrames => "duals_to_frames",
            CertificateName::CanonicalPair => "canonical_pair",
            CertificateName::CanonicalParseval => "canonical_parseval",
            CertificateName::ScalarWeaving => "scalar_weaving",
        }
    }
}

impl fmt::Display for CertificateName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CertificateName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        CertificateName::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown certificate '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateKind {
    TwoSided,
    /// Guarantees an upper bound only; `applicable` does not require a lower bound.
    UpperOnly,
}

/// Guaranteed bounds for every weaving of `frames`. Certificates stated on
/// scalars alone leave `frames` empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Claim {
    pub label: String,
    pub frames: Vec<Frame>,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateResult {
    pub name: CertificateName,
    pub kind: CertificateKind,
    pub applicable: bool,
    pub quantities: BTreeMap<String, f64>,
    pub guaranteed_lower: Option<f64>,
    pub guaranteed_upper: Option<f64>,
    pub failed_condition: Option<String>,
    /// Concluded families; the first one carries the headline bounds.
    pub claims: Vec<Claim>,
}

impl CertificateResult {
    pub fn quantity(&self, key: &str) -> Option<f64> {
        self.quantities.get(key).copied()
    }
}

/// Accumulates quantities and finalizes a [`CertificateResult`].
pub(crate) struct Builder {
    name: CertificateName,
    kind: CertificateKind,
    quantities: BTreeMap<String, f64>,
}

impl Builder {
    pub(crate) fn new(name: CertificateName) -> Self {
        Builder { name, kind: CertificateKind::TwoSided, quantities: BTreeMap::new() }
    }

    pub(crate) fn upper_only(name: CertificateName) -> Self {
        Builder { name, kind: CertificateKind::UpperOnly, quantities: BTreeMap::new() }
    }

    /// Records a scalar. Non-finite values are dropped.
    pub(crate) fn q(&mut self, key: &str, value: f64) -> &mut Self {
        if value.is_finite() {
            self.quantities.insert(key.to_owned(), value);
        }
        self
    }

    pub(crate) fn flag(&mut self, key: &str, on: bool) -> &mut Self {
        self.q(key, if on { 1.0 } else { 0.0 })
    }

    pub(crate) fn reject(self, condition: impl Into<String>) -> CertificateResult {
        CertificateResult {
            name: self.name,
            kind: self.kind,
            applicable: false,
            quantities: self.quantities,
            guaranteed_lower: None,
            guaranteed_upper: None,
            failed_condition: Some(condition.into()),
            claims: Vec::new(),
        }
    }

    /// Applicable with the given claims, unless the headline lower bound is
    /// not positive for a two-sided certificate.
    pub(crate) fn conclude(mut self, claims: Vec<Claim>) -> CertificateResult {
        let head = claims.first();
        let lower = head.and_then(|c| c.lower);
        let upper = head.and_then(|c| c.upper);
        if let Some(l) = lower {
            self.q("computed_lower", l);
        }
        if self.kind == CertificateKind::TwoSided && !matches!(lower, Some(l) if l > 0.0) {
            return self.reject("guaranteed lower bound is not positive");
        }
        CertificateResult {
            name: self.name,
            kind: self.kind,
            applicable: true,
            quantities: self.quantities,
            guaranteed_lower: lower,
            guaranteed_upper: upper,
            failed_condition: None,
            claims,
        }
    }
}

pub(crate) fn claim(label: &str, frames: Vec<Frame>, lower: Option<f64>, upper: Option<f64>) -> Claim {
    Claim { label: label.to_owned(), frames, lower, upper }
}

/// Sum of the optimal Bessel bounds of `frames`.
pub(crate) fn bessel_sum(frames: &[&Frame]) -> Result<f64> {
    frames.iter().try_fold(0.0, |acc, f| Ok(acc + f.bounds()?.upper))
}

pub(crate) fn frame_bounds(f: &Frame) -> Result<BoundsReport> {
    f.frame_bounds_checked()
}

pub(crate) fn check_finite(name: &str, values: &[f64]) -> Result<()> {
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("{name}: {v}")));
    }
    Ok(())
}

/// Oracle verdict for a pair that the hypothesis requires to be woven.
pub(crate) fn woven_pair(a: &Frame, b: &Frame, what: &str) -> Result<WeavingVerdict> {
    a.same_shape(b)?;
    let v = exhaustive_multi(&[a.clone(), b.clone()])?;
    if !v.woven {
        let sigma = v.witness.as_ref().map(|w| w.assignment.sigma()).unwrap_or_default();
        return Err(Error::NotWoven(format!(
            "{what}: weaving taking indices {:?} from the first family is not a frame",
            sigma.iter().map(|i| i + 1).collect::<Vec<_>>()
        )));
    }
    Ok(v)
}

/// Outcome of a search for the largest parameter meeting a strict inequality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Search {
    /// Largest value found, to within `1e-9` relative.
    Found(f64),
    /// Every value up to the cap satisfies the inequality.
    Capped(f64),
    /// The inequality holds for all positive values tested.
    Unbounded,
    /// No positive value satisfies the inequality.
    Infeasible,
}

impl Search {
    pub fn value(self) -> Option<f64> {
        match self {
            Search::Found(x) | Search::Capped(x) => Some(x),
            _ => None,
        }
    }
}

const UNBOUNDED_PROBE: f64 = 1e12;

/// Largest `t > 0` with `slack(t) ≥ SEARCH_MARGIN`, for `slack` non-increasing.
pub fn largest_satisfying(slack: impl Fn(f64) -> f64, cap: Option<f64>) -> Search {
    let ok = |t: f64| slack(t) >= SEARCH_MARGIN;
    if !ok(0.0) {
        return Search::Infeasible;
    }
    let hi = match cap {
        Some(c) => {
            if ok(c) {
                return Search::Capped(c);
            }
            c
        }
        None => {
            let mut hi = 1.0;
            while ok(hi) {
                if hi >= UNBOUNDED_PROBE {
                    return Search::Unbounded;
                }
                hi *= 2.0;
            }
            hi
        }
    };
    let (mut lo, mut hi) = (0.0f64, hi);
    for _ in 0..200 {
        if hi - lo <= 1e-9 * hi.max(f64::MIN_POSITIVE) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if lo > 0.0 {
        Search::Found(lo)
    } else {
        Search::Infeasible
    }
}

/// Oracle comparison for one claim.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClaimCheck {
    pub label: String,
    pub woven: bool,
    pub oracle_lower: f64,
    pub oracle_upper: f64,
    pub guaranteed_lower: Option<f64>,
    pub guaranteed_upper: Option<f64>,
    pub sound: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SoundnessReport {
    pub sound: bool,
    pub checks: Vec<ClaimCheck>,
}

/// Holds every claim of an applicable certificate against the oracle.
///
/// A two-sided claim is sound when the family is woven with
/// `A ≥ lower·(1 − 1e-9)` and `B ≤ upper·(1 + 1e-9)`; an upper-only claim
/// only needs the second inequality. Inapplicable results are vacuously sound.
pub fn check_soundness(result: &CertificateResult) -> Result<SoundnessReport> {
    if !result.applicable {
        return Ok(SoundnessReport { sound: true, checks: Vec::new() });
    }
    let mut checks = Vec::with_capacity(result.claims.len());
    for c in result.claims.iter().filter(|c| !c.frames.is_empty()) {
        let v = exhaustive_multi(&c.frames)?;
        let lower_ok = match c.lower {
            Some(l) => v.woven && v.universal_lower >= l * (1.0 - SOUNDNESS_TOL),
            None => true,
        };
        let upper_ok = match c.upper {
            Some(u) => v.universal_upper <= u * (1.0 + SOUNDNESS_TOL),
            None => true,
        };
        checks.push(ClaimCheck {
            label: c.label.clone(),
            woven: v.woven,
            oracle_lower: v.universal_lower,
            oracle_upper: v.universal_upper,
            guaranteed_lower: c.lower,
            guaranteed_upper: c.upper,
            sound: lower_ok && upper_ok,
        });
    }
    Ok(SoundnessReport { sound: checks.iter().all(|c| c.sound), checks })
}
