//! Exhaustive wovenness checking.
//!
//! A family of `m` frames with `n` vectors each is woven when every partition
//! of the index set, taking element `i` from frame `choice[i]`, yields a frame.
//! At finite `n` there are `mⁿ` partitions and all of them are enumerated.
//!
//! Partitions are numbered by the odometer code `Σ choice[i]·mⁱ`. For a pair
//! `(Φ, Ψ)` bit `i` of the code is set when element `i` comes from `Ψ`, so the
//! subset `σ` of indices taken from `Φ` is the complement of the code's bits.
//! The reported witness is the failing partition with the smallest code.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::numerics::{self, positivity_threshold, Matrix};
use crate::rng::SeededRng;

/// Maximum number of partitions evaluated by one exhaustive call.
pub const PARTITION_LIMIT: u64 = 1 << 24;

/// Which frame supplies each index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct PartitionAssignment {
    pub frames: usize,
    pub choice: Vec<usize>,
}

impl PartitionAssignment {
    pub fn new(frames: usize, choice: Vec<usize>) -> Result<Self> {
        if let Some(i) = choice.iter().position(|&c| c >= frames) {
            return Err(Error::InvalidParameter(format!(
                "choice[{i}] = {} but only {frames} frames are woven",
                choice[i]
            )));
        }
        Ok(PartitionAssignment { frames, choice })
    }

    /// Pair assignment taking the indices in `sigma` (0-based) from the first frame.
    pub fn from_subset(n: usize, sigma: &[usize]) -> Result<Self> {
        let mut choice = vec![1; n];
        for &i in sigma {
            if i >= n {
                return Err(Error::InvalidParameter(format!("index {i} out of range for {n} vectors")));
            }
            choice[i] = 0;
        }
        Ok(PartitionAssignment { frames: 2, choice })
    }

    pub fn from_code(frames: usize, n: usize, mut code: u64) -> Self {
        let m = frames as u64;
        let choice = (0..n)
            .map(|_| {
                let c = (code % m) as usize;
                code /= m;
                c
            })
            .collect();
        PartitionAssignment { frames, choice }
    }

    pub fn code(&self) -> u64 {
        self.choice.iter().rev().fold(0u64, |acc, &c| acc * self.frames as u64 + c as u64)
    }

    pub fn len(&self) -> usize {
        self.choice.len()
    }

    pub fn is_empty(&self) -> bool {
        self.choice.is_empty()
    }

    /// Indices (0-based, ascending) supplied by frame `j`.
    pub fn indices_of(&self, j: usize) -> Vec<usize> {
        self.choice.iter().enumerate().filter(|(_, &c)| c == j).map(|(i, _)| i).collect()
    }

    /// For a pair, the indices taken from the first frame.
    pub fn sigma(&self) -> Vec<usize> {
        self.indices_of(0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub assignment: PartitionAssignment,
    pub lambda_min: f64,
    pub lambda_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeavingVerdict {
    pub woven: bool,
    pub universal_lower: f64,
    pub universal_upper: f64,
    pub witness: Option<Witness>,
    pub partitions_checked: u64,
}

fn check_family(frames: &[Frame]) -> Result<(usize, usize)> {
    let first = frames
        .first()
        .ok_or_else(|| Error::InvalidParameter("at least one frame is required".into()))?;
    for f in &frames[1..] {
        first.same_shape(f)?;
    }
    Ok((first.dim(), first.len()))
}

fn partition_count(m: usize, n: usize) -> Result<u64> {
    let count = (m as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if count > PARTITION_LIMIT as u128 {
        return Err(Error::TooLarge { count, limit: PARTITION_LIMIT });
    }
    Ok(count as u64)
}

/// `{φᵢ}_{i∈σ} ∪ {ψᵢ}_{i∉σ}` in index order; `sigma` is 0-based.
pub fn weave(phi: &Frame, psi: &Frame, sigma: &[usize]) -> Result<Frame> {
    let a = PartitionAssignment::from_subset(phi.len(), sigma)?;
    weave_assignment(&[phi.clone(), psi.clone()], &a)
}

/// The weaving selected by `assignment`.
pub fn weave_assignment(frames: &[Frame], assignment: &PartitionAssignment) -> Result<Frame> {
    let (d, n) = check_family(frames)?;
    if assignment.len() != n || assignment.frames != frames.len() {
        return Err(Error::DimensionMismatch(format!(
            "assignment covers {} indices over {} frames, family has {n} vectors over {} frames",
            assignment.len(),
            assignment.frames,
            frames.len()
        )));
    }
    let mut t = Matrix::zeros(d, n);
    for (i, &c) in assignment.choice.iter().enumerate() {
        t.set_column(i, &frames[c].vector(i));
    }
    Frame::from_synthesis(t)
}

/// Frame operator of the weaving with the given code.
fn weaving_operator(frames: &[Frame], d: usize, n: usize, mut code: u64) -> Matrix {
    let m = frames.len() as u64;
    let mut s = Matrix::zeros(d, d);
    for i in 0..n {
        let c = (code % m) as usize;
        code /= m;
        let t = frames[c].synthesis();
        for r in 0..d {
            let vr = t[(r, i)];
            if vr == 0.0 {
                continue;
            }
            for q in 0..d {
                s[(r, q)] += vr * t[(q, i)];
            }
        }
    }
    s
}

#[derive(Debug, Clone, Copy)]
struct Partial {
    lower: f64,
    upper: f64,
    witness: Option<(u64, f64, f64)>,
}

impl Partial {
    const EMPTY: Partial = Partial { lower: f64::INFINITY, upper: f64::NEG_INFINITY, witness: None };

    fn merge(self, other: Partial) -> Partial {
        let witness = match (self.witness, other.witness) {
            (Some(a), Some(b)) => Some(if a.0 <= b.0 { a } else { b }),
            (a, b) => a.or(b),
        };
        Partial { lower: self.lower.min(other.lower), upper: self.upper.max(other.upper), witness }
    }
}

fn scan(frames: &[Frame], d: usize, n: usize, codes: std::ops::Range<u64>) -> Result<Partial> {
    let mut acc = Partial::EMPTY;
    for code in codes {
        let (lo, hi) = numerics::extreme_eigenvalues(&weaving_operator(frames, d, n, code))?;
        acc.lower = acc.lower.min(lo);
        acc.upper = acc.upper.max(hi);
        if acc.witness.is_none() && lo <= positivity_threshold(hi) {
            acc.witness = Some((code, lo, hi));
        }
    }
    Ok(acc)
}

/// Degree of parallelism for exhaustive enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Threads {
    /// Rayon's global pool.
    #[default]
    Auto,
    /// A dedicated pool of this many workers. `Fixed(1)` runs inline.
    Fixed(usize),
}

const CHUNK: u64 = 2048;

fn enumerate(frames: &[Frame], threads: Threads) -> Result<WeavingVerdict> {
    let (d, n) = check_family(frames)?;
    let total = partition_count(frames.len(), n)?;

    let partial = if total <= CHUNK || threads == Threads::Fixed(1) {
        scan(frames, d, n, 0..total)?
    } else {
        let chunks: Vec<std::ops::Range<u64>> =
            (0..total.div_ceil(CHUNK)).map(|k| k * CHUNK..((k + 1) * CHUNK).min(total)).collect();
        let run = || {
            chunks
                .par_iter()
                .map(|r| scan(frames, d, n, r.clone()))
                .try_reduce(|| Partial::EMPTY, |a, b| Ok(a.merge(b)))
        };
        match threads {
            Threads::Auto => run()?,
            Threads::Fixed(k) => rayon::ThreadPoolBuilder::new()
                .num_threads(k.max(1))
                .build()
                .map_err(|e| Error::InvalidParameter(format!("cannot start worker pool: {e}")))?
                .install(run)?,
        }
    };

    let witness = partial.witness.map(|(code, lambda_min, lambda_max)| Witness {
        assignment: PartitionAssignment::from_code(frames.len(), n, code),
        lambda_min,
        lambda_max,
    });
    Ok(WeavingVerdict {
        woven: witness.is_none(),
        universal_lower: partial.lower,
        universal_upper: partial.upper,
        witness,
        partitions_checked: total,
    })
}

/// Universal bounds over all `2ⁿ` weavings of `Φ` and `Ψ`.
pub fn exhaustive_pair(phi: &Frame, psi: &Frame) -> Result<WeavingVerdict> {
    exhaustive_pair_with(phi, psi, Threads::Auto)
}

pub fn exhaustive_pair_with(phi: &Frame, psi: &Frame, threads: Threads) -> Result<WeavingVerdict> {
    phi.same_shape(psi)?;
    enumerate(&[phi.clone(), psi.clone()], threads)
}

/// Universal bounds over all `mⁿ` weavings of `frames`.
pub fn exhaustive_multi(frames: &[Frame]) -> Result<WeavingVerdict> {
    exhaustive_multi_with(frames, Threads::Auto)
}

pub fn exhaustive_multi_with(frames: &[Frame], threads: Threads) -> Result<WeavingVerdict> {
    enumerate(frames, threads)
}

/// Whether every weaving of `Φ` and `Ψ` is a Riesz basis.
pub fn riesz_woven(phi: &Frame, psi: &Frame) -> Result<bool> {
    phi.same_shape(psi)?;
    if phi.len() != phi.dim() {
        return Err(Error::DimensionMismatch(format!(
            "Riesz weaving needs n = d, got n = {} in dimension {}",
            phi.len(),
            phi.dim()
        )));
    }
    let total = partition_count(2, phi.len())?;
    let frames = [phi.clone(), psi.clone()];
    for code in 0..total {
        let w = weave_assignment(&frames, &PartitionAssignment::from_code(2, phi.len(), code))?;
        if !w.is_riesz_basis()? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Non-woven pair found by [`counterexample_search`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Counterexample {
    pub trial: usize,
    pub phi: Frame,
    pub psi: Frame,
    pub verdict: WeavingVerdict,
}

const MAX_REJECTIONS: usize = 1000;

/// A frame with i.i.d. entries uniform on `[-1, 1]`, drawn vector by vector.
pub fn random_frame(dim: usize, n: usize, rng: &mut SeededRng) -> Result<Frame> {
    if n < dim {
        return Err(Error::InvalidParameter(format!("{n} vectors cannot span dimension {dim}")));
    }
    for _ in 0..MAX_REJECTIONS {
        let vectors: Vec<Vec<f64>> = (0..n).map(|_| (0..dim).map(|_| rng.symmetric(1.0)).collect()).collect();
        let f = Frame::new(dim, &vectors)?;
        if f.is_frame()? {
            return Ok(f);
        }
    }
    Err(Error::InvalidParameter(format!("no frame found in {MAX_REJECTIONS} draws")))
}

/// Random frame pairs that are not woven, with witnesses.
pub fn counterexample_search(dim: usize, n: usize, trials: usize, seed: u64) -> Result<Vec<Counterexample>> {
    partition_count(2, n)?;
    if dim == 0 {
        return Err(Error::InvalidParameter("dimension must be at least 1".into()));
    }
    let mut rng = SeededRng::new(seed);
    let mut found = Vec::new();
    for trial in 0..trials {
        let phi = random_frame(dim, n, &mut rng)?;
        let psi = random_frame(dim, n, &mut rng)?;
        let verdict = exhaustive_pair_with(&phi, &psi, Threads::Fixed(1))?;
        if !verdict.woven {
            found.push(Counterexample { trial, phi, psi, verdict });
        }
    }
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame(vs: &[&[f64]]) -> Frame {
        Frame::new(vs[0].len(), vs).unwrap()
    }

    fn phi() -> Frame {
        frame(&[&[1.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]])
    }
    fn psi() -> Frame {
        frame(&[&[1.0, 0.0], &[0.0, 1.0], &[0.0, 1.0]])
    }
    fn eta() -> Frame {
        frame(&[&[1.0, 0.0], &[0.0, 1.0], &[1.0, 0.0]])
    }

    #[test]
    fn assignment_codes_roundtrip() {
        for code in 0..81 {
            assert_eq!(PartitionAssignment::from_code(3, 4, code).code(), code);
        }
        let a = PartitionAssignment::from_subset(3, &[0, 1]).unwrap();
        assert_eq!(a.choice, vec![0, 0, 1]);
        assert_eq!(a.code(), 4);
        assert_eq!(a.sigma(), vec![0, 1]);
        assert!(PartitionAssignment::new(2, vec![0, 2]).is_err());
    }

    #[test]
    fn weave_examples() {
        assert_eq!(weave(&phi(), &eta(), &[0, 1, 2]).unwrap(), phi());
        assert_eq!(weave(&phi(), &eta(), &[]).unwrap(), eta());
        let w = weave(&phi(), &eta(), &[0, 1]).unwrap();
        assert_eq!(w, frame(&[&[1.0, 0.0], &[1.0, 0.0], &[1.0, 0.0]]));
        assert!(!w.is_frame().unwrap());
        assert!(matches!(weave(&phi(), &Frame::orthonormal_basis(2), &[]), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn woven_pair_has_universal_bounds_one_and_two() {
        let v = exhaustive_pair(&phi(), &psi()).unwrap();
        assert!(v.woven);
        assert_eq!((v.universal_lower, v.universal_upper), (1.0, 2.0));
        assert_eq!(v.partitions_checked, 8);
        assert!(v.witness.is_none());
    }

    #[test]
    fn non_woven_pair_reports_smallest_witness() {
        let v = exhaustive_pair(&phi(), &eta()).unwrap();
        assert!(!v.woven);
        let w = v.witness.unwrap();
        assert_eq!(w.assignment.sigma(), vec![0, 1]);
        assert_eq!(w.assignment.code(), 4);
        assert!(w.lambda_min.abs() < 1e-15);
    }

    #[test]
    fn self_weaving_reproduces_frame_bounds() {
        let f = frame(&[&[1.0, 1.0], &[2.0, 1.0], &[0.5, -1.0]]);
        let b = f.bounds().unwrap();
        let v = exhaustive_pair(&f, &f).unwrap();
        assert_eq!((v.universal_lower, v.universal_upper), (b.lower, b.upper));
    }

    #[test]
    fn multi_examples() {
        let f = frame(&[&[1.0, 1.0], &[2.0, 1.0], &[0.5, -1.0]]);
        let b = f.bounds().unwrap();
        let v = exhaustive_multi(std::slice::from_ref(&f)).unwrap();
        assert_eq!((v.universal_lower, v.universal_upper), (b.lower, b.upper));
        assert_eq!(v.partitions_checked, 1);

        let onb = Frame::orthonormal_basis(3);
        let v = exhaustive_multi(&[onb.clone(), onb.clone(), onb]).unwrap();
        assert!(v.woven);
        assert_eq!((v.universal_lower, v.universal_upper), (1.0, 1.0));

        let v = exhaustive_multi(&[phi(), psi(), eta()]).unwrap();
        assert!(!v.woven);
        assert_eq!(v.partitions_checked, 27);
    }

    #[test]
    fn guard_rejects_oversized_enumeration() {
        let big = Frame::new(1, &vec![vec![1.0]; 25]).unwrap();
        assert!(matches!(exhaustive_pair(&big, &big), Err(Error::TooLarge { .. })));
        let mid = Frame::new(1, &vec![vec![1.0]; 16]).unwrap();
        assert!(matches!(
            exhaustive_multi(&[mid.clone(), mid.clone(), mid]),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn thread_count_does_not_change_verdict() {
        let mut rng = SeededRng::new(5);
        let a = random_frame(3, 13, &mut rng).unwrap();
        let b = random_frame(3, 13, &mut rng).unwrap();
        let one = exhaustive_pair_with(&a, &b, Threads::Fixed(1)).unwrap();
        for t in [2, 3, 8] {
            assert_eq!(exhaustive_pair_with(&a, &b, Threads::Fixed(t)).unwrap(), one);
        }
        assert_eq!(exhaustive_pair(&a, &b).unwrap(), one);
    }

    #[test]
    fn riesz_woven_examples() {
        let onb = Frame::orthonormal_basis(2);
        assert!(riesz_woven(&onb, &frame(&[&[1.0, 1.0], &[2.0, 1.0]])).unwrap());
        assert!(!riesz_woven(&onb, &frame(&[&[0.0, 1.0], &[1.0, 0.0]])).unwrap());
        let r = frame(&[&[1.0, 1.0], &[2.0, 1.0]]);
        assert!(riesz_woven(&r, &r).unwrap());
        assert!(riesz_woven(&phi(), &psi()).is_err());
    }

    #[test]
    fn counterexample_search_examples() {
        assert!(counterexample_search(2, 2, 0, 1).unwrap().is_empty());
        assert_eq!(counterexample_search(2, 3, 20, 11).unwrap(), counterexample_search(2, 3, 20, 11).unwrap());
        // Continuous entries make singular weavings a null event, so a clean
        // run is the expected outcome; every reported pair must still be real.
        let found = counterexample_search(2, 2, 500, 7).unwrap();
        for c in &found {
            let w = weave_assignment(&[c.phi.clone(), c.psi.clone()], &c.verdict.witness.as_ref().unwrap().assignment)
                .unwrap();
            assert!(!w.is_frame().unwrap());
        }
        assert!(matches!(counterexample_search(2, 30, 1, 0), Err(Error::TooLarge { .. })));
    }
}
