//! Martin kernel traces along rays, and the boundary classifier of the doubling family.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::green::{forward_support, green_column, shadow_hull};
use crate::kernel::TransitionKernel;
use crate::numeric::rational_to_f64;
use crate::symbolic::{pow, Word};

/// Default gate on the successive normalized sup-difference.
pub const TRACE_TOLERANCE: f64 = 1e-9;

/// Levels below a window word used to approximate its closed shadow hull.
const HULL_DEPTH: u32 = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    /// Tiles whose right endpoint is the point, when it is a tile boundary.
    Left,
    Right,
}

/// A sequence of words `v_n` approaching a point of the circle.
///
/// At level `n`, `v_n` is the tile containing `point` on the chosen side,
/// rotated by `offset` tiles of the same level.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Ray {
    pub degree: u32,
    pub point: Ratio<u64>,
    pub side: Side,
    pub offset: i64,
}

impl Ray {
    pub fn new(degree: u32, point: Ratio<u64>, side: Side, offset: i64) -> Ray {
        Ray {
            degree,
            point,
            side,
            offset,
        }
    }

    pub fn word(&self, level: u32) -> Result<Word> {
        if level == 0 {
            return Ok(Word::root(self.degree));
        }
        let size = pow(self.degree, level) as u128;
        let (p, q) = (*self.point.numer() as u128, *self.point.denom() as u128);
        let scaled = (p % q) * size;
        let floor = (scaled / q) as i128;
        let index = match self.side {
            Side::Left if scaled.is_multiple_of(q) => floor - 1,
            _ => floor,
        };
        Word::wrapped(self.degree, level, index + self.offset as i128)
    }
}

/// Column `K(w, v_n)` over a fixed window, for successive `v_n` on a ray.
#[derive(Clone, Debug, PartialEq)]
pub struct MartinTrace {
    pub ray: Ray,
    pub window: Vec<Word>,
    pub levels: Vec<u32>,
    pub vectors: Vec<Vec<BigRational>>,
    /// Sup-difference between the last two window vectors normalized by their max entry.
    pub last_difference: f64,
    pub converged: bool,
    /// Every positive entry sits on a word whose closed shadow hull holds the point.
    pub support_ok: bool,
}

impl MartinTrace {
    fn position(&self, w: &Word) -> Option<usize> {
        self.window.iter().position(|x| x == w)
    }

    /// `K(w, v_n)` at the deepest traced level.
    pub fn last(&self, w: &Word) -> Option<&BigRational> {
        Some(&self.vectors.last()?[self.position(w)?])
    }

    /// `K(a, v_n) / K(b, v_n)` at the deepest traced level.
    pub fn ratio(&self, a: &Word, b: &Word) -> Option<BigRational> {
        let denominator = self.last(b)?;
        if denominator.is_zero() {
            return None;
        }
        Some(self.last(a)? / denominator)
    }
}

/// The root plus every word of level `window_level` and `window_level + 1`.
pub fn standard_window(degree: u32, window_level: u32) -> Result<Vec<Word>> {
    let mut out = alloc::vec![Word::root(degree)];
    for level in window_level..=window_level + 1 {
        for i in 0..pow(degree, level) {
            out.push(Word::new(degree, level, i)?);
        }
    }
    Ok(out)
}

fn normalized(vector: &[BigRational]) -> Vec<BigRational> {
    let max = vector.iter().max().cloned().unwrap_or_else(BigRational::zero);
    if max.is_zero() {
        return vector.to_vec();
    }
    vector.iter().map(|v| v / &max).collect()
}

/// Traces `K(w, v_n)` for `w` in `window` and `n` from `first_level` to `last_level`.
pub fn martin_trace<K: TransitionKernel>(
    kernel: &K,
    ray: Ray,
    window: Vec<Word>,
    first_level: u32,
    last_level: u32,
    tolerance: f64,
) -> Result<MartinTrace> {
    let deepest_window = window.iter().map(Word::level).max().unwrap_or(0);
    if first_level <= deepest_window || first_level > last_level {
        return Err(Error::InsufficientDepth {
            needed: deepest_window + 1,
            available: first_level,
        });
    }
    let mut levels = Vec::new();
    let mut vectors = Vec::new();
    for n in first_level..=last_level {
        let v = ray.word(n)?;
        let column = green_column(kernel, &v, 0)?;
        let vector = window.iter().map(|w| column.martin(w)).collect::<Result<Vec<_>>>()?;
        levels.push(n);
        vectors.push(vector);
    }
    let last_difference = match vectors.len() {
        0 | 1 => f64::INFINITY,
        len => {
            let a = normalized(&vectors[len - 2]);
            let b = normalized(&vectors[len - 1]);
            a.iter()
                .zip(&b)
                .map(|(x, y)| rational_to_f64(&(x - y).abs()))
                .fold(0.0, f64::max)
        }
    };

    let (p, q) = (*ray.point.numer(), *ray.point.denom());
    let mut support_ok = true;
    if let Some(last) = vectors.last() {
        for (w, value) in window.iter().zip(last) {
            if value.is_zero() || w.is_root() {
                continue;
            }
            let depth = (w.level() + HULL_DEPTH).min(last_level.max(w.level() + 1));
            let shadow: BTreeSet<Word> = forward_support(kernel, w, depth)?;
            if !shadow_hull(w, &shadow, 1).contains_point(ray.degree, p, q) {
                support_ok = false;
            }
        }
    }
    Ok(MartinTrace {
        ray,
        window,
        levels,
        vectors,
        converged: last_difference < tolerance,
        last_difference,
        support_ok,
    })
}

/// `K(next, v_n) / K(current, v_n)` at the deepest traced level of a trace
/// whose window holds both words.
pub fn growth_factor(trace: &MartinTrace, current: &Word, next: &Word) -> Option<BigRational> {
    trace.ratio(next, current)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Verdict {
    Homeomorphism,
    NonInjective,
    Critical,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Homeomorphism => "homeomorphism",
            Verdict::NonInjective => "non_injective",
            Verdict::Critical => "critical",
        }
    }
}

impl core::fmt::Display for Verdict {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Spectral data of `M = [[x,0,0],[x,y,y],[0,y,y]]` and of the dyadic four-column matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EigenData {
    /// Eigenvalues `x`, `2y`, `0`.
    pub eigenvalues: [BigRational; 3],
    /// Matching eigenvectors `(5x−2, 4x−1, 1−x)`, `(0,1,1)`, `(0,−1,1)`.
    pub eigenvectors: [[BigRational; 3]; 3],
    pub dyadic_eigenvalue: BigRational,
    pub dyadic_eigenvector: [BigRational; 4],
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundaryClassification {
    pub x: BigRational,
    pub verdict: Verdict,
    pub eigen: EigenData,
    /// `z = x / y`.
    pub z: BigRational,
    /// `sup_{[0,1]} F_j'` for `j = 0..4`.
    pub derivative_sups: [BigRational; 4],
    /// `λ = max_j sup F_j'`.
    pub contraction: BigRational,
}

fn q(p: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(d))
}

fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// The matrix `M` with `y = (1−x)/3`.
pub fn doubling_matrix(x: &BigRational) -> [[BigRational; 3]; 3] {
    let y = (int(1) - x) / int(3);
    let zero = BigRational::zero();
    [
        [x.clone(), zero.clone(), zero.clone()],
        [x.clone(), y.clone(), y.clone()],
        [zero, y.clone(), y],
    ]
}

/// The four-column matrix of the dyadic case, acting on `(x_n, y_n, z_n, w_n)`.
pub fn dyadic_matrix(x: &BigRational) -> [[BigRational; 4]; 4] {
    let y = (int(1) - x) / int(3);
    let o = BigRational::zero();
    [
        [x.clone(), o.clone(), o.clone(), o.clone()],
        [x.clone(), y.clone(), y.clone(), o.clone()],
        [o.clone(), y.clone(), y.clone(), y.clone()],
        [o.clone(), o.clone(), o, y],
    ]
}

/// `F_j(t)` for `j ∈ {0,1,2,3}` and `z = x/y`.
pub fn branch_map(j: u8, z: &BigRational, t: &BigRational) -> BigRational {
    let one = BigRational::one();
    match j {
        0 => (t + &one) / int(2),
        1 => t / ((&one - z) * t + z + &one),
        2 => (t + z) / (z + &one),
        3 => z * t / ((z - &one) * t + int(2)),
        _ => panic!("branch index {j} out of range"),
    }
}

/// `F_j'(t)`, used by the contraction bound.
pub fn branch_derivative(j: u8, z: &BigRational, t: &BigRational) -> BigRational {
    let one = BigRational::one();
    match j {
        0 => q(1, 2),
        1 => {
            let denom = (&one - z) * t + z + &one;
            (z + &one) / (&denom * &denom)
        }
        2 => &one / (z + &one),
        3 => {
            let denom = (z - &one) * t + int(2);
            int(2) * z / (&denom * &denom)
        }
        _ => panic!("branch index {j} out of range"),
    }
}

/// Length of `F_{j_1} ∘ ⋯ ∘ F_{j_n}([0, 1])`; each map is increasing, so the
/// image is `[G(0), G(1)]`.
pub fn iterated_length(sequence: &[u8], z: &BigRational) -> BigRational {
    let mut lo = BigRational::zero();
    let mut hi = BigRational::one();
    for &j in sequence.iter().rev() {
        lo = branch_map(j, z, &lo);
        hi = branch_map(j, z, &hi);
    }
    hi - lo
}

/// Phase of the doubling family at `x`: homeomorphism below `2/5`,
/// non-injective above, undecided at exactly `2/5`.
pub fn classify_doubling_boundary(x: &BigRational) -> Result<BoundaryClassification> {
    if !x.is_positive() || *x >= BigRational::one() {
        return Err(Error::ParameterOutOfRange(alloc::string::ToString::to_string(x)));
    }
    let threshold = q(2, 5);
    let verdict = match x.cmp(&threshold) {
        core::cmp::Ordering::Less => Verdict::Homeomorphism,
        core::cmp::Ordering::Equal => Verdict::Critical,
        core::cmp::Ordering::Greater => Verdict::NonInjective,
    };
    let y = (int(1) - x) / int(3);
    let z = x / &y;
    let zero = BigRational::zero();
    let one = BigRational::one();
    let eigen = EigenData {
        eigenvalues: [x.clone(), int(2) * &y, zero.clone()],
        eigenvectors: [
            [int(5) * x - int(2), int(4) * x - int(1), int(1) - x],
            [zero.clone(), one.clone(), one.clone()],
            [zero.clone(), -one.clone(), one.clone()],
        ],
        dyadic_eigenvalue: int(2) * &y,
        dyadic_eigenvector: [zero.clone(), one.clone(), one.clone(), zero.clone()],
    };
    // Each F_j' is c/(linear)^2 with the linear factor positive on [0,1],
    // hence monotone, so its supremum is attained at an endpoint.
    let derivative_sups: [BigRational; 4] = core::array::from_fn(|j| {
        let a = branch_derivative(j as u8, &z, &zero);
        let b = branch_derivative(j as u8, &z, &one);
        a.max(b)
    });
    let contraction = derivative_sups.iter().max().expect("four maps").clone();
    debug_assert!(verdict != Verdict::Homeomorphism || contraction < one);
    Ok(BoundaryClassification {
        x: x.clone(),
        verdict,
        eigen,
        z,
        derivative_sups,
        contraction,
    })
}
