//! Sample paths of the walk and the ergodic quantities estimated from them.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::green::{green_column, green_table, GreenTable};
use crate::kernel::{ratio, TransitionKernel};
use crate::numeric::{ln_rational, rational_to_f64};
use crate::symbolic::{max_level_for, pow, Word};

/// One trajectory `Z_0 = o, Z_1, …, Z_n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathSample {
    pub seed: u64,
    pub path_index: u64,
    pub steps: Vec<Word>,
}

impl PathSample {
    pub fn last(&self) -> Word {
        *self.steps.last().expect("a path starts at the root")
    }
}

/// The random stream of path `path_index`; independent of how paths are scheduled.
pub fn path_rng(seed: u64, path_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path_index);
    rng
}

/// Draws one step from `u` with the exact integer weights of the kernel.
pub fn step<K: TransitionKernel, R: Rng>(kernel: &K, u: &Word, rng: &mut R) -> Result<Word> {
    let transitions = kernel.transitions(u)?;
    let mut draw = rng.gen_range(0..kernel.denominator());
    for t in &transitions {
        if draw < t.weight {
            return Ok(t.target);
        }
        draw -= t.weight;
    }
    Err(Error::RowSum {
        vertex: *u,
        sum: alloc::format!("{}/{}", kernel.denominator() - draw, kernel.denominator()),
    })
}

pub fn sample_path<K: TransitionKernel>(kernel: &K, seed: u64, path_index: u64, n_steps: u32) -> Result<PathSample> {
    let deepest = n_steps as u64 * kernel.max_jump() as u64;
    let max = max_level_for(kernel.degree());
    if deepest > max as u64 {
        return Err(Error::LevelTooDeep {
            level: deepest.min(u32::MAX as u64) as u32,
            max,
        });
    }
    let mut rng = path_rng(seed, path_index);
    let mut steps = Vec::with_capacity(n_steps as usize + 1);
    let mut current = Word::root(kernel.degree());
    steps.push(current);
    for _ in 0..n_steps {
        current = step(kernel, &current, &mut rng)?;
        steps.push(current);
    }
    Ok(PathSample {
        seed,
        path_index,
        steps,
    })
}

/// `n_paths` paths, path `i` drawn from its own stream.
pub fn sample_paths<K: TransitionKernel>(kernel: &K, n_paths: u64, n_steps: u32, seed: u64) -> Result<Vec<PathSample>> {
    (0..n_paths).map(|i| sample_path(kernel, seed, i, n_steps)).collect()
}

/// Access to `F(o, ·)` at arbitrary depth.
pub trait RootGreen {
    fn f(&self, v: &Word) -> Result<BigRational>;

    /// `−log F(o, v)`.
    fn g(&self, v: &Word) -> Result<f64>;
}

impl RootGreen for GreenTable {
    fn f(&self, v: &Word) -> Result<BigRational> {
        if v.level() > self.max_level() {
            return Err(Error::InsufficientDepth {
                needed: v.level(),
                available: self.max_level(),
            });
        }
        Ok(self.get(v))
    }

    fn g(&self, v: &Word) -> Result<f64> {
        let f = self.f(v)?;
        if f.is_zero() {
            return Err(Error::OutsideRootShadow(*v));
        }
        Ok(-self.ln(v).expect("positive"))
    }
}

/// `F(o, v)` through the backward column of each `v`; no depth limit.
pub struct ColumnGreen<'k, K> {
    kernel: &'k K,
}

impl<'k, K: TransitionKernel> ColumnGreen<'k, K> {
    pub fn new(kernel: &'k K) -> ColumnGreen<'k, K> {
        ColumnGreen { kernel }
    }
}

impl<K: TransitionKernel> RootGreen for ColumnGreen<'_, K> {
    fn f(&self, v: &Word) -> Result<BigRational> {
        let root = Word::root(v.degree());
        Ok(green_column(self.kernel, v, 0)?.get(&root))
    }

    fn g(&self, v: &Word) -> Result<f64> {
        let root = Word::root(v.degree());
        green_column(self.kernel, v, 0)?
            .ln(&root)
            .map(|ln| -ln)
            .ok_or(Error::OutsideRootShadow(*v))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DriftReport {
    pub l: BigRational,
    pub l_g_estimate: f64,
    pub l_g_stderr: f64,
    pub n_paths: u64,
    pub n_steps: u32,
}

/// Sample mean and the standard error of the mean.
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, libm::sqrt(var / n as f64))
}

/// Summarizes per-path values of `g_n / n`.
pub fn drift_report(l: BigRational, per_path: &[f64], n_steps: u32) -> DriftReport {
    let (mean, stderr) = mean_stderr(per_path);
    DriftReport {
        l,
        l_g_estimate: mean,
        l_g_stderr: stderr,
        n_paths: per_path.len() as u64,
        n_steps,
    }
}

/// Mean of `g_n / n = −log F(o, Z_n) / n` over the final positions of the paths.
pub fn green_drift_estimate<K: TransitionKernel, G: RootGreen>(
    kernel: &K,
    samples: &[PathSample],
    green_o: &G,
) -> Result<DriftReport> {
    let n_steps = samples.first().map_or(0, |s| s.steps.len() as u32 - 1);
    if n_steps == 0 {
        return Err(Error::Precondition("need paths of at least one step".into()));
    }
    let per_path = samples
        .iter()
        .map(|s| Ok(green_o.g(&s.last())? / n_steps as f64))
        .collect::<Result<Vec<f64>>>()?;
    Ok(drift_report(crate::kernel::drift_exact(kernel)?, &per_path, n_steps))
}

/// `F(o, Z_{n+m}) ≥ F(o, Z_n) F(Z_n, Z_{n+m})`, the exact form of
/// `g_{n+m} ≤ g_n − log F(Z_n, Z_{n+m})`.
pub fn additivity_holds<K: TransitionKernel>(kernel: &K, path: &PathSample, n: usize, m: usize) -> Result<bool> {
    let (zn, znm) = (path.steps[n], path.steps[n + m]);
    let root = Word::root(kernel.degree());
    let column = green_column(kernel, &znm, 0)?;
    let to_zn = green_column(kernel, &zn, 0)?.get(&root);
    Ok(column.get(&root) >= to_zn * column.get(&zn))
}

/// Distribution of `Z_n` by exact dynamic programming over steps.
pub fn step_distribution<K: TransitionKernel>(kernel: &K, n: u32) -> Result<BTreeMap<Word, BigRational>> {
    let mut current = BTreeMap::new();
    current.insert(Word::root(kernel.degree()), BigRational::one());
    for _ in 0..n {
        let mut next: BTreeMap<Word, BigRational> = BTreeMap::new();
        for (u, p) in &current {
            for t in kernel.transitions(u)? {
                *next.entry(t.target).or_insert_with(BigRational::zero) += p * ratio(t.weight, kernel.denominator());
            }
        }
        current = next;
    }
    Ok(current)
}

/// `E(g_n) / n`, computed exactly from the law of `Z_n` up to the final logarithm.
pub fn exact_green_drift<K: TransitionKernel>(kernel: &K, n: u32) -> Result<f64> {
    let law = step_distribution(kernel, n)?;
    let depth = law.keys().map(Word::level).max().unwrap_or(0);
    let table = green_table(kernel, &Word::root(kernel.degree()), depth)?;
    let mut total = 0.0;
    for (v, p) in &law {
        total += rational_to_f64(p) * table.g(v)?;
    }
    Ok(total / n as f64)
}

#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalMeasure {
    pub degree: u32,
    pub bin_level: u32,
    pub counts: Vec<u64>,
    pub masses: Vec<f64>,
    pub sample_count: u64,
    /// All samples fell in a single bin.
    pub degenerate: bool,
}

impl EmpiricalMeasure {
    pub fn from_counts(degree: u32, bin_level: u32, counts: Vec<u64>) -> EmpiricalMeasure {
        let total: u64 = counts.iter().sum();
        let masses = counts.iter().map(|&c| c as f64 / total as f64).collect();
        EmpiricalMeasure {
            degree,
            bin_level,
            degenerate: counts.iter().filter(|&&c| c > 0).count() <= 1,
            counts,
            masses,
            sample_count: total,
        }
    }

    /// Mass of the closed arc covering bins `first ..= first + len − 1`, cyclically.
    fn arc_mass(&self, first: i64, len: i64) -> f64 {
        let size = self.counts.len() as i64;
        if len >= size {
            return 1.0;
        }
        let count: u64 = (first..first + len).map(|b| self.counts[b.rem_euclid(size) as usize]).sum();
        count as f64 / self.sample_count as f64
    }
}

/// Bins the midpoints of the final tiles at `bin_level`.
pub fn empirical_harmonic_measure(finals: &[Word], bin_level: u32, margin: u32) -> Result<EmpiricalMeasure> {
    let degree = finals.first().map(Word::degree).ok_or_else(|| Error::Precondition("no samples".into()))?;
    let mut counts = alloc::vec![0u64; pow(degree, bin_level) as usize];
    for w in finals {
        if w.level() < bin_level + margin {
            return Err(Error::InsufficientDepth {
                needed: bin_level + margin,
                available: w.level(),
            });
        }
        // The midpoint is interior to exactly one bin: the ancestor at `bin_level`.
        counts[(w.index() / pow(degree, w.level() - bin_level)) as usize] += 1;
    }
    Ok(EmpiricalMeasure::from_counts(degree, bin_level, counts))
}

#[derive(Clone, Debug, PartialEq)]
pub struct DimensionReport {
    /// Exponents `j` of the radii `r = d^{-j}`.
    pub radius_exponents: Vec<u32>,
    /// Bin whose left endpoint is each sampled point.
    pub points: Vec<usize>,
    pub local_dims: Vec<f64>,
    pub packing_estimate: f64,
    pub formula_value: f64,
}

/// Least-squares slope of `ys` against `xs`.
fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Empirical `q`-quantile by the nearest-rank rule.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    let mut sorted: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    if sorted.is_empty() {
        return f64::NAN;
    }
    sorted.sort_by(f64::total_cmp);
    let rank = libm::ceil(q * sorted.len() as f64) as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

/// Local dimension slopes at `n_points` ν-quantile points, over radii `d^{-j}`, `j = 2..m−2`.
pub fn dimension_report(measure: &EmpiricalMeasure, l_g: f64, l: f64, a: f64, n_points: usize) -> DimensionReport {
    let d = measure.degree as i64;
    let m = measure.bin_level;
    let radius_exponents: Vec<u32> = (2..=m.saturating_sub(2)).collect();
    let mut points = Vec::with_capacity(n_points);
    let mut cumulative = 0.0;
    let mut bin = 0;
    for k in 0..n_points {
        let target = (k as f64 + 0.5) / n_points as f64;
        while bin + 1 < measure.masses.len() && cumulative + measure.masses[bin] < target {
            cumulative += measure.masses[bin];
            bin += 1;
        }
        points.push(bin);
    }
    let mut local_dims = Vec::with_capacity(points.len());
    for &b in &points {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for &j in &radius_exponents {
            // B(ξ, d^{-j}) around a bin's left endpoint is exactly 2·d^{m−j} bins.
            let half = d.pow(m - j);
            let mass = measure.arc_mass(b as i64 - half, 2 * half);
            if mass > 0.0 {
                xs.push(-(j as f64) * libm::log(d as f64));
                ys.push(libm::log(mass));
            }
        }
        local_dims.push(if xs.len() >= 2 { slope(&xs, &ys) } else { f64::NAN });
    }
    DimensionReport {
        packing_estimate: quantile(&local_dims, 0.9),
        formula_value: l_g / (a * l),
        radius_exponents,
        points,
        local_dims,
    }
}

/// Cylinder `[v_0 = o, v_1, …, v_m]` and its exact probability.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cylinder {
    pub words: Vec<Word>,
    pub probability: BigRational,
}

/// Every positive-probability cylinder from `o` with `m ≤ max_m` steps
/// whose words stay at level `≤ max_level`.
pub fn support_cylinders<K: TransitionKernel>(kernel: &K, max_m: u32, max_level: u32) -> Result<Vec<Cylinder>> {
    let root = Word::root(kernel.degree());
    let mut out = alloc::vec![Cylinder {
        words: alloc::vec![root],
        probability: BigRational::one(),
    }];
    let mut frontier = out.clone();
    for _ in 0..max_m {
        let mut next = Vec::new();
        for c in &frontier {
            let last = *c.words.last().expect("non-empty");
            for t in kernel.transitions(&last)? {
                if t.target.level() > max_level {
                    continue;
                }
                let mut words = c.words.clone();
                words.push(t.target);
                next.push(Cylinder {
                    words,
                    probability: &c.probability * ratio(t.weight, kernel.denominator()),
                });
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    Ok(out)
}

/// Probability that the walk from `start` follows `σ^shift`-images of `pattern[1..]`.
fn lifted_probability<K: TransitionKernel>(kernel: &K, start: &Word, shift: u32, pattern: &[Word]) -> Result<BigRational> {
    if pattern.len() <= 1 {
        return Ok(BigRational::one());
    }
    let mut total = BigRational::zero();
    for t in kernel.transitions(start)? {
        if t.target.level() >= shift && t.target.shift_by(shift) == pattern[1] {
            total += ratio(t.weight, kernel.denominator()) * lifted_probability(kernel, &t.target, shift, &pattern[1..])?;
        }
    }
    Ok(total)
}

/// `P(T^{−k} C)` where `Z_n(T^k ω) = σ^{|Z_k|} Z_{n+k}(ω)`, summed over `Z_k`.
pub fn shifted_cylinder_probability<K: TransitionKernel>(
    kernel: &K,
    law_k: &BTreeMap<Word, BigRational>,
    cylinder: &[Word],
) -> Result<BigRational> {
    let mut total = BigRational::zero();
    for (z, p) in law_k {
        total += p * lifted_probability(kernel, z, z.level(), cylinder)?;
    }
    Ok(total)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CylinderReport {
    pub cylinders: usize,
    pub identities_checked: usize,
    /// `(cylinder, k, P(T^{-k}C))` for every mismatch.
    pub failures: Vec<(Vec<Word>, u32, BigRational)>,
    pub mixing_checked: usize,
    /// `(first, second, k)` for every pair where `P(C_1 ∩ T^{−k}C_2) ≠ P(C_1)P(C_2)`.
    pub mixing_failures: Vec<(Vec<Word>, Vec<Word>, u32)>,
}

impl CylinderReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.mixing_failures.is_empty()
    }
}

/// Exact `T`-invariance of every support cylinder, and factorization of
/// `P(C_1 ∩ T^{−k}C_2)` for `k` in `{m_1, m_1 + 1}` over cylinders of at most `mixing_m` steps.
pub fn cylinder_invariance_check<K: TransitionKernel>(
    kernel: &K,
    max_m: u32,
    max_k: u32,
    max_level: u32,
    mixing_m: u32,
) -> Result<CylinderReport> {
    let cylinders = support_cylinders(kernel, max_m, max_level)?;
    let laws: Vec<BTreeMap<Word, BigRational>> =
        (0..=max_k + mixing_m + 1).map(|k| step_distribution(kernel, k)).collect::<Result<_>>()?;
    let mut report = CylinderReport {
        cylinders: cylinders.len(),
        identities_checked: 0,
        failures: Vec::new(),
        mixing_checked: 0,
        mixing_failures: Vec::new(),
    };
    for c in &cylinders {
        for (k, law) in laws.iter().enumerate().take(max_k as usize + 1) {
            let shifted = shifted_cylinder_probability(kernel, law, &c.words)?;
            report.identities_checked += 1;
            if shifted != c.probability {
                report.failures.push((c.words.clone(), k as u32, shifted));
            }
        }
    }
    let short: Vec<&Cylinder> = cylinders.iter().filter(|c| c.words.len() as u32 <= mixing_m + 1).collect();
    for first in &short {
        let m1 = first.words.len() as u32 - 1;
        let end = *first.words.last().expect("non-empty");
        for k in m1..=m1 + 1 {
            // Law of Z_k given the first cylinder, scaled by its probability.
            let mut law: BTreeMap<Word, BigRational> = BTreeMap::new();
            law.insert(end, first.probability.clone());
            for _ in m1..k {
                let mut next: BTreeMap<Word, BigRational> = BTreeMap::new();
                for (u, p) in &law {
                    for t in kernel.transitions(u)? {
                        *next.entry(t.target).or_insert_with(BigRational::zero) +=
                            p * ratio(t.weight, kernel.denominator());
                    }
                }
                law = next;
            }
            for second in &short {
                let joint = shifted_cylinder_probability(kernel, &law, &second.words)?;
                report.mixing_checked += 1;
                if joint != &first.probability * &second.probability {
                    report.mixing_failures.push((first.words.clone(), second.words.clone(), k));
                }
            }
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuasiInvarianceReport {
    /// Level of the compared bins, one below the measure's.
    pub level: u32,
    pub measure: Vec<f64>,
    pub pushforward: Vec<f64>,
    pub total_variation: f64,
    /// `max ν(B)/f_*ν(B)` over bins where both are positive.
    pub max_ratio: f64,
    pub min_ratio: f64,
    pub empty_bins: usize,
    /// `(Σ_{|w|=1} P̂(o,w))^{−1}`.
    pub ratio_bound: BigRational,
    /// The first step always lands on level one, so `f_*ν = ν`.
    pub exact_invariance: bool,
    /// No bin exceeds the bound by more than four binomial standard errors.
    pub ratio_within_bound: bool,
}

/// Compares the binned measure with its image under `x ↦ d·x mod 1`.
pub fn quasi_invariance_check<K: TransitionKernel>(measure: &EmpiricalMeasure, kernel: &K) -> Result<QuasiInvarianceReport> {
    let m = measure.bin_level;
    if m < 2 {
        return Err(Error::InsufficientDepth { needed: 2, available: m });
    }
    let d = measure.degree as usize;
    let coarse_size = pow(measure.degree, m - 1) as usize;
    let mut coarse = alloc::vec![0u64; coarse_size];
    let mut pushed = alloc::vec![0u64; coarse_size];
    for (b, &count) in measure.counts.iter().enumerate() {
        coarse[b / d] += count;
        pushed[b % coarse_size] += count;
    }
    let n = measure.sample_count as f64;
    let root = Word::root(kernel.degree());
    let first_level: u64 = kernel
        .transitions(&root)?
        .iter()
        .filter(|t| t.target.level() == 1)
        .map(|t| t.weight)
        .sum();
    if first_level == 0 {
        return Err(Error::Precondition("the root never steps to level one".into()));
    }
    let ratio_bound = BigRational::new(BigInt::from(kernel.denominator()), BigInt::from(first_level));
    let bound = rational_to_f64(&ratio_bound);
    let mut total_variation = 0.0;
    let mut max_ratio = 0.0f64;
    let mut min_ratio = f64::INFINITY;
    let mut empty_bins = 0;
    let mut ratio_within_bound = true;
    for (&c, &p) in coarse.iter().zip(&pushed) {
        let (nu, push) = (c as f64 / n, p as f64 / n);
        total_variation += (nu - push).abs() / 2.0;
        if c == 0 || p == 0 {
            empty_bins += 1;
            continue;
        }
        let r = nu / push;
        max_ratio = max_ratio.max(r);
        min_ratio = min_ratio.min(r);
        let slack = 4.0 * libm::sqrt((nu + bound * bound * push) / n);
        if nu - bound * push > slack {
            ratio_within_bound = false;
        }
    }
    Ok(QuasiInvarianceReport {
        level: m - 1,
        measure: coarse.iter().map(|&c| c as f64 / n).collect(),
        pushforward: pushed.iter().map(|&p| p as f64 / n).collect(),
        total_variation,
        max_ratio,
        min_ratio,
        empty_bins,
        exact_invariance: first_level == kernel.denominator(),
        ratio_within_bound,
        ratio_bound,
    })
}

/// `log F` from exact values, for callers holding rationals.
pub fn g_of(f: &BigRational) -> f64 {
    -ln_rational(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::DoublingKernel;

    #[test]
    fn paths_are_legal_and_reproducible() {
        let k = DoublingKernel::from_fraction(3, 5).unwrap();
        let a = sample_paths(&k, 20, 30, 7).unwrap();
        let b = sample_paths(&k, 20, 30, 7).unwrap();
        assert_eq!(a, b);
        for p in &a {
            for (n, pair) in p.steps.windows(2).enumerate() {
                assert_eq!(pair[1].level(), n as u32 + 1);
                assert!(!k.probability(&pair[0], &pair[1]).unwrap().is_zero());
            }
        }
        // A path does not depend on which other paths were drawn.
        assert_eq!(sample_path(&k, 7, 13, 30).unwrap(), a[13]);
        assert_ne!(a[0].steps, a[1].steps);
    }

    #[test]
    fn uniform_green_drift() {
        let k = DoublingKernel::from_fraction(1, 4).unwrap();
        let paths = sample_paths(&k, 30, 40, 3).unwrap();
        let report = green_drift_estimate(&k, &paths, &ColumnGreen::new(&k)).unwrap();
        assert!((report.l_g_estimate - core::f64::consts::LN_2).abs() < 1e-12);
        assert!(report.l_g_stderr < 1e-12);
        assert_eq!(report.l, BigRational::one());
    }

    #[test]
    fn additivity_on_paths() {
        let k = DoublingKernel::from_fraction(3, 5).unwrap();
        for p in sample_paths(&k, 10, 20, 11).unwrap() {
            for (n, m) in [(1, 5), (4, 10), (10, 10)] {
                assert!(additivity_holds(&k, &p, n, m).unwrap());
            }
        }
    }

    #[test]
    fn measure_binning() {
        let finals = [
            Word::new(2, 12, 0).unwrap(),
            Word::new(2, 12, 4095).unwrap(),
            Word::new(2, 12, 2048).unwrap(),
            Word::new(2, 12, 2047).unwrap(),
        ];
        let m = empirical_harmonic_measure(&finals, 2, 10).unwrap();
        assert_eq!(m.counts, [1, 1, 1, 1]);
        assert!((m.masses.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(!m.degenerate);
        assert!(empirical_harmonic_measure(&finals, 3, 10).is_err());
        let point = empirical_harmonic_measure(&finals[..1], 2, 10).unwrap();
        assert!(point.degenerate);
    }

    #[test]
    fn dimension_of_extremes() {
        let uniform = EmpiricalMeasure::from_counts(2, 10, alloc::vec![100; 1024]);
        let report = dimension_report(&uniform, core::f64::consts::LN_2, 1.0, core::f64::consts::LN_2, 50);
        assert!((report.packing_estimate - 1.0).abs() < 1e-9);
        assert!((report.formula_value - 1.0).abs() < 1e-15);
        let mut counts = alloc::vec![0; 1024];
        counts[300] = 5000;
        let point = EmpiricalMeasure::from_counts(2, 10, counts);
        let report = dimension_report(&point, 1.0, 1.0, 1.0, 20);
        assert!(report.local_dims.iter().all(|d| d.abs() < 1e-9));
    }

    #[test]
    fn quantiles() {
        let v = [5.0, 1.0, 3.0, 2.0, 4.0, f64::NAN];
        assert_eq!(quantile(&v, 0.9), 5.0);
        assert_eq!(quantile(&v, 0.5), 3.0);
        assert_eq!(quantile(&v, 0.0), 1.0);
    }

    #[test]
    fn cylinder_identities() {
        for (p, q) in [(1, 4), (1, 2), (3, 5)] {
            let k = DoublingKernel::from_fraction(p, q).unwrap();
            let report = cylinder_invariance_check(&k, 2, 2, 3, 1).unwrap();
            assert!(report.passed(), "{report:?}");
            assert!(report.mixing_checked > 0);
        }
    }

    #[test]
    fn uniform_quasi_invariance() {
        let k = DoublingKernel::from_fraction(1, 4).unwrap();
        let uniform = EmpiricalMeasure::from_counts(2, 6, alloc::vec![10; 64]);
        let report = quasi_invariance_check(&uniform, &k).unwrap();
        assert_eq!(report.total_variation, 0.0);
        assert!(report.exact_invariance && report.ratio_within_bound);
        assert_eq!(report.ratio_bound, BigRational::one());
        assert_eq!(report.level, 5);
    }

    #[test]
    fn exact_drift_for_uniform() {
        let k = DoublingKernel::from_fraction(1, 4).unwrap();
        assert!((exact_green_drift(&k, 8).unwrap() - core::f64::consts::LN_2).abs() < 1e-12);
        let law = step_distribution(&k, 5).unwrap();
        assert_eq!(law.values().cloned().sum::<BigRational>(), BigRational::one());
    }
}
