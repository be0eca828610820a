//! Transition kernels on the tile graph.
//!
//! Every kernel stores its probabilities as integer weights over one common
//! denominator `L`, so that `P̂(u,w) = weight / L` exactly. Kernels are
//! evaluated lazily at any level, which lets Green columns and sample paths
//! run far below the depth of any materialized graph.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::graph::{build_graph, TileGraph, DEFAULT_VERTEX_BUDGET};
use crate::symbolic::{max_level_for, pow, CircleRealization, Word};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Transition {
    pub target: Word,
    /// Numerator over the kernel's common denominator.
    pub weight: u64,
}

pub trait TransitionKernel {
    fn degree(&self) -> u32;

    /// Common denominator `L` of all transition probabilities.
    fn denominator(&self) -> u64;

    /// Largest level increase of a single step.
    fn max_jump(&self) -> u32;

    /// Every target of `u` lies within `reach()` tiles of level `|u|` from `A_u`.
    fn reach(&self) -> u32;

    /// Graph radius `R` of Assumption (A) promised by construction.
    fn radius(&self) -> u32;

    /// Outgoing distribution of `u`, sorted by target.
    fn transitions(&self, u: &Word) -> Result<Vec<Transition>>;

    fn probability(&self, u: &Word, v: &Word) -> Result<BigRational> {
        let weight = self
            .transitions(u)?
            .iter()
            .find(|t| t.target == *v)
            .map_or(0, |t| t.weight);
        Ok(ratio(weight, self.denominator()))
    }

    /// Vertices with a positive transition into `v`.
    fn predecessors(&self, v: &Word) -> Result<Vec<Word>> {
        let mut out = Vec::new();
        for candidate in self.predecessor_candidates(v) {
            if self.transitions(&candidate)?.iter().any(|t| t.target == *v) {
                out.push(candidate);
            }
        }
        Ok(out)
    }

    /// Superset of the predecessors of `v`, from the reach bound.
    fn predecessor_candidates(&self, v: &Word) -> BTreeSet<Word> {
        let mut out = BTreeSet::new();
        if v.is_root() {
            return out;
        }
        let d = self.degree();
        let reach = self.reach() as i128 + 1;
        let lowest = v.level().saturating_sub(self.max_jump());
        for level in lowest..v.level() {
            let centre = (v.index() / pow(d, v.level() - level)) as i128;
            let size = pow(d, level) as i128;
            let span = reach.min(size);
            for offset in -span..=span {
                out.insert(Word::wrapped(d, level, centre + offset).expect("level below v"));
            }
        }
        out
    }
}

impl<K: TransitionKernel + ?Sized> TransitionKernel for &K {
    fn degree(&self) -> u32 {
        (**self).degree()
    }
    fn denominator(&self) -> u64 {
        (**self).denominator()
    }
    fn max_jump(&self) -> u32 {
        (**self).max_jump()
    }
    fn reach(&self) -> u32 {
        (**self).reach()
    }
    fn radius(&self) -> u32 {
        (**self).radius()
    }
    fn transitions(&self, u: &Word) -> Result<Vec<Transition>> {
        (**self).transitions(u)
    }
    fn predecessors(&self, v: &Word) -> Result<Vec<Word>> {
        (**self).predecessors(v)
    }
}

pub(crate) fn ratio(numer: u64, denom: u64) -> BigRational {
    BigRational::new(BigInt::from(numer), BigInt::from(denom))
}

/// Parses `"p/q"` (or an integer, or a finite decimal such as `"0.3"`) into a reduced rational.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let text = text.trim().trim_matches('"');
    let bad = || Error::Precondition(format!("cannot parse rational {text:?}"));
    if let Some((p, q)) = text.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(p, q));
    }
    if let Some((whole, frac)) = text.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = whole.starts_with('-');
        let whole: BigInt = if whole.is_empty() || whole == "-" {
            BigInt::zero()
        } else {
            whole.parse().map_err(|_| bad())?
        };
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        let frac: BigInt = frac.parse().map_err(|_| bad())?;
        let magnitude = BigInt::from(whole.magnitude().clone()) * &scale + frac;
        let numer = if negative { -magnitude } else { magnitude };
        return Ok(BigRational::new(numer, scale));
    }
    let p: BigInt = text.parse().map_err(|_| bad())?;
    Ok(BigRational::from_integer(p))
}

/// The doubling-map family `p_x`.
///
/// From `u_{i,n}` the walk moves to `u_{j,n+1}` for the four `j ≡ 2i−1, 2i,
/// 2i+1, 2i+2 (mod 2^{n+1})`, with weight `x` when `j ≡ 2 (mod 4)` and
/// `y = (1−x)/3` otherwise. From the root, `"0"` gets `(1+2x)/3` and `"1"`
/// gets `(2−2x)/3`, which is the push-forward `σ_*P(u)` of either level-one
/// word, so the kernel commutes with the shift at every vertex but `o`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DoublingKernel {
    x: BigRational,
    p: u64,
    q: u64,
}

impl DoublingKernel {
    pub fn new(x: BigRational) -> Result<DoublingKernel> {
        if x <= BigRational::zero() || x >= BigRational::one() {
            return Err(Error::ParameterOutOfRange(x.to_string()));
        }
        let p = x.numer().to_u64().ok_or(Error::DenominatorOverflow)?;
        let q = x.denom().to_u64().ok_or(Error::DenominatorOverflow)?;
        q.checked_mul(3).ok_or(Error::DenominatorOverflow)?;
        Ok(DoublingKernel { x, p, q })
    }

    pub fn from_fraction(numer: u64, denom: u64) -> Result<DoublingKernel> {
        DoublingKernel::new(ratio(numer, denom))
    }

    pub fn x(&self) -> &BigRational {
        &self.x
    }

    /// `y = (1 − x)/3`.
    pub fn y(&self) -> BigRational {
        (BigRational::one() - &self.x) / BigRational::from_integer(BigInt::from(3))
    }

    fn heavy(&self) -> u64 {
        3 * self.p
    }

    fn light(&self) -> u64 {
        self.q - self.p
    }
}

impl TransitionKernel for DoublingKernel {
    fn degree(&self) -> u32 {
        2
    }

    fn denominator(&self) -> u64 {
        3 * self.q
    }

    fn max_jump(&self) -> u32 {
        1
    }

    fn reach(&self) -> u32 {
        1
    }

    fn radius(&self) -> u32 {
        1
    }

    fn transitions(&self, u: &Word) -> Result<Vec<Transition>> {
        if u.degree() != 2 {
            return Err(Error::DegreeMismatch {
                left: 2,
                right: u.degree(),
            });
        }
        let level = u.level() + 1;
        let max = max_level_for(2);
        if level > max {
            return Err(Error::LevelTooDeep { level, max });
        }
        if u.is_root() {
            return Ok(alloc::vec![
                Transition {
                    target: Word::new(2, 1, 0)?,
                    weight: self.q + 2 * self.p,
                },
                Transition {
                    target: Word::new(2, 1, 1)?,
                    weight: 2 * (self.q - self.p),
                },
            ]);
        }
        let base = 2 * u.index() as i128;
        let mut out: Vec<Transition> = (base - 1..=base + 2)
            .map(|j| {
                let target = Word::wrapped(2, level, j).expect("level checked");
                let weight = if target.index() % 4 == 2 {
                    self.heavy()
                } else {
                    self.light()
                };
                Transition { target, weight }
            })
            .collect();
        out.sort();
        Ok(out)
    }
}

/// Outgoing rows for every word of level `≤ base_level`, with exact probabilities.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KernelTable {
    pub degree: u32,
    pub base_level: u32,
    pub rows: BTreeMap<Word, Vec<(Word, BigRational)>>,
}

impl KernelTable {
    pub fn new(degree: u32, base_level: u32) -> KernelTable {
        KernelTable {
            degree,
            base_level,
            rows: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, source: Word, target: Word, probability: BigRational) {
        let row = self.rows.entry(source).or_default();
        match row.iter_mut().find(|(t, _)| *t == target) {
            Some((_, p)) => *p += probability,
            None => row.push((target, probability)),
        }
    }

    /// Tabulates a kernel on all words of level `≤ base_level`.
    pub fn from_kernel<K: TransitionKernel>(kernel: &K, base_level: u32) -> Result<KernelTable> {
        let realization = CircleRealization::new(kernel.degree())?;
        let mut table = KernelTable::new(kernel.degree(), base_level);
        let denominator = kernel.denominator();
        for level in 0..=base_level {
            for u in realization.enumerate_level(level)? {
                for t in kernel.transitions(&u)? {
                    table.insert(u, t.target, ratio(t.weight, denominator));
                }
            }
        }
        Ok(table)
    }

    /// Row-stochastic check: the first vertex whose row does not sum to one.
    pub fn check_rows(&self) -> Result<()> {
        for (u, row) in &self.rows {
            let mut sum = BigRational::zero();
            for (t, p) in row {
                if *p <= BigRational::zero() || *p > BigRational::one() {
                    return Err(Error::BadProbability {
                        vertex: *u,
                        probability: p.to_string(),
                    });
                }
                if t.degree() != self.degree {
                    return Err(Error::DegreeMismatch {
                        left: self.degree,
                        right: t.degree(),
                    });
                }
                sum += p;
            }
            if !sum.is_one() {
                return Err(Error::RowSum {
                    vertex: *u,
                    sum: sum.to_string(),
                });
            }
        }
        Ok(())
    }
}

/// Either the built-in doubling family or a base-window table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum KernelSpec {
    Doubling { x: BigRational },
    Table(KernelTable),
}

impl KernelSpec {
    pub fn build(&self) -> Result<Kernel> {
        Ok(match self {
            KernelSpec::Doubling { x } => Kernel::Doubling(DoublingKernel::new(x.clone())?),
            KernelSpec::Table(table) => Kernel::Table(extend_by_equivariance(table)?),
        })
    }
}

/// Either kernel family behind one type.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Kernel {
    Doubling(DoublingKernel),
    Table(EquivariantKernel),
}

macro_rules! delegate {
    ($self:ident, $k:ident => $e:expr) => {
        match $self {
            Kernel::Doubling($k) => $e,
            Kernel::Table($k) => $e,
        }
    };
}

impl TransitionKernel for Kernel {
    fn degree(&self) -> u32 {
        delegate!(self, k => k.degree())
    }
    fn denominator(&self) -> u64 {
        delegate!(self, k => k.denominator())
    }
    fn max_jump(&self) -> u32 {
        delegate!(self, k => k.max_jump())
    }
    fn reach(&self) -> u32 {
        delegate!(self, k => k.reach())
    }
    fn radius(&self) -> u32 {
        delegate!(self, k => k.radius())
    }
    fn transitions(&self, u: &Word) -> Result<Vec<Transition>> {
        delegate!(self, k => k.transitions(u))
    }
}

/// A kernel given on a base window and extended to all levels by shift equivariance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquivariantKernel {
    degree: u32,
    base_level: u32,
    denominator: u64,
    rows: BTreeMap<Word, Vec<Transition>>,
    max_jump: u32,
    reach: u32,
    radius: u32,
}

/// Extends a base-window table to every level.
///
/// Above the window, `P̂(u, w) := P̂(σ^k u, σ^k w)` with `k = |u| − N_0`,
/// where `w` is the lift of each target of `σ^k u` through the branch of
/// `f^k` that maps a neighbourhood of `A_u` onto one of `A_{σ^k u}`.
pub fn extend_by_equivariance(table: &KernelTable) -> Result<EquivariantKernel> {
    let degree = table.degree;
    let realization = CircleRealization::new(degree)?;
    let base = table.base_level;
    if base == 0 {
        return Err(Error::Precondition(
            "base level must be at least 1 to lift above the root".into(),
        ));
    }
    for u in table.rows.keys() {
        if u.degree() != degree {
            return Err(Error::DegreeMismatch {
                left: degree,
                right: u.degree(),
            });
        }
        if u.level() > base {
            return Err(Error::AboveBase {
                vertex: *u,
                base_level: base,
            });
        }
    }
    for level in 0..=base {
        for u in realization.enumerate_level(level)? {
            if !table.rows.contains_key(&u) {
                return Err(Error::MissingRow(u));
            }
        }
    }
    table.check_rows()?;

    let mut denominator = BigUint::one();
    let mut max_jump = 1;
    for (u, row) in &table.rows {
        for (t, p) in row {
            if t.level() <= u.level() {
                return Err(Error::NonIncreasing { from: *u, to: *t });
            }
            max_jump = max_jump.max(t.level() - u.level());
            denominator = denominator.lcm(&p.denom().magnitude().clone());
        }
    }
    let denominator = denominator.to_u64().ok_or(Error::DenominatorOverflow)?;
    let mut rows = BTreeMap::new();
    for (u, row) in &table.rows {
        let mut out: Vec<Transition> = row
            .iter()
            .map(|(t, p)| {
                let scaled = p * BigRational::from_integer(BigInt::from(denominator));
                Transition {
                    target: *t,
                    weight: scaled.to_integer().to_u64().expect("probability at most one"),
                }
            })
            .collect();
        out.sort();
        rows.insert(*u, out);
    }

    let mut kernel = EquivariantKernel {
        degree,
        base_level: base,
        denominator,
        rows,
        max_jump,
        reach: 0,
        radius: 0,
    };

    for (u, row) in &kernel.rows {
        if u.is_root() {
            continue;
        }
        // σ_*P(u) must equal P(σu).
        let mut pushed: BTreeMap<Word, u64> = BTreeMap::new();
        for t in row {
            *pushed.entry(t.target.shift()).or_default() += t.weight;
        }
        let expected: BTreeMap<Word, u64> = kernel.rows[&u.shift()]
            .iter()
            .map(|t| (t.target, t.weight))
            .collect();
        if pushed != expected {
            return Err(Error::InconsistentBase {
                vertex: *u,
                detail: format!("pushed row {pushed:?} differs from the row of {}", u.shift()),
            });
        }
        if u.level() == base {
            kernel.lift_row(u, u, 0)?;
        }
        if u.level() >= 2 {
            // Coarse sources whose targets wrap half the circle have no
            // preferred branch; only the base rows are ever lifted.
            let Ok(lifted) = kernel.lift_row(u, &u.shift(), 1) else {
                continue;
            };
            if lifted != *row {
                return Err(Error::LiftAmbiguity {
                    from: *u,
                    target: lifted
                        .iter()
                        .zip(row.iter())
                        .find(|(a, b)| a != b)
                        .map_or(*u, |(a, _)| a.target),
                });
            }
        }
    }

    let mut reach = 0u32;
    for (u, row) in &kernel.rows {
        if u.is_root() {
            continue;
        }
        for t in row {
            let shift = (t.target.index() / pow(degree, t.target.level() - u.level())) as i128;
            let size = pow(degree, u.level()) as i128;
            let delta = centred(shift - u.index() as i128, size);
            reach = reach.max(delta.unsigned_abs() as u32);
        }
    }
    kernel.reach = reach;

    let depth = base + max_jump;
    let graph = build_graph(&realization, depth, DEFAULT_VERTEX_BUDGET)?;
    let mut radius = 0;
    for (u, row) in &kernel.rows {
        let dist = graph.distances_from(u)?;
        for t in row {
            radius = radius.max(dist[graph.id(&t.target)?]);
        }
    }
    kernel.radius = radius;
    Ok(kernel)
}

fn centred(value: i128, modulus: i128) -> i128 {
    let r = value.rem_euclid(modulus);
    if 2 * r > modulus {
        r - modulus
    } else {
        r
    }
}

impl EquivariantKernel {
    pub fn base_level(&self) -> u32 {
        self.base_level
    }

    /// Lifts the row of `source = σ^k u` to `u`.
    fn lift_row(&self, u: &Word, source: &Word, k: u32) -> Result<Vec<Transition>> {
        let d = self.degree;
        let row = &self.rows[source];
        let max = max_level_for(d);
        let mut out = Vec::with_capacity(row.len());
        for t in row {
            let level = t.target.level() + k;
            if level > max {
                return Err(Error::LevelTooDeep { level, max });
            }
            let m = pow(d, t.target.level()) as i128;
            let rel = pow(d, t.target.level() - source.level()) as i128;
            let offset = (t.target.index() as i128 - source.index() as i128 * rel).rem_euclid(m);
            if 2 * offset == m {
                return Err(Error::LiftAmbiguity {
                    from: *u,
                    target: t.target,
                });
            }
            let offset = centred(offset, m);
            let index = u.index() as i128 * rel + offset;
            out.push(Transition {
                target: Word::wrapped(d, level, index)?,
                weight: t.weight,
            });
        }
        out.sort();
        Ok(out)
    }
}

impl TransitionKernel for EquivariantKernel {
    fn degree(&self) -> u32 {
        self.degree
    }

    fn denominator(&self) -> u64 {
        self.denominator
    }

    fn max_jump(&self) -> u32 {
        self.max_jump
    }

    fn reach(&self) -> u32 {
        self.reach
    }

    fn radius(&self) -> u32 {
        self.radius
    }

    fn transitions(&self, u: &Word) -> Result<Vec<Transition>> {
        if u.degree() != self.degree {
            return Err(Error::DegreeMismatch {
                left: self.degree,
                right: u.degree(),
            });
        }
        if u.level() <= self.base_level {
            return Ok(self.rows[u].clone());
        }
        let k = u.level() - self.base_level;
        self.lift_row(u, &u.shift_by(k), k)
    }
}

/// Kernel rows materialized over a truncated graph, for validation.
///
/// Rows are free-form here: nothing forces them to be stochastic or level
/// increasing, which is what the validator is for.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaterializedKernel {
    pub degree: u32,
    pub max_level: u32,
    pub rows: BTreeMap<Word, Vec<(Word, BigRational)>>,
}

impl MaterializedKernel {
    /// Rows of every vertex whose targets all stay within `graph`.
    pub fn from_kernel<K: TransitionKernel>(kernel: &K, graph: &TileGraph) -> Result<MaterializedKernel> {
        let top = graph.max_level().saturating_sub(kernel.max_jump());
        let mut rows = BTreeMap::new();
        for level in 0..=top {
            for u in graph.level_vertices(level) {
                let row = kernel
                    .transitions(&u)?
                    .into_iter()
                    .map(|t| (t.target, ratio(t.weight, kernel.denominator())))
                    .collect();
                rows.insert(u, row);
            }
        }
        Ok(MaterializedKernel {
            degree: kernel.degree(),
            max_level: graph.max_level(),
            rows,
        })
    }

    pub fn probability(&self, u: &Word, v: &Word) -> BigRational {
        self.rows
            .get(u)
            .and_then(|row| row.iter().find(|(t, _)| t == v))
            .map_or_else(BigRational::zero, |(_, p)| p.clone())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AssumptionCheck {
    pub passed: bool,
    /// First offending `(source, target)` pair, if any.
    pub witness: Option<(Word, Word)>,
}

impl AssumptionCheck {
    fn pass() -> AssumptionCheck {
        AssumptionCheck {
            passed: true,
            witness: None,
        }
    }

    fn fail(u: Word, v: Word) -> AssumptionCheck {
        AssumptionCheck {
            passed: false,
            witness: Some((u, v)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationReport {
    pub rows_checked: usize,
    pub row_sums: AssumptionCheck,
    /// (A): every target lies in the graph; `minimal_radius` is the smallest valid `R`.
    pub locality: AssumptionCheck,
    pub minimal_radius: Option<u32>,
    /// (B): level strictly increases.
    pub level_increase: AssumptionCheck,
    /// (C): adjacent next-level vertices get positive mass.
    pub coverage: AssumptionCheck,
    /// (D): `σ_*P(u) = P(σu)` for `u ≠ o` (the root is exempt).
    pub equivariance: AssumptionCheck,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.row_sums.passed
            && self.locality.passed
            && self.level_increase.passed
            && self.coverage.passed
            && self.equivariance.passed
    }
}

/// Checks Assumptions (A)–(D) on every materialized row.
pub fn validate_assumptions(kernel: &MaterializedKernel, graph: &TileGraph) -> Result<ValidationReport> {
    let mut row_sums = AssumptionCheck::pass();
    let mut locality = AssumptionCheck::pass();
    let mut level_increase = AssumptionCheck::pass();
    let mut coverage = AssumptionCheck::pass();
    let mut equivariance = AssumptionCheck::pass();
    let mut radius = 0u32;

    for (u, row) in &kernel.rows {
        let sum: BigRational = row.iter().map(|(_, p)| p.clone()).sum();
        if row_sums.passed && !sum.is_one() {
            row_sums = AssumptionCheck::fail(*u, *u);
        }
        let dist = graph.distances_from(u)?;
        for (t, p) in row {
            if p.is_zero() {
                continue;
            }
            match graph.id(t) {
                Ok(id) if dist[id] != u32::MAX => radius = radius.max(dist[id]),
                _ => {
                    if locality.passed {
                        locality = AssumptionCheck::fail(*u, *t);
                    }
                }
            }
            if level_increase.passed && t.level() <= u.level() {
                level_increase = AssumptionCheck::fail(*u, *t);
            }
        }
        if coverage.passed && u.level() < graph.max_level() {
            for v in graph.neighbors(u)? {
                if v.level() == u.level() + 1 && kernel.probability(u, &v).is_zero() {
                    coverage = AssumptionCheck::fail(*u, v);
                    break;
                }
            }
        }
        if equivariance.passed && !u.is_root() {
            if let Some(expected) = kernel.rows.get(&u.shift()) {
                let mut pushed: BTreeMap<Word, BigRational> = BTreeMap::new();
                for (t, p) in row {
                    *pushed.entry(t.shift()).or_insert_with(BigRational::zero) += p;
                }
                pushed.retain(|_, p| !p.is_zero());
                let mut want: BTreeMap<Word, BigRational> = BTreeMap::new();
                for (t, p) in expected {
                    *want.entry(*t).or_insert_with(BigRational::zero) += p;
                }
                want.retain(|_, p| !p.is_zero());
                if pushed != want {
                    let witness = pushed
                        .iter()
                        .find(|(t, p)| want.get(t) != Some(p))
                        .map(|(t, _)| *t)
                        .or_else(|| want.keys().find(|t| !pushed.contains_key(t)).copied())
                        .unwrap_or(*u);
                    equivariance = AssumptionCheck::fail(*u, witness);
                }
            }
        }
    }
    Ok(ValidationReport {
        rows_checked: kernel.rows.len(),
        row_sums,
        minimal_radius: locality.passed.then_some(radius),
        locality,
        level_increase,
        coverage,
        equivariance,
    })
}

/// The root's expected first-step level gain, `l = Σ_w P̂(o,w)|w|`.
pub fn drift_exact<K: TransitionKernel>(kernel: &K) -> Result<BigRational> {
    let root = Word::root(kernel.degree());
    let mut total = 0u128;
    for t in kernel.transitions(&root)? {
        total += t.weight as u128 * t.target.level() as u128;
    }
    Ok(BigRational::new(BigInt::from(total), BigInt::from(kernel.denominator())))
}
