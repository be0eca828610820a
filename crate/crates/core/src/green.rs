//! Exact Green functions, shadows and the inequalities built on them.
//!
//! Because every step raises the level, `F(u,v)` is a finite sum over
//! paths and satisfies `F(u,v) = Σ_w F(u,w) P̂(w,v)`. Values are carried
//! as big integers scaled by `L^{|v|−|u|}`, where `L` is the kernel's common
//! denominator; nothing is reduced until a rational is asked for.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::kernel::TransitionKernel;
use crate::numeric::ln_biguint;
use crate::symbolic::{max_level_for, pow, TileInterval, Word};

/// Powers of the common denominator, grown on demand.
#[derive(Clone, Debug)]
struct Powers {
    base: BigUint,
    cache: Vec<BigUint>,
}

impl Powers {
    fn new(base: u64) -> Powers {
        Powers {
            base: BigUint::from(base),
            cache: alloc::vec![BigUint::one()],
        }
    }

    fn get(&mut self, exponent: u32) -> &BigUint {
        while self.cache.len() <= exponent as usize {
            let next = self.cache.last().expect("non-empty") * &self.base;
            self.cache.push(next);
        }
        &self.cache[exponent as usize]
    }
}

fn scaled_ratio(scaled: &BigUint, denominator: u64, exponent: u32) -> BigRational {
    BigRational::new(
        BigInt::from(scaled.clone()),
        BigInt::from(BigUint::from(denominator).pow(exponent)),
    )
}

fn scaled_ln(scaled: &BigUint, denominator: u64, exponent: u32) -> f64 {
    ln_biguint(scaled) - exponent as f64 * libm::log(denominator as f64)
}

/// `F(source, ·)` on the forward cone of `source`, up to `max_level`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GreenTable {
    source: Word,
    max_level: u32,
    denominator: u64,
    scaled: BTreeMap<Word, BigUint>,
}

impl GreenTable {
    pub fn source(&self) -> Word {
        self.source
    }

    pub fn max_level(&self) -> u32 {
        self.max_level
    }

    /// Number of targets with `F > 0`.
    pub fn len(&self) -> usize {
        self.scaled.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scaled.is_empty()
    }

    pub fn contains(&self, target: &Word) -> bool {
        self.scaled.contains_key(target)
    }

    /// `F(source, target)`; zero outside the shadow.
    pub fn get(&self, target: &Word) -> BigRational {
        self.scaled.get(target).map_or_else(BigRational::zero, |h| {
            scaled_ratio(h, self.denominator, target.level() - self.source.level())
        })
    }

    /// `log F(source, target)`, or `None` outside the shadow.
    pub fn ln(&self, target: &Word) -> Option<f64> {
        self.scaled
            .get(target)
            .map(|h| scaled_ln(h, self.denominator, target.level() - self.source.level()))
    }

    /// Shadow words in `(level, index)` order.
    pub fn support(&self) -> impl Iterator<Item = &Word> + '_ {
        self.scaled.keys()
    }

    /// `(target, F)` in `(level, index)` order.
    pub fn iter(&self) -> impl Iterator<Item = (Word, BigRational)> + '_ {
        self.scaled.iter().map(move |(w, h)| {
            (*w, scaled_ratio(h, self.denominator, w.level() - self.source.level()))
        })
    }
}

fn check_depth(degree: u32, level: u32) -> Result<()> {
    let max = max_level_for(degree);
    if level > max {
        return Err(Error::LevelTooDeep { level, max });
    }
    Ok(())
}

/// Forward Green table from `source`, processed in level order.
pub fn green_table<K: TransitionKernel>(kernel: &K, source: &Word, max_level: u32) -> Result<GreenTable> {
    if source.level() > max_level {
        return Err(Error::InsufficientDepth {
            needed: source.level(),
            available: max_level,
        });
    }
    check_depth(kernel.degree(), max_level)?;
    let denominator = kernel.denominator();
    let mut powers = Powers::new(denominator);
    let mut pending: BTreeMap<Word, BigUint> = BTreeMap::new();
    let mut done = BTreeMap::new();
    pending.insert(*source, BigUint::one());
    while let Some((w, h)) = pending.pop_first() {
        if w.level() < max_level {
            for t in kernel.transitions(&w)? {
                if t.target.level() > max_level {
                    continue;
                }
                let gap = t.target.level() - w.level() - 1;
                let contribution = &h * t.weight * powers.get(gap);
                *pending.entry(t.target).or_default() += contribution;
            }
        }
        done.insert(w, h);
    }
    Ok(GreenTable {
        source: *source,
        max_level,
        denominator,
        scaled: done,
    })
}

/// `F(·, target)` on the backward cone of `target`, down to `min_level`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GreenColumn {
    target: Word,
    min_level: u32,
    denominator: u64,
    scaled: BTreeMap<Word, BigUint>,
}

impl GreenColumn {
    pub fn target(&self) -> Word {
        self.target
    }

    pub fn min_level(&self) -> u32 {
        self.min_level
    }

    pub fn contains(&self, source: &Word) -> bool {
        self.scaled.contains_key(source)
    }

    /// `F(source, target)`; zero when `target` is not reachable.
    pub fn get(&self, source: &Word) -> BigRational {
        self.scaled.get(source).map_or_else(BigRational::zero, |h| {
            scaled_ratio(h, self.denominator, self.target.level() - source.level())
        })
    }

    pub fn ln(&self, source: &Word) -> Option<f64> {
        self.scaled
            .get(source)
            .map(|h| scaled_ln(h, self.denominator, self.target.level() - source.level()))
    }

    pub fn sources(&self) -> impl Iterator<Item = &Word> + '_ {
        self.scaled.keys()
    }

    /// Martin kernel `K(u, target) = F(u, target) / F(o, target)`.
    pub fn martin(&self, u: &Word) -> Result<BigRational> {
        let root = Word::root(self.target.degree());
        if self.min_level > 0 {
            return Err(Error::InsufficientDepth {
                needed: 0,
                available: self.min_level,
            });
        }
        let Some(h_root) = self.scaled.get(&root) else {
            return Err(Error::OutsideRootShadow(self.target));
        };
        Ok(match self.scaled.get(u) {
            // Scale factors differ by L^{|u|}.
            Some(h) => BigRational::new(
                BigInt::from(h * BigUint::from(self.denominator).pow(u.level())),
                BigInt::from(h_root.clone()),
            ),
            None => BigRational::zero(),
        })
    }
}

/// Backward Green column into `target`, over every source of level `≥ min_level`.
pub fn green_column<K: TransitionKernel>(kernel: &K, target: &Word, min_level: u32) -> Result<GreenColumn> {
    let denominator = kernel.denominator();
    let mut powers = Powers::new(denominator);
    let mut scaled: BTreeMap<Word, BigUint> = BTreeMap::new();
    scaled.insert(*target, BigUint::one());
    let mut by_level: BTreeMap<u32, BTreeSet<Word>> = BTreeMap::new();
    for level in (min_level..target.level()).rev() {
        // Candidates at `level` were registered by cone members at most
        // `max_jump` levels above.
        let members: Vec<Word> = scaled
            .keys()
            .filter(|w| w.level() > level && w.level() <= level + kernel.max_jump())
            .copied()
            .collect();
        for w in members {
            for candidate in kernel.predecessor_candidates(&w) {
                if candidate.level() >= min_level {
                    by_level.entry(candidate.level()).or_default().insert(candidate);
                }
            }
        }
        let Some(candidates) = by_level.remove(&level) else {
            continue;
        };
        for u in candidates {
            let mut total = BigUint::zero();
            for t in kernel.transitions(&u)? {
                if let Some(h) = scaled.get(&t.target) {
                    let gap = t.target.level() - u.level() - 1;
                    total += h * t.weight * powers.get(gap);
                }
            }
            if !total.is_zero() {
                scaled.insert(u, total);
            }
        }
    }
    Ok(GreenColumn {
        target: *target,
        min_level,
        denominator,
        scaled,
    })
}

/// `K(u,v) = F(u,v)/F(o,v)` from two forward tables.
pub fn martin_kernel(green_o: &GreenTable, green_u: &GreenTable, v: &Word) -> Result<BigRational> {
    if !green_o.source().is_root() {
        return Err(Error::Precondition(format!(
            "first table must start at the root, not {}",
            green_o.source()
        )));
    }
    let denominator = green_o.get(v);
    if denominator.is_zero() {
        return Err(Error::OutsideRootShadow(*v));
    }
    Ok(green_u.get(v) / denominator)
}

/// Words reachable from `u` with level at most `max_level`.
pub fn forward_support<K: TransitionKernel>(kernel: &K, u: &Word, max_level: u32) -> Result<BTreeSet<Word>> {
    let mut seen = BTreeSet::new();
    let mut frontier = alloc::vec![*u];
    seen.insert(*u);
    while let Some(w) = frontier.pop() {
        if w.level() >= max_level {
            continue;
        }
        for t in kernel.transitions(&w)? {
            if t.target.level() <= max_level && seen.insert(t.target) {
                frontier.push(t.target);
            }
        }
    }
    Ok(seen)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NeighborSet {
    pub center: Word,
    /// `℧(center)` truncated at `max_level`.
    pub shadow: BTreeSet<Word>,
    /// `N(center)`: words within the level band whose truncated shadows meet `shadow`.
    pub neighbors: BTreeSet<Word>,
    pub max_level: u32,
    /// Set when `|center| + R > max_level`, so the band reaches past the truncation.
    pub truncated: bool,
}

/// Shadow of `u` and its neighbourhood `N(u)` within `max_level`.
pub fn shadow_and_neighbors<K: TransitionKernel>(kernel: &K, u: &Word, max_level: u32) -> Result<NeighborSet> {
    let shadow = forward_support(kernel, u, max_level)?;
    let d = kernel.degree();
    let radius = kernel.radius();
    let pad = ((kernel.reach() as u64 + 1) * d as u64).div_ceil(d as u64 - 1) as i128 + 1;
    let lowest = u.level().saturating_sub(radius);
    let highest = (u.level() + radius).min(max_level);
    let mut neighbors = BTreeSet::new();
    for level in lowest..=highest {
        let size = pow(d, level) as i128;
        let mut candidates = BTreeSet::new();
        for w in &shadow {
            let (first, last) = if w.level() >= level {
                let i = (w.index() / pow(d, w.level() - level)) as i128;
                (i, i)
            } else {
                let f = pow(d, level - w.level()) as i128;
                let i = w.index() as i128 * f;
                (i, i + f - 1)
            };
            if last - first + 2 * pad + 1 >= size {
                candidates.extend((0..size).map(|i| Word::wrapped(d, level, i).expect("level")));
                break;
            }
            for i in first - pad..=last + pad {
                candidates.insert(Word::wrapped(d, level, i).expect("level"));
            }
        }
        for v in candidates {
            if v == *u {
                neighbors.insert(v);
                continue;
            }
            let other = forward_support(kernel, &v, max_level)?;
            let (small, large) = if other.len() < shadow.len() {
                (&other, &shadow)
            } else {
                (&shadow, &other)
            };
            if small.iter().any(|w| large.contains(w)) {
                neighbors.insert(v);
            }
        }
    }
    Ok(NeighborSet {
        center: *u,
        shadow,
        neighbors,
        max_level,
        truncated: u.level() + radius > max_level,
    })
}

/// Forward tables and neighbourhoods, computed on first use.
pub struct GreenCache<'k, K> {
    kernel: &'k K,
    max_level: u32,
    tables: BTreeMap<Word, GreenTable>,
    neighbors: BTreeMap<Word, NeighborSet>,
}

impl<'k, K: TransitionKernel> GreenCache<'k, K> {
    pub fn new(kernel: &'k K, max_level: u32) -> GreenCache<'k, K> {
        GreenCache {
            kernel,
            max_level,
            tables: BTreeMap::new(),
            neighbors: BTreeMap::new(),
        }
    }

    pub fn max_level(&self) -> u32 {
        self.max_level
    }

    pub fn table(&mut self, source: &Word) -> Result<&GreenTable> {
        if !self.tables.contains_key(source) {
            let table = green_table(self.kernel, source, self.max_level)?;
            self.tables.insert(*source, table);
        }
        Ok(&self.tables[source])
    }

    pub fn f(&mut self, u: &Word, v: &Word) -> Result<BigRational> {
        Ok(self.table(u)?.get(v))
    }

    pub fn neighbor_set(&mut self, u: &Word) -> Result<&NeighborSet> {
        if !self.neighbors.contains_key(u) {
            let set = shadow_and_neighbors(self.kernel, u, self.max_level)?;
            self.neighbors.insert(*u, set);
        }
        Ok(&self.neighbors[u])
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiplicativeReport {
    /// `F(v,s) F(s,w)`.
    pub through_s: BigRational,
    /// `F(v,w)`.
    pub direct: BigRational,
    /// `Σ_{t ∈ N(u)} F(v,t) F(t,w)`.
    pub neighbor_sum: BigRational,
    pub lower_holds: bool,
    pub upper_holds: bool,
}

impl MultiplicativeReport {
    pub fn holds(&self) -> bool {
        self.lower_holds && self.upper_holds
    }
}

/// Evaluates `F(v,s)F(s,w) ≤ F(v,w) ≤ Σ_{t∈N(u)} F(v,t)F(t,w)` exactly.
pub fn check_multiplicative<K: TransitionKernel>(
    cache: &mut GreenCache<'_, K>,
    v: &Word,
    s: &Word,
    u: &Word,
    w: &Word,
) -> Result<MultiplicativeReport> {
    if v.level() > u.level() {
        return Err(Error::Precondition(format!("|{v}| exceeds |{u}|")));
    }
    if w.level() > cache.max_level() {
        return Err(Error::InsufficientDepth {
            needed: w.level(),
            available: cache.max_level(),
        });
    }
    if !cache.table(u)?.contains(w) {
        return Err(Error::Precondition(format!("{w} is not in the shadow of {u}")));
    }
    let through_s = cache.f(v, s)? * cache.f(s, w)?;
    let direct = cache.f(v, w)?;
    let band: Vec<Word> = cache.neighbor_set(u)?.neighbors.iter().copied().collect();
    let mut neighbor_sum = BigRational::zero();
    for t in band {
        let left = cache.f(v, &t)?;
        if !left.is_zero() {
            neighbor_sum += left * cache.f(&t, w)?;
        }
    }
    Ok(MultiplicativeReport {
        lower_holds: through_s <= direct,
        upper_holds: direct <= neighbor_sum,
        through_s,
        direct,
        neighbor_sum,
    })
}

/// Sums path weights over every individual path from `source`, one path at a time.
///
/// Exponential in the depth; it shares no code with the level-ordered DP and
/// serves as its oracle on shallow graphs.
pub fn enumerate_paths<K: TransitionKernel>(
    kernel: &K,
    source: &Word,
    max_level: u32,
) -> Result<BTreeMap<Word, BigRational>> {
    fn walk<K: TransitionKernel>(
        kernel: &K,
        at: &Word,
        weight: &BigRational,
        max_level: u32,
        out: &mut BTreeMap<Word, BigRational>,
    ) -> Result<()> {
        *out.entry(*at).or_insert_with(BigRational::zero) += weight;
        for t in kernel.transitions(at)? {
            if t.target.level() <= max_level {
                let next = weight * crate::kernel::ratio(t.weight, kernel.denominator());
                walk(kernel, &t.target, &next, max_level, out)?;
            }
        }
        Ok(())
    }
    let mut out = BTreeMap::new();
    walk(kernel, source, &BigRational::one(), max_level, &mut out)?;
    Ok(out)
}

/// A random admissible `(v, s, u, w)`: `|v| ≤ |u|`, `w ∈ ℧(u)`, all within `max_level`,
/// with `|u| + R ≤ max_level` so that `N(u)` is not truncated.
pub fn random_quadruple<K: TransitionKernel, R: rand::Rng>(
    kernel: &K,
    max_level: u32,
    rng: &mut R,
) -> Result<[Word; 4]> {
    let d = kernel.degree();
    let top = max_level.saturating_sub(kernel.radius());
    let random_word = |rng: &mut R, max: u32| {
        let level = rng.gen_range(0..=max);
        Word::new(d, level, rng.gen_range(0..pow(d, level))).expect("index in range")
    };
    let u = random_word(rng, top);
    let v = random_word(rng, u.level());
    let s = random_word(rng, max_level);
    // Walk forward from u for a random number of steps.
    let mut w = u;
    let steps = rng.gen_range(0..=max_level - u.level());
    for _ in 0..steps {
        let next: Vec<Word> = kernel
            .transitions(&w)?
            .into_iter()
            .map(|t| t.target)
            .filter(|t| t.level() <= max_level)
            .collect();
        if next.is_empty() {
            break;
        }
        w = next[rng.gen_range(0..next.len())];
    }
    Ok([v, s, u, w])
}

/// A closed arc `[start, start + len]` measured in units of `d^{-level}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Arc {
    pub level: u32,
    pub start: i128,
    pub len: u128,
}

impl Arc {
    fn of_tile(tile: &TileInterval, level: u32) -> Arc {
        let (start, len) = tile.scaled(level);
        Arc {
            level,
            start: start as i128,
            len,
        }
    }

    pub fn is_whole_circle(&self, degree: u32) -> bool {
        self.len >= pow(degree, self.level) as u128
    }

    /// Whether the closed arc meets the closed tile.
    pub fn meets(&self, degree: u32, tile: &TileInterval) -> bool {
        if self.is_whole_circle(degree) || tile.is_whole_circle() {
            return true;
        }
        let m = pow(degree, self.level) as i128;
        let other = Arc::of_tile(tile, self.level);
        let ab = (other.start - self.start).rem_euclid(m) as u128;
        let ba = (self.start - other.start).rem_euclid(m) as u128;
        ab <= self.len || ba <= other.len
    }

    /// Whether the closed arc contains the point `p/q`.
    pub fn contains_point(&self, degree: u32, p: u64, q: u64) -> bool {
        if self.is_whole_circle(degree) {
            return true;
        }
        let m = pow(degree, self.level) as i128;
        // Compare q·(p/q − start/m) mod q·m against q·len.
        let scaled = (p as i128 * m - self.start * q as i128).rem_euclid(m * q as i128);
        scaled as u128 <= self.len * q as u128
    }
}

/// Closed hull of a set of tiles around `center`, padded by `pad` tiles of
/// the deepest level on each side.
///
/// Offsets are measured from the start of `center`'s tile; every member must
/// lie within half a turn of it, which holds for shadows of non-root words.
pub fn shadow_hull(center: &Word, members: &BTreeSet<Word>, pad: u128) -> Arc {
    let d = center.degree();
    let level = members.iter().map(Word::level).max().unwrap_or(center.level()).max(center.level());
    let m = pow(d, level) as i128;
    if center.is_root() {
        return Arc { level, start: 0, len: m as u128 };
    }
    let origin = Arc::of_tile(&center.tile(), level).start;
    let mut lo = 0i128;
    let mut hi = 0i128;
    for w in members {
        let arc = Arc::of_tile(&w.tile(), level);
        let mut rel = (arc.start - origin).rem_euclid(m);
        if 2 * rel > m {
            rel -= m;
        }
        lo = lo.min(rel);
        hi = hi.max(rel + arc.len as i128);
    }
    let start = origin + lo - pad as i128;
    let len = ((hi - lo) as u128 + 2 * pad).min(m as u128);
    Arc { level, start, len }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShadowGeometry {
    pub center: Word,
    pub depth: u32,
    pub tiles_checked: usize,
    /// Largest distance from `A_u` reached by a shadow tile, in units of `d^{-|u|}`.
    pub max_excursion: num_rational::Ratio<u128>,
    pub within_bound: bool,
}

/// Checks that every shadow tile of `u` down to `depth` lies in `B(A_u, c·d^{-|u|})`.
pub fn shadow_geometry<K: TransitionKernel>(
    kernel: &K,
    u: &Word,
    depth: u32,
    c: num_rational::Ratio<u128>,
) -> Result<ShadowGeometry> {
    let d = kernel.degree();
    let shadow = forward_support(kernel, u, depth)?;
    let m = pow(d, depth) as i128;
    let unit = pow(d, depth - u.level()) as i128;
    let home = Arc::of_tile(&u.tile(), depth);
    let mut worst = 0i128;
    for w in shadow.iter().filter(|_| !u.is_root()) {
        let arc = Arc::of_tile(&w.tile(), depth);
        // Offsets of the tile's ends relative to A_u, centred on A_u's midpoint.
        let mid = home.start * 2 + home.len as i128;
        let mut lo = (2 * arc.start - mid).rem_euclid(2 * m);
        if lo > m {
            lo -= 2 * m;
        }
        let hi = lo + 2 * arc.len as i128;
        let half = home.len as i128;
        let far = |q: i128| (q.abs() - half).max(0);
        // Distance to A_u peaks at the antipode of its midpoint.
        let excursion = if hi >= m { m - half } else { far(lo).max(far(hi)) };
        worst = worst.max(excursion);
    }
    // `worst` is twice the excursion in units of d^{-depth}.
    let excursion = num_rational::Ratio::new(worst as u128, 2 * unit as u128);
    Ok(ShadowGeometry {
        center: *u,
        depth,
        tiles_checked: shadow.len(),
        within_bound: excursion <= c,
        max_excursion: excursion,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct HarnackSample {
    pub u: Word,
    pub v: Word,
    pub targets: usize,
    /// `sup F(v,w)/F(u,w)` over targets `w` with `F(v,w) > 0`.
    pub sup_ratio: f64,
    /// Some target had `F(v,w) > 0 = F(u,w)`.
    pub unbounded: bool,
}

/// Samples `F(v,w)/F(u,w)` over every `w` with `|w| ≥ max(|u|,|v|) + gap`,
/// `|w| ≤ depth`, whose closed shadow hull meets `A_u`.
pub fn harnack_sample<K: TransitionKernel>(
    kernel: &K,
    u: &Word,
    v: &Word,
    gap: u32,
    depth: u32,
) -> Result<HarnackSample> {
    let from_u = green_table(kernel, u, depth)?;
    let from_v = green_table(kernel, v, depth)?;
    let first = u.level().max(v.level()) + gap;
    let shadow_depth = depth + gap;
    let tile_u = u.tile();
    let mut sup = 0.0f64;
    let mut unbounded = false;
    let mut targets = 0;
    let mut closure_cache: BTreeMap<Word, bool> = BTreeMap::new();
    for (w, fv) in from_v.iter() {
        if w.level() < first {
            continue;
        }
        let meets = match closure_cache.get(&w) {
            Some(m) => *m,
            None => {
                let shadow = forward_support(kernel, &w, shadow_depth)?;
                let m = shadow_hull(&w, &shadow, 1).meets(kernel.degree(), &tile_u);
                closure_cache.insert(w, m);
                m
            }
        };
        if !meets {
            continue;
        }
        targets += 1;
        let fu = from_u.get(&w);
        if fu.is_zero() {
            unbounded = true;
            continue;
        }
        sup = sup.max(crate::numeric::rational_to_f64(&(fv / fu)));
    }
    Ok(HarnackSample {
        u: *u,
        v: *v,
        targets,
        sup_ratio: sup,
        unbounded,
    })
}
