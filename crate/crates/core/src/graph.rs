//! The truncated tile graph and its metric diagnostics.
//!
//! Vertices are all words of level `≤ max_level`; `u ~ v` when their levels
//! differ by at most one and their closed tiles meet. Distances are computed
//! on the truncated graph. In this layered graph a geodesic between two
//! vertices never needs to go below the deeper of the two, so truncating at
//! `max_level` does not change distances among the kept vertices.

use alloc::collections::{BinaryHeap, VecDeque};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::symbolic::{pow, CircleRealization, GeometricOracle, Word};

/// Default cap on the number of vertices a graph may hold.
pub const DEFAULT_VERTEX_BUDGET: u64 = 1 << 22;

const UNREACHED: u32 = u32::MAX;

#[derive(Clone, Debug)]
pub struct TileGraph {
    degree: u32,
    max_level: u32,
    offsets: Vec<usize>,
    adjacency: Vec<Vec<u32>>,
}

/// A value in `½·Z`, stored as its double.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HalfInteger(pub i64);

impl HalfInteger {
    pub fn from_twice(twice: i64) -> HalfInteger {
        HalfInteger(twice)
    }

    pub fn twice(self) -> i64 {
        self.0
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / 2.0
    }

    pub fn to_ratio(self) -> Ratio<i64> {
        Ratio::new(self.0, 2)
    }
}

impl fmt::Display for HalfInteger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

pub fn vertex_count(degree: u32, max_level: u32) -> u64 {
    (0..=max_level).map(|n| pow(degree, n)).sum()
}

/// Builds the level-`≤ max_level` tile graph, refusing more than `budget` vertices.
pub fn build_graph(realization: &CircleRealization, max_level: u32, budget: u64) -> Result<TileGraph> {
    let degree = realization.degree();
    let deepest = realization.max_level();
    if max_level > deepest {
        return Err(Error::LevelTooDeep {
            level: max_level,
            max: deepest,
        });
    }
    let requested = vertex_count(degree, max_level);
    if requested > budget {
        return Err(Error::Budget { requested, budget });
    }
    let mut offsets = Vec::with_capacity(max_level as usize + 2);
    let mut total = 0usize;
    for n in 0..=max_level {
        offsets.push(total);
        total += pow(degree, n) as usize;
    }
    offsets.push(total);
    let mut graph = TileGraph {
        degree,
        max_level,
        offsets,
        adjacency: vec![Vec::new(); total],
    };
    for n in 0..=max_level {
        let size = pow(degree, n) as i128;
        for i in 0..size {
            let u = Word::new(degree, n, i as u64)?;
            let uid = graph.id_unchecked(&u);
            if n > 0 {
                for step in [-1i128, 1] {
                    let v = Word::wrapped(degree, n, i + step)?;
                    if v != u && realization.tiles_intersect(&u, &v) {
                        let vid = graph.id_unchecked(&v);
                        graph.adjacency[uid].push(vid as u32);
                    }
                }
            }
            if n < max_level {
                let lo = i * degree as i128 - 1;
                let hi = i * degree as i128 + degree as i128;
                for j in lo..=hi {
                    let v = Word::wrapped(degree, n + 1, j)?;
                    if realization.tiles_intersect(&u, &v) {
                        let vid = graph.id_unchecked(&v);
                        graph.adjacency[uid].push(vid as u32);
                        graph.adjacency[vid].push(uid as u32);
                    }
                }
            }
        }
    }
    for list in graph.adjacency.iter_mut() {
        list.sort_unstable();
        list.dedup();
    }
    Ok(graph)
}

impl TileGraph {
    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn max_level(&self) -> u32 {
        self.max_level
    }

    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn contains(&self, u: &Word) -> bool {
        u.degree() == self.degree && u.level() <= self.max_level
    }

    fn id_unchecked(&self, u: &Word) -> usize {
        self.offsets[u.level() as usize] + u.index() as usize
    }

    pub fn id(&self, u: &Word) -> Result<usize> {
        if self.contains(u) {
            Ok(self.id_unchecked(u))
        } else {
            Err(Error::NotInGraph(*u))
        }
    }

    pub fn word(&self, id: usize) -> Word {
        let level = self.offsets.partition_point(|&o| o <= id) - 1;
        Word::new(self.degree, level as u32, (id - self.offsets[level]) as u64)
            .expect("id within graph")
    }

    pub fn vertices(&self) -> impl Iterator<Item = Word> + '_ {
        (0..self.len()).map(|id| self.word(id))
    }

    pub fn level_vertices(&self, level: u32) -> impl Iterator<Item = Word> + '_ {
        let range = if level <= self.max_level {
            self.offsets[level as usize]..self.offsets[level as usize + 1]
        } else {
            0..0
        };
        range.map(|id| self.word(id))
    }

    pub fn neighbors(&self, u: &Word) -> Result<Vec<Word>> {
        let id = self.id(u)?;
        Ok(self.adjacency[id].iter().map(|&v| self.word(v as usize)).collect())
    }

    pub fn adjacent(&self, u: &Word, v: &Word) -> Result<bool> {
        let (a, b) = (self.id(u)?, self.id(v)?);
        Ok(self.adjacency[a].binary_search(&(b as u32)).is_ok())
    }

    /// Every undirected edge once, as `(smaller, larger)` in word order, sorted.
    pub fn edges(&self) -> Vec<(Word, Word)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for (a, list) in self.adjacency.iter().enumerate() {
            for &b in list {
                if (b as usize) > a {
                    out.push((self.word(a), self.word(b as usize)));
                }
            }
        }
        out.sort();
        out
    }

    /// BFS distances from `source` to every vertex; unreachable entries are `u32::MAX`.
    pub fn distances_from(&self, source: &Word) -> Result<Vec<u32>> {
        let start = self.id(source)?;
        let mut dist = vec![UNREACHED; self.len()];
        let mut queue = VecDeque::new();
        dist[start] = 0;
        queue.push_back(start);
        while let Some(a) = queue.pop_front() {
            let next = dist[a] + 1;
            for &b in &self.adjacency[a] {
                if dist[b as usize] == UNREACHED {
                    dist[b as usize] = next;
                    queue.push_back(b as usize);
                }
            }
        }
        Ok(dist)
    }

    pub fn distance(&self, u: &Word, v: &Word) -> Result<u32> {
        let target = self.id(v)?;
        let dist = self.distances_from(u)?;
        match dist[target] {
            UNREACHED => Err(Error::Disconnected(*u, *v)),
            d => Ok(d),
        }
    }

    /// `⟨u,v⟩_o = (|u| + |v| − d(u,v)) / 2`.
    pub fn gromov_product(&self, u: &Word, v: &Word) -> Result<HalfInteger> {
        let d = self.distance(u, v)? as i64;
        Ok(HalfInteger(u.level() as i64 + v.level() as i64 - d))
    }

    /// Shortest path length with edge weight `e^{-a·max(|x|, |y|)}`.
    pub fn floyd_distance(&self, u: &Word, v: &Word, a: f64) -> Result<f64> {
        let start = self.id(u)?;
        let target = self.id(v)?;
        let weights: Vec<f64> = (0..=self.max_level).map(|n| libm::exp(-a * n as f64)).collect();
        let mut dist = vec![f64::INFINITY; self.len()];
        let mut heap = BinaryHeap::new();
        dist[start] = 0.0;
        heap.push(HeapEntry(0.0, start));
        while let Some(HeapEntry(d, x)) = heap.pop() {
            if x == target {
                return Ok(d);
            }
            if d > dist[x] {
                continue;
            }
            let lx = self.level_of_id(x);
            for &y in &self.adjacency[x] {
                let y = y as usize;
                let w = weights[lx.max(self.level_of_id(y)) as usize];
                let nd = d + w;
                if nd < dist[y] {
                    dist[y] = nd;
                    heap.push(HeapEntry(nd, y));
                }
            }
        }
        Err(Error::Disconnected(*u, *v))
    }

    fn level_of_id(&self, id: usize) -> u32 {
        (self.offsets.partition_point(|&o| o <= id) - 1) as u32
    }

    /// `W(u)`: the same-level vertices whose tiles meet `A_u`, including `u`.
    pub fn flower(&self, u: &Word) -> Result<Vec<Word>> {
        let mut out: Vec<Word> = self
            .neighbors(u)?
            .into_iter()
            .filter(|v| v.level() == u.level())
            .collect();
        out.push(*u);
        out.sort();
        Ok(out)
    }

    /// Four-point defect at the base point `o` over vertices of level `≤ level_cutoff`.
    ///
    /// Exhaustive when the number of ordered triples is at most `budget`,
    /// otherwise `budget` triples drawn with a seeded generator.
    pub fn hyperbolicity_delta(&self, level_cutoff: u32, budget: u64, seed: u64) -> Result<HyperbolicityReport> {
        if level_cutoff > self.max_level {
            return Err(Error::InsufficientDepth {
                needed: level_cutoff,
                available: self.max_level,
            });
        }
        let n = self.offsets[level_cutoff as usize + 1];
        let products = self.gromov_matrix(n)?;
        let at = |i: usize, j: usize| products[i * n + j];
        let mut best = Defect {
            twice: 0,
            witness: (0, 0, 0),
        };
        let mut consider = |x: usize, y: usize, z: usize| {
            let defect = at(x, z).min(at(z, y)) - at(x, y);
            if defect > best.twice {
                best = Defect {
                    twice: defect,
                    witness: (x, y, z),
                };
            }
        };
        let total = (n as u64).saturating_pow(3);
        let exhaustive = total <= budget;
        let examined = if exhaustive {
            for x in 0..n {
                for y in 0..n {
                    for z in 0..n {
                        consider(x, y, z);
                    }
                }
            }
            total
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..budget {
                consider(rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n));
            }
            budget
        };
        let (x, y, z) = best.witness;
        Ok(HyperbolicityReport {
            truncation_level: level_cutoff,
            delta: HalfInteger(best.twice as i64),
            witness: [self.word(x), self.word(y), self.word(z)],
            triples_examined: examined,
            exhaustive,
        })
    }

    /// Doubled Gromov products among the first `n` vertices (row-major).
    fn gromov_matrix(&self, n: usize) -> Result<Vec<i32>> {
        let mut out = vec![0i32; n * n];
        for a in 0..n {
            let dist = self.distances_from(&self.word(a))?;
            let la = self.level_of_id(a) as i32;
            for b in 0..n {
                if dist[b] == UNREACHED {
                    return Err(Error::Disconnected(self.word(a), self.word(b)));
                }
                out[a * n + b] = la + self.level_of_id(b) as i32 - dist[b] as i32;
            }
        }
        Ok(out)
    }

    /// Ratio `diam(A_u ∪ A_v) · e^{a⟨u,v⟩_o}` over all pairs with `1 ≤ |u|, |v| ≤ level`.
    pub fn diameter_comparability(&self, level: u32) -> Result<ComparabilityReport> {
        if level > self.max_level || level == 0 {
            return Err(Error::InsufficientDepth {
                needed: level.max(1),
                available: self.max_level,
            });
        }
        let start = self.offsets[1];
        let end = self.offsets[level as usize + 1];
        let n = end;
        let products = self.gromov_matrix(n)?;
        let d = self.degree as f64;
        let mut report = ComparabilityReport {
            level,
            pairs: 0,
            max_ratio: f64::NEG_INFINITY,
            min_ratio: f64::INFINITY,
            argmax: (Word::root(self.degree), Word::root(self.degree)),
            argmin: (Word::root(self.degree), Word::root(self.degree)),
        };
        for a in start..end {
            let u = self.word(a);
            for b in a..end {
                let v = self.word(b);
                let diam = union_diameter(&u, &v);
                let ratio = diam * libm::pow(d, products[a * n + b] as f64 / 2.0);
                report.pairs += 1;
                if ratio > report.max_ratio {
                    report.max_ratio = ratio;
                    report.argmax = (u, v);
                }
                if ratio < report.min_ratio {
                    report.min_ratio = ratio;
                    report.argmin = (u, v);
                }
            }
        }
        Ok(report)
    }
}

struct Defect {
    twice: i32,
    witness: (usize, usize, usize),
}

#[derive(Clone, Copy, PartialEq)]
struct HeapEntry(f64, usize);

impl Eq for HeapEntry {}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .0
            .partial_cmp(&self.0)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.1.cmp(&self.1))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HyperbolicityReport {
    pub truncation_level: u32,
    pub delta: HalfInteger,
    /// `(x, y, z)` attaining the defect.
    pub witness: [Word; 3],
    pub triples_examined: u64,
    pub exhaustive: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComparabilityReport {
    pub level: u32,
    pub pairs: u64,
    pub max_ratio: f64,
    pub min_ratio: f64,
    pub argmax: (Word, Word),
    pub argmin: (Word, Word),
}

impl ComparabilityReport {
    /// Smallest `C` with `C^{-1} ≤ ratio ≤ C` for every pair.
    pub fn constant(&self) -> f64 {
        self.max_ratio.max(1.0 / self.min_ratio)
    }
}

/// Exact diameter of `A_u ∪ A_v` in the arc-length metric of `R/Z`.
pub fn union_diameter_exact(u: &Word, v: &Word) -> Ratio<u64> {
    let level = u.level().max(v.level());
    let modulus = pow(u.degree(), level);
    let (a, b) = (u.tile(), v.tile());
    let half = Ratio::new(1, 2);
    if a.is_whole_circle() || b.is_whole_circle() {
        return half;
    }
    let m = modulus as u128;
    let (sa, la) = a.scaled(level);
    let (sb, lb) = b.scaled(level);
    // The shortest covering arc starts at the start of one of the two arcs.
    let from_a = la.max((sb + m - sa) % m + lb);
    let from_b = lb.max((sa + m - sb) % m + la);
    let covered = from_a.min(from_b).min(m);
    let length = Ratio::new(covered as u64, modulus);
    if length > half {
        half
    } else {
        length
    }
}

fn union_diameter(u: &Word, v: &Word) -> f64 {
    let r = union_diameter_exact(u, v);
    *r.numer() as f64 / *r.denom() as f64
}

/// Checks `B(m, r_in) ⊆ A_u ⊆ B(m, r_out)` at the tile midpoint `m` with
/// `r_in = d^{-|u|}/c0` and `r_out = c0·d^{-|u|}`, exactly.
pub fn quasi_round(u: &Word, c0: Ratio<u64>) -> bool {
    let scale = Ratio::new(1, pow(u.degree(), u.level()));
    let half_length = scale / 2;
    let inner = scale / c0;
    let outer = scale * c0;
    let half_circle = Ratio::new(1, 2);
    if u.is_root() {
        // Every ball of radius ≥ 1/2 is the whole circle.
        return outer >= half_circle;
    }
    inner <= half_length && outer >= half_length
}
