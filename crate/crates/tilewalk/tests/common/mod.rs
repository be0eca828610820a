//! Reference computations written from the definitions, sharing no code with the library.
#![allow(dead_code)]

use std::collections::{BTreeMap, VecDeque};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

pub fn q(p: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(d))
}

/// A dyadic word as `(level, index)`.
pub type Node = (u32, u64);

pub const ROOT: Node = (0, 0);

/// The doubling kernel written out by hand.
///
/// From `(n, i)`, the four targets `(n+1, j)` with `j ∈ {2i−1, …, 2i+2}` mod `2^{n+1}`;
/// `j ≡ 2 (mod 4)` gets `x`, the others `(1−x)/3`. The root sends `(1+2x)/3` to `"0"`.
pub fn doubling_row(x: &BigRational, (n, i): Node) -> Vec<(Node, BigRational)> {
    if n == 0 {
        let two = BigRational::from_integer(2.into());
        let three = BigRational::from_integer(3.into());
        return vec![
            ((1, 0), (BigRational::one() + &two * x) / &three),
            ((1, 1), (&two - &two * x) / &three),
        ];
    }
    let y = (BigRational::one() - x) / BigRational::from_integer(3.into());
    let size = 1i128 << (n + 1);
    (-1..=2)
        .map(|k| {
            let j = (2 * i as i128 + k).rem_euclid(size) as u64;
            let p = if j % 4 == 2 { x.clone() } else { y.clone() };
            ((n + 1, j), p)
        })
        .collect()
}

/// `F(source, ·)` by summing the weight of every path, one path at a time.
pub fn path_sum(x: &BigRational, source: Node, max_level: u32) -> BTreeMap<Node, BigRational> {
    fn walk(x: &BigRational, at: Node, weight: BigRational, max_level: u32, out: &mut BTreeMap<Node, BigRational>) {
        *out.entry(at).or_insert_with(BigRational::zero) += &weight;
        if at.0 == max_level {
            return;
        }
        for (t, p) in doubling_row(x, at) {
            walk(x, t, &weight * p, max_level, out);
        }
    }
    let mut out = BTreeMap::new();
    walk(x, source, BigRational::one(), max_level, &mut out);
    out
}

/// `F(o, ·)` at one level from the previous one, through the two predecessors of each word.
pub fn level_induction(x: &BigRational, max_level: u32) -> Vec<Vec<BigRational>> {
    let mut levels = vec![vec![BigRational::one()]];
    for n in 0..max_level {
        let mut next = vec![BigRational::zero(); 1 << (n + 1)];
        for (i, f) in levels[n as usize].iter().enumerate() {
            for ((_, j), p) in doubling_row(x, (n, i as u64)) {
                next[j as usize] += f * p;
            }
        }
        levels.push(next);
    }
    levels
}

/// Probability of a finite path under the hand-written kernel.
pub fn path_probability(x: &BigRational, path: &[Node]) -> BigRational {
    let mut p = BigRational::one();
    for pair in path.windows(2) {
        let row = doubling_row(x, pair[0]);
        match row.iter().find(|(t, _)| *t == pair[1]) {
            Some((_, w)) => p *= w,
            None => return BigRational::zero(),
        }
    }
    p
}

/// All paths of `steps` steps from the root with their probabilities.
pub fn all_paths(x: &BigRational, steps: u32) -> Vec<(Vec<Node>, BigRational)> {
    let mut paths = vec![(vec![ROOT], BigRational::one())];
    for _ in 0..steps {
        let mut next = Vec::with_capacity(paths.len() * 4);
        for (path, p) in paths {
            for (t, w) in doubling_row(x, *path.last().unwrap()) {
                let mut longer = path.clone();
                longer.push(t);
                next.push((longer, &p * w));
            }
        }
        paths = next;
    }
    paths
}

/// Drops the first `k` symbols of a word.
pub fn shift(node: Node, k: u32) -> Node {
    let (n, i) = node;
    assert!(k <= n);
    (n - k, i & ((1u64 << (n - k)) - 1))
}

/// Every word reachable from `u` with positive probability, down to `depth`.
pub fn shadow(x: &BigRational, u: Node, depth: u32) -> Vec<Node> {
    let mut seen = std::collections::BTreeSet::new();
    let mut stack = vec![u];
    while let Some(v) = stack.pop() {
        if !seen.insert(v) || v.0 == depth {
            continue;
        }
        for (t, p) in doubling_row(x, v) {
            if !p.is_zero() {
                stack.push(t);
            }
        }
    }
    seen.into_iter().collect()
}

/// Largest distance from the arc `A_u` to a point of the tile `w`, doubled and
/// in units of `2^{-depth}`, exactly.
pub fn doubled_excursion(u: Node, w: Node, depth: u32) -> u128 {
    let m = 1u128 << depth;
    let arc = |(n, i): Node| -> (u128, u128) {
        let unit = 1u128 << (depth - n);
        (i as u128 * unit * 2, unit * 2)
    };
    if u.0 == 0 {
        return 0;
    }
    let circle = 2 * m;
    let (s, len) = arc(u);
    let (a, wlen) = arc(w);
    // Circular distance in doubled units from a point to the arc [s, s + len].
    let dist = |p: u128| -> u128 {
        let off = (p + circle - s) % circle;
        if off <= len {
            0
        } else {
            (off - len).min(circle - off)
        }
    };
    let mut worst = dist(a).max(dist((a + wlen) % circle));
    let antipode = (s + len / 2 + m) % circle;
    let into = (antipode + circle - a) % circle;
    if into <= wlen {
        worst = worst.max(dist(antipode));
    }
    worst
}

/// Whether the closed dyadic tiles of two words meet on the circle.
pub fn tiles_meet(a: Node, b: Node) -> bool {
    if a.0 == 0 || b.0 == 0 {
        return true;
    }
    let level = a.0.max(b.0);
    let m = 1i128 << level;
    let scaled = |(n, i): Node| -> (i128, i128) {
        let unit = 1i128 << (level - n);
        (i as i128 * unit, unit)
    };
    let (sa, la) = scaled(a);
    let (sb, lb) = scaled(b);
    // Closed arcs [sa, sa+la] and [sb, sb+lb] meet iff the start of one lies in the other.
    let inside = |p: i128, s: i128, l: i128| (p - s).rem_euclid(m) <= l;
    inside(sb, sa, la) || inside(sa, sb, lb)
}

/// The truncated tile graph as adjacency lists over `(level, index)` in level order.
pub struct Graph {
    pub nodes: Vec<Node>,
    pub adjacency: Vec<Vec<usize>>,
}

impl Graph {
    pub fn new(max_level: u32) -> Graph {
        let nodes: Vec<Node> = (0..=max_level).flat_map(|n| (0..1u64 << n).map(move |i| (n, i))).collect();
        let mut adjacency = vec![Vec::new(); nodes.len()];
        for (a, &u) in nodes.iter().enumerate() {
            for (b, &v) in nodes.iter().enumerate().skip(a + 1) {
                if u.0.abs_diff(v.0) <= 1 && tiles_meet(u, v) {
                    adjacency[a].push(b);
                    adjacency[b].push(a);
                }
            }
        }
        Graph { nodes, adjacency }
    }

    pub fn distances(&self, from: usize) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.nodes.len()];
        dist[from] = 0;
        let mut queue = VecDeque::from([from]);
        while let Some(a) = queue.pop_front() {
            for &b in &self.adjacency[a] {
                if dist[b] == u32::MAX {
                    dist[b] = dist[a] + 1;
                    queue.push_back(b);
                }
            }
        }
        dist
    }

    /// Doubled Gromov products `2⟨a,b⟩_o`.
    pub fn doubled_products(&self) -> Vec<Vec<i64>> {
        (0..self.nodes.len())
            .map(|a| {
                let d = self.distances(a);
                (0..self.nodes.len())
                    .map(|b| self.nodes[a].0 as i64 + self.nodes[b].0 as i64 - d[b] as i64)
                    .collect()
            })
            .collect()
    }

    /// Twice the four-point defect at the root, by brute force over all triples.
    pub fn doubled_delta(&self) -> i64 {
        let g = self.doubled_products();
        let mut best = 0;
        for gx in &g {
            for (y, &xy) in gx.iter().enumerate() {
                for (xz, gz) in gx.iter().zip(&g) {
                    best = best.max((*xz).min(gz[y]) - xy);
                }
            }
        }
        best
    }
}

/// Diameter of `A_a ∪ A_b` in the arc-length metric of the unit circle.
///
/// It is `1/2` when the union holds an antipodal pair; otherwise the distance
/// is linear on each pair of arcs and peaks at a pair of endpoints.
pub fn union_diameter(a: Node, b: Node) -> f64 {
    if a.0 == 0 || b.0 == 0 {
        return 0.5;
    }
    // Doubled units of 2^{-level}, so the antipodal shift is an integer.
    let level = a.0.max(b.0);
    let circle = 2i128 << level;
    let arc = |(n, i): Node| {
        let unit = 2i128 << (level - n);
        (i as i128 * unit, unit)
    };
    let arcs = [arc(a), arc(b)];
    let meets = |(s1, l1): (i128, i128), (s2, l2): (i128, i128)| {
        (s2 - s1).rem_euclid(circle) <= l1 || (s1 - s2).rem_euclid(circle) <= l2
    };
    for &first in &arcs {
        for &second in &arcs {
            if meets((first.0 + circle / 2, first.1), second) {
                return 0.5;
            }
        }
    }
    let ends: Vec<i128> = arcs.iter().flat_map(|&(s, l)| [s, s + l]).collect();
    let mut best = 0;
    for &p in &ends {
        for &q in &ends {
            let gap = (p - q).rem_euclid(circle);
            best = best.max(gap.min(circle - gap));
        }
    }
    best as f64 / circle as f64
}
