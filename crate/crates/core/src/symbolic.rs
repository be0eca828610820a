//! Words of the full shift on `d` symbols and their circle tiles.
//!
//! A [`Word`] `u_1…u_n` names the closed arc `[i/d^n, (i+1)/d^n]` of the circle
//! `R/Z`, where `u_1…u_n` are the base-`d` digits of `i` (most significant
//! first). The empty word is the root `o` and names the whole circle. Tile
//! arithmetic is done on integers over the common denominator `d^n`, so
//! adjacency decisions never touch floating point.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_rational::Ratio;

use crate::error::{Error, Result};

const MAX_DEGREE: u32 = 36;
const DIGITS: &[u8; 36] = b"0123456789abcdefghijklmnopqrstuvwxyz";

/// Deepest level whose index range `d^level` still leaves two bits of headroom in a `u64`.
pub fn max_level_for(degree: u32) -> u32 {
    let mut level = 0;
    let mut size: u64 = 1;
    while let Some(next) = size.checked_mul(degree as u64) {
        if next > 1 << 62 {
            break;
        }
        size = next;
        level += 1;
    }
    level
}

pub(crate) fn pow(degree: u32, level: u32) -> u64 {
    (degree as u64).pow(level)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol(pub u8);

impl Symbol {
    pub fn index(self) -> u32 {
        self.0 as u32
    }
}

/// A vertex of the tile graph.
///
/// Ordering is by level, then by tile index, which is also the lexicographic
/// order of the symbol strings within a level.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    level: u32,
    index: u64,
    degree: u32,
}

impl Word {
    pub fn root(degree: u32) -> Word {
        Word {
            level: 0,
            index: 0,
            degree,
        }
    }

    pub fn new(degree: u32, level: u32, index: u64) -> Result<Word> {
        check_degree(degree)?;
        let max = max_level_for(degree);
        if level > max {
            return Err(Error::LevelTooDeep { level, max });
        }
        if index >= pow(degree, level) {
            return Err(Error::IndexOutOfRange { level, index });
        }
        Ok(Word {
            level,
            index,
            degree,
        })
    }

    /// Tile `u_{i,n}` with `i` taken modulo `d^n`, as in the doubling-map notation.
    pub fn wrapped(degree: u32, level: u32, index: i128) -> Result<Word> {
        check_degree(degree)?;
        let max = max_level_for(degree);
        if level > max {
            return Err(Error::LevelTooDeep { level, max });
        }
        let size = pow(degree, level) as i128;
        Ok(Word {
            level,
            index: index.rem_euclid(size) as u64,
            degree,
        })
    }

    pub fn from_symbols(degree: u32, symbols: &[Symbol]) -> Result<Word> {
        check_degree(degree)?;
        let max = max_level_for(degree);
        if symbols.len() as u64 > max as u64 {
            return Err(Error::LevelTooDeep {
                level: symbols.len() as u32,
                max,
            });
        }
        let mut index = 0u64;
        for s in symbols {
            if s.index() >= degree {
                return Err(Error::SymbolOutOfRange {
                    symbol: s.index(),
                    degree,
                });
            }
            index = index * degree as u64 + s.0 as u64;
        }
        Ok(Word {
            level: symbols.len() as u32,
            index,
            degree,
        })
    }

    /// Parses `"o"` (or the empty string) as the root and otherwise one digit per symbol.
    pub fn parse(degree: u32, text: &str) -> Result<Word> {
        let text = text.trim();
        if text == "o" || text.is_empty() {
            check_degree(degree)?;
            return Ok(Word::root(degree));
        }
        let mut symbols = Vec::with_capacity(text.len());
        for c in text.bytes() {
            let value = DIGITS
                .iter()
                .position(|&d| d == c.to_ascii_lowercase())
                .ok_or_else(|| Error::ParseWord(String::from(text)))?;
            symbols.push(Symbol(value as u8));
        }
        Word::from_symbols(degree, &symbols)
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    pub fn is_root(&self) -> bool {
        self.level == 0
    }

    pub fn symbols(&self) -> Vec<Symbol> {
        let mut out = Vec::with_capacity(self.level as usize);
        let mut rest = self.index;
        for _ in 0..self.level {
            out.push(Symbol((rest % self.degree as u64) as u8));
            rest /= self.degree as u64;
        }
        out.reverse();
        out
    }

    /// `σ`: drops the first symbol; words of length at most one map to the root.
    pub fn shift(&self) -> Word {
        if self.level <= 1 {
            return Word::root(self.degree);
        }
        Word {
            level: self.level - 1,
            index: self.index % pow(self.degree, self.level - 1),
            degree: self.degree,
        }
    }

    pub fn shift_by(&self, times: u32) -> Word {
        if times >= self.level {
            return Word::root(self.degree);
        }
        Word {
            level: self.level - times,
            index: self.index % pow(self.degree, self.level - times),
            degree: self.degree,
        }
    }

    /// `τ`: drops the last symbol.
    pub fn parent(&self) -> Word {
        if self.level == 0 {
            return *self;
        }
        Word {
            level: self.level - 1,
            index: self.index / self.degree as u64,
            degree: self.degree,
        }
    }

    pub fn child(&self, symbol: Symbol) -> Result<Word> {
        if symbol.index() >= self.degree {
            return Err(Error::SymbolOutOfRange {
                symbol: symbol.index(),
                degree: self.degree,
            });
        }
        let max = max_level_for(self.degree);
        if self.level + 1 > max {
            return Err(Error::LevelTooDeep {
                level: self.level + 1,
                max,
            });
        }
        Ok(Word {
            level: self.level + 1,
            index: self.index * self.degree as u64 + symbol.0 as u64,
            degree: self.degree,
        })
    }

    /// Same-level tile `offset` positions around the circle.
    pub fn rotate(&self, offset: i64) -> Word {
        let size = pow(self.degree, self.level) as i128;
        Word {
            level: self.level,
            index: (self.index as i128 + offset as i128).rem_euclid(size) as u64,
            degree: self.degree,
        }
    }

    pub fn tile(&self) -> TileInterval {
        TileInterval {
            level: self.level,
            index: self.index,
            degree: self.degree,
        }
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.level == 0 {
            return f.write_str("o");
        }
        for s in self.symbols() {
            write!(f, "{}", DIGITS[s.0 as usize] as char)?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({self})")
    }
}

fn check_degree(degree: u32) -> Result<()> {
    if (2..=MAX_DEGREE).contains(&degree) {
        Ok(())
    } else {
        Err(Error::InvalidDegree(degree))
    }
}

/// Closed arc `[index/d^level, (index+1)/d^level]` of the circle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TileInterval {
    level: u32,
    index: u64,
    degree: u32,
}

impl TileInterval {
    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    pub fn denominator(&self) -> u64 {
        pow(self.degree, self.level)
    }

    pub fn lo(&self) -> Ratio<u64> {
        Ratio::new(self.index, self.denominator())
    }

    /// Upper endpoint in `(0, 1]`; `1` is the same circle point as `0`.
    pub fn hi(&self) -> Ratio<u64> {
        Ratio::new(self.index + 1, self.denominator())
    }

    /// True when the arc ends at `1 ≡ 0`.
    pub fn wraps(&self) -> bool {
        self.index + 1 == self.denominator()
    }

    pub fn is_whole_circle(&self) -> bool {
        self.level == 0
    }

    pub fn length(&self) -> Ratio<u64> {
        Ratio::new(1, self.denominator())
    }

    pub fn midpoint(&self) -> Ratio<u64> {
        Ratio::new(2 * self.index + 1, 2 * self.denominator())
    }

    /// `(start, length)` in units of `d^-level`, with `level ≥ self.level`.
    pub(crate) fn scaled(&self, level: u32) -> (u128, u128) {
        let factor = pow(self.degree, level - self.level) as u128;
        (self.index as u128 * factor, factor)
    }

    /// Closed-arc intersection on the circle.
    pub fn intersects(&self, other: &TileInterval) -> bool {
        if self.level == 0 || other.level == 0 {
            return true;
        }
        let level = self.level.max(other.level);
        let modulus = pow(self.degree, level) as u128;
        let (a, s) = self.scaled(level);
        let (b, t) = other.scaled(level);
        (b + modulus - a) % modulus <= s || (a + modulus - b) % modulus <= t
    }

    pub fn contains(&self, other: &TileInterval) -> bool {
        if self.level > other.level {
            return false;
        }
        let (a, s) = self.scaled(other.level);
        let b = other.index as u128;
        b >= a && b < a + s
    }
}

impl fmt::Display for TileInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo(), self.hi())
    }
}

/// Transition matrix of a one-sided subshift of finite type.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SftMatrix {
    size: usize,
    entries: Vec<bool>,
}

impl SftMatrix {
    pub fn new(size: usize, entries: Vec<bool>) -> Result<SftMatrix> {
        if entries.len() != size * size {
            return Err(Error::Precondition(alloc::format!(
                "matrix of size {size} needs {} entries, got {}",
                size * size,
                entries.len()
            )));
        }
        for row in 0..size {
            if !entries[row * size..(row + 1) * size].iter().any(|&e| e) {
                return Err(Error::EmptyRow(row));
            }
        }
        Ok(SftMatrix { size, entries })
    }

    pub fn full(size: usize) -> SftMatrix {
        SftMatrix {
            size,
            entries: alloc::vec![true; size * size],
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn allows(&self, from: Symbol, to: Symbol) -> bool {
        let (i, j) = (from.0 as usize, to.0 as usize);
        i < self.size && j < self.size && self.entries[i * self.size + j]
    }

    pub fn admits(&self, symbols: &[Symbol]) -> bool {
        symbols.iter().all(|s| (s.0 as usize) < self.size)
            && symbols.windows(2).all(|w| self.allows(w[0], w[1]))
    }

    pub fn is_full(&self) -> bool {
        self.entries.iter().all(|&e| e)
    }
}

/// Extension point for Markov partitions other than the circle.
pub trait GeometricOracle {
    fn degree(&self) -> u32;
    fn tile_of(&self, u: &Word) -> TileInterval;
    fn tiles_intersect(&self, u: &Word, v: &Word) -> bool;
}

/// The degree-`d` map `x ↦ d·x mod 1` with the partition `[k/d, (k+1)/d]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CircleRealization {
    degree: u32,
    matrix: SftMatrix,
}

impl CircleRealization {
    pub fn new(degree: u32) -> Result<CircleRealization> {
        check_degree(degree)?;
        Ok(CircleRealization {
            degree,
            matrix: SftMatrix::full(degree as usize),
        })
    }

    pub fn doubling() -> CircleRealization {
        CircleRealization {
            degree: 2,
            matrix: SftMatrix::full(2),
        }
    }

    pub fn matrix(&self) -> &SftMatrix {
        &self.matrix
    }

    /// `a = log d`.
    pub fn visual_parameter(&self) -> f64 {
        libm::log(self.degree as f64)
    }

    pub fn max_level(&self) -> u32 {
        max_level_for(self.degree)
    }

    pub fn partition(&self) -> Vec<TileInterval> {
        (0..self.degree as u64)
            .map(|k| TileInterval {
                level: 1,
                index: k,
                degree: self.degree,
            })
            .collect()
    }

    pub fn root(&self) -> Word {
        Word::root(self.degree)
    }

    pub fn word(&self, level: u32, index: u64) -> Result<Word> {
        Word::new(self.degree, level, index)
    }

    pub fn parse_word(&self, text: &str) -> Result<Word> {
        Word::parse(self.degree, text)
    }

    /// All `d^n` words of length `n` in lexicographic order.
    pub fn enumerate_level(&self, level: u32) -> Result<Vec<Word>> {
        let max = self.max_level();
        if level > max {
            return Err(Error::LevelTooDeep { level, max });
        }
        Ok((0..pow(self.degree, level))
            .map(|index| Word {
                level,
                index,
                degree: self.degree,
            })
            .collect())
    }

    pub fn level_size(&self, level: u32) -> u64 {
        pow(self.degree, level)
    }

    /// Tiles at `level` containing the rational point `p/q ∈ [0, 1)`.
    ///
    /// Returns `(left, right)`: the tile having the point in `(lo, hi]` and the
    /// one having it in `[lo, hi)`. They differ exactly at tile endpoints.
    pub fn tiles_at_point(&self, point: Ratio<u64>, level: u32) -> Result<(Word, Word)> {
        let max = self.max_level();
        if level > max {
            return Err(Error::LevelTooDeep { level, max });
        }
        let size = pow(self.degree, level) as u128;
        let (p, q) = (*point.numer() as u128 % *point.denom() as u128, *point.denom() as u128);
        let scaled = p * size;
        let floor = (scaled / q) as u64;
        let exact = scaled.is_multiple_of(q);
        let right = Word {
            level,
            index: floor,
            degree: self.degree,
        };
        let left = if exact && level > 0 {
            right.rotate(-1)
        } else {
            right
        };
        Ok((left, right))
    }

    /// Image of a tile under `x ↦ d·x mod 1`, computed from the endpoints.
    pub fn image_of_tile(&self, tile: &TileInterval) -> (Ratio<u64>, Ratio<u64>) {
        let d = Ratio::from_integer(self.degree as u64);
        let lo = tile.lo() * d;
        let hi = tile.hi() * d;
        let lo = lo - Ratio::from_integer(lo.to_integer());
        let span = hi - tile.lo() * d;
        (lo, lo + span)
    }
}

impl GeometricOracle for CircleRealization {
    fn degree(&self) -> u32 {
        self.degree
    }

    fn tile_of(&self, u: &Word) -> TileInterval {
        u.tile()
    }

    fn tiles_intersect(&self, u: &Word, v: &Word) -> bool {
        u.tile().intersects(&v.tile())
    }
}

/// Circular gap between two arcs in units of `d^-level`, zero when they meet.
#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn w(text: &str) -> Word {
        Word::parse(2, text).unwrap()
    }

    #[test]
    fn enumerate_counts_and_order() {
        let c = CircleRealization::doubling();
        assert_eq!(c.enumerate_level(0).unwrap(), vec![c.root()]);
        let two: Vec<String> = c
            .enumerate_level(2)
            .unwrap()
            .iter()
            .map(|u| alloc::format!("{u}"))
            .collect();
        assert_eq!(two, ["00", "01", "10", "11"]);
        let c3 = CircleRealization::new(3).unwrap();
        assert_eq!(c3.enumerate_level(3).unwrap().len(), 27);
    }

    #[test]
    fn tiles_of_small_words() {
        assert_eq!(w("1").tile().lo(), Ratio::new(1, 2));
        assert_eq!(w("1").tile().hi(), Ratio::new(1, 1));
        assert!(w("o").tile().is_whole_circle());
        // A_0 ∩ f^{-1}A_1: points of [0,1/2] whose double lands in [1/2,1].
        let t = w("01").tile();
        assert_eq!((t.lo(), t.hi()), (Ratio::new(1, 4), Ratio::new(2, 4)));
    }

    #[test]
    fn shift_and_parent() {
        assert_eq!(w("01").shift(), w("1"));
        assert_eq!(w("1").shift(), w("o"));
        assert_eq!(w("o").shift(), w("o"));
        assert_eq!(w("01").parent(), w("0"));
        assert_eq!(w("o").parent(), w("o"));
        assert_eq!(w("0110").shift_by(2), w("10"));
        assert_eq!(w("0110").shift_by(7), w("o"));
    }

    #[test]
    fn intersection_examples() {
        let q = |i| Word::new(2, 2, i).unwrap();
        assert!(!q(0).tile().intersects(&q(2).tile()));
        assert!(q(3).tile().intersects(&q(0).tile()));
        assert!(q(1).tile().intersects(&q(1).parent().tile()));
        assert!(w("0").tile().intersects(&w("1").tile()));
    }

    #[test]
    fn parse_errors() {
        assert!(Word::parse(2, "012").is_err());
        assert!(Word::parse(1, "0").is_err());
        assert!(Word::new(2, 3, 8).is_err());
        assert_eq!(Word::parse(3, "21").unwrap().index(), 7);
    }

    #[test]
    fn point_rays_split_at_dyadic_points() {
        let c = CircleRealization::doubling();
        let (left, right) = c.tiles_at_point(Ratio::new(1, 2), 3).unwrap();
        assert_eq!(left.index(), 3);
        assert_eq!(right.index(), 4);
        let (left, right) = c.tiles_at_point(Ratio::new(1, 3), 5).unwrap();
        assert_eq!(left, right);
        assert_eq!(left.index(), 10);
        let (left, right) = c.tiles_at_point(Ratio::new(0, 1), 2).unwrap();
        assert_eq!((left.index(), right.index()), (3, 0));
    }

    #[test]
    fn sft_matrix_rejects_empty_rows() {
        assert_eq!(
            SftMatrix::new(2, vec![true, false, false, false]),
            Err(Error::EmptyRow(1))
        );
        let m = SftMatrix::new(2, vec![true, true, true, false]).unwrap();
        assert!(m.admits(&[Symbol(0), Symbol(1), Symbol(0)]));
        assert!(!m.admits(&[Symbol(1), Symbol(1)]));
    }

    #[test]
    fn level_cap() {
        assert_eq!(max_level_for(2), 62);
        assert!(Word::new(2, 63, 0).is_err());
    }
}
