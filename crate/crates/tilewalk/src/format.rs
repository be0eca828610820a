//! Number formatting and artifact files.
//!
//! Every artifact starts with one `#` header line naming the tool version,
//! the SHA-256 of the scenario document and the seed, followed by a CSV
//! column line and the rows. Reals carry 12 significant digits, rounded
//! half to even; rationals are written exactly as `p/q`.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use sha2::{Digest, Sha256};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

const SIGNIFICANT: usize = 12;

/// A real with 12 significant digits, round-half-even.
///
/// Positional notation for magnitudes in `[1e-6, 1e15)`, scientific otherwise;
/// trailing zeros of the fraction are dropped.
pub fn real(value: f64) -> String {
    if value.is_nan() {
        return "nan".into();
    }
    if value.is_infinite() {
        return if value > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if value == 0.0 {
        return "0".into();
    }
    // `{:e}` with a precision rounds the exact binary value half to even.
    let sci = format!("{:.*e}", SIGNIFICANT - 1, value);
    let (mantissa, exponent) = sci.split_once('e').expect("scientific form");
    let exponent: i32 = exponent.parse().expect("integer exponent");
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    let sign = if negative { "-" } else { "" };
    if !(-6..15).contains(&exponent) {
        let (head, tail) = digits.split_at(1);
        let tail = tail.trim_end_matches('0');
        return if tail.is_empty() {
            format!("{sign}{head}e{exponent}")
        } else {
            format!("{sign}{head}.{tail}e{exponent}")
        };
    }
    let point = exponent + 1;
    let (int_part, frac_part) = if point <= 0 {
        ("0".to_string(), format!("{}{}", "0".repeat((-point) as usize), digits))
    } else if point as usize >= digits.len() {
        (format!("{}{}", digits, "0".repeat(point as usize - digits.len())), String::new())
    } else {
        let (a, b) = digits.split_at(point as usize);
        (a.to_string(), b.to_string())
    };
    let frac_part = frac_part.trim_end_matches('0');
    if frac_part.is_empty() {
        format!("{sign}{int_part}")
    } else {
        format!("{sign}{int_part}.{frac_part}")
    }
}

/// `p/q` in lowest terms, always with a denominator.
pub fn rational(value: &BigRational) -> String {
    format!("{}/{}", value.numer(), value.denom())
}

pub fn ratio_u64(value: &Ratio<u64>) -> String {
    format!("{}/{}", value.numer(), value.denom())
}

/// Numerator and denominator as separate CSV fields.
pub fn rational_fields(value: &BigRational) -> (BigInt, BigInt) {
    (value.numer().clone(), value.denom().clone())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Provenance recorded at the top of every artifact.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Header {
    pub scenario_hash: String,
    pub seed: u64,
}

impl Header {
    pub fn line(&self) -> String {
        format!("# tilewalk {VERSION} scenario={} seed={}", self.scenario_hash, self.seed)
    }
}

/// A CSV document with a fixed column order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&'static str]) -> Table {
        Table {
            name: name.to_string(),
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push<I, S>(&mut self, row: I)
    where
        I: IntoIterator<Item = S>,
        S: ToString,
    {
        let row: Vec<String> = row.into_iter().map(|c| c.to_string()).collect();
        debug_assert_eq!(row.len(), self.columns.len(), "row width in {}", self.name);
        self.rows.push(row);
    }

    pub fn render(&self, header: &Header) -> String {
        let mut out = String::new();
        out.push_str(&header.line());
        out.push('\n');
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn write(&self, dir: &Path, header: &Header) -> io::Result<PathBuf> {
        fs::create_dir_all(dir)?;
        let path = dir.join(&self.name);
        fs::write(&path, self.render(header))?;
        Ok(path)
    }
}

/// Parses a CSV artifact back into its header, columns and rows.
pub fn parse_table(text: &str) -> Option<(String, Vec<String>, Vec<Vec<String>>)> {
    let mut lines = text.lines();
    let header = lines.next()?.to_string();
    let columns = lines.next()?.split(',').map(str::to_string).collect();
    let rows = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
    Some((header, columns, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals() {
        assert_eq!(real(std::f64::consts::LN_2), "0.69314718056");
        assert_eq!(real(1.0), "1");
        assert_eq!(real(-2.5), "-2.5");
        assert_eq!(real(0.0), "0");
        assert_eq!(real(1234.5), "1234.5");
        assert_eq!(real(1.0 / 3.0), "0.333333333333");
        assert_eq!(real(1e-9), "1e-9");
        assert_eq!(real(2.5e-7), "2.5e-7");
        assert_eq!(real(6.02214076e23), "6.02214076e23");
        assert_eq!(real(0.000123), "0.000123");
        assert_eq!(real(f64::NAN), "nan");
    }

    #[test]
    fn ties_go_to_even() {
        // Both values are exact in binary and sit halfway at the 12th digit.
        assert_eq!(real(100000000000.5), "100000000000");
        assert_eq!(real(100000000001.5), "100000000002");
        assert_eq!(real(-100000000003.5), "-100000000004");
    }

    #[test]
    fn rationals() {
        let r = BigRational::new(BigInt::from(6), BigInt::from(4));
        assert_eq!(rational(&r), "3/2");
        assert_eq!(rational(&BigRational::from_integer(BigInt::from(2))), "2/1");
        assert_eq!(ratio_u64(&Ratio::new(2, 8)), "1/4");
    }

    #[test]
    fn tables_round_trip() {
        let header = Header {
            scenario_hash: sha256_hex(b"abc"),
            seed: 9,
        };
        assert!(header.line().ends_with(
            "scenario=ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad seed=9"
        ));
        let mut t = Table::new("x.csv", &["a", "b"]);
        t.push(["1", "2"]);
        t.push([3, 4]);
        let (h, cols, rows) = parse_table(&t.render(&header)).unwrap();
        assert_eq!(h, header.line());
        assert_eq!(cols, ["a", "b"]);
        assert_eq!(rows[1], ["3", "4"]);
    }
}
