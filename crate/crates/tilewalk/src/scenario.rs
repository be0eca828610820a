//! Scenario documents.
//!
//! A scenario is a TOML document written with dotted keys:
//!
//! ```toml
//! system.degree = 2
//! kernel.family = "doubling_px"
//! kernel.x = "1/4"
//! run.n_paths = 10000
//! run.targets = ["1/2"]
//! ```
//!
//! Validation is strict: unknown keys are rejected and every problem is
//! reported with its key path, not just the first one.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{One, ToPrimitive, Zero};
use tilewalk_core::{
    max_level_for, parse_rational, CircleRealization, Kernel, KernelSpec, KernelTable, Word,
};
use toml::{Table, Value};

use crate::format::sha256_hex;

/// One schema problem, located by its dotted key path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchemaError {
    pub path: String,
    pub message: String,
}

impl fmt::Display for SchemaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

/// Every problem found in a document.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchemaErrors(pub Vec<SchemaError>);

impl fmt::Display for SchemaErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for SchemaErrors {}

impl SchemaErrors {
    pub fn paths(&self) -> Vec<&str> {
        self.0.iter().map(|e| e.path.as_str()).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunConfig {
    pub max_level: u32,
    pub n_paths: u64,
    pub n_steps: u32,
    pub seed: u64,
    pub bin_level: u32,
    pub window_level: u32,
    pub targets: Vec<Ratio<u64>>,
    pub x_grid: Vec<BigRational>,
    pub trace_level: u32,
    pub margin: u32,
    pub quadruples: u64,
    pub n_points: usize,
}

impl Default for RunConfig {
    fn default() -> RunConfig {
        RunConfig {
            max_level: 8,
            n_paths: 10_000,
            n_steps: 50,
            seed: 1,
            bin_level: 10,
            window_level: 2,
            targets: vec![Ratio::new(1, 2)],
            x_grid: (1..=9).map(|k| BigRational::new(BigInt::from(k), BigInt::from(10))).collect(),
            trace_level: 25,
            margin: 10,
            quadruples: 1000,
            n_points: 200,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scenario {
    pub degree: u32,
    pub kernel: KernelSpec,
    pub run: RunConfig,
    /// SHA-256 of the document text.
    pub hash: String,
}

impl Scenario {
    pub fn realization(&self) -> CircleRealization {
        CircleRealization::new(self.degree).expect("degree validated")
    }

    pub fn build_kernel(&self) -> tilewalk_core::Result<Kernel> {
        self.kernel.build()
    }

    /// The doubling parameter, when the kernel is the built-in family.
    pub fn doubling_x(&self) -> Option<&BigRational> {
        match &self.kernel {
            KernelSpec::Doubling { x } => Some(x),
            KernelSpec::Table(_) => None,
        }
    }

    /// A default doubling scenario at parameter `x`, hashed from its canonical text.
    pub fn doubling(x: &BigRational) -> Scenario {
        let text = format!(
            "system.degree = 2\nkernel.family = \"doubling_px\"\nkernel.x = \"{}/{}\"\n",
            x.numer(),
            x.denom()
        );
        parse_scenario(&text, Path::new(".")).expect("canonical doubling scenario")
    }
}

/// Reads and validates a scenario file; table paths resolve against its directory.
pub fn load_scenario(path: &Path) -> Result<Scenario, SchemaErrors> {
    let text = fs::read_to_string(path).map_err(|e| {
        SchemaErrors(vec![SchemaError {
            path: path.display().to_string(),
            message: format!("cannot read scenario: {e}"),
        }])
    })?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_scenario(&text, &base)
}

const SECTIONS: [&str; 3] = ["system", "kernel", "run"];
const SYSTEM_KEYS: [&str; 1] = ["degree"];
const KERNEL_KEYS: [&str; 4] = ["family", "x", "table", "base_level"];
const RUN_KEYS: [&str; 12] = [
    "max_level",
    "n_paths",
    "n_steps",
    "seed",
    "bin_level",
    "window_level",
    "targets",
    "x_grid",
    "trace_level",
    "margin",
    "quadruples",
    "n_points",
];

#[derive(Default)]
struct Collector(Vec<SchemaError>);

impl Collector {
    fn push(&mut self, path: &str, message: impl Into<String>) {
        self.0.push(SchemaError {
            path: path.to_string(),
            message: message.into(),
        });
    }

    fn section<'t>(&mut self, root: &'t Table, name: &str, required: bool) -> Option<&'t Table> {
        match root.get(name) {
            Some(Value::Table(t)) => Some(t),
            Some(_) => {
                self.push(name, "expected a section of dotted keys");
                None
            }
            None => {
                if required {
                    self.push(name, "missing required section");
                }
                None
            }
        }
    }

    fn unknown_keys(&mut self, table: &Table, prefix: &str, known: &[&str]) {
        for key in table.keys() {
            if !known.contains(&key.as_str()) {
                let path = if prefix.is_empty() { key.clone() } else { format!("{prefix}.{key}") };
                self.push(&path, "unknown key");
            }
        }
    }

    fn integer(&mut self, table: Option<&Table>, prefix: &str, key: &str, min: u64, max: u64) -> Option<u64> {
        let path = format!("{prefix}.{key}");
        match table?.get(key)? {
            Value::Integer(v) if *v >= 0 && (min..=max).contains(&(*v as u64)) => Some(*v as u64),
            Value::Integer(v) => {
                self.push(&path, format!("{v} is outside {min}..={max}"));
                None
            }
            other => {
                self.push(&path, format!("expected an integer, found {}", other.type_str()));
                None
            }
        }
    }

    fn string<'t>(&mut self, table: Option<&'t Table>, prefix: &str, key: &str) -> Option<&'t str> {
        match table?.get(key)? {
            Value::String(s) => Some(s),
            other => {
                self.push(&format!("{prefix}.{key}"), format!("expected a string, found {}", other.type_str()));
                None
            }
        }
    }

    fn rational(&mut self, path: &str, value: &Value) -> Option<BigRational> {
        match value {
            Value::String(s) => match parse_rational(s) {
                Ok(r) => Some(r),
                Err(_) => {
                    self.push(path, format!("{s:?} is not a rational \"p/q\""));
                    None
                }
            },
            other => {
                self.push(path, format!("expected a quoted rational \"p/q\", found {}", other.type_str()));
                None
            }
        }
    }

    fn rational_list(&mut self, table: Option<&Table>, key: &str) -> Option<Vec<BigRational>> {
        let path = format!("run.{key}");
        match table?.get(key)? {
            Value::Array(items) => {
                let before = self.0.len();
                let out: Vec<BigRational> = items
                    .iter()
                    .enumerate()
                    .filter_map(|(i, v)| self.rational(&format!("{path}[{i}]"), v))
                    .collect();
                (self.0.len() == before).then_some(out)
            }
            other => {
                self.push(&path, format!("expected an array, found {}", other.type_str()));
                None
            }
        }
    }
}

fn in_unit_interval(r: &BigRational, closed_left: bool) -> bool {
    let lower = if closed_left { !(r < &BigRational::zero()) } else { r > &BigRational::zero() };
    lower && r < &BigRational::one()
}

/// Parses and validates a scenario document.
///
/// `base_dir` is where relative table paths are resolved.
pub fn parse_scenario(text: &str, base_dir: &Path) -> Result<Scenario, SchemaErrors> {
    let root: Table = match text.parse() {
        Ok(t) => t,
        Err(e) => {
            return Err(SchemaErrors(vec![SchemaError {
                path: "<document>".into(),
                message: e.message().to_string(),
            }]))
        }
    };
    let mut c = Collector::default();
    c.unknown_keys(&root, "", &SECTIONS);
    let system = c.section(&root, "system", true);
    let kernel = c.section(&root, "kernel", true);
    let run = c.section(&root, "run", false);
    if let Some(t) = system {
        c.unknown_keys(t, "system", &SYSTEM_KEYS);
    }
    if let Some(t) = kernel {
        c.unknown_keys(t, "kernel", &KERNEL_KEYS);
    }
    if let Some(t) = run {
        c.unknown_keys(t, "run", &RUN_KEYS);
    }

    let degree = match system.map(|t| t.contains_key("degree")) {
        Some(true) => c.integer(system, "system", "degree", 2, 36).map(|d| d as u32),
        Some(false) => {
            c.push("system.degree", "missing required key");
            None
        }
        None => None,
    };

    let defaults = RunConfig::default();
    let mut run_cfg = defaults.clone();
    macro_rules! run_int {
        ($field:ident, $min:expr, $max:expr) => {
            if let Some(v) = c.integer(run, "run", stringify!($field), $min, $max) {
                run_cfg.$field = v.try_into().expect("bounded");
            }
        };
    }
    let deepest = degree.map_or(62, max_level_for) as u64;
    run_int!(max_level, 1, deepest);
    run_int!(n_paths, 1, 100_000_000);
    run_int!(n_steps, 1, deepest);
    run_int!(seed, 0, i64::MAX as u64);
    run_int!(bin_level, 2, 30);
    run_int!(window_level, 1, 8);
    run_int!(trace_level, 2, deepest);
    run_int!(margin, 0, deepest);
    run_int!(quadruples, 0, 10_000_000);
    run_int!(n_points, 1, 1_000_000);

    if let Some(targets) = c.rational_list(run, "targets") {
        let mut ok = Vec::new();
        for (i, t) in targets.iter().enumerate() {
            let point = (in_unit_interval(t, true))
                .then(|| Some(Ratio::new(t.numer().to_u64()?, t.denom().to_u64()?)))
                .flatten();
            match point {
                Some(p) => ok.push(p),
                None => c.push(&format!("run.targets[{i}]"), format!("{t} is not a point of [0, 1)")),
            }
        }
        run_cfg.targets = ok;
    }
    if let Some(grid) = c.rational_list(run, "x_grid") {
        for (i, x) in grid.iter().enumerate() {
            if !in_unit_interval(x, false) {
                c.push(&format!("run.x_grid[{i}]"), format!("{x} is outside (0, 1)"));
            }
        }
        run_cfg.x_grid = grid;
    }
    if run_cfg.window_level >= run_cfg.trace_level {
        c.push("run.trace_level", "must exceed run.window_level + 1");
    }

    let family = match kernel.map(|t| t.contains_key("family")) {
        Some(true) => c.string(kernel, "kernel", "family"),
        Some(false) => {
            c.push("kernel.family", "missing required key");
            None
        }
        None => None,
    };
    let spec = match family {
        Some("doubling_px") => doubling_spec(&mut c, kernel, degree),
        Some("table") => table_spec(&mut c, kernel, degree, base_dir),
        Some(other) => {
            c.push("kernel.family", format!("unknown family {other:?} (expected \"doubling_px\" or \"table\")"));
            None
        }
        None => None,
    };

    match (degree, spec) {
        (Some(degree), Some(kernel)) if c.0.is_empty() => Ok(Scenario {
            degree,
            kernel,
            run: run_cfg,
            hash: sha256_hex(text.as_bytes()),
        }),
        _ => Err(SchemaErrors(c.0)),
    }
}

fn doubling_spec(c: &mut Collector, kernel: Option<&Table>, degree: Option<u32>) -> Option<KernelSpec> {
    let kernel = kernel?;
    for key in ["table", "base_level"] {
        if kernel.contains_key(key) {
            c.push(&format!("kernel.{key}"), "only valid for the table family");
        }
    }
    if degree.is_some_and(|d| d != 2) {
        c.push("system.degree", "the doubling_px family needs degree 2");
    }
    let Some(value) = kernel.get("x") else {
        c.push("kernel.x", "missing required key");
        return None;
    };
    let x = c.rational("kernel.x", value)?;
    if !in_unit_interval(&x, false) {
        c.push("kernel.x", format!("{x} is outside (0, 1)"));
        return None;
    }
    Some(KernelSpec::Doubling { x })
}

fn table_spec(c: &mut Collector, kernel: Option<&Table>, degree: Option<u32>, base_dir: &Path) -> Option<KernelSpec> {
    let kernel = kernel?;
    if kernel.contains_key("x") {
        c.push("kernel.x", "only valid for the doubling_px family");
    }
    for key in ["table", "base_level"] {
        if !kernel.contains_key(key) {
            c.push(&format!("kernel.{key}"), "missing required key");
        }
    }
    let base_level = c.integer(Some(kernel), "kernel", "base_level", 1, 8)? as u32;
    let file = c.string(Some(kernel), "kernel", "table")?;
    let degree = degree?;
    let path: PathBuf = base_dir.join(file);
    let text = match fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) => {
            c.push("kernel.table", format!("cannot read {}: {e}", path.display()));
            return None;
        }
    };
    match parse_table(&text, degree, base_level) {
        Ok(table) => Some(KernelSpec::Table(table)),
        Err(errors) => {
            for (line, message) in errors {
                c.push(&format!("kernel.table:{line}"), message);
            }
            None
        }
    }
}

/// Parses a kernel table: one `source target p/q` triple per line, `#` comments,
/// `o` for the root.
///
/// Errors carry 1-based line numbers; row-sum errors carry line 0 and name the vertex.
pub fn parse_table(text: &str, degree: u32, base_level: u32) -> Result<KernelTable, Vec<(usize, String)>> {
    let mut table = KernelTable::new(degree, base_level);
    let mut errors = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [source, target, probability] = fields[..] else {
            errors.push((n + 1, format!("expected `source target p/q`, found {line:?}")));
            continue;
        };
        let source = Word::parse(degree, source);
        let target = Word::parse(degree, target);
        let probability = parse_rational(probability);
        match (source, target, probability) {
            (Ok(s), Ok(t), Ok(p)) => {
                if s.level() > base_level {
                    errors.push((n + 1, format!("source {s} lies above base level {base_level}")));
                } else {
                    table.insert(s, t, p);
                }
            }
            (s, t, p) => {
                let what = [s.err().map(|e| e.to_string()), t.err().map(|e| e.to_string()), p.err().map(|e| e.to_string())];
                errors.push((n + 1, what.into_iter().flatten().collect::<Vec<_>>().join("; ")));
            }
        }
    }
    if errors.is_empty() {
        for (u, row) in &table.rows {
            let sum: BigRational = row.iter().map(|(_, p)| p.clone()).sum();
            if !sum.is_one() {
                errors.push((0, format!("outgoing probabilities at {u} sum to {sum}, expected 1")));
            }
            if let Some((t, p)) = row.iter().find(|(_, p)| !in_unit_interval(p, false) && !p.is_one()) {
                errors.push((0, format!("probability {p} from {u} to {t} is not in (0, 1]")));
            }
        }
    }
    if errors.is_empty() {
        Ok(table)
    } else {
        Err(errors)
    }
}
