//! Sub-commands. Each one writes its CSV artifacts and returns a one-line summary.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::ThreadPool;
use tilewalk_core::{
    build_graph, check_multiplicative, classify_doubling_boundary, cylinder_invariance_check, dimension_report,
    drift_exact, empirical_harmonic_measure, enumerate_paths, green_table, martin_trace, quasi_invariance_check,
    random_quadruple, rational_to_f64, standard_window, validate_assumptions, DimensionReport, DriftReport, EmpiricalMeasure, Error,
    GreenCache, Kernel, MaterializedKernel, QuasiInvarianceReport, Ray, Side, TileGraph, TransitionKernel, Word,
    DEFAULT_VERTEX_BUDGET, TRACE_TOLERANCE,
};

use crate::format::{rational, ratio_u64, real, Header, Table};
use crate::runner;
use crate::scenario::{Scenario, SchemaErrors};

pub const COMMANDS: [&str; 10] = [
    "build",
    "validate",
    "green",
    "martin",
    "classify",
    "simulate",
    "dimension",
    "hyperbolicity",
    "checks",
    "demo-doubling",
];

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Schema(#[from] SchemaErrors),
    #[error(transparent)]
    Core(#[from] Error),
    /// An exact property check failed; artifacts were still written.
    #[error("{0}")]
    Property(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Schema(_) | CliError::Usage(_) => 2,
            CliError::Property(_) => 3,
            CliError::Core(e) => match e {
                Error::Budget { .. } => 4,
                Error::RowSum { .. }
                | Error::BadProbability { .. }
                | Error::ParameterOutOfRange(_)
                | Error::NonIncreasing { .. }
                | Error::MissingRow(_)
                | Error::AboveBase { .. }
                | Error::InconsistentBase { .. }
                | Error::LiftAmbiguity { .. }
                | Error::DenominatorOverflow
                | Error::InvalidDegree(_)
                | Error::LevelTooDeep { .. }
                | Error::InsufficientDepth { .. } => 2,
                _ => 1,
            },
            CliError::Io(_) => 1,
        }
    }
}

/// What a successful command reports.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Report {
    pub summary: String,
    pub files: Vec<PathBuf>,
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.summary)
    }
}

/// Everything a command needs besides its name.
pub struct Context {
    pub scenario: Scenario,
    pub out: PathBuf,
    pub pool: ThreadPool,
    pub budget: u64,
    /// The `--x` override for the demo.
    pub x: Option<BigRational>,
}

impl Context {
    pub fn new(scenario: Scenario, out: &Path, workers: Option<usize>) -> Context {
        Context {
            scenario,
            out: out.to_path_buf(),
            pool: runner::pool(workers),
            budget: budget_from_env(),
            x: None,
        }
    }

    fn header(&self) -> Header {
        Header {
            scenario_hash: self.scenario.hash.clone(),
            seed: self.scenario.run.seed,
        }
    }

    fn write(&self, tables: &[&Table]) -> Result<Vec<PathBuf>, CliError> {
        let header = self.header();
        tables.iter().map(|t| Ok(t.write(&self.out, &header)?)).collect()
    }

    fn graph(&self, max_level: u32) -> Result<TileGraph, CliError> {
        Ok(build_graph(&self.scenario.realization(), max_level, self.budget)?)
    }
}

/// `TILEWALK_BUDGET` when set to an integer, otherwise the library default.
pub fn budget_from_env() -> u64 {
    std::env::var("TILEWALK_BUDGET")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_VERTEX_BUDGET)
}

pub fn run_command(name: &str, ctx: &Context) -> Result<Report, CliError> {
    match name {
        "build" => build(ctx),
        "validate" => validate(ctx),
        "green" => green(ctx),
        "martin" => martin(ctx),
        "classify" => classify(ctx),
        "simulate" => simulate(ctx),
        "dimension" => dimension(ctx),
        "hyperbolicity" => hyperbolicity(ctx),
        "checks" => checks(ctx),
        "demo-doubling" => demo_doubling(ctx),
        other => Err(CliError::Usage(format!("unknown command {other:?}; expected one of {}", COMMANDS.join(", ")))),
    }
}

fn done(summary: String, files: Vec<PathBuf>) -> Result<Report, CliError> {
    Ok(Report { summary, files })
}

fn build(ctx: &Context) -> Result<Report, CliError> {
    let graph = ctx.graph(ctx.scenario.run.max_level)?;
    let mut vertices = Table::new("vertices.csv", &["word", "level", "index", "tile_lo", "tile_hi"]);
    for u in graph.vertices() {
        let tile = u.tile();
        vertices.push([
            u.to_string(),
            u.level().to_string(),
            u.index().to_string(),
            ratio_u64(&tile.lo()),
            ratio_u64(&tile.hi()),
        ]);
    }
    let mut edges = Table::new("edges.csv", &["u", "v"]);
    for (u, v) in graph.edges() {
        edges.push([u.to_string(), v.to_string()]);
    }
    let files = ctx.write(&[&vertices, &edges])?;
    done(
        format!("build: {} vertices, {} edges up to level {}", graph.len(), graph.edge_count(), graph.max_level()),
        files,
    )
}

fn validate(ctx: &Context) -> Result<Report, CliError> {
    let kernel = ctx.scenario.build_kernel()?;
    let graph = ctx.graph(ctx.scenario.run.max_level)?;
    let materialized = MaterializedKernel::from_kernel(&kernel, &graph)?;
    let report = validate_assumptions(&materialized, &graph)?;
    let mut table = Table::new("validation.csv", &["check", "passed", "witness_source", "witness_target"]);
    let checks = [
        ("row_sums", &report.row_sums),
        ("locality", &report.locality),
        ("level_increase", &report.level_increase),
        ("coverage", &report.coverage),
        ("equivariance", &report.equivariance),
    ];
    for (name, check) in checks {
        let (s, t) = check.witness.map_or((String::new(), String::new()), |(s, t)| (s.to_string(), t.to_string()));
        table.push([name.to_string(), check.passed.to_string(), s, t]);
    }
    let mut facts = Table::new("kernel.csv", &["rows_checked", "minimal_radius", "max_jump", "denominator", "drift"]);
    facts.push([
        report.rows_checked.to_string(),
        report.minimal_radius.map_or_else(String::new, |r| r.to_string()),
        kernel.max_jump().to_string(),
        kernel.denominator().to_string(),
        rational(&drift_exact(&kernel)?),
    ]);
    let files = ctx.write(&[&table, &facts])?;
    let failed: Vec<&str> = checks.iter().filter(|(_, c)| !c.passed).map(|(n, _)| *n).collect();
    if failed.is_empty() {
        done(format!("validate: {} rows satisfy every assumption", report.rows_checked), files)
    } else {
        Err(CliError::Schema(SchemaErrors(
            failed
                .iter()
                .map(|n| crate::scenario::SchemaError {
                    path: "kernel".into(),
                    message: format!("assumption {n} fails"),
                })
                .collect(),
        )))
    }
}

fn green(ctx: &Context) -> Result<Report, CliError> {
    let kernel = ctx.scenario.build_kernel()?;
    let root = Word::root(kernel.degree());
    let table = green_table(&kernel, &root, ctx.scenario.run.max_level)?;
    let mut out = Table::new("green.csv", &["word", "level", "index", "f", "minus_log_f"]);
    let mut count = 0;
    for (w, f) in table.iter() {
        if f.is_zero() {
            continue;
        }
        count += 1;
        out.push([
            w.to_string(),
            w.level().to_string(),
            w.index().to_string(),
            rational(&f),
            real(-table.ln(&w).expect("positive")),
        ]);
    }
    let files = ctx.write(&[&out])?;
    done(format!("green: F(o, .) at {count} targets up to level {}", table.max_level()), files)
}

/// The three rays through a point used for traces: the tile two to the left,
/// the closed tile on the left, the closed tile on the right.
fn rays(degree: u32, point: Ratio<u64>) -> [(&'static str, Ray); 3] {
    [
        ("left-1", Ray::new(degree, point, Side::Left, -1)),
        ("left", Ray::new(degree, point, Side::Left, 0)),
        ("right", Ray::new(degree, point, Side::Right, 0)),
    ]
}

fn martin(ctx: &Context) -> Result<Report, CliError> {
    let kernel = ctx.scenario.build_kernel()?;
    let run = &ctx.scenario.run;
    let window = standard_window(kernel.degree(), run.window_level)?;
    let first = run.window_level + 2;
    let mut values = Table::new("martin.csv", &["target", "ray", "level", "ray_word", "window_word", "k"]);
    let mut summary = Table::new(
        "martin_summary.csv",
        &["target", "ray", "last_level", "last_difference", "converged", "support_ok"],
    );
    let mut converged = 0;
    let mut total = 0;
    for &point in &run.targets {
        let jobs = rays(kernel.degree(), point);
        let traces = runner::map_ordered(&ctx.pool, &jobs, |(_, ray)| {
            martin_trace(&kernel, *ray, window.clone(), first, run.trace_level, TRACE_TOLERANCE)
        });
        for ((name, ray), trace) in jobs.iter().zip(traces) {
            let trace = trace?;
            for (level, vector) in trace.levels.iter().zip(&trace.vectors) {
                let v = ray.word(*level)?;
                for (w, k) in trace.window.iter().zip(vector) {
                    values.push([ratio_u64(&point), name.to_string(), level.to_string(), v.to_string(), w.to_string(), real(rational_to_f64(k))]);
                }
            }
            total += 1;
            converged += trace.converged as usize;
            summary.push([
                ratio_u64(&point),
                name.to_string(),
                run.trace_level.to_string(),
                real(trace.last_difference),
                trace.converged.to_string(),
                trace.support_ok.to_string(),
            ]);
        }
    }
    let files = ctx.write(&[&values, &summary])?;
    done(format!("martin: {converged} of {total} traces converged by level {}", run.trace_level), files)
}

fn classify(ctx: &Context) -> Result<Report, CliError> {
    let mut out = Table::new(
        "classify.csv",
        &["x", "verdict", "eigenvalue_x", "eigenvalue_2y", "z", "contraction", "contraction_real"],
    );
    let mut transitions = Vec::new();
    let mut previous: Option<(String, &'static str)> = None;
    for x in &ctx.scenario.run.x_grid {
        let c = classify_doubling_boundary(x)?;
        out.push([
            rational(x),
            c.verdict.as_str().to_string(),
            rational(&c.eigen.eigenvalues[1]),
            rational(&c.eigen.eigenvalues[2]),
            rational(&c.z),
            rational(&c.contraction),
            real(rational_to_f64(&c.contraction)),
        ]);
        let verdict = c.verdict.as_str();
        if let Some((px, pv)) = &previous {
            if *pv != verdict {
                transitions.push(format!("{pv} -> {verdict} between {px} and {}", rational(x)));
            }
        }
        previous = Some((rational(x), verdict));
    }
    let files = ctx.write(&[&out])?;
    let what = if transitions.is_empty() { "no transition".to_string() } else { transitions.join("; ") };
    done(format!("classify: {} parameters, {what}", ctx.scenario.run.x_grid.len()), files)
}

/// Samples, drift and binned measure shared by `simulate` and `dimension`.
struct Simulation {
    finals: Vec<Word>,
    drift: DriftReport,
    measure: EmpiricalMeasure,
}

fn simulation(ctx: &Context, kernel: &Kernel) -> Result<Simulation, CliError> {
    let run = &ctx.scenario.run;
    let finals = runner::final_words(&ctx.pool, kernel, run.n_paths, run.n_steps, run.seed)?;
    let logs = runner::green_logs(&ctx.pool, kernel, &finals)?;
    let per_path: Vec<f64> = logs.iter().map(|g| g / run.n_steps as f64).collect();
    let drift = tilewalk_core::drift_report(drift_exact(kernel)?, &per_path, run.n_steps);
    let measure = empirical_harmonic_measure(&finals, run.bin_level, run.margin)?;
    Ok(Simulation { finals, drift, measure })
}

fn sample_tables(ctx: &Context, sim: &Simulation) -> [Table; 2] {
    let seed = ctx.scenario.run.seed;
    let mut samples = Table::new("samples.csv", &["seed", "path_index", "final_word", "midpoint"]);
    for (i, w) in sim.finals.iter().enumerate() {
        samples.push([seed.to_string(), i.to_string(), w.to_string(), ratio_u64(&w.tile().midpoint())]);
    }
    let mut measure = Table::new("measure.csv", &["bin", "count", "mass"]);
    for (b, (&c, &m)) in sim.measure.counts.iter().zip(&sim.measure.masses).enumerate() {
        measure.push([b.to_string(), c.to_string(), real(m)]);
    }
    [samples, measure]
}

fn drift_table(sim: &Simulation) -> Table {
    let d = &sim.drift;
    let mut t = Table::new("drift.csv", &["l", "l_g_estimate", "l_g_stderr", "n_paths", "n_steps"]);
    t.push([
        rational(&d.l),
        real(d.l_g_estimate),
        real(d.l_g_stderr),
        d.n_paths.to_string(),
        d.n_steps.to_string(),
    ]);
    t
}

fn quasi_table(q: &QuasiInvarianceReport) -> [Table; 2] {
    let mut bins = Table::new("quasi_invariance.csv", &["bin", "measure", "pushforward"]);
    for (b, (m, p)) in q.measure.iter().zip(&q.pushforward).enumerate() {
        bins.push([b.to_string(), real(*m), real(*p)]);
    }
    let mut summary = Table::new(
        "quasi_summary.csv",
        &[
            "level",
            "total_variation",
            "max_ratio",
            "min_ratio",
            "empty_bins",
            "ratio_bound",
            "exact_invariance",
            "ratio_within_bound",
        ],
    );
    summary.push([
        q.level.to_string(),
        real(q.total_variation),
        real(q.max_ratio),
        real(q.min_ratio),
        q.empty_bins.to_string(),
        rational(&q.ratio_bound),
        q.exact_invariance.to_string(),
        q.ratio_within_bound.to_string(),
    ]);
    [bins, summary]
}

fn simulate(ctx: &Context) -> Result<Report, CliError> {
    let kernel = ctx.scenario.build_kernel()?;
    let sim = simulation(ctx, &kernel)?;
    let quasi = quasi_invariance_check(&sim.measure, &kernel)?;
    let [samples, measure] = sample_tables(ctx, &sim);
    let drift = drift_table(&sim);
    let [bins, qsum] = quasi_table(&quasi);
    let files = ctx.write(&[&samples, &drift, &measure, &bins, &qsum])?;
    done(
        format!(
            "simulate: {} paths, l = {}, l_G = {} ± {}, TV(nu, f_*nu) = {}",
            sim.finals.len(),
            rational(&sim.drift.l),
            real(sim.drift.l_g_estimate),
            real(sim.drift.l_g_stderr),
            real(quasi.total_variation)
        ),
        files,
    )
}

fn dimension(ctx: &Context) -> Result<Report, CliError> {
    let kernel = ctx.scenario.build_kernel()?;
    let sim = simulation(ctx, &kernel)?;
    let a = ctx.scenario.realization().visual_parameter();
    let l = rational_to_f64(&sim.drift.l);
    let report: DimensionReport = dimension_report(&sim.measure, sim.drift.l_g_estimate, l, a, ctx.scenario.run.n_points);
    let mut points = Table::new("dimension.csv", &["point_bin", "local_dim"]);
    for (b, dim) in report.points.iter().zip(&report.local_dims) {
        points.push([b.to_string(), real(*dim)]);
    }
    let mut summary = Table::new(
        "dimension_summary.csv",
        &["packing_estimate", "formula_value", "l_g_estimate", "l", "a", "bin_level", "n_paths"],
    );
    summary.push([
        real(report.packing_estimate),
        real(report.formula_value),
        real(sim.drift.l_g_estimate),
        rational(&sim.drift.l),
        real(a),
        sim.measure.bin_level.to_string(),
        sim.finals.len().to_string(),
    ]);
    let [_, measure] = sample_tables(ctx, &sim);
    let files = ctx.write(&[&points, &summary, &measure, &drift_table(&sim)])?;
    done(
        format!(
            "dimension: packing estimate {}, l_G/(a l) = {}",
            real(report.packing_estimate),
            real(report.formula_value)
        ),
        files,
    )
}

/// Exhaustive four-point triples are affordable up to this many.
const EXHAUSTIVE_TRIPLES: u64 = 50_000_000;

fn hyperbolicity(ctx: &Context) -> Result<Report, CliError> {
    let run = &ctx.scenario.run;
    let mut deltas = Table::new(
        "hyperbolicity.csv",
        &["truncation_level", "delta", "exhaustive", "triples", "witness_x", "witness_y", "witness_z"],
    );
    let mut worst = 0.0f64;
    for level in 1..=run.max_level.min(8) {
        let graph = ctx.graph(level)?;
        let r = graph.hyperbolicity_delta(level, EXHAUSTIVE_TRIPLES, run.seed)?;
        worst = worst.max(r.delta.to_f64());
        let [x, y, z] = r.witness;
        deltas.push([
            level.to_string(),
            real(r.delta.to_f64()),
            r.exhaustive.to_string(),
            r.triples_examined.to_string(),
            x.to_string(),
            y.to_string(),
            z.to_string(),
        ]);
    }
    let graph = ctx.graph(run.max_level)?;
    let mut ratios = Table::new("comparability.csv", &["level", "pairs", "min_ratio", "max_ratio", "constant"]);
    let mut constant = 0.0;
    for level in 1..=run.max_level {
        let c = graph.diameter_comparability(level)?;
        constant = c.constant();
        ratios.push([
            level.to_string(),
            c.pairs.to_string(),
            real(c.min_ratio),
            real(c.max_ratio),
            real(c.constant()),
        ]);
    }
    let files = ctx.write(&[&deltas, &ratios])?;
    done(
        format!("hyperbolicity: max delta {} up to level {}, comparability constant {}", real(worst), run.max_level.min(8), real(constant)),
        files,
    )
}

/// Outcome of one exact property suite.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuiteResult {
    pub suite: &'static str,
    pub cases: usize,
    pub failures: usize,
    pub first_failure: String,
}

impl SuiteResult {
    fn new(suite: &'static str) -> SuiteResult {
        SuiteResult {
            suite,
            cases: 0,
            failures: 0,
            first_failure: String::new(),
        }
    }

    fn record(&mut self, ok: bool, witness: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            if self.failures == 0 {
                self.first_failure = witness();
            }
            self.failures += 1;
        }
    }
}

/// Deepest level at which path enumeration is still cheap.
const ENUMERATION_LEVEL: u32 = 7;
/// Levels of shadow explored below each word in the geometry suite.
const SHADOW_DEPTH: u32 = 8;

/// Level-ordered DP against per-path enumeration, from the root and every level-one word.
pub fn dp_vs_enumeration<K: TransitionKernel>(kernel: &K, max_level: u32) -> Result<SuiteResult, Error> {
    let mut suite = SuiteResult::new("green_dp_vs_enumeration");
    let mut sources = vec![Word::root(kernel.degree())];
    for i in 0..kernel.degree() as u64 {
        sources.push(Word::new(kernel.degree(), 1, i)?);
    }
    for s in sources.iter().filter(|s| s.level() < max_level) {
        let dp = green_table(kernel, s, max_level)?;
        let brute = enumerate_paths(kernel, s, max_level)?;
        let mut targets: BTreeMap<Word, (BigRational, BigRational)> = BTreeMap::new();
        for (w, f) in dp.iter() {
            targets.entry(w).or_insert_with(|| (BigRational::zero(), BigRational::zero())).0 = f;
        }
        for (w, f) in brute {
            targets.entry(w).or_insert_with(|| (BigRational::zero(), BigRational::zero())).1 = f;
        }
        for (w, (a, b)) in targets {
            suite.record(a == b, || format!("F({s}, {w}): dp {a} vs enumeration {b}"));
        }
    }
    Ok(suite)
}

/// `F(v,s)F(s,w) ≤ F(v,w) ≤ Σ_{t∈N(u)} F(v,t)F(t,w)` on random admissible quadruples.
pub fn multiplicativity<K: TransitionKernel>(kernel: &K, max_level: u32, count: u64, seed: u64) -> Result<SuiteResult, Error> {
    let mut suite = SuiteResult::new("multiplicativity");
    let mut cache = GreenCache::new(kernel, max_level);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..count {
        let [v, s, u, w] = random_quadruple(kernel, max_level, &mut rng)?;
        let r = check_multiplicative(&mut cache, &v, &s, &u, &w)?;
        suite.record(r.holds(), || {
            format!("v={v} s={s} u={u} w={w}: {} <= {} <= {}", r.through_s, r.direct, r.neighbor_sum)
        });
    }
    Ok(suite)
}

/// `T`-invariance of support cylinders with at most three steps at levels up to three.
pub fn cylinder_suite<K: TransitionKernel>(kernel: &K) -> Result<SuiteResult, Error> {
    let mut suite = SuiteResult::new("cylinder_invariance");
    let report = cylinder_invariance_check(kernel, 3, 3, 3, 1)?;
    suite.cases = report.identities_checked + report.mixing_checked;
    suite.failures = report.failures.len() + report.mixing_failures.len();
    if let Some((c, k, p)) = report.failures.first() {
        suite.first_failure = format!("cylinder {c:?} at k={k}: {p}");
    } else if let Some((a, b, k)) = report.mixing_failures.first() {
        suite.first_failure = format!("mixing {a:?} / {b:?} at k={k}");
    }
    Ok(suite)
}

/// The shadow constant `d^{R+1}/(d−1)`.
pub fn shadow_constant<K: TransitionKernel>(kernel: &K) -> Ratio<u128> {
    let d = kernel.degree() as u128;
    Ratio::new(d.pow(kernel.radius() + 1), d - 1)
}

/// Every shadow of a word of level `≤ max_level` stays within `C·d^{-|u|}` of its tile.
pub fn shadow_suite<K: TransitionKernel>(kernel: &K, max_level: u32) -> Result<SuiteResult, Error> {
    let mut suite = SuiteResult::new("shadow_geometry");
    let c = shadow_constant(kernel);
    let realization = tilewalk_core::CircleRealization::new(kernel.degree())?;
    for level in 0..=max_level {
        for u in realization.enumerate_level(level)? {
            let g = tilewalk_core::shadow_geometry(kernel, &u, level + SHADOW_DEPTH, c)?;
            suite.record(g.within_bound, || format!("shadow of {u} reaches {} > {c}", g.max_excursion));
        }
    }
    Ok(suite)
}

fn checks(ctx: &Context) -> Result<Report, CliError> {
    let kernel = ctx.scenario.build_kernel()?;
    let run = &ctx.scenario.run;
    let enumeration_level = run.max_level.min(ENUMERATION_LEVEL);
    let jobs: [&str; 4] = ["dp", "multiplicativity", "cylinders", "shadow"];
    let results = runner::map_ordered(&ctx.pool, &jobs, |job| match *job {
        "dp" => dp_vs_enumeration(&kernel, enumeration_level),
        "multiplicativity" => multiplicativity(&kernel, run.max_level, run.quadruples, run.seed),
        "cylinders" => cylinder_suite(&kernel),
        _ => shadow_suite(&kernel, run.max_level),
    });
    let results = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    let mut table = Table::new("checks.csv", &["suite", "cases", "failures", "first_failure"]);
    for r in &results {
        table.push([r.suite.to_string(), r.cases.to_string(), r.failures.to_string(), r.first_failure.replace(',', ";")]);
    }
    let files = ctx.write(&[&table])?;
    let cases: usize = results.iter().map(|r| r.cases).sum();
    let failed: Vec<&str> = results.iter().filter(|r| r.failures > 0).map(|r| r.suite).collect();
    if failed.is_empty() {
        done(format!("checks: {} suites, {cases} exact cases, all hold", results.len()), files)
    } else {
        Err(CliError::Property(format!("checks: failing suites: {}", failed.join(", "))))
    }
}

fn demo_doubling(ctx: &Context) -> Result<Report, CliError> {
    let x = ctx
        .x
        .clone()
        .or_else(|| ctx.scenario.doubling_x().cloned())
        .unwrap_or_else(|| BigRational::new(BigInt::from(1), BigInt::from(2)));
    let kernel = tilewalk_core::DoublingKernel::new(x.clone())?;
    let run = &ctx.scenario.run;
    let half = Ratio::new(1, 2);
    let window = standard_window(2, 2)?;
    let jobs = rays(2, half);
    let traces = runner::map_ordered(&ctx.pool, &jobs, |(_, ray)| {
        martin_trace(&kernel, *ray, window.clone(), 4, run.trace_level, TRACE_TOLERANCE)
    });
    let mut table = Table::new(
        "demo.csv",
        &["x", "ray", "level", "k_x2", "k_y2", "k_z2", "ratio_y2_x2", "ratio_z2_x2", "growth"],
    );
    let word = |level: u32, index: u64| Word::new(2, level, index).expect("in range");
    // x_n, y_n, z_n at level 2 and 3 around 1/2.
    let (x2, y2, z2) = (word(2, 0), word(2, 1), word(2, 2));
    let third = [word(3, 2), word(3, 3), word(3, 4)];
    let second = [x2, y2, z2];
    let mut lines = Vec::new();
    for (r, ((name, _), trace)) in jobs.iter().zip(traces).enumerate() {
        let trace = trace?;
        for (level, vector) in trace.levels.iter().zip(&trace.vectors) {
            let at = |w: &Word| vector[trace.window.iter().position(|v| v == w).expect("in window")].clone();
            let (kx, ky, kz) = (at(&x2), at(&y2), at(&z2));
            let ratio = |a: &BigRational, b: &BigRational| if b.is_zero() { f64::NAN } else { to_f64(&(a / b)) };
            let growth = ratio(&at(&third[r]), &at(&second[r]));
            table.push([
                rational(&x),
                name.to_string(),
                level.to_string(),
                rational(&kx),
                rational(&ky),
                rational(&kz),
                real(ratio(&ky, &kx)),
                real(ratio(&kz, &kx)),
                real(growth),
            ]);
        }
        let last = trace.vectors.last().expect("levels traced");
        let at = |w: &Word| last[trace.window.iter().position(|v| v == w).expect("in window")].clone();
        let (kx, ky, kz) = (at(&x2), at(&y2), at(&z2));
        let scale = if kx.is_zero() { ky.clone() } else { kx.clone() };
        let growth = to_f64(&(at(&third[r]) / at(&second[r])));
        lines.push(format!(
            "{name}: {}:{}:{} growth {}",
            real(to_f64(&(kx / &scale))),
            real(to_f64(&(ky / &scale))),
            real(to_f64(&(kz / &scale))),
            real(growth)
        ));
    }
    let files = ctx.write(&[&table])?;
    done(format!("demo-doubling x={} level {}: {}", rational(&x), run.trace_level, lines.join("; ")), files)
}

fn to_f64(r: &BigRational) -> f64 {
    rational_to_f64(r)
}
