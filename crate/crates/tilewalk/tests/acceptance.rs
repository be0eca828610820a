//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any fails.
//!
//! Runs without the libtest harness so the report is always printed.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{q, Node};
use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tilewalk::commands::{multiplicativity, shadow_suite};
use tilewalk::runner;
use tilewalk_core::martin::iterated_length;
use tilewalk_core::{
    build_graph, classify_doubling_boundary, cylinder_invariance_check, dimension_report, empirical_harmonic_measure,
    green_table, martin_trace, quasi_invariance_check, rational_to_f64, standard_window, CircleRealization,
    ColumnGreen, DoublingKernel, RootGreen, Ray, Side, TransitionKernel, Verdict, Word, DEFAULT_VERTEX_BUDGET,
    TRACE_TOLERANCE,
};

const SEED: u64 = 1;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn word((n, i): Node) -> Word {
    Word::new(2, n, i).unwrap()
}

fn kernel(x: &BigRational) -> DoublingKernel {
    DoublingKernel::new(x.clone()).unwrap()
}

fn secs(d: Duration) -> String {
    format!("{:.1}s", d.as_secs_f64())
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut targets = 0;
    let mut mismatches = Vec::new();
    for x in [q(1, 4), q(2, 5), q(3, 5)] {
        let dp = green_table(&kernel(&x), &Word::root(2), 7).unwrap();
        let oracle = common::path_sum(&x, common::ROOT, 7);
        for n in 0..=7u32 {
            for i in 0..1u64 << n {
                targets += 1;
                let expected = oracle.get(&(n, i)).cloned().unwrap_or_else(BigRational::zero);
                if dp.get(&word((n, i))) != expected {
                    mismatches.push(format!("x={x} ({n},{i})"));
                }
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        mismatches.is_empty() && elapsed < Duration::from_secs(10),
        format!("{targets} targets exact, {} mismatches, {}", mismatches.len(), secs(elapsed)),
    )
}

fn criterion_2() -> Outcome {
    let x = q(1, 4);
    let dp = green_table(&kernel(&x), &Word::root(2), 12).unwrap();
    let induction = common::level_induction(&x, 12);
    let mut bad = 0;
    let mut count = 0;
    for (n, level) in induction.iter().enumerate() {
        let expected = BigRational::new(BigInt::one(), BigInt::one() << n);
        for (i, f) in level.iter().enumerate() {
            count += 1;
            if *f != expected || dp.get(&word((n as u32, i as u64))) != expected {
                bad += 1;
            }
        }
    }
    outcome(bad == 0, format!("F(o,u) = 2^-|u| at {count} words up to level 12, {bad} violations"))
}

fn criterion_3() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for x in [q(1, 4), q(3, 5)] {
        let r = multiplicativity(&kernel(&x), 8, 1000, SEED).unwrap();
        pass &= r.cases >= 1000 && r.failures == 0;
        parts.push(format!("x={x}: {} quadruples, {} violations", r.cases, r.failures));
    }
    outcome(pass, parts.join("; "))
}

/// `P(T^{-k}[v_0..v_m])` by summing over every path of `k + m` steps.
fn shifted_by_paths(paths: &[(Vec<Node>, BigRational)], cylinder: &[Node], k: usize) -> BigRational {
    let mut total = BigRational::zero();
    for (path, p) in paths {
        let level = path[k].0;
        let matches = cylinder.iter().enumerate().all(|(n, v)| common::shift(path[n + k], level) == *v);
        if matches {
            total += p;
        }
    }
    total
}

fn criterion_4() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for x in [q(1, 4), q(1, 2)] {
        let report = cylinder_invariance_check(&kernel(&x), 3, 3, 3, 1).unwrap();
        // Oracle: every support cylinder from brute-force paths.
        let mut oracle_failures = 0;
        let mut checked = 0;
        for m in 1..=3u32 {
            let cylinders: Vec<Vec<Node>> = common::all_paths(&x, m).into_iter().map(|(c, _)| c).collect();
            for k in 0..=3usize {
                let paths = common::all_paths(&x, k as u32 + m);
                for c in &cylinders {
                    checked += 1;
                    if shifted_by_paths(&paths, c, k) != common::path_probability(&x, c) {
                        oracle_failures += 1;
                    }
                }
            }
        }
        pass &= report.passed() && oracle_failures == 0;
        parts.push(format!(
            "x={x}: library {} identities {} failures, oracle {checked} identities {oracle_failures} failures",
            report.identities_checked,
            report.failures.len()
        ));
    }
    outcome(pass, parts.join("; "))
}

struct TraceCheck {
    ratio_error: f64,
    growth_error: f64,
}

fn trace_at_half(last_level: u32) -> TraceCheck {
    let k = kernel(&q(1, 2));
    let half = Ratio::new(1, 2);
    let window = standard_window(2, 2).unwrap();
    let first = last_level.saturating_sub(1).max(4);
    let along_x = martin_trace(&k, Ray::new(2, half, Side::Left, -1), window.clone(), first, last_level, TRACE_TOLERANCE)
        .unwrap();
    let along_y = martin_trace(&k, Ray::new(2, half, Side::Left, 0), window, first, last_level, TRACE_TOLERANCE).unwrap();
    let (x2, y2, z2, y3) = (word((2, 0)), word((2, 1)), word((2, 2)), word((3, 3)));
    let ry = rational_to_f64(&along_x.ratio(&y2, &x2).unwrap());
    let rz = rational_to_f64(&along_x.ratio(&z2, &x2).unwrap());
    let growth = rational_to_f64(&along_y.ratio(&y3, &y2).unwrap());
    TraceCheck {
        ratio_error: (ry - 2.0).abs().max((rz - 1.0).abs()),
        growth_error: (growth - 3.0).abs(),
    }
}

fn criterion_5() -> (Outcome, String) {
    let expected = [
        (q(1, 10), Verdict::Homeomorphism),
        (q(2, 10), Verdict::Homeomorphism),
        (q(3, 10), Verdict::Homeomorphism),
        (q(39, 100), Verdict::Homeomorphism),
        (q(41, 100), Verdict::NonInjective),
        (q(1, 2), Verdict::NonInjective),
        (q(3, 5), Verdict::NonInjective),
        (q(9, 10), Verdict::NonInjective),
    ];
    let verdicts_ok = expected.iter().all(|(x, v)| classify_doubling_boundary(x).unwrap().verdict == *v);

    let at25 = trace_at_half(25);
    let trace_ok = at25.ratio_error <= 1e-9 && at25.growth_error <= 1e-9;

    let c = classify_doubling_boundary(&q(3, 10)).unwrap();
    let lambda_ok = c.contraction == q(4, 7);
    let stated = q(4, 7);
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut within_stated = 0;
    let mut within_computed = 0;
    for _ in 0..100 {
        let sequence: Vec<u8> = (0..30).map(|_| rng.gen_range(0..4u8)).collect();
        let length = iterated_length(&sequence, &c.z);
        within_stated += (length <= pow(&stated, 30)) as usize;
        within_computed += (length <= pow(&c.contraction, 30)) as usize;
    }
    let lengths_ok = within_stated == 100 && within_computed == 100;

    let at60 = trace_at_half(60);
    let info = format!(
        "criterion 5 INFO: same trace at level 60: ratio error {:.2e}, growth error {:.2e}",
        at60.ratio_error, at60.growth_error
    );
    (
        outcome(
            verdicts_ok && trace_ok && lambda_ok && lengths_ok,
            format!(
                "verdicts {}; level-25 trace ratio error {:.2e}, growth error {:.2e} (gate 1e-9); lambda at 3/10 = {} (expected 4/7); \
                 lengths <= (4/7)^30 for {within_stated}/100, <= lambda^30 for {within_computed}/100",
                if verdicts_ok { "match" } else { "differ" },
                at25.ratio_error,
                at25.growth_error,
                c.contraction,
            ),
        ),
        info,
    )
}

fn pow(base: &BigRational, n: u32) -> BigRational {
    (0..n).fold(BigRational::one(), |acc, _| acc * base)
}

fn criterion_6(pool: &rayon::ThreadPool) -> Outcome {
    let start = Instant::now();
    let k = kernel(&q(1, 4));
    let finals = runner::final_words(pool, &k, 10_000, 50, SEED).unwrap();
    let green = ColumnGreen::new(&k);
    let exact = BigRational::new(BigInt::one(), BigInt::one() << 50);
    let mut inexact = 0;
    let mut sum = 0.0;
    for w in &finals {
        if green.f(w).unwrap() != exact {
            inexact += 1;
        }
        sum += green.g(w).unwrap() / 50.0;
    }
    let estimate = sum / finals.len() as f64;
    let elapsed = start.elapsed();
    let relative = (estimate / std::f64::consts::LN_2 - 1.0).abs();
    outcome(
        inexact == 0 && relative <= 0.02 && elapsed < Duration::from_secs(60),
        format!(
            "l_G = {estimate:.12} (log 2 = {:.12}), {inexact} paths with F(o,Z_50) != 2^-50, {}",
            std::f64::consts::LN_2,
            secs(elapsed)
        ),
    )
}

struct Run {
    finals: Vec<Word>,
    packing: f64,
    l_g: f64,
}

fn dimension_run(pool: &rayon::ThreadPool, x: &BigRational) -> Run {
    let k = kernel(x);
    let finals = runner::final_words(pool, &k, 100_000, 50, SEED).unwrap();
    let logs = runner::green_logs(pool, &k, &finals).unwrap();
    let l_g = logs.iter().sum::<f64>() / (50.0 * logs.len() as f64);
    let measure = empirical_harmonic_measure(&finals, 10, 10).unwrap();
    let report = dimension_report(&measure, l_g, 1.0, std::f64::consts::LN_2, 200);
    Run {
        finals,
        packing: report.packing_estimate,
        l_g,
    }
}

fn criterion_7(pool: &rayon::ThreadPool) -> (Outcome, Run) {
    let start = Instant::now();
    let quarter = dimension_run(pool, &q(1, 4));
    let tenths = dimension_run(pool, &q(3, 10));
    let elapsed = start.elapsed();
    let target = tenths.l_g / std::f64::consts::LN_2;
    let gap = (tenths.packing - target).abs();
    let pass = (quarter.packing - 1.0).abs() <= 0.10 && gap <= 0.05 && elapsed < Duration::from_secs(300);
    (
        outcome(
            pass,
            format!(
                "x=1/4 packing {:.4} (target 1 +- 0.10); x=3/10 packing {:.4} vs l_G/log 2 = {target:.4} (gap {gap:.4}, limit 0.05); {}",
                quarter.packing,
                tenths.packing,
                secs(elapsed)
            ),
        ),
        quarter,
    )
}

fn criterion_8(pool: &rayon::ThreadPool, quarter: &Run) -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    let three_fifths = runner::final_words(pool, &kernel(&q(3, 5)), 100_000, 50, SEED).unwrap();
    for (x, finals) in [(q(1, 4), &quarter.finals), (q(3, 5), &three_fifths)] {
        let measure = empirical_harmonic_measure(finals, 8, 10).unwrap();
        let report = quasi_invariance_check(&measure, &kernel(&x)).unwrap();
        pass &= report.exact_invariance && report.total_variation <= 0.02;
        parts.push(format!(
            "x={x}: f_*nu = nu exactly {}, TV {:.5} (limit 0.02)",
            report.exact_invariance, report.total_variation
        ));
    }
    outcome(pass, parts.join("; "))
}

fn criterion_9() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for x in [q(1, 4), q(3, 5)] {
        let k = kernel(&x);
        assert_eq!(k.radius(), 1);
        let library = shadow_suite(&k, 8).unwrap();
        // Oracle: doubled excursion in units of 2^{-depth} against 2·4·2^{depth-|u|}.
        let mut violations = 0;
        let mut tiles = 0;
        for n in 0..=8u32 {
            let depth = n + 8;
            for i in 0..1u64 << n {
                for w in common::shadow(&x, (n, i), depth) {
                    tiles += 1;
                    if common::doubled_excursion((n, i), w, depth) > 8u128 << (depth - n) {
                        violations += 1;
                    }
                }
            }
        }
        pass &= library.failures == 0 && violations == 0;
        parts.push(format!(
            "x={x}: library {} words {} violations, oracle {tiles} tiles {violations} violations",
            library.cases, library.failures
        ));
    }
    outcome(pass, parts.join("; "))
}

fn criterion_10() -> Outcome {
    let realization = CircleRealization::doubling();
    let mut deltas = Vec::new();
    let mut agree = true;
    for level in [4u32, 5, 6] {
        let graph = build_graph(&realization, level, DEFAULT_VERTEX_BUDGET).unwrap();
        let r = graph.hyperbolicity_delta(level, u64::MAX, SEED).unwrap();
        agree &= r.exhaustive && r.delta.twice() == common::Graph::new(level).doubled_delta();
        deltas.push(r.delta.to_f64());
    }
    let graph = build_graph(&realization, 8, DEFAULT_VERTEX_BUDGET).unwrap();
    let oracle = common::Graph::new(8);
    let products = oracle.doubled_products();
    let oracle_constant = |level: u32| {
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        let members: Vec<usize> = (0..oracle.nodes.len()).filter(|&a| (1..=level).contains(&oracle.nodes[a].0)).collect();
        for &a in &members {
            for &b in &members {
                let r = common::union_diameter(oracle.nodes[a], oracle.nodes[b]) * 2f64.powf(products[a][b] as f64 / 2.0);
                lo = lo.min(r);
                hi = hi.max(r);
            }
        }
        hi.max(1.0 / lo)
    };
    let c6 = graph.diameter_comparability(6).unwrap().constant();
    let c8 = graph.diameter_comparability(8).unwrap().constant();
    let (o6, o8) = (oracle_constant(6), oracle_constant(8));
    agree &= (c6 - o6).abs() < 1e-12 && (c8 - o8).abs() < 1e-12;
    let pass = agree && deltas.iter().all(|d| d.is_finite()) && deltas[2] - deltas[0] <= 1.0 && c8 <= 1.1 * c6;
    outcome(
        pass,
        format!(
            "delta(4,5,6) = {:?} exhaustive, oracle agrees {agree}; comparability constant {c6:.6} at level 6, {c8:.6} at level 8 (growth {:.2}%)",
            deltas,
            100.0 * (c8 / c6 - 1.0)
        ),
    )
}

fn main() -> ExitCode {
    let pool = runner::pool(None);
    let mut failed = Vec::new();
    let mut report = |n: usize, o: Outcome| {
        println!("criterion {n} {}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if !o.pass {
            failed.push(n);
        }
    };
    report(1, criterion_1());
    report(2, criterion_2());
    report(3, criterion_3());
    report(4, criterion_4());
    let (five, info) = criterion_5();
    report(5, five);
    println!("{info}");
    report(6, criterion_6(&pool));
    let (seven, quarter) = criterion_7(&pool);
    report(7, seven);
    report(8, criterion_8(&pool, &quarter));
    report(9, criterion_9());
    report(10, criterion_10());
    if failed.is_empty() {
        println!("acceptance: all 10 criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failing criteria {failed:?}");
        ExitCode::FAILURE
    }
}
