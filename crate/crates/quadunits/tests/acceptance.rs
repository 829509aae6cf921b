//! Acceptance suite: one test per criterion, each printing a pass/fail line
//! (visible with `cargo test --test acceptance -- --nocapture`).

use std::collections::BTreeSet;
use std::process::Command;
use std::time::Instant;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use quadunits::asymptotics;
use quadunits::local_solubility;
use quadunits::quadfield::{make_field, QuadInt};
use quadunits::sums_of_units::{self, Mode, Reducer};
use quadunits::trace_sums::{self, TraceSumQuery};
use quadunits::unit_equation;
use quadunits::{BoundConfig, UnitTuple};

fn cfg() -> BoundConfig {
    BoundConfig::default()
}

fn report(num: u32, name: &str, pass: bool, detail: &str) {
    println!(
        "ACCEPTANCE {:>2} [{}]: {} - {}",
        num,
        name,
        if pass { "PASS" } else { "FAIL" },
        detail
    );
    assert!(pass, "criterion {} failed: {}", num, detail);
}

/// Brute-force minimal-unit oracle, recomputed in-suite.
fn brute_force_fundamental_unit(d: i64) -> QuadInt {
    let step = if d % 4 == 1 { 1i64 } else { 2 };
    let mut b: i64 = step;
    loop {
        for norm4 in [-4i64, 4] {
            let rhs = BigInt::from(d) * b * b + norm4;
            if rhs < BigInt::from(0) {
                continue;
            }
            let a = rhs.sqrt();
            if &a * &a == rhs {
                return QuadInt::new(d, a, b).expect("valid coordinates");
            }
        }
        b += step;
    }
}

#[test]
fn criterion_01_fundamental_units() {
    let start = Instant::now();
    let expected: [(i64, i64, i64); 8] = [
        (2, 2, 2),   // 1 + sqrt 2
        (3, 4, 2),   // 2 + sqrt 3
        (5, 1, 1),   // (1 + sqrt 5)/2
        (6, 10, 4),  // 5 + 2 sqrt 6
        (7, 16, 6),  // 8 + 3 sqrt 7
        (10, 6, 2),  // 3 + sqrt 10
        (11, 20, 6), // 10 + 3 sqrt 11
        (13, 3, 1),  // (3 + sqrt 13)/2
    ];
    let mut pass = true;
    let mut detail = String::new();
    for (d, a, b) in expected {
        let f = make_field(d).unwrap();
        let oracle = brute_force_fundamental_unit(d);
        let literal = QuadInt::new(d, a, b).unwrap();
        if f.eta() != &oracle || f.eta() != &literal {
            pass = false;
            detail.push_str(&format!("d={} got {} ", d, f.eta()));
        }
    }
    let elapsed = start.elapsed();
    if elapsed.as_secs_f64() >= 1.0 {
        pass = false;
        detail.push_str(&format!("runtime {:?} >= 1 s", elapsed));
    }
    if detail.is_empty() {
        detail = format!("8 fields match the brute-force oracle in {:?}", elapsed);
    }
    report(1, "fundamental units", pass, &detail);
}

#[test]
fn criterion_02_exact_counts() {
    let start = Instant::now();
    let f2 = make_field(2).unwrap();
    let f5 = make_field(5).unwrap();
    let cases: [(&quadunits::FieldDescriptor, usize, i64, Mode, u64); 5] = [
        (&f2, 2, 10, Mode::Exactly, 5),
        (&f2, 2, 10, Mode::AtMost, 7),
        // The exhaustive oracle gives 11 here: {0,+-1,+-2,+-3,+-4,+-7}.
        (&f5, 2, 10, Mode::Exactly, 11),
        (&f2, 2, 1_000_000, Mode::Exactly, 31),
        (&f2, 2, 1_000_000, Mode::AtMost, 33),
    ];
    let mut pass = true;
    let mut detail = String::new();
    for (f, k, x, mode, want) in cases {
        let (got, cert) = sums_of_units::count(f, k, x, mode, &cfg());
        if got != want || !cert.stable {
            pass = false;
            detail.push_str(&format!(
                "d={} k={} X={} {}: got {} (stable {}), want {} ",
                f.d(),
                k,
                x,
                mode,
                got,
                cert.stable,
                want
            ));
        }
    }
    let elapsed = start.elapsed();
    if elapsed.as_secs_f64() >= 10.0 {
        pass = false;
        detail.push_str(&format!("runtime {:?} >= 10 s", elapsed));
    }
    if detail.is_empty() {
        detail = format!("5/7/11/31/33 all exact with stable certificates in {:?}", elapsed);
    }
    report(2, "exact counts", pass, &detail);
}

#[test]
fn criterion_03_main_term_trend_k2() {
    let f2 = make_field(2).unwrap();
    let pred6 = asymptotics::predict_count(&f2, 2, 1_000_000, Mode::Exactly).value;
    let (exact6, _) = sums_of_units::count(&f2, 2, 1_000_000, Mode::Exactly, &cfg());
    let clause_a = (exact6 as f64 - pred6).abs() <= 2.0;

    let grid = [100i64, 10_000, 1_000_000, 100_000_000];
    let rows = asymptotics::comparison_report(&f2, 2, &grid, Mode::Exactly, &cfg());
    let devs: Vec<f64> = rows.iter().map(|r| (r.ratio - 1.0).abs()).collect();
    let non_increasing = devs.windows(2).filter(|w| w[1] <= w[0]).count();
    let clause_b = non_increasing >= 2;

    let detail = format!(
        "|{} - {:.3}| <= 2: {}; |ratio-1| over grid = [{:.5}, {:.5}, {:.5}, {:.5}], \
         non-increasing in {}/3 steps (need >= 2): {}",
        exact6, pred6, clause_a, devs[0], devs[1], devs[2], devs[3], non_increasing, clause_b
    );
    report(3, "main-term trend k=2", clause_a && clause_b, &detail);
}

#[test]
fn criterion_04_higher_k_trend() {
    let start = Instant::now();
    let f2 = make_field(2).unwrap();
    let (exact4, cert4) = sums_of_units::count(&f2, 4, 10_000, Mode::Exactly, &cfg());
    let pred4 = asymptotics::predict_count(&f2, 4, 10_000, Mode::Exactly).value;
    let in_band = exact4 as f64 >= 0.5 * pred4 && exact4 as f64 <= 1.5 * pred4;

    let (exact_low, _) = sums_of_units::count(&f2, 4, 100, Mode::Exactly, &cfg());
    let pred_low = asymptotics::predict_count(&f2, 4, 100, Mode::Exactly).value;
    let (exact_high, _) = sums_of_units::count(&f2, 4, 1_000_000, Mode::Exactly, &cfg());
    let pred_high = asymptotics::predict_count(&f2, 4, 1_000_000, Mode::Exactly).value;
    let dev_low = (exact_low as f64 / pred_low - 1.0).abs();
    let dev_high = (exact_high as f64 / pred_high - 1.0).abs();
    let closer = dev_high < dev_low;

    let elapsed = start.elapsed();
    let pass = in_band && closer && cert4.stable && elapsed.as_secs_f64() < 300.0;
    let detail = format!(
        "exact(1e4)={} vs predicted {:.1} (band [{:.1}, {:.1}]): {}; \
         |ratio-1| at 1e6 = {:.4} < {:.4} at 1e2: {}; runtime {:?}",
        exact4,
        pred4,
        0.5 * pred4,
        1.5 * pred4,
        in_band,
        dev_high,
        dev_low,
        closer,
        elapsed
    );
    report(4, "higher k trend", pass, &detail);
}

#[test]
fn criterion_05_unit_equation() {
    let start = Instant::now();
    let f2 = make_field(2).unwrap();
    let (s2, cert2) = unit_equation::enumerate_unit_equation_solutions(&f2, 2, &cfg());
    let f5 = make_field(5).unwrap();
    let (s5, cert5) = unit_equation::enumerate_unit_equation_solutions(&f5, 2, &cfg());

    let mut pass = s2.is_empty() && cert2.stable && s5.len() == 6 && cert5.stable;
    let mut detail = format!(
        "S_2(d=2) = {} tuples (stable {}), S_2(d=5) = {} tuples (stable {})",
        s2.len(),
        cert2.stable,
        s5.len(),
        cert5.stable
    );
    for sol in &s5 {
        let resums = sol.sum() == QuadInt::one(5);
        let nondeg = sol.is_subsum_free().unwrap();
        if !resums || !nondeg {
            pass = false;
            detail.push_str(" re-check failed");
        }
    }
    let elapsed = start.elapsed();
    if elapsed.as_secs_f64() >= 10.0 {
        pass = false;
    }
    detail.push_str(&format!("; re-sums and non-degeneracy verified in {:?}", elapsed));
    report(5, "unit equation", pass, &detail);
}

#[test]
fn criterion_06_non_uniqueness_bound() {
    let f2 = make_field(2).unwrap();
    let mut pass = true;
    let mut counts = Vec::new();
    for x in [100i64, 10_000, 1_000_000] {
        let (c, cert) = sums_of_units::count_non_unique(&f2, 2, x, &cfg());
        counts.push(c);
        if c != 2 || !cert.stable {
            pass = false;
        }
    }
    let f5 = make_field(5).unwrap();
    let (c5, cert5) = sums_of_units::count_non_unique(&f5, 2, 10, &cfg());
    if c5 != 4 || !cert5.stable {
        pass = false;
    }
    let detail = format!(
        "d=2 counts over X in {{1e2,1e4,1e6}} = {:?} (want all 2); d=5 at X=10: {} (want 4)",
        counts, c5
    );
    report(6, "non-uniqueness bound", pass, &detail);
}

#[test]
fn criterion_07_trace_sum_residual_band() {
    let f2 = make_field(2).unwrap();
    let mut residuals = Vec::new();
    for x in [100i64, 1_000, 10_000, 100_000, 1_000_000] {
        let q = TraceSumQuery::with_unit_coefficients(&f2, 1, x).unwrap();
        let (count, cert) = trace_sums::count_trace_sums(&q, &cfg());
        assert!(cert.stable);
        let pred = trace_sums::predict_trace_sums(&f2, 1, x).value;
        residuals.push(count as f64 - pred);
    }
    let band = residuals.iter().cloned().fold(f64::MIN, f64::max)
        - residuals.iter().cloned().fold(f64::MAX, f64::min);
    let pass = band <= 4.0;
    let detail = format!("signed residuals {:?}, band width {:.3} (need <= 4)", residuals, band);
    report(7, "trace-sum residual band", pass, &detail);
}

#[test]
fn criterion_08_reduction_algorithm() {
    let mut total = 0usize;
    let mut ok = 0usize;
    let mut detail = String::new();
    for d in [2i64, 5] {
        let f = make_field(d).unwrap();
        let (classes, cert) = sums_of_units::representation_classes(&f, 4, 1_000, &cfg());
        assert!(cert.stable);
        let mut reducer = Reducer::new(&f, &cfg());
        for class in &classes {
            total += 1;
            let tuple = class.as_tuple();
            let red = match reducer.reduce(&tuple) {
                Ok(r) => r,
                Err(e) => {
                    detail.push_str(&format!("d={} n={}: {} ", d, class.value(), e));
                    continue;
                }
            };
            let combined = red.combined();
            let sum_ok = combined.sum().as_integer() == Some(BigInt::from(class.value()));
            let len_ok = 2 * red.ell() + red.s() <= class.len();
            let free_ok = combined.is_empty() || combined.is_subsum_free().unwrap();
            let xi_ok = red.s() != 1 || {
                let xi = &red.xi.coords()[0];
                xi == &QuadInt::one(d) || xi == &(-&QuadInt::one(d))
            };
            if sum_ok && len_ok && free_ok && xi_ok {
                ok += 1;
            } else {
                detail.push_str(&format!(
                    "d={} n={}: sum {} len {} free {} xi {} ",
                    d, class.value(), sum_ok, len_ok, free_ok, xi_ok
                ));
            }
        }
    }
    let pass = ok == total && total > 0;
    report(
        8,
        "reduction algorithm",
        pass,
        &format!("{}/{} reductions verified (d in {{2,5}}, k <= 4, |n| <= 1000) {}", ok, total, detail),
    );
}

#[test]
fn criterion_09_local_solubility_agreement() {
    let start = Instant::now();
    let mut total = 0usize;
    let mut agree = 0usize;
    for d in [2i64, 3, 5, 13, 17] {
        let f = make_field(d).unwrap();
        for k in 2..=4i64 {
            for n in -8..=8i64 {
                for p in [2u64, 3, 5] {
                    let depth = if p == 2 { 3 } else { 2 };
                    let chk = local_solubility::verify_by_residue_search(&f, k, n, p, depth)
                        .expect("within budget");
                    total += 1;
                    if chk.consistent {
                        agree += 1;
                    }
                }
            }
        }
    }
    let elapsed = start.elapsed();
    let pass = agree == total && elapsed.as_secs_f64() < 60.0;
    report(
        9,
        "local solubility",
        pass,
        &format!("{}/{} decisions agree with residue search in {:?}", agree, total, elapsed),
    );
}

#[test]
fn criterion_10_properties_and_determinism() {
    // Randomised negation symmetry and mode monotonicity.
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let squarefree = [2i64, 3, 5, 6, 7, 10, 11, 13, 17, 21];
    let mut pass = true;
    let mut detail = String::new();
    for _ in 0..8 {
        let d = squarefree[rng.gen_range(0..squarefree.len())];
        let k = rng.gen_range(1..=3usize);
        let x = rng.gen_range(10..=150i64);
        let f = make_field(d).unwrap();
        for mode in [Mode::Exactly, Mode::AtMost] {
            let vs = sums_of_units::value_set(&f, k, x, mode, &cfg());
            let set: BTreeSet<i64> = vs.values.iter().copied().collect();
            if !set.iter().all(|&n| set.contains(&-n)) {
                pass = false;
                detail.push_str(&format!("negation broken d={} k={} X={} ", d, k, x));
            }
        }
        let a: BTreeSet<i64> =
            sums_of_units::value_set(&f, k, x, Mode::AtMost, &cfg()).values.into_iter().collect();
        let b: BTreeSet<i64> = sums_of_units::value_set(&f, k + 1, x, Mode::AtMost, &cfg())
            .values
            .into_iter()
            .collect();
        if !a.is_subset(&b) {
            pass = false;
            detail.push_str(&format!("monotonicity broken d={} k={} ", d, k));
        }
    }

    // Canonicalisation idempotence on random unit tuples.
    for _ in 0..20 {
        let d = squarefree[rng.gen_range(0..squarefree.len())];
        let f = make_field(d).unwrap();
        let len = rng.gen_range(1..=5usize);
        let coords: Vec<QuadInt> = (0..len)
            .map(|_| {
                let m = rng.gen_range(-6..=6i64);
                let sign = if rng.gen_bool(0.5) { 1i8 } else { -1 };
                f.unit_from_exponent(quadunits::UnitExponent::new(sign, m))
            })
            .collect();
        let t = UnitTuple::new(&f, coords).unwrap();
        let c1 = sums_of_units::canonicalize(&t);
        if sums_of_units::canonicalize(&c1) != c1 {
            pass = false;
            detail.push_str("canonicalize not idempotent ");
        }
    }

    // Byte-identical CLI output regardless of --threads.
    let bin = env!("CARGO_BIN_EXE_quadunits");
    let base = [
        "compare", "--d", "2", "--k", "2", "--grid", "100,10000,1000000", "--mode", "exactly",
        "--format", "csv",
    ];
    let run = |threads: &str| {
        Command::new(bin)
            .args(base)
            .args(["--threads", threads])
            .output()
            .expect("binary runs")
    };
    let out1 = run("1");
    let out8 = run("8");
    if out1.stdout != out8.stdout || out1.status.code() != out8.status.code() {
        pass = false;
        detail.push_str("CLI output differs across --threads ");
    }
    if detail.is_empty() {
        detail = "negation symmetry, monotonicity, idempotence, thread determinism".to_string();
    }
    report(10, "properties and determinism", pass, &detail);
}
