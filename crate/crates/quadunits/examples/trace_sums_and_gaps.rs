//! The trace-sum counting function against its predicted main term, and
//! empirical lower bounds for the gap constant of subsum-free power
//! combinations.
//!
//! Run with: cargo run --example trace_sums_and_gaps

use quadunits::trace_sums::{count_trace_sums, gap_constant_estimate, predict_trace_sums, TraceSumQuery};
use quadunits::{make_field, BoundConfig, QuadInt};

fn main() {
    let cfg = BoundConfig::default();
    let f = make_field(2).unwrap();

    println!("d=2, ell=1, all-ones coefficients:");
    println!("{:>10} {:>8} {:>12} {:>10}", "X", "count", "predicted", "residual");
    for x in [100i64, 1_000, 10_000, 100_000, 1_000_000] {
        let q = TraceSumQuery::with_unit_coefficients(&f, 1, x).unwrap();
        let (count, _) = count_trace_sums(&q, &cfg);
        let pred = predict_trace_sums(&f, 1, x).value;
        println!("{:>10} {:>8} {:>12.4} {:>10.4}", x, count, pred, count as f64 - pred);
    }

    println!("\ngap-constant lower bounds (d=2, depth 10):");
    let one = QuadInt::one(2);
    let minus_one = QuadInt::from_integer(2, -1);
    for (label, coeffs) in [
        ("c = (1)", vec![one.clone()]),
        ("c = (1, -1)", vec![one.clone(), minus_one.clone()]),
        ("c = (1, 1)", vec![one.clone(), one.clone()]),
        ("c = (1, 1, -1)", vec![one.clone(), one.clone(), minus_one]),
    ] {
        let est = gap_constant_estimate(&f, &coeffs, 10);
        let approx = est.lower_bound.numer().to_string().parse::<f64>().unwrap()
            / est.lower_bound.denom().to_string().parse::<f64>().unwrap();
        println!(
            "  {:<14} >= {:.10}  ({} admissible patterns at depth {})",
            label, approx, est.admissible_patterns, est.depth
        );
    }
}
