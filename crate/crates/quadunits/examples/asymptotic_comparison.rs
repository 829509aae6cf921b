//! Exact counts against the predicted main term over a geometric grid.
//!
//! Run with: cargo run --release --example asymptotic_comparison

use quadunits::asymptotics::{comparison_report, leading_constant};
use quadunits::sums_of_units::Mode;
use quadunits::{make_field, BoundConfig};

fn main() {
    let cfg = BoundConfig::default();
    let f = make_field(2).unwrap();

    for (k, grid) in [
        (2usize, vec![100i64, 10_000, 1_000_000, 100_000_000]),
        (4, vec![100, 10_000, 1_000_000]),
    ] {
        println!(
            "d=2, k={}, exactly: leading constant {}",
            k,
            leading_constant(k, Mode::Exactly)
        );
        println!("{:>12} {:>8} {:>12} {:>10}", "X", "exact", "predicted", "ratio");
        for row in comparison_report(&f, k, &grid, Mode::Exactly, &cfg) {
            println!(
                "{:>12} {:>8} {:>12.3} {:>10.6}",
                row.x, row.exact, row.predicted, row.ratio
            );
        }
        println!("(error-term constants are not explicit; judge the trend)\n");
    }
}
