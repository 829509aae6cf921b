//! Integers expressible as sums of exactly / at most k units, with the
//! stability certificate that backs each enumeration.
//!
//! Run with: cargo run --example value_sets

use quadunits::sums_of_units::{value_set, Mode};
use quadunits::{make_field, BoundConfig};

fn main() {
    let cfg = BoundConfig::default();
    let f = make_field(2).unwrap();

    for k in 1..=4usize {
        for mode in [Mode::Exactly, Mode::AtMost] {
            let vs = value_set(&f, k, 100, mode, &cfg);
            println!(
                "d=2 k={} {:<8} |values| = {:>3} (bound {}, stable {})",
                k,
                mode.to_string(),
                vs.values.len(),
                vs.certificate.final_bound,
                vs.certificate.stable
            );
            if k <= 2 {
                println!("    {:?}", vs.values);
            }
        }
    }

    // d = 5 admits odd-length vanishing sums (phi + phi' - 1 = 0), so the
    // exactly-k sets mix parities.
    let f5 = make_field(5).unwrap();
    let vs = value_set(&f5, 3, 30, Mode::Exactly, &cfg);
    println!("\nd=5 k=3 exactly, X=30: {:?}", vs.values);
}
