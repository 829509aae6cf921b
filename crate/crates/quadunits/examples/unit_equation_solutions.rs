//! Non-degenerate solutions of the unit equation v_1 + ... + v_T = 1,
//! the derived chain of exceptional coefficient sets, and the lengths of
//! minimal vanishing unit sums.
//!
//! Run with: cargo run --example unit_equation_solutions

use quadunits::unit_equation::{
    build_exceptional_sets, enumerate_unit_equation_solutions, is_exceptional,
    vanishing_sum_profile,
};
use quadunits::{make_field, BoundConfig};

fn main() {
    let cfg = BoundConfig::default();

    for d in [2i64, 5] {
        let f = make_field(d).unwrap();
        println!("== Q(sqrt({})) ==", d);
        for t in 1..=3usize {
            let (sols, cert) = enumerate_unit_equation_solutions(&f, t, &cfg);
            println!(
                "  T={}: {} ordered solutions (bound {}, stable {})",
                t,
                sols.len(),
                cert.final_bound,
                cert.stable
            );
            for s in sols.iter().take(6) {
                let coords: Vec<String> = s.coords().iter().map(|c| c.to_string()).collect();
                println!("       ({})", coords.join(", "));
            }
        }

        let (profile, _) = vanishing_sum_profile(&f, 5, &cfg);
        println!("  minimal vanishing sum lengths up to 5: {:?}", profile);

        let (sets, _) = build_exceptional_sets(&f, 3, &cfg);
        for (t, set) in sets.iter().enumerate() {
            println!("  |U_{}| = {}", t, set.len());
        }
    }

    println!("\nfields with 1 = unit + unit, d <= 30:");
    for d in 2..=30i64 {
        if let Ok(f) = make_field(d) {
            if is_exceptional(&f) {
                println!("  d = {}", d);
            }
        }
    }
}
