//! Fundamental units of the first real quadratic fields, computed by the
//! continued fraction of sqrt(d) (or (1+sqrt(d))/2), with norm, splitting
//! of 2 and a certified logarithm.
//!
//! Run with: cargo run --example fundamental_units

use quadunits::make_field;

fn main() {
    println!(
        "{:>4} {:>6} {:>22} {:>6} {:>10} {:>16}",
        "d", "disc", "eta", "norm", "2 is", "log eta"
    );
    for d in 2..=30i64 {
        let f = match make_field(d) {
            Ok(f) => f,
            Err(_) => continue, // skips non-squarefree d
        };
        println!(
            "{:>4} {:>6} {:>22} {:>6} {:>10} {:>16.12}",
            f.d(),
            f.discriminant(),
            f.eta().to_string(),
            f.eta_norm(),
            f.two_splitting().to_string(),
            f.log_eta().to_f64()
        );
    }

    // The certified log comes with an explicit error bound.
    let f = make_field(2).unwrap();
    let l = f.approx_log_eta(128);
    println!(
        "\nlog eta for d=2 at 128 bits: {:.15} (error <= 2^{})",
        l.to_f64(),
        l.error_exp()
    );
}
