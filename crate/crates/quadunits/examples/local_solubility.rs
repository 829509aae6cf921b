//! Local solubility of u_1 + ... + u_k = n at every prime, with residue
//! witnesses, checked against brute-force search in (Z/p^depth)[omega].
//!
//! Run with: cargo run --example local_solubility

use quadunits::local_solubility::{everywhere_locally_soluble, local_decision, verify_by_residue_search};
use quadunits::make_field;

fn main() {
    for d in [2i64, 5] {
        let f = make_field(d).unwrap();
        println!("== Q(sqrt({})), 2 is {} ==", d, f.two_splitting());
        println!("  k=2: everywhere locally soluble n in [-4, 4]:");
        let soluble: Vec<i64> = (-4..=4)
            .filter(|&n| everywhere_locally_soluble(&f, 2, n).unwrap())
            .collect();
        println!("    {:?}", soluble);

        let dec = local_decision(&f, 2, 3, 2).unwrap();
        println!(
            "  decision for n=3 at p=2: soluble={} ({})",
            dec.soluble, dec.reason
        );
        if let (Some(w), Some(m)) = (&dec.witness, dec.witness_modulus) {
            let parts: Vec<String> = w.iter().map(|&(x, y)| format!("{}+{}w", x, y)).collect();
            println!("    witness mod {}: {}", m, parts.join(", "));
        }

        // Cross-check the decision by exhaustive residue search.
        for p in [2u64, 3, 5] {
            let depth = if p == 2 { 3 } else { 2 };
            let chk = verify_by_residue_search(&f, 2, 3, p, depth).unwrap();
            println!(
                "  residue search p={} mod {}: solutions={} consistent={}",
                p, chk.modulus, chk.solutions_exist, chk.consistent
            );
        }
    }
}
