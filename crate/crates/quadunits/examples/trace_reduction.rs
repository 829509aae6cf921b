//! Representation classes of small integers and their constructive
//! reduction to the trace form (v, v', xi).
//!
//! Run with: cargo run --example trace_reduction

use quadunits::sums_of_units::{enumerate_representations, Reducer};
use quadunits::{make_field, BoundConfig};

fn main() {
    let cfg = BoundConfig::default();
    for (d, targets) in [(2i64, vec![2i64, 3, 6]), (5, vec![1, 2, 4])] {
        let f = make_field(d).unwrap();
        let mut reducer = Reducer::new(&f, &cfg);
        println!("== Q(sqrt({})) ==", d);
        for n in targets {
            let (classes, _) = enumerate_representations(&f, n, 3, &cfg);
            println!("  n = {}: {} classes", n, classes.len());
            for c in &classes {
                let coords: Vec<String> =
                    c.canonical_coords().iter().map(|q| q.to_string()).collect();
                let red = reducer.reduce(&c.as_tuple()).expect("reduction succeeds");
                let v: Vec<String> = red.v.coords().iter().map(|q| q.to_string()).collect();
                let xi: Vec<String> = red.xi.coords().iter().map(|q| q.to_string()).collect();
                println!(
                    "    [{}] ({})  ->  ell={} v=({}) xi=({})",
                    c.shape(),
                    coords.join(", "),
                    red.ell(),
                    v.join(", "),
                    xi.join(", ")
                );
            }
        }
    }
}
