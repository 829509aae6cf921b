//! Command-line front end: one subcommand per library capability, with
//! byte-deterministic `json` / `csv` / `table` output.
//!
//! Exit codes: 0 on success, 1 on input errors, 2 when a result carries an
//! unstable search certificate (the result is still printed).

use std::fmt::Write as _;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::asymptotics::{self, ComparisonRow};
use crate::local_solubility::{self, LocalDecision};
use crate::quadfield::{make_field, FieldDescriptor, QuadInt};
use crate::sums_of_units::{self, Mode};
use crate::trace_sums::{self, TraceSumQuery};
use crate::unit_equation::{self, BoundConfig, StabilityCertificate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Exactly,
    #[value(name = "at_most")]
    AtMost,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Exactly => Mode::Exactly,
            ModeArg::AtMost => Mode::AtMost,
        }
    }
}

#[derive(Debug, Args)]
struct SearchOpts {
    /// Initial exponent search bound.
    #[arg(long = "bound", default_value_t = 20)]
    bound: i64,
    /// Width of the stability window.
    #[arg(long = "stability-window", default_value_t = 5)]
    stability_window: i64,
    /// Hard cap on the exponent bound.
    #[arg(long = "bound-cap", default_value_t = 60)]
    bound_cap: i64,
}

impl SearchOpts {
    fn config(&self) -> Result<BoundConfig, String> {
        BoundConfig::new(self.bound, self.stability_window, self.bound_cap)
            .map_err(|e| e.to_string())
    }
}

#[derive(Debug, Args)]
struct OutputOpts {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Worker threads; never changes any output byte.
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

#[derive(Debug, Parser)]
#[command(
    name = "quadunits",
    about = "Sums of units in real quadratic fields: exact counts, predictions, local solubility",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Field data: fundamental unit, splitting of 2, log eta.
    Field {
        #[arg(long)]
        d: i64,
        /// Bits of certified precision for log eta.
        #[arg(long = "precision-bits", default_value_t = 64)]
        precision_bits: u32,
        #[command(flatten)]
        out: OutputOpts,
    },
    /// Non-degenerate solutions of v_1 + ... + v_T = 1.
    UnitEq {
        #[arg(long)]
        d: i64,
        #[arg(long = "T")]
        t: usize,
        #[command(flatten)]
        search: SearchOpts,
        #[command(flatten)]
        out: OutputOpts,
    },
    /// Whether 1 is a sum of two units.
    Exceptional {
        #[arg(long)]
        d: i64,
        #[command(flatten)]
        out: OutputOpts,
    },
    /// Count unit tuples with bounded trace sums (all-ones coefficients).
    TraceCount {
        #[arg(long)]
        d: i64,
        #[arg(long, default_value_t = 1)]
        ell: usize,
        #[arg(long = "X")]
        x: i64,
        #[command(flatten)]
        search: SearchOpts,
        #[command(flatten)]
        out: OutputOpts,
    },
    /// The integers |n| <= X that are sums of exactly / at most k units.
    Values {
        #[arg(long)]
        d: i64,
        #[arg(long)]
        k: usize,
        #[arg(long = "X")]
        x: i64,
        #[arg(long, value_enum, default_value_t = ModeArg::Exactly)]
        mode: ModeArg,
        #[command(flatten)]
        search: SearchOpts,
        #[command(flatten)]
        out: OutputOpts,
    },
    /// Cardinality of the value set.
    Count {
        #[arg(long)]
        d: i64,
        #[arg(long)]
        k: usize,
        #[arg(long = "X")]
        x: i64,
        #[arg(long, value_enum, default_value_t = ModeArg::Exactly)]
        mode: ModeArg,
        #[command(flatten)]
        search: SearchOpts,
        #[command(flatten)]
        out: OutputOpts,
    },
    /// Representation classes of one integer.
    Reps {
        #[arg(long)]
        d: i64,
        #[arg(long)]
        n: i64,
        #[arg(long)]
        k: usize,
        #[command(flatten)]
        search: SearchOpts,
        #[command(flatten)]
        out: OutputOpts,
    },
    /// Reduce each representation of n to (v, v', xi) trace form.
    Reduce {
        #[arg(long)]
        d: i64,
        #[arg(long)]
        n: i64,
        #[arg(long)]
        k: usize,
        #[command(flatten)]
        search: SearchOpts,
        #[command(flatten)]
        out: OutputOpts,
    },
    /// Number of integers with several inequivalent representations.
    NonUnique {
        #[arg(long)]
        d: i64,
        #[arg(long)]
        k: usize,
        #[arg(long = "X")]
        x: i64,
        #[command(flatten)]
        search: SearchOpts,
        #[command(flatten)]
        out: OutputOpts,
    },
    /// Predicted main-term count.
    Predict {
        #[arg(long)]
        d: i64,
        #[arg(long)]
        k: usize,
        #[arg(long = "X")]
        x: i64,
        #[arg(long, value_enum, default_value_t = ModeArg::Exactly)]
        mode: ModeArg,
        #[command(flatten)]
        out: OutputOpts,
    },
    /// Exact counts against predictions over an X grid.
    Compare {
        #[arg(long)]
        d: i64,
        #[arg(long)]
        k: usize,
        /// Comma-separated ascending X values.
        #[arg(long, value_delimiter = ',')]
        grid: Vec<i64>,
        #[arg(long, value_enum, default_value_t = ModeArg::Exactly)]
        mode: ModeArg,
        #[command(flatten)]
        search: SearchOpts,
        #[command(flatten)]
        out: OutputOpts,
    },
    /// Local solubility of u_1 + ... + u_k = n (all primes, or one --p).
    Local {
        #[arg(long)]
        d: i64,
        #[arg(long)]
        k: i64,
        #[arg(long)]
        n: i64,
        #[arg(long)]
        p: Option<u64>,
        #[command(flatten)]
        out: OutputOpts,
    },
    /// Check a local decision by brute-force residue search.
    LocalVerify {
        #[arg(long)]
        d: i64,
        #[arg(long)]
        k: i64,
        #[arg(long)]
        n: i64,
        #[arg(long)]
        p: u64,
        #[command(flatten)]
        out: OutputOpts,
    },
}

/// Entry point for the binary; returns the process exit code.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{}", e);
                    0
                }
                _ => {
                    eprintln!("{}", e);
                    1
                }
            };
        }
    };
    match run(cli.command) {
        Ok(unstable) => {
            if unstable {
                eprintln!("warning: search bound cap reached before stabilisation (exit 2)");
                2
            } else {
                0
            }
        }
        Err(msg) => {
            eprintln!("error: {}", msg);
            1
        }
    }
}

fn field_for(d: i64) -> Result<FieldDescriptor, String> {
    make_field(d).map_err(|e| e.to_string())
}

fn check_k_x(k: usize, x: i64) -> Result<(), String> {
    if k < 1 {
        return Err("need k >= 1".into());
    }
    if x < 1 {
        return Err("need X >= 1".into());
    }
    Ok(())
}

/// Twelve significant digits, plain decimal notation.
fn fmt_sig(x: f64) -> String {
    const SIG: i32 = 12;
    if x == 0.0 || !x.is_finite() {
        return format!("{:.*}", (SIG - 1) as usize, 0.0);
    }
    let mag = x.abs().log10().floor() as i32;
    let decimals = (SIG - 1 - mag).max(0) as usize;
    format!("{:.*}", decimals, x)
}

// Minimal ordered-field JSON writer; all strings here are plain ASCII
// identifiers and numeric literals, so no escaping is needed.
enum J {
    I(i64),
    U(u64),
    F(f64),
    B(bool),
    S(String),
    A(Vec<J>),
    O(Vec<(&'static str, J)>),
}

impl J {
    fn render(&self, buf: &mut String) {
        match self {
            J::I(v) => {
                let _ = write!(buf, "{}", v);
            }
            J::U(v) => {
                let _ = write!(buf, "{}", v);
            }
            J::F(v) => {
                let _ = write!(buf, "{}", fmt_sig(*v));
            }
            J::B(v) => {
                let _ = write!(buf, "{}", v);
            }
            J::S(v) => {
                let _ = write!(buf, "\"{}\"", v);
            }
            J::A(items) => {
                buf.push('[');
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        buf.push(',');
                    }
                    item.render(buf);
                }
                buf.push(']');
            }
            J::O(fields) => {
                buf.push('{');
                for (i, (k, v)) in fields.iter().enumerate() {
                    if i > 0 {
                        buf.push(',');
                    }
                    let _ = write!(buf, "\"{}\":", k);
                    v.render(buf);
                }
                buf.push('}');
            }
        }
    }

    fn print(&self) {
        let mut buf = String::new();
        self.render(&mut buf);
        println!("{}", buf);
    }
}

fn cert_fields(cert: &StabilityCertificate) -> Vec<(&'static str, J)> {
    vec![
        ("final_bound", J::I(cert.final_bound)),
        ("window_checked", J::I(cert.window_checked)),
        ("stable", J::B(cert.stable)),
    ]
}

fn coords_literal(coords: &[QuadInt]) -> String {
    coords.iter().map(QuadInt::csv_literal).collect::<Vec<_>>().join(";")
}

fn run(cmd: Command) -> Result<bool, String> {
    match cmd {
        Command::Field { d, precision_bits, out } => {
            if precision_bits < 32 {
                return Err("precision-bits must be at least 32".into());
            }
            let f = field_for(d)?;
            let log_eta = f.approx_log_eta(precision_bits);
            let eta_a = f.eta().half_a().to_string();
            let eta_b = f.eta().half_b().to_string();
            match out.format {
                Format::Json => J::O(vec![
                    ("d", J::I(f.d())),
                    ("discriminant", J::I(f.discriminant())),
                    (
                        "eta",
                        J::O(vec![("a", J::S(eta_a.clone())), ("b", J::S(eta_b.clone()))]),
                    ),
                    ("eta_norm", J::I(f.eta_norm() as i64)),
                    ("two_splitting", J::S(f.two_splitting().to_string())),
                    ("log_eta", J::F(log_eta.to_f64())),
                ])
                .print(),
                Format::Csv => println!(
                    "{},{},{},{},{},{},{}",
                    f.d(),
                    f.discriminant(),
                    eta_a,
                    eta_b,
                    f.eta_norm(),
                    f.two_splitting(),
                    fmt_sig(log_eta.to_f64())
                ),
                Format::Table => {
                    println!("d:             {}", f.d());
                    println!("discriminant:  {}", f.discriminant());
                    println!("eta:           {}", f.eta());
                    println!("eta_norm:      {}", f.eta_norm());
                    println!("two_splitting: {}", f.two_splitting());
                    println!("log_eta:       {}", fmt_sig(log_eta.to_f64()));
                }
            }
            Ok(false)
        }

        Command::UnitEq { d, t, search, out } => {
            if t < 1 {
                return Err("need T >= 1".into());
            }
            let f = field_for(d)?;
            let cfg = search.config()?;
            let (sols, cert) = unit_equation::enumerate_unit_equation_solutions(&f, t, &cfg);
            match out.format {
                Format::Json => J::O(
                    vec![
                        ("d", J::I(d)),
                        ("T", J::U(t as u64)),
                        (
                            "solutions",
                            J::A(
                                sols.iter()
                                    .map(|s| {
                                        J::A(
                                            s.coords()
                                                .iter()
                                                .map(|c| J::S(c.csv_literal()))
                                                .collect(),
                                        )
                                    })
                                    .collect(),
                            ),
                        ),
                    ]
                    .into_iter()
                    .chain(cert_fields(&cert))
                    .collect(),
                )
                .print(),
                Format::Csv => {
                    for s in &sols {
                        println!("{}", coords_literal(s.coords()));
                    }
                }
                Format::Table => {
                    println!("solutions of v_1 + ... + v_{} = 1 over Q(sqrt({})): {}", t, d, sols.len());
                    for s in &sols {
                        let parts: Vec<String> =
                            s.coords().iter().map(|c| c.to_string()).collect();
                        println!("  ({})", parts.join(", "));
                    }
                    println!(
                        "certificate: final_bound={} window={} stable={}",
                        cert.final_bound, cert.window_checked, cert.stable
                    );
                }
            }
            Ok(!cert.stable)
        }

        Command::Exceptional { d, out } => {
            let f = field_for(d)?;
            let ex = unit_equation::is_exceptional(&f);
            match out.format {
                Format::Json => J::O(vec![("d", J::I(d)), ("exceptional", J::B(ex))]).print(),
                Format::Csv => println!("{},{}", d, ex),
                Format::Table => println!(
                    "Q(sqrt({})) is {}exceptional: 1 {} a sum of two units",
                    d,
                    if ex { "" } else { "not " },
                    if ex { "is" } else { "is not" }
                ),
            }
            Ok(false)
        }

        Command::TraceCount { d, ell, x, search, out } => {
            if ell < 1 {
                return Err("need ell >= 1".into());
            }
            let f = field_for(d)?;
            let cfg = search.config()?;
            let query =
                TraceSumQuery::with_unit_coefficients(&f, ell, x).map_err(|e| e.to_string())?;
            let (count, cert) = trace_sums::count_trace_sums(&query, &cfg);
            let predicted = trace_sums::predict_trace_sums(&f, ell, x.max(2)).value;
            match out.format {
                Format::Json => J::O(
                    vec![
                        ("d", J::I(d)),
                        ("ell", J::U(ell as u64)),
                        ("X", J::I(x)),
                        ("count", J::U(count)),
                        ("predicted", J::F(predicted)),
                    ]
                    .into_iter()
                    .chain(cert_fields(&cert))
                    .collect(),
                )
                .print(),
                Format::Csv => println!("{},{},{},{}", x, count, fmt_sig(predicted), cert.stable),
                Format::Table => {
                    println!("trace-sum count (d={}, ell={}, X={}): {}", d, ell, x, count);
                    println!("predicted main term: {}", fmt_sig(predicted));
                    println!(
                        "certificate: final_bound={} window={} stable={}",
                        cert.final_bound, cert.window_checked, cert.stable
                    );
                }
            }
            Ok(!cert.stable)
        }

        Command::Values { d, k, x, mode, search, out } => {
            check_k_x(k, x)?;
            let f = field_for(d)?;
            let cfg = search.config()?;
            let vs = sums_of_units::value_set(&f, k, x, mode.into(), &cfg);
            match out.format {
                Format::Json => J::O(
                    vec![
                        ("d", J::I(d)),
                        ("k", J::U(k as u64)),
                        ("X", J::I(x)),
                        ("mode", J::S(vs.mode.to_string())),
                        ("values", J::A(vs.values.iter().map(|&v| J::I(v)).collect())),
                    ]
                    .into_iter()
                    .chain(cert_fields(&vs.certificate))
                    .collect(),
                )
                .print(),
                Format::Csv | Format::Table => {
                    for v in &vs.values {
                        println!("{}", v);
                    }
                }
            }
            Ok(!vs.certificate.stable)
        }

        Command::Count { d, k, x, mode, search, out } => {
            check_k_x(k, x)?;
            let f = field_for(d)?;
            let cfg = search.config()?;
            let (count, cert) = sums_of_units::count(&f, k, x, mode.into(), &cfg);
            match out.format {
                Format::Json => J::O(
                    vec![
                        ("d", J::I(d)),
                        ("k", J::U(k as u64)),
                        ("X", J::I(x)),
                        ("mode", J::S(Mode::from(mode).to_string())),
                        ("count", J::U(count)),
                    ]
                    .into_iter()
                    .chain(cert_fields(&cert))
                    .collect(),
                )
                .print(),
                Format::Csv => println!("{},{},{}", x, count, cert.stable),
                Format::Table => {
                    println!(
                        "integers |n| <= {} that are sums of {} {} units of Q(sqrt({})): {}",
                        x,
                        Mode::from(mode),
                        k,
                        d,
                        count
                    );
                    println!(
                        "certificate: final_bound={} window={} stable={}",
                        cert.final_bound, cert.window_checked, cert.stable
                    );
                }
            }
            Ok(!cert.stable)
        }

        Command::Reps { d, n, k, search, out } => {
            if n == 0 {
                return Err("n must be nonzero".into());
            }
            check_k_x(k, n.abs())?;
            let f = field_for(d)?;
            let cfg = search.config()?;
            let (classes, cert) = sums_of_units::enumerate_representations(&f, n, k, &cfg);
            match out.format {
                Format::Json => J::O(
                    vec![
                        ("d", J::I(d)),
                        ("n", J::I(n)),
                        ("k", J::U(k as u64)),
                        (
                            "classes",
                            J::A(
                                classes
                                    .iter()
                                    .map(|c| {
                                        J::O(vec![
                                            ("shape", J::S(c.shape().to_string())),
                                            (
                                                "coords",
                                                J::A(
                                                    c.canonical_coords()
                                                        .iter()
                                                        .map(|q| J::S(q.csv_literal()))
                                                        .collect(),
                                                ),
                                            ),
                                        ])
                                    })
                                    .collect(),
                            ),
                        ),
                    ]
                    .into_iter()
                    .chain(cert_fields(&cert))
                    .collect(),
                )
                .print(),
                Format::Csv => {
                    for c in &classes {
                        println!("{},{},{}", n, c.shape(), coords_literal(c.canonical_coords()));
                    }
                }
                Format::Table => {
                    println!("representations of {} by <= {} units of Q(sqrt({})): {}", n, k, d, classes.len());
                    for c in &classes {
                        let parts: Vec<String> =
                            c.canonical_coords().iter().map(|q| q.to_string()).collect();
                        println!("  [{}] ({})", c.shape(), parts.join(", "));
                    }
                }
            }
            Ok(!cert.stable)
        }

        Command::Reduce { d, n, k, search, out } => {
            if n == 0 {
                return Err("n must be nonzero".into());
            }
            check_k_x(k, n.abs())?;
            let f = field_for(d)?;
            let cfg = search.config()?;
            let (classes, cert) = sums_of_units::enumerate_representations(&f, n, k, &cfg);
            let mut reducer = sums_of_units::Reducer::new(&f, &cfg);
            let mut rows = Vec::new();
            let mut unstable = !cert.stable;
            for c in &classes {
                let tuple = c.as_tuple();
                match reducer.reduce(&tuple) {
                    Ok(red) => rows.push((c, Some(red))),
                    Err(crate::error::Error::BoundCapReached) => {
                        unstable = true;
                        rows.push((c, None));
                    }
                    Err(e) => return Err(e.to_string()),
                }
            }
            match out.format {
                Format::Json => J::O(
                    vec![
                        ("d", J::I(d)),
                        ("n", J::I(n)),
                        ("k", J::U(k as u64)),
                        (
                            "reductions",
                            J::A(
                                rows.iter()
                                    .map(|(c, red)| match red {
                                        Some(red) => J::O(vec![
                                            ("r", J::U(c.len() as u64)),
                                            ("ell", J::U(red.ell() as u64)),
                                            ("s", J::U(red.s() as u64)),
                                            ("v", J::S(coords_literal(red.v.coords()))),
                                            ("xi", J::S(coords_literal(red.xi.coords()))),
                                        ]),
                                        None => J::O(vec![
                                            ("r", J::U(c.len() as u64)),
                                            ("error", J::S("bound cap reached".into())),
                                        ]),
                                    })
                                    .collect(),
                            ),
                        ),
                    ]
                    .into_iter()
                    .chain(cert_fields(&cert))
                    .collect(),
                )
                .print(),
                Format::Csv => {
                    for (c, red) in &rows {
                        match red {
                            Some(red) => println!(
                                "{},{},{},{},{},{}",
                                n,
                                c.len(),
                                red.ell(),
                                red.s(),
                                coords_literal(red.v.coords()),
                                coords_literal(red.xi.coords())
                            ),
                            None => println!("{},{},,,,bound cap reached", n, c.len()),
                        }
                    }
                }
                Format::Table => {
                    println!("trace-form reductions for n = {} (d={}, k<={}):", n, d, k);
                    for (c, red) in &rows {
                        let coords: Vec<String> =
                            c.canonical_coords().iter().map(|q| q.to_string()).collect();
                        match red {
                            Some(red) => {
                                let v: Vec<String> =
                                    red.v.coords().iter().map(|q| q.to_string()).collect();
                                let xi: Vec<String> =
                                    red.xi.coords().iter().map(|q| q.to_string()).collect();
                                println!(
                                    "  ({}) -> ell={} v=({}) xi=({})",
                                    coords.join(", "),
                                    red.ell(),
                                    v.join(", "),
                                    xi.join(", ")
                                );
                            }
                            None => println!("  ({}) -> bound cap reached", coords.join(", ")),
                        }
                    }
                }
            }
            Ok(unstable)
        }

        Command::NonUnique { d, k, x, search, out } => {
            check_k_x(k, x)?;
            let f = field_for(d)?;
            let cfg = search.config()?;
            let (count, cert) = sums_of_units::count_non_unique(&f, k, x, &cfg);
            match out.format {
                Format::Json => J::O(
                    vec![
                        ("d", J::I(d)),
                        ("k", J::U(k as u64)),
                        ("X", J::I(x)),
                        ("non_unique", J::U(count)),
                    ]
                    .into_iter()
                    .chain(cert_fields(&cert))
                    .collect(),
                )
                .print(),
                Format::Csv => println!("{},{},{}", x, count, cert.stable),
                Format::Table => println!(
                    "integers |n| <= {} with several inequivalent representations (d={}, k<={}): {}",
                    x, d, k, count
                ),
            }
            Ok(!cert.stable)
        }

        Command::Predict { d, k, x, mode, out } => {
            check_k_x(k, x.max(1))?;
            if x < 2 {
                return Err("need X >= 2".into());
            }
            let f = field_for(d)?;
            let p = asymptotics::predict_count(&f, k, x, mode.into());
            match out.format {
                Format::Json => J::O(vec![
                    ("d", J::I(d)),
                    ("k", J::U(k as u64)),
                    ("X", J::I(x)),
                    ("mode", J::S(Mode::from(mode).to_string())),
                    ("predicted", J::F(p.value)),
                    ("error_bound", J::F(p.error_bound)),
                ])
                .print(),
                Format::Csv => println!("{},{}", x, fmt_sig(p.value)),
                Format::Table => println!("predicted count: {}", fmt_sig(p.value)),
            }
            Ok(false)
        }

        Command::Compare { d, k, grid, mode, search, out } => {
            if grid.is_empty() {
                return Err("grid must not be empty".into());
            }
            if grid.windows(2).any(|w| w[0] >= w[1]) {
                return Err("grid must be strictly ascending".into());
            }
            if grid.iter().any(|&x| x < 2) {
                return Err("grid entries must be >= 2".into());
            }
            check_k_x(k, 2)?;
            let f = field_for(d)?;
            let cfg = search.config()?;
            let mode: Mode = mode.into();
            let rows = compare_rows(&f, k, &grid, mode, &cfg, out.threads);
            let unstable = rows.iter().any(|r| !r.certificate_stable);
            match out.format {
                Format::Json => J::O(vec![
                    ("d", J::I(d)),
                    ("k", J::U(k as u64)),
                    ("mode", J::S(mode.to_string())),
                    (
                        "rows",
                        J::A(
                            rows.iter()
                                .map(|r| {
                                    J::O(vec![
                                        ("X", J::I(r.x)),
                                        ("exact", J::U(r.exact)),
                                        ("predicted", J::F(r.predicted)),
                                        ("ratio", J::F(r.ratio)),
                                        ("stable", J::B(r.certificate_stable)),
                                    ])
                                })
                                .collect(),
                        ),
                    ),
                ])
                .print(),
                Format::Csv => {
                    for r in &rows {
                        println!(
                            "{},{},{},{},{}",
                            r.x,
                            r.exact,
                            fmt_sig(r.predicted),
                            fmt_sig(r.ratio),
                            r.certificate_stable
                        );
                    }
                }
                Format::Table => {
                    println!(
                        "{:>12} {:>10} {:>18} {:>16} {:>7}",
                        "X", "exact", "predicted", "ratio", "stable"
                    );
                    for r in &rows {
                        println!(
                            "{:>12} {:>10} {:>18} {:>16} {:>7}",
                            r.x,
                            r.exact,
                            fmt_sig(r.predicted),
                            fmt_sig(r.ratio),
                            r.certificate_stable
                        );
                    }
                    println!("note: error-term constants are not explicit; judge trends, not fixed tolerances");
                }
            }
            Ok(unstable)
        }

        Command::Local { d, k, n, p, out } => {
            let f = field_for(d)?;
            match p {
                Some(p) => {
                    let dec =
                        local_solubility::local_decision(&f, k, n, p).map_err(|e| e.to_string())?;
                    print_decision(&dec, out.format);
                }
                None => {
                    let everywhere = local_solubility::everywhere_locally_soluble(&f, k, n)
                        .map_err(|e| e.to_string())?;
                    let p2 =
                        local_solubility::local_decision(&f, k, n, 2).map_err(|e| e.to_string())?;
                    match out.format {
                        Format::Json => J::O(vec![
                            ("d", J::I(d)),
                            ("k", J::I(k)),
                            ("n", J::I(n)),
                            ("everywhere_soluble", J::B(everywhere)),
                            ("p2_reason", J::S(p2.reason.to_string())),
                        ])
                        .print(),
                        Format::Csv => println!("{},{},{}", n, everywhere, p2.reason),
                        Format::Table => {
                            if everywhere {
                                println!("everywhere locally soluble ({})", p2.reason);
                            } else {
                                println!("insoluble at p=2 (parity, 2 not inert)");
                            }
                        }
                    }
                }
            }
            Ok(false)
        }

        Command::LocalVerify { d, k, n, p, out } => {
            let f = field_for(d)?;
            let depth = if p == 2 { 3 } else { 2 };
            let chk = local_solubility::verify_by_residue_search(&f, k, n, p, depth)
                .map_err(|e| e.to_string())?;
            match out.format {
                Format::Json => J::O(vec![
                    ("d", J::I(d)),
                    ("k", J::I(k)),
                    ("n", J::I(n)),
                    ("p", J::U(p)),
                    ("modulus", J::U(chk.modulus)),
                    ("decision_soluble", J::B(chk.decision.soluble)),
                    ("solutions_exist", J::B(chk.solutions_exist)),
                    ("consistent", J::B(chk.consistent)),
                    (
                        "witness",
                        match &chk.witness {
                            Some(w) => J::A(
                                w.iter()
                                    .map(|&(x, y)| J::A(vec![J::U(x), J::U(y)]))
                                    .collect(),
                            ),
                            None => J::A(vec![]),
                        },
                    ),
                ])
                .print(),
                Format::Csv => println!(
                    "{},{},{},{},{}",
                    p, chk.modulus, chk.decision.soluble, chk.solutions_exist, chk.consistent
                ),
                Format::Table => {
                    println!(
                        "residue search mod {}^{} = {}: decision={} search={} consistent={}",
                        p,
                        depth,
                        chk.modulus,
                        if chk.decision.soluble { "soluble" } else { "insoluble" },
                        if chk.solutions_exist { "solutions found" } else { "no solutions" },
                        chk.consistent
                    );
                    if let Some(w) = &chk.witness {
                        let parts: Vec<String> =
                            w.iter().map(|&(x, y)| format!("{}+{}w", x, y)).collect();
                        println!("witness: {}", parts.join(", "));
                    }
                }
            }
            Ok(false)
        }
    }
}

fn print_decision(dec: &LocalDecision, format: Format) {
    match format {
        Format::Json => {
            let witness = match &dec.witness {
                Some(w) => J::A(
                    w.iter().map(|&(x, y)| J::A(vec![J::U(x), J::U(y)])).collect(),
                ),
                None => J::A(vec![]),
            };
            J::O(vec![
                ("p", J::U(dec.p)),
                ("soluble", J::B(dec.soluble)),
                ("reason", J::S(dec.reason.to_string())),
                (
                    "witness_modulus",
                    dec.witness_modulus.map(J::U).unwrap_or(J::U(0)),
                ),
                ("witness", witness),
            ])
            .print();
        }
        Format::Csv => println!("{},{},{}", dec.p, dec.soluble, dec.reason),
        Format::Table => {
            if dec.soluble {
                println!("soluble at p={} ({})", dec.p, dec.reason);
                if let Some(w) = &dec.witness {
                    let parts: Vec<String> =
                        w.iter().map(|&(x, y)| format!("{}+{}w", x, y)).collect();
                    println!(
                        "witness mod {}: {}",
                        dec.witness_modulus.unwrap_or(0),
                        parts.join(", ")
                    );
                }
            } else {
                println!("insoluble at p={} (parity, 2 not inert)", dec.p);
            }
        }
    }
}

/// Computes comparison rows, optionally sharded over worker threads; the
/// assembly order is the grid order, so thread count never changes output.
fn compare_rows(
    field: &FieldDescriptor,
    k: usize,
    grid: &[i64],
    mode: Mode,
    cfg: &BoundConfig,
    threads: usize,
) -> Vec<ComparisonRow> {
    let n = grid.len();
    if threads <= 1 || n <= 1 {
        return asymptotics::comparison_report(field, k, grid, mode, cfg);
    }
    let workers = threads.min(n);
    let (tx, rx) = std::sync::mpsc::channel();
    std::thread::scope(|scope| {
        for w in 0..workers {
            let tx = tx.clone();
            scope.spawn(move || {
                for (i, &x) in grid.iter().enumerate().skip(w).step_by(workers) {
                    let row = asymptotics::comparison_report(field, k, &[x], mode, cfg)
                        .pop()
                        .expect("one row per grid point");
                    let _ = tx.send((i, row));
                }
            });
        }
        drop(tx);
    });
    let mut slots: Vec<Option<ComparisonRow>> = (0..n).map(|_| None).collect();
    for (i, row) in rx {
        slots[i] = Some(row);
    }
    slots.into_iter().map(|r| r.expect("all rows computed")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig_formatting() {
        assert_eq!(fmt_sig(31.349699123), "31.3496991230");
        assert_eq!(fmt_sig(0.4812118250596), "0.481211825060");
        assert_eq!(fmt_sig(0.0), "0.00000000000");
        assert_eq!(fmt_sig(-5.2249490836), "-5.22494908360");
    }

    #[test]
    fn json_rendering_is_ordered() {
        let v = J::O(vec![
            ("b", J::I(1)),
            ("a", J::A(vec![J::B(true), J::S("x".into())])),
        ]);
        let mut s = String::new();
        v.render(&mut s);
        assert_eq!(s, "{\"b\":1,\"a\":[true,\"x\"]}");
    }

    #[test]
    fn cli_parses_documented_flag_names() {
        let cli = Cli::try_parse_from([
            "quadunits", "count", "--d", "2", "--k", "2", "--X", "1000000", "--mode", "exactly",
            "--format", "csv", "--bound", "25", "--stability-window", "4", "--bound-cap", "50",
            "--threads", "2",
        ])
        .unwrap();
        match cli.command {
            Command::Count { d, k, x, .. } => {
                assert_eq!((d, k, x), (2, 2, 1_000_000));
            }
            _ => panic!("wrong command"),
        }

        assert!(Cli::try_parse_from(["quadunits", "count", "--d", "2"]).is_err());
    }
}
