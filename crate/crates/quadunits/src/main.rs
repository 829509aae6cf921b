fn main() { std::process::exit(quadunits::cli::main()); }
