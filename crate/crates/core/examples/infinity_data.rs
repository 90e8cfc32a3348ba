//! Writes the 1000-point infinity dataset used by the density examples.
//!
//! Usage: `cargo run --example infinity_data -- [path] [noise] [seed]`

use std::io::Write;

use sublevel::models::infinity_dataset;

fn main() -> std::io::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = args.next().unwrap_or_else(|| "data/infinity.csv".into());
    let noise: f64 = args.next().map_or(0.1, |s| s.parse().expect("noise is a number"));
    let seed: u64 = args.next().map_or(7, |s| s.parse().expect("seed is an integer"));
    let mut out = std::io::BufWriter::new(std::fs::File::create(&path)?);
    writeln!(out, "x,y")?;
    for p in infinity_dataset(1000, noise, seed) {
        writeln!(out, "{},{}", p[0], p[1])?;
    }
    out.flush()
}
