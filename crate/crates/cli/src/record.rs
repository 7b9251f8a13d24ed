//! Run records: the human-readable report and the stable CSV schema.

use std::io::Write;
use std::path::Path;

use cs_bounds::Error;

pub const CSV_HEADER: &str = "sigma,d,ell,iterations,r,epsilon,lower_bound,wall_seconds,threads,mode";

#[derive(Debug, Clone)]
pub struct RunRecord {
    pub sigma: u32,
    pub d: u32,
    pub ell: u32,
    pub iterations: u64,
    pub r: f64,
    pub epsilon: f64,
    pub lower_bound: f64,
    pub wall_seconds: f64,
    pub threads: usize,
    pub mode: String,
}

/// Rounds down to six decimals, the convention used by the published tables.
pub fn truncate6(x: f64) -> f64 {
    (x * 1e6).floor() / 1e6
}

pub fn print_run(rec: &RunRecord, best_iteration: u64) {
    println!(
        "gamma_{{{},{}}} lower bound (ell = {}, {} mode, {} threads)",
        rec.sigma, rec.d, rec.ell, rec.mode, rec.threads
    );
    println!(
        "  iterations = {} (best at step {}), wall = {:.3}s",
        rec.iterations, best_iteration, rec.wall_seconds
    );
    println!("  r = {:.17}", rec.r);
    println!("  epsilon = {:.17}", rec.epsilon);
    println!(
        "  lower bound = {:.6}   (full precision {:.17})",
        truncate6(rec.lower_bound),
        rec.lower_bound
    );
}

/// Appends one row, creating the file (with header) when missing.
pub fn write_csv_row(path: &Path, rec: &RunRecord) -> Result<(), Error> {
    let io_err = |source: std::io::Error| Error::Io {
        path: path.to_path_buf(),
        offset: 0,
        source,
    };
    let fresh = !path.exists();
    let mut f = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(io_err)?;
    if fresh {
        writeln!(f, "{CSV_HEADER}").map_err(io_err)?;
    }
    writeln!(
        f,
        "{},{},{},{},{:.17},{:.17},{:.17},{:.3},{},{}",
        rec.sigma,
        rec.d,
        rec.ell,
        rec.iterations,
        rec.r,
        rec.epsilon,
        rec.lower_bound,
        rec.wall_seconds,
        rec.threads,
        rec.mode
    )
    .map_err(io_err)
}
