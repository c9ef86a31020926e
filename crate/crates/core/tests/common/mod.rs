#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use zetagaps::{zeros::load_table, OrdinateTable, TextFormat};

pub fn data_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests")
        .join("data")
        .join(name)
}

/// First 100 200 ordinates, 9 decimals.
pub fn reference() -> &'static OrdinateTable {
    static TABLE: OnceLock<OrdinateTable> = OnceLock::new();
    TABLE.get_or_init(|| load_table(&data_path("zeros_100200.txt"), TextFormat::Plain).unwrap())
}

/// Height of the 10⁵-th ordinate.
pub fn t_100k() -> f64 {
    reference().ordinate(100_000).unwrap()
}

/// Brute-force first-failure classification, independent of the library's
/// run-length sweep. Returns `(n_runs, sizes)`.
pub fn brute_force_partition(
    ords: &[f64],
    n_total: usize,
    r: usize,
    c: f64,
    t: f64,
) -> (usize, Vec<usize>) {
    let thr = 2.0 * std::f64::consts::PI * c / t.ln();
    let mut sizes = vec![0usize; r];
    let mut runs = 0;
    for n in 0..n_total {
        match (1..=r).find(|&j| ords[n + j] - ords[n + j - 1] < thr) {
            Some(j) => sizes[j - 1] += 1,
            None => runs += 1,
        }
    }
    (runs, sizes)
}
