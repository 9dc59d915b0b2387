//! Runs every canonical pattern over small `(n, r)` and prints the summary
//! table. Arguments: largest n and largest r (defaults 5 and 3).

use std::time::Instant;

use ideal_elim::certificate::Strategy;
use ideal_elim::cli::{render_table, run_sweep, sweep_scenarios, Format};

fn main() {
    let mut args = std::env::args().skip(1);
    let n_max: u32 = args.next().and_then(|a| a.parse().ok()).unwrap_or(5);
    let r_max: u32 = args.next().and_then(|a| a.parse().ok()).unwrap_or(3);
    let scenarios = sweep_scenarios((3, n_max), (2, r_max));
    let dir = tempfile::tempdir().expect("temp dir");
    let t = Instant::now();
    let rows = run_sweep(&scenarios, &Strategy::default(), None, dir.path(), 1, 0).expect("sweep");
    print!("{}", render_table(&rows, Format::Text));
    println!("{} scenarios in {:.1}s", rows.len(), t.elapsed().as_secs_f64());
}
