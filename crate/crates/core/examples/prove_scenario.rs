//! Proves one scenario and prints the step report.
//!
//! Usage: `cargo run --release --example prove_scenario -- 5 3 B:2=3`

use ideal_elim::cascade::prove;
use ideal_elim::certificate::Strategy;
use ideal_elim::cli::render_report;
use ideal_elim::scenario::{Pattern, Scenario};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n = args.first().and_then(|a| a.parse().ok()).unwrap_or(4);
    let r = args.get(1).and_then(|a| a.parse().ok()).unwrap_or(3);
    let pattern: Pattern = args.get(2).map(String::as_str).unwrap_or("A").parse().expect("pattern");
    let s = Scenario::build(n, r, &pattern).expect("valid scenario");
    let cert = prove(&s, &Strategy::default(), None).expect("valid strategy");
    let dir = tempfile::tempdir().expect("temp dir");
    let report = render_report(&cert, &dir.path().join("cert.json"), 200).expect("report");
    print!("{report}");
}
