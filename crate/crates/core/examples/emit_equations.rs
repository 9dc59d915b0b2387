//! Compares the engine's derivatives of the trace identity with the hand
//! transcriptions for a few `(n, r)`.

use ideal_elim::cli::emit_equations;

fn main() {
    for (n, r) in [(3, 2), (4, 2), (5, 3), (6, 4)] {
        let (s, rows) = emit_equations(n, r).expect("valid (n, r)");
        println!("n={n} r={r}: trace identity {}", s.seed);
        for row in rows {
            println!("  ({}) {:<48} {}", row.tag, row.description, if row.matches { "MATCH" } else { "MISMATCH" });
        }
    }
}
