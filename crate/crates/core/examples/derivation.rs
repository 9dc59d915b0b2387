//! The derivation table of a scenario and the first derivatives of its trace
//! identity.

use ideal_elim::derivation::DerivationTable;
use ideal_elim::scenario::{Pattern, Scenario};

fn main() {
    let args: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let (n, r) = (args.first().copied().unwrap_or(5), args.get(1).copied().unwrap_or(3));
    let s = Scenario::build(n, r, &Pattern::all_singletons(r)).expect("valid (n, r)");
    let t = DerivationTable::build(&s);
    println!("n={n} r={r}, variables {}", s.vars.names().join(" "));
    for v in s.vars.ids() {
        println!("  e1({}) = {}", s.vars.name(v), t.rule(v));
    }
    let d1 = t.derive(&s.seed);
    let d2 = t.derive(&d1);
    println!("trace identity: {}", s.seed);
    println!("first derivative: {d1}");
    println!("second derivative: {d2}");
    if let Some((v, by)) = s.seed_substitution() {
        let lim = ideal_elim::Limits::default();
        println!("with {} := {by}:", s.vars.name(v));
        println!("  {}", d1.substitute(v, &by, &lim).unwrap());
        println!("  {}", d2.substitute(v, &by, &lim).unwrap());
    }
}
