//! Produces a certificate, round-trips it through JSON, checks it, then
//! perturbs one coefficient and checks again.

use ideal_elim::cascade::prove;
use ideal_elim::certificate::{Certificate, Strategy};
use ideal_elim::check::check_certificate_seeded;
use ideal_elim::scenario::{Pattern, Scenario};
use ideal_elim::{BigRat, Poly};

fn main() {
    let s = Scenario::build(4, 3, &Pattern::all_singletons(3)).unwrap();
    let cert = prove(&s, &Strategy::default(), None).unwrap();
    let text = cert.to_json_string();
    let back = Certificate::from_json_str(&text).unwrap();
    assert_eq!(back, cert);
    println!("certificate: {} steps, {} bytes of JSON, verdict {}", cert.steps.len(), text.len(), cert.verdict);

    let rep = check_certificate_seeded(&back, 50, 2024);
    println!("replay: passed={} specializations={} skipped={}", rep.passed(), rep.trials_run, rep.trials_skipped);

    let mut forged = back.clone();
    let i = forged.steps.len() / 2;
    let vars = forged.steps[i].result.vars().clone();
    let mut terms = forged.steps[i].result.terms().to_vec();
    terms[0].1 = &terms[0].1 + &BigRat::one();
    forged.steps[i].result = Poly::from_terms(&vars, terms);
    let rep = check_certificate_seeded(&forged, 50, 2024);
    println!("after perturbing step {i}: passed={}", rep.passed());
    for f in &rep.failures {
        println!("  {f}");
    }
}
