//! Cascade behaviour against hand computations and structural invariants.

use ideal_elim::cascade::{prove, run_cascade};
use ideal_elim::certificate::{Certificate, FailKind, Order, StepKind, Strategy, Verdict};
use ideal_elim::check::check_certificate_seeded;
use ideal_elim::cli::{emit_equations, sweep_scenarios};
use ideal_elim::rational::rat;
use ideal_elim::scenario::{proportional, Pattern, Scenario};
use ideal_elim::{Limits, Poly, VarId};

fn scenario(n: u32, r: u32, p: &str) -> Scenario {
    Scenario::build(n, r, &p.parse::<Pattern>().unwrap()).unwrap()
}

/// `e₁` for `(n, r) = (3, 2)` written out by hand: `k = 1`, `β = 9/4`.
fn hand_derive(p: &Poly) -> Poly {
    let v = p.vars();
    let rule = |s: &str| Poly::parse(s, v).unwrap();
    let rules = [
        (v.find("H").unwrap(), rule("H*w")),
        (v.find("l2").unwrap(), rule("l2*o2 + 3/2*H*o2")),
        (v.find("o2").unwrap(), rule("o2^2 + -3/2*H*l2")),
        (v.find("w").unwrap(), rule("w^2 + -9/4*H^2")),
    ];
    rules.iter().fold(Poly::zero(v), |acc, (x, r)| &acc + &(&p.partial(*x) * r))
}

/// Solves `p = a·x + b` for `x`, dividing exactly by `a`.
fn solve_linear(p: &Poly, x: VarId) -> Poly {
    let lim = Limits::default();
    let a = p.partial(x);
    let b = p.substitute(x, &Poly::zero(p.vars()), &lim).unwrap();
    b.neg().exact_div(&a, &lim).unwrap()
}

/// Eliminates by substitution only: every variable is removed where it
/// occurs linearly (treating `w²` as the unknown at the end).
fn three_two_oracle() -> Poly {
    let s = scenario(3, 2, "A");
    let v = &s.vars;
    let lim = Limits::default();
    let (h, l2, o2, w) = (v.find("H").unwrap(), v.find("l2").unwrap(), v.find("o2").unwrap(), v.find("w").unwrap());
    let hp = Poly::var(v, h);
    let l2_val = solve_linear(&s.seed, l2);
    assert_eq!(l2_val, hp.scale(&rat(3, 1)));
    let sub = |p: &Poly, x, q: &Poly| p.substitute(x, q, &lim).unwrap();

    let d1 = sub(&hand_derive(&s.seed), l2, &l2_val);
    let o2_val = solve_linear(&d1, o2);
    let rel = &Poly::var(v, o2) - &o2_val;
    let q = sub(&sub(&hand_derive(&rel), l2, &l2_val), o2, &o2_val);
    // q = c·(27H² + 2w²); its derivative carries a factor w that cannot vanish.
    let dq = hand_derive(&q).exact_div(&Poly::var(v, w), &lim).unwrap();
    let w2 = Poly::parse("w^2", v).unwrap();
    let coeff_w2 = |p: &Poly| p.terms().iter().find(|t| t.0.exp(w) == 2).unwrap().1.clone();
    let g = coeff_w2(&q);
    let u_val = (&q - &w2.scale(&g)).neg().scale(&g.inv().unwrap());
    // dq is linear in w²: a·w² + b.
    let a = coeff_w2(&dq);
    let b = &dq - &w2.scale(&a);
    &b + &u_val.scale(&a)
}

#[test]
fn three_two_matches_hand_elimination() {
    let oracle = three_two_oracle();
    // Frozen value of the oracle above.
    assert_eq!(oracle.to_string(), "H^2");
    let s = scenario(3, 2, "A");
    let cert = prove(&s, &Strategy::default(), None).unwrap();
    assert_eq!(cert.verdict, Verdict::MinimalProven);
    // Res_w(A + B·w², C + D·w²) = (AD − BC)², so the engine's p is the square.
    let sq = &oracle * &oracle;
    assert!(proportional(&cert.final_poly, &sq), "{} vs {}", cert.final_poly, sq);
}

#[test]
fn three_two_first_constraint() {
    let s = scenario(3, 2, "A");
    let cert = run_cascade(&s, &Strategy::default()).unwrap();
    let sub = cert.steps.iter().find(|st| matches!(st.kind, StepKind::Substitute { .. })).unwrap();
    let expect = Poly::parse("9*H*o2 + -6*H*w", &s.vars).unwrap();
    assert!(proportional(&sub.result, &expect));
    match &sub.kind {
        StepKind::Substitute { var, by, .. } => {
            assert_eq!(s.vars.name(*var), "l2");
            assert_eq!(by.to_string(), "3*H");
        }
        _ => unreachable!(),
    }
}

#[test]
fn five_three_first_elimination_clears_first_group() {
    let s = scenario(5, 3, "A");
    let cert = run_cascade(&s, &Strategy::default()).unwrap();
    let first = cert
        .steps
        .iter()
        .position(|st| matches!(st.kind, StepKind::Resultant { .. }))
        .unwrap();
    match cert.steps[first].kind {
        StepKind::Resultant { var, .. } => assert_eq!(s.vars.name(var), "o2"),
        _ => unreachable!(),
    }
    let g1 = &cert.steps[first + 1].result;
    let names: Vec<&str> = g1.support().iter().map(|&v| s.vars.name(v)).collect();
    assert_eq!(names, ["H", "l3", "o3", "w"]);
}

fn eliminated_never_returns(cert: &Certificate) -> Result<(), String> {
    for (i, st) in cert.steps.iter().enumerate() {
        // A zero resultant eliminates nothing; the engine moves on to the
        // next pairing.
        if st.result.is_zero() {
            continue;
        }
        if let StepKind::Resultant { var, .. } = st.kind {
            if let Some(j) = (i..cert.steps.len()).find(|&j| cert.steps[j].result.contains_var(var)) {
                return Err(format!("step {j} mentions a variable eliminated at step {i}"));
            }
        }
    }
    Ok(())
}

#[test]
fn support_shrinks_monotonically() {
    for (n, r, p) in sweep_scenarios((3, 6), (2, 3)) {
        let s = Scenario::build(n, r, &p).unwrap();
        let cert = run_cascade(&s, &Strategy::default()).unwrap();
        eliminated_never_returns(&cert).unwrap_or_else(|e| panic!("{}: {e}", s.label()));
    }
}

#[test]
fn runs_are_deterministic() {
    let s = scenario(5, 3, "A");
    let a = prove(&s, &Strategy::default(), None).unwrap().to_json_string();
    let b = prove(&s, &Strategy::default(), None).unwrap().to_json_string();
    assert_eq!(a, b);
}

#[test]
fn json_round_trip() {
    for (n, r, p) in [(4, 3, "A"), (5, 4, "B:2=3,C:4"), (4, 2, "C:2")] {
        let cert = prove(&scenario(n, r, p), &Strategy::default(), None).unwrap();
        assert_eq!(Certificate::from_json_str(&cert.to_json_string()).unwrap(), cert);
    }
}

#[test]
fn h_cancellation_only_changes_powers_of_h() {
    for (n, r) in [(3, 2), (4, 2)] {
        let s = scenario(n, r, "A");
        let on = run_cascade(&s, &Strategy::default()).unwrap();
        let off_strat = Strategy { allow_h_cancel: false, ..Strategy::default() };
        let off = run_cascade(&s, &off_strat).unwrap();
        assert!(off.verdict.is_proven());
        assert!(check_certificate_seeded(&off, 10, 3).passed());
        let (big, small) = if off.final_poly.total_degree() >= on.final_poly.total_degree() {
            (&off.final_poly, &on.final_poly)
        } else {
            (&on.final_poly, &off.final_poly)
        };
        let q = big.exact_div(small, &Limits::default()).unwrap();
        assert_eq!(q.len(), 1, "quotient {q} is not c*H^k");
        assert!(q.support().iter().all(|&v| v == s.h));
    }
}

#[test]
fn all_merged_cases() {
    let s = scenario(5, 3, "C:2=3");
    let cert = run_cascade(&s, &Strategy::default()).unwrap();
    assert_eq!(cert.final_poly, s.seed);
    assert_eq!(cert.steps.len(), 1);

    let cert = run_cascade(&scenario(4, 3, "C:2=3"), &Strategy::default()).unwrap();
    assert_eq!(cert.verdict, Verdict::Failed(FailKind::Degenerate));
    assert!(cert.final_poly.is_zero());
    assert!(check_certificate_seeded(&cert, 1, 1).passed());
}

#[test]
fn merged_free_group_forced_to_zero() {
    // λ₂ = 0 is forced by the trace identity; the first derivative is then a
    // multiple of H·ω₂.
    let s = scenario(5, 4, "C:3=4");
    let cert = prove(&s, &Strategy::default(), None).unwrap();
    assert_eq!(cert.verdict, Verdict::MinimalProven);
    assert_eq!(cert.final_poly.to_string(), "H");
}

#[test]
fn min_degree_order() {
    let strat = Strategy { order: Order::MinDegree, ..Strategy::default() };
    for (n, r, p) in [(4, 3, "A"), (5, 3, "B:2=3"), (6, 3, "C:3")] {
        let cert = prove(&scenario(n, r, p), &strat, None).unwrap();
        assert_eq!(cert.verdict, Verdict::MinimalProven, "{n} {r} {p}");
        assert!(check_certificate_seeded(&cert, 5, 9).passed());
    }
}

#[test]
fn tight_limits_fail_as_resource() {
    let strat = Strategy { max_terms: 20, ..Strategy::default() };
    let cert = run_cascade(&scenario(5, 3, "A"), &strat).unwrap();
    assert_eq!(cert.verdict, Verdict::Failed(FailKind::Resource));
    // The partial log still replays.
    assert!(check_certificate_seeded(&cert, 2, 1).passed());
}

#[test]
fn transcribed_equations() {
    for (n, r) in [(3, 2), (4, 2), (5, 3), (6, 4)] {
        let (_, rows) = emit_equations(n, r).unwrap();
        let flags: Vec<bool> = rows.iter().map(|row| row.matches).collect();
        // The second eliminated form is printed with slips.
        assert_eq!(flags, [true, true, true, false], "n={n} r={r}");
    }
}
