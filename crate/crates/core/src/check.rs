//! Independent replay of a certificate.
//!
//! Every step is re-verified from the scenario alone: the seed and the
//! derivation table are rebuilt, substitutions and derivatives are recomputed,
//! normalizations are multiplied back, and resultants are both recomputed and
//! spot-checked modulo random primes with a plain Gaussian-elimination
//! determinant of the specialized Sylvester matrix.

use std::fmt;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::cascade::known_factors;
use crate::certificate::{Certificate, NormalizeRecord, StepKind, Verdict};
use crate::derivation::DerivationTable;
use crate::limits::Limits;
use crate::modular::{determinant, random_prime, Field};
use crate::poly::{Monomial, Poly, VarId};
use crate::resultant::{resultant_with, Method};
use crate::scenario::Scenario;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckFailure {
    /// `None` for certificate-level checks (final, verdict, witness).
    pub step: Option<usize>,
    pub message: String,
}

impl fmt::Display for CheckFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.step {
            Some(i) => write!(f, "step {i}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct CheckReport {
    pub steps_checked: usize,
    pub trials_run: usize,
    pub trials_skipped: usize,
    pub failures: Vec<CheckFailure>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn first_failing_step(&self) -> Option<usize> {
        self.failures.iter().find_map(|f| f.step)
    }

    fn fail(&mut self, step: Option<usize>, message: impl Into<String>) {
        self.failures.push(CheckFailure { step, message: message.into() });
    }
}

pub fn check_certificate(cert: &Certificate, trials: usize) -> CheckReport {
    check_certificate_seeded(cert, trials, rand::random())
}

pub fn check_certificate_seeded(cert: &Certificate, trials: usize, seed: u64) -> CheckReport {
    let mut rep = CheckReport::default();
    let s = match Scenario::build(cert.n, cert.r, &cert.pattern) {
        Ok(s) => s,
        Err(e) => {
            rep.fail(None, format!("scenario does not rebuild: {e}"));
            return rep;
        }
    };
    if **cert.vars() != *s.vars {
        rep.fail(None, "polynomials are not over the scenario's variables");
        return rep;
    }
    let table = DerivationTable::build(&s);
    let known = known_factors(&s);
    let limits = Limits::unbounded();
    let mut rng = StdRng::seed_from_u64(seed);

    for (i, step) in cert.steps.iter().enumerate() {
        rep.steps_checked += 1;
        let refs = step.kind.refs();
        if let Some(&bad) = refs.iter().find(|&&r| r >= i) {
            rep.fail(Some(i), format!("refers to step {bad}, which is not earlier"));
            continue;
        }
        let input = |k: usize| &cert.steps[k].result;
        match &step.kind {
            StepKind::Seed => {
                if step.result != s.seed {
                    rep.fail(Some(i), "seed differs from the trace identity");
                }
            }
            StepKind::Substitute { var, by, into } => {
                match s.seed_substitution() {
                    Some((v, _)) if v == *var => {}
                    _ => rep.fail(Some(i), format!("{} is not the solved eigenvalue", s.vars.name(*var))),
                }
                let solves = !by.contains_var(*var)
                    && s.seed.substitute(*var, by, &limits).map(|z| z.is_zero()).unwrap_or(false);
                if !solves {
                    rep.fail(Some(i), "substituted expression does not solve the trace identity");
                }
                match input(*into).substitute(*var, by, &limits) {
                    Ok(p) if p == step.result => {}
                    _ => rep.fail(Some(i), "re-substitution gives a different polynomial"),
                }
            }
            StepKind::Derive { of } => {
                if table.derive(input(*of)) != step.result {
                    rep.fail(Some(i), "recomputed derivative differs");
                }
            }
            StepKind::Normalize { of, record } => {
                if let Err(m) = check_normalize(&s, cert.strategy.allow_h_cancel, &known, input(*of), record, &step.result) {
                    rep.fail(Some(i), m);
                }
            }
            StepKind::Resultant { f, g, var } => {
                let (pf, pg) = (input(*f), input(*g));
                if step.result.contains_var(*var) {
                    rep.fail(Some(i), format!("result still contains {}", s.vars.name(*var)));
                }
                match resultant_with(pf, pg, *var, Method::Auto, &limits) {
                    Ok(r) if r == step.result => {}
                    Ok(_) => rep.fail(Some(i), "recomputed resultant differs"),
                    Err(e) => rep.fail(Some(i), format!("resultant does not recompute: {e}")),
                }
                for _ in 0..trials {
                    match specialization_trial(pf, pg, *var, &step.result, &mut rng) {
                        Trial::Agree => rep.trials_run += 1,
                        Trial::Skipped => rep.trials_skipped += 1,
                        Trial::Disagree(p) => {
                            rep.fail(Some(i), format!("specialization modulo {p} disagrees"));
                            break;
                        }
                    }
                }
            }
        }
    }

    check_conclusion(cert, &s, &mut rep);
    rep
}

fn check_normalize(
    s: &Scenario,
    allow_h_cancel: bool,
    known: &[Poly],
    of: &Poly,
    rec: &NormalizeRecord,
    result: &Poly,
) -> Result<(), String> {
    if rec.content.is_zero() {
        return Err("zero content".into());
    }
    if rec.monomial.exp(s.h) != 0 {
        return Err("monomial factor mentions H; H powers belong in h_power".into());
    }
    if rec.h_power > 0 && !allow_h_cancel {
        return Err("H power cancelled although the strategy forbids it".into());
    }
    if rec.h_power > 0 && result.is_constant() {
        return Err("the whole polynomial was cancelled as a power of H".into());
    }
    let limits = Limits::unbounded();
    let mono = rec.monomial.mul(&Monomial::var(s.vars.len(), s.h, rec.h_power), u32::MAX).map_err(|e| e.to_string())?;
    let mut back = result.mul_monomial(&mono).scale(&rec.content);
    for (f, k) in &rec.factors {
        if !known.contains(f) {
            return Err(format!("divided by {f}, which is not a known nonvanishing factor"));
        }
        back = back.try_mul(&f.pow(*k, &limits).map_err(|e| e.to_string())?, &limits).map_err(|e| e.to_string())?;
    }
    if back != *of {
        return Err("multiplying back does not restore the input".into());
    }
    Ok(())
}

fn check_conclusion(cert: &Certificate, s: &Scenario, rep: &mut CheckReport) {
    let only_h = cert.final_poly.support().iter().all(|&v| v == s.h);
    if cert.verdict.is_proven() {
        if cert.final_poly.is_zero() {
            rep.fail(None, format!("verdict {} with final = 0", cert.verdict));
        }
        if !only_h {
            rep.fail(None, "final involves variables other than H");
        }
        match cert.steps.last() {
            Some(last) if last.result == cert.final_poly => {}
            _ => rep.fail(None, "final is not the result of the last step"),
        }
    } else if !cert.final_poly.is_zero() {
        rep.fail(None, format!("verdict {} with a nonzero final", cert.verdict));
    }
    match (cert.verdict, &cert.witness) {
        (Verdict::MinimalProven, None) => rep.fail(None, "MINIMAL_PROVEN without a witness"),
        (Verdict::MinimalProven, Some(w)) => {
            let expect_leading = s.first_coeff().pow(2);
            if w.leading != expect_leading {
                rep.fail(None, "witness: wrong H^2 coefficient for the first eigenvalue");
            }
            let mut sum = Poly::monomial(&s.vars, Monomial::var(s.vars.len(), s.h, 2), w.leading.clone());
            for (m, c) in &w.squares {
                if !m.is_square() || !c.is_positive() {
                    rep.fail(None, format!("witness: {c}*{} is not a positive square", m.fmt_with(&s.vars)));
                }
                sum = &sum + &Poly::monomial(&s.vars, m.clone(), c.clone());
            }
            if !w.squares.iter().any(|(m, _)| m.exp(s.h) == 2 && m.degree() == 2) {
                rep.fail(None, "witness: no positive H^2 square");
            }
            if sum != s.trace_square() {
                rep.fail(None, "witness: squares do not add up to trace(A^2)");
            }
        }
        (_, Some(_)) => rep.fail(None, format!("witness attached to verdict {}", cert.verdict)),
        (_, None) => {}
    }
}

enum Trial {
    Agree,
    Skipped,
    Disagree(u64),
}

/// Specializes every variable except `v` at a random point modulo a random
/// prime and compares the determinant of the numeric Sylvester matrix with
/// the claimed resultant at the same point.
fn specialization_trial(f: &Poly, g: &Poly, v: VarId, claimed: &Poly, rng: &mut StdRng) -> Trial {
    let p = random_prime(rng);
    let fld = Field::new(p);
    let point: Vec<u64> = (0..f.vars().len()).map(|_| fld.from_u64(rng.gen_range(0..p))).collect();
    let (Some(cf), Some(cg), Some(want)) = (
        coeffs_mod(&fld, f, v, &point),
        coeffs_mod(&fld, g, v, &point),
        eval_mod(&fld, claimed, &point),
    ) else {
        return Trial::Skipped;
    };
    // Leading coefficients must survive, or the specialized degrees drop.
    if cf[0] == 0 || cg[0] == 0 {
        return Trial::Skipped;
    }
    let (m, n) = (cf.len() - 1, cg.len() - 1);
    let size = m + n;
    let got = if size == 0 {
        fld.one()
    } else {
        let mut mat = vec![vec![0u64; size]; size];
        for row in 0..n {
            for (k, &c) in cf.iter().enumerate() {
                mat[row][row + k] = c;
            }
        }
        for row in 0..m {
            for (k, &c) in cg.iter().enumerate() {
                mat[n + row][row + k] = c;
            }
        }
        determinant(&fld, mat)
    };
    if got == want {
        Trial::Agree
    } else {
        Trial::Disagree(p)
    }
}

/// Coefficients in `v`, highest degree first, evaluated at `point`.
fn coeffs_mod(fld: &Field, p: &Poly, v: VarId, point: &[u64]) -> Option<Vec<u64>> {
    p.univariate_view(v).iter().map(|c| eval_mod(fld, c, point)).collect()
}

fn eval_mod(fld: &Field, p: &Poly, point: &[u64]) -> Option<u64> {
    let mut acc = 0;
    for (m, c) in p.terms() {
        let mut t = fld.from_rat(c)?;
        for (i, &e) in m.exps().iter().enumerate() {
            if e > 0 {
                t = fld.mul(t, fld.pow(point[i], e as u64));
            }
        }
        acc = fld.add(acc, t);
    }
    Some(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cascade::prove;
    use crate::certificate::Strategy;
    use crate::rational::BigRat;
    use crate::scenario::Pattern;

    fn cert(n: u32, r: u32, p: &str) -> Certificate {
        let pat: Pattern = p.parse().unwrap();
        prove(&Scenario::build(n, r, &pat).unwrap(), &Strategy::default(), None).unwrap()
    }

    #[test]
    fn fresh_certificate_passes() {
        let c = cert(3, 2, "A");
        let rep = check_certificate_seeded(&c, 20, 7);
        assert!(rep.passed(), "{:?}", rep.failures);
        assert!(rep.trials_run > 0);
    }

    #[test]
    fn perturbed_step_is_named() {
        let c = cert(3, 2, "A");
        for i in 0..c.steps.len() {
            let mut t = c.clone();
            let vars = t.steps[i].result.vars().clone();
            let mut terms = t.steps[i].result.terms().to_vec();
            terms[0].1 = &terms[0].1 + &BigRat::one();
            t.steps[i].result = Poly::from_terms(&vars, terms);
            let rep = check_certificate_seeded(&t, 5, 1);
            assert_eq!(rep.first_failing_step(), Some(i), "step {i}");
        }
    }

    #[test]
    fn verdict_with_zero_final_fails() {
        let mut c = cert(3, 2, "A");
        c.final_poly = Poly::zero(c.vars());
        assert!(!check_certificate_seeded(&c, 1, 1).passed());
    }

    #[test]
    fn forged_witness_fails() {
        let mut c = cert(5, 3, "C:3");
        c.witness.as_mut().unwrap().squares[0].1 = BigRat::one();
        assert!(!check_certificate_seeded(&c, 1, 1).passed());
    }
}
