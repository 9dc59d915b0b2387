//! The differentiate-then-eliminate cascade.
//!
//! Starting from the trace identity of a scenario, the engine solves it for the
//! first free eigenvalue, differentiates along `e₁`, and removes the remaining
//! variables by resultants in the order `ω` of the first group, then
//! `λ, ω` of each later group, then `w`. Every operation is logged as a
//! [`Step`], so the resulting [`Certificate`] can be replayed by
//! [`crate::check::check_certificate`].
//!
//! Each `λ, ω` block pairs the current constraint `g` with two of its
//! derivatives to get two `ω`-polynomials, then eliminates `ω` between them.
//! A zero resultant triggers the next pairing, bounded by the strategy.

use std::collections::HashMap;

use crate::cache::ResultantCache;
use crate::certificate::{Certificate, FailKind, NormalizeRecord, Order, Step, StepKind, Strategy, Verdict, Witness};
use crate::derivation::DerivationTable;
use crate::error::{Error, PolyError};
use crate::limits::Limits;
use crate::poly::{Monomial, Poly, VarId};
use crate::resultant::{resultant_with, Method};
use crate::scenario::Scenario;

pub const NOTE_POWER_OF_H: &str = "p(H) = c*H^k is read the same way as any other nonzero p: \
H is a root of a fixed nonzero polynomial, so it is locally constant, contradicting grad H != 0 on the open set";

enum Stop {
    Final(usize),
    Fail(FailKind, String),
}

impl From<PolyError> for Stop {
    fn from(e: PolyError) -> Self {
        match e {
            PolyError::Resource(m) => Stop::Fail(FailKind::Resource, m),
            PolyError::NothingToEliminate(v) => {
                Stop::Fail(FailKind::NoElimination, format!("both polynomials are constant in {v}"))
            }
            other => Stop::Fail(FailKind::Degenerate, other.to_string()),
        }
    }
}

struct Engine<'a> {
    s: &'a Scenario,
    table: DerivationTable,
    strat: &'a Strategy,
    limits: Limits,
    cache: Option<&'a ResultantCache>,
    subst: Option<(VarId, Poly)>,
    known: Vec<Poly>,
    steps: Vec<Step>,
    derived: HashMap<usize, Option<usize>>,
}

impl<'a> Engine<'a> {
    fn push(&mut self, kind: StepKind, result: Poly) -> usize {
        self.steps.push(Step { kind, result });
        self.steps.len() - 1
    }

    fn poly(&self, i: usize) -> &Poly {
        &self.steps[i].result
    }

    fn only_h(&self, p: &Poly) -> bool {
        !p.is_zero() && p.support().iter().all(|&v| v == self.s.h)
    }

    fn stop_if_final(&self, i: usize) -> Result<(), Stop> {
        if self.only_h(self.poly(i)) {
            return Err(Stop::Final(i));
        }
        Ok(())
    }

    fn normalize(&mut self, of: usize) -> Result<usize, Stop> {
        let (q, record) = normalize_with(self.poly(of), self.s.h, self.strat.allow_h_cancel, &self.known, &self.limits)?;
        if record.content.is_one() && record.monomial.is_one() && record.h_power == 0 && record.factors.is_empty() {
            return Ok(of);
        }
        Ok(self.push(StepKind::Normalize { of, record }, q))
    }

    /// Derive, substitute the solved eigenvalue, normalize. `None` if the
    /// derivative vanishes.
    fn derive(&mut self, of: usize) -> Result<Option<usize>, Stop> {
        if let Some(&d) = self.derived.get(&of) {
            return Ok(d);
        }
        self.limits.check_time()?;
        let d = self.table.derive_with(self.poly(of), &self.limits)?;
        self.limits.check_poly(&d)?;
        let mut idx = self.push(StepKind::Derive { of }, d);
        if let Some((v, by)) = self.subst.clone() {
            if self.poly(idx).contains_var(v) {
                let p = self.poly(idx).substitute(v, &by, &self.limits)?;
                self.limits.check_poly(&p)?;
                idx = self.push(StepKind::Substitute { var: v, by, into: idx }, p);
            }
        }
        let out = if self.poly(idx).is_zero() {
            None
        } else {
            self.stop_if_final(idx)?;
            let n = self.normalize(idx)?;
            self.stop_if_final(n)?;
            Some(n)
        };
        self.derived.insert(of, out);
        Ok(out)
    }

    /// `j`-th derivative of step `of`, following the memoized chain.
    fn nth_derivative(&mut self, of: usize, j: u32) -> Result<Option<usize>, Stop> {
        let mut cur = of;
        for _ in 0..j {
            match self.derive(cur)? {
                Some(d) => cur = d,
                None => return Ok(None),
            }
        }
        Ok(Some(cur))
    }

    fn resultant(&mut self, f: usize, g: usize, v: VarId) -> Result<Option<usize>, Stop> {
        self.limits.check_time()?;
        let (pf, pg) = (self.poly(f).clone(), self.poly(g).clone());
        let r = match self.cache.and_then(|c| c.get(&pf, &pg, v)) {
            Some(r) => r,
            None => {
                let r = resultant_with(&pf, &pg, v, Method::Auto, &self.limits)?;
                if let Some(c) = self.cache {
                    c.put(&pf, &pg, v, &r);
                }
                r
            }
        };
        self.limits.check_poly(&r)?;
        let idx = self.push(StepKind::Resultant { f, g, var: v }, r);
        if self.poly(idx).is_zero() {
            return Ok(None);
        }
        self.stop_if_final(idx)?;
        let n = self.normalize(idx)?;
        self.stop_if_final(n)?;
        Ok(Some(n))
    }

    /// Pairs `g` with its derivatives in order and returns up to `want`
    /// nonzero constraints free of `v`.
    fn pair_with_derivatives(&mut self, g: usize, v: VarId, want: usize) -> Result<Vec<usize>, Stop> {
        // The derivatives a stage needs are taken before its first resultant,
        // so no later step mentions the eliminated variable again. Deeper
        // ones only appear when a pairing fails.
        let eager = (want as u32).min(self.strat.derivative_depth);
        for j in 1..=eager {
            if self.nth_derivative(g, j)?.is_none() {
                break;
            }
        }
        let mut out = Vec::new();
        let mut tries = 0;
        for j in 1..=self.strat.derivative_depth {
            if out.len() == want || tries == self.strat.max_pairings {
                break;
            }
            let Some(d) = self.nth_derivative(g, j)? else { break };
            if !self.poly(d).contains_var(v) {
                // Already free of v; usable as it stands.
                out.push(d);
                continue;
            }
            tries += 1;
            if let Some(r) = self.resultant(g, d, v)? {
                out.push(r);
            }
        }
        Ok(out)
    }

    fn eliminate_between(&mut self, cands: &[usize], v: VarId) -> Result<Option<usize>, Stop> {
        if let Some(&free) = cands.iter().find(|&&c| !self.poly(c).contains_var(v)) {
            return Ok(Some(free));
        }
        let mut tries = 0;
        for a in 0..cands.len() {
            for b in a + 1..cands.len() {
                if tries == self.strat.max_pairings {
                    return Ok(None);
                }
                tries += 1;
                if let Some(r) = self.resultant(cands[a], cands[b], v)? {
                    return Ok(Some(r));
                }
            }
        }
        Ok(None)
    }

    fn degenerate(&self, v: VarId) -> Stop {
        Stop::Fail(
            FailKind::Degenerate,
            format!(
                "every pairing for {} gave a zero resultant (depth {}, {} pairings)",
                self.s.vars.name(v),
                self.strat.derivative_depth,
                self.strat.max_pairings
            ),
        )
    }

    /// Eliminates `λ` and then `ω` of one group from `g`.
    fn eliminate_block(&mut self, g: usize, lam: VarId, om: VarId) -> Result<usize, Stop> {
        let mut cur = g;
        if self.poly(cur).contains_var(lam) {
            let cands = self.pair_with_derivatives(cur, lam, self.strat.derivative_depth as usize)?;
            cur = match cands.len() {
                0 => return Err(self.degenerate(lam)),
                1 => cands[0],
                _ => match self.eliminate_between(&cands, om)? {
                    Some(r) => return Ok(r),
                    None => return Err(self.degenerate(om)),
                },
            };
        }
        self.eliminate_single(cur, om)
    }

    fn eliminate_single(&mut self, g: usize, v: VarId) -> Result<usize, Stop> {
        if !self.poly(g).contains_var(v) {
            return Ok(g);
        }
        match self.pair_with_derivatives(g, v, 1)?.first() {
            Some(&r) => Ok(r),
            None => Err(self.degenerate(v)),
        }
    }

    fn run(&mut self) -> Result<(), Stop> {
        let seed = self.push(StepKind::Seed, self.s.seed.clone());
        if self.s.groups.is_empty() {
            if self.poly(seed).is_zero() {
                return Err(Stop::Fail(
                    FailKind::Degenerate,
                    "the trace identity vanishes identically once every free eigenvalue is merged, \
                     so there is no constraint to differentiate"
                        .into(),
                ));
            }
            return Err(Stop::Final(seed));
        }
        // The seed itself becomes 0 = 0 after the substitution; its
        // derivative is the first working constraint.
        let Some(first) = self.derive(seed)? else {
            return Err(Stop::Fail(FailKind::Degenerate, "the derivative of the trace identity vanishes".into()));
        };
        let g0 = &self.s.groups[0];
        let mut g = self.eliminate_single(first, g0.omega)?;
        let mut pending: Vec<usize> = (1..self.s.groups.len()).collect();
        while !pending.is_empty() {
            let pick = match self.strat.order {
                Order::Paper => 0,
                Order::MinDegree => self.smallest_block(g, &pending)?,
            };
            let grp = self.s.groups[pending.remove(pick)].clone();
            g = self.eliminate_block(g, grp.lambda, grp.omega)?;
        }
        let last = self.eliminate_single(g, self.s.w)?;
        self.stop_if_final(last)?;
        Err(Stop::Fail(
            FailKind::NoElimination,
            format!("variables remain after the last stage: {}", self.poly(last)),
        ))
    }

    /// Index into `pending` of the group whose `λ` gives the smallest
    /// Sylvester matrix against the first derivative of `g`.
    fn smallest_block(&mut self, g: usize, pending: &[usize]) -> Result<usize, Stop> {
        let d = self.nth_derivative(g, 1)?;
        let mut best = (usize::MAX, 0);
        for (k, &gi) in pending.iter().enumerate() {
            let lam = self.s.groups[gi].lambda;
            let size = self.poly(g).degree_in(lam) as usize + d.map_or(0, |d| self.poly(d).degree_in(lam) as usize);
            if size < best.0 {
                best = (size, k);
            }
        }
        Ok(best.1)
    }
}

/// Nonvanishing linear factors after the seed substitution, primitive with
/// positive leading coefficient. Constants and multiples of `H` are dropped.
pub fn known_factors(s: &Scenario) -> Vec<Poly> {
    let sub = s.seed_substitution();
    let mut out: Vec<Poly> = Vec::new();
    for f in s.nonvanishing_factors() {
        let f = match &sub {
            Some((v, by)) => f.substitute(*v, by, &Limits::unbounded()).expect("linear substitution"),
            None => f,
        };
        // Pure powers of H are left to the h_power record.
        if f.is_constant() || f.support() == [s.h] {
            continue;
        }
        let (_, prim) = f.content_and_primitive().expect("nonzero factor");
        if !out.contains(&prim) {
            out.push(prim);
        }
    }
    out
}

/// Divides out the rational content, the common monomial in the variables
/// other than `H`, the common power of `H` (iff `allow_h_cancel`, and never the
/// whole polynomial) and any of the `known` factors.
pub fn normalize_with(
    p: &Poly,
    h: VarId,
    allow_h_cancel: bool,
    known: &[Poly],
    limits: &Limits,
) -> Result<(Poly, NormalizeRecord), PolyError> {
    if p.is_zero() {
        return Err(PolyError::ZeroPolynomial);
    }
    let (content, prim) = p.content_and_primitive()?;
    let common = prim.monomial_content();
    let monomial = common.with_exp(h, 0);
    let mut q = prim.div_monomial(&monomial);
    let mut h_power = 0;
    if allow_h_cancel {
        h_power = common.exp(h);
        if h_power > 0 && q.len() == 1 && q.terms()[0].0.degree() == h_power {
            h_power -= 1;
        }
        if h_power > 0 {
            q = q.div_monomial(&Monomial::var(p.vars().len(), h, h_power));
        }
    }
    let mut factors = Vec::new();
    for f in known {
        let mut k = 0;
        while !q.is_constant() && f.total_degree() <= q.total_degree() {
            limits.check_time()?;
            match q.exact_div(f, limits) {
                Ok(quot) => {
                    q = quot;
                    k += 1;
                }
                Err(PolyError::NotDivisible) => break,
                Err(e) => return Err(e),
            }
        }
        if k > 0 {
            factors.push((f.clone(), k));
        }
    }
    Ok((q, NormalizeRecord { content, monomial, h_power, factors }))
}

/// Plain normalization without scenario factors.
pub fn normalize(p: &Poly, h: VarId, allow_h_cancel: bool) -> Result<(Poly, NormalizeRecord), PolyError> {
    normalize_with(p, h, allow_h_cancel, &[], &Limits::unbounded())
}

pub fn run_cascade(s: &Scenario, strat: &Strategy) -> Result<Certificate, Error> {
    run_cascade_cached(s, strat, None)
}

pub fn run_cascade_cached(s: &Scenario, strat: &Strategy, cache: Option<&ResultantCache>) -> Result<Certificate, Error> {
    strat.validate()?;
    let mut e = Engine {
        s,
        table: DerivationTable::build(s),
        strat,
        limits: strat.limits(),
        cache,
        subst: s.seed_substitution(),
        known: known_factors(s),
        steps: Vec::new(),
        derived: HashMap::new(),
    };
    let outcome = e.run();
    let mut notes = Vec::new();
    let (final_poly, verdict) = match outcome {
        Ok(()) => unreachable!("the driver always stops"),
        Err(Stop::Final(i)) => {
            let p = e.steps[i].result.clone();
            if p.len() == 1 {
                notes.push(NOTE_POWER_OF_H.to_string());
            }
            (p, Verdict::CmcProven)
        }
        Err(Stop::Fail(kind, why)) => {
            notes.push(why);
            (Poly::zero(&s.vars), Verdict::Failed(kind))
        }
    };
    Ok(Certificate {
        n: s.n,
        r: s.r,
        pattern: s.pattern.clone(),
        strategy: strat.clone(),
        steps: e.steps,
        final_poly,
        verdict,
        witness: None,
        notes,
    })
}

/// Square decomposition of `trace(A²) − (n²/4)H²`. `None` if some term is not
/// a square with positive coefficient.
pub fn sos_witness(s: &Scenario) -> Option<Witness> {
    let leading = s.first_coeff().pow(2);
    let h2 = Poly::monomial(&s.vars, Monomial::var(s.vars.len(), s.h, 2), leading.clone());
    let rest = &s.trace_square() - &h2;
    let mut squares = Vec::new();
    for (m, c) in rest.terms() {
        if !m.is_square() || !c.is_positive() {
            return None;
        }
        squares.push((m.clone(), c.clone()));
    }
    if !squares.iter().any(|(m, _)| m.exp(s.h) == 2) {
        return None;
    }
    Some(Witness { leading, squares })
}

/// Upgrades a `CMC_PROVEN` certificate using the square decomposition.
pub fn minimality_step(s: &Scenario, mut cert: Certificate) -> Result<Certificate, Error> {
    if cert.verdict != Verdict::CmcProven {
        return Err(Error::Usage(format!("minimality needs a CMC_PROVEN certificate, got {}", cert.verdict)));
    }
    match sos_witness(s) {
        Some(w) => {
            cert.witness = Some(w);
            cert.verdict = Verdict::MinimalProven;
        }
        None => {
            cert.verdict = Verdict::Failed(FailKind::Minimality);
            cert.notes.push("trace(A^2) - (n^2/4)H^2 is not a positive combination of squares".into());
        }
    }
    Ok(cert)
}

/// Cascade followed by the minimality step when the cascade succeeds.
pub fn prove(s: &Scenario, strat: &Strategy, cache: Option<&ResultantCache>) -> Result<Certificate, Error> {
    let cert = run_cascade_cached(s, strat, cache)?;
    if cert.verdict == Verdict::CmcProven {
        minimality_step(s, cert)
    } else {
        Ok(cert)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;
    use crate::scenario::Pattern;
    use crate::VarSet;

    #[test]
    fn normalize_examples() {
        let vars = VarSet::new(vec![
            crate::VarRole::MeanCurvature,
            crate::VarRole::Eigenvalue(2),
            crate::VarRole::ConnForm(2),
            crate::VarRole::SharedConnForm,
        ])
        .unwrap();
        let h = vars.find("H").unwrap();
        let p = Poly::parse("9*H*o2 + -6*H*w", &vars).unwrap();
        let (q, rec) = normalize(&p, h, true).unwrap();
        assert_eq!(q.to_string(), "3*o2 + -2*w");
        assert_eq!((rec.content, rec.h_power), (rat(3, 1), 1));
        let (q, rec) = normalize(&Poly::parse("H^3", &vars).unwrap(), h, true).unwrap();
        assert_eq!((q.to_string(), rec.h_power), ("H".to_string(), 2));
        let (q, rec) = normalize(&Poly::parse("4*H^2*w^2 + -2*H^2*w", &vars).unwrap(), h, true).unwrap();
        assert_eq!(q.to_string(), "2*w + -1");
        assert_eq!((rec.content, rec.monomial.fmt_with(&vars), rec.h_power), (rat(2, 1), "w".to_string(), 2));
        let (q, rec) = normalize(&p, h, false).unwrap();
        assert_eq!((q.to_string(), rec.h_power), ("3*H*o2 + -2*H*w".to_string(), 0));
        assert!(normalize(&Poly::zero(&vars), h, true).is_err());
    }

    #[test]
    fn three_two_eliminates_omega_then_w() {
        let s = Scenario::build(3, 2, &Pattern::all_singletons(2)).unwrap();
        let cert = run_cascade(&s, &Strategy::default()).unwrap();
        assert_eq!(cert.verdict, Verdict::CmcProven);
        let elim: Vec<&str> = cert
            .steps
            .iter()
            .filter_map(|st| match st.kind {
                StepKind::Resultant { var, .. } => Some(s.vars.name(var)),
                _ => None,
            })
            .collect();
        assert_eq!(elim.first(), Some(&"o2"));
        assert_eq!(elim.last(), Some(&"w"));
        assert_eq!(cert.final_poly.support(), vec![s.h]);
    }

    #[test]
    fn all_merged_final_is_seed() {
        let s = Scenario::build(4, 2, &"C:2".parse().unwrap()).unwrap();
        let cert = run_cascade(&s, &Strategy::default()).unwrap();
        assert_eq!(cert.steps.len(), 1);
        assert_eq!(cert.final_poly, s.seed);
        assert_eq!(cert.verdict, Verdict::CmcProven);
    }

    #[test]
    fn vanishing_seed_is_degenerate() {
        let s = Scenario::build(4, 3, &"C:2=3".parse().unwrap()).unwrap();
        let cert = run_cascade(&s, &Strategy::default()).unwrap();
        assert_eq!(cert.verdict, Verdict::Failed(FailKind::Degenerate));
    }

    #[test]
    fn witness_examples() {
        let s = Scenario::build(3, 2, &Pattern::all_singletons(2)).unwrap();
        let w = sos_witness(&s).unwrap();
        let text: Vec<String> = w.squares.iter().map(|(m, c)| format!("{c}*{}", m.fmt_with(&s.vars))).collect();
        assert_eq!(text, ["9/4*H^2", "1*l2^2"]);
        let s = Scenario::build(5, 3, &Pattern::all_singletons(3)).unwrap();
        let w = sos_witness(&s).unwrap();
        let text: Vec<String> = w.squares.iter().map(|(m, c)| format!("{c}*{}", m.fmt_with(&s.vars))).collect();
        assert_eq!(text, ["50/9*H^2", "1*l2^2", "1*l3^2"]);
    }

    #[test]
    fn minimality_needs_cmc() {
        let s = Scenario::build(4, 3, &"C:2=3".parse().unwrap()).unwrap();
        let cert = run_cascade(&s, &Strategy::default()).unwrap();
        assert!(minimality_step(&s, cert).is_err());
    }
}
