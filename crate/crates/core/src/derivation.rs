//! The derivation `e₁` on a scenario's polynomial ring.
//!
//! With `k = (n−r+1)/2` and `β = n²/(2(n−r+1))` the rules are
//!
//! ```text
//! e₁(H)  = k·H·w
//! e₁(λ)  = (λ + (n/2)·H)·ω        for each free group
//! e₁(ω)  = ω² − (n/2)·H·λ
//! e₁(w)  = w² − β·H²
//! ```
//!
//! They are taken as axioms: the frame computations that close the system on
//! `{H, λ, ω, w}` are not re-derived here. Coincident eigenvalues share one
//! `λ` and one `ω`, since equal eigenvalues have equal derivatives and the
//! factor `λ + nH/2` never vanishes.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, PolyError};
use crate::limits::Limits;
use crate::poly::{Monomial, Poly, VarRole, VarSet};
use crate::rational::{rat, BigRat};
use crate::scenario::Scenario;

#[derive(Clone, Debug)]
pub struct DerivationTable {
    pub n: u32,
    pub r: u32,
    vars: Arc<VarSet>,
    rules: Vec<Poly>,
}

impl DerivationTable {
    pub fn new(n: u32, r: u32, vars: &Arc<VarSet>) -> Result<Self, Error> {
        let (ni, ri) = (n as i64, r as i64);
        let h = vars.mean_curvature().ok_or_else(|| Error::Usage("variable set lacks H".into()))?;
        let w = vars
            .find_role(&VarRole::SharedConnForm)
            .ok_or_else(|| Error::Usage("variable set lacks w".into()))?;
        let nv = vars.len();
        let mono = |pairs: &[(usize, u32)]| {
            let mut e = vec![0u32; nv];
            for &(i, x) in pairs {
                e[i] += x;
            }
            Monomial::from_exps(&e)
        };
        let term = |pairs: &[(usize, u32)], c: BigRat| (mono(pairs), c);
        let mut rules = Vec::with_capacity(nv);
        for v in vars.ids() {
            let rule = match vars.role(v) {
                VarRole::MeanCurvature => vec![term(&[(h.0, 1), (w.0, 1)], rat(ni - ri + 1, 2))],
                VarRole::SharedConnForm => {
                    vec![term(&[(w.0, 2)], rat(1, 1)), term(&[(h.0, 2)], rat(-ni * ni, 2 * (ni - ri + 1)))]
                }
                VarRole::Eigenvalue(i) => {
                    let o = vars
                        .find_role(&VarRole::ConnForm(*i))
                        .ok_or_else(|| Error::Usage(format!("missing o{i}")))?;
                    vec![term(&[(v.0, 1), (o.0, 1)], rat(1, 1)), term(&[(h.0, 1), (o.0, 1)], rat(ni, 2))]
                }
                VarRole::ConnForm(i) => {
                    let l = vars
                        .find_role(&VarRole::Eigenvalue(*i))
                        .ok_or_else(|| Error::Usage(format!("missing l{i}")))?;
                    vec![term(&[(v.0, 2)], rat(1, 1)), term(&[(h.0, 1), (l.0, 1)], rat(-ni, 2))]
                }
                VarRole::Aux(name) => return Err(Error::Usage(format!("no derivation rule for '{name}'"))),
            };
            rules.push(Poly::from_terms(vars, rule));
        }
        Ok(DerivationTable { n, r, vars: vars.clone(), rules })
    }

    pub fn build(s: &Scenario) -> Self {
        Self::new(s.n, s.r, &s.vars).expect("scenario variable sets always carry a full table")
    }

    pub fn vars(&self) -> &Arc<VarSet> {
        &self.vars
    }

    pub fn rule(&self, v: crate::poly::VarId) -> &Poly {
        &self.rules[v.0]
    }

    pub fn derive(&self, p: &Poly) -> Poly {
        self.derive_with(p, &Limits::unbounded()).expect("unbounded derivation cannot fail")
    }

    /// `e₁(p) = Σ_v ∂p/∂v · e₁(v)`, term by term.
    pub fn derive_with(&self, p: &Poly, limits: &Limits) -> Result<Poly, PolyError> {
        if **p.vars() != *self.vars {
            return Err(PolyError::VarSetMismatch);
        }
        let mut acc: HashMap<Monomial, BigRat> = HashMap::with_capacity(p.len() * 4);
        for (idx, (m, c)) in p.terms().iter().enumerate() {
            if idx % 1024 == 1023 {
                limits.check_time()?;
            }
            for v in self.vars.ids() {
                let e = m.exp(v);
                if e == 0 {
                    continue;
                }
                let base = m.with_exp(v, e - 1);
                let coeff = c * &BigRat::from_int(e);
                for (rm, rc) in self.rules[v.0].terms() {
                    let mono = base.mul(rm, limits.max_exponent)?;
                    let val = &coeff * rc;
                    match acc.get_mut(&mono) {
                        Some(a) => *a += &val,
                        None => {
                            acc.insert(mono, val);
                        }
                    }
                }
            }
        }
        let terms: Vec<_> = acc.into_iter().collect();
        let out = Poly::from_terms(&self.vars, terms);
        limits.check_terms(out.len())?;
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::Pattern;

    fn table(n: u32, r: u32) -> (Scenario, DerivationTable) {
        let s = Scenario::build(n, r, &Pattern::all_singletons(r)).unwrap();
        let t = DerivationTable::build(&s);
        (s, t)
    }

    #[test]
    fn rules_at_5_3() {
        let (s, t) = table(5, 3);
        assert_eq!(t.rule(s.h).to_string(), "3/2*H*w");
        assert_eq!(t.rule(s.groups[0].lambda).to_string(), "5/2*H*o2 + l2*o2");
        assert_eq!(t.rule(s.groups[0].omega).to_string(), "-5/2*H*l2 + o2^2");
        assert_eq!(t.rule(s.w).to_string(), "-25/6*H^2 + w^2");
    }

    #[test]
    fn derive_examples() {
        let (s, t) = table(5, 3);
        assert!(t.derive(&Poly::constant(&s.vars, rat(7, 3))).is_zero());
        let h2 = Poly::parse("H^2", &s.vars).unwrap();
        assert_eq!(t.derive(&h2).to_string(), "3*H^2*w");
        let twice = t.derive(&s.seed).scale(&rat(2, 1));
        let expect = Poly::parse("5*H*o2 + 5*H*o3 + -25/2*H*w + 2*l2*o2 + 2*l3*o3", &s.vars).unwrap();
        assert_eq!(twice, expect);
    }

    #[test]
    fn merged_groups_share_variables() {
        let p: Pattern = "B:2=3,C:4".parse().unwrap();
        let s = Scenario::build(6, 4, &p).unwrap();
        assert_eq!(s.vars.names(), ["H", "l2", "o2", "w"]);
        let t = DerivationTable::build(&s);
        assert_eq!(t.rule(s.h).to_string(), "3/2*H*w");
        assert_eq!(t.rule(s.w).to_string(), "-6*H^2 + w^2");
    }

    #[test]
    fn aux_variables_rejected() {
        assert!(DerivationTable::new(5, 3, &VarSet::aux(&["x"])).is_err());
    }
}
