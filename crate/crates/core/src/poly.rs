//! Sparse multivariate polynomials over [`BigRat`].
//!
//! A [`Poly`] is tied to a shared [`VarSet`]. Terms are kept sorted in
//! descending graded-lex order (total degree first, ties broken by the
//! leftmost larger exponent), so the first term is the leading term and the
//! printed form is canonical.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use smallvec::SmallVec;

use crate::error::PolyError;
use crate::limits::Limits;
use crate::rational::BigRat;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarRole {
    MeanCurvature,
    Eigenvalue(u32),
    ConnForm(u32),
    SharedConnForm,
    /// Free-standing indeterminate for use outside a geometric scenario.
    Aux(String),
}

impl VarRole {
    pub fn name(&self) -> String {
        match self {
            VarRole::MeanCurvature => "H".into(),
            VarRole::Eigenvalue(i) => format!("l{i}"),
            VarRole::ConnForm(i) => format!("o{i}"),
            VarRole::SharedConnForm => "w".into(),
            VarRole::Aux(s) => s.clone(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub usize);

/// Ordered list of variables; the order fixes monomial layout and term order.
#[derive(Debug, PartialEq, Eq, Hash)]
pub struct VarSet {
    roles: Vec<VarRole>,
    names: Vec<String>,
}

impl VarSet {
    pub fn new(roles: Vec<VarRole>) -> Result<Arc<Self>, PolyError> {
        let names: Vec<String> = roles.iter().map(|r| r.name()).collect();
        for (i, n) in names.iter().enumerate() {
            if names[..i].contains(n) {
                return Err(PolyError::Parse(format!("duplicate variable '{n}'")));
            }
            if n.is_empty() || !n.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(PolyError::Parse(format!("bad variable name '{n}'")));
            }
        }
        let curv = roles.iter().filter(|r| **r == VarRole::MeanCurvature).count();
        let shared = roles.iter().filter(|r| **r == VarRole::SharedConnForm).count();
        if curv > 1 || shared > 1 {
            return Err(PolyError::Parse("H and w may each appear at most once".into()));
        }
        Ok(Arc::new(VarSet { roles, names }))
    }

    /// Variable set made of auxiliary names only, e.g. `["x", "y"]`.
    pub fn aux(names: &[&str]) -> Arc<Self> {
        Self::new(names.iter().map(|n| VarRole::Aux(n.to_string())).collect()).expect("valid aux names")
    }

    pub fn len(&self) -> usize {
        self.roles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roles.is_empty()
    }

    pub fn role(&self, v: VarId) -> &VarRole {
        &self.roles[v.0]
    }

    pub fn name(&self, v: VarId) -> &str {
        &self.names[v.0]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn find(&self, name: &str) -> Option<VarId> {
        self.names.iter().position(|n| n == name).map(VarId)
    }

    pub fn find_role(&self, role: &VarRole) -> Option<VarId> {
        self.roles.iter().position(|r| r == role).map(VarId)
    }

    pub fn mean_curvature(&self) -> Option<VarId> {
        self.find_role(&VarRole::MeanCurvature)
    }

    pub fn ids(&self) -> impl Iterator<Item = VarId> {
        (0..self.roles.len()).map(VarId)
    }
}

pub type Exps = SmallVec<[u32; 8]>;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial {
    deg: u32,
    exps: Exps,
}

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial { deg: 0, exps: SmallVec::from_elem(0, nvars) }
    }

    pub fn from_exps(exps: &[u32]) -> Self {
        Monomial { deg: exps.iter().sum(), exps: SmallVec::from_slice(exps) }
    }

    pub fn var(nvars: usize, v: VarId, e: u32) -> Self {
        let mut m = Self::one(nvars);
        m.exps[v.0] = e;
        m.deg = e;
        m
    }

    pub fn exps(&self) -> &[u32] {
        &self.exps
    }

    pub fn degree(&self) -> u32 {
        self.deg
    }

    pub fn exp(&self, v: VarId) -> u32 {
        self.exps[v.0]
    }

    pub fn is_one(&self) -> bool {
        self.deg == 0
    }

    pub fn mul(&self, other: &Monomial, max_exp: u32) -> Result<Monomial, PolyError> {
        let mut exps = self.exps.clone();
        for (a, b) in exps.iter_mut().zip(other.exps.iter()) {
            *a = a
                .checked_add(*b)
                .filter(|e| *e <= max_exp)
                .ok_or_else(|| PolyError::Resource("exponent overflow".into()))?;
        }
        Ok(Monomial { deg: self.deg + other.deg, exps })
    }

    /// `self / other` when every exponent of `other` is at most the matching one of `self`.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        let mut exps = self.exps.clone();
        for (a, b) in exps.iter_mut().zip(other.exps.iter()) {
            *a = a.checked_sub(*b)?;
        }
        Some(Monomial { deg: self.deg - other.deg, exps })
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.exps.iter().zip(other.exps.iter()).all(|(a, b)| a <= b)
    }

    pub fn gcd(&self, other: &Monomial) -> Monomial {
        let exps: Exps = self.exps.iter().zip(other.exps.iter()).map(|(a, b)| *a.min(b)).collect();
        Monomial { deg: exps.iter().sum(), exps }
    }

    pub fn with_exp(&self, v: VarId, e: u32) -> Monomial {
        let mut exps = self.exps.clone();
        let old = exps[v.0];
        exps[v.0] = e;
        Monomial { deg: self.deg - old + e, exps }
    }

    pub fn is_square(&self) -> bool {
        self.exps.iter().all(|e| e % 2 == 0)
    }

    pub fn fmt_with(&self, vars: &VarSet) -> String {
        let mut parts = Vec::new();
        for (i, &e) in self.exps.iter().enumerate() {
            match e {
                0 => {}
                1 => parts.push(vars.names[i].clone()),
                _ => parts.push(format!("{}^{}", vars.names[i], e)),
            }
        }
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join("*")
        }
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.deg.cmp(&other.deg).then_with(|| self.exps.cmp(&other.exps))
    }
}

pub type Term = (Monomial, BigRat);

#[derive(Clone, Debug)]
pub struct Poly {
    vars: Arc<VarSet>,
    terms: Vec<Term>,
}

impl PartialEq for Poly {
    fn eq(&self, other: &Self) -> bool {
        same_vars(&self.vars, &other.vars) && self.terms == other.terms
    }
}

impl Eq for Poly {}

fn same_vars(a: &Arc<VarSet>, b: &Arc<VarSet>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl Poly {
    pub fn zero(vars: &Arc<VarSet>) -> Self {
        Poly { vars: vars.clone(), terms: Vec::new() }
    }

    pub fn one(vars: &Arc<VarSet>) -> Self {
        Self::constant(vars, BigRat::one())
    }

    pub fn constant(vars: &Arc<VarSet>, c: BigRat) -> Self {
        if c.is_zero() {
            return Self::zero(vars);
        }
        Poly { vars: vars.clone(), terms: vec![(Monomial::one(vars.len()), c)] }
    }

    pub fn var(vars: &Arc<VarSet>, v: VarId) -> Self {
        Self::monomial(vars, Monomial::var(vars.len(), v, 1), BigRat::one())
    }

    pub fn monomial(vars: &Arc<VarSet>, m: Monomial, c: BigRat) -> Self {
        assert_eq!(m.exps.len(), vars.len(), "monomial length must match the variable set");
        if c.is_zero() {
            return Self::zero(vars);
        }
        Poly { vars: vars.clone(), terms: vec![(m, c)] }
    }

    /// Builds a polynomial from arbitrary terms: like monomials are merged,
    /// zero coefficients dropped, and the result sorted canonically.
    pub fn from_terms(vars: &Arc<VarSet>, terms: Vec<Term>) -> Self {
        let mut map: HashMap<Monomial, BigRat> = HashMap::with_capacity(terms.len());
        for (m, c) in terms {
            assert_eq!(m.exps.len(), vars.len(), "monomial length must match the variable set");
            match map.get_mut(&m) {
                Some(acc) => *acc += &c,
                None => {
                    map.insert(m, c);
                }
            }
        }
        Self::from_map(vars, map)
    }

    fn from_map(vars: &Arc<VarSet>, map: HashMap<Monomial, BigRat>) -> Self {
        let mut terms: Vec<Term> = map.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        terms.sort_unstable_by(|a, b| b.0.cmp(&a.0));
        Poly { vars: vars.clone(), terms }
    }

    /// Terms already sorted descending and free of zeros and duplicates.
    fn from_sorted(vars: &Arc<VarSet>, terms: Vec<Term>) -> Self {
        debug_assert!(terms.windows(2).all(|w| w[0].0 > w[1].0));
        debug_assert!(terms.iter().all(|t| !t.1.is_zero()));
        Poly { vars: vars.clone(), terms }
    }

    pub fn vars(&self) -> &Arc<VarSet> {
        &self.vars
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn into_terms(self) -> Vec<Term> {
        self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty() || (self.terms.len() == 1 && self.terms[0].0.is_one())
    }

    pub fn constant_value(&self) -> Option<BigRat> {
        match self.terms.as_slice() {
            [] => Some(BigRat::zero()),
            [(m, c)] if m.is_one() => Some(c.clone()),
            _ => None,
        }
    }

    pub fn leading_term(&self) -> Option<&Term> {
        self.terms.first()
    }

    pub fn leading_coeff(&self) -> Option<&BigRat> {
        self.terms.first().map(|t| &t.1)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.first().map_or(0, |t| t.0.deg)
    }

    pub fn degree_in(&self, v: VarId) -> u32 {
        self.terms.iter().map(|t| t.0.exps[v.0]).max().unwrap_or(0)
    }

    pub fn contains_var(&self, v: VarId) -> bool {
        self.terms.iter().any(|t| t.0.exps[v.0] > 0)
    }

    /// Variables that actually occur, in variable-set order.
    pub fn support(&self) -> Vec<VarId> {
        self.vars.ids().filter(|v| self.contains_var(*v)).collect()
    }

    pub fn degrees(&self) -> Vec<u32> {
        self.vars.ids().map(|v| self.degree_in(v)).collect()
    }

    pub fn max_coeff_bits(&self) -> u64 {
        self.terms.iter().map(|t| t.1.bits()).max().unwrap_or(0)
    }

    pub fn is_homogeneous(&self) -> bool {
        match self.terms.first() {
            None => true,
            Some(t) => self.terms.iter().all(|s| s.0.deg == t.0.deg),
        }
    }

    fn check_vars(&self, other: &Poly) -> Result<(), PolyError> {
        if same_vars(&self.vars, &other.vars) {
            Ok(())
        } else {
            Err(PolyError::VarSetMismatch)
        }
    }

    pub fn try_add(&self, other: &Poly) -> Result<Poly, PolyError> {
        self.check_vars(other)?;
        Ok(self.merge(other, false))
    }

    pub fn try_sub(&self, other: &Poly) -> Result<Poly, PolyError> {
        self.check_vars(other)?;
        Ok(self.merge(other, true))
    }

    fn merge(&self, other: &Poly, negate: bool) -> Poly {
        use std::cmp::Ordering::*;
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.terms, &other.terms);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Greater => {
                    out.push(a[i].clone());
                    i += 1;
                }
                Less => {
                    let c = if negate { -&b[j].1 } else { b[j].1.clone() };
                    out.push((b[j].0.clone(), c));
                    j += 1;
                }
                Equal => {
                    let c = if negate { &a[i].1 - &b[j].1 } else { &a[i].1 + &b[j].1 };
                    if !c.is_zero() {
                        out.push((a[i].0.clone(), c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend(a[i..].iter().cloned());
        for t in &b[j..] {
            let c = if negate { -&t.1 } else { t.1.clone() };
            out.push((t.0.clone(), c));
        }
        Poly::from_sorted(&self.vars, out)
    }

    pub fn try_mul(&self, other: &Poly, limits: &Limits) -> Result<Poly, PolyError> {
        self.check_vars(other)?;
        if self.is_zero() || other.is_zero() {
            return Ok(Poly::zero(&self.vars));
        }
        let (small, big) = if self.len() <= other.len() { (self, other) } else { (other, self) };
        if small.len() == 1 {
            let (m, c) = &small.terms[0];
            let mut out = Vec::with_capacity(big.len());
            for (bm, bc) in &big.terms {
                out.push((bm.mul(m, limits.max_exponent)?, bc * c));
            }
            // Multiplying by a monomial preserves the order.
            return Ok(Poly::from_sorted(&self.vars, out));
        }
        let mut map: HashMap<Monomial, BigRat> = HashMap::with_capacity(big.len() * 2);
        for (k, (am, ac)) in small.terms.iter().enumerate() {
            if k % 64 == 63 {
                limits.check_time()?;
                limits.check_terms(map.len())?;
            }
            for (bm, bc) in &big.terms {
                let m = am.mul(bm, limits.max_exponent)?;
                let c = ac * bc;
                match map.get_mut(&m) {
                    Some(acc) => *acc += &c,
                    None => {
                        map.insert(m, c);
                    }
                }
            }
        }
        let p = Poly::from_map(&self.vars, map);
        limits.check_terms(p.len())?;
        Ok(p)
    }

    pub fn scale(&self, c: &BigRat) -> Poly {
        if c.is_zero() {
            return Poly::zero(&self.vars);
        }
        let terms = self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect();
        Poly::from_sorted(&self.vars, terms)
    }

    pub fn mul_monomial(&self, m: &Monomial) -> Poly {
        let terms = self
            .terms
            .iter()
            .map(|(a, c)| (a.mul(m, u32::MAX).expect("exponent overflow"), c.clone()))
            .collect();
        Poly::from_sorted(&self.vars, terms)
    }

    /// Exact division by a monomial; panics if some term is not divisible.
    pub fn div_monomial(&self, m: &Monomial) -> Poly {
        let terms = self
            .terms
            .iter()
            .map(|(a, c)| (a.div(m).expect("monomial does not divide"), c.clone()))
            .collect();
        Poly::from_sorted(&self.vars, terms)
    }

    pub fn pow(&self, e: u32, limits: &Limits) -> Result<Poly, PolyError> {
        let mut result = Poly::one(&self.vars);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = result.try_mul(&base, limits)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.try_mul(&base, limits)?;
            }
        }
        Ok(result)
    }

    /// Largest monomial dividing every term.
    pub fn monomial_content(&self) -> Monomial {
        let mut it = self.terms.iter();
        match it.next() {
            None => Monomial::one(self.vars.len()),
            Some(first) => it.fold(first.0.clone(), |acc, t| acc.gcd(&t.0)),
        }
    }

    /// Splits `p = c·q` where `q` has coprime integer coefficients and a
    /// positive leading coefficient; `c` carries the sign.
    pub fn content_and_primitive(&self) -> Result<(BigRat, Poly), PolyError> {
        if self.is_zero() {
            return Err(PolyError::ZeroPolynomial);
        }
        let mut g = BigInt::zero();
        let mut l = BigInt::one();
        for (_, c) in &self.terms {
            g = g.gcd(c.numer());
            l = l.lcm(c.denom());
        }
        if self.terms[0].1.is_negative() {
            g = -g;
        }
        let content = BigRat::new(g, l)?;
        let inv = content.inv()?;
        Ok((content, self.scale(&inv)))
    }

    /// Partial derivative with respect to `v`.
    pub fn partial(&self, v: VarId) -> Poly {
        let mut terms = Vec::new();
        for (m, c) in &self.terms {
            let e = m.exps[v.0];
            if e > 0 {
                terms.push((m.with_exp(v, e - 1), c * &BigRat::from_int(e)));
            }
        }
        // Lowering one exponent can reorder terms, so re-sort.
        terms.sort_unstable_by(|a, b| b.0.cmp(&a.0));
        Poly::from_sorted(&self.vars, terms)
    }

    /// Coefficients `[c_d, ..., c_0]` with `p = Σ c_k v^k`; empty for zero.
    pub fn univariate_view(&self, v: VarId) -> Vec<Poly> {
        if self.is_zero() {
            return Vec::new();
        }
        let d = self.degree_in(v) as usize;
        let mut buckets: Vec<Vec<Term>> = vec![Vec::new(); d + 1];
        for (m, c) in &self.terms {
            let e = m.exps[v.0] as usize;
            buckets[e].push((m.with_exp(v, 0), c.clone()));
        }
        buckets
            .into_iter()
            .rev()
            .map(|mut ts| {
                // Removing v keeps the relative order only within equal v-degree; sort anyway.
                ts.sort_unstable_by(|a, b| b.0.cmp(&a.0));
                Poly::from_sorted(&self.vars, ts)
            })
            .collect()
    }

    /// Inverse of [`Poly::univariate_view`].
    pub fn from_univariate(vars: &Arc<VarSet>, coeffs: &[Poly], v: VarId) -> Poly {
        let d = coeffs.len();
        let mut terms = Vec::new();
        for (i, c) in coeffs.iter().enumerate() {
            let e = (d - 1 - i) as u32;
            for (m, a) in &c.terms {
                debug_assert_eq!(m.exps[v.0], 0);
                terms.push((m.with_exp(v, e), a.clone()));
            }
        }
        Poly::from_terms(vars, terms)
    }

    /// Replaces every occurrence of `v` by `q`.
    pub fn substitute(&self, v: VarId, q: &Poly, limits: &Limits) -> Result<Poly, PolyError> {
        self.check_vars(q)?;
        if !self.contains_var(v) {
            return Ok(self.clone());
        }
        let coeffs = self.univariate_view(v);
        // Horner in q. The coefficients are free of v, so this is also
        // correct when q itself mentions v.
        let mut acc = Poly::zero(&self.vars);
        for c in &coeffs {
            acc = acc.try_mul(q, limits)?.merge(c, false);
            limits.check_terms(acc.len())?;
        }
        Ok(acc)
    }

    /// Evaluates at a full assignment.
    pub fn eval(&self, assignment: &HashMap<VarId, BigRat>) -> Result<BigRat, PolyError> {
        let mut point = Vec::with_capacity(self.vars.len());
        for v in self.vars.ids() {
            match assignment.get(&v) {
                Some(x) => point.push(Some(x.clone())),
                None if !self.contains_var(v) => point.push(None),
                None => return Err(PolyError::UnknownVariable(self.vars.name(v).to_string())),
            }
        }
        let mut sum = BigRat::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (i, &e) in m.exps.iter().enumerate() {
                if e > 0 {
                    t *= &point[i].as_ref().expect("checked above").pow(e);
                }
            }
            sum += &t;
        }
        Ok(sum)
    }

    /// Substitutes constants for some variables.
    pub fn specialize(&self, assignment: &[(VarId, BigRat)]) -> Poly {
        let mut terms = Vec::with_capacity(self.terms.len());
        for (m, c) in &self.terms {
            let mut m = m.clone();
            let mut c = c.clone();
            for (v, x) in assignment {
                let e = m.exps[v.0];
                if e > 0 {
                    c *= &x.pow(e);
                    m = m.with_exp(*v, 0);
                }
            }
            terms.push((m, c));
        }
        Poly::from_terms(&self.vars, terms)
    }

    /// Sets `h := 1`.
    pub fn dehomogenize(&self, h: VarId) -> Poly {
        let terms = self.terms.iter().map(|(m, c)| (m.with_exp(h, 0), c.clone())).collect();
        Poly::from_terms(&self.vars, terms)
    }

    /// Multiplies each term by the power of `h` that lifts it to degree `d`.
    pub fn homogenize(&self, h: VarId, d: u32) -> Result<Poly, PolyError> {
        let mut terms = Vec::with_capacity(self.terms.len());
        for (m, c) in &self.terms {
            if m.exps[h.0] != 0 || m.deg > d {
                return Err(PolyError::Parse("cannot homogenize".into()));
            }
            terms.push((m.with_exp(h, d - m.deg), c.clone()));
        }
        Ok(Poly::from_terms(&self.vars, terms))
    }

    /// Exact quotient `self / d`, failing with [`PolyError::NotDivisible`].
    pub fn exact_div(&self, d: &Poly, limits: &Limits) -> Result<Poly, PolyError> {
        self.check_vars(d)?;
        if d.is_zero() {
            return Err(PolyError::DivisionByZero);
        }
        if let Some(c) = d.constant_value() {
            return Ok(self.scale(&c.inv()?));
        }
        if d.len() == 1 {
            let (dm, dc) = &d.terms[0];
            let inv = dc.inv()?;
            let mut out = Vec::with_capacity(self.len());
            for (m, c) in &self.terms {
                out.push((m.div(dm).ok_or(PolyError::NotDivisible)?, c * &inv));
            }
            return Ok(Poly::from_sorted(&self.vars, out));
        }
        let (lm, lc) = &d.terms[0];
        let lc_inv = lc.inv()?;
        let mut rem: BTreeMap<Monomial, BigRat> = self.terms.iter().cloned().collect();
        let mut quot = Vec::new();
        let mut steps = 0usize;
        while let Some((m, c)) = rem.pop_last() {
            steps += 1;
            if steps % 256 == 0 {
                limits.check_time()?;
            }
            let qm = m.div(lm).ok_or(PolyError::NotDivisible)?;
            let qc = &c * &lc_inv;
            for (dm, dc) in &d.terms[1..] {
                let t = qm.mul(dm, u32::MAX)?;
                let delta = &qc * dc;
                match rem.get_mut(&t) {
                    Some(acc) => {
                        *acc -= &delta;
                        if acc.is_zero() {
                            rem.remove(&t);
                        }
                    }
                    None => {
                        rem.insert(t, -delta);
                    }
                }
            }
            quot.push((qm, qc));
        }
        Ok(Poly::from_sorted(&self.vars, quot))
    }

    pub fn neg(&self) -> Poly {
        let terms = self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect();
        Poly::from_sorted(&self.vars, terms)
    }

    /// Returns the same polynomial re-expressed over another variable set
    /// that contains every variable occurring here (matched by name).
    pub fn rebase(&self, target: &Arc<VarSet>) -> Result<Poly, PolyError> {
        let mut map = Vec::with_capacity(self.vars.len());
        for v in self.vars.ids() {
            match target.find(self.vars.name(v)) {
                Some(t) => map.push(Some(t)),
                None if !self.contains_var(v) => map.push(None),
                None => return Err(PolyError::UnknownVariable(self.vars.name(v).to_string())),
            }
        }
        let mut terms = Vec::with_capacity(self.len());
        for (m, c) in &self.terms {
            let mut exps: Exps = SmallVec::from_elem(0, target.len());
            for (i, &e) in m.exps.iter().enumerate() {
                if let Some(t) = map[i] {
                    exps[t.0] = e;
                }
            }
            terms.push((Monomial { deg: m.deg, exps }, c.clone()));
        }
        Ok(Poly::from_terms(target, terms))
    }

    /// Parses the canonical text form (and a few harmless variants such as
    /// `-H` or `1*H` or `x^1`).
    pub fn parse(s: &str, vars: &Arc<VarSet>) -> Result<Poly, PolyError> {
        let s = s.trim();
        if s.is_empty() {
            return Err(PolyError::Parse("empty polynomial".into()));
        }
        if s == "0" {
            return Ok(Poly::zero(vars));
        }
        let mut terms = Vec::new();
        for raw in s.split(" + ") {
            terms.push(parse_term(raw.trim(), vars)?);
        }
        let p = Poly::from_terms(vars, terms);
        Ok(p)
    }

    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

fn parse_term(t: &str, vars: &Arc<VarSet>) -> Result<Term, PolyError> {
    let bad = || PolyError::Parse(format!("bad term '{t}'"));
    if t.is_empty() {
        return Err(bad());
    }
    let mut coeff = BigRat::one();
    let mut m = Monomial::one(vars.len());
    let mut factors: Vec<&str> = t.split('*').collect();
    let first = factors[0];
    let starts_numeric = first.trim_start_matches('-').starts_with(|c: char| c.is_ascii_digit());
    if starts_numeric {
        coeff = first.parse::<BigRat>().map_err(|_| bad())?;
        factors.remove(0);
    } else if let Some(rest) = first.strip_prefix('-') {
        coeff = -coeff;
        factors[0] = rest;
    }
    for f in factors {
        let (name, e) = match f.split_once('^') {
            Some((n, e)) => (n, e.parse::<u32>().map_err(|_| bad())?),
            None => (f, 1),
        };
        let v = vars.find(name).ok_or_else(|| PolyError::UnknownVariable(name.to_string()))?;
        let cur = m.exps[v.0];
        m = m.with_exp(v, cur + e);
    }
    Ok((m, coeff))
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            if m.is_one() {
                write!(f, "{c}")?;
            } else if c.is_one() {
                write!(f, "{}", m.fmt_with(&self.vars))?;
            } else if (-c).is_one() {
                write!(f, "-{}", m.fmt_with(&self.vars))?;
            } else {
                write!(f, "{c}*{}", m.fmt_with(&self.vars))?;
            }
        }
        Ok(())
    }
}

macro_rules! poly_binop {
    ($tr:ident, $m:ident, $body:expr) => {
        impl<'a> std::ops::$tr<&'a Poly> for &'a Poly {
            type Output = Poly;
            /// Panics if the operands live over different variable sets.
            fn $m(self, rhs: &Poly) -> Poly {
                let f: fn(&Poly, &Poly) -> Result<Poly, PolyError> = $body;
                f(self, rhs).expect("polynomial operation failed")
            }
        }
        impl std::ops::$tr<Poly> for Poly {
            type Output = Poly;
            fn $m(self, rhs: Poly) -> Poly {
                (&self).$m(&rhs)
            }
        }
    };
}

poly_binop!(Add, add, |a, b| a.try_add(b));
poly_binop!(Sub, sub, |a, b| a.try_sub(b));
poly_binop!(Mul, mul, |a, b| a.try_mul(b, &Limits::unbounded()));

impl std::ops::Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly::neg(self)
    }
}

/// Integer coefficient with the largest absolute value, as a bit count.
pub fn max_abs_bits(p: &Poly) -> u64 {
    p.terms().iter().map(|t| t.1.numer().abs().bits()).max().unwrap_or(0)
}
