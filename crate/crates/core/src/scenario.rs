//! Concrete `(n, r, pattern)` instances of the hypersurface setup.
//!
//! The principal curvatures are `λ₁ = −nH/2` (direction of grad H), the
//! free eigenvalues `λ₂..λ_r`, and a repeated eigenvalue `λ = nH/(n−r+1)`
//! of multiplicity `n−r`. Both `λ₁` and `λ` are fixed multiples of `H` and
//! never become variables. A [`Pattern`] says which of `λ₂..λ_r` coincide
//! with each other and which coincide with `λ`.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, PolyError};
use crate::poly::{Monomial, Poly, VarId, VarRole, VarSet};
use crate::rational::{rat, BigRat};

/// Coincidence pattern among `λ₂..λ_r`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pattern {
    /// Groups of indices sharing one eigenvalue, sorted by smallest member.
    groups: Vec<Vec<u32>>,
    /// Position in `groups` of the group equal to the repeated eigenvalue.
    merged: Option<usize>,
}

impl Pattern {
    /// Case A: all eigenvalues distinct, none equal to the repeated one.
    pub fn all_singletons(r: u32) -> Self {
        Pattern { groups: (2..=r).map(|i| vec![i]).collect(), merged: None }
    }

    pub fn new(mut groups: Vec<Vec<u32>>, merged: Option<Vec<u32>>) -> Result<Self, Error> {
        for g in groups.iter_mut() {
            g.sort_unstable();
        }
        let merged_key = merged.map(|mut m| {
            m.sort_unstable();
            m
        });
        groups.sort();
        let merged = match merged_key {
            Some(m) => Some(
                groups
                    .iter()
                    .position(|g| *g == m)
                    .ok_or_else(|| Error::Usage("merged group must be one of the groups".into()))?,
            ),
            None => None,
        };
        Ok(Pattern { groups, merged })
    }

    pub fn groups(&self) -> &[Vec<u32>] {
        &self.groups
    }

    pub fn merged_group(&self) -> Option<&[u32]> {
        self.merged.map(|i| self.groups[i].as_slice())
    }

    /// Groups that keep their own eigenvalue variable.
    pub fn free_groups(&self) -> Vec<&[u32]> {
        self.groups
            .iter()
            .enumerate()
            .filter(|(i, _)| Some(*i) != self.merged)
            .map(|(_, g)| g.as_slice())
            .collect()
    }

    pub fn merged_size(&self) -> u32 {
        self.merged_group().map_or(0, |g| g.len() as u32)
    }

    pub fn case_label(&self) -> &'static str {
        if self.merged.is_some() {
            "C"
        } else if self.groups.iter().any(|g| g.len() > 1) {
            "B"
        } else {
            "A"
        }
    }

    fn validate(&self, r: u32) -> Result<(), Error> {
        let all: Vec<u32> = self.groups.iter().flatten().copied().collect();
        let set: BTreeSet<u32> = all.iter().copied().collect();
        let expected: BTreeSet<u32> = (2..=r).collect();
        if set.len() != all.len() || set != expected {
            return Err(Error::Usage(format!("pattern '{self}' does not partition 2..{r}")));
        }
        Ok(())
    }

    /// Representative of the relabeling class: free groups by decreasing
    /// size, then the merged group, numbered consecutively from 2.
    pub fn canonical(&self) -> Pattern {
        let mut sizes: Vec<usize> = self.free_groups().iter().map(|g| g.len()).collect();
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        let mut next = 2u32;
        let mut groups = Vec::new();
        for s in sizes {
            groups.push((next..next + s as u32).collect::<Vec<u32>>());
            next += s as u32;
        }
        let merged = self.merged_group().map(|g| {
            let m: Vec<u32> = (next..next + g.len() as u32).collect();
            groups.push(m.clone());
            m
        });
        Pattern::new(groups, merged).expect("canonical pattern is well formed")
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut items = Vec::new();
        for (i, g) in self.groups.iter().enumerate() {
            let joined = g.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("=");
            if Some(i) == self.merged {
                continue;
            }
            if g.len() > 1 {
                items.push(format!("B:{joined}"));
            }
        }
        if let Some(g) = self.merged_group() {
            let joined = g.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("=");
            items.push(format!("C:{joined}"));
        }
        if items.is_empty() {
            write!(f, "A")
        } else {
            write!(f, "{}", items.join(","))
        }
    }
}

impl FromStr for Pattern {
    type Err = Error;

    /// Accepts `A`, or comma-separated items `B:i=j[=k..]` (those eigenvalues
    /// coincide) and `C:i[=j..]` (those eigenvalues equal the repeated one).
    /// Indices not mentioned stay singletons; the range is checked later.
    fn from_str(s: &str) -> Result<Self, Error> {
        let s = s.trim();
        let bad = |why: &str| Error::Usage(format!("bad pattern '{s}': {why}"));
        let mut unions: Vec<Vec<u32>> = Vec::new();
        let mut merged: Vec<u32> = Vec::new();
        if s != "A" {
            for item in s.split(',') {
                let (kind, rest) = item.trim().split_once(':').ok_or_else(|| bad("missing ':'"))?;
                let idx: Vec<u32> = rest
                    .split('=')
                    .map(|x| x.trim().parse::<u32>().map_err(|_| bad("bad index")))
                    .collect::<Result<_, _>>()?;
                match kind.trim() {
                    "B" if idx.len() >= 2 => unions.push(idx),
                    "B" => return Err(bad("B needs at least two indices")),
                    "C" => {
                        merged.extend(&idx);
                        unions.push(idx);
                    }
                    _ => return Err(bad("item kind must be B or C")),
                }
            }
        }
        Ok(RawPattern { unions, merged }.into_pattern())
    }
}

/// Parsed pattern before the index range is known.
struct RawPattern {
    unions: Vec<Vec<u32>>,
    merged: Vec<u32>,
}

impl RawPattern {
    fn into_pattern(self) -> Pattern {
        // Union-find over the mentioned indices; the rest are filled in by `resolve`.
        let mut groups: Vec<BTreeSet<u32>> = Vec::new();
        let all_merged = (!self.merged.is_empty()).then_some(&self.merged);
        for u in self.unions.iter().chain(all_merged) {
            let mut merged_set: BTreeSet<u32> = u.iter().copied().collect();
            groups.retain(|g| {
                if g.iter().any(|x| merged_set.contains(x)) {
                    merged_set.extend(g.iter().copied());
                    false
                } else {
                    true
                }
            });
            groups.push(merged_set);
        }
        let mut gs: Vec<Vec<u32>> = groups.into_iter().map(|g| g.into_iter().collect()).collect();
        gs.sort();
        let merged = self.merged.first().and_then(|m| gs.iter().position(|g| g.contains(m)));
        Pattern { groups: gs, merged }
    }
}

impl Pattern {
    /// Completes a parsed pattern with the singleton groups it leaves implicit.
    pub fn resolve(&self, r: u32) -> Result<Pattern, Error> {
        let mentioned: BTreeSet<u32> = self.groups.iter().flatten().copied().collect();
        if let Some(bad) = mentioned.iter().find(|i| **i < 2 || **i > r) {
            return Err(Error::Usage(format!("pattern index {bad} outside 2..{r}")));
        }
        let mut groups = self.groups.clone();
        let merged = self.merged_group().map(|g| g.to_vec());
        for i in 2..=r {
            if !mentioned.contains(&i) {
                groups.push(vec![i]);
            }
        }
        let p = Pattern::new(groups, merged)?;
        p.validate(r)?;
        Ok(p)
    }
}

/// All coincidence patterns for `r`, one per relabeling class. The Case A
/// pattern comes first, then by merged-group size, then by free partition.
pub fn list_patterns(r: u32) -> Vec<Pattern> {
    fn partitions(n: u32, max: u32) -> Vec<Vec<u32>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for first in (1..=n.min(max)).rev() {
            for mut rest in partitions(n - first, first) {
                rest.insert(0, first);
                out.push(rest);
            }
        }
        out
    }
    let total = r - 1;
    let mut out = Vec::new();
    for merged in 0..=total {
        let mut parts = partitions(total - merged, total - merged);
        // Finest partition first.
        parts.reverse();
        for sizes in parts {
            let mut groups = Vec::new();
            let mut next = 2u32;
            let mut sorted = sizes.clone();
            sorted.sort_unstable_by(|a, b| b.cmp(a));
            for s in sorted {
                groups.push((next..next + s).collect::<Vec<u32>>());
                next += s;
            }
            let m = if merged > 0 {
                let g: Vec<u32> = (next..next + merged).collect();
                groups.push(g.clone());
                Some(g)
            } else {
                None
            };
            out.push(Pattern::new(groups, m).expect("enumerated pattern is well formed"));
        }
    }
    out
}

/// One free eigenvalue group with its two variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FreeGroup {
    pub indices: Vec<u32>,
    pub lambda: VarId,
    pub omega: VarId,
}

impl FreeGroup {
    pub fn size(&self) -> u32 {
        self.indices.len() as u32
    }
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub n: u32,
    pub r: u32,
    pub pattern: Pattern,
    pub vars: Arc<VarSet>,
    pub groups: Vec<FreeGroup>,
    pub h: VarId,
    pub w: VarId,
    pub seed: Poly,
}

pub fn validate_nr(n: u32, r: u32) -> Result<(), Error> {
    if n < 3 {
        return Err(Error::Usage(format!("n = {n} must be at least 3")));
    }
    if r < 2 || r > n - 1 {
        return Err(Error::Usage(format!("r = {r} must lie in [2, {}]", n - 1)));
    }
    Ok(())
}

impl Scenario {
    pub fn build(n: u32, r: u32, pattern: &Pattern) -> Result<Scenario, Error> {
        validate_nr(n, r)?;
        let pattern = pattern.resolve(r)?;
        let free: Vec<Vec<u32>> = pattern.free_groups().iter().map(|g| g.to_vec()).collect();
        let mut roles = vec![VarRole::MeanCurvature];
        roles.extend(free.iter().map(|g| VarRole::Eigenvalue(g[0])));
        roles.extend(free.iter().map(|g| VarRole::ConnForm(g[0])));
        roles.push(VarRole::SharedConnForm);
        let vars = VarSet::new(roles)?;
        let m = free.len();
        let groups: Vec<FreeGroup> = free
            .into_iter()
            .enumerate()
            .map(|(i, indices)| FreeGroup { indices, lambda: VarId(1 + i), omega: VarId(1 + m + i) })
            .collect();
        let h = VarId(0);
        let w = VarId(1 + 2 * m);
        let mut s = Scenario { n, r, pattern, vars, groups, h, w, seed: Poly::zero(&VarSet::aux(&[])) };
        s.seed = s.build_seed();
        Ok(s)
    }

    /// Coefficient `n(n−r+3)/(2(n−r+1))` of the trace identity.
    pub fn trace_coeff(&self) -> BigRat {
        let (n, r) = (self.n as i64, self.r as i64);
        rat(n * (n - r + 3), 2 * (n - r + 1))
    }

    /// `λ = nH/(n−r+1)`, as the multiple of `H`.
    pub fn repeated_coeff(&self) -> BigRat {
        let (n, r) = (self.n as i64, self.r as i64);
        rat(n, n - r + 1)
    }

    /// `λ₁ = −nH/2`, as the multiple of `H`.
    pub fn first_coeff(&self) -> BigRat {
        rat(-(self.n as i64), 2)
    }

    pub fn h_poly(&self) -> Poly {
        Poly::var(&self.vars, self.h)
    }

    pub fn case_a(&self) -> bool {
        self.pattern.case_label() == "A"
    }

    pub fn label(&self) -> String {
        format!("n={} r={} pattern={}", self.n, self.r, self.pattern)
    }

    fn h_times(&self, c: BigRat) -> Poly {
        Poly::monomial(&self.vars, Monomial::var(self.vars.len(), self.h, 1), c)
    }

    fn build_seed(&self) -> Poly {
        let mut seed = Poly::zero(&self.vars);
        for g in &self.groups {
            seed = &seed + &Poly::var(&self.vars, g.lambda).scale(&BigRat::from_int(g.size()));
        }
        let merged = BigRat::from_int(self.pattern.merged_size());
        seed = &seed + &self.h_times(&merged * &self.repeated_coeff());
        &seed - &self.h_times(self.trace_coeff())
    }

    /// Solves the seed for the first free eigenvalue: `(λ_g, expression)`.
    /// `None` when every group is merged and the seed involves `H` only.
    pub fn seed_substitution(&self) -> Option<(VarId, Poly)> {
        let g = self.groups.first()?;
        let coeff = BigRat::from_int(g.size());
        let lam = Poly::var(&self.vars, g.lambda).scale(&coeff);
        let rest = &lam - &self.seed;
        Some((g.lambda, rest.scale(&coeff.inv().expect("group size is positive"))))
    }

    /// Linear forms that cannot vanish on the open set: `λ_g − λ₁`,
    /// `λ_g − λ` for each free group and `λ_g − λ_h` for distinct groups.
    pub fn nonvanishing_factors(&self) -> Vec<Poly> {
        let mut out = Vec::new();
        for (i, g) in self.groups.iter().enumerate() {
            let l = Poly::var(&self.vars, g.lambda);
            out.push(&l - &self.h_times(self.first_coeff()));
            out.push(&l - &self.h_times(self.repeated_coeff()));
            for h in &self.groups[i + 1..] {
                out.push(&l - &Poly::var(&self.vars, h.lambda));
            }
        }
        out
    }

    /// `trace(A²)` with the fixed eigenvalues written in terms of `H`.
    pub fn trace_square(&self) -> Poly {
        let first = self.first_coeff();
        let mut t = Poly::monomial(&self.vars, Monomial::var(self.vars.len(), self.h, 2), &first * &first);
        for g in &self.groups {
            let l = Poly::var(&self.vars, g.lambda);
            t = &t + &(&l * &l).scale(&BigRat::from_int(g.size()));
        }
        let lam = self.repeated_coeff();
        let copies = BigRat::from_int(self.n - self.r + self.pattern.merged_size());
        let h2 = Poly::monomial(&self.vars, Monomial::var(self.vars.len(), self.h, 2), &(&lam * &lam) * &copies);
        &t + &h2
    }
}

/// Hand transcriptions of the displayed cascade equations, written as
/// `lhs − rhs` over the Case A variable set of `(n, r)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PaperEq {
    /// First derivative of the trace identity.
    FirstDerivative,
    /// Second derivative of the trace identity.
    SecondDerivative,
    /// First derivative with `λ₂` eliminated.
    FirstEliminated,
    /// Second derivative with `λ₂` eliminated.
    SecondEliminated,
}

impl PaperEq {
    pub const ALL: [PaperEq; 4] =
        [PaperEq::FirstDerivative, PaperEq::SecondDerivative, PaperEq::FirstEliminated, PaperEq::SecondEliminated];

    pub fn tag(&self) -> &'static str {
        match self {
            PaperEq::FirstDerivative => "3.22",
            PaperEq::SecondDerivative => "3.23",
            PaperEq::FirstEliminated => "3.24",
            PaperEq::SecondEliminated => "3.25",
        }
    }

    pub fn from_tag(tag: &str) -> Result<PaperEq, Error> {
        PaperEq::ALL
            .into_iter()
            .find(|e| e.tag() == tag)
            .ok_or_else(|| Error::Usage(format!("unsupported equation tag '{tag}'")))
    }
}

pub fn paper_equation(eq: PaperEq, n: u32, r: u32) -> Result<Poly, Error> {
    let s = Scenario::build(n, r, &Pattern::all_singletons(r))?;
    let v = &s.vars;
    let (ni, ri) = (n as i64, r as i64);
    let c = |p: i64, q: i64| rat(p, q);
    let hm = |e: u32| Poly::monomial(v, Monomial::var(v.len(), s.h, e), BigRat::one());
    let h = hm(1);
    let w = Poly::var(v, s.w);
    let lam = |g: &FreeGroup| Poly::var(v, g.lambda);
    let om = |g: &FreeGroup| Poly::var(v, g.omega);
    // 2λ_i + nH
    let two_l_nh = |g: &FreeGroup| &lam(g).scale(&c(2, 1)) + &h.scale(&c(ni, 1));
    let rhs1 = (&h * &w).scale(&c(ni * (ni - ri + 3), 2));
    let rhs2 = &(&h * &(&w * &w)).scale(&c(ni * (ni - ri + 3) * (ni - ri + 3), 4))
        - &hm(3).scale(&c(ni * ni * ni * (ni - ri + 3), 4 * (ni - ri + 1)));
    let bracket2 = |g: &FreeGroup| {
        let a = (&two_l_nh(g) * &(&om(g) * &om(g))).scale(&c(2, 1));
        let b = (&h * &(&om(g) * &w)).scale(&c(ni * (ni - ri + 1), 2));
        let d = (&h * &(&lam(g) * &two_l_nh(g))).scale(&c(ni, 2));
        &(&a + &b) - &d
    };
    let rest = &s.groups[1..];
    let sum_rest_l = rest.iter().fold(Poly::zero(v), |acc, g| &acc + &lam(g));
    let first = &s.groups[0];
    let p = match eq {
        PaperEq::FirstDerivative => {
            let lhs = s.groups.iter().fold(Poly::zero(v), |acc, g| &acc + &(&two_l_nh(g) * &om(g)));
            &lhs - &rhs1
        }
        PaperEq::SecondDerivative => {
            let lhs = s.groups.iter().fold(Poly::zero(v), |acc, g| &acc + &bracket2(g));
            &lhs - &rhs2
        }
        PaperEq::FirstEliminated => {
            let coef = &h.scale(&c(2 * ni * (ni - ri + 2), ni - ri + 1)) - &sum_rest_l.scale(&c(2, 1));
            let lhs = rest.iter().fold(&coef * &om(first), |acc, g| &acc + &(&two_l_nh(g) * &om(g)));
            &lhs - &rhs1
        }
        PaperEq::SecondEliminated => {
            // Transcribed as displayed, including its printed coefficients.
            let o2 = om(first);
            let t1 = &(&h.scale(&c(4 * ni * (ni - ri + 2), ni - ri + 1)) - &sum_rest_l.scale(&c(4, 1))) * &(&o2 * &o2);
            let f1 = &h.scale(&c(ni * (ni - ri + 2), 2 * (ni - ri + 1))) - &sum_rest_l;
            let f2 = &h.scale(&c(ni * (ni - ri + 2), ni - ri + 1)) - &sum_rest_l;
            let t2 = (&h * &(&f1 * &f2)).scale(&c(ni, 1));
            let lhs = rest.iter().fold(&t1 - &t2, |acc, g| &acc + &bracket2(g));
            &lhs - &rhs2
        }
    };
    Ok(p)
}

/// `p` and `q` agree up to a nonzero rational factor.
pub fn proportional(p: &Poly, q: &Poly) -> bool {
    match (p.content_and_primitive(), q.content_and_primitive()) {
        (Ok((_, a)), Ok((_, b))) => a == b,
        (Err(PolyError::ZeroPolynomial), Err(PolyError::ZeroPolynomial)) => true,
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn build_examples() {
        let s = Scenario::build(5, 3, &Pattern::all_singletons(3)).unwrap();
        assert_eq!(s.vars.names(), ["H", "l2", "l3", "o2", "o3", "w"]);
        assert_eq!(s.seed.to_string(), "-25/6*H + l2 + l3");
        let s = Scenario::build(3, 2, &Pattern::all_singletons(2)).unwrap();
        assert_eq!(s.vars.names(), ["H", "l2", "o2", "w"]);
        assert_eq!(s.seed.to_string(), "-3*H + l2");
        assert!(matches!(Scenario::build(3, 1, &Pattern::all_singletons(1)), Err(Error::Usage(_))));
        assert!(Scenario::build(3, 3, &Pattern::all_singletons(3)).is_err());
    }

    #[test]
    fn pattern_parsing() {
        let p: Pattern = "B:2=3,C:4".parse().unwrap();
        let p = p.resolve(4).unwrap();
        assert_eq!(p.to_string(), "B:2=3,C:4");
        assert_eq!(p.groups(), [vec![2, 3], vec![4]]);
        assert_eq!("A".parse::<Pattern>().unwrap().resolve(3).unwrap(), Pattern::all_singletons(3));
        let c: Pattern = "C:2".parse().unwrap();
        assert_eq!(c.resolve(3).unwrap().to_string(), "C:2");
        assert!("B:2".parse::<Pattern>().is_err());
        assert!("X:2=3".parse::<Pattern>().is_err());
        assert!("B:2=5".parse::<Pattern>().unwrap().resolve(4).is_err());
        // Two merged items both equal the repeated eigenvalue, hence each other.
        let two: Pattern = "C:2,C:3".parse().unwrap();
        assert_eq!(two.resolve(3).unwrap().to_string(), "C:2=3");
    }

    #[test]
    fn pattern_lists() {
        let names = |r| list_patterns(r).iter().map(|p| p.to_string()).collect::<Vec<_>>();
        assert_eq!(names(2), ["A", "C:2"]);
        assert_eq!(names(3), ["A", "B:2=3", "C:3", "C:2=3"]);
        assert_eq!(list_patterns(4).len(), 7);
        for r in 2..=5 {
            let ps = list_patterns(r);
            assert_eq!(ps[0], Pattern::all_singletons(r));
            for p in &ps {
                assert_eq!(&p.canonical(), p);
            }
        }
    }

    #[test]
    fn canonical_relabels() {
        let p = "C:2".parse::<Pattern>().unwrap().resolve(3).unwrap();
        assert_eq!(p.canonical().to_string(), "C:3");
        let p = "B:3=4".parse::<Pattern>().unwrap().resolve(4).unwrap();
        assert_eq!(p.canonical().to_string(), "B:2=3");
    }

    #[test]
    fn trace_square_examples() {
        let s = Scenario::build(3, 2, &Pattern::all_singletons(2)).unwrap();
        // (9/4)H² + λ₂² + (9/4)H²
        assert_eq!(s.trace_square().to_string(), "9/2*H^2 + l2^2");
        let s = Scenario::build(5, 3, &Pattern::all_singletons(3)).unwrap();
        // (25/4)H² + λ₂² + λ₃² + 2·(25/9)H²
        assert_eq!(s.trace_square().to_string(), "425/36*H^2 + l2^2 + l3^2");
    }

    #[test]
    fn seed_vanishes_under_substitution() {
        for n in 3..=6 {
            for r in 2..=(n - 1).min(4) {
                for p in list_patterns(r) {
                    let s = Scenario::build(n, r, &p).unwrap();
                    if let Some((v, by)) = s.seed_substitution() {
                        let z = s.seed.substitute(v, &by, &crate::Limits::default()).unwrap();
                        assert!(z.is_zero(), "{}", s.label());
                    } else if 3 * r == n + 5 {
                        // Every free eigenvalue merged: the identity collapses to 0 = 0.
                        assert!(s.seed.is_zero(), "{}", s.label());
                    } else {
                        assert_eq!(s.seed.support(), vec![s.h]);
                    }
                }
            }
        }
    }

    #[test]
    fn paper_first_derivative_at_5_3() {
        let p = paper_equation(PaperEq::FirstDerivative, 5, 3).unwrap();
        let v = p.vars().clone();
        let expect = Poly::parse("5*H*o2 + 5*H*o3 + -25/2*H*w + 2*l2*o2 + 2*l3*o3", &v).unwrap();
        assert_eq!(p, expect);
    }
}
