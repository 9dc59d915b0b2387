//! Sylvester resultants with a fraction-free determinant.
//!
//! [`resultant`] always means the determinant of the Sylvester matrix. Large
//! instances are evaluated through equivalent routes that return the same
//! polynomial: homogeneous inputs are dehomogenized in `H` and lifted back,
//! and when at most one other variable remains the determinant is computed
//! multi-modularly (evaluation, interpolation, Chinese remaindering) against
//! a proven coefficient bound.

use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::PolyError;
use crate::limits::Limits;
use crate::modular::{self, Crt, Field};
use crate::poly::{Monomial, Poly, VarId, VarSet};
use crate::rational::BigRat;

#[derive(Clone, Debug, PartialEq)]
pub struct SylvesterMatrix {
    /// Degree of the first input in the eliminated variable.
    pub m: usize,
    /// Degree of the second input in the eliminated variable.
    pub n: usize,
    pub entries: Vec<Vec<Poly>>,
}

impl SylvesterMatrix {
    pub fn size(&self) -> usize {
        self.m + self.n
    }
}

fn validate(f: &Poly, g: &Poly, v: VarId) -> Result<(usize, usize), PolyError> {
    if !Arc::ptr_eq(f.vars(), g.vars()) && **f.vars() != **g.vars() {
        return Err(PolyError::VarSetMismatch);
    }
    if f.is_zero() || g.is_zero() {
        return Err(PolyError::ZeroPolynomial);
    }
    let m = f.degree_in(v) as usize;
    let n = g.degree_in(v) as usize;
    if m + n == 0 {
        return Err(PolyError::NothingToEliminate(f.vars().name(v).to_string()));
    }
    Ok((m, n))
}

/// `n` rows of coefficients of `f` followed by `m` rows of coefficients of
/// `g`, each row shifted one column right of the previous within its band.
pub fn sylvester(f: &Poly, g: &Poly, v: VarId) -> Result<SylvesterMatrix, PolyError> {
    let (m, n) = validate(f, g, v)?;
    let vars = f.vars();
    let size = m + n;
    let a = f.univariate_view(v);
    let b = g.univariate_view(v);
    let mut entries = vec![vec![Poly::zero(vars); size]; size];
    for i in 0..n {
        for (k, c) in a.iter().enumerate() {
            entries[i][i + k] = c.clone();
        }
    }
    for i in 0..m {
        for (k, c) in b.iter().enumerate() {
            entries[n + i][i + k] = c.clone();
        }
    }
    Ok(SylvesterMatrix { m, n, entries })
}

/// Laplace expansion along the first row; exponential, meant for tiny sizes.
pub fn det_cofactor(mat: &[Vec<Poly>], vars: &Arc<VarSet>) -> Poly {
    let n = mat.len();
    if n == 0 {
        return Poly::one(vars);
    }
    if n == 1 {
        return mat[0][0].clone();
    }
    if n == 2 {
        return &(&mat[0][0] * &mat[1][1]) - &(&mat[0][1] * &mat[1][0]);
    }
    let mut acc = Poly::zero(vars);
    for j in 0..n {
        if mat[0][j].is_zero() {
            continue;
        }
        let minor: Vec<Vec<Poly>> = mat[1..]
            .iter()
            .map(|row| row.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, e)| e.clone()).collect())
            .collect();
        let term = &mat[0][j] * &det_cofactor(&minor, vars);
        acc = if j % 2 == 0 { &acc + &term } else { &acc - &term };
    }
    acc
}

/// Fraction-free Bareiss elimination. Every division is exact; a failed
/// division is reported as [`PolyError::NotDivisible`] and means a bug.
pub fn det_bareiss(mat: &[Vec<Poly>], vars: &Arc<VarSet>, limits: &Limits) -> Result<Poly, PolyError> {
    let n = mat.len();
    if n == 0 {
        return Ok(Poly::one(vars));
    }
    let mut a: Vec<Vec<Poly>> = mat.to_vec();
    let mut negate = false;
    let mut prev = Poly::one(vars);
    for k in 0..n.saturating_sub(1) {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(i, k);
                    negate = !negate;
                }
                None => return Ok(Poly::zero(vars)),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                limits.check_time()?;
                let mut t = a[k][k].try_mul(&a[i][j], limits)?;
                if !a[i][k].is_zero() && !a[k][j].is_zero() {
                    t = t.try_sub(&a[i][k].try_mul(&a[k][j], limits)?)?;
                }
                a[i][j] = if k == 0 { t } else { t.exact_div(&prev, limits)? };
                limits.check_poly(&a[i][j])?;
            }
            a[i][k] = Poly::zero(vars);
        }
        prev = a[k][k].clone();
    }
    let det = a[n - 1][n - 1].clone();
    Ok(if negate { det.neg() } else { det })
}

/// Exact determinant: cofactor expansion up to 4×4, Bareiss beyond.
pub fn det_fraction_free(mat: &[Vec<Poly>], vars: &Arc<VarSet>, limits: &Limits) -> Result<Poly, PolyError> {
    if mat.len() <= 4 {
        Ok(det_cofactor(mat, vars))
    } else {
        det_bareiss(mat, vars, limits)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    /// Pick the cheapest exact route.
    Auto,
    /// Determinant of the Sylvester matrix by [`det_fraction_free`], no shortcuts.
    Direct,
    /// Multi-modular evaluation; only valid when at most one other variable occurs.
    Modular,
}

/// `det(sylvester(f, g, v))` with default limits.
pub fn resultant(f: &Poly, g: &Poly, v: VarId) -> Result<Poly, PolyError> {
    resultant_with(f, g, v, Method::Auto, &Limits::default())
}

pub fn resultant_with(f: &Poly, g: &Poly, v: VarId, method: Method, limits: &Limits) -> Result<Poly, PolyError> {
    let (m, n) = validate(f, g, v)?;
    let vars = f.vars().clone();
    match method {
        Method::Direct => {
            let s = sylvester(f, g, v)?;
            det_fraction_free(&s.entries, &vars, limits)
        }
        Method::Modular => modular_resultant(f, g, v, limits),
        Method::Auto => {
            if m + n <= 4 {
                let s = sylvester(f, g, v)?;
                return Ok(det_cofactor(&s.entries, &vars));
            }
            if let Some(h) = vars.mean_curvature() {
                if h != v && f.is_homogeneous() && g.is_homogeneous() && (f.contains_var(h) || g.contains_var(h)) {
                    let fd = f.dehomogenize(h);
                    let gd = g.dehomogenize(h);
                    let rd = auto_inner(&fd, &gd, v, m + n, limits)?;
                    let d = f.total_degree() as usize * n + g.total_degree() as usize * m - m * n;
                    return rd.homogenize(h, d as u32);
                }
            }
            auto_inner(f, g, v, m + n, limits)
        }
    }
}

fn auto_inner(f: &Poly, g: &Poly, v: VarId, size: usize, limits: &Limits) -> Result<Poly, PolyError> {
    let others = other_vars(f, g, v);
    if others.len() <= 1 && size >= 6 {
        return modular_resultant(f, g, v, limits);
    }
    let s = sylvester(f, g, v)?;
    det_fraction_free(&s.entries, f.vars(), limits)
}

fn other_vars(f: &Poly, g: &Poly, v: VarId) -> Vec<VarId> {
    f.vars().ids().filter(|&u| u != v && (f.contains_var(u) || g.contains_var(u))).collect()
}

/// Clears denominators: returns the integer-coefficient multiple and the factor used.
fn integral(p: &Poly) -> (Poly, BigInt) {
    let mut l = BigInt::one();
    for (_, c) in p.terms() {
        l = l.lcm(c.denom());
    }
    (p.scale(&BigRat::from_int(l.clone())), l)
}

/// Dense integer coefficients of `p` as `[v-degree][u-degree]`, ascending.
fn dense2(p: &Poly, v: VarId, u: Option<VarId>) -> Vec<Vec<BigInt>> {
    let dv = p.degree_in(v) as usize;
    let du = u.map_or(0, |u| p.degree_in(u) as usize);
    let mut out = vec![vec![BigInt::zero(); du + 1]; dv + 1];
    for (mo, c) in p.terms() {
        let i = mo.exp(v) as usize;
        let j = u.map_or(0, |u| mo.exp(u) as usize);
        out[i][j] = c.numer().clone();
    }
    out
}

fn log2_ceil_sum_abs(p: &Poly) -> u64 {
    let s: BigInt = p.terms().iter().map(|t| t.1.numer().abs()).sum();
    s.bits()
}

fn log2_ceil_l2(p: &Poly) -> u64 {
    let s: BigInt = p.terms().iter().map(|t| t.1.numer() * t.1.numer()).sum();
    s.bits() / 2 + 1
}

/// Multi-modular Sylvester resultant for inputs with at most one variable
/// besides `v`.
pub fn modular_resultant(f: &Poly, g: &Poly, v: VarId, limits: &Limits) -> Result<Poly, PolyError> {
    let (m, n) = validate(f, g, v)?;
    let vars = f.vars().clone();
    let others = other_vars(f, g, v);
    if others.len() > 1 {
        return Err(PolyError::Parse("modular resultant needs at most one extra variable".into()));
    }
    let u = others.first().copied();
    let (fi, df) = integral(f);
    let (gi, dg) = integral(g);
    let a = dense2(&fi, v, u);
    let b = dense2(&gi, v, u);
    // Degree of the result in u is bounded by the row-degree sum.
    let deg_bound = match u {
        Some(u) => n * fi.degree_in(u) as usize + m * gi.degree_in(u) as usize,
        None => 0,
    };
    // Permanent bound for polynomial entries, Hadamard bound for integer entries.
    let coeff_bits = match u {
        Some(_) => n as u64 * log2_ceil_sum_abs(&fi) + m as u64 * log2_ceil_sum_abs(&gi),
        None => n as u64 * log2_ceil_l2(&fi) + m as u64 * log2_ceil_l2(&gi),
    } + 2;
    if coeff_bits > limits.max_bits.saturating_mul(2) {
        return Err(PolyError::Resource(format!("resultant bound of {coeff_bits} bits exceeds limit")));
    }
    let mut crts = vec![Crt::default(); deg_bound + 1];
    let mut idx = 0usize;
    while crts[0].modulus_bits() <= coeff_bits {
        limits.check_time()?;
        let p = modular::prime(idx);
        idx += 1;
        let fp = Field::new(p);
        let am: Vec<Vec<u64>> = a.iter().map(|r| r.iter().map(|c| fp.from_bigint(c)).collect()).collect();
        let bm: Vec<Vec<u64>> = b.iter().map(|r| r.iter().map(|c| fp.from_bigint(c)).collect()).collect();
        let lead_a = &am[m];
        let lead_b = &bm[n];
        if lead_a.iter().all(|&c| c == 0) || lead_b.iter().all(|&c| c == 0) {
            continue;
        }
        let eval = |row: &[u64], x: u64| row.iter().rev().fold(0u64, |acc, &c| fp.add(fp.mul(acc, x), c));
        let mut xs = Vec::with_capacity(deg_bound + 1);
        let mut ys = Vec::with_capacity(deg_bound + 1);
        let mut x0 = 0u64;
        while xs.len() <= deg_bound {
            let x = fp.from_u64(x0);
            x0 += 1;
            if x0 > 4 * (deg_bound as u64 + 8) {
                break;
            }
            if eval(lead_a, x) == 0 || eval(lead_b, x) == 0 {
                continue;
            }
            let av: Vec<u64> = am.iter().map(|r| eval(r, x)).collect();
            let bv: Vec<u64> = bm.iter().map(|r| eval(r, x)).collect();
            xs.push(x);
            ys.push(modular::univariate_resultant(&fp, &av, &bv));
        }
        if xs.len() <= deg_bound {
            continue;
        }
        let coeffs = modular::interpolate(&fp, &xs, &ys);
        for (crt, c) in crts.iter_mut().zip(coeffs) {
            crt.push(fp.to_u64(c), p);
        }
    }
    // Res(f, g) = Res(fi, gi) / (df^n dg^m).
    let scale = BigRat::new(
        BigInt::one(),
        num_traits::pow(df, n) * num_traits::pow(dg, m),
    )?;
    let nv = vars.len();
    let mut terms = Vec::new();
    for (j, crt) in crts.iter().enumerate() {
        let c = crt.symmetric();
        if c.is_zero() {
            continue;
        }
        let mono = match u {
            Some(u) => Monomial::var(nv, u, j as u32),
            None => Monomial::one(nv),
        };
        terms.push((mono, BigRat::from_int(c) * &scale));
    }
    let r = Poly::from_terms(&vars, terms);
    limits.check_poly(&r)?;
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str, v: &Arc<VarSet>) -> Poly {
        Poly::parse(s, v).unwrap()
    }

    fn texts(m: &SylvesterMatrix) -> Vec<Vec<String>> {
        m.entries.iter().map(|r| r.iter().map(|e| e.to_string()).collect()).collect()
    }

    #[test]
    fn sylvester_layouts() {
        let v = VarSet::aux(&["x", "y"]);
        let x = v.find("x").unwrap();
        let s = sylvester(&p("x + -1", &v), &p("x + 1", &v), x).unwrap();
        assert_eq!(texts(&s), [["1", "-1"], ["1", "1"]]);
        let s = sylvester(&p("x^2 + 1", &v), &p("x + -1", &v), x).unwrap();
        assert_eq!(texts(&s), [["1", "0", "1"], ["1", "-1", "0"], ["0", "1", "-1"]]);
        let s = sylvester(&p("y*x + -1", &v), &p("x + -y", &v), x).unwrap();
        assert_eq!(texts(&s), [["y", "-1"], ["1", "-y"]]);
    }

    #[test]
    fn nothing_to_eliminate() {
        let v = VarSet::aux(&["x", "y"]);
        let x = v.find("x").unwrap();
        assert!(matches!(sylvester(&p("y", &v), &p("y + 1", &v), x), Err(PolyError::NothingToEliminate(_))));
    }

    #[test]
    fn determinant_examples() {
        let v = VarSet::aux(&["x", "y"]);
        let lim = Limits::default();
        let m = vec![vec![p("1", &v), p("-1", &v)], vec![p("1", &v), p("1", &v)]];
        assert_eq!(det_fraction_free(&m, &v, &lim).unwrap().to_string(), "2");
        let m = vec![vec![p("y", &v), p("-1", &v)], vec![p("1", &v), p("-y", &v)]];
        assert_eq!(det_bareiss(&m, &v, &lim).unwrap().to_string(), "-y^2 + 1");
        let id: Vec<Vec<Poly>> = (0..3)
            .map(|i| (0..3).map(|j| if i == j { p("1", &v) } else { Poly::zero(&v) }).collect())
            .collect();
        assert_eq!(det_bareiss(&id, &v, &lim).unwrap().to_string(), "1");
    }

    #[test]
    fn resultant_examples() {
        let v = VarSet::aux(&["x", "y"]);
        let x = v.find("x").unwrap();
        assert!(resultant(&p("x^2 + -1", &v), &p("x + -1", &v), x).unwrap().is_zero());
        assert_eq!(resultant(&p("x^2 + 1", &v), &p("x + -1", &v), x).unwrap().to_string(), "2");
        assert_eq!(resultant(&p("y*x + -1", &v), &p("x + -y", &v), x).unwrap().to_string(), "-y^2 + 1");
    }

    #[test]
    fn routes_agree() {
        let v = VarSet::aux(&["x", "y"]);
        let x = v.find("x").unwrap();
        let lim = Limits::default();
        let f = p("3*x^4*y + -2/3*x^3 + x^2*y^3 + 7*x*y + -5*y^2 + 1", &v);
        let g = p("x^3*y^2 + 4*x^2 + -1/5*x*y + 2*y^4 + -9", &v);
        let direct = resultant_with(&f, &g, x, Method::Direct, &lim).unwrap();
        let modular = resultant_with(&f, &g, x, Method::Modular, &lim).unwrap();
        assert_eq!(direct, modular);
        let y = v.find("y").unwrap();
        let f1 = f.specialize(&[(y, BigRat::from_int(3))]);
        let g1 = g.specialize(&[(y, BigRat::from_int(3))]);
        assert_eq!(
            resultant_with(&f1, &g1, x, Method::Direct, &lim).unwrap(),
            resultant_with(&f1, &g1, x, Method::Modular, &lim).unwrap()
        );
    }

    #[test]
    fn homogeneous_route_agrees() {
        let v = crate::poly::VarSet::new(vec![
            crate::poly::VarRole::MeanCurvature,
            crate::poly::VarRole::ConnForm(2),
            crate::poly::VarRole::SharedConnForm,
        ])
        .unwrap();
        let o = v.find("o2").unwrap();
        let lim = Limits::default();
        let f = p("3*o2^3 + H*o2^2 + -2*H*o2*w + 5*H^2*w + w^3", &v);
        let g = p("o2^3 + -H^2*o2 + 7*H*w^2 + -w^3", &v);
        let direct = resultant_with(&f, &g, o, Method::Direct, &lim).unwrap();
        let auto = resultant_with(&f, &g, o, Method::Auto, &lim).unwrap();
        assert_eq!(direct, auto);
        assert!(auto.is_homogeneous());
    }
}
