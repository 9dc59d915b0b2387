//! Certificate data model and its JSON form.
//!
//! Field order in the JSON output is fixed: `scenario`, `strategy`, `steps`,
//! `final`, `verdict`, `witness`, `notes`. Every polynomial is stored in the
//! canonical text form and re-parsed over the scenario's variable set.

use std::fmt;
use std::sync::Arc;

use serde_json::{json, Map, Value};

use crate::error::Error;
use crate::poly::{Monomial, Poly, VarId, VarSet};
use crate::rational::BigRat;
use crate::scenario::{Pattern, Scenario};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Order {
    Paper,
    MinDegree,
}

impl Order {
    pub fn as_str(&self) -> &'static str {
        match self {
            Order::Paper => "paper",
            Order::MinDegree => "mindeg",
        }
    }

    pub fn parse(s: &str) -> Result<Order, Error> {
        match s {
            "paper" => Ok(Order::Paper),
            "mindeg" => Ok(Order::MinDegree),
            _ => Err(Error::Usage(format!("unknown elimination order '{s}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Strategy {
    pub derivative_depth: u32,
    pub max_pairings: u32,
    pub order: Order,
    pub allow_h_cancel: bool,
    pub max_terms: usize,
    pub max_bits: u64,
    /// Wall-clock budget for one cascade, in seconds.
    pub wall_secs: Option<f64>,
}

pub const DEFAULT_WALL_SECS: f64 = 60.0;

impl Default for Strategy {
    fn default() -> Self {
        Strategy {
            derivative_depth: 2,
            max_pairings: 4,
            order: Order::Paper,
            allow_h_cancel: true,
            max_terms: crate::limits::DEFAULT_MAX_TERMS,
            max_bits: crate::limits::DEFAULT_MAX_BITS,
            wall_secs: Some(DEFAULT_WALL_SECS),
        }
    }
}

impl Strategy {
    pub fn validate(&self) -> Result<(), Error> {
        if self.derivative_depth < 1 {
            return Err(Error::Usage("derivative depth must be at least 1".into()));
        }
        if self.max_pairings < 1 || self.max_terms < 1 || self.max_bits < 1 {
            return Err(Error::Usage("limits must be positive".into()));
        }
        if let Some(w) = self.wall_secs {
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::Usage("wall budget must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn limits(&self) -> crate::limits::Limits {
        crate::limits::Limits {
            max_terms: self.max_terms,
            max_bits: self.max_bits,
            max_exponent: crate::limits::DEFAULT_MAX_EXPONENT,
            deadline: None,
        }
        .with_wall(self.wall_secs.map(std::time::Duration::from_secs_f64))
    }

    fn to_json(&self) -> Value {
        json!({
            "derivative_depth": self.derivative_depth,
            "max_pairings": self.max_pairings,
            "order": self.order.as_str(),
            "allow_h_cancel": self.allow_h_cancel,
            "max_terms": self.max_terms,
            "max_bits": self.max_bits,
            "wall_secs": self.wall_secs,
        })
    }

    fn from_json(v: &Value) -> Result<Self, Error> {
        let f = Fields::new(v, "strategy")?;
        let s = Strategy {
            derivative_depth: f.u64("derivative_depth")? as u32,
            max_pairings: f.u64("max_pairings")? as u32,
            order: Order::parse(f.str("order")?).map_err(|_| f.bad("order"))?,
            allow_h_cancel: f.bool("allow_h_cancel")?,
            max_terms: f.u64("max_terms")? as usize,
            max_bits: f.u64("max_bits")?,
            wall_secs: match f.get("wall_secs")? {
                Value::Null => None,
                x => Some(x.as_f64().ok_or_else(|| f.bad("wall_secs"))?),
            },
        };
        Ok(s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NormalizeRecord {
    pub content: BigRat,
    /// Common monomial in the variables other than `H`.
    pub monomial: Monomial,
    pub h_power: u32,
    /// Nonvanishing linear factors divided out, with multiplicities.
    pub factors: Vec<(Poly, u32)>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum StepKind {
    /// The trace identity of the scenario.
    Seed,
    Substitute { var: VarId, by: Poly, into: usize },
    Derive { of: usize },
    Resultant { f: usize, g: usize, var: VarId },
    Normalize { of: usize, record: NormalizeRecord },
}

impl StepKind {
    pub fn name(&self) -> &'static str {
        match self {
            StepKind::Seed => "seed",
            StepKind::Substitute { .. } => "substitute",
            StepKind::Derive { .. } => "derive",
            StepKind::Resultant { .. } => "resultant",
            StepKind::Normalize { .. } => "normalize",
        }
    }

    pub fn refs(&self) -> Vec<usize> {
        match self {
            StepKind::Seed => vec![],
            StepKind::Substitute { into, .. } => vec![*into],
            StepKind::Derive { of } | StepKind::Normalize { of, .. } => vec![*of],
            StepKind::Resultant { f, g, .. } => vec![*f, *g],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Step {
    pub kind: StepKind,
    pub result: Poly,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FailKind {
    Resource,
    Degenerate,
    NoElimination,
    Minimality,
}

impl FailKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            FailKind::Resource => "resource",
            FailKind::Degenerate => "degenerate",
            FailKind::NoElimination => "no-elimination",
            FailKind::Minimality => "minimality",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    CmcProven,
    MinimalProven,
    Failed(FailKind),
}

impl Verdict {
    pub fn is_proven(&self) -> bool {
        !matches!(self, Verdict::Failed(_))
    }

    pub fn parse(s: &str) -> Result<Verdict, Error> {
        Ok(match s {
            "CMC_PROVEN" => Verdict::CmcProven,
            "MINIMAL_PROVEN" => Verdict::MinimalProven,
            "FAILED(resource)" => Verdict::Failed(FailKind::Resource),
            "FAILED(degenerate)" => Verdict::Failed(FailKind::Degenerate),
            "FAILED(no-elimination)" => Verdict::Failed(FailKind::NoElimination),
            "FAILED(minimality)" => Verdict::Failed(FailKind::Minimality),
            _ => return Err(Error::Malformed(format!("verdict: unknown value '{s}'"))),
        })
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::CmcProven => write!(f, "CMC_PROVEN"),
            Verdict::MinimalProven => write!(f, "MINIMAL_PROVEN"),
            Verdict::Failed(k) => write!(f, "FAILED({})", k.as_str()),
        }
    }
}

/// Square decomposition of `trace(A²) − (n²/4)H²`.
#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    /// `(n²/4)`, the coefficient of `H²` contributed by `λ₁²`.
    pub leading: BigRat,
    pub squares: Vec<(Monomial, BigRat)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Certificate {
    pub n: u32,
    pub r: u32,
    pub pattern: Pattern,
    pub strategy: Strategy,
    pub steps: Vec<Step>,
    pub final_poly: Poly,
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    pub notes: Vec<String>,
}

impl Certificate {
    pub fn scenario(&self) -> Result<Scenario, Error> {
        Scenario::build(self.n, self.r, &self.pattern)
    }

    pub fn vars(&self) -> &Arc<VarSet> {
        self.final_poly.vars()
    }

    pub fn peak_terms(&self) -> usize {
        self.steps.iter().map(|s| s.result.len()).max().unwrap_or(0)
    }

    pub fn to_json(&self) -> Value {
        let vars = self.vars().clone();
        let steps: Vec<Value> = self
            .steps
            .iter()
            .map(|s| {
                let mut m = Map::new();
                m.insert("kind".into(), json!(s.kind.name()));
                m.insert("refs".into(), json!(s.kind.refs()));
                match &s.kind {
                    StepKind::Substitute { var, by, .. } => {
                        m.insert("eliminated".into(), json!(vars.name(*var)));
                        m.insert("by".into(), json!(by.to_string()));
                    }
                    StepKind::Resultant { var, .. } => {
                        m.insert("eliminated".into(), json!(vars.name(*var)));
                    }
                    StepKind::Normalize { record, .. } => {
                        let factors: Vec<Value> = record
                            .factors
                            .iter()
                            .map(|(f, k)| json!({"factor": f.to_string(), "power": k}))
                            .collect();
                        m.insert(
                            "normalization".into(),
                            json!({
                                "content": record.content.to_string(),
                                "monomial": record.monomial.fmt_with(&vars),
                                "h_power": record.h_power,
                                "factors": factors,
                            }),
                        );
                    }
                    _ => {}
                }
                m.insert("result".into(), json!(s.result.to_string()));
                Value::Object(m)
            })
            .collect();
        let mut root = Map::new();
        root.insert("scenario".into(), json!({"n": self.n, "r": self.r, "pattern": self.pattern.to_string()}));
        root.insert("strategy".into(), self.strategy.to_json());
        root.insert("steps".into(), Value::Array(steps));
        root.insert("final".into(), json!(self.final_poly.to_string()));
        root.insert("verdict".into(), json!(self.verdict.to_string()));
        if let Some(w) = &self.witness {
            let squares: Vec<Value> = w
                .squares
                .iter()
                .map(|(m, c)| json!({"square": m.fmt_with(&vars), "coeff": c.to_string()}))
                .collect();
            root.insert("witness".into(), json!({"leading_h2": w.leading.to_string(), "squares": squares}));
        }
        root.insert("notes".into(), json!(self.notes));
        Value::Object(root)
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json()).expect("certificate serializes");
        s.push('\n');
        s
    }

    pub fn from_json_str(text: &str) -> Result<Certificate, Error> {
        let v: Value = serde_json::from_str(text).map_err(|e| Error::Malformed(format!("not valid JSON: {e}")))?;
        Self::from_json(&v)
    }

    pub fn from_json(v: &Value) -> Result<Certificate, Error> {
        let root = Fields::new(v, "")?;
        let sc = Fields::new(root.get("scenario")?, "scenario")?;
        let n = sc.u64("n")? as u32;
        let r = sc.u64("r")? as u32;
        let pattern: Pattern = sc.str("pattern")?.parse().map_err(|_| sc.bad("pattern"))?;
        let scenario = Scenario::build(n, r, &pattern).map_err(|e| Error::Malformed(format!("scenario: {e}")))?;
        let vars = scenario.vars.clone();
        let strategy = Strategy::from_json(root.get("strategy")?)?;
        let raw_steps = root.get("steps")?.as_array().ok_or_else(|| root.bad("steps"))?;
        let mut steps = Vec::with_capacity(raw_steps.len());
        for (i, s) in raw_steps.iter().enumerate() {
            let path = format!("steps[{i}]");
            let f = Fields::new(s, &path)?;
            let refs: Vec<usize> = f
                .get("refs")?
                .as_array()
                .ok_or_else(|| f.bad("refs"))?
                .iter()
                .map(|x| x.as_u64().map(|x| x as usize).ok_or_else(|| f.bad("refs")))
                .collect::<Result<_, _>>()?;
            let want = |k: usize| -> Result<(), Error> {
                if refs.len() != k {
                    return Err(f.bad("refs"));
                }
                Ok(())
            };
            let poly = |key: &str, text: &str| {
                Poly::parse(text, &vars).map_err(|e| Error::Malformed(format!("{path}.{key}: {e}")))
            };
            let var = |key: &str| -> Result<VarId, Error> {
                let name = f.str(key)?;
                vars.find(name).ok_or_else(|| f.bad(key))
            };
            let kind = match f.str("kind")? {
                "seed" => {
                    want(0)?;
                    StepKind::Seed
                }
                "substitute" => {
                    want(1)?;
                    StepKind::Substitute { var: var("eliminated")?, by: poly("by", f.str("by")?)?, into: refs[0] }
                }
                "derive" => {
                    want(1)?;
                    StepKind::Derive { of: refs[0] }
                }
                "resultant" => {
                    want(2)?;
                    StepKind::Resultant { f: refs[0], g: refs[1], var: var("eliminated")? }
                }
                "normalize" => {
                    want(1)?;
                    let nf = Fields::new(f.get("normalization")?, &format!("{path}.normalization"))?;
                    let content: BigRat = nf.str("content")?.parse().map_err(|_| nf.bad("content"))?;
                    let mono = poly("normalization.monomial", nf.str("monomial")?)?;
                    let monomial = match mono.terms() {
                        [(m, c)] if c.is_one() => m.clone(),
                        _ => return Err(nf.bad("monomial")),
                    };
                    let mut factors = Vec::new();
                    for (k, fac) in nf.get("factors")?.as_array().ok_or_else(|| nf.bad("factors"))?.iter().enumerate() {
                        let ff = Fields::new(fac, &format!("{path}.normalization.factors[{k}]"))?;
                        factors.push((poly("factor", ff.str("factor")?)?, ff.u64("power")? as u32));
                    }
                    StepKind::Normalize {
                        of: refs[0],
                        record: NormalizeRecord { content, monomial, h_power: nf.u64("h_power")? as u32, factors },
                    }
                }
                _ => return Err(f.bad("kind")),
            };
            let result = poly("result", f.str("result")?)?;
            steps.push(Step { kind, result });
        }
        let final_poly = Poly::parse(root.str("final")?, &vars).map_err(|e| Error::Malformed(format!("final: {e}")))?;
        let verdict = Verdict::parse(root.str("verdict")?)?;
        let witness = match v.get("witness") {
            None | Some(Value::Null) => None,
            Some(w) => {
                let wf = Fields::new(w, "witness")?;
                let leading: BigRat = wf.str("leading_h2")?.parse().map_err(|_| wf.bad("leading_h2"))?;
                let mut squares = Vec::new();
                for (k, sq) in wf.get("squares")?.as_array().ok_or_else(|| wf.bad("squares"))?.iter().enumerate() {
                    let sf = Fields::new(sq, &format!("witness.squares[{k}]"))?;
                    let m = Poly::parse(sf.str("square")?, &vars).map_err(|_| sf.bad("square"))?;
                    let mono = match m.terms() {
                        [(mm, c)] if c.is_one() => mm.clone(),
                        _ => return Err(sf.bad("square")),
                    };
                    let c: BigRat = sf.str("coeff")?.parse().map_err(|_| sf.bad("coeff"))?;
                    squares.push((mono, c));
                }
                Some(Witness { leading, squares })
            }
        };
        let notes = match v.get("notes") {
            None => Vec::new(),
            Some(Value::Array(a)) => a.iter().map(|x| x.as_str().unwrap_or_default().to_string()).collect(),
            Some(_) => return Err(root.bad("notes")),
        };
        Ok(Certificate { n, r, pattern: scenario.pattern, strategy, steps, final_poly, verdict, witness, notes })
    }
}

/// Field accessor that reports schema violations with a JSON path.
struct Fields<'a> {
    obj: &'a Map<String, Value>,
    path: String,
}

impl<'a> Fields<'a> {
    fn new(v: &'a Value, path: &str) -> Result<Self, Error> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::Malformed(format!("{}: expected an object", if path.is_empty() { "<root>" } else { path })))?;
        Ok(Fields { obj, path: path.to_string() })
    }

    fn at(&self, key: &str) -> String {
        if self.path.is_empty() {
            key.to_string()
        } else {
            format!("{}.{key}", self.path)
        }
    }

    fn bad(&self, key: &str) -> Error {
        Error::Malformed(format!("{}: invalid value", self.at(key)))
    }

    fn get(&self, key: &str) -> Result<&'a Value, Error> {
        self.obj.get(key).ok_or_else(|| Error::Malformed(format!("{}: missing field", self.at(key))))
    }

    fn str(&self, key: &str) -> Result<&'a str, Error> {
        self.get(key)?.as_str().ok_or_else(|| self.bad(key))
    }

    fn u64(&self, key: &str) -> Result<u64, Error> {
        self.get(key)?.as_u64().ok_or_else(|| self.bad(key))
    }

    fn bool(&self, key: &str) -> Result<bool, Error> {
        self.get(key)?.as_bool().ok_or_else(|| self.bad(key))
    }
}
