//! Reduction checks: the syzygy identity `±(p−1)!·z = c_p(E) − n·H^p`, the
//! Kleiman smoothability range, and bounded-degree membership in the
//! subalgebra generated by a set of classes.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::arith::{solve_particular, ArithError, Matrix, Rational};
use crate::chern::FormalBundle;
use crate::ring::{CycleClass, RingError, RingModel};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CheckError {
    #[error("class is not homogeneous of degree {expected}")]
    DegreeMismatch { expected: u32 },
    #[error("codimension must be positive")]
    ZeroCodimension,
    #[error("hyperplane class must be homogeneous of degree 1")]
    BadHyperplane,
    #[error("cycle dimension {i} exceeds ambient dimension {d}")]
    CycleDimensionOutOfRange { d: u32, i: u32 },
    #[error("generator {0} must be homogeneous of positive degree")]
    BadGenerator(String),
    #[error("degree bound {bound} exceeds top degree {top}")]
    DegreeBoundTooLarge { bound: u32, top: u32 },
    #[error("solution does not re-evaluate to the target")]
    PostCheckFailed,
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn as_rational(self) -> Rational {
        match self {
            Sign::Plus => Rational::one(),
            Sign::Minus => Rational::from(-1),
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

/// The sign is supplied by the caller; no convention is assumed.
#[derive(Debug, Clone)]
pub struct SyzygyInstance {
    pub hyperplane: CycleClass,
    pub z: CycleClass,
    pub bundle: FormalBundle,
    pub n: i64,
    pub sign: Sign,
    pub p: u32,
}

impl SyzygyInstance {
    /// Uses the model's own hyperplane class.
    pub fn new(z: CycleClass, bundle: FormalBundle, n: i64, sign: Sign, p: u32) -> Result<SyzygyInstance, CheckError> {
        let hyperplane = z.model().hyperplane().ok_or(CheckError::BadHyperplane)?;
        Ok(SyzygyInstance { hyperplane, z, bundle, n, sign, p })
    }

    pub fn model(&self) -> &Arc<RingModel> {
        self.z.model()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyzygyOutcome {
    pub holds: bool,
    /// `c_p(E) − n·H^p − sign·(p−1)!·z`.
    pub residual: CycleClass,
}

pub fn verify_syzygy_identity(inst: &SyzygyInstance) -> Result<SyzygyOutcome, CheckError> {
    if inst.p == 0 {
        return Err(CheckError::ZeroCodimension);
    }
    if inst.hyperplane.is_zero() || !inst.hyperplane.is_homogeneous_of(1) {
        return Err(CheckError::BadHyperplane);
    }
    if !inst.z.is_homogeneous_of(inst.p) {
        return Err(CheckError::DegreeMismatch { expected: inst.p });
    }
    let scale = inst.sign.as_rational() * Rational::factorial(inst.p - 1);
    let lhs = inst.z.scale(&scale);
    let rhs = inst
        .bundle
        .chern_class(inst.p)
        .sub(&inst.hyperplane.pow(inst.p).scale(&Rational::from(inst.n)))?;
    let residual = rhs.sub(&lhs)?;
    Ok(SyzygyOutcome {
        holds: residual.is_zero(),
        residual,
    })
}

/// Whether every `i`-dimensional cycle on a smooth `d`-fold is smoothable
/// by Kleiman's bound `i < (d+2)/2`.
pub fn kleiman_smooth_bound(d: u32, i: u32) -> Result<bool, CheckError> {
    if i > d {
        return Err(CheckError::CycleDimensionOutOfRange { d, i });
    }
    Ok(Rational::from(i) < Rational::new(d as i64 + 2, 2))
}

#[derive(Debug, Clone)]
pub struct SubalgebraGenerator {
    pub name: String,
    pub class: CycleClass,
    /// Whether the class is known to be lci.
    pub lci: bool,
}

impl SubalgebraGenerator {
    pub fn new(name: impl Into<String>, class: CycleClass, lci: bool) -> Self {
        SubalgebraGenerator { name: name.into(), class, lci }
    }
}

/// `target = Σ coeff · Π generator_j^{exponent_j}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Representation {
    pub generator_names: Vec<String>,
    pub terms: Vec<(Rational, Vec<u32>)>,
    /// True when every generator used carries an lci flag.
    pub all_lci: bool,
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (n, (c, exps)) in self.terms.iter().enumerate() {
            let mut factors = Vec::new();
            for (name, &e) in self.generator_names.iter().zip(exps) {
                match e {
                    0 => {}
                    1 => factors.push(name.clone()),
                    e => factors.push(format!("{name}^{e}")),
                }
            }
            let abs = c.abs();
            match (n, c.is_negative()) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            if factors.is_empty() {
                write!(f, "{abs}")?;
            } else if abs.is_one() {
                f.write_str(&factors.join("*"))?;
            } else {
                write!(f, "{abs}*{}", factors.join("*"))?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Membership {
    Represented(Representation),
    /// Not reachable with these generators within the degree bound. This is
    /// not a proof that the class lies outside the subalgebra.
    NotRepresentable { reason: String },
}

fn weighted_degree(exps: &[u32], degrees: &[u32]) -> u32 {
    exps.iter().zip(degrees).map(|(e, d)| e * d).sum()
}

/// Exponent vectors of weighted degree exactly `target`.
fn monomials_of_degree(degrees: &[u32], target: u32) -> Vec<Vec<u32>> {
    fn rec(degrees: &[u32], left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        let j = cur.len();
        if j == degrees.len() {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for e in 0..=left / degrees[j] {
            cur.push(e);
            rec(degrees, left - e * degrees[j], cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(degrees, target, &mut Vec::new(), &mut out);
    out
}

/// Searches for `target` as a rational combination of products of the
/// generators. Candidate products are listed in graded-lex order and
/// duplicate classes dropped before solving.
pub fn express_in_subalgebra(
    target: &CycleClass,
    generators: &[SubalgebraGenerator],
    max_degree: u32,
) -> Result<Membership, CheckError> {
    let model = target.model();
    if max_degree > model.top_degree() {
        return Err(CheckError::DegreeBoundTooLarge { bound: max_degree, top: model.top_degree() });
    }
    let mut degrees = Vec::with_capacity(generators.len());
    for g in generators {
        if **g.class.model() != **model {
            return Err(RingError::ModelMismatch { left: model.id(), right: g.class.model().id() }.into());
        }
        match g.class.homogeneous_degree() {
            Some(d) if d > 0 => degrees.push(d),
            _ => return Err(CheckError::BadGenerator(g.name.clone())),
        }
    }
    let names: Vec<String> = generators.iter().map(|g| g.name.clone()).collect();
    let target_degrees = target.degrees();
    if let Some(&d) = target_degrees.iter().find(|&&d| d > max_degree) {
        return Ok(Membership::NotRepresentable {
            reason: format!("target has a degree-{d} component above the bound {max_degree}"),
        });
    }

    let mut candidates: Vec<(Vec<u32>, CycleClass)> = Vec::new();
    for &d in &target_degrees {
        let mut exps = monomials_of_degree(&degrees, d);
        exps.sort_by(|a, b| b.cmp(a));
        for e in exps {
            debug_assert_eq!(weighted_degree(&e, &degrees), d);
            let mut class = CycleClass::one(model);
            for (g, &k) in generators.iter().zip(&e) {
                class = class.mul(&g.class.pow(k))?;
            }
            if !class.is_zero() && !candidates.iter().any(|(_, c)| *c == class) {
                candidates.push((e, class));
            }
        }
    }

    let keys: BTreeSet<Vec<u32>> = candidates
        .iter()
        .flat_map(|(_, c)| c.terms().into_iter().map(|(k, _)| k.clone()))
        .chain(target.terms().into_iter().map(|(k, _)| k.clone()))
        .collect();
    let keys: Vec<Vec<u32>> = keys.into_iter().collect();
    let not_found = || Membership::NotRepresentable {
        reason: format!("no combination of generator products of degree at most {max_degree}"),
    };
    if candidates.is_empty() {
        return Ok(if target.is_zero() {
            Membership::Represented(Representation { generator_names: names, terms: Vec::new(), all_lci: true })
        } else {
            not_found()
        });
    }
    let a = Matrix::from_fn(keys.len(), candidates.len(), |i, j| candidates[j].1.coeff(&keys[i]));
    let b: Vec<Rational> = keys.iter().map(|k| target.coeff(k)).collect();
    let Some(x) = solve_particular(&a, &b)? else {
        return Ok(not_found());
    };

    let mut check = CycleClass::zero(model);
    let mut terms = Vec::new();
    let mut used = vec![false; generators.len()];
    for (c, (e, class)) in x.into_iter().zip(&candidates) {
        if c.is_zero() {
            continue;
        }
        check = check.add(&class.scale(&c))?;
        for (u, &k) in used.iter_mut().zip(e) {
            *u |= k > 0;
        }
        terms.push((c, e.clone()));
    }
    if check != *target {
        return Err(CheckError::PostCheckFailed);
    }
    let all_lci = generators.iter().zip(&used).all(|(g, &u)| !u || g.lci);
    Ok(Membership::Represented(Representation { generator_names: names, terms, all_lci }))
}
