//! Presented graded commutative Q-algebras used as Chow-ring models, and
//! their elements in canonical normal form.
//!
//! Four presentations are supported:
//!
//! * `universal(D)`: the free polynomial ring on named generators of
//!   positive degree, truncated above degree `D`;
//! * `P(n)`: `Q[H]/(H^{n+1})`;
//! * products of projective spaces: `Q[H_1..H_s]/(H_t^{n_t+1})`;
//! * `G(k, n)`: the Grassmannian, in the Schubert basis of partitions in the
//!   `k × (n−k)` box.
//!
//! Polynomial models store exponent vectors over the declared generators;
//! Grassmannians store partitions. Terms are ordered graded-lexicographically
//! (degree ascending, then exponent vectors descending) whenever they are
//! listed or serialized.

pub mod schubert;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::ser::{SerializeMap, SerializeSeq};
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::arith::Rational;
use schubert::{fits_box, jacobi_trudi, pieri_terms, trim, SpecialPolynomial};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RingError {
    #[error("model mismatch: {left} vs {right}")]
    ModelMismatch { left: String, right: String },
    #[error("unknown generator {0}")]
    UnknownGenerator(String),
    #[error("partition {0:?} does not fit in the Grassmannian box")]
    PartitionOutOfBox(Vec<u32>),
    #[error("special class index {0} out of range")]
    SpecialIndexOutOfRange(u32),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("substitution needs {expected} images, got {got}")]
    SubstitutionArity { expected: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelKind {
    UniversalTruncated { degree: u32 },
    ProjectiveSpace { n: u32 },
    ProductOfProjectiveSpaces { dims: Vec<u32> },
    Grassmannian { k: u32, n: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Generator {
    pub name: String,
    pub degree: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RingModel {
    kind: ModelKind,
    generators: Vec<Generator>,
    top_degree: u32,
}

pub const GRASSMANNIAN_CONVENTION: &str =
    "sigma_p = c_p(Q), Q the universal quotient bundle; special classes generate";

impl RingModel {
    /// Free ring on the given generators, truncated above `degree`.
    pub fn universal<S: Into<String>>(
        degree: u32,
        generators: impl IntoIterator<Item = (S, u32)>,
    ) -> Result<Arc<RingModel>, RingError> {
        let generators: Vec<Generator> = generators
            .into_iter()
            .map(|(name, degree)| Generator { name: name.into(), degree })
            .collect();
        if let Some(g) = generators.iter().find(|g| g.degree == 0) {
            return Err(RingError::InvalidModel(format!("generator {} has degree 0", g.name)));
        }
        for (i, g) in generators.iter().enumerate() {
            if generators[..i].iter().any(|h| h.name == g.name) {
                return Err(RingError::InvalidModel(format!("duplicate generator {}", g.name)));
            }
        }
        Ok(Arc::new(RingModel {
            kind: ModelKind::UniversalTruncated { degree },
            generators,
            top_degree: degree,
        }))
    }

    pub fn projective_space(n: u32) -> Arc<RingModel> {
        Arc::new(RingModel {
            kind: ModelKind::ProjectiveSpace { n },
            generators: vec![Generator { name: "H".into(), degree: 1 }],
            top_degree: n,
        })
    }

    pub fn product(dims: &[u32]) -> Result<Arc<RingModel>, RingError> {
        if dims.is_empty() {
            return Err(RingError::InvalidModel("empty product of projective spaces".into()));
        }
        Ok(Arc::new(RingModel {
            kind: ModelKind::ProductOfProjectiveSpaces { dims: dims.to_vec() },
            generators: (1..=dims.len())
                .map(|t| Generator { name: format!("H{t}"), degree: 1 })
                .collect(),
            top_degree: dims.iter().sum(),
        }))
    }

    pub fn grassmannian(k: u32, n: u32) -> Result<Arc<RingModel>, RingError> {
        if k == 0 || k >= n {
            return Err(RingError::InvalidModel(format!("G({k},{n}) needs 0 < k < n")));
        }
        Ok(Arc::new(RingModel {
            kind: ModelKind::Grassmannian { k, n },
            generators: (1..=n - k)
                .map(|p| Generator { name: format!("s{p}"), degree: p })
                .collect(),
            top_degree: k * (n - k),
        }))
    }

    pub fn kind(&self) -> &ModelKind {
        &self.kind
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn top_degree(&self) -> u32 {
        self.top_degree
    }

    pub fn is_grassmannian(&self) -> bool {
        matches!(self.kind, ModelKind::Grassmannian { .. })
    }

    /// `(rows, cols)` of the Schubert box for Grassmannians.
    pub fn schubert_box(&self) -> Option<(u32, u32)> {
        match self.kind {
            ModelKind::Grassmannian { k, n } => Some((k, n - k)),
            _ => None,
        }
    }

    /// Stable textual identifier, e.g. `P(3)`, `PxP(1,1)`, `G(2,4)`,
    /// `universal(4)`.
    pub fn id(&self) -> String {
        match &self.kind {
            ModelKind::UniversalTruncated { degree } => format!("universal({degree})"),
            ModelKind::ProjectiveSpace { n } => format!("P({n})"),
            ModelKind::ProductOfProjectiveSpaces { dims } => {
                let ps = vec!["P"; dims.len()].join("x");
                let ds: Vec<String> = dims.iter().map(u32::to_string).collect();
                format!("{ps}({})", ds.join(","))
            }
            ModelKind::Grassmannian { k, n } => format!("G({k},{n})"),
        }
    }

    /// Convention metadata; only Grassmannians carry one.
    pub fn convention(&self) -> Option<&'static str> {
        self.is_grassmannian().then_some(GRASSMANNIAN_CONVENTION)
    }

    pub fn generator_index(&self, name: &str) -> Option<usize> {
        self.generators.iter().position(|g| g.name == name)
    }

    /// The hyperplane class, when the model has a natural one: `H` on `P(n)`,
    /// `H1 + … + Hs` on products (Segre embedding), `σ_1` on Grassmannians
    /// (Plücker embedding).
    pub fn hyperplane(self: &Arc<Self>) -> Option<CycleClass> {
        match &self.kind {
            ModelKind::UniversalTruncated { .. } => None,
            _ => {
                let mut h = CycleClass::zero(self);
                let count = if self.is_grassmannian() { 1 } else { self.generators.len() };
                for i in 0..count {
                    h = h.add(&CycleClass::generator_at(self, i)).ok()?;
                }
                Some(h)
            }
        }
    }

    fn key_degree(&self, key: &[u32]) -> u32 {
        if self.is_grassmannian() {
            key.iter().sum()
        } else {
            key.iter().zip(&self.generators).map(|(e, g)| e * g.degree).sum()
        }
    }

    /// True if the exponent vector survives the relations.
    fn is_reduced(&self, key: &[u32]) -> bool {
        match &self.kind {
            ModelKind::UniversalTruncated { degree } => self.key_degree(key) <= *degree,
            ModelKind::ProjectiveSpace { n } => key[0] <= *n,
            ModelKind::ProductOfProjectiveSpaces { dims } => key.iter().zip(dims).all(|(e, n)| e <= n),
            ModelKind::Grassmannian { k, n } => fits_box(key, *k, n - k),
        }
    }

    fn order(&self, a: &[u32], b: &[u32]) -> Ordering {
        self.key_degree(a).cmp(&self.key_degree(b)).then_with(|| b.cmp(a))
    }

    fn same(self: &Arc<Self>, other: &Arc<Self>) -> Result<(), RingError> {
        if Arc::ptr_eq(self, other) || **self == **other {
            Ok(())
        } else {
            Err(RingError::ModelMismatch { left: self.id(), right: other.id() })
        }
    }
}

/// A formal polynomial over generator names, prior to reduction.
#[derive(Debug, Clone, Default)]
pub struct RawPoly {
    pub terms: Vec<(Vec<(String, u32)>, Rational)>,
}

impl RawPoly {
    pub fn term(mut self, coeff: impl Into<Rational>, factors: &[(&str, u32)]) -> Self {
        self.terms.push((
            factors.iter().map(|(n, e)| (n.to_string(), *e)).collect(),
            coeff.into(),
        ));
        self
    }
}

/// Canonical representative of a raw polynomial in the model.
pub fn normal_form(model: &Arc<RingModel>, raw: &RawPoly) -> Result<CycleClass, RingError> {
    let mut acc = CycleClass::zero(model);
    for (factors, coeff) in &raw.terms {
        let mut term = CycleClass::constant(model, coeff.clone());
        for (name, e) in factors {
            term = term.mul(&CycleClass::generator(model, name)?.pow(*e))?;
        }
        acc = acc.add(&term)?;
    }
    Ok(acc)
}

/// An element of a ring model, always in normal form.
#[derive(Clone, PartialEq, Eq)]
pub struct CycleClass {
    model: Arc<RingModel>,
    terms: BTreeMap<Vec<u32>, Rational>,
}

impl CycleClass {
    pub fn zero(model: &Arc<RingModel>) -> CycleClass {
        CycleClass { model: model.clone(), terms: BTreeMap::new() }
    }

    pub fn constant(model: &Arc<RingModel>, c: impl Into<Rational>) -> CycleClass {
        let key = if model.is_grassmannian() { vec![] } else { vec![0; model.generators.len()] };
        let mut out = CycleClass::zero(model);
        out.insert(key, c.into());
        out
    }

    pub fn one(model: &Arc<RingModel>) -> CycleClass {
        CycleClass::constant(model, 1)
    }

    pub fn generator(model: &Arc<RingModel>, name: &str) -> Result<CycleClass, RingError> {
        model
            .generator_index(name)
            .map(|i| CycleClass::generator_at(model, i))
            .ok_or_else(|| RingError::UnknownGenerator(name.to_string()))
    }

    pub(crate) fn generator_at(model: &Arc<RingModel>, i: usize) -> CycleClass {
        if model.is_grassmannian() {
            let p = model.generators[i].degree;
            CycleClass::from_key(model, vec![p], Rational::one())
        } else {
            let mut key = vec![0; model.generators.len()];
            key[i] = 1;
            CycleClass::from_key(model, key, Rational::one())
        }
    }

    /// The monomial with the given exponent vector, reduced.
    pub fn monomial(model: &Arc<RingModel>, exps: &[u32], c: impl Into<Rational>) -> Result<CycleClass, RingError> {
        if exps.len() != model.generators.len() {
            return Err(RingError::InvalidModel(format!(
                "exponent vector of length {} for {} generators",
                exps.len(),
                model.generators.len()
            )));
        }
        let mut out = CycleClass::constant(model, c);
        for (i, &e) in exps.iter().enumerate() {
            out = out.mul(&CycleClass::generator_at(model, i).pow(e))?;
        }
        Ok(out)
    }

    /// The Schubert class `σ_λ` in a Grassmannian model.
    pub fn schubert(model: &Arc<RingModel>, partition: &[u32]) -> Result<CycleClass, RingError> {
        let Some((rows, cols)) = model.schubert_box() else {
            return Err(RingError::InvalidModel(format!("{} has no Schubert basis", model.id())));
        };
        let lam = trim(partition.to_vec());
        if !fits_box(&lam, rows, cols) {
            return Err(RingError::PartitionOutOfBox(lam));
        }
        Ok(CycleClass::from_key(model, lam, Rational::one()))
    }

    fn from_key(model: &Arc<RingModel>, key: Vec<u32>, c: Rational) -> CycleClass {
        let mut out = CycleClass::zero(model);
        if model.is_reduced(&key) {
            out.insert(key, c);
        }
        out
    }

    fn insert(&mut self, key: Vec<u32>, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&key) {
            Some(v) => {
                *v += &c;
                if v.is_zero() {
                    self.terms.remove(&key);
                }
            }
            None => {
                self.terms.insert(key, c);
            }
        }
    }

    pub fn model(&self) -> &Arc<RingModel> {
        &self.model
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, key: &[u32]) -> Rational {
        self.terms.get(key).cloned().unwrap_or_else(Rational::zero)
    }

    /// Terms in graded-lex order.
    pub fn terms(&self) -> Vec<(&Vec<u32>, &Rational)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by(|a, b| self.model.order(a.0, b.0));
        v
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &CycleClass) -> Result<CycleClass, RingError> {
        self.model.same(&other.model)?;
        let mut out = self.clone();
        for (k, v) in &other.terms {
            out.insert(k.clone(), v.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &CycleClass) -> Result<CycleClass, RingError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> CycleClass {
        self.scale(&Rational::from(-1))
    }

    pub fn scale(&self, q: &Rational) -> CycleClass {
        if q.is_zero() {
            return CycleClass::zero(&self.model);
        }
        CycleClass {
            model: self.model.clone(),
            terms: self.terms.iter().map(|(k, v)| (k.clone(), v * q)).collect(),
        }
    }

    pub fn mul(&self, other: &CycleClass) -> Result<CycleClass, RingError> {
        self.model.same(&other.model)?;
        let mut out = CycleClass::zero(&self.model);
        if self.model.is_grassmannian() {
            // σ_λ·σ_μ: expand σ_μ by Giambelli, then apply Pieri repeatedly
            let m = self.model.generators.len();
            for (mu, b) in &other.terms {
                let jt = jacobi_trudi(mu, m);
                let prod = apply_special_poly(self, &jt);
                for (k, v) in prod.terms {
                    out.insert(k, v * b);
                }
            }
        } else {
            for (ka, a) in &self.terms {
                for (kb, b) in &other.terms {
                    let key: Vec<u32> = ka.iter().zip(kb).map(|(x, y)| x + y).collect();
                    if self.model.is_reduced(&key) {
                        out.insert(key, a * b);
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn pow(&self, e: u32) -> CycleClass {
        let mut acc = CycleClass::one(&self.model);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base).expect("same model");
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base).expect("same model");
            }
        }
        acc
    }

    pub fn degree_component(&self, d: u32) -> CycleClass {
        CycleClass {
            model: self.model.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(k, _)| self.model.key_degree(k) == d)
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        }
    }

    /// Degrees with a nonzero component, ascending.
    pub fn degrees(&self) -> Vec<u32> {
        let mut ds: Vec<u32> = self.terms.keys().map(|k| self.model.key_degree(k)).collect();
        ds.sort_unstable();
        ds.dedup();
        ds
    }

    /// `Some(d)` if every term has degree `d`; zero is homogeneous of every
    /// degree and reports `None`.
    pub fn homogeneous_degree(&self) -> Option<u32> {
        match self.degrees().as_slice() {
            [d] => Some(*d),
            _ => None,
        }
    }

    pub fn is_homogeneous_of(&self, d: u32) -> bool {
        self.is_zero() || self.homogeneous_degree() == Some(d)
    }

    /// Substitutes `images[i]` for generator `i` (polynomial models only).
    pub fn substitute(&self, target: &Arc<RingModel>, images: &[CycleClass]) -> Result<CycleClass, RingError> {
        if self.model.is_grassmannian() {
            return Err(RingError::InvalidModel("substitution from a Schubert basis".into()));
        }
        if images.len() != self.model.generators.len() {
            return Err(RingError::SubstitutionArity {
                expected: self.model.generators.len(),
                got: images.len(),
            });
        }
        let mut out = CycleClass::zero(target);
        for (key, c) in &self.terms {
            let mut term = CycleClass::constant(target, c.clone());
            for (img, &e) in images.iter().zip(key) {
                if e > 0 {
                    term = term.mul(&img.pow(e))?;
                }
            }
            out = out.add(&term)?;
        }
        Ok(out)
    }

    fn format_key(&self, key: &[u32]) -> String {
        if self.model.is_grassmannian() {
            if key.is_empty() {
                return String::new();
            }
            let parts: Vec<String> = key.iter().map(u32::to_string).collect();
            return format!("s[{}]", parts.join(","));
        }
        let factors: Vec<String> = key
            .iter()
            .zip(&self.model.generators)
            .filter(|(e, _)| **e > 0)
            .map(|(e, g)| if *e == 1 { g.name.clone() } else { format!("{}^{e}", g.name) })
            .collect();
        factors.join("*")
    }
}

/// Multiplies `base` by a polynomial in special classes via Pieri.
fn apply_special_poly(base: &CycleClass, poly: &SpecialPolynomial) -> CycleClass {
    let mut out = CycleClass::zero(&base.model);
    for (exps, c) in &poly.terms {
        let mut cur = base.clone();
        for (idx, &e) in exps.iter().enumerate() {
            for _ in 0..e {
                cur = pieri_class(&cur, idx as u32 + 1);
            }
        }
        for (k, v) in cur.terms {
            out.insert(k, v * c);
        }
    }
    out
}

fn pieri_class(a: &CycleClass, p: u32) -> CycleClass {
    let (rows, cols) = a.model.schubert_box().expect("grassmannian");
    let mut out = CycleClass::zero(&a.model);
    for (lam, c) in &a.terms {
        for mu in pieri_terms(lam, p, rows, cols) {
            out.insert(mu, c.clone());
        }
    }
    out
}

/// `σ_λ · σ_p` by the Pieri rule.
pub fn pieri_multiply(model: &Arc<RingModel>, lambda: &[u32], p: u32) -> Result<CycleClass, RingError> {
    let base = CycleClass::schubert(model, lambda)?;
    let (_, cols) = model.schubert_box().expect("checked by schubert");
    if p == 0 || p > cols {
        return Err(RingError::SpecialIndexOutOfRange(p));
    }
    Ok(pieri_class(&base, p))
}

/// Giambelli expansion of `σ_λ` as a polynomial in `σ_1..σ_{n−k}`.
pub fn giambelli_expand(model: &Arc<RingModel>, lambda: &[u32]) -> Result<GiambelliExpansion, RingError> {
    let base = CycleClass::schubert(model, lambda)?;
    let lam = base.terms.keys().next().cloned().unwrap_or_default();
    Ok(GiambelliExpansion {
        model: model.clone(),
        poly: jacobi_trudi(&lam, model.generators.len()),
    })
}

/// A Jacobi–Trudi polynomial in special classes, tied to its model.
#[derive(Debug, Clone)]
pub struct GiambelliExpansion {
    model: Arc<RingModel>,
    poly: SpecialPolynomial,
}

impl GiambelliExpansion {
    /// Exponent vectors over `σ_1..σ_{n−k}` with coefficients.
    pub fn terms(&self) -> &BTreeMap<Vec<u32>, Rational> {
        &self.poly.terms
    }

    /// Evaluates in the Schubert basis by iterated Pieri from `σ_∅`.
    pub fn evaluate(&self) -> CycleClass {
        apply_special_poly(&CycleClass::one(&self.model), &self.poly)
    }

    /// `σ_μ · (this polynomial)`.
    pub fn multiply(&self, mu: &CycleClass) -> Result<CycleClass, RingError> {
        self.model.same(&mu.model)?;
        Ok(apply_special_poly(mu, &self.poly))
    }
}

impl fmt::Display for CycleClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (key, c)) in self.terms().into_iter().enumerate() {
            let mon = self.format_key(key);
            let neg = c.is_negative();
            let abs = c.abs();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            match (mon.is_empty(), abs.is_one()) {
                (true, _) => write!(f, "{abs}")?,
                (false, true) => write!(f, "{mon}")?,
                (false, false) => write!(f, "{abs}*{mon}")?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for CycleClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", self.model.id(), self)
    }
}

struct TermJson<'a> {
    grassmannian: bool,
    key: &'a [u32],
    coeff: &'a Rational,
}

impl Serialize for TermJson<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(2))?;
        map.serialize_entry("coeff", self.coeff)?;
        if self.grassmannian {
            map.serialize_entry("partition", self.key)?;
        } else {
            map.serialize_entry("monomial", self.key)?;
        }
        map.end()
    }
}

struct TermsJson<'a>(&'a CycleClass);

impl Serialize for TermsJson<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let terms = self.0.terms();
        let mut seq = s.serialize_seq(Some(terms.len()))?;
        for (key, coeff) in terms {
            seq.serialize_element(&TermJson {
                grassmannian: self.0.model.is_grassmannian(),
                key,
                coeff,
            })?;
        }
        seq.end()
    }
}

impl Serialize for CycleClass {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(2))?;
        map.serialize_entry("model", &self.model.id())?;
        map.serialize_entry("terms", &TermsJson(self))?;
        map.end()
    }
}
