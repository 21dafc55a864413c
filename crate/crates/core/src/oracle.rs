//! Splitting-principle oracle.
//!
//! Every Chern-class expression is expanded in formal Chern roots: a bundle
//! `E` of rank `r` gets roots `a1_E..ar_E`, a line bundle `L` the single root
//! `l_L`. Twisting by `L^m` shifts each root by `m·l_L`, duals negate roots,
//! sums concatenate them, and `c_k` is the `k`-th elementary symmetric
//! polynomial of the roots. Identities are checked in the free polynomial
//! ring, without truncation, and nothing here calls into [`crate::chern`].

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::arith::Rational;
use crate::chern::{chern_generator_name, line_generator_name};
use crate::ring::{CycleClass, RingError, RingModel};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("unknown symbol {0}")]
    UnknownSymbol(String),
    #[error("polynomial is not symmetric in the roots of {0}")]
    NotSymmetric(String),
    #[error(transparent)]
    Ring(#[from] RingError),
}

/// Declared bundles (with ranks) and line bundles; fixes the variable layout.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct OracleContext {
    bundles: Vec<(String, u32)>,
    lines: Vec<String>,
}

impl OracleContext {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bundle(mut self, name: impl Into<String>, rank: u32) -> Self {
        self.bundles.push((name.into(), rank));
        self
    }

    pub fn line(mut self, name: impl Into<String>) -> Self {
        self.lines.push(name.into());
        self
    }

    pub fn nvars(&self) -> usize {
        self.bundles.iter().map(|(_, r)| *r as usize).sum::<usize>() + self.lines.len()
    }

    /// Offset and rank of a bundle's root block.
    fn block(&self, name: &str) -> Option<(usize, usize)> {
        let mut off = 0;
        for (b, r) in &self.bundles {
            if b == name {
                return Some((off, *r as usize));
            }
            off += *r as usize;
        }
        None
    }

    fn blocks(&self) -> Vec<(String, usize, usize)> {
        let mut off = 0;
        self.bundles
            .iter()
            .map(|(b, r)| {
                let out = (b.clone(), off, *r as usize);
                off += *r as usize;
                out
            })
            .collect()
    }

    fn line_var(&self, name: &str) -> Option<usize> {
        let off: usize = self.bundles.iter().map(|(_, r)| *r as usize).sum();
        self.lines.iter().position(|l| l == name).map(|i| off + i)
    }

    fn root_names(&self) -> Vec<String> {
        let mut names = Vec::new();
        for (b, r) in &self.bundles {
            names.extend((1..=*r).map(|i| format!("a{i}_{b}")));
        }
        names.extend(self.lines.iter().map(|l| line_generator_name(l)));
        names
    }

    fn elementary_names(&self) -> Vec<String> {
        let mut names = Vec::new();
        for (b, r) in &self.bundles {
            names.extend((1..=*r).map(|i| format!("e{i}_{b}")));
        }
        names.extend(self.lines.iter().map(|l| line_generator_name(l)));
        names
    }

    /// The universal ring `Q[c1_E..cr_E, l_L]` truncated at `degree`.
    pub fn universal_model(&self, degree: u32) -> Result<Arc<RingModel>, OracleError> {
        let bundles: Vec<(&str, u32)> = self.bundles.iter().map(|(b, r)| (b.as_str(), *r)).collect();
        let lines: Vec<&str> = self.lines.iter().map(String::as_str).collect();
        Ok(RingModel::universal(degree, crate::chern::universal_generators(&bundles, &lines))?)
    }
}

/// A bundle built from declared symbols by twists, duals and sums.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BundleExpr {
    Bundle(String),
    /// `L^{⊗m}` as a rank-one bundle.
    Line(String, i64),
    Dual(Box<BundleExpr>),
    /// `E ⊗ L^{⊗m}`.
    Twist(Box<BundleExpr>, String, i64),
    Sum(Box<BundleExpr>, Box<BundleExpr>),
}

impl BundleExpr {
    pub fn bundle(name: &str) -> Self {
        BundleExpr::Bundle(name.into())
    }

    pub fn twist(self, line: &str, m: i64) -> Self {
        BundleExpr::Twist(Box::new(self), line.into(), m)
    }

    pub fn dual(self) -> Self {
        BundleExpr::Dual(Box::new(self))
    }

    pub fn sum(self, other: BundleExpr) -> Self {
        BundleExpr::Sum(Box::new(self), Box::new(other))
    }
}

/// Polynomial expressions in Chern classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ChernExpr {
    Const(Rational),
    Chern(BundleExpr, u32),
    Add(Vec<ChernExpr>),
    Mul(Vec<ChernExpr>),
    Neg(Box<ChernExpr>),
    Pow(Box<ChernExpr>, u32),
}

impl ChernExpr {
    pub fn c(bundle: BundleExpr, k: u32) -> Self {
        ChernExpr::Chern(bundle, k)
    }

    /// `c_1(L^{⊗m})`.
    pub fn line_c1(line: &str, m: i64) -> Self {
        ChernExpr::Chern(BundleExpr::Line(line.into(), m), 1)
    }

    pub fn constant(q: impl Into<Rational>) -> Self {
        ChernExpr::Const(q.into())
    }

    pub fn scaled(self, q: impl Into<Rational>) -> Self {
        ChernExpr::Mul(vec![ChernExpr::Const(q.into()), self])
    }

    pub fn pow(self, e: u32) -> Self {
        ChernExpr::Pow(Box::new(self), e)
    }
}

/// Sparse polynomial with a fixed number of variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymPoly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, Rational>,
}

impl SymPoly {
    pub fn zero(nvars: usize) -> Self {
        SymPoly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: Rational) -> Self {
        let mut p = SymPoly::zero(nvars);
        p.insert(vec![0; nvars], c);
        p
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut p = SymPoly::zero(nvars);
        p.insert(e, Rational::one());
        p
    }

    fn linear(coeffs: &[Rational]) -> Self {
        let n = coeffs.len();
        let mut p = SymPoly::zero(n);
        for (i, c) in coeffs.iter().enumerate() {
            let mut e = vec![0; n];
            e[i] = 1;
            p.insert(e, c.clone());
        }
        p
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

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &BTreeMap<Vec<u32>, Rational> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &SymPoly) -> SymPoly {
        let mut out = self.clone();
        for (k, v) in &other.terms {
            out.insert(k.clone(), v.clone());
        }
        out
    }

    pub fn sub(&self, other: &SymPoly) -> SymPoly {
        self.add(&other.scale(&Rational::from(-1)))
    }

    pub fn scale(&self, q: &Rational) -> SymPoly {
        let mut out = SymPoly::zero(self.nvars);
        for (k, v) in &self.terms {
            out.insert(k.clone(), v * q);
        }
        out
    }

    pub fn mul(&self, other: &SymPoly) -> SymPoly {
        let mut out = SymPoly::zero(self.nvars);
        for (a, x) in &self.terms {
            for (b, y) in &other.terms {
                out.insert(a.iter().zip(b).map(|(i, j)| i + j).collect(), x * y);
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> SymPoly {
        (0..e).fold(SymPoly::constant(self.nvars, Rational::one()), |acc, _| acc.mul(self))
    }

    fn permuted(&self, i: usize, j: usize) -> SymPoly {
        let mut out = SymPoly::zero(self.nvars);
        for (k, v) in &self.terms {
            let mut k = k.clone();
            k.swap(i, j);
            out.insert(k, v.clone());
        }
        out
    }

    fn display_with(&self, names: &[String]) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut terms: Vec<_> = self.terms.iter().collect();
        terms.sort_by(|a, b| {
            let (da, db): (u32, u32) = (a.0.iter().sum(), b.0.iter().sum());
            da.cmp(&db).then_with(|| b.0.cmp(a.0))
        });
        let mut s = String::new();
        for (i, (key, c)) in terms.into_iter().enumerate() {
            let mon: Vec<String> = key
                .iter()
                .zip(names)
                .filter(|(e, _)| **e > 0)
                .map(|(e, n)| if *e == 1 { n.clone() } else { format!("{n}^{e}") })
                .collect();
            let mon = mon.join("*");
            let abs = c.abs();
            if i == 0 {
                if c.is_negative() {
                    s.push('-');
                }
            } else {
                s.push_str(if c.is_negative() { " - " } else { " + " });
            }
            match (mon.is_empty(), abs.is_one()) {
                (true, _) => s.push_str(&abs.to_string()),
                (false, true) => s.push_str(&mon),
                (false, false) => s.push_str(&format!("{abs}*{mon}")),
            }
        }
        s
    }

    /// Canonical text form with root names from `ctx`.
    pub fn display(&self, ctx: &OracleContext) -> String {
        self.display_with(&ctx.root_names())
    }
}

fn roots(ctx: &OracleContext, b: &BundleExpr) -> Result<Vec<Vec<Rational>>, OracleError> {
    let n = ctx.nvars();
    match b {
        BundleExpr::Bundle(name) => {
            let (off, r) = ctx.block(name).ok_or_else(|| OracleError::UnknownSymbol(name.clone()))?;
            Ok((0..r)
                .map(|i| {
                    let mut v = vec![Rational::zero(); n];
                    v[off + i] = Rational::one();
                    v
                })
                .collect())
        }
        BundleExpr::Line(name, m) => {
            let i = ctx.line_var(name).ok_or_else(|| OracleError::UnknownSymbol(name.clone()))?;
            let mut v = vec![Rational::zero(); n];
            v[i] = Rational::from(*m);
            Ok(vec![v])
        }
        BundleExpr::Dual(inner) => Ok(roots(ctx, inner)?
            .into_iter()
            .map(|v| v.into_iter().map(|x| -x).collect())
            .collect()),
        BundleExpr::Twist(inner, line, m) => {
            let i = ctx.line_var(line).ok_or_else(|| OracleError::UnknownSymbol(line.clone()))?;
            let shift = Rational::from(*m);
            Ok(roots(ctx, inner)?
                .into_iter()
                .map(|mut v| {
                    v[i] += &shift;
                    v
                })
                .collect())
        }
        BundleExpr::Sum(a, b) => {
            let mut out = roots(ctx, a)?;
            out.extend(roots(ctx, b)?);
            Ok(out)
        }
    }
}

/// `e_k` of linear forms, expanded.
fn elementary_of(roots: &[Vec<Rational>], k: u32, nvars: usize) -> SymPoly {
    let k = k as usize;
    let mut e: Vec<SymPoly> = vec![SymPoly::zero(nvars); k + 1];
    e[0] = SymPoly::constant(nvars, Rational::one());
    for root in roots {
        let lin = SymPoly::linear(root);
        for j in (1..=k.min(roots.len())).rev() {
            e[j] = e[j].add(&e[j - 1].mul(&lin));
        }
    }
    e.swap_remove(k)
}

/// Expands a Chern-class expression in the Chern roots.
pub fn expand_in_roots(ctx: &OracleContext, expr: &ChernExpr) -> Result<SymPoly, OracleError> {
    let n = ctx.nvars();
    Ok(match expr {
        ChernExpr::Const(q) => SymPoly::constant(n, q.clone()),
        ChernExpr::Chern(b, k) => elementary_of(&roots(ctx, b)?, *k, n),
        ChernExpr::Add(xs) => xs.iter().try_fold(SymPoly::zero(n), |acc, x| {
            Ok::<_, OracleError>(acc.add(&expand_in_roots(ctx, x)?))
        })?,
        ChernExpr::Mul(xs) => xs.iter().try_fold(SymPoly::constant(n, Rational::one()), |acc, x| {
            Ok::<_, OracleError>(acc.mul(&expand_in_roots(ctx, x)?))
        })?,
        ChernExpr::Neg(x) => expand_in_roots(ctx, x)?.scale(&Rational::from(-1)),
        ChernExpr::Pow(x, e) => expand_in_roots(ctx, x)?.pow(*e),
    })
}

/// A polynomial in the elementary symmetric functions `e1_E..er_E` of each
/// bundle's roots and the line variables `l_L`. Exponent slots mirror the
/// root layout: slot `off + j` of bundle `E` is the exponent of `e_{j+1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElementaryPoly {
    poly: SymPoly,
}

impl ElementaryPoly {
    pub fn terms(&self) -> &BTreeMap<Vec<u32>, Rational> {
        self.poly.terms()
    }

    pub fn display(&self, ctx: &OracleContext) -> String {
        self.poly.display_with(&ctx.elementary_names())
    }

    /// Substitutes `e_j ↦ e_j(roots)` back into the roots.
    pub fn expand(&self, ctx: &OracleContext) -> SymPoly {
        let n = ctx.nvars();
        let mut images: Vec<SymPoly> = Vec::with_capacity(n);
        for (_, off, r) in ctx.blocks() {
            let rs: Vec<Vec<Rational>> = (0..r)
                .map(|i| {
                    let mut v = vec![Rational::zero(); n];
                    v[off + i] = Rational::one();
                    v
                })
                .collect();
            images.extend((1..=r).map(|j| elementary_of(&rs, j as u32, n)));
        }
        while images.len() < n {
            images.push(SymPoly::var(n, images.len()));
        }
        let mut out = SymPoly::zero(n);
        for (key, c) in self.poly.terms() {
            let mut term = SymPoly::constant(n, c.clone());
            for (img, &e) in images.iter().zip(key) {
                if e > 0 {
                    term = term.mul(&img.pow(e));
                }
            }
            out = out.add(&term);
        }
        out
    }

    /// Maps `e_j` of `E` to `cj_E` and `l_L` to `l_L` in `model`, which must
    /// carry those generator names (e.g. [`OracleContext::universal_model`]).
    pub fn to_class(&self, ctx: &OracleContext, model: &Arc<RingModel>) -> Result<CycleClass, OracleError> {
        let mut images = Vec::with_capacity(ctx.nvars());
        for (b, r) in &ctx.bundles {
            for j in 1..=*r {
                images.push(CycleClass::generator(model, &chern_generator_name(b, j))?);
            }
        }
        for l in &ctx.lines {
            images.push(CycleClass::generator(model, &line_generator_name(l))?);
        }
        let mut out = CycleClass::zero(model);
        for (key, c) in self.poly.terms() {
            let mut term = CycleClass::constant(model, c.clone());
            for (img, &e) in images.iter().zip(key) {
                if e > 0 {
                    term = term.mul(&img.pow(e))?;
                }
            }
            out = out.add(&term)?;
        }
        Ok(out)
    }
}

/// Checks invariance under the adjacent transpositions of every root block.
pub fn is_symmetric(ctx: &OracleContext, p: &SymPoly) -> Result<(), OracleError> {
    for (name, off, r) in ctx.blocks() {
        for i in 0..r.saturating_sub(1) {
            if &p.permuted(off + i, off + i + 1) != p {
                return Err(OracleError::NotSymmetric(name));
            }
        }
    }
    Ok(())
}

fn lex_block(a: &[u32], b: &[u32], off: usize, r: usize) -> Ordering {
    a[off..off + r].cmp(&b[off..off + r])
}

/// Rewrites a polynomial symmetric in each bundle's roots in terms of the
/// elementary symmetric functions, by repeated leading-term subtraction.
pub fn to_elementary(ctx: &OracleContext, p: &SymPoly) -> Result<ElementaryPoly, OracleError> {
    is_symmetric(ctx, p)?;
    let n = ctx.nvars();
    let mut current = p.clone();
    for (name, off, r) in ctx.blocks() {
        let block_roots: Vec<Vec<Rational>> = (0..r)
            .map(|i| {
                let mut v = vec![Rational::zero(); n];
                v[off + i] = Rational::one();
                v
            })
            .collect();
        let elementaries: Vec<SymPoly> = (1..=r).map(|j| elementary_of(&block_roots, j as u32, n)).collect();
        let mut remaining = current;
        let mut done = SymPoly::zero(n);
        while let Some((key, c)) = remaining
            .terms
            .iter()
            .max_by(|a, b| lex_block(a.0, b.0, off, r).then_with(|| a.0.cmp(b.0)))
            .map(|(k, v)| (k.clone(), v.clone()))
        {
            let alpha = &key[off..off + r];
            if alpha.windows(2).any(|w| w[0] < w[1]) {
                return Err(OracleError::NotSymmetric(name));
            }
            // c · rest · Π e_j^{α_j − α_{j+1}}
            let mut done_key = key.clone();
            let mut rest_key = key.clone();
            for j in 0..r {
                let next = if j + 1 < r { alpha[j + 1] } else { 0 };
                done_key[off + j] = alpha[j] - next;
                rest_key[off + j] = 0;
            }
            let mut product = SymPoly::zero(n);
            product.insert(rest_key, c.clone());
            for j in 0..r {
                product = product.mul(&elementaries[j].pow(done_key[off + j]));
            }
            remaining = remaining.sub(&product);
            done.insert(done_key, c);
        }
        current = done;
    }
    Ok(ElementaryPoly { poly: current })
}

/// Outcome of comparing two expressions in the roots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleReport {
    pub holds: bool,
    /// Plain-text diff of the canonical forms; empty when the identity holds.
    pub report: String,
}

pub fn oracle_check(ctx: &OracleContext, lhs: &ChernExpr, rhs: &ChernExpr) -> Result<OracleReport, OracleError> {
    let l = expand_in_roots(ctx, lhs)?;
    let r = expand_in_roots(ctx, rhs)?;
    let diff = l.sub(&r);
    if diff.is_zero() {
        return Ok(OracleReport { holds: true, report: String::new() });
    }
    let report = format!(
        "lhs: {}\nrhs: {}\nlhs - rhs: {}",
        l.display(ctx),
        r.display(ctx),
        diff.display(ctx)
    );
    Ok(OracleReport { holds: false, report })
}

impl fmt::Display for OracleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.holds {
            write!(f, "identity holds")
        } else {
            write!(f, "identity fails\n{}", self.report)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(r: u32) -> OracleContext {
        OracleContext::new().bundle("E", r).line("L")
    }

    fn e() -> BundleExpr {
        BundleExpr::bundle("E")
    }

    #[test]
    fn twisted_top_class_rank_two() {
        let c = ctx(2);
        let got = expand_in_roots(&c, &ChernExpr::c(e().twist("L", 1), 2)).unwrap();
        // (a1+l)(a2+l) = a1a2 + a1 l + a2 l + l^2
        assert_eq!(got.display(&c), "a1_E*a2_E + a1_E*l_L + a2_E*l_L + l_L^2");
        let el = to_elementary(&c, &got).unwrap();
        assert_eq!(el.display(&c), "e2_E + e1_E*l_L + l_L^2");
    }

    #[test]
    fn line_powers_and_constants() {
        let c = ctx(1);
        let got = expand_in_roots(&c, &ChernExpr::line_c1("L", 5)).unwrap();
        assert_eq!(got, SymPoly::var(2, 1).scale(&Rational::from(5)));
        let got = expand_in_roots(&c, &ChernExpr::c(e().twist("L", 3), 0)).unwrap();
        assert_eq!(got, SymPoly::constant(2, Rational::one()));
    }

    #[test]
    fn to_elementary_examples() {
        let c = OracleContext::new().bundle("E", 2);
        let a1 = SymPoly::var(2, 0);
        let a2 = SymPoly::var(2, 1);
        let p = a1.pow(2).add(&a2.pow(2));
        assert_eq!(to_elementary(&c, &p).unwrap().display(&c), "-2*e2_E + e1_E^2");

        let c3 = OracleContext::new().bundle("E", 3);
        let s = (0..3).fold(SymPoly::zero(3), |acc, i| acc.add(&SymPoly::var(3, i)));
        assert_eq!(to_elementary(&c3, &s).unwrap().display(&c3), "e1_E");

        assert_eq!(
            to_elementary(&c, &a1.sub(&a2)),
            Err(OracleError::NotSymmetric("E".into()))
        );
    }

    #[test]
    fn oracle_checks() {
        let c = ctx(3);
        let lhs = ChernExpr::c(e().twist("L", 1), 3);
        let rhs = ChernExpr::Add(
            (0..=3)
                .map(|i| ChernExpr::Mul(vec![ChernExpr::line_c1("L", 1).pow(i), ChernExpr::c(e(), 3 - i)]))
                .collect(),
        );
        assert!(oracle_check(&c, &lhs, &rhs).unwrap().holds);

        let r = oracle_check(&c, &ChernExpr::c(e().twist("L", 1), 1), &ChernExpr::c(e(), 1)).unwrap();
        assert!(!r.holds);
        assert!(r.report.contains("lhs - rhs: 3*l_L"), "{}", r.report);

        assert!(oracle_check(&c, &lhs, &lhs).unwrap().holds);
        assert_eq!(
            oracle_check(&c, &ChernExpr::c(BundleExpr::bundle("F"), 1), &lhs),
            Err(OracleError::UnknownSymbol("F".into()))
        );
    }

    #[test]
    fn dual_and_sum_roots() {
        let c = ctx(2);
        let d = expand_in_roots(&c, &ChernExpr::c(e().dual(), 1)).unwrap();
        let p = expand_in_roots(&c, &ChernExpr::c(e(), 1)).unwrap();
        assert_eq!(d, p.scale(&Rational::from(-1)));
        let s = expand_in_roots(&c, &ChernExpr::c(e().sum(BundleExpr::Line("L".into(), 1)), 3)).unwrap();
        let expected = expand_in_roots(&c, &ChernExpr::Mul(vec![ChernExpr::c(e(), 2), ChernExpr::line_c1("L", 1)])).unwrap();
        assert_eq!(s, expected);
    }

    #[test]
    fn two_bundle_blocks() {
        let c = OracleContext::new().bundle("E", 2).bundle("F", 2).line("L");
        let f = BundleExpr::bundle("F");
        let p = expand_in_roots(&c, &ChernExpr::c(e().sum(f), 4)).unwrap();
        assert_eq!(to_elementary(&c, &p).unwrap().display(&c), "e2_E*e2_F");
    }

    #[test]
    fn elementary_round_trip() {
        for r in 1..=5u32 {
            let c = ctx(r);
            for k in 1..=r {
                let p = expand_in_roots(&c, &ChernExpr::c(e(), k)).unwrap();
                let el = to_elementary(&c, &p).unwrap();
                assert_eq!(el.display(&c), format!("e{k}_E"));
                assert_eq!(el.expand(&c), p);
            }
        }
    }
}
