use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use serde_json::{json, Map, Value};

use crate::arith::Rational;
use crate::cert::{
    certify_top, certify_xi, lci_flags_report, oracle_verify, verify_certificate, verify_universal, Certificate,
    ASSUME_LINE_GENERATED, ASSUME_TWIST_GENERATED,
};
use crate::checks::{
    express_in_subalgebra, kleiman_smooth_bound, verify_syzygy_identity, Membership, SubalgebraGenerator,
    SyzygyInstance,
};
use crate::chern::{
    chern_character, direct_sum, dual, line_power, tensor_line, top_chern, universal_generators, universal_line,
    FormalBundle, LineBundle,
};
use crate::oracle::{oracle_check, BundleExpr, ChernExpr, OracleContext};
use crate::ring::{CycleClass, ModelKind, RingModel};

use super::ast::*;
use super::pretty;
use super::{parse, Diagnostic, Severity, Span, MAX_UNIVERSAL_DEGREE};

/// Truncation degree of the implicit universal model used when a program
/// declares symbols before any `model` statement.
pub const DEFAULT_UNIVERSAL_DEGREE: u32 = 6;

#[derive(Debug, Clone, Default)]
pub struct ExecOptions {
    /// Pass every certificate through model evaluation and the root oracle.
    pub verify: bool,
    /// Degree bound for `express` (clamped to the model's top degree), and
    /// the truncation of the implicit universal model.
    pub max_degree: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Info,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportLine {
    pub statement: usize,
    pub source: String,
    pub body: Vec<String>,
    pub status: Status,
}

#[derive(Debug, Clone, Default)]
pub struct Report {
    pub results: Vec<Value>,
    pub checks: Vec<Value>,
    pub diagnostics: Vec<Diagnostic>,
    pub lines: Vec<ReportLine>,
    pub failed_verifications: usize,
}

impl Report {
    pub fn error_count(&self) -> usize {
        self.diagnostics.iter().filter(|d| d.severity == Severity::Error).count()
    }

    pub fn is_success(&self) -> bool {
        self.error_count() == 0 && self.failed_verifications == 0
    }

    pub fn exit_code(&self) -> i32 {
        if self.is_success() { 0 } else { 1 }
    }

    /// Canonical JSON: sorted keys, no insignificant whitespace.
    pub fn to_json(&self) -> String {
        let mut root = Map::new();
        root.insert("results".into(), Value::Array(self.results.clone()));
        if !self.checks.is_empty() {
            root.insert("checks".into(), Value::Array(self.checks.clone()));
        }
        if !self.diagnostics.is_empty() {
            root.insert("diagnostics".into(), serde_json::to_value(&self.diagnostics).expect("serializable"));
        }
        serde_json::to_string(&Value::Object(root)).expect("serializable")
    }

    pub fn render(&self, color: bool) -> String {
        let paint = |s: &str, code: &str| if color { format!("\x1b[{code}m{s}\x1b[0m") } else { s.to_string() };
        let mut out = String::new();
        for line in &self.lines {
            let marker = match line.status {
                Status::Pass => paint("ok", "32"),
                Status::Fail => paint("FAIL", "31"),
                Status::Info => paint("->", "36"),
            };
            writeln!(out, "{marker} {}", line.source).unwrap();
            for b in &line.body {
                writeln!(out, "   {b}").unwrap();
            }
        }
        for d in &self.diagnostics {
            writeln!(out, "{}", paint(&d.to_string(), "31")).unwrap();
        }
        out
    }
}

/// Parses and executes; a parse failure yields a report holding only the
/// diagnostics.
pub fn run_source(source: &str, opts: &ExecOptions) -> Report {
    match parse(source) {
        Ok(program) => execute(&program, opts),
        Err(diagnostics) => Report { diagnostics, ..Report::default() },
    }
}

pub fn execute(program: &Program, opts: &ExecOptions) -> Report {
    let mut ex = Executor::new(program, opts);
    ex.run();
    ex.report
}

#[derive(Debug, Clone)]
struct LineEntry {
    gg: bool,
    bound: Option<LineBundle>,
    scope: usize,
}

#[derive(Debug, Clone)]
struct BundleEntry {
    rank: u32,
    gg: bool,
    gg_twist: bool,
    bound: Option<FormalBundle>,
    scope: usize,
}

#[derive(Debug, Clone)]
enum Symbol {
    Line(LineEntry),
    Bundle(BundleEntry),
    /// The bound expression, with earlier lets already substituted.
    Let(Expr),
}

type XResult<T> = Result<T, Diagnostic>;

fn fail<T>(span: Span, msg: impl Into<String>) -> XResult<T> {
    Err(Diagnostic::error(msg, span))
}

fn at<E: std::fmt::Display>(span: Span) -> impl Fn(E) -> Diagnostic {
    move |e| Diagnostic::error(e.to_string(), span)
}

struct Executor<'a> {
    program: &'a Program,
    opts: &'a ExecOptions,
    symbols: BTreeMap<String, Symbol>,
    model: Arc<RingModel>,
    keyword: &'static str,
    scope: usize,
    report: Report,
}

impl<'a> Executor<'a> {
    fn new(program: &'a Program, opts: &'a ExecOptions) -> Self {
        Executor {
            program,
            opts,
            symbols: BTreeMap::new(),
            model: RingModel::universal::<String>(1, []).expect("empty universal model"),
            keyword: "universal",
            scope: 0,
            report: Report::default(),
        }
    }

    fn run(&mut self) {
        let stmts = &self.program.statements;
        if !stmts.is_empty() && !matches!(stmts[0].kind, StatementKind::Model(_)) {
            let degree = self.opts.max_degree.unwrap_or(DEFAULT_UNIVERSAL_DEGREE).max(1);
            if degree > MAX_UNIVERSAL_DEGREE {
                let msg = format!("implicit universal degree {degree} exceeds the limit of {MAX_UNIVERSAL_DEGREE}");
                self.report.diagnostics.push(Diagnostic::error(msg, stmts[0].span));
                return;
            }
            if let Err(d) = self.enter_universal(degree, 0, stmts[0].span) {
                self.report.diagnostics.push(d);
                return;
            }
        }
        for (idx, stmt) in stmts.iter().enumerate() {
            if let Err(d) = self.statement(idx, stmt) {
                self.report.diagnostics.push(d);
            }
        }
    }

    fn statement(&mut self, idx: usize, stmt: &Statement) -> XResult<()> {
        match &stmt.kind {
            StatementKind::Model(spec) => self.enter_model(idx, spec, stmt.span),
            StatementKind::Line(decl) => self.declare_line(decl),
            StatementKind::Bundle(decl) => self.declare_bundle(decl),
            StatementKind::Let { name, value } => {
                let expr = self.substitute_lets(value);
                self.define(name, Symbol::Let(expr))
            }
            StatementKind::Query(q) => self.query(idx, stmt, q),
        }
    }

    fn define(&mut self, name: &Ident, sym: Symbol) -> XResult<()> {
        let same_scope = match self.symbols.get(&name.name) {
            Some(Symbol::Line(e)) => e.scope == self.scope,
            Some(Symbol::Bundle(e)) => e.scope == self.scope,
            Some(Symbol::Let(_)) | None => false,
        };
        if same_scope {
            return fail(name.span, format!("{} is already declared", name.name));
        }
        self.symbols.insert(name.name.clone(), sym);
        Ok(())
    }

    // ---- models ----

    fn enter_model(&mut self, idx: usize, spec: &ModelSpec, span: Span) -> XResult<()> {
        self.scope += 1;
        match spec {
            ModelSpec::Projective(n) => self.model = RingModel::projective_space(*n),
            ModelSpec::ProjectiveProduct(a, b) => self.model = RingModel::product(&[*a, *b]).map_err(at(span))?,
            ModelSpec::Grassmannian(k, n) => self.model = RingModel::grassmannian(*k, *n).map_err(at(span))?,
            ModelSpec::Universal(d) => return self.enter_universal(*d, idx + 1, span),
        }
        self.keyword = spec.keyword();
        Ok(())
    }

    /// The universal model gets fresh generators for every line and bundle
    /// declared without explicit classes before the next `model` statement.
    fn enter_universal(&mut self, degree: u32, from: usize, span: Span) -> XResult<()> {
        let mut bundles: Vec<(&str, u32)> = Vec::new();
        let mut lines: Vec<&str> = Vec::new();
        for stmt in &self.program.statements[from..] {
            match &stmt.kind {
                StatementKind::Model(_) => break,
                StatementKind::Bundle(b) if b.chern.is_none() && !bundles.iter().any(|(n, _)| *n == b.name.name) => {
                    bundles.push((&b.name.name, b.rank));
                }
                StatementKind::Line(l) if l.c1.is_none() && !lines.contains(&l.name.name.as_str()) => {
                    lines.push(&l.name.name);
                }
                _ => {}
            }
        }
        self.model = RingModel::universal(degree, universal_generators(&bundles, &lines)).map_err(at(span))?;
        self.keyword = "universal";
        Ok(())
    }

    fn is_universal(&self) -> bool {
        matches!(self.model.kind(), ModelKind::UniversalTruncated { .. })
    }

    fn declare_line(&mut self, decl: &LineDecl) -> XResult<()> {
        let bound = match &decl.c1 {
            Some(e) => {
                let c1 = self.eval(e)?;
                Some(LineBundle::new(&decl.name.name, c1, decl.gg).map_err(at(e.span()))?)
            }
            None if self.is_universal() => {
                Some(universal_line(&self.model, &decl.name.name, decl.gg).map_err(at(decl.name.span))?)
            }
            None => None,
        };
        let entry = LineEntry { gg: decl.gg, bound, scope: self.scope };
        self.define(&decl.name, Symbol::Line(entry))
    }

    fn declare_bundle(&mut self, decl: &BundleDecl) -> XResult<()> {
        if let Some(on) = &decl.on {
            if on.name != self.keyword {
                return fail(
                    on.span,
                    format!("bundle {} is declared on {} but the active model is {}", decl.name.name, on.name, self.model.id()),
                );
            }
        }
        let name = &decl.name.name;
        let bound = match &decl.chern {
            Some(list) => {
                let mut chern = Vec::with_capacity(decl.rank as usize);
                for e in list {
                    chern.push(self.eval(e)?);
                }
                chern.resize(decl.rank as usize, CycleClass::zero(&self.model));
                Some(FormalBundle::new(name.clone(), chern).map_err(at(decl.name.span))?)
            }
            None if self.is_universal() => {
                Some(FormalBundle::from_universal(&self.model, name, decl.rank).map_err(at(decl.name.span))?)
            }
            None => None,
        };
        let entry = BundleEntry {
            rank: decl.rank,
            gg: decl.gg,
            gg_twist: decl.gg_twist,
            bound: bound.map(|b| b.with_globally_generated(decl.gg)),
            scope: self.scope,
        };
        self.define(&decl.name, Symbol::Bundle(entry))
    }

    // ---- lookups ----

    fn bundle_entry(&self, id: &Ident) -> XResult<&BundleEntry> {
        match self.symbols.get(&id.name) {
            Some(Symbol::Bundle(b)) => Ok(b),
            _ => fail(id.span, format!("unknown bundle {}", id.name)),
        }
    }

    fn line_entry(&self, id: &Ident) -> XResult<&LineEntry> {
        match self.symbols.get(&id.name) {
            Some(Symbol::Line(l)) => Ok(l),
            _ => fail(id.span, format!("unknown line {}", id.name)),
        }
    }

    fn bound_line(&self, id: &Ident) -> XResult<LineBundle> {
        let entry = self.line_entry(id)?;
        match &entry.bound {
            Some(l) if entry.scope == self.scope => Ok(l.clone()),
            Some(_) => fail(id.span, format!("line {} belongs to an earlier model", id.name)),
            None => fail(
                id.span,
                format!("line {} has no first Chern class in {}; declare it with c1 = ...", id.name, self.model.id()),
            ),
        }
    }

    fn bound_bundle(&self, id: &Ident) -> XResult<FormalBundle> {
        match self.symbols.get(&id.name) {
            Some(Symbol::Bundle(entry)) => match &entry.bound {
                Some(b) if entry.scope == self.scope => Ok(b.clone()),
                Some(_) => fail(id.span, format!("bundle {} belongs to an earlier model", id.name)),
                None => fail(
                    id.span,
                    format!("bundle {} has no Chern classes in {}; declare it with chern = [...]", id.name, self.model.id()),
                ),
            },
            Some(Symbol::Line(_)) => Ok(FormalBundle::from_line(&self.bound_line(id)?)),
            _ => fail(id.span, format!("unknown bundle {}", id.name)),
        }
    }

    fn resolve_bundle(&self, b: &BundleRef) -> XResult<FormalBundle> {
        match b {
            BundleRef::Name(id) => self.bound_bundle(id),
            BundleRef::Twist(base, line, m) => {
                let base = self.resolve_bundle(base)?;
                let l = line_power(&self.bound_line(line)?, *m);
                tensor_line(&base, &l).map_err(at(line.span))
            }
            BundleRef::Dual(inner) => Ok(dual(&self.resolve_bundle(inner)?)),
            BundleRef::Sum(l, r) => {
                let (a, b) = (self.resolve_bundle(l)?, self.resolve_bundle(r)?);
                direct_sum(&a, &b).map_err(|e| Diagnostic::error(e.to_string(), bundle_span(l)))
            }
        }
    }

    fn substitute_lets(&self, e: &Expr) -> Expr {
        match e {
            Expr::Var(id) => match self.symbols.get(&id.name) {
                Some(Symbol::Let(bound)) => bound.clone(),
                _ => e.clone(),
            },
            Expr::Neg(inner, s) => Expr::Neg(Box::new(self.substitute_lets(inner)), *s),
            Expr::Pow(base, n, s) => Expr::Pow(Box::new(self.substitute_lets(base)), *n, *s),
            Expr::Binary { op, lhs, rhs, span } => Expr::Binary {
                op: *op,
                lhs: Box::new(self.substitute_lets(lhs)),
                rhs: Box::new(self.substitute_lets(rhs)),
                span: *span,
            },
            Expr::Num(..) | Expr::Chern { .. } | Expr::Schubert { .. } => e.clone(),
        }
    }

    // ---- evaluation in the active model ----

    fn eval(&self, e: &Expr) -> XResult<CycleClass> {
        let span = e.span();
        match e {
            Expr::Num(q, _) => Ok(CycleClass::constant(&self.model, q.clone())),
            Expr::Var(id) => match self.symbols.get(&id.name) {
                Some(Symbol::Let(bound)) => self.eval(bound),
                Some(Symbol::Line(_)) => Ok(self.bound_line(id)?.c1().clone()),
                Some(Symbol::Bundle(_)) => fail(id.span, format!("bundle {} is not a class; write cK({})", id.name, id.name)),
                None => match self.model.generator_index(&id.name) {
                    Some(_) => CycleClass::generator(&self.model, &id.name).map_err(at(span)),
                    None => fail(id.span, format!("unknown symbol {}", id.name)),
                },
            },
            Expr::Chern { k, bundle, .. } => Ok(self.resolve_bundle(bundle)?.chern_class(*k)),
            Expr::Schubert { partition, .. } => CycleClass::schubert(&self.model, partition).map_err(at(span)),
            Expr::Neg(inner, _) => Ok(self.eval(inner)?.neg()),
            Expr::Pow(base, n, _) => Ok(self.eval(base)?.pow(*n)),
            Expr::Binary { op, lhs, rhs, .. } => {
                let a = self.eval(lhs)?;
                match op {
                    BinOp::Add => a.add(&self.eval(rhs)?).map_err(at(span)),
                    BinOp::Sub => a.sub(&self.eval(rhs)?).map_err(at(span)),
                    BinOp::Mul => a.mul(&self.eval(rhs)?).map_err(at(span)),
                    BinOp::Div => {
                        let d = self.constant(rhs)?;
                        Ok(a.scale(&d.recip().map_err(at(rhs.span()))?))
                    }
                }
            }
        }
    }

    /// Divisors must be rational constants.
    fn constant(&self, e: &Expr) -> XResult<Rational> {
        let class = self.eval(e)?;
        if class.is_zero() {
            return fail(e.span(), "division by zero");
        }
        match class.homogeneous_degree() {
            Some(0) => Ok(class.terms()[0].1.clone()),
            _ => fail(e.span(), "can only divide by a constant"),
        }
    }

    // ---- translation for the root oracle ----

    fn oracle_expr(&self, e: &Expr, ctx: &mut OracleSymbols) -> XResult<ChernExpr> {
        let span = e.span();
        Ok(match e {
            Expr::Num(q, _) => ChernExpr::constant(q.clone()),
            Expr::Var(id) => match self.symbols.get(&id.name) {
                Some(Symbol::Let(bound)) => self.oracle_expr(bound, ctx)?,
                Some(Symbol::Line(_)) => {
                    ctx.line(&id.name);
                    ChernExpr::line_c1(&id.name, 1)
                }
                _ => {
                    return fail(
                        id.span,
                        format!("oracle expressions use Chern classes of declared bundles and lines; {} is not one", id.name),
                    )
                }
            },
            Expr::Chern { k, bundle, .. } => ChernExpr::c(self.oracle_bundle(bundle, ctx)?, *k),
            Expr::Schubert { .. } => return fail(span, "Schubert classes cannot be expanded in Chern roots"),
            Expr::Neg(inner, _) => ChernExpr::Neg(Box::new(self.oracle_expr(inner, ctx)?)),
            Expr::Pow(base, n, _) => self.oracle_expr(base, ctx)?.pow(*n),
            Expr::Binary { op, lhs, rhs, .. } => {
                let a = self.oracle_expr(lhs, ctx)?;
                match op {
                    BinOp::Add => ChernExpr::Add(vec![a, self.oracle_expr(rhs, ctx)?]),
                    BinOp::Sub => ChernExpr::Add(vec![a, ChernExpr::Neg(Box::new(self.oracle_expr(rhs, ctx)?))]),
                    BinOp::Mul => ChernExpr::Mul(vec![a, self.oracle_expr(rhs, ctx)?]),
                    BinOp::Div => {
                        let d = const_value(rhs).ok_or_else(|| Diagnostic::error("can only divide by a constant", rhs.span()))?;
                        a.scaled(d.recip().map_err(at(rhs.span()))?)
                    }
                }
            }
        })
    }

    fn oracle_bundle(&self, b: &BundleRef, ctx: &mut OracleSymbols) -> XResult<BundleExpr> {
        Ok(match b {
            BundleRef::Name(id) => match self.symbols.get(&id.name) {
                Some(Symbol::Bundle(entry)) => {
                    ctx.bundle(&id.name, entry.rank);
                    BundleExpr::bundle(&id.name)
                }
                Some(Symbol::Line(_)) => {
                    ctx.line(&id.name);
                    BundleExpr::Line(id.name.clone(), 1)
                }
                _ => return fail(id.span, format!("unknown bundle {}", id.name)),
            },
            BundleRef::Twist(base, line, m) => {
                self.line_entry(line)?;
                let base = self.oracle_bundle(base, ctx)?;
                ctx.line(&line.name);
                base.twist(&line.name, *m)
            }
            BundleRef::Dual(inner) => self.oracle_bundle(inner, ctx)?.dual(),
            BundleRef::Sum(l, r) => self.oracle_bundle(l, ctx)?.sum(self.oracle_bundle(r, ctx)?),
        })
    }

    // ---- lci provenance for `express` generators ----

    fn symbol_is_lci(&self, id: &Ident) -> bool {
        match self.symbols.get(&id.name) {
            Some(Symbol::Let(bound)) => self.expr_is_lci(bound),
            Some(Symbol::Line(l)) => l.gg,
            Some(Symbol::Bundle(_)) => false,
            None => match self.model.kind() {
                // hyperplane sections
                ModelKind::ProjectiveSpace { .. } | ModelKind::ProductOfProjectiveSpaces { .. } => true,
                // σ_1 is a Plücker hyperplane section; σ_{n-k} = c_top(Q) with Q generated
                ModelKind::Grassmannian { k, n } => id.name == "s1" || id.name == format!("s{}", n - k),
                ModelKind::UniversalTruncated { .. } => false,
            },
        }
    }

    fn expr_is_lci(&self, e: &Expr) -> bool {
        match e {
            Expr::Var(id) => self.symbol_is_lci(id),
            Expr::Chern { k, bundle, .. } => match self.resolve_bundle(bundle) {
                Ok(b) => *k == b.rank() && top_chern(&b).provenance.is_some(),
                Err(_) => false,
            },
            _ => false,
        }
    }

    // ---- queries ----

    fn query(&mut self, idx: usize, stmt: &Statement, q: &Query) -> XResult<()> {
        let source = pretty::statement(&stmt.kind);
        match q {
            Query::CertifyTop { bundle, line } | Query::CertifyXi { bundle, line, .. } => {
                let entry = self.bundle_entry(bundle)?.clone();
                let l = self.line_entry(line)?.clone();
                let cert = match q {
                    Query::CertifyXi { index, .. } => certify_xi(entry.rank, *index).map_err(at(stmt.span))?,
                    _ => certify_top(entry.rank).map_err(at(stmt.span))?,
                };
                let mut asserted = Vec::new();
                if l.gg {
                    asserted.push(ASSUME_LINE_GENERATED.to_string());
                }
                if entry.gg_twist || (entry.gg && l.gg) {
                    asserted.push(ASSUME_TWIST_GENERATED.to_string());
                }
                let cert = cert.with_assumptions(asserted);
                self.report_certificate(idx, source, cert, &entry, &l, bundle, line)
            }
            Query::Ch { bundle, upto } => {
                let b = self.bound_bundle(bundle)?;
                let value = chern_character(&b, *upto).map_err(at(stmt.span))?;
                self.result(idx, source, Status::Info, vec![value.to_string()], json!({
                    "kind": "ch",
                    "bundle": bundle.name,
                    "upto": upto,
                    "value": value.to_string(),
                }));
                Ok(())
            }
            Query::Expand(e) => {
                let value = self.eval(e)?;
                self.result(idx, source, Status::Info, vec![value.to_string()], json!({
                    "kind": "expand",
                    "expr": pretty::expr(e),
                    "value": value.to_string(),
                }));
                Ok(())
            }
            Query::Oracle(lhs, rhs) => {
                let mut syms = OracleSymbols::default();
                let l = self.oracle_expr(lhs, &mut syms)?;
                let r = self.oracle_expr(rhs, &mut syms)?;
                let out = oracle_check(&syms.context(), &l, &r).map_err(at(stmt.span))?;
                let mut body = vec![format!("holds: {}", out.holds)];
                body.extend(out.report.lines().map(str::to_string));
                let mut v = json!({
                    "kind": "oracle",
                    "lhs": pretty::expr(lhs),
                    "rhs": pretty::expr(rhs),
                    "holds": out.holds,
                });
                if !out.holds {
                    v["report"] = Value::String(out.report.clone());
                    self.report.failed_verifications += 1;
                }
                self.result(idx, source, pass_fail(out.holds), body, v);
                Ok(())
            }
            Query::Kleiman { d, i } => {
                let verdict = kleiman_smooth_bound(*d, *i).map_err(at(stmt.span))?;
                self.check(idx, source, Status::Info, vec![verdict.to_string()], json!({
                    "name": "kleiman",
                    "inputs": {"d": d, "i": i},
                    "verdict": verdict,
                }));
                Ok(())
            }
            Query::Syzygy(s) => self.syzygy(idx, source, stmt.span, s),
            Query::Express { target, generators } => self.express(idx, source, target, generators),
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn report_certificate(
        &mut self,
        idx: usize,
        source: String,
        mut cert: Certificate,
        entry: &BundleEntry,
        line: &LineEntry,
        bundle_id: &Ident,
        line_id: &Ident,
    ) -> XResult<()> {
        let lci = lci_flags_report(&cert);
        let mut body = vec![cert.to_string()];
        let mut extra = Map::new();
        let mut status = Status::Info;
        if self.opts.verify {
            let span = bundle_id.span;
            let mut runs = vec![verify_universal(&cert).map_err(at(span))?];
            let active = (entry.scope == self.scope && line.scope == self.scope)
                .then(|| entry.bound.clone().zip(line.bound.clone()))
                .flatten();
            if let Some((e, l)) = active {
                let e = e.with_twist_generated_by(entry.gg_twist.then(|| line_id.name.clone()));
                runs.push(verify_certificate(&cert, &e, &l, &self.model).map_err(at(span))?);
            }
            let oracle = oracle_verify(&cert).map_err(at(span))?;
            let verified = runs.iter().all(|v| v.verified) && oracle.holds;
            for v in runs.iter().filter(|v| v.verified) {
                cert.mark_verified(v.model_id.clone());
            }
            let mut models: Vec<String> = Vec::new();
            for v in &runs {
                if !models.contains(&v.model_id) {
                    models.push(v.model_id.clone());
                }
            }
            body.push(format!("verified: {verified} ({}; oracle {})", models.join(", "), if oracle.holds { "ok" } else { "fails" }));
            extra.insert("verified".into(), Value::Bool(verified));
            extra.insert("oracle".into(), Value::Bool(oracle.holds));
            extra.insert(
                "verifications".into(),
                Value::Array(
                    runs.iter()
                        .map(|v| json!({"model": v.model_id, "verified": v.verified, "residual": v.residual.to_string()}))
                        .collect(),
                ),
            );
            if let Some(bad) = runs.iter().find(|v| !v.verified) {
                extra.insert("residual".into(), Value::String(bad.residual.to_string()));
                body.push(format!("residual in {}: {}", bad.model_id, bad.residual));
            }
            if !verified {
                self.report.failed_verifications += 1;
            }
            status = pass_fail(verified);
        }
        body.push(if lci.conditional {
            format!("lci: conditional (missing: {})", lci.missing.join(", "))
        } else {
            "lci: unconditional".to_string()
        });
        let mut v = serde_json::to_value(&cert).expect("serializable");
        let obj = v.as_object_mut().expect("certificate is an object");
        obj.insert("kind".into(), "certificate".into());
        obj.insert("bundle".into(), bundle_id.name.clone().into());
        obj.insert("line".into(), line_id.name.clone().into());
        obj.insert("lci".into(), serde_json::to_value(&lci).expect("serializable"));
        obj.extend(extra);
        self.result(idx, source, status, body, v);
        Ok(())
    }

    fn syzygy(&mut self, idx: usize, source: String, span: Span, s: &SyzygyQuery) -> XResult<()> {
        let bundle = self.bound_bundle(&s.bundle)?;
        let z = self.eval(&s.z)?;
        let hyperplane = match &s.hyperplane {
            Some(h) => self.eval(h)?,
            None => match self.model.hyperplane() {
                Some(h) => h,
                None => return fail(span, format!("{} has no hyperplane class; pass h=...", self.model.id())),
            },
        };
        let h_text = hyperplane.to_string();
        let inst = SyzygyInstance { hyperplane, z, bundle, n: s.n, sign: s.sign, p: s.p };
        let out = verify_syzygy_identity(&inst).map_err(at(s.z.span()))?;
        if !out.holds {
            self.report.failed_verifications += 1;
        }
        let mut body = vec![format!("holds: {}", out.holds)];
        if !out.holds {
            body.push(format!("residual: {}", out.residual));
        }
        self.check(idx, source, pass_fail(out.holds), body, json!({
            "name": "syzygy",
            "inputs": {
                "bundle": s.bundle.name,
                "p": s.p,
                "n": s.n,
                "sign": s.sign.to_string(),
                "z": pretty::expr(&s.z),
                "h": h_text,
            },
            "verdict": out.holds,
            "residual": out.residual.to_string(),
        }));
        Ok(())
    }

    fn express(&mut self, idx: usize, source: String, target: &Expr, gens: &[Ident]) -> XResult<()> {
        let goal = self.eval(target)?;
        let mut generators = Vec::with_capacity(gens.len());
        for g in gens {
            let class = self.eval(&Expr::Var(g.clone()))?;
            generators.push(SubalgebraGenerator::new(g.name.clone(), class, self.symbol_is_lci(g)));
        }
        let top = self.model.top_degree();
        let bound = self.opts.max_degree.unwrap_or(top).min(top);
        let outcome = express_in_subalgebra(&goal, &generators, bound).map_err(at(target.span()))?;
        let inputs = json!({
            "target": pretty::expr(target),
            "generators": generators.iter().map(|g| json!({"name": g.name, "lci": g.lci})).collect::<Vec<_>>(),
            "max_degree": bound,
        });
        let (body, v) = match outcome {
            Membership::Represented(rep) => {
                let coefficients: Vec<Value> = rep
                    .terms
                    .iter()
                    .map(|(c, exps)| {
                        let monomial: Map<String, Value> = rep
                            .generator_names
                            .iter()
                            .zip(exps)
                            .filter(|(_, &e)| e > 0)
                            .map(|(n, &e)| (n.clone(), Value::from(e)))
                            .collect();
                        json!({"coeff": c.to_string(), "monomial": monomial})
                    })
                    .collect();
                let text = rep.to_string();
                (
                    vec![format!("{} = {text}", pretty::expr(target)), format!("all generators used are lci: {}", rep.all_lci)],
                    json!({
                        "name": "express",
                        "inputs": inputs,
                        "verdict": true,
                        "coefficients": coefficients,
                        "expression": text,
                        "all_lci": rep.all_lci,
                    }),
                )
            }
            Membership::NotRepresentable { reason } => (
                vec![format!("not representable: {reason}")],
                json!({"name": "express", "inputs": inputs, "verdict": false, "reason": reason}),
            ),
        };
        self.check(idx, source, Status::Info, body, v);
        Ok(())
    }

    fn push_line(&mut self, idx: usize, source: String, status: Status, body: Vec<String>) {
        self.report.lines.push(ReportLine { statement: idx, source, body, status });
    }

    fn result(&mut self, idx: usize, source: String, status: Status, body: Vec<String>, mut v: Value) {
        v["statement"] = Value::from(idx);
        self.report.results.push(v);
        self.push_line(idx, source, status, body);
    }

    fn check(&mut self, idx: usize, source: String, status: Status, body: Vec<String>, mut v: Value) {
        v["statement"] = Value::from(idx);
        self.report.checks.push(v);
        self.push_line(idx, source, status, body);
    }
}

fn pass_fail(ok: bool) -> Status {
    if ok { Status::Pass } else { Status::Fail }
}

fn bundle_span(b: &BundleRef) -> Span {
    match b {
        BundleRef::Name(id) => id.span,
        BundleRef::Twist(base, ..) | BundleRef::Dual(base) | BundleRef::Sum(base, _) => bundle_span(base),
    }
}

fn const_value(e: &Expr) -> Option<Rational> {
    match e {
        Expr::Num(q, _) => Some(q.clone()),
        Expr::Neg(inner, _) => Some(-const_value(inner)?),
        Expr::Pow(base, n, _) => Some(const_value(base)?.pow(*n)),
        Expr::Binary { op, lhs, rhs, .. } => {
            let (a, b) = (const_value(lhs)?, const_value(rhs)?);
            match op {
                BinOp::Add => Some(a + b),
                BinOp::Sub => Some(a - b),
                BinOp::Mul => Some(a * b),
                BinOp::Div => a.checked_div(&b).ok(),
            }
        }
        _ => None,
    }
}

/// Bundles and lines mentioned by an oracle query, in first-use order.
#[derive(Default)]
struct OracleSymbols {
    bundles: Vec<(String, u32)>,
    lines: Vec<String>,
}

impl OracleSymbols {
    fn bundle(&mut self, name: &str, rank: u32) {
        if !self.bundles.iter().any(|(n, _)| n == name) {
            self.bundles.push((name.to_string(), rank));
        }
    }

    fn line(&mut self, name: &str) {
        if !self.lines.iter().any(|n| n == name) {
            self.lines.push(name.to_string());
        }
    }

    fn context(&self) -> OracleContext {
        let mut ctx = OracleContext::new();
        for (b, r) in &self.bundles {
            ctx = ctx.bundle(b.clone(), *r);
        }
        for l in &self.lines {
            ctx = ctx.line(l.clone());
        }
        ctx
    }
}
