use crate::arith::Rational;
use crate::checks::Sign;

use super::Span;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ident {
    pub name: String,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Program {
    pub statements: Vec<Statement>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Statement {
    pub kind: StatementKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelSpec {
    Projective(u32),
    ProjectiveProduct(u32, u32),
    Grassmannian(u32, u32),
    Universal(u32),
}

impl ModelSpec {
    /// The keyword used in `model` statements and `on` clauses.
    pub fn keyword(&self) -> &'static str {
        match self {
            ModelSpec::Projective(_) => "P",
            ModelSpec::ProjectiveProduct(..) => "PxP",
            ModelSpec::Grassmannian(..) => "G",
            ModelSpec::Universal(_) => "universal",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineDecl {
    pub name: Ident,
    pub gg: bool,
    pub c1: Option<Expr>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BundleDecl {
    pub name: Ident,
    pub rank: u32,
    pub gg: bool,
    pub gg_twist: bool,
    pub on: Option<Ident>,
    pub chern: Option<Vec<Expr>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StatementKind {
    Model(ModelSpec),
    Line(LineDecl),
    Bundle(BundleDecl),
    Let { name: Ident, value: Expr },
    Query(Query),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyzygyQuery {
    pub bundle: Ident,
    pub p: u32,
    pub n: i64,
    pub sign: Sign,
    pub z: Expr,
    pub hyperplane: Option<Expr>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Query {
    CertifyTop { bundle: Ident, line: Ident },
    CertifyXi { bundle: Ident, line: Ident, index: u32 },
    Ch { bundle: Ident, upto: u32 },
    Expand(Expr),
    Oracle(Expr, Expr),
    Kleiman { d: u32, i: u32 },
    Syzygy(SyzygyQuery),
    Express { target: Expr, generators: Vec<Ident> },
}

impl Query {
    pub fn keyword(&self) -> &'static str {
        match self {
            Query::CertifyTop { .. } => "certify_top",
            Query::CertifyXi { .. } => "certify_xi",
            Query::Ch { .. } => "ch",
            Query::Expand(_) => "expand",
            Query::Oracle(..) => "oracle",
            Query::Kleiman { .. } => "kleiman",
            Query::Syzygy(_) => "syzygy",
            Query::Express { .. } => "express",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Num(Rational, Span),
    Var(Ident),
    /// `cK(bundle)`.
    Chern { k: u32, bundle: BundleRef, span: Span },
    /// `s[λ1,...]`, a Schubert class.
    Schubert { partition: Vec<u32>, span: Span },
    Neg(Box<Expr>, Span),
    Binary { op: BinOp, lhs: Box<Expr>, rhs: Box<Expr>, span: Span },
    Pow(Box<Expr>, u32, Span),
}

impl Expr {
    pub fn span(&self) -> Span {
        match self {
            Expr::Num(_, s) | Expr::Neg(_, s) | Expr::Pow(_, _, s) => *s,
            Expr::Var(id) => id.span,
            Expr::Chern { span, .. } | Expr::Schubert { span, .. } | Expr::Binary { span, .. } => *span,
        }
    }
}

/// Bundle expressions inside `cK(...)`: names, `B*L^m` twists, `dual(B)`
/// and Whitney sums `B + B`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BundleRef {
    Name(Ident),
    Twist(Box<BundleRef>, Ident, i64),
    Dual(Box<BundleRef>),
    Sum(Box<BundleRef>, Box<BundleRef>),
}
