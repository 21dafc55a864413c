//! Canonical source rendering. Parsing the output yields the same program.

use std::fmt::Write;

use super::ast::*;

pub fn pretty(program: &Program) -> String {
    let mut out = String::new();
    for s in &program.statements {
        out.push_str(&statement(&s.kind));
        out.push('\n');
    }
    out
}

pub fn statement(kind: &StatementKind) -> String {
    let body = match kind {
        StatementKind::Model(m) => format!(
            "model {}",
            match m {
                ModelSpec::Projective(n) => format!("P({n})"),
                ModelSpec::ProjectiveProduct(a, b) => format!("PxP({a}, {b})"),
                ModelSpec::Grassmannian(k, n) => format!("G({k}, {n})"),
                ModelSpec::Universal(d) => format!("universal({d})"),
            }
        ),
        StatementKind::Line(l) => {
            let mut s = format!("line {}", l.name.name);
            if l.gg {
                s.push_str(" gg");
            }
            if let Some(c1) = &l.c1 {
                write!(s, " c1 = {}", expr(c1)).unwrap();
            }
            s
        }
        StatementKind::Bundle(b) => {
            let mut s = format!("bundle {} rank {}", b.name.name, b.rank);
            if b.gg {
                s.push_str(" gg");
            }
            if b.gg_twist {
                s.push_str(" gg_twist");
            }
            if let Some(on) = &b.on {
                write!(s, " on {}", on.name).unwrap();
            }
            if let Some(chern) = &b.chern {
                let list: Vec<String> = chern.iter().map(expr).collect();
                write!(s, " chern = [{}]", list.join(", ")).unwrap();
            }
            s
        }
        StatementKind::Let { name, value } => format!("let {} = {}", name.name, expr(value)),
        StatementKind::Query(q) => query(q),
    };
    body + ";"
}

fn query(q: &Query) -> String {
    match q {
        Query::CertifyTop { bundle, line } => format!("certify_top {} {}", bundle.name, line.name),
        Query::CertifyXi { bundle, line, index } => format!("certify_xi {} {} {index}", bundle.name, line.name),
        Query::Ch { bundle, upto } => format!("ch {} upto {upto}", bundle.name),
        Query::Expand(e) => format!("expand {}", expr(e)),
        Query::Oracle(l, r) => format!("oracle {} == {}", expr(l), expr(r)),
        Query::Kleiman { d, i } => format!("kleiman d={d} i={i}"),
        Query::Syzygy(s) => {
            let mut out = format!("syzygy {} p={} n={} sign={} z={}", s.bundle.name, s.p, s.n, s.sign, expr(&s.z));
            if let Some(h) = &s.hyperplane {
                write!(out, " h={}", expr(h)).unwrap();
            }
            out
        }
        Query::Express { target, generators } => {
            let names: Vec<&str> = generators.iter().map(|g| g.name.as_str()).collect();
            format!("express {} in [{}]", expr(target), names.join(", "))
        }
    }
}

// Binding strength: sums 1, products 2, negation 3, powers 4, atoms 5.
fn level(e: &Expr) -> u8 {
    match e {
        Expr::Binary { op: BinOp::Add | BinOp::Sub, .. } => 1,
        Expr::Binary { .. } => 2,
        Expr::Neg(..) => 3,
        Expr::Pow(..) => 4,
        _ => 5,
    }
}

fn wrap(e: &Expr, min: u8) -> String {
    if level(e) < min {
        format!("({})", expr(e))
    } else {
        expr(e)
    }
}

pub fn expr(e: &Expr) -> String {
    match e {
        Expr::Num(q, _) => q.to_string(),
        Expr::Var(id) => id.name.clone(),
        Expr::Chern { k, bundle: b, .. } => format!("c{k}({})", bundle(b)),
        Expr::Schubert { partition, .. } => {
            let parts: Vec<String> = partition.iter().map(u32::to_string).collect();
            format!("s[{}]", parts.join(","))
        }
        Expr::Neg(inner, _) => format!("-{}", wrap(inner, 3)),
        Expr::Pow(base, n, _) => format!("{}^{n}", wrap(base, 5)),
        Expr::Binary { op, lhs, rhs, .. } => match op {
            BinOp::Add => format!("{} + {}", wrap(lhs, 1), wrap(rhs, 2)),
            BinOp::Sub => format!("{} - {}", wrap(lhs, 1), wrap(rhs, 2)),
            BinOp::Mul => format!("{}*{}", wrap(lhs, 2), wrap(rhs, 3)),
            BinOp::Div => format!("{}/{}", wrap(lhs, 2), wrap(rhs, 3)),
        },
    }
}

pub fn bundle(b: &BundleRef) -> String {
    match b {
        BundleRef::Name(id) => id.name.clone(),
        BundleRef::Twist(base, line, m) => {
            let base = match **base {
                BundleRef::Sum(..) => format!("({})", bundle(base)),
                _ => bundle(base),
            };
            if *m == 1 {
                format!("{base}*{}", line.name)
            } else {
                format!("{base}*{}^{m}", line.name)
            }
        }
        BundleRef::Dual(inner) => format!("dual({})", bundle(inner)),
        BundleRef::Sum(l, r) => {
            let r = match **r {
                BundleRef::Sum(..) => format!("({})", bundle(r)),
                _ => bundle(r),
            };
            format!("{} + {r}", bundle(l))
        }
    }
}
