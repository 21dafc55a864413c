//! Invariant suites run by `chernforge selftest`.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arith::{vandermonde_matrix, Matrix, Rational};
use crate::cert::{certify_top, certify_xi, oracle_verify, target_class, verify_universal, Target};
use crate::checks::{
    express_in_subalgebra, kleiman_smooth_bound, verify_syzygy_identity, Membership, Sign, SubalgebraGenerator,
    SyzygyInstance,
};
use crate::chern::{chern_character, direct_sum, line_power, tensor_line, universal_line, FormalBundle, LineBundle};
use crate::oracle::{expand_in_roots, to_elementary, BundleExpr, ChernExpr, OracleContext};
use crate::ring::{CycleClass, RingModel};

pub const DEFAULT_SEED: u64 = 0x5eed_c4e7;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteResult {
    pub id: u8,
    pub name: &'static str,
    pub cases: usize,
    pub failures: Vec<String>,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

impl fmt::Display for SuiteResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        write!(f, "suite {} {}: {verdict} ({} cases)", self.id, self.name, self.cases)?;
        for msg in self.failures.iter().take(5) {
            write!(f, "\n    {msg}")?;
        }
        Ok(())
    }
}

struct Suite {
    cases: usize,
    failures: Vec<String>,
}

impl Suite {
    fn check(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failures.push(msg());
        }
    }

    /// Records an unexpected error as a failure.
    fn attempt<T, E: fmt::Display>(&mut self, r: Result<T, E>, what: &str) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.cases += 1;
                self.failures.push(format!("{what}: {e}"));
                None
            }
        }
    }
}

pub const SUITES: [(u8, &str); 7] = [
    (1, "vandermonde"),
    (2, "xi certificates"),
    (3, "top Chern certificates"),
    (4, "twist formula vs roots"),
    (5, "chern character"),
    (6, "ring models"),
    (7, "reduction checks"),
];

pub fn run_suite(id: u8, seed: u64) -> SuiteResult {
    let mut s = Suite { cases: 0, failures: Vec::new() };
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ id as u64);
    match id {
        1 => vandermonde(&mut s),
        2 => xi_certificates(&mut s),
        3 => top_certificates(&mut s),
        4 => twist_formula(&mut s),
        5 => character(&mut s, &mut rng),
        6 => ring_models(&mut s),
        7 => reduction(&mut s, &mut rng),
        _ => s.failures.push(format!("no suite {id}")),
    }
    let name = SUITES.iter().find(|(i, _)| *i == id).map_or("unknown", |(_, n)| n);
    SuiteResult { id, name, cases: s.cases, failures: s.failures }
}

pub fn run_all(seed: u64) -> Vec<SuiteResult> {
    SUITES.iter().map(|(id, _)| run_suite(*id, seed)).collect()
}

fn q(n: i64) -> Rational {
    Rational::from(n)
}

fn vandermonde(s: &mut Suite) {
    let expected = Matrix::from_rows(vec![
        vec![q(1), q(0), q(0)],
        vec![q(1), q(1), q(1)],
        vec![q(1), q(2), q(4)],
    ])
    .expect("3x3");
    s.check(vandermonde_matrix(2) == expected, || "V(2) differs from [[1,0,0],[1,1,1],[1,2,4]]".into());
    for r in 0..=8usize {
        let det = vandermonde_matrix(r).determinant();
        let product: Rational = (0..=r as i64)
            .flat_map(|j| (0..j).map(move |i| q(j - i)))
            .product();
        s.check(det.as_ref().is_ok_and(|d| !d.is_zero() && *d == product), || format!("det V({r}) = {det:?}"));
    }
}

fn xi_certificates(s: &mut Suite) {
    for r in 1..=4u32 {
        for i in 0..=r {
            let Some(cert) = s.attempt(certify_xi(r, i), "certify_xi") else { continue };
            let v = s.attempt(verify_universal(&cert), "verify");
            s.check(v.is_some_and(|v| v.verified), || format!("x_{i} for rank {r} fails in universal({r})"));
            let o = s.attempt(oracle_verify(&cert), "oracle");
            s.check(o.is_some_and(|o| o.holds), || format!("x_{i} for rank {r} fails the root oracle"));
        }
        if let Ok(c) = certify_xi(r, 0) {
            let atoms: Vec<(Rational, u32)> = c.atoms.iter().map(|(c, a)| (c.clone(), a.k)).collect();
            s.check(atoms == vec![(q(1), 1)], || format!("x_0 for rank {r} is {atoms:?}"));
        }
        // x_r is c_1(L)^r
        let ctx = OracleContext::new().bundle("E", r).line("L");
        if let Some(model) = s.attempt(ctx.universal_model(r), "model") {
            let e = FormalBundle::from_universal(&model, "E", r).expect("generators exist");
            let l = universal_line(&model, "L", true).expect("generator exists");
            let x = target_class(Target::Xi(r), &e, &l);
            s.check(x.is_ok_and(|x| x == l.c1().pow(r)), || format!("x_{r} is not c_1(L)^{r}"));
        }
    }
}

fn top_certificates(s: &mut Suite) {
    for r in 1..=6u32 {
        let Some(cert) = s.attempt(certify_top(r), "certify_top") else { continue };
        for m in 0..=r {
            let sign = if m % 2 == 0 { 1 } else { -1 };
            let want = Rational::binomial(r as i64 + 1, m as i64 + 1) * q(sign);
            s.check(cert.coeff(m + 1) == want, || format!("rank {r}: coefficient of k={} is {}", m + 1, cert.coeff(m + 1)));
        }
        if r <= 4 {
            let o = s.attempt(oracle_verify(&cert), "oracle");
            s.check(o.is_some_and(|o| o.holds), || format!("c_top certificate for rank {r} fails the root oracle"));
            let v = s.attempt(verify_universal(&cert), "verify");
            s.check(v.is_some_and(|v| v.verified), || format!("c_top certificate for rank {r} fails in universal({r})"));
        }
    }
    let ok = certify_top(1).is_ok_and(|c| c.coeff(1) == q(2) && c.coeff(2) == q(-1) && c.atoms.len() == 2);
    s.check(ok, || "rank 1 is not 2c_1(E⊗L) - c_1(E⊗L^2)".into());
}

fn twist_formula(s: &mut Suite) {
    for r in 1..=4u32 {
        let ctx = OracleContext::new().bundle("E", r).line("L");
        let Some(model) = s.attempt(ctx.universal_model(r), "model") else { continue };
        let e = FormalBundle::from_universal(&model, "E", r).expect("generators exist");
        let l = universal_line(&model, "L", true).expect("generator exists");
        let base = tensor_line(&e, &l).expect("same model");
        for m in -1..=r as i64 {
            let twisted = tensor_line(&e, &line_power(&l, m)).expect("same model");
            for k in 0..=r {
                let expr = ChernExpr::c(BundleExpr::bundle("E").twist("L", m), k);
                let via_roots = expand_in_roots(&ctx, &expr)
                    .map_err(|e| e.to_string())
                    .and_then(|p| to_elementary(&ctx, &p).map_err(|e| e.to_string()))
                    .and_then(|el| el.to_class(&ctx, &model).map_err(|e| e.to_string()));
                s.check(via_roots.as_ref() == Ok(&twisted.chern_class(k)), || {
                    format!("c_{k}(E⊗L^{m}) for rank {r}: twist formula and roots disagree")
                });
            }
            // c_r((E⊗L)⊗L^m) = Σ m^i x_i
            if m >= 0 {
                let mut sum = CycleClass::zero(&model);
                for i in 0..=r {
                    let xi = l.c1().pow(i).mul(&base.chern_class(r - i)).expect("same model");
                    sum = sum.add(&xi.scale(&q(m).pow(i))).expect("same model");
                }
                let lhs = tensor_line(&base, &line_power(&l, m)).expect("same model").chern_class(r);
                s.check(lhs == sum, || format!("regrouping fails for rank {r}, m={m}"));
            }
        }
    }
}

const CH_DEGREE: u32 = 6;

fn random_class(model: &Arc<RingModel>, degree: u32, rng: &mut ChaCha8Rng) -> CycleClass {
    // generators x1, x2 of degree 1 and y of degree 2
    let mut out = CycleClass::zero(model);
    for b in 0..=degree / 2 {
        for a1 in 0..=degree - 2 * b {
            let a2 = degree - 2 * b - a1;
            let c = Rational::new(rng.gen_range(-4..=4), rng.gen_range(1..=3));
            let term = CycleClass::monomial(model, &[a1, a2, b], c).expect("three generators");
            out = out.add(&term).expect("same model");
        }
    }
    out
}

fn random_bundle(model: &Arc<RingModel>, name: &str, rng: &mut ChaCha8Rng) -> FormalBundle {
    let rank = rng.gen_range(1..=3u32);
    let chern = (1..=rank).map(|i| random_class(model, i, rng)).collect();
    FormalBundle::new(name, chern).expect("homogeneous classes")
}

fn character(s: &mut Suite, rng: &mut ChaCha8Rng) {
    let model = RingModel::universal(CH_DEGREE, [("x1", 1), ("x2", 1), ("y", 2)]).expect("valid generators");
    for trial in 0..25 {
        let e = random_bundle(&model, "E", rng);
        let f = random_bundle(&model, "F", rng);
        let l = LineBundle::new("L", random_class(&model, 1, rng), false).expect("degree one");
        let ch = |b: &FormalBundle| chern_character(b, CH_DEGREE).expect("same model");
        let sum = direct_sum(&e, &f).expect("same model");
        let additive = ch(&e).add(&ch(&f)).expect("same model");
        s.check(ch(&sum) == additive, || format!("trial {trial}: ch(E+F) != ch(E) + ch(F)"));
        let twisted = tensor_line(&e, &l).expect("same model");
        let product = ch(&e).mul(&ch(&FormalBundle::from_line(&l))).expect("same model");
        s.check(ch(&twisted) == product, || format!("trial {trial}: ch(E⊗L) != ch(E)ch(L)"));
    }
}

/// Partitions inside the `rows × cols` box.
fn box_partitions(rows: u32, cols: u32) -> Vec<Vec<u32>> {
    fn rec(rows: u32, max: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        out.push(cur.clone());
        if cur.len() as u32 == rows {
            return;
        }
        for p in 1..=max {
            cur.push(p);
            rec(rows, p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(rows, cols, &mut Vec::new(), &mut out);
    out
}

fn ring_models(s: &mut Suite) {
    for n in 1..=10u32 {
        let pn = RingModel::projective_space(n);
        let h = CycleClass::generator(&pn, "H").expect("H exists");
        s.check(h.pow(n + 1).is_zero() && !h.pow(n).is_zero(), || format!("H^{} in P^{n}", n + 1));
    }
    for total in 1..=10u32 {
        for m in 0..=total {
            let n = total - m;
            let Some(pp) = s.attempt(RingModel::product(&[m.max(1), n.max(1)]), "product") else { continue };
            let h1 = CycleClass::generator(&pp, "H1").expect("H1 exists");
            let h2 = CycleClass::generator(&pp, "H2").expect("H2 exists");
            let power = h1.add(&h2).expect("same model").pow(total);
            let want = Rational::binomial(total as i64, m as i64);
            s.check(power.coeff(&[m, n]) == want, || format!("coefficient of H1^{m}H2^{n}"));
        }
    }
    let g24 = RingModel::grassmannian(2, 4).expect("valid");
    let sigma = |m: &Arc<RingModel>, p: &[u32]| CycleClass::schubert(m, p).expect("in box");
    let s1 = sigma(&g24, &[1]);
    s.check(s1.pow(4) == sigma(&g24, &[2, 2]).scale(&q(2)), || "σ1^4 != 2σ(2,2) in G(2,4)".into());
    let square = s1.mul(&s1).expect("same model");
    let want = sigma(&g24, &[2]).add(&sigma(&g24, &[1, 1])).expect("same model");
    s.check(square == want, || "σ1^2 != σ2 + σ(1,1)".into());
    for (k, n) in [(2u32, 4u32), (2, 5)] {
        let g = RingModel::grassmannian(k, n).expect("valid");
        let parts = box_partitions(k, n - k);
        for a in &parts {
            for b in &parts {
                let prod = sigma(&g, a).mul(&sigma(&g, b));
                let ok = prod.as_ref().is_ok_and(|p| {
                    p.terms().iter().all(|(_, c)| c.is_integer() && !c.is_negative())
                });
                s.check(ok, || format!("G({k},{n}): σ{a:?}·σ{b:?} has a bad structure constant"));
            }
        }
    }
}

fn reduction(s: &mut Suite, rng: &mut ChaCha8Rng) {
    for d in 0..=12u32 {
        for i in 0..=d {
            // i < (d+2)/2  ⇔  2i < d+2
            let want = 2 * i < d + 2;
            s.check(kleiman_smooth_bound(d, i) == Ok(want), || format!("kleiman d={d} i={i}"));
        }
    }

    for trial in 0..20 {
        let dim = rng.gen_range(2..=6u32);
        let pn = RingModel::projective_space(dim);
        let h = CycleClass::generator(&pn, "H").expect("H exists");
        let p = rng.gen_range(1..=dim);
        let z = h.pow(p).scale(&q(rng.gen_range(-5..=5)));
        let n = rng.gen_range(-6..=6i64);
        let sign = if rng.gen_bool(0.5) { Sign::Plus } else { Sign::Minus };
        let factorial = Rational::factorial(p - 1);
        let cp = z
            .scale(&(sign.as_rational() * factorial))
            .add(&h.pow(p).scale(&q(n)))
            .expect("same model");
        let chern: Vec<CycleClass> = (1..=p)
            .map(|i| if i == p { cp.clone() } else { h.pow(i).scale(&q(rng.gen_range(-3..=3))) })
            .collect();
        let bundle = FormalBundle::new("E", chern).expect("homogeneous");
        let inst = SyzygyInstance::new(z, bundle, n, sign, p).expect("P^n has a hyperplane");
        let ok = verify_syzygy_identity(&inst).is_ok_and(|o| o.holds);
        s.check(ok, || format!("trial {trial}: constructed syzygy instance fails"));
        for delta in [-1i64, 1] {
            let perturbed = SyzygyInstance { n: n + delta, ..inst.clone() };
            let out = verify_syzygy_identity(&perturbed);
            s.check(out.is_ok_and(|o| !o.holds && !o.residual.is_zero()), || {
                format!("trial {trial}: perturbing n by {delta} still passes")
            });
        }
    }

    let targets: Vec<(Arc<RingModel>, Vec<SubalgebraGenerator>)> = {
        let g24 = RingModel::grassmannian(2, 4).expect("valid");
        let g25 = RingModel::grassmannian(2, 5).expect("valid");
        let p4 = RingModel::projective_space(4);
        let pp = RingModel::product(&[2, 2]).expect("valid");
        let gens = |m: &Arc<RingModel>, names: &[&str]| {
            names
                .iter()
                .map(|n| SubalgebraGenerator::new(*n, CycleClass::generator(m, n).expect("exists"), true))
                .collect::<Vec<_>>()
        };
        vec![
            (g24.clone(), gens(&g24, &["s1", "s2"])),
            (g25.clone(), gens(&g25, &["s1", "s2", "s3"])),
            (p4.clone(), gens(&p4, &["H"])),
            (pp.clone(), gens(&pp, &["H1", "H2"])),
        ]
    };
    for (model, gens) in &targets {
        for trial in 0..10 {
            let degree = rng.gen_range(0..=model.top_degree());
            let mut target = CycleClass::zero(model);
            for g in gens {
                let e = rng.gen_range(0..=degree);
                target = target.add(&g.class.pow(e).scale(&q(rng.gen_range(-3..=3)))).expect("same model");
            }
            let Some(out) = s.attempt(express_in_subalgebra(&target, gens, model.top_degree()), "express") else {
                continue;
            };
            let ok = match out {
                Membership::Represented(rep) => {
                    let mut back = CycleClass::zero(model);
                    for (c, exps) in &rep.terms {
                        let mut term = CycleClass::constant(model, c.clone());
                        for (g, &e) in gens.iter().zip(exps) {
                            term = term.mul(&g.class.pow(e)).expect("same model");
                        }
                        back = back.add(&term).expect("same model");
                    }
                    back == target
                }
                // generators of the full ring always reach every class
                Membership::NotRepresentable { .. } => false,
            };
            s.check(ok, || format!("{} trial {trial}: representation does not re-evaluate", model.id()));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_suites_pass() {
        for r in run_all(DEFAULT_SEED) {
            assert!(r.passed(), "{r}");
            assert!(r.cases > 0, "{r}");
        }
    }
}
