//! Acceptance criteria 1-8. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::Arc;
use std::time::Instant;

use chernforge::arith::{vandermonde_matrix, Rational};
use chernforge::cert::{
    certify_top, certify_xi, oracle_verify, target_class, top_coefficients_closed_form, top_coefficients_via_solve,
    verify_certificate, Target,
};
use chernforge::checks::{
    express_in_subalgebra, kleiman_smooth_bound, verify_syzygy_identity, Membership, Sign, SubalgebraGenerator,
    SyzygyInstance,
};
use chernforge::chern::{chern_character, direct_sum, line_power, tensor_line, universal_line, FormalBundle, LineBundle};
use chernforge::dsl::{parse, pretty::pretty};
use chernforge::oracle::{expand_in_roots, oracle_check, to_elementary, BundleExpr, ChernExpr, OracleContext};
use chernforge::ring::{CycleClass, RingModel};
use num_integer::binomial;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn q(n: i64) -> Rational {
    Rational::from(n)
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

/// Universal ring for one bundle `E` of rank `r` and one line `L`.
fn universal(r: u32) -> (OracleContext, Arc<RingModel>, FormalBundle, LineBundle) {
    let ctx = OracleContext::new().bundle("E", r).line("L");
    let model = ctx.universal_model(r).unwrap();
    let e = FormalBundle::from_universal(&model, "E", r).unwrap();
    let l = universal_line(&model, "L", true).unwrap();
    (ctx, model, e, l)
}

fn criterion_1() -> Outcome {
    let v = vandermonde_matrix(2);
    let displayed = [[1, 0, 0], [1, 1, 1], [1, 2, 4]];
    for (i, row) in displayed.iter().enumerate() {
        for (j, &x) in row.iter().enumerate() {
            ensure!(*v.get(i, j) == q(x), "V(2)[{i}][{j}] = {}", v.get(i, j));
        }
    }
    for r in 0..=8usize {
        let det = vandermonde_matrix(r).determinant().map_err(err)?;
        let mut expected: i64 = 1;
        for j in 0..=r as i64 {
            for i in 0..j {
                expected *= j - i;
            }
        }
        ensure!(!det.is_zero(), "det V({r}) = 0");
        ensure!(det == q(expected), "det V({r}) = {det}, expected {expected}");
    }
    Ok("V(2) matches; det V(r) = prod(j-i) != 0 for r <= 8".into())
}

fn criterion_2() -> Outcome {
    let mut count = 0;
    for r in 1..=4u32 {
        let (_, model, e, l) = universal(r);
        for i in 0..=r {
            let cert = certify_xi(r, i).map_err(err)?;
            // the coefficients are row i of V^{-1}: Σ_m c_m m^j = δ_ij
            for j in 0..=r {
                let s: Rational = cert.atoms.iter().map(|(c, a)| c * &q(a.k as i64 - 1).pow(j)).sum();
                ensure!(s == if i == j { q(1) } else { q(0) }, "x_{i}, rank {r}: moment {j} is {s}");
            }
            let v = verify_certificate(&cert, &e, &l, &model).map_err(err)?;
            ensure!(v.verified, "x_{i} rank {r}: residual {}", v.residual);
            count += 1;
        }
        let c0 = certify_xi(r, 0).map_err(err)?;
        ensure!(c0.atoms.len() == 1 && c0.coeff(1) == q(1), "x_0 for rank {r}: {c0}");
        let top = target_class(Target::Xi(r), &e, &l).map_err(err)?;
        ensure!(top == l.c1().pow(r), "x_{r} for rank {r} is {top}, not c1(L)^{r}");
    }
    Ok(format!("{count} certificates verified in universal(r); x_0 and x_r anchors hold"))
}

fn criterion_3() -> Outcome {
    for r in 1..=6u32 {
        let solved = top_coefficients_via_solve(r).map_err(err)?;
        let closed = top_coefficients_closed_form(r).map_err(err)?;
        ensure!(solved == closed, "rank {r}: paths disagree");
        let cert = certify_top(r).map_err(err)?;
        for m in 0..=r as i64 {
            let sign = if m % 2 == 0 { 1 } else { -1 };
            let want = q(sign * binomial(r as i64 + 1, m + 1));
            ensure!(solved[m as usize] == want, "rank {r}, m={m}: {} != {want}", solved[m as usize]);
            ensure!(cert.coeff(m as u32 + 1) == want, "certificate rank {r}, m={m}");
        }
        if r <= 4 {
            let o = oracle_verify(&cert).map_err(err)?;
            ensure!(o.holds, "rank {r}: oracle rejects\n{}", o.report);
        }
    }
    let (ctx, ..) = universal(1);
    let e = BundleExpr::bundle("E");
    let lhs = ChernExpr::Add(vec![
        ChernExpr::c(e.clone().twist("L", 1), 1).scaled(2),
        ChernExpr::c(e.clone().twist("L", 2), 1).scaled(-1),
    ]);
    let anchor = oracle_check(&ctx, &lhs, &ChernExpr::c(e, 1)).map_err(err)?;
    ensure!(anchor.holds, "2c1(E⊗L) - c1(E⊗L^2) != c1(E)");
    Ok("paths agree for r <= 6; alternating binomials; oracle confirms r <= 4; rank-1 anchor".into())
}

fn criterion_4() -> Outcome {
    let mut count = 0;
    for r in 1..=4u32 {
        let (ctx, model, e, l) = universal(r);
        for m in -1..=r as i64 {
            let twisted = tensor_line(&e, &line_power(&l, m)).map_err(err)?;
            for k in 0..=r {
                let roots = expand_in_roots(&ctx, &ChernExpr::c(BundleExpr::bundle("E").twist("L", m), k)).map_err(err)?;
                let via_roots = to_elementary(&ctx, &roots).map_err(err)?.to_class(&ctx, &model).map_err(err)?;
                ensure!(via_roots == twisted.chern_class(k), "r={r} k={k} m={m}: {via_roots} vs {}", twisted.chern_class(k));
                count += 1;
            }
            if m >= 0 {
                // c_r((E⊗L)⊗L^m) = Σ m^i x_i with x_i = c1(L)^i c_{r-i}(E⊗L)
                let bundle = BundleExpr::bundle("E");
                let lhs = ChernExpr::c(bundle.clone().twist("L", 1).twist("L", m), r);
                let rhs = ChernExpr::Add(
                    (0..=r)
                        .map(|i| {
                            ChernExpr::Mul(vec![
                                ChernExpr::line_c1("L", 1).pow(i),
                                ChernExpr::c(bundle.clone().twist("L", 1), r - i),
                            ])
                            .scaled(q(m).pow(i))
                        })
                        .collect(),
                );
                let o = oracle_check(&ctx, &lhs, &rhs).map_err(err)?;
                ensure!(o.holds, "regrouping r={r} m={m}\n{}", o.report);
            }
        }
    }
    Ok(format!("{count} (r, k, m) cases agree; regrouping holds"))
}

const CH_DEGREE: u32 = 6;

fn random_class(model: &Arc<RingModel>, degree: u32, rng: &mut ChaCha8Rng) -> CycleClass {
    // generators a, b of degree 1 and c of degree 3
    let mut out = CycleClass::zero(model);
    for c in 0..=degree / 3 {
        for a in 0..=degree - 3 * c {
            let coeff = Rational::new(rng.gen_range(-5..=5), rng.gen_range(1..=4));
            out = out.add(&CycleClass::monomial(model, &[a, degree - 3 * c - a, c], coeff).unwrap()).unwrap();
        }
    }
    out
}

fn criterion_5() -> Outcome {
    let model = RingModel::universal(CH_DEGREE, [("a", 1), ("b", 1), ("c", 3)]).map_err(err)?;
    let mut rng = ChaCha8Rng::seed_from_u64(20261016);
    let trials = 40;
    for t in 0..trials {
        let bundle = |name: &str, rng: &mut ChaCha8Rng| {
            let rank = rng.gen_range(1..=3u32);
            FormalBundle::new(name, (1..=rank).map(|i| random_class(&model, i, rng)).collect()).unwrap()
        };
        let e = bundle("E", &mut rng);
        let f = bundle("F", &mut rng);
        let l = LineBundle::new("L", random_class(&model, 1, &mut rng), false).map_err(err)?;
        let ch = |b: &FormalBundle| chern_character(b, CH_DEGREE).unwrap();
        let sum = ch(&direct_sum(&e, &f).map_err(err)?);
        ensure!(sum == ch(&e).add(&ch(&f)).map_err(err)?, "trial {t}: ch not additive");
        let prod = ch(&tensor_line(&e, &l).map_err(err)?);
        let expected = ch(&e).mul(&ch(&FormalBundle::from_line(&l))).map_err(err)?;
        ensure!(prod == expected, "trial {t}: ch not multiplicative");
        // the exponential of c1(L) as an independent check of ch(L)
        let mut exp = CycleClass::zero(&model);
        for j in 0..=CH_DEGREE {
            exp = exp.add(&l.c1().pow(j).scale(&Rational::factorial(j).recip().unwrap())).unwrap();
        }
        ensure!(ch(&FormalBundle::from_line(&l)) == exp, "trial {t}: ch(L) != exp(c1 L)");
    }
    Ok(format!("{trials} random pairs of rank <= 3, degree <= {CH_DEGREE}"))
}

fn box_partitions(rows: u32, cols: u32) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    let mut frontier = vec![vec![]];
    while let Some(p) = frontier.pop() {
        if p.len() as u32 == rows {
            continue;
        }
        let max = p.last().copied().unwrap_or(cols);
        for v in 1..=max {
            let mut next: Vec<u32> = p.clone();
            next.push(v);
            out.push(next.clone());
            frontier.push(next);
        }
    }
    out
}

fn criterion_6() -> Outcome {
    for n in 1..=10u32 {
        let pn = RingModel::projective_space(n);
        let h = CycleClass::generator(&pn, "H").map_err(err)?;
        ensure!(h.pow(n + 1).is_zero(), "H^{} != 0 in P^{n}", n + 1);
        ensure!(!h.pow(n).is_zero(), "H^{n} = 0 in P^{n}");
    }
    for total in 1..=10u32 {
        for m in 0..=total {
            let n = total - m;
            let pp = RingModel::product(&[m.max(1), n.max(1)]).map_err(err)?;
            let h = CycleClass::generator(&pp, "H1").unwrap().add(&CycleClass::generator(&pp, "H2").unwrap()).unwrap();
            let got = h.pow(total).coeff(&[m, n]);
            ensure!(got == q(binomial(total as i64, m as i64)), "(H1+H2)^{total}: H1^{m}H2^{n} has {got}");
        }
    }
    let g24 = RingModel::grassmannian(2, 4).map_err(err)?;
    let s = |m: &Arc<RingModel>, p: &[u32]| CycleClass::schubert(m, p).unwrap();
    ensure!(s(&g24, &[1]).pow(4) == s(&g24, &[2, 2]).scale(&q(2)), "σ1^4 != 2σ22");
    let sq = s(&g24, &[1]).mul(&s(&g24, &[1])).map_err(err)?;
    ensure!(sq == s(&g24, &[2]).add(&s(&g24, &[1, 1])).unwrap(), "σ1·σ1 = {sq}");
    let mut products = 0;
    for (k, n) in [(2u32, 4u32), (2, 5)] {
        let g = RingModel::grassmannian(k, n).map_err(err)?;
        let parts = box_partitions(k, n - k);
        for a in &parts {
            for b in &parts {
                let p = s(&g, a).mul(&s(&g, b)).map_err(err)?;
                for (key, c) in p.terms() {
                    ensure!(c.is_integer() && !c.is_negative(), "G({k},{n}) σ{a:?}σ{b:?}: coefficient {c} on {key:?}");
                }
                products += 1;
            }
        }
    }
    Ok(format!("P^n, PxP binomials, G(2,4) identities, {products} Schubert products nonnegative integral"))
}

fn criterion_7() -> Outcome {
    for d in 0..=12u32 {
        for i in 0..=d {
            let direct = Rational::from(i) < Rational::new(d as i64 + 2, 2);
            ensure!(kleiman_smooth_bound(d, i).map_err(err)? == direct, "kleiman d={d} i={i}");
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for t in 0..30 {
        let dim = rng.gen_range(1..=7u32);
        let pn = RingModel::projective_space(dim);
        let h = CycleClass::generator(&pn, "H").unwrap();
        let p = rng.gen_range(1..=dim);
        let z = h.pow(p).scale(&q(rng.gen_range(-6..=6)));
        let n = rng.gen_range(-9..=9i64);
        let sign = if t % 2 == 0 { Sign::Plus } else { Sign::Minus };
        let cp = z.scale(&(sign.as_rational() * Rational::factorial(p - 1))).add(&h.pow(p).scale(&q(n))).unwrap();
        let chern = (1..=p).map(|i| if i == p { cp.clone() } else { h.pow(i) }).collect();
        let inst = SyzygyInstance::new(z, FormalBundle::new("E", chern).unwrap(), n, sign, p).map_err(err)?;
        ensure!(verify_syzygy_identity(&inst).map_err(err)?.holds, "trial {t}: true instance rejected");
        for delta in [-1, 1] {
            let out = verify_syzygy_identity(&SyzygyInstance { n: n + delta, ..inst.clone() }).map_err(err)?;
            ensure!(!out.holds && !out.residual.is_zero(), "trial {t}: n{delta:+} accepted");
        }
    }
    let mut represented = 0;
    let g25 = RingModel::grassmannian(2, 5).map_err(err)?;
    let gens: Vec<SubalgebraGenerator> = ["s1", "s2", "s3"]
        .iter()
        .map(|n| SubalgebraGenerator::new(*n, CycleClass::generator(&g25, n).unwrap(), true))
        .collect();
    for a in box_partitions(2, 3) {
        let target = CycleClass::schubert(&g25, &a).unwrap();
        for bound in 0..=g25.top_degree() {
            if let Membership::Represented(rep) = express_in_subalgebra(&target, &gens, bound).map_err(err)? {
                let mut back = CycleClass::zero(&g25);
                for (c, exps) in &rep.terms {
                    let mut term = CycleClass::constant(&g25, c.clone());
                    for (g, &e) in gens.iter().zip(exps) {
                        term = term.mul(&g.class.pow(e)).unwrap();
                    }
                    back = back.add(&term).unwrap();
                }
                ensure!(back == target, "σ{a:?} representation re-evaluates to {back}");
                represented += 1;
            }
        }
    }
    Ok(format!("kleiman boundary d <= 12; 30 syzygy instances and perturbations; {represented} representations re-evaluate"))
}

fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus")
}

fn programs(dir: &Path) -> Vec<PathBuf> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "cf"))
        .collect();
    files.sort();
    files
}

fn criterion_8() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_chernforge");
    let corpus = programs(&corpus_dir());
    ensure!(corpus.len() >= 10, "only {} corpus programs", corpus.len());
    for path in &corpus {
        let source = std::fs::read_to_string(path).unwrap();
        let program = parse(&source).map_err(|d| format!("{}: {:?}", path.display(), d))?;
        let once = pretty(&program);
        let twice = pretty(&parse(&once).map_err(|d| format!("reparse {}: {d:?}", path.display()))?);
        ensure!(once == twice, "{}: pretty-print is not a fixed point", path.display());
        let run = || Command::new(bin).args(["run", "--json", "--verify"]).arg(path).output().unwrap();
        let (a, b) = (run(), run());
        ensure!(a.status.success(), "{} exited with {:?}: {}", path.display(), a.status.code(), String::from_utf8_lossy(&a.stdout));
        ensure!(a.stdout == b.stdout && !a.stdout.is_empty(), "{}: JSON differs between runs", path.display());
    }
    let malformed = programs(&corpus_dir().join("malformed"));
    ensure!(!malformed.is_empty(), "no malformed fixtures");
    for path in &malformed {
        let source = std::fs::read_to_string(path).unwrap();
        let out = Command::new(bin).args(["run", "--json"]).arg(path).output().unwrap();
        ensure!(!out.status.success(), "{} exited 0", path.display());
        let json = String::from_utf8_lossy(&out.stdout);
        let lines: Vec<&str> = source.lines().collect();
        let diags = diagnostics_positions(&json);
        ensure!(!diags.is_empty(), "{}: no diagnostics in {json}", path.display());
        for (line, column) in diags {
            ensure!(line >= 1 && line as usize <= lines.len(), "{}: line {line} outside source", path.display());
            ensure!(
                column >= 1 && column as usize <= lines[line as usize - 1].chars().count() + 1,
                "{}: column {column} outside line {line}",
                path.display()
            );
        }
    }
    let out = Command::new(bin).arg("selftest").env("CHERNFORGE_COLOR", "0").output().unwrap();
    let text = String::from_utf8_lossy(&out.stdout);
    ensure!(out.status.success(), "selftest failed:\n{text}");
    for id in 1..=7 {
        ensure!(text.lines().any(|l| l.starts_with(&format!("suite {id} ")) && l.contains("PASS")), "selftest suite {id} missing:\n{text}");
    }
    Ok(format!("{} programs deterministic, {} malformed fixtures rejected with positions, selftest 1-7 pass", corpus.len(), malformed.len()))
}

/// `(line, column)` pairs from the diagnostics array of the JSON report.
fn diagnostics_positions(json: &str) -> Vec<(u64, u64)> {
    let Some(start) = json.find("\"diagnostics\":[") else { return Vec::new() };
    let rest = &json[start..];
    let body = &rest[..rest.find(']').unwrap_or(rest.len())];
    let field = |obj: &str, key: &str| -> Option<u64> {
        let i = obj.find(&format!("\"{key}\":"))? + key.len() + 3;
        obj[i..].split(|c: char| !c.is_ascii_digit()).next()?.parse().ok()
    };
    body.split('}')
        .filter_map(|obj| Some((field(obj, "line")?, field(obj, "column")?)))
        .collect()
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("vandermonde fidelity", criterion_1),
        ("x_i certificates", criterion_2),
        ("top Chern certificates", criterion_3),
        ("twist formula vs roots", criterion_4),
        ("chern character homomorphism", criterion_5),
        ("ring models", criterion_6),
        ("reduction checks", criterion_7),
        ("front end", criterion_8),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {} ({name}): PASS [{secs:.2}s] {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} ({name}): FAIL [{secs:.2}s] {detail}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
