//! lci certificates.
//!
//! For a rank-`r` bundle `E` and a line bundle `L` with `L` and `E ⊗ L`
//! globally generated, put `x_i = c_1(L)^i · c_{r−i}(E ⊗ L)`. Expanding
//! `c_r((E⊗L) ⊗ L^{⊗m})` gives `Σ_i m^i x_i`, so for `m = 0..r` the
//! classes `c_r(E ⊗ L^{⊗(m+1)})` are the Vandermonde transform of
//! `x_0..x_r`. Inverting it writes each `x_i`, and through
//! `c_r(E) = Σ_i (−1)^i x_i` also `c_r(E)`, as a rational combination of top
//! Chern classes of globally generated twists. Those atoms are classes of
//! zero schemes of sections, hence lci.
//!
//! A [`Certificate`] records such a combination symbolically in the twist
//! index `k = m + 1`; [`verify_certificate`] evaluates it in a ring model.

use std::fmt;
use std::sync::Arc;

use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::arith::{lagrange_extrapolate_coeffs, vandermonde_matrix, ArithError, Rational};
use crate::chern::{line_power, tensor_line, top_chern, ChernError, FormalBundle, LineBundle, ZERO_SCHEME_PROVENANCE};
use crate::oracle::{oracle_check, BundleExpr, ChernExpr, OracleContext, OracleError, OracleReport};
use crate::ring::{CycleClass, RingError, RingModel};

pub const ASSUME_LINE_GENERATED: &str = "L globally generated";
pub const ASSUME_TWIST_GENERATED: &str = "E⊗L globally generated";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CertError {
    #[error("index {i} out of range for rank {r}")]
    IndexOutOfRange { i: u32, r: u32 },
    #[error("rank must be positive")]
    ZeroRank,
    #[error("certificate has rank {cert} but bundle has rank {bundle}")]
    RankMismatch { cert: u32, bundle: u32 },
    #[error("matrix-solve and closed-form coefficients disagree for rank {0}")]
    PathsDisagree(u32),
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error(transparent)]
    Chern(#[from] ChernError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// The atom `c_r(E ⊗ L^{⊗k})`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TwistAtom {
    pub k: u32,
    pub rank: u32,
}

impl TwistAtom {
    pub fn provenance(&self) -> &'static str {
        ZERO_SCHEME_PROVENANCE
    }
}

impl fmt::Display for TwistAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.k {
            1 => write!(f, "c_{}(E⊗L)", self.rank),
            k => write!(f, "c_{}(E⊗L^{k})", self.rank),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    /// `x_i = c_1(L)^i · c_{r−i}(E ⊗ L)`.
    Xi(u32),
    /// `c_r(E)`.
    TopChern,
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Xi(i) => write!(f, "x_{i}"),
            Target::TopChern => write!(f, "c_top(E)"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub target: Target,
    pub rank: u32,
    pub atoms: Vec<(Rational, TwistAtom)>,
    pub assumptions: Vec<String>,
    pub verified_in: Vec<String>,
}

impl Certificate {
    fn new(target: Target, rank: u32, coeffs: Vec<Rational>) -> Certificate {
        let atoms = coeffs
            .into_iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(m, c)| (c, TwistAtom { k: m as u32 + 1, rank }))
            .collect();
        Certificate {
            target,
            rank,
            atoms,
            assumptions: vec![ASSUME_LINE_GENERATED.into(), ASSUME_TWIST_GENERATED.into()],
            verified_in: Vec::new(),
        }
    }

    /// Replaces the asserted hypotheses, e.g. with the flags a user actually set.
    pub fn with_assumptions(mut self, assumptions: Vec<String>) -> Self {
        self.assumptions = assumptions;
        self
    }

    pub fn mark_verified(&mut self, model_id: String) {
        if !self.verified_in.contains(&model_id) {
            self.verified_in.push(model_id);
        }
    }

    /// Coefficient on the atom with twist `k` (zero if absent).
    pub fn coeff(&self, k: u32) -> Rational {
        self.atoms
            .iter()
            .find(|(_, a)| a.k == k)
            .map_or_else(Rational::zero, |(c, _)| c.clone())
    }
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} =", self.target)?;
        if self.atoms.is_empty() {
            return write!(f, " 0");
        }
        for (i, (c, atom)) in self.atoms.iter().enumerate() {
            match (i, c.is_negative()) {
                (0, true) => write!(f, " -")?,
                (0, false) => write!(f, " ")?,
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let abs = c.abs();
            if abs.is_one() {
                write!(f, "{atom}")?;
            } else {
                write!(f, "{abs}*{atom}")?;
            }
        }
        Ok(())
    }
}

struct AtomJson<'a>(&'a Rational, &'a TwistAtom);

impl Serialize for AtomJson<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(2))?;
        map.serialize_entry("coeff", self.0)?;
        map.serialize_entry("k", &self.1.k)?;
        map.end()
    }
}

struct TargetJson(Target);

impl Serialize for TargetJson {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.0 {
            Target::TopChern => s.serialize_str("c_top"),
            Target::Xi(i) => {
                let mut map = s.serialize_map(Some(1))?;
                map.serialize_entry("xi", &i)?;
                map.end()
            }
        }
    }
}

impl Serialize for Certificate {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let atoms: Vec<AtomJson> = self.atoms.iter().map(|(c, a)| AtomJson(c, a)).collect();
        let mut map = s.serialize_map(Some(5))?;
        map.serialize_entry("assumptions", &self.assumptions)?;
        map.serialize_entry("atoms", &atoms)?;
        map.serialize_entry("rank", &self.rank)?;
        map.serialize_entry("target", &TargetJson(self.target))?;
        map.serialize_entry("verified_in", &self.verified_in)?;
        map.end()
    }
}

/// `x_i` as row `i` of the inverse Vandermonde matrix, paired with the atoms
/// `k = 1..r+1`.
pub fn certify_xi(r: u32, i: u32) -> Result<Certificate, CertError> {
    if r == 0 {
        return Err(CertError::ZeroRank);
    }
    if i > r {
        return Err(CertError::IndexOutOfRange { i, r });
    }
    let inv = vandermonde_matrix(r as usize).inverse()?;
    Ok(Certificate::new(Target::Xi(i), r, inv.row(i as usize).to_vec()))
}

/// Coefficients of `c_r(E)` on `k = 1..r+1` via `Σ_i (−1)^i x_i` and the
/// Vandermonde solve.
pub fn top_coefficients_via_solve(r: u32) -> Result<Vec<Rational>, CertError> {
    let inv = vandermonde_matrix(r as usize).inverse()?;
    let n = r as usize + 1;
    Ok((0..n)
        .map(|m| {
            (0..n)
                .map(|i| {
                    let c = inv.get(i, m).clone();
                    if i % 2 == 0 { c } else { -c }
                })
                .sum()
        })
        .collect())
}

/// Coefficients of `c_r(E)` by extrapolating the degree-`r` polynomial
/// `m ↦ c_r(E ⊗ L^{⊗(m+1)})` from `m = 0..r` to `m = −1`.
pub fn top_coefficients_closed_form(r: u32) -> Result<Vec<Rational>, CertError> {
    let nodes: Vec<i64> = (0..=r as i64).collect();
    Ok(lagrange_extrapolate_coeffs(&nodes, -1)?)
}

/// Certificate for `c_r(E)`; both computation paths must agree.
pub fn certify_top(r: u32) -> Result<Certificate, CertError> {
    if r == 0 {
        return Err(CertError::ZeroRank);
    }
    let solved = top_coefficients_via_solve(r)?;
    let closed = top_coefficients_closed_form(r)?;
    if solved != closed {
        return Err(CertError::PathsDisagree(r));
    }
    Ok(Certificate::new(Target::TopChern, r, solved))
}

/// Outcome of evaluating a certificate in a ring model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verification {
    pub model_id: String,
    pub verified: bool,
    /// `target − Σ coeff·atom`; zero iff verified.
    pub residual: CycleClass,
}

/// The class the certificate claims to represent.
pub fn target_class(target: Target, e: &FormalBundle, l: &LineBundle) -> Result<CycleClass, CertError> {
    let r = e.rank();
    Ok(match target {
        Target::TopChern => top_chern(e).class,
        Target::Xi(i) => {
            let twisted = tensor_line(e, l)?;
            l.c1().pow(i).mul(&twisted.chern_class(r - i))?
        }
    })
}

pub fn verify_certificate(
    cert: &Certificate,
    e: &FormalBundle,
    l: &LineBundle,
    model: &Arc<RingModel>,
) -> Result<Verification, CertError> {
    for m in [e.model(), l.model()] {
        if **m != **model {
            return Err(RingError::ModelMismatch { left: model.id(), right: m.id() }.into());
        }
    }
    if e.rank() != cert.rank {
        return Err(CertError::RankMismatch { cert: cert.rank, bundle: e.rank() });
    }
    if let Target::Xi(i) = cert.target {
        if i > cert.rank {
            return Err(CertError::IndexOutOfRange { i, r: cert.rank });
        }
    }
    let mut combination = CycleClass::zero(model);
    for (c, atom) in &cert.atoms {
        let twisted = tensor_line(e, &line_power(l, atom.k as i64))?;
        combination = combination.add(&top_chern(&twisted).class.scale(c))?;
    }
    let residual = target_class(cert.target, e, l)?.sub(&combination)?;
    Ok(Verification {
        model_id: model.id(),
        verified: residual.is_zero(),
        residual,
    })
}

/// Verifies in the universal ring `Q[c1_E..cr_E, l_L]` truncated at degree
/// `r`, where the Chern classes are independent generators.
pub fn verify_universal(cert: &Certificate) -> Result<Verification, CertError> {
    let ctx = OracleContext::new().bundle("E", cert.rank).line("L");
    let model = ctx.universal_model(cert.rank)?;
    let e = FormalBundle::from_universal(&model, "E", cert.rank)?;
    let l = crate::chern::universal_line(&model, "L", true)?;
    verify_certificate(cert, &e, &l, &model)
}

/// The certificate's identity as a pair of root expressions, for the oracle.
pub fn certificate_expressions(cert: &Certificate, bundle: &str, line: &str) -> (ChernExpr, ChernExpr) {
    let e = BundleExpr::bundle(bundle);
    let r = cert.rank;
    let lhs = match cert.target {
        Target::TopChern => ChernExpr::c(e.clone(), r),
        Target::Xi(i) => ChernExpr::Mul(vec![
            ChernExpr::line_c1(line, 1).pow(i),
            ChernExpr::c(e.clone().twist(line, 1), r - i),
        ]),
    };
    let rhs = ChernExpr::Add(
        cert.atoms
            .iter()
            .map(|(c, a)| ChernExpr::c(e.clone().twist(line, a.k as i64), r).scaled(c.clone()))
            .collect(),
    );
    (lhs, rhs)
}

/// Splitting-principle check of the certificate identity, independent of the
/// ring-model evaluation.
pub fn oracle_verify(cert: &Certificate) -> Result<OracleReport, CertError> {
    let ctx = OracleContext::new().bundle("E", cert.rank).line("L");
    let (lhs, rhs) = certificate_expressions(cert, "E", "L");
    Ok(oracle_check(&ctx, &lhs, &rhs)?)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AtomJustification {
    pub k: u32,
    pub atom: String,
    pub reason: String,
    pub consumed: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LciReport {
    pub atoms: Vec<AtomJustification>,
    /// Set when some hypothesis the atoms rely on was not asserted.
    pub conditional: bool,
    pub missing: Vec<String>,
    pub notes: Vec<String>,
}

/// Why each atom is lci, and which asserted hypotheses that consumed.
pub fn lci_flags_report(cert: &Certificate) -> LciReport {
    let required = [ASSUME_LINE_GENERATED, ASSUME_TWIST_GENERATED];
    let consumed: Vec<String> = required.iter().map(|s| s.to_string()).collect();
    let atoms = cert
        .atoms
        .iter()
        .map(|(_, a)| {
            let bundle = if a.k == 1 {
                "E⊗L is globally generated by assumption".to_string()
            } else {
                format!(
                    "E⊗L^{} = (E⊗L)⊗L^{} is globally generated as a tensor product of globally generated bundles",
                    a.k,
                    a.k - 1
                )
            };
            AtomJustification {
                k: a.k,
                atom: a.to_string(),
                reason: format!(
                    "{bundle}; its top Chern class is the class of the zero scheme of a general section, \
                     a regular closed immersion of codimension {} in the Cohen-Macaulay ambient variety",
                    a.rank
                ),
                consumed: consumed.clone(),
            }
        })
        .collect();
    let missing: Vec<String> = required
        .iter()
        .filter(|req| !cert.assumptions.iter().any(|a| a == *req))
        .map(|s| s.to_string())
        .collect();
    let mut notes = vec![
        "the reduced system in x_1..x_{r-1}, using x_0 and x_r directly, is not used; the full (r+1)-equation system is solved"
            .to_string(),
    ];
    if cert.target == Target::TopChern {
        notes.push("a sufficiently ample L with L and E⊗L globally generated must be chosen by the caller".into());
    }
    LciReport {
        atoms,
        conditional: !missing.is_empty(),
        missing,
        notes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> Rational {
        Rational::from(n)
    }

    fn coeffs(c: &Certificate) -> Vec<(Rational, u32)> {
        c.atoms.iter().map(|(q, a)| (q.clone(), a.k)).collect()
    }

    #[test]
    fn xi_examples() {
        for r in 1..=5 {
            assert_eq!(coeffs(&certify_xi(r, 0).unwrap()), vec![(q(1), 1)]);
        }
        assert_eq!(coeffs(&certify_xi(1, 1).unwrap()), vec![(q(-1), 1), (q(1), 2)]);
        assert_eq!(
            coeffs(&certify_xi(2, 2).unwrap()),
            vec![(Rational::new(1, 2), 1), (q(-1), 2), (Rational::new(1, 2), 3)]
        );
        assert_eq!(certify_xi(2, 3), Err(CertError::IndexOutOfRange { i: 3, r: 2 }));
    }

    #[test]
    fn top_examples() {
        assert_eq!(coeffs(&certify_top(1).unwrap()), vec![(q(2), 1), (q(-1), 2)]);
        assert_eq!(coeffs(&certify_top(2).unwrap()), vec![(q(3), 1), (q(-3), 2), (q(1), 3)]);
        for r in 1..=8 {
            let sum: Rational = certify_top(r).unwrap().atoms.iter().map(|(c, _)| c.clone()).sum();
            assert_eq!(sum, q(1));
        }
    }

    #[test]
    fn universal_verification() {
        assert!(verify_universal(&certify_top(3).unwrap()).unwrap().verified);
        let mut bad = certify_top(3).unwrap();
        bad.atoms[1].0 = &bad.atoms[1].0 + &q(1);
        let v = verify_universal(&bad).unwrap();
        assert!(!v.verified);
        assert!(!v.residual.is_zero());
        assert!(!oracle_verify(&bad).unwrap().holds);
    }

    #[test]
    fn concrete_projective_space() {
        // c1 = H, c2 = H^2, ℓ = H in Q[H]/(H^5)
        let p4 = RingModel::projective_space(4);
        let h = CycleClass::generator(&p4, "H").unwrap();
        let e = FormalBundle::new("E", vec![h.clone(), h.pow(2)]).unwrap();
        let l = LineBundle::new("L", h, true).unwrap();
        let v = verify_certificate(&certify_xi(2, 1).unwrap(), &e, &l, &p4).unwrap();
        assert!(v.verified);
        assert_eq!(v.model_id, "P(4)");
    }

    #[test]
    fn mismatches() {
        let p4 = RingModel::projective_space(4);
        let p3 = RingModel::projective_space(3);
        let h = CycleClass::generator(&p4, "H").unwrap();
        let e = FormalBundle::new("E", vec![h.clone()]).unwrap();
        let l = LineBundle::new("L", h, true).unwrap();
        assert!(matches!(
            verify_certificate(&certify_top(1).unwrap(), &e, &l, &p3),
            Err(CertError::Ring(RingError::ModelMismatch { .. }))
        ));
        assert_eq!(
            verify_certificate(&certify_top(2).unwrap(), &e, &l, &p4),
            Err(CertError::RankMismatch { cert: 2, bundle: 1 })
        );
    }

    #[test]
    fn lci_report() {
        let rep = lci_flags_report(&certify_top(2).unwrap());
        assert_eq!(rep.atoms.len(), 3);
        assert!(rep.atoms.iter().all(|a| a.consumed.len() == 2));
        assert!(!rep.conditional);
        assert!(rep.atoms[0].reason.starts_with("E⊗L is globally generated"));

        let cert = certify_top(2).unwrap().with_assumptions(vec![ASSUME_LINE_GENERATED.into()]);
        let rep = lci_flags_report(&cert);
        assert!(rep.conditional);
        assert_eq!(rep.missing, vec![ASSUME_TWIST_GENERATED.to_string()]);
    }

    #[test]
    fn json_shape() {
        let mut c = certify_top(1).unwrap();
        c.mark_verified("universal(1)".into());
        assert_eq!(
            serde_json::to_string(&c).unwrap(),
            r#"{"assumptions":["L globally generated","E⊗L globally generated"],"atoms":[{"coeff":"2","k":1},{"coeff":"-1","k":2}],"rank":1,"target":"c_top","verified_in":["universal(1)"]}"#
        );
        let x = certify_xi(2, 2).unwrap();
        let v = serde_json::to_value(&x).unwrap();
        assert_eq!(v["target"], serde_json::json!({"xi": 2}));
        assert_eq!(v["atoms"][0]["coeff"], "1/2");
    }

    #[test]
    fn display() {
        assert_eq!(certify_top(2).unwrap().to_string(), "c_top(E) = 3*c_2(E⊗L) - 3*c_2(E⊗L^2) + c_2(E⊗L^3)");
    }
}
