//! Formal vector bundles: a rank plus Chern classes in some ring model, and
//! the operations the certificates need (line-bundle twists, duals, Whitney
//! sums, the Chern character).
//!
//! Global generation is never checked. It is a flag asserted by the caller
//! and only propagated where it provably survives the operation.

use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::arith::Rational;
use crate::ring::{CycleClass, RingError, RingModel};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChernError {
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error("rank must be positive")]
    ZeroRank,
    #[error("{name}: c_{index} is not homogeneous of degree {index}")]
    NotHomogeneous { name: String, index: usize },
    #[error("{name}: c_1 must be homogeneous of degree 1")]
    BadFirstChernClass { name: String },
}

/// Provenance attached to top Chern classes of globally generated bundles.
pub const ZERO_SCHEME_PROVENANCE: &str =
    "top Chern class of globally generated bundle, hence lci";

/// `L^{⊗power}` for a named base line bundle `L`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineBundle {
    name: String,
    power: i64,
    c1: CycleClass,
    globally_generated: bool,
}

impl LineBundle {
    pub fn new(name: impl Into<String>, c1: CycleClass, globally_generated: bool) -> Result<LineBundle, ChernError> {
        let name = name.into();
        if !c1.is_homogeneous_of(1) {
            return Err(ChernError::BadFirstChernClass { name });
        }
        Ok(LineBundle { name, power: 1, c1, globally_generated })
    }

    /// Base name, without the tensor power.
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn power(&self) -> i64 {
        self.power
    }

    pub fn display_name(&self) -> String {
        match self.power {
            1 => self.name.clone(),
            p => format!("{}^{p}", self.name),
        }
    }

    pub fn c1(&self) -> &CycleClass {
        &self.c1
    }

    pub fn is_globally_generated(&self) -> bool {
        self.globally_generated
    }

    pub fn model(&self) -> &Arc<RingModel> {
        self.c1.model()
    }
}

/// `L^{⊗m}`: first Chern class scaled by `m`; global generation survives only
/// for `m ≥ 1`.
pub fn line_power(l: &LineBundle, m: i64) -> LineBundle {
    LineBundle {
        name: l.name.clone(),
        power: l.power * m,
        c1: l.c1.scale(&Rational::from(m)),
        globally_generated: l.globally_generated && m >= 1,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FormalBundle {
    name: String,
    rank: u32,
    chern: Vec<CycleClass>,
    globally_generated: bool,
    /// Base name of a line bundle `L` with `E ⊗ L` globally generated.
    #[serde(skip)]
    twist_generated_by: Option<String>,
}

impl FormalBundle {
    /// A bundle with the given `c_1..c_r`; the rank is the list length.
    pub fn new(name: impl Into<String>, chern: Vec<CycleClass>) -> Result<FormalBundle, ChernError> {
        let name = name.into();
        if chern.is_empty() {
            return Err(ChernError::ZeroRank);
        }
        let model = chern[0].model().clone();
        for (i, c) in chern.iter().enumerate() {
            if c.model() != &model {
                return Err(RingError::ModelMismatch { left: model.id(), right: c.model().id() }.into());
            }
            if !c.is_homogeneous_of(i as u32 + 1) {
                return Err(ChernError::NotHomogeneous { name, index: i + 1 });
            }
        }
        Ok(FormalBundle {
            name,
            rank: chern.len() as u32,
            chern,
            globally_generated: false,
            twist_generated_by: None,
        })
    }

    pub fn trivial(model: &Arc<RingModel>, name: impl Into<String>, rank: u32) -> Result<FormalBundle, ChernError> {
        FormalBundle::new(name, vec![CycleClass::zero(model); rank as usize])
    }

    /// Rank-`r` bundle whose Chern classes are the generators `c1_E..cr_E`
    /// of a universal model (see [`universal_generators`]).
    pub fn from_universal(model: &Arc<RingModel>, name: &str, rank: u32) -> Result<FormalBundle, ChernError> {
        let chern = (1..=rank)
            .map(|i| CycleClass::generator(model, &chern_generator_name(name, i)))
            .collect::<Result<Vec<_>, _>>()?;
        FormalBundle::new(name, chern)
    }

    /// The line bundle viewed as a rank-one bundle.
    pub fn from_line(l: &LineBundle) -> FormalBundle {
        FormalBundle {
            name: l.display_name(),
            rank: 1,
            chern: vec![l.c1.clone()],
            globally_generated: l.globally_generated,
            twist_generated_by: None,
        }
    }

    pub fn with_globally_generated(mut self, flag: bool) -> Self {
        self.globally_generated = flag;
        self
    }

    /// Asserts that `self ⊗ L` is globally generated for the line named `line`.
    pub fn with_twist_generated_by(mut self, line: Option<String>) -> Self {
        self.twist_generated_by = line;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn rank(&self) -> u32 {
        self.rank
    }

    pub fn model(&self) -> &Arc<RingModel> {
        self.chern[0].model()
    }

    pub fn is_globally_generated(&self) -> bool {
        self.globally_generated
    }

    pub fn twist_generated_by(&self) -> Option<&str> {
        self.twist_generated_by.as_deref()
    }

    /// `c_k`, with `c_0 = 1` and `c_k = 0` above the rank.
    pub fn chern_class(&self, k: u32) -> CycleClass {
        match k {
            0 => CycleClass::one(self.model()),
            k if k > self.rank => CycleClass::zero(self.model()),
            k => self.chern[k as usize - 1].clone(),
        }
    }

    pub fn chern_classes(&self) -> &[CycleClass] {
        &self.chern
    }

    /// `1 + c_1 + … + c_r`.
    pub fn total_chern(&self) -> CycleClass {
        (0..=self.rank).fold(CycleClass::zero(self.model()), |acc, k| {
            acc.add(&self.chern_class(k)).expect("same model")
        })
    }
}

pub fn chern_generator_name(bundle: &str, i: u32) -> String {
    format!("c{i}_{bundle}")
}

pub fn line_generator_name(line: &str) -> String {
    format!("l_{line}")
}

/// Generators of the universal verification ring: `c1_E..cr_E` (degree `i`)
/// for each bundle, then `l_L` (degree 1) for each line bundle.
pub fn universal_generators(bundles: &[(&str, u32)], lines: &[&str]) -> Vec<(String, u32)> {
    let mut gens = Vec::new();
    for (name, rank) in bundles {
        for i in 1..=*rank {
            gens.push((chern_generator_name(name, i), i));
        }
    }
    for l in lines {
        gens.push((line_generator_name(l), 1));
    }
    gens
}

pub fn universal_line(model: &Arc<RingModel>, name: &str, globally_generated: bool) -> Result<LineBundle, ChernError> {
    let c1 = CycleClass::generator(model, &line_generator_name(name))?;
    LineBundle::new(name, c1, globally_generated)
}

fn ensure_same(a: &Arc<RingModel>, b: &Arc<RingModel>) -> Result<(), ChernError> {
    if a == b {
        Ok(())
    } else {
        Err(RingError::ModelMismatch { left: a.id(), right: b.id() }.into())
    }
}

/// `E ⊗ L`: `c_k = Σ_{i≤k} C(r−i, k−i)·c_1(L)^{k−i}·c_i(E)`.
pub fn tensor_line(e: &FormalBundle, l: &LineBundle) -> Result<FormalBundle, ChernError> {
    ensure_same(e.model(), l.model())?;
    let r = e.rank as i64;
    let powers: Vec<CycleClass> = (0..=e.rank).map(|j| l.c1.pow(j)).collect();
    let mut chern = Vec::with_capacity(e.rank as usize);
    for k in 1..=e.rank {
        let mut ck = CycleClass::zero(e.model());
        for i in 0..=k {
            let coeff = Rational::binomial(r - i as i64, (k - i) as i64);
            let term = powers[(k - i) as usize].mul(&e.chern_class(i))?.scale(&coeff);
            ck = ck.add(&term)?;
        }
        chern.push(ck);
    }
    // E⊗L^m = (E⊗L)⊗L^{m-1} is generated when E⊗L and L are
    let generated = (e.globally_generated && l.globally_generated)
        || (e.twist_generated_by.as_deref() == Some(l.name.as_str()) && l.power >= 1 && l.globally_generated);
    Ok(FormalBundle {
        name: format!("{}*{}", e.name, l.display_name()),
        rank: e.rank,
        chern,
        globally_generated: generated,
        twist_generated_by: None,
    })
}

/// Whitney sum: `c(E ⊕ F) = c(E)·c(F)`.
pub fn direct_sum(e: &FormalBundle, f: &FormalBundle) -> Result<FormalBundle, ChernError> {
    ensure_same(e.model(), f.model())?;
    let rank = e.rank + f.rank;
    let mut chern = Vec::with_capacity(rank as usize);
    for k in 1..=rank {
        let mut ck = CycleClass::zero(e.model());
        for i in 0..=k.min(e.rank) {
            if k - i <= f.rank {
                ck = ck.add(&e.chern_class(i).mul(&f.chern_class(k - i))?)?;
            }
        }
        chern.push(ck);
    }
    Ok(FormalBundle {
        name: format!("{}+{}", e.name, f.name),
        rank,
        chern,
        globally_generated: e.globally_generated && f.globally_generated,
        twist_generated_by: None,
    })
}

/// `c_k(E^∨) = (−1)^k c_k(E)`.
pub fn dual(e: &FormalBundle) -> FormalBundle {
    let chern = e
        .chern
        .iter()
        .enumerate()
        .map(|(i, c)| if i % 2 == 0 { c.neg() } else { c.clone() })
        .collect();
    let name = match e.name.strip_prefix("dual(").and_then(|s| s.strip_suffix(')')) {
        Some(inner) => inner.to_string(),
        None => format!("dual({})", e.name),
    };
    FormalBundle {
        name,
        rank: e.rank,
        chern,
        globally_generated: false,
        twist_generated_by: None,
    }
}

/// `c_r(E)` together with its lci provenance, present iff `E` is flagged as
/// globally generated (then `c_r(E)` is the class of a zero scheme `Z(s)`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopChern {
    pub class: CycleClass,
    pub provenance: Option<&'static str>,
}

pub fn top_chern(e: &FormalBundle) -> TopChern {
    TopChern {
        class: e.chern_class(e.rank),
        provenance: e.globally_generated.then_some(ZERO_SCHEME_PROVENANCE),
    }
}

/// Power sums `p_1..p_d` of the Chern roots via Newton's identities, with
/// `e_k = 0` for `k > r`.
pub fn power_sums(e: &FormalBundle, d: u32) -> Result<Vec<CycleClass>, ChernError> {
    let mut p: Vec<CycleClass> = Vec::with_capacity(d as usize);
    for k in 1..=d {
        // p_k = Σ_{i=1}^{k-1} (−1)^{i−1} e_i p_{k−i} + (−1)^{k−1} k e_k
        let mut pk = e.chern_class(k).scale(&Rational::from(if k % 2 == 1 { k as i64 } else { -(k as i64) }));
        for i in 1..k {
            let term = e.chern_class(i).mul(&p[(k - i - 1) as usize])?;
            pk = if i % 2 == 1 { pk.add(&term)? } else { pk.sub(&term)? };
        }
        p.push(pk);
    }
    Ok(p)
}

/// `ch(E) = r + Σ_{k=1}^{D} p_k / k!`.
pub fn chern_character(e: &FormalBundle, d: u32) -> Result<CycleClass, ChernError> {
    let mut ch = CycleClass::constant(e.model(), e.rank);
    // components above the top degree vanish
    let d = d.min(e.model().top_degree());
    for (k, pk) in power_sums(e, d)?.iter().enumerate() {
        let inv = Rational::one() / Rational::factorial(k as u32 + 1);
        ch = ch.add(&pk.scale(&inv))?;
    }
    Ok(ch)
}
