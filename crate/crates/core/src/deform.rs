//! Deformed Wightman functions and the commutator of oppositely deformed
//! fields between two-particle-type vectors.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcspace::TestFunction;
use crate::geometry::{MinkowskiVector, ThetaMatrix};
use crate::star::TwistTagList;
use crate::wick::{Estimate, FreeField, NpointEstimate, QuadratureSpec, SlotTwist};

/// `h ↦ h*`: reversed order, pointwise conjugates.
pub fn conjugate_reverse(h: &[TestFunction]) -> Vec<TestFunction> {
    h.iter().rev().map(|f| f.conj()).collect()
}

/// `exp(−(i/2)(p₁θp₂ + (p₁ − p₂)θ Σq))`.
pub fn eta_phase(theta: &ThetaMatrix, p1: &MinkowskiVector, p2: &MinkowskiVector, q: &[MinkowskiVector]) -> Result<Complex64> {
    let dim = theta.dim();
    let mut total = MinkowskiVector::zero(dim)?;
    for v in q {
        if v.dim() != dim {
            return Err(Error::DimensionMismatch(dim, v.dim()));
        }
        total = total + *v;
    }
    let e = theta.bilinear(p1, p2) + theta.bilinear(&(*p1 - *p2), &total);
    Ok(Complex64::from_polar(1.0, -0.5 * e))
}

/// Deformed n-point function with one tag per slot.
pub fn deformed_npoint(field: &FreeField, fs: &[TestFunction], tags: &TwistTagList, spec: &QuadratureSpec) -> Result<NpointEstimate> {
    field.npoint(fs, Some(tags), spec)
}

/// `|w(f ⊗_θ g) − w(f ⊗ g)|` with a single twist between the blocks.
pub fn block_twist_defect(field: &FreeField, f: &[TestFunction], g: &[TestFunction], theta: &ThetaMatrix, spec: &QuadratureSpec) -> Result<f64> {
    let n = f.len() + g.len();
    if n % 2 == 1 || n > 6 {
        return Err(Error::InfeasibleSlots(n));
    }
    if theta.is_zero() {
        return Ok(0.0);
    }
    let fs: Vec<TestFunction> = f.iter().chain(g).cloned().collect();
    let twist = SlotTwist::between_blocks(n, f.len(), theta)?;
    let twisted = field.npoint_twisted(&fs, Some(&twist), spec)?;
    let plain = field.npoint_twisted(&fs, None, spec)?;
    Ok((twisted.value - plain.value).norm())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bracket {
    Commutator,
    Anticommutator,
}

/// `⟨Φ(h), [φ^{aθ}(f₁), φ^{bθ}(f₂)]_± Φ(g)⟩` with `(a, b) = tags`, by
/// default `(1, −1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixElementRequest {
    pub field: FreeField,
    pub bra: Vec<TestFunction>,
    pub left: TestFunction,
    pub right: TestFunction,
    pub ket: Vec<TestFunction>,
    pub sign: Bracket,
    pub theta: ThetaMatrix,
    pub tags: [f64; 2],
    /// Multiple of θ carried by every bra slot.
    pub bra_tag: f64,
    pub quad: QuadratureSpec,
}

/// A slot list with one tag per slot.
#[derive(Clone, Debug, PartialEq)]
pub struct TaggedSlots {
    pub functions: Vec<TestFunction>,
    pub tags: TwistTagList,
}

impl MatrixElementRequest {
    /// Opposite tags, undeformed bra, default quadrature.
    pub fn new(bra: Vec<TestFunction>, left: TestFunction, right: TestFunction, ket: Vec<TestFunction>, theta: ThetaMatrix) -> Result<Self> {
        let field = FreeField::new(1.0, theta.dim())?;
        let req = Self {
            field,
            bra,
            left,
            right,
            ket,
            sign: Bracket::Commutator,
            theta,
            tags: [1.0, -1.0],
            bra_tag: 0.0,
            quad: QuadratureSpec::default(),
        };
        req.validate()?;
        Ok(req)
    }

    pub fn slots(&self) -> usize {
        self.bra.len() + self.ket.len() + 2
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.slots();
        if n % 2 == 1 || n > 8 {
            return Err(Error::InfeasibleSlots(n));
        }
        let d = self.field.dim;
        if self.theta.dim() != d {
            return Err(Error::DimensionMismatch(d, self.theta.dim()));
        }
        let all = self.bra.iter().chain([&self.left, &self.right]).chain(&self.ket);
        if let Some(f) = all.into_iter().find(|f| f.dim() != d) {
            return Err(Error::DimensionMismatch(d, f.dim()));
        }
        self.quad.validate()
    }

    /// `(h*, f₁, f₂, g)` and the transposed `(h*, f₂, f₁, g)`, each with its tags.
    pub fn orderings(&self) -> Result<(TaggedSlots, TaggedSlots)> {
        let hstar = conjugate_reverse(&self.bra);
        let d = self.field.dim;
        let build = |first: (&TestFunction, f64), second: (&TestFunction, f64)| -> Result<TaggedSlots> {
            let mut functions = hstar.clone();
            let mut tags = vec![self.theta.scale(self.bra_tag); hstar.len()];
            functions.push(first.0.clone());
            tags.push(self.theta.scale(first.1));
            functions.push(second.0.clone());
            tags.push(self.theta.scale(second.1));
            functions.extend(self.ket.iter().cloned());
            tags.extend(std::iter::repeat_n(ThetaMatrix::zero(d)?, self.ket.len()));
            Ok(TaggedSlots { functions, tags: TwistTagList::new(tags)? })
        };
        let direct = build((&self.left, self.tags[0]), (&self.right, self.tags[1]))?;
        let transposed = build((&self.right, self.tags[1]), (&self.left, self.tags[0]))?;
        Ok((direct, transposed))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: RawRequest = serde_json::from_str(s)?;
        raw.resolve()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&RawRequest::from_request(self))?)
    }
}

/// Value of a matrix element with both correlators it was built from.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MatrixElement {
    pub value: Complex64,
    pub eps_quad: f64,
    pub direct: Estimate,
    pub transposed: Estimate,
}

/// `(w ∓ w_π)` evaluated on the twisted slot lists of the request.
pub fn commutator_matrix_element(req: &MatrixElementRequest) -> Result<MatrixElement> {
    req.validate()?;
    let (direct, transposed) = req.orderings()?;
    let (a, b) = rayon::join(
        || req.field.npoint(&direct.functions, Some(&direct.tags), &req.quad),
        || req.field.npoint(&transposed.functions, Some(&transposed.tags), &req.quad),
    );
    let (a, b) = (a?.estimate(), b?.estimate());
    let value = match req.sign {
        Bracket::Commutator => a.value - b.value,
        Bracket::Anticommutator => a.value + b.value,
    };
    Ok(MatrixElement { value, eps_quad: a.eps_quad + b.eps_quad, direct: a, transposed: b })
}

/// A function given inline or by name from the request's `functions` table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FunctionRef {
    Name(String),
    Inline(TestFunction),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRequest {
    #[serde(default = "default_field")]
    field: FreeField,
    #[serde(default)]
    functions: BTreeMap<String, TestFunction>,
    #[serde(default)]
    bra: Vec<FunctionRef>,
    left: FunctionRef,
    right: FunctionRef,
    #[serde(default)]
    ket: Vec<FunctionRef>,
    #[serde(default = "default_sign")]
    sign: Bracket,
    theta: ThetaMatrix,
    #[serde(default = "default_tags")]
    tags: [f64; 2],
    #[serde(default)]
    bra_tag: f64,
    #[serde(default)]
    quad: QuadratureSpec,
}

fn default_field() -> FreeField {
    FreeField { mass: 1.0, dim: 2 }
}

fn default_sign() -> Bracket {
    Bracket::Commutator
}

fn default_tags() -> [f64; 2] {
    [1.0, -1.0]
}

impl RawRequest {
    fn resolve(self) -> Result<MatrixElementRequest> {
        let get = |r: &FunctionRef| -> Result<TestFunction> {
            match r {
                FunctionRef::Inline(f) => f.clone().validated(),
                FunctionRef::Name(n) => self
                    .functions
                    .get(n)
                    .cloned()
                    .ok_or_else(|| Error::Config(format!("unknown function `{n}`")))?
                    .validated(),
            }
        };
        let req = MatrixElementRequest {
            field: self.field.validated()?,
            bra: self.bra.iter().map(get).collect::<Result<_>>()?,
            left: get(&self.left)?,
            right: get(&self.right)?,
            ket: self.ket.iter().map(get).collect::<Result<_>>()?,
            sign: self.sign,
            theta: self.theta.clone(),
            tags: self.tags,
            bra_tag: self.bra_tag,
            quad: self.quad.clone(),
        };
        req.validate()?;
        Ok(req)
    }

    fn from_request(req: &MatrixElementRequest) -> Self {
        let mut functions = BTreeMap::new();
        let mut name = |prefix: &str, i: usize, f: &TestFunction| {
            let key = format!("{prefix}{i}");
            functions.insert(key.clone(), f.clone());
            FunctionRef::Name(key)
        };
        let bra = req.bra.iter().enumerate().map(|(i, f)| name("h", i + 1, f)).collect();
        let left = name("f", 1, &req.left);
        let right = name("f", 2, &req.right);
        let ket = req.ket.iter().enumerate().map(|(i, f)| name("g", i + 1, f)).collect();
        Self {
            field: req.field,
            functions,
            bra,
            left,
            right,
            ket,
            sign: req.sign,
            theta: req.theta.clone(),
            tags: req.tags,
            bra_tag: req.bra_tag,
            quad: req.quad.clone(),
        }
    }
}
