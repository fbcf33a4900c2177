//! JSON input formats: systems, chains, elements and center-valued functions.

use std::collections::BTreeMap;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraElement, BlockShape, TracialState};
use crate::crossed_product::{CrossedElement, CrossedProduct};
use crate::group::{FiniteGroup, ScalarPDFunction};
use crate::haagerup::CenterValuedPDFunction;
use crate::inductive_limit::{Chain, ChainStage, Embedding};
use crate::linalg::{CMatrix, C64};
use crate::partial_action::{w1, PartialAction, PartialMap};
use crate::random::{self, Budget};

/// A problem with the input files, reported with exit code 2.
#[derive(Debug)]
pub struct InputError(pub String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<crate::Error> for InputError {
    fn from(e: crate::Error) -> Self {
        InputError(e.to_string())
    }
}

pub type InputResult<T> = std::result::Result<T, InputError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
pub enum Preset {
    /// ℤ₂ on ℂ ⊕ ℂ, `D_g` the second summand.
    #[serde(rename = "W1")]
    #[value(name = "W1", alias = "w1")]
    W1,
    /// Trivial group on ℂ.
    #[serde(rename = "trivial")]
    #[value(name = "trivial")]
    Trivial,
    /// ℤ₃ cycling three points, restricted to the first two.
    #[serde(rename = "restriction-example")]
    #[value(name = "restriction-example")]
    RestrictionExample,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum GroupSpec {
    Trivial,
    Cyclic(usize),
    Symmetric(usize),
    Dihedral(usize),
    Product(Box<GroupSpec>, Box<GroupSpec>),
    /// Cayley table, `table[a][b] = ab`.
    Table(Vec<Vec<usize>>),
}

impl GroupSpec {
    pub fn build(&self) -> crate::Result<FiniteGroup> {
        Ok(match self {
            GroupSpec::Trivial => FiniteGroup::trivial(),
            GroupSpec::Cyclic(n) => {
                if *n == 0 {
                    return Err(crate::Error::InvalidGroup(vec![crate::group::GroupViolation::Empty]));
                }
                FiniteGroup::cyclic(*n)
            }
            GroupSpec::Symmetric(n) => FiniteGroup::symmetric(*n)?,
            GroupSpec::Dihedral(n) => FiniteGroup::dihedral(*n)?,
            GroupSpec::Product(a, b) => FiniteGroup::direct_product(&a.build()?, &b.build()?),
            GroupSpec::Table(t) => FiniteGroup::from_table(t.clone())?,
        })
    }
}

/// Rows of `[re, im]` pairs.
pub type MatrixJson = Vec<Vec<Scalar>>;

fn matrix_from_json(m: &MatrixJson) -> InputResult<CMatrix> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    if m.iter().any(|r| r.len() != cols) {
        return Err(InputError("matrix rows have different lengths".into()));
    }
    Ok(CMatrix::from_fn(rows, cols, |i, j| m[i][j].value()))
}

pub fn matrix_to_json(m: &CMatrix) -> MatrixJson {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| Scalar::from(m[(i, j)])).collect()).collect()
}

/// `α_g` as a block bijection `domain[k] → targets[k]` with unitaries
/// (identity when omitted).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapRecord {
    pub g: usize,
    pub domain: Vec<usize>,
    pub targets: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unitaries: Option<Vec<MatrixJson>>,
}

/// A global action by block permutations, optionally restricted to a block subset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GlobalSpec {
    /// `perms[g][i]` is the image block of block `i`.
    pub perms: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unitaries: Option<Vec<Vec<MatrixJson>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restrict_to: Option<Vec<usize>>,
}

/// A partial dynamical system with a trace. Either `preset` alone (with
/// optional `weights`), or `group`, `shape`, `weights` and one of `action`
/// or `global`. `shape` and `weights` refer to the ambient algebra when
/// `global.restrict_to` is given. Weights are rescaled so that `τ(1) = 1`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemDescription {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<GroupSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shape: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action: Option<Vec<MapRecord>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub global: Option<GlobalSpec>,
}

/// A materialized system. The group is `Err` when the table fails the group
/// axioms, so that `validate` can report the violations.
pub struct System {
    pub description: SystemDescription,
    pub group: std::result::Result<FiniteGroup, Vec<crate::group::GroupViolation>>,
    pub action: Option<PartialAction>,
    pub trace: TracialState,
}

impl SystemDescription {
    pub fn preset(p: Preset) -> Self {
        SystemDescription {
            preset: Some(p),
            ..Default::default()
        }
    }

    /// Replaces a preset by its explicit form.
    pub fn expand(&self) -> InputResult<SystemDescription> {
        let Some(p) = self.preset else {
            return Ok(self.clone());
        };
        if self.group.is_some() || self.shape.is_some() || self.action.is_some() || self.global.is_some() {
            return Err(InputError("a preset cannot be combined with group, shape, action or global".into()));
        }
        let mut out = match p {
            Preset::W1 => describe(&w1(), &[0.5, 0.5]),
            Preset::Trivial => SystemDescription {
                group: Some(GroupSpec::Trivial),
                shape: Some(vec![1]),
                weights: Some(vec![1.0]),
                action: Some(vec![]),
                ..Default::default()
            },
            Preset::RestrictionExample => SystemDescription {
                group: Some(GroupSpec::Cyclic(3)),
                shape: Some(vec![1, 1, 1]),
                weights: Some(vec![1.0, 1.0, 1.0]),
                global: Some(GlobalSpec {
                    perms: vec![vec![0, 1, 2], vec![1, 2, 0], vec![2, 0, 1]],
                    unitaries: None,
                    restrict_to: Some(vec![0, 1]),
                }),
                ..Default::default()
            },
        };
        if let Some(w) = &self.weights {
            out.weights = Some(w.clone());
        }
        Ok(out)
    }

    pub fn materialize(&self) -> InputResult<System> {
        let d = self.expand()?;
        let group_spec = d.group.as_ref().ok_or_else(|| InputError("missing field `group`".into()))?;
        let dims = d.shape.clone().ok_or_else(|| InputError("missing field `shape`".into()))?;
        let shape = BlockShape::new(dims)?;
        let weights = d.weights.clone().ok_or_else(|| InputError("missing field `weights`".into()))?;
        let group = match group_spec.build() {
            Ok(g) => Ok(g),
            Err(crate::Error::InvalidGroup(v)) => Err(v),
            Err(e) => return Err(e.into()),
        };
        let (action, shape, weights) = match &group {
            Err(_) => (None, shape, weights),
            Ok(grp) => build_action(&d, grp, shape, weights)?,
        };
        let trace = TracialState::normalized(&shape, weights)?;
        Ok(System {
            description: d,
            group,
            action,
            trace,
        })
    }
}

fn build_action(
    d: &SystemDescription,
    grp: &FiniteGroup,
    shape: BlockShape,
    weights: Vec<f64>,
) -> InputResult<(Option<PartialAction>, BlockShape, Vec<f64>)> {
    if weights.len() != shape.num_blocks() {
        return Err(InputError(format!(
            "expected {} weights, found {}",
            shape.num_blocks(),
            weights.len()
        )));
    }
    match (&d.action, &d.global) {
        (Some(_), Some(_)) => Err(InputError("give either `action` or `global`, not both".into())),
        (None, None) => Err(InputError("missing field `action` or `global`".into())),
        (Some(records), None) => {
            let mut maps: Vec<Option<PartialMap>> = vec![None; grp.order()];
            for r in records {
                if r.g >= grp.order() {
                    return Err(InputError(format!("group element {} out of range", r.g)));
                }
                if maps[r.g].is_some() {
                    return Err(InputError(format!("group element {} listed twice", r.g)));
                }
                if r.domain.len() != r.targets.len() {
                    return Err(InputError(format!("map {}: domain and targets differ in length", r.g)));
                }
                let us = match &r.unitaries {
                    Some(us) => us.iter().map(matrix_from_json).collect::<InputResult<Vec<_>>>()?,
                    None => r
                        .targets
                        .iter()
                        .map(|&j| {
                            let n = shape.dims().get(j).copied().unwrap_or(0);
                            CMatrix::identity(n, n)
                        })
                        .collect(),
                };
                maps[r.g] = Some(PartialMap::new(r.domain.clone(), r.targets.clone(), us)?);
            }
            let e = grp.identity();
            let maps = maps
                .into_iter()
                .enumerate()
                .map(|(g, m)| m.unwrap_or_else(|| if g == e { PartialMap::identity(&shape) } else { PartialMap::empty() }))
                .collect();
            let action = PartialAction::new(grp.clone(), shape.clone(), maps)?;
            Ok((Some(action), shape, weights))
        }
        (None, Some(gs)) => {
            if gs.perms.len() != grp.order() {
                return Err(InputError(format!(
                    "expected {} permutations, found {}",
                    grp.order(),
                    gs.perms.len()
                )));
            }
            let unitaries = match &gs.unitaries {
                Some(per_g) => Some(
                    per_g
                        .iter()
                        .map(|us| us.iter().map(matrix_from_json).collect::<InputResult<Vec<_>>>())
                        .collect::<InputResult<Vec<_>>>()?,
                ),
                None => None,
            };
            let global = PartialAction::global(grp.clone(), shape.clone(), gs.perms.clone(), unitaries)?;
            match &gs.restrict_to {
                None => Ok((Some(global), shape, weights)),
                Some(blocks) => {
                    let r = PartialAction::restrict_global(&global, blocks)?;
                    let w = r.blocks.iter().map(|&b| weights[b]).collect();
                    let s = r.action.shape().clone();
                    Ok((Some(r.action), s, w))
                }
            }
        }
    }
}

/// Explicit description of a system (group as a Cayley table unless trivial or cyclic).
pub fn describe(action: &PartialAction, weights: &[f64]) -> SystemDescription {
    let grp = action.group();
    let cyclic = FiniteGroup::cyclic(grp.order());
    let group = if grp.order() == 1 {
        GroupSpec::Trivial
    } else if grp.table() == cyclic.table() {
        GroupSpec::Cyclic(grp.order())
    } else {
        GroupSpec::Table(grp.table().to_vec())
    };
    let action_records = grp
        .elements()
        .filter(|&g| g != grp.identity())
        .map(|g| {
            let m = action.map(g);
            let trivial = m.unitaries().iter().all(|u| *u == CMatrix::identity(u.nrows(), u.ncols()));
            MapRecord {
                g,
                domain: m.domain().to_vec(),
                targets: m.targets().to_vec(),
                unitaries: (!trivial).then(|| m.unitaries().iter().map(matrix_to_json).collect()),
            }
        })
        .filter(|r| !r.domain.is_empty())
        .collect();
    SystemDescription {
        group: Some(group),
        shape: Some(action.shape().dims().to_vec()),
        weights: Some(weights.to_vec()),
        action: Some(action_records),
        ..Default::default()
    }
}

/// A validated random system with `|G| ≤ max_group_order` and `Σnᵢ ≤ max_fiber`,
/// identical for identical arguments.
pub fn generate_random_system(seed: u64, budget: Budget) -> SystemDescription {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sys = random::random_system(&mut rng, budget);
    describe(&sys.action, sys.trace.weights())
}

/// A crossed-product element: either `{"terms": [{"g", "blocks" | "entries"}]}`
/// (terms for the same `g` are added) or a dense map
/// `{"<g>": [block matrices], ...}` from group elements to coefficients.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum ElementDescription {
    Terms(TermList),
    Dense(BTreeMap<String, Vec<MatrixJson>>),
}

impl<'de> Deserialize<'de> for ElementDescription {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let v = serde_json::Value::deserialize(d)?;
        if v.get("terms").is_some() {
            serde_json::from_value(v).map(ElementDescription::Terms).map_err(D::Error::custom)
        } else {
            serde_json::from_value(v).map(ElementDescription::Dense).map_err(D::Error::custom)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermList {
    pub terms: Vec<TermDescription>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermDescription {
    pub g: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blocks: Option<Vec<MatrixJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entries: Option<Vec<EntryDescription>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntryDescription {
    pub block: usize,
    pub i: usize,
    pub j: usize,
    pub value: Scalar,
}

impl ElementDescription {
    fn terms(&self) -> InputResult<Vec<TermDescription>> {
        match self {
            ElementDescription::Terms(t) => Ok(t.terms.clone()),
            ElementDescription::Dense(m) => m
                .iter()
                .map(|(g, blocks)| {
                    let g = g
                        .trim()
                        .parse()
                        .map_err(|_| InputError(format!("element key {g:?} is not a group element index")))?;
                    Ok(TermDescription {
                        g,
                        blocks: Some(blocks.clone()),
                        entries: None,
                    })
                })
                .collect(),
        }
    }

    pub fn build(&self, cp: &CrossedProduct, tol: f64) -> InputResult<CrossedElement> {
        let shape = cp.shape();
        let mut coeffs = vec![AlgebraElement::zero(shape); cp.group().order()];
        for t in &self.terms()? {
            if t.g >= coeffs.len() {
                return Err(InputError(format!("group element {} out of range", t.g)));
            }
            let mut a = match &t.blocks {
                Some(blocks) => {
                    let bs = blocks.iter().map(matrix_from_json).collect::<InputResult<Vec<_>>>()?;
                    AlgebraElement::from_blocks(shape, bs)?
                }
                None => AlgebraElement::zero(shape),
            };
            for e in t.entries.iter().flatten() {
                if e.block >= shape.num_blocks() || e.i >= shape.dim(e.block) || e.j >= shape.dim(e.block) {
                    return Err(InputError(format!("entry ({}, {}, {}) out of range", e.block, e.i, e.j)));
                }
                a.block_mut(e.block)[(e.i, e.j)] += e.value.value();
            }
            coeffs[t.g] = &coeffs[t.g] + &a;
        }
        Ok(cp.element(coeffs, tol)?)
    }
}

/// A complex number given as a real or as `[re, im]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Real(f64),
    Complex(C64),
}

impl From<C64> for Scalar {
    fn from(z: C64) -> Self {
        if z.im == 0.0 {
            Scalar::Real(z.re)
        } else {
            Scalar::Complex(z)
        }
    }
}

impl Scalar {
    pub fn value(self) -> C64 {
        match self {
            Scalar::Real(x) => C64::new(x, 0.0),
            Scalar::Complex(z) => z,
        }
    }
}

/// Scalar `η` on the group (`h = η·1_g`) or full center values `h(g)_b`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionInput {
    Eta(Vec<Scalar>),
    H(Vec<Vec<Scalar>>),
}

impl FunctionInput {
    pub fn eta(&self, group: &FiniteGroup) -> InputResult<Option<ScalarPDFunction>> {
        match self {
            FunctionInput::Eta(v) => Ok(Some(ScalarPDFunction::new(
                group,
                v.iter().map(|s| s.value()).collect(),
            )?)),
            FunctionInput::H(_) => Ok(None),
        }
    }

    pub fn h(&self, action: &PartialAction, tol: f64) -> InputResult<CenterValuedPDFunction> {
        match self {
            FunctionInput::Eta(_) => {
                let eta = self.eta(action.group())?.expect("scalar input");
                Ok(CenterValuedPDFunction::from_scalar(action, &eta))
            }
            FunctionInput::H(rows) => {
                let values = rows.iter().map(|r| r.iter().map(|s| s.value()).collect()).collect();
                Ok(CenterValuedPDFunction::new(action, values, tol)?)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbeddingDescription {
    /// `multiplicity[target block][source block]`.
    pub multiplicity: Vec<Vec<usize>>,
    /// One unitary per target block; identity when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intertwiners: Option<Vec<MatrixJson>>,
}

/// Stages are systems (with `group` and `action`) or bare algebras with
/// `shape` and `weights` only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainDescription {
    pub stages: Vec<SystemDescription>,
    pub embeddings: Vec<EmbeddingDescription>,
}

impl ChainDescription {
    pub fn build(&self, tol: f64) -> InputResult<Chain> {
        let mut stages = Vec::with_capacity(self.stages.len());
        for s in &self.stages {
            let d = s.expand()?;
            if d.group.is_none() && d.action.is_none() && d.global.is_none() {
                let shape = BlockShape::new(d.shape.clone().ok_or_else(|| InputError("stage without `shape`".into()))?)?;
                let w = d.weights.clone().ok_or_else(|| InputError("stage without `weights`".into()))?;
                let trace = TracialState::normalized(&shape, w)?;
                stages.push(ChainStage::new(shape, trace, None, tol)?);
            } else {
                let sys = d.materialize()?;
                let action = sys
                    .action
                    .ok_or_else(|| InputError("stage group fails the group axioms".into()))?;
                stages.push(ChainStage::new(action.shape().clone(), sys.trace, Some(action), tol)?);
            }
        }
        if self.embeddings.len() + 1 != stages.len() {
            return Err(InputError(format!(
                "{} stages need {} embeddings, found {}",
                stages.len(),
                stages.len().saturating_sub(1),
                self.embeddings.len()
            )));
        }
        let mut embeddings = Vec::with_capacity(self.embeddings.len());
        for (n, e) in self.embeddings.iter().enumerate() {
            let (src, tgt) = (stages[n].shape().clone(), stages[n + 1].shape().clone());
            let emb = match &e.intertwiners {
                None => Embedding::standard(src, tgt, e.multiplicity.clone())?,
                Some(ws) => {
                    let ws = ws.iter().map(matrix_from_json).collect::<InputResult<Vec<_>>>()?;
                    Embedding::new(src, tgt, e.multiplicity.clone(), ws)?
                }
            };
            embeddings.push(emb);
        }
        Ok(Chain::new(stages, embeddings)?)
    }
}

/// W1 amplified `2^n`-fold at stage `n` by `a ↦ I₂ ⊗ a`.
pub fn w1_doubling_chain(stages: usize) -> ChainDescription {
    let mut out = ChainDescription {
        stages: Vec::new(),
        embeddings: Vec::new(),
    };
    let mut action = w1();
    let mut weights = vec![0.5, 0.5];
    for n in 0..stages.max(1) {
        out.stages.push(describe(&action, &weights));
        if n + 1 < stages {
            let ws: Vec<CMatrix> = action
                .shape()
                .dims()
                .iter()
                .map(|&d| CMatrix::identity(2 * d, 2 * d))
                .collect();
            action = random::amplify_action(&action, 2, &ws);
            weights = weights.iter().map(|w| w / 2.0).collect();
            out.embeddings.push(EmbeddingDescription {
                multiplicity: vec![vec![2, 0], vec![0, 2]],
                intertwiners: None,
            });
        }
    }
    out
}

/// Parses JSON from inline text (starting with `{` or `[`) or from a file,
/// reporting the location of syntax and schema errors.
pub fn parse_json<T: serde::de::DeserializeOwned>(arg: &str, what: &str) -> InputResult<T> {
    let trimmed = arg.trim_start();
    let (text, origin) = if trimmed.starts_with('{') || trimmed.starts_with('[') {
        (arg.to_string(), format!("<{what}>"))
    } else {
        let text = std::fs::read_to_string(Path::new(arg))
            .map_err(|e| InputError(format!("{arg}: cannot read {what}: {e}")))?;
        (text, arg.to_string())
    };
    serde_json::from_str(&text).map_err(|e| {
        let msg = e.to_string();
        let msg = msg.split(" at line ").next().unwrap_or(&msg).to_string();
        if e.line() == 0 {
            InputError(format!("{origin}: {msg}"))
        } else {
            InputError(format!("{origin}:{}:{}: {msg}", e.line(), e.column()))
        }
    })
}

pub fn parse_function(arg: &str, scalar: bool) -> InputResult<FunctionInput> {
    if scalar {
        parse_json::<Vec<Scalar>>(arg, "eta").map(FunctionInput::Eta)
    } else {
        parse_json::<Vec<Vec<Scalar>>>(arg, "h").map(FunctionInput::H)
    }
}
