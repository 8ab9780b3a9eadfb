//! Task file schema and its conversion into library types.

use std::collections::BTreeMap;

use kflow::linalg::{c, CMat};
use kflow::{Block, BlockOperator, Error, OperatorPath, Tolerances, VnAlgebra};
use serde::{Deserialize, Serialize};

/// A matrix entry: `[re, im]` or a bare real number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Complex([f64; 2]),
    Real(f64),
}

impl Entry {
    fn value(self) -> kflow::linalg::C64 {
        match self {
            Entry::Complex([re, im]) => c(re, im),
            Entry::Real(re) => c(re, 0.0),
        }
    }
}

/// One matrix per block, each a list of rows.
pub type BlockMatrices = Vec<Vec<Vec<Entry>>>;

/// Either the name of an entry in `operators` or an inline operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OpRef {
    Name(String),
    Inline(BlockMatrices),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockSpec {
    pub dim: usize,
    #[serde(default = "unit_weight")]
    pub weight: f64,
    pub ideal: bool,
}

fn unit_weight() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgebraSpec {
    pub blocks: Vec<BlockSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Keyframe {
    pub t: f64,
    pub op: OpRef,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSpec {
    pub keyframes: Vec<Keyframe>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub projection: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernel: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zero: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub intersection: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub partition_margin: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_depth: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub check_depth: Option<u32>,
}

impl ToleranceSpec {
    pub fn resolve(&self) -> Result<Tolerances, Error> {
        let d = Tolerances::default();
        let tol = Tolerances {
            projection: self.projection.unwrap_or(d.projection),
            kernel: self.kernel.unwrap_or(d.kernel),
            zero: self.zero.unwrap_or(d.zero),
            gap: self.gap.unwrap_or(d.gap),
            intersection: self.intersection.unwrap_or(d.intersection),
            partition_margin: self.partition_margin.unwrap_or(d.partition_margin),
            max_depth: self.max_depth.unwrap_or(d.max_depth),
            check_depth: self.check_depth.unwrap_or(d.check_depth),
        };
        let positive = [tol.projection, tol.kernel, tol.zero, tol.gap, tol.intersection];
        if positive.iter().any(|x| !x.is_finite() || *x <= 0.0) {
            return Err(Error::Model("tolerances must be positive and finite".into()));
        }
        if !(0.0..0.5).contains(&tol.partition_margin) {
            return Err(Error::Model("partition_margin must lie in [0, 1/2)".into()));
        }
        Ok(tol)
    }
}

/// `ψ` for pairing tasks: `"identity"` or `{"conjugation": op}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PsiSpec {
    Identity,
    Conjugation(OpRef),
}

/// Generators of the algebra of a triple: a list of operator names or a
/// map from generator name to operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GeneratorSpec {
    Names(Vec<String>),
    Named(BTreeMap<String, OpRef>),
}

impl GeneratorSpec {
    pub fn entries(&self) -> Vec<(String, OpRef)> {
        match self {
            GeneratorSpec::Names(names) => names.iter().map(|n| (n.clone(), OpRef::Name(n.clone()))).collect(),
            GeneratorSpec::Named(map) => map.iter().map(|(n, r)| (n.clone(), r.clone())).collect(),
        }
    }
}

/// Generator parameters embedded in a task file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum GenerateSpec {
    Dirac {
        m: usize,
        k: i64,
    },
    Crossing {
        n: usize,
        crossings: Vec<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        weight: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    SpectralFlow,
    SfUnitary,
    SfUnbounded,
    Index,
    Boundary,
    Pairing,
    Checks,
    Generate,
}

impl TaskKind {
    pub fn name(self) -> &'static str {
        match self {
            TaskKind::SpectralFlow => "spectral_flow",
            TaskKind::SfUnitary => "sf_unitary",
            TaskKind::SfUnbounded => "sf_unbounded",
            TaskKind::Index => "index",
            TaskKind::Boundary => "boundary",
            TaskKind::Pairing => "pairing",
            TaskKind::Checks => "checks",
            TaskKind::Generate => "generate",
        }
    }
}

/// A complete task file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskFile {
    pub task: TaskKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub algebra: Option<AlgebraSpec>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub operators: BTreeMap<String, BlockMatrices>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathSpec>,
    #[serde(default, skip_serializing_if = "is_default")]
    pub tolerances: ToleranceSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,

    /// Selfadjoint operator of a spectral triple.
    #[serde(default, rename = "D", skip_serializing_if = "Option::is_none")]
    pub dirac: Option<OpRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generators: Option<GeneratorSpec>,
    /// Name of the unitary generator for `sf_unitary` and `pairing`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unitary: Option<OpRef>,
    #[serde(default, rename = "S", skip_serializing_if = "Option::is_none")]
    pub s: Option<OpRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<OpRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<OpRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sub_ideal: Option<Vec<bool>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi: Option<PsiSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generate: Option<GenerateSpec>,
}

fn is_default(t: &ToleranceSpec) -> bool {
    *t == ToleranceSpec::default()
}

impl TaskFile {
    pub fn algebra(&self) -> Result<VnAlgebra, Error> {
        let spec = self
            .algebra
            .as_ref()
            .ok_or_else(|| Error::Model(format!("task {} needs an algebra", self.task.name())))?;
        VnAlgebra::new(spec.blocks.iter().map(|b| Block::new(b.dim, b.weight, b.ideal)).collect())
    }

    pub fn resolve(&self, r: &OpRef, alg: &VnAlgebra) -> Result<BlockOperator, Error> {
        let mats = match r {
            OpRef::Name(name) => self
                .operators
                .get(name)
                .ok_or_else(|| Error::Model(format!("unknown operator {name:?}")))?,
            OpRef::Inline(m) => m,
        };
        operator_from_matrices(mats, alg)
    }

    pub fn require(&self, field: &Option<OpRef>, what: &str, alg: &VnAlgebra) -> Result<BlockOperator, Error> {
        let r = field
            .as_ref()
            .ok_or_else(|| Error::Model(format!("task {} needs field {what:?}", self.task.name())))?;
        self.resolve(r, alg)
    }

    pub fn path(&self, alg: &VnAlgebra) -> Result<OperatorPath, Error> {
        let spec = self
            .path
            .as_ref()
            .ok_or_else(|| Error::Model(format!("task {} needs a path", self.task.name())))?;
        let keyframes = spec
            .keyframes
            .iter()
            .map(|k| Ok((k.t, self.resolve(&k.op, alg)?)))
            .collect::<Result<Vec<_>, Error>>()?;
        OperatorPath::new(keyframes)
    }
}

pub fn operator_from_matrices(mats: &BlockMatrices, alg: &VnAlgebra) -> Result<BlockOperator, Error> {
    let mut blocks = Vec::with_capacity(mats.len());
    for (b, rows) in mats.iter().enumerate() {
        let n = rows.len();
        if let Some((r, row)) = rows.iter().enumerate().find(|(_, row)| row.len() != n) {
            return Err(Error::Shape(format!(
                "block {b} is not square: row {r} has {} entries for {n} rows",
                row.len()
            )));
        }
        blocks.push(CMat::from_fn(n, n, |i, j| rows[i][j].value()));
    }
    BlockOperator::for_algebra(alg, blocks)
}

pub fn matrices_from_operator(op: &BlockOperator) -> BlockMatrices {
    op.blocks()
        .iter()
        .map(|m| {
            (0..m.nrows())
                .map(|i| {
                    (0..m.ncols())
                        .map(|j| {
                            let z = m[(i, j)];
                            if z.im == 0.0 { Entry::Real(z.re) } else { Entry::Complex([z.re, z.im]) }
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

pub fn algebra_spec(alg: &VnAlgebra) -> AlgebraSpec {
    AlgebraSpec {
        blocks: alg
            .blocks()
            .iter()
            .map(|b| BlockSpec { dim: b.dim, weight: b.weight, ideal: b.in_ideal })
            .collect(),
    }
}
