//! File formats: models, schemes, reports and CSV curves.
//!
//! All JSON documents carry a `version`. Matrices over prime fields are
//! row-major grids of integers; matrices over extension fields store each
//! entry as its coefficient vector in the basis `1, x, ..., x^{k-1}` of the
//! field recorded in the header.

use std::io::Write;
use std::path::Path;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::classical::{BlockSwap, JointPmf};
use crate::entropy::EntropyValue;
use crate::error::{invalid, Error, Result};
use crate::field::FieldContext;
use crate::fls::{FlsModel, TwoUserAnalysis};
use crate::matrix::MatrixGf;
use crate::scheme::{CommScheme, KeyCheck, Verification};
use crate::treepin::{RcoMethod, Reduction, TreePinAnalysis, TreePinModel};

pub const FORMAT_VERSION: u32 = 1;

/// The four-user path example over F_2 with `W = [1, 1, 1]^T`.
pub const MOTIVATING_MODEL: &str = include_str!("../data/motivating.json");
/// An `n = 2` scheme for [`MOTIVATING_MODEL`] over F_4.
pub const MOTIVATING_SCHEME: &str = include_str!("../data/motivating_scheme.json");

fn check_version(v: u32) -> Result<()> {
    if v != FORMAT_VERSION {
        return Err(Error::Parse(format!("unsupported format version {v}")));
    }
    Ok(())
}

fn parse_err(e: serde_json::Error) -> Error {
    Error::Parse(e.to_string())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeSpec {
    pub u: usize,
    pub v: usize,
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreePinFile {
    pub version: u32,
    pub q: u64,
    pub vertices: usize,
    pub edges: Vec<EdgeSpec>,
    /// `sum n_e` rows; an empty list means no wiretapper.
    pub wiretap: Vec<Vec<u64>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlsFile {
    pub version: u32,
    pub q: u64,
    pub l: usize,
    /// One `l`-row grid per user.
    pub users: Vec<Vec<Vec<u64>>>,
    pub wiretap: Vec<Vec<u64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PmfFile {
    pub version: u32,
    pub user_alphabets: Vec<Vec<String>>,
    pub wiretap_alphabet: Vec<String>,
    /// Row-major over `(z_1, ..., z_m, z_w)`, wiretapper fastest.
    pub probabilities: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ModelFile {
    TreePin(TreePinFile),
    Fls(FlsFile),
    Pmf(PmfFile),
}

#[derive(Clone, Debug)]
pub enum Model {
    TreePin(TreePinModel),
    Fls(FlsModel),
    Pmf(JointPmf),
}

fn grid_matrix(ctx: &FieldContext, rows: usize, grid: &[Vec<u64>], what: &str) -> Result<MatrixGf> {
    if grid.is_empty() {
        return Ok(MatrixGf::zeros(ctx, rows, 0));
    }
    if grid.len() != rows {
        return invalid(format!("{what} has {} rows, expected {rows}", grid.len()));
    }
    MatrixGf::from_rows(ctx, grid)
}

fn matrix_grid(m: &MatrixGf) -> Vec<Vec<u64>> {
    m.to_code_rows().into_iter().map(|r| r.into_iter().map(|c| c as u64).collect()).collect()
}

impl ModelFile {
    pub fn into_model(self) -> Result<Model> {
        match self {
            ModelFile::TreePin(f) => {
                check_version(f.version)?;
                let ctx = FieldContext::prime(f.q)?;
                let l: usize = f.edges.iter().map(|e| e.n).sum();
                let w = grid_matrix(&ctx, l, &f.wiretap, "wiretap")?;
                let edges = f.edges.iter().map(|e| (e.u, e.v)).collect();
                let mult = f.edges.iter().map(|e| e.n).collect();
                Ok(Model::TreePin(TreePinModel::new(&ctx, f.vertices, edges, mult, w)?))
            }
            ModelFile::Fls(f) => {
                check_version(f.version)?;
                let ctx = FieldContext::prime(f.q)?;
                let users = f
                    .users
                    .iter()
                    .enumerate()
                    .map(|(i, g)| grid_matrix(&ctx, f.l, g, &format!("user {i}")))
                    .collect::<Result<Vec<_>>>()?;
                let w = grid_matrix(&ctx, f.l, &f.wiretap, "wiretap")?;
                Ok(Model::Fls(FlsModel::new(&ctx, users, w)?))
            }
            ModelFile::Pmf(f) => {
                check_version(f.version)?;
                Ok(Model::Pmf(JointPmf::new(f.user_alphabets, f.wiretap_alphabet, f.probabilities)?))
            }
        }
    }
}

impl Model {
    pub fn to_file(&self) -> ModelFile {
        match self {
            Model::TreePin(m) => ModelFile::TreePin(tree_pin_file(m)),
            Model::Fls(m) => ModelFile::Fls(FlsFile {
                version: FORMAT_VERSION,
                q: m.q(),
                l: m.l(),
                users: m.users().iter().map(matrix_grid).collect(),
                wiretap: matrix_grid(m.wiretap()),
            }),
            Model::Pmf(p) => ModelFile::Pmf(PmfFile {
                version: FORMAT_VERSION,
                user_alphabets: p.user_labels().to_vec(),
                wiretap_alphabet: p.wiretap_labels().to_vec(),
                probabilities: p.probs().to_vec(),
            }),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Model::TreePin(_) => "tree-pin",
            Model::Fls(_) => "fls",
            Model::Pmf(_) => "pmf",
        }
    }

    /// The linear source behind a tree-PIN or FLS model.
    pub fn linear(&self) -> Result<FlsModel> {
        match self {
            Model::TreePin(m) => Ok(m.compile()),
            Model::Fls(m) => Ok(m.clone()),
            Model::Pmf(_) => invalid("a linear source model is required"),
        }
    }
}

pub fn tree_pin_file(m: &TreePinModel) -> TreePinFile {
    let wiretap = if m.wiretap_dim() == 0 { Vec::new() } else { matrix_grid(m.wiretap()) };
    TreePinFile {
        version: FORMAT_VERSION,
        q: m.q(),
        vertices: m.vertices(),
        edges: m.edges().iter().zip(m.multiplicities()).map(|(&(u, v), &n)| EdgeSpec { u, v, n }).collect(),
        wiretap,
    }
}

pub fn parse_model(text: &str) -> Result<Model> {
    let f: ModelFile = serde_json::from_str(text).map_err(parse_err)?;
    f.into_model()
}

pub fn load_model(path: &Path) -> Result<Model> {
    parse_model(&read(path)?)
}

pub fn model_to_json(m: &Model) -> String {
    to_json(&m.to_file())
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| io_err(path, e))
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| io_err(path, e))
}

/// Lowercase hex SHA-256.
pub fn digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

// ---------------------------------------------------------------------------
// schemes

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldHeader {
    pub p: u64,
    pub degree: usize,
    /// Monic modulus, little-endian.
    pub modulus: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    pub rows: usize,
    pub cols: usize,
    /// `rows x cols` coefficient vectors.
    pub entries: Vec<Vec<Vec<u64>>>,
}

impl MatrixFile {
    pub fn from_matrix(m: &MatrixGf) -> Result<Self> {
        let ctx = m.ctx();
        let mut entries = Vec::with_capacity(m.rows());
        for i in 0..m.rows() {
            let row = (0..m.cols()).map(|j| ctx.coeffs(m.get(i, j))).collect::<Result<Vec<_>>>()?;
            entries.push(row);
        }
        Ok(MatrixFile { rows: m.rows(), cols: m.cols(), entries })
    }

    pub fn to_matrix(&self, ctx: &FieldContext) -> Result<MatrixGf> {
        if self.entries.len() != self.rows || self.entries.iter().any(|r| r.len() != self.cols) {
            return Err(Error::Parse("matrix entries do not match its shape".into()));
        }
        let mut codes = Vec::with_capacity(self.rows * self.cols);
        for row in &self.entries {
            for c in row {
                codes.push(ctx.from_coeffs(c)?.code());
            }
        }
        MatrixGf::from_codes(ctx, self.rows, self.cols, codes)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeFile {
    pub version: u32,
    pub field: FieldHeader,
    pub n: usize,
    pub comm: MatrixFile,
    pub senders: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub key: Option<MatrixFile>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub recovery: Vec<MatrixFile>,
}

pub fn scheme_file(s: &CommScheme) -> Result<SchemeFile> {
    Ok(SchemeFile {
        version: FORMAT_VERSION,
        field: FieldHeader { p: s.ext.characteristic(), degree: s.ext.degree(), modulus: s.ext.modulus().to_vec() },
        n: s.n,
        comm: MatrixFile::from_matrix(&s.comm)?,
        senders: s.senders.clone(),
        key: s.key.as_ref().map(MatrixFile::from_matrix).transpose()?,
        recovery: s.recovery.iter().map(MatrixFile::from_matrix).collect::<Result<_>>()?,
    })
}

impl SchemeFile {
    pub fn into_scheme(self) -> Result<CommScheme> {
        check_version(self.version)?;
        if self.field.modulus.len() != self.field.degree + 1 {
            return Err(Error::Parse("modulus length does not match the degree".into()));
        }
        let ext = FieldContext::with_modulus(self.field.p, &self.field.modulus)?;
        let comm = self.comm.to_matrix(&ext)?;
        let key = self.key.as_ref().map(|k| k.to_matrix(&ext)).transpose()?;
        let mut s = CommScheme::new(ext.clone(), self.n, comm, self.senders, key)?;
        s.recovery = self.recovery.iter().map(|r| r.to_matrix(&ext)).collect::<Result<_>>()?;
        Ok(s)
    }
}

pub fn parse_scheme(text: &str) -> Result<CommScheme> {
    let f: SchemeFile = serde_json::from_str(text).map_err(parse_err)?;
    f.into_scheme()
}

pub fn load_scheme(path: &Path) -> Result<CommScheme> {
    parse_scheme(&read(path)?)
}

pub fn scheme_to_json(s: &CommScheme) -> Result<String> {
    Ok(to_json(&scheme_file(s)?))
}

// ---------------------------------------------------------------------------
// reports

/// Envelope shared by every report.
#[derive(Clone, Debug, Serialize)]
pub struct ReportFile<T: Serialize> {
    pub version: u32,
    pub command: String,
    /// SHA-256 of each input file, in argument order.
    pub inputs: Vec<String>,
    pub seed: Option<u64>,
    pub result: T,
}

impl<T: Serialize> ReportFile<T> {
    pub fn new(command: &str, inputs: &[&[u8]], seed: Option<u64>, result: T) -> Self {
        ReportFile {
            version: FORMAT_VERSION,
            command: command.to_string(),
            inputs: inputs.iter().map(|b| digest(b)).collect(),
            seed,
            result,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TreePinReport {
    pub c_w: EntropyValue,
    pub c_s: EntropyValue,
    pub r_l: EntropyValue,
    pub r_co: EntropyValue,
    pub r_co_method: RcoMethod,
    pub h_zv_given_zw: EntropyValue,
    pub per_edge: Vec<EntropyValue>,
    pub overlaps: Vec<usize>,
    pub irreducible: bool,
    pub reduced_multiplicities: Vec<usize>,
    pub reduced_wiretap_dim: usize,
    pub wiretap_dim_bound_holds: bool,
}

impl From<&TreePinAnalysis> for TreePinReport {
    fn from(a: &TreePinAnalysis) -> Self {
        TreePinReport {
            c_w: a.c_w,
            c_s: a.c_s,
            r_l: a.r_l,
            r_co: a.r_co,
            r_co_method: a.rco_method,
            h_zv_given_zw: a.h_zv_given_zw,
            per_edge: a.per_edge.clone(),
            overlaps: a.overlaps.clone(),
            irreducible: a.irreducible,
            reduced_multiplicities: a.reduced_multiplicities.clone(),
            reduced_wiretap_dim: a.reduced_wiretap_dim,
            wiretap_dim_bound_holds: a.wiretap_dim_bound_holds,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TwoUserReport {
    pub c_w: EntropyValue,
    /// Values from `G1`, `G2` and `(G1, G2)`.
    pub c_w_candidates: [EntropyValue; 3],
    pub r_l: EntropyValue,
    pub r_co: EntropyValue,
    pub h_zv_given_zw: EntropyValue,
    pub g1: Vec<Vec<u64>>,
    pub g2: Vec<Vec<u64>>,
}

impl From<&TwoUserAnalysis> for TwoUserReport {
    fn from(a: &TwoUserAnalysis) -> Self {
        TwoUserReport {
            c_w: a.c_w,
            c_w_candidates: a.c_w_candidates,
            r_l: a.r_l,
            r_co: a.r_co,
            h_zv_given_zw: a.h_zv_given_zw,
            g1: matrix_grid(&a.g1),
            g2: matrix_grid(&a.g2),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct KeyReport {
    pub rate: EntropyValue,
    pub recoverable: Vec<bool>,
    pub secret: bool,
    pub uniform: bool,
}

impl From<&KeyCheck> for KeyReport {
    fn from(k: &KeyCheck) -> Self {
        KeyReport { rate: k.rate, recoverable: k.recoverable.clone(), secret: k.secret, uniform: k.uniform }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub omniscience: bool,
    pub omniscience_per_user: Vec<bool>,
    pub alignment: bool,
    pub senders_consistent: bool,
    pub leakage: EntropyValue,
    pub comm_rate: EntropyValue,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub key: Option<KeyReport>,
}

impl From<&Verification> for VerificationReport {
    fn from(v: &Verification) -> Self {
        VerificationReport {
            omniscience: v.omniscient(),
            omniscience_per_user: v.omniscience.clone(),
            alignment: v.alignment,
            senders_consistent: v.senders_consistent,
            leakage: v.leakage,
            comm_rate: v.comm_rate,
            key: v.key.as_ref().map(KeyReport::from),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ReductionStepReport {
    pub edge: usize,
    pub removed: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReductionReport {
    pub steps: Vec<ReductionStepReport>,
    pub model: TreePinFile,
    /// Reduced base vector in terms of the original: `X~ = X * base_map`.
    pub base_map: Vec<Vec<u64>>,
}

impl From<&Reduction> for ReductionReport {
    fn from(r: &Reduction) -> Self {
        ReductionReport {
            steps: r.steps.iter().map(|s| ReductionStepReport { edge: s.edge, removed: s.removed }).collect(),
            model: tree_pin_file(&r.model),
            base_map: matrix_grid(&r.base_map),
        }
    }
}

// ---------------------------------------------------------------------------
// CSV curves

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e.to_string()))
}

/// Columns `q,f(q)`.
pub fn write_f_curve_csv<W: Write>(out: W, samples: &[(f64, f64)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["q", "f(q)"]).map_err(csv_err)?;
    for (q, f) in samples {
        w.write_record([q.to_string(), f.to_string()]).map_err(csv_err)?;
    }
    Ok(w.flush()?)
}

/// Columns `R,C_W(R)` in bits, then the exact values as multiples of
/// `log2 q`.
pub fn write_capacity_csv<W: Write>(out: W, points: &[(Ratio<i64>, EntropyValue)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["R", "C_W(R)", "R_units", "C_W_units", "log_base"]).map_err(csv_err)?;
    for (r, c) in points {
        let r_bits = EntropyValue::from_ratio(*r, c.log_base()).bits();
        w.write_record([
            r_bits.to_string(),
            c.bits().to_string(),
            r.to_string(),
            c.units().to_string(),
            c.log_base().to_string(),
        ])
        .map_err(csv_err)?;
    }
    Ok(w.flush()?)
}

/// Columns `n,lhs,rhs,q1`.
pub fn write_block_swap_csv<W: Write>(out: W, rows: &[BlockSwap]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "lhs", "rhs", "q1"]).map_err(csv_err)?;
    for b in rows {
        w.write_record([b.n.to_string(), b.lhs.to_string(), b.rhs.to_string(), b.q1.to_string()])
            .map_err(csv_err)?;
    }
    Ok(w.flush()?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_model_loads() {
        let Model::TreePin(m) = parse_model(MOTIVATING_MODEL).unwrap() else { panic!("kind") };
        assert_eq!(m.vertices(), 4);
        assert_eq!(m.wiretap_dim(), 1);
        assert_eq!(model_to_json(&Model::TreePin(m)), MOTIVATING_MODEL);
    }

    #[test]
    fn bundled_scheme_round_trips() {
        let s = parse_scheme(MOTIVATING_SCHEME).unwrap();
        assert_eq!(s.n, 2);
        assert_eq!(scheme_to_json(&s).unwrap(), MOTIVATING_SCHEME);
    }

    #[test]
    fn unknown_kind_rejected() {
        assert!(parse_model(r#"{"kind":"graph","version":1}"#).is_err());
    }

    #[test]
    fn bad_probabilities_rejected() {
        let t = r#"{"kind":"pmf","version":1,"user_alphabets":[["0","1"],["0"]],"wiretap_alphabet":["e"],"probabilities":[0.5,0.6]}"#;
        assert!(parse_model(t).is_err());
    }
}
