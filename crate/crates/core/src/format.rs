//! Instance files (`pcstar-instance/1`) and JSON output with 17 significant
//! digits.
//!
//! Complex numbers are `[re, im]`, matrices are lists of rows. Product
//! tensors are written densely as `dense[i][j][k]` when small and as a list
//! of `[i, j, k, [re, im]]` entries otherwise; both forms are accepted on
//! read.

use std::collections::BTreeMap;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::Value;

use crate::algebra::{AlgebraBuilder, PartialStarAlgebra, ProductTensor};
use crate::error::{Error, Result};
use crate::instances::{CustomPi, Expected, Instance, TowerSpec};
use crate::linalg::{c, identity, CMat, CVec, C64};
use crate::seminorm::{Mode, RawEvaluator, WitnessedSeminorm};

pub const SCHEMA: &str = "pcstar-instance/1";
const DENSE_LIMIT: usize = 20_000;

type Cx = [f64; 2];
type Matrix = Vec<Vec<Cx>>;

fn cx(z: C64) -> Cx {
    [z.re, z.im]
}

fn from_cx(v: Cx) -> C64 {
    c(v[0], v[1])
}

fn matrix_out(m: &CMat) -> Matrix {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| cx(m[(i, j)])).collect()).collect()
}

fn matrix_in(rows: &Matrix) -> Result<CMat> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != m) {
        return Err(Error::Format("ragged matrix".into()));
    }
    Ok(CMat::from_fn(n, m, |i, j| from_cx(rows[i][j])))
}

#[derive(Serialize, Deserialize)]
struct SectorFile {
    name: String,
    dim: usize,
    star: String,
}

#[derive(Serialize, Deserialize)]
struct ProductFile {
    left: String,
    right: String,
    target: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dense: Option<Vec<Vec<Vec<Cx>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    entries: Option<Vec<(usize, usize, usize, Cx)>>,
}

#[derive(Serialize, Deserialize)]
struct AlgebraFile {
    sectors: Vec<SectorFile>,
    products: Vec<ProductFile>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    star_maps: BTreeMap<String, Matrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    unit: Option<BTreeMap<String, Vec<Cx>>>,
}

#[derive(Serialize, Deserialize)]
struct SeminormFile {
    domain: Vec<String>,
    hilbert_dim: usize,
    witness: BTreeMap<String, Vec<Matrix>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    raw: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct PiFile {
    hilbert_dim: usize,
    images: Vec<Matrix>,
}

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    schema: String,
    name: String,
    params: Value,
    tol: f64,
    algebra: AlgebraFile,
    seminorm: SeminormFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pi: Option<PiFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tower: Option<TowerSpec>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    meta: BTreeMap<String, Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    expected: Option<Expected>,
}

fn algebra_out(alg: &PartialStarAlgebra) -> AlgebraFile {
    let sectors = alg
        .sectors()
        .iter()
        .map(|s| SectorFile {
            name: s.name.clone(),
            dim: s.dim,
            star: alg.sector_name(s.star).to_string(),
        })
        .collect();
    let products = alg
        .table()
        .iter()
        .map(|((s, t), entry)| {
            let tensor = &entry.tensor;
            let (l, r, o) = tensor.shape();
            let mut pf = ProductFile {
                left: alg.sector_name(*s).to_string(),
                right: alg.sector_name(*t).to_string(),
                target: alg.sector_name(entry.target).to_string(),
                dense: None,
                entries: None,
            };
            if l * r * o <= DENSE_LIMIT {
                pf.dense = Some(
                    (0..l)
                        .map(|i| (0..r).map(|j| (0..o).map(|k| cx(tensor.value(i, j, k))).collect()).collect())
                        .collect(),
                );
            } else {
                let mut list = Vec::with_capacity(tensor.nnz());
                for i in 0..l {
                    for j in 0..r {
                        for (k, z) in tensor.get(i, j) {
                            list.push((i, j, *k, cx(*z)));
                        }
                    }
                }
                pf.entries = Some(list);
            }
            pf
        })
        .collect();
    let star_maps = alg
        .sector_ids()
        .filter_map(|s| {
            let m = alg.star_map(s);
            let d = alg.sector(s).dim;
            let id = m.shape() == (d, d) && *m == identity(d);
            (!id).then(|| (alg.sector_name(s).to_string(), matrix_out(m)))
        })
        .collect();
    let unit = alg.unit().map(|u| {
        u.parts()
            .map(|(s, v)| (alg.sector_name(s).to_string(), v.iter().map(|z| cx(*z)).collect()))
            .collect()
    });
    AlgebraFile {
        sectors,
        products,
        star_maps,
        unit,
    }
}

fn algebra_in(f: &AlgebraFile, tol: f64) -> Result<PartialStarAlgebra> {
    let mut b = AlgebraBuilder::new().tol(tol);
    let dims: BTreeMap<&str, usize> = f.sectors.iter().map(|s| (s.name.as_str(), s.dim)).collect();
    for s in &f.sectors {
        b = b.sector(&s.name, s.dim, &s.star);
    }
    let dim_of = |n: &str| {
        dims.get(n)
            .copied()
            .ok_or_else(|| Error::Format(format!("product mentions unknown sector `{n}`")))
    };
    for p in &f.products {
        let (l, r, o) = (dim_of(&p.left)?, dim_of(&p.right)?, dim_of(&p.target)?);
        let tensor = match (&p.dense, &p.entries) {
            (Some(dense), None) => {
                let mut flat = Vec::with_capacity(l * r * o);
                if dense.len() != l || dense.iter().any(|row| row.len() != r || row.iter().any(|v| v.len() != o)) {
                    return Err(Error::Format(format!("tensor {}·{} has the wrong shape", p.left, p.right)));
                }
                for row in dense {
                    for v in row {
                        flat.extend(v.iter().map(|z| from_cx(*z)));
                    }
                }
                ProductTensor::from_dense(l, r, o, &flat)?
            }
            (None, Some(entries)) => {
                let mut t = ProductTensor::zeros(l, r, o);
                for &(i, j, k, z) in entries {
                    if i >= l || j >= r || k >= o {
                        return Err(Error::Format(format!("tensor entry ({i}, {j}, {k}) out of range")));
                    }
                    t.set(i, j, k, from_cx(z));
                }
                t
            }
            _ => {
                return Err(Error::Format(format!(
                    "product {}·{} needs exactly one of `dense` or `entries`",
                    p.left, p.right
                )))
            }
        };
        b = b.product(&p.left, &p.right, &p.target, tensor);
    }
    for (name, m) in &f.star_maps {
        b = b.star_map(name, matrix_in(m)?);
    }
    if let Some(unit) = &f.unit {
        b = b.unit(
            unit.iter()
                .map(|(s, v)| (s.as_str(), CVec::from_iterator(v.len(), v.iter().map(|z| from_cx(*z)))))
                .collect(),
        );
    }
    b.build()
}

fn seminorm_out(alg: &PartialStarAlgebra, p: &WitnessedSeminorm) -> SeminormFile {
    let mut witness: BTreeMap<String, Vec<Matrix>> = BTreeMap::new();
    for (i, g) in p.basis().iter().enumerate() {
        let (s, _) = alg.locate(*g);
        witness
            .entry(alg.sector_name(s).to_string())
            .or_default()
            .push(matrix_out(p.witness_image(i)));
    }
    SeminormFile {
        domain: p.domain().iter().map(|s| alg.sector_name(*s).to_string()).collect(),
        hilbert_dim: p.hilbert_dim(),
        witness,
        raw: match p.mode() {
            Mode::Witnessed => None,
            Mode::Raw(e) => Some(e.name()),
        },
    }
}

fn seminorm_in(alg: &PartialStarAlgebra, f: &SeminormFile) -> Result<WitnessedSeminorm> {
    if f.domain.is_empty() {
        return Ok(WitnessedSeminorm::zero());
    }
    let witness = f
        .witness
        .iter()
        .map(|(s, ms)| Ok((s.as_str(), ms.iter().map(matrix_in).collect::<Result<Vec<_>>>()?)))
        .collect::<Result<Vec<_>>>()?;
    let domain: Vec<&str> = f.domain.iter().map(String::as_str).collect();
    let p = WitnessedSeminorm::new(alg, &domain, f.hilbert_dim, witness)?;
    Ok(match &f.raw {
        Some(name) => p.with_raw(RawEvaluator::parse(name)?),
        None => p,
    })
}

/// Serialize an instance to compact JSON.
pub fn instance_to_json(inst: &Instance) -> Result<String> {
    let alg = &inst.algebra;
    if let Mode::Raw(RawEvaluator::Custom(name, _)) = inst.seminorm.mode() {
        return Err(Error::Unsupported(format!("custom raw evaluator `{name}` cannot be serialized")));
    }
    let file = InstanceFile {
        schema: SCHEMA.to_string(),
        name: inst.name.clone(),
        params: inst.params.clone(),
        tol: alg.tol(),
        algebra: algebra_out(alg),
        seminorm: seminorm_out(alg, &inst.seminorm),
        pi: inst.pi.as_ref().map(|pi| PiFile {
            hilbert_dim: pi.hilbert_dim,
            images: pi.images.iter().map(matrix_out).collect(),
        }),
        tower: inst.tower.clone(),
        meta: inst.meta.clone(),
        expected: inst.expected.clone(),
    };
    to_json_compact(&file)
}

pub fn instance_from_json(s: &str) -> Result<Instance> {
    let file: InstanceFile = serde_json::from_str(s).map_err(|e| Error::Format(e.to_string()))?;
    if file.schema != SCHEMA {
        return Err(Error::Format(format!("unsupported schema `{}`", file.schema)));
    }
    let algebra = algebra_in(&file.algebra, file.tol)?;
    let seminorm = seminorm_in(&algebra, &file.seminorm)?;
    let pi = file
        .pi
        .map(|pi| {
            Ok::<_, Error>(CustomPi {
                hilbert_dim: pi.hilbert_dim,
                images: pi.images.iter().map(matrix_in).collect::<Result<_>>()?,
            })
        })
        .transpose()?;
    Ok(Instance {
        name: file.name,
        params: file.params,
        algebra,
        seminorm,
        pi,
        tower: file.tower,
        meta: file.meta,
        expected: file.expected,
    })
}

pub fn read_instance(path: &Path) -> Result<Instance> {
    let s = std::fs::read_to_string(path).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    instance_from_json(&s)
}

pub fn write_instance(inst: &Instance, path: &Path) -> Result<()> {
    std::fs::write(path, instance_to_json(inst)?).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

fn write_f64_17<W: ?Sized + io::Write>(w: &mut W, v: f64) -> io::Result<()> {
    write!(w, "{v:.16e}")
}

/// Compact output with 17 significant digits.
#[derive(Default)]
pub struct Digits17;

impl Formatter for Digits17 {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        write_f64_17(w, v)
    }
}

/// Indented output with 17 significant digits.
pub struct PrettyDigits17<'a>(PrettyFormatter<'a>);

impl Default for PrettyDigits17<'_> {
    fn default() -> Self {
        PrettyDigits17(PrettyFormatter::new())
    }
}

impl Formatter for PrettyDigits17<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        write_f64_17(w, v)
    }
    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

fn serialize_with<T: Serialize, F: Formatter>(value: &T, fmt: F) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, fmt);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

pub fn to_json_compact<T: Serialize>(value: &T) -> Result<String> {
    serialize_with(value, Digits17)
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> Result<String> {
    serialize_with(value, PrettyDigits17::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{build_fixtures, cq_spectral, weighted_diagonal};

    #[test]
    fn floats_have_17_digits() {
        let s = to_json_compact(&vec![0.1, 1.0 / 3.0, f64::NAN]).unwrap();
        assert_eq!(s, "[1.0000000000000001e-1,3.3333333333333331e-1,null]");
        let back: Vec<Option<f64>> = serde_json::from_str(&s).unwrap();
        assert_eq!(back[1], Some(1.0 / 3.0));
    }

    #[test]
    fn instance_round_trip_is_byte_stable() {
        let mut all = build_fixtures();
        all.push(weighted_diagonal(3, 5, 2.0).unwrap());
        all.push(cq_spectral(&[1, 1, 2], &[1.0, 2.0, 4.0], None).unwrap());
        for inst in all {
            let a = instance_to_json(&inst).unwrap();
            let back = instance_from_json(&a).unwrap();
            assert_eq!(back.algebra, inst.algebra, "{}", inst.name);
            let b = instance_to_json(&back).unwrap();
            assert_eq!(a, b, "{}", inst.name);
        }
    }

    #[test]
    fn sparse_tensor_form_is_accepted() {
        let inst = weighted_diagonal(2, 1, 2.0).unwrap();
        let mut v: Value = serde_json::from_str(&instance_to_json(&inst).unwrap()).unwrap();
        for p in v["algebra"]["products"].as_array_mut().unwrap() {
            let dense = p["dense"].take();
            let mut entries = Vec::new();
            for (i, row) in dense.as_array().unwrap().iter().enumerate() {
                for (j, col) in row.as_array().unwrap().iter().enumerate() {
                    for (k, z) in col.as_array().unwrap().iter().enumerate() {
                        if z[0].as_f64() != Some(0.0) {
                            entries.push(serde_json::json!([i, j, k, z]));
                        }
                    }
                }
            }
            p.as_object_mut().unwrap().remove("dense");
            p["entries"] = Value::Array(entries);
        }
        let back = instance_from_json(&v.to_string()).unwrap();
        assert_eq!(back.algebra, inst.algebra);
    }

    #[test]
    fn wrong_schema_is_rejected() {
        let inst = weighted_diagonal(1, 1, 2.0).unwrap();
        let s = instance_to_json(&inst).unwrap().replace(SCHEMA, "other/9");
        assert!(matches!(instance_from_json(&s), Err(Error::Format(_))));
    }
}
