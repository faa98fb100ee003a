//! Sector-graded finite-dimensional partial *-algebras.
//!
//! The carrier is a direct sum of sectors. Each sector has a dimension and an
//! image sector under the involution. Multiplication is given by a partial
//! table on sector pairs: an entry `(s, t) -> (u, tensor)` declares that every
//! element of `s` may multiply every element of `t` and that the product lands
//! in `u`, with coefficients obtained by contracting `tensor`. A missing entry
//! means the product is undefined. For elements supported on several sectors
//! the product is defined iff every sector pair of the supports has an entry
//! (the "model convention" for mixed supports).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{identity, CMat, CVec, C64, ZERO};
use crate::report::Check;

pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SectorId(pub usize);

impl fmt::Display for SectorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sector {
    pub name: String,
    pub dim: usize,
    pub star: SectorId,
}

/// Structure tensor of one table entry, stored sparsely by input pair.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductTensor {
    left_dim: usize,
    right_dim: usize,
    out_dim: usize,
    // entries[i * right_dim + j] = nonzero (k, coefficient) pairs
    entries: Vec<Vec<(usize, C64)>>,
}

impl ProductTensor {
    pub fn zeros(left_dim: usize, right_dim: usize, out_dim: usize) -> Self {
        ProductTensor {
            left_dim,
            right_dim,
            out_dim,
            entries: vec![Vec::new(); left_dim * right_dim],
        }
    }

    /// From a dense array in `(i, j, k)` row-major order.
    pub fn from_dense(left_dim: usize, right_dim: usize, out_dim: usize, data: &[C64]) -> Result<Self> {
        if data.len() != left_dim * right_dim * out_dim {
            return Err(Error::Malformed(format!(
                "tensor has {} entries, expected {}x{}x{}",
                data.len(),
                left_dim,
                right_dim,
                out_dim
            )));
        }
        let mut t = Self::zeros(left_dim, right_dim, out_dim);
        for i in 0..left_dim {
            for j in 0..right_dim {
                for k in 0..out_dim {
                    let v = data[(i * right_dim + j) * out_dim + k];
                    if v != ZERO {
                        t.entries[i * right_dim + j].push((k, v));
                    }
                }
            }
        }
        Ok(t)
    }

    /// Diagonal pointwise product `e_i e_i = w_i e_i`.
    pub fn pointwise(weights: &[C64]) -> Self {
        let n = weights.len();
        let mut t = Self::zeros(n, n, n);
        for (i, &w) in weights.iter().enumerate() {
            if w != ZERO {
                t.entries[i * n + i].push((i, w));
            }
        }
        t
    }

    /// Product of operators given as linear combinations of matrices:
    /// `left[i] * right[j]` expanded in the (linearly independent) `out` basis
    /// through the supplied coordinate map.
    pub fn from_fn(
        left_dim: usize,
        right_dim: usize,
        out_dim: usize,
        mut f: impl FnMut(usize, usize) -> Vec<(usize, C64)>,
    ) -> Self {
        let mut t = Self::zeros(left_dim, right_dim, out_dim);
        for i in 0..left_dim {
            for j in 0..right_dim {
                let mut v: Vec<(usize, C64)> = f(i, j).into_iter().filter(|(_, z)| *z != ZERO).collect();
                v.sort_by_key(|(k, _)| *k);
                t.entries[i * right_dim + j] = v;
            }
        }
        t
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.left_dim, self.right_dim, self.out_dim)
    }

    pub fn get(&self, i: usize, j: usize) -> &[(usize, C64)] {
        &self.entries[i * self.right_dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, value: C64) {
        let slot = &mut self.entries[i * self.right_dim + j];
        slot.retain(|(kk, _)| *kk != k);
        if value != ZERO {
            slot.push((k, value));
            slot.sort_by_key(|(kk, _)| *kk);
        }
    }

    pub fn value(&self, i: usize, j: usize, k: usize) -> C64 {
        self.get(i, j)
            .iter()
            .find(|(kk, _)| *kk == k)
            .map(|(_, v)| *v)
            .unwrap_or(ZERO)
    }

    pub fn nnz(&self) -> usize {
        self.entries.iter().map(Vec::len).sum()
    }

    fn contract(&self, x: &CVec, y: &CVec, out: &mut CVec) {
        for i in 0..self.left_dim {
            let xi = x[i];
            if xi == ZERO {
                continue;
            }
            for j in 0..self.right_dim {
                let yj = y[j];
                if yj == ZERO {
                    continue;
                }
                let s = xi * yj;
                for &(k, v) in self.get(i, j) {
                    out[k] += s * v;
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProductEntry {
    pub target: SectorId,
    pub tensor: ProductTensor,
}

/// Element of a sector-graded algebra, stored sparsely by sector.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Element {
    parts: BTreeMap<SectorId, CVec>,
}

impl Element {
    pub fn zero() -> Self {
        Element::default()
    }

    pub fn from_part(sector: SectorId, coeffs: CVec) -> Self {
        let mut parts = BTreeMap::new();
        parts.insert(sector, coeffs);
        Element { parts }
    }

    pub fn from_parts(parts: impl IntoIterator<Item = (SectorId, CVec)>) -> Self {
        let mut e = Element::zero();
        for (s, v) in parts {
            e.add_part(s, &v);
        }
        e
    }

    pub fn part(&self, s: SectorId) -> Option<&CVec> {
        self.parts.get(&s)
    }

    pub fn parts(&self) -> impl Iterator<Item = (SectorId, &CVec)> {
        self.parts.iter().map(|(s, v)| (*s, v))
    }

    /// Sectors carrying a nonzero component.
    pub fn support(&self) -> BTreeSet<SectorId> {
        self.parts
            .iter()
            .filter(|(_, v)| v.iter().any(|z| *z != ZERO))
            .map(|(s, _)| *s)
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.support().is_empty()
    }

    pub fn add_part(&mut self, s: SectorId, v: &CVec) {
        match self.parts.get_mut(&s) {
            Some(cur) if cur.len() == v.len() => *cur += v,
            Some(cur) => {
                // keep the malformed length visible to validation
                *cur = v.clone();
            }
            None => {
                self.parts.insert(s, v.clone());
            }
        }
    }

    pub fn add(&self, other: &Element) -> Element {
        let mut out = self.clone();
        for (s, v) in &other.parts {
            out.add_part(*s, v);
        }
        out
    }

    pub fn sub(&self, other: &Element) -> Element {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, z: C64) -> Element {
        Element {
            parts: self.parts.iter().map(|(s, v)| (*s, v * z)).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.parts
            .values()
            .flat_map(|v| v.iter().map(|z| z.norm()))
            .fold(0.0, f64::max)
    }
}

/// Finite-dimensional partial *-algebra with a sector product table.
#[derive(Clone, Debug, PartialEq)]
pub struct PartialStarAlgebra {
    sectors: Vec<Sector>,
    table: BTreeMap<(SectorId, SectorId), ProductEntry>,
    star_maps: Vec<CMat>,
    unit: Option<Element>,
    offsets: Vec<usize>,
    tol: f64,
}

/// Incremental constructor for [`PartialStarAlgebra`].
#[derive(Clone, Debug, Default)]
pub struct AlgebraBuilder {
    sectors: Vec<(String, usize, String)>,
    products: Vec<(String, String, String, ProductTensor)>,
    star_maps: BTreeMap<String, CMat>,
    unit: Option<Vec<(String, CVec)>>,
    tol: Option<f64>,
}

impl AlgebraBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn sector(mut self, name: &str, dim: usize, star: &str) -> Self {
        self.sectors.push((name.to_string(), dim, star.to_string()));
        self
    }

    pub fn product(mut self, left: &str, right: &str, target: &str, tensor: ProductTensor) -> Self {
        self.products
            .push((left.to_string(), right.to_string(), target.to_string(), tensor));
        self
    }

    /// Matrix `M` with `star(x)` in the image sector equal to `M * conj(x)`.
    /// Sectors without an explicit map use the identity.
    pub fn star_map(mut self, sector: &str, m: CMat) -> Self {
        self.star_maps.insert(sector.to_string(), m);
        self
    }

    pub fn unit(mut self, parts: Vec<(&str, CVec)>) -> Self {
        self.unit = Some(parts.into_iter().map(|(s, v)| (s.to_string(), v)).collect());
        self
    }

    pub fn tol(mut self, tol: f64) -> Self {
        self.tol = Some(tol);
        self
    }

    pub fn build(self) -> Result<PartialStarAlgebra> {
        let mut ids = BTreeMap::new();
        for (i, (name, dim, _)) in self.sectors.iter().enumerate() {
            if *dim == 0 {
                return Err(Error::Malformed(format!("sector `{name}` has dimension 0")));
            }
            if ids.insert(name.clone(), SectorId(i)).is_some() {
                return Err(Error::Malformed(format!("duplicate sector `{name}`")));
            }
        }
        let lookup = |n: &str| ids.get(n).copied().ok_or_else(|| Error::UnknownSector(n.to_string()));

        let mut sectors = Vec::new();
        for (name, dim, star) in &self.sectors {
            sectors.push(Sector {
                name: name.clone(),
                dim: *dim,
                star: lookup(star)?,
            });
        }
        for (i, s) in sectors.iter().enumerate() {
            let img = &sectors[s.star.0];
            if img.star != SectorId(i) {
                return Err(Error::Malformed(format!(
                    "star is not an involution on sector `{}`",
                    s.name
                )));
            }
            if img.dim != s.dim {
                return Err(Error::Malformed(format!(
                    "sector `{}` and its star image differ in dimension",
                    s.name
                )));
            }
        }

        let mut star_maps = Vec::new();
        for s in &sectors {
            let m = match self.star_maps.get(&s.name) {
                Some(m) => m.clone(),
                None => identity(s.dim),
            };
            if m.shape() != (s.dim, s.dim) {
                return Err(Error::Malformed(format!("star map of `{}` has wrong shape", s.name)));
            }
            star_maps.push(m);
        }
        for name in self.star_maps.keys() {
            lookup(name)?;
        }

        let mut table = BTreeMap::new();
        for (l, r, t, tensor) in self.products {
            let (li, ri, ti) = (lookup(&l)?, lookup(&r)?, lookup(&t)?);
            let expect = (sectors[li.0].dim, sectors[ri.0].dim, sectors[ti.0].dim);
            if tensor.shape() != expect {
                return Err(Error::Malformed(format!(
                    "tensor for ({l},{r}) has shape {:?}, expected {:?}",
                    tensor.shape(),
                    expect
                )));
            }
            if table
                .insert((li, ri), ProductEntry { target: ti, tensor })
                .is_some()
            {
                return Err(Error::Malformed(format!("duplicate table entry ({l},{r})")));
            }
        }
        // Γ axiom (i) at the sector level
        for (&(s, t), e) in &table {
            let mirrored = (sectors[t.0].star, sectors[s.0].star);
            match table.get(&mirrored) {
                Some(m) if m.target == sectors[e.target.0].star => {}
                _ => {
                    return Err(Error::Malformed(format!(
                        "table entry ({},{}) has no involution-compatible mirror",
                        sectors[s.0].name, sectors[t.0].name
                    )))
                }
            }
        }

        let mut offsets = Vec::with_capacity(sectors.len() + 1);
        let mut acc = 0;
        for s in &sectors {
            offsets.push(acc);
            acc += s.dim;
        }
        offsets.push(acc);

        let mut alg = PartialStarAlgebra {
            sectors,
            table,
            star_maps,
            unit: None,
            offsets,
            tol: self.tol.unwrap_or(DEFAULT_TOL),
        };
        if let Some(parts) = self.unit {
            let mut e = Element::zero();
            for (name, v) in parts {
                e.add_part(lookup(&name)?, &v);
            }
            alg.check_element(&e)?;
            alg.unit = Some(e);
        }
        Ok(alg)
    }
}

impl PartialStarAlgebra {
    pub fn sectors(&self) -> &[Sector] {
        &self.sectors
    }

    pub fn sector(&self, id: SectorId) -> &Sector {
        &self.sectors[id.0]
    }

    pub fn sector_ids(&self) -> impl Iterator<Item = SectorId> + '_ {
        (0..self.sectors.len()).map(SectorId)
    }

    pub fn sector_id(&self, name: &str) -> Result<SectorId> {
        self.sectors
            .iter()
            .position(|s| s.name == name)
            .map(SectorId)
            .ok_or_else(|| Error::UnknownSector(name.to_string()))
    }

    pub fn sector_name(&self, id: SectorId) -> &str {
        &self.sectors[id.0].name
    }

    pub fn table(&self) -> &BTreeMap<(SectorId, SectorId), ProductEntry> {
        &self.table
    }

    pub fn entry(&self, s: SectorId, t: SectorId) -> Option<&ProductEntry> {
        self.table.get(&(s, t))
    }

    pub fn product_sector(&self, s: SectorId, t: SectorId) -> Option<SectorId> {
        self.table.get(&(s, t)).map(|e| e.target)
    }

    pub fn star_map(&self, s: SectorId) -> &CMat {
        &self.star_maps[s.0]
    }

    pub fn unit(&self) -> Option<&Element> {
        self.unit.as_ref()
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    /// Total dimension of the carrier.
    pub fn dim(&self) -> usize {
        *self.offsets.last().unwrap_or(&0)
    }

    pub fn offset(&self, s: SectorId) -> usize {
        self.offsets[s.0]
    }

    /// Sector and local index of a global basis index.
    pub fn locate(&self, global: usize) -> (SectorId, usize) {
        let s = self.offsets.partition_point(|&o| o <= global) - 1;
        (SectorId(s), global - self.offsets[s])
    }

    pub fn basis_element(&self, global: usize) -> Element {
        let (s, i) = self.locate(global);
        let mut v = CVec::zeros(self.sectors[s.0].dim);
        v[i] = C64::new(1.0, 0.0);
        Element::from_part(s, v)
    }

    pub fn basis_label(&self, global: usize) -> String {
        let (s, i) = self.locate(global);
        format!("{}[{}]", self.sectors[s.0].name, i)
    }

    /// Global basis indices of the given sectors, in order.
    pub fn basis_of(&self, sectors: &BTreeSet<SectorId>) -> Vec<usize> {
        sectors
            .iter()
            .flat_map(|s| self.offsets[s.0]..self.offsets[s.0 + 1])
            .collect()
    }

    pub fn all_sectors(&self) -> BTreeSet<SectorId> {
        self.sector_ids().collect()
    }

    pub fn check_element(&self, x: &Element) -> Result<()> {
        for (s, v) in x.parts() {
            let sec = self
                .sectors
                .get(s.0)
                .ok_or_else(|| Error::Malformed(format!("element uses unknown sector {s}")))?;
            if v.len() != sec.dim {
                return Err(Error::Malformed(format!(
                    "component in `{}` has length {}, sector dimension is {}",
                    sec.name,
                    v.len(),
                    sec.dim
                )));
            }
        }
        Ok(())
    }

    pub fn to_dense(&self, x: &Element) -> CVec {
        let mut out = CVec::zeros(self.dim());
        for (s, v) in x.parts() {
            let o = self.offsets[s.0];
            for (i, z) in v.iter().enumerate() {
                out[o + i] += *z;
            }
        }
        out
    }

    pub fn from_dense(&self, v: &CVec) -> Element {
        let mut e = Element::zero();
        for s in self.sector_ids() {
            let o = self.offsets[s.0];
            let part = CVec::from_iterator(self.sectors[s.0].dim, (o..o + self.sectors[s.0].dim).map(|i| v[i]));
            if part.iter().any(|z| *z != ZERO) {
                e.add_part(s, &part);
            }
        }
        e
    }

    /// `(x, y) ∈ Γ` under the sector conjunction rule.
    pub fn multipliable(&self, x: &Element, y: &Element) -> bool {
        let sy = y.support();
        x.support()
            .iter()
            .all(|s| sy.iter().all(|t| self.table.contains_key(&(*s, *t))))
    }

    /// Product `xy`, or `None` when `(x, y) ∉ Γ`.
    pub fn multiply(&self, x: &Element, y: &Element) -> Result<Option<Element>> {
        self.check_element(x)?;
        self.check_element(y)?;
        Ok(self.multiply_unchecked(x, y))
    }

    pub(crate) fn multiply_unchecked(&self, x: &Element, y: &Element) -> Option<Element> {
        if !self.multipliable(x, y) {
            return None;
        }
        let sx = x.support();
        let sy = y.support();
        let mut out: BTreeMap<SectorId, CVec> = BTreeMap::new();
        for s in &sx {
            for t in &sy {
                let e = &self.table[&(*s, *t)];
                let acc = out
                    .entry(e.target)
                    .or_insert_with(|| CVec::zeros(self.sectors[e.target.0].dim));
                e.tensor.contract(&x.parts[s], &y.parts[t], acc);
            }
        }
        Some(Element { parts: out })
    }

    pub fn star(&self, x: &Element) -> Result<Element> {
        self.check_element(x)?;
        Ok(self.star_unchecked(x))
    }

    pub(crate) fn star_unchecked(&self, x: &Element) -> Element {
        let mut out = Element::zero();
        for (s, v) in x.parts() {
            let img = self.sectors[s.0].star;
            let conj = v.map(|z| z.conj());
            out.add_part(img, &(&self.star_maps[s.0] * conj));
        }
        out
    }

    /// `{ t : table(s, t) defined for every s ∈ S }`.
    pub fn right_multiplier_sectors(&self, set: &BTreeSet<SectorId>) -> Result<BTreeSet<SectorId>> {
        for s in set {
            if s.0 >= self.sectors.len() {
                return Err(Error::UnknownSector(s.to_string()));
            }
        }
        Ok(self
            .sector_ids()
            .filter(|t| set.iter().all(|s| self.table.contains_key(&(*s, *t))))
            .collect())
    }

    /// Sectors spanning R(A).
    pub fn universal_right_multipliers(&self) -> BTreeSet<SectorId> {
        self.right_multiplier_sectors(&self.all_sectors())
            .expect("own sectors are known")
    }

    pub fn left_multiplier_sectors(&self, set: &BTreeSet<SectorId>) -> BTreeSet<SectorId> {
        self.sector_ids()
            .filter(|s| set.iter().all(|t| self.table.contains_key(&(*s, *t))))
            .collect()
    }

    /// Scale-relative difference between two elements.
    pub fn residual(&self, a: &Element, b: &Element) -> f64 {
        let d = a.sub(b).max_abs();
        d / a.max_abs().max(b.max_abs()).max(1.0)
    }

    /// Replace one tensor coefficient. Used to manufacture corrupted fixtures.
    pub fn perturb_table(&mut self, s: SectorId, t: SectorId, i: usize, j: usize, k: usize, delta: C64) -> Result<()> {
        let e = self
            .table
            .get_mut(&(s, t))
            .ok_or_else(|| Error::Malformed("no such table entry".into()))?;
        let v = e.tensor.value(i, j, k) + delta;
        e.tensor.set(i, j, k, v);
        Ok(())
    }

    /// `(xy)* = y*x*` on all multipliable basis pairs and `x** = x`.
    pub fn check_involution(&self) -> Check {
        let mut check = Check::new("involution", self.tol);
        let n = self.dim();
        for gx in 0..n {
            let x = self.basis_element(gx);
            let xss = self.star_unchecked(&self.star_unchecked(&x));
            check.record(self.residual(&xss, &x), || format!("x = {}", self.basis_label(gx)));
            for gy in 0..n {
                let y = self.basis_element(gy);
                if let Some(xy) = self.multiply_unchecked(&x, &y) {
                    let lhs = self.star_unchecked(&xy);
                    let ys = self.star_unchecked(&y);
                    let xs = self.star_unchecked(&x);
                    match self.multiply_unchecked(&ys, &xs) {
                        Some(rhs) => check.record(self.residual(&lhs, &rhs), || {
                            format!("(x, y) = ({}, {})", self.basis_label(gx), self.basis_label(gy))
                        }),
                        None => check.fail(format!(
                            "(y*, x*) not multipliable for ({}, {})",
                            self.basis_label(gx),
                            self.basis_label(gy)
                        )),
                    }
                }
            }
        }
        check.finish()
    }

    /// `e* = e` and `ex = xe = x` for every basis element. Vacuous without
    /// a unit.
    pub fn check_unit(&self) -> Check {
        let mut check = Check::new("unit", self.tol);
        let n = self.dim();
        if let Some(e) = &self.unit {
            let es = self.star_unchecked(e);
            check.record(self.residual(&es, e), || "e* != e".to_string());
            for g in 0..n {
                let x = self.basis_element(g);
                match (self.multiply_unchecked(e, &x), self.multiply_unchecked(&x, e)) {
                    (Some(l), Some(r)) => {
                        check.record(self.residual(&l, &x), || format!("e {0} != {0}", self.basis_label(g)));
                        check.record(self.residual(&r, &x), || format!("{0} e != {0}", self.basis_label(g)));
                    }
                    _ => check.fail(format!("unit not multipliable with {}", self.basis_label(g))),
                }
            }
        }
        if self.unit.is_none() {
            check.note("no unit");
        }
        check.finish()
    }

    /// Property (A): `y*(ax) = (y*a)x` and `a(xy) = (ax)y` for basis `a` and
    /// basis `x, y ∈ R(A)` whenever every product involved is defined.
    pub fn check_property_a(&self) -> Check {
        let mut check = Check::new("property_A", self.tol);
        let r_basis = self.basis_of(&self.universal_right_multipliers());
        let n = self.dim();
        let stars: Vec<Element> = r_basis
            .iter()
            .map(|&g| self.star_unchecked(&self.basis_element(g)))
            .collect();
        for ga in 0..n {
            let a = self.basis_element(ga);
            for &gx in &r_basis {
                let x = self.basis_element(gx);
                let ax = self.multiply_unchecked(&a, &x);
                for (iy, &gy) in r_basis.iter().enumerate() {
                    let y = self.basis_element(gy);
                    let label = || {
                        format!(
                            "(a, x, y) = ({}, {}, {})",
                            self.basis_label(ga),
                            self.basis_label(gx),
                            self.basis_label(gy)
                        )
                    };
                    // a(xy) = (ax)y
                    if let (Some(ax), Some(xy)) = (ax.as_ref(), self.multiply_unchecked(&x, &y)) {
                        if let (Some(l), Some(r)) =
                            (self.multiply_unchecked(&a, &xy), self.multiply_unchecked(ax, &y))
                        {
                            check.record(self.residual(&l, &r), label);
                        }
                    }
                    // y*(ax) = (y*a)x
                    let ys = &stars[iy];
                    if let Some(ax) = ax.as_ref() {
                        if let (Some(l), Some(ysa)) =
                            (self.multiply_unchecked(ys, ax), self.multiply_unchecked(ys, &a))
                        {
                            if let Some(r) = self.multiply_unchecked(&ysa, &x) {
                                check.record(self.residual(&l, &r), label);
                            }
                        }
                    }
                }
            }
        }
        check.finish()
    }

    /// Semi-associativity on bases: for `y ∈ R(x)` and `z ∈ R(A)`,
    /// `yz ∈ R(x)` and `(xy)z = x(yz)`.
    pub fn check_semi_associative(&self) -> Check {
        let mut check = Check::new("semi_associative", self.tol);
        let r_sectors = self.universal_right_multipliers();
        let r_basis = self.basis_of(&r_sectors);
        let n = self.dim();
        for gx in 0..n {
            let (sx, _) = self.locate(gx);
            let x = self.basis_element(gx);
            for gy in 0..n {
                let (sy, _) = self.locate(gy);
                let Some(su) = self.product_sector(sx, sy) else { continue };
                let y = self.basis_element(gy);
                let xy = self.multiply_unchecked(&x, &y).expect("defined by table");
                for &gz in &r_basis {
                    let (sz, _) = self.locate(gz);
                    let label = || {
                        format!(
                            "(x, y, z) = ({}, {}, {})",
                            self.basis_label(gx),
                            self.basis_label(gy),
                            self.basis_label(gz)
                        )
                    };
                    let Some(sv) = self.product_sector(sy, sz) else {
                        check.fail(format!("{}: yz undefined", label()));
                        continue;
                    };
                    if self.product_sector(sx, sv).is_none() || self.product_sector(su, sz).is_none() {
                        check.fail(format!("{}: yz is not a right multiplier of x", label()));
                        continue;
                    }
                    let z = self.basis_element(gz);
                    let yz = self.multiply_unchecked(&y, &z).expect("defined");
                    let (Some(l), Some(r)) =
                        (self.multiply_unchecked(&xy, &z), self.multiply_unchecked(&x, &yz))
                    else {
                        check.fail(format!("{}: product undefined", label()));
                        continue;
                    };
                    check.record(self.residual(&l, &r), label);
                }
            }
        }
        check.finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    fn toy() -> PartialStarAlgebra {
        let w = [c(1.0, 0.0), c(2.0, 0.0)];
        let ones = [c(1.0, 0.0); 2];
        AlgebraBuilder::new()
            .sector("A", 2, "A")
            .sector("X", 2, "X")
            .product("A", "A", "A", ProductTensor::pointwise(&ones))
            .product("A", "X", "X", ProductTensor::pointwise(&w))
            .product("X", "A", "X", ProductTensor::pointwise(&w))
            .build()
            .unwrap()
    }

    #[test]
    fn undefined_product_is_not_an_error() {
        let alg = toy();
        let x = alg.basis_element(2);
        assert_eq!(alg.multiply(&x, &x).unwrap(), None);
    }

    #[test]
    fn zero_multiplies_everything() {
        let alg = toy();
        let zero = Element::from_part(SectorId(1), CVec::zeros(2));
        let x = alg.basis_element(3);
        let p = alg.multiply(&zero, &x).unwrap().unwrap();
        assert!(p.is_zero());
    }

    #[test]
    fn malformed_element_rejected() {
        let alg = toy();
        let bad = Element::from_part(SectorId(0), CVec::zeros(3));
        assert!(matches!(alg.multiply(&bad, &bad), Err(Error::Malformed(_))));
    }

    #[test]
    fn star_conjugates() {
        let alg = toy();
        let x = Element::from_part(SectorId(0), CVec::from_vec(vec![c(1.0, 1.0), c(2.0, 0.0)]));
        let xs = alg.star(&x).unwrap();
        assert_eq!(xs.part(SectorId(0)).unwrap()[0], c(1.0, -1.0));
        assert_eq!(xs.part(SectorId(0)).unwrap()[1], c(2.0, 0.0));
        assert!(alg.star(&Element::zero()).unwrap().is_zero());
    }

    #[test]
    fn unmirrored_table_rejected() {
        let ones = [c(1.0, 0.0); 2];
        let err = AlgebraBuilder::new()
            .sector("A", 2, "A")
            .sector("X", 2, "X")
            .product("A", "X", "X", ProductTensor::pointwise(&ones))
            .build()
            .unwrap_err();
        assert!(matches!(err, Error::Malformed(_)));
    }

    #[test]
    fn right_multipliers_of_quasi_algebra() {
        let alg = toy();
        let r = alg.universal_right_multipliers();
        assert_eq!(r, [SectorId(0)].into_iter().collect());
        let all = alg.right_multiplier_sectors(&BTreeSet::new()).unwrap();
        assert_eq!(all.len(), 2);
        assert!(alg
            .right_multiplier_sectors(&[SectorId(7)].into_iter().collect())
            .is_err());
    }

    #[test]
    fn locate_roundtrip() {
        let alg = toy();
        for g in 0..alg.dim() {
            let (s, i) = alg.locate(g);
            assert_eq!(alg.offset(s) + i, g);
        }
    }
}
