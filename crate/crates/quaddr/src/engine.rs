//! Sector assembly, cohomology, spectral pages and the comparison complexes.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use quaddr_exact::rational::{self, Rational};
use quaddr_exact::sparse::{rank_of, subquotient_dim};
use quaddr_exact::{RingHom, SparseMatrix, SparseVec};
use rayon::prelude::*;
use serde::Serialize;

use crate::action::ActionModel;
use crate::complex::{AmbientElement, KElement, QuadComplex, Slot};
use crate::error::{EngineError, Witness};
use crate::group::GroupKind;
use crate::sector::{self, ambient_basis, k_basis, BasisIndex, BasisKey, Sector};
use crate::simplicial::{coframe_rows, Coframe, MapKind, PullPart, Pullback};

/// A bounded cochain complex with an integer filtration on each basis.
#[derive(Clone, Debug)]
pub struct FilteredComplex {
    /// Bases for degrees `0..=D+1`.
    pub bases: Vec<BasisIndex>,
    pub filtration: Vec<Vec<i64>>,
    /// `d[t]` maps degree `t` to `t+1` for `t ≤ D`.
    pub d: Vec<SparseMatrix>,
}

impl FilteredComplex {
    pub fn max_degree(&self) -> usize {
        self.d.len() - 1
    }

    pub fn dim(&self, t: usize) -> usize {
        self.bases[t].len()
    }

    fn incoming(&self, t: usize) -> SparseMatrix {
        if t == 0 {
            SparseMatrix::zero(self.dim(0), 0)
        } else {
            self.d[t - 1].clone()
        }
    }

    /// Cohomology dimensions in degrees `0..=D`.
    pub fn cohomology(&self) -> Result<Vec<usize>, EngineError> {
        (0..=self.max_degree())
            .map(|t| {
                subquotient_dim(&self.incoming(t), &self.d[t])
                    .map_err(|e| EngineError::Violation(Witness::new("d² = 0", None, format!("degree {t}: {e}"))))
            })
            .collect()
    }
}

/// A sector piece of `K` truncated at total degree `D+1`.
#[derive(Clone, Debug)]
pub struct TruncatedComplex {
    pub sector: Sector,
    pub max_degree: usize,
    pub complex: FilteredComplex,
    /// Per degree: the matrices of `φ, ∂, d, ι`.
    pub parts: Vec<[SparseMatrix; 4]>,
}

pub const PARTS: [&str; 4] = ["φ", "∂", "d", "ι"];

fn leak(w: Witness, what: &str, source: &BasisKey) -> EngineError {
    EngineError::SectorLeak(Witness::new(
        w.identity,
        w.level,
        format!(
            "{} of basis element at (p,k,n)=({},{},{}) exps {:?}: {}",
            what, source.p, source.k, source.n, source.exps, w.detail
        ),
    ))
}

/// Materializes the bases of a sector and the matrices of the four differentials.
pub fn assemble_sector(cx: &QuadComplex, max_degree: usize, sector: &Sector) -> Result<TruncatedComplex, EngineError> {
    let mut bases = Vec::new();
    for t in 0..=max_degree + 1 {
        let mut keys = Vec::new();
        for n in 0..=t {
            for k in 0..=(t - n) / 2 {
                let p = t - n - k;
                keys.extend(k_basis(cx, sector, p, k, n)?);
            }
        }
        bases.push(BasisIndex::new(keys));
    }
    let filtration = bases.iter().map(|b| b.keys.iter().map(|k| (k.p + k.k) as i64).collect()).collect();
    let mut parts = Vec::new();
    let mut d = Vec::new();
    for t in 0..=max_degree {
        let mut cols: [Vec<SparseVec>; 4] = Default::default();
        let mut total = Vec::new();
        for key in &bases[t].keys {
            let x = key.element(cx);
            let images = cx.total_differential(&x);
            let mut sum = SparseVec::new();
            for (i, y) in images.iter().enumerate() {
                let mut v = SparseVec::new();
                bases[t + 1]
                    .coordinates(y.degree(), y.terms(), &mut v, &rational::one())
                    .map_err(|w| leak(w, PARTS[i], key))?;
                for (r, c) in &v {
                    quaddr_exact::sparse::add_into(&mut sum, *r, c.clone());
                }
                cols[i].push(v);
            }
            total.push(sum);
        }
        let rows = bases[t + 1].len();
        let [a, b, c, e] = cols;
        parts.push([
            SparseMatrix::from_columns(rows, a)?,
            SparseMatrix::from_columns(rows, b)?,
            SparseMatrix::from_columns(rows, c)?,
            SparseMatrix::from_columns(rows, e)?,
        ]);
        d.push(SparseMatrix::from_columns(rows, total)?);
    }
    Ok(TruncatedComplex {
        sector: sector.clone(),
        max_degree,
        complex: FilteredComplex { bases, filtration, d },
        parts,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SectorDims {
    pub keys: Vec<Vec<i32>>,
    pub dims: Vec<usize>,
    pub boundary: bool,
}

/// Total dimensions with their per-sector contributions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DimsReport {
    pub degrees: Vec<usize>,
    pub dims: Vec<usize>,
    /// Sectors with nonzero cohomology, and boundary sectors.
    pub sectors: Vec<SectorDims>,
    /// Boundary sectors are acyclic and widening the exponent window
    /// changes nothing in low degrees.
    pub stabilized: bool,
}

fn merge(max_degree: usize, per: Vec<(Sector, bool, Vec<usize>)>) -> DimsReport {
    let mut dims = vec![0; max_degree + 1];
    let mut sectors = Vec::new();
    let mut stabilized = true;
    for (s, boundary, v) in per {
        for (t, x) in v.iter().enumerate() {
            dims[t] += x;
        }
        let nonzero = v.iter().any(|x| *x > 0);
        if boundary && nonzero {
            stabilized = false;
        }
        if nonzero || boundary {
            sectors.push(SectorDims { keys: s.keys, dims: v, boundary });
        }
    }
    DimsReport { degrees: (0..=max_degree).collect(), dims, sectors, stabilized }
}

fn per_sector<F>(cx: &QuadComplex, f: F) -> Result<Vec<(Sector, bool, Vec<usize>)>, EngineError>
where
    F: Fn(&Sector) -> Result<Option<Vec<usize>>, EngineError> + Sync,
{
    let sectors = sector::sectors(cx.model())?;
    let out: Result<Vec<_>, EngineError> =
        sectors.par_iter().map(|s| Ok(f(s)?.map(|v| (s.clone(), sector::on_boundary(cx.model(), s), v)))).collect();
    Ok(out?.into_iter().flatten().collect())
}

/// Degree cap of the window-widening check.
const WINDOW_CHECK_DEGREE: usize = 3;

/// Cohomology of `K` in degrees `0..=D`, summed over sectors.
pub fn total_cohomology(cx: &QuadComplex, max_degree: usize) -> Result<DimsReport, EngineError> {
    let per = per_sector(cx, |s| Ok(Some(assemble_sector(cx, max_degree, s)?.complex.cohomology()?)))?;
    let mut report = merge(max_degree, per);
    if report.stabilized && cx.model().group.kind == GroupKind::Torus && cx.model().rank() > 0 {
        let g = &cx.model().grading;
        let wider = Arc::new((**cx.model()).clone().with_window(g.window + 1, g.bound));
        let wide = QuadComplex::new(wider)?;
        let cap = max_degree.min(WINDOW_CHECK_DEGREE);
        let per = per_sector(&wide, |s| Ok(Some(assemble_sector(&wide, cap, s)?.complex.cohomology()?)))?;
        let again = merge(cap, per);
        report.stabilized = again.dims[..] == report.dims[..=cap];
    }
    Ok(report)
}

/// Direct sum of every sector piece, as one filtered complex.
pub fn total_complex(cx: &QuadComplex, max_degree: usize) -> Result<FilteredComplex, EngineError> {
    let sectors = sector::sectors(cx.model())?;
    let pieces: Vec<Result<FilteredComplex, EngineError>> =
        sectors.par_iter().map(|s| Ok(assemble_sector(cx, max_degree, s)?.complex)).collect();
    let pieces = pieces.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(direct_sum(max_degree, &pieces))
}

fn direct_sum(max_degree: usize, pieces: &[FilteredComplex]) -> FilteredComplex {
    let mut bases = Vec::new();
    let mut filtration = Vec::new();
    for t in 0..=max_degree + 1 {
        bases.push(BasisIndex::new(pieces.iter().flat_map(|p| p.bases[t].keys.iter().cloned()).collect()));
        filtration.push(pieces.iter().flat_map(|p| p.filtration[t].iter().copied()).collect());
    }
    let mut d = Vec::new();
    for t in 0..=max_degree {
        let mut cols = Vec::new();
        let mut offset = 0;
        for p in pieces {
            for c in p.d[t].columns() {
                cols.push(c.iter().map(|(i, v)| (i + offset, v.clone())).collect());
            }
            offset += p.dim(t + 1);
        }
        d.push(SparseMatrix::from_columns(bases[t + 1].len(), cols).expect("block columns fit"));
    }
    FilteredComplex { bases, filtration, d }
}

// ---- spectral sequences --------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PageEntry {
    pub m: i64,
    pub n: i64,
    pub dim: usize,
    /// Rank of the outgoing page differential.
    pub d_rank: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SpectralPage {
    /// Page index; `None` is the limit page.
    pub r: Option<usize>,
    pub entries: Vec<PageEntry>,
}

impl SpectralPage {
    pub fn dim(&self, m: i64, n: i64) -> usize {
        self.entries.iter().find(|e| e.m == m && e.n == n).map_or(0, |e| e.dim)
    }

    pub fn differential_vanishes(&self) -> bool {
        self.entries.iter().all(|e| e.d_rank == 0)
    }

    /// Sum of entries on the line `m + n = t`.
    pub fn degree(&self, t: i64) -> usize {
        self.entries.iter().filter(|e| e.m + e.n == t).map(|e| e.dim).sum()
    }

    pub fn label(&self) -> String {
        match self.r {
            Some(r) => format!("E{r}"),
            None => "Einf".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SpectralPages {
    pub pages: Vec<SpectralPage>,
    pub limit: SpectralPage,
    pub cohomology: Vec<usize>,
}

type CycleCache = HashMap<(usize, i64, i64), Arc<Vec<SparseVec>>>;

struct PageSolver<'a> {
    cx: &'a FilteredComplex,
    z: Mutex<CycleCache>,
}

impl<'a> PageSolver<'a> {
    fn new(cx: &'a FilteredComplex) -> Self {
        PageSolver { cx, z: Mutex::new(HashMap::new()) }
    }

    /// `Z_r^m` in degree t: elements of `F^m` whose differential lies in `F^{m+r}`.
    fn z(&self, t: usize, m: i64, r: i64) -> Arc<Vec<SparseVec>> {
        if let Some(v) = self.z.lock().expect("z cache").get(&(t, m, r)) {
            return v.clone();
        }
        let filt = &self.cx.filtration[t];
        let cols: Vec<usize> = (0..filt.len()).filter(|&i| filt[i] >= m).collect();
        let out: Vec<SparseVec> = if r < 0 {
            cols.iter().map(|&i| [(i, rational::one())].into_iter().collect()).collect()
        } else {
            let next = &self.cx.filtration[t + 1];
            let rows: Vec<usize> = (0..next.len()).filter(|&i| next[i] < m + r).collect();
            let sub = self.cx.d[t].select_columns(&cols).select_rows(&rows);
            sub.kernel_and_image()
                .kernel
                .into_iter()
                .map(|v| v.into_iter().map(|(j, c)| (cols[j], c)).collect())
                .collect()
        };
        let out = Arc::new(out);
        self.z.lock().expect("z cache").insert((t, m, r), out.clone());
        out
    }

    fn dz(&self, t: usize, m: i64, r: i64) -> Vec<SparseVec> {
        if t == 0 {
            return Vec::new();
        }
        self.z(t - 1, m, r).iter().map(|v| self.cx.d[t - 1].mul_vec(v)).filter(|v| !v.is_empty()).collect()
    }

    /// `dim E_r^m` in total degree t and the rank of `d_r` leaving it.
    fn entry(&self, t: usize, m: i64, r: i64) -> (usize, usize) {
        let z = self.z(t, m, r);
        let mut denom: Vec<SparseVec> = self.z(t, m + 1, r - 1).to_vec();
        denom.extend(self.dz(t, m - r + 1, r - 1));
        let b = rank_of(&denom);
        let dim = z.len() - b;
        let mut kernel = denom;
        kernel.extend(self.z(t, m, r + 1).iter().cloned());
        let rank = z.len() - rank_of(&kernel);
        (dim, rank)
    }
}

fn filtration_range(cx: &FilteredComplex) -> (i64, i64) {
    let all = cx.filtration.iter().flatten();
    let lo = all.clone().copied().min().unwrap_or(0);
    let hi = all.copied().max().unwrap_or(0);
    (lo, hi)
}

/// Pages `E_1..E_{r_max}` and the limit of one filtered complex.
pub fn filtered_pages(cx: &FilteredComplex, r_max: usize) -> Result<SpectralPages, EngineError> {
    let solver = PageSolver::new(cx);
    let (lo, hi) = filtration_range(cx);
    let d = cx.max_degree();
    let table = |r: i64| -> Vec<(usize, i64, usize, usize)> {
        let mut rows = Vec::new();
        for t in 0..=d {
            for m in lo..=hi {
                let (dim, rank) = solver.entry(t, m, r);
                rows.push((t, m, dim, rank));
            }
        }
        rows
    };
    let to_page = |r: Option<usize>, rows: &[(usize, i64, usize, usize)]| SpectralPage {
        r,
        entries: rows
            .iter()
            .filter(|(_, _, dim, rank)| *dim > 0 || *rank > 0)
            .map(|&(t, m, dim, rank)| PageEntry { m, n: t as i64 - m, dim, d_rank: rank })
            .collect(),
    };
    let mut raw = Vec::new();
    for r in 1..=r_max.max(1) as i64 + 1 {
        raw.push(table(r));
    }
    let inf = hi - lo + 2;
    let limit_rows = table(inf.max(r_max as i64 + 2));
    for (ri, rows) in raw.iter().enumerate().take(r_max.max(1)) {
        let r = ri as i64 + 1;
        let next = &raw[ri + 1];
        for (idx, &(t, m, dim, rank)) in rows.iter().enumerate() {
            let incoming =
                if t == 0 { 0 } else { rows.iter().find(|x| x.0 == t - 1 && x.1 == m - r).map_or(0, |x| x.3) };
            let expect = dim as i64 - rank as i64 - incoming as i64;
            if expect != next[idx].2 as i64 {
                return Err(EngineError::Violation(Witness::new(
                    "E_{r+1} = H(E_r, d_r)",
                    None,
                    format!(
                        "r={r}, (m,n)=({m},{}): next page has {} but homology has {expect}",
                        t as i64 - m,
                        next[idx].2
                    ),
                )));
            }
        }
    }
    let cohomology = cx.cohomology()?;
    let limit = to_page(None, &limit_rows);
    for (t, h) in cohomology.iter().enumerate() {
        if limit.degree(t as i64) != *h {
            return Err(EngineError::Violation(Witness::new(
                "E_∞ sums to cohomology",
                None,
                format!("degree {t}: limit page gives {} but cohomology is {h}", limit.degree(t as i64)),
            )));
        }
    }
    let pages = raw.iter().take(r_max.max(1)).enumerate().map(|(i, rows)| to_page(Some(i + 1), rows)).collect();
    Ok(SpectralPages { pages, limit, cohomology })
}

fn sum_pages(max_degree: usize, parts: Vec<SpectralPages>) -> SpectralPages {
    let add = |pages: Vec<&SpectralPage>| -> SpectralPage {
        let mut acc: BTreeMap<(i64, i64), (usize, usize)> = BTreeMap::new();
        for p in &pages {
            for e in &p.entries {
                let x = acc.entry((e.m, e.n)).or_default();
                x.0 += e.dim;
                x.1 += e.d_rank;
            }
        }
        SpectralPage {
            r: pages.first().and_then(|p| p.r),
            entries: acc.into_iter().map(|((m, n), (dim, d_rank))| PageEntry { m, n, dim, d_rank }).collect(),
        }
    };
    let count = parts.first().map_or(0, |p| p.pages.len());
    let pages = (0..count).map(|i| add(parts.iter().map(|p| &p.pages[i]).collect())).collect();
    let limit = add(parts.iter().map(|p| &p.limit).collect());
    let mut cohomology = vec![0; max_degree + 1];
    for p in &parts {
        for (t, x) in p.cohomology.iter().enumerate() {
            cohomology[t] += x;
        }
    }
    SpectralPages { pages, limit, cohomology }
}

/// The spectral sequence of the filtration by `m = p + k`.
pub fn spectral_pages(cx: &QuadComplex, max_degree: usize, r_max: usize) -> Result<SpectralPages, EngineError> {
    let sectors = sector::sectors(cx.model())?;
    let parts: Vec<Result<SpectralPages, EngineError>> =
        sectors.par_iter().map(|s| filtered_pages(&assemble_sector(cx, max_degree, s)?.complex, r_max)).collect();
    Ok(sum_pages(max_degree, parts.into_iter().collect::<Result<_, _>>()?))
}

/// The `(φ, ∂)` double complex at fixed `p`, filtered by `k`, in degrees
/// `k + n ≤ D`.
pub fn fixed_p_complex(
    cx: &QuadComplex,
    max_degree: usize,
    p: usize,
    sector: &Sector,
) -> Result<FilteredComplex, EngineError> {
    let mut bases = Vec::new();
    for s in 0..=max_degree + 1 {
        let mut keys = Vec::new();
        for k in 0..=s.min(p) {
            keys.extend(k_basis(cx, sector, p, k, s - k)?);
        }
        bases.push(BasisIndex::new(keys));
    }
    let filtration = bases.iter().map(|b: &BasisIndex| b.keys.iter().map(|k| k.k as i64).collect()).collect();
    let mut d = Vec::new();
    for s in 0..=max_degree {
        let mut cols = Vec::new();
        for key in &bases[s].keys {
            let x = key.element(cx);
            let mut v = SparseVec::new();
            for (what, y) in [("φ", cx.phi(&x)), ("∂", cx.cech(&x))] {
                bases[s + 1]
                    .coordinates(y.degree(), y.terms(), &mut v, &rational::one())
                    .map_err(|w| leak(w, what, key))?;
            }
            cols.push(v);
        }
        d.push(SparseMatrix::from_columns(bases[s + 1].len(), cols)?);
    }
    Ok(FilteredComplex { bases, filtration, d })
}

pub fn fixed_p_pages(
    cx: &QuadComplex,
    max_degree: usize,
    p: usize,
    r_max: usize,
) -> Result<SpectralPages, EngineError> {
    let sectors = sector::sectors(cx.model())?;
    let parts: Vec<Result<SpectralPages, EngineError>> =
        sectors.par_iter().map(|s| filtered_pages(&fixed_p_complex(cx, max_degree, p, s)?, r_max)).collect();
    Ok(sum_pages(max_degree, parts.into_iter().collect::<Result<_, _>>()?))
}

// ---- the ambient double complex --------------------------------------------

fn ambient_cech(cx: &QuadComplex, x: &AmbientElement) -> AmbientElement {
    let (f, _, n) = x.degree();
    let mut out = AmbientElement::zero(f, 0, n + 1);
    for q in 0..=n + 1 {
        let y = cx.pullback_ambient(&cx.tower().face(n, q), x);
        out = out.add(&y.scale(&rational::sign(q as i64)));
    }
    out
}

/// Total complex of ambient forms on the nerve with `∂ + (−1)^n D`, in one sector.
pub fn oracle_complex(cx: &QuadComplex, max_degree: usize, sector: &Sector) -> Result<FilteredComplex, EngineError> {
    let mut bases = Vec::new();
    for t in 0..=max_degree + 1 {
        let mut keys = Vec::new();
        for n in 0..=t {
            keys.extend(ambient_basis(cx, sector, t - n, n)?);
        }
        bases.push(BasisIndex::new(keys));
    }
    let filtration = bases.iter().map(|b: &BasisIndex| b.keys.iter().map(|k| k.p as i64).collect()).collect();
    let mut d = Vec::new();
    for t in 0..=max_degree {
        let mut cols = Vec::new();
        for key in &bases[t].keys {
            let x = key.ambient(cx);
            let mut v = SparseVec::new();
            let c = ambient_cech(cx, &x);
            bases[t + 1].coordinates(c.degree(), c.terms(), &mut v, &rational::one()).map_err(|w| leak(w, "∂", key))?;
            let e = cx.exterior(&x);
            bases[t + 1]
                .coordinates(e.degree(), e.terms(), &mut v, &rational::sign(key.n as i64))
                .map_err(|w| leak(w, "D", key))?;
            cols.push(v);
        }
        d.push(SparseMatrix::from_columns(bases[t + 1].len(), cols)?);
    }
    Ok(FilteredComplex { bases, filtration, d })
}

/// Cohomology of the simplicial de Rham double complex.
pub fn oracle_total(cx: &QuadComplex, max_degree: usize) -> Result<DimsReport, EngineError> {
    let per = per_sector(cx, |s| Ok(Some(oracle_complex(cx, max_degree, s)?.cohomology()?)))?;
    Ok(merge(max_degree, per))
}

// ---- the Cartan model ---------------------------------------------------------

/// `(φ + d)` on level 0 of one sector.
fn cartan_complex(cx: &QuadComplex, max_degree: usize, sector: &Sector) -> Result<FilteredComplex, EngineError> {
    let mut bases = Vec::new();
    for t in 0..=max_degree + 1 {
        let mut keys = Vec::new();
        for k in 0..=t / 2 {
            keys.extend(k_basis(cx, sector, t - k, k, 0)?);
        }
        bases.push(BasisIndex::new(keys));
    }
    let filtration = bases.iter().map(|b: &BasisIndex| b.keys.iter().map(|k| k.k as i64).collect()).collect();
    let mut d = Vec::new();
    for t in 0..=max_degree {
        let mut cols = Vec::new();
        for key in &bases[t].keys {
            let x = key.element(cx);
            let mut v = SparseVec::new();
            for (what, y) in [("φ", cx.phi(&x)), ("d", cx.derham(&x))] {
                bases[t + 1]
                    .coordinates(y.degree(), y.terms(), &mut v, &rational::one())
                    .map_err(|w| leak(w, what, key))?;
            }
            cols.push(v);
        }
        d.push(SparseMatrix::from_columns(bases[t + 1].len(), cols)?);
    }
    Ok(FilteredComplex { bases, filtration, d })
}

/// Pullbacks along the action of each element of a finite group on `X_0`.
fn finite_pullbacks(cx: &QuadComplex) -> Result<Vec<Pullback>, EngineError> {
    let ActionModel::Finite(homs) = &cx.model().action else {
        return Ok(Vec::new());
    };
    let lvl = cx.tower().level(0);
    let ring = lvl.ring().clone();
    let coframes: Vec<Coframe> = (0..lvl.dim()).map(|c| lvl.coframe(c)).collect();
    homs.iter()
        .map(|h| {
            let images = h.images().iter().map(|p| p.with_ring(&ring)).collect::<Result<Vec<_>, _>>()?;
            let hom = RingHom::new(&ring, &ring, images)?;
            let coframe = coframe_rows(&hom, &coframes, &coframes);
            Ok(Pullback {
                kind: MapKind::Morphism,
                domain: 0,
                codomain: 0,
                parts: vec![PullPart { component: 0, hom, coframe }],
                upsilon: None,
            })
        })
        .collect()
}

/// Averaging projector onto invariants in each degree.
fn reynolds(
    cx: &QuadComplex,
    complex: &FilteredComplex,
    actions: &[Pullback],
) -> Result<Vec<SparseMatrix>, EngineError> {
    let w = rational::one() / Rational::from_integer((actions.len() as i64).into());
    let mut out = Vec::new();
    for t in 0..=complex.max_degree() {
        let basis = &complex.bases[t];
        let mut cols = Vec::new();
        for key in &basis.keys {
            let x = key.element(cx);
            let mut v = SparseVec::new();
            for pb in actions {
                let y: KElement = cx.pullback(pb, &x);
                basis.coordinates(y.degree(), y.terms(), &mut v, &w).map_err(|e| leak(e, "group action", key))?;
            }
            cols.push(v);
        }
        out.push(SparseMatrix::from_columns(basis.len(), cols)?);
    }
    Ok(out)
}

/// Cohomology of invariant `Ω(X_0) ⊗ S(g^∨)` under `φ + d`.
pub fn cartan_total(cx: &QuadComplex, max_degree: usize) -> Result<DimsReport, EngineError> {
    let model = cx.model();
    if model.group.kind == GroupKind::Additive && model.rank() > 0 {
        return Err(EngineError::Refused("the Cartan comparison needs a torus or finite group".into()));
    }
    let actions = finite_pullbacks(cx)?;
    let per = per_sector(cx, |s| {
        if model.group.kind == GroupKind::Torus && sector::character(model, s.representative()).iter().any(|c| *c != 0)
        {
            return Ok(None);
        }
        let complex = cartan_complex(cx, max_degree, s)?;
        if actions.is_empty() {
            return Ok(Some(complex.cohomology()?));
        }
        let r = reynolds(cx, &complex, &actions)?;
        let mut dims = Vec::new();
        let mut prev = 0;
        for t in 0..=max_degree {
            let inv = r[t].rank();
            let out = complex.d[t].mul(&r[t])?.rank();
            dims.push(inv - out - prev);
            prev = out;
        }
        Ok(Some(dims))
    })?;
    Ok(merge(max_degree, per))
}

/// Convenience: the slot of a single-term element.
pub fn slot_of(x: &KElement) -> Option<&Slot> {
    x.terms().keys().next()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{FiniteGroup, GroupModel};
    use crate::model::{build_pair_model, build_transformation_model, build_vector_bundle_model, FlatGroupoidModel};
    use crate::space::SpaceModel;

    fn bgm() -> QuadComplex {
        let g = GroupModel::torus(&["g"]);
        let pt = SpaceModel::point();
        let m = build_transformation_model(g.clone(), pt.clone(), ActionModel::trivial(&g, &pt)).unwrap();
        QuadComplex::new(Arc::new(m)).unwrap()
    }

    fn cx(m: FlatGroupoidModel) -> QuadComplex {
        QuadComplex::new(Arc::new(m)).unwrap()
    }

    #[test]
    fn zero_bound_has_one_basis_element() {
        let c = bgm();
        let s = sector::sectors(c.model()).unwrap();
        let t = assemble_sector(&c, 0, &s[0]).unwrap();
        assert_eq!(t.complex.dim(0), 1);
        assert!(t.complex.d[0].is_zero());
    }

    #[test]
    fn upsilon_sits_in_degree_two() {
        let c = bgm();
        let s = sector::sectors(c.model()).unwrap();
        let t = assemble_sector(&c, 2, &s[0]).unwrap();
        assert!(t.complex.bases[2].keys.iter().any(|k| (k.p, k.k, k.n) == (1, 1, 0)));
    }

    #[test]
    fn classifying_space_is_polynomial() {
        let c = bgm();
        assert_eq!(total_cohomology(&c, 4).unwrap().dims, vec![1, 0, 1, 0, 1]);
        assert_eq!(oracle_total(&c, 4).unwrap().dims, vec![1, 0, 1, 0, 1]);
        assert_eq!(cartan_total(&c, 4).unwrap().dims, vec![1, 0, 1, 0, 1]);
    }

    #[test]
    fn classifying_space_pages() {
        let c = bgm();
        let pages = spectral_pages(&c, 4, 2).unwrap();
        let e1 = &pages.pages[0];
        assert_eq!(
            e1.entries.iter().map(|e| (e.m, e.n, e.dim)).collect::<Vec<_>>(),
            vec![(0, 0, 1), (2, 0, 1), (4, 0, 1)]
        );
        assert!(e1.differential_vanishes());
        assert_eq!(pages.limit, SpectralPage { r: None, ..e1.clone() });
    }

    #[test]
    fn fixed_p_on_classifying_space() {
        let c = bgm();
        let p0 = fixed_p_pages(&c, 3, 0, 1).unwrap();
        assert_eq!(p0.cohomology, vec![1, 0, 0, 0]);
        let p1 = fixed_p_pages(&c, 3, 1, 1).unwrap();
        assert_eq!(p1.cohomology, vec![0, 1, 0, 0]);
    }

    #[test]
    fn multiplication_groupoid_is_a_point() {
        let g = GroupModel::torus(&["g"]);
        let b = SpaceModel::torus(&["t"]);
        let m = build_transformation_model(g.clone(), b.clone(), ActionModel::monomial(&g, &b, &[vec![1]]).unwrap())
            .unwrap();
        let c = cx(m);
        assert_eq!(total_cohomology(&c, 3).unwrap().dims, vec![1, 0, 0, 0]);
        assert_eq!(oracle_total(&c, 3).unwrap().dims, vec![1, 0, 0, 0]);
    }

    #[test]
    fn inversion_quotient() {
        let g = GroupModel::finite(FiniteGroup::cyclic(2));
        let b = SpaceModel::torus(&["t"]);
        let a = ActionModel::parse_finite(&b, &[vec!["t"], vec!["t^-1"]]).unwrap();
        let c = cx(build_transformation_model(g, b, a).unwrap());
        assert_eq!(total_cohomology(&c, 2).unwrap().dims, vec![1, 0, 0]);
        assert_eq!(oracle_total(&c, 2).unwrap().dims, vec![1, 0, 0]);
        assert_eq!(cartan_total(&c, 2).unwrap().dims, vec![1, 0, 0]);
    }

    #[test]
    fn pair_and_bundle_models_are_contractible() {
        let c = cx(build_pair_model(GroupModel::torus(&["g"])).unwrap());
        assert_eq!(total_cohomology(&c, 2).unwrap().dims, vec![1, 0, 0]);
        let c = cx(build_vector_bundle_model(SpaceModel::affine(&["x"]), 1).unwrap());
        assert_eq!(total_cohomology(&c, 2).unwrap().dims, vec![1, 0, 0]);
        assert!(cartan_total(&c, 2).is_err());
    }
}
