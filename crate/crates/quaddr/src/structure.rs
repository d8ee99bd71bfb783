//! Per-level structure maps ρ_q, η_q, ω_{qr}, their certification, and the
//! derived connection on the normal bundle.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Zero};
use quaddr_exact::rational::{self, Rational};
use quaddr_exact::{LaurentPoly, Ring, RingHom};
use serde::Serialize;

use crate::error::{ModelError, Witness};
use crate::field::VectorField;
use crate::model::FlatGroupoidModel;
use crate::simplicial::{Coframe, Level, Pullback, Tower};

/// Structure maps of one level, all in the π_0 frame.
#[derive(Clone, Debug)]
pub struct StructureMaps {
    pub n: usize,
    /// `rho[q][c][a]`: `ρ_q(θ_c) = Σ_a rho[q][c][a] υ_a`.
    pub rho: Vec<Vec<Vec<LaurentPoly>>>,
    /// `eta[q][i][c]`: `η_q(ε_i) = Σ_c eta[q][i][c] θ_c`.
    pub eta: Vec<Vec<Vec<LaurentPoly>>>,
    /// `omega[(q, r)][a][c]`: `ω_{qr}^a = Σ_c omega[a][c] θ_c`, for q ≠ r.
    pub omega: BTreeMap<(usize, usize), Vec<Vec<Rational>>>,
}

/// Inverse of a small dense rational matrix.
pub fn invert(m: &[Vec<Rational>]) -> Option<Vec<Vec<Rational>>> {
    let n = m.len();
    let mut a: Vec<Vec<Rational>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }));
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|r| !a[*r][col].is_zero())?;
        a.swap(col, piv);
        let inv = a[col][col].recip();
        for x in a[col].iter_mut() {
            *x *= &inv;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                let pivot_row = a[col].clone();
                for (x, p) in a[r].iter_mut().zip(&pivot_row) {
                    *x -= &f * p;
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

fn constant(p: &LaurentPoly) -> Option<Rational> {
    p.is_constant().then(|| p.constant_term())
}

/// Embeds a base-ring polynomial into the level ring through the
/// coordinates of the first object.
pub fn base_to_level(model: &FlatGroupoidModel, lvl: &Level) -> RingHom {
    let x = model.base.ring();
    RingHom::new(&x, lvl.ring(), (0..model.base_dim()).map(|i| LaurentPoly::var(lvl.ring(), lvl.base_var(i))).collect())
        .expect("base embedding")
}

impl StructureMaps {
    pub fn build(tower: &Tower, n: usize) -> Result<Self, ModelError> {
        let model = tower.model();
        let c = model.conventions;
        let lvl = tower.level(n);
        let ring = lvl.ring().clone();
        let nu = model.rank();
        let e = model.base_dim();
        let gdim = lvl.group_dim();
        let dim = lvl.dim();
        let zero = LaurentPoly::zero(&ring);

        // ω_{qr} = π_{qr}^* ω with ω = −omega_source·μ^{(1)} on X_1
        let mut omega = BTreeMap::new();
        if nu > 0 {
            for q in 0..=n {
                for r in q + 1..=n {
                    let seg = tower.segment(n, q, r);
                    let part = &seg.parts[0];
                    let w: Vec<Vec<Rational>> = (0..nu)
                        .map(|a| {
                            let mut row = vec![Rational::zero(); dim];
                            for (d, x) in &part.coframe[a] {
                                let k = constant(x).expect("invariant coframe pulls back to constants");
                                row[*d] = -rational::int(c.omega_source.into()) * k;
                            }
                            row
                        })
                        .collect();
                    let rev: Vec<Vec<Rational>> = w
                        .iter()
                        .map(|row| row.iter().map(|x| x * rational::int(c.omega_reverse.into())).collect())
                        .collect();
                    omega.insert((q, r), w);
                    omega.insert((r, q), rev);
                }
            }
        }

        // group part of ρ_j from ω_{0r}(ρ_j) = omega_first·[j=0] + omega_second·[j=r]
        let mut rho = vec![vec![vec![zero.clone(); nu]; dim]; n + 1];
        if nu > 0 && n > 0 {
            let mut m = Vec::new();
            for r in 1..=n {
                for a in 0..nu {
                    m.push(omega[&(0, r)][a][..gdim].to_vec());
                }
            }
            let minv =
                invert(&m).ok_or_else(|| ModelError::Axiom { identity: format!("ω_0r degenerate on level {n}") })?;
            for (j, rho_j) in rho.iter_mut().enumerate() {
                for b in 0..nu {
                    let rhs: Vec<Rational> = (1..=n)
                        .flat_map(|r| {
                            (0..nu).map(move |a| {
                                let mut v = 0i64;
                                if a == b {
                                    if j == 0 {
                                        v += i64::from(c.omega_first);
                                    }
                                    if j == r {
                                        v += i64::from(c.omega_second);
                                    }
                                }
                                rational::int(v)
                            })
                        })
                        .collect();
                    for (col, row) in minv.iter().enumerate() {
                        let y: Rational = row.iter().zip(&rhs).map(|(p, q)| p * q).sum();
                        rho_j[col][b] = LaurentPoly::constant(&ring, y);
                    }
                }
            }
        }
        // the first object moves along the anchor; the others keep x_0 fixed
        let emb = base_to_level(model, &lvl);
        for i in 0..e {
            for a in 0..nu {
                rho[0][gdim + i][a] = emb.map(&model.anchor()[i][a]);
            }
        }
        if c.rho_flip_level == Some(n) {
            for row in rho.iter_mut().flatten().flatten() {
                *row = -&*row;
            }
        }

        // η_q(ε_i) = θ_i + Σ y_c θ_c (group c) with ρ_j(η_q ε_i) = 0 for j ≠ q
        let mut eta = Vec::with_capacity(n + 1);
        for q in 0..=n {
            let mut rows = Vec::with_capacity(e);
            let mut m = Vec::new();
            for j in (0..=n).filter(|j| *j != q) {
                for a in 0..nu {
                    m.push(
                        (0..gdim)
                            .map(|col| constant(&rho[j][col][a]).expect("constant group part"))
                            .collect::<Vec<_>>(),
                    );
                }
            }
            let minv = if gdim > 0 {
                Some(invert(&m).ok_or_else(|| ModelError::Axiom { identity: format!("ρ degenerate on level {n}") })?)
            } else {
                None
            };
            for i in 0..e {
                let mut row = vec![zero.clone(); dim];
                row[gdim + i] = LaurentPoly::one(&ring);
                if let Some(minv) = &minv {
                    let rhs: Vec<LaurentPoly> = (0..=n)
                        .filter(|j| *j != q)
                        .flat_map(|j| (0..nu).map(move |a| (j, a)))
                        .map(|(j, a)| -&rho[j][gdim + i][a])
                        .collect();
                    for (col, mrow) in minv.iter().enumerate() {
                        let mut y = zero.clone();
                        for (k, r) in mrow.iter().zip(&rhs) {
                            if !k.is_zero() && !r.is_zero() {
                                y = &y + &r.scale(k);
                            }
                        }
                        row[col] = y;
                    }
                }
                rows.push(row);
            }
            eta.push(rows);
        }
        Ok(StructureMaps { n, rho, eta, omega })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckOutcome {
    pub identity: String,
    pub level: usize,
    pub passed: bool,
    pub witness: Option<Witness>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct StructureReport {
    pub checks: Vec<CheckOutcome>,
}

impl StructureReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.checks.iter().filter(|c| !c.passed)
    }

    fn record(&mut self, identity: &str, level: usize, witness: Option<String>) {
        self.checks.push(CheckOutcome {
            identity: identity.to_string(),
            level,
            passed: witness.is_none(),
            witness: witness.map(|w| Witness::new(identity, Some(level), w)),
        });
    }
}

fn first_mismatch<T: PartialEq + std::fmt::Display>(pairs: impl IntoIterator<Item = (String, T, T)>) -> Option<String> {
    pairs.into_iter().find(|(_, a, b)| a != b).map(|(loc, a, b)| format!("{loc}: {a} != {b}"))
}

/// Applies ρ_j to a covector given as coframe coefficients.
fn rho_of(
    maps: &StructureMaps,
    j: usize,
    covector: &[(usize, LaurentPoly)],
    ring: &Arc<Ring>,
    nu: usize,
) -> Vec<LaurentPoly> {
    let mut out = vec![LaurentPoly::zero(ring); nu];
    for (d, x) in covector {
        for (a, slot) in out.iter_mut().enumerate() {
            let r = &maps.rho[j][*d][a];
            if !r.is_zero() {
                *slot = &*slot + &(x * r);
            }
        }
    }
    out
}

/// The exchange law `ρ_j f^* = f^* Σ_{θ(i)=j} ρ_i` for an operator pullback.
fn exchange_law(tower: &Tower, f: &Pullback, theta: &[usize]) -> Result<Option<String>, ModelError> {
    let model = tower.model();
    let nu = model.rank();
    let dom = StructureMaps::build(tower, f.domain)?;
    let cod = StructureMaps::build(tower, f.codomain)?;
    let dl = tower.level(f.domain);
    for part in &f.parts {
        for (c, row) in part.coframe.iter().enumerate() {
            for j in 0..=f.domain {
                let lhs = rho_of(&dom, j, row, dl.ring(), nu);
                let mut rhs = vec![LaurentPoly::zero(dl.ring()); nu];
                for (i, t) in theta.iter().enumerate() {
                    if *t == j {
                        for (a, slot) in rhs.iter_mut().enumerate() {
                            *slot = &*slot + &part.hom.map(&cod.rho[i][c][a]);
                        }
                    }
                }
                if let Some(w) = first_mismatch(
                    (0..nu).map(|a| (format!("ρ_{j} on covector {c}, υ_{a}"), lhs[a].clone(), rhs[a].clone())),
                ) {
                    return Ok(Some(w));
                }
            }
        }
    }
    Ok(None)
}

/// Certifies the structure maps as exact identities on levels `0..=n_max`.
pub fn validate_structure(tower: &Tower, n_max: usize) -> Result<StructureReport, ModelError> {
    let model = tower.model();
    let c = model.conventions;
    let nu = model.rank();
    let e = model.base_dim();
    let mut report = StructureReport::default();
    for n in 0..=n_max {
        let lvl = tower.level(n);
        let ring = lvl.ring();
        let gdim = lvl.group_dim();
        let maps = StructureMaps::build(tower, n)?;
        let emb = base_to_level(model, &lvl);
        let phi = |i: usize, a: usize| emb.map(&model.anchor()[i][a]);

        let mut w = None;
        for q in 0..=n {
            for i in 0..e {
                for cc in 0..lvl.dim() {
                    let got = &maps.eta[q][i][cc];
                    let want = if cc == gdim + i {
                        LaurentPoly::one(ring)
                    } else if cc >= gdim {
                        LaurentPoly::zero(ring)
                    } else {
                        continue;
                    };
                    if *got != want {
                        w = Some(format!("δη_{q}(ε_{i}) coefficient {cc}: {got}"));
                    }
                }
            }
        }
        report.record("δη_q = id", n, w);

        let mut w = None;
        'duality: for q in 0..=n {
            for i in 0..e {
                let cov: Vec<(usize, LaurentPoly)> =
                    maps.eta[q][i].iter().cloned().enumerate().filter(|(_, x)| !x.is_zero()).collect();
                for j in 0..=n {
                    let got = rho_of(&maps, j, &cov, ring, nu);
                    for a in 0..nu {
                        let want = if j == q { phi(i, a) } else { LaurentPoly::zero(ring) };
                        if got[a] != want {
                            w = Some(format!("ρ_{j}η_{q}(ε_{i}) along υ_{a}: {} != {want}", got[a]));
                            break 'duality;
                        }
                    }
                }
            }
        }
        report.record("ρ_j η_q = δ_jq φ", n, w);

        let mut w = None;
        'sum: for cc in 0..lvl.dim() {
            for a in 0..nu {
                let mut s = LaurentPoly::zero(ring);
                for q in 0..=n {
                    s = &s + &maps.rho[q][cc][a];
                }
                let want = if cc >= gdim { phi(cc - gdim, a) } else { LaurentPoly::zero(ring) };
                if s != want {
                    w = Some(format!("Σρ_q({}) along υ_{a}: {s} != {want}", lvl.coframe_label(cc)));
                    break 'sum;
                }
            }
        }
        report.record("Σρ_q = φδ", n, w);

        let mut w = None;
        'omega: for (&(q, r), om) in &maps.omega {
            for j in 0..=n {
                let expected = if j == q {
                    i64::from(c.omega_first)
                } else if j == r {
                    i64::from(c.omega_second)
                } else {
                    0
                };
                for a in 0..nu {
                    for b in 0..nu {
                        let mut v = LaurentPoly::zero(ring);
                        for (cc, k) in om[a].iter().enumerate() {
                            if !k.is_zero() {
                                v = &v + &maps.rho[j][cc][b].scale(k);
                            }
                        }
                        let want = if a == b { rational::int(expected) } else { Rational::zero() };
                        if v != LaurentPoly::constant(ring, want.clone()) {
                            w = Some(format!("ω_{q}{r}(ρ_{j}) entry ({a},{b}): {v} != {}", rational::render(&want)));
                            break 'omega;
                        }
                    }
                }
            }
            if om.iter().any(|row| row[gdim..].iter().any(|x| !x.is_zero())) {
                w = Some(format!("ω_{q}{r} does not vanish on E"));
                break;
            }
        }
        report.record("ω_qr(ρ_j) Kronecker", n, w);

        if n >= 1 {
            let mut w = None;
            for q in 0..n {
                let f = tower.degeneracy(n, q);
                let theta: Vec<usize> = (0..=n).map(|j| if j <= q { j } else { j - 1 }).collect();
                if let Some(x) = exchange_law(tower, &f, &theta)? {
                    w = Some(format!("ι_{q}: {x}"));
                    break;
                }
            }
            report.record("ρ/ι^* exchange", n, w);
        }
        if n < n_max {
            let mut w = None;
            for q in 0..=n + 1 {
                let f = tower.face(n, q);
                let theta: Vec<usize> = (0..=n + 1).filter(|j| *j != q).collect();
                if let Some(x) = exchange_law(tower, &f, &theta)? {
                    w = Some(format!("π̂_{q}: {x}"));
                    break;
                }
            }
            report.record("ρ/π̂^* exchange", n, w);
        }
        if n == 1 && nu > 0 {
            report.record("ω on source normals", 1, source_normal_check(tower, &maps));
        }
    }
    Ok(report)
}

/// Frame field dual to coframe element `c` as a coordinate vector field.
fn frame_field(lvl: &Level, c: usize) -> VectorField {
    let f = VectorField::coordinate(lvl.ring(), c);
    match lvl.coframe(c) {
        Coframe::Exact => f,
        Coframe::Log => f.scale(&LaurentPoly::var(lvl.ring(), c)),
    }
}

/// The fields on `X_1` tangent to the target fibres whose normal component
/// is `−υ_a`, i.e. the infinitesimal motion of the source object.
fn source_normals(tower: &Tower) -> Vec<VectorField> {
    let model = tower.model();
    let lvl = tower.level(1);
    let emb = base_to_level(model, &lvl);
    (0..model.rank())
        .map(|a| {
            let mut v = frame_field(&lvl, lvl.group_var(1, a)).scale(&-&LaurentPoly::one(lvl.ring()));
            for i in 0..model.base_dim() {
                v = v.add(&frame_field(&lvl, lvl.base_var(i)).scale(&emb.map(&model.anchor()[i][a])));
            }
            v
        })
        .collect()
}

/// Coframe coefficient `θ_c(v)` of a coordinate vector field.
fn coframe_value(lvl: &Level, c: usize, v: &VectorField) -> LaurentPoly {
    let x = &v.comps()[c];
    match lvl.coframe(c) {
        Coframe::Exact => x.clone(),
        Coframe::Log => x.div_unit(&LaurentPoly::var(lvl.ring(), c)).expect("unit"),
    }
}

fn source_normal_check(tower: &Tower, maps: &StructureMaps) -> Option<String> {
    let lvl = tower.level(1);
    let target = tower.vertex(1, 1);
    let om = &maps.omega[&(0, 1)];
    for (a, v) in source_normals(tower).iter().enumerate() {
        for img in target.parts[0].hom.images() {
            let moved = v.apply(img);
            if !moved.is_zero() {
                return Some(format!("source normal {a} moves the target: {moved}"));
            }
        }
        for (b, row) in om.iter().enumerate() {
            let mut val = LaurentPoly::zero(lvl.ring());
            for (c, k) in row.iter().enumerate() {
                if !k.is_zero() {
                    val = &val + &coframe_value(&lvl, c, v).scale(k);
                }
            }
            let want = if a == b { LaurentPoly::one(lvl.ring()) } else { LaurentPoly::zero(lvl.ring()) };
            if val != want {
                return Some(format!("ω(s^*ν_{a}) along υ_{b}: {val} != {want}"));
            }
        }
    }
    None
}

#[derive(Clone, Debug)]
pub struct DerivedConnection {
    /// `christoffel[i][a][b]`: `∇_{X_i} ν_a = Σ_b Γ ν_b`, over the base ring.
    pub christoffel: Vec<Vec<Vec<LaurentPoly>>>,
    /// `psi[c][a][b]`: `Ψ(ν_c, ν_a) = Σ_b psi ν_b`, over the base ring.
    pub psi: Vec<Vec<Vec<LaurentPoly>>>,
    pub curvature_vanishes: bool,
    /// Whether `∇^0 − ∇^1 = ω_{01}(Ψ)` holds on `X_1`.
    pub difference_formula: bool,
}

impl DerivedConnection {
    pub fn is_trivial(&self) -> bool {
        self.christoffel.iter().flatten().flatten().all(|x| x.is_zero())
            && self.psi.iter().flatten().flatten().all(|x| x.is_zero())
    }
}

/// Evaluates `∇_v ν = ι^* ω[ρ_s(s^*ν), s^*v]` in the model frame.
pub fn derived_connection(tower: &Tower) -> Result<DerivedConnection, ModelError> {
    let model = tower.model();
    if model.check_flatness() != crate::field::Flatness::Flat {
        return Err(ModelError::Unsupported("derived connection of a non-flat model; see check_flatness".into()));
    }
    let nu = model.rank();
    let e = model.base_dim();
    let x = model.base.ring();
    if nu == 0 {
        return Ok(DerivedConnection {
            christoffel: vec![Vec::new(); e],
            psi: Vec::new(),
            curvature_vanishes: true,
            difference_formula: true,
        });
    }
    let lvl = tower.level(1);
    let maps = StructureMaps::build(tower, 1)?;
    let om = &maps.omega[&(0, 1)];
    let unit = RingHom::new(
        lvl.ring(),
        &x,
        (0..nu)
            .map(|_| LaurentPoly::constant(&x, model.group.unit_value()))
            .chain((0..e).map(|i| LaurentPoly::var(&x, i)))
            .collect(),
    )?;
    let normals = source_normals(tower);
    let omega_of = |v: &VectorField, b: usize| {
        let mut val = LaurentPoly::zero(lvl.ring());
        for (c, k) in om[b].iter().enumerate() {
            if !k.is_zero() {
                val = &val + &coframe_value(&lvl, c, v).scale(k);
            }
        }
        val
    };
    let christoffel: Vec<Vec<Vec<LaurentPoly>>> = (0..e)
        .map(|i| {
            let h = frame_field(&lvl, lvl.base_var(i));
            (0..nu)
                .map(|a| {
                    let br = normals[a].bracket(&h);
                    (0..nu).map(|b| unit.map(&omega_of(&br, b))).collect()
                })
                .collect()
        })
        .collect();

    // curvature of Γ in the commuting base frame
    let base_field = |i: usize, f: &LaurentPoly| match model.base.kind(i) {
        crate::space::CoordKind::Affine => f.partial(i),
        crate::space::CoordKind::Torus => f.euler(i),
    };
    let mut curvature_vanishes = true;
    for i in 0..e {
        for j in 0..e {
            for a in 0..nu {
                for b in 0..nu {
                    let mut f = &base_field(i, &christoffel[j][a][b]) - &base_field(j, &christoffel[i][a][b]);
                    for m in 0..nu {
                        f = &f + &(&christoffel[i][a][m] * &christoffel[j][m][b]);
                        f = &f - &(&christoffel[j][a][m] * &christoffel[i][m][b]);
                    }
                    curvature_vanishes &= f.is_zero();
                }
            }
        }
    }

    // connection forms of s^*∇ and t^*∇ on X_1 in the coframe of X_1
    let emb = base_to_level(model, &lvl);
    let target = tower.vertex(1, 1);
    let tgt = &target.parts[0];
    let dim = lvl.dim();
    let diff: Vec<Vec<Vec<LaurentPoly>>> = (0..nu)
        .map(|a| {
            (0..nu)
                .map(|b| {
                    let mut form = vec![LaurentPoly::zero(lvl.ring()); dim];
                    for i in 0..e {
                        form[lvl.base_var(i)] = &form[lvl.base_var(i)] + &emb.map(&christoffel[i][a][b]);
                        let coeff = tgt.hom.map(&christoffel[i][a][b]);
                        for (d, xx) in &tgt.coframe[i] {
                            form[*d] = &form[*d] - &(&coeff * xx);
                        }
                    }
                    form
                })
                .collect()
        })
        .collect();
    let psi: Vec<Vec<Vec<LaurentPoly>>> = (0..nu)
        .map(|c| {
            (0..nu)
                .map(|a| {
                    (0..nu)
                        .map(|b| {
                            let mut val = LaurentPoly::zero(lvl.ring());
                            for d in 0..dim {
                                if !diff[a][b][d].is_zero() {
                                    val = &val + &(&diff[a][b][d] * &coframe_value(&lvl, d, &normals[c]));
                                }
                            }
                            unit.map(&val)
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    let mut difference_formula = true;
    for a in 0..nu {
        for b in 0..nu {
            for d in 0..dim {
                let mut rhs = LaurentPoly::zero(lvl.ring());
                for c in 0..nu {
                    let k = &om[c][d];
                    if !k.is_zero() {
                        rhs = &rhs + &emb.map(&psi[c][a][b]).scale(k);
                    }
                }
                difference_formula &= diff[a][b][d] == rhs;
            }
        }
    }
    Ok(DerivedConnection { christoffel, psi, curvature_vanishes, difference_formula })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::ActionModel;
    use crate::group::{FiniteGroup, GroupModel};
    use crate::model::{build_pair_model, build_transformation_model, build_vector_bundle_model, SignConventions};
    use crate::space::SpaceModel;

    fn tower(m: FlatGroupoidModel) -> Tower {
        Tower::new(Arc::new(m))
    }

    fn bgm() -> FlatGroupoidModel {
        let g = GroupModel::torus(&["g"]);
        let pt = SpaceModel::point();
        let a = ActionModel::trivial(&g, &pt);
        build_transformation_model(g, pt, a).unwrap()
    }

    fn a1gm() -> FlatGroupoidModel {
        let g = GroupModel::torus(&["g"]);
        let b = SpaceModel::affine(&["x"]);
        let a = ActionModel::monomial(&g, &b, &[vec![1]]).unwrap();
        build_transformation_model(g, b, a).unwrap()
    }

    #[test]
    fn level_one_maps_of_the_weighted_line() {
        let t = tower(a1gm());
        let m = StructureMaps::build(&t, 1).unwrap();
        // ρ_0(μ) = −1, ρ_0(dx) = x, ρ_1(μ) = 1
        assert_eq!(m.rho[0][0][0].to_string(), "-1");
        assert_eq!(m.rho[0][1][0].to_string(), "x");
        assert_eq!(m.rho[1][0][0].to_string(), "1");
        assert!(m.rho[1][1][0].is_zero());
        // η_1(ε) = dx + x μ
        assert_eq!(m.eta[1][0][0].to_string(), "x");
        assert!(m.eta[0][0][0].is_zero());
        assert_eq!(m.omega[&(0, 1)][0][0], rational::int(-1));
    }

    #[test]
    fn bundled_models_pass_up_to_four() {
        let gm = SpaceModel::torus(&["t"]);
        let g = GroupModel::torus(&["g"]);
        let z2 = GroupModel::finite(FiniteGroup::cyclic(2));
        let models = vec![
            bgm(),
            a1gm(),
            build_transformation_model(g.clone(), gm.clone(), ActionModel::monomial(&g, &gm, &[vec![1]]).unwrap())
                .unwrap(),
            build_transformation_model(
                z2,
                gm.clone(),
                ActionModel::parse_finite(&gm, &[vec!["t"], vec!["t^-1"]]).unwrap(),
            )
            .unwrap(),
            build_pair_model(g).unwrap(),
            build_vector_bundle_model(SpaceModel::affine(&["x"]), 1).unwrap(),
        ];
        for m in models {
            let name = m.name.clone();
            let rep = validate_structure(&tower(m), 4).unwrap();
            assert!(rep.passed(), "{name}: {:?}", rep.failures().collect::<Vec<_>>());
        }
    }

    #[test]
    fn flipped_rho_level_is_caught_by_the_exchange_law() {
        let m = bgm().with_conventions(SignConventions { rho_flip_level: Some(2), ..Default::default() });
        let rep = validate_structure(&tower(m), 3).unwrap();
        let failed: Vec<_> = rep.failures().map(|f| f.identity.clone()).collect();
        assert!(failed.iter().any(|f| f.contains("exchange")), "{failed:?}");
    }

    #[test]
    fn each_omega_convention_is_load_bearing() {
        for (name, c) in SignConventions::single_flips() {
            if !name.starts_with("omega") {
                continue;
            }
            let rep = validate_structure(&tower(a1gm().with_conventions(c)), 2).unwrap();
            assert!(!rep.passed(), "{name}");
        }
    }

    #[test]
    fn abelian_derived_connections_are_trivial() {
        for m in [bgm(), a1gm(), build_vector_bundle_model(SpaceModel::affine(&["x"]), 2).unwrap()] {
            let dc = derived_connection(&tower(m)).unwrap();
            assert!(dc.is_trivial() && dc.curvature_vanishes && dc.difference_formula);
        }
    }

    #[test]
    fn small_inverse() {
        let m = vec![vec![rational::int(2), rational::int(1)], vec![rational::int(1), rational::int(1)]];
        let inv = invert(&m).unwrap();
        assert_eq!(inv, vec![vec![rational::int(1), rational::int(-1)], vec![rational::int(-1), rational::int(2)]]);
        assert!(invert(&[vec![rational::int(0)]]).is_none());
    }
}
