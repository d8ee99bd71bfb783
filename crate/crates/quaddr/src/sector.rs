//! Sector keys, orbits and monomial bases of sector pieces.

use std::collections::{BTreeSet, HashMap};

use quaddr_exact::rational::{self, Rational};
use quaddr_exact::{LaurentPoly, SparseVec};
use serde::Serialize;

use crate::action::ActionModel;
use crate::complex::{AmbientElement, KElement, QuadComplex, Slot};
use crate::error::{ModelError, Witness};
use crate::group::GroupKind;
use crate::model::FlatGroupoidModel;
use crate::space::CoordKind;

pub type SectorKey = Vec<i32>;

/// A set of keys closed under the action (a single key unless the group is finite).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Sector {
    pub keys: Vec<SectorKey>,
}

impl Sector {
    pub fn representative(&self) -> &SectorKey {
        &self.keys[0]
    }

    pub fn label(&self) -> String {
        format!("{:?}", self.keys[0])
    }
}

/// Images of a key under the finite group (the key itself otherwise).
pub fn orbit(model: &FlatGroupoidModel, key: &SectorKey) -> Result<Vec<SectorKey>, ModelError> {
    let mut out: BTreeSet<SectorKey> = BTreeSet::new();
    out.insert(key.clone());
    if let ActionModel::Finite(homs) = &model.action {
        let g = &model.grading;
        let x = model.base.ring();
        let e = model.base_dim();
        if (0..e)
            .any(|i| (0..g.key_dim).map(|c| g.base[i][c].abs()).sum::<i32>() != 1 || g.base[i].iter().any(|w| *w < 0))
        {
            return Err(ModelError::Invalid("finite-group gradings need unit base weights".into()));
        }
        let coord_of = |i: usize| g.base[i].iter().position(|w| *w == 1).expect("unit weight");
        let exps: Vec<i32> = (0..e).map(|i| key[coord_of(i)]).collect();
        let mono = LaurentPoly::try_monomial(&x, exps, rational::one())?;
        for h in homs {
            let img = h.apply(&mono)?;
            let (ex, _) = img
                .as_monomial()
                .ok_or_else(|| ModelError::Invalid("finite action is not monomial; cannot grade".into()))?;
            let mut k = vec![0; g.key_dim];
            for i in 0..e {
                k[coord_of(i)] += ex[i];
            }
            out.insert(k);
        }
    }
    Ok(out.into_iter().collect())
}

/// Every sector with keys in the configured box, one per orbit.
pub fn sectors(model: &FlatGroupoidModel) -> Result<Vec<Sector>, ModelError> {
    let g = &model.grading;
    let mut keys: Vec<SectorKey> = vec![Vec::new()];
    for c in 0..g.key_dim {
        let lo = if g.nonnegative[c] { 0 } else { -g.bound };
        keys = keys
            .into_iter()
            .flat_map(|k| {
                (lo..=g.bound).map(move |v| {
                    let mut k = k.clone();
                    k.push(v);
                    k
                })
            })
            .collect();
    }
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for k in keys {
        let o = orbit(model, &k)?;
        if seen.insert(o.clone()) {
            out.push(Sector { keys: o });
        }
    }
    Ok(out)
}

/// Whether the sector touches the boundary of the key box.
pub fn on_boundary(model: &FlatGroupoidModel, s: &Sector) -> bool {
    s.keys.iter().any(|k| k.iter().any(|v| v.abs() == model.grading.bound))
}

/// Exponent window of torus group coordinate `a` in a sector.
pub fn window(model: &FlatGroupoidModel, s: &Sector, a: usize) -> Vec<i32> {
    let g = &model.grading;
    let mut w: BTreeSet<i32> = (-g.window..=g.window).collect();
    for k in &s.keys {
        w.insert(g.characters[a].iter().zip(k).map(|(c, x)| c * x).sum());
    }
    w.into_iter().collect()
}

/// Character of the torus on a sector (zero for other groups).
pub fn character(model: &FlatGroupoidModel, key: &SectorKey) -> Vec<i32> {
    model.grading.characters.iter().map(|row| row.iter().zip(key).map(|(c, x)| c * x).sum()).collect()
}

/// A monomial basis vector.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisKey {
    pub p: usize,
    pub k: usize,
    pub n: usize,
    pub slot: Slot,
    pub exps: Vec<i32>,
}

impl BasisKey {
    pub fn total_degree(&self) -> usize {
        self.p + self.k + self.n
    }

    pub fn element(&self, cx: &QuadComplex) -> KElement {
        let ring = cx.tower().level(self.n).ring().clone();
        let c = LaurentPoly::monomial(&ring, self.exps.clone(), rational::one());
        KElement::from_terms(self.p, self.k, self.n, [(self.slot.clone(), c)])
    }

    pub fn ambient(&self, cx: &QuadComplex) -> AmbientElement {
        let ring = cx.tower().level(self.n).ring().clone();
        let c = LaurentPoly::monomial(&ring, self.exps.clone(), rational::one());
        AmbientElement::from_terms(self.p, self.k, self.n, [(self.slot.clone(), c)])
    }
}

fn subsets(n: usize, k: usize) -> Vec<Vec<u16>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<u16>, out: &mut Vec<Vec<u16>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i as u16);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

fn multisets(n: usize, k: usize) -> Vec<Vec<u16>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<u16>, out: &mut Vec<Vec<u16>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i as u16);
            go(i, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if n == 0 && k > 0 {
        return out;
    }
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// How a level variable contributes to the key.
#[derive(Clone, Debug)]
enum VarRole {
    /// Torus group coordinate, exponent drawn from a window.
    Window(Vec<i32>),
    /// Non-negative exponent with the given weight.
    Bounded(Vec<i32>),
    /// Laurent base coordinate owning one key coordinate.
    Owner(usize),
}

struct Enumerator<'a> {
    roles: &'a [VarRole],
}

impl Enumerator<'_> {
    fn run(&self, rem: Vec<i32>) -> Vec<Vec<i32>> {
        let mut out = Vec::new();
        let mut cur = vec![0i32; self.roles.len()];
        self.go(0, rem, &mut cur, &mut out);
        out
    }

    fn go(&self, i: usize, rem: Vec<i32>, cur: &mut Vec<i32>, out: &mut Vec<Vec<i32>>) {
        if i == self.roles.len() {
            if rem.iter().all(|x| *x == 0) {
                out.push(cur.clone());
            }
            return;
        }
        match &self.roles[i] {
            VarRole::Window(w) => {
                for x in w {
                    cur[i] = *x;
                    self.go(i + 1, rem.clone(), cur, out);
                }
            }
            VarRole::Bounded(w) => {
                if w.iter().all(|x| *x == 0) {
                    // weightless polynomial variables would make the sector infinite
                    cur[i] = 0;
                    self.go(i + 1, rem, cur, out);
                    return;
                }
                let max = w
                    .iter()
                    .zip(&rem)
                    .filter(|(wc, _)| **wc > 0)
                    .map(|(wc, r)| if *r < 0 { -1 } else { r / wc })
                    .min()
                    .unwrap_or(0);
                for x in 0..=max.max(-1) {
                    let next: Vec<i32> = rem.iter().zip(w).map(|(r, wc)| r - wc * x).collect();
                    cur[i] = x;
                    self.go(i + 1, next, cur, out);
                }
            }
            VarRole::Owner(c) => {
                cur[i] = rem[*c];
                let mut next = rem.clone();
                next[*c] = 0;
                self.go(i + 1, next, cur, out);
            }
        }
    }
}

/// Weight of a coframe element of `X_n` (full coframe indexing).
fn coframe_weight(model: &FlatGroupoidModel, n: usize, c: usize) -> Vec<i32> {
    let g = &model.grading;
    let nu = model.rank();
    let gdim = n * nu;
    if c < gdim {
        match model.group.kind {
            GroupKind::Additive => g.group[c % nu].clone(),
            _ => vec![0; g.key_dim],
        }
    } else {
        let i = c - gdim;
        match model.base.kind(i) {
            CoordKind::Affine => g.base[i].clone(),
            CoordKind::Torus => vec![0; g.key_dim],
        }
    }
}

fn roles(model: &FlatGroupoidModel, sector: &Sector, n: usize) -> Result<Vec<VarRole>, ModelError> {
    let g = &model.grading;
    let nu = model.rank();
    let mut out = Vec::new();
    for _ in 0..n {
        for a in 0..nu {
            out.push(match model.group.kind {
                GroupKind::Torus => VarRole::Window(window(model, sector, a)),
                _ => VarRole::Bounded(g.group[a].clone()),
            });
        }
    }
    for i in 0..model.base_dim() {
        out.push(match model.base.kind(i) {
            CoordKind::Affine => VarRole::Bounded(g.base[i].clone()),
            CoordKind::Torus => {
                let w = &g.base[i];
                let c = w.iter().position(|x| *x != 0);
                let ok = c.is_some_and(|c| {
                    w[c] == 1
                        && w.iter().filter(|x| **x != 0).count() == 1
                        && (0..model.base_dim()).all(|j| j == i || g.base[j][c] == 0)
                        && g.group.iter().all(|r| r[c] == 0)
                });
                if !ok {
                    return Err(ModelError::Invalid(format!(
                        "Laurent coordinate {} must own one key coordinate",
                        model.base.name(i)
                    )));
                }
                VarRole::Owner(c.expect("checked"))
            }
        });
    }
    Ok(out)
}

fn add(a: &mut [i32], b: &[i32], sign: i32) {
    for (x, y) in a.iter_mut().zip(b) {
        *x += sign * y;
    }
}

/// Monomial basis of `K^{p,k,n}` in a sector.
pub fn k_basis(cx: &QuadComplex, sector: &Sector, p: usize, k: usize, n: usize) -> Result<Vec<BasisKey>, ModelError> {
    let model = cx.model();
    let e = model.base_dim();
    let nu = model.rank();
    if p < k || p - k > e || (nu == 0 && k > 0) {
        return Ok(Vec::new());
    }
    let lvl = cx.tower().level(n);
    let rl = roles(model, sector, n)?;
    let gdim = lvl.group_dim();
    let mut out = Vec::new();
    for wedge in subsets(e, p - k) {
        for sym in multisets(nu, k) {
            for key in &sector.keys {
                let mut rem = key.clone();
                for w in &wedge {
                    add(&mut rem, &coframe_weight(model, n, gdim + *w as usize), -1);
                }
                if model.group.kind == GroupKind::Additive {
                    for a in &sym {
                        add(&mut rem, &model.grading.group[*a as usize], -1);
                    }
                }
                for exps in (Enumerator { roles: &rl }).run(rem) {
                    for comp in 0..lvl.components().len() {
                        out.push(BasisKey {
                            p,
                            k,
                            n,
                            slot: Slot { component: comp, wedge: wedge.clone(), sym: sym.clone() },
                            exps: exps.clone(),
                        });
                    }
                }
            }
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

/// Monomial basis of ambient forms of degree `f` on `X_n` in a sector.
pub fn ambient_basis(cx: &QuadComplex, sector: &Sector, f: usize, n: usize) -> Result<Vec<BasisKey>, ModelError> {
    let model = cx.model();
    let lvl = cx.tower().level(n);
    let rl = roles(model, sector, n)?;
    let mut out = Vec::new();
    for wedge in subsets(lvl.dim(), f) {
        for key in &sector.keys {
            let mut rem = key.clone();
            for w in &wedge {
                add(&mut rem, &coframe_weight(model, n, *w as usize), -1);
            }
            for exps in (Enumerator { roles: &rl }).run(rem) {
                for comp in 0..lvl.components().len() {
                    out.push(BasisKey {
                        p: f,
                        k: 0,
                        n,
                        slot: Slot { component: comp, wedge: wedge.clone(), sym: Vec::new() },
                        exps: exps.clone(),
                    });
                }
            }
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

/// Lookup from basis keys to positions.
#[derive(Clone, Debug, Default)]
pub struct BasisIndex {
    pub keys: Vec<BasisKey>,
    index: HashMap<BasisKey, usize>,
}

impl BasisIndex {
    pub fn new(keys: Vec<BasisKey>) -> Self {
        let index = keys.iter().cloned().enumerate().map(|(i, k)| (k, i)).collect();
        BasisIndex { keys, index }
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn position(&self, k: &BasisKey) -> Option<usize> {
        self.index.get(k).copied()
    }

    /// Coordinates of an element, or a leak witness naming the first
    /// monomial outside the basis.
    pub fn coordinates(
        &self,
        degree: (usize, usize, usize),
        terms: &std::collections::BTreeMap<Slot, LaurentPoly>,
        out: &mut SparseVec,
        scale: &Rational,
    ) -> Result<(), Witness> {
        let (p, k, n) = degree;
        for (slot, c) in terms {
            for (exps, v) in c.terms() {
                let key = BasisKey { p, k, n, slot: slot.clone(), exps: exps.clone() };
                match self.position(&key) {
                    Some(i) => quaddr_exact::sparse::add_into(out, i, v * scale),
                    None => {
                        return Err(Witness::new(
                            "sector closure",
                            Some(n),
                            format!(
                                "monomial {exps:?} with wedge {:?} sym {:?} at (p,k)=({p},{k}) leaves the sector",
                                slot.wedge, slot.sym
                            ),
                        ))
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{FiniteGroup, GroupModel};
    use crate::model::{build_transformation_model, build_vector_bundle_model};
    use crate::space::SpaceModel;
    use std::sync::Arc;

    fn cx(m: FlatGroupoidModel) -> QuadComplex {
        QuadComplex::new(Arc::new(m)).unwrap()
    }

    #[test]
    fn classifying_space_sector() {
        let g = GroupModel::torus(&["g"]);
        let pt = SpaceModel::point();
        let m = build_transformation_model(g.clone(), pt.clone(), ActionModel::trivial(&g, &pt)).unwrap();
        let s = sectors(&m).unwrap();
        assert_eq!(s.len(), 1);
        let c = cx(m);
        assert_eq!(k_basis(&c, &s[0], 1, 1, 0).unwrap().len(), 1);
        assert_eq!(k_basis(&c, &s[0], 0, 0, 2).unwrap().len(), 9);
        assert_eq!(k_basis(&c, &s[0], 0, 0, 0).unwrap().len(), 1);
    }

    #[test]
    fn inversion_orbits_pair_up_keys() {
        let g = GroupModel::finite(FiniteGroup::cyclic(2));
        let b = SpaceModel::torus(&["t"]);
        let a = ActionModel::parse_finite(&b, &[vec!["t"], vec!["t^-1"]]).unwrap();
        let m = build_transformation_model(g, b, a).unwrap();
        let s = sectors(&m).unwrap();
        assert_eq!(
            s.iter().map(|x| x.keys.clone()).collect::<Vec<_>>(),
            vec![vec![vec![-2], vec![2]], vec![vec![-1], vec![1]], vec![vec![0]]]
        );
        let c = cx(m);
        // t and t^-1 on each of the two components of X_1
        assert_eq!(k_basis(&c, &s[1], 0, 0, 1).unwrap().len(), 4);
    }

    #[test]
    fn vector_bundle_sectors_are_finite() {
        let m = build_vector_bundle_model(SpaceModel::affine(&["x"]), 1).unwrap();
        let s = Sector { keys: vec![vec![1, 2]] };
        let c = cx(m);
        // x·v1^2, x·v1·v2, x·v2^2 on X_2
        assert_eq!(k_basis(&c, &s, 0, 0, 2).unwrap().len(), 3);
        // dx ⊗ υ^2 at n = 0
        assert_eq!(k_basis(&c, &s, 3, 2, 0).unwrap().len(), 1);
    }

    #[test]
    fn ambient_forms_include_group_covectors() {
        let g = GroupModel::torus(&["g"]);
        let b = SpaceModel::affine(&["x"]);
        let m = build_transformation_model(g.clone(), b.clone(), ActionModel::monomial(&g, &b, &[vec![1]]).unwrap())
            .unwrap();
        let c = cx(m);
        let s = Sector { keys: vec![vec![1]] };
        // x·g^w, g^w·dx for w in {-1,0,1}; and μ∧dx, x·μ
        assert_eq!(ambient_basis(&c, &s, 0, 1).unwrap().len(), 3);
        assert_eq!(ambient_basis(&c, &s, 1, 1).unwrap().len(), 6);
        assert_eq!(ambient_basis(&c, &s, 2, 1).unwrap().len(), 3);
    }
}
