//! Pullback of complexes along morphisms of transformation models.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use quaddr_exact::rational::{self, Rational};
use quaddr_exact::sparse::rank_of;
use quaddr_exact::{LaurentPoly, RingHom, SparseVec};
use serde::Serialize;

use crate::action::{product_ring, ActionModel};
use crate::complex::{KElement, QuadComplex};
use crate::engine::{total_complex, FilteredComplex};
use crate::error::{EngineError, ModelError, Witness};
use crate::group::GroupKind;
use crate::identities::{Sampler, SuiteReport};
use crate::model::FlatGroupoidModel;
use crate::sector::BasisIndex;
use crate::simplicial::{coframe_rows, Coframe, MapKind, PullPart, Pullback};

/// The group half of a morphism.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GroupHom {
    /// `matrix[a][b]`: target coordinate `a` in terms of source coordinate
    /// `b` (exponents for tori, coefficients for vector groups).
    Matrix(Vec<Vec<i64>>),
    /// Image of each element of a finite group.
    Elements(Vec<usize>),
}

/// A group homomorphism `H → G` and an equivariant map `Y → X`, given
/// contravariantly as a substitution of the coordinates of `X`.
#[derive(Clone, Debug)]
pub struct Morphism {
    pub group: GroupHom,
    /// From the base ring of the target to the base ring of the source.
    pub base: RingHom,
}

impl Morphism {
    pub fn parse(
        source: &FlatGroupoidModel,
        target: &FlatGroupoidModel,
        group: GroupHom,
        base_images: &[&str],
    ) -> Result<Self, ModelError> {
        let base = RingHom::parse(&target.base.ring(), &source.base.ring(), base_images)?;
        Ok(Morphism { group, base })
    }

    pub fn identity(model: &FlatGroupoidModel) -> Self {
        let group = match model.group.finite_group() {
            Some(f) => GroupHom::Elements((0..f.order()).collect()),
            None => {
                let r = model.rank();
                GroupHom::Matrix((0..r).map(|a| (0..r).map(|b| i64::from(a == b)).collect()).collect())
            }
        };
        Morphism { group, base: RingHom::identity(&model.base.ring()) }
    }

    /// `self ∘ first`, where `first` lands in the source of `self`.
    pub fn after(&self, first: &Morphism) -> Result<Morphism, ModelError> {
        let group = match (&self.group, &first.group) {
            (GroupHom::Matrix(a), GroupHom::Matrix(b)) => GroupHom::Matrix(
                a.iter()
                    .map(|row| {
                        (0..b.first().map_or(0, |r| r.len()))
                            .map(|j| row.iter().zip(b).map(|(x, r)| x * r[j]).sum())
                            .collect()
                    })
                    .collect(),
            ),
            (GroupHom::Elements(a), GroupHom::Elements(b)) => GroupHom::Elements(b.iter().map(|i| a[*i]).collect()),
            _ => return Err(ModelError::Invalid("cannot compose a finite and a connected group map".into())),
        };
        Ok(Morphism { group, base: first.base.after(&self.base)? })
    }
}

fn group_images(
    target: &FlatGroupoidModel,
    hom: &GroupHom,
    ring: &Arc<quaddr_exact::Ring>,
    source_var: impl Fn(usize) -> usize,
) -> Result<Vec<LaurentPoly>, ModelError> {
    let GroupHom::Matrix(m) = hom else { return Ok(Vec::new()) };
    if m.len() != target.rank() {
        return Err(ModelError::Invalid(format!("group map needs {} rows", target.rank())));
    }
    m.iter()
        .map(|row| {
            Ok(match target.group.kind {
                GroupKind::Torus => {
                    let mut exps = vec![0i32; ring.len()];
                    for (b, e) in row.iter().enumerate() {
                        exps[source_var(b)] +=
                            i32::try_from(*e).map_err(|_| ModelError::Invalid("exponent too large".into()))?;
                    }
                    LaurentPoly::try_monomial(ring, exps, rational::one())?
                }
                _ => {
                    let mut p = LaurentPoly::zero(ring);
                    for (b, c) in row.iter().enumerate() {
                        p.add_scaled(&LaurentPoly::var(ring, source_var(b)), &rational::int(*c));
                    }
                    p
                }
            })
        })
        .collect()
}

/// `f^*: K(target) → K(source)` level by level.
pub struct ComplexMap<'a> {
    pub source: &'a QuadComplex,
    pub target: &'a QuadComplex,
    pub morphism: Morphism,
    levels: Mutex<HashMap<usize, Arc<Pullback>>>,
}

impl<'a> ComplexMap<'a> {
    /// Checks shapes and equivariance `f(h·y) = hom(h)·f(y)`.
    pub fn new(source: &'a QuadComplex, target: &'a QuadComplex, morphism: Morphism) -> Result<Self, EngineError> {
        let (s, t) = (source.model(), target.model());
        if s.group.kind != t.group.kind && s.rank() + t.rank() > 0 {
            return Err(EngineError::Refused("group kinds differ".into()));
        }
        match &morphism.group {
            GroupHom::Matrix(m) => {
                if m.len() != t.rank() || m.iter().any(|r| r.len() != s.rank()) {
                    return Err(EngineError::Refused("group matrix has the wrong shape".into()));
                }
            }
            GroupHom::Elements(e) => {
                let (Some(fs), Some(ft)) = (s.group.finite_group(), t.group.finite_group()) else {
                    return Err(EngineError::Refused("element maps need finite groups".into()));
                };
                let hom = e.len() == fs.order()
                    && e.iter().all(|x| *x < ft.order())
                    && (0..fs.order()).all(|a| (0..fs.order()).all(|b| e[fs.mul(a, b)] == ft.mul(e[a], e[b])));
                if !hom {
                    return Err(EngineError::Refused("element map is not a homomorphism".into()));
                }
            }
        }
        let map = ComplexMap { source, target, morphism, levels: Mutex::new(HashMap::new()) };
        map.check_equivariance()?;
        Ok(map)
    }

    fn check_equivariance(&self) -> Result<(), EngineError> {
        let (s, t) = (self.source.model(), self.target.model());
        let violation = |detail: String| EngineError::Violation(Witness::new("equivariance", None, detail));
        match (&s.action, &t.action, &self.morphism.group) {
            (ActionModel::Connected(act_s), ActionModel::Connected(act_t), hom) => {
                let ring = product_ring(&s.group, &s.base);
                let nu = s.rank();
                let mut images = group_images(t, hom, &ring, |b| b)?;
                let incl = RingHom::new(
                    &s.base.ring(),
                    &ring,
                    (0..s.base_dim()).map(|i| LaurentPoly::var(&ring, nu + i)).collect(),
                )?;
                for i in 0..t.base_dim() {
                    images.push(incl.apply(self.morphism.base.image(i))?);
                }
                let product_t = product_ring(&t.group, &t.base);
                let pair = RingHom::new(&product_t, &ring, images)?;
                let lhs = pair.after(act_t)?;
                let rhs = act_s.after(&self.morphism.base)?;
                if lhs != rhs {
                    return Err(violation("f(h·y) and hom(h)·f(y) differ".into()));
                }
            }
            (ActionModel::Finite(hs), ActionModel::Finite(ht), GroupHom::Elements(e)) => {
                for (a, h) in hs.iter().enumerate() {
                    let lhs = self.morphism.base.after(&ht[e[a]])?;
                    let rhs = h.after(&self.morphism.base)?;
                    if lhs != rhs {
                        return Err(violation(format!("element {a}")));
                    }
                }
            }
            _ => return Err(EngineError::Refused("unsupported pair of actions".into())),
        }
        Ok(())
    }

    /// The pullback from level `n` of the target to level `n` of the source.
    pub fn level(&self, n: usize) -> Result<Arc<Pullback>, EngineError> {
        if let Some(p) = self.levels.lock().expect("level cache").get(&n) {
            return Ok(p.clone());
        }
        let (s, t) = (self.source.model(), self.target.model());
        let ls = self.source.tower().level(n);
        let lt = self.target.tower().level(n);
        let ring = ls.ring().clone();
        let embed = RingHom::new(
            &s.base.ring(),
            &ring,
            (0..s.base_dim()).map(|i| LaurentPoly::var(&ring, ls.base_var(i))).collect(),
        )?;
        let base_images: Vec<LaurentPoly> =
            (0..t.base_dim()).map(|i| embed.apply(self.morphism.base.image(i))).collect::<Result<_, _>>()?;
        let mut images = Vec::new();
        for j in 1..=n {
            images.extend(group_images(t, &self.morphism.group, &ring, |b| ls.group_var(j, b))?);
        }
        images.extend(base_images);
        let hom = RingHom::new(lt.ring(), &ring, images)?;
        let cs: Vec<Coframe> = (0..ls.dim()).map(|c| ls.coframe(c)).collect();
        let ct: Vec<Coframe> = (0..lt.dim()).map(|c| lt.coframe(c)).collect();
        let coframe = coframe_rows(&hom, &cs, &ct);
        let parts = ls
            .components()
            .iter()
            .map(|tuple| {
                let image: Vec<usize> = match &self.morphism.group {
                    GroupHom::Elements(e) => tuple.iter().map(|x| e[*x]).collect(),
                    GroupHom::Matrix(_) => tuple.clone(),
                };
                PullPart { component: lt.component_index(&image), hom: hom.clone(), coframe: coframe.clone() }
            })
            .collect();
        let upsilon = match &self.morphism.group {
            GroupHom::Matrix(m) => Some(m.iter().map(|r| r.iter().map(|x| rational::int(*x)).collect()).collect()),
            GroupHom::Elements(_) => None,
        };
        let pb = Arc::new(Pullback { kind: MapKind::Morphism, domain: n, codomain: n, parts, upsilon });
        self.levels.lock().expect("level cache").insert(n, pb.clone());
        Ok(pb)
    }

    pub fn apply(&self, x: &KElement) -> Result<KElement, EngineError> {
        Ok(self.target.pullback_into(self.source, &*self.level(x.n)?, x))
    }

    /// The map as a matrix between truncated total complexes in degree `t`.
    fn matrix(&self, from: &BasisIndex, to: &BasisIndex) -> Result<Vec<SparseVec>, EngineError> {
        from.keys
            .iter()
            .map(|k| {
                let y = self.apply(&k.element(self.target))?;
                let mut v = SparseVec::new();
                to.coordinates(y.degree(), y.terms(), &mut v, &rational::one()).map_err(|w| {
                    EngineError::SectorLeak(Witness::new(
                        "truncation",
                        w.level,
                        format!("image of {:?}: {}", k.exps, w.detail),
                    ))
                })?;
                Ok(v)
            })
            .collect()
    }
}

fn residual_witness(cx: &QuadComplex, identity: &str, x: &KElement, a: &KElement, b: &KElement) -> Option<Witness> {
    if a.is_zero() && b.is_zero() {
        return None;
    }
    let r = if a.is_zero() {
        b.scale(&rational::int(-1))
    } else if b.is_zero() {
        a.clone()
    } else {
        a.sub(b)
    };
    (!r.is_zero())
        .then(|| Witness::new(identity, Some(x.n), format!("on {} the residual is {}", cx.render(x), cx.render(&r))))
}

/// `f^*` commutes with each differential on every target basis element of
/// total degree `≤ D`, and with cup on sampled pairs.
pub fn commutation_report(
    map: &ComplexMap,
    max_degree: usize,
    pairs: usize,
    seed: u64,
) -> Result<SuiteReport, EngineError> {
    let mut report = SuiteReport::default();
    let tcx = total_complex(map.target, max_degree)?;
    let names = ["f^* commutes with φ", "f^* commutes with ∂", "f^* commutes with d", "f^* commutes with ι"];
    for t in 0..=max_degree {
        for key in &tcx.bases[t].keys {
            let x = key.element(map.target);
            let fx = map.apply(&x)?;
            let before = map.target.total_differential(&x);
            let after = map.source.total_differential(&fx);
            for i in 0..4 {
                let lhs = if before[i].is_zero() { before[i].clone() } else { map.apply(&before[i])? };
                report.push(names[i], residual_witness(map.source, names[i], &x, &lhs, &after[i]));
            }
        }
    }
    let mut sampler = Sampler::new(map.target, seed, 2)?;
    for _ in 0..pairs {
        let (x, y) = (sampler.element()?, sampler.element()?);
        let lhs = map.apply(&map.target.cup(&x, &y))?;
        let rhs = map.source.cup(&map.apply(&x)?, &map.apply(&y)?);
        report.push("f^* respects cup", residual_witness(map.source, "f^* respects cup", &x, &lhs, &rhs));
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InducedMap {
    pub source_dims: Vec<usize>,
    pub target_dims: Vec<usize>,
    /// Rank of `H(f^*)` per degree.
    pub ranks: Vec<usize>,
}

impl InducedMap {
    pub fn is_isomorphism(&self) -> bool {
        self.ranks == self.source_dims && self.ranks == self.target_dims
    }
}

fn cycles(c: &FilteredComplex, t: usize) -> Vec<SparseVec> {
    c.d[t].kernel_and_image().kernel
}

fn boundaries(c: &FilteredComplex, t: usize) -> Vec<SparseVec> {
    if t == 0 {
        Vec::new()
    } else {
        c.d[t - 1].columns().iter().filter(|v| !v.is_empty()).cloned().collect()
    }
}

/// Ranks of the map induced on cohomology in degrees `0..=D`.
pub fn induced_map(map: &ComplexMap, max_degree: usize) -> Result<InducedMap, EngineError> {
    let tc = total_complex(map.target, max_degree)?;
    let sc = total_complex(map.source, max_degree)?;
    let mut ranks = Vec::new();
    for t in 0..=max_degree {
        let m = map.matrix(&tc.bases[t], &sc.bases[t])?;
        let b = boundaries(&sc, t);
        let mut imgs: Vec<SparseVec> = b.clone();
        for z in cycles(&tc, t) {
            let mut v = SparseVec::new();
            for (j, c) in &z {
                for (i, x) in &m[*j] {
                    quaddr_exact::sparse::add_into(&mut v, *i, x * c);
                }
            }
            imgs.push(v);
        }
        ranks.push(rank_of(&imgs) - rank_of(&b));
    }
    Ok(InducedMap { source_dims: sc.cohomology()?, target_dims: tc.cohomology()?, ranks })
}

/// `(g∘f)^* = f^*∘g^*` on the basis elements of the last complex.
pub fn composition_report(f: &ComplexMap, g: &ComplexMap, max_degree: usize) -> Result<SuiteReport, EngineError> {
    let composite = ComplexMap::new(f.source, g.target, g.morphism.after(&f.morphism)?)?;
    let mut report = SuiteReport::default();
    let identity = "(g∘f)^* = f^*∘g^*";
    for t in 0..=max_degree {
        for key in &total_complex(g.target, max_degree)?.bases[t].keys {
            let x = key.element(g.target);
            let lhs = composite.apply(&x)?;
            let rhs = f.apply(&g.apply(&x)?)?;
            report.push(identity, residual_witness(f.source, identity, &x, &lhs, &rhs));
        }
    }
    Ok(report)
}

/// Scalar by which a map acts on an element it sends to a multiple of itself.
pub fn scalar_on_class(map: &ComplexMap, x: &KElement) -> Result<Option<Rational>, EngineError> {
    let y = map.apply(x)?;
    if y.degree() != x.degree() {
        return Ok(None);
    }
    let Some((slot, c)) = x.terms().iter().next() else { return Ok(None) };
    let Some((e, v)) = c.terms().next() else { return Ok(None) };
    let s = y.terms().get(slot).map_or_else(rational::zero, |d| d.coeff(e)) / v;
    Ok(y.sub(&x.scale(&s)).is_zero().then_some(s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::GroupModel;
    use crate::model::build_transformation_model;
    use crate::space::SpaceModel;

    fn bgm(window: i32) -> QuadComplex {
        let g = GroupModel::torus(&["g"]);
        let pt = SpaceModel::point();
        let m = build_transformation_model(g.clone(), pt.clone(), ActionModel::trivial(&g, &pt))
            .unwrap()
            .with_window(window, 2);
        QuadComplex::new(Arc::new(m)).unwrap()
    }

    fn line() -> QuadComplex {
        let g = GroupModel::torus(&["g"]);
        let b = SpaceModel::affine(&["x"]);
        let m = build_transformation_model(g.clone(), b.clone(), ActionModel::monomial(&g, &b, &[vec![1]]).unwrap())
            .unwrap();
        QuadComplex::new(Arc::new(m)).unwrap()
    }

    #[test]
    fn identity_is_identity() {
        let c = line();
        let f = ComplexMap::new(&c, &c, Morphism::identity(c.model())).unwrap();
        let x = c.monomial(1, 0, "x*g1", &[0], &[]);
        assert_eq!(f.apply(&x).unwrap(), x);
    }

    #[test]
    fn origin_restriction() {
        let (s, t) = (bgm(1), line());
        let m = Morphism::parse(s.model(), t.model(), GroupHom::Matrix(vec![vec![1]]), &["0"]).unwrap();
        let f = ComplexMap::new(&s, &t, m).unwrap();
        assert!(commutation_report(&f, 3, 10, 1).unwrap().passed());
        let h = induced_map(&f, 3).unwrap();
        assert!(h.is_isomorphism(), "{h:?}");
    }

    #[test]
    fn squaring_doubles_upsilon() {
        let (s, t) = (bgm(2), bgm(1));
        let m = Morphism { group: GroupHom::Matrix(vec![vec![2]]), base: RingHom::identity(&t.model().base.ring()) };
        let f = ComplexMap::new(&s, &t, m).unwrap();
        let u = t.monomial(0, 0, "1", &[], &[0]);
        assert_eq!(scalar_on_class(&f, &u).unwrap(), Some(rational::int(2)));
        let g1 = t.monomial(1, 0, "g1", &[], &[]);
        assert_eq!(f.apply(&g1).unwrap(), s.monomial(1, 0, "g1^2", &[], &[]));
    }

    #[test]
    fn non_equivariant_maps_are_refused() {
        let (s, t) = (bgm(1), line());
        let m = Morphism::parse(s.model(), t.model(), GroupHom::Matrix(vec![vec![1]]), &["1"]).unwrap();
        assert!(matches!(ComplexMap::new(&s, &t, m), Err(EngineError::Violation(_))));
    }

    #[test]
    fn composition_is_contravariant() {
        let (a, b, c) = (bgm(3), bgm(3), bgm(1));
        let id = RingHom::identity(&a.model().base.ring());
        let f = ComplexMap::new(&a, &b, Morphism { group: GroupHom::Matrix(vec![vec![1]]), base: id.clone() }).unwrap();
        let g = ComplexMap::new(&b, &c, Morphism { group: GroupHom::Matrix(vec![vec![3]]), base: id }).unwrap();
        assert!(composition_report(&f, &g, 2).unwrap().passed());
    }
}
