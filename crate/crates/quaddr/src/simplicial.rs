//! Simplicial levels `X_n` (chains of n composable arrows) and pullbacks
//! along simplicial operators, including their action on coframes.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use quaddr_exact::{LaurentPoly, Ring, RingHom, Var};

use crate::action::ActionModel;
use crate::group::GroupKind;
use crate::model::FlatGroupoidModel;
use crate::space::CoordKind;

/// How a coordinate's coframe element is formed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Coframe {
    /// `dx`, dual to `∂_x`.
    Exact,
    /// `dx/x`, dual to `x∂_x`.
    Log,
}

impl Coframe {
    pub fn derive(self, f: &LaurentPoly, var: usize) -> LaurentPoly {
        match self {
            Coframe::Exact => f.partial(var),
            Coframe::Log => f.euler(var),
        }
    }
}

/// The level `X_n`: `n` blocks of group coordinates (arrow `j` acts as
/// `x_j = g_j·x_{j−1}`) followed by the coordinates of the first object.
#[derive(Clone, Debug)]
pub struct Level {
    pub n: usize,
    ring: Arc<Ring>,
    nu: usize,
    coframe: Vec<Coframe>,
    labels: Vec<String>,
    components: Vec<Vec<usize>>,
}

impl Level {
    pub fn new(model: &FlatGroupoidModel, n: usize) -> Self {
        let g = &model.group;
        let nu = g.rank();
        let mut vars = Vec::new();
        let mut coframe = Vec::new();
        let mut labels = Vec::new();
        for j in 1..=n {
            for c in g.coord_names() {
                let name = format!("{c}{j}");
                vars.push(g.var(name.clone()));
                match g.kind {
                    GroupKind::Torus => {
                        coframe.push(Coframe::Log);
                        labels.push(format!("d{name}/{name}"));
                    }
                    _ => {
                        coframe.push(Coframe::Exact);
                        labels.push(format!("d{name}"));
                    }
                }
            }
        }
        for i in 0..model.base_dim() {
            let (name, kind) = &model.base.coords()[i];
            vars.push(match kind {
                CoordKind::Affine => Var::poly(name.clone()),
                CoordKind::Torus => Var::laurent(name.clone()),
            });
            coframe.push(match kind {
                CoordKind::Affine => Coframe::Exact,
                CoordKind::Torus => Coframe::Log,
            });
            labels.push(model.base.coframe_label(i));
        }
        let order = g.components();
        let mut components = vec![Vec::new()];
        if g.kind == GroupKind::Finite {
            for _ in 0..n {
                components = components
                    .into_iter()
                    .flat_map(|t| {
                        (0..order).map(move |x| {
                            let mut t = t.clone();
                            t.push(x);
                            t
                        })
                    })
                    .collect();
            }
        }
        Level { n, ring: Ring::new(vars), nu, coframe, labels, components }
    }

    pub fn ring(&self) -> &Arc<Ring> {
        &self.ring
    }

    /// Number of coordinates, equal to the number of coframe elements.
    pub fn dim(&self) -> usize {
        self.ring.len()
    }

    pub fn group_dim(&self) -> usize {
        self.n * self.nu
    }

    /// Index of the coordinate of block `j` (1-based), direction `a`.
    pub fn group_var(&self, j: usize, a: usize) -> usize {
        (j - 1) * self.nu + a
    }

    /// Index of base coordinate `i` of the first object.
    pub fn base_var(&self, i: usize) -> usize {
        self.n * self.nu + i
    }

    pub fn coframe(&self, c: usize) -> Coframe {
        self.coframe[c]
    }

    pub fn coframe_label(&self, c: usize) -> &str {
        &self.labels[c]
    }

    /// Group element tuples labelling the connected components.
    pub fn components(&self) -> &[Vec<usize>] {
        &self.components
    }

    pub fn component_index(&self, tuple: &[usize]) -> usize {
        self.components.binary_search_by(|t| t.as_slice().cmp(tuple)).expect("component tuple")
    }
}

/// Pullback of one component along a map into another level: a ring
/// substitution and the induced map on coframes.
#[derive(Clone, Debug)]
pub struct PullPart {
    /// Component of the codomain level this component lands in.
    pub component: usize,
    pub hom: RingHom,
    /// Row `c`: the pullback of codomain coframe element `c` as a
    /// combination of domain coframe elements.
    pub coframe: Vec<Vec<(usize, LaurentPoly)>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MapKind {
    Face(usize),
    Degeneracy(usize),
    Segment(usize, usize),
    Vertex(usize),
    CupFirst,
    CupSecond,
    Operator,
    Morphism,
}

/// `f^*` for a map `f: X_domain → X_codomain`, one part per domain component.
#[derive(Clone, Debug)]
pub struct Pullback {
    pub kind: MapKind,
    pub domain: usize,
    pub codomain: usize,
    pub parts: Vec<PullPart>,
    /// `υ_a ↦ Σ_b upsilon[a][b] υ_b`; `None` is the identity.
    pub upsilon: Option<Vec<Vec<quaddr_exact::Rational>>>,
}

/// Induced coframe map of a substitution between rings with the given coframes.
pub fn coframe_rows(hom: &RingHom, domain: &[Coframe], codomain: &[Coframe]) -> Vec<Vec<(usize, LaurentPoly)>> {
    (0..hom.source().len())
        .map(|c| {
            let h = hom.image(c);
            let row: Vec<(usize, LaurentPoly)> = (0..hom.target().len())
                .filter_map(|d| {
                    let x = domain[d].derive(h, d);
                    if x.is_zero() {
                        return None;
                    }
                    let x = match codomain[c] {
                        Coframe::Exact => x,
                        Coframe::Log => x.div_unit(h).expect("logarithmic coordinates map to units"),
                    };
                    Some((d, x))
                })
                .collect();
            row
        })
        .collect()
}

impl Pullback {
    pub fn identity_upsilon(&self) -> bool {
        self.upsilon.is_none()
    }

    /// `(g∘f)^* = f^*∘g^*` where `self = f^*` and `second = g^*`.
    pub fn compose(&self, second: &Pullback) -> Pullback {
        assert_eq!(self.codomain, second.domain, "pullbacks do not compose");
        let parts = self
            .parts
            .iter()
            .map(|p1| {
                let p2 = &second.parts[p1.component];
                let hom = p1.hom.after(&p2.hom).expect("composable substitutions");
                let coframe = p2
                    .coframe
                    .iter()
                    .map(|row| {
                        let mut acc: std::collections::BTreeMap<usize, LaurentPoly> = Default::default();
                        for (mid, coeff) in row {
                            let c = p1.hom.map(coeff);
                            for (d, x) in &p1.coframe[*mid] {
                                let t = &c * x;
                                let slot = acc.entry(*d).or_insert_with(|| LaurentPoly::zero(hom.target()));
                                *slot = &*slot + &t;
                            }
                        }
                        acc.into_iter().filter(|(_, v)| !v.is_zero()).collect()
                    })
                    .collect();
                PullPart { component: p2.component, hom, coframe }
            })
            .collect();
        let upsilon = match (&second.upsilon, &self.upsilon) {
            (None, u) | (u, None) => u.clone(),
            (Some(a), Some(b)) => Some(
                a.iter()
                    .map(|row| {
                        (0..b.first().map_or(0, |r| r.len()))
                            .map(|c| row.iter().enumerate().map(|(m, x)| x * &b[m][c]).sum())
                            .collect()
                    })
                    .collect(),
            ),
        };
        Pullback { kind: MapKind::Operator, domain: self.domain, codomain: second.codomain, parts, upsilon }
    }
}

type PullbackCache = HashMap<(usize, Vec<usize>), Arc<Pullback>>;

/// Levels and operator pullbacks of one model, built on demand.
#[derive(Debug)]
pub struct Tower {
    model: Arc<FlatGroupoidModel>,
    levels: Mutex<Vec<Arc<Level>>>,
    maps: Mutex<PullbackCache>,
}

impl Tower {
    pub fn new(model: Arc<FlatGroupoidModel>) -> Self {
        Tower { model, levels: Mutex::new(Vec::new()), maps: Mutex::new(HashMap::new()) }
    }

    pub fn model(&self) -> &Arc<FlatGroupoidModel> {
        &self.model
    }

    pub fn level(&self, n: usize) -> Arc<Level> {
        let mut levels = self.levels.lock().expect("level cache");
        while levels.len() <= n {
            let k = levels.len();
            levels.push(Arc::new(Level::new(&self.model, k)));
        }
        levels[n].clone()
    }

    /// Pullback along the map `X_a → X_b` induced by the monotone map
    /// `theta: [b] → [a]`: object `j` of the image chain is object
    /// `theta[j]` of the source chain.
    pub fn operator(&self, a: usize, theta: &[usize]) -> Arc<Pullback> {
        let key = (a, theta.to_vec());
        if let Some(p) = self.maps.lock().expect("map cache").get(&key) {
            return p.clone();
        }
        let p = Arc::new(self.build_operator(a, theta));
        self.maps.lock().expect("map cache").insert(key, p.clone());
        p
    }

    fn build_operator(&self, a: usize, theta: &[usize]) -> Pullback {
        assert!(!theta.is_empty() && theta.windows(2).all(|w| w[0] <= w[1]) && theta.iter().all(|t| *t <= a));
        let b = theta.len() - 1;
        let src = self.level(a);
        let dst = self.level(b);
        let model = &self.model;
        let group = &model.group;
        let nu = group.rank();
        let e = model.base_dim();
        let ring = src.ring().clone();
        let parts = src
            .components()
            .iter()
            .map(|sigma| {
                let mut images = Vec::with_capacity(dst.dim());
                let mut target_tuple = Vec::new();
                for j in 1..=b {
                    for al in 0..nu {
                        let factors: Vec<LaurentPoly> = (theta[j - 1] + 1..=theta[j])
                            .map(|i| LaurentPoly::var(&ring, src.group_var(i, al)))
                            .collect();
                        images.push(group.compose_coord(&ring, &factors));
                    }
                    if let Some(f) = group.finite_group() {
                        let c = (theta[j - 1] + 1..=theta[j]).fold(f.identity, |acc, i| f.mul(sigma[i - 1], acc));
                        target_tuple.push(c);
                    }
                }
                // first object of the image chain: x_{theta[0]}
                let base_vars: Vec<LaurentPoly> = (0..e).map(|i| LaurentPoly::var(&ring, src.base_var(i))).collect();
                match &model.action {
                    ActionModel::Connected(h) => {
                        let composite: Vec<LaurentPoly> = (0..nu)
                            .map(|al| {
                                let factors: Vec<LaurentPoly> =
                                    (1..=theta[0]).map(|i| LaurentPoly::var(&ring, src.group_var(i, al))).collect();
                                group.compose_coord(&ring, &factors)
                            })
                            .collect();
                        let sub = RingHom::new(h.target(), &ring, composite.into_iter().chain(base_vars).collect())
                            .expect("action substitution");
                        images.extend(h.images().iter().map(|p| sub.map(p)));
                    }
                    ActionModel::Finite(homs) => {
                        let f = group.finite_group().expect("finite group");
                        let c = (1..=theta[0]).fold(f.identity, |acc, i| f.mul(sigma[i - 1], acc));
                        let emb = RingHom::new(homs[c].target(), &ring, base_vars).expect("base embedding");
                        images.extend(homs[c].images().iter().map(|p| emb.map(p)));
                    }
                }
                let hom = RingHom::new(dst.ring(), &ring, images).expect("operator substitution");
                let coframe = coframe_rows(&hom, &src.coframe, &dst.coframe);
                PullPart { component: dst.component_index(&target_tuple), hom, coframe }
            })
            .collect();
        Pullback { kind: MapKind::Operator, domain: a, codomain: b, parts, upsilon: None }
    }

    fn tagged(&self, a: usize, theta: Vec<usize>, kind: MapKind) -> Arc<Pullback> {
        let p = self.operator(a, &theta);
        if p.kind == kind {
            return p;
        }
        let mut q = (*p).clone();
        q.kind = kind;
        Arc::new(q)
    }

    /// `π̂_q^*`: functions on `X_n` to `X_{n+1}`, leaving out object `q`.
    pub fn face(&self, n: usize, q: usize) -> Arc<Pullback> {
        assert!(q <= n + 1, "face index {q} out of range at level {n}");
        let theta = (0..=n + 1).filter(|j| *j != q).collect();
        self.tagged(n + 1, theta, MapKind::Face(q))
    }

    /// `ι_q^*`: functions on `X_n` to `X_{n−1}`, repeating object `q`.
    pub fn degeneracy(&self, n: usize, q: usize) -> Arc<Pullback> {
        assert!(n >= 1 && q < n, "degeneracy index {q} out of range at level {n}");
        let theta = (0..=n).map(|j| if j <= q { j } else { j - 1 }).collect();
        self.tagged(n - 1, theta, MapKind::Degeneracy(q))
    }

    /// `π_{qr}^*`: functions on `X_1` to `X_n`.
    pub fn segment(&self, n: usize, q: usize, r: usize) -> Arc<Pullback> {
        assert!(q <= r && r <= n);
        self.tagged(n, vec![q, r], MapKind::Segment(q, r))
    }

    /// `π_q^*`: functions on `X_0` to `X_n`.
    pub fn vertex(&self, n: usize, q: usize) -> Arc<Pullback> {
        assert!(q <= n);
        self.tagged(n, vec![q], MapKind::Vertex(q))
    }

    /// `(s^*, t^*)` into `X_{n+m}`: the first `n` and the last `m` arrows.
    pub fn cup_support(&self, n: usize, m: usize) -> (Arc<Pullback>, Arc<Pullback>) {
        (
            self.tagged(n + m, (0..=n).collect(), MapKind::CupFirst),
            self.tagged(n + m, (n..=n + m).collect(), MapKind::CupSecond),
        )
    }

    /// Transition matrix `ψ_{qr}` over `O_{X_n}`: the horizontal part of the
    /// coframe of object `r` in terms of the coframe of object `q`, built as
    /// the ordered product of pulled-back one-step transitions.
    pub fn segment_transport(&self, n: usize, q: usize, r: usize) -> Vec<Vec<LaurentPoly>> {
        let lvl = self.level(n);
        let e = self.model.base_dim();
        let mut acc: Vec<Vec<LaurentPoly>> = identity_matrix(lvl.ring(), e);
        for j in q..r {
            let step = self.one_step(n, j);
            acc = matmul(&step, &acc, lvl.ring());
        }
        acc
    }

    /// `ψ_{01}` pulled back along `π_{j,j+1}`, as e×e over `O_{X_n}`.
    fn one_step(&self, n: usize, j: usize) -> Vec<Vec<LaurentPoly>> {
        let lvl = self.level(n);
        let psi = self.psi01();
        let seg = self.segment(n, j, j + 1);
        assert_eq!(seg.parts.len(), 1, "frame transport is only tabulated for connected groups");
        psi.iter()
            .map(|row| row.iter().map(|x| seg.parts[0].hom.map(x)).collect())
            .collect::<Vec<Vec<_>>>()
            .into_iter()
            .map(|row| row.into_iter().map(|x| x.with_ring(lvl.ring()).expect("level ring")).collect())
            .collect()
    }

    /// `ψ_{01}` over `O_{X_1}`: `π_1^*θ_i ≡ Σ_j ψ[i][j] π_0^*θ_j` modulo the
    /// group coframe.
    pub fn psi01(&self) -> Vec<Vec<LaurentPoly>> {
        let lvl = self.level(1);
        let v1 = self.vertex(1, 1);
        let e = self.model.base_dim();
        let part = &v1.parts[0];
        (0..e)
            .map(|i| {
                let mut row = vec![LaurentPoly::zero(lvl.ring()); e];
                for (d, x) in &part.coframe[i] {
                    if *d >= lvl.group_dim() {
                        row[*d - lvl.group_dim()] = x.clone();
                    }
                }
                row
            })
            .collect()
    }
}

pub fn identity_matrix(ring: &Arc<Ring>, n: usize) -> Vec<Vec<LaurentPoly>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { LaurentPoly::one(ring) } else { LaurentPoly::zero(ring) }).collect())
        .collect()
}

pub fn matmul(a: &[Vec<LaurentPoly>], b: &[Vec<LaurentPoly>], ring: &Arc<Ring>) -> Vec<Vec<LaurentPoly>> {
    let inner = b.len();
    let cols = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    let mut s = LaurentPoly::zero(ring);
                    for k in 0..inner {
                        if !row[k].is_zero() && !b[k][j].is_zero() {
                            s = &s + &(&row[k] * &b[k][j]);
                        }
                    }
                    s
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::ActionModel;
    use crate::group::{FiniteGroup, GroupModel};
    use crate::model::build_transformation_model;
    use crate::space::SpaceModel;

    fn bgm() -> Tower {
        let g = GroupModel::torus(&["g"]);
        let pt = SpaceModel::point();
        let a = ActionModel::trivial(&g, &pt);
        Tower::new(Arc::new(build_transformation_model(g, pt, a).unwrap()))
    }

    fn weighted(base: SpaceModel) -> Tower {
        let g = GroupModel::torus(&["g"]);
        let a = ActionModel::monomial(&g, &base, &[vec![1]]).unwrap();
        Tower::new(Arc::new(build_transformation_model(g, base, a).unwrap()))
    }

    fn pull(t: &Tower, p: &Pullback, s: &str) -> String {
        let f = LaurentPoly::parse(t.level(p.codomain).ring(), s).unwrap();
        p.parts[0].hom.map(&f).to_string()
    }

    #[test]
    fn faces_of_the_classifying_tower() {
        let t = bgm();
        assert_eq!(pull(&t, &t.face(1, 1), "g1^3"), "g1^3*g2^3");
        assert_eq!(pull(&t, &t.face(1, 2), "g1^3"), "g1^3");
        assert_eq!(pull(&t, &t.face(1, 0), "g1^3"), "g2^3");
        assert_eq!(pull(&t, &t.degeneracy(2, 0), "g1^2*g2^5"), "g1^5");
        assert_eq!(pull(&t, &t.degeneracy(1, 0), "g1^4"), "1");
        let (s, tt) = t.cup_support(1, 1);
        assert_eq!(pull(&t, &s, "g1^2"), "g1^2");
        assert_eq!(pull(&t, &tt, "g1^2"), "g2^2");
    }

    #[test]
    fn action_face_substitutes_the_action() {
        let t = weighted(SpaceModel::affine(&["x"]));
        assert_eq!(pull(&t, &t.face(0, 0), "x^2"), "g1^2*x^2");
        assert_eq!(pull(&t, &t.face(0, 1), "x^2"), "x^2");
        // d(g x) = g dx + x dg = g·(dx + x dg/g)
        let rows = &t.face(0, 0).parts[0].coframe[0];
        assert_eq!(rows.len(), 2);
    }

    #[test]
    fn transport_on_the_punctured_line() {
        let t = weighted(SpaceModel::torus(&["t"]));
        assert_eq!(t.psi01()[0][0].to_string(), "1");
        let t = weighted(SpaceModel::affine(&["x"]));
        assert_eq!(t.psi01()[0][0].to_string(), "g1");
        let lvl = t.level(3);
        let direct = t.segment_transport(3, 0, 3);
        let split = matmul(&t.segment_transport(3, 1, 3), &t.segment_transport(3, 0, 1), lvl.ring());
        assert_eq!(direct, split);
        assert_eq!(direct[0][0].to_string(), "g1*g2*g3");
    }

    #[test]
    fn finite_components_compose() {
        let g = GroupModel::finite(FiniteGroup::cyclic(2));
        let base = SpaceModel::torus(&["t"]);
        let a = ActionModel::parse_finite(&base, &[vec!["t"], vec!["t^-1"]]).unwrap();
        let t = Tower::new(Arc::new(build_transformation_model(g, base, a).unwrap()));
        assert_eq!(t.level(2).components().len(), 4);
        let f = t.face(1, 1);
        // (r, r) composes to e
        let idx = t.level(2).component_index(&[1, 1]);
        assert_eq!(f.parts[idx].component, t.level(1).component_index(&[0]));
        let f0 = t.face(0, 0);
        let idx = t.level(1).component_index(&[1]);
        let tt = LaurentPoly::parse(t.level(0).ring(), "t^2").unwrap();
        assert_eq!(f0.parts[idx].hom.map(&tt).to_string(), "t^-2");
        assert_eq!(f0.parts[idx].coframe[0][0].1.to_string(), "-1");
    }

    #[test]
    fn simplicial_identities_on_generators() {
        let t = weighted(SpaceModel::affine(&["x"]));
        for n in 0..=3usize {
            // ι_q^* π̂_q^* = id = ι_q^* π̂_{q+1}^* on X_n
            for q in 0..=n {
                for face in [q, q + 1] {
                    let comp = t.degeneracy(n + 1, q).compose(&t.face(n, face));
                    let lvl = t.level(n);
                    for v in 0..lvl.dim() {
                        assert_eq!(comp.parts[0].hom.image(v), &LaurentPoly::var(lvl.ring(), v));
                    }
                }
            }
            // π̂_j^* π̂_i^* = π̂_i^* π̂_{j−1}^* for i < j
            for i in 0..=n + 1 {
                for j in i + 1..=n + 2 {
                    let lhs = t.face(n + 1, j).compose(&t.face(n, i));
                    let rhs = t.face(n + 1, i).compose(&t.face(n, j - 1));
                    assert_eq!(lhs.parts[0].hom, rhs.parts[0].hom, "n={n} i={i} j={j}");
                }
            }
        }
    }
}
