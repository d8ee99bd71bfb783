//! Elements of `K^{p,k,n}` and the operators φ, ∂, d, ι, 𝔏_q, cup and
//! normalization.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use quaddr_exact::rational::{self, Rational};
use quaddr_exact::LaurentPoly;

use crate::error::ModelError;
use crate::model::FlatGroupoidModel;
use crate::simplicial::{Level, Pullback, Tower};
use crate::structure::{base_to_level, StructureMaps};

/// A basis position: component of the level, increasing wedge indices and
/// weakly increasing symmetric indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Slot {
    pub component: usize,
    pub wedge: Vec<u16>,
    pub sym: Vec<u16>,
}

type Terms = BTreeMap<Slot, LaurentPoly>;

fn add_term(terms: &mut Terms, slot: Slot, c: LaurentPoly) {
    if c.is_zero() {
        return;
    }
    match terms.get_mut(&slot) {
        Some(v) => {
            *v = &*v + &c;
            if v.is_zero() {
                terms.remove(&slot);
            }
        }
        None => {
            terms.insert(slot, c);
        }
    }
}

/// `Σ f·ε_I·υ^K` in `K^{p,k,n}`; wedge indices run over the base coframe.
#[derive(Clone, Debug, PartialEq)]
pub struct KElement {
    pub p: usize,
    pub k: usize,
    pub n: usize,
    terms: Terms,
}

/// Like [`KElement`] with wedge indices over the full coframe of `X_n`.
/// `p` is form degree plus `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct AmbientElement {
    pub p: usize,
    pub k: usize,
    pub n: usize,
    terms: Terms,
}

macro_rules! graded_element {
    ($t:ident) => {
        impl $t {
            pub fn zero(p: usize, k: usize, n: usize) -> Self {
                $t { p, k, n, terms: BTreeMap::new() }
            }

            pub fn from_terms(
                p: usize,
                k: usize,
                n: usize,
                terms: impl IntoIterator<Item = (Slot, LaurentPoly)>,
            ) -> Self {
                let mut out = $t::zero(p, k, n);
                for (s, c) in terms {
                    debug_assert!(s.wedge.len() + k == p && s.sym.len() == k, "inhomogeneous term");
                    debug_assert!(s.wedge.windows(2).all(|w| w[0] < w[1]) && s.sym.windows(2).all(|w| w[0] <= w[1]));
                    add_term(&mut out.terms, s, c);
                }
                out
            }

            pub fn terms(&self) -> &BTreeMap<Slot, LaurentPoly> {
                &self.terms
            }

            pub fn is_zero(&self) -> bool {
                self.terms.is_empty()
            }

            pub fn degree(&self) -> (usize, usize, usize) {
                (self.p, self.k, self.n)
            }

            pub fn total_degree(&self) -> usize {
                self.p + self.k + self.n
            }

            pub fn add(&self, other: &$t) -> $t {
                assert_eq!(self.degree(), other.degree(), "adding elements of different degrees");
                let mut out = self.clone();
                for (s, c) in &other.terms {
                    add_term(&mut out.terms, s.clone(), c.clone());
                }
                out
            }

            pub fn sub(&self, other: &$t) -> $t {
                self.add(&other.scale(&rational::int(-1)))
            }

            pub fn scale(&self, c: &Rational) -> $t {
                let mut out = $t::zero(self.p, self.k, self.n);
                for (s, v) in &self.terms {
                    add_term(&mut out.terms, s.clone(), v.scale(c));
                }
                out
            }
        }
    };
}

graded_element!(KElement);
graded_element!(AmbientElement);

/// Inserts `d` after the sorted wedge `w`; the sign counts the transpositions.
fn append_index(w: &[u16], d: u16) -> Option<(Vec<u16>, bool)> {
    let pos = match w.binary_search(&d) {
        Ok(_) => return None,
        Err(p) => p,
    };
    let mut out = Vec::with_capacity(w.len() + 1);
    out.extend_from_slice(&w[..pos]);
    out.push(d);
    out.extend_from_slice(&w[pos..]);
    Some((out, (w.len() - pos) % 2 == 1))
}

/// Puts `d` in front of the sorted wedge `w`.
fn prepend_index(w: &[u16], d: u16) -> Option<(Vec<u16>, bool)> {
    let pos = match w.binary_search(&d) {
        Ok(_) => return None,
        Err(p) => p,
    };
    let mut out = Vec::with_capacity(w.len() + 1);
    out.extend_from_slice(&w[..pos]);
    out.push(d);
    out.extend_from_slice(&w[pos..]);
    Some((out, pos % 2 == 1))
}

/// Sorted concatenation of two wedges with the sign of the shuffle.
fn merge_wedges(a: &[u16], b: &[u16]) -> Option<(Vec<u16>, bool)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j, mut inversions) = (0, 0, 0usize);
    while i < a.len() || j < b.len() {
        if j == b.len() || (i < a.len() && a[i] < b[j]) {
            out.push(a[i]);
            i += 1;
        } else if i < a.len() && a[i] == b[j] {
            return None;
        } else {
            inversions += a.len() - i;
            out.push(b[j]);
            j += 1;
        }
    }
    Some((out, inversions % 2 == 1))
}

fn merge_sym(a: &[u16], b: &[u16]) -> Vec<u16> {
    let mut out: Vec<u16> = a.iter().chain(b).copied().collect();
    out.sort_unstable();
    out
}

fn insert_sym(a: &[u16], x: u16) -> Vec<u16> {
    merge_sym(a, &[x])
}

fn neg_if(c: LaurentPoly, neg: bool) -> LaurentPoly {
    if neg {
        -&c
    } else {
        c
    }
}

/// Per-level data shared by all operators.
#[derive(Debug)]
pub struct LevelData {
    pub level: Arc<Level>,
    pub maps: StructureMaps,
    /// Anchor embedded in the level ring, `[i][a]`.
    pub anchor: Vec<Vec<LaurentPoly>>,
}

/// The complex `K` of one model with cached levels and structure maps.
#[derive(Debug)]
pub struct QuadComplex {
    tower: Tower,
    data: Mutex<HashMap<usize, Arc<LevelData>>>,
}

impl QuadComplex {
    pub fn new(model: Arc<FlatGroupoidModel>) -> Result<Self, ModelError> {
        if !model.frame_is_invariant() {
            return Err(ModelError::Unsupported("pair model whose trivialization is not the invariant frame".into()));
        }
        Ok(QuadComplex { tower: Tower::new(model), data: Mutex::new(HashMap::new()) })
    }

    pub fn model(&self) -> &Arc<FlatGroupoidModel> {
        self.tower.model()
    }

    pub fn tower(&self) -> &Tower {
        &self.tower
    }

    pub fn level_data(&self, n: usize) -> Arc<LevelData> {
        if let Some(d) = self.data.lock().expect("level data").get(&n) {
            return d.clone();
        }
        let level = self.tower.level(n);
        let maps = StructureMaps::build(&self.tower, n).expect("structure maps of a validated model");
        let emb = base_to_level(self.model(), &level);
        let anchor = self.model().anchor().iter().map(|row| row.iter().map(|x| emb.map(x)).collect()).collect();
        let d = Arc::new(LevelData { level, maps, anchor });
        self.data.lock().expect("level data").insert(n, d.clone());
        d
    }

    fn level_sign(&self, on: bool, n: usize) -> Rational {
        if on {
            rational::sign(n as i64)
        } else {
            rational::one()
        }
    }

    // ---- elementary constructors -------------------------------------

    /// `f·ε_I·υ^K` from a polynomial written in the level's variables.
    pub fn monomial(&self, n: usize, component: usize, coeff: &str, wedge: &[u16], sym: &[u16]) -> KElement {
        let lvl = self.tower.level(n);
        let c = LaurentPoly::parse(lvl.ring(), coeff).expect("coefficient in level variables");
        let mut sym = sym.to_vec();
        sym.sort_unstable();
        KElement::from_terms(
            wedge.len() + sym.len(),
            sym.len(),
            n,
            [(Slot { component, wedge: wedge.to_vec(), sym }, c)],
        )
    }

    pub fn one(&self, n: usize) -> KElement {
        let lvl = self.tower.level(n);
        KElement::from_terms(
            0,
            0,
            n,
            (0..lvl.components().len())
                .map(|c| (Slot { component: c, wedge: vec![], sym: vec![] }, LaurentPoly::one(lvl.ring()))),
        )
    }

    // ---- pullbacks -----------------------------------------------------

    fn pull_terms(&self, pb: &Pullback, terms: &Terms, base_only_in: bool, keep_group_out: bool) -> Terms {
        let din = self.tower.level(pb.codomain);
        let dout = self.tower.level(pb.domain);
        pull_between(&din, &dout, pb, terms, base_only_in, keep_group_out)
    }

    /// `δ∘f^*∘η`: pullback of a K-element along an operator or morphism.
    pub fn pullback(&self, pb: &Pullback, x: &KElement) -> KElement {
        assert_eq!(pb.codomain, x.n, "pullback applied at the wrong level");
        let lifted = self.lift(x, 0);
        let terms = self.pull_terms(pb, &lifted.terms, false, false);
        KElement { p: x.p, k: x.k, n: pb.domain, terms }
    }

    /// Pullback of ambient forms.
    pub fn pullback_ambient(&self, pb: &Pullback, x: &AmbientElement) -> AmbientElement {
        assert_eq!(pb.codomain, x.n);
        let terms = self.pull_terms(pb, &x.terms, false, true);
        AmbientElement { p: x.p, k: x.k, n: pb.domain, terms }
    }

    /// `δ∘f^*∘η` for a map from a level of `source` into a level of this
    /// complex's tower.
    pub fn pullback_into(&self, source: &QuadComplex, pb: &Pullback, x: &KElement) -> KElement {
        assert_eq!(pb.codomain, x.n, "pullback applied at the wrong level");
        let lifted = self.lift(x, 0);
        let din = self.tower.level(pb.codomain);
        let dout = source.tower.level(pb.domain);
        let terms = pull_between(&din, &dout, pb, &lifted.terms, false, false);
        KElement { p: x.p, k: x.k, n: pb.domain, terms }
    }

    pub fn face_pullback(&self, q: usize, x: &KElement) -> KElement {
        self.pullback(&self.tower.face(x.n, q), x)
    }

    pub fn degeneracy_pullback(&self, q: usize, x: &KElement) -> KElement {
        self.pullback(&self.tower.degeneracy(x.n, q), x)
    }

    // ---- lifts and projections ----------------------------------------

    /// `η_q`: K-element to an ambient form on the same level.
    pub fn lift(&self, x: &KElement, q: usize) -> AmbientElement {
        let data = self.level_data(x.n);
        let eta = &data.maps.eta[q];
        let ring = data.level.ring();
        let mut out = Terms::new();
        for (slot, coeff) in &x.terms {
            let mut acc: Vec<(Vec<u16>, LaurentPoly)> = vec![(Vec::new(), coeff.clone())];
            for &w in &slot.wedge {
                let mut next: BTreeMap<Vec<u16>, LaurentPoly> = BTreeMap::new();
                for (wd, c) in &acc {
                    for (d, e) in eta[w as usize].iter().enumerate() {
                        if e.is_zero() {
                            continue;
                        }
                        if let Some((nw, neg)) = append_index(wd, d as u16) {
                            let t = neg_if(c * e, neg);
                            let slot = next.entry(nw).or_insert_with(|| LaurentPoly::zero(ring));
                            *slot = &*slot + &t;
                        }
                    }
                }
                acc = next.into_iter().filter(|(_, c)| !c.is_zero()).collect();
            }
            for (wd, c) in acc {
                add_term(&mut out, Slot { component: slot.component, wedge: wd, sym: slot.sym.clone() }, c);
            }
        }
        AmbientElement { p: x.p, k: x.k, n: x.n, terms: out }
    }

    /// `δ`: drops every term containing a group covector.
    pub fn project(&self, x: &AmbientElement) -> KElement {
        let g = self.tower.level(x.n).group_dim() as u16;
        let mut out = Terms::new();
        for (slot, c) in &x.terms {
            if slot.wedge.iter().all(|w| *w >= g) {
                let wedge = slot.wedge.iter().map(|w| w - g).collect();
                add_term(&mut out, Slot { component: slot.component, wedge, sym: slot.sym.clone() }, c.clone());
            }
        }
        KElement { p: x.p, k: x.k, n: x.n, terms: out }
    }

    /// Covariant exterior derivative of ambient forms; the connection is
    /// trivial in the invariant frame and the coframe is closed.
    pub fn exterior(&self, x: &AmbientElement) -> AmbientElement {
        let lvl = self.tower.level(x.n);
        let mut out = Terms::new();
        for (slot, c) in &x.terms {
            for d in 0..lvl.dim() {
                let dc = lvl.coframe(d).derive(c, d);
                if dc.is_zero() {
                    continue;
                }
                if let Some((nw, neg)) = prepend_index(&slot.wedge, d as u16) {
                    add_term(
                        &mut out,
                        Slot { component: slot.component, wedge: nw, sym: slot.sym.clone() },
                        neg_if(dc, neg),
                    );
                }
            }
        }
        AmbientElement { p: x.p + 1, k: x.k, n: x.n, terms: out }
    }

    /// `ρ_q` as a derivation turning one covector into υ's.
    pub fn rho(&self, q: usize, x: &AmbientElement) -> AmbientElement {
        let data = self.level_data(x.n);
        let rho = &data.maps.rho[q];
        let mut out = Terms::new();
        for (slot, c) in &x.terms {
            for (t, &w) in slot.wedge.iter().enumerate() {
                let mut rest = slot.wedge.clone();
                rest.remove(t);
                for (a, r) in rho[w as usize].iter().enumerate() {
                    if r.is_zero() {
                        continue;
                    }
                    let s =
                        Slot { component: slot.component, wedge: rest.clone(), sym: insert_sym(&slot.sym, a as u16) };
                    add_term(&mut out, s, neg_if(c * r, t % 2 == 1));
                }
            }
        }
        AmbientElement { p: x.p, k: x.k + 1, n: x.n, terms: out }
    }

    /// `[ρ_q, D] = ρ_q D + D ρ_q` on ambient forms.
    pub fn lie_ambient(&self, q: usize, x: &AmbientElement) -> AmbientElement {
        let a = self.rho(q, &self.exterior(x));
        let b = self.exterior(&self.rho(q, x));
        a.add(&b)
    }

    // ---- the four differentials ---------------------------------------

    pub fn phi(&self, x: &KElement) -> KElement {
        let data = self.level_data(x.n);
        let sign = self.level_sign(self.model().conventions.phi_level, x.n);
        let mut out = Terms::new();
        for (slot, c) in &x.terms {
            for (t, &w) in slot.wedge.iter().enumerate() {
                let mut rest = slot.wedge.clone();
                rest.remove(t);
                for (a, r) in data.anchor[w as usize].iter().enumerate() {
                    if r.is_zero() {
                        continue;
                    }
                    let s =
                        Slot { component: slot.component, wedge: rest.clone(), sym: insert_sym(&slot.sym, a as u16) };
                    add_term(&mut out, s, neg_if((c * r).scale(&sign), t % 2 == 1));
                }
            }
        }
        KElement { p: x.p, k: x.k + 1, n: x.n, terms: out }
    }

    pub fn cech(&self, x: &KElement) -> KElement {
        let c = rational::int(self.model().conventions.cech.into());
        let mut out = KElement::zero(x.p, x.k, x.n + 1);
        for q in 0..=x.n + 1 {
            let f = self.face_pullback(q, x).scale(&(rational::sign(q as i64) * &c));
            out = out.add(&f);
        }
        out
    }

    pub fn derham(&self, x: &KElement) -> KElement {
        self.derham_via(x, 0)
    }

    /// `d` computed through the lift `η_q`.
    pub fn derham_via(&self, x: &KElement, q: usize) -> KElement {
        let sign = self.level_sign(self.model().conventions.derham_level, x.n);
        self.project(&self.exterior(&self.lift(x, q))).scale(&sign)
    }

    /// `𝔏_q = δ[ρ_q, D]η_0`.
    pub fn symmetric_derivative(&self, x: &KElement, q: usize) -> KElement {
        self.symmetric_derivative_via(x, q, 0)
    }

    pub fn symmetric_derivative_via(&self, x: &KElement, q: usize, lift: usize) -> KElement {
        self.project(&self.lie_ambient(q, &self.lift(x, lift)))
    }

    /// `𝔏 = Σ_q 𝔏_q`.
    pub fn lie(&self, x: &KElement) -> KElement {
        let mut out = KElement::zero(x.p + 1, x.k + 1, x.n);
        for q in 0..=x.n {
            out = out.add(&self.symmetric_derivative(x, q));
        }
        out
    }

    /// `I = Σ_i (−1)^i ι_i^*` from level n to n−1.
    pub fn degeneracy_sum(&self, x: &KElement) -> KElement {
        let alt = self.model().conventions.contraction_alternating;
        let mut out = KElement::zero(x.p, x.k, x.n.saturating_sub(1));
        if x.n == 0 {
            return out;
        }
        for i in 0..x.n {
            let s = if alt { rational::sign(i as i64) } else { rational::one() };
            out = out.add(&self.degeneracy_pullback(i, x).scale(&s));
        }
        out
    }

    /// `ι = −Σ_{i<j} (−1)^i ι_i^* 𝔏_j`.
    pub fn contraction(&self, x: &KElement) -> KElement {
        let conv = self.model().conventions;
        if x.n == 0 {
            return KElement::zero(x.p + 1, x.k + 1, 0);
        }
        let mut out = KElement::zero(x.p + 1, x.k + 1, x.n - 1);
        for j in 1..=x.n {
            let l = self.symmetric_derivative(x, j);
            if l.is_zero() {
                continue;
            }
            for i in 0..j {
                let s = if conv.contraction_alternating { rational::sign(i as i64) } else { rational::one() };
                out = out.add(&self.degeneracy_pullback(i, &l).scale(&s));
            }
        }
        out.scale(&rational::int(conv.contraction.into()))
    }

    /// The four components `[φx, ∂x, dx, ιx]` of the total differential.
    pub fn total_differential(&self, x: &KElement) -> [KElement; 4] {
        [self.phi(x), self.cech(x), self.derham(x), self.contraction(x)]
    }

    // ---- products -------------------------------------------------------

    /// `x ∪ y = (−1)^{m(p−k)} s^*x ∧ t^*y` with m the level of y.
    pub fn cup(&self, x: &KElement, y: &KElement) -> KElement {
        let (s, t) = self.tower.cup_support(x.n, y.n);
        let sx = self.pullback(&s, x);
        let ty = self.pullback(&t, y);
        let neg = self.model().conventions.cup_sign && (y.n * (x.p + x.k)) % 2 == 1;
        let mut out = Terms::new();
        for (a, ca) in &sx.terms {
            for (b, cb) in &ty.terms {
                if a.component != b.component {
                    continue;
                }
                if let Some((w, sgn)) = merge_wedges(&a.wedge, &b.wedge) {
                    let s = Slot { component: a.component, wedge: w, sym: merge_sym(&a.sym, &b.sym) };
                    add_term(&mut out, s, neg_if(ca * cb, sgn ^ neg));
                }
            }
        }
        KElement { p: x.p + y.p, k: x.k + y.k, n: x.n + y.n, terms: out }
    }

    /// Projection onto the normalized subcomplex (killed by every `ι_j^*`).
    pub fn normalize(&self, x: &KElement) -> KElement {
        let mut out = x.clone();
        for j in (0..x.n).rev() {
            let degenerate = self.pullback(&self.tower.face(x.n - 1, j), &self.degeneracy_pullback(j, &out));
            out = out.sub(&degenerate);
        }
        out
    }

    // ---- rendering ------------------------------------------------------

    pub fn render(&self, x: &KElement) -> String {
        let lvl = self.tower.level(x.n);
        let g = lvl.group_dim();
        let nu = self.model().rank();
        if x.is_zero() {
            return "0".into();
        }
        let parts: Vec<String> = x
            .terms
            .iter()
            .map(|(slot, c)| {
                let bare = slot.wedge.is_empty() && slot.sym.is_empty();
                let mut s = if c.num_terms() > 1 {
                    format!("({c})")
                } else if !bare && c.is_constant() && c.constant_term() == rational::one() {
                    String::new()
                } else if !bare && c.is_constant() && c.constant_term() == rational::int(-1) {
                    "-".into()
                } else {
                    c.to_string()
                };
                let mut factors: Vec<String> = Vec::new();
                for w in &slot.wedge {
                    factors.push(lvl.coframe_label(g + *w as usize).to_string());
                }
                let mut i = 0;
                while i < slot.sym.len() {
                    let a = slot.sym[i];
                    let mult = slot.sym[i..].iter().take_while(|b| **b == a).count();
                    let name = if nu == 1 { "υ".to_string() } else { format!("υ{}", a + 1) };
                    factors.push(if mult > 1 { format!("{name}^{mult}") } else { name });
                    i += mult;
                }
                if !factors.is_empty() {
                    if !s.is_empty() && s != "-" {
                        s.push('*');
                    }
                    s.push_str(&factors.join("*"));
                }
                if lvl.components().len() > 1 {
                    let f = self.model().group.finite_group().expect("finite");
                    let tuple: Vec<&str> =
                        lvl.components()[slot.component].iter().map(|e| f.elements[*e].as_str()).collect();
                    s.push_str(&format!("@[{}]", tuple.join(",")));
                }
                s
            })
            .collect();
        parts.join(" + ")
    }
}

impl fmt::Display for KElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "K^({},{},{})[", self.p, self.k, self.n)?;
        let mut first = true;
        for (s, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c})e{:?}u{:?}", s.wedge, s.sym)?;
            if s.component > 0 {
                write!(f, "@{}", s.component)?;
            }
        }
        write!(f, "]")
    }
}

fn pull_between(
    din: &Level,
    dout: &Level,
    pb: &Pullback,
    terms: &Terms,
    base_only_in: bool,
    keep_group_out: bool,
) -> Terms {
    let gin = if base_only_in { din.group_dim() } else { 0 };
    let gout = dout.group_dim();
    let mut by_component: HashMap<usize, Vec<usize>> = HashMap::new();
    for (sigma, part) in pb.parts.iter().enumerate() {
        by_component.entry(part.component).or_default().push(sigma);
    }
    let mut out = Terms::new();
    for (slot, coeff) in terms {
        let Some(targets) = by_component.get(&slot.component) else { continue };
        for &sigma in targets {
            let part = &pb.parts[sigma];
            let c0 = part.hom.map(coeff);
            let mut acc: Vec<(Vec<u16>, LaurentPoly)> = vec![(Vec::new(), c0)];
            for &w in &slot.wedge {
                let row = &part.coframe[gin + w as usize];
                let mut next: BTreeMap<Vec<u16>, LaurentPoly> = BTreeMap::new();
                for (wd, c) in &acc {
                    for (d, x) in row {
                        let idx = if keep_group_out {
                            *d as u16
                        } else if *d >= gout {
                            (*d - gout) as u16
                        } else {
                            continue;
                        };
                        if let Some((nw, neg)) = append_index(wd, idx) {
                            let t = neg_if(c * x, neg);
                            let e = next.entry(nw).or_insert_with(|| LaurentPoly::zero(dout.ring()));
                            *e = &*e + &t;
                        }
                    }
                }
                acc = next.into_iter().filter(|(_, c)| !c.is_zero()).collect();
            }
            for (wd, c) in acc {
                match &pb.upsilon {
                    None => add_term(&mut out, Slot { component: sigma, wedge: wd, sym: slot.sym.clone() }, c),
                    Some(m) => {
                        let mut syms: Vec<(Vec<u16>, Rational)> = vec![(Vec::new(), rational::one())];
                        for &a in &slot.sym {
                            let mut next = Vec::new();
                            for (s, k) in &syms {
                                for (b, mab) in m[a as usize].iter().enumerate() {
                                    if !num_traits::Zero::is_zero(mab) {
                                        next.push((insert_sym(s, b as u16), k * mab));
                                    }
                                }
                            }
                            syms = next;
                        }
                        for (s, k) in syms {
                            add_term(&mut out, Slot { component: sigma, wedge: wd.clone(), sym: s }, c.scale(&k));
                        }
                    }
                }
            }
        }
    }
    out
}
