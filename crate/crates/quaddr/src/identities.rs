//! The identity suite: operator relations on sector bases and cup-product
//! laws on random elements.

use std::collections::HashMap;

use quaddr_exact::rational;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::Serialize;

use crate::complex::{KElement, QuadComplex};
use crate::error::{EngineError, Witness};
use crate::sector::{self, k_basis, BasisKey, Sector};
use crate::structure::validate_structure;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IdentityOutcome {
    pub identity: String,
    pub checked: usize,
    pub witness: Option<Witness>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SuiteReport {
    pub outcomes: Vec<IdentityOutcome>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.witness.is_none())
    }

    pub fn witnesses(&self) -> Vec<Witness> {
        self.outcomes.iter().filter_map(|o| o.witness.clone()).collect()
    }

    pub fn outcome(&self, identity: &str) -> Option<&IdentityOutcome> {
        self.outcomes.iter().find(|o| o.identity == identity)
    }

    pub fn push(&mut self, identity: &str, witness: Option<Witness>) {
        match self.outcomes.iter_mut().find(|o| o.identity == identity) {
            Some(o) => {
                o.checked += 1;
                if o.witness.is_none() {
                    o.witness = witness;
                }
            }
            None => self.outcomes.push(IdentityOutcome { identity: identity.to_string(), checked: 1, witness }),
        }
    }

    pub fn absorb(&mut self, other: SuiteReport) {
        for o in other.outcomes {
            match self.outcomes.iter_mut().find(|x| x.identity == o.identity) {
                Some(x) => {
                    x.checked += o.checked;
                    if x.witness.is_none() {
                        x.witness = o.witness;
                    }
                }
                None => self.outcomes.push(o),
            }
        }
    }
}

pub const PHI_SQUARED: &str = "φ² = 0";
pub const CECH_SQUARED: &str = "∂² = 0";
pub const DERHAM_SQUARED: &str = "d² = 0";
pub const IOTA_SQUARED: &str = "ι² = 0";
pub const PHI_CECH: &str = "[φ,∂] = 0";
pub const PHI_IOTA: &str = "[φ,ι] = 0";
pub const CECH_DERHAM: &str = "[∂,d] = 0";
pub const DERHAM_IOTA: &str = "[d,ι] = 0";
pub const MIXED: &str = "[φ,d] + [∂,ι] = 0";
pub const CECH_IOTA: &str = "[∂,ι] = −𝔏";
pub const TOTAL_SQUARED: &str = "(φ+∂+d+ι)² = 0";
pub const LIE_TRANSFER: &str = "δ𝔏 = (φd+dφ)δ";
pub const LIFT_INDEPENDENCE: &str = "d independent of lift";

pub const ASSOCIATIVITY: &str = "cup associativity";
pub const UNIT: &str = "cup unit";
pub const PHI_LEIBNIZ: &str = "φ derivation";
pub const CECH_LEIBNIZ: &str = "∂ derivation";
pub const DERHAM_LEIBNIZ: &str = "d derivation";
pub const IOTA_ERROR: &str = "ι error formula";
pub const IOTA_NORMALIZED: &str = "ι derivation on normalized";

/// Sum of possibly differently-placed zero elements; `None` when all vanish.
fn residual(parts: &[KElement]) -> Option<KElement> {
    let mut acc: Option<KElement> = None;
    for x in parts.iter().filter(|x| !x.is_zero()) {
        acc = Some(match acc {
            None => x.clone(),
            Some(a) => a.add(x),
        });
    }
    acc.filter(|a| !a.is_zero())
}

fn check(report: &mut SuiteReport, cx: &QuadComplex, identity: &str, input: &KElement, parts: &[KElement]) {
    let w = residual(parts).map(|r| {
        Witness::new(identity, Some(input.n), format!("on {} the residual is {}", cx.render(input), cx.render(&r)))
    });
    report.push(identity, w);
}

/// Every operator relation applied to one element.
pub fn check_element(cx: &QuadComplex, x: &KElement) -> SuiteReport {
    let mut r = SuiteReport::default();
    let [phi, cech, dr, iota] = cx.total_differential(x);
    let once = [&phi, &cech, &dr, &iota];
    let twice: Vec<[KElement; 4]> = once.iter().map(|y| cx.total_differential(y)).collect();
    // twice[a][b] = b(a(x)) with order φ, ∂, d, ι
    let ab = |a: usize, b: usize| twice[a][b].clone();
    let lie = cx.lie(x);
    let neg = |y: KElement| y.scale(&rational::int(-1));
    check(&mut r, cx, PHI_SQUARED, x, &[ab(0, 0)]);
    check(&mut r, cx, CECH_SQUARED, x, &[ab(1, 1)]);
    check(&mut r, cx, DERHAM_SQUARED, x, &[ab(2, 2)]);
    check(&mut r, cx, IOTA_SQUARED, x, &[ab(3, 3)]);
    check(&mut r, cx, PHI_CECH, x, &[ab(0, 1), ab(1, 0)]);
    check(&mut r, cx, PHI_IOTA, x, &[ab(0, 3), ab(3, 0)]);
    check(&mut r, cx, CECH_DERHAM, x, &[ab(1, 2), ab(2, 1)]);
    check(&mut r, cx, DERHAM_IOTA, x, &[ab(2, 3), ab(3, 2)]);
    check(&mut r, cx, MIXED, x, &[ab(0, 2), ab(2, 0), ab(1, 3), ab(3, 1)]);
    check(&mut r, cx, CECH_IOTA, x, &[ab(1, 3), ab(3, 1), lie.clone()]);
    // the square has several trigraded pieces; it vanishes iff each does
    let square_ok = [
        vec![ab(0, 0)],
        vec![ab(1, 1)],
        vec![ab(2, 2)],
        vec![ab(3, 3)],
        vec![ab(0, 1), ab(1, 0)],
        vec![ab(0, 3), ab(3, 0)],
        vec![ab(1, 2), ab(2, 1)],
        vec![ab(2, 3), ab(3, 2)],
        vec![ab(0, 2), ab(2, 0), ab(1, 3), ab(3, 1)],
    ]
    .iter()
    .find_map(|p| residual(p));
    r.push(
        TOTAL_SQUARED,
        square_ok.map(|res| {
            Witness::new(TOTAL_SQUARED, Some(x.n), format!("on {} a component is {}", cx.render(x), cx.render(&res)))
        }),
    );
    let phid = [ab(2, 0), ab(0, 2)];
    for q in 0..=x.n {
        let lifted = cx.lift(x, q);
        let mut lhs = KElement::zero(x.p + 1, x.k + 1, x.n);
        for j in 0..=x.n {
            lhs = lhs.add(&cx.project(&cx.lie_ambient(j, &lifted)));
        }
        check(&mut r, cx, LIE_TRANSFER, x, &[lhs, neg(phid[0].clone()), neg(phid[1].clone())]);
        if q > 0 {
            check(&mut r, cx, LIFT_INDEPENDENCE, x, &[cx.derham_via(x, q), neg(dr.clone())]);
        }
    }
    r
}

/// The operator relations on every basis element of total degree `≤ D`
/// in every sector, together with the structure-map identities.
pub fn run_suite(cx: &QuadComplex, max_degree: usize) -> Result<SuiteReport, EngineError> {
    let mut report = SuiteReport::default();
    let structure = validate_structure(cx.tower(), max_degree + 1)?;
    for c in &structure.checks {
        report.push(&c.identity, c.witness.clone());
    }
    let sectors = sector::sectors(cx.model())?;
    let parts: Vec<Result<SuiteReport, EngineError>> = sectors
        .par_iter()
        .map(|s| {
            let mut r = SuiteReport::default();
            for key in sector_keys(cx, s, max_degree)? {
                r.absorb(check_element(cx, &key.element(cx)));
            }
            Ok(r)
        })
        .collect();
    for p in parts {
        report.absorb(p?);
    }
    Ok(report)
}

fn sector_keys(cx: &QuadComplex, s: &Sector, max_degree: usize) -> Result<Vec<BasisKey>, EngineError> {
    let mut out = Vec::new();
    for t in 0..=max_degree {
        for n in 0..=t {
            for k in 0..=(t - n) / 2 {
                out.extend(k_basis(cx, s, t - n - k, k, n)?);
            }
        }
    }
    Ok(out)
}

/// Random small combinations of sector basis elements.
pub struct Sampler<'a> {
    cx: &'a QuadComplex,
    sectors: Vec<Sector>,
    cache: HashMap<(usize, usize), Vec<BasisKey>>,
    rng: StdRng,
    max_degree: usize,
}

impl<'a> Sampler<'a> {
    pub fn new(cx: &'a QuadComplex, seed: u64, max_degree: usize) -> Result<Self, EngineError> {
        Ok(Sampler {
            cx,
            sectors: sector::sectors(cx.model())?,
            cache: HashMap::new(),
            rng: StdRng::seed_from_u64(seed),
            max_degree,
        })
    }

    fn keys(&mut self, s: usize, t: usize) -> Result<&Vec<BasisKey>, EngineError> {
        if !self.cache.contains_key(&(s, t)) {
            let mut keys = Vec::new();
            for n in 0..=t {
                for k in 0..=(t - n) / 2 {
                    keys.extend(k_basis(self.cx, &self.sectors[s], t - n - k, k, n)?);
                }
            }
            self.cache.insert((s, t), keys);
        }
        Ok(&self.cache[&(s, t)])
    }

    /// A nonzero homogeneous element of total degree at most the sampler bound.
    pub fn element(&mut self) -> Result<KElement, EngineError> {
        loop {
            let s = self.rng.gen_range(0..self.sectors.len());
            let t = self.rng.gen_range(0..=self.max_degree);
            let keys = self.keys(s, t)?.clone();
            if keys.is_empty() {
                continue;
            }
            let first = keys[self.rng.gen_range(0..keys.len())].clone();
            let same: Vec<&BasisKey> = keys.iter().filter(|k| (k.p, k.k, k.n) == (first.p, first.k, first.n)).collect();
            let mut x = KElement::zero(first.p, first.k, first.n);
            for _ in 0..self.rng.gen_range(1..=3) {
                let key = same[self.rng.gen_range(0..same.len())];
                let c = self.rng.gen_range(1..=3) * if self.rng.gen_bool(0.5) { -1 } else { 1 };
                x = x.add(&key.element(self.cx).scale(&rational::int(c)));
            }
            if !x.is_zero() {
                return Ok(x);
            }
        }
    }
}

fn sign(x: &KElement) -> quaddr_exact::Rational {
    rational::sign(x.total_degree() as i64)
}

/// Leibniz residual `D(x∪y) − Dx∪y − (−1)^{|x|} x∪Dy`.
fn leibniz(cx: &QuadComplex, op: impl Fn(&KElement) -> KElement, x: &KElement, y: &KElement) -> Vec<KElement> {
    let neg = rational::int(-1);
    vec![op(&cx.cup(x, y)), cx.cup(&op(x), y).scale(&neg), cx.cup(x, &op(y)).scale(&(sign(x) * &neg))]
}

fn check_pair(r: &mut SuiteReport, cx: &QuadComplex, identity: &str, x: &KElement, y: &KElement, parts: &[KElement]) {
    let w = residual(parts).map(|res| {
        Witness::new(
            identity,
            Some(x.n + y.n),
            format!("on ({}, {}) the residual is {}", cx.render(x), cx.render(y), cx.render(&res)),
        )
    });
    r.push(identity, w);
}

/// Associativity and unit on random triples, the derivation laws and the
/// contraction error formula on random pairs.
pub fn cup_laws(cx: &QuadComplex, triples: usize, pairs: usize, seed: u64) -> Result<SuiteReport, EngineError> {
    let mut r = SuiteReport::default();
    let mut s = Sampler::new(cx, seed, 2)?;
    let neg = rational::int(-1);
    let one = cx.one(0);
    for _ in 0..triples {
        let (x, y, z) = (s.element()?, s.element()?, s.element()?);
        let lhs = cx.cup(&cx.cup(&x, &y), &z);
        let rhs = cx.cup(&x, &cx.cup(&y, &z));
        let w = residual(&[lhs, rhs.scale(&neg)]).map(|res| {
            Witness::new(
                ASSOCIATIVITY,
                Some(x.n + y.n + z.n),
                format!(
                    "on ({}, {}, {}) the residual is {}",
                    cx.render(&x),
                    cx.render(&y),
                    cx.render(&z),
                    cx.render(&res)
                ),
            )
        });
        r.push(ASSOCIATIVITY, w);
        check_pair(&mut r, cx, UNIT, &one, &x, &[cx.cup(&one, &x), x.scale(&neg)]);
        check_pair(&mut r, cx, UNIT, &x, &one, &[cx.cup(&x, &one), x.scale(&neg)]);
    }
    for _ in 0..pairs {
        let (x, y) = (s.element()?, s.element()?);
        check_pair(&mut r, cx, PHI_LEIBNIZ, &x, &y, &leibniz(cx, |a| cx.phi(a), &x, &y));
        check_pair(&mut r, cx, CECH_LEIBNIZ, &x, &y, &leibniz(cx, |a| cx.cech(a), &x, &y));
        check_pair(&mut r, cx, DERHAM_LEIBNIZ, &x, &y, &leibniz(cx, |a| cx.derham(a), &x, &y));
        let mut parts = leibniz(cx, |a| cx.contraction(a), &x, &y);
        if x.n > 0 {
            parts.push(cx.cup(&cx.degeneracy_sum(&x), &cx.lie(&y)));
        }
        check_pair(&mut r, cx, IOTA_ERROR, &x, &y, &parts);
        let (nx, ny) = (cx.normalize(&x), cx.normalize(&y));
        check_pair(&mut r, cx, IOTA_NORMALIZED, &nx, &ny, &leibniz(cx, |a| cx.contraction(a), &nx, &ny));
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::ActionModel;
    use crate::group::{FiniteGroup, GroupModel};
    use crate::model::{build_transformation_model, SignConventions};
    use crate::space::SpaceModel;
    use std::sync::Arc;

    fn weighted_line(conv: SignConventions) -> QuadComplex {
        let g = GroupModel::torus(&["g"]);
        let b = SpaceModel::affine(&["x"]);
        let m = build_transformation_model(g.clone(), b.clone(), ActionModel::monomial(&g, &b, &[vec![1]]).unwrap())
            .unwrap()
            .with_conventions(conv);
        QuadComplex::new(Arc::new(m)).unwrap()
    }

    #[test]
    fn suite_passes_on_weighted_line() {
        let r = run_suite(&weighted_line(SignConventions::default()), 3).unwrap();
        assert!(r.passed(), "{:?}", r.witnesses());
        assert!(r.outcome(CECH_IOTA).unwrap().checked > 10);
    }

    #[test]
    fn cup_laws_hold() {
        let r = cup_laws(&weighted_line(SignConventions::default()), 20, 20, 7).unwrap();
        assert!(r.passed(), "{:?}", r.witnesses());
    }

    #[test]
    fn cup_laws_on_finite_quotient() {
        let g = GroupModel::finite(FiniteGroup::cyclic(2));
        let b = SpaceModel::torus(&["t"]);
        let a = ActionModel::parse_finite(&b, &[vec!["t"], vec!["t^-1"]]).unwrap();
        let cx = QuadComplex::new(Arc::new(build_transformation_model(g, b, a).unwrap())).unwrap();
        let r = cup_laws(&cx, 10, 10, 3).unwrap();
        assert!(r.passed(), "{:?}", r.witnesses());
    }

    #[test]
    fn contraction_flip_is_detected() {
        let conv = SignConventions { contraction: 1, ..SignConventions::default() };
        let r = run_suite(&weighted_line(conv), 2).unwrap();
        let w = r.outcome(CECH_IOTA).unwrap().witness.clone().unwrap();
        assert_eq!(w.identity, CECH_IOTA);
    }
}
