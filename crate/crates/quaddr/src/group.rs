//! Group families: tori, vector groups and finite groups.

use std::sync::Arc;

use quaddr_exact::rational::{self, Rational};
use quaddr_exact::{LaurentPoly, Ring, RingHom, Var};

use crate::error::ModelError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GroupKind {
    Torus,
    Additive,
    Finite,
}

impl GroupKind {
    pub fn name(self) -> &'static str {
        match self {
            GroupKind::Torus => "torus",
            GroupKind::Additive => "additive",
            GroupKind::Finite => "finite",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGroup {
    pub elements: Vec<String>,
    /// `table[a][b]` is the index of `a·b`.
    pub table: Vec<Vec<usize>>,
    pub identity: usize,
}

impl FiniteGroup {
    pub fn cyclic(n: usize) -> Self {
        FiniteGroup {
            elements: (0..n).map(|i| if i == 0 { "e".to_string() } else { format!("r{i}") }).collect(),
            table: (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect(),
            identity: 0,
        }
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn inverse(&self, a: usize) -> usize {
        (0..self.order()).find(|b| self.table[a][*b] == self.identity).expect("group axioms checked")
    }

    pub fn check(&self) -> Result<(), ModelError> {
        let n = self.order();
        let bad = |what: String| Err(ModelError::Axiom { identity: what });
        if self.table.len() != n || self.table.iter().any(|r| r.len() != n) {
            return bad("multiplication table is not square".into());
        }
        if self.table.iter().flatten().any(|x| *x >= n) {
            return bad("multiplication table leaves the group".into());
        }
        for a in 0..n {
            if self.table[self.identity][a] != a || self.table[a][self.identity] != a {
                return bad(format!("unit law fails at {}", self.elements[a]));
            }
            if !(0..n).any(|b| self.table[a][b] == self.identity) {
                return bad(format!("{} has no inverse", self.elements[a]));
            }
            for b in 0..n {
                for c in 0..n {
                    if self.mul(self.mul(a, b), c) != self.mul(a, self.mul(b, c)) {
                        return bad(format!(
                            "associativity fails at ({}, {}, {})",
                            self.elements[a], self.elements[b], self.elements[c]
                        ));
                    }
                }
            }
        }
        Ok(())
    }
}

/// An algebraic group with a free coordinate ring (torus or vector group)
/// or a finite group given by its table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupModel {
    pub kind: GroupKind,
    coords: Vec<String>,
    finite: Option<FiniteGroup>,
}

impl GroupModel {
    pub fn torus(coords: &[&str]) -> Self {
        GroupModel { kind: GroupKind::Torus, coords: coords.iter().map(|s| s.to_string()).collect(), finite: None }
    }

    pub fn additive(coords: &[&str]) -> Self {
        GroupModel { kind: GroupKind::Additive, coords: coords.iter().map(|s| s.to_string()).collect(), finite: None }
    }

    pub fn finite(group: FiniteGroup) -> Self {
        GroupModel { kind: GroupKind::Finite, coords: Vec::new(), finite: Some(group) }
    }

    /// Dimension ν of the Lie algebra.
    pub fn rank(&self) -> usize {
        self.coords.len()
    }

    pub fn coord_names(&self) -> &[String] {
        &self.coords
    }

    pub fn finite_group(&self) -> Option<&FiniteGroup> {
        self.finite.as_ref()
    }

    /// Number of connected components.
    pub fn components(&self) -> usize {
        self.finite.as_ref().map_or(1, |f| f.order())
    }

    pub fn is_abelian(&self) -> bool {
        match &self.finite {
            None => true,
            Some(f) => (0..f.order()).all(|a| (0..f.order()).all(|b| f.mul(a, b) == f.mul(b, a))),
        }
    }

    pub(crate) fn var(&self, name: String) -> Var {
        match self.kind {
            GroupKind::Torus => Var::laurent(name),
            _ => Var::poly(name),
        }
    }

    /// Coordinate ring of `G^copies` with variables suffixed `1..=copies`.
    pub fn ring(&self, copies: usize) -> Arc<Ring> {
        let mut vars = Vec::new();
        for j in 1..=copies {
            for c in &self.coords {
                vars.push(self.var(if copies == 1 { c.clone() } else { format!("{c}{j}") }));
            }
        }
        Ring::new(vars)
    }

    /// The image of coordinate `a` of a product of the given factors, each
    /// factor being a polynomial (torus: monomial) in some ring.
    pub fn compose_coord(&self, ring: &Arc<Ring>, factors: &[LaurentPoly]) -> LaurentPoly {
        match self.kind {
            GroupKind::Torus => factors.iter().fold(LaurentPoly::one(ring), |acc, f| &acc * f),
            _ => factors.iter().fold(LaurentPoly::zero(ring), |acc, f| &acc + f),
        }
    }

    pub fn unit_value(&self) -> Rational {
        match self.kind {
            GroupKind::Torus => rational::one(),
            _ => rational::zero(),
        }
    }

    pub fn multiplication(&self) -> RingHom {
        let g = self.ring(1);
        let gg = self.ring(2);
        let nu = self.rank();
        let imgs = (0..nu)
            .map(|a| self.compose_coord(&gg, &[LaurentPoly::var(&gg, a), LaurentPoly::var(&gg, nu + a)]))
            .collect();
        RingHom::new(&g, &gg, imgs).expect("multiplication")
    }

    pub fn inverse(&self) -> RingHom {
        let g = self.ring(1);
        let imgs = (0..self.rank())
            .map(|a| {
                let v = LaurentPoly::var(&g, a);
                match self.kind {
                    GroupKind::Torus => v.inverse().expect("torus coordinate is a unit"),
                    _ => -&v,
                }
            })
            .collect();
        RingHom::new(&g, &g, imgs).expect("inverse")
    }

    pub fn unit(&self) -> RingHom {
        let g = self.ring(1);
        let pt = Ring::empty();
        let imgs = (0..self.rank()).map(|_| LaurentPoly::constant(&pt, self.unit_value())).collect();
        RingHom::new(&g, &pt, imgs).expect("unit")
    }

    /// Rows express the invariant coframe in coordinate differentials:
    /// `dg/g` on a torus, `dg` on a vector group.
    pub fn maurer_cartan(&self) -> Vec<Vec<LaurentPoly>> {
        let g = self.ring(1);
        let nu = self.rank();
        (0..nu)
            .map(|a| {
                (0..nu)
                    .map(|b| {
                        if a != b {
                            LaurentPoly::zero(&g)
                        } else if self.kind == GroupKind::Torus {
                            LaurentPoly::var(&g, a).inverse().expect("unit")
                        } else {
                            LaurentPoly::one(&g)
                        }
                    })
                    .collect()
            })
            .collect()
    }

    /// Ad on the Lie algebra frame; trivial for the commutative families.
    pub fn adjoint(&self) -> Vec<Vec<LaurentPoly>> {
        let g = self.ring(1);
        let nu = self.rank();
        (0..nu)
            .map(|a| (0..nu).map(|b| if a == b { LaurentPoly::one(&g) } else { LaurentPoly::zero(&g) }).collect())
            .collect()
    }

    /// Associativity, unit and inverse laws as ring homomorphism identities.
    pub fn check_axioms(&self) -> Result<(), ModelError> {
        if let Some(f) = &self.finite {
            return f.check();
        }
        let nu = self.rank();
        let m = self.multiplication();
        let g3 = self.ring(3);
        let slot = |j: usize| -> Vec<LaurentPoly> { (0..nu).map(|a| LaurentPoly::var(&g3, j * nu + a)).collect() };
        let g2 = self.ring(2);
        let pair = |x: Vec<LaurentPoly>, y: Vec<LaurentPoly>| {
            RingHom::new(&g2, &g3, x.into_iter().chain(y).collect()).expect("embedding")
        };
        let ab: Vec<LaurentPoly> = (0..nu).map(|a| pair(slot(0), slot(1)).map(m.image(a))).collect();
        let bc: Vec<LaurentPoly> = (0..nu).map(|a| pair(slot(1), slot(2)).map(m.image(a))).collect();
        for a in 0..nu {
            let left = pair(ab.clone(), slot(2)).map(m.image(a));
            let right = pair(slot(0), bc.clone()).map(m.image(a));
            if left != right {
                return Err(ModelError::Axiom {
                    identity: format!("associativity, coordinate {a}: {left} vs {right}"),
                });
            }
        }
        let g = self.ring(1);
        let id: Vec<LaurentPoly> = (0..nu).map(|a| LaurentPoly::var(&g, a)).collect();
        let e: Vec<LaurentPoly> = (0..nu).map(|_| LaurentPoly::constant(&g, self.unit_value())).collect();
        let inv = self.inverse();
        let invs: Vec<LaurentPoly> = (0..nu).map(|a| inv.image(a).clone()).collect();
        let to_g = |x: Vec<LaurentPoly>, y: Vec<LaurentPoly>| {
            RingHom::new(&g2, &g, x.into_iter().chain(y).collect()).expect("embedding")
        };
        for a in 0..nu {
            let v = LaurentPoly::var(&g, a);
            if to_g(e.clone(), id.clone()).map(m.image(a)) != v || to_g(id.clone(), e.clone()).map(m.image(a)) != v {
                return Err(ModelError::Axiom { identity: format!("unit law, coordinate {a}") });
            }
            let prod = to_g(id.clone(), invs.clone()).map(m.image(a));
            if prod != LaurentPoly::constant(&g, self.unit_value()) {
                return Err(ModelError::Axiom { identity: format!("inverse law, coordinate {a}: {prod}") });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axioms_hold_for_bundled_families() {
        GroupModel::torus(&["g"]).check_axioms().unwrap();
        GroupModel::torus(&["g", "h"]).check_axioms().unwrap();
        GroupModel::additive(&["v", "w"]).check_axioms().unwrap();
        GroupModel::finite(FiniteGroup::cyclic(2)).check_axioms().unwrap();
        GroupModel::finite(FiniteGroup::cyclic(3)).check_axioms().unwrap();
    }

    #[test]
    fn broken_table_is_rejected() {
        let mut f = FiniteGroup::cyclic(3);
        f.table[1][1] = 1;
        assert!(GroupModel::finite(f).check_axioms().is_err());
    }

    #[test]
    fn multiplication_and_coframe() {
        let g = GroupModel::torus(&["g"]);
        assert_eq!(g.multiplication().image(0).to_string(), "g1*g2");
        assert_eq!(g.maurer_cartan()[0][0].to_string(), "g^-1");
        let v = GroupModel::additive(&["v"]);
        let sum = v.multiplication().image(0).clone();
        assert_eq!(sum.num_terms(), 2);
        assert!(sum.partial(0).is_constant() && sum.partial(1).is_constant());
        assert_eq!(v.inverse().image(0).to_string(), "-v");
        assert!(GroupModel::finite(FiniteGroup::cyclic(4)).is_abelian());
    }
}
