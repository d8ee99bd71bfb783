//! Group actions on bases, as pullback homomorphisms of coordinate rings.

use std::sync::Arc;

use quaddr_exact::{LaurentPoly, Ring, RingHom};

use crate::error::ModelError;
use crate::group::{GroupKind, GroupModel};
use crate::space::SpaceModel;

#[derive(Clone, Debug, PartialEq)]
pub enum ActionModel {
    /// `O_X → O_{G×X}`, the product ring listing group coordinates first.
    Connected(RingHom),
    /// Pullback along `x ↦ γ·x`, one homomorphism per group element.
    Finite(Vec<RingHom>),
}

/// The ring of `G × X` with group coordinates first.
pub fn product_ring(group: &GroupModel, base: &SpaceModel) -> Arc<Ring> {
    let mut vars: Vec<_> = group.coord_names().iter().map(|c| group.var(c.clone())).collect();
    vars.extend((0..base.dim()).map(|i| base.var(i)));
    Ring::new(vars)
}

impl ActionModel {
    pub fn trivial(group: &GroupModel, base: &SpaceModel) -> Self {
        let x = base.ring();
        match group.finite_group() {
            Some(f) => ActionModel::Finite((0..f.order()).map(|_| RingHom::identity(&x)).collect()),
            None => {
                let gx = product_ring(group, base);
                let nu = group.rank();
                let imgs = (0..base.dim()).map(|i| LaurentPoly::var(&gx, nu + i)).collect();
                ActionModel::Connected(RingHom::new(&x, &gx, imgs).expect("trivial action"))
            }
        }
    }

    /// Torus action `x_i ↦ Π_a g_a^{weights[a][i]} x_i`.
    pub fn monomial(group: &GroupModel, base: &SpaceModel, weights: &[Vec<i32>]) -> Result<Self, ModelError> {
        if group.kind != GroupKind::Torus {
            return Err(ModelError::Invalid("weight actions need a torus".into()));
        }
        let nu = group.rank();
        if weights.len() != nu || weights.iter().any(|w| w.len() != base.dim()) {
            return Err(ModelError::Invalid(format!("weight matrix must be {nu}×{}", base.dim())));
        }
        let x = base.ring();
        let gx = product_ring(group, base);
        let imgs = (0..base.dim())
            .map(|i| {
                let mut e = vec![0; nu + base.dim()];
                for a in 0..nu {
                    e[a] = weights[a][i];
                }
                e[nu + i] = 1;
                LaurentPoly::monomial(&gx, e, quaddr_exact::rational::one())
            })
            .collect();
        Ok(ActionModel::Connected(RingHom::new(&x, &gx, imgs)?))
    }

    /// A vector group acting on affine space of the same dimension by translation.
    pub fn translation(group: &GroupModel, base: &SpaceModel) -> Result<Self, ModelError> {
        if group.kind != GroupKind::Additive || group.rank() != base.dim() {
            return Err(ModelError::Invalid("translation needs a vector group of the base dimension".into()));
        }
        let x = base.ring();
        let gx = product_ring(group, base);
        let nu = group.rank();
        let imgs = (0..nu).map(|i| &LaurentPoly::var(&gx, i) + &LaurentPoly::var(&gx, nu + i)).collect();
        Ok(ActionModel::Connected(RingHom::new(&x, &gx, imgs)?))
    }

    /// Images of the base coordinates written in group and base coordinates.
    pub fn parse_connected(group: &GroupModel, base: &SpaceModel, images: &[&str]) -> Result<Self, ModelError> {
        let gx = product_ring(group, base);
        Ok(ActionModel::Connected(RingHom::parse(&base.ring(), &gx, images)?))
    }

    /// For each group element, images of the base coordinates.
    pub fn parse_finite(base: &SpaceModel, images: &[Vec<&str>]) -> Result<Self, ModelError> {
        let x = base.ring();
        let homs = images.iter().map(|im| RingHom::parse(&x, &x, im)).collect::<Result<Vec<_>, _>>()?;
        Ok(ActionModel::Finite(homs))
    }

    pub fn is_trivial(&self) -> bool {
        match self {
            ActionModel::Connected(h) => {
                let nu = h.target().len() - h.source().len();
                h.images().iter().enumerate().all(|(i, p)| *p == LaurentPoly::var(h.target(), nu + i))
            }
            ActionModel::Finite(hs) => hs.iter().all(|h| *h == RingHom::identity(h.source())),
        }
    }

    /// Unit and associativity laws as ring homomorphism identities.
    pub fn check_axioms(&self, group: &GroupModel, base: &SpaceModel) -> Result<(), ModelError> {
        let x = base.ring();
        let e = base.dim();
        match self {
            ActionModel::Finite(homs) => {
                let f = group
                    .finite_group()
                    .ok_or_else(|| ModelError::Invalid("element-wise action on a connected group".into()))?;
                if homs.len() != f.order() {
                    return Err(ModelError::Invalid(format!(
                        "{} element actions for a group of order {}",
                        homs.len(),
                        f.order()
                    )));
                }
                if homs[f.identity] != RingHom::identity(&x) {
                    return Err(ModelError::Axiom { identity: "action unit law".into() });
                }
                for a in 0..f.order() {
                    for b in 0..f.order() {
                        // (ab)·x = a·(b·x), so pullbacks compose in reverse
                        let lhs = &homs[f.mul(a, b)];
                        let rhs = homs[b].after(&homs[a])?;
                        if *lhs != rhs {
                            return Err(ModelError::Axiom {
                                identity: format!("action associativity at ({}, {})", f.elements[a], f.elements[b]),
                            });
                        }
                    }
                }
                Ok(())
            }
            ActionModel::Connected(h) => {
                let nu = group.rank();
                if group.kind == GroupKind::Finite {
                    return Err(ModelError::Invalid("connected action of a finite group".into()));
                }
                if h.target().len() != nu + e || h.source().len() != e {
                    return Err(ModelError::Invalid("action ring shapes".into()));
                }
                let unit_imgs = (0..nu)
                    .map(|_| LaurentPoly::constant(&x, group.unit_value()))
                    .chain((0..e).map(|i| LaurentPoly::var(&x, i)))
                    .collect();
                let at_unit = RingHom::new(h.target(), &x, unit_imgs)?;
                if at_unit.after(h)? != RingHom::identity(&x) {
                    return Err(ModelError::Axiom { identity: "action unit law".into() });
                }
                // G×G×X with coordinates (g, h, x)
                let mut vars: Vec<_> = Vec::new();
                for j in 1..=2 {
                    for c in group.coord_names() {
                        vars.push(group.var(format!("{c}{j}")));
                    }
                }
                vars.extend((0..e).map(|i| base.var(i)));
                let ggx = Ring::new(vars);
                let gv = |j: usize, a: usize| LaurentPoly::var(&ggx, j * nu + a);
                let xs: Vec<_> = (0..e).map(|i| LaurentPoly::var(&ggx, 2 * nu + i)).collect();
                let inner =
                    RingHom::new(h.target(), &ggx, (0..nu).map(|a| gv(1, a)).chain(xs.iter().cloned()).collect())?;
                let hx: Vec<_> = h.images().iter().map(|p| inner.map(p)).collect();
                let outer = RingHom::new(h.target(), &ggx, (0..nu).map(|a| gv(0, a)).chain(hx).collect())?;
                let prod = RingHom::new(
                    h.target(),
                    &ggx,
                    (0..nu).map(|a| group.compose_coord(&ggx, &[gv(0, a), gv(1, a)])).chain(xs).collect(),
                )?;
                for i in 0..e {
                    let lhs = prod.map(h.image(i));
                    let rhs = outer.map(h.image(i));
                    if lhs != rhs {
                        return Err(ModelError::Axiom {
                            identity: format!("action associativity on {}: {lhs} vs {rhs}", base.name(i)),
                        });
                    }
                }
                Ok(())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::FiniteGroup;

    #[test]
    fn bundled_actions_satisfy_axioms() {
        let g = GroupModel::torus(&["g"]);
        let a1 = SpaceModel::affine(&["x"]);
        ActionModel::monomial(&g, &a1, &[vec![1]]).unwrap().check_axioms(&g, &a1).unwrap();
        let gm = SpaceModel::torus(&["t"]);
        ActionModel::monomial(&g, &gm, &[vec![1]]).unwrap().check_axioms(&g, &gm).unwrap();
        let z2 = GroupModel::finite(FiniteGroup::cyclic(2));
        let inv = ActionModel::parse_finite(&gm, &[vec!["t"], vec!["t^-1"]]).unwrap();
        inv.check_axioms(&z2, &gm).unwrap();
        let v = GroupModel::additive(&["v"]);
        ActionModel::translation(&v, &a1).unwrap().check_axioms(&v, &a1).unwrap();
        ActionModel::trivial(&v, &a1).check_axioms(&v, &a1).unwrap();
        assert!(ActionModel::trivial(&v, &a1).is_trivial());
    }

    #[test]
    fn non_actions_are_rejected() {
        let g = GroupModel::torus(&["g"]);
        let a1 = SpaceModel::affine(&["x"]);
        let bad = ActionModel::parse_connected(&g, &a1, &["g^2*x + g - 1"]).unwrap();
        assert!(matches!(bad.check_axioms(&g, &a1), Err(ModelError::Axiom { .. })));
        let z3 = GroupModel::finite(FiniteGroup::cyclic(3));
        let gm = SpaceModel::torus(&["t"]);
        let bad = ActionModel::parse_finite(&gm, &[vec!["t"], vec!["t^-1"], vec!["t^-1"]]).unwrap();
        assert!(bad.check_axioms(&z3, &gm).is_err());
    }
}
