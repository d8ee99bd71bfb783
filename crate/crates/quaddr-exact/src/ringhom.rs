//! Substitution homomorphisms between Laurent polynomial rings.

use std::collections::hash_map::Entry;
use std::collections::HashMap;
use std::sync::Arc;

use num_traits::One;

use crate::error::KernelError;
use crate::poly::{same_ring, LaurentPoly, Ring, VarKind};
use crate::rational::Rational;

/// Sends source variable `i` to `images[i]`, a polynomial in the target ring.
#[derive(Clone, Debug, PartialEq)]
pub struct RingHom {
    source: Arc<Ring>,
    target: Arc<Ring>,
    images: Vec<LaurentPoly>,
    monomial: Option<Vec<(Vec<i32>, Rational)>>,
}

impl RingHom {
    pub fn new(source: &Arc<Ring>, target: &Arc<Ring>, images: Vec<LaurentPoly>) -> Result<Self, KernelError> {
        if images.len() != source.len() {
            return Err(KernelError::Shape(format!("{} images for {} source variables", images.len(), source.len())));
        }
        for (v, img) in source.vars().iter().zip(&images) {
            if !same_ring(img.ring(), target) {
                return Err(KernelError::RingMismatch {
                    left: format!("image of {}", v.name),
                    right: "target ring".into(),
                });
            }
            if v.kind == VarKind::Laurent && img.as_unit_monomial().is_none() {
                return Err(KernelError::LaurentImage { var: v.name.clone(), image: img.to_string() });
            }
        }
        let monomial =
            images.iter().map(|p| p.as_monomial().map(|(e, c)| (e.clone(), c.clone()))).collect::<Option<Vec<_>>>();
        Ok(RingHom { source: source.clone(), target: target.clone(), images, monomial })
    }

    /// Images given as strings in the target variables.
    pub fn parse(source: &Arc<Ring>, target: &Arc<Ring>, images: &[&str]) -> Result<Self, KernelError> {
        let imgs = images.iter().map(|s| LaurentPoly::parse(target, s)).collect::<Result<Vec<_>, _>>()?;
        RingHom::new(source, target, imgs)
    }

    pub fn identity(ring: &Arc<Ring>) -> Self {
        let imgs = (0..ring.len()).map(|i| LaurentPoly::var(ring, i)).collect();
        RingHom::new(ring, ring, imgs).expect("identity is well formed")
    }

    pub fn source(&self) -> &Arc<Ring> {
        &self.source
    }

    pub fn target(&self) -> &Arc<Ring> {
        &self.target
    }

    pub fn image(&self, i: usize) -> &LaurentPoly {
        &self.images[i]
    }

    pub fn images(&self) -> &[LaurentPoly] {
        &self.images
    }

    pub fn apply(&self, p: &LaurentPoly) -> Result<LaurentPoly, KernelError> {
        if !same_ring(p.ring(), &self.source) {
            return Err(KernelError::RingMismatch { left: "argument".into(), right: "homomorphism source".into() });
        }
        if let Some(mono) = &self.monomial {
            return Ok(self.apply_monomial(mono, p));
        }
        let mut cache: HashMap<(usize, i32), LaurentPoly> = HashMap::new();
        let mut out = LaurentPoly::zero(&self.target);
        for (e, c) in p.terms() {
            let mut acc = LaurentPoly::constant(&self.target, c.clone());
            for (i, x) in e.iter().enumerate() {
                if *x == 0 {
                    continue;
                }
                if let Entry::Vacant(slot) = cache.entry((i, *x)) {
                    slot.insert(self.power(i, *x)?);
                }
                acc = &acc * &cache[&(i, *x)];
            }
            out.add_scaled(&acc, &Rational::one());
        }
        Ok(out)
    }

    /// Infallible variant for homomorphisms whose laurent images were
    /// validated at construction.
    pub fn map(&self, p: &LaurentPoly) -> LaurentPoly {
        self.apply(p).expect("substitution")
    }

    fn power(&self, i: usize, x: i32) -> Result<LaurentPoly, KernelError> {
        let img = &self.images[i];
        if x >= 0 {
            Ok(img.pow(x as u32))
        } else {
            let inv = img.inverse().map_err(|_| KernelError::NonUnitInverse {
                var: self.source.var(i).name.clone(),
                image: img.to_string(),
            })?;
            Ok(inv.pow(x.unsigned_abs()))
        }
    }

    fn apply_monomial(&self, mono: &[(Vec<i32>, Rational)], p: &LaurentPoly) -> LaurentPoly {
        let n = self.target.len();
        let mut out = LaurentPoly::zero(&self.target);
        for (e, c) in p.terms() {
            let mut exps = vec![0i32; n];
            let mut coeff = c.clone();
            for (i, x) in e.iter().enumerate() {
                if *x == 0 {
                    continue;
                }
                let (ie, ic) = &mono[i];
                if !ic.is_one() {
                    coeff *= if *x >= 0 {
                        num_traits::pow(ic.clone(), *x as usize)
                    } else {
                        num_traits::pow(ic.recip(), x.unsigned_abs() as usize)
                    };
                }
                for (k, y) in ie.iter().enumerate() {
                    if *y != 0 {
                        let d = y.checked_mul(*x).expect("exponent overflow");
                        exps[k] = exps[k].checked_add(d).expect("exponent overflow");
                    }
                }
            }
            out.add_term(exps, coeff);
        }
        out
    }

    /// Composite substitution: a variable of `first.source` goes to
    /// `self(first.image)`.
    pub fn after(&self, first: &RingHom) -> Result<RingHom, KernelError> {
        if !same_ring(first.target(), &self.source) {
            return Err(KernelError::RingMismatch { left: "first target".into(), right: "second source".into() });
        }
        let imgs = first.images.iter().map(|p| self.apply(p)).collect::<Result<Vec<_>, _>>()?;
        RingHom::new(&first.source, &self.target, imgs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Var;
    use proptest::prelude::*;

    fn rings() -> (Arc<Ring>, Arc<Ring>) {
        (Ring::new(vec![Var::laurent("g")]), Ring::new(vec![Var::laurent("g1"), Var::laurent("g2")]))
    }

    #[test]
    fn monomial_substitution() {
        let (s, t) = rings();
        let h = RingHom::parse(&s, &t, &["g1*g2"]).unwrap();
        let p = LaurentPoly::parse(&s, "g^3").unwrap();
        assert_eq!(h.map(&p), LaurentPoly::parse(&t, "g1^3*g2^3").unwrap());
    }

    #[test]
    fn evaluation_at_unit() {
        let (s, _) = rings();
        let pt = Ring::empty();
        let h = RingHom::parse(&s, &pt, &["1"]).unwrap();
        let p = LaurentPoly::parse(&s, "g^2 - 1").unwrap();
        assert!(h.map(&p).is_zero());
    }

    #[test]
    fn additive_binomial() {
        let s = Ring::new(vec![Var::poly("v")]);
        let t = Ring::new(vec![Var::poly("v1"), Var::poly("v2")]);
        let h = RingHom::parse(&s, &t, &["v1+v2"]).unwrap();
        let p = LaurentPoly::parse(&s, "v^2").unwrap();
        assert_eq!(h.map(&p), LaurentPoly::parse(&t, "v1^2 + 2*v1*v2 + v2^2").unwrap());
    }

    #[test]
    fn laurent_images_must_be_units() {
        let (s, t) = rings();
        assert!(matches!(RingHom::parse(&s, &t, &["g1+g2"]), Err(KernelError::LaurentImage { .. })));
    }

    #[test]
    fn negative_power_of_poly_image_is_rejected() {
        let s = Ring::new(vec![Var::laurent("g")]);
        let t = Ring::new(vec![Var::poly("x")]);
        // a laurent variable may not go to x; building the map already fails
        assert!(RingHom::parse(&s, &t, &["x"]).is_err());
    }

    #[test]
    fn composition() {
        let (s, t) = rings();
        let u = Ring::new(vec![Var::laurent("a"), Var::laurent("b"), Var::laurent("c")]);
        let f = RingHom::parse(&s, &t, &["g1*g2^-1"]).unwrap();
        let g = RingHom::parse(&t, &u, &["a*b", "c^2"]).unwrap();
        let gf = g.after(&f).unwrap();
        let p = LaurentPoly::parse(&s, "g^2 + 3*g^-1").unwrap();
        assert_eq!(gf.map(&p), g.map(&f.map(&p)));
        assert_eq!(gf.image(0), &LaurentPoly::parse(&u, "a*b*c^-2").unwrap());
    }

    fn arb(ring: Arc<Ring>) -> impl Strategy<Value = LaurentPoly> {
        proptest::collection::vec(((-3i32..4, 0i32..3), -4i64..5), 0..4).prop_map(move |ts| {
            let mut p = LaurentPoly::zero(&ring);
            for ((a, b), c) in ts {
                p.add_term(vec![a, b], crate::rational::int(c));
            }
            p
        })
    }

    proptest! {
        #[test]
        fn homomorphism_laws(a in arb(Ring::new(vec![Var::laurent("g"), Var::poly("x")])),
                             b in arb(Ring::new(vec![Var::laurent("g"), Var::poly("x")]))) {
            let s = Ring::new(vec![Var::laurent("g"), Var::poly("x")]);
            let t = Ring::new(vec![Var::laurent("g1"), Var::laurent("g2"), Var::poly("x")]);
            let a = a.with_ring(&s).unwrap();
            let b = b.with_ring(&s).unwrap();
            for imgs in [["g1*g2", "g1*x"], ["-2*g2^-1", "x + g1^2"]] {
                let h = RingHom::parse(&s, &t, &imgs).unwrap();
                prop_assert_eq!(h.map(&(&a * &b)), &h.map(&a) * &h.map(&b));
                prop_assert_eq!(h.map(&(&a + &b)), &h.map(&a) + &h.map(&b));
            }
        }
    }
}
