//! Polynomial vector fields, brackets and involutivity of framed distributions.

use std::sync::Arc;

use quaddr_exact::{LaurentPoly, Ring};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VectorField {
    comps: Vec<LaurentPoly>,
}

impl VectorField {
    pub fn new(comps: Vec<LaurentPoly>) -> Self {
        VectorField { comps }
    }

    pub fn coordinate(ring: &Arc<Ring>, i: usize) -> Self {
        VectorField::new(
            (0..ring.len()).map(|j| if i == j { LaurentPoly::one(ring) } else { LaurentPoly::zero(ring) }).collect(),
        )
    }

    pub fn comps(&self) -> &[LaurentPoly] {
        &self.comps
    }

    pub fn apply(&self, f: &LaurentPoly) -> LaurentPoly {
        let mut out = LaurentPoly::zero(f.ring());
        for (i, c) in self.comps.iter().enumerate() {
            if !c.is_zero() {
                out = &out + &(c * &f.partial(i));
            }
        }
        out
    }

    pub fn bracket(&self, other: &VectorField) -> VectorField {
        VectorField::new(self.comps.iter().zip(&other.comps).map(|(x, y)| &self.apply(y) - &other.apply(x)).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|c| c.is_zero())
    }

    pub fn scale(&self, f: &LaurentPoly) -> VectorField {
        VectorField::new(self.comps.iter().map(|c| c * f).collect())
    }

    pub fn add(&self, other: &VectorField) -> VectorField {
        VectorField::new(self.comps.iter().zip(&other.comps).map(|(a, b)| a + b).collect())
    }
}

/// Determinant by cofactor expansion; the matrices here are tiny.
pub fn determinant(m: &[Vec<LaurentPoly>], ring: &Arc<Ring>) -> LaurentPoly {
    let n = m.len();
    if n == 0 {
        return LaurentPoly::one(ring);
    }
    let mut out = LaurentPoly::zero(ring);
    for j in 0..n {
        if m[0][j].is_zero() {
            continue;
        }
        let minor: Vec<Vec<LaurentPoly>> = m[1..]
            .iter()
            .map(|row| row.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, v)| v.clone()).collect())
            .collect();
        let term = &m[0][j] * &determinant(&minor, ring);
        out = if j % 2 == 0 { &out + &term } else { &out - &term };
    }
    out
}

/// Solves `m·c = b` when `det m` is a unit monomial.
pub fn solve_unimodular(m: &[Vec<LaurentPoly>], b: &[LaurentPoly], ring: &Arc<Ring>) -> Option<Vec<LaurentPoly>> {
    let n = m.len();
    let det = determinant(m, ring);
    det.as_unit_monomial()?;
    let mut out = Vec::with_capacity(n);
    for j in 0..n {
        let replaced: Vec<Vec<LaurentPoly>> = m
            .iter()
            .zip(b)
            .map(|(row, bi)| {
                let mut r = row.clone();
                r[j] = bi.clone();
                r
            })
            .collect();
        out.push(determinant(&replaced, ring).div_unit(&det).ok()?);
    }
    Some(out)
}

/// A distribution spanned by fields whose components along `pivots` form a
/// matrix with unit determinant, so membership is decided by solving.
#[derive(Clone, Debug)]
pub struct FramedDistribution {
    pub ring: Arc<Ring>,
    pub fields: Vec<VectorField>,
    pub pivots: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Flatness {
    Flat,
    NotInvolutive { i: usize, j: usize, bracket: String, residual: String },
    Degenerate(String),
}

impl FramedDistribution {
    fn pivot_matrix(&self) -> Vec<Vec<LaurentPoly>> {
        self.pivots.iter().map(|p| self.fields.iter().map(|f| f.comps[*p].clone()).collect()).collect()
    }

    /// Residual of `v` after subtracting its pivot-coordinate projection onto
    /// the span; zero iff `v` lies in the distribution.
    pub fn residual(&self, v: &VectorField) -> Option<VectorField> {
        let b: Vec<_> = self.pivots.iter().map(|p| v.comps[*p].clone()).collect();
        let c = solve_unimodular(&self.pivot_matrix(), &b, &self.ring)?;
        let mut r = v.clone();
        for (f, ci) in self.fields.iter().zip(&c) {
            r = r.add(&f.scale(&-ci));
        }
        Some(r)
    }

    pub fn check_involutive(&self) -> Flatness {
        if determinant(&self.pivot_matrix(), &self.ring).as_unit_monomial().is_none() {
            return Flatness::Degenerate("pivot minor is not a unit".into());
        }
        for i in 0..self.fields.len() {
            for j in i + 1..self.fields.len() {
                let br = self.fields[i].bracket(&self.fields[j]);
                let res = self.residual(&br).expect("unit pivot minor");
                if !res.is_zero() {
                    return Flatness::NotInvolutive {
                        i,
                        j,
                        bracket: render(&br, &self.ring),
                        residual: render(&res, &self.ring),
                    };
                }
            }
        }
        Flatness::Flat
    }
}

pub fn render(v: &VectorField, ring: &Arc<Ring>) -> String {
    let parts: Vec<String> = v
        .comps
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(i, c)| format!("({c})*d/d{}", ring.var(i).name))
        .collect();
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(" + ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use quaddr_exact::Var;

    #[test]
    fn bracket_of_euler_and_coordinate_field() {
        let r = Ring::new(vec![Var::poly("x")]);
        let e = VectorField::new(vec![LaurentPoly::var(&r, 0)]);
        let d = VectorField::coordinate(&r, 0);
        assert_eq!(e.bracket(&d), VectorField::new(vec![-&LaurentPoly::one(&r)]));
    }

    #[test]
    fn twisted_graph_is_not_involutive() {
        let r = Ring::new(vec![Var::poly("x1"), Var::poly("x2"), Var::poly("y1"), Var::poly("y2")]);
        let p = |s: &str| LaurentPoly::parse(&r, s).unwrap();
        let f1 = VectorField::new(vec![p("1"), p("0"), p("1"), p("0")]);
        let f2 = VectorField::new(vec![p("x1^2"), p("1"), p("y1^2"), p("1")]);
        let dist = FramedDistribution { ring: r.clone(), fields: vec![f1.clone(), f2], pivots: vec![0, 1] };
        match dist.check_involutive() {
            Flatness::NotInvolutive { residual, .. } => assert!(residual.contains("y1")),
            other => panic!("expected a witness, got {other:?}"),
        }
        let g2 = VectorField::new(vec![p("0"), p("1"), p("0"), p("1")]);
        let flat = FramedDistribution { ring: r, fields: vec![f1, g2], pivots: vec![0, 1] };
        assert_eq!(flat.check_involutive(), Flatness::Flat);
    }

    #[test]
    fn unimodular_solve() {
        let r = Ring::new(vec![Var::laurent("t")]);
        let p = |s: &str| LaurentPoly::parse(&r, s).unwrap();
        let m = vec![vec![p("t"), p("1")], vec![p("0"), p("t^-1")]];
        let c = solve_unimodular(&m, &[p("1"), p("1")], &r).unwrap();
        assert_eq!(c, vec![p("t^-1 - 1"), p("t")]);
    }
}
