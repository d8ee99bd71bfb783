//! Parallelizable bases: products of affine lines and tori.

use std::sync::Arc;

use quaddr_exact::{Ring, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CoordKind {
    /// Polynomial coordinate with coframe `dx`.
    Affine,
    /// Invertible coordinate with coframe `dt/t`.
    Torus,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpaceModel {
    coords: Vec<(String, CoordKind)>,
}

impl SpaceModel {
    pub fn new(coords: Vec<(String, CoordKind)>) -> Self {
        SpaceModel { coords }
    }

    pub fn point() -> Self {
        SpaceModel { coords: Vec::new() }
    }

    pub fn affine(names: &[&str]) -> Self {
        SpaceModel { coords: names.iter().map(|n| (n.to_string(), CoordKind::Affine)).collect() }
    }

    pub fn torus(names: &[&str]) -> Self {
        SpaceModel { coords: names.iter().map(|n| (n.to_string(), CoordKind::Torus)).collect() }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn name(&self, i: usize) -> &str {
        &self.coords[i].0
    }

    pub fn kind(&self, i: usize) -> CoordKind {
        self.coords[i].1
    }

    pub fn coords(&self) -> &[(String, CoordKind)] {
        &self.coords
    }

    pub(crate) fn var(&self, i: usize) -> Var {
        match self.coords[i].1 {
            CoordKind::Affine => Var::poly(self.coords[i].0.clone()),
            CoordKind::Torus => Var::laurent(self.coords[i].0.clone()),
        }
    }

    pub fn ring(&self) -> Arc<Ring> {
        Ring::new((0..self.dim()).map(|i| self.var(i)).collect())
    }

    /// Label of the i-th coframe element.
    pub fn coframe_label(&self, i: usize) -> String {
        match self.coords[i].1 {
            CoordKind::Affine => format!("d{}", self.coords[i].0),
            CoordKind::Torus => format!("d{0}/{0}", self.coords[i].0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rings_and_coframes() {
        let s = SpaceModel::new(vec![("x".into(), CoordKind::Affine), ("t".into(), CoordKind::Torus)]);
        assert_eq!(s.dim(), 2);
        assert_eq!(s.ring().len(), 2);
        assert_eq!(s.coframe_label(0), "dx");
        assert_eq!(s.coframe_label(1), "dt/t");
        assert!(SpaceModel::point().ring().is_empty());
    }
}
