//! Model and group families selected by name from a configuration.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use quaddr_exact::LaurentPoly;
use serde::{Deserialize, Serialize};

use crate::action::ActionModel;
use crate::error::ModelError;
use crate::field::VectorField;
use crate::group::{FiniteGroup, GroupModel};
use crate::model::{
    build_pair_model, build_pair_model_with_frame, build_transformation_model, build_vector_bundle_model,
    FlatGroupoidModel,
};
use crate::space::{CoordKind, SpaceModel};

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupConfig {
    /// `torus`, `additive`, `finite` or `none`.
    pub kind: String,
    #[serde(default)]
    pub coords: Vec<String>,
    /// Order of a cyclic group.
    pub order: Option<usize>,
    /// Multiplication table of an arbitrary finite group, identity first.
    pub table: Option<Vec<Vec<usize>>>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaseConfig {
    #[serde(default)]
    pub affine: Vec<String>,
    #[serde(default)]
    pub torus: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionConfig {
    /// `weights[a][i]`: exponent of group coordinate `a` acting on base coordinate `i`.
    pub weights: Option<Vec<Vec<i32>>>,
    /// Images of the base coordinates under `(g, x) ↦ g·x`.
    pub images: Option<Vec<String>>,
    /// For finite groups: images of the base coordinates under each element.
    pub elements: Option<Vec<Vec<String>>>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GradingConfig {
    pub window: Option<i32>,
    pub bound: Option<i32>,
}

/// A model description as read from a configuration file.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub name: Option<String>,
    /// `transformation`, `pair` or `vector_bundle`.
    pub family: String,
    #[serde(default)]
    pub group: GroupConfig,
    #[serde(default)]
    pub base: BaseConfig,
    #[serde(default)]
    pub action: ActionConfig,
    /// Fibre rank of a vector bundle model.
    pub rank: Option<usize>,
    /// Trivialization of the tangent bundle for a pair model, one row of
    /// components per field.
    pub frame: Option<Vec<Vec<String>>>,
    pub grading: Option<GradingConfig>,
}

pub trait GroupFamily: Send + Sync {
    fn name(&self) -> &'static str;
    fn build(&self, cfg: &GroupConfig) -> Result<GroupModel, ModelError>;
}

pub trait ModelFamily: Send + Sync {
    fn name(&self) -> &'static str;
    fn build(&self, cfg: &ModelConfig) -> Result<FlatGroupoidModel, ModelError>;
}

fn refs(v: &[String]) -> Vec<&str> {
    v.iter().map(|s| s.as_str()).collect()
}

struct Torus;
struct Additive;
struct Finite;
struct Trivial;

impl GroupFamily for Torus {
    fn name(&self) -> &'static str {
        "torus"
    }
    fn build(&self, cfg: &GroupConfig) -> Result<GroupModel, ModelError> {
        Ok(GroupModel::torus(&refs(&cfg.coords)))
    }
}

impl GroupFamily for Additive {
    fn name(&self) -> &'static str {
        "additive"
    }
    fn build(&self, cfg: &GroupConfig) -> Result<GroupModel, ModelError> {
        Ok(GroupModel::additive(&refs(&cfg.coords)))
    }
}

impl GroupFamily for Finite {
    fn name(&self) -> &'static str {
        "finite"
    }
    fn build(&self, cfg: &GroupConfig) -> Result<GroupModel, ModelError> {
        let g = match (&cfg.table, cfg.order) {
            (Some(table), _) => FiniteGroup {
                elements: (0..table.len()).map(|i| format!("e{i}")).collect(),
                table: table.clone(),
                identity: 0,
            },
            (None, Some(n)) if n > 0 => FiniteGroup::cyclic(n),
            _ => return Err(ModelError::Invalid("a finite group needs an order or a table".into())),
        };
        g.check()?;
        Ok(GroupModel::finite(g))
    }
}

impl GroupFamily for Trivial {
    fn name(&self) -> &'static str {
        "none"
    }
    fn build(&self, _: &GroupConfig) -> Result<GroupModel, ModelError> {
        Ok(GroupModel::torus(&[]))
    }
}

struct Transformation;
struct Pair;
struct VectorBundle;

fn base_of(cfg: &BaseConfig) -> SpaceModel {
    let mut coords: Vec<(String, CoordKind)> = cfg.affine.iter().map(|n| (n.clone(), CoordKind::Affine)).collect();
    coords.extend(cfg.torus.iter().map(|n| (n.clone(), CoordKind::Torus)));
    SpaceModel::new(coords)
}

impl ModelFamily for Transformation {
    fn name(&self) -> &'static str {
        "transformation"
    }
    fn build(&self, cfg: &ModelConfig) -> Result<FlatGroupoidModel, ModelError> {
        let group = group(&cfg.group)?;
        let base = base_of(&cfg.base);
        let a = &cfg.action;
        let action = match (&a.weights, &a.images, &a.elements) {
            (Some(w), None, None) => ActionModel::monomial(&group, &base, w)?,
            (None, Some(img), None) => ActionModel::parse_connected(&group, &base, &refs(img))?,
            (None, None, Some(el)) => {
                let rows: Vec<Vec<&str>> = el.iter().map(|r| refs(r)).collect();
                ActionModel::parse_finite(&base, &rows)?
            }
            (None, None, None) => ActionModel::trivial(&group, &base),
            _ => return Err(ModelError::Invalid("give at most one of weights, images, elements".into())),
        };
        build_transformation_model(group, base, action)
    }
}

impl ModelFamily for Pair {
    fn name(&self) -> &'static str {
        "pair"
    }
    fn build(&self, cfg: &ModelConfig) -> Result<FlatGroupoidModel, ModelError> {
        let group = group(&cfg.group)?;
        let Some(rows) = &cfg.frame else {
            return build_pair_model(group);
        };
        let base = build_pair_model(group.clone())?.base;
        let ring = base.ring();
        let frame = rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|s| LaurentPoly::parse(&ring, s).map_err(ModelError::from))
                    .collect::<Result<Vec<_>, _>>()
                    .map(VectorField::new)
            })
            .collect::<Result<Vec<_>, _>>()?;
        build_pair_model_with_frame(group, frame)
    }
}

impl ModelFamily for VectorBundle {
    fn name(&self) -> &'static str {
        "vector_bundle"
    }
    fn build(&self, cfg: &ModelConfig) -> Result<FlatGroupoidModel, ModelError> {
        build_vector_bundle_model(base_of(&cfg.base), cfg.rank.unwrap_or(1))
    }
}

pub struct Registry {
    groups: BTreeMap<&'static str, Box<dyn GroupFamily>>,
    models: BTreeMap<&'static str, Box<dyn ModelFamily>>,
}

impl Registry {
    pub fn with_defaults() -> Self {
        let mut r = Registry { groups: BTreeMap::new(), models: BTreeMap::new() };
        r.register_group(Box::new(Torus));
        r.register_group(Box::new(Additive));
        r.register_group(Box::new(Finite));
        r.register_group(Box::new(Trivial));
        r.register_model(Box::new(Transformation));
        r.register_model(Box::new(Pair));
        r.register_model(Box::new(VectorBundle));
        r
    }

    pub fn register_group(&mut self, f: Box<dyn GroupFamily>) {
        self.groups.insert(f.name(), f);
    }

    pub fn register_model(&mut self, f: Box<dyn ModelFamily>) {
        self.models.insert(f.name(), f);
    }

    pub fn group_kinds(&self) -> Vec<&'static str> {
        self.groups.keys().copied().collect()
    }

    pub fn model_families(&self) -> Vec<&'static str> {
        self.models.keys().copied().collect()
    }

    pub fn group(&self, cfg: &GroupConfig) -> Result<GroupModel, ModelError> {
        self.groups
            .get(cfg.kind.as_str())
            .ok_or_else(|| ModelError::Invalid(format!("unknown group kind {:?}", cfg.kind)))?
            .build(cfg)
    }

    pub fn model(&self, cfg: &ModelConfig) -> Result<FlatGroupoidModel, ModelError> {
        let mut m = self
            .models
            .get(cfg.family.as_str())
            .ok_or_else(|| ModelError::Invalid(format!("unknown model family {:?}", cfg.family)))?
            .build(cfg)?;
        if let Some(name) = &cfg.name {
            m = m.with_name(name.clone());
        }
        if let Some(g) = &cfg.grading {
            let window = g.window.unwrap_or(m.grading.window);
            let bound = g.bound.unwrap_or(m.grading.bound);
            if window < 0 || bound < 0 {
                return Err(ModelError::Invalid("window and bound must be non-negative".into()));
            }
            m = m.with_window(window, bound);
        }
        Ok(m)
    }
}

fn registry() -> &'static Registry {
    static R: OnceLock<Registry> = OnceLock::new();
    R.get_or_init(Registry::with_defaults)
}

fn group(cfg: &GroupConfig) -> Result<GroupModel, ModelError> {
    registry().group(cfg)
}

/// Builds a model through the default registry.
pub fn build_model(cfg: &ModelConfig) -> Result<FlatGroupoidModel, ModelError> {
    registry().model(cfg)
}

fn strings(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

/// Configurations of the six reference models.
pub fn bundled_configs() -> Vec<ModelConfig> {
    let torus = |coords: &[&str]| GroupConfig { kind: "torus".into(), coords: strings(coords), ..Default::default() };
    vec![
        ModelConfig {
            name: Some("BGm".into()),
            family: "transformation".into(),
            group: torus(&["g"]),
            ..Default::default()
        },
        ModelConfig {
            name: Some("A1-mod-Gm".into()),
            family: "transformation".into(),
            group: torus(&["g"]),
            base: BaseConfig { affine: strings(&["x"]), ..Default::default() },
            action: ActionConfig { weights: Some(vec![vec![1]]), ..Default::default() },
            ..Default::default()
        },
        ModelConfig {
            name: Some("Gm-mod-Gm".into()),
            family: "transformation".into(),
            group: torus(&["g"]),
            base: BaseConfig { torus: strings(&["t"]), ..Default::default() },
            action: ActionConfig { weights: Some(vec![vec![1]]), ..Default::default() },
            ..Default::default()
        },
        ModelConfig {
            name: Some("Gm-mod-Z2".into()),
            family: "transformation".into(),
            group: GroupConfig { kind: "finite".into(), order: Some(2), ..Default::default() },
            base: BaseConfig { torus: strings(&["t"]), ..Default::default() },
            action: ActionConfig { elements: Some(vec![strings(&["t"]), strings(&["t^-1"])]), ..Default::default() },
            ..Default::default()
        },
        ModelConfig { name: Some("pair-Gm".into()), family: "pair".into(), group: torus(&["g"]), ..Default::default() },
        ModelConfig {
            name: Some("line-bundle-A1".into()),
            family: "vector_bundle".into(),
            base: BaseConfig { affine: strings(&["x"]), ..Default::default() },
            rank: Some(1),
            ..Default::default()
        },
    ]
}

/// The six reference models.
pub fn bundled_models() -> Vec<FlatGroupoidModel> {
    bundled_configs().iter().map(|c| build_model(c).expect("bundled models build")).collect()
}
