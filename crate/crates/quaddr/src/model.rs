//! Flat groupoid models: transformation, pair and vector bundle groupoids,
//! all presented as an abelian group acting on a parallelizable base.

use quaddr_exact::{LaurentPoly, RingHom};
use serde::{Deserialize, Serialize};

use crate::action::{product_ring, ActionModel};
use crate::error::ModelError;
use crate::field::{Flatness, FramedDistribution, VectorField};
use crate::group::{GroupKind, GroupModel};
use crate::space::{CoordKind, SpaceModel};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Transformation,
    Pair,
    VectorBundle,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Transformation => "transformation",
            ModelKind::Pair => "pair",
            ModelKind::VectorBundle => "vector_bundle",
        }
    }
}

/// The sign choices the complex is built from. Only the defaults are
/// certified; the other settings exist so that tests can show each choice
/// is load-bearing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SignConventions {
    /// Value of ω on the source normal directions.
    pub omega_source: i8,
    /// Decreed value of `ω_{qr}(ρ_q)`.
    pub omega_first: i8,
    /// Decreed value of `ω_{qr}(ρ_r)`.
    pub omega_second: i8,
    /// `ω_{qr} = omega_reverse · ω_{rq}` for `q > r`.
    pub omega_reverse: i8,
    /// Whether φ on level n carries `(−1)^n`.
    pub phi_level: bool,
    /// Whether d on level n carries `(−1)^n`.
    pub derham_level: bool,
    /// Overall sign of the alternating face sum.
    pub cech: i8,
    /// Whether the cup product carries `(−1)^{m(p−k)}`.
    pub cup_sign: bool,
    /// Overall sign of ι relative to `Σ (−1)^i ι_i^* 𝔏_j`.
    pub contraction: i8,
    /// Whether the degeneracy sum inside ι alternates.
    pub contraction_alternating: bool,
    /// Negates every ρ_q on one level.
    pub rho_flip_level: Option<usize>,
}

impl Default for SignConventions {
    fn default() -> Self {
        SignConventions {
            omega_source: 1,
            omega_first: 1,
            omega_second: -1,
            omega_reverse: -1,
            phi_level: true,
            derham_level: true,
            cech: 1,
            cup_sign: true,
            contraction: -1,
            contraction_alternating: true,
            rho_flip_level: None,
        }
    }
}

impl SignConventions {
    /// Every single-switch mutation of the defaults, by name.
    pub fn single_flips() -> Vec<(&'static str, SignConventions)> {
        let d = SignConventions::default();
        vec![
            ("omega_source", SignConventions { omega_source: -d.omega_source, ..d }),
            ("omega_first", SignConventions { omega_first: -d.omega_first, ..d }),
            ("omega_second", SignConventions { omega_second: -d.omega_second, ..d }),
            ("omega_reverse", SignConventions { omega_reverse: -d.omega_reverse, ..d }),
            ("phi_level", SignConventions { phi_level: !d.phi_level, ..d }),
            ("derham_level", SignConventions { derham_level: !d.derham_level, ..d }),
            ("cech", SignConventions { cech: -d.cech, ..d }),
            ("cup_sign", SignConventions { cup_sign: !d.cup_sign, ..d }),
            ("contraction", SignConventions { contraction: -d.contraction, ..d }),
            ("contraction_alternating", SignConventions { contraction_alternating: !d.contraction_alternating, ..d }),
            ("rho_flip_level", SignConventions { rho_flip_level: Some(1), ..d }),
        ]
    }

    pub fn is_default(&self) -> bool {
        *self == SignConventions::default()
    }
}

/// Weights making every differential homogeneous. Keys live in `ℤ^key_dim`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectorGrading {
    pub key_dim: usize,
    /// Weight of each base coordinate (and of its coframe element when affine).
    pub base: Vec<Vec<i32>>,
    /// Weight of each vector-group coordinate, its coframe element and υ.
    pub group: Vec<Vec<i32>>,
    /// Key coordinates that only take non-negative values.
    pub nonnegative: Vec<bool>,
    /// Torus group characters: exponent of `g_a` produced by the action face
    /// on a sector of key κ is `Σ_c characters[a][c]·κ_c`.
    pub characters: Vec<Vec<i32>>,
    /// Torus group exponents range over `[-window, window]` plus the character.
    pub window: i32,
    /// Keys range over `[-bound, bound]` in each coordinate.
    pub bound: i32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlatGroupoidModel {
    pub name: String,
    pub kind: ModelKind,
    pub group: GroupModel,
    pub base: SpaceModel,
    pub action: ActionModel,
    pub grading: SectorGrading,
    pub conventions: SignConventions,
    /// Trivialization of the tangent bundle for pair models.
    frame: Option<Vec<VectorField>>,
    anchor: Vec<Vec<LaurentPoly>>,
}

fn unit_vec(dim: usize, i: usize) -> Vec<i32> {
    let mut v = vec![0; dim];
    v[i] = 1;
    v
}

fn default_grading(group: &GroupModel, base: &SpaceModel, action: &ActionModel) -> Result<SectorGrading, ModelError> {
    let e = base.dim();
    let nu = group.rank();
    let nonneg: Vec<bool> = (0..e).map(|i| base.kind(i) == CoordKind::Affine).collect();
    let mut g = SectorGrading {
        key_dim: e,
        base: (0..e).map(|i| unit_vec(e, i)).collect(),
        group: vec![vec![0; e]; nu],
        nonnegative: nonneg,
        characters: vec![vec![0; e]; nu],
        window: 1,
        bound: 2,
    };
    match (group.kind, action) {
        (GroupKind::Torus, ActionModel::Connected(h)) => {
            for i in 0..e {
                let (ex, _) = h.image(i).as_monomial().ok_or_else(|| {
                    ModelError::Invalid(format!("no default grading: action on {} is not monomial", base.name(i)))
                })?;
                if (0..e).any(|j| ex[nu + j] != i32::from(i == j)) {
                    return Err(ModelError::Invalid("no default grading: action mixes base coordinates".into()));
                }
                for a in 0..nu {
                    g.characters[a][i] = ex[a];
                }
            }
        }
        (GroupKind::Additive, _) if action.is_trivial() => {
            g.key_dim = e + 1;
            for w in g.base.iter_mut() {
                w.push(0);
            }
            g.group = vec![unit_vec(e + 1, e); nu];
            g.nonnegative.push(true);
            g.characters = Vec::new();
        }
        (GroupKind::Additive, ActionModel::Connected(h)) if nu == e => {
            let gx = h.target();
            for i in 0..e {
                let expect = &LaurentPoly::var(gx, i) + &LaurentPoly::var(gx, nu + i);
                if *h.image(i) != expect || base.kind(i) != CoordKind::Affine {
                    return Err(ModelError::Invalid("no default grading for this vector group action".into()));
                }
            }
            g.group = (0..nu).map(|a| unit_vec(e, a)).collect();
            g.characters = Vec::new();
        }
        (GroupKind::Finite, _) => {}
        _ => return Err(ModelError::Invalid("no default grading for this action; declare one".into())),
    }
    if group.kind != GroupKind::Torus {
        g.characters = Vec::new();
    }
    Ok(g)
}

impl FlatGroupoidModel {
    fn assemble(
        name: String,
        kind: ModelKind,
        group: GroupModel,
        base: SpaceModel,
        action: ActionModel,
        frame: Option<Vec<VectorField>>,
    ) -> Result<Self, ModelError> {
        group.check_axioms()?;
        if !group.is_abelian() {
            return Err(ModelError::Unsupported("non-abelian groups".into()));
        }
        action.check_axioms(&group, &base)?;
        let anchor = compute_anchor(&group, &base, &action);
        let grading = default_grading(&group, &base, &action)?;
        Ok(FlatGroupoidModel {
            name,
            kind,
            group,
            base,
            action,
            grading,
            conventions: SignConventions::default(),
            frame,
            anchor,
        })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn with_conventions(mut self, c: SignConventions) -> Self {
        self.conventions = c;
        self
    }

    pub fn with_grading(mut self, g: SectorGrading) -> Self {
        self.grading = g;
        self
    }

    pub fn with_window(mut self, window: i32, bound: i32) -> Self {
        self.grading.window = window;
        self.grading.bound = bound;
        self
    }

    /// Dimension e of the base.
    pub fn base_dim(&self) -> usize {
        self.base.dim()
    }

    /// Dimension ν of the normal bundle.
    pub fn rank(&self) -> usize {
        self.group.rank()
    }

    /// `anchor()[i][a]`: `φ(θ_i) = Σ_a anchor[i][a] υ_a`, over the base ring.
    pub fn anchor(&self) -> &[Vec<LaurentPoly>] {
        &self.anchor
    }

    pub fn frame(&self) -> Option<&[VectorField]> {
        self.frame.as_deref()
    }

    /// True when the stored trivialization is the invariant frame, so that
    /// the action presentation carries the same connection.
    pub fn frame_is_invariant(&self) -> bool {
        match &self.frame {
            None => true,
            Some(f) => *f == invariant_frame(&self.group, &self.base),
        }
    }

    pub fn check_flatness(&self) -> Flatness {
        let e = self.base_dim();
        if let Some(frame) = &self.frame {
            // graph of the trivialization on X × X with coordinates (x, y)
            let mut vars = Vec::new();
            for suffix in ["", "'"] {
                for i in 0..e {
                    let mut v = self.base.var(i);
                    v.name.push_str(suffix);
                    vars.push(v);
                }
            }
            let xx = quaddr_exact::Ring::new(vars);
            let x = self.base.ring();
            let left = RingHom::new(&x, &xx, (0..e).map(|i| LaurentPoly::var(&xx, i)).collect()).expect("embedding");
            let right =
                RingHom::new(&x, &xx, (0..e).map(|i| LaurentPoly::var(&xx, e + i)).collect()).expect("embedding");
            let fields = frame
                .iter()
                .map(|f| {
                    VectorField::new(
                        f.comps().iter().map(|c| left.map(c)).chain(f.comps().iter().map(|c| right.map(c))).collect(),
                    )
                })
                .collect();
            return FramedDistribution { ring: xx, fields, pivots: (0..e).collect() }.check_involutive();
        }
        // arrows G × X (one copy per component for finite groups); E is
        // tangent to the fibres of the projection to G
        let ring = product_ring(&self.group, &self.base);
        let nu = self.rank();
        let fields = (0..e).map(|i| VectorField::coordinate(&ring, nu + i)).collect();
        FramedDistribution { ring, fields, pivots: (nu..nu + e).collect() }.check_involutive()
    }
}

/// The frame of invariant vector fields on the underlying space of a group.
fn invariant_frame(group: &GroupModel, base: &SpaceModel) -> Vec<VectorField> {
    let x = base.ring();
    (0..base.dim())
        .map(|a| {
            let f = VectorField::coordinate(&x, a);
            match group.kind {
                GroupKind::Torus => f.scale(&LaurentPoly::var(&x, a)),
                _ => f,
            }
        })
        .collect()
}

fn compute_anchor(group: &GroupModel, base: &SpaceModel, action: &ActionModel) -> Vec<Vec<LaurentPoly>> {
    let x = base.ring();
    let e = base.dim();
    let nu = group.rank();
    let h = match action {
        ActionModel::Connected(h) => h,
        ActionModel::Finite(_) => return vec![Vec::new(); e],
    };
    let at_unit = RingHom::new(
        h.target(),
        &x,
        (0..nu)
            .map(|_| LaurentPoly::constant(&x, group.unit_value()))
            .chain((0..e).map(|i| LaurentPoly::var(&x, i)))
            .collect(),
    )
    .expect("unit evaluation");
    (0..e)
        .map(|i| {
            (0..nu)
                .map(|a| {
                    let img = h.image(i);
                    let moved = match group.kind {
                        GroupKind::Torus => img.euler(a),
                        _ => img.partial(a),
                    };
                    let v = at_unit.map(&moved);
                    match base.kind(i) {
                        CoordKind::Affine => v,
                        CoordKind::Torus => v.div_unit(&LaurentPoly::var(&x, i)).expect("torus coordinate is a unit"),
                    }
                })
                .collect()
        })
        .collect()
}

pub fn build_transformation_model(
    group: GroupModel,
    base: SpaceModel,
    action: ActionModel,
) -> Result<FlatGroupoidModel, ModelError> {
    let name = format!("{}-on-{}d", group.kind.name(), base.dim());
    FlatGroupoidModel::assemble(name, ModelKind::Transformation, group, base, action, None)
}

/// The banal groupoid `X × X ⇒ X` over the underlying space of `group`,
/// realized through the simply transitive action of `group` on itself.
pub fn build_pair_model(group: GroupModel) -> Result<FlatGroupoidModel, ModelError> {
    let base = underlying_space(&group)?;
    let frame = invariant_frame(&group, &base);
    build_pair_model_with_frame(group, frame)
}

/// As [`build_pair_model`] with an arbitrary trivialization of `T_X`.
pub fn build_pair_model_with_frame(
    group: GroupModel,
    frame: Vec<VectorField>,
) -> Result<FlatGroupoidModel, ModelError> {
    let base = underlying_space(&group)?;
    if frame.len() != base.dim() || frame.iter().any(|f| f.comps().len() != base.dim()) {
        return Err(ModelError::Invalid("trivialization must have one field per coordinate".into()));
    }
    let action = match group.kind {
        GroupKind::Torus => ActionModel::monomial(&group, &base, &identity_weights(group.rank()))?,
        _ => ActionModel::translation(&group, &base)?,
    };
    let name = format!("pair-{}{}", group.kind.name(), group.rank());
    FlatGroupoidModel::assemble(name, ModelKind::Pair, group, base, action, Some(frame))
}

fn identity_weights(n: usize) -> Vec<Vec<i32>> {
    (0..n).map(|a| unit_vec(n, a)).collect()
}

fn underlying_space(group: &GroupModel) -> Result<SpaceModel, ModelError> {
    let names: Vec<String> = group.coord_names().iter().map(|c| format!("{c}x")).collect();
    let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    match group.kind {
        GroupKind::Torus => Ok(SpaceModel::torus(&refs)),
        GroupKind::Additive => Ok(SpaceModel::affine(&refs)),
        GroupKind::Finite => Err(ModelError::Unsupported("pair groupoid of a finite group".into())),
    }
}

/// The additive groupoid of the trivial rank-r bundle, `X × 𝔸^r ⇒ X`.
pub fn build_vector_bundle_model(base: SpaceModel, rank: usize) -> Result<FlatGroupoidModel, ModelError> {
    let names: Vec<String> = (1..=rank).map(|a| if rank == 1 { "v".to_string() } else { format!("v{a}_") }).collect();
    let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    let group = GroupModel::additive(&refs);
    let action = ActionModel::trivial(&group, &base);
    let name = format!("bundle-{}d-rank{}", base.dim(), rank);
    FlatGroupoidModel::assemble(name, ModelKind::VectorBundle, group, base, action, None)
}
