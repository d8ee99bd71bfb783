use std::fs;
use std::path::{Path, PathBuf};

use quaddr::model::SignConventions;
use quaddr::registry::ModelConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::Failure;

/// Run parameters that may be stored next to the model description.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Options {
    pub max_degree: Option<usize>,
    pub r_max: Option<usize>,
    pub p: Option<usize>,
    pub format: Option<String>,
}

#[derive(Clone, Debug)]
pub struct LoadedModel {
    pub config: ModelConfig,
    pub options: Options,
}

fn read(path: &Path) -> Result<toml::Table, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
    text.parse::<toml::Table>().map_err(|e| Failure::config(format!("{}: {e}", path.display())))
}

pub fn load_model(path: &Path) -> Result<LoadedModel, Failure> {
    let mut table = read(path)?;
    let options = match table.remove("options") {
        Some(v) => v.try_into().map_err(|e| Failure::config(format!("{}: [options]: {e}", path.display())))?,
        None => Options::default(),
    };
    let config =
        toml::Value::Table(table).try_into().map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
    Ok(LoadedModel { config, options })
}

/// Hex SHA-256 of the canonical JSON of the given parts.
pub fn fingerprint<T: Serialize>(parts: &T) -> String {
    let bytes = serde_json::to_vec(parts).expect("configs serialize");
    format!("{:x}", Sha256::digest(bytes))
}

pub fn model_hash(config: &ModelConfig, conventions: &SignConventions) -> String {
    if conventions.is_default() {
        fingerprint(config)
    } else {
        fingerprint(&(config, conventions))
    }
}

pub fn parse_override(json: &str) -> Result<SignConventions, Failure> {
    serde_json::from_str(json).map_err(|e| Failure::config(format!("sign override: {e}")))
}

/// A morphism of models, read from its own file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MorphismConfig {
    pub source: PathBuf,
    pub target: PathBuf,
    /// Integer matrix of the group homomorphism on character lattices or
    /// vector coordinates, one row per target coordinate.
    pub group_matrix: Option<Vec<Vec<i64>>>,
    /// Images of the source group elements, for finite groups.
    pub elements: Option<Vec<usize>>,
    /// Pullbacks of the target base coordinates, written in the source base.
    #[serde(default)]
    pub base_images: Vec<String>,
    pub options: Option<Options>,
}

pub struct LoadedMorphism {
    pub config: MorphismConfig,
    pub source: LoadedModel,
    pub target: LoadedModel,
}

pub fn load_morphism(path: &Path) -> Result<LoadedMorphism, Failure> {
    let config: MorphismConfig =
        toml::Value::Table(read(path)?).try_into().map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
    let dir = path.parent().unwrap_or(Path::new("."));
    let source = load_model(&dir.join(&config.source))?;
    let target = load_model(&dir.join(&config.target))?;
    Ok(LoadedMorphism { config, source, target })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn options_are_split_from_the_model() {
        let dir = std::env::temp_dir().join(format!("quaddr-config-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("m.toml");
        fs::write(
            &path,
            "family = \"transformation\"\n[group]\nkind = \"torus\"\ncoords = [\"g\"]\n[options]\nmax_degree = 3\n",
        )
        .unwrap();
        let m = load_model(&path).unwrap();
        assert_eq!(m.options.max_degree, Some(3));
        assert_eq!(m.config.group.coords, vec!["g".to_string()]);
        fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn hash_depends_on_override_only_when_set() {
        let cfg = ModelConfig { family: "transformation".into(), ..Default::default() };
        let d = SignConventions::default();
        assert_eq!(model_hash(&cfg, &d), fingerprint(&cfg));
        let flipped = SignConventions { contraction: -d.contraction, ..d };
        assert_ne!(model_hash(&cfg, &flipped), model_hash(&cfg, &d));
        assert_eq!(model_hash(&cfg, &d).len(), 64);
    }

    #[test]
    fn partial_override_keeps_other_defaults() {
        let c = parse_override("{\"contraction\": 1}").unwrap();
        assert_eq!(c.contraction, 1);
        assert_eq!(c.cech, SignConventions::default().cech);
        assert!(parse_override("{\"nonsense\": 1}").is_err());
    }
}
