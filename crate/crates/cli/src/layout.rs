//! Where each stage keeps its files, and the manifests that index them.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

pub const TOOL: &str = "mamid";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const FEATURES: &str = "preprocess/features.csv";
pub const SPLIT: &str = "tune/split.json";
pub const SELECTION: &str = "tune/selection.json";

/// Stage names and their directories, in pipeline order.
pub const STAGES: [(&str, &str); 6] = [
    ("synth", "synth"),
    ("preprocess", "preprocess"),
    ("tune", "tune"),
    ("validate-subset", "validate/subset"),
    ("validate-full", "validate/full"),
    ("explain", "explain"),
];

pub fn stage_dir(stage: &str) -> &'static str {
    STAGES
        .iter()
        .find(|s| s.0 == stage)
        .map(|s| s.1)
        .expect("known stage")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageManifest {
    pub tool: String,
    pub version: String,
    pub stage: String,
    pub config: serde_json::Value,
    /// Files read, relative to the output directory when inside it.
    pub inputs: Vec<String>,
    /// Files written, relative to the output directory.
    pub artifacts: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RootManifest {
    pub tool: String,
    pub version: String,
    /// Stage name to its manifest path.
    pub stages: BTreeMap<String, String>,
}

/// Collects the files a stage writes under the output directory.
pub struct StageWriter {
    root: PathBuf,
    stage: &'static str,
    inputs: Vec<String>,
    artifacts: Vec<String>,
}

impl StageWriter {
    pub fn new(root: &Path, stage: &'static str) -> Result<Self> {
        let dir = root.join(stage_dir(stage));
        std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(StageWriter {
            root: root.to_path_buf(),
            stage,
            inputs: Vec::new(),
            artifacts: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn input(&mut self, path: &Path) {
        let rel = path.strip_prefix(&self.root).unwrap_or(path);
        self.inputs.push(slash(rel));
    }

    /// Path for an artifact, relative to the stage directory; records it.
    pub fn artifact(&mut self, rel: &str) -> Result<PathBuf> {
        let rel = format!("{}/{rel}", stage_dir(self.stage));
        let path = self.root.join(&rel);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
        }
        self.artifacts.push(rel);
        Ok(path)
    }

    pub fn write(&mut self, rel: &str, contents: impl AsRef<[u8]>) -> Result<PathBuf> {
        let path = self.artifact(rel)?;
        std::fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }

    pub fn write_json(&mut self, rel: &str, value: &impl Serialize) -> Result<PathBuf> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(rel, text)
    }

    /// Writes the stage manifest and registers it in the root manifest.
    pub fn finish(mut self, config: &impl Serialize) -> Result<()> {
        self.inputs.sort();
        self.inputs.dedup();
        self.artifacts.sort();
        self.artifacts.dedup();
        let manifest = StageManifest {
            tool: TOOL.into(),
            version: VERSION.into(),
            stage: self.stage.into(),
            config: serde_json::to_value(config)?,
            inputs: self.inputs,
            artifacts: self.artifacts,
        };
        let rel = format!("{}/manifest.json", stage_dir(self.stage));
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        let path = self.root.join(&rel);
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;

        let root_path = self.root.join("manifest.json");
        let mut root = read_root(&self.root)?.unwrap_or_else(|| RootManifest {
            tool: TOOL.into(),
            version: VERSION.into(),
            stages: BTreeMap::new(),
        });
        root.stages.insert(self.stage.into(), rel);
        let mut text = serde_json::to_string_pretty(&root)?;
        text.push('\n');
        std::fs::write(&root_path, text).with_context(|| format!("writing {}", root_path.display()))?;
        Ok(())
    }
}

pub fn read_root(root: &Path) -> Result<Option<RootManifest>> {
    let path = root.join("manifest.json");
    if !path.exists() {
        return Ok(None);
    }
    let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    Ok(Some(serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?))
}

pub fn read_stage(root: &Path, stage: &str) -> Result<Option<StageManifest>> {
    let path = root.join(stage_dir(stage)).join("manifest.json");
    if !path.exists() {
        return Ok(None);
    }
    let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    Ok(Some(serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| mamid_core::Error::io(path, e))?;
    let value = serde_json::from_str(&text).map_err(mamid_core::Error::from)?;
    Ok(value)
}

fn slash(p: &Path) -> String {
    p.to_string_lossy().replace('\\', "/")
}
