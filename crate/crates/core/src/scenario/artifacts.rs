//! Stage outputs on disk. Every file written goes into `manifest.json`
//! with its SHA-256; reading a file checks it against the manifest so a
//! later stage never consumes a stale or edited input.
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::welfare::{GroupProfile, Indicators, WelfareLedger};

pub const MANIFEST: &str = "manifest.json";

pub struct ArtifactStore {
    root: PathBuf,
}

fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl ArtifactStore {
    pub fn open(root: impl Into<PathBuf>) -> Result<ArtifactStore> {
        let root = root.into();
        fs::create_dir_all(&root)?;
        Ok(ArtifactStore { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path(&self, rel: &str) -> PathBuf {
        self.root.join(rel)
    }

    pub fn manifest(&self) -> Result<BTreeMap<String, String>> {
        let p = self.root.join(MANIFEST);
        if !p.exists() {
            return Ok(BTreeMap::new());
        }
        Ok(serde_json::from_slice(&fs::read(p)?)?)
    }

    pub fn contains(&self, rel: &str) -> Result<bool> {
        Ok(self.manifest()?.contains_key(rel) && self.path(rel).exists())
    }

    pub fn write_bytes(&self, rel: &str, bytes: &[u8]) -> Result<()> {
        let p = self.path(rel);
        if let Some(dir) = p.parent() {
            fs::create_dir_all(dir)?;
        }
        fs::write(&p, bytes)?;
        let mut m = self.manifest()?;
        m.insert(rel.to_string(), digest(bytes));
        fs::write(self.root.join(MANIFEST), serde_json::to_vec_pretty(&m)?)?;
        Ok(())
    }

    pub fn write_json<T: Serialize>(&self, rel: &str, v: &T) -> Result<()> {
        self.write_bytes(rel, &serde_json::to_vec(v)?)
    }

    pub fn write_json_pretty<T: Serialize>(&self, rel: &str, v: &T) -> Result<()> {
        self.write_bytes(rel, &serde_json::to_vec_pretty(v)?)
    }

    /// Reads a file recorded in the manifest, failing if its hash differs.
    pub fn read_verified(&self, rel: &str) -> Result<Vec<u8>> {
        let m = self.manifest()?;
        let want = m
            .get(rel)
            .ok_or_else(|| Error::invalid(format!("{rel} is not in the manifest of {}; run the stage that produces it", self.root.display())))?;
        let bytes = fs::read(self.path(rel))?;
        let got = digest(&bytes);
        if &got != want {
            return Err(Error::invalid(format!("{rel} does not match its manifest hash (expected {want}, found {got})")));
        }
        Ok(bytes)
    }

    pub fn read_json<T: DeserializeOwned>(&self, rel: &str) -> Result<T> {
        Ok(serde_json::from_slice(&self.read_verified(rel)?)?)
    }
}

fn csv_bytes<F>(header: &[&str], fill: F) -> Result<Vec<u8>>
where
    F: FnOnce(&mut csv::Writer<Vec<u8>>) -> Result<()>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    fill(&mut w)?;
    w.into_inner().map_err(|e| Error::invalid(format!("csv buffer: {e}")))
}

pub fn welfare_csv(rows: &[(&str, &WelfareLedger)]) -> Result<Vec<u8>> {
    csv_bytes(&["scheme", "component", "value"], |w| {
        for (scheme, l) in rows {
            for (k, v) in l.rows() {
                w.write_record([scheme.to_string(), k.to_string(), format!("{v:.6}")])?;
            }
        }
        Ok(())
    })
}

pub fn groups_csv(rows: &[(&str, &str, &[GroupProfile])]) -> Result<Vec<u8>> {
    csv_bytes(&["scheme", "agents", "group", "lo", "hi", "count", "share", "mean_surplus", "stat", "stat_mean"], |w| {
        for (scheme, agents, groups) in rows {
            for g in *groups {
                let base = [
                    scheme.to_string(),
                    agents.to_string(),
                    g.group.to_string(),
                    format!("{}", g.range.0),
                    format!("{}", g.range.1),
                    g.count.to_string(),
                    format!("{:.4}", g.share()),
                    format!("{:.6}", g.mean_surplus),
                ];
                if g.stats.is_empty() {
                    w.write_record(base.iter().cloned().chain([String::new(), String::new()]))?;
                }
                for (name, v) in &g.stats {
                    w.write_record(base.iter().cloned().chain([name.clone(), format!("{v:.6}")]))?;
                }
            }
        }
        Ok(())
    })
}

pub fn indicators_csv(rows: &[(&str, &Indicators)]) -> Result<Vec<u8>> {
    csv_bytes(&["scenario", "table", "key", "value"], |w| {
        for (name, ind) in rows {
            for (t, k, v) in ind.rows() {
                w.write_record([name.to_string(), t, k, format!("{v:.6}")])?;
            }
        }
        Ok(())
    })
}
