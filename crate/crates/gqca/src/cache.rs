//! Persistent cache of generated cluster variables.
//!
//! The cache is a versioned JSON document holding the tool version, the skew
//! form, and a map `k → element`. It is advisory: entries are revalidated
//! against the exchange relation on load (via
//! [`KroneckerAlgebra::preload_variables`]) and anything that fails
//! validation — or a file that cannot be read at all — simply falls back to
//! recomputation.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use thiserror::Error;

use crate::kronecker::KroneckerAlgebra;
use crate::torus::{ElementParseError, TorusElement};

/// Version tag of the cache document format.
pub const CACHE_FORMAT_VERSION: u64 = 1;

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("cache I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("cache is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported cache version {found}")]
    Version { found: Value },
    #[error("cache skew form does not match the algebra")]
    FormMismatch,
    #[error("cache entry has a non-integer key {0:?}")]
    BadKey(String),
    #[error("cache entry for k = {k} is malformed: {source}")]
    BadElement {
        k: i64,
        #[source]
        source: ElementParseError,
    },
}

/// The default per-user cache location, honouring `XDG_DATA_HOME`.
pub fn default_path() -> Option<PathBuf> {
    if let Ok(dir) = std::env::var("XDG_DATA_HOME") {
        if !dir.is_empty() {
            return Some(PathBuf::from(dir).join("gqca").join("cache.json"));
        }
    }
    if let Ok(home) = std::env::var("HOME") {
        if !home.is_empty() {
            return Some(
                PathBuf::from(home)
                    .join(".local")
                    .join("share")
                    .join("gqca")
                    .join("cache.json"),
            );
        }
    }
    None
}

/// Load a cache file into the algebra. Returns the number of accepted
/// entries; a missing file is an empty cache.
pub fn load(path: &Path, algebra: &KroneckerAlgebra) -> Result<usize, CacheError> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(0),
        Err(e) => return Err(e.into()),
    };
    let doc: Value = serde_json::from_str(&text)?;
    if doc["version"] != json!(CACHE_FORMAT_VERSION) {
        return Err(CacheError::Version {
            found: doc["version"].clone(),
        });
    }
    let lambda: Vec<Vec<i64>> = serde_json::from_value(doc["lambda"].clone())?;
    if lambda != algebra.form().rows() {
        return Err(CacheError::FormMismatch);
    }
    let mut candidates = BTreeMap::new();
    if let Some(vars) = doc["vars"].as_object() {
        for (key, value) in vars {
            let k: i64 = key
                .parse()
                .map_err(|_| CacheError::BadKey(key.clone()))?;
            let element = TorusElement::from_json_with_form(algebra.form().clone(), value)
                .map_err(|source| CacheError::BadElement { k, source })?;
            candidates.insert(k, element);
        }
    }
    Ok(algebra.preload_variables(&candidates))
}

/// Write the algebra's generated variables to a cache file. The parent
/// directory is created if needed and the write goes through a sibling
/// temporary file.
pub fn save(path: &Path, algebra: &KroneckerAlgebra) -> Result<(), CacheError> {
    let snapshot = algebra.snapshot_variables();
    let vars: serde_json::Map<String, Value> = snapshot
        .iter()
        .map(|(k, x)| (k.to_string(), serde_json::to_value(x).unwrap()))
        .collect();
    let doc = json!({
        "version": CACHE_FORMAT_VERSION,
        "tool": format!("gqca {}", env!("CARGO_PKG_VERSION")),
        "lambda": algebra.form().rows(),
        "vars": vars,
    });
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    let tmp = path.with_extension("json.tmp");
    fs::write(&tmp, serde_json::to_string(&doc)?)?;
    fs::rename(&tmp, path)?;
    Ok(())
}
