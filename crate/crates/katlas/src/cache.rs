//! File cache for solved bound states.
//!
//! Entries are keyed by a SHA-256 hash of the canonical (nonlinearity, N, k,
//! solver tolerances) string, stored as single JSON files with full-precision
//! floats, and written atomically via temp-file rename. The cache directory
//! comes from the KATLAS_CACHE environment variable, defaulting to
//! `./.katlas-cache`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::groundstate::{BoundState, RadialProfile, ShootingConfig};
use crate::nonlinearity::PowerNonlinearity;
use crate::{Error, Result};

pub const CACHE_ENV: &str = "KATLAS_CACHE";
pub const CACHE_DEFAULT: &str = ".katlas-cache";

#[derive(Debug, Clone)]
pub struct StateCache {
    dir: PathBuf,
}

#[derive(Serialize, Deserialize)]
struct CacheRecord {
    #[serde(rename = "N")]
    n: u32,
    k: usize,
    zeta0: f64,
    #[serde(rename = "D")]
    d: f64,
    #[serde(rename = "S")]
    s: f64,
    pohozaev_residual: f64,
    decay_rate: f64,
    r: Vec<f64>,
    v: Vec<f64>,
    dv: Vec<f64>,
}

impl StateCache {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(Self { dir })
    }

    /// Directory from KATLAS_CACHE, or the default next to the working dir.
    pub fn from_env() -> Result<Self> {
        let dir = std::env::var_os(CACHE_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from(CACHE_DEFAULT));
        Self::new(dir)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn key(nl: &PowerNonlinearity, n: u32, k: usize, cfg: &ShootingConfig) -> String {
        let canonical = format!(
            "v1|{}|N={n}|k={k}|{}",
            nl.canonical_string(),
            cfg.canonical_string()
        );
        let mut hasher = Sha256::new();
        hasher.update(canonical.as_bytes());
        let digest = hasher.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    fn path_for(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    pub fn load(&self, key: &str) -> Result<Option<BoundState>> {
        let path = self.path_for(key);
        let text = match fs::read_to_string(&path) {
            Ok(text) => text,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        let rec: CacheRecord =
            serde_json::from_str(&text).map_err(|e| Error::RecordFormat(e.to_string()))?;
        let profile = RadialProfile::new(rec.n, rec.r, rec.v, rec.dv)?;
        Ok(Some(BoundState {
            profile,
            nodes: rec.k,
            zeta0: rec.zeta0,
            d: rec.d,
            s: rec.s,
            pohozaev_residual: rec.pohozaev_residual,
            decay_rate: rec.decay_rate,
        }))
    }

    pub fn store(&self, key: &str, state: &BoundState) -> Result<()> {
        let rec = CacheRecord {
            n: state.profile.dim(),
            k: state.nodes,
            zeta0: state.zeta0,
            d: state.d,
            s: state.s,
            pohozaev_residual: state.pohozaev_residual,
            decay_rate: state.decay_rate,
            r: state.profile.r().to_vec(),
            v: state.profile.v().to_vec(),
            dv: state.profile.dv().to_vec(),
        };
        let text =
            crate::jsonnum::to_string(&rec).map_err(|e| Error::RecordFormat(e.to_string()))?;
        let tmp = self.dir.join(format!(
            ".{}.tmp-{}",
            Self::key_prefix(key),
            std::process::id()
        ));
        fs::write(&tmp, text)?;
        fs::rename(&tmp, self.path_for(key))?;
        Ok(())
    }

    pub fn clear(&self) -> Result<()> {
        for entry in fs::read_dir(&self.dir)? {
            let entry = entry?;
            if entry.path().extension().is_some_and(|e| e == "json") {
                fs::remove_file(entry.path())?;
            }
        }
        Ok(())
    }

    fn key_prefix(key: &str) -> &str {
        &key[..key.len().min(16)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_a_state_exactly() {
        let nl = PowerNonlinearity::single(1.0, 1.0, 4.0).unwrap();
        let cfg = ShootingConfig::default();
        let state = crate::groundstate::closed_form_1d(&nl, &cfg).unwrap();

        let dir = std::env::temp_dir().join(format!("katlas-cache-test-{}", std::process::id()));
        let cache = StateCache::new(&dir).unwrap();
        let key = StateCache::key(&nl, 1, 0, &cfg);
        assert!(cache.load(&key).unwrap().is_none());

        cache.store(&key, &state).unwrap();
        let back = cache.load(&key).unwrap().expect("cache hit");
        assert_eq!(back.profile, state.profile);
        assert_eq!(back.d.to_bits(), state.d.to_bits());
        assert_eq!(back.s.to_bits(), state.s.to_bits());
        assert_eq!(back.zeta0.to_bits(), state.zeta0.to_bits());

        cache.clear().unwrap();
        assert!(cache.load(&key).unwrap().is_none());
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn keys_separate_configurations() {
        let nl = PowerNonlinearity::single(1.0, 1.0, 4.0).unwrap();
        let nl2 = PowerNonlinearity::single(1.0, 1.0, 3.0).unwrap();
        let cfg = ShootingConfig::default();
        let tighter = ShootingConfig {
            integrator_rel_tol: 1.0e-11,
            ..cfg.clone()
        };
        let base = StateCache::key(&nl, 3, 0, &cfg);
        assert_ne!(base, StateCache::key(&nl2, 3, 0, &cfg));
        assert_ne!(base, StateCache::key(&nl, 4, 0, &cfg));
        assert_ne!(base, StateCache::key(&nl, 3, 1, &cfg));
        assert_ne!(base, StateCache::key(&nl, 3, 0, &tighter));
    }
}
