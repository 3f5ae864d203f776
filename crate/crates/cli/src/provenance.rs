//! Run provenance: every output file records the hash of the effective
//! config, the effective seed, and the tool version, so results can be tied
//! back to exactly what produced them.

use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub config_sha256: String,
    pub seed: u64,
    pub version: String,
}

impl Provenance {
    /// Hashes the canonical serialization of the effective config, i.e. the
    /// parsed config after command-line overrides. Two runs share a hash
    /// exactly when they ran the same settings.
    pub fn new(canonical_config: &str, seed: u64) -> Self {
        let mut h = Sha256::new();
        h.update(canonical_config.as_bytes());
        let digest = h.finalize();
        let mut hex = String::with_capacity(64);
        for b in digest {
            hex.push_str(&format!("{b:02x}"));
        }
        Provenance {
            config_sha256: hex,
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    /// One-line form for CSV and image comments.
    pub fn comment_line(&self) -> String {
        format!(
            "config_sha256={} seed={} version={}",
            self.config_sha256, self.seed, self.version
        )
    }
}
