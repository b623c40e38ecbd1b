//! JSON verification reports with reproducibility metadata.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// One verification result. The digest covers the inputs that determine the
/// numbers, never the timestamp, so identical runs produce identical
/// digests.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub check: String,
    pub inputs_digest: String,
    pub estimate: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<f64>,
    pub verdict: String,
    pub seed: u64,
    pub n: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub details: Option<serde_json::Value>,
    pub timestamp: String,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization")
    }
}

/// Hex digest of a canonical description of the run inputs.
pub fn inputs_digest(parts: &[&str]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update(p.as_bytes());
        h.update([0u8]);
    }
    let out = h.finalize();
    out.iter().take(16).map(|b| format!("{b:02x}")).collect()
}

/// Wall-clock timestamp in seconds since the epoch, as a string. Kept out
/// of the digest by construction.
pub fn timestamp() -> String {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs().to_string())
        .unwrap_or_else(|_| "0".into())
}
