//! Stable content identifiers.

use alloc::string::String;
use core::fmt::Write;
use sha2::{Digest, Sha256};

/// Hex of the first 8 bytes of SHA-256 over the parts, joined by the ASCII
/// unit separator so that `["ab", "c"]` and `["a", "bc"]` differ.
pub fn content_id(parts: &[&str]) -> String {
    let mut hasher = Sha256::new();
    for (i, part) in parts.iter().enumerate() {
        if i > 0 {
            hasher.update([0x1f]);
        }
        hasher.update(part.as_bytes());
    }
    let digest = hasher.finalize();
    let mut out = String::with_capacity(16);
    for byte in &digest[..8] {
        let _ = write!(out, "{byte:02x}");
    }
    out
}
