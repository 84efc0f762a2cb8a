//! Content hashing of result files, in git blob form: the SHA-256 of
//! `"blob {len}\0"` followed by the bytes.

use sha2::{Digest, Sha256};

pub fn git_blob_sha256(content: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(format!("blob {}\0", content.len()).as_bytes());
    hasher.update(content);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for byte in digest {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}
