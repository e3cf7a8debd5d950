//! Round-boundary snapshots: magic, SHA-256 of the payload, JSON payload.
//!
//! RNG streams are derived statelessly from `(seed, purpose, agent, round)`,
//! so the seed and round counter are the whole RNG position.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::SimState;
use crate::config::SimConfig;
use crate::error::{Error, Result};

pub const SNAPSHOT_MAGIC: &[u8; 8] = b"GGBSNAP1";

#[derive(Serialize, Deserialize)]
struct Payload {
    state: SimState,
    cfg: SimConfig,
}

pub fn snapshot(state: &SimState, cfg: &SimConfig) -> Result<Vec<u8>> {
    let body = serde_json::to_vec(&Payload {
        state: state.clone(),
        cfg: cfg.clone(),
    })?;
    let mut out = Vec::with_capacity(body.len() + 40);
    out.extend_from_slice(SNAPSHOT_MAGIC);
    out.extend_from_slice(&Sha256::digest(&body));
    out.extend_from_slice(&body);
    Ok(out)
}

pub fn restore(bytes: &[u8]) -> Result<(SimState, SimConfig)> {
    if bytes.len() < 40 || &bytes[..8] != SNAPSHOT_MAGIC {
        return Err(Error::CorruptSnapshot("missing header".into()));
    }
    let (digest, body) = bytes[8..].split_at(32);
    if Sha256::digest(body).as_slice() != digest {
        return Err(Error::CorruptSnapshot("checksum mismatch".into()));
    }
    let p: Payload = serde_json::from_slice(body).map_err(|e| Error::CorruptSnapshot(e.to_string()))?;
    Ok((p.state, p.cfg))
}

pub fn write_snapshot(path: &Path, state: &SimState, cfg: &SimConfig) -> Result<()> {
    std::fs::write(path, snapshot(state, cfg)?).map_err(|e| Error::io(path, e))
}

pub fn read_snapshot(path: &Path) -> Result<(SimState, SimConfig)> {
    restore(&std::fs::read(path).map_err(|e| Error::io(path, e))?)
}
