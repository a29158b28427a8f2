//! Flat binary checkpoints: an 8-byte magic, a little-endian `u64` header
//! length, a JSON header (grid, modes, `tau`), then for each mode `phi`
//! followed by `phidot` as little-endian `f64`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{FieldState, RadialGrid};
use crate::error::{Error, Result};
use crate::harmonics::Mode;

const MAGIC: &[u8; 8] = b"RWLABCK1";

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    grid: RadialGrid,
    modes: Vec<Mode>,
    tau: f64,
}

pub fn write_checkpoint(path: &Path, grid: &RadialGrid, modes: &[Mode], state: &FieldState) -> Result<()> {
    state.check_shape(grid, modes.len())?;
    let header = serde_json::to_vec(&Header { grid: *grid, modes: modes.to_vec(), tau: state.tau })
        .map_err(|e| Error::Contract(format!("checkpoint header: {e}")))?;
    let mut out = Vec::with_capacity(16 + header.len() + 16 * grid.n * modes.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(header.len() as u64).to_le_bytes());
    out.extend_from_slice(&header);
    for (phi, phidot) in state.phi.iter().zip(&state.phidot) {
        for v in phi.iter().chain(phidot) {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn read_checkpoint(path: &Path) -> Result<(RadialGrid, Vec<Mode>, FieldState)> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let bad = |why: &str| Error::Contract(format!("{}: not a valid checkpoint ({why})", path.display()));
    if bytes.len() < 16 || &bytes[..8] != MAGIC {
        return Err(bad("missing magic"));
    }
    let len = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
    let body = bytes.get(16..16 + len).ok_or_else(|| bad("truncated header"))?;
    let header: Header = serde_json::from_slice(body).map_err(|e| bad(&e.to_string()))?;
    let n = header.grid.n;
    let data = &bytes[16 + len..];
    if data.len() != 16 * n * header.modes.len() {
        return Err(bad("payload length does not match the header"));
    }
    let mut values = data.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap()));
    let mut state = FieldState::zeros(&header.grid, header.modes.len());
    state.tau = header.tau;
    for m in 0..header.modes.len() {
        for v in state.phi[m].iter_mut().chain(state.phidot[m].iter_mut()) {
            *v = values.next().unwrap();
        }
    }
    Ok((header.grid, header.modes, state))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolve::{random_state, RandomStateSpec};
    use crate::harmonics::ModeSet;

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("state.bin");
        let grid = RadialGrid::new(-30.0, 30.0, 301).unwrap();
        let modes = ModeSet::new(2, None).unwrap();
        let mut s = random_state(&grid, 3, &RandomStateSpec::default(), 3).unwrap();
        s.tau = 12.5;
        write_checkpoint(&path, &grid, modes.modes(), &s).unwrap();
        let (g, m, back) = read_checkpoint(&path).unwrap();
        assert_eq!(g, grid);
        assert_eq!(m, modes.modes());
        assert_eq!(back, s);
        std::fs::write(&path, b"garbage").unwrap();
        assert!(read_checkpoint(&path).is_err());
    }
}
