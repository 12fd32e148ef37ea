//! Trajectory snapshot files.
//!
//! Layout (documented here and in the README):
//!
//! ```text
//!   bytes 0..8    magic b"GASNAP01" (version embedded)
//!   bytes 8..12   u32 LE: header length H
//!   bytes 12..12+H JSON header: params, solver settings, grid, counts
//!   then          numeric block, all f64 little-endian:
//!                   for each snapshot: t, then node values
//!                   then each ledger row as 6 values
//!                   (t, l1, linf, grad_max, absorption_increment,
//!                    boundary_flux)
//!   last 4 bytes  u32 LE: CRC32 of the numeric block
//! ```
//!
//! Round trips are bit-exact: every f64 crosses as raw bits.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use gradabs_core::exponents::Params;
use gradabs_core::grid::{Field, Geometry, Grid, RegEps};
use gradabs_core::solver::{DtPolicy, LedgerRow, Scheme, SolverConfig, Trajectory};

const MAGIC: &[u8; 8] = b"GASNAP01";

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    p: f64,
    q: f64,
    n: u32,
    eps: f64,
    gamma: f64,
    t_end: f64,
    dt_policy: DtPolicy,
    scheme: Scheme,
    observer_stride: usize,
    absorption: bool,
    geometry: Geometry,
    l: f64,
    m: usize,
    initial_amp: f64,
    n_nodes: usize,
    n_snapshots: usize,
    n_ledger: usize,
}

pub fn save_snapshot(traj: &Trajectory, path: &Path) -> Result<()> {
    let grid = traj.grid();
    let header = Header {
        p: traj.params().p(),
        q: traj.params().q(),
        n: traj.params().n(),
        eps: traj.config().reg.eps(),
        gamma: traj.config().reg.gamma(),
        t_end: traj.config().t_end,
        dt_policy: traj.config().dt_policy,
        scheme: traj.config().scheme,
        observer_stride: traj.config().observer_stride,
        absorption: traj.config().absorption_enabled,
        geometry: grid.geometry(),
        l: grid.half_width(),
        m: grid.cells(),
        initial_amp: traj.initial_amp(),
        n_nodes: grid.node_count(),
        n_snapshots: traj.snapshots().len(),
        n_ledger: traj.ledger().len(),
    };
    let header_json = serde_json::to_vec(&header)?;

    let mut numeric: Vec<u8> =
        Vec::with_capacity(8 * (header.n_snapshots * (header.n_nodes + 1) + 6 * header.n_ledger));
    let mut push = |v: f64| numeric.extend_from_slice(&v.to_le_bytes());
    for (t, field) in traj.snapshots() {
        push(*t);
        for &v in field.values() {
            push(v);
        }
    }
    for row in traj.ledger() {
        push(row.t);
        push(row.l1);
        push(row.linf);
        push(row.grad_max);
        push(row.absorption_increment);
        push(row.boundary_flux);
    }

    let crc = crc32fast::hash(&numeric);
    let mut out = Vec::with_capacity(12 + header_json.len() + numeric.len() + 4);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(header_json.len() as u32).to_le_bytes());
    out.extend_from_slice(&header_json);
    out.extend_from_slice(&numeric);
    out.extend_from_slice(&crc.to_le_bytes());
    fs::write(path, out).with_context(|| format!("writing snapshot {}", path.display()))?;
    Ok(())
}

pub fn load_snapshot(path: &Path) -> Result<Trajectory> {
    let data = fs::read(path).with_context(|| format!("reading snapshot {}", path.display()))?;
    if data.len() < 16 || &data[..8] != MAGIC {
        bail!("snapshot version mismatch: bad magic (want GASNAP01)");
    }
    let hlen = u32::from_le_bytes(data[8..12].try_into().unwrap()) as usize;
    if data.len() < 12 + hlen + 4 {
        bail!("corrupt snapshot: truncated header");
    }
    let header: Header =
        serde_json::from_slice(&data[12..12 + hlen]).context("corrupt snapshot header")?;

    let numeric = &data[12 + hlen..data.len() - 4];
    let stored_crc = u32::from_le_bytes(data[data.len() - 4..].try_into().unwrap());
    if crc32fast::hash(numeric) != stored_crc {
        bail!("snapshot checksum failure");
    }

    let expected = 8 * (header.n_snapshots * (header.n_nodes + 1) + 6 * header.n_ledger);
    if numeric.len() != expected {
        bail!(
            "corrupt snapshot length: numeric block {} bytes, expected {expected}",
            numeric.len()
        );
    }

    let params = Params::new(header.p, header.q, header.n).context("snapshot params")?;
    let grid = Grid::new(header.geometry, header.l, header.m).context("snapshot grid")?;
    if grid.node_count() != header.n_nodes {
        bail!(
            "snapshot shape error: grid has {} nodes, header claims {}",
            grid.node_count(),
            header.n_nodes
        );
    }
    let reg = RegEps::new(header.eps, header.gamma, &params).context("snapshot regularization")?;
    let config = SolverConfig {
        reg,
        t_end: header.t_end,
        dt_policy: header.dt_policy,
        scheme: header.scheme,
        observer_stride: header.observer_stride,
        absorption_enabled: header.absorption,
    };

    let mut cursor = 0usize;
    let mut next = || {
        let v = f64::from_le_bytes(numeric[cursor..cursor + 8].try_into().unwrap());
        cursor += 8;
        v
    };
    let mut snapshots = Vec::with_capacity(header.n_snapshots);
    for _ in 0..header.n_snapshots {
        let t = next();
        let values: Vec<f64> = (0..header.n_nodes).map(|_| next()).collect();
        let field = Field::new(grid, values).context("snapshot field shape")?;
        snapshots.push((t, field));
    }
    let mut ledger = Vec::with_capacity(header.n_ledger);
    for _ in 0..header.n_ledger {
        ledger.push(LedgerRow {
            t: next(),
            l1: next(),
            linf: next(),
            grad_max: next(),
            absorption_increment: next(),
            boundary_flux: next(),
        });
    }

    Ok(Trajectory::from_parts(
        params,
        config,
        grid,
        header.initial_amp,
        snapshots,
        ledger,
    ))
}
