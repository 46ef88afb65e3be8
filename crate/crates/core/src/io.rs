//! Content hashing, the on-disk solution cache, and CSV field dumps.
//!
//! Cache file layout: one JSON header line, then the `(N+1)²` values of `u`
//! as little-endian `f64`. The header carries the SHA-256 of those bytes.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::IoError;
use crate::saddle_solver::{compute_derivatives, Field, Grid, SaddleSolution};
use crate::scalar_forms::DimensionParams;

pub const CACHE_FORMAT_VERSION: u32 = 1;
pub const CACHE_DIR_ENV: &str = "SADDLECHECK_CACHE_DIR";

fn hex(d: impl AsRef<[u8]>) -> String {
    d.as_ref().iter().map(|b| format!("{b:02x}")).collect()
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex(Sha256::digest(bytes))
}

/// Hash of the dimension, grid and the bits of `u`.
pub fn solution_hash(sol: &SaddleSolution) -> String {
    let mut h = Sha256::new();
    h.update((sol.params.m as u64).to_le_bytes());
    h.update(sol.grid.r.to_le_bytes());
    h.update(sol.grid.h.to_le_bytes());
    for v in &sol.u.data {
        h.update(v.to_le_bytes());
    }
    hex(h.finalize())
}

/// Hash of the compact JSON form.
pub fn json_hash<T: Serialize>(value: &T) -> String {
    sha256_hex(&serde_json::to_vec(value).expect("serializable"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheHeader {
    pub format: u32,
    pub m: usize,
    pub r: f64,
    pub h: f64,
    pub newton_tol: f64,
    pub residual_norm: f64,
    pub newton_iterations: usize,
    pub side: usize,
    pub sha256: String,
}

/// `u_m{m}_R{R}_h{h}.sol` under `dir`.
pub fn cache_path(dir: &Path, m: usize, r: f64, h: f64) -> PathBuf {
    dir.join(format!("u_m{m}_R{r}_h{h}.sol"))
}

/// Cache directory: the explicit one, else `$SADDLECHECK_CACHE_DIR`.
pub fn cache_dir(explicit: Option<&Path>) -> Option<PathBuf> {
    explicit.map(Path::to_path_buf).or_else(|| std::env::var_os(CACHE_DIR_ENV).map(PathBuf::from))
}

pub fn write_solution(path: &Path, sol: &SaddleSolution, newton_tol: f64) -> Result<(), IoError> {
    let mut body = Vec::with_capacity(sol.u.data.len() * 8);
    for v in &sol.u.data {
        body.extend_from_slice(&v.to_le_bytes());
    }
    let header = CacheHeader {
        format: CACHE_FORMAT_VERSION,
        m: sol.params.m,
        r: sol.grid.r,
        h: sol.grid.h,
        newton_tol,
        residual_norm: sol.residual_norm,
        newton_iterations: sol.newton_iterations,
        side: sol.u.side,
        sha256: sha256_hex(&body),
    };
    let mut out = serde_json::to_vec(&header)?;
    out.push(b'\n');
    out.extend_from_slice(&body);
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    // write then rename, so a reader never sees a partial file
    let tmp = path.with_extension("sol.tmp");
    fs::write(&tmp, out)?;
    fs::rename(tmp, path)?;
    Ok(())
}

/// Reads a cached solution for `(m, R, h, tol)` and recomputes its derivatives.
pub fn read_solution(path: &Path, m: usize, r: f64, h: f64, newton_tol: f64) -> Result<SaddleSolution, IoError> {
    let bytes = fs::read(path)?;
    let nl = bytes.iter().position(|&b| b == b'\n').ok_or_else(|| IoError::Malformed("no header line".into()))?;
    let header: CacheHeader = serde_json::from_slice(&bytes[..nl])?;
    let want = (CACHE_FORMAT_VERSION, m, r.to_bits(), h.to_bits(), newton_tol.to_bits());
    let got = (header.format, header.m, header.r.to_bits(), header.h.to_bits(), header.newton_tol.to_bits());
    if want != got {
        return Err(IoError::HeaderMismatch(format!(
            "file has format {} m={} R={} h={} tol={:e}",
            header.format, header.m, header.r, header.h, header.newton_tol
        )));
    }
    let body = &bytes[nl + 1..];
    if body.len() != header.side * header.side * 8 {
        return Err(IoError::Malformed(format!("expected {} values", header.side * header.side)));
    }
    if sha256_hex(body) != header.sha256 {
        return Err(IoError::HashMismatch);
    }
    let grid = Grid::new(r, h).map_err(|e| IoError::Malformed(e.to_string()))?;
    if grid.side() != header.side {
        return Err(IoError::Malformed("side does not match the grid".into()));
    }
    let data = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    let params = DimensionParams::new(m).map_err(|e| IoError::Malformed(e.to_string()))?;
    let mut sol = compute_derivatives(SaddleSolution::from_field(
        params,
        grid,
        Field { side: header.side, data },
        header.residual_norm,
    ));
    sol.newton_iterations = header.newton_iterations;
    Ok(sol)
}

/// Fields as `i,j,s,t,<names...>` rows, `i` outer. Values use the shortest
/// representation that parses back to the same bits.
pub fn fields_to_csv(grid: &Grid, fields: &[(&str, &Field)]) -> Result<String, IoError> {
    if fields.is_empty() {
        return Err(IoError::EmptyStage("no fields to write".into()));
    }
    let mut out = String::from("i,j,s,t");
    for (name, _) in fields {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for i in 0..grid.side() {
        for j in 0..grid.side() {
            out.push_str(&format!("{i},{j},{},{}", grid.coord(i), grid.coord(j)));
            for (_, f) in fields {
                out.push_str(&format!(",{:?}", f.get(i, j)));
            }
            out.push('\n');
        }
    }
    Ok(out)
}

/// Inverse of [`fields_to_csv`].
pub fn fields_from_csv(text: &str) -> Result<Vec<(String, Field)>, IoError> {
    let mut lines = text.lines();
    let head: Vec<&str> = lines.next().ok_or_else(|| IoError::Malformed("empty file".into()))?.split(',').collect();
    if head.len() < 5 || head[..4] != ["i", "j", "s", "t"] {
        return Err(IoError::Malformed("header must start with i,j,s,t and name a field".into()));
    }
    let rows: Vec<Vec<&str>> = lines.filter(|l| !l.is_empty()).map(|l| l.split(',').collect()).collect();
    let side = (rows.len() as f64).sqrt().round() as usize;
    if side * side != rows.len() {
        return Err(IoError::Malformed(format!("{} rows is not a square grid", rows.len())));
    }
    let mut fields: Vec<(String, Field)> = head[4..].iter().map(|n| (n.to_string(), Field::zeros(side))).collect();
    for (k, row) in rows.iter().enumerate() {
        if row.len() != head.len() {
            return Err(IoError::Malformed(format!("row {} has {} columns", k + 2, row.len())));
        }
        let parse = |x: &str| x.parse::<f64>().map_err(|_| IoError::Malformed(format!("bad number {x:?}")));
        let i: usize = row[0].parse().map_err(|_| IoError::Malformed("bad index".into()))?;
        let j: usize = row[1].parse().map_err(|_| IoError::Malformed("bad index".into()))?;
        if i >= side || j >= side {
            return Err(IoError::Malformed(format!("index ({i}, {j}) out of range")));
        }
        for (f, x) in fields.iter_mut().zip(&row[4..]) {
            f.1.set(i, j, parse(x)?);
        }
    }
    Ok(fields)
}
