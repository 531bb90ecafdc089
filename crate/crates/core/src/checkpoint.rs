//! Binary trajectory checkpoints.
//!
//! Layout (all little-endian):
//!
//! | field       | type      |
//! |-------------|-----------|
//! | magic       | `b"FSCK"` |
//! | version     | u32       |
//! | spec hash   | 16 ASCII hex bytes |
//! | alpha       | f64       |
//! | r           | f64       |
//! | N           | u64       |
//! | M1, M2      | u64, u64  |
//! | T           | f64       |
//!
//! followed by `N + 1` blocks of `(M1-1)(M2-1)` f64 interior values,
//! `U^0` first, nodes in [`SpatialGrid::index`] order.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{FracError, Result};
use crate::mesh::SpatialGrid;
use crate::problem::ProblemSpec;
use crate::solver::Solution;
use crate::spatial::{l2_norm, GridFunction2D};

const MAGIC: &[u8; 4] = b"FSCK";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckpointHeader {
    pub spec_hash: String,
    pub alpha: f64,
    pub grading: f64,
    pub n_steps: u64,
    pub m1: u64,
    pub m2: u64,
    pub t_final: f64,
}

impl CheckpointHeader {
    pub fn for_spec(spec: &ProblemSpec) -> Self {
        Self {
            spec_hash: spec.spec_hash(),
            alpha: spec.alpha,
            grading: spec.grading,
            n_steps: spec.n_steps as u64,
            m1: spec.m1 as u64,
            m2: spec.m2 as u64,
            t_final: spec.t_final,
        }
    }

    fn interior_len(&self) -> usize {
        (self.m1.saturating_sub(1) * self.m2.saturating_sub(1)) as usize
    }
}

#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub header: CheckpointHeader,
    /// `N + 1` blocks of interior values.
    pub blocks: Vec<Vec<f64>>,
}

impl Checkpoint {
    pub fn final_block(&self) -> &[f64] {
        self.blocks.last().map_or(&[], |b| b.as_slice())
    }
}

pub fn write_checkpoint<W: Write>(mut w: W, spec: &ProblemSpec, solution: &Solution) -> Result<()> {
    let header = CheckpointHeader::for_spec(spec);
    if solution.trajectory.len() != spec.n_steps + 1 {
        return Err(FracError::LengthMismatch {
            expected: spec.n_steps + 1,
            actual: solution.trajectory.len(),
        });
    }
    if header.spec_hash.len() != 16 || !header.spec_hash.is_ascii() {
        return Err(FracError::Checkpoint(format!("bad spec hash {:?}", header.spec_hash)));
    }
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(header.spec_hash.as_bytes())?;
    w.write_all(&header.alpha.to_le_bytes())?;
    w.write_all(&header.grading.to_le_bytes())?;
    w.write_all(&header.n_steps.to_le_bytes())?;
    w.write_all(&header.m1.to_le_bytes())?;
    w.write_all(&header.m2.to_le_bytes())?;
    w.write_all(&header.t_final.to_le_bytes())?;
    let mut buf = Vec::with_capacity(header.interior_len() * 8);
    for u in &solution.trajectory {
        buf.clear();
        for v in u.values() {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf)?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_checkpoint(path: &Path, spec: &ProblemSpec, solution: &Solution) -> Result<()> {
    write_checkpoint(BufWriter::new(File::create(path)?), spec, solution)
}

fn read_array<const K: usize, R: Read>(r: &mut R) -> Result<[u8; K]> {
    let mut b = [0u8; K];
    r.read_exact(&mut b)
        .map_err(|e| FracError::Checkpoint(format!("truncated header: {e}")))?;
    Ok(b)
}

pub fn read_checkpoint<R: Read>(mut r: R) -> Result<Checkpoint> {
    if &read_array::<4, _>(&mut r)? != MAGIC {
        return Err(FracError::Checkpoint("bad magic".into()));
    }
    let version = u32::from_le_bytes(read_array(&mut r)?);
    if version != VERSION {
        return Err(FracError::Checkpoint(format!("unsupported version {version}")));
    }
    let hash = read_array::<16, _>(&mut r)?;
    let spec_hash = String::from_utf8(hash.to_vec())
        .map_err(|_| FracError::Checkpoint("spec hash is not ASCII".into()))?;
    let f = |b: [u8; 8]| f64::from_le_bytes(b);
    let u = |b: [u8; 8]| u64::from_le_bytes(b);
    let header = CheckpointHeader {
        spec_hash,
        alpha: f(read_array(&mut r)?),
        grading: f(read_array(&mut r)?),
        n_steps: u(read_array(&mut r)?),
        m1: u(read_array(&mut r)?),
        m2: u(read_array(&mut r)?),
        t_final: f(read_array(&mut r)?),
    };
    let len = header.interior_len();
    let mut blocks = Vec::with_capacity(header.n_steps as usize + 1);
    let mut raw = vec![0u8; len * 8];
    for n in 0..=header.n_steps {
        r.read_exact(&mut raw)
            .map_err(|e| FracError::Checkpoint(format!("block {n}: {e}")))?;
        blocks.push(
            raw.chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect(),
        );
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(FracError::Checkpoint("trailing bytes after last block".into()));
    }
    Ok(Checkpoint { header, blocks })
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    read_checkpoint(BufReader::new(File::open(path)?))
}

/// `‖U^N − V^{2N}‖` from a coarse and a fine checkpoint of the same problem.
///
/// The header does not record the domain size, so the grid is passed in.
pub fn two_mesh_from_checkpoints(
    coarse: &Checkpoint,
    fine: &Checkpoint,
    grid: &SpatialGrid,
) -> Result<f64> {
    let (c, f) = (&coarse.header, &fine.header);
    let mismatch = |what: &str| Err(FracError::Checkpoint(format!("checkpoints differ in {what}")));
    if c.m1 != f.m1 || c.m2 != f.m2 {
        return mismatch("spatial grid");
    }
    if c.alpha != f.alpha || c.grading != f.grading || c.t_final != f.t_final {
        return mismatch("alpha, r or T");
    }
    if f.n_steps != 2 * c.n_steps {
        return mismatch("step count (fine must have 2N)");
    }
    if grid.m1 as u64 != c.m1 || grid.m2 as u64 != c.m2 {
        return mismatch("grid vs. supplied grid");
    }
    let diff: Vec<f64> = coarse
        .final_block()
        .iter()
        .zip(fine.final_block())
        .map(|(a, b)| a - b)
        .collect();
    Ok(l2_norm(grid, &diff))
}

/// Rebuild grid functions from a checkpoint on `grid`.
pub fn trajectory(ck: &Checkpoint, grid: SpatialGrid) -> Result<Vec<GridFunction2D>> {
    ck.blocks
        .iter()
        .map(|b| GridFunction2D::from_values(grid, b.clone()))
        .collect()
}
