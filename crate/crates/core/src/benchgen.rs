//! Random benchmark instances in two classes.
//!
//! Type 1 draws every stage's processor count from `1..=5`; type 2 fixes it
//! at 5. Processing times come from `1..=100` and processor requirements
//! from `1..=m_i`, all uniform.
//!
//! Every instance gets its own ChaCha8 stream: the generator is seeded with
//! the user seed, and the stream number packs `(type, n, m, index)` as
//! `type << 56 | n << 32 | m << 16 | index`. ChaCha8 output is specified
//! independently of platform, so a seed always reproduces the same files.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::write_instance;
use crate::model::{Instance, Meta};

pub const JOB_COUNTS: [usize; 5] = [5, 10, 20, 50, 100];
pub const STAGE_COUNTS: [usize; 3] = [2, 5, 8];
pub const MAX_TIME: u64 = 100;
pub const MAX_PROCS: u32 = 5;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenSpec {
    pub n: usize,
    pub m: usize,
    /// 1 or 2.
    pub kind: u8,
    pub count: usize,
    pub seed: u64,
    /// Allow any positive `n` and `m`, e.g. for small test instances.
    pub free: bool,
}

impl GenSpec {
    pub fn new(n: usize, m: usize, kind: u8, seed: u64) -> Self {
        GenSpec {
            n,
            m,
            kind,
            count: 10,
            seed,
            free: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind != 1 && self.kind != 2 {
            return Err(Error::Config(format!(
                "instance type must be 1 or 2, got {}",
                self.kind
            )));
        }
        if self.free {
            if self.n == 0 || self.m == 0 || self.n >= 1 << 24 || self.m >= 1 << 16 {
                return Err(Error::Config(format!(
                    "unsupported size n={} m={}",
                    self.n, self.m
                )));
            }
        } else if !JOB_COUNTS.contains(&self.n) || !STAGE_COUNTS.contains(&self.m) {
            return Err(Error::Config(format!(
                "n={} m={} is outside the benchmark grid (n in {JOB_COUNTS:?}, m in {STAGE_COUNTS:?}); use free mode",
                self.n, self.m
            )));
        }
        if self.count > usize::from(u16::MAX) {
            return Err(Error::Config(format!(
                "at most {} instances per cell",
                u16::MAX
            )));
        }
        Ok(())
    }
}

pub fn instance_name(kind: u8, n: usize, m: usize, index: usize) -> String {
    format!("t{kind}_n{n}_m{m}_{index}")
}

fn stream_id(kind: u8, n: usize, m: usize, index: usize) -> u64 {
    u64::from(kind) << 56 | (n as u64) << 32 | (m as u64) << 16 | index as u64
}

/// Generates `spec.count` instances of one cell.
pub fn generate(spec: &GenSpec) -> Result<Vec<Instance>> {
    spec.validate()?;
    Ok((0..spec.count)
        .map(|index| generate_one(spec, index))
        .collect())
}

fn generate_one(spec: &GenSpec, index: usize) -> Instance {
    let (n, m) = (spec.n, spec.m);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(stream_id(spec.kind, n, m, index));

    let procs: Vec<u32> = (0..m)
        .map(|_| {
            if spec.kind == 1 {
                rng.gen_range(1..=MAX_PROCS)
            } else {
                MAX_PROCS
            }
        })
        .collect();
    let mut p = Vec::with_capacity(n);
    let mut size = Vec::with_capacity(n);
    for _ in 0..n {
        let mut pj = Vec::with_capacity(m);
        let mut sj = Vec::with_capacity(m);
        for &cap in &procs {
            pj.push(rng.gen_range(1..=MAX_TIME));
            sj.push(rng.gen_range(1..=cap));
        }
        p.push(pj);
        size.push(sj);
    }
    let meta = Meta {
        name: Some(instance_name(spec.kind, n, m, index)),
        kind: Some(spec.kind),
        seed: Some(spec.seed),
        cell: Some(index),
    };
    Instance::new(procs, p, size)
        .expect("draw ranges satisfy every instance invariant")
        .with_meta(meta)
}

/// Every `(type, n, m)` cell of the benchmark grid.
pub fn generate_grid(count: usize, seed: u64) -> Result<Vec<Instance>> {
    let mut out = Vec::new();
    for kind in [1, 2] {
        for n in JOB_COUNTS {
            for m in STAGE_COUNTS {
                out.extend(generate(&GenSpec {
                    count,
                    ..GenSpec::new(n, m, kind, seed)
                })?);
            }
        }
    }
    Ok(out)
}

/// Writes each instance to `dir/<name>.hfs`, creating `dir` if needed.
pub fn write_all(instances: &[Instance], dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    instances
        .iter()
        .enumerate()
        .map(|(k, inst)| {
            let name = inst
                .meta()
                .name
                .clone()
                .unwrap_or_else(|| format!("instance_{k}"));
            let path = dir.join(format!("{name}.hfs"));
            std::fs::write(&path, write_instance(inst))?;
            Ok(path)
        })
        .collect()
}
