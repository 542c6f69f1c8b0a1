//! Reproducible Monte Carlo sampling.
//!
//! Every variate is addressed by `(seed, stream_id, sample index, dimension)`:
//! a ChaCha8 keystream keyed by the seed, with the stream id as nonce, is
//! positioned at word `2 * dims * index`. Sample `j` is therefore the same no
//! matter how a run is split into batches or across how many workers.

use std::fs;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::dists::{sn_sample, SkewNormalParams};
use crate::error::{Error, Result};
use crate::slnmodel::SlnSpec;
use crate::specfun::norm_quantile;

/// Samples per work unit. Only affects scheduling, never the values.
const CHUNK: usize = 8192;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngSpec {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngSpec {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }
}

/// How batch loops are scheduled. Results are bit-identical across variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    /// Rayon work stealing; `workers == 0` uses the global pool.
    #[cfg(feature = "parallel")]
    Parallel { workers: usize },
}

impl Default for Exec {
    fn default() -> Self {
        #[cfg(feature = "parallel")]
        {
            Exec::Parallel { workers: 0 }
        }
        #[cfg(not(feature = "parallel"))]
        {
            Exec::Sequential
        }
    }
}

impl Exec {
    /// Calls `f(start, chunk)` over consecutive chunks covering `out`.
    pub(crate) fn fill<F>(&self, out: &mut [f64], f: F)
    where
        F: Fn(usize, &mut [f64]) + Sync + Send,
    {
        match *self {
            Exec::Sequential => {
                for (c, chunk) in out.chunks_mut(CHUNK).enumerate() {
                    f(c * CHUNK, chunk);
                }
            }
            #[cfg(feature = "parallel")]
            Exec::Parallel { workers } => {
                use rayon::prelude::*;
                let run = || {
                    out.par_chunks_mut(CHUNK)
                        .enumerate()
                        .for_each(|(c, chunk)| f(c * CHUNK, chunk))
                };
                in_pool(workers, run);
            }
        }
    }

    /// `max_{0 <= i < n} f(i)`, or `-inf` when `n == 0`. NaNs are ignored.
    pub(crate) fn max_over<F>(&self, n: usize, f: F) -> f64
    where
        F: Fn(usize) -> f64 + Sync + Send,
    {
        let fold = |acc: f64, i: usize| {
            let v = f(i);
            if v > acc {
                v
            } else {
                acc
            }
        };
        match *self {
            Exec::Sequential => (0..n).fold(f64::NEG_INFINITY, fold),
            #[cfg(feature = "parallel")]
            Exec::Parallel { workers } => {
                use rayon::prelude::*;
                in_pool(workers, || {
                    (0..n)
                        .into_par_iter()
                        .fold(|| f64::NEG_INFINITY, fold)
                        .reduce(|| f64::NEG_INFINITY, f64::max)
                })
            }
        }
    }
}

#[cfg(feature = "parallel")]
fn in_pool<R: Send>(workers: usize, op: impl FnOnce() -> R + Send) -> R {
    if workers == 0 {
        return op();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(op),
        Err(_) => op(),
    }
}

/// Standard normal variates of one stream, starting at a given sample.
pub struct NormalStream {
    rng: ChaCha8Rng,
}

impl NormalStream {
    /// Positions the stream at dimension 0 of sample `index`, for samples
    /// that each consume `dims` variates.
    pub fn at(rng: RngSpec, dims: usize, index: usize) -> Self {
        let mut r = ChaCha8Rng::seed_from_u64(rng.seed);
        r.set_stream(rng.stream_id);
        r.set_word_pos(2 * dims as u128 * index as u128);
        Self { rng: r }
    }

    /// Uniform on the open interval (0, 1) with 53 random bits.
    #[inline]
    pub fn next_uniform(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    #[inline]
    pub fn next_normal(&mut self) -> f64 {
        norm_quantile(self.next_uniform()).expect("uniform lies strictly inside (0, 1)")
    }
}

fn check_count(count: usize) -> Result<()> {
    if count == 0 {
        return Err(Error::InvalidParameter("sample count must be at least 1".into()));
    }
    Ok(())
}

/// `count` independent standard normal variates.
pub fn standard_normals(rng: RngSpec, count: usize, exec: Exec) -> Result<Vec<f64>> {
    check_count(count)?;
    let mut out = vec![0.0; count];
    exec.fill(&mut out, |start, chunk| {
        let mut g = NormalStream::at(rng, 1, start);
        for v in chunk {
            *v = g.next_normal();
        }
    });
    Ok(out)
}

/// Draws of `sum_i exp(mu_i + sigma_i z_i)`, in sample-index order.
pub fn sample_sln(s: &SlnSpec, rng: RngSpec, count: usize, exec: Exec) -> Result<Vec<f64>> {
    sample_sln_from(s, rng, 0, count, exec)
}

/// Samples `first, first + 1, ..., first + count - 1` of the stream that
/// [`sample_sln`] starts at index 0. Runs over adjacent ranges concatenate to
/// one longer run.
pub fn sample_sln_from(s: &SlnSpec, rng: RngSpec, first: usize, count: usize, exec: Exec) -> Result<Vec<f64>> {
    check_count(count)?;
    let comps = s.components();
    let mut out = vec![0.0; count];
    exec.fill(&mut out, |start, chunk| {
        let mut g = NormalStream::at(rng, comps.len(), first + start);
        for v in chunk {
            *v = comps.iter().map(|c| (c.mu() + c.sigma() * g.next_normal()).exp()).sum();
        }
    });
    Ok(out)
}

/// Skew-normal draws, two normals per sample.
pub fn sample_sn(p: SkewNormalParams, rng: RngSpec, count: usize, exec: Exec) -> Result<Vec<f64>> {
    check_count(count)?;
    let mut out = vec![0.0; count];
    exec.fill(&mut out, |start, chunk| {
        let mut g = NormalStream::at(rng, 2, start);
        for v in chunk {
            let u0 = g.next_normal();
            let u1 = g.next_normal();
            *v = sn_sample(p, u0, u1);
        }
    });
    Ok(out)
}

/// Log-skew-normal draws: `exp` of [`sample_sn`] with the same addressing.
pub fn sample_lskn(p: SkewNormalParams, rng: RngSpec, count: usize, exec: Exec) -> Result<Vec<f64>> {
    let mut v = sample_sn(p, rng, count, exec)?;
    for x in &mut v {
        *x = x.exp();
    }
    Ok(v)
}

/// Writes an 8-byte little-endian count followed by little-endian f64 values.
pub fn write_dump(path: impl AsRef<Path>, samples: &[f64]) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    w.write_all(&(samples.len() as u64).to_le_bytes())?;
    for x in samples {
        w.write_all(&x.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_dump(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.len() < 8 {
        return Err(Error::Parse("sample dump shorter than its header".into()));
    }
    let n = u64::from_le_bytes(bytes[..8].try_into().expect("8 bytes")) as usize;
    let body = &bytes[8..];
    if body.len() != n.saturating_mul(8) {
        return Err(Error::Parse(format!("sample dump declares {n} values but holds {} bytes", body.len())));
    }
    Ok(body.chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes"))).collect())
}
