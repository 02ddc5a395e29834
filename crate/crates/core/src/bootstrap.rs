//! Circular block bootstrap.
//!
//! Each resample is built from independent uniform block starts
//! `ξ ~ U{0, ..., n-1}`; a block covers `ξ, ξ+1, ..., ξ+p-1` with indices taken
//! modulo `n`, and the last block is truncated so every resample has exactly
//! `n` entries. All methods are resampled with the same index matrix.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::panel::LossPanel;
use crate::statsutil::RandomStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BootstrapPlan {
    /// Number of resamples `B`.
    pub replications: usize,
    pub block_len: usize,
    pub stream: RandomStream,
}

impl BootstrapPlan {
    pub fn new(replications: usize, block_len: usize, stream: RandomStream) -> Self {
        Self {
            replications,
            block_len,
            stream,
        }
    }
}

/// Default block length `⌈n^{1/3}⌉`.
pub fn default_block_len(n: usize) -> usize {
    let mut p = (n as f64).cbrt().ceil() as usize;
    // guard against cbrt rounding just above an integer cube
    while p > 1 && (p - 1).pow(3) >= n {
        p -= 1;
    }
    p.max(1)
}

/// Shrinks `block_len` to `max(1, ⌊n/2⌋)` when the sample holds fewer than two blocks.
/// Returns the length to use and a warning when clamping happened.
pub fn clamp_block_len(n: usize, block_len: usize) -> (usize, Option<String>) {
    if n < 2 * block_len {
        let clamped = (n / 2).max(1);
        if clamped != block_len {
            return (
                clamped,
                Some(format!(
                    "block length {block_len} clamped to {clamped} for a sample of {n} observations"
                )),
            );
        }
    }
    (block_len, None)
}

/// `B × n` matrix of resampled time positions, stored as block starts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BootstrapIndexMatrix {
    n: usize,
    block_len: usize,
    blocks_per_row: usize,
    starts: Vec<u32>,
}

impl BootstrapIndexMatrix {
    /// Builds the matrix from explicit block starts, one list per resample.
    pub fn from_starts(n: usize, block_len: usize, starts: &[Vec<usize>]) -> Result<Self> {
        check_dims(n, block_len)?;
        let blocks_per_row = n.div_ceil(block_len);
        let mut flat = Vec::with_capacity(starts.len() * blocks_per_row);
        for (b, row) in starts.iter().enumerate() {
            if row.len() != blocks_per_row {
                return Err(Error::Shape(format!(
                    "resample {b} has {} block starts, expected {blocks_per_row}",
                    row.len()
                )));
            }
            for &s in row {
                if s >= n {
                    return Err(Error::invalid(format!("block start {s} out of range (n = {n})")));
                }
                flat.push(s as u32);
            }
        }
        Ok(Self {
            n,
            block_len,
            blocks_per_row,
            starts: flat,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn block_len(&self) -> usize {
        self.block_len
    }

    /// Number of resamples `B`.
    pub fn replications(&self) -> usize {
        self.starts.len() / self.blocks_per_row
    }

    pub fn block_starts(&self, b: usize) -> &[u32] {
        &self.starts[b * self.blocks_per_row..(b + 1) * self.blocks_per_row]
    }

    /// Time position of resample `b` at slot `tau`.
    pub fn get(&self, b: usize, tau: usize) -> usize {
        let start = self.block_starts(b)[tau / self.block_len] as usize;
        (start + tau % self.block_len) % self.n
    }

    pub fn row(&self, b: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.n);
        self.for_each_index(b, |t| out.push(t));
        out
    }

    #[inline]
    fn for_each_index(&self, b: usize, mut f: impl FnMut(usize)) {
        let mut remaining = self.n;
        for &start in self.block_starts(b) {
            let len = self.block_len.min(remaining);
            let start = start as usize;
            for k in 0..len {
                let t = start + k;
                f(if t >= self.n { t - self.n } else { t });
            }
            remaining -= len;
        }
    }
}

fn check_dims(n: usize, block_len: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InsufficientData("cannot resample an empty sample".into()));
    }
    if block_len == 0 || block_len > n {
        return Err(Error::invalid(format!(
            "block length {block_len} must lie in 1..={n}"
        )));
    }
    Ok(())
}

/// Draws the index matrix for a sample of size `n`.
pub fn gen_block_indices(n: usize, plan: &BootstrapPlan) -> Result<BootstrapIndexMatrix> {
    check_dims(n, plan.block_len)?;
    if plan.replications == 0 {
        return Err(Error::invalid("bootstrap needs at least one replication"));
    }
    let blocks_per_row = n.div_ceil(plan.block_len);
    let mut rng = plan.stream.generator();
    let starts = (0..plan.replications * blocks_per_row)
        .map(|_| rng.random_range(0..n as u32))
        .collect();
    Ok(BootstrapIndexMatrix {
        n,
        block_len: plan.block_len,
        blocks_per_row,
        starts,
    })
}

/// Sample means `L̄_i` and centered bootstrap means `ξ*_{b,i} = L̄*_{b,i} - L̄_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapEnsemble {
    centered: Vec<f64>,
    sample_means: Vec<f64>,
    replications: usize,
    m: usize,
}

impl BootstrapEnsemble {
    pub fn replications(&self) -> usize {
        self.replications
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn sample_means(&self) -> &[f64] {
        &self.sample_means
    }

    /// `ξ*_{b,·}` for resample `b`, one entry per method.
    pub fn centered_row(&self, b: usize) -> &[f64] {
        &self.centered[b * self.m..(b + 1) * self.m]
    }

    pub fn centered(&self, b: usize, i: usize) -> f64 {
        self.centered[b * self.m + i]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.centered.chunks_exact(self.m)
    }
}

pub fn bootstrap_means(panel: &LossPanel, idx: &BootstrapIndexMatrix) -> Result<BootstrapEnsemble> {
    if idx.n() != panel.n() {
        return Err(Error::LengthMismatch {
            expected: panel.n(),
            actual: idx.n(),
        });
    }
    let m = panel.m();
    let n = panel.n() as f64;
    let sample_means = panel.column_means();
    let centered: Vec<f64> = (0..idx.replications())
        .into_par_iter()
        .flat_map_iter(|b| {
            let mut sums = vec![0.0; m];
            idx.for_each_index(b, |t| {
                for (s, x) in sums.iter_mut().zip(panel.row(t)) {
                    *s += x;
                }
            });
            sums.into_iter()
                .zip(&sample_means)
                .map(move |(s, mu)| s / n - mu)
        })
        .collect();
    Ok(BootstrapEnsemble {
        centered,
        sample_means,
        replications: idx.replications(),
        m,
    })
}

/// `(1/B) Σ_b (w'ξ*_b)²` for a method contrast `w`.
pub fn bootstrap_variance(ensemble: &BootstrapEnsemble, contrast: &[f64]) -> Result<f64> {
    if contrast.len() != ensemble.m() {
        return Err(Error::LengthMismatch {
            expected: ensemble.m(),
            actual: contrast.len(),
        });
    }
    let ss: f64 = ensemble
        .rows()
        .map(|row| {
            let v: f64 = row.iter().zip(contrast).map(|(x, w)| x * w).sum();
            v * v
        })
        .sum();
    Ok(ss / ensemble.replications() as f64)
}

/// Contrast `e_i - (1/m)𝟙` selecting the relative loss `d_{i·}`.
pub fn relative_contrast(m: usize, i: usize) -> Vec<f64> {
    let mut w = vec![-1.0 / m as f64; m];
    w[i] += 1.0;
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plan(b: usize, p: usize, seed: u64) -> BootstrapPlan {
        BootstrapPlan::new(b, p, RandomStream::new(seed, 0))
    }

    #[test]
    fn full_length_block_is_rotation() {
        let idx = gen_block_indices(5, &plan(20, 5, 1)).unwrap();
        for b in 0..20 {
            let row = idx.row(b);
            let s = row[0];
            assert_eq!(row, (0..5).map(|k| (s + k) % 5).collect::<Vec<_>>());
        }
    }

    #[test]
    fn wrap_around_and_truncation() {
        // 1-based starts (4, 2) are 0-based (3, 1)
        let idx = BootstrapIndexMatrix::from_starts(5, 3, &[vec![3, 1]]).unwrap();
        assert_eq!(idx.row(0), vec![3, 4, 0, 1, 2]);
        assert_eq!(idx.get(0, 2), 0);
    }

    #[test]
    fn single_observation() {
        let idx = gen_block_indices(1, &plan(4, 1, 3)).unwrap();
        assert!((0..4).all(|b| idx.row(b) == vec![0]));
    }

    #[test]
    fn bad_dimensions() {
        assert!(gen_block_indices(0, &plan(4, 1, 3)).is_err());
        assert!(gen_block_indices(3, &plan(4, 4, 3)).is_err());
        assert!(gen_block_indices(3, &plan(4, 0, 3)).is_err());
        assert!(gen_block_indices(3, &plan(0, 1, 3)).is_err());
    }

    #[test]
    fn rotation_preserves_means() {
        let data: Vec<f64> = (0..14).map(|x| (x as f64 * 0.37).sin()).collect();
        let panel = LossPanel::from_row_major(data, LossPanel::default_ids(2)).unwrap();
        let idx = gen_block_indices(7, &plan(50, 7, 11)).unwrap();
        let ens = bootstrap_means(&panel, &idx).unwrap();
        assert!(ens.rows().flatten().all(|x| x.abs() < 1e-14));
    }

    #[test]
    fn constant_column_has_zero_centered_means() {
        let cols = vec![vec![2.5; 30], (0..30).map(|x| x as f64).collect()];
        let panel = LossPanel::from_columns(&cols, LossPanel::default_ids(2)).unwrap();
        let idx = gen_block_indices(30, &plan(100, 3, 5)).unwrap();
        let ens = bootstrap_means(&panel, &idx).unwrap();
        assert!((0..100).all(|b| ens.centered(b, 0).abs() < 1e-14));
        assert!((0..100).any(|b| ens.centered(b, 1).abs() > 1e-6));
    }

    #[test]
    fn index_out_of_bounds_is_rejected() {
        let panel = LossPanel::from_row_major(vec![0.0; 8], LossPanel::default_ids(2)).unwrap();
        let idx = gen_block_indices(5, &plan(3, 1, 5)).unwrap();
        assert!(bootstrap_means(&panel, &idx).is_err());
        assert!(BootstrapIndexMatrix::from_starts(5, 3, &[vec![5, 1]]).is_err());
    }

    #[test]
    fn variance_direct_formula() {
        let ens = BootstrapEnsemble {
            centered: vec![0.3, 0.0, -0.3, 0.0],
            sample_means: vec![0.0, 0.0],
            replications: 2,
            m: 2,
        };
        assert!((bootstrap_variance(&ens, &[1.0, 0.0]).unwrap() - 0.09).abs() < 1e-15);
        let zero = BootstrapEnsemble {
            centered: vec![0.0; 6],
            sample_means: vec![0.0; 3],
            replications: 2,
            m: 3,
        };
        assert_eq!(bootstrap_variance(&zero, &relative_contrast(3, 1)).unwrap(), 0.0);
        assert!(bootstrap_variance(&zero, &[1.0]).is_err());
    }

    #[test]
    fn block_len_defaults_and_clamping() {
        assert_eq!(default_block_len(1), 1);
        assert_eq!(default_block_len(8), 2);
        assert_eq!(default_block_len(9), 3);
        assert_eq!(default_block_len(27), 3);
        assert_eq!(default_block_len(125), 5);
        assert_eq!(default_block_len(500), 8);
        assert_eq!(clamp_block_len(100, 5), (5, None));
        let (p, warn) = clamp_block_len(7, 5);
        assert_eq!(p, 3);
        assert!(warn.is_some());
        assert_eq!(clamp_block_len(1, 1), (1, None));
    }
}
