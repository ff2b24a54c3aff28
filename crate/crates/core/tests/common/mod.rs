#![allow(dead_code)]

use fusso::solver::{BlockMatrix, GroupProblem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_vec(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect()
}

pub fn random_design(
    rng: &mut ChaCha8Rng,
    rows: usize,
    blocks: usize,
    width: usize,
) -> BlockMatrix {
    let data = gaussian_vec(rng, rows * blocks * width);
    BlockMatrix::from_vec(rows, blocks, width, data).unwrap()
}

/// Gaussian design with a response driven by the first block plus noise.
pub fn random_problem(seed: u64, rows: usize, blocks: usize, width: usize) -> GroupProblem {
    let mut r = rng(seed);
    let design = random_design(&mut r, rows, blocks, width);
    let noise = gaussian_vec(&mut r, rows);
    let y: Vec<f64> = (0..rows)
        .map(|i| {
            let signal: f64 = (0..width).map(|m| design.get(i, 0, m)).sum();
            signal + 0.5 * noise[i]
        })
        .collect();
    GroupProblem::new(design, y).unwrap()
}

pub fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt();
    let den: f64 = b.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
    num / den
}

/// Dense row-major copy of a block design: `a[i][j*w + m]`.
pub fn dense(d: &BlockMatrix) -> Vec<Vec<f64>> {
    let w = d.width();
    (0..d.rows())
        .map(|i| {
            let mut row = vec![0.0; d.blocks() * w];
            for j in 0..d.blocks() {
                for m in 0..w {
                    row[j * w + m] = d.get(i, j, m);
                }
            }
            row
        })
        .collect()
}

/// Dense reference implementation of the group-lasso objective, solved by
/// accelerated proximal gradient.
pub struct Oracle {
    a: Vec<Vec<f64>>,
    y: Vec<f64>,
    w: usize,
}

impl Oracle {
    pub fn new(d: &BlockMatrix, y: &[f64]) -> Self {
        Oracle {
            a: dense(d),
            y: y.to_vec(),
            w: d.width(),
        }
    }

    pub fn cols(&self) -> usize {
        self.a[0].len()
    }

    fn resid(&self, b: &[f64]) -> Vec<f64> {
        self.a
            .iter()
            .zip(&self.y)
            .map(|(row, yi)| row.iter().zip(b).map(|(x, c)| x * c).sum::<f64>() - yi)
            .collect()
    }

    pub fn grad(&self, b: &[f64]) -> Vec<f64> {
        let r = self.resid(b);
        let n = self.y.len() as f64;
        (0..self.cols())
            .map(|c| {
                self.a
                    .iter()
                    .zip(&r)
                    .map(|(row, ri)| row[c] * ri)
                    .sum::<f64>()
                    / n
            })
            .collect()
    }

    pub fn objective(&self, b: &[f64], lambda: f64) -> f64 {
        let r = self.resid(b);
        let loss = r.iter().map(|v| v * v).sum::<f64>() / (2.0 * self.y.len() as f64);
        let pen: f64 = b
            .chunks(self.w)
            .map(|blk| blk.iter().map(|v| v * v).sum::<f64>().sqrt())
            .sum();
        loss + lambda * pen
    }

    /// Largest eigenvalue of AᵀA/N by power iteration.
    pub fn lipschitz(&self) -> f64 {
        let n = self.y.len() as f64;
        let mut v = vec![1.0; self.cols()];
        let mut est = 0.0;
        for _ in 0..2000 {
            let av: Vec<f64> = self
                .a
                .iter()
                .map(|row| row.iter().zip(&v).map(|(x, c)| x * c).sum())
                .collect();
            let u: Vec<f64> = (0..self.cols())
                .map(|c| {
                    self.a
                        .iter()
                        .zip(&av)
                        .map(|(row, t)| row[c] * t)
                        .sum::<f64>()
                        / n
                })
                .collect();
            est = u.iter().map(|x| x * x).sum::<f64>().sqrt();
            v = u.iter().map(|x| x / est).collect();
        }
        est
    }

    /// Accelerated proximal gradient with a fixed 1/L step.
    pub fn fista(&self, lambda: f64, iters: usize) -> Vec<f64> {
        let step = 1.0 / (self.lipschitz() * 1.0001);
        let mut x = vec![0.0; self.cols()];
        let mut z = x.clone();
        let mut t = 1.0f64;
        for _ in 0..iters {
            let g = self.grad(&z);
            let mut next = vec![0.0; x.len()];
            for (j, blk) in next.chunks_mut(self.w).enumerate() {
                let v: Vec<f64> = (0..self.w)
                    .map(|m| z[j * self.w + m] - step * g[j * self.w + m])
                    .collect();
                let nv = v.iter().map(|q| q * q).sum::<f64>().sqrt();
                let shrink = if nv > step * lambda {
                    1.0 - step * lambda / nv
                } else {
                    0.0
                };
                for (o, q) in blk.iter_mut().zip(&v) {
                    *o = shrink * q;
                }
            }
            let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
            for k in 0..x.len() {
                z[k] = next[k] + (t - 1.0) / t_next * (next[k] - x[k]);
            }
            x = next;
            t = t_next;
        }
        x
    }
}
