//! Group lasso by cyclic block coordinate descent.
//!
//! Minimizes
//!
//! ```text
//! (1/2N) ‖Y − Σ_j A_j β_j‖² + λ Σ_j ‖β_j‖₂
//! ```
//!
//! over `p` coefficient blocks of width `M`. Each block visit solves its
//! subproblem exactly: with the block Gram matrix `G_j = (1/N) A_jᵀA_j`
//! diagonalized once per problem, the minimizer is zero when the block
//! correlation is inside the λ-ball and otherwise is found from a scalar
//! equation in `‖β_j‖`. Blocks that are set to zero are exact zeros, so the
//! support needs no thresholding.

use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{FussoError, Result};

/// Dense `rows × (blocks · width)` matrix stored block by block, column by
/// column: entry `(i, j, m)` lives at `data[(j * width + m) * rows + i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockMatrix {
    rows: usize,
    blocks: usize,
    width: usize,
    data: Vec<f64>,
}

impl BlockMatrix {
    pub fn zeros(rows: usize, blocks: usize, width: usize) -> Self {
        BlockMatrix {
            rows,
            blocks,
            width,
            data: vec![0.0; rows * blocks * width],
        }
    }

    pub fn from_vec(rows: usize, blocks: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * blocks * width {
            return Err(FussoError::DimensionMismatch(format!(
                "block matrix {rows}x{blocks}x{width} needs {} entries, got {}",
                rows * blocks * width,
                data.len()
            )));
        }
        Ok(BlockMatrix {
            rows,
            blocks,
            width,
            data,
        })
    }

    /// Builds from a function of `(row, block, column)`.
    pub fn from_fn(
        rows: usize,
        blocks: usize,
        width: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Self {
        let mut data = Vec::with_capacity(rows * blocks * width);
        for j in 0..blocks {
            for m in 0..width {
                for i in 0..rows {
                    data.push(f(i, j, m));
                }
            }
        }
        BlockMatrix {
            rows,
            blocks,
            width,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn blocks(&self) -> usize {
        self.blocks
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Block-major storage: block `j` is the `j`-th chunk of `rows · width`.
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, m: usize) -> f64 {
        self.data[(j * self.width + m) * self.rows + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, m: usize, v: f64) {
        self.data[(j * self.width + m) * self.rows + i] = v;
    }

    #[inline]
    pub fn column(&self, j: usize, m: usize) -> &[f64] {
        let start = (j * self.width + m) * self.rows;
        &self.data[start..start + self.rows]
    }

    /// All `width · rows` entries of block `j`, column-major.
    pub fn block_slice(&self, j: usize) -> &[f64] {
        let len = self.width * self.rows;
        &self.data[j * len..(j + 1) * len]
    }

    pub fn block_slice_mut(&mut self, j: usize) -> &mut [f64] {
        let len = self.width * self.rows;
        &mut self.data[j * len..(j + 1) * len]
    }

    /// Row `i` of block `j` (the `width` coefficients of one cell).
    pub fn cell(&self, i: usize, j: usize) -> Vec<f64> {
        (0..self.width).map(|m| self.get(i, j, m)).collect()
    }

    pub fn select_rows(&self, rows: &[usize]) -> BlockMatrix {
        let mut data = Vec::with_capacity(rows.len() * self.blocks * self.width);
        for col in self.data.chunks_exact(self.rows.max(1)) {
            data.extend(rows.iter().map(|&i| col[i]));
        }
        BlockMatrix {
            rows: rows.len(),
            blocks: self.blocks,
            width: self.width,
            data,
        }
    }

    pub fn select_blocks(&self, blocks: &[usize]) -> BlockMatrix {
        let mut data = Vec::with_capacity(self.rows * blocks.len() * self.width);
        for &j in blocks {
            data.extend_from_slice(self.block_slice(j));
        }
        BlockMatrix {
            rows: self.rows,
            blocks: blocks.len(),
            width: self.width,
            data,
        }
    }

    /// Keeps the first `width` columns of every block.
    pub fn truncated(&self, width: usize) -> BlockMatrix {
        assert!(width <= self.width);
        let mut data = Vec::with_capacity(self.rows * self.blocks * width);
        for j in 0..self.blocks {
            data.extend_from_slice(&self.block_slice(j)[..width * self.rows]);
        }
        BlockMatrix {
            rows: self.rows,
            blocks: self.blocks,
            width,
            data,
        }
    }

    /// Applies `f` to every column in place (`f(block, column, values)`).
    pub fn map_columns(&mut self, mut f: impl FnMut(usize, usize, &mut [f64])) {
        let (rows, width) = (self.rows, self.width);
        for (c, col) in self.data.chunks_exact_mut(rows.max(1)).enumerate() {
            f(c / width, c % width, col);
        }
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for (x, y) in ra.iter().zip(rb) {
        s += x * y;
    }
    s
}

#[inline]
fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Eigendecomposition of one block Gram matrix.
#[derive(Debug, Clone)]
struct BlockSpectrum {
    /// `width × width`, row-major.
    gram: Vec<f64>,
    /// Eigenvalues; entries at or below the rank cutoff are stored as 0.
    values: Vec<f64>,
    /// Eigenvectors, vector `k` at `vectors[k * width..(k + 1) * width]`.
    vectors: Vec<f64>,
    zero: bool,
}

impl BlockSpectrum {
    fn compute(design: &BlockMatrix, j: usize, width: usize) -> Self {
        let n = design.rows() as f64;
        let mut gram = vec![0.0; width * width];
        for a in 0..width {
            for b in a..width {
                let v = dot(design.column(j, a), design.column(j, b)) / n;
                gram[a * width + b] = v;
                gram[b * width + a] = v;
            }
        }
        if gram.iter().all(|&v| v == 0.0) {
            return BlockSpectrum {
                gram,
                values: vec![0.0; width],
                vectors: vec![0.0; width * width],
                zero: true,
            };
        }
        let eig = SymmetricEigen::new(DMatrix::from_row_slice(width, width, &gram));
        let top = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
        let cutoff = top * 1e-12 * width as f64;
        let values = eig
            .eigenvalues
            .iter()
            .map(|&v| if v > cutoff { v } else { 0.0 })
            .collect();
        let mut vectors = Vec::with_capacity(width * width);
        for k in 0..width {
            vectors.extend(eig.eigenvectors.column(k).iter());
        }
        BlockSpectrum {
            gram,
            values,
            vectors,
            zero: false,
        }
    }

    fn largest(&self) -> f64 {
        self.values.iter().cloned().fold(0.0, f64::max)
    }
}

/// A group lasso instance: block design plus response.
///
/// The design is shared behind an [`Arc`] so several problems (different
/// truncations or responses) can view the same storage. Only the first
/// `width` columns of each stored block are used.
#[derive(Debug, Clone)]
pub struct GroupProblem {
    design: Arc<BlockMatrix>,
    width: usize,
    response: Vec<f64>,
    spectra: Vec<BlockSpectrum>,
}

impl GroupProblem {
    pub fn new(design: BlockMatrix, response: Vec<f64>) -> Result<Self> {
        let width = design.width();
        GroupProblem::with_width(Arc::new(design), width, response)
    }

    /// Problem on the first `width` columns of each block of `design`.
    pub fn with_width(design: Arc<BlockMatrix>, width: usize, response: Vec<f64>) -> Result<Self> {
        if width == 0 || width > design.width() {
            return Err(FussoError::DimensionMismatch(format!(
                "block width {width} not in 1..={}",
                design.width()
            )));
        }
        if design.blocks() == 0 || design.rows() == 0 {
            return Err(FussoError::DimensionMismatch(
                "design needs at least one row and one block".into(),
            ));
        }
        if response.len() != design.rows() {
            return Err(FussoError::DimensionMismatch(format!(
                "response has {} entries, design has {} rows",
                response.len(),
                design.rows()
            )));
        }
        if let Some(i) = response.iter().position(|v| !v.is_finite()) {
            return Err(FussoError::NonFinite(format!("response entry {i}")));
        }
        for j in 0..design.blocks() {
            let used = &design.block_slice(j)[..width * design.rows()];
            if used.iter().any(|v| !v.is_finite()) {
                return Err(FussoError::NonFinite(format!("design block {j}")));
            }
        }
        let spectra = (0..design.blocks())
            .map(|j| BlockSpectrum::compute(&design, j, width))
            .collect();
        Ok(GroupProblem {
            design,
            width,
            response,
            spectra,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.design.rows()
    }

    pub fn n_blocks(&self) -> usize {
        self.design.blocks()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn n_coefs(&self) -> usize {
        self.n_blocks() * self.width
    }

    pub fn response(&self) -> &[f64] {
        &self.response
    }

    pub fn design(&self) -> &Arc<BlockMatrix> {
        &self.design
    }

    #[inline]
    pub fn column(&self, j: usize, m: usize) -> &[f64] {
        self.design.column(j, m)
    }

    /// Largest eigenvalue of `(1/N) A_jᵀ A_j`.
    pub fn block_lipschitz(&self, j: usize) -> f64 {
        self.spectra[j].largest()
    }

    /// `A β`.
    pub fn fitted(&self, beta: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_rows()];
        for j in 0..self.n_blocks() {
            for m in 0..self.width {
                let b = beta[j * self.width + m];
                if b != 0.0 {
                    axpy(b, self.column(j, m), &mut out);
                }
            }
        }
        out
    }

    /// `Y − A β`.
    pub fn residual(&self, beta: &[f64]) -> Vec<f64> {
        let mut r = self.response.clone();
        for j in 0..self.n_blocks() {
            for m in 0..self.width {
                let b = beta[j * self.width + m];
                if b != 0.0 {
                    axpy(-b, self.column(j, m), &mut r);
                }
            }
        }
        r
    }

    /// `(1/2N) ‖Y − A β‖²`.
    pub fn smooth_loss(&self, beta: &[f64]) -> f64 {
        let r = self.residual(beta);
        dot(&r, &r) / (2.0 * self.n_rows() as f64)
    }

    /// Gradient of [`smooth_loss`](Self::smooth_loss): `(1/N) Aᵀ(Aβ − Y)`.
    pub fn smooth_gradient(&self, beta: &[f64]) -> Vec<f64> {
        let r = self.residual(beta);
        let n = self.n_rows() as f64;
        let mut g = Vec::with_capacity(self.n_coefs());
        for j in 0..self.n_blocks() {
            for m in 0..self.width {
                g.push(-dot(self.column(j, m), &r) / n);
            }
        }
        g
    }

    pub fn objective(&self, beta: &[f64], lambda: f64) -> f64 {
        self.smooth_loss(beta) + lambda * penalty(beta, self.width)
    }

    fn block_gradient_into(&self, j: usize, r: &[f64], out: &mut [f64]) {
        let n = self.n_rows() as f64;
        for (m, o) in out.iter_mut().enumerate() {
            *o = -dot(self.column(j, m), r) / n;
        }
    }
}

fn penalty(beta: &[f64], width: usize) -> f64 {
    beta.chunks_exact(width).map(norm).sum()
}

/// Proximal operator of `t ‖·‖₂`: zero when `‖v‖ <= t`, otherwise
/// `(1 − t/‖v‖) v`.
pub fn group_soft_threshold(v: &[f64], t: f64) -> Vec<f64> {
    let nv = norm(v);
    if nv <= t {
        return vec![0.0; v.len()];
    }
    let scale = 1.0 - t / nv;
    v.iter().map(|x| scale * x).collect()
}

/// Smallest λ for which `β = 0` is optimal: `max_j ‖(1/N) A_jᵀ Y‖₂`.
pub fn lambda_max(prob: &GroupProblem) -> f64 {
    let mut g = vec![0.0; prob.width];
    let mut best = 0.0f64;
    for j in 0..prob.n_blocks() {
        prob.block_gradient_into(j, &prob.response, &mut g);
        best = best.max(norm(&g));
    }
    best
}

/// Largest per-block violation of the group lasso optimality conditions.
///
/// For a nonzero block this is `‖g_j + λ β_j/‖β_j‖‖`; for a zero block it is
/// `max(0, ‖g_j‖ − λ)`, where `g_j` is the block of `(1/N) Aᵀ(Aβ − Y)`.
pub fn kkt_residual(prob: &GroupProblem, beta: &[f64], lambda: f64) -> f64 {
    let r = prob.residual(beta);
    kkt_with_residual(prob, beta, lambda, &r, 0..prob.n_blocks())
}

fn kkt_with_residual(
    prob: &GroupProblem,
    beta: &[f64],
    lambda: f64,
    r: &[f64],
    blocks: impl Iterator<Item = usize>,
) -> f64 {
    let w = prob.width;
    let mut g = vec![0.0; w];
    let mut worst = 0.0f64;
    for j in blocks {
        prob.block_gradient_into(j, r, &mut g);
        let b = &beta[j * w..(j + 1) * w];
        let nb = norm(b);
        let v = if nb == 0.0 {
            (norm(&g) - lambda).max(0.0)
        } else {
            g.iter()
                .zip(b)
                .map(|(gi, bi)| {
                    let e = gi + lambda * bi / nb;
                    e * e
                })
                .sum::<f64>()
                .sqrt()
        };
        worst = worst.max(v);
    }
    worst
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SolverOptions {
    /// Stop once the KKT residual is at or below this.
    pub tol: f64,
    /// Maximum number of sweeps (full and active-set sweeps both count).
    pub max_iter: usize,
    /// Also stop once a full sweep changes no coefficient by more than this,
    /// relative to the largest coefficient.
    pub rel_change_tol: f64,
    /// Record the objective after every sweep in `FitResult::objective_trace`.
    #[serde(default)]
    pub trace_objective: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-6,
            max_iter: 10_000,
            rel_change_tol: 1e-10,
            trace_objective: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    /// `p · M` coefficients, block `j` at `beta[j*M..(j+1)*M]`.
    pub beta: Vec<f64>,
    pub width: usize,
    /// Indices of blocks with at least one nonzero coefficient.
    pub support: Vec<usize>,
    pub objective: f64,
    pub iterations: usize,
    pub kkt_residual: f64,
    pub lambda: f64,
    pub converged: bool,
    pub objective_trace: Vec<f64>,
}

impl FitResult {
    pub fn block(&self, j: usize) -> &[f64] {
        &self.beta[j * self.width..(j + 1) * self.width]
    }

    pub fn n_blocks(&self) -> usize {
        self.beta.len() / self.width
    }

    pub fn block_norms(&self) -> Vec<f64> {
        self.beta.chunks_exact(self.width).map(norm).collect()
    }
}

pub(crate) fn support_of(beta: &[f64], width: usize) -> Vec<usize> {
    beta.chunks_exact(width)
        .enumerate()
        .filter(|(_, b)| b.iter().any(|&v| v != 0.0))
        .map(|(j, _)| j)
        .collect()
}

/// Solves `min_x ½ xᵀGx − cᵀx + λ‖x‖` given `G = Q diag(e) Qᵀ` and
/// `d = Qᵀc`. Returns the minimizer in eigen-coordinates (overwrites `d`).
fn solve_block_eigen(d: &mut [f64], e: &[f64], lambda: f64) {
    for (di, &ei) in d.iter_mut().zip(e) {
        if ei == 0.0 {
            *di = 0.0;
        }
    }
    let dn = norm(d);
    if lambda == 0.0 {
        for (di, &ei) in d.iter_mut().zip(e) {
            if ei > 0.0 {
                *di /= ei;
            }
        }
        return;
    }
    if dn <= lambda {
        d.iter_mut().for_each(|v| *v = 0.0);
        return;
    }
    // ‖x‖ = t solves S(t) = Σ d_i² / (e_i t + λ)² = 1; 1/√S is close to
    // linear in t, so Newton on it converges in a few steps.
    let mut e_hi = 0.0f64;
    let mut e_lo = f64::INFINITY;
    for (&di, &ei) in d.iter().zip(e) {
        if di != 0.0 {
            e_hi = e_hi.max(ei);
            e_lo = e_lo.min(ei);
        }
    }
    let excess = dn - lambda;
    let mut lo = excess / e_hi;
    let mut hi = excess / e_lo;
    let mut t = lo;
    for _ in 0..100 {
        let mut s = 0.0;
        let mut ds = 0.0;
        for (&di, &ei) in d.iter().zip(e) {
            if di != 0.0 {
                let den = ei * t + lambda;
                let q = di * di / (den * den);
                s += q;
                ds -= 2.0 * q * ei / den;
            }
        }
        let psi = 1.0 / s.sqrt() - 1.0;
        if psi < 0.0 {
            lo = lo.max(t);
        } else {
            hi = hi.min(t);
        }
        let dpsi = -0.5 * ds / (s * s.sqrt());
        let mut next = if dpsi > 0.0 { t - psi / dpsi } else { f64::NAN };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - t).abs() <= 1e-15 * t.max(f64::MIN_POSITIVE) || hi - lo <= 1e-15 * hi {
            t = next;
            break;
        }
        t = next;
    }
    for (di, &ei) in d.iter_mut().zip(e) {
        if ei > 0.0 {
            *di *= t / (ei * t + lambda);
        }
    }
}

struct Workspace {
    grad: Vec<f64>,
    c: Vec<f64>,
    d: Vec<f64>,
    x: Vec<f64>,
}

impl Workspace {
    fn new(w: usize) -> Self {
        Workspace {
            grad: vec![0.0; w],
            c: vec![0.0; w],
            d: vec![0.0; w],
            x: vec![0.0; w],
        }
    }
}

/// Exact minimization over block `j`; updates `beta` and the residual.
/// Returns the largest absolute coefficient change.
fn update_block(
    prob: &GroupProblem,
    j: usize,
    beta: &mut [f64],
    r: &mut [f64],
    lambda: f64,
    ws: &mut Workspace,
) -> f64 {
    let w = prob.width;
    let spec = &prob.spectra[j];
    let bj = &mut beta[j * w..(j + 1) * w];
    if spec.zero {
        // Columns are identically zero: the residual does not depend on
        // this block and the penalty pushes it to zero.
        let change = bj.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        bj.iter_mut().for_each(|v| *v = 0.0);
        return change;
    }
    prob.block_gradient_into(j, r, &mut ws.grad);
    // c = G β_j − g  (g is the gradient, so −g = (1/N) A_jᵀ r)
    for a in 0..w {
        let row = &spec.gram[a * w..(a + 1) * w];
        ws.c[a] = dot(row, bj) - ws.grad[a];
    }
    if lambda > 0.0 && norm(&ws.c) <= lambda {
        // Test in the original coordinates so that λ = λ_max gives an exact
        // zero from a zero start.
        ws.d.iter_mut().for_each(|v| *v = 0.0);
    } else {
        for k in 0..w {
            ws.d[k] = dot(&spec.vectors[k * w..(k + 1) * w], &ws.c);
        }
        solve_block_eigen(&mut ws.d, &spec.values, lambda);
    }
    ws.x.iter_mut().for_each(|v| *v = 0.0);
    for k in 0..w {
        if ws.d[k] != 0.0 {
            axpy(ws.d[k], &spec.vectors[k * w..(k + 1) * w], &mut ws.x);
        }
    }
    let mut change = 0.0f64;
    for (m, (b, &x)) in bj.iter_mut().zip(&ws.x).enumerate() {
        let delta = x - *b;
        if delta != 0.0 {
            axpy(-delta, prob.column(j, m), r);
            change = change.max(delta.abs());
        }
        *b = x;
    }
    change
}

fn sweep(
    prob: &GroupProblem,
    blocks: &[usize],
    beta: &mut [f64],
    r: &mut [f64],
    lambda: f64,
    ws: &mut Workspace,
) -> f64 {
    let mut change = 0.0f64;
    for &j in blocks {
        change = change.max(update_block(prob, j, beta, r, lambda, ws));
    }
    let scale = beta.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if change == 0.0 {
        0.0
    } else {
        change / scale.max(f64::MIN_POSITIVE)
    }
}

fn objective_from_residual(r: &[f64], beta: &[f64], width: usize, lambda: f64) -> f64 {
    dot(r, r) / (2.0 * r.len() as f64) + lambda * penalty(beta, width)
}

/// Fits the group lasso at one λ.
///
/// Alternates full cyclic sweeps over all blocks with sweeps restricted to
/// the current nonzero blocks, and stops once the KKT residual is within
/// `opts.tol` (or a full sweep leaves the coefficients unchanged to
/// `opts.rel_change_tol`). Exceeding `opts.max_iter` returns the last
/// iterate with `converged = false`.
pub fn fit(
    prob: &GroupProblem,
    lambda: f64,
    init: Option<&[f64]>,
    opts: &SolverOptions,
) -> Result<FitResult> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(FussoError::InvalidArgument(format!(
            "lambda must be finite and >= 0, got {lambda}"
        )));
    }
    let p = prob.n_blocks();
    let w = prob.width;
    let mut beta = match init {
        Some(b) if b.len() != p * w => {
            return Err(FussoError::DimensionMismatch(format!(
                "initial beta has {} entries, expected {}",
                b.len(),
                p * w
            )))
        }
        Some(b) => b.to_vec(),
        None => vec![0.0; p * w],
    };
    let all: Vec<usize> = (0..p).collect();
    let mut ws = Workspace::new(w);
    let mut trace = Vec::new();
    let mut iterations = 0usize;
    let mut converged = false;
    let mut kkt;

    loop {
        // Refresh the residual so incremental updates do not drift.
        let mut r = prob.residual(&beta);
        if opts.trace_objective && iterations == 0 {
            trace.push(objective_from_residual(&r, &beta, w, lambda));
        }
        let full_change = sweep(prob, &all, &mut beta, &mut r, lambda, &mut ws);
        iterations += 1;
        if opts.trace_objective {
            trace.push(objective_from_residual(&r, &beta, w, lambda));
        }

        while iterations < opts.max_iter && full_change > opts.rel_change_tol {
            let active = support_of(&beta, w);
            if active.is_empty() {
                break;
            }
            let change = sweep(prob, &active, &mut beta, &mut r, lambda, &mut ws);
            iterations += 1;
            if opts.trace_objective {
                trace.push(objective_from_residual(&r, &beta, w, lambda));
            }
            if change <= opts.rel_change_tol
                || kkt_with_residual(prob, &beta, lambda, &r, active.into_iter()) <= opts.tol
            {
                break;
            }
        }

        let r = prob.residual(&beta);
        kkt = kkt_with_residual(prob, &beta, lambda, &r, 0..p);
        let obj = objective_from_residual(&r, &beta, w, lambda);
        if !obj.is_finite() {
            return Err(FussoError::NonFiniteObjective);
        }
        if kkt <= opts.tol || full_change <= opts.rel_change_tol {
            converged = true;
            break;
        }
        if iterations >= opts.max_iter {
            break;
        }
    }

    let objective = prob.objective(&beta, lambda);
    Ok(FitResult {
        support: support_of(&beta, w),
        beta,
        width: w,
        objective,
        iterations,
        kkt_residual: kkt,
        lambda,
        converged,
        objective_trace: trace,
    })
}

/// How to lay out the λ values of a path.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum LambdaGrid {
    /// `count` values from `λ_max` down to `ratio · λ_max`, log-spaced.
    Geometric { count: usize, ratio: f64 },
    /// Explicit values; must be strictly decreasing and nonnegative.
    Explicit(Vec<f64>),
}

impl Default for LambdaGrid {
    fn default() -> Self {
        LambdaGrid::Geometric {
            count: 100,
            ratio: 1e-3,
        }
    }
}

impl LambdaGrid {
    pub fn resolve(&self, lambda_max: f64) -> Result<Vec<f64>> {
        match self {
            LambdaGrid::Geometric { count, ratio } => {
                if *count == 0 {
                    return Err(FussoError::InvalidArgument("empty lambda grid".into()));
                }
                if !(*ratio > 0.0 && *ratio < 1.0) {
                    return Err(FussoError::InvalidArgument(format!(
                        "lambda ratio must be in (0, 1), got {ratio}"
                    )));
                }
                if lambda_max == 0.0 {
                    return Ok(vec![0.0]);
                }
                if *count == 1 {
                    return Ok(vec![lambda_max]);
                }
                let step = ratio.ln() / (*count - 1) as f64;
                Ok((0..*count)
                    .map(|k| lambda_max * (step * k as f64).exp())
                    .collect())
            }
            LambdaGrid::Explicit(values) => {
                if values.is_empty() {
                    return Err(FussoError::InvalidArgument("empty lambda grid".into()));
                }
                if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                    return Err(FussoError::InvalidArgument(
                        "lambda values must be finite and >= 0".into(),
                    ));
                }
                if values.windows(2).any(|w| w[1] >= w[0]) {
                    return Err(FussoError::InvalidArgument(
                        "lambda values must be strictly decreasing".into(),
                    ));
                }
                Ok(values.clone())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathResult {
    pub lambdas: Vec<f64>,
    pub fits: Vec<FitResult>,
    pub lambda_max: f64,
}

/// Runs the warm-started path, handing each fit to `visit` instead of
/// keeping it. Returns `(λ_max, λ values)`.
pub fn fit_path_with(
    prob: &GroupProblem,
    grid: &LambdaGrid,
    opts: &SolverOptions,
    mut visit: impl FnMut(usize, &FitResult),
) -> Result<(f64, Vec<f64>)> {
    let lmax = lambda_max(prob);
    let lambdas = grid.resolve(lmax)?;
    let mut warm: Option<Vec<f64>> = None;
    for (k, &lambda) in lambdas.iter().enumerate() {
        let fit = fit(prob, lambda, warm.as_deref(), opts)?;
        visit(k, &fit);
        warm = Some(fit.beta);
    }
    Ok((lmax, lambdas))
}

/// Fits every λ of the grid in decreasing order, each warm-started from the
/// previous solution.
pub fn fit_path(
    prob: &GroupProblem,
    grid: &LambdaGrid,
    opts: &SolverOptions,
) -> Result<PathResult> {
    let mut fits = Vec::new();
    let (lambda_max, lambdas) = fit_path_with(prob, grid, opts, |_, f| fits.push(f.clone()))?;
    Ok(PathResult {
        lambdas,
        fits,
        lambda_max,
    })
}
