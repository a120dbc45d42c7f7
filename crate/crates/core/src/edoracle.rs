//! Exact diagonalization of the finite-N Hamiltonian.
//!
//! The matter sector is the fully symmetric one, spanned by occupation
//! triples `(n1, n2, n3)` with `n1 + n2 + n3 = N`; collective operators
//! `I_m^n` act as Schwinger ladders. Each boson mode is truncated at a cutoff,
//! and `(a + a^dag)^2` is the square of the truncated quadrature so the
//! diamagnetic terms stay positive semidefinite after truncation.
//!
//! All matrix elements are real, so the Hamiltonian is real symmetric and the
//! parity operators are real diagonal `+-1` matrices.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::ModelParams;

pub const DEFAULT_DIM_CAP: usize = 200_000;
pub const DEFAULT_DENSE_MAX: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdConfig {
    pub n_atoms: usize,
    pub cutoff1: usize,
    pub cutoff2: usize,
    pub params: ModelParams,
    pub dim_cap: usize,
}

impl EdConfig {
    pub fn new(n_atoms: usize, cutoff1: usize, cutoff2: usize, params: ModelParams) -> Self {
        Self {
            n_atoms,
            cutoff1,
            cutoff2,
            params,
            dim_cap: DEFAULT_DIM_CAP,
        }
    }

    pub fn matter_dim(&self) -> usize {
        (self.n_atoms + 1) * (self.n_atoms + 2) / 2
    }

    pub fn boson_dim(&self) -> usize {
        (self.cutoff1 + 1) * (self.cutoff2 + 1)
    }

    pub fn dim(&self) -> usize {
        self.matter_dim() * self.boson_dim()
    }

    fn check(&self) -> Result<()> {
        if self.n_atoms < 1 {
            return Err(Error::InvalidEd("N must be at least 1".into()));
        }
        self.params.validated()?;
        let dim = self.dim();
        if dim > self.dim_cap {
            return Err(Error::CapExceeded {
                dim,
                cap: self.dim_cap,
            });
        }
        Ok(())
    }
}

/// Product basis `|n1 n2 n3> (x) |m1> (x) |m2>`, with the mode-2 index fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Basis {
    pub n_atoms: usize,
    pub cutoff1: usize,
    pub cutoff2: usize,
    matter: Vec<[usize; 3]>,
    /// `lookup[n2][n3]` -> matter index
    lookup: Vec<Vec<usize>>,
}

impl Basis {
    pub fn new(n_atoms: usize, cutoff1: usize, cutoff2: usize) -> Self {
        let mut matter = Vec::new();
        let mut lookup = vec![vec![usize::MAX; n_atoms + 1]; n_atoms + 1];
        for n3 in 0..=n_atoms {
            for n2 in 0..=(n_atoms - n3) {
                lookup[n2][n3] = matter.len();
                matter.push([n_atoms - n2 - n3, n2, n3]);
            }
        }
        Self {
            n_atoms,
            cutoff1,
            cutoff2,
            matter,
            lookup,
        }
    }

    pub fn from_config(cfg: &EdConfig) -> Self {
        Self::new(cfg.n_atoms, cfg.cutoff1, cfg.cutoff2)
    }

    pub fn dim(&self) -> usize {
        self.matter.len() * (self.cutoff1 + 1) * (self.cutoff2 + 1)
    }

    fn boson_dim(&self) -> usize {
        (self.cutoff1 + 1) * (self.cutoff2 + 1)
    }

    pub fn index(&self, occ: [usize; 3], m1: usize, m2: usize) -> usize {
        let mi = self.lookup[occ[1]][occ[2]];
        (mi * (self.cutoff1 + 1) + m1) * (self.cutoff2 + 1) + m2
    }

    /// `(occupations, m1, m2)` of basis state `i`.
    pub fn state(&self, i: usize) -> ([usize; 3], usize, usize) {
        let bd = self.boson_dim();
        let occ = self.matter[i / bd];
        let r = i % bd;
        (occ, r / (self.cutoff2 + 1), r % (self.cutoff2 + 1))
    }
}

/// Row-compressed real matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    /// Sums duplicate entries and drops exact zeros.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0; n + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(c);
                vals.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..n {
            row_ptr[r + 1] += row_ptr[r];
        }
        let mut m = Self {
            n,
            row_ptr,
            cols,
            vals,
        };
        m.prune();
        m
    }

    fn prune(&mut self) {
        let mut row_ptr = vec![0; self.n + 1];
        let mut cols = Vec::with_capacity(self.cols.len());
        let mut vals = Vec::with_capacity(self.vals.len());
        for r in 0..self.n {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                if self.vals[k] != 0.0 {
                    cols.push(self.cols[k]);
                    vals.push(self.vals[k]);
                }
            }
            row_ptr[r + 1] = cols.len();
        }
        self.row_ptr = row_ptr;
        self.cols = cols;
        self.vals = vals;
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (self.cols[k], self.vals[k]))
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.row(r).find(|&(j, _)| j == c).map_or(0.0, |(_, v)| v)
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        y.par_iter_mut().enumerate().with_min_len(256).for_each(|(r, out)| {
            *out = self.row(r).map(|(c, v)| v * x[c]).sum();
        });
    }

    pub fn max_abs(&self) -> f64 {
        self.vals.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `max |A - A^T|` over stored entries.
    pub fn asymmetry(&self) -> f64 {
        self.entries()
            .map(|(r, c, v)| (v - self.get(c, r)).abs())
            .fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(self.n, self.n);
        for (r, c, v) in self.entries() {
            d[(r, c)] = v;
        }
        d
    }
}

fn ladder_up(m: usize) -> f64 {
    ((m + 1) as f64).sqrt()
}

/// Entries `(m', value)` of the truncated quadrature `X = a + a^dag` in column `m`.
fn quadrature(m: usize, cutoff: usize) -> impl Iterator<Item = (usize, f64)> {
    let up = (m < cutoff).then(|| (m + 1, ladder_up(m)));
    let down = (m > 0).then(|| (m - 1, (m as f64).sqrt()));
    up.into_iter().chain(down)
}

/// Entries of `X^2` with `X` the truncated quadrature.
fn quadrature_sq(m: usize, cutoff: usize) -> Vec<(usize, f64)> {
    let mut out: Vec<(usize, f64)> = Vec::with_capacity(3);
    for (k, a) in quadrature(m, cutoff) {
        for (j, b) in quadrature(k, cutoff) {
            match out.iter_mut().find(|(idx, _)| *idx == j) {
                Some(e) => e.1 += a * b,
                None => out.push((j, a * b)),
            }
        }
    }
    out
}

/// Assembles the Hamiltonian with the lowest level at zero energy.
pub fn build_hamiltonian(cfg: &EdConfig) -> Result<CsrMatrix> {
    cfg.check()?;
    let basis = Basis::from_config(cfg);
    Ok(assemble(&basis, &cfg.params))
}

fn assemble(basis: &Basis, p: &ModelParams) -> CsrMatrix {
    let n = basis.dim();
    let (c1, c2) = (basis.cutoff1, basis.cutoff2);
    let sqrt_n = (basis.n_atoms as f64).sqrt();
    let k1 = p.kappa1 * p.kappa1 / p.omega1;
    let k2 = p.kappa2 * p.kappa2 / p.omega2;
    let k3 = 2.0 * p.kappa3 * p.kappa3 / (p.omega1 * p.omega2).sqrt();

    let mut t: Vec<(usize, usize, f64)> = Vec::with_capacity(n * 16);
    for i in 0..n {
        let (occ, m1, m2) = basis.state(i);
        let [n1, n2, n3] = occ;
        t.push((
            i,
            i,
            p.delta * n2 as f64 + p.big_delta * n3 as f64 + p.omega1 * m1 as f64 + p.omega2 * m2 as f64,
        ));
        for (j1, v) in quadrature_sq(m1, c1) {
            t.push((basis.index(occ, j1, m2), i, k1 * v));
        }
        for (j2, v) in quadrature_sq(m2, c2) {
            t.push((basis.index(occ, m1, j2), i, k2 * v));
        }
        for (j1, a) in quadrature(m1, c1) {
            for (j2, b) in quadrature(m2, c2) {
                t.push((basis.index(occ, j1, j2), i, k3 * a * b));
            }
        }

        // light-matter terms: (I_3^k + I_k^3) on branch k, times its field combination
        let mut branch = |from: usize, to: usize, amp: f64, g: f64, x1: f64, x2: f64| {
            if g == 0.0 || amp == 0.0 {
                return;
            }
            let mut occ2 = occ;
            occ2[from] -= 1;
            occ2[to] += 1;
            let scale = g / sqrt_n * amp;
            for (j1, a) in quadrature(m1, c1) {
                t.push((basis.index(occ2, j1, m2), i, scale * x1 * a));
            }
            for (j2, b) in quadrature(m2, c2) {
                t.push((basis.index(occ2, m1, j2), i, scale * x2 * b));
            }
        };
        if n1 > 0 {
            branch(0, 2, ((n1 * (n3 + 1)) as f64).sqrt(), p.g1, 1.0, p.chi1);
        }
        if n3 > 0 {
            branch(2, 0, ((n3 * (n1 + 1)) as f64).sqrt(), p.g1, 1.0, p.chi1);
        }
        if n2 > 0 {
            branch(1, 2, ((n2 * (n3 + 1)) as f64).sqrt(), p.g2, p.chi2, 1.0);
        }
        if n3 > 0 {
            branch(2, 1, ((n3 * (n2 + 1)) as f64).sqrt(), p.g2, p.chi2, 1.0);
        }
    }
    CsrMatrix::from_triplets(n, t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ParityKind {
    /// `exp[-i pi (-I_1^1 + a1^dag a1 + a2^dag a2)]`
    Pi1,
    /// `exp[-i pi (-I_2^2 + a1^dag a1 + a2^dag a2)]`
    Pi2,
    /// `exp[-i pi (-I_1^1 + a1^dag a1)]`
    Pi1Prime,
    /// `exp[-i pi (-I_2^2 + a2^dag a2)]`
    Pi2Prime,
    /// `exp[-i pi (-I_3^3 + a1^dag a1 + a2^dag a2)]`
    Pi3,
}

impl ParityKind {
    pub const ALL: [ParityKind; 5] = [
        ParityKind::Pi1,
        ParityKind::Pi2,
        ParityKind::Pi1Prime,
        ParityKind::Pi2Prime,
        ParityKind::Pi3,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            ParityKind::Pi1 => "Pi1",
            ParityKind::Pi2 => "Pi2",
            ParityKind::Pi1Prime => "Pi1_prime",
            ParityKind::Pi2Prime => "Pi2_prime",
            ParityKind::Pi3 => "Pi3",
        }
    }

    /// Exponent (mod 2) of the parity for one basis state.
    fn count(&self, occ: [usize; 3], m1: usize, m2: usize) -> usize {
        match self {
            ParityKind::Pi1 => occ[0] + m1 + m2,
            ParityKind::Pi2 => occ[1] + m1 + m2,
            ParityKind::Pi1Prime => occ[0] + m1,
            ParityKind::Pi2Prime => occ[1] + m2,
            ParityKind::Pi3 => occ[2] + m1 + m2,
        }
    }
}

impl fmt::Display for ParityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Diagonal of the parity operator: `exp[-i pi k] = (-1)^k`.
pub fn parity_operator(basis: &Basis, which: ParityKind) -> Vec<f64> {
    (0..basis.dim())
        .map(|i| {
            let (occ, m1, m2) = basis.state(i);
            if which.count(occ, m1, m2) % 2 == 0 {
                1.0
            } else {
                -1.0
            }
        })
        .collect()
}

/// Max-entry norm of `HS - SH` for diagonal `S`.
pub fn commutator_norm(h: &CsrMatrix, s: &[f64]) -> Result<f64> {
    if s.len() != h.dim() {
        return Err(Error::Shape(format!(
            "operator of dimension {} against Hamiltonian of dimension {}",
            s.len(),
            h.dim()
        )));
    }
    Ok(h.entries()
        .map(|(r, c, v)| (v * (s[c] - s[r])).abs())
        .fold(0.0, f64::max))
}

/// `(a_1 + a_1^dag)(a_2 + a_2^dag)` on the truncated product space.
pub fn mode_product(basis: &Basis) -> CsrMatrix {
    let mut t = Vec::new();
    for i in 0..basis.dim() {
        let (occ, m1, m2) = basis.state(i);
        for (j1, a) in quadrature(m1, basis.cutoff1) {
            for (j2, b) in quadrature(m2, basis.cutoff2) {
                t.push((basis.index(occ, j1, j2), i, a * b));
            }
        }
    }
    CsrMatrix::from_triplets(basis.dim(), t)
}

/// `max |S A S^dag - sign * A|` for diagonal unitary `S`.
pub fn conjugation_defect(a: &CsrMatrix, s: &[f64], sign: f64) -> f64 {
    a.entries()
        .map(|(r, c, v)| (s[r] * v * s[c] - sign * v).abs())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenOptions {
    /// Largest dimension solved with the dense eigensolver.
    pub dense_max: usize,
    pub krylov_dim: usize,
    pub max_restarts: usize,
    /// Residual `|H x - E x|` accepted, relative to `max(1, |E|)`.
    pub residual_tol: f64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            dense_max: DEFAULT_DENSE_MAX,
            krylov_dim: 120,
            max_restarts: 200,
            residual_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EigenMethod {
    Dense,
    Lanczos,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Eigenpair {
    pub value: f64,
    pub vector: Vec<f64>,
    pub method: EigenMethod,
}

/// Dense eigenvalues, then the eigenvector by inverse iteration on a
/// Cholesky factor shifted just below the lowest eigenvalue. Accumulating
/// the full eigenvector matrix costs several times more.
pub fn lowest_dense(h: &CsrMatrix) -> Result<Eigenpair> {
    let n = h.dim();
    let d = h.to_dense();
    let lambda = d.clone().symmetric_eigenvalues().min();
    let scale = h.max_abs().max(lambda.abs()).max(1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut x = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
    let mut gap = 1e-10 * scale;
    let chol = loop {
        let shifted = &d - DMatrix::identity(n, n) * (lambda - gap);
        if let Some(c) = shifted.cholesky() {
            break c;
        }
        gap *= 10.0;
        if gap > 1e-4 * scale {
            return Err(Error::Eigen("shifted Cholesky factorization failed".into()));
        }
    };
    for _ in 0..4 {
        x = chol.solve(&x);
        x /= x.norm();
    }
    let value = x.dot(&(&d * &x));
    Ok(Eigenpair {
        value,
        vector: x.iter().copied().collect(),
        method: EigenMethod::Dense,
    })
}

/// The lowest `count` eigenvalues by dense diagonalization, ascending.
pub fn lowest_levels_dense(h: &CsrMatrix, count: usize) -> Result<Vec<f64>> {
    let eig = SymmetricEigen::try_new(h.to_dense(), 1e-15, 100_000)
        .ok_or_else(|| Error::Eigen("dense eigensolve did not converge".into()))?;
    let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev.truncate(count);
    Ok(ev)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += alpha * xi);
}

/// Restarted Lanczos with full reorthogonalization for the lowest eigenpair.
///
/// The start vector is a fixed pseudo-random vector so that it overlaps every
/// symmetry sector.
pub fn lowest_lanczos(h: &CsrMatrix, opts: &EigenOptions) -> Result<Eigenpair> {
    let n = h.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let m = opts.krylov_dim.min(n).max(1);
    let mut w = vec![0.0; n];

    for _ in 0..=opts.max_restarts {
        let nx = dot(&x, &x).sqrt();
        x.iter_mut().for_each(|v| *v /= nx);
        let mut basis: Vec<Vec<f64>> = vec![x.clone()];
        let mut alphas = Vec::with_capacity(m);
        let mut betas: Vec<f64> = Vec::with_capacity(m);
        for j in 0..m {
            h.mul_vec(&basis[j], &mut w);
            let a = dot(&w, &basis[j]);
            alphas.push(a);
            // two passes of Gram-Schmidt against the whole Krylov basis
            for _ in 0..2 {
                for v in &basis {
                    let c = dot(&w, v);
                    axpy(-c, v, &mut w);
                }
            }
            let b = dot(&w, &w).sqrt();
            if j + 1 == m || b <= 1e-13 * a.abs().max(1.0) {
                break;
            }
            betas.push(b);
            basis.push(w.iter().map(|v| v / b).collect());
        }
        let k = alphas.len();
        let t = DMatrix::from_fn(k, k, |r, c| {
            if r == c {
                alphas[r]
            } else if r + 1 == c {
                betas[r]
            } else if c + 1 == r {
                betas[c]
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::try_new(t, 1e-15, 10_000)
            .ok_or_else(|| Error::Eigen("tridiagonal eigensolve failed".into()))?;
        let i = eig.eigenvalues.imin();
        let theta = eig.eigenvalues[i];
        let y = eig.eigenvectors.column(i);
        x = vec![0.0; n];
        for (c, v) in y.iter().zip(&basis) {
            axpy(*c, v, &mut x);
        }
        let nx = dot(&x, &x).sqrt();
        x.iter_mut().for_each(|v| *v /= nx);
        h.mul_vec(&x, &mut w);
        axpy(-theta, &x, &mut w);
        let residual = dot(&w, &w).sqrt();
        if residual <= opts.residual_tol * theta.abs().max(1.0) {
            return Ok(Eigenpair {
                value: theta,
                vector: x,
                method: EigenMethod::Lanczos,
            });
        }
    }
    Err(Error::Eigen(format!(
        "Lanczos did not reach residual {} within {} restarts",
        opts.residual_tol, opts.max_restarts
    )))
}

/// Dense below `dense_max`, Lanczos above.
pub fn lowest_eigenpair(h: &CsrMatrix, opts: &EigenOptions) -> Result<Eigenpair> {
    if h.dim() <= opts.dense_max {
        lowest_dense(h)
    } else {
        lowest_lanczos(h, opts)
    }
}

/// Probability weight a threshold below which the highest Fock states count as empty.
pub const TAIL_WEIGHT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct EdResult {
    pub n_atoms: usize,
    pub cutoff1: usize,
    pub cutoff2: usize,
    pub dim: usize,
    pub ground_energy: f64,
    pub ground_energy_per_atom: f64,
    /// `<Pi1>`; real because the operator and the ground vector are real.
    pub parity1_expect: f64,
    pub parity2_expect: f64,
    /// `<Pi3>`, the parity that survives mode mixing.
    pub parity3_expect: f64,
    /// `max |[H, S]|` per parity operator label.
    pub commutator_norms: BTreeMap<String, f64>,
    /// Largest `|H_ij|`.
    pub h_norm: f64,
    /// `(<a1^dag a1>, <a2^dag a2>)`
    pub boson_occupations: (f64, f64),
    /// `(<I_1^1>, <I_2^2>, <I_3^3>) / N`
    pub level_populations: (f64, f64, f64),
    /// Weight in the two highest Fock states of each mode.
    pub tail_weights: (f64, f64),
    pub cutoff_adequate: bool,
    pub method: EigenMethod,
}

impl EdResult {
    pub fn relative_commutator(&self, which: ParityKind) -> f64 {
        self.commutator_norms[which.label()] / self.h_norm
    }
}

pub fn ground_state(cfg: &EdConfig) -> Result<EdResult> {
    ground_state_with(cfg, &EigenOptions::default())
}

pub fn ground_state_with(cfg: &EdConfig, opts: &EigenOptions) -> Result<EdResult> {
    cfg.check()?;
    let basis = Basis::from_config(cfg);
    let h = assemble(&basis, &cfg.params);
    let pair = lowest_eigenpair(&h, opts)?;
    Ok(observe(cfg, &basis, &h, &pair))
}

fn observe(cfg: &EdConfig, basis: &Basis, h: &CsrMatrix, pair: &Eigenpair) -> EdResult {
    let v = &pair.vector;
    let mut pops = [0.0; 3];
    let mut occ_b = [0.0; 2];
    let mut tails = [0.0; 2];
    for (i, amp) in v.iter().enumerate() {
        let w = amp * amp;
        let (occ, m1, m2) = basis.state(i);
        for k in 0..3 {
            pops[k] += w * occ[k] as f64;
        }
        occ_b[0] += w * m1 as f64;
        occ_b[1] += w * m2 as f64;
        if m1 + 1 >= cfg.cutoff1 {
            tails[0] += w;
        }
        if m2 + 1 >= cfg.cutoff2 {
            tails[1] += w;
        }
    }
    let expect = |k: ParityKind| {
        parity_operator(basis, k)
            .iter()
            .zip(v)
            .map(|(s, a)| s * a * a)
            .sum::<f64>()
    };
    let commutator_norms = ParityKind::ALL
        .iter()
        .map(|k| {
            let s = parity_operator(basis, *k);
            (k.label().to_string(), commutator_norm(h, &s).expect("same basis"))
        })
        .collect();
    let n = cfg.n_atoms as f64;
    EdResult {
        n_atoms: cfg.n_atoms,
        cutoff1: cfg.cutoff1,
        cutoff2: cfg.cutoff2,
        dim: basis.dim(),
        ground_energy: pair.value,
        ground_energy_per_atom: pair.value / n,
        parity1_expect: expect(ParityKind::Pi1),
        parity2_expect: expect(ParityKind::Pi2),
        parity3_expect: expect(ParityKind::Pi3),
        commutator_norms,
        h_norm: h.max_abs(),
        boson_occupations: (occ_b[0], occ_b[1]),
        level_populations: (pops[0] / n, pops[1] / n, pops[2] / n),
        tail_weights: (tails[0], tails[1]),
        cutoff_adequate: tails[0] < TAIL_WEIGHT_TOL && tails[1] < TAIL_WEIGHT_TOL,
        method: pair.method,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveCutoff {
    pub start: usize,
    pub step: usize,
    /// Relative energy change allowed when both cutoffs grow by `step`.
    pub energy_tol: f64,
    pub abs_tol: f64,
}

impl Default for AdaptiveCutoff {
    fn default() -> Self {
        Self {
            start: 8,
            step: 2,
            energy_tol: 1e-8,
            abs_tol: 1e-12,
        }
    }
}

/// Grows both cutoffs until the tail weight is below [`TAIL_WEIGHT_TOL`] and
/// the ground energy is stable under one more growth step. If the dimension
/// cap is hit first, the last result is returned with `cutoff_adequate = false`.
pub fn ground_state_adaptive(
    n_atoms: usize,
    params: &ModelParams,
    adapt: &AdaptiveCutoff,
    opts: &EigenOptions,
    dim_cap: usize,
) -> Result<EdResult> {
    let mut c = adapt.start.max(1);
    let mut cfg = EdConfig {
        dim_cap,
        ..EdConfig::new(n_atoms, c, c, *params)
    };
    let mut prev = ground_state_with(&cfg, opts)?;
    loop {
        c += adapt.step;
        cfg.cutoff1 = c;
        cfg.cutoff2 = c;
        if cfg.dim() > dim_cap {
            prev.cutoff_adequate = false;
            return Ok(prev);
        }
        let next = ground_state_with(&cfg, opts)?;
        let change = (next.ground_energy - prev.ground_energy).abs();
        let stable = change < adapt.energy_tol * next.ground_energy.abs() + adapt.abs_tol;
        if stable && prev.cutoff_adequate {
            return Ok(prev);
        }
        prev = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::reference_params;

    fn free(delta: f64, big_delta: f64) -> ModelParams {
        ModelParams {
            delta,
            big_delta,
            omega1: 0.8,
            omega2: 0.6,
            g1: 0.0,
            g2: 0.0,
            chi1: 0.0,
            chi2: 0.0,
            kappa1: 0.0,
            kappa2: 0.0,
            kappa3: 0.0,
        }
    }

    #[test]
    fn basis_round_trip() {
        let b = Basis::new(3, 2, 4);
        assert_eq!(b.dim(), 10 * 3 * 5);
        for i in 0..b.dim() {
            let (occ, m1, m2) = b.state(i);
            assert_eq!(occ.iter().sum::<usize>(), 3);
            assert_eq!(b.index(occ, m1, m2), i);
        }
    }

    #[test]
    fn free_atom_levels() {
        let cfg = EdConfig::new(1, 0, 0, free(0.3, 1.0));
        let h = build_hamiltonian(&cfg).unwrap();
        let ev = lowest_levels_dense(&h, 3).unwrap();
        assert_eq!(ev, vec![0.0, 0.3, 1.0]);
    }

    #[test]
    fn hamiltonian_is_symmetric() {
        let p = reference_params().with_couplings(0.9, 0.7);
        let h = build_hamiltonian(&EdConfig::new(3, 5, 4, p)).unwrap();
        assert_eq!(h.asymmetry(), 0.0);
    }

    #[test]
    fn cap_is_enforced() {
        let mut cfg = EdConfig::new(10, 30, 30, reference_params());
        cfg.dim_cap = 1000;
        assert!(matches!(build_hamiltonian(&cfg), Err(Error::CapExceeded { .. })));
        let cfg = EdConfig::new(0, 3, 3, reference_params());
        assert!(matches!(build_hamiltonian(&cfg), Err(Error::InvalidEd(_))));
    }

    /// Independent Rabi-model construction: one two-level atom and one mode,
    /// `H = Delta |e><e| + w a^dag a + g (|e><g| + |g><e|)(a + a^dag)`.
    fn rabi_dense(delta: f64, w: f64, g: f64, cutoff: usize) -> DMatrix<f64> {
        let nb = cutoff + 1;
        let mut h = DMatrix::zeros(2 * nb, 2 * nb);
        for s in 0..2 {
            for m in 0..nb {
                h[(s * nb + m, s * nb + m)] = delta * s as f64 + w * m as f64;
            }
        }
        for m in 0..nb {
            if m + 1 < nb {
                let x = ((m + 1) as f64).sqrt() * g;
                h[(nb + m + 1, m)] = x;
                h[(m, nb + m + 1)] = x;
                h[(m + 1, nb + m)] = x;
                h[(nb + m, m + 1)] = x;
            }
        }
        h
    }

    #[test]
    fn single_atom_matches_rabi_model() {
        let (big_delta, w, g, cutoff) = (1.0, 0.7, 0.45, 30);
        let mut p = free(0.4, big_delta);
        p.omega1 = w;
        p.g1 = g;
        let cfg = EdConfig::new(1, cutoff, 0, p);
        let ours = lowest_dense(&build_hamiltonian(&cfg).unwrap()).unwrap().value;
        let reference = rabi_dense(big_delta, w, g, cutoff).symmetric_eigenvalues().min();
        assert!((ours - reference).abs() < 1e-12, "{ours} vs {reference}");
    }

    #[test]
    fn parity_basics() {
        let b = Basis::new(4, 3, 3);
        for k in ParityKind::ALL {
            let s = parity_operator(&b, k);
            assert!(s.iter().all(|x| x * x == 1.0));
        }
        // every atom in level n, no photons: eigenvalue (-1)^N
        for (k, level) in [(ParityKind::Pi1, 0), (ParityKind::Pi2, 1), (ParityKind::Pi3, 2)] {
            let mut occ = [0; 3];
            occ[level] = 4;
            assert_eq!(parity_operator(&b, k)[b.index(occ, 0, 0)], 1.0);
        }
        let b = Basis::new(3, 2, 2);
        assert_eq!(parity_operator(&b, ParityKind::Pi1)[b.index([3, 0, 0], 0, 0)], -1.0);
    }

    #[test]
    fn mode_mixing_flips_primed_parities() {
        let b = Basis::new(2, 4, 4);
        let x12 = mode_product(&b);
        for k in [ParityKind::Pi1Prime, ParityKind::Pi2Prime] {
            assert_eq!(conjugation_defect(&x12, &parity_operator(&b, k), -1.0), 0.0);
        }
        for k in [ParityKind::Pi1, ParityKind::Pi2, ParityKind::Pi3] {
            assert_eq!(conjugation_defect(&x12, &parity_operator(&b, k), 1.0), 0.0);
        }
    }

    #[test]
    fn primed_parities_conserved_without_mixing() {
        let mut p = reference_params().with_couplings(0.8, 0.6);
        p.chi1 = 0.0;
        p.chi2 = 0.0;
        p.kappa3 = 0.0;
        let cfg = EdConfig::new(2, 6, 6, p);
        let b = Basis::from_config(&cfg);
        let h = build_hamiltonian(&cfg).unwrap();
        for k in [ParityKind::Pi1Prime, ParityKind::Pi2Prime, ParityKind::Pi3] {
            assert_eq!(commutator_norm(&h, &parity_operator(&b, k)).unwrap(), 0.0, "{k}");
        }
    }

    #[test]
    fn excitation_parity_conserved_with_mixing() {
        let p = reference_params().with_couplings(0.8, 0.6);
        let cfg = EdConfig::new(3, 6, 6, p);
        let b = Basis::from_config(&cfg);
        let h = build_hamiltonian(&cfg).unwrap();
        assert_eq!(commutator_norm(&h, &parity_operator(&b, ParityKind::Pi3)).unwrap(), 0.0);
        assert!(commutator_norm(&h, &parity_operator(&b, ParityKind::Pi1Prime)).unwrap() > 1e-3);
    }

    #[test]
    fn ground_state_observables() {
        let p = reference_params().with_couplings(0.3, 0.2);
        let r = ground_state(&EdConfig::new(2, 12, 12, p)).unwrap();
        let (a, b, c) = r.level_populations;
        assert!((a + b + c - 1.0).abs() < 1e-12);
        assert!((r.parity3_expect.abs() - 1.0).abs() < 1e-10);
        assert!(r.boson_occupations.0 >= 0.0 && r.boson_occupations.1 >= 0.0);
        assert_eq!(r.method, EigenMethod::Dense);
    }

    #[test]
    fn weak_coupling_energy_vanishes() {
        let mut p = free(0.1, 1.0);
        p.g1 = 0.01;
        p.g2 = 0.01;
        let r = ground_state(&EdConfig::new(3, 6, 6, p)).unwrap();
        assert!(r.ground_energy_per_atom.abs() < 1e-4);
        assert!(r.ground_energy_per_atom <= 0.0);
    }

    #[test]
    fn lanczos_matches_dense() {
        let p = reference_params().with_couplings(0.9, 0.8);
        let h = build_hamiltonian(&EdConfig::new(3, 9, 9, p)).unwrap();
        let dense = lowest_dense(&h).unwrap();
        let krylov = lowest_lanczos(&h, &EigenOptions::default()).unwrap();
        assert!((dense.value - krylov.value).abs() < 1e-9 * dense.value.abs().max(1.0));
        let overlap = dot(&dense.vector, &krylov.vector).abs();
        assert!((overlap - 1.0).abs() < 1e-8);
    }
}
