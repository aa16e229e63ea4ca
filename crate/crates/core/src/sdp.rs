//! Dense semidefinite programming.
//!
//! Problems are stated over real scalar variables `u`:
//!
//! ```text
//! minimize    cᵀu
//! subject to  F₀ᵏ + Σᵢ uᵢ Fᵢᵏ ⪰ 0      for every block k (complex Hermitian)
//!             aⱼᵀu = bⱼ
//! ```
//!
//! with dual `maximize −Σₖ⟨F₀ᵏ, Zᵏ⟩` over `Zᵏ ⪰ 0`. Equalities are eliminated
//! through a null-space parameterization before the interior-point iteration,
//! which is an infeasible-start primal-dual path-following method with
//! Nesterov–Todd scaling and a Mehrotra corrector.
//!
//! Hermitian and rectangular complex matrix variables are expanded into real
//! scalars by [`HermitianVar`] and [`ComplexVar`].

use std::fmt::Write as _;

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen, SVD};

use crate::channels::Channel;
use crate::error::{Error, Result};
use crate::linalg::{c, cr, eigh, eigvalsh, hs_inner, kron_c, partial_trace_c, CMatrix, HermitianMatrix};
use crate::quantum::{DensityOperator, ThermalContext};

/// Upper bound on the summed block dimension of a problem.
pub const MAX_TOTAL_DIM: usize = 128;

/// Affine matrix inequality `constant + Σ uᵢ coeffᵢ ⪰ 0`.
#[derive(Clone, Debug)]
pub struct SdpBlock {
    dim: usize,
    constant: CMatrix,
    coeffs: Vec<(usize, CMatrix)>,
}

impl SdpBlock {
    pub fn new(constant: CMatrix) -> Self {
        Self {
            dim: constant.nrows(),
            constant,
            coeffs: Vec::new(),
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self::new(CMatrix::zeros(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn add_coeff(&mut self, var: usize, coeff: CMatrix) {
        if let Some(slot) = self.coeffs.iter_mut().find(|(v, _)| *v == var) {
            slot.1 += coeff;
        } else {
            self.coeffs.push((var, coeff));
        }
    }

    pub fn scalar(mut self, var: ScalarVar, coeff: CMatrix) -> Self {
        self.add_coeff(var.0, coeff);
        self
    }

    /// Adds `L(X)` for a Hermitian variable `X` and linear map `L`.
    pub fn hermitian(mut self, var: &HermitianVar, map: impl Fn(&CMatrix) -> CMatrix) -> Self {
        for k in 0..var.len() {
            let m = map(&var.basis(k));
            if m.iter().any(|z| z.norm() > 0.0) {
                self.add_coeff(var.offset + k, m);
            }
        }
        self
    }

    /// Adds `L(Y)` for a rectangular complex variable `Y`; `L` must be real-linear.
    pub fn complex(mut self, var: &ComplexVar, map: impl Fn(&CMatrix) -> CMatrix) -> Self {
        for k in 0..var.len() {
            let m = map(&var.basis(k));
            if m.iter().any(|z| z.norm() > 0.0) {
                self.add_coeff(var.offset + k, m);
            }
        }
        self
    }
}

/// Index of a real scalar variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ScalarVar(pub usize);

/// A `d×d` Hermitian matrix variable occupying `d²` consecutive scalars, in
/// an orthonormal (Hilbert–Schmidt) basis.
#[derive(Clone, Copy, Debug)]
pub struct HermitianVar {
    pub offset: usize,
    pub dim: usize,
}

impl HermitianVar {
    pub fn len(&self) -> usize {
        self.dim * self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.dim == 0
    }

    /// Basis element `k`: diagonal units first, then symmetric and
    /// antisymmetric off-diagonal pairs for each `i < j`.
    pub fn basis(&self, k: usize) -> CMatrix {
        hermitian_basis_element(self.dim, k)
    }

    pub fn value(&self, x: &[f64]) -> HermitianMatrix {
        let mut m = CMatrix::zeros(self.dim, self.dim);
        for k in 0..self.len() {
            let v = x[self.offset + k];
            if v != 0.0 {
                m += self.basis(k) * cr(v);
            }
        }
        HermitianMatrix::symmetrized(m)
    }

    /// Coefficients `(index, Re tr(C Bₖ))` of the functional `X ↦ Re tr(C X)`.
    pub fn functional(&self, cm: &CMatrix) -> Vec<(usize, f64)> {
        (0..self.len())
            .map(|k| (self.offset + k, hs_inner(cm, &self.basis(k))))
            .filter(|(_, v)| *v != 0.0)
            .collect()
    }
}

fn hermitian_basis_element(d: usize, k: usize) -> CMatrix {
    let mut m = CMatrix::zeros(d, d);
    if k < d {
        m[(k, k)] = cr(1.0);
        return m;
    }
    let mut r = k - d;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..d {
        for j in (i + 1)..d {
            if r == 0 {
                m[(i, j)] = cr(s);
                m[(j, i)] = cr(s);
                return m;
            }
            if r == 1 {
                m[(i, j)] = c(0.0, -s);
                m[(j, i)] = c(0.0, s);
                return m;
            }
            r -= 2;
        }
    }
    panic!("basis index {k} out of range for dimension {d}");
}

/// An `r×c` complex matrix variable: real parts then imaginary parts, row-major.
#[derive(Clone, Copy, Debug)]
pub struct ComplexVar {
    pub offset: usize,
    pub rows: usize,
    pub cols: usize,
}

impl ComplexVar {
    pub fn len(&self) -> usize {
        2 * self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.rows * self.cols == 0
    }

    pub fn basis(&self, k: usize) -> CMatrix {
        let n = self.rows * self.cols;
        let mut m = CMatrix::zeros(self.rows, self.cols);
        let (idx, val) = if k < n { (k, cr(1.0)) } else { (k - n, c(0.0, 1.0)) };
        m[(idx / self.cols, idx % self.cols)] = val;
        m
    }

    pub fn value(&self, x: &[f64]) -> CMatrix {
        let n = self.rows * self.cols;
        CMatrix::from_fn(self.rows, self.cols, |i, j| {
            let idx = i * self.cols + j;
            c(x[self.offset + idx], x[self.offset + n + idx])
        })
    }
}

/// `aᵀu = b`.
#[derive(Clone, Debug)]
pub struct Equality {
    pub coeffs: Vec<(usize, f64)>,
    pub rhs: f64,
}

/// A semidefinite program in the form documented at module level.
#[derive(Clone, Debug, Default)]
pub struct SdpProblem {
    objective: Vec<f64>,
    blocks: Vec<SdpBlock>,
    equalities: Vec<Equality>,
}

impl SdpProblem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn blocks(&self) -> &[SdpBlock] {
        &self.blocks
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn scalar_var(&mut self) -> ScalarVar {
        self.objective.push(0.0);
        ScalarVar(self.objective.len() - 1)
    }

    pub fn hermitian_var(&mut self, dim: usize) -> HermitianVar {
        let offset = self.objective.len();
        self.objective.resize(offset + dim * dim, 0.0);
        HermitianVar { offset, dim }
    }

    pub fn complex_var(&mut self, rows: usize, cols: usize) -> ComplexVar {
        let offset = self.objective.len();
        self.objective.resize(offset + 2 * rows * cols, 0.0);
        ComplexVar { offset, rows, cols }
    }

    pub fn add_objective(&mut self, var: usize, coeff: f64) {
        self.objective[var] += coeff;
    }

    /// Adds `Re tr(C X)` to the objective.
    pub fn add_objective_hermitian(&mut self, var: &HermitianVar, cm: &CMatrix) {
        for (k, v) in var.functional(cm) {
            self.objective[k] += v;
        }
    }

    pub fn add_block(&mut self, block: SdpBlock) {
        self.blocks.push(block);
    }

    pub fn add_equality(&mut self, coeffs: Vec<(usize, f64)>, rhs: f64) {
        self.equalities.push(Equality { coeffs, rhs });
    }

    /// Checks block shapes, Hermiticity, variable indices and the size cap.
    pub fn validate(&self) -> Result<()> {
        let m = self.num_vars();
        let total: usize = self.blocks.iter().map(|b| b.dim).sum();
        if total > MAX_TOTAL_DIM {
            return Err(Error::Size {
                dim: total,
                cap: MAX_TOTAL_DIM,
            });
        }
        for (bi, b) in self.blocks.iter().enumerate() {
            let mats = std::iter::once(&b.constant).chain(b.coeffs.iter().map(|(_, c)| c));
            for mat in mats {
                if mat.nrows() != b.dim || mat.ncols() != b.dim {
                    return Err(Error::Shape(format!("block {bi}: coefficient has wrong shape")));
                }
                let dev = (mat - mat.adjoint()).iter().fold(0.0f64, |a, z| a.max(z.norm()));
                if dev > 1e-9 * mat.iter().fold(1.0f64, |a, z| a.max(z.norm())) {
                    return Err(Error::Domain(format!("block {bi}: coefficient not Hermitian")));
                }
            }
            if b.coeffs.iter().any(|(v, _)| *v >= m) {
                return Err(Error::Shape(format!("block {bi}: variable index out of range")));
            }
        }
        if self
            .equalities
            .iter()
            .any(|e| e.coeffs.iter().any(|(v, _)| *v >= m))
        {
            return Err(Error::Shape("equality: variable index out of range".into()));
        }
        Ok(())
    }

    /// Sparse SDPA-style text: complex blocks are written through the real
    /// embedding `[[Re, −Im], [Im, Re]]`, equalities as pairs of diagonal
    /// entries, and the constant matrix negated to match SDPA's
    /// `Σ Fᵢ xᵢ − F₀ ⪰ 0` convention.
    pub fn to_sdpa_string(&self) -> String {
        let m = self.num_vars();
        let mut out = String::new();
        let _ = writeln!(out, "\"athermal sdp dump\"");
        let _ = writeln!(out, "{m}");
        let neq = self.equalities.len();
        let nblocks = self.blocks.len() + usize::from(neq > 0);
        let _ = writeln!(out, "{nblocks}");
        let mut sizes: Vec<String> = self.blocks.iter().map(|b| (2 * b.dim).to_string()).collect();
        if neq > 0 {
            sizes.push(format!("-{}", 2 * neq));
        }
        let _ = writeln!(out, "{}", sizes.join(" "));
        let _ = writeln!(
            out,
            "{}",
            self.objective.iter().map(|v| format!("{v:.17e}")).collect::<Vec<_>>().join(" ")
        );
        let emit = |out: &mut String, mat_no: usize, blk: usize, mat: &CMatrix, sign: f64| {
            let n = mat.nrows();
            for i in 0..2 * n {
                for j in i..2 * n {
                    let (a, b) = (i % n, j % n);
                    let z = mat[(a, b)];
                    let v = match (i < n, j < n) {
                        (true, true) | (false, false) => z.re,
                        (true, false) => -z.im,
                        (false, true) => z.im,
                    } * sign;
                    if v != 0.0 {
                        let _ = writeln!(out, "{mat_no} {blk} {} {} {v:.17e}", i + 1, j + 1);
                    }
                }
            }
        };
        for (bi, b) in self.blocks.iter().enumerate() {
            emit(&mut out, 0, bi + 1, &b.constant, -1.0);
            for (v, cm) in &b.coeffs {
                emit(&mut out, v + 1, bi + 1, cm, 1.0);
            }
        }
        if neq > 0 {
            let blk = self.blocks.len() + 1;
            for (k, e) in self.equalities.iter().enumerate() {
                let (p, q) = (2 * k + 1, 2 * k + 2);
                if e.rhs != 0.0 {
                    let _ = writeln!(out, "0 {blk} {p} {p} {:.17e}", e.rhs);
                    let _ = writeln!(out, "0 {blk} {q} {q} {:.17e}", -e.rhs);
                }
                for (v, a) in &e.coeffs {
                    let _ = writeln!(out, "{} {blk} {p} {p} {a:.17e}", v + 1);
                    let _ = writeln!(out, "{} {blk} {q} {q} {:.17e}", v + 1, -a);
                }
            }
        }
        out
    }
}

/// Termination status.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SdpStatus {
    Optimal,
    Infeasible,
    MaxIter,
}

/// Which side an infeasibility certificate refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Certificate {
    /// No `u` satisfies the matrix inequalities and equalities.
    PrimalInfeasible,
    /// The objective is unbounded below on the feasible set.
    DualInfeasible,
}

#[derive(Clone, Debug, Default)]
pub struct SdpDiagnostics {
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub mu: f64,
    pub certificate: Option<Certificate>,
    pub message: String,
}

#[derive(Clone, Debug)]
pub struct SdpSolution {
    /// `cᵀu` at the returned point.
    pub primal_value: f64,
    /// Dual objective at the returned dual matrices.
    pub dual_value: f64,
    pub variables: Vec<f64>,
    /// `|primal − dual| / (1 + |primal| + |dual|)`.
    pub duality_gap: f64,
    pub status: SdpStatus,
    /// Dual matrices, one per block.
    pub dual_blocks: Vec<CMatrix>,
    pub diagnostics: SdpDiagnostics,
}

impl SdpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == SdpStatus::Optimal
    }

    /// Error unless optimal.
    pub fn require_optimal(self) -> Result<Self> {
        match self.status {
            SdpStatus::Optimal => Ok(self),
            s => Err(Error::Solver(format!(
                "status {s:?} after {} iterations (gap {:.3e}, residuals {:.3e}/{:.3e}) {}",
                self.diagnostics.iterations,
                self.duality_gap,
                self.diagnostics.primal_residual,
                self.diagnostics.dual_residual,
                self.diagnostics.message
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SdpOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub step_fraction: f64,
}

impl Default for SdpOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 200,
            step_fraction: 0.98,
        }
    }
}

/// Solves with default options and the given tolerance.
pub fn solve(p: &SdpProblem, tol: f64) -> Result<SdpSolution> {
    solve_with(
        p,
        &SdpOptions {
            tol,
            ..SdpOptions::default()
        },
    )
}

pub fn solve_with(p: &SdpProblem, opts: &SdpOptions) -> Result<SdpSolution> {
    p.validate()?;
    let red = match Reduced::build(p)? {
        Ok(r) => r,
        Err(sol) => return Ok(sol),
    };
    Ok(red.finish(p, ipm(&red, opts)))
}

/// Problem after eliminating equalities: `u = u₀ + N z`.
struct Reduced {
    m: usize,
    c: Vec<f64>,
    f0: Vec<CMatrix>,
    /// `coef[j]` lists `(block, matrix)` pairs for reduced variable `j`.
    coef: Vec<Vec<(usize, CMatrix)>>,
    u0: Vec<f64>,
    null: Option<DMatrix<f64>>,
    offset: f64,
    dims: Vec<usize>,
}

impl Reduced {
    fn build(p: &SdpProblem) -> Result<std::result::Result<Self, SdpSolution>> {
        let m = p.num_vars();
        let nb = p.blocks.len();
        let dims: Vec<usize> = p.blocks.iter().map(|b| b.dim).collect();
        let mut by_var: Vec<Vec<(usize, &CMatrix)>> = vec![Vec::new(); m];
        for (k, b) in p.blocks.iter().enumerate() {
            for (v, cm) in &b.coeffs {
                by_var[*v].push((k, cm));
            }
        }
        let mut f0: Vec<CMatrix> = p.blocks.iter().map(|b| b.constant.clone()).collect();

        if p.equalities.is_empty() {
            return Ok(Ok(Self {
                m,
                c: p.objective.clone(),
                f0,
                coef: by_var
                    .into_iter()
                    .map(|l| l.into_iter().map(|(k, cm)| (k, cm.clone())).collect())
                    .collect(),
                u0: vec![0.0; m],
                null: None,
                offset: 0.0,
                dims,
            }));
        }

        let neq = p.equalities.len();
        let mut a = DMatrix::<f64>::zeros(neq, m);
        let mut b = DVector::<f64>::zeros(neq);
        for (r, e) in p.equalities.iter().enumerate() {
            for (v, x) in &e.coeffs {
                a[(r, *v)] += x;
            }
            b[r] = e.rhs;
        }
        let ata = a.transpose() * &a;
        let eig = SymmetricEigen::new(ata);
        let lam_max = eig.eigenvalues.iter().fold(0.0f64, |x, &y| x.max(y));
        let thr = 1e-12 * lam_max.max(1e-300);
        let atb = a.transpose() * &b;
        let mut u0 = DVector::<f64>::zeros(m);
        let mut null_cols = Vec::new();
        for k in 0..m {
            let v = eig.eigenvectors.column(k);
            if eig.eigenvalues[k] > thr {
                u0 += v * (v.dot(&atb) / eig.eigenvalues[k]);
            } else {
                null_cols.push(v.into_owned());
            }
        }
        let resid = (&a * &u0 - &b).norm();
        if resid > 1e-9 * (1.0 + b.norm()) {
            return Ok(Err(SdpSolution {
                primal_value: f64::INFINITY,
                dual_value: f64::INFINITY,
                variables: u0.iter().copied().collect(),
                duality_gap: f64::NAN,
                status: SdpStatus::Infeasible,
                dual_blocks: dims.iter().map(|&d| CMatrix::zeros(d, d)).collect(),
                diagnostics: SdpDiagnostics {
                    certificate: Some(Certificate::PrimalInfeasible),
                    message: format!("inconsistent equalities (residual {resid:.3e})"),
                    ..Default::default()
                },
            }));
        }
        let mr = null_cols.len();
        let n = if mr > 0 {
            DMatrix::from_columns(&null_cols)
        } else {
            DMatrix::zeros(m, 0)
        };
        for (i, list) in by_var.iter().enumerate() {
            if u0[i] != 0.0 {
                for (k, cm) in list {
                    f0[*k] += *cm * cr(u0[i]);
                }
            }
        }
        let mut coef: Vec<Vec<(usize, CMatrix)>> = Vec::with_capacity(mr);
        for j in 0..mr {
            let mut acc: Vec<Option<CMatrix>> = vec![None; nb];
            for (i, list) in by_var.iter().enumerate() {
                let w = n[(i, j)];
                if w.abs() < 1e-15 {
                    continue;
                }
                for (k, cm) in list {
                    let term = *cm * cr(w);
                    match &mut acc[*k] {
                        Some(x) => *x += term,
                        None => acc[*k] = Some(term),
                    }
                }
            }
            coef.push(
                acc.into_iter()
                    .enumerate()
                    .filter_map(|(k, x)| x.map(|x| (k, x)))
                    .collect(),
            );
        }
        let cvec = DVector::from_column_slice(&p.objective);
        let cr_vec = n.transpose() * &cvec;
        Ok(Ok(Self {
            m: mr,
            c: cr_vec.iter().copied().collect(),
            f0,
            coef,
            offset: cvec.dot(&u0),
            u0: u0.iter().copied().collect(),
            null: Some(n),
            dims,
        }))
    }

    fn full_vars(&self, z: &[f64]) -> Vec<f64> {
        match &self.null {
            None => z.to_vec(),
            Some(n) => {
                let zv = DVector::from_column_slice(z);
                let u = DVector::from_column_slice(&self.u0) + n * zv;
                u.iter().copied().collect()
            }
        }
    }

    fn finish(&self, p: &SdpProblem, r: IpmResult) -> SdpSolution {
        let variables = self.full_vars(&r.u);
        let primal_value: f64 = p.objective.iter().zip(&variables).map(|(a, b)| a * b).sum();
        let dual_value = r.dobj + self.offset;
        SdpSolution {
            primal_value,
            dual_value,
            variables,
            duality_gap: (primal_value - dual_value).abs()
                / (1.0 + primal_value.abs() + dual_value.abs()),
            status: r.status,
            dual_blocks: r.z,
            diagnostics: r.diag,
        }
    }
}

struct IpmResult {
    u: Vec<f64>,
    z: Vec<CMatrix>,
    dobj: f64,
    status: SdpStatus,
    diag: SdpDiagnostics,
}

struct Scaling {
    ls: CMatrix,
    lz: CMatrix,
    g: CMatrix,
    ginv: CMatrix,
    w: CMatrix,
    lam: Vec<f64>,
}

fn herm(m: CMatrix) -> CMatrix {
    let mut h = m.adjoint();
    h += &m;
    h * cr(0.5)
}

fn frob(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn chol(m: &CMatrix) -> Option<CMatrix> {
    Cholesky::new(m.clone()).map(|c| c.l())
}

fn nt_scaling(s: &CMatrix, z: &CMatrix) -> Option<Scaling> {
    let ls = chol(s)?;
    let lz = chol(z)?;
    let prod = ls.adjoint() * &lz;
    let svd = SVD::new(prod, true, true);
    let v = svd.v_t?.adjoint();
    let lam: Vec<f64> = svd.singular_values.iter().copied().collect();
    if lam.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
        return None;
    }
    let n = lam.len();
    let mut g = &lz * &v;
    for (k, &l) in lam.iter().enumerate() {
        let f = 1.0 / l.sqrt();
        for i in 0..n {
            g[(i, k)] *= f;
        }
    }
    let lz_inv = lz.clone().solve_lower_triangular(&CMatrix::identity(n, n))?;
    let mut ginv = v.adjoint() * lz_inv;
    for (k, &l) in lam.iter().enumerate() {
        let f = l.sqrt();
        for j in 0..n {
            ginv[(k, j)] *= f;
        }
    }
    let w = &g * g.adjoint();
    Some(Scaling {
        ls,
        lz,
        g,
        ginv,
        w,
        lam,
    })
}

/// Largest `α ≤ 1` (times the step fraction) keeping `X + αΔ ⪰ 0`, given `X = L L†`.
fn max_step(l: &CMatrix, delta: &CMatrix, frac: f64) -> f64 {
    let a = match l.clone().solve_lower_triangular(delta) {
        Some(a) => a,
        None => return 0.0,
    };
    let b = match l.clone().solve_lower_triangular(&a.adjoint()) {
        Some(b) => b,
        None => return 0.0,
    };
    let vals = match eigvalsh(&herm(b)) {
        Ok(v) => v,
        Err(_) => return 0.0,
    };
    let lmin = vals[0];
    if lmin >= 0.0 {
        1.0
    } else {
        (frac * (-1.0 / lmin)).min(1.0)
    }
}

fn ipm(red: &Reduced, opts: &SdpOptions) -> IpmResult {
    let nb = red.dims.len();
    let m = red.m;
    let n_total: usize = red.dims.iter().sum();
    let nf = n_total.max(1) as f64;

    let norm_f0: f64 = red.f0.iter().map(|f| frob(f).powi(2)).sum::<f64>().sqrt();
    let norm_c: f64 = red.c.iter().map(|x| x * x).sum::<f64>().sqrt();
    let coef_norm: Vec<f64> = red
        .coef
        .iter()
        .map(|l| l.iter().map(|(_, cm)| frob(cm).powi(2)).sum::<f64>().sqrt())
        .collect();
    // Gram matrix of the constraint coefficients, used to project dual
    // directions back onto the linearized dual equations.
    let mut gram = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let mut acc = 0.0;
            for (k, fi) in &red.coef[i] {
                if let Some((_, fj)) = red.coef[j].iter().find(|(kk, _)| kk == k) {
                    acc += hs_inner(fi, fj);
                }
            }
            gram[(i, j)] = acc;
            gram[(j, i)] = acc;
        }
    }
    let gram = SchurSolver::new(gram);

    let mut xi = 10f64.max(nf.sqrt());
    let mut eta = 10f64.max(nf.sqrt()).max(norm_f0);
    for j in 0..m {
        xi = xi.max(nf * (1.0 + red.c[j].abs()) / (1.0 + coef_norm[j]));
        eta = eta.max(coef_norm[j]);
    }

    let mut u = vec![0.0; m];
    let mut s: Vec<CMatrix> = red.dims.iter().map(|&d| CMatrix::identity(d, d) * cr(eta)).collect();
    let mut z: Vec<CMatrix> = red.dims.iter().map(|&d| CMatrix::identity(d, d) * cr(xi)).collect();

    let mut diag = SdpDiagnostics::default();
    let mut best_ok: Option<(Vec<f64>, Vec<CMatrix>, f64, SdpDiagnostics)> = None;

    let residuals = |u: &[f64], s: &[CMatrix], z: &[CMatrix]| {
        let mut rp: Vec<CMatrix> = (0..nb).map(|k| &red.f0[k] - &s[k]).collect();
        let mut rd = red.c.clone();
        for j in 0..m {
            for (k, cm) in &red.coef[j] {
                if u[j] != 0.0 {
                    rp[k.to_owned()] += cm * cr(u[j]);
                }
                rd[j] -= hs_inner(cm, &z[*k]);
            }
        }
        let pobj: f64 = red.c.iter().zip(u).map(|(a, b)| a * b).sum();
        let dobj: f64 = -(0..nb).map(|k| hs_inner(&red.f0[k], &z[k])).sum::<f64>();
        let gap_mu: f64 = (0..nb).map(|k| hs_inner(&z[k], &s[k])).sum::<f64>();
        (rp, rd, pobj, dobj, gap_mu)
    };

    for iter in 0..=opts.max_iter {
        let (rp, rd, pobj, dobj, zs) = residuals(&u, &s, &z);
        let pinf = rp.iter().map(|x| frob(x).powi(2)).sum::<f64>().sqrt() / (1.0 + norm_f0);
        let dinf = rd.iter().map(|x| x * x).sum::<f64>().sqrt() / (1.0 + norm_c);
        let po = pobj + red.offset;
        let dob = dobj + red.offset;
        let rel_gap = (po - dob).abs() / (1.0 + po.abs() + dob.abs());
        let mu = zs / nf;
        diag.iterations = iter;
        diag.primal_residual = pinf;
        diag.dual_residual = dinf;
        diag.mu = mu;

        if rel_gap <= 1e-7 && pinf <= 1e-8 && dinf <= 1e-8 {
            best_ok = Some((u.clone(), z.clone(), dobj, diag.clone()));
        }
        if rel_gap <= opts.tol && pinf <= opts.tol && dinf <= opts.tol {
            return IpmResult {
                u,
                z,
                dobj,
                status: SdpStatus::Optimal,
                diag,
            };
        }

        // Farkas certificates.
        let az: f64 = (0..m)
            .map(|j| {
                red.coef[j]
                    .iter()
                    .map(|(k, cm)| hs_inner(cm, &z[*k]))
                    .sum::<f64>()
                    .powi(2)
            })
            .sum::<f64>()
            .sqrt();
        if dobj > 0.0 && az <= 1e-7 * dobj && pinf > opts.tol {
            diag.certificate = Some(Certificate::PrimalInfeasible);
            return IpmResult {
                u,
                z,
                dobj,
                status: SdpStatus::Infeasible,
                diag,
            };
        }
        if pobj < 0.0 && dinf > opts.tol && iter > 0 {
            let mut lmin = f64::INFINITY;
            for k in 0..nb {
                let mut acc = CMatrix::zeros(red.dims[k], red.dims[k]);
                for j in 0..m {
                    if let Some((_, cm)) = red.coef[j].iter().find(|(kk, _)| *kk == k) {
                        acc += cm * cr(u[j]);
                    }
                }
                if let Ok(v) = eigvalsh(&herm(acc)) {
                    lmin = lmin.min(v[0]);
                }
            }
            if lmin >= -1e-7 * (-pobj) && -pobj > 1e3 * (1.0 + norm_c) {
                diag.certificate = Some(Certificate::DualInfeasible);
                return IpmResult {
                    u,
                    z,
                    dobj,
                    status: SdpStatus::Infeasible,
                    diag,
                };
            }
        }
        if iter == opts.max_iter {
            break;
        }

        let scal: Option<Vec<Scaling>> = (0..nb).map(|k| nt_scaling(&s[k], &z[k])).collect();
        let scal = match scal {
            Some(x) => x,
            None => {
                diag.message = "loss of positive definiteness".into();
                break;
            }
        };

        // Schur complement.
        let mut wfw: Vec<Vec<(usize, CMatrix)>> = Vec::with_capacity(m);
        for j in 0..m {
            wfw.push(
                red.coef[j]
                    .iter()
                    .map(|(k, cm)| (*k, &scal[*k].w * cm * &scal[*k].w))
                    .collect(),
            );
        }
        let mut mm = DMatrix::<f64>::zeros(m, m);
        for i in 0..m {
            for j in i..m {
                let mut acc = 0.0;
                for (k, t) in &wfw[i] {
                    if let Some((_, fj)) = red.coef[j].iter().find(|(kk, _)| kk == k) {
                        acc += hs_inner(t, fj);
                    }
                }
                mm[(i, j)] = acc;
                mm[(j, i)] = acc;
            }
        }
        let solver = SchurSolver::new(mm);
        let solver = match solver {
            Some(x) => x,
            None => {
                diag.message = "singular Schur complement".into();
                break;
            }
        };

        let wrpw: Vec<CMatrix> = (0..nb).map(|k| &scal[k].w * &rp[k] * &scal[k].w).collect();
        let direction = |rc: &[CMatrix]| -> Option<(Vec<f64>, Vec<CMatrix>, Vec<CMatrix>)> {
            let mut rhs = DVector::<f64>::zeros(m);
            for j in 0..m {
                let mut acc = -rd[j];
                for (k, cm) in &red.coef[j] {
                    acc += hs_inner(cm, &(&rc[*k] - &wrpw[*k]));
                }
                rhs[j] = acc;
            }
            let du = solver.solve(&rhs)?;
            let mut ds: Vec<CMatrix> = rp.clone();
            for j in 0..m {
                for (k, cm) in &red.coef[j] {
                    ds[*k] += cm * cr(du[j]);
                }
            }
            let ds: Vec<CMatrix> = ds.into_iter().map(herm).collect();
            let mut dz: Vec<CMatrix> = (0..nb)
                .map(|k| herm(&rc[k] - &scal[k].w * &ds[k] * &scal[k].w))
                .collect();
            if let Some(g) = &gram {
                let mut err = DVector::<f64>::zeros(m);
                for j in 0..m {
                    err[j] = rd[j] - red.coef[j].iter().map(|(k, cm)| hs_inner(cm, &dz[*k])).sum::<f64>();
                }
                if let Some(y) = g.solve(&err) {
                    for j in 0..m {
                        for (k, cm) in &red.coef[j] {
                            dz[*k] += cm * cr(y[j]);
                        }
                    }
                }
            }
            Some((du.iter().copied().collect(), ds, dz))
        };

        let rc_pred: Vec<CMatrix> = z.iter().map(|x| -x.clone()).collect();
        let (_, ds_a, dz_a) = match direction(&rc_pred) {
            Some(x) => x,
            None => {
                diag.message = "Schur solve failed".into();
                break;
            }
        };
        let step = |ds: &[CMatrix], dz: &[CMatrix]| {
            let mut ap = 1.0f64;
            let mut ad = 1.0f64;
            for k in 0..nb {
                ap = ap.min(max_step(&scal[k].ls, &ds[k], opts.step_fraction));
                ad = ad.min(max_step(&scal[k].lz, &dz[k], opts.step_fraction));
            }
            (ap, ad)
        };
        let (ap_a, ad_a) = step(&ds_a, &dz_a);
        let mu_a: f64 = (0..nb)
            .map(|k| hs_inner(&(&z[k] + &dz_a[k] * cr(ad_a)), &(&s[k] + &ds_a[k] * cr(ap_a))))
            .sum::<f64>()
            / nf;
        let expon = (3.0 * ap_a.min(ad_a).powi(2)).max(1.0);
        let sigma = if mu > 0.0 { (mu_a.max(0.0) / mu).powf(expon).min(1.0) } else { 0.0 };

        let rc_corr: Vec<CMatrix> = (0..nb)
            .map(|k| {
                let sc = &scal[k];
                let d = sc.lam.len();
                let dzt = &sc.ginv * &dz_a[k] * sc.ginv.adjoint();
                let dst = sc.g.adjoint() * &ds_a[k] * &sc.g;
                let cross = herm(&dzt * &dst);
                let mut t = CMatrix::zeros(d, d);
                for i in 0..d {
                    for j in 0..d {
                        let mut r = -cross[(i, j)];
                        if i == j {
                            r += cr(sigma * mu - sc.lam[i] * sc.lam[i]);
                        }
                        t[(i, j)] = r * cr(2.0 / (sc.lam[i] + sc.lam[j]));
                    }
                }
                &sc.g * t * sc.g.adjoint()
            })
            .collect();
        let (du, ds, dz) = match direction(&rc_corr) {
            Some(x) => x,
            None => {
                diag.message = "Schur solve failed".into();
                break;
            }
        };
        let (ap, ad) = step(&ds, &dz);
        if ap < 1e-12 && ad < 1e-12 {
            diag.message = "step length collapsed".into();
            break;
        }
        for j in 0..m {
            u[j] += ap * du[j];
        }
        for k in 0..nb {
            s[k] = herm(&s[k] + &ds[k] * cr(ap));
            z[k] = herm(&z[k] + &dz[k] * cr(ad));
        }
    }

    if let Some((u, z, dobj, diag)) = best_ok {
        return IpmResult {
            u,
            z,
            dobj,
            status: SdpStatus::Optimal,
            diag,
        };
    }
    let (_, _, _, dobj, _) = residuals(&u, &s, &z);
    IpmResult {
        u,
        z,
        dobj,
        status: SdpStatus::MaxIter,
        diag,
    }
}

enum SchurSolver {
    Chol(Cholesky<f64, nalgebra::Dyn>),
    Lu(nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>),
}

impl SchurSolver {
    fn new(mm: DMatrix<f64>) -> Option<Self> {
        if mm.nrows() == 0 {
            return Some(Self::Lu(nalgebra::LU::new(mm)));
        }
        if let Some(ch) = Cholesky::new(mm.clone()) {
            return Some(Self::Chol(ch));
        }
        let scale = mm.diagonal().iter().fold(0.0f64, |a, &b| a.max(b.abs())).max(1e-300);
        let mut reg = mm.clone();
        for i in 0..reg.nrows() {
            reg[(i, i)] += 1e-13 * scale;
        }
        if let Some(ch) = Cholesky::new(reg) {
            return Some(Self::Chol(ch));
        }
        let lu = nalgebra::LU::new(mm);
        if lu.is_invertible() {
            Some(Self::Lu(lu))
        } else {
            None
        }
    }

    fn solve(&self, b: &DVector<f64>) -> Option<DVector<f64>> {
        let x = match self {
            Self::Chol(c) => c.solve(b),
            Self::Lu(l) => {
                if b.is_empty() {
                    return Some(b.clone());
                }
                l.solve(b)?
            }
        };
        if x.iter().all(|v| v.is_finite()) {
            Some(x)
        } else {
            None
        }
    }
}

// ---------------------------------------------------------------------------
// Formulations
// ---------------------------------------------------------------------------

/// `π_R ⊗ γ` as a matrix.
fn reference_thermal(din: usize, ctx: &ThermalContext) -> CMatrix {
    let pi = CMatrix::identity(din, din) * cr(1.0 / din as f64);
    kron_c(&pi, ctx.gibbs_state().matrix().matrix())
}

fn check_ctx(n: &Channel, ctx: &ThermalContext) -> Result<()> {
    if ctx.dim() != n.dout() {
        return Err(Error::Shape(format!(
            "thermal context has dimension {}, channel output {}",
            ctx.dim(),
            n.dout()
        )));
    }
    Ok(())
}

/// `minimize λ  s.t.  λ(π⊗γ) − Φᴺ ⪰ 0, λ ≥ 0`; the logarithm of the optimum is
/// the channel max-divergence from the thermal channel. The dual matrix of the
/// first block is the maximizer `X` of `tr(Φᴺ X)` subject to `tr((π⊗γ)X) ≤ 1`.
pub fn max_free_energy_sdp(n: &Channel, ctx: &ThermalContext) -> Result<SdpSolution> {
    check_ctx(n, ctx)?;
    let sigma = reference_thermal(n.din(), ctx);
    let mut p = SdpProblem::new();
    let lam = p.scalar_var();
    p.add_objective(lam.0, 1.0);
    p.add_block(SdpBlock::new(-n.choi().matrix().matrix().clone()).scalar(lam, sigma));
    p.add_block(SdpBlock::zero(1).scalar(lam, CMatrix::identity(1, 1)));
    solve(&p, 1e-11)?.require_optimal()
}

/// `minimize tr(Λσ)  s.t.  0 ⪯ Λ ⪯ I, tr(Λρ) ≥ 1 − ε`.
pub fn hypothesis_testing_sdp(rho: &DensityOperator, sigma: &DensityOperator, eps: f64) -> Result<SdpSolution> {
    hypothesis_testing_sdp_raw(rho.matrix(), sigma.matrix(), eps)
}

pub(crate) fn hypothesis_testing_sdp_raw(
    rho: &HermitianMatrix,
    sigma: &HermitianMatrix,
    eps: f64,
) -> Result<SdpSolution> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::Domain(format!("epsilon must lie in [0, 1], got {eps}")));
    }
    let d = rho.dim();
    if sigma.dim() != d {
        return Err(Error::Shape("states of different dimension".into()));
    }
    if eps == 0.0 {
        return hypothesis_testing_sdp_exact(rho, sigma);
    }
    let mut p = SdpProblem::new();
    let lam = p.hermitian_var(d);
    p.add_objective_hermitian(&lam, sigma.matrix());
    p.add_block(SdpBlock::zero(d).hermitian(&lam, |b| b.clone()));
    p.add_block(SdpBlock::new(CMatrix::identity(d, d)).hermitian(&lam, |b| -b.clone()));
    let mut tb = SdpBlock::new(CMatrix::from_element(1, 1, cr(-(1.0 - eps))));
    tb = tb.hermitian(&lam, |b| CMatrix::from_element(1, 1, cr(hs_inner(b, rho.matrix()))));
    p.add_block(tb);
    solve(&p, 1e-8)?.require_optimal()
}

/// Zero type-I error. Feasibility forces `I − Λ` onto `ker ρ`, so the problem
/// is posed over `Λ = I − K M K†` with `K` an isometry onto `ker ρ` and
/// `0 ⪯ M ⪯ I`; without this reduction the dual optimum is not attained.
/// Reported values include the constant `tr σ`.
fn hypothesis_testing_sdp_exact(rho: &HermitianMatrix, sigma: &HermitianMatrix) -> Result<SdpSolution> {
    let d = rho.dim();
    let spec = eigh(rho)?;
    let thr = spec.support_threshold();
    let idx: Vec<usize> = (0..d).filter(|&k| spec.eigenvalues[k] <= thr).collect();
    let kdim = idx.len();
    let tr_sigma = sigma.trace();
    if kdim == 0 {
        return Ok(SdpSolution {
            primal_value: tr_sigma,
            dual_value: tr_sigma,
            variables: Vec::new(),
            duality_gap: 0.0,
            status: SdpStatus::Optimal,
            dual_blocks: Vec::new(),
            diagnostics: SdpDiagnostics::default(),
        });
    }
    let k = CMatrix::from_fn(d, kdim, |i, j| spec.eigenvectors[(i, idx[j])]);
    let sig_k = k.adjoint() * sigma.matrix() * &k;
    let mut p = SdpProblem::new();
    let mv = p.hermitian_var(kdim);
    p.add_objective_hermitian(&mv, &(-sig_k));
    p.add_block(SdpBlock::zero(kdim).hermitian(&mv, |b| b.clone()));
    p.add_block(SdpBlock::new(CMatrix::identity(d, d)).hermitian(&mv, |b| -(&k * b * k.adjoint())));
    let mut sol = solve(&p, 1e-8)?.require_optimal()?;
    sol.primal_value += tr_sigma;
    sol.dual_value += tr_sigma;
    sol.duality_gap = (sol.primal_value - sol.dual_value).abs()
        / (1.0 + sol.primal_value.abs() + sol.dual_value.abs());
    Ok(sol)
}

/// `−ln` of a hypothesis-testing optimum; optima below ten times the solver
/// tolerance are reported as `+∞`.
pub fn hypothesis_value(sol: &SdpSolution) -> f64 {
    if sol.primal_value <= 1e-7 {
        f64::INFINITY
    } else {
        -sol.primal_value.ln()
    }
}

/// Unnormalized Choi difference `Γᴺ − Γᴹ` and channel dimensions.
fn choi_difference(n: &Channel, m: &Channel) -> Result<CMatrix> {
    if n.din() != m.din() || n.dout() != m.dout() {
        return Err(Error::Shape("channels with different dimensions".into()));
    }
    Ok((n.choi().matrix().matrix() - m.choi().matrix().matrix()) * cr(n.din() as f64))
}

/// `‖N − M‖_⋄` through `½‖N − M‖_⋄ = min ‖tr_out Z‖_∞` over `Z ⪰ 0, Z ⪰ Γᴺ − Γᴹ`,
/// valid for differences of trace-preserving maps.
pub fn diamond_norm(n: &Channel, m: &Channel) -> Result<f64> {
    let j = choi_difference(n, m)?;
    let (din, dout) = (n.din(), n.dout());
    let dd = din * dout;
    if j.iter().all(|z| z.norm() == 0.0) {
        return Ok(0.0);
    }
    let mut p = SdpProblem::new();
    let mu = p.scalar_var();
    let zv = p.hermitian_var(dd);
    p.add_objective(mu.0, 1.0);
    p.add_block(
        SdpBlock::zero(din)
            .scalar(mu, CMatrix::identity(din, din))
            .hermitian(&zv, |b| -partial_trace_c(b, &[din, dout], &[0]).expect("dims")),
    );
    p.add_block(SdpBlock::new(-j).hermitian(&zv, |b| b.clone()));
    p.add_block(SdpBlock::zero(dd).hermitian(&zv, |b| b.clone()));
    let sol = solve(&p, 1e-8)?.require_optimal()?;
    Ok(2.0 * sol.primal_value.max(0.0))
}

/// Root fidelity of channels, `min_ψ √F(N(ψ), M(ψ))`, as the SDP
/// `max μ s.t. Re tr_out Q ⪰ μ I, [[Γᴺ, Q], [Q†, Γᴹ]] ⪰ 0`.
pub fn channel_root_fidelity(n: &Channel, m: &Channel) -> Result<f64> {
    if n.din() != m.din() || n.dout() != m.dout() {
        return Err(Error::Shape("channels with different dimensions".into()));
    }
    let (din, dout) = (n.din(), n.dout());
    let gn = HermitianMatrix::symmetrized(n.choi().matrix().matrix() * cr(din as f64));
    let (basis, diag) = support_basis(&gn)?;
    let r = diag.len();
    let gm = m.choi().matrix().matrix() * cr(din as f64);
    let mut p = SdpProblem::new();
    let mu = p.scalar_var();
    let y = p.complex_var(r, din * dout);
    p.add_objective(mu.0, -1.0);
    p.add_block(
        SdpBlock::zero(din)
            .scalar(mu, -CMatrix::identity(din, din))
            .complex(&y, |b| {
                let q = &basis * b;
                herm(partial_trace_c(&q, &[din, dout], &[0]).expect("dims"))
            }),
    );
    let dd = din * dout;
    let mut konst = CMatrix::zeros(r + dd, r + dd);
    for i in 0..r {
        konst[(i, i)] = cr(diag[i]);
    }
    konst.view_mut((r, r), (dd, dd)).copy_from(&gm);
    p.add_block(SdpBlock::new(konst).complex(&y, |b| off_diagonal_embed(b, r, dd)));
    let sol = solve(&p, 1e-8)?.require_optimal()?;
    Ok((-sol.primal_value).clamp(0.0, 1.0))
}

/// `[[0, B], [B†, 0]]` for an `r×s` matrix `B`.
fn off_diagonal_embed(b: &CMatrix, r: usize, s: usize) -> CMatrix {
    let mut m = CMatrix::zeros(r + s, r + s);
    m.view_mut((0, r), (r, s)).copy_from(b);
    m.view_mut((r, 0), (s, r)).copy_from(&b.adjoint());
    m
}

/// Isometry onto the support of a PSD matrix and the retained eigenvalues.
fn support_basis(m: &HermitianMatrix) -> Result<(CMatrix, Vec<f64>)> {
    let spec = eigh(m)?;
    let thr = spec.support_threshold().max(1e-14);
    let idx: Vec<usize> = (0..spec.eigenvalues.len())
        .filter(|&k| spec.eigenvalues[k] > thr)
        .collect();
    let d = m.dim();
    let v = CMatrix::from_fn(d, idx.len(), |i, j| spec.eigenvectors[(i, idx[j])]);
    Ok((v, idx.iter().map(|&k| spec.eigenvalues[k]).collect()))
}

/// Radius convention for channel smoothing balls.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SmoothingBall {
    /// `½‖N − E‖_⋄ ≤ ε`.
    #[default]
    Diamond,
    /// `√(1 − F(N, E)) ≤ ε` with the worst-case channel fidelity.
    Purified,
}

/// `inf ln λ` over channels `E` in the ε-ball around `N` with
/// `Φᴱ ⪯ λ(π⊗γ)`.
pub fn smoothed_channel_max_div(n: &Channel, ctx: &ThermalContext, eps: f64) -> Result<f64> {
    smoothed_channel_max_div_with(n, ctx, eps, SmoothingBall::Diamond)
}

pub fn smoothed_channel_max_div_with(
    n: &Channel,
    ctx: &ThermalContext,
    eps: f64,
    ball: SmoothingBall,
) -> Result<f64> {
    check_ctx(n, ctx)?;
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::Domain(format!("epsilon must lie in [0, 1), got {eps}")));
    }
    let exact = max_free_energy_sdp(n, ctx)?.primal_value.ln();
    if eps == 0.0 {
        return Ok(exact);
    }
    let (din, dout) = (n.din(), n.dout());
    let dd = din * dout;
    let sigma = reference_thermal(din, ctx);
    let mut p = SdpProblem::new();
    let lam = p.scalar_var();
    let e = p.hermitian_var(dd);
    p.add_objective(lam.0, 1.0);
    // Trace preservation of E: tr_out Φᴱ = π_R.
    let rb = HermitianVar { offset: 0, dim: din };
    for k in 0..rb.len() {
        let bk = rb.basis(k);
        let lifted = kron_c(&bk, &CMatrix::identity(dout, dout));
        let rhs = bk.trace().re / din as f64;
        p.add_equality(e.functional(&lifted), rhs);
    }
    p.add_block(SdpBlock::zero(dd).scalar(lam, sigma).hermitian(&e, |b| -b.clone()));
    p.add_block(SdpBlock::zero(dd).hermitian(&e, |b| b.clone()));
    let scale = din as f64;
    match ball {
        SmoothingBall::Diamond => {
            let zv = p.hermitian_var(dd);
            let gn = n.choi().matrix().matrix() * cr(scale);
            p.add_block(
                SdpBlock::new(-gn)
                    .hermitian(&zv, |b| b.clone())
                    .hermitian(&e, |b| b * cr(scale)),
            );
            p.add_block(SdpBlock::zero(dd).hermitian(&zv, |b| b.clone()));
            p.add_block(
                SdpBlock::new(CMatrix::identity(din, din) * cr(eps))
                    .hermitian(&zv, |b| -partial_trace_c(b, &[din, dout], &[0]).expect("dims")),
            );
        }
        SmoothingBall::Purified => {
            let gn = HermitianMatrix::symmetrized(n.choi().matrix().matrix() * cr(scale));
            let (basis, diag) = support_basis(&gn)?;
            let r = diag.len();
            let y = p.complex_var(r, dd);
            let target = (1.0 - eps * eps).sqrt();
            p.add_block(
                SdpBlock::new(-CMatrix::identity(din, din) * cr(target)).complex(&y, |b| {
                    herm(partial_trace_c(&(&basis * b), &[din, dout], &[0]).expect("dims"))
                }),
            );
            let mut konst = CMatrix::zeros(r + dd, r + dd);
            for i in 0..r {
                konst[(i, i)] = cr(diag[i]);
            }
            p.add_block(
                SdpBlock::new(konst)
                    .complex(&y, |b| off_diagonal_embed(b, r, dd))
                    .hermitian(&e, |b| {
                        let mut m = CMatrix::zeros(r + dd, r + dd);
                        m.view_mut((r, r), (dd, dd)).copy_from(&(b * cr(scale)));
                        m
                    }),
            );
        }
    }
    let sol = solve(&p, 1e-8)?.require_optimal()?;
    Ok(sol.primal_value.ln().min(exact))
}

/// `inf ln λ` over subnormalized `ω` with `√(1 − ‖√ρ√ω‖₁²) ≤ ε` and `ω ⪯ λσ`.
///
/// `ω` is restricted to the support of `σ`, which leaves the fidelity with `ρ`
/// unchanged once `ρ` is compressed to that support.
pub fn smoothed_max_rel_entropy_sdp(rho: &HermitianMatrix, sigma: &HermitianMatrix, eps: f64) -> Result<f64> {
    let (us, sdiag) = support_basis(sigma)?;
    let s = sdiag.len();
    let rho_s = HermitianMatrix::symmetrized(us.adjoint() * rho.matrix() * &us);
    let (wr, rdiag) = support_basis(&rho_s)?;
    let r = rdiag.len();
    if r == 0 {
        return Ok(f64::INFINITY);
    }
    let sig_s = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(s, sdiag.iter().map(|&x| cr(x))));
    let mut p = SdpProblem::new();
    let lam = p.scalar_var();
    let om = p.hermitian_var(s);
    let y = p.complex_var(r, s);
    p.add_objective(lam.0, 1.0);
    p.add_block(SdpBlock::zero(s).scalar(lam, sig_s).hermitian(&om, |b| -b.clone()));
    let mut konst = CMatrix::zeros(r + s, r + s);
    for i in 0..r {
        konst[(i, i)] = cr(rdiag[i]);
    }
    p.add_block(
        SdpBlock::new(konst)
            .complex(&y, |b| off_diagonal_embed(b, r, s))
            .hermitian(&om, |b| {
                let mut m = CMatrix::zeros(r + s, r + s);
                m.view_mut((r, r), (s, s)).copy_from(b);
                m
            }),
    );
    p.add_block(
        SdpBlock::new(CMatrix::identity(1, 1))
            .hermitian(&om, |b| CMatrix::from_element(1, 1, -b.trace())),
    );
    let target = (1.0 - eps * eps).sqrt();
    p.add_block(
        SdpBlock::new(CMatrix::from_element(1, 1, cr(-target)))
            .complex(&y, |b| CMatrix::from_element(1, 1, cr((&wr * b).trace().re))),
    );
    let sol = solve(&p, 1e-8)?;
    match sol.status {
        SdpStatus::Infeasible => Ok(f64::INFINITY),
        _ => Ok(sol.require_optimal()?.primal_value.ln()),
    }
}

/// Optimal input and effect for the channel hypothesis-testing problem.
#[derive(Clone, Debug)]
pub struct ChannelTest {
    /// `min tr(Λ M(ψ))` over inputs and effects with `tr(Λ N(ψ)) ≥ 1 − ε`.
    pub min_error: f64,
    /// Reference marginal `ψ_R` of the optimal input.
    pub input: DensityOperator,
    pub solution: SdpSolution,
}

/// Channel hypothesis testing as one SDP over the reference marginal `ρ` and
/// `Y = (√ρ ⊗ I) Λ (√ρ ⊗ I)`:
///
/// ```text
/// minimize tr(Y Γᴹ)  s.t.  tr(Y Γᴺ) ≥ 1 − ε,  0 ⪯ Y ⪯ ρ ⊗ I,  ρ ⪰ 0,  tr ρ = 1
/// ```
///
/// `gamma_m` is the unnormalized Choi operator of the alternative map, which
/// need not be trace preserving.
pub fn channel_hypothesis_sdp(n: &Channel, gamma_m: &HermitianMatrix, eps: f64) -> Result<ChannelTest> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::Domain(format!("epsilon must lie in [0, 1], got {eps}")));
    }
    let (din, dout) = (n.din(), n.dout());
    let dd = din * dout;
    if gamma_m.dim() != dd {
        return Err(Error::Shape(format!("alternative Choi operator of dimension {}, expected {dd}", gamma_m.dim())));
    }
    let gn = HermitianMatrix::symmetrized(n.choi_operator());
    let gm = gamma_m.matrix();
    let eye_out = CMatrix::identity(dout, dout);
    let mut p = SdpProblem::new();
    let rho = p.hermitian_var(din);
    p.add_equality(rho.functional(&CMatrix::identity(din, din)), 1.0);
    p.add_block(SdpBlock::zero(din).hermitian(&rho, |b| b.clone()));
    let y_of: Box<dyn Fn(&[f64]) -> HermitianMatrix>;
    if eps == 0.0 {
        // Y = ρ ⊗ I − K M K† with K spanning ker Γᴺ.
        let (kernel, _) = kernel_basis(&gn)?;
        let kd = kernel.ncols();
        let tr_m = partial_trace_c(gm, &[din, dout], &[0])?;
        if kd == 0 {
            // Λ = I is forced; the best input sits on the bottom of tr_out Γᴹ.
            let spec = eigh(&HermitianMatrix::symmetrized(tr_m))?;
            let v = spec.eigenvectors.column(0).into_owned();
            return Ok(ChannelTest {
                min_error: spec.eigenvalues[0].max(0.0),
                input: DensityOperator::normalized(HermitianMatrix::symmetrized(&v * v.adjoint()))?,
                solution: SdpSolution {
                    primal_value: spec.eigenvalues[0],
                    dual_value: spec.eigenvalues[0],
                    variables: Vec::new(),
                    duality_gap: 0.0,
                    status: SdpStatus::Optimal,
                    dual_blocks: Vec::new(),
                    diagnostics: SdpDiagnostics::default(),
                },
            });
        }
        let mv = p.hermitian_var(kd);
        p.add_objective_hermitian(&rho, &tr_m);
        p.add_objective_hermitian(&mv, &(-(kernel.adjoint() * gm * &kernel)));
        p.add_block(SdpBlock::zero(kd).hermitian(&mv, |b| b.clone()));
        let ker = kernel.clone();
        p.add_block(
            SdpBlock::zero(dd)
                .hermitian(&rho, |b| kron_c(b, &eye_out))
                .hermitian(&mv, |b| -(&ker * b * ker.adjoint())),
        );
        y_of = Box::new(move |x: &[f64]| {
            let r = rho.value(x);
            let m = mv.value(x);
            HermitianMatrix::symmetrized(kron_c(r.matrix(), &CMatrix::identity(dout, dout)) - &kernel * m.matrix() * kernel.adjoint())
        });
    } else {
        let yv = p.hermitian_var(dd);
        p.add_objective_hermitian(&yv, gm);
        p.add_block(SdpBlock::zero(dd).hermitian(&yv, |b| b.clone()));
        p.add_block(
            SdpBlock::zero(dd)
                .hermitian(&rho, |b| kron_c(b, &eye_out))
                .hermitian(&yv, |b| -b.clone()),
        );
        let gnm = gn.matrix().clone();
        p.add_block(
            SdpBlock::new(CMatrix::from_element(1, 1, cr(-(1.0 - eps))))
                .hermitian(&yv, |b| CMatrix::from_element(1, 1, cr(hs_inner(b, &gnm)))),
        );
        y_of = Box::new(move |x: &[f64]| yv.value(x));
    }
    let sol = solve(&p, 1e-8)?.require_optimal()?;
    let r = rho.value(&sol.variables);
    let input = DensityOperator::normalized(eigh(&r)?.map(|x| x.max(0.0)))?;
    let y = y_of(&sol.variables);
    let min_error = y.inner(gamma_m).max(0.0);
    Ok(ChannelTest {
        min_error,
        input,
        solution: sol,
    })
}

/// Isometry onto the kernel of a PSD matrix.
fn kernel_basis(m: &HermitianMatrix) -> Result<(CMatrix, Vec<f64>)> {
    let spec = eigh(m)?;
    let thr = spec.support_threshold().max(1e-14);
    let idx: Vec<usize> = (0..spec.eigenvalues.len())
        .filter(|&k| spec.eigenvalues[k] <= thr)
        .collect();
    let d = m.dim();
    let v = CMatrix::from_fn(d, idx.len(), |i, j| spec.eigenvectors[(i, idx[j])]);
    Ok((v, idx.iter().map(|&k| spec.eigenvalues[k]).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigenvalue_as_sdp() {
        let mut p = SdpProblem::new();
        let lam = p.scalar_var();
        p.add_objective(lam.0, 1.0);
        p.add_block(
            SdpBlock::new(-HermitianMatrix::from_real_diagonal(&[1.0, 2.0]).into_matrix())
                .scalar(lam, CMatrix::identity(2, 2)),
        );
        let sol = solve(&p, 1e-8).unwrap();
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert!((sol.primal_value - 2.0).abs() < 1e-7);
        assert!((sol.dual_value - 2.0).abs() < 1e-7);
        assert!(sol.duality_gap <= 1e-7);
    }

    #[test]
    fn infeasible_block() {
        let mut p = SdpProblem::new();
        p.add_block(SdpBlock::new(-CMatrix::identity(2, 2)));
        let sol = solve(&p, 1e-8).unwrap();
        assert_eq!(sol.status, SdpStatus::Infeasible);
        assert_eq!(sol.diagnostics.certificate, Some(Certificate::PrimalInfeasible));
    }

    #[test]
    fn infeasible_with_variables() {
        // x ≥ 1 and x ≤ −1.
        let mut p = SdpProblem::new();
        let x = p.scalar_var();
        p.add_objective(x.0, 1.0);
        p.add_block(SdpBlock::new(CMatrix::from_element(1, 1, cr(-1.0))).scalar(x, CMatrix::identity(1, 1)));
        p.add_block(SdpBlock::new(CMatrix::from_element(1, 1, cr(-1.0))).scalar(x, -CMatrix::identity(1, 1)));
        let sol = solve(&p, 1e-8).unwrap();
        assert_eq!(sol.status, SdpStatus::Infeasible);
    }

    #[test]
    fn unbounded_detected() {
        let mut p = SdpProblem::new();
        let x = p.scalar_var();
        p.add_objective(x.0, -1.0);
        p.add_block(SdpBlock::zero(1).scalar(x, CMatrix::identity(1, 1)));
        let sol = solve(&p, 1e-8).unwrap();
        assert_eq!(sol.status, SdpStatus::Infeasible);
        assert_eq!(sol.diagnostics.certificate, Some(Certificate::DualInfeasible));
    }

    #[test]
    fn ground_state_with_trace_equality() {
        let mut p = SdpProblem::new();
        let rho = p.hermitian_var(2);
        p.add_objective_hermitian(&rho, HermitianMatrix::from_real_diagonal(&[0.0, 1.0]).matrix());
        p.add_block(SdpBlock::zero(2).hermitian(&rho, |b| b.clone()));
        p.add_equality(rho.functional(&CMatrix::identity(2, 2)), 1.0);
        let sol = solve(&p, 1e-8).unwrap();
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert!(sol.primal_value.abs() < 1e-7);
        let r = rho.value(&sol.variables);
        assert!((r.trace() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn inconsistent_equalities_are_infeasible() {
        let mut p = SdpProblem::new();
        let x = p.scalar_var();
        p.add_block(SdpBlock::zero(1).scalar(x, CMatrix::identity(1, 1)));
        p.add_equality(vec![(x.0, 1.0)], 1.0);
        p.add_equality(vec![(x.0, 2.0)], 3.0);
        assert_eq!(solve(&p, 1e-8).unwrap().status, SdpStatus::Infeasible);
    }

    #[test]
    fn hermitian_basis_is_orthonormal() {
        let v = HermitianVar { offset: 0, dim: 3 };
        for a in 0..9 {
            for b in 0..9 {
                let ip = hs_inner(&v.basis(a), &v.basis(b));
                assert!((ip - if a == b { 1.0 } else { 0.0 }).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn sdpa_dump_lists_every_block() {
        let mut p = SdpProblem::new();
        let lam = p.scalar_var();
        p.add_objective(lam.0, 1.0);
        p.add_block(SdpBlock::new(-CMatrix::identity(2, 2)).scalar(lam, CMatrix::identity(2, 2)));
        p.add_equality(vec![(lam.0, 1.0)], 3.0);
        let text = p.to_sdpa_string();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[1], "1");
        assert_eq!(lines[2], "2");
        assert_eq!(lines[3], "4 -2");
        assert!(text.contains("0 1 1 1 1.0"));
    }
}
