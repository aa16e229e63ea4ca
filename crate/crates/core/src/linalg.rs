//! Dense Hermitian numerics: spectral decomposition, spectral matrix functions,
//! tensor products, partial traces and Schatten norms.
//!
//! Multipartite index order is left-factor-major throughout: for `a ⊗ b` the
//! row index is `i_a * dim(b) + i_b`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Largest dimension produced by [`kron`].
pub const DIM_CAP: usize = 256;

/// Relative cutoff below which eigenvalues are treated as outside the support.
pub const SUPPORT_CUTOFF: f64 = 1e-12;

const HERMITIAN_TOL: f64 = 1e-8;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn cr(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Square complex matrix equal to its conjugate transpose.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix {
    m: CMatrix,
}

impl HermitianMatrix {
    /// Validates Hermiticity (to a loose tolerance) and symmetrizes.
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::Shape(format!(
                "expected a square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.nrows() == 0 {
            return Err(Error::Shape("empty matrix".into()));
        }
        let scale = m.iter().fold(1.0f64, |a, z| a.max(z.norm()));
        let mut dev = 0.0f64;
        for i in 0..m.nrows() {
            for j in 0..=i {
                dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
            }
        }
        if dev > HERMITIAN_TOL * scale {
            return Err(Error::Domain(format!(
                "matrix is not Hermitian (deviation {dev:.3e})"
            )));
        }
        Ok(Self::symmetrized(m))
    }

    /// Replaces `m` by `(m + m†)/2` without validation.
    pub fn symmetrized(m: CMatrix) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "square matrix required");
        let mut h = m.adjoint();
        h += &m;
        h *= cr(0.5);
        Self { m: h }
    }

    pub fn identity(d: usize) -> Self {
        Self {
            m: CMatrix::identity(d, d),
        }
    }

    pub fn zeros(d: usize) -> Self {
        Self {
            m: CMatrix::zeros(d, d),
        }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let v = CVector::from_iterator(diag.len(), diag.iter().map(|&x| cr(x)));
        Self {
            m: CMatrix::from_diagonal(&v),
        }
    }

    /// Real symmetric matrix given row by row.
    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::Shape("rows must form a square matrix".into()));
        }
        Self::new(CMatrix::from_fn(d, d, |i, j| cr(rows[i][j])))
    }

    /// Rank-one projector `|v⟩⟨v|` (no normalization applied).
    pub fn outer(v: &CVector) -> Self {
        Self {
            m: v * v.adjoint(),
        }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    pub fn trace(&self) -> f64 {
        self.m.diagonal().iter().map(|z| z.re).sum()
    }

    /// `Re tr(self · other)`, the Hilbert–Schmidt inner product.
    pub fn inner(&self, other: &HermitianMatrix) -> f64 {
        hs_inner(&self.m, &other.m)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { m: &self.m * cr(s) }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            m: &self.m + &other.m,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            m: &self.m - &other.m,
        }
    }

    /// `U · self · U†`.
    pub fn conjugate_by(&self, u: &CMatrix) -> Self {
        Self::symmetrized(u * &self.m * u.adjoint())
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (&self.m - &other.m)
            .iter()
            .fold(0.0f64, |a, z| a.max(z.norm()))
    }

    /// Sum of absolute eigenvalues.
    pub fn trace_norm(&self) -> Result<f64> {
        Ok(eigvalsh(&self.m)?.iter().map(|x| x.abs()).sum())
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(eigvalsh(&self.m)?[0])
    }

    pub fn max_eigenvalue(&self) -> Result<f64> {
        Ok(*eigvalsh(&self.m)?.last().unwrap())
    }
}

/// `Re tr(a · b)`.
pub fn hs_inner(a: &CMatrix, b: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            let x = a[(i, j)];
            let y = b[(j, i)];
            s += x.re * y.re - x.im * y.im;
        }
    }
    s
}

/// Eigen-decomposition with ascending eigenvalues.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    /// Unitary whose columns are the eigenvectors.
    pub eigenvectors: CMatrix,
}

impl Spectrum {
    pub fn max(&self) -> f64 {
        *self.eigenvalues.last().unwrap()
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// `V f(Λ) V†` for an arbitrary real map of the eigenvalues.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> HermitianMatrix {
        let vals: Vec<f64> = self.eigenvalues.iter().map(|&x| f(x)).collect();
        self.with_values(&vals)
    }

    /// `V diag(vals) V†`.
    pub fn with_values(&self, vals: &[f64]) -> HermitianMatrix {
        let v = &self.eigenvectors;
        let d = v.nrows();
        let mut scaled = v.clone();
        for (k, &fk) in vals.iter().enumerate() {
            for i in 0..d {
                scaled[(i, k)] *= fk;
            }
        }
        HermitianMatrix::symmetrized(scaled * v.adjoint())
    }

    /// Eigenvalues strictly above the relative support cutoff.
    pub fn support_threshold(&self) -> f64 {
        SUPPORT_CUTOFF * self.max().max(0.0)
    }

    /// Projector onto the eigenvectors with eigenvalue above `threshold`.
    pub fn projector_above(&self, threshold: f64) -> HermitianMatrix {
        self.map(|x| if x > threshold { 1.0 } else { 0.0 })
    }
}

/// Hermitian eigen-decomposition with ascending eigenvalues and each
/// eigenvector's first non-negligible entry made real and positive.
pub fn eigh(m: &HermitianMatrix) -> Result<Spectrum> {
    eigh_raw(m.matrix())
}

/// As [`eigh`] on a matrix assumed Hermitian (only the lower triangle is read).
pub fn eigh_raw(m: &CMatrix) -> Result<Spectrum> {
    let d = m.nrows();
    let h = CMatrix::from_fn(d, d, |i, j| if i >= j { m[(i, j)] } else { m[(j, i)].conj() });
    let (values, vectors) = match SymmetricEigen::try_new(h.clone(), f64::EPSILON, 10_000) {
        Some(eig) if decomposition_residual(&h, &eig.eigenvalues, &eig.eigenvectors) <= residual_tol(&h) => {
            (eig.eigenvalues.iter().copied().collect::<Vec<f64>>(), eig.eigenvectors)
        }
        // The tridiagonal QR path occasionally returns inaccurate eigenvectors
        // for complex matrices with tiny off-diagonal entries.
        _ => jacobi_eigh(&h)?,
    };
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut vecs = CMatrix::zeros(d, d);
    let mut vals = Vec::with_capacity(d);
    for (k, &src) in order.iter().enumerate() {
        vals.push(values[src]);
        let col = vectors.column(src);
        let pivot = col
            .iter()
            .find(|z| z.norm() > 1e-12)
            .copied()
            .unwrap_or(cr(1.0));
        let phase = pivot.conj() / pivot.norm();
        for i in 0..d {
            vecs[(i, k)] = col[i] * phase;
        }
    }
    Ok(Spectrum {
        eigenvalues: vals,
        eigenvectors: vecs,
    })
}

fn residual_tol(h: &CMatrix) -> f64 {
    1e3 * f64::EPSILON * (h.nrows().max(1) as f64) * h.norm().max(f64::MIN_POSITIVE)
}

/// `‖H V − V Λ‖_F`.
fn decomposition_residual<'a>(h: &CMatrix, values: impl IntoIterator<Item = &'a f64>, vectors: &CMatrix) -> f64 {
    let mut scaled = vectors.clone();
    for (k, &v) in values.into_iter().enumerate() {
        scaled.column_mut(k).scale_mut(v);
    }
    (h * vectors - scaled).norm()
}

/// Cyclic Jacobi diagonalization of a Hermitian matrix.
fn jacobi_eigh(h: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let d = h.nrows();
    let mut a = h.clone();
    let mut v = CMatrix::identity(d, d);
    let scale = h.norm().max(f64::MIN_POSITIVE);
    for _ in 0..100 {
        if off_diagonal_norm(&a) <= f64::EPSILON * scale {
            let values = (0..d).map(|i| a[(i, i)].re).collect();
            return Ok((values, v));
        }
        for p in 0..d {
            for q in p + 1..d {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r <= f64::MIN_POSITIVE {
                    continue;
                }
                // D = diag(1, e^{−iφ}) makes the pivot real; J is the real rotation.
                let dq = (apq / r).conj();
                let theta = (a[(q, q)].re - a[(p, p)].re) / (2.0 * r);
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;
                for k in 0..d {
                    let (kp, kq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = kp * cs - kq * dq * sn;
                    a[(k, q)] = kp * sn + kq * dq * cs;
                }
                for k in 0..d {
                    let (pk, qk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = pk * cs - qk * dq.conj() * sn;
                    a[(q, k)] = pk * sn + qk * dq.conj() * cs;
                }
                a[(p, q)] = cr(0.0);
                a[(q, p)] = cr(0.0);
                for k in 0..d {
                    let (kp, kq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = kp * cs - kq * dq * sn;
                    v[(k, q)] = kp * sn + kq * dq * cs;
                }
            }
        }
    }
    Err(Error::Convergence {
        residual: off_diagonal_norm(&a),
    })
}

/// Ascending eigenvalues only.
pub fn eigvalsh(m: &CMatrix) -> Result<Vec<f64>> {
    let mut v: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::Convergence {
            residual: off_diagonal_norm(m),
        });
    }
    v.sort_by(|a, b| a.total_cmp(b));
    Ok(v)
}

fn off_diagonal_norm(m: &CMatrix) -> f64 {
    let mut s = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if i != j {
                s += m[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Spectral calculus `V f(Λ) V†`.
///
/// With `support_only`, eigenvalues at or below `1e-12·λ_max` are sent to 0
/// without evaluating `f`. A non-finite value of `f` at a retained eigenvalue
/// is a domain error.
pub fn matrix_fn(
    m: &HermitianMatrix,
    f: impl Fn(f64) -> f64,
    support_only: bool,
) -> Result<HermitianMatrix> {
    let spec = eigh(m)?;
    spectral_fn(&spec, f, support_only)
}

/// [`matrix_fn`] on a precomputed spectrum.
pub fn spectral_fn(
    spec: &Spectrum,
    f: impl Fn(f64) -> f64,
    support_only: bool,
) -> Result<HermitianMatrix> {
    let thr = spec.support_threshold();
    let mut mapped = Vec::with_capacity(spec.eigenvalues.len());
    for &x in &spec.eigenvalues {
        if support_only && x <= thr {
            mapped.push(0.0);
            continue;
        }
        let y = f(x);
        if !y.is_finite() {
            return Err(Error::Domain(format!(
                "function undefined at eigenvalue {x:.6e}"
            )));
        }
        mapped.push(y);
    }
    Ok(spec.with_values(&mapped))
}

/// Kronecker product of general complex matrices.
pub fn kron_c(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// `a ⊗ b` subject to [`DIM_CAP`].
pub fn kron(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<HermitianMatrix> {
    kron_with_cap(a, b, DIM_CAP)
}

pub fn kron_with_cap(a: &HermitianMatrix, b: &HermitianMatrix, cap: usize) -> Result<HermitianMatrix> {
    let dim = a.dim() * b.dim();
    if dim > cap {
        return Err(Error::Size { dim, cap });
    }
    Ok(HermitianMatrix {
        m: kron_c(a.matrix(), b.matrix()),
    })
}

fn check_dims(total: usize, dims: &[usize]) -> Result<()> {
    if dims.is_empty() || dims.iter().any(|&d| d == 0) {
        return Err(Error::Shape("subsystem dimensions must be positive".into()));
    }
    let prod: usize = dims.iter().product();
    if prod != total {
        return Err(Error::Shape(format!(
            "subsystem dimensions {dims:?} multiply to {prod}, matrix has dimension {total}"
        )));
    }
    Ok(())
}

/// Trace out every subsystem not listed in `keep`.
pub fn partial_trace(m: &HermitianMatrix, dims: &[usize], keep: &[usize]) -> Result<HermitianMatrix> {
    Ok(HermitianMatrix::symmetrized(partial_trace_c(m.matrix(), dims, keep)?))
}

/// [`partial_trace`] for general square matrices. Kept subsystems retain
/// their relative order.
pub fn partial_trace_c(m: &CMatrix, dims: &[usize], keep: &[usize]) -> Result<CMatrix> {
    check_dims(m.nrows(), dims)?;
    if m.nrows() != m.ncols() {
        return Err(Error::Shape("partial trace needs a square matrix".into()));
    }
    if keep.is_empty() {
        return Err(Error::Shape("keep set must be nonempty".into()));
    }
    let mut kept = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if kept.len() != keep.len() || *kept.last().unwrap() >= dims.len() {
        return Err(Error::Shape(format!("invalid keep set {keep:?}")));
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|i| !kept.contains(i)).collect();
    let dk: usize = kept.iter().map(|&i| dims[i]).product();
    let dt: usize = traced.iter().map(|&i| dims[i]).product();

    let strides = strides(dims);
    let offsets = |sel: &[usize], mut idx: usize| -> usize {
        let mut off = 0;
        for &s in sel.iter().rev() {
            off += (idx % dims[s]) * strides[s];
            idx /= dims[s];
        }
        off
    };
    let kept_off: Vec<usize> = (0..dk).map(|i| offsets(&kept, i)).collect();
    let traced_off: Vec<usize> = (0..dt).map(|i| offsets(&traced, i)).collect();

    let mut out = CMatrix::zeros(dk, dk);
    for i in 0..dk {
        for j in 0..dk {
            let mut s = C64::new(0.0, 0.0);
            for &t in &traced_off {
                s += m[(kept_off[i] + t, kept_off[j] + t)];
            }
            out[(i, j)] = s;
        }
    }
    Ok(out)
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

/// Reorders tensor factors: output factor `k` is input factor `perm[k]`.
pub fn permute_subsystems(m: &CMatrix, dims: &[usize], perm: &[usize]) -> Result<CMatrix> {
    check_dims(m.nrows(), dims)?;
    let mut sorted = perm.to_vec();
    sorted.sort_unstable();
    if sorted != (0..dims.len()).collect::<Vec<_>>() {
        return Err(Error::Shape(format!("{perm:?} is not a permutation")));
    }
    let n = m.nrows();
    let in_strides = strides(dims);
    let out_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    // map[out_index] = in_index
    let map: Vec<usize> = (0..n)
        .map(|mut idx| {
            let mut src = 0;
            for k in (0..out_dims.len()).rev() {
                src += (idx % out_dims[k]) * in_strides[perm[k]];
                idx /= out_dims[k];
            }
            src
        })
        .collect();
    Ok(CMatrix::from_fn(n, n, |i, j| m[(map[i], map[j])]))
}

/// Schatten index.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SchattenP {
    One,
    Two,
    Inf,
}

impl SchattenP {
    pub fn from_f64(p: f64) -> Result<Self> {
        if p == 1.0 {
            Ok(Self::One)
        } else if p == 2.0 {
            Ok(Self::Two)
        } else if p.is_infinite() && p > 0.0 {
            Ok(Self::Inf)
        } else {
            Err(Error::Invalid(format!("unsupported Schatten index {p}")))
        }
    }
}

/// Schatten p-norm from the singular values.
pub fn schatten_norm(m: &CMatrix, p: SchattenP) -> f64 {
    if p == SchattenP::Two {
        return m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    }
    let sv = m.clone().singular_values();
    match p {
        SchattenP::One => sv.iter().sum(),
        SchattenP::Inf => sv.iter().fold(0.0f64, |a, &x| a.max(x)),
        SchattenP::Two => unreachable!(),
    }
}

/// Maximum entrywise deviation of `u†u` from the identity.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    if u.nrows() != u.ncols() {
        return f64::INFINITY;
    }
    let d = u.nrows();
    let g = u.adjoint() * u - CMatrix::identity(d, d);
    g.iter().fold(0.0f64, |a, z| a.max(z.norm()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn herm(rows: &[&[(f64, f64)]]) -> HermitianMatrix {
        let d = rows.len();
        HermitianMatrix::new(CMatrix::from_fn(d, d, |i, j| c(rows[i][j].0, rows[i][j].1))).unwrap()
    }

    #[test]
    fn eigh_diagonal_sorted() {
        let s = eigh(&HermitianMatrix::from_real_diagonal(&[2.0, 1.0])).unwrap();
        assert_eq!(s.eigenvalues, vec![1.0, 2.0]);
        assert!((s.eigenvectors[(1, 0)].re - 1.0).abs() < 1e-15);
        assert!((s.eigenvectors[(0, 1)].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn eigh_zero_matrix() {
        let s = eigh(&HermitianMatrix::zeros(3)).unwrap();
        assert_eq!(s.eigenvalues, vec![0.0; 3]);
    }

    #[test]
    fn eigh_pauli_x() {
        let x = herm(&[&[(0., 0.), (1., 0.)], &[(1., 0.), (0., 0.)]]);
        let s = eigh(&x).unwrap();
        assert!((s.eigenvalues[0] + 1.0).abs() < 1e-14);
        assert!((s.eigenvalues[1] - 1.0).abs() < 1e-14);
        for k in 0..2 {
            let first = s.eigenvectors[(0, k)];
            assert!(first.im.abs() < 1e-14 && first.re > 0.0);
        }
    }

    #[test]
    fn eigh_phase_convention_on_complex_input() {
        let y = herm(&[&[(0., 0.), (0., -1.)], &[(0., 1.), (0., 0.)]]);
        let s = eigh(&y).unwrap();
        for k in 0..2 {
            let first = s.eigenvectors[(0, k)];
            assert!(first.im.abs() < 1e-14 && first.re > 0.0);
        }
        let back = s.map(|x| x);
        assert!(back.max_abs_diff(&y) < 1e-14);
    }

    #[test]
    fn eigh_near_diagonal_complex_input() {
        let mut m = CMatrix::from_diagonal(&CVector::from_vec(vec![
            cr(0.6453602320703343),
            cr(0.3437135682965685),
            cr(0.0071292301224101405),
            cr(0.003796969510687039),
        ]));
        m[(2, 0)] = c(2.6020852139652106e-18, -8.673617379884035e-19);
        m[(0, 2)] = m[(2, 0)].conj();
        m[(3, 1)] = c(1.3010426069826053e-18, -4.336808689942018e-19);
        m[(1, 3)] = m[(3, 1)].conj();
        let s = eigh_raw(&m).unwrap();
        assert!(decomposition_residual(&m, &s.eigenvalues, &s.eigenvectors) < 1e-14);
    }

    #[test]
    fn jacobi_reconstructs_random_hermitian_matrices() {
        for d in 1..9 {
            let g = CMatrix::from_fn(d, d, |i, j| c(((i * 7 + j * 3) % 5) as f64 - 2.0, ((i * 2 + j * 5) % 7) as f64 - 3.0));
            let h = &g + g.adjoint();
            let (vals, vecs) = jacobi_eigh(&h).unwrap();
            assert!(decomposition_residual(&h, &vals, &vecs) < 1e-12 * h.norm().max(1.0));
            assert!((vecs.adjoint() * &vecs - CMatrix::identity(d, d)).norm() < 1e-12);
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = CMatrix::from_fn(2, 2, |i, j| cr((i + 2 * j) as f64));
        assert!(HermitianMatrix::new(m).is_err());
    }

    #[test]
    fn matrix_fn_examples() {
        let e = matrix_fn(&HermitianMatrix::zeros(2), f64::exp, false).unwrap();
        assert!(e.max_abs_diff(&HermitianMatrix::identity(2)) < 1e-15);

        let l = matrix_fn(
            &HermitianMatrix::from_real_diagonal(&[1.0, std::f64::consts::E]),
            f64::ln,
            false,
        )
        .unwrap();
        assert!(l.max_abs_diff(&HermitianMatrix::from_real_diagonal(&[0.0, 1.0])) < 1e-15);

        let inv = matrix_fn(
            &HermitianMatrix::from_real_diagonal(&[2.0 / 3.0, 1.0 / 3.0]),
            |x| x.powi(-1),
            false,
        )
        .unwrap();
        assert!(inv.max_abs_diff(&HermitianMatrix::from_real_diagonal(&[1.5, 3.0])) < 1e-14);
    }

    #[test]
    fn matrix_fn_domain_error_and_support() {
        let m = HermitianMatrix::from_real_diagonal(&[-1.0, 1.0]);
        let err = matrix_fn(&m, f64::ln, false).unwrap_err();
        assert!(err.to_string().contains("-1.0"));
        let p = HermitianMatrix::from_real_diagonal(&[0.0, 1.0]);
        let l = matrix_fn(&p, f64::ln, true).unwrap();
        assert!(l.max_abs_diff(&HermitianMatrix::zeros(2)) < 1e-15);
    }

    #[test]
    fn kron_examples() {
        let i4 = kron(&HermitianMatrix::identity(2), &HermitianMatrix::identity(2)).unwrap();
        assert!(i4.max_abs_diff(&HermitianMatrix::identity(4)) < 1e-15);
        let d = kron(
            &HermitianMatrix::from_real_diagonal(&[1.0, 0.0]),
            &HermitianMatrix::from_real_diagonal(&[0.0, 1.0]),
        )
        .unwrap();
        assert!(d.max_abs_diff(&HermitianMatrix::from_real_diagonal(&[0.0, 1.0, 0.0, 0.0])) < 1e-15);
        let t = kron(
            &HermitianMatrix::from_real_diagonal(&[1.0, 2.0]),
            &HermitianMatrix::from_real_diagonal(&[3.0, 4.0]),
        )
        .unwrap();
        assert!((t.trace() - 21.0).abs() < 1e-13);
    }

    #[test]
    fn kron_cap() {
        let a = HermitianMatrix::identity(16);
        let b = HermitianMatrix::identity(17);
        assert!(matches!(kron(&a, &b), Err(Error::Size { dim: 272, cap: 256 })));
        assert!(kron(&a, &HermitianMatrix::identity(16)).is_ok());
    }

    fn bell() -> HermitianMatrix {
        let mut v = CVector::zeros(4);
        v[0] = cr(std::f64::consts::FRAC_1_SQRT_2);
        v[3] = cr(std::f64::consts::FRAC_1_SQRT_2);
        HermitianMatrix::outer(&v)
    }

    #[test]
    fn partial_trace_examples() {
        let a = herm(&[&[(0.7, 0.), (0.1, 0.2)], &[(0.1, -0.2), (0.3, 0.)]]);
        let b = HermitianMatrix::from_real_diagonal(&[0.25, 0.75]);
        let ab = kron(&a, &b).unwrap();
        assert!(partial_trace(&ab, &[2, 2], &[0]).unwrap().max_abs_diff(&a) < 1e-15);
        assert!(partial_trace(&ab, &[2, 2], &[1]).unwrap().max_abs_diff(&b) < 1e-15);
        let pi = HermitianMatrix::from_real_diagonal(&[0.5, 0.5]);
        assert!(partial_trace(&bell(), &[2, 2], &[1]).unwrap().max_abs_diff(&pi) < 1e-15);
        assert!(partial_trace(&bell(), &[2, 2], &[0]).unwrap().max_abs_diff(&pi) < 1e-15);
        assert!(partial_trace(&bell(), &[2, 3], &[0]).is_err());
    }

    #[test]
    fn partial_trace_three_parties_matches_nested() {
        let a = HermitianMatrix::from_real_diagonal(&[0.1, 0.9]);
        let b = herm(&[
            &[(0.2, 0.), (0.05, 0.01), (0.0, 0.0)],
            &[(0.05, -0.01), (0.5, 0.), (0.1, 0.0)],
            &[(0.0, 0.0), (0.1, 0.0), (0.3, 0.)],
        ]);
        let cc = HermitianMatrix::from_real_diagonal(&[0.6, 0.4]);
        let abc = kron(&kron(&a, &b).unwrap(), &cc).unwrap();
        let ac = partial_trace(&abc, &[2, 3, 2], &[0, 2]).unwrap();
        let expect = kron(&a, &cc).unwrap().scale(b.trace());
        assert!(ac.max_abs_diff(&expect) < 1e-15);
    }

    #[test]
    fn permute_swaps_factors() {
        let a = HermitianMatrix::from_real_diagonal(&[1.0, 2.0]);
        let b = HermitianMatrix::from_real_diagonal(&[3.0, 4.0, 5.0]);
        let ab = kron(&a, &b).unwrap();
        let ba = kron(&b, &a).unwrap();
        let p = permute_subsystems(ab.matrix(), &[2, 3], &[1, 0]).unwrap();
        assert!((&p - ba.matrix()).norm() < 1e-15);
    }

    #[test]
    fn schatten_examples() {
        let m = HermitianMatrix::from_real_diagonal(&[1.0, -1.0]);
        assert!((schatten_norm(m.matrix(), SchattenP::One) - 2.0).abs() < 1e-14);
        let n = HermitianMatrix::from_real_diagonal(&[3.0, 4.0]);
        assert!((schatten_norm(n.matrix(), SchattenP::Inf) - 4.0).abs() < 1e-14);
        assert!((schatten_norm(n.matrix(), SchattenP::Two) - 5.0).abs() < 1e-14);
        assert!(SchattenP::from_f64(3.0).is_err());
    }
}
