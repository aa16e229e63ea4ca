//! State divergences: Umegaki, sandwiched Rényi, max, hypothesis testing,
//! fidelity-based distances and smoothed max.
//!
//! Public entry points take validated [`DensityOperator`]s. The `*_raw`
//! variants accept plain PSD matrices and skip validation; they are used in
//! optimizer inner loops.

use crate::error::{Error, Result};
use crate::linalg::{cr, eigh, schatten_norm, spectral_fn, CMatrix, HermitianMatrix, SchattenP, Spectrum};
use crate::quantum::{entropy_of_spectrum, DensityOperator};
use crate::sdp;

/// Weight of `ρ` on the kernel of `σ` above which divergences are infinite.
const KERNEL_WEIGHT_TOL: f64 = 1e-12;

/// Which divergence to evaluate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DivergenceKind {
    Umegaki,
    /// Sandwiched Rényi with `α ∈ [1/2, 1) ∪ (1, ∞)`.
    Renyi(f64),
    Max,
    /// Hypothesis testing at type-I error `ε ∈ [0, 1]`.
    Hypothesis(f64),
    /// Max divergence smoothed over a ball of radius `ε ∈ [0, 1)`.
    SmoothedMax(f64),
}

impl DivergenceKind {
    /// Sandwiched Rényi of order `α`; `α = 1` gives Umegaki and `α = ∞` gives max.
    pub fn renyi(alpha: f64) -> Result<Self> {
        if alpha == 1.0 {
            return Ok(Self::Umegaki);
        }
        if alpha == f64::INFINITY {
            return Ok(Self::Max);
        }
        let k = Self::Renyi(alpha);
        k.validate()?;
        Ok(k)
    }

    pub fn hypothesis(eps: f64) -> Result<Self> {
        let k = Self::Hypothesis(eps);
        k.validate()?;
        Ok(k)
    }

    pub fn smoothed_max(eps: f64) -> Result<Self> {
        let k = Self::SmoothedMax(eps);
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Renyi(a) => check_alpha(a),
            Self::Hypothesis(e) => check_eps(e, true),
            Self::SmoothedMax(e) => check_eps(e, false),
            _ => Ok(()),
        }
    }

    /// Short label used in reports.
    pub fn label(&self) -> String {
        match self {
            Self::Umegaki => "umegaki".into(),
            Self::Renyi(a) => format!("renyi({a})"),
            Self::Max => "max".into(),
            Self::Hypothesis(e) => format!("hypothesis({e})"),
            Self::SmoothedMax(e) => format!("smoothed_max({e})"),
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha >= 0.5) || alpha == 1.0 || !alpha.is_finite() {
        return Err(Error::Domain(format!(
            "Rényi order must lie in [1/2, 1) ∪ (1, ∞), got {alpha}"
        )));
    }
    Ok(())
}

fn check_eps(eps: f64, allow_one: bool) -> Result<()> {
    let ok = if allow_one {
        (0.0..=1.0).contains(&eps)
    } else {
        (0.0..1.0).contains(&eps)
    };
    if !ok {
        return Err(Error::Domain(format!("epsilon out of range: {eps}")));
    }
    Ok(())
}

fn check_dims(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::Shape(format!(
            "operands of dimension {} and {}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(())
}

fn check_psd(sigma: &HermitianMatrix) -> Result<Spectrum> {
    let spec = eigh(sigma)?;
    let tol = 1e-10 * spec.max().abs().max(1.0);
    if spec.min() < -tol {
        return Err(Error::Domain(format!(
            "second argument has negative eigenvalue {:.3e}",
            spec.min()
        )));
    }
    Ok(spec)
}

/// `tr(P_ker(σ) ρ)` with the kernel taken below the support cutoff.
fn kernel_weight(rho: &HermitianMatrix, sigma: &Spectrum) -> f64 {
    let thr = sigma.support_threshold();
    let v = &sigma.eigenvectors;
    let mut w = 0.0;
    for (k, &x) in sigma.eigenvalues.iter().enumerate() {
        if x <= thr {
            let col = v.column(k);
            w += (col.adjoint() * rho.matrix() * col)[(0, 0)].re;
        }
    }
    w
}

fn off_support(rho: &HermitianMatrix, sigma: &Spectrum) -> bool {
    kernel_weight(rho, sigma) > KERNEL_WEIGHT_TOL * rho.trace().abs().max(1e-300)
}

/// Umegaki relative entropy `tr ρ(ln ρ − ln σ)`, `+∞` off support.
///
/// `σ` must be PSD; unless `allow_unnormalized` is set it must also have unit
/// trace.
pub fn rel_entropy(rho: &DensityOperator, sigma: &HermitianMatrix, allow_unnormalized: bool) -> Result<f64> {
    check_dims(rho.matrix(), sigma)?;
    let spec = check_psd(sigma)?;
    if !allow_unnormalized && (sigma.trace() - 1.0).abs() > 1e-10 {
        return Err(Error::Invalid(format!(
            "second argument has trace {:.12}; pass allow_unnormalized for operators",
            sigma.trace()
        )));
    }
    rel_entropy_spec(rho.matrix(), &spec)
}

pub(crate) fn rel_entropy_raw(rho: &HermitianMatrix, sigma: &HermitianMatrix) -> Result<f64> {
    rel_entropy_spec(rho, &eigh(sigma)?)
}

fn rel_entropy_spec(rho: &HermitianMatrix, sigma: &Spectrum) -> Result<f64> {
    if off_support(rho, sigma) {
        return Ok(f64::INFINITY);
    }
    let log_sigma = spectral_fn(sigma, f64::ln, true)?;
    let rho_spec = eigh(rho)?;
    Ok(-entropy_of_spectrum(&rho_spec.eigenvalues) - rho.inner(&log_sigma))
}

/// `ln ‖σ^{−1/2} ρ σ^{−1/2}‖_∞` with the inverse taken on the support of `σ`.
pub fn max_rel_entropy(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    check_dims(rho.matrix(), sigma.matrix())?;
    max_rel_entropy_raw(rho.matrix(), sigma.matrix())
}

pub(crate) fn max_rel_entropy_raw(rho: &HermitianMatrix, sigma: &HermitianMatrix) -> Result<f64> {
    let spec = eigh(sigma)?;
    if off_support(rho, &spec) {
        return Ok(f64::INFINITY);
    }
    let inv_sqrt = spectral_fn(&spec, |x| 1.0 / x.sqrt(), true)?;
    let m = HermitianMatrix::symmetrized(inv_sqrt.matrix() * rho.matrix() * inv_sqrt.matrix());
    let top = m.max_eigenvalue()?;
    Ok(if top > 0.0 { top.ln() } else { f64::NEG_INFINITY })
}

/// `(α−1)⁻¹ ln tr[(σ^{(1−α)/2α} ρ σ^{(1−α)/2α})^α]`.
pub fn sandwiched_renyi(rho: &DensityOperator, sigma: &DensityOperator, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_dims(rho.matrix(), sigma.matrix())?;
    sandwiched_renyi_raw(rho.matrix(), sigma.matrix(), alpha)
}

pub(crate) fn sandwiched_renyi_raw(rho: &HermitianMatrix, sigma: &HermitianMatrix, alpha: f64) -> Result<f64> {
    let spec = eigh(sigma)?;
    if alpha > 1.0 && off_support(rho, &spec) {
        return Ok(f64::INFINITY);
    }
    // Nonzero spectrum of σ^p ρ σ^p through the Gram matrix A† σ^{2p} A with
    // ρ = A A† on its numerical support, which keeps rounding-level
    // eigenvalues of ρ out of the fractional power.
    let p = (1.0 - alpha) / alpha;
    let s2p = spectral_fn(&spec, |x| x.powf(p), true)?;
    let rs = eigh(rho)?;
    let cut = rs.support_threshold();
    let keep: Vec<usize> = (0..rs.eigenvalues.len()).filter(|&i| rs.eigenvalues[i] > cut).collect();
    let a = CMatrix::from_fn(rho.dim(), keep.len(), |r, j| {
        rs.eigenvectors[(r, keep[j])] * cr(rs.eigenvalues[keep[j]].sqrt())
    });
    let m = HermitianMatrix::symmetrized(a.adjoint() * s2p.matrix() * &a);
    let q: f64 = eigh(&m)?
        .eigenvalues
        .iter()
        .map(|&x| x.max(0.0).powf(alpha))
        .sum();
    if q <= 0.0 {
        return Ok(if alpha < 1.0 { f64::INFINITY } else { f64::NEG_INFINITY });
    }
    Ok(q.ln() / (alpha - 1.0))
}

/// Optimal test for the hypothesis-testing divergence.
#[derive(Clone, Debug)]
pub struct HypothesisTest {
    /// `−ln tr(Λσ)`.
    pub value: f64,
    /// Optimal effect `0 ⪯ Λ ⪯ I` with `tr(Λρ) = 1 − ε`.
    pub test: HermitianMatrix,
}

/// `−ln min{tr Λσ : 0 ⪯ Λ ⪯ I, tr Λρ ≥ 1 − ε}` by the Neyman–Pearson construction.
pub fn hypothesis_testing(rho: &DensityOperator, sigma: &DensityOperator, eps: f64) -> Result<HypothesisTest> {
    check_eps(eps, true)?;
    check_dims(rho.matrix(), sigma.matrix())?;
    hypothesis_testing_raw(rho.matrix(), sigma.matrix(), eps)
}

/// Projector onto eigenvalues of `(1−s)ρ − sσ` above a relative threshold,
/// and its weight under `ρ`.
fn np_projector(rho: &HermitianMatrix, sigma: &HermitianMatrix, scales: (f64, f64), s: f64) -> Result<(HermitianMatrix, f64)> {
    let k = rho.scale(1.0 - s).sub(&sigma.scale(s));
    let spec = eigh(&k)?;
    let tau = 1e-12 * ((1.0 - s) * scales.0 + s * scales.1);
    let p = spec.projector_above(tau);
    let f = p.inner(rho);
    Ok((p, f))
}

pub(crate) fn hypothesis_testing_raw(rho: &HermitianMatrix, sigma: &HermitianMatrix, eps: f64) -> Result<HypothesisTest> {
    let d = rho.dim();
    if eps >= 1.0 {
        return Ok(HypothesisTest {
            value: f64::INFINITY,
            test: HermitianMatrix::zeros(d),
        });
    }
    let target = 1.0 - eps;
    let sspec = eigh(sigma)?;
    let thr = sspec.support_threshold();
    let ker = sspec.map(|x| if x <= thr { 1.0 } else { 0.0 });
    if ker.inner(rho) >= target {
        return Ok(HypothesisTest {
            value: f64::INFINITY,
            test: ker,
        });
    }
    let scales = (rho.max_eigenvalue()?.max(0.0), sspec.max().max(0.0));
    let finish = |test: HermitianMatrix| -> HypothesisTest {
        let t = test.inner(sigma);
        HypothesisTest {
            value: if t > 0.0 { -t.ln() } else { f64::INFINITY },
            test,
        }
    };

    let (p0, f0) = np_projector(rho, sigma, scales, 0.0)?;
    if f0 <= target {
        return Ok(finish(p0));
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let (mut p_lo, mut f_lo) = (p0, f0);
    let (mut p_hi, mut f_hi) = np_projector(rho, sigma, scales, 1.0)?;
    for _ in 0..60 {
        if hi - lo <= 1e-13 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let (p, f) = np_projector(rho, sigma, scales, mid)?;
        if f >= target {
            lo = mid;
            p_lo = p;
            f_lo = f;
        } else {
            hi = mid;
            p_hi = p;
            f_hi = f;
        }
    }
    let q = if f_lo - f_hi > 0.0 {
        ((target - f_hi) / (f_lo - f_hi)).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(finish(p_lo.scale(q).add(&p_hi.scale(1.0 - q))))
}

/// `F(ρ, σ) = ‖√ρ √σ‖₁²`.
pub fn fidelity(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    check_dims(rho.matrix(), sigma.matrix())?;
    Ok(fidelity_raw(rho.matrix(), sigma.matrix())?.clamp(0.0, 1.0))
}

pub(crate) fn fidelity_raw(rho: &HermitianMatrix, sigma: &HermitianMatrix) -> Result<f64> {
    let sqrt = |m: &HermitianMatrix| spectral_fn(&eigh(m)?, |x| x.max(0.0).sqrt(), false);
    let a = sqrt(rho)?;
    let b = sqrt(sigma)?;
    Ok(schatten_norm(&(a.matrix() * b.matrix()), SchattenP::One).powi(2))
}

/// `√(1 − F(ρ, σ))`.
pub fn purified_distance(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    Ok((1.0 - fidelity(rho, sigma)?).max(0.0).sqrt())
}

/// Max divergence minimized over subnormalized `ω` within purified distance
/// `ε` of `ρ`, solved as a semidefinite program.
pub fn smoothed_max_rel_entropy(rho: &DensityOperator, sigma: &DensityOperator, eps: f64) -> Result<f64> {
    check_eps(eps, false)?;
    check_dims(rho.matrix(), sigma.matrix())?;
    smoothed_max_rel_entropy_raw(rho.matrix(), sigma.matrix(), eps)
}

pub(crate) fn smoothed_max_rel_entropy_raw(rho: &HermitianMatrix, sigma: &HermitianMatrix, eps: f64) -> Result<f64> {
    let exact = max_rel_entropy_raw(rho, sigma)?;
    if eps == 0.0 {
        return Ok(exact);
    }
    Ok(sdp::smoothed_max_rel_entropy_sdp(rho, sigma, eps)?.min(exact))
}

/// Dispatches on `kind`.
pub fn divergence(rho: &DensityOperator, sigma: &DensityOperator, kind: DivergenceKind) -> Result<f64> {
    kind.validate()?;
    check_dims(rho.matrix(), sigma.matrix())?;
    divergence_raw(rho.matrix(), sigma.matrix(), kind)
}

pub(crate) fn divergence_raw(rho: &HermitianMatrix, sigma: &HermitianMatrix, kind: DivergenceKind) -> Result<f64> {
    match kind {
        DivergenceKind::Umegaki => rel_entropy_raw(rho, sigma),
        DivergenceKind::Renyi(a) => sandwiched_renyi_raw(rho, sigma, a),
        DivergenceKind::Max => max_rel_entropy_raw(rho, sigma),
        DivergenceKind::Hypothesis(e) => Ok(hypothesis_testing_raw(rho, sigma, e)?.value),
        DivergenceKind::SmoothedMax(e) => smoothed_max_rel_entropy_raw(rho, sigma, e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::entropy;

    fn diag(v: &[f64]) -> DensityOperator {
        DensityOperator::new(HermitianMatrix::from_real_diagonal(v)).unwrap()
    }

    #[test]
    fn relative_entropy_examples() {
        let rho = diag(&[0.3, 0.7]);
        assert!(rel_entropy(&rho, rho.matrix(), false).unwrap().abs() < 1e-12);
        let v = rel_entropy(&diag(&[1.0, 0.0]), &HermitianMatrix::from_real_diagonal(&[2.0 / 3.0, 1.0 / 3.0]), false).unwrap();
        assert!((v - 1.5f64.ln()).abs() < 1e-12);
        let d = rel_entropy(&rho, &HermitianMatrix::identity(2), true).unwrap();
        assert!((d + entropy(&rho)).abs() < 1e-12);
    }

    #[test]
    fn relative_entropy_flags() {
        let rho = diag(&[0.5, 0.5]);
        assert!(rel_entropy(&rho, &HermitianMatrix::identity(2), false).is_err());
        assert!(rel_entropy(&rho, &HermitianMatrix::from_real_diagonal(&[1.5, -0.5]), true).is_err());
        let inf = rel_entropy(&rho, &HermitianMatrix::from_real_diagonal(&[1.0, 0.0]), false).unwrap();
        assert_eq!(inf, f64::INFINITY);
    }

    #[test]
    fn max_relative_entropy_examples() {
        let rho = diag(&[0.75, 0.25]);
        assert!(max_rel_entropy(&rho, &rho).unwrap().abs() < 1e-12);
        let v = max_rel_entropy(&rho, &diag(&[0.5, 0.5])).unwrap();
        assert!((v - 1.5f64.ln()).abs() < 1e-12);
        assert_eq!(max_rel_entropy(&diag(&[0.5, 0.5]), &diag(&[1.0, 0.0])).unwrap(), f64::INFINITY);
    }

    #[test]
    fn renyi_examples() {
        let rho = diag(&[0.75, 0.25]);
        let pi = diag(&[0.5, 0.5]);
        assert!(sandwiched_renyi(&rho, &rho, 2.0).unwrap().abs() < 1e-12);
        assert!((sandwiched_renyi(&rho, &pi, 2.0).unwrap() - 1.25f64.ln()).abs() < 1e-12);
        assert!((sandwiched_renyi(&rho, &pi, 100.0).unwrap() - 1.5f64.ln()).abs() < 2e-2);
        assert!(sandwiched_renyi(&rho, &pi, 1.0).is_err());
        assert!(sandwiched_renyi(&rho, &pi, 0.4).is_err());
        // Near α = 1 the classical expansion is D + (α−1)V/2 with V the
        // variance of ln(p/q) under p.
        let d = rel_entropy(&rho, pi.matrix(), false).unwrap();
        let (l0, l1) = (1.5f64.ln(), 0.5f64.ln());
        let v = 0.75 * l0 * l0 + 0.25 * l1 * l1 - d * d;
        let h = 1e-4;
        let lo = sandwiched_renyi(&rho, &pi, 1.0 - h).unwrap();
        let hi = sandwiched_renyi(&rho, &pi, 1.0 + h).unwrap();
        assert!((lo - (d - h * v / 2.0)).abs() < 1e-6);
        assert!((hi - (d + h * v / 2.0)).abs() < 1e-6);
        assert!((0.5 * (lo + hi) - d).abs() < 1e-6);
        let near = diag(&[0.52, 0.48]);
        for a in [1.0 - h, 1.0 + h] {
            let r = sandwiched_renyi(&near, &pi, a).unwrap();
            assert!((r - rel_entropy(&near, pi.matrix(), false).unwrap()).abs() < 1e-6);
        }
    }

    #[test]
    fn hypothesis_examples() {
        let rho = diag(&[0.75, 0.25]);
        let pi = diag(&[0.5, 0.5]);
        for eps in [0.0, 0.1, 0.5] {
            let t = hypothesis_testing(&rho, &rho, eps).unwrap();
            assert!((t.value + (1.0 - eps).ln()).abs() < 1e-9, "eps {eps}");
        }
        let t = hypothesis_testing(&rho, &pi, 0.25).unwrap();
        assert!((t.value - 2f64.ln()).abs() < 1e-9);
        assert!(t.test.max_abs_diff(&HermitianMatrix::from_real_diagonal(&[1.0, 0.0])) < 1e-9);
        assert_eq!(hypothesis_testing(&rho, &pi, 1.0).unwrap().value, f64::INFINITY);
        assert!(hypothesis_testing(&rho, &pi, 1.5).is_err());
    }

    #[test]
    fn hypothesis_zero_error_is_support_projection() {
        let pure = diag(&[1.0, 0.0]);
        let sigma = diag(&[0.2, 0.8]);
        let t = hypothesis_testing(&pure, &sigma, 0.0).unwrap();
        assert!((t.value + 0.2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn fidelity_examples() {
        let a = diag(&[1.0, 0.0]);
        let b = diag(&[0.0, 1.0]);
        let pi = diag(&[0.5, 0.5]);
        assert!((fidelity(&a, &a).unwrap() - 1.0).abs() < 1e-12);
        assert!(purified_distance(&a, &a).unwrap() < 1e-6);
        assert!(fidelity(&a, &b).unwrap() < 1e-12);
        assert!((purified_distance(&a, &b).unwrap() - 1.0).abs() < 1e-12);
        assert!((fidelity(&a, &pi).unwrap() - 0.5).abs() < 1e-12);
        assert!((purified_distance(&a, &pi).unwrap() - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn smoothed_max_examples() {
        let rho = diag(&[0.75, 0.25]);
        let pi = diag(&[0.5, 0.5]);
        assert_eq!(
            smoothed_max_rel_entropy(&rho, &pi, 0.0).unwrap(),
            max_rel_entropy(&rho, &pi).unwrap()
        );
        let eps = 0.2;
        let v = smoothed_max_rel_entropy(&rho, &rho, eps).unwrap();
        assert!(v <= 1e-9 && v >= -(1.0 / (1.0 - eps * eps)).ln() - 1e-9, "{v}");
    }

    #[test]
    fn kind_constructors() {
        assert_eq!(DivergenceKind::renyi(1.0).unwrap(), DivergenceKind::Umegaki);
        assert_eq!(DivergenceKind::renyi(f64::INFINITY).unwrap(), DivergenceKind::Max);
        assert!(DivergenceKind::renyi(0.3).is_err());
        assert!(DivergenceKind::hypothesis(1.0).is_ok());
        assert!(DivergenceKind::smoothed_max(1.0).is_err());
    }
}
