//! Thermodynamics of channels: channel divergences from the absolutely thermal
//! channel, the free energies built on them, channel entropy, energy and
//! mutual information, one-shot distillation and cost, and partial
//! thermalization work.
//!
//! Channel divergences are suprema over pure inputs `ψ` on `R ⊗ A'` with
//! `|R| = |A'|`. Writing `ψ = (X ⊗ I)|Γ⟩` with the coefficient matrix
//! `X[r, i] = ψ[r·|A'| + i]`, the output is `(X ⊗ I) Γᴺ (X ⊗ I)†` and the
//! reference marginal is `X X†`, which turns every objective into a smooth
//! function of `X`. The supremum is approached by multi-start Riemannian
//! gradient ascent on the unit sphere, so optimized values are lower bounds.
//! Max-divergences and hypothesis-testing divergences are computed exactly.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::channels::{
    apply_superchannel, compose, distill_superchannel, haar_unitary, is_gibbs_preserving, random_channel,
    replacer_channel, tensor, thermal_channel, unitary_channel, Channel, Superchannel,
};
use crate::error::{Error, Result};
use crate::linalg::{c, cr, eigh, kron_c, partial_trace_c, CMatrix, CVector, HermitianMatrix};
use crate::quantum::{
    entropy, entropy_of_spectrum, mutual_information, random_pure_state, split_seed, state_free_energy,
    thermal_context, DensityOperator, PureState, ThermalContext,
};
use crate::sdp::{channel_hypothesis_sdp, diamond_norm, smoothed_channel_max_div};
use crate::statediv::{
    divergence_raw, hypothesis_testing_raw, max_rel_entropy, max_rel_entropy_raw, DivergenceKind,
};

/// Relative floor below which eigenvalues are clamped inside matrix logarithms
/// used for gradients.
const LOG_FLOOR: f64 = 1e-14;

/// Consecutive steps without a resolvable increase before a restart stops.
const FLAT_LIMIT: usize = 25;

/// Gradient norm, relative to `max(1, |f|)`, still counted as converged when a
/// restart stops on a plateau at the resolution of `f`.
const NOISE_GRAD: f64 = 1e-6;

/// Settings of the multi-start sphere optimizer.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OptimizerConfig {
    pub restarts: usize,
    pub max_iters: usize,
    /// Stop once the Riemannian gradient norm is below `grad_tol · max(1, |f|)`.
    pub grad_tol: f64,
    /// Sufficient-increase constant of the Armijo rule.
    pub armijo: f64,
    /// Step shrink factor during backtracking.
    pub backtrack: f64,
    pub max_backtracks: usize,
    /// Central-difference step for objectives without analytic gradients.
    pub fd_step: f64,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            restarts: 32,
            max_iters: 2000,
            grad_tol: 1e-8,
            armijo: 1e-4,
            backtrack: 0.5,
            max_backtracks: 60,
            fd_step: 1e-6,
            seed: 42,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Invalid(format!("optimizer setting {what} out of range")));
        if self.restarts == 0 {
            return bad("restarts");
        }
        if self.max_iters == 0 {
            return bad("max_iters");
        }
        if !(self.grad_tol > 0.0) {
            return bad("grad_tol");
        }
        if !(self.armijo > 0.0 && self.armijo < 1.0) {
            return bad("armijo");
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return bad("backtrack");
        }
        if !(self.fd_step > 0.0) {
            return bad("fd_step");
        }
        Ok(())
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Outcome of an optimization over pure inputs.
#[derive(Clone, Debug)]
pub struct DivergenceResult {
    /// Best value over restarts: the maximum for suprema, the minimum for the
    /// channel entropy.
    pub value: f64,
    /// Input on `R ⊗ A'` attaining `value`.
    pub argmax_state: PureState,
    /// Whether the best restart met the gradient tolerance.
    pub converged: bool,
    pub restart_values: Vec<f64>,
}

/// Second argument of a channel divergence.
#[derive(Clone, Copy, Debug)]
pub enum Reference<'a> {
    Channel(&'a Channel),
    /// The map `X ↦ tr(X) ω` for a PSD operator `ω`, not necessarily normalized.
    Replacer(&'a HermitianMatrix),
}

// ---------------------------------------------------------------------------
// Objective plumbing
// ---------------------------------------------------------------------------

/// Maps inputs `ψ` to channel outputs and pulls output-space gradients back.
struct Pipe {
    din: usize,
    dout: usize,
    gamma: CMatrix,
    eye_out: CMatrix,
}

impl Pipe {
    fn new(n: &Channel) -> Self {
        Self {
            din: n.din(),
            dout: n.dout(),
            gamma: n.choi_operator(),
            eye_out: CMatrix::identity(n.dout(), n.dout()),
        }
    }

    fn coefficients(&self, psi: &CVector) -> CMatrix {
        let d = self.din;
        CMatrix::from_fn(d, d, |r, i| psi[r * d + i])
    }

    /// `(X ⊗ I) Γ (X ⊗ I)†`.
    fn push(&self, x: &CMatrix, gamma: &CMatrix) -> HermitianMatrix {
        let xi = kron_c(x, &self.eye_out);
        HermitianMatrix::symmetrized(&xi * gamma * xi.adjoint())
    }

    /// Euclidean gradient in `ψ` of `f` with `df = tr(G dρ)` at the output.
    fn pull(&self, x: &CMatrix, g: &CMatrix) -> CVector {
        let d = self.din;
        let xi = kron_c(x, &self.eye_out);
        let a = &self.gamma * xi.adjoint() * g;
        let b = partial_trace_c(&a, &[self.din, self.dout], &[0]).expect("consistent dimensions");
        let gx = b.adjoint() * cr(2.0);
        CVector::from_fn(d * d, |k, _| gx[(k / d, k % d)])
    }

    fn lift_r(&self, m: &CMatrix) -> CMatrix {
        kron_c(m, &self.eye_out)
    }

    fn lift_a(&self, m: &CMatrix) -> CMatrix {
        kron_c(&CMatrix::identity(self.din, self.din), m)
    }

    fn marginals(&self, rho: &HermitianMatrix) -> (HermitianMatrix, HermitianMatrix) {
        let dims = [self.din, self.dout];
        let r = partial_trace_c(rho.matrix(), &dims, &[0]).expect("consistent dimensions");
        let a = partial_trace_c(rho.matrix(), &dims, &[1]).expect("consistent dimensions");
        (HermitianMatrix::symmetrized(r), HermitianMatrix::symmetrized(a))
    }
}

/// Entropy and floored logarithm of a PSD matrix.
fn log_entropy(m: &HermitianMatrix) -> Result<(HermitianMatrix, f64)> {
    let spec = eigh(m)?;
    let floor = (LOG_FLOOR * spec.max()).max(f64::MIN_POSITIVE);
    Ok((spec.map(|x| x.max(floor).ln()), entropy_of_spectrum(&spec.eigenvalues)))
}

fn log_full_rank(m: &HermitianMatrix) -> Result<Option<HermitianMatrix>> {
    let spec = eigh(m)?;
    if spec.min() <= 1e-12 * spec.max().max(0.0) {
        return Ok(None);
    }
    Ok(Some(spec.map(f64::ln)))
}

enum Functional {
    /// `D(N(ψ) ‖ ψ_R ⊗ ω)` for full-rank `ω`.
    RelEntropyReplacer { log_omega: HermitianMatrix },
    /// `I(R;A)` of the output.
    MutualInformation,
    /// `D(N(ψ_A') ‖ γ)`.
    OutputDivergence { log_gamma: HermitianMatrix },
    /// Partial-thermalization work `β⁻¹I(R;A) + F_T(ρ_A) + β⁻¹ ln Z`.
    Work { beta: f64, h: HermitianMatrix, log_z: f64 },
    /// `tr(ρ H_RA) − tr(ψ_R H_R)`.
    Energy { h_ra: HermitianMatrix, h_r: HermitianMatrix },
    /// Sandwiched Rényi divergence, differentiated numerically. `factor` is a
    /// square root `Γᴺ = K K†` restricted to the support.
    Renyi { gamma_m: CMatrix, factor: CMatrix, alpha: f64 },
    /// Any divergence against another map, differentiated numerically.
    Generic { gamma_m: CMatrix, kind: DivergenceKind },
}

impl Functional {
    fn has_gradient(&self) -> bool {
        !matches!(self, Self::Generic { .. } | Self::Renyi { .. })
    }

    /// Value at a normalized `ψ` and, when requested and available, the
    /// output-space gradient `G`.
    fn eval(&self, pipe: &Pipe, x: &CMatrix, want_grad: bool) -> Result<(f64, Option<CMatrix>)> {
        let rho = pipe.push(x, &pipe.gamma);
        match self {
            Self::RelEntropyReplacer { log_omega } => {
                let (rr, ra) = pipe.marginals(&rho);
                let (l_rho, s_rho) = log_entropy(&rho)?;
                let (l_r, s_r) = log_entropy(&rr)?;
                let f = -s_rho + s_r - ra.inner(log_omega);
                let g = want_grad.then(|| l_rho.matrix() - pipe.lift_r(l_r.matrix()) - pipe.lift_a(log_omega.matrix()));
                Ok((f, g))
            }
            Self::MutualInformation => {
                let (rr, ra) = pipe.marginals(&rho);
                let (l_rho, s_rho) = log_entropy(&rho)?;
                let (l_r, s_r) = log_entropy(&rr)?;
                let (l_a, s_a) = log_entropy(&ra)?;
                let f = s_r + s_a - s_rho;
                let g = want_grad.then(|| l_rho.matrix() - pipe.lift_r(l_r.matrix()) - pipe.lift_a(l_a.matrix()));
                Ok((f, g))
            }
            Self::OutputDivergence { log_gamma } => {
                let (_, ra) = pipe.marginals(&rho);
                let (l_a, s_a) = log_entropy(&ra)?;
                let f = -s_a - ra.inner(log_gamma);
                let g = want_grad.then(|| pipe.lift_a(&(l_a.matrix() - log_gamma.matrix())));
                Ok((f, g))
            }
            Self::Work { beta, h, log_z } => {
                let (rr, ra) = pipe.marginals(&rho);
                let (l_rho, s_rho) = log_entropy(&rho)?;
                let (l_r, s_r) = log_entropy(&rr)?;
                let (l_a, s_a) = log_entropy(&ra)?;
                let decoupling = (s_r + s_a - s_rho) / beta;
                let quench = ra.inner(h) - s_a / beta;
                let f = decoupling + quench + log_z / beta;
                let g = want_grad.then(|| {
                    let dec = (l_rho.matrix() - pipe.lift_r(l_r.matrix()) - pipe.lift_a(l_a.matrix())) / cr(*beta);
                    let qu = pipe.lift_a(&(h.matrix() + l_a.matrix() / cr(*beta)));
                    dec + qu
                });
                Ok((f, g))
            }
            Self::Energy { h_ra, h_r } => {
                let (rr, _) = pipe.marginals(&rho);
                let f = rho.inner(h_ra) - rr.inner(h_r);
                let g = want_grad.then(|| h_ra.matrix() - pipe.lift_r(h_r.matrix()));
                Ok((f, g))
            }
            Self::Renyi { gamma_m, factor, alpha } => {
                let sigma = pipe.push(x, gamma_m);
                Ok((renyi_from_factor(pipe, x, factor, &rho, &sigma, *alpha)?, None))
            }
            Self::Generic { gamma_m, kind } => {
                let sigma = pipe.push(x, gamma_m);
                Ok((divergence_raw(&rho, &sigma, *kind)?, None))
            }
        }
    }
}

/// `Γ = K K†` with `K` spanning the support of `Γ`.
fn support_factor(gamma: &CMatrix) -> Result<CMatrix> {
    let spec = eigh(&HermitianMatrix::symmetrized(gamma.clone()))?;
    let cut = 1e-14 * spec.max().max(0.0);
    let keep: Vec<usize> = (0..spec.eigenvalues.len()).filter(|&i| spec.eigenvalues[i] > cut).collect();
    Ok(CMatrix::from_fn(gamma.nrows(), keep.len(), |r, j| {
        spec.eigenvectors[(r, keep[j])] * cr(spec.eigenvalues[keep[j]].sqrt())
    }))
}

/// Sandwiched Rényi divergence through the nonzero spectrum of
/// `A† σ^{(1−α)/α} A` with `ρ = A A†`, which avoids fractional powers of a
/// rank-deficient `ρ`.
fn renyi_from_factor(
    pipe: &Pipe,
    x: &CMatrix,
    factor: &CMatrix,
    rho: &HermitianMatrix,
    sigma: &HermitianMatrix,
    alpha: f64,
) -> Result<f64> {
    let spec = eigh(sigma)?;
    if alpha > 1.0 && spec.min() <= 1e-12 * spec.max() {
        return divergence_raw(rho, sigma, DivergenceKind::Renyi(alpha));
    }
    let s = spec.map(|v| v.max(0.0).powf((1.0 - alpha) / alpha));
    let a = pipe.lift_r(x) * factor;
    let m = HermitianMatrix::symmetrized(a.adjoint() * s.matrix() * &a);
    let q: f64 = eigh(&m)?.eigenvalues.iter().map(|&v| v.max(0.0).powf(alpha)).sum();
    Ok(q.ln() / (alpha - 1.0))
}

struct Problem<'a> {
    pipe: Pipe,
    functional: Functional,
    /// `+1` to maximize, `−1` to minimize.
    sign: f64,
    cfg: &'a OptimizerConfig,
}

struct Track {
    value: f64,
    psi: CVector,
    converged: bool,
}

fn normalize(v: &CVector) -> CVector {
    let n = v.norm();
    v / cr(n)
}

fn re_dot(a: &CVector, b: &CVector) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.re * y.re + x.im * y.im).sum()
}

impl Problem<'_> {
    fn value(&self, psi: &CVector) -> Result<f64> {
        let x = self.pipe.coefficients(psi);
        Ok(self.sign * self.functional.eval(&self.pipe, &x, false)?.0)
    }

    /// Signed value and Riemannian gradient at a normalized `ψ`.
    fn value_grad(&self, psi: &CVector) -> Result<(f64, CVector)> {
        let x = self.pipe.coefficients(psi);
        let euclid = if self.functional.has_gradient() {
            let (f, g) = self.functional.eval(&self.pipe, &x, true)?;
            let g = g.expect("gradient requested");
            let v = self.sign * f;
            if !v.is_finite() {
                return Ok((v, CVector::zeros(psi.len())));
            }
            (v, self.pipe.pull(&x, &g) * cr(self.sign))
        } else {
            let v = self.value(psi)?;
            if !v.is_finite() {
                return Ok((v, CVector::zeros(psi.len())));
            }
            let h = self.cfg.fd_step;
            let mut g = CVector::zeros(psi.len());
            for k in 0..psi.len() {
                let mut parts = [0.0; 2];
                for (p, unit) in [c(1.0, 0.0), c(0.0, 1.0)].into_iter().enumerate() {
                    let mut up = psi.clone();
                    up[k] += unit * h;
                    let mut dn = psi.clone();
                    dn[k] -= unit * h;
                    let fu = self.value(&normalize(&up))?;
                    let fd = self.value(&normalize(&dn))?;
                    parts[p] = if fu.is_finite() && fd.is_finite() {
                        (fu - fd) / (2.0 * h)
                    } else {
                        0.0
                    };
                }
                g[k] = c(parts[0], parts[1]);
            }
            (v, g)
        };
        let (v, g) = euclid;
        let radial = psi.dotc(&g).re;
        Ok((v, g - psi * cr(radial)))
    }

    fn run(&self, start: &CVector) -> Result<Track> {
        let cfg = self.cfg;
        let mut psi = normalize(start);
        let (mut f, mut g) = self.value_grad(&psi)?;
        let mut prev: Option<(CVector, CVector)> = None;
        let mut step = 1.0;
        let mut converged = false;
        let mut flat = 0usize;
        for _ in 0..cfg.max_iters {
            if !f.is_finite() {
                converged = true;
                break;
            }
            let gn2 = g.norm_squared();
            if gn2.sqrt() <= cfg.grad_tol * f.abs().max(1.0) {
                converged = true;
                break;
            }
            if let Some((ps, pg)) = &prev {
                let s = &psi - ps;
                let y = &g - pg;
                let sy = re_dot(&s, &y);
                let ss = re_dot(&s, &s);
                step = if sy < 0.0 { ss / -sy } else { step * 2.0 };
            } else {
                step = 1.0 / gn2.sqrt().max(1.0);
            }
            step = step.clamp(1e-12, 1e6);
            // Increases below the resolution of `f` cannot be certified, so
            // such steps are accepted on the gradient alone.
            let noise = 64.0 * f64::EPSILON * f.abs().max(1.0);
            let mut t = step;
            let mut next = None;
            for _ in 0..cfg.max_backtracks {
                let cand = normalize(&(&psi + &g * cr(t)));
                let fc = self.value(&cand)?;
                if fc >= f + cfg.armijo * t * gn2 - noise {
                    next = Some(cand);
                    break;
                }
                t *= cfg.backtrack;
            }
            let Some(cand) = next else {
                break;
            };
            let (fc, gc) = self.value_grad(&cand)?;
            flat = if fc - f <= noise { flat + 1 } else { 0 };
            prev = Some((std::mem::replace(&mut psi, cand), std::mem::replace(&mut g, gc)));
            f = fc;
            if flat >= FLAT_LIMIT {
                converged = g.norm() <= NOISE_GRAD * f.abs().max(1.0);
                break;
            }
        }
        Ok(Track {
            value: self.sign * f,
            psi,
            converged,
        })
    }

    fn solve(&self, extra: &[PureState]) -> Result<DivergenceResult> {
        self.cfg.validate()?;
        let d = self.pipe.din;
        let mut starts: Vec<CVector> = extra.iter().map(|p| p.amplitudes().clone()).collect();
        if starts.iter().any(|s| s.len() != d * d) {
            return Err(Error::Shape(format!("starting states must have dimension {}", d * d)));
        }
        starts.push(PureState::maximally_entangled(d).amplitudes().clone());
        let mut k = 0u64;
        while starts.len() < self.cfg.restarts {
            starts.push(random_pure_state(d * d, split_seed(self.cfg.seed, k)).amplitudes().clone());
            k += 1;
        }
        let mut best: Option<Track> = None;
        let mut values = Vec::with_capacity(starts.len());
        for s in &starts {
            let t = self.run(s)?;
            values.push(t.value);
            let better = match &best {
                None => true,
                Some(b) => self.sign * t.value > self.sign * b.value,
            };
            if better {
                best = Some(t);
            }
        }
        let best = best.expect("at least one start");
        Ok(DivergenceResult {
            value: best.value,
            argmax_state: PureState::normalized(best.psi)?,
            converged: best.converged,
            restart_values: values,
        })
    }
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

fn reference_choi(n: &Channel, m: Reference<'_>) -> Result<CMatrix> {
    match m {
        Reference::Channel(mc) => {
            if mc.din() != n.din() || mc.dout() != n.dout() {
                return Err(Error::Shape("channels with different dimensions".into()));
            }
            Ok(mc.choi_operator())
        }
        Reference::Replacer(w) => {
            if w.dim() != n.dout() {
                return Err(Error::Shape(format!(
                    "replacer output of dimension {}, channel output {}",
                    w.dim(),
                    n.dout()
                )));
            }
            Ok(kron_c(&CMatrix::identity(n.din(), n.din()), w.matrix()))
        }
    }
}

/// `ψ = (√ρ ⊗ I)|Γ⟩`, a purification of `ρ` on `R ⊗ A'`.
fn canonical_purification(rho: &DensityOperator) -> Result<PureState> {
    let d = rho.dim();
    let x = eigh(rho.matrix())?.map(|v| v.max(0.0).sqrt());
    let v = CVector::from_fn(d * d, |k, _| x.matrix()[(k / d, k % d)]);
    PureState::normalized(v)
}

/// `(id ⊗ N)(ψ)` and `ψ_R` for a pure input on `R ⊗ A'` with `|R| = |A'|`.
pub fn output_state(n: &Channel, psi: &PureState) -> Result<(DensityOperator, DensityOperator)> {
    let d = n.din();
    if psi.dim() != d * d {
        return Err(Error::Shape(format!("input of dimension {}, expected {}", psi.dim(), d * d)));
    }
    let out = n.apply(&psi.density(), d)?;
    let r = psi.density().reduce(&[d, d], &[0])?;
    Ok((out, r))
}

// ---------------------------------------------------------------------------
// Channel divergences
// ---------------------------------------------------------------------------

/// `sup_ψ D((id⊗N)(ψ) ‖ (id⊗M)(ψ))`.
///
/// Umegaki divergences against full-rank replacers use analytic gradients;
/// other orders and references use central differences. Hypothesis-testing
/// divergences are solved exactly by one SDP over inputs and tests and then
/// re-evaluated at the optimal input. The max-divergence is rejected here:
/// see [`channel_max_divergence`].
pub fn channel_divergence(
    n: &Channel,
    m: Reference<'_>,
    kind: DivergenceKind,
    cfg: &OptimizerConfig,
) -> Result<DivergenceResult> {
    channel_divergence_with_starts(n, m, kind, cfg, &[])
}

/// [`channel_divergence`] with additional starting inputs tried first.
pub fn channel_divergence_with_starts(
    n: &Channel,
    m: Reference<'_>,
    kind: DivergenceKind,
    cfg: &OptimizerConfig,
    starts: &[PureState],
) -> Result<DivergenceResult> {
    kind.validate()?;
    cfg.validate()?;
    let gamma_m = reference_choi(n, m)?;
    let pipe = Pipe::new(n);
    let functional = match kind {
        DivergenceKind::Max => {
            return Err(Error::Invalid(
                "the channel max-divergence is exact on Choi states; use channel_max_divergence".into(),
            ))
        }
        DivergenceKind::SmoothedMax(_) => {
            return Err(Error::Invalid(
                "smoothed channel max-divergences are solved by smoothed_channel_max_div".into(),
            ))
        }
        DivergenceKind::Hypothesis(eps) => {
            return channel_hypothesis(n, &HermitianMatrix::symmetrized(gamma_m), eps).map(|(r, _)| r)
        }
        DivergenceKind::Umegaki => match m {
            Reference::Replacer(w) => match log_full_rank(w)? {
                Some(log_omega) => Functional::RelEntropyReplacer { log_omega },
                None => Functional::Generic { gamma_m, kind },
            },
            Reference::Channel(_) => Functional::Generic { gamma_m, kind },
        },
        DivergenceKind::Renyi(alpha) => Functional::Renyi {
            gamma_m,
            factor: support_factor(&pipe.gamma)?,
            alpha,
        },
    };
    Problem {
        pipe,
        functional,
        sign: 1.0,
        cfg,
    }
    .solve(starts)
}

/// Exact channel hypothesis testing: returns the result together with the
/// optimal test at the returned input.
fn channel_hypothesis(n: &Channel, gamma_m: &HermitianMatrix, eps: f64) -> Result<(DivergenceResult, HermitianMatrix)> {
    let din = n.din();
    let test = channel_hypothesis_sdp(n, gamma_m, eps)?;
    let psi = canonical_purification(&test.input)?;
    let pipe = Pipe::new(n);
    let x = pipe.coefficients(psi.amplitudes());
    let rho = pipe.push(&x, &pipe.gamma);
    let sigma = pipe.push(&x, gamma_m.matrix());
    let np = hypothesis_testing_raw(&rho, &sigma, eps)?;
    debug_assert_eq!(psi.dim(), din * din);
    Ok((
        DivergenceResult {
            value: np.value,
            argmax_state: psi,
            converged: true,
            restart_values: vec![np.value],
        },
        np.test,
    ))
}

/// `D_∞[N‖T^β] = D_∞(Φᴺ ‖ π ⊗ γ)`.
pub fn channel_max_divergence(n: &Channel, ctx: &ThermalContext) -> Result<f64> {
    check_ctx(n, ctx)?;
    let pi = HermitianMatrix::identity(n.din()).scale(1.0 / n.din() as f64);
    let sigma = HermitianMatrix::symmetrized(kron_c(pi.matrix(), ctx.gibbs_state().matrix().matrix()));
    max_rel_entropy_raw(n.choi().matrix(), &sigma)
}

// ---------------------------------------------------------------------------
// Free energies
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct OptimizerDiagnostics {
    pub converged: bool,
    /// Number of optimizer restarts; zero for exact evaluations.
    pub restarts_used: usize,
    pub restart_values: Vec<f64>,
    pub argmax_state: Option<PureState>,
}

impl OptimizerDiagnostics {
    fn exact() -> Self {
        Self {
            converged: true,
            restarts_used: 0,
            restart_values: Vec::new(),
            argmax_state: None,
        }
    }

    fn from_result(r: &DivergenceResult) -> Self {
        Self {
            converged: r.converged,
            restarts_used: r.restart_values.len(),
            restart_values: r.restart_values.clone(),
            argmax_state: Some(r.argmax_state.clone()),
        }
    }
}

#[derive(Clone, Debug)]
pub struct FreeEnergyReport {
    pub beta: f64,
    /// `β⁻¹ D[N‖T^β]`.
    pub resource: f64,
    /// `β⁻¹ D[N‖T̂^β] = resource − β⁻¹ ln Z`.
    pub thermal: f64,
    pub kind: DivergenceKind,
    pub diagnostics: OptimizerDiagnostics,
}

/// Generalized free energy of a channel.
pub fn free_energy(
    n: &Channel,
    ctx: &ThermalContext,
    kind: DivergenceKind,
    cfg: &OptimizerConfig,
) -> Result<FreeEnergyReport> {
    free_energy_with_starts(n, ctx, kind, cfg, &[])
}

/// [`free_energy`] with additional starting inputs for the optimizer.
pub fn free_energy_with_starts(
    n: &Channel,
    ctx: &ThermalContext,
    kind: DivergenceKind,
    cfg: &OptimizerConfig,
    starts: &[PureState],
) -> Result<FreeEnergyReport> {
    check_ctx(n, ctx)?;
    kind.validate()?;
    let (d, diagnostics) = match kind {
        DivergenceKind::Max => (channel_max_divergence(n, ctx)?, OptimizerDiagnostics::exact()),
        DivergenceKind::SmoothedMax(eps) => {
            let v = if eps == 0.0 {
                channel_max_divergence(n, ctx)?
            } else {
                smoothed_channel_max_div(n, ctx, eps)?
            };
            (v, OptimizerDiagnostics::exact())
        }
        _ => {
            let gamma = ctx.gibbs_state().matrix();
            let r = channel_divergence_with_starts(n, Reference::Replacer(gamma), kind, cfg, starts)?;
            (r.value, OptimizerDiagnostics::from_result(&r))
        }
    };
    let beta = ctx.beta();
    let resource = d / beta;
    Ok(FreeEnergyReport {
        beta,
        resource,
        thermal: resource - ctx.log_partition() / beta,
        kind,
        diagnostics,
    })
}

// ---------------------------------------------------------------------------
// Entropy, energy, mutual information
// ---------------------------------------------------------------------------

/// `S[N] = −D[N‖R^𝟙] = inf_ψ [S(RA) − S(R)]`; `value` is the minimum.
pub fn channel_entropy(n: &Channel, cfg: &OptimizerConfig) -> Result<DivergenceResult> {
    let functional = Functional::RelEntropyReplacer {
        log_omega: HermitianMatrix::zeros(n.dout()),
    };
    let r = Problem {
        pipe: Pipe::new(n),
        functional,
        sign: 1.0,
        cfg,
    }
    .solve(&[])?;
    Ok(DivergenceResult {
        value: -r.value,
        argmax_state: r.argmax_state,
        converged: r.converged,
        restart_values: r.restart_values.iter().map(|v| -v).collect(),
    })
}

/// Thermal entropy `S^β[N] = −D[N‖T̂^β]`, the divergence taken from the
/// replacer onto `exp(−βH)`.
pub fn channel_thermal_entropy(n: &Channel, ctx: &ThermalContext, cfg: &OptimizerConfig) -> Result<DivergenceResult> {
    check_ctx(n, ctx)?;
    let r = channel_divergence(n, Reference::Replacer(ctx.gibbs_operator()), DivergenceKind::Umegaki, cfg)?;
    Ok(DivergenceResult {
        value: -r.value,
        argmax_state: r.argmax_state,
        converged: r.converged,
        restart_values: r.restart_values.iter().map(|v| -v).collect(),
    })
}

/// `E[N] = sup_ψ [E(N(ψ)) − E(ψ_R)]` for `H_RA = H_R ⊗ I + I ⊗ H_A + H_int`.
///
/// Without interaction the value is the top eigenvalue of `N†(H_A)` and is
/// computed exactly; otherwise the optimizer is used.
pub fn channel_energy(
    n: &Channel,
    h_out: &HermitianMatrix,
    h_ref: Option<&HermitianMatrix>,
    h_int: Option<&HermitianMatrix>,
    cfg: &OptimizerConfig,
) -> Result<DivergenceResult> {
    let (din, dout) = (n.din(), n.dout());
    if h_out.dim() != dout {
        return Err(Error::Shape(format!("output Hamiltonian of dimension {}, expected {dout}", h_out.dim())));
    }
    let h_r = match h_ref {
        Some(h) if h.dim() != din => {
            return Err(Error::Shape(format!("reference Hamiltonian of dimension {}, expected {din}", h.dim())))
        }
        Some(h) => h.clone(),
        None => HermitianMatrix::zeros(din),
    };
    let interacting = match h_int {
        Some(h) if h.dim() != din * dout => {
            return Err(Error::Shape(format!(
                "interaction Hamiltonian of dimension {}, expected {}",
                h.dim(),
                din * dout
            )))
        }
        Some(h) => h.matrix().iter().any(|z| z.norm() > 0.0),
        None => false,
    };
    if !interacting {
        let spec = eigh(&n.adjoint_apply(h_out)?)?;
        let top = spec.eigenvectors.column(din - 1).into_owned();
        let psi = PureState::basis(din, 0).tensor(&PureState::normalized(top)?);
        return Ok(DivergenceResult {
            value: spec.max(),
            argmax_state: psi,
            converged: true,
            restart_values: vec![spec.max()],
        });
    }
    let h_int = h_int.expect("interacting case");
    let h_ra = HermitianMatrix::symmetrized(
        kron_c(h_r.matrix(), &CMatrix::identity(dout, dout))
            + kron_c(&CMatrix::identity(din, din), h_out.matrix())
            + h_int.matrix(),
    );
    Problem {
        pipe: Pipe::new(n),
        functional: Functional::Energy { h_ra, h_r },
        sign: 1.0,
        cfg,
    }
    .solve(&[])
}

/// `I[N] = sup_ψ I(R;A)_{N(ψ)}`.
pub fn channel_mutual_information(n: &Channel, cfg: &OptimizerConfig) -> Result<DivergenceResult> {
    Problem {
        pipe: Pipe::new(n),
        functional: Functional::MutualInformation,
        sign: 1.0,
        cfg,
    }
    .solve(&[])
}

/// `sup_ψ F^β(N(ψ))`, the largest free energy of a single channel output.
pub fn max_output_free_energy(n: &Channel, ctx: &ThermalContext, cfg: &OptimizerConfig) -> Result<DivergenceResult> {
    check_ctx(n, ctx)?;
    let log_gamma = log_full_rank(ctx.gibbs_state().matrix())?
        .ok_or_else(|| Error::Domain("Gibbs state is numerically singular".into()))?;
    let beta = ctx.beta();
    let r = Problem {
        pipe: Pipe::new(n),
        functional: Functional::OutputDivergence { log_gamma },
        sign: 1.0,
        cfg,
    }
    .solve(&[])?;
    Ok(DivergenceResult {
        value: r.value / beta,
        restart_values: r.restart_values.iter().map(|v| v / beta).collect(),
        ..r
    })
}

// ---------------------------------------------------------------------------
// Distillation and cost
// ---------------------------------------------------------------------------

/// Input, effect and golden-unit count defining a distillation superchannel.
#[derive(Clone, Debug)]
pub struct DistillWitness {
    pub psi: PureState,
    pub effect: HermitianMatrix,
    pub m: usize,
    /// `tr(T^β(ψ) Λ)`, equal to `1/m²`.
    pub thermal_weight: f64,
    /// `tr(N(ψ) Λ)`.
    pub acceptance: f64,
}

impl DistillWitness {
    pub fn superchannel(&self) -> Result<Superchannel> {
        distill_superchannel(&self.psi, &self.effect, self.m)
    }
}

#[derive(Clone, Debug)]
pub struct DistillReport {
    pub eps: f64,
    /// Distillable or cost value in nats.
    pub value_nats: f64,
    pub witness: Option<DistillWitness>,
}

/// `Dist^ε = ½ D_H^ε[N‖T^β]`, with a measure-and-prepare witness.
///
/// The witness uses `m = ⌊e^{value}⌋` golden units and the optimal test
/// raised towards `I` until its thermal weight is exactly `1/m²`.
pub fn one_shot_distill(n: &Channel, ctx: &ThermalContext, eps: f64, _cfg: &OptimizerConfig) -> Result<DistillReport> {
    check_ctx(n, ctx)?;
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::Domain(format!("epsilon must lie in [0, 1), got {eps}")));
    }
    let gamma_t = HermitianMatrix::symmetrized(kron_c(
        &CMatrix::identity(n.din(), n.din()),
        ctx.gibbs_state().matrix().matrix(),
    ));
    let (res, test) = channel_hypothesis(n, &gamma_t, eps)?;
    let psi = res.argmax_state;
    let (out, _) = output_state(n, &psi)?;
    let thermal_out = thermal_channel(ctx, n.din()).apply(&psi.density(), n.din())?;
    let v = test.inner(thermal_out.matrix());
    let value = 0.5 * res.value;
    let m = golden_units(v);
    let target = 1.0 / (m * m) as f64;
    let dd = test.dim();
    let effect = if target >= v {
        let t = if v < 1.0 { (target - v) / (1.0 - v) } else { 0.0 };
        test.add(&HermitianMatrix::identity(dd).sub(&test).scale(t))
    } else {
        test.scale(target / v)
    };
    let thermal_weight = effect.inner(thermal_out.matrix());
    let acceptance = effect.inner(out.matrix());
    Ok(DistillReport {
        eps,
        value_nats: value,
        witness: Some(DistillWitness {
            psi,
            effect,
            m,
            thermal_weight,
            acceptance,
        }),
    })
}

/// Largest `m ≥ 1` with `m² v ≤ 1`, allowing relative slack `1e-9`.
fn golden_units(v: f64) -> usize {
    if !(v > 0.0) {
        return usize::MAX;
    }
    let bound = (1.0 / v) * (1.0 + 1e-9);
    let mut m = bound.sqrt().floor().max(1.0) as usize;
    while ((m + 1) * (m + 1)) as f64 <= bound {
        m += 1;
    }
    while m > 1 && (m * m) as f64 > bound {
        m -= 1;
    }
    m
}

/// `Cost^ε = ½ D_∞^ε[N‖T^β]` with smoothing over the diamond ball.
pub fn one_shot_cost(n: &Channel, ctx: &ThermalContext, eps: f64) -> Result<DistillReport> {
    check_ctx(n, ctx)?;
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::Domain(format!("epsilon must lie in [0, 1), got {eps}")));
    }
    let d = if eps == 0.0 {
        channel_max_divergence(n, ctx)?
    } else {
        smoothed_channel_max_div(n, ctx, eps)?
    };
    Ok(DistillReport {
        eps,
        value_nats: 0.5 * d,
        witness: None,
    })
}

// ---------------------------------------------------------------------------
// Work extraction
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WorkReport {
    /// `β⁻¹ I(R;A)`.
    pub decoupling: f64,
    /// Thermal free energy `E(ρ_A) − β⁻¹S(ρ_A)` of the output marginal.
    pub quench: f64,
    /// `β⁻¹ ln Z`.
    pub reversible: f64,
    pub total: f64,
}

/// Work ledger of partial thermalization of `N(ψ)` with noninteracting `H_RA`.
pub fn work_extraction(n: &Channel, psi: &PureState, ctx: &ThermalContext) -> Result<WorkReport> {
    check_ctx(n, ctx)?;
    let (out, _) = output_state(n, psi)?;
    let beta = ctx.beta();
    let rho_a = out.reduce(&[n.din(), n.dout()], &[1])?;
    let decoupling = mutual_information(&out, (n.din(), n.dout()))? / beta;
    let quench = rho_a.matrix().inner(ctx.hamiltonian()) - entropy(&rho_a) / beta;
    let reversible = ctx.log_partition() / beta;
    Ok(WorkReport {
        decoupling,
        quench,
        reversible,
        total: decoupling + quench + reversible,
    })
}

/// `sup_ψ W^ext` over pure inputs.
pub fn max_extractable_work(n: &Channel, ctx: &ThermalContext, cfg: &OptimizerConfig) -> Result<DivergenceResult> {
    check_ctx(n, ctx)?;
    // Independent restart stream from the free-energy optimizer.
    let cfg = cfg.with_seed(split_seed(cfg.seed, 0x776f726b));
    Problem {
        pipe: Pipe::new(n),
        functional: Functional::Work {
            beta: ctx.beta(),
            h: ctx.hamiltonian().clone(),
            log_z: ctx.log_partition(),
        },
        sign: 1.0,
        cfg: &cfg,
    }
    .solve(&[])
}

// ---------------------------------------------------------------------------
// Verification suite
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Slack of the inequality after tolerance; negative when violated.
    pub margin: f64,
    pub detail: String,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    /// Records `lhs ≤ rhs + tol`.
    fn at_most(&mut self, name: impl Into<String>, lhs: f64, rhs: f64, tol: f64) {
        let margin = if lhs == rhs { tol } else { rhs + tol - lhs };
        self.push(name, margin, format!("{lhs:.10e} <= {rhs:.10e} + {tol:.1e}"));
    }

    /// Records `|a − b| ≤ tol`.
    fn close(&mut self, name: impl Into<String>, a: f64, b: f64, tol: f64) {
        let margin = if a == b { tol } else { tol - (a - b).abs() };
        self.push(name, margin, format!("|{a:.10e} - {b:.10e}| <= {tol:.1e}"));
    }

    fn push(&mut self, name: impl Into<String>, margin: f64, detail: String) {
        self.checks.push(Check {
            name: name.into(),
            passed: margin >= 0.0,
            margin,
            detail,
        });
    }
}

fn binary_entropy(p: f64) -> f64 {
    [p, 1.0 - p].iter().filter(|&&x| x > 0.0).map(|&x| -x * x.ln()).sum()
}

/// Unitary commuting with `H`: random phases in its eigenbasis.
fn commuting_unitary(h: &HermitianMatrix, rng: &mut ChaCha8Rng) -> Result<CMatrix> {
    let spec = eigh(h)?;
    let v = &spec.eigenvectors;
    let phases = CMatrix::from_diagonal(&CVector::from_fn(h.dim(), |_, _| {
        let t: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        c(t.cos(), t.sin())
    }));
    Ok(v * phases * v.adjoint())
}

/// Gibbs-preserving superchannels with arbitrary pre-processing and
/// post-processing that fixes `γ` for every auxiliary state.
fn sample_gp_superchannels(n: &Channel, ctx: &ThermalContext, seed: u64) -> Result<Vec<Superchannel>> {
    let (din, dout) = (n.din(), n.dout());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t = thermal_channel(ctx, dout);
    let mut out = Vec::new();

    let pre = random_channel(din, din, 2, rng.gen())?;
    let post = unitary_channel(&commuting_unitary(ctx.hamiltonian(), &mut rng)?)?;
    out.push(Superchannel::new(pre, post, 1)?);

    let pre = unitary_channel(&haar_unitary(din, rng.gen()))?;
    let p: f64 = rng.gen_range(0.1..0.9);
    let post = unitary_channel(&commuting_unitary(ctx.hamiltonian(), &mut rng)?)?.mix(&t, p)?;
    out.push(Superchannel::new(pre, post, 1)?);

    // Two-outcome memory: the auxiliary flag selects the post-processing.
    let aux = 2;
    let pre = random_channel(din, aux * din, 2, rng.gen())?;
    let q0 = unitary_channel(&commuting_unitary(ctx.hamiltonian(), &mut rng)?)?;
    let q1 = unitary_channel(&commuting_unitary(ctx.hamiltonian(), &mut rng)?)?.mix(&t, rng.gen_range(0.1..0.9))?;
    let mut gamma = CMatrix::zeros(aux * dout * dout, aux * dout * dout);
    for (k, q) in [q0, q1].iter().enumerate() {
        let mut e = CMatrix::zeros(aux, aux);
        e[(k, k)] = cr(1.0);
        gamma += kron_c(&e, &q.choi_operator());
    }
    let post = Channel::from_choi_operator(aux * dout, dout, HermitianMatrix::symmetrized(gamma))?;
    out.push(Superchannel::new(pre, post, aux)?);
    Ok(out)
}

/// Checks the axioms and inequalities satisfied by channel free energies on
/// `n` and on channels derived from it. Failures are reported, not raised.
pub fn verify_suite(n: &Channel, ctx: &ThermalContext, cfg: &OptimizerConfig) -> Result<VerifyReport> {
    check_ctx(n, ctx)?;
    cfg.validate()?;
    let (din, dout) = (n.din(), n.dout());
    let beta = ctx.beta();
    let log_z = ctx.log_partition();
    let umegaki = DivergenceKind::Umegaki;
    let sub = |k: u64| cfg.with_seed(split_seed(cfg.seed, k));
    let mut rep = VerifyReport::default();
    let t = thermal_channel(ctx, din);
    let gamma = ctx.gibbs_state().matrix();

    let f_n = free_energy(n, ctx, umegaki, cfg)?;
    let psi_star = f_n.diagnostics.argmax_state.clone().expect("optimized");
    let f = f_n.resource;

    // Faithfulness.
    let f_t = free_energy(&t, ctx, umegaki, &sub(1))?.resource;
    rep.at_most("faithfulness/thermal", f_t.abs(), 0.0, 1e-8);
    let choi_gap = n.choi_distance(&t)?;
    if choi_gap >= 0.1 {
        rep.at_most("faithfulness/resource", 1e-4, f, 0.0);
    }

    // Reduction to states on replacers.
    let omega = n.apply(&DensityOperator::maximally_mixed(din), 1)?;
    let r_omega = replacer_channel(&omega, din);
    let f_rep = free_energy(&r_omega, ctx, umegaki, &sub(2))?.resource;
    let f_state = state_free_energy(&omega, ctx)?.resource;
    rep.close("reduction", f_rep, f_state, 1e-6);

    // Monotonicity under Gibbs-preserving superchannels.
    for (k, theta) in sample_gp_superchannels(n, ctx, split_seed(cfg.seed, 3))?.iter().enumerate() {
        let gp = is_gibbs_preserving(theta, ctx, ctx, 1e-9)?;
        let image = apply_superchannel(theta, n)?;
        let fi = free_energy(&image, ctx, umegaki, &sub(10 + k as u64))?.resource;
        rep.at_most(format!("monotonicity/{k}"), fi, f, 1e-5);
        rep.at_most(format!("monotonicity/{k}/gibbs-preserving"), gp.residual, 0.0, 1e-9);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(split_seed(cfg.seed, 4));
    let u = unitary_channel(&haar_unitary(din, rng.gen()))?;
    let v = unitary_channel(&commuting_unitary(ctx.hamiltonian(), &mut rng)?)?;
    let rotated = compose(&v, n, &u)?;
    let f_rot = free_energy(&rotated, ctx, umegaki, &sub(5))?.resource;
    rep.close("unitary-invariance", f_rot, f, 2e-5);

    // Additivity on two noninteracting copies.
    let nn = tensor(n, n)?;
    let h2 = HermitianMatrix::symmetrized(
        kron_c(ctx.hamiltonian().matrix(), &CMatrix::identity(dout, dout))
            + kron_c(&CMatrix::identity(dout, dout), ctx.hamiltonian().matrix()),
    );
    let ctx2 = thermal_context(&h2, beta)?;
    let product = product_input(&psi_star, &psi_star, din)?;
    let f_nn = free_energy_with_starts(&nn, &ctx2, umegaki, &sub(6).with_restarts(3), &[product])?.resource;
    rep.close("additivity", beta * f_nn, 2.0 * beta * f, 1e-4);

    // Convexity.
    let m = random_channel(din, dout, 2, split_seed(cfg.seed, 7))?;
    let f_m = free_energy(&m, ctx, umegaki, &sub(8))?.resource;
    for (k, p) in [0.25, 0.5, 0.75].into_iter().enumerate() {
        let mix = n.mix(&m, p)?;
        let fm = free_energy(&mix, ctx, umegaki, &sub(20 + k as u64))?.resource;
        rep.at_most(format!("convexity/{p}"), fm, p * f + (1.0 - p) * f_m, 1e-5);
    }

    // Continuity towards the thermal channel.
    let delta = 0.05;
    let near = n.mix(&t, 1.0 - delta)?;
    let eps = 0.5 * diamond_norm(n, &near)?;
    let f_near = free_energy(&near, ctx, umegaki, &sub(9))?.resource;
    let dmax_n = channel_max_divergence(n, ctx)?;
    let dmax_near = channel_max_divergence(&near, ctx)?;
    let k_bound = dmax_n.max(dmax_near);
    rep.at_most(
        "continuity",
        (f - f_near).abs(),
        (eps * k_bound + binary_entropy(eps)) / beta,
        1e-6,
    );
    let e_max = ctx.max_energy();
    let max_bound = (1.0 + eps * din as f64 * (log_z + beta * e_max).exp()).ln() / beta;
    rep.at_most("continuity/max", (dmax_n - dmax_near).abs() / beta, max_bound, 1e-6);

    // Ordering in the Rényi order.
    let f_half = free_energy(n, ctx, DivergenceKind::renyi(0.5)?, &sub(30))?;
    let half_arg = f_half.diagnostics.argmax_state.clone().expect("optimized");
    let f_one = free_energy_with_starts(n, ctx, umegaki, &sub(31), &[half_arg, psi_star.clone()])?;
    let one_arg = f_one.diagnostics.argmax_state.clone().expect("optimized");
    let f_two = free_energy_with_starts(n, ctx, DivergenceKind::renyi(2.0)?, &sub(32), &[one_arg])?;
    let f_inf = dmax_n / beta;
    rep.at_most("alpha-order/half-one", f_half.resource, f_one.resource, 1e-6);
    rep.at_most("alpha-order/one-two", f_one.resource, f_two.resource, 1e-6);
    rep.at_most("alpha-order/two-max", f_two.resource, f_inf, 1e-6);

    // Unitaries and the max-free energy.
    let id_out = Channel::identity(dout);
    let f_inf_id = channel_max_divergence(&id_out, ctx)? / beta;
    for k in 0..3 {
        let uk = unitary_channel(&haar_unitary(dout, rng.gen()))?;
        let fu = channel_max_divergence(&uk, ctx)? / beta;
        rep.close(format!("unitary-max/equal/{k}"), fu, f_inf_id, 1e-9);
        if din == dout {
            rep.at_most(format!("unitary-max/dominates/{k}"), f_inf, fu, 1e-8);
        }
    }

    // Pinsker.
    let dist = diamond_norm(n, &t)?;
    rep.at_most("pinsker", dist * dist / (2.0 * beta), f, 1e-6);

    // Output decomposition at the optimizer's argmax.
    let (out, rho_r) = output_state(n, &psi_star)?;
    let h_ra = HermitianMatrix::symmetrized(kron_c(&CMatrix::identity(din, din), ctx.hamiltonian().matrix()));
    let ctx_ra = thermal_context(&h_ra, beta)?;
    let ctx_r = thermal_context(&HermitianMatrix::zeros(din), beta)?;
    let decomposed = state_free_energy(&out, &ctx_ra)?.resource - state_free_energy(&rho_r, &ctx_r)?.resource;
    rep.close("output-decomposition", beta * f, beta * decomposed, 1e-6);

    // Helmholtz bound and its saturation by replacers.
    let s_n = channel_entropy(n, &sub(40))?.value;
    let e_n = channel_energy(n, ctx.hamiltonian(), None, None, cfg)?.value;
    rep.at_most("helmholtz", f - log_z / beta, e_n - s_n / beta, 1e-5);
    let s_rep = channel_entropy(&r_omega, &sub(41))?.value;
    let e_rep = channel_energy(&r_omega, ctx.hamiltonian(), None, None, cfg)?.value;
    rep.close("helmholtz/replacer", f_rep - log_z / beta, e_rep - s_rep / beta, 1e-6);

    // Choi-state bounds.
    let f_choi = state_free_energy(n.choi(), &ctx_ra)?;
    rep.at_most("choi-bound", f_choi.resource, f, 1e-6);
    rep.at_most(
        "choi-bound/thermal",
        f_choi.thermal + (din as f64).ln() / beta,
        f - log_z / beta,
        1e-6,
    );

    // Mutual-information bounds.
    let i_choi = mutual_information(n.choi(), (din, dout))?;
    let f_pi = state_free_energy(&omega, ctx)?.resource;
    rep.at_most("information-bound/lower", i_choi / beta + f_pi, f, 1e-5);
    let i_n = channel_mutual_information(n, &sub(42))?.value;
    let f_out = max_output_free_energy(n, ctx, &sub(43))?.value;
    rep.at_most("information-bound/upper", f, i_n / beta + f_out, 1e-5);

    // Unitary lower bound.
    let uu = unitary_channel(&haar_unitary(dout, rng.gen()))?;
    let f_u = free_energy(&uu, ctx, umegaki, &sub(44))?.resource;
    let lower = ((dout as f64).ln() + log_z) / beta + ctx.hamiltonian().trace() / dout as f64;
    rep.at_most("unitary-lower-bound", lower, f_u, 1e-6);

    // Minimizing the max-free energy of a qubit unitary over the gap.
    let mut vals = Vec::new();
    for k in 0..31 {
        let e = 3.0 * k as f64 / 30.0;
        let ck = thermal_context(&HermitianMatrix::from_real_diagonal(&[0.0, e]), beta)?;
        vals.push(channel_max_divergence(&Channel::identity(2), &ck)? / beta);
    }
    let floor = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    rep.close("hamiltonian-minimum/value", vals[0], 2.0 * 2f64.ln() / beta, 1e-9);
    rep.at_most("hamiltonian-minimum/location", vals[0], floor, 1e-12);

    // High-temperature limit.
    let hot = ctx.with_beta(1e-4)?;
    let d_hot = channel_divergence(n, Reference::Replacer(hot.gibbs_state().matrix()), umegaki, &sub(45))?.value;
    let pi_out = HermitianMatrix::identity(dout).scale(1.0 / dout as f64);
    let purity = channel_divergence(n, Reference::Replacer(&pi_out), umegaki, &sub(46))?.value;
    rep.close("high-temperature", d_hot, purity, 1e-3);

    // Entropy dualities.
    let s_beta = channel_thermal_entropy(n, ctx, &sub(47))?.value;
    rep.close("duality/thermal", s_beta + beta * f, log_z, 2e-5);
    rep.close("duality/purity", s_n + purity, (dout as f64).ln(), 2e-5);

    // Distillation below cost without error.
    let dist0 = one_shot_distill(n, ctx, 0.0, cfg)?.value_nats;
    let cost0 = one_shot_cost(n, ctx, 0.0)?.value_nats;
    rep.at_most("distill-below-cost", dist0, cost0, 1e-6);

    // Work extraction.
    let w = max_extractable_work(n, ctx, cfg)?.value;
    rep.close("work", w, f, 1e-4);

    // Max-divergence bounds for mixtures of pure states.
    for k in 0..3 {
        let mut p: Vec<f64> = (0..3).map(|_| rng.gen_range(0.05..1.0)).collect();
        let total: f64 = p.iter().sum();
        p.iter_mut().for_each(|x| *x /= total);
        let states: Vec<PureState> = (0..3).map(|_| random_pure_state(dout, rng.gen())).collect();
        let mut mix = HermitianMatrix::zeros(dout);
        let inv = eigh(gamma)?.map(|x| 1.0 / x);
        let mut terms = Vec::new();
        for (pk, s) in p.iter().zip(&states) {
            mix = mix.add(&s.density().matrix().scale(*pk));
            terms.push(pk * s.density().matrix().inner(&inv));
        }
        let d = max_rel_entropy(&DensityOperator::new(mix)?, ctx.gibbs_state())?;
        let lo = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max).ln();
        let hi = terms.iter().sum::<f64>().ln();
        rep.at_most(format!("pure-mixture-max/lower/{k}"), lo, d, 1e-8);
        rep.at_most(format!("pure-mixture-max/upper/{k}"), d, hi, 1e-8);
    }
    Ok(rep)
}

/// `ψ₁ ⊗ ψ₂` regrouped from `(R₁A₁')(R₂A₂')` to `(R₁R₂)(A₁'A₂')`.
pub fn product_input(a: &PureState, b: &PureState, din: usize) -> Result<PureState> {
    let xa = a.coefficient_matrix(din)?;
    let xb = b.coefficient_matrix(din)?;
    let x = kron_c(&xa, &xb);
    let d = din * din;
    PureState::normalized(CVector::from_fn(d * d, |k, _| x[(k / d, k % d)]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> OptimizerConfig {
        OptimizerConfig::default().with_restarts(6)
    }

    #[test]
    fn analytic_gradient_matches_finite_differences() {
        let n = random_channel(2, 3, 2, 5).unwrap();
        let ctx = thermal_context(&HermitianMatrix::from_real_diagonal(&[0.0, 0.4, 1.1]), 0.8).unwrap();
        let c = cfg();
        let log_gamma = log_full_rank(ctx.gibbs_state().matrix()).unwrap().unwrap();
        let functionals = [
            Functional::RelEntropyReplacer { log_omega: log_gamma.clone() },
            Functional::MutualInformation,
            Functional::OutputDivergence { log_gamma },
            Functional::Work {
                beta: 0.8,
                h: ctx.hamiltonian().clone(),
                log_z: ctx.log_partition(),
            },
        ];
        let psi = random_pure_state(4, 9).amplitudes().clone();
        for f in functionals {
            let p = Problem {
                pipe: Pipe::new(&n),
                functional: f,
                sign: 1.0,
                cfg: &c,
            };
            let (_, g) = p.value_grad(&psi).unwrap();
            for k in 0..psi.len() {
                for unit in [c_unit(1.0, 0.0), c_unit(0.0, 1.0)] {
                    let h = 1e-6;
                    let mut up = psi.clone();
                    up[k] += unit * h;
                    let mut dn = psi.clone();
                    dn[k] -= unit * h;
                    let fd = (p.value(&normalize(&up)).unwrap() - p.value(&normalize(&dn)).unwrap()) / (2.0 * h);
                    let an = g[k].re * unit.re + g[k].im * unit.im;
                    assert!((fd - an).abs() < 1e-6, "component {k}: {fd} vs {an}");
                }
            }
        }
    }

    fn c_unit(re: f64, im: f64) -> crate::linalg::C64 {
        c(re, im)
    }

    #[test]
    fn golden_unit_counting() {
        assert_eq!(golden_units(0.25), 2);
        assert_eq!(golden_units(0.25 * (1.0 + 1e-12)), 2);
        assert_eq!(golden_units(0.26), 1);
        assert_eq!(golden_units(1.0), 1);
        assert_eq!(golden_units(1.0 / 9.0), 3);
    }

    #[test]
    fn product_input_matches_tensor_output() {
        let n = random_channel(2, 2, 2, 3).unwrap();
        let a = random_pure_state(4, 1);
        let b = random_pure_state(4, 2);
        let ab = product_input(&a, &b, 2).unwrap();
        let nn = tensor(&n, &n).unwrap();
        let (joint, _) = output_state(&nn, &ab).unwrap();
        let (oa, _) = output_state(&n, &a).unwrap();
        let (ob, _) = output_state(&n, &b).unwrap();
        let prod = oa.tensor(&ob).unwrap();
        let perm = crate::linalg::permute_subsystems(prod.matrix().matrix(), &[2, 2, 2, 2], &[0, 2, 1, 3]).unwrap();
        assert!((joint.matrix().matrix() - perm).norm() < 1e-12);
    }

    #[test]
    fn max_divergence_is_rejected_by_the_optimizer() {
        let n = Channel::identity(2);
        let w = HermitianMatrix::identity(2).scale(0.5);
        assert!(channel_divergence(&n, Reference::Replacer(&w), DivergenceKind::Max, &cfg()).is_err());
    }
}
