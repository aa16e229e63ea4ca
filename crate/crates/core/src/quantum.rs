//! States, Gibbs states and state-level thermodynamic functionals.
//!
//! Units are natural: `k_B = ħ = 1`, entropies in nats.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{c, cr, eigh, eigvalsh, partial_trace, CMatrix, CVector, HermitianMatrix};
use crate::statediv;

const CLAMP_TOL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-10;

/// Positive semidefinite, unit-trace operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    matrix: HermitianMatrix,
}

impl DensityOperator {
    /// Validates trace and positivity; eigenvalues in `[−1e-10, 0)` are clamped to 0.
    pub fn new(matrix: HermitianMatrix) -> Result<Self> {
        let tr = matrix.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace is {tr:.12}")));
        }
        let spec = eigh(&matrix)?;
        let min = spec.min();
        if min < -CLAMP_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
        }
        if min < 0.0 {
            return Ok(Self {
                matrix: spec.map(|x| x.max(0.0)),
            });
        }
        Ok(Self { matrix })
    }

    /// Divides by the trace before validating.
    pub fn normalized(matrix: HermitianMatrix) -> Result<Self> {
        let tr = matrix.trace();
        if !(tr > 0.0) {
            return Err(Error::InvalidState(format!("trace is {tr:.3e}")));
        }
        Self::new(matrix.scale(1.0 / tr))
    }

    /// Skips validation; for results that are states by construction.
    pub(crate) fn trusted(matrix: HermitianMatrix) -> Self {
        Self { matrix }
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self {
            matrix: HermitianMatrix::identity(d).scale(1.0 / d as f64),
        }
    }

    /// `|k⟩⟨k|` in dimension `d`.
    pub fn basis(d: usize, k: usize) -> Self {
        let mut diag = vec![0.0; d];
        diag[k] = 1.0;
        Self {
            matrix: HermitianMatrix::from_real_diagonal(&diag),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &HermitianMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> HermitianMatrix {
        self.matrix
    }

    /// Reduced state on the factors listed in `keep`.
    pub fn reduce(&self, dims: &[usize], keep: &[usize]) -> Result<DensityOperator> {
        Ok(Self::trusted(partial_trace(&self.matrix, dims, keep)?))
    }

    pub fn tensor(&self, other: &DensityOperator) -> Result<DensityOperator> {
        Ok(Self::trusted(crate::linalg::kron(&self.matrix, &other.matrix)?))
    }

    /// `p·self + (1−p)·other`.
    pub fn mix(&self, other: &DensityOperator, p: f64) -> Result<DensityOperator> {
        if self.dim() != other.dim() {
            return Err(Error::Shape("mixing states of different dimension".into()));
        }
        Ok(Self::trusted(
            self.matrix.scale(p).add(&other.matrix.scale(1.0 - p)),
        ))
    }
}

/// Unit vector.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amplitudes: CVector,
}

impl PureState {
    /// Accepts vectors of norm 1 within 1e-8 and renormalizes them exactly.
    pub fn new(amplitudes: CVector) -> Result<Self> {
        let n = amplitudes.norm();
        if (n - 1.0).abs() > 1e-8 {
            return Err(Error::InvalidState(format!("vector norm is {n:.12}")));
        }
        Ok(Self {
            amplitudes: amplitudes / cr(n),
        })
    }

    /// Normalizes any nonzero vector.
    pub fn normalized(amplitudes: CVector) -> Result<Self> {
        let n = amplitudes.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::InvalidState("cannot normalize a zero vector".into()));
        }
        Ok(Self {
            amplitudes: amplitudes / cr(n),
        })
    }

    pub fn basis(d: usize, k: usize) -> Self {
        let mut v = CVector::zeros(d);
        v[k] = cr(1.0);
        Self { amplitudes: v }
    }

    /// `Σ_k |k⟩|k⟩ / √d`.
    pub fn maximally_entangled(d: usize) -> Self {
        let mut v = CVector::zeros(d * d);
        let a = 1.0 / (d as f64).sqrt();
        for k in 0..d {
            v[k * d + k] = cr(a);
        }
        Self { amplitudes: v }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn density(&self) -> DensityOperator {
        DensityOperator::trusted(HermitianMatrix::outer(&self.amplitudes))
    }

    pub fn tensor(&self, other: &PureState) -> PureState {
        Self {
            amplitudes: self.amplitudes.kronecker(&other.amplitudes),
        }
    }

    /// Coefficient matrix `X` with `|ψ⟩ = Σ X_{ri} |r⟩|i⟩` for a split `d_r × d_i`.
    pub fn coefficient_matrix(&self, d_r: usize) -> Result<CMatrix> {
        let n = self.dim();
        if d_r == 0 || n % d_r != 0 {
            return Err(Error::Shape(format!("cannot split dimension {n} with first factor {d_r}")));
        }
        let d_i = n / d_r;
        Ok(CMatrix::from_fn(d_r, d_i, |r, i| self.amplitudes[r * d_i + i]))
    }
}

/// Inverse temperature, Hamiltonian and the derived Gibbs quantities.
#[derive(Clone, Debug)]
pub struct ThermalContext {
    beta: f64,
    hamiltonian: HermitianMatrix,
    gibbs_state: DensityOperator,
    gibbs_operator: HermitianMatrix,
    log_partition: f64,
}

impl ThermalContext {
    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn hamiltonian(&self) -> &HermitianMatrix {
        &self.hamiltonian
    }

    /// `γ = e^{−βH}/Z`.
    pub fn gibbs_state(&self) -> &DensityOperator {
        &self.gibbs_state
    }

    /// `γ̂ = e^{−βH}`.
    pub fn gibbs_operator(&self) -> &HermitianMatrix {
        &self.gibbs_operator
    }

    /// `ln Z`.
    pub fn log_partition(&self) -> f64 {
        self.log_partition
    }

    pub fn partition_function(&self) -> f64 {
        self.log_partition.exp()
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    /// Largest eigenvalue of the Hamiltonian.
    pub fn max_energy(&self) -> f64 {
        self.hamiltonian.max_eigenvalue().unwrap_or(0.0)
    }

    /// Same Hamiltonian at another inverse temperature.
    pub fn with_beta(&self, beta: f64) -> Result<ThermalContext> {
        thermal_context(&self.hamiltonian, beta)
    }
}

/// Builds `γ`, `γ̂` and `ln Z` through a log-sum-exp over the spectrum of `h`.
pub fn thermal_context(h: &HermitianMatrix, beta: f64) -> Result<ThermalContext> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::Domain(format!("beta must be positive and finite, got {beta}")));
    }
    let spec = eigh(h)?;
    let e0 = spec.min();
    let shifted: Vec<f64> = spec.eigenvalues.iter().map(|&e| (-beta * (e - e0)).exp()).collect();
    let sum: f64 = shifted.iter().sum();
    let log_partition = -beta * e0 + sum.ln();
    let gibbs_state = DensityOperator::trusted(spec.with_values(
        &shifted.iter().map(|w| w / sum).collect::<Vec<_>>(),
    ));
    let gibbs_operator = spec.map(|e| (-beta * e).exp());
    Ok(ThermalContext {
        beta,
        hamiltonian: h.clone(),
        gibbs_state,
        gibbs_operator,
        log_partition,
    })
}

/// Von Neumann entropy from a list of eigenvalues.
pub(crate) fn entropy_of_spectrum(vals: &[f64]) -> f64 {
    vals.iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| -x * x.ln())
        .sum()
}

/// `S(ρ) = −tr ρ ln ρ`.
pub fn entropy(rho: &DensityOperator) -> f64 {
    let vals = eigvalsh(rho.matrix().matrix()).expect("eigenvalues of a density operator");
    entropy_of_spectrum(&vals).max(0.0)
}

/// `tr(Hρ)`.
pub fn energy(rho: &DensityOperator, h: &HermitianMatrix) -> Result<f64> {
    if rho.dim() != h.dim() {
        return Err(Error::Shape(format!(
            "state has dimension {}, Hamiltonian {}",
            rho.dim(),
            h.dim()
        )));
    }
    Ok(rho.matrix().inner(h))
}

/// Resource and thermal free energies of a state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateFreeEnergy {
    /// `β⁻¹ D(ρ‖γ)`.
    pub resource: f64,
    /// `E(ρ) − β⁻¹ S(ρ)`.
    pub thermal: f64,
}

pub fn state_free_energy(rho: &DensityOperator, ctx: &ThermalContext) -> Result<StateFreeEnergy> {
    let e = energy(rho, ctx.hamiltonian())?;
    let d = statediv::rel_entropy(rho, ctx.gibbs_state().matrix(), false)?;
    Ok(StateFreeEnergy {
        resource: d / ctx.beta(),
        thermal: e - entropy(rho) / ctx.beta(),
    })
}

/// `I(A;B) = S(A) + S(B) − S(AB)`.
pub fn mutual_information(rho_ab: &DensityOperator, dims: (usize, usize)) -> Result<f64> {
    let (da, db) = dims;
    if da * db != rho_ab.dim() {
        return Err(Error::Shape(format!(
            "{da}x{db} does not match dimension {}",
            rho_ab.dim()
        )));
    }
    let a = rho_ab.reduce(&[da, db], &[0])?;
    let b = rho_ab.reduce(&[da, db], &[1])?;
    Ok((entropy(&a) + entropy(&b) - entropy(rho_ab)).max(0.0))
}

/// Spectral purification `Σ_k √λ_k |v_k⟩ ⊗ |k⟩` with eigenvalues ascending;
/// the purifying factor is the second tensor factor.
pub fn purify(rho: &DensityOperator) -> PureState {
    let spec = eigh(rho.matrix()).expect("eigendecomposition of a density operator");
    let d = rho.dim();
    let mut v = CVector::zeros(d * d);
    for (k, &lam) in spec.eigenvalues.iter().enumerate() {
        let a = lam.max(0.0).sqrt();
        for i in 0..d {
            v[i * d + k] = spec.eigenvectors[(i, k)] * a;
        }
    }
    PureState::normalized(v).expect("purification of a unit-trace state")
}

/// Haar-random pure state from a normalized complex Gaussian vector; the
/// global phase is fixed so that the first amplitude is real and nonnegative.
pub fn random_pure_state(dim: usize, seed: u64) -> PureState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_pure_state_with(dim, &mut rng)
}

pub(crate) fn random_pure_state_with(dim: usize, rng: &mut ChaCha8Rng) -> PureState {
    loop {
        let mut v = CVector::from_fn(dim, |_, _| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            c(re, im)
        });
        let n = v.norm();
        if n < 1e-300 {
            continue;
        }
        let first = v[0];
        if first.norm() > 0.0 {
            v *= first.conj() / first.norm();
        }
        return PureState::normalized(v).expect("nonzero vector");
    }
}

/// Deterministic derivation of per-stream seeds from a base seed.
pub fn split_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
