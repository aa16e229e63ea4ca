//! Quantum channels in Choi form, superchannels, and standard constructors.
//!
//! A channel `N: A' → A` is stored as its normalized Choi state
//! `Φᴺ = (id ⊗ N)(Φ)` on `R ⊗ A` with the reference factor first. The
//! unnormalized Choi operator is `Γᴺ = d_in Φᴺ`, with entries
//! `Γ[(i,a),(j,b)] = ⟨a|N(|i⟩⟨j|)|b⟩`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, cr, kron_c, partial_trace_c, permute_subsystems, schatten_norm, unitarity_defect, CMatrix, HermitianMatrix, SchattenP};
use crate::quantum::{thermal_context, DensityOperator, PureState, ThermalContext};

const TP_TOL: f64 = 1e-9;

/// Completely positive trace-preserving map.
#[derive(Clone, Debug, PartialEq)]
pub struct Channel {
    din: usize,
    dout: usize,
    choi: DensityOperator,
}

impl Channel {
    /// From a normalized Choi state; checks the input marginal is maximally mixed.
    pub fn from_choi(din: usize, dout: usize, choi: DensityOperator) -> Result<Self> {
        if din == 0 || dout == 0 || choi.dim() != din * dout {
            return Err(Error::Shape(format!(
                "Choi state of dimension {} for channel {din} → {dout}",
                choi.dim()
            )));
        }
        let marg = partial_trace_c(choi.matrix().matrix(), &[din, dout], &[0])? * cr(din as f64);
        let resid = (marg - CMatrix::identity(din, din))
            .iter()
            .fold(0.0f64, |a, z| a.max(z.norm()));
        if resid > TP_TOL {
            return Err(Error::NotCptp {
                what: "input marginal of the Choi state is not maximally mixed".into(),
                residual: resid,
            });
        }
        Ok(Self { din, dout, choi })
    }

    /// From the unnormalized Choi operator `Γᴺ`.
    pub fn from_choi_operator(din: usize, dout: usize, gamma: HermitianMatrix) -> Result<Self> {
        let choi = DensityOperator::new(gamma.scale(1.0 / din as f64)).map_err(|e| Error::NotCptp {
            what: format!("Choi operator is not a scaled state: {e}"),
            residual: f64::NAN,
        })?;
        Self::from_choi(din, dout, choi)
    }

    /// From Kraus operators of shape `dout × din` with `Σ K†K = I`.
    pub fn from_kraus(ops: &[CMatrix]) -> Result<Self> {
        let first = ops
            .first()
            .ok_or_else(|| Error::Invalid("empty Kraus list".into()))?;
        let (dout, din) = first.shape();
        if ops.iter().any(|k| k.shape() != (dout, din)) {
            return Err(Error::Shape("Kraus operators of different shapes".into()));
        }
        let mut comp = CMatrix::zeros(din, din);
        for k in ops {
            comp += k.adjoint() * k;
        }
        let resid = (comp - CMatrix::identity(din, din))
            .iter()
            .fold(0.0f64, |a, z| a.max(z.norm()));
        if resid > TP_TOL {
            return Err(Error::NotCptp {
                what: "Kraus operators are not complete".into(),
                residual: resid,
            });
        }
        let dd = din * dout;
        let mut gamma = CMatrix::zeros(dd, dd);
        for k in ops {
            let v = nalgebra::DVector::from_fn(dd, |idx, _| {
                let (i, a) = (idx / dout, idx % dout);
                k[(a, i)]
            });
            gamma += &v * v.adjoint();
        }
        let phi = DensityOperator::new(HermitianMatrix::symmetrized(gamma * cr(1.0 / din as f64)))?;
        Self::from_choi(din, dout, phi)
    }

    pub fn identity(d: usize) -> Self {
        Self {
            din: d,
            dout: d,
            choi: PureState::maximally_entangled(d).density(),
        }
    }

    pub fn din(&self) -> usize {
        self.din
    }

    pub fn dout(&self) -> usize {
        self.dout
    }

    /// Normalized Choi state `Φᴺ`.
    pub fn choi(&self) -> &DensityOperator {
        &self.choi
    }

    /// Unnormalized Choi operator `Γᴺ`.
    pub fn choi_operator(&self) -> CMatrix {
        self.choi.matrix().matrix() * cr(self.din as f64)
    }

    /// `(id_R ⊗ N)(ρ)` for `ρ` on `R ⊗ A'` with `|R| = ref_dim`.
    pub fn apply(&self, rho: &DensityOperator, ref_dim: usize) -> Result<DensityOperator> {
        if rho.dim() != ref_dim * self.din {
            return Err(Error::Shape(format!(
                "input of dimension {} for reference {ref_dim} and channel input {}",
                rho.dim(),
                self.din
            )));
        }
        let out = self.apply_raw(rho.matrix().matrix(), ref_dim);
        Ok(DensityOperator::trusted(HermitianMatrix::symmetrized(out)))
    }

    /// `(id ⊗ N)(X)` for an arbitrary operator `X` on `R ⊗ A'`.
    pub fn apply_raw(&self, x: &CMatrix, ref_dim: usize) -> CMatrix {
        let (din, dout) = (self.din, self.dout);
        let gamma = self.choi_operator();
        let mut out = CMatrix::zeros(ref_dim * dout, ref_dim * dout);
        for i in 0..din {
            for j in 0..din {
                let g = gamma.view((i * dout, j * dout), (dout, dout));
                if g.iter().all(|z| z.norm() == 0.0) {
                    continue;
                }
                for r in 0..ref_dim {
                    for s in 0..ref_dim {
                        let xv = x[(r * din + i, s * din + j)];
                        if xv.norm() == 0.0 {
                            continue;
                        }
                        let mut blk = out.view_mut((r * dout, s * dout), (dout, dout));
                        blk += g * xv;
                    }
                }
            }
        }
        out
    }

    /// Heisenberg-picture map `N†(H)`.
    pub fn adjoint_apply(&self, h: &HermitianMatrix) -> Result<HermitianMatrix> {
        if h.dim() != self.dout {
            return Err(Error::Shape(format!(
                "observable of dimension {} for channel output {}",
                h.dim(),
                self.dout
            )));
        }
        Ok(HermitianMatrix::symmetrized(self.adjoint_apply_raw(h.matrix(), 1)))
    }

    /// `(id ⊗ N†)(H)` for `H` on `R ⊗ A` with `|R| = ref_dim`.
    pub fn adjoint_apply_raw(&self, h: &CMatrix, ref_dim: usize) -> CMatrix {
        let (din, dout) = (self.din, self.dout);
        let gamma = self.choi_operator();
        let mut out = CMatrix::zeros(ref_dim * din, ref_dim * din);
        for r in 0..ref_dim {
            for s in 0..ref_dim {
                let hb = h.view((r * dout, s * dout), (dout, dout));
                for i in 0..din {
                    for j in 0..din {
                        let mut acc = cr(0.0);
                        for a in 0..dout {
                            for b in 0..dout {
                                acc += hb[(b, a)] * gamma[(j * dout + a, i * dout + b)];
                            }
                        }
                        out[(r * din + i, s * din + j)] = acc;
                    }
                }
            }
        }
        out
    }

    /// Convex combination `pN + (1−p)M`.
    pub fn mix(&self, other: &Channel, p: f64) -> Result<Channel> {
        self.same_shape(other)?;
        Ok(Self {
            din: self.din,
            dout: self.dout,
            choi: self.choi.mix(&other.choi, p)?,
        })
    }

    /// `‖Φᴺ − Φᴹ‖₁`.
    pub fn choi_distance(&self, other: &Channel) -> Result<f64> {
        self.same_shape(other)?;
        Ok(schatten_norm(
            &(self.choi.matrix().matrix() - other.choi.matrix().matrix()),
            SchattenP::One,
        ))
    }

    fn same_shape(&self, other: &Channel) -> Result<()> {
        if self.din != other.din || self.dout != other.dout {
            return Err(Error::Shape(format!(
                "channels {} → {} and {} → {}",
                self.din, self.dout, other.din, other.dout
            )));
        }
        Ok(())
    }
}

/// `ρ ↦ U ρ U†`.
pub fn unitary_channel(u: &CMatrix) -> Result<Channel> {
    if !u.is_square() {
        return Err(Error::Shape("unitary must be square".into()));
    }
    let defect = unitarity_defect(u);
    if defect > 1e-10 {
        return Err(Error::NotUnitary { residual: defect });
    }
    Channel::from_kraus(std::slice::from_ref(u))
}

/// `ρ ↦ tr(ρ) ω` on inputs of dimension `din`.
pub fn replacer_channel(omega: &DensityOperator, din: usize) -> Channel {
    let pi = DensityOperator::maximally_mixed(din);
    Channel {
        din,
        dout: omega.dim(),
        choi: pi.tensor(omega).expect("replacer dimension within cap"),
    }
}

/// Replacer onto the Gibbs state of `ctx`.
pub fn thermal_channel(ctx: &ThermalContext, din: usize) -> Channel {
    replacer_channel(ctx.gibbs_state(), din)
}

/// Replacer onto the maximally mixed state of dimension `m`.
pub fn uniform_mixing(m: usize) -> Channel {
    replacer_channel(&DensityOperator::maximally_mixed(m), m)
}

/// `W^{(a,b)} = Xᵃ Zᵇ` at index `a·m + b`, with `X` the cyclic shift and
/// `Z = diag(ωᵏ)`.
pub fn weyl_unitaries(m: usize) -> Result<Vec<CMatrix>> {
    if m < 2 {
        return Err(Error::Domain(format!("Weyl basis needs m ≥ 2, got {m}")));
    }
    let omega = 2.0 * std::f64::consts::PI / m as f64;
    let mut out = Vec::with_capacity(m * m);
    for a in 0..m {
        for b in 0..m {
            // (XᵃZᵇ)|k⟩ = ω^{bk} |k + a⟩
            let mut w = CMatrix::zeros(m, m);
            for k in 0..m {
                let ph = omega * ((b * k) % m) as f64;
                w[((k + a) % m, k)] = c(ph.cos(), ph.sin());
            }
            out.push(w);
        }
    }
    Ok(out)
}

/// `Q ∘ N ∘ P`.
pub fn compose(q: &Channel, n: &Channel, p: &Channel) -> Result<Channel> {
    if p.dout != n.din || n.dout != q.din {
        return Err(Error::Shape(format!(
            "cannot compose {} → {}, {} → {}, {} → {}",
            p.din, p.dout, n.din, n.dout, q.din, q.dout
        )));
    }
    let d = p.din;
    let x = p.choi.matrix().matrix().clone();
    let x = n.apply_raw(&x, d);
    let x = q.apply_raw(&x, d);
    Channel::from_choi(d, q.dout, DensityOperator::trusted(HermitianMatrix::symmetrized(x)))
}

/// `N ⊗ M` with inputs and outputs ordered `(A₁, A₂)`.
pub fn tensor(n: &Channel, m: &Channel) -> Result<Channel> {
    let joint = kron_c(n.choi.matrix().matrix(), m.choi.matrix().matrix());
    let dims = [n.din, n.dout, m.din, m.dout];
    let permuted = permute_subsystems(&joint, &dims, &[0, 2, 1, 3])?;
    Ok(Channel {
        din: n.din * m.din,
        dout: n.dout * m.dout,
        choi: DensityOperator::trusted(HermitianMatrix::symmetrized(permuted)),
    })
}

/// `Θ(N) = post ∘ (id_aux ⊗ N) ∘ pre`.
#[derive(Clone, Debug)]
pub struct Superchannel {
    pre: Channel,
    post: Channel,
    aux_dim: usize,
}

impl Superchannel {
    /// `pre: B' → aux ⊗ A'`, `post: aux ⊗ A → B`, auxiliary factor first.
    pub fn new(pre: Channel, post: Channel, aux_dim: usize) -> Result<Self> {
        if aux_dim == 0 || pre.dout % aux_dim != 0 || post.din % aux_dim != 0 {
            return Err(Error::Shape(format!(
                "auxiliary dimension {aux_dim} does not divide {} and {}",
                pre.dout, post.din
            )));
        }
        Ok(Self { pre, post, aux_dim })
    }

    /// The superchannel that returns its argument unchanged.
    pub fn identity(din: usize, dout: usize) -> Self {
        Self {
            pre: Channel::identity(din),
            post: Channel::identity(dout),
            aux_dim: 1,
        }
    }

    pub fn pre(&self) -> &Channel {
        &self.pre
    }

    pub fn post(&self) -> &Channel {
        &self.post
    }

    pub fn aux_dim(&self) -> usize {
        self.aux_dim
    }

    /// Input dimension of channels accepted in the slot.
    pub fn slot_din(&self) -> usize {
        self.pre.dout / self.aux_dim
    }

    /// Output dimension of channels accepted in the slot.
    pub fn slot_dout(&self) -> usize {
        self.post.din / self.aux_dim
    }

    pub fn out_din(&self) -> usize {
        self.pre.din
    }

    pub fn out_dout(&self) -> usize {
        self.post.dout
    }
}

pub fn apply_superchannel(theta: &Superchannel, n: &Channel) -> Result<Channel> {
    if n.din != theta.slot_din() || n.dout != theta.slot_dout() {
        return Err(Error::Shape(format!(
            "superchannel slot {} → {} given channel {} → {}",
            theta.slot_din(),
            theta.slot_dout(),
            n.din,
            n.dout
        )));
    }
    let d = theta.pre.din;
    let x = theta.pre.choi.matrix().matrix().clone();
    let x = n.apply_raw(&x, d * theta.aux_dim);
    let x = theta.post.apply_raw(&x, d);
    Channel::from_choi(d, theta.post.dout, DensityOperator::trusted(HermitianMatrix::symmetrized(x)))
}

/// Outcome of a Gibbs-preservation check.
#[derive(Clone, Copy, Debug)]
pub struct GibbsCheck {
    pub preserving: bool,
    /// `‖Φ^{Θ(T_in)} − Φ^{T_out}‖₁`.
    pub residual: f64,
}

pub fn is_gibbs_preserving(
    theta: &Superchannel,
    ctx_in: &ThermalContext,
    ctx_out: &ThermalContext,
    tol: f64,
) -> Result<GibbsCheck> {
    if (ctx_in.beta() - ctx_out.beta()).abs() > 1e-12 * ctx_in.beta().max(1.0) {
        return Err(Error::Domain(format!(
            "inverse temperatures differ: {} and {}",
            ctx_in.beta(),
            ctx_out.beta()
        )));
    }
    let t_in = thermal_channel(ctx_in, theta.slot_din());
    let t_out = thermal_channel(ctx_out, theta.out_din());
    let image = apply_superchannel(theta, &t_in)?;
    let residual = image.choi_distance(&t_out)?;
    Ok(GibbsCheck {
        preserving: residual <= tol,
        residual,
    })
}

/// Measure-and-prepare realization of
/// `Θ(N) = tr(N(ψ)Λ) id_m + tr(N(ψ)(I−Λ)) (m²−1)⁻¹ Σ_{i≥1} Wᵢ(·)Wᵢ†`.
///
/// `ψ` lives on `R ⊗ A'` with `|R| = |A'|`; `Λ` on `R ⊗ A`.
pub fn distill_superchannel(psi: &PureState, lam: &HermitianMatrix, m: usize) -> Result<Superchannel> {
    let din = (psi.dim() as f64).sqrt().round() as usize;
    if din * din != psi.dim() || din == 0 {
        return Err(Error::Shape(format!("input state of dimension {} is not bipartite square", psi.dim())));
    }
    if m == 0 || lam.dim() % din != 0 {
        return Err(Error::Shape("effect dimension incompatible with the input state".into()));
    }
    let dout = lam.dim() / din;
    let spec = crate::linalg::eigh(lam)?;
    if spec.min() < -1e-10 || spec.max() > 1.0 + 1e-10 {
        return Err(Error::Effect {
            min: spec.min(),
            max: spec.max(),
        });
    }
    let sqrt_l = spec.map(|x| x.clamp(0.0, 1.0).sqrt());
    let sqrt_c = spec.map(|x| (1.0 - x.clamp(0.0, 1.0)).sqrt());

    // pre: |b⟩ ↦ |b⟩ ⊗ |ψ⟩ with auxiliary (B'copy ⊗ R) ahead of A'.
    let amps = psi.amplitudes();
    let aux = m * din;
    let mut v = CMatrix::zeros(aux * din, m);
    for b in 0..m {
        for k in 0..din * din {
            v[(b * din * din + k, b)] = amps[k];
        }
    }
    let pre = Channel::from_kraus(&[v])?;

    // post: (B'copy ⊗ R) ⊗ A → B.
    let ra = din * dout;
    let eye = CMatrix::identity(m, m);
    let mut kraus = Vec::new();
    let bra = |op: &HermitianMatrix, k: usize| -> CMatrix { op.matrix().rows(k, 1).into_owned() };
    let twirl: Vec<CMatrix> = if m >= 2 {
        let ws = weyl_unitaries(m)?;
        let s = 1.0 / ((m * m - 1) as f64).sqrt();
        ws.into_iter().skip(1).map(|w| w * cr(s)).collect()
    } else {
        vec![eye.clone()]
    };
    for k in 0..ra {
        kraus.push(kron_c(&eye, &bra(&sqrt_l, k)));
        let row = bra(&sqrt_c, k);
        for w in &twirl {
            kraus.push(kron_c(w, &row));
        }
    }
    let post = Channel::from_kraus(&kraus)?;
    Superchannel::new(pre, post, aux)
}

/// Haar-random unitary from the QR decomposition of a complex Ginibre matrix.
pub fn haar_unitary(d: usize, seed: u64) -> CMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    haar_unitary_with(d, &mut rng)
}

pub(crate) fn haar_unitary_with(d: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let g = CMatrix::from_fn(d, d, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        c(re, im) * cr(std::f64::consts::FRAC_1_SQRT_2)
    });
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        let z = r[(j, j)];
        let ph = if z.norm() > 0.0 { z / z.norm() } else { cr(1.0) };
        for i in 0..d {
            q[(i, j)] *= ph;
        }
    }
    q
}

/// Stinespring channel with a Haar-random isometry `A' → A ⊗ E`.
pub fn random_channel(din: usize, dout: usize, env_dim: usize, seed: u64) -> Result<Channel> {
    if din == 0 || dout == 0 || env_dim == 0 {
        return Err(Error::Invalid("dimensions must be positive".into()));
    }
    if dout * env_dim < din {
        return Err(Error::Invalid(format!(
            "output ⊗ environment dimension {} is smaller than the input {din}",
            dout * env_dim
        )));
    }
    let u = haar_unitary(dout * env_dim, seed);
    let kraus: Vec<CMatrix> = (0..env_dim)
        .map(|e| CMatrix::from_fn(dout, din, |a, i| u[(a * env_dim + e, i)]))
        .collect();
    Channel::from_kraus(&kraus)
}

/// Complex matrix entry in a descriptor: a bare real or an `[re, im]` pair.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

impl Entry {
    fn value(self) -> crate::linalg::C64 {
        match self {
            Self::Real(x) => cr(x),
            Self::Complex([re, im]) => c(re, im),
        }
    }
}

pub type MatrixData = Vec<Vec<Entry>>;

/// Kinds accepted in a channel descriptor.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum DescriptorKind {
    Choi,
    Kraus,
    Unitary,
    Replacer,
    Thermal,
    Mixing,
}

/// JSON description of a channel together with its output Hamiltonian.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ChannelDescriptor {
    pub din: usize,
    pub dout: usize,
    pub kind: DescriptorKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hamiltonian: Option<MatrixData>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
}

pub fn matrix_from_data(rows: &MatrixData) -> Result<CMatrix> {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    if n == 0 || m == 0 || rows.iter().any(|r| r.len() != m) {
        return Err(Error::Shape("matrix rows must be nonempty and of equal length".into()));
    }
    Ok(CMatrix::from_fn(n, m, |i, j| rows[i][j].value()))
}

pub fn matrix_to_data(m: &CMatrix) -> MatrixData {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| Entry::Complex([m[(i, j)].re, m[(i, j)].im])).collect())
        .collect()
}

impl ChannelDescriptor {
    /// Output Hamiltonian, zero when absent.
    pub fn hamiltonian_matrix(&self) -> Result<HermitianMatrix> {
        match &self.hamiltonian {
            None => Ok(HermitianMatrix::zeros(self.dout)),
            Some(rows) => {
                let h = HermitianMatrix::new(matrix_from_data(rows)?)?;
                if h.dim() != self.dout {
                    return Err(Error::Shape(format!(
                        "hamiltonian of dimension {} for output dimension {}",
                        h.dim(),
                        self.dout
                    )));
                }
                Ok(h)
            }
        }
    }

    fn data_as<T: serde::de::DeserializeOwned>(&self) -> Result<T> {
        let v = self
            .data
            .clone()
            .ok_or_else(|| Error::Invalid(format!("descriptor kind {:?} requires data", self.kind)))?;
        serde_json::from_value(v).map_err(|e| Error::Invalid(format!("data: {e}")))
    }

    pub fn to_channel(&self) -> Result<Channel> {
        let (din, dout) = (self.din, self.dout);
        let ch = match self.kind {
            DescriptorKind::Choi => {
                let m = HermitianMatrix::new(matrix_from_data(&self.data_as::<MatrixData>()?)?)?;
                let tr = m.trace();
                if !(tr > 0.0) {
                    return Err(Error::Invalid("Choi data has nonpositive trace".into()));
                }
                // Accept either the normalized state or the unnormalized operator.
                let phi = DensityOperator::new(m.scale(1.0 / tr))?;
                if (tr - 1.0).abs() > 1e-9 && (tr - din as f64).abs() > 1e-9 * din as f64 {
                    return Err(Error::Invalid(format!("Choi data has trace {tr}; expected 1 or {din}")));
                }
                Channel::from_choi(din, dout, phi)?
            }
            DescriptorKind::Kraus => {
                let ops: Vec<MatrixData> = self.data_as()?;
                let mats = ops.iter().map(matrix_from_data).collect::<Result<Vec<_>>>()?;
                Channel::from_kraus(&mats)?
            }
            DescriptorKind::Unitary => unitary_channel(&matrix_from_data(&self.data_as::<MatrixData>()?)?)?,
            DescriptorKind::Replacer => {
                let omega = DensityOperator::new(HermitianMatrix::new(matrix_from_data(
                    &self.data_as::<MatrixData>()?,
                )?)?)?;
                replacer_channel(&omega, din)
            }
            DescriptorKind::Thermal => {
                let beta = self
                    .beta
                    .ok_or_else(|| Error::Invalid("thermal descriptor requires beta".into()))?;
                thermal_channel(&thermal_context(&self.hamiltonian_matrix()?, beta)?, din)
            }
            DescriptorKind::Mixing => {
                if din != dout {
                    return Err(Error::Shape("uniform mixing needs din = dout".into()));
                }
                uniform_mixing(din)
            }
        };
        if ch.din != din || ch.dout != dout {
            return Err(Error::Shape(format!(
                "descriptor declares {din} → {dout} but data gives {} → {}",
                ch.din, ch.dout
            )));
        }
        Ok(ch)
    }

    /// Choi-kind descriptor of an existing channel.
    pub fn from_channel(ch: &Channel, hamiltonian: Option<&HermitianMatrix>) -> Self {
        Self {
            din: ch.din,
            dout: ch.dout,
            kind: DescriptorKind::Choi,
            data: Some(serde_json::to_value(matrix_to_data(ch.choi.matrix().matrix())).expect("serializable")),
            hamiltonian: hamiltonian.map(|h| matrix_to_data(h.matrix())),
            beta: None,
        }
    }
}
