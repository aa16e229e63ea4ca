//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use athermal::channels::{
    apply_superchannel, haar_unitary, is_gibbs_preserving, random_channel, tensor, thermal_channel, uniform_mixing,
    unitary_channel, Channel,
};
use athermal::chanthermo::{
    channel_max_divergence, free_energy, free_energy_with_starts, max_extractable_work, one_shot_cost,
    one_shot_distill, product_input, verify_suite, OptimizerConfig,
};
use athermal::linalg::{eigh_raw, kron_c, CMatrix, HermitianMatrix};
use athermal::quantum::{split_seed, thermal_context, DensityOperator, ThermalContext};
use athermal::sdp::{diamond_norm, hypothesis_testing_sdp, hypothesis_value, max_free_energy_sdp};
use athermal::statediv::{hypothesis_testing, DivergenceKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Self {
            passed,
            detail: detail.into(),
        }
    }
}

type Run = fn() -> athermal::Result<Outcome>;

fn random_context(d: usize, rng: &mut ChaCha8Rng) -> ThermalContext {
    let e: Vec<f64> = (0..d).map(|_| rng.gen_range(0.0..2.0)).collect();
    thermal_context(&HermitianMatrix::from_real_diagonal(&e), rng.gen_range(0.5..2.0)).expect("valid context")
}

/// Random channel with a Stinespring environment large enough for the isometry.
fn sample_channel(din: usize, dout: usize, rng: &mut ChaCha8Rng, seed: u64) -> athermal::Result<Channel> {
    let env = rng.gen_range(1..=3).max(din.div_ceil(dout));
    random_channel(din, dout, env, seed)
}

fn flat(d: usize, beta: f64) -> ThermalContext {
    thermal_context(&HermitianMatrix::zeros(d), beta).expect("valid context")
}

fn random_state(d: usize, rank: usize, rng: &mut ChaCha8Rng) -> DensityOperator {
    let g = CMatrix::from_fn(d, rank, |_, _| athermal::linalg::c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    DensityOperator::normalized(HermitianMatrix::symmetrized(&g * g.adjoint())).expect("nonzero")
}

fn golden_unit_value() -> athermal::Result<Outcome> {
    let mut worst: f64 = 0.0;
    for m in 2..=4 {
        for beta in [0.5, 1.0, 2.0] {
            let f = free_energy(&Channel::identity(m), &flat(m, beta), DivergenceKind::Max, &OptimizerConfig::default())?;
            worst = worst.max((f.resource - 2.0 * (m as f64).ln() / beta).abs());
        }
    }
    Ok(Outcome::new(worst <= 1e-9, format!("max deviation {worst:.2e} (tol 1e-9)")))
}

fn unitary_closed_form() -> athermal::Result<Outcome> {
    let ctx = thermal_context(&HermitianMatrix::from_real_diagonal(&[0.0, std::f64::consts::LN_2]), 1.0)?;
    let target = 4.5f64.ln();
    let (mut eig_dev, mut sdp_dev): (f64, f64) = (0.0, 0.0);
    for seed in 0..20 {
        let u = unitary_channel(&haar_unitary(2, 1000 + seed))?;
        eig_dev = eig_dev.max((channel_max_divergence(&u, &ctx)? - target).abs());
        sdp_dev = sdp_dev.max((max_free_energy_sdp(&u, &ctx)?.primal_value.ln() - target).abs());
    }
    Ok(Outcome::new(
        eig_dev <= 1e-8 && sdp_dev <= 1e-8,
        format!("20 unitaries: eigen {eig_dev:.2e}, SDP {sdp_dev:.2e} (tol 1e-8)"),
    ))
}

/// `tr(Φ X) / tr(σ X)` for the PSD part of the dual matrix `X`: a feasible
/// dual point after rescaling, hence a lower bound on the primal optimum.
fn dual_certificate(n: &Channel, ctx: &ThermalContext, x: &CMatrix) -> athermal::Result<f64> {
    let spec = eigh_raw(&HermitianMatrix::symmetrized(x.clone()).into_matrix())?;
    let xp = spec.map(|v| v.max(0.0));
    let pi = HermitianMatrix::identity(n.din()).scale(1.0 / n.din() as f64);
    let sigma = HermitianMatrix::symmetrized(kron_c(pi.matrix(), ctx.gibbs_state().matrix().matrix()));
    Ok(n.choi().matrix().inner(&xp) / sigma.inner(&xp))
}

fn sdp_matches_oracle() -> athermal::Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut pairwise, mut gap): (f64, f64) = (0.0, 0.0);
    for k in 0..100u64 {
        let din = rng.gen_range(2..=3);
        let dout = rng.gen_range(2..=3);
        let n = sample_channel(din, dout, &mut rng, split_seed(30, k))?;
        let ctx = random_context(dout, &mut rng);
        let sol = max_free_energy_sdp(&n, &ctx)?;
        let primal = sol.primal_value.ln();
        let dual = sol.dual_value.ln();
        let certificate = dual_certificate(&n, &ctx, &sol.dual_blocks[0])?.ln();
        let exact = channel_max_divergence(&n, &ctx)?;
        for (a, b) in [(primal, dual), (primal, exact), (dual, exact), (certificate, exact)] {
            pairwise = pairwise.max((a - b).abs());
        }
        gap = gap.max((sol.primal_value - sol.dual_value).abs());
    }
    Ok(Outcome::new(
        pairwise <= 1e-6 && gap <= 1e-7,
        format!("100 channels: pairwise {pairwise:.2e} (tol 1e-6), duality gap {gap:.2e} (tol 1e-7)"),
    ))
}

fn neyman_pearson_matches_sdp() -> athermal::Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for k in 0..100 {
        let d = rng.gen_range(2..=4);
        let rank = if k % 2 == 0 { rng.gen_range(1..d) } else { d };
        let rho = random_state(d, rank, &mut rng);
        let sigma = random_state(d, d, &mut rng);
        for eps in [0.0, 0.1, 0.25, 0.5] {
            let np = hypothesis_testing(&rho, &sigma, eps)?.value;
            let sdp = hypothesis_value(&hypothesis_testing_sdp(&rho, &sigma, eps)?);
            worst = worst.max((np - sdp).abs());
        }
    }
    Ok(Outcome::new(worst <= 1e-6, format!("400 instances: max deviation {worst:.2e} (tol 1e-6)")))
}

fn diamond_identity() -> athermal::Result<Outcome> {
    let mut worst: f64 = 0.0;
    for m in 2..=3 {
        let half = 0.5 * diamond_norm(&Channel::identity(m), &uniform_mixing(m))?;
        worst = worst.max((half - (1.0 - 1.0 / (m * m) as f64)).abs());
    }
    Ok(Outcome::new(worst <= 1e-6, format!("m = 2, 3: max deviation {worst:.2e} (tol 1e-6)")))
}

fn maximal_work() -> athermal::Result<Outcome> {
    let cfg = OptimizerConfig::default();
    let contexts = [
        thermal_context(&HermitianMatrix::from_real_diagonal(&[0.0, 0.8]), 1.0)?,
        thermal_context(&HermitianMatrix::from_real_diagonal(&[0.0, 1.7]), 0.4)?,
    ];
    let mut worst: f64 = 0.0;
    for (c, ctx) in contexts.iter().enumerate() {
        for k in 0..20u64 {
            let n = random_channel(2, 2, 1 + (k % 3) as usize, split_seed(60 + c as u64, k))?;
            let w = max_extractable_work(&n, ctx, &cfg)?.value;
            let f = free_energy(&n, ctx, DivergenceKind::Umegaki, &cfg)?.resource;
            worst = worst.max((w - f).abs());
        }
    }
    Ok(Outcome::new(worst <= 1e-4, format!("40 instances: max |W − F| {worst:.2e} (tol 1e-4)")))
}

fn axiom_suite() -> athermal::Result<Outcome> {
    let cfg = OptimizerConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut failed, mut checks) = (Vec::new(), 0);
    for k in 0..50u64 {
        let din = rng.gen_range(2..=3);
        let dout = rng.gen_range(2..=3);
        let n = sample_channel(din, dout, &mut rng, split_seed(70, k))?;
        let ctx = random_context(dout, &mut rng);
        let rep = verify_suite(&n, &ctx, &cfg.with_seed(split_seed(71, k)))?;
        checks += rep.checks.len();
        failed.extend(rep.failures().map(|c| format!("#{k} {} ({:.2e})", c.name, c.margin)));
    }
    let detail = if failed.is_empty() {
        format!("50 channels, {checks} checks, all within tolerance")
    } else {
        format!("{} of {checks} checks failed: {}", failed.len(), failed.join(", "))
    };
    Ok(Outcome::new(failed.is_empty(), detail))
}

fn yield_cost_tradeoff() -> athermal::Result<Outcome> {
    let cfg = OptimizerConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = f64::INFINITY;
    let mut violations = Vec::new();
    for k in 0..50u64 {
        let n = sample_channel(2, 2, &mut rng, split_seed(80, k))?;
        let ctx = random_context(2, &mut rng);
        for eps in [0.01f64, 0.1, 0.25] {
            let cost = one_shot_cost(&n, &ctx, eps.sqrt())?.value_nats;
            let dist = one_shot_distill(&n, &ctx, 1.0 - eps, &cfg)?.value_nats;
            let slack = dist + 0.5 * (1.0 / (1.0 - eps)).ln() + 1e-6 - cost;
            worst = worst.min(slack);
            if slack < 0.0 {
                violations.push(format!("#{k} ε={eps}: {slack:.2e}"));
            }
        }
    }
    let detail = if violations.is_empty() {
        format!("150 instances, smallest slack {worst:.2e}")
    } else {
        format!("{} violations, smallest slack {worst:.2e}: {}", violations.len(), violations.join(", "))
    };
    Ok(Outcome::new(violations.is_empty(), detail))
}

fn two_copy_additivity() -> athermal::Result<Outcome> {
    let cfg = OptimizerConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst: f64 = 0.0;
    for k in 0..10u64 {
        let n = sample_channel(2, 2, &mut rng, split_seed(90, k))?;
        let ctx = random_context(2, &mut rng);
        let single = free_energy(&n, &ctx, DivergenceKind::Umegaki, &cfg)?;
        let psi = single.diagnostics.argmax_state.clone().expect("optimized");
        let h = ctx.hamiltonian().matrix();
        let eye = CMatrix::identity(2, 2);
        let h2 = HermitianMatrix::symmetrized(kron_c(h, &eye) + kron_c(&eye, h));
        let ctx2 = thermal_context(&h2, ctx.beta())?;
        let nn = tensor(&n, &n)?;
        let joint = free_energy_with_starts(
            &nn,
            &ctx2,
            DivergenceKind::Umegaki,
            &cfg.with_restarts(8).with_seed(split_seed(91, k)),
            &[product_input(&psi, &psi, 2)?],
        )?;
        let beta = ctx.beta();
        worst = worst.max((beta * joint.resource - 2.0 * beta * single.resource).abs());
    }
    Ok(Outcome::new(worst <= 1e-4, format!("10 channels: max |D[N⊗N] − 2D[N]| {worst:.2e} (tol 1e-4)")))
}

fn distillation_witness() -> athermal::Result<Outcome> {
    let cfg = OptimizerConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let (mut gp_worst, mut excess): (f64, f64) = (0.0, f64::NEG_INFINITY);
    let mut units = Vec::new();
    for k in 0..20u64 {
        let d = 2 + (k % 2) as usize;
        let u = unitary_channel(&haar_unitary(d, split_seed(100, k)))?;
        let noise = random_channel(d, d, 2, split_seed(101, k))?;
        let n = u.mix(&noise, rng.gen_range(0.7..1.0))?;
        let ctx = if k % 4 < 2 { flat(d, 1.0) } else { random_context(d, &mut rng) };
        let eps = [0.05, 0.1, 0.2, 0.3][(k % 4) as usize];
        let rep = one_shot_distill(&n, &ctx, eps, &cfg)?;
        let w = rep.witness.expect("distillation witness");
        let theta = w.superchannel()?;
        let gp = is_gibbs_preserving(&theta, &ctx, &flat(w.m, ctx.beta()), 1e-8)?;
        gp_worst = gp_worst.max(gp.residual);
        let image = apply_superchannel(&theta, &n)?;
        let dist = 0.5 * diamond_norm(&image, &Channel::identity(w.m))?;
        let thermal_image = apply_superchannel(&theta, &thermal_channel(&ctx, d))?;
        let to_uniform = 0.5 * diamond_norm(&thermal_image, &uniform_mixing(w.m))?;
        excess = excess.max(dist - eps).max(to_uniform - 1e-8);
        units.push(w.m);
    }
    Ok(Outcome::new(
        gp_worst <= 1e-8 && excess <= 1e-6,
        format!(
            "20 channels, m* ∈ {{{}}}: GP residual {gp_worst:.2e} (tol 1e-8), max distance − ε {excess:.2e} (tol 1e-6)",
            {
                let mut u = units.clone();
                u.sort_unstable();
                u.dedup();
                u.iter().map(|m| m.to_string()).collect::<Vec<_>>().join(", ")
            }
        ),
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, Duration, Run); 10] = [
        ("golden-unit value", Duration::from_secs(1), golden_unit_value),
        ("unitary closed form", Duration::from_secs(5), unitary_closed_form),
        ("max-divergence SDP vs closed form", Duration::from_secs(60), sdp_matches_oracle),
        ("Neyman-Pearson vs SDP", Duration::from_secs(60), neyman_pearson_matches_sdp),
        ("diamond-distance identity", Duration::from_secs(10), diamond_identity),
        ("maximal work", Duration::from_secs(180), maximal_work),
        ("axiom suite", Duration::from_secs(300), axiom_suite),
        ("yield-cost trade-off", Duration::from_secs(180), yield_cost_tradeoff),
        ("two-copy additivity", Duration::from_secs(180), two_copy_additivity),
        ("distillation witness", Duration::from_secs(120), distillation_witness),
    ];
    let mut failures = 0;
    for (k, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run().unwrap_or_else(|e| Outcome::new(false, format!("error: {e}")));
        let elapsed = start.elapsed();
        let in_budget = elapsed <= *budget;
        let passed = outcome.passed && in_budget;
        if !passed {
            failures += 1;
        }
        println!(
            "{} [{}] {name}: {} [{:.2} s of {} s]",
            if passed { "PASS" } else { "FAIL" },
            k + 1,
            outcome.detail,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
