//! Dispatch of validated jobs onto the library.

use std::time::Instant;

use athermal::channels::ChannelDescriptor;
use athermal::chanthermo::{
    channel_divergence, channel_energy, channel_entropy, free_energy, max_extractable_work, one_shot_cost,
    one_shot_distill, verify_suite, work_extraction, DivergenceResult, Reference, VerifyReport,
};
use athermal::quantum::{thermal_context, ThermalContext};
use athermal::statediv::DivergenceKind;
use serde_json::{json, Map, Value};

use crate::job::{Command, JobSpec};
use crate::report::{Diagnostics, Report, Row};

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Record per-row wall-clock times instead of zeros.
    pub timing: bool,
}

/// Result of a job together with the checks that failed, if any.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub report: Report,
    /// `(beta, check name, detail)` for every violated check.
    pub failures: Vec<(f64, String, String)>,
}

fn kind_label(kind: DivergenceKind) -> String {
    kind.label()
}

fn row(beta: Option<f64>, quantity: &str, value: f64, converged: bool, restarts: usize) -> Row {
    Row {
        beta,
        quantity: quantity.into(),
        value,
        diagnostics: Diagnostics {
            converged,
            restarts_used: restarts,
            runtime_ms: 0,
            extra: Map::new(),
        },
    }
}

fn from_result(beta: Option<f64>, quantity: &str, r: &DivergenceResult) -> Row {
    row(beta, quantity, r.value, r.converged, r.restart_values.len())
}

fn extra(pairs: Value) -> Map<String, Value> {
    match pairs {
        Value::Object(m) => m,
        _ => Map::new(),
    }
}

fn verify_row(beta: f64, v: &VerifyReport, restarts: usize, failures: &mut Vec<(f64, String, String)>) -> Row {
    let min_margin = v.checks.iter().map(|c| c.margin).fold(f64::INFINITY, f64::min);
    let failed: Vec<&str> = v.failures().map(|c| c.name.as_str()).collect();
    for c in v.failures() {
        failures.push((beta, c.name.clone(), c.detail.clone()));
    }
    let mut r = row(Some(beta), "min_margin", min_margin, v.passed(), restarts);
    r.diagnostics.extra = extra(json!({
        "checks_total": v.checks.len(),
        "checks_failed": failed.len(),
        "failures": failed,
        "checks": v.checks,
    }));
    r
}

/// Evaluates one row per inverse temperature, or a single row for commands
/// without temperature dependence.
pub fn run(job: &JobSpec, opts: &RunOptions) -> athermal::Result<Outcome> {
    let n = &job.channel;
    let cfg = &job.optimizer;
    let mut failures = Vec::new();
    let mut rows = Vec::new();
    let contexts: Vec<ThermalContext> = job
        .betas
        .iter()
        .map(|&b| thermal_context(&job.hamiltonian, b))
        .collect::<athermal::Result<_>>()?;

    let timed = |f: &mut dyn FnMut() -> athermal::Result<Row>| -> athermal::Result<Row> {
        let t0 = Instant::now();
        let mut r = f()?;
        if opts.timing {
            r.diagnostics.runtime_ms = t0.elapsed().as_millis() as u64;
        }
        Ok(r)
    };

    match job.command {
        Command::Entropy => rows.push(timed(&mut || {
            let r = channel_entropy(n, cfg)?;
            Ok(from_result(None, "entropy", &r))
        })?),
        Command::Energy => rows.push(timed(&mut || {
            let r = channel_energy(
                n,
                &job.hamiltonian,
                job.reference_hamiltonian.as_ref(),
                job.interaction_hamiltonian.as_ref(),
                cfg,
            )?;
            Ok(from_result(None, "energy", &r))
        })?),
        Command::Divergence if job.reference.is_some() => rows.push(timed(&mut || {
            let m = job.reference.as_ref().expect("checked");
            let r = channel_divergence(n, Reference::Channel(m), job.kind, cfg)?;
            let mut row = from_result(None, "divergence", &r);
            row.diagnostics.extra = extra(json!({ "kind": kind_label(job.kind) }));
            Ok(row)
        })?),
        _ => {
            for ctx in &contexts {
                let beta = ctx.beta();
                let row = timed(&mut || match job.command {
                    Command::FreeEnergy | Command::Divergence => {
                        let f = free_energy(n, ctx, job.kind, cfg)?;
                        let d = &f.diagnostics;
                        let (quantity, value) = if job.command == Command::FreeEnergy {
                            ("free_energy", f.resource)
                        } else {
                            ("divergence", f.resource * beta)
                        };
                        let mut r = row(Some(beta), quantity, value, d.converged, d.restarts_used);
                        r.diagnostics.extra = extra(json!({
                            "kind": kind_label(job.kind),
                            "thermal_free_energy": f.thermal,
                        }));
                        Ok(r)
                    }
                    Command::Distill => {
                        let eps = job.epsilon.unwrap_or(0.0);
                        let d = one_shot_distill(n, ctx, eps, cfg)?;
                        let mut r = row(Some(beta), "distill", d.value_nats, true, 0);
                        if let Some(w) = &d.witness {
                            r.diagnostics.extra = extra(json!({
                                "epsilon": eps,
                                "golden_units": w.m,
                                "acceptance": w.acceptance,
                                "thermal_weight": w.thermal_weight,
                            }));
                        }
                        Ok(r)
                    }
                    Command::Cost => {
                        let eps = job.epsilon.unwrap_or(0.0);
                        let d = one_shot_cost(n, ctx, eps)?;
                        let mut r = row(Some(beta), "cost", d.value_nats, true, 0);
                        r.diagnostics.extra = extra(json!({ "epsilon": eps }));
                        Ok(r)
                    }
                    Command::Work => {
                        let w = max_extractable_work(n, ctx, cfg)?;
                        let parts = work_extraction(n, &w.argmax_state, ctx)?;
                        let mut r = from_result(Some(beta), "work", &w);
                        r.diagnostics.extra = extra(json!({
                            "decoupling": parts.decoupling,
                            "quench": parts.quench,
                            "reversible": parts.reversible,
                        }));
                        Ok(r)
                    }
                    Command::Verify | Command::Random => {
                        let v = verify_suite(n, ctx, cfg)?;
                        Ok(verify_row(beta, &v, cfg.restarts, &mut failures))
                    }
                    Command::Entropy | Command::Energy => unreachable!("handled above"),
                })?;
                rows.push(row);
            }
        }
    }

    let channel = match job.command {
        Command::Random => Some(
            serde_json::to_value(ChannelDescriptor::from_channel(n, Some(&job.hamiltonian))).expect("serializable"),
        ),
        _ => None,
    };
    Ok(Outcome {
        report: Report {
            command: job.command.name().into(),
            seed: job.seed,
            rows,
            channel,
        },
        failures,
    })
}
