//! Job files: parsing, command-line overrides and validation.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use athermal::channels::{matrix_from_data, Channel, ChannelDescriptor, MatrixData};
use athermal::chanthermo::OptimizerConfig;
use athermal::linalg::HermitianMatrix;
use athermal::statediv::DivergenceKind;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

pub const DEFAULT_SEED: u64 = 42;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Generalized free energy `β⁻¹ D[N‖T^β]`.
    FreeEnergy,
    /// Channel divergence from the thermal channel or from a reference channel.
    Divergence,
    /// One-shot distillable golden units.
    Distill,
    /// One-shot formation cost.
    Cost,
    /// Maximal extractable work.
    Work,
    /// Channel entropy.
    Entropy,
    /// Channel energy.
    Energy,
    /// Axiom and inequality checks.
    Verify,
    /// Axiom and inequality checks on a seeded random channel.
    Random,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Self::FreeEnergy => "free-energy",
            Self::Divergence => "divergence",
            Self::Distill => "distill",
            Self::Cost => "cost",
            Self::Work => "work",
            Self::Entropy => "entropy",
            Self::Energy => "energy",
            Self::Verify => "verify",
            Self::Random => "random",
        }
    }

    fn uses_kind(self) -> bool {
        matches!(self, Self::FreeEnergy | Self::Divergence)
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KindName {
    Umegaki,
    Renyi,
    Max,
    Hypothesis,
    SmoothedMax,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BetaSweep {
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl BetaSweep {
    /// Evenly spaced points from `start` to `stop` inclusive.
    pub fn points(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.start];
        }
        let h = (self.stop - self.start) / (self.steps - 1) as f64;
        (0..self.steps)
            .map(|k| if k + 1 == self.steps { self.stop } else { self.start + h * k as f64 })
            .collect()
    }
}

impl FromStr for BetaSweep {
    type Err = String;

    /// Parses `start:stop:steps`.
    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("expected start:stop:steps, got {s:?}"));
        }
        let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
        Ok(Self {
            start: num(parts[0])?,
            stop: num(parts[1])?,
            steps: parts[2].trim().parse().map_err(|e| format!("{:?}: {e}", parts[2]))?,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomSpec {
    pub din: usize,
    pub dout: usize,
    /// Environment dimension of the Stinespring isometry; defaults to the
    /// smallest value with `dout · env ≥ din`.
    #[serde(default)]
    pub env: Option<usize>,
    /// Output Hamiltonian, zero when absent.
    #[serde(default)]
    pub hamiltonian: Option<MatrixData>,
}

impl RandomSpec {
    pub fn env_dim(&self) -> usize {
        self.env.unwrap_or_else(|| self.din.div_ceil(self.dout.max(1)).max(1))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerOverrides {
    pub restarts: Option<usize>,
    pub max_iters: Option<usize>,
    pub grad_tol: Option<f64>,
    pub fd_step: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Option<Format>,
}

/// A validated job.
#[derive(Clone, Debug)]
pub struct JobSpec {
    pub command: Command,
    pub descriptor: Option<ChannelDescriptor>,
    pub channel: Channel,
    /// Output Hamiltonian of the channel.
    pub hamiltonian: HermitianMatrix,
    /// Inverse temperatures in ascending order; empty for commands without β.
    pub betas: Vec<f64>,
    pub epsilon: Option<f64>,
    pub kind: DivergenceKind,
    pub reference: Option<Channel>,
    pub reference_hamiltonian: Option<HermitianMatrix>,
    pub interaction_hamiltonian: Option<HermitianMatrix>,
    pub random: Option<RandomSpec>,
    pub optimizer: OptimizerConfig,
    pub seed: u64,
    pub output: OutputSpec,
}

impl JobSpec {
    pub fn format(&self) -> Format {
        self.output.format.unwrap_or_default()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

/// Every problem found in a job document.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct JobError {
    pub errors: Vec<FieldError>,
}

impl JobError {
    fn single(field: &str, message: impl Into<String>) -> Self {
        Self {
            errors: vec![FieldError {
                field: field.into(),
                message: message.into(),
            }],
        }
    }

    pub fn fields(&self) -> impl Iterator<Item = &str> {
        self.errors.iter().map(|e| e.field.as_str())
    }
}

impl fmt::Display for JobError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid job:")?;
        for e in &self.errors {
            write!(f, "\n  {}: {}", e.field, e.message)?;
        }
        Ok(())
    }
}

impl std::error::Error for JobError {}

/// Values given on the command line; each replaces the matching job field.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub command: Option<Command>,
    pub beta: Option<f64>,
    pub beta_sweep: Option<BetaSweep>,
    pub epsilon: Option<f64>,
    pub alpha: Option<f64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

const KNOWN_FIELDS: &[&str] = &[
    "command",
    "channel",
    "random",
    "beta",
    "beta_sweep",
    "epsilon",
    "alpha",
    "divergence",
    "reference",
    "reference_hamiltonian",
    "interaction_hamiltonian",
    "optimizer",
    "seed",
    "output",
];

/// Parses and validates a job document.
pub fn parse_job(text: &str) -> Result<JobSpec, JobError> {
    parse_job_with(text, &Overrides::default())
}

/// [`parse_job`] after applying command-line overrides.
pub fn parse_job_with(text: &str, ov: &Overrides) -> Result<JobSpec, JobError> {
    let value: Value = serde_json::from_str(text).map_err(|e| JobError::single("<document>", e.to_string()))?;
    let Value::Object(mut obj) = value else {
        return Err(JobError::single("<document>", "expected a JSON object"));
    };
    apply_overrides(&mut obj, ov)?;
    validate(&obj)
}

fn apply_overrides(obj: &mut Map<String, Value>, ov: &Overrides) -> Result<(), JobError> {
    if let Some(cmd) = ov.command {
        match obj.get("command") {
            Some(Value::String(s)) if s != cmd.name() => {
                return Err(JobError::single(
                    "command",
                    format!("job file says {s:?} but {:?} was requested", cmd.name()),
                ))
            }
            _ => {
                obj.insert("command".into(), Value::String(cmd.name().into()));
            }
        }
    }
    let num = |x: f64| serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null);
    if let Some(b) = ov.beta {
        obj.remove("beta_sweep");
        obj.insert("beta".into(), num(b));
    }
    if let Some(s) = ov.beta_sweep {
        obj.remove("beta");
        obj.insert("beta_sweep".into(), serde_json::to_value(s).expect("serializable"));
    }
    if let Some(e) = ov.epsilon {
        obj.insert("epsilon".into(), num(e));
    }
    if let Some(a) = ov.alpha {
        obj.insert("alpha".into(), num(a));
    }
    if let Some(s) = ov.seed {
        obj.insert("seed".into(), Value::from(s));
    }
    if ov.out.is_some() || ov.format.is_some() {
        let out = obj
            .entry("output")
            .or_insert_with(|| Value::Object(Map::new()));
        if let Value::Object(o) = out {
            if let Some(p) = &ov.out {
                o.insert("path".into(), Value::String(p.to_string_lossy().into_owned()));
            }
            if let Some(f) = ov.format {
                o.insert("format".into(), serde_json::to_value(f).expect("serializable"));
            }
        }
    }
    Ok(())
}

struct Collector<'a> {
    obj: &'a Map<String, Value>,
    errors: Vec<FieldError>,
}

impl Collector<'_> {
    fn push(&mut self, field: &str, message: impl Into<String>) {
        self.errors.push(FieldError {
            field: field.into(),
            message: message.into(),
        });
    }

    fn get<T: DeserializeOwned>(&mut self, field: &str) -> Option<T> {
        let v = self.obj.get(field)?;
        if v.is_null() {
            return None;
        }
        match serde_json::from_value(v.clone()) {
            Ok(t) => Some(t),
            Err(e) => {
                self.push(field, e.to_string());
                None
            }
        }
    }

    fn present(&self, field: &str) -> bool {
        self.obj.get(field).is_some_and(|v| !v.is_null())
    }

    fn matrix(&mut self, field: &str, dim: Option<usize>) -> Option<HermitianMatrix> {
        let data: MatrixData = self.get(field)?;
        let h = matrix_from_data(&data).and_then(HermitianMatrix::new);
        match h {
            Ok(h) if dim.is_some_and(|d| d != h.dim()) => {
                self.push(field, format!("dimension {}, expected {}", h.dim(), dim.unwrap_or(0)));
                None
            }
            Ok(h) => Some(h),
            Err(e) => {
                self.push(field, e.to_string());
                None
            }
        }
    }

    fn channel(&mut self, field: &str) -> Option<(ChannelDescriptor, Channel, HermitianMatrix)> {
        let d: ChannelDescriptor = self.get(field)?;
        match d.to_channel().and_then(|ch| Ok((ch, d.hamiltonian_matrix()?))) {
            Ok((ch, h)) => Some((d, ch, h)),
            Err(e) => {
                self.push(field, e.to_string());
                None
            }
        }
    }
}

fn validate(obj: &Map<String, Value>) -> Result<JobSpec, JobError> {
    let mut c = Collector {
        obj,
        errors: Vec::new(),
    };
    for key in obj.keys() {
        if !KNOWN_FIELDS.contains(&key.as_str()) {
            c.push(key, "unknown field");
        }
    }

    let command: Option<Command> = c.get("command");
    if command.is_none() && !c.present("command") {
        c.push("command", "missing");
    }

    // Fields a command does not use are ignored, so one job file can serve
    // several commands.
    let random: Option<RandomSpec> = if command == Some(Command::Random) { c.get("random") } else { None };
    let mut descriptor = None;
    let mut channel = None;
    let mut hamiltonian = None;
    if command == Some(Command::Random) {
        match &random {
            None if !c.present("random") => c.push("random", "missing; command random needs {din, dout}"),
            None => {}
            Some(r) if r.din == 0 || r.dout == 0 || r.env == Some(0) => {
                c.push("random", "dimensions must be positive")
            }
            Some(r) if r.dout * r.env_dim() < r.din => {
                c.push("random", format!("dout · env = {} is smaller than din = {}", r.dout * r.env_dim(), r.din))
            }
            Some(r) => {
                if let Some(rows) = &r.hamiltonian {
                    match matrix_from_data(rows).and_then(HermitianMatrix::new) {
                        Ok(h) if h.dim() == r.dout => hamiltonian = Some(h),
                        Ok(h) => c.push("random", format!("hamiltonian of dimension {}, expected {}", h.dim(), r.dout)),
                        Err(e) => c.push("random", format!("hamiltonian: {e}")),
                    }
                }
            }
        }
    } else if c.present("channel") {
        if let Some((d, ch, h)) = c.channel("channel") {
            descriptor = Some(d);
            channel = Some(ch);
            hamiltonian = Some(h);
        }
    } else if command.is_some() {
        c.push("channel", "missing");
    }

    // Inverse temperatures.
    let beta: Option<f64> = c.get("beta");
    let sweep: Option<BetaSweep> = c.get("beta_sweep");
    let has_reference = command == Some(Command::Divergence) && c.present("reference");
    let needs_beta = command.is_some_and(|cmd| match cmd {
        Command::Entropy | Command::Energy => false,
        Command::Divergence => !has_reference,
        _ => true,
    });
    let mut betas = Vec::new();
    let both = c.present("beta") && c.present("beta_sweep");
    if both {
        c.push("beta", "give either beta or beta_sweep, not both");
    }
    if needs_beta && !c.present("beta") && !c.present("beta_sweep") {
        c.push("beta", "missing; give beta or beta_sweep");
    }
    if let Some(b) = beta {
        if !(b.is_finite() && b > 0.0) {
            c.push("beta", format!("must be positive and finite, got {b}"));
        } else if needs_beta && !both {
            betas.push(b);
        }
    }
    if let Some(s) = sweep {
        let ok_ends = s.start.is_finite() && s.stop.is_finite() && s.start > 0.0;
        if s.steps == 0 {
            c.push("beta_sweep", "steps must be at least 1");
        } else if !ok_ends {
            c.push("beta_sweep", "start and stop must be positive and finite");
        } else if s.steps > 1 && !(s.stop > s.start) {
            c.push("beta_sweep", "stop must exceed start");
        } else if needs_beta && !both {
            betas = s.points();
        }
    }

    // Smoothing and order parameters.
    let epsilon: Option<f64> = c.get("epsilon");
    if let Some(e) = epsilon {
        if !(0.0..1.0).contains(&e) {
            c.push("epsilon", format!("must lie in [0, 1), got {e}"));
        }
    }
    let alpha: Option<f64> = c.get("alpha");
    if let Some(a) = alpha {
        if !(a >= 0.5 && a.is_finite()) {
            c.push("alpha", format!("must be finite and at least 1/2, got {a}"));
        }
    }
    let kind_name: Option<KindName> = c.get("divergence");
    let mut kind = DivergenceKind::Umegaki;
    if command.is_some_and(Command::uses_kind) {
        let name = kind_name.unwrap_or(if alpha.is_some() { KindName::Renyi } else { KindName::Umegaki });
        if alpha.is_some() && name != KindName::Renyi {
            c.push("alpha", format!("conflicts with the {} divergence", serde_json::to_value(name).expect("serializable")));
        }
        if has_reference && matches!(name, KindName::Max | KindName::SmoothedMax) {
            c.push("divergence", "max and smoothed-max are only available against the thermal channel");
        }
        kind = match name {
            KindName::Umegaki => DivergenceKind::Umegaki,
            KindName::Renyi => match alpha {
                Some(a) if a == 1.0 => DivergenceKind::Umegaki,
                Some(a) => DivergenceKind::Renyi(a),
                None => {
                    if !c.present("alpha") {
                        c.push("alpha", "missing; the renyi divergence needs alpha");
                    }
                    DivergenceKind::Umegaki
                }
            },
            KindName::Max => DivergenceKind::Max,
            KindName::Hypothesis | KindName::SmoothedMax => {
                let e = match epsilon {
                    Some(e) => e,
                    None => {
                        if !c.present("epsilon") {
                            c.push("epsilon", "missing; this divergence needs epsilon");
                        }
                        0.0
                    }
                };
                if name == KindName::Hypothesis {
                    DivergenceKind::Hypothesis(e)
                } else {
                    DivergenceKind::SmoothedMax(e)
                }
            }
        };
    }

    let reference = if has_reference {
        c.channel("reference").and_then(|(_, r, _)| match &channel {
            Some(n) if (n.din(), n.dout()) != (r.din(), r.dout()) => {
                c.push(
                    "reference",
                    format!("maps {} → {} but the channel maps {} → {}", r.din(), r.dout(), n.din(), n.dout()),
                );
                None
            }
            _ => Some(r),
        })
    } else {
        None
    };
    let din = channel.as_ref().map(|n| n.din());
    let dout = channel.as_ref().map(|n| n.dout());
    let energy = command == Some(Command::Energy);
    let reference_hamiltonian = if energy && c.present("reference_hamiltonian") {
        c.matrix("reference_hamiltonian", din)
    } else {
        None
    };
    let interaction_hamiltonian = if energy && c.present("interaction_hamiltonian") {
        c.matrix("interaction_hamiltonian", din.zip(dout).map(|(a, b)| a * b))
    } else {
        None
    };

    let seed: u64 = c.get("seed").unwrap_or(DEFAULT_SEED);
    let ov: OptimizerOverrides = c.get("optimizer").unwrap_or_default();
    let mut optimizer = OptimizerConfig::default().with_seed(seed);
    optimizer.restarts = ov.restarts.unwrap_or(optimizer.restarts);
    optimizer.max_iters = ov.max_iters.unwrap_or(optimizer.max_iters);
    optimizer.grad_tol = ov.grad_tol.unwrap_or(optimizer.grad_tol);
    optimizer.fd_step = ov.fd_step.unwrap_or(optimizer.fd_step);
    if let Err(e) = optimizer.validate() {
        c.push("optimizer", e.to_string());
    }
    let output: OutputSpec = c.get("output").unwrap_or_default();

    if !c.errors.is_empty() {
        return Err(JobError { errors: c.errors });
    }
    let command = command.expect("validated");
    let (channel, hamiltonian) = match command {
        Command::Random => {
            let r = random.as_ref().expect("validated");
            (
                athermal::channels::random_channel(r.din, r.dout, r.env_dim(), seed)
                    .map_err(|e| JobError::single("random", e.to_string()))?,
                hamiltonian.unwrap_or_else(|| HermitianMatrix::zeros(r.dout)),
            )
        }
        _ => (channel.expect("validated"), hamiltonian.expect("validated")),
    };
    Ok(JobSpec {
        command,
        descriptor,
        channel,
        hamiltonian,
        betas,
        epsilon,
        kind,
        reference,
        reference_hamiltonian,
        interaction_hamiltonian,
        random,
        optimizer,
        seed,
        output,
    })
}
