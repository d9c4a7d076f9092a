//! `qmask` command-line tool.
//!
//! Exit codes: 0 on success or a positive verdict, 1 on a negative verdict,
//! 2 on input or decode errors.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand};
use qmask::cmask::{
    marginal_audit, mask_string, unmask_string, BitString, MaskedRegister, DEFAULT_DECODE_TOL,
};
use qmask::protocol::{run_demo, DescriptionSource, Verdict};
use qmask::qcore::{CVector, Dims};
use qmask::scodec::{
    decode_index, decode_params, encode_index, reconstruction_fidelity_floor, state_from_params,
    Alphabet, CodecConfig, QubitParams,
};
use qmask::verifier::{is_masker, Isometry, MaskingReport, StateSet, DEFAULT_EPS};
use qmask::witness::{sweep, SearchConfig};
use qmask::SCHEMA_VERSION;
use serde::{Deserialize, Serialize};

#[derive(Parser)]
#[command(
    name = "qmask",
    version,
    about = "Mask, verify and commit to quantum information"
)]
struct Cli {
    /// Seed for randomized subcommands.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write the JSON report here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Tolerance override (decode tolerance for unmask, distance bound for verify).
    #[arg(long, global = true)]
    eps: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mask a bit-string, a qubit description or an alphabet index into Bell pairs.
    Mask(Source),
    /// Decode a masked register file.
    Unmask {
        file: PathBuf,
        /// Read the bits as a fixed-point (α, θ) description with N bits per parameter.
        #[arg(long, value_name = "N", conflicts_with = "alphabet")]
        as_params: Option<u32>,
        /// Read the bits as an index into this alphabet.
        #[arg(long)]
        alphabet: Option<PathBuf>,
    },
    /// Check whether an isometry masks a set of states.
    Verify {
        /// `diagonal`, `bell`, `canonical` or an isometry JSON file.
        #[arg(long)]
        isometry: String,
        /// `classical`, `phase-family`, `stabilizer` or a state-set JSON file.
        #[arg(long)]
        states: String,
    },
    /// Search for a masker and report the best violation found.
    Witness {
        /// `classical`, `phase-family`, `stabilizer` or a state-set JSON file.
        #[arg(long)]
        states: String,
        /// Ancilla dimensions; one report per value.
        #[arg(long = "db", value_delimiter = ',', default_value = "2")]
        d_b: Vec<usize>,
        #[arg(long, default_value_t = 20)]
        restarts: usize,
        #[arg(long)]
        max_iters: Option<usize>,
    },
    /// Simulate a commitment built on masking, optionally with a phase-flip cheat.
    CommitDemo {
        #[command(flatten)]
        source: Source,
        /// Pair positions Alice phase-flips before opening.
        #[arg(long, value_delimiter = ',')]
        cheat: Option<Vec<usize>>,
    },
}

#[derive(Args)]
struct Source {
    /// A literal bit-string such as 0110.
    #[arg(long, conflicts_with_all = ["params", "alphabet"])]
    bits: Option<String>,
    /// Qubit parameters `alpha,theta` in radians.
    #[arg(long, value_parser = parse_params, conflicts_with = "alphabet", requires = "precision_bits")]
    params: Option<QubitParams>,
    #[arg(long, value_name = "N")]
    precision_bits: Option<u32>,
    /// Alphabet JSON file, used with --index.
    #[arg(long, requires = "index")]
    alphabet: Option<PathBuf>,
    #[arg(long)]
    index: Option<usize>,
}

fn parse_params(s: &str) -> Result<QubitParams, String> {
    let (a, t) = s.split_once(',').ok_or("expected alpha,theta")?;
    let a: f64 = a.trim().parse().map_err(|e| format!("alpha: {e}"))?;
    let t: f64 = t.trim().parse().map_err(|e| format!("theta: {e}"))?;
    QubitParams::new(a, t).map_err(|e| e.to_string())
}

impl Source {
    fn resolve(&self) -> Result<DescriptionSource> {
        if let Some(bits) = &self.bits {
            return Ok(DescriptionSource::Bits(
                bits.parse().context("invalid --bits")?,
            ));
        }
        if let Some(params) = self.params {
            let n = self
                .precision_bits
                .context("--params needs --precision-bits")?;
            return Ok(DescriptionSource::Params {
                params,
                config: CodecConfig::new(n)?,
            });
        }
        if let Some(path) = &self.alphabet {
            let index = self.index.context("--alphabet needs --index")?;
            let alphabet = load_alphabet(path)?;
            encode_index(index, &alphabet)?;
            return Ok(DescriptionSource::Alphabet { alphabet, index });
        }
        bail!("give one of --bits, --params or --alphabet")
    }
}

#[derive(Serialize, Deserialize)]
struct MaskFile {
    schema_version: String,
    source: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    precision_bits: Option<u32>,
    pairs: usize,
    marginal_audit: f64,
    register: MaskedRegister,
}

#[derive(Serialize)]
struct UnmaskReport {
    schema_version: String,
    bits: BitString,
    #[serde(skip_serializing_if = "Option::is_none")]
    params: Option<QubitParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    state: Option<CVector>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fidelity_floor: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    index: Option<usize>,
}

#[derive(Serialize)]
struct VerifyReport {
    schema_version: String,
    isometry: String,
    state_set: String,
    #[serde(flatten)]
    report: MaskingReport,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_alphabet(path: &Path) -> Result<Alphabet> {
    Alphabet::from_json(&read(path)?).with_context(|| format!("alphabet {}", path.display()))
}

fn load_states(name: &str) -> Result<StateSet> {
    if let Some(s) = StateSet::preset(name) {
        return Ok(s);
    }
    let path = Path::new(name);
    ensure!(
        path.exists(),
        "unknown state set {name:?}: not a preset or a file"
    );
    let a = load_alphabet(path)?;
    Ok(StateSet::from_alphabet(name, &a)?)
}

fn load_isometry(name: &str, d_a: usize) -> Result<Isometry> {
    Ok(match name {
        "diagonal" => Isometry::diagonal_masker(),
        "bell" => Isometry::bell_masker(),
        "canonical" => Isometry::canonical_embedding(Dims::new(d_a, 2)?),
        path => {
            ensure!(
                Path::new(path).exists(),
                "unknown isometry {name:?}: not a preset or a file"
            );
            Isometry::from_json(&read(Path::new(path))?)
                .with_context(|| format!("isometry {path}"))?
        }
    })
}

fn emit(out: Option<&Path>, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => Ok(std::io::stdout().write_all(text.as_bytes())?),
    }
}

fn cmd_mask(cli: &Cli, source: &Source) -> Result<ExitCode> {
    let resolved = source.resolve()?;
    let bits = resolved.encode()?;
    let register = mask_string(&bits);
    let (kind, precision_bits) = match &resolved {
        DescriptionSource::Bits(_) => ("bits", None),
        DescriptionSource::Params { config, .. } => ("params", Some(config.n_bits())),
        DescriptionSource::Alphabet { .. } => ("alphabet", None),
    };
    emit(
        cli.out.as_deref(),
        &MaskFile {
            schema_version: SCHEMA_VERSION.into(),
            source: kind.into(),
            precision_bits,
            pairs: register.len(),
            marginal_audit: marginal_audit(&register),
            register,
        },
    )?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_unmask(
    cli: &Cli,
    file: &Path,
    as_params: Option<u32>,
    alphabet: Option<&Path>,
) -> Result<ExitCode> {
    let mask: MaskFile = serde_json::from_str(&read(file)?)
        .with_context(|| format!("malformed register file {}", file.display()))?;
    ensure!(
        mask.schema_version == SCHEMA_VERSION,
        "unsupported schema_version {:?}",
        mask.schema_version
    );
    let bits = unmask_string(&mask.register, cli.eps.unwrap_or(DEFAULT_DECODE_TOL))?;
    let mut report = UnmaskReport {
        schema_version: SCHEMA_VERSION.into(),
        bits,
        params: None,
        state: None,
        fidelity_floor: None,
        index: None,
    };
    if let Some(n) = as_params {
        let config = CodecConfig::new(n)?;
        let params = decode_params(&report.bits, config)?;
        report.state = Some(state_from_params(params));
        report.params = Some(params);
        report.fidelity_floor = Some(reconstruction_fidelity_floor(config));
    }
    if let Some(path) = alphabet {
        report.index = Some(decode_index(&report.bits, &load_alphabet(path)?)?);
    }
    emit(cli.out.as_deref(), &report)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(cli: &Cli, isometry: &str, states: &str) -> Result<ExitCode> {
    let s = load_states(states)?;
    let v = load_isometry(isometry, s.dim())?;
    let report = is_masker(&v, &s, cli.eps.unwrap_or(DEFAULT_EPS))?;
    let verdict = report.is_masker;
    emit(
        cli.out.as_deref(),
        &VerifyReport {
            schema_version: SCHEMA_VERSION.into(),
            isometry: isometry.into(),
            state_set: s.label().into(),
            report,
        },
    )?;
    Ok(if verdict {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_witness(
    cli: &Cli,
    states: &str,
    d_b: &[usize],
    restarts: usize,
    max_iters: Option<usize>,
) -> Result<ExitCode> {
    let seed = cli.seed.context("witness needs --seed")?;
    let s = load_states(states)?;
    let mut cfg =
        SearchConfig::new(seed, d_b.first().copied().unwrap_or(2)).with_restarts(restarts);
    if let Some(m) = max_iters {
        cfg.max_iters = m;
    }
    let reports = sweep(&s, d_b, &cfg)?;
    match reports.as_slice() {
        [single] => emit(cli.out.as_deref(), single)?,
        many => emit(cli.out.as_deref(), &many)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_commit_demo(cli: &Cli, source: &Source, cheat: Option<&[usize]>) -> Result<ExitCode> {
    let report = run_demo(&source.resolve()?, cheat)?;
    emit(cli.out.as_deref(), &report)?;
    Ok(match report.verdict {
        Verdict::Accept => ExitCode::SUCCESS,
        Verdict::Reject => ExitCode::from(1),
    })
}

fn run(cli: &Cli) -> Result<ExitCode> {
    if let Some(eps) = cli.eps {
        ensure!(
            eps.is_finite() && eps >= 0.0,
            "--eps must be a non-negative number"
        );
    }
    match &cli.command {
        Command::Mask(source) => cmd_mask(cli, source),
        Command::Unmask {
            file,
            as_params,
            alphabet,
        } => cmd_unmask(cli, file, *as_params, alphabet.as_deref()),
        Command::Verify { isometry, states } => cmd_verify(cli, isometry, states),
        Command::Witness {
            states,
            d_b,
            restarts,
            max_iters,
        } => cmd_witness(cli, states, d_b, *restarts, *max_iters),
        Command::CommitDemo { source, cheat } => cmd_commit_demo(cli, source, cheat.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
