//! `folia`: exact construction, verification, and stability certification of
//! logarithmic foliations on projective space.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use folia_cli::commands::{
    cmd_basis_dim, cmd_certify, cmd_random, cmd_verify, default_prime, read_params_file,
    CertifyOutput, CmdError, CmdResult, FieldOverride,
};
use folia_cli::formats::{FieldSpec, ScanConfig};
use folia_cli::runner::execute_scan;

#[derive(Parser)]
#[command(
    name = "folia",
    version,
    about = "Exact logarithmic q-forms on projective space and rank-equality stability certificates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct FieldFlags {
    /// Work over the prime field F_p for this odd prime.
    #[arg(long, conflicts_with = "rationals")]
    prime: Option<u64>,
    /// Work over the rationals with arbitrary-precision arithmetic.
    #[arg(long = "field-q", visible_alias = "rationals")]
    rationals: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a reproducible generic parameter point as JSON.
    Random {
        /// Projective ambient dimension.
        #[arg(long)]
        n: usize,
        /// Codimension of the foliation.
        #[arg(long)]
        q: usize,
        /// Comma-separated degree vector d_1,...,d_m.
        #[arg(long, value_delimiter = ',', required = true)]
        degrees: Vec<u32>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[command(flatten)]
        field: FieldFlags,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Verify the defining identities of a parameter file.
    Verify {
        params: PathBuf,
        #[command(flatten)]
        field: FieldFlags,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the stability certificate on a parameter file.
    Certify {
        params: PathBuf,
        /// Comma-separated primes; a rational file is reduced modulo each and
        /// the resulting ranks must agree.
        #[arg(long, value_delimiter = ',', conflicts_with = "rationals")]
        primes: Option<Vec<u64>>,
        /// Certify over the rationals directly (exact confirmation mode).
        #[arg(long = "field-q", visible_alias = "rationals")]
        rationals: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run certificates over a config of instances, seeds, and primes,
    /// appending JSON lines; completed keys are skipped on re-runs.
    Scan {
        config: PathBuf,
        /// Output JSONL file.
        #[arg(long)]
        out: PathBuf,
        /// Worker threads.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Print the dimension of the twisted-form space and its closed-form
    /// cross-check.
    BasisDim {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        q: usize,
        /// Total degree of the twisted forms.
        #[arg(long = "total-degree")]
        total_degree: u32,
        #[command(flatten)]
        field: FieldFlags,
    },
}

fn resolve_field(flags: &FieldFlags) -> CmdResult<FieldSpec> {
    if flags.rationals {
        Ok(FieldSpec::Q)
    } else if let Some(p) = flags.prime {
        Ok(FieldSpec::Fp(p))
    } else {
        Ok(FieldSpec::Fp(default_prime()?))
    }
}

fn field_override(flags: &FieldFlags) -> FieldOverride {
    if flags.rationals {
        FieldOverride::Rationals
    } else if let Some(p) = flags.prime {
        FieldOverride::Prime(p)
    } else {
        FieldOverride::None
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> CmdResult<()> {
    match out {
        Some(path) => std::fs::write(path, format!("{text}\n"))
            .map_err(|e| CmdError::new(2, format!("cannot write {}: {e}", path.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> CmdResult<i32> {
    match cli.command {
        Command::Random {
            n,
            q,
            degrees,
            seed,
            field,
            out,
        } => {
            let spec = resolve_field(&field)?;
            let json = cmd_random(n, q, &degrees, seed, &spec)?;
            emit(&out, &serde_json::to_string(&json).expect("serializable"))?;
            Ok(0)
        }
        Command::Verify { params, field, out } => {
            let json = read_params_file(&params)?;
            let report = cmd_verify(&json, &field_override(&field))?;
            emit(&out, &serde_json::to_string(&report).expect("serializable"))?;
            Ok(if report.passes() { 0 } else { 1 })
        }
        Command::Certify {
            params,
            primes,
            rationals,
            out,
        } => {
            let json = read_params_file(&params)?;
            let output = cmd_certify(&json, primes.as_deref(), rationals)?;
            let text = match &output {
                CertifyOutput::Single(r) => serde_json::to_string(r).expect("serializable"),
                CertifyOutput::MultiPrime(m) => serde_json::to_string(m).expect("serializable"),
            };
            emit(&out, &text)?;
            Ok(if output.certified() { 0 } else { 1 })
        }
        Command::Scan { config, out, jobs } => {
            let text = std::fs::read_to_string(&config)
                .map_err(|e| CmdError::new(3, format!("cannot read {}: {e}", config.display())))?;
            let cfg: ScanConfig = serde_json::from_str(&text)
                .map_err(|e| CmdError::new(3, format!("malformed scan config: {e}")))?;
            let summary = execute_scan(&cfg, &out, jobs, default_prime()?)?;
            eprintln!(
                "scan: {} run(s) written, {} already present",
                summary.written, summary.skipped
            );
            Ok(0)
        }
        Command::BasisDim {
            n,
            q,
            total_degree,
            field,
        } => {
            let spec = resolve_field(&field)?;
            let report = cmd_basis_dim(n, q, total_degree, &spec)?;
            println!("{}", serde_json::to_string(&report).expect("serializable"));
            Ok(if report.ok { 0 } else { 4 })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code as u8)
        }
    }
}
