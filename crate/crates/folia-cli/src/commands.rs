//! Command implementations shared by the binary and the test suites.
//!
//! Exit-code contract:
//! 0 success, 1 failed verification / uncertified run (including
//! theorem-silent degree vectors), 2 usage or precondition or sampling
//! errors, 3 malformed input files, 4 internal-consistency failures.

use std::path::Path;

use folia_core::error::Error;
use folia_core::field::{Field, PrimeField, Rationals, Ring};
use folia_core::forms::{ext_d, radial_contract, wedge_forms};
use folia_core::logfol::{
    balanced_check, differential, genericity_check, hat_f,
    integrability_check, log_form_from_tensor, pluecker_check, random_params,
};
use folia_core::multivec::DegreeVector;
use folia_core::tangent::{bott_dimension, certify_stability, twisted_form_basis};
use folia_core::DEFAULT_PRIME;

use crate::formats::{
    params_to_json, parse_params, stability_report_to_json, BasisDimReport, FieldSpec,
    LogParamsJson, MultiPrimeReport, StabilityReportJson, VerifyReport,
};

/// Error carrying the process exit code.
#[derive(Debug)]
pub struct CmdError {
    pub code: i32,
    pub message: String,
}

impl CmdError {
    pub fn new(code: i32, message: impl Into<String>) -> Self {
        CmdError {
            code,
            message: message.into(),
        }
    }
}

pub type CmdResult<T> = Result<T, CmdError>;

/// Maps kernel errors arising from file contents: anything wrong with the
/// data itself is a malformed input.
fn file_error(e: Error) -> CmdError {
    match e {
        Error::Inconsistency(_) => CmdError::new(4, e.to_string()),
        Error::Parse(_) | Error::Shape(_) => CmdError::new(3, e.to_string()),
        _ => CmdError::new(2, e.to_string()),
    }
}

/// Maps kernel errors arising from computations on validated data.
fn run_error(e: Error) -> CmdError {
    match e {
        Error::Inconsistency(_) => CmdError::new(4, e.to_string()),
        _ => CmdError::new(2, e.to_string()),
    }
}

/// The active prime when none is given: `FOLIA_DEFAULT_PRIME` or 32003.
pub fn default_prime() -> CmdResult<u64> {
    match std::env::var("FOLIA_DEFAULT_PRIME") {
        Ok(s) => s
            .trim()
            .parse::<u64>()
            .map_err(|_| CmdError::new(2, format!("FOLIA_DEFAULT_PRIME=`{s}` is not an integer"))),
        Err(_) => Ok(DEFAULT_PRIME),
    }
}

pub fn prime_field(p: u64) -> CmdResult<PrimeField> {
    PrimeField::new(p).map_err(|e| CmdError::new(2, e.to_string()))
}

pub fn read_params_file(path: &Path) -> CmdResult<LogParamsJson> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CmdError::new(3, format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CmdError::new(3, format!("malformed parameter file: {e}")))
}

/// Generates a parameter file over the requested field.
pub fn cmd_random(
    n: usize,
    q: usize,
    degrees: &[u32],
    seed: u64,
    field: &FieldSpec,
) -> CmdResult<LogParamsJson> {
    let d = DegreeVector::new(degrees.to_vec()).map_err(|e| CmdError::new(2, e.to_string()))?;
    match field {
        FieldSpec::Q => {
            let p = random_params(&Rationals, seed, n, q, &d).map_err(run_error)?;
            Ok(params_to_json(&Rationals, &p, FieldSpec::Q, Some(seed)))
        }
        FieldSpec::Fp(prime) => {
            let f = prime_field(*prime)?;
            let p = random_params(&f, seed, n, q, &d).map_err(run_error)?;
            Ok(params_to_json(&f, &p, FieldSpec::Fp(*prime), Some(seed)))
        }
    }
}

fn verify_in<F: Field>(field: &F, json: &LogParamsJson) -> CmdResult<VerifyReport> {
    let parsed = parse_params(field, json).map_err(file_error)?;
    let q = parsed.q;
    let m = parsed.d.m();
    let tensor = parsed.lambda_tensor().map_err(run_error)?;
    let omega =
        log_form_from_tensor(field, &tensor, &parsed.d, &parsed.polys).map_err(run_error)?;
    let descent = radial_contract(&omega).is_zero();
    let pluecker = pluecker_check(&omega, q).map_err(run_error)?;
    let integrability = integrability_check(&omega, q).map_err(run_error)?;
    // F d(omega) = dF ^ omega holds for the constructed form regardless of
    // the residue constraint, so it stays checkable on tampered inputs
    let f_all = hat_f(field, &parsed.polys, &[]).map_err(run_error)?;
    let lhs = ext_d(&omega).scale_poly(&f_all).map_err(run_error)?;
    let rhs = wedge_forms(&differential(&f_all), &omega).map_err(run_error)?;
    let logdiff_identity = lhs == rhs;
    let genericity = (q == 2).then(|| genericity_check(&tensor));
    let balanced_k2 = m > 2 && balanced_check(&parsed.d, 2);
    Ok(VerifyReport {
        descent,
        pluecker,
        integrability,
        logdiff_identity,
        genericity,
        balanced_k2,
    })
}

/// Resolves the working field for file-based commands: an explicit flag wins,
/// otherwise the file field applies. A prime flag over a rational file means
/// reduction; changing the prime of a prime-field file is refused.
pub enum FieldOverride {
    None,
    Rationals,
    Prime(u64),
}

pub fn cmd_verify(json: &LogParamsJson, over: &FieldOverride) -> CmdResult<VerifyReport> {
    match (&json.field, over) {
        (FieldSpec::Q, FieldOverride::None | FieldOverride::Rationals) => {
            verify_in(&Rationals, json)
        }
        (FieldSpec::Q, FieldOverride::Prime(p)) => {
            let f = prime_field(*p)?;
            let reduced = reduce_json(json, &f)?;
            verify_in(&f, &reduced)
        }
        (FieldSpec::Fp(p), FieldOverride::None) => verify_in(&prime_field(*p)?, json),
        (FieldSpec::Fp(p), FieldOverride::Prime(flag)) if p == flag => {
            verify_in(&prime_field(*p)?, json)
        }
        (FieldSpec::Fp(p), FieldOverride::Prime(flag)) => Err(CmdError::new(
            2,
            format!("file is over F_{p}; cannot re-reduce to F_{flag}"),
        )),
        (FieldSpec::Fp(p), FieldOverride::Rationals) => Err(CmdError::new(
            2,
            format!("file is over F_{p}; cannot lift to Q"),
        )),
    }
}

/// Reduces a rational parameter file modulo a prime, keeping the schema.
fn reduce_json(json: &LogParamsJson, f: &PrimeField) -> CmdResult<LogParamsJson> {
    // validate the rational file shape before touching coefficients
    parse_params(&Rationals, json).map_err(file_error)?;
    let reduce = |s: &String| -> CmdResult<String> {
        let x = Rationals.parse(s).map_err(file_error)?;
        let r = f.reduce_rational(&x).map_err(run_error)?;
        Ok(f.format(&r))
    };
    let lambdas = json
        .lambdas
        .iter()
        .map(|v| v.iter().map(reduce).collect::<CmdResult<Vec<_>>>())
        .collect::<CmdResult<Vec<_>>>()?;
    let polys = json
        .polys
        .iter()
        .map(|p| {
            p.iter()
                .map(|(c, e)| Ok((reduce(c)?, e.clone())))
                .collect::<CmdResult<Vec<_>>>()
        })
        .collect::<CmdResult<Vec<_>>>()?;
    Ok(LogParamsJson {
        n: json.n,
        q: json.q,
        degrees: json.degrees.clone(),
        lambdas,
        polys,
        field: FieldSpec::Fp(f.modulus()),
        seed: json.seed,
    })
}

fn certify_in<F: Field>(
    field: &F,
    json: &LogParamsJson,
    command: &str,
) -> CmdResult<StabilityReportJson> {
    let params = parse_params(field, json)
        .and_then(|p| p.into_log_params(field))
        .map_err(file_error)?;
    let report = certify_stability(&params, json.seed).map_err(run_error)?;
    Ok(stability_report_to_json(&report, command))
}

/// Certificate output: one report, or one per prime with an agreement flag.
pub enum CertifyOutput {
    Single(Box<StabilityReportJson>),
    MultiPrime(MultiPrimeReport),
}

impl CertifyOutput {
    /// Success means: every run stable and sane, and ranks agree across runs.
    pub fn certified(&self) -> bool {
        match self {
            CertifyOutput::Single(r) => r.stable && !r.theorem_silent,
            CertifyOutput::MultiPrime(m) => {
                m.agreement && m.runs.iter().all(|r| r.stable && !r.theorem_silent)
            }
        }
    }

    /// A run on a non-2-balanced degree vector: reported, but no claim made.
    pub fn theorem_silent(&self) -> bool {
        match self {
            CertifyOutput::Single(r) => r.theorem_silent,
            CertifyOutput::MultiPrime(m) => m.runs.iter().any(|r| r.theorem_silent),
        }
    }
}

pub fn cmd_certify(
    json: &LogParamsJson,
    primes: Option<&[u64]>,
    force_rationals: bool,
) -> CmdResult<CertifyOutput> {
    if force_rationals {
        if json.field != FieldSpec::Q {
            return Err(CmdError::new(2, "file is not over Q"));
        }
        return Ok(CertifyOutput::Single(Box::new(certify_in(
            &Rationals, json, "certify",
        )?)));
    }
    match (&json.field, primes) {
        (FieldSpec::Q, Some(ps)) if !ps.is_empty() => {
            let mut runs = Vec::with_capacity(ps.len());
            for &p in ps {
                let f = prime_field(p)?;
                let reduced = reduce_json(json, &f)?;
                runs.push(certify_in(&f, &reduced, "certify")?);
            }
            if runs.len() == 1 {
                return Ok(CertifyOutput::Single(Box::new(runs.pop().unwrap())));
            }
            let agreement = runs
                .windows(2)
                .all(|w| w[0].ker_dim == w[1].ker_dim && w[0].drho_rank == w[1].drho_rank);
            Ok(CertifyOutput::MultiPrime(MultiPrimeReport {
                runs,
                agreement,
            }))
        }
        (FieldSpec::Q, _) => Ok(CertifyOutput::Single(Box::new(certify_in(
            &Rationals, json, "certify",
        )?))),
        (FieldSpec::Fp(p), maybe) => {
            if let Some(ps) = maybe {
                if !(ps.is_empty() || ps == [*p]) {
                    return Err(CmdError::new(
                        2,
                        format!("file is over F_{p}; re-running over other primes needs a rational file"),
                    ));
                }
            }
            let f = prime_field(*p)?;
            Ok(CertifyOutput::Single(Box::new(certify_in(
                &f, json, "certify",
            )?)))
        }
    }
}

pub fn cmd_basis_dim(n: usize, q: usize, d: u32, field: &FieldSpec) -> CmdResult<BasisDimReport> {
    let (dim, affine_dim) = match field {
        FieldSpec::Q => {
            let b = twisted_form_basis(&Rationals, n, q, d).map_err(run_error)?;
            (b.dim(), b.affine_dim())
        }
        FieldSpec::Fp(p) => {
            let f = prime_field(*p)?;
            let b = twisted_form_basis(&f, n, q, d).map_err(run_error)?;
            (b.dim(), b.affine_dim())
        }
    };
    let bott = bott_dimension(n, q, d);
    Ok(BasisDimReport {
        n,
        q,
        total_degree: d,
        affine_dim,
        dim,
        bott,
        ok: dim as u64 == bott,
    })
}

/// One scan run: deterministic rational instance reduced modulo the prime,
/// then the full certificate. Returns the JSON line to append.
pub fn scan_run_line(n: usize, degrees: &[u32], seed: u64, prime: u64) -> String {
    let result = (|| -> Result<StabilityReportJson, Error> {
        let d = DegreeVector::new(degrees.to_vec())?;
        let params_q = random_params(&Rationals, seed, n, 2, &d)?;
        let f = PrimeField::new(prime)?;
        let params_p = params_q.map_scalars(f, &|x| f.reduce_rational(x))?;
        let report = certify_stability(&params_p, Some(seed))?;
        Ok(stability_report_to_json(&report, "scan"))
    })();
    match result {
        Ok(report) => serde_json::to_string(&report).expect("report serializes"),
        Err(e) => serde_json::to_string(&crate::formats::ScanErrorLine {
            n,
            degrees: degrees.to_vec(),
            seed,
            prime,
            error: e.to_string(),
        })
        .expect("error line serializes"),
    }
}

