//! JSON wire formats: parameter files, verification and stability reports,
//! and scan configurations. Coefficients travel as strings (decimal integers,
//! `a/b` rationals, or canonical residues when a prime is in force), so files
//! are exact and byte-reproducible.

use serde::{Deserialize, Serialize};

use folia_core::error::{Error, Result};
use folia_core::field::Ring;
use folia_core::forms::PolyForm;
use folia_core::logfol::LogParams;
use folia_core::multivec::{DegreeVector, MultiVector};
use folia_core::poly::{ExpVec, Poly};
use folia_core::tangent::{SanityFlags, StabilityReport};

/// Coefficient field of a parameter file: the rationals or a prime field.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FieldSpec {
    Q,
    Fp(u64),
}

impl Serialize for FieldSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> core::result::Result<S::Ok, S::Error> {
        match self {
            FieldSpec::Q => s.serialize_str("Q"),
            FieldSpec::Fp(p) => {
                use serde::ser::SerializeMap;
                let mut map = s.serialize_map(Some(1))?;
                map.serialize_entry("Fp", p)?;
                map.end()
            }
        }
    }
}

impl<'de> Deserialize<'de> for FieldSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> core::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Wire {
            Name(String),
            Fp { #[serde(rename = "Fp")] p: u64 },
        }
        match Wire::deserialize(d)? {
            Wire::Name(s) if s == "Q" => Ok(FieldSpec::Q),
            Wire::Name(s) => Err(serde::de::Error::custom(format!(
                "unknown field `{s}`, expected \"Q\" or {{\"Fp\": p}}"
            ))),
            Wire::Fp { p } => Ok(FieldSpec::Fp(p)),
        }
    }
}

/// A polynomial as `[coefficient-string, exponent-list]` pairs.
pub type PolyJson = Vec<(String, Vec<u8>)>;

/// A multivector as `[index-list, coefficient-string]` pairs.
pub type MultiVectorJson = Vec<(Vec<u8>, String)>;

/// Parameter file schema.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LogParamsJson {
    pub n: usize,
    pub q: usize,
    pub degrees: Vec<u32>,
    /// Residue vectors as dense coefficient-string arrays of length m.
    pub lambdas: Vec<Vec<String>>,
    pub polys: Vec<PolyJson>,
    pub field: FieldSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

pub fn poly_to_json<F: Ring>(field: &F, p: &Poly<F>) -> PolyJson {
    p.terms()
        .map(|(e, c)| (field.format(c), e.exps().to_vec()))
        .collect()
}

pub fn poly_from_json<F: Ring>(
    field: &F,
    nvars: usize,
    degree: u32,
    json: &PolyJson,
) -> Result<Poly<F>> {
    let terms = json
        .iter()
        .map(|(c, exps)| Ok((ExpVec::new(exps.clone()), field.parse(c)?)))
        .collect::<Result<Vec<_>>>()?;
    Poly::from_terms(field.clone(), nvars, degree, terms)
}

pub fn multivector_to_json<F: Ring>(field: &F, t: &MultiVector<F>) -> MultiVectorJson {
    t.comps()
        .map(|(set, c)| (set.clone(), field.format(c)))
        .collect()
}

/// A polynomial form as `{grade, total_degree, comps: [[index-list, Poly]]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PolyFormJson {
    pub grade: usize,
    pub total_degree: u32,
    pub comps: Vec<(Vec<u8>, PolyJson)>,
}

pub fn polyform_to_json<F: Ring>(field: &F, form: &PolyForm<F>) -> PolyFormJson {
    PolyFormJson {
        grade: form.grade(),
        total_degree: form.total_degree(),
        comps: form
            .comps()
            .map(|(set, p)| (set.clone(), poly_to_json(field, p)))
            .collect(),
    }
}

pub fn polyform_from_json<F: Ring>(
    field: &F,
    nvars: usize,
    json: &PolyFormJson,
) -> Result<PolyForm<F>> {
    let coeff_degree = json
        .total_degree
        .checked_sub(json.grade as u32)
        .ok_or_else(|| Error::Shape("grade exceeds total degree".into()))?;
    let comps = json
        .comps
        .iter()
        .map(|(set, p)| Ok((set.clone(), poly_from_json(field, nvars, coeff_degree, p)?)))
        .collect::<Result<Vec<_>>>()?;
    PolyForm::from_comps(field.clone(), nvars, json.grade, json.total_degree, comps)
}

/// Parameter data after coefficient parsing and shape validation, but before
/// the residue-annihilation invariant is imposed. Verification commands work
/// on this level so that tampered inputs are reported rather than rejected.
#[derive(Clone, Debug)]
pub struct ParsedParams<F: Ring> {
    pub n: usize,
    pub q: usize,
    pub d: DegreeVector,
    pub lambdas: Vec<MultiVector<F>>,
    pub polys: Vec<Poly<F>>,
}

impl<F: Ring> ParsedParams<F> {
    /// The wedge of the residue vectors; zero is degenerate.
    pub fn lambda_tensor(&self) -> Result<MultiVector<F>> {
        let mut t = self.lambdas[0].clone();
        for l in &self.lambdas[1..] {
            t = folia_core::multivec::wedge_mv(&t, l)?;
        }
        if t.is_zero() {
            return Err(Error::Degenerate("dependent residue vectors".into()));
        }
        Ok(t)
    }

    /// Imposes the full parameter-point invariants.
    pub fn into_log_params(self, field: &F) -> Result<LogParams<F>> {
        LogParams::new(
            field.clone(),
            self.n,
            self.q,
            self.d,
            self.lambdas,
            self.polys,
        )
    }
}

pub fn parse_params<F: Ring>(field: &F, json: &LogParamsJson) -> Result<ParsedParams<F>> {
    let d = DegreeVector::new(json.degrees.clone())?;
    let m = d.m();
    if json.q == 0 {
        return Err(Error::Shape("q must be positive".into()));
    }
    if json.lambdas.len() != json.q {
        return Err(Error::Shape(format!(
            "{} residue vectors, expected q = {}",
            json.lambdas.len(),
            json.q
        )));
    }
    let lambdas = json
        .lambdas
        .iter()
        .map(|coords| {
            if coords.len() != m {
                return Err(Error::Shape(format!(
                    "residue vector of length {}, expected m = {m}",
                    coords.len()
                )));
            }
            let elems = coords
                .iter()
                .map(|c| field.parse(c))
                .collect::<Result<Vec<_>>>()?;
            Ok(MultiVector::from_vector(field.clone(), &elems))
        })
        .collect::<Result<Vec<_>>>()?;
    if json.polys.len() != m {
        return Err(Error::Shape(format!(
            "{} polynomials, expected m = {m}",
            json.polys.len()
        )));
    }
    let polys = json
        .polys
        .iter()
        .enumerate()
        .map(|(i, p)| poly_from_json(field, json.n + 1, d.part(i), p))
        .collect::<Result<Vec<_>>>()?;
    Ok(ParsedParams {
        n: json.n,
        q: json.q,
        d,
        lambdas,
        polys,
    })
}

pub fn params_to_json<F: Ring>(
    field: &F,
    p: &LogParams<F>,
    spec: FieldSpec,
    seed: Option<u64>,
) -> LogParamsJson {
    LogParamsJson {
        n: p.n(),
        q: p.q(),
        degrees: p.degree_vector().parts().to_vec(),
        lambdas: p
            .lambdas()
            .iter()
            .map(|l| l.to_vector().iter().map(|c| field.format(c)).collect())
            .collect(),
        polys: p.polys().iter().map(|f| poly_to_json(field, f)).collect(),
        field: spec,
        seed,
    }
}

/// Output of `folia verify`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerifyReport {
    pub descent: bool,
    pub pluecker: bool,
    pub integrability: bool,
    pub logdiff_identity: bool,
    /// Defined for q = 2 only.
    pub genericity: Option<bool>,
    pub balanced_k2: bool,
}

impl VerifyReport {
    /// Exit contract: success iff the four defining identities hold.
    pub fn passes(&self) -> bool {
        self.descent && self.pluecker && self.integrability && self.logdiff_identity
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SanityJson {
    pub omega_in_kernel: bool,
    pub omega_in_image: bool,
    pub image_in_kernel: bool,
    pub step1_vanishing: bool,
}

impl From<&SanityFlags> for SanityJson {
    fn from(s: &SanityFlags) -> Self {
        SanityJson {
            omega_in_kernel: s.omega_in_kernel,
            omega_in_image: s.omega_in_image,
            image_in_kernel: s.image_in_kernel,
            step1_vanishing: s.step1_vanishing,
        }
    }
}

/// Run provenance embedded in every report.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Provenance {
    pub version: String,
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub field: String,
}

/// Stability report line. Assumption flags record what is certified exactly
/// versus assumed generic: smoothness/irreducibility of random nonlinear
/// instances is probabilistic, and the singular-set codimension condition is
/// never checked.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StabilityReportJson {
    pub n: usize,
    pub q: usize,
    pub degrees: Vec<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub field: String,
    pub dim_ambient: usize,
    pub ker_dim: usize,
    pub drho_rank: usize,
    pub quotient_tangent_dim: usize,
    pub quotient_image_dim: usize,
    pub sanity: SanityJson,
    pub balanced_k2: bool,
    pub theorem_silent: bool,
    pub stable: bool,
    pub verdict: String,
    pub assumptions: AssumptionFlags,
    pub provenance: Provenance,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AssumptionFlags {
    /// Exact for all-linear instances, assumed (probability one) otherwise.
    pub normal_crossings_exact: bool,
    pub smooth_irreducible_assumed: bool,
    pub singular_codim_ge2_unchecked: bool,
}

pub fn stability_report_to_json(
    report: &StabilityReport,
    command: &str,
) -> StabilityReportJson {
    let all_linear = report.degrees.iter().all(|&d| d == 1);
    StabilityReportJson {
        n: report.n,
        q: report.q,
        degrees: report.degrees.clone(),
        seed: report.seed,
        field: report.field.to_string(),
        dim_ambient: report.dim_ambient,
        ker_dim: report.ker_dim,
        drho_rank: report.drho_rank,
        quotient_tangent_dim: report.quotient_tangent_dim,
        quotient_image_dim: report.quotient_image_dim,
        sanity: SanityJson::from(&report.sanity),
        balanced_k2: report.balanced_k2,
        theorem_silent: report.theorem_silent,
        stable: report.stable,
        verdict: if report.stable { "stable" } else { "rank-gap" }.into(),
        assumptions: AssumptionFlags {
            normal_crossings_exact: all_linear,
            smooth_irreducible_assumed: !all_linear,
            singular_codim_ge2_unchecked: true,
        },
        provenance: Provenance {
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            seed: report.seed,
            field: report.field.to_string(),
        },
    }
}

/// Multi-prime certificate output.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MultiPrimeReport {
    pub runs: Vec<StabilityReportJson>,
    /// All runs agree on (ker_dim, drho_rank).
    pub agreement: bool,
}

/// Output of `folia basis-dim`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BasisDimReport {
    pub n: usize,
    pub q: usize,
    pub total_degree: u32,
    pub affine_dim: usize,
    pub dim: usize,
    pub bott: u64,
    pub ok: bool,
}

/// Scan configuration file.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScanConfig {
    pub entries: Vec<ScanEntryJson>,
    #[serde(default)]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub primes: Vec<u64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScanEntryJson {
    pub n: usize,
    pub degrees: Vec<u32>,
}

/// Error line written by scans when a run fails.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScanErrorLine {
    pub n: usize,
    pub degrees: Vec<u32>,
    pub seed: u64,
    pub prime: u64,
    pub error: String,
}

/// Fields shared by every scan line, used for idempotent resumes.
#[derive(Debug, Deserialize)]
pub struct ScanLineKey {
    pub n: usize,
    pub degrees: Vec<u32>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub prime: Option<u64>,
    #[serde(default)]
    pub field: Option<String>,
}

impl ScanLineKey {
    /// Canonical resume key `n|degrees|seed|prime`.
    pub fn key(&self) -> Option<String> {
        let seed = self.seed?;
        let prime = self.prime.or_else(|| {
            self.field
                .as_deref()
                .and_then(|f| f.strip_prefix("F_"))
                .and_then(|p| p.parse().ok())
        })?;
        Some(scan_key(self.n, &self.degrees, seed, prime))
    }
}

pub fn scan_key(n: usize, degrees: &[u32], seed: u64, prime: u64) -> String {
    let ds: Vec<String> = degrees.iter().map(u32::to_string).collect();
    format!("{n}|{}|{seed}|{prime}", ds.join(","))
}
