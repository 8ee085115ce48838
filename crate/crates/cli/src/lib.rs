//! Command-line front end: argument parsing, dispatch, certificate output and
//! the self-test table.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use frobsplit_core::certificate::{self, Certificate};
use frobsplit_core::finitefield::{FqContext, FqElem, PrimeModulus};
use frobsplit_core::splitcrit::{self, DivisorP1, MuChoice, Rounding};
use frobsplit_core::{threefold, Config, Error};
use serde_json::Value;

pub mod selftest;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IDENTITY: i32 = 1;
pub const EXIT_RESOURCE: i32 = 2;
pub const EXIT_USAGE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "frobsplit", version, about = "Frobenius-splitting criteria and certificates")]
pub struct Cli {
    /// Write JSON output (certificates, reports) to FILE instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    pub json: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Find μ with (P^1, 1/2(∞ + 0 + (-1) + (-μ))) not split at level 1.
    Mu {
        #[arg(long)]
        p: u64,
    },
    /// Level-e splitting test for (P^1, Δ).
    Split {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        e: u32,
        /// Comma-separated COEFF@POINT, POINT one of inf, an integer, ext:c0,c1,...
        #[arg(long, allow_hyphen_values = true)]
        divisor: String,
        /// Round (p^e-1)Δ up instead of down.
        #[arg(long)]
        sharp: bool,
    },
    /// Bracket fst(P^1, Δ; D) by the levels e <= emax.
    Fst {
        #[arg(long)]
        p: u64,
        #[arg(long, allow_hyphen_values = true)]
        delta: String,
        #[arg(long, allow_hyphen_values = true)]
        d: String,
        #[arg(long)]
        emax: u32,
    },
    /// Certificate for a klt del Pezzo surface that is not globally F-split.
    Delpezzo {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        n: i64,
        /// μ as an integer or ext:c0,c1 in the canonical F_{p^2}.
        #[arg(long, allow_hyphen_values = true)]
        mu: Option<String>,
    },
    /// Certificate for a canonical threefold singularity that is not F-pure.
    Threefold {
        #[arg(long)]
        p: u64,
    },
    /// Run the invariant suite and print a pass/fail table.
    Selftest {
        /// Only run checks whose name contains this string.
        #[arg(long)]
        filter: Option<String>,
    },
    /// Validate a certificate against the schema and replay its COMPUTED nodes.
    Verify {
        file: PathBuf,
    },
}

/// Outcome of one command: exit code plus stdout and stderr text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome {
            code: EXIT_OK,
            stdout,
            stderr: String::new(),
        }
    }

    fn fail(code: i32, stderr: String) -> Self {
        Outcome {
            code,
            stdout: String::new(),
            stderr,
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Resource(_) => EXIT_RESOURCE,
        Error::Parse(_) | Error::InvalidInput(_) | Error::NotPrime(_) => EXIT_USAGE,
        _ => EXIT_IDENTITY,
    }
}

fn from_error(e: Error) -> Outcome {
    Outcome::fail(exit_code(&e), format!("error: {e}\n"))
}

/// Compiled certificate schema.
pub fn schema_validator() -> jsonschema::Validator {
    let schema: Value = serde_json::from_str(certificate::SCHEMA).expect("schema is JSON");
    jsonschema::validator_for(&schema).expect("schema compiles")
}

/// Schema violations of a certificate, as messages.
pub fn schema_errors(instance: &Value) -> Vec<String> {
    schema_validator()
        .iter_errors(instance)
        .map(|e| format!("{}: {e}", e.instance_path()))
        .collect()
}

fn prime(p: u64) -> Result<PrimeModulus, Error> {
    PrimeModulus::new(p)
}

/// `c` or `ext:c0,c1,...` as an element of `F_p` or the canonical extension.
pub fn parse_element(p: PrimeModulus, s: &str) -> Result<FqElem, Error> {
    let s = s.trim();
    let parse_int = |t: &str| -> Result<u64, Error> {
        let v: i128 = t.trim().parse().map_err(|_| Error::Parse(format!("not an integer: {t}")))?;
        Ok(v.rem_euclid(p.get() as i128) as u64)
    };
    match s.strip_prefix("ext:") {
        None => Ok(FqContext::prime(p).embed_prime(parse_int(s)?)),
        Some(rest) => {
            let coeffs = rest.split(',').map(parse_int).collect::<Result<Vec<_>, _>>()?;
            let ctx = FqContext::extension(p, coeffs.len().max(2))?;
            Ok(ctx.element(&coeffs))
        }
    }
}

fn emit_json(cli_json: &Option<PathBuf>, value: &str, out: &mut String) -> Result<(), Error> {
    match cli_json {
        Some(path) => {
            // write to a sibling temp file, then rename
            let tmp = path.with_extension("tmp");
            let mut f = std::fs::File::create(&tmp).map_err(|e| Error::InvalidInput(format!("{}: {e}", tmp.display())))?;
            f.write_all(value.as_bytes())
                .and_then(|_| f.write_all(b"\n"))
                .map_err(|e| Error::InvalidInput(e.to_string()))?;
            std::fs::rename(&tmp, path).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
            out.push_str(&format!("wrote {}\n", path.display()));
        }
        None => {
            out.push_str(value);
            out.push('\n');
        }
    }
    Ok(())
}

fn certificate_out(cli_json: &Option<PathBuf>, cert: &Certificate) -> Result<String, Error> {
    let v = serde_json::to_value(cert).expect("serializable");
    let errors = schema_errors(&v);
    if !errors.is_empty() {
        return Err(Error::Internal(format!("certificate violates the schema: {}", errors.join("; "))));
    }
    let mut out = String::new();
    emit_json(cli_json, &cert.to_json_pretty(), &mut out)?;
    Ok(out)
}

pub fn run(cli: Cli, cfg: &Config) -> Outcome {
    let json = cli.json.clone();
    let result = match cli.command {
        Command::Mu { p } => cmd_mu(p, cfg),
        Command::Split { p, e, divisor, sharp } => cmd_split(p, e, &divisor, sharp, &json, cfg),
        Command::Fst { p, delta, d, emax } => cmd_fst(p, &delta, &d, emax, &json, cfg),
        Command::Delpezzo { p, n, mu } => cmd_delpezzo(p, n, mu.as_deref(), &json, cfg),
        Command::Threefold { p } => prime(p)
            .and_then(|p| threefold::build_non_fpure_canonical(p, cfg))
            .and_then(|c| certificate_out(&json, &c)),
        Command::Selftest { filter } => {
            let (ok, table) = selftest::run(filter.as_deref(), cfg);
            return Outcome {
                code: if ok { EXIT_OK } else { EXIT_IDENTITY },
                stdout: table,
                stderr: String::new(),
            };
        }
        Command::Verify { file } => return cmd_verify(&file, cfg),
    };
    match result {
        Ok(s) => Outcome::ok(s),
        Err(e) => from_error(e),
    }
}

/// Parse `args` (including the program name) and run; usage errors exit 3.
pub fn run_args<I, T>(args: I, cfg: &Config) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli, cfg),
        Err(e) => match e.kind() {
            clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => Outcome::ok(e.to_string()),
            _ => Outcome::fail(EXIT_USAGE, e.to_string()),
        },
    }
}

fn cmd_mu(p: u64, cfg: &Config) -> Result<String, Error> {
    let p = prime(p)?;
    match splitcrit::find_nonsplit_mu(p, cfg)? {
        MuChoice::Any => Ok("p = 2: any four distinct points\n".into()),
        MuChoice::Found(mu) => {
            let d = splitcrit::half_configuration(&mu)?;
            let mut out = format!("mu = {mu}\n");
            if mu.ctx().degree() > 1 {
                out.push_str(&format!("field = {}\n", mu.ctx().describe()));
            }
            for e in 1..=2 {
                let split = splitcrit::level_split_test(p, e, &d, cfg)?;
                out.push_str(&format!(
                    "level {e}: (P^1, {d}) {}\n",
                    if split { "SPLIT" } else { "NON-SPLIT" }
                ));
                if e == 1 && split {
                    return Err(Error::IdentityFailed(format!("μ = {mu} splits at level 1")));
                }
            }
            Ok(out)
        }
    }
}

fn cmd_split(p: u64, e: u32, divisor: &str, sharp: bool, json: &Option<PathBuf>, cfg: &Config) -> Result<String, Error> {
    let p = prime(p)?;
    let d = DivisorP1::parse(p, divisor, cfg)?;
    let rounding = if sharp { Rounding::Ceil } else { Rounding::Floor };
    let report = splitcrit::level_split_report_with(p, e, &d, rounding, cfg)?;
    let mut out = String::new();
    if report.split {
        let (a, b) = report.witness.expect("split reports carry a witness");
        out.push_str(&format!("SPLIT (witness s^{a} t^{b}, q = {})\n", report.q));
    } else if report.degree_exceeded {
        out.push_str(&format!(
            "NON-SPLIT (degree {} > 2(q-1) = {})\n",
            report.degree,
            2 * (report.q - 1)
        ));
    } else {
        out.push_str(&format!(
            "NON-SPLIT (every coefficient of s^a t^b with a, b < {} vanishes)\n",
            report.q
        ));
    }
    if json.is_some() {
        emit_json(json, &serde_json::to_string_pretty(&report).expect("serializable"), &mut out)?;
    }
    Ok(out)
}

fn cmd_fst(p: u64, delta: &str, d: &str, emax: u32, json: &Option<PathBuf>, cfg: &Config) -> Result<String, Error> {
    let p = prime(p)?;
    let delta = DivisorP1::parse(p, delta, cfg)?;
    let d = DivisorP1::parse(p, d, cfg)?;
    let interval = splitcrit::fst_bounds(p, &delta, &d, emax, cfg)?;
    let mut out = String::new();
    emit_json(json, &serde_json::to_string_pretty(&interval).expect("serializable"), &mut out)?;
    Ok(out)
}

fn cmd_delpezzo(p: u64, n: i64, mu: Option<&str>, json: &Option<PathBuf>, cfg: &Config) -> Result<String, Error> {
    let p = prime(p)?;
    let mu = mu.map(|m| parse_element(p, m)).transpose()?;
    let cert = certificate::delpezzo_certificate(p, n, mu, cfg)?;
    certificate_out(json, &cert)
}

fn cmd_verify(file: &PathBuf, cfg: &Config) -> Outcome {
    let text = match std::fs::read_to_string(file) {
        Ok(t) => t,
        Err(e) => return Outcome::fail(EXIT_USAGE, format!("error: {}: {e}\n", file.display())),
    };
    let value: Value = match serde_json::from_str(&text) {
        Ok(v) => v,
        Err(e) => return Outcome::fail(EXIT_USAGE, format!("error: not JSON: {e}\n")),
    };
    let schema = schema_errors(&value);
    if !schema.is_empty() {
        return Outcome::fail(EXIT_IDENTITY, format!("schema violations:\n  {}\n", schema.join("\n  ")));
    }
    let cert: Certificate = match serde_json::from_value(value) {
        Ok(c) => c,
        Err(e) => return Outcome::fail(EXIT_USAGE, format!("error: {e}\n")),
    };
    let report = certificate::verify(&cert, cfg);
    let mut out = String::new();
    for p in &report.structural {
        out.push_str(&format!("STRUCTURE {p}\n"));
    }
    for r in &report.replay {
        let status = if r.identical && r.holds { "OK" } else { "MISMATCH" };
        out.push_str(&format!("{status:8} {} ({})", r.id, r.op));
        if let Some(e) = &r.error {
            out.push_str(&format!(" error: {e}"));
        }
        out.push('\n');
    }
    out.push_str(&format!(
        "{} COMPUTED nodes replayed, {}\n",
        report.replay.len(),
        if report.ok() { "all identical" } else { "FAILED" }
    ));
    Outcome {
        code: if report.ok() { EXIT_OK } else { EXIT_IDENTITY },
        stdout: out,
        stderr: String::new(),
    }
}
