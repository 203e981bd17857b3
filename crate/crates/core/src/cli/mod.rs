//! The `tubular` command-line frontend.
//!
//! Every command reads a group document (a path, or `-` for standard input)
//! except `snowflake`, and writes one JSON value to standard output.
//! Diagnostics go to standard error. Exit codes: `decide` 0 = RF,
//! 1 = NotRF, 2 = Unknown; `regulate` 0 = regulating tuple, 1 = none;
//! `validate` 0 = valid, 1 = violations; `witness --check-n` 1 when the
//! criterion fails; 3 = any error.

use std::ffi::OsString;
use std::io::{Read, Write};
use std::path::PathBuf;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand};
use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::expansion::{
    decide, run_sequence, DecideOptions, ExpansionOutcome, Verdict, VerdictKind, DEFAULT_BUDGET,
};
use crate::model::{snowflake, TubularGroup, Violation};
use crate::regulating::{single_vertex_decide, SingleVertexVerdict};
use crate::words::{check_modulus, witness_modulus, WitnessRecord, Word};

pub const EXIT_ERROR: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "tubular",
    version,
    about = "Residual finiteness of tubular groups"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide residual finiteness and print the verdict with its certificate.
    Decide {
        file: PathBuf,
        /// Nontrivial expansions allowed per sequence.
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: usize,
        /// Treat FILE as a verdict and re-verify its certificate.
        #[arg(long)]
        recheck: bool,
    },
    /// Run the expansion sequence.
    Expand {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        steps: usize,
        /// Treat FILE as an expansion outcome and re-verify it.
        #[arg(long)]
        recheck: bool,
    },
    /// Search for a regulating tuple (single-vertex groups only).
    Regulate {
        file: PathBuf,
        /// Treat FILE as a regulate result and re-verify it.
        #[arg(long)]
        recheck: bool,
    },
    /// Find a finite quotient in which a word survives.
    Witness {
        file: PathBuf,
        /// Word such as `t;(2,3);t^-1`.
        #[arg(long, allow_hyphen_values = true)]
        word: String,
        /// Also check the survival criterion for this modulus.
        #[arg(long)]
        check_n: Option<BigInt>,
    },
    /// Print the snowflake group G_pq, or its verdict.
    Snowflake {
        p: u64,
        q: u64,
        #[arg(long)]
        decide: bool,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: usize,
    },
    /// List validation problems of a group document.
    Validate { file: PathBuf },
}

/// Output of `regulate`: the group travels with the result so it can be
/// re-checked on its own.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegulateOutput {
    pub group: TubularGroup,
    pub result: SingleVertexVerdict,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModulusCheck {
    #[serde(with = "crate::exactlat::int_string")]
    pub n: BigInt,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WitnessOutput {
    #[serde(flatten)]
    pub record: WitnessRecord,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub check: Option<ModulusCheck>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidateOutput {
    pub valid: bool,
    pub violations: Vec<Violation>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RecheckOutput<'a> {
    pub valid: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<&'a str>,
}

fn read_input(path: &PathBuf) -> anyhow::Result<String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        Ok(s)
    } else {
        std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
    }
}

fn read_group(path: &PathBuf) -> anyhow::Result<TubularGroup> {
    Ok(TubularGroup::from_json(&read_input(path)?)?)
}

fn verdict_code(kind: VerdictKind) -> i32 {
    match kind {
        VerdictKind::Rf => 0,
        VerdictKind::NotRf => 1,
        VerdictKind::Unknown => 2,
    }
}

fn emit<T: Serialize>(out: &mut dyn Write, value: &T) -> anyhow::Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

fn execute(cmd: Command, out: &mut dyn Write) -> anyhow::Result<i32> {
    match cmd {
        Command::Decide {
            file,
            budget,
            recheck,
        } => {
            if recheck {
                let v: Verdict =
                    serde_json::from_str(&read_input(&file)?).context("not a verdict document")?;
                v.verify()
                    .map_err(|m| anyhow!("certificate rejected: {m}"))?;
                emit(
                    out,
                    &RecheckOutput {
                        valid: true,
                        verdict: Some(&v.verdict.to_string()),
                    },
                )?;
                return Ok(verdict_code(v.verdict));
            }
            let g = read_group(&file)?;
            let v = decide(
                &g,
                DecideOptions {
                    budget,
                    ..DecideOptions::default()
                },
            )?;
            emit(out, &v)?;
            Ok(verdict_code(v.verdict))
        }
        Command::Expand {
            file,
            steps,
            recheck,
        } => {
            if recheck {
                let o: ExpansionOutcome = serde_json::from_str(&read_input(&file)?)
                    .context("not an expansion outcome document")?;
                o.verify().map_err(|m| anyhow!("outcome rejected: {m}"))?;
                emit(
                    out,
                    &RecheckOutput {
                        valid: true,
                        verdict: None,
                    },
                )?;
                return Ok(0);
            }
            let g = read_group(&file)?;
            emit(out, &run_sequence(&g, steps)?)?;
            Ok(0)
        }
        Command::Regulate { file, recheck } => {
            let result = if recheck {
                let r: RegulateOutput =
                    serde_json::from_str(&read_input(&file)?).context("not a regulate document")?;
                r.result
                    .verify(&r.group)
                    .map_err(|e| anyhow!("certificate rejected: {e}"))?;
                emit(
                    out,
                    &RecheckOutput {
                        valid: true,
                        verdict: None,
                    },
                )?;
                r.result
            } else {
                let g = read_group(&file)?;
                let result = single_vertex_decide(&g)?;
                emit(
                    out,
                    &RegulateOutput {
                        group: g,
                        result: result.clone(),
                    },
                )?;
                result
            };
            Ok(if result.is_regulating() { 0 } else { 1 })
        }
        Command::Witness {
            file,
            word,
            check_n,
        } => {
            let g = read_group(&file)?;
            let w = Word::parse_in(&g, &word)?;
            let record = witness_modulus(&g, &w)?;
            let check = match check_n {
                Some(n) => Some(ModulusCheck {
                    holds: check_modulus(&g, &w, &n)?,
                    n,
                }),
                None => None,
            };
            let code = if check.as_ref().is_some_and(|c| !c.holds) {
                1
            } else {
                0
            };
            emit(out, &WitnessOutput { record, check })?;
            Ok(code)
        }
        Command::Snowflake {
            p,
            q,
            decide: run_decide,
            budget,
        } => {
            let g = snowflake(p, q)?;
            if !run_decide {
                emit(out, &g)?;
                return Ok(0);
            }
            let v = decide(
                &g,
                DecideOptions {
                    budget,
                    ..DecideOptions::default()
                },
            )?;
            emit(out, &v)?;
            Ok(verdict_code(v.verdict))
        }
        Command::Validate { file } => {
            let g = TubularGroup::from_json_unchecked(&read_input(&file)?)?;
            let violations = g.validate();
            let valid = violations.is_empty();
            emit(out, &ValidateOutput { valid, violations })?;
            Ok(if valid { 0 } else { 1 })
        }
    }
}

/// Runs the CLI on `args` (including the program name) and returns the
/// exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let informational = !e.use_stderr();
            let text = e.render().to_string();
            if informational {
                let _ = write!(out, "{text}");
                return 0;
            }
            let _ = write!(err, "{text}");
            return EXIT_ERROR;
        }
    };
    match execute(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            EXIT_ERROR
        }
    }
}
