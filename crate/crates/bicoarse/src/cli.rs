//! The `bicoarse` command-line frontend.
//!
//! Subcommands: `norm`, `dist`, `moves`, `qm`, `hs`, `z`, `audit`, `lab`.
//! Words use the shared ASCII format (lowercase generator, uppercase
//! inverse, `1` for the identity). Plain mode prints one value per line;
//! `--json` wraps the result in the envelope
//! `{"cmd": …, "rank": …, "result": …, "meta": …}` with a stable schema.
//!
//! Exit codes: 0 success, 1 domain error (as a machine-readable object in
//! JSON mode), 2 usage error.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;
use num_rational::BigRational;
use serde_json::{json, Value};

use crate::audit::{
    audit, conjugation_defect, f2_cancel_preset, perturbed_z_preset, z2_euclid_preset,
    DefectReport, EuclidSq, Extremum, MetricValue,
};
use crate::cancel::{
    cancellation_distance, cancellation_length, certificate, oracle_bound,
};
use crate::lab::{
    almost_commuting_search, commutation_defect, in_strip, phi, u_word, Slope,
};
use crate::moves::{geodesic_moves, move_distance, MoveDistance};
use crate::qmorph::{
    controlledness_modulus, defect_on_ball, homogenize, Quasimorphism, RolliTable,
};
use crate::transforms::{local_apply, replacement_apply, wobbling_apply, LocalRule, Permutation, ReplacementRule, Wobble};
use crate::words::{Alphabet, ReducedWord, Word};
use crate::zmetric::{
    factorial_length_check, profinite_witness, verify_witness, window_diameter, z_word_length,
    ZGenKind, ZGenSet, ZLength,
};

#[derive(Debug, Parser)]
#[command(name = "bicoarse", version, about = "Exact bi-invariant word metric toolkit")]
struct Cli {
    /// Alphabet rank (number of free generators).
    #[arg(long, global = true, default_value_t = 2)]
    rank: u32,
    /// Emit the JSON envelope instead of plain lines.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Cancellation length of a word.
    Norm {
        word: String,
        /// Also emit the deletion/matching certificate.
        #[arg(long)]
        certificate: bool,
    },
    /// Cancellation distance between two words.
    Dist {
        w1: String,
        w2: String,
        #[arg(long)]
        certificate: bool,
    },
    /// Move-graph distance and geodesics.
    Moves {
        w1: String,
        w2: String,
        /// Cap on the number of moves searched.
        #[arg(long)]
        cap: Option<u64>,
        /// Emit a cancellations-first geodesic.
        #[arg(long)]
        emit_geodesic: bool,
    },
    /// Quasimorphism evaluation and estimates.
    #[command(subcommand)]
    Qm(QmCommand),
    /// Word transformations (replacement, wobbling, local rules).
    #[command(subcommand)]
    Hs(HsCommand),
    /// Word metrics on the integers.
    #[command(subcommand)]
    Z(ZCommand),
    /// Coarse-group axiom audit of a preset sample.
    Audit {
        #[arg(long, value_parser = ["f2-cancel", "z2-euclid", "perturbed"])]
        preset: String,
        /// Sample radius (word length, half-side) and largest modulus row.
        #[arg(long, default_value_t = 2)]
        radius: u64,
    },
    /// Strip-kernel probes.
    #[command(subcommand)]
    Lab(LabCommand),
}

#[derive(Debug, Subcommand)]
enum QmCommand {
    /// Evaluate a quasimorphism on a word.
    Eval {
        #[command(flatten)]
        spec: QmSpec,
        word: String,
    },
    /// Finite-ball defect estimate (a lower bound for the true defect).
    Defect {
        #[command(flatten)]
        spec: QmSpec,
        #[arg(long, default_value_t = 3)]
        radius: usize,
    },
    /// Homogenization estimate phi(g^n)/n with error bound.
    Homog {
        #[command(flatten)]
        spec: QmSpec,
        word: String,
        #[arg(long, default_value_t = 16)]
        n: u32,
        /// Ball radius used for the defect in the error bound.
        #[arg(long, default_value_t = 3)]
        defect_radius: usize,
    },
    /// Controlledness modulus table rho(r).
    Modulus {
        #[command(flatten)]
        spec: QmSpec,
        #[arg(long, default_value_t = 3)]
        radius: usize,
    },
}

#[derive(Debug, Args)]
struct QmSpec {
    /// Quasimorphism JSON: {"brooks":"ab"} | {"brooksNO":"ab"} |
    /// {"rolli":{"1":1}} | {"hom":{"a":"-1","b":"8/5"}}.
    #[arg(long)]
    spec: String,
}

#[derive(Debug, Subcommand)]
enum HsCommand {
    /// Apply a replacement map. Rule: {"w1":"ab","w2":"acb"}.
    Replace {
        #[arg(long)]
        rule: String,
        word: String,
    },
    /// Apply a wobbling map. Rule: {"v":"ab","sigma":{"1":2,"2":1}}.
    Wobble {
        #[arg(long)]
        rule: String,
        word: String,
    },
    /// Apply a local substitution. Rule: {"k":2,"targetRank":1,"table":{"ab":"a","BA":"A"}}.
    Local {
        #[arg(long)]
        rule: String,
        word: String,
    },
}

#[derive(Debug, Subcommand)]
enum ZCommand {
    /// Word length of an integer over a generating set.
    Len {
        k: i64,
        /// Set: "factorials:6" | "powers:2:10" | "primes:10000" | "explicit:1,2,6".
        #[arg(long)]
        set: String,
        /// Members to exclude, comma separated.
        #[arg(long, value_delimiter = ',')]
        exclude: Vec<u64>,
        #[arg(long, default_value_t = 8)]
        cap: u32,
    },
    /// Check |k|_S <= m for every 1 <= k <= n.
    Window {
        #[arg(long)]
        set: String,
        #[arg(long, value_delimiter = ',')]
        exclude: Vec<u64>,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        m: u64,
    },
    /// The factorial-length check |n!| = n over the factorials minus n!.
    Factorial {
        #[arg(long)]
        n: u32,
    },
    /// Construct and verify the pro-Q witness sequence.
    Profinite {
        /// The primes of Q, comma separated, in product order.
        #[arg(long, value_delimiter = ',')]
        primes: Vec<u64>,
        /// The separated prime q.
        #[arg(long)]
        q: u64,
        #[arg(long, default_value_t = 3)]
        steps: usize,
    },
}

#[derive(Debug, Subcommand)]
enum LabCommand {
    /// The word u_n = a^floor(n*beta) b^n.
    U {
        #[arg(long)]
        n: u64,
        /// Slope as an exact fraction p/q > 1.
        #[arg(long, default_value = "8/5")]
        beta: String,
    },
    /// phi(w) = -e_a(w) + beta*e_b(w) and strip membership.
    Phi {
        word: String,
        #[arg(long, default_value = "8/5")]
        beta: String,
    },
    /// Commutation defect d(uW, Wu).
    Defect { u: String, w: String },
    /// Exhaustive search for almost-commuting words.
    Search {
        /// Center word u (explicit), or use --n with --beta.
        #[arg(long)]
        u: Option<String>,
        #[arg(long)]
        n: Option<u64>,
        #[arg(long, default_value = "8/5")]
        beta: String,
        #[arg(long, default_value_t = 0)]
        max_defect: u64,
        #[arg(long, default_value_t = 6)]
        cap: usize,
        #[arg(long, default_value_t = 4)]
        k_max: u64,
    },
}

/// Captured run of the CLI: exit code plus both streams.
#[derive(Debug, PartialEq, Eq)]
pub struct CliOutcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

struct DomainError(String);

impl<E: std::fmt::Display> From<E> for DomainError {
    fn from(e: E) -> Self {
        DomainError(e.to_string())
    }
}

/// Payload of a successful command: the result value, the plain-mode
/// lines, and envelope metadata.
struct Payload {
    result: Value,
    plain: String,
    meta: Value,
}

impl Payload {
    fn new(result: Value, plain: String) -> Self {
        Payload { result, plain, meta: json!({}) }
    }

    fn with_meta(mut self, meta: Value) -> Self {
        self.meta = meta;
        self
    }
}

/// Runs the CLI on the given arguments (excluding the binary name is fine;
/// clap tolerates both) and captures the outcome.
pub fn run<I, S>(args: I) -> CliOutcome
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let args: Vec<String> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            // Help and version requests are successes on stdout.
            return if e.exit_code() == 0 {
                CliOutcome { code: 0, stdout: rendered, stderr: String::new() }
            } else {
                CliOutcome { code: 2, stdout: String::new(), stderr: rendered }
            };
        }
    };
    let rank = cli.rank;
    let json_mode = cli.json;
    let cmd_name = command_name(&cli.command);
    match dispatch(cli) {
        Ok(payload) => {
            let stdout = if json_mode {
                let envelope = json!({
                    "cmd": cmd_name,
                    "rank": rank,
                    "result": payload.result,
                    "meta": payload.meta,
                });
                format!("{}\n", serde_json::to_string_pretty(&envelope).unwrap())
            } else {
                payload.plain
            };
            CliOutcome { code: 0, stdout, stderr: String::new() }
        }
        Err(DomainError(message)) => {
            if json_mode {
                let envelope = json!({
                    "cmd": cmd_name,
                    "rank": rank,
                    "error": message,
                });
                CliOutcome {
                    code: 1,
                    stdout: format!("{}\n", serde_json::to_string_pretty(&envelope).unwrap()),
                    stderr: String::new(),
                }
            } else {
                CliOutcome { code: 1, stdout: String::new(), stderr: format!("error: {message}\n") }
            }
        }
    }
}

fn command_name(command: &Command) -> &'static str {
    match command {
        Command::Norm { .. } => "norm",
        Command::Dist { .. } => "dist",
        Command::Moves { .. } => "moves",
        Command::Qm(QmCommand::Eval { .. }) => "qm eval",
        Command::Qm(QmCommand::Defect { .. }) => "qm defect",
        Command::Qm(QmCommand::Homog { .. }) => "qm homog",
        Command::Qm(QmCommand::Modulus { .. }) => "qm modulus",
        Command::Hs(HsCommand::Replace { .. }) => "hs replace",
        Command::Hs(HsCommand::Wobble { .. }) => "hs wobble",
        Command::Hs(HsCommand::Local { .. }) => "hs local",
        Command::Z(ZCommand::Len { .. }) => "z len",
        Command::Z(ZCommand::Window { .. }) => "z window",
        Command::Z(ZCommand::Factorial { .. }) => "z factorial",
        Command::Z(ZCommand::Profinite { .. }) => "z profinite",
        Command::Audit { .. } => "audit",
        Command::Lab(LabCommand::U { .. }) => "lab u",
        Command::Lab(LabCommand::Phi { .. }) => "lab phi",
        Command::Lab(LabCommand::Defect { .. }) => "lab defect",
        Command::Lab(LabCommand::Search { .. }) => "lab search",
    }
}

fn dispatch(cli: Cli) -> Result<Payload, DomainError> {
    let alphabet = Alphabet::new(cli.rank)?;
    match cli.command {
        Command::Norm { word, certificate: with_cert } => {
            let word = Word::parse(&word, alphabet)?;
            let norm = cancellation_length(&word);
            let mut plain = format!("{norm}\n");
            let mut result = json!({ "norm": norm });
            if with_cert {
                let cert = certificate(&word);
                debug_assert!(cert.verify(&word));
                let cert_json = json!({
                    "deleted": cert.deleted,
                    "matching": cert.matching,
                });
                let _ = writeln!(plain, "{}", serde_json::to_string(&cert_json).unwrap());
                result["certificate"] = cert_json;
            }
            Ok(Payload::new(result, plain))
        }
        Command::Dist { w1, w2, certificate: with_cert } => {
            let w1 = ReducedWord::parse(&w1, alphabet)?;
            let w2 = ReducedWord::parse(&w2, alphabet)?;
            let distance = cancellation_distance(&w1, &w2);
            let mut plain = format!("{distance}\n");
            let mut result = json!({ "distance": distance });
            if with_cert {
                let difference = Word::from(w1.invert().mul(&w2));
                let cert = certificate(&difference);
                let cert_json = json!({
                    "word": difference.to_string(),
                    "deleted": cert.deleted,
                    "matching": cert.matching,
                });
                let _ = writeln!(plain, "{}", serde_json::to_string(&cert_json).unwrap());
                result["certificate"] = cert_json;
            }
            Ok(Payload::new(result, plain))
        }
        Command::Moves { w1, w2, cap, emit_geodesic } => {
            let w1 = ReducedWord::parse(&w1, alphabet)?;
            let w2 = ReducedWord::parse(&w2, alphabet)?;
            let cap = cap.unwrap_or((w1.len() + w2.len()) as u64);
            let distance = move_distance(&w1, &w2, cap);
            let mut plain = match distance {
                MoveDistance::Reached(d) => format!("{d}\n"),
                MoveDistance::Unreached => "unreached\n".to_string(),
            };
            let mut result = match distance {
                MoveDistance::Reached(d) => json!({ "distance": d }),
                MoveDistance::Unreached => json!({ "distance": Value::Null }),
            };
            if emit_geodesic {
                let geodesic = geodesic_moves(&w1, &w2, cap)?;
                let end = geodesic.end()?;
                let geo_json = json!({
                    "start": geodesic.start.to_string(),
                    "moves": serde_json::to_value(&geodesic.moves).unwrap(),
                    "end": end.to_string(),
                });
                let _ = writeln!(plain, "{}", serde_json::to_string(&geo_json).unwrap());
                result["geodesic"] = geo_json;
            }
            Ok(Payload::new(result, plain).with_meta(json!({ "cap": cap })))
        }
        Command::Qm(qm) => run_qm(qm, alphabet),
        Command::Hs(hs) => run_hs(hs, alphabet),
        Command::Z(z) => run_z(z),
        Command::Audit { preset, radius } => run_audit(&preset, radius),
        Command::Lab(lab) => run_lab(lab, alphabet),
    }
}

fn parse_rational(text: &str) -> Result<BigRational, DomainError> {
    BigRational::from_str(text.trim())
        .map_err(|e| DomainError(format!("bad rational '{text}': {e}")))
}

fn parse_qm_spec(spec: &str, alphabet: Alphabet) -> Result<Quasimorphism, DomainError> {
    let value: Value =
        serde_json::from_str(spec).map_err(|e| DomainError(format!("bad spec JSON: {e}")))?;
    let object = value
        .as_object()
        .ok_or_else(|| DomainError("spec must be a JSON object".into()))?;
    if object.len() != 1 {
        return Err(DomainError("spec must have exactly one key".into()));
    }
    let (key, body) = object.iter().next().unwrap();
    match key.as_str() {
        "brooks" | "brooksNO" => {
            let text = body
                .as_str()
                .ok_or_else(|| DomainError(format!("{key} expects a word string")))?;
            let pattern = ReducedWord::parse(text, alphabet)?;
            if key == "brooks" {
                Ok(Quasimorphism::brooks(pattern)?)
            } else {
                Ok(Quasimorphism::brooks_non_overlap(pattern)?)
            }
        }
        "rolli" => {
            let table = body
                .as_object()
                .ok_or_else(|| DomainError("rolli expects an object".into()))?;
            let mut entries = Vec::new();
            for (k, v) in table {
                let k: i64 =
                    k.parse().map_err(|_| DomainError(format!("bad rolli key '{k}'")))?;
                let v = v
                    .as_i64()
                    .ok_or_else(|| DomainError(format!("bad rolli value for '{k}'")))?;
                entries.push((k, v));
            }
            Ok(Quasimorphism::Rolli { alpha: RolliTable::new(entries)? })
        }
        "hom" => {
            let table = body
                .as_object()
                .ok_or_else(|| DomainError("hom expects an object".into()))?;
            let mut coefficients =
                vec![BigRational::from(BigInt::from(0)); alphabet.rank() as usize];
            for (k, v) in table {
                let word = ReducedWord::parse(k, alphabet)?;
                if word.len() != 1 || word.letters()[0].is_inverse() {
                    return Err(DomainError(format!("hom key '{k}' must be a generator")));
                }
                let text = v
                    .as_str()
                    .ok_or_else(|| DomainError("hom values are rational strings".into()))?;
                coefficients[word.letters()[0].generator() as usize] = parse_rational(text)?;
            }
            Ok(Quasimorphism::ExponentHom { coefficients })
        }
        other => Err(DomainError(format!("unknown quasimorphism kind '{other}'"))),
    }
}

fn run_qm(qm: QmCommand, alphabet: Alphabet) -> Result<Payload, DomainError> {
    match qm {
        QmCommand::Eval { spec, word } => {
            let q = parse_qm_spec(&spec.spec, alphabet)?;
            let g = ReducedWord::parse(&word, alphabet)?;
            let value = q.evaluate(&g);
            Ok(Payload::new(json!({ "value": value.to_string() }), format!("{value}\n")))
        }
        QmCommand::Defect { spec, radius } => {
            let q = parse_qm_spec(&spec.spec, alphabet)?;
            let estimate = defect_on_ball(&q, alphabet, radius)?;
            let plain = format!(
                "{}\nwitness {} {}\n",
                estimate.value, estimate.witness.0, estimate.witness.1
            );
            let result = json!({
                "lowerBound": estimate.value.to_string(),
                "witness": [estimate.witness.0.to_string(), estimate.witness.1.to_string()],
            });
            Ok(Payload::new(result, plain).with_meta(json!({ "radius": radius })))
        }
        QmCommand::Homog { spec, word, n, defect_radius } => {
            let q = parse_qm_spec(&spec.spec, alphabet)?;
            let g = ReducedWord::parse(&word, alphabet)?;
            let defect = defect_on_ball(&q, alphabet, defect_radius)?;
            let (estimate, error) = homogenize(&q, &g, n, &defect.value);
            let plain = format!("{estimate}\nerror bound {error}\n");
            let result = json!({
                "estimate": estimate.to_string(),
                "errorBound": error.to_string(),
            });
            Ok(Payload::new(result, plain)
                .with_meta(json!({ "n": n, "defectRadius": defect_radius })))
        }
        QmCommand::Modulus { spec, radius } => {
            let q = parse_qm_spec(&spec.spec, alphabet)?;
            let table = controlledness_modulus(&q, alphabet, radius)?;
            let mut plain = String::new();
            for (r, value) in table.iter().enumerate() {
                let _ = writeln!(plain, "rho({r}) = {value}");
            }
            let result = json!({
                "rho": table.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
            });
            Ok(Payload::new(result, plain).with_meta(json!({ "radius": radius })))
        }
    }
}

fn rule_object(rule: &str) -> Result<serde_json::Map<String, Value>, DomainError> {
    let value: Value =
        serde_json::from_str(rule).map_err(|e| DomainError(format!("bad rule JSON: {e}")))?;
    value.as_object().cloned().ok_or_else(|| DomainError("rule must be a JSON object".into()))
}

fn rule_word(
    object: &serde_json::Map<String, Value>,
    key: &str,
    alphabet: Alphabet,
) -> Result<ReducedWord, DomainError> {
    let text = object
        .get(key)
        .and_then(Value::as_str)
        .ok_or_else(|| DomainError(format!("rule needs a word field '{key}'")))?;
    Ok(ReducedWord::parse(text, alphabet)?)
}

fn run_hs(hs: HsCommand, alphabet: Alphabet) -> Result<Payload, DomainError> {
    match hs {
        HsCommand::Replace { rule, word } => {
            let object = rule_object(&rule)?;
            let rule = ReplacementRule::new(
                rule_word(&object, "w1", alphabet)?,
                rule_word(&object, "w2", alphabet)?,
            )?;
            let g = ReducedWord::parse(&word, alphabet)?;
            let image = replacement_apply(&rule, &g);
            Ok(Payload::new(json!({ "image": image.to_string() }), format!("{image}\n")))
        }
        HsCommand::Wobble { rule, word } => {
            let object = rule_object(&rule)?;
            let base = rule_word(&object, "v", alphabet)?;
            let sigma_obj = object
                .get("sigma")
                .and_then(Value::as_object)
                .ok_or_else(|| DomainError("rule needs a 'sigma' object".into()))?;
            let mut entries = Vec::new();
            for (k, v) in sigma_obj {
                let k: u64 =
                    k.parse().map_err(|_| DomainError(format!("bad sigma key '{k}'")))?;
                let v = v
                    .as_u64()
                    .ok_or_else(|| DomainError(format!("bad sigma value for '{k}'")))?;
                entries.push((k, v));
            }
            let wobble = Wobble::new(base, Permutation::new(entries)?)?;
            let g = ReducedWord::parse(&word, alphabet)?;
            let image = wobbling_apply(&wobble, &g)?;
            Ok(Payload::new(json!({ "image": image.to_string() }), format!("{image}\n")))
        }
        HsCommand::Local { rule, word } => {
            let object = rule_object(&rule)?;
            let window = object
                .get("k")
                .and_then(Value::as_u64)
                .ok_or_else(|| DomainError("rule needs a window length 'k'".into()))?
                as usize;
            let target_rank = object.get("targetRank").and_then(Value::as_u64).unwrap_or(
                alphabet.rank() as u64,
            ) as u32;
            let target = Alphabet::new(target_rank)?;
            let table_obj = object
                .get("table")
                .and_then(Value::as_object)
                .ok_or_else(|| DomainError("rule needs a 'table' object".into()))?;
            let mut entries = Vec::new();
            for (k, v) in table_obj {
                let window_word = Word::parse(k, alphabet)?;
                let text = v
                    .as_str()
                    .ok_or_else(|| DomainError("table values are word strings".into()))?;
                entries.push((window_word, Word::parse(text, target)?));
            }
            let rule = LocalRule::new(window, entries)?;
            let g = ReducedWord::parse(&word, alphabet)?;
            let image = local_apply(&rule, &g);
            Ok(Payload::new(json!({ "image": image.to_string() }), format!("{image}\n")))
        }
    }
}

fn parse_zset(text: &str, exclude: Vec<u64>) -> Result<ZGenSet, DomainError> {
    let mut parts = text.split(':');
    let kind = parts.next().unwrap_or_default();
    let parse_u64 = |s: Option<&str>, what: &str| -> Result<u64, DomainError> {
        s.ok_or_else(|| DomainError(format!("set needs {what}")))?
            .parse()
            .map_err(|_| DomainError(format!("bad {what} in set '{text}'")))
    };
    let kind = match kind {
        "factorials" => ZGenKind::Factorials { max_n: parse_u64(parts.next(), "max n")? as u32 },
        "powers" => ZGenKind::PowersOf {
            base: parse_u64(parts.next(), "base")?,
            max_exp: parse_u64(parts.next(), "max exponent")? as u32,
        },
        "primes" => ZGenKind::Primes { limit: parse_u64(parts.next(), "limit")? },
        "explicit" => {
            let list = parts
                .next()
                .ok_or_else(|| DomainError("explicit set needs members".into()))?
                .split(',')
                .map(|s| s.trim().parse::<u64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| DomainError(format!("bad member list in '{text}'")))?;
            ZGenKind::Explicit(list)
        }
        other => return Err(DomainError(format!("unknown set kind '{other}'"))),
    };
    Ok(ZGenSet::new(kind, exclude)?)
}

fn run_z(z: ZCommand) -> Result<Payload, DomainError> {
    match z {
        ZCommand::Len { k, set, exclude, cap } => {
            let set = parse_zset(&set, exclude)?;
            let length = z_word_length(k, &set, cap);
            let (plain, result) = match length {
                ZLength::Reached(v) => (format!("{v}\n"), json!({ "length": v })),
                ZLength::Unreached => ("unreached\n".to_string(), json!({ "length": Value::Null })),
            };
            Ok(Payload::new(result, plain).with_meta(json!({ "cap": cap })))
        }
        ZCommand::Window { set, exclude, n, m } => {
            let set = parse_zset(&set, exclude)?;
            let report = window_diameter(&set, n, m);
            let plain = if report.ok {
                format!("ok\n")
            } else {
                format!("failures {:?}\n", report.failures)
            };
            Ok(Payload::new(serde_json::to_value(&report).unwrap(), plain)
                .with_meta(json!({ "n": n, "m": m })))
        }
        ZCommand::Factorial { n } => {
            let check = factorial_length_check(n)?;
            let plain = format!(
                "{}\n",
                match check.computed {
                    ZLength::Reached(v) => v.to_string(),
                    ZLength::Unreached => "unreached".to_string(),
                }
            );
            Ok(Payload::new(serde_json::to_value(&check).unwrap(), plain))
        }
        ZCommand::Profinite { primes, q, steps } => {
            let witness = profinite_witness(&primes, q, steps)?;
            verify_witness(&witness).map_err(|e| DomainError(e.to_string()))?;
            let mut plain = String::new();
            let values: Vec<Value> = witness
                .values
                .iter()
                .map(|v| {
                    let factors: BTreeMap<String, String> = v
                        .exponents()
                        .iter()
                        .map(|(p, e)| (p.to_string(), e.to_string()))
                        .collect();
                    json!({
                        "decimal": v.decimal().map(Value::from).unwrap_or(Value::Null),
                        "factors": factors,
                    })
                })
                .collect();
            for (i, v) in witness.values.iter().enumerate() {
                let shown = v
                    .decimal()
                    .filter(|d| d.len() <= 40)
                    .unwrap_or_else(|| {
                        let factors: Vec<String> = v
                            .exponents()
                            .iter()
                            .map(|(p, e)| format!("{p}^{e}"))
                            .collect();
                        factors.join(" * ")
                    });
                let _ = writeln!(plain, "k_{} = {}", i + 1, shown);
            }
            let _ = writeln!(plain, "verified");
            let result = json!({
                "values": values,
                "moduli": witness.moduli,
                "exponents": witness.exponents.iter().map(|a| a.to_string()).collect::<Vec<_>>(),
                "verified": true,
            });
            Ok(Payload::new(result, plain).with_meta(json!({ "steps": steps })))
        }
    }
}

fn report_to_json<T: std::fmt::Display, M: MetricValue>(report: &DefectReport<T, M>) -> Value {
    fn extremum<T: std::fmt::Display, M: MetricValue>(e: &Extremum<T, M>) -> Value {
        json!({ "value": e.value.to_string(), "witness": e.witness.to_string() })
    }
    json!({
        "sample": report.sample_label,
        "sampleSize": report.sample_size,
        "assoc": json!({
            "value": report.assoc.value.to_string(),
            "witness": format!(
                "({}, {}, {})",
                report.assoc.witness.0, report.assoc.witness.1, report.assoc.witness.2
            ),
        }),
        "unit": extremum(&report.unit),
        "inverse": extremum(&report.inverse),
        "abelian": json!({
            "value": report.abelian.value.to_string(),
            "witness": format!("({}, {})", report.abelian.witness.0, report.abelian.witness.1),
        }),
        "equi": report
            .equi
            .iter()
            .map(|row| {
                json!({
                    "radius": row.radius.to_string(),
                    "rho": row.rho.to_string(),
                })
            })
            .collect::<Vec<_>>(),
    })
}

fn report_to_plain<T: std::fmt::Display, M: MetricValue>(report: &DefectReport<T, M>) -> String {
    let mut plain = String::new();
    let _ = writeln!(plain, "sample {} ({} elements)", report.sample_label, report.sample_size);
    let _ = writeln!(plain, "assoc {}", report.assoc.value);
    let _ = writeln!(plain, "unit {}", report.unit.value);
    let _ = writeln!(plain, "inverse {}", report.inverse.value);
    let _ = writeln!(
        plain,
        "abelian {} witness ({}, {})",
        report.abelian.value, report.abelian.witness.0, report.abelian.witness.1
    );
    for row in &report.equi {
        let _ = writeln!(plain, "rho({}) = {}", row.radius, row.rho);
    }
    plain
}

fn run_audit(preset: &str, radius: u64) -> Result<Payload, DomainError> {
    match preset {
        "f2-cancel" => {
            let magma = f2_cancel_preset(radius as usize);
            let radii: Vec<u64> = (0..=radius).collect();
            let report = audit(&magma, &radii)?;
            // The coarse-normality probe over the a-powers rides along.
            let h: Vec<ReducedWord> = (-(radius as i64 + 2)..=(radius as i64 + 2))
                .map(|k| {
                    ReducedWord::parse("a", Alphabet::new(2).unwrap()).unwrap().power(k)
                })
                .collect();
            let conj = conjugation_defect(&magma, &h, &magma.sample)?;
            let mut plain = report_to_plain(&report);
            let _ = writeln!(plain, "conjugation {} (H = a-powers)", conj.value);
            let mut result = report_to_json(&report);
            result["conjugation"] = json!({
                "value": conj.value.to_string(),
                "witness": format!("({}, {})", conj.witness.0, conj.witness.1),
            });
            Ok(Payload::new(result, plain).with_meta(json!({ "radius": radius })))
        }
        "z2-euclid" => {
            let magma = z2_euclid_preset(radius as i64);
            let radii: Vec<EuclidSq> = (0..=radius).map(|r| EuclidSq(r * r)).collect();
            let report = audit(&magma, &radii)?;
            Ok(Payload::new(report_to_json(&report), report_to_plain(&report))
                .with_meta(json!({ "radius": radius })))
        }
        "perturbed" => {
            let magma = perturbed_z_preset(radius as i64);
            let radii: Vec<u64> = (0..=radius).collect();
            let report = audit(&magma, &radii)?;
            Ok(Payload::new(report_to_json(&report), report_to_plain(&report))
                .with_meta(json!({ "radius": radius })))
        }
        other => Err(DomainError(format!("unknown preset '{other}'"))),
    }
}

fn parse_slope(text: &str) -> Result<Slope, DomainError> {
    Ok(Slope::new(parse_rational(text)?)?)
}

fn run_lab(lab: LabCommand, alphabet: Alphabet) -> Result<Payload, DomainError> {
    match lab {
        LabCommand::U { n, beta } => {
            let slope = parse_slope(&beta)?;
            if n == 0 {
                return Err(DomainError("u_n needs n >= 1".into()));
            }
            let u = u_word(n, &slope);
            Ok(Payload::new(json!({ "word": u.to_string() }), format!("{u}\n")).with_meta(
                json!({ "betaValidUpTo": slope.valid_up_to() }),
            ))
        }
        LabCommand::Phi { word, beta } => {
            let slope = parse_slope(&beta)?;
            let w = ReducedWord::parse(&word, alphabet)?;
            let value = phi(&w, &slope);
            let member = in_strip(&w, &slope);
            let plain = format!("{value}\n{}\n", if member { "in strip" } else { "outside strip" });
            let result = json!({ "phi": value.to_string(), "inStrip": member });
            Ok(Payload::new(result, plain)
                .with_meta(json!({ "betaValidUpTo": slope.valid_up_to() })))
        }
        LabCommand::Defect { u, w } => {
            let u = ReducedWord::parse(&u, alphabet)?;
            let w = ReducedWord::parse(&w, alphabet)?;
            let defect = commutation_defect(&u, &w);
            Ok(Payload::new(json!({ "defect": defect }), format!("{defect}\n")))
        }
        LabCommand::Search { u, n, beta, max_defect, cap, k_max } => {
            let slope = parse_slope(&beta)?;
            let center = match (u, n) {
                (Some(text), _) => ReducedWord::parse(&text, alphabet)?,
                (None, Some(n)) if n >= 1 => u_word(n, &slope),
                _ => return Err(DomainError("search needs --u or --n".into())),
            };
            let hits = almost_commuting_search(&center, max_defect, cap, k_max)?;
            let mut plain = String::new();
            let mut records = Vec::new();
            for hit in &hits {
                let record = json!({
                    "word": hit.word.to_string(),
                    "defect": hit.defect,
                    "nearestPower": hit.nearest_power,
                    "powerDistance": hit.power_distance,
                });
                let _ = writeln!(plain, "{}", serde_json::to_string(&record).unwrap());
                records.push(record);
            }
            let meta = json!({
                "u": center.to_string(),
                "maxDefect": max_defect,
                "lengthCap": cap,
                "kMax": k_max,
            });
            Ok(Payload::new(json!({ "hits": records }), plain).with_meta(meta))
        }
    }
}

/// Checks that `distance_to_powers` and friends stay exercised through the
/// documented oracle bound plumbing.
pub fn oracle_bound_info() -> u64 {
    oracle_bound() as u64
}
