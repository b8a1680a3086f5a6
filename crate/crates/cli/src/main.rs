//! `chainlab`: JSON front end to the chainability toolkit.
//!
//! Exit status 0 on success, 1 on domain errors (with an error object on
//! stdout), 2 on unreadable or malformed input.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use chainlab::logic::{
    age_sentence, eval_formula, extract_definitions, reduct_ages_match, star_translate, Assignment,
    Formula,
};
use chainlab::random::{generate, RandomSpec};
use chainlab::verify::{run_verify, VerifyOptions};
use chainlab::{
    age_forms, classify_orders, find_chain_order, is_chainable_with, kernel, profile, ChainWitness,
    Companion, Error, Structure,
};
use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(
    name = "chainlab",
    version,
    about = "Chainability, ages and definability of finite relational structures"
)]
struct Cli {
    /// Indent the JSON output.
    #[arg(long, global = true)]
    pretty: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Is the structure chained over F by the given order of the rest?
    CheckChain {
        #[arg(long)]
        structure: PathBuf,
        #[arg(long, default_value = "")]
        f: Elems,
        #[arg(long)]
        order: Elems,
    },
    /// Search for an order of the rest chaining the structure over F.
    FindOrder {
        #[arg(long)]
        structure: PathBuf,
        #[arg(long, default_value = "")]
        f: Elems,
    },
    /// Smallest sets F over which the structure is chainable.
    Kernel {
        #[arg(long)]
        structure: PathBuf,
        /// Largest |F| tried; defaults to the domain size.
        #[arg(long)]
        max_f: Option<usize>,
    },
    /// Number of isomorphism types of n-element substructures, n = 1..=up-to.
    Profile {
        #[arg(long)]
        structure: PathBuf,
        /// Defaults to the domain size, capped at 8.
        #[arg(long)]
        up_to: Option<usize>,
    },
    /// Canonical forms of the n-element substructures.
    Age {
        #[arg(long)]
        structure: PathBuf,
        #[arg(long)]
        n: usize,
    },
    /// Quantifier-free definitions of each relation over a companion order.
    Define {
        #[arg(long)]
        structure: PathBuf,
        #[arg(long)]
        companion: PathBuf,
    },
    /// Evaluate a formula on the structure and its translation on the companion.
    StarEval {
        #[arg(long)]
        structure: PathBuf,
        #[arg(long)]
        companion: PathBuf,
        #[arg(long)]
        formula: String,
        /// Assignment such as `v0=1,v1=3`.
        #[arg(long, default_value = "")]
        assign: String,
    },
    /// Sentence describing the n-element age given by a family of structures.
    AgeSentence {
        #[arg(long, value_delimiter = ',', required = true)]
        family: Vec<PathBuf>,
        /// Symbols kept; defaults to the whole signature.
        #[arg(long)]
        keep: Option<String>,
        #[arg(long)]
        eval_on: Option<PathBuf>,
    },
    /// Enumerate every chaining order over F and classify the family.
    ClassifyOrders {
        #[arg(long)]
        structure: PathBuf,
        #[arg(long, default_value = "")]
        f: Elems,
    },
    /// Seeded random structure (SplitMix64).
    Gen {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        size: usize,
        /// Fixed arity; overrides the bounds below.
        #[arg(long)]
        arity: Option<usize>,
        #[arg(long, default_value_t = 1)]
        min_arity: usize,
        #[arg(long, default_value_t = 2)]
        max_arity: usize,
        #[arg(long, default_value_t = 1)]
        symbols: usize,
        #[arg(long)]
        density: f64,
    },
    /// Run the invariant suites.
    Verify {
        #[arg(long)]
        only: Option<String>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        cases: usize,
    },
}

/// Comma-separated element indices; empty for the empty set.
#[derive(Debug, Clone)]
struct Elems(Vec<usize>);

impl FromStr for Elems {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        s.split(',')
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .map(|p| {
                p.parse()
                    .map_err(|_| format!("`{p}` is not an element index"))
            })
            .collect::<Result<_, _>>()
            .map(Elems)
    }
}

enum Failure {
    Domain(Error),
    Input(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse { .. } => Failure::Input(e.to_string()),
            other => Failure::Domain(other),
        }
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text =
        fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn parse_assignment(text: &str) -> Result<Assignment, Failure> {
    text.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|pair| {
            let (var, val) = pair
                .split_once('=')
                .ok_or_else(|| Failure::Input(format!("assignment `{pair}` is not var=element")))?;
            let val = val
                .trim()
                .parse()
                .map_err(|_| Failure::Input(format!("`{val}` is not an element index")))?;
            Ok((var.trim().to_string(), val))
        })
        .collect()
}

fn run(command: Command) -> Result<(Value, bool), Failure> {
    let value = match command {
        Command::CheckChain {
            structure,
            f,
            order,
        } => {
            let y: Structure = read_json(&structure)?;
            let chainable = is_chainable_with(&y, &ChainWitness::new(f.0, order.0))?;
            json!({ "chainable": chainable })
        }
        Command::FindOrder { structure, f } => {
            let y: Structure = read_json(&structure)?;
            let order = find_chain_order(&y, &f.0)?;
            let mut f = f.0;
            f.sort_unstable();
            json!({ "f": f, "order": order })
        }
        Command::Kernel { structure, max_f } => {
            let y: Structure = read_json(&structure)?;
            to_value(&kernel(&y, max_f.unwrap_or(y.size()))?)
        }
        Command::Profile { structure, up_to } => {
            let y: Structure = read_json(&structure)?;
            to_value(&profile(&y, up_to.unwrap_or(y.size().min(8)))?)
        }
        Command::Age { structure, n } => {
            let y: Structure = read_json(&structure)?;
            let forms = age_forms(&y, n)?;
            json!({ "n": n, "count": forms.len(), "forms": forms })
        }
        Command::Define {
            structure,
            companion,
        } => {
            let y: Structure = read_json(&structure)?;
            let x: Companion = read_json(&companion)?;
            let defs = extract_definitions(&x, &y)?;
            let mut formulas = BTreeMap::new();
            for (name, def) in &defs.definitions {
                let vars: Vec<String> = (0..def.arity).map(|i| format!("v{i}")).collect();
                formulas.insert(name.clone(), defs.formula(name, &vars)?.to_string());
            }
            json!({ "definitions": defs, "formulas": formulas })
        }
        Command::StarEval {
            structure,
            companion,
            formula,
            assign,
        } => {
            let y: Structure = read_json(&structure)?;
            let x: Companion = read_json(&companion)?;
            let f: Formula = formula.parse()?;
            let a = parse_assignment(&assign)?;
            let defs = extract_definitions(&x, &y)?;
            let star = star_translate(&f, &defs)?;
            let on_structure = eval_formula(&f, &y, &a)?;
            let on_companion = eval_formula(&star, &x.to_structure(), &a)?;
            json!({
                "formula": f.to_string(),
                "translated": star.to_string(),
                "structure_value": on_structure,
                "companion_value": on_companion,
                "agree": on_structure == on_companion,
            })
        }
        Command::AgeSentence {
            family,
            keep,
            eval_on,
        } => {
            let members: Vec<Structure> = family
                .iter()
                .map(|p| read_json(p))
                .collect::<Result<_, _>>()?;
            let names: Vec<String> = match keep {
                Some(k) => k
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(String::from)
                    .collect(),
                None => members
                    .first()
                    .map(|m| {
                        m.signature()
                            .symbols()
                            .iter()
                            .map(|s| s.name.clone())
                            .collect()
                    })
                    .unwrap_or_default(),
            };
            let keep: Vec<&str> = names.iter().map(String::as_str).collect();
            let sentence = age_sentence(&members, &keep)?;
            let mut out = json!({ "sentence": sentence.to_string() });
            if let Some(path) = eval_on {
                let y: Structure = read_json(&path)?;
                if y.signature() != members[0].signature() {
                    return Err(Error::SignatureMismatch(
                        "structure and family differ in signature".into(),
                    )
                    .into());
                }
                let holds = eval_formula(&sentence, &y, &Assignment::new())?;
                let matches = reduct_ages_match(&members, &keep, &y)?;
                out["holds"] = json!(holds);
                out["ages_match"] = json!(matches);
                out["agree"] = json!(holds == matches);
            }
            out
        }
        Command::ClassifyOrders { structure, f } => {
            let y: Structure = read_json(&structure)?;
            to_value(&classify_orders(&y, &f.0)?)
        }
        Command::Gen {
            seed,
            size,
            arity,
            min_arity,
            max_arity,
            symbols,
            density,
        } => {
            let (min_arity, max_arity) = arity.map_or((min_arity, max_arity), |a| (a, a));
            let spec = RandomSpec {
                seed,
                size,
                symbols,
                min_arity,
                max_arity,
                density,
            };
            to_value(&generate(&spec)?)
        }
        Command::Verify { only, seed, cases } => {
            let report = run_verify(&VerifyOptions { only, seed, cases })?;
            let ok = report.all_passed;
            return Ok((to_value(&report), ok));
        }
    };
    Ok((value, true))
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn error_object(e: &Error) -> Value {
    let mut obj = json!({ "error": e.code(), "message": e.to_string() });
    if let Error::NotSimplyDefinable {
        symbol,
        class,
        inside,
        outside,
    } = e
    {
        obj["symbol"] = json!(symbol);
        obj["witnesses"] = json!([inside, outside]);
        obj["class"] = to_value(class);
    }
    obj
}

fn emit(v: &Value, pretty: bool) {
    let text = if pretty {
        serde_json::to_string_pretty(v)
    } else {
        serde_json::to_string(v)
    };
    // a closed pipe is not worth a panic
    let _ = writeln!(std::io::stdout(), "{}", text.expect("values serialize"));
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok((value, ok)) => {
            emit(&value, cli.pretty);
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(Failure::Domain(e)) => {
            emit(&error_object(&e), cli.pretty);
            ExitCode::from(1)
        }
        Err(Failure::Input(message)) => {
            emit(
                &json!({ "error": "parse_error", "message": message }),
                cli.pretty,
            );
            ExitCode::from(2)
        }
    }
}
