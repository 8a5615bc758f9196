//! The `ig` command line.
//!
//! [`dispatch`] does all the work and returns the exit code together with
//! the text destined for standard output and standard error, so the binary
//! stays a two-liner and tests can drive every subcommand in-process.
//!
//! Exit codes: 0 on success, 1 for usage, I/O and syntax errors, 2 when a
//! well-formed request fails semantically (guards, zero-mass conditions,
//! unsupported constructs, dimension mismatches and the like).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::circuit::{classicalize, compile, complete_program, export_dot, Circuit, SignedAtom};
use crate::classify::mechanism_report;
use crate::digital::{
    check_equivalence, enumerate_models_with, propagate, EnumerateOptions, Equivalence, EquivalenceMode, Model,
    Selections, Side,
};
use crate::dsl::{format_program, parse_literal, parse_program, Literal, Program};
use crate::error::Error;
use crate::ground::{ground_program, ground_program_with, GroundOptions};
use crate::learn::{count, propose_rules, read_episodes, LearnOptions, ProposalKind, Synthetic};
use crate::prob::{compare_formulas, formula, query_prob, JointTable};
use crate::scorer::{FnScorer, Uniform};
use crate::vectors::{contrast, detach, detach_scored, fuse, merge, ConceptVector, FusionResult};

#[derive(Debug, Parser)]
#[command(name = "ig", version, about = "Compile rule programs into inference-gate circuits and evaluate them")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a program and report its statements
    Parse {
        file: PathBuf,
        /// Print the syntax tree as JSON
        #[arg(long)]
        json: bool,
    },
    /// Print a program in canonical form
    Format { file: PathBuf },
    /// Instantiate variables over the program's constants
    Ground {
        file: PathBuf,
        /// Abort when grounding would exceed this many statements
        #[arg(long, default_value_t = crate::ground::DEFAULT_MAX_GROUND_STATEMENTS)]
        max_rules: usize,
    },
    /// Build the gate circuit
    Compile {
        file: PathBuf,
        /// Write a Graphviz rendering to PATH
        #[arg(long, value_name = "PATH")]
        dot: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Enumerate consistent models
    Models {
        file: PathBuf,
        /// Add a free choice for every atom first
        #[arg(long)]
        classical: bool,
        /// Limit on binary choice points (default 24, or IG_MAX_CHOICES)
        #[arg(long, value_name = "N")]
        max_choices: Option<u32>,
        #[arg(long)]
        json: bool,
    },
    /// Propagate from input literals to a fixpoint
    Eval {
        file: PathBuf,
        /// Inputs such as `a=true,b=false`; false activates the negative channel
        #[arg(long, value_name = "LIT=BOOL,...")]
        set: Option<String>,
    },
    /// Replace constraints by their completion rules
    Complete {
        file: PathBuf,
        /// Also add a free choice for every atom
        #[arg(long)]
        classical: bool,
    },
    /// Compare the model sets of two programs
    Equiv {
        first: PathBuf,
        second: PathBuf,
        #[arg(long)]
        classical: bool,
    },
    /// Label rules with dependency forms and mechanisms
    Classify {
        file: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Query probability under the possible-world semantics
    Prob {
        file: PathBuf,
        #[arg(long, value_name = "LIT")]
        query: String,
        /// Comma-separated evidence literals
        #[arg(long, value_name = "LITS")]
        given: Option<String>,
    },
    /// Evaluate the six dependency-form formulas on a joint table
    Formulas {
        #[arg(long, value_name = "PATH")]
        table: PathBuf,
        /// Show each literal formula next to the exact conditional
        #[arg(long)]
        compare: bool,
        #[arg(long)]
        json: bool,
    },
    /// Concept-vector operations over a JSON file of labelled vectors
    Vec {
        #[command(subcommand)]
        op: VecOp,
    },
    /// Propose new rules from co-activation episodes
    Learn(LearnArgs),
}

#[derive(Debug, Subcommand)]
enum VecOp {
    /// Sum all vectors in the file
    Merge { file: PathBuf },
    /// Decompose the target over the remaining vectors
    Contrast {
        file: PathBuf,
        /// Label of the vector to decompose
        #[arg(long)]
        target: String,
        #[arg(long, default_value_t = 16)]
        max_steps: usize,
    },
    /// Fuse exactly two vectors into center and range
    Fuse { file: PathBuf },
    /// Pick a point from a fusion result (as printed by `vec fuse`)
    Detach {
        file: PathBuf,
        /// Sign per component, e.g. `-1,0,1`
        #[arg(long, allow_hyphen_values = true)]
        direction: Option<String>,
        /// Prefer the candidate closest to this point, e.g. `1,3`
        #[arg(long, allow_hyphen_values = true, conflicts_with = "direction")]
        toward: Option<String>,
    },
}

#[derive(Debug, Args)]
struct LearnArgs {
    /// JSON-lines episode file; omit with --synthetic
    #[arg(required_unless_present = "synthetic")]
    file: Option<PathBuf>,
    /// Use the built-in planted dataset instead of a file
    #[arg(long, conflicts_with = "file")]
    synthetic: bool,
    #[arg(long, default_value_t = Synthetic::default().seed)]
    seed: u64,
    #[arg(long, default_value_t = Synthetic::default().episodes)]
    episodes: usize,
    /// Write the generated episodes to PATH
    #[arg(long, value_name = "PATH", requires = "synthetic")]
    save_episodes: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    theta_pos: f64,
    #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
    theta_neg: f64,
    #[arg(long, default_value_t = 0.7, allow_hyphen_values = true)]
    theta_ctx: f64,
    #[arg(long, default_value_t = 5)]
    min_support: u64,
    #[arg(long, default_value_t = 10)]
    k: usize,
    /// Write proposed rules to PATH and their evidence to PATH.evidence.json
    #[arg(long, value_name = "PATH")]
    emit: Option<PathBuf>,
    /// Also propose the description dual of each compound
    #[arg(long)]
    dual: bool,
    #[arg(long)]
    json: bool,
}

/// What a finished invocation produced.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

enum Failure {
    Usage(String),
    Semantic(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        match e {
            Error::Parse(_) => Failure::Usage(e.to_string()),
            _ => Failure::Semantic(e.to_string()),
        }
    }
}

type Run<T = ()> = std::result::Result<T, Failure>;

/// Runs one invocation. `argv[0]` is the program name.
pub fn dispatch<I, T>(argv: I) -> Output
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Output {
                    code: 1,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                Output {
                    code: 0,
                    stdout: text,
                    stderr: String::new(),
                }
            };
        }
    };
    let mut out = Output::default();
    match execute(cli.command, &mut out) {
        Ok(()) => {}
        Err(Failure::Usage(m)) => {
            out.code = 1;
            writeln!(out.stderr, "error: {m}").unwrap();
        }
        Err(Failure::Semantic(m)) => {
            out.code = 2;
            writeln!(out.stderr, "error: {m}").unwrap();
        }
    }
    out
}

fn read(path: &Path) -> Run<String> {
    std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Run {
    std::fs::write(path, text).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))
}

fn load(path: &Path) -> Run<Program> {
    let text = read(path)?;
    parse_program(&text).map_err(|e| Failure::Usage(format!("{}:{e}", path.display())))
}

fn literal(text: &str) -> Run<Literal> {
    parse_literal(text.trim()).map_err(|e| Failure::Usage(format!("literal `{}`: {e}", text.trim())))
}

fn literals(text: &str) -> Run<Vec<Literal>> {
    text.split(',').filter(|s| !s.trim().is_empty()).map(literal).collect()
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("output types serialize") + "\n"
}

fn execute(command: Command, out: &mut Output) -> Run {
    let stdout = &mut out.stdout;
    match command {
        Command::Parse { file, json } => {
            let p = load(&file)?;
            if json {
                stdout.push_str(&to_json(&p));
            } else {
                writeln!(stdout, "ok: {} statements", p.statements.len()).unwrap();
            }
        }
        Command::Format { file } => stdout.push_str(&format_program(&load(&file)?)),
        Command::Ground { file, max_rules } => {
            let g = ground_program_with(
                &load(&file)?,
                GroundOptions {
                    max_statements: max_rules,
                },
            )?;
            stdout.push_str(&format_program(&g));
        }
        Command::Compile { file, dot, json } => {
            let c = compile(&ground_program(&load(&file)?)?)?;
            if let Some(path) = dot {
                write(&path, &export_dot(&c))?;
            }
            if json {
                stdout.push_str(&to_json(&circuit_json(&c)));
            } else {
                stdout.push_str(&describe_circuit(&c));
            }
        }
        Command::Models {
            file,
            classical,
            max_choices,
            json,
        } => {
            let mut g = ground_program(&load(&file)?)?;
            if classical {
                g = classicalize(&g);
            }
            let mut options = EnumerateOptions::from_env();
            if let Some(n) = max_choices {
                options.max_choice_points = n;
            }
            let models = enumerate_models_with(&compile(&g)?, options)?;
            if json {
                stdout.push_str(&to_json(&models_json(&models)));
            } else {
                for m in &models {
                    writeln!(stdout, "{}", model_line(m)).unwrap();
                }
                if models.is_empty() {
                    out.stderr.push_str("no consistent models\n");
                }
            }
        }
        Command::Eval { file, set } => {
            let c = compile(&ground_program(&load(&file)?)?)?;
            let mut inputs = Vec::new();
            for item in set.as_deref().unwrap_or("").split(',').filter(|s| !s.trim().is_empty()) {
                let (lit, value) = item
                    .split_once('=')
                    .ok_or_else(|| Failure::Usage(format!("`{item}` is not of the form lit=true|false")))?;
                let mut lit = literal(lit)?;
                match value.trim() {
                    "true" | "1" => {}
                    "false" | "0" => lit = lit.negated(),
                    other => return Err(Failure::Usage(format!("`{other}` is not true or false"))),
                }
                let signed = SignedAtom::from_literal(&lit)
                    .ok_or_else(|| Failure::Usage(format!("input `{lit}` must be ground")))?;
                let id = c
                    .channel_id(&signed)
                    .ok_or_else(|| Failure::Semantic(format!("atom `{}` does not occur in the program", signed.atom)))?;
                inputs.push(id);
            }
            let state = propagate(&c, &inputs, &Selections::new())?;
            for (atom, value) in state.values(&c) {
                writeln!(stdout, "{atom} = {}", serde_json::to_value(value).unwrap().as_str().unwrap()).unwrap();
            }
            if !state.is_consistent() {
                out.stderr.push_str("warning: the activation is contradictory\n");
            }
        }
        Command::Complete { file, classical } => {
            let mut g = complete_program(&ground_program(&load(&file)?)?);
            if classical {
                g = classicalize(&g);
            }
            stdout.push_str(&format_program(&g));
        }
        Command::Equiv {
            first,
            second,
            classical,
        } => {
            let mode = if classical {
                EquivalenceMode::Classical
            } else {
                EquivalenceMode::AsIs
            };
            match check_equivalence(&load(&first)?, &load(&second)?, mode)? {
                Equivalence::Equivalent => stdout.push_str("equivalent\n"),
                Equivalence::Counterexample { model, side } => {
                    let which = match side {
                        Side::First => "first",
                        Side::Second => "second",
                    };
                    writeln!(stdout, "not equivalent: {{{}}} is a model of the {which} program only", model).unwrap();
                }
            }
        }
        Command::Classify { file, json } => {
            let report = mechanism_report(&load(&file)?);
            if json {
                stdout.push_str(&to_json(&report));
            } else {
                stdout.push_str(&report.to_table());
            }
        }
        Command::Prob { file, query, given } => {
            let p = load(&file)?;
            let given = given.as_deref().map(literals).transpose()?.unwrap_or_default();
            let v = query_prob(&p, &literal(&query)?, &given)?;
            writeln!(stdout, "{v:.12}").unwrap();
        }
        Command::Formulas { table, compare, json } => {
            let t = JointTable::from_json(&read(&table)?)?;
            let report = compare_formulas(&t);
            if json {
                stdout.push_str(&to_json(&report));
            } else {
                let num = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |v| format!("{v:.12}"));
                for c in &report {
                    if compare {
                        write!(
                            stdout,
                            "form {}: literal {} oracle {} deviation {}",
                            c.form,
                            num(c.literal),
                            num(c.oracle),
                            num(c.deviation)
                        )
                        .unwrap();
                    } else {
                        write!(stdout, "form {}: {}", c.form, num(c.literal)).unwrap();
                    }
                    match &c.note {
                        Some(note) => writeln!(stdout, " ({note})").unwrap(),
                        None => stdout.push('\n'),
                    }
                }
            }
            // surface problems with a table that covers every form
            if report.iter().all(|c| c.note.is_none()) {
                for form in 1..=6 {
                    formula(form, &t)?;
                }
            }
        }
        Command::Vec { op } => stdout.push_str(&vec_command(op)?),
        Command::Learn(args) => learn_command(args, out)?,
    }
    Ok(())
}

fn model_line(m: &Model) -> String {
    let s = m.to_string();
    if s.is_empty() {
        "{}".to_string()
    } else {
        s
    }
}

fn models_json(models: &[Model]) -> serde_json::Value {
    json!({
        "count": models.len(),
        "models": models.iter().map(|m| json!({
            "literals": m.literals().iter().map(|l| l.to_string()).collect::<Vec<_>>(),
            "provenance": m.provenance,
        })).collect::<Vec<_>>(),
    })
}

fn circuit_json(c: &Circuit) -> serde_json::Value {
    let names = |ids: &[crate::circuit::ChannelId]| ids.iter().map(|&i| c.channel(i).to_string()).collect::<Vec<_>>();
    json!({
        "channels": c.channels().map(|(_, s)| s.to_string()).collect::<Vec<_>>(),
        "gates": c.gates.iter().map(|g| json!({
            "kind": g.kind,
            "condition": g.condition,
            "inputs": names(&g.inputs),
            "outputs": names(&g.outputs),
            "probability": g.probability,
        })).collect::<Vec<_>>(),
        "generators": c.generators.iter().map(|g| json!({
            "name": g.name,
            "cardinality": g.cardinality,
            "guard": g.guard.as_ref().map(|x| names(&x.inputs)),
            "alternatives": g.alternatives.iter().map(|a| names(a)).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
        "facts": c.facts.iter().map(|f| json!({
            "channel": c.channel(f.channel).to_string(),
            "probability": f.probability,
        })).collect::<Vec<_>>(),
        "switches": c.switches,
    })
}

fn describe_circuit(c: &Circuit) -> String {
    let names = |ids: &[crate::circuit::ChannelId], sep: &str| {
        ids.iter().map(|&i| c.channel(i).to_string()).collect::<Vec<_>>().join(sep)
    };
    let prob = |p: Option<f64>| p.map_or(String::new(), |p| format!(" p={p}"));
    let mut s = String::new();
    writeln!(
        s,
        "{} channels, {} gates, {} generators, {} facts, {} switches",
        c.channel_count(),
        c.gates.len(),
        c.generators.len(),
        c.facts.len(),
        c.switches.len()
    )
    .unwrap();
    for f in &c.facts {
        writeln!(s, "fact {}{}", c.channel(f.channel), prob(f.probability)).unwrap();
    }
    for (i, g) in c.gates.iter().enumerate() {
        writeln!(s, "g{i} {} [{}] -> [{}]{}", g.kind, names(&g.inputs, ", "), names(&g.outputs, ", "), prob(g.probability))
            .unwrap();
    }
    for g in &c.generators {
        let alts = g.alternatives.iter().map(|a| names(a, ", ")).collect::<Vec<_>>().join(" | ");
        let guard = g.guard.as_ref().map_or(String::new(), |x| format!(" when [{}]", names(&x.inputs, ", ")));
        let card = match g.cardinality {
            crate::circuit::Cardinality::ExactlyOne => "one of",
            crate::circuit::Cardinality::NonemptySubset => "some of",
        };
        writeln!(s, "{} {card} {{{alts}}}{guard}{}", g.name, prob(g.probability)).unwrap();
    }
    s
}

fn read_vectors(path: &Path) -> Run<Vec<ConceptVector>> {
    serde_json::from_str(&read(path)?)
        .map_err(|e| Failure::Usage(format!("{}: expected a JSON array of {{label, components}}: {e}", path.display())))
}

fn numbers<T: std::str::FromStr>(text: &str) -> Run<Vec<T>> {
    text.split(',')
        .map(|x| {
            x.trim()
                .parse()
                .map_err(|_| Failure::Usage(format!("`{}` is not a number", x.trim())))
        })
        .collect()
}

fn vec_command(op: VecOp) -> Run<String> {
    Ok(match op {
        VecOp::Merge { file } => to_json(&merge(&read_vectors(&file)?)?),
        VecOp::Contrast {
            file,
            target,
            max_steps,
        } => {
            let all = read_vectors(&file)?;
            let (targets, dictionary): (Vec<_>, Vec<_>) = all.into_iter().partition(|v| v.label == target);
            let p = targets
                .first()
                .ok_or_else(|| Failure::Usage(format!("no vector labelled `{target}`")))?;
            to_json(&contrast(p, &dictionary, max_steps)?)
        }
        VecOp::Fuse { file } => match read_vectors(&file)?.as_slice() {
            [a, b] => to_json(&fuse(a, b)?),
            other => return Err(Failure::Usage(format!("fuse needs exactly two vectors, got {}", other.len()))),
        },
        VecOp::Detach {
            file,
            direction,
            toward,
        } => {
            let f: FusionResult = serde_json::from_str(&read(&file)?)
                .map_err(|e| Failure::Usage(format!("{}: expected a fusion result: {e}", file.display())))?;
            match (direction, toward) {
                (Some(d), _) => to_json(&detach(&f, &numbers::<i8>(&d)?)?),
                (None, Some(t)) => {
                    let target: Vec<f64> = numbers(&t)?;
                    if target.len() != f.center.dim() {
                        return Err(Error::DimensionMismatch {
                            expected: f.center.dim(),
                            found: target.len(),
                        }
                        .into());
                    }
                    let scorer = FnScorer::new("toward", move |x: &[f64]| {
                        -x.iter().zip(&target).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
                    });
                    let (d, v) = detach_scored(&f, &scorer)?;
                    to_json(&json!({ "direction": d, "vector": v }))
                }
                (None, None) => {
                    let (d, v) = detach_scored(&f, &Uniform)?;
                    to_json(&json!({ "direction": d, "vector": v }))
                }
            }
        }
    })
}

fn kind(k: ProposalKind) -> &'static str {
    match k {
        ProposalKind::Comprehension => "comprehension",
        ProposalKind::Generalization => "generalization",
    }
}

fn learn_command(args: LearnArgs, out: &mut Output) -> Run {
    let episodes = if args.synthetic {
        let data = Synthetic {
            seed: args.seed,
            episodes: args.episodes,
            ..Synthetic::default()
        }
        .generate();
        if let Some(path) = &args.save_episodes {
            write(path, &crate::learn::write_episodes(&data))?;
        }
        data
    } else {
        let path = args.file.as_ref().expect("clap requires a file without --synthetic");
        read_episodes(&read(path)?).map_err(|e| Failure::Usage(e.to_string()))?
    };
    let stats = count(&episodes)?;
    let opts = LearnOptions {
        theta_pos: args.theta_pos,
        theta_neg: args.theta_neg,
        theta_ctx: args.theta_ctx,
        min_support: args.min_support,
        k: args.k,
        dual: args.dual,
    };
    let proposals = propose_rules(&stats, &opts);
    let evidence = json!({
        "episodes": stats.episodes,
        "options": opts,
        "proposals": proposals,
    });
    if let Some(path) = &args.emit {
        let dsl: String = proposals.iter().map(|p| p.to_dsl()).collect();
        write(path, &dsl)?;
        let mut sidecar = path.clone().into_os_string();
        sidecar.push(".evidence.json");
        write(Path::new(&sidecar), &to_json(&evidence))?;
    }
    if args.json {
        out.stdout.push_str(&to_json(&evidence));
    } else {
        for p in &proposals {
            let e = &p.evidence;
            let ctx = e.context_similarity.map_or(String::new(), |c| format!(" ctx={c:.3}"));
            for (i, line) in p.to_dsl().lines().enumerate() {
                if i == 0 {
                    writeln!(
                        out.stdout,
                        "{line}  % {} pmi={:.3} n({})={} n({})={} joint={}{ctx}",
                        kind(p.kind), e.pmi, e.left, e.count_left, e.right, e.count_right, e.joint
                    )
                    .unwrap();
                } else {
                    writeln!(out.stdout, "{line}").unwrap();
                }
            }
        }
        if proposals.is_empty() {
            out.stderr.push_str("no proposals\n");
        }
    }
    Ok(())
}
