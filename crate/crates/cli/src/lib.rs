//! The `ratfix` command line.
//!
//! Exit codes: 0 success, 1 a well-formed negative answer (not bipointed, not
//! bisimilar, a failed demo check), 2 bad input, 3 resource budget exceeded.
//! Data goes to `out`, diagnostics to `err`.

mod demos;
mod render;

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use ratfix::behaviors::{from_json, to_dot, to_json, FunctorKind};
use ratfix::bisim::{bisimilar, minimize};
use ratfix::langops::{enumerate_words, language_equiv, nda_to_dfa};
use ratfix::sosdsl::{is_bipointed, parse_spec, parse_term, validate_spec, Diagnostic, Term};
use ratfix::streams::{gsos_unfold_with_budget, lasso_of, parse_gsos, DEFAULT_BUDGET};
use ratfix::synthesis::eval_term;
use ratfix::{Error, Pointed, RationalLasso, Spec};

pub use render::describe;

#[derive(Parser, Debug)]
#[command(name = "ratfix", version, about = "Bipointed SOS specifications applied to finite systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse and check a specification; exit 0 iff it is bipointed.
    Validate { spec: PathBuf },
    /// Evaluate a term whose variables are bound to system files.
    Apply {
        spec: PathBuf,
        #[arg(long)]
        term: String,
        /// `name=SYSTEM.json`; repeatable.
        #[arg(long = "bind", value_parser = parse_binding)]
        binds: Vec<(String, String)>,
        /// Minimize every intermediate result before applying the next operator.
        #[arg(long)]
        minimize_levels: bool,
        #[arg(short = 'o', long)]
        output: Option<PathBuf>,
    },
    /// Smallest bisimilar system, reachable from the root.
    Minimize {
        system: PathBuf,
        #[arg(short = 'o', long)]
        output: Option<PathBuf>,
    },
    /// Exit 0 iff the two roots are bisimilar.
    Bisim {
        a: PathBuf,
        b: PathBuf,
        /// Compare accepted languages instead (automata only).
        #[arg(long)]
        language: bool,
    },
    /// Canonical lasso of a stream system.
    Lasso { system: PathBuf },
    /// First values of a stream term under a GSOS or stream specification.
    Unfold {
        spec: PathBuf,
        #[arg(long)]
        term: String,
        /// `name=PREFIX | CYCLE`, e.g. `z=|0`; repeatable.
        #[arg(long = "bind", value_parser = parse_binding)]
        binds: Vec<(String, String)>,
        #[arg(short = 'n', default_value_t = 10)]
        n: usize,
        /// Maximum number of term-graph nodes in one configuration.
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: usize,
    },
    /// Accepted words up to a length, shortest first.
    Words {
        system: PathBuf,
        #[arg(long)]
        max_len: usize,
    },
    /// Graphviz rendering of a system.
    Dot { system: PathBuf },
    /// Run a shipped scenario and check its expected outcome.
    Demo {
        #[arg(value_enum)]
        name: demos::Demo,
    },
}

fn parse_binding(text: &str) -> Result<(String, String), String> {
    match text.split_once('=') {
        Some((k, v)) if !k.trim().is_empty() => Ok((k.trim().to_string(), v.to_string())),
        _ => Err(format!("expected NAME=VALUE, got `{text}`")),
    }
}

/// A failed command: exit code plus what to print on the error stream.
#[derive(Debug)]
pub(crate) struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    pub(crate) fn input(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }

    pub(crate) fn negative(message: impl Into<String>) -> Self {
        Failure { code: 1, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if matches!(e, Error::Budget { .. }) { 3 } else { 2 };
        Failure { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::input(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn diagnostics(path: &Path, ds: &[Diagnostic]) -> Failure {
    let lines: Vec<String> = ds.iter().map(|d| format!("{}:{d}", path.display())).collect();
    Failure::input(lines.join("\n"))
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

/// Loads a system file; without a `root` field the first state is the root.
fn load_system(path: &Path) -> Result<Pointed, Failure> {
    let (c, root) = from_json(&read(path)?).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    let problems = c.validate();
    if !problems.is_empty() {
        let lines: Vec<String> = problems.iter().map(|v| format!("{}: {v}", path.display())).collect();
        return Err(Failure::input(lines.join("\n")));
    }
    if c.is_empty() {
        return Err(Failure::input(format!("{}: system has no states", path.display())));
    }
    Ok(Pointed::new(c, root.unwrap_or(0))?)
}

fn load_spec(path: &Path, err: &mut dyn Write) -> Result<Spec, Failure> {
    let doc: Spec = parse_spec(&read(path)?).map_err(|ds| diagnostics(path, &ds))?;
    let findings = validate_spec(&doc);
    for f in &findings {
        writeln!(err, "{}:{f}", path.display())?;
    }
    if !is_bipointed(&findings) {
        return Err(Failure::negative(format!("{}: not bipointed", path.display())));
    }
    Ok(doc)
}

fn term(text: &str) -> Result<Term, Failure> {
    parse_term(text).map_err(|ds| {
        let lines: Vec<String> = ds.iter().map(|d| format!("term:{d}")).collect();
        Failure::input(lines.join("\n"))
    })
}

fn emit(text: &str, output: Option<&Path>, out: &mut dyn Write) -> Outcome {
    match output {
        Some(p) => fs::write(p, text).map_err(|e| Failure::input(format!("{}: {e}", p.display()))),
        None => Ok(out.write_all(text.as_bytes())?),
    }
}

fn as_dfa(p: &Pointed) -> Result<Pointed, Failure> {
    match p.kind() {
        FunctorKind::Dfa(_) => Ok(p.clone()),
        FunctorKind::Nda(_) => Ok(nda_to_dfa(p)?),
        k => Err(Failure::input(format!("languages need a dfa or nda system, found {k}"))),
    }
}

fn execute(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    match cmd {
        Command::Validate { spec } => {
            let text = read(&spec)?;
            if let Err(ds) = parse_spec::<ratfix::Rational>(&text) {
                // a spec outside the flat format may still be a valid GSOS one
                let g = parse_gsos::<ratfix::Rational>(&text).map_err(|_| diagnostics(&spec, &ds))?;
                let mut reasons = Vec::new();
                for (name, op) in &g.ops {
                    if op.family {
                        reasons.push(format!("`{name}[..]` is an infinite family of operators"));
                    }
                    for r in op.rules.iter().filter(|r| r.target.depth() > 1) {
                        reasons.push(format!("{}: target of `{name}` nests operators", r.span));
                    }
                }
                return Err(Failure::negative(format!("{}: not bipointed: {}", spec.display(), reasons.join("; "))));
            }
            load_spec(&spec, err)?;
            writeln!(out, "{}: bipointed", spec.display())?;
            Ok(())
        }
        Command::Apply { spec, term: t, binds, minimize_levels, output } => {
            let doc = load_spec(&spec, err)?;
            let mut env = BTreeMap::new();
            for (name, path) in binds {
                env.insert(name, load_system(Path::new(&path))?);
            }
            let result = eval_term(&doc, &env, &term(&t)?, minimize_levels)?;
            emit(&to_json(&result.system, Some(result.root)), output.as_deref(), out)
        }
        Command::Minimize { system, output } => {
            let m = minimize(&load_system(&system)?);
            emit(&to_json(&m.system, Some(m.root)), output.as_deref(), out)
        }
        Command::Bisim { a, b, language } => {
            let (p, q) = (load_system(&a)?, load_system(&b)?);
            let (same, what) = if language {
                (language_equiv(&as_dfa(&p)?, &as_dfa(&q)?)?, "language equivalent")
            } else {
                (bisimilar(&p, &q)?, "bisimilar")
            };
            if same {
                writeln!(out, "{what}")?;
                Ok(())
            } else {
                writeln!(out, "not {what}")?;
                Err(Failure::negative(""))
            }
        }
        Command::Lasso { system } => {
            writeln!(out, "{}", lasso_of(&load_system(&system)?)?)?;
            Ok(())
        }
        Command::Unfold { spec, term: t, binds, n, budget } => {
            let g = parse_gsos(&read(&spec)?).map_err(|ds| diagnostics(&spec, &ds))?;
            let mut env = BTreeMap::new();
            for (name, text) in binds {
                let l: RationalLasso = text.parse().map_err(|e: Error| Failure::input(format!("--bind {name}: {e}")))?;
                env.insert(name, l);
            }
            let values = gsos_unfold_with_budget(&g, &env, &term(&t)?, n, budget)?;
            let text: Vec<String> = values.iter().map(ToString::to_string).collect();
            writeln!(out, "{}", text.join(" "))?;
            Ok(())
        }
        Command::Words { system, max_len } => {
            let p = load_system(&system)?;
            let dfa = as_dfa(&p)?;
            let alphabet = p.kind().alphabet().expect("automata have alphabets");
            for w in enumerate_words(&dfa, max_len)?.render(alphabet) {
                writeln!(out, "{}", if w.is_empty() { "ε" } else { &w })?;
            }
            Ok(())
        }
        Command::Dot { system } => {
            let p = load_system(&system)?;
            out.write_all(to_dot(&p.system, Some(p.root)).as_bytes())?;
            Ok(())
        }
        Command::Demo { name } => demos::run(name, out),
    }
}

/// Runs the command line `argv` (program name first) and returns the exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                2
            } else {
                let _ = write!(out, "{text}");
                0
            };
        }
    };
    match execute(cli.command, out, err) {
        Ok(()) => 0,
        Err(f) => {
            if !f.message.is_empty() {
                let _ = writeln!(err, "{}", f.message);
            }
            f.code
        }
    }
}
