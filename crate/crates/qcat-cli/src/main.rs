use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use qcat::category::load_category;
use qcat::fixtures::write_fixture;
use qcat::frobenius::{QSystem, DEFAULT_SEED};
use qcat::io::{diff_reports, load_morphism, load_qsystem};
use qcat::modrep::ModuleSide;
use qcat::report::{self, DecompositionKind, Report};
use qcat::{CategoryData, QcatError, Sign};

#[derive(Parser, Debug)]
#[command(name = "qcat", version, about = "Q-systems in braided and modular tensor categories")]
struct Cli {
    /// Numerical tolerance; overrides the category file.
    #[arg(long, global = true, env = "QCAT_TOL")]
    tol: Option<f64>,
    /// Seed of every randomized step.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Braiding sign, `+` or `-`.
    #[arg(long, global = true, default_value = "+", allow_hyphen_values = true)]
    sign: Sign,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Worker threads for the library's parallel loops.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Kind {
    Central,
    Irreducible,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum SideArg {
    Left,
    Right,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Pentagon and hexagon residuals of a category file.
    Validate { category: PathBuf },
    /// S and T matrices, dimensions and the modular relations.
    Modular { category: PathBuf },
    /// Axiom residuals of a Q-system file.
    CheckQsystem { category: PathBuf, qsystem: String },
    /// Left or right centre (`--sign`).
    Centre { category: PathBuf, qsystem: String },
    /// Intermediate Q-system of a projection given as a morphism file.
    Intermediate { category: PathBuf, qsystem: String, projection: PathBuf },
    /// Central or irreducible decomposition.
    Decompose {
        category: PathBuf,
        qsystem: String,
        #[arg(long, value_enum, default_value_t = Kind::Central)]
        kind: Kind,
    },
    /// Braided product of two Q-systems (`--sign`).
    BraidedProduct { category: PathBuf, a: String, b: String },
    /// Canonical Q-system of the double.
    Canonical { category: PathBuf },
    /// Full centre of a Q-system.
    FullCentre { category: PathBuf, qsystem: String },
    /// Modular invariant of the full centre.
    Zmatrix { category: PathBuf, qsystem: String },
    /// Irreducible left or right modules.
    Modules {
        category: PathBuf,
        qsystem: String,
        #[arg(long, value_enum, default_value_t = SideArg::Left)]
        side: SideArg,
    },
    /// Irreducible bimodules between two Q-systems.
    Bimodules { category: PathBuf, a: String, b: String },
    /// Boundary conditions between the full centres of two Q-systems.
    Boundary {
        category: PathBuf,
        #[arg(long = "A", default_value = "trivial")]
        a: String,
        #[arg(long = "B", default_value = "trivial")]
        b: String,
    },
    /// Writes `<name>.json` and `<name>_q.json` for a built-in fixture.
    EmitFixture {
        name: String,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Tolerance-aware comparison of two report files.
    Diff { a: PathBuf, b: PathBuf },
}

/// Exit code of an error: 2 for unreadable input, 3 for failed axioms, 4 for
/// numeric inconsistencies and 1 for everything the caller got wrong.
fn exit_code(e: &QcatError) -> u8 {
    use QcatError::*;
    match e {
        Parse(_) | Schema(_) | UnknownLabel(_) | Io(_) | SchemaMismatch(_) => 2,
        Data(_) | NotFrobenius(_) | NonStandardizable(_) | NotProjection(_) | Normalization(_) | Condition(_)
        | NotSimple(_) => 3,
        Conjugacy(_) | Degenerate | NotModular | NotRational | Rounding(_) | Consistency(_) => 4,
        Shape(_) | Index(_) | CategoryMismatch | Mismatch(_) | UnknownFixture(_) => 1,
    }
}

fn read(path: &Path) -> Result<Vec<u8>, QcatError> {
    std::fs::read(path).map_err(QcatError::Io)
}

fn category(path: &Path, tol: Option<f64>) -> Result<CategoryData, QcatError> {
    let mut cat = load_category(&read(path)?)?;
    if let Some(t) = tol {
        cat.tol = t;
    }
    Ok(cat)
}

/// A Q-system file, or `trivial`.
fn qsystem(cat: &CategoryData, arg: &str) -> Result<QSystem, QcatError> {
    if arg == "trivial" {
        return Ok(QSystem::trivial(cat));
    }
    load_qsystem(cat, &read(Path::new(arg))?)
}

fn reference(path: &Path) -> String {
    path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn run(cli: &Cli) -> Result<Report, QcatError> {
    let (tol, seed, sign) = (cli.tol, cli.seed, cli.sign);
    match &cli.command {
        Command::Validate { category: c } => report::validate(&category(c, tol)?),
        Command::Modular { category: c } => report::modular(&category(c, tol)?),
        Command::CheckQsystem { category: c, qsystem: q } => {
            let cat = category(c, tol)?;
            report::check_qsystem(&cat, &qsystem(&cat, q)?)
        }
        Command::Centre { category: c, qsystem: q } => {
            let cat = category(c, tol)?;
            report::centre(&cat, &qsystem(&cat, q)?, sign, &reference(c))
        }
        Command::Intermediate { category: c, qsystem: q, projection } => {
            let cat = category(c, tol)?;
            let p = load_morphism(&cat, &read(projection)?)?;
            report::intermediate(&cat, &qsystem(&cat, q)?, &p, &reference(c))
        }
        Command::Decompose { category: c, qsystem: q, kind } => {
            let cat = category(c, tol)?;
            let kind = match kind {
                Kind::Central => DecompositionKind::Central,
                Kind::Irreducible => DecompositionKind::Irreducible,
            };
            report::decompose(&cat, &qsystem(&cat, q)?, kind, seed, &reference(c))
        }
        Command::BraidedProduct { category: c, a, b } => {
            let cat = category(c, tol)?;
            report::braided_product_report(&cat, &qsystem(&cat, a)?, &qsystem(&cat, b)?, sign, &reference(c))
        }
        Command::Canonical { category: c } => report::canonical(&category(c, tol)?, &reference(c)),
        Command::FullCentre { category: c, qsystem: q } => {
            let cat = category(c, tol)?;
            report::full_centre_report(&cat, &qsystem(&cat, q)?, &reference(c))
        }
        Command::Zmatrix { category: c, qsystem: q } => {
            let cat = category(c, tol)?;
            report::zmatrix(&cat, &qsystem(&cat, q)?)
        }
        Command::Modules { category: c, qsystem: q, side } => {
            let cat = category(c, tol)?;
            let side = match side {
                SideArg::Left => ModuleSide::Left,
                SideArg::Right => ModuleSide::Right,
            };
            report::modules(&cat, &qsystem(&cat, q)?, side, seed)
        }
        Command::Bimodules { category: c, a, b } => {
            let cat = category(c, tol)?;
            report::bimodules(&cat, &qsystem(&cat, a)?, &qsystem(&cat, b)?, seed)
        }
        Command::Boundary { category: c, a, b } => {
            let cat = category(c, tol)?;
            report::boundary(&cat, &qsystem(&cat, a)?, &qsystem(&cat, b)?, sign, seed)
        }
        Command::EmitFixture { name, out } => {
            let (cat_path, q_path) = write_fixture(name, out)?;
            let body = serde_json::json!({
                "category": cat_path.display().to_string(),
                "qsystem": q_path.display().to_string(),
            });
            Ok(Report { verb: "emit-fixture".into(), pass: true, body })
        }
        Command::Diff { a, b } => {
            let parse = |p: &Path| -> Result<serde_json::Value, QcatError> {
                serde_json::from_slice(&read(p)?).map_err(|e| QcatError::Parse(e.to_string()))
            };
            let diffs = diff_reports(&parse(a)?, &parse(b)?, tol.unwrap_or(1e-9))?;
            let body = serde_json::json!({ "equal": diffs.is_empty(), "differences": diffs });
            Ok(Report { verb: "diff".into(), pass: diffs.is_empty(), body })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("qcat: {e}");
            return ExitCode::from(1);
        }
    }
    match run(&cli) {
        Ok(rep) => {
            let text = match cli.format {
                Format::Json => rep.to_json(),
                Format::Table => Ok(rep.to_table()),
            };
            match text {
                Ok(t) => {
                    let _ = writeln!(std::io::stdout(), "{}", t.trim_end());
                }
                Err(e) => {
                    eprintln!("qcat: {e}");
                    return ExitCode::from(exit_code(&e));
                }
            }
            if rep.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(3)
            }
        }
        Err(e) => {
            eprintln!("qcat: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
