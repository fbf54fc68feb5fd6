//! `tropcount`: batch front end for the enumeration engine.

mod render;
mod report;

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::Zero;
use thiserror::Error;

use tropcount::contact::{effectivity_of, evaluation_space, rubber_quotient, ContactData, ContactError, Stratum};
use tropcount::curve::{solve_balanced_map, Anchor, CurveError, TropicalMap};
use tropcount::enumeration::plane::{severi_degree_with_retries, DEFAULT_ATTEMPTS};
use tropcount::enumeration::{hurwitz_factorization_oracle, wdvv_oracle, EnumError};
use tropcount::fan::{fmt_vec, Fan, FanError};
use tropcount::pipeline::{
    gamma_rub_factors, hurwitz_via_pipeline, interpolation_check, support_scan, GammaRubShape, GammaRubSpec,
    PipelineError,
};
use tropcount::rational::{fmt_q, q, Q};

use report::{Format, Record, Report};

#[derive(Parser, Debug)]
#[command(
    name = "tropcount",
    version,
    about = "Exact tropical counts of plane curves and covers of the line"
)]
struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Text)]
    format: FormatArg,
    /// Worker threads.
    #[arg(long, global = true, env = "TROPCOUNT_JOBS")]
    jobs: Option<usize>,
    /// Write the output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    JsonLines,
    Text,
}

#[derive(Args, Debug)]
struct Degree {
    #[arg(short = 'd', long)]
    degree: u32,
    #[arg(short = 'g', long, default_value_t = 0)]
    genus: u32,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Plane curves of degree d and genus g through 3d - 1 + g points.
    Severi {
        #[command(flatten)]
        deg: Degree,
        /// Compare with the associativity recursion (genus 0 only).
        #[arg(long)]
        oracle: bool,
        /// Allow degrees above 4.
        #[arg(long)]
        r#unsafe: bool,
    },
    /// Covers of the line of degree d and genus g with simple branching.
    Hurwitz {
        #[command(flatten)]
        deg: Degree,
        /// Compare with the transposition count.
        #[arg(long)]
        oracle: bool,
    },
    /// Whether the evaluation map of a fan and contact data is injective.
    Effectivity { fan: PathBuf, contacts: PathBuf },
    /// The strata picked out by the contact data and their lattices.
    Evalspace { fan: PathBuf, contacts: PathBuf },
    /// Support and shape of the rubber class on plane curve types.
    Gammarub {
        #[command(flatten)]
        deg: Degree,
        /// Number of seeded configurations to scan.
        #[arg(long, default_value_t = 3)]
        seeds: u32,
    },
    /// Draw a curve file as SVG.
    Render { curve: PathBuf },
    /// Reference values only.
    Oracle {
        #[arg(value_enum)]
        kind: OracleKind,
        #[command(flatten)]
        deg: Degree,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OracleKind {
    Severi,
    Hurwitz,
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("oracle mismatch: computed {computed}, oracle {oracle}")]
    OracleMismatch { computed: String, oracle: String },
    #[error(transparent)]
    Enum(#[from] EnumError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Contact(#[from] ContactError),
    #[error(transparent)]
    Curve(#[from] CurveError),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Parse { .. } | CliError::Io { .. } => 2,
            CliError::Enum(EnumError::ResamplingExhausted(_) | EnumError::ZeroDegree)
            | CliError::Pipeline(PipelineError::Enum(EnumError::ResamplingExhausted(_) | EnumError::ZeroDegree)) => 2,
            CliError::OracleMismatch { .. } => 3,
            _ => 1,
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parse_err(path: &Path, e: impl ToString) -> CliError {
    CliError::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

fn read_fan(path: &Path) -> Result<Fan, CliError> {
    Fan::parse(&read(path)?).map_err(|e: FanError| parse_err(path, e))
}

fn read_contacts(path: &Path) -> Result<ContactData, CliError> {
    ContactData::parse(&read(path)?).map_err(|e| parse_err(path, e))
}

fn positive(deg: &Degree) -> Result<(), CliError> {
    if deg.degree == 0 {
        return Err(CliError::Usage("degree must be at least 1".into()));
    }
    Ok(())
}

fn severi(cli: &Cli, deg: &Degree, oracle: bool, unsafe_: bool) -> Result<Report, CliError> {
    positive(deg)?;
    if deg.degree > 4 && !unsafe_ {
        return Err(CliError::Usage("degrees above 4 need --unsafe".into()));
    }
    let (d, g) = (deg.degree, deg.genus);
    let (result, config) = severi_degree_with_retries(d, g, cli.seed, DEFAULT_ATTEMPTS)?;
    let mut rep = Report::new("severi", cli.seed);
    rep.param("d", d).param("g", g).param("config_seed", config.seed);
    for (i, s) in result.solutions.iter().enumerate() {
        rep.record(
            Record::new("solution")
                .field("index", i)
                .field("multiplicity", fmt_q(&s.multiplicity))
                .field("curve", s.map.to_text()),
        );
    }
    let total = fmt_q(&result.total);
    rep.summary("total", &total)
        .summary("solutions", result.solutions.len());
    if oracle {
        if g != 0 {
            return Err(CliError::Usage("the severi oracle covers genus 0 only".into()));
        }
        let expected = wdvv_oracle(d).to_string();
        rep.summary("oracle", &expected);
        if expected != total {
            rep.emit(cli)?;
            return Err(CliError::OracleMismatch {
                computed: total,
                oracle: expected,
            });
        }
        rep.summary("oracle_check", "ok");
    }
    Ok(rep)
}

fn hurwitz(cli: &Cli, deg: &Degree, oracle: bool) -> Result<Report, CliError> {
    positive(deg)?;
    let (d, g) = (deg.degree, deg.genus);
    let total = fmt_q(&hurwitz_via_pipeline(d, g)?);
    let mut rep = Report::new("hurwitz", cli.seed);
    rep.param("d", d).param("g", g);
    rep.summary("total", &total);
    if oracle {
        let expected = fmt_q(&hurwitz_factorization_oracle(d, g));
        rep.summary("oracle", &expected);
        if expected != total {
            rep.emit(cli)?;
            return Err(CliError::OracleMismatch {
                computed: total,
                oracle: expected,
            });
        }
        rep.summary("oracle_check", "ok");
    }
    Ok(rep)
}

fn matrix_rows(m: &tropcount::lattice::IntegerMatrix) -> String {
    let rows: Vec<String> = m.row_vectors().iter().map(|r| fmt_vec(r)).collect();
    format!("{}x{} {}", m.rows(), m.cols(), rows.join(" "))
        .trim_end()
        .to_string()
}

fn effectivity(cli: &Cli, fan: &Path, contacts: &Path) -> Result<Report, CliError> {
    let f = read_fan(fan)?;
    let c = read_contacts(contacts)?;
    let mut rep = Report::new("effectivity", cli.seed);
    rep.param("markings", c.num_markings());
    if c.num_markings() == 0 {
        rep.summary("verdict", "effective (vacuous)");
        return Ok(rep);
    }
    let spec = evaluation_space(&f, &c)?;
    let report = effectivity_of(&spec);
    rep.summary("phi", matrix_rows(&report.phi))
        .summary("injective", report.injective)
        .summary("cokernel_free", report.cokernel_free)
        .summary("verdict", if report.effective { "effective" } else { "NOT effective" });
    Ok(rep)
}

fn evalspace(cli: &Cli, fan: &Path, contacts: &Path) -> Result<Report, CliError> {
    let f = read_fan(fan)?;
    let c = read_contacts(contacts)?;
    let spec = evaluation_space(&f, &c)?;
    let mut rep = Report::new("evalspace", cli.seed);
    rep.param("markings", c.num_markings());
    for (i, m) in spec.per_marking.iter().enumerate() {
        let stratum = match &m.stratum {
            Stratum::FullSpace => "full".to_string(),
            Stratum::Cone(cone) => cone.rays().iter().map(|r| fmt_vec(r)).collect::<Vec<_>>().join(" "),
        };
        rep.record(
            Record::new("marking")
                .field("index", i + 1)
                .field("contact", fmt_vec(&c.columns()[i]))
                .field("stratum", stratum)
                .field("rank", m.quotient.rank()),
        );
    }
    rep.summary("product_rank", spec.product_rank);
    let report = effectivity_of(&spec);
    match rubber_quotient(&spec, &report) {
        Ok(quot) => rep.summary("rubber_rank", quot.rank()),
        Err(_) => rep.summary("rubber_rank", "undefined (not effective)"),
    };
    Ok(rep)
}

fn gammarub(cli: &Cli, deg: &Degree, seeds: u32) -> Result<Report, CliError> {
    positive(deg)?;
    let (d, g) = (deg.degree, deg.genus);
    if d > 3 {
        return Err(CliError::Usage("the support scan runs for degrees up to 3".into()));
    }
    let spec = GammaRubSpec::severi(d, g);
    let entries = support_scan(&spec, cli.seed, seeds)?;
    let mut rep = Report::new("gammarub", cli.seed);
    rep.param("d", d).param("g", g).param("seeds", seeds);
    if (d, g) != (2, 0) {
        rep.param("experimental", true);
    }
    for (i, e) in entries.iter().enumerate() {
        let mut r = Record::new("type").field("index", i).field("edges", e.ty.edges().len());
        match &e.shape {
            GammaRubShape::Polynomial(p) => {
                let factors = gamma_rub_factors(&spec, &e.ty)?;
                let check = interpolation_check(&spec, &e.ty, cli.seed)?;
                r = r
                    .field("shape", "polynomial")
                    .field("degree", p.degree().map_or(-1, i64::from))
                    .field(
                        "factors",
                        factors.iter().map(|f| format!("({f})")).collect::<Vec<_>>().join(""),
                    )
                    .field("interpolated_degree", check.degree.map_or(-1, |k| k as i64))
                    .field("interpolation_consistent", check.consistent && check.matches_factors);
            }
            GammaRubShape::Piecewise => r = r.field("shape", "piecewise"),
            GammaRubShape::Zero => r = r.field("shape", "zero"),
        }
        let ones = vec![q(1); e.ty.edges().len()];
        let origin = vec![Q::zero(); e.ty.rank()];
        let curve = solve_balanced_map(&e.ty, &ones, &Anchor::Marking(spec.anchor), &origin)?.to_text();
        rep.record(r.field("type_text", curve));
    }
    rep.summary("support_types", entries.len());
    Ok(rep)
}

fn oracle(cli: &Cli, kind: OracleKind, deg: &Degree) -> Result<Report, CliError> {
    positive(deg)?;
    let (d, g) = (deg.degree, deg.genus);
    let mut rep = Report::new("oracle", cli.seed);
    rep.param("d", d).param("g", g);
    match kind {
        OracleKind::Severi => {
            if g != 0 {
                return Err(CliError::Usage("the severi oracle covers genus 0 only".into()));
            }
            rep.param("kind", "severi").summary("total", wdvv_oracle(d));
        }
        OracleKind::Hurwitz => {
            rep.param("kind", "hurwitz")
                .summary("total", fmt_q(&hurwitz_factorization_oracle(d, g)));
        }
    }
    Ok(rep)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    if let Command::Render { curve } = &cli.command {
        let map = TropicalMap::parse(&read(curve)?).map_err(|e| parse_err(curve, e))?;
        let svg = render::svg(&map, cli.seed)?;
        return report::write_out(cli.out.as_deref(), &svg);
    }
    let rep = match &cli.command {
        Command::Severi { deg, oracle, r#unsafe } => severi(cli, deg, *oracle, *r#unsafe)?,
        Command::Hurwitz { deg, oracle } => hurwitz(cli, deg, *oracle)?,
        Command::Effectivity { fan, contacts } => effectivity(cli, fan, contacts)?,
        Command::Evalspace { fan, contacts } => evalspace(cli, fan, contacts)?,
        Command::Gammarub { deg, seeds } => gammarub(cli, deg, *seeds)?,
        Command::Oracle { kind, deg } => oracle(cli, *kind, deg)?,
        Command::Render { .. } => unreachable!(),
    };
    rep.emit(cli)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            eprintln!("error: --jobs must be positive");
            return ExitCode::from(2);
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .expect("thread pool set once");
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = writeln!(std::io::stderr(), "error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

impl Report {
    fn emit(&self, cli: &Cli) -> Result<(), CliError> {
        let format = match cli.format {
            FormatArg::Text => Format::Text,
            FormatArg::JsonLines => Format::JsonLines,
        };
        report::write_out(cli.out.as_deref(), &self.render(format))
    }
}
