use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use chgraph::chalg::{check_axioms, AlgebraInstance};
use chgraph::genexp::{potential, potential_descendant};
use chgraph::oracle::{evaluation_invariance, rule_soundness};
use chgraph::rewrite::Rule;
use chgraph::verify::{
    bp_relation, mutation_canary, parse_mapping, verify_bp_numeric, verify_bp_symbolic, Relation, DEFAULT_STRATA,
};
use chgraph::{rational, Error};

#[derive(Parser, Debug)]
#[command(name = "chgraph", version, about = "Graph calculus over cH-algebras")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check an algebra instance against every axiom.
    CheckAlgebra {
        #[arg(long)]
        algebra: PathBuf,
    },
    /// List a potential as weighted canonical graphs.
    Potentials {
        #[arg(long)]
        genus: usize,
        #[arg(long)]
        leaves: usize,
        /// The genus-2 potential with one descendant leaf instead.
        #[arg(long)]
        descendant: bool,
    },
    /// Check the genus-2 three-point strata relation.
    VerifyBp {
        #[arg(long, value_enum, default_value = "symbolic")]
        mode: Mode,
        /// Strata file (default: the bundled one).
        #[arg(long)]
        strata: Option<PathBuf>,
        /// Graph-name mapping for the table header.
        #[arg(long)]
        mapping: Option<PathBuf>,
        /// Write the coefficient table here.
        #[arg(long)]
        table: Option<PathBuf>,
        /// Print zero entries in the table.
        #[arg(long)]
        zeros: bool,
        #[arg(long)]
        algebra: Option<PathBuf>,
        #[arg(long, default_value_t = 6)]
        degree: usize,
    },
    /// Seeded soundness and invariance oracles.
    Validate {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        cases: usize,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    Symbolic,
    Numeric,
    /// Rerun the symbolic check with each stratum mutated.
    Canary,
}

/// Outcome of a command: report text and whether the mathematics held.
struct Report {
    text: String,
    ok: bool,
}

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(Error::Io)
}

fn is_input_error(e: &Error) -> bool {
    matches!(e, Error::Parse { .. } | Error::Io(_) | Error::Unsupported { .. } | Error::Structure(_) | Error::Budget { .. })
}

fn check_algebra(path: &Path) -> Result<Report, Error> {
    let a = AlgebraInstance::parse(&read(path)?)?;
    let r = check_axioms(&a)?;
    Ok(Report { text: r.render(), ok: r.all_pass() })
}

fn potentials(genus: usize, leaves: usize, descendant: bool) -> Result<Report, Error> {
    let s = if descendant { potential_descendant(leaves)? } else { potential(genus, leaves)? };
    Ok(Report { text: s.to_text(), ok: true })
}

fn relation(strata: Option<&Path>) -> Result<Relation, Error> {
    match strata {
        Some(p) => bp_relation(&read(p)?),
        None => bp_relation(DEFAULT_STRATA),
    }
}

fn symbolic(rel: &Relation, mapping: Option<&Path>, table: Option<&Path>, zeros: bool) -> Result<Report, Error> {
    let names = match mapping {
        Some(p) => parse_mapping(&read(p)?)?,
        None => Default::default(),
    };
    let r = verify_bp_symbolic(rel)?;
    if let Some(p) = table {
        fs::write(p, r.table.to_tsv(&names, zeros))?;
    }
    let coeffs: Vec<_> = rel.terms.iter().map(|(c, d)| (c.clone(), d.name.clone())).collect();
    Ok(Report { text: r.render(&coeffs), ok: r.passed() })
}

fn numeric(rel: &Relation, algebra: Option<&Path>, degree: usize) -> Result<Report, Error> {
    let path = algebra.ok_or_else(|| Error::Parse { line: 0, msg: "numeric mode needs --algebra".into() })?;
    let a = AlgebraInstance::parse(&read(path)?)?;
    let r = verify_bp_numeric(&a, rel, degree)?;
    let mut text = format!("exact through degree {}\n", r.exact_degree);
    for (marks, s) in r.residuals.iter().filter(|(_, s)| !s.is_empty()) {
        let _ = writeln!(text, "legs {marks:?}: {s}");
    }
    if r.passed() {
        text.push_str("residual: 0\n");
    }
    Ok(Report { text, ok: r.passed() })
}

fn canary(rel: &Relation) -> Result<Report, Error> {
    let mut text = String::new();
    let runs = mutation_canary(rel)?;
    let mut ok = true;
    for c in &runs {
        let _ = writeln!(text, "{}: mutant leaves {} residual graphs", c.stratum, c.residual.len());
        for (k, v) in c.residual.terms().take(3) {
            let _ = writeln!(text, "\t{}\t{}", rational::fmt(v), k.compact());
        }
        ok &= !c.residual.is_empty();
    }
    Ok(Report { text, ok })
}

fn validate(seed: u64, cases: usize) -> Report {
    let mut text = String::new();
    let mut ok = true;
    for (i, rule) in Rule::ALL.into_iter().chain([Rule::Contract]).enumerate() {
        let r = rule_soundness(rule, seed.wrapping_add(i as u64), cases);
        let _ = writeln!(text, "{}: {} cases, {} live, {} failures", r.name, r.cases, r.live, r.failures.len());
        for f in &r.failures {
            let _ = writeln!(text, "\t{f}");
        }
        ok &= r.passed();
    }
    let r = evaluation_invariance(seed, cases);
    let _ = writeln!(text, "{}: {} cases, {} live, {} failures", r.name, r.cases, r.live, r.failures.len());
    ok &= r.passed();
    Report { text, ok }
}

fn run(cli: Cli) -> Result<Report, Error> {
    match cli.command {
        Command::CheckAlgebra { algebra } => check_algebra(&algebra),
        Command::Potentials { genus, leaves, descendant } => potentials(genus, leaves, descendant),
        Command::VerifyBp { mode, strata, mapping, table, zeros, algebra, degree } => {
            let rel = relation(strata.as_deref())?;
            match mode {
                Mode::Symbolic => symbolic(&rel, mapping.as_deref(), table.as_deref(), zeros),
                Mode::Numeric => numeric(&rel, algebra.as_deref(), degree),
                Mode::Canary => canary(&rel),
            }
        }
        Command::Validate { seed, cases } => Ok(validate(seed, cases)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(r) => {
            print!("{}", r.text);
            ExitCode::from(if r.ok { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if is_input_error(&e) { 2 } else { 1 })
        }
    }
}
