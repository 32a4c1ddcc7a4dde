//! The `gqca` command-line front end.
//!
//! Subcommands: `var` (print a cluster variable), `eval` (evaluate an
//! expression), `verify` (identity sweeps with newline-delimited JSON
//! reports), `expand` (basis coordinates of an expression), and `seed`
//! (compatibility checks and mutation of seed files).
//!
//! Exit codes: 0 on success, 1 when a verification or compatibility check
//! fails, 2 on usage or evaluation errors.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::basis::{self, Basis, BasisIndex, ExpansionError};
use crate::cache;
use crate::expr;
use crate::kronecker::{Formula, KroneckerAlgebra, VerificationReport};
use crate::seed::{compatibility_report, QuantumSeed};

/// An inclusive integer range written `A..B` (a single integer means `A..A`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RangeArg {
    pub lo: i64,
    pub hi: i64,
}

impl RangeArg {
    fn iter(self) -> impl Iterator<Item = i64> {
        self.lo..=self.hi
    }
}

impl FromStr for RangeArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (lo, hi) = match s.split_once("..") {
            Some((a, b)) => (a, b),
            None => (s, s),
        };
        let lo: i64 = lo
            .trim()
            .parse()
            .map_err(|_| format!("bad range bound {lo:?}"))?;
        let hi: i64 = hi
            .trim()
            .parse()
            .map_err(|_| format!("bad range bound {hi:?}"))?;
        if lo > hi {
            return Err(format!("empty range {s:?}"));
        }
        Ok(RangeArg { lo, hi })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "kebab-case")]
enum FormulaArg {
    /// Products of two Chebyshev elements.
    Thm1,
    /// Cluster variable times Chebyshev element.
    Thm2,
    /// Products of two cluster variables.
    Thm3,
    /// Bar-images of the three formulas plus bar-invariance checks.
    Bar,
    /// Shift invariance of the imaginary element.
    Sigma,
    /// The exchange relation.
    Exchange,
    /// q-commutation of adjacent variables.
    QCommute,
    /// Positivity of variable and Chebyshev expansions.
    Positivity,
    /// Pointing bijection and basis expansion round trips.
    BasisRoundtrip,
    /// Positivity of structure constants over a pointing window.
    StructurePositivity,
}

#[derive(Parser, Debug)]
#[command(
    name = "gqca",
    version,
    about = "Exact computation and identity verification in a generalized quantum cluster algebra of Kronecker type"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format for elements and expansions.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Bound on |k| for generated cluster variables.
    #[arg(long = "max-k", global = true, default_value_t = 64)]
    max_k: i64,

    /// Variable cache file (defaults to GQCA_CACHE, then a per-user path).
    #[arg(long, global = true, env = "GQCA_CACHE")]
    cache: Option<PathBuf>,

    /// Do not read or write the variable cache.
    #[arg(long, global = true)]
    no_cache: bool,

    /// Worker threads for verification sweeps (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the Laurent expansion of the cluster variable X_k.
    Var {
        #[arg(short, long, allow_hyphen_values = true)]
        k: i64,
    },
    /// Parse and evaluate an expression in the initial torus.
    Eval { expr: String },
    /// Verify an identity family over a parameter grid; one JSON report per
    /// line, nonzero exit if any check fails.
    Verify {
        formula: FormulaArg,
        /// Range for the first parameter, e.g. -4..4.
        #[arg(long, allow_hyphen_values = true)]
        m: Option<RangeArg>,
        /// Range for the second parameter, e.g. 2..8.
        #[arg(long, allow_hyphen_values = true)]
        n: Option<RangeArg>,
        /// Range for the variable index of exchange-style checks.
        #[arg(long, allow_hyphen_values = true)]
        k: Option<RangeArg>,
        /// Half-width of the pointing window for basis checks.
        #[arg(long)]
        window: Option<i64>,
    },
    /// Expand an expression in the positive basis.
    Expand { expr: String },
    /// Operations on seed JSON files.
    Seed {
        #[command(subcommand)]
        op: SeedOp,
    },
}

#[derive(Subcommand, Debug)]
enum SeedOp {
    /// Check the compatibility of the seed's matrix pair.
    Check { file: PathBuf },
    /// Mutate the matrix pair; prints the mutated seed document.
    MutatePair {
        file: PathBuf,
        /// 1-based mutation direction.
        #[arg(long)]
        dir: usize,
        /// Sign ε ∈ {1, -1}; the result does not depend on it.
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        eps: i8,
    },
    /// Mutate the cluster variable; prints the new element.
    MutateVar {
        file: PathBuf,
        /// 1-based mutation direction.
        #[arg(long)]
        dir: usize,
    },
}

/// Run the CLI; returns the process exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

type CliResult<T> = Result<T, Box<dyn std::error::Error>>;

fn execute(cli: Cli) -> CliResult<i32> {
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .ok();
    }
    let algebra = KroneckerAlgebra::with_limit(cli.max_k.max(3));
    let cache_path = if cli.no_cache {
        None
    } else {
        cli.cache.clone().or_else(cache::default_path)
    };
    if let Some(path) = &cache_path {
        if let Err(e) = cache::load(path, &algebra) {
            eprintln!("warning: ignoring cache {}: {e}", path.display());
        }
    }

    let code = match &cli.command {
        Command::Var { k } => {
            let x = algebra.cluster_var(*k)?;
            print_element(&x, cli.format)?;
            0
        }
        Command::Eval { expr: text } => {
            let x = expr::eval_str(text, &algebra)?;
            print_element(&x, cli.format)?;
            0
        }
        Command::Expand { expr: text } => {
            let x = expr::eval_str(text, &algebra)?;
            let basis = Basis::new(&algebra);
            match basis.expand(&x) {
                Ok(expansion) => {
                    match cli.format {
                        Format::Text => {
                            if expansion.is_empty() {
                                println!("0");
                            }
                            for (ix, c) in expansion.iter() {
                                println!("{ix}: {c}");
                            }
                        }
                        Format::Json => println!("{}", serde_json::to_string(&expansion)?),
                    }
                    0
                }
                Err(ExpansionError::NotInSpan { remainder, .. }) => {
                    eprintln!("error: element is not in the basis span");
                    eprintln!("remainder: {remainder}");
                    2
                }
                Err(e) => return Err(e.into()),
            }
        }
        Command::Verify {
            formula,
            m,
            n,
            k,
            window,
        } => cmd_verify(&algebra, *formula, *m, *n, *k, *window)?,
        Command::Seed { op } => cmd_seed(op, cli.format)?,
    };

    if let Some(path) = &cache_path {
        if let Err(e) = cache::save(path, &algebra) {
            eprintln!("warning: could not write cache {}: {e}", path.display());
        }
    }
    Ok(code)
}

fn print_element(x: &crate::torus::TorusElement, format: Format) -> CliResult<()> {
    match format {
        Format::Text => println!("{x}"),
        Format::Json => println!("{}", serde_json::to_string(x)?),
    }
    Ok(())
}

/// One grid point of a verification sweep.
enum Check {
    ChebCheb(i64, i64),
    VarCheb(i64, i64),
    VarVar(i64, i64),
    BarImage(Formula, i64, i64),
    BarVar(i64),
    BarCheb(i64),
    BarBasis(BasisIndex),
    Sigma(i64),
    Exchange(i64),
    QCommute(i64),
    PositivityVar(i64),
    PositivityCheb(i64),
    Bijection(i64, i64),
    Roundtrip(BasisIndex),
    StructurePositivity(BasisIndex, BasisIndex),
}

fn run_check(
    algebra: &KroneckerAlgebra,
    basis: &Basis<'_>,
    check: &Check,
) -> Result<VerificationReport, String> {
    let report = match *check {
        Check::ChebCheb(m, n) => algebra.verify_cheb_cheb(m, n).map_err(|e| e.to_string())?,
        Check::VarCheb(m, n) => algebra.verify_var_cheb(m, n).map_err(|e| e.to_string())?,
        Check::VarVar(m, n) => algebra.verify_var_var(m, n).map_err(|e| e.to_string())?,
        Check::BarImage(which, m, n) => algebra
            .verify_bar_images(which, m, n)
            .map_err(|e| e.to_string())?,
        Check::BarVar(k) => algebra.verify_bar_var(k).map_err(|e| e.to_string())?,
        Check::BarCheb(n) => algebra.verify_bar_cheb(n).map_err(|e| e.to_string())?,
        Check::BarBasis(ref ix) => basis.verify_bar_invariance(ix).map_err(|e| e.to_string())?,
        Check::Sigma(m) => algebra.verify_sigma(m).map_err(|e| e.to_string())?,
        Check::Exchange(k) => algebra.verify_exchange(k).map_err(|e| e.to_string())?,
        Check::QCommute(m) => algebra.verify_q_commute(m).map_err(|e| e.to_string())?,
        Check::PositivityVar(k) => algebra
            .verify_positivity_var(k)
            .map_err(|e| e.to_string())?,
        Check::PositivityCheb(n) => algebra
            .verify_positivity_cheb(n)
            .map_err(|e| e.to_string())?,
        Check::Bijection(x, y) => {
            let ix = basis::index_from_point((x, y));
            let ok = basis::pointing_exponent(&ix) == (x, y) && ix.is_canonical();
            VerificationReport::flag("pointing-bijection", &[("px", x), ("py", y)], ok)
        }
        Check::Roundtrip(ref ix) => basis.verify_roundtrip(ix).map_err(|e| e.to_string())?,
        Check::StructurePositivity(ref a, ref b) => basis
            .verify_structure_positivity(a, b)
            .map_err(|e| e.to_string())?,
    };
    Ok(report)
}

/// Canonical monomial indices with `|m| ≤ m_bound` and `1 ≤ a1+a2 ≤ degree`.
fn monomial_window(m_bound: i64, degree: u32) -> Vec<BasisIndex> {
    let mut out = Vec::new();
    for m in -m_bound..=m_bound {
        for a1 in 1..=degree {
            for a2 in 0..=(degree - a1) {
                out.push(BasisIndex::ClusterMonomial { m, a1, a2 });
            }
        }
    }
    out
}

fn cmd_verify(
    algebra: &KroneckerAlgebra,
    formula: FormulaArg,
    m: Option<RangeArg>,
    n: Option<RangeArg>,
    k: Option<RangeArg>,
    window: Option<i64>,
) -> CliResult<i32> {
    let basis = Basis::new(algebra);
    let mut checks: Vec<Check> = Vec::new();
    let range = |arg: Option<RangeArg>, lo: i64, hi: i64| arg.unwrap_or(RangeArg { lo, hi });

    match formula {
        FormulaArg::Thm1 => {
            let ms = range(m, 1, 10);
            let ns = range(n, 1, 8);
            algebra.warm_chebyshev(ms.hi + ns.hi);
            for mm in ms.iter() {
                for nn in ns.iter().filter(|&nn| nn <= mm) {
                    checks.push(Check::ChebCheb(mm, nn));
                }
            }
        }
        FormulaArg::Thm2 => {
            let ms = range(m, -4, 8);
            let ns = range(n, 1, 8);
            algebra.warm_variables(ms.lo - ns.hi, ms.hi + ns.hi)?;
            algebra.warm_chebyshev(ns.hi);
            for mm in ms.iter() {
                for nn in ns.iter() {
                    checks.push(Check::VarCheb(mm, nn));
                }
            }
        }
        FormulaArg::Thm3 => {
            let ms = range(m, -4, 4);
            let ns = range(n, 2, 10);
            algebra.warm_variables(ms.lo, ms.hi + ns.hi)?;
            algebra.warm_chebyshev((ns.hi - 3).max(1));
            for mm in ms.iter() {
                for nn in ns.iter() {
                    checks.push(Check::VarVar(mm, nn));
                }
            }
        }
        FormulaArg::Bar => {
            let ms = range(m, -4, 8);
            let ns = range(n, 1, 8);
            algebra.warm_variables(ms.lo - ns.hi, ms.hi + ns.hi)?;
            algebra.warm_chebyshev(ms.hi.max(2) + ns.hi);
            for mm in ms.iter().filter(|&mm| mm >= 1) {
                for nn in ns.iter().filter(|&nn| nn <= mm) {
                    checks.push(Check::BarImage(Formula::ChebCheb, mm, nn));
                }
            }
            for mm in ms.iter() {
                for nn in ns.iter() {
                    checks.push(Check::BarImage(Formula::VarCheb, mm, nn));
                    if nn >= 2 {
                        checks.push(Check::BarImage(Formula::VarVar, mm, nn));
                    }
                }
            }
            for kk in range(k, -10, 10).iter() {
                checks.push(Check::BarVar(kk));
            }
            for nn in ns.iter() {
                checks.push(Check::BarCheb(nn));
            }
            for ix in monomial_window(5, 4) {
                checks.push(Check::BarBasis(ix));
            }
        }
        FormulaArg::Sigma => {
            let ms = range(m, -6, 8);
            algebra.warm_variables(ms.lo, ms.hi + 3)?;
            for mm in ms.iter() {
                checks.push(Check::Sigma(mm));
            }
        }
        FormulaArg::Exchange => {
            let ks = range(k.or(m), -9, 11);
            algebra.warm_variables(ks.lo - 1, ks.hi + 1)?;
            for kk in ks.iter() {
                checks.push(Check::Exchange(kk));
            }
        }
        FormulaArg::QCommute => {
            let ms = range(m.or(k), -10, 11);
            algebra.warm_variables(ms.lo, ms.hi + 1)?;
            for mm in ms.iter() {
                checks.push(Check::QCommute(mm));
            }
        }
        FormulaArg::Positivity => {
            let ks = range(k.or(m), -10, 10);
            let ns = range(n, 1, 8);
            algebra.warm_variables(ks.lo, ks.hi)?;
            algebra.warm_chebyshev(ns.hi);
            for kk in ks.iter() {
                checks.push(Check::PositivityVar(kk));
            }
            for nn in ns.iter() {
                checks.push(Check::PositivityCheb(nn));
            }
        }
        FormulaArg::BasisRoundtrip => {
            let w = window.unwrap_or(8);
            for x in -w..=w {
                for y in -w..=w {
                    checks.push(Check::Bijection(x, y));
                }
            }
            algebra.warm_variables(-6, 7)?;
            algebra.warm_chebyshev(8);
            for ix in monomial_window(5, 4) {
                checks.push(Check::Roundtrip(ix));
            }
            for nn in 1..=8u32 {
                checks.push(Check::Roundtrip(BasisIndex::imaginary(nn)));
            }
            checks.push(Check::Roundtrip(BasisIndex::Identity));
        }
        FormulaArg::StructurePositivity => {
            let w = window.unwrap_or(4);
            algebra.warm_variables(-(2 * w + 2), 2 * w + 3)?;
            algebra.warm_chebyshev(2 * w);
            let mut indices = Vec::new();
            for x in -w..=w {
                for y in -w..=w {
                    indices.push(basis::index_from_point((x, y)));
                }
            }
            for a in &indices {
                for b in &indices {
                    checks.push(Check::StructurePositivity(*a, *b));
                }
            }
        }
    }

    let reports: Vec<Result<VerificationReport, String>> = checks
        .par_iter()
        .map(|c| run_check(algebra, &basis, c))
        .collect();

    let mut failures = 0usize;
    let mut stdout = String::new();
    for report in reports {
        let report = report.map_err(|e| -> Box<dyn std::error::Error> { e.into() })?;
        if !report.ok {
            failures += 1;
        }
        writeln!(stdout, "{}", report.to_json_line()).unwrap();
    }
    print!("{stdout}");
    eprintln!(
        "verify {:?}: {} checks, {} failures",
        formula,
        checks.len(),
        failures
    );
    Ok(if failures == 0 { 0 } else { 1 })
}

fn cmd_seed(op: &SeedOp, format: Format) -> CliResult<i32> {
    let load = |file: &PathBuf| -> CliResult<QuantumSeed> {
        let text = std::fs::read_to_string(file)?;
        let value: serde_json::Value = serde_json::from_str(&text)?;
        Ok(QuantumSeed::from_json(&value)?)
    };
    match op {
        SeedOp::Check { file } => {
            let text = std::fs::read_to_string(file)?;
            let value: serde_json::Value = serde_json::from_str(&text)?;
            // compatibility diagnostics work on the raw pair even when the
            // rest of the seed data is invalid
            let lambda: Vec<Vec<i64>> = serde_json::from_value(value["lambda"].clone())?;
            let b: Vec<Vec<i64>> = serde_json::from_value(value["b"].clone())?;
            let lambda = crate::torus::SkewForm::new(lambda)?;
            let b = crate::seed::ExchangeMatrix::new(b)?;
            let report = compatibility_report(&lambda, &b);
            let ok = report["compatible"] == serde_json::json!(true);
            match format {
                Format::Text => {
                    if ok {
                        let diag: Vec<i64> =
                            serde_json::from_value(report["diag"].clone()).unwrap();
                        let diag = diag
                            .iter()
                            .map(|d| d.to_string())
                            .collect::<Vec<_>>()
                            .join(",");
                        println!("compatible, diag=({diag})");
                    } else {
                        println!(
                            "not compatible: {}",
                            report["error"].as_str().unwrap_or("?")
                        );
                    }
                }
                Format::Json => {
                    println!(
                        "{}",
                        serde_json::to_string(&serde_json::Value::Object(
                            report.into_iter().collect()
                        ))?
                    );
                }
            }
            Ok(if ok { 0 } else { 1 })
        }
        SeedOp::MutatePair { file, dir, eps } => {
            let seed = load(file)?;
            let n = seed.pair().exchange_matrix().column_count();
            if *dir < 1 || *dir > n {
                return Err(format!("direction must be in 1..={n}").into());
            }
            if *eps != 1 && *eps != -1 {
                return Err("eps must be 1 or -1".into());
            }
            let mutated = seed.mutate_pair(*dir, *eps);
            match format {
                Format::Text => println!("{}", serde_json::to_string_pretty(&mutated.to_json())?),
                Format::Json => println!("{}", serde_json::to_string(&mutated.to_json())?),
            }
            Ok(0)
        }
        SeedOp::MutateVar { file, dir } => {
            let seed = load(file)?;
            let n = seed.pair().exchange_matrix().column_count();
            if *dir < 1 || *dir > n {
                return Err(format!("direction must be in 1..={n}").into());
            }
            let x = seed.mutate_variable(*dir);
            print_element(&x, format)?;
            Ok(0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_arg_parses_inclusive_ranges() {
        assert_eq!(
            "-4..4".parse::<RangeArg>().unwrap(),
            RangeArg { lo: -4, hi: 4 }
        );
        assert_eq!("3".parse::<RangeArg>().unwrap(), RangeArg { lo: 3, hi: 3 });
        assert!("5..1".parse::<RangeArg>().is_err());
        assert!("a..b".parse::<RangeArg>().is_err());
    }

    #[test]
    fn monomial_window_is_canonical() {
        let w = monomial_window(2, 3);
        assert!(w.iter().all(|ix| ix.is_canonical()));
        // m ∈ {-2..2}, (a1,a2) ∈ {(1,0),(1,1),(1,2),(2,0),(2,1),(3,0)}
        assert_eq!(w.len(), 5 * 6);
    }
}
