mod spec_file;

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use kchain::chain::{
    analytic_decomposition, assemble_matrix, numeric_decomposition, verify_decomposition, ChainError, OffDiagSign,
    SpectralDecomposition, SpinChain,
};
use kchain::closedform::{self, ClosedFormError, Method};
use kchain::evolve::{
    self, classify_q, transfer_report, transfer_time, EvolveError, ExactEvolution, ExactPhaseTime, Verdict,
    MAX_FLOAT_TIME,
};
use kchain::families::{self, FamilyError, FamilySpec, Scalar};
use kchain::qseries::{parse_rational, SeriesError};
use num_rational::BigRational;
use rayon::prelude::*;
use serde_json::json;

use spec_file::{input_error, InputError, Source, SpecFile};

/// Spin chains from q-deformed orthogonal polynomials: build, diagonalise, evolve and certify transfer.
#[derive(Parser)]
#[command(name = "kchain", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Couplings J_n (as positive magnitudes) and fields h_n.
    Build {
        spec: PathBuf,
        /// Emit an explicit-chain JSON spec instead of CSV.
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Eigenvalues, the orthonormal eigenvector matrix and the reconstruction residual.
    Spectrum {
        spec: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// f_{r,s}(t) on a list of times.
    Evolve {
        spec: PathBuf,
        #[arg(short, long)]
        r: usize,
        #[arg(short, long)]
        s: usize,
        /// Comma separated times: multiples of pi such as 9pi or 3/2pi, or plain seconds.
        #[arg(long, value_delimiter = ',')]
        times: Vec<String>,
        /// Uniform grid of floating times: start,stop,count.
        #[arg(long)]
        grid: Option<String>,
        #[command(flatten)]
        out: Output,
    },
    /// Parity classification, transfer time, phase table and verdict.
    PstCheck { spec: PathBuf },
    /// Closed-form f_{r,s}(T) with its residual against the spectral sum.
    ClosedForm {
        spec: PathBuf,
        #[arg(short, long)]
        r: usize,
        #[arg(short, long)]
        s: usize,
    },
    /// |f_{N,0}(T)| while one family parameter runs over a grid.
    Scan {
        spec: PathBuf,
        #[arg(long)]
        param: String,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Args)]
struct Output {
    /// Write to this file instead of standard output.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

impl Output {
    fn emit(&self, text: &str) -> Result<()> {
        match &self.output {
            Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout.write_all(text.as_bytes())?;
                Ok(stdout.flush()?)
            }
        }
    }
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct GridArgs {
    /// Explicit comma separated values.
    #[arg(long, value_delimiter = ',')]
    values: Option<Vec<String>>,
    /// Linear grid start,stop,count.
    #[arg(long)]
    linear: Option<String>,
    /// Logarithmic grid start,stop,count.
    #[arg(long)]
    log: Option<String>,
    /// Geometric grid centre,ratio,half: centre * ratio^j for j in -half..=half.
    #[arg(long)]
    geom: Option<String>,
}

fn real(v: f64) -> String {
    format!("{:.16e}", v + 0.0)
}

fn fraction(v: &BigRational) -> String {
    if v.is_integer() {
        v.numer().to_string()
    } else {
        format!("{}/{}", v.numer(), v.denom())
    }
}

fn exact(text: &str, what: &str) -> Result<BigRational> {
    parse_rational(text).ok_or_else(|| input_error(format!("{what}: cannot parse {text:?}")))
}

fn triple(text: &str, what: &str) -> Result<(String, String, usize)> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let [a, b, c] = parts.as_slice() else {
        return Err(input_error(format!("{what} needs three comma separated fields, got {text:?}")));
    };
    let count = c.parse().map_err(|_| input_error(format!("{what}: count {c:?} is not an integer")))?;
    Ok((a.to_string(), b.to_string(), count))
}

fn chain_of(spec: &SpecFile) -> SpinChain {
    match &spec.source {
        Source::Family(f) => families::recurrence_coefficients(f),
        Source::Chain(c) => c.clone(),
    }
}

fn decomposition(spec: &SpecFile) -> Result<SpectralDecomposition> {
    let dec = match &spec.source {
        Source::Family(f) => analytic_decomposition(f)?,
        Source::Chain(c) => numeric_decomposition(&assemble_matrix(c, OffDiagSign::NegativeOffDiag))?,
    };
    Ok(match spec.sign {
        OffDiagSign::NegativeOffDiag => dec,
        OffDiagSign::PositiveOffDiag => dec.flip_convention(),
    })
}

fn need_family(spec: &SpecFile) -> Result<&FamilySpec> {
    spec.family().ok_or_else(|| input_error("this command needs a polynomial family spec, not an explicit chain"))
}

fn cmd_build(spec: &SpecFile, as_json: bool) -> Result<String> {
    let chain = chain_of(spec);
    if as_json {
        let doc = json!({ "family": "chain", "J": chain.j, "h": chain.h });
        return Ok(serde_json::to_string_pretty(&doc)? + "\n");
    }
    let mut out = String::from("kind,index,value\n");
    for (i, v) in chain.j.iter().enumerate() {
        writeln!(out, "J,{i},{}", real(*v))?;
    }
    for (i, v) in chain.h.iter().enumerate() {
        writeln!(out, "h,{i},{}", real(*v))?;
    }
    Ok(out)
}

fn cmd_spectrum(spec: &SpecFile) -> Result<String> {
    let dec = decomposition(spec)?;
    let matrix = assemble_matrix(&chain_of(spec), spec.sign);
    let residual = verify_decomposition(&dec, &matrix)?;
    let mut out = String::from("k,exact,value\n");
    for (k, v) in dec.eigenvalues.iter().enumerate() {
        let exact = dec.exact.as_ref().map(|e| fraction(&e[k])).unwrap_or_default();
        writeln!(out, "{k},{exact},{}", real(*v))?;
    }
    out.push_str("\nsite");
    for k in 0..dec.eigenvalues.len() {
        write!(out, ",u{k}")?;
    }
    out.push('\n');
    for (n, row) in dec.u.row_iter().enumerate() {
        write!(out, "{n}")?;
        for v in row.iter() {
            write!(out, ",{}", real(*v))?;
        }
        out.push('\n');
    }
    writeln!(out, "\nresidual,{}", real(residual.max()))?;
    Ok(out)
}

enum Time {
    Exact(String, ExactPhaseTime),
    Float(String, f64),
}

fn parse_times(list: &[String], grid: Option<&str>) -> Result<Vec<Time>> {
    let mut times = Vec::new();
    for item in list {
        let item = item.trim();
        if let Ok(t) = ExactPhaseTime::parse(item) {
            times.push(Time::Exact(item.to_string(), t));
        } else {
            let t: f64 = item.parse().map_err(|_| input_error(format!("cannot parse time {item:?}")))?;
            times.push(Time::Float(item.to_string(), t));
        }
    }
    if let Some(g) = grid {
        let (a, b, count) = triple(g, "--grid")?;
        let (a, b): (f64, f64) = (
            a.parse().map_err(|_| input_error(format!("--grid start {a:?}")))?,
            b.parse().map_err(|_| input_error(format!("--grid stop {b:?}")))?,
        );
        for i in 0..count {
            let t = if count == 1 { a } else { a + (b - a) * i as f64 / (count - 1) as f64 };
            times.push(Time::Float(real(t), t));
        }
    }
    if times.is_empty() {
        return Err(input_error("no times given; use --times or --grid"));
    }
    Ok(times)
}

fn cmd_evolve(spec: &SpecFile, r: usize, s: usize, times: &[Time]) -> Result<String> {
    let dec = decomposition(spec)?;
    let n = dec.eigenvalues.len() - 1;
    for index in [r, s] {
        if index > n {
            return Err(EvolveError::SiteOutOfRange { index, n }.into());
        }
    }
    let exact_engine = match spec.family() {
        Some(f) if f.rational_q().is_some() => Some(ExactEvolution::new(f)?),
        _ => None,
    };
    let flip = if spec.sign == OffDiagSign::PositiveOffDiag && (r + s) % 2 == 1 { -1.0 } else { 1.0 };
    let mut out = String::from("t,re,im,abs\n");
    for time in times {
        let (label, f) = match (time, &exact_engine) {
            (Time::Exact(label, t), Some(engine)) => (label, engine.correlation(r, s, t)? * flip),
            (Time::Exact(label, t), None) => (label, evolve::correlation(&dec, r, s, t.to_f64())?),
            (Time::Float(label, t), _) => {
                if t.abs() > MAX_FLOAT_TIME {
                    return Err(EvolveError::TimeTooLarge(*t).into());
                }
                eprintln!("note: t = {label} evaluated with floating phases");
                (label, evolve::correlation(&dec, r, s, *t)?)
            }
        };
        writeln!(out, "{label},{},{},{}", real(f.re), real(f.im), real(f.norm()))?;
    }
    Ok(out)
}

fn cmd_pst_check(spec: &SpecFile) -> Result<(String, bool)> {
    let family = need_family(spec)?;
    let q = family.rational_q().ok_or(EvolveError::IrrationalQ)?;
    let (_, text) = classify_q(&q);
    let report = transfer_report(family)?;
    let mut out = String::new();
    writeln!(out, "spec: {family}")?;
    writeln!(out, "classification: {text}")?;
    writeln!(out, "T: {}", report.time)?;
    out.push_str("k,T*eps_k/pi,integer,parity_ok\n");
    for row in &report.parity.rows {
        writeln!(out, "{},{},{},{}", row.k, fraction(&row.value), row.integer, row.parity_matches)?;
    }
    out.push_str("n,re f_n0(T),im f_n0(T),abs\n");
    for (n, a) in report.amplitudes.iter().enumerate() {
        writeln!(out, "{n},{},{},{}", real(a.re), real(a.im), real(a.norm()))?;
    }
    writeln!(out, "endpoint |f_N0(T)|: {}", real(report.endpoint_fidelity))?;
    writeln!(out, "period residual: {}", real(report.period_residual))?;
    if let Some(m) = report.mirror_residual {
        writeln!(out, "mirror residual: {}", real(m))?;
    }
    let perfect = report.verdict == Verdict::Perfect;
    match report.verdict {
        Verdict::Perfect => out.push_str("verdict: Perfect\n"),
        Verdict::Imperfect { best_fidelity } => writeln!(out, "verdict: Imperfect (best fidelity {})", real(best_fidelity))?,
    }
    Ok((out, perfect))
}

fn cmd_closed_form(spec: &SpecFile, r: usize, s: usize) -> Result<String> {
    let family = need_family(spec)?;
    let res = closedform::f_t(family, r, s)?;
    let method = match res.method {
        Method::ClosedForm => "closed-form",
        Method::FallbackDirectSum => "direct-sum",
    };
    Ok(format!(
        "r,s,T,value,method,residual_vs_direct\n{r},{s},{},{},{method},{}\n",
        res.time,
        real(res.value),
        real(res.residual_vs_direct)
    ))
}

fn grid_values(grid: &GridArgs) -> Result<Vec<Scalar>> {
    let values: Vec<Scalar> = if let Some(list) = &grid.values {
        list.iter().map(|v| exact(v, "--values").map(Scalar::Exact)).collect::<Result<_>>()?
    } else if let Some(text) = &grid.linear {
        let (a, b, count) = triple(text, "--linear")?;
        let (a, b) = (exact(&a, "--linear")?, exact(&b, "--linear")?);
        (0..count)
            .map(|i| {
                let step = if count == 1 {
                    BigRational::from_integer(0.into())
                } else {
                    BigRational::new(i.into(), (count - 1).into())
                };
                Scalar::Exact(&a + (&b - &a) * step)
            })
            .collect()
    } else if let Some(text) = &grid.log {
        let (a, b, count) = triple(text, "--log")?;
        let (a, b) = (exact(&a, "--log")?, exact(&b, "--log")?);
        let (la, lb) = (Scalar::Exact(a).to_f64().ln(), Scalar::Exact(b).to_f64().ln());
        if !la.is_finite() || !lb.is_finite() {
            return Err(input_error("--log bounds must be positive"));
        }
        (0..count)
            .map(|i| {
                let x = if count == 1 { la } else { la + (lb - la) * i as f64 / (count - 1) as f64 };
                Scalar::Real(x.exp())
            })
            .collect()
    } else if let Some(text) = &grid.geom {
        let (c, ratio, half) = triple(text, "--geom")?;
        closedform::geometric_grid(&exact(&c, "--geom")?, &exact(&ratio, "--geom")?, half)
            .into_iter()
            .map(Scalar::Exact)
            .collect()
    } else {
        Vec::new()
    };
    if values.is_empty() {
        return Err(input_error("empty grid"));
    }
    Ok(values)
}

fn endpoint_fidelity(spec: &FamilySpec) -> Result<f64, EvolveError> {
    families::validate(spec).into_result()?;
    let (time, _) = transfer_time(spec)?;
    Ok(evolve::site_correlation(spec, spec.n, 0, &time)?.norm())
}

fn cmd_scan(spec: &SpecFile, param: &str, grid: &GridArgs) -> Result<String> {
    let family = need_family(spec)?;
    if family.param(param).is_none() {
        return Err(input_error(format!("{} has no parameter {param:?}", family.kind())));
    }
    let values = grid_values(grid)?;
    let specs = values
        .iter()
        .map(|v| family.with_param(param, v.clone()))
        .collect::<Result<Vec<_>, _>>()?;
    let results: Vec<f64> = specs.par_iter().map(endpoint_fidelity).collect::<Result<_, _>>()?;
    let mut out = format!("{param},abs_f_N0\n");
    let mut best = 0;
    for (i, (v, f)) in values.iter().zip(&results).enumerate() {
        writeln!(out, "{},{}", real(v.to_f64()), real(*f))?;
        if *f > results[best] {
            best = i;
        }
    }
    writeln!(out, "# argmax,{},{}", values[best], real(results[best]))?;
    Ok(out)
}

fn family_code(e: &FamilyError) -> u8 {
    match e {
        FamilyError::Invalid(_) | FamilyError::Series(_) => 3,
        FamilyError::NotOddOdd(_) => 5,
        FamilyError::IndexOutOfRange { .. } | FamilyError::UnknownParameter { .. } => 2,
    }
}

fn chain_code(e: &ChainError) -> u8 {
    match e {
        ChainError::Family(f) => family_code(f),
        _ => 3,
    }
}

fn evolve_code(e: &EvolveError) -> u8 {
    match e {
        EvolveError::Chain(c) => chain_code(c),
        EvolveError::NotOddOdd(_) => 5,
        EvolveError::TimeTooLarge(_) => 4,
        EvolveError::NonRationalSpectrum | EvolveError::IrrationalQ => 3,
        EvolveError::SiteOutOfRange { .. } | EvolveError::BadTime(_) => 2,
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.is::<InputError>() {
        return 2;
    }
    if let Some(e) = err.downcast_ref::<ClosedFormError>() {
        return match e {
            ClosedFormError::Evolve(e) => evolve_code(e),
            ClosedFormError::Family(e) => family_code(e),
            ClosedFormError::PhaseConditionUnmet(_) => 6,
            ClosedFormError::NotOddOdd(_) => 5,
            ClosedFormError::SiteOutOfRange { .. } | ClosedFormError::EmptyGrid => 2,
            _ => 3,
        };
    }
    if let Some(e) = err.downcast_ref::<EvolveError>() {
        return evolve_code(e);
    }
    if let Some(e) = err.downcast_ref::<ChainError>() {
        return chain_code(e);
    }
    if let Some(e) = err.downcast_ref::<FamilyError>() {
        return family_code(e);
    }
    if err.is::<SeriesError>() {
        return 3;
    }
    2
}

fn run(cli: Cli) -> Result<u8> {
    let load = |path: &PathBuf| spec_file::load(path);
    match cli.command {
        Command::Build { spec, json, out } => out.emit(&cmd_build(&load(&spec)?, json)?)?,
        Command::Spectrum { spec, out } => out.emit(&cmd_spectrum(&load(&spec)?)?)?,
        Command::Evolve { spec, r, s, times, grid, out } => {
            let spec = load(&spec)?;
            let times = parse_times(&times, grid.as_deref())?;
            out.emit(&cmd_evolve(&spec, r, s, &times)?)?
        }
        Command::PstCheck { spec } => {
            let (text, perfect) = cmd_pst_check(&load(&spec)?)?;
            print!("{text}");
            return Ok(if perfect { 0 } else { 1 });
        }
        Command::ClosedForm { spec, r, s } => print!("{}", cmd_closed_form(&load(&spec)?, r, s)?),
        Command::Scan { spec, param, grid, out } => out.emit(&cmd_scan(&load(&spec)?, &param, &grid)?)?,
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
