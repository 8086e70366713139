//! Command-line surface. Every command prints one JSON document on stdout;
//! exit codes are 0 on success, 1 when an analysis check fails and 2 on bad
//! input.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::cascade::{cascade_fixed_point, crosscheck_all, default_levels, CrosscheckReport};
use crate::cycles::{search_cycles, CycleOptions};
use crate::error::{Error, Result};
use crate::filterlib::{builtin_by_label, FilterSpec, DEFAULT_QMF_TOL};
use crate::lpoly::{CoeffTable, LaurentPoly};
use crate::peripheral::{
    build_spectrum, lawton_cohen_report, named_eigenfunctions, transfer_product, verify_spectrum,
    PeripheralSpectrum, SpectrumOptions, VerifyOptions,
};
use crate::transfer::TransferOperator;

pub const SCHEMA_VERSION: &str = "1";
pub const SEED_ENV: &str = "RUELLE_LAB_SEED";
pub const DEFAULT_SEED: u64 = 42;

const CROSSCHECK_TERMS: usize = 30;
const CROSSCHECK_PERIODS: usize = 2000;
const CROSSCHECK_PROBES: [f64; 3] = [0.1, 1.0, 2.5];
const CROSSCHECK_COEFF_TOL: f64 = 1e-4;
const PRODUCT_TOL: f64 = 1e-6;

#[derive(Debug, Parser)]
#[command(name = "ruelle-lab", version, about = "Peripheral spectrum of wavelet transfer operators")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the quadrature-mirror conditions of a filter.
    Validate {
        /// JSON filter file or builtin name (haar, stretched_haar_3, daubechies4).
        filter: String,
        #[arg(long, default_value_t = DEFAULT_QMF_TOL)]
        tol: f64,
    },
    /// Cycles, peripheral eigenfunctions and their verification.
    Analyze {
        filter: String,
        /// Largest cycle period searched.
        #[arg(long)]
        pmax: Option<usize>,
        /// Cycle tolerance on `| |m0| - sqrt(N) |`.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Grid size for sup-norm checks and CSV samples.
        #[arg(long, default_value_t = 1024)]
        grid: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Directory for report.json and CSV samples.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Compare against cascade and infinite-product oracles.
        #[arg(long)]
        crosscheck: bool,
    },
    /// Product of two fixed points, `lim R^n(h1 h2)`.
    Product {
        filter: String,
        /// Eigenfunction name (`1`, `h_C1`, `g_2_C2`, ...) or an inline
        /// table `{"offset": k, "coeffs": [[re, im], ...]}`.
        f1: String,
        f2: String,
    },
}

/// What a command produced.
#[derive(Debug)]
pub struct Outcome {
    pub code: i32,
    pub json: Value,
}

impl Outcome {
    fn from_error(e: &Error) -> Self {
        Self {
            code: if e.is_input_error() { 2 } else { 1 },
            json: error_payload(e),
        }
    }

    pub fn render(&self) -> String {
        serde_json::to_string_pretty(&self.json).expect("json values render")
    }
}

pub fn error_payload(e: &Error) -> Value {
    let mut err = json!({ "kind": e.kind(), "message": e.to_string() });
    if let Error::Parse { line, column, .. } = e {
        err["line"] = json!(line);
        err["column"] = json!(column);
    }
    json!({ "schema": SCHEMA_VERSION, "error": err })
}

/// Runs a parsed command. `env_seed` is the raw value of the seed override
/// variable, if set.
pub fn execute(cli: &Cli, env_seed: Option<&str>) -> Outcome {
    let result = match &cli.command {
        Command::Validate { filter, tol } => cmd_validate(filter, *tol),
        Command::Analyze {
            filter,
            pmax,
            tol,
            grid,
            seed,
            out,
            crosscheck,
        } => resolve_seed(*seed, env_seed).and_then(|seed| {
            let opts = AnalyzeOptions {
                p_max: *pmax,
                cycle_tol: *tol,
                grid: *grid,
                seed,
                crosscheck: *crosscheck,
            };
            cmd_analyze(filter, &opts, out.as_deref())
        }),
        Command::Product { filter, f1, f2 } => cmd_product(filter, f1, f2),
    };
    result.unwrap_or_else(|e| Outcome::from_error(&e))
}

pub fn resolve_seed(flag: u64, env: Option<&str>) -> Result<u64> {
    match env {
        Some(raw) => raw
            .trim()
            .parse()
            .map_err(|_| Error::InvalidParam(format!("{SEED_ENV}={raw:?} is not an unsigned integer"))),
        None => Ok(flag),
    }
}

/// A path to an existing file, otherwise a builtin label.
pub fn load_filter(arg: &str) -> Result<FilterSpec> {
    let path = Path::new(arg);
    if path.is_file() {
        return FilterSpec::load(path);
    }
    match builtin_by_label(arg) {
        Err(Error::UnknownFilter(_)) if arg.ends_with(".json") || arg.contains('/') => Err(Error::Io {
            path: arg.to_string(),
            source: std::io::Error::new(std::io::ErrorKind::NotFound, "no such file"),
        }),
        other => other,
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn table(p: &LaurentPoly) -> Value {
    to_value(&CoeffTable::from(p))
}

pub fn cmd_validate(filter: &str, tol: f64) -> Result<Outcome> {
    let spec = load_filter(filter)?.validate(tol)?;
    let validation = spec.validation.clone().expect("validated");
    let ok = validation.all_ok();
    Ok(Outcome {
        code: if ok { 0 } else { 1 },
        json: json!({
            "schema": SCHEMA_VERSION,
            "command": "validate",
            "filter": to_value(&spec.to_file()),
            "validation": to_value(&validation),
            "ok": ok,
        }),
    })
}

#[derive(Clone, Copy, Debug)]
pub struct AnalyzeOptions {
    pub p_max: Option<usize>,
    pub cycle_tol: f64,
    pub grid: usize,
    pub seed: u64,
    pub crosscheck: bool,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        Self {
            p_max: None,
            cycle_tol: 1e-8,
            grid: 1024,
            seed: DEFAULT_SEED,
            crosscheck: false,
        }
    }
}

/// Everything `analyze` computes, before serialisation.
pub struct Analysis {
    pub filter: FilterSpec,
    pub op: TransferOperator,
    pub spectrum: PeripheralSpectrum,
    pub report: Value,
    pub passed: bool,
}

pub fn analyze(filter: FilterSpec, opts: &AnalyzeOptions) -> Result<Analysis> {
    if opts.grid < 8 {
        return Err(Error::InvalidParam(format!("--grid must be at least 8, got {}", opts.grid)));
    }
    if !(opts.cycle_tol > 0.0) {
        return Err(Error::InvalidParam(format!("--tol must be positive, got {}", opts.cycle_tol)));
    }
    let filter = filter.validate(DEFAULT_QMF_TOL)?;
    filter.require_valid()?;
    let copts = CycleOptions {
        cycle_tol: opts.cycle_tol,
        p_max: opts.p_max,
        ..CycleOptions::default()
    };
    let search = search_cycles(&filter, &copts)?;
    let op = TransferOperator::for_filter(&filter)?;
    let sopts = SpectrumOptions {
        seed: opts.seed,
        ..SpectrumOptions::default()
    };
    let spectrum = build_spectrum(&op, &search.cycles, &sopts)?;
    let verification = verify_spectrum(
        &op,
        &spectrum,
        &VerifyOptions {
            grid: opts.grid,
            seed: opts.seed,
            ..VerifyOptions::default()
        },
    );
    let lc = lawton_cohen_report(&spectrum);
    let crosscheck: Option<CrosscheckReport> = if opts.crosscheck {
        Some(crosscheck_all(
            &filter,
            &spectrum,
            CROSSCHECK_TERMS,
            CROSSCHECK_PERIODS,
            &CROSSCHECK_PROBES,
        )?)
    } else {
        None
    };

    let mut passed = verification.all_passed && lc.equivalent && spectrum.diagnostics.residual_decay < 1.0;
    if let Some(c) = &crosscheck {
        passed &= c.all_within_bounds() && c.max_time_domain_discrepancy() <= CROSSCHECK_COEFF_TOL;
    }

    let eigenfunctions: BTreeMap<String, Value> = named_eigenfunctions(&spectrum)
        .iter()
        .map(|(k, v)| (k.clone(), table(v)))
        .collect();
    let mut report = json!({
        "schema": SCHEMA_VERSION,
        "command": "analyze",
        "filter": to_value(&filter.to_file()),
        "validation": to_value(&filter.validation),
        "cycles": to_value(&search.cycles),
        "near_cycles": to_value(&search.near_cycles),
        "non_cycle_roots": to_value(&search.non_cycle_roots),
        "eigenvalues": to_value(&spectrum.eigenvalues),
        "eigenspace_dims": to_value(&spectrum.diagnostics.eigenspace_dims),
        "diagnostics": to_value(&spectrum.diagnostics),
        "eigenfunctions": to_value(&eigenfunctions),
        "lawton_cohen": to_value(&lc),
        "verification": to_value(&verification),
        "ok": passed,
        "provenance": {
            "seed": opts.seed,
            "version": env!("CARGO_PKG_VERSION"),
            "tolerances": {
                "cycle_tol": copts.cycle_tol,
                "root_tol": copts.root_tol,
                "near_tol": copts.near_tol,
                "p_max": search.p_max,
                "qmf_tol": DEFAULT_QMF_TOL,
                "rank_tol": sopts.rank_tol,
                "max_gram_condition": sopts.max_gram_condition,
                "grid": opts.grid,
            },
        },
    });
    if let Some(c) = &crosscheck {
        report["crosscheck"] = json!({
            "terms": CROSSCHECK_TERMS,
            "periods": CROSSCHECK_PERIODS,
            "coeff_tol": CROSSCHECK_COEFF_TOL,
            "probes": to_value(&c.probes),
            "time_domain": to_value(&c.time_domain),
        });
    }
    Ok(Analysis {
        filter,
        op,
        spectrum,
        report,
        passed,
    })
}

pub fn cmd_analyze(filter: &str, opts: &AnalyzeOptions, out: Option<&Path>) -> Result<Outcome> {
    let analysis = analyze(load_filter(filter)?, opts)?;
    let outcome = Outcome {
        code: if analysis.passed { 0 } else { 1 },
        json: analysis.report.clone(),
    };
    if let Some(dir) = out {
        write_outputs(dir, &analysis, opts.grid, &outcome.render())?;
    }
    Ok(outcome)
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.display().to_string(),
        source,
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(io_err(path))
}

/// `report.json`, one `t,re,im` CSV per eigenfunction and the cascade
/// fixed point as `cascade_phi.csv`.
fn write_outputs(dir: &Path, analysis: &Analysis, grid: usize, report: &str) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    write_file(&dir.join("report.json"), &format!("{report}\n"))?;
    for (name, f) in named_eigenfunctions(&analysis.spectrum) {
        let mut csv = String::from("t,re,im\n");
        for (j, v) in f.sample_grid(grid).iter().enumerate() {
            let t = 2.0 * PI * j as f64 / grid as f64;
            csv.push_str(&format!("{t},{},{}\n", v.re, v.im));
        }
        write_file(&dir.join(format!("{}.csv", file_stem(&name))), &csv)?;
    }
    let levels = default_levels(analysis.filter.scale);
    let cascade = cascade_fixed_point(&analysis.filter, levels, None)?;
    write_file(&dir.join("cascade_phi.csv"), &cascade.phi.to_csv())
}

/// `h^1/2_C2` becomes `h_1_2_C2`.
pub fn file_stem(name: &str) -> String {
    let mut out = String::with_capacity(name.len());
    for ch in name.chars() {
        if ch.is_ascii_alphanumeric() {
            out.push(ch);
        } else if !out.ends_with('_') {
            out.push('_');
        }
    }
    out
}

/// Named eigenfunction, `1`, or an inline coefficient table.
pub fn resolve_function(spectrum: &PeripheralSpectrum, arg: &str) -> Result<LaurentPoly> {
    let arg = arg.trim();
    if arg == "1" || arg == "one" {
        return Ok(LaurentPoly::constant(1.0));
    }
    if arg.starts_with('{') {
        let t: CoeffTable = serde_json::from_str(arg)
            .map_err(|e| Error::UnknownFunction(format!("bad inline table {arg:?}: {e}")))?;
        return Ok(LaurentPoly::from(&t));
    }
    named_eigenfunctions(spectrum)
        .remove(arg)
        .ok_or_else(|| Error::UnknownFunction(arg.to_string()))
}

pub fn cmd_product(filter: &str, f1: &str, f2: &str) -> Result<Outcome> {
    let analysis = analyze(load_filter(filter)?, &AnalyzeOptions::default())?;
    let (op, spectrum) = (&analysis.op, &analysis.spectrum);
    let h1 = resolve_function(spectrum, f1)?;
    let h2 = resolve_function(spectrum, f2)?;
    let product = transfer_product(op, &h1, &h2)?;

    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    for (i, hi) in spectrum.h_funcs.iter().enumerate() {
        for (j, hj) in spectrum.h_funcs.iter().enumerate() {
            let p = transfer_product(op, hi, hj)?;
            let expected = if i == j { hi.clone() } else { LaurentPoly::zero() };
            let deviation = p.sup_distance(&expected, crate::lpoly::DEFAULT_GRID);
            worst = worst.max(deviation);
            rows.push(json!({
                "i": i + 1,
                "j": j + 1,
                "product": table(&p),
                "deviation": deviation,
            }));
        }
    }
    let ok = worst <= PRODUCT_TOL;
    Ok(Outcome {
        code: if ok { 0 } else { 1 },
        json: json!({
            "schema": SCHEMA_VERSION,
            "command": "product",
            "filter": analysis.filter.name,
            "f1": f1,
            "f2": f2,
            "product": table(&product),
            "cycle_table": rows,
            "max_table_deviation": worst,
            "tol": PRODUCT_TOL,
            "ok": ok,
        }),
    })
}
