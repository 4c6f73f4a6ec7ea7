//! Flag parsing, flat `key = value` config files and the resolved [`RunConfig`].

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use qwell::quantization::{SolveOptions, DEFAULT_POINTS_PER_PI, DEFAULT_REFINE_TOL, DEFAULT_VALIDATE_TOL};
use qwell::{PotentialSpec, QuantizationProblem};

use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "qwell", version, about = "Bound states of a quaternionic spherical square well")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Mode,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Mode {
    /// Bound states of one well with their wavefunction coefficients.
    Solve,
    /// Complex, quaternionic and trial-complex spectra side by side.
    Compare,
    /// Sampled tan(x), f and G curves for plotting.
    Curves,
    /// Property checks with pass/fail per property.
    Verify,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Solve => "solve",
            Mode::Compare => "compare",
            Mode::Curves => "curves",
            Mode::Verify => "verify",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    pub fn as_str(&self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    #[arg(long = "kappa-c", global = true, allow_negative_numbers = true)]
    pub kappa_c: Option<f64>,
    #[arg(long = "kappa-q", global = true, allow_negative_numbers = true)]
    pub kappa_q: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub v1: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub v2: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub v3: Option<f64>,
    /// Well radius.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub a: Option<f64>,
    /// Scan points per pi of the window (0, x_max).
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    #[arg(long = "refine-tol", global = true)]
    pub refine_tol: Option<f64>,
    #[arg(long = "validate-tol", global = true)]
    pub validate_tol: Option<f64>,
    /// Replaces every property tolerance in `verify`.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Flat `key = value` file; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

/// How the well was specified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WellInput {
    Kappas { kappa_c: f64, kappa_q: f64, a: f64 },
    Potential(PotentialSpec),
}

impl WellInput {
    pub fn problem(&self) -> QuantizationProblem {
        match self {
            WellInput::Kappas { kappa_c, kappa_q, a } => QuantizationProblem {
                kappa_c: *kappa_c,
                kappa_q: *kappa_q,
                a: *a,
                phase: 0.0,
            },
            WellInput::Potential(pot) => QuantizationProblem::from_potential(pot),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    /// `None` only for `verify`, which then uses its built-in wells.
    pub well: Option<WellInput>,
    pub refine_tol: f64,
    pub validate_tol: f64,
    pub grid: usize,
    pub check_tol: Option<f64>,
    pub format: Format,
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn solve_options(&self) -> SolveOptions {
        SolveOptions { points_per_pi: self.grid, refine_tol: self.refine_tol, validate_tol: self.validate_tol }
    }

    /// Merges the config file (if any) under the flags.
    pub fn resolve(mode: Mode, flags: &Flags) -> Result<Self, CliError> {
        let mut merged = match &flags.config {
            Some(path) => Flags::from_file(path)?,
            None => Flags::default(),
        };
        merged.overlay(flags);
        Self::from_flags(mode, &merged)
    }

    pub fn from_flags(mode: Mode, f: &Flags) -> Result<Self, CliError> {
        let a = f.a.unwrap_or(1.0);
        if !(a > 0.0 && a.is_finite()) {
            return Err(usage(format!("--a must be positive and finite, got {a}")));
        }
        let kappa_form = f.kappa_c.is_some() || f.kappa_q.is_some();
        let v_form = f.v1.is_some() || f.v2.is_some() || f.v3.is_some();
        let well = match (kappa_form, v_form) {
            (true, true) => {
                return Err(usage("give either --v1/--v2/--v3 or --kappa-c/--kappa-q, not both".into()));
            }
            (true, false) => {
                let kappa_c = f.kappa_c.ok_or_else(|| usage("--kappa-q needs --kappa-c".into()))?;
                let kappa_q = f.kappa_q.unwrap_or(0.0);
                QuantizationProblem::new(kappa_c, kappa_q, a).map_err(|e| usage(e.to_string()))?;
                Some(WellInput::Kappas { kappa_c, kappa_q, a })
            }
            (false, true) => {
                let v1 = f.v1.ok_or_else(|| usage("--v2/--v3 need --v1".into()))?;
                let pot = PotentialSpec::new(v1, f.v2.unwrap_or(0.0), f.v3.unwrap_or(0.0), a)
                    .map_err(|e| usage(e.to_string()))?;
                Some(WellInput::Potential(pot))
            }
            (false, false) if mode == Mode::Verify => None,
            (false, false) => return Err(usage("a well is required: --kappa-c [--kappa-q] or --v1 [--v2 --v3]".into())),
        };
        let refine_tol = f.refine_tol.unwrap_or(DEFAULT_REFINE_TOL);
        let validate_tol = f.validate_tol.unwrap_or(DEFAULT_VALIDATE_TOL);
        for (name, t) in [("--refine-tol", Some(refine_tol)), ("--validate-tol", Some(validate_tol)), ("--tol", f.tol)] {
            if let Some(t) = t {
                if !(t > 0.0 && t.is_finite()) {
                    return Err(usage(format!("{name} must be positive, got {t}")));
                }
            }
        }
        let grid = f.grid.unwrap_or(DEFAULT_POINTS_PER_PI);
        if grid == 0 {
            return Err(usage("--grid must be at least 1".into()));
        }
        Ok(Self {
            mode,
            well,
            refine_tol,
            validate_tol,
            grid,
            check_tol: f.tol,
            format: f.format.unwrap_or(Format::Json),
            output: f.output.clone(),
        })
    }
}

impl Flags {
    /// Parses `key = value` lines; `#` starts a comment, `-` and `_` are
    /// interchangeable in keys.
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_text(&text)
    }

    pub fn from_text(text: &str) -> Result<Self, CliError> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| usage(format!("config line {}: expected key = value", lineno + 1)))?;
            entries.insert(key.trim().replace('-', "_"), (lineno + 1, value.trim().to_string()));
        }
        let mut f = Flags::default();
        for (key, (lineno, value)) in entries {
            let bad = |what: &str| usage(format!("config line {lineno}: {key} expects {what}, got '{value}'"));
            let real = || value.parse::<f64>().map_err(|_| bad("a number"));
            match key.as_str() {
                "kappa_c" => f.kappa_c = Some(real()?),
                "kappa_q" => f.kappa_q = Some(real()?),
                "v1" => f.v1 = Some(real()?),
                "v2" => f.v2 = Some(real()?),
                "v3" => f.v3 = Some(real()?),
                "a" => f.a = Some(real()?),
                "refine_tol" => f.refine_tol = Some(real()?),
                "validate_tol" => f.validate_tol = Some(real()?),
                "tol" => f.tol = Some(real()?),
                "grid" => f.grid = Some(value.parse().map_err(|_| bad("a positive integer"))?),
                "format" => f.format = Some(Format::from_str(&value, true).map_err(|_| bad("json or csv"))?),
                "output" => f.output = Some(PathBuf::from(&value)),
                _ => return Err(usage(format!("config line {lineno}: unknown key '{key}'"))),
            }
        }
        Ok(f)
    }

    /// Flags set in `top` replace those in `self`. A well given on the
    /// command line replaces the file's well entirely, so the two input forms
    /// never mix across sources.
    pub fn overlay(&mut self, top: &Flags) {
        let top_well = top.kappa_c.is_some() || top.kappa_q.is_some() || top.v1.is_some() || top.v2.is_some() || top.v3.is_some();
        if top_well {
            self.kappa_c = top.kappa_c;
            self.kappa_q = top.kappa_q;
            self.v1 = top.v1;
            self.v2 = top.v2;
            self.v3 = top.v3;
        }
        macro_rules! take {
            ($($field:ident),*) => {$(
                if top.$field.is_some() {
                    self.$field = top.$field.clone();
                }
            )*};
        }
        take!(a, grid, refine_tol, validate_tol, tol, format, output, config);
    }
}

fn usage(msg: String) -> CliError {
    CliError::Usage(msg)
}
