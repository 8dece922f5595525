//! `gfcalc`: builds formal distributions, generalized numbers and
//! generalized smooth functions from the mini-syntax or JSON, runs
//! operations on them and executes the verification suites.
//!
//! Exit codes: 0 success or pass, 1 verification failure or a failed
//! computation, 2 usage error. Errors are written to stderr as
//! `{"error": {"kind": .., "message": ..}}`.

mod commands;
mod workspace;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gfcalc_core::GfError;
use serde_json::json;

use commands::Ctx;
use workspace::Workspace;

#[derive(Parser, Debug)]
#[command(name = "gfcalc", version, about = "Exact workbench for formal distributions and generalized smooth functions")]
pub struct Cli {
    #[command(flatten)]
    pub opts: Opts,
    #[command(subcommand)]
    pub verb: Verb,
}

#[derive(Args, Debug, Clone)]
pub struct Opts {
    /// Gauge exponent p in rho = eps^p (rational).
    #[arg(long, global = true)]
    pub gauge: Option<String>,
    /// Dyadic base level L.
    #[arg(long, global = true)]
    pub level: Option<u32>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Emit the output document as JSON.
    #[arg(long, global = true)]
    pub json: bool,
    /// Emit scalar results as floating point.
    #[arg(long, global = true)]
    pub float: bool,
    /// Box of the objects: `lo,hi` per axis, axes separated by `;`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub domain: Option<String>,
    /// Number of variables when `--domain` is absent; the box is (-1,1)^dim.
    #[arg(long, global = true, default_value_t = 1)]
    pub dim: usize,
    /// Workspace file holding named bindings (`@name`) and configuration.
    #[arg(long, global = true)]
    pub workspace: Option<PathBuf>,
    /// Store the result in the workspace under this name.
    #[arg(long, global = true, requires = "workspace")]
    pub bind: Option<String>,
}

#[derive(Subcommand, Debug)]
pub enum Verb {
    /// Generalized numbers.
    Gn {
        #[command(subcommand)]
        op: GnOp,
    },
    /// Formal distributions.
    Dist {
        #[command(subcommand)]
        op: DistOp,
    },
    /// Compatible families and the sheaf laws.
    Sheaf {
        #[command(subcommand)]
        op: SheafOp,
    },
    /// Generalized smooth functions.
    Gsf {
        #[command(subcommand)]
        op: GsfOp,
    },
    /// Verification suites.
    Verify {
        #[command(subcommand)]
        op: VerifyOp,
    },
    /// Plot data.
    Plot {
        #[command(subcommand)]
        op: PlotOp,
    },
}

#[derive(Subcommand, Debug)]
pub enum GnOp {
    /// Normalize a number; with `--float` or `--eps`, sample it.
    Eval {
        #[arg(allow_hyphen_values = true)]
        x: String,
        #[arg(long, value_delimiter = ',')]
        eps: Vec<f64>,
    },
    Classify {
        #[arg(allow_hyphen_values = true)]
        x: String,
    },
}

#[derive(Subcommand, Debug)]
pub enum DistOp {
    New {
        #[arg(allow_hyphen_values = true)]
        t: String,
    },
    /// Derive along `--axis` (default 0), or by the multi-index `--order`.
    Derive {
        #[arg(allow_hyphen_values = true)]
        t: String,
        #[arg(long, default_value_t = 0)]
        axis: usize,
        #[arg(long, value_delimiter = ',')]
        order: Option<Vec<u32>>,
    },
    Add {
        #[arg(allow_hyphen_values = true)]
        a: String,
        #[arg(allow_hyphen_values = true)]
        b: String,
    },
    Eq {
        #[arg(allow_hyphen_values = true)]
        a: String,
        #[arg(allow_hyphen_values = true)]
        b: String,
    },
    /// Pairing with a test function vanishing to high order at the boundary.
    Pair {
        #[arg(allow_hyphen_values = true)]
        t: String,
        #[arg(allow_hyphen_values = true)]
        phi: String,
    },
    Restrict {
        #[arg(allow_hyphen_values = true)]
        t: String,
        #[arg(long, allow_hyphen_values = true)]
        to: String,
    },
}

#[derive(Subcommand, Debug)]
pub enum SheafOp {
    /// Glue `{"cover": [..], "sections": [..]}` into one section on the hull.
    Glue { family: String },
    Laws {
        #[arg(long, default_value_t = 200)]
        cases: usize,
    },
}

#[derive(Subcommand, Debug)]
pub enum GsfOp {
    /// Regularize a 1-D formal distribution.
    Embed {
        #[arg(allow_hyphen_values = true)]
        t: String,
        #[arg(long)]
        p: Option<u32>,
    },
    /// Evaluate at a point given as comma-separated series in `rho`.
    Eval {
        #[arg(allow_hyphen_values = true)]
        f: String,
        #[arg(allow_hyphen_values = true)]
        x: String,
        #[arg(long)]
        p: Option<u32>,
    },
    Derive {
        #[arg(allow_hyphen_values = true)]
        f: String,
        #[arg(long, value_delimiter = ',')]
        order: Vec<u32>,
        #[arg(long, allow_hyphen_values = true)]
        at: Option<String>,
        #[arg(long)]
        p: Option<u32>,
    },
    /// Equality in the Colombeau quotient on the box `--on`.
    ClassEq {
        #[arg(allow_hyphen_values = true)]
        f: String,
        #[arg(allow_hyphen_values = true)]
        g: String,
        #[arg(long, allow_hyphen_values = true)]
        on: Option<String>,
        #[arg(long, default_value_t = 1)]
        alpha: u32,
        #[arg(long)]
        p: Option<u32>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TargetKind {
    Identity,
    Shifted,
    Colombeau,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TauKind {
    Colombeau,
    SmallerBox,
    Killing,
}

#[derive(Subcommand, Debug)]
pub enum VerifyOp {
    /// Build psi into a solution target and check its diagram.
    Psi {
        #[arg(long, value_enum, default_value_t = TargetKind::Identity)]
        target: TargetKind,
        #[arg(long)]
        alpha_cap: Option<u32>,
        #[arg(long)]
        d_cap: Option<u32>,
    },
    Tau {
        #[arg(long, value_enum, default_value_t = TauKind::Colombeau)]
        instance: TauKind,
    },
    Ring {
        #[arg(long, default_value_t = 1000)]
        cases: usize,
    },
    QLaws {
        /// Add an arrow that is not an inclusion.
        #[arg(long)]
        violation: bool,
    },
}

#[derive(Subcommand, Debug)]
pub enum PlotOp {
    /// CSV `eps,x,value` of the regularization of a 1-D distribution.
    Reg {
        #[arg(allow_hyphen_values = true)]
        t: String,
        #[arg(long, value_delimiter = ',', default_values_t = [1e-2, 1e-3])]
        eps: Vec<f64>,
        #[arg(long, default_value_t = 201)]
        grid: usize,
        #[arg(long)]
        p: Option<u32>,
    },
}

fn error_kind(e: &GfError) -> &'static str {
    match e {
        GfError::GaugeMismatch(..) => "gauge_mismatch",
        GfError::NotInvertible(_) => "not_invertible",
        GfError::Undetermined(_) => "undetermined",
        GfError::Dimension { .. } => "dimension",
        GfError::DomainMismatch(_) => "domain_mismatch",
        GfError::InvalidInterval(_) => "invalid_interval",
        GfError::NotDifferentiable { .. } => "not_differentiable",
        GfError::Discontinuous(_) => "discontinuous",
        GfError::OrderNotDominated(..) => "order_not_dominated",
        GfError::BoundaryCondition(_) => "boundary_condition",
        GfError::Incompatible(_) => "incompatible",
        GfError::EmptyRefinement(_) => "empty_refinement",
        GfError::SmoothnessBudget { .. } => "smoothness_budget",
        GfError::OutsideDomain(_) => "outside_domain",
        GfError::NotModerate(_) => "not_moderate",
        GfError::Unsupported(_) => "unsupported",
        GfError::MissingPreimage(_) => "missing_preimage",
        GfError::TargetCondition(_) => "target_condition",
        GfError::Parse(_) => "parse",
    }
}

/// Malformed input is a usage error; everything else failed while computing.
fn exit_for(e: &GfError) -> u8 {
    match e {
        GfError::Parse(_) | GfError::Dimension { .. } | GfError::InvalidInterval(_) | GfError::DomainMismatch(_) => 2,
        _ => 1,
    }
}

fn report_error(kind: &str, message: &str, code: u8) -> ExitCode {
    eprintln!("{}", json!({ "error": { "kind": kind, "message": message } }));
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => return report_error("usage", e.to_string().trim(), 2),
    };
    let ws_path = cli.opts.workspace.clone();
    let mut ws = match ws_path.as_deref().map(Workspace::load).transpose() {
        Ok(w) => w.unwrap_or_default(),
        Err(e) => return report_error(error_kind(&e), &e.to_string(), exit_for(&e)),
    };
    let result = Ctx::new(&cli.opts, &ws).and_then(|ctx| ctx.run(&cli.verb));
    let out = match result {
        Ok(o) => o,
        Err(e) => return report_error(error_kind(&e), &e.to_string(), exit_for(&e)),
    };
    if let (Some(name), Some(path)) = (&cli.opts.bind, &ws_path) {
        let Some(v) = out.value.clone() else {
            return report_error("usage", "this command has no result to bind", 2);
        };
        if let Err(e) = ws.bind(name, v).and_then(|_| ws.save(path)) {
            return report_error(error_kind(&e), &e.to_string(), exit_for(&e));
        }
    }
    if cli.opts.json {
        println!("{}", out.doc);
    } else {
        print!("{}", out.text);
        if !out.text.ends_with('\n') {
            println!();
        }
    }
    ExitCode::from(out.code)
}
