//! Command-line front end: JSON problem documents in, reports out.
//!
//! Every subcommand reads either inline flags or a problem document of the
//! form `{"version": "1", "task": "<domain>.<action>", "inputs": {...}}`,
//! validates the payload, runs the library operation, and emits the report
//! as text, JSON or CSV. Output is byte-deterministic for fixed inputs and
//! seed. Exit codes: 0 success, 1 validation error, 2 numerical failure,
//! 3 I/O error.

use clap::{Args, Parser, Subcommand, ValueEnum};
use num::rational::BigRational;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::fmt::Display;
use std::path::PathBuf;
use std::str::FromStr;

use crate::algebra::StarAlgebra;
use crate::bounds::{
    self, build_oscillator, ObjectiveKind, OptimizerConfig,
};
use crate::error::{Error, Result};
use crate::gns;
use crate::lambda;
use crate::matrix::{C64, CVector, ComplexMatrix};
use crate::sectors;
use crate::states::{self, State};
use crate::weyl;
use crate::DEFAULT_TOL;

pub const EXIT_OK: u8 = 0;
pub const EXIT_VALIDATION: u8 = 1;
pub const EXIT_NUMERICAL: u8 = 2;
pub const EXIT_IO: u8 = 3;

#[derive(Parser)]
#[command(
    name = "opalg",
    about = "Finite-dimensional operator-algebra workbench",
    version
)]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the report to a file instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Domain,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
#[allow(missing_docs)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Domain {
    /// Star-algebras: generation, norm laws, commutants.
    Algebra {
        #[command(subcommand)]
        action: AlgebraCmd,
    },
    /// States: expectations, deviations, measurements, separation.
    State {
        #[command(subcommand)]
        action: StateCmd,
    },
    /// Cyclic representations and faithful direct sums.
    Gns {
        #[command(subcommand)]
        action: GnsCmd,
    },
    /// Superselection blocks, charges and phase sweeps.
    Sectors {
        #[command(subcommand)]
        action: SectorsCmd,
    },
    /// Deviation bounds and complementarity optimization.
    Bounds {
        #[command(subcommand)]
        action: BoundsCmd,
    },
    /// Exact normal-ordered symbolic algebra.
    Lambda {
        #[command(subcommand)]
        action: LambdaCmd,
    },
    /// Discrete Weyl systems and intertwiners.
    Weyl {
        #[command(subcommand)]
        action: WeylCmd,
    },
}

#[derive(Args)]
struct FileArg {
    /// Problem document (JSON).
    #[arg(long)]
    file: PathBuf,
}

#[derive(Subcommand)]
enum AlgebraCmd {
    /// Generate the smallest unital *-closed algebra containing the inputs.
    Generate {
        #[command(flatten)]
        file: FileArg,
        /// Gram-Schmidt discard tolerance.
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Sample the norm laws and report worst-case residuals.
    Verify {
        #[command(flatten)]
        file: FileArg,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long)]
        seed: u64,
        /// Residuals above this value exit with the numerical-failure code.
        #[arg(long, default_value_t = 1e-9)]
        threshold: f64,
    },
    /// Compute the commutant algebra.
    Commutant {
        #[command(flatten)]
        file: FileArg,
    },
}

#[derive(Subcommand)]
enum StateCmd {
    /// Expectation of an observable in a state.
    Expect {
        #[command(flatten)]
        file: FileArg,
    },
    /// Standard deviation of a hermitian observable.
    Deviate {
        #[command(flatten)]
        file: FileArg,
    },
    /// Simulate repeated measurements with Born probabilities.
    Measure {
        #[command(flatten)]
        file: FileArg,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Check whether a state family separates an algebra.
    Separates {
        #[command(flatten)]
        file: FileArg,
    },
}

#[derive(Subcommand)]
enum GnsCmd {
    /// Build the cyclic representation of (algebra, state).
    Build {
        #[command(flatten)]
        file: FileArg,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Build the block-diagonal direct sum over a state family.
    DirectSum {
        #[command(flatten)]
        file: FileArg,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Verify the defining properties of a stored representation.
    Verify {
        #[command(flatten)]
        file: FileArg,
        #[arg(long, default_value_t = 1e-8)]
        threshold: f64,
    },
}

#[derive(Subcommand)]
enum SectorsCmd {
    /// Block-diagonalize the ambient space under the algebra.
    Decompose {
        #[command(flatten)]
        file: FileArg,
        #[arg(long, value_enum, default_value_t = KindArg::Irreducible)]
        kind: KindArg,
        #[arg(long)]
        seed: u64,
    },
    /// Sweep relative phases across two blocks and report variation.
    PhaseCheck {
        #[command(flatten)]
        file: FileArg,
    },
    /// Test whether a charge commutes with the whole algebra.
    ChargeCheck {
        #[command(flatten)]
        file: FileArg,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Isotypic,
    Irreducible,
}

impl From<KindArg> for sectors::DecompositionKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Isotypic => sectors::DecompositionKind::Isotypic,
            KindArg::Irreducible => sectors::DecompositionKind::Irreducible,
        }
    }
}

#[derive(Args)]
struct OptimizerArgs {
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 32)]
    starts: usize,
    #[arg(long, default_value_t = 10_000)]
    max_iters: usize,
}

impl OptimizerArgs {
    fn config(&self, record_trace: bool) -> OptimizerConfig {
        OptimizerConfig {
            starts: self.starts,
            max_iters: self.max_iters,
            seed: self.seed,
            record_trace,
            ..OptimizerConfig::default()
        }
    }
}

#[derive(Subcommand)]
enum BoundsCmd {
    /// Robertson lower bound |<[a,b]>|/2 in a given state.
    Robertson {
        #[command(flatten)]
        file: FileArg,
    },
    /// Minimize a deviation functional over pure states.
    Minimize {
        #[command(flatten)]
        file: FileArg,
        #[arg(long)]
        kind: String,
        #[command(flatten)]
        optimizer: OptimizerArgs,
    },
    /// Certify complementarity of a pair of observables.
    Certify {
        #[command(flatten)]
        file: FileArg,
        #[command(flatten)]
        optimizer: OptimizerArgs,
        /// Override the certification threshold.
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Minimize the variance sum of recentered cosines on a truncated
    /// oscillator.
    WeylCosine {
        #[arg(long, default_value_t = 40)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        #[arg(long, default_value_t = 1.0)]
        hbar: f64,
        #[command(flatten)]
        optimizer: OptimizerArgs,
    },
    /// Show the uncertainty-product collapse for a bounded pair.
    Collapse {
        #[command(flatten)]
        file: FileArg,
        #[command(flatten)]
        optimizer: OptimizerArgs,
    },
}

#[derive(Subcommand)]
enum LambdaCmd {
    /// Parse an expression and print its normal form.
    Parse {
        #[arg(long)]
        expr: String,
        #[arg(long, default_value_t = 1)]
        coords: usize,
    },
    /// Run the exact identity battery on seeded random elements.
    Check {
        #[arg(long, default_value_t = 4)]
        degree: u32,
        #[arg(long, default_value_t = 200)]
        pairs: usize,
        #[arg(long, default_value_t = 3)]
        coords: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Drop the central element and print the phase-space polynomial.
    Classical {
        #[arg(long)]
        expr: String,
        #[arg(long, default_value_t = 1)]
        coords: usize,
    },
    /// Act on a test polynomial as a differential operator.
    Quantum {
        #[arg(long)]
        expr: String,
        /// Exact rational value of hbar, e.g. `1` or `1/2`.
        #[arg(long, default_value = "1")]
        hbar: String,
        /// Test polynomial in x, e.g. `1+x+x^2`.
        #[arg(long, default_value = "1+x+x^2")]
        psi: String,
    },
}

#[derive(Subcommand)]
enum WeylCmd {
    /// Build the clock-and-shift system for a modulus.
    Build {
        #[arg(long)]
        n: usize,
    },
    /// Conjugate by a seeded random unitary and recover it as the
    /// intertwiner.
    Intertwine {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Verify the defining relations of a system.
    Verify {
        /// Problem document with a stored system; omit to use the
        /// clock-and-shift system of modulus `--n`.
        #[arg(long)]
        file: Option<PathBuf>,
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, default_value_t = 1e-8)]
        threshold: f64,
    },
}

/// Rendered command result: human text, JSON value, optional CSV.
pub struct CommandOutput {
    pub text: String,
    pub json: serde_json::Value,
    pub csv: Option<String>,
    /// set when the command ran but a residual exceeded its threshold
    pub numerical_failure: bool,
}

impl CommandOutput {
    fn new<T: Serialize + Display>(value: &T) -> Result<Self> {
        Ok(Self {
            text: format!("{value}"),
            json: serde_json::to_value(value)?,
            csv: None,
            numerical_failure: false,
        })
    }

    fn with_csv(mut self, csv: String) -> Self {
        self.csv = Some(csv);
        self
    }

    fn with_failure(mut self, failed: bool) -> Self {
        self.numerical_failure = failed;
        self
    }
}

/// Renders a command result in the requested format.
pub fn emit_report(out: &CommandOutput, format: Format) -> Result<String> {
    match format {
        Format::Text => Ok(out.text.clone()),
        Format::Json => Ok(serde_json::to_string_pretty(&out.json)?),
        Format::Csv => out
            .csv
            .clone()
            .ok_or_else(|| Error::InvalidArgument("this report has no CSV form".into())),
    }
}

/// A validated problem document.
#[derive(Serialize, Deserialize)]
pub struct ProblemDocument<T> {
    pub version: String,
    pub task: String,
    pub inputs: T,
}

fn load_document<T: DeserializeOwned>(path: &PathBuf, task: &str) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    let doc: ProblemDocument<serde_json::Value> = serde_json::from_str(&text)?;
    if doc.version != "1" {
        return Err(Error::InvalidArgument(format!(
            "unsupported document version `{}`",
            doc.version
        )));
    }
    if doc.task != task {
        return Err(Error::InvalidArgument(format!(
            "document task `{}` does not match subcommand `{}`",
            doc.task, task
        )));
    }
    serde_json::from_value(doc.inputs).map_err(Error::Json)
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Io(_) => EXIT_IO,
        Error::Numerical(_) | Error::IntertwinerDimension { .. } => EXIT_NUMERICAL,
        _ => EXIT_VALIDATION,
    }
}

/// Entry point: parses the argument list, dispatches, prints, and returns
/// the process exit code.
pub fn run<I: IntoIterator<Item = String>>(argv: I) -> u8 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli.command) {
        Ok(out) => {
            let rendered = match emit_report(&out, cli.format) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("error: {e}");
                    return exit_code_for(&e);
                }
            };
            match &cli.output {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, rendered.as_bytes()) {
                        eprintln!("error: {e}");
                        return EXIT_IO;
                    }
                }
                None => println!("{rendered}"),
            }
            if out.numerical_failure {
                EXIT_NUMERICAL
            } else {
                EXIT_OK
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

fn dispatch(cmd: &Domain) -> Result<CommandOutput> {
    match cmd {
        Domain::Algebra { action } => run_algebra(action),
        Domain::State { action } => run_state(action),
        Domain::Gns { action } => run_gns(action),
        Domain::Sectors { action } => run_sectors(action),
        Domain::Bounds { action } => run_bounds(action),
        Domain::Lambda { action } => run_lambda(action),
        Domain::Weyl { action } => run_weyl(action),
    }
}

#[derive(Deserialize)]
struct GenerateInputs {
    ambient_dim: usize,
    generators: Vec<ComplexMatrix>,
}

#[derive(Deserialize)]
struct AlgebraInputs {
    algebra: StarAlgebra,
}

#[derive(Serialize)]
struct AlgebraSummary {
    ambient_dim: usize,
    dim: usize,
    algebra: StarAlgebra,
}

impl Display for AlgebraSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "algebra of dimension {} inside {}x{} matrices",
            self.dim, self.ambient_dim, self.ambient_dim
        )
    }
}

fn run_algebra(action: &AlgebraCmd) -> Result<CommandOutput> {
    match action {
        AlgebraCmd::Generate { file, tol } => {
            let inputs: GenerateInputs = load_document(&file.file, "algebra.generate")?;
            let alg = StarAlgebra::generate(inputs.ambient_dim, &inputs.generators, *tol)?;
            CommandOutput::new(&AlgebraSummary {
                ambient_dim: alg.ambient_dim(),
                dim: alg.dim(),
                algebra: alg,
            })
        }
        AlgebraCmd::Verify {
            file,
            samples,
            seed,
            threshold,
        } => {
            let inputs: AlgebraInputs = load_document(&file.file, "algebra.verify")?;
            inputs.algebra.validate()?;
            let report = inputs.algebra.verify_cstar_laws(*samples, *seed);
            let failed = report.max_residual() > *threshold;
            Ok(CommandOutput::new(&report)?.with_failure(failed))
        }
        AlgebraCmd::Commutant { file } => {
            let inputs: AlgebraInputs = load_document(&file.file, "algebra.commutant")?;
            inputs.algebra.validate()?;
            let c = inputs.algebra.commutant();
            CommandOutput::new(&AlgebraSummary {
                ambient_dim: c.ambient_dim(),
                dim: c.dim(),
                algebra: c,
            })
        }
    }
}

#[derive(Deserialize)]
struct StateObservableInputs {
    state: State,
    observable: ComplexMatrix,
}

#[derive(Deserialize)]
struct SeparatesInputs {
    states: Vec<State>,
    algebra: StarAlgebra,
}

#[derive(Serialize)]
struct ScalarReport {
    value_re: f64,
    value_im: f64,
}

impl Display for ScalarReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.value_im.abs() < 1e-14 {
            write!(f, "{}", self.value_re)
        } else {
            write!(f, "{} + {}i", self.value_re, self.value_im)
        }
    }
}

#[derive(Serialize)]
struct RealReport {
    value: f64,
}

impl Display for RealReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.value)
    }
}

#[derive(Serialize)]
struct SeparatesReport {
    separating: bool,
    states: usize,
    algebra_dim: usize,
}

impl Display for SeparatesReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} states on a {}-dimensional algebra: separating = {}",
            self.states, self.algebra_dim, self.separating
        )
    }
}

fn run_state(action: &StateCmd) -> Result<CommandOutput> {
    match action {
        StateCmd::Expect { file } => {
            let inputs: StateObservableInputs = load_document(&file.file, "state.expect")?;
            inputs.state.validate()?;
            let value = states::expectation(&inputs.state, &inputs.observable)?;
            CommandOutput::new(&ScalarReport {
                value_re: value.re,
                value_im: value.im,
            })
        }
        StateCmd::Deviate { file } => {
            let inputs: StateObservableInputs = load_document(&file.file, "state.deviate")?;
            inputs.state.validate()?;
            let value = states::deviation(&inputs.state, &inputs.observable)?;
            CommandOutput::new(&RealReport { value })
        }
        StateCmd::Measure {
            file,
            samples,
            seed,
        } => {
            let inputs: StateObservableInputs = load_document(&file.file, "state.measure")?;
            inputs.state.validate()?;
            let record =
                states::simulate_measurements(&inputs.state, &inputs.observable, *samples, *seed)?;
            let csv = record.to_csv();
            Ok(CommandOutput::new(&record)?.with_csv(csv))
        }
        StateCmd::Separates { file } => {
            let inputs: SeparatesInputs = load_document(&file.file, "state.separates")?;
            inputs.algebra.validate()?;
            for s in &inputs.states {
                s.validate()?;
            }
            let separating = states::separates(&inputs.states, &inputs.algebra)?;
            CommandOutput::new(&SeparatesReport {
                separating,
                states: inputs.states.len(),
                algebra_dim: inputs.algebra.dim(),
            })
        }
    }
}

#[derive(Deserialize)]
struct GnsBuildInputs {
    algebra: StarAlgebra,
    state: State,
}

#[derive(Deserialize)]
struct GnsDirectSumInputs {
    algebra: StarAlgebra,
    states: Vec<State>,
}

#[derive(Deserialize)]
struct GnsVerifyInputs {
    triple: gns::GnsTriple,
    algebra: StarAlgebra,
    state: Option<State>,
}

#[derive(Serialize)]
struct GnsBuildReport {
    space_dim: usize,
    structure_residual: f64,
    triple: gns::GnsTriple,
}

impl Display for GnsBuildReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "cyclic representation on a {}-dimensional space (structure floor {:.3e})",
            self.space_dim, self.structure_residual
        )
    }
}

#[derive(Serialize)]
struct DirectSumReport {
    space_dim: usize,
    summands: Vec<(usize, usize)>,
    separating: bool,
    norm_preservation_defect: f64,
    faithful: bool,
}

impl Display for DirectSumReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "direct sum on {} dimensions over {} summands: separating = {}, norm defect {:.3e}, faithful = {}",
            self.space_dim,
            self.summands.len(),
            self.separating,
            self.norm_preservation_defect,
            self.faithful
        )
    }
}

fn run_gns(action: &GnsCmd) -> Result<CommandOutput> {
    match action {
        GnsCmd::Build { file, tol } => {
            let inputs: GnsBuildInputs = load_document(&file.file, "gns.build")?;
            inputs.algebra.validate()?;
            inputs.state.validate()?;
            let triple = gns::gns_construct(&inputs.algebra, &inputs.state, *tol)?;
            CommandOutput::new(&GnsBuildReport {
                space_dim: triple.space_dim,
                structure_residual: triple.structure_residual,
                triple,
            })
        }
        GnsCmd::DirectSum { file, tol } => {
            let inputs: GnsDirectSumInputs = load_document(&file.file, "gns.direct_sum")?;
            inputs.algebra.validate()?;
            for s in &inputs.states {
                s.validate()?;
            }
            let ds = gns::gns_direct_sum(&inputs.algebra, &inputs.states, *tol)?;
            let defect = ds.norm_preservation_defect(&inputs.algebra)?;
            CommandOutput::new(&DirectSumReport {
                space_dim: ds.space_dim,
                summands: ds.summands.clone(),
                separating: ds.separating,
                norm_preservation_defect: defect,
                faithful: defect <= 1e-7,
            })
        }
        GnsCmd::Verify { file, threshold } => {
            let inputs: GnsVerifyInputs = load_document(&file.file, "gns.verify")?;
            inputs.algebra.validate()?;
            let report =
                gns::verify_representation(&inputs.triple, &inputs.algebra, inputs.state.as_ref())?;
            let failed = report.max_residual() > *threshold || !report.cyclic();
            Ok(CommandOutput::new(&report)?.with_failure(failed))
        }
    }
}

#[derive(Deserialize)]
struct SectorsDecomposeInputs {
    algebra: StarAlgebra,
}

#[derive(Deserialize)]
struct PhaseCheckInputs {
    algebra: StarAlgebra,
    decomposition: sectors::SectorDecomposition,
    block1: usize,
    #[serde(with = "crate::matrix::serde_cvector")]
    psi1: CVector,
    block2: usize,
    #[serde(with = "crate::matrix::serde_cvector")]
    psi2: CVector,
    c1: [f64; 2],
    c2: [f64; 2],
    phases: Vec<f64>,
}

#[derive(Deserialize)]
struct ChargeCheckInputs {
    charge: ComplexMatrix,
    algebra: StarAlgebra,
}

#[derive(Serialize)]
struct DecomposeReport {
    blocks: Vec<(usize, usize)>,
    off_block_residual: f64,
    decomposition: sectors::SectorDecomposition,
}

impl Display for DecomposeReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} blocks {:?} (off-block residual {:.3e})",
            self.blocks.len(),
            self.blocks,
            self.off_block_residual
        )
    }
}

#[derive(Serialize)]
struct ChargeReport {
    superselected: bool,
}

impl Display for ChargeReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "superselected = {}", self.superselected)
    }
}

fn run_sectors(action: &SectorsCmd) -> Result<CommandOutput> {
    match action {
        SectorsCmd::Decompose { file, kind, seed } => {
            let inputs: SectorsDecomposeInputs = load_document(&file.file, "sectors.decompose")?;
            inputs.algebra.validate()?;
            let dec = sectors::decompose(&inputs.algebra, (*kind).into(), *seed)?;
            CommandOutput::new(&DecomposeReport {
                blocks: dec.blocks.clone(),
                off_block_residual: dec.off_block_residual(&inputs.algebra),
                decomposition: dec,
            })
        }
        SectorsCmd::PhaseCheck { file } => {
            let inputs: PhaseCheckInputs = load_document(&file.file, "sectors.phase_check")?;
            inputs.algebra.validate()?;
            inputs.decomposition.validate(&inputs.algebra)?;
            let report = sectors::phase_observability(
                &inputs.algebra,
                &inputs.decomposition,
                inputs.block1,
                &inputs.psi1,
                inputs.block2,
                &inputs.psi2,
                C64::new(inputs.c1[0], inputs.c1[1]),
                C64::new(inputs.c2[0], inputs.c2[1]),
                &inputs.phases,
            )?;
            CommandOutput::new(&report)
        }
        SectorsCmd::ChargeCheck { file } => {
            let inputs: ChargeCheckInputs = load_document(&file.file, "sectors.charge_check")?;
            inputs.algebra.validate()?;
            let superselected = sectors::is_superselected(&inputs.charge, &inputs.algebra)?;
            CommandOutput::new(&ChargeReport { superselected })
        }
    }
}

#[derive(Deserialize)]
struct RobertsonInputs {
    state: State,
    a: ComplexMatrix,
    b: ComplexMatrix,
}

#[derive(Deserialize)]
struct PairInputs {
    a: ComplexMatrix,
    b: Option<ComplexMatrix>,
}

#[derive(Serialize)]
struct RobertsonReport {
    bound: f64,
    deviation_product: f64,
}

impl Display for RobertsonReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "|<[a,b]>|/2 = {} <= D(a) D(b) = {}",
            self.bound, self.deviation_product
        )
    }
}

fn run_bounds(action: &BoundsCmd) -> Result<CommandOutput> {
    match action {
        BoundsCmd::Robertson { file } => {
            let inputs: RobertsonInputs = load_document(&file.file, "bounds.robertson")?;
            inputs.state.validate()?;
            let bound = bounds::robertson_bound(&inputs.state, &inputs.a, &inputs.b)?;
            let da = states::deviation(&inputs.state, &inputs.a)?;
            let db = states::deviation(&inputs.state, &inputs.b)?;
            CommandOutput::new(&RobertsonReport {
                bound,
                deviation_product: da * db,
            })
        }
        BoundsCmd::Minimize {
            file,
            kind,
            optimizer,
        } => {
            let inputs: PairInputs = load_document(&file.file, "bounds.minimize")?;
            let kind = ObjectiveKind::from_str(kind)?;
            let cfg = optimizer.config(true);
            let report =
                bounds::minimize_deviation_functional(&inputs.a, inputs.b.as_ref(), kind, &cfg)?;
            let csv = report.trace_csv();
            Ok(CommandOutput::new(&report)?.with_csv(csv))
        }
        BoundsCmd::Certify {
            file,
            optimizer,
            threshold,
        } => {
            let inputs: PairInputs = load_document(&file.file, "bounds.certify")?;
            let b = inputs.b.as_ref().ok_or_else(|| {
                Error::InvalidArgument("certification needs two observables".into())
            })?;
            let cfg = optimizer.config(true);
            let cert = bounds::certify_complementarity(&inputs.a, b, &cfg, *threshold)?;
            let csv = cert.report.trace_csv();
            Ok(CommandOutput::new(&cert)?.with_csv(csv))
        }
        BoundsCmd::WeylCosine {
            n,
            scale,
            hbar,
            optimizer,
        } => {
            let model = build_oscillator(*n, *scale, *hbar)?;
            let cfg = optimizer.config(true);
            let report = bounds::weyl_cosine_experiment(&model, &cfg)?;
            let csv = report.report.trace_csv();
            Ok(CommandOutput::new(&report)?.with_csv(csv))
        }
        BoundsCmd::Collapse { file, optimizer } => {
            let inputs: PairInputs = load_document(&file.file, "bounds.collapse")?;
            let b = inputs.b.as_ref().ok_or_else(|| {
                Error::InvalidArgument("the collapse report needs two observables".into())
            })?;
            let cfg = optimizer.config(false);
            let report = bounds::bounded_product_collapse(&inputs.a, b, &cfg)?;
            let failed = !report.holds;
            Ok(CommandOutput::new(&report)?.with_failure(failed))
        }
    }
}

#[derive(Serialize)]
struct ParseReport {
    canonical: String,
    terms: usize,
    degree: Option<u32>,
}

impl Display for ParseReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.canonical)
    }
}

#[derive(Serialize)]
struct IdentityBattery {
    seed: u64,
    degree: u32,
    coords: usize,
    checks: Vec<(String, usize, usize)>,
}

impl IdentityBattery {
    fn all_pass(&self) -> bool {
        self.checks.iter().all(|(_, ok, total)| ok == total)
    }
}

impl Display for IdentityBattery {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (name, ok, total) in &self.checks {
            writeln!(
                f,
                "{name}: {ok}/{total} {}",
                if ok == total { "pass" } else { "FAIL" }
            )?;
        }
        write!(
            f,
            "battery (seed {}, degree <= {}, coords <= {}): {}",
            self.seed,
            self.degree,
            self.coords,
            if self.all_pass() { "pass" } else { "FAIL" }
        )
    }
}

fn run_lambda(action: &LambdaCmd) -> Result<CommandOutput> {
    match action {
        LambdaCmd::Parse { expr, coords } => {
            let e = lambda::parse(expr, *coords)?;
            CommandOutput::new(&ParseReport {
                canonical: format!("{e}"),
                terms: e.term_count(),
                degree: e.degree(),
            })
        }
        LambdaCmd::Check {
            degree,
            pairs,
            coords,
            seed,
        } => {
            let battery = run_identity_battery(*degree, *pairs, *coords, *seed)?;
            let failed = !battery.all_pass();
            Ok(CommandOutput::new(&battery)?.with_failure(failed))
        }
        LambdaCmd::Classical { expr, coords } => {
            let e = lambda::parse(expr, *coords)?;
            let c = lambda::specialize_classical(&e);
            CommandOutput::new(&ParseReport {
                canonical: format!("{c}"),
                terms: c.term_count(),
                degree: None,
            })
        }
        LambdaCmd::Quantum { expr, hbar, psi } => {
            let e = lambda::parse(expr, 1)?;
            let hbar = BigRational::from_str(hbar)
                .map_err(|err| Error::InvalidArgument(format!("bad hbar `{hbar}`: {err}")))?;
            let psi = lambda::parse_x_polynomial(psi)?;
            let result = lambda::specialize_quantum(&e, &hbar, &psi)?;
            CommandOutput::new(&ParseReport {
                canonical: format!("{result}"),
                terms: 0,
                degree: None,
            })
        }
    }
}

fn run_identity_battery(degree: u32, pairs: usize, coords: usize, seed: u64) -> Result<IdentityBattery> {
    use rand::Rng;
    let mut rng = crate::rng::seeded(seed);
    let draw = |rng: &mut rand_chacha::ChaCha8Rng, deg: u32| {
        let s = rng.gen_range(1..=coords.max(1));
        let e = lambda::random_element(rng, s, deg, 3);
        (s, e)
    };

    let mut z_identity = 0;
    for _ in 0..pairs {
        let (s, a) = draw(&mut rng, degree);
        let b = lambda::random_element(&mut rng, s, degree, 3);
        if lambda::theorem_check(&a, &b)? {
            z_identity += 1;
        }
    }

    let quads = pairs / 2;
    let mut dirac = 0;
    for _ in 0..quads {
        let (s, a) = draw(&mut rng, degree.min(3));
        let b = lambda::random_element(&mut rng, s, degree.min(3), 3);
        let c = lambda::random_element(&mut rng, s, degree.min(3), 3);
        let d = lambda::random_element(&mut rng, s, degree.min(3), 3);
        if lambda::dirac_identity_check(&a, &b, &c, &d)? {
            dirac += 1;
        }
    }

    let mut jacobi = 0;
    for _ in 0..quads {
        let (s, a) = draw(&mut rng, degree.min(3));
        let b = lambda::random_element(&mut rng, s, degree.min(3), 3);
        let c = lambda::random_element(&mut rng, s, degree.min(3), 3);
        if lambda::jacobi_check(&a, &b, &c)? {
            jacobi += 1;
        }
    }

    let mut leibniz = 0;
    for _ in 0..quads {
        let (s, a) = draw(&mut rng, degree.min(3));
        let b = lambda::random_element(&mut rng, s, degree.min(3), 3);
        let c = lambda::random_element(&mut rng, s, degree.min(3), 3);
        if lambda::leibniz_right_check(&a, &b, &c)? && lambda::leibniz_left_check(&a, &b, &c)? {
            leibniz += 1;
        }
    }

    let mut involution = 0;
    for _ in 0..quads {
        let (s, a) = draw(&mut rng, degree.min(3));
        let b = lambda::random_element(&mut rng, s, degree.min(3), 3);
        if lambda::involution_check(&a, &b)? {
            involution += 1;
        }
    }

    Ok(IdentityBattery {
        seed,
        degree,
        coords,
        checks: vec![
            ("z_identity".into(), z_identity, pairs),
            ("dirac_identity".into(), dirac, quads),
            ("jacobi_identity".into(), jacobi, quads),
            ("leibniz_rule".into(), leibniz, quads),
            ("involution".into(), involution, quads),
        ],
    })
}

#[derive(Serialize)]
struct WeylBuildReport {
    modulus: usize,
    system: weyl::DiscreteWeylSystem,
}

impl Display for WeylBuildReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "clock-and-shift system of modulus {}", self.modulus)
    }
}

#[derive(Serialize)]
struct IntertwineReport {
    modulus: usize,
    seed: u64,
    kernel_dimension: usize,
    second_singular_value: f64,
    residual_u: f64,
    residual_v: f64,
    recovery_distance: f64,
    intertwiner: ComplexMatrix,
}

impl Display for IntertwineReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(
            f,
            "modulus {} (seed {}): kernel dimension {}, second singular value {:.3e}",
            self.modulus, self.seed, self.kernel_dimension, self.second_singular_value
        )?;
        writeln!(
            f,
            "residuals: U {:.3e}, V {:.3e}; distance to conjugator {:.3e}",
            self.residual_u, self.residual_v, self.recovery_distance
        )?;
        write!(f, "phase-fixed intertwiner:\n{}", self.intertwiner)
    }
}

fn run_weyl(action: &WeylCmd) -> Result<CommandOutput> {
    match action {
        WeylCmd::Build { n } => {
            let sys = weyl::schrodinger_system(*n)?;
            CommandOutput::new(&WeylBuildReport {
                modulus: *n,
                system: sys,
            })
        }
        WeylCmd::Intertwine { n, seed, tol } => {
            let base = weyl::schrodinger_system(*n)?;
            let mut rng = crate::rng::seeded(*seed);
            let g = crate::rng::unitary(&mut rng, *n);
            let rotated = weyl::conjugated_system(&base, &g)?;
            let (w, sigmas) = weyl::find_intertwiner_with_spectrum(&base, &rotated, *tol)?;
            let residual_u = (&(&w * &base.u_matrix) - &(&rotated.u_matrix * &w))
                .operator_norm()?;
            let residual_v = (&(&w * &base.v_matrix) - &(&rotated.v_matrix * &w))
                .operator_norm()?;
            CommandOutput::new(&IntertwineReport {
                modulus: *n,
                seed: *seed,
                kernel_dimension: 1,
                second_singular_value: sigmas.get(1).copied().unwrap_or(f64::NAN),
                residual_u,
                residual_v,
                recovery_distance: weyl::phase_aligned_distance(&w, &g),
                intertwiner: w,
            })
        }
        WeylCmd::Verify { file, n, threshold } => {
            let sys = match file {
                Some(path) => {
                    #[derive(Deserialize)]
                    struct SystemInputs {
                        system: weyl::DiscreteWeylSystem,
                    }
                    let inputs: SystemInputs = load_document(path, "weyl.verify")?;
                    inputs.system
                }
                None => weyl::schrodinger_system(*n)?,
            };
            let report = weyl::verify_weyl_relations(&sys)?;
            let failed = report.max_residual() > *threshold;
            Ok(CommandOutput::new(&report)?.with_failure(failed))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> u8 {
        run(args.iter().map(|s| s.to_string()))
    }

    #[test]
    fn help_exits_cleanly() {
        assert_eq!(run_args(&["opalg", "--help"]), EXIT_OK);
    }

    #[test]
    fn unknown_subcommand_is_a_validation_error() {
        assert_eq!(run_args(&["opalg", "frobnicate"]), EXIT_VALIDATION);
    }

    #[test]
    fn missing_file_is_an_io_error() {
        assert_eq!(
            run_args(&["opalg", "gns", "build", "--file", "/nonexistent/missing.json"]),
            EXIT_IO
        );
    }

    #[test]
    fn missing_seed_is_a_validation_error() {
        assert_eq!(run_args(&["opalg", "weyl", "intertwine", "--n", "4"]), EXIT_VALIDATION);
    }

    #[test]
    fn lambda_parse_runs() {
        assert_eq!(
            run_args(&["opalg", "lambda", "parse", "--expr", "[q1, p1]"]),
            EXIT_OK
        );
    }

    #[test]
    fn identity_battery_passes() {
        let battery = run_identity_battery(3, 10, 2, 1).unwrap();
        assert!(battery.all_pass(), "{battery}");
    }
}
