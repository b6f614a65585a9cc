//! Deviation-functional optimization over pure states: Robertson bounds,
//! complementarity certification, common sharp states for commuting pairs,
//! and the bounded-cosine experiment on a truncated oscillator.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};
use crate::matrix::{serde_cvector, C64, CVector, ComplexMatrix};
use crate::optimize::{
    grid_refine_infimum, minimize_on_sphere, MultistartOutcome, SphereObjective, TraceRow,
};
pub use crate::optimize::OptimizerConfig;
use crate::rng;
use crate::states::{expectation, State};
use crate::DEFAULT_TOL;

/// Guard for gradients of square roots near zero variance.
const SQRT_GUARD: f64 = 1e-12;

/// Largest dimension on which the derivative-free oracle cross-check runs
/// automatically.
const ORACLE_MAX_DIM: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveKind {
    /// `D(a) + D(b)` (the complementarity functional).
    Sum,
    /// `D(a)^2 + D(b)^2`.
    SumOfSquares,
    /// `D(a) * D(b)` (the uncertainty product).
    Product,
    /// `D(a)` alone.
    Single,
}

impl fmt::Display for ObjectiveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ObjectiveKind::Sum => "sum",
            ObjectiveKind::SumOfSquares => "sum_of_squares",
            ObjectiveKind::Product => "product",
            ObjectiveKind::Single => "single",
        };
        write!(f, "{s}")
    }
}

impl std::str::FromStr for ObjectiveKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sum" => Ok(ObjectiveKind::Sum),
            "sum_of_squares" => Ok(ObjectiveKind::SumOfSquares),
            "product" => Ok(ObjectiveKind::Product),
            "single" => Ok(ObjectiveKind::Single),
            other => Err(Error::InvalidArgument(format!("unknown objective kind `{other}`"))),
        }
    }
}

/// Outcome of a multistart infimum search over pure states.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundReport {
    pub objective_kind: ObjectiveKind,
    pub infimum_estimate: f64,
    #[serde(with = "serde_cvector")]
    pub argmin_state: CVector,
    pub starts: usize,
    pub converged_starts: usize,
    pub iterations_total: usize,
    pub seed: u64,
    pub generator: String,
    /// Gap against the derivative-free oracle, when it ran (dim <= 4).
    pub grid_gap: Option<f64>,
    pub trace: Vec<TraceRow>,
}

impl BoundReport {
    /// Optimization trace as `start,iteration,objective` CSV.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("start,iteration,objective\n");
        for row in &self.trace {
            out.push_str(&format!("{},{},{}\n", row.start, row.iteration, row.objective));
        }
        out
    }
}

impl fmt::Display for BoundReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "objective {}: infimum estimate {:.12}",
            self.objective_kind, self.infimum_estimate
        )?;
        writeln!(
            f,
            "  {} starts ({} converged), {} iterations, seed {} ({})",
            self.starts, self.converged_starts, self.iterations_total, self.seed, self.generator
        )?;
        match self.grid_gap {
            Some(gap) => write!(f, "  grid oracle gap {gap:.3e}"),
            None => write!(f, "  grid oracle not run (dimension > {ORACLE_MAX_DIM})"),
        }
    }
}

/// Variance-based objective; for `product` and `single` the optimizer works
/// on the smooth variance surrogate and the stated value takes square roots
/// at the end (monotone transforms preserve minimizers).
struct DeviationObjective {
    kind: ObjectiveKind,
    a: DMatrix<C64>,
    a2: DMatrix<C64>,
    b: Option<(DMatrix<C64>, DMatrix<C64>)>,
}

impl DeviationObjective {
    fn new(kind: ObjectiveKind, a: &ComplexMatrix, b: Option<&ComplexMatrix>) -> Result<Self> {
        a.require_hermitian(DEFAULT_TOL)?;
        if let Some(b) = b {
            b.require_hermitian(DEFAULT_TOL)?;
            if b.rows() != a.rows() {
                return Err(Error::DimensionMismatch(format!(
                    "observable dimensions {} vs {}",
                    a.rows(),
                    b.rows()
                )));
            }
        }
        match (kind, b) {
            (ObjectiveKind::Single, Some(_)) => {
                return Err(Error::InvalidArgument(
                    "kind `single` takes exactly one observable".into(),
                ))
            }
            (ObjectiveKind::Single, None) => {}
            (_, None) => {
                return Err(Error::InvalidArgument(format!(
                    "kind `{kind}` needs two observables"
                )))
            }
            _ => {}
        }
        let ad = a.as_dmatrix().clone();
        Ok(Self {
            kind,
            a2: &ad * &ad,
            a: ad,
            b: b.map(|b| {
                let bd = b.as_dmatrix().clone();
                (bd.clone(), &bd * &bd)
            }),
        })
    }

    fn variance(m: &DMatrix<C64>, m2: &DMatrix<C64>, psi: &CVector) -> (f64, f64) {
        let mean = psi.dotc(&(m * psi)).re;
        let second = psi.dotc(&(m2 * psi)).re;
        ((second - mean * mean).max(0.0), mean)
    }

    fn variance_gradient(m: &DMatrix<C64>, m2: &DMatrix<C64>, psi: &CVector, mean: f64) -> CVector {
        m2 * psi - (m * psi) * C64::new(2.0 * mean, 0.0)
    }

    /// The value reported to users (deviations, not variances).
    fn stated_value(&self, psi: &CVector) -> f64 {
        let (va, _) = Self::variance(&self.a, &self.a2, psi);
        match (&self.kind, &self.b) {
            (ObjectiveKind::Single, _) => va.sqrt(),
            (ObjectiveKind::Sum, Some((b, b2))) => {
                va.sqrt() + Self::variance(b, b2, psi).0.sqrt()
            }
            (ObjectiveKind::SumOfSquares, Some((b, b2))) => va + Self::variance(b, b2, psi).0,
            (ObjectiveKind::Product, Some((b, b2))) => {
                (va * Self::variance(b, b2, psi).0).sqrt()
            }
            _ => unreachable!("checked at construction"),
        }
    }

    fn stated_from_surrogate(&self, v: f64) -> f64 {
        match self.kind {
            ObjectiveKind::Single | ObjectiveKind::Product => v.max(0.0).sqrt(),
            _ => v,
        }
    }
}

impl SphereObjective for DeviationObjective {
    fn dim(&self) -> usize {
        self.a.nrows()
    }

    fn value(&self, psi: &CVector) -> f64 {
        let (va, _) = Self::variance(&self.a, &self.a2, psi);
        match (&self.kind, &self.b) {
            (ObjectiveKind::Single, _) => va,
            (ObjectiveKind::Sum, Some((b, b2))) => va.sqrt() + Self::variance(b, b2, psi).0.sqrt(),
            (ObjectiveKind::SumOfSquares, Some((b, b2))) => va + Self::variance(b, b2, psi).0,
            (ObjectiveKind::Product, Some((b, b2))) => va * Self::variance(b, b2, psi).0,
            _ => unreachable!("checked at construction"),
        }
    }

    fn gradient(&self, psi: &CVector) -> CVector {
        let (va, ma) = Self::variance(&self.a, &self.a2, psi);
        let ga = Self::variance_gradient(&self.a, &self.a2, psi, ma);
        match (&self.kind, &self.b) {
            (ObjectiveKind::Single, _) => ga,
            (ObjectiveKind::Sum, Some((b, b2))) => {
                let (vb, mb) = Self::variance(b, b2, psi);
                let gb = Self::variance_gradient(b, b2, psi, mb);
                ga * C64::new(0.5 / va.sqrt().max(SQRT_GUARD), 0.0)
                    + gb * C64::new(0.5 / vb.sqrt().max(SQRT_GUARD), 0.0)
            }
            (ObjectiveKind::SumOfSquares, Some((b, b2))) => {
                let (_, mb) = Self::variance(b, b2, psi);
                ga + Self::variance_gradient(b, b2, psi, mb)
            }
            (ObjectiveKind::Product, Some((b, b2))) => {
                let (vb, mb) = Self::variance(b, b2, psi);
                let gb = Self::variance_gradient(b, b2, psi, mb);
                ga * C64::new(vb, 0.0) + gb * C64::new(va, 0.0)
            }
            _ => unreachable!("checked at construction"),
        }
    }
}

fn report_from_outcome(
    obj: &DeviationObjective,
    outcome: MultistartOutcome,
    cfg: &OptimizerConfig,
    extra_starts: usize,
    grid_gap: Option<f64>,
) -> BoundReport {
    let infimum_estimate = obj.stated_value(&outcome.best_state);
    let trace = outcome
        .trace
        .into_iter()
        .map(|row| TraceRow {
            objective: obj.stated_from_surrogate(row.objective),
            ..row
        })
        .collect();
    BoundReport {
        objective_kind: obj.kind,
        infimum_estimate,
        argmin_state: outcome.best_state,
        starts: cfg.starts + extra_starts,
        converged_starts: outcome.converged_starts,
        iterations_total: outcome.iterations_total,
        seed: cfg.seed,
        generator: rng::GENERATOR.to_string(),
        grid_gap,
        trace,
    }
}

/// Minimizes a deviation functional over unit vectors by multistart
/// projected gradient descent. On dimensions up to four the result is
/// cross-checked against the derivative-free oracle and the gap reported.
pub fn minimize_deviation_functional(
    a: &ComplexMatrix,
    b: Option<&ComplexMatrix>,
    kind: ObjectiveKind,
    cfg: &OptimizerConfig,
) -> Result<BoundReport> {
    let obj = DeviationObjective::new(kind, a, b)?;
    let outcome = minimize_on_sphere(&obj, cfg, &[])?;
    let grid_gap = if obj.dim() <= ORACLE_MAX_DIM {
        let (grid_value, _) = grid_refine_infimum(&obj, 1500, 14, cfg.seed ^ 0x9e3779b9);
        Some(
            (obj.stated_from_surrogate(outcome.best_value)
                - obj.stated_from_surrogate(grid_value))
            .abs(),
        )
    } else {
        None
    };
    Ok(report_from_outcome(&obj, outcome, cfg, 0, grid_gap))
}

/// Robertson lower bound `|<[a,b]>| / 2`; never exceeds `D(a) D(b)` beyond
/// rounding, by positivity of the state.
pub fn robertson_bound(s: &State, a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    a.require_hermitian(DEFAULT_TOL)?;
    b.require_hermitian(DEFAULT_TOL)?;
    let comm = a.commutator(b)?;
    Ok(0.5 * expectation(s, &comm)?.norm())
}

/// Certification outcome for the complementarity functional `D(a) + D(b)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ComplementarityCertificate {
    pub complementary: bool,
    pub threshold: f64,
    pub report: BoundReport,
}

impl fmt::Display for ComplementarityCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "complementary: {} (infimum {:.9} vs threshold {:.3e})",
            self.complementary, self.report.infimum_estimate, self.threshold
        )?;
        write!(f, "{}", self.report)
    }
}

/// Declares `a, b` complementary iff the certified infimum of
/// `D(a) + D(b)` over pure states exceeds the threshold
/// (default `1e-6 (||a|| + ||b||)`).
pub fn certify_complementarity(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    cfg: &OptimizerConfig,
    threshold: Option<f64>,
) -> Result<ComplementarityCertificate> {
    let threshold = match threshold {
        Some(t) => t,
        None => 1e-6 * (a.operator_norm()? + b.operator_norm()?),
    };
    let report = minimize_deviation_functional(a, Some(b), ObjectiveKind::Sum, cfg)?;
    Ok(ComplementarityCertificate {
        complementary: report.infimum_estimate > threshold,
        threshold,
        report,
    })
}

/// Either a joint sharp state of a commuting pair, or the commutator norm
/// obstructing one.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum SharpStateOutcome {
    Found {
        #[serde(with = "serde_cvector")]
        state: CVector,
        deviation_a: f64,
        deviation_b: f64,
    },
    NonCommuting {
        commutator_norm: f64,
    },
}

impl fmt::Display for SharpStateOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SharpStateOutcome::Found {
                deviation_a,
                deviation_b,
                ..
            } => write!(
                f,
                "joint sharp state found (deviations {deviation_a:.3e}, {deviation_b:.3e})"
            ),
            SharpStateOutcome::NonCommuting { commutator_norm } => write!(
                f,
                "no joint sharp state: commutator norm {commutator_norm:.6}"
            ),
        }
    }
}

/// For a commuting hermitian pair (commutator norm below `tol`), returns a
/// simultaneous eigenvector, on which both deviations vanish. Otherwise
/// reports the commutator norm; failure is a value, not an error.
pub fn common_sharp_state(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    tol: f64,
) -> Result<SharpStateOutcome> {
    a.require_hermitian(DEFAULT_TOL)?;
    b.require_hermitian(DEFAULT_TOL)?;
    let commutator_norm = a.commutator(b)?.operator_norm()?;
    if commutator_norm >= tol {
        return Ok(SharpStateOutcome::NonCommuting { commutator_norm });
    }
    // joint diagonalization: refine eigenvectors of a inside degenerate
    // clusters by diagonalizing the compression of b
    let eig = a.hermitian_eigen()?;
    let clusters = eig.clusters(1e-10);
    let cluster = &clusters[0];
    let q = eig
        .vectors
        .as_dmatrix()
        .columns(cluster[0], cluster.len())
        .into_owned();
    let compressed = q.adjoint() * b.as_dmatrix() * &q;
    let sub = ComplexMatrix::from_dmatrix(compressed)?.hermitian_eigen()?;
    let state: CVector = &q * sub.eigenvector(0);
    let s = State::pure(&state)?;
    let deviation_a = crate::states::deviation(&s, a)?;
    let deviation_b = crate::states::deviation(&s, b)?;
    Ok(SharpStateOutcome::Found {
        state,
        deviation_a,
        deviation_b,
    })
}

/// Truncated canonical pair in the number basis:
/// `q = sqrt(hbar/2s)(ad + a)`, `p = i sqrt(hbar s/2)(ad - a)`.
/// The commutator equals `i hbar` exactly on the leading
/// `(N-1) x (N-1)` corner; the truncation defect sits in the last row and
/// column.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OscillatorModel {
    pub truncation_dim: usize,
    pub scale_s: f64,
    pub hbar: f64,
    pub q_matrix: ComplexMatrix,
    pub p_matrix: ComplexMatrix,
}

impl OscillatorModel {
    pub fn validate(&self) -> Result<()> {
        self.q_matrix.require_hermitian(DEFAULT_TOL)?;
        self.p_matrix.require_hermitian(DEFAULT_TOL)?;
        let n = self.truncation_dim;
        if self.q_matrix.rows() != n || self.p_matrix.rows() != n {
            return Err(Error::DimensionMismatch(
                "oscillator matrices do not match the truncation dimension".into(),
            ));
        }
        let comm = self.q_matrix.commutator(&self.p_matrix)?;
        let target = C64::new(0.0, self.hbar);
        let mut corner_defect: f64 = 0.0;
        for i in 0..n - 1 {
            for j in 0..n - 1 {
                let want = if i == j { target } else { C64::new(0.0, 0.0) };
                corner_defect = corner_defect.max((comm[(i, j)] - want).norm());
            }
        }
        if corner_defect > 1e-10 * self.hbar {
            return Err(Error::Numerical(format!(
                "canonical commutator defect {corner_defect:.3e} inside the truncation corner"
            )));
        }
        Ok(())
    }
}

/// Builds the truncated oscillator pair. Needs `N >= 4` so the corner
/// condition is meaningful.
pub fn build_oscillator(n: usize, scale_s: f64, hbar: f64) -> Result<OscillatorModel> {
    if n < 4 {
        return Err(Error::InvalidArgument(format!(
            "truncation dimension {n} is too small (need at least 4)"
        )));
    }
    if !scale_s.is_finite() || scale_s <= 0.0 || !hbar.is_finite() || hbar <= 0.0 {
        return Err(Error::InvalidArgument("scale and hbar must be positive".into()));
    }
    let mut lower = DMatrix::<C64>::zeros(n, n);
    for k in 1..n {
        lower[(k - 1, k)] = C64::new((k as f64).sqrt(), 0.0);
    }
    let raise = lower.adjoint();
    let q = (&raise + &lower) * C64::new((hbar / (2.0 * scale_s)).sqrt(), 0.0);
    let p = (&raise - &lower) * C64::new(0.0, (hbar * scale_s / 2.0).sqrt());
    let model = OscillatorModel {
        truncation_dim: n,
        scale_s,
        hbar,
        q_matrix: ComplexMatrix::from_dmatrix(q)?,
        p_matrix: ComplexMatrix::from_dmatrix(p)?,
    };
    model.validate()?;
    Ok(model)
}

/// `Var(cos q~) + Var(cos p~)` where `q~, p~` are recentered with the
/// candidate state's own means and rescaled to dimensionless form. The
/// cosines are evaluated by functional calculus in the fixed eigenbases of
/// `q` and `p`, so recentering only shifts eigenvalues.
pub struct CosineObjective {
    dim: usize,
    parts: [CosinePart; 2],
}

struct CosinePart {
    op: DMatrix<C64>,
    eigenvalues: Vec<f64>,
    /// columns are the eigenvectors of `op`
    basis: DMatrix<C64>,
    /// dimensionless scaling applied to `op - mean`
    scale: f64,
}

impl CosinePart {
    fn new(op: &ComplexMatrix, scale: f64) -> Result<Self> {
        let eig = op.hermitian_eigen()?;
        Ok(Self {
            op: op.as_dmatrix().clone(),
            eigenvalues: eig.values,
            basis: eig.vectors.into_dmatrix(),
            scale,
        })
    }

    /// (variance, wirtinger gradient contribution)
    fn variance_and_gradient(&self, psi: &CVector, with_gradient: bool) -> (f64, Option<CVector>) {
        let mean = psi.dotc(&(&self.op * psi)).re;
        let phi = self.basis.adjoint() * psi;
        let n = phi.len();
        let mut m1 = 0.0;
        let mut m2 = 0.0;
        let mut s1 = 0.0;
        let mut s2 = 0.0;
        let mut cos_values = Vec::with_capacity(n);
        for k in 0..n {
            let w = phi[k].norm_sqr();
            let x = self.scale * (self.eigenvalues[k] - mean);
            let c = x.cos();
            let s = x.sin();
            m1 += w * c;
            m2 += w * c * c;
            s1 += w * s;
            s2 += w * 2.0 * c * s;
            cos_values.push(c);
        }
        let variance = (m2 - m1 * m1).max(0.0);
        if !with_gradient {
            return (variance, None);
        }
        // explicit part: d/dpsi* of <cos^2> - <cos>^2 at fixed mean
        let weighted = CVector::from_fn(n, |k, _| {
            phi[k] * C64::new(cos_values[k] * cos_values[k] - 2.0 * m1 * cos_values[k], 0.0)
        });
        let explicit = &self.basis * weighted;
        // chain part through the state-dependent mean
        let df_dmean = self.scale * (s2 - 2.0 * m1 * s1);
        let chain = (&self.op * psi) * C64::new(df_dmean, 0.0);
        (variance, Some(explicit + chain))
    }
}

impl CosineObjective {
    pub fn new(model: &OscillatorModel) -> Result<Self> {
        model.validate()?;
        let sq = (model.scale_s / model.hbar).sqrt();
        let sp = 1.0 / (model.scale_s * model.hbar).sqrt();
        Ok(Self {
            dim: model.truncation_dim,
            parts: [
                CosinePart::new(&model.q_matrix, sq)?,
                CosinePart::new(&model.p_matrix, sp)?,
            ],
        })
    }
}

impl SphereObjective for CosineObjective {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, psi: &CVector) -> f64 {
        self.parts
            .iter()
            .map(|p| p.variance_and_gradient(psi, false).0)
            .sum()
    }

    fn gradient(&self, psi: &CVector) -> CVector {
        let mut acc = CVector::zeros(self.dim);
        for p in &self.parts {
            let (_, g) = p.variance_and_gradient(psi, true);
            acc += g.expect("gradient requested");
        }
        acc
    }
}

/// Result of the bounded-cosine experiment, with a half-truncation control
/// run and the small-angle reference value `1/8` for comparison (the
/// reference comes from a small-argument expansion and is not asserted as a
/// bound).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WeylCosineReport {
    pub report: BoundReport,
    pub truncation_dim: usize,
    pub value_half_truncation: f64,
    pub half_truncation_dim: usize,
    pub relative_change: f64,
    pub small_angle_reference: f64,
    /// objective value on the oscillator ground state
    pub ground_state_value: f64,
}

impl fmt::Display for WeylCosineReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "cosine-pair infimum at N={}: {:.9} (ground state {:.9})",
            self.truncation_dim, self.report.infimum_estimate, self.ground_state_value
        )?;
        writeln!(
            f,
            "  half truncation N={}: {:.9} (relative change {:.3})",
            self.half_truncation_dim, self.value_half_truncation, self.relative_change
        )?;
        writeln!(
            f,
            "  small-angle reference 1/8 = {:.6} (not a certified bound)",
            self.small_angle_reference
        )?;
        write!(f, "{}", self.report)
    }
}

fn minimize_cosine(model: &OscillatorModel, cfg: &OptimizerConfig) -> Result<(MultistartOutcome, usize)> {
    let obj = CosineObjective::new(model)?;
    let n = model.truncation_dim;
    // deterministic starts: the ground state and the uniform vector
    let mut e0 = CVector::zeros(n);
    e0[0] = C64::new(1.0, 0.0);
    let uniform = CVector::from_element(n, C64::new(1.0 / (n as f64).sqrt(), 0.0));
    let extra = vec![e0, uniform];
    let extra_count = extra.len();
    Ok((minimize_on_sphere(&obj, cfg, &extra)?, extra_count))
}

/// Minimizes `Var(cos q~) + Var(cos p~)` over pure states of the truncated
/// model, then repeats at half the truncation to expose cutoff sensitivity.
pub fn weyl_cosine_experiment(
    model: &OscillatorModel,
    cfg: &OptimizerConfig,
) -> Result<WeylCosineReport> {
    let obj = CosineObjective::new(model)?;
    let (outcome, extra_count) = minimize_cosine(model, cfg)?;

    let mut e0 = CVector::zeros(model.truncation_dim);
    e0[0] = C64::new(1.0, 0.0);
    let ground_state_value = obj.value(&e0);

    let half_n = (model.truncation_dim / 2).max(4);
    let half_model = build_oscillator(half_n, model.scale_s, model.hbar)?;
    let (half_outcome, _) = minimize_cosine(&half_model, cfg)?;

    let infimum = obj.value(&outcome.best_state);
    let relative_change =
        (infimum - half_outcome.best_value).abs() / infimum.abs().max(f64::MIN_POSITIVE);

    let report = BoundReport {
        objective_kind: ObjectiveKind::SumOfSquares,
        infimum_estimate: infimum,
        argmin_state: outcome.best_state,
        starts: cfg.starts + extra_count,
        converged_starts: outcome.converged_starts,
        iterations_total: outcome.iterations_total,
        seed: cfg.seed,
        generator: rng::GENERATOR.to_string(),
        grid_gap: None,
        trace: outcome.trace,
    };
    Ok(WeylCosineReport {
        report,
        truncation_dim: model.truncation_dim,
        value_half_truncation: half_outcome.best_value,
        half_truncation_dim: half_n,
        relative_change,
        small_angle_reference: 0.125,
        ground_state_value,
    })
}

/// The uncertainty product collapses for bounded observables: an eigenstate
/// of `a` pushes `D(a)` to zero while `D(b)` stays below `sqrt(2) ||b||`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProductCollapseReport {
    pub product_infimum: f64,
    pub single_infimum: f64,
    pub operator_norm_b: f64,
    /// `single_infimum * sqrt(2) * ||b||` plus tolerance
    pub bound: f64,
    pub holds: bool,
}

impl fmt::Display for ProductCollapseReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "product infimum {:.3e} <= {:.3e} (single infimum {:.3e} * sqrt(2) * ||b|| {:.6}): {}",
            self.product_infimum,
            self.bound,
            self.single_infimum,
            self.operator_norm_b,
            if self.holds { "holds" } else { "VIOLATED" }
        )
    }
}

pub fn bounded_product_collapse(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    cfg: &OptimizerConfig,
) -> Result<ProductCollapseReport> {
    let product = minimize_deviation_functional(a, Some(b), ObjectiveKind::Product, cfg)?;
    let single = minimize_deviation_functional(a, None, ObjectiveKind::Single, cfg)?;
    let norm_b = b.operator_norm()?;
    let tol = 1e-8 * (1.0 + a.operator_norm()? + norm_b);
    let bound = single.infimum_estimate * std::f64::consts::SQRT_2 * norm_b + tol;
    Ok(ProductCollapseReport {
        product_infimum: product.infimum_estimate,
        single_infimum: single.infimum_estimate,
        operator_norm_b: norm_b,
        bound,
        holds: product.infimum_estimate <= bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::pauli;
    use crate::optimize::gradient_check;
    use approx::assert_abs_diff_eq;

    fn spin_half() -> (ComplexMatrix, ComplexMatrix) {
        let half = C64::new(0.5, 0.0);
        (pauli::x().scale(half), pauli::z().scale(half))
    }

    fn ket0_state() -> State {
        State::pure(&CVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)])).unwrap()
    }

    #[test]
    fn robertson_equality_on_the_pole() {
        // [x, y] = 2iz and <z> = 1 on |0>, so the bound is 1 and both
        // deviations are 1: equality
        let s = ket0_state();
        let bound = robertson_bound(&s, &pauli::x(), &pauli::y()).unwrap();
        assert_abs_diff_eq!(bound, 1.0, epsilon = 1e-12);
        let da = crate::states::deviation(&s, &pauli::x()).unwrap();
        let db = crate::states::deviation(&s, &pauli::y()).unwrap();
        assert_abs_diff_eq!(da * db, bound, epsilon = 1e-12);
    }

    #[test]
    fn robertson_bound_can_vanish_on_mixed_states() {
        let s = State::maximally_mixed(2);
        assert_abs_diff_eq!(
            robertson_bound(&s, &pauli::x(), &pauli::y()).unwrap(),
            0.0,
            epsilon = 1e-14
        );
    }

    #[test]
    fn robertson_bound_of_equal_observables_is_zero() {
        let s = ket0_state();
        assert_abs_diff_eq!(
            robertson_bound(&s, &pauli::x(), &pauli::x()).unwrap(),
            0.0,
            epsilon = 1e-14
        );
    }

    #[test]
    fn deviation_objectives_have_correct_gradients() {
        let (a, b) = spin_half();
        let mut rng = rng::seeded(13);
        let psi = rng::unit_vector(&mut rng, 2);
        for kind in [ObjectiveKind::SumOfSquares, ObjectiveKind::Product] {
            let obj = DeviationObjective::new(kind, &a, Some(&b)).unwrap();
            let err = gradient_check(&obj, &psi, 1e-6);
            assert!(err < 1e-6, "{kind}: gradient error {err}");
        }
        let obj = DeviationObjective::new(ObjectiveKind::Single, &a, None).unwrap();
        assert!(gradient_check(&obj, &psi, 1e-6) < 1e-6);
    }

    #[test]
    fn single_deviation_reaches_zero_on_eigenstates() {
        let cfg = OptimizerConfig::with_seed(1);
        let report =
            minimize_deviation_functional(&pauli::z(), None, ObjectiveKind::Single, &cfg).unwrap();
        assert!(report.infimum_estimate < 1e-8, "{report}");
    }

    #[test]
    fn spin_sum_of_squares_matches_the_closed_form_quarter() {
        let (a, b) = spin_half();
        let cfg = OptimizerConfig::with_seed(1);
        let report =
            minimize_deviation_functional(&a, Some(&b), ObjectiveKind::SumOfSquares, &cfg).unwrap();
        assert_abs_diff_eq!(report.infimum_estimate, 0.25, epsilon = 1e-6);
        assert!(report.grid_gap.unwrap() < 1e-4, "{report}");
    }

    #[test]
    fn spin_product_collapses_to_zero() {
        let (a, b) = spin_half();
        let cfg = OptimizerConfig::with_seed(1);
        let report =
            minimize_deviation_functional(&a, Some(&b), ObjectiveKind::Product, &cfg).unwrap();
        assert!(report.infimum_estimate < 1e-6, "{report}");
    }

    #[test]
    fn report_reproduces_its_own_infimum() {
        let (a, b) = spin_half();
        let cfg = OptimizerConfig::with_seed(2);
        let report =
            minimize_deviation_functional(&a, Some(&b), ObjectiveKind::Sum, &cfg).unwrap();
        let obj = DeviationObjective::new(ObjectiveKind::Sum, &a, Some(&b)).unwrap();
        let reevaluated = obj.stated_value(&report.argmin_state);
        assert!((reevaluated - report.infimum_estimate).abs() < 1e-12);
    }

    #[test]
    fn multistart_matches_the_grid_oracle_up_to_dimension_four() {
        let mut rng = rng::seeded(43);
        for n in 2..=4usize {
            let a = rng::hermitian(&mut rng, n);
            let b = rng::hermitian(&mut rng, n);
            let cfg = OptimizerConfig::with_seed(100 + n as u64);
            for kind in [ObjectiveKind::Sum, ObjectiveKind::SumOfSquares, ObjectiveKind::Product] {
                let report = minimize_deviation_functional(&a, Some(&b), kind, &cfg).unwrap();
                let gap = report.grid_gap.expect("oracle runs for dim <= 4");
                assert!(gap < 1e-4, "dim {n} {kind}: gap {gap:.3e}");
            }
        }
    }

    #[test]
    fn single_deviation_vanishes_for_every_hermitian() {
        // eigenstates exist in finite dimension, so the single-observable
        // infimum is always zero
        let mut rng = rng::seeded(47);
        for n in 2..=6usize {
            let a = rng::hermitian(&mut rng, n);
            let cfg = OptimizerConfig::with_seed(200 + n as u64);
            let report =
                minimize_deviation_functional(&a, None, ObjectiveKind::Single, &cfg).unwrap();
            assert!(report.infimum_estimate < 1e-8, "dim {n}: {report}");
        }
    }

    #[test]
    fn mixed_states_do_not_beat_the_pure_infimum() {
        // variance is concave in the density matrix, so the infimum over
        // all states is attained on pure ones; spot-check on a grid of
        // random mixed states at dimension 2
        let (a, b) = spin_half();
        let mut rng = rng::seeded(57);
        let mut best = f64::INFINITY;
        for _ in 0..10_000 {
            let s = State::new(rng::density(&mut rng, 2)).unwrap();
            let value = crate::states::deviation(&s, &a).unwrap().powi(2)
                + crate::states::deviation(&s, &b).unwrap().powi(2);
            best = best.min(value);
        }
        assert!(best >= 0.25 - 1e-12, "mixed-state value {best} beats 1/4");
    }

    #[test]
    fn certification_is_unitarily_invariant() {
        let (a, b) = spin_half();
        let cfg = OptimizerConfig::with_seed(51);
        let plain = certify_complementarity(&a, &b, &cfg, None).unwrap();
        let mut rng = rng::seeded(53);
        for _ in 0..3 {
            let g = rng::unitary(&mut rng, 2);
            let ga = &(&g * &a) * &g.adjoint();
            let gb = &(&g * &b) * &g.adjoint();
            let rotated = certify_complementarity(&ga, &gb, &cfg, None).unwrap();
            assert_eq!(plain.complementary, rotated.complementary);
            assert!(
                (plain.report.infimum_estimate - rotated.report.infimum_estimate).abs() < 1e-8,
                "{} vs {}",
                plain.report.infimum_estimate,
                rotated.report.infimum_estimate
            );
        }
    }

    #[test]
    fn spin_pair_is_certified_complementary() {
        let (a, b) = spin_half();
        let cfg = OptimizerConfig::with_seed(4);
        let cert = certify_complementarity(&a, &b, &cfg, None).unwrap();
        assert!(cert.complementary, "{cert}");
        // closed form: minimum of D(a)+D(b) on the Bloch sphere is 1/2
        assert_abs_diff_eq!(cert.report.infimum_estimate, 0.5, epsilon = 1e-6);
    }

    #[test]
    fn equal_observables_are_not_complementary() {
        let cfg = OptimizerConfig::with_seed(4);
        let cert = certify_complementarity(&pauli::z(), &pauli::z(), &cfg, None).unwrap();
        assert!(!cert.complementary, "{cert}");
        assert!(cert.report.infimum_estimate < 1e-7);
    }

    #[test]
    fn scalar_partner_is_not_complementary() {
        let cfg = OptimizerConfig::with_seed(4);
        let cert =
            certify_complementarity(&pauli::x(), &ComplexMatrix::identity(2), &cfg, None).unwrap();
        assert!(!cert.complementary, "{cert}");
    }

    #[test]
    fn commuting_pair_has_a_joint_sharp_state() {
        let diag = ComplexMatrix::from_rows(
            2,
            2,
            &[
                C64::new(2.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(3.0, 0.0),
            ],
        )
        .unwrap();
        match common_sharp_state(&pauli::z(), &diag, 1e-9).unwrap() {
            SharpStateOutcome::Found {
                deviation_a,
                deviation_b,
                ..
            } => {
                assert!(deviation_a < 1e-9);
                assert!(deviation_b < 1e-9);
            }
            other => panic!("expected a joint sharp state, got {other}"),
        }
    }

    #[test]
    fn non_commuting_pair_reports_its_commutator_norm() {
        match common_sharp_state(&pauli::x(), &pauli::z(), 1e-9).unwrap() {
            SharpStateOutcome::NonCommuting { commutator_norm } => {
                // ||[x, z]|| = ||-2iy|| = 2
                assert_abs_diff_eq!(commutator_norm, 2.0, epsilon = 1e-12);
            }
            other => panic!("expected failure, got {other}"),
        }
    }

    #[test]
    fn oscillator_ground_state_position_variance() {
        let model = build_oscillator(4, 1.0, 1.0).unwrap();
        let q2 = &model.q_matrix * &model.q_matrix;
        assert_abs_diff_eq!(q2[(0, 0)].re, 0.5, epsilon = 1e-14);
    }

    #[test]
    fn oscillator_commutator_corner_is_exact() {
        let model = build_oscillator(6, 2.0, 0.5).unwrap();
        let comm = model.q_matrix.commutator(&model.p_matrix).unwrap();
        assert_abs_diff_eq!(comm[(0, 0)].im, 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(comm[(0, 0)].re, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn oscillator_rejects_tiny_truncations() {
        assert!(build_oscillator(2, 1.0, 1.0).is_err());
    }

    #[test]
    fn cosine_gradient_matches_finite_differences() {
        let model = build_oscillator(8, 1.0, 1.0).unwrap();
        let obj = CosineObjective::new(&model).unwrap();
        let mut rng = rng::seeded(19);
        let psi = rng::unit_vector(&mut rng, 8);
        let err = gradient_check(&obj, &psi, 1e-6);
        assert!(err < 1e-5, "gradient error {err}");
    }

    #[test]
    fn ground_state_cosine_value_matches_gaussian_moments() {
        // independent oracle: for x ~ N(0, 1/2), E[cos x] = e^(-1/4) and
        // E[cos^2 x] = (1 + e^(-1))/2, so each variance is
        // (1 + e^(-1))/2 - e^(-1/2); q and p contribute equally
        let model = build_oscillator(40, 1.0, 1.0).unwrap();
        let obj = CosineObjective::new(&model).unwrap();
        let mut e0 = CVector::zeros(40);
        e0[0] = C64::new(1.0, 0.0);
        let expected = 2.0 * ((1.0 + (-1.0f64).exp()) / 2.0 - (-0.5f64).exp());
        assert_abs_diff_eq!(obj.value(&e0), expected, epsilon = 1e-9);
    }

    #[test]
    fn cosine_objective_is_scale_covariant() {
        // q~ and p~ are invariant under s -> 4s in the number basis, so the
        // objective agrees pointwise on the same coordinates
        let m1 = build_oscillator(12, 1.0, 1.0).unwrap();
        let m2 = build_oscillator(12, 4.0, 1.0).unwrap();
        let o1 = CosineObjective::new(&m1).unwrap();
        let o2 = CosineObjective::new(&m2).unwrap();
        let mut rng = rng::seeded(23);
        for _ in 0..5 {
            let psi = rng::unit_vector(&mut rng, 12);
            assert_abs_diff_eq!(o1.value(&psi), o2.value(&psi), epsilon = 1e-6);
        }
    }

    #[test]
    fn product_collapse_holds_for_spin() {
        let cfg = OptimizerConfig::with_seed(6);
        let report = bounded_product_collapse(&pauli::x(), &pauli::z(), &cfg).unwrap();
        assert!(report.holds, "{report}");
        assert!(report.product_infimum < 1e-6);
    }

    #[test]
    fn product_collapse_on_scalars_is_zero() {
        let cfg = OptimizerConfig::with_seed(6);
        let id = ComplexMatrix::identity(2);
        let report = bounded_product_collapse(&id, &id, &cfg).unwrap();
        assert!(report.product_infimum < 1e-12, "{report}");
    }
}
