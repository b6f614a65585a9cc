//! States as density matrices: expectations, deviations, Born-rule
//! measurement simulation, and separation of observables by states.

use nalgebra::DMatrix;
use rand::distributions::WeightedIndex;
use rand::prelude::Distribution;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::io::Write;

use crate::algebra::StarAlgebra;
use crate::error::{Error, Result};
use crate::matrix::{C64, CVector, ComplexMatrix};
use crate::rng;
use crate::DEFAULT_TOL;

/// Relative eigenvalue gap below which spectral values are merged into a
/// single projection (degenerate outcomes must not skew Born weights).
const SPECTRAL_MERGE_GAP: f64 = 1e-8;

/// A density matrix: hermitian, positive semidefinite, unit trace.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct State {
    rho: ComplexMatrix,
}

impl State {
    /// Validates with the default tolerance (`1e-10` on eigenvalues and trace).
    pub fn new(rho: ComplexMatrix) -> Result<Self> {
        Self::with_tol(rho, DEFAULT_TOL)
    }

    pub fn with_tol(rho: ComplexMatrix, tol: f64) -> Result<Self> {
        rho.require_square()?;
        let defect = rho.hermiticity_defect();
        if defect > tol * (1.0 + rho.frobenius_norm()) {
            return Err(Error::InvalidState(format!(
                "density matrix is not hermitian (defect {defect:.3e})"
            )));
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
            return Err(Error::InvalidState(format!(
                "density matrix has trace {tr}, expected 1"
            )));
        }
        let eig = rho.hermitian_eigen()?;
        if let Some(&min) = eig.values.first() {
            if min < -tol {
                return Err(Error::InvalidState(format!(
                    "density matrix has negative eigenvalue {min:.3e}"
                )));
            }
        }
        Ok(Self { rho })
    }

    /// Pure state `|psi><psi|` from a (not necessarily normalized) vector.
    pub fn pure(psi: &CVector) -> Result<Self> {
        Ok(Self {
            rho: ComplexMatrix::projector(psi)?,
        })
    }

    pub fn maximally_mixed(n: usize) -> Self {
        Self {
            rho: ComplexMatrix::identity(n).scale(C64::new(1.0 / n as f64, 0.0)),
        }
    }

    pub fn dim(&self) -> usize {
        self.rho.rows()
    }

    pub fn rho(&self) -> &ComplexMatrix {
        &self.rho
    }

    /// Validates an already-deserialized state.
    pub fn validate(&self) -> Result<()> {
        Self::with_tol(self.rho.clone(), DEFAULT_TOL).map(|_| ())
    }
}

/// Expectation `Tr(rho a)`; real within tolerance when `a` is hermitian.
pub fn expectation(s: &State, a: &ComplexMatrix) -> Result<C64> {
    let n = a.require_square()?;
    if n != s.dim() {
        return Err(Error::DimensionMismatch(format!(
            "state dimension {} vs observable dimension {}",
            s.dim(),
            n
        )));
    }
    Ok((s.rho().as_dmatrix() * a.as_dmatrix()).trace())
}

/// Standard deviation `sqrt(<a^2> - <a>^2)` of a hermitian observable.
/// Tiny negative radicands from rounding are clamped to zero.
pub fn deviation(s: &State, a: &ComplexMatrix) -> Result<f64> {
    a.require_hermitian(DEFAULT_TOL)?;
    let mean = expectation(s, a)?.re;
    let second = expectation(s, &(a * a))?.re;
    let radicand = second - mean * mean;
    if radicand < -1e-8 * (1.0 + second.abs()) {
        return Err(Error::Numerical(format!(
            "variance came out negative ({radicand:.3e})"
        )));
    }
    Ok(radicand.max(0.0).sqrt())
}

/// Outcomes of repeated simulated measurements of one observable.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub outcomes: Vec<f64>,
    pub empirical_mean: f64,
    pub sample_count: usize,
    pub seed: u64,
    pub generator: String,
}

impl MeasurementRecord {
    /// CSV export: `index,outcome` rows under a comment header that records
    /// the seed, generator and empirical mean.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "# seed={} generator={} samples={} mean={}\n",
            self.seed, self.generator, self.sample_count, self.empirical_mean
        ));
        out.push_str("index,outcome\n");
        for (i, x) in self.outcomes.iter().enumerate() {
            out.push_str(&format!("{i},{x}\n"));
        }
        out
    }

    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        w.write_all(self.to_csv().as_bytes())?;
        Ok(())
    }
}

impl fmt::Display for MeasurementRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} samples (seed {}, {}): empirical mean {}",
            self.sample_count, self.seed, self.generator, self.empirical_mean
        )
    }
}

/// Spectral projections of a hermitian observable after merging degenerate
/// eigenvalues; returns `(outcome value, projector column block)` pairs.
fn spectral_projections(a: &ComplexMatrix) -> Result<Vec<(f64, DMatrix<C64>)>> {
    let eig = a.hermitian_eigen()?;
    let clusters = eig.clusters(SPECTRAL_MERGE_GAP);
    let mut out = Vec::with_capacity(clusters.len());
    for cluster in clusters {
        let value = cluster.iter().map(|&k| eig.values[k]).sum::<f64>() / cluster.len() as f64;
        let block = eig
            .vectors
            .as_dmatrix()
            .columns(cluster[0], cluster.len())
            .into_owned();
        out.push((value, block));
    }
    Ok(out)
}

/// Draws `n_samples` i.i.d. outcomes with Born probabilities
/// `p_k = Tr(rho P_k)` over the spectral projections of `a`. The empirical
/// mean converges to `expectation(s, a)` by the law of large numbers.
pub fn simulate_measurements(
    s: &State,
    a: &ComplexMatrix,
    n_samples: usize,
    seed: u64,
) -> Result<MeasurementRecord> {
    if n_samples == 0 {
        return Err(Error::InvalidArgument(
            "measurement simulation needs at least one sample".into(),
        ));
    }
    a.require_hermitian(DEFAULT_TOL)?;
    if a.rows() != s.dim() {
        return Err(Error::DimensionMismatch(format!(
            "state dimension {} vs observable dimension {}",
            s.dim(),
            a.rows()
        )));
    }
    let projections = spectral_projections(a)?;
    let mut values = Vec::with_capacity(projections.len());
    let mut probs = Vec::with_capacity(projections.len());
    for (value, block) in &projections {
        // Tr(rho P) with P = block block*
        let p = (block.adjoint() * s.rho().as_dmatrix() * block).trace().re;
        if p < -DEFAULT_TOL * 10.0 {
            return Err(Error::InvalidState(format!(
                "Born probability came out negative ({p:.3e})"
            )));
        }
        values.push(*value);
        probs.push(p.max(0.0));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidState(format!(
            "Born probabilities sum to {total}, expected 1"
        )));
    }

    let mut rng = rng::seeded(seed);
    let dist = WeightedIndex::new(&probs)
        .map_err(|e| Error::InvalidState(format!("invalid Born weights: {e}")))?;
    let outcomes: Vec<f64> = (0..n_samples).map(|_| values[dist.sample(&mut rng)]).collect();
    let empirical_mean = outcomes.iter().sum::<f64>() / n_samples as f64;
    Ok(MeasurementRecord {
        outcomes,
        empirical_mean,
        sample_count: n_samples,
        seed,
        generator: rng::GENERATOR.to_string(),
    })
}

/// True iff the linear map `A -> (omega_i(A))_i` is injective on the span
/// of the algebra: the functional matrix on the basis has full column rank
/// relative to the algebra tolerance.
pub fn separates(states: &[State], alg: &StarAlgebra) -> Result<bool> {
    if states.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let m = alg.dim();
    let mut f = DMatrix::<C64>::zeros(states.len(), m);
    for (i, s) in states.iter().enumerate() {
        for (j, b) in alg.basis().iter().enumerate() {
            f[(i, j)] = expectation(s, b)?;
        }
    }
    if states.len() < m {
        return Ok(false);
    }
    let sv = crate::matrix::singular_values(&f);
    let smax = sv.first().copied().unwrap_or(0.0);
    let smin = sv.get(m - 1).copied().unwrap_or(0.0);
    Ok(smin > alg.tol() * smax.max(1.0))
}

/// Compares the smallest expectation of a hermitian observable over a state
/// family against its true smallest eigenvalue. For a family covering all
/// eigenstates the two agree; a gap flags an insufficient family.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PositivityReport {
    pub min_expectation: f64,
    pub min_eigenvalue: f64,
    /// index of the state attaining the smallest expectation
    pub witness_state: usize,
    /// whether the family resolves positivity: min expectation matches the
    /// spectral minimum within tolerance
    pub family_complete: bool,
}

impl fmt::Display for PositivityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "min expectation {:.6} (state #{}), min eigenvalue {:.6}: {}",
            self.min_expectation,
            self.witness_state,
            self.min_eigenvalue,
            if self.family_complete {
                "family resolves positivity"
            } else {
                "family too small to witness the spectral minimum"
            }
        )
    }
}

pub fn positivity_report(a: &ComplexMatrix, states: &[State]) -> Result<PositivityReport> {
    a.require_hermitian(DEFAULT_TOL)?;
    if states.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let mut min_expectation = f64::INFINITY;
    let mut witness_state = 0;
    for (i, s) in states.iter().enumerate() {
        let e = expectation(s, a)?.re;
        if e < min_expectation {
            min_expectation = e;
            witness_state = i;
        }
    }
    let eig = a.hermitian_eigen()?;
    let min_eigenvalue = eig.values[0];
    let scale = 1.0 + eig.values.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    Ok(PositivityReport {
        min_expectation,
        min_eigenvalue,
        witness_state,
        family_complete: (min_expectation - min_eigenvalue).abs() <= 1e-9 * scale,
    })
}

/// The family of all eigenstate density matrices of a hermitian observable.
pub fn eigenstate_family(a: &ComplexMatrix) -> Result<Vec<State>> {
    let eig = a.hermitian_eigen()?;
    (0..a.rows()).map(|k| State::pure(&eig.eigenvector(k))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::pauli;
    use approx::assert_abs_diff_eq;

    fn ket0() -> CVector {
        CVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)])
    }

    fn ket_plus() -> CVector {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        CVector::from_vec(vec![C64::new(h, 0.0), C64::new(h, 0.0)])
    }

    #[test]
    fn expectations_on_qubit_states() {
        let mixed = State::maximally_mixed(2);
        assert_abs_diff_eq!(expectation(&mixed, &pauli::z()).unwrap().re, 0.0);
        let zero = State::pure(&ket0()).unwrap();
        assert_abs_diff_eq!(expectation(&zero, &pauli::z()).unwrap().re, 1.0);
        let plus = State::pure(&ket_plus()).unwrap();
        assert_abs_diff_eq!(expectation(&plus, &pauli::x()).unwrap().re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn expectation_rejects_dimension_mismatch() {
        let s = State::maximally_mixed(2);
        assert!(expectation(&s, &ComplexMatrix::identity(3)).is_err());
    }

    #[test]
    fn deviation_vanishes_on_eigenstates() {
        let zero = State::pure(&ket0()).unwrap();
        assert_abs_diff_eq!(deviation(&zero, &pauli::z()).unwrap(), 0.0);
    }

    #[test]
    fn deviation_of_z_on_mixed_and_plus_states_is_one() {
        // <z> = 0 and <z^2> = 1 on both
        let mixed = State::maximally_mixed(2);
        assert_abs_diff_eq!(deviation(&mixed, &pauli::z()).unwrap(), 1.0);
        let plus = State::pure(&ket_plus()).unwrap();
        assert_abs_diff_eq!(deviation(&plus, &pauli::z()).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn deviation_rejects_non_hermitian() {
        let m = ComplexMatrix::from_rows(
            2,
            2,
            &[
                C64::new(0.0, 0.0),
                C64::new(1.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.0),
            ],
        )
        .unwrap();
        assert!(matches!(
            deviation(&State::maximally_mixed(2), &m),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn invalid_states_are_rejected() {
        // trace 2
        let m = ComplexMatrix::identity(2);
        assert!(State::new(m).is_err());
        // negative eigenvalue
        let neg = ComplexMatrix::from_rows(
            2,
            2,
            &[
                C64::new(1.5, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(-0.5, 0.0),
            ],
        )
        .unwrap();
        assert!(State::new(neg).is_err());
    }

    #[test]
    fn eigenstate_measurements_are_deterministic() {
        let zero = State::pure(&ket0()).unwrap();
        let rec = simulate_measurements(&zero, &pauli::z(), 200, 5).unwrap();
        assert!(rec.outcomes.iter().all(|&x| x == 1.0));
        assert_eq!(rec.empirical_mean, 1.0);
    }

    #[test]
    fn measurement_mean_converges() {
        let mixed = State::maximally_mixed(2);
        let n = 100_000;
        let rec = simulate_measurements(&mixed, &pauli::z(), n, 7).unwrap();
        // binomial standard error 1/sqrt(N)
        assert!(rec.empirical_mean.abs() < 4.0 / (n as f64).sqrt());
    }

    #[test]
    fn zero_samples_is_an_error() {
        let mixed = State::maximally_mixed(2);
        assert!(simulate_measurements(&mixed, &pauli::z(), 0, 1).is_err());
    }

    #[test]
    fn measurements_are_bit_reproducible() {
        let plus = State::pure(&ket_plus()).unwrap();
        let a = simulate_measurements(&plus, &pauli::z(), 1000, 42).unwrap();
        let b = simulate_measurements(&plus, &pauli::z(), 1000, 42).unwrap();
        assert_eq!(a.outcomes, b.outcomes);
        assert_eq!(a.empirical_mean, b.empirical_mean);
    }

    #[test]
    fn degenerate_spectra_merge_outcomes() {
        let zero = C64::new(0.0, 0.0);
        let one = C64::new(1.0, 0.0);
        // eigenvalue 1 with multiplicity 2, eigenvalue -1 once
        let a = ComplexMatrix::from_rows(
            3,
            3,
            &[one, zero, zero, zero, one, zero, zero, zero, -one],
        )
        .unwrap();
        let rec =
            simulate_measurements(&State::maximally_mixed(3), &a, 30_000, 9).unwrap();
        let plus_fraction =
            rec.outcomes.iter().filter(|&&x| x > 0.0).count() as f64 / rec.outcomes.len() as f64;
        assert!((plus_fraction - 2.0 / 3.0).abs() < 0.02);
    }

    #[test]
    fn tomographically_complete_family_separates() {
        let alg = StarAlgebra::generate(2, &[pauli::x(), pauli::z()], 1e-10).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let states = vec![
            State::pure(&ket0()).unwrap(),
            State::pure(&CVector::from_vec(vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)])).unwrap(),
            State::pure(&ket_plus()).unwrap(),
            State::pure(&CVector::from_vec(vec![C64::new(h, 0.0), C64::new(0.0, h)])).unwrap(),
        ];
        assert!(separates(&states, &alg).unwrap());
    }

    #[test]
    fn single_mixed_state_hides_traceless_elements() {
        let alg = StarAlgebra::generate(2, &[pauli::x(), pauli::z()], 1e-10).unwrap();
        let states = vec![State::maximally_mixed(2)];
        assert!(!separates(&states, &alg).unwrap());
    }

    #[test]
    fn any_state_separates_the_scalars() {
        let scalars = StarAlgebra::generate(2, &[], 1e-10).unwrap();
        let states = vec![State::maximally_mixed(2)];
        assert!(separates(&states, &scalars).unwrap());
    }

    #[test]
    fn empty_family_is_an_error() {
        let scalars = StarAlgebra::generate(2, &[], 1e-10).unwrap();
        assert!(matches!(separates(&[], &scalars), Err(Error::EmptyFamily)));
    }

    #[test]
    fn positivity_full_eigenstate_family_agrees_with_spectrum() {
        let family = eigenstate_family(&pauli::z()).unwrap();
        let report = positivity_report(&pauli::z(), &family).unwrap();
        assert_abs_diff_eq!(report.min_expectation, -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(report.min_eigenvalue, -1.0, epsilon = 1e-12);
        assert!(report.family_complete);
    }

    #[test]
    fn positivity_of_identity() {
        let family = vec![State::maximally_mixed(2)];
        let report = positivity_report(&ComplexMatrix::identity(2), &family).unwrap();
        assert_abs_diff_eq!(report.min_expectation, 1.0, epsilon = 1e-12);
        assert!(report.family_complete);
    }

    #[test]
    fn insufficient_family_is_flagged() {
        let family = vec![State::maximally_mixed(2)];
        let report = positivity_report(&pauli::x(), &family).unwrap();
        assert_abs_diff_eq!(report.min_expectation, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(report.min_eigenvalue, -1.0, epsilon = 1e-12);
        assert!(!report.family_complete);
    }

    #[test]
    fn csv_export_has_header_comment() {
        let zero = State::pure(&ket0()).unwrap();
        let rec = simulate_measurements(&zero, &pauli::z(), 3, 11).unwrap();
        let csv = rec.to_csv();
        assert!(csv.starts_with("# seed=11 generator=chacha8"));
        assert!(csv.contains("index,outcome\n0,1\n"));
    }
}
