//! Nonnegative measures on discrete path space and their Born disagreement.
//!
//! Every path `q_0 -> ... -> q_s` carries the complex amplitude of
//! [`path_amplitude`](crate::pathsum::path_amplitude). A [`MeasureVariant`]
//! turns it into a nonnegative weight, the weights are normalized, and the
//! final-time marginal is compared with `|U^s psi|^2`.
//!
//! Paths are stored implicitly: weight `i` belongs to the path whose
//! base-`n` digits (most significant first) are `q_0 q_1 ... q_s`, so the
//! endpoint is `i mod n`.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::evolution::{evolve, UnitaryStep};
use crate::pathsum::{check_cap, for_each_amplitude, path_count, PairwiseSum, Path, DEFAULT_ENUMERATION_CAP};
use crate::state::{born_distribution, total_variation, Distribution, WaveFunction, NORMALIZED_TOLERANCE, ZERO_NORM};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureVariant {
    /// `max(Re a, 0)`
    PositiveReal,
    /// `max(Im a, 0)`
    PositiveImag,
    /// `|a|`
    Modulus,
}

impl MeasureVariant {
    pub const ALL: [MeasureVariant; 3] = [MeasureVariant::PositiveReal, MeasureVariant::PositiveImag, MeasureVariant::Modulus];

    pub fn name(self) -> &'static str {
        match self {
            MeasureVariant::PositiveReal => "positive_real",
            MeasureVariant::PositiveImag => "positive_imag",
            MeasureVariant::Modulus => "modulus",
        }
    }

    pub fn weight(self, amplitude: Complex64) -> f64 {
        match self {
            MeasureVariant::PositiveReal => amplitude.re.max(0.0),
            MeasureVariant::PositiveImag => amplitude.im.max(0.0),
            MeasureVariant::Modulus => amplitude.norm(),
        }
    }
}

impl fmt::Display for MeasureVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Complex amplitude of every endpoint-free path, in lexicographic order.
pub fn path_amplitudes(u: &UnitaryStep, psi: &WaveFunction, steps: usize, cap: u64) -> Result<Vec<Complex64>> {
    if psi.space() != u.space() {
        return Err(Error::SpaceMismatch);
    }
    if steps == 0 {
        return Err(Error::InvalidArgument("steps must be at least 1".into()));
    }
    let n = u.dim();
    let total = path_count(n, steps + 1);
    check_cap(total, cap)?;
    let mut out = vec![Complex64::new(0.0, 0.0); total as usize];
    for r in 0..n {
        let mut prefix_index = 0usize;
        for_each_amplitude(u, psi, steps, r, |_, a| {
            out[prefix_index * n + r] = a;
            prefix_index += 1;
        });
    }
    Ok(out)
}

/// A normalized nonnegative measure over all `n^(s+1)` paths.
#[derive(Debug, Clone, PartialEq)]
pub struct PathMeasure {
    weights: Vec<f64>,
    variant: MeasureVariant,
    normalization: f64,
    space_size: usize,
    steps: usize,
    psi: WaveFunction,
    dt: f64,
}

impl PathMeasure {
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn variant(&self) -> MeasureVariant {
        self.variant
    }

    /// Total mass before normalization.
    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    pub fn space_size(&self) -> usize {
        self.space_size
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// The path stored at position `index`.
    pub fn path(&self, index: usize) -> Path {
        let n = self.space_size;
        let mut points = vec![0usize; self.steps + 1];
        let mut rest = index;
        for slot in points.iter_mut().rev() {
            *slot = rest % n;
            rest /= n;
        }
        Path::new(points, self.psi.time(), self.dt).expect("valid path")
    }

    pub fn iter(&self) -> impl Iterator<Item = (Path, f64)> + '_ {
        self.weights.iter().enumerate().map(|(i, &w)| (self.path(i), w))
    }

    pub fn weight_of(&self, path: &Path) -> Option<f64> {
        if path.steps() != self.steps || path.points().iter().any(|&q| q >= self.space_size) {
            return None;
        }
        let index = path.points().iter().fold(0usize, |acc, &q| acc * self.space_size + q);
        Some(self.weights[index])
    }
}

pub fn path_measure(u: &UnitaryStep, psi: &WaveFunction, steps: usize, variant: MeasureVariant) -> Result<PathMeasure> {
    path_measure_with_cap(u, psi, steps, variant, DEFAULT_ENUMERATION_CAP)
}

pub fn path_measure_with_cap(
    u: &UnitaryStep,
    psi: &WaveFunction,
    steps: usize,
    variant: MeasureVariant,
    cap: u64,
) -> Result<PathMeasure> {
    let norm = psi.norm();
    if (norm - 1.0).abs() > NORMALIZED_TOLERANCE {
        return Err(Error::NotNormalized { norm });
    }
    let amps = path_amplitudes(u, psi, steps, cap)?;
    measure_from_amplitudes(&amps, u, psi, steps, variant)
}

fn measure_from_amplitudes(
    amps: &[Complex64],
    u: &UnitaryStep,
    psi: &WaveFunction,
    steps: usize,
    variant: MeasureVariant,
) -> Result<PathMeasure> {
    let masses: Vec<f64> = amps.iter().map(|&a| variant.weight(a)).collect();
    let mut sum = PairwiseSum::default();
    for &m in &masses {
        sum.push(Complex64::new(m, 0.0));
    }
    let z = sum.total().re;
    if !(z > ZERO_NORM) {
        return Err(Error::DegenerateMeasure { variant: variant.name(), mass: z });
    }
    Ok(PathMeasure {
        weights: masses.into_iter().map(|m| m / z).collect(),
        variant,
        normalization: z,
        space_size: u.dim(),
        steps,
        psi: psi.clone(),
        dt: u.dt(),
    })
}

/// Final-time marginal of a path measure.
pub fn endpoint_marginal(m: &PathMeasure) -> Result<Distribution> {
    let n = m.space_size;
    let mut marginal = vec![0.0; n];
    for (i, w) in m.weights.iter().enumerate() {
        marginal[i % n] += w;
    }
    Distribution::new(m.psi.space().clone(), marginal)
}

/// `born_distribution(U^s psi)`.
pub fn born_endpoint(u: &UnitaryStep, psi: &WaveFunction, steps: usize) -> Result<Distribution> {
    born_distribution(&evolve(u, psi, steps)?)
}

/// One flat record per variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantRecord {
    pub variant: MeasureVariant,
    pub status: VariantStatus,
    /// Pre-normalization mass `Z`; zero-ish when degenerate.
    pub normalization: f64,
    /// `None` when the variant is degenerate.
    pub tv_distance: Option<f64>,
    pub steps: usize,
    pub space_size: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariantStatus {
    Ok,
    Degenerate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasureReport {
    pub born: Distribution,
    pub records: Vec<VariantRecord>,
    pub marginals: Vec<Option<Distribution>>,
}

impl MeasureReport {
    pub fn record(&self, variant: MeasureVariant) -> &VariantRecord {
        self.records.iter().find(|r| r.variant == variant).expect("every variant is reported")
    }
}

/// Compares all three variants against the Born endpoint.
///
/// A degenerate variant is recorded as such; it does not abort the report.
pub fn measure_vs_born_report(u: &UnitaryStep, psi: &WaveFunction, steps: usize) -> Result<MeasureReport> {
    measure_vs_born_report_with_cap(u, psi, steps, DEFAULT_ENUMERATION_CAP)
}

pub fn measure_vs_born_report_with_cap(u: &UnitaryStep, psi: &WaveFunction, steps: usize, cap: u64) -> Result<MeasureReport> {
    let norm = psi.norm();
    if (norm - 1.0).abs() > NORMALIZED_TOLERANCE {
        return Err(Error::NotNormalized { norm });
    }
    let born = born_endpoint(u, psi, steps)?;
    let amps = path_amplitudes(u, psi, steps, cap)?;
    let mut records = Vec::with_capacity(3);
    let mut marginals = Vec::with_capacity(3);
    for variant in MeasureVariant::ALL {
        let (status, normalization, tv, marginal) = match measure_from_amplitudes(&amps, u, psi, steps, variant) {
            Ok(m) => {
                let marginal = endpoint_marginal(&m)?;
                let tv = total_variation(&marginal, &born)?;
                (VariantStatus::Ok, m.normalization, Some(tv), Some(marginal))
            }
            Err(Error::DegenerateMeasure { mass, .. }) => (VariantStatus::Degenerate, mass, None, None),
            Err(e) => return Err(e),
        };
        records.push(VariantRecord { variant, status, normalization, tv_distance: tv, steps, space_size: u.dim() });
        marginals.push(marginal);
    }
    Ok(MeasureReport { born, records, marginals })
}

/// The 2x2 Hadamard step `[[1, 1], [1, -1]] / sqrt 2`.
pub fn hadamard_step() -> UnitaryStep {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let m = nalgebra::DMatrix::from_row_slice(2, 2, &[h, h, h, -h]).map(|x| Complex64::new(x, 0.0));
    UnitaryStep::from_matrix(crate::state::Space::finite(2).expect("size 2"), m, 1.0).expect("Hadamard is unitary")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{normalize, Space};
    use crate::testutil::{random_state, random_unitary, rng};
    use approx::assert_abs_diff_eq;
    use nalgebra::DMatrix;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn basis0(phase: f64) -> WaveFunction {
        WaveFunction::from_vec(Space::finite(2).unwrap(), vec![Complex64::from_polar(1.0, phase), c(0.0, 0.0)]).unwrap()
    }

    #[test]
    fn singleton_space_is_trivial() {
        let u = UnitaryStep::from_matrix(Space::finite(1).unwrap(), DMatrix::from_element(1, 1, Complex64::from_polar(1.0, 0.1)), 1.0).unwrap();
        let psi = WaveFunction::from_vec(Space::finite(1).unwrap(), vec![c(1.0, 0.0)]).unwrap();
        for v in MeasureVariant::ALL {
            let m = path_measure(&u, &psi, 3, v).unwrap();
            assert_eq!(m.weights(), &[1.0]);
        }
        let report = measure_vs_born_report(&u, &psi, 3).unwrap();
        assert!(report.records.iter().all(|r| r.tv_distance == Some(0.0)));
    }

    #[test]
    fn identity_concentrates_on_constant_path() {
        let u = UnitaryStep::from_matrix(Space::finite(2).unwrap(), DMatrix::identity(2, 2), 1.0).unwrap();
        let m = path_measure(&u, &basis0(0.0), 2, MeasureVariant::Modulus).unwrap();
        let constant = Path::new(vec![0, 0, 0], 0.0, 1.0).unwrap();
        assert_eq!(m.weight_of(&constant), Some(1.0));
        assert_eq!(m.weights().iter().filter(|&&w| w > 0.0).count(), 1);
        let marginal = endpoint_marginal(&m).unwrap();
        assert_eq!(marginal.weights(), &[1.0, 0.0]);
        let report = measure_vs_born_report(&u, &basis0(0.0), 2).unwrap();
        assert_eq!(report.record(MeasureVariant::Modulus).tv_distance, Some(0.0));
    }

    #[test]
    fn hadamard_modulus_weights_by_enumeration() {
        let m = path_measure(&hadamard_step(), &basis0(0.0), 2, MeasureVariant::Modulus).unwrap();
        assert_eq!(m.len(), 8);
        // paths from q0 = 0 all have |amplitude| = 1/2; from q0 = 1 they vanish
        for (path, w) in m.iter() {
            let expected = if path.start() == 0 { 0.25 } else { 0.0 };
            assert_abs_diff_eq!(w, expected, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(m.normalization(), 2.0, epsilon = 1e-14);
        let marginal = endpoint_marginal(&m).unwrap();
        assert_abs_diff_eq!(marginal.weights()[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(marginal.weights()[1], 0.5, epsilon = 1e-15);
    }

    #[test]
    fn hadamard_born_endpoint_is_point_mass() {
        let born = born_endpoint(&hadamard_step(), &basis0(0.0), 2).unwrap();
        assert_abs_diff_eq!(born.weights()[0], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn hadamard_report_real_state() {
        let report = measure_vs_born_report(&hadamard_step(), &basis0(0.0), 2).unwrap();
        let re = report.record(MeasureVariant::PositiveReal);
        assert_abs_diff_eq!(re.tv_distance.unwrap(), 1.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(re.normalization, 1.5, epsilon = 1e-12);
        // all amplitudes are real: no positive imaginary mass at all
        let im = report.record(MeasureVariant::PositiveImag);
        assert_eq!(im.status, VariantStatus::Degenerate);
        assert_eq!(im.tv_distance, None);
        let m = report.record(MeasureVariant::Modulus);
        assert_abs_diff_eq!(m.tv_distance.unwrap(), 0.5, epsilon = 1e-12);
        assert!(m.tv_distance.unwrap() > 0.1);
        assert!(matches!(
            path_measure(&hadamard_step(), &basis0(0.0), 2, MeasureVariant::PositiveImag),
            Err(Error::DegenerateMeasure { variant: "positive_imag", .. })
        ));
    }

    #[test]
    fn hadamard_report_phased_state() {
        let report = measure_vs_born_report(&hadamard_step(), &basis0(std::f64::consts::FRAC_PI_4), 2).unwrap();
        let z = 3.0 * std::f64::consts::SQRT_2 / 4.0;
        for (v, tv, norm) in [
            (MeasureVariant::PositiveReal, 1.0 / 3.0, z),
            (MeasureVariant::PositiveImag, 1.0 / 3.0, z),
            (MeasureVariant::Modulus, 0.5, 2.0),
        ] {
            let r = report.record(v);
            assert_abs_diff_eq!(r.tv_distance.unwrap(), tv, epsilon = 1e-12);
            assert_abs_diff_eq!(r.normalization, norm, epsilon = 1e-12);
        }
    }

    #[test]
    fn random_three_state_born_endpoint() {
        let mut r = rng(31);
        let m = random_unitary(&mut r, 3);
        let u = UnitaryStep::from_matrix(Space::finite(3).unwrap(), m.clone(), 1.0).unwrap();
        let psi = normalize(&random_state(&mut r, Space::finite(3).unwrap())).unwrap();
        let born = born_endpoint(&u, &psi, 3).unwrap();
        let cube = &m * &m * &m * psi.amplitudes();
        for (w, a) in born.weights().iter().zip(cube.iter()) {
            assert!((w - a.norm_sqr()).abs() < 1e-12);
        }
    }

    #[test]
    fn swap_moves_point_mass() {
        let swap = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        let u = UnitaryStep::from_matrix(Space::finite(2).unwrap(), swap, 1.0).unwrap();
        assert_eq!(born_endpoint(&u, &basis0(0.0), 1).unwrap().weights(), &[0.0, 1.0]);
    }

    #[test]
    fn path_decoding_round_trips() {
        let m = path_measure(&hadamard_step(), &basis0(0.3), 3, MeasureVariant::Modulus).unwrap();
        for (i, (path, w)) in m.iter().enumerate() {
            assert_eq!(m.weight_of(&path), Some(w));
            assert_eq!(path.endpoint(), i % 2);
        }
    }

    #[test]
    fn unnormalized_state_rejected() {
        let psi = WaveFunction::from_vec(Space::finite(2).unwrap(), vec![c(2.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!(matches!(path_measure(&hadamard_step(), &psi, 2, MeasureVariant::Modulus), Err(Error::NotNormalized { .. })));
    }

    fn instance(seed: u64, n: usize) -> (UnitaryStep, WaveFunction) {
        let mut r = rng(seed);
        let u = UnitaryStep::from_matrix(Space::finite(n).unwrap(), random_unitary(&mut r, n), 1.0).unwrap();
        let psi = normalize(&random_state(&mut r, Space::finite(n).unwrap())).unwrap();
        (u, psi)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn measures_are_probability_measures(seed in 0u64..100_000, n in 1usize..=4, s in 1usize..=5) {
            let (u, psi) = instance(seed, n);
            for v in MeasureVariant::ALL {
                match path_measure(&u, &psi, s, v) {
                    Ok(m) => {
                        prop_assert!(m.weights().iter().all(|&w| w >= 0.0));
                        prop_assert!((m.weights().iter().sum::<f64>() - 1.0).abs() <= 1e-9);
                        let marginal = endpoint_marginal(&m).unwrap();
                        prop_assert!((marginal.weights().iter().sum::<f64>() - 1.0).abs() <= 1e-9);
                    }
                    Err(Error::DegenerateMeasure { .. }) => {}
                    Err(e) => return Err(TestCaseError::fail(e.to_string())),
                }
            }
        }

        #[test]
        fn modulus_is_phase_invariant(seed in 0u64..100_000, n in 1usize..=4, s in 1usize..=4, theta in 0.0f64..std::f64::consts::TAU) {
            let (u, psi) = instance(seed, n);
            let a = path_measure(&u, &psi, s, MeasureVariant::Modulus).unwrap();
            let b = path_measure(&u, &psi.with_global_phase(theta), s, MeasureVariant::Modulus).unwrap();
            for (x, y) in a.weights().iter().zip(b.weights()) {
                prop_assert!((x - y).abs() <= 1e-12);
            }
            let ma = endpoint_marginal(&a).unwrap();
            let mb = endpoint_marginal(&b).unwrap();
            for (x, y) in ma.weights().iter().zip(mb.weights()) {
                prop_assert!((x - y).abs() <= 1e-12);
            }
        }

        #[test]
        fn signed_amplitudes_reproduce_evolution(seed in 0u64..100_000, n in 1usize..=4, s in 1usize..=5) {
            let (u, psi) = instance(seed, n);
            let amps = path_amplitudes(&u, &psi, s, DEFAULT_ENUMERATION_CAP).unwrap();
            let target = evolve(&u, &psi, s).unwrap();
            for r in 0..n {
                let sum: Complex64 = amps.iter().skip(r).step_by(n).sum();
                prop_assert!((sum - target.amplitudes()[r]).norm() <= 1e-10);
            }
        }
    }
}
