//! Pauli-string observables, linear readouts and the task metrics.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::matrix::{C64, ZERO};
use crate::linalg::{Axis, DensityMatrix};

/// Tolerance on the imaginary part of a measured expectation value.
pub const IMAG_TOL: f64 = 1e-10;

/// A product of one or two Pauli operators on distinct sites.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PauliString {
    factors: Vec<(usize, Axis)>,
}

impl PauliString {
    pub fn new(factors: Vec<(usize, Axis)>) -> Result<Self> {
        if factors.is_empty() || factors.len() > 2 {
            return Err(Error::InvalidArgument(format!("Pauli strings have length 1 or 2, got {}", factors.len())));
        }
        if factors.iter().any(|(_, a)| !a.is_hermitian()) {
            return Err(Error::InvalidArgument("observables must be built from x, y, z".into()));
        }
        if factors.len() == 2 && factors[0].0 == factors[1].0 {
            return Err(Error::InvalidArgument(format!("site {} repeated in Pauli string", factors[0].0)));
        }
        Ok(Self { factors })
    }

    pub fn single(site: usize, axis: Axis) -> Self {
        Self::new(vec![(site, axis)]).expect("hermitian single-site string")
    }

    pub fn factors(&self) -> &[(usize, Axis)] {
        &self.factors
    }

    pub fn label(&self) -> String {
        self.factors
            .iter()
            .map(|(s, a)| format!("{}{s}", format!("{a:?}").to_lowercase()))
            .collect::<Vec<_>>()
            .join("")
    }

    /// `Tr(rho P) = sum_c phase(c) rho[c, c xor flip]` where `P|c> = phase(c) |c xor flip>`.
    fn expectation(&self, rho: &DensityMatrix, n_qubits: usize) -> C64 {
        let m = rho.matrix();
        let mut flip = 0usize;
        for &(site, axis) in &self.factors {
            if matches!(axis, Axis::X | Axis::Y) {
                flip |= 1 << (n_qubits - 1 - site);
            }
        }
        let mut acc = ZERO;
        for c in 0..rho.dim() {
            let mut phase = C64::new(1.0, 0.0);
            for &(site, axis) in &self.factors {
                let bit = (c >> (n_qubits - 1 - site)) & 1;
                phase *= match (axis, bit) {
                    (Axis::Z, 1) => C64::new(-1.0, 0.0),
                    (Axis::Y, 0) => C64::new(0.0, 1.0),
                    (Axis::Y, _) => C64::new(0.0, -1.0),
                    _ => C64::new(1.0, 0.0),
                };
            }
            acc += phase * m[(c, c ^ flip)];
        }
        acc
    }
}

/// The observables measured at every time step.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObservableSet {
    n_qubits: usize,
    strings: Vec<PauliString>,
}

impl ObservableSet {
    pub fn new(n_qubits: usize, strings: Vec<PauliString>) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::InvalidArgument("observable set on zero qubits".into()));
        }
        if strings.is_empty() {
            return Err(Error::InvalidArgument("empty observable set".into()));
        }
        if let Some(s) = strings.iter().find(|s| s.factors.iter().any(|&(site, _)| site >= n_qubits)) {
            return Err(Error::InvalidArgument(format!("{} exceeds {n_qubits} qubits", s.label())));
        }
        Ok(Self { n_qubits, strings })
    }

    /// `sigma^z_i` on every site.
    pub fn z_sites(n_qubits: usize) -> Self {
        let strings = (0..n_qubits).map(|i| PauliString::single(i, Axis::Z)).collect();
        Self::new(n_qubits, strings).expect("nonempty register")
    }

    /// Every single-site Pauli and every two-site product on distinct sites:
    /// `3N + 9 N (N - 1) / 2` observables.
    pub fn single_and_pairs(n_qubits: usize) -> Self {
        const AXES: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];
        let mut strings = Vec::new();
        for i in 0..n_qubits {
            strings.extend(AXES.map(|a| PauliString::single(i, a)));
        }
        for i in 0..n_qubits {
            for j in i + 1..n_qubits {
                for a in AXES {
                    for b in AXES {
                        strings.push(PauliString::new(vec![(i, a), (j, b)]).expect("distinct sites"));
                    }
                }
            }
        }
        Self::new(n_qubits, strings).expect("nonempty register")
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn len(&self) -> usize {
        self.strings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strings.is_empty()
    }

    pub fn strings(&self) -> &[PauliString] {
        &self.strings
    }
}

/// Observable expectations at one time step. The bias is added at training time.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureRecord {
    pub time_index: usize,
    pub features: Vec<f64>,
}

pub fn measure(rho: &DensityMatrix, set: &ObservableSet) -> Result<FeatureRecord> {
    if rho.dim() != 1 << set.n_qubits {
        return Err(Error::Dimension(format!(
            "state dim {} for observables on {} qubits",
            rho.dim(),
            set.n_qubits
        )));
    }
    let features = set
        .strings
        .iter()
        .map(|s| {
            let v = s.expectation(rho, set.n_qubits);
            if v.im.abs() > IMAG_TOL {
                return Err(Error::InvalidState(format!("<{}> has imaginary part {:e}", s.label(), v.im)));
            }
            Ok(v.re)
        })
        .collect::<Result<_>>()?;
    Ok(FeatureRecord { time_index: 0, features })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReadoutWeights {
    pub bias: f64,
    pub weights: Vec<f64>,
}

impl ReadoutWeights {
    pub fn zeros(n: usize, bias: f64) -> Self {
        Self { bias, weights: vec![0.0; n] }
    }
}

/// A trained readout and the conditioning of the centered feature matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ReadoutFit {
    pub weights: ReadoutWeights,
    /// Largest over smallest singular value; infinite when rank deficient.
    pub condition_number: f64,
}

/// Ordinary least squares with a bias term, minimum-norm on rank deficiency.
pub fn train(features: &[FeatureRecord], targets: &[f64]) -> Result<ReadoutWeights> {
    Ok(fit(features, targets, 0.0)?.weights)
}

/// Least squares with an optional ridge penalty on the non-bias weights.
///
/// Features and targets are centered, the weights come from an SVD of the
/// centered feature matrix (singular values below `max(T, F) eps sigma_max`
/// are treated as zero), and the bias restores the means.
pub fn fit(features: &[FeatureRecord], targets: &[f64], ridge: f64) -> Result<ReadoutFit> {
    if features.is_empty() {
        return Err(Error::InvalidArgument("no training samples".into()));
    }
    if features.len() != targets.len() {
        return Err(Error::Dimension(format!("{} feature records for {} targets", features.len(), targets.len())));
    }
    if !(ridge >= 0.0 && ridge.is_finite()) {
        return Err(Error::InvalidArgument(format!("ridge {ridge} must be finite and >= 0")));
    }
    let t = features.len();
    let f = features[0].features.len();
    if features.iter().any(|r| r.features.len() != f) {
        return Err(Error::Dimension("feature records of unequal length".into()));
    }
    if t < f + 1 {
        return Err(Error::InvalidArgument(format!("{t} samples for {} parameters", f + 1)));
    }
    let y_mean = targets.iter().sum::<f64>() / t as f64;
    if f == 0 {
        return Ok(ReadoutFit { weights: ReadoutWeights::zeros(0, y_mean), condition_number: 1.0 });
    }
    let mut means = vec![0.0; f];
    for r in features {
        for (m, x) in means.iter_mut().zip(&r.features) {
            *m += x;
        }
    }
    means.iter_mut().for_each(|m| *m /= t as f64);
    let x = DMatrix::from_fn(t, f, |i, j| features[i].features[j] - means[j]);
    let y = DVector::from_iterator(t, targets.iter().map(|v| v - y_mean));

    let svd = x.svd(true, true);
    let (u, vt) = (svd.u.as_ref().expect("requested U"), svd.v_t.as_ref().expect("requested V^T"));
    let sigma = &svd.singular_values;
    let s_max = sigma.max();
    let cutoff = s_max * t.max(f) as f64 * f64::EPSILON;
    let s_min = sigma.min();
    let condition_number = if s_min > cutoff { s_max / s_min } else { f64::INFINITY };

    let uty = u.transpose() * &y;
    let mut coeffs = DVector::zeros(sigma.len());
    for (k, &s) in sigma.iter().enumerate() {
        if s > cutoff {
            coeffs[k] = s / (s * s + ridge) * uty[k];
        }
    }
    let w = vt.transpose() * coeffs;
    if w.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("least-squares solution is not finite".into()));
    }
    let weights: Vec<f64> = w.iter().copied().collect();
    let bias = y_mean - weights.iter().zip(&means).map(|(a, b)| a * b).sum::<f64>();
    Ok(ReadoutFit { weights: ReadoutWeights { bias, weights }, condition_number })
}

pub fn predict(w: &ReadoutWeights, f: &FeatureRecord) -> Result<f64> {
    if w.weights.len() != f.features.len() {
        return Err(Error::Dimension(format!("{} weights for {} features", w.weights.len(), f.features.len())));
    }
    Ok(w.bias + w.weights.iter().zip(&f.features).map(|(a, b)| a * b).sum::<f64>())
}

pub fn predict_all(w: &ReadoutWeights, records: &[FeatureRecord]) -> Result<Vec<f64>> {
    records.iter().map(|r| predict(w, r)).collect()
}

fn check_pair(outputs: &[f64], targets: &[f64], min_len: usize) -> Result<()> {
    if outputs.len() != targets.len() {
        return Err(Error::Dimension(format!("{} outputs for {} targets", outputs.len(), targets.len())));
    }
    if outputs.len() < min_len {
        return Err(Error::InvalidArgument(format!("need at least {min_len} samples, got {}", outputs.len())));
    }
    Ok(())
}

/// `cov(y, yhat)^2 / (var(y) var(yhat))`.
pub fn capacity(outputs: &[f64], targets: &[f64]) -> Result<f64> {
    check_pair(outputs, targets, 2)?;
    let n = outputs.len() as f64;
    let mo = outputs.iter().sum::<f64>() / n;
    let mt = targets.iter().sum::<f64>() / n;
    let (mut cov, mut vo, mut vt) = (0.0, 0.0, 0.0);
    for (o, t) in outputs.iter().zip(targets) {
        let (a, b) = (o - mo, t - mt);
        cov += a * b;
        vo += a * a;
        vt += b * b;
    }
    // Relative floor so that series constant up to rounding count as constant.
    let floor = |v: f64, m: f64| v <= (n * f64::EPSILON * m.abs().max(1.0)).powi(2);
    if vo == 0.0 || floor(vo, mo) {
        return Err(Error::UndefinedCapacity("outputs have zero variance".into()));
    }
    if vt == 0.0 || floor(vt, mt) {
        return Err(Error::UndefinedCapacity("targets have zero variance".into()));
    }
    Ok((cov * cov / (vo * vt)).clamp(0.0, 1.0))
}

pub fn mse(outputs: &[f64], targets: &[f64]) -> Result<f64> {
    check_pair(outputs, targets, 1)?;
    Ok(outputs.iter().zip(targets).map(|(o, t)| (o - t).powi(2)).sum::<f64>() / outputs.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{pauli_site, ComplexMatrix};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn records(rows: &[Vec<f64>]) -> Vec<FeatureRecord> {
        rows.iter().enumerate().map(|(i, f)| FeatureRecord { time_index: i, features: f.clone() }).collect()
    }

    fn random_rows(t: usize, f: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..t).map(|_| (0..f).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect()
    }

    #[test]
    fn maximally_mixed_has_zero_expectations() {
        let set = ObservableSet::single_and_pairs(3);
        assert_eq!(set.len(), 9 + 27);
        let r = measure(&DensityMatrix::maximally_mixed(8), &set).unwrap();
        assert!(r.features.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn embedded_scale_feature_count() {
        assert_eq!(ObservableSet::single_and_pairs(4).len(), 12 + 54);
    }

    #[test]
    fn eigenstate_gives_unit_z() {
        let rho = DensityMatrix::basis(4, 0).unwrap();
        let r = measure(&rho, &ObservableSet::z_sites(2)).unwrap();
        assert_eq!(r.features, vec![1.0, 1.0]);
        let rho = DensityMatrix::basis(4, 1).unwrap();
        assert_eq!(measure(&rho, &ObservableSet::z_sites(2)).unwrap().features, vec![1.0, -1.0]);
    }

    #[test]
    fn fast_expectations_match_dense_traces() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rho = DensityMatrix::random_full_rank(8, &mut rng);
        let set = ObservableSet::single_and_pairs(3);
        let r = measure(&rho, &set).unwrap();
        for (s, v) in set.strings().iter().zip(&r.features) {
            let mut op = ComplexMatrix::identity(8);
            for &(site, axis) in s.factors() {
                op = op.matmul(&pauli_site(axis, site, 3).unwrap());
            }
            let dense = rho.matrix().matmul(&op).trace();
            assert!((dense.re - v).abs() < 1e-12, "{}", s.label());
            assert!(v.abs() <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn measure_rejects_dimension_mismatch() {
        assert!(measure(&DensityMatrix::maximally_mixed(4), &ObservableSet::z_sites(3)).is_err());
        assert!(ObservableSet::new(2, vec![PauliString::single(2, Axis::X)]).is_err());
        assert!(PauliString::new(vec![(0, Axis::X), (0, Axis::Z)]).is_err());
        assert!(PauliString::new(vec![(0, Axis::Plus)]).is_err());
    }

    #[test]
    fn constant_target_gives_bias_only() {
        let rows = random_rows(50, 3, 1);
        let w = train(&records(&rows), &[0.7; 50]).unwrap();
        assert!((w.bias - 0.7).abs() < 1e-12);
        assert!(w.weights.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn realizable_target_is_recovered() {
        let rows = random_rows(40, 3, 2);
        let y: Vec<f64> = rows.iter().map(|r| 2.0 * r[0] + 1.0).collect();
        let w = train(&records(&rows), &y).unwrap();
        assert!((w.bias - 1.0).abs() < 1e-10);
        for (got, want) in w.weights.iter().zip([2.0, 0.0, 0.0]) {
            assert!((got - want).abs() < 1e-10);
        }
    }

    #[test]
    fn residual_is_orthogonal_to_design_columns() {
        let rows = random_rows(200, 5, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let y: Vec<f64> = (0..200).map(|_| rng.gen_range(0.0..1.0)).collect();
        let recs = records(&rows);
        let w = train(&recs, &y).unwrap();
        let res: Vec<f64> = recs.iter().zip(&y).map(|(r, t)| predict(&w, r).unwrap() - t).collect();
        assert!(res.iter().sum::<f64>().abs() < 1e-9);
        for j in 0..5 {
            let dot: f64 = rows.iter().zip(&res).map(|(r, e)| r[j] * e).sum();
            assert!(dot.abs() < 1e-9);
        }
    }

    #[test]
    fn duplicated_column_keeps_predictions() {
        let rows = random_rows(100, 3, 5);
        let y: Vec<f64> = rows.iter().map(|r| r[0] * r[1] + r[2]).collect();
        let w1 = train(&records(&rows), &y).unwrap();
        let dup: Vec<Vec<f64>> = rows.iter().map(|r| vec![r[0], r[1], r[2], r[1]]).collect();
        let fit2 = fit(&records(&dup), &y, 0.0).unwrap();
        assert!(fit2.condition_number.is_infinite());
        for (a, b) in records(&rows).iter().zip(records(&dup).iter()) {
            let d = predict(&w1, a).unwrap() - predict(&fit2.weights, b).unwrap();
            assert!(d.abs() < 1e-8);
        }
    }

    #[test]
    fn training_is_deterministic() {
        let rows = random_rows(60, 4, 6);
        let y: Vec<f64> = rows.iter().map(|r| r[3].sin()).collect();
        assert_eq!(train(&records(&rows), &y).unwrap(), train(&records(&rows), &y).unwrap());
    }

    #[test]
    fn training_input_errors() {
        assert!(train(&[], &[]).is_err());
        let rows = random_rows(5, 2, 7);
        assert!(train(&records(&rows), &[0.0; 4]).is_err());
        assert!(train(&records(&rows[..2]), &[0.0; 2]).is_err());
        assert!(fit(&records(&rows), &[0.0; 5], -1.0).is_err());
    }

    #[test]
    fn ridge_shrinks_weights() {
        let rows = random_rows(100, 3, 8);
        let y: Vec<f64> = rows.iter().map(|r| r[0] - r[2]).collect();
        let plain = fit(&records(&rows), &y, 0.0).unwrap().weights;
        let shrunk = fit(&records(&rows), &y, 10.0).unwrap().weights;
        let norm = |w: &ReadoutWeights| w.weights.iter().map(|v| v * v).sum::<f64>();
        assert!(norm(&shrunk) < norm(&plain));
    }

    #[test]
    fn predict_basics() {
        let f = FeatureRecord { time_index: 0, features: vec![0.3, -0.4] };
        assert_eq!(predict(&ReadoutWeights::zeros(2, 0.25), &f).unwrap(), 0.25);
        let w = ReadoutWeights { bias: 0.0, weights: vec![0.0, 1.0] };
        assert_eq!(predict(&w, &f).unwrap(), -0.4);
        assert!(predict(&ReadoutWeights::zeros(3, 0.0), &f).is_err());

        let g = FeatureRecord { time_index: 1, features: vec![-0.9, 0.6] };
        let w = ReadoutWeights { bias: 0.0, weights: vec![1.3, -0.7] };
        let alpha = 0.35;
        let mix = FeatureRecord {
            time_index: 2,
            features: f.features.iter().zip(&g.features).map(|(a, b)| alpha * a + (1.0 - alpha) * b).collect(),
        };
        let lhs = predict(&w, &mix).unwrap();
        let rhs = alpha * predict(&w, &f).unwrap() + (1.0 - alpha) * predict(&w, &g).unwrap();
        assert!((lhs - rhs).abs() < 1e-14);
    }

    #[test]
    fn capacity_basics() {
        let x = [0.1, 0.5, 0.3, 0.9, 0.2];
        assert!((capacity(&x, &x).unwrap() - 1.0).abs() < 1e-15);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((capacity(&neg, &x).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(capacity(&[0.3; 5], &x), Err(Error::UndefinedCapacity(_))));
        assert!(matches!(capacity(&x, &[1.0; 5]), Err(Error::UndefinedCapacity(_))));
        assert!(capacity(&x[..1], &x[..1]).is_err());
        assert!(capacity(&x, &x[..4]).is_err());
    }

    #[test]
    fn capacity_is_affine_invariant_and_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let a: Vec<f64> = (0..100).map(|_| rng.gen::<f64>()).collect();
            let b: Vec<f64> = a.iter().map(|v| v + 0.5 * rng.gen::<f64>()).collect();
            let c = capacity(&a, &b).unwrap();
            assert!((0.0..=1.0).contains(&c));
            let scaled: Vec<f64> = a.iter().map(|v| -3.7 * v + 11.0).collect();
            assert!((capacity(&scaled, &b).unwrap() - c).abs() < 1e-10);
        }
    }

    #[test]
    fn independent_series_have_small_capacity() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let mut values: Vec<f64> = (0..100)
            .map(|_| {
                let a: Vec<f64> = (0..1000).map(|_| rng.gen::<f64>()).collect();
                let b: Vec<f64> = (0..1000).map(|_| rng.gen::<f64>()).collect();
                capacity(&a, &b).unwrap()
            })
            .collect();
        values.sort_by(f64::total_cmp);
        // At T = 1000 the squared correlation is ~chi^2_1 / T; 99th percentile ~ 0.0066.
        assert!(values[98] <= 0.01);
    }

    #[test]
    fn mse_basics() {
        let x = [0.2, 0.4, 0.6];
        assert_eq!(mse(&x, &x).unwrap(), 0.0);
        let shifted: Vec<f64> = x.iter().map(|v| v + 0.3).collect();
        assert!((mse(&shifted, &x).unwrap() - 0.09).abs() < 1e-15);
        assert!(mse(&[], &[]).is_err());
        assert!(mse(&x, &x[..2]).is_err());
    }
}
