//! Trace distance and the discrete BLP non-Markovianity measure.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::matrix::ComplexMatrix;
use crate::linalg::DensityMatrix;
use crate::parallel::{map_indexed, Execution};
use crate::reservoirs::{drive_shared, Reservoir};

/// `||rho1 - rho2||_1 / 2`, from the singular values of the difference.
pub fn trace_distance(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<f64> {
    if rho1.dim() != rho2.dim() {
        return Err(Error::Dimension(format!("trace distance between dims {} and {}", rho1.dim(), rho2.dim())));
    }
    Ok(matrix_trace_distance(rho1.matrix(), rho2.matrix()))
}

fn matrix_trace_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let diff = a - b;
    0.5 * diff.singular_values().iter().sum::<f64>()
}

/// Sum of the positive increments of a distance sequence.
pub fn positive_increments(distances: &[f64]) -> f64 {
    distances.windows(2).map(|w| (w[1] - w[0]).max(0.0)).sum()
}

/// Which state the distance is evaluated on.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistanceScope {
    /// Reservoir qubits only (the marginal for embedded models).
    #[default]
    Reservoir,
    /// Everything simulated, including auxiliaries.
    Joint,
}

fn distance<R: Reservoir>(a: &R, b: &R, scope: DistanceScope) -> Result<f64> {
    match scope {
        DistanceScope::Reservoir => trace_distance(&a.reservoir_state(), &b.reservoir_state()),
        DistanceScope::Joint => trace_distance(a.full_state(), b.full_state()),
    }
}

/// Trace-distance trajectory of consecutive model pairs `(models[2i], models[2i+1])`
/// over the first `n_steps` inputs, starting with the initial distance.
/// All models must share one kernel.
pub fn pair_distance_trajectories<R: Reservoir>(
    models: &mut [R],
    inputs: &[f64],
    n_steps: usize,
    scope: DistanceScope,
) -> Result<Vec<Vec<f64>>> {
    if !models.len().is_multiple_of(2) || models.is_empty() {
        return Err(Error::InvalidArgument(format!("need model pairs, got {} models", models.len())));
    }
    if n_steps == 0 {
        return Err(Error::InvalidArgument("n_steps must be at least 1".into()));
    }
    if inputs.len() < n_steps {
        return Err(Error::InvalidArgument(format!("{} inputs for {n_steps} steps", inputs.len())));
    }
    let mut out: Vec<Vec<f64>> = models
        .chunks_exact(2)
        .map(|p| distance(&p[0], &p[1], scope).map(|d| vec![d]))
        .collect::<Result<_>>()?;
    drive_shared(models, &inputs[..n_steps], |_, ms| {
        for (p, traj) in ms.chunks_exact(2).zip(out.iter_mut()) {
            traj.push(distance(&p[0], &p[1], scope)?);
        }
        Ok(())
    })?;
    Ok(out)
}

/// Positive-increment sums for consecutive model pairs sharing one kernel.
pub fn pair_sums<R: Reservoir>(
    models: &mut [R],
    inputs: &[f64],
    n_steps: usize,
    scope: DistanceScope,
) -> Result<Vec<f64>> {
    Ok(pair_distance_trajectories(models, inputs, n_steps, scope)?
        .iter()
        .map(|d| positive_increments(d))
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlpResult {
    pub per_pair_sums: Vec<f64>,
    /// Maximum over the sampled pairs.
    pub measure: f64,
    pub n_steps: usize,
    pub n_pairs: usize,
}

impl BlpResult {
    pub fn from_sums(per_pair_sums: Vec<f64>, n_steps: usize) -> Result<Self> {
        if per_pair_sums.is_empty() {
            return Err(Error::InvalidArgument("no pair sums".into()));
        }
        let measure = per_pair_sums.iter().copied().fold(0.0, f64::max);
        Ok(Self { n_pairs: per_pair_sums.len(), per_pair_sums, measure, n_steps })
    }

    pub fn median(&self) -> f64 {
        let mut v = self.per_pair_sums.clone();
        v.sort_by(f64::total_cmp);
        let n = v.len();
        if n % 2 == 1 {
            v[n / 2]
        } else {
            0.5 * (v[n / 2 - 1] + v[n / 2])
        }
    }
}

/// Estimates the BLP measure from `n_pairs` sampled pairs.
///
/// `factory(pair_index)` returns two models that differ only in their initial
/// state and share one kernel, plus the input series driving them.
pub fn blp_measure<R, F>(
    factory: F,
    n_pairs: usize,
    n_steps: usize,
    scope: DistanceScope,
    execution: Execution,
) -> Result<BlpResult>
where
    R: Reservoir,
    F: Fn(usize) -> Result<([R; 2], Vec<f64>)> + Sync + Send,
{
    if n_pairs == 0 || n_steps == 0 {
        return Err(Error::InvalidArgument("n_pairs and n_steps must be at least 1".into()));
    }
    let sums = map_indexed(n_pairs, execution, |i| {
        let (mut models, inputs) = factory(i)?;
        Ok(pair_sums(&mut models, &inputs, n_steps, scope)?[0])
    })
    .into_iter()
    .enumerate()
    .map(|(index, r)| r.map_err(|e| Error::Realization { index, source: Box::new(e) }))
    .collect::<Result<Vec<_>>>()?;
    BlpResult::from_sums(sums, n_steps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{IsingParams, LindbladSpec, StepKernel};
    use crate::linalg::matrix::C64;
    use crate::linalg::random_orthogonal_pair;
    use crate::reservoirs::{EmbeddedReservoir, MarkovReservoir};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};
    use std::sync::Arc;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn kernel(n: usize, gamma: f64, dt: f64, seed: u64) -> Arc<StepKernel> {
        let spec = LindbladSpec::new(IsingParams::sample(n, 1.0, seed).unwrap(), gamma).unwrap();
        Arc::new(StepKernel::new(spec, dt).unwrap())
    }

    fn orthogonal_pair(dim: usize, seed: u64) -> (DensityMatrix, DensityMatrix) {
        let (a, b) = random_orthogonal_pair(dim, &mut rng(seed));
        (DensityMatrix::pure(&a).unwrap(), DensityMatrix::pure(&b).unwrap())
    }

    #[test]
    fn trace_distance_reference_values() {
        let mut r = rng(1);
        let rho = DensityMatrix::random_full_rank(4, &mut r);
        assert!(trace_distance(&rho, &rho).unwrap() < 1e-15);
        let (a, b) = orthogonal_pair(4, 2);
        assert!((trace_distance(&a, &b).unwrap() - 1.0).abs() < 1e-12);
        let zero = DensityMatrix::basis(2, 0).unwrap();
        let plus = DensityMatrix::pure(&[C64::new(FRAC_1_SQRT_2, 0.0); 2]).unwrap();
        // The difference has eigenvalues +-1/sqrt(2): a direct 2x2 solve.
        let d = zero.matrix() - plus.matrix();
        let (p, q, s) = (d[(0, 0)].re, d[(1, 1)].re, d[(0, 1)].norm());
        let half_gap = (((p - q) / 2.0).powi(2) + s * s).sqrt();
        let eig = [(p + q) / 2.0 + half_gap, (p + q) / 2.0 - half_gap];
        let oracle = 0.5 * (eig[0].abs() + eig[1].abs());
        assert!((oracle - FRAC_1_SQRT_2).abs() < 1e-12);
        assert!((trace_distance(&zero, &plus).unwrap() - oracle).abs() < 1e-12);
        assert!(trace_distance(&zero, &DensityMatrix::maximally_mixed(4)).is_err());
    }

    #[test]
    fn trace_distance_is_a_metric() {
        let mut r = rng(3);
        for _ in 0..100 {
            let a = DensityMatrix::random_full_rank(4, &mut r);
            let b = DensityMatrix::random_full_rank(4, &mut r);
            let c = DensityMatrix::random_full_rank(4, &mut r);
            let ab = trace_distance(&a, &b).unwrap();
            assert_eq!(ab, trace_distance(&b, &a).unwrap());
            assert!((0.0..=1.0).contains(&ab));
            let ac = trace_distance(&a, &c).unwrap();
            let cb = trace_distance(&c, &b).unwrap();
            assert!(ab <= ac + cb + 1e-12);
        }
    }

    #[test]
    fn positive_increments_examples() {
        assert_eq!(positive_increments(&[1.0, 0.5, 0.7, 0.6, 0.9]), 0.2 + 0.30000000000000004);
        assert_eq!(positive_increments(&[0.3]), 0.0);
    }

    #[test]
    fn markov_dynamics_is_contractive() {
        let k = kernel(3, 0.1, 0.5, 4);
        let (a, b) = orthogonal_pair(8, 5);
        let mut models = vec![MarkovReservoir::new(k.clone(), a).unwrap(), MarkovReservoir::new(k, b).unwrap()];
        let mut r = rng(6);
        let xs: Vec<f64> = (0..300).map(|_| r.gen()).collect();
        let d = pair_distance_trajectories(&mut models, &xs, 300, DistanceScope::Reservoir).unwrap();
        for w in d[0].windows(2) {
            assert!(w[1] <= w[0] + 1e-10);
        }
        assert!(positive_increments(&d[0]) <= 1e-10);
    }

    #[test]
    fn unitary_steps_preserve_distance() {
        let k = kernel(2, 0.0, 0.7, 7);
        let (a, b) = orthogonal_pair(4, 8);
        let mut models = vec![MarkovReservoir::new(k.clone(), a).unwrap(), MarkovReservoir::new(k, b).unwrap()];
        let xs = vec![0.3; 50];
        let d = pair_distance_trajectories(&mut models, &xs, 50, DistanceScope::Reservoir).unwrap();
        assert!(d[0].iter().all(|v| (v - 1.0).abs() < 1e-10));
    }

    fn embedded_pair(omega: f64, seed: u64) -> Result<([EmbeddedReservoir; 2], Vec<f64>)> {
        let k = kernel(2, 0.1, 0.5, seed);
        let (a, b) = orthogonal_pair(4, seed + 1);
        let mut r = rng(seed + 2);
        let xs: Vec<f64> = (0..200).map(|_| r.gen()).collect();
        Ok((
            [
                EmbeddedReservoir::new(k.clone(), FRAC_PI_4, omega, a)?,
                EmbeddedReservoir::new(k, FRAC_PI_4, omega, b)?,
            ],
            xs,
        ))
    }

    #[test]
    fn fully_depolarized_embedding_is_markovian() {
        let res = blp_measure(|i| embedded_pair(1.0, 10 + i as u64), 3, 200, DistanceScope::Reservoir, Execution::Sequential)
            .unwrap();
        assert!(res.measure <= 1e-10, "{}", res.measure);
    }

    #[test]
    fn undepolarized_embedding_shows_backflow() {
        let res = blp_measure(|i| embedded_pair(0.0, 20 + i as u64), 3, 200, DistanceScope::Reservoir, Execution::Sequential)
            .unwrap();
        assert!(res.measure > 1e-3);
        assert_eq!(res.n_pairs, 3);
        assert!(res.per_pair_sums.iter().all(|&s| s <= res.measure));
    }

    #[test]
    fn joint_distance_is_contractive() {
        let ([a, b], xs) = embedded_pair(0.0, 30).unwrap();
        let mut models = vec![a, b];
        let sums = pair_sums(&mut models, &xs, 100, DistanceScope::Joint).unwrap();
        assert!(sums[0] <= 1e-10);
    }

    #[test]
    fn rejects_degenerate_arguments() {
        assert!(blp_measure(|i| embedded_pair(1.0, i as u64), 0, 10, DistanceScope::Reservoir, Execution::Sequential).is_err());
        assert!(blp_measure(|i| embedded_pair(1.0, i as u64), 1, 0, DistanceScope::Reservoir, Execution::Sequential).is_err());
    }

    #[test]
    fn median_of_sums() {
        let r = BlpResult::from_sums(vec![3.0, 1.0, 2.0, 10.0], 5).unwrap();
        assert_eq!(r.median(), 2.5);
        assert_eq!(r.measure, 10.0);
    }
}
