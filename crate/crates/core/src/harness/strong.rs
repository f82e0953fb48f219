// SPDX-License-Identifier: Apache-2.0

use nalgebra::DVector;

use super::reference::ExactReference;
use crate::error::Result;
use crate::gallery::ProblemInstance;
use crate::oracle::OdeOptions;
use crate::par::Execution;
use crate::rng::SplitMix64;
use crate::schemes::{assemble, matrix_power, Scheme};

/// `‖T(t/n)ⁿx - e^{-t𝒞}x‖` for `samples` random unit vectors `x`.
///
/// Returns one row per vector, one column per entry of `n_list`.
pub fn strong_errors(
    p: &ProblemInstance,
    t: f64,
    n_list: &[u64],
    samples: usize,
    seed: u64,
    exec: Execution,
) -> Result<Vec<Vec<f64>>> {
    let reference = ExactReference::compute(p, t, OdeOptions::default())?;
    let (n1, n2) = p.dims();
    let mut rng = SplitMix64::new(seed);
    let vectors: Vec<DVector<f64>> = (0..samples)
        .map(|_| {
            let v = DVector::from_fn(n1 + n2, |_, _| rng.next_symmetric());
            let norm = v.norm();
            v / norm
        })
        .collect();
    let exact: Vec<DVector<f64>> = vectors.iter().map(|x| &reference.semigroup * x).collect();
    let columns = exec.map(n_list, |&n| -> Result<Vec<f64>> {
        let step = assemble(p, Scheme::Ao, t / n as f64)?.operator.flatten();
        let power = matrix_power(&step, n);
        Ok(vectors
            .iter()
            .zip(&exact)
            .map(|(x, e)| (&power * x - e).norm())
            .collect())
    });
    let columns = columns.into_iter().collect::<Result<Vec<_>>>()?;
    Ok((0..samples)
        .map(|i| columns.iter().map(|c| c[i]).collect())
        .collect())
}
