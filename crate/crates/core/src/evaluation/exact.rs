use super::{Decomposition, ErrorReport};
use crate::bell::{fidelity, PauliBasis};
use crate::error::{domain, Error, Result};
use crate::noise::MixtureOfProducts;
use crate::protocol::{clustered_block_sizes, estimate_from_counts, ProtocolKind};

/// Upper limit on `C(N, M)·3^M·2^M` for exhaustive evaluation.
pub const EXACT_WORK_LIMIT: u128 = 10_000_000;

/// `C(n, k)`, or `None` on overflow.
pub(super) fn binomial(n: usize, k: usize) -> Option<u128> {
    let k = k.min(n - k);
    (0..k).try_fold(1u128, |acc, i| {
        Some(acc.checked_mul((n - i) as u128)? / (i + 1) as u128)
    })
}

/// Calls `f` with every increasing `m`-subset of `0..n` in lexicographic order.
pub(super) fn for_each_subset(
    n: usize,
    m: usize,
    mut f: impl FnMut(&[usize]) -> Result<()>,
) -> Result<()> {
    let mut idx: Vec<usize> = (0..m).collect();
    loop {
        f(&idx)?;
        let Some(i) = (0..m).rev().find(|&i| idx[i] != i + n - m) else {
            return Ok(());
        };
        idx[i] += 1;
        for j in i + 1..m {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Exact expected error by enumerating every sample set, basis assignment,
/// mixture component and outcome bitstring.
///
/// Standard errors in the returned report are zero and `trials` is zero.
pub fn exact_error(model: &MixtureOfProducts, m: usize, kind: ProtocolKind) -> Result<ErrorReport> {
    let n = model.n_pairs();
    if m < 1 || m >= n {
        return Err(domain(format!(
            "sample size must satisfy 1 <= m < n_pairs, got m = {m}, n_pairs = {n}"
        )));
    }
    let required = binomial(n, m)
        .and_then(|x| x.checked_mul(3u128.checked_pow(m as u32)?))
        .and_then(|x| x.checked_mul(1u128.checked_shl(m as u32)?))
        .unwrap_or(u128::MAX);
    if m >= 64 || required > EXACT_WORK_LIMIT {
        return Err(Error::Capacity {
            required,
            limit: EXACT_WORK_LIMIT,
        });
    }

    // Basis assignments with their probabilities.
    let assignments: Vec<(Vec<PauliBasis>, f64)> = if kind.randomizes_bases() {
        let total = 3usize.pow(m as u32);
        let p = 1.0 / total as f64;
        (0..total)
            .map(|mut code| {
                let bases = (0..m)
                    .map(|_| {
                        let b = PauliBasis::ALL[code % 3];
                        code /= 3;
                        b
                    })
                    .collect();
                (bases, p)
            })
            .collect()
    } else {
        let (x, y, _) = clustered_block_sizes(m);
        let bases = (0..m)
            .map(|i| match i {
                i if i < x => PauliBasis::X,
                i if i < x + y => PauliBasis::Y,
                _ => PauliBasis::Z,
            })
            .collect();
        vec![(bases, 1.0)]
    };

    let comps = model.components();
    let weights = model.weights();
    let single = model.is_single_component();
    let rest = (n - m) as f64;

    let mut sq_sum = 0.0;
    let mut dev_sum = 0.0;
    let mut meas_sum = 0.0;
    let mut samp_sum = 0.0;
    let mut subsets = 0u64;

    let mut likelihood = vec![0.0; comps.len()];
    for_each_subset(n, m, |sample| {
        subsets += 1;
        let unsampled: Vec<f64> = comps
            .iter()
            .map(|c| {
                let s: f64 = sample.iter().map(|&i| fidelity(&c.states()[i])).sum();
                (c.fidelity_sum() - s) / rest
            })
            .collect();
        let sampled_mean = if single {
            let c = &comps[0];
            sample
                .iter()
                .map(|&i| fidelity(&c.states()[i]))
                .sum::<f64>()
                / m as f64
        } else {
            0.0
        };
        if single {
            samp_sum += (sampled_mean - unsampled[0]).powi(2);
        }

        let (mut sq, mut dev, mut meas) = (0.0, 0.0, 0.0);
        for (bases, p_assign) in &assignments {
            let mut counts = [0usize; 3];
            for b in bases {
                counts[b.index()] += 1;
            }
            let q: Vec<Vec<f64>> = comps
                .iter()
                .map(|c| {
                    sample
                        .iter()
                        .zip(bases)
                        .map(|(&i, &b)| c.match_prob(i, b))
                        .collect()
                })
                .collect();
            for mask in 0u64..(1u64 << m) {
                let mut hits = [0usize; 3];
                for (j, b) in bases.iter().enumerate() {
                    if mask >> j & 1 == 1 {
                        hits[b.index()] += 1;
                    }
                }
                for (k, lk) in likelihood.iter_mut().enumerate() {
                    *lk = weights[k]
                        * q[k]
                            .iter()
                            .enumerate()
                            .map(|(j, q)| if mask >> j & 1 == 1 { *q } else { 1.0 - q })
                            .product::<f64>();
                }
                let p_outcome: f64 = likelihood.iter().sum();
                if p_outcome == 0.0 {
                    continue;
                }
                let target: f64 = likelihood
                    .iter()
                    .zip(&unsampled)
                    .map(|(l, u)| l / p_outcome * u)
                    .sum();
                let est = estimate_from_counts(kind, counts, hits);
                let w = p_assign * p_outcome;
                sq += w * (est - target).powi(2);
                dev += w * (est - target);
                if single {
                    meas += w * (est - sampled_mean).powi(2);
                }
            }
        }
        sq_sum += sq;
        dev_sum += dev;
        meas_sum += meas;
        Ok(())
    })?;

    let count = subsets as f64;
    let analytic_bound = if single && model.is_werner() {
        Some(super::error_lower_bound(&comps[0].fidelities(), m)?)
    } else {
        None
    };
    let decomposition = single.then(|| Decomposition {
        measurement_error: meas_sum / count,
        measurement_stderr: 0.0,
        sampling_error: samp_sum / count,
        reconciliation_stderr: 0.0,
    });
    Ok(ErrorReport {
        mse: sq_sum / count,
        mse_stderr: 0.0,
        bias: dev_sum / count,
        bias_stderr: 0.0,
        trials: 0,
        analytic_bound,
        decomposition,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::iid_model;
    use approx::assert_abs_diff_eq;

    #[test]
    fn subsets_enumerated_in_order() {
        let mut seen = Vec::new();
        for_each_subset(4, 2, |s| {
            seen.push(s.to_vec());
            Ok(())
        })
        .unwrap();
        assert_eq!(
            seen,
            vec![
                vec![0, 1],
                vec![0, 2],
                vec![0, 3],
                vec![1, 2],
                vec![1, 3],
                vec![2, 3]
            ]
        );
        assert_eq!(binomial(1000, 500), None);
        assert_eq!(binomial(6, 3), Some(20));
    }

    #[test]
    fn singlets_and_single_werner_pair() {
        let r = exact_error(&iid_model(0.0, 2).unwrap(), 1, ProtocolKind::Proposed).unwrap();
        assert_eq!(r.mse, 0.0);
        // f = 0.625, M = 1: (2f + 1)(1 − f)/2.
        let r = exact_error(&iid_model(0.5, 2).unwrap(), 1, ProtocolKind::Proposed).unwrap();
        assert_abs_diff_eq!(r.mse, 0.421875, epsilon = 1e-14);
        assert_abs_diff_eq!(r.bias, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(r.analytic_bound.unwrap(), 0.421875, epsilon = 1e-14);
    }

    #[test]
    fn refuses_large_instances() {
        let model = iid_model(0.5, 40).unwrap();
        assert!(matches!(
            exact_error(&model, 20, ProtocolKind::Proposed),
            Err(Error::Capacity { .. })
        ));
    }
}
