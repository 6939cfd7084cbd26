use rayon::prelude::*;

use super::exact::{binomial, for_each_subset};
use super::{
    error_lower_bound, normalize_log_weights, target_from_posterior, Decomposition, ErrorReport,
};
use crate::bell::fidelity;
use crate::error::{domain, Result};
use crate::noise::MixtureOfProducts;
use crate::protocol::{
    assign_bases, draw_sample_set, estimate, simulate_measurement, ProtocolKind,
};
use crate::rng::trial_rng;

/// Trials per work item. Fixed so that the reduction order, and therefore
/// every floating-point sum, is independent of the thread count.
const BATCH: u64 = 512;

/// Running mean and second central moment (Welford, merged with Chan's rule).
#[derive(Debug, Clone, Copy, Default)]
struct Stat {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Stat {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Stat) -> Stat {
        if self.n == 0 {
            return other;
        }
        if other.n == 0 {
            return self;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        Stat {
            n,
            mean: self.mean + delta * other.n as f64 / n as f64,
            m2: self.m2 + other.m2 + delta * delta * (self.n as f64 * other.n as f64) / n as f64,
        }
    }

    /// Sample standard deviation over `√n`; zero for fewer than two samples.
    fn stderr(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        (self.m2 / (self.n - 1) as f64).sqrt() / (self.n as f64).sqrt()
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Accum {
    deviation: Stat,
    squared: Stat,
    measurement: Stat,
    reconciliation: Stat,
}

impl Accum {
    fn merge(self, o: Accum) -> Accum {
        Accum {
            deviation: self.deviation.merge(o.deviation),
            squared: self.squared.merge(o.squared),
            measurement: self.measurement.merge(o.measurement),
            reconciliation: self.reconciliation.merge(o.reconciliation),
        }
    }
}

/// Deviation of one simulated trial and, for single-component models, its
/// deviation from the sampled mean.
fn run_trial(
    model: &MixtureOfProducts,
    m: usize,
    kind: ProtocolKind,
    seed: u64,
    trial: u64,
) -> Result<(f64, Option<f64>)> {
    let mut rng = trial_rng(seed, trial);
    let sample = draw_sample_set(model.n_pairs(), m, &mut rng)?;
    let bases = assign_bases(&sample, kind, &mut rng);
    let (_, outcome) = simulate_measurement(model, &sample, &bases, &mut rng)?;
    let est = estimate(&outcome, kind)?;
    if model.is_single_component() {
        let comp = &model.components()[0];
        let sampled: f64 = sample
            .indices()
            .iter()
            .map(|&n| fidelity(&comp.states()[n]))
            .sum();
        let target = (comp.fidelity_sum() - sampled) / (model.n_pairs() - m) as f64;
        let sampled_mean = sampled / m as f64;
        Ok((est - target, Some(est - sampled_mean)))
    } else {
        let logs: Vec<f64> = model
            .components()
            .iter()
            .map(|c| {
                outcome.records().fold(c.weight().ln(), |acc, (n, b, r)| {
                    acc + c.log_likelihood(n, b, r)
                })
            })
            .collect();
        let post = normalize_log_weights(&logs)?;
        Ok((est - target_from_posterior(model, &outcome, &post), None))
    }
}

/// Mean squared deviation of the estimate from the conditional target.
///
/// Trial `t` draws from the stream `trial_rng(seed, t)`, so the report depends
/// only on the arguments. Work runs on the current rayon pool.
pub fn monte_carlo_error(
    model: &MixtureOfProducts,
    m: usize,
    kind: ProtocolKind,
    trials: u64,
    seed: u64,
) -> Result<ErrorReport> {
    if trials < 1 {
        return Err(domain("trials must be at least 1"));
    }
    let n = model.n_pairs();
    if m < 1 || m >= n {
        return Err(domain(format!(
            "sample size must satisfy 1 <= m < n_pairs, got m = {m}, n_pairs = {n}"
        )));
    }
    let batches = trials.div_ceil(BATCH);
    let partials: Vec<Accum> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut acc = Accum::default();
            for t in b * BATCH..((b + 1) * BATCH).min(trials) {
                let (dev, meas) = run_trial(model, m, kind, seed, t)?;
                acc.deviation.push(dev);
                acc.squared.push(dev * dev);
                if let Some(md) = meas {
                    acc.measurement.push(md * md);
                    acc.reconciliation.push(dev * dev - md * md);
                }
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;
    let acc = partials.into_iter().fold(Accum::default(), Accum::merge);

    let single = model.is_single_component();
    let analytic_bound = if single && model.is_werner() {
        Some(error_lower_bound(&model.components()[0].fidelities(), m)?)
    } else {
        None
    };
    let decomposition = if single {
        Some(Decomposition {
            measurement_error: acc.measurement.mean,
            measurement_stderr: acc.measurement.stderr(),
            sampling_error: sampling_error(&model.components()[0].fidelities(), m)?,
            reconciliation_stderr: acc.reconciliation.stderr(),
        })
    } else {
        None
    };
    Ok(ErrorReport {
        mse: acc.squared.mean,
        mse_stderr: acc.squared.stderr(),
        bias: acc.deviation.mean,
        bias_stderr: acc.deviation.stderr(),
        trials,
        analytic_bound,
        decomposition,
    })
}

/// Measurement and sampling parts of the error under independent noise.
pub fn error_decomposition(
    model: &MixtureOfProducts,
    m: usize,
    kind: ProtocolKind,
    trials: u64,
    seed: u64,
) -> Result<Decomposition> {
    if !model.is_single_component() {
        return Err(domain(
            "error decomposition requires independent (single-component) noise",
        ));
    }
    let report = monte_carlo_error(model, m, kind, trials, seed)?;
    Ok(report
        .decomposition
        .expect("single-component reports carry a decomposition"))
}

/// Subset counts up to this are averaged directly in [`sampling_error`].
const ENUMERATION_LIMIT: u128 = 100_000;

/// Mean of `(f̄_M − f̄)²` over all `M`-subsets, where `f̄_M` is the sampled
/// mean and `f̄` the unsampled mean.
///
/// Small instances are averaged subset by subset. Otherwise
/// `f̄_M − f̄ = N(f̄_M − μ)/(N − M)` and the sampled mean of a simple random
/// sample without replacement has variance `σ²(N − M)/(M(N − 1))`, so the
/// result is `N²σ² / ((N − M)·M·(N − 1))` with `σ²` the population variance.
pub fn sampling_error(fidelities: &[f64], m: usize) -> Result<f64> {
    let n = fidelities.len();
    if m < 1 || m >= n {
        return Err(domain(format!(
            "sample size must satisfy 1 <= m < N, got m = {m}, N = {n}"
        )));
    }
    if fidelities.iter().all(|f| *f == fidelities[0]) {
        return Ok(0.0);
    }
    if binomial(n, m).is_some_and(|c| c <= ENUMERATION_LIMIT) {
        let mut in_sample = vec![false; n];
        let mut total = 0.0;
        let mut count = 0u64;
        for_each_subset(n, m, |subset| {
            in_sample.iter_mut().for_each(|x| *x = false);
            subset.iter().for_each(|&i| in_sample[i] = true);
            let (mut sampled, mut rest) = (0.0, 0.0);
            for (f, &s) in fidelities.iter().zip(&in_sample) {
                if s {
                    sampled += f;
                } else {
                    rest += f;
                }
            }
            let diff = sampled / m as f64 - rest / (n - m) as f64;
            total += diff * diff;
            count += 1;
            Ok(())
        })?;
        return Ok(total / count as f64);
    }
    let nf = n as f64;
    let mean = fidelities.iter().sum::<f64>() / nf;
    let var = fidelities.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / nf;
    Ok(nf * nf * var / ((nf - m as f64) * m as f64 * (nf - 1.0)))
}
