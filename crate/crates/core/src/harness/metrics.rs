use serde::{Deserialize, Serialize};

use super::TrialResult;
use crate::error::{Error, Result};

pub fn success_rate(results: &[TrialResult]) -> Result<f64> {
    if results.is_empty() {
        return Err(Error::InvalidArgument("success rate of an empty result list".into()));
    }
    let hits = results.iter().filter(|r| r.success).count();
    Ok(hits as f64 / results.len() as f64)
}

/// Mean evaluations of the successful trials divided by the success rate;
/// `None` when no trial succeeded.
pub fn sp1(results: &[TrialResult]) -> Result<Option<f64>> {
    let rate = success_rate(results)?;
    let evals: Vec<u64> = results.iter().filter_map(|r| r.evals_to_target).collect();
    if evals.is_empty() {
        return Ok(None);
    }
    let mean = evals.iter().map(|&e| e as f64).sum::<f64>() / evals.len() as f64;
    Ok(Some(mean / rate))
}

/// Target grid and budget of an ECDF over `n_trials · n_targets` pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EcdfSpec {
    pub n_targets: usize,
    pub n_trials: usize,
    pub max_evals: u64,
}

impl Default for EcdfSpec {
    fn default() -> Self {
        Self {
            n_targets: 30,
            n_trials: 20,
            max_evals: 1_000_000,
        }
    }
}

impl EcdfSpec {
    /// `10^{6 − 9(i−1)/(n−1)}` for `i = 1..n`, from `10⁶` down to `10⁻³`.
    pub fn targets(&self) -> Vec<f64> {
        let n = self.n_targets;
        if n == 1 {
            return vec![1e6];
        }
        (0..n)
            .map(|i| 10f64.powf(6.0 - 9.0 * i as f64 / (n - 1) as f64))
            .collect()
    }
}

/// First evaluation count at which `best_so_far` reaches each target.
pub fn first_hits(best_so_far: &[(u64, f64)], targets: &[f64]) -> Vec<Option<u64>> {
    targets
        .iter()
        .map(|&target| best_so_far.iter().find(|(_, f)| *f <= target).map(|(e, _)| *e))
        .collect()
}

/// Step function from evaluation budget to fraction of (trial, target) pairs
/// reached.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EcdfCurve {
    /// `(evals, fraction)` breakpoints, ascending in both coordinates.
    pub points: Vec<(u64, f64)>,
}

impl EcdfCurve {
    pub fn fraction_at(&self, evals: u64) -> f64 {
        self.points
            .iter()
            .take_while(|(e, _)| *e <= evals)
            .last()
            .map_or(0.0, |(_, f)| *f)
    }

    pub fn final_fraction(&self) -> f64 {
        self.points.last().map_or(0.0, |(_, f)| *f)
    }
}

/// ECDF over the best-so-far traces of a set of trials. Hits after
/// `spec.max_evals` are ignored; the curve always ends at `spec.max_evals`.
pub fn ecdf(histories: &[Vec<(u64, f64)>], spec: &EcdfSpec) -> EcdfCurve {
    let targets = spec.targets();
    let total = (histories.len() * targets.len()) as f64;
    let mut hits: Vec<u64> = histories
        .iter()
        .flat_map(|h| first_hits(h, &targets))
        .flatten()
        .filter(|&e| e <= spec.max_evals)
        .collect();
    hits.sort_unstable();

    let mut points = vec![(0, 0.0)];
    if total > 0.0 {
        for (i, &e) in hits.iter().enumerate() {
            let frac = (i + 1) as f64 / total;
            match points.last_mut() {
                Some(last) if last.0 == e => last.1 = frac,
                _ => points.push((e, frac)),
            }
        }
    }
    if points.last().map(|p| p.0) != Some(spec.max_evals) {
        let last = points.last().map_or(0.0, |p| p.1);
        points.push((spec.max_evals, last));
    }
    EcdfCurve { points }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::Termination;
    use proptest::prelude::*;

    fn result(evals: Option<u64>) -> TrialResult {
        TrialResult {
            seed: 0,
            success: evals.is_some(),
            evals_to_target: evals,
            evaluations: evals.unwrap_or(10_000),
            termination: if evals.is_some() {
                Termination::TargetHit
            } else {
                Termination::BudgetExhausted
            },
            reason: None,
            history: Vec::new(),
            best_so_far: Vec::new(),
            best_noiseless_fm: 0.0,
            invariant_violations: Vec::new(),
            floor_activations: 0,
        }
    }

    #[test]
    fn success_rates() {
        assert!(success_rate(&[]).is_err());
        assert_eq!(success_rate(&[result(Some(1)), result(Some(2))]).unwrap(), 1.0);
        assert_eq!(success_rate(&[result(None), result(None)]).unwrap(), 0.0);
        let half: Vec<_> = (0..30).map(|i| result((i < 15).then_some(5))).collect();
        assert_eq!(success_rate(&half).unwrap(), 0.5);
    }

    #[test]
    fn sp1_values() {
        assert_eq!(sp1(&[result(Some(1000)), result(Some(1000))]).unwrap(), Some(1000.0));
        assert_eq!(
            sp1(&[result(Some(500)), result(Some(1500)), result(None), result(None)]).unwrap(),
            Some(2000.0)
        );
        assert_eq!(sp1(&[result(None)]).unwrap(), None);
        assert!(sp1(&[]).is_err());
    }

    #[test]
    fn targets_span_grid() {
        let t = EcdfSpec::default().targets();
        assert_eq!(t.len(), 30);
        assert!((t[0] - 1e6).abs() < 1e-6);
        assert!((t[29] - 1e-3).abs() < 1e-15);
        assert!(t.windows(2).all(|w| w[0] > w[1]));
    }

    #[test]
    fn ecdf_edge_cases() {
        let spec = EcdfSpec {
            n_targets: 30,
            n_trials: 1,
            max_evals: 1000,
        };
        let never = vec![vec![(0u64, 1e7)]];
        let c = ecdf(&never, &spec);
        assert!(c.points.iter().all(|p| p.1 == 0.0));

        let always = vec![vec![(0u64, 1e-4)], vec![(0u64, 0.0)]];
        let c = ecdf(&always, &spec);
        assert_eq!(c.fraction_at(0), 1.0);
        assert_eq!(c.final_fraction(), 1.0);
    }

    #[test]
    fn ecdf_half_targets() {
        let spec = EcdfSpec {
            n_targets: 30,
            n_trials: 1,
            max_evals: 10_000,
        };
        let targets = spec.targets();
        // reach targets 1..15 exactly, one per 100 evaluations
        let trace: Vec<(u64, f64)> = (0..15).map(|i| ((i as u64 + 1) * 100, targets[i])).collect();
        let c = ecdf(&[trace], &spec);
        assert!((c.final_fraction() - 0.5).abs() < 1e-15);
        assert!((c.fraction_at(750) - 7.0 / 30.0).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn ecdf_monotone_and_bounded(
            traces in proptest::collection::vec(
                proptest::collection::vec((1u64..5000, -8.0f64..7.0), 1..20), 1..6)
        ) {
            // turn random points into nonincreasing best-so-far traces
            let histories: Vec<Vec<(u64, f64)>> = traces.into_iter().map(|mut pts| {
                pts.sort_by_key(|p| p.0);
                let mut best = f64::INFINITY;
                pts.into_iter().map(|(e, lf)| { best = best.min(10f64.powf(lf)); (e, best) }).collect()
            }).collect();
            let spec = EcdfSpec { n_targets: 30, n_trials: histories.len(), max_evals: 4000 };
            let c = ecdf(&histories, &spec);
            prop_assert!(c.points.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 <= w[1].1));
            prop_assert!(c.points.iter().all(|p| (0.0..=1.0).contains(&p.1)));
        }
    }
}
