//! Turnbull's self-consistent estimator for doubly censored data, and the
//! check that it sits between the Model I and Model II product limits.
//!
//! Labels: 0 exact (`L < T ≤ R`), 1 right-censored (`R < T`), 2 left-censored (`T ≤ L`).
//! Mass lives on the exact observation times plus, when some right-censored
//! time is not followed by an exact one, a single atom at `+∞`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{ModelOneFit, ModelTwoFit};
use crate::measures::{union_grid, MonotoneStepFunction, Orientation};
use crate::sample::{validate_for_model, GroupedSample, Model};

pub const DEFAULT_TOLERANCE: f64 = 1e-10;
pub const DEFAULT_MAX_ITERATIONS: usize = 10_000;
/// Step sizes at this level are rounding noise; the contraction ratio is meaningless there.
const NOISE_FLOOR: f64 = 4.0 * f64::EPSILON;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Initialization {
    #[default]
    Uniform,
    /// proportional to the exact counts; the atom at infinity gets the right-censored count
    Empirical,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TurnbullOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub init: Initialization,
}

impl Default for TurnbullOptions {
    fn default() -> Self {
        Self { tolerance: DEFAULT_TOLERANCE, max_iterations: DEFAULT_MAX_ITERATIONS, init: Initialization::Uniform }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TurnbullFit {
    /// support points; the last one may be `+∞`
    pub support: Vec<f64>,
    pub masses: Vec<f64>,
    pub iterations: usize,
    /// sup-norm gap between `masses` and one more self-consistency step
    pub residual: f64,
    pub converged: bool,
    pub sample_size: usize,
    /// sup-norm change of each step, in order
    pub trace: Vec<f64>,
}

impl TurnbullFit {
    pub fn mass_at_infinity(&self) -> f64 {
        match self.support.last() {
            Some(&t) if t == f64::INFINITY => *self.masses.last().unwrap(),
            _ => 0.0,
        }
    }

    /// `F([0, t])` on the finite support points.
    pub fn cdf(&self) -> MonotoneStepFunction {
        let mut acc = 0.0;
        let mut grid = Vec::with_capacity(self.support.len());
        let mut values = Vec::with_capacity(self.support.len());
        for (&t, &m) in self.support.iter().zip(&self.masses) {
            if t.is_finite() {
                acc += m;
                grid.push(t);
                values.push(acc.min(1.0));
            }
        }
        MonotoneStepFunction::new(grid, values, Orientation::Cdf, 0.0).expect("cumulative masses are monotone")
    }
}

/// The censoring pattern of a sample laid out against the support.
struct Layout {
    n: f64,
    support: Vec<f64>,
    has_inf: bool,
    exact: Vec<f64>,
    // (support index bound, count): left-censored at l sees support[..bound]
    left: Vec<(usize, f64)>,
    // (first support index strictly after r, count)
    right: Vec<(usize, f64)>,
}

impl Layout {
    fn new(g: &GroupedSample) -> Result<Self> {
        let z = g.z();
        let (d0, d1, d2) = (g.d(0), g.d(1), g.d(2));
        let mut support = Vec::new();
        let mut exact = Vec::new();
        for j in 0..g.len() {
            if d0[j] > 0 {
                support.push(z[j]);
                exact.push(d0[j] as f64);
            }
        }
        let last_exact = support.last().copied();
        let has_inf = (0..g.len()).any(|j| d1[j] > 0 && last_exact.is_none_or(|t| z[j] >= t));
        let finite = support.len();
        if has_inf {
            support.push(f64::INFINITY);
            exact.push(0.0);
        }

        let mut left = Vec::new();
        let mut right = Vec::new();
        for j in 0..g.len() {
            if d2[j] > 0 {
                let bound = support[..finite].partition_point(|&s| s <= z[j]);
                if bound == 0 {
                    return Err(Error::DegenerateSupport(format!(
                        "left-censored observation at {} has no support point at or below it",
                        z[j]
                    )));
                }
                left.push((bound, d2[j] as f64));
            }
            if d1[j] > 0 {
                let first = support[..finite].partition_point(|&s| s <= z[j]);
                if first == support.len() {
                    return Err(Error::DegenerateSupport(format!(
                        "right-censored observation at {} has no support above it",
                        z[j]
                    )));
                }
                right.push((first, d1[j] as f64));
            }
        }
        Ok(Self { n: g.n() as f64, support, has_inf, exact, left, right })
    }

    fn initial(&self, init: Initialization) -> Vec<f64> {
        let k = self.support.len();
        match init {
            Initialization::Uniform => vec![1.0 / k as f64; k],
            Initialization::Empirical => {
                let mut w = self.exact.clone();
                if self.has_inf {
                    *w.last_mut().unwrap() = self.right.iter().map(|r| r.1).sum();
                }
                let total: f64 = w.iter().sum();
                w.iter().map(|x| x / total).collect()
            }
        }
    }

    /// One self-consistency step.
    fn step(&self, f: &[f64]) -> Vec<f64> {
        let k = f.len();
        let mut prefix = vec![0.0; k + 1];
        for i in 0..k {
            prefix[i + 1] = prefix[i] + f[i];
        }
        let mut suffix = vec![0.0; k + 1];
        for i in (0..k).rev() {
            suffix[i] = suffix[i + 1] + f[i];
        }
        // left-censored at l shares its unit over support points ≤ l
        let mut left_w = vec![0.0; k + 1];
        for &(bound, c) in &self.left {
            left_w[bound - 1] += c / prefix[bound];
        }
        // right-censored at r shares over support points > r
        let mut right_w = vec![0.0; k + 1];
        for &(first, c) in &self.right {
            right_w[first] += c / suffix[first];
        }
        let mut out = vec![0.0; k];
        let mut left_acc = 0.0;
        for i in (0..k).rev() {
            left_acc += left_w[i];
            out[i] = left_acc;
        }
        let mut right_acc = 0.0;
        for i in 0..k {
            right_acc += right_w[i];
            out[i] = (self.exact[i] + f[i] * (out[i] + right_acc)) / self.n;
        }
        out
    }
}

fn sup_change(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |acc, (x, y)| acc.max((x - y).abs()))
}

/// Runs the self-consistency iteration from the chosen start until successive
/// iterates differ by less than `tolerance` in sup norm and the distance to
/// the fixed point, extrapolated from the contraction ratio of the last two
/// steps, is below `tolerance` as well.
pub fn fit_turnbull(g: &GroupedSample, options: TurnbullOptions) -> Result<TurnbullFit> {
    if !(options.tolerance > 0.0) {
        return Err(Error::Domain("tolerance must be positive".into()));
    }
    let report = validate_for_model(g, Model::Turnbull);
    if !report.is_ok() {
        let list: Vec<String> = report.violations.iter().map(ToString::to_string).collect();
        return Err(Error::ModelViolation(list.join("; ")));
    }
    let layout = Layout::new(g)?;
    if layout.support.is_empty() {
        return Err(Error::DegenerateSupport("no exact observations and no right-censoring".into()));
    }
    let mut current = layout.initial(options.init);
    let mut trace = Vec::new();
    let mut iterations = 0;
    loop {
        let next = layout.step(&current);
        let residual = sup_change(&next, &current);
        let done = residual < options.tolerance
            && (residual <= NOISE_FLOOR
                || trace.last().is_some_and(|&prev: &f64| {
                    let rho = residual / prev;
                    rho < 1.0 && residual / (1.0 - rho) < options.tolerance
                }));
        trace.push(residual);
        if done || iterations >= options.max_iterations {
            return Ok(TurnbullFit {
                support: layout.support,
                masses: current,
                iterations,
                residual,
                converged: done,
                sample_size: g.n(),
                trace,
            });
        }
        current = next;
        iterations += 1;
    }
}

/// Sup-norm distance between `f.masses` and one application of the self-consistency map.
pub fn self_consistency_residual(g: &GroupedSample, f: &TurnbullFit) -> Result<f64> {
    let layout = Layout::new(g)?;
    if layout.support != f.support || f.masses.len() != f.support.len() {
        return Err(Error::Domain("fit support does not match the sample".into()));
    }
    Ok(sup_change(&layout.step(&f.masses), &f.masses))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BoundsReport {
    pub grid: Vec<f64>,
    /// `max_t (F^I([0, t]) − F([0, t]))⁺`
    pub max_lower_violation: f64,
    /// `max_t (F([0, t]) − F^II([0, t]))⁺`
    pub max_upper_violation: f64,
}

/// Checks `lower ≤ middle ≤ upper` for three CDFs at every grid point and left limit.
pub fn sandwich_violations(
    lower: &MonotoneStepFunction,
    middle: &MonotoneStepFunction,
    upper: &MonotoneStepFunction,
) -> Result<BoundsReport> {
    if [lower, middle, upper].iter().any(|f| f.orientation() != Orientation::Cdf) {
        return Err(Error::Domain("sandwich check needs CDFs".into()));
    }
    let grid = union_grid([lower.grid(), middle.grid(), upper.grid()]);
    let mut lo = (lower.before() - middle.before()).max(0.0);
    let mut hi = (middle.before() - upper.before()).max(0.0);
    for &t in &grid {
        lo = lo.max(lower.eval(t) - middle.eval(t)).max(lower.left_limit(t) - middle.left_limit(t));
        hi = hi.max(middle.eval(t) - upper.eval(t)).max(middle.left_limit(t) - upper.left_limit(t));
    }
    Ok(BoundsReport { grid, max_lower_violation: lo, max_upper_violation: hi })
}

/// `F^I ≤ F^Turnbull ≤ F^II` for three fits of the same sample.
pub fn check_bounds(fit_one: &ModelOneFit, fit_t: &TurnbullFit, fit_two: &ModelTwoFit) -> Result<BoundsReport> {
    let sizes = [fit_one.sample_size, Some(fit_t.sample_size), fit_two.sample_size];
    let known: Vec<usize> = sizes.iter().flatten().copied().collect();
    if known.windows(2).any(|w| w[0] != w[1]) {
        return Err(Error::Domain(format!("fits come from different samples (sizes {known:?})")));
    }
    sandwich_violations(&fit_one.cdf(), &fit_t.cdf(), &fit_two.cdf())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::{fit_model_one, fit_model_two};
    use crate::sample::{group, Observation};

    fn sample(pairs: &[(f64, u8)]) -> GroupedSample {
        let obs: Vec<Observation> = pairs.iter().map(|&(y, a)| Observation::new(y, a).unwrap()).collect();
        group(&obs).unwrap()
    }

    const E2: &[(f64, u8)] = &[(1.0, 0), (2.0, 1), (3.0, 0)];
    const E3: &[(f64, u8)] = &[(1.0, 0), (2.0, 2), (3.0, 0)];

    #[test]
    fn uncensored_data_converges_to_frequencies_in_one_step() {
        let g = sample(&[(1.0, 0), (1.0, 0), (2.0, 0), (5.0, 0)]);
        let fit = fit_turnbull(&g, TurnbullOptions::default()).unwrap();
        assert_eq!(fit.support, vec![1.0, 2.0, 5.0]);
        assert_eq!(fit.masses, vec![0.5, 0.25, 0.25]);
        assert_eq!(fit.iterations, 1);
        assert!(fit.converged);
    }

    #[test]
    fn e3_fixed_point() {
        let g = sample(E3);
        let fit = fit_turnbull(&g, TurnbullOptions::default()).unwrap();
        assert_eq!(fit.support, vec![1.0, 3.0]);
        assert!((fit.masses[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((fit.masses[1] - 1.0 / 3.0).abs() < 1e-15);
        assert!(self_consistency_residual(&g, &fit).unwrap() < 1e-15);
    }

    #[test]
    fn e3_uniform_start_residual() {
        let g = sample(E3);
        let uniform = TurnbullFit {
            support: vec![1.0, 3.0],
            masses: vec![0.5, 0.5],
            iterations: 0,
            residual: f64::NAN,
            converged: false,
            sample_size: 3,
            trace: Vec::new(),
        };
        let r = self_consistency_residual(&g, &uniform).unwrap();
        assert!((r - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn right_censored_only_is_kaplan_meier() {
        let fit = fit_turnbull(&sample(E2), TurnbullOptions::default()).unwrap();
        assert_eq!(fit.support, vec![1.0, 3.0]);
        assert!((fit.masses[0] - 1.0 / 3.0).abs() < 1e-10);
        assert!((fit.masses[1] - 2.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn trailing_right_censoring_adds_an_atom_at_infinity() {
        let fit = fit_turnbull(&sample(&[(1.0, 0), (2.0, 1)]), TurnbullOptions::default()).unwrap();
        assert_eq!(fit.support, vec![1.0, f64::INFINITY]);
        assert!((fit.masses[0] - 0.5).abs() < 1e-10);
        assert!((fit.mass_at_infinity() - 0.5).abs() < 1e-10);
        assert_eq!(fit.cdf().grid(), &[1.0]);
    }

    #[test]
    fn degenerate_support_errors() {
        assert!(matches!(
            fit_turnbull(&sample(&[(1.0, 2), (2.0, 0)]), TurnbullOptions::default()),
            Err(Error::DegenerateSupport(_))
        ));
        assert!(fit_turnbull(&sample(&[(1.0, 0)]), TurnbullOptions { tolerance: 0.0, ..Default::default() }).is_err());
    }

    #[test]
    fn incompatible_support_is_rejected() {
        let fit = fit_turnbull(&sample(E3), TurnbullOptions::default()).unwrap();
        assert!(self_consistency_residual(&sample(E2), &fit).is_ok());
        assert!(self_consistency_residual(&sample(&[(1.0, 0)]), &fit).is_err());
    }

    #[test]
    fn non_convergence_is_reported() {
        let g = sample(&[(1.0, 0), (2.0, 2), (3.0, 1), (4.0, 0), (5.0, 2), (6.0, 0)]);
        let fit = fit_turnbull(&g, TurnbullOptions { max_iterations: 1, ..Default::default() }).unwrap();
        assert!(!fit.converged);
        assert_eq!(fit.iterations, 1);
    }

    #[test]
    fn e3_bounds_are_tight() {
        let g = sample(E3);
        let one = fit_model_one(&g).unwrap();
        let two = fit_model_two(&g).unwrap();
        let tb = fit_turnbull(&g, TurnbullOptions::default()).unwrap();
        let report = check_bounds(&one, &tb, &two).unwrap();
        assert_eq!(report.max_lower_violation, 0.0);
        assert_eq!(report.max_upper_violation, 0.0);
        assert!(check_bounds(&one, &fit_turnbull(&sample(E2), TurnbullOptions::default()).unwrap(), &two).is_ok());
        let other = fit_turnbull(&sample(&[(1.0, 0)]), TurnbullOptions::default()).unwrap();
        assert!(check_bounds(&one, &other, &two).is_err());
    }
}
