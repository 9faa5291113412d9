//! Product-limit estimators for Models I and II.
//!
//! Two independent routes compute the same thing:
//!
//! * [`invert_model_one`] / [`invert_model_two`] apply the hazard-measure
//!   inversion to arbitrary discrete subdistributions `(H_0, H_1, H_2)`;
//! * [`fit_model_one`] / [`fit_model_two`] evaluate the closed-form product
//!   limits directly on the grouped counts `D_kj`, `N_j`, `Ñ_j`.
//!
//! On empirical subdistributions the two agree to rounding.
//!
//! Tie conventions at atoms follow the closed forms: Model I divides `H_0({t})`
//! by `F_2^I([0, t)) − H([0, t))`, Model II divides by
//! `F_1^II([t, ∞]) − H([t, ∞]) + H_0({t})`. A ratio with a zero numerator is 0.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::{
    cdf_from_reverse_hazard, survival_from_hazard, HazardIncrements, HazardKind, MonotoneStepFunction, StepMeasure,
};
use crate::sample::{validate_for_model, GroupedSample, Model};

/// Increments in `(1, 1 + CLAMP_SLACK]` are clamped to 1; anything larger is an error.
pub const CLAMP_SLACK: f64 = 1e-9;

/// Tolerance on the total mass of the subdistributions handed to the inversion engines.
const TOTAL_MASS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum FitWarning {
    /// a hazard increment slightly above 1 was clamped
    Clamped { quantity: &'static str, t: f64, raw: f64 },
}

impl fmt::Display for FitWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FitWarning::Clamped { quantity, t, raw } => {
                write!(f, "clamped {quantity} increment {raw:e} to 1 at t = {t}")
            }
        }
    }
}

/// `num / den` as a hazard increment: 0 when `num == 0`, an error when the
/// denominator cannot carry a positive numerator.
fn increment(num: f64, den: f64, quantity: &'static str, t: f64, warnings: &mut Vec<FitWarning>) -> Result<f64> {
    if num == 0.0 {
        return Ok(0.0);
    }
    if !(den > 0.0) {
        return Err(Error::NumericalInconsistency(format!(
            "{quantity}: positive mass {num} over non-positive denominator {den} at t = {t}"
        )));
    }
    let x = num / den;
    if x <= 1.0 {
        Ok(x)
    } else if x <= 1.0 + CLAMP_SLACK {
        warnings.push(FitWarning::Clamped { quantity, t, raw: x });
        Ok(1.0)
    } else {
        Err(Error::NumericalInconsistency(format!("{quantity} increment {x} exceeds 1 at t = {t}")))
    }
}

/// Model I fit: `F_T^I` plus the intermediate distributions of the left-censoring step.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelOneFit {
    pub grid: Vec<f64>,
    /// `L_T^{I−}`
    pub hazard_t: HazardIncrements,
    /// `F_T^I((t, ∞])`
    pub survival_t: MonotoneStepFunction,
    /// `F_2^I([0, t])`
    pub f2: MonotoneStepFunction,
    /// `F_01^I([0, t])`
    pub f01: MonotoneStepFunction,
    /// `U_0, …, U_{M−1}` when fitted from counts
    pub u_seq: Option<Vec<f64>>,
    pub mass_at_infinity: f64,
    pub sample_size: Option<usize>,
    pub warnings: Vec<FitWarning>,
}

impl ModelOneFit {
    /// `F_T^I([0, t])`
    pub fn cdf(&self) -> MonotoneStepFunction {
        self.survival_t.complement()
    }
}

/// Model II fit: `F_T^II` plus the intermediate distributions of the right-censoring step.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelTwoFit {
    pub grid: Vec<f64>,
    /// `M_T^{II−}`
    pub reverse_hazard_t: HazardIncrements,
    /// `F_T^II([0, t])`
    pub cdf_t: MonotoneStepFunction,
    /// `F_1^II((t, ∞])`
    pub f1: MonotoneStepFunction,
    /// `F_02^II((t, ∞])`
    pub f02: MonotoneStepFunction,
    /// `V_1, …, V_M` when fitted from counts
    pub v_seq: Option<Vec<f64>>,
    pub mass_at_zero: f64,
    pub sample_size: Option<usize>,
    pub warnings: Vec<FitWarning>,
}

impl ModelTwoFit {
    pub fn cdf(&self) -> MonotoneStepFunction {
        self.cdf_t.clone()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Diagnostics {
    /// smallest atom of `H_0`
    pub t00: f64,
    /// `∫_{(t00, ∞]} H_2(du) / H([0, u])²`
    pub condition11: f64,
    /// some atom of `H_0` sits where the Model I at-risk denominator vanishes
    pub identification_flag: bool,
}

struct Observed {
    grid: Vec<f64>,
    h: StepMeasure,
    h0: Vec<f64>,
    h1: Vec<f64>,
    h2: Vec<f64>,
}

fn observed(h0: &StepMeasure, h1: &StepMeasure, h2: &StepMeasure) -> Result<Observed> {
    let h = h0.add(h1)?.add(h2)?;
    if (h.total() - 1.0).abs() > TOTAL_MASS_TOL {
        return Err(Error::Domain(format!("H_0 + H_1 + H_2 has total mass {}, expected 1", h.total())));
    }
    let grid = h.points().to_vec();
    let on_grid = |mu: &StepMeasure| grid.iter().map(|&t| mu.mass_at(t)).collect::<Vec<_>>();
    Ok(Observed { h0: on_grid(h0), h1: on_grid(h1), h2: on_grid(h2), grid, h })
}

// F_2^I from M_2^−({t}) = H_2({t}) / H([0, t])
fn model_one_f2(obs: &Observed, warnings: &mut Vec<FitWarning>) -> Result<MonotoneStepFunction> {
    let m2 = obs
        .grid
        .iter()
        .zip(&obs.h2)
        .map(|(&t, &h2)| increment(h2, obs.h.cum(t), "M_2", t, warnings))
        .collect::<Result<Vec<_>>>()?;
    cdf_from_reverse_hazard(&HazardIncrements::new(obs.grid.clone(), m2, HazardKind::MMinus)?)
}

/// Inverts Model I on arbitrary discrete subdistributions.
pub fn invert_model_one(h0: &StepMeasure, h1: &StepMeasure, h2: &StepMeasure) -> Result<ModelOneFit> {
    if h0.mass_at(0.0) > 0.0 || h1.mass_at(0.0) > 0.0 {
        return Err(Error::ModelViolation("Model I requires H_0({0}) = H_1({0}) = 0".into()));
    }
    let obs = observed(h0, h1, h2)?;
    let mut warnings = Vec::new();

    let f2 = model_one_f2(&obs, &mut warnings)?;

    let mut m01 = Vec::with_capacity(obs.grid.len());
    for (i, &t) in obs.grid.iter().enumerate() {
        let h01 = obs.h0[i] + obs.h1[i];
        m01.push(increment(h01, obs.h.cum_open(t) + h01, "M_01", t, &mut warnings)?);
    }
    let f01 = cdf_from_reverse_hazard(&HazardIncrements::new(obs.grid.clone(), m01, HazardKind::MMinus)?)?;

    let mut lt = Vec::with_capacity(obs.grid.len());
    for (i, &t) in obs.grid.iter().enumerate() {
        let den = f2.left_limit(t) - obs.h.cum_open(t);
        lt.push(increment(obs.h0[i], den, "L_T", t, &mut warnings)?);
    }
    let hazard_t = HazardIncrements::new(obs.grid.clone(), lt, HazardKind::LMinus)?;
    let survival_t = survival_from_hazard(&hazard_t)?;
    Ok(ModelOneFit {
        mass_at_infinity: survival_t.last_value(),
        grid: obs.grid,
        hazard_t,
        survival_t,
        f2,
        f01,
        u_seq: None,
        sample_size: None,
        warnings,
    })
}

/// Inverts Model II on arbitrary discrete subdistributions.
pub fn invert_model_two(h0: &StepMeasure, h1: &StepMeasure, h2: &StepMeasure) -> Result<ModelTwoFit> {
    if h0.mass_at(0.0) > 0.0 {
        return Err(Error::ModelViolation("Model II requires H_0({0}) = 0".into()));
    }
    let obs = observed(h0, h1, h2)?;
    let mut warnings = Vec::new();

    let mut l1 = Vec::with_capacity(obs.grid.len());
    let mut l02 = Vec::with_capacity(obs.grid.len());
    for (i, &t) in obs.grid.iter().enumerate() {
        l1.push(increment(obs.h1[i], obs.h.tail(t) + obs.h1[i], "L_1", t, &mut warnings)?);
        l02.push(increment(obs.h0[i] + obs.h2[i], obs.h.tail_closed(t), "L_02", t, &mut warnings)?);
    }
    let f1 = survival_from_hazard(&HazardIncrements::new(obs.grid.clone(), l1, HazardKind::LMinus)?)?;
    let f02 = survival_from_hazard(&HazardIncrements::new(obs.grid.clone(), l02, HazardKind::LMinus)?)?;

    let mut mt = Vec::with_capacity(obs.grid.len());
    for (i, &t) in obs.grid.iter().enumerate() {
        let den = f1.left_limit(t) - obs.h.tail_closed(t) + obs.h0[i];
        mt.push(increment(obs.h0[i], den, "M_T", t, &mut warnings)?);
    }
    let reverse_hazard_t = HazardIncrements::new(obs.grid.clone(), mt, HazardKind::MMinus)?;
    let cdf_t = cdf_from_reverse_hazard(&reverse_hazard_t)?;
    Ok(ModelTwoFit {
        mass_at_zero: cdf_t.before(),
        grid: obs.grid,
        reverse_hazard_t,
        cdf_t,
        f1,
        f02,
        v_seq: None,
        sample_size: None,
        warnings,
    })
}

fn require_valid(g: &GroupedSample, model: Model) -> Result<()> {
    let report = validate_for_model(g, model);
    if report.is_ok() {
        Ok(())
    } else {
        let list: Vec<String> = report.violations.iter().map(ToString::to_string).collect();
        Err(Error::ModelViolation(list.join("; ")))
    }
}

/// Model I product-limit estimator from counts:
///
/// `U_{j−1} = n ∏_{j ≤ k ≤ M} (1 − D_2k / N_k)` and
/// `F((Z_j, ∞]) = ∏_{k ≤ j} (1 − D_0k / (U_{k−1} − N_{k−1}))`.
pub fn fit_model_one(g: &GroupedSample) -> Result<ModelOneFit> {
    require_valid(g, Model::One)?;
    let m = g.len();
    let n = g.n() as f64;
    let z = g.z();
    let (d0, d1, d2) = (g.d(0), g.d(1), g.d(2));
    let mut warnings = Vec::new();

    // f2_prod[j] = U_j / n for j = 0..=M (0-based over U indices)
    let mut f2_prod = vec![1.0; m + 1];
    for j in (1..=m).rev() {
        let factor = 1.0 - d2[j - 1] as f64 / g.n_cum_1(j) as f64;
        f2_prod[j - 1] = f2_prod[j] * factor;
    }
    let u_seq: Vec<f64> = f2_prod[..m].iter().map(|p| n * p).collect();

    let mut lt = Vec::with_capacity(m);
    for k in 1..=m {
        let den = u_seq[k - 1] - g.n_cum_1(k - 1) as f64;
        lt.push(increment(d0[k - 1] as f64, den, "L_T", z[k - 1], &mut warnings)?);
    }
    let hazard_t = HazardIncrements::new(z.to_vec(), lt, HazardKind::LMinus)?;
    let survival_t = survival_from_hazard(&hazard_t)?;

    let f2 =
        MonotoneStepFunction::new(z.to_vec(), f2_prod[1..].to_vec(), crate::measures::Orientation::Cdf, f2_prod[0])?;

    let mut m01 = Vec::with_capacity(m);
    for k in 1..=m {
        let c = (d0[k - 1] + d1[k - 1]) as f64;
        m01.push(increment(c, g.n_cum_1(k - 1) as f64 + c, "M_01", z[k - 1], &mut warnings)?);
    }
    let f01 = cdf_from_reverse_hazard(&HazardIncrements::new(z.to_vec(), m01, HazardKind::MMinus)?)?;

    Ok(ModelOneFit {
        mass_at_infinity: survival_t.last_value(),
        grid: z.to_vec(),
        hazard_t,
        survival_t,
        f2,
        f01,
        u_seq: Some(u_seq),
        sample_size: Some(g.n()),
        warnings,
    })
}

/// Model II product-limit estimator from counts:
///
/// `V_j = n ∏_{k ≤ j} (1 − D_1k / (Ñ_{k+1} + D_1k))` and
/// `F([0, Z_j]) = ∏_{j < k ≤ M} (1 − D_0k / (V_{k−1} − Ñ_k + D_0k))`.
///
/// `V_{k−1} / n = F_1^II([Z_k, ∞])`, the closed at-risk bracket; with `V_k` in its
/// place the estimator breaks (increments above 1) whenever labels 0 and 1 tie at
/// the same time, and no longer reduces to Kaplan–Meier.
pub fn fit_model_two(g: &GroupedSample) -> Result<ModelTwoFit> {
    require_valid(g, Model::Two)?;
    let m = g.len();
    let n = g.n() as f64;
    let z = g.z();
    let (d0, d1, d2) = (g.d(0), g.d(1), g.d(2));
    let mut warnings = Vec::new();

    // f1_prod[j] = V_j / n, j = 0..=M
    let mut f1_prod = vec![1.0; m + 1];
    for k in 1..=m {
        let c = d1[k - 1] as f64;
        let l1 = increment(c, g.n_rev_1(k + 1) as f64 + c, "L_1", z[k - 1], &mut warnings)?;
        f1_prod[k] = f1_prod[k - 1] * (1.0 - l1);
    }
    let v_full: Vec<f64> = f1_prod.iter().map(|p| n * p).collect();

    let mut mt = Vec::with_capacity(m);
    for k in 1..=m {
        let c = d0[k - 1] as f64;
        let den = v_full[k - 1] - g.n_rev_1(k) as f64 + c;
        mt.push(increment(c, den, "M_T", z[k - 1], &mut warnings)?);
    }
    let reverse_hazard_t = HazardIncrements::new(z.to_vec(), mt, HazardKind::MMinus)?;
    let cdf_t = cdf_from_reverse_hazard(&reverse_hazard_t)?;

    let f1 = MonotoneStepFunction::new(z.to_vec(), f1_prod[1..].to_vec(), crate::measures::Orientation::Survival, 1.0)?;

    let mut l02 = Vec::with_capacity(m);
    for k in 1..=m {
        let c = (d0[k - 1] + d2[k - 1]) as f64;
        l02.push(increment(c, g.n_rev_1(k) as f64, "L_02", z[k - 1], &mut warnings)?);
    }
    let f02 = survival_from_hazard(&HazardIncrements::new(z.to_vec(), l02, HazardKind::LMinus)?)?;

    Ok(ModelTwoFit {
        mass_at_zero: cdf_t.before(),
        grid: z.to_vec(),
        reverse_hazard_t,
        cdf_t,
        f1,
        f02,
        v_seq: Some(v_full[1..].to_vec()),
        sample_size: Some(g.n()),
        warnings,
    })
}

/// Left end of `supp H_0` and the integral `∫_{(t00, ∞]} H_2(du) / H([0, u])²`.
pub fn condition_11_diagnostic(h0: &StepMeasure, h1: &StepMeasure, h2: &StepMeasure) -> Result<Diagnostics> {
    let t00 = *h0
        .points()
        .iter()
        .zip(h0.masses())
        .find(|(_, &m)| m > 0.0)
        .ok_or_else(|| Error::Domain("H_0 is identically zero".into()))?
        .0;
    let obs = observed(h0, h1, h2)?;
    let condition11 = obs
        .grid
        .iter()
        .zip(&obs.h2)
        .filter(|&(&u, &m)| u > t00 && m > 0.0)
        .map(|(&u, &m)| {
            let hu = obs.h.cum(u);
            m / (hu * hu)
        })
        .fold(0.0, |acc, x| acc + x);
    let mut scratch = Vec::new();
    let identification_flag = match model_one_f2(&obs, &mut scratch) {
        Ok(f2) => obs.grid.iter().zip(&obs.h0).any(|(&t, &m)| m > 0.0 && f2.left_limit(t) - obs.h.cum_open(t) <= 0.0),
        Err(_) => true,
    };
    Ok(Diagnostics { t00, condition11, identification_flag })
}

/// [`condition_11_diagnostic`] on the empirical subdistributions of a sample.
pub fn sample_diagnostics(g: &GroupedSample) -> Result<Diagnostics> {
    let [h0, h1, h2] = g.empirical_measures();
    condition_11_diagnostic(&h0, &h1, &h2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::{group, Observation};

    fn sample(pairs: &[(f64, u8)]) -> GroupedSample {
        let obs: Vec<Observation> = pairs.iter().map(|&(y, a)| Observation::new(y, a).unwrap()).collect();
        group(&obs).unwrap()
    }

    fn measure(atoms: &[(f64, f64)]) -> StepMeasure {
        StepMeasure::from_atoms(atoms.iter().copied()).unwrap()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    const E0: &[(f64, u8)] = &[(2.0, 0), (1.0, 2), (2.0, 1), (3.0, 0)];
    const E1: &[(f64, u8)] = &[(1.0, 2), (2.0, 0), (3.0, 0)];
    const E2: &[(f64, u8)] = &[(1.0, 0), (2.0, 1), (3.0, 0)];
    const E3: &[(f64, u8)] = &[(1.0, 0), (2.0, 2), (3.0, 0)];

    #[test]
    fn model_one_closed_form_examples() {
        let fit = fit_model_one(&sample(E1)).unwrap();
        assert_eq!(fit.u_seq.as_deref().unwrap(), &[0.0, 3.0, 3.0]);
        assert!(close(fit.survival_t.values(), &[1.0, 0.5, 0.0], 1e-15));

        let fit = fit_model_one(&sample(E0)).unwrap();
        assert!(close(fit.survival_t.values(), &[1.0, 2.0 / 3.0, 0.0], 1e-15));
        // F_01^I on E0: M_01 = (0, 2/3, 1/4) at (1, 2, 3)
        assert!(close(fit.f01.values(), &[0.25, 0.75, 1.0], 1e-15));

        let fit = fit_model_one(&sample(&[(1.0, 0), (2.0, 0)])).unwrap();
        assert!(close(fit.survival_t.values(), &[0.5, 0.0], 1e-15));
    }

    #[test]
    fn model_two_closed_form_examples() {
        let fit = fit_model_two(&sample(E2)).unwrap();
        assert!(close(fit.v_seq.as_deref().unwrap(), &[3.0, 1.5, 1.5], 1e-15));
        assert!(close(fit.cdf_t.values(), &[1.0 / 3.0, 1.0 / 3.0, 1.0], 1e-15));

        let fit = fit_model_two(&sample(E3)).unwrap();
        assert!(close(fit.cdf_t.values(), &[2.0 / 3.0, 2.0 / 3.0, 1.0], 1e-15));

        let fit = fit_model_two(&sample(&[(1.0, 0), (2.0, 0)])).unwrap();
        assert!(close(fit.cdf_t.values(), &[0.5, 1.0], 1e-15));
    }

    #[test]
    fn model_two_handles_tied_exact_and_right_censored() {
        // Kaplan–Meier on this data: F = (1/3, 1)
        let fit = fit_model_two(&sample(&[(1.0, 0), (1.0, 1), (2.0, 0)])).unwrap();
        assert!(close(fit.cdf_t.values(), &[1.0 / 3.0, 1.0], 1e-15));
        assert_eq!(fit.mass_at_zero, 0.0);
    }

    #[test]
    fn engine_a1() {
        let h0 = measure(&[(1.0, 0.25), (2.0, 0.5)]);
        let h2 = measure(&[(1.5, 0.25)]);
        let fit = invert_model_one(&h0, &StepMeasure::zero(), &h2).unwrap();
        assert_eq!(fit.grid, vec![1.0, 1.5, 2.0]);
        assert!(close(fit.hazard_t.increments(), &[0.5, 0.0, 1.0], 1e-15));
        assert!(close(fit.survival_t.values(), &[0.5, 0.5, 0.0], 1e-15));
        assert_eq!(fit.mass_at_infinity, 0.0);
    }

    #[test]
    fn engine_a2() {
        let h0 = measure(&[(1.0, 0.5), (2.0, 0.25)]);
        let h1 = measure(&[(1.5, 0.25)]);
        let fit = invert_model_two(&h0, &h1, &StepMeasure::zero()).unwrap();
        assert!(close(fit.reverse_hazard_t.increments(), &[1.0, 0.0, 0.5], 1e-15));
        assert!(close(fit.cdf_t.values(), &[0.5, 0.5, 1.0], 1e-15));
        assert_eq!(fit.mass_at_zero, 0.0);
    }

    #[test]
    fn engine_without_censoring_returns_h0() {
        let h0 = measure(&[(0.5, 0.2), (1.0, 0.3), (4.0, 0.5)]);
        let z = StepMeasure::zero();
        let one = invert_model_one(&h0, &z, &z).unwrap();
        assert!(close(one.cdf().values(), &[0.2, 0.5, 1.0], 1e-15));
        let two = invert_model_two(&h0, &z, &z).unwrap();
        assert!(close(two.cdf_t.values(), &[0.2, 0.5, 1.0], 1e-15));
    }

    #[test]
    fn engine_on_empirical_e1_and_e2() {
        let [h0, h1, h2] = sample(E1).empirical_measures();
        let fit = invert_model_one(&h0, &h1, &h2).unwrap();
        assert!(close(fit.survival_t.values(), &[1.0, 0.5, 0.0], 1e-15));

        let [h0, h1, h2] = sample(E2).empirical_measures();
        let fit = invert_model_two(&h0, &h1, &h2).unwrap();
        assert!(close(fit.cdf_t.values(), &[1.0 / 3.0, 1.0 / 3.0, 1.0], 1e-15));
    }

    #[test]
    fn engine_rejects_atoms_at_zero_and_bad_totals() {
        let h0 = measure(&[(0.0, 0.5), (1.0, 0.5)]);
        let z = StepMeasure::zero();
        assert!(matches!(invert_model_one(&h0, &z, &z), Err(Error::ModelViolation(_))));
        assert!(matches!(invert_model_two(&h0, &z, &z), Err(Error::ModelViolation(_))));
        let h1 = measure(&[(0.0, 0.5)]);
        let h0 = measure(&[(1.0, 0.5)]);
        assert!(matches!(invert_model_one(&h0, &h1, &z), Err(Error::ModelViolation(_))));
        assert!(invert_model_two(&h0, &h1, &z).is_ok());
        assert!(matches!(invert_model_one(&h0, &z, &z), Err(Error::Domain(_))));
    }

    #[test]
    fn fits_reject_invalid_samples() {
        assert!(matches!(fit_model_one(&sample(&[(0.0, 1), (1.0, 0)])), Err(Error::ModelViolation(_))));
        assert!(fit_model_two(&sample(&[(0.0, 1), (1.0, 0)])).is_ok());
        assert!(matches!(fit_model_two(&sample(&[(0.0, 0), (1.0, 0)])), Err(Error::ModelViolation(_))));
    }

    #[test]
    fn increment_guard() {
        let mut w = Vec::new();
        assert_eq!(increment(0.0, 0.0, "x", 1.0, &mut w).unwrap(), 0.0);
        assert_eq!(increment(1.0 + 5e-10, 1.0, "x", 1.0, &mut w).unwrap(), 1.0);
        assert_eq!(w.len(), 1);
        assert!(matches!(increment(1.1, 1.0, "x", 1.0, &mut w), Err(Error::NumericalInconsistency(_))));
        assert!(matches!(increment(1.0, 0.0, "x", 1.0, &mut w), Err(Error::NumericalInconsistency(_))));
        assert!(matches!(increment(1.0, -1.0, "x", 1.0, &mut w), Err(Error::NumericalInconsistency(_))));
    }

    #[test]
    fn diagnostic_examples() {
        let d = sample_diagnostics(&sample(E3)).unwrap();
        assert_eq!(d.t00, 1.0);
        assert!((d.condition11 - 0.75).abs() < 1e-15);
        assert!(!d.identification_flag);

        let d = sample_diagnostics(&sample(E1)).unwrap();
        assert_eq!(d.t00, 2.0);
        assert_eq!(d.condition11, 0.0);

        let d = sample_diagnostics(&sample(E2)).unwrap();
        assert_eq!(d.condition11, 0.0);

        assert!(matches!(sample_diagnostics(&sample(&[(1.0, 2), (2.0, 1)])), Err(Error::Domain(_))));
    }
}
