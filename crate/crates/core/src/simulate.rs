//! Latent-variable samplers, exact subdistribution oracles for discrete
//! specs, and Monte Carlo studies (consistency, normality, bootstrap coverage).
//!
//! Every stochastic routine is a pure function of its inputs and a master
//! seed. Replicate `r` at sample size `n` draws from
//! `Pcg64::seed_from_u64(derive_seed(master, n, r))`; replicates run in
//! parallel and are reduced in index order, so output does not depend on the
//! thread count.

use rand::distributions::{Distribution, Uniform, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_distr::{Exp, Weibull};
use rand_pcg::Pcg64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{condition_11_diagnostic, fit_model_one, fit_model_two};
use crate::measures::{MonotoneStepFunction, StepMeasure};
use crate::sample::{GroupedSample, Model, Observation};
use crate::turnbull::{fit_turnbull, TurnbullOptions};

/// Recorded in every [`StudyReport`].
pub const GENERATOR: &str =
    "pcg64 (rand_pcg 0.3, seed_from_u64); stream seed = splitmix64(splitmix64(splitmix64(master) ^ n) ^ replicate)";

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stream seed for replicate `replicate` at sample size `n`.
pub fn derive_seed(master: u64, n: u64, replicate: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ n) ^ replicate)
}

fn rng_for(seed: u64) -> Pcg64 {
    Pcg64::seed_from_u64(seed)
}

/// Distribution of one latent variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Dist {
    PointMass { at: f64 },
    Discrete { points: Vec<f64>, probs: Vec<f64> },
    Exponential { rate: f64 },
    Weibull { shape: f64, scale: f64 },
    Uniform { low: f64, high: f64 },
}

enum Sampler {
    Point(f64),
    Discrete(Vec<f64>, WeightedIndex<f64>),
    Exp(Exp<f64>),
    Weibull(Weibull<f64>),
    Uniform(Uniform<f64>),
}

impl Sampler {
    fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        match self {
            Sampler::Point(t) => *t,
            Sampler::Discrete(points, idx) => points[idx.sample(rng)],
            Sampler::Exp(d) => d.sample(rng),
            Sampler::Weibull(d) => d.sample(rng),
            Sampler::Uniform(d) => d.sample(rng),
        }
    }
}

impl Dist {
    fn validate(&self, name: &str, allow_infinite: bool, strictly_positive: bool) -> Result<()> {
        let bad = |msg: String| Err(Error::Spec(format!("{name}: {msg}")));
        let location_ok =
            |t: f64| !t.is_nan() && t >= 0.0 && (allow_infinite || t.is_finite()) && (!strictly_positive || t > 0.0);
        match self {
            Dist::PointMass { at } => {
                if !location_ok(*at) {
                    return bad(format!("point mass location {at} not allowed"));
                }
            }
            Dist::Discrete { points, probs } => {
                if points.is_empty() || points.len() != probs.len() {
                    return bad("discrete needs equally many points and probs".into());
                }
                if let Some(t) = points.iter().find(|t| !location_ok(**t)) {
                    return bad(format!("atom location {t} not allowed"));
                }
                if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
                    return bad("probabilities must be finite and nonnegative".into());
                }
                let total: f64 = probs.iter().sum();
                if (total - 1.0).abs() > 1e-12 {
                    return bad(format!("probabilities sum to {total}, not 1"));
                }
            }
            Dist::Exponential { rate } => {
                if !(rate.is_finite() && *rate > 0.0) {
                    return bad("exponential rate must be positive".into());
                }
            }
            Dist::Weibull { shape, scale } => {
                if !(shape.is_finite() && *shape > 0.0 && scale.is_finite() && *scale > 0.0) {
                    return bad("weibull shape and scale must be positive".into());
                }
            }
            Dist::Uniform { low, high } => {
                if !(low.is_finite() && high.is_finite() && *low >= 0.0 && low < high) {
                    return bad("uniform needs 0 <= low < high".into());
                }
            }
        }
        Ok(())
    }

    fn sampler(&self) -> Sampler {
        match self {
            Dist::PointMass { at } => Sampler::Point(*at),
            Dist::Discrete { points, probs } => {
                Sampler::Discrete(points.clone(), WeightedIndex::new(probs).expect("validated probabilities"))
            }
            Dist::Exponential { rate } => Sampler::Exp(Exp::new(*rate).expect("validated rate")),
            Dist::Weibull { shape, scale } => Sampler::Weibull(Weibull::new(*scale, *shape).expect("validated")),
            Dist::Uniform { low, high } => Sampler::Uniform(Uniform::new(*low, *high)),
        }
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self, Dist::PointMass { .. } | Dist::Discrete { .. })
    }

    /// Atoms with positive probability, merged and sorted; `None` for continuous laws.
    pub fn atoms(&self) -> Option<Vec<(f64, f64)>> {
        let mut atoms: Vec<(f64, f64)> = match self {
            Dist::PointMass { at } => vec![(*at, 1.0)],
            Dist::Discrete { points, probs } => {
                points.iter().copied().zip(probs.iter().copied()).filter(|&(_, p)| p > 0.0).collect()
            }
            _ => return None,
        };
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
        for (t, p) in atoms {
            match merged.last_mut() {
                Some(last) if last.0 == t => last.1 += p,
                _ => merged.push((t, p)),
            }
        }
        Some(merged)
    }

    /// `P(X ≤ t)`
    pub fn cdf(&self, t: f64) -> f64 {
        match self {
            Dist::PointMass { at } => f64::from(u8::from(*at <= t)),
            Dist::Discrete { points, probs } => {
                points.iter().zip(probs).filter(|(p, _)| **p <= t).fold(0.0, |acc, (_, q)| acc + q)
            }
            Dist::Exponential { rate } => {
                if t <= 0.0 {
                    0.0
                } else {
                    -(-rate * t).exp_m1()
                }
            }
            Dist::Weibull { shape, scale } => {
                if t <= 0.0 {
                    0.0
                } else {
                    -(-(t / scale).powf(*shape)).exp_m1()
                }
            }
            Dist::Uniform { low, high } => ((t - low) / (high - low)).clamp(0.0, 1.0),
        }
    }

    /// `P(X < t)`
    pub fn cdf_left(&self, t: f64) -> f64 {
        match self {
            Dist::PointMass { at } => f64::from(u8::from(*at < t)),
            Dist::Discrete { points, probs } => {
                points.iter().zip(probs).filter(|(p, _)| **p < t).fold(0.0, |acc, (_, q)| acc + q)
            }
            _ => self.cdf(t),
        }
    }

    /// `P(X ≥ t)`, summed over atoms for discrete laws so an empty tail is exactly 0.
    pub fn sf_closed(&self, t: f64) -> f64 {
        match self {
            Dist::PointMass { at } => f64::from(u8::from(*at >= t)),
            Dist::Discrete { points, probs } => {
                points.iter().zip(probs).filter(|(p, _)| **p >= t).fold(0.0, |acc, (_, q)| acc + q)
            }
            _ => 1.0 - self.cdf_left(t),
        }
    }

    /// Left end of the support.
    fn lower(&self) -> f64 {
        match self {
            Dist::PointMass { at } => *at,
            Dist::Discrete { .. } => self.atoms().unwrap()[0].0,
            Dist::Exponential { .. } | Dist::Weibull { .. } => 0.0,
            Dist::Uniform { low, .. } => *low,
        }
    }

    /// Right end of the support.
    fn upper(&self) -> f64 {
        match self {
            Dist::PointMass { at } => *at,
            Dist::Discrete { .. } => self.atoms().unwrap().last().unwrap().0,
            Dist::Exponential { .. } | Dist::Weibull { .. } => f64::INFINITY,
            Dist::Uniform { high, .. } => *high,
        }
    }

    /// `P(lo < X ≤ hi)`
    fn prob_in(&self, lo: f64, hi: f64) -> f64 {
        if hi <= lo {
            0.0
        } else {
            (self.cdf(hi) - self.cdf(lo)).max(0.0)
        }
    }
}

/// Latent structure generating `(Y, A)`.
///
/// Model I: `Y = max(min(T, V₁), U₁)`; Model II: `Y = min(max(T, U₂), V₂)`;
/// Turnbull: `R = L + offset`, `Y` is the middle of `(L, T, R)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model")]
pub enum LatentSpec {
    #[serde(rename = "one")]
    One { t: Dist, v1: Dist, u1: Dist },
    #[serde(rename = "two")]
    Two { t: Dist, u2: Dist, v2: Dist },
    #[serde(rename = "turnbull")]
    Turnbull { t: Dist, l: Dist, offset: Dist },
}

impl LatentSpec {
    pub fn model(&self) -> Model {
        match self {
            LatentSpec::One { .. } => Model::One,
            LatentSpec::Two { .. } => Model::Two,
            LatentSpec::Turnbull { .. } => Model::Turnbull,
        }
    }

    /// Distribution of the lifetime of interest.
    pub fn t(&self) -> &Dist {
        match self {
            LatentSpec::One { t, .. } | LatentSpec::Two { t, .. } | LatentSpec::Turnbull { t, .. } => t,
        }
    }

    /// `∞` is allowed only where it cannot become an observed time: `V₁`, `V₂` and the Turnbull offset.
    pub fn validate(&self) -> Result<()> {
        match self {
            LatentSpec::One { t, v1, u1 } => {
                t.validate("t", false, false)?;
                v1.validate("v1", true, false)?;
                u1.validate("u1", false, false)
            }
            LatentSpec::Two { t, u2, v2 } => {
                t.validate("t", false, false)?;
                u2.validate("u2", false, false)?;
                v2.validate("v2", true, false)
            }
            LatentSpec::Turnbull { t, l, offset } => {
                t.validate("t", false, false)?;
                l.validate("l", false, false)?;
                offset.validate("offset", true, true)
            }
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let spec: LatentSpec = toml::from_str(text).map_err(|e| Error::Spec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Spec(e.to_string()))
    }

    /// Whether `t` lies in the region where the model-appropriate estimator recovers `F_T`:
    /// `P(U < t)·P(V ≥ t) > 0` for Models I and II, `P(L < t ≤ R) > 0` for Turnbull.
    fn observable_at(&self, t: f64) -> bool {
        match self {
            LatentSpec::One { v1: v, u1: u, .. } | LatentSpec::Two { u2: u, v2: v, .. } => {
                u.cdf_left(t) > 0.0 && v.sf_closed(t) > 0.0
            }
            LatentSpec::Turnbull { l, offset, .. } => match (l.atoms(), offset.atoms()) {
                (Some(la), Some(oa)) => la
                    .iter()
                    .flat_map(|&(lv, lp)| oa.iter().map(move |&(ov, op)| (lv, lv + ov, lp * op)))
                    .any(|(lv, rv, p)| p > 0.0 && lv < t && t <= rv),
                _ => t > l.lower() && t <= l.upper() + offset.upper(),
            },
        }
    }

    /// Bounds `(a, b)` of the observable region for continuous `T`: bad set is `[0, a] ∪ (b, ∞]`.
    fn observable_bounds(&self) -> (f64, f64) {
        match self {
            LatentSpec::One { v1: v, u1: u, .. } | LatentSpec::Two { u2: u, v2: v, .. } => (u.lower(), v.upper()),
            LatentSpec::Turnbull { l, offset, .. } => (l.lower(), l.upper() + offset.upper()),
        }
    }

    fn region_condition(&self) -> &'static str {
        match self {
            LatentSpec::One { .. } => "supp(F_T) within {t : P(U1 < t) P(V1 >= t) > 0}",
            LatentSpec::Two { .. } => "supp(F_T) within {t : P(U2 < t) P(V2 >= t) > 0}",
            LatentSpec::Turnbull { .. } => "supp(F_T) within {t : P(L < t <= R) > 0}",
        }
    }

    /// Mass `T` puts outside the observable region, restricted to `lo < t ≤ hi`
    /// (`lo = −1` includes 0).
    pub fn unidentified_mass(&self, lo: f64, hi: f64) -> f64 {
        let t = self.t();
        match t.atoms() {
            Some(atoms) => atoms
                .iter()
                .filter(|&&(s, _)| s > lo && s <= hi && !self.observable_at(s))
                .fold(0.0, |acc, &(_, p)| acc + p),
            None => {
                let (a, b) = self.observable_bounds();
                t.prob_in(lo, hi.min(a)) + t.prob_in(lo.max(b), hi)
            }
        }
    }

    fn require_identified(&self, lo: f64, hi: f64) -> Result<()> {
        let mass = self.unidentified_mass(lo, hi);
        if mass > 0.0 {
            Err(Error::Unidentified(format!(
                "{} fails: T has mass {mass} outside the observable region on ({lo}, {hi}]",
                self.region_condition()
            )))
        } else {
            Ok(())
        }
    }
}

fn classify_one(t: f64, v1: f64, u1: f64) -> (f64, u8) {
    if u1 < t && t <= v1 {
        (t, 0)
    } else if u1 < v1 && v1 < t {
        (v1, 1)
    } else {
        (u1, 2)
    }
}

fn classify_two(t: f64, u2: f64, v2: f64) -> (f64, u8) {
    if u2 < t && t <= v2 {
        (t, 0)
    } else if v2 < u2.max(t) {
        (v2, 1)
    } else {
        (u2, 2)
    }
}

fn classify_turnbull(t: f64, l: f64, r: f64) -> (f64, u8) {
    if l < t && t <= r {
        (t, 0)
    } else if r < t {
        (r, 1)
    } else {
        (l, 2)
    }
}

/// `n` independent draws of `(Y, A)`.
pub fn sample_latent(spec: &LatentSpec, n: usize, seed: u64) -> Result<Vec<Observation>> {
    if n == 0 {
        return Err(Error::Domain("sample size must be at least 1".into()));
    }
    spec.validate()?;
    let mut rng = rng_for(seed);
    let (s_t, s_a, s_b) = match spec {
        LatentSpec::One { t, v1, u1 } => (t.sampler(), v1.sampler(), u1.sampler()),
        LatentSpec::Two { t, u2, v2 } => (t.sampler(), u2.sampler(), v2.sampler()),
        LatentSpec::Turnbull { t, l, offset } => (t.sampler(), l.sampler(), offset.sampler()),
    };
    let model = spec.model();
    (0..n)
        .map(|_| {
            let t = s_t.draw(&mut rng);
            let a = s_a.draw(&mut rng);
            let b = s_b.draw(&mut rng);
            let (y, label) = match model {
                Model::One => classify_one(t, a, b),
                Model::Two => classify_two(t, a, b),
                Model::Turnbull => classify_turnbull(t, a, a + b),
            };
            Observation::new(y, label)
        })
        .collect()
}

/// Exact `(H_0, H_1, H_2)` by enumerating the product of the latent supports.
///
/// Probabilities are accumulated as `p_T · p_2 · p_3` in enumeration order
/// (T outermost), then summed per location.
pub fn analytic_subdistributions(spec: &LatentSpec) -> Result<[StepMeasure; 3]> {
    spec.validate()?;
    let (t, a, b) = match spec {
        LatentSpec::One { t, v1, u1 } => (t, v1, u1),
        LatentSpec::Two { t, u2, v2 } => (t, u2, v2),
        LatentSpec::Turnbull { t, l, offset } => (t, l, offset),
    };
    let atoms =
        |d: &Dist| d.atoms().ok_or_else(|| Error::Domain("analytic subdistributions need discrete components".into()));
    let (ta, aa, ba) = (atoms(t)?, atoms(a)?, atoms(b)?);
    let mut out: [Vec<(f64, f64)>; 3] = Default::default();
    for &(tv, tp) in &ta {
        for &(av, ap) in &aa {
            for &(bv, bp) in &ba {
                let (y, k) = match spec.model() {
                    Model::One => classify_one(tv, av, bv),
                    Model::Two => classify_two(tv, av, bv),
                    Model::Turnbull => classify_turnbull(tv, av, av + bv),
                };
                out[k as usize].push((y, tp * ap * bp));
            }
        }
    }
    let [o0, o1, o2] = out;
    Ok([StepMeasure::from_atoms(o0)?, StepMeasure::from_atoms(o1)?, StepMeasure::from_atoms(o2)?])
}

/// CDF of `T` as a step function; `None` for continuous laws.
pub fn true_cdf_step(spec: &LatentSpec) -> Option<MonotoneStepFunction> {
    let atoms = spec.t().atoms()?;
    let mut acc = 0.0;
    let (grid, values): (Vec<f64>, Vec<f64>) = atoms
        .iter()
        .map(|&(t, p)| {
            acc += p;
            (t, acc.min(1.0))
        })
        .unzip();
    MonotoneStepFunction::new(grid, values, crate::measures::Orientation::Cdf, 0.0).ok()
}

/// `F̂([0, t])` for the model the spec describes.
pub fn fit_cdf(g: &GroupedSample, model: Model) -> Result<MonotoneStepFunction> {
    match model {
        Model::One => Ok(fit_model_one(g)?.cdf()),
        Model::Two => Ok(fit_model_two(g)?.cdf()),
        Model::Turnbull => Ok(fit_turnbull(g, TurnbullOptions::default())?.cdf()),
    }
}

/// `sup_{t ∈ [lo, hi]} |F̂([0, t]) − F_T([0, t])|`, exact for step or continuous truth.
pub fn sup_error(estimate: &MonotoneStepFunction, truth: &Dist, lo: f64, hi: f64) -> f64 {
    let mut points: Vec<f64> = estimate.grid().iter().copied().filter(|&t| t >= lo && t <= hi).collect();
    if let Some(atoms) = truth.atoms() {
        points.extend(atoms.iter().map(|a| a.0).filter(|&t| t >= lo && t <= hi));
    }
    points.push(lo);
    if hi.is_finite() {
        points.push(hi);
    }
    points.sort_by(f64::total_cmp);
    points.dedup();
    let mut sup: f64 = 0.0;
    for &t in &points {
        sup = sup.max((estimate.eval(t) - truth.cdf(t)).abs());
        if t > lo {
            sup = sup.max((estimate.left_limit(t) - truth.cdf_left(t)).abs());
        }
    }
    if hi == f64::INFINITY {
        sup = sup.max((estimate.last_value() - truth.cdf(f64::MAX)).abs());
    }
    sup
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SizeSummary {
    pub n: usize,
    pub reps: usize,
    pub median_error: f64,
    pub max_error: f64,
    pub seeds: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PointSummary {
    pub t: f64,
    pub n: usize,
    pub reps: usize,
    pub truth: f64,
    /// mean of `√n (F̂([0, t]) − F([0, t]))`
    pub mean: f64,
    pub sd: f64,
    /// standardized third moment
    pub skewness: f64,
    pub seeds: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CoverageSummary {
    pub t: f64,
    pub n: usize,
    pub reps: usize,
    pub resamples: usize,
    pub level: f64,
    pub truth: f64,
    pub covered: usize,
    pub coverage: f64,
    pub seeds: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StudyReport {
    pub study: String,
    pub model: Model,
    pub generator: String,
    pub master_seed: u64,
    #[serde(default)]
    pub per_n: Vec<SizeSummary>,
    #[serde(default)]
    pub per_t: Vec<PointSummary>,
    #[serde(default)]
    pub coverage: Option<CoverageSummary>,
    /// condition-(11) integral of the analytic subdistributions (discrete specs)
    #[serde(default)]
    pub condition11: Option<f64>,
}

impl StudyReport {
    fn new(study: &str, spec: &LatentSpec, master_seed: u64) -> Self {
        Self {
            study: study.into(),
            model: spec.model(),
            generator: GENERATOR.into(),
            master_seed,
            per_n: Vec::new(),
            per_t: Vec::new(),
            coverage: None,
            condition11: None,
        }
    }
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len();
    if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * (v[m / 2 - 1] + v[m / 2])
    }
}

/// Sup-norm error of the model-appropriate estimator against the true `F_T`
/// over `reps` datasets per sample size.
///
/// Without `region`, the whole half-line is used and the spec must be
/// identified there; with `region = (a, b)`, errors are measured on `[a, b]`.
pub fn convergence_study(
    spec: &LatentSpec,
    sizes: &[usize],
    reps: usize,
    seed: u64,
    region: Option<(f64, f64)>,
) -> Result<StudyReport> {
    spec.validate()?;
    if reps == 0 || sizes.contains(&0) {
        return Err(Error::Domain("reps and sample sizes must be positive".into()));
    }
    let (lo, hi) = region.unwrap_or((0.0, f64::INFINITY));
    if !(lo <= hi) || lo < 0.0 {
        return Err(Error::Domain(format!("invalid region [{lo}, {hi}]")));
    }
    // [0, hi] must be checked from below 0 so that an atom at 0 counts
    spec.require_identified(if lo == 0.0 { -1.0 } else { lo }, hi)?;
    let model = spec.model();
    let mut report = StudyReport::new("convergence", spec, seed);
    for &n in sizes {
        let seeds: Vec<u64> = (0..reps).map(|r| derive_seed(seed, n as u64, r as u64)).collect();
        let errors = seeds
            .par_iter()
            .map(|&s| {
                let obs = sample_latent(spec, n, s)?;
                let cdf = fit_cdf(&GroupedSample::group(&obs)?, model)?;
                Ok(sup_error(&cdf, spec.t(), lo, hi))
            })
            .collect::<Result<Vec<f64>>>()?;
        report.per_n.push(SizeSummary {
            n,
            reps,
            median_error: median(&errors),
            max_error: errors.iter().copied().fold(0.0, f64::max),
            seeds,
        });
    }
    Ok(report)
}

fn check_identified_at(spec: &LatentSpec, t: f64) -> Result<()> {
    match spec.model() {
        // F^I([0, t]) only uses hazard increments on [0, t]
        Model::One => spec.require_identified(-1.0, t),
        // F^II([0, t]) only uses reverse hazard increments on (t, ∞]
        Model::Two => spec.require_identified(t, f64::INFINITY),
        Model::Turnbull => spec.require_identified(-1.0, f64::INFINITY),
    }
}

fn moments(xs: &[f64]) -> (f64, f64, f64) {
    let k = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / k;
    let m2 = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / k;
    let m3 = xs.iter().map(|x| (x - mean).powi(3)).sum::<f64>() / k;
    let sd = if xs.len() > 1 { (m2 * k / (k - 1.0)).sqrt() } else { 0.0 };
    let skew = if m2 > 0.0 { m3 / m2.powf(1.5) } else { 0.0 };
    (mean, sd, skew)
}

/// Moments of `√n (F̂([0, t]) − F_T([0, t]))` over `reps` datasets.
pub fn normality_study(spec: &LatentSpec, t: f64, n: usize, reps: usize, seed: u64) -> Result<StudyReport> {
    spec.validate()?;
    if reps == 0 || n == 0 {
        return Err(Error::Domain("reps and n must be positive".into()));
    }
    check_identified_at(spec, t)?;
    let model = spec.model();
    let truth = spec.t().cdf(t);
    let root_n = (n as f64).sqrt();
    let seeds: Vec<u64> = (0..reps).map(|r| derive_seed(seed, n as u64, r as u64)).collect();
    let xs = seeds
        .par_iter()
        .map(|&s| {
            let obs = sample_latent(spec, n, s)?;
            let cdf = fit_cdf(&GroupedSample::group(&obs)?, model)?;
            Ok(root_n * (cdf.eval(t) - truth))
        })
        .collect::<Result<Vec<f64>>>()?;
    let (mean, sd, skewness) = moments(&xs);
    let mut report = StudyReport::new("normality", spec, seed);
    report.per_t.push(PointSummary { t, n, reps, truth, mean, sd, skewness, seeds });
    report.condition11 = analytic_condition11(spec);
    Ok(report)
}

fn analytic_condition11(spec: &LatentSpec) -> Option<f64> {
    let [h0, h1, h2] = analytic_subdistributions(spec).ok()?;
    condition_11_diagnostic(&h0, &h1, &h2).ok().map(|d| d.condition11)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BootstrapInterval {
    pub t: f64,
    /// full-data `F̂([0, t])`
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
    /// `t` outside `[Z_1, Z_M]`
    pub degenerate: bool,
    /// `H_n01([0, t]) = 1`, beyond the range where the limit theory applies
    pub beyond_tau: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BootstrapReport {
    pub model: Model,
    pub resamples: usize,
    pub level: f64,
    pub seed: u64,
    pub generator: String,
    /// smallest `Z_j` with `H_n01([0, Z_j]) = 1`; `None` when never reached
    pub tau_hat: Option<f64>,
    /// resamples whose refit failed (e.g. degenerate Turnbull support); excluded
    pub failed_resamples: usize,
    pub intervals: Vec<BootstrapInterval>,
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Resamples observations by index on a fixed grid, so no re-sorting is needed.
struct Resampler {
    z: Vec<f64>,
    slot: Vec<(usize, u8)>,
}

impl Resampler {
    fn new(data: &[Observation], g: &GroupedSample) -> Self {
        let z = g.z().to_vec();
        let slot = data
            .iter()
            .map(|o| (z.binary_search_by(|p| p.total_cmp(&o.y())).expect("observation on grid"), o.a()))
            .collect();
        Self { z, slot }
    }

    fn draw(&self, rng: &mut Pcg64) -> Result<GroupedSample> {
        let m = self.z.len();
        let mut d = [vec![0usize; m], vec![0usize; m], vec![0usize; m]];
        let n = self.slot.len();
        for _ in 0..n {
            let (j, a) = self.slot[rng.gen_range(0..n)];
            d[a as usize][j] += 1;
        }
        let [d0, d1, d2] = d;
        GroupedSample::from_counts(self.z.clone(), d0, d1, d2)
    }
}

/// Percentile bootstrap intervals for `F([0, t])` at each requested `t`.
pub fn bootstrap_ci(
    data: &[Observation],
    model: Model,
    t_points: &[f64],
    resamples: usize,
    level: f64,
    seed: u64,
) -> Result<BootstrapReport> {
    if resamples < 2 {
        return Err(Error::Domain("need at least 2 bootstrap resamples".into()));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Domain("level must lie in (0, 1)".into()));
    }
    let g = GroupedSample::group(data)?;
    let full = fit_cdf(&g, model)?;
    let resampler = Resampler::new(data, &g);
    let draws: Vec<Option<Vec<f64>>> = (0..resamples)
        .into_par_iter()
        .map(|b| {
            let mut rng = rng_for(derive_seed(seed, data.len() as u64, b as u64));
            let sample = resampler.draw(&mut rng)?;
            match fit_cdf(&sample, model) {
                Ok(cdf) => Ok(Some(t_points.iter().map(|&t| cdf.eval(t)).collect())),
                Err(Error::DegenerateSupport(_)) | Err(Error::ModelViolation(_)) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_>>()?;
    let ok: Vec<&Vec<f64>> = draws.iter().flatten().collect();
    if ok.len() < 2 {
        return Err(Error::DegenerateSupport("fewer than 2 bootstrap refits succeeded".into()));
    }

    let n = g.n();
    let mut h01 = 0usize;
    let mut tau_hat = None;
    for (j, &z) in g.z().iter().enumerate() {
        h01 += g.d(0)[j] + g.d(1)[j];
        if h01 == n {
            tau_hat = Some(z);
            break;
        }
    }
    let (z_min, z_max) = (g.z()[0], *g.z().last().unwrap());
    let alpha = 1.0 - level;
    let intervals = t_points
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let mut vals: Vec<f64> = ok.iter().map(|v| v[i]).collect();
            vals.sort_by(f64::total_cmp);
            BootstrapInterval {
                t,
                estimate: full.eval(t),
                lower: quantile(&vals, alpha / 2.0),
                upper: quantile(&vals, 1.0 - alpha / 2.0),
                degenerate: t < z_min || t > z_max,
                beyond_tau: tau_hat.is_some_and(|tau| t >= tau),
            }
        })
        .collect();
    Ok(BootstrapReport {
        model,
        resamples,
        level,
        seed,
        generator: GENERATOR.into(),
        tau_hat,
        failed_resamples: draws.len() - ok.len(),
        intervals,
    })
}

/// Fraction of bootstrap intervals for `F([0, t])` that contain the truth,
/// over `reps` simulated datasets of size `n`.
pub fn bootstrap_coverage(
    spec: &LatentSpec,
    t: f64,
    n: usize,
    reps: usize,
    resamples: usize,
    level: f64,
    seed: u64,
) -> Result<StudyReport> {
    spec.validate()?;
    if reps == 0 || n == 0 {
        return Err(Error::Domain("reps and n must be positive".into()));
    }
    check_identified_at(spec, t)?;
    let model = spec.model();
    let truth = spec.t().cdf(t);
    let seeds: Vec<u64> = (0..reps).map(|r| derive_seed(seed, n as u64, r as u64)).collect();
    let hits = seeds
        .par_iter()
        .map(|&s| {
            let obs = sample_latent(spec, n, s)?;
            let ci = bootstrap_ci(&obs, model, &[t], resamples, level, splitmix64(s))?;
            let iv = &ci.intervals[0];
            Ok(iv.lower <= truth && truth <= iv.upper)
        })
        .collect::<Result<Vec<bool>>>()?;
    let covered = hits.iter().filter(|&&h| h).count();
    let mut report = StudyReport::new("coverage", spec, seed);
    report.coverage = Some(CoverageSummary {
        t,
        n,
        reps,
        resamples,
        level,
        truth,
        covered,
        coverage: covered as f64 / reps as f64,
        seeds,
    });
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point(at: f64) -> Dist {
        Dist::PointMass { at }
    }

    fn discrete(points: &[f64], probs: &[f64]) -> Dist {
        Dist::Discrete { points: points.to_vec(), probs: probs.to_vec() }
    }

    pub(crate) fn a1() -> LatentSpec {
        LatentSpec::One {
            t: discrete(&[1.0, 2.0], &[0.5, 0.5]),
            v1: point(f64::INFINITY),
            u1: discrete(&[0.0, 1.5], &[0.5, 0.5]),
        }
    }

    fn all_equal(obs: &[Observation], y: f64, a: u8) -> bool {
        obs.iter().all(|o| o.y() == y && o.a() == a)
    }

    #[test]
    fn degenerate_samplers() {
        let s = LatentSpec::One { t: point(2.0), v1: point(f64::INFINITY), u1: point(0.0) };
        assert!(all_equal(&sample_latent(&s, 50, 7).unwrap(), 2.0, 0));
        let s = LatentSpec::One { t: point(1.0), v1: point(f64::INFINITY), u1: point(3.0) };
        assert!(all_equal(&sample_latent(&s, 50, 7).unwrap(), 3.0, 2));
        let s = LatentSpec::Two { t: point(2.0), u2: point(0.0), v2: point(1.0) };
        assert!(all_equal(&sample_latent(&s, 50, 7).unwrap(), 1.0, 1));
    }

    #[test]
    fn sampling_is_deterministic_in_the_seed() {
        let s = a1();
        assert_eq!(sample_latent(&s, 100, 3).unwrap(), sample_latent(&s, 100, 3).unwrap());
        assert_ne!(sample_latent(&s, 100, 3).unwrap(), sample_latent(&s, 100, 4).unwrap());
    }

    #[test]
    fn analytic_a1_a2_and_turnbull() {
        let [h0, h1, h2] = analytic_subdistributions(&a1()).unwrap();
        assert_eq!((h0.points(), h0.masses()), (&[1.0, 2.0][..], &[0.25, 0.5][..]));
        assert!(h1.is_empty());
        assert_eq!((h2.points(), h2.masses()), (&[1.5][..], &[0.25][..]));

        let a2 = LatentSpec::Two {
            t: discrete(&[1.0, 2.0], &[0.5, 0.5]),
            u2: point(0.0),
            v2: discrete(&[1.5, f64::INFINITY], &[0.5, 0.5]),
        };
        let [h0, h1, h2] = analytic_subdistributions(&a2).unwrap();
        assert_eq!((h0.points(), h0.masses()), (&[1.0, 2.0][..], &[0.5, 0.25][..]));
        assert_eq!((h1.points(), h1.masses()), (&[1.5][..], &[0.25][..]));
        assert!(h2.is_empty());

        let tb = LatentSpec::Turnbull { t: discrete(&[1.0, 2.0], &[0.5, 0.5]), l: point(0.0), offset: point(1.5) };
        let [h0, h1, h2] = analytic_subdistributions(&tb).unwrap();
        assert_eq!((h0.points(), h0.masses()), (&[1.0][..], &[0.5][..]));
        assert_eq!((h1.points(), h1.masses()), (&[1.5][..], &[0.5][..]));
        assert!(h2.is_empty());
    }

    #[test]
    fn analytic_needs_discrete_components() {
        let s = LatentSpec::One { t: Dist::Exponential { rate: 1.0 }, v1: point(f64::INFINITY), u1: point(0.0) };
        assert!(matches!(analytic_subdistributions(&s), Err(Error::Domain(_))));
    }

    #[test]
    fn spec_validation() {
        let s = LatentSpec::One { t: point(f64::INFINITY), v1: point(1.0), u1: point(0.0) };
        assert!(s.validate().is_err());
        let s = LatentSpec::One { t: discrete(&[1.0], &[0.5]), v1: point(1.0), u1: point(0.0) };
        assert!(s.validate().is_err());
        let s = LatentSpec::Turnbull { t: point(1.0), l: point(0.0), offset: point(0.0) };
        assert!(s.validate().is_err());
        let s = LatentSpec::Two { t: Dist::Weibull { shape: -1.0, scale: 1.0 }, u2: point(0.0), v2: point(1.0) };
        assert!(s.validate().is_err());
    }

    #[test]
    fn toml_round_trip() {
        let text = r#"
model = "one"

[t]
kind = "discrete"
points = [1.0, 2.0]
probs = [0.5, 0.5]

[v1]
kind = "point_mass"
at = inf

[u1]
kind = "discrete"
points = [0.0, 1.5]
probs = [0.5, 0.5]
"#;
        let spec = LatentSpec::from_toml_str(text).unwrap();
        assert_eq!(spec, a1());
        let again = LatentSpec::from_toml_str(&spec.to_toml_string().unwrap()).unwrap();
        assert_eq!(again, spec);
        assert!(LatentSpec::from_toml_str("model = \"three\"").is_err());
    }

    #[test]
    fn identification_checks() {
        assert_eq!(a1().unidentified_mass(-1.0, f64::INFINITY), 0.0);
        // U1 ≡ 1.5 blinds T = 1
        let s = LatentSpec::One { t: discrete(&[1.0, 2.0], &[0.5, 0.5]), v1: point(f64::INFINITY), u1: point(1.5) };
        assert_eq!(s.unidentified_mass(-1.0, f64::INFINITY), 0.5);
        assert!(matches!(convergence_study(&s, &[10], 1, 0, None), Err(Error::Unidentified(_))));
        assert!(convergence_study(&s, &[10], 1, 0, Some((1.6, 10.0))).is_ok());
        // continuous T, U1 bounded below by 1
        let s = LatentSpec::One {
            t: Dist::Exponential { rate: 1.0 },
            v1: point(f64::INFINITY),
            u1: Dist::Uniform { low: 1.0, high: 2.0 },
        };
        let expected = 1.0 - (-1.0f64).exp();
        assert!((s.unidentified_mass(-1.0, f64::INFINITY) - expected).abs() < 1e-15);
        // V2 never reaches T = 3.5; the probabilities sum to 1 only up to rounding
        let s = LatentSpec::Two {
            t: point(3.5),
            u2: point(2.5),
            v2: discrete(&[1.5, 2.5, 3.0], &[0.6727988443144396, 0.15562678085203294, 0.1715743748335273]),
        };
        assert_eq!(s.unidentified_mass(-1.0, f64::INFINITY), 1.0);
    }

    #[test]
    fn degenerate_study_has_zero_error() {
        let s = LatentSpec::One { t: point(2.0), v1: point(f64::INFINITY), u1: point(0.0) };
        let r = convergence_study(&s, &[5, 50], 4, 11, None).unwrap();
        assert!(r.per_n.iter().all(|p| p.max_error == 0.0));
        let r = normality_study(&s, 2.0, 30, 5, 1).unwrap();
        assert_eq!(r.per_t[0].mean, 0.0);
        assert_eq!(r.per_t[0].sd, 0.0);
    }

    #[test]
    fn studies_are_reproducible() {
        let a = convergence_study(&a1(), &[40], 1, 99, None).unwrap();
        let b = convergence_study(&a1(), &[40], 1, 99, None).unwrap();
        assert_eq!(a, b);
        let a = normality_study(&a1(), 1.0, 100, 20, 5).unwrap();
        let b = normality_study(&a1(), 1.0, 100, 20, 5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn bootstrap_zero_variance() {
        let data: Vec<Observation> = (0..20).map(|_| Observation::new(2.0, 0).unwrap()).collect();
        let r = bootstrap_ci(&data, Model::One, &[2.0], 50, 0.95, 1).unwrap();
        assert_eq!((r.intervals[0].lower, r.intervals[0].upper), (1.0, 1.0));
        assert!(!r.intervals[0].degenerate);
        let r = bootstrap_ci(&data, Model::One, &[3.0], 50, 0.95, 1).unwrap();
        assert!(r.intervals[0].degenerate);
    }

    #[test]
    fn bootstrap_contains_point_estimate_on_e1() {
        let data: Vec<Observation> =
            [(1.0, 2), (2.0, 0), (3.0, 0)].iter().map(|&(y, a)| Observation::new(y, a).unwrap()).collect();
        let r = bootstrap_ci(&data, Model::One, &[2.0], 200, 0.95, 8).unwrap();
        let iv = &r.intervals[0];
        assert_eq!(iv.estimate, 0.5);
        assert!(iv.lower <= 0.5 && 0.5 <= iv.upper);
        assert!(bootstrap_ci(&data, Model::One, &[2.0], 1, 0.95, 8).is_err());
        assert!(bootstrap_ci(&data, Model::One, &[2.0], 10, 1.0, 8).is_err());
    }

    #[test]
    fn quantile_interpolates() {
        let v = [0.0, 1.0, 2.0, 3.0];
        assert_eq!(quantile(&v, 0.0), 0.0);
        assert_eq!(quantile(&v, 1.0), 3.0);
        assert_eq!(quantile(&v, 0.5), 1.5);
    }

    #[test]
    fn sup_error_against_continuous_truth() {
        let truth = Dist::Uniform { low: 0.0, high: 1.0 };
        let est = MonotoneStepFunction::new(vec![0.5], vec![1.0], crate::measures::Orientation::Cdf, 0.0).unwrap();
        // worst gap is just before 0.5 (0 vs 0.5) and at 0.5 (1 vs 0.5)
        assert!((sup_error(&est, &truth, 0.0, f64::INFINITY) - 0.5).abs() < 1e-15);
        assert!((sup_error(&est, &truth, 0.0, 0.25) - 0.25).abs() < 1e-15);
    }
}
