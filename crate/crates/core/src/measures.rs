//! Discrete measure calculus on `[0, ∞]`.
//!
//! [`StepMeasure`] carries every finite subdistribution in the crate (observed
//! subdistributions, fitted distributions). [`HazardIncrements`] holds the
//! point masses of a hazard or reverse hazard measure, and the two
//! product-integrals turn predictable increments back into step functions:
//!
//! - `F((t, ∞]) = ∏_{s ≤ t} (1 − L⁻({s}))`
//! - `F([0, t]) = ∏_{s > t} (1 − M⁻({s}))`
//!
//! Products are accumulated directly in `f64`; grids are small enough that
//! log-space accumulation buys nothing.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack allowed on the total mass of a [`StepMeasure`] above 1.
const TOTAL_MASS_SLACK: f64 = 1e-12;

/// Finite discrete subdistribution on `[0, ∞]`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepMeasure {
    points: Vec<f64>,
    masses: Vec<f64>,
    mass_at_infinity: f64,
    // prefix[i] = Σ_{k ≤ i} masses[k]
    prefix: Vec<f64>,
    // suffix[i] = Σ_{k ≥ i} masses[k] + mass_at_infinity; suffix[len] = mass_at_infinity
    suffix: Vec<f64>,
}

impl StepMeasure {
    pub fn new(points: Vec<f64>, masses: Vec<f64>, mass_at_infinity: f64) -> Result<Self> {
        if points.len() != masses.len() {
            return Err(Error::Domain(format!("points/masses length mismatch: {} vs {}", points.len(), masses.len())));
        }
        if let Some(p) = points.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::Domain(format!("atom location {p} is not a finite nonnegative time")));
        }
        if points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Domain("atom locations must be strictly increasing".into()));
        }
        if let Some(m) =
            masses.iter().chain(std::iter::once(&mass_at_infinity)).find(|m| !(m.is_finite() && **m >= 0.0))
        {
            return Err(Error::Domain(format!("mass {m} is not a finite nonnegative number")));
        }
        let measure = Self::build(points, masses, mass_at_infinity);
        if measure.total() > 1.0 + TOTAL_MASS_SLACK {
            return Err(Error::Domain(format!("total mass {} exceeds 1", measure.total())));
        }
        Ok(measure)
    }

    /// Builds a measure from unordered atoms, merging repeated locations and
    /// dropping zero masses. An atom at `+∞` is routed to the mass at infinity.
    pub fn from_atoms<I>(atoms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, f64)>,
    {
        let mut atoms: Vec<(f64, f64)> = atoms.into_iter().filter(|&(_, m)| m != 0.0).collect();
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut points = Vec::with_capacity(atoms.len());
        let mut masses: Vec<f64> = Vec::with_capacity(atoms.len());
        let mut at_inf = 0.0;
        for (t, m) in atoms {
            if t == f64::INFINITY {
                at_inf += m;
            } else if points.last() == Some(&t) {
                *masses.last_mut().unwrap() += m;
            } else {
                points.push(t);
                masses.push(m);
            }
        }
        Self::new(points, masses, at_inf)
    }

    pub fn zero() -> Self {
        Self::build(Vec::new(), Vec::new(), 0.0)
    }

    fn build(points: Vec<f64>, masses: Vec<f64>, mass_at_infinity: f64) -> Self {
        let mut prefix = Vec::with_capacity(masses.len());
        let mut acc = 0.0;
        for m in &masses {
            acc += m;
            prefix.push(acc);
        }
        let mut suffix = vec![0.0; masses.len() + 1];
        suffix[masses.len()] = mass_at_infinity;
        for i in (0..masses.len()).rev() {
            suffix[i] = suffix[i + 1] + masses[i];
        }
        Self { points, masses, mass_at_infinity, prefix, suffix }
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn mass_at_infinity(&self) -> f64 {
        self.mass_at_infinity
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty() && self.mass_at_infinity == 0.0
    }

    /// Total mass including the atom at infinity.
    pub fn total(&self) -> f64 {
        self.suffix[0]
    }

    // number of atoms ≤ t
    fn count_le(&self, t: f64) -> usize {
        self.points.partition_point(|&p| p <= t)
    }

    // number of atoms < t
    fn count_lt(&self, t: f64) -> usize {
        self.points.partition_point(|&p| p < t)
    }

    /// `μ({t})`; `t = ∞` returns the mass at infinity.
    pub fn mass_at(&self, t: f64) -> f64 {
        if t == f64::INFINITY {
            return self.mass_at_infinity;
        }
        match self.points.binary_search_by(|p| p.total_cmp(&t)) {
            Ok(i) => self.masses[i],
            Err(_) => 0.0,
        }
    }

    /// `μ([0, t])`
    pub fn cum(&self, t: f64) -> f64 {
        if t == f64::INFINITY {
            return self.total();
        }
        match self.count_le(t) {
            0 => 0.0,
            k => self.prefix[k - 1],
        }
    }

    /// `μ([0, t))`
    pub fn cum_open(&self, t: f64) -> f64 {
        if t == f64::INFINITY {
            return self.prefix.last().copied().unwrap_or(0.0);
        }
        match self.count_lt(t) {
            0 => 0.0,
            k => self.prefix[k - 1],
        }
    }

    /// `μ((t, ∞])`
    pub fn tail(&self, t: f64) -> f64 {
        if t == f64::INFINITY {
            return 0.0;
        }
        self.suffix[self.count_le(t)]
    }

    /// `μ([t, ∞])`
    pub fn tail_closed(&self, t: f64) -> f64 {
        if t == f64::INFINITY {
            return self.mass_at_infinity;
        }
        self.suffix[self.count_lt(t)]
    }

    /// Sum of two measures on the union of their atoms.
    pub fn add(&self, other: &StepMeasure) -> Result<StepMeasure> {
        let atoms = self
            .points
            .iter()
            .copied()
            .zip(self.masses.iter().copied())
            .chain(other.points.iter().copied().zip(other.masses.iter().copied()));
        let mut sum = Self::from_atoms(atoms)?;
        let at_inf = self.mass_at_infinity + other.mass_at_infinity;
        if at_inf != 0.0 {
            sum = Self::new(sum.points, sum.masses, at_inf)?;
        }
        Ok(sum)
    }
}

/// Which hazard (or reverse hazard) measure a set of point masses belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HazardKind {
    /// cumulative hazard `L`
    L,
    /// predictable hazard `L⁻(dt) = F(dt) / F([t, ∞])`
    LMinus,
    /// unpredictable hazard `L⁺(dt) = F(dt) / F((t, ∞])`
    LPlus,
    /// cumulative reverse hazard `M`
    M,
    /// predictable reverse hazard `M⁻(dt) = F(dt) / F([0, t])`
    MMinus,
    /// unpredictable reverse hazard `M⁺(dt) = F(dt) / F([0, t))`
    MPlus,
}

impl HazardKind {
    pub fn is_predictable(self) -> bool {
        matches!(self, HazardKind::LMinus | HazardKind::MMinus)
    }

    pub fn is_reverse(self) -> bool {
        matches!(self, HazardKind::M | HazardKind::MMinus | HazardKind::MPlus)
    }
}

/// Point masses of a hazard measure on a strictly increasing grid.
#[derive(Debug, Clone, PartialEq)]
pub struct HazardIncrements {
    points: Vec<f64>,
    increments: Vec<f64>,
    kind: HazardKind,
}

impl HazardIncrements {
    pub fn new(points: Vec<f64>, increments: Vec<f64>, kind: HazardKind) -> Result<Self> {
        if points.len() != increments.len() {
            return Err(Error::Domain("points/increments length mismatch".into()));
        }
        if points.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::Domain("hazard grid must hold finite nonnegative times".into()));
        }
        if points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Domain("hazard grid must be strictly increasing".into()));
        }
        for (&t, &x) in points.iter().zip(&increments) {
            let ok = if kind.is_predictable() { (0.0..=1.0).contains(&x) } else { x >= 0.0 && !x.is_nan() };
            if !ok {
                return Err(Error::Domain(format!("{kind:?} increment {x} at t = {t} out of range")));
            }
        }
        Ok(Self { points, increments, kind })
    }

    pub fn empty(kind: HazardKind) -> Self {
        Self { points: Vec::new(), increments: Vec::new(), kind }
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn increments(&self) -> &[f64] {
        &self.increments
    }

    pub fn kind(&self) -> HazardKind {
        self.kind
    }
}

/// Whether a [`MonotoneStepFunction`] is a CDF `F([0, t])` or a survival function `F((t, ∞])`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Cdf,
    Survival,
}

/// Right-continuous monotone step function with values in `[0, 1]`.
///
/// `before` is the value on `[0, grid[0])`; `values[i]` holds on `[grid[i], grid[i+1])`.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneStepFunction {
    grid: Vec<f64>,
    values: Vec<f64>,
    orientation: Orientation,
    before: f64,
}

impl MonotoneStepFunction {
    pub fn new(grid: Vec<f64>, values: Vec<f64>, orientation: Orientation, before: f64) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::Domain("grid/values length mismatch".into()));
        }
        if grid.windows(2).any(|w| w[0] >= w[1]) || grid.iter().any(|t| t.is_nan()) {
            return Err(Error::Domain("step function grid must be strictly increasing".into()));
        }
        let mut prev = before;
        for &v in std::iter::once(&before).chain(&values) {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Domain(format!("step function value {v} outside [0, 1]")));
            }
            let ordered = match orientation {
                Orientation::Cdf => v >= prev,
                Orientation::Survival => v <= prev,
            };
            if !ordered {
                return Err(Error::Domain(format!("{orientation:?} values are not monotone")));
            }
            prev = v;
        }
        Ok(Self { grid, values, orientation, before })
    }

    /// The constant function `c` (empty grid).
    pub fn constant(c: f64, orientation: Orientation) -> Self {
        Self { grid: Vec::new(), values: Vec::new(), orientation, before: c }
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    /// Value before the first grid point.
    pub fn before(&self) -> f64 {
        self.before
    }

    /// Value from the last grid point onwards.
    pub fn last_value(&self) -> f64 {
        self.values.last().copied().unwrap_or(self.before)
    }

    /// Right-continuous evaluation at `t`.
    pub fn eval(&self, t: f64) -> f64 {
        match self.grid.partition_point(|&g| g <= t) {
            0 => self.before,
            k => self.values[k - 1],
        }
    }

    /// Left limit `f(t−)`.
    pub fn left_limit(&self, t: f64) -> f64 {
        match self.grid.partition_point(|&g| g < t) {
            0 => self.before,
            k => self.values[k - 1],
        }
    }

    /// `1 − f`, with the opposite orientation.
    pub fn complement(&self) -> Self {
        let orientation = match self.orientation {
            Orientation::Cdf => Orientation::Survival,
            Orientation::Survival => Orientation::Cdf,
        };
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| 1.0 - v).collect(),
            orientation,
            before: 1.0 - self.before,
        }
    }

    /// Jump sizes `|f(t) − f(t−)|` on the grid.
    pub fn jumps(&self) -> Vec<f64> {
        let mut prev = self.before;
        self.values
            .iter()
            .map(|&v| {
                let j = (v - prev).abs();
                prev = v;
                j
            })
            .collect()
    }
}

/// `F((t, ∞]) = ∏_{s ≤ t} (1 − L⁻({s}))`.
///
/// The value at the last grid point is the residual mass at infinity.
pub fn survival_from_hazard(h: &HazardIncrements) -> Result<MonotoneStepFunction> {
    if h.kind != HazardKind::LMinus {
        return Err(Error::Domain(format!("survival_from_hazard needs L- increments, got {:?}", h.kind)));
    }
    let mut s = 1.0;
    let values = h
        .increments
        .iter()
        .map(|&x| {
            s *= 1.0 - x;
            s
        })
        .collect();
    Ok(MonotoneStepFunction { grid: h.points.clone(), values, orientation: Orientation::Survival, before: 1.0 })
}

/// `F([0, t]) = ∏_{s > t} (1 − M⁻({s}))`.
///
/// The value before the first grid point is the residual mass at (or below) zero.
pub fn cdf_from_reverse_hazard(h: &HazardIncrements) -> Result<MonotoneStepFunction> {
    if h.kind != HazardKind::MMinus {
        return Err(Error::Domain(format!("cdf_from_reverse_hazard needs M- increments, got {:?}", h.kind)));
    }
    let m = h.increments.len();
    let mut values = vec![1.0; m];
    let mut f = 1.0;
    for i in (0..m).rev() {
        values[i] = f;
        f *= 1.0 - h.increments[i];
    }
    Ok(MonotoneStepFunction { grid: h.points.clone(), values, orientation: Orientation::Cdf, before: f })
}

/// Converts point masses between hazard kinds of the same family through the
/// bijection `L({t}) = −ln(1 − L⁻({t})) = ln(1 + L⁺({t}))` (and its reverse-time mirror).
pub fn point_mass_convert(h: &HazardIncrements, target: HazardKind) -> Result<HazardIncrements> {
    if h.kind.is_reverse() != target.is_reverse() {
        return Err(Error::Domain(format!("cannot convert {:?} into {:?}: different families", h.kind, target)));
    }
    let to_cumulative = |x: f64| -> f64 {
        match h.kind {
            HazardKind::L | HazardKind::M => x,
            HazardKind::LMinus | HazardKind::MMinus => -(-x).ln_1p(),
            HazardKind::LPlus | HazardKind::MPlus => x.ln_1p(),
        }
    };
    let from_cumulative = |c: f64| -> f64 {
        match target {
            HazardKind::L | HazardKind::M => c,
            HazardKind::LMinus | HazardKind::MMinus => -(-c).exp_m1(),
            HazardKind::LPlus | HazardKind::MPlus => c.exp_m1(),
        }
    };
    let increments = h.increments.iter().map(|&x| from_cumulative(to_cumulative(x))).collect();
    HazardIncrements::new(h.points.clone(), increments, target)
}

/// Sorted union of several grids.
pub(crate) fn union_grid<'a, I>(grids: I) -> Vec<f64>
where
    I: IntoIterator<Item = &'a [f64]>,
{
    let mut all: Vec<f64> = grids.into_iter().flatten().copied().collect();
    all.sort_by(f64::total_cmp);
    all.dedup();
    all
}

/// `sup_t |f(t) − g(t)|`, checked at every grid point of either function and at
/// every left limit.
pub fn sup_distance(f: &MonotoneStepFunction, g: &MonotoneStepFunction) -> Result<f64> {
    if f.orientation != g.orientation {
        return Err(Error::Domain("sup_distance needs step functions of the same orientation".into()));
    }
    let grid = union_grid([f.grid(), g.grid()]);
    let mut sup = (f.before - g.before).abs();
    for &t in &grid {
        sup = sup.max((f.eval(t) - g.eval(t)).abs());
        sup = sup.max((f.left_limit(t) - g.left_limit(t)).abs());
    }
    Ok(sup)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lminus(points: &[f64], inc: &[f64]) -> HazardIncrements {
        HazardIncrements::new(points.to_vec(), inc.to_vec(), HazardKind::LMinus).unwrap()
    }

    fn mminus(points: &[f64], inc: &[f64]) -> HazardIncrements {
        HazardIncrements::new(points.to_vec(), inc.to_vec(), HazardKind::MMinus).unwrap()
    }

    #[test]
    fn queries_on_a_small_measure() {
        let mu = StepMeasure::new(vec![1.0, 2.0, 3.0], vec![0.25, 0.25, 0.25], 0.25).unwrap();
        assert_eq!(mu.total(), 1.0);
        assert_eq!(mu.cum(2.0), 0.5);
        assert_eq!(mu.cum_open(2.0), 0.25);
        assert_eq!(mu.tail(2.0), 0.5);
        assert_eq!(mu.tail_closed(2.0), 0.75);
        assert_eq!(mu.cum(0.5), 0.0);
        assert_eq!(mu.tail(10.0), 0.25);
        assert_eq!(mu.mass_at(3.0), 0.25);
        assert_eq!(mu.mass_at(2.5), 0.0);
        assert_eq!(mu.mass_at(f64::INFINITY), 0.25);
    }

    #[test]
    fn rejects_bad_measures() {
        assert!(StepMeasure::new(vec![2.0, 1.0], vec![0.1, 0.1], 0.0).is_err());
        assert!(StepMeasure::new(vec![1.0], vec![-0.1], 0.0).is_err());
        assert!(StepMeasure::new(vec![1.0], vec![0.8], 0.3).is_err());
        assert!(StepMeasure::new(vec![-1.0], vec![0.1], 0.0).is_err());
    }

    #[test]
    fn from_atoms_merges_and_routes_infinity() {
        let mu = StepMeasure::from_atoms([(2.0, 0.25), (1.0, 0.25), (2.0, 0.25), (f64::INFINITY, 0.25), (5.0, 0.0)])
            .unwrap();
        assert_eq!(mu.points(), &[1.0, 2.0]);
        assert_eq!(mu.masses(), &[0.25, 0.5]);
        assert_eq!(mu.mass_at_infinity(), 0.25);
    }

    #[test]
    fn survival_from_empty_hazard_is_one() {
        let s = survival_from_hazard(&HazardIncrements::empty(HazardKind::LMinus)).unwrap();
        assert_eq!(s.eval(0.0), 1.0);
        assert_eq!(s.eval(1e9), 1.0);
    }

    #[test]
    fn survival_absorbing_jump() {
        let s = survival_from_hazard(&lminus(&[2.0], &[1.0])).unwrap();
        assert_eq!(s.eval(1.999), 1.0);
        assert_eq!(s.eval(2.0), 0.0);
        assert_eq!(s.eval(7.0), 0.0);
        assert_eq!(s.left_limit(2.0), 1.0);
    }

    #[test]
    fn survival_direct_product() {
        let s = survival_from_hazard(&lminus(&[1.0, 2.0], &[0.5, 0.5])).unwrap();
        assert_eq!(s.eval(1.0), 0.5);
        assert_eq!(s.eval(2.0), 0.25);
        assert_eq!(s.last_value(), 0.25);
    }

    #[test]
    fn cdf_from_empty_reverse_hazard_is_one() {
        let f = cdf_from_reverse_hazard(&HazardIncrements::empty(HazardKind::MMinus)).unwrap();
        assert_eq!(f.eval(0.0), 1.0);
    }

    #[test]
    fn cdf_all_mass_at_one() {
        let f = cdf_from_reverse_hazard(&mminus(&[1.0], &[1.0])).unwrap();
        assert_eq!(f.eval(0.5), 0.0);
        assert_eq!(f.eval(1.0), 1.0);
        assert_eq!(f.eval(4.0), 1.0);
    }

    #[test]
    fn cdf_hand_product() {
        let f = cdf_from_reverse_hazard(&mminus(&[2.0, 3.0], &[2.0 / 3.0, 0.25])).unwrap();
        assert_eq!(f.eval(3.0), 1.0);
        assert!((f.eval(2.0) - 0.75).abs() < 1e-15);
        assert!((f.eval(1.0) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn wrong_kind_is_a_domain_error() {
        assert!(survival_from_hazard(&mminus(&[1.0], &[0.5])).is_err());
        assert!(cdf_from_reverse_hazard(&lminus(&[1.0], &[0.5])).is_err());
        assert!(HazardIncrements::new(vec![1.0], vec![1.5], HazardKind::LMinus).is_err());
        assert!(HazardIncrements::new(vec![1.0], vec![-0.1], HazardKind::MMinus).is_err());
    }

    #[test]
    fn point_mass_conversions() {
        let h = lminus(&[1.0], &[0.5]);
        let l = point_mass_convert(&h, HazardKind::L).unwrap();
        let lp = point_mass_convert(&h, HazardKind::LPlus).unwrap();
        assert!((l.increments()[0] - 2f64.ln()).abs() < 1e-15);
        assert!((lp.increments()[0] - 1.0).abs() < 1e-15);

        let zero = lminus(&[1.0], &[0.0]);
        assert_eq!(point_mass_convert(&zero, HazardKind::L).unwrap().increments(), &[0.0]);
        assert_eq!(point_mass_convert(&zero, HazardKind::LPlus).unwrap().increments(), &[0.0]);

        let one = lminus(&[1.0], &[1.0]);
        assert_eq!(point_mass_convert(&one, HazardKind::L).unwrap().increments(), &[f64::INFINITY]);
        assert_eq!(point_mass_convert(&one, HazardKind::LPlus).unwrap().increments(), &[f64::INFINITY]);
        // an infinite cumulative increment maps back to exactly 1
        let inf = HazardIncrements::new(vec![1.0], vec![f64::INFINITY], HazardKind::L).unwrap();
        assert_eq!(point_mass_convert(&inf, HazardKind::LMinus).unwrap().increments(), &[1.0]);

        assert!(point_mass_convert(&h, HazardKind::M).is_err());
    }

    #[test]
    fn sup_distance_examples() {
        let f = MonotoneStepFunction::new(vec![1.0, 2.0], vec![0.5, 1.0], Orientation::Cdf, 0.0).unwrap();
        let g = MonotoneStepFunction::new(vec![1.0, 2.0], vec![0.25, 1.0], Orientation::Cdf, 0.0).unwrap();
        assert_eq!(sup_distance(&f, &f).unwrap(), 0.0);
        assert_eq!(sup_distance(&f, &g).unwrap(), 0.25);

        let one = MonotoneStepFunction::constant(1.0, Orientation::Survival);
        let jump = survival_from_hazard(&lminus(&[2.0], &[1.0])).unwrap();
        assert_eq!(sup_distance(&one, &jump).unwrap(), 1.0);
        assert!(sup_distance(&f, &jump).is_err());
    }

    #[test]
    fn step_function_rejects_non_monotone_values() {
        assert!(MonotoneStepFunction::new(vec![1.0, 2.0], vec![0.5, 0.4], Orientation::Cdf, 0.0).is_err());
        assert!(MonotoneStepFunction::new(vec![1.0], vec![0.5], Orientation::Survival, 0.4).is_err());
    }
}
