//! Scalar boundary laws: the feedback `g` acting at `x = L` and the forcing
//! `F` acting in the dynamic condition at `x = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sampling window used to verify monotonicity and Lipschitz bounds.
pub const SAMPLE_RANGE: f64 = 100.0;
pub const SAMPLE_COUNT: usize = 10_000;

/// Monotone piecewise-linear table `(s_i, g_i)`, extended linearly by the end
/// slopes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TableSpec")]
pub struct MonotoneTable {
    s: Vec<f64>,
    g: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TableSpec {
    s: Vec<f64>,
    g: Vec<f64>,
}

impl TryFrom<TableSpec> for MonotoneTable {
    type Error = Error;

    fn try_from(spec: TableSpec) -> Result<Self> {
        Self::new(spec.s, spec.g)
    }
}

impl MonotoneTable {
    pub fn new(s: Vec<f64>, g: Vec<f64>) -> Result<Self> {
        if s.len() != g.len() || s.len() < 2 {
            return Err(Error::Contract(
                "table needs at least two (s, g) pairs of equal length".into(),
            ));
        }
        if s.iter().chain(&g).any(|x| !x.is_finite()) {
            return Err(Error::Contract("table contains non-finite entries".into()));
        }
        if s.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Contract("table abscissae must strictly increase".into()));
        }
        if g.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Contract("table values must be nondecreasing".into()));
        }
        let table = Self { s, g };
        if table.eval(0.0).abs() > 1e-12 {
            return Err(Error::Contract("table must satisfy g(0) = 0".into()));
        }
        Ok(table)
    }

    pub fn abscissae(&self) -> &[f64] {
        &self.s
    }

    pub fn values(&self) -> &[f64] {
        &self.g
    }

    fn segment(&self, s: f64) -> usize {
        let n = self.s.len();
        match self.s.partition_point(|&x| x <= s) {
            0 => 0,
            i if i >= n => n - 2,
            i => i - 1,
        }
    }

    fn slope(&self, i: usize) -> f64 {
        (self.g[i + 1] - self.g[i]) / (self.s[i + 1] - self.s[i])
    }

    pub fn eval(&self, s: f64) -> f64 {
        let i = self.segment(s);
        self.g[i] + self.slope(i) * (s - self.s[i])
    }

    pub fn derivative(&self, s: f64) -> f64 {
        self.slope(self.segment(s))
    }
}

/// Feedback nonlinearity `g`: continuous, nondecreasing, `g(0) = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FeedbackLaw {
    LinearGain { gain: f64 },
    Deadzone { width: f64 },
    Saturation { gain: f64, cap: f64 },
    /// `a·s + b·s³`
    PowerSector { linear: f64, cubic: f64 },
    Tabulated(MonotoneTable),
}

impl FeedbackLaw {
    pub fn identity() -> Self {
        FeedbackLaw::LinearGain { gain: 1.0 }
    }

    /// Checks parameter ranges of the built-in families.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Contract(msg));
        match *self {
            FeedbackLaw::LinearGain { gain } if !(gain.is_finite() && gain >= 0.0) => {
                bad(format!("linear_gain: k must be finite and >= 0, got {gain}"))
            }
            FeedbackLaw::Deadzone { width } if !(width.is_finite() && width >= 0.0) => {
                bad(format!("deadzone: d must be finite and >= 0, got {width}"))
            }
            FeedbackLaw::Saturation { gain, cap }
                if !(gain.is_finite() && gain >= 0.0 && cap.is_finite() && cap >= 0.0) =>
            {
                bad(format!("saturation: k and cap must be finite and >= 0, got ({gain}, {cap})"))
            }
            FeedbackLaw::PowerSector { linear, cubic }
                if !(linear.is_finite() && linear >= 0.0 && cubic.is_finite() && cubic >= 0.0) =>
            {
                bad(format!("power_sector: a and b must be finite and >= 0, got ({linear}, {cubic})"))
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, s: f64) -> f64 {
        match self {
            FeedbackLaw::LinearGain { gain } => gain * s,
            FeedbackLaw::Deadzone { width } => {
                if s > *width {
                    s - width
                } else if s < -width {
                    s + width
                } else {
                    0.0
                }
            }
            FeedbackLaw::Saturation { gain, cap } => (gain * s).clamp(-cap, *cap),
            FeedbackLaw::PowerSector { linear, cubic } => linear * s + cubic * s * s * s,
            FeedbackLaw::Tabulated(t) => t.eval(s),
        }
    }

    /// One-sided derivative, used only as a Newton slope (bisection guards
    /// every step, so kinks are harmless).
    pub fn derivative(&self, s: f64) -> f64 {
        match self {
            FeedbackLaw::LinearGain { gain } => *gain,
            FeedbackLaw::Deadzone { width } => {
                if s.abs() > *width {
                    1.0
                } else {
                    0.0
                }
            }
            FeedbackLaw::Saturation { gain, cap } => {
                if (gain * s).abs() < *cap {
                    *gain
                } else {
                    0.0
                }
            }
            FeedbackLaw::PowerSector { linear, cubic } => linear + 3.0 * cubic * s * s,
            FeedbackLaw::Tabulated(t) => t.derivative(s),
        }
    }

    fn name(&self) -> &'static str {
        match self {
            FeedbackLaw::LinearGain { .. } => "linear_gain",
            FeedbackLaw::Deadzone { .. } => "deadzone",
            FeedbackLaw::Saturation { .. } => "saturation",
            FeedbackLaw::PowerSector { .. } => "power_sector",
            FeedbackLaw::Tabulated(_) => "tabulated",
        }
    }
}

/// Boundary forcing `F`: globally Lipschitz, `F(0) = 0`. Positive slope
/// injects energy (anti-damping).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ForcingLaw {
    Zero,
    Linear { slope: f64 },
    /// `q·tanh(s)`
    TanhAntidamping { q: f64 },
    /// `−k·tanh(s)`
    MonotoneDamping { k: f64 },
    /// slope `inner` on `|s| ≤ knee`, slope `outer` beyond, odd
    PiecewiseLinear { inner: f64, outer: f64, knee: f64 },
}

impl ForcingLaw {
    pub fn validate(&self) -> Result<()> {
        let finite = |xs: &[f64]| xs.iter().all(|x| x.is_finite());
        match *self {
            ForcingLaw::Linear { slope } if !finite(&[slope]) => {
                Err(Error::Contract("linear: c must be finite".into()))
            }
            ForcingLaw::TanhAntidamping { q } if !finite(&[q]) => {
                Err(Error::Contract("tanh_antidamping: q must be finite".into()))
            }
            ForcingLaw::MonotoneDamping { k } if !(finite(&[k]) && k >= 0.0) => {
                Err(Error::Contract(format!("monotone_damping: k must be finite and >= 0, got {k}")))
            }
            ForcingLaw::PiecewiseLinear { inner, outer, knee }
                if !(finite(&[inner, outer, knee]) && knee > 0.0) =>
            {
                Err(Error::Contract(format!(
                    "piecewise_linear: slopes must be finite and knee > 0, got ({inner}, {outer}, {knee})"
                )))
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, s: f64) -> f64 {
        match *self {
            ForcingLaw::Zero => 0.0,
            ForcingLaw::Linear { slope } => slope * s,
            ForcingLaw::TanhAntidamping { q } => q * s.tanh(),
            ForcingLaw::MonotoneDamping { k } => -k * s.tanh(),
            ForcingLaw::PiecewiseLinear { inner, outer, knee } => {
                let a = s.abs();
                if a <= knee {
                    inner * s
                } else {
                    s.signum() * (inner * knee + outer * (a - knee))
                }
            }
        }
    }

    /// True when `F` is nonincreasing, so the energy cannot grow.
    pub fn is_nonincreasing(&self) -> bool {
        match *self {
            ForcingLaw::Zero => true,
            ForcingLaw::Linear { slope } => slope <= 0.0,
            ForcingLaw::TanhAntidamping { q } => q <= 0.0,
            ForcingLaw::MonotoneDamping { k } => k >= 0.0,
            ForcingLaw::PiecewiseLinear { inner, outer, .. } => inner <= 0.0 && outer <= 0.0,
        }
    }
}

/// Sector data `α1|s| ≤ |g(s)| ≤ α2|s|` for `|s| ≥ S`, plus the constant
/// `sup_{|s|≤S} |g(s)|²` needed by the residual-level estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectorData {
    pub alpha1: f64,
    pub alpha2: f64,
    pub s_threshold: f64,
    pub sup_g_sq_on_ball: f64,
    /// false for analytic constants, true when estimated from samples
    pub estimated: bool,
}

impl SectorData {
    pub fn new(alpha1: f64, alpha2: f64, s_threshold: f64, sup_g_sq_on_ball: f64) -> Result<Self> {
        if !(alpha1 > 0.0 && alpha1 <= alpha2 && alpha2.is_finite()) {
            return Err(Error::Contract(format!(
                "sector needs 0 < alpha1 <= alpha2 < inf, got ({alpha1}, {alpha2})"
            )));
        }
        if !(s_threshold >= 0.0 && s_threshold.is_finite()) || !(sup_g_sq_on_ball >= 0.0) {
            return Err(Error::Contract(format!(
                "sector needs S >= 0 and sup >= 0, got ({s_threshold}, {sup_g_sq_on_ball})"
            )));
        }
        Ok(Self {
            alpha1,
            alpha2,
            s_threshold,
            sup_g_sq_on_ball,
            estimated: false,
        })
    }

    /// Global sector (`S = 0`).
    pub fn global(alpha1: f64, alpha2: f64) -> Result<Self> {
        Self::new(alpha1, alpha2, 0.0, 0.0)
    }
}

/// Lipschitz data of a forcing law around the origin and globally.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LipschitzData {
    pub q_global: Option<f64>,
    pub q_local: f64,
    /// radius of the neighbourhood where `q_local` applies (∞ when global)
    pub neighborhood_radius: f64,
}

pub fn eval_g(law: &FeedbackLaw, s: f64) -> f64 {
    law.eval(s)
}

#[allow(non_snake_case)]
pub fn eval_F(law: &ForcingLaw, s: f64) -> f64 {
    law.eval(s)
}

/// Tightest sector for the built-in families; sampled estimate for tables.
pub fn sector_params(law: &FeedbackLaw) -> Result<SectorData> {
    law.validate()?;
    match *law {
        FeedbackLaw::LinearGain { gain } => {
            if gain > 0.0 {
                SectorData::global(gain, gain)
            } else {
                Err(Error::NoValidSector("linear_gain with k = 0 has alpha1 = 0".into()))
            }
        }
        FeedbackLaw::Deadzone { width } => {
            // |s| − d ≥ |s|/2 once |s| ≥ 2d; sup over |s| ≤ 2d of (|s| − d)² is d²
            if width == 0.0 {
                SectorData::global(1.0, 1.0)
            } else {
                SectorData::new(0.5, 1.0, 2.0 * width, width * width)
            }
        }
        FeedbackLaw::Saturation { .. } => Err(Error::NoValidSector(
            "saturation: |g| is capped so alpha1·|s| eventually exceeds it".into(),
        )),
        FeedbackLaw::PowerSector { linear, cubic } => {
            if cubic > 0.0 {
                Err(Error::NoValidSector(
                    "power_sector: cubic growth defeats every linear upper bound alpha2·|s|".into(),
                ))
            } else if linear > 0.0 {
                SectorData::global(linear, linear)
            } else {
                Err(Error::NoValidSector("power_sector with a = b = 0".into()))
            }
        }
        FeedbackLaw::Tabulated(ref table) => estimate_table_sector(table),
    }
}

fn estimate_table_sector(table: &MonotoneTable) -> Result<SectorData> {
    let s = table.abscissae();
    let (first, last) = (0, s.len() - 2);
    if table.slope(first) <= 0.0 || table.slope(last) <= 0.0 {
        return Err(Error::NoValidSector(
            "tabulated law is flat beyond the table, lower sector bound fails".into(),
        ));
    }
    let samples = symmetric_samples(SAMPLE_RANGE.max(s[s.len() - 1].abs()).max(s[0].abs()));
    let ratio = |x: f64| table.eval(x).abs() / x.abs();
    // asymptotic ratio bound from the outer half of the window
    let far = samples
        .iter()
        .filter(|x| x.abs() >= 0.5 * SAMPLE_RANGE)
        .map(|&x| ratio(x))
        .fold(f64::INFINITY, f64::min);
    if !(far > 0.0) {
        return Err(Error::NoValidSector("tabulated law has no positive lower ratio".into()));
    }
    let mut by_abs: Vec<f64> = samples.iter().map(|x| x.abs()).filter(|&a| a > 0.0).collect();
    by_abs.sort_by(f64::total_cmp);
    by_abs.dedup();
    // smallest S with the lower ratio within a factor two of the asymptote
    let mut s_threshold = by_abs[by_abs.len() - 1];
    for &cand in &by_abs {
        let low = samples
            .iter()
            .filter(|x| x.abs() >= cand)
            .map(|&x| ratio(x))
            .fold(f64::INFINITY, f64::min);
        if low >= 0.5 * far {
            s_threshold = cand;
            break;
        }
    }
    let outside: Vec<f64> = samples
        .iter()
        .filter(|x| x.abs() >= s_threshold)
        .map(|&x| ratio(x))
        .collect();
    let alpha1 = outside.iter().copied().fold(f64::INFINITY, f64::min);
    let alpha2 = outside
        .iter()
        .copied()
        .fold(0.0, f64::max)
        .max(table.slope(first))
        .max(table.slope(last));
    let sup = sampled_sup_sq(|x| table.eval(x), s_threshold);
    let mut data = SectorData::new(alpha1, alpha2, s_threshold, sup)?;
    data.estimated = true;
    Ok(data)
}

fn symmetric_samples(range: f64) -> Vec<f64> {
    let n = SAMPLE_COUNT;
    (0..=n)
        .map(|i| -range + 2.0 * range * i as f64 / n as f64)
        .collect()
}

/// `sup_{|s| ≤ radius} |f(s)|²` on a dense grid plus the endpoints.
pub fn sampled_sup_sq(f: impl Fn(f64) -> f64, radius: f64) -> f64 {
    if radius == 0.0 {
        let y = f(0.0);
        return y * y;
    }
    symmetric_samples(radius)
        .into_iter()
        .map(|s| f(s) * f(s))
        .fold(0.0, f64::max)
}

/// Analytic Lipschitz constants of the built-in forcing laws.
pub fn lipschitz_constant(law: &ForcingLaw) -> Result<LipschitzData> {
    law.validate()?;
    let global = |q: f64| LipschitzData {
        q_global: Some(q),
        q_local: q,
        neighborhood_radius: f64::INFINITY,
    };
    Ok(match *law {
        ForcingLaw::Zero => global(0.0),
        ForcingLaw::Linear { slope } => global(slope.abs()),
        // |d/ds q·tanh s| = |q|·sech² s ≤ |q|
        ForcingLaw::TanhAntidamping { q } => global(q.abs()),
        ForcingLaw::MonotoneDamping { k } => global(k),
        ForcingLaw::PiecewiseLinear { inner, outer, knee } => LipschitzData {
            q_global: Some(inner.abs().max(outer.abs())),
            q_local: inner.abs(),
            neighborhood_radius: knee,
        },
    })
}

/// Sampled check that `g` is nondecreasing with `g(0) = 0`.
pub fn verify_feedback_samples(law: &FeedbackLaw) -> Result<()> {
    if law.eval(0.0) != 0.0 {
        return Err(Error::HypothesisViolated(format!("{}: g(0) != 0", law.name())));
    }
    let xs = symmetric_samples(SAMPLE_RANGE);
    for w in xs.windows(2) {
        if law.eval(w[1]) - law.eval(w[0]) < -1e-12 {
            return Err(Error::HypothesisViolated(format!(
                "{}: g decreases on [{}, {}]",
                law.name(),
                w[0],
                w[1]
            )));
        }
    }
    Ok(())
}

/// Sampled check that the difference quotients of `F` stay below the declared
/// global constant.
pub fn verify_forcing_samples(law: &ForcingLaw) -> Result<()> {
    if law.eval(0.0) != 0.0 {
        return Err(Error::HypothesisViolated("F(0) != 0".into()));
    }
    let q = lipschitz_constant(law)?.q_global.unwrap_or(f64::INFINITY);
    let xs = symmetric_samples(SAMPLE_RANGE);
    for w in xs.windows(2) {
        let quotient = (law.eval(w[1]) - law.eval(w[0])).abs() / (w[1] - w[0]);
        if quotient > q * (1.0 + 1e-9) + 1e-12 {
            return Err(Error::HypothesisViolated(format!(
                "F difference quotient {quotient} exceeds declared Lipschitz constant {q}"
            )));
        }
    }
    Ok(())
}
