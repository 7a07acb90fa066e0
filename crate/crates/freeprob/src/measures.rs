//! Probability laws and their closed-form pushforwards.
//!
//! A `DistributionSpec` is a base family plus an ordered transform list
//! (power, symmetrization, discrete scale mixture). Transform lists are
//! normalized on construction: consecutive powers collapse, a power of a
//! centered semicircle with an even integer exponent is rewritten through
//! the square law, and nothing may follow a symmetrization.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gamma::{beta_fn, ln_gamma};
use crate::quad::{self, ABS_TOL};

/// Base distribution family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum Kind {
    Semicircle { mean: f64, variance: f64 },
    FreePoisson { p: f64, theta: f64 },
    Beta { p: f64, q: f64 },
    BooleanStable { alpha: f64 },
    SubHcm {
        p: f64,
        /// (t_k, gamma_k) pairs of the finite site measure.
        sites: Vec<(f64, f64)>,
        /// Normalizing constant; 0 or omitted means "compute".
        #[serde(default)]
        norm: f64,
    },
}

/// Transform applied to a law, in application order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum Transform {
    Power { r: f64 },
    Symmetrize,
    ScaleMixture { weights: Vec<f64>, scales: Vec<f64> },
}

/// A base law with its transform chain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionSpec {
    pub kind: Kind,
    #[serde(default)]
    pub transforms: Vec<Transform>,
}

/// Continuous support intervals plus the atom at zero.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SupportInfo {
    /// Disjoint, ordered open intervals; `hi` may be infinite.
    pub intervals: Vec<(f64, f64)>,
    pub atom_at_zero: f64,
}

impl SupportInfo {
    /// Smallest finite endpoint.
    pub fn lo(&self) -> f64 {
        self.intervals.first().map(|&(a, _)| a).unwrap_or(0.0)
    }

    /// Largest endpoint (possibly infinite).
    pub fn hi(&self) -> f64 {
        self.intervals.last().map(|&(_, b)| b).unwrap_or(0.0)
    }

    pub fn is_bounded(&self) -> bool {
        self.hi().is_finite() && self.lo().is_finite()
    }

    /// Distance from a real point to the closed continuous support.
    pub fn distance(&self, x: f64) -> f64 {
        self.intervals
            .iter()
            .map(|&(a, b)| {
                if x < a {
                    a - x
                } else if b.is_finite() && x > b {
                    x - b
                } else {
                    0.0
                }
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// Leading behavior of the density at 0+ and at infinity.
///
/// `zero`: f(x) ~ c0 x^{e0} as x→0 (present when the support touches 0);
/// `tail`: f(x) ~ c x^{-1-beta} as x→∞ (present when the support is unbounded).
#[derive(Clone, Copy, Debug, Default)]
pub struct Asymptotics {
    pub zero: Option<(f64, f64)>,
    pub tail: Option<(f64, f64)>,
}

/// Normalizing constant C with ∫ C x^{p-1} Π (t_k + x)^{-γ_k} dx = 1.
pub fn subhcm_normalize(p: f64, sites: &[(f64, f64)]) -> Result<f64> {
    let gamma_total: f64 = sites.iter().map(|&(_, g)| g).sum();
    if sites.is_empty() || sites.iter().any(|&(t, g)| t <= 0.0 || g <= 0.0) {
        return Err(Error::InvalidParam("sub-HCM sites must be positive".into()));
    }
    if !(p > 0.0 && p < gamma_total) {
        return Err(Error::InvalidParam(format!(
            "sub-HCM integrability needs 0 < p < sum(gamma) = {gamma_total}, got p = {p}"
        )));
    }
    let raw = quad::exp_sinh(
        |x: f64| {
            let mut v = x.powf(p - 1.0);
            for &(t, g) in sites {
                v *= (t + x).powf(-g);
            }
            v
        },
        0.0,
        ABS_TOL,
    )?;
    Ok(1.0 / raw)
}

impl Kind {
    /// Sub-HCM law with the normalizing constant computed by quadrature.
    pub fn sub_hcm(p: f64, sites: Vec<(f64, f64)>) -> Result<Kind> {
        let norm = subhcm_normalize(p, &sites)?;
        Ok(Kind::SubHcm { p, sites, norm })
    }

    fn validate(&mut self) -> Result<()> {
        match self {
            Kind::Semicircle { variance, .. } => {
                if *variance <= 0.0 {
                    return Err(Error::InvalidParam("semicircle variance must be > 0".into()));
                }
            }
            Kind::FreePoisson { p, theta } => {
                if *p <= 0.0 || *theta <= 0.0 {
                    return Err(Error::InvalidParam("free Poisson needs p, theta > 0".into()));
                }
            }
            Kind::Beta { p, q } => {
                if *p <= 0.0 || *q <= 0.0 {
                    return Err(Error::InvalidParam("beta needs p, q > 0".into()));
                }
            }
            Kind::BooleanStable { alpha } => {
                if !(*alpha > 0.0 && *alpha < 1.0) {
                    return Err(Error::InvalidParam("boolean stable needs alpha in (0,1)".into()));
                }
            }
            Kind::SubHcm { p, sites, norm } => {
                let computed = subhcm_normalize(*p, sites)?;
                if *norm == 0.0 {
                    *norm = computed;
                } else if (*norm - computed).abs() > 1e-6 * computed.abs() {
                    return Err(Error::InvalidParam(format!(
                        "sub-HCM norm {norm} disagrees with computed {computed}"
                    )));
                }
            }
        }
        Ok(())
    }

    fn base_intervals(&self) -> Vec<(f64, f64)> {
        match *self {
            Kind::Semicircle { mean, variance } => {
                let s = variance.sqrt();
                vec![(mean - 2.0 * s, mean + 2.0 * s)]
            }
            Kind::FreePoisson { p, theta } => {
                let rp = p.sqrt();
                vec![(theta * (1.0 - rp) * (1.0 - rp), theta * (1.0 + rp) * (1.0 + rp))]
            }
            Kind::Beta { .. } => vec![(0.0, 1.0)],
            Kind::BooleanStable { .. } | Kind::SubHcm { .. } => vec![(0.0, f64::INFINITY)],
        }
    }

    fn base_atom(&self) -> f64 {
        match *self {
            Kind::FreePoisson { p, .. } => (1.0 - p).max(0.0),
            _ => 0.0,
        }
    }

    fn base_density(&self, x: f64) -> f64 {
        match *self {
            Kind::Semicircle { mean, variance } => {
                let rad = 4.0 * variance - (x - mean) * (x - mean);
                if rad <= 0.0 {
                    0.0
                } else {
                    rad.sqrt() / (2.0 * std::f64::consts::PI * variance)
                }
            }
            Kind::FreePoisson { p, theta } => {
                let rp = p.sqrt();
                let a = theta * (1.0 - rp) * (1.0 - rp);
                let b = theta * (1.0 + rp) * (1.0 + rp);
                if x <= a || x >= b {
                    0.0
                } else {
                    ((b - x) * (x - a)).sqrt() / (2.0 * std::f64::consts::PI * theta * x)
                }
            }
            Kind::Beta { p, q } => {
                if x <= 0.0 || x >= 1.0 {
                    0.0
                } else {
                    x.powf(p - 1.0) * (1.0 - x).powf(q - 1.0) / beta_fn(p, q)
                }
            }
            Kind::BooleanStable { alpha } => {
                if x <= 0.0 {
                    0.0
                } else {
                    let c = (std::f64::consts::PI * alpha).cos();
                    let denom = x.powf(2.0 * alpha) + 2.0 * c * x.powf(alpha) + 1.0;
                    (std::f64::consts::PI * alpha).sin() / std::f64::consts::PI
                        * x.powf(alpha - 1.0)
                        / denom
                }
            }
            Kind::SubHcm { p, ref sites, norm } => {
                if x <= 0.0 {
                    0.0
                } else {
                    let mut v = norm * x.powf(p - 1.0);
                    for &(t, g) in sites {
                        v *= (t + x).powf(-g);
                    }
                    v
                }
            }
        }
    }

    fn base_asymptotics(&self) -> Asymptotics {
        match *self {
            Kind::Semicircle { mean, variance } => {
                let s = variance.sqrt();
                let lo = mean - 2.0 * s;
                let zero = if lo == 0.0 {
                    Some((0.5, (4.0 * s).sqrt() / (2.0 * std::f64::consts::PI * variance)))
                } else {
                    None
                };
                Asymptotics { zero, tail: None }
            }
            Kind::FreePoisson { p, theta } => {
                let zero = if p == 1.0 {
                    Some((-0.5, 1.0 / (std::f64::consts::PI * theta.sqrt())))
                } else {
                    None
                };
                Asymptotics { zero, tail: None }
            }
            Kind::Beta { p, q } => Asymptotics {
                zero: Some((p - 1.0, 1.0 / beta_fn(p, q))),
                tail: None,
            },
            Kind::BooleanStable { alpha } => {
                let c = (std::f64::consts::PI * alpha).sin() / std::f64::consts::PI;
                Asymptotics {
                    zero: Some((alpha - 1.0, c)),
                    tail: Some((alpha, c)),
                }
            }
            Kind::SubHcm { p, ref sites, norm } => {
                let gamma_total: f64 = sites.iter().map(|&(_, g)| g).sum();
                let c0 = norm * sites.iter().map(|&(t, g)| t.powf(-g)).product::<f64>();
                Asymptotics {
                    zero: Some((p - 1.0, c0)),
                    tail: Some((gamma_total - p, norm)),
                }
            }
        }
    }
}

fn merge_intervals(mut iv: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    iv.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (a, b) in iv {
        if let Some(last) = out.last_mut() {
            if a < last.1 {
                last.1 = last.1.max(b);
                continue;
            }
        }
        out.push((a, b));
    }
    out
}

impl DistributionSpec {
    /// Wrap a base law with no transforms.
    pub fn new(mut kind: Kind) -> Result<Self> {
        kind.validate()?;
        Ok(DistributionSpec { kind, transforms: Vec::new() })
    }

    /// Re-validate a deserialized spec (computes missing sub-HCM norms,
    /// checks transform-order invariants).
    pub fn validate(&mut self) -> Result<()> {
        self.kind.validate()?;
        let rebuilt = self.transforms.clone();
        let mut spec = DistributionSpec::new(self.kind.clone())?;
        for t in rebuilt {
            spec = match t {
                Transform::Power { r } => spec.with_power(r)?,
                Transform::Symmetrize => spec.symmetrized()?,
                Transform::ScaleMixture { weights, scales } => {
                    spec.with_scale_mixture(&weights, &scales)?
                }
            };
        }
        *self = spec;
        Ok(())
    }

    pub fn is_symmetrized(&self) -> bool {
        matches!(self.transforms.last(), Some(Transform::Symmetrize))
    }

    fn has_negative_support(&self) -> bool {
        self.support().lo() < 0.0
    }

    /// Append a power transform (collapsing consecutive powers).
    pub fn with_power(self, r: f64) -> Result<Self> {
        if r == 0.0 || !r.is_finite() {
            return Err(Error::InvalidParam("power exponent must be nonzero".into()));
        }
        if self.is_symmetrized() {
            return Err(Error::InvalidParam(
                "symmetrize is terminal; apply the power first".into(),
            ));
        }
        let support = self.support();
        if r < 0.0 && support.atom_at_zero > 0.0 {
            return Err(Error::InvalidParam(
                "negative power requires zero atom at 0".into(),
            ));
        }
        if r == 1.0 {
            return Ok(self);
        }
        let mut spec = self;
        if spec.has_negative_support() {
            // Only the centered semicircle square law is available on signed
            // supports: WS(0, v)^2 = MP(1, v), extended to even integers and
            // through scale mixtures (scales square).
            let even = r.fract() == 0.0 && (r as i64) % 2 == 0;
            let centered = matches!(spec.kind, Kind::Semicircle { mean, .. } if mean == 0.0);
            let only_mixtures = spec
                .transforms
                .iter()
                .all(|t| matches!(t, Transform::ScaleMixture { .. }));
            if !(even && centered && only_mixtures) {
                return Err(Error::InvalidParam(
                    "powers of signed laws are supported only for the centered \
                     semicircle with an even integer exponent"
                        .into(),
                ));
            }
            let variance = match spec.kind {
                Kind::Semicircle { variance, .. } => variance,
                _ => unreachable!(),
            };
            spec.kind = Kind::FreePoisson { p: 1.0, theta: variance };
            for t in &mut spec.transforms {
                if let Transform::ScaleMixture { scales, .. } = t {
                    for s in scales {
                        *s = *s * *s;
                    }
                }
            }
            return spec.with_power(r / 2.0);
        }
        if let Some(&Transform::Power { r: r0 }) = spec.transforms.last() {
            spec.transforms.pop();
            let combined = r0 * r;
            if combined == 1.0 {
                return Ok(spec);
            }
            spec.transforms.push(Transform::Power { r: combined });
        } else {
            spec.transforms.push(Transform::Power { r });
        }
        Ok(spec)
    }

    /// Symmetrize: the law of B·X with B uniform on {-1, +1}.
    pub fn symmetrized(self) -> Result<Self> {
        if self.is_symmetrized() {
            return Err(Error::InvalidParam("already symmetrized".into()));
        }
        if self.support().lo() < 0.0 {
            return Err(Error::InvalidParam(
                "symmetrize requires support in [0, inf)".into(),
            ));
        }
        let mut spec = self;
        spec.transforms.push(Transform::Symmetrize);
        Ok(spec)
    }

    /// Discrete scale mixture sum_k w_k law(x / t_k).
    pub fn with_scale_mixture(self, weights: &[f64], scales: &[f64]) -> Result<Self> {
        if weights.len() != scales.len() || weights.is_empty() {
            return Err(Error::InvalidParam("weights/scales length mismatch".into()));
        }
        if scales.iter().any(|&t| !(t > 0.0)) {
            return Err(Error::InvalidParam("scales must be strictly positive".into()));
        }
        if weights.iter().any(|&w| !(w > 0.0)) {
            return Err(Error::InvalidParam("weights must be strictly positive".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParam(format!(
                "weights must sum to 1 (got {total})"
            )));
        }
        if self.is_symmetrized() {
            return Err(Error::InvalidParam(
                "symmetrize is terminal; apply the mixture first".into(),
            ));
        }
        let mut spec = self;
        spec.transforms.push(Transform::ScaleMixture {
            weights: weights.to_vec(),
            scales: scales.to_vec(),
        });
        Ok(spec)
    }

    fn intervals_after(&self, k: usize) -> Vec<(f64, f64)> {
        if k == 0 {
            return self.kind.base_intervals();
        }
        let prev = self.intervals_after(k - 1);
        match &self.transforms[k - 1] {
            Transform::Power { r } => prev
                .into_iter()
                .map(|(a, b)| {
                    if *r > 0.0 {
                        (a.powf(*r), b.powf(*r))
                    } else {
                        let lo = if b.is_finite() { b.powf(*r) } else { 0.0 };
                        let hi = if a > 0.0 { a.powf(*r) } else { f64::INFINITY };
                        (lo, hi)
                    }
                })
                .collect(),
            Transform::Symmetrize => {
                let mut iv: Vec<(f64, f64)> = prev.iter().map(|&(a, b)| (-b, -a)).collect();
                iv.extend(prev);
                merge_intervals(iv)
            }
            Transform::ScaleMixture { scales, .. } => {
                let mut iv = Vec::new();
                for &t in scales {
                    iv.extend(prev.iter().map(|&(a, b)| (t * a, t * b)));
                }
                merge_intervals(iv)
            }
        }
    }

    /// Exact transformed support endpoints and atom mass.
    pub fn support(&self) -> SupportInfo {
        SupportInfo {
            intervals: self.intervals_after(self.transforms.len()),
            atom_at_zero: self.kind.base_atom(),
        }
    }

    fn density_after(&self, k: usize, x: f64) -> f64 {
        if k == 0 {
            return self.kind.base_density(x);
        }
        match &self.transforms[k - 1] {
            Transform::Power { r } => {
                if x <= 0.0 {
                    return 0.0;
                }
                let s = 1.0 / r;
                s.abs() * x.powf(s - 1.0) * self.density_after(k - 1, x.powf(s))
            }
            Transform::Symmetrize => {
                if x == 0.0 {
                    0.0
                } else {
                    0.5 * self.density_after(k - 1, x.abs())
                }
            }
            Transform::ScaleMixture { weights, scales } => weights
                .iter()
                .zip(scales)
                .map(|(&w, &t)| w / t * self.density_after(k - 1, x / t))
                .sum(),
        }
    }

    /// Density of the fully transformed law at x.
    ///
    /// Returns 0 outside the continuous support. Evaluation exactly at 0 is
    /// rejected when an atom sits there or the closed form diverges in the
    /// limit.
    pub fn density(&self, x: f64) -> Result<f64> {
        let support = self.support();
        if x == 0.0 {
            if support.atom_at_zero > 0.0 {
                return Err(Error::Domain(
                    "x = 0 carries an atom; density evaluation rejected".into(),
                ));
            }
            if support.intervals.iter().any(|&(a, b)| a < 0.0 && b > 0.0) {
                return Ok(self.density_after(self.transforms.len(), 0.0));
            }
            if support.distance(0.0) == 0.0 {
                // 0 is a support endpoint: return the one-sided limit when it
                // exists, reject the divergent closed form
                if let Some((e0, c0)) = self.asymptotics().zero {
                    if e0 < 0.0 {
                        return Err(Error::Domain(
                            "density diverges at x = 0; only the limit exists".into(),
                        ));
                    }
                    return Ok(if e0 == 0.0 { c0 } else { 0.0 });
                }
            }
            return Ok(0.0);
        }
        if !support.intervals.iter().any(|&(a, b)| x > a && x < b) {
            return Ok(0.0);
        }
        Ok(self.density_after(self.transforms.len(), x))
    }

    fn asymptotics_after(&self, k: usize) -> Asymptotics {
        if k == 0 {
            return self.kind.base_asymptotics();
        }
        let prev = self.asymptotics_after(k - 1);
        let prev_iv = self.intervals_after(k - 1);
        let touches_zero = prev_iv.first().map(|&(a, _)| a == 0.0).unwrap_or(false);
        let unbounded = prev_iv.last().map(|&(_, b)| !b.is_finite()).unwrap_or(false);
        match &self.transforms[k - 1] {
            Transform::Power { r } => {
                if *r > 0.0 {
                    let s = 1.0 / r;
                    Asymptotics {
                        zero: prev.zero.filter(|_| touches_zero).map(|(e0, c0)| {
                            (s * (e0 + 1.0) - 1.0, s * c0)
                        }),
                        tail: prev.tail.filter(|_| unbounded).map(|(b, c)| (s * b, s * c)),
                    }
                } else {
                    let t = -1.0 / r;
                    Asymptotics {
                        zero: prev.tail.filter(|_| unbounded).map(|(b, c)| (t * b - 1.0, t * c)),
                        tail: prev
                            .zero
                            .filter(|_| touches_zero)
                            .map(|(e0, c0)| (t * (e0 + 1.0), t * c0)),
                    }
                }
            }
            Transform::Symmetrize => Asymptotics {
                zero: prev.zero.map(|(e, c)| (e, 0.5 * c)),
                tail: prev.tail.map(|(b, c)| (b, 0.5 * c)),
            },
            Transform::ScaleMixture { weights, scales } => Asymptotics {
                zero: prev.zero.map(|(e, c)| {
                    let fac: f64 = weights
                        .iter()
                        .zip(scales)
                        .map(|(&w, &t)| w * t.powf(-(1.0 + e)))
                        .sum();
                    (e, c * fac)
                }),
                tail: prev.tail.map(|(b, c)| {
                    let fac: f64 = weights
                        .iter()
                        .zip(scales)
                        .map(|(&w, &t)| w * t.powf(b))
                        .sum();
                    (b, c * fac)
                }),
            },
        }
    }

    /// Leading density behavior at 0+ and at infinity.
    pub fn asymptotics(&self) -> Asymptotics {
        self.asymptotics_after(self.transforms.len())
    }

    fn closed_form_moment(&self, n: u32) -> Option<Result<f64>> {
        let Kind::FreePoisson { p, theta } = self.kind else {
            return None;
        };
        if p != 1.0 || theta != 1.0 {
            return None;
        }
        let (r, sym) = match self.transforms.as_slice() {
            [] => (1.0, false),
            [Transform::Power { r }] => (*r, false),
            [Transform::Symmetrize] => (1.0, true),
            [Transform::Power { r }, Transform::Symmetrize] => (*r, true),
            _ => return None,
        };
        if sym && n % 2 == 1 {
            return Some(Ok(0.0));
        }
        let q = r * n as f64;
        if q <= -0.5 {
            return Some(Err(Error::DivergentMoment(format!(
                "MP(1,1)^r moment of order {n} diverges for r = {r}"
            ))));
        }
        Some(Ok(mp11_moment(q)))
    }

    /// n-th moment: closed form for MP(1,1) powers, quadrature otherwise.
    pub fn moment(&self, n: u32) -> Result<f64> {
        if n == 0 {
            return Ok(1.0);
        }
        if let Some(v) = self.closed_form_moment(n) {
            return v;
        }
        let support = self.support();
        if let Some((beta, _)) = self.asymptotics().tail {
            if !support.is_bounded() && n as f64 >= beta {
                return Err(Error::DivergentMoment(format!(
                    "tail exponent beta = {beta} does not dominate order {n}"
                )));
            }
        }
        let mut total = 0.0;
        for &(a, b) in &support.intervals {
            let part: f64 = if b.is_finite() {
                quad::tanh_sinh(|x| x.powi(n as i32) * self.density_after(self.transforms.len(), x), a, b, ABS_TOL)?
            } else {
                quad::exp_sinh(|x| x.powi(n as i32) * self.density_after(self.transforms.len(), x), a, ABS_TOL)?
            };
            total += part;
        }
        // the atom contributes 0^n = 0 for n >= 1
        Ok(total)
    }

    /// Total mass of atom plus density (normalization check).
    pub fn total_mass(&self) -> Result<f64> {
        let support = self.support();
        let mut total = support.atom_at_zero;
        for &(a, b) in &support.intervals {
            let part: f64 = if b.is_finite() {
                quad::tanh_sinh(|x| self.density_after(self.transforms.len(), x), a, b, ABS_TOL)?
            } else {
                quad::exp_sinh(|x| self.density_after(self.transforms.len(), x), a, ABS_TOL)?
            };
            total += part;
        }
        Ok(total)
    }
}

/// Γ(1+2q) / (Γ(1+q)Γ(2+q)) — the q-th moment of MP(1,1), q > -1/2.
pub fn mp11_moment(q: f64) -> f64 {
    if q == 0.0 {
        return 1.0;
    }
    (ln_gamma(1.0 + 2.0 * q) - ln_gamma(1.0 + q) - ln_gamma(2.0 + q)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn semicircle() -> DistributionSpec {
        DistributionSpec::new(Kind::Semicircle { mean: 0.0, variance: 1.0 }).unwrap()
    }

    fn mp(p: f64, theta: f64) -> DistributionSpec {
        DistributionSpec::new(Kind::FreePoisson { p, theta }).unwrap()
    }

    fn beta(p: f64, q: f64) -> DistributionSpec {
        DistributionSpec::new(Kind::Beta { p, q }).unwrap()
    }

    #[test]
    fn semicircle_density_at_zero() {
        assert!((semicircle().density(0.0).unwrap() - 1.0 / PI).abs() < 1e-15);
    }

    #[test]
    fn boolean_stable_half_at_one() {
        let b = DistributionSpec::new(Kind::BooleanStable { alpha: 0.5 }).unwrap();
        assert!((b.density(1.0).unwrap() - 1.0 / (2.0 * PI)).abs() < 1e-15);
    }

    #[test]
    fn beta_equals_mp_quarter() {
        // Β(1/2, 3/2) = MP(1, 1/4)
        let b = beta(0.5, 1.5);
        let m = mp(1.0, 0.25);
        let x = 0.25;
        let expect = 2.0 * 3.0f64.sqrt() / PI;
        assert!((b.density(x).unwrap() - expect).abs() < 1e-14);
        for i in 1..50 {
            let x = i as f64 / 50.0;
            assert!(
                (b.density(x).unwrap() - m.density(x).unwrap()).abs() < 1e-10,
                "x = {x}"
            );
        }
    }

    #[test]
    fn support_free_poisson() {
        let s = mp(4.0, 1.0).support();
        assert_eq!(s.intervals, vec![(1.0, 9.0)]);
        assert_eq!(s.atom_at_zero, 0.0);

        let s = mp(0.25, 1.0).with_power(2.0).unwrap().support();
        assert!((s.intervals[0].0 - 0.0625).abs() < 1e-12);
        assert!((s.intervals[0].1 - 5.0625).abs() < 1e-12);
        assert_eq!(s.atom_at_zero, 0.75);
    }

    #[test]
    fn semicircle_square_is_free_poisson() {
        let sq = semicircle().with_power(2.0).unwrap();
        assert_eq!(sq.kind, Kind::FreePoisson { p: 1.0, theta: 1.0 });
        assert!(sq.transforms.is_empty());
        let s = sq.support();
        assert_eq!(s.intervals, vec![(0.0, 4.0)]);
        let m = mp(1.0, 1.0);
        for i in 1..40 {
            let x = 4.0 * i as f64 / 40.0;
            assert!((sq.density(x).unwrap() - m.density(x).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn power_identity_and_collapse() {
        let b = beta(0.5, 1.5).with_power(1.0).unwrap();
        assert!(b.transforms.is_empty());
        let b = beta(0.5, 1.5).with_power(2.0).unwrap().with_power(3.0).unwrap();
        assert_eq!(b.transforms, vec![Transform::Power { r: 6.0 }]);
        let b = beta(0.5, 1.5).with_power(2.0).unwrap().with_power(0.5).unwrap();
        assert!(b.transforms.is_empty());
    }

    #[test]
    fn negative_power_matches_inverse_closed_form() {
        // MP(2,1) with r = -2 against the explicit transformed pdf with
        // t = 1/2: t(p-1)/(2π) √((B^t-x^t)(x^t-A^t)) / x^{t+1}
        let spec = mp(2.0, 1.0).with_power(-2.0).unwrap();
        let s = spec.support();
        let (lo, hi) = s.intervals[0];
        let t = 0.5;
        let cap_a = (2.0f64.sqrt() + 1.0).powf(-2.0 / t);
        let cap_b = (2.0f64.sqrt() - 1.0).powf(-2.0 / t);
        assert!((lo - cap_a).abs() < 1e-12);
        assert!((hi - cap_b).abs() < 1e-12);
        let x = 0.5 * (lo + hi);
        let expect = t * (2.0 - 1.0) / (2.0 * PI)
            * ((cap_b.powf(t) - x.powf(t)) * (x.powf(t) - cap_a.powf(t))).sqrt()
            / x.powf(t + 1.0);
        assert!((spec.density(x).unwrap() - expect).abs() < 1e-14);
    }

    #[test]
    fn negative_power_rejects_atom() {
        assert!(mp(0.25, 1.0).with_power(-1.0).is_err());
    }

    #[test]
    fn beta_power_normalizes() {
        let spec = beta(0.5, 1.5).with_power(2.0).unwrap();
        assert!((spec.total_mass().unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn symmetrized_density_and_moments() {
        let sym = beta(0.5, 1.5).symmetrized().unwrap();
        let expect = 3.0f64.sqrt() / PI;
        assert!((sym.density(0.25).unwrap() - expect).abs() < 1e-14);
        assert!((sym.density(-0.25).unwrap() - expect).abs() < 1e-14);
        assert!((sym.total_mass().unwrap() - 1.0).abs() < 1e-10);
        assert!(sym.moment(1).unwrap().abs() < 1e-10);
        assert!(sym.moment(3).unwrap().abs() < 1e-10);
    }

    #[test]
    fn symmetrize_is_terminal() {
        let sym = beta(0.5, 1.5).symmetrized().unwrap();
        assert!(sym.clone().with_power(2.0).is_err());
        assert!(sym.clone().symmetrized().is_err());
        assert!(sym.with_scale_mixture(&[1.0], &[1.0]).is_err());
        assert!(semicircle().symmetrized().is_err());
    }

    #[test]
    fn scale_mixture_density() {
        let b = DistributionSpec::new(Kind::BooleanStable { alpha: 0.5 }).unwrap();
        let single = b.clone().with_scale_mixture(&[1.0], &[1.0]).unwrap();
        for x in [0.3, 0.7, 1.0, 2.5, 9.0] {
            assert!((single.density(x).unwrap() - b.density(x).unwrap()).abs() < 1e-15);
        }
        let mix = b.clone().with_scale_mixture(&[0.5, 0.5], &[1.0, 2.0]).unwrap();
        let expect = 0.5 * (1.0 / (2.0 * PI))
            + 0.5 * 0.5 * (1.0 / PI) * 0.5f64.powf(-0.5) / (1.5 * 1.0);
        // second term: (1/2)·(1/2)·f_b(1/2) with f_b(x) = x^{-1/2}/(π(x+1))
        assert!((mix.density(1.0).unwrap() - expect).abs() < 1e-14, "{}", mix.density(1.0).unwrap());
        assert!((mix.total_mass().unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn scale_mixture_validation() {
        let b = DistributionSpec::new(Kind::BooleanStable { alpha: 0.5 }).unwrap();
        assert!(b.clone().with_scale_mixture(&[0.5, 0.5], &[1.0]).is_err());
        assert!(b.clone().with_scale_mixture(&[0.5, 0.6], &[1.0, 2.0]).is_err());
        assert!(b.with_scale_mixture(&[0.5, 0.5], &[1.0, -2.0]).is_err());
    }

    #[test]
    fn subhcm_norms() {
        assert!((subhcm_normalize(0.5, &[(1.0, 1.0)]).unwrap() - 1.0 / PI).abs() < 1e-12);
        assert!(
            (subhcm_normalize(0.5, &[(2.0, 1.0)]).unwrap() - 2.0f64.sqrt() / PI).abs() < 1e-12
        );
        assert!(subhcm_normalize(1.5, &[(1.0, 1.0)]).is_err());
        let k = Kind::sub_hcm(0.5, vec![(1.0, 1.0)]).unwrap();
        let spec = DistributionSpec::new(k).unwrap();
        assert!((spec.total_mass().unwrap() - 1.0).abs() < 1e-9);
        // b_{1/2} equals SubHcm(1/2, (1,1), 1/π)
        let b = DistributionSpec::new(Kind::BooleanStable { alpha: 0.5 }).unwrap();
        for x in [0.1, 0.5, 1.0, 3.0, 10.0] {
            assert!((spec.density(x).unwrap() - b.density(x).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn moments_mp_catalan() {
        let m = mp(1.0, 1.0);
        for (n, c) in [(1u32, 1.0), (2, 2.0), (3, 5.0), (4, 14.0)] {
            assert!((m.moment(n).unwrap() - c).abs() < 1e-12, "n = {n}");
        }
    }

    #[test]
    fn moments_semicircle() {
        let s = semicircle();
        assert!((s.moment(2).unwrap() - 1.0).abs() < 1e-10);
        assert!((s.moment(4).unwrap() - 2.0).abs() < 1e-10);
        assert!(s.moment(1).unwrap().abs() < 1e-10);
        assert!(s.moment(3).unwrap().abs() < 1e-10);
    }

    #[test]
    fn moments_closed_vs_quadrature() {
        for r in [0.5, 1.0, 2.0] {
            let spec = mp(1.0, 1.0).with_power(r).unwrap();
            for n in 1..=6u32 {
                let closed = mp11_moment(r * n as f64);
                // bypass the closed-form path by integrating directly
                let quadr: f64 = quad::tanh_sinh(
                    |x| x.powi(n as i32) * spec.density(x).unwrap_or(0.0),
                    0.0,
                    4.0f64.powf(r),
                    ABS_TOL,
                )
                .unwrap();
                let tol = 1e-8 * closed.abs().max(1.0);
                assert!((closed - quadr).abs() < tol, "r={r} n={n}: {closed} vs {quadr}");
            }
        }
    }

    #[test]
    fn divergent_moments_rejected() {
        let b = DistributionSpec::new(Kind::BooleanStable { alpha: 0.5 }).unwrap();
        assert!(matches!(b.moment(1), Err(Error::DivergentMoment(_))));
        assert!(b.moment(0).is_ok());
    }

    #[test]
    fn pushforward_consistency() {
        let base = beta(0.5, 1.5);
        let r = 2.0;
        let powered = base.clone().with_power(r).unwrap();
        for i in 1..20 {
            let x = i as f64 / 20.0;
            let lhs = powered.density(x.powf(r)).unwrap() * r * x.powf(r - 1.0);
            let rhs = base.density(x).unwrap();
            assert!((lhs - rhs).abs() < 1e-10, "x = {x}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn asymptotics_track_transforms() {
        // Beta(1/2,3/2)^2: f ~ c0 x^{ps-1} with ps = 1/4
        let spec = beta(0.5, 1.5).with_power(2.0).unwrap();
        let (e0, c0) = spec.asymptotics().zero.unwrap();
        assert!((e0 + 0.75).abs() < 1e-12);
        let x = 1e-9;
        let d = spec.density(x).unwrap();
        assert!((d / (c0 * x.powf(e0)) - 1.0).abs() < 1e-3);
        // boolean stable tail through an inverse square
        let b = DistributionSpec::new(Kind::BooleanStable { alpha: 0.5 }).unwrap();
        let inv = b.with_power(-2.0).unwrap();
        let (beta_t, cinf) = inv.asymptotics().tail.unwrap();
        let x = 1e7;
        let d = inv.density(x).unwrap();
        assert!((d / (cinf * x.powf(-1.0 - beta_t)) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn density_at_zero_edge_cases() {
        // divergent limit rejected
        assert!(beta(0.5, 1.5).density(0.0).is_err());
        // atom rejected
        assert!(mp(0.25, 1.0).density(0.0).is_err());
        // vanishing limit returns 0
        assert!(beta(3.0, 2.0).symmetrized().unwrap().density(0.0).unwrap() == 0.0);
        // finite limit returns the limit: sym Β(1/2,3/2)^{1/2} is WS(0, 1/4)
        let s = beta(0.5, 1.5).with_power(0.5).unwrap().symmetrized().unwrap();
        let expect = 2.0 / PI; // semicircle radius-1 density at 0
        assert!((s.density(0.0).unwrap() - expect).abs() < 1e-13);
    }

    #[test]
    fn spec_json_roundtrip() {
        let spec = beta(0.5, 1.5).with_power(2.0).unwrap().symmetrized().unwrap();
        let s = serde_json::to_string(&spec).unwrap();
        let back: DistributionSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(spec, back);
        // unknown fields rejected
        let bad = r#"{"kind":{"family":"beta","p":0.5,"q":1.5,"zz":1},"transforms":[]}"#;
        assert!(serde_json::from_str::<DistributionSpec>(bad).is_err());
    }
}
