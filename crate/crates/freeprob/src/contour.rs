//! Verification contours, image tracing, winding counts and domain scans.
//!
//! A contour walks the boundary of the region where the continued Cauchy
//! transform is analytic, on the Riemann-surface convention: line segments
//! along the real axis carry a side tag distinguishing x+i0 from x-i0.
//! The winding number of the image curve about probe points in the lower
//! half-plane annulus D_eps is the numerical certificate that every such
//! value is attained exactly once, i.e. that a univalent inverse extends
//! to the lower half-plane.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::cauchy::{CauchyEvaluator, Side};
use crate::error::{Error, Result};
use crate::measures::{DistributionSpec, Kind, Transform};

const PI: f64 = std::f64::consts::PI;

/// Contour family identifiers, one per verification setup.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseId {
    /// Laws on (0, inf) with density x^{p-1} g(x): sub-HCM powers and their
    /// scale mixtures.
    Lemma4,
    /// Beta powers (support (0,1), boundary rays along (-inf,0] and [1,inf)).
    BetaPower,
    /// MP powers, p > 1, r >= 1.
    MpA,
    /// MP powers with an atom, 0 < p < 1, r >= 1.
    MpB,
    /// MP inverse powers, p > 1, r <= -1.
    MpC,
    /// MP inverse powers, p > 1, -1 < r < 0 (sector domain).
    MpD,
    /// Symmetrized beta powers (quadrant check).
    Sym,
}

impl CaseId {
    pub fn parse(s: &str) -> Result<CaseId> {
        Ok(match s {
            "lemma4" => CaseId::Lemma4,
            "beta_power" => CaseId::BetaPower,
            "mp_a" => CaseId::MpA,
            "mp_b" => CaseId::MpB,
            "mp_c" => CaseId::MpC,
            "mp_d" => CaseId::MpD,
            "sym" => CaseId::Sym,
            _ => return Err(Error::InvalidParam(format!("unknown case id {s:?}"))),
        })
    }

    pub fn id(&self) -> &'static str {
        match self {
            CaseId::Lemma4 => "lemma4",
            CaseId::BetaPower => "beta_power",
            CaseId::MpA => "mp_a",
            CaseId::MpB => "mp_b",
            CaseId::MpC => "mp_c",
            CaseId::MpD => "mp_d",
            CaseId::Sym => "sym",
        }
    }
}

/// Parametric piece of a contour.
#[derive(Clone, Debug)]
pub enum SegmentKind {
    Line { from: Complex64, to: Complex64, log_spaced: bool },
    Arc { center: Complex64, radius: f64, theta0: f64, theta1: f64 },
}

#[derive(Clone, Debug)]
pub struct Segment {
    pub kind: SegmentKind,
    /// Sheet selector for samples that land exactly on the real axis.
    pub side: Side,
    pub label: &'static str,
}

impl Segment {
    fn line(from: Complex64, to: Complex64, side: Side, label: &'static str) -> Segment {
        let log_spaced = from.im == 0.0
            && to.im == 0.0
            && from.re != 0.0
            && to.re != 0.0
            && from.re.signum() == to.re.signum()
            && (from.re / to.re).abs().ln().abs() > 2.0;
        Segment { kind: SegmentKind::Line { from, to, log_spaced }, side, label }
    }

    fn arc(
        center: Complex64,
        radius: f64,
        theta0: f64,
        theta1: f64,
        side: Side,
        label: &'static str,
    ) -> Segment {
        Segment { kind: SegmentKind::Arc { center, radius, theta0, theta1 }, side, label }
    }

    /// Point at parameter u in [0, 1]; endpoints are exact.
    pub fn at(&self, u: f64) -> Complex64 {
        if u == 0.0 {
            if let SegmentKind::Line { from, .. } = self.kind {
                return from;
            }
        }
        if u == 1.0 {
            if let SegmentKind::Line { to, .. } = self.kind {
                return to;
            }
        }
        match &self.kind {
            SegmentKind::Line { from, to, log_spaced } => {
                if *log_spaced {
                    // geometric interpolation along the ray through 0
                    let r0 = from.norm();
                    let r1 = to.norm();
                    let dir = from / r0;
                    let r = (r0.ln() + u * (r1.ln() - r0.ln())).exp();
                    if from.im == 0.0 && to.im == 0.0 {
                        Complex64::new(from.re.signum() * r, 0.0)
                    } else {
                        dir * r
                    }
                } else {
                    from + u * (to - from)
                }
            }
            SegmentKind::Arc { center, radius, theta0, theta1 } => {
                let th = theta0 + u * (theta1 - theta0);
                center + Complex64::from_polar(*radius, th)
            }
        }
    }

    pub fn start(&self) -> Complex64 {
        self.at(0.0)
    }

    pub fn end(&self) -> Complex64 {
        self.at(1.0)
    }
}

/// Closed verification contour; consecutive segments share endpoints.
#[derive(Clone, Debug)]
pub struct Contour {
    pub case: CaseId,
    pub segments: Vec<Segment>,
    pub eta: f64,
    pub delta: f64,
}

impl Contour {
    /// Largest endpoint mismatch between consecutive segments, relative to
    /// the local point magnitude.
    pub fn closure_defect(&self) -> f64 {
        let n = self.segments.len();
        (0..n)
            .map(|i| {
                let a = self.segments[i].end();
                let b = self.segments[(i + 1) % n].start();
                (a - b).norm() / a.norm().max(1.0)
            })
            .fold(0.0, f64::max)
    }
}

/// Sampled image of a contour under the continued Cauchy transform.
#[derive(Clone, Debug)]
pub struct ImageCurve {
    /// (global parameter, z, G(z)) ordered along the contour.
    pub samples: Vec<(f64, Complex64, Complex64)>,
    /// Index of the first sample of each segment.
    pub segment_starts: Vec<usize>,
}

/// One sign-condition check along a boundary ray.
#[derive(Clone, Debug, Serialize)]
pub struct SignCheck {
    pub ray: String,
    pub max_re: f64,
    pub pass: bool,
}

/// Outcome of a UI / UI_s winding verification.
#[derive(Clone, Debug, Serialize)]
pub struct WindingReport {
    pub case: String,
    pub epsilon: f64,
    pub eta: f64,
    pub delta: f64,
    pub n_samples: usize,
    pub hypothesis_ok: bool,
    pub hypothesis_notes: Vec<String>,
    pub probes: Vec<[f64; 2]>,
    pub winding: Vec<i64>,
    pub sign_checks: Vec<SignCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unimodal: Option<bool>,
    pub all_pass: bool,
}

/// Parameters of a UI check; `None` fields take paper-derived defaults.
#[derive(Clone, Copy, Debug)]
pub struct UiParams {
    pub epsilon: f64,
    pub n_probes: usize,
    pub eta: Option<f64>,
    pub delta: Option<f64>,
    pub ray_points: usize,
}

impl Default for UiParams {
    fn default() -> Self {
        UiParams { epsilon: 1e-3, n_probes: 200, eta: None, delta: None, ray_points: 50 }
    }
}

const SIGN_TOL: f64 = 1e-10;
const MAX_SAMPLES: usize = 1_000_000;
const INITIAL_PER_SEGMENT: usize = 64;
const REFINE_ANGLE: f64 = PI / 8.0;

fn logspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    let (la, lb) = (a.ln(), b.ln());
    (0..n)
        .map(|i| (la + (lb - la) * i as f64 / (n.max(2) - 1) as f64).exp())
        .collect()
}

/// R2 low-discrepancy sequence on the unit square.
fn r2(k: usize) -> (f64, f64) {
    const A1: f64 = 0.754_877_666_246_692_7;
    const A2: f64 = 0.569_840_290_998_053_2;
    let k = k as f64 + 1.0;
    ((0.5 + A1 * k).fract(), (0.5 + A2 * k).fract())
}

/// Quasi-uniform probes in {w: eps < |w| < 1/eps, arg in (ang_lo, ang_hi)},
/// log-uniform in radius with an inset from the annulus boundary.
pub fn probe_points(epsilon: f64, n: usize, ang_lo: f64, ang_hi: f64) -> Vec<Complex64> {
    let (l0, l1) = (epsilon.ln(), (1.0 / epsilon).ln());
    (0..n)
        .map(|k| {
            let (u, v) = r2(k);
            let lr = l0 + (0.05 + 0.9 * u) * (l1 - l0);
            let ang = ang_lo + (0.02 + 0.96 * v) * (ang_hi - ang_lo);
            Complex64::from_polar(lr.exp(), ang)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// contour construction
// ---------------------------------------------------------------------------

fn effective_power(spec: &DistributionSpec) -> f64 {
    spec.transforms
        .iter()
        .map(|t| match t {
            Transform::Power { r } => *r,
            _ => 1.0,
        })
        .product()
}

/// Default outer radius: far enough out that |G| < epsilon on the eta circle.
pub fn default_eta(spec: &DistributionSpec, epsilon: f64) -> f64 {
    let support = spec.support();
    let hi = support.hi();
    let lo = support.lo().abs();
    if hi.is_finite() {
        1e3f64.max(1e2 * hi.max(lo))
    } else {
        // heavy tail ~ c x^{-1-beta}: tail mass past eta must stay below
        // epsilon/4, as must the near-mass bound 1/eta
        let (beta, cinf) = spec.asymptotics().tail.unwrap_or((1.0, 1.0));
        let tail_eta = (4.0 * cinf / (beta * epsilon)).powf(1.0 / beta);
        1e3f64.max(4.0 / epsilon).max(tail_eta)
    }
}

/// Default inner radius: below the small-z bound (a·eps/2)^{1/(1-p)} when
/// the support touches 0, otherwise half the left support endpoint.
pub fn default_delta(spec: &DistributionSpec, epsilon: f64) -> f64 {
    let support = spec.support();
    let touches_zero = support.distance(0.0) == 0.0;
    if touches_zero {
        if let Some((e0, c0)) = spec.asymptotics().zero {
            let p_eff = e0 + 1.0;
            if p_eff > 0.0 && p_eff < 1.0 {
                let a_const = PI * c0 / (PI * p_eff).sin();
                let bound = (a_const * epsilon / 2.0).powf(1.0 / (1.0 - p_eff));
                return 1e-4f64.min(0.5 * bound);
            }
        }
        1e-4
    } else {
        1e-4f64.min(0.5 * support.lo())
    }
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn structural_check(case: CaseId, spec: &DistributionSpec) -> Result<()> {
    let r = effective_power(spec);
    let sym = spec.is_symmetrized();
    let fail = |msg: &str| Err(Error::CaseMismatch(msg.into()));
    match case {
        CaseId::Lemma4 => {
            if !matches!(spec.kind, Kind::SubHcm { .. }) || sym {
                return fail("lemma4 needs a sub-HCM base without symmetrization");
            }
        }
        CaseId::BetaPower => {
            if !matches!(spec.kind, Kind::Beta { .. }) || sym {
                return fail("beta_power needs a beta base without symmetrization");
            }
            if r < 1.0 {
                return fail("beta_power needs r >= 1");
            }
        }
        CaseId::MpA => {
            let Kind::FreePoisson { p, .. } = spec.kind else {
                return fail("mp_a needs a free Poisson base");
            };
            if sym || !(p > 1.0) || r < 1.0 {
                return fail("mp_a requires p > 1 and r >= 1");
            }
        }
        CaseId::MpB => {
            let Kind::FreePoisson { p, .. } = spec.kind else {
                return fail("mp_b needs a free Poisson base");
            };
            if sym || !(p < 1.0 && p > 0.0) || r < 1.0 {
                return fail("mp_b requires 0 < p < 1 and r >= 1");
            }
        }
        CaseId::MpC => {
            let Kind::FreePoisson { p, .. } = spec.kind else {
                return fail("mp_c needs a free Poisson base");
            };
            if sym || !(p > 1.0) || !(r <= -1.0) {
                return fail("mp_c requires p > 1, r <= -1");
            }
        }
        CaseId::MpD => {
            let Kind::FreePoisson { p, .. } = spec.kind else {
                return fail("mp_d needs a free Poisson base");
            };
            if sym || !(p > 1.0) || !(r > -1.0 && r < 0.0) {
                return fail("mp_d requires p > 1 and -1 < r < 0");
            }
        }
        CaseId::Sym => {
            if !sym {
                return fail("sym case needs a symmetrized spec");
            }
            if !spec.support().hi().is_finite() {
                return fail("sym case needs a bounded support");
            }
        }
    }
    Ok(())
}

/// Advisory parameter-range checks against the theorem hypotheses.
fn hypothesis_notes(case: CaseId, spec: &DistributionSpec) -> Vec<String> {
    let mut notes = Vec::new();
    let r = effective_power(spec);
    match case {
        CaseId::Lemma4 => {
            if let Kind::SubHcm { p, ref sites, .. } = spec.kind {
                let gamma_total: f64 = sites.iter().map(|&(_, g)| g).sum();
                if !(p > 0.0 && p <= 0.5) {
                    notes.push(format!("need 0 < p <= 1/2, got p = {p}"));
                }
                let d = gamma_total - p;
                if !(d > 0.0 && d <= 0.5) {
                    notes.push(format!("need 0 < sum(gamma)-p <= 1/2, got {d}"));
                }
            }
            if r.abs() < 1.0 {
                notes.push(format!("need |r| >= 1, got r = {r}"));
            }
        }
        CaseId::BetaPower | CaseId::Sym => {
            let (p, q) = match spec.kind {
                Kind::Beta { p, q } => (p, q),
                _ => return notes,
            };
            if r < 1.0 {
                notes.push(format!("need r >= 1, got {r}"));
            }
            if !(1.5..=2.5).contains(&q) {
                notes.push(format!("need q in [3/2, 5/2], got {q}"));
            }
            if q == 2.0 {
                notes.push("q = 2 produces a logarithmic term and is excluded".into());
            }
            if 2.0 * p > r {
                notes.push(format!("need 2p <= r, got 2p = {}", 2.0 * p));
            }
            let mid = p + q - 1.0;
            if !((q - 1.5) * r <= mid && mid <= r) {
                notes.push(format!("need (q-3/2)r <= p+q-1 <= r, got p+q-1 = {mid}"));
            }
        }
        CaseId::MpA | CaseId::MpB | CaseId::MpC | CaseId::MpD => {}
    }
    notes
}

/// When the support touches 0, the inner radius must stay below the
/// small-z bound (a·eps/2)^{1/(1-p)} for the delta circle image to clear
/// the probe annulus.
pub fn validate_delta_bound(spec: &DistributionSpec, delta: f64, epsilon: f64) -> Result<()> {
    if spec.support().distance(0.0) != 0.0 {
        return Ok(());
    }
    if let Some((e0, c0)) = spec.asymptotics().zero {
        let p_eff = e0 + 1.0;
        if p_eff > 0.0 && p_eff < 1.0 {
            let a_const = PI * c0 / (PI * p_eff).sin();
            let bound = (a_const * epsilon / 2.0).powf(1.0 / (1.0 - p_eff));
            if delta > bound {
                return Err(Error::InvalidParam(format!(
                    "delta = {delta} exceeds the small-z bound {bound:.3e} at epsilon = {epsilon}"
                )));
            }
        }
    }
    Ok(())
}

/// Build the verification contour for a case.
pub fn build_contour(
    case: CaseId,
    spec: &DistributionSpec,
    eta: f64,
    delta: f64,
) -> Result<Contour> {
    structural_check(case, spec)?;
    let support = spec.support();
    let hi = support.hi();
    if hi.is_finite() && eta < 10.0 * hi.max(support.lo().abs()) {
        return Err(Error::InvalidParam(format!(
            "eta = {eta} must exceed 10x the outer support radius {hi}"
        )));
    }
    if !(delta > 0.0) {
        return Err(Error::InvalidParam("delta must be positive".into()));
    }
    let touches_zero = support.distance(0.0) == 0.0;
    if touches_zero {
        // the epsilon-dependent small-z bound is enforced by ui_check; here
        // only reject radii that reach a comparable scale to the support
        if delta > 0.1 * support.hi().min(1.0) {
            return Err(Error::InvalidParam(format!(
                "delta = {delta} is not small against the support"
            )));
        }
    } else if delta >= support.lo() {
        return Err(Error::InvalidParam(format!(
            "delta = {delta} must stay below the left support endpoint {}",
            support.lo()
        )));
    }

    let segs = match case {
        CaseId::Lemma4 => vec![
            Segment::line(c(-eta), c(-delta), Side::Plus, "c1"),
            Segment::arc(c(0.0), delta, PI, -PI, Side::Minus, "c2"),
            Segment::line(c(-delta), c(-eta), Side::Minus, "c3"),
            Segment::arc(c(0.0), eta, -PI, PI, Side::Plus, "c4"),
        ],
        CaseId::BetaPower => {
            let center = c(0.5);
            let radius = eta + 0.5;
            vec![
                Segment::line(c(-eta), c(-delta), Side::Plus, "c1"),
                Segment::arc(c(0.0), delta, PI, -PI, Side::Minus, "c2"),
                Segment::line(c(-delta), c(-eta), Side::Minus, "c3"),
                Segment::arc(center, radius, -PI, 0.0, Side::Minus, "c4"),
                Segment::line(c(1.0 + eta), c(1.0), Side::Minus, "c5"),
                Segment::line(c(1.0), c(1.0 + eta), Side::Plus, "c6"),
                Segment::arc(center, radius, 0.0, PI, Side::Plus, "c7"),
            ]
        }
        CaseId::Sym => {
            let sup = support.hi();
            let center = c(0.5 * sup);
            let radius = eta + 0.5 * sup;
            // the upper-right arc stops where it crosses the imaginary axis
            let theta_star = (-0.5 * sup / radius).acos();
            let top = center + Complex64::from_polar(radius, theta_star);
            vec![
                Segment::line(
                    Complex64::new(0.0, top.im),
                    Complex64::new(0.0, delta),
                    Side::Plus,
                    "c1",
                ),
                Segment::arc(c(0.0), delta, PI / 2.0, -PI, Side::Minus, "c2"),
                Segment::line(c(-delta), c(-eta), Side::Minus, "c3"),
                Segment::arc(center, radius, -PI, 0.0, Side::Minus, "c4"),
                Segment::line(c(sup + eta), c(sup), Side::Minus, "c5"),
                Segment::line(c(sup), c(sup + eta), Side::Plus, "c6"),
                Segment::arc(center, radius, 0.0, theta_star, Side::Plus, "c7"),
            ]
        }
        CaseId::MpA | CaseId::MpC => {
            let (a, b) = support.intervals[0];
            vec![
                Segment::line(c(-eta), c(a), Side::Plus, "c1"),
                Segment::line(c(a), c(delta), Side::Minus, "c2"),
                Segment::arc(c(0.0), delta, 0.0, -PI, Side::Minus, "c3"),
                Segment::line(c(-delta), c(-eta), Side::Minus, "c4"),
                Segment::arc(c(0.0), eta, -PI, 0.0, Side::Minus, "c5"),
                Segment::line(c(eta), c(b), Side::Minus, "c6"),
                Segment::line(c(b), c(eta), Side::Plus, "c7"),
                Segment::arc(c(0.0), eta, 0.0, PI, Side::Plus, "c8"),
            ]
        }
        CaseId::MpB => {
            let (a, b) = support.intervals[0];
            vec![
                Segment::line(c(-eta), c(-delta), Side::Plus, "c1"),
                Segment::arc(c(0.0), delta, PI, 0.0, Side::Plus, "c2"),
                Segment::line(c(delta), c(a), Side::Plus, "c3"),
                Segment::line(c(a), c(delta), Side::Minus, "c4"),
                Segment::arc(c(0.0), delta, 0.0, -PI, Side::Minus, "c5"),
                Segment::line(c(-delta), c(-eta), Side::Minus, "c6"),
                Segment::arc(c(0.0), eta, -PI, 0.0, Side::Minus, "c7"),
                Segment::line(c(eta), c(b), Side::Minus, "c8"),
                Segment::line(c(b), c(eta), Side::Plus, "c9"),
                Segment::arc(c(0.0), eta, 0.0, PI, Side::Plus, "c10"),
            ]
        }
        CaseId::MpD => {
            let (a, b) = support.intervals[0];
            let t = -1.0 / effective_power(spec);
            // stay a hair inside the sector so every sample is in-domain
            let ray = -PI / t * (1.0 - 1e-9);
            let ray_dir = Complex64::from_polar(1.0, ray);
            vec![
                Segment::line(c(-eta), c(a), Side::Plus, "c1"),
                Segment::line(c(a), c(delta), Side::Minus, "c2"),
                Segment::arc(c(0.0), delta, 0.0, ray, Side::Minus, "c3"),
                Segment {
                    kind: SegmentKind::Line {
                        from: delta * ray_dir,
                        to: eta * ray_dir,
                        log_spaced: true,
                    },
                    side: Side::Minus,
                    label: "c4",
                },
                Segment::arc(c(0.0), eta, ray, 0.0, Side::Minus, "c5"),
                Segment::line(c(eta), c(b), Side::Minus, "c6"),
                Segment::line(c(b), c(eta), Side::Plus, "c7"),
                Segment::arc(c(0.0), eta, 0.0, PI, Side::Plus, "c8"),
            ]
        }
    };
    Ok(Contour { case, segments: segs, eta, delta })
}

// ---------------------------------------------------------------------------
// tracing and winding
// ---------------------------------------------------------------------------

fn eval_on_segment(ev: &CauchyEvaluator, seg: &Segment, z: Complex64) -> Result<Complex64> {
    let side = if z.im != 0.0 {
        if z.im > 0.0 {
            Side::Plus
        } else {
            Side::Minus
        }
    } else {
        seg.side
    };
    ev.g_continued(z, side)
}

/// Maximum angle subtended at any probe by the chord (w0, w1).
fn max_subtended(w0: Complex64, w1: Complex64, probes: &[Complex64]) -> f64 {
    let chord = (w1 - w0).norm();
    let mut worst: f64 = 0.0;
    for &p in probes {
        let d0 = (w0 - p).norm();
        let d1 = (w1 - p).norm();
        let dmin = d0.min(d1);
        if dmin <= 0.0 {
            return PI;
        }
        if chord <= 0.2 * dmin {
            // chord/dmin bounds the angle; skip the atan2
            worst = worst.max(chord / dmin);
            continue;
        }
        worst = worst.max(((w1 - p) / (w0 - p)).arg().abs());
    }
    worst
}

/// Adaptively sampled image of the contour under the continued transform:
/// pairs are bisected until every chord subtends less than pi/8 at every
/// registered probe.
pub fn trace_image(
    ev: &CauchyEvaluator,
    contour: &Contour,
    probes: &[Complex64],
) -> Result<ImageCurve> {
    let mut samples: Vec<(f64, Complex64, Complex64)> = Vec::new();
    let mut segment_starts = Vec::new();
    let mut total = 0usize;
    for (si, seg) in contour.segments.iter().enumerate() {
        segment_starts.push(samples.len());
        let mut params: Vec<f64> = (0..=INITIAL_PER_SEGMENT)
            .map(|i| i as f64 / INITIAL_PER_SEGMENT as f64)
            .collect();
        let mut values: Vec<Complex64> = params
            .iter()
            .map(|&u| eval_on_segment(ev, seg, seg.at(u)))
            .collect::<Result<_>>()?;
        total += values.len();
        let mut i = 0;
        while i + 1 < params.len() {
            let need = max_subtended(values[i], values[i + 1], probes) >= REFINE_ANGLE;
            if need && params[i + 1] - params[i] > 1e-12 {
                if total >= MAX_SAMPLES {
                    return Err(Error::RefinementBudget { budget: MAX_SAMPLES, segment: si });
                }
                let um = 0.5 * (params[i] + params[i + 1]);
                let wm = eval_on_segment(ev, seg, seg.at(um))?;
                params.insert(i + 1, um);
                values.insert(i + 1, wm);
                total += 1;
            } else {
                i += 1;
            }
        }
        for (u, w) in params.iter().zip(&values) {
            samples.push((si as f64 + u, seg.at(*u), *w));
        }
    }
    Ok(ImageCurve { samples, segment_starts })
}

/// Winding number of a closed sample sequence about a point: summed
/// argument increments over 2π, rounded; the residual must stay below
/// 1e-3 turns and the point must keep a 1e-6 distance from every sample.
pub fn winding_of_samples(ws: &[Complex64], point: Complex64) -> Result<i64> {
    if ws.len() < 3 {
        return Err(Error::InvalidParam("winding needs at least 3 samples".into()));
    }
    let mut total = 0.0;
    for k in 0..ws.len() {
        let w0 = ws[k] - point;
        let w1 = ws[(k + 1) % ws.len()] - point;
        if w0.norm() < 1e-6 || w1.norm() < 1e-6 {
            return Err(Error::PointOnCurve);
        }
        total += (w1 / w0).arg();
    }
    let turns = total / (2.0 * PI);
    let rounded = turns.round();
    if (turns - rounded).abs() > 1e-3 {
        return Err(Error::WindingResidual { residual: (turns - rounded).abs() });
    }
    Ok(rounded as i64)
}

/// Winding number of the traced image about a probe.
pub fn winding_number(curve: &ImageCurve, point: Complex64) -> Result<i64> {
    let ws: Vec<Complex64> = curve.samples.iter().map(|s| s.2).collect();
    winding_of_samples(&ws, point)
}

// ---------------------------------------------------------------------------
// UI / UI_s checks
// ---------------------------------------------------------------------------

struct RaySpec {
    label: String,
    points: Vec<f64>,
}

fn sign_rays(
    case: CaseId,
    spec: &DistributionSpec,
    eta: f64,
    delta: f64,
    n: usize,
) -> Vec<RaySpec> {
    let support = spec.support();
    let mut rays = Vec::new();
    let neg = |label: &str| RaySpec {
        label: label.into(),
        points: logspace(2.0 * delta, 0.5 * eta, n).into_iter().map(|x| -x).collect(),
    };
    match case {
        CaseId::Lemma4 => rays.push(neg("x<0 (A5)")),
        CaseId::BetaPower => {
            rays.push(neg("x<0"));
            rays.push(RaySpec { label: "x>1".into(), points: logspace(1.01, 0.5 * eta, n) });
        }
        CaseId::Sym => {
            let sup = support.hi();
            rays.push(neg("x<0"));
            rays.push(RaySpec {
                label: "x>sup".into(),
                points: logspace(1.01 * sup, 0.5 * eta, n),
            });
        }
        CaseId::MpA | CaseId::MpB | CaseId::MpC => {
            let (a, b) = support.intervals[0];
            rays.push(neg(if case == CaseId::MpC { "x<0 (ci/cii)" } else { "x<0" }));
            rays.push(RaySpec {
                label: "0<x<a (imaginary)".into(),
                points: (1..=n).map(|i| a * i as f64 / (n + 1) as f64).collect(),
            });
            rays.push(RaySpec {
                label: "x>b (imaginary)".into(),
                points: logspace(1.01 * b, 0.5 * eta, n),
            });
        }
        CaseId::MpD => {
            let (a, b) = support.intervals[0];
            rays.push(RaySpec {
                label: "ray -pi/t".into(),
                points: logspace(2.0 * delta, 0.5 * eta, n).into_iter().map(|x| -x).collect(),
            });
            rays.push(RaySpec {
                label: "0<x<A (imaginary)".into(),
                points: (1..=n).map(|i| a * i as f64 / (n + 1) as f64).collect(),
            });
            rays.push(RaySpec {
                label: "x>B (imaginary)".into(),
                points: logspace(1.01 * b, 0.5 * eta, n),
            });
        }
    }
    rays
}

fn run_sign_checks(
    case: CaseId,
    spec: &DistributionSpec,
    ev: &CauchyEvaluator,
    eta: f64,
    delta: f64,
    n: usize,
) -> Result<Vec<SignCheck>> {
    let bd = ev
        .branched()
        .ok_or_else(|| Error::Domain("sign checks need the branched density".into()))?;
    let mut out = Vec::new();
    for ray in sign_rays(case, spec, eta, delta, n) {
        let imaginary_ray = ray.label.contains("imaginary");
        let mut max_re = f64::NEG_INFINITY;
        for &x in &ray.points {
            let f = bd.boundary(x, Side::Minus)?;
            let v = if imaginary_ray { f.re.abs() } else { f.re };
            max_re = max_re.max(v);
        }
        out.push(SignCheck { ray: ray.label, max_re, pass: max_re <= SIGN_TOL });
    }
    Ok(out)
}

fn sub_case_note(case: CaseId, spec: &DistributionSpec) -> Option<String> {
    if case != CaseId::MpC {
        return None;
    }
    let t = -1.0 / effective_power(spec);
    Some(if t <= 0.5 {
        format!("sub-case (ci): t = {t} <= 1/2")
    } else {
        format!("sub-case (cii): t = {t} > 1/2")
    })
}

#[allow(clippy::too_many_arguments)]
fn assemble_report(
    case: CaseId,
    spec: &DistributionSpec,
    params: &UiParams,
    probes: Vec<Complex64>,
    curve: &ImageCurve,
    sign_checks: Vec<SignCheck>,
    unimodal: Option<bool>,
    eta: f64,
    delta: f64,
) -> Result<WindingReport> {
    let ws: Vec<Complex64> = curve.samples.iter().map(|s| s.2).collect();
    let winding: Vec<i64> = probes
        .par_iter()
        .map(|&p| winding_of_samples(&ws, p))
        .collect::<Result<Vec<_>>>()?;
    let mut notes = hypothesis_notes(case, spec);
    if let Some(n) = sub_case_note(case, spec) {
        notes.push(n);
    }
    let hypothesis_ok = notes.iter().all(|n| n.starts_with("sub-case"));
    let all_pass = winding.iter().all(|&w| w == 1)
        && sign_checks.iter().all(|s| s.pass)
        && unimodal.unwrap_or(true);
    Ok(WindingReport {
        case: case.id().into(),
        epsilon: params.epsilon,
        eta,
        delta,
        n_samples: curve.samples.len(),
        hypothesis_ok,
        hypothesis_notes: notes,
        probes: probes.iter().map(|p| [p.re, p.im]).collect(),
        winding,
        sign_checks,
        unimodal,
        all_pass,
    })
}

/// Winding certificate for the UI class: every probe in the lower
/// half-plane annulus D_eps must be wound exactly once by the image of the
/// case contour, and the boundary sign conditions must hold. Hypothesis
/// violations are reported, not fatal: exploratory runs are allowed.
pub fn ui_check(spec: &DistributionSpec, case: CaseId, params: &UiParams) -> Result<WindingReport> {
    if case == CaseId::Sym {
        return ui_s_check(spec, params);
    }
    structural_check(case, spec)?;
    let eta = params.eta.unwrap_or_else(|| default_eta(spec, params.epsilon));
    let delta = params.delta.unwrap_or_else(|| default_delta(spec, params.epsilon));
    validate_delta_bound(spec, delta, params.epsilon)?;
    let contour = build_contour(case, spec, eta, delta)?;
    let ev = CauchyEvaluator::new(spec)?;
    let probes = probe_points(params.epsilon, params.n_probes, -PI, 0.0);
    let curve = trace_image(&ev, &contour, &probes)?;
    let sign_checks = run_sign_checks(case, spec, &ev, eta, delta, params.ray_points)?;
    assemble_report(case, spec, params, probes, &curve, sign_checks, None, eta, delta)
}

/// Sign changes of the density derivative on (0, sup): at most one change
/// is the numeric unimodality surrogate.
fn unimodality_scan(spec: &DistributionSpec, ev: &CauchyEvaluator) -> Result<bool> {
    let bd = ev
        .branched()
        .ok_or_else(|| Error::Domain("unimodality scan needs the branched density".into()))?;
    let sup = spec.support().hi();
    let xs = logspace(1e-6 * sup, 0.999 * sup, 600);
    let mut derivs = Vec::with_capacity(xs.len());
    for &x in &xs {
        let (_, f1) = bd.eval_with_deriv(c(x))?;
        derivs.push(f1.re);
    }
    let scale = derivs.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    let mut changes = 0;
    let mut last_sign = 0i8;
    for d in derivs {
        if d.abs() < 1e-10 * scale {
            continue;
        }
        let s = if d > 0.0 { 1 } else { -1 };
        if last_sign != 0 && s != last_sign {
            changes += 1;
        }
        last_sign = s;
    }
    Ok(changes <= 1)
}

/// Winding certificate for the symmetric class UI_s: probes in the fourth
/// quadrant annulus, plus the unimodality surrogate for the axis condition.
pub fn ui_s_check(spec: &DistributionSpec, params: &UiParams) -> Result<WindingReport> {
    structural_check(CaseId::Sym, spec)?;
    let eta = params.eta.unwrap_or_else(|| default_eta(spec, params.epsilon));
    let delta = params.delta.unwrap_or_else(|| default_delta(spec, params.epsilon));
    validate_delta_bound(spec, delta, params.epsilon)?;
    let contour = build_contour(CaseId::Sym, spec, eta, delta)?;
    let ev = CauchyEvaluator::new(spec)?;
    let probes = probe_points(params.epsilon, params.n_probes, -PI / 2.0, 0.0);
    let curve = trace_image(&ev, &contour, &probes)?;
    let sign_checks = run_sign_checks(CaseId::Sym, spec, &ev, eta, delta, params.ray_points)?;
    let unimodal = unimodality_scan(spec, &ev)?;
    assemble_report(
        CaseId::Sym,
        spec,
        params,
        probes,
        &curve,
        sign_checks,
        Some(unimodal),
        eta,
        delta,
    )
}

// ---------------------------------------------------------------------------
// FID diagnostics
// ---------------------------------------------------------------------------

/// Verdict of the density-at-zero probe.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Pdf0Verdict {
    NotFidConsistent,
    Inconclusive,
}

/// G(iy) samples along a log grid plus the verdict: a symmetric law whose
/// continuous density vanishes at 0 and whose G(iy) -> 0 cannot be freely
/// infinitely divisible.
#[derive(Clone, Debug, Serialize)]
pub struct Pdf0Report {
    pub ys: Vec<f64>,
    pub g_at_small_iy: Vec<[f64; 2]>,
    pub density_near_zero: f64,
    pub verdict: Pdf0Verdict,
}

pub fn lemma_pdf0_probe(spec: &DistributionSpec) -> Result<Pdf0Report> {
    if !spec.is_symmetrized() {
        return Err(Error::InvalidParam("pdf0 probe needs a symmetric spec".into()));
    }
    let ev = CauchyEvaluator::new(spec)?;
    let ys = logspace(1e-5, 1e-1, 9);
    let mut gs = Vec::with_capacity(ys.len());
    for &y in &ys {
        let g = ev.g_continued(Complex64::new(0.0, y), Side::Plus)?;
        gs.push([g.re, g.im]);
    }
    let density_near_zero = match spec.asymptotics().zero {
        Some((e0, c0)) => {
            if e0 > 0.0 {
                0.0
            } else if e0 == 0.0 {
                c0
            } else {
                f64::INFINITY
            }
        }
        None => spec.density(1e-6).unwrap_or(f64::INFINITY),
    };
    let norm_at = |g: &[f64; 2]| (g[0] * g[0] + g[1] * g[1]).sqrt();
    let smallest = norm_at(&gs[0]);
    let decreasing = smallest < norm_at(&gs[gs.len() - 1]);
    let verdict = if density_near_zero < 1e-3 && smallest < 1e-3 && decreasing {
        Pdf0Verdict::NotFidConsistent
    } else {
        Pdf0Verdict::Inconclusive
    };
    Ok(Pdf0Report { ys, g_at_small_iy: gs, density_near_zero, verdict })
}

// ---------------------------------------------------------------------------
// domain scans
// ---------------------------------------------------------------------------

/// Scan box in the complex plane.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ScanBox {
    pub re_lo: f64,
    pub re_hi: f64,
    pub im_lo: f64,
    pub im_hi: f64,
}

/// Boolean membership grid with the seed's 4-connected component.
#[derive(Clone, Debug, Serialize)]
pub struct DomainGrid {
    pub bbox: ScanBox,
    pub nx: usize,
    pub ny: usize,
    /// Row-major, rows scanning im from lo to hi: G(z) in the lower
    /// half-plane (and z inside the admissible region).
    pub mask: Vec<bool>,
    /// The 4-connected component of the mask reached from the seed.
    pub component: Vec<bool>,
    pub seed: [f64; 2],
    pub seed_cell: [usize; 2],
    pub area_fraction: f64,
    /// Observational only: whether the component stays in the right
    /// half-plane has no proof.
    pub min_re_component: f64,
}

/// Scan {z in (lower half-plane ∪ right half-plane) minus the cut
/// [sup, inf)} for G(z) in the lower half-plane, growing the component
/// reached from the principal inverse branch (seed w0 = (1-i)/100).
pub fn domain_scan(
    spec: &DistributionSpec,
    bbox: ScanBox,
    nx: usize,
    ny: usize,
) -> Result<DomainGrid> {
    if !spec.is_symmetrized() {
        return Err(Error::InvalidParam("domain scan expects a symmetrized spec".into()));
    }
    if nx == 0 || ny == 0 || bbox.re_hi <= bbox.re_lo || bbox.im_hi <= bbox.im_lo {
        return Err(Error::InvalidParam("empty scan box".into()));
    }
    let ev = CauchyEvaluator::new(spec)?;
    let sup = spec.support().hi();
    let cut_margin = 1e-3;
    let dx = (bbox.re_hi - bbox.re_lo) / nx as f64;
    let dy = (bbox.im_hi - bbox.im_lo) / ny as f64;
    let center = |ix: usize, iy: usize| {
        Complex64::new(
            bbox.re_lo + (ix as f64 + 0.5) * dx,
            bbox.im_lo + (iy as f64 + 0.5) * dy,
        )
    };
    let in_region = |z: Complex64| {
        let region = z.im < 0.0 || z.re > 0.0;
        let near_cut = z.im.abs() <= cut_margin && z.re >= sup - cut_margin;
        region && !near_cut
    };
    let rows: Vec<Vec<bool>> = (0..ny)
        .into_par_iter()
        .map(|iy| {
            let mut row = Vec::with_capacity(nx);
            for ix in 0..nx {
                let z = center(ix, iy);
                if !in_region(z) {
                    row.push(false);
                    continue;
                }
                let val = if z.im == 0.0 {
                    // on the axis inside (0, sup): Im G = -π f(x) < 0
                    spec.density(z.re).map(|f| f > 0.0).unwrap_or(false)
                } else {
                    let side = if z.im < 0.0 { Side::Minus } else { Side::Plus };
                    match ev.g_continued(z, side) {
                        Ok(g) => g.im < 0.0,
                        Err(_) => false,
                    }
                };
                row.push(val);
            }
            row
        })
        .collect();
    let mut mask = Vec::with_capacity(nx * ny);
    for row in rows {
        mask.extend(row);
    }

    // principal-branch seed
    let w0 = Complex64::new(1e-2, -1e-2);
    let z0 = ev.g_inverse_numeric(w0, 1.0 / w0)?;
    let cell_of = |z: Complex64| -> Option<(usize, usize)> {
        if z.re < bbox.re_lo || z.re > bbox.re_hi || z.im < bbox.im_lo || z.im > bbox.im_hi {
            return None;
        }
        let ix = (((z.re - bbox.re_lo) / dx) as usize).min(nx - 1);
        let iy = (((z.im - bbox.im_lo) / dy) as usize).min(ny - 1);
        Some((ix, iy))
    };
    let seed_cell = match cell_of(z0) {
        Some((ix, iy)) if mask[iy * nx + ix] => (ix, iy),
        _ => {
            // the seed lies outside the box; the whole upper-right quadrant
            // satisfies Im G < 0 and connects to it, so the nearest masked
            // in-box cell in that quadrant joins the same component
            let mut best: Option<(f64, (usize, usize))> = None;
            for iy in 0..ny {
                for ix in 0..nx {
                    let z = center(ix, iy);
                    if z.re > 0.0 && z.im > 0.0 && mask[iy * nx + ix] {
                        let d = (z - z0).norm();
                        if best.map(|(bd, _)| d < bd).unwrap_or(true) {
                            best = Some((d, (ix, iy)));
                        }
                    }
                }
            }
            best.map(|(_, cell)| cell).ok_or_else(|| {
                Error::Domain("inverse-branch seed is unreachable from the scan box".into())
            })?
        }
    };

    // 4-connected flood fill
    let idx = |ix: usize, iy: usize| iy * nx + ix;
    let mut component = vec![false; nx * ny];
    let mut queue = std::collections::VecDeque::new();
    component[idx(seed_cell.0, seed_cell.1)] = true;
    queue.push_back(seed_cell);
    while let Some((ix, iy)) = queue.pop_front() {
        let mut neighbors = Vec::with_capacity(4);
        if ix > 0 {
            neighbors.push((ix - 1, iy));
        }
        if ix + 1 < nx {
            neighbors.push((ix + 1, iy));
        }
        if iy > 0 {
            neighbors.push((ix, iy - 1));
        }
        if iy + 1 < ny {
            neighbors.push((ix, iy + 1));
        }
        for (jx, jy) in neighbors {
            if mask[idx(jx, jy)] && !component[idx(jx, jy)] {
                component[idx(jx, jy)] = true;
                queue.push_back((jx, jy));
            }
        }
    }
    let count = component.iter().filter(|&&b| b).count();
    let mut min_re = f64::INFINITY;
    for iy in 0..ny {
        for ix in 0..nx {
            if component[idx(ix, iy)] {
                min_re = min_re.min(center(ix, iy).re);
            }
        }
    }
    Ok(DomainGrid {
        bbox,
        nx,
        ny,
        mask,
        component,
        seed: [z0.re, z0.im],
        seed_cell: [seed_cell.0, seed_cell.1],
        area_fraction: count as f64 / (nx * ny) as f64,
        min_re_component: min_re,
    })
}
