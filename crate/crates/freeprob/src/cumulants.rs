//! Moment sequences, free cumulants, and Hankel sign diagnostics.
//!
//! The moment-cumulant recursion comes from the functional equation
//! M(z) = 1 + Σ_s K_s z^s M(z)^s: m_n = Σ_s K_s Σ_{i_1+..+i_s = n-s} Π m_{i_j}.
//! Scans run the whole pipeline in double-double arithmetic; the order-14
//! determinant cancels far past f64.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::measures::mp11_moment;

/// Where a moment sequence came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentSource {
    ClosedForm,
    Quadrature,
}

/// Finite moment sequence m_1..m_N (m_0 = 1 implicitly).
#[derive(Clone, Debug, Serialize)]
pub struct MomentSequence {
    pub values: Vec<f64>,
    pub source: MomentSource,
}

/// Finite free-cumulant sequence K_1..K_N.
#[derive(Clone, Debug, Serialize)]
pub struct CumulantSequence {
    pub values: Vec<f64>,
}

/// Named Hankel functional of the cumulant sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Functional {
    /// K4 K2 - K3^2
    H22,
    /// K6
    K6,
    /// K2 K6 - K4^2 on the symmetrized sequence
    SymH,
    /// det (K_{2i+2j-2})_{i,j=1..4} on the symmetrized sequence
    SymDet4,
    /// det (K_{i+j+2})_{0<=i,j<=k}
    Minor(usize),
}

impl Functional {
    pub fn parse(s: &str) -> Result<Functional> {
        match s {
            "h22" => Ok(Functional::H22),
            "k6" => Ok(Functional::K6),
            "sym_h" => Ok(Functional::SymH),
            "sym_det4" => Ok(Functional::SymDet4),
            _ => {
                if let Some(k) = s.strip_prefix("minor") {
                    let k = k.trim_start_matches([':', '(']).trim_end_matches(')');
                    if let Ok(k) = k.parse::<usize>() {
                        return Ok(Functional::Minor(k));
                    }
                }
                Err(Error::InvalidParam(format!("unknown functional id {s:?}")))
            }
        }
    }

    pub fn id(&self) -> String {
        match self {
            Functional::H22 => "h22".into(),
            Functional::K6 => "k6".into(),
            Functional::SymH => "sym_h".into(),
            Functional::SymDet4 => "sym_det4".into(),
            Functional::Minor(k) => format!("minor({k})"),
        }
    }

    /// Highest cumulant order the functional reads.
    pub fn order(&self) -> usize {
        match self {
            Functional::H22 => 4,
            Functional::K6 => 6,
            Functional::SymH => 6,
            Functional::SymDet4 => 14,
            Functional::Minor(k) => 2 * k + 2,
        }
    }

    /// Whether the functional is defined on the symmetrized sequence.
    pub fn symmetrized_default(&self) -> bool {
        matches!(self, Functional::SymH | Functional::SymDet4)
    }
}

/// One evaluation of a Hankel functional.
#[derive(Clone, Debug, Serialize)]
pub struct HankelReport {
    pub functional: String,
    pub r: f64,
    pub value: f64,
    /// Ratio of the term magnitudes to the result: digits lost to cancellation.
    pub cancellation: f64,
}

/// A sign change of a functional in r, refined by bisection.
#[derive(Clone, Debug, Serialize)]
pub struct SignChangeBracket {
    pub functional: String,
    pub lo: f64,
    pub hi: f64,
    pub refined_root: f64,
    pub tol: f64,
}

/// Moments of MP(1,1)^r (or of its symmetrization when `symmetrized`).
///
/// The even symmetrized entry of order 2n equals the closed form at
/// exponent r·n; odd entries vanish.
pub fn moments_mp_power(r: f64, n: usize, symmetrized: bool) -> Result<MomentSequence> {
    if !(r > 0.0) {
        return Err(Error::InvalidParam("moments_mp_power needs r > 0".into()));
    }
    if n > 40 {
        return Err(Error::InvalidParam("moment order capped at 40".into()));
    }
    let values = (1..=n)
        .map(|k| {
            if symmetrized {
                if k % 2 == 1 {
                    0.0
                } else {
                    mp11_moment(r * (k / 2) as f64)
                }
            } else {
                mp11_moment(r * k as f64)
            }
        })
        .collect();
    Ok(MomentSequence { values, source: MomentSource::ClosedForm })
}

/// Generic forward moment-cumulant recursion.
///
/// Works over any field-like scalar; `Num` is implemented for f64, Dd and
/// BigRational.
pub trait Num: Clone {
    fn zero() -> Self;
    fn one() -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
}

impl Num for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
}

impl Num for Dd {
    fn zero() -> Self {
        Dd::ZERO
    }
    fn one() -> Self {
        Dd::ONE
    }
    fn add(&self, o: &Self) -> Self {
        *self + *o
    }
    fn sub(&self, o: &Self) -> Self {
        *self - *o
    }
    fn mul(&self, o: &Self) -> Self {
        *self * *o
    }
}

impl Num for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
}

/// Free cumulants K_1..K_N from moments m_1..m_N.
///
/// Solves m_n = Σ_{s=1}^n K_s C_{s, n-s} forward, where
/// C_{s,t} = Σ_{i_1+..+i_s = t} Π m_{i_j} with m_0 = 1.
pub fn moment_to_cumulant<T: Num>(m: &[T]) -> Vec<T> {
    let n = m.len();
    let mm = |i: usize| -> T {
        if i == 0 {
            T::one()
        } else {
            m[i - 1].clone()
        }
    };
    // comp[s][t] = C_{s,t}, built incrementally in s
    let mut comp: Vec<Vec<T>> = Vec::with_capacity(n + 1);
    comp.push((0..n).map(|t| if t == 0 { T::one() } else { T::zero() }).collect()); // s = 0
    for s in 1..=n {
        let mut row = Vec::with_capacity(n);
        for t in 0..n {
            let mut acc = T::zero();
            for j in 0..=t {
                acc = acc.add(&mm(j).mul(&comp[s - 1][t - j]));
            }
            row.push(acc);
        }
        comp.push(row);
    }
    let mut k: Vec<T> = Vec::with_capacity(n);
    for order in 1..=n {
        let mut acc = mm(order);
        for s in 1..order {
            acc = acc.sub(&k[s - 1].mul(&comp[s][order - s]));
        }
        k.push(acc);
    }
    k
}

/// Free cumulants in f64 (double-double internally).
pub fn free_cumulants(m: &MomentSequence) -> CumulantSequence {
    let md: Vec<Dd> = m.values.iter().map(|&v| Dd::from_f64(v)).collect();
    CumulantSequence {
        values: moment_to_cumulant(&md).into_iter().map(Dd::to_f64).collect(),
    }
}

/// Exact rational free cumulants.
pub fn free_cumulants_exact(m: &[BigRational]) -> Vec<BigRational> {
    moment_to_cumulant(m)
}

/// Catalan numbers C_1..C_n as exact rationals (moments of MP(1,1)).
pub fn catalan_moments_exact(n: usize) -> Vec<BigRational> {
    let mut c = BigInt::from(1); // C_0
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        // C_{k+1} = C_k · 2(2k+1)/(k+2)
        c = c * BigInt::from(2 * (2 * k + 1)) / BigInt::from(k + 2);
        out.push(BigRational::from_integer(c.clone()));
    }
    out
}

fn need(k: &CumulantSequence, n: usize) -> Result<()> {
    if k.values.len() < n {
        Err(Error::InsufficientLength { need: n, have: k.values.len() })
    } else {
        Ok(())
    }
}

fn det_dd(a: &mut Vec<Vec<Dd>>) -> (Dd, f64) {
    // Gaussian elimination with partial pivoting; the cancellation figure is
    // the Hadamard-style ratio of accumulated magnitudes to |det|.
    let n = a.len();
    let mut det = Dd::ONE;
    let mut mag = 1.0f64;
    for col in 0..n {
        let mut piv = col;
        for row in col + 1..n {
            if a[row][col].abs().to_f64() > a[piv][col].abs().to_f64() {
                piv = row;
            }
        }
        if a[piv][col].to_f64() == 0.0 {
            return (Dd::ZERO, f64::INFINITY);
        }
        if piv != col {
            a.swap(piv, col);
            det = -det;
        }
        det = det * a[col][col];
        mag *= a[col][col].abs().to_f64();
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for c2 in col..n {
                let sub = f * a[col][c2];
                a[row][c2] = a[row][c2] - sub;
            }
        }
    }
    let cancel = if det.to_f64() == 0.0 {
        f64::INFINITY
    } else {
        (mag / det.abs().to_f64()).max(1.0)
    };
    (det, cancel)
}

fn eval_functional_dd(k: &[Dd], id: Functional) -> (Dd, f64) {
    let kk = |i: usize| k[i - 1];
    match id {
        Functional::H22 => {
            let v = kk(4) * kk(2) - kk(3) * kk(3);
            let mag = (kk(4) * kk(2)).abs().to_f64() + (kk(3) * kk(3)).abs().to_f64();
            let c = if v.to_f64() == 0.0 { f64::INFINITY } else { mag / v.abs().to_f64() };
            (v, c.max(1.0))
        }
        Functional::K6 => (kk(6), 1.0),
        Functional::SymH => {
            let v = kk(2) * kk(6) - kk(4) * kk(4);
            let mag = (kk(2) * kk(6)).abs().to_f64() + (kk(4) * kk(4)).abs().to_f64();
            let c = if v.to_f64() == 0.0 { f64::INFINITY } else { mag / v.abs().to_f64() };
            (v, c.max(1.0))
        }
        Functional::SymDet4 => {
            let mut mat: Vec<Vec<Dd>> = (1..=4)
                .map(|i| (1..=4).map(|j| kk(2 * i + 2 * j - 2)).collect())
                .collect();
            det_dd(&mut mat)
        }
        Functional::Minor(kk_ord) => {
            let mut mat: Vec<Vec<Dd>> = (0..=kk_ord)
                .map(|i| (0..=kk_ord).map(|j| kk(i + j + 2)).collect())
                .collect();
            det_dd(&mut mat)
        }
    }
}

/// Evaluate a named Hankel functional on a cumulant sequence.
pub fn hankel_functional(k: &CumulantSequence, id: Functional) -> Result<f64> {
    need(k, id.order())?;
    let kd: Vec<Dd> = k.values.iter().map(|&v| Dd::from_f64(v)).collect();
    Ok(eval_functional_dd(&kd, id).0.to_f64())
}

/// Functional value at grid point r through the full pipeline.
fn pipeline_dd(id: Functional, r: f64, symmetrized: bool) -> Result<(Dd, f64)> {
    let m = moments_mp_power(r, id.order(), symmetrized)?;
    let md: Vec<Dd> = m.values.iter().map(|&v| Dd::from_f64(v)).collect();
    let k = moment_to_cumulant(&md);
    Ok(eval_functional_dd(&k, id))
}

/// Functional value with its cancellation report.
pub fn hankel_at(id: Functional, r: f64, symmetrized: bool) -> Result<HankelReport> {
    let (v, cancel) = pipeline_dd(id, r, symmetrized)?;
    Ok(HankelReport {
        functional: id.id(),
        r,
        value: v.to_f64(),
        cancellation: cancel,
    })
}

/// Grid scan of a functional over [r_lo, r_hi] with sign-change brackets
/// refined by bisection to width 1e-6.
pub fn scan_sign(
    id: Functional,
    r_lo: f64,
    r_hi: f64,
    step: f64,
    symmetrized: bool,
) -> Result<(Vec<(f64, f64)>, Vec<SignChangeBracket>)> {
    if !(r_lo > 0.0 && r_hi > r_lo) {
        return Err(Error::InvalidParam("need 0 < r_lo < r_hi".into()));
    }
    if !(step > 0.0 && step <= 0.01 + 1e-15) {
        return Err(Error::InvalidParam("step must be in (0, 0.01]".into()));
    }
    let n = ((r_hi - r_lo) / step).round() as usize;
    let mut curve = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let r = r_lo + i as f64 * step;
        let (v, _) = pipeline_dd(id, r, symmetrized)?;
        curve.push((r, v.to_f64()));
    }
    let mut brackets = Vec::new();
    for w in curve.windows(2) {
        let (r0, v0) = w[0];
        let (r1, v1) = w[1];
        if v0 == 0.0 || v0.is_nan() || v1.is_nan() {
            continue;
        }
        if v0 * v1 < 0.0 {
            let (mut lo, mut hi) = (r0, r1);
            let mut flo = v0;
            while hi - lo > 1e-6 {
                let mid = 0.5 * (lo + hi);
                let (vm, _) = pipeline_dd(id, mid, symmetrized)?;
                let vm = vm.to_f64();
                if vm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if flo * vm < 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                    flo = vm;
                }
            }
            brackets.push(SignChangeBracket {
                functional: id.id(),
                lo: r0,
                hi: r1,
                refined_root: 0.5 * (lo + hi),
                tol: 0.5 * (hi - lo).max(1e-6),
            });
        }
    }
    Ok((curve, brackets))
}

/// Hankel matrix (m_{i+j})_{0<=i,j<=floor(N/2)} eigenvalue floor, as a
/// multiple of the trace. A valid moment sequence stays above -1e-9.
pub fn hankel_psd_floor(m: &MomentSequence) -> f64 {
    let half = m.values.len() / 2;
    let dim = half + 1;
    let get = |i: usize| if i == 0 { 1.0 } else { m.values[i - 1] };
    let mut a: Vec<Vec<f64>> = (0..dim)
        .map(|i| (0..dim).map(|j| get(i + j)).collect())
        .collect();
    let trace: f64 = (0..dim).map(|i| a[i][i]).sum();
    // Jacobi eigenvalue iteration
    for _sweep in 0..60 {
        let mut off = 0.0;
        for i in 0..dim {
            for j in i + 1..dim {
                off += a[i][j] * a[i][j];
            }
        }
        if off < 1e-30 * trace * trace {
            break;
        }
        for i in 0..dim {
            for j in i + 1..dim {
                if a[i][j].abs() < 1e-300 {
                    continue;
                }
                let theta = 0.5 * (a[j][j] - a[i][i]) / a[i][j];
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..dim {
                    let aik = a[i][k];
                    let ajk = a[j][k];
                    a[i][k] = c * aik - s * ajk;
                    a[j][k] = s * aik + c * ajk;
                }
                for k in 0..dim {
                    let aki = a[k][i];
                    let akj = a[k][j];
                    a[k][i] = c * aki - s * akj;
                    a[k][j] = s * aki + c * akj;
                }
            }
        }
    }
    let min_eig = (0..dim).map(|i| a[i][i]).fold(f64::INFINITY, f64::min);
    min_eig / trace.max(1e-300)
}
