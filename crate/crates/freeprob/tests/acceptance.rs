//! Acceptance suite: one test per criterion, each printing a pass line.
//!
//! Run with `cargo test -p freeprob --test acceptance -- --nocapture`.

use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};

use freeprob::cauchy::{g_inverse_closed, CauchyEvaluator, Side};
use freeprob::contour::{
    domain_scan, lemma_pdf0_probe, probe_points, ui_check, ui_s_check, CaseId, Pdf0Verdict,
    ScanBox, UiParams,
};
use freeprob::cumulants::{
    catalan_moments_exact, free_cumulants_exact, moments_mp_power, scan_sign, Functional,
};
use freeprob::measures::{mp11_moment, DistributionSpec, Kind};
use freeprob::quad;

fn semicircle(mean: f64, variance: f64) -> DistributionSpec {
    DistributionSpec::new(Kind::Semicircle { mean, variance }).unwrap()
}

fn mp(p: f64, theta: f64) -> DistributionSpec {
    DistributionSpec::new(Kind::FreePoisson { p, theta }).unwrap()
}

fn beta(p: f64, q: f64) -> DistributionSpec {
    DistributionSpec::new(Kind::Beta { p, q }).unwrap()
}

fn b_half() -> DistributionSpec {
    DistributionSpec::new(Kind::sub_hcm(0.5, vec![(1.0, 1.0)]).unwrap()).unwrap()
}

fn report(n: u32, what: &str, elapsed: Duration, budget: Duration) {
    assert!(
        elapsed <= budget,
        "criterion {n} exceeded its runtime budget: {elapsed:.2?} > {budget:.2?}"
    );
    println!("ACCEPTANCE {n}: {what} .. PASS ({elapsed:.2?})");
}

#[test]
fn criterion_01_closed_form_inverse_anchors() {
    let t0 = Instant::now();
    for spec in [semicircle(0.4, 2.25), mp(2.0, 0.5)] {
        let ev = CauchyEvaluator::new(&spec).unwrap();
        let ws: Vec<Complex64> = probe_points(0.05, 20, -std::f64::consts::PI, 0.0);
        for w in ws {
            let z = g_inverse_closed(&spec, w).unwrap();
            let side = if z.im < 0.0 { Side::Minus } else { Side::Plus };
            let g = ev.g_continued(z, side).unwrap();
            assert!(
                (g - w).norm() < 1e-10,
                "round trip failed for {:?} at w = {w}: got {g}",
                spec.kind
            );
        }
    }
    report(1, "closed-form inverse round trips < 1e-10", t0.elapsed(), Duration::from_secs(1));
}

#[test]
fn criterion_02_moment_formula_vs_quadrature() {
    let t0 = Instant::now();
    for r in [0.5, 1.0, 2.0] {
        let spec = mp(1.0, 1.0).with_power(r).unwrap();
        let hi = 4.0f64.powf(r);
        for n in 1..=6u32 {
            let closed = mp11_moment(r * n as f64);
            let quadr: f64 = quad::tanh_sinh(
                |x| x.powi(n as i32) * spec.density(x).unwrap_or(0.0),
                0.0,
                hi,
                1e-13,
            )
            .unwrap();
            let tol = 1e-8 * closed.abs().max(1.0);
            assert!(
                (closed - quadr).abs() < tol,
                "r = {r}, n = {n}: closed {closed} vs quadrature {quadr}"
            );
        }
    }
    // r = 1 gives Catalan numbers exactly in rational arithmetic
    let exact = catalan_moments_exact(6);
    let catalan = [1i64, 2, 5, 14, 42, 132];
    for (v, c) in exact.iter().zip(catalan) {
        assert_eq!(*v, BigRational::from_integer(BigInt::from(c)));
    }
    report(2, "moment formula matches quadrature (1e-8) and Catalan exactly", t0.elapsed(), Duration::from_secs(10));
}

// --- brute-force non-crossing partition oracle -----------------------------

/// All non-crossing partitions of {0..n-1}: the first element's block is
/// chosen, splitting the rest into independent gaps.
fn nc_partitions(elems: &[usize]) -> Vec<Vec<Vec<usize>>> {
    if elems.is_empty() {
        return vec![Vec::new()];
    }
    let first = elems[0];
    let rest = &elems[1..];
    let m = rest.len();
    let mut out = Vec::new();
    for mask in 0..(1u32 << m) {
        let block: Vec<usize> = std::iter::once(first)
            .chain((0..m).filter(|i| mask >> i & 1 == 1).map(|i| rest[i]))
            .collect();
        // gaps between consecutive chosen elements must close among themselves
        let mut gaps: Vec<Vec<usize>> = Vec::new();
        let mut gap: Vec<usize> = Vec::new();
        for (i, &e) in rest.iter().enumerate() {
            if mask >> i & 1 == 1 {
                gaps.push(std::mem::take(&mut gap));
            } else {
                gap.push(e);
            }
        }
        gaps.push(gap);
        // cartesian product of the gap partitions
        let mut combos: Vec<Vec<Vec<usize>>> = vec![vec![block.clone()]];
        for g in gaps {
            let parts = nc_partitions(&g);
            let mut next = Vec::new();
            for base in &combos {
                for p in &parts {
                    let mut merged = base.clone();
                    merged.extend(p.iter().cloned());
                    next.push(merged);
                }
            }
            combos = next;
        }
        out.extend(combos);
    }
    out
}

fn kappa_oracle(m: &[BigRational]) -> Vec<BigRational> {
    let n = m.len();
    let mut kappa: Vec<BigRational> = Vec::with_capacity(n);
    for order in 1..=n {
        let elems: Vec<usize> = (0..order).collect();
        let mut acc = m[order - 1].clone();
        for part in nc_partitions(&elems) {
            if part.len() <= 1 {
                continue; // skip the one-block partition
            }
            let mut prod: BigRational = One::one();
            for block in &part {
                prod *= kappa[block.len() - 1].clone();
            }
            acc -= prod;
        }
        kappa.push(acc);
    }
    kappa
}

struct SplitMix64(u64);

impl SplitMix64 {
    fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }
}

#[test]
fn criterion_03_cumulant_oracle() {
    let t0 = Instant::now();
    // sanity: Catalan counts of the enumerator
    assert_eq!(nc_partitions(&[0, 1, 2, 3]).len(), 14);
    assert_eq!(nc_partitions(&(0..8).collect::<Vec<_>>()).len(), 1430);
    let mut rng = SplitMix64(0x5eed_f00d_2024_0809);
    for case in 0..100 {
        let n = 1 + (rng.next() % 8) as usize;
        let m: Vec<BigRational> = (0..n)
            .map(|_| {
                let num = (rng.next() % 19) as i64 - 9;
                let den = 1 + (rng.next() % 9) as i64;
                BigRational::new(BigInt::from(num), BigInt::from(den))
            })
            .collect();
        let fast = free_cumulants_exact(&m);
        let slow = kappa_oracle(&m);
        assert_eq!(fast, slow, "case {case} with moments {m:?}");
    }
    report(3, "recursion equals the non-crossing partition oracle on 100 rational sequences", t0.elapsed(), Duration::from_secs(60));
}

#[test]
fn criterion_04_fig50_h22() {
    let t0 = Instant::now();
    let (curve, brackets) = scan_sign(Functional::H22, 0.2, 1.5, 0.005, false).unwrap();
    // the first root (left endpoint of the negative interval) sits at 0.35 ± 0.02
    assert!(!brackets.is_empty());
    let left = brackets[0].refined_root;
    assert!((left - 0.35).abs() <= 0.02, "left endpoint {left}");
    // negative from there up to r = 1
    for (r, v) in &curve {
        if *r > left + 0.005 && *r < 0.995 {
            assert!(*v < 0.0, "h22({r}) = {v} should be negative");
        }
    }
    // h22(1) = 0: exact in rational arithmetic, tiny in floating point
    let k = free_cumulants_exact(&catalan_moments_exact(4));
    let h22_exact = k[3].clone() * k[1].clone() - k[2].clone() * k[2].clone();
    assert!(h22_exact.is_zero());
    let at_one = curve
        .iter()
        .find(|(r, _)| (*r - 1.0).abs() < 1e-9)
        .map(|(_, v)| *v)
        .unwrap();
    assert!(at_one.abs() < 1e-12, "h22(1) = {at_one}");
    report(4, "h22 negative on (0.35 +- 0.02, 1) with h22(1) = 0", t0.elapsed(), Duration::from_secs(30));
}

#[test]
fn criterion_05_fig60_k6() {
    let t0 = Instant::now();
    let (curve, brackets) = scan_sign(Functional::K6, 0.3, 0.5, 0.005, false).unwrap();
    assert_eq!(brackets.len(), 2, "{brackets:?}");
    let (lo, hi) = (brackets[0].refined_root, brackets[1].refined_root);
    assert!((lo - 0.335).abs() <= 0.02, "left root {lo}");
    assert!((hi - 0.42).abs() <= 0.02, "right root {hi}");
    // negative exactly between the two roots
    for (r, v) in &curve {
        let inside = *r > lo + 0.005 && *r < hi - 0.005;
        let outside = *r < lo - 0.005 || *r > hi + 0.005;
        if inside {
            assert!(*v < 0.0, "K6({r}) = {v}");
        }
        if outside {
            assert!(*v > 0.0, "K6({r}) = {v}");
        }
    }
    report(5, "K6 negative exactly on (0.335, 0.42) +- 0.02", t0.elapsed(), Duration::from_secs(30));
}

#[test]
fn criterion_06_figs100_200_symmetrized() {
    let t0 = Instant::now();
    let (_, brackets) = scan_sign(Functional::SymH, 0.9, 2.0, 0.005, true).unwrap();
    assert_eq!(brackets.len(), 2, "{brackets:?}");
    assert!((brackets[0].refined_root - 1.0).abs() <= 0.05, "{}", brackets[0].refined_root);
    assert!((brackets[1].refined_root - 1.8).abs() <= 0.05, "{}", brackets[1].refined_root);
    let (curve, brackets) = scan_sign(Functional::SymDet4, 1.5, 2.0, 0.005, true).unwrap();
    assert_eq!(brackets.len(), 2, "{brackets:?}");
    assert!((brackets[0].refined_root - 1.68).abs() <= 0.03, "{}", brackets[0].refined_root);
    assert!((brackets[1].refined_root - 1.94).abs() <= 0.03, "{}", brackets[1].refined_root);
    for (r, v) in &curve {
        if *r > brackets[0].refined_root + 0.005 && *r < brackets[1].refined_root - 0.005 {
            assert!(*v < 0.0, "det4({r}) = {v}");
        }
    }
    report(6, "sym_h negative on ~(1, 1.8); sym_det4 negative on ~(1.68, 1.94)", t0.elapsed(), Duration::from_secs(60));
}

#[test]
fn criterion_07_ui_winding_suite() {
    let t0 = Instant::now();
    let cases: Vec<(&str, DistributionSpec, CaseId)> = vec![
        ("sub-HCM b_1/2 ^ +2", b_half().with_power(2.0).unwrap(), CaseId::Lemma4),
        ("sub-HCM b_1/2 ^ -2", b_half().with_power(-2.0).unwrap(), CaseId::Lemma4),
        ("Beta(1/2,3/2) ^ 2", beta(0.5, 1.5).with_power(2.0).unwrap(), CaseId::BetaPower),
        ("MP(2,1) ^ 2", mp(2.0, 1.0).with_power(2.0).unwrap(), CaseId::MpA),
        ("MP(2,1) ^ -2", mp(2.0, 1.0).with_power(-2.0).unwrap(), CaseId::MpC),
        ("MP(2,1) ^ -1/2", mp(2.0, 1.0).with_power(-0.5).unwrap(), CaseId::MpD),
        ("MP(1/4,1) ^ 2", mp(0.25, 1.0).with_power(2.0).unwrap(), CaseId::MpB),
    ];
    for (name, spec, case) in &cases {
        let base = UiParams::default();
        let rep = ui_check(spec, *case, &base).unwrap();
        assert_eq!(rep.winding.len(), 200);
        assert!(rep.winding.iter().all(|&w| w == 1), "{name}: windings {:?}", rep.winding);
        assert!(rep.sign_checks.iter().all(|s| s.pass), "{name}: {:?}", rep.sign_checks);
        assert!(rep.hypothesis_ok, "{name}: {:?}", rep.hypothesis_notes);
        // verdict stability under (eta, delta) -> (2 eta, delta / 2)
        let swept = UiParams {
            eta: Some(2.0 * rep.eta),
            delta: Some(0.5 * rep.delta),
            ..base
        };
        let rep2 = ui_check(spec, *case, &swept).unwrap();
        assert_eq!(rep.all_pass, rep2.all_pass, "{name}: verdict changed under sweep");
        assert!(rep2.winding.iter().all(|&w| w == 1), "{name} (swept)");
    }
    report(7, "UI winding certificates for all seven cases, stable under (2eta, delta/2)", t0.elapsed(), Duration::from_secs(300));
}

#[test]
fn criterion_08_ui_s_suite() {
    let t0 = Instant::now();
    for r in [2.0, 3.0] {
        let spec = beta(0.5, 1.5).with_power(r).unwrap().symmetrized().unwrap();
        let rep = ui_s_check(&spec, &UiParams::default()).unwrap();
        assert!(rep.all_pass, "r = {r}: {:?} {:?}", rep.winding, rep.sign_checks);
        assert_eq!(rep.unimodal, Some(true));
        assert!(rep.hypothesis_ok);
    }
    // density vanishing at 0 forces the not-FID verdict
    let rep = lemma_pdf0_probe(&beta(3.0, 2.0).symmetrized().unwrap()).unwrap();
    assert_eq!(rep.verdict, Pdf0Verdict::NotFidConsistent);
    // a p > r > 0 power: density exponent ps - 1 > 0, same verdict
    let spec = beta(0.5, 1.5).with_power(0.25).unwrap().symmetrized().unwrap();
    let rep = lemma_pdf0_probe(&spec).unwrap();
    assert_eq!(rep.verdict, Pdf0Verdict::NotFidConsistent);
    // the boundary case r = p = 1/2 is the semicircle law: FID, so the
    // probe must stay inconclusive there
    let spec = beta(0.5, 1.5).with_power(0.5).unwrap().symmetrized().unwrap();
    let rep = lemma_pdf0_probe(&spec).unwrap();
    assert_eq!(rep.verdict, Pdf0Verdict::Inconclusive);
    report(8, "UI_s certificates for sym Beta(1/2,3/2)^{2,3}; pdf0 probe verdicts", t0.elapsed(), Duration::from_secs(180));
}

#[test]
fn criterion_09_boundary_exactness() {
    let t0 = Instant::now();
    let spec = mp(2.0, 1.0).with_power(2.0).unwrap();
    let ev = CauchyEvaluator::new(&spec).unwrap();
    let bd = ev.branched().unwrap();
    let (a, b) = spec.support().intervals[0];
    for i in 1..=50 {
        let x = a * i as f64 / 51.0;
        let f = bd.boundary(x, Side::Minus).unwrap();
        assert!(f.re.abs() < 1e-14, "Re f({x} - i0) = {}", f.re);
    }
    for i in 1..=50 {
        let x = b * (1.0 + i as f64);
        let f = bd.boundary(x, Side::Minus).unwrap();
        assert!(f.re.abs() < 1e-14, "Re f({x} - i0) = {}", f.re);
    }
    report(9, "|Re f(x-i0)| < 1e-14 on 50 points of (0,a) and (b,inf)", t0.elapsed(), Duration::from_secs(30));
}

#[test]
fn criterion_10_domain_scans() {
    let bbox = ScanBox { re_lo: -0.2, re_hi: 1.6, im_lo: -1.2, im_hi: 0.4 };
    let doms: Vec<(&str, DistributionSpec)> = vec![
        ("dom1 Beta(1/2,1.501)^1.5", beta(0.5, 1.501).with_power(1.5).unwrap()),
        ("dom2 Beta(1/2,2)^1.5", beta(0.5, 2.0).with_power(1.5).unwrap()),
        ("dom3 Beta(1/3,1.8)^4", beta(1.0 / 3.0, 1.8).with_power(4.0).unwrap()),
        ("dom4 Beta(1/3,2.4)^4", beta(1.0 / 3.0, 2.4).with_power(4.0).unwrap()),
    ];
    for (name, spec) in doms {
        let spec = spec.symmetrized().unwrap();
        let t0 = Instant::now();
        let grid = domain_scan(&spec, bbox, 400, 400).unwrap();
        let elapsed = t0.elapsed();
        assert!(elapsed < Duration::from_secs(120), "{name} took {elapsed:.2?}");
        assert!(grid.area_fraction > 0.0, "{name}: empty component");
        // observational, never asserted: report the min-Re statistic
        println!(
            "  {name}: area fraction {:.4}, min Re over component {:+.5} ({elapsed:.2?})",
            grid.area_fraction, grid.min_re_component
        );
    }
    report(10, "dom1-dom4 scans at 400x400 complete under budget", Duration::from_secs(0), Duration::from_secs(1));
}
