use freeprob::contour::{domain_scan, ScanBox};
use freeprob::cumulants::{scan_sign, Functional};
use freeprob::measures::{DistributionSpec, Kind};
use std::time::Instant;

fn main() {
    let t0 = Instant::now();
    let (_, br) = scan_sign(Functional::SymH, 0.9, 2.0, 0.005, true).unwrap();
    println!("sym_h brackets: {:?} [{:.2?}]", br.iter().map(|b| b.refined_root).collect::<Vec<_>>(), t0.elapsed());
    let t0 = Instant::now();
    let (curve, br) = scan_sign(Functional::SymDet4, 1.5, 2.0, 0.005, true).unwrap();
    println!("sym_det4 brackets: {:?} [{:.2?}]", br.iter().map(|b| b.refined_root).collect::<Vec<_>>(), t0.elapsed());
    let negs: Vec<f64> = curve.iter().filter(|(_, v)| *v < 0.0).map(|(r, _)| *r).collect();
    println!("sym_det4 negative on [{:.3}, {:.3}] ({} pts)", negs.first().unwrap_or(&f64::NAN), negs.last().unwrap_or(&f64::NAN), negs.len());
    let t0 = Instant::now();
    let (_, br) = scan_sign(Functional::K6, 0.3, 0.5, 0.005, false).unwrap();
    println!("k6 brackets: {:?} [{:.2?}]", br.iter().map(|b| b.refined_root).collect::<Vec<_>>(), t0.elapsed());

    // domain scan timing at full resolution
    let spec = DistributionSpec::new(Kind::Beta { p: 0.5, q: 1.501 }).unwrap()
        .with_power(1.5).unwrap().symmetrized().unwrap();
    let bbox = ScanBox { re_lo: -0.2, re_hi: 1.6, im_lo: -1.2, im_hi: 0.4 };
    let t0 = Instant::now();
    let grid = domain_scan(&spec, bbox, 400, 400).unwrap();
    println!("dom1 400x400: area={:.4} min_re={:.4} seed={:?} [{:.2?}]",
        grid.area_fraction, grid.min_re_component, grid.seed, t0.elapsed());
}
