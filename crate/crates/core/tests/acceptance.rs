//! Acceptance suite. Prints one PASS/FAIL line per criterion, followed by the
//! individual checks, and exits nonzero when a check fails that is not one of
//! the documented deviations in `KNOWN_DEVIATIONS`.

mod common;

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use common::{random_grid, random_structure};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use resforge::analysis::*;
use resforge::bragg::*;
use resforge::forward::{default_grid, DEFAULT_TOL};
use resforge::gradient::{compute_alpha, finite_difference_all, gradient_cells};
use resforge::optimizer::*;
use resforge::radial::*;
use resforge::specfun::{sph_bessel_j, sph_hankel1};
use resforge::*;

const SLAB_ROOT_TOL: f64 = 1e-10;
const IDENTITY_TOL: f64 = 1e-8;
const GRADIENT_TOL: f64 = 1e-6;
const FD_STEP: f64 = 1e-5;
const ALPHA_TOL: f64 = 1e-8;
const BANGBANG_TOL: f64 = 1e-3;
const BANGBANG_FRACTION: f64 = 0.99;
const ASYMMETRY_TOL: f64 = 1e-2;
const GAP_TOL: f64 = 1e-8;
const GAMMA_STEP: f64 = 0.01;
const QUARTER_WAVE_TOL: f64 = 0.1;
const RADIAL_TARGET_TOL: f64 = 0.05;
const WRONSKIAN_TOL: f64 = 1e-9;
const PARITY_TOL: f64 = 1e-6;
const PHASE_TOL: f64 = 0.05;
const CELLS: usize = 512;
const JMAX: usize = 9;

/// Checks expected to fail; each one is analysed in the project notes.
const KNOWN_DEVIATIONS: &[&str] = &["5d width strictly decreasing j=0->1", "7 center < 2 d_plus (odd j)"];

struct Check {
    name: String,
    pass: bool,
    detail: String,
}

struct Criterion {
    id: usize,
    title: &'static str,
    checks: Vec<Check>,
}

impl Criterion {
    fn new(id: usize, title: &'static str) -> Self {
        Self { id, title, checks: Vec::new() }
    }

    fn check(&mut self, name: impl Into<String>, pass: bool, detail: impl Into<String>) {
        self.checks.push(Check { name: name.into(), pass, detail: detail.into() });
    }

    fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Optimum and interface-refined profile for one `j`.
struct Optimum {
    j: usize,
    run: OptimizationRun,
    refined: Option<RefinedProfile>,
}

fn admissible() -> AdmissibleSet {
    AdmissibleSet::new(1.0, 1.0, 2.0, 40.0, false).unwrap()
}

fn resonances_in(s: &PiecewiseConstantStructure, rect: &SearchRect) -> ResonanceSet {
    let (nx, ny) = default_grid(s, rect);
    find_resonances(s, rect, nx, ny, DEFAULT_TOL).unwrap()
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn criterion_1() -> Criterion {
    let mut c = Criterion::new(1, "slab closed form");
    let s = PiecewiseConstantStructure::uniform(1.0, 1, 2.0).unwrap();
    let expect = slab_resonances(2.0, 0.5, &[1, 2, 3, 4, 5]).unwrap();
    let rect = SearchRect::new(0.5, 8.5, -1.0, -1e-6).unwrap();
    let set = resonances_in(&s, &rect);
    let err = set
        .pairs
        .iter()
        .zip(&expect)
        .map(|(p, e)| (p.omega - e).norm())
        .fold(0.0, f64::max);
    c.check(
        "roots m=1..5 match closed form",
        set.len() == 5 && err < SLAB_ROOT_TOL,
        format!("found {}, max error {err:.2e} (tol {SLAB_ROOT_TOL:e})", set.len()),
    );
    let count = count_zeros(&s, &rect, 64).unwrap();
    c.check("argument-principle count", count == 5, format!("count {count}, expected 5"));
    c
}

fn criterion_2(structures: &[PiecewiseConstantStructure]) -> Criterion {
    let mut c = Criterion::new(2, "variational identities");
    let rect = SearchRect::new(-10.0, 10.0, -4.0, -1e-6).unwrap();
    let per: Vec<(usize, f64, f64, bool)> = structures
        .par_iter()
        .map(|s| {
            let set = resonances_in(s, &rect);
            let complete = count_zeros(s, &rect, 256).is_ok_and(|n| n == set.len());
            let mut worst_id: f64 = 0.0;
            let mut worst_width: f64 = 0.0;
            for p in &set.pairs {
                let r = variational_residuals(p);
                worst_id = worst_id.max(r.re_residual).max(r.im_residual);
                if let Some(w) = r.width_identity_residual {
                    worst_width = worst_width.max(w);
                }
            }
            (set.len(), worst_id, worst_width, complete)
        })
        .collect();
    let total: usize = per.iter().map(|p| p.0).sum();
    let worst_id = per.iter().map(|p| p.1).fold(0.0, f64::max);
    let worst_width = per.iter().map(|p| p.2).fold(0.0, f64::max);
    let complete = per.iter().filter(|p| p.3).count();
    c.check(
        "real and imaginary identities",
        worst_id < IDENTITY_TOL,
        format!("{total} resonances on {} structures, worst {worst_id:.2e}", structures.len()),
    );
    c.check("width identity", worst_width < IDENTITY_TOL, format!("worst {worst_width:.2e}"));
    c.check(
        "search complete",
        complete == structures.len(),
        format!("{complete}/{} counts match", structures.len()),
    );
    c
}

fn criterion_3() -> Criterion {
    let mut c = Criterion::new(3, "adjoint gradient");
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let structures: Vec<_> = (0..10).map(|_| random_grid(&mut rng, 1.0, 16, 1.0, 2.0, false)).collect();
    let rect = SearchRect::new(0.3, 8.0, -2.0, -1e-6).unwrap();
    let errors: Vec<(usize, f64, f64)> = structures
        .par_iter()
        .map(|s| {
            let pairs: Vec<_> = resonances_in(s, &rect).pairs.into_iter().take(3).collect();
            let mut grad: f64 = 0.0;
            let mut alpha: f64 = 0.0;
            for p in &pairs {
                let g = gradient_cells(p).unwrap();
                let fd = finite_difference_all(s, p.omega, FD_STEP).unwrap();
                let scale = g.d_omega.iter().map(|z| z.norm()).fold(0.0, f64::max);
                for (a, b) in g.d_omega.iter().zip(&fd) {
                    grad = grad.max((a - b).norm() / scale);
                }
                let (a, b) = compute_alpha(p).unwrap();
                alpha = alpha.max((a - b).norm() / b.norm());
            }
            (pairs.len(), grad, alpha)
        })
        .collect();
    let pairs: usize = errors.iter().map(|e| e.0).sum();
    let grad = errors.iter().map(|e| e.1).fold(0.0, f64::max);
    let alpha = errors.iter().map(|e| e.2).fold(0.0, f64::max);
    c.check("three resonances per structure", pairs == 30, format!("{pairs} resonances"));
    c.check(
        "gradient vs central differences",
        grad < GRADIENT_TOL,
        format!("worst error relative to largest entry {grad:.2e}, h = {FD_STEP:e}"),
    );
    c.check("alpha forms agree", alpha < ALPHA_TOL, format!("worst {alpha:.2e}"));
    c
}

fn criterion_4(structures: &[PiecewiseConstantStructure], optima: &[Optimum]) -> Criterion {
    let mut c = Criterion::new(4, "width bounds");
    let cf = closed_form_width_bound(0.0, 2.0, 1.0).unwrap();
    let expect = 3.0 / (13.0 * std::f64::consts::E);
    c.check(
        "closed form at Re = 0",
        (cf - expect).abs() < 1e-15,
        format!("{cf:.8} vs 3/(13e) = {expect:.8}"),
    );
    let rect = SearchRect::new(-10.0, 10.0, -4.0, -1e-6).unwrap();
    let mut all: Vec<(f64, Complex64)> = structures
        .par_iter()
        .flat_map_iter(|s| resonances_in(s, &rect).pairs.into_iter().map(move |p| (s.n_max(), p.omega)))
        .collect();
    all.extend(optima.iter().map(|o| (o.run.structure.n_max(), o.run.omega())));
    let below = all
        .iter()
        .filter(|(n, w)| w.im.abs() < lower_bound_width(w.re, *n, 1.0))
        .count();
    c.check("bound holds", below == 0, format!("{below} of {} resonances below the bound", all.len()));

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut symmetric: Vec<_> = (0..20).map(|i| random_grid(&mut rng, 1.0, 8 + 2 * (i % 4), 1.0, 2.0, true)).collect();
    symmetric.extend(optima.iter().map(|o| o.run.structure.clone()));
    let near = SearchRect::new(-1.0, 1.0, -1.0, -1e-6).unwrap();
    let hits: Vec<Complex64> = symmetric
        .par_iter()
        .flat_map_iter(|s| {
            let n = s.n_max();
            let set = find_resonances(s, &near, 12, 12, DEFAULT_TOL).unwrap();
            set.pairs.into_iter().map(|p| p.omega).filter(move |w| in_exclusion_triangle(*w, n, 1.0))
        })
        .collect();
    c.check(
        "triangle empty for symmetric structures",
        hits.is_empty(),
        format!("{} structures, {} resonances inside", symmetric.len(), hits.len()),
    );
    c
}

fn criterion_5(optima: &[Optimum]) -> Criterion {
    let mut c = Criterion::new(5, "width optimization j=0..9");
    let a = admissible();
    let metrics: Vec<BangBangMetrics> = optima
        .iter()
        .map(|o| bangbang_metrics(&o.run.structure, &a, BANGBANG_TOL))
        .collect();
    let min_fraction = metrics.iter().map(|m| m.fraction_at_bounds).fold(1.0, f64::min);
    c.check(
        "5a bang-bang fraction",
        min_fraction > BANGBANG_FRACTION,
        format!("min {min_fraction:.4} (> {BANGBANG_FRACTION})"),
    );
    let asym = metrics.iter().map(|m| m.asymmetry).fold(0.0, f64::max);
    c.check("5b asymmetry", asym < ASYMMETRY_TOL, format!("max {asym:.2e}"));
    let off: Vec<usize> = optima
        .iter()
        .filter(|o| {
            let s = &o.run.structure;
            [0.0, 0.5 - 1e-9, 0.5 + 1e-9, 1.0].iter().any(|&x| s.n_at(x) != a.n_plus)
        })
        .map(|o| o.j)
        .collect();
    c.check("5c n_plus at 0, L/2, L", off.is_empty(), format!("failing j: {off:?}"));

    let widths: Vec<f64> = optima.iter().map(|o| o.run.width()).collect();
    let res: Vec<f64> = optima.iter().map(|o| o.run.omega().re).collect();
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.6}")).collect::<Vec<_>>().join(" ");
    c.check(
        "5d width strictly decreasing j=0->1",
        widths[1] < widths[0] * (1.0 - 1e-9),
        format!("|Im| j=0 {:.12}, j=1 {:.12}", widths[0], widths[1]),
    );
    c.check(
        "5d width strictly decreasing j=1..9",
        strictly_decreasing(&widths[1..]),
        format!("|Im|: {}", fmt(&widths)),
    );
    let neg: Vec<f64> = res.iter().map(|r| -r).collect();
    c.check("5d Re strictly increasing", strictly_decreasing(&neg), format!("Re: {}", fmt(&res)));
    let n4 = extract_transitions(&optima[4].run.structure, &a, None).map(|t| t.count());
    c.check("5e j=4 has N=9", matches!(n4, Ok(9)), format!("N = {n4:?}"));
    c
}

fn criterion_6(optima: &[Optimum]) -> Criterion {
    let mut c = Criterion::new(6, "transmission");
    const SAMPLES: usize = 8000;
    // j = 0 has Re omega = 0; its value is the limit omega -> 0+
    let at_center: Vec<f64> = optima
        .iter()
        .map(|o| transmission(&o.run.structure, o.run.omega().re.max(1e-8)).unwrap().0.norm())
        .collect();
    let band_min: Vec<f64> = optima[1..]
        .par_iter()
        .map(|o| {
            let top = 2.0 * o.run.omega().re;
            (1..=SAMPLES)
                .map(|i| transmission(&o.run.structure, top * i as f64 / SAMPLES as f64).unwrap().0.norm())
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(" ");
    let low = at_center.iter().cloned().fold(1.0, f64::min);
    c.check("|t(Re omega)| >= 0.9", low >= 0.9, format!("j=0..9: {}", fmt(&at_center)));
    let high = at_center[5..].iter().cloned().fold(1.0, f64::min);
    c.check("|t(Re omega)| >= 0.99 for j >= 5", high >= 0.99, format!("min {high:.6}"));
    c.check(
        "band minimum decreasing",
        strictly_decreasing(&band_min),
        format!("min |t| on [0, 2 Re omega], j=1..9: {}", fmt(&band_min)),
    );
    c
}

fn criterion_7(optima: &[Optimum]) -> Criterion {
    let mut c = Criterion::new(7, "Bragg structures");
    let m = LayeredMedium::bragg(1.0, 2.0, 1.0).unwrap();
    let g = first_gap_edges(&m).unwrap();
    let (ce, we) = (3.0 * PI / 4.0, 3.0 * (1.0f64 / 3.0).asin());
    c.check(
        "gap center and width",
        (g.center - ce).abs() < GAP_TOL && (g.width - we).abs() < GAP_TOL,
        format!("center err {:.1e}, width err {:.1e}", (g.center - ce).abs(), (g.width - we).abs()),
    );
    let grid = gamma_grid(GAMMA_STEP, GAMMA_STEP, 1.99).unwrap();
    let scan = scan_gamma(1.0, 2.0, 1.0, &grid).unwrap();
    let best = scan.argmax_ratio.unwrap();
    c.check(
        "R(gamma) argmax at 1",
        (best - 1.0).abs() <= GAMMA_STEP + 1e-12,
        format!("argmax {best:.2}, grid step {GAMMA_STEP}"),
    );

    let a = admissible();
    let cmp: Vec<(usize, BraggComparison)> = optima
        .iter()
        .filter_map(|o| {
            let r = o.refined.as_ref()?;
            Some((o.j, compare_profile(&r.pair, &r.transitions, a.n_plus, a.n_minus).unwrap()))
        })
        .collect();
    let dev = |j: usize| cmp.iter().find(|(k, _)| *k == j).map(|(_, b)| b.max_deviation);
    let (d9, d2) = (dev(9).unwrap_or(f64::NAN), dev(2).unwrap_or(f64::NAN));
    c.check(
        "j=9 non-center widths within 10% of quarter wave",
        d9 < QUARTER_WAVE_TOL,
        format!("max deviation {d9:.4}"),
    );
    c.check("deviation shrinks from j=2 to j=9", d9 < d2, format!("j=2 {d2:.4}, j=9 {d9:.4}"));
    let ratio = |b: &BraggComparison| b.center_width.map_or(f64::NAN, |w| w / b.center_bound);
    let ratios = |odd: bool| {
        cmp.iter()
            .filter(|(j, _)| (j % 2 == 1) == odd)
            .map(|(j, b)| (format!("j={j}: {:.3}", ratio(b)), b.center_within_bound() == Some(true)))
            .collect::<Vec<_>>()
    };
    for (odd, name) in [(false, "7 center < 2 d_plus (even j)"), (true, "7 center < 2 d_plus (odd j)")] {
        let r = ratios(odd);
        let detail = r.iter().map(|(s, _)| s.as_str()).collect::<Vec<_>>().join(", ");
        c.check(name, r.iter().all(|(_, ok)| *ok), format!("center / 2 d_plus: {detail}"));
    }
    c
}

fn lowest(c: &RadialCavity) -> RadialResonance {
    let rect = SearchRect::new(0.05, 12.0, -1.5, -1e-9).unwrap();
    find_radial_resonances(c, &rect, 24, 6).unwrap()[0]
}

fn criterion_8() -> Criterion {
    let mut c = Criterion::new(8, "radial cavities");
    let cavity = |dim: u8, ell: u32| RadialCavity::new(dim, 2.0, 1.0, ell).unwrap();
    let l6 = lowest(&cavity(2, 6)).omega;
    let target = Complex64::new(4.2, -0.033);
    c.check(
        "2D ell=6 lowest resonance",
        (l6 - target).norm() < RADIAL_TARGET_TOL,
        format!("{:.6}{:+.6}i, distance {:.4}", l6.re, l6.im, (l6 - target).norm()),
    );

    let mut details = Vec::new();
    let mut monotone = true;
    for ell in 0..=3u32 {
        let cav = cavity(3, ell);
        let dist: Vec<f64> = (0..=24)
            .map_while(|j| {
                let r = asymptotic_branch(&cav, j).ok()?;
                Some((r.omega - asymptotic_resonance(&cav, j).ok()?).norm())
            })
            .collect();
        // the order-zero asymptotic formula is exact
        let ok = if ell == 0 {
            dist.iter().all(|d| *d < 1e-10)
        } else {
            dist.len() >= 15 && strictly_decreasing(&dist)
        };
        monotone &= ok;
        details.push(format!("ell={ell}: {} roots, last {:.1e}", dist.len(), dist.last().unwrap_or(&f64::NAN)));
    }
    c.check("3D roots approach asymptotics", monotone, details.join("; "));

    for dim in [2u8, 3] {
        let widths: Vec<f64> = (0..=9).map(|ell| lowest(&cavity(dim, ell)).omega.im.abs()).collect();
        c.check(
            format!("{dim}D |Im| decreasing in ell=0..9"),
            strictly_decreasing(&widths),
            widths.iter().map(|w| format!("{w:.4}")).collect::<Vec<_>>().join(" "),
        );
    }

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    for _ in 0..2000 {
        let ell = rng.gen_range(0..=30u32);
        let z = loop {
            let z = Complex64::from_polar(rng.gen_range(0.05..100.0), rng.gen_range(-PI..PI));
            if (-5.0..=40.0).contains(&z.im) {
                break z;
            }
        };
        let j = sph_bessel_j(ell, z).unwrap();
        let h = sph_hankel1(ell, z).unwrap();
        let expect = Complex64::i() / (z * z);
        let scale = (j.value * h.derivative).norm().max((j.derivative * h.value).norm()).max(expect.norm());
        worst = worst.max((j.value * h.derivative - j.derivative * h.value - expect).norm() / scale);
    }
    c.check("spherical Wronskian", worst < WRONSKIAN_TOL, format!("2000 samples, worst {worst:.2e}"));
    c
}

fn criterion_9(optima: &[Optimum]) -> Criterion {
    let mut c = Criterion::new(9, "structure of optimal modes");
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut modes: Vec<Mode> = optima.iter().map(|o| o.run.pair.mode.clone()).collect();
    let rect = SearchRect::new(-10.0, 10.0, -3.0, -1e-6).unwrap();
    for _ in 0..10 {
        let s = random_grid(&mut rng, 1.0, 10, 1.0, 2.0, true);
        modes.extend(resonances_in(&s, &rect).pairs.into_iter().map(|p| p.mode));
    }
    let worst = modes
        .iter()
        .map(|m| {
            let (even, odd) = parity_scores(m).unwrap();
            even.min(odd)
        })
        .fold(0.0, f64::max);
    c.check(
        "parity of symmetric-structure modes",
        worst < PARITY_TOL,
        format!("{} modes, worst score {worst:.2e}", modes.len()),
    );

    let bad: Vec<usize> = optima
        .iter()
        .filter(|o| o.run.omega().re > 0.0 && !phase_monotonicity(&o.run.pair.mode).unwrap().holds())
        .map(|o| o.j)
        .collect();
    c.check("phase monotone on each half (j=1..9)", bad.is_empty(), format!("failing j: {bad:?}"));

    let mut counted = 0;
    let mut violated = Vec::new();
    for o in optima {
        let Some(r) = &o.refined else { continue };
        for b in interval_bounds(&r.pair, &r.transitions).unwrap() {
            counted += 1;
            if !b.holds() {
                violated.push((o.j, b.index));
            }
        }
    }
    c.check(
        "interior interval bounds",
        counted > 0 && violated.is_empty(),
        format!("{counted} intervals, violations {violated:?}"),
    );

    let r9 = optima[JMAX].refined.as_ref().expect("j=9 refinement");
    let worst = r9
        .transitions
        .intervals
        .iter()
        .filter(|iv| iv.class != IntervalClass::Center)
        .map(|iv| (phase_change(&r9.pair.mode, iv.x_lo, iv.x_hi).unwrap().abs() - PI / 2.0).abs())
        .fold(0.0, f64::max);
    c.check(
        "phase change pi/2 per non-center interval at j=9",
        worst < PHASE_TOL,
        format!("worst deviation {worst:.4} rad over {} intervals", r9.transitions.count() - 1),
    );
    c
}

fn main() -> ExitCode {
    let start = Instant::now();
    let mut criteria = vec![criterion_1()];

    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let structures: Vec<_> = (0..50).map(|i| random_structure(&mut rng, 1.0, 2 + i % 7, 1.0, 2.0)).collect();
    criteria.push(criterion_2(&structures));
    criteria.push(criterion_3());

    let a = admissible();
    let mut optima: Vec<Optimum> = (0..=JMAX)
        .into_par_iter()
        .map(|j| {
            let run = optimize_width(&OptimizeConfig::new(a, CELLS, Target::Mode(j))).unwrap();
            let refined = if j == 0 { None } else { refine_interfaces(&run.structure, &a, run.omega(), 200).ok() };
            Optimum { j, run, refined }
        })
        .collect();
    optima.sort_by_key(|o| o.j);
    let optimized = start.elapsed();

    criteria.push(criterion_4(&structures, &optima));
    criteria.push(criterion_5(&optima));
    criteria.push(criterion_6(&optima));
    criteria.push(criterion_7(&optima));
    criteria.push(criterion_8());
    criteria.push(criterion_9(&optima));

    let mut unexpected = Vec::new();
    for c in &criteria {
        println!("{} criterion {}: {}", if c.passed() { "PASS" } else { "FAIL" }, c.id, c.title);
        for k in &c.checks {
            let known = !k.pass && KNOWN_DEVIATIONS.contains(&k.name.as_str());
            let tag = match (k.pass, known) {
                (true, _) => "ok",
                (false, true) => "known deviation",
                (false, false) => "FAILED",
            };
            println!("    [{tag}] {}: {}", k.name, k.detail);
            if !k.pass && !known {
                unexpected.push(format!("{}: {}", c.id, k.name));
            }
        }
    }
    println!(
        "{} of {} criteria pass; optimization {:.1} s, total {:.1} s",
        criteria.iter().filter(|c| c.passed()).count(),
        criteria.len(),
        optimized.as_secs_f64(),
        start.elapsed().as_secs_f64()
    );
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("unexpected failures: {unexpected:?}");
        ExitCode::FAILURE
    }
}
