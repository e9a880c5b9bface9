//! Twin runs: a flow and its affine image, stepped on one time grid.

use serde::Serialize;

use crate::affine::AffineMap;
use crate::crystalline::{CrystallineLaw, CrystallinePolygon};
use crate::driver::{self, Controls, FlowEvent, FlowLaw, FlowTrace};
use crate::error::{Error, Result};
use crate::geom::diameter;
use crate::harness::metric::{hausdorff, Outline};
use crate::harness::scenario::{FlowKind, Geometry, Scenario};
use crate::smooth::{PowerLaw, SmoothCurve, WeightedLaw};

/// Equivariance defect at one sample time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DefectRow {
    pub t: f64,
    pub defect: f64,
    pub defect_normalized: f64,
}

/// Defects of `A(C(t))` against the twin run `C_A(t)`.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct EquivarianceReport {
    pub rows: Vec<DefectRow>,
    /// Twin runs whose events disagree; reported rather than raised.
    pub mismatches: Vec<String>,
    pub dt: f64,
    pub points: Option<usize>,
}

impl EquivarianceReport {
    pub fn max_normalized(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.defect_normalized)
            .fold(0.0f64, f64::max)
    }

    pub fn max_defect(&self) -> f64 {
        self.rows.iter().map(|r| r.defect).fold(0.0f64, f64::max)
    }
}

/// Pairs events of the two runs by kind within `window`.
fn compare_events(a: &[FlowEvent], b: &[FlowEvent], window: f64) -> Vec<String> {
    let mut used = vec![false; b.len()];
    let mut out = Vec::new();
    for e in a {
        let hit = b
            .iter()
            .enumerate()
            .find(|(j, f)| !used[*j] && f.kind == e.kind && (f.t - e.t).abs() <= window);
        match hit {
            Some((j, _)) => used[j] = true,
            None => out.push(format!("{} at t = {:e} in the original run has no twin", e.kind, e.t)),
        }
    }
    for (j, f) in b.iter().enumerate() {
        if !used[j] {
            out.push(format!("{} at t = {:e} in the mapped run has no twin", f.kind, f.t));
        }
    }
    out
}

/// Steps `law_a` from `a0` and `law_b` from `b0` with identical time steps and
/// measures `hausdorff(map(C_a(t)), C_b(t))` at every sample time.
pub fn twin_run<L>(
    law_a: &L,
    a0: L::State,
    law_b: &L,
    b0: L::State,
    map: &AffineMap,
    t_end: f64,
    controls: &Controls,
) -> Result<EquivarianceReport>
where
    L: FlowLaw,
    L::State: Outline,
{
    controls.check()?;
    let mut report = EquivarianceReport {
        dt: controls.dt,
        ..Default::default()
    };
    let (mut a, mut b) = (a0, b0);
    let (mut ev_a, mut ev_b) = (Vec::new(), Vec::new());
    let mut t = 0.0;
    let targets = controls.targets(t_end);
    let mut next = 0;
    let mut steps = 0usize;

    let measure = |t: f64, a: &L::State, b: &L::State| -> Result<DefectRow> {
        let mapped = map.apply_points(&a.outline());
        let other = b.outline();
        let defect = hausdorff(&mapped, &other)?;
        Ok(DefectRow {
            t,
            defect,
            defect_normalized: defect / diameter(&other),
        })
    };
    report.rows.push(measure(0.0, &a, &b)?);

    while next < targets.len() && t_end > 0.0 {
        let target = targets[next];
        let bound = law_a.stable_dt(&a)?.min(law_b.stable_dt(&b)?);
        let dt = controls.dt.min(controls.cfl * bound).min(target - t);
        let mut adv_a = law_a.advance(&a, dt)?;
        let mut adv_b = law_b.advance(&b, dt)?;
        // keep the grids matched when one run stops early at an event
        if adv_a.dt_taken != adv_b.dt_taken {
            let common = adv_a.dt_taken.min(adv_b.dt_taken);
            if adv_a.dt_taken > common {
                adv_a = law_a.advance(&a, common)?;
            }
            if adv_b.dt_taken > common {
                adv_b = law_b.advance(&b, common)?;
            }
        }
        for mut e in adv_a.events {
            e.t += t;
            ev_a.push(e);
        }
        for mut e in adv_b.events {
            e.t += t;
            ev_b.push(e);
        }
        t = driver::snap(t + adv_a.dt_taken.min(adv_b.dt_taken), target);
        match (adv_a.stop, adv_b.stop) {
            (true, true) => break,
            (true, false) | (false, true) => {
                let which = if adv_a.stop { "original" } else { "mapped" };
                report
                    .mismatches
                    .push(format!("the {which} run stopped at t = {t:e} and its twin did not"));
                break;
            }
            (false, false) => {}
        }
        a = adv_a.state;
        b = adv_b.state;
        if t >= target {
            report.rows.push(measure(t, &a, &b)?);
            next += 1;
        }
        steps += 1;
        if steps >= controls.max_steps {
            return Err(Error::Stalled(format!("step limit reached at t = {t:e}")));
        }
    }
    report.mismatches.extend(compare_events(&ev_a, &ev_b, 10.0 * controls.dt.min(1.0)));
    Ok(report)
}

fn require_map(scenario: &Scenario, map: Option<&AffineMap>) -> Result<AffineMap> {
    let map = map
        .or(scenario.map.as_ref())
        .copied()
        .ok_or_else(|| Error::Validation("no affine map given".into()))?;
    map.check_conditioning()?;
    Ok(map)
}

/// Runs the scenario and its image under `A` with pulled-back energy and mobility.
pub fn run_pair(scenario: &Scenario, map: Option<&AffineMap>) -> Result<EquivarianceReport> {
    let map = require_map(scenario, map)?;
    let phi_a = map.pullback(&scenario.phi)?;
    let mob_a = map.pullback(&scenario.mobility)?;
    let mut report = match (&scenario.flow, &scenario.initial) {
        (FlowKind::Crystalline, Geometry::Polygon(p)) => {
            let law = CrystallineLaw::new(scenario.phi.clone(), scenario.mobility.clone())?;
            let c_a = phi_a
                .as_crystalline()
                .ok_or_else(|| Error::Validation("pullback changed the anisotropy family".into()))?;
            let image = map.apply_polygon(p, c_a)?;
            image.validate(c_a)?;
            let law_a = CrystallineLaw::new(phi_a.clone(), mob_a)?;
            twin_run(&law, p.clone(), &law_a, image, &map, scenario.t_end, &scenario.controls)?
        }
        (FlowKind::Smooth, Geometry::Curve(c)) => {
            let law = WeightedLaw::new(scenario.phi.clone(), scenario.mobility.clone())?;
            let law_a = WeightedLaw::new(phi_a, mob_a)?;
            twin_run(&law, c.clone(), &law_a, map.apply_curve(c), &map, scenario.t_end, &scenario.controls)?
        }
        (FlowKind::Power, _) => {
            return Err(Error::Validation(
                "power-law flows have no pulled-back form; use compare-st".into(),
            ))
        }
        _ => return Err(Error::Validation("flow kind does not match the initial geometry".into())),
    };
    report.points = scenario.resolution();
    Ok(report)
}

/// Same power law on both sides, for area-preserving maps only.
pub fn compare_st(scenario: &Scenario, map: Option<&AffineMap>) -> Result<EquivarianceReport> {
    let map = require_map(scenario, map)?;
    if (map.det().abs() - 1.0).abs() > 1e-12 {
        return Err(Error::Validation(format!(
            "compare-st needs an area-preserving map, |det L| = {}",
            map.det().abs()
        )));
    }
    let (FlowKind::Power, Geometry::Curve(c)) = (&scenario.flow, &scenario.initial) else {
        return Err(Error::Validation("compare-st needs a power-law scenario on a curve".into()));
    };
    let law = PowerLaw::new(scenario.exponent)?;
    let mut report = twin_run(&law, c.clone(), &law, map.apply_curve(c), &map, scenario.t_end, &scenario.controls)?;
    report.points = Some(c.len());
    Ok(report)
}

/// Outcome of a refinement study.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum SlopeFit {
    /// Every defect is at rounding level; no slope is defined.
    Exact,
    /// Defects do not decrease monotonically under refinement.
    NonMonotone,
    Slope(f64),
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceLevel {
    pub dt: f64,
    pub points: Option<usize>,
    pub defect: f64,
    pub report: EquivarianceReport,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceTable {
    pub levels: Vec<ConvergenceLevel>,
    pub fit: SlopeFit,
}

/// Defects below this are treated as rounding noise.
pub const EXACT_LEVEL: f64 = 1e-12;

/// Least-squares slope of `log(defect)` against `log(dt)`.
pub fn fit_slope(dts: &[f64], defects: &[f64]) -> SlopeFit {
    if defects.iter().all(|d| *d <= EXACT_LEVEL) {
        return SlopeFit::Exact;
    }
    // levels are ordered coarse to fine
    if defects.windows(2).any(|w| !(w[1] < w[0])) {
        return SlopeFit::NonMonotone;
    }
    let xs: Vec<f64> = dts.iter().map(|d| d.ln()).collect();
    let ys: Vec<f64> = defects.iter().map(|d| d.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    SlopeFit::Slope(sxy / sxx)
}

/// The scenario coarsened `levels` times by halving: level `i` of `k` uses
/// `dt * 2^(k-1-i)` and, for curves, `N / 2^(k-1-i)` points.
pub fn refined(scenario: &Scenario, level: usize, levels: usize) -> Result<Scenario> {
    let factor = 1usize << (levels - 1 - level);
    let mut s = scenario.clone();
    s.controls.dt = scenario.controls.dt * factor as f64;
    if let Geometry::Curve(c) = &scenario.initial {
        let n = c.len() / factor;
        s.initial = Geometry::Curve(c.resample(n)?);
    }
    Ok(s)
}

/// Equivariance defect under successive halvings of `dt` (and of `1/N` for curves).
pub fn convergence_order(scenario: &Scenario, map: Option<&AffineMap>, levels: usize) -> Result<ConvergenceTable> {
    if levels < 3 {
        return Err(Error::Validation(format!("convergence needs at least 3 levels, got {levels}")));
    }
    if !scenario.controls.dt.is_finite() {
        return Err(Error::Validation("convergence needs a finite dt in the scenario".into()));
    }
    let runs: Vec<Scenario> = (0..levels)
        .map(|i| refined(scenario, i, levels))
        .collect::<Result<_>>()?;
    let reports = parallel_map(&runs, |s| match s.flow {
        FlowKind::Power => compare_st(s, map),
        _ => run_pair(s, map),
    });
    let mut table = Vec::with_capacity(levels);
    for (s, r) in runs.iter().zip(reports) {
        let r = r?;
        table.push(ConvergenceLevel {
            dt: s.controls.dt,
            points: s.resolution(),
            defect: r.max_normalized(),
            report: r,
        });
    }
    let fit = fit_slope(
        &table.iter().map(|l| l.dt).collect::<Vec<_>>(),
        &table.iter().map(|l| l.defect).collect::<Vec<_>>(),
    );
    Ok(ConvergenceTable { levels: table, fit })
}

/// Thread cap from `WULFFFLOW_THREADS`, defaulting to the available parallelism.
pub fn thread_limit() -> usize {
    std::env::var("WULFFFLOW_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Maps `f` over `items` on at most [`thread_limit`] scoped threads, preserving order.
pub fn parallel_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
{
    let threads = thread_limit().min(items.len()).max(1);
    if threads == 1 {
        return items.iter().map(&f).collect();
    }
    let mut out: Vec<Option<R>> = (0..items.len()).map(|_| None).collect();
    let chunk = items.len().div_ceil(threads);
    std::thread::scope(|scope| {
        for (inp, outp) in items.chunks(chunk).zip(out.chunks_mut(chunk)) {
            let f = &f;
            scope.spawn(move || {
                for (x, slot) in inp.iter().zip(outp.iter_mut()) {
                    *slot = Some(f(x));
                }
            });
        }
    });
    out.into_iter().map(|r| r.expect("worker filled every slot")).collect()
}

/// Result of a single-run simulation.
#[derive(Clone, Debug)]
pub enum Simulation {
    Polygon(FlowTrace<CrystallinePolygon>),
    Curve(FlowTrace<SmoothCurve>),
}

impl Simulation {
    pub fn energies(&self) -> Vec<f64> {
        match self {
            Simulation::Polygon(t) => t.records.iter().map(|r| r.energy).collect(),
            Simulation::Curve(t) => t.records.iter().map(|r| r.energy).collect(),
        }
    }

    pub fn step_energies(&self) -> &[f64] {
        match self {
            Simulation::Polygon(t) => &t.step_energies,
            Simulation::Curve(t) => &t.step_energies,
        }
    }

    pub fn events(&self) -> &[FlowEvent] {
        match self {
            Simulation::Polygon(t) => &t.events,
            Simulation::Curve(t) => &t.events,
        }
    }
}

/// Evolves the scenario's initial data.
pub fn simulate(scenario: &Scenario) -> Result<Simulation> {
    match (&scenario.flow, &scenario.initial) {
        (FlowKind::Crystalline, Geometry::Polygon(p)) => crate::crystalline::evolve(
            p,
            &scenario.phi,
            &scenario.mobility,
            scenario.t_end,
            &scenario.controls,
        )
        .map(Simulation::Polygon),
        (FlowKind::Smooth, Geometry::Curve(c)) => {
            let law = WeightedLaw::new(scenario.phi.clone(), scenario.mobility.clone())?;
            driver::evolve(&law, c.clone(), scenario.t_end, &scenario.controls).map(Simulation::Curve)
        }
        (FlowKind::Power, Geometry::Curve(c)) => {
            let law = PowerLaw::new(scenario.exponent)?;
            driver::evolve(&law, c.clone(), scenario.t_end, &scenario.controls).map(Simulation::Curve)
        }
        _ => Err(Error::Validation("flow kind does not match the initial geometry".into())),
    }
}
