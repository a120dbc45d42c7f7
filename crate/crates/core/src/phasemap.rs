//! Phase diagrams over `(g1, g2)`, boundary location by bisection on the
//! phase label, first/second-order classification from the jump of the order
//! parameter, tricritical-point search and critical-coupling sweeps along rays.

use std::io::{self, Write};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::landscape::critical_coupling_g1c;
use crate::model::{ModelParams, TrkBounds};
use crate::solver::{solve_ground_state_with, MeanFieldSolution, Phase, SolverOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TransitionOrder {
    First,
    Second,
    /// Jump inside the band `(eps_jump/2, 2 eps_jump)` or not stable under refinement.
    Indeterminate,
}

impl TransitionOrder {
    pub fn as_str(&self) -> &'static str {
        match self {
            TransitionOrder::First => "First",
            TransitionOrder::Second => "Second",
            TransitionOrder::Indeterminate => "Indeterminate",
        }
    }
}

impl std::fmt::Display for TransitionOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseMapOptions {
    /// Absolute width of the final bisection interval, in coupling units.
    pub bisect_tol: f64,
    /// Order-parameter jump separating first from second order.
    pub jump_tol: f64,
    /// Relative change allowed between the jump at the nominal offset and
    /// at a quarter of it for a first-order verdict.
    pub jump_stability: f64,
    /// Grid points used when bracketing a crossing along a row.
    pub bracket_steps: usize,
    /// Step and reach of the outward search along sweep rays.
    pub ray_step: f64,
    pub ray_max: f64,
    pub solver: SolverOptions,
}

impl Default for PhaseMapOptions {
    fn default() -> Self {
        Self {
            // the label flips where Psi^2 crosses sr_threshold, about
            // 1.5e-8 past g1c on second-order rows; 10 tol has to cover that
            bisect_tol: 5e-9,
            jump_tol: 1e-3,
            jump_stability: 0.1,
            bracket_steps: 64,
            ray_step: 0.02,
            ray_max: 20.0,
            solver: SolverOptions::default(),
        }
    }
}

/// Result of locating the boundary at fixed `g2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionProbe {
    pub g2_fixed: f64,
    pub g1_star: f64,
    /// Order-parameter difference across the boundary at the nominal side offset.
    pub jump: f64,
    /// Jumps at the nominal offset, half of it and a quarter of it.
    pub jump_refinement: [f64; 3],
    pub order: TransitionOrder,
    /// Closed-form instability threshold, when available.
    pub g1c: Option<f64>,
}

impl TransitionProbe {
    /// Second-order signature of the closed form: `|g1_star - g1c| <= 10 tol`.
    pub fn at_instability(&self, tol: f64) -> bool {
        self.g1c
            .is_some_and(|gc| (self.g1_star - gc).abs() <= 10.0 * tol)
    }
}

fn solve_at(template: &ModelParams, g1: f64, g2: f64, opts: &PhaseMapOptions) -> Result<MeanFieldSolution> {
    solve_ground_state_with(&template.with_couplings(g1, g2), &opts.solver)
}

/// A straight path `(g1, g2) = origin + t * dir`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Path {
    origin: (f64, f64),
    dir: (f64, f64),
}

impl Path {
    fn at(&self, t: f64) -> (f64, f64) {
        (self.origin.0 + t * self.dir.0, self.origin.1 + t * self.dir.1)
    }

    fn solve(&self, template: &ModelParams, t: f64, opts: &PhaseMapOptions) -> Result<MeanFieldSolution> {
        let (g1, g2) = self.at(t);
        solve_at(template, g1, g2, opts)
    }

    fn phase(&self, template: &ModelParams, t: f64, opts: &PhaseMapOptions) -> Result<Phase> {
        self.solve(template, t, opts).map(|s| s.phase)
    }
}

struct Crossing {
    t_star: f64,
    jump: f64,
    refinement: [f64; 3],
    order: TransitionOrder,
}

/// Bisection on the phase label along `path` between a normal `t_lo` and a
/// superradiant `t_hi`, followed by the jump measurement.
fn bisect_path(
    template: &ModelParams,
    path: Path,
    mut t_lo: f64,
    mut t_hi: f64,
    opts: &PhaseMapOptions,
) -> Result<Crossing> {
    if !(t_lo < t_hi) {
        return Err(Error::InvalidBracket(format!("lower end {t_lo} is not below upper end {t_hi}")));
    }
    if path.phase(template, t_lo, opts)? != Phase::Normal {
        return Err(Error::InvalidBracket(format!("lower end {t_lo} is not normal")));
    }
    if path.phase(template, t_hi, opts)? != Phase::Superradiant {
        return Err(Error::InvalidBracket(format!("upper end {t_hi} is not superradiant")));
    }
    while t_hi - t_lo > opts.bisect_tol {
        let mid = 0.5 * (t_lo + t_hi);
        if mid <= t_lo || mid >= t_hi {
            break;
        }
        match path.phase(template, mid, opts)? {
            Phase::Normal => t_lo = mid,
            Phase::Superradiant => t_hi = mid,
        }
    }
    let t_star = 0.5 * (t_lo + t_hi);

    // side offsets t*(1 +- eps) with eps = 10 tol / t*, then halved twice
    let mut refinement = [0.0; 3];
    for (k, r) in refinement.iter_mut().enumerate() {
        let offset = 10.0 * opts.bisect_tol / (1u32 << k) as f64;
        let above = path.solve(template, t_star + offset, opts)?;
        let below = path.solve(template, (t_star - offset).max(0.0), opts)?;
        *r = (above.order_parameter() - below.order_parameter()).max(0.0);
    }
    let jump = refinement[0];
    let stable = (refinement[2] - jump).abs() <= opts.jump_stability * jump;
    let order = if jump <= 0.5 * opts.jump_tol {
        TransitionOrder::Second
    } else if jump >= 2.0 * opts.jump_tol && stable {
        TransitionOrder::First
    } else {
        TransitionOrder::Indeterminate
    };
    Ok(Crossing {
        t_star,
        jump,
        refinement,
        order,
    })
}

/// Locates the normal/superradiant boundary along `g1` at fixed `g2`.
///
/// Requires `g1_lo` normal and `g1_hi` superradiant.
pub fn boundary_bisect(
    template: &ModelParams,
    g2_fixed: f64,
    g1_lo: f64,
    g1_hi: f64,
    opts: &PhaseMapOptions,
) -> Result<TransitionProbe> {
    let path = Path {
        origin: (0.0, g2_fixed),
        dir: (1.0, 0.0),
    };
    let c = bisect_path(template, path, g1_lo, g1_hi, opts)?;
    Ok(TransitionProbe {
        g2_fixed,
        g1_star: c.t_star,
        jump: c.jump,
        jump_refinement: c.refinement,
        order: c.order,
        g1c: critical_coupling_g1c(template).ok(),
    })
}

/// Column-wise counterpart of [`boundary_bisect`]: boundary along `g2` at
/// fixed `g1`. Returns `(g2_star, jump, order)`.
pub fn boundary_bisect_column(
    template: &ModelParams,
    g1_fixed: f64,
    g2_lo: f64,
    g2_hi: f64,
    opts: &PhaseMapOptions,
) -> Result<(f64, f64, TransitionOrder)> {
    let path = Path {
        origin: (g1_fixed, 0.0),
        dir: (0.0, 1.0),
    };
    let c = bisect_path(template, path, g2_lo, g2_hi, opts)?;
    Ok((c.t_star, c.jump, c.order))
}

/// First normal-to-superradiant step along `g1` in `[0, g1_max]` at fixed `g2`.
pub fn find_g1_bracket(
    template: &ModelParams,
    g2: f64,
    g1_max: f64,
    opts: &PhaseMapOptions,
) -> Result<(f64, f64)> {
    let n = opts.bracket_steps.max(2);
    let mut prev = 0.0;
    if solve_at(template, 0.0, g2, opts)?.phase != Phase::Normal {
        return Err(Error::InvalidBracket(format!(
            "superradiant already at g1 = 0 (g2 = {g2})"
        )));
    }
    for k in 1..=n {
        let g1 = g1_max * k as f64 / n as f64;
        if solve_at(template, g1, g2, opts)?.phase == Phase::Superradiant {
            return Ok((prev, g1));
        }
        prev = g1;
    }
    Err(Error::InvalidBracket(format!(
        "no superradiant point for g1 <= {g1_max} at g2 = {g2}"
    )))
}

/// Default reach of row searches: twice the closed-form threshold when known.
fn default_g1_reach(template: &ModelParams) -> f64 {
    critical_coupling_g1c(template)
        .map(|g| 2.0 * g)
        .unwrap_or(4.0 * (template.big_delta * template.omega1).sqrt())
}

/// [`boundary_bisect`] with the bracket found by a coarse row search.
pub fn probe_row(template: &ModelParams, g2: f64, opts: &PhaseMapOptions) -> Result<TransitionProbe> {
    let (lo, hi) = find_g1_bracket(template, g2, default_g1_reach(template), opts)?;
    boundary_bisect(template, g2, lo, hi, opts)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tricritical {
    pub g1: f64,
    pub g2: f64,
    /// Largest `g2` found second order and smallest found first order.
    pub second_side_g2: f64,
    pub first_side_g2: f64,
    pub g1c: Option<f64>,
    /// Boundary at `second_side_g2` coincides with `g1c` within `10 * bisect_tol`.
    pub matches_g1c: bool,
}

/// Bisection in `g2` for the point where the boundary changes order.
///
/// Close to the tricritical point the divergent susceptibility inflates the
/// jump measured at a finite side offset, so second-order rows show up as
/// Indeterminate. Such rows still sit on the instability line, which first-
/// order rows do not; they are counted as second-order side. The remaining
/// Indeterminate rows are kept apart: the last second-order and the first
/// first-order `g2` are bisected separately and the estimate is their
/// midpoint.
pub fn locate_tricritical(
    template: &ModelParams,
    g2_lo: f64,
    g2_hi: f64,
    tol: f64,
    opts: &PhaseMapOptions,
) -> Result<Tricritical> {
    let order_at = |g2: f64| {
        probe_row(template, g2, opts).map(|p| match p.order {
            TransitionOrder::Indeterminate if p.at_instability(opts.bisect_tol) => TransitionOrder::Second,
            o => o,
        })
    };
    let lo_order = order_at(g2_lo)?;
    let hi_order = order_at(g2_hi)?;
    let (second_end, first_end) = match (lo_order, hi_order) {
        (TransitionOrder::Second, TransitionOrder::First) => (g2_lo, g2_hi),
        (TransitionOrder::First, TransitionOrder::Second) => (g2_hi, g2_lo),
        _ => return Err(Error::NoOrderChange { lo: g2_lo, hi: g2_hi }),
    };

    let bisect_for = |want: TransitionOrder, mut inside: f64, mut outside: f64| -> Result<f64> {
        while (outside - inside).abs() > tol {
            let mid = 0.5 * (inside + outside);
            if order_at(mid)? == want {
                inside = mid;
            } else {
                outside = mid;
            }
        }
        Ok(inside)
    };
    let last_second = bisect_for(TransitionOrder::Second, second_end, first_end)?;
    let first_first = bisect_for(TransitionOrder::First, first_end, second_end)?;
    let probe = probe_row(template, last_second, opts)?;
    Ok(Tricritical {
        g1: probe.g1_star,
        g2: 0.5 * (last_second + first_first),
        second_side_g2: last_second,
        first_side_g2: first_first,
        g1c: probe.g1c,
        matches_g1c: probe.at_instability(opts.bisect_tol),
    })
}

/// A boundary crossing found while scanning a row (fixed `g2`) or a column (fixed `g1`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPoint {
    pub g1: f64,
    pub g2: f64,
    pub jump: f64,
    pub order: TransitionOrder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScanMode {
    /// Boundary searched along `g1` in every `g2` row.
    #[default]
    Rows,
    /// Boundary searched along `g2` in every `g1` column.
    Columns,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseDiagram {
    pub g1_axis: Vec<f64>,
    pub g2_axis: Vec<f64>,
    /// `cells[j][i]` is the solution at `(g1_axis[i], g2_axis[j])`; `None` when the solver failed.
    pub cells: Vec<Vec<Option<MeanFieldSolution>>>,
    pub boundary: Vec<BoundaryPoint>,
    pub tricritical: Option<Tricritical>,
    /// Rows (or columns) whose label changes more than once.
    pub reentrant: Vec<usize>,
}

impl PhaseDiagram {
    pub fn cell(&self, i: usize, j: usize) -> Option<&MeanFieldSolution> {
        self.cells[j][i].as_ref()
    }

    pub fn failed_cells(&self) -> usize {
        self.cells.iter().flatten().filter(|c| c.is_none()).count()
    }
}

fn strictly_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[0] < w[1]) && v.iter().all(|x| x.is_finite() && *x >= 0.0)
}

/// Evenly spaced axis `[0, max]` with `n` points.
pub fn linear_axis(max: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.0];
    }
    (0..n).map(|k| max * k as f64 / (n - 1) as f64).collect()
}

/// Solves every grid cell and extracts the boundary.
pub fn scan_grid(
    template: &ModelParams,
    g1_axis: &[f64],
    g2_axis: &[f64],
    mode: ScanMode,
    opts: &PhaseMapOptions,
) -> Result<PhaseDiagram> {
    if g1_axis.is_empty() || g2_axis.is_empty() {
        return Err(Error::Config("grid axes must be nonempty".into()));
    }
    if !strictly_increasing(g1_axis) || !strictly_increasing(g2_axis) {
        return Err(Error::Config(
            "grid axes must be strictly increasing and non-negative".into(),
        ));
    }
    let template = template.validated()?;
    let n1 = g1_axis.len();
    let flat: Vec<Option<MeanFieldSolution>> = (0..n1 * g2_axis.len())
        .into_par_iter()
        .map(|k| solve_at(&template, g1_axis[k % n1], g2_axis[k / n1], opts).ok())
        .collect();
    let cells: Vec<Vec<_>> = flat.chunks(n1).map(|r| r.to_vec()).collect();

    let label = |i: usize, j: usize| cells[j][i].map(|c| c.phase);
    let (lines, len) = match mode {
        ScanMode::Rows => (g2_axis.len(), n1),
        ScanMode::Columns => (n1, g2_axis.len()),
    };
    let at = |line: usize, k: usize| match mode {
        ScanMode::Rows => label(k, line),
        ScanMode::Columns => label(line, k),
    };

    let mut brackets = Vec::new();
    let mut reentrant = Vec::new();
    for line in 0..lines {
        let mut changes = 0;
        let mut first = None;
        for k in 1..len {
            if let (Some(a), Some(b)) = (at(line, k - 1), at(line, k)) {
                if a != b {
                    changes += 1;
                    if first.is_none() && a == Phase::Normal {
                        first = Some(k);
                    }
                }
            }
        }
        if changes > 1 {
            reentrant.push(line);
        }
        if let Some(k) = first {
            brackets.push((line, k));
        }
    }

    let boundary: Vec<BoundaryPoint> = brackets
        .par_iter()
        .filter_map(|&(line, k)| match mode {
            ScanMode::Rows => {
                boundary_bisect(&template, g2_axis[line], g1_axis[k - 1], g1_axis[k], opts)
                    .ok()
                    .map(|p| BoundaryPoint {
                        g1: p.g1_star,
                        g2: p.g2_fixed,
                        jump: p.jump,
                        order: p.order,
                    })
            }
            ScanMode::Columns => {
                boundary_bisect_column(&template, g1_axis[line], g2_axis[k - 1], g2_axis[k], opts)
                    .ok()
                    .map(|(g2, jump, order)| BoundaryPoint {
                        g1: g1_axis[line],
                        g2,
                        jump,
                        order,
                    })
            }
        })
        .collect();

    let mut tricritical = None;
    if mode == ScanMode::Rows {
        let second = boundary
            .iter()
            .filter(|b| b.order == TransitionOrder::Second)
            .map(|b| b.g2)
            .fold(f64::NEG_INFINITY, f64::max);
        let first = boundary
            .iter()
            .filter(|b| b.order == TransitionOrder::First && b.g2 > second)
            .map(|b| b.g2)
            .fold(f64::INFINITY, f64::min);
        if second.is_finite() && first.is_finite() {
            let tol = 1e-3 * (first - second).max(opts.bisect_tol);
            tricritical = locate_tricritical(&template, second, first, tol, opts).ok();
        }
    }

    Ok(PhaseDiagram {
        g1_axis: g1_axis.to_vec(),
        g2_axis: g2_axis.to_vec(),
        cells,
        boundary,
        tricritical,
        reentrant,
    })
}

/// Direction in the `(g1, g2)` plane along which a critical coupling is sought.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Ray {
    /// `(g_c, 0)`
    G1,
    /// `(0, g_c)`
    G2,
    /// `(g_c, g_c)`
    Diagonal,
}

impl Ray {
    pub const ALL: [Ray; 3] = [Ray::G1, Ray::G2, Ray::Diagonal];

    pub fn as_str(&self) -> &'static str {
        match self {
            Ray::G1 => "g1",
            Ray::G2 => "g2",
            Ray::Diagonal => "diag",
        }
    }

    pub fn parse(s: &str) -> Option<Ray> {
        match s {
            "g1" => Some(Ray::G1),
            "g2" => Some(Ray::G2),
            "diag" => Some(Ray::Diagonal),
            _ => None,
        }
    }

    fn dir(&self) -> (f64, f64) {
        match self {
            Ray::G1 => (1.0, 0.0),
            Ray::G2 => (0.0, 1.0),
            Ray::Diagonal => (1.0, 1.0),
        }
    }
}

/// Critical coupling along `ray`, or `None` when no transition lies within `ray_max`.
pub fn critical_along_ray(template: &ModelParams, ray: Ray, opts: &PhaseMapOptions) -> Result<Option<f64>> {
    let path = Path {
        origin: (0.0, 0.0),
        dir: ray.dir(),
    };
    let steps = (opts.ray_max / opts.ray_step).ceil() as usize;
    let mut prev = 0.0;
    for k in 1..=steps {
        let t = (k as f64 * opts.ray_step).min(opts.ray_max);
        if path.phase(template, t, opts)? == Phase::Superradiant {
            return bisect_path(template, path, prev, t, opts).map(|c| Some(c.t_star));
        }
        prev = t;
    }
    Ok(None)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepEntry {
    pub chi: f64,
    pub kappa: f64,
    pub ray: Ray,
    pub g_c: Option<f64>,
}

/// Critical couplings for `chi1 = chi2 = chi` and `kappa1 = kappa2 = kappa3 = kappa`.
///
/// Rows come out ordered by chi, then kappa, then ray (in the order given).
pub fn sweep_chi_kappa(
    base: &ModelParams,
    chis: &[f64],
    kappas: &[f64],
    rays: &[Ray],
    opts: &PhaseMapOptions,
) -> Result<Vec<SweepEntry>> {
    let mut jobs = Vec::new();
    for &chi in chis {
        for &kappa in kappas {
            for &ray in rays {
                jobs.push((chi, kappa, ray));
            }
        }
    }
    jobs.par_iter()
        .map(|&(chi, kappa, ray)| {
            let mut p = *base;
            p.chi1 = chi;
            p.chi2 = chi;
            p.kappa1 = kappa;
            p.kappa2 = kappa;
            p.kappa3 = kappa;
            let p = p.validated()?;
            Ok(SweepEntry {
                chi,
                kappa,
                ray,
                g_c: critical_along_ray(&p, ray, opts)?,
            })
        })
        .collect()
}

/// Float formatting used in every output file: 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub const GRID_HEADER: &str = "g1,g2,g1_over_trk,g2_over_trk,psi2,psi3,phi1,phi2,e0,phase,converged";
pub const BOUNDARY_HEADER: &str = "g2,g1_star,jump,order";
pub const SWEEP_HEADER: &str = "chi,kappa,ray,g_c";

fn ratio(g: f64, bound: f64) -> f64 {
    if bound > 0.0 {
        g / bound
    } else {
        f64::NAN
    }
}

/// One row per cell, row-major in `(g2, g1)`.
pub fn write_grid_csv<W: Write>(w: &mut W, d: &PhaseDiagram, trk: &TrkBounds) -> io::Result<()> {
    writeln!(w, "{GRID_HEADER}")?;
    for (j, &g2) in d.g2_axis.iter().enumerate() {
        for (i, &g1) in d.g1_axis.iter().enumerate() {
            let lead = [g1, g2, ratio(g1, trk.g1_trk), ratio(g2, trk.g2_trk)].map(fmt_f64).join(",");
            match d.cell(i, j) {
                Some(c) => writeln!(
                    w,
                    "{lead},{},{},{},{},{},{},{}",
                    fmt_f64(c.psi2),
                    fmt_f64(c.psi3),
                    fmt_f64(c.phi1),
                    fmt_f64(c.phi2),
                    fmt_f64(c.e0),
                    c.phase,
                    c.converged
                )?,
                None => writeln!(w, "{lead},NaN,NaN,NaN,NaN,NaN,Failed,false")?,
            }
        }
    }
    Ok(())
}

pub fn write_boundary_csv<W: Write>(w: &mut W, boundary: &[BoundaryPoint]) -> io::Result<()> {
    writeln!(w, "{BOUNDARY_HEADER}")?;
    for b in boundary {
        writeln!(w, "{},{},{},{}", fmt_f64(b.g2), fmt_f64(b.g1), fmt_f64(b.jump), b.order)?;
    }
    Ok(())
}

pub fn write_sweep_csv<W: Write>(w: &mut W, rows: &[SweepEntry]) -> io::Result<()> {
    writeln!(w, "{SWEEP_HEADER}")?;
    for r in rows {
        let gc = r.g_c.map_or_else(|| "absent".to_string(), fmt_f64);
        writeln!(w, "{},{},{},{}", fmt_f64(r.chi), fmt_f64(r.kappa), r.ray.as_str(), gc)?;
    }
    Ok(())
}
