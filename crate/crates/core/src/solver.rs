//! Global minimization of the reduced mean-field energy over the unit disk.
//!
//! Local search is a damped Newton iteration on `(Psi2, Psi3)` with a
//! steepest-descent fallback and an explicit escape along negative curvature,
//! so saddles (the unstable normal state in particular) are never reported as
//! minima. The global minimum is the lowest of a fixed set of local searches.
//!
//! On the unit circle `psi1 = 0`, and `(Psi2, Psi3)` and `(-Psi2, -Psi3)`
//! describe the same state (a global sign of all three matter amplitudes is
//! not observable), so the circle is not a real boundary. Searches run on the
//! sphere `(psi1, Psi2, Psi3)` modulo sign, in whichever of three charts keeps
//! the eliminated amplitude away from zero; minima with `psi1 = 0` (all atoms
//! out of level 1) are then ordinary critical points.

use nalgebra::{Matrix2, Matrix3x2, Vector2, Vector3};

use crate::error::{Error, Result};
use crate::landscape::{
    eliminate_bosons, sphere_local, LocalModel, MatterPoint, DEFINITENESS_TOL,
};
use crate::model::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Phase {
    Normal,
    Superradiant,
}

impl Phase {
    pub fn as_str(&self) -> &'static str {
        match self {
            Phase::Normal => "Normal",
            Phase::Superradiant => "Superradiant",
        }
    }
}

impl std::fmt::Display for Phase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Gradient-norm tolerance for a converged local minimum.
    pub grad_tol: f64,
    /// Newton-step tolerance accompanying `grad_tol`.
    pub step_tol: f64,
    pub max_iter: usize,
    /// `Psi2^2 + Psi3^2` threshold separating normal from superradiant.
    pub sr_threshold: f64,
    /// Energy window in which competing minima count as degenerate.
    pub tie_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            grad_tol: 1e-10,
            step_tol: 1e-10,
            max_iter: 500,
            sr_threshold: 1e-8,
            tie_tol: 1e-12,
        }
    }
}

/// Outcome of one local search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalMinimum {
    pub point: MatterPoint,
    pub energy: f64,
    pub gradient_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Minimum lies on the unit circle (`psi1 = 0`).
    pub on_boundary: bool,
}

const ARMIJO: f64 = 1e-4;
const MAX_HALVINGS: usize = 60;
/// Charts are swapped once the dependent amplitude drops below this.
const CHART_MIN: f64 = 0.5;
/// Minima with `psi1` below this are reported as lying on the unit circle.
const RIM_TOL: f64 = 1e-8;

/// Chart on the sphere `|z| = 1` with `z[dep] >= 0` eliminated; the other
/// two components, in increasing index order, are the free coordinates.
/// Chart 0 is the disk parametrization.
#[derive(Debug, Clone, Copy)]
struct Chart {
    dep: usize,
    free: [usize; 2],
}

impl Chart {
    fn new(dep: usize) -> Self {
        let free = match dep {
            0 => [1, 2],
            1 => [0, 2],
            _ => [0, 1],
        };
        Self { dep, free }
    }

    fn coords(&self, z: &Vector3<f64>) -> Vector2<f64> {
        Vector2::new(z[self.free[0]], z[self.free[1]])
    }

    fn point(&self, c: Vector2<f64>) -> Option<Vector3<f64>> {
        let w2 = 1.0 - c.norm_squared();
        if !(w2 > 0.0) {
            return None;
        }
        let mut z = Vector3::zeros();
        z[self.free[0]] = c[0];
        z[self.free[1]] = c[1];
        z[self.dep] = w2.sqrt();
        Some(z)
    }

    /// Energy, gradient and Hessian in chart coordinates.
    fn local(&self, p: &ModelParams, z: &Vector3<f64>) -> Result<LocalModel> {
        let sm = sphere_local(p, *z)?;
        let (a, b, w) = (z[self.free[0]], z[self.free[1]], z[self.dep]);
        let w3 = w * w * w;
        let mut jac = Matrix3x2::zeros();
        jac[(self.free[0], 0)] = 1.0;
        jac[(self.free[1], 1)] = 1.0;
        jac[(self.dep, 0)] = -a / w;
        jac[(self.dep, 1)] = -b / w;
        let wdd = Matrix2::new(-(1.0 - b * b) / w3, -a * b / w3, -a * b / w3, -(1.0 - a * a) / w3);
        Ok(LocalModel {
            energy: sm.energy,
            gradient: jac.transpose() * sm.gradient,
            hessian: jac.transpose() * sm.hessian * jac + sm.gradient[self.dep] * wdd,
        })
    }
}

/// Keeps `chart` while its dependent amplitude is comfortably large, else
/// moves to the largest component. `z` is flipped so that component is
/// non-negative; `z` and `-z` are the same state.
fn recharts(chart: Option<Chart>, z: &mut Vector3<f64>) -> Chart {
    if let Some(c) = chart {
        if z[c.dep] >= CHART_MIN {
            return c;
        }
    }
    let dep = if z[0].abs() >= CHART_MIN {
        0
    } else {
        z.iamax()
    };
    if z[dep] < 0.0 {
        *z = -*z;
    }
    Chart::new(dep)
}

fn lowest_eigenpair(h: &Matrix2<f64>) -> (f64, Vector2<f64>) {
    let eig = h.symmetric_eigen();
    let i = if eig.eigenvalues[0] <= eig.eigenvalues[1] {
        0
    } else {
        1
    };
    (eig.eigenvalues[i], eig.eigenvectors.column(i).into_owned())
}

/// Local minimization of the reduced energy from `start`.
///
/// Never fails on non-convergence: the best point is returned with
/// `converged = false`.
pub fn minimize_reduced(
    p: &ModelParams,
    start: MatterPoint,
    opts: &SolverOptions,
) -> Result<LocalMinimum> {
    let psi1 = start.psi1().ok_or(Error::OutsideDisk {
        psi2: start.psi2,
        psi3: start.psi3,
    })?;
    let mut z = Vector3::new(psi1, start.psi2, start.psi3);
    let mut chart = recharts(None, &mut z);
    let mut local = chart.local(p, &z)?;
    let mut iterations = 0;
    let mut converged = false;

    while iterations < opts.max_iter {
        iterations += 1;
        let g = local.gradient;
        let h = local.hessian;
        let gnorm = g.norm();
        let scale = h.amax().max(1e-300);
        let (lmin, vmin) = lowest_eigenpair(&h);
        let curved_up = lmin > DEFINITENESS_TOL * scale;
        let psd = lmin >= -DEFINITENESS_TOL * scale;

        let newton = if curved_up {
            h.cholesky().map(|c| -c.solve(&g))
        } else {
            None
        };
        if gnorm <= opts.grad_tol && psd {
            let small_step = newton.map_or(true, |d| d.norm() <= opts.step_tol);
            if small_step || gnorm == 0.0 {
                converged = true;
                break;
            }
        }

        // candidate directions, tried in order until one lowers the energy
        let mut dirs: Vec<(Vector2<f64>, bool)> = Vec::with_capacity(3);
        if let Some(d) = newton {
            dirs.push((d, false));
        }
        if gnorm > 0.0 {
            dirs.push((-g / scale, false));
        }
        if lmin < 0.0 {
            let v = if vmin.dot(&g) > 0.0 { -vmin } else { vmin };
            dirs.push((v, true));
            if g.dot(&v) == 0.0 {
                dirs.push((-v, true));
            }
        }

        let x = chart.coords(&z);
        let mut moved = false;
        // near convergence the Armijo decrease is below roundoff; a full
        // Newton step is still taken if it shrinks the gradient
        if let Some(d) = newton {
            if let Some(y) = chart.point(x + d) {
                let trial = chart.local(p, &y)?;
                let noise = 8.0 * f64::EPSILON * local.energy.abs().max(1.0);
                if trial.energy <= local.energy + noise && trial.gradient.norm() < 0.5 * gnorm {
                    z = y;
                    moved = true;
                }
            }
        }
        for (d, curvature) in dirs {
            if moved {
                break;
            }
            let slope = g.dot(&d);
            let mut t = if curvature { 0.5 } else { 1.0 };
            for _ in 0..MAX_HALVINGS {
                if let Some(y) = chart.point(x + t * d) {
                    let e = sphere_local(p, y)?.energy;
                    let target = if curvature {
                        local.energy
                    } else {
                        local.energy + ARMIJO * t * slope
                    };
                    if e < target {
                        z = y;
                        moved = true;
                        break;
                    }
                }
                t *= 0.5;
            }
            if moved {
                break;
            }
        }

        if !moved {
            // no representable descent left
            converged = gnorm <= opts.grad_tol.sqrt() && psd;
            break;
        }
        chart = recharts(Some(chart), &mut z);
        local = chart.local(p, &z)?;
    }

    if z[0] < 0.0 {
        z = -z;
    }
    Ok(LocalMinimum {
        point: MatterPoint::new(z[1], z[2]),
        energy: local.energy,
        gradient_norm: local.gradient.norm(),
        iterations,
        converged,
        on_boundary: z[0] < RIM_TOL,
    })
}

/// Deterministic start set: origin, 8 points at radius 0.5 every 45 degrees,
/// 4 points at radius 0.95 on the axes, then 8 points on the unit circle
/// every 22.5 degrees (half the circle; the other half is the same states).
///
/// The circle starts matter when the competing minimum has `psi1 = 0`: at
/// `g1 = 0` both axes are invariant lines of the descent and the interior
/// starts all drain into the still-stable normal state.
pub fn start_set() -> Vec<MatterPoint> {
    let mut out = vec![MatterPoint::ORIGIN];
    for k in 0..8 {
        let a = k as f64 * std::f64::consts::FRAC_PI_4;
        out.push(MatterPoint::new(0.5 * a.cos(), 0.5 * a.sin()));
    }
    for (x, y) in [(0.95, 0.0), (0.0, 0.95), (-0.95, 0.0), (0.0, -0.95)] {
        out.push(MatterPoint::new(x, y));
    }
    for k in 0..8 {
        let a = k as f64 * std::f64::consts::FRAC_PI_8;
        out.push(MatterPoint::new(a.cos(), a.sin()));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanFieldSolution {
    pub psi1: f64,
    pub psi2: f64,
    pub psi3: f64,
    pub phi1: f64,
    pub phi2: f64,
    pub e0: f64,
    pub phase: Phase,
    pub converged: bool,
    pub starts_used: usize,
    /// Another local minimum lies within the tie tolerance of `e0`.
    pub degenerate: bool,
    pub on_boundary: bool,
}

impl MeanFieldSolution {
    pub fn order_parameter(&self) -> f64 {
        self.psi2.hypot(self.psi3)
    }

    pub fn matter(&self) -> MatterPoint {
        MatterPoint::new(self.psi2, self.psi3)
    }
}

pub fn solve_ground_state(p: &ModelParams) -> Result<MeanFieldSolution> {
    solve_ground_state_with(p, &SolverOptions::default())
}

/// Deterministic multi-start global minimization.
pub fn solve_ground_state_with(p: &ModelParams, opts: &SolverOptions) -> Result<MeanFieldSolution> {
    let p = p.validated()?;
    let starts = start_set();
    let mut results = Vec::with_capacity(starts.len());
    for s in &starts {
        if let Ok(m) = minimize_reduced(&p, *s, opts) {
            results.push(m);
        }
    }
    if results.is_empty() {
        return Err(Error::AllStartsFailed);
    }
    let pool: Vec<&LocalMinimum> = if results.iter().any(|r| r.converged) {
        results.iter().filter(|r| r.converged).collect()
    } else {
        results.iter().collect()
    };

    // lowest energy; exact ties go to psi2 >= 0, then lexicographic order
    let best = pool
        .iter()
        .copied()
        .min_by(|a, b| {
            a.energy
                .total_cmp(&b.energy)
                .then_with(|| (a.point.psi2 < 0.0).cmp(&(b.point.psi2 < 0.0)))
                .then_with(|| a.point.psi2.total_cmp(&b.point.psi2))
                .then_with(|| a.point.psi3.abs().total_cmp(&b.point.psi3.abs()))
        })
        .expect("nonempty pool");

    // on the circle the sign of Psi2 is a gauge choice as well
    let same_state = |a: &LocalMinimum, b: &LocalMinimum| {
        let (a2, b2) = if a.on_boundary && b.on_boundary {
            (a.point.psi2.abs(), b.point.psi2.abs())
        } else {
            (a.point.psi2, b.point.psi2)
        };
        (a2 - b2).abs() < 1e-6 && (a.point.psi3.abs() - b.point.psi3.abs()).abs() < 1e-6
    };
    let degenerate = pool
        .iter()
        .any(|r| r.energy - best.energy <= opts.tie_tol && !same_state(r, best));

    let mut m = best.point;
    if m.psi3 < 0.0 {
        m.psi3 = -m.psi3;
    }
    let b = eliminate_bosons(&p, m)?;
    let phase = if m.radius_sq() <= opts.sr_threshold {
        Phase::Normal
    } else {
        Phase::Superradiant
    };
    Ok(MeanFieldSolution {
        psi1: m.psi1().expect("interior point"),
        psi2: m.psi2,
        psi3: m.psi3,
        phi1: b.phi1,
        phi2: b.phi2,
        e0: best.energy,
        phase,
        converged: best.converged,
        starts_used: starts.len(),
        degenerate,
        on_boundary: best.on_boundary,
    })
}

/// Which mean fields exceed the classification threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhaseDiagnostics {
    pub phase: Phase,
    pub psi2_active: bool,
    pub psi3_active: bool,
    pub phi1_active: bool,
    pub phi2_active: bool,
}

/// Normal iff `Psi2^2 + Psi3^2 <= threshold`. Individual fields are flagged
/// active when their square exceeds the same threshold.
pub fn classify_phase(sol: &MeanFieldSolution, threshold: f64) -> PhaseDiagnostics {
    let active = |v: f64| v * v > threshold;
    PhaseDiagnostics {
        phase: if sol.psi2 * sol.psi2 + sol.psi3 * sol.psi3 <= threshold {
            Phase::Normal
        } else {
            Phase::Superradiant
        },
        psi2_active: active(sol.psi2),
        psi3_active: active(sol.psi3),
        phi1_active: active(sol.phi1),
        phi2_active: active(sol.phi2),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::landscape::critical_coupling_g1c;
    use crate::model::{reference_params, trk_bounds};

    fn bare(psi2: f64, psi3: f64) -> MeanFieldSolution {
        MeanFieldSolution {
            psi1: (1.0 - psi2 * psi2 - psi3 * psi3).sqrt(),
            psi2,
            psi3,
            phi1: 0.0,
            phi2: 0.0,
            e0: 0.0,
            phase: Phase::Normal,
            converged: true,
            starts_used: 1,
            degenerate: false,
            on_boundary: false,
        }
    }

    #[test]
    fn start_pattern() {
        let s = start_set();
        assert_eq!(s.len(), 21);
        assert_eq!(s[0], MatterPoint::ORIGIN);
        assert!(s[..13].iter().all(|m| m.radius_sq() < 1.0));
        assert!(s[13..].iter().all(|m| m.psi1().is_some()));
        assert!(s.iter().any(|m| m.psi2 < 0.0) && s.iter().any(|m| m.psi2 > 0.0));
    }

    #[test]
    fn weak_coupling_stays_normal() {
        let p = reference_params();
        let gc = critical_coupling_g1c(&p).unwrap();
        let p = p.with_couplings(0.1 * gc, 0.1 * gc);
        let m = minimize_reduced(&p, MatterPoint::ORIGIN, &SolverOptions::default()).unwrap();
        assert!(m.converged);
        assert_eq!(m.point, MatterPoint::ORIGIN);
    }

    #[test]
    fn disk_chart_matches_disk_derivatives() {
        let mut p = reference_params().with_couplings(1.3, 0.8);
        (p.chi1, p.chi2) = (0.4, 0.7);
        for m in [MatterPoint::new(0.3, -0.2), MatterPoint::new(-0.6, 0.5)] {
            let z = Vector3::new(m.psi1().unwrap(), m.psi2, m.psi3);
            let a = Chart::new(0).local(&p, &z).unwrap();
            let b = crate::landscape::reduced_local(&p, m).unwrap();
            assert!((a.energy - b.energy).abs() < 1e-13);
            assert!((a.gradient - b.gradient).amax() < 1e-12);
            assert!((a.hessian - b.hessian).amax() < 1e-11);
        }
    }

    #[test]
    fn other_charts_agree_with_finite_differences() {
        let mut p = reference_params().with_couplings(0.9, 1.4);
        (p.chi1, p.chi2) = (0.3, 0.2);
        let z0 = Vector3::new(0.1, 0.8, -0.3).normalize();
        for dep in 1..3 {
            let ch = Chart::new(dep);
            let mut z = z0;
            if z[dep] < 0.0 {
                z = -z;
            }
            let l = ch.local(&p, &z).unwrap();
            let x = ch.coords(&z);
            let h = 1e-6;
            for k in 0..2 {
                let mut e = Vector2::zeros();
                e[k] = h;
                let fp = ch.local(&p, &ch.point(x + e).unwrap()).unwrap();
                let fm = ch.local(&p, &ch.point(x - e).unwrap()).unwrap();
                assert!(((fp.energy - fm.energy) / (2.0 * h) - l.gradient[k]).abs() < 1e-7);
                let col = (fp.gradient - fm.gradient) / (2.0 * h);
                assert!((col - l.hessian.column(k)).amax() < 1e-6);
            }
        }
    }

    #[test]
    fn minimum_on_the_circle() {
        // g1 = 0: the state with psi1 = 0 wins; on the circle
        // R = delta t + Delta (1 - t) - K t (1 - t), t = Psi2^2
        let p = ModelParams {
            delta: 0.1,
            big_delta: 1.0,
            omega1: 1.0,
            omega2: 0.9,
            g1: 0.0,
            g2: 1.5,
            chi1: 0.0,
            chi2: 0.0,
            kappa1: 0.0,
            kappa2: 0.0,
            kappa3: 0.0,
        };
        let k = 4.0 * p.g2 * p.g2 / p.omega2;
        let t = (k + p.big_delta - p.delta) / (2.0 * k);
        let e = p.delta * t + p.big_delta * (1.0 - t) - k * t * (1.0 - t);
        let sol = solve_ground_state(&p).unwrap();
        assert!(sol.converged && sol.on_boundary && !sol.degenerate);
        assert_eq!(sol.phase, Phase::Superradiant);
        assert!((sol.e0 - e).abs() < 1e-12, "{} vs {e}", sol.e0);
        assert!((sol.psi2.abs() - t.sqrt()).abs() < 1e-8);
        assert!(sol.psi1 < 1e-8);
    }

    #[test]
    fn circle_minimum_found_just_above_threshold() {
        // on the circle the minimum of Delta - (Delta - delta) t - K t (1 - t)
        // reaches zero at (K + Delta - delta)^2 = 4 K Delta
        let mut p = ModelParams {
            delta: 0.1,
            big_delta: 1.0,
            omega1: 1.0,
            omega2: 0.9,
            g1: 0.0,
            g2: 0.0,
            chi1: 0.0,
            chi2: 0.0,
            kappa1: 0.0,
            kappa2: 0.0,
            kappa3: 0.0,
        };
        let s = p.big_delta - p.delta;
        let b = 2.0 * s - 4.0 * p.big_delta;
        let kc = (-b + (b * b - 4.0 * s * s).sqrt()) / 2.0;
        let g2c = (kc * p.omega2 / 4.0).sqrt();
        p.g2 = 0.999 * g2c;
        assert_eq!(solve_ground_state(&p).unwrap().phase, Phase::Normal);
        p.g2 = 1.001 * g2c;
        assert_eq!(solve_ground_state(&p).unwrap().phase, Phase::Superradiant);
    }

    #[test]
    fn unstable_origin_is_left() {
        let p = reference_params();
        let gc = critical_coupling_g1c(&p).unwrap();
        let p = p.with_couplings(1.2 * gc, 0.0);
        let m = minimize_reduced(&p, MatterPoint::ORIGIN, &SolverOptions::default()).unwrap();
        assert!(m.converged);
        assert!(m.point.psi3.abs() > 0.1);
        assert!(m.energy < 0.0);
    }

    #[test]
    fn reference_normal_and_superradiant_points() {
        let p = reference_params();
        let b = trk_bounds(&p, 1.0);
        let s = solve_ground_state(&p.with_couplings(0.2 * b.g1_trk, 0.2 * b.g2_trk)).unwrap();
        assert_eq!(s.phase, Phase::Normal);
        assert_eq!(s.e0, 0.0);

        let s = solve_ground_state(&p.with_couplings(1.5 * b.g1_trk, 1.5 * b.g2_trk)).unwrap();
        assert_eq!(s.phase, Phase::Superradiant);
        assert!(s.converged);
        let d = classify_phase(&s, 1e-8);
        assert!(d.psi2_active && d.psi3_active && d.phi1_active && d.phi2_active);
        assert!(s.psi3 >= 0.0);
        assert!((s.psi1 - (1.0 - s.psi2.powi(2) - s.psi3.powi(2)).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn classification_thresholds() {
        assert_eq!(classify_phase(&bare(0.0, 0.0), 1e-8).phase, Phase::Normal);
        let d = classify_phase(&bare(0.3, 0.4), 1e-8);
        assert_eq!(d.phase, Phase::Superradiant);
        assert!(d.psi2_active && d.psi3_active);
        assert!(!d.phi1_active);
    }

    #[test]
    fn rejects_start_outside_disk() {
        let p = reference_params();
        assert!(minimize_reduced(&p, MatterPoint::new(1.0, 1.0), &SolverOptions::default()).is_err());
    }

    #[test]
    fn deterministic() {
        let p = reference_params().with_couplings(1.4, 1.1);
        let a = solve_ground_state(&p).unwrap();
        let b = solve_ground_state(&p).unwrap();
        assert_eq!(a.e0.to_bits(), b.e0.to_bits());
        assert_eq!(a.psi2.to_bits(), b.psi2.to_bits());
    }
}
