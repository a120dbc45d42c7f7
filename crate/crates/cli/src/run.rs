use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use lambda_dicke::config::{self, Document, ParamSource, Record};
use lambda_dicke::edoracle::{self, AdaptiveCutoff, EdConfig, EdResult, EigenOptions, ParityKind};
use lambda_dicke::landscape::{critical_coupling_g1c, normal_state_stable};
use lambda_dicke::model::{from_atomic, trk_bounds, AtomicConfig, AtomicMapping, ModelParams, TrkBounds};
use lambda_dicke::nogo::{self, ModelSampler, MultiLevelModel};
use lambda_dicke::phasemap::{self, fmt_f64, linear_axis, PhaseMapOptions, Ray, ScanMode};
use lambda_dicke::solver::{solve_ground_state_with, Phase};

use crate::output;
use crate::{Cli, Command};

/// Tolerance names accepted by `--tol`.
pub const TOL_NAMES: [&str; 12] = [
    "grad_tol",
    "step_tol",
    "sr_threshold",
    "tie_tol",
    "bisect_tol",
    "jump_tol",
    "jump_stability",
    "ray_step",
    "ray_max",
    "residual_tol",
    "cutoff_energy_tol",
    "sumrule_tol",
];

const SUMRULE_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub param_file: Option<PathBuf>,
    pub output_path: Option<PathBuf>,
    pub overrides: Vec<(String, String)>,
    pub tolerances: BTreeMap<String, f64>,
    pub seed: u64,
    pub gnuplot: bool,
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> Result<Self> {
        let overrides = cli
            .common
            .set
            .iter()
            .map(|s| config::parse_assignment(s))
            .collect::<Result<Vec<_>, _>>()?;
        let mut tolerances = BTreeMap::new();
        for s in &cli.common.tol {
            let (k, v) = config::parse_assignment(s)?;
            if !TOL_NAMES.contains(&k.as_str()) {
                bail!(invalid(format!("unknown tolerance `{k}`; known: {}", TOL_NAMES.join(", "))));
            }
            let v: f64 = v
                .parse()
                .map_err(|_| invalid(format!("tolerance `{k}`: cannot parse `{v}`")))?;
            if !(v.is_finite() && v > 0.0) {
                bail!(invalid(format!("tolerance `{k}` must be positive and finite")));
            }
            tolerances.insert(k, v);
        }
        Ok(Self {
            command: cli.command,
            param_file: cli.common.params,
            output_path: cli.common.out,
            overrides,
            tolerances,
            seed: cli.common.seed,
            gnuplot: cli.common.gnuplot,
        })
    }

    fn tol(&self, name: &str) -> Option<f64> {
        self.tolerances.get(name).copied()
    }

    fn phasemap_options(&self) -> PhaseMapOptions {
        let mut o = PhaseMapOptions::default();
        let s = &mut o.solver;
        for (name, slot) in [
            ("grad_tol", &mut s.grad_tol),
            ("step_tol", &mut s.step_tol),
            ("sr_threshold", &mut s.sr_threshold),
            ("tie_tol", &mut s.tie_tol),
        ] {
            if let Some(v) = self.tolerances.get(name) {
                *slot = *v;
            }
        }
        for (name, slot) in [
            ("bisect_tol", &mut o.bisect_tol),
            ("jump_tol", &mut o.jump_tol),
            ("jump_stability", &mut o.jump_stability),
            ("ray_step", &mut o.ray_step),
            ("ray_max", &mut o.ray_max),
        ] {
            if let Some(v) = self.tolerances.get(name) {
                *slot = *v;
            }
        }
        o
    }

    fn eigen_options(&self) -> EigenOptions {
        let mut o = EigenOptions::default();
        if let Some(v) = self.tol("residual_tol") {
            o.residual_tol = v;
        }
        o
    }

    fn tolerance_lines(&self) -> Vec<(String, String)> {
        self.tolerances
            .iter()
            .map(|(k, v)| (format!("tol.{k}"), fmt_f64(*v)))
            .collect()
    }
}

/// Validation problems raised by the CLI itself rather than the library.
#[derive(Debug)]
struct InvalidInput(String);

impl std::fmt::Display for InvalidInput {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InvalidInput {}

fn invalid(msg: String) -> anyhow::Error {
    anyhow!(InvalidInput(msg))
}

/// 2 for numerical failures, 1 for everything else.
pub fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<lambda_dicke::Error>() {
        Some(err) if err.is_numerical() => 2,
        _ => 1,
    }
}

fn load_doc(cfg: &RunConfig) -> Result<Document> {
    let path = cfg
        .param_file
        .as_ref()
        .ok_or_else(|| invalid(format!("`{}` needs --params FILE", cfg.command.name())))?;
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    Ok(Document::parse(&text).with_context(|| path.display().to_string())?)
}

struct Loaded {
    params: ModelParams,
    atomic: Option<(AtomicConfig, AtomicMapping)>,
    trk: TrkBounds,
}

fn load_params(cfg: &RunConfig) -> Result<Loaded> {
    let mut doc = load_doc(cfg)?;
    let allowed: &[&str] = if config::is_atomic(&doc) {
        &AtomicConfig::KEYS
    } else {
        &ModelParams::KEYS
    };
    config::apply_overrides(&mut doc, &cfg.overrides, allowed)?;
    let loaded = match config::read_params(&doc)? {
        ParamSource::Abstract(p) => Loaded {
            params: p.validated()?,
            atomic: None,
            trk: trk_bounds(&p, p.kappa1),
        },
        ParamSource::Atomic(a) => {
            let m = from_atomic(&a)?;
            Loaded {
                params: m.params,
                atomic: Some((a, m)),
                trk: m.trk,
            }
        }
    };
    Ok(loaded)
}

fn param_lines(l: &Loaded) -> Vec<(String, String)> {
    let mut out = Vec::new();
    if let Some((a, _)) = &l.atomic {
        let v = |x: &[f64; 3]| x.iter().map(|c| fmt_f64(*c)).collect::<Vec<_>>().join(",");
        out.push(("atomic.kappa".into(), fmt_f64(a.kappa)));
        for (k, x) in [("eps1", &a.eps1), ("eps2", &a.eps2), ("d31", &a.d31), ("d32", &a.d32)] {
            out.push((format!("atomic.{k}"), v(x)));
        }
    }
    for key in ModelParams::KEYS {
        out.push((key.to_string(), fmt_f64(l.params.get(key).unwrap())));
    }
    out.push(("g1_trk".into(), fmt_f64(l.trk.g1_trk)));
    out.push(("g2_trk".into(), fmt_f64(l.trk.g2_trk)));
    out
}

/// Plain-number rendering for the summary line; `-0` prints as `0`.
/// Shortest round-trip form for summaries; exponent notation outside [1e-4, 1e6).
fn short(x: f64) -> String {
    let x = x + 0.0;
    if x == 0.0 || !x.is_finite() || (1e-4..1e6).contains(&x.abs()) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn ratio(g: f64, bound: f64) -> f64 {
    if bound > 0.0 {
        g / bound
    } else {
        f64::NAN
    }
}

pub fn run(cfg: &RunConfig) -> Result<String> {
    if cfg.gnuplot {
        if !matches!(cfg.command, Command::Scan { .. } | Command::Sweep { .. }) {
            bail!(invalid("--gnuplot is available for scan and sweep only".into()));
        }
        if cfg.output_path.is_none() {
            bail!(invalid("--gnuplot needs --out PATH".into()));
        }
    }
    match cfg.command.clone() {
        Command::Minimize => minimize(cfg),
        Command::Scan {
            n1,
            n2,
            g1_max,
            g2_max,
            columns,
        } => scan(cfg, n1, n2, g1_max, g2_max, columns),
        Command::Boundary { g2 } => boundary(cfg, g2.g2, g2.g2_trk),
        Command::Tricritical { g2_lo, g2_hi, width } => tricritical(cfg, g2_lo, g2_hi, width),
        Command::Sweep { chi, kappa, rays } => sweep(cfg, &chi, &kappa, &rays),
        Command::MapAtomic => map_atomic(cfg),
        Command::Nogo { random } => match random {
            Some(count) => nogo_random(cfg, count),
            None => nogo_file(cfg),
        },
        Command::Ed {
            n_atoms,
            cutoff1,
            cutoff2,
            cap,
        } => ed(cfg, n_atoms, cutoff1, cutoff2, cap),
        Command::Sumrule { count, max_dim } => sumrule(cfg, count, max_dim),
    }
}

fn emit_record(cfg: &RunConfig, resolved: &[(String, String)], record: &Record) -> Result<()> {
    let mut lines = resolved.to_vec();
    lines.extend(cfg.tolerance_lines());
    output::emit(
        cfg.output_path.as_deref(),
        &output::header(cfg.command.name(), &lines),
        &record.to_string(),
    )
}

fn minimize(cfg: &RunConfig) -> Result<String> {
    let l = load_params(cfg)?;
    let opts = cfg.phasemap_options();
    let sol = solve_ground_state_with(&l.params, &opts.solver)?;
    let mut r = Record::new();
    r.text("phase", sol.phase)
        .real("e0", sol.e0 + 0.0)
        .real("psi1", sol.psi1)
        .real("psi2", sol.psi2)
        .real("psi3", sol.psi3)
        .real("phi1", sol.phi1)
        .real("phi2", sol.phi2)
        .real("order_parameter", sol.order_parameter())
        .text("converged", sol.converged)
        .text("degenerate", sol.degenerate)
        .text("on_boundary", sol.on_boundary)
        .text("starts_used", sol.starts_used)
        .real("g1_over_trk", ratio(l.params.g1, l.trk.g1_trk))
        .real("g2_over_trk", ratio(l.params.g2, l.trk.g2_trk));
    match critical_coupling_g1c(&l.params) {
        Ok(g) => r.real("g1c", g),
        Err(_) => r.text("g1c", "undefined"),
    };
    r.text("normal_state_stable", normal_state_stable(&l.params)?);
    emit_record(cfg, &param_lines(&l), &r)?;
    Ok(format!("phase={} e0={}", sol.phase, short(sol.e0)))
}

fn scan(cfg: &RunConfig, n1: usize, n2: usize, g1_max: Option<f64>, g2_max: Option<f64>, columns: bool) -> Result<String> {
    let l = load_params(cfg)?;
    if n1 < 2 || n2 < 2 {
        bail!(invalid("grid needs at least 2 points per axis".into()));
    }
    let g1_max = g1_max.unwrap_or(2.0 * l.trk.g1_trk);
    let g2_max = g2_max.unwrap_or(2.0 * l.trk.g2_trk);
    if !(g1_max > 0.0 && g2_max > 0.0) {
        bail!(invalid("grid extent must be positive (TRK bounds vanish; pass --g1-max/--g2-max)".into()));
    }
    let mode = if columns { ScanMode::Columns } else { ScanMode::Rows };
    let d = phasemap::scan_grid(
        &l.params,
        &linear_axis(g1_max, n1),
        &linear_axis(g2_max, n2),
        mode,
        &cfg.phasemap_options(),
    )?;
    for idx in &d.reentrant {
        eprintln!("warning: line {idx} changes phase label more than once");
    }

    let mut lines = param_lines(&l);
    lines.extend(cfg.tolerance_lines());
    lines.push(("grid".into(), format!("{n1}x{n2}")));
    lines.push(("mode".into(), if columns { "columns" } else { "rows" }.into()));
    let header = output::header(cfg.command.name(), &lines);
    let mut grid = Vec::new();
    phasemap::write_grid_csv(&mut grid, &d, &l.trk)?;
    let mut bnd = Vec::new();
    phasemap::write_boundary_csv(&mut bnd, &d.boundary)?;
    output::emit(cfg.output_path.as_deref(), &header, &String::from_utf8(grid)?)?;
    if let Some(out) = &cfg.output_path {
        let bpath = output::sibling(out, "boundary", "csv");
        output::write_file(&bpath, &header, &String::from_utf8(bnd)?)?;
        if cfg.gnuplot {
            fs::write(output::sibling(out, "plot", "gp"), output::gnuplot_grid(out, &bpath))?;
        }
    }

    let sr = d
        .cells
        .iter()
        .flatten()
        .flatten()
        .filter(|c| c.phase == Phase::Superradiant)
        .count();
    let tri = d
        .tricritical
        .map_or_else(|| "none".to_string(), |t| short(ratio(t.g2, l.trk.g2_trk)));
    Ok(format!(
        "cells={} superradiant={} failed={} boundary_points={} tricritical_g2_over_trk={}",
        n1 * n2,
        sr,
        d.failed_cells(),
        d.boundary.len(),
        tri
    ))
}

fn boundary(cfg: &RunConfig, g2: Option<f64>, g2_trk: Option<f64>) -> Result<String> {
    let l = load_params(cfg)?;
    let g2 = match (g2, g2_trk) {
        (Some(g), _) => g,
        (None, Some(f)) => f * l.trk.g2_trk,
        (None, None) => unreachable!("clap enforces one of --g2/--g2-trk"),
    };
    let opts = cfg.phasemap_options();
    let p = phasemap::probe_row(&l.params, g2, &opts)?;
    let mut r = Record::new();
    r.real("g2", p.g2_fixed)
        .real("g2_over_trk", ratio(p.g2_fixed, l.trk.g2_trk))
        .real("g1_star", p.g1_star)
        .real("g1_star_over_trk", ratio(p.g1_star, l.trk.g1_trk))
        .real("jump", p.jump)
        .reals("jump_refinement", &p.jump_refinement)
        .text("order", p.order);
    match p.g1c {
        Some(g) => r.real("g1c", g),
        None => r.text("g1c", "undefined"),
    };
    r.text("at_instability", p.at_instability(opts.bisect_tol));
    emit_record(cfg, &param_lines(&l), &r)?;
    Ok(format!(
        "order={} g1_star={} g1_star_over_trk={} jump={}",
        p.order,
        short(p.g1_star),
        short(ratio(p.g1_star, l.trk.g1_trk)),
        short(p.jump)
    ))
}

fn tricritical(cfg: &RunConfig, lo: f64, hi: f64, width: f64) -> Result<String> {
    let l = load_params(cfg)?;
    let s = l.trk.g2_trk;
    if !(s > 0.0) {
        bail!(invalid("tricritical search is bracketed in units of g2_trk, which vanishes here".into()));
    }
    let t = phasemap::locate_tricritical(&l.params, lo * s, hi * s, width * s, &cfg.phasemap_options())?;
    let mut r = Record::new();
    r.real("g1", t.g1)
        .real("g2", t.g2)
        .real("g1_over_trk", ratio(t.g1, l.trk.g1_trk))
        .real("g2_over_trk", ratio(t.g2, s))
        .real("second_side_g2", t.second_side_g2)
        .real("first_side_g2", t.first_side_g2);
    match t.g1c {
        Some(g) => r.real("g1c", g),
        None => r.text("g1c", "undefined"),
    };
    r.text("matches_g1c", t.matches_g1c);
    emit_record(cfg, &param_lines(&l), &r)?;
    Ok(format!(
        "tricritical g1_over_trk={} g2_over_trk={}",
        short(ratio(t.g1, l.trk.g1_trk)),
        short(ratio(t.g2, s))
    ))
}

fn sweep(cfg: &RunConfig, chi: &[f64], kappa: &[f64], rays: &[String]) -> Result<String> {
    let l = load_params(cfg)?;
    let rays = rays
        .iter()
        .map(|s| Ray::parse(s).ok_or_else(|| invalid(format!("unknown ray `{s}` (use g1, g2, diag)"))))
        .collect::<Result<Vec<_>>>()?;
    let rows = phasemap::sweep_chi_kappa(&l.params, chi, kappa, &rays, &cfg.phasemap_options())?;
    let mut lines = param_lines(&l);
    lines.extend(cfg.tolerance_lines());
    let mut body = Vec::new();
    phasemap::write_sweep_csv(&mut body, &rows)?;
    output::emit(
        cfg.output_path.as_deref(),
        &output::header(cfg.command.name(), &lines),
        &String::from_utf8(body)?,
    )?;
    if let (true, Some(out)) = (cfg.gnuplot, &cfg.output_path) {
        fs::write(output::sibling(out, "plot", "gp"), output::gnuplot_sweep(out))?;
    }
    let absent = rows.iter().filter(|r| r.g_c.is_none()).count();
    Ok(format!("entries={} absent={}", rows.len(), absent))
}

fn map_atomic(cfg: &RunConfig) -> Result<String> {
    let l = load_params(cfg)?;
    let Some((_, m)) = &l.atomic else {
        bail!(invalid("map-atomic needs an atomic-mode parameter file (kappa, eps1, eps2, d31, d32)".into()));
    };
    let mut r = Record::new();
    r.real("alpha", m.alpha)
        .real("alpha11", m.projections[0][0])
        .real("alpha12", m.projections[0][1])
        .real("alpha21", m.projections[1][0])
        .real("alpha22", m.projections[1][1])
        .params(&m.params)
        .real("g1_trk", m.trk.g1_trk)
        .real("g2_trk", m.trk.g2_trk)
        .text("trk_compliant", m.compliance.compliant)
        .real("slack1", m.compliance.slack1)
        .real("slack2", m.compliance.slack2);
    emit_record(cfg, &param_lines(&l), &r)?;
    Ok(format!(
        "chi1={} chi2={} kappa3={} trk_compliant={}",
        short(m.params.chi1),
        short(m.params.chi2),
        short(m.params.kappa3),
        m.compliance.compliant
    ))
}

fn model_lines(m: &MultiLevelModel) -> Vec<(String, String)> {
    let n = m.levels();
    let mut upper = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            upper.push(fmt_f64(m.couplings()[(i, j)]));
        }
    }
    vec![
        ("energies".into(), m.energies().iter().map(|e| fmt_f64(*e)).collect::<Vec<_>>().join(",")),
        ("omega".into(), fmt_f64(m.omega())),
        ("kappa".into(), fmt_f64(m.kappa())),
        ("g".into(), upper.join(",")),
    ]
}

fn nogo_file(cfg: &RunConfig) -> Result<String> {
    let mut doc = load_doc(cfg)?;
    config::apply_overrides(&mut doc, &cfg.overrides, &config::MULTILEVEL_KEYS)?;
    let m = config::read_multilevel(&doc)?;
    let v = nogo::check_positive_definite(&m);
    let mut r = Record::new();
    r.text("levels", m.levels())
        .text("positive_definite", v.positive_definite)
        .real("x", v.x)
        .real("omega", m.omega())
        .reals("minors", &v.minors)
        .real("min_eigenvalue", v.min_eigenvalue)
        .text("trk_satisfied", v.trk_satisfied);
    let ge = match v.x_at_least_omega {
        Some(b) => b.to_string(),
        None => "n/a (sum rule violated)".to_string(),
    };
    r.text("x_ge_omega", &ge);
    emit_record(cfg, &model_lines(&m), &r)?;
    let verdict = if v.positive_definite {
        "positive-definite"
    } else {
        "not positive-definite"
    };
    Ok(format!("{verdict}, X={}, X≥omega: {ge}", short(v.x)))
}

fn nogo_random(cfg: &RunConfig, count: usize) -> Result<String> {
    if !cfg.overrides.is_empty() {
        bail!(invalid("--set has no effect with --random".into()));
    }
    let sampler = ModelSampler::default();
    let models = nogo::random_compliant_models(cfg.seed, count, &sampler);
    let mut body = String::from("index,levels,positive_definite,x,omega,min_eigenvalue,x_ge_omega\n");
    let (mut pd, mut ge) = (0, 0);
    for (i, m) in models.iter().enumerate() {
        let v = nogo::check_positive_definite(m);
        pd += v.positive_definite as usize;
        ge += (v.x_at_least_omega == Some(true)) as usize;
        body.push_str(&format!(
            "{i},{},{},{},{},{},{}\n",
            m.levels(),
            v.positive_definite,
            fmt_f64(v.x),
            fmt_f64(m.omega()),
            fmt_f64(v.min_eigenvalue),
            v.x_at_least_omega.map_or("n/a".to_string(), |b| b.to_string())
        ));
    }
    let lines = vec![
        ("seed".to_string(), cfg.seed.to_string()),
        ("count".to_string(), count.to_string()),
        ("max_levels".to_string(), sampler.max_levels.to_string()),
        ("energy_range".to_string(), fmt_f64(sampler.energy_range)),
    ];
    output::emit(cfg.output_path.as_deref(), &output::header(cfg.command.name(), &lines), &body)?;
    Ok(format!("models={count} positive_definite={pd} x_ge_omega={ge}"))
}

fn ed_record(res: &EdResult, mf_e0: Option<f64>) -> Record {
    let mut r = Record::new();
    r.text("n_atoms", res.n_atoms)
        .text("cutoff1", res.cutoff1)
        .text("cutoff2", res.cutoff2)
        .text("dim", res.dim)
        .text("method", format!("{:?}", res.method))
        .real("ground_energy", res.ground_energy)
        .real("ground_energy_per_atom", res.ground_energy_per_atom)
        .real("parity1_expect", res.parity1_expect)
        .real("parity2_expect", res.parity2_expect)
        .real("parity3_expect", res.parity3_expect);
    for k in ParityKind::ALL {
        r.real(&format!("commutator_norm.{}", k.label()), res.commutator_norms[k.label()]);
    }
    r.real("h_norm", res.h_norm)
        .real("boson_occupation1", res.boson_occupations.0)
        .real("boson_occupation2", res.boson_occupations.1)
        .real("level_population1", res.level_populations.0)
        .real("level_population2", res.level_populations.1)
        .real("level_population3", res.level_populations.2)
        .real("tail_weight1", res.tail_weights.0)
        .real("tail_weight2", res.tail_weights.1)
        .text("cutoff_adequate", res.cutoff_adequate);
    if let Some(e) = mf_e0 {
        r.real("mean_field_e0", e);
    }
    r
}

fn ed(cfg: &RunConfig, n_atoms: usize, c1: Option<usize>, c2: Option<usize>, cap: usize) -> Result<String> {
    let l = load_params(cfg)?;
    let eig = cfg.eigen_options();
    let res = match (c1, c2) {
        (Some(c1), Some(c2)) => {
            let mut ed_cfg = EdConfig::new(n_atoms, c1, c2, l.params);
            ed_cfg.dim_cap = cap;
            edoracle::ground_state_with(&ed_cfg, &eig)?
        }
        (None, None) => {
            let mut adapt = AdaptiveCutoff::default();
            if let Some(v) = cfg.tol("cutoff_energy_tol") {
                adapt.energy_tol = v;
            }
            edoracle::ground_state_adaptive(n_atoms, &l.params, &adapt, &eig, cap)?
        }
        _ => bail!(invalid("give both --cutoff1 and --cutoff2, or neither for adaptive cutoffs".into())),
    };
    let mf = solve_ground_state_with(&l.params, &cfg.phasemap_options().solver).ok();
    emit_record(cfg, &param_lines(&l), &ed_record(&res, mf.map(|s| s.e0)))?;
    if !res.cutoff_adequate {
        eprintln!("warning: boson cutoff inadequate (tail weight above threshold)");
    }
    Ok(format!(
        "E/N={} cutoffs=({},{}) dim={} adequate={}",
        short(res.ground_energy_per_atom),
        res.cutoff1,
        res.cutoff2,
        res.dim,
        res.cutoff_adequate
    ))
}

fn sumrule(cfg: &RunConfig, count: usize, max_dim: usize) -> Result<String> {
    if !cfg.overrides.is_empty() {
        bail!(invalid("sumrule takes no parameter overrides".into()));
    }
    let tol = cfg.tol("sumrule_tol").unwrap_or(SUMRULE_TOL);
    let samples = nogo::sum_rule_survey(cfg.seed, count, max_dim)?;
    let mut body = String::from("index,dim,level,residual,relative_residual\n");
    for (i, s) in samples.iter().enumerate() {
        body.push_str(&format!(
            "{i},{},{},{},{}\n",
            s.dim,
            s.level,
            fmt_f64(s.residual),
            fmt_f64(s.relative())
        ));
    }
    let worst = samples.iter().map(|s| s.relative()).fold(0.0, f64::max);
    let mut lines = vec![
        ("seed".to_string(), cfg.seed.to_string()),
        ("count".to_string(), count.to_string()),
        ("max_dim".to_string(), max_dim.to_string()),
    ];
    lines.extend(cfg.tolerance_lines());
    output::emit(cfg.output_path.as_deref(), &output::header(cfg.command.name(), &lines), &body)?;
    Ok(format!(
        "pairs={count} max_relative_residual={} pass={}",
        short(worst),
        worst < tol
    ))
}
