//! Run configuration, the verification report and the CSV/JSON dumps behind
//! the `nielsen-section` binary.

use std::fmt::Write as _;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::charts::{Chart, ChartError, ChartMap, Mat3, MapKind, Point, RadialProfile, TorusChart};
use crate::crosshom::{self, SamplePoint, TwistSettings, TwistVector};
use crate::curve;
use crate::freegroup::{Factor, NielsenAuto, NielsenGen, DEFAULT_MAX_RANK};
use crate::loopclass::{self, LoopClass, MatrixPath};
use crate::modgroup::{self, GeometricModel, Lift, MappingClass};
use crate::smooth::{BumpProfile, SmoothError, TwistProfile};

pub const REPORT_SCHEMA: u32 = 1;

/// Names of the checks, in report order.
pub const CHECK_NAMES: [&str; 9] = [
    "psi_profile",
    "jacobians",
    "cover_equivariance",
    "loop_class_oracle",
    "rho_realization",
    "twist_vectors",
    "g_path_structure",
    "cocycle_identity",
    "group_model",
];

const PSI_GRID: usize = 10_000;
const PSI_FD_STEP: f64 = 1e-6;
const PSI_FD_TOL: f64 = 1e-6;
const EXACT_TOL: f64 = 1e-12;
const JACOBIAN_POINTS: usize = 1000;
const JACOBIAN_FD_STEP: f64 = 1e-6;
const EQUIVARIANCE_POINTS: usize = 1000;
const LOOP_TRIALS: usize = 20;
const HOMOTOPY_GRID: usize = 100;
const G_PATH_TOL: f64 = 1e-9;
const COCYCLE_POINTS: usize = 200;
const COCYCLE_TOL: f64 = 1e-8;
const GROUP_TRIALS: usize = 200;
const CALIBRATION_TRIALS: usize = 20;
/// Distance kept from chart boundaries when sampling interior points.
const INTERIOR_MARGIN: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error(transparent)]
    Profile(#[from] SmoothError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Text,
}

impl FromStr for Format {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(Format::Json),
            "text" => Ok(Format::Text),
            _ => Err(ConfigError::Invalid(format!("unknown format {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub n: usize,
    pub seed: u64,
    pub format: Format,
    /// Polyline vertices per chart piece of a loop.
    pub loop_samples: usize,
    /// Base grid of matrix paths.
    pub path_grid: usize,
    pub tol_fd: f64,
    pub continuity: f64,
    pub identity_tol: f64,
    pub bump: BumpProfile,
    pub twist: TwistProfile,
    /// Record wall-clock time per check (makes reports non-reproducible).
    pub timing: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            n: 3,
            seed: 0,
            format: Format::Json,
            loop_samples: curve::DEFAULT_SAMPLES,
            path_grid: loopclass::DEFAULT_GRID,
            tol_fd: 1e-5,
            continuity: loopclass::CONTINUITY_THRESHOLD,
            identity_tol: loopclass::POLE_TOL,
            bump: BumpProfile::default(),
            twist: TwistProfile::default(),
            timing: true,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if self.n < 2 || self.n > DEFAULT_MAX_RANK {
            return bad(format!("rank {} outside 2..={DEFAULT_MAX_RANK}", self.n));
        }
        for (name, d) in [("loop samples", self.loop_samples), ("path grid", self.path_grid)] {
            if d < 2 || !d.is_power_of_two() {
                return bad(format!("{name} {d} must be a power of two >= 2"));
            }
        }
        for (name, t) in [("tol-fd", self.tol_fd), ("identity tolerance", self.identity_tol)] {
            if !(t > 0.0 && t.is_finite()) {
                return bad(format!("{name} {t} must be positive"));
            }
        }
        if !(self.continuity > 0.0 && self.continuity < 1.0) {
            return bad(format!("continuity threshold {} outside (0, 1)", self.continuity));
        }
        self.bump.validate()?;
        self.twist.validate()?;
        Ok(())
    }

    pub fn twist_settings(&self) -> TwistSettings {
        TwistSettings {
            samples: self.loop_samples,
            grid: self.path_grid,
            budget: loopclass::DEFAULT_REFINEMENT_BUDGET,
            continuity: self.continuity,
            pole_tol: self.identity_tol,
        }
    }

    /// The map of `kind` built from the configured profiles.
    pub fn chart_map(&self, kind: MapKind) -> Result<ChartMap, ChartError> {
        let profile = match kind {
            MapKind::F { .. } | MapKind::G { .. } => RadialProfile::Bump(self.bump),
            MapKind::Twist { .. } => RadialProfile::Step(self.twist),
        };
        ChartMap::new(kind, profile)
    }

    fn tune(&self, path: MatrixPath) -> MatrixPath {
        path.with_grid(self.path_grid).with_continuity(self.continuity).with_pole_tol(self.identity_tol)
    }

    fn rng(&self, salt: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Error => "ERROR",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub status: Status,
    pub measured: Option<f64>,
    pub threshold: f64,
    pub runtime_ms: Option<f64>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: u32,
    pub config: RunConfig,
    pub passed: bool,
    pub checks: Vec<CheckRecord>,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(s: &str) -> Result<Report, serde_json::Error> {
        serde_json::from_str(s)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let measured = c.measured.map_or_else(|| "-".to_string(), |m| format!("{m:.3e}"));
            let _ = write!(out, "{:<5} {:<20} measured={measured} threshold={:.3e}", c.status, c.name, c.threshold);
            if let Some(ms) = c.runtime_ms {
                let _ = write!(out, " [{ms:.1} ms]");
            }
            if !c.detail.is_empty() {
                let _ = write!(out, "  {}", c.detail);
            }
            out.push('\n');
        }
        let passed = self.checks.iter().filter(|c| c.status == Status::Pass).count();
        let _ = writeln!(out, "{passed}/{} checks passed", self.checks.len());
        out
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            1
        }
    }
}

/// Result of one check before timing is attached.
struct Outcome {
    measured: f64,
    threshold: f64,
    pass: bool,
    detail: String,
}

type CheckResult = Result<Outcome, String>;

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn max_abs(m: &Mat3) -> f64 {
    m.iter().fold(0.0f64, |a, v| a.max(v.abs()))
}

/// Uniform points of a chart's interior, at least `INTERIOR_MARGIN` from its boundary.
pub fn sample_interior<R: Rng + ?Sized>(chart: &Chart, rng: &mut R) -> Point {
    loop {
        let p = match chart {
            Chart::Torus(_) => Point::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(0.0..1.0)),
            Chart::Ball(_) => Point::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            Chart::Collar(_) => Point::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)),
        };
        if interior_distance(chart, &p) > INTERIOR_MARGIN {
            return p;
        }
    }
}

/// Distance to the nearest boundary component (negative outside).
fn interior_distance(chart: &Chart, p: &Point) -> f64 {
    match chart {
        Chart::Torus(_) => {
            let dz = TorusChart::height_offset(p.z);
            let ball = (p.x * p.x + p.y * p.y + dz * dz).sqrt() - TorusChart::BALL_RADIUS;
            chart.outer_distance(p).min(ball)
        }
        Chart::Ball(b) => b
            .removed_balls()
            .iter()
            .map(|rb| (p - rb.center).norm() - rb.radius)
            .fold(chart.outer_distance(p), f64::min),
        Chart::Collar(_) => chart.outer_distance(p).min(p.norm() - crate::charts::CollarChart::INNER_RADIUS),
    }
}

fn check_psi(cfg: &RunConfig) -> CheckResult {
    let p = cfg.bump;
    let mut exact_err = 0.0f64;
    let mut monotone_violations = 0;
    let mut sign_violations = 0;
    let mut fd_err = 0.0f64;
    let mut prev = f64::INFINITY;
    for k in 0..=PSI_GRID {
        let r = k as f64 / PSI_GRID as f64;
        let v = crate::smooth::psi(&p, r).map_err(err)?;
        let d = crate::smooth::psi_prime(&p, r).map_err(err)?;
        if r <= 1.0 / 3.0 {
            exact_err = exact_err.max((v - 1.0).abs());
        }
        if r >= p.support_end {
            exact_err = exact_err.max(v.abs());
        }
        if v > prev {
            monotone_violations += 1;
        }
        if d > 0.0 {
            sign_violations += 1;
        }
        prev = v;
        if r >= PSI_FD_STEP {
            let fd = (p.value(r + PSI_FD_STEP) - p.value(r - PSI_FD_STEP)) / (2.0 * PSI_FD_STEP);
            fd_err = fd_err.max((fd - d).abs());
        }
    }
    Ok(Outcome {
        measured: fd_err,
        threshold: PSI_FD_TOL,
        pass: fd_err < PSI_FD_TOL && exact_err <= EXACT_TOL && monotone_violations == 0 && sign_violations == 0,
        detail: format!(
            "plateau/support error {exact_err:.1e}, monotonicity violations {monotone_violations}, psi' > 0 at {sign_violations} points"
        ),
    })
}

fn family_maps(cfg: &RunConfig) -> Result<[ChartMap; 3], String> {
    Ok([
        cfg.chart_map(MapKind::F { i: 1, j: 2 }).map_err(err)?,
        cfg.chart_map(MapKind::G { j: 1 }).map_err(err)?,
        cfg.chart_map(MapKind::Twist { i: 1 }).map_err(err)?,
    ])
}

fn check_jacobians(cfg: &RunConfig) -> CheckResult {
    let mut rng = cfg.rng(2);
    let mut worst = 0.0f64;
    let mut bad_det = 0;
    let mut per_family = Vec::new();
    for map in family_maps(cfg)? {
        let mut fam = 0.0f64;
        for _ in 0..JACOBIAN_POINTS {
            let p = sample_interior(map.chart(), &mut rng);
            let an = map.jacobian_analytic(&p).map_err(err)?;
            let fd = map.jacobian_fd(&p, JACOBIAN_FD_STEP).map_err(err)?;
            fam = fam.max(max_abs(&(an - fd)));
            if !(an.determinant() > 0.0) {
                bad_det += 1;
            }
        }
        per_family.push(format!("{}: {fam:.1e}", map.kind()));
        worst = worst.max(fam);
    }
    Ok(Outcome {
        measured: worst,
        threshold: cfg.tol_fd,
        pass: worst < cfg.tol_fd && bad_det == 0,
        detail: format!("{}; non-positive determinants {bad_det}", per_family.join(", ")),
    })
}

fn check_equivariance(cfg: &RunConfig) -> CheckResult {
    let mut rng = cfg.rng(3);
    let map = cfg.chart_map(MapKind::F { i: 1, j: 2 }).map_err(err)?;
    let mut proj_err = 0.0f64;
    let mut deck_err = 0.0f64;
    let e_z = Point::new(0.0, 0.0, 1.0);
    for _ in 0..EQUIVARIANCE_POINTS {
        let mut q = sample_interior(map.chart(), &mut rng);
        q.z += f64::from(rng.gen_range(-3i32..=3));
        let lifted = TorusChart::project(&map.lift_apply(&q).map_err(err)?);
        let direct = map.apply(&TorusChart::project(&q)).map_err(err)?;
        let dz = lifted.z - direct.z;
        let circ = (dz - dz.round()).abs();
        proj_err = proj_err.max((lifted.x - direct.x).abs()).max((lifted.y - direct.y).abs()).max(circ);
        let shifted = map.lift_apply(&(q + e_z)).map_err(err)? - e_z;
        deck_err = deck_err.max((shifted - map.lift_apply(&q).map_err(err)?).amax());
        let dj = map.jacobian_analytic(&(q + e_z)).map_err(err)? - map.jacobian_analytic(&q).map_err(err)?;
        deck_err = deck_err.max(max_abs(&dj));
    }
    let measured = proj_err.max(deck_err);
    Ok(Outcome {
        measured,
        threshold: EXACT_TOL,
        pass: measured <= EXACT_TOL,
        detail: format!("projection {proj_err:.1e}, deck {deck_err:.1e}"),
    })
}

/// The shear homotopy `H(s, t) = I + t ψ'(s) e₃ e₁ᵀ`.
pub fn shear_homotopy(profile: &BumpProfile, s: f64, t: f64) -> Mat3 {
    let mut m = Mat3::identity();
    m[(2, 0)] = t * profile.derivative(s);
    m
}

/// Strictly increasing bijection of `[0, 1]` built from random powers.
fn random_reparametrization<R: Rng + ?Sized>(rng: &mut R) -> impl Fn(f64) -> f64 + Send + Sync + 'static {
    let weights: Vec<(f64, f64)> = (0..3).map(|_| (rng.gen_range(0.1..1.0), rng.gen_range(0.3..3.0))).collect();
    let total: f64 = weights.iter().map(|w| w.0).sum();
    move |t: f64| weights.iter().map(|(w, a)| w * t.powf(*a)).sum::<f64>() / total
}

fn random_near_identity<R: Rng + ?Sized>(rng: &mut R) -> Mat3 {
    Mat3::identity() + Mat3::from_fn(|_, _| rng.gen_range(-0.3..0.3))
}

fn check_loop_class(cfg: &RunConfig) -> CheckResult {
    let mut rng = cfg.rng(4);
    let bump = cfg.bump;
    let l = cfg.tune(MatrixPath::full_turn());
    let constant = cfg.tune(MatrixPath::identity());
    let ll = l.concat(&l);
    let shear = cfg.tune(MatrixPath::new(move |s| shear_homotopy(&bump, s, 1.0)));
    let class = |p: &MatrixPath| loopclass::loop_class(p).map_err(err);
    let mut mismatches = 0usize;
    let mut notes = Vec::new();
    for (name, p, want) in [
        ("l", &l, LoopClass::GENERATOR),
        ("constant", &constant, LoopClass::TRIVIAL),
        ("l*l", &ll, LoopClass::TRIVIAL),
        ("shear", &shear, LoopClass::TRIVIAL),
    ] {
        if class(p)? != want {
            mismatches += 1;
            notes.push(format!("class({name}) != {want}"));
        }
    }
    let bases = [l.clone(), ll.clone(), shear.clone(), l.concat(&shear)];
    let base_classes: Vec<LoopClass> = bases.iter().map(class).collect::<Result<_, _>>()?;
    for _ in 0..LOOP_TRIALS {
        let k = rng.gen_range(0..bases.len());
        let g = random_reparametrization(&mut rng);
        if class(&bases[k].reparametrized(g))? != base_classes[k] {
            mismatches += 1;
            notes.push(format!("reparametrization changed base loop {k}"));
        }
    }
    for _ in 0..LOOP_TRIALS {
        let k = rng.gen_range(0..bases.len());
        let (a, b) = loop {
            let (a, b) = (random_near_identity(&mut rng), random_near_identity(&mut rng));
            let ok = (0..=64).all(|s| {
                let t = s as f64 / 64.0;
                (a * (1.0 - t) + b * t).determinant() > 0.1
            });
            if ok {
                break (a, b);
            }
        };
        let g = MatrixPath::new(move |t| a * (1.0 - t) + b * t);
        if class(&bases[k].conjugated_by(&g))? != base_classes[k] {
            mismatches += 1;
            notes.push(format!("conjugation changed base loop {k}"));
        }
    }
    let mut det_err = 0.0f64;
    let mut det_min = f64::INFINITY;
    for a in 0..HOMOTOPY_GRID {
        for b in 0..HOMOTOPY_GRID {
            let (s, t) = (a as f64 / (HOMOTOPY_GRID - 1) as f64, b as f64 / (HOMOTOPY_GRID - 1) as f64);
            let d = shear_homotopy(&bump, s, t).determinant();
            det_err = det_err.max((d - 1.0).abs());
            det_min = det_min.min(d);
        }
    }
    let mut detail = format!("homotopy det min {det_min}, |det - 1| max {det_err:.1e}");
    if !notes.is_empty() {
        detail = format!("{detail}; {}", notes.join("; "));
    }
    Ok(Outcome {
        measured: mismatches as f64,
        threshold: 0.0,
        pass: mismatches == 0 && det_min > 0.0 && det_err <= EXACT_TOL,
        detail,
    })
}

fn ranks(cfg: &RunConfig) -> std::ops::RangeInclusive<usize> {
    2..=cfg.n.max(4)
}

/// Every chart map of rank `n` with the class it should induce on `π₁`.
fn all_maps(n: usize) -> Vec<(MapKind, NielsenGen)> {
    NielsenGen::all(n)
        .into_iter()
        .map(|g| match g {
            NielsenGen::R { i, j } => (MapKind::F { i, j }, g),
            NielsenGen::I { j } => (MapKind::G { j }, g),
        })
        .collect()
}

fn check_rho(cfg: &RunConfig) -> CheckResult {
    let mut mismatches = Vec::new();
    let mut total = 0;
    for n in ranks(cfg) {
        let mut cases: Vec<(MapKind, NielsenAuto)> = all_maps(n)
            .into_iter()
            .map(|(k, g)| NielsenAuto::generator(g, n).map(|a| (k, a)))
            .collect::<Result<_, _>>()
            .map_err(err)?;
        for i in 1..=n {
            cases.push((MapKind::Twist { i }, NielsenAuto::identity(n).map_err(err)?));
        }
        for (kind, want) in cases {
            total += 1;
            let map = cfg.chart_map(kind).map_err(err)?;
            let got = curve::rho_of_with(&map, n, cfg.loop_samples).map_err(err)?;
            if got != want {
                mismatches.push(format!("n={n} {kind}: {}", got.render_images()));
            }
        }
    }
    Ok(Outcome {
        measured: mismatches.len() as f64,
        threshold: 0.0,
        pass: mismatches.is_empty(),
        detail: if mismatches.is_empty() { format!("{total} maps") } else { mismatches.join("; ") },
    })
}

fn check_twist(cfg: &RunConfig) -> CheckResult {
    let base = cfg.twist_settings();
    let mut mismatches = Vec::new();
    let mut total = 0;
    for n in ranks(cfg) {
        let mut cases: Vec<(MapKind, TwistVector)> =
            all_maps(n).into_iter().map(|(k, _)| (k, TwistVector::zero(n))).collect();
        cases.extend((1..=n).map(|i| (MapKind::Twist { i }, TwistVector::unit(n, i))));
        for (kind, want) in cases {
            let map = cfg.chart_map(kind).map_err(err)?;
            for settings in [base, base.doubled()] {
                total += 1;
                let got = crosshom::twisting_of(&map, n, &settings).map_err(err)?;
                if got != want {
                    mismatches.push(format!("n={n} {kind} (samples {}): {got}", settings.samples));
                }
            }
        }
    }
    Ok(Outcome {
        measured: mismatches.len() as f64,
        threshold: 0.0,
        pass: mismatches.is_empty(),
        detail: if mismatches.is_empty() { format!("{total} evaluations") } else { mismatches.join("; ") },
    })
}

fn check_g_path(cfg: &RunConfig) -> CheckResult {
    let half_turn = crate::charts::rot_z_turns(0.5);
    let mut plateau = 0.0f64;
    let mut symmetry = 0.0f64;
    let mut ends = 0.0f64;
    let mut nontrivial = 0;
    let steps = 200;
    for j in 1..=cfg.n {
        let map = cfg.chart_map(MapKind::G { j }).map_err(err)?;
        let lp = curve::generator_loop(j, &map, cfg.n, cfg.loop_samples).map_err(err)?;
        let path = cfg.tune(crosshom::derivative_along(&map, &lp, cfg.path_grid).map_err(err)?);
        for k in 0..=steps {
            let u = k as f64 / steps as f64;
            // w₂ on [0.4, 0.6]; w₁ on [0.2, 0.4] against w₃ read backwards
            plateau = plateau.max(max_abs(&(path.eval(0.4 + 0.2 * u) - half_turn)));
            let t = 0.2 + 0.2 * u;
            symmetry = symmetry.max(max_abs(&(path.eval(t) - path.eval(1.0 - t))));
        }
        ends = ends.max(max_abs(&(path.eval(0.2) - Mat3::identity())));
        if loopclass::loop_class(&path).map_err(err)? != LoopClass::TRIVIAL {
            nontrivial += 1;
        }
    }
    Ok(Outcome {
        measured: plateau,
        threshold: G_PATH_TOL,
        pass: plateau < G_PATH_TOL && symmetry < G_PATH_TOL && ends < G_PATH_TOL && nontrivial == 0,
        detail: format!("w1 vs reversed w3 {symmetry:.1e}, w1(0) - I {ends:.1e}, non-trivial classes {nontrivial}"),
    })
}

fn check_cocycle(cfg: &RunConfig) -> CheckResult {
    let mut rng = cfg.rng(8);
    let [f, g, t] = family_maps(cfg)?;
    let f2 = ChartMap::f(1, 2, BumpProfile::new(0.4, 0.55, 2.0).map_err(err)?).map_err(err)?;
    let g2 = ChartMap::g(1, BumpProfile::new(0.35, 0.62, 0.5).map_err(err)?).map_err(err)?;
    let t2 = ChartMap::twist(1, TwistProfile { rise_start: 0.2, rise_end: 0.7, steepness: 1.5 }).map_err(err)?;
    let same = [(&f, &f2), (&g, &g2), (&t, &t2)];
    let mut worst = 0.0f64;
    for k in 0..COCYCLE_POINTS {
        let (a, b) = same[k % 3];
        let p = sample_interior(b.chart(), &mut rng);
        let sp = SamplePoint { chart: *b.chart(), coords: [p.x, p.y, p.z] };
        worst = worst.max(crosshom::cocycle_check(a, b, &sp).map_err(err)?);
        worst = worst.max(crosshom::cocycle_check(b, a, &sp).map_err(err)?);
    }
    let disjoint = [(&f, &g), (&g, &t), (&t, &f)];
    let mut disjoint_worst = 0.0f64;
    for k in 0..COCYCLE_POINTS {
        let (a, b) = disjoint[k % 3];
        for chart in [a.chart(), b.chart()] {
            let p = sample_interior(chart, &mut rng);
            let sp = SamplePoint { chart: *chart, coords: [p.x, p.y, p.z] };
            disjoint_worst = disjoint_worst.max(crosshom::cocycle_check(a, b, &sp).map_err(err)?);
        }
    }
    Ok(Outcome {
        measured: worst,
        threshold: COCYCLE_TOL,
        pass: worst < COCYCLE_TOL && disjoint_worst == 0.0,
        detail: format!("disjoint supports {disjoint_worst:e}"),
    })
}

fn check_group(cfg: &RunConfig) -> CheckResult {
    let mut rng = cfg.rng(9);
    let mut failures = Vec::new();
    let mul = |a: &MappingClass, b: &MappingClass| modgroup::multiply(a, b).map_err(err);
    for _ in 0..GROUP_TRIALS {
        let n = rng.gen_range(2..=4);
        let a = modgroup::random_class(&mut rng, n, 6).map_err(err)?;
        let b = modgroup::random_class(&mut rng, n, 6).map_err(err)?;
        let c = modgroup::random_class(&mut rng, n, 6).map_err(err)?;
        if mul(&mul(&a, &b)?, &c)? != mul(&a, &mul(&b, &c)?)? {
            failures.push(format!("associativity: {a} | {b} | {c}"));
        }
    }
    let n = cfg.n;
    let id = MappingClass::identity(n).map_err(err)?;
    // R_{1,2}² acts trivially on H₁(F_n; Z/2)
    let r = NielsenAuto::r(1, 2, n).map_err(err)?;
    let r2 = modgroup::section(&NielsenAuto::compose(&r, &r).map_err(err)?);
    for bits in 0..(1u32 << n) {
        let t = TwistVector((0..n).map(|k| bits >> k & 1 == 1).collect());
        let k = MappingClass::new(t, NielsenAuto::identity(n).map_err(err)?).map_err(err)?;
        if mul(&k, &k)? != id {
            failures.push(format!("kernel element {} has order > 2", k.twist()));
        }
        if mul(&k, &r2)? != mul(&r2, &k)? {
            failures.push(format!("kernel element {} not central", k.twist()));
        }
    }
    for g in NielsenGen::all(n) {
        let a = NielsenAuto::generator(g, n).map_err(err)?;
        if modgroup::project(&modgroup::section(&a)) != a {
            failures.push(format!("rho(s({g})) != {g}"));
        }
    }
    for _ in 0..GROUP_TRIALS {
        let a = modgroup::random_auto(&mut rng, n, 6).map_err(err)?;
        if modgroup::project(&modgroup::section(&a)) != a {
            failures.push(format!("rho(s(phi)) != phi for {}", a.render_images()));
        }
    }
    for j in 1..=n {
        let s = modgroup::section(&NielsenAuto::inv(j, n).map_err(err)?);
        if !mul(&s, &s)?.is_identity() {
            failures.push(format!("s(I{j})^2 != id"));
        }
    }
    // multiplication against the chain rule on measured generator lifts
    let mut geo = GeometricModel::new(n, cfg.twist_settings()).with_profiles(cfg.bump, cfg.twist);
    let gens = NielsenGen::all(n);
    for _ in 0..CALIBRATION_TRIALS {
        let len = rng.gen_range(1..=6);
        let lifts: Vec<Lift> = (0..len)
            .map(|_| {
                if rng.gen_bool(0.3) {
                    Lift::SphereTwist(rng.gen_range(1..=n))
                } else {
                    Lift::Nielsen(Factor { generator: gens[rng.gen_range(0..gens.len())], inverse: rng.gen_bool(0.5) })
                }
            })
            .collect();
        let geometric = geo.class_of(&lifts).map_err(err)?;
        let mut algebraic = id.clone();
        for l in &lifts {
            let m = match *l {
                Lift::SphereTwist(k) => MappingClass::sphere_twist(n, k).map_err(err)?,
                Lift::Nielsen(f) => modgroup::section(&NielsenAuto::from_factorization(n, &[f]).map_err(err)?),
            };
            algebraic = mul(&algebraic, &m)?;
        }
        if geometric != algebraic {
            failures.push(format!("calibration: {lifts:?} measured {geometric}, multiplied {algebraic}"));
        }
    }
    Ok(Outcome {
        measured: failures.len() as f64,
        threshold: 0.0,
        pass: failures.is_empty(),
        detail: failures.join("; "),
    })
}

/// Runs the check `name`, recording any error instead of propagating it.
pub fn run_check(name: &str, cfg: &RunConfig) -> CheckRecord {
    let start = Instant::now();
    let result = match name {
        "psi_profile" => check_psi(cfg),
        "jacobians" => check_jacobians(cfg),
        "cover_equivariance" => check_equivariance(cfg),
        "loop_class_oracle" => check_loop_class(cfg),
        "rho_realization" => check_rho(cfg),
        "twist_vectors" => check_twist(cfg),
        "g_path_structure" => check_g_path(cfg),
        "cocycle_identity" => check_cocycle(cfg),
        "group_model" => check_group(cfg),
        other => Err(format!("unknown check {other:?}")),
    };
    let runtime_ms = cfg.timing.then(|| start.elapsed().as_secs_f64() * 1e3);
    match result {
        Ok(o) => CheckRecord {
            name: name.to_string(),
            status: if o.pass { Status::Pass } else { Status::Fail },
            measured: Some(o.measured).filter(|m| m.is_finite()),
            threshold: o.threshold,
            runtime_ms,
            detail: o.detail,
        },
        Err(e) => CheckRecord {
            name: name.to_string(),
            status: Status::Error,
            measured: None,
            threshold: 0.0,
            runtime_ms,
            detail: e,
        },
    }
}

/// Validates the configuration, then runs every check (in parallel) and
/// assembles the report in `CHECK_NAMES` order.
pub fn cmd_verify(cfg: &RunConfig) -> Result<Report, ConfigError> {
    cfg.validate()?;
    let checks: Vec<CheckRecord> = std::thread::scope(|s| {
        let handles: Vec<_> = CHECK_NAMES.iter().map(|name| s.spawn(move || run_check(name, cfg))).collect();
        handles.into_iter().map(|h| h.join().expect("check thread panicked")).collect()
    });
    let passed = checks.iter().all(|c| c.status == Status::Pass);
    Ok(Report { schema: REPORT_SCHEMA, config: cfg.clone(), passed, checks })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DumpTarget {
    Psi,
    Jacobian,
    MatrixPath,
    Loop,
}

#[derive(Debug, Error)]
pub enum DumpError {
    #[error("unknown dump target {0:?} (expected psi, jacobian, matrixpath or loop)")]
    UnknownTarget(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Compute(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl FromStr for DumpTarget {
    type Err = DumpError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "psi" => Ok(DumpTarget::Psi),
            "jacobian" => Ok(DumpTarget::Jacobian),
            "matrixpath" => Ok(DumpTarget::MatrixPath),
            "loop" => Ok(DumpTarget::Loop),
            _ => Err(DumpError::UnknownTarget(s.to_string())),
        }
    }
}

/// What to dump and for which map and generator.
#[derive(Debug, Clone, PartialEq)]
pub struct DumpRequest {
    pub target: DumpTarget,
    /// Defaults to `F1,2` (`G1` for loops).
    pub map: Option<MapKind>,
    /// Defaults to the generator whose loop enters the map's chart.
    pub generator: Option<usize>,
    /// Dump the image of the loop instead of the loop itself.
    pub image: bool,
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn home_generator(kind: MapKind) -> usize {
    match kind {
        MapKind::F { i, .. } | MapKind::Twist { i } => i,
        MapKind::G { j } => j,
    }
}

fn matrix_cells(m: &Mat3) -> Vec<String> {
    (0..3).flat_map(|r| (0..3).map(move |c| (r, c))).map(|(r, c)| num(m[(r, c)])).collect()
}

/// Writes the requested data as CSV (JSON for loops).
///
/// * `psi`: `r,psi,psi_prime`, 10⁴ rows over `[0, 1]`.
/// * `jacobian`: `x,y,z,j11..j33,det,fd_error` at 1000 seeded interior points.
/// * `matrixpath`: `t,m11..m33,q_w,q_x,q_y,q_z` along the lifted derivative path.
/// * `loop`: the event list of the generator loop (or its image).
pub fn cmd_dump(req: &DumpRequest, cfg: &RunConfig, out: &mut dyn Write) -> Result<(), DumpError> {
    cfg.validate()?;
    let compute = |e: &dyn std::fmt::Display| DumpError::Compute(e.to_string());
    let default_kind = match req.target {
        DumpTarget::Loop => MapKind::G { j: 1 },
        _ => MapKind::F { i: 1, j: 2 },
    };
    let kind = req.map.unwrap_or(default_kind);
    let map = cfg.chart_map(kind).map_err(|e| compute(&e))?;
    let k = req.generator.unwrap_or_else(|| home_generator(kind));
    match req.target {
        DumpTarget::Psi => {
            writeln!(out, "r,psi,psi_prime")?;
            for i in 0..PSI_GRID {
                let r = i as f64 / (PSI_GRID - 1) as f64;
                writeln!(out, "{},{},{}", num(r), num(cfg.bump.value(r)), num(cfg.bump.derivative(r)))?;
            }
        }
        DumpTarget::Jacobian => {
            let mut rng = cfg.rng(2);
            let head: Vec<String> = (1..=3).flat_map(|r| (1..=3).map(move |c| format!("j{r}{c}"))).collect();
            writeln!(out, "x,y,z,{},det,fd_error", head.join(","))?;
            for _ in 0..JACOBIAN_POINTS {
                let p = sample_interior(map.chart(), &mut rng);
                let an = map.jacobian_analytic(&p).map_err(|e| compute(&e))?;
                let fd = map.jacobian_fd(&p, JACOBIAN_FD_STEP).map_err(|e| compute(&e))?;
                writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    num(p.x),
                    num(p.y),
                    num(p.z),
                    matrix_cells(&an).join(","),
                    num(an.determinant()),
                    num(max_abs(&(an - fd)))
                )?;
            }
        }
        DumpTarget::MatrixPath => {
            let lp = curve::generator_loop(k, &map, cfg.n, cfg.loop_samples).map_err(|e| compute(&e))?;
            let path = cfg.tune(crosshom::derivative_along(&map, &lp, cfg.path_grid).map_err(|e| compute(&e))?);
            let samples = loopclass::lift(&path).map_err(|e| compute(&e))?;
            let head: Vec<String> = (1..=3).flat_map(|r| (1..=3).map(move |c| format!("m{r}{c}"))).collect();
            writeln!(out, "t,{},q_w,q_x,q_y,q_z", head.join(","))?;
            for s in samples {
                let q = s.quaternion.components().map(num);
                writeln!(out, "{},{},{}", num(s.t), matrix_cells(&s.matrix).join(","), q.join(","))?;
            }
        }
        DumpTarget::Loop => {
            let lp = curve::generator_loop(k, &map, cfg.n, cfg.loop_samples).map_err(|e| compute(&e))?;
            let lp = if req.image { curve::image_under(&map, &lp).map_err(|e| compute(&e))? } else { lp };
            writeln!(out, "{}", lp.to_json())?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> RunConfig {
        RunConfig { loop_samples: 128, path_grid: 128, timing: false, ..RunConfig::default() }
    }

    #[test]
    fn validation() {
        assert!(RunConfig::default().validate().is_ok());
        let broken = RunConfig { bump: BumpProfile { plateau_end: 0.5, support_end: 0.4, steepness: 1.0 }, ..quick() };
        assert!(matches!(cmd_verify(&broken), Err(ConfigError::Profile(_))));
        assert!(RunConfig { n: 1, ..quick() }.validate().is_err());
        assert!(RunConfig { loop_samples: 500, ..quick() }.validate().is_err());
        assert!(RunConfig { tol_fd: 0.0, ..quick() }.validate().is_err());
        assert!(RunConfig { continuity: 1.0, ..quick() }.validate().is_err());
    }

    #[test]
    fn individual_checks_pass() {
        let cfg = quick();
        for name in ["psi_profile", "cover_equivariance", "g_path_structure", "cocycle_identity"] {
            let rec = run_check(name, &cfg);
            assert_eq!(rec.status, Status::Pass, "{rec:?}");
            assert!(rec.runtime_ms.is_none());
        }
        assert_eq!(run_check("nonsense", &cfg).status, Status::Error);
    }

    #[test]
    fn interior_samples_respect_margin() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for map in family_maps(&quick()).unwrap() {
            for _ in 0..200 {
                let p = sample_interior(map.chart(), &mut rng);
                assert!(map.chart().classify(&p).is_ok());
                assert!(interior_distance(map.chart(), &p) > INTERIOR_MARGIN);
            }
        }
    }

    #[test]
    fn dumps() {
        let cfg = quick();
        let mut buf = Vec::new();
        let req = DumpRequest { target: DumpTarget::Psi, map: None, generator: None, image: false };
        cmd_dump(&req, &cfg, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), PSI_GRID + 1);
        assert_eq!(text.lines().next().unwrap(), "r,psi,psi_prime");
        let first = text.lines().nth(1).unwrap();
        assert_eq!(first.split(',').count(), 3);
        assert!(first.starts_with("0.0000000000000000e0,1.0000000000000000e0"));

        let mut buf = Vec::new();
        let req = DumpRequest { target: DumpTarget::MatrixPath, ..req };
        cmd_dump(&req, &cfg, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap().split(',').count(), 14);
        assert!(text.lines().count() > cfg.path_grid);

        let mut buf = Vec::new();
        let req = DumpRequest { target: DumpTarget::Loop, ..req };
        cmd_dump(&req, &cfg, &mut buf).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v.as_array().unwrap().len(), 5);

        assert!(matches!("plot".parse::<DumpTarget>(), Err(DumpError::UnknownTarget(_))));
    }
}
