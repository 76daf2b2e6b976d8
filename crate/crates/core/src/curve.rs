//! Based loops in `M_n` as event lists, their images under chart maps, and
//! reading their `π₁` class off the signed crossings with the core spheres.
//!
//! A loop never carries a global embedding. It is a sequence of
//!
//! * exterior stubs (outside every chart, crossing-free by construction),
//! * chart pieces (a polyline sampled in one chart's coordinates), and
//! * crossing events (sphere index and sign).
//!
//! A crossing at a removed-ball boundary is a teleport: the loop arrives at one
//! side of `A_k` and continues from the glued point on the other side. The
//! sign is `+1` when the loop enters through `A_k⁻` and emerges from `A_k⁺`.
//! A crossing with the disk `θ = 1/2` of a torus chart happens in the middle
//! of a polyline; the polyline is split there, and the segment joining the
//! two halves passes through the disk.
//!
//! Since the complement of the core spheres is simply connected, the freely
//! reduced sequence of crossing letters is the class of the loop in `F_n`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::charts::{BallChart, Chart, ChartError, ChartId, ChartMap, MapKind, Point, SphereSide, TorusChart};
use crate::freegroup::{FreeGroupError, Letter, NielsenAuto, Sign, Word};

/// Default number of samples per in-chart piece.
pub const DEFAULT_SAMPLES: usize = 512;
/// Largest allowed jump between consecutive image vertices.
pub const MAX_STEP: f64 = 0.05;
/// Minimum distance of a vertex from a crossing surface.
pub const SURFACE_MARGIN: f64 = 1e-9;
/// Slack for "this vertex lies on a boundary sphere".
pub const ENDPOINT_TOL: f64 = 1e-9;
/// Undersampling retries in [`rho_of`], each doubling the density.
pub const MAX_DOUBLINGS: u32 = 6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CurveError {
    #[error("generator index {index} out of range for rank {rank}")]
    IndexOutOfRange { index: usize, rank: usize },
    #[error("map {map} does not fit in rank {rank}")]
    MapOutOfRange { map: MapKind, rank: usize },
    #[error("polyline in {chart} undersampled near t = {t}: image step {step} exceeds {max}")]
    Undersampled { chart: ChartId, t: f64, step: f64, max: f64 },
    #[error("vertex at t = {t} lies within {margin} of a crossing surface; re-sample")]
    NearSurface { t: f64, margin: f64 },
    #[error("invalid loop: {0}")]
    Invalid(String),
    #[error(transparent)]
    Chart(#[from] ChartError),
    #[error(transparent)]
    FreeGroup(#[from] FreeGroupError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossingSite {
    /// Arrival at a boundary sphere and departure from its partner.
    Teleport,
    /// Passage through the disk of a torus chart, in the middle of a polyline.
    Surface,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossingEvent {
    pub param: f64,
    pub sphere: usize,
    pub sign: Sign,
    pub site: CrossingSite,
}

impl CrossingEvent {
    pub fn letter(&self) -> Letter {
        Letter::new(self.sphere, self.sign)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub point: [f64; 3],
}

impl Sample {
    pub fn new(t: f64, p: &Point) -> Sample {
        Sample { t, point: [p.x, p.y, p.z] }
    }

    pub fn point(&self) -> Point {
        Point::new(self.point[0], self.point[1], self.point[2])
    }
}

/// A polyline in one chart, samples strictly increasing in `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartPiece {
    pub chart: Chart,
    pub samples: Vec<Sample>,
}

impl ChartPiece {
    fn t_start(&self) -> f64 {
        self.samples[0].t
    }

    fn t_end(&self) -> f64 {
        self.samples[self.samples.len() - 1].t
    }

    fn first(&self) -> Point {
        self.samples[0].point()
    }

    fn last(&self) -> Point {
        self.samples[self.samples.len() - 1].point()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum LoopEvent {
    Exterior { t0: f64, t1: f64 },
    Chart(ChartPiece),
    Crossing(CrossingEvent),
}

impl LoopEvent {
    fn span(&self) -> (f64, f64) {
        match self {
            LoopEvent::Exterior { t0, t1 } => (*t0, *t1),
            LoopEvent::Chart(p) => (p.t_start(), p.t_end()),
            LoopEvent::Crossing(c) => (c.param, c.param),
        }
    }
}

/// A based loop in `M_n`, validated on construction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrackedLoop {
    events: Vec<LoopEvent>,
}

/// One flattened view entry of the JSON dump.
#[derive(Debug, Clone, Serialize)]
struct DumpEvent<'a> {
    event: &'static str,
    t0: f64,
    t1: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    chart: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    letter: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    site: Option<CrossingSite>,
    #[serde(skip_serializing_if = "Option::is_none")]
    samples: Option<&'a [Sample]>,
}

impl TrackedLoop {
    pub fn new(events: Vec<LoopEvent>) -> Result<TrackedLoop, CurveError> {
        let lp = TrackedLoop { events };
        lp.validate()?;
        Ok(lp)
    }

    pub fn events(&self) -> &[LoopEvent] {
        &self.events
    }

    pub fn crossings(&self) -> impl Iterator<Item = &CrossingEvent> {
        self.events.iter().filter_map(|e| match e {
            LoopEvent::Crossing(c) => Some(c),
            _ => None,
        })
    }

    pub fn pieces(&self) -> impl Iterator<Item = &ChartPiece> {
        self.events.iter().filter_map(|e| match e {
            LoopEvent::Chart(p) => Some(p),
            _ => None,
        })
    }

    fn validate(&self) -> Result<(), CurveError> {
        let bad = |m: String| Err(CurveError::Invalid(m));
        let ev = &self.events;
        match (ev.first(), ev.last()) {
            (Some(LoopEvent::Exterior { t0, .. }), Some(LoopEvent::Exterior { t1, .. })) => {
                if *t0 != 0.0 || *t1 != 1.0 {
                    return bad(format!("loop must span [0, 1], got [{t0}, {t1}]"));
                }
            }
            _ => return bad("loop must start and end with exterior stubs".into()),
        }
        let mut last_end = 0.0;
        let mut last_crossing = f64::NEG_INFINITY;
        for (idx, e) in ev.iter().enumerate() {
            let (a, b) = e.span();
            if !(a.is_finite() && b.is_finite()) || a > b || a < last_end {
                return bad(format!("event {idx} out of order: [{a}, {b}] after {last_end}"));
            }
            last_end = b;
            match e {
                LoopEvent::Crossing(c) => {
                    if c.param <= last_crossing {
                        return bad(format!("crossing parameters not increasing at {}", c.param));
                    }
                    last_crossing = c.param;
                    if c.sphere == 0 {
                        return bad("crossing with sphere 0".into());
                    }
                }
                LoopEvent::Chart(p) => self.validate_piece(idx, p)?,
                LoopEvent::Exterior { .. } => {
                    if idx > 0 && matches!(ev[idx - 1], LoopEvent::Exterior { .. }) {
                        return bad(format!("adjacent exterior stubs at event {idx}"));
                    }
                }
            }
        }
        self.validate_teleports()
    }

    fn validate_piece(&self, idx: usize, p: &ChartPiece) -> Result<(), CurveError> {
        let bad = |m: String| Err(CurveError::Invalid(m));
        if p.samples.len() < 2 {
            return bad(format!("chart piece {idx} has fewer than two samples"));
        }
        if p.samples.windows(2).any(|w| w[1].t <= w[0].t) {
            return bad(format!("chart piece {idx} samples not increasing in t"));
        }
        for s in &p.samples {
            p.chart.classify(&s.point())?;
        }
        if let Chart::Torus(_) = p.chart {
            for s in &p.samples {
                if surface_distance(s.point[2]) < SURFACE_MARGIN {
                    return Err(CurveError::NearSurface { t: s.t, margin: SURFACE_MARGIN });
                }
            }
        }
        // Ends: outer boundary (next to an exterior stub), a boundary sphere
        // (next to a teleport) or a split at a surface crossing.
        let ends = [(p.first(), idx.checked_sub(1)), (p.last(), Some(idx + 1))];
        for (end, nb) in ends {
            let neighbour = nb.and_then(|k| self.events.get(k));
            let ok = match neighbour {
                Some(LoopEvent::Exterior { .. }) => p.chart.outer_distance(&end).abs() <= ENDPOINT_TOL,
                Some(LoopEvent::Crossing(c)) if c.site == CrossingSite::Teleport => {
                    p.chart.boundary_sphere(&end, ENDPOINT_TOL).is_some()
                }
                Some(LoopEvent::Crossing(c)) => {
                    c.site == CrossingSite::Surface && matches!(p.chart, Chart::Torus(_))
                }
                _ => false,
            };
            if !ok {
                return bad(format!("chart piece {idx} in {} has a dangling end at {end:?}", p.chart.id()));
            }
        }
        Ok(())
    }

    /// Teleport signs and sphere labels must agree with the boundary spheres
    /// the adjacent pieces touch, and a teleport inside one ball chart must
    /// land on the glued point.
    fn validate_teleports(&self) -> Result<(), CurveError> {
        for (idx, e) in self.events.iter().enumerate() {
            let LoopEvent::Crossing(c) = e else { continue };
            if c.site == CrossingSite::Surface {
                let split = matches!(
                    (idx.checked_sub(1).map(|k| &self.events[k]), self.events.get(idx + 1)),
                    (Some(LoopEvent::Chart(a)), Some(LoopEvent::Chart(b))) if a.chart == b.chart
                );
                if !split {
                    return Err(CurveError::Invalid(format!(
                        "surface crossing at {} is not inside a chart polyline",
                        c.param
                    )));
                }
                continue;
            }
            let (expected, before, after) = self.teleport_geometry(idx);
            if let Some((sphere, sign)) = expected {
                if sphere != c.sphere || sign != c.sign {
                    return Err(CurveError::Invalid(format!(
                        "teleport at {} labelled ({}, {:?}) but geometry says ({sphere}, {sign:?})",
                        c.param, c.sphere, c.sign
                    )));
                }
            }
            if let (Some((ca, pa)), Some((cb, pb))) = (before, after) {
                if let (Chart::Ball(_), true) = (ca, ca == cb) {
                    if (BallChart::glue(&pa) - pb).norm() > ENDPOINT_TOL {
                        return Err(CurveError::Invalid(format!(
                            "teleport at {} does not land on the glued point",
                            c.param
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// The `(sphere, sign)` implied by the pieces around teleport `idx`, plus
    /// the chart endpoints on either side.
    #[allow(clippy::type_complexity)]
    fn teleport_geometry(
        &self,
        idx: usize,
    ) -> (Option<(usize, Sign)>, Option<(Chart, Point)>, Option<(Chart, Point)>) {
        let before = idx.checked_sub(1).and_then(|k| match &self.events[k] {
            LoopEvent::Chart(p) => Some((p.chart, p.last())),
            _ => None,
        });
        let after = match self.events.get(idx + 1) {
            Some(LoopEvent::Chart(p)) => Some((p.chart, p.first())),
            _ => None,
        };
        let from_before = before.and_then(|(ch, pt)| {
            ch.boundary_sphere(&pt, ENDPOINT_TOL).map(|(k, side)| {
                // arriving at A⁻ is a positive crossing
                (k, if side == SphereSide::Minus { Sign::Pos } else { Sign::Neg })
            })
        });
        let from_after = after.and_then(|(ch, pt)| {
            ch.boundary_sphere(&pt, ENDPOINT_TOL).map(|(k, side)| {
                // emerging from A⁺ is a positive crossing
                (k, if side == SphereSide::Plus { Sign::Pos } else { Sign::Neg })
            })
        });
        (from_before.or(from_after), before, after)
    }

    /// Chart runs: maximal groups of pieces in one chart joined only by
    /// surface crossings. Used to evaluate the loop at arbitrary parameters.
    pub fn runs(&self) -> Vec<(Chart, Vec<Sample>)> {
        let mut runs: Vec<(Chart, Vec<Sample>)> = Vec::new();
        let mut joinable = false;
        for e in &self.events {
            match e {
                LoopEvent::Chart(p) => {
                    match runs.last_mut() {
                        Some((ch, samples)) if joinable && *ch == p.chart => {
                            samples.extend_from_slice(&p.samples)
                        }
                        _ => runs.push((p.chart, p.samples.clone())),
                    }
                    joinable = false;
                }
                LoopEvent::Crossing(c) if c.site == CrossingSite::Surface => joinable = true,
                _ => joinable = false,
            }
        }
        runs
    }

    /// Position at parameter `t`: `None` when the loop is outside every chart.
    /// Torus chart positions come back in cover coordinates.
    pub fn locate(&self, t: f64) -> Option<(Chart, Point)> {
        locate_in(&self.runs(), t)
    }

    pub fn to_json(&self) -> String {
        let view: Vec<DumpEvent> = self
            .events
            .iter()
            .map(|e| match e {
                LoopEvent::Exterior { t0, t1 } => DumpEvent {
                    event: "exterior",
                    t0: *t0,
                    t1: *t1,
                    chart: None,
                    letter: None,
                    site: None,
                    samples: None,
                },
                LoopEvent::Chart(p) => DumpEvent {
                    event: "chart",
                    t0: p.t_start(),
                    t1: p.t_end(),
                    chart: Some(p.chart.id().to_string()),
                    letter: None,
                    site: None,
                    samples: Some(&p.samples),
                },
                LoopEvent::Crossing(c) => DumpEvent {
                    event: "crossing",
                    t0: c.param,
                    t1: c.param,
                    chart: None,
                    letter: Some(Word::try_from(vec![c.letter()]).map(|w| w.to_text()).unwrap_or_default()),
                    site: Some(c.site),
                    samples: None,
                },
            })
            .collect();
        serde_json::to_string_pretty(&view).expect("loop dump serializes")
    }
}

/// Evaluate pre-computed runs at `t` by linear interpolation.
pub fn locate_in(runs: &[(Chart, Vec<Sample>)], t: f64) -> Option<(Chart, Point)> {
    for (chart, samples) in runs {
        let (a, b) = (samples[0].t, samples[samples.len() - 1].t);
        if t < a || t > b {
            continue;
        }
        let k = samples.partition_point(|s| s.t <= t);
        if k == 0 {
            return Some((*chart, samples[0].point()));
        }
        if k >= samples.len() {
            return Some((*chart, samples[samples.len() - 1].point()));
        }
        let (s0, s1) = (&samples[k - 1], &samples[k]);
        let w = (t - s0.t) / (s1.t - s0.t);
        return Some((*chart, s0.point() + (s1.point() - s0.point()) * w));
    }
    None
}

/// Distance from a (lifted) `θ` to the nearest crossing level `1/2 + m`.
fn surface_distance(theta: f64) -> f64 {
    let off = theta - TorusChart::CROSSING_LEVEL;
    (off - off.round()).abs()
}

fn uniform_piece(chart: Chart, t0: f64, t1: f64, n: usize, at: impl Fn(f64) -> Point) -> ChartPiece {
    let samples = (0..n)
        .map(|k| {
            let u = k as f64 / (n - 1) as f64;
            let t = if k == n - 1 { t1 } else { t0 + (t1 - t0) * u };
            Sample::new(t, &at(u))
        })
        .collect();
    ChartPiece { chart, samples }
}

fn check_rank(map: &ChartMap, rank: usize) -> Result<(), CurveError> {
    let fits = match map.kind() {
        MapKind::F { i, j } => i <= rank && j <= rank,
        MapKind::G { j } => j <= rank,
        MapKind::Twist { i } => i <= rank,
    };
    if fits {
        Ok(())
    } else {
        Err(CurveError::MapOutOfRange { map: map.kind(), rank })
    }
}

fn teleport(param: f64, sphere: usize) -> LoopEvent {
    LoopEvent::Crossing(CrossingEvent { param, sphere, sign: Sign::Pos, site: CrossingSite::Teleport })
}

/// The standard representative of `a_k` adapted to the chart of `map`, with
/// `samples` vertices per chart piece.
pub fn generator_loop(k: usize, map: &ChartMap, rank: usize, samples: usize) -> Result<TrackedLoop, CurveError> {
    if k == 0 || k > rank {
        return Err(CurveError::IndexOutOfRange { index: k, rank });
    }
    check_rank(map, rank)?;
    if samples < 2 {
        return Err(CurveError::Invalid(format!("need at least two samples per piece, got {samples}")));
    }
    let chart = *map.chart();
    let events = match map.kind() {
        // Arrive at A_i⁻ from outside, emerge from the torus chart's ball
        // (A_i⁺) and run out along the lifted segment (s, 0, 0).
        MapKind::F { i, .. } if k == i => {
            let r0 = TorusChart::BALL_RADIUS;
            let r1 = TorusChart::OUTER_RADIUS;
            vec![
                LoopEvent::Exterior { t0: 0.0, t1: 0.25 },
                teleport(0.25, k),
                LoopEvent::Chart(uniform_piece(chart, 0.25, 0.75, samples, |u| {
                    Point::new(r0 + (r1 - r0) * u, 0.0, 0.0)
                })),
                LoopEvent::Exterior { t0: 0.75, t1: 1.0 },
            ]
        }
        // γ₁ down the z-axis, γ₂ through the inner region via A_j⁻ → A_j⁺,
        // γ₃ back up the z-axis; each third of [0.2, 0.8].
        MapKind::G { j } if k == j => {
            let top = BallChart::OUTER_RADIUS;
            let inner = BallChart::INNER_RADIUS;
            let hub = Point::new(0.0, 0.0, inner);
            let c_minus = Point::new(BallChart::CENTER_OFFSET, 0.0, 0.0);
            let hit = c_minus + (hub - c_minus).normalize() * BallChart::BALL_RADIUS;
            let half = samples.div_ceil(2).max(2);
            let mut first = uniform_piece(chart, 0.2, 0.4, samples, |u| Point::new(0.0, 0.0, top + (inner - top) * u));
            let approach = uniform_piece(chart, 0.4, 0.5, half, |u| hub + (hit - hub) * u);
            first.samples.extend_from_slice(&approach.samples[1..]);
            let depart = uniform_piece(chart, 0.5, 0.6, half, |u| {
                let p = hub + (hit - hub) * (1.0 - u);
                BallChart::glue(&p)
            });
            let mut second = depart;
            let up = uniform_piece(chart, 0.6, 0.8, samples, |u| Point::new(0.0, 0.0, inner + (top - inner) * u));
            second.samples.extend_from_slice(&up.samples[1..]);
            vec![
                LoopEvent::Exterior { t0: 0.0, t1: 0.2 },
                LoopEvent::Chart(first),
                teleport(0.5, k),
                LoopEvent::Chart(second),
                LoopEvent::Exterior { t0: 0.8, t1: 1.0 },
            ]
        }
        // Emerge from A_i⁺ (the collar's inner sphere) and cross the shell radially.
        MapKind::Twist { i } if k == i => vec![
            LoopEvent::Exterior { t0: 0.0, t1: 0.25 },
            teleport(0.25, k),
            LoopEvent::Chart(uniform_piece(chart, 0.25, 0.75, samples, |u| Point::new(1.0 + u, 0.0, 0.0))),
            LoopEvent::Exterior { t0: 0.75, t1: 1.0 },
        ],
        _ => vec![
            LoopEvent::Exterior { t0: 0.0, t1: 0.5 },
            teleport(0.5, k),
            LoopEvent::Exterior { t0: 0.5, t1: 1.0 },
        ],
    };
    TrackedLoop::new(events)
}

/// Map a run of samples of the map's own chart and cut it at the crossing
/// surfaces it passes through.
fn map_run(map: &ChartMap, chart: Chart, samples: &[Sample], max_step: f64) -> Result<Vec<LoopEvent>, CurveError> {
    let mut mapped = Vec::with_capacity(samples.len());
    for s in samples {
        let p = s.point();
        let q = match chart {
            Chart::Torus(_) => map.lift_apply(&p)?,
            _ => map.apply(&p)?,
        };
        mapped.push(Sample::new(s.t, &q));
    }
    for w in mapped.windows(2) {
        let step = (w[1].point() - w[0].point()).norm();
        if step >= max_step {
            return Err(CurveError::Undersampled { chart: chart.id(), t: w[0].t, step, max: max_step });
        }
    }
    let Chart::Torus(torus) = chart else {
        return Ok(vec![LoopEvent::Chart(ChartPiece { chart, samples: mapped })]);
    };
    for s in &mapped {
        if surface_distance(s.point[2]) < SURFACE_MARGIN {
            return Err(CurveError::NearSurface { t: s.t, margin: SURFACE_MARGIN });
        }
    }
    let mut out = Vec::new();
    let mut current = vec![mapped[0]];
    for w in mapped.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (za, zb) = (a.point[2], b.point[2]);
        // crossing levels 1/2 + m strictly between za and zb
        let lo = za.min(zb) - TorusChart::CROSSING_LEVEL;
        let hi = za.max(zb) - TorusChart::CROSSING_LEVEL;
        let mut levels: Vec<f64> = ((lo.ceil() as i64)..=(hi.floor() as i64))
            .map(|m| m as f64 + TorusChart::CROSSING_LEVEL)
            .filter(|l| *l > za.min(zb) && *l < za.max(zb))
            .collect();
        if zb < za {
            levels.reverse();
        }
        let dir = if zb > za { 1 } else { -1 } * TorusChart::THETA_ORIENTATION;
        for level in levels {
            let tc = a.t + (level - za) / (zb - za) * (b.t - a.t);
            if tc - a.t < SURFACE_MARGIN || b.t - tc < SURFACE_MARGIN {
                return Err(CurveError::NearSurface { t: tc, margin: SURFACE_MARGIN });
            }
            out.push(LoopEvent::Chart(ChartPiece { chart, samples: std::mem::take(&mut current) }));
            out.push(LoopEvent::Crossing(CrossingEvent {
                param: tc,
                sphere: torus.j,
                sign: Sign::from_i32(dir).expect("unit sign"),
                site: CrossingSite::Surface,
            }));
        }
        current.push(b);
    }
    out.push(LoopEvent::Chart(ChartPiece { chart, samples: current }));
    // A one-sample piece can only arise from a crossing next to an end vertex,
    // which the margin check above already rejected.
    Ok(out)
}

/// Image of `lp` under `map` with the default step bound.
pub fn image_under(map: &ChartMap, lp: &TrackedLoop) -> Result<TrackedLoop, CurveError> {
    image_under_with(map, lp, MAX_STEP)
}

pub fn image_under_with(map: &ChartMap, lp: &TrackedLoop, max_step: f64) -> Result<TrackedLoop, CurveError> {
    let own = map.chart_id();
    let ev = lp.events();
    let mut out: Vec<LoopEvent> = Vec::with_capacity(ev.len());
    let mut idx = 0;
    while idx < ev.len() {
        match &ev[idx] {
            LoopEvent::Chart(p) if p.chart.id() == own => {
                // gather the run, dropping the old surface crossings
                let mut samples = p.samples.clone();
                let mut end = idx + 1;
                while end + 1 < ev.len() {
                    match (&ev[end], &ev[end + 1]) {
                        (LoopEvent::Crossing(c), LoopEvent::Chart(q))
                            if c.site == CrossingSite::Surface && q.chart.id() == own =>
                        {
                            samples.extend_from_slice(&q.samples);
                            end += 2;
                        }
                        _ => break,
                    }
                }
                out.extend(map_run(map, p.chart, &samples, max_step)?);
                idx = end;
            }
            other => {
                out.push(other.clone());
                idx += 1;
            }
        }
    }
    // Relabel teleports from the geometry of the mapped endpoints.
    let provisional = TrackedLoop { events: out };
    let mut events = provisional.events.clone();
    for (k, e) in events.iter_mut().enumerate() {
        if let LoopEvent::Crossing(c) = e {
            if c.site != CrossingSite::Teleport {
                continue;
            }
            if let (Some((sphere, sign)), _, _) = provisional.teleport_geometry(k) {
                c.sphere = sphere;
                c.sign = sign;
            }
        }
    }
    TrackedLoop::new(events)
}

/// The crossing word of a loop.
pub fn read_word(lp: &TrackedLoop) -> Word {
    let letters: Vec<Letter> = lp.crossings().map(|c| c.letter()).collect();
    Word::try_from(letters).expect("validated loops have positive sphere indices")
}

/// The automorphism of `F_n` induced by `map`, read from the images of the
/// generator loops. Undersampled pieces are re-sampled at double density.
pub fn rho_of(map: &ChartMap, rank: usize) -> Result<NielsenAuto, CurveError> {
    rho_of_with(map, rank, DEFAULT_SAMPLES)
}

pub fn rho_of_with(map: &ChartMap, rank: usize, samples: usize) -> Result<NielsenAuto, CurveError> {
    check_rank(map, rank)?;
    let mut images = Vec::with_capacity(rank);
    for k in 1..=rank {
        images.push(image_word(map, k, rank, samples)?);
    }
    let nominal = match map.kind() {
        MapKind::F { i, j } => NielsenAuto::r(i, j, rank)?,
        MapKind::G { j } => NielsenAuto::inv(j, rank)?,
        MapKind::Twist { .. } => NielsenAuto::identity(rank)?,
    };
    let auto = NielsenAuto::from_images(rank, images)?;
    // keep the Nielsen factorization when the geometry confirms it
    Ok(if auto == nominal { nominal } else { auto })
}

fn image_word(map: &ChartMap, k: usize, rank: usize, samples: usize) -> Result<Word, CurveError> {
    let mut density = samples;
    let mut attempt = 0;
    loop {
        let lp = generator_loop(k, map, rank, density)?;
        match image_under(map, &lp) {
            Ok(img) => return Ok(read_word(&img)),
            Err(CurveError::Undersampled { .. }) if attempt < MAX_DOUBLINGS => {
                attempt += 1;
                density *= 2;
            }
            // odd shift moves every vertex off its old parameter
            Err(CurveError::NearSurface { .. }) if attempt < MAX_DOUBLINGS => {
                attempt += 1;
                density = density * 2 + 1;
            }
            Err(e) => return Err(e),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        Word::parse_text(s).unwrap()
    }

    fn map(kind: MapKind) -> ChartMap {
        ChartMap::standard(kind).unwrap()
    }

    #[test]
    fn disjoint_generator_is_a_single_crossing() {
        let lp = generator_loop(3, &map(MapKind::F { i: 1, j: 2 }), 3, 64).unwrap();
        assert_eq!(lp.pieces().count(), 0);
        let cs: Vec<_> = lp.crossings().collect();
        assert_eq!(cs.len(), 1);
        assert_eq!((cs[0].sphere, cs[0].sign), (3, Sign::Pos));
        assert_eq!(read_word(&lp), w("a3"));
    }

    #[test]
    fn torus_generator_contains_lifted_segment() {
        let lp = generator_loop(1, &map(MapKind::F { i: 1, j: 2 }), 3, 64).unwrap();
        let piece = lp.pieces().next().unwrap();
        assert!(piece.samples.iter().all(|s| s.point[1] == 0.0 && s.point[2] == 0.0));
        assert_eq!(piece.samples[0].point[0], 1.0 / 3.0);
        assert_eq!(piece.samples.last().unwrap().point[0], 1.0);
        assert_eq!(read_word(&lp), w("a1"));
    }

    #[test]
    fn ball_generator_three_pieces() {
        let lp = generator_loop(1, &map(MapKind::G { j: 1 }), 3, 64).unwrap();
        for piece in lp.pieces() {
            for s in &piece.samples {
                let p = s.point();
                if (0.4..=0.6).contains(&s.t) {
                    assert!(p.norm_squared() <= 1.0 / 9.0 + 1e-15, "γ₂ leaves the inner region at {}", s.t);
                } else {
                    assert_eq!((p.x, p.y), (0.0, 0.0));
                }
            }
        }
        assert_eq!(read_word(&lp), w("a1"));
    }

    #[test]
    fn index_errors() {
        let f = map(MapKind::F { i: 1, j: 2 });
        assert!(matches!(generator_loop(0, &f, 3, 64), Err(CurveError::IndexOutOfRange { .. })));
        assert!(matches!(generator_loop(4, &f, 3, 64), Err(CurveError::IndexOutOfRange { .. })));
        let f34 = map(MapKind::F { i: 3, j: 4 });
        assert!(matches!(generator_loop(1, &f34, 3, 64), Err(CurveError::MapOutOfRange { .. })));
    }

    #[test]
    fn image_examples() {
        let f = map(MapKind::F { i: 1, j: 2 });
        let a3 = generator_loop(3, &f, 3, 512).unwrap();
        assert_eq!(image_under(&f, &a3).unwrap(), a3);

        let a1 = generator_loop(1, &f, 3, 512).unwrap();
        let img = image_under(&f, &a1).unwrap();
        let cs: Vec<_> = img.crossings().collect();
        assert_eq!(cs.len(), 2);
        assert_eq!((cs[0].sphere, cs[0].sign, cs[0].site), (1, Sign::Pos, CrossingSite::Teleport));
        assert_eq!((cs[1].sphere, cs[1].sign, cs[1].site), (2, Sign::Pos, CrossingSite::Surface));
        assert!(cs[1].param > cs[0].param);
        assert_eq!(read_word(&img), w("a1 a2"));

        let g = map(MapKind::G { j: 1 });
        let a1 = generator_loop(1, &g, 3, 512).unwrap();
        let img = image_under(&g, &a1).unwrap();
        let cs: Vec<_> = img.crossings().collect();
        assert_eq!((cs[0].sphere, cs[0].sign), (1, Sign::Neg));
        assert_eq!(read_word(&img), w("a1^-1"));
    }

    #[test]
    fn image_of_image() {
        let f = map(MapKind::F { i: 1, j: 2 });
        let a1 = generator_loop(1, &f, 3, 512).unwrap();
        let once = image_under(&f, &a1).unwrap();
        let twice = image_under(&f, &once).unwrap();
        assert_eq!(read_word(&twice), w("a1 a2 a2"));
        let g = map(MapKind::G { j: 1 });
        let b = generator_loop(1, &g, 3, 512).unwrap();
        let gg = image_under(&g, &image_under(&g, &b).unwrap()).unwrap();
        assert_eq!(read_word(&gg), w("a1"));
    }

    #[test]
    fn identity_profile_keeps_word() {
        for kind in [MapKind::F { i: 2, j: 1 }, MapKind::G { j: 2 }, MapKind::Twist { i: 2 }] {
            let m = map(kind);
            let id = m.identity_like();
            for k in 1..=3 {
                let lp = generator_loop(k, &m, 3, 256).unwrap();
                assert_eq!(read_word(&image_under(&id, &lp).unwrap()), read_word(&lp));
            }
        }
    }

    #[test]
    fn undersampled_is_reported() {
        let f = map(MapKind::F { i: 1, j: 2 });
        let coarse = generator_loop(1, &f, 3, 4).unwrap();
        assert!(matches!(image_under(&f, &coarse), Err(CurveError::Undersampled { .. })));
        // rho_of recovers by doubling
        assert_eq!(rho_of_with(&f, 3, 4).unwrap(), NielsenAuto::r(1, 2, 3).unwrap());
    }

    #[test]
    fn rho_examples() {
        assert_eq!(rho_of(&map(MapKind::F { i: 1, j: 2 }), 3).unwrap(), NielsenAuto::r(1, 2, 3).unwrap());
        assert_eq!(rho_of(&map(MapKind::G { j: 1 }), 3).unwrap(), NielsenAuto::inv(1, 3).unwrap());
        assert!(rho_of(&map(MapKind::Twist { i: 1 }), 3).unwrap().is_identity());
        let r = rho_of(&map(MapKind::F { i: 3, j: 1 }), 3).unwrap();
        assert!(r.is_consistent());
        assert_eq!(r.factorization().len(), 1);
    }

    #[test]
    fn teleport_label_mismatch_rejected() {
        let f = map(MapKind::F { i: 1, j: 2 });
        let lp = generator_loop(1, &f, 3, 16).unwrap();
        let mut events = lp.events().to_vec();
        if let LoopEvent::Crossing(c) = &mut events[1] {
            c.sign = Sign::Neg;
        }
        assert!(matches!(TrackedLoop::new(events), Err(CurveError::Invalid(_))));
    }

    #[test]
    fn json_dump_lists_events() {
        let g = map(MapKind::G { j: 1 });
        let lp = generator_loop(1, &g, 2, 8).unwrap();
        let v: serde_json::Value = serde_json::from_str(&lp.to_json()).unwrap();
        let kinds: Vec<&str> = v.as_array().unwrap().iter().map(|e| e["event"].as_str().unwrap()).collect();
        assert_eq!(kinds, ["exterior", "chart", "crossing", "chart", "exterior"]);
        assert_eq!(v[2]["letter"], "a1");
        assert_eq!(v[1]["chart"], "P1");
    }

    #[test]
    fn locate_interpolates_across_surface_split() {
        let f = map(MapKind::F { i: 1, j: 2 });
        let img = image_under(&f, &generator_loop(1, &f, 2, 512).unwrap()).unwrap();
        let c = img.crossings().find(|c| c.site == CrossingSite::Surface).unwrap();
        let (_, p) = img.locate(c.param).unwrap();
        assert!((p.z - TorusChart::CROSSING_LEVEL).abs() < 1e-3);
        assert!(img.locate(0.1).is_none());
    }
}
