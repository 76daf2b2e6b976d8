//! Local models of the supports and the diffeomorphisms living in them.
//!
//! * [`TorusChart`] models the solid torus `N_{i,j}` with coordinates
//!   `(x, y, θ)`, `x² + y² <= 1`, `θ ∈ R/Z`, minus a ball of radius `1/3`
//!   around `(0, 0, 0)`. Its universal cover is the cylinder minus the balls
//!   `C_m` of radius `1/3` at heights `m ∈ Z`, projected by `z ↦ z mod 1`.
//!   The disk where the torus meets `A_j` is the level `θ = 1/2`.
//! * [`BallChart`] models `P_j`: the unit ball minus the balls `A_j⁻`
//!   (center `(1/6, 0, 0)`) and `A_j⁺` (center `(-1/6, 0, 0)`), radius `1/12`.
//!   The two boundary spheres are glued by the mirror `x ↦ -x`.
//! * [`CollarChart`] models a collar of `A_i⁺`: the shell `1 <= |v| <= 2`,
//!   whose inner sphere is `A_i⁺`.
//!
//! Torus chart points may carry an unwrapped `θ` (i.e. be given in cover
//! coordinates); every operation here treats `θ` modulo 1 except
//! [`ChartMap::lift_apply`], which keeps the lift.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::smooth::{BumpProfile, TwistProfile};

pub type Point = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;

/// Slack used when deciding whether a point sits on a boundary.
pub const BOUNDARY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChartError {
    #[error("point {point:?} lies outside the {chart} chart")]
    OutsideDomain { chart: ChartId, point: [f64; 3] },
    #[error("point {point:?} lies inside a removed ball of the {chart} chart")]
    InsideRemovedBall { chart: ChartId, point: [f64; 3] },
    #[error("finite-difference stencil of width {h} leaves the {chart} chart at {point:?}")]
    StencilLeavesDomain { chart: ChartId, point: [f64; 3], h: f64 },
    #[error("step must be positive, got {0}")]
    BadStep(f64),
    #[error("lift is only defined for maps of the torus chart")]
    NotTorusMap,
    #[error("invalid chart: {0}")]
    InvalidChart(String),
    #[error("maps {0} and {1} live in different charts and cannot be merged")]
    IncompatibleCharts(ChartId, ChartId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum ChartId {
    Torus { i: usize, j: usize },
    Ball { j: usize },
    Collar { i: usize },
}

impl fmt::Display for ChartId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChartId::Torus { i, j } => write!(f, "N{i},{j}"),
            ChartId::Ball { j } => write!(f, "P{j}"),
            ChartId::Collar { i } => write!(f, "C{i}"),
        }
    }
}

/// Which of the two boundary spheres glued into a core sphere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SphereSide {
    Minus,
    Plus,
}

impl SphereSide {
    pub fn opposite(self) -> SphereSide {
        match self {
            SphereSide::Minus => SphereSide::Plus,
            SphereSide::Plus => SphereSide::Minus,
        }
    }
}

/// A removed ball whose boundary is one side of the core sphere `sphere`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RemovedBall {
    pub center: Point,
    pub radius: f64,
    pub sphere: usize,
    pub side: SphereSide,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorusChart {
    pub i: usize,
    pub j: usize,
}

impl TorusChart {
    pub const OUTER_RADIUS: f64 = 1.0;
    pub const BALL_RADIUS: f64 = 1.0 / 3.0;
    pub const CROSSING_LEVEL: f64 = 0.5;
    /// Sign of an `A_j` crossing per unit of `θ`-increase through the
    /// crossing level. The core `* × S¹` run with decreasing `θ` represents
    /// `a_j`, which makes the image of `a_i` read `a_i a_j`.
    pub const THETA_ORIENTATION: i32 = -1;

    pub fn new(i: usize, j: usize) -> Result<Self, ChartError> {
        if i == j || i == 0 || j == 0 {
            return Err(ChartError::InvalidChart(format!("torus chart needs distinct i, j >= 1, got {i}, {j}")));
        }
        Ok(TorusChart { i, j })
    }

    pub fn id(&self) -> ChartId {
        ChartId::Torus { i: self.i, j: self.j }
    }

    /// Distance from `θ` to the nearest integer, i.e. to the height of the
    /// nearest lifted ball.
    pub fn height_offset(theta: f64) -> f64 {
        theta - theta.round()
    }

    pub fn removed_ball(&self) -> RemovedBall {
        RemovedBall {
            center: Point::zeros(),
            radius: Self::BALL_RADIUS,
            sphere: self.i,
            side: SphereSide::Plus,
        }
    }

    /// Squared distance to the nearest lifted ball center.
    fn ball_distance_sq(p: &Point) -> f64 {
        let dz = Self::height_offset(p.z);
        p.x * p.x + p.y * p.y + dz * dz
    }

    pub fn classify(&self, p: &Point) -> Result<(), ChartError> {
        let arr = [p.x, p.y, p.z];
        if !p.iter().all(|c| c.is_finite()) || p.x * p.x + p.y * p.y > 1.0 + BOUNDARY_TOL {
            return Err(ChartError::OutsideDomain { chart: self.id(), point: arr });
        }
        let r = Self::ball_distance_sq(p).sqrt();
        if r < Self::BALL_RADIUS - BOUNDARY_TOL {
            return Err(ChartError::InsideRemovedBall { chart: self.id(), point: arr });
        }
        Ok(())
    }

    pub fn on_removed_ball(&self, p: &Point, tol: f64) -> bool {
        (Self::ball_distance_sq(p).sqrt() - Self::BALL_RADIUS).abs() <= tol
    }

    pub fn outer_distance(&self, p: &Point) -> f64 {
        Self::OUTER_RADIUS - (p.x * p.x + p.y * p.y).sqrt()
    }

    /// Covering projection `(x, y, z) ↦ (x, y, z mod 1)`.
    pub fn project(q: &Point) -> Point {
        Point::new(q.x, q.y, q.z.rem_euclid(1.0))
    }

    /// Derivative of the covering projection in chart coordinates. The
    /// projection is a translation in `θ`, so this is the identity at every
    /// lift; it is kept explicit because the torus frame is defined through it.
    pub fn projection_jacobian(_q: &Point) -> Mat3 {
        Mat3::identity()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BallChart {
    pub j: usize,
}

impl BallChart {
    pub const OUTER_RADIUS: f64 = 1.0;
    pub const INNER_RADIUS: f64 = 1.0 / 3.0;
    pub const CENTER_OFFSET: f64 = 1.0 / 6.0;
    pub const BALL_RADIUS: f64 = 1.0 / 12.0;

    pub fn new(j: usize) -> Result<Self, ChartError> {
        if j == 0 {
            return Err(ChartError::InvalidChart("ball chart index must be >= 1".into()));
        }
        Ok(BallChart { j })
    }

    pub fn id(&self) -> ChartId {
        ChartId::Ball { j: self.j }
    }

    pub fn removed_balls(&self) -> [RemovedBall; 2] {
        [
            RemovedBall {
                center: Point::new(Self::CENTER_OFFSET, 0.0, 0.0),
                radius: Self::BALL_RADIUS,
                sphere: self.j,
                side: SphereSide::Minus,
            },
            RemovedBall {
                center: Point::new(-Self::CENTER_OFFSET, 0.0, 0.0),
                radius: Self::BALL_RADIUS,
                sphere: self.j,
                side: SphereSide::Plus,
            },
        ]
    }

    pub fn classify(&self, p: &Point) -> Result<(), ChartError> {
        let arr = [p.x, p.y, p.z];
        if !p.iter().all(|c| c.is_finite()) || p.norm() > Self::OUTER_RADIUS + BOUNDARY_TOL {
            return Err(ChartError::OutsideDomain { chart: self.id(), point: arr });
        }
        for b in self.removed_balls() {
            if (p - b.center).norm() < b.radius - BOUNDARY_TOL {
                return Err(ChartError::InsideRemovedBall { chart: self.id(), point: arr });
            }
        }
        Ok(())
    }

    /// The side whose boundary sphere contains `p`, if any.
    pub fn side_of(&self, p: &Point, tol: f64) -> Option<SphereSide> {
        self.removed_balls()
            .into_iter()
            .find(|b| ((p - b.center).norm() - b.radius).abs() <= tol)
            .map(|b| b.side)
    }

    /// The gluing of `A_j⁻` with `A_j⁺`: the mirror `x ↦ -x`.
    pub fn glue(p: &Point) -> Point {
        Point::new(-p.x, p.y, p.z)
    }

    pub fn outer_distance(&self, p: &Point) -> f64 {
        Self::OUTER_RADIUS - p.norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollarChart {
    pub i: usize,
}

impl CollarChart {
    pub const INNER_RADIUS: f64 = 1.0;
    pub const OUTER_RADIUS: f64 = 2.0;

    pub fn new(i: usize) -> Result<Self, ChartError> {
        if i == 0 {
            return Err(ChartError::InvalidChart("collar chart index must be >= 1".into()));
        }
        Ok(CollarChart { i })
    }

    pub fn id(&self) -> ChartId {
        ChartId::Collar { i: self.i }
    }

    pub fn removed_ball(&self) -> RemovedBall {
        RemovedBall {
            center: Point::zeros(),
            radius: Self::INNER_RADIUS,
            sphere: self.i,
            side: SphereSide::Plus,
        }
    }

    pub fn classify(&self, p: &Point) -> Result<(), ChartError> {
        let arr = [p.x, p.y, p.z];
        let r = p.norm();
        if !r.is_finite() || r > Self::OUTER_RADIUS + BOUNDARY_TOL {
            return Err(ChartError::OutsideDomain { chart: self.id(), point: arr });
        }
        if r < Self::INNER_RADIUS - BOUNDARY_TOL {
            return Err(ChartError::InsideRemovedBall { chart: self.id(), point: arr });
        }
        Ok(())
    }

    pub fn outer_distance(&self, p: &Point) -> f64 {
        Self::OUTER_RADIUS - p.norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum Chart {
    Torus(TorusChart),
    Ball(BallChart),
    Collar(CollarChart),
}

impl Chart {
    pub fn id(&self) -> ChartId {
        match self {
            Chart::Torus(c) => c.id(),
            Chart::Ball(c) => c.id(),
            Chart::Collar(c) => c.id(),
        }
    }

    pub fn classify(&self, p: &Point) -> Result<(), ChartError> {
        match self {
            Chart::Torus(c) => c.classify(p),
            Chart::Ball(c) => c.classify(p),
            Chart::Collar(c) => c.classify(p),
        }
    }

    /// Distance to the outer boundary (negative outside).
    pub fn outer_distance(&self, p: &Point) -> f64 {
        match self {
            Chart::Torus(c) => c.outer_distance(p),
            Chart::Ball(c) => c.outer_distance(p),
            Chart::Collar(c) => c.outer_distance(p),
        }
    }

    /// Which removed-ball boundary `p` sits on, as `(sphere, side)`.
    pub fn boundary_sphere(&self, p: &Point, tol: f64) -> Option<(usize, SphereSide)> {
        match self {
            Chart::Torus(c) => c.on_removed_ball(p, tol).then_some((c.i, SphereSide::Plus)),
            Chart::Ball(c) => c.side_of(p, tol).map(|s| (c.j, s)),
            Chart::Collar(c) => ((p.norm() - CollarChart::INNER_RADIUS).abs() <= tol)
                .then_some((c.i, SphereSide::Plus)),
        }
    }
}

/// A radial function driving a chart map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum RadialProfile {
    Bump(BumpProfile),
    Step(TwistProfile),
    /// The constant `0`; turns any chart map into the identity.
    Zero,
    /// Pointwise sum; the profile of a composite of two maps of one chart.
    Sum(Vec<RadialProfile>),
}

impl RadialProfile {
    pub fn value(&self, r: f64) -> f64 {
        match self {
            RadialProfile::Bump(p) => p.value(r),
            RadialProfile::Step(p) => p.value(r),
            RadialProfile::Zero => 0.0,
            RadialProfile::Sum(ps) => ps.iter().map(|p| p.value(r)).sum(),
        }
    }

    pub fn derivative(&self, r: f64) -> f64 {
        match self {
            RadialProfile::Bump(p) => p.derivative(r),
            RadialProfile::Step(p) => p.derivative(r),
            RadialProfile::Zero => 0.0,
            RadialProfile::Sum(ps) => ps.iter().map(|p| p.derivative(r)).sum(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum MapKind {
    /// Lift of `R_{i,j}`: the `θ`-shear of the solid torus `N_{i,j}`.
    F { i: usize, j: usize },
    /// Lift of `I_j`: the half-turn of `P_j` swapping `A_j⁻` and `A_j⁺`.
    G { j: usize },
    /// The sphere twist about `A_i`.
    Twist { i: usize },
}

impl fmt::Display for MapKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MapKind::F { i, j } => write!(f, "F{i},{j}"),
            MapKind::G { j } => write!(f, "G{j}"),
            MapKind::Twist { i } => write!(f, "T{i}"),
        }
    }
}

impl std::str::FromStr for MapKind {
    type Err = ChartError;

    /// Accepts `F1,2`, `F:1:2`, `G1`, `G:1`, `T1`, `T:1`.
    fn from_str(s: &str) -> Result<MapKind, ChartError> {
        let bad = || ChartError::InvalidChart(format!("cannot parse map `{s}`"));
        let mut chars = s.chars();
        let head = chars.next().ok_or_else(bad)?;
        let nums: Vec<usize> = chars
            .as_str()
            .split([',', ':'])
            .filter(|t| !t.is_empty())
            .map(|t| t.trim().parse::<usize>().map_err(|_| bad()))
            .collect::<Result<_, _>>()?;
        match (head.to_ascii_uppercase(), nums.as_slice()) {
            ('F', [i, j]) => Ok(MapKind::F { i: *i, j: *j }),
            ('G', [j]) => Ok(MapKind::G { j: *j }),
            ('T', [i]) => Ok(MapKind::Twist { i: *i }),
            _ => Err(bad()),
        }
    }
}

/// `(cos 2πt, sin 2πt)`, exact at quarter turns.
fn cos_sin_turns(turns: f64) -> (f64, f64) {
    let t = turns.rem_euclid(1.0);
    if t == 0.0 {
        (1.0, 0.0)
    } else if t == 0.25 {
        (0.0, 1.0)
    } else if t == 0.5 {
        (-1.0, 0.0)
    } else if t == 0.75 {
        (0.0, -1.0)
    } else {
        let a = 2.0 * PI * t;
        (a.cos(), a.sin())
    }
}

/// Rotation about the z-axis by `turns` full turns.
pub fn rot_z_turns(turns: f64) -> Mat3 {
    let (c, s) = cos_sin_turns(turns);
    Mat3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

/// Derivative of [`rot_z_turns`] with respect to the angle in radians.
fn rot_z_turns_dangle(turns: f64) -> Mat3 {
    let (c, s) = cos_sin_turns(turns);
    Mat3::new(-s, -c, 0.0, c, -s, 0.0, 0.0, 0.0, 0.0)
}

/// One of the supported diffeomorphisms together with its chart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartMap {
    kind: MapKind,
    chart: Chart,
    profile: RadialProfile,
}

impl ChartMap {
    pub fn new(kind: MapKind, profile: RadialProfile) -> Result<ChartMap, ChartError> {
        let chart = match kind {
            MapKind::F { i, j } => Chart::Torus(TorusChart::new(i, j)?),
            MapKind::G { j } => Chart::Ball(BallChart::new(j)?),
            MapKind::Twist { i } => Chart::Collar(CollarChart::new(i)?),
        };
        Ok(ChartMap { kind, chart, profile })
    }

    pub fn f(i: usize, j: usize, profile: BumpProfile) -> Result<ChartMap, ChartError> {
        ChartMap::new(MapKind::F { i, j }, RadialProfile::Bump(profile))
    }

    pub fn g(j: usize, profile: BumpProfile) -> Result<ChartMap, ChartError> {
        ChartMap::new(MapKind::G { j }, RadialProfile::Bump(profile))
    }

    pub fn twist(i: usize, eta: TwistProfile) -> Result<ChartMap, ChartError> {
        ChartMap::new(MapKind::Twist { i }, RadialProfile::Step(eta))
    }

    /// The map of `kind` with its default profile.
    pub fn standard(kind: MapKind) -> Result<ChartMap, ChartError> {
        let profile = match kind {
            MapKind::F { .. } | MapKind::G { .. } => RadialProfile::Bump(BumpProfile::default()),
            MapKind::Twist { .. } => RadialProfile::Step(TwistProfile::default()),
        };
        ChartMap::new(kind, profile)
    }

    /// Same chart, profile `≡ 0`: the identity diffeomorphism.
    pub fn identity_like(&self) -> ChartMap {
        ChartMap { kind: self.kind, chart: self.chart, profile: RadialProfile::Zero }
    }

    /// `self ∘ inner` for two maps of the same chart, as a single chart map.
    /// Each family preserves the radius its profile reads, so the composite
    /// is the map whose profile is the sum.
    pub fn merged_with(&self, inner: &ChartMap) -> Result<ChartMap, ChartError> {
        if self.chart.id() != inner.chart.id() {
            return Err(ChartError::IncompatibleCharts(self.chart.id(), inner.chart.id()));
        }
        Ok(ChartMap {
            kind: self.kind,
            chart: self.chart,
            profile: RadialProfile::Sum(vec![self.profile.clone(), inner.profile.clone()]),
        })
    }

    pub fn kind(&self) -> MapKind {
        self.kind
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn chart_id(&self) -> ChartId {
        self.chart.id()
    }

    pub fn profile(&self) -> &RadialProfile {
        &self.profile
    }

    /// The radius the profile reads and its gradient in chart coordinates.
    fn radius_and_gradient(&self, p: &Point) -> (f64, Point) {
        match self.kind {
            MapKind::F { .. } => {
                let r = (p.x * p.x + p.y * p.y).sqrt();
                let g = if r > 0.0 { Point::new(p.x / r, p.y / r, 0.0) } else { Point::zeros() };
                (r, g)
            }
            MapKind::G { .. } => {
                let r = p.norm();
                let g = if r > 0.0 { p / r } else { Point::zeros() };
                (r, g)
            }
            MapKind::Twist { .. } => {
                let r = p.norm();
                (r - CollarChart::INNER_RADIUS, p / r)
            }
        }
    }

    /// How far the map moves `p`, in turns: the `θ`-shift for `F`, the
    /// rotation angle (in turns) for `G` and the twist. Negated for the inverse.
    fn turns_at(&self, p: &Point, inverse: bool) -> (f64, Point) {
        let (r, grad) = self.radius_and_gradient(p);
        let scale = match self.kind {
            MapKind::F { .. } | MapKind::Twist { .. } => 1.0,
            MapKind::G { .. } => 0.5,
        };
        let sgn = if inverse { -1.0 } else { 1.0 };
        (sgn * scale * self.profile.value(r), grad * (sgn * scale * self.profile.derivative(r)))
    }

    fn eval(&self, p: &Point, inverse: bool, wrap: bool) -> Point {
        let (turns, _) = self.turns_at(p, inverse);
        match self.kind {
            MapKind::F { .. } => {
                let z = p.z + turns;
                Point::new(p.x, p.y, if wrap { z.rem_euclid(1.0) } else { z })
            }
            MapKind::G { .. } | MapKind::Twist { .. } => rot_z_turns(turns) * p,
        }
    }

    fn jacobian_of(&self, p: &Point, inverse: bool) -> Mat3 {
        let (turns, dturns) = self.turns_at(p, inverse);
        match self.kind {
            MapKind::F { .. } => {
                let mut m = Mat3::identity();
                m[(2, 0)] = dturns.x;
                m[(2, 1)] = dturns.y;
                m
            }
            MapKind::G { .. } | MapKind::Twist { .. } => {
                let dangle = dturns * (2.0 * PI);
                rot_z_turns(turns) + rot_z_turns_dangle(turns) * p * dangle.transpose()
            }
        }
    }

    /// `F(p)`. Torus chart results have `θ ∈ [0, 1)`.
    pub fn apply(&self, p: &Point) -> Result<Point, ChartError> {
        self.chart.classify(p)?;
        Ok(self.eval(p, false, true))
    }

    /// `F⁻¹(p)`, evaluated in closed form.
    pub fn apply_inverse(&self, p: &Point) -> Result<Point, ChartError> {
        self.chart.classify(p)?;
        Ok(self.eval(p, true, true))
    }

    /// The lift `f̃(x, y, z) = (x, y, z + ψ(√(x² + y²)))` to the universal cover.
    pub fn lift_apply(&self, q: &Point) -> Result<Point, ChartError> {
        self.lift_eval(q, false)
    }

    pub fn lift_apply_inverse(&self, q: &Point) -> Result<Point, ChartError> {
        self.lift_eval(q, true)
    }

    fn lift_eval(&self, q: &Point, inverse: bool) -> Result<Point, ChartError> {
        match self.chart {
            Chart::Torus(c) => {
                c.classify(q)?;
                Ok(self.eval(q, inverse, false))
            }
            _ => Err(ChartError::NotTorusMap),
        }
    }

    /// Apply without wrapping `θ` (identical to `apply` off the torus chart).
    pub fn apply_unwrapped(&self, p: &Point) -> Result<Point, ChartError> {
        self.chart.classify(p)?;
        Ok(self.eval(p, false, false))
    }

    /// Closed-form `DF_p` in chart coordinates.
    pub fn jacobian_analytic(&self, p: &Point) -> Result<Mat3, ChartError> {
        self.chart.classify(p)?;
        Ok(self.jacobian_of(p, false))
    }

    /// Closed-form derivative of `F⁻¹` at `p`.
    pub fn jacobian_inverse_analytic(&self, p: &Point) -> Result<Mat3, ChartError> {
        self.chart.classify(p)?;
        Ok(self.jacobian_of(p, true))
    }

    /// Central-difference Jacobian; test oracle only.
    pub fn jacobian_fd(&self, p: &Point, h: f64) -> Result<Mat3, ChartError> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(ChartError::BadStep(h));
        }
        self.chart.classify(p)?;
        let mut m = Mat3::zeros();
        for k in 0..3 {
            let mut e = Point::zeros();
            e[k] = h;
            let (plus, minus) = (p + e, p - e);
            for q in [&plus, &minus] {
                if self.chart.classify(q).is_err() {
                    return Err(ChartError::StencilLeavesDomain {
                        chart: self.chart.id(),
                        point: [p.x, p.y, p.z],
                        h,
                    });
                }
            }
            let col = (self.eval(&plus, false, false) - self.eval(&minus, false, false)) / (2.0 * h);
            m.set_column(k, &col);
        }
        Ok(m)
    }
}

impl fmt::Display for ChartMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind)
    }
}
