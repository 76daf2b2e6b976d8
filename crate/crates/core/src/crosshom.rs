//! Derivative paths along generator loops and the twist vectors they define.
//!
//! All charts carry their coordinate frame, so the derivative of a chart map
//! along a loop is a matrix path. Outside the map's chart the map is the
//! identity and so is its derivative. The path starts and ends at the base
//! point, giving a loop in `GL⁺(3, R)` whose `Z/2` class is one entry of the
//! twist vector.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::charts::{Chart, ChartError, ChartId, ChartMap, Mat3, Point};
use crate::curve::{self, CurveError, Sample, TrackedLoop};
use crate::loopclass::{self, LoopClass, LoopClassError, MatrixPath};

/// Allowed jump of the derivative path where it enters or leaves a chart.
pub const CONTINUITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CrossHomError {
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Chart(#[from] ChartError),
    #[error(transparent)]
    LoopClass(#[from] LoopClassError),
    #[error("derivative path jumps by {jump} at t = {t}")]
    Discontinuous { t: f64, jump: f64 },
    #[error("sample point lies in {point}, not in a chart of {a} or {b}")]
    ForeignPoint { point: ChartId, a: ChartId, b: ChartId },
    #[error("twist vectors of ranks {0} and {1} cannot be combined")]
    RankMismatch(usize, usize),
    #[error("cannot parse twist vector {0:?}")]
    Parse(String),
}

fn max_abs(m: &Mat3) -> f64 {
    m.iter().fold(0.0f64, |a, v| a.max(v.abs()))
}

/// `DF_p` for `p` in the map's chart, as the inverse of `D(F⁻¹)` at `F(p)`.
/// Torus chart points are taken in cover coordinates.
pub fn derivative_at(map: &ChartMap, p: &Point) -> Result<Mat3, ChartError> {
    let image = match map.chart() {
        Chart::Torus(_) => map.lift_apply(p)?,
        _ => map.apply(p)?,
    };
    let inv = map.jacobian_inverse_analytic(&image)?;
    Ok(inv.try_inverse().expect("chart map derivatives are invertible"))
}

/// The derivative of `map` along `lp`, with the given sampling grid.
pub fn derivative_along(map: &ChartMap, lp: &TrackedLoop, grid: usize) -> Result<MatrixPath, CrossHomError> {
    let runs: Vec<(Chart, Vec<Sample>)> = lp.runs().into_iter().filter(|(c, _)| c.id() == map.chart_id()).collect();
    // every run endpoint must be reached continuously
    let mut prev: (f64, Mat3) = (0.0, Mat3::identity());
    for (_, samples) in &runs {
        let first = samples.first().expect("runs are non-empty");
        let last = samples.last().expect("runs are non-empty");
        for s in &samples[..] {
            derivative_at(map, &s.point())?;
        }
        let d0 = derivative_at(map, &first.point())?;
        let jump = max_abs(&(d0 - prev.1));
        if jump > CONTINUITY_TOL {
            return Err(CrossHomError::Discontinuous { t: first.t, jump });
        }
        prev = (last.t, derivative_at(map, &last.point())?);
    }
    let jump = max_abs(&(prev.1 - Mat3::identity()));
    if jump > CONTINUITY_TOL {
        return Err(CrossHomError::Discontinuous { t: prev.0, jump });
    }
    let map = map.clone();
    let path = MatrixPath::new(move |t| match curve::locate_in(&runs, t) {
        Some((_, p)) => derivative_at(&map, &p).unwrap_or_else(|_| Mat3::from_element(f64::NAN)),
        None => Mat3::identity(),
    });
    Ok(path.with_grid(grid))
}

/// Sampling settings for twist computations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwistSettings {
    /// Polyline vertices per chart piece of a generator loop.
    pub samples: usize,
    /// Base grid of the matrix path.
    pub grid: usize,
    pub budget: u32,
    /// Inner-product threshold below which the quaternion lift is refined.
    pub continuity: f64,
    /// Distance at which the end of the lift counts as `±` its start.
    pub pole_tol: f64,
}

impl Default for TwistSettings {
    fn default() -> Self {
        TwistSettings {
            samples: curve::DEFAULT_SAMPLES,
            grid: loopclass::DEFAULT_GRID,
            budget: loopclass::DEFAULT_REFINEMENT_BUDGET,
            continuity: loopclass::CONTINUITY_THRESHOLD,
            pole_tol: loopclass::POLE_TOL,
        }
    }
}

impl TwistSettings {
    pub fn doubled(self) -> TwistSettings {
        TwistSettings { samples: 2 * self.samples, grid: 2 * self.grid, ..self }
    }
}

/// A class in `H¹(F_n; Z/2)`: the value on each generator `a_1 .. a_n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TwistVector(pub Vec<bool>);

impl TwistVector {
    pub fn zero(rank: usize) -> TwistVector {
        TwistVector(vec![false; rank])
    }

    /// The vector dual to `a_k` (1-based).
    pub fn unit(rank: usize, k: usize) -> TwistVector {
        let mut v = TwistVector::zero(rank);
        v.0[k - 1] = true;
        v
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn get(&self, k: usize) -> LoopClass {
        LoopClass(self.0[k - 1])
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|b| !b)
    }

    pub fn add(&self, other: &TwistVector) -> Result<TwistVector, CrossHomError> {
        if self.rank() != other.rank() {
            return Err(CrossHomError::RankMismatch(self.rank(), other.rank()));
        }
        Ok(TwistVector(self.0.iter().zip(&other.0).map(|(a, b)| a ^ b).collect()))
    }
}

impl fmt::Display for TwistVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            write!(f, "{}", u8::from(*b))?;
        }
        Ok(())
    }
}

impl FromStr for TwistVector {
    type Err = CrossHomError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(CrossHomError::Parse(s.to_string())),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(TwistVector)
    }
}

/// The class of the derivative of `map` along the standard loop for `a_k`.
pub fn twist_entry(map: &ChartMap, k: usize, rank: usize, settings: &TwistSettings) -> Result<LoopClass, CrossHomError> {
    let lp = curve::generator_loop(k, map, rank, settings.samples)?;
    let path = derivative_along(map, &lp, settings.grid)?
        .with_budget(settings.budget)
        .with_continuity(settings.continuity)
        .with_pole_tol(settings.pole_tol);
    Ok(loopclass::loop_class(&path)?)
}

pub fn twisting_of(map: &ChartMap, rank: usize, settings: &TwistSettings) -> Result<TwistVector, CrossHomError> {
    (1..=rank)
        .map(|k| twist_entry(map, k, rank, settings).map(|c| c.0))
        .collect::<Result<Vec<_>, _>>()
        .map(TwistVector)
}

/// A point given in the coordinates of one chart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplePoint {
    pub chart: Chart,
    pub coords: [f64; 3],
}

impl SamplePoint {
    pub fn point(&self) -> Point {
        Point::new(self.coords[0], self.coords[1], self.coords[2])
    }
}

/// `max |D(a∘b)_p − Da_{b(p)} Db_p|` at one point. Maps of one chart are
/// composed in closed form; maps of different charts have disjoint supports,
/// so at most one of them moves `p`.
pub fn cocycle_check(a: &ChartMap, b: &ChartMap, p: &SamplePoint) -> Result<f64, CrossHomError> {
    let x = p.point();
    let here = p.chart.id();
    if here != a.chart_id() && here != b.chart_id() {
        return Err(CrossHomError::ForeignPoint { point: here, a: a.chart_id(), b: b.chart_id() });
    }
    p.chart.classify(&x)?;
    if a.chart_id() == b.chart_id() {
        let composite = a.merged_with(b)?;
        let lhs = derivative_at(&composite, &x)?;
        let bx = match b.chart() {
            Chart::Torus(_) => b.lift_apply(&x)?,
            _ => b.apply(&x)?,
        };
        let rhs = derivative_at(a, &bx)? * derivative_at(b, &x)?;
        return Ok(max_abs(&(lhs - rhs)));
    }
    let (lhs, rhs) = if here == b.chart_id() {
        let db = derivative_at(b, &x)?;
        (db, Mat3::identity() * db)
    } else {
        let da = derivative_at(a, &x)?;
        (da, da * Mat3::identity())
    };
    Ok(max_abs(&(lhs - rhs)))
}
