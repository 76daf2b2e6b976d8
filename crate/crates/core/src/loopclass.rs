//! The class of a loop in `π₁(GL⁺(3, R), id) ≅ π₁(SO(3), id) ≅ Z/2`.
//!
//! Each sample is retracted onto `SO(3)` by its orthogonal polar factor and
//! lifted to the unit quaternions, choosing at every step the sign closest to
//! the previous lift. The loop is non-trivial exactly when the lift ends at
//! the antipode of where it started.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::charts::Mat3;

pub const DEFAULT_GRID: usize = 256;
pub const DEFAULT_REFINEMENT_BUDGET: u32 = 16;
/// Consecutive lifts with a smaller inner product are bisected.
pub const CONTINUITY_THRESHOLD: f64 = 0.5;
/// Distance within which the final lift must sit at `±` the initial one.
pub const POLE_TOL: f64 = 1e-6;
/// Endpoints of a loop must equal the identity to this tolerance.
pub const ENDPOINT_TOL: f64 = 1e-9;
const POLAR_TOL: f64 = 1e-12;
const POLAR_MAX_ITER: usize = 100;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LoopClassError {
    #[error("determinant {det} <= 0 at t = {t}")]
    NonPositiveDeterminant { t: f64, det: f64 },
    #[error("determinant {0} <= 0")]
    SingularInput(f64),
    #[error("polar iteration did not converge (defect {0})")]
    PolarDiverged(f64),
    #[error("matrix is not a rotation (orthogonality defect {0})")]
    NotRotation(f64),
    #[error("degenerate quaternion extraction")]
    DegenerateQuaternion,
    #[error("refinement budget exhausted near t = {t}")]
    BudgetExhausted { t: f64 },
    #[error("path is not a loop at the identity: {0}")]
    NotALoop(String),
    #[error("invalid path: {0}")]
    InvalidPath(String),
}

fn max_abs(m: &Mat3) -> f64 {
    m.iter().fold(0.0f64, |a, v| a.max(v.abs()))
}

fn orthogonality_defect(m: &Mat3) -> f64 {
    max_abs(&(m.transpose() * m - Mat3::identity()))
}

/// Orthogonal polar factor `Q` of `m = Q S`, by the averaging iteration
/// `X ← (X + X⁻ᵀ) / 2`.
pub fn polar_rotation(m: &Mat3) -> Result<Mat3, LoopClassError> {
    let det = m.determinant();
    if !(det > 0.0) {
        return Err(LoopClassError::SingularInput(det));
    }
    let mut x = *m;
    let mut defect = orthogonality_defect(&x);
    for _ in 0..POLAR_MAX_ITER {
        if defect < POLAR_TOL {
            return Ok(x);
        }
        let inv_t = x
            .try_inverse()
            .ok_or(LoopClassError::PolarDiverged(defect))?
            .transpose();
        x = (x + inv_t) * 0.5;
        defect = orthogonality_defect(&x);
    }
    if defect < POLAR_TOL {
        Ok(x)
    } else {
        Err(LoopClassError::PolarDiverged(defect))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitQuaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl UnitQuaternion {
    pub const IDENTITY: UnitQuaternion = UnitQuaternion { w: 1.0, x: 0.0, y: 0.0, z: 0.0 };

    pub fn dot(&self, o: &UnitQuaternion) -> f64 {
        self.w * o.w + self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn neg(&self) -> UnitQuaternion {
        UnitQuaternion { w: -self.w, x: -self.x, y: -self.y, z: -self.z }
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn distance(&self, o: &UnitQuaternion) -> f64 {
        let d = UnitQuaternion { w: self.w - o.w, x: self.x - o.x, y: self.y - o.y, z: self.z - o.z };
        d.norm()
    }

    pub fn components(&self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    /// The rotation this quaternion represents.
    pub fn to_rotation(&self) -> Mat3 {
        let UnitQuaternion { w, x, y, z } = *self;
        Mat3::new(
            1.0 - 2.0 * (y * y + z * z),
            2.0 * (x * y - w * z),
            2.0 * (x * z + w * y),
            2.0 * (x * y + w * z),
            1.0 - 2.0 * (x * x + z * z),
            2.0 * (y * z - w * x),
            2.0 * (x * z - w * y),
            2.0 * (y * z + w * x),
            1.0 - 2.0 * (x * x + y * y),
        )
    }
}

/// A unit quaternion for the rotation `r` (Shepperd's method). With a
/// previous lift, the sign with non-negative inner product is chosen;
/// without, `w >= 0` and then the first non-zero component `>= 0`.
pub fn to_quaternion(prev: Option<&UnitQuaternion>, r: &Mat3) -> Result<UnitQuaternion, LoopClassError> {
    let defect = orthogonality_defect(r);
    if defect > 1e-6 || r.determinant() <= 0.0 {
        return Err(LoopClassError::NotRotation(defect));
    }
    let tr = r.trace();
    let cands = [
        1.0 + tr,
        1.0 + 2.0 * r[(0, 0)] - tr,
        1.0 + 2.0 * r[(1, 1)] - tr,
        1.0 + 2.0 * r[(2, 2)] - tr,
    ];
    let (best, &val) = cands
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("four candidates");
    if val < 1e-12 {
        return Err(LoopClassError::DegenerateQuaternion);
    }
    let s = val.sqrt() * 2.0; // 4 × the chosen component
    let q = match best {
        0 => UnitQuaternion {
            w: s / 4.0,
            x: (r[(2, 1)] - r[(1, 2)]) / s,
            y: (r[(0, 2)] - r[(2, 0)]) / s,
            z: (r[(1, 0)] - r[(0, 1)]) / s,
        },
        1 => UnitQuaternion {
            w: (r[(2, 1)] - r[(1, 2)]) / s,
            x: s / 4.0,
            y: (r[(0, 1)] + r[(1, 0)]) / s,
            z: (r[(0, 2)] + r[(2, 0)]) / s,
        },
        2 => UnitQuaternion {
            w: (r[(0, 2)] - r[(2, 0)]) / s,
            x: (r[(0, 1)] + r[(1, 0)]) / s,
            y: s / 4.0,
            z: (r[(1, 2)] + r[(2, 1)]) / s,
        },
        _ => UnitQuaternion {
            w: (r[(1, 0)] - r[(0, 1)]) / s,
            x: (r[(0, 2)] + r[(2, 0)]) / s,
            y: (r[(1, 2)] + r[(2, 1)]) / s,
            z: s / 4.0,
        },
    };
    let n = q.norm();
    let q = UnitQuaternion { w: q.w / n, x: q.x / n, y: q.y / n, z: q.z / n };
    let flip = match prev {
        Some(p) => q.dot(p) < 0.0,
        None => {
            let first = q.components().into_iter().find(|c| *c != 0.0).unwrap_or(0.0);
            q.w < 0.0 || (q.w == 0.0 && first < 0.0)
        }
    };
    Ok(if flip { q.neg() } else { q })
}

/// An element of `Z/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct LoopClass(pub bool);

impl LoopClass {
    pub const TRIVIAL: LoopClass = LoopClass(false);
    pub const GENERATOR: LoopClass = LoopClass(true);

    pub fn bit(self) -> u8 {
        u8::from(self.0)
    }
}

impl std::ops::Add for LoopClass {
    type Output = LoopClass;
    fn add(self, rhs: LoopClass) -> LoopClass {
        LoopClass(self.0 ^ rhs.0)
    }
}

impl fmt::Display for LoopClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.bit())
    }
}

type Evaluator = Arc<dyn Fn(f64) -> Mat3 + Send + Sync>;

/// A path `[0, 1] → GL⁺(3, R)` given by an evaluator, with sampling settings.
#[derive(Clone)]
pub struct MatrixPath {
    eval: Evaluator,
    grid: usize,
    budget: u32,
    continuity: f64,
    pole_tol: f64,
}

impl fmt::Debug for MatrixPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MatrixPath")
            .field("grid", &self.grid)
            .field("budget", &self.budget)
            .field("continuity", &self.continuity)
            .field("pole_tol", &self.pole_tol)
            .finish()
    }
}

impl MatrixPath {
    pub fn new(eval: impl Fn(f64) -> Mat3 + Send + Sync + 'static) -> MatrixPath {
        MatrixPath {
            eval: Arc::new(eval),
            grid: DEFAULT_GRID,
            budget: DEFAULT_REFINEMENT_BUDGET,
            continuity: CONTINUITY_THRESHOLD,
            pole_tol: POLE_TOL,
        }
    }

    pub fn with_grid(mut self, grid: usize) -> MatrixPath {
        self.grid = grid;
        self
    }

    pub fn with_budget(mut self, budget: u32) -> MatrixPath {
        self.budget = budget;
        self
    }

    pub fn with_continuity(mut self, threshold: f64) -> MatrixPath {
        self.continuity = threshold;
        self
    }

    pub fn with_pole_tol(mut self, tol: f64) -> MatrixPath {
        self.pole_tol = tol;
        self
    }

    fn derived(&self, eval: Evaluator) -> MatrixPath {
        MatrixPath { eval, ..self.clone() }
    }

    pub fn grid(&self) -> usize {
        self.grid
    }

    pub fn eval(&self, t: f64) -> Mat3 {
        (self.eval)(t)
    }

    pub fn constant(m: Mat3) -> MatrixPath {
        MatrixPath::new(move |_| m)
    }

    pub fn identity() -> MatrixPath {
        MatrixPath::constant(Mat3::identity())
    }

    /// The full turn `l(t)` about the z-axis, generating `π₁(SO(3))`.
    pub fn full_turn() -> MatrixPath {
        MatrixPath::new(|t| {
            let (s, c) = (2.0 * PI * t).sin_cos();
            Mat3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
        })
    }

    /// `self` on `[0, 1/2]`, then `other` on `[1/2, 1]`.
    pub fn concat(&self, other: &MatrixPath) -> MatrixPath {
        let (a, b) = (self.eval.clone(), other.eval.clone());
        let mut p = self.derived(Arc::new(move |t| if t <= 0.5 { a(2.0 * t) } else { b(2.0 * t - 1.0) }));
        p.grid = self.grid.max(other.grid);
        p.budget = self.budget.max(other.budget);
        p
    }

    pub fn reversed(&self) -> MatrixPath {
        let a = self.eval.clone();
        self.derived(Arc::new(move |t| a(1.0 - t)))
    }

    /// `t ↦ self(g(t))`.
    pub fn reparametrized(&self, g: impl Fn(f64) -> f64 + Send + Sync + 'static) -> MatrixPath {
        let a = self.eval.clone();
        self.derived(Arc::new(move |t| a(g(t))))
    }

    /// Pointwise product `t ↦ self(t) · other(t)`.
    pub fn pointwise(&self, other: &MatrixPath) -> MatrixPath {
        let (a, b) = (self.eval.clone(), other.eval.clone());
        let mut p = self.derived(Arc::new(move |t| a(t) * b(t)));
        p.grid = self.grid.max(other.grid);
        p.budget = self.budget.max(other.budget);
        p
    }

    /// `t ↦ g(t) · self(t) · g(t)⁻¹`.
    pub fn conjugated_by(&self, g: &MatrixPath) -> MatrixPath {
        let (a, b) = (self.eval.clone(), g.eval.clone());
        self.derived(Arc::new(move |t| {
            let gt = b(t);
            gt * a(t) * gt.try_inverse().expect("conjugating path is invertible")
        }))
    }
}

/// One point of the lifted path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LiftSample {
    pub t: f64,
    pub matrix: Mat3,
    pub quaternion: UnitQuaternion,
}

fn rotation_at(path: &MatrixPath, t: f64) -> Result<(Mat3, Mat3), LoopClassError> {
    let m = path.eval(t);
    let det = m.determinant();
    if !(det > 0.0) {
        return Err(LoopClassError::NonPositiveDeterminant { t, det });
    }
    Ok((m, polar_rotation(&m)?))
}

fn lift_interval(
    path: &MatrixPath,
    start: &LiftSample,
    t_end: f64,
    end: (Mat3, Mat3),
    depth: u32,
    out: &mut Vec<LiftSample>,
) -> Result<LiftSample, LoopClassError> {
    let q = to_quaternion(Some(&start.quaternion), &end.1)?;
    if q.dot(&start.quaternion) >= path.continuity {
        let s = LiftSample { t: t_end, matrix: end.0, quaternion: q };
        out.push(s);
        return Ok(s);
    }
    if depth >= path.budget {
        return Err(LoopClassError::BudgetExhausted { t: start.t });
    }
    let mid = 0.5 * (start.t + t_end);
    let mid_rot = rotation_at(path, mid)?;
    let m = lift_interval(path, start, mid, mid_rot, depth + 1, out)?;
    lift_interval(path, &m, t_end, end, depth + 1, out)
}

/// The continuous quaternion lift of the retracted path, including every
/// refinement sample.
pub fn lift(path: &MatrixPath) -> Result<Vec<LiftSample>, LoopClassError> {
    if path.grid < 2 {
        return Err(LoopClassError::InvalidPath(format!("grid {} too small", path.grid)));
    }
    if !(path.continuity > 0.0 && path.continuity < 1.0) {
        return Err(LoopClassError::InvalidPath(format!("continuity threshold {} outside (0, 1)", path.continuity)));
    }
    let (m0, r0) = rotation_at(path, 0.0)?;
    let first = LiftSample { t: 0.0, matrix: m0, quaternion: to_quaternion(None, &r0)? };
    let mut out = vec![first];
    let mut current = first;
    for k in 1..=path.grid {
        let t = k as f64 / path.grid as f64;
        let end = rotation_at(path, t)?;
        current = lift_interval(path, &current, t, end, 0, &mut out)?;
    }
    Ok(out)
}

/// The `Z/2` class of a loop based at the identity.
pub fn loop_class(path: &MatrixPath) -> Result<LoopClass, LoopClassError> {
    for t in [0.0, 1.0] {
        let d = max_abs(&(path.eval(t) - Mat3::identity()));
        if d > ENDPOINT_TOL {
            return Err(LoopClassError::NotALoop(format!("value at t = {t} is {d} away from the identity")));
        }
    }
    let samples = lift(path)?;
    let (q0, q1) = (samples[0].quaternion, samples[samples.len() - 1].quaternion);
    if q1.distance(&q0) < path.pole_tol {
        Ok(LoopClass::TRIVIAL)
    } else if q1.distance(&q0.neg()) < path.pole_tol {
        Ok(LoopClass::GENERATOR)
    } else {
        Err(LoopClassError::NotALoop(format!("lift ends at {:?}, starting from {:?}", q1, q0)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smooth::BumpProfile;
    use nalgebra::SymmetricEigen;
    use proptest::prelude::*;

    /// Independent polar factor: `Q = m (mᵀm)^{-1/2}` through an eigendecomposition.
    fn polar_oracle(m: &Mat3) -> Mat3 {
        let eig = SymmetricEigen::new(m.transpose() * m);
        let inv_sqrt = Mat3::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()));
        m * eig.eigenvectors * inv_sqrt * eig.eigenvectors.transpose()
    }

    fn shear(c: f64) -> Mat3 {
        let mut m = Mat3::identity();
        m[(2, 0)] = c;
        m
    }

    fn rz(a: f64) -> Mat3 {
        let (s, c) = a.sin_cos();
        Mat3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
    }

    #[test]
    fn polar_examples() {
        let r = rz(0.7) * Mat3::new(1.0, 0.0, 0.0, 0.0, 0.6, -0.8, 0.0, 0.8, 0.6);
        assert!(max_abs(&(polar_rotation(&r).unwrap() - r)) < 1e-10);
        let d = polar_rotation(&Mat3::from_diagonal(&nalgebra::Vector3::new(2.0, 3.0, 4.0))).unwrap();
        assert!(max_abs(&(d - Mat3::identity())) < 1e-12);
        for c in [-2.0, -0.3, 0.0, 0.5, 3.0] {
            let q = polar_rotation(&shear(c)).unwrap();
            assert!(max_abs(&(q - polar_oracle(&shear(c)))) < 1e-10);
            // a rotation of the x–z plane fixing e_y
            assert!((q[(1, 1)] - 1.0).abs() < 1e-12 && q[(0, 1)].abs() < 1e-12 && q[(1, 0)].abs() < 1e-12);
            assert!((q.determinant() - 1.0).abs() < 1e-12);
        }
        assert_eq!(polar_rotation(&shear(0.0)).unwrap(), Mat3::identity());
        let flip = Mat3::from_diagonal(&nalgebra::Vector3::new(1.0, 1.0, -1.0));
        assert!(matches!(polar_rotation(&flip), Err(LoopClassError::SingularInput(_))));
    }

    #[test]
    fn quaternion_examples() {
        assert_eq!(to_quaternion(None, &Mat3::identity()).unwrap(), UnitQuaternion::IDENTITY);
        let q = to_quaternion(None, &rz(PI)).unwrap();
        assert!(q.distance(&UnitQuaternion { w: 0.0, x: 0.0, y: 0.0, z: 1.0 }) < 1e-15);
        let q = to_quaternion(Some(&UnitQuaternion::IDENTITY), &rz(0.1)).unwrap();
        assert!((q.w - 0.05f64.cos()).abs() < 1e-15 && (q.z - 0.05f64.sin()).abs() < 1e-15);
        let back = UnitQuaternion { w: -1.0, x: 0.0, y: 0.0, z: 0.0 };
        let q = to_quaternion(Some(&back), &rz(0.1)).unwrap();
        assert!(q.w < 0.0);
        assert!(matches!(to_quaternion(None, &shear(0.5)), Err(LoopClassError::NotRotation(_))));
    }

    #[test]
    fn loop_class_examples() {
        assert_eq!(loop_class(&MatrixPath::full_turn()).unwrap(), LoopClass::GENERATOR);
        assert_eq!(loop_class(&MatrixPath::identity()).unwrap(), LoopClass::TRIVIAL);
        let twice = MatrixPath::full_turn().concat(&MatrixPath::full_turn());
        assert_eq!(loop_class(&twice).unwrap(), LoopClass::TRIVIAL);
        let psi = BumpProfile::default();
        let shear_loop = MatrixPath::new(move |t| shear(psi.derivative(t)));
        assert_eq!(loop_class(&shear_loop).unwrap(), LoopClass::TRIVIAL);
    }

    #[test]
    fn loop_class_errors() {
        let open = MatrixPath::new(|t| rz(PI * t));
        assert!(matches!(loop_class(&open), Err(LoopClassError::NotALoop(_))));
        let bad = MatrixPath::new(|t| {
            if (t - 0.5).abs() < 0.1 {
                Mat3::from_diagonal(&nalgebra::Vector3::new(1.0, 1.0, -1.0))
            } else {
                Mat3::identity()
            }
        });
        assert!(matches!(loop_class(&bad), Err(LoopClassError::NonPositiveDeterminant { .. })));
        // jumps by a half turn: unresolvable by bisection
        let jump = MatrixPath::new(|t| if t < 0.5 { Mat3::identity() } else if t < 1.0 { rz(PI) } else { Mat3::identity() });
        assert!(matches!(loop_class(&jump.with_budget(4)), Err(LoopClassError::BudgetExhausted { .. })));
    }

    #[test]
    fn refinement_resolves_fast_turns() {
        // 40 full turns squeezed into a coarse grid
        let fast = MatrixPath::new(|t| rz(2.0 * PI * 41.0 * t)).with_grid(8);
        assert_eq!(loop_class(&fast).unwrap(), LoopClass::GENERATOR);
    }

    #[test]
    fn xor_under_concatenation() {
        let l = MatrixPath::full_turn();
        let c = MatrixPath::new(|t| rz(0.3 * (2.0 * PI * t).sin()) * shear((PI * t).sin()));
        for (p, q) in [(&l, &l), (&l, &c), (&c, &l), (&c, &c)] {
            let expect = loop_class(p).unwrap() + loop_class(q).unwrap();
            assert_eq!(loop_class(&p.concat(q)).unwrap(), expect);
        }
    }

    #[test]
    fn stable_under_grid_doubling() {
        for p in [MatrixPath::full_turn(), MatrixPath::identity()] {
            assert_eq!(loop_class(&p).unwrap(), loop_class(&p.clone().with_grid(2 * DEFAULT_GRID)).unwrap());
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn quaternion_round_trip(ax in -1.0f64..1.0, ay in -1.0f64..1.0, az in -1.0f64..1.0, angle in -3.1f64..3.1) {
            let axis = nalgebra::Vector3::new(ax, ay, az);
            prop_assume!(axis.norm() > 1e-3);
            let r = nalgebra::Rotation3::from_axis_angle(&nalgebra::Unit::new_normalize(axis), angle).into_inner();
            let q = to_quaternion(None, &r).unwrap();
            prop_assert!((q.norm() - 1.0).abs() < 1e-12);
            prop_assert!(max_abs(&(q.to_rotation() - r)) < 1e-12);
        }

        #[test]
        fn polar_matches_oracle(entries in prop::array::uniform9(-2.0f64..2.0)) {
            let m = Mat3::from_row_slice(&entries);
            prop_assume!(m.determinant() > 1e-2);
            let q = polar_rotation(&m).unwrap();
            prop_assert!(orthogonality_defect(&q) < 1e-10);
            prop_assert!(max_abs(&(q - polar_oracle(&m))) < 1e-8);
        }

        #[test]
        fn reparametrization_invariance(a in 0.5f64..3.0, b in 0.5f64..3.0, turns in 0i32..4) {
            // strictly increasing bijection of [0, 1], steep enough to stress the grid but resolvable by it
            let g = move |t: f64| {
                let u = t.powf(a);
                u * u * (3.0 - 2.0 * u) * 0.5 + 0.5 * t.powf(b)
            };
            let p = MatrixPath::new(move |t| rz(2.0 * PI * f64::from(turns) * t));
            prop_assert_eq!(loop_class(&p.reparametrized(g)).unwrap(), loop_class(&p).unwrap());
            prop_assert_eq!(loop_class(&p).unwrap(), LoopClass(turns % 2 == 1));
        }
    }
}
