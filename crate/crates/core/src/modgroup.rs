//! The split extension `Mod(M_n) ≅ (Z/2)ⁿ ⋊ Out(F_n)` and its section.
//!
//! A mapping class `(t, φ)` records the twist vector `t` of a representative
//! together with its action `φ` on `π₁`. Composition of diffeomorphisms obeys
//! the chain rule `𝔗(f∘g) = g*𝔗(f) + 𝔗(g)`, where `(g*t)[w] = t[g(w)]`. On
//! vectors `g*` is the transpose of the mod-2 abelianization, so
//!
//! ```text
//! (t_a, φ_a) · (t_b, φ_b) = (A(φ_b)ᵀ t_a ⊕ t_b, φ_a ∘ φ_b).
//! ```

use std::collections::HashMap;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::charts::{ChartError, ChartMap, MapKind, RadialProfile};
use crate::crosshom::{self, CrossHomError, TwistSettings, TwistVector};
use crate::curve::{self, CurveError};
use crate::freegroup::{Factor, FreeGroupError, NielsenAuto, NielsenGen, Word};
use crate::smooth::{BumpProfile, TwistProfile};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModGroupError {
    #[error("rank mismatch: {left} vs {right}")]
    RankMismatch { left: usize, right: usize },
    #[error(transparent)]
    FreeGroup(#[from] FreeGroupError),
    #[error(transparent)]
    CrossHom(#[from] CrossHomError),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Chart(#[from] ChartError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MappingClass {
    twist: TwistVector,
    auto: NielsenAuto,
}

/// `t[w]`: the twist vector evaluated on a word.
pub fn evaluate(t: &TwistVector, w: &Word) -> bool {
    w.letters().iter().fold(false, |acc, l| acc ^ t.0[l.index - 1])
}

/// `g*t` evaluated through images of generators.
pub fn pull_back(t: &TwistVector, g: &NielsenAuto) -> TwistVector {
    TwistVector(g.images().iter().map(|w| evaluate(t, w)).collect())
}

impl MappingClass {
    pub fn new(twist: TwistVector, auto: NielsenAuto) -> Result<MappingClass, ModGroupError> {
        if twist.rank() != auto.rank() {
            return Err(ModGroupError::RankMismatch { left: twist.rank(), right: auto.rank() });
        }
        Ok(MappingClass { twist, auto })
    }

    pub fn identity(rank: usize) -> Result<MappingClass, ModGroupError> {
        Ok(MappingClass { twist: TwistVector::zero(rank), auto: NielsenAuto::identity(rank)? })
    }

    /// The sphere twist about `A_k`: `(e_k, id)`.
    pub fn sphere_twist(rank: usize, k: usize) -> Result<MappingClass, ModGroupError> {
        if k == 0 || k > rank {
            return Err(FreeGroupError::IndexOutOfRange { index: k, rank }.into());
        }
        Ok(MappingClass { twist: TwistVector::unit(rank, k), auto: NielsenAuto::identity(rank)? })
    }

    pub fn twist(&self) -> &TwistVector {
        &self.twist
    }

    pub fn auto(&self) -> &NielsenAuto {
        &self.auto
    }

    pub fn rank(&self) -> usize {
        self.auto.rank()
    }

    pub fn is_identity(&self) -> bool {
        self.twist.is_zero() && self.auto.is_identity()
    }

    pub fn in_kernel(&self) -> bool {
        self.auto.is_identity()
    }

    /// The inverse `(A(φ⁻¹)ᵀ t, φ⁻¹)`; needs a factored automorphism.
    pub fn inverse(&self) -> Result<MappingClass, ModGroupError> {
        let inv = self.auto.inverse()?;
        Ok(MappingClass { twist: pull_back(&self.twist, &inv), auto: inv })
    }
}

impl fmt::Display for MappingClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "twist={} ; {}", self.twist, self.auto.render_images())
    }
}

pub fn multiply(a: &MappingClass, b: &MappingClass) -> Result<MappingClass, ModGroupError> {
    if a.rank() != b.rank() {
        return Err(ModGroupError::RankMismatch { left: a.rank(), right: b.rank() });
    }
    let ab = b.auto.abelianize_mod2().transpose();
    let moved = TwistVector(ab.mul_vec(&a.twist.0));
    let twist = moved.add(&b.twist)?;
    Ok(MappingClass { twist, auto: NielsenAuto::compose(&a.auto, &b.auto)? })
}

/// `s(φ) = (0, φ)`: every generator lift has vanishing twist vector.
pub fn section(auto: &NielsenAuto) -> MappingClass {
    MappingClass { twist: TwistVector::zero(auto.rank()), auto: auto.clone() }
}

/// `ρ`.
pub fn project(mc: &MappingClass) -> NielsenAuto {
    mc.auto.clone()
}

/// A random product of at most `max_len` Nielsen generators and inverses.
pub fn random_auto<R: Rng + ?Sized>(rng: &mut R, rank: usize, max_len: usize) -> Result<NielsenAuto, FreeGroupError> {
    let gens = NielsenGen::all(rank);
    let len = rng.gen_range(0..=max_len);
    let factors: Vec<Factor> = (0..len)
        .map(|_| Factor { generator: gens[rng.gen_range(0..gens.len())], inverse: rng.gen_bool(0.5) })
        .collect();
    NielsenAuto::from_factorization(rank, &factors)
}

/// A random mapping class: random twist bits over a random product.
pub fn random_class<R: Rng + ?Sized>(rng: &mut R, rank: usize, max_len: usize) -> Result<MappingClass, ModGroupError> {
    let twist = TwistVector((0..rank).map(|_| rng.gen_bool(0.5)).collect());
    MappingClass::new(twist, random_auto(rng, rank, max_len)?)
}

/// A diffeomorphism factor realized by a chart map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Lift {
    /// `F_{i,j}`, `G_j` or the inverse of one of them.
    Nielsen(Factor),
    SphereTwist(usize),
}

impl Lift {
    pub fn map_kind(&self) -> MapKind {
        match *self {
            Lift::Nielsen(Factor { generator: NielsenGen::R { i, j }, .. }) => MapKind::F { i, j },
            Lift::Nielsen(Factor { generator: NielsenGen::I { j }, .. }) => MapKind::G { j },
            Lift::SphereTwist(i) => MapKind::Twist { i },
        }
    }

    fn inverse(&self) -> bool {
        matches!(self, Lift::Nielsen(Factor { inverse: true, .. }))
    }
}

/// Twist vector and `π₁` action of one chart map, read off the geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasuredMap {
    pub twist: TwistVector,
    pub action: NielsenAuto,
}

pub fn measure(map: &ChartMap, rank: usize, settings: &TwistSettings) -> Result<MeasuredMap, ModGroupError> {
    Ok(MeasuredMap {
        twist: crosshom::twisting_of(map, rank, settings)?,
        action: curve::rho_of_with(map, rank, settings.samples)?,
    })
}

/// `𝔗(f∘g)[a_k] = 𝔗(f)[g(a_k)] + 𝔗(g)[a_k]`, evaluated on words.
pub fn chain_rule(f: &MeasuredMap, g: &MeasuredMap) -> Result<MeasuredMap, ModGroupError> {
    let twist = pull_back(&f.twist, &g.action).add(&g.twist)?;
    Ok(MeasuredMap { twist, action: NielsenAuto::compose(&f.action, &g.action)? })
}

/// `𝔗(f⁻¹)[w] = 𝔗(f)[φ⁻¹(w)]`, from `𝔗(f∘f⁻¹) = 0`.
pub fn chain_rule_inverse(f: &MeasuredMap) -> Result<MeasuredMap, ModGroupError> {
    let inv = f.action.inverse()?;
    Ok(MeasuredMap { twist: pull_back(&f.twist, &inv), action: inv })
}

/// Measures each distinct chart map once and composes them by the chain rule.
pub struct GeometricModel {
    rank: usize,
    settings: TwistSettings,
    bump: BumpProfile,
    eta: TwistProfile,
    cache: HashMap<MapKind, MeasuredMap>,
}

impl GeometricModel {
    pub fn new(rank: usize, settings: TwistSettings) -> GeometricModel {
        GeometricModel {
            rank,
            settings,
            bump: BumpProfile::default(),
            eta: TwistProfile::default(),
            cache: HashMap::new(),
        }
    }

    pub fn with_profiles(mut self, bump: BumpProfile, eta: TwistProfile) -> GeometricModel {
        self.bump = bump;
        self.eta = eta;
        self.cache.clear();
        self
    }

    pub fn chart_map(&self, kind: MapKind) -> Result<ChartMap, ChartError> {
        let profile = match kind {
            MapKind::F { .. } | MapKind::G { .. } => RadialProfile::Bump(self.bump),
            MapKind::Twist { .. } => RadialProfile::Step(self.eta),
        };
        ChartMap::new(kind, profile)
    }

    pub fn measured(&mut self, kind: MapKind) -> Result<&MeasuredMap, ModGroupError> {
        if !self.cache.contains_key(&kind) {
            let m = measure(&self.chart_map(kind)?, self.rank, &self.settings)?;
            self.cache.insert(kind, m);
        }
        Ok(&self.cache[&kind])
    }

    /// `(𝔗(f), ρ(f))` for `f = l_1 ∘ .. ∘ l_m`.
    pub fn composite(&mut self, lifts: &[Lift]) -> Result<MeasuredMap, ModGroupError> {
        let mut acc = MeasuredMap { twist: TwistVector::zero(self.rank), action: NielsenAuto::identity(self.rank)? };
        for l in lifts {
            let base = self.measured(l.map_kind())?.clone();
            let m = if l.inverse() { chain_rule_inverse(&base)? } else { base };
            acc = chain_rule(&acc, &m)?;
        }
        Ok(acc)
    }

    pub fn class_of(&mut self, lifts: &[Lift]) -> Result<MappingClass, ModGroupError> {
        let m = self.composite(lifts)?;
        MappingClass::new(m.twist, m.action)
    }

    /// `s([φ]) = 𝔗(f⁻¹) · [f]` for the lift `f` of the factorization of `auto`.
    pub fn section_from_lift(&mut self, auto: &NielsenAuto) -> Result<MappingClass, ModGroupError> {
        let lifts: Vec<Lift> = auto.factorization().iter().map(|f| Lift::Nielsen(*f)).collect();
        let f = self.composite(&lifts)?;
        let correction = chain_rule_inverse(&f)?.twist;
        let twist_part = MappingClass::new(correction, NielsenAuto::identity(self.rank)?)?;
        multiply(&twist_part, &MappingClass::new(f.twist, f.action)?)
    }
}
