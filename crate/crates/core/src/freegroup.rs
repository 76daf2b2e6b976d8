//! Words in the free group `F_n` and the Nielsen automorphisms `R_{i,j}`, `I_j`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default rank used throughout (three summands, as in the pictures one draws).
pub const DEFAULT_RANK: usize = 3;
/// Largest rank accepted by the exhaustive checks.
pub const DEFAULT_MAX_RANK: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FreeGroupError {
    #[error("generator index {index} out of range for rank {rank}")]
    IndexOutOfRange { index: usize, rank: usize },
    #[error("rank mismatch: {left} vs {right}")]
    RankMismatch { left: usize, right: usize },
    #[error("rank {0} not supported (must be at least 1)")]
    BadRank(usize),
    #[error("R_{{{i},{j}}} needs distinct indices")]
    DegenerateGenerator { i: usize, j: usize },
    #[error("automorphism has no known Nielsen factorization")]
    Unfactored,
    #[error("cannot parse word: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    Pos,
    Neg,
}

impl Sign {
    pub fn flip(self) -> Sign {
        match self {
            Sign::Pos => Sign::Neg,
            Sign::Neg => Sign::Pos,
        }
    }

    pub fn as_i32(self) -> i32 {
        match self {
            Sign::Pos => 1,
            Sign::Neg => -1,
        }
    }

    pub fn from_i32(v: i32) -> Option<Sign> {
        match v {
            1 => Some(Sign::Pos),
            -1 => Some(Sign::Neg),
            _ => None,
        }
    }
}

impl std::ops::Mul for Sign {
    type Output = Sign;
    fn mul(self, rhs: Sign) -> Sign {
        if self == rhs {
            Sign::Pos
        } else {
            Sign::Neg
        }
    }
}

/// A generator `a_index` or its inverse. Indices are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Letter {
    pub index: usize,
    pub sign: Sign,
}

impl Letter {
    pub fn new(index: usize, sign: Sign) -> Letter {
        Letter { index, sign }
    }

    pub fn pos(index: usize) -> Letter {
        Letter::new(index, Sign::Pos)
    }

    pub fn neg(index: usize) -> Letter {
        Letter::new(index, Sign::Neg)
    }

    pub fn inverse(self) -> Letter {
        Letter::new(self.index, self.sign.flip())
    }

    fn cancels(self, other: Letter) -> bool {
        self.index == other.index && self.sign != other.sign
    }
}

/// A freely reduced word. The only way to build one is through [`reduce`] or
/// the helpers on `Word`, so the reduced invariant always holds.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<Letter>", into = "Vec<Letter>")]
pub struct Word {
    letters: Vec<Letter>,
}

impl TryFrom<Vec<Letter>> for Word {
    type Error = FreeGroupError;
    fn try_from(raw: Vec<Letter>) -> Result<Word, FreeGroupError> {
        if let Some(l) = raw.iter().find(|l| l.index == 0) {
            return Err(FreeGroupError::IndexOutOfRange { index: l.index, rank: 0 });
        }
        Ok(reduce_unchecked(raw))
    }
}

impl From<Word> for Vec<Letter> {
    fn from(w: Word) -> Vec<Letter> {
        w.letters
    }
}

/// Free reduction of a raw letter sequence, checking every index against `rank`.
pub fn reduce(raw: &[Letter], rank: usize) -> Result<Word, FreeGroupError> {
    for l in raw {
        if l.index == 0 || l.index > rank {
            return Err(FreeGroupError::IndexOutOfRange { index: l.index, rank });
        }
    }
    Ok(reduce_unchecked(raw.iter().copied()))
}

fn reduce_unchecked(raw: impl IntoIterator<Item = Letter>) -> Word {
    let mut out: Vec<Letter> = Vec::new();
    for l in raw {
        match out.last() {
            Some(&top) if top.cancels(l) => {
                out.pop();
            }
            _ => out.push(l),
        }
    }
    Word { letters: out }
}

impl Word {
    pub fn identity() -> Word {
        Word::default()
    }

    pub fn generator(index: usize) -> Word {
        Word { letters: vec![Letter::pos(index)] }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn max_index(&self) -> usize {
        self.letters.iter().map(|l| l.index).max().unwrap_or(0)
    }

    pub fn inverse(&self) -> Word {
        Word { letters: self.letters.iter().rev().map(|l| l.inverse()).collect() }
    }

    pub fn concat(&self, other: &Word) -> Word {
        reduce_unchecked(self.letters.iter().chain(other.letters.iter()).copied())
    }

    /// Total exponent of `a_index` in the word.
    pub fn exponent_sum(&self, index: usize) -> i64 {
        self.letters
            .iter()
            .filter(|l| l.index == index)
            .map(|l| i64::from(l.sign.as_i32()))
            .sum()
    }

    /// Compact form, e.g. `"1 -2"`.
    pub fn to_compact(&self) -> String {
        self.letters
            .iter()
            .map(|l| (l.index as i64 * i64::from(l.sign.as_i32())).to_string())
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn parse_compact(s: &str) -> Result<Word, FreeGroupError> {
        let mut raw = Vec::new();
        for tok in s.split_whitespace() {
            let v: i64 = tok.parse().map_err(|_| FreeGroupError::Parse(tok.to_string()))?;
            if v == 0 {
                return Err(FreeGroupError::Parse(tok.to_string()));
            }
            let sign = if v > 0 { Sign::Pos } else { Sign::Neg };
            raw.push(Letter::new(v.unsigned_abs() as usize, sign));
        }
        Ok(reduce_unchecked(raw))
    }

    /// Text form, e.g. `"a1 a2^-1"`. The empty word is the empty string.
    pub fn to_text(&self) -> String {
        self.letters
            .iter()
            .map(|l| match l.sign {
                Sign::Pos => format!("a{}", l.index),
                Sign::Neg => format!("a{}^-1", l.index),
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn parse_text(s: &str) -> Result<Word, FreeGroupError> {
        let mut raw = Vec::new();
        for tok in s.split_whitespace() {
            let bad = || FreeGroupError::Parse(tok.to_string());
            let body = tok.strip_prefix('a').ok_or_else(bad)?;
            let (num, sign) = match body.strip_suffix("^-1") {
                Some(n) => (n, Sign::Neg),
                None => (body, Sign::Pos),
            };
            if num.is_empty() || !num.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            let index: usize = num.parse().map_err(|_| bad())?;
            if index == 0 {
                return Err(bad());
            }
            raw.push(Letter::new(index, sign));
        }
        Ok(reduce_unchecked(raw))
    }

    /// Concatenated rendering without separators, e.g. `a1a2^-1`; `1` for the identity.
    pub fn to_juxtaposed(&self) -> String {
        if self.is_empty() {
            return "1".to_string();
        }
        self.to_text().replace(' ', "")
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl FromStr for Word {
    type Err = FreeGroupError;
    fn from_str(s: &str) -> Result<Word, FreeGroupError> {
        Word::parse_text(s)
    }
}

/// A Nielsen generator of `Aut(F_n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NielsenGen {
    /// `a_i -> a_i a_j`, all other generators fixed.
    R { i: usize, j: usize },
    /// `a_j -> a_j^-1`, all other generators fixed.
    I { j: usize },
}

impl NielsenGen {
    fn validate(self, rank: usize) -> Result<(), FreeGroupError> {
        let check = |k: usize| {
            if k == 0 || k > rank {
                Err(FreeGroupError::IndexOutOfRange { index: k, rank })
            } else {
                Ok(())
            }
        };
        match self {
            NielsenGen::R { i, j } => {
                check(i)?;
                check(j)?;
                if i == j {
                    return Err(FreeGroupError::DegenerateGenerator { i, j });
                }
                Ok(())
            }
            NielsenGen::I { j } => check(j),
        }
    }

    /// Image of `a_k` under this generator (or its inverse).
    fn image_of(self, k: usize, inverse: bool) -> Word {
        match self {
            NielsenGen::R { i, j } if k == i => {
                let tail = if inverse { Letter::neg(j) } else { Letter::pos(j) };
                Word { letters: vec![Letter::pos(i), tail] }
            }
            NielsenGen::I { j } if k == j => Word { letters: vec![Letter::neg(j)] },
            _ => Word::generator(k),
        }
    }

    /// Every Nielsen generator of rank `n`, `R` first.
    pub fn all(rank: usize) -> Vec<NielsenGen> {
        let mut out = Vec::new();
        for i in 1..=rank {
            for j in 1..=rank {
                if i != j {
                    out.push(NielsenGen::R { i, j });
                }
            }
        }
        out.extend((1..=rank).map(|j| NielsenGen::I { j }));
        out
    }
}

impl fmt::Display for NielsenGen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NielsenGen::R { i, j } => write!(f, "R{i},{j}"),
            NielsenGen::I { j } => write!(f, "I{j}"),
        }
    }
}

/// One factor in a Nielsen factorization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Factor {
    pub generator: NielsenGen,
    pub inverse: bool,
}

impl Factor {
    pub fn inverted(self) -> Factor {
        match self.generator {
            // I_j is an involution
            NielsenGen::I { .. } => self,
            NielsenGen::R { .. } => Factor { generator: self.generator, inverse: !self.inverse },
        }
    }
}

/// An automorphism of `F_n` stored both as generator images and as a product
/// of Nielsen generators. The factorization `[f1, f2, .., fm]` denotes
/// `f1 ∘ f2 ∘ .. ∘ fm` (so `fm` acts first).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NielsenAuto {
    rank: usize,
    images: Vec<Word>,
    factorization: Vec<Factor>,
    /// False when built from images alone.
    factored: bool,
}

/// Equality compares generator images only.
impl PartialEq for NielsenAuto {
    fn eq(&self, other: &Self) -> bool {
        self.rank == other.rank && self.images == other.images
    }
}

impl Eq for NielsenAuto {}

impl NielsenAuto {
    pub fn identity(rank: usize) -> Result<NielsenAuto, FreeGroupError> {
        if rank == 0 {
            return Err(FreeGroupError::BadRank(rank));
        }
        Ok(NielsenAuto {
            rank,
            images: (1..=rank).map(Word::generator).collect(),
            factorization: Vec::new(),
            factored: true,
        })
    }

    pub fn generator(generator: NielsenGen, rank: usize) -> Result<NielsenAuto, FreeGroupError> {
        Self::from_factorization(rank, &[Factor { generator, inverse: false }])
    }

    pub fn r(i: usize, j: usize, rank: usize) -> Result<NielsenAuto, FreeGroupError> {
        Self::generator(NielsenGen::R { i, j }, rank)
    }

    pub fn inv(j: usize, rank: usize) -> Result<NielsenAuto, FreeGroupError> {
        Self::generator(NielsenGen::I { j }, rank)
    }

    /// Evaluate a product of factors. The rightmost factor acts first.
    pub fn from_factorization(
        rank: usize,
        factors: &[Factor],
    ) -> Result<NielsenAuto, FreeGroupError> {
        let mut acc = NielsenAuto::identity(rank)?;
        for f in factors.iter().rev() {
            f.generator.validate(rank)?;
            let images = acc
                .images
                .iter()
                .map(|w| substitute(w, |k| f.generator.image_of(k, f.inverse)))
                .collect();
            acc.images = images;
        }
        acc.factorization = factors.to_vec();
        Ok(acc)
    }

    /// An automorphism given only by its generator images. It cannot be
    /// inverted until a factorization is attached.
    pub fn from_images(rank: usize, images: Vec<Word>) -> Result<NielsenAuto, FreeGroupError> {
        if rank == 0 {
            return Err(FreeGroupError::BadRank(rank));
        }
        if images.len() != rank {
            return Err(FreeGroupError::RankMismatch { left: rank, right: images.len() });
        }
        if let Some(w) = images.iter().find(|w| w.max_index() > rank) {
            return Err(FreeGroupError::IndexOutOfRange { index: w.max_index(), rank });
        }
        let mut auto = NielsenAuto { rank, images, factorization: Vec::new(), factored: false };
        auto.factored = auto.is_identity();
        Ok(auto)
    }

    pub fn is_factored(&self) -> bool {
        self.factored
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn images(&self) -> &[Word] {
        &self.images
    }

    pub fn image(&self, k: usize) -> Option<&Word> {
        k.checked_sub(1).and_then(|i| self.images.get(i))
    }

    pub fn factorization(&self) -> &[Factor] {
        &self.factorization
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, w)| *w == Word::generator(i + 1))
    }

    /// Re-evaluates the factorization and compares with the stored images.
    pub fn is_consistent(&self) -> bool {
        if !self.factored {
            return false;
        }
        match NielsenAuto::from_factorization(self.rank, &self.factorization) {
            Ok(a) => a.images == self.images,
            Err(_) => false,
        }
    }

    pub fn apply(&self, w: &Word) -> Result<Word, FreeGroupError> {
        if let Some(l) = w.letters.iter().find(|l| l.index > self.rank) {
            return Err(FreeGroupError::RankMismatch { left: self.rank, right: l.index });
        }
        Ok(substitute(w, |k| self.images[k - 1].clone()))
    }

    /// `outer ∘ inner`: images are `outer` applied to the images of `inner`.
    pub fn compose(outer: &NielsenAuto, inner: &NielsenAuto) -> Result<NielsenAuto, FreeGroupError> {
        if outer.rank != inner.rank {
            return Err(FreeGroupError::RankMismatch { left: outer.rank, right: inner.rank });
        }
        let images = inner
            .images
            .iter()
            .map(|w| substitute(w, |k| outer.images[k - 1].clone()))
            .collect();
        let mut factorization = outer.factorization.clone();
        factorization.extend_from_slice(&inner.factorization);
        let factored = outer.factored && inner.factored;
        Ok(NielsenAuto { rank: outer.rank, images, factorization, factored })
    }

    /// Inverse through the factorization.
    pub fn inverse(&self) -> Result<NielsenAuto, FreeGroupError> {
        if !self.factored {
            return Err(FreeGroupError::Unfactored);
        }
        let factors: Vec<Factor> = self.factorization.iter().rev().map(|f| f.inverted()).collect();
        NielsenAuto::from_factorization(self.rank, &factors)
    }

    /// Induced action on `H_1(F_n; Z/2)`: entry `(r, c)` is the parity of the
    /// exponent of `a_r` in the image of `a_c`.
    pub fn abelianize_mod2(&self) -> Mod2Matrix {
        let n = self.rank;
        let mut m = Mod2Matrix::zeros(n);
        for (c, w) in self.images.iter().enumerate() {
            for r in 0..n {
                m.set(r, c, w.exponent_sum(r + 1).rem_euclid(2) == 1);
            }
        }
        m
    }

    /// Renders as `a1↦a1a2, a2↦a2, ..`.
    pub fn render_images(&self) -> String {
        self.images
            .iter()
            .enumerate()
            .map(|(i, w)| format!("a{}↦{}", i + 1, w.to_juxtaposed()))
            .collect::<Vec<_>>()
            .join(", ")
    }
}

fn substitute(w: &Word, mut image: impl FnMut(usize) -> Word) -> Word {
    let mut raw = Vec::new();
    for l in &w.letters {
        let img = image(l.index);
        match l.sign {
            Sign::Pos => raw.extend_from_slice(&img.letters),
            Sign::Neg => raw.extend(img.letters.iter().rev().map(|x| x.inverse())),
        }
    }
    reduce_unchecked(raw)
}

/// Square matrix over `Z/2`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Mod2Matrix {
    n: usize,
    entries: Vec<bool>,
}

impl Mod2Matrix {
    pub fn zeros(n: usize) -> Mod2Matrix {
        Mod2Matrix { n, entries: vec![false; n * n] }
    }

    pub fn identity(n: usize) -> Mod2Matrix {
        let mut m = Mod2Matrix::zeros(n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.entries[r * self.n + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        self.entries[r * self.n + c] = v;
    }

    pub fn transpose(&self) -> Mod2Matrix {
        let mut t = Mod2Matrix::zeros(self.n);
        for r in 0..self.n {
            for c in 0..self.n {
                t.set(c, r, self.get(r, c));
            }
        }
        t
    }

    pub fn mul(&self, rhs: &Mod2Matrix) -> Mod2Matrix {
        assert_eq!(self.n, rhs.n, "dimension mismatch");
        let n = self.n;
        let mut out = Mod2Matrix::zeros(n);
        for r in 0..n {
            for c in 0..n {
                let v = (0..n).fold(false, |acc, k| acc ^ (self.get(r, k) & rhs.get(k, c)));
                out.set(r, c, v);
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[bool]) -> Vec<bool> {
        assert_eq!(self.n, v.len(), "dimension mismatch");
        (0..self.n)
            .map(|r| (0..self.n).fold(false, |acc, c| acc ^ (self.get(r, c) & v[c])))
            .collect()
    }
}

impl fmt::Display for Mod2Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.n {
            let row: String = (0..self.n).map(|c| if self.get(r, c) { '1' } else { '0' }).collect();
            writeln!(f, "{row}")?;
        }
        Ok(())
    }
}
