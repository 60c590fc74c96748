//! Determinant-one matrices over `Z[λ]`, words in `S` and `T`, and the
//! reduction that writes an element of G₅ as a word.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::golden::{GoldenError, GoldenInt, Modulus};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MatrixError {
    #[error("determinant is {0}, expected 1")]
    Determinant(String),
    #[error("cannot parse matrix {0:?}")]
    ParseMatrix(String),
    #[error("cannot parse word {0:?}")]
    ParseWord(String),
    #[error(transparent)]
    Golden(#[from] GoldenError),
    #[error("{0}")]
    Precondition(String),
}

/// A 2×2 matrix over `Z[λ]` with determinant exactly 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GMat {
    pub e11: GoldenInt,
    pub e12: GoldenInt,
    pub e21: GoldenInt,
    pub e22: GoldenInt,
}

impl GMat {
    pub fn new(
        e11: GoldenInt,
        e12: GoldenInt,
        e21: GoldenInt,
        e22: GoldenInt,
    ) -> Result<Self, MatrixError> {
        let m = GMat { e11, e12, e21, e22 };
        let det = m.det();
        if !det.is_one() {
            return Err(MatrixError::Determinant(det.to_string()));
        }
        Ok(m)
    }

    fn raw(e11: GoldenInt, e12: GoldenInt, e21: GoldenInt, e22: GoldenInt) -> Self {
        GMat { e11, e12, e21, e22 }
    }

    pub fn identity() -> Self {
        GMat::raw(
            GoldenInt::one(),
            GoldenInt::zero(),
            GoldenInt::zero(),
            GoldenInt::one(),
        )
    }

    /// `S = (0 1; −1 0)`.
    pub fn s() -> Self {
        GMat::raw(
            GoldenInt::zero(),
            GoldenInt::one(),
            -GoldenInt::one(),
            GoldenInt::zero(),
        )
    }

    /// `Tᵏ = (1 kλ; 0 1)`.
    pub fn t_pow(k: i64) -> Self {
        GMat::raw(
            GoldenInt::one(),
            GoldenInt::new(0, k),
            GoldenInt::zero(),
            GoldenInt::one(),
        )
    }

    pub fn s_pow(k: i64) -> Self {
        match k.rem_euclid(4) {
            0 => GMat::identity(),
            1 => GMat::s(),
            2 => GMat::identity().neg(),
            _ => GMat::s().neg(),
        }
    }

    pub fn det(&self) -> GoldenInt {
        &self.e11 * &self.e22 - &self.e12 * &self.e21
    }

    pub fn trace(&self) -> GoldenInt {
        &self.e11 + &self.e22
    }

    pub fn mul(&self, o: &GMat) -> GMat {
        GMat::raw(
            &self.e11 * &o.e11 + &self.e12 * &o.e21,
            &self.e11 * &o.e12 + &self.e12 * &o.e22,
            &self.e21 * &o.e11 + &self.e22 * &o.e21,
            &self.e21 * &o.e12 + &self.e22 * &o.e22,
        )
    }

    pub fn inverse(&self) -> GMat {
        GMat::raw(
            self.e22.clone(),
            -&self.e12,
            -&self.e21,
            self.e11.clone(),
        )
    }

    pub fn neg(&self) -> GMat {
        GMat::raw(-&self.e11, -&self.e12, -&self.e21, -&self.e22)
    }

    pub fn pow(&self, e: i64) -> GMat {
        let base = if e < 0 { self.inverse() } else { self.clone() };
        let mut acc = GMat::identity();
        for _ in 0..e.unsigned_abs() {
            acc = acc.mul(&base);
        }
        acc
    }

    pub fn conjugate_by(&self, g: &GMat) -> GMat {
        g.mul(self).mul(&g.inverse())
    }

    pub fn entries(&self) -> [&GoldenInt; 4] {
        [&self.e11, &self.e12, &self.e21, &self.e22]
    }

    pub fn is_identity(&self) -> bool {
        *self == GMat::identity()
    }

    /// `I + k·U` for an integral matrix `U` (determinant checked).
    pub fn identity_plus(k: i64, u: [GoldenInt; 4]) -> Result<GMat, MatrixError> {
        let k = BigInt::from(k);
        let [u11, u12, u21, u22] = u;
        GMat::new(
            GoldenInt::one() + u11.scale(&k),
            u12.scale(&k),
            u21.scale(&k),
            GoldenInt::one() + u22.scale(&k),
        )
    }

    /// Entries reduced modulo `m`; equal outputs mean congruent matrices.
    pub fn reduce(&self, m: &Modulus) -> [GoldenInt; 4] {
        self.entries().map(|x| m.reduce(x).lift())
    }

    /// Congruent modulo `m` up to an overall sign.
    pub fn congruent_projective(&self, other: &GMat, m: &Modulus) -> bool {
        self.reduce(m) == other.reduce(m) || self.reduce(m) == other.neg().reduce(m)
    }
}

impl fmt::Display for GMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[[{},{}],[{},{}]]",
            self.e11, self.e12, self.e21, self.e22
        )
    }
}

impl FromStr for GMat {
    type Err = MatrixError;

    /// `[[a11,a12],[a21,a22]]` with ring-element entries.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || MatrixError::ParseMatrix(s.to_string());
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let inner = compact
            .strip_prefix("[[")
            .and_then(|r| r.strip_suffix("]]"))
            .ok_or_else(err)?;
        let rows: Vec<&str> = inner.split("],[").collect();
        if rows.len() != 2 {
            return Err(err());
        }
        let mut entries = Vec::with_capacity(4);
        for row in rows {
            let cells: Vec<&str> = row.split(',').collect();
            if cells.len() != 2 {
                return Err(err());
            }
            for c in cells {
                entries.push(c.parse::<GoldenInt>().map_err(|_| err())?);
            }
        }
        let mut it = entries.into_iter();
        GMat::new(
            it.next().unwrap(),
            it.next().unwrap(),
            it.next().unwrap(),
            it.next().unwrap(),
        )
    }
}

/// A matrix up to sign; the stored representative has its first nonzero
/// entry (row-major) positive in the order `b > 0`, or `b = 0` and `a > 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ProjMat(GMat);

fn positive_lead(m: &GMat) -> bool {
    for e in m.entries() {
        if e.is_zero() {
            continue;
        }
        return e.b.is_positive() || (e.b.is_zero() && e.a.is_positive());
    }
    unreachable!("determinant-one matrix has a nonzero entry")
}

impl ProjMat {
    pub fn new(m: GMat) -> Self {
        if positive_lead(&m) {
            ProjMat(m)
        } else {
            ProjMat(m.neg())
        }
    }

    pub fn identity() -> Self {
        ProjMat::new(GMat::identity())
    }

    pub fn matrix(&self) -> &GMat {
        &self.0
    }

    pub fn into_matrix(self) -> GMat {
        self.0
    }

    pub fn mul(&self, o: &ProjMat) -> ProjMat {
        ProjMat::new(self.0.mul(&o.0))
    }

    pub fn inverse(&self) -> ProjMat {
        ProjMat::new(self.0.inverse())
    }

    pub fn pow(&self, e: i64) -> ProjMat {
        ProjMat::new(self.0.pow(e))
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_identity()
    }

    /// Order if it is 1, 2, 3, 5 or 10, which covers every elliptic element.
    pub fn finite_order(&self) -> Option<u32> {
        let mut acc = self.clone();
        for k in 1..=10 {
            if acc.is_identity() {
                return Some(k);
            }
            acc = acc.mul(self);
        }
        None
    }

    /// Trace up to sign, normalised to be nonnegative in the real embedding.
    pub fn abs_trace(&self) -> GoldenInt {
        self.0.trace().real_abs()
    }
}

impl fmt::Display for ProjMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Gen {
    S,
    T,
}

/// A freely reduced word in `S` and `T` with integer exponents.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Word(Vec<(Gen, i64)>);

impl Word {
    pub fn identity() -> Self {
        Word(Vec::new())
    }

    pub fn s() -> Self {
        Word::letter(Gen::S, 1)
    }

    pub fn t() -> Self {
        Word::letter(Gen::T, 1)
    }

    pub fn letter(g: Gen, e: i64) -> Self {
        Word::from_letters([(g, e)])
    }

    pub fn from_letters(letters: impl IntoIterator<Item = (Gen, i64)>) -> Self {
        let mut out: Vec<(Gen, i64)> = Vec::new();
        for (g, e) in letters {
            if e == 0 {
                continue;
            }
            match out.last_mut() {
                Some((lg, le)) if *lg == g => {
                    *le += e;
                    if *le == 0 {
                        out.pop();
                    }
                }
                _ => out.push((g, e)),
            }
        }
        Word(out)
    }

    pub fn letters(&self) -> &[(Gen, i64)] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Total number of unit letters.
    pub fn length(&self) -> u64 {
        self.0.iter().map(|(_, e)| e.unsigned_abs()).sum()
    }

    pub fn concat(&self, o: &Word) -> Word {
        Word::from_letters(self.0.iter().chain(o.0.iter()).copied())
    }

    pub fn inverse(&self) -> Word {
        Word::from_letters(self.0.iter().rev().map(|&(g, e)| (g, -e)))
    }

    pub fn pow(&self, k: i64) -> Word {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut acc = Word::identity();
        for _ in 0..k.unsigned_abs() {
            acc = acc.concat(&base);
        }
        acc
    }

    /// `g · self · g⁻¹`.
    pub fn conjugate_by(&self, g: &Word) -> Word {
        g.concat(self).concat(&g.inverse())
    }

    pub fn eval_matrix(&self) -> GMat {
        self.0.iter().fold(GMat::identity(), |acc, &(g, e)| match g {
            Gen::S => acc.mul(&GMat::s_pow(e)),
            Gen::T => acc.mul(&GMat::t_pow(e)),
        })
    }

    pub fn eval(&self) -> ProjMat {
        ProjMat::new(self.eval_matrix())
    }
}

/// Product of generator matrices in order, projectivized.
pub fn eval_word(w: &Word) -> ProjMat {
    w.eval()
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (i, (g, e)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            let name = match g {
                Gen::S => "S",
                Gen::T => "T",
            };
            if *e == 1 {
                write!(f, "{name}")?;
            } else {
                write!(f, "{name}^{e}")?;
            }
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = MatrixError;

    /// Whitespace-separated letters `S`, `T`, `S^k`, `T^-k`; `1` is the identity.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || MatrixError::ParseWord(s.to_string());
        let mut letters = Vec::new();
        for tok in s.split_whitespace() {
            if tok == "1" {
                continue;
            }
            let (head, exp) = match tok.split_once('^') {
                Some((h, e)) => (h, e.parse::<i64>().map_err(|_| err())?),
                None => (tok, 1),
            };
            let g = match head {
                "S" => Gen::S,
                "T" => Gen::T,
                _ => return Err(err()),
            };
            letters.push((g, exp));
        }
        Ok(Word::from_letters(letters))
    }
}

/// Why a matrix was rejected by [`decompose`].
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DecomposeError {
    /// The reduction ended at an upper-triangular matrix whose diagonal is a
    /// unit other than ±1.
    #[error("not in G5: reduced to diagonal unit {0}")]
    NonTrivialUnit(String),
    /// The reduction ended at `±(1 x; 0 1)` with `x` not an integer multiple of `λ`.
    #[error("not in G5: reduced to translation by {0}, not a multiple of L")]
    NonLatticeTranslation(String),
    /// No translation made the lower-left entry shrink.
    #[error("not in G5: no progress at lower-left entry {0}")]
    NoProgress(String),
    #[error("reduction exceeded {0} steps")]
    StepLimit(usize),
}

const DECOMPOSE_STEP_LIMIT: usize = 100_000;

/// Writes `m` as a word in `S` and `T`, or certifies `m ∉ G₅`.
///
/// While the lower-left entry `c` is nonzero, left-multiply by `T⁻ᵏ` with `k`
/// chosen to minimise `|a − kλc|` in the real embedding, then by `S`. The
/// real absolute value of `c` strictly decreases at each step.
pub fn decompose(m: &ProjMat) -> Result<Word, DecomposeError> {
    let mut cur = m.matrix().clone();
    // m = (T^{k1} S^-1)(T^{k2} S^-1)... · rest
    let mut prefix: Vec<(Gen, i64)> = Vec::new();
    let lam = GoldenInt::lambda();
    let mut steps = 0;
    while !cur.e21.is_zero() {
        steps += 1;
        if steps > DECOMPOSE_STEP_LIMIT {
            return Err(DecomposeError::StepLimit(DECOMPOSE_STEP_LIMIT));
        }
        let c = cur.e21.clone();
        let lam_c = &lam * &c;
        // nearest integer to a / (λc) = a · conj(λc) / N(λc)
        let num = &cur.e11 * &lam_c.conj();
        let den = lam_c.norm();
        let k0 = num.real_round_div(&den);
        let mut best: Option<(BigInt, GoldenInt)> = None;
        for dk in -1..=1 {
            let k = &k0 + dk;
            let r = &cur.e11 - &lam_c.scale(&k);
            let better = match &best {
                None => true,
                Some((_, br)) => r.real_cmp_abs(br) == Ordering::Less,
            };
            if better {
                best = Some((k, r));
            }
        }
        let (k, r) = best.expect("three candidates");
        if r.real_cmp_abs(&c) != Ordering::Less {
            return Err(DecomposeError::NoProgress(c.to_string()));
        }
        let k_i = k.to_i64().ok_or(DecomposeError::StepLimit(steps))?;
        let shifted = GMat::t_pow(-k_i).mul(&cur);
        cur = GMat::s().mul(&shifted);
        prefix.push((Gen::T, k_i));
        prefix.push((Gen::S, -1));
    }
    // cur = (u x; 0 u⁻¹)
    let u = cur.e11.clone();
    let sign = if u.is_one() {
        BigInt::one()
    } else if u == -GoldenInt::one() {
        -BigInt::one()
    } else {
        return Err(DecomposeError::NonTrivialUnit(u.to_string()));
    };
    let x = cur.e12.scale(&sign);
    if !x.a.is_zero() {
        return Err(DecomposeError::NonLatticeTranslation(x.to_string()));
    }
    let j = x.b.to_i64().ok_or(DecomposeError::StepLimit(steps))?;
    prefix.push((Gen::T, j));
    Ok(Word::from_letters(prefix))
}

fn g(a: i64, b: i64) -> GoldenInt {
    GoldenInt::new(a, b)
}

/// Words for the conjugates of `Tᵏ` used to populate its normal closure.
#[derive(Clone, Debug)]
pub struct ClosureRecipes {
    pub a: Word,
    pub b: Word,
    pub c: Word,
    pub d: Word,
    pub e: Word,
    pub f: Word,
    pub g: Word,
    pub h: Word,
}

impl ClosureRecipes {
    pub fn new(k: i64) -> Self {
        let s = Word::s();
        let t = Word::t();
        let a = Word::letter(Gen::T, k);
        let b = a.conjugate_by(&s);
        let c = b.conjugate_by(&t);
        let d = a.inverse().conjugate_by(&s).conjugate_by(&t.inverse());
        let e = a.pow(-2).concat(&b.inverse()).concat(&c);
        let f = a.pow(2).concat(&b).concat(&d);
        let g_ = e.conjugate_by(&s);
        let h = f.conjugate_by(&s);
        ClosureRecipes {
            a,
            b,
            c,
            d,
            e,
            f,
            g: g_,
            h,
        }
    }

    /// `GEGF`.
    pub fn gegf(&self) -> Word {
        self.g.concat(&self.e).concat(&self.g).concat(&self.f)
    }
}

/// The six matrices `I + mU` whose residues mod `mp` span an elementary
/// abelian `p`-group of order `p⁶`.
pub fn delta_printed(m: i64) -> Vec<GMat> {
    let m_big = BigInt::from(m);
    let l2 = GoldenInt::power_lambda(2);
    let l3 = GoldenInt::power_lambda(3);
    let ml = g(0, m);
    vec![
        GMat::t_pow(m),
        GMat::raw(GoldenInt::one(), GoldenInt::zero(), -&ml, GoldenInt::one()),
        GMat::raw(
            GoldenInt::one() - l2.scale(&m_big),
            l3.scale(&m_big),
            -&ml,
            GoldenInt::one() + l2.scale(&m_big),
        ),
        GMat::raw(GoldenInt::one(), g(m, 0), GoldenInt::zero(), GoldenInt::one()),
        GMat::raw(GoldenInt::one(), GoldenInt::zero(), g(-m, 0), GoldenInt::one()),
        GMat::raw(
            GoldenInt::one() - &ml,
            l2.scale(&m_big),
            g(-m, 0),
            GoldenInt::one() + &ml,
        ),
    ]
}

fn smallest_odd_prime_factor(m: i64) -> Option<i64> {
    let mut n = m.abs();
    while n % 2 == 0 && n > 0 {
        n /= 2;
    }
    (3..=n).step_by(2).find(|d| n % d == 0)
}

/// Words for the six conjugate-built elements of the normal closure of `Tᵐ`.
///
/// `X = (GEGF)^r` with `r` the least positive solution of `2r ≡ 1 (mod p)`,
/// or `r = 1` when no odd prime is given.
pub fn delta_m_words(m: i64, p: Option<i64>) -> Vec<Word> {
    let rec = ClosureRecipes::new(m);
    let r = match p {
        Some(p) if p % 2 == 1 => (p + 1) / 2,
        _ => 1,
    };
    let x = rec.gegf().pow(r);
    vec![
        rec.a.clone(),
        rec.b.clone(),
        rec.c.clone(),
        x.conjugate_by(&Word::s()),
        x.clone(),
        x.conjugate_by(&Word::t()),
    ]
}

/// [`delta_m_words`] evaluated, using the smallest odd prime divisor of `m`.
pub fn delta_m(m: i64) -> Result<Vec<ProjMat>, MatrixError> {
    if m < 1 {
        return Err(MatrixError::Precondition(format!("m = {m} must be positive")));
    }
    Ok(delta_m_words(m, smallest_odd_prime_factor(m))
        .iter()
        .map(Word::eval)
        .collect())
}

pub fn delta_m_with_prime(m: i64, p: i64) -> Result<Vec<ProjMat>, MatrixError> {
    if m < 1 || p < 2 || m % p != 0 {
        return Err(MatrixError::Precondition(format!(
            "need a prime p dividing m, got m = {m}, p = {p}"
        )));
    }
    Ok(delta_m_words(m, Some(p)).iter().map(Word::eval).collect())
}

/// Four independent generators of the principal congruence subgroup of level 2.
pub fn omega_2() -> Vec<ProjMat> {
    vec![
        GMat::raw(GoldenInt::one(), g(0, 2), GoldenInt::zero(), GoldenInt::one()),
        GMat::raw(GoldenInt::one(), GoldenInt::zero(), g(0, 2), GoldenInt::one()),
        GMat::raw(g(1, 2), g(2, 2), g(0, 2), g(1, 2)),
        GMat::raw(g(1, 2), g(0, 2), g(2, 2), g(1, 2)),
    ]
    .into_iter()
    .map(ProjMat::new)
    .collect()
}

/// Words `A, B, C, GE, T(GE)T⁻¹` built from `T^{2m}`, `m` odd.
pub fn appendix_b_words(m: i64) -> Result<Vec<Word>, MatrixError> {
    if m < 1 || m % 2 == 0 {
        return Err(MatrixError::Precondition(format!("m = {m} must be odd and positive")));
    }
    let rec = ClosureRecipes::new(2 * m);
    let ge = rec.g.concat(&rec.e);
    Ok(vec![
        rec.a.clone(),
        rec.b.clone(),
        rec.c.clone(),
        ge.clone(),
        ge.conjugate_by(&Word::t()),
    ])
}

pub fn appendix_b_set(m: i64) -> Result<Vec<ProjMat>, MatrixError> {
    Ok(appendix_b_words(m)?.iter().map(Word::eval).collect())
}

/// The residues mod `4m` of [`appendix_b_set`], written as `I + 2m·U`.
pub fn appendix_b_printed(m: i64) -> Vec<GMat> {
    let k = 2 * m;
    let us: [[GoldenInt; 4]; 5] = [
        [g(0, 0), g(0, 1), g(0, 0), g(0, 0)],
        [g(0, 0), g(0, 0), g(0, -1), g(0, 0)],
        [g(-1, -1), g(1, 0), g(0, -1), g(1, 1)],
        [g(0, 0), g(1, 0), g(-1, 0), g(0, 0)],
        [g(0, -1), g(0, 1), g(-1, 0), g(0, 1)],
    ];
    us.into_iter().map(|u| identity_plus_raw(k, u)).collect()
}

/// `I + k·U` without a determinant check; the result is only meaningful
/// modulo an ideal where it becomes unimodular.
pub fn identity_plus_raw(k: i64, u: [GoldenInt; 4]) -> GMat {
    let k = BigInt::from(k);
    let [u11, u12, u21, u22] = u;
    GMat::raw(
        GoldenInt::one() + u11.scale(&k),
        u12.scale(&k),
        u21.scale(&k),
        GoldenInt::one() + u22.scale(&k),
    )
}

/// Words for `T^{2m}, ST^{2m}S⁻¹, TST^{2m}S⁻¹T⁻¹, SYS⁻¹, Y, TYT⁻¹` with
/// `Y = GEGF` built from `Tᵐ`, `4 | m`.
pub fn appendix_c_words(m: i64) -> Result<Vec<Word>, MatrixError> {
    if m < 1 || m % 4 != 0 {
        return Err(MatrixError::Precondition(format!(
            "m = {m} must be a positive multiple of 4"
        )));
    }
    let rec = ClosureRecipes::new(m);
    let y = rec.gegf();
    let big = ClosureRecipes::new(2 * m);
    Ok(vec![
        big.a.clone(),
        big.b.clone(),
        big.c.clone(),
        y.conjugate_by(&Word::s()),
        y.clone(),
        y.conjugate_by(&Word::t()),
    ])
}

pub fn appendix_c_set(m: i64) -> Result<Vec<ProjMat>, MatrixError> {
    Ok(appendix_c_words(m)?.iter().map(Word::eval).collect())
}
