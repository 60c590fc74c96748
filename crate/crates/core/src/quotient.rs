//! Finite quotients `G₅/G(M)` and `H₅/H(M)` as groups of residue matrices.

use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use sha2::{Digest, Sha256};

use crate::golden::{GoldenError, Modulus, ResidueRing};
use crate::group::{self, FiniteGroup, GroupError, Subgroup, DEFAULT_ELEMENT_CAP};
use crate::matrix::{GMat, ProjMat, Word};

/// Residue matrix `[a11, a12, a21, a22]` as ring indices.
pub type ResMat = [u32; 4];

#[derive(Debug, thiserror::Error)]
pub enum QuotientError {
    #[error(transparent)]
    Golden(#[from] GoldenError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("residue ring for modulus {0} is too large")]
    RingTooLarge(String),
    #[error("{small} does not divide {big}")]
    NotDivisor { small: String, big: String },
    #[error("cache: {0}")]
    Cache(#[from] io::Error),
}

impl QuotientError {
    /// True for resource exhaustion, as opposed to bad input.
    pub fn is_cap(&self) -> bool {
        matches!(self, QuotientError::Group(GroupError::CapExceeded { .. }))
    }
}

/// `SL₂` over `Z[λ]/M`, optionally modulo `±I`. The group is never
/// materialized; closures are computed inside it on demand.
#[derive(Clone, Debug)]
pub struct ResidueMatGroup {
    modulus: Modulus,
    ring: ResidueRing,
    projective: bool,
}

impl ResidueMatGroup {
    pub fn new(modulus: &Modulus, projective: bool) -> Result<Self, QuotientError> {
        let ring = ResidueRing::new(modulus)
            .ok_or_else(|| QuotientError::RingTooLarge(modulus.to_string()))?;
        Ok(ResidueMatGroup {
            modulus: modulus.clone(),
            ring,
            projective,
        })
    }

    pub fn modulus(&self) -> &Modulus {
        &self.modulus
    }

    pub fn ring(&self) -> &ResidueRing {
        &self.ring
    }

    pub fn is_projective(&self) -> bool {
        self.projective
    }

    fn canon(&self, x: ResMat) -> ResMat {
        if !self.projective {
            return x;
        }
        let n = x.map(|e| self.ring.neg(e));
        x.min(n)
    }

    pub fn from_gmat(&self, m: &GMat) -> ResMat {
        self.canon(m.entries().map(|e| self.ring.reduce_golden(e)))
    }

    pub fn from_proj(&self, m: &ProjMat) -> ResMat {
        self.from_gmat(m.matrix())
    }

    pub fn from_word(&self, w: &Word) -> ResMat {
        w.letters().iter().fold(self.identity(), |acc, &(g, e)| {
            let base = match g {
                crate::matrix::Gen::S => GMat::s(),
                crate::matrix::Gen::T => GMat::t_pow(1),
            };
            let x = self.from_gmat(&base);
            let x = if e < 0 { self.inverse(&x) } else { x };
            self.mul(&acc, &self.pow(&x, e.unsigned_abs()))
        })
    }

    pub fn s(&self) -> ResMat {
        self.from_gmat(&GMat::s())
    }

    pub fn t(&self) -> ResMat {
        self.from_gmat(&GMat::t_pow(1))
    }

    pub fn neg(&self, x: &ResMat) -> ResMat {
        self.canon(x.map(|e| self.ring.neg(e)))
    }

    /// Image under reduction to a divisor modulus.
    pub fn project(&self, x: &ResMat, to: &ResidueMatGroup) -> ResMat {
        to.canon(x.map(|e| {
            let (a, b) = self.ring.coords(e);
            to.ring.reduce(a, b)
        }))
    }

    /// True if `x ≡ ±I` (projective) or `x ≡ I` (homogeneous) modulo `to`.
    pub fn is_trivial_mod(&self, x: &ResMat, to: &ResidueMatGroup) -> bool {
        self.project(x, to) == to.identity()
    }

    pub fn closure(&self, seeds: &[ResMat], cap: usize) -> Result<Subgroup<ResMat>, GroupError> {
        group::closure(self, seeds, cap)
    }

    pub fn normal_closure(
        &self,
        seeds: &[ResMat],
        cap: usize,
    ) -> Result<Subgroup<ResMat>, GroupError> {
        group::normal_closure(self, seeds, cap)
    }
}

impl FiniteGroup for ResidueMatGroup {
    type Elem = ResMat;

    fn identity(&self) -> ResMat {
        let one = self.ring.one();
        self.canon([one, 0, 0, one])
    }

    #[inline]
    fn mul(&self, x: &ResMat, y: &ResMat) -> ResMat {
        let r = &self.ring;
        let e = |i: usize, j: usize, k: usize, l: usize| r.add(r.mul(x[i], y[j]), r.mul(x[k], y[l]));
        self.canon([e(0, 0, 1, 2), e(0, 1, 1, 3), e(2, 0, 3, 2), e(2, 1, 3, 3)])
    }

    fn inverse(&self, x: &ResMat) -> ResMat {
        let r = &self.ring;
        self.canon([x[3], r.neg(x[1]), r.neg(x[2]), x[0]])
    }

    fn conjugators(&self) -> Vec<ResMat> {
        vec![self.s(), self.t()]
    }
}

/// The image of `⟨S, T⟩` in residue matrices, materialized.
#[derive(Clone, Debug)]
pub struct QuotientGroup {
    ambient: ResidueMatGroup,
    all: Subgroup<ResMat>,
}

impl QuotientGroup {
    pub fn ambient(&self) -> &ResidueMatGroup {
        &self.ambient
    }

    pub fn modulus(&self) -> &Modulus {
        &self.ambient.modulus
    }

    pub fn is_projective(&self) -> bool {
        self.ambient.projective
    }

    pub fn order(&self) -> usize {
        self.all.order()
    }

    pub fn elements(&self) -> &[ResMat] {
        self.all.elements()
    }

    pub fn as_subgroup(&self) -> &Subgroup<ResMat> {
        &self.all
    }

    pub fn gen_s(&self) -> ResMat {
        self.ambient.s()
    }

    pub fn gen_t(&self) -> ResMat {
        self.ambient.t()
    }

    pub fn contains(&self, x: &ResMat) -> bool {
        self.all.contains(x)
    }
}

/// BFS closure of `{S̄, T̄}`; fails with the partial count past `cap`.
pub fn build_quotient(
    modulus: &Modulus,
    projective: bool,
    cap: usize,
) -> Result<QuotientGroup, QuotientError> {
    let ambient = ResidueMatGroup::new(modulus, projective)?;
    let all = ambient.closure(&[ambient.s(), ambient.t()], cap)?;
    Ok(QuotientGroup { ambient, all })
}

/// On-disk store of materialized quotients, keyed by a content hash.
#[derive(Clone, Debug)]
pub struct QuotientCache {
    dir: PathBuf,
}

const CACHE_MAGIC: &[u8; 8] = b"HECKEQ01";
pub const CACHE_ENV: &str = "HECKE_CACHE_DIR";

impl QuotientCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        QuotientCache { dir: dir.into() }
    }

    /// Cache rooted at `$HECKE_CACHE_DIR`, if set.
    pub fn from_env() -> Option<Self> {
        std::env::var_os(CACHE_ENV).map(QuotientCache::new)
    }

    pub fn key(modulus: &Modulus, projective: bool) -> String {
        let l = modulus.lattice();
        let mut h = Sha256::new();
        h.update(format!("{}|{}|{}|{}|{}", "v1", l.n, l.t, l.d, projective));
        hex::encode(h.finalize())
    }

    fn path(&self, modulus: &Modulus, projective: bool) -> PathBuf {
        self.dir
            .join(format!("{}.bin", QuotientCache::key(modulus, projective)))
    }

    pub fn load(
        &self,
        modulus: &Modulus,
        projective: bool,
    ) -> Result<Option<QuotientGroup>, QuotientError> {
        let path = self.path(modulus, projective);
        let mut bytes = Vec::new();
        match fs::File::open(&path) {
            Ok(mut f) => f.read_to_end(&mut bytes)?,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        let Some(elements) = decode_elements(&bytes) else {
            // stale or truncated file: rebuild
            return Ok(None);
        };
        let ambient = ResidueMatGroup::new(modulus, projective)?;
        let gens = vec![ambient.s(), ambient.t()];
        Ok(Some(QuotientGroup {
            ambient,
            all: Subgroup::from_closed_elements(elements, gens),
        }))
    }

    pub fn store(&self, q: &QuotientGroup) -> Result<(), QuotientError> {
        fs::create_dir_all(&self.dir)?;
        let path = self.path(q.modulus(), q.is_projective());
        let tmp = path.with_extension("tmp");
        let mut f = fs::File::create(&tmp)?;
        f.write_all(&encode_elements(q.elements()))?;
        f.sync_all()?;
        fs::rename(tmp, path)?;
        Ok(())
    }
}

fn encode_elements(elements: &[ResMat]) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + 16 * elements.len());
    out.extend_from_slice(CACHE_MAGIC);
    out.extend_from_slice(&(elements.len() as u64).to_le_bytes());
    for e in elements {
        for x in e {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    out
}

fn decode_elements(bytes: &[u8]) -> Option<Vec<ResMat>> {
    let rest = bytes.strip_prefix(CACHE_MAGIC.as_slice())?;
    let (len, body) = rest.split_at_checked(8)?;
    let n = u64::from_le_bytes(len.try_into().ok()?) as usize;
    if body.len() != n * 16 {
        return None;
    }
    Some(
        body.chunks_exact(16)
            .map(|c| {
                let w = |i: usize| u32::from_le_bytes(c[4 * i..4 * i + 4].try_into().unwrap());
                [w(0), w(1), w(2), w(3)]
            })
            .collect(),
    )
}

/// [`build_quotient`] through an optional cache.
pub fn build_quotient_cached(
    modulus: &Modulus,
    projective: bool,
    cap: usize,
    cache: Option<&QuotientCache>,
) -> Result<QuotientGroup, QuotientError> {
    if let Some(c) = cache {
        if let Some(q) = c.load(modulus, projective)? {
            return Ok(q);
        }
    }
    let q = build_quotient(modulus, projective, cap)?;
    if let Some(c) = cache {
        c.store(&q)?;
    }
    Ok(q)
}

/// Elements of `q` that are trivial modulo `m`, i.e. `G(m)/G(M)`.
pub fn kernel_subgroup(q: &QuotientGroup, m: &Modulus) -> Result<Subgroup<ResMat>, QuotientError> {
    if !m.divides(q.modulus()) {
        return Err(QuotientError::NotDivisor {
            small: m.to_string(),
            big: q.modulus().to_string(),
        });
    }
    let small = ResidueMatGroup::new(m, q.is_projective())?;
    let elements: Vec<ResMat> = q
        .elements()
        .iter()
        .filter(|x| q.ambient.is_trivial_mod(x, &small))
        .copied()
        .collect();
    Ok(Subgroup::from_closed_elements(elements, Vec::new()))
}

pub fn subgroup_closure(q: &QuotientGroup, seeds: &[ResMat]) -> Result<Subgroup<ResMat>, QuotientError> {
    Ok(q.ambient.closure(seeds, q.order().max(1))?)
}

pub fn normal_closure(q: &QuotientGroup, seeds: &[ResMat]) -> Result<Subgroup<ResMat>, QuotientError> {
    Ok(q.ambient.normal_closure(seeds, q.order().max(1))?)
}

/// `N(A)³ ∏_{P | A} (1 − N(P)⁻²)`, the order of `SL₂(Z[λ]/A)`.
pub fn sl_index_formula(a: &Modulus) -> Result<BigInt, QuotientError> {
    let norm_a = a.ring_size();
    let mut num = &norm_a * &norm_a * &norm_a;
    let mut den = BigInt::one();
    for (p, _) in a.factor()? {
        let np = p.abs_norm();
        num *= &np * &np - 1u32;
        den *= &np * &np;
    }
    debug_assert!((&num % &den).is_zero());
    Ok(num / den)
}

/// Abelian with every non-identity element of order `p`.
pub fn check_elementary_abelian(g: &ResidueMatGroup, h: &Subgroup<ResMat>, p: u64) -> bool {
    h.is_elementary_abelian(g, p)
}

/// Default cap re-exported for convenience.
pub const DEFAULT_CAP: usize = DEFAULT_ELEMENT_CAP;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::golden::GoldenInt;
    use crate::matrix::{appendix_b_set, delta_m_with_prime, omega_2};

    fn rat(n: u64) -> Modulus {
        Modulus::rational(n).unwrap()
    }

    fn q(n: u64) -> QuotientGroup {
        build_quotient(&rat(n), true, DEFAULT_CAP).unwrap()
    }

    #[test]
    fn small_quotient_orders() {
        assert_eq!(q(1).order(), 1);
        let q2 = q(2);
        assert_eq!(q2.order(), 10);
        let hist = q2.as_subgroup().order_histogram(q2.ambient());
        assert!(hist.keys().all(|k| [1, 2, 5].contains(k)));
        assert_eq!(q(3).order(), 60);
        let pi = Modulus::ideal(GoldenInt::new(2, 1)).unwrap();
        assert_eq!(build_quotient(&pi, true, DEFAULT_CAP).unwrap().order(), 60);
        assert_eq!(q(4).order(), 160);
        let h6 = build_quotient(&rat(6), false, DEFAULT_CAP).unwrap();
        assert_eq!(h6.order(), 1200);
    }

    #[test]
    fn kernels() {
        let q4 = q(4);
        let k = kernel_subgroup(&q4, &rat(2)).unwrap();
        assert_eq!(k.order(), 16);
        assert_eq!(kernel_subgroup(&q(2), &rat(2)).unwrap().order(), 1);
        assert_eq!(kernel_subgroup(&q(6), &rat(2)).unwrap().order(), 60);
        assert!(kernel_subgroup(&q4, &rat(3)).is_err());
    }

    #[test]
    fn omega_2_generates_level_two_kernel_mod_4() {
        let q4 = q(4);
        let seeds: Vec<ResMat> = omega_2().iter().map(|m| q4.ambient().from_proj(m)).collect();
        let h = subgroup_closure(&q4, &seeds).unwrap();
        assert_eq!(h.order(), 16);
        assert!(check_elementary_abelian(q4.ambient(), &h, 2));
        assert!(h.same_as(&kernel_subgroup(&q4, &rat(2)).unwrap()));
    }

    #[test]
    fn delta_3_mod_9() {
        let g = ResidueMatGroup::new(&rat(9), true).unwrap();
        let seeds: Vec<ResMat> = delta_m_with_prime(3, 3)
            .unwrap()
            .iter()
            .map(|m| g.from_proj(m))
            .collect();
        let h = g.closure(&seeds, DEFAULT_CAP).unwrap();
        assert_eq!(h.order(), 729);
        assert!(check_elementary_abelian(&g, &h, 3));
    }

    #[test]
    fn appendix_b_orders() {
        for (m, modulus, order) in [(1, 4, 16), (3, 12, 32)] {
            let g = ResidueMatGroup::new(&rat(modulus), true).unwrap();
            let seeds: Vec<ResMat> = appendix_b_set(m).unwrap().iter().map(|x| g.from_proj(x)).collect();
            let h = g.closure(&seeds, DEFAULT_CAP).unwrap();
            assert_eq!(h.order(), order);
            assert!(check_elementary_abelian(&g, &h, 2));
        }
    }

    #[test]
    fn normal_closures_small() {
        let q4 = q(4);
        let t2 = q4.ambient().from_word(&"T^2".parse().unwrap());
        assert_eq!(normal_closure(&q4, &[t2]).unwrap().order(), 16);
        let q6 = q(6);
        let t3 = q6.ambient().from_word(&"T^3".parse().unwrap());
        let t2 = q6.ambient().from_word(&"T^2".parse().unwrap());
        assert_eq!(normal_closure(&q6, &[t3]).unwrap().order(), 10);
        assert_eq!(normal_closure(&q6, &[t2]).unwrap().order(), 60);
    }

    #[test]
    fn formula_matches_small_orders() {
        assert_eq!(sl_index_formula(&rat(2)).unwrap(), BigInt::from(60));
        assert_eq!(sl_index_formula(&rat(3)).unwrap(), BigInt::from(720));
        assert_eq!(sl_index_formula(&rat(4)).unwrap(), BigInt::from(3840));
        let pi = Modulus::ideal(GoldenInt::new(2, 1)).unwrap();
        assert_eq!(sl_index_formula(&pi).unwrap(), BigInt::from(120));
    }

    #[test]
    fn word_images_agree_with_matrix_images() {
        let g = ResidueMatGroup::new(&rat(7), true).unwrap();
        let w: Word = "S T^3 S^-1 T^-2 S T".parse().unwrap();
        assert_eq!(g.from_word(&w), g.from_proj(&w.eval()));
    }

    #[test]
    fn cache_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let cache = QuotientCache::new(dir.path());
        let built = build_quotient_cached(&rat(4), true, DEFAULT_CAP, Some(&cache)).unwrap();
        let loaded = cache.load(&rat(4), true).unwrap().unwrap();
        assert_eq!(built.elements(), loaded.elements());
        assert!(cache.load(&rat(4), false).unwrap().is_none());
        // corrupt file is ignored
        let path = cache.path(&rat(4), true);
        fs::write(&path, b"junk").unwrap();
        assert!(cache.load(&rat(4), true).unwrap().is_none());
    }

    #[test]
    fn cap_exceeded_is_reported() {
        let err = build_quotient(&rat(4), true, 50).unwrap_err();
        assert!(err.is_cap());
    }
}
