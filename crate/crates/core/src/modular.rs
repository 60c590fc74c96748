//! `SL₂(Z/n)` with the same closure engine, used as an independent
//! cross-check on the classical modular group.

use crate::golden::is_rational_prime;
use crate::group::{closure, normal_closure, FiniteGroup, GroupError, Subgroup};

/// Integer matrix `[a, b, c, d]` with entries in `[0, n)`.
pub type IntResidueMat = [u32; 4];

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModularError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("modulus must be positive")]
    ZeroModulus,
}

/// `SL₂(Z/n)` (homogeneous: `±I` are distinct when `n > 2`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Sl2Mod {
    n: u64,
}

impl Sl2Mod {
    pub fn new(n: u64) -> Result<Self, ModularError> {
        if n == 0 {
            return Err(ModularError::ZeroModulus);
        }
        Ok(Sl2Mod { n })
    }

    pub fn modulus(&self) -> u64 {
        self.n
    }

    pub fn from_ints(&self, m: [i64; 4]) -> IntResidueMat {
        m.map(|x| x.rem_euclid(self.n as i64) as u32)
    }

    pub fn s(&self) -> IntResidueMat {
        self.from_ints([0, 1, -1, 0])
    }

    pub fn t_pow(&self, k: i64) -> IntResidueMat {
        self.from_ints([1, k, 0, 1])
    }

    pub fn lower(&self, k: i64) -> IntResidueMat {
        self.from_ints([1, 0, k, 1])
    }

    /// Reduction to `Z/m` for `m | n`.
    pub fn project(&self, x: &IntResidueMat, m: u64) -> IntResidueMat {
        x.map(|e| (e as u64 % m) as u32)
    }
}

impl FiniteGroup for Sl2Mod {
    type Elem = IntResidueMat;

    fn identity(&self) -> IntResidueMat {
        self.from_ints([1, 0, 0, 1])
    }

    fn mul(&self, x: &IntResidueMat, y: &IntResidueMat) -> IntResidueMat {
        let n = self.n;
        let e = |i: usize, j: usize, k: usize, l: usize| {
            ((x[i] as u64 * y[j] as u64 + x[k] as u64 * y[l] as u64) % n) as u32
        };
        [e(0, 0, 1, 2), e(0, 1, 1, 3), e(2, 0, 3, 2), e(2, 1, 3, 3)]
    }

    fn inverse(&self, x: &IntResidueMat) -> IntResidueMat {
        let n = self.n as u32;
        let neg = |v: u32| (n - v % n) % n;
        [x[3], neg(x[1]), neg(x[2]), x[0]]
    }

    fn conjugators(&self) -> Vec<IntResidueMat> {
        vec![self.s(), self.t_pow(1)]
    }
}

/// The whole of `SL₂(Z/n)`, reached from `S` and `T`.
pub fn build_sl2_quotient(n: u64, cap: usize) -> Result<(Sl2Mod, Subgroup<IntResidueMat>), ModularError> {
    let g = Sl2Mod::new(n)?;
    let all = closure(&g, &[g.s(), g.t_pow(1)], cap)?;
    Ok((g, all))
}

/// `n³ ∏_{p | n} (1 − p⁻²)`.
pub fn sl2_order_formula(n: u64) -> u64 {
    let mut num = n * n * n;
    let mut rest = n;
    let mut p = 2;
    while rest > 1 {
        if rest.is_multiple_of(p) {
            num = num / (p * p) * (p * p - 1);
            while rest.is_multiple_of(p) {
                rest /= p;
            }
        }
        p += 1;
    }
    num
}

/// Elements of `SL₂(Z/n)` that reduce to `I` modulo `m`.
pub fn kernel(g: &Sl2Mod, all: &Subgroup<IntResidueMat>, m: u64) -> Subgroup<IntResidueMat> {
    let id = Sl2Mod { n: m }.identity();
    let elements = all
        .elements()
        .iter()
        .filter(|x| g.project(x, m) == id)
        .copied()
        .collect();
    Subgroup::from_closed_elements(elements, Vec::new())
}

/// Outcome of comparing a normal closure with a kernel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosureCheck {
    pub closure_order: usize,
    pub kernel_order: usize,
    pub equal: bool,
}

/// Normal closure of `Tᵐ` in `SL₂(Z/mk)` against the kernel of reduction mod `m`.
pub fn closure_of_t_power(m: u64, k: u64, cap: usize) -> Result<ClosureCheck, ModularError> {
    let (g, all) = build_sl2_quotient(m * k, cap)?;
    let n = normal_closure(&g, &[g.t_pow(m as i64)], cap)?;
    let ker = kernel(&g, &all, m);
    Ok(ClosureCheck {
        closure_order: n.order(),
        kernel_order: ker.order(),
        equal: n.same_as(&ker),
    })
}

pub fn check_lemma_d2(m: u64, p: u64, cap: usize) -> Result<ClosureCheck, ModularError> {
    if !is_rational_prime(p) {
        return Err(ModularError::NotPrime(p));
    }
    closure_of_t_power(m, p, cap)
}

/// Normal closure of `Tˢ` in `SL₂(Z/rs)` equals the level-`s` kernel.
pub fn check_wohlfahrt(r: u64, s: u64, cap: usize) -> Result<ClosureCheck, ModularError> {
    closure_of_t_power(s, r, cap)
}

/// Any two distinct Sylow `p`-subgroups of `SL₂(Z/p)` generate it.
pub fn check_lemma_d1(p: u64, cap: usize) -> Result<bool, ModularError> {
    if !is_rational_prime(p) {
        return Err(ModularError::NotPrime(p));
    }
    let (g, all) = build_sl2_quotient(p, cap)?;
    // conjugates of the upper unitriangular group
    let upper = closure(&g, &[g.t_pow(1)], cap)?;
    let mut sylows: Vec<Vec<IntResidueMat>> = Vec::new();
    for x in all.elements() {
        let mut conj: Vec<IntResidueMat> = upper.elements().iter().map(|u| g.conjugate(u, x)).collect();
        conj.sort();
        if !sylows.contains(&conj) {
            sylows.push(conj);
        }
    }
    if sylows.len() as u64 != p + 1 {
        return Ok(false);
    }
    for (i, a) in sylows.iter().enumerate() {
        for b in &sylows[i + 1..] {
            let seeds: Vec<IntResidueMat> = a.iter().chain(b).copied().collect();
            if closure(&g, &seeds, cap)?.order() != all.order() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// `U = Tᵐ`, `V = STᵐS⁻¹`, `W = TVT⁻¹` in `SL₂(Z/mp)`.
pub fn uvw_generators(m: u64, p: u64) -> Result<(Sl2Mod, Vec<IntResidueMat>), ModularError> {
    let g = Sl2Mod::new(m * p)?;
    let u = g.t_pow(m as i64);
    let v = g.conjugate(&u, &g.s());
    let w = g.conjugate(&v, &g.t_pow(1));
    Ok((g, vec![u, v, w]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::DEFAULT_ELEMENT_CAP as CAP;

    /// Direct count of determinant-one matrices mod `n`.
    fn brute_force_order(n: u64) -> usize {
        let mut count = 0;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        if (a * d + n * n - b * c % n) % n == 1 % n {
                            count += 1;
                        }
                    }
                }
            }
        }
        count
    }

    #[test]
    fn orders() {
        assert_eq!(build_sl2_quotient(1, CAP).unwrap().1.order(), 1);
        assert_eq!(build_sl2_quotient(2, CAP).unwrap().1.order(), 6);
        assert_eq!(build_sl2_quotient(4, CAP).unwrap().1.order(), 48);
        for n in 1..=12 {
            let order = build_sl2_quotient(n, CAP).unwrap().1.order();
            assert_eq!(order, brute_force_order(n), "n = {n}");
            assert_eq!(order as u64, sl2_order_formula(n), "n = {n}");
        }
    }

    #[test]
    fn lemma_d1() {
        for p in [2, 3, 5, 7] {
            assert!(check_lemma_d1(p, CAP).unwrap(), "p = {p}");
        }
        assert!(check_lemma_d1(4, CAP).is_err());
    }

    #[test]
    fn lemma_d2() {
        let r = check_lemma_d2(2, 2, CAP).unwrap();
        assert_eq!(r.closure_order, 8);
        assert!(r.equal);
        let r = check_lemma_d2(2, 3, CAP).unwrap();
        assert_eq!(r.closure_order, 24);
        assert!(r.equal);
        for (m, p) in [(3, 2), (6, 2), (1, 5)] {
            assert!(check_lemma_d2(m, p, CAP).unwrap().equal, "({m}, {p})");
        }
    }

    #[test]
    fn wohlfahrt_instances() {
        for (r, s) in [(2, 2), (3, 2), (2, 3)] {
            assert!(check_wohlfahrt(r, s, CAP).unwrap().equal, "({r}, {s})");
        }
    }

    #[test]
    fn uvw_generate_the_kernel() {
        for (m, p) in [(2, 2), (3, 3), (6, 2), (6, 3), (5, 5)] {
            let (g, gens) = uvw_generators(m, p).unwrap();
            let h = closure(&g, &gens, CAP).unwrap();
            assert_eq!(h.order() as u64, p * p * p, "({m}, {p})");
            assert!(h.is_elementary_abelian(&g, p), "({m}, {p})");
        }
    }
}
