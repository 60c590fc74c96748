//! Breadth-first closure over finite groups given by a multiplication rule.

use std::collections::BTreeMap;
use std::hash::Hash;

use rustc_hash::FxHashMap;

/// Default limit on the number of elements any closure may produce.
pub const DEFAULT_ELEMENT_CAP: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GroupError {
    #[error("closure exceeded the cap of {cap} elements ({partial} found so far)")]
    CapExceeded { cap: usize, partial: usize },
}

/// A finite group presented by concrete elements and a multiplication rule.
pub trait FiniteGroup {
    type Elem: Clone + Eq + Hash + Ord + std::fmt::Debug;

    fn identity(&self) -> Self::Elem;
    fn mul(&self, x: &Self::Elem, y: &Self::Elem) -> Self::Elem;
    fn inverse(&self, x: &Self::Elem) -> Self::Elem;
    /// Elements whose conjugation action defines normality (images of `S`, `T`).
    fn conjugators(&self) -> Vec<Self::Elem>;

    fn conjugate(&self, x: &Self::Elem, by: &Self::Elem) -> Self::Elem {
        self.mul(&self.mul(by, x), &self.inverse(by))
    }

    fn pow(&self, x: &Self::Elem, e: u64) -> Self::Elem {
        let mut acc = self.identity();
        let mut base = x.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    fn order_of(&self, x: &Self::Elem) -> u64 {
        let id = self.identity();
        let mut acc = x.clone();
        let mut k = 1;
        while acc != id {
            acc = self.mul(&acc, x);
            k += 1;
        }
        k
    }
}

/// A subgroup stored as an explicit element list in BFS order, together
/// with the generators it was built from.
#[derive(Clone, Debug)]
pub struct Subgroup<E> {
    elements: Vec<E>,
    lookup: FxHashMap<E, u32>,
    generators: Vec<E>,
}

impl<E: Clone + Eq + Hash + Ord + std::fmt::Debug> Subgroup<E> {
    pub fn trivial<G: FiniteGroup<Elem = E>>(g: &G) -> Self {
        let id = g.identity();
        let mut lookup = FxHashMap::default();
        lookup.insert(id.clone(), 0);
        Subgroup {
            elements: vec![id],
            lookup,
            generators: Vec::new(),
        }
    }

    /// Wraps a list already known to be closed (e.g. a kernel filtered out
    /// of a materialized group).
    pub fn from_closed_elements(elements: Vec<E>, generators: Vec<E>) -> Self {
        let lookup = elements
            .iter()
            .enumerate()
            .map(|(i, e)| (e.clone(), i as u32))
            .collect();
        Subgroup {
            elements,
            lookup,
            generators,
        }
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[E] {
        &self.elements
    }

    pub fn generators(&self) -> &[E] {
        &self.generators
    }

    pub fn contains(&self, x: &E) -> bool {
        self.lookup.contains_key(x)
    }

    pub fn index_of(&self, x: &E) -> Option<u32> {
        self.lookup.get(x).copied()
    }

    pub fn is_subset_of(&self, other: &Subgroup<E>) -> bool {
        self.elements.iter().all(|x| other.contains(x))
    }

    pub fn same_as(&self, other: &Subgroup<E>) -> bool {
        self.order() == other.order() && self.is_subset_of(other)
    }

    /// Adds generators and extends the closure; returns false if nothing
    /// new was added.
    pub fn extend<G: FiniteGroup<Elem = E>>(
        &mut self,
        g: &G,
        new_gens: &[E],
        cap: usize,
    ) -> Result<bool, GroupError> {
        let fresh: Vec<E> = new_gens
            .iter()
            .filter(|x| !self.contains(x))
            .cloned()
            .collect();
        if fresh.is_empty() {
            return Ok(false);
        }
        self.generators.extend(fresh.iter().cloned());
        // old elements only need the new generators; new ones need all
        let old = self.elements.len();
        for i in 0..old {
            for s in &fresh {
                let y = g.mul(&self.elements[i], s);
                self.insert(y, cap)?;
            }
        }
        let gens = self.generators.clone();
        let mut head = old;
        while head < self.elements.len() {
            for s in &gens {
                let y = g.mul(&self.elements[head], s);
                self.insert(y, cap)?;
            }
            head += 1;
        }
        Ok(true)
    }

    fn insert(&mut self, y: E, cap: usize) -> Result<(), GroupError> {
        if !self.lookup.contains_key(&y) {
            if self.elements.len() >= cap {
                return Err(GroupError::CapExceeded {
                    cap,
                    partial: self.elements.len(),
                });
            }
            self.lookup.insert(y.clone(), self.elements.len() as u32);
            self.elements.push(y);
        }
        Ok(())
    }

    /// Histogram of element orders.
    pub fn order_histogram<G: FiniteGroup<Elem = E>>(&self, g: &G) -> BTreeMap<u64, usize> {
        let mut h = BTreeMap::new();
        for x in &self.elements {
            *h.entry(g.order_of(x)).or_insert(0) += 1;
        }
        h
    }

    /// True if the generators commute pairwise.
    pub fn is_abelian<G: FiniteGroup<Elem = E>>(&self, g: &G) -> bool {
        let gens = &self.generators;
        for (i, x) in gens.iter().enumerate() {
            for y in &gens[i + 1..] {
                if g.mul(x, y) != g.mul(y, x) {
                    return false;
                }
            }
        }
        true
    }

    /// Abelian with every element satisfying `xᵖ = 1`.
    pub fn is_elementary_abelian<G: FiniteGroup<Elem = E>>(&self, g: &G, p: u64) -> bool {
        let id = g.identity();
        self.is_abelian(g) && self.elements.iter().all(|x| g.pow(x, p) == id)
    }
}

/// Smallest subgroup containing `seeds`.
pub fn closure<G: FiniteGroup>(
    g: &G,
    seeds: &[G::Elem],
    cap: usize,
) -> Result<Subgroup<G::Elem>, GroupError> {
    let mut h = Subgroup::trivial(g);
    h.extend(g, seeds, cap)?;
    Ok(h)
}

/// Smallest subgroup containing `seeds` and stable under conjugation by
/// every element of `g.conjugators()`.
pub fn normal_closure<G: FiniteGroup>(
    g: &G,
    seeds: &[G::Elem],
    cap: usize,
) -> Result<Subgroup<G::Elem>, GroupError> {
    let conj: Vec<G::Elem> = g.conjugators();
    let mut h = closure(g, seeds, cap)?;
    let mut checked = 0;
    while checked < h.generators.len() {
        let x = h.generators[checked].clone();
        checked += 1;
        let images: Vec<G::Elem> = conj.iter().map(|c| g.conjugate(&x, c)).collect();
        h.extend(g, &images, cap)?;
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Permutations of {0..n} composed left to right.
    struct Sym(usize);

    impl FiniteGroup for Sym {
        type Elem = Vec<u8>;
        fn identity(&self) -> Vec<u8> {
            (0..self.0 as u8).collect()
        }
        fn mul(&self, x: &Vec<u8>, y: &Vec<u8>) -> Vec<u8> {
            x.iter().map(|&i| y[i as usize]).collect()
        }
        fn inverse(&self, x: &Vec<u8>) -> Vec<u8> {
            let mut out = vec![0; x.len()];
            for (i, &j) in x.iter().enumerate() {
                out[j as usize] = i as u8;
            }
            out
        }
        fn conjugators(&self) -> Vec<Vec<u8>> {
            vec![vec![1, 0, 2, 3], vec![1, 2, 3, 0]]
        }
    }

    #[test]
    fn symmetric_group_closures() {
        let g = Sym(4);
        let all = closure(&g, &g.conjugators(), 100).unwrap();
        assert_eq!(all.order(), 24);
        let c3 = closure(&g, &[vec![1, 2, 0, 3]], 100).unwrap();
        assert_eq!(c3.order(), 3);
        // normal closure of a 3-cycle is A4
        let a4 = normal_closure(&g, &[vec![1, 2, 0, 3]], 100).unwrap();
        assert_eq!(a4.order(), 12);
        // double transpositions form the Klein four-group, already normal
        let v4 = normal_closure(&g, &[vec![1, 0, 3, 2]], 100).unwrap();
        assert_eq!(v4.order(), 4);
        assert!(v4.is_elementary_abelian(&g, 2));
        assert!(!a4.is_abelian(&g) || a4.generators().len() < 2);
        let hist = all.order_histogram(&g);
        assert_eq!(hist.values().sum::<usize>(), 24);
        assert_eq!(hist[&2], 9);
    }

    #[test]
    fn cap_is_reported() {
        let g = Sym(4);
        let err = closure(&g, &g.conjugators(), 10).unwrap_err();
        assert_eq!(err, GroupError::CapExceeded { cap: 10, partial: 10 });
    }

    #[test]
    fn normal_closure_is_idempotent_and_monotone() {
        let g = Sym(4);
        let x = vec![1, 0, 3, 2];
        let n1 = normal_closure(&g, std::slice::from_ref(&x), 100).unwrap();
        let n2 = normal_closure(&g, n1.elements(), 100).unwrap();
        assert!(n1.same_as(&n2));
        let bigger = normal_closure(&g, &[x, vec![1, 2, 0, 3]], 100).unwrap();
        assert!(n1.is_subset_of(&bigger));
    }
}
