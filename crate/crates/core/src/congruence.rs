//! Coset enumeration over `⟨s, u | s², u⁵⟩` with `u = ST`, and the
//! congruence decision built on it.

use std::collections::{BTreeSet, VecDeque};

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::golden::{GoldenError, Modulus};
use crate::group::DEFAULT_ELEMENT_CAP;
use crate::matrix::{Gen, Word};
use crate::quotient::{build_quotient_cached, QuotientCache, QuotientError, ResMat};

/// Default limit on the number of cosets defined during enumeration.
pub const DEFAULT_COSET_CAP: usize = 200_000;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, thiserror::Error)]
pub enum CongruenceError {
    #[error("coset enumeration exceeded {0} cosets (index may be infinite)")]
    CosetCap(usize),
    #[error(transparent)]
    Quotient(#[from] QuotientError),
    #[error(transparent)]
    Golden(#[from] GoldenError),
}

impl CongruenceError {
    /// Resource exhaustion rather than bad input.
    pub fn is_undecided(&self) -> bool {
        match self {
            CongruenceError::CosetCap(_) => true,
            CongruenceError::Quotient(q) => q.is_cap(),
            CongruenceError::Golden(_) => false,
        }
    }
}

// columns of the coset table
const S: usize = 0;
const U: usize = 1;
const UI: usize = 2;
const INV: [usize; 3] = [S, UI, U];

/// Right action of `G₅` on the cosets of a finite-index subgroup.
/// Point 0 is the subgroup itself.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CosetTable {
    pub perm_s: Vec<u32>,
    pub perm_u: Vec<u32>,
    pub perm_t: Vec<u32>,
}

impl CosetTable {
    /// Builds the table from `σ_S` and `σ_U`; `σ_T = σ_S` then `σ_U`.
    pub fn from_su(perm_s: Vec<u32>, perm_u: Vec<u32>) -> Self {
        let perm_t = perm_s.iter().map(|&c| perm_u[c as usize]).collect();
        CosetTable {
            perm_s,
            perm_u,
            perm_t,
        }
    }

    pub fn degree(&self) -> usize {
        self.perm_s.len()
    }

    fn perm_u_inv(&self) -> Vec<u32> {
        let mut out = vec![0; self.degree()];
        for (i, &j) in self.perm_u.iter().enumerate() {
            out[j as usize] = i as u32;
        }
        out
    }

    /// `s² = 1`, `u⁵ = 1` and transitivity.
    pub fn is_valid(&self) -> bool {
        let n = self.degree();
        let ok_s = (0..n).all(|c| self.perm_s[self.perm_s[c] as usize] as usize == c);
        let ok_u = (0..n).all(|c| {
            let mut x = c;
            for _ in 0..5 {
                x = self.perm_u[x] as usize;
            }
            x == c
        });
        ok_s && ok_u && self.canonical_from(0).is_some()
    }

    /// Relabels points in breadth-first order from `base`, following
    /// `s`, `u`, `u⁻¹`. `None` if the action is not transitive.
    pub fn canonical_from(&self, base: usize) -> Option<CosetTable> {
        let n = self.degree();
        let ui = self.perm_u_inv();
        let mut label = vec![u32::MAX; n];
        let mut order = vec![base];
        label[base] = 0;
        let mut head = 0;
        while head < order.len() {
            let c = order[head];
            head += 1;
            for img in [self.perm_s[c], self.perm_u[c], ui[c]] {
                let img = img as usize;
                if label[img] == u32::MAX {
                    label[img] = order.len() as u32;
                    order.push(img);
                }
            }
        }
        if order.len() != n {
            return None;
        }
        let relabel = |perm: &[u32]| -> Vec<u32> {
            order
                .iter()
                .map(|&c| label[perm[c] as usize])
                .collect()
        };
        Some(CosetTable::from_su(relabel(&self.perm_s), relabel(&self.perm_u)))
    }

    /// Normal iff every choice of base point gives the same table.
    pub fn is_normal(&self) -> bool {
        let c0 = self.canonical_from(0);
        (1..self.degree()).all(|b| self.canonical_from(b) == c0)
    }

    /// Image of a point under a word.
    pub fn act(&self, point: usize, w: &Word) -> usize {
        let mut c = point;
        for letter in word_letters(w) {
            c = match letter {
                S => self.perm_s[c],
                U => self.perm_u[c],
                _ => self.perm_u_inv()[c],
            } as usize;
        }
        c
    }

    /// Cycle lengths of `σ_T`, i.e. the cusp widths.
    pub fn t_cycles(&self) -> Vec<u64> {
        let n = self.degree();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for c in 0..n {
            if seen[c] {
                continue;
            }
            let mut len = 0;
            let mut x = c;
            while !seen[x] {
                seen[x] = true;
                x = self.perm_t[x] as usize;
                len += 1;
            }
            out.push(len);
        }
        out
    }

    /// Fixed points of `σ_S`.
    pub fn v2(&self) -> usize {
        (0..self.degree())
            .filter(|&c| self.perm_s[c] as usize == c)
            .count()
    }

    /// Fixed points of `σ_U`.
    pub fn v5(&self) -> usize {
        (0..self.degree())
            .filter(|&c| self.perm_u[c] as usize == c)
            .count()
    }
}

/// `S ↦ s`, `T ↦ s u`, `T⁻¹ ↦ u⁻¹ s`; `S²` is trivial projectively.
fn word_letters(w: &Word) -> Vec<usize> {
    let mut out = Vec::new();
    for &(g, e) in w.letters() {
        match g {
            Gen::S => {
                if e.rem_euclid(2) == 1 {
                    out.push(S);
                }
            }
            Gen::T => {
                for _ in 0..e.unsigned_abs() {
                    if e > 0 {
                        out.extend([S, U]);
                    } else {
                        out.extend([UI, S]);
                    }
                }
            }
        }
    }
    out
}

struct Enumerator {
    table: Vec<[u32; 3]>,
    parent: Vec<u32>,
    queue: VecDeque<u32>,
    cap: usize,
}

const NONE: u32 = u32::MAX;

impl Enumerator {
    fn new(cap: usize) -> Self {
        Enumerator {
            table: vec![[NONE; 3]],
            parent: vec![0],
            queue: VecDeque::new(),
            cap,
        }
    }

    fn rep(&mut self, c: u32) -> u32 {
        let mut r = c;
        while self.parent[r as usize] != r {
            r = self.parent[r as usize];
        }
        let mut c = c;
        while self.parent[c as usize] != r {
            let next = self.parent[c as usize];
            self.parent[c as usize] = r;
            c = next;
        }
        r
    }

    fn live(&self, c: u32) -> bool {
        self.parent[c as usize] == c
    }

    fn define(&mut self, c: u32, x: usize) -> Result<(), CongruenceError> {
        if self.table.len() >= self.cap {
            return Err(CongruenceError::CosetCap(self.cap));
        }
        let n = self.table.len() as u32;
        self.table.push([NONE; 3]);
        self.parent.push(n);
        self.table[c as usize][x] = n;
        self.table[n as usize][INV[x]] = c;
        Ok(())
    }

    fn merge(&mut self, a: u32, b: u32) {
        let (a, b) = (self.rep(a), self.rep(b));
        if a == b {
            return;
        }
        let (keep, drop) = (a.min(b), a.max(b));
        self.parent[drop as usize] = keep;
        self.queue.push_back(drop);
    }

    fn coincidence(&mut self, a: u32, b: u32) {
        self.merge(a, b);
        while let Some(e) = self.queue.pop_front() {
            for x in 0..3 {
                let f = self.table[e as usize][x];
                if f == NONE {
                    continue;
                }
                if self.table[f as usize][INV[x]] == e {
                    self.table[f as usize][INV[x]] = NONE;
                }
                let e1 = self.rep(e);
                let f1 = self.rep(f);
                let ex = self.table[e1 as usize][x];
                let fx = self.table[f1 as usize][INV[x]];
                if ex != NONE {
                    self.merge(f1, ex);
                } else if fx != NONE {
                    self.merge(e1, fx);
                } else {
                    self.table[e1 as usize][x] = f1;
                    self.table[f1 as usize][INV[x]] = e1;
                }
            }
        }
    }

    fn scan_and_fill(&mut self, c: u32, w: &[usize]) -> Result<(), CongruenceError> {
        if w.is_empty() {
            return Ok(());
        }
        let mut f = c;
        let mut b = c;
        let mut i = 0usize;
        let mut j = w.len() as isize - 1;
        loop {
            while (i as isize) <= j && self.table[f as usize][w[i]] != NONE {
                f = self.table[f as usize][w[i]];
                i += 1;
            }
            if (i as isize) > j {
                if f != b {
                    self.coincidence(f, b);
                }
                return Ok(());
            }
            while j >= i as isize && self.table[b as usize][INV[w[j as usize]]] != NONE {
                b = self.table[b as usize][INV[w[j as usize]]];
                j -= 1;
            }
            if j < i as isize {
                self.coincidence(f, b);
                return Ok(());
            }
            if j == i as isize {
                self.table[f as usize][w[i]] = b;
                self.table[b as usize][INV[w[i]]] = f;
                return Ok(());
            }
            self.define(f, w[i])?;
        }
    }

    fn run(mut self, subgroup: &[Vec<usize>]) -> Result<CosetTable, CongruenceError> {
        let relators: [Vec<usize>; 2] = [vec![S, S], vec![U; 5]];
        for w in subgroup {
            let c = self.rep(0);
            self.scan_and_fill(c, w)?;
        }
        let mut c = 0u32;
        while (c as usize) < self.table.len() {
            for r in &relators {
                if !self.live(c) {
                    break;
                }
                self.scan_and_fill(c, r)?;
            }
            for x in 0..3 {
                if !self.live(c) {
                    break;
                }
                if self.table[c as usize][x] == NONE {
                    self.define(c, x)?;
                }
            }
            c += 1;
        }
        Ok(self.compact())
    }

    fn compact(mut self) -> CosetTable {
        let root = self.rep(0);
        let n = self.table.len();
        let mut label = vec![NONE; n];
        let mut order = vec![root];
        label[root as usize] = 0;
        let mut head = 0;
        while head < order.len() {
            let c = order[head];
            head += 1;
            for x in [S, U, UI] {
                let d = self.table[c as usize][x];
                let d = self.rep(d);
                if label[d as usize] == NONE {
                    label[d as usize] = order.len() as u32;
                    order.push(d);
                }
            }
        }
        let mut perm_s = Vec::with_capacity(order.len());
        let mut perm_u = Vec::with_capacity(order.len());
        for &c in &order {
            let s = self.table[c as usize][S];
            let u = self.table[c as usize][U];
            perm_s.push(label[self.rep(s) as usize]);
            perm_u.push(label[self.rep(u) as usize]);
        }
        CosetTable::from_su(perm_s, perm_u)
    }
}

/// Enumerates the cosets of `⟨generators⟩` in `G₅`.
pub fn coset_table(generators: &[Word], cap: usize) -> Result<CosetTable, CongruenceError> {
    let words: Vec<Vec<usize>> = generators.iter().map(word_letters).collect();
    Enumerator::new(cap).run(&words)
}

/// Schreier generators of the stabilizer of point 0, as words in `S`, `T`.
pub fn schreier_generators(t: &CosetTable) -> Vec<Word> {
    let n = t.degree();
    let s = Word::s();
    let u = Word::s().concat(&Word::t());
    let ui = u.inverse();
    let mut rep: Vec<Option<Word>> = vec![None; n];
    rep[0] = Some(Word::identity());
    let mut tree: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut queue = VecDeque::from([0usize]);
    let inv = t.perm_u_inv();
    while let Some(c) = queue.pop_front() {
        let base = rep[c].clone().unwrap();
        for (x, img, w) in [(S, t.perm_s[c], &s), (U, t.perm_u[c], &u), (UI, inv[c], &ui)] {
            let d = img as usize;
            if rep[d].is_none() {
                rep[d] = Some(base.concat(w));
                tree.insert((c, x));
                // the reverse edge is implied by the tree too
                tree.insert((d, INV[x]));
                queue.push_back(d);
            }
        }
    }
    let mut out = Vec::new();
    for c in 0..n {
        for (x, img, w) in [(S, t.perm_s[c], &s), (U, t.perm_u[c], &u)] {
            if tree.contains(&(c, x)) {
                continue;
            }
            let d = img as usize;
            let g = rep[c]
                .as_ref()
                .unwrap()
                .concat(w)
                .concat(&rep[d].as_ref().unwrap().inverse());
            if !g.is_empty() && !out.contains(&g) {
                out.push(g);
            }
        }
    }
    out
}

pub fn geometric_level_from_table(t: &CosetTable) -> u64 {
    t.t_cycles().iter().fold(1u64, |a, w| a.lcm(w))
}

/// `m`, or `2m` when `4 | m`.
pub fn wohlfahrt_modulus(m: u64) -> u64 {
    if m.is_multiple_of(4) {
        2 * m
    } else {
        m
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Congruence,
    NotCongruence,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CongruenceReport {
    pub tool_version: String,
    pub index: u64,
    pub geometric_level: u64,
    pub test_modulus: u64,
    pub quotient_order: u64,
    pub image_order: u64,
    pub verdict: Verdict,
    pub algebraic_level: Option<Modulus>,
}

/// Limits and cache used by the decision pipeline.
#[derive(Clone, Debug)]
pub struct DecisionConfig {
    pub coset_cap: usize,
    pub element_cap: usize,
    pub cache: Option<QuotientCache>,
}

impl Default for DecisionConfig {
    fn default() -> Self {
        DecisionConfig {
            coset_cap: DEFAULT_COSET_CAP,
            element_cap: DEFAULT_ELEMENT_CAP,
            cache: None,
        }
    }
}

/// `(|Q(M)|, |image of K in Q(M)|)`.
fn image_test(
    generators: &[Word],
    m: &Modulus,
    cfg: &DecisionConfig,
) -> Result<(u64, u64), CongruenceError> {
    let q = build_quotient_cached(m, true, cfg.element_cap, cfg.cache.as_ref())?;
    let g = q.ambient();
    let seeds: Vec<ResMat> = generators.iter().map(|w| g.from_word(w)).collect();
    let image = g
        .closure(&seeds, q.order())
        .map_err(QuotientError::from)?;
    Ok((q.order() as u64, image.order() as u64))
}

/// Decides whether the subgroup generated by `generators` contains `G(M)`
/// for `M` the Wohlfahrt modulus of its geometric level.
pub fn is_congruence(
    generators: &[Word],
    cfg: &DecisionConfig,
) -> Result<CongruenceReport, CongruenceError> {
    let table = coset_table(generators, cfg.coset_cap)?;
    report_for(generators, &table, cfg)
}

/// [`is_congruence`] for a subgroup given by its coset table.
pub fn is_congruence_table(
    table: &CosetTable,
    cfg: &DecisionConfig,
) -> Result<CongruenceReport, CongruenceError> {
    report_for(&schreier_generators(table), table, cfg)
}

fn report_for(
    generators: &[Word],
    table: &CosetTable,
    cfg: &DecisionConfig,
) -> Result<CongruenceReport, CongruenceError> {
    let index = table.degree() as u64;
    let level = geometric_level_from_table(table);
    let test = wohlfahrt_modulus(level);
    let (qo, io) = image_test(generators, &Modulus::rational(test)?, cfg)?;
    let congruent = qo == io * index;
    let mut report = CongruenceReport {
        tool_version: TOOL_VERSION.to_string(),
        index,
        geometric_level: level,
        test_modulus: test,
        quotient_order: qo,
        image_order: io,
        verdict: if congruent {
            Verdict::Congruence
        } else {
            Verdict::NotCongruence
        },
        algebraic_level: None,
    };
    if congruent {
        report.algebraic_level = Some(algebraic_level(generators, &report, cfg)?);
    }
    Ok(report)
}

/// Smallest-norm ideal divisor `(π)` of the test modulus with `G(π) ⊆ K`.
pub fn algebraic_level(
    generators: &[Word],
    report: &CongruenceReport,
    cfg: &DecisionConfig,
) -> Result<Modulus, CongruenceError> {
    let top = Modulus::rational(report.test_modulus)?;
    for d in top.divisors()? {
        let (qo, io) = image_test(generators, &d, cfg)?;
        if qo == io * report.index {
            return Ok(d);
        }
    }
    Ok(top)
}

/// All subgroups of index `n`, one table each (point 0 marked).
pub fn enumerate_index(n: usize) -> Vec<CosetTable> {
    if n == 0 {
        return Vec::new();
    }
    let involutions = permutations_with(n, |p| (0..n).all(|i| p[p[i] as usize] as usize == i));
    let order5 = permutations_with(n, |p| {
        (0..n).all(|i| {
            let mut x = i;
            for _ in 0..5 {
                x = p[x] as usize;
            }
            x == i
        })
    });
    let mut found: BTreeSet<CosetTable> = BTreeSet::new();
    for s in &involutions {
        for u in &order5 {
            let t = CosetTable::from_su(s.clone(), u.clone());
            if let Some(c) = t.canonical_from(0) {
                found.insert(c);
            }
        }
    }
    found.into_iter().collect()
}

fn permutations_with(n: usize, keep: impl Fn(&[u32]) -> bool) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut p: Vec<u32> = (0..n as u32).collect();
    heap_permute(&mut p, n, &mut |q| {
        if keep(q) {
            out.push(q.to_vec());
        }
    });
    out
}

fn heap_permute(p: &mut Vec<u32>, k: usize, f: &mut impl FnMut(&[u32])) {
    if k <= 1 {
        f(p);
        return;
    }
    for i in 0..k - 1 {
        heap_permute(p, k - 1, f);
        if k.is_multiple_of(2) {
            p.swap(i, k - 1);
        } else {
            p.swap(0, k - 1);
        }
    }
    heap_permute(p, k - 1, f);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn words(ws: &[&str]) -> Vec<Word> {
        ws.iter().map(|w| w.parse().unwrap()).collect()
    }

    #[test]
    fn whole_group_and_small_subgroups() {
        let t = coset_table(&words(&["S", "T"]), 1000).unwrap();
        assert_eq!(t.degree(), 1);
        assert_eq!(geometric_level_from_table(&t), 1);
        // ⟨T⟩ has infinite index
        assert!(matches!(
            coset_table(&words(&["T"]), 1000),
            Err(CongruenceError::CosetCap(1000))
        ));
        // kernel of G₅ → Z₂ sending S ↦ 1, U ↦ 0
        let t = coset_table(&words(&["S T", "T S"]), 1000).unwrap();
        assert_eq!(t.degree(), 2);
        assert!(t.is_valid());
    }

    #[test]
    fn schreier_generators_generate_the_stabilizer() {
        for n in 1..=5 {
            for t in enumerate_index(n) {
                let gens = schreier_generators(&t);
                for g in &gens {
                    assert_eq!(t.act(0, g), 0);
                }
                let back = coset_table(&gens, 10_000).unwrap();
                assert_eq!(back, t);
            }
        }
    }

    #[test]
    fn census_counts() {
        let counts: Vec<usize> = (1..=5).map(|n| enumerate_index(n).len()).collect();
        assert_eq!(counts, vec![1, 1, 0, 0, 26]);
        let normal = enumerate_index(5).iter().filter(|t| t.is_normal()).count();
        assert_eq!(normal, 1);
        assert!(enumerate_index(2)[0].is_normal());
    }

    #[test]
    fn wohlfahrt_moduli() {
        assert_eq!(wohlfahrt_modulus(5), 5);
        assert_eq!(wohlfahrt_modulus(4), 8);
        assert_eq!(wohlfahrt_modulus(6), 6);
        assert_eq!(wohlfahrt_modulus(1), 1);
    }

    #[test]
    fn whole_group_is_level_one() {
        let r = is_congruence(&words(&["S", "T"]), &DecisionConfig::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Congruence);
        assert_eq!(r.index, 1);
        assert_eq!(r.algebraic_level.unwrap(), Modulus::rational(1).unwrap());
    }

    #[test]
    fn report_json_round_trip() {
        let r = is_congruence(&words(&["S T", "T S"]), &DecisionConfig::default()).unwrap();
        let text = serde_json::to_string(&r).unwrap();
        let back: CongruenceReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
    }
}
