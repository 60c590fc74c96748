//! Hecke–Farey symbols: parsing, side pairings and cusp widths.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::golden::GoldenInt;
use crate::matrix::{decompose, GMat, ProjMat, Word};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FareyError {
    #[error("malformed symbol: {0}")]
    Syntax(String),
    #[error("malformed cusp {0:?}")]
    Cusp(String),
    #[error("free label {label} occurs {count} time(s), expected exactly 2")]
    FreeLabelCount { label: u64, count: usize },
    #[error("cusps {0} and {1} are not adjacent (determinant is not a unit)")]
    NotAdjacent(String, String),
    #[error("invalid symbol: {0}")]
    Invalid(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Cusp {
    NegInf,
    Inf,
    /// Formal fraction, kept unreduced.
    Finite { num: GoldenInt, den: GoldenInt },
}

impl fmt::Display for Cusp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cusp::NegInf => write!(f, "-inf"),
            Cusp::Inf => write!(f, "inf"),
            Cusp::Finite { num, den } if den.is_one() => write!(f, "{num}"),
            Cusp::Finite { num, den } => write!(f, "{num}/{den}"),
        }
    }
}

impl FromStr for Cusp {
    type Err = FareyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || FareyError::Cusp(s.to_string());
        match s {
            "-inf" => return Ok(Cusp::NegInf),
            "inf" => return Ok(Cusp::Inf),
            _ => {}
        }
        let (num, den) = match s.split_once('/') {
            Some((n, d)) => (
                n.parse::<GoldenInt>().map_err(|_| err())?,
                d.parse::<GoldenInt>().map_err(|_| err())?,
            ),
            None => (s.parse::<GoldenInt>().map_err(|_| err())?, GoldenInt::one()),
        };
        if den.is_zero() {
            return Err(err());
        }
        Ok(Cusp::Finite { num, den })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    Even,
    Odd,
    Free(u64),
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Even => write!(f, "o"),
            Label::Odd => write!(f, "*"),
            Label::Free(k) => write!(f, "{k}"),
        }
    }
}

impl FromStr for Label {
    type Err = FareyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "o" => Ok(Label::Even),
            "*" => Ok(Label::Odd),
            _ => match s.parse::<u64>() {
                Ok(k) if k > 0 => Ok(Label::Free(k)),
                _ => Err(FareyError::Syntax(format!("bad label {s:?}"))),
            },
        }
    }
}

/// A validated symbol. `columns[i]` is a primitive column `(p, q)` for
/// cusp `i`, signed so that consecutive columns have determinant 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeckeFareySymbol {
    cusps: Vec<Cusp>,
    labels: Vec<Label>,
    columns: Vec<(GoldenInt, GoldenInt)>,
}

fn det(u: &(GoldenInt, GoldenInt), w: &(GoldenInt, GoldenInt)) -> GoldenInt {
    &w.0 * &u.1 - &u.0 * &w.1
}

impl HeckeFareySymbol {
    pub fn new(cusps: Vec<Cusp>, labels: Vec<Label>) -> Result<Self, FareyError> {
        if cusps.len() < 2 || labels.len() + 1 != cusps.len() {
            return Err(FareyError::Syntax("need n+1 cusps for n labels".into()));
        }
        if cusps[0] != Cusp::NegInf || cusps[cusps.len() - 1] != Cusp::Inf {
            return Err(FareyError::Syntax("symbol must run from -inf to inf".into()));
        }
        if cusps[1..cusps.len() - 1]
            .iter()
            .any(|c| !matches!(c, Cusp::Finite { .. }))
        {
            return Err(FareyError::Syntax("interior cusps must be finite".into()));
        }
        let mut counts: BTreeMap<u64, usize> = BTreeMap::new();
        for l in &labels {
            if let Label::Free(k) = l {
                *counts.entry(*k).or_default() += 1;
            }
        }
        if let Some((&label, &count)) = counts.iter().find(|(_, &c)| c != 2) {
            return Err(FareyError::FreeLabelCount { label, count });
        }
        let mut columns: Vec<(GoldenInt, GoldenInt)> = Vec::with_capacity(cusps.len());
        for c in &cusps {
            let raw = match c {
                Cusp::NegInf => (-GoldenInt::one(), GoldenInt::zero()),
                Cusp::Inf => (GoldenInt::one(), GoldenInt::zero()),
                Cusp::Finite { num, den } => (num.clone(), den.clone()),
            };
            let col = match columns.last() {
                None => raw,
                Some(prev) => {
                    let d = det(prev, &raw);
                    if d.is_one() {
                        raw
                    } else if (-&d).is_one() {
                        (-&raw.0, -&raw.1)
                    } else {
                        let i = columns.len();
                        return Err(FareyError::NotAdjacent(
                            cusps[i - 1].to_string(),
                            c.to_string(),
                        ));
                    }
                }
            };
            columns.push(col);
        }
        Ok(HeckeFareySymbol {
            cusps,
            labels,
            columns,
        })
    }

    pub fn cusps(&self) -> &[Cusp] {
        &self.cusps
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn v2(&self) -> usize {
        self.labels.iter().filter(|l| **l == Label::Even).count()
    }

    pub fn v5(&self) -> usize {
        self.labels.iter().filter(|l| **l == Label::Odd).count()
    }

    /// Sends `0 ↦ xᵢ` and `∞ ↦ xᵢ₊₁`.
    fn edge_matrix(&self, i: usize) -> GMat {
        let (p0, q0) = &self.columns[i];
        let (p1, q1) = &self.columns[i + 1];
        GMat::new(p1.clone(), p0.clone(), q1.clone(), q0.clone())
            .expect("consecutive columns are unimodular")
    }

    /// Vertex classes: `class[i]` for cusp `i`, with `-inf` and `inf` merged.
    fn vertex_classes(&self) -> Vec<usize> {
        let n = self.cusps.len();
        let mut uf = UnionFind::new(n);
        uf.union(0, n - 1);
        for (i, l) in self.labels.iter().enumerate() {
            match l {
                Label::Even | Label::Odd => uf.union(i, i + 1),
                Label::Free(_) => {
                    if let Some(j) = self.partner(i) {
                        uf.union(i, j + 1);
                        uf.union(i + 1, j);
                    }
                }
            }
        }
        (0..n).map(|i| uf.find(i)).collect()
    }

    fn partner(&self, i: usize) -> Option<usize> {
        let l = self.labels[i];
        (0..self.labels.len()).find(|&j| j != i && self.labels[j] == l)
    }
}

impl fmt::Display for HeckeFareySymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}", self.cusps[0])?;
        for (l, c) in self.labels.iter().zip(&self.cusps[1..]) {
            write!(f, "; {l}; {c}")?;
        }
        write!(f, "]")
    }
}

impl FromStr for HeckeFareySymbol {
    type Err = FareyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_hfs(s)
    }
}

/// `[-inf; <label>; <cusp>; ...; <label>; inf]`, whitespace insignificant.
pub fn parse_hfs(text: &str) -> Result<HeckeFareySymbol, FareyError> {
    let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let inner = compact
        .strip_prefix('[')
        .and_then(|r| r.strip_suffix(']'))
        .ok_or_else(|| FareyError::Syntax("expected [ ... ]".into()))?;
    let tokens: Vec<&str> = inner.split(';').collect();
    if tokens.len().is_multiple_of(2) {
        return Err(FareyError::Syntax(
            "expected alternating cusps and labels".into(),
        ));
    }
    let mut cusps = Vec::new();
    let mut labels = Vec::new();
    for (i, tok) in tokens.iter().enumerate() {
        if i % 2 == 0 {
            cusps.push(tok.parse::<Cusp>()?);
        } else {
            labels.push(tok.parse::<Label>()?);
        }
    }
    HeckeFareySymbol::new(cusps, labels)
}

/// Independent generators: one per even edge, one per odd edge and one
/// per pair of free edges, each checked against its contract.
pub fn side_pairing(hfs: &HeckeFareySymbol) -> Result<Vec<ProjMat>, FareyError> {
    let s = GMat::s();
    let ts = GMat::t_pow(1).mul(&s);
    let lambda = GoldenInt::lambda();
    let mut out = Vec::new();
    for (i, l) in hfs.labels.iter().enumerate() {
        let h = hfs.edge_matrix(i);
        let g = match l {
            Label::Even => {
                let g = ProjMat::new(s.conjugate_by(&h));
                if !g.matrix().trace().is_zero() || g.finite_order() != Some(2) {
                    return Err(FareyError::Invalid(format!("even edge {i}")));
                }
                g
            }
            Label::Odd => {
                let g = ProjMat::new(ts.conjugate_by(&h));
                if g.abs_trace() != lambda || g.finite_order() != Some(5) {
                    return Err(FareyError::Invalid(format!("odd edge {i}")));
                }
                g
            }
            Label::Free(_) => {
                let j = hfs.partner(i).expect("validated pair");
                if j < i {
                    continue;
                }
                let hj = hfs.edge_matrix(j);
                let g = ProjMat::new(hj.mul(&s).mul(&h.inverse()));
                if g.finite_order().is_some() {
                    return Err(FareyError::Invalid(format!("free pair {i}, {j} has finite order")));
                }
                g
            }
        };
        decompose(&g).map_err(|e| FareyError::Invalid(format!("edge {i}: {e}")))?;
        out.push(g);
    }
    Ok(out)
}

/// [`side_pairing`] as words in `S` and `T`.
pub fn side_pairing_words(hfs: &HeckeFareySymbol) -> Result<Vec<Word>, FareyError> {
    side_pairing(hfs)?
        .iter()
        .map(|g| decompose(g).map_err(|e| FareyError::Invalid(e.to_string())))
        .collect()
}

/// A vertex class of the polygon and its width.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CuspClass {
    /// Rendered cusps in the class, in symbol order.
    pub cusps: Vec<String>,
    pub width: u64,
}

/// Widths per vertex class, ordered by first appearance in the symbol.
///
/// Each vertex contributes the number of `λ`-translates spanned between its
/// two neighbours; an odd edge adds half a translate at each endpoint.
pub fn cusp_widths(hfs: &HeckeFareySymbol) -> Result<Vec<CuspClass>, FareyError> {
    let n = hfs.cusps.len();
    let lambda = GoldenInt::lambda();
    // contributions in units of half a translate
    let mut halves = vec![0u64; n];
    for v in 1..n {
        let (u, w) = if v == n - 1 {
            if n == 2 {
                return Err(FareyError::Invalid("no finite cusp".into()));
            }
            (&hfs.columns[n - 2], &hfs.columns[1])
        } else {
            (&hfs.columns[v - 1], &hfs.columns[v + 1])
        };
        let d = det(u, w);
        let corners = d
            .div_exact(&lambda)
            .filter(|c| c.b.is_zero())
            .and_then(|c| c.a.abs().to_u64())
            .ok_or_else(|| {
                FareyError::Invalid(format!("corner at {} is {d}, not an integer multiple of L", hfs.cusps[v]))
            })?;
        halves[v] += 2 * corners;
    }
    for (i, l) in hfs.labels.iter().enumerate() {
        if *l == Label::Odd {
            halves[i] += 1;
            halves[i + 1] += 1;
        }
    }
    let classes = hfs.vertex_classes();
    let mut order: Vec<usize> = Vec::new();
    let mut sums: BTreeMap<usize, (Vec<String>, u64)> = BTreeMap::new();
    for i in 0..n {
        let c = classes[i];
        if !sums.contains_key(&c) {
            order.push(c);
        }
        let e = sums.entry(c).or_default();
        if i != 0 {
            e.0.push(hfs.cusps[i].to_string());
        }
        e.1 += halves[i];
    }
    order
        .into_iter()
        .map(|c| {
            let (cusps, h) = sums.remove(&c).unwrap();
            if h == 0 || h % 2 != 0 {
                return Err(FareyError::Invalid(format!(
                    "class {cusps:?} has width {h}/2"
                )));
            }
            Ok(CuspClass {
                cusps,
                width: h / 2,
            })
        })
        .collect()
}

pub fn geometric_level(hfs: &HeckeFareySymbol) -> Result<u64, FareyError> {
    Ok(cusp_widths(hfs)?
        .iter()
        .fold(1u64, |acc, c| acc.lcm(&c.width)))
}

/// Everything derivable from a symbol without coset enumeration.
#[derive(Clone, Debug)]
pub struct SubgroupProfile {
    pub generators: Vec<ProjMat>,
    pub words: Vec<Word>,
    pub index: u64,
    pub v2: usize,
    pub v5: usize,
    pub cusp_widths: Vec<u64>,
    pub geometric_level: u64,
}

pub fn profile(hfs: &HeckeFareySymbol) -> Result<SubgroupProfile, FareyError> {
    let generators = side_pairing(hfs)?;
    let words = side_pairing_words(hfs)?;
    let widths = cusp_widths(hfs)?;
    let cusp_widths: Vec<u64> = widths.iter().map(|c| c.width).collect();
    Ok(SubgroupProfile {
        generators,
        words,
        index: cusp_widths.iter().sum(),
        v2: hfs.v2(),
        v5: hfs.v5(),
        geometric_level: cusp_widths.iter().fold(1u64, |a, w| a.lcm(w)),
        cusp_widths,
    })
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut x = x;
        while self.0[x] != r {
            let next = self.0[x];
            self.0[x] = r;
            x = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SYMBOLS: [(&str, &str); 7] = [
        ("5.1", "[-inf; *; 0; *; inf]"),
        ("5.2", "[-inf; 1; 0; 2; 1/L; o; L/L; 2; L; 1; inf]"),
        ("5.3", "[-inf; 1; 0; 1; 1/L; o; L/L; 2; L; 2; inf]"),
        ("5.4", "[-inf; 1; 0; 2; 1/L; o; L/L; 1; L; 2; inf]"),
        ("5.5", "[-inf; 1; 0; o; 1/L; o; L/L; o; L; 1; inf]"),
        ("5.6", "[-inf; o; 0; 1; 1/L; o; L/L; 1; L; o; inf]"),
        ("5.7", "[-inf; o; 0; o; 1/L; o; L/L; o; L; o; inf]"),
    ];

    #[test]
    fn parse_and_render() {
        for (_, text) in SYMBOLS {
            let h = parse_hfs(text).unwrap();
            assert_eq!(h.to_string(), text);
            assert_eq!(parse_hfs(&h.to_string()).unwrap(), h);
        }
        let h = parse_hfs("[ -inf ; * ; 0 ; * ; inf ]").unwrap();
        assert_eq!(h.v5(), 2);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            parse_hfs("[-inf; 1; 0; o; inf]"),
            Err(FareyError::FreeLabelCount { label: 1, count: 1 })
        ));
        assert!(matches!(
            parse_hfs("[-inf; 1; 0; 1; 1/L; 1; inf]"),
            Err(FareyError::FreeLabelCount { count: 3, .. })
        ));
        assert!(parse_hfs("[0; o; inf]").is_err());
        assert!(parse_hfs("[-inf; o; 0; o]").is_err());
        assert!(parse_hfs("[-inf; o; 0/0; o; inf]").is_err());
        assert!(parse_hfs("[-inf; x; 0; o; inf]").is_err());
        assert!(matches!(
            parse_hfs("[-inf; o; 0; o; 2; o; inf]"),
            Err(FareyError::NotAdjacent(..))
        ));
    }

    #[test]
    fn generator_counts_and_orders() {
        let h = parse_hfs(SYMBOLS[6].1).unwrap();
        let g = side_pairing(&h).unwrap();
        assert_eq!(g.len(), 5);
        assert!(g.iter().all(|x| x.finite_order() == Some(2)));
        let h = parse_hfs(SYMBOLS[0].1).unwrap();
        let g = side_pairing(&h).unwrap();
        assert_eq!(g.len(), 2);
        assert!(g.iter().all(|x| x.finite_order() == Some(5)));
        let h = parse_hfs(SYMBOLS[1].1).unwrap();
        assert_eq!(side_pairing(&h).unwrap().len(), 3);
    }

    #[test]
    fn free_pairing_maps_edges() {
        // g sends start_i to end_j and end_i to start_j
        let h = parse_hfs(SYMBOLS[1].1).unwrap();
        let g = side_pairing(&h).unwrap();
        let free01 = g[0].matrix();
        let act = |c: &(GoldenInt, GoldenInt)| {
            (
                &free01.e11 * &c.0 + &free01.e12 * &c.1,
                &free01.e21 * &c.0 + &free01.e22 * &c.1,
            )
        };
        let parallel = |x: &(GoldenInt, GoldenInt), y: &(GoldenInt, GoldenInt)| det(x, y).is_zero();
        assert!(parallel(&act(&h.columns[0]), &h.columns[5]));
        assert!(parallel(&act(&h.columns[1]), &h.columns[4]));
    }

    #[test]
    fn widths_and_levels() {
        let expected = [2, 2, 3, 5, 4, 6, 5];
        for ((name, text), lvl) in SYMBOLS.iter().zip(expected) {
            let h = parse_hfs(text).unwrap();
            let p = profile(&h).unwrap();
            assert_eq!(p.geometric_level, lvl, "{name}");
            let want_index = if *name == "5.1" { 2 } else { 5 };
            assert_eq!(p.index, want_index, "{name}");
        }
        let whole = parse_hfs("[-inf; o; 0; *; inf]").unwrap();
        assert_eq!(geometric_level(&whole).unwrap(), 1);
    }
}
