//! Finite matroids on ground sets `0..n` with `n <= 20`.
//!
//! Every matroid carries a full rank table indexed by subset bitmask, from which
//! bases, circuits, closures, duals and minors are derived. Input encodings
//! (bases, circuits, graphs, GF(2) columns, uniform) are checked on ingestion
//! and rejected if they violate the axioms.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits;

/// Largest supported ground set.
pub const MAX_GROUND: usize = 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MatroidError {
    #[error("axiom violation: {0}")]
    AxiomViolation(String),
    #[error("element {element} out of range for ground set of size {n}")]
    IndexOutOfRange { element: usize, n: usize },
    #[error("ground set of size {0} exceeds the supported maximum of {MAX_GROUND}")]
    GroundTooLarge(usize),
    #[error("delete and contract sets overlap")]
    Overlap,
    #[error("malformed matroid description: {0}")]
    Malformed(String),
}

pub type Result<T> = std::result::Result<T, MatroidError>;

/// Serialized matroid description.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatroidSpec {
    #[serde(default)]
    pub name: String,
    pub n: usize,
    pub kind: MatroidKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sets: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<[usize; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cols: Option<Vec<String>>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatroidKind {
    #[default]
    Bases,
    Circuits,
    Uniform,
    Graph,
    Gf2cols,
}

#[derive(Clone)]
pub struct Matroid {
    name: String,
    n: usize,
    rank_table: Vec<u8>,
    bases: Vec<u32>,
    circuits: Vec<u32>,
}

impl PartialEq for Matroid {
    /// Labeled equality: same ground set and same rank function.
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.rank_table == other.rank_table
    }
}

impl Eq for Matroid {}

impl fmt::Debug for Matroid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Matroid")
            .field("name", &self.name)
            .field("n", &self.n)
            .field("rank", &self.rank())
            .field("bases", &self.bases.len())
            .finish()
    }
}

fn check_ground(n: usize) -> Result<()> {
    if n > MAX_GROUND {
        Err(MatroidError::GroundTooLarge(n))
    } else {
        Ok(())
    }
}

fn mask_of(items: &[usize], n: usize) -> Result<u32> {
    bits::from_elements(items, n).map_err(|element| MatroidError::IndexOutOfRange { element, n })
}

fn fmt_set(mask: u32) -> String {
    format!("{:?}", bits::elements(mask))
}

impl Matroid {
    /// Builds a matroid from an independence oracle evaluated on every subset.
    fn from_independence(name: String, n: usize, indep: impl Fn(u32) -> bool) -> Result<Self> {
        check_ground(n)?;
        let size = 1usize << n;
        let mut rank_table = vec![0u8; size];
        for a in 0..size {
            let a32 = a as u32;
            rank_table[a] = if indep(a32) {
                bits::size(a32) as u8
            } else {
                bits::ones(a32)
                    .map(|x| rank_table[a & !(1 << x)])
                    .max()
                    .unwrap_or(0)
            };
        }
        Ok(Self::from_table(name, n, rank_table))
    }

    /// Builds a matroid from a rank function evaluated on every subset. The
    /// function is trusted to be a matroid rank function.
    fn from_rank_fn(name: String, n: usize, rank: impl Fn(u32) -> usize) -> Result<Self> {
        check_ground(n)?;
        let rank_table = (0..1u32 << n).map(|a| rank(a) as u8).collect();
        Ok(Self::from_table(name, n, rank_table))
    }

    fn from_table(name: String, n: usize, rank_table: Vec<u8>) -> Self {
        let full = bits::full(n) as usize;
        let r = rank_table[full];
        let mut bases = Vec::new();
        let mut circuits = Vec::new();
        for a in 0..rank_table.len() {
            let sz = (a as u32).count_ones() as u8;
            let ra = rank_table[a];
            if ra == sz && sz == r {
                bases.push(a as u32);
            }
            if ra + 1 == sz && bits::ones(a as u32).all(|x| rank_table[a & !(1 << x)] == sz - 1) {
                circuits.push(a as u32);
            }
        }
        let key = |m: &u32| (bits::size(*m), bits::lex_key(*m));
        bases.sort_by_key(key);
        circuits.sort_by_key(key);
        Matroid {
            name,
            n,
            rank_table,
            bases,
            circuits,
        }
    }

    /// Builds a matroid from a rank function on subset masks. The function is
    /// not checked; see [`Matroid::check_rank_axioms`].
    pub fn from_rank_function(n: usize, rank: impl Fn(u32) -> usize) -> Result<Self> {
        Self::from_rank_fn(String::new(), n, rank)
    }

    /// The uniform matroid `U_{r,n}`.
    pub fn uniform(r: usize, n: usize) -> Result<Self> {
        if r > n {
            return Err(MatroidError::Malformed(format!("uniform rank {r} exceeds {n}")));
        }
        Self::from_rank_fn(format!("U{r},{n}"), n, |a| bits::size(a).min(r))
    }

    /// Matroid given by its list of bases; the exchange axiom is verified.
    pub fn from_bases(n: usize, bases: &[Vec<usize>]) -> Result<Self> {
        check_ground(n)?;
        let masks = bases.iter().map(|b| mask_of(b, n)).collect::<Result<Vec<_>>>()?;
        let set: HashSet<u32> = masks.iter().copied().collect();
        if set.is_empty() {
            return Err(MatroidError::AxiomViolation("no bases given".into()));
        }
        let r = bits::size(masks[0]);
        if let Some(b) = masks.iter().find(|&&b| bits::size(b) != r) {
            return Err(MatroidError::AxiomViolation(format!(
                "basis {} has size different from {}",
                fmt_set(*b),
                r
            )));
        }
        for &b1 in &set {
            for &b2 in &set {
                for x in bits::ones(b1 & !b2) {
                    let ok = bits::ones(b2 & !b1).any(|y| set.contains(&((b1 & !(1 << x)) | (1 << y))));
                    if !ok {
                        return Err(MatroidError::AxiomViolation(format!(
                            "basis exchange fails for {} -> {} at element {}",
                            fmt_set(b1),
                            fmt_set(b2),
                            x
                        )));
                    }
                }
            }
        }
        let list: Vec<u32> = set.into_iter().collect();
        Self::from_independence(String::new(), n, |a| list.iter().any(|&b| bits::is_subset(a, b)))
    }

    /// Matroid given by its circuits; the circuit axioms are verified.
    pub fn from_circuits(n: usize, circuits: &[Vec<usize>]) -> Result<Self> {
        check_ground(n)?;
        let masks = circuits.iter().map(|c| mask_of(c, n)).collect::<Result<Vec<_>>>()?;
        if masks.contains(&0) {
            return Err(MatroidError::AxiomViolation("the empty set is not a circuit".into()));
        }
        for (i, &c1) in masks.iter().enumerate() {
            for (j, &c2) in masks.iter().enumerate() {
                if i == j {
                    continue;
                }
                if c1 == c2 {
                    return Err(MatroidError::AxiomViolation(format!("duplicate circuit {}", fmt_set(c1))));
                }
                if bits::is_subset(c1, c2) {
                    return Err(MatroidError::AxiomViolation(format!(
                        "circuit {} is contained in circuit {}",
                        fmt_set(c1),
                        fmt_set(c2)
                    )));
                }
                for x in bits::ones(c1 & c2) {
                    let target = (c1 | c2) & !(1 << x);
                    if !masks.iter().any(|&c3| bits::is_subset(c3, target)) {
                        return Err(MatroidError::AxiomViolation(format!(
                            "circuit elimination fails for {} and {} at element {}",
                            fmt_set(c1),
                            fmt_set(c2),
                            x
                        )));
                    }
                }
            }
        }
        Self::from_independence(String::new(), n, |a| !masks.iter().any(|&c| bits::is_subset(c, a)))
    }

    /// Cycle matroid of a multigraph given by its edge list; ground set = edges.
    pub fn from_graph(edges: &[[usize; 2]]) -> Result<Self> {
        let n = edges.len();
        check_ground(n)?;
        let vertices = edges.iter().flat_map(|e| e.iter().copied()).max().map_or(0, |v| v + 1);
        Self::from_independence(String::new(), n, |a| {
            let mut parent: Vec<usize> = (0..vertices).collect();
            fn find(p: &mut [usize], mut x: usize) -> usize {
                while p[x] != x {
                    p[x] = p[p[x]];
                    x = p[x];
                }
                x
            }
            for i in bits::ones(a) {
                let (u, v) = (find(&mut parent, edges[i][0]), find(&mut parent, edges[i][1]));
                if u == v {
                    return false;
                }
                parent[u] = v;
            }
            true
        })
    }

    /// Linear matroid of a list of GF(2) column vectors written as bitstrings.
    pub fn from_gf2_columns(cols: &[String]) -> Result<Self> {
        let n = cols.len();
        check_ground(n)?;
        let vecs = cols
            .iter()
            .map(|c| {
                if c.is_empty() || c.len() > 64 || !c.chars().all(|ch| ch == '0' || ch == '1') {
                    return Err(MatroidError::Malformed(format!("bad GF(2) column {c:?}")));
                }
                Ok(u64::from_str_radix(c, 2).expect("validated bitstring"))
            })
            .collect::<Result<Vec<u64>>>()?;
        Self::from_independence(String::new(), n, |a| {
            let mut basis: Vec<u64> = Vec::new();
            for i in bits::ones(a) {
                let mut v = vecs[i];
                for &b in &basis {
                    v = v.min(v ^ b);
                }
                if v == 0 {
                    return false;
                }
                basis.push(v);
                basis.sort_unstable_by(|x, y| y.cmp(x));
            }
            true
        })
    }

    /// The Fano plane as the GF(2) columns `001 .. 111`; element `k` is column `k + 1`.
    pub fn fano() -> Self {
        let cols: Vec<String> = (1..=7u32).map(|v| format!("{v:03b}")).collect();
        Self::from_gf2_columns(&cols).expect("Fano columns are valid").with_name("Fano")
    }

    /// Cycle matroid of the complete graph `K_k`.
    pub fn complete_graph(k: usize) -> Result<Self> {
        let mut edges = Vec::new();
        for u in 0..k {
            for v in u + 1..k {
                edges.push([u, v]);
            }
        }
        Ok(Self::from_graph(&edges)?.with_name(&format!("K{k}")))
    }

    pub fn from_spec(spec: &MatroidSpec) -> Result<Self> {
        let need_sets = || {
            spec.sets
                .as_ref()
                .ok_or_else(|| MatroidError::Malformed(format!("kind {:?} requires \"sets\"", spec.kind)))
        };
        let m = match spec.kind {
            MatroidKind::Bases => Self::from_bases(spec.n, need_sets()?)?,
            MatroidKind::Circuits => Self::from_circuits(spec.n, need_sets()?)?,
            MatroidKind::Uniform => {
                let r = spec
                    .r
                    .ok_or_else(|| MatroidError::Malformed("uniform requires \"r\"".into()))?;
                Self::uniform(r, spec.n)?
            }
            MatroidKind::Graph => {
                let edges = spec
                    .edges
                    .as_ref()
                    .ok_or_else(|| MatroidError::Malformed("graph requires \"edges\"".into()))?;
                if edges.len() != spec.n {
                    return Err(MatroidError::Malformed(format!(
                        "graph has {} edges but n = {}",
                        edges.len(),
                        spec.n
                    )));
                }
                Self::from_graph(edges)?
            }
            MatroidKind::Gf2cols => {
                let cols = spec
                    .cols
                    .as_ref()
                    .ok_or_else(|| MatroidError::Malformed("gf2cols requires \"cols\"".into()))?;
                if cols.len() != spec.n {
                    return Err(MatroidError::Malformed(format!(
                        "{} columns but n = {}",
                        cols.len(),
                        spec.n
                    )));
                }
                Self::from_gf2_columns(cols)?
            }
        };
        Ok(m.with_name(&spec.name))
    }

    /// Serializes as a basis list.
    pub fn to_spec(&self) -> MatroidSpec {
        MatroidSpec {
            name: self.name.clone(),
            n: self.n,
            kind: MatroidKind::Bases,
            sets: Some(self.bases.iter().map(|&b| bits::elements(b)).collect()),
            ..Default::default()
        }
    }

    pub fn with_name(mut self, name: &str) -> Self {
        self.name = name.to_string();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn ground_size(&self) -> usize {
        self.n
    }

    pub fn ground_mask(&self) -> u32 {
        bits::full(self.n)
    }

    /// Rank of the whole matroid.
    pub fn rank(&self) -> usize {
        self.rank_table[self.ground_mask() as usize] as usize
    }

    pub fn rank_mask(&self, a: u32) -> usize {
        self.rank_table[a as usize] as usize
    }

    pub fn rank_of(&self, a: &[usize]) -> Result<usize> {
        Ok(self.rank_mask(mask_of(a, self.n)?))
    }

    pub fn is_independent_mask(&self, a: u32) -> bool {
        self.rank_mask(a) == bits::size(a)
    }

    pub fn closure_mask(&self, a: u32) -> u32 {
        let r = self.rank_mask(a);
        let mut out = a;
        for x in 0..self.n {
            if a & (1 << x) == 0 && self.rank_mask(a | (1 << x)) == r {
                out |= 1 << x;
            }
        }
        out
    }

    pub fn closure(&self, a: &[usize]) -> Result<Vec<usize>> {
        Ok(bits::elements(self.closure_mask(mask_of(a, self.n)?)))
    }

    pub fn is_flat_mask(&self, a: u32) -> bool {
        self.closure_mask(a) == a
    }

    pub fn bases_masks(&self) -> &[u32] {
        &self.bases
    }

    pub fn circuit_masks(&self) -> &[u32] {
        &self.circuits
    }

    pub fn bases(&self) -> Vec<Vec<usize>> {
        self.bases.iter().map(|&b| bits::elements(b)).collect()
    }

    /// Minimal dependent sets, sorted by size and then lexicographically.
    pub fn circuits(&self) -> Vec<Vec<usize>> {
        self.circuits.iter().map(|&c| bits::elements(c)).collect()
    }

    pub fn cocircuits(&self) -> Vec<Vec<usize>> {
        self.dual().circuits()
    }

    /// Hyperplanes: flats of rank `r - 1`.
    pub fn hyperplane_masks(&self) -> Vec<u32> {
        let r = self.rank();
        if r == 0 {
            return Vec::new();
        }
        let mut out: Vec<u32> = (0..=self.ground_mask())
            .filter(|&a| self.rank_mask(a) == r - 1 && self.is_flat_mask(a))
            .collect();
        out.sort_by_key(|&m| bits::lex_key(m));
        out
    }

    pub fn is_loop(&self, x: usize) -> bool {
        self.rank_mask(1 << x) == 0
    }

    pub fn is_coloop(&self, x: usize) -> bool {
        self.rank_mask(self.ground_mask() & !(1 << x)) + 1 == self.rank()
    }

    pub fn dual(&self) -> Self {
        let full = self.ground_mask();
        let r = self.rank();
        let name = if self.name.is_empty() {
            String::new()
        } else if let Some(base) = self.name.strip_suffix('*') {
            base.to_string()
        } else {
            format!("{}*", self.name)
        };
        Self::from_rank_fn(name, self.n, |a| bits::size(a) + self.rank_mask(full & !a) - r)
            .expect("same ground size")
    }

    /// `M / contract \ delete`, with the remaining elements relabeled `0..` in increasing order.
    pub fn minor(&self, delete: &[usize], contract: &[usize]) -> Result<Self> {
        let d = mask_of(delete, self.n)?;
        let c = mask_of(contract, self.n)?;
        self.minor_mask(d, c)
    }

    pub fn minor_mask(&self, delete: u32, contract: u32) -> Result<Self> {
        if delete & contract != 0 {
            return Err(MatroidError::Overlap);
        }
        let keep: Vec<usize> = bits::ones(self.ground_mask() & !delete & !contract).collect();
        let rc = self.rank_mask(contract);
        let lift = |a: u32| bits::ones(a).fold(0u32, |acc, i| acc | (1 << keep[i]));
        Self::from_rank_fn(String::new(), keep.len(), |a| self.rank_mask(lift(a) | contract) - rc)
    }

    pub fn delete(&self, x: usize) -> Result<Self> {
        self.minor(&[x], &[])
    }

    pub fn contract(&self, x: usize) -> Result<Self> {
        self.minor(&[], &[x])
    }

    /// Adds a new element, the last index, in general position.
    pub fn free_extension(&self) -> Result<Self> {
        let n = self.n + 1;
        let r = self.rank();
        let new = 1u32 << self.n;
        let name = if self.name.is_empty() { String::new() } else { format!("F({})", self.name) };
        Self::from_rank_fn(name, n, |a| {
            let base = self.rank_mask(a & !new);
            if a & new != 0 {
                (base + 1).min(r)
            } else {
                base
            }
        })
    }

    /// Dual of the free extension of the dual; the new element is the last index.
    pub fn free_coextension(&self) -> Result<Self> {
        let m = self.dual().free_extension()?.dual();
        let name = if self.name.is_empty() { String::new() } else { format!("coF({})", self.name) };
        Ok(m.with_name(&name))
    }

    /// Simple: no loops and no parallel pairs.
    pub fn is_simple(&self) -> bool {
        self.circuits.iter().all(|&c| bits::size(c) >= 3)
    }

    /// Representatives kept by [`Matroid::simplify`]: the least element of every
    /// parallel class of non-loops.
    pub fn simple_representatives(&self) -> Vec<usize> {
        let mut reps: Vec<usize> = Vec::new();
        for x in 0..self.n {
            if self.is_loop(x) {
                continue;
            }
            if !reps.iter().any(|&y| self.rank_mask((1 << x) | (1 << y)) == 1) {
                reps.push(x);
            }
        }
        reps
    }

    pub fn simplify(&self) -> Self {
        let keep = bits::from_elements(&self.simple_representatives(), self.n).expect("in range");
        self.minor_mask(self.ground_mask() & !keep, 0)
            .expect("disjoint")
            .with_name(&self.name)
    }

    /// Exhaustive semimodularity/monotonicity check of the stored rank function.
    pub fn check_rank_axioms(&self) -> std::result::Result<(), String> {
        if self.rank_mask(0) != 0 {
            return Err("rank of the empty set is nonzero".into());
        }
        let full = self.ground_mask();
        for a in 0..=full {
            for x in bits::ones(full & !a) {
                let ra = self.rank_mask(a);
                let rax = self.rank_mask(a | 1 << x);
                if rax < ra || rax > ra + 1 {
                    return Err(format!("unit increase fails at {} + {x}", fmt_set(a)));
                }
                for y in bits::ones(full & !a & !(1 << x)) {
                    let ray = self.rank_mask(a | 1 << y);
                    let raxy = self.rank_mask(a | 1 << x | 1 << y);
                    if rax + ray < raxy + ra {
                        return Err(format!("submodularity fails at {} with {x},{y}", fmt_set(a)));
                    }
                }
            }
        }
        Ok(())
    }
}
