//! Lattices of flats, Möbius functions, characteristic polynomials and beta
//! invariants, plus an axiom checker for explicitly given ranked posets.

use std::collections::{HashMap, VecDeque};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits;
use crate::matroid::{Matroid, MatroidError, MAX_GROUND};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("set {0:?} is not an element of the lattice")]
    NotAFlat(Vec<usize>),
    #[error("lattice element {0} is not an atom")]
    NotAnAtom(usize),
    #[error("poset is not a geometric lattice: {0}")]
    NotGeometric(String),
    #[error("ground set of size {0} exceeds the supported maximum of {MAX_GROUND}")]
    GroundTooLarge(usize),
    #[error(transparent)]
    Matroid(#[from] MatroidError),
}

pub type Result<T> = std::result::Result<T, LatticeError>;

/// A geometric lattice whose elements are subsets of a ground set (flats),
/// ordered by inclusion. Elements are indexed by rank, then lexicographically.
pub struct GeometricLattice {
    ground: usize,
    flats: Vec<u32>,
    ranks: Vec<usize>,
    index: HashMap<u32, usize>,
    up: Vec<Vec<usize>>,
    down: Vec<Vec<usize>>,
    mobius_rows: Vec<OnceLock<Vec<i64>>>,
}

impl Clone for GeometricLattice {
    fn clone(&self) -> Self {
        Self::assemble(self.ground, self.flats.clone(), self.ranks.clone(), self.up.clone())
    }
}

impl std::fmt::Debug for GeometricLattice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GeometricLattice")
            .field("ground", &self.ground)
            .field("rank", &self.rank())
            .field("whitney", &self.whitney_numbers())
            .finish()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlatJson {
    pub rank: usize,
    pub set: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeJson {
    pub flats: Vec<FlatJson>,
    pub covers: Vec<[usize; 2]>,
}

impl GeometricLattice {
    fn assemble(ground: usize, flats: Vec<u32>, ranks: Vec<usize>, up: Vec<Vec<usize>>) -> Self {
        let index = flats.iter().enumerate().map(|(i, &f)| (f, i)).collect();
        let mut down = vec![Vec::new(); flats.len()];
        for (i, ups) in up.iter().enumerate() {
            for &j in ups {
                down[j].push(i);
            }
        }
        let mobius_rows = (0..flats.len()).map(|_| OnceLock::new()).collect();
        GeometricLattice {
            ground,
            flats,
            ranks,
            index,
            up,
            down,
            mobius_rows,
        }
    }

    /// Sorts `(flat, rank)` pairs canonically and computes the cover relation
    /// from inclusion.
    fn from_ranked_sets(ground: usize, mut items: Vec<(u32, usize)>) -> Self {
        items.sort_by(|a, b| (a.1, bits::lex_key(a.0)).cmp(&(b.1, bits::lex_key(b.0))));
        items.dedup();
        let flats: Vec<u32> = items.iter().map(|p| p.0).collect();
        let ranks: Vec<usize> = items.iter().map(|p| p.1).collect();
        let n = flats.len();
        let mut up = vec![Vec::new(); n];
        for i in 0..n {
            for j in 0..n {
                if i == j || !bits::is_subset(flats[i], flats[j]) || flats[i] == flats[j] {
                    continue;
                }
                let between = (0..n).any(|k| {
                    k != i
                        && k != j
                        && flats[k] != flats[i]
                        && flats[k] != flats[j]
                        && bits::is_subset(flats[i], flats[k])
                        && bits::is_subset(flats[k], flats[j])
                });
                if !between {
                    up[i].push(j);
                }
            }
        }
        Self::assemble(ground, flats, ranks, up)
    }

    /// The lattice of flats of a matroid.
    pub fn from_matroid(m: &Matroid) -> Result<Self> {
        let n = m.ground_size();
        if n > MAX_GROUND {
            return Err(LatticeError::GroundTooLarge(n));
        }
        let bottom = m.closure_mask(0);
        let mut seen: HashMap<u32, usize> = HashMap::new();
        seen.insert(bottom, 0);
        let mut queue = VecDeque::from([bottom]);
        let mut cover_pairs = Vec::new();
        while let Some(f) = queue.pop_front() {
            for x in bits::ones(m.ground_mask() & !f) {
                let g = m.closure_mask(f | (1 << x));
                cover_pairs.push((f, g));
                if !seen.contains_key(&g) {
                    seen.insert(g, m.rank_mask(g));
                    queue.push_back(g);
                }
            }
        }
        let mut items: Vec<(u32, usize)> = seen.keys().map(|&f| (f, m.rank_mask(f))).collect();
        items.sort_by(|a, b| (a.1, bits::lex_key(a.0)).cmp(&(b.1, bits::lex_key(b.0))));
        let flats: Vec<u32> = items.iter().map(|p| p.0).collect();
        let ranks: Vec<usize> = items.iter().map(|p| p.1).collect();
        let idx: HashMap<u32, usize> = flats.iter().enumerate().map(|(i, &f)| (f, i)).collect();
        let mut up = vec![Vec::new(); flats.len()];
        for (f, g) in cover_pairs {
            let (i, j) = (idx[&f], idx[&g]);
            if !up[i].contains(&j) {
                up[i].push(j);
            }
        }
        for u in &mut up {
            u.sort_unstable();
        }
        Ok(Self::assemble(n, flats, ranks, up))
    }

    /// A lattice given as a family of subsets of `0..ground` ordered by
    /// inclusion. Ranks are chain lengths; the geometric axioms are verified.
    pub fn from_closed_family(ground: usize, family: &[u32]) -> Result<Self> {
        if ground > 32 {
            return Err(LatticeError::GroundTooLarge(ground));
        }
        let mut sets: Vec<u32> = family.to_vec();
        sets.sort_by_key(|&s| (bits::size(s), bits::lex_key(s)));
        sets.dedup();
        // provisional ranks: longest chain from below, by inclusion
        let mut ranks = vec![0usize; sets.len()];
        for j in 0..sets.len() {
            for i in 0..j {
                if sets[i] != sets[j] && bits::is_subset(sets[i], sets[j]) {
                    ranks[j] = ranks[j].max(ranks[i] + 1);
                }
            }
        }
        let lat = Self::from_ranked_sets(ground, sets.into_iter().zip(ranks).collect());
        let report = verify_geometric(&lat.to_poset());
        if !report.passed() {
            return Err(LatticeError::NotGeometric(report.summary()));
        }
        Ok(lat)
    }

    pub fn ground_size(&self) -> usize {
        self.ground
    }

    pub fn len(&self) -> usize {
        self.flats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flats.is_empty()
    }

    pub fn flat(&self, i: usize) -> u32 {
        self.flats[i]
    }

    pub fn flats(&self) -> &[u32] {
        &self.flats
    }

    pub fn flat_elements(&self, i: usize) -> Vec<usize> {
        bits::elements(self.flats[i])
    }

    pub fn rank_of(&self, i: usize) -> usize {
        self.ranks[i]
    }

    pub fn index_of(&self, set: u32) -> Option<usize> {
        self.index.get(&set).copied()
    }

    pub fn index_of_elements(&self, set: &[usize]) -> Result<usize> {
        let mask = bits::from_elements(set, self.ground).map_err(|_| LatticeError::NotAFlat(set.to_vec()))?;
        self.index_of(mask).ok_or_else(|| LatticeError::NotAFlat(set.to_vec()))
    }

    pub fn bottom(&self) -> usize {
        0
    }

    pub fn top(&self) -> usize {
        self.flats.len() - 1
    }

    pub fn rank(&self) -> usize {
        self.ranks[self.top()]
    }

    pub fn covers_up(&self, i: usize) -> &[usize] {
        &self.up[i]
    }

    pub fn covers_down(&self, i: usize) -> &[usize] {
        &self.down[i]
    }

    pub fn leq(&self, i: usize, j: usize) -> bool {
        bits::is_subset(self.flats[i], self.flats[j])
    }

    pub fn of_rank(&self, k: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&i| self.ranks[i] == k)
    }

    pub fn atoms(&self) -> Vec<usize> {
        self.of_rank(1).collect()
    }

    pub fn coatoms(&self) -> Vec<usize> {
        match self.rank() {
            0 => Vec::new(),
            r => self.of_rank(r - 1).collect(),
        }
    }

    /// Number of elements per rank.
    pub fn whitney_numbers(&self) -> Vec<usize> {
        let mut w = vec![0; self.rank() + 1];
        for &r in &self.ranks {
            w[r] += 1;
        }
        w
    }

    /// Greatest element below both.
    pub fn meet(&self, i: usize, j: usize) -> usize {
        if let Some(k) = self.index_of(self.flats[i] & self.flats[j]) {
            return k;
        }
        (0..self.len())
            .filter(|&k| self.leq(k, i) && self.leq(k, j))
            .max_by_key(|&k| self.ranks[k])
            .expect("lattice has a bottom")
    }

    /// Least element above both.
    pub fn join(&self, i: usize, j: usize) -> usize {
        (0..self.len())
            .filter(|&k| self.leq(i, k) && self.leq(j, k))
            .min_by_key(|&k| self.ranks[k])
            .expect("lattice has a top")
    }

    /// For each element, the mask (over atom positions in [`Self::atoms`]) of atoms below it.
    pub fn atom_sets(&self) -> Vec<u32> {
        let atoms = self.atoms();
        (0..self.len())
            .map(|i| {
                atoms
                    .iter()
                    .enumerate()
                    .filter(|(_, &a)| self.leq(a, i))
                    .fold(0u32, |acc, (p, _)| acc | (1 << p))
            })
            .collect()
    }

    /// Whether two lattices agree once each element is identified with its set of atoms,
    /// atoms being matched in order.
    pub fn same_labeled(&self, other: &GeometricLattice) -> bool {
        if self.atoms().len() != other.atoms().len() || self.len() != other.len() {
            return false;
        }
        let mut a = self.atom_sets();
        let mut b = other.atom_sets();
        a.sort_unstable();
        b.sort_unstable();
        a == b
    }

    fn mobius_row(&self, x: usize) -> &Vec<i64> {
        self.mobius_rows[x].get_or_init(|| {
            let mut row = vec![0i64; self.len()];
            row[x] = 1;
            // elements are sorted by rank, so every Z < Y is finished before Y
            for y in x + 1..self.len() {
                if !self.leq(x, y) || self.flats[x] == self.flats[y] {
                    continue;
                }
                let mut s = 0i64;
                for z in x..y {
                    if row[z] != 0 && self.leq(z, y) {
                        s = s.checked_add(row[z]).expect("Möbius value overflow");
                    }
                }
                row[y] = s.checked_neg().expect("Möbius value overflow");
            }
            row
        })
    }

    /// `μ(X, Y)`, zero when `X ≰ Y`.
    pub fn mobius(&self, x: usize, y: usize) -> i64 {
        self.mobius_row(x)[y]
    }

    /// Coefficients of `p(L; t)`, leading coefficient first and constant term last.
    pub fn characteristic_polynomial(&self) -> Vec<i64> {
        let mut coeffs = vec![0i64; self.rank() + 1];
        let row = self.mobius_row(self.bottom());
        for (i, &mu) in row.iter().enumerate() {
            coeffs[self.ranks[i]] += mu;
        }
        coeffs
    }

    pub fn characteristic_at(&self, t: i64) -> i64 {
        self.characteristic_polynomial()
            .iter()
            .fold(0i64, |acc, &c| acc.checked_mul(t).and_then(|v| v.checked_add(c)).expect("overflow"))
    }

    /// `β(L) = (-1)^r Σ_X r(X) μ(0̂, X)`.
    pub fn beta_invariant(&self) -> u64 {
        let row = self.mobius_row(self.bottom());
        let s: i64 = row.iter().enumerate().map(|(i, &mu)| self.ranks[i] as i64 * mu).sum();
        let signed = if self.rank() % 2 == 0 { s } else { -s };
        u64::try_from(signed).expect("beta invariant of a geometric lattice is nonnegative")
    }

    /// Elements not above the atom `e`: the geometric semilattice `L(M, e)`.
    pub fn pointed_semilattice(&self, e: usize) -> Result<Vec<usize>> {
        if self.ranks.get(e) != Some(&1) {
            return Err(LatticeError::NotAnAtom(e));
        }
        Ok((0..self.len()).filter(|&x| !self.leq(e, x)).collect())
    }

    pub fn to_poset(&self) -> RankedPoset {
        let covers = self
            .up
            .iter()
            .enumerate()
            .flat_map(|(i, ups)| ups.iter().map(move |&j| (i, j)))
            .collect();
        RankedPoset {
            size: self.len(),
            covers,
        }
    }

    pub fn to_json(&self) -> LatticeJson {
        let poset = self.to_poset();
        LatticeJson {
            flats: (0..self.len())
                .map(|i| FlatJson {
                    rank: self.ranks[i],
                    set: self.flat_elements(i),
                })
                .collect(),
            covers: poset.covers.iter().map(|&(a, b)| [a, b]).collect(),
        }
    }

    /// Builds a lattice from a Hasse diagram; elements become atom sets.
    pub fn from_poset(poset: &RankedPoset) -> Result<Self> {
        let report = verify_geometric(poset);
        if !report.passed() {
            return Err(LatticeError::NotGeometric(report.summary()));
        }
        let order = poset.order().expect("acyclic after verification");
        let bottom = (0..poset.size).find(|&x| (0..poset.size).all(|y| order[x][y])).expect("bottom");
        let atoms: Vec<usize> = poset.covers.iter().filter(|c| c.0 == bottom).map(|c| c.1).collect();
        let mut atoms = atoms;
        atoms.sort_unstable();
        atoms.dedup();
        if atoms.len() > 32 {
            return Err(LatticeError::GroundTooLarge(atoms.len()));
        }
        let family: Vec<u32> = (0..poset.size)
            .map(|x| {
                atoms
                    .iter()
                    .enumerate()
                    .filter(|(_, &a)| order[a][x])
                    .fold(0u32, |acc, (p, _)| acc | (1 << p))
            })
            .collect();
        Self::from_closed_family(atoms.len(), &family)
    }

    /// Upper interval `[X, 1̂]` with flats written relative to `X` (elements of `X` removed).
    pub fn upper_interval(&self, x: usize) -> Result<GeometricLattice> {
        let base = self.flats[x];
        let family: Vec<u32> = (0..self.len())
            .filter(|&y| self.leq(x, y))
            .map(|y| self.flats[y] & !base)
            .collect();
        Self::from_closed_family(self.ground, &family)
    }
}

/// Pointed geometric lattice `(L, e)` with `e` an atom.
#[derive(Clone, Debug)]
pub struct PointedLattice {
    pub lattice: GeometricLattice,
    pub e: usize,
}

impl PointedLattice {
    pub fn new(lattice: GeometricLattice, e: usize) -> Result<Self> {
        if lattice.ranks.get(e) != Some(&1) {
            return Err(LatticeError::NotAnAtom(e));
        }
        Ok(PointedLattice { lattice, e })
    }

    /// `L(M)` pointed at the atom `cl({element})`.
    pub fn from_matroid(m: &Matroid, element: usize) -> Result<Self> {
        if element >= m.ground_size() {
            return Err(MatroidError::IndexOutOfRange {
                element,
                n: m.ground_size(),
            }
            .into());
        }
        let lattice = GeometricLattice::from_matroid(m)?;
        let flat = m.closure_mask(1 << element);
        let idx = lattice.index_of(flat).expect("closure is a flat");
        Self::new(lattice, idx)
    }

    pub fn semilattice(&self) -> Vec<usize> {
        self.lattice.pointed_semilattice(self.e).expect("e is an atom")
    }
}

/// Matroid on the atoms of `L` (in index order) with independent sets
/// `{A : r(∨A) = |A|}`.
pub fn matroid_from_lattice(l: &GeometricLattice) -> Result<Matroid> {
    let atoms = l.atoms();
    if atoms.len() > MAX_GROUND {
        return Err(LatticeError::GroundTooLarge(atoms.len()));
    }
    let sets = l.atom_sets();
    let rank_of_join = |a: u32| -> usize {
        (0..l.len())
            .filter(|&i| bits::is_subset(a, sets[i]))
            .map(|i| l.rank_of(i))
            .min()
            .expect("top contains every atom")
    };
    Ok(Matroid::from_rank_function(atoms.len(), rank_of_join)?)
}

/// A finite poset given by its Hasse diagram.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankedPoset {
    pub size: usize,
    pub covers: Vec<(usize, usize)>,
}

impl RankedPoset {
    /// Reflexive-transitive closure, or a witness element on a cycle.
    pub fn order(&self) -> std::result::Result<Vec<Vec<bool>>, usize> {
        let n = self.size;
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in &self.covers {
            adj[a].push(b);
        }
        let mut leq = vec![vec![false; n]; n];
        for s in 0..n {
            let mut stack = vec![s];
            leq[s][s] = true;
            while let Some(v) = stack.pop() {
                for &w in &adj[v] {
                    if w == s {
                        return Err(s);
                    }
                    if !leq[s][w] {
                        leq[s][w] = true;
                        stack.push(w);
                    }
                }
            }
        }
        Ok(leq)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxiomCheck {
    pub axiom: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

impl AxiomCheck {
    fn pass(axiom: &str) -> Self {
        AxiomCheck {
            axiom: axiom.into(),
            passed: true,
            witness: None,
        }
    }

    fn fail(axiom: &str, witness: String) -> Self {
        AxiomCheck {
            axiom: axiom.into(),
            passed: false,
            witness: Some(witness),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeometricReport {
    pub checks: Vec<AxiomCheck>,
}

impl GeometricReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, axiom: &str) -> Option<&AxiomCheck> {
        self.checks.iter().find(|c| c.axiom == axiom)
    }

    pub fn summary(&self) -> String {
        self.checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| format!("{}: {}", c.axiom, c.witness.as_deref().unwrap_or("")))
            .collect::<Vec<_>>()
            .join("; ")
    }
}

/// Checks the lattice, graded, atomic and semimodular axioms on a Hasse diagram.
pub fn verify_geometric(poset: &RankedPoset) -> GeometricReport {
    let n = poset.size;
    let mut checks = Vec::new();
    if let Some(&(a, b)) = poset.covers.iter().find(|c| c.0 >= n || c.1 >= n) {
        checks.push(AxiomCheck::fail("lattice", format!("cover ({a},{b}) out of range")));
        return GeometricReport { checks };
    }
    if n == 0 {
        checks.push(AxiomCheck::fail("lattice", "empty poset".into()));
        return GeometricReport { checks };
    }
    let leq = match poset.order() {
        Ok(o) => o,
        Err(x) => {
            checks.push(AxiomCheck::fail("lattice", format!("element {x} lies on a cycle")));
            return GeometricReport { checks };
        }
    };
    let bound = |pick_upper: bool, x: usize, y: usize| -> Option<usize> {
        let cands: Vec<usize> = (0..n)
            .filter(|&z| if pick_upper { leq[x][z] && leq[y][z] } else { leq[z][x] && leq[z][y] })
            .collect();
        cands
            .iter()
            .copied()
            .find(|&z| cands.iter().all(|&w| if pick_upper { leq[z][w] } else { leq[w][z] }))
    };
    let mut lattice_fail = None;
    'outer: for x in 0..n {
        for y in x + 1..n {
            if bound(true, x, y).is_none() {
                lattice_fail = Some(format!("elements {x},{y} have no least upper bound"));
                break 'outer;
            }
            if bound(false, x, y).is_none() {
                lattice_fail = Some(format!("elements {x},{y} have no greatest lower bound"));
                break 'outer;
            }
        }
    }
    if let Some(w) = lattice_fail {
        checks.push(AxiomCheck::fail("lattice", w));
        return GeometricReport { checks };
    }
    checks.push(AxiomCheck::pass("lattice"));
    let join = |x: usize, y: usize| bound(true, x, y).expect("lattice");
    let meet = |x: usize, y: usize| bound(false, x, y).expect("lattice");
    let bottom = (0..n).find(|&x| (0..n).all(|y| leq[x][y])).expect("lattice has a bottom");

    // rank = longest chain from the bottom
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&x| (0..n).filter(|&y| leq[y][x]).count());
    let mut rank = vec![0usize; n];
    for &x in &order {
        for &(a, b) in &poset.covers {
            if b == x {
                rank[x] = rank[x].max(rank[a] + 1);
            }
        }
    }
    match poset.covers.iter().find(|&&(a, b)| rank[b] != rank[a] + 1) {
        Some(&(a, b)) => checks.push(AxiomCheck::fail(
            "graded",
            format!("cover {a} < {b} jumps from rank {} to {}", rank[a], rank[b]),
        )),
        None => checks.push(AxiomCheck::pass("graded")),
    }
    let non_covers = poset.covers.iter().find(|&&(a, b)| {
        (0..n).any(|z| z != a && z != b && leq[a][z] && leq[z][b]) || a == b
    });
    if let Some(&(a, b)) = non_covers {
        checks.push(AxiomCheck::fail("hasse", format!("pair ({a},{b}) is not a cover")));
    }

    let atoms: Vec<usize> = (0..n).filter(|&x| x != bottom && rank[x] == 1).collect();
    let atomic_fail = (0..n).filter(|&x| x != bottom).find(|&x| {
        let j = atoms.iter().filter(|&&a| leq[a][x]).fold(bottom, |acc, &a| join(acc, a));
        j != x
    });
    match atomic_fail {
        Some(x) => checks.push(AxiomCheck::fail(
            "atomic",
            format!("element {x} is not the join of the atoms below it"),
        )),
        None => checks.push(AxiomCheck::pass("atomic")),
    }
    let mut semi = None;
    'semi: for x in 0..n {
        for y in x + 1..n {
            if rank[x] + rank[y] < rank[meet(x, y)] + rank[join(x, y)] {
                semi = Some(format!("r({x}) + r({y}) < r(meet) + r(join)"));
                break 'semi;
            }
        }
    }
    match semi {
        Some(w) => checks.push(AxiomCheck::fail("semimodular", w)),
        None => checks.push(AxiomCheck::pass("semimodular")),
    }
    GeometricReport { checks }
}
