//! Constructive realization of pointed geometric lattices of rank at most 3
//! as fully partitioned arrangements of homology spheres.
//!
//! Vertices are `x{i}` and `y{i}` for the `i`-th coatom (1-based, coatoms
//! through the distinguished atom first). The `x` side is built as a
//! contractible complex `D`; the ambient sphere is `D` glued to its mirror
//! image along the distinguished sphere, and the involution swaps `x` and `y`.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use num_traits::One;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arrangement::{ArrangementError, ArrangementJson, SphereArrangement};
use crate::cw::{CellSet, CwComplex, CwError};
use crate::homology::{smith_invariants, IntMatrix, Ring};
use crate::lattice::PointedLattice;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BuildError {
    #[error("rank {0} lattices are not supported by the builder (ranks 1 to 3 are)")]
    RankUnsupported(usize),
    #[error(transparent)]
    Cw(#[from] CwError),
    #[error(transparent)]
    Arrangement(#[from] ArrangementError),
    #[error("complex is not connected")]
    NotConnected,
    #[error("complex has nonzero second homology")]
    H2NonZero,
    #[error("first homology has torsion that attached cells cannot remove")]
    H1Torsion,
    #[error("no admissible closed walks complete a basis of first homology")]
    NoCycleBasis,
    #[error("edge {0:?} does not have boundary (head) - (tail)")]
    NonstandardEdge(String),
    #[error("bad pairing: {0}")]
    BadPairing(String),
    #[error("construction check failed: {0}")]
    ConstructionCheckFailed(String),
}

pub type Result<T> = std::result::Result<T, BuildError>;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Policy {
    #[default]
    Lex,
    Seeded,
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Policy::Lex => "lex",
            Policy::Seeded => "seeded",
        })
    }
}

impl FromStr for Policy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "lex" => Ok(Policy::Lex),
            "seeded" => Ok(Policy::Seeded),
            _ => Err(format!("unknown policy {s:?} (expected lex or seeded)")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct BuildPlan {
    pub lattice: PointedLattice,
    pub seed: u64,
    pub policy: Policy,
}

impl BuildPlan {
    pub fn new(lattice: PointedLattice) -> Self {
        BuildPlan {
            lattice,
            seed: 0,
            policy: Policy::Lex,
        }
    }

    pub fn with_policy(mut self, policy: Policy, seed: u64) -> Self {
        self.policy = policy;
        self.seed = seed;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanJson {
    pub rank: usize,
    /// Position of the distinguished atom among the atoms.
    pub e: usize,
    pub policy: Policy,
    pub seed: u64,
    /// Atom positions on each coatom, in vertex order.
    pub coatoms: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub plan: PlanJson,
    pub trees: BTreeMap<String, Vec<String>>,
    pub attached_walks: Vec<Vec<String>>,
}

#[derive(Clone, Debug)]
pub struct Built {
    pub arrangement: SphereArrangement,
    pub provenance: Provenance,
}

impl Built {
    pub fn to_json(&self) -> ArrangementJson {
        let mut j = self.arrangement.to_json();
        j.provenance = Some(serde_json::to_value(&self.provenance).expect("provenance serializes"));
        j
    }
}

/// Exchanges the letters `x` and `y` in a cell id.
pub fn swap_xy(id: &str) -> String {
    id.chars()
        .map(|c| match c {
            'x' => 'y',
            'y' => 'x',
            c => c,
        })
        .collect()
}

/// Copy of `k` with every cell renamed; boundary coefficients are carried over unchanged.
pub fn mirror(k: &CwComplex, rename: &dyn Fn(&str) -> String) -> Result<CwComplex> {
    let mut seen = HashSet::new();
    for c in k.cells() {
        let r = rename(&c.id);
        if rename(&r) != c.id {
            return Err(BuildError::BadPairing(format!("renaming is not an involution at {:?}", c.id)));
        }
        if !seen.insert(r) {
            return Err(BuildError::BadPairing(format!("two cells renamed to the image of {:?}", c.id)));
        }
    }
    let mut out = CwComplex::new();
    for c in k.cells() {
        let b: Vec<(String, i64)> = c.boundary.iter().map(|&(f, v)| (rename(k.id(f)), v)).collect();
        let b: Vec<(&str, i64)> = b.iter().map(|(s, v)| (s.as_str(), *v)).collect();
        out.add_cell(&rename(&c.id), c.dim, &b)?;
    }
    Ok(out)
}

/// `D ∪ mirror(D)` with cells of the same id identified, and the swapping involution.
fn glue_with_mirror(d: &CwComplex) -> Result<(CwComplex, Vec<usize>)> {
    let m = mirror(d, &swap_xy)?;
    let mut s = d.clone();
    for c in m.cells() {
        let b: Vec<(String, i64)> = c.boundary.iter().map(|&(f, v)| (m.id(f).to_string(), v)).collect();
        match s.index(&c.id) {
            Some(i) => {
                let mut have: Vec<(String, i64)> =
                    s.cell(i).boundary.iter().map(|&(f, v)| (s.id(f).to_string(), v)).collect();
                let mut want = b.clone();
                have.sort();
                want.sort();
                if have != want {
                    return Err(BuildError::BadPairing(format!("shared cell {:?} differs from its mirror", c.id)));
                }
            }
            None => {
                let b: Vec<(&str, i64)> = b.iter().map(|(s, v)| (s.as_str(), *v)).collect();
                s.add_cell(&c.id, c.dim, &b)?;
            }
        }
    }
    let inv = (0..s.len())
        .map(|i| s.index(&swap_xy(s.id(i))).expect("mirror image present"))
        .collect();
    Ok((s, inv))
}

/// Options for [`attach_cells_to_kill_h1`].
pub struct AttachOptions<'a> {
    /// New 2-cells are named `{prefix}{first_index}`, `{prefix}{first_index + 1}`, ...
    pub prefix: &'a str,
    pub first_index: usize,
    /// Edges offered first to the spanning tree.
    pub tree_order: Vec<usize>,
    /// Rejects closed walks by their vertex set.
    pub forbidden: Option<&'a dyn Fn(&CellSet) -> bool>,
}

impl Default for AttachOptions<'_> {
    fn default() -> Self {
        AttachOptions {
            prefix: "f",
            first_index: 1,
            tree_order: Vec::new(),
            forbidden: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Attached {
    pub complex: CwComplex,
    /// Edge ids of the spanning tree used first.
    pub tree: Vec<String>,
    /// Edge ids of each attached walk, in traversal order.
    pub walks: Vec<Vec<String>>,
}

struct Graph {
    /// `(edge cell, tail vertex, head vertex)`
    edges: Vec<(usize, usize, usize)>,
    adj: HashMap<usize, Vec<usize>>,
    verts: Vec<usize>,
}

impl Graph {
    fn of(k: &CwComplex) -> Result<Graph> {
        let verts: Vec<usize> = (0..k.len()).filter(|&i| k.cell(i).dim == 0).collect();
        let mut edges = Vec::new();
        let mut adj: HashMap<usize, Vec<usize>> = verts.iter().map(|&v| (v, Vec::new())).collect();
        for i in 0..k.len() {
            let c = k.cell(i);
            if c.dim != 1 {
                continue;
            }
            let (t, h) = match c.boundary.as_slice() {
                [(a, -1), (b, 1)] => (*a, *b),
                [(a, 1), (b, -1)] => (*b, *a),
                [(a, 0)] => (*a, *a),
                _ => return Err(BuildError::NonstandardEdge(c.id.clone())),
            };
            let slot = edges.len();
            edges.push((i, t, h));
            adj.get_mut(&t).unwrap().push(slot);
            if h != t {
                adj.get_mut(&h).unwrap().push(slot);
            }
        }
        Ok(Graph { edges, adj, verts })
    }

    /// Spanning tree grown by Kruskal over the given slot order.
    fn kruskal(&self, order: &[usize]) -> Vec<usize> {
        let pos: HashMap<usize, usize> = self.verts.iter().enumerate().map(|(p, &v)| (v, p)).collect();
        let mut parent: Vec<usize> = (0..self.verts.len()).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        let mut tree = Vec::new();
        for &s in order {
            let (_, t, h) = self.edges[s];
            let (a, b) = (find(&mut parent, pos[&t]), find(&mut parent, pos[&h]));
            if a != b {
                parent[a] = b;
                tree.push(s);
            }
        }
        tree
    }

    fn bfs_tree(&self, root: usize) -> Vec<usize> {
        let mut seen = HashSet::from([root]);
        let mut queue = VecDeque::from([root]);
        let mut tree = Vec::new();
        while let Some(v) = queue.pop_front() {
            for &s in &self.adj[&v] {
                let (_, t, h) = self.edges[s];
                let w = if t == v { h } else { t };
                if seen.insert(w) {
                    tree.push(s);
                    queue.push_back(w);
                }
            }
        }
        tree
    }

    /// Closed walks `(slot, sign)` closing each non-tree edge through the tree.
    fn fundamental_cycles(&self, tree: &[usize]) -> Vec<Vec<(usize, i64)>> {
        let in_tree: HashSet<usize> = tree.iter().copied().collect();
        let root = self.verts[0];
        // parent edge and depth from a traversal of the tree
        let mut up: HashMap<usize, (usize, usize)> = HashMap::new();
        let mut depth: HashMap<usize, usize> = HashMap::from([(root, 0)]);
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for &s in &self.adj[&v] {
                if !in_tree.contains(&s) {
                    continue;
                }
                let (_, t, h) = self.edges[s];
                let w = if t == v { h } else { t };
                if !depth.contains_key(&w) {
                    depth.insert(w, depth[&v] + 1);
                    up.insert(w, (v, s));
                    queue.push_back(w);
                }
            }
        }
        let step = |from: usize, s: usize| -> (usize, i64) {
            let (_, t, _) = self.edges[s];
            (s, if t == from { 1 } else { -1 })
        };
        let mut out = Vec::new();
        for s in 0..self.edges.len() {
            if in_tree.contains(&s) {
                continue;
            }
            let (_, t, h) = self.edges[s];
            // walk t -> h along s, then back from h to t through the tree
            let (mut a, mut b) = (h, t);
            let mut from_h = Vec::new();
            let mut to_t = Vec::new();
            while a != b {
                if depth[&a] >= depth[&b] {
                    let (p, e) = up[&a];
                    from_h.push(step(a, e));
                    a = p;
                } else {
                    let (p, e) = up[&b];
                    to_t.push(step(p, e));
                    b = p;
                }
            }
            let mut walk = vec![(s, 1)];
            walk.extend(from_h);
            walk.extend(to_t.into_iter().rev());
            out.push(walk);
        }
        out
    }
}

/// Attaches 2-cells along closed edge walks whose classes complete a ℤ-basis
/// of the first homology, making a connected complex with `H_2 = 0` acyclic.
pub fn attach_cells_to_kill_h1(k: &CwComplex, opts: &AttachOptions) -> Result<Attached> {
    let all = k.all();
    if k.components(&all).len() != 1 {
        return Err(BuildError::NotConnected);
    }
    if k.dimension() > 2 || k.homology(&all, Ring::Z).betti(2) != 0 {
        return Err(BuildError::H2NonZero);
    }
    let g = Graph::of(k)?;
    let col_of: HashMap<usize, usize> = g.edges.iter().enumerate().map(|(s, e)| (e.0, s)).collect();
    let mut rows: Vec<Vec<i64>> = Vec::new();
    for c in k.cells().iter().filter(|c| c.dim == 2) {
        let mut r = vec![0i64; g.edges.len()];
        for &(f, v) in &c.boundary {
            r[col_of[&f]] += v;
        }
        rows.push(r);
    }
    let target = g.edges.len() + 1 - g.verts.len();
    let saturated = |rows: &[Vec<i64>]| -> bool {
        if rows.is_empty() {
            return true;
        }
        let inv = smith_invariants(&IntMatrix::from_rows(rows.to_vec()));
        inv.len() == rows.len() && inv.iter().all(|d| d.is_one())
    };
    if !saturated(&rows) {
        return Err(BuildError::H1Torsion);
    }
    let mut order: Vec<usize> = opts.tree_order.iter().filter_map(|e| col_of.get(e).copied()).collect();
    let listed: HashSet<usize> = order.iter().copied().collect();
    order.extend((0..g.edges.len()).filter(|s| !listed.contains(s)));
    let first_tree = g.kruskal(&order);
    let mut trees = vec![first_tree.clone()];
    trees.extend(g.verts.iter().map(|&v| g.bfs_tree(v)));

    let mut out = k.clone();
    let mut walks = Vec::new();
    let mut seen: HashSet<Vec<i64>> = HashSet::new();
    'trees: for tree in &trees {
        for walk in g.fundamental_cycles(tree) {
            if rows.len() >= target {
                break 'trees;
            }
            let mut vec = vec![0i64; g.edges.len()];
            let mut vset = CellSet::new();
            for &(s, sign) in &walk {
                vec[s] += sign;
                vset.insert(g.edges[s].1);
                vset.insert(g.edges[s].2);
            }
            if !seen.insert(vec.clone()) || opts.forbidden.is_some_and(|f| f(&vset)) {
                continue;
            }
            rows.push(vec);
            if !saturated(&rows) {
                rows.pop();
                continue;
            }
            let boundary: Vec<(usize, i64)> = rows
                .last()
                .unwrap()
                .iter()
                .enumerate()
                .filter(|&(_, &v)| v != 0)
                .map(|(s, &v)| (g.edges[s].0, v))
                .collect();
            let id = format!("{}{}", opts.prefix, opts.first_index + walks.len());
            out.push_cell(id, 2, boundary)?;
            walks.push(walk.iter().map(|&(s, _)| k.id(g.edges[s].0).to_string()).collect());
        }
    }
    if rows.len() < target {
        return Err(BuildError::NoCycleBasis);
    }
    Ok(Attached {
        complex: out,
        tree: first_tree.iter().map(|&s| k.id(g.edges[s].0).to_string()).collect(),
        walks,
    })
}

/// Coatoms and atoms of the plan's lattice in builder order.
struct Layout {
    rank: usize,
    /// Lattice indices of the atoms; position `e` is the distinguished one.
    e: usize,
    natoms: usize,
    /// Atom-position masks of the coatoms, those containing `e` first.
    coatoms: Vec<u32>,
    /// Number of coatoms containing `e`.
    through_e: usize,
}

impl Layout {
    fn of(pl: &PointedLattice) -> Layout {
        let l = &pl.lattice;
        let atoms = l.atoms();
        let e = atoms.iter().position(|&a| a == pl.e).expect("e is an atom");
        let sets = l.atom_sets();
        let (mut with, without): (Vec<u32>, Vec<u32>) = l
            .coatoms()
            .into_iter()
            .map(|c| sets[c])
            .partition(|&m| m & (1 << e) != 0);
        let through_e = with.len();
        with.extend(without);
        Layout {
            rank: l.rank(),
            e,
            natoms: atoms.len(),
            coatoms: with,
            through_e,
        }
    }

    /// Sphere order: `e` first, then the other atoms in order.
    fn sphere_atoms(&self) -> Vec<usize> {
        std::iter::once(self.e)
            .chain((0..self.natoms).filter(|&a| a != self.e))
            .collect()
    }

    fn on(&self, coatom: usize, atom: usize) -> bool {
        self.coatoms[coatom] & (1 << atom) != 0
    }
}

fn x(i: usize) -> String {
    format!("x{}", i + 1)
}

fn y(i: usize) -> String {
    format!("y{}", i + 1)
}

fn add_edge(k: &mut CwComplex, u: &str, v: &str) -> Result<String> {
    if k.index(&format!("{v}~{u}")).is_some() {
        return Err(BuildError::ConstructionCheckFailed(format!("edge {u}~{v} requested twice")));
    }
    let id = format!("{u}~{v}");
    k.add_cell(&id, 1, &[(u, -1), (v, 1)])?;
    Ok(id)
}

struct Chooser {
    policy: Policy,
    rng: ChaCha8Rng,
}

impl Chooser {
    /// Edges of a tree on the given vertices.
    fn tree(&mut self, verts: &[String]) -> Vec<(String, String)> {
        match self.policy {
            Policy::Lex => verts.windows(2).map(|w| (w[0].clone(), w[1].clone())).collect(),
            Policy::Seeded => {
                let mut pairs: Vec<(usize, usize)> = (0..verts.len())
                    .flat_map(|a| (a + 1..verts.len()).map(move |b| (a, b)))
                    .collect();
                pairs.shuffle(&mut self.rng);
                let mut comp: Vec<usize> = (0..verts.len()).collect();
                let mut out = Vec::new();
                for (a, b) in pairs {
                    let (ca, cb) = (comp[a], comp[b]);
                    if ca != cb {
                        comp.iter_mut().filter(|c| **c == cb).for_each(|c| *c = ca);
                        out.push((verts[a].clone(), verts[b].clone()));
                    }
                }
                out
            }
        }
    }

    /// Index into a list of `n`, the lex choice being `lex`.
    fn pick(&mut self, n: usize, lex: usize) -> usize {
        match self.policy {
            Policy::Lex => lex,
            Policy::Seeded => self.rng.gen_range(0..n),
        }
    }

    fn order<T>(&mut self, items: &mut [T]) {
        if self.policy == Policy::Seeded {
            items.shuffle(&mut self.rng);
        }
    }
}

/// Edges of the `x` side of a circle on the coatoms `idx` (first one distinguished):
/// a tree on the remaining `x` vertices plus one edge each from the distinguished `x` and `y`.
fn circle_half(k: &mut CwComplex, idx: &[usize], ch: &mut Chooser) -> Result<(Vec<String>, Vec<String>)> {
    let rest: Vec<String> = idx[1..].iter().map(|&i| x(i)).collect();
    let mut db = Vec::new();
    for (u, v) in ch.tree(&rest) {
        db.push(add_edge(k, &u, &v)?);
    }
    let a = ch.pick(rest.len(), 0);
    let b = ch.pick(rest.len(), rest.len() - 1);
    let extra = vec![
        add_edge(k, &x(idx[0]), &rest[a])?,
        add_edge(k, &rest[b], &y(idx[0]))?,
    ];
    Ok((db, extra))
}

/// Builds the arrangement and runs the postcondition suite on it.
pub fn build(plan: &BuildPlan) -> Result<Built> {
    let layout = Layout::of(&plan.lattice);
    let mut ch = Chooser {
        policy: plan.policy,
        rng: ChaCha8Rng::seed_from_u64(plan.seed),
    };
    let mut trees = BTreeMap::new();
    let mut walks = Vec::new();
    let d = match layout.rank {
        1 => {
            let mut d = CwComplex::new();
            d.add_cell(&x(0), 0, &[])?;
            d.add_cell(&y(0), 0, &[])?;
            d
        }
        2 => {
            let mut d = CwComplex::new();
            let m = layout.coatoms.len();
            for i in 0..m {
                d.add_cell(&x(i), 0, &[])?;
            }
            d.add_cell(&y(0), 0, &[])?;
            let idx: Vec<usize> = (0..m).collect();
            let (db, extra) = circle_half(&mut d, &idx, &mut ch)?;
            trees.insert("D_b".to_string(), db.clone());
            trees.insert("D".to_string(), db.into_iter().chain(extra).collect());
            d
        }
        3 => build_rank3_half(&layout, &mut ch, &mut trees, &mut walks)?,
        r => return Err(BuildError::RankUnsupported(r)),
    };
    let (s, inv) = glue_with_mirror(&d)?;
    let verts_of = |atom: usize| -> CellSet {
        (0..layout.coatoms.len())
            .filter(|&c| layout.on(c, atom))
            .flat_map(|c| [x(c), y(c)])
            .map(|id| s.index(&id).expect("vertex"))
            .collect()
    };
    let spheres: Vec<(usize, CellSet)> = layout
        .sphere_atoms()
        .into_iter()
        .map(|a| (a, s.induced(&verts_of(a))))
        .collect();
    let spheres = if layout.rank == 1 {
        vec![(layout.e, CellSet::new())]
    } else {
        spheres
    };
    let arrangement = SphereArrangement::new(s, spheres, Some(inv))?;
    let provenance = Provenance {
        plan: PlanJson {
            rank: layout.rank,
            e: layout.e,
            policy: plan.policy,
            seed: plan.seed,
            coatoms: layout.coatoms.iter().map(|&m| crate::bits::elements(m)).collect(),
        },
        trees,
        attached_walks: walks,
    };
    let built = Built {
        arrangement,
        provenance,
    };
    let report = postconditions(&plan.lattice, &built.arrangement);
    if !report.passed {
        return Err(BuildError::ConstructionCheckFailed(report.failures.join("; ")));
    }
    Ok(built)
}

fn build_rank3_half(
    layout: &Layout,
    ch: &mut Chooser,
    trees: &mut BTreeMap<String, Vec<String>>,
    walks: &mut Vec<Vec<String>>,
) -> Result<CwComplex> {
    let m = layout.coatoms.len();
    let k = layout.through_e;
    let mut d = CwComplex::new();
    for i in 0..m {
        d.add_cell(&x(i), 0, &[])?;
    }
    for i in 0..k {
        d.add_cell(&y(i), 0, &[])?;
    }
    // the distinguished circle, both halves
    let idx: Vec<usize> = (0..k).collect();
    let (db1, extra1) = circle_half(&mut d, &idx, ch)?;
    let mut s1_edges: Vec<String> = db1.iter().chain(&extra1).cloned().collect();
    for id in s1_edges.clone() {
        let c = d.index(&id).unwrap();
        let ends: Vec<String> = d.cell(c).boundary.iter().map(|&(f, _)| d.id(f).to_string()).collect();
        let (tail, head) = if d.cell(c).boundary[0].1 < 0 {
            (&ends[0], &ends[1])
        } else {
            (&ends[1], &ends[0])
        };
        s1_edges.push(add_edge(&mut d, &swap_xy(tail), &swap_xy(head))?);
    }
    trees.insert("S_1".to_string(), s1_edges.clone());

    let mut tree_edges = Vec::new();
    let mut leaf_edges = Vec::new();
    for atom in layout.sphere_atoms().into_iter().skip(1) {
        let join = (0..k)
            .find(|&c| layout.on(c, atom))
            .ok_or_else(|| BuildError::ConstructionCheckFailed(format!("no coatom joins e and atom {atom}")))?;
        let tj: Vec<String> = (k..m).filter(|&c| layout.on(c, atom)).map(x).collect();
        if tj.is_empty() {
            return Err(BuildError::ConstructionCheckFailed(format!("atom {atom} lies on a single coatom")));
        }
        let mut vj = Vec::new();
        for (u, v) in ch.tree(&tj) {
            let id = add_edge(&mut d, &u, &v)?;
            tree_edges.push(id.clone());
            vj.push(id);
        }
        let a = ch.pick(tj.len(), 0);
        let b = ch.pick(tj.len(), tj.len() - 1);
        for id in [add_edge(&mut d, &x(join), &tj[a])?, add_edge(&mut d, &y(join), &tj[b])?] {
            leaf_edges.push(id.clone());
            vj.push(id);
        }
        trees.insert(format!("V_{atom}"), vj);
    }

    // contractible D_b over the graph on the coatoms avoiding e
    let vb_verts: CellSet = (k..m).map(|c| d.index(&x(c)).unwrap()).collect();
    let vb = d.induced(&vb_verts);
    let vb_complex = d.extract(&vb)?;
    let mut order: Vec<usize> = tree_edges.iter().filter_map(|id| vb_complex.index(id)).collect();
    ch.order(&mut order);
    let db = attach_cells_to_kill_h1(
        &vb_complex,
        &AttachOptions {
            prefix: "fx",
            first_index: 1,
            tree_order: order,
            forbidden: None,
        },
    )?;
    trees.insert("D_b".to_string(), db.tree.clone());
    for c in db.complex.cells().iter().filter(|c| c.dim == 2) {
        let b: Vec<(&str, i64)> = c.boundary.iter().map(|&(f, v)| (db.complex.id(f), v)).collect();
        d.add_cell(&c.id, 2, &b)?;
    }
    walks.extend(db.walks.iter().cloned());

    // vertex sets (x side) that no further 2-cell may lie inside
    let mut blocked: Vec<CellSet> = vec![vb_verts.clone()];
    for atom in layout.sphere_atoms() {
        let mut s = CellSet::new();
        for c in 0..m {
            if layout.on(c, atom) {
                s.insert(d.index(&x(c)).unwrap());
                if let Some(i) = d.index(&y(c)) {
                    s.insert(i);
                }
            }
        }
        blocked.push(s);
    }
    let forbidden = |v: &CellSet| blocked.iter().any(|b| v.is_subset(b));
    let mut groups = [
        db.tree.iter().filter_map(|id| d.index(id)).collect::<Vec<_>>(),
        leaf_edges.iter().filter_map(|id| d.index(id)).collect(),
        s1_edges.iter().filter_map(|id| d.index(id)).collect(),
    ];
    for g in &mut groups[1..] {
        ch.order(g);
    }
    let full = attach_cells_to_kill_h1(
        &d,
        &AttachOptions {
            prefix: "fx",
            first_index: db.walks.len() + 1,
            tree_order: groups.concat(),
            forbidden: Some(&forbidden),
        },
    )?;
    trees.insert("D".to_string(), full.tree.clone());
    walks.extend(full.walks.iter().cloned());
    Ok(full.complex)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PostconditionReport {
    pub ambient_sphere: bool,
    pub chain_complex: bool,
    pub flats_are_spheres: bool,
    pub pointed_isomorphism: bool,
    pub coatom_correspondence: bool,
    pub essential: bool,
    pub fully_partitioned: bool,
    pub regular_wrt_s1: bool,
    pub involution: bool,
    pub bounded_top_cells: bool,
    pub failures: Vec<String>,
    pub passed: bool,
}

/// Checks a built arrangement against its pointed lattice.
pub fn postconditions(pl: &PointedLattice, arr: &SphereArrangement) -> PostconditionReport {
    let mut rep = PostconditionReport {
        ambient_sphere: false,
        chain_complex: arr.ambient.verify_chain_complex().passed,
        flats_are_spheres: false,
        pointed_isomorphism: false,
        coatom_correspondence: false,
        essential: false,
        fully_partitioned: false,
        regular_wrt_s1: false,
        involution: false,
        bounded_top_cells: false,
        failures: Vec::new(),
        passed: false,
    };
    let l = &pl.lattice;
    let r = l.rank() as i64;
    rep.ambient_sphere = arr.ambient_dimension().ok() == Some(r - 1);
    let il = match arr.intersection_lattice() {
        Ok(il) => il,
        Err(e) => {
            rep.failures.push(e.to_string());
            return rep;
        }
    };
    rep.flats_are_spheres = il.d == r - 1;
    let layout = Layout::of(pl);
    // element of L(𝒜) as a mask over atom positions
    let relabel = |mask: u32| -> u32 {
        crate::bits::elements(mask)
            .into_iter()
            .fold(0u32, |acc, j| acc | (1 << arr.atoms[j]))
    };
    let mut mine: Vec<u32> = (0..il.lattice.len()).map(|x| relabel(il.lattice.flat(x))).collect();
    let mut theirs = l.atom_sets();
    mine.sort_unstable();
    theirs.sort_unstable();
    rep.pointed_isomorphism = mine == theirs && arr.atoms.first() == Some(&layout.e);
    let atom_sets = l.atom_sets();
    rep.coatom_correspondence = (0..l.len()).all(|f| {
        let verts: CellSet = (0..layout.coatoms.len())
            .filter(|&c| atom_sets[f] & !layout.coatoms[c] == 0)
            .flat_map(|c| [x(c), y(c)])
            .filter_map(|id| arr.ambient.index(&id))
            .collect();
        let induced = arr.ambient.induced(&verts);
        let spheres_mask = (0..arr.spheres.len())
            .filter(|&j| atom_sets[f] & (1 << arr.atoms[j]) != 0)
            .fold(0u32, |acc, j| acc | (1 << j));
        let expected = match il.lattice.index_of(spheres_mask) {
            Some(i) => &il.subcomplexes[i],
            None => return false,
        };
        *expected == induced || (layout.rank == 1 && f == l.top())
    });
    let av = arr.verify(&il);
    rep.essential = av.essential;
    rep.fully_partitioned = av.fully_partitioned;
    rep.regular_wrt_s1 = av.regular_wrt(0);
    rep.involution = av
        .involution
        .as_ref()
        .is_some_and(|i| i.passed && i.fixes_each_sphere);
    rep.bounded_top_cells = arr
        .bounded_counts(&il, 0)
        .is_ok_and(|b| b.components.iter().all(|c| c.top_cells as u64 == b.beta));
    let checks = [
        ("ambient is a homology sphere of dimension r-1", rep.ambient_sphere),
        ("boundary of a boundary vanishes", rep.chain_complex),
        ("intersections are spheres of the right dimension", rep.flats_are_spheres),
        ("intersection lattice matches the pointed lattice", rep.pointed_isomorphism),
        ("coatom correspondence", rep.coatom_correspondence),
        ("essential", rep.essential),
        ("fully partitioned", rep.fully_partitioned),
        ("regular with respect to the first sphere", rep.regular_wrt_s1),
        ("involution", rep.involution),
        ("bounded top cells equal beta", rep.bounded_top_cells),
    ];
    rep.failures = checks.iter().filter(|c| !c.1).map(|c| c.0.to_string()).collect();
    rep.passed = rep.failures.is_empty();
    rep
}
