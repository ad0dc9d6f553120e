//! Steiner ideals, labeled cell complexes and their cellular resolutions,
//! with Betti numbers from the lattice formula and from restriction homology.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arrangement::ArrangementError;
use crate::bits;
use crate::builder::{build, BuildError, BuildPlan, Built, Policy};
use crate::cw::{CellSet, CwComplex};
use crate::homology::{ChainComplex, IntMatrix, Ring};
use crate::lattice::{GeometricLattice, LatticeError, PointedLattice};
use crate::matroid::{Matroid, MatroidError};
use crate::simplicial::{independence_complex, port, steiner_complex, SimplicialComplex};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ResolutionError {
    #[error(transparent)]
    Matroid(#[from] MatroidError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error(transparent)]
    Arrangement(#[from] ArrangementError),
    #[error("label mismatch: {0}")]
    LabelMismatch(String),
    #[error("malformed ideal: {0}")]
    MalformedIdeal(String),
    #[error("element {0} is a loop, so the Steiner ideal is the unit ideal")]
    LoopElement(usize),
}

pub type Result<T> = std::result::Result<T, ResolutionError>;

pub type Monomial = Vec<u32>;

fn divides(a: &[u32], b: &[u32]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

fn lcm(a: &[u32], b: &[u32]) -> Monomial {
    a.iter().zip(b).map(|(x, y)| *x.max(y)).collect()
}

/// Monomial ideal given by exponent vectors of its minimal generators.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonomialIdeal {
    pub vars: usize,
    pub gens: Vec<Monomial>,
}

impl MonomialIdeal {
    pub fn new(vars: usize, gens: Vec<Monomial>) -> Result<Self> {
        for g in &gens {
            if g.len() != vars {
                return Err(ResolutionError::MalformedIdeal(format!("generator {g:?} has the wrong length")));
            }
        }
        for (i, a) in gens.iter().enumerate() {
            for (j, b) in gens.iter().enumerate() {
                if i != j && divides(a, b) {
                    return Err(ResolutionError::MalformedIdeal(format!("generator {a:?} divides {b:?}")));
                }
            }
        }
        Ok(MonomialIdeal { vars, gens })
    }

    pub fn from_supports(vars: usize, supports: &[Vec<usize>]) -> Result<Self> {
        let gens = supports
            .iter()
            .map(|s| {
                let mut g = vec![0; vars];
                for &v in s {
                    if v >= vars {
                        return Err(ResolutionError::MalformedIdeal(format!("variable {v} out of range")));
                    }
                    g[v] = 1;
                }
                Ok(g)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(vars, gens)
    }

    pub fn is_squarefree(&self) -> bool {
        self.gens.iter().flatten().all(|&x| x <= 1)
    }

    pub fn is_zero(&self) -> bool {
        self.gens.is_empty()
    }

    /// All least common multiples of nonempty sets of generators.
    pub fn lcm_lattice(&self) -> Vec<Monomial> {
        let mut out: BTreeSet<Monomial> = BTreeSet::new();
        for g in &self.gens {
            let new: Vec<Monomial> = out.iter().map(|m| lcm(m, g)).chain([g.clone()]).collect();
            out.extend(new);
        }
        out.into_iter().collect()
    }
}

/// The Steiner ideal of `(M, e)`; variable `k` stands for element `variables[k]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SteinerIdeal {
    pub ideal: MonomialIdeal,
    pub variables: Vec<usize>,
}

impl SteinerIdeal {
    pub fn variable_of(&self, element: usize) -> Option<usize> {
        self.variables.iter().position(|&x| x == element)
    }

    /// Exponent vector of the squarefree monomial on a set of elements (ignoring `e`).
    pub fn monomial(&self, elements: u32) -> Monomial {
        self.variables.iter().map(|&x| (elements >> x) & 1).collect()
    }

}

/// Generators are the ports of `(M, e)` on the variables `E - e`.
pub fn steiner_ideal(m: &Matroid, e: usize) -> Result<SteinerIdeal> {
    let ports = port(m, e)?;
    if m.is_loop(e) {
        return Err(ResolutionError::LoopElement(e));
    }
    let variables: Vec<usize> = (0..m.ground_size()).filter(|&x| x != e).collect();
    let partial = SteinerIdeal {
        ideal: MonomialIdeal { vars: variables.len(), gens: vec![] },
        variables,
    };
    let gens = ports.iter().map(|&p| partial.monomial(p)).collect();
    Ok(SteinerIdeal {
        ideal: MonomialIdeal::new(partial.variables.len(), gens)?,
        variables: partial.variables,
    })
}

/// A CW complex whose cells carry monomial labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledComplex {
    pub complex: CwComplex,
    pub labels: Vec<Monomial>,
}

impl LabeledComplex {
    /// Labels every cell by the lcm of the labels of its vertices.
    pub fn from_vertex_labels(complex: CwComplex, vertex_labels: &HashMap<usize, Monomial>) -> Result<Self> {
        let vars = vertex_labels.values().next().map_or(0, Vec::len);
        let mut labels = Vec::with_capacity(complex.len());
        for i in 0..complex.len() {
            let mut m = vec![0; vars];
            for v in complex.vertices_of(i) {
                let l = vertex_labels
                    .get(v)
                    .ok_or_else(|| ResolutionError::LabelMismatch(format!("vertex {} unlabeled", complex.id(*v))))?;
                m = lcm(&m, l);
            }
            labels.push(m);
        }
        Ok(LabeledComplex { complex, labels })
    }

    /// Checks that labels are lcms of vertex labels and that vertex labels are the generators.
    pub fn check(&self, ideal: &MonomialIdeal) -> Result<()> {
        let mut vertex_labels: Vec<&Monomial> = Vec::new();
        for i in 0..self.complex.len() {
            if self.complex.cell(i).dim == 0 {
                vertex_labels.push(&self.labels[i]);
                continue;
            }
            let expect = self
                .complex
                .vertices_of(i)
                .iter()
                .fold(vec![0; ideal.vars], |acc, &v| lcm(&acc, &self.labels[v]));
            if expect != self.labels[i] {
                return Err(ResolutionError::LabelMismatch(format!(
                    "cell {} is not labeled by the lcm of its vertices",
                    self.complex.id(i)
                )));
            }
        }
        let mut a: Vec<&Monomial> = vertex_labels.clone();
        let mut b: Vec<&Monomial> = ideal.gens.iter().collect();
        a.sort();
        b.sort();
        if a != b {
            return Err(ResolutionError::LabelMismatch(
                "vertex labels are not exactly the generators".into(),
            ));
        }
        Ok(())
    }

    /// `Γ_{≤m}`: cells whose label divides `m`.
    pub fn below(&self, m: &[u32]) -> CellSet {
        (0..self.complex.len()).filter(|&i| divides(&self.labels[i], m)).collect()
    }

    pub fn f_vector(&self) -> Vec<usize> {
        self.complex.f_vector(&self.complex.all())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainLabel {
    pub cell: String,
    pub label: Monomial,
}

/// Free modules and differentials of the cellular complex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellularChainComplex {
    /// `modules[i]`: generators of the `i`-th free module (the `i`-cells).
    pub modules: Vec<Vec<ChainLabel>>,
    /// `differentials[i]` maps module `i` to module `i - 1`; the first one is the map onto the ideal.
    pub differentials: Vec<Vec<Vec<i64>>>,
    pub square_zero: bool,
}

impl CellularChainComplex {
    pub fn ranks(&self) -> Vec<usize> {
        self.modules.iter().map(Vec::len).collect()
    }
}

pub fn cellular_chain_complex(g: &LabeledComplex, ideal: &MonomialIdeal) -> Result<CellularChainComplex> {
    g.check(ideal)?;
    let k = &g.complex;
    let cc: ChainComplex = k.chain_complex(&k.all());
    let top = k.dimension();
    let mut modules: Vec<Vec<ChainLabel>> = vec![Vec::new(); (top + 1).max(0) as usize];
    for i in 0..k.len() {
        modules[k.cell(i).dim].push(ChainLabel {
            cell: k.id(i).to_string(),
            label: g.labels[i].clone(),
        });
    }
    let differentials = (0..=top)
        .map(|deg| cc.boundary(deg).map(IntMatrix::to_rows).unwrap_or_default())
        .collect();
    Ok(CellularChainComplex {
        modules,
        differentials,
        square_zero: cc.square_zero_failure().is_none(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeVerdict {
    pub m: Monomial,
    pub cells: usize,
    pub z: bool,
    pub q: bool,
    pub gf2: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolutionReport {
    pub exact: bool,
    pub exact_q: bool,
    pub exact_gf2: bool,
    pub torsion_free: bool,
    pub minimal: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub minimal_witness: Option<(String, String)>,
    pub degrees: Vec<DegreeVerdict>,
}

/// Exactness over the lcm lattice and minimality over face pairs.
pub fn verify_resolution(g: &LabeledComplex, ideal: &MonomialIdeal) -> Result<ResolutionReport> {
    g.check(ideal)?;
    let k = &g.complex;
    let mut degrees = Vec::new();
    let mut torsion_free = true;
    for m in ideal.lcm_lattice() {
        let cells = g.below(&m);
        let cc = k.chain_complex(&cells);
        let hz = cc.homology(Ring::Z);
        torsion_free &= !hz.has_torsion();
        degrees.push(DegreeVerdict {
            cells: cells.len(),
            z: hz.is_acyclic(),
            q: cc.homology(Ring::Q).is_acyclic(),
            gf2: cc.homology(Ring::Gf2).is_acyclic(),
            m,
        });
    }
    let minimal_witness = (0..k.len()).find_map(|i| {
        k.cell(i)
            .boundary
            .iter()
            .find(|&&(f, _)| g.labels[f] == g.labels[i])
            .map(|&(f, _)| (k.id(i).to_string(), k.id(f).to_string()))
    });
    Ok(ResolutionReport {
        exact: degrees.iter().all(|d| d.z),
        exact_q: degrees.iter().all(|d| d.q),
        exact_gf2: degrees.iter().all(|d| d.gf2),
        torsion_free,
        minimal: minimal_witness.is_none(),
        minimal_witness,
        degrees,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GradedBetti {
    pub sigma: Vec<usize>,
    pub i: usize,
    pub dim: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BettiTable {
    pub total: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graded: Option<Vec<GradedBetti>>,
}

impl BettiTable {
    fn from_total(mut total: Vec<usize>) -> Self {
        while total.last() == Some(&0) {
            total.pop();
        }
        BettiTable { total, graded: None }
    }

    fn from_graded(mut graded: Vec<GradedBetti>) -> Self {
        graded.retain(|g| g.dim > 0);
        graded.sort();
        let len = graded.iter().map(|g| g.i + 1).max().unwrap_or(0);
        let mut total = vec![0; len];
        for g in &graded {
            total[g.i] += g.dim;
        }
        BettiTable {
            total,
            graded: Some(graded),
        }
    }

    pub fn alternating_sum(&self) -> i64 {
        self.total
            .iter()
            .enumerate()
            .map(|(i, &b)| if i % 2 == 0 { b as i64 } else { -(b as i64) })
            .sum()
    }
}

/// `β_i = |Σ_{r(X) = d-i} Σ_{Y ≥ X} μ(X, Y)|` with `X, Y` ranging over the flats of `M*`
/// not above `e`, and `d = rank L(M*) - 1`.
pub fn betti_lattice(m: &Matroid, e: usize) -> Result<BettiTable> {
    if m.is_loop(e) {
        return Err(ResolutionError::LoopElement(e));
    }
    let dual = m.dual();
    if dual.is_loop(e) {
        // e is a coloop: no port, zero ideal
        return Ok(BettiTable::default());
    }
    let pl = PointedLattice::from_matroid(&dual, e)?;
    Ok(betti_from_pointed(&pl))
}

pub fn betti_from_pointed(pl: &PointedLattice) -> BettiTable {
    let l = &pl.lattice;
    let semi = pl.semilattice();
    let d = l.rank() as i64 - 1;
    let total = (0..=d.max(0))
        .map(|i| {
            semi.iter()
                .filter(|&&x| l.rank_of(x) as i64 == d - i)
                .map(|&x| semi.iter().map(|&y| l.mobius(x, y)).sum::<i64>())
                .sum::<i64>()
                .unsigned_abs() as usize
        })
        .collect();
    BettiTable::from_total(total)
}

/// `β_{i,σ} = dim H̃_{|σ|-i-2}(Δ|_σ)` over all subsets `σ` of the vertex universe.
pub fn betti_hochster(delta: &SimplicialComplex, ring: Ring) -> BettiTable {
    let universe = delta.vertex_universe();
    let mut graded = Vec::new();
    let mut s = universe;
    loop {
        let h = delta.restrict(s).reduced_homology(ring);
        let size = bits::size(s) as i64;
        for g in &h.groups {
            let i = size - g.degree - 2;
            if i >= 0 && g.free_rank > 0 {
                graded.push(GradedBetti {
                    sigma: bits::elements(s),
                    i: i as usize,
                    dim: g.free_rank,
                });
            }
        }
        if s == 0 {
            break;
        }
        s = (s - 1) & universe;
    }
    BettiTable::from_graded(graded)
}

/// The labeled bounded complex of a built arrangement for `L(M*)` pointed at `e`.
#[derive(Clone, Debug)]
pub struct CellularResolution {
    pub ideal: SteinerIdeal,
    pub built: Built,
    pub labeled: LabeledComplex,
}

impl CellularResolution {
    /// Betti numbers as cell counts, graded by label support (variable numbering).
    pub fn betti(&self) -> BettiTable {
        let k = &self.labeled.complex;
        let mut counts: std::collections::BTreeMap<(Vec<usize>, usize), usize> = Default::default();
        for c in 0..k.len() {
            let sigma = (0..self.ideal.variables.len())
                .filter(|&v| self.labeled.labels[c][v] > 0)
                .collect();
            *counts.entry((sigma, k.cell(c).dim)).or_default() += 1;
        }
        BettiTable::from_graded(
            counts
                .into_iter()
                .map(|((sigma, i), dim)| GradedBetti { sigma, i, dim })
                .collect(),
        )
    }
}

/// Builds the arrangement for `(L(M*), e)`, takes its bounded subcomplex with respect to
/// the distinguished sphere and labels each cell `c` by the complement of `ψ(c)` in `E - e`.
/// Returns `None` when `e` is a coloop (the ideal is zero).
pub fn cellular_resolution(m: &Matroid, e: usize, policy: Policy, seed: u64) -> Result<Option<CellularResolution>> {
    let ideal = steiner_ideal(m, e)?;
    let dual = m.dual();
    if dual.is_loop(e) {
        return Ok(None);
    }
    let pl = PointedLattice::from_matroid(&dual, e)?;
    let built = build(&BuildPlan::new(pl.clone()).with_policy(policy, seed))?;
    let arr = &built.arrangement;
    let il = arr.intersection_lattice()?;
    let [bounded, _] = arr.bounded_components(&il, 0)?;
    let psi = arr.flat_assignment(&il);
    let l: &GeometricLattice = &pl.lattice;
    let by_atoms: HashMap<u32, usize> = l.atom_sets().into_iter().enumerate().map(|(i, s)| (s, i)).collect();
    let complex = arr.ambient.extract(&bounded).map_err(ArrangementError::from)?;
    let mut labels = Vec::with_capacity(complex.len());
    for i in 0..complex.len() {
        let c = arr.ambient.index(complex.id(i)).expect("cell of the bounded part");
        let atoms = bits::elements(il.lattice.flat(psi[c]))
            .into_iter()
            .fold(0u32, |acc, j| acc | (1 << arr.atoms[j]));
        let flat = by_atoms
            .get(&atoms)
            .ok_or_else(|| ResolutionError::LabelMismatch(format!("cell {} has no flat", complex.id(i))))?;
        let support = m.ground_mask() & !l.flat(*flat) & !(1 << e);
        labels.push(ideal.monomial(support));
    }
    let labeled = LabeledComplex { complex, labels };
    labeled.check(&ideal.ideal)?;
    Ok(Some(CellularResolution { ideal, built, labeled }))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StanleyReport {
    pub flats_checked: usize,
    pub identity_holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<usize>>,
    pub betti_lattice: BettiTable,
    pub betti_hochster: BettiTable,
    pub betti_agree: bool,
    pub passed: bool,
}

/// Compares `μ_{L(M*)}(X, 1̂)` with `-Σ μ(X, Y)` over the flats `Y ≥ X` of the free extension
/// of `M*` avoiding the new point, and the two Betti routes for the independence complex.
pub fn stanley_consistency(m: &Matroid) -> Result<StanleyReport> {
    let dual = m.dual();
    let l = GeometricLattice::from_matroid(&dual)?;
    let ext = dual.free_extension()?;
    let lt = GeometricLattice::from_matroid(&ext)?;
    let new = 1u32 << m.ground_size();
    let mut witness = None;
    let mut checked = 0;
    for x in 0..l.len() {
        if x == l.top() {
            continue;
        }
        checked += 1;
        let xt = lt
            .index_of(l.flat(x))
            .ok_or_else(|| LatticeError::NotAFlat(l.flat_elements(x)))?;
        let rhs: i64 = -(0..lt.len())
            .filter(|&y| lt.flat(y) & new == 0)
            .map(|y| lt.mobius(xt, y))
            .sum::<i64>();
        if l.mobius(x, l.top()) != rhs && witness.is_none() {
            witness = Some(l.flat_elements(x));
        }
    }
    let coext = m.free_coextension()?;
    let tilde = m.ground_size();
    let bl = betti_lattice(&coext, tilde)?;
    let bh = betti_hochster(&independence_complex(m), Ring::Q);
    let betti_agree = bl.total == bh.total;
    Ok(StanleyReport {
        flats_checked: checked,
        identity_holds: witness.is_none(),
        passed: witness.is_none() && betti_agree,
        witness,
        betti_lattice: bl,
        betti_hochster: BettiTable {
            total: bh.total,
            graded: None,
        },
        betti_agree,
    })
}

/// Betti numbers of the Steiner ideal by restriction homology of the Steiner complex,
/// with `σ` reported in variable numbering.
pub fn betti_hochster_steiner(m: &Matroid, e: usize, ring: Ring) -> Result<BettiTable> {
    let ideal = steiner_ideal(m, e)?;
    let t = betti_hochster(&steiner_complex(m, e)?, ring);
    let graded = t.graded.map(|g| {
        g.into_iter()
            .map(|b| GradedBetti {
                sigma: b.sigma.iter().map(|&x| ideal.variable_of(x).expect("vertex is a variable")).collect(),
                ..b
            })
            .collect()
    });
    Ok(BettiTable { total: t.total, graded })
}
