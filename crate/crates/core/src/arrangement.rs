//! Arrangements of homology spheres inside a CW sphere: intersection
//! lattices, the partition/regularity predicates, cell counts and bounded
//! subcomplexes.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cw::{CellJson, CellSet, CwComplex, CwError, CwJson};
use crate::homology::Ring;
use crate::lattice::{GeometricLattice, LatticeError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ArrangementError {
    #[error(transparent)]
    Cw(#[from] CwError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("sphere {0} is not a subcomplex")]
    NotASubcomplex(usize),
    #[error("at most 32 spheres are supported, got {0}")]
    TooManySpheres(usize),
    #[error("malformed involution: {0}")]
    BadInvolution(String),
    #[error("axiom violation at the intersection of spheres {spheres:?}: {reason}")]
    AxiomViolation { spheres: Vec<usize>, reason: String },
    #[error("intersection of spheres {spheres:?} has rank {rank} but dimension {dim} (ambient dimension {d})")]
    RankMismatch {
        spheres: Vec<usize>,
        rank: usize,
        dim: i64,
        d: i64,
    },
    #[error("not a nonempty intersection of the arrangement")]
    NotAFlat,
    #[error("arrangement is not regular with respect to sphere {sphere}: {witness}")]
    NotRegular { sphere: usize, witness: String },
}

pub type Result<T> = std::result::Result<T, ArrangementError>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SphereJson {
    pub atom: usize,
    pub cells: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArrangementJson {
    pub cells: Vec<CellJson>,
    pub spheres: Vec<SphereJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub involution: Option<Vec<(String, String)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<serde_json::Value>,
}

/// Ambient complex `S` with distinguished subcomplexes `S_j`, each labeled by an atom index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SphereArrangement {
    pub ambient: CwComplex,
    pub spheres: Vec<CellSet>,
    pub atoms: Vec<usize>,
    pub involution: Option<Vec<usize>>,
}

/// `L(𝒜)`: lattice elements carry the set of sphere indices containing them.
#[derive(Clone, Debug)]
pub struct IntersectionLattice {
    pub lattice: GeometricLattice,
    /// Cell set of each lattice element.
    pub subcomplexes: Vec<CellSet>,
    /// Dimension of the ambient sphere.
    pub d: i64,
}

impl IntersectionLattice {
    pub fn element_of(&self, cells: &CellSet) -> Option<usize> {
        self.subcomplexes.iter().position(|c| c == cells)
    }

    pub fn spheres_of(&self, x: usize) -> Vec<usize> {
        crate::bits::elements(self.lattice.flat(x))
    }

    /// Elements not contained in sphere `j`.
    pub fn avoiding(&self, j: usize) -> Vec<usize> {
        (0..self.lattice.len())
            .filter(|&x| self.lattice.flat(x) & (1 << j) == 0)
            .collect()
    }
}

impl SphereArrangement {
    pub fn new(
        ambient: CwComplex,
        spheres: Vec<(usize, CellSet)>,
        involution: Option<Vec<usize>>,
    ) -> Result<Self> {
        if spheres.len() > 32 {
            return Err(ArrangementError::TooManySpheres(spheres.len()));
        }
        for (j, (_, s)) in spheres.iter().enumerate() {
            if !ambient.is_subcomplex(s) || s.iter().any(|c| c >= ambient.len()) {
                return Err(ArrangementError::NotASubcomplex(j));
            }
        }
        if let Some(p) = &involution {
            if p.len() != ambient.len() {
                return Err(ArrangementError::BadInvolution(format!(
                    "{} images for {} cells",
                    p.len(),
                    ambient.len()
                )));
            }
            let mut seen = vec![false; p.len()];
            for &i in p {
                if i >= p.len() || std::mem::replace(&mut seen[i], true) {
                    return Err(ArrangementError::BadInvolution("not a permutation".into()));
                }
            }
        }
        let (atoms, spheres) = spheres.into_iter().unzip();
        Ok(SphereArrangement {
            ambient,
            spheres,
            atoms,
            involution,
        })
    }

    pub fn from_json(j: &ArrangementJson) -> Result<Self> {
        let ambient = CwComplex::from_json(&CwJson { cells: j.cells.clone() })?;
        let spheres = j
            .spheres
            .iter()
            .map(|s| Ok((s.atom, ambient.cells_from_ids(s.cells.iter().map(String::as_str))?)))
            .collect::<Result<Vec<_>>>()?;
        let involution = match &j.involution {
            None => None,
            Some(pairs) => {
                let mut p: Vec<Option<usize>> = vec![None; ambient.len()];
                for (a, b) in pairs {
                    let ia = ambient.index(a).ok_or_else(|| CwError::UnknownCell(a.clone()))?;
                    let ib = ambient.index(b).ok_or_else(|| CwError::UnknownCell(b.clone()))?;
                    if p[ia].is_some() || p[ib].is_some() {
                        return Err(ArrangementError::BadInvolution(format!("cell {a:?} or {b:?} paired twice")));
                    }
                    p[ia] = Some(ib);
                    p[ib] = Some(ia);
                }
                let p = p
                    .into_iter()
                    .enumerate()
                    .map(|(i, x)| x.ok_or_else(|| ArrangementError::BadInvolution(format!("cell {:?} unpaired", ambient.id(i)))))
                    .collect::<Result<Vec<_>>>()?;
                Some(p)
            }
        };
        Self::new(ambient, spheres, involution)
    }

    pub fn to_json(&self) -> ArrangementJson {
        let ids = |s: &CellSet| s.iter().map(|c| self.ambient.id(c).to_string()).collect();
        ArrangementJson {
            cells: self.ambient.to_json().cells,
            spheres: self
                .spheres
                .iter()
                .zip(&self.atoms)
                .map(|(s, &atom)| SphereJson { atom, cells: ids(s) })
                .collect(),
            involution: self.involution.as_ref().map(|p| {
                p.iter()
                    .enumerate()
                    .filter(|&(i, &j)| i <= j)
                    .map(|(i, &j)| (self.ambient.id(i).to_string(), self.ambient.id(j).to_string()))
                    .collect()
            }),
            provenance: None,
        }
    }

    /// Sphere index carrying the given atom label.
    pub fn sphere_with_atom(&self, atom: usize) -> Option<usize> {
        self.atoms.iter().position(|&a| a == atom)
    }

    pub fn union_of_spheres(&self) -> CellSet {
        self.spheres.iter().fold(CellSet::new(), |acc, s| acc.union(s))
    }

    /// Dimension of the ambient homology sphere.
    pub fn ambient_dimension(&self) -> Result<i64> {
        let all = self.ambient.all();
        let h = self.ambient.homology(&all, Ring::Z);
        match h.sphere_dimension() {
            Some(k) if k == self.ambient.dimension_of(&all) => Ok(k),
            _ => Err(ArrangementError::AxiomViolation {
                spheres: vec![],
                reason: "ambient complex is not a homology sphere of its dimension".into(),
            }),
        }
    }

    /// All intersections, verified to be homology spheres of the right
    /// dimension, assembled into a geometric lattice.
    pub fn intersection_lattice(&self) -> Result<IntersectionLattice> {
        let d = self.ambient_dimension()?;
        let contains = |x: &CellSet| -> u32 {
            self.spheres
                .iter()
                .enumerate()
                .filter(|(_, s)| x.is_subset(s))
                .fold(0u32, |acc, (j, _)| acc | (1 << j))
        };
        let all = self.ambient.all();
        let mut found: HashMap<CellSet, u32> = HashMap::new();
        let mut order: Vec<CellSet> = Vec::new();
        let mut queue = VecDeque::from([all]);
        while let Some(x) = queue.pop_front() {
            if found.contains_key(&x) {
                continue;
            }
            found.insert(x.clone(), contains(&x));
            for s in &self.spheres {
                let y = x.intersection(s);
                if !found.contains_key(&y) {
                    queue.push_back(y);
                }
            }
            order.push(x);
        }
        for x in &order {
            let j = crate::bits::elements(found[x]);
            let dim = self.ambient.dimension_of(x);
            let h = self.ambient.homology(x, Ring::Z);
            if h.sphere_dimension() != Some(dim) {
                return Err(ArrangementError::AxiomViolation {
                    spheres: j,
                    reason: format!("not a homology sphere of dimension {dim}"),
                });
            }
            for (k, s) in self.spheres.iter().enumerate() {
                if !x.is_subset(s) && self.ambient.dimension_of(&x.intersection(s)) != dim - 1 {
                    return Err(ArrangementError::AxiomViolation {
                        spheres: j,
                        reason: format!("meets sphere {k} in the wrong dimension"),
                    });
                }
            }
        }
        let family: Vec<u32> = order.iter().map(|x| found[x]).collect();
        let distinct: std::collections::HashSet<u32> = family.iter().copied().collect();
        if distinct.len() != family.len() {
            return Err(ArrangementError::AxiomViolation {
                spheres: vec![],
                reason: "distinct intersections lie in the same spheres".into(),
            });
        }
        let lattice = GeometricLattice::from_closed_family(self.spheres.len(), &family)?;
        let by_mask: HashMap<u32, &CellSet> = order.iter().map(|x| (found[x], x)).collect();
        let subcomplexes: Vec<CellSet> = (0..lattice.len()).map(|i| by_mask[&lattice.flat(i)].clone()).collect();
        for (i, x) in subcomplexes.iter().enumerate() {
            let dim = self.ambient.dimension_of(x);
            if lattice.rank_of(i) as i64 != d - dim {
                return Err(ArrangementError::RankMismatch {
                    spheres: lattice.flat_elements(i),
                    rank: lattice.rank_of(i),
                    dim,
                    d,
                });
            }
        }
        Ok(IntersectionLattice {
            lattice,
            subcomplexes,
            d,
        })
    }

    /// First cell of `x` of dimension below `dim x` that lies in no `x ∩ S_j` with `x ⊄ S_j`.
    fn partition_failure(&self, x: &CellSet) -> Option<usize> {
        let dim = self.ambient.dimension_of(x);
        let cover = self
            .spheres
            .iter()
            .filter(|s| !x.is_subset(s))
            .fold(CellSet::new(), |acc, s| acc.union(&x.intersection(s)));
        x.iter()
            .find(|&c| (self.ambient.cell(c).dim as i64) < dim && !cover.contains(c))
    }

    fn regularity(&self, il: &IntersectionLattice, j: usize) -> RegularityReport {
        let fail = |witness: String| RegularityReport {
            sphere: j,
            atom: self.atoms[j],
            regular: false,
            witness: Some(witness),
            pi1_unverified: true,
        };
        let coatoms: Vec<usize> = il.lattice.coatoms();
        for x in il.avoiding(j) {
            let cells = &il.subcomplexes[x];
            let verts = self.ambient.vertices(cells).difference(&self.spheres[j]);
            let induced = self.ambient.induced_within(cells, &verts);
            let comps = self.ambient.components(&induced);
            let label = format!("{:?}", il.spheres_of(x));
            if comps.len() != 2 {
                return fail(format!("intersection {label} splits into {} components", comps.len()));
            }
            for c in &comps {
                if !self.ambient.homology(c, Ring::Z).is_acyclic() {
                    return fail(format!("a component of intersection {label} is not acyclic"));
                }
            }
            for &y in &coatoms {
                if !il.lattice.leq(x, y) || il.lattice.flat(y) & (1 << j) != 0 {
                    continue;
                }
                let yv: Vec<usize> = self.ambient.vertices(&il.subcomplexes[y]).iter().collect();
                let separated = yv.len() == 2
                    && comps.iter().all(|c| !(c.contains(yv[0]) && c.contains(yv[1])))
                    && comps.iter().any(|c| c.contains(yv[0]));
                if !separated {
                    return fail(format!(
                        "coatom {:?} is not separated inside intersection {label}",
                        il.spheres_of(y)
                    ));
                }
            }
        }
        RegularityReport {
            sphere: j,
            atom: self.atoms[j],
            regular: true,
            witness: None,
            pi1_unverified: true,
        }
    }

    fn involution_report(&self) -> Option<InvolutionReport> {
        let p = self.involution.as_ref()?;
        let k = &self.ambient;
        let order_two = (0..p.len()).all(|i| p[p[i]] == i);
        let fixed_point_free = (0..p.len()).all(|i| p[i] != i);
        let preserves_dimension = (0..p.len()).all(|i| k.cell(i).dim == k.cell(p[i]).dim);
        let preserves_boundary = (0..p.len()).all(|i| {
            let mut mapped: Vec<(usize, i64)> = k.cell(i).boundary.iter().map(|&(f, v)| (p[f], v)).collect();
            mapped.sort_unstable();
            mapped == k.cell(p[i]).boundary
        });
        let image = |s: &CellSet| -> CellSet { s.iter().map(|c| p[c]).collect() };
        let sphere_image: Vec<Option<usize>> = self
            .spheres
            .iter()
            .map(|s| {
                let t = image(s);
                self.spheres.iter().position(|u| *u == t)
            })
            .collect();
        let preserves_spheres = sphere_image.iter().all(Option::is_some);
        let fixes_each_sphere = sphere_image.iter().enumerate().all(|(j, &t)| t == Some(j));
        Some(InvolutionReport {
            passed: order_two && fixed_point_free && preserves_dimension && preserves_boundary && preserves_spheres,
            order_two,
            fixed_point_free,
            preserves_dimension,
            preserves_boundary,
            preserves_spheres,
            fixes_each_sphere,
        })
    }

    /// The partition and regularity predicates, with witnesses.
    pub fn verify(&self, il: &IntersectionLattice) -> ArrangementReport {
        let all = self.ambient.all();
        let top = il.lattice.top();
        let essential = il.subcomplexes[top].is_empty();
        let partition_witness = self.partition_failure(&all).map(|c| self.ambient.id(c).to_string());
        let mut full_witness = None;
        for (x, cells) in il.subcomplexes.iter().enumerate() {
            if cells.is_empty() {
                continue;
            }
            if let Some(c) = self.partition_failure(cells) {
                full_witness = Some(format!("cell {} in intersection {:?}", self.ambient.id(c), il.spheres_of(x)));
                break;
            }
        }
        let chain = self.ambient.verify_chain_complex();
        ArrangementReport {
            d: il.d,
            spheres: self.spheres.len(),
            intersections: il.lattice.len(),
            chain_complex: chain.passed,
            essential,
            partitioned: partition_witness.is_none(),
            fully_partitioned: full_witness.is_none(),
            partition_witness: full_witness,
            regular: (0..self.spheres.len()).map(|j| self.regularity(il, j)).collect(),
            involution: self.involution_report(),
        }
    }

    /// `ψ(c)`: the smallest intersection containing each cell.
    pub fn flat_assignment(&self, il: &IntersectionLattice) -> Vec<usize> {
        let index: HashMap<&CellSet, usize> = il.subcomplexes.iter().enumerate().map(|(i, c)| (c, i)).collect();
        let all = self.ambient.all();
        (0..self.ambient.len())
            .map(|c| {
                let x = self
                    .spheres
                    .iter()
                    .filter(|s| s.contains(c))
                    .fold(all.clone(), |acc, s| acc.intersection(s));
                index[&x]
            })
            .collect()
    }

    /// Cell counts against the lattice sums, together with the τ identities.
    pub fn cell_counts(&self, il: &IntersectionLattice) -> CountReport {
        let l = &il.lattice;
        let d = il.d;
        let psi = self.flat_assignment(il);
        let mut tau = vec![0i64; l.len()];
        for (c, &x) in psi.iter().enumerate() {
            tau[x] += sign(self.ambient.cell(c).dim as i64);
        }
        tau[l.top()] -= 1; // the empty cell
        let mut witness = None;
        let mut tau_sum_ok = true;
        let mut tau_inversion_ok = true;
        for x in 0..l.len() {
            let above: Vec<usize> = (0..l.len()).filter(|&y| l.leq(x, y)).collect();
            let sum: i64 = above.iter().map(|&y| tau[y]).sum();
            if sum != sign(d - l.rank_of(x) as i64) {
                tau_sum_ok = false;
                witness.get_or_insert_with(|| format!("τ sum over {:?}", il.spheres_of(x)));
            }
            let inv: i64 = above
                .iter()
                .map(|&y| l.mobius(x, y) * sign(d - l.rank_of(y) as i64))
                .sum();
            if inv != tau[x] {
                tau_inversion_ok = false;
                witness.get_or_insert_with(|| format!("τ inversion at {:?}", il.spheres_of(x)));
            }
        }
        let f = self.ambient.f_vector(&self.ambient.all());
        let partitioned_rank: Vec<bool> = (0..l.len())
            .map(|x| il.subcomplexes[x].is_empty() || self.partition_failure(&il.subcomplexes[x]).is_none())
            .collect();
        let rows: Vec<CountRow> = (0..=d.max(0))
            .map(|i| {
                let formula: i64 = l
                    .of_rank(i as usize)
                    .map(|x| (0..l.len()).map(|y| l.mobius(x, y).abs()).sum::<i64>())
                    .sum();
                let applicable = (0..l.len()).all(|x| l.rank_of(x) as i64 > i || partitioned_rank[x]);
                let dim = d - i;
                let actual = f.get(dim as usize).copied().unwrap_or(0);
                CountRow {
                    dim,
                    actual,
                    formula: formula as u64,
                    applicable,
                    matches: actual as i64 == formula,
                }
            })
            .collect();
        let p_minus_one = l.characteristic_at(-1).unsigned_abs();
        let euler = self.ambient.euler_characteristic(&self.ambient.all());
        let euler_expected = 1 + sign(d);
        let passed = tau_sum_ok
            && tau_inversion_ok
            && euler == euler_expected
            && rows.iter().all(|r| !r.applicable || r.matches);
        CountReport {
            d,
            f_vector: f,
            top_cells_formula: p_minus_one,
            rows,
            tau,
            tau_sum_ok,
            tau_inversion_ok,
            euler,
            euler_expected,
            witness,
            passed,
        }
    }

    /// Homology of the union of the spheres against a wedge of `|p(L;-1)| - 1` spheres.
    pub fn link_homology(&self, il: &IntersectionLattice) -> LinkReport {
        let v = self.union_of_spheres();
        let h = self.ambient.homology(&v, Ring::Z);
        let expected_rank = il.lattice.characteristic_at(-1).unsigned_abs() as usize - 1;
        LinkReport {
            degree: il.d - 1,
            expected_rank,
            passed: h.is_wedge_of_spheres(il.d - 1, expected_rank),
            homology: h.nonzero().into_iter().cloned().collect(),
        }
    }

    /// The two components of the subcomplex induced on the vertices off `S_j`.
    pub fn bounded_components(&self, il: &IntersectionLattice, j: usize) -> Result<[CellSet; 2]> {
        let reg = self.regularity(il, j);
        if !reg.regular {
            return Err(ArrangementError::NotRegular {
                sphere: j,
                witness: reg.witness.unwrap_or_default(),
            });
        }
        let verts = self.ambient.vertices(&self.ambient.all()).difference(&self.spheres[j]);
        let comps = self.ambient.components(&self.ambient.induced(&verts));
        let [a, b]: [CellSet; 2] = comps.try_into().expect("regularity gives two components");
        Ok([a, b])
    }

    pub fn bounded_subcomplex(&self, il: &IntersectionLattice, j: usize) -> Result<(CwComplex, CwComplex)> {
        let [a, b] = self.bounded_components(il, j)?;
        Ok((self.ambient.extract(&a)?, self.ambient.extract(&b)?))
    }

    /// Cell counts of both bounded components of `(𝒜, S_j)` against the lattice sums.
    pub fn bounded_counts(&self, il: &IntersectionLattice, j: usize) -> Result<BoundedReport> {
        let comps = self.bounded_components(il, j)?;
        let l = &il.lattice;
        let d = il.d;
        let off = il.avoiding(j);
        let formula: Vec<u64> = (0..=d.max(0))
            .map(|i| {
                off.iter()
                    .filter(|&&x| l.rank_of(x) as i64 == i)
                    .map(|&x| off.iter().map(|&y| l.mobius(x, y)).sum::<i64>())
                    .sum::<i64>()
                    .unsigned_abs()
            })
            .collect();
        let beta = l.beta_invariant();
        let components = comps
            .iter()
            .map(|b| {
                let f = self.ambient.f_vector(b);
                let rows: Vec<CountRow> = formula
                    .iter()
                    .enumerate()
                    .map(|(i, &fm)| {
                        let dim = d - i as i64;
                        let actual = f.get(dim as usize).copied().unwrap_or(0);
                        CountRow {
                            dim,
                            actual,
                            formula: fm,
                            applicable: true,
                            matches: actual as u64 == fm,
                        }
                    })
                    .collect();
                let mut witness = None;
                for &x in &off {
                    let xb = b.intersection(&il.subcomplexes[x]);
                    if !self.ambient.homology(&xb, Ring::Z).is_acyclic() {
                        witness = Some(format!("{:?}", il.spheres_of(x)));
                        break;
                    }
                }
                let top = f.get(d as usize).copied().unwrap_or(0);
                BoundedComponent {
                    passed: top as u64 == beta && rows.iter().all(|r| r.matches) && witness.is_none(),
                    f_vector: f,
                    top_cells: top,
                    rows,
                    flats_acyclic: witness.is_none(),
                    witness,
                }
            })
            .collect::<Vec<_>>();
        Ok(BoundedReport {
            sphere: j,
            beta,
            passed: components.iter().all(|c| c.passed),
            components,
        })
    }

    /// `𝒜/X` for a nonempty intersection `X`.
    pub fn contraction(&self, il: &IntersectionLattice, x: usize) -> Result<SphereArrangement> {
        let cells = il.subcomplexes.get(x).ok_or(ArrangementError::NotAFlat)?;
        if cells.is_empty() {
            return Err(ArrangementError::NotAFlat);
        }
        let ambient = self.ambient.extract(cells)?;
        let relabel = |s: &CellSet| -> CellSet {
            s.iter()
                .map(|c| ambient.index(self.ambient.id(c)).expect("cell of X"))
                .collect()
        };
        let mut spheres: Vec<(usize, CellSet)> = Vec::new();
        for (j, s) in self.spheres.iter().enumerate() {
            if cells.is_subset(s) {
                continue;
            }
            let t = relabel(&cells.intersection(s));
            if spheres.iter().all(|(_, u)| *u != t) {
                spheres.push((self.atoms[j], t));
            }
        }
        let involution = self.involution.as_ref().and_then(|p| {
            cells.iter().all(|c| cells.contains(p[c])).then(|| {
                (0..ambient.len())
                    .map(|i| {
                        let orig = self.ambient.index(ambient.id(i)).expect("cell of X");
                        ambient.index(self.ambient.id(p[orig])).expect("involution preserves X")
                    })
                    .collect()
            })
        });
        SphereArrangement::new(ambient, spheres, involution)
    }

    /// `𝒜 − S_j`.
    pub fn deletion(&self, j: usize) -> Result<SphereArrangement> {
        if j >= self.spheres.len() {
            return Err(ArrangementError::NotAFlat);
        }
        let spheres = (0..self.spheres.len())
            .filter(|&k| k != j)
            .map(|k| (self.atoms[k], self.spheres[k].clone()))
            .collect();
        SphereArrangement::new(self.ambient.clone(), spheres, self.involution.clone())
    }

    /// Whether the intersections of `𝒜/X` are exactly the intersections of `𝒜` below `X`.
    pub fn contraction_matches_interval(&self, il: &IntersectionLattice, x: usize) -> Result<bool> {
        let c = self.contraction(il, x)?;
        let cil = c.intersection_lattice()?;
        let ids = |k: &CwComplex, s: &CellSet| -> Vec<String> {
            let mut v: Vec<String> = s.iter().map(|i| k.id(i).to_string()).collect();
            v.sort();
            v
        };
        let mut mine: Vec<Vec<String>> = (0..il.lattice.len())
            .filter(|&y| il.lattice.leq(x, y))
            .map(|y| ids(&self.ambient, &il.subcomplexes[y]))
            .collect();
        let mut theirs: Vec<Vec<String>> = cil.subcomplexes.iter().map(|s| ids(&c.ambient, s)).collect();
        mine.sort();
        theirs.sort();
        Ok(mine == theirs)
    }

    /// Graphviz rendering of the 1-skeleton; edges are colored by the first sphere containing them.
    pub fn to_dot(&self) -> String {
        const PALETTE: [&str; 8] = ["red", "blue", "darkgreen", "orange", "purple", "brown", "magenta", "cyan"];
        let k = &self.ambient;
        let mut out = String::from("graph arrangement {\n");
        for i in 0..k.len() {
            if k.cell(i).dim == 0 {
                let _ = writeln!(out, "  \"{}\";", k.id(i));
            }
        }
        for i in 0..k.len() {
            let c = k.cell(i);
            if c.dim != 1 {
                continue;
            }
            let vs = k.vertices_of(i);
            let (a, b) = (vs[0], *vs.last().unwrap());
            let member: Vec<usize> = (0..self.spheres.len()).filter(|&j| self.spheres[j].contains(i)).collect();
            let attrs = match member.first() {
                Some(&j) => format!(
                    " [color={}, label=\"{}\"]",
                    PALETTE[j % PALETTE.len()],
                    member.iter().map(|j| self.atoms[*j].to_string()).collect::<Vec<_>>().join(",")
                ),
                None => " [color=gray]".to_string(),
            };
            let _ = writeln!(out, "  \"{}\" -- \"{}\"{};", k.id(a), k.id(b), attrs);
        }
        out.push_str("}\n");
        out
    }
}

fn sign(k: i64) -> i64 {
    if k.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegularityReport {
    pub sphere: usize,
    pub atom: usize,
    pub regular: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
    /// Components are certified acyclic and connected; simple connectivity is not decided.
    pub pi1_unverified: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvolutionReport {
    pub order_two: bool,
    pub fixed_point_free: bool,
    pub preserves_dimension: bool,
    pub preserves_boundary: bool,
    pub preserves_spheres: bool,
    pub fixes_each_sphere: bool,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArrangementReport {
    pub d: i64,
    pub spheres: usize,
    pub intersections: usize,
    pub chain_complex: bool,
    pub essential: bool,
    pub partitioned: bool,
    pub fully_partitioned: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub partition_witness: Option<String>,
    pub regular: Vec<RegularityReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub involution: Option<InvolutionReport>,
}

impl ArrangementReport {
    pub fn regular_wrt(&self, j: usize) -> bool {
        self.regular.get(j).is_some_and(|r| r.regular)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountRow {
    pub dim: i64,
    pub actual: usize,
    pub formula: u64,
    /// False when some contraction of small enough rank is not partitioned.
    pub applicable: bool,
    pub matches: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountReport {
    pub d: i64,
    pub f_vector: Vec<usize>,
    pub top_cells_formula: u64,
    pub rows: Vec<CountRow>,
    pub tau: Vec<i64>,
    pub tau_sum_ok: bool,
    pub tau_inversion_ok: bool,
    pub euler: i64,
    pub euler_expected: i64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkReport {
    pub degree: i64,
    pub expected_rank: usize,
    pub homology: Vec<crate::homology::HomologyGroup>,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundedComponent {
    pub f_vector: Vec<usize>,
    pub top_cells: usize,
    pub rows: Vec<CountRow>,
    pub flats_acyclic: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundedReport {
    pub sphere: usize,
    pub beta: u64,
    pub components: Vec<BoundedComponent>,
    pub passed: bool,
}

/// Per-dimension cell counts of a cell set, keyed by dimension.
pub fn count_by_dimension(k: &CwComplex, s: &CellSet) -> BTreeMap<usize, usize> {
    let mut m = BTreeMap::new();
    for c in s.iter() {
        *m.entry(k.cell(c).dim).or_insert(0) += 1;
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Hexagon with three antipodal vertex pairs: the three-point line.
    pub(crate) fn a1() -> SphereArrangement {
        let mut k = CwComplex::new();
        for v in ["x1", "x2", "x3", "y1", "y2", "y3"] {
            k.add_cell(v, 0, &[]).unwrap();
        }
        // cycle x1 - x2 - x3 - y1 - y2 - y3 - x1
        let cyc = ["x1", "x2", "x3", "y1", "y2", "y3"];
        for i in 0..6 {
            let (a, b) = (cyc[i], cyc[(i + 1) % 6]);
            k.add_cell(&format!("{a}~{b}"), 1, &[(a, -1), (b, 1)]).unwrap();
        }
        let spheres = (1..=3)
            .map(|i| (i - 1, k.cells_from_ids([format!("x{i}").as_str(), format!("y{i}").as_str()]).unwrap()))
            .collect();
        SphereArrangement::new(k, spheres, None).unwrap()
    }

    #[test]
    fn three_point_line() {
        let a = a1();
        let il = a.intersection_lattice().unwrap();
        assert_eq!(il.d, 1);
        assert_eq!(il.lattice.characteristic_polynomial(), vec![1, -3, 2]);
        let rep = a.verify(&il);
        assert!(rep.essential && rep.partitioned && rep.fully_partitioned);
        assert!(rep.regular.iter().all(|r| r.regular));
        let counts = a.cell_counts(&il);
        assert!(counts.passed, "{counts:?}");
        assert_eq!(counts.rows.iter().map(|r| r.formula).collect::<Vec<_>>(), vec![6, 6]);
        let link = a.link_homology(&il);
        assert!(link.passed);
        assert_eq!(link.expected_rank, 5);
        let b = a.bounded_counts(&il, 0).unwrap();
        assert!(b.passed, "{b:?}");
        assert_eq!(b.components[0].f_vector, vec![2, 1]);
        assert_eq!(b.beta, 1);
    }

    #[test]
    fn deletion_and_contraction() {
        let a = a1();
        let il = a.intersection_lattice().unwrap();
        let del = a.deletion(2).unwrap();
        let dil = del.intersection_lattice().unwrap();
        assert!(!del.verify(&dil).partitioned);
        let s0 = il.element_of(&a.spheres[0]).unwrap();
        let c = a.contraction(&il, s0).unwrap();
        // the other two spheres meet S_0 in the same (-1)-sphere
        assert_eq!(c.spheres.len(), 1);
        assert!(c.spheres[0].is_empty());
        assert_eq!(c.intersection_lattice().unwrap().lattice.len(), 2);
        assert!(a.contraction_matches_interval(&il, s0).unwrap());
        assert!(a.contraction(&il, il.lattice.top()).is_err());
    }

    #[test]
    fn json_round_trip_and_dot() {
        let a = a1();
        let j = a.to_json();
        let text = serde_json::to_string(&j).unwrap();
        let back: ArrangementJson = serde_json::from_str(&text).unwrap();
        assert_eq!(SphereArrangement::from_json(&back).unwrap(), a);
        assert!(a.to_dot().contains("\"x1\" -- \"x2\""));
    }

    #[test]
    fn unlabeled_vertices_break_partition() {
        // the 8-vertex circle with two extra vertices off the spheres
        let mut k = CwComplex::new();
        let cyc = ["x1", "x3", "y1", "x2", "y2", "u", "y3", "w"];
        for v in cyc {
            k.add_cell(v, 0, &[]).unwrap();
        }
        for i in 0..cyc.len() {
            let (a, b) = (cyc[i], cyc[(i + 1) % cyc.len()]);
            k.add_cell(&format!("{a}~{b}"), 1, &[(a, -1), (b, 1)]).unwrap();
        }
        let spheres = (1..=3)
            .map(|i| (i - 1, k.cells_from_ids([format!("x{i}").as_str(), format!("y{i}").as_str()]).unwrap()))
            .collect();
        let a = SphereArrangement::new(k, spheres, None).unwrap();
        let il = a.intersection_lattice().unwrap();
        assert!(il.lattice.same_labeled(&a1().intersection_lattice().unwrap().lattice));
        let rep = a.verify(&il);
        assert!(rep.essential && !rep.partitioned);
        assert!(!a.cell_counts(&il).rows[0].applicable);
    }

    #[test]
    fn non_sphere_intersection_is_rejected() {
        let a = a1();
        let k = a.ambient.clone();
        let extra = k.cells_from_ids(["x1", "x2", "y1"]).unwrap();
        let bad = SphereArrangement::new(k, vec![(0, a.spheres[0].clone()), (1, extra)], None).unwrap();
        assert!(matches!(bad.intersection_lattice(), Err(ArrangementError::AxiomViolation { .. })));
    }
}
