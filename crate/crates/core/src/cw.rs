//! Finite CW complexes described by cells and integer boundary coefficients.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::homology::{ChainComplex, HomologyProfile, IntMatrix, Ring};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CwError {
    #[error("duplicate cell id {0:?}")]
    DuplicateId(String),
    #[error("unknown cell id {0:?}")]
    UnknownCell(String),
    #[error("cell {cell:?} of dimension {dim} has a boundary cell {face:?} of dimension {face_dim}")]
    BoundaryDimension {
        cell: String,
        dim: usize,
        face: String,
        face_dim: usize,
    },
    #[error("cell {0:?} of positive dimension has empty boundary")]
    EmptyBoundary(String),
    #[error("cell set is not closed under taking boundaries (cell {0:?})")]
    NotASubcomplex(String),
}

/// Set of cell indices, stored as a bitset.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellSet {
    words: Vec<u64>,
}

impl CellSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_indices(items: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Self::new();
        for i in items {
            s.insert(i);
        }
        s
    }

    fn trim(&mut self) {
        while self.words.last() == Some(&0) {
            self.words.pop();
        }
    }

    pub fn insert(&mut self, i: usize) {
        let w = i / 64;
        if self.words.len() <= w {
            self.words.resize(w + 1, 0);
        }
        self.words[w] |= 1 << (i % 64);
    }

    pub fn remove(&mut self, i: usize) {
        if let Some(w) = self.words.get_mut(i / 64) {
            *w &= !(1 << (i % 64));
        }
        self.trim();
    }

    pub fn contains(&self, i: usize) -> bool {
        self.words.get(i / 64).is_some_and(|w| w & (1 << (i % 64)) != 0)
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn intersection(&self, other: &CellSet) -> CellSet {
        let mut s = CellSet {
            words: self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect(),
        };
        s.trim();
        s
    }

    pub fn union(&self, other: &CellSet) -> CellSet {
        let n = self.words.len().max(other.words.len());
        let get = |v: &Vec<u64>, i: usize| v.get(i).copied().unwrap_or(0);
        CellSet {
            words: (0..n).map(|i| get(&self.words, i) | get(&other.words, i)).collect(),
        }
    }

    pub fn difference(&self, other: &CellSet) -> CellSet {
        let mut s = CellSet {
            words: self
                .words
                .iter()
                .enumerate()
                .map(|(i, a)| a & !other.words.get(i).copied().unwrap_or(0))
                .collect(),
        };
        s.trim();
        s
    }

    pub fn is_subset(&self, other: &CellSet) -> bool {
        self.words
            .iter()
            .enumerate()
            .all(|(i, a)| a & !other.words.get(i).copied().unwrap_or(0) == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + b)
            })
        })
    }

    pub fn first(&self) -> Option<usize> {
        self.iter().next()
    }
}

impl fmt::Debug for CellSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl FromIterator<usize> for CellSet {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        Self::from_indices(iter)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cell {
    pub id: String,
    pub dim: usize,
    /// `(face index, incidence coefficient)`; zero coefficients record
    /// attachment without net incidence.
    pub boundary: Vec<(usize, i64)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellJson {
    pub id: String,
    pub dim: usize,
    pub boundary: Vec<(String, i64)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CwJson {
    pub cells: Vec<CellJson>,
}

/// A finite CW complex. Cells are indexed in insertion order; every boundary
/// refers to earlier cells of one lower dimension.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CwComplex {
    cells: Vec<Cell>,
    ids: HashMap<String, usize>,
    vertices_of: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainCheck {
    pub passed: bool,
    /// `(cell, face of a face)` with nonzero coefficient in `∂∂ cell`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<(String, String)>,
}

impl CwComplex {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a cell whose boundary refers to existing cells by id.
    pub fn add_cell(&mut self, id: &str, dim: usize, boundary: &[(&str, i64)]) -> Result<usize, CwError> {
        let resolved = boundary
            .iter()
            .map(|&(f, c)| {
                self.ids
                    .get(f)
                    .map(|&i| (i, c))
                    .ok_or_else(|| CwError::UnknownCell(f.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        self.push_cell(id.to_string(), dim, resolved)
    }

    /// Adds a cell whose boundary refers to cell indices.
    pub fn push_cell(&mut self, id: String, dim: usize, boundary: Vec<(usize, i64)>) -> Result<usize, CwError> {
        if self.ids.contains_key(&id) {
            return Err(CwError::DuplicateId(id));
        }
        if dim > 0 && boundary.is_empty() {
            return Err(CwError::EmptyBoundary(id));
        }
        let mut merged: Vec<(usize, i64)> = Vec::new();
        for (f, c) in boundary {
            let face = self.cells.get(f).ok_or_else(|| CwError::UnknownCell(format!("#{f}")))?;
            if face.dim + 1 != dim {
                return Err(CwError::BoundaryDimension {
                    cell: id,
                    dim,
                    face: face.id.clone(),
                    face_dim: face.dim,
                });
            }
            match merged.iter_mut().find(|(g, _)| *g == f) {
                Some(entry) => entry.1 += c,
                None => merged.push((f, c)),
            }
        }
        merged.sort_unstable();
        let idx = self.cells.len();
        let verts = if dim == 0 {
            vec![idx]
        } else {
            let mut v: Vec<usize> = merged.iter().flat_map(|&(f, _)| self.vertices_of[f].iter().copied()).collect();
            v.sort_unstable();
            v.dedup();
            v
        };
        self.vertices_of.push(verts);
        self.ids.insert(id.clone(), idx);
        self.cells.push(Cell {
            id,
            dim,
            boundary: merged,
        });
        Ok(idx)
    }

    pub fn from_json(j: &CwJson) -> Result<Self, CwError> {
        let mut order: Vec<&CellJson> = j.cells.iter().collect();
        order.sort_by_key(|c| c.dim);
        let mut k = CwComplex::new();
        for c in order {
            let b: Vec<(&str, i64)> = c.boundary.iter().map(|(s, v)| (s.as_str(), *v)).collect();
            k.add_cell(&c.id, c.dim, &b)?;
        }
        Ok(k)
    }

    pub fn to_json(&self) -> CwJson {
        CwJson {
            cells: self
                .cells
                .iter()
                .map(|c| CellJson {
                    id: c.id.clone(),
                    dim: c.dim,
                    boundary: c.boundary.iter().map(|&(f, v)| (self.cells[f].id.clone(), v)).collect(),
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cell(&self, i: usize) -> &Cell {
        &self.cells[i]
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn index(&self, id: &str) -> Option<usize> {
        self.ids.get(id).copied()
    }

    pub fn id(&self, i: usize) -> &str {
        &self.cells[i].id
    }

    pub fn all(&self) -> CellSet {
        (0..self.len()).collect()
    }

    /// 0-cells in the closure of a cell.
    pub fn vertices_of(&self, i: usize) -> &[usize] {
        &self.vertices_of[i]
    }

    pub fn vertices(&self, set: &CellSet) -> CellSet {
        set.iter().filter(|&i| self.cells[i].dim == 0).collect()
    }

    pub fn cells_from_ids<'a>(&self, ids: impl IntoIterator<Item = &'a str>) -> Result<CellSet, CwError> {
        ids.into_iter()
            .map(|s| self.index(s).ok_or_else(|| CwError::UnknownCell(s.to_string())))
            .collect()
    }

    /// Dimension of a cell set; -1 when empty.
    pub fn dimension_of(&self, set: &CellSet) -> i64 {
        set.iter().map(|i| self.cells[i].dim as i64).max().unwrap_or(-1)
    }

    pub fn dimension(&self) -> i64 {
        self.dimension_of(&self.all())
    }

    /// Number of cells per dimension `0..=dim`.
    pub fn f_vector(&self, set: &CellSet) -> Vec<usize> {
        let d = self.dimension_of(set);
        let mut f = vec![0; (d + 1).max(0) as usize];
        for i in set.iter() {
            f[self.cells[i].dim] += 1;
        }
        f
    }

    pub fn euler_characteristic(&self, set: &CellSet) -> i64 {
        self.f_vector(set)
            .iter()
            .enumerate()
            .map(|(k, &n)| if k % 2 == 0 { n as i64 } else { -(n as i64) })
            .sum()
    }

    pub fn closure(&self, i: usize) -> CellSet {
        let mut out = CellSet::new();
        let mut stack = vec![i];
        while let Some(c) = stack.pop() {
            if out.contains(c) {
                continue;
            }
            out.insert(c);
            stack.extend(self.cells[c].boundary.iter().map(|&(f, _)| f));
        }
        out
    }

    /// First cell of `set` whose boundary leaves `set`.
    pub fn subcomplex_failure(&self, set: &CellSet) -> Option<usize> {
        set.iter()
            .find(|&i| self.cells[i].boundary.iter().any(|&(f, _)| !set.contains(f)))
    }

    pub fn is_subcomplex(&self, set: &CellSet) -> bool {
        self.subcomplex_failure(set).is_none()
    }

    /// Largest subcomplex of `within` whose closure vertices all lie in `vertices`.
    pub fn induced_within(&self, within: &CellSet, vertices: &CellSet) -> CellSet {
        within
            .iter()
            .filter(|&i| self.vertices_of[i].iter().all(|&v| vertices.contains(v)))
            .collect()
    }

    pub fn induced(&self, vertices: &CellSet) -> CellSet {
        self.induced_within(&self.all(), vertices)
    }

    /// Connected components of a subcomplex, ordered by least cell index.
    pub fn components(&self, set: &CellSet) -> Vec<CellSet> {
        let verts: Vec<usize> = self.vertices(set).iter().collect();
        let pos: HashMap<usize, usize> = verts.iter().enumerate().map(|(p, &v)| (v, p)).collect();
        let mut parent: Vec<usize> = (0..verts.len()).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for i in set.iter() {
            let vs = &self.vertices_of[i];
            if self.cells[i].dim == 0 || vs.len() < 2 {
                continue;
            }
            let a = find(&mut parent, pos[&vs[0]]);
            for v in &vs[1..] {
                let b = find(&mut parent, pos[v]);
                parent[b] = a;
            }
        }
        let mut groups: HashMap<usize, CellSet> = HashMap::new();
        for i in set.iter() {
            let Some(&v) = self.vertices_of[i].first() else { continue };
            let root = find(&mut parent, pos[&v]);
            groups.entry(root).or_default().insert(i);
        }
        let mut out: Vec<CellSet> = groups.into_values().collect();
        out.sort_by_key(|s| s.first());
        out
    }

    /// Augmented cellular chain complex of a subcomplex; the empty cell spans degree -1.
    pub fn chain_complex(&self, set: &CellSet) -> ChainComplex {
        let top = self.dimension_of(set);
        let mut layers: Vec<Vec<usize>> = vec![Vec::new(); (top + 1).max(0) as usize];
        for i in set.iter() {
            layers[self.cells[i].dim].push(i);
        }
        let mut dims = vec![1usize];
        dims.extend(layers.iter().map(Vec::len));
        let mut boundaries = Vec::new();
        for (k, layer) in layers.iter().enumerate() {
            if k == 0 {
                let mut m = IntMatrix::zeros(1, layer.len());
                for c in 0..layer.len() {
                    m.set(0, c, 1);
                }
                boundaries.push(m);
                continue;
            }
            let lower = &layers[k - 1];
            let row_of: HashMap<usize, usize> = lower.iter().enumerate().map(|(r, &c)| (c, r)).collect();
            let mut m = IntMatrix::zeros(lower.len(), layer.len());
            for (col, &c) in layer.iter().enumerate() {
                for &(f, v) in &self.cells[c].boundary {
                    let row = *row_of.get(&f).expect("cell set must be a subcomplex");
                    m.add(row, col, v);
                }
            }
            boundaries.push(m);
        }
        ChainComplex::new(dims, boundaries)
    }

    /// Reduced homology of a subcomplex (empty set: the (-1)-sphere).
    pub fn homology(&self, set: &CellSet, ring: Ring) -> HomologyProfile {
        self.chain_complex(set).homology(ring)
    }

    pub fn verify_chain_complex(&self) -> ChainCheck {
        for (i, c) in self.cells.iter().enumerate() {
            if c.dim < 2 {
                continue;
            }
            let mut acc: HashMap<usize, i64> = HashMap::new();
            for &(f, v) in &c.boundary {
                for &(g, w) in &self.cells[f].boundary {
                    *acc.entry(g).or_default() += v * w;
                }
            }
            let mut bad: Vec<usize> = acc.into_iter().filter(|&(_, v)| v != 0).map(|(g, _)| g).collect();
            bad.sort_unstable();
            if let Some(&g) = bad.first() {
                return ChainCheck {
                    passed: false,
                    witness: Some((self.cells[i].id.clone(), self.cells[g].id.clone())),
                };
            }
        }
        // edges: augmentation of the boundary must vanish
        for c in &self.cells {
            if c.dim == 1 && c.boundary.iter().map(|&(_, v)| v).sum::<i64>() != 0 {
                return ChainCheck {
                    passed: false,
                    witness: Some((c.id.clone(), "∅".into())),
                };
            }
        }
        ChainCheck {
            passed: true,
            witness: None,
        }
    }

    /// Copy of a subcomplex as a standalone complex, keeping ids.
    pub fn extract(&self, set: &CellSet) -> Result<CwComplex, CwError> {
        if let Some(i) = self.subcomplex_failure(set) {
            return Err(CwError::NotASubcomplex(self.cells[i].id.clone()));
        }
        let mut out = CwComplex::new();
        let mut order: Vec<usize> = set.iter().collect();
        order.sort_by_key(|&i| (self.cells[i].dim, i));
        for i in order {
            let c = &self.cells[i];
            let b: Vec<(&str, i64)> = c.boundary.iter().map(|&(f, v)| (self.cells[f].id.as_str(), v)).collect();
            out.add_cell(&c.id, c.dim, &b)?;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle() -> CwComplex {
        let mut k = CwComplex::new();
        k.add_cell("a", 0, &[]).unwrap();
        k.add_cell("b", 0, &[]).unwrap();
        k.add_cell("u", 1, &[("a", -1), ("b", 1)]).unwrap();
        k.add_cell("l", 1, &[("a", -1), ("b", 1)]).unwrap();
        k
    }

    #[test]
    fn circle_and_sphere() {
        let mut k = circle();
        assert!(k.verify_chain_complex().passed);
        assert_eq!(k.homology(&k.all(), Ring::Z).sphere_dimension(), Some(1));
        k.add_cell("n", 2, &[("u", 1), ("l", -1)]).unwrap();
        k.add_cell("s", 2, &[("u", 1), ("l", -1)]).unwrap();
        assert!(k.verify_chain_complex().passed);
        assert_eq!(k.homology(&k.all(), Ring::Z).sphere_dimension(), Some(2));
        assert_eq!(k.euler_characteristic(&k.all()), 2);
        assert_eq!(k.homology(&CellSet::new(), Ring::Z).sphere_dimension(), Some(-1));
    }

    #[test]
    fn chain_failures_are_reported() {
        let mut k = circle();
        k.add_cell("bad", 2, &[("u", 1)]).unwrap();
        let rep = k.verify_chain_complex();
        assert!(!rep.passed);
        assert_eq!(rep.witness.unwrap().0, "bad");
        let mut k = CwComplex::new();
        k.add_cell("a", 0, &[]).unwrap();
        k.add_cell("b", 0, &[]).unwrap();
        k.add_cell("e", 1, &[("a", 2)]).unwrap();
        assert!(!k.verify_chain_complex().passed);
    }

    #[test]
    fn construction_errors() {
        let mut k = circle();
        assert!(matches!(k.add_cell("a", 0, &[]), Err(CwError::DuplicateId(_))));
        assert!(matches!(k.add_cell("f", 2, &[("a", 1)]), Err(CwError::BoundaryDimension { .. })));
        assert!(matches!(k.add_cell("g", 1, &[]), Err(CwError::EmptyBoundary(_))));
        assert!(matches!(k.add_cell("h", 1, &[("zz", 1)]), Err(CwError::UnknownCell(_))));
    }

    #[test]
    fn induced_path_on_hexagon() {
        let mut k = CwComplex::new();
        for i in 0..6 {
            k.add_cell(&format!("v{i}"), 0, &[]).unwrap();
        }
        for i in 0..6 {
            let (a, b) = (format!("v{i}"), format!("v{}", (i + 1) % 6));
            k.add_cell(&format!("e{i}"), 1, &[(&a, -1), (&b, 1)]).unwrap();
        }
        let verts = k.cells_from_ids(["v1", "v2", "v3", "v4"]).unwrap();
        let path = k.induced(&verts);
        assert_eq!(k.f_vector(&path), vec![4, 3]);
        assert!(k.homology(&path, Ring::Z).is_acyclic());
        let split = k.cells_from_ids(["v0", "v1", "v3", "v4"]).unwrap();
        assert_eq!(k.components(&k.induced(&split)).len(), 2);
        let j = k.to_json();
        assert_eq!(CwComplex::from_json(&j).unwrap(), k);
        let sub = k.extract(&path).unwrap();
        assert_eq!(sub.len(), 7);
        assert!(k.extract(&verts.union(&k.cells_from_ids(["e0"]).unwrap())).is_err());
    }

    #[test]
    fn cellset_ops() {
        let a: CellSet = [1, 5, 70].into_iter().collect();
        let b: CellSet = [5, 70, 200].into_iter().collect();
        assert_eq!(a.intersection(&b).iter().collect::<Vec<_>>(), vec![5, 70]);
        assert_eq!(a.union(&b).len(), 4);
        assert_eq!(a.difference(&b).iter().collect::<Vec<_>>(), vec![1]);
        assert!(a.intersection(&b).is_subset(&a));
        assert!(CellSet::new().is_empty());
        assert_eq!(b.difference(&b), CellSet::new());
    }
}
