//! Simplicial complexes given by facets, ports and matroid Steiner complexes,
//! and their reduced homology.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::bits;
use crate::homology::{ChainComplex, HomologyProfile, IntMatrix, Ring};
use crate::lattice::GeometricLattice;
use crate::matroid::{Matroid, MatroidError};

/// A simplicial complex on a vertex universe (a subset of `0..n`), stored by
/// its facets. No facets at all is the void complex; a single empty facet is
/// the complex `{∅}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimplicialComplex {
    n: usize,
    vertices: u32,
    facets: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexJson {
    pub n: usize,
    pub facets: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub void: Option<bool>,
    /// Vertex universe when it is a proper subset of `0..n`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<usize>>,
}

fn maximal(sets: impl IntoIterator<Item = u32>) -> Vec<u32> {
    let all: BTreeSet<u32> = sets.into_iter().collect();
    let mut out: Vec<u32> = all
        .iter()
        .copied()
        .filter(|&f| !all.iter().any(|&g| g != f && bits::is_subset(f, g)))
        .collect();
    out.sort_by_key(|&f| bits::lex_key(f));
    out
}

impl SimplicialComplex {
    /// Complex on universe `vertices ⊆ 0..n` generated by `faces`; non-maximal
    /// generators are dropped.
    pub fn new(n: usize, vertices: u32, faces: impl IntoIterator<Item = u32>) -> Self {
        let facets = maximal(faces);
        assert!(
            facets.iter().all(|&f| bits::is_subset(f, vertices)),
            "facet outside the vertex universe"
        );
        SimplicialComplex { n, vertices, facets }
    }

    pub fn void(n: usize) -> Self {
        Self::new(n, bits::full(n), [])
    }

    /// The full simplex on `vertices`.
    pub fn simplex(n: usize, vertices: u32) -> Self {
        Self::new(n, vertices, [vertices])
    }

    pub fn from_json(j: &ComplexJson) -> Result<Self, MatroidError> {
        let universe = match &j.vertices {
            Some(v) => bits::from_elements(v, j.n),
            None => Ok(bits::full(j.n)),
        }
        .map_err(|element| MatroidError::IndexOutOfRange { element, n: j.n })?;
        let facets = j
            .facets
            .iter()
            .map(|f| bits::from_elements(f, j.n))
            .collect::<Result<Vec<u32>, usize>>()
            .map_err(|element| MatroidError::IndexOutOfRange { element, n: j.n })?;
        if j.void == Some(true) && !facets.is_empty() {
            return Err(MatroidError::Malformed("void complex with facets".into()));
        }
        if facets.iter().any(|&f| !bits::is_subset(f, universe)) {
            return Err(MatroidError::Malformed("facet outside the vertex universe".into()));
        }
        Ok(Self::new(j.n, universe, facets))
    }

    pub fn to_json(&self) -> ComplexJson {
        ComplexJson {
            n: self.n,
            facets: self.facets.iter().map(|&f| bits::elements(f)).collect(),
            void: self.is_void().then_some(true),
            vertices: (self.vertices != bits::full(self.n)).then(|| bits::elements(self.vertices)),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn vertex_universe(&self) -> u32 {
        self.vertices
    }

    pub fn facets(&self) -> &[u32] {
        &self.facets
    }

    pub fn facet_lists(&self) -> Vec<Vec<usize>> {
        self.facets.iter().map(|&f| bits::elements(f)).collect()
    }

    pub fn is_void(&self) -> bool {
        self.facets.is_empty()
    }

    pub fn contains(&self, face: u32) -> bool {
        self.facets.iter().any(|&f| bits::is_subset(face, f))
    }

    pub fn dimension(&self) -> i64 {
        self.facets.iter().map(|&f| bits::size(f) as i64 - 1).max().unwrap_or(-2)
    }

    /// All faces grouped by dimension: `faces()[k]` holds the `(k-1)`-faces,
    /// so index 0 is `[∅]` for a non-void complex.
    pub fn faces(&self) -> Vec<Vec<u32>> {
        if self.is_void() {
            return Vec::new();
        }
        let mut all = BTreeSet::new();
        for &f in &self.facets {
            // enumerate submasks of f
            let mut s = f;
            loop {
                all.insert(s);
                if s == 0 {
                    break;
                }
                s = (s - 1) & f;
            }
        }
        let top = self.dimension();
        let mut by_dim: Vec<Vec<u32>> = vec![Vec::new(); (top + 2) as usize];
        for s in all {
            by_dim[bits::size(s)].push(s);
        }
        for layer in &mut by_dim {
            layer.sort_by_key(|&s| bits::lex_key(s));
        }
        by_dim
    }

    /// `f_{-1}, f_0, f_1, ...`
    pub fn f_vector(&self) -> Vec<usize> {
        self.faces().iter().map(Vec::len).collect()
    }

    /// Faces contained in `sigma`.
    pub fn restrict(&self, sigma: u32) -> SimplicialComplex {
        if self.is_void() {
            return Self::new(self.n, self.vertices, []);
        }
        Self::new(self.n, self.vertices, self.facets.iter().map(|&f| f & sigma))
    }

    /// Minimal subsets of the vertex universe that are not faces.
    pub fn minimal_nonfaces(&self) -> Vec<u32> {
        if self.is_void() {
            return vec![0];
        }
        let u = self.vertices;
        let mut out = Vec::new();
        let mut s = u;
        loop {
            if !self.contains(s) && bits::ones(s).all(|x| self.contains(s & !(1 << x))) {
                out.push(s);
            }
            if s == 0 {
                break;
            }
            s = (s - 1) & u;
        }
        out.sort_by_key(|&s| (bits::size(s), bits::lex_key(s)));
        out
    }

    pub fn chain_complex(&self) -> ChainComplex {
        let faces = self.faces();
        if faces.is_empty() {
            return ChainComplex::new(vec![0], Vec::new());
        }
        let dims: Vec<usize> = faces.iter().map(Vec::len).collect();
        let mut boundaries = Vec::new();
        for k in 1..faces.len() {
            let lower = &faces[k - 1];
            let mut m = IntMatrix::zeros(lower.len(), faces[k].len());
            for (col, &s) in faces[k].iter().enumerate() {
                for (pos, x) in bits::ones(s).enumerate() {
                    let row = lower.binary_search_by_key(&bits::lex_key(s & !(1 << x)), |&t| bits::lex_key(t));
                    let row = row.expect("boundary face present");
                    m.set(row, col, if pos % 2 == 0 { 1 } else { -1 });
                }
            }
            boundaries.push(m);
        }
        ChainComplex::new(dims, boundaries)
    }

    pub fn reduced_homology(&self, ring: Ring) -> HomologyProfile {
        self.chain_complex().homology(ring)
    }

    /// Reduced Euler characteristic `Σ (-1)^k f_k` over `k >= -1`.
    pub fn reduced_euler(&self) -> i64 {
        self.f_vector()
            .iter()
            .enumerate()
            .map(|(k, &f)| if k % 2 == 0 { -(f as i64) } else { f as i64 })
            .sum()
    }
}

fn check_element(m: &Matroid, e: usize) -> Result<(), MatroidError> {
    if e >= m.ground_size() {
        Err(MatroidError::IndexOutOfRange {
            element: e,
            n: m.ground_size(),
        })
    } else {
        Ok(())
    }
}

/// `{C - e : C a circuit containing e}`, as masks.
pub fn port(m: &Matroid, e: usize) -> Result<Vec<u32>, MatroidError> {
    check_element(m, e)?;
    let bit = 1u32 << e;
    let mut ports: Vec<u32> = m
        .circuit_masks()
        .iter()
        .filter(|&&c| c & bit != 0)
        .map(|&c| c & !bit)
        .collect();
    ports.sort_by_key(|&p| (bits::size(p), bits::lex_key(p)));
    debug_assert!(ports
        .iter()
        .all(|&p| !ports.iter().any(|&q| q != p && bits::is_subset(q, p))));
    Ok(ports)
}

/// Subsets of `E - e` containing no port.
pub fn steiner_complex(m: &Matroid, e: usize) -> Result<SimplicialComplex, MatroidError> {
    let ports = port(m, e)?;
    let universe = m.ground_mask() & !(1 << e);
    let is_face = |f: u32| !ports.iter().any(|&p| bits::is_subset(p, f));
    let mut facets = Vec::new();
    let mut s = universe;
    loop {
        if is_face(s) && bits::ones(universe & !s).all(|x| !is_face(s | 1 << x)) {
            facets.push(s);
        }
        if s == 0 {
            break;
        }
        s = (s - 1) & universe;
    }
    Ok(SimplicialComplex::new(m.ground_size(), universe, facets))
}

/// Independent sets of `m`; facets are the bases.
pub fn independence_complex(m: &Matroid) -> SimplicialComplex {
    SimplicialComplex::new(m.ground_size(), m.ground_mask(), m.bases_masks().iter().copied())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SteinerReport {
    pub element: usize,
    pub rank: usize,
    pub beta: u64,
    pub sphere_degree: i64,
    pub ports: Vec<Vec<usize>>,
    pub facets: Vec<Vec<usize>>,
    pub homology: HomologyProfile,
    pub passed: bool,
}

/// Checks that `S(M, e)` has the homology of a wedge of `β(M)` spheres of
/// dimension `r - 2`.
pub fn verify_steiner_type(m: &Matroid, e: usize) -> Result<SteinerReport, MatroidError> {
    let complex = steiner_complex(m, e)?;
    let lattice = GeometricLattice::from_matroid(m).map_err(|_| MatroidError::GroundTooLarge(m.ground_size()))?;
    let beta = lattice.beta_invariant();
    let degree = m.rank() as i64 - 2;
    let homology = complex.reduced_homology(Ring::Z);
    let passed = homology.is_wedge_of_spheres(degree, beta as usize);
    Ok(SteinerReport {
        element: e,
        rank: m.rank(),
        beta,
        sphere_degree: degree,
        ports: port(m, e)?.into_iter().map(bits::elements).collect(),
        facets: complex.facet_lists(),
        homology,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ports() {
        let u23 = Matroid::uniform(2, 3).unwrap();
        assert_eq!(port(&u23, 0).unwrap(), vec![0b110]);
        let u13 = Matroid::uniform(1, 3).unwrap();
        assert_eq!(port(&u13, 0).unwrap(), vec![0b010, 0b100]);
        let u33 = Matroid::uniform(3, 3).unwrap();
        assert!(port(&u33, 1).unwrap().is_empty());
        assert!(port(&u33, 3).is_err());
    }

    #[test]
    fn steiner_and_independence() {
        let u23 = Matroid::uniform(2, 3).unwrap();
        let s = steiner_complex(&u23, 0).unwrap();
        assert_eq!(s.facet_lists(), vec![vec![1], vec![2]]);
        let i12 = independence_complex(&Matroid::uniform(1, 2).unwrap());
        assert_eq!(i12.facet_lists(), vec![vec![0], vec![1]]);
        // coloop: the port is empty and the complex is a full simplex
        let u33 = Matroid::uniform(3, 3).unwrap();
        assert_eq!(steiner_complex(&u33, 0).unwrap().facet_lists(), vec![vec![1, 2]]);
    }

    #[test]
    fn homology_basics() {
        let hollow = SimplicialComplex::new(3, 0b111, [0b011, 0b101, 0b110]);
        let h = hollow.reduced_homology(Ring::Z);
        assert_eq!(h.sphere_dimension(), Some(1));
        let two_points = SimplicialComplex::new(2, 0b11, [0b01, 0b10]);
        assert_eq!(two_points.reduced_homology(Ring::Z).sphere_dimension(), Some(0));
        let empty_face = SimplicialComplex::new(2, 0b11, [0]);
        assert_eq!(empty_face.reduced_homology(Ring::Z).sphere_dimension(), Some(-1));
        assert!(SimplicialComplex::void(2).reduced_homology(Ring::Z).is_acyclic());
    }

    #[test]
    fn fano_dual_steiner_is_wedge_of_three_2_spheres() {
        let fd = Matroid::fano().dual();
        for e in 0..7 {
            let rep = verify_steiner_type(&fd, e).unwrap();
            assert!(rep.passed, "{rep:?}");
            assert_eq!(rep.beta, 3);
            assert_eq!(rep.homology.betti(2), 3);
        }
    }

    #[test]
    fn steiner_examples() {
        assert!(verify_steiner_type(&Matroid::uniform(2, 3).unwrap(), 0).unwrap().passed);
        for e in 0..3 {
            assert!(verify_steiner_type(&Matroid::uniform(3, 3).unwrap(), e).unwrap().passed);
        }
    }

    #[test]
    fn nonfaces_and_restriction() {
        let s = steiner_complex(&Matroid::uniform(2, 3).unwrap(), 0).unwrap();
        assert_eq!(s.minimal_nonfaces(), vec![0b110]);
        let r = s.restrict(0b010);
        assert_eq!(r.facet_lists(), vec![vec![1]]);
        assert_eq!(s.restrict(0).facet_lists(), vec![Vec::<usize>::new()]);
        let j = s.to_json();
        assert_eq!(SimplicialComplex::from_json(&j).unwrap(), s);
    }
}
