//! Exact homology of finite chain complexes: Smith normal form over the
//! integers, rank over GF(2), and reduced homology of augmented complexes.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{CheckedMul, CheckedSub, Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

/// Coefficient ring for homology computations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Ring {
    #[default]
    Z,
    Q,
    Gf2,
}

impl fmt::Display for Ring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Ring::Z => "z",
            Ring::Q => "q",
            Ring::Gf2 => "gf2",
        })
    }
}

impl std::str::FromStr for Ring {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "z" => Ok(Ring::Z),
            "q" => Ok(Ring::Q),
            "gf2" => Ok(Ring::Gf2),
            other => Err(format!("unknown ring {other:?}; expected z, q or gf2")),
        }
    }
}

/// Dense integer matrix, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<i64>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<i64>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged matrix");
        IntMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: i64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn add(&mut self, i: usize, j: usize, v: i64) {
        self.data[i * self.cols + j] += v;
    }

    pub fn to_rows(&self) -> Vec<Vec<i64>> {
        self.data.chunks(self.cols.max(1)).take(self.rows).map(|r| r.to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    /// `self * other`, or `None` on overflow.
    pub fn mul(&self, other: &IntMatrix) -> Option<IntMatrix> {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = IntMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if b != 0 {
                        let v = out.get(i, j).checked_add(a.checked_mul(b)?)?;
                        out.set(i, j, v);
                    }
                }
            }
        }
        Some(out)
    }
}

/// Diagonal of the Smith normal form, restricted to its nonzero entries, in
/// divisibility order. Runs in `i128` and falls back to big integers on overflow.
pub fn smith_invariants(m: &IntMatrix) -> Vec<BigInt> {
    let small: Vec<Vec<i128>> = m.to_rows().into_iter().map(|r| r.into_iter().map(i128::from).collect()).collect();
    if let Some(d) = snf_diagonal(small, m.rows, m.cols) {
        return d.into_iter().map(BigInt::from).collect();
    }
    let big: Vec<Vec<BigInt>> = m.to_rows().into_iter().map(|r| r.into_iter().map(BigInt::from).collect()).collect();
    snf_diagonal(big, m.rows, m.cols).expect("big integers do not overflow")
}

pub fn rank_over_z(m: &IntMatrix) -> usize {
    smith_invariants(m).len()
}

fn snf_diagonal<T>(mut a: Vec<Vec<T>>, rows: usize, cols: usize) -> Option<Vec<T>>
where
    T: Clone + Signed + Integer + CheckedSub + CheckedMul,
{
    let mut diag = Vec::new();
    let mut t = 0;
    while t < rows && t < cols {
        // global pivot: smallest nonzero entry of the trailing block
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if !a[i][j].is_zero() && best.is_none_or(|(bi, bj)| a[i][j].abs() < a[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        a.swap(t, pi);
        for row in a.iter_mut() {
            row.swap(t, pj);
        }
        loop {
            // move the smallest entry of row t / column t to the pivot
            let mut min = (t, t);
            for i in t + 1..rows {
                if !a[i][t].is_zero() && a[i][t].abs() < a[min.0][min.1].abs() {
                    min = (i, t);
                }
            }
            for j in t + 1..cols {
                if !a[t][j].is_zero() && a[t][j].abs() < a[min.0][min.1].abs() {
                    min = (t, j);
                }
            }
            if min.0 != t {
                a.swap(t, min.0);
            } else if min.1 != t {
                for row in a.iter_mut() {
                    row.swap(t, min.1);
                }
            }
            let p = a[t][t].clone();
            let mut clean = true;
            for i in t + 1..rows {
                if a[i][t].is_zero() {
                    continue;
                }
                let q = a[i][t].div_floor(&p);
                for j in t..cols {
                    if a[t][j].is_zero() {
                        continue;
                    }
                    let delta = q.checked_mul(&a[t][j])?;
                    a[i][j] = a[i][j].checked_sub(&delta)?;
                }
                if !a[i][t].is_zero() {
                    clean = false;
                }
            }
            for j in t + 1..cols {
                if a[t][j].is_zero() {
                    continue;
                }
                let q = a[t][j].div_floor(&p);
                for i in t..rows {
                    if a[i][t].is_zero() {
                        continue;
                    }
                    let delta = q.checked_mul(&a[i][t])?;
                    a[i][j] = a[i][j].checked_sub(&delta)?;
                }
                if !a[t][j].is_zero() {
                    clean = false;
                }
            }
            if !clean {
                continue;
            }
            // divisibility: fold a offending row into row t and go again
            let bad = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| !a[i][j].is_multiple_of(&p)));
            match bad {
                Some(i) => {
                    for j in t..cols {
                        a[t][j] = a[t][j].clone() + a[i][j].clone();
                    }
                }
                None => break,
            }
        }
        diag.push(a[t][t].abs());
        t += 1;
    }
    Some(diag)
}

/// Rank over GF(2).
pub fn rank_mod2(m: &IntMatrix) -> usize {
    let words = m.cols.div_ceil(64).max(1);
    let mut rows: Vec<Vec<u64>> = (0..m.rows)
        .map(|i| {
            let mut r = vec![0u64; words];
            for j in 0..m.cols {
                if m.get(i, j).rem_euclid(2) == 1 {
                    r[j / 64] |= 1 << (j % 64);
                }
            }
            r
        })
        .collect();
    let mut rank = 0;
    for col in 0..m.cols {
        let (w, b) = (col / 64, 1u64 << (col % 64));
        let Some(p) = (rank..rows.len()).find(|&i| rows[i][w] & b != 0) else {
            continue;
        };
        rows.swap(rank, p);
        let pivot = rows[rank].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != rank && row[w] & b != 0 {
                for (x, y) in row.iter_mut().zip(&pivot) {
                    *x ^= y;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// A homology group in one degree: free rank and torsion coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HomologyGroup {
    pub degree: i64,
    pub free_rank: usize,
    pub torsion: Vec<u64>,
}

impl HomologyGroup {
    pub fn is_zero(&self) -> bool {
        self.free_rank == 0 && self.torsion.is_empty()
    }
}

/// Reduced homology in every degree from -1 to the top degree of the complex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HomologyProfile {
    pub ring: Ring,
    pub groups: Vec<HomologyGroup>,
}

impl HomologyProfile {
    pub fn group(&self, degree: i64) -> Option<&HomologyGroup> {
        self.groups.iter().find(|g| g.degree == degree)
    }

    pub fn betti(&self, degree: i64) -> usize {
        self.group(degree).map_or(0, |g| g.free_rank)
    }

    pub fn is_acyclic(&self) -> bool {
        self.groups.iter().all(HomologyGroup::is_zero)
    }

    pub fn has_torsion(&self) -> bool {
        self.groups.iter().any(|g| !g.torsion.is_empty())
    }

    pub fn nonzero(&self) -> Vec<&HomologyGroup> {
        self.groups.iter().filter(|g| !g.is_zero()).collect()
    }

    /// `Some(k)` when the only nonzero group is a torsion-free rank-one group in degree `k`.
    pub fn sphere_dimension(&self) -> Option<i64> {
        match self.nonzero().as_slice() {
            [g] if g.free_rank == 1 && g.torsion.is_empty() => Some(g.degree),
            _ => None,
        }
    }

    /// True when the homology is concentrated in `degree`, free of rank `rank`.
    pub fn is_wedge_of_spheres(&self, degree: i64, rank: usize) -> bool {
        self.groups.iter().all(|g| {
            if g.degree == degree {
                g.free_rank == rank && g.torsion.is_empty()
            } else {
                g.is_zero()
            }
        }) && (rank == 0 || self.group(degree).is_some())
    }
}

/// An augmented chain complex `C_top -> ... -> C_0 -> C_{-1}`.
///
/// `dims[k]` is the rank of `C_{k-1}`; `boundaries[k]` is the matrix of
/// `∂ : C_k -> C_{k-1}` with `dims[k]` rows and `dims[k + 1]` columns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainComplex {
    dims: Vec<usize>,
    boundaries: Vec<IntMatrix>,
}

impl ChainComplex {
    /// `dims` starts at degree -1; `boundaries[k]` maps degree `k` to `k - 1`.
    pub fn new(dims: Vec<usize>, boundaries: Vec<IntMatrix>) -> Self {
        assert_eq!(boundaries.len() + 1, dims.len(), "one boundary per degree >= 0");
        for (k, b) in boundaries.iter().enumerate() {
            assert_eq!((b.rows(), b.cols()), (dims[k], dims[k + 1]), "boundary {k} has wrong shape");
        }
        ChainComplex { dims, boundaries }
    }

    pub fn top_degree(&self) -> i64 {
        self.dims.len() as i64 - 2
    }

    pub fn rank_in_degree(&self, degree: i64) -> usize {
        usize::try_from(degree + 1).ok().and_then(|k| self.dims.get(k)).copied().unwrap_or(0)
    }

    /// `∂ : C_degree -> C_{degree-1}`, for `degree >= 0`.
    pub fn boundary(&self, degree: i64) -> Option<&IntMatrix> {
        usize::try_from(degree).ok().and_then(|k| self.boundaries.get(k))
    }

    /// First degree `k` with `∂_{k-1} ∘ ∂_k ≠ 0`.
    pub fn square_zero_failure(&self) -> Option<i64> {
        for k in 1..self.boundaries.len() {
            match self.boundaries[k - 1].mul(&self.boundaries[k]) {
                Some(p) if p.is_zero() => {}
                _ => return Some(k as i64),
            }
        }
        None
    }

    pub fn homology(&self, ring: Ring) -> HomologyProfile {
        let n = self.boundaries.len();
        // rank and invariants of ∂_k for k = 0..n
        let mut ranks = Vec::with_capacity(n);
        let mut torsion = Vec::with_capacity(n);
        for b in &self.boundaries {
            match ring {
                Ring::Gf2 => {
                    ranks.push(rank_mod2(b));
                    torsion.push(Vec::new());
                }
                Ring::Z | Ring::Q => {
                    let inv = smith_invariants(b);
                    ranks.push(inv.len());
                    let t = if ring == Ring::Z {
                        inv.iter()
                            .filter(|d| !num_traits::One::is_one(*d))
                            .map(|d| d.to_u64().expect("torsion coefficient exceeds u64"))
                            .collect()
                    } else {
                        Vec::new()
                    };
                    torsion.push(t);
                }
            }
        }
        let mut groups = Vec::new();
        for deg in -1..=(n as i64 - 1) {
            let k = (deg + 1) as usize;
            let dim = self.dims[k];
            let out_rank = if deg >= 0 { ranks[deg as usize] } else { 0 };
            let in_rank = ranks.get(k).copied().unwrap_or(0);
            groups.push(HomologyGroup {
                degree: deg,
                free_rank: dim - out_rank - in_rank,
                torsion: torsion.get(k).cloned().unwrap_or_default(),
            });
        }
        HomologyProfile { ring, groups }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inv(rows: Vec<Vec<i64>>) -> Vec<i64> {
        smith_invariants(&IntMatrix::from_rows(rows))
            .into_iter()
            .map(|d| d.to_i64().unwrap())
            .collect()
    }

    #[test]
    fn smith_small_cases() {
        assert_eq!(inv(vec![vec![2, 4], vec![6, 8]]), vec![2, 4]);
        assert_eq!(inv(vec![vec![2, 0], vec![0, 3]]), vec![1, 6]);
        assert_eq!(inv(vec![vec![0, 0], vec![0, 0]]), Vec::<i64>::new());
        assert_eq!(inv(vec![vec![1, -1, 0], vec![0, 1, -1], vec![-1, 0, 1]]), vec![1, 1]);
    }

    #[test]
    fn gf2_rank() {
        let m = IntMatrix::from_rows(vec![vec![2, 0], vec![0, 3]]);
        assert_eq!(rank_mod2(&m), 1);
        assert_eq!(rank_over_z(&m), 2);
    }

    #[test]
    fn projective_plane_like_torsion() {
        // one vertex, one edge (loop), one 2-cell attached with degree 2
        let d0 = IntMatrix::from_rows(vec![vec![1]]);
        let d1 = IntMatrix::from_rows(vec![vec![0]]);
        let d2 = IntMatrix::from_rows(vec![vec![2]]);
        let c = ChainComplex::new(vec![1, 1, 1, 1], vec![d0, d1, d2]);
        assert_eq!(c.square_zero_failure(), None);
        let z = c.homology(Ring::Z);
        assert_eq!(z.group(1).unwrap().torsion, vec![2]);
        assert_eq!(z.betti(1), 0);
        let f2 = c.homology(Ring::Gf2);
        assert_eq!(f2.betti(1), 1);
        assert_eq!(f2.betti(2), 1);
        assert!(c.homology(Ring::Q).is_acyclic());
    }

    #[test]
    fn big_entries_fall_back() {
        let big = 1i64 << 62;
        let m = IntMatrix::from_rows(vec![vec![big, big - 1], vec![big - 1, big - 2]]);
        let d = smith_invariants(&m);
        assert_eq!(d.len(), 2);
        assert_eq!(d[0], BigInt::from(1));
        assert_eq!(d[1], BigInt::from(1));
    }
}
