//! Brute-force reference computations used to check the library.
//! Everything here is derived from the list of bases alone.

#![allow(dead_code)]

use homsphere::Matroid;

pub fn popcount(a: u32) -> usize {
    a.count_ones() as usize
}

pub fn rank_from_bases(bases: &[u32], a: u32) -> usize {
    bases.iter().map(|&b| popcount(a & b)).max().unwrap_or(0)
}

pub fn independent_sets(m: &Matroid) -> Vec<u32> {
    let n = m.ground_size();
    let bases = m.bases_masks();
    (0..1u32 << n).filter(|&a| bases.iter().any(|&b| a & !b == 0)).collect()
}

pub fn circuits(m: &Matroid) -> Vec<u32> {
    let n = m.ground_size();
    let bases = m.bases_masks();
    (1..1u32 << n)
        .filter(|&c| {
            rank_from_bases(bases, c) == popcount(c) - 1
                && (0..n).filter(|&x| c >> x & 1 == 1).all(|x| rank_from_bases(bases, c & !(1 << x)) == popcount(c) - 1)
        })
        .collect()
}

/// Faces of `S(M, e)`: subsets of `E - e` containing no `C - e` with `e ∈ C`.
pub fn steiner_faces(m: &Matroid, e: usize) -> Vec<u32> {
    let n = m.ground_size();
    let ports: Vec<u32> = circuits(m)
        .into_iter()
        .filter(|c| c >> e & 1 == 1)
        .map(|c| c & !(1 << e))
        .collect();
    (0..1u32 << n)
        .filter(|&a| a >> e & 1 == 0 && ports.iter().all(|&p| a & p != p))
        .collect()
}

pub fn maximal(sets: &[u32]) -> Vec<u32> {
    let mut out: Vec<u32> = sets
        .iter()
        .copied()
        .filter(|&a| !sets.iter().any(|&b| b != a && a & !b == 0))
        .collect();
    out.sort_unstable();
    out
}

/// Lattice of flats with a Möbius table computed by the defining recursion.
pub struct Flats {
    pub masks: Vec<u32>,
    pub rank: Vec<usize>,
    pub mu: Vec<Vec<i64>>,
}

impl Flats {
    pub fn of(m: &Matroid) -> Self {
        let n = m.ground_size();
        let bases = m.bases_masks();
        let mut flats: Vec<(usize, u32)> = (0..1u32 << n)
            .filter(|&a| {
                let r = rank_from_bases(bases, a);
                (0..n).filter(|&x| a >> x & 1 == 0).all(|x| rank_from_bases(bases, a | 1 << x) > r)
            })
            .map(|a| (rank_from_bases(bases, a), a))
            .collect();
        flats.sort_unstable();
        let masks: Vec<u32> = flats.iter().map(|f| f.1).collect();
        let rank: Vec<usize> = flats.iter().map(|f| f.0).collect();
        let k = masks.len();
        let leq = |i: usize, j: usize| masks[i] & !masks[j] == 0;
        let mut mu = vec![vec![0i64; k]; k];
        for x in 0..k {
            mu[x][x] = 1;
            for y in x + 1..k {
                if leq(x, y) {
                    mu[x][y] = -(x..y).filter(|&z| leq(x, z) && leq(z, y)).map(|z| mu[x][z]).sum::<i64>();
                }
            }
        }
        Flats { masks, rank, mu }
    }

    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn top_rank(&self) -> usize {
        *self.rank.last().unwrap()
    }

    pub fn leq(&self, i: usize, j: usize) -> bool {
        self.masks[i] & !self.masks[j] == 0
    }

    pub fn char_at(&self, t: i64) -> i64 {
        let r = self.top_rank();
        (0..self.len()).map(|x| self.mu[0][x] * t.pow((r - self.rank[x]) as u32)).sum()
    }

    pub fn beta(&self) -> i64 {
        let r = self.top_rank() as u32;
        let s: i64 = (0..self.len()).map(|x| self.rank[x] as i64 * self.mu[0][x]).sum();
        (-1i64).pow(r) * s
    }

    /// Entry `i` counts faces of codimension `i` of the arrangement.
    pub fn face_counts(&self) -> Vec<u64> {
        (0..self.top_rank())
            .map(|i| {
                (0..self.len())
                    .filter(|&x| self.rank[x] == i)
                    .map(|x| (0..self.len()).filter(|&y| self.leq(x, y)).map(|y| self.mu[x][y].unsigned_abs()).sum::<u64>())
                    .sum()
            })
            .collect()
    }

    /// Entry `i` counts bounded faces of codimension `i` relative to the flats avoiding `e`.
    pub fn bounded_counts(&self, e: usize) -> Vec<u64> {
        let off = |x: usize| self.masks[x] >> e & 1 == 0;
        (0..self.top_rank())
            .map(|i| {
                (0..self.len())
                    .filter(|&x| self.rank[x] == i && off(x))
                    .map(|x| {
                        (0..self.len())
                            .filter(|&y| off(y) && self.leq(x, y))
                            .map(|y| self.mu[x][y])
                            .sum::<i64>()
                            .unsigned_abs()
                    })
                    .sum()
            })
            .collect()
    }
}

pub fn strip(mut v: Vec<u64>) -> Vec<u64> {
    while v.last() == Some(&0) {
        v.pop();
    }
    v
}

/// Uniform matroids with `n ≤ 7`, `M(K4)`, Fano and its dual, closed under duality and
/// free coextension up to `max_n` elements, without repeats.
pub fn corpus(max_n: usize) -> Vec<Matroid> {
    let mut base = vec![Matroid::complete_graph(4).unwrap(), Matroid::fano(), Matroid::fano().dual()];
    for n in 1..=7 {
        for r in 0..=n {
            base.push(Matroid::uniform(r, n).unwrap());
        }
    }
    let duals: Vec<Matroid> = base.iter().map(Matroid::dual).collect();
    base.extend(duals);
    let coext: Vec<Matroid> = base
        .iter()
        .filter(|m| m.ground_size() < 8)
        .map(|m| m.free_coextension().unwrap())
        .collect();
    base.extend(coext);
    let mut seen = std::collections::HashSet::new();
    base.into_iter()
        .filter(|m| m.ground_size() <= max_n)
        .filter(|m| seen.insert((m.ground_size(), m.bases_masks().to_vec())))
        .collect()
}

pub fn label(m: &Matroid, e: usize) -> String {
    format!("({}, e={e})", m.name())
}
