mod oracle;

use std::collections::BTreeSet;

use homsphere::builder::{build, postconditions, BuildPlan, Policy};
use homsphere::{CellSet, PointedLattice, GeometricLattice, Matroid, Ring, SimplicialComplex};
use oracle::{popcount, Flats};
use proptest::prelude::*;

fn gf2_matroid() -> impl Strategy<Value = Matroid> {
    prop::collection::vec(0u32..16, 1..=7).prop_map(|cols| {
        let cols: Vec<String> = cols.iter().map(|c| format!("{c:04b}")).collect();
        Matroid::from_gf2_columns(&cols).unwrap()
    })
}

fn graph() -> impl Strategy<Value = Vec<[usize; 2]>> {
    prop::collection::vec((0usize..5, 0usize..5), 1..=8).prop_map(|es| es.into_iter().map(|(u, v)| [u, v]).collect())
}

/// Whether the edges in `a` form a forest, by counting components with a depth-first search.
fn is_forest(edges: &[[usize; 2]], a: u32) -> bool {
    let chosen: Vec<[usize; 2]> = (0..edges.len()).filter(|&i| a >> i & 1 == 1).map(|i| edges[i]).collect();
    if chosen.iter().any(|e| e[0] == e[1]) {
        return false;
    }
    let verts: BTreeSet<usize> = chosen.iter().flatten().copied().collect();
    let mut seen = BTreeSet::new();
    let mut components = 0;
    for &s in &verts {
        if !seen.insert(s) {
            continue;
        }
        components += 1;
        let mut stack = vec![s];
        while let Some(v) = stack.pop() {
            for e in &chosen {
                for (x, y) in [(e[0], e[1]), (e[1], e[0])] {
                    if x == v && seen.insert(y) {
                        stack.push(y);
                    }
                }
            }
        }
    }
    chosen.len() + components == verts.len()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closure_is_a_closure_operator(m in gf2_matroid(), a in any::<u32>(), b in any::<u32>()) {
        let full = m.ground_mask();
        let (a, b) = (a & full, b & full);
        let ca = m.closure_mask(a);
        prop_assert_eq!(ca & a, a);
        prop_assert_eq!(m.closure_mask(ca), ca);
        prop_assert_eq!(m.rank_mask(ca), m.rank_mask(a));
        if a & !b == 0 {
            prop_assert_eq!(ca & !m.closure_mask(b), 0);
        }
    }

    #[test]
    fn rank_is_semimodular(m in gf2_matroid(), a in any::<u32>(), b in any::<u32>()) {
        let full = m.ground_mask();
        let (a, b) = (a & full, b & full);
        prop_assert!(m.rank_mask(a) + m.rank_mask(b) >= m.rank_mask(a | b) + m.rank_mask(a & b));
        prop_assert_eq!(m.rank_mask(a), oracle::rank_from_bases(m.bases_masks(), a));
    }

    #[test]
    fn duality_is_an_involution(m in gf2_matroid(), a in any::<u32>()) {
        let full = m.ground_mask();
        let a = a & full;
        let d = m.dual();
        let dd = d.dual();
        prop_assert_eq!(dd.bases_masks(), m.bases_masks());
        prop_assert_eq!(d.rank_mask(a), popcount(a) + m.rank_mask(full & !a) - m.rank());
    }

    #[test]
    fn graphic_matroids_are_forests(edges in graph()) {
        let m = Matroid::from_graph(&edges).unwrap();
        for a in 0..1u32 << edges.len() {
            prop_assert_eq!(m.is_independent_mask(a), is_forest(&edges, a), "edge set {:#b}", a);
        }
    }

    #[test]
    fn circuits_match_brute_force(m in gf2_matroid()) {
        let mut ours = m.circuit_masks().to_vec();
        ours.sort_unstable();
        prop_assert_eq!(ours, oracle::circuits(&m));
    }

    #[test]
    fn mobius_satisfies_its_recursion(m in gf2_matroid()) {
        let l = GeometricLattice::from_matroid(&m).unwrap();
        let o = Flats::of(&m);
        prop_assert_eq!(l.len(), o.len());
        for x in 0..o.len() {
            let lx = l.index_of(o.masks[x]).unwrap();
            prop_assert_eq!(l.rank_of(lx), o.rank[x]);
            for y in 0..o.len() {
                let ly = l.index_of(o.masks[y]).unwrap();
                let expected = if o.leq(x, y) { o.mu[x][y] } else { 0 };
                prop_assert_eq!(l.mobius(lx, ly), expected);
            }
        }
        if l.rank() > 0 {
            prop_assert_eq!(l.characteristic_at(1), 0);
        }
        prop_assert_eq!(l.beta_invariant() as i64, o.beta());
    }

    #[test]
    fn euler_characteristic_matches_homology(n in 1usize..=6, faces in prop::collection::vec(any::<u32>(), 0..6)) {
        let full = (1u32 << n) - 1;
        let k = SimplicialComplex::new(n, full, faces.into_iter().map(|f| f & full));
        for ring in [Ring::Q, Ring::Gf2, Ring::Z] {
            let h = k.reduced_homology(ring);
            let chi: i64 = (-1..=n as i64).map(|d| if d.rem_euclid(2) == 0 { h.betti(d) as i64 } else { -(h.betti(d) as i64) }).sum();
            prop_assert_eq!(chi, k.reduced_euler());
        }
    }

    #[test]
    fn cell_sets_behave_like_sets(a in prop::collection::btree_set(0usize..200, 0..40), b in prop::collection::btree_set(0usize..200, 0..40)) {
        let sa: CellSet = a.iter().copied().collect();
        let sb: CellSet = b.iter().copied().collect();
        let as_set = |s: &CellSet| s.iter().collect::<BTreeSet<usize>>();
        prop_assert_eq!(as_set(&sa.union(&sb)), a.union(&b).copied().collect::<BTreeSet<_>>());
        prop_assert_eq!(as_set(&sa.intersection(&sb)), a.intersection(&b).copied().collect::<BTreeSet<_>>());
        prop_assert_eq!(as_set(&sa.difference(&sb)), a.difference(&b).copied().collect::<BTreeSet<_>>());
        prop_assert_eq!(sa.is_subset(&sb), a.is_subset(&b));
        prop_assert_eq!(sa.len(), a.len());
        prop_assert_eq!(sa.first(), a.first().copied());
    }

    #[test]
    fn built_arrangements_are_spheres(cols in prop::collection::vec(1u32..8, 1..=6), e in 0usize..6, seed in 0u64..4) {
        let cols: Vec<String> = cols.iter().map(|c| format!("{c:03b}")).collect();
        let m = Matroid::from_gf2_columns(&cols).unwrap();
        let e = e % m.ground_size();
        let pl = PointedLattice::from_matroid(&m, e).unwrap();
        let policy = if seed == 0 { Policy::Lex } else { Policy::Seeded };
        let built = build(&BuildPlan::new(pl.clone()).with_policy(policy, seed)).unwrap();
        let a = &built.arrangement;
        let d = m.rank() as i64 - 1;
        prop_assert_eq!(a.ambient.euler_characteristic(&a.ambient.all()), 1 + (-1i64).pow(d as u32));
        prop_assert!(postconditions(&pl, a).passed);
    }
}
