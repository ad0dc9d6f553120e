mod oracle;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use homsphere::arrangement::ArrangementJson;
use homsphere::builder::{build, postconditions, BuildPlan, Built, Policy};
use homsphere::resolution::{betti_hochster_steiner, betti_lattice, cellular_resolution, stanley_consistency, verify_resolution};
use homsphere::simplicial::{independence_complex, steiner_complex};
use homsphere::{Matroid, PointedLattice, Ring, SimplicialComplex, SphereArrangement};
use oracle::{label, Flats};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let t = start.elapsed();
    ensure(t < limit, || format!("took {:.2?}, limit {:?}", t, limit))
}

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

/// Pairs `(M, e)` from the corpus with `e` not a loop.
fn pairs(max_n: usize) -> Vec<(Matroid, usize)> {
    oracle::corpus(max_n)
        .into_iter()
        .flat_map(|m| (0..m.ground_size()).filter(|&e| !m.is_loop(e)).map(|e| (m.clone(), e)).collect::<Vec<_>>())
        .collect()
}

struct Case {
    m: Matroid,
    e: usize,
    seed: u64,
    pl: PointedLattice,
    built: Built,
}

fn build_sweep(policy: Policy, seed: u64) -> Result<Vec<Case>, String> {
    let mut out = Vec::new();
    for (m, e) in pairs(8) {
        if m.rank() == 0 || m.rank() > 3 {
            continue;
        }
        let pl = PointedLattice::from_matroid(&m, e).map_err(|x| x.to_string())?;
        let built = build(&BuildPlan::new(pl.clone()).with_policy(policy, seed))
            .map_err(|x| format!("{}: {x}", label(&m, e)))?;
        out.push(Case { m, e, seed, pl, built });
    }
    Ok(out)
}

static LEX: OnceLock<Result<Vec<Case>, String>> = OnceLock::new();

fn lex_sweep() -> Result<&'static [Case], String> {
    LEX.get_or_init(|| build_sweep(Policy::Lex, 0)).as_deref().map_err(Clone::clone)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut count = 0;
    for (m, e) in pairs(8) {
        let flats = Flats::of(&m);
        let beta = flats.beta();
        let degree = m.rank() as i64 - 2;
        let faces = oracle::steiner_faces(&m, e);
        let verts = faces.iter().fold(0u32, |a, &f| a | f);
        let ours = steiner_complex(&m, e).map_err(|x| x.to_string())?;
        let theirs = SimplicialComplex::new(m.ground_size(), verts, faces.iter().copied());
        ensure(ours.facets() == theirs.facets(), || format!("{}: facets differ", label(&m, e)))?;
        let h = ours.reduced_homology(Ring::Z);
        ensure(h.is_wedge_of_spheres(degree, beta as usize), || {
            format!("{}: expected rank {beta} in degree {degree}, got {:?}", label(&m, e), h.nonzero())
        })?;
        count += 1;
    }
    within(start, Duration::from_secs(10))?;
    Ok(format!("{count} pairs"))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let corpus = oracle::corpus(7);
    for m in &corpus {
        let coext = m.free_coextension().map_err(|x| x.to_string())?;
        let s = steiner_complex(&coext, m.ground_size()).map_err(|x| x.to_string())?;
        let delta = independence_complex(m);
        ensure(s.facets() == delta.facets(), || format!("{}: S(M~, e~) != Δ(M)", m.name()))?;
        let bases = oracle::maximal(&oracle::independent_sets(m));
        let mut facets = s.facets().to_vec();
        facets.sort_unstable();
        ensure(facets == bases, || format!("{}: facets are not the bases", m.name()))?;
    }
    within(start, Duration::from_secs(1))?;
    Ok(format!("{} matroids", corpus.len()))
}

fn criterion_3() -> Outcome {
    let u25 = Matroid::uniform(2, 5).unwrap();
    let b = build(&BuildPlan::new(PointedLattice::from_matroid(&u25, 0).unwrap())).map_err(|x| x.to_string())?;
    let a = &b.arrangement;
    let all = a.ambient.all();
    ensure(a.ambient.f_vector(&all) == vec![10, 10], || format!("U2,5 f-vector {:?}", a.ambient.f_vector(&all)))?;
    let h = a.ambient.homology(&all, Ring::Z);
    ensure(h.sphere_dimension() == Some(1), || "U2,5 ambient is not a homology circle".into())?;
    let il = a.intersection_lattice().map_err(|x| x.to_string())?;
    let [c1, c2] = a.bounded_components(&il, 0).map_err(|x| x.to_string())?;
    for c in [&c1, &c2] {
        ensure(a.ambient.f_vector(c) == vec![4, 3], || format!("bounded f-vector {:?}", a.ambient.f_vector(c)))?;
        ensure(a.ambient.homology(c, Ring::Z).is_acyclic(), || "bounded part is not acyclic".into())?;
    }

    let u23 = Matroid::uniform(2, 3).unwrap();
    let b = build(&BuildPlan::new(PointedLattice::from_matroid(&u23, 0).unwrap())).map_err(|x| x.to_string())?;
    let text = std::fs::read_to_string(fixtures().join("a1.json")).map_err(|x| x.to_string())?;
    let j: ArrangementJson = serde_json::from_str(&text).map_err(|x| x.to_string())?;
    let a1 = SphereArrangement::from_json(&j).map_err(|x| x.to_string())?;
    let ours = b.arrangement.ambient.f_vector(&b.arrangement.ambient.all());
    let theirs = a1.ambient.f_vector(&a1.ambient.all());
    ensure(ours == vec![6, 6] && ours == theirs, || format!("U2,3 {ours:?} vs A_1 {theirs:?}"))?;
    let per_sphere = |a: &SphereArrangement| -> Vec<Vec<usize>> { a.spheres.iter().map(|s| a.ambient.f_vector(s)).collect() };
    ensure(per_sphere(&b.arrangement) == per_sphere(&a1), || "sphere cell counts differ from A_1".into())?;
    let il1 = a1.intersection_lattice().map_err(|x| x.to_string())?;
    ensure(il1.lattice.same_labeled(&b.arrangement.intersection_lattice().map_err(|x| x.to_string())?.lattice), || {
        "intersection lattices differ".into()
    })?;
    Ok("U2,5 (10,10) bounded (4,3); U2,3 (6,6) = A_1".into())
}

fn check_counts(c: &Case) -> Result<(), String> {
    let a = &c.built.arrangement;
    let il = a.intersection_lattice().map_err(|x| x.to_string())?;
    let flats = Flats::of(&c.m);
    let d = flats.top_rank() as i64 - 1;
    let f = a.ambient.f_vector(&a.ambient.all());
    let expected: Vec<usize> = flats.face_counts().into_iter().rev().map(|x| x as usize).collect();
    let id = || format!("{} seed {}", label(&c.m, c.e), c.seed);
    ensure(f == expected, || format!("{}: f-vector {f:?}, expected {expected:?}", id()))?;
    ensure(f[d as usize] as i64 == flats.char_at(-1).abs(), || format!("{}: top cells != |p(L;-1)|", id()))?;
    let rep = a.cell_counts(&il);
    ensure(rep.tau_sum_ok && rep.tau_inversion_ok, || format!("{}: τ identities fail: {:?}", id(), rep.witness))?;
    ensure(rep.euler == 1 + (-1i64).pow(d as u32), || format!("{}: Euler characteristic {}", id(), rep.euler))?;
    ensure(rep.passed, || format!("{}: count report failed", id()))
}

fn fano_case(cases: &[Case]) -> Result<&Case, String> {
    cases
        .iter()
        .find(|c| c.m.name() == "Fano" && c.e == 0)
        .ok_or_else(|| "no Fano case".to_string())
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let cases = lex_sweep()?;
    for c in cases {
        check_counts(c)?;
    }
    within(start, Duration::from_secs(30))?;
    let fano = &fano_case(cases)?.built.arrangement;
    let all = fano.ambient.all();
    ensure(fano.ambient.f_vector(&all) == vec![14, 42, 30], || format!("Fano f-vector {:?}", fano.ambient.f_vector(&all)))?;
    ensure(fano.ambient.euler_characteristic(&all) == 2, || "Fano Euler characteristic".into())?;
    Ok(format!("{} arrangements; Fano (14,42,30), χ = 2", cases.len()))
}

fn check_link(c: &Case) -> Result<usize, String> {
    let a = &c.built.arrangement;
    let il = a.intersection_lattice().map_err(|x| x.to_string())?;
    let flats = Flats::of(&c.m);
    let d = flats.top_rank() as i64 - 1;
    let rank = flats.char_at(-1).unsigned_abs() as usize - 1;
    let h = a.ambient.homology(&a.union_of_spheres(), Ring::Z);
    ensure(h.is_wedge_of_spheres(d - 1, rank), || {
        format!("{} seed {}: link homology {:?}, expected rank {rank} in degree {}", label(&c.m, c.e), c.seed, h.nonzero(), d - 1)
    })?;
    ensure(a.link_homology(&il).passed, || format!("{}: link report failed", label(&c.m, c.e)))?;
    Ok(rank)
}

fn criterion_5() -> Outcome {
    let cases = lex_sweep()?;
    for c in cases {
        check_link(c)?;
    }
    let rank = check_link(fano_case(cases)?)?;
    ensure(rank == 29, || format!("Fano link rank {rank}"))?;
    Ok(format!("{} arrangements; Fano rank 29", cases.len()))
}

fn check_bounded(c: &Case) -> Result<Vec<usize>, String> {
    let a = &c.built.arrangement;
    let il = a.intersection_lattice().map_err(|x| x.to_string())?;
    let flats = Flats::of(&c.m);
    let d = flats.top_rank() as i64 - 1;
    let expected: Vec<usize> = flats.bounded_counts(c.e).into_iter().rev().map(|x| x as usize).collect();
    let id = || format!("{} seed {}", label(&c.m, c.e), c.seed);
    let comps = a.bounded_components(&il, 0).map_err(|x| format!("{}: {x}", id()))?;
    let mut f0 = Vec::new();
    for b in &comps {
        let mut f = a.ambient.f_vector(b);
        f.resize(d as usize + 1, 0);
        ensure(f == expected, || format!("{}: bounded f-vector {f:?}, expected {expected:?}", id()))?;
        ensure(f[d as usize] as i64 == flats.beta(), || format!("{}: bounded top cells != β", id()))?;
        ensure(a.ambient.homology(b, Ring::Z).is_acyclic(), || format!("{}: bounded part not acyclic", id()))?;
        f0 = f;
    }
    let rep = a.bounded_counts(&il, 0).map_err(|x| x.to_string())?;
    ensure(rep.passed, || format!("{}: bounded report failed", id()))?;
    Ok(f0)
}

fn criterion_6() -> Outcome {
    let cases = lex_sweep()?;
    for c in cases {
        check_bounded(c)?;
    }
    let f = check_bounded(fano_case(cases)?)?;
    ensure(f == vec![4, 6, 3], || format!("Fano bounded {f:?}"))?;
    Ok(format!("{} arrangements; Fano bounded (4,6,3), χ = 1", cases.len()))
}

fn check_post(c: &Case) -> Result<(), String> {
    let rep = postconditions(&c.pl, &c.built.arrangement);
    ensure(rep.passed, || format!("{} seed {}: {:?}", label(&c.m, c.e), c.seed, rep.failures))
}

fn criterion_7() -> Outcome {
    let cases = lex_sweep()?;
    for c in cases {
        check_post(c)?;
    }
    Ok(format!("{} arrangements", cases.len()))
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let mut count = 0;
    let mut fano_dual = None;
    let mut u13 = None;
    for (m, e) in pairs(8) {
        let dual = m.dual();
        if dual.rank() > 3 {
            continue;
        }
        let id = label(&m, e);
        let dflats = Flats::of(&dual);
        let oracle_betti = oracle::strip(dflats.bounded_counts(e).into_iter().rev().collect());
        let lattice = betti_lattice(&m, e).map_err(|x| format!("{id}: {x}"))?;
        let q = betti_hochster_steiner(&m, e, Ring::Q).map_err(|x| format!("{id}: {x}"))?;
        let gf2 = betti_hochster_steiner(&m, e, Ring::Gf2).map_err(|x| format!("{id}: {x}"))?;
        let as_u64 = |v: &[usize]| -> Vec<u64> { v.iter().map(|&x| x as u64).collect() };
        let cells = match cellular_resolution(&m, e, Policy::Lex, 0).map_err(|x| format!("{id}: {x}"))? {
            Some(res) => {
                let rep = verify_resolution(&res.labeled, &res.ideal.ideal).map_err(|x| format!("{id}: {x}"))?;
                ensure(rep.exact && rep.exact_q && rep.torsion_free, || format!("{id}: not exact"))?;
                ensure(rep.minimal, || format!("{id}: not minimal: {:?}", rep.minimal_witness))?;
                let graded = res.betti().graded;
                ensure(graded == q.graded, || format!("{id}: graded Betti numbers differ from Hochster"))?;
                oracle::strip(as_u64(&res.labeled.f_vector()))
            }
            None => Vec::new(),
        };
        let routes = [oracle_betti.clone(), as_u64(&lattice.total), as_u64(&q.total), as_u64(&gf2.total)];
        ensure(routes.iter().all(|r| *r == cells), || format!("{id}: cells {cells:?}, oracle/μ/ℚ/GF(2) {routes:?}"))?;
        if m.name() == "Fano*" && fano_dual.is_none() {
            fano_dual = Some(cells.clone());
        }
        if m.name() == "U1,3" && u13.is_none() {
            u13 = Some(cells.clone());
        }
        count += 1;
    }
    within(start, Duration::from_secs(60))?;
    ensure(fano_dual == Some(vec![4, 6, 3]), || format!("Fano* Betti {fano_dual:?}"))?;
    ensure(u13 == Some(vec![2, 1]), || format!("U1,3 Betti {u13:?}"))?;
    Ok(format!("{count} pairs; Fano* (4,6,3); U1,3 (2,1)"))
}

fn criterion_9() -> Outcome {
    let corpus = oracle::corpus(6);
    let mut flats_checked = 0;
    for m in &corpus {
        let rep = stanley_consistency(m).map_err(|x| format!("{}: {x}", m.name()))?;
        ensure(rep.passed, || format!("{}: {:?}", m.name(), rep.witness))?;
        flats_checked += rep.flats_checked;
        // the same identity from the brute-force tables
        let l = Flats::of(&m.dual());
        let lt = Flats::of(&m.dual().free_extension().map_err(|x| x.to_string())?);
        let new = 1u32 << m.ground_size();
        let top = l.len() - 1;
        for x in 0..top {
            let xt = lt.masks.iter().position(|&f| f == l.masks[x]).ok_or_else(|| format!("{}: flat lost", m.name()))?;
            let rhs: i64 = -(0..lt.len()).filter(|&y| lt.masks[y] & new == 0 && lt.leq(xt, y)).map(|y| lt.mu[xt][y]).sum::<i64>();
            ensure(l.mu[x][top] == rhs, || format!("{}: identity fails at {:#b}", m.name(), l.masks[x]))?;
        }
        let coext = m.free_coextension().map_err(|x| x.to_string())?;
        let lattice = betti_lattice(&coext, m.ground_size()).map_err(|x| x.to_string())?;
        let hochster = homsphere::resolution::betti_hochster(&independence_complex(m), Ring::Z);
        ensure(lattice.total == hochster.total, || format!("{}: independence complex Betti numbers differ", m.name()))?;
    }
    Ok(format!("{} matroids, {flats_checked} flats", corpus.len()))
}

fn criterion_10() -> Outcome {
    for (m, e) in [(Matroid::fano(), 0), (Matroid::complete_graph(4).unwrap(), 2), (Matroid::uniform(3, 5).unwrap(), 1)] {
        for (policy, seed) in [(Policy::Lex, 0), (Policy::Seeded, 7)] {
            let plan = BuildPlan::new(PointedLattice::from_matroid(&m, e).unwrap()).with_policy(policy, seed);
            let one = serde_json::to_string_pretty(&build(&plan).map_err(|x| x.to_string())?.to_json()).unwrap();
            let two = serde_json::to_string_pretty(&build(&plan).map_err(|x| x.to_string())?.to_json()).unwrap();
            ensure(one == two, || format!("{} {policy} {seed}: output differs between runs", label(&m, e)))?;
        }
    }
    let mut distinct = 0;
    let mut total = 0;
    for seed in 1..=3 {
        let cases = build_sweep(Policy::Seeded, seed)?;
        for c in &cases {
            check_counts(c)?;
            check_link(c)?;
            check_bounded(c)?;
            check_post(c)?;
            let lex = lex_sweep()?.iter().find(|l| l.m.bases_masks() == c.m.bases_masks() && l.e == c.e).unwrap();
            if lex.built.arrangement != c.built.arrangement {
                distinct += 1;
            }
        }
        total += cases.len();
    }
    Ok(format!("byte-identical repeats; {total} seeded builds pass 4-8 ({distinct} differ from lex)"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("Steiner complexes are wedges of β spheres", criterion_1),
        ("S(M~, e~) = Δ(M)", criterion_2),
        ("rank-2 builder matches A_1 and U2,5", criterion_3),
        ("cell counts from the Möbius function", criterion_4),
        ("link homology", criterion_5),
        ("bounded subcomplex counts", criterion_6),
        ("arrangement postconditions", criterion_7),
        ("cellular resolutions of Steiner ideals", criterion_8),
        ("Stanley consistency", criterion_9),
        ("determinism", criterion_10),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = match catch_unwind(AssertUnwindSafe(f)) {
            Ok(r) => r,
            Err(p) => Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into())),
        };
        let t = start.elapsed();
        match outcome {
            Ok(msg) => println!("[PASS] criterion {}: {name}: {msg} ({t:.2?})", i + 1),
            Err(msg) => {
                failed += 1;
                println!("[FAIL] criterion {}: {name}: {msg} ({t:.2?})", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
