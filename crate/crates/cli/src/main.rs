use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use homsphere::arrangement::ArrangementJson;
use homsphere::builder::{build, BuildError, BuildPlan, Policy};
use homsphere::lattice::{verify_geometric, LatticeError, RankedPoset};
use homsphere::matroid::{MatroidError, MatroidSpec};
use homsphere::resolution::{
    betti_hochster, betti_hochster_steiner, betti_lattice, cellular_resolution, stanley_consistency, steiner_ideal,
    verify_resolution, BettiTable, ResolutionError,
};
use homsphere::simplicial::{independence_complex, verify_steiner_type};
use homsphere::{GeometricLattice, Matroid, PointedLattice, Ring, SphereArrangement};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "homsphere", version, about = "Matroids, arrangements of homotopy spheres and Steiner ideals")]
struct Cli {
    /// Write the report to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rank, bases, circuits, flats, characteristic polynomial and beta invariant.
    Matroid { path: PathBuf },
    /// Lattice of flats of a matroid, or a geometric-lattice check of a ranked poset.
    Lattice { path: PathBuf },
    /// Homology of the Steiner complex S(M, e).
    Steiner {
        path: PathBuf,
        #[arg(long, default_value_t = 0)]
        e: usize,
    },
    /// Build, verify or count an arrangement of homotopy spheres.
    Arrange {
        #[command(subcommand)]
        action: Arrange,
    },
    /// Betti numbers of the Steiner ideal of (M, e) by every available route.
    Resolve {
        path: PathBuf,
        #[arg(long, default_value_t = 0)]
        e: usize,
        #[arg(long, default_value = "z")]
        ring: Ring,
        /// Resolve the Stanley-Reisner ideal of the independence complex instead.
        #[arg(long)]
        independence: bool,
    },
    /// Run every applicable check on each JSON fixture in a directory.
    Verify { dir: PathBuf },
}

#[derive(Subcommand)]
enum Arrange {
    /// Construct an arrangement realizing L(M) pointed at cl(e).
    Build {
        path: PathBuf,
        #[arg(long, default_value_t = 0)]
        e: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "lex")]
        policy: Policy,
        /// Print the 1-skeleton in DOT format instead of JSON.
        #[arg(long)]
        dot: bool,
    },
    /// Check the arrangement axioms, partition and regularity.
    Verify {
        path: PathBuf,
        #[arg(long)]
        dot: bool,
    },
    /// Compare cell counts with the Möbius-function formulas.
    Counts { path: PathBuf },
}

/// Input and usage problems exit with 2, failed mathematical checks with 1.
enum Failure {
    Input(String),
    Check(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Check(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Check(m) => m,
        }
    }
}

impl From<MatroidError> for Failure {
    fn from(e: MatroidError) -> Self {
        match e {
            MatroidError::AxiomViolation(_) => Failure::Check(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

impl From<LatticeError> for Failure {
    fn from(e: LatticeError) -> Self {
        match e {
            LatticeError::Matroid(m) => m.into(),
            LatticeError::NotGeometric(_) => Failure::Check(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

impl From<BuildError> for Failure {
    fn from(e: BuildError) -> Self {
        match e {
            BuildError::RankUnsupported(_) => Failure::Input(e.to_string()),
            _ => Failure::Check(e.to_string()),
        }
    }
}

impl From<ResolutionError> for Failure {
    fn from(e: ResolutionError) -> Self {
        match e {
            ResolutionError::Matroid(m) => m.into(),
            ResolutionError::Lattice(l) => l.into(),
            ResolutionError::Build(b) => b.into(),
            ResolutionError::LoopElement(_) | ResolutionError::MalformedIdeal(_) => Failure::Input(e.to_string()),
            _ => Failure::Check(e.to_string()),
        }
    }
}

/// What a subcommand prints, and whether its checks passed.
struct Report {
    text: String,
    passed: bool,
}

impl Report {
    fn json(v: &Value, passed: bool) -> Self {
        Report {
            text: format!("{}\n", serde_json::to_string_pretty(v).expect("reports serialize")),
            passed,
        }
    }
}

type Run = Result<Report, Failure>;

fn read_json(path: &Path) -> Result<Value, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn parse<T: serde::de::DeserializeOwned>(v: Value, path: &Path) -> Result<T, Failure> {
    serde_json::from_value(v).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_matroid(path: &Path) -> Result<Matroid, Failure> {
    let spec: MatroidSpec = parse(read_json(path)?, path)?;
    let m = Matroid::from_spec(&spec)?;
    Ok(if spec.name.is_empty() { m } else { m.with_name(&spec.name) })
}

fn load_arrangement(path: &Path) -> Result<(SphereArrangement, ArrangementJson), Failure> {
    let j: ArrangementJson = parse(read_json(path)?, path)?;
    let a = SphereArrangement::from_json(&j).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    Ok((a, j))
}

fn check_element(m: &Matroid, e: usize) -> Result<(), Failure> {
    if e >= m.ground_size() {
        return Err(Failure::Input(format!("element {e} out of range for ground set of size {}", m.ground_size())));
    }
    Ok(())
}

fn matroid_report(m: &Matroid) -> Result<Value, Failure> {
    let l = GeometricLattice::from_matroid(m)?;
    let n = m.ground_size();
    Ok(json!({
        "name": m.name(),
        "n": n,
        "rank": m.rank(),
        "bases": m.bases_masks().len(),
        "circuits": m.circuit_masks().len(),
        "flats": l.whitney_numbers(),
        "charpoly": l.characteristic_polynomial(),
        "beta": l.beta_invariant(),
        "simple": m.is_simple(),
        "loops": (0..n).filter(|&x| m.is_loop(x)).collect::<Vec<_>>(),
        "coloops": (0..n).filter(|&x| m.is_coloop(x)).collect::<Vec<_>>(),
    }))
}

fn cmd_matroid(path: &Path) -> Run {
    let m = load_matroid(path)?;
    Ok(Report::json(&matroid_report(&m)?, true))
}

fn lattice_report(l: &GeometricLattice) -> Value {
    json!({
        "rank": l.rank(),
        "whitney": l.whitney_numbers(),
        "charpoly": l.characteristic_polynomial(),
        "beta": l.beta_invariant(),
        "lattice": l.to_json(),
    })
}

fn cmd_lattice(path: &Path) -> Run {
    let v = read_json(path)?;
    if v.get("kind").is_some() {
        let m = load_matroid(path)?;
        let l = GeometricLattice::from_matroid(&m)?;
        return Ok(Report::json(&lattice_report(&l), true));
    }
    let poset: RankedPoset = parse(v, path)?;
    let report = verify_geometric(&poset);
    if !report.passed() {
        return Ok(Report::json(&json!({ "geometric": false, "checks": report.checks }), false));
    }
    let l = GeometricLattice::from_poset(&poset)?;
    let mut out = lattice_report(&l);
    out["geometric"] = json!(true);
    out["checks"] = json!(report.checks);
    Ok(Report::json(&out, true))
}

fn cmd_steiner(path: &Path, e: usize) -> Run {
    let m = load_matroid(path)?;
    check_element(&m, e)?;
    let rep = verify_steiner_type(&m, e)?;
    Ok(Report::json(&json!(rep), rep.passed))
}

fn build_plan(m: &Matroid, e: usize, policy: Policy, seed: u64) -> Result<BuildPlan, Failure> {
    check_element(m, e)?;
    if m.is_loop(e) {
        return Err(Failure::Input(format!("element {e} is a loop")));
    }
    if !(1..=3).contains(&m.rank()) {
        return Err(BuildError::RankUnsupported(m.rank()).into());
    }
    Ok(BuildPlan::new(PointedLattice::from_matroid(m, e)?).with_policy(policy, seed))
}

fn cmd_build(path: &Path, e: usize, seed: u64, policy: Policy, dot: bool) -> Run {
    let m = load_matroid(path)?;
    let built = build(&build_plan(&m, e, policy, seed)?)?;
    if dot {
        return Ok(Report {
            text: built.arrangement.to_dot(),
            passed: true,
        });
    }
    Ok(Report::json(&json!(built.to_json()), true))
}

fn cmd_arrange_verify(path: &Path, dot: bool) -> Run {
    let (a, _) = load_arrangement(path)?;
    if dot {
        return Ok(Report {
            text: a.to_dot(),
            passed: true,
        });
    }
    let il = match a.intersection_lattice() {
        Ok(il) => il,
        Err(e) => return Ok(Report::json(&json!({ "valid": false, "error": e.to_string() }), false)),
    };
    let rep = a.verify(&il);
    let involution_ok = rep.involution.as_ref().is_none_or(|i| i.passed);
    let passed = rep.chain_complex && rep.essential && rep.partitioned && rep.fully_partitioned && involution_ok;
    let out = json!({
        "valid": true,
        "rank": il.lattice.rank(),
        "whitney": il.lattice.whitney_numbers(),
        "f_vector": a.ambient.f_vector(&a.ambient.all()),
        "report": rep,
        "passed": passed,
    });
    Ok(Report::json(&out, passed))
}

fn counts_report(a: &SphereArrangement) -> Result<(Value, bool), String> {
    let il = a.intersection_lattice().map_err(|e| e.to_string())?;
    let counts = a.cell_counts(&il);
    let link = a.link_homology(&il);
    let bounded = a.bounded_counts(&il, 0).ok();
    let passed = counts.passed && link.passed && bounded.as_ref().is_none_or(|b| b.passed);
    let v = json!({
        "f_vector": counts.f_vector,
        "counts": counts,
        "link": link,
        "bounded": bounded,
        "passed": passed,
    });
    Ok((v, passed))
}

fn cmd_counts(path: &Path) -> Run {
    let (a, _) = load_arrangement(path)?;
    match counts_report(&a) {
        Ok((v, passed)) => Ok(Report::json(&v, passed)),
        Err(e) => Ok(Report::json(&json!({ "valid": false, "error": e }), false)),
    }
}

fn totals(t: &BettiTable) -> Value {
    json!(t.total)
}

/// All Betti routes for the Steiner ideal of `(m, e)`.
fn resolve_routes(m: &Matroid, e: usize, ring: Ring) -> Result<(Value, bool), Failure> {
    let ideal = steiner_ideal(m, e)?;
    let lattice = betti_lattice(m, e)?;
    let hochster = betti_hochster_steiner(m, e, ring)?;
    let mut agree = lattice.total == hochster.total;
    let mut routes = json!({
        "lattice": totals(&lattice),
        "hochster": totals(&hochster),
    });
    let mut resolution = Value::Null;
    if m.dual().rank() <= 3 {
        match cellular_resolution(m, e, Policy::Lex, 0)? {
            Some(res) => {
                let rep = verify_resolution(&res.labeled, &res.ideal.ideal)?;
                let cells = res.betti();
                agree &= cells.total == hochster.total && cells.graded == hochster.graded && rep.exact && rep.minimal;
                routes["cellular"] = totals(&cells);
                resolution = json!({
                    "exact": rep.exact,
                    "exact_q": rep.exact_q,
                    "exact_gf2": rep.exact_gf2,
                    "minimal": rep.minimal,
                    "minimal_witness": rep.minimal_witness,
                    "f_vector": res.labeled.f_vector(),
                    "degrees_checked": rep.degrees.len(),
                });
            }
            None => {
                agree &= hochster.total.is_empty();
                routes["cellular"] = json!([]);
            }
        }
    }
    let v = json!({
        "e": e,
        "ring": ring,
        "variables": ideal.variables,
        "generators": ideal.ideal.gens,
        "betti": lattice.total,
        "graded": hochster.graded,
        "routes": routes,
        "resolution": resolution,
        "agree": agree,
    });
    Ok((v, agree))
}

fn cmd_resolve(path: &Path, e: usize, ring: Ring, independence: bool) -> Run {
    let m = load_matroid(path)?;
    if independence {
        let coext = m.free_coextension()?;
        let tilde = m.ground_size();
        let (mut v, mut agree) = resolve_routes(&coext, tilde, ring)?;
        let direct = betti_hochster(&independence_complex(&m), ring);
        agree &= Some(&json!(direct.total)) == v.get("betti");
        v["routes"]["independence_hochster"] = totals(&direct);
        v["mode"] = json!("independence");
        v["agree"] = json!(agree);
        return Ok(Report::json(&v, agree));
    }
    check_element(&m, e)?;
    let (mut v, agree) = resolve_routes(&m, e, ring)?;
    v["mode"] = json!("steiner");
    Ok(Report::json(&v, agree))
}

/// Every applicable check on one matroid; returns the number of checks run.
fn verify_matroid(m: &Matroid) -> Result<usize, String> {
    let mut checks = 0;
    let elements: Vec<usize> = (0..m.ground_size()).filter(|&e| !m.is_loop(e)).collect();
    for &e in &elements {
        let rep = verify_steiner_type(m, e).map_err(|x| x.to_string())?;
        if !rep.passed {
            return Err(format!("Steiner complex at e={e} is not a wedge of {} spheres", rep.beta));
        }
        checks += 1;
        if (1..=3).contains(&m.rank()) {
            let plan = build_plan(m, e, Policy::Lex, 0).map_err(|f| f.message().to_string())?;
            let built = build(&plan).map_err(|x| format!("build at e={e}: {x}"))?;
            let (_, passed) = counts_report(&built.arrangement)?;
            if !passed {
                return Err(format!("cell counts of the arrangement at e={e}"));
            }
            checks += 1;
        }
        if m.dual().rank() <= 3 {
            let (_, agree) = resolve_routes(m, e, Ring::Q).map_err(|f| f.message().to_string())?;
            if !agree {
                return Err(format!("Betti routes disagree at e={e}"));
            }
            checks += 1;
        }
    }
    if m.ground_size() <= 6 {
        let rep = stanley_consistency(m).map_err(|x| x.to_string())?;
        if !rep.passed {
            return Err(format!("Stanley consistency fails at {:?}", rep.witness));
        }
        checks += 1;
    }
    Ok(checks)
}

fn verify_fixture(path: &Path) -> Result<(&'static str, usize), String> {
    let v = read_json(path).map_err(|f| f.message().to_string())?;
    if v.get("kind").is_some() {
        let m = load_matroid(path).map_err(|f| f.message().to_string())?;
        return Ok(("matroid", verify_matroid(&m)?));
    }
    if v.get("cells").is_some() {
        let (a, j) = load_arrangement(path).map_err(|f| f.message().to_string())?;
        let il = a.intersection_lattice().map_err(|e| e.to_string())?;
        let rep = a.verify(&il);
        if !rep.chain_complex {
            return Err("boundary of a boundary does not vanish".into());
        }
        if rep.involution.as_ref().is_some_and(|i| !i.passed) {
            return Err("involution does not preserve the arrangement".into());
        }
        let mut checks = 2;
        if j.provenance.is_some() {
            let (_, passed) = counts_report(&a)?;
            if !passed {
                return Err("cell counts of a built arrangement".into());
            }
            checks += 1;
        }
        return Ok(("arrangement", checks));
    }
    Err("neither a matroid nor an arrangement".into())
}

fn cmd_verify(dir: &Path) -> Run {
    let entries = fs::read_dir(dir).map_err(|e| Failure::Input(format!("{}: {e}", dir.display())))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Failure::Input(format!("{}: no JSON fixtures", dir.display())));
    }
    let mut results = Vec::new();
    let mut failures = Vec::new();
    for f in &files {
        let name = f.file_name().unwrap_or_default().to_string_lossy().into_owned();
        match verify_fixture(f) {
            Ok((kind, checks)) => results.push(json!({ "file": name, "kind": kind, "checks": checks, "passed": true })),
            Err(reason) => {
                eprintln!("{name}: {reason}");
                results.push(json!({ "file": name, "passed": false, "reason": reason }));
                failures.push(json!({ "file": name, "reason": reason }));
            }
        }
    }
    let out = json!({
        "passed": files.len() - failures.len(),
        "failed": failures.len(),
        "failures": failures,
        "fixtures": results,
    });
    Ok(Report::json(&out, failures.is_empty()))
}

fn run(cli: &Cli) -> Run {
    match &cli.command {
        Command::Matroid { path } => cmd_matroid(path),
        Command::Lattice { path } => cmd_lattice(path),
        Command::Steiner { path, e } => cmd_steiner(path, *e),
        Command::Arrange { action } => match action {
            Arrange::Build {
                path,
                e,
                seed,
                policy,
                dot,
            } => cmd_build(path, *e, *seed, *policy, *dot),
            Arrange::Verify { path, dot } => cmd_arrange_verify(path, *dot),
            Arrange::Counts { path } => cmd_counts(path),
        },
        Command::Resolve {
            path,
            e,
            ring,
            independence,
        } => cmd_resolve(path, *e, *ring, *independence),
        Command::Verify { dir } => cmd_verify(dir),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            let written = match &cli.out {
                Some(p) => fs::write(p, &report.text).map_err(|e| format!("{}: {e}", p.display())),
                None => {
                    print!("{}", report.text);
                    Ok(())
                }
            };
            if let Err(msg) = written {
                eprintln!("error: {msg}");
                return ExitCode::from(2);
            }
            if report.passed {
                ExitCode::SUCCESS
            } else {
                eprintln!("check failed");
                ExitCode::from(1)
            }
        }
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
