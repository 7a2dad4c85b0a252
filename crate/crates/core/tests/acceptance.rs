//! Acceptance suite: one test per shipping criterion. Every test prints a
//! single `criterion N (<name>): PASS/FAIL — detail` line (visible with
//! `cargo test --test acceptance -- --nocapture`; a failing criterion always
//! shows its line in the failure output). Tolerances are pinned in code.

use std::sync::OnceLock;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use misagg::coarsen::{aggregate_mis2, aggregates_connected, coarsen_basic, AggregateLabels};
use misagg::gen::{gen_grid2d, gen_laplace3d};
use misagg::graph::pattern_symmetrize;
use misagg::gs::{
    cluster_gs_setup, cluster_gs_setup_with_labels, gs_sweep, sgs_apply, ClusterScheme,
    SgsPreconditioner, Sweep,
};
use misagg::mis2::{mis2, Mis2Config, Mis2Result, PriorityScheme, StatusWord, TupleLayout};
use misagg::parallel::det_dot;
use misagg::solver::gmres;
use misagg::verify::{is_distance2_independent, is_maximal_distance2, verify_via_squared};
use misagg::{Graph, SparseMatrix, VertexId, Word};

fn report(n: u32, name: &str, outcome: Result<String, String>) {
    match outcome {
        Ok(detail) => println!("criterion {n} ({name}): PASS — {detail}"),
        Err(detail) => {
            println!("criterion {n} ({name}): FAIL — {detail}");
            panic!("criterion {n} ({name}) failed: {detail}");
        }
    }
}

// ---------------------------------------------------------------------------
// Shared fixtures.

fn path(n: usize) -> Graph {
    let edges: Vec<(VertexId, VertexId)> =
        (0..n - 1).map(|v| (v as VertexId, v as VertexId + 1)).collect();
    Graph::from_edges(n, &edges).unwrap()
}

fn cycle(n: usize) -> Graph {
    let edges: Vec<(VertexId, VertexId)> =
        (0..n).map(|v| (v as VertexId, ((v + 1) % n) as VertexId)).collect();
    Graph::from_edges(n, &edges).unwrap()
}

fn star(leaves: usize) -> Graph {
    let edges: Vec<(VertexId, VertexId)> = (1..=leaves).map(|v| (0, v as VertexId)).collect();
    Graph::from_edges(leaves + 1, &edges).unwrap()
}

fn complete(n: usize) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            edges.push((u as VertexId, v as VertexId));
        }
    }
    Graph::from_edges(n, &edges).unwrap()
}

fn pattern_of(m: &SparseMatrix<f64>) -> Graph {
    pattern_symmetrize(m, true).unwrap()
}

/// Hand-picked graphs covering the degenerate and regular shapes the kernels
/// must handle: empty, singleton, trees, cycles, cliques, a disconnected
/// union, and 2-D/3-D stencil patterns.
fn structured_fixtures() -> Vec<(&'static str, Graph)> {
    let two_triangles = Graph::from_edges(
        7,
        &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)],
    )
    .unwrap();
    vec![
        ("empty", Graph::from_edges(0, &[]).unwrap()),
        ("single vertex", Graph::from_edges(1, &[]).unwrap()),
        ("one edge", Graph::from_edges(2, &[(0, 1)]).unwrap()),
        ("path(10)", path(10)),
        ("path(23)", path(23)),
        ("cycle(12)", cycle(12)),
        ("star(1+5)", star(5)),
        ("complete(8)", complete(8)),
        ("two triangles + isolate", two_triangles),
        ("grid2d(7,5)", pattern_of(&gen_grid2d(7, 5).unwrap())),
        ("grid2d(13,9)", pattern_of(&gen_grid2d(13, 9).unwrap())),
        ("laplace3d(5,4,3)", pattern_of(&gen_laplace3d(5, 4, 3).unwrap())),
        ("laplace3d(10,10,10)", pattern_of(&gen_laplace3d(10, 10, 10).unwrap())),
        ("laplace3d(20,20,20)", pattern_of(&gen_laplace3d(20, 20, 20).unwrap())),
    ]
}

/// Erdős–Rényi graph on `n` vertices with edge probability `density`.
fn random_graph(rng: &mut ChaCha8Rng, n: usize, density: f64) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen::<f64>() < density {
                edges.push((u as VertexId, v as VertexId));
            }
        }
    }
    Graph::from_edges(n, &edges).unwrap()
}

/// Diagonally dominant SPD matrix sharing `g`'s off-diagonal pattern.
fn spd_from_graph(g: &Graph) -> SparseMatrix<f64> {
    let n = g.num_vertices();
    let mut t = Vec::new();
    for v in 0..n {
        t.push((v, v, g.degree(v as VertexId) as f64 + 1.0));
        for &w in g.neighbors(v as VertexId) {
            t.push((v, w as usize, -1.0));
        }
    }
    SparseMatrix::from_triplets(n, n, t).unwrap()
}

fn xorstar_cfg() -> Mis2Config {
    Mis2Config { scheme: PriorityScheme::XorStarHash, seed: 0, max_iterations: None }
}

static LAPLACE100: OnceLock<Graph> = OnceLock::new();

fn laplace100() -> &'static Graph {
    LAPLACE100.get_or_init(|| pattern_of(&gen_laplace3d(100, 100, 100).unwrap()))
}

static MIS100_XORSTAR: OnceLock<Mis2Result> = OnceLock::new();

fn mis100_xorstar() -> &'static Mis2Result {
    MIS100_XORSTAR.get_or_init(|| mis2(laplace100(), &xorstar_cfg()).unwrap())
}

// ---------------------------------------------------------------------------
// Criteria.

fn mis2_passes_oracles(name: &str, g: &Graph, cfg: &Mis2Config) -> Result<(), String> {
    let r = mis2(g, cfg).map_err(|e| format!("{name}: mis2 failed: {e}"))?;
    if !is_distance2_independent(g, &r.in_set) {
        return Err(format!("{name}: output is not distance-2 independent"));
    }
    if !is_maximal_distance2(g, &r.in_set) {
        return Err(format!("{name}: output is not maximal"));
    }
    match verify_via_squared(g, &r.in_set) {
        Ok(true) => Ok(()),
        Ok(false) => Err(format!("{name}: squared-graph cross-check rejected the output")),
        Err(e) => Err(format!("{name}: squared-graph cross-check unavailable: {e}")),
    }
}

#[test]
fn criterion_1_validity_suite() {
    let outcome = (|| {
        let start = Instant::now();
        let mut checked = 0usize;
        for (name, g) in structured_fixtures() {
            mis2_passes_oracles(name, &g, &Mis2Config::default())?;
            checked += 1;
        }
        let schemes =
            [PriorityScheme::Fixed, PriorityScheme::XorHash, PriorityScheme::XorStarHash];
        let mut rng = ChaCha8Rng::seed_from_u64(0xAC_01);
        for i in 0..1000usize {
            let n = rng.gen_range(1..=200);
            let density = rng.gen_range(0.0..0.3);
            let g = random_graph(&mut rng, n, density);
            let cfg = Mis2Config {
                scheme: schemes[i % schemes.len()],
                seed: i as u64,
                max_iterations: None,
            };
            mis2_passes_oracles(&format!("random graph {i} (n={n})"), &g, &cfg)?;
            checked += 1;
        }
        let elapsed = start.elapsed();
        if elapsed.as_secs_f64() >= 60.0 {
            return Err(format!("{checked} graphs verified but took {elapsed:.1?} (limit 1 min)"));
        }
        Ok(format!("{checked} graphs passed all three oracles in {elapsed:.1?}"))
    })();
    report(1, "validity suite", outcome);
}

/// Everything criterion 2 requires to be bit-identical, gathered in one
/// comparable value.
#[derive(PartialEq)]
struct PipelineFingerprint {
    in_set: Vec<bool>,
    mis_iterations: usize,
    labels: Vec<VertexId>,
    roots: Vec<VertexId>,
    color: Vec<u32>,
    color_sets: Vec<Vec<VertexId>>,
    cluster_rows: Vec<Vec<VertexId>>,
    sweep_bits: Vec<u64>,
}

fn pipeline_fingerprint(g: &Graph, a: &SparseMatrix<f64>) -> PipelineFingerprint {
    let cfg = Mis2Config::default();
    let r = mis2(g, &cfg).unwrap();
    let agg = aggregate_mis2(g, &cfg).unwrap();
    let p = cluster_gs_setup(a, ClusterScheme::Mis2Agg, &cfg).unwrap();
    let n = a.num_rows();
    let b: Vec<f64> = (0..n).map(|i| ((i * 3 + 2) as f64).sin()).collect();
    let mut x = vec![0.0f64; n];
    for _ in 0..2 {
        gs_sweep(&mut x, a, &b, &p, Sweep::Forward);
        gs_sweep(&mut x, a, &b, &p, Sweep::Backward);
    }
    PipelineFingerprint {
        in_set: r.in_set,
        mis_iterations: r.iterations,
        labels: agg.labels.clone(),
        roots: agg.roots.clone(),
        color: p.coloring().color.clone(),
        color_sets: p.coloring().color_sets.clone(),
        cluster_rows: (0..p.num_clusters())
            .map(|c| p.rows_of(c as VertexId).to_vec())
            .collect(),
        sweep_bits: x.iter().map(|v| v.to_bits()).collect(),
    }
}

#[test]
fn criterion_2_determinism() {
    let outcome = (|| {
        let mut rng = ChaCha8Rng::seed_from_u64(0xAC_02);
        let mut fixtures: Vec<(String, Graph, SparseMatrix<f64>)> = Vec::new();
        let m30 = gen_laplace3d::<f64>(30, 30, 30).unwrap();
        fixtures.push(("laplace3d(30,30,30)".into(), pattern_of(&m30), m30));
        for n in [400usize, 1500, 4000] {
            let g = random_graph(&mut rng, n, 8.0 / n as f64);
            let a = spd_from_graph(&g);
            fixtures.push((format!("random graph (n={n})"), g, a));
        }

        let max_threads =
            std::thread::available_parallelism().map(|p| p.get()).unwrap_or(1);
        let mut thread_counts = vec![1usize, 2, max_threads];
        thread_counts.sort_unstable();
        thread_counts.dedup();

        let mut runs = 0usize;
        for (name, g, a) in &fixtures {
            let baseline = pipeline_fingerprint(g, a);
            for &threads in &thread_counts {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build()
                    .map_err(|e| format!("thread pool: {e}"))?;
                for rep in 0..5 {
                    let fp = pool.install(|| pipeline_fingerprint(g, a));
                    if fp != baseline {
                        return Err(format!(
                            "{name}: run {rep} on {threads} thread(s) differs from baseline"
                        ));
                    }
                    runs += 1;
                }
            }
        }
        Ok(format!(
            "{} fixtures bit-identical over {} runs across thread counts {:?}",
            fixtures.len(),
            runs,
            thread_counts
        ))
    })();
    report(2, "determinism", outcome);
}

#[test]
fn criterion_3_laplace_scaling() {
    let outcome = (|| {
        let start = Instant::now();
        let cfg = xorstar_cfg();
        let g50 = pattern_of(&gen_laplace3d(50, 50, 50).unwrap());
        let r50 = mis2(&g50, &cfg).map_err(|e| e.to_string())?;
        drop(g50);
        let r100 = mis100_xorstar();

        // Pinned targets and tolerance: ±5% covers the spread produced by
        // implementation-chosen hash constants.
        let checks: [(&str, usize, f64, usize); 2] = [
            ("50^3", r50.set_size(), 11469.0, r50.iterations),
            ("100^3", r100.set_size(), 90041.0, r100.iterations),
        ];
        for (label, size, target, iterations) in checks {
            let lo = 0.95 * target;
            let hi = 1.05 * target;
            if (size as f64) < lo || (size as f64) > hi {
                return Err(format!(
                    "{label}: set size {size} outside {target} ±5% [{lo:.0}, {hi:.0}]"
                ));
            }
            if iterations > 14 {
                return Err(format!("{label}: {iterations} iterations exceeds 14"));
            }
        }
        let growth = r100.iterations as i64 - r50.iterations as i64;
        if growth > 2 {
            return Err(format!(
                "iteration growth {} -> {} exceeds 2",
                r50.iterations, r100.iterations
            ));
        }
        let elapsed = start.elapsed();
        if elapsed.as_secs_f64() >= 120.0 {
            return Err(format!("took {elapsed:.1?} (limit 2 min)"));
        }
        Ok(format!(
            "50^3: size {} (target 11469 ±5%), {} iterations; 100^3: size {} (target 90041 ±5%), {} iterations; growth {:+}; {elapsed:.1?}",
            r50.set_size(),
            r50.iterations,
            r100.set_size(),
            r100.iterations,
            growth
        ))
    })();
    report(3, "independent set scaling", outcome);
}

#[test]
fn criterion_4_refreshed_priorities_beat_fixed() {
    let outcome = (|| {
        let refreshed = mis100_xorstar();
        let fixed_cfg =
            Mis2Config { scheme: PriorityScheme::Fixed, seed: 0, max_iterations: None };
        let fixed = mis2(laplace100(), &fixed_cfg).map_err(|e| e.to_string())?;
        if refreshed.iterations > fixed.iterations {
            return Err(format!(
                "refreshed hashing took {} iterations, fixed priorities {}",
                refreshed.iterations, fixed.iterations
            ));
        }
        Ok(format!(
            "100^3: refreshed hashing {} iterations ≤ fixed priorities {}",
            refreshed.iterations, fixed.iterations
        ))
    })();
    report(4, "refreshed priorities need no more iterations", outcome);
}

#[test]
fn criterion_5_aggregation_completeness() {
    let outcome = (|| {
        let cfg = Mis2Config::default();
        let fixtures = structured_fixtures();
        for (name, g) in &fixtures {
            let r = mis2(g, &cfg).map_err(|e| format!("{name}: {e}"))?;
            if !is_distance2_independent(g, &r.in_set) || !is_maximal_distance2(g, &r.in_set) {
                return Err(format!("{name}: first-stage roots fail the MIS-2 oracle"));
            }
            let members = r.members();

            let basic = coarsen_basic(g, &cfg).map_err(|e| format!("{name}: {e}"))?;
            let agg = aggregate_mis2(g, &cfg).map_err(|e| format!("{name}: {e}"))?;
            for (algo, labels) in [("root-and-attach", &basic), ("three-stage", &agg)] {
                if labels.unassigned_count() != 0 {
                    return Err(format!(
                        "{name}/{algo}: {} vertices left unassigned",
                        labels.unassigned_count()
                    ));
                }
                if !aggregates_connected(g, labels) {
                    return Err(format!("{name}/{algo}: disconnected aggregate"));
                }
            }
            if basic.roots != members {
                return Err(format!("{name}/root-and-attach: roots differ from the MIS-2 set"));
            }
            if agg.roots.len() < members.len() || agg.roots[..members.len()] != members[..] {
                return Err(format!(
                    "{name}/three-stage: first-stage roots differ from the MIS-2 set"
                ));
            }
        }
        Ok(format!(
            "{} fixtures × 2 algorithms: all vertices assigned, aggregates connected, roots verified",
            fixtures.len()
        ))
    })();
    report(5, "aggregation completeness", outcome);
}

#[test]
fn criterion_6_sweep_matches_scalar_reference() {
    let outcome = (|| {
        // Textbook sequential Gauss-Seidel, written directly against the
        // matrix: x_r = (b_r - sum_{c != r} a_rc x_c) / a_rr.
        fn reference_gs(
            x: &mut [f64],
            a: &SparseMatrix<f64>,
            b: &[f64],
            backward: bool,
        ) {
            let n = a.num_rows();
            let rows: Vec<usize> =
                if backward { (0..n).rev().collect() } else { (0..n).collect() };
            for r in rows {
                let (cols, vals) = a.row(r);
                let mut off = 0.0;
                let mut diag = 0.0;
                for (&c, &v) in cols.iter().zip(vals) {
                    if c as usize == r {
                        diag = v;
                    } else {
                        off += v * x[c as usize];
                    }
                }
                x[r] = (b[r] - off) / diag;
            }
        }

        let mut rng = ChaCha8Rng::seed_from_u64(0xAC_06);
        let mut worst: f64 = 0.0;
        for sys in 0..20 {
            let n = rng.gen_range(2..=100);
            let density = rng.gen_range(0.02..0.3);
            let mut t: Vec<(usize, usize, f64)> = Vec::new();
            let mut strength = vec![0.0f64; n];
            for u in 0..n {
                for v in u + 1..n {
                    if rng.gen::<f64>() < density {
                        let w: f64 = rng.gen_range(0.5..2.0);
                        t.push((u, v, -w));
                        t.push((v, u, -w));
                        strength[u] += w;
                        strength[v] += w;
                    }
                }
            }
            for (u, s) in strength.iter().enumerate() {
                t.push((u, u, s + rng.gen_range(0.1..1.0)));
            }
            let a = SparseMatrix::from_triplets(n, n, t).unwrap();
            let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let start: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();

            let labels =
                AggregateLabels { labels: vec![0; n], num_aggregates: 1, roots: vec![0] };
            let p = cluster_gs_setup_with_labels(&a, labels).map_err(|e| e.to_string())?;
            if p.coloring().num_colors != 1 {
                return Err(format!("system {sys}: single cluster colored with >1 color"));
            }

            for backward in [false, true] {
                let dir = if backward { Sweep::Backward } else { Sweep::Forward };
                let mut ours = start.clone();
                gs_sweep(&mut ours, &a, &b, &p, dir);
                let mut reference = start.clone();
                reference_gs(&mut reference, &a, &b, backward);
                let scale = reference.iter().fold(1.0f64, |m, &v| m.max(v.abs()));
                for (i, (&o, &r)) in ours.iter().zip(&reference).enumerate() {
                    let rel = (o - r).abs() / scale;
                    worst = worst.max(rel);
                    if rel > 1e-14 {
                        return Err(format!(
                            "system {sys} (n={n}), backward={backward}, row {i}: relative difference {rel:.2e} exceeds 1e-14"
                        ));
                    }
                }
            }
        }
        Ok(format!(
            "20 random SPD systems, both sweep directions; worst relative difference {worst:.2e} ≤ 1e-14"
        ))
    })();
    report(6, "single-cluster sweep matches scalar reference", outcome);
}

#[test]
fn criterion_7_cluster_preconditioning_iterations() {
    let outcome = (|| {
        let start = Instant::now();
        let a = gen_laplace3d::<f64>(32, 32, 32).unwrap();
        let n = a.num_rows();
        let b = vec![1.0f64; n];
        let x0 = vec![0.0f64; n];
        let cfg = Mis2Config::default();

        let mut counts = Vec::new();
        for (label, scheme) in
            [("point", ClusterScheme::Point), ("cluster", ClusterScheme::Mis2Agg)]
        {
            let p = cluster_gs_setup(&a, scheme, &cfg).map_err(|e| e.to_string())?;
            let sgs = SgsPreconditioner { matrix: &a, precond: &p, sweeps: 1 };
            let (_, rep) = gmres(&a, &b, &x0, &sgs, 1e-8, 800, 50)
                .map_err(|e| format!("{label}-SGS GMRES failed: {e}"))?;
            if !rep.converged {
                return Err(format!(
                    "{label}-SGS did not converge within 800 iterations (relative residual {:.2e})",
                    rep.final_relative_residual
                ));
            }
            counts.push((
                label,
                rep.iterations,
                p.num_clusters(),
                p.coloring().num_colors,
            ));
        }
        let elapsed = start.elapsed();
        if elapsed.as_secs_f64() >= 300.0 {
            return Err(format!("took {elapsed:.1?} (limit 5 min)"));
        }
        let (point, cluster) = (&counts[0], &counts[1]);
        let detail = format!(
            "32^3, tol 1e-8, restart 50: point-SGS {} iterations ({} clusters, {} colors); cluster-SGS {} iterations ({} clusters, {} colors); both converged within 800; {elapsed:.1?}",
            point.1, point.2, point.3, cluster.1, cluster.2, cluster.3
        );
        if cluster.1 > point.1 {
            return Err(format!("cluster-SGS needs more iterations than point-SGS — {detail}"));
        }
        Ok(detail)
    })();
    report(7, "cluster preconditioning iteration count", outcome);
}

#[test]
fn criterion_8_sgs_symmetry() {
    let outcome = (|| {
        let fixtures: Vec<(&str, SparseMatrix<f64>)> = vec![
            ("grid2d(10,10)", gen_grid2d(10, 10).unwrap()),
            ("laplace3d(6,6,6)", gen_laplace3d(6, 6, 6).unwrap()),
        ];
        let schemes =
            [ClusterScheme::Point, ClusterScheme::BasicCoarsen, ClusterScheme::Mis2Agg];
        let mut rng = ChaCha8Rng::seed_from_u64(0xAC_08);
        let mut worst: f64 = 0.0;
        let mut pairs = 0usize;
        for (name, a) in &fixtures {
            let n = a.num_rows();
            for &scheme in &schemes {
                let p = cluster_gs_setup(a, scheme, &Mis2Config::default())
                    .map_err(|e| e.to_string())?;
                for sweeps in [1usize, 2] {
                    for _ in 0..20 {
                        let b1: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                        let b2: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                        let z1 = sgs_apply(&p, a, &b1, sweeps);
                        let z2 = sgs_apply(&p, a, &b2, sweeps);
                        let lhs = det_dot(&z1, &b2);
                        let rhs = det_dot(&b1, &z2);
                        let rel = (lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(1e-300);
                        worst = worst.max(rel);
                        pairs += 1;
                        if rel > 1e-12 {
                            return Err(format!(
                                "{name}, {scheme:?}, {sweeps} sweep(s): asymmetry {rel:.2e} exceeds 1e-12"
                            ));
                        }
                    }
                }
            }
        }
        Ok(format!(
            "{pairs} vector pairs over {} fixtures × 3 schemes × 2 sweep counts; worst relative asymmetry {worst:.2e}",
            fixtures.len()
        ))
    })();
    report(8, "symmetric operator probe", outcome);
}

#[test]
fn criterion_9_status_word_packing() {
    let outcome = (|| {
        let mut total: u64 = 0;
        for &nv in &[1usize, 6, 255, 4096] {
            let layout = TupleLayout::for_vertex_count(nv).map_err(|e| e.to_string())?;
            let max_p = layout.max_priority() as u64;
            let chunk: u64 = 1 << 20;
            let num_chunks = (max_p + 1).div_ceil(chunk);
            let bad = (0..num_chunks).into_par_iter().find_map_any(|ci| {
                let lo = ci * chunk;
                let hi = (lo + chunk).min(max_p + 1);
                for p in lo..hi {
                    let p = p as Word;
                    for id in 0..nv as VertexId {
                        let w = layout.pack(p, id);
                        if w.0 <= StatusWord::IN.0 || w.0 >= StatusWord::OUT.0 {
                            return Some(format!(
                                "|V|={nv}: packed (priority {p}, id {id}) is not strictly between the IN and OUT words"
                            ));
                        }
                        let (p2, id2) = layout.unpack(w);
                        if (p2, id2) != (p, id) {
                            return Some(format!(
                                "|V|={nv}: ({p}, {id}) round-tripped to ({p2}, {id2})"
                            ));
                        }
                    }
                }
                None
            });
            if let Some(msg) = bad {
                return Err(msg);
            }
            total += (max_p + 1) * nv as u64;
        }
        Ok(format!("{total} (priority, id) pairs round-tripped strictly inside (IN, OUT)"))
    })();
    report(9, "status word packing", outcome);
}
