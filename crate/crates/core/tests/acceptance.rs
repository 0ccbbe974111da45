//! End-to-end acceptance suite. Every criterion runs in one sequential test
//! so the timing sweeps do not compete for cores; each prints one line.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use arrfaces::cli::{fit_loglog, generate, random_lines, random_points, Kind};
use arrfaces::cuttings::{build_hierarchical_cutting, CuttingParams};
use arrfaces::face::first_mismatch;
use arrfaces::face_query::fq_build_tradeoff;
use arrfaces::geom::{dual_of_point, Line, Point, Scalar};
use arrfaces::many_faces::{
    many_faces_fast, many_faces_fast_with, many_faces_main_with, preprocess_dual, r_first, r_main, ManyFaces,
};
use arrfaces::oracle::{many_faces_naive, Arrangement};
use arrfaces::segment_oracle::{segment_faces_flood, segment_faces_naive, Segment};

/// Writes past the test harness's output capture, so the criterion lines
/// appear in a plain `cargo test` run.
macro_rules! report {
    ($($arg:tt)*) => {{
        use std::io::Write;
        let _ = writeln!(std::io::stdout().lock(), $($arg)*);
    }};
}

type Instance = (Vec<Line>, Vec<Point>);
type Check<'a> = Box<dyn Fn() -> Result<String, String> + 'a>;

/// Exact agreement with the arrangement, face sets and per-point faces.
fn agrees(got: &ManyFaces, lines: &[Line], points: &[Point]) -> Result<(), String> {
    let (want, which) = many_faces_naive(lines, points).map_err(|e| e.to_string())?;
    if let Some(mm) = first_mismatch(&got.faces, &want) {
        return Err(format!("face sets differ: {mm:?}"));
    }
    for (j, &f) in got.point_face.iter().enumerate() {
        if got.faces[f] != want[which[j]] {
            return Err(format!("point {j} mapped to the wrong face"));
        }
    }
    Ok(())
}

fn random_instance(rng: &mut ChaCha8Rng) -> Instance {
    let n = rng.gen_range(3..=200);
    let m = rng.gen_range(1..=200);
    generate(Kind::RandomLines, n, m, rng.gen()).unwrap()
}

/// Few lines and many points with a forced cutting, so faces are larger
/// than cells and pieces must be glued across cell boundaries.
fn glued_instance(rng: &mut ChaCha8Rng) -> Instance {
    let n = rng.gen_range(4..=12);
    let m = rng.gen_range(20..=120);
    generate(Kind::RandomLines, n, m, rng.gen()).unwrap()
}

struct Sweep {
    sizes: Vec<usize>,
    fast: Vec<ManyFaces>,
    fast_s: Vec<f64>,
    naive_s: Vec<f64>,
}

fn scaling_sweep() -> Sweep {
    let sizes: Vec<usize> = (6..=11).map(|k| 1 << k).collect();
    let (mut fast, mut fast_s, mut naive_s) = (vec![], vec![], vec![]);
    for &n in &sizes {
        let (lines, points) = generate(Kind::RandomLines, n, n, 7).unwrap();
        let t = Instant::now();
        let got = many_faces_fast(&lines, &points).unwrap();
        fast_s.push(t.elapsed().as_secs_f64());
        let t = Instant::now();
        let want = many_faces_naive(&lines, &points).unwrap();
        naive_s.push(t.elapsed().as_secs_f64());
        assert!(first_mismatch(&got.faces, &want.0).is_none(), "sweep n = {n}");
        fast.push(got);
    }
    Sweep { sizes, fast, fast_s, naive_s }
}

fn slope(xs: &[usize], ys: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = xs.iter().zip(ys).map(|(&x, &y)| (x as f64, y)).collect();
    fit_loglog(&pts).expect("at least two sizes").slope
}

fn criterion_1(inst: &[Instance]) -> Result<String, String> {
    for (i, (lines, points)) in inst.iter().enumerate() {
        let r = r_first(lines.len(), points.len());
        let got = many_faces_fast_with(lines, points, Some(r), i as u64).map_err(|e| format!("instance {i}: {e}"))?;
        agrees(&got, lines, points).map_err(|e| format!("instance {i}: {e}"))?;
    }
    Ok(format!("{} instances, 0 mismatches", inst.len()))
}

fn criterion_2(inst: &[Instance], glued: &[Instance]) -> Result<String, String> {
    let mut gluing = 0;
    for (i, (lines, points)) in inst.iter().chain(glued).enumerate() {
        let n = lines.len();
        let r = if i < inst.len() { r_main(n, points.len()).max(2) } else { 2 + i % 3 };
        let got =
            many_faces_main_with(lines, points, Some(r.min(n)), i as u64).map_err(|e| format!("instance {i}: {e}"))?;
        agrees(&got, lines, points).map_err(|e| format!("instance {i}: {e}"))?;
        // faces not found inside a single cell came from glued zone pieces
        if got.faces.len() > got.stats.final_faces {
            gluing += 1;
        }
    }
    if gluing == 0 {
        return Err("no instance exercised gluing".into());
    }
    Ok(format!("{} instances ({gluing} with glued faces), 0 mismatches", inst.len() + glued.len()))
}

fn criterion_3(inst: &[Instance], sweep: &Sweep) -> Result<String, String> {
    let mut queries = 0;
    for (i, (lines, points)) in inst.iter().enumerate() {
        let r = r_first(lines.len(), points.len());
        let pre = preprocess_dual(lines, points, Some(r), i as u64).map_err(|e| e.to_string())?;
        pre.cutting.verify().map_err(|e| format!("instance {i}: {e}"))?;
        for (j, d) in pre.duals.iter().enumerate() {
            pre.audit(d).map_err(|e| format!("instance {i} query {j}: {e}"))?;
            queries += 1;
        }
    }
    // the C of the bound over a 4x window of the scaling sweep
    let cs: Vec<f64> = sweep
        .sizes
        .iter()
        .zip(&sweep.fast)
        .filter(|(&n, _)| (256..=1024).contains(&n))
        .map(|(&n, f)| f.stats.sum_h_plus as f64 / (n * f.stats.r) as f64)
        .collect();
    let mean = cs.iter().sum::<f64>() / cs.len() as f64;
    let stable = cs.iter().all(|c| (c / mean - 1.0).abs() <= 0.5);
    let msg = format!("{queries} queries audited; C over n = 256..1024: {cs:.1?}");
    if stable {
        Ok(msg)
    } else {
        Err(format!("{msg} varies by more than 50% around {mean:.1}"))
    }
}

fn criterion_4(inst: &[Instance]) -> Result<String, String> {
    let (mut refined, mut retries, mut built) = (0, 0, 0);
    for (i, (lines, points)) in inst.iter().enumerate() {
        let (n, m) = (lines.len(), points.len());
        let pre = preprocess_dual(lines, points, Some(r_first(n, m)), i as u64).map_err(|e| e.to_string())?;
        let main = build_hierarchical_cutting(
            lines,
            r_main(n, m).max(2).min(n),
            CuttingParams { seed: i as u64, ..Default::default() },
        )
        .map_err(|e| e.to_string())?;
        for c in [&pre.cutting, &main] {
            c.verify().map_err(|e| format!("instance {i}: {e}"))?;
            refined += c.meta.refined_cells;
            retries += c.meta.retries;
            built += 1;
        }
    }
    let avg = retries as f64 / refined.max(1) as f64;
    let msg = format!("{built} cuttings certified, {avg:.2} retries per refined cell");
    if avg <= 3.0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn criterion_5() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let lines = random_lines(200, &mut rng);
    let points = random_points(200, &lines, &mut rng);
    let queries = random_points(1000, &lines, &mut rng);
    let pre = preprocess_dual(&lines, &points, None, 5).map_err(|e| e.to_string())?;
    let fq = fq_build_tradeoff(&lines, 8).map_err(|e| e.to_string())?;
    let (before_pre, before_fq) = (pre.fingerprints(), fq.fingerprints());
    for q in &queries {
        pre.face_of_dual(&dual_of_point(q)).map_err(|e| e.to_string())?;
        fq.query(q).map_err(|e| e.to_string())?;
    }
    if pre.fingerprints() != before_pre || fq.fingerprints() != before_fq {
        return Err("a stored hull changed".into());
    }
    Ok(format!("{} fingerprints unchanged after 1000 queries", before_pre.len() + before_fq.len()))
}

fn criterion_6() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut checked = 0;
    for n in [1, 2, 3, 5, 9, 17, 40, 77, 128, 200] {
        let lines = random_lines(n, &mut rng);
        let arr = Arrangement::build(&lines).map_err(|e| e.to_string())?;
        let queries = random_points(500, &lines, &mut rng);
        for r in [1, 8, 32] {
            let s = fq_build_tradeoff(&lines, r.min(n)).map_err(|e| e.to_string())?;
            for q in &queries {
                let got = s.query(q).map_err(|e| e.to_string())?.boundary();
                if &got != arr.face_of(q).map_err(|e| e.to_string())? {
                    return Err(format!("n = {n}, r = {r}: wrong face for {q:?}"));
                }
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} queries, 0 mismatches"))
}

fn criterion_7(sweep: &Sweep) -> Result<String, String> {
    let fast = slope(&sweep.sizes, &sweep.fast_s);
    let naive = slope(&sweep.sizes, &sweep.naive_s);
    let msg = format!(
        "fast slope {fast:.2} (<= 1.55), naive slope {naive:.2} (>= 1.85); fast {:.2} s vs naive {:.2} s at n = 2048",
        sweep.fast_s.last().unwrap(),
        sweep.naive_s.last().unwrap()
    );
    if fast <= 1.55 && naive >= 1.85 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn criterion_8() -> Result<String, String> {
    let sizes: Vec<usize> = (6..=11).map(|k| 1 << k).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut vh, mut per_query) = (vec![], vec![]);
    let mut by_r = vec![];
    for &n in &sizes {
        let lines = random_lines(n, &mut rng);
        let queries = random_points(300, &lines, &mut rng);
        let rs: &[usize] = if n == *sizes.last().unwrap() { &[1, 8, 32] } else { &[1] };
        for &r in rs {
            let s = fq_build_tradeoff(&lines, r).map_err(|e| e.to_string())?;
            let mut sizes_h = Vec::with_capacity(queries.len());
            let t = Instant::now();
            for q in &queries {
                let (_, st) = s.query_with_stats(q).map_err(|e| e.to_string())?;
                sizes_h.push(st.v_plus + st.partial);
            }
            let ms = 1e3 * t.elapsed().as_secs_f64() / queries.len() as f64;
            if r == 1 {
                sizes_h.sort_unstable();
                vh.push(sizes_h[sizes_h.len() / 2] as f64);
                per_query.push(ms);
            }
            if n == *sizes.last().unwrap() {
                by_r.push(ms);
            }
        }
    }
    let vh_slope = slope(&sizes, &vh);
    let time_slope = slope(&sizes, &per_query);
    let monotone = by_r.windows(2).all(|w| w[1] < w[0]);
    let msg = format!(
        "|V_h| slope {vh_slope:.2} (<= 0.85), query time slope {time_slope:.2} (< 1), ms per query at n = 2048 for r = 1, 8, 32: {by_r:.3?}"
    );
    if vh_slope <= 0.85 && time_slope < 1.0 && monotone {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn criterion_9(sweep: &Sweep) -> Result<String, String> {
    let ratios: Vec<f64> = sweep
        .sizes
        .iter()
        .zip(&sweep.fast)
        .map(|(&n, f)| {
            let (nf, mf) = (n as f64, f.point_face.len() as f64);
            f.stats.total_face_size as f64 / ((mf * nf).powf(2.0 / 3.0) + nf)
        })
        .collect();
    let c = ratios.iter().cloned().fold(0.0, f64::max);
    // one C covers the sweep when the ratio does not grow with n
    let bounded = ratios.iter().all(|&x| x <= 1.5 * ratios[0]);
    let msg = format!("C = {c:.2}; total / (m^(2/3) n^(2/3) + n) per size: {ratios:.2?}");
    if bounded {
        Ok(msg)
    } else {
        Err(format!("{msg} grows with n"))
    }
}

fn random_segments(rng: &mut ChaCha8Rng, n: usize, m: usize) -> (Vec<Segment>, Vec<Point>) {
    let r = |rng: &mut ChaCha8Rng| Scalar::ratio(rng.gen_range(-10_000..10_000), rng.gen_range(1..89));
    let segs = (0..n)
        .map(|_| loop {
            let p = Point::new(r(rng), r(rng));
            let q = Point::new(
                &p.x + &Scalar::ratio(rng.gen_range(-4000..4000), 7),
                &p.y + &Scalar::ratio(rng.gen_range(-4000..4000), 7),
            );
            if let Ok(s) = Segment::new(p, q) {
                break s;
            }
        })
        .collect();
    (segs, (0..m).map(|_| Point::new(r(rng), r(rng))).collect())
}

fn criterion_10() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut done = 0;
    while done < 100 {
        let n = rng.gen_range(1..=30);
        let m = rng.gen_range(1..=20);
        let (segs, pts) = random_segments(&mut rng, n, m);
        // degenerate draws are rejected identically by both oracles
        let (naive, flood) = match (segment_faces_naive(&segs, &pts), segment_faces_flood(&segs, &pts)) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(a), Err(b)) if a == b => continue,
            (a, b) => return Err(format!("oracles disagree on validity: {:?} vs {:?}", a.err(), b.err())),
        };
        let sides: Vec<_> = naive.0.iter().map(|f| f.sides.clone()).collect();
        if sides != flood.0 || naive.1 != flood.1 {
            return Err(format!("instance {done} differs"));
        }
        done += 1;
    }
    Ok("100 instances, 0 mismatches".into())
}

#[test]
fn acceptance() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let inst: Vec<Instance> = (0..200).map(|_| random_instance(&mut rng)).collect();
    let glued: Vec<Instance> = (0..30).map(|_| glued_instance(&mut rng)).collect();
    let t = Instant::now();
    let sweep = scaling_sweep();
    report!("scaling sweep n = m = 64..2048 [{:.0} s]", t.elapsed().as_secs_f64());
    let checks: Vec<(&str, Check)> = vec![
        ("fast many faces equals the arrangement", Box::new(|| criterion_1(&inst))),
        ("main many faces equals the arrangement", Box::new(|| criterion_2(&inst, &glued))),
        ("decomposition audit and hull-count constant", Box::new(|| criterion_3(&inst, &sweep))),
        ("cutting certificates", Box::new(|| criterion_4(&inst))),
        ("persistent hulls unchanged by queries", Box::new(criterion_5)),
        ("face queries equal the arrangement", Box::new(criterion_6)),
        ("many-faces scaling", Box::new(|| criterion_7(&sweep))),
        ("face-query scaling", Box::new(criterion_8)),
        ("total face complexity", Box::new(|| criterion_9(&sweep))),
        ("segment oracles agree", Box::new(criterion_10)),
    ];
    let mut failed = vec![];
    for (i, (name, check)) in checks.iter().enumerate() {
        let t = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => report!("criterion {:>2} PASS  {name}: {msg} [{secs:.0} s]", i + 1),
            Err(msg) => {
                report!("criterion {:>2} FAIL  {name}: {msg} [{secs:.0} s]", i + 1);
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
