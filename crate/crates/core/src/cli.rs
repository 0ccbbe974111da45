//! Instance generation, algorithm runs with oracle verification, and
//! scaling sweeps, shared by the `arrfaces` binary and the test suites.
//!
//! Reports are JSON with exact coordinates written as `num/den` strings.
//! Given the seed and flags every field is reproducible except timings.

use std::collections::HashSet;
use std::time::Instant;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::face::{first_mismatch, FaceBoundary, FaceJson};
use crate::face_query::{fq_build_tradeoff, BuildStats};
use crate::geom::{check_lines_general, Line, Point, Scalar};
use crate::many_faces::{many_faces_fast_with, many_faces_main_with, RunStats};
use crate::oracle::{many_faces_naive, Arrangement};

pub const SCHEMA_VERSION: u32 = 1;

/// Random stream for one component, derived from the master seed.
pub fn derive_seed(master: u64, component: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(component);
    rng.next_u64()
}

const GEN_STREAM: u64 = 1;
const ALGO_STREAM: u64 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Kind {
    RandomLines,
    GridLines,
    RandomPoints,
    ClusteredPoints,
}

fn rnd(rng: &mut ChaCha8Rng, span: i64) -> Scalar {
    Scalar::ratio(rng.gen_range(-span * 1000..=span * 1000), rng.gen_range(1..=1000))
}

/// `n` random lines in general position: a candidate duplicating a line
/// or passing through an existing crossing is drawn again.
pub fn random_lines(n: usize, rng: &mut ChaCha8Rng) -> Vec<Line> {
    let mut lines: Vec<Line> = Vec::with_capacity(n);
    let mut crossings: HashSet<Point> = HashSet::new();
    while lines.len() < n {
        let l = Line::new(rnd(rng, 5), rnd(rng, 50));
        if lines.contains(&l) {
            continue;
        }
        let new: Vec<Point> = lines.iter().filter_map(|o| o.intersection(&l)).collect();
        let distinct = new.iter().collect::<HashSet<_>>().len() == new.len();
        if distinct && new.iter().all(|p| !crossings.contains(p)) {
            crossings.extend(new);
            lines.push(l);
        }
    }
    lines
}

/// Lines `y = a*x + b` over an integer grid of slopes and intercepts, slope
/// varying fastest. From four lines on, three of them share a point.
pub fn grid_lines(n: usize) -> Vec<Line> {
    let g = (n as f64).sqrt().ceil().max(3.0) as i64;
    (0..n as i64).map(|i| Line::int(i % g, i / g)).collect()
}

fn off_lines(p: &Point, lines: &[Line]) -> bool {
    lines.iter().all(|l| l.side_sign(p) != 0)
}

/// `m` distinct random points, none on any of `lines`.
pub fn random_points(m: usize, lines: &[Line], rng: &mut ChaCha8Rng) -> Vec<Point> {
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(m);
    while out.len() < m {
        let p = Point::new(rnd(rng, 20), rnd(rng, 100));
        if off_lines(&p, lines) && seen.insert(p.clone()) {
            out.push(p);
        }
    }
    out
}

/// `m` points in about `m / 10` tight clusters.
pub fn clustered_points(m: usize, lines: &[Line], rng: &mut ChaCha8Rng) -> Vec<Point> {
    let centers: Vec<Point> = (0..(m / 10).max(1)).map(|_| Point::new(rnd(rng, 20), rnd(rng, 100))).collect();
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(m);
    while out.len() < m {
        let c = &centers[rng.gen_range(0..centers.len())];
        let p = Point::new(&c.x + &rnd(rng, 1), &c.y + &rnd(rng, 1));
        if off_lines(&p, lines) && seen.insert(p.clone()) {
            out.push(p);
        }
    }
    out
}

/// Deterministic instance for `(kind, n, m, seed)`. Line kinds take `n`
/// lines plus `m` random points; point kinds take `m` points only.
pub fn generate(kind: Kind, n: usize, m: usize, seed: u64) -> Result<(Vec<Line>, Vec<Point>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, GEN_STREAM));
    match kind {
        Kind::RandomLines | Kind::GridLines => {
            if n == 0 {
                return Err(Error::ParamRange("n must be positive".into()));
            }
            let lines = if kind == Kind::RandomLines { random_lines(n, &mut rng) } else { grid_lines(n) };
            check_lines_general(&lines)?;
            let points = random_points(m, &lines, &mut rng);
            Ok((lines, points))
        }
        Kind::RandomPoints | Kind::ClusteredPoints => {
            if m == 0 {
                return Err(Error::ParamRange("m must be positive".into()));
            }
            let points = if kind == Kind::RandomPoints {
                random_points(m, &[], &mut rng)
            } else {
                clustered_points(m, &[], &mut rng)
            };
            Ok((Vec::new(), points))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Algo {
    ManyFacesFast,
    ManyFacesMain,
    ManyFacesNaive,
    FaceQuery,
    FaceQueryTradeoff,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
    #[serde(rename = "SKIPPED")]
    Skipped,
}

/// The first differing pair when verification fails; `None` on one side
/// means the face is missing there.
#[derive(Clone, Debug, Serialize)]
pub struct Mismatch {
    pub ours: Option<FaceJson>,
    pub oracle: Option<FaceJson>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct QuerySummary {
    pub queries: usize,
    pub mean_query_ms: f64,
    /// Median over queries of the canonical nodes and crossed leaves used for
    /// the half-plane above the dual line.
    pub median_vh: usize,
    pub max_vh: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub schema: u32,
    pub algorithm: Algo,
    pub n: usize,
    pub m: usize,
    pub r: Option<usize>,
    pub seed: u64,
    pub wall_time_s: f64,
    pub faces: usize,
    pub total_face_complexity: usize,
    pub verification: Verdict,
    /// Queries answered correctly, for the face-query algorithms.
    pub verified: Option<String>,
    pub mismatch: Option<Mismatch>,
    pub many_faces: Option<RunStats>,
    pub structure: Option<BuildStats>,
    pub queries: Option<QuerySummary>,
    pub face_list: Option<Vec<FaceJson>>,
}

#[derive(Clone, Copy, Debug)]
pub struct RunOptions {
    pub r: Option<usize>,
    pub seed: u64,
    pub verify: bool,
    pub emit_faces: bool,
}

/// Runs `algo` on the instance; `points` are the query points.
pub fn run(algo: Algo, lines: &[Line], points: &[Point], opt: RunOptions) -> Result<RunReport> {
    let algo_seed = derive_seed(opt.seed, ALGO_STREAM);
    let mut report = RunReport {
        schema: SCHEMA_VERSION,
        algorithm: algo,
        n: lines.len(),
        m: points.len(),
        r: opt.r,
        seed: opt.seed,
        wall_time_s: 0.0,
        faces: 0,
        total_face_complexity: 0,
        verification: Verdict::Skipped,
        verified: None,
        mismatch: None,
        many_faces: None,
        structure: None,
        queries: None,
        face_list: None,
    };
    let to_json = |faces: &[FaceBoundary]| faces.iter().map(|f| f.to_json(lines)).collect::<Vec<_>>();
    match algo {
        Algo::ManyFacesFast | Algo::ManyFacesMain | Algo::ManyFacesNaive => {
            let t = Instant::now();
            let faces = match algo {
                Algo::ManyFacesFast => {
                    let out = many_faces_fast_with(lines, points, opt.r, algo_seed)?;
                    report.many_faces = Some(out.stats);
                    out.faces
                }
                Algo::ManyFacesMain => {
                    let out = many_faces_main_with(lines, points, opt.r, algo_seed)?;
                    report.many_faces = Some(out.stats);
                    out.faces
                }
                _ => many_faces_naive(lines, points)?.0,
            };
            report.wall_time_s = t.elapsed().as_secs_f64();
            report.faces = faces.len();
            report.total_face_complexity = faces.iter().map(|f| f.size()).sum();
            if opt.verify {
                let want = many_faces_naive(lines, points)?.0;
                match first_mismatch(&faces, &want) {
                    None => report.verification = Verdict::Pass,
                    Some((a, b)) => {
                        report.verification = Verdict::Fail;
                        report.mismatch =
                            Some(Mismatch { ours: a.map(|f| f.to_json(lines)), oracle: b.map(|f| f.to_json(lines)) });
                    }
                }
            }
            if opt.emit_faces {
                report.face_list = Some(to_json(&faces));
            }
        }
        Algo::FaceQuery | Algo::FaceQueryTradeoff => {
            let r = if algo == Algo::FaceQuery { 1 } else { opt.r.unwrap_or_else(|| default_leaf_cap(lines.len())) };
            report.r = Some(r);
            let t = Instant::now();
            let s = fq_build_tradeoff(lines, r)?;
            let mut faces = Vec::with_capacity(points.len());
            let mut vh = Vec::with_capacity(points.len());
            let tq = Instant::now();
            for p in points {
                let (f, q) = s.query_with_stats(p)?;
                faces.push(f.boundary());
                vh.push(q.v_plus + q.partial);
            }
            let query_time = tq.elapsed().as_secs_f64();
            report.wall_time_s = t.elapsed().as_secs_f64();
            report.structure = Some(s.stats.clone());
            let mut sorted = vh.clone();
            sorted.sort_unstable();
            report.queries = Some(QuerySummary {
                queries: points.len(),
                mean_query_ms: if points.is_empty() { 0.0 } else { 1e3 * query_time / points.len() as f64 },
                median_vh: sorted.get(sorted.len() / 2).copied().unwrap_or(0),
                max_vh: sorted.last().copied().unwrap_or(0),
            });
            let mut distinct = faces.clone();
            distinct.sort();
            distinct.dedup();
            report.faces = distinct.len();
            report.total_face_complexity = distinct.iter().map(|f| f.size()).sum();
            if opt.verify {
                let arr = Arrangement::build(lines)?;
                let mut good = 0;
                for (p, f) in points.iter().zip(&faces) {
                    let want = arr.face_of(p)?;
                    if f == want {
                        good += 1;
                    } else if report.mismatch.is_none() {
                        report.mismatch =
                            Some(Mismatch { ours: Some(f.to_json(lines)), oracle: Some(want.to_json(lines)) });
                    }
                }
                report.verified = Some(format!("{good}/{}", points.len()));
                report.verification = if good == points.len() { Verdict::Pass } else { Verdict::Fail };
            }
            if opt.emit_faces {
                report.face_list = Some(to_json(&faces));
            }
        }
    }
    Ok(report)
}

/// Leaf capacity used by the tradeoff mode when none is given.
pub fn default_leaf_cap(n: usize) -> usize {
    ((n as f64).sqrt().floor() as usize).clamp(1, n.max(1))
}

/// Least-squares fit of `log y` against `log x`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// 95% confidence interval of the slope (Student t), when at least
    /// three points are available.
    pub ci95: Option<(f64, f64)>,
}

pub fn fit_loglog(points: &[(f64, f64)]) -> Option<SlopeFit> {
    let pts: Vec<(f64, f64)> =
        points.iter().filter(|(x, y)| *x > 0.0 && *y > 0.0).map(|(x, y)| (x.ln(), y.ln())).collect();
    let k = pts.len();
    if k < 2 {
        return None;
    }
    let kf = k as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / kf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / kf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ci95 = (k > 2).then(|| {
        let sse: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
        let se = (sse / (kf - 2.0) / sxx).sqrt();
        // two-sided 97.5% quantiles of Student's t for 1..=10 degrees of freedom
        const T: [f64; 10] = [12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228];
        let t = T.get(k - 3).copied().unwrap_or(1.96);
        (slope - t * se, slope + t * se)
    });
    Some(SlopeFit { slope, intercept, ci95 })
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchReport {
    pub schema: u32,
    pub algorithm: Algo,
    pub runs: Vec<RunReport>,
    /// Wall time against n.
    pub time_slope: Option<SlopeFit>,
    /// Median canonical-set size against n, for the face-query algorithms.
    pub vh_slope: Option<SlopeFit>,
}

/// Runs `algo` on a generated instance with `n` random lines and `m(n)`
/// random points for each size, all from `seed`.
pub fn bench(algo: Algo, sizes: &[(usize, usize)], opt: RunOptions) -> Result<BenchReport> {
    let mut runs = Vec::with_capacity(sizes.len());
    for &(n, m) in sizes {
        let (lines, points) = generate(Kind::RandomLines, n, m, opt.seed)?;
        runs.push(run(algo, &lines, &points, opt)?);
    }
    let time_slope = fit_loglog(&runs.iter().map(|r| (r.n as f64, r.wall_time_s)).collect::<Vec<_>>());
    let vh: Vec<(f64, f64)> =
        runs.iter().filter_map(|r| r.queries.as_ref().map(|q| (r.n as f64, q.median_vh as f64))).collect();
    Ok(BenchReport { schema: SCHEMA_VERSION, algorithm: algo, runs, time_slope, vh_slope: fit_loglog(&vh) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::format_instance;

    fn opts(verify: bool) -> RunOptions {
        RunOptions { r: None, seed: 1, verify, emit_faces: false }
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate(Kind::RandomLines, 3, 2, 1).unwrap();
        let b = generate(Kind::RandomLines, 3, 2, 1).unwrap();
        assert_eq!(format_instance(&a.0, &a.1), format_instance(&b.0, &b.1));
        let c = generate(Kind::ClusteredPoints, 0, 30, 4).unwrap();
        assert_eq!(c.1.len(), 30);
    }

    #[test]
    fn grid_lines_are_rejected() {
        assert!(matches!(generate(Kind::GridLines, 4, 0, 1), Err(Error::GeneralPosition(_))));
    }

    #[test]
    fn empty_point_set_is_out_of_range() {
        assert!(matches!(generate(Kind::RandomPoints, 0, 0, 1), Err(Error::ParamRange(_))));
    }

    #[test]
    fn triangle_run_passes() {
        let lines = vec![Line::int(0, 0), Line::int(1, 0), Line::int(-1, 2)];
        let p = vec![Point::new(Scalar::one(), Scalar::ratio(1, 2))];
        let rep = run(Algo::ManyFacesFast, &lines, &p, opts(true)).unwrap();
        assert_eq!((rep.verification, rep.faces), (Verdict::Pass, 1));
    }

    #[test]
    fn face_query_run_verifies_every_query() {
        let (lines, _) = generate(Kind::RandomLines, 40, 0, 3).unwrap();
        let (_, queries) = generate(Kind::RandomPoints, 0, 100, 4).unwrap();
        let queries: Vec<Point> = queries.into_iter().filter(|q| lines.iter().all(|l| l.side_sign(q) != 0)).collect();
        let rep = run(Algo::FaceQuery, &lines, &queries, opts(true)).unwrap();
        assert_eq!(rep.verification, Verdict::Pass);
        assert_eq!(rep.verified, Some(format!("{0}/{0}", queries.len())));
    }

    #[test]
    fn slope_fit_recovers_power_law() {
        let pts: Vec<(f64, f64)> = (1..6).map(|i| (i as f64 * 10.0, 3.0 * (i as f64 * 10.0).powf(1.5))).collect();
        let fit = fit_loglog(&pts).unwrap();
        assert!((fit.slope - 1.5).abs() < 1e-9);
        assert!(fit_loglog(&[]).is_none());
    }

    #[test]
    fn empty_sweep_gives_empty_report() {
        let rep = bench(Algo::ManyFacesFast, &[], opts(false)).unwrap();
        assert!(rep.runs.is_empty() && rep.time_slope.is_none());
    }

    #[test]
    fn repeated_seed_repeats_face_counts() {
        let a = bench(Algo::ManyFacesMain, &[(30, 30), (60, 60)], opts(false)).unwrap();
        let b = bench(Algo::ManyFacesMain, &[(30, 30), (60, 60)], opts(false)).unwrap();
        let counts = |r: &BenchReport| r.runs.iter().map(|x| x.faces).collect::<Vec<_>>();
        assert_eq!(counts(&a), counts(&b));
    }
}
