//! Nonempty faces of a line arrangement without building the arrangement.
//!
//! The first algorithm works in the dual plane. A hierarchical cutting of
//! the dual lines of the query points is built and the dual points of the
//! input lines are attached to it, with a hull per cell. For a query point
//! `p` the dual points above `p*` are exactly the points of the cells that
//! hang completely above `p*` off a crossed parent, plus the above-part of
//! the crossed cells of the last level. Those hulls are pairwise disjoint, so
//! their lower hull is assembled by merging, and the same goes for the upper
//! hull below `p*`. The face of `p` is read off between the inner common
//! tangents of the two chains.
//!
//! The main algorithm cuts the primal plane with a `(1/r)`-cutting of the
//! input lines, solves every cell with the first algorithm, and glues the
//! faces that leave their cell from the zones of the cells.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::Serialize;

use crate::chain_tree::{ChainHandle, ChainSide, Vertex};
use crate::cuttings::{attach_points, build_hierarchical_cutting, CuttingMeta, CuttingParams, HierarchicalCutting};
use crate::error::{Error, Result};
use crate::face::{FaceBoundary, FaceKey};
use crate::geom::{dual_of_line, dual_of_point, Line, Point};
use crate::hulls::{face_from_hulls, merge_disjoint_hulls, Face};
use crate::oracle::{many_faces_naive, zone_of_triangle};
use crate::region::{EdgeTag, LineKey, Region};

/// Faces found for a point set: the distinct faces and, per input point,
/// the index of its face.
#[derive(Clone, Debug)]
pub struct ManyFaces {
    pub faces: Vec<FaceBoundary>,
    pub point_face: Vec<usize>,
    pub stats: RunStats,
}

/// Measurements of one run, for reports and the scaling experiments.
#[derive(Clone, Debug, Default, Serialize)]
pub struct RunStats {
    /// `"oracle"` when the arrangement was built, `"dual"` for the first
    /// algorithm, `"cells"` for the main one.
    pub path: String,
    pub r: usize,
    pub k: usize,
    pub cutting: Option<CuttingMeta>,
    /// Sum over queries of the number of hulls merged above and below.
    pub sum_h_plus: usize,
    pub sum_h_minus: usize,
    pub cells: usize,
    pub final_faces: usize,
    pub zone_pieces: usize,
    pub glued_components: usize,
    pub total_face_size: usize,
}

/// Cutting size of the first algorithm: `min(m, floor(sqrt(n / log2 n)))`,
/// at least 1.
pub fn r_first(n: usize, m: usize) -> usize {
    if n < 3 || m == 0 {
        return 1;
    }
    let nf = n as f64;
    let r = (nf / nf.log2()).sqrt().floor() as usize;
    r.min(m).max(1)
}

/// Cutting size of the main algorithm:
/// `max(m^(2/3) / (n^(1/3) * log2^(1/3)(n / sqrt m)), 1)`, at most `n`.
pub fn r_main(n: usize, m: usize) -> usize {
    if n == 0 || m == 0 {
        return 1;
    }
    let (nf, mf) = (n as f64, m as f64);
    let lg = (nf / mf.sqrt()).log2();
    if lg <= 0.0 {
        return n.max(1);
    }
    let r = mf.powf(2.0 / 3.0) / (nf.cbrt() * lg.cbrt());
    (r.floor() as usize).clamp(1, n.max(1))
}

pub(crate) fn check_distinct_lines(lines: &[Line]) -> Result<()> {
    let mut idx: Vec<usize> = (0..lines.len()).collect();
    idx.sort_by(|&a, &b| lines[a].cmp(&lines[b]));
    for w in idx.windows(2) {
        if lines[w[0]] == lines[w[1]] {
            return Err(Error::GeneralPosition(format!("line {} is duplicated", w[1].max(w[0]))));
        }
    }
    Ok(())
}

/// Distinct points in `(x, y)` order and, per input point, its index there.
fn dedup_points(points: &[Point]) -> (Vec<Point>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..points.len()).collect();
    idx.sort_by(|&a, &b| (&points[a].x, &points[a].y).cmp(&(&points[b].x, &points[b].y)));
    let mut uniq: Vec<Point> = Vec::new();
    let mut which = vec![0; points.len()];
    for i in idx {
        if uniq.last() != Some(&points[i]) {
            uniq.push(points[i].clone());
        }
        which[i] = uniq.len() - 1;
    }
    (uniq, which)
}

/// First input point (by the index map) that lies on some line, for error
/// reports after a structural failure.
fn find_point_on_line(lines: &[Line], points: &[Point]) -> Option<Error> {
    for (j, p) in points.iter().enumerate() {
        for (i, l) in lines.iter().enumerate() {
            if l.side_sign(p) == 0 {
                return Some(Error::PointOnLine { point: j, line: i });
            }
        }
    }
    None
}

/// The preprocessed dual structure of the first algorithm.
#[derive(Clone, Debug)]
pub struct DualPreprocess {
    pub cutting: HierarchicalCutting,
    pub r: usize,
    /// Dual lines of the (distinct) query points.
    pub duals: Vec<Line>,
}

/// Builds the cutting of the dual lines of `points`, attaches the dual
/// points of `lines` (ids are line indices) and their hulls. `r` defaults to
/// [`r_first`]. Points must be distinct.
pub fn preprocess_dual(lines: &[Line], points: &[Point], r: Option<usize>, seed: u64) -> Result<DualPreprocess> {
    let m = points.len();
    if m == 0 {
        return Err(Error::ParamRange("at least one query point is needed".into()));
    }
    let r = r.unwrap_or_else(|| r_first(lines.len(), m));
    if r == 0 || r > m {
        return Err(Error::ParamRange(format!("r = {r} must lie in [1, {m}]")));
    }
    let duals: Vec<Line> = points.iter().map(dual_of_point).collect();
    let mut stars: Vec<Vertex> = lines.iter().enumerate().map(|(i, l)| Vertex::new(dual_of_line(l), i)).collect();
    stars.sort_by(|a, b| (&a.pt.x, &a.pt.y).cmp(&(&b.pt.x, &b.pt.y)));
    let mut last_err = None;
    // a dual point on a cell edge is a general-position failure only when
    // the edge lies on a dual line; auxiliary edges depend on the sample
    for attempt in 0..4u64 {
        let params = CuttingParams { seed: seed.wrapping_add(attempt.wrapping_mul(0x9e37_79b9)), ..Default::default() };
        let c = build_hierarchical_cutting(&duals, r, params)?;
        match attach_points(c, stars.clone()) {
            Ok(cutting) => return Ok(DualPreprocess { cutting, r, duals }),
            Err(e @ Error::PointOnCellEdge(_)) => {
                if let Some(e) = find_point_on_line(lines, points) {
                    return Err(e);
                }
                last_err = Some(e);
            }
            Err(e) => return Err(e),
        }
    }
    Err(last_err.expect("at least one attempt"))
}

impl DualPreprocess {
    /// Lower hull of the dual points strictly above `p_star`, and the number
    /// of hulls merged for it.
    pub fn hull_above(&self, p_star: &Line) -> Result<(ChainHandle, usize)> {
        self.half_hull(p_star, true)
    }

    /// Upper hull of the dual points strictly below `p_star`, and the number
    /// of hulls merged for it.
    pub fn hull_below(&self, p_star: &Line) -> Result<(ChainHandle, usize)> {
        self.half_hull(p_star, false)
    }

    fn half_hull(&self, p_star: &Line, above: bool) -> Result<(ChainHandle, usize)> {
        let c = &self.cutting;
        let side = if above { ChainSide::Lower } else { ChainSide::Upper };
        let (crossed, extra) = c.crossing_cells(p_star);
        let whole = c.side_cells(p_star, &crossed, above);
        let mut chains = Vec::with_capacity(whole.len() + extra.len());
        for &id in &whole {
            let h = c.hull(id).expect("points attached");
            chains.push(match side {
                ChainSide::Lower => h.lower.clone(),
                ChainSide::Upper => h.upper.clone(),
            });
        }
        for &id in &extra {
            chains.push(c.partial_hull(id, p_star, above, side)?);
        }
        let t = chains.len();
        Ok((merge_disjoint_hulls(&chains, side)?, t))
    }

    /// Fingerprints of every stored hull chain, for persistence audits.
    pub fn fingerprints(&self) -> Vec<u64> {
        self.cutting
            .cells
            .iter()
            .filter_map(|c| c.hull.as_ref())
            .flat_map(|h| [h.lower.fingerprint(), h.upper.fingerprint()])
            .collect()
    }

    /// Face of the query point with dual `p_star`, and the hull counts.
    pub fn face_of_dual(&self, p_star: &Line) -> Result<(Face, usize, usize)> {
        let (hp, tp) = self.hull_above(p_star)?;
        let (hm, tm) = self.hull_below(p_star)?;
        Ok((face_from_hulls(&hp, &hm, p_star)?, tp, tm))
    }

    /// Exhaustive check of the decomposition used for `p_star`: the stored
    /// points of the selected cells are exactly the dual points on each side,
    /// and no selected cell contains another. With a cutting that passes
    /// [`HierarchicalCutting::verify`] the latter means the selected cells
    /// are pairwise interior-disjoint.
    pub fn audit(&self, p_star: &Line) -> std::result::Result<(), String> {
        let c = &self.cutting;
        let (crossed, extra) = c.crossing_cells(p_star);
        for above in [true, false] {
            let want_sign = if above { 1 } else { -1 };
            let whole = c.side_cells(p_star, &crossed, above);
            let mut got: Vec<usize> = whole.iter().flat_map(|&id| c.cells[id].points.iter().copied()).collect();
            for &id in &extra {
                got.extend(
                    c.cells[id].points.iter().copied().filter(|&p| p_star.side_sign(&c.points()[p].pt) == want_sign),
                );
            }
            got.sort_unstable();
            let want: Vec<usize> =
                (0..c.points().len()).filter(|&p| p_star.side_sign(&c.points()[p].pt) == want_sign).collect();
            if got != want {
                return Err(format!(
                    "union of selected cells differs from the points {} the line",
                    if above { "above" } else { "below" }
                ));
            }
            // cells of a certified cutting overlap only when one is an
            // ancestor of the other
            let chosen: HashSet<usize> = whole.iter().chain(&extra).copied().collect();
            for &id in &chosen {
                let mut up = c.cells[id].parent;
                while let Some(a) = up {
                    if chosen.contains(&a) {
                        return Err(format!("selected cell {id} lies inside selected cell {a}"));
                    }
                    up = c.cells[a].parent;
                }
            }
        }
        Ok(())
    }
}

fn face_key(f: &Face) -> FaceKey {
    match &f.leftmost {
        Some(p) => FaceKey::Leftmost(p.clone()),
        None => FaceKey::LeftOpen { lower: f.lower.first().map(|v| v.id), upper: f.upper.last().map(|v| v.id) },
    }
}

fn remap_point_error(e: Error, which: &[usize]) -> Error {
    match e {
        Error::PointOnLine { point, line } => {
            Error::PointOnLine { point: which.iter().position(|&u| u == point).unwrap_or(point), line }
        }
        e => e,
    }
}

fn whole_plane(m: usize) -> ManyFaces {
    let faces = if m == 0 { vec![] } else { vec![FaceBoundary::from_line_sets(vec![], vec![], &[])] };
    ManyFaces { faces, point_face: vec![0; m], stats: RunStats { path: "oracle".into(), r: 1, ..Default::default() } }
}

fn via_oracle(lines: &[Line], points: &[Point]) -> Result<ManyFaces> {
    let (faces, point_face) = many_faces_naive(lines, points)?;
    let total_face_size = faces.iter().map(FaceBoundary::size).sum();
    Ok(ManyFaces {
        faces,
        point_face,
        stats: RunStats { path: "oracle".into(), r: 1, total_face_size, ..Default::default() },
    })
}

/// Distinct faces containing the points, by the dual-cutting algorithm.
/// Delegates to the arrangement when `m >= n^2 / 2`.
///
/// Only cheap general-position checks are made (duplicate lines, points on
/// lines as they are met); use [`crate::geom::check_lines_general`] for
/// concurrency.
pub fn many_faces_fast(lines: &[Line], points: &[Point]) -> Result<ManyFaces> {
    many_faces_fast_with(lines, points, None, 0)
}

/// [`many_faces_fast`] with an explicit cutting size and seed.
pub fn many_faces_fast_with(lines: &[Line], points: &[Point], r: Option<usize>, seed: u64) -> Result<ManyFaces> {
    let (n, m) = (lines.len(), points.len());
    if n == 0 {
        return Ok(whole_plane(m));
    }
    if m == 0 {
        return Ok(ManyFaces { faces: vec![], point_face: vec![], stats: RunStats::default() });
    }
    if r.is_none() && 2 * m >= n * n {
        return via_oracle(lines, points);
    }
    check_distinct_lines(lines)?;
    let (uniq, which) = dedup_points(points);
    let pre =
        preprocess_dual(lines, &uniq, r.map(|r| r.min(uniq.len())), seed).map_err(|e| remap_point_error(e, &which))?;
    let mut stats = RunStats {
        path: "dual".into(),
        r: pre.r,
        k: pre.cutting.k,
        cutting: Some(pre.cutting.meta.clone()),
        ..Default::default()
    };
    let mut seen: HashMap<FaceKey, usize> = HashMap::new();
    let mut faces = Vec::new();
    let mut uniq_face = Vec::with_capacity(uniq.len());
    for (j, p_star) in pre.duals.iter().enumerate() {
        let (face, tp, tm) = pre.face_of_dual(p_star).map_err(|e| match e {
            Error::PointOnLine { line, .. } => remap_point_error(Error::PointOnLine { point: j, line }, &which),
            e => e,
        })?;
        stats.sum_h_plus += tp;
        stats.sum_h_minus += tm;
        let id = *seen.entry(face_key(&face)).or_insert_with(|| {
            faces.push(face.boundary());
            faces.len() - 1
        });
        uniq_face.push(id);
    }
    let mut point_face = vec![0; m];
    let mut order = vec![usize::MAX; faces.len()];
    let mut sorted_faces = Vec::with_capacity(faces.len());
    // report faces in order of first appearance among the input points
    for (i, &u) in which.iter().enumerate() {
        let f = uniq_face[u];
        if order[f] == usize::MAX {
            order[f] = sorted_faces.len();
            sorted_faces.push(faces[f].clone());
        }
        point_face[i] = order[f];
    }
    stats.total_face_size = sorted_faces.iter().map(FaceBoundary::size).sum();
    Ok(ManyFaces { faces: sorted_faces, point_face, stats })
}

/// The convex region of a face, as an intersection of the half-planes of
/// its boundary lines.
pub fn face_to_region(f: &FaceBoundary, lines: &[Line]) -> Region {
    let mut r = Region::plane();
    for &i in &f.lower {
        r = r.clip(&lines[i].as_cut(), EdgeTag::Line(i)).expect("face is nonempty");
    }
    for &i in &f.upper {
        r = r.clip(&lines[i].as_cut().reversed(), EdgeTag::Line(i)).expect("face is nonempty");
    }
    r
}

/// Disjoint-set forest.
struct Dsu(Vec<usize>);

impl Dsu {
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            self.0[a.max(b)] = a.min(b);
        }
    }
}

/// `lo < hi` where `None` is minus infinity on the left and plus infinity
/// on the right.
fn before(lo: &Option<crate::geom::Scalar>, hi: &Option<crate::geom::Scalar>) -> bool {
    match (lo, hi) {
        (Some(a), Some(b)) => a < b,
        _ => true,
    }
}

struct Zones {
    /// `(cell, piece)` per zone piece.
    pieces: Vec<(usize, Region)>,
    by_cell: HashMap<usize, Vec<usize>>,
    dsu: Dsu,
}

/// Interval `(lo, hi)` of a piece edge on a cell edge line, and the piece.
type Span = (Option<crate::geom::Scalar>, Option<crate::geom::Scalar>, usize);

/// Zones of all cells, glued across shared edge fragments that do not lie on
/// an input line.
fn glued_zones(c: &HierarchicalCutting, lines: &[Line]) -> Result<Zones> {
    let on_input: HashMap<LineKey, usize> =
        lines.iter().enumerate().map(|(i, l)| (LineKey::from_point_dir(&l.anchor(), &l.direction()), i)).collect();
    let mut pieces = Vec::new();
    let mut by_cell: HashMap<usize, Vec<usize>> = HashMap::new();
    let mut groups: BTreeMap<LineKey, Vec<Span>> = BTreeMap::new();
    for &cid in &c.levels[c.k] {
        let cell = &c.cells[cid];
        let local: Vec<Line> = cell.conflicts.iter().map(|&i| lines[i].clone()).collect();
        // cell edges may lie on input lines; tag them neutrally so that the
        // zone keeps every piece touching the cell boundary
        let base_tags: Vec<EdgeTag> = cell
            .region
            .tags()
            .iter()
            .enumerate()
            .map(|(i, t)| if *t == EdgeTag::Infinite { EdgeTag::Infinite } else { EdgeTag::Boundary(i as u32) })
            .collect();
        let base = Region::from_parts(cell.region.vertices().to_vec(), base_tags);
        // final tag of each cell edge, with its supporting line when pieces
        // on it are glued to the neighbours
        let edge_info: Vec<(EdgeTag, Option<LineKey>)> = (0..base.len())
            .map(|i| match base.edge_key(i) {
                None => (EdgeTag::Infinite, None),
                Some(key) => match on_input.get(&key) {
                    Some(&l) => (EdgeTag::Line(l), None),
                    None => (EdgeTag::Aux, Some(key)),
                },
            })
            .collect();
        for z in zone_of_triangle(&local, &base)? {
            let pid = pieces.len();
            let mut tags = Vec::with_capacity(z.len());
            for (e, t) in z.tags().iter().enumerate() {
                tags.push(match *t {
                    EdgeTag::Line(i) => EdgeTag::Line(cell.conflicts[i]),
                    EdgeTag::Boundary(b) => {
                        let (tag, key) = &edge_info[b as usize];
                        if let Some(key) = key {
                            let span = z.edge_span(e, key.clone());
                            groups.entry(span.key).or_default().push((span.lo, span.hi, pid));
                        }
                        *tag
                    }
                    t => t,
                });
            }
            by_cell.entry(cid).or_default().push(pid);
            pieces.push((cid, Region::from_parts(z.vertices().to_vec(), tags)));
        }
    }
    let mut dsu = Dsu((0..pieces.len()).collect());
    for (_, mut spans) in groups {
        spans.sort_by(|a, b| match (&a.0, &b.0) {
            (None, None) => std::cmp::Ordering::Equal,
            (None, _) => std::cmp::Ordering::Less,
            (_, None) => std::cmp::Ordering::Greater,
            (Some(x), Some(y)) => x.cmp(y),
        });
        let mut active: Vec<usize> = Vec::new();
        for i in 0..spans.len() {
            active.retain(|&a| before(&spans[i].0, &spans[a].1));
            for &a in &active {
                if spans[a].2 != spans[i].2 {
                    dsu.union(spans[a].2, spans[i].2);
                }
            }
            active.push(i);
        }
    }
    Ok(Zones { pieces, by_cell, dsu })
}

/// Boundary of a glued face from the line-tagged edges of its pieces.
fn glued_boundary(members: &[&Region], lines: &[Line]) -> FaceBoundary {
    let mut lower = Vec::new();
    let mut upper = Vec::new();
    for z in members {
        for (i, t) in z.tags().iter().enumerate() {
            if let EdgeTag::Line(l) = *t {
                let cut = z.edge_cut(i).expect("line edges are finite");
                // interior on the left: rightward edges bound from below
                if cut.dir.x.signum() > 0 {
                    lower.push(l);
                } else {
                    upper.push(l);
                }
            }
        }
    }
    FaceBoundary::from_line_sets(lower, upper, lines)
}

/// Cell of the last level containing `p`; a point on a cell edge goes to
/// the smallest adjacent cell id.
fn locate_cell(c: &HierarchicalCutting, p: &Point) -> usize {
    let mut cur = c.levels[0][0];
    while !c.cells[cur].children.is_empty() && c.cells[cur].level < c.k {
        let mut on_edge = None;
        let mut inside = None;
        for &ch in &c.cells[cur].children {
            match c.cells[ch].region.locate(p) {
                1 => {
                    inside = Some(ch);
                    break;
                }
                0 => {
                    on_edge = Some(on_edge.map_or(ch, |e: usize| e.min(ch)));
                }
                _ => {}
            }
        }
        cur = inside.or(on_edge).expect("children cover their parent");
    }
    cur
}

/// Distinct faces containing the points, by the cutting-and-zone algorithm.
/// Delegates to the arrangement when `m >= n^2 / 2`.
pub fn many_faces_main(lines: &[Line], points: &[Point]) -> Result<ManyFaces> {
    many_faces_main_with(lines, points, None, 0)
}

/// [`many_faces_main`] with an explicit cutting size and seed.
pub fn many_faces_main_with(lines: &[Line], points: &[Point], r: Option<usize>, seed: u64) -> Result<ManyFaces> {
    let (n, m) = (lines.len(), points.len());
    if n == 0 {
        return Ok(whole_plane(m));
    }
    if m == 0 {
        return Ok(ManyFaces { faces: vec![], point_face: vec![], stats: RunStats::default() });
    }
    if r.is_none() && 2 * m >= n * n {
        return via_oracle(lines, points);
    }
    check_distinct_lines(lines)?;
    let r = r.unwrap_or_else(|| r_main(n, m)).clamp(1, n);
    let mut last_err = None;
    for attempt in 0..4u64 {
        match main_attempt(lines, points, r, seed.wrapping_add(attempt.wrapping_mul(0x9e37_79b9))) {
            Err(e @ Error::GeneralPosition(_)) => last_err = Some(e),
            other => return other,
        }
    }
    // persistent failures come from the input itself
    crate::geom::check_lines_general(lines)?;
    Err(last_err.expect("at least one attempt"))
}

fn main_attempt(lines: &[Line], points: &[Point], r: usize, seed: u64) -> Result<ManyFaces> {
    let m = points.len();
    let (uniq, which) = dedup_points(points);
    let c = build_hierarchical_cutting(lines, r, CuttingParams { seed, ..Default::default() })?;
    let mut in_cell: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (j, p) in uniq.iter().enumerate() {
        in_cell.entry(locate_cell(&c, p)).or_default().push(j);
    }
    let mut stats = RunStats {
        path: "cells".into(),
        r,
        k: c.k,
        cutting: Some(c.meta.clone()),
        cells: c.levels[c.k].len(),
        ..Default::default()
    };
    // per distinct point: Ok(final face) or Err(cell) when it leaves the cell
    let mut local_face: Vec<std::result::Result<FaceBoundary, usize>> = vec![Err(usize::MAX); uniq.len()];
    for (&cid, pts) in &in_cell {
        let cell = &c.cells[cid];
        let sub: Vec<Line> = cell.conflicts.iter().map(|&i| lines[i].clone()).collect();
        let sub_pts: Vec<Point> = pts.iter().map(|&j| uniq[j].clone()).collect();
        let res = many_faces_fast_with(&sub, &sub_pts, None, seed).map_err(|e| match e {
            Error::PointOnLine { point, line } => Error::PointOnLine {
                point: which.iter().position(|&u| u == pts[point]).unwrap_or(point),
                line: cell.conflicts[line],
            },
            e => e,
        })?;
        let cuts: Vec<_> = (0..cell.region.len()).filter_map(|i| cell.region.edge_cut(i)).collect();
        let mut verdict: Vec<Option<bool>> = vec![None; res.faces.len()];
        for (k, &j) in pts.iter().enumerate() {
            let fi = res.point_face[k];
            let f = &res.faces[fi];
            let global = FaceBoundary {
                lower: f.lower.iter().map(|&i| cell.conflicts[i]).collect(),
                upper: f.upper.iter().map(|&i| cell.conflicts[i]).collect(),
                leftmost: f.leftmost.clone(),
                rightmost: f.rightmost.clone(),
            };
            let inside = *verdict[fi].get_or_insert_with(|| {
                let reg = face_to_region(&global, lines);
                cuts.iter().all(|cut| reg.within(cut))
            });
            local_face[j] = if inside { Ok(global) } else { Err(cid) };
        }
    }
    let needs_zones = local_face.iter().any(|f| f.is_err());
    let mut zones = if needs_zones { Some(glued_zones(&c, lines)?) } else { None };
    let mut seen_final: HashMap<FaceKey, usize> = HashMap::new();
    let mut seen_root: HashMap<usize, usize> = HashMap::new();
    let mut members: Option<HashMap<usize, Vec<usize>>> = None;
    let mut faces: Vec<FaceBoundary> = Vec::new();
    let mut uniq_face = vec![0; uniq.len()];
    for (j, lf) in local_face.into_iter().enumerate() {
        match lf {
            Ok(f) => {
                let id = *seen_final.entry(f.key()).or_insert_with(|| {
                    faces.push(f);
                    faces.len() - 1
                });
                uniq_face[j] = id;
            }
            Err(cid) => {
                let z = zones.as_mut().expect("zones computed");
                let cands = z.by_cell.get(&cid).map(Vec::as_slice).unwrap_or(&[]);
                let mut hit = None;
                for &pid in cands {
                    match z.pieces[pid].1.locate(&uniq[j]) {
                        1 => {
                            hit = Some(pid);
                            break;
                        }
                        0 => hit = hit.or(Some(pid)),
                        _ => {}
                    }
                }
                let pid = hit.ok_or_else(|| Error::GeneralPosition(format!("point {} in no zone piece", j)))?;
                let root = z.dsu.find(pid);
                let id = match seen_root.get(&root) {
                    Some(&id) => id,
                    None => {
                        let groups = members.get_or_insert_with(|| {
                            let mut g: HashMap<usize, Vec<usize>> = HashMap::new();
                            for q in 0..z.pieces.len() {
                                g.entry(z.dsu.find(q)).or_default().push(q);
                            }
                            g
                        });
                        let regions: Vec<&Region> = groups[&root].iter().map(|&q| &z.pieces[q].1).collect();
                        faces.push(glued_boundary(&regions, lines));
                        seen_root.insert(root, faces.len() - 1);
                        faces.len() - 1
                    }
                };
                uniq_face[j] = id;
            }
        }
    }
    stats.final_faces = seen_final.len();
    if let Some(z) = zones.as_mut() {
        stats.zone_pieces = z.pieces.len();
        let mut roots: HashSet<usize> = HashSet::new();
        for q in 0..z.pieces.len() {
            roots.insert(z.dsu.find(q));
        }
        stats.glued_components = roots.len();
    }
    let mut point_face = vec![0; m];
    let mut order = vec![usize::MAX; faces.len()];
    let mut out = Vec::with_capacity(faces.len());
    for (i, &u) in which.iter().enumerate() {
        let f = uniq_face[u];
        if order[f] == usize::MAX {
            order[f] = out.len();
            out.push(faces[f].clone());
        }
        point_face[i] = order[f];
    }
    stats.total_face_size = out.iter().map(FaceBoundary::size).sum();
    Ok(ManyFaces { faces: out, point_face, stats })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::face::sort_faces;
    use crate::geom::Scalar;
    use crate::hulls::hull_of_points;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rnd_scalar(rng: &mut ChaCha8Rng, span: i64) -> Scalar {
        Scalar::ratio(rng.gen_range(-span * 1000..span * 1000), rng.gen_range(1..1000))
    }

    pub(crate) fn instance(rng: &mut ChaCha8Rng, n: usize, m: usize) -> (Vec<Line>, Vec<Point>) {
        let lines = (0..n).map(|_| Line::new(rnd_scalar(rng, 5), rnd_scalar(rng, 50))).collect();
        let points = (0..m).map(|_| Point::new(rnd_scalar(rng, 20), rnd_scalar(rng, 100))).collect();
        (lines, points)
    }

    fn same_faces(mut a: Vec<FaceBoundary>, mut b: Vec<FaceBoundary>) -> bool {
        sort_faces(&mut a);
        sort_faces(&mut b);
        a == b
    }

    #[test]
    fn r_formulas() {
        assert_eq!(r_first(64, 64), 3);
        assert_eq!(r_first(100, 10_000), 3);
        assert_eq!(r_first(64, 1), 1);
        assert_eq!(r_main(10, 2), 1);
        assert_eq!(r_main(2048, 2048), 7);
    }

    #[test]
    fn triangle_and_strip() {
        let lines = vec![Line::int(0, 0), Line::int(1, 0), Line::int(-1, 2)];
        let p = vec![Point::new(Scalar::one(), Scalar::ratio(1, 2))];
        let got = many_faces_fast_with(&lines, &p, Some(1), 0).unwrap();
        assert_eq!(got.faces.len(), 1);
        assert!(got.faces[0].is_bounded());
        assert_eq!(got.faces[0].upper, vec![1, 2]);
        let lines = vec![Line::int(0, 1), Line::int(0, -1)];
        let pts = vec![Point::int(0, 0), Point::int(0, 10)];
        let got = many_faces_fast_with(&lines, &pts, Some(1), 0).unwrap();
        assert_eq!(got.faces.len(), 2);
        assert_eq!((got.faces[0].lower.clone(), got.faces[0].upper.clone()), (vec![1], vec![0]));
        assert_eq!((got.faces[1].lower.clone(), got.faces[1].upper.clone()), (vec![0], vec![]));
    }

    #[test]
    fn hull_above_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (lines, points) = instance(&mut rng, 80, 30);
        let (uniq, _) = dedup_points(&points);
        let pre = preprocess_dual(&lines, &uniq, Some(4), 1).unwrap();
        pre.cutting.verify().unwrap();
        let before = pre.fingerprints();
        for p_star in &pre.duals {
            pre.audit(p_star).unwrap();
            let above: Vec<Vertex> = lines
                .iter()
                .enumerate()
                .map(|(i, l)| Vertex::new(dual_of_line(l), i))
                .filter(|v| p_star.side_sign(&v.pt) > 0)
                .collect();
            let below: Vec<Vertex> = lines
                .iter()
                .enumerate()
                .map(|(i, l)| Vertex::new(dual_of_line(l), i))
                .filter(|v| p_star.side_sign(&v.pt) < 0)
                .collect();
            let (hp, _) = pre.hull_above(p_star).unwrap();
            let (hm, _) = pre.hull_below(p_star).unwrap();
            assert_eq!(hp.to_vec(), hull_of_points(above).unwrap().lower.to_vec());
            assert_eq!(hm.to_vec(), hull_of_points(below).unwrap().upper.to_vec());
        }
        assert_eq!(before, pre.fingerprints());
    }

    #[test]
    fn fast_matches_naive() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for (n, m) in [(60, 40), (30, 100), (100, 20), (5, 3)] {
            let (lines, points) = instance(&mut rng, n, m);
            let want = many_faces_naive(&lines, &points).unwrap();
            for r in [None, Some(1), Some(4)] {
                let got = many_faces_fast_with(&lines, &points, r, 3).unwrap();
                assert!(same_faces(got.faces.clone(), want.0.clone()), "n={n} m={m} r={r:?}");
                for (j, &f) in got.point_face.iter().enumerate() {
                    assert_eq!(got.faces[f], want.0[want.1[j]]);
                }
            }
        }
    }

    #[test]
    fn main_matches_naive() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for (n, m, r) in [(100, 100, None), (40, 60, Some(4)), (60, 30, Some(8)), (12, 40, Some(1))] {
            let (lines, points) = instance(&mut rng, n, m);
            let want = many_faces_naive(&lines, &points).unwrap();
            let got = many_faces_main_with(&lines, &points, r, 5).unwrap();
            assert!(same_faces(got.faces.clone(), want.0.clone()), "n={n} m={m} r={r:?}");
            for (j, &f) in got.point_face.iter().enumerate() {
                assert_eq!(got.faces[f], want.0[want.1[j]]);
            }
        }
    }

    #[test]
    fn face_spanning_two_cells_is_glued() {
        // the cutting of 2 lines with r = 2 cuts along both lines, so the
        // four quadrant faces each span several cells
        let lines = vec![Line::int(1, 0), Line::int(-1, 0), Line::int(0, 5), Line::int(2, -30)];
        let pts = vec![Point::int(0, -1), Point::int(3, 1), Point::int(0, 100), Point::int(-50, 0)];
        let want = many_faces_naive(&lines, &pts).unwrap();
        for seed in 0..5 {
            let got = many_faces_main_with(&lines, &pts, Some(2), seed).unwrap();
            assert!(same_faces(got.faces.clone(), want.0.clone()), "seed {seed}");
            assert!(got.stats.zone_pieces > got.stats.glued_components);
        }
    }

    #[test]
    fn point_on_line_is_reported() {
        let lines = vec![Line::int(1, 0), Line::int(-1, 3), Line::int(0, 7)];
        let pts = vec![Point::int(5, 5), Point::int(0, 1), Point::int(10, 11)];
        let err = many_faces_fast_with(&lines, &pts, Some(2), 0).unwrap_err();
        assert!(matches!(err, Error::PointOnLine { point: 0, line: 0 }), "{err:?}");
    }
}
