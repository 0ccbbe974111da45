//! Hierarchical cuttings of a line set.
//!
//! Level 0 is the whole plane. Each cell of level `i` is refined into
//! children crossed by at most `n / rho^(i+1)` lines: a random sample of the
//! cell's conflict list cuts the cell, the pieces are fan-triangulated from
//! their bottom vertex, and the result is checked against the bound. Cells
//! that fail are retried with a fresh, slightly larger sample, so the
//! returned structure always meets the bounds exactly.
//!
//! After points are attached, an extra level splits every overfull cell of
//! the last level into triangles holding few points each.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::chain_tree::{ChainHandle, ChainSide, Vertex};
use crate::error::{Error, Result};
use crate::geom::{Cut, Line, Point, Scalar, Vector};
use crate::hulls::{chain_of_sorted, hull_of_sorted, Hull};
use crate::region::{EdgeTag, GVertex, Region};

#[derive(Clone, Debug)]
pub struct Cell {
    pub region: Region,
    pub level: usize,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    /// Lines crossing the open interior.
    pub conflicts: Vec<usize>,
    /// Indices of attached points inside the cell, in (x, y) order.
    pub points: Vec<usize>,
    pub hull: Option<Hull>,
}

#[derive(Clone, Debug, Default, Serialize, PartialEq)]
pub struct CuttingMeta {
    pub level_sizes: Vec<usize>,
    pub max_children: usize,
    /// Cells that needed refinement (had too many conflicts).
    pub refined_cells: usize,
    /// Failed attempts over all refined cells.
    pub retries: usize,
    /// Refinements that gave up on the child cap to meet the conflict bound.
    pub cap_exceeded: usize,
    /// Largest `conflicts * rho^i / n` over all cells of level `i >= 1`.
    pub max_conflict_ratio: f64,
    /// Largest `cells(i) / rho^(2i)`.
    pub size_constant: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct CuttingParams {
    pub rho: usize,
    pub child_cap: usize,
    pub seed: u64,
}

impl Default for CuttingParams {
    fn default() -> Self {
        CuttingParams { rho: 2, child_cap: 32, seed: 0 }
    }
}

#[derive(Clone, Debug)]
pub struct HierarchicalCutting {
    pub cells: Vec<Cell>,
    /// Cell ids per level `0..=k`, and after [`attach_points`] level `k + 1`.
    pub levels: Vec<Vec<usize>>,
    pub r: usize,
    pub rho: usize,
    pub k: usize,
    pub meta: CuttingMeta,
    lines: Vec<Line>,
    points: Vec<Vertex>,
}

/// Smallest `k` with `rho^k >= r`.
pub fn depth_for(r: usize, rho: usize) -> usize {
    let mut k = 0;
    let mut p = 1usize;
    while p < r {
        p = p.saturating_mul(rho);
        k += 1;
    }
    k
}

fn crossing_subset(region: &Region, lines: &[Line], among: &[usize]) -> Vec<usize> {
    among.iter().copied().filter(|&i| region.crossed_by_line(&lines[i])).collect()
}

/// Pieces of `cell` cut by `cuts`, each with at least one finite corner.
fn cut_into_pieces(cell: &Region, cuts: &[Cut]) -> Vec<Region> {
    let mut pieces = vec![cell.clone()];
    for c in cuts {
        let mut next = Vec::with_capacity(pieces.len() + 2);
        for p in pieces {
            if p.crossed_by(c) {
                let (a, b) = p.split(c, EdgeTag::Aux);
                next.extend(a);
                next.extend(b);
            } else {
                next.push(p);
            }
        }
        pieces = next;
    }
    pieces.into_iter().flat_map(|p| with_corners(p, &[])).collect()
}

/// Splits a region without a finite corner (plane, half-plane or strip) by
/// cuts crossing its edges until every piece has one. The cuts avoid the
/// points in `avoid`.
fn with_corners(piece: Region, avoid: &[Point]) -> Vec<Region> {
    if piece.has_corner() {
        return vec![piece];
    }
    let dir = (0..piece.len())
        .find_map(|i| piece.edge_cut(i))
        .map_or(Vector::int(0, 1), |c| Vector::new(-&c.dir.y, c.dir.x.clone()));
    let along = Vector::new(dir.y.clone(), -&dir.x);
    let base = piece.interior_point();
    let mut t = 0i64;
    let cut = loop {
        let cut = Cut::new(base.offset(&along.scale(&Scalar::from_int(t))), dir.clone());
        if avoid.iter().all(|q| cut.side(q) != 0) {
            break cut;
        }
        t += 1;
    };
    let (a, b) = piece.split(&cut, EdgeTag::Aux);
    a.into_iter().chain(b).flat_map(|p| with_corners(p, avoid)).collect()
}

struct Refinement {
    children: Vec<(Region, Vec<usize>)>,
    retries: usize,
    cap_exceeded: bool,
}

/// Children of a cell whose conflict lists respect `bound`, or the cell itself
/// when it already does.
fn refine(
    cell: &Region,
    conflicts: &[usize],
    lines: &[Line],
    bound_ok: &dyn Fn(usize) -> bool,
    cap: usize,
    rho: usize,
    rng: &mut ChaCha8Rng,
) -> Refinement {
    if bound_ok(conflicts.len()) {
        return Refinement { children: vec![(cell.clone(), conflicts.to_vec())], retries: 0, cap_exceeded: false };
    }
    const MAX_ATTEMPTS: usize = 16;
    let h = conflicts.len();
    let mut s = (2 * rho + 1).min(h);
    // largest sample size seen to miss the conflict bound
    let mut too_small = 0;
    let mut cap_misses = 0;
    let mut retries = 0;
    let mut fallback: Option<Vec<(Region, Vec<usize>)>> = None;
    loop {
        let chosen: Vec<usize> =
            if s == h { conflicts.to_vec() } else { sample(rng, h, s).into_iter().map(|j| conflicts[j]).collect() };
        let cuts: Vec<Cut> = chosen.iter().map(|&i| lines[i].as_cut()).collect();
        let tris: Vec<Region> = cut_into_pieces(cell, &cuts).iter().flat_map(|p| p.triangulate()).collect();
        let mut children = Vec::with_capacity(tris.len());
        let mut bound_met = true;
        for t in tris {
            let c = crossing_subset(&t, lines, conflicts);
            if !bound_ok(c.len()) {
                bound_met = false;
                break;
            }
            children.push((t, c));
        }
        if bound_met && children.len() <= cap {
            return Refinement { children, retries, cap_exceeded: false };
        }
        if bound_met {
            if fallback.as_ref().is_none_or(|f| f.len() > children.len()) {
                fallback = Some(children);
            }
            // resample once at the same size before going smaller
            cap_misses += 1;
            if cap_misses >= 2 && s > too_small + 1 {
                s -= 1;
                cap_misses = 0;
            }
        } else {
            too_small = too_small.max(s);
            s = (s + 1).min(h);
            cap_misses = 0;
        }
        retries += 1;
        if retries >= MAX_ATTEMPTS {
            if let Some(f) = fallback {
                return Refinement { children: f, retries, cap_exceeded: true };
            }
            // with every conflict line as a cut no child is crossed at all
            s = h;
        }
    }
}

impl HierarchicalCutting {
    pub fn lines(&self) -> &[Line] {
        &self.lines
    }

    pub fn points(&self) -> &[Vertex] {
        &self.points
    }

    /// Whether `count` conflicts are within the bound of level `i`:
    /// `count <= n / rho^i`.
    pub fn within_bound(&self, count: usize, level: usize) -> bool {
        within(count, self.lines.len(), self.rho, level)
    }

    pub fn has_point_level(&self) -> bool {
        self.levels.len() == self.k + 2
    }

    /// Cap on points per cell of the extra level.
    pub fn point_cap(&self) -> usize {
        (self.points.len() / (self.r * self.r)).max(1)
    }

    /// Exhaustive certificate: conflict lists are exact and within bounds,
    /// children lie in their parent without overlapping and make up the
    /// next level, and every attached point is stored strictly inside
    /// exactly one cell per level.
    pub fn verify(&self) -> std::result::Result<(), String> {
        let all: Vec<usize> = (0..self.lines.len()).collect();
        for (lvl, ids) in self.levels.iter().enumerate() {
            for &c in ids {
                let cell = &self.cells[c];
                let exact = crossing_subset(&cell.region, &self.lines, &all);
                if exact != cell.conflicts {
                    return Err(format!("cell {c}: stored conflict list differs from the exhaustive one"));
                }
                if lvl <= self.k && !self.within_bound(exact.len(), lvl) {
                    return Err(format!("cell {c} at level {lvl} crossed by {} lines", exact.len()));
                }
                if lvl == self.k + 1 && cell.points.len() > self.point_cap() {
                    return Err(format!("cell {c} holds {} points", cell.points.len()));
                }
            }
            if !self.points.is_empty() && self.has_point_level() {
                let mut count = vec![0usize; self.points.len()];
                for &c in ids {
                    for &p in &self.cells[c].points {
                        count[p] += 1;
                        if self.cells[c].region.locate(&self.points[p].pt) != 1 {
                            return Err(format!("point {p} not inside its cell {c}"));
                        }
                    }
                }
                if let Some(p) = count.iter().position(|&k| k != 1) {
                    return Err(format!("point {p} stored {} times at level {lvl}", count[p]));
                }
            }
        }
        // children inside their parent and pairwise interior-disjoint: any
        // two cells of which neither contains the other are then disjoint
        for (id, cell) in self.cells.iter().enumerate() {
            let cuts: Vec<Cut> = (0..cell.region.len()).filter_map(|i| cell.region.edge_cut(i)).collect();
            let kids: Vec<&Region> = cell.children.iter().map(|&ch| &self.cells[ch].region).collect();
            if kids.iter().any(|k| !cuts.iter().all(|c| k.within(c))) {
                return Err(format!("a child of cell {id} leaves it"));
            }
            if first_overlap(&kids).is_some() {
                return Err(format!("children of cell {id} overlap"));
            }
        }
        for (lvl, ids) in self.levels.iter().enumerate().skip(1) {
            let from_parents: usize = self.levels[lvl - 1].iter().map(|&c| self.cells[c].children.len()).sum();
            if from_parents != ids.len() {
                return Err(format!("level {lvl} is not the children of level {}", lvl - 1));
            }
        }
        Ok(())
    }

    /// Cells crossed by `l`, per level `0..=k`, found top-down; then the
    /// crossed cells of the extra level if it exists.
    pub fn crossing_cells(&self, l: &Line) -> (Vec<Vec<usize>>, Vec<usize>) {
        let mut per_level = vec![Vec::new(); self.k + 1];
        let mut frontier = vec![self.levels[0][0]];
        for level in per_level.iter_mut() {
            let mut next = Vec::new();
            for &c in &frontier {
                level.push(c);
                for &ch in &self.cells[c].children {
                    if self.cells[ch].region.crossed_by_line(l) {
                        next.push(ch);
                    }
                }
            }
            frontier = next;
        }
        let extra = if self.has_point_level() { frontier } else { Vec::new() };
        (per_level, extra)
    }

    /// Children of crossed cells lying entirely on one side of `l`: above
    /// for `above = true`, else below. Together with the crossed cells of the
    /// extra level they are pairwise interior-disjoint.
    pub fn side_cells(&self, l: &Line, crossed: &[Vec<usize>], above: bool) -> Vec<usize> {
        let cut = if above { l.as_cut() } else { l.as_cut().reversed() };
        let mut out = Vec::new();
        for lvl in crossed {
            for &c in lvl {
                for &ch in &self.cells[c].children {
                    if self.cells[ch].region.within(&cut) {
                        out.push(ch);
                    }
                }
            }
        }
        out
    }

    pub fn above_cells(&self, l: &Line) -> Vec<usize> {
        let (crossed, _) = self.crossing_cells(l);
        self.side_cells(l, &crossed, true)
    }

    pub fn below_cells(&self, l: &Line) -> Vec<usize> {
        let (crossed, _) = self.crossing_cells(l);
        self.side_cells(l, &crossed, false)
    }

    /// Lower (for `side = Lower`) or upper hull of the points of `cell`
    /// strictly above (`above = true`) or below `l`, from the presorted list.
    /// A stored point on `l` is reported as `PointOnLine` with `line` set to
    /// the point's id.
    pub fn partial_hull(&self, cell: usize, l: &Line, above: bool, side: ChainSide) -> Result<ChainHandle> {
        let want = if above { 1 } else { -1 };
        let mut pts = Vec::new();
        for &p in &self.cells[cell].points {
            let v = &self.points[p];
            match l.side_sign(&v.pt) {
                0 => return Err(Error::PointOnLine { point: 0, line: v.id }),
                s if s == want => pts.push(v.clone()),
                _ => {}
            }
        }
        Ok(chain_of_sorted(&pts, side))
    }

    pub fn hull(&self, cell: usize) -> Option<&Hull> {
        self.cells[cell].hull.as_ref()
    }
}

fn within(count: usize, n: usize, rho: usize, level: usize) -> bool {
    let mut scaled = count as u128;
    for _ in 0..level {
        scaled *= rho as u128;
        if scaled > n as u128 {
            return false;
        }
    }
    scaled <= n as u128
}

/// Builds a hierarchical cutting of `lines` with `k` levels, `rho^(k-1) < r
/// <= rho^k`. Every cell of level `i` is crossed by at most `n / rho^i`
/// lines.
pub fn build_hierarchical_cutting(lines: &[Line], r: usize, params: CuttingParams) -> Result<HierarchicalCutting> {
    let n = lines.len();
    if r == 0 || (n > 0 && r > n) || params.rho < 2 {
        return Err(Error::ParamRange(format!("r = {r} must lie in [1, {}]", n.max(1))));
    }
    let rho = params.rho;
    let k = depth_for(r, rho);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let root = Cell {
        region: Region::plane(),
        level: 0,
        parent: None,
        children: Vec::new(),
        conflicts: (0..n).collect(),
        points: Vec::new(),
        hull: None,
    };
    let mut cells = vec![root];
    let mut levels = vec![vec![0usize]];
    let mut meta = CuttingMeta::default();
    for lvl in 0..k {
        let mut next = Vec::new();
        for &c in &levels[lvl] {
            let bound_ok = |count: usize| within(count, n, rho, lvl + 1);
            let region = cells[c].region.clone();
            let conflicts = cells[c].conflicts.clone();
            let ref_ = refine(&region, &conflicts, lines, &bound_ok, params.child_cap, rho, &mut rng);
            if ref_.children.len() > 1 || !bound_ok(conflicts.len()) {
                meta.refined_cells += 1;
            }
            meta.retries += ref_.retries;
            meta.cap_exceeded += usize::from(ref_.cap_exceeded);
            meta.max_children = meta.max_children.max(ref_.children.len());
            for (region, conflicts) in ref_.children {
                let id = cells.len();
                cells.push(Cell {
                    region,
                    level: lvl + 1,
                    parent: Some(c),
                    children: Vec::new(),
                    conflicts,
                    points: Vec::new(),
                    hull: None,
                });
                cells[c].children.push(id);
                next.push(id);
            }
        }
        levels.push(next);
    }
    meta.level_sizes = levels.iter().map(Vec::len).collect();
    for (i, ids) in levels.iter().enumerate() {
        meta.size_constant = meta.size_constant.max(ids.len() as f64 / (rho as f64).powi(2 * i as i32));
        if i >= 1 && n > 0 {
            for &c in ids {
                let ratio = cells[c].conflicts.len() as f64 * (rho as f64).powi(i as i32) / n as f64;
                meta.max_conflict_ratio = meta.max_conflict_ratio.max(ratio);
            }
        }
    }
    Ok(HierarchicalCutting { cells, levels, r, rho, k, meta, lines: lines.to_vec(), points: Vec::new() })
}

/// Stores every point in its cell on every level, computes cell hulls, and
/// builds the extra level: each last-level cell with more than
/// `max(1, |points| / r^2)` points is cut by vertical lines between runs of
/// consecutive points and the slabs are fan-triangulated.
pub fn attach_points(mut c: HierarchicalCutting, points: Vec<Vertex>) -> Result<HierarchicalCutting> {
    for w in points.windows(2) {
        if (&w[0].pt.x, &w[0].pt.y) >= (&w[1].pt.x, &w[1].pt.y) {
            return Err(Error::NotSorted);
        }
    }
    if c.has_point_level() {
        return Err(Error::ParamRange("points already attached".into()));
    }
    c.points = points;
    for cell in &mut c.cells {
        cell.points.clear();
    }
    let root = c.levels[0][0];
    for (pi, v) in c.points.iter().enumerate() {
        let mut cur = root;
        c.cells[cur].points.push(pi);
        while !c.cells[cur].children.is_empty() {
            let mut found = None;
            for &ch in &c.cells[cur].children {
                match c.cells[ch].region.locate(&v.pt) {
                    1 => {
                        found = Some(ch);
                        break;
                    }
                    0 => return Err(Error::PointOnCellEdge(format!("{}", v.pt))),
                    _ => {}
                }
            }
            cur = found.ok_or_else(|| Error::PointOnCellEdge(format!("{} not in any child", v.pt)))?;
            c.cells[cur].points.push(pi);
        }
    }
    let cap = c.point_cap();
    let mut extra = Vec::new();
    let last = c.levels[c.k].clone();
    for &cid in &last {
        let pts = c.cells[cid].points.clone();
        let region = c.cells[cid].region.clone();
        let pieces: Vec<(Region, Vec<usize>)> =
            if pts.len() <= cap { vec![(region, pts)] } else { split_by_runs(&region, &pts, &c.points, cap)? };
        for (reg, ps) in pieces {
            let conflicts = crossing_subset(&reg, &c.lines, &c.cells[cid].conflicts);
            let id = c.cells.len();
            c.cells.push(Cell {
                region: reg,
                level: c.k + 1,
                parent: Some(cid),
                children: Vec::new(),
                conflicts,
                points: ps,
                hull: None,
            });
            c.cells[cid].children.push(id);
            extra.push(id);
        }
    }
    c.levels.push(extra);
    c.meta.level_sizes = c.levels.iter().map(Vec::len).collect();
    for cell in &mut c.cells {
        let vs: Vec<Vertex> = cell.points.iter().map(|&p| c.points[p].clone()).collect();
        cell.hull = Some(hull_of_sorted(&vs)?);
    }
    Ok(c)
}

/// Cuts `region` between consecutive runs of at most `cap` points and
/// triangulates the slabs, distributing the points.
fn split_by_runs(region: &Region, pts: &[usize], all: &[Vertex], cap: usize) -> Result<Vec<(Region, Vec<usize>)>> {
    let mut cuts = Vec::new();
    let mut j = cap;
    while j < pts.len() {
        let (a, b) = (&all[pts[j - 1]].pt, &all[pts[j]].pt);
        if a.x < b.x {
            cuts.push(Cut::vertical(Scalar::mid(&a.x, &b.x)));
        } else {
            // same x: a steep line of negative slope through the midpoint,
            // steep enough to keep every other point of the cell on its side
            let mid = Point::new(a.x.clone(), Scalar::mid(&a.y, &b.y));
            let mut slope = Scalar::one();
            for &q in pts {
                let q = &all[q].pt;
                if q.x != a.x {
                    let s = (&q.y - &mid.y).abs() / (&q.x - &mid.x).abs();
                    if s >= slope {
                        slope = &s + &Scalar::one();
                    }
                }
            }
            // oriented along (1, -slope) so the positive side is to the right
            cuts.push(Cut::new(mid, Vector::new(Scalar::one(), -slope)));
        }
        j += cap;
    }
    let mut out = Vec::new();
    let mut rest = Some(region.clone());
    let mut groups = pts.chunks(cap);
    for cut in &cuts {
        let Some(cur) = rest.take() else { break };
        let (right, left) = cur.split(cut, EdgeTag::Aux);
        let group = groups.next().unwrap();
        if let Some(left) = left {
            out.extend(assign(&left, group, all)?);
        } else if !group.is_empty() {
            return Err(Error::PointOnCellEdge("empty slab with points".into()));
        }
        rest = right;
    }
    if let Some(cur) = rest {
        let group = groups.next().unwrap_or(&[]);
        out.extend(assign(&cur, group, all)?);
    }
    Ok(out)
}

fn assign(piece: &Region, group: &[usize], all: &[Vertex]) -> Result<Vec<(Region, Vec<usize>)>> {
    let pts: Vec<Point> = group.iter().map(|&p| all[p].pt.clone()).collect();
    let tris: Vec<Region> = with_corners(piece.clone(), &pts).iter().flat_map(|p| p.triangulate()).collect();
    let mut out: Vec<(Region, Vec<usize>)> = tris.into_iter().map(|t| (t, Vec::new())).collect();
    for &p in group {
        let q = &all[p].pt;
        let mut placed = false;
        for (t, list) in &mut out {
            match t.locate(q) {
                1 => {
                    list.push(p);
                    placed = true;
                    break;
                }
                0 => return Err(Error::PointOnCellEdge(format!("{q}"))),
                _ => {}
            }
        }
        if !placed {
            return Err(Error::PointOnCellEdge(format!("{q} outside its slab")));
        }
    }
    Ok(out)
}

/// Whether two convex regions have disjoint interiors, by looking for a
/// separating edge line of either one.
pub fn interior_disjoint(a: &Region, b: &Region) -> bool {
    let sep = |x: &Region, y: &Region| (0..x.len()).any(|i| x.edge_cut(i).is_some_and(|cut| y.within(&cut.reversed())));
    sep(a, b) || sep(b, a)
}

/// Axis-parallel box containing `r`, slightly inflated so that rounding of
/// the coordinates never makes it too small.
fn loose_box(r: &Region) -> [f64; 4] {
    let mut b = [f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY];
    let mut finite = false;
    for v in r.vertices() {
        match v {
            GVertex::Finite(p) => {
                let (x, y) = p.to_f64();
                b = [b[0].min(x), b[1].max(x), b[2].min(y), b[3].max(y)];
                finite = true;
            }
            GVertex::Ideal(d) => {
                let (sx, sy) = (d.x.signum(), d.y.signum());
                if sx < 0 {
                    b[0] = f64::NEG_INFINITY;
                }
                if sx > 0 {
                    b[1] = f64::INFINITY;
                }
                if sy < 0 {
                    b[2] = f64::NEG_INFINITY;
                }
                if sy > 0 {
                    b[3] = f64::INFINITY;
                }
            }
        }
    }
    if !finite {
        return [f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY];
    }
    let pad = |v: f64| 1e-9 * (1.0 + v.abs());
    [b[0] - pad(b[0]), b[1] + pad(b[1]), b[2] - pad(b[2]), b[3] + pad(b[3])]
}

/// First pair of regions whose interiors overlap. Pairs with disjoint
/// bounding boxes are skipped; the rest get the exact test.
pub fn first_overlap(regions: &[&Region]) -> Option<(usize, usize)> {
    let boxes: Vec<[f64; 4]> = regions.iter().map(|r| loose_box(r)).collect();
    let mut order: Vec<usize> = (0..regions.len()).collect();
    order.sort_by(|&a, &b| boxes[a][0].total_cmp(&boxes[b][0]));
    let mut active: Vec<usize> = Vec::new();
    for &i in &order {
        active.retain(|&a| boxes[a][1] >= boxes[i][0]);
        for &a in &active {
            let y_meet = boxes[a][2] <= boxes[i][3] && boxes[i][2] <= boxes[a][3];
            if y_meet && !interior_disjoint(regions[a], regions[i]) {
                return Some((a.min(i), a.max(i)));
            }
        }
        active.push(i);
    }
    None
}

/// Finite corner coordinates, for reports.
pub fn region_corners(r: &Region) -> Vec<Option<(f64, f64)>> {
    r.vertices()
        .iter()
        .map(|v| match v {
            GVertex::Finite(p) => Some(p.to_f64()),
            GVertex::Ideal(_) => None,
        })
        .collect()
}
