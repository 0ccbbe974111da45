//! Single-face queries. The dual points of the lines are stored in a
//! partition tree whose nodes keep the hulls of their points; the face of a
//! query point comes from merging the hulls of the nodes on either side of
//! its dual line.
//!
//! The tree splits every node four ways: first by a line halving the points
//! (vertical when possible), then by a ham-sandwich line halving both
//! halves. Any line crosses at most three of the four children. With leaf
//! capacity `r > 1` every leaf also keeps the arrangement of its lines, and
//! a crossed leaf contributes the two boundary chains of its own face of the
//! query point instead of its full hulls.

use serde::Serialize;

use crate::chain_tree::{ChainHandle, ChainSide, Vertex};
use crate::error::{Error, Result};
use crate::geom::{dual_of_line, dual_of_point, slope_sign, Cut, Line, Point, Scalar, Vector};
use crate::hulls::{chain_of_sorted, face_from_hulls, hull_of_sorted, merge_disjoint_hulls, Face, Hull};
use crate::many_faces::check_distinct_lines;
use crate::region::{EdgeTag, Region};

pub struct PartitionNode {
    pub region: Region,
    /// Indices into the sorted point list of the tree.
    pub points: Vec<usize>,
    pub children: Vec<usize>,
    pub hull: Hull,
    /// Leaf arrangement, in tradeoff mode.
    pub arrangement: Option<usize>,
}

pub struct PartitionTree {
    pub nodes: Vec<PartitionNode>,
    /// Points sorted by `(x, y)`.
    pub points: Vec<Vertex>,
    pub leaf_cap: usize,
}

/// Nodes whose points tile the points strictly on one side of a line:
/// `nodes` lie entirely on that side, `partial` are crossed leaves holding
/// points on both sides.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CanonicalAnswer {
    pub nodes: Vec<usize>,
    pub partial: Vec<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Class {
    Positive,
    Negative,
    Crossed,
}

/// Position of a node's points relative to `l`, from the extreme hull
/// vertices in the direction normal to `l`: `O(log n)`. A point on the line
/// makes the node crossed, so it is always reached at a leaf.
fn classify(hull: &Hull, l: &Line) -> Class {
    let k = hull.lower.first_failing_edge(|v, n| slope_sign(&v.pt, &n.pt, &l.a) < 0);
    if l.side_sign(&hull.lower.get(k).expect("nonempty hull").pt) > 0 {
        return Class::Positive;
    }
    let k = hull.upper.first_failing_edge(|v, n| slope_sign(&v.pt, &n.pt, &l.a) > 0);
    if l.side_sign(&hull.upper.get(k).expect("nonempty hull").pt) < 0 {
        return Class::Negative;
    }
    Class::Crossed
}

/// Median split of `pts` (sorted by `(x, y)`): a cut with the first half on
/// its negative side, and a coordinate `x'` that orders the two halves, so
/// that every point of the first half has smaller `x'` than every point of
/// the second. The cut is vertical unless the two middle points share an x;
/// then it is a steep line through their midpoint and `x' = y - slope * x`.
fn median_cut(pts: &[&Point]) -> (Cut, Vec<Scalar>) {
    let h = pts.len() / 2;
    let (pa, pb) = (pts[h - 1], pts[h]);
    if pa.x < pb.x {
        let cut = Cut::vertical(Scalar::mid(&pa.x, &pb.x));
        return (cut, pts.iter().map(|p| p.x.clone()).collect());
    }
    let x0 = &pa.x;
    let my = Scalar::mid(&pa.y, &pb.y);
    let dy = pts.iter().map(|p| (&p.y - &my).abs()).max().unwrap();
    let dx = pts.iter().filter(|p| p.x != *x0).map(|p| (&p.x - x0).abs()).min();
    let slope = -(match dx {
        Some(dx) => &dy / &dx,
        None => Scalar::zero(),
    } + Scalar::one());
    let cut = Cut::new(Point::new(x0.clone(), my), Vector::new(Scalar::one(), slope.clone()));
    (cut, pts.iter().map(|p| &p.y - &(&slope * &p.x)).collect())
}

/// Whether the line through two points leaves at most half of each set on
/// either open side.
fn halves_both(cut: &Cut, a: &[&Point], b: &[&Point]) -> bool {
    [a, b].iter().all(|set| {
        let (mut pos, mut neg) = (0, 0);
        for p in set.iter() {
            match cut.side(p) {
                1 => pos += 1,
                -1 => neg += 1,
                _ => {}
            }
        }
        pos <= set.len() / 2 && neg <= set.len() / 2
    })
}

/// Index of the lower median of `vals`.
fn median_of<T: PartialOrd + Clone>(vals: &[T]) -> usize {
    let mut idx: Vec<usize> = (0..vals.len()).collect();
    let k = (vals.len() - 1) / 2;
    idx.select_nth_unstable_by(k, |&i, &j| vals[i].partial_cmp(&vals[j]).unwrap_or(std::cmp::Ordering::Equal));
    idx[k]
}

/// A line through one point of `a` and one of `b` leaving at most half of
/// each set on either open side. `xa`, `xb` are the coordinates from
/// [`median_cut`]; every `xa` is below every `xb`.
///
/// The line of slope `t` (in the sheared coordinates) through the median of
/// `a` is above the one through the median of `b` for large `t` and below
/// for small `t`; bisecting on `t` finds where they meet. The search runs in
/// floating point first, in exact arithmetic if that stalls, and every
/// candidate is checked exactly.
fn ham_sandwich(a: &[&Point], xa: &[Scalar], b: &[&Point], xb: &[Scalar]) -> Cut {
    let check = |i: usize, j: usize| {
        let cut = Cut::through(a[i], b[j]);
        halves_both(&cut, a, b).then_some(cut)
    };

    let fa: Vec<(f64, f64)> = a.iter().zip(xa).map(|(p, x)| (p.y.approx(), x.approx())).collect();
    let fb: Vec<(f64, f64)> = b.iter().zip(xb).map(|(p, x)| (p.y.approx(), x.approx())).collect();
    if fa.iter().chain(&fb).all(|(y, x)| y.is_finite() && x.is_finite()) {
        let med = |t: f64| {
            let va: Vec<f64> = fa.iter().map(|(y, x)| y - t * x).collect();
            let vb: Vec<f64> = fb.iter().map(|(y, x)| y - t * x).collect();
            let (i, j) = (median_of(&va), median_of(&vb));
            (i, j, va[i] - vb[j])
        };
        let mut hi = 1.0f64;
        while med(hi).2 <= 0.0 && hi < 1e300 {
            hi *= 2.0;
        }
        let mut lo = -1.0f64;
        while med(lo).2 >= 0.0 && lo > -1e300 {
            lo *= 2.0;
        }
        let mut last = None;
        for _ in 0..200 {
            let t = 0.5 * (lo + hi);
            if t == lo || t == hi {
                break;
            }
            let (i, j, g) = med(t);
            if last != Some((i, j)) {
                if let Some(cut) = check(i, j) {
                    return cut;
                }
                last = Some((i, j));
            }
            if g > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
        }
    }

    let med = |t: &Scalar| {
        let va: Vec<Scalar> = a.iter().zip(xa).map(|(p, x)| &p.y - &(t * x)).collect();
        let vb: Vec<Scalar> = b.iter().zip(xb).map(|(p, x)| &p.y - &(t * x)).collect();
        let (i, j) = (median_of(&va), median_of(&vb));
        let g = (&va[i] - &vb[j]).signum();
        (i, j, g)
    };
    let two = Scalar::from_int(2);
    let mut hi = Scalar::one();
    while med(&hi).2 <= 0 {
        hi = &hi * &two;
    }
    let mut lo = -Scalar::one();
    while med(&lo).2 >= 0 {
        lo = &lo * &two;
    }
    for _ in 0..400 {
        let t = Scalar::mid(&lo, &hi);
        let (i, j, g) = med(&t);
        if let Some(cut) = check(i, j) {
            return cut;
        }
        if g > 0 {
            hi = t;
        } else {
            lo = t;
        }
    }
    (0..a.len())
        .flat_map(|i| (0..b.len()).map(move |j| (i, j)))
        .find_map(|(i, j)| check(i, j))
        .expect("a ham-sandwich line through two of the points exists")
}

/// Splits `idx` by the side of `cut`. Points on the line go to whichever
/// side is smaller at the time.
fn split_points(idx: &[usize], pts: &[Vertex], cut: &Cut) -> (Vec<usize>, Vec<usize>) {
    let (mut pos, mut neg, mut on) = (Vec::new(), Vec::new(), Vec::new());
    for &i in idx {
        match cut.side(&pts[i].pt) {
            1 => pos.push(i),
            -1 => neg.push(i),
            _ => on.push(i),
        }
    }
    for i in on {
        if pos.len() <= neg.len() {
            pos.push(i);
        } else {
            neg.push(i);
        }
    }
    pos.sort_unstable();
    neg.sort_unstable();
    (pos, neg)
}

fn node_hull(idx: &[usize], pts: &[Vertex]) -> Hull {
    let sub: Vec<Vertex> = idx.iter().map(|&i| pts[i].clone()).collect();
    hull_of_sorted(&sub).expect("node points are sorted and distinct")
}

/// Builds the partition tree of `points` with leaves of at most `leaf_cap`
/// points. Points must be distinct.
pub fn build_partition_tree(points: Vec<Vertex>, leaf_cap: usize) -> Result<PartitionTree> {
    if leaf_cap == 0 || leaf_cap > points.len().max(1) {
        return Err(Error::ParamRange(format!("leaf capacity {leaf_cap} must lie in [1, {}]", points.len().max(1))));
    }
    let mut pts = points;
    pts.sort_by(|u, v| (&u.pt.x, &u.pt.y).cmp(&(&v.pt.x, &v.pt.y)));
    if let Some(w) = pts.windows(2).find(|w| w[0].pt == w[1].pt) {
        return Err(Error::GeneralPosition(format!("objects {} and {} have the same dual point", w[0].id, w[1].id)));
    }
    let all: Vec<usize> = (0..pts.len()).collect();
    let root = PartitionNode {
        region: Region::plane(),
        hull: node_hull(&all, &pts),
        points: all,
        children: Vec::new(),
        arrangement: None,
    };
    let mut nodes = vec![root];
    let mut stack = vec![0];
    while let Some(v) = stack.pop() {
        if nodes[v].points.len() <= leaf_cap {
            continue;
        }
        let idx = nodes[v].points.clone();
        let h = idx.len() / 2;
        let refs: Vec<&Point> = idx.iter().map(|&i| &pts[i].pt).collect();
        let (cut1, xs) = median_cut(&refs);
        let cut2 = ham_sandwich(&refs[..h], &xs[..h], &refs[h..], &xs[h..]);
        let (right, left) = nodes[v].region.split(&cut1, EdgeTag::Aux);
        let mut kids = Vec::new();
        for (half, half_idx) in [(left, &idx[..h]), (right, &idx[h..])] {
            let (pos, neg) = split_points(half_idx, &pts, &cut2);
            let half = half.expect("the halving cut passes between points");
            let (rp, rn) = half.split(&cut2, EdgeTag::Aux);
            for (r, sub) in [(rp, pos), (rn, neg)] {
                match r {
                    Some(region) => {
                        kids.push(nodes.len());
                        stack.push(nodes.len());
                        nodes.push(PartitionNode {
                            region,
                            hull: node_hull(&sub, &pts),
                            points: sub,
                            children: Vec::new(),
                            arrangement: None,
                        });
                    }
                    None => assert!(sub.is_empty(), "points outside a cut-off piece"),
                }
            }
        }
        nodes[v].children = kids;
    }
    Ok(PartitionTree { nodes, points: pts, leaf_cap })
}

impl PartitionTree {
    pub fn is_leaf(&self, v: usize) -> bool {
        self.nodes[v].children.is_empty()
    }

    pub fn height(&self) -> usize {
        let mut depth = vec![0usize; self.nodes.len()];
        let mut best = 0;
        for v in 0..self.nodes.len() {
            for &c in &self.nodes[v].children {
                depth[c] = depth[v] + 1;
                best = best.max(depth[c]);
            }
        }
        best
    }

    /// Canonical decomposition of the points strictly above `l` (for
    /// `above = true`) or strictly below it. A point on `l` is reported as
    /// `PointOnLine` with `line` set to its id.
    pub fn canonical(&self, l: &Line, above: bool) -> Result<CanonicalAnswer> {
        let want = if above { 1 } else { -1 };
        let mut out = CanonicalAnswer::default();
        let mut stack = vec![0];
        while let Some(v) = stack.pop() {
            let node = &self.nodes[v];
            if node.points.is_empty() {
                continue;
            }
            match classify(&node.hull, l) {
                Class::Positive if above => out.nodes.push(v),
                Class::Negative if !above => out.nodes.push(v),
                Class::Positive | Class::Negative => {}
                Class::Crossed if !self.is_leaf(v) => stack.extend(&node.children),
                Class::Crossed if node.points.len() == 1 => {
                    let p = &self.points[node.points[0]];
                    match l.side_sign(&p.pt) {
                        0 => return Err(Error::PointOnLine { point: 0, line: p.id }),
                        s if s == want => out.nodes.push(v),
                        _ => {}
                    }
                }
                Class::Crossed => out.partial.push(v),
            }
        }
        Ok(out)
    }
}

/// Arrangement of the lines of one leaf with slab point location. Slab `s`
/// lies between the `s`-th and `(s+1)`-th distinct vertex x; for each slab
/// the lines are listed bottom to top, with the face of every gap.
pub struct LeafArrangement {
    /// Global line ids.
    pub lines: Vec<usize>,
    xs: Vec<Scalar>,
    orders: Vec<Vec<u16>>,
    gap_faces: Vec<Vec<u32>>,
    /// Per face: the lower boundary as a lower chain of dual points and the
    /// upper boundary as an upper chain.
    pub chains: Vec<(ChainHandle, ChainHandle)>,
}

impl LeafArrangement {
    fn build(ids: Vec<usize>, all: &[Line]) -> LeafArrangement {
        let k = ids.len();
        let lines: Vec<&Line> = ids.iter().map(|&i| &all[i]).collect();
        let mut events: Vec<(Point, usize, usize)> = Vec::new();
        for i in 0..k {
            for j in i + 1..k {
                if let Some(p) = lines[i].intersection(lines[j]) {
                    events.push((p, i, j));
                }
            }
        }
        events.sort_by(|u, v| (&u.0.x, &u.0.y).cmp(&(&v.0.x, &v.0.y)));

        // bottom to top far to the left: larger slope is lower
        let mut order: Vec<u16> = (0..k as u16).collect();
        order.sort_by(|&i, &j| {
            lines[j as usize].a.cmp(&lines[i as usize].a).then(lines[i as usize].b.cmp(&lines[j as usize].b))
        });
        let mut pos = vec![0usize; k];
        for (p, &l) in order.iter().enumerate() {
            pos[l as usize] = p;
        }
        let mut lower: Vec<Vec<usize>> = Vec::new();
        let mut upper: Vec<Vec<usize>> = Vec::new();
        let mut gap: Vec<u32> = (0..=k as u32).collect();
        for g in 0..=k {
            lower.push(if g > 0 { vec![order[g - 1] as usize] } else { Vec::new() });
            upper.push(if g < k { vec![order[g] as usize] } else { Vec::new() });
        }
        let mut xs = Vec::new();
        let mut orders = vec![order.clone()];
        let mut gap_faces = vec![gap.clone()];
        let mut e = 0;
        while e < events.len() {
            let x = events[e].0.x.clone();
            while e < events.len() && events[e].0.x == x {
                let (_, i, j) = events[e];
                let q = pos[i].min(pos[j]);
                debug_assert_eq!(pos[i].max(pos[j]), q + 1, "crossing lines are adjacent");
                order.swap(q, q + 1);
                pos[order[q] as usize] = q;
                pos[order[q + 1] as usize] = q + 1;
                gap[q + 1] = lower.len() as u32;
                lower.push(vec![order[q] as usize]);
                upper.push(vec![order[q + 1] as usize]);
                upper[gap[q] as usize].push(order[q] as usize);
                if q + 2 <= k {
                    lower[gap[q + 2] as usize].push(order[q + 1] as usize);
                }
                e += 1;
            }
            xs.push(x);
            orders.push(order.clone());
            gap_faces.push(gap.clone());
        }

        let vertex = |l: usize| Vertex::new(dual_of_line(lines[l]), ids[l]);
        let chains = lower
            .iter()
            .zip(&upper)
            .map(|(lo, up)| {
                let lo: Vec<Vertex> = lo.iter().map(|&l| vertex(l)).collect();
                let up: Vec<Vertex> = up.iter().rev().map(|&l| vertex(l)).collect();
                (chain_of_sorted(&lo, ChainSide::Lower), chain_of_sorted(&up, ChainSide::Upper))
            })
            .collect();
        LeafArrangement { lines: ids, xs, orders, gap_faces, chains }
    }

    pub fn face_count(&self) -> usize {
        self.chains.len()
    }

    /// Stored slab entries, the dominant part of the size.
    pub fn slab_entries(&self) -> usize {
        self.orders.iter().map(|o| o.len()).sum()
    }

    /// Face containing `p`, by binary search over slabs and then over the
    /// lines of the slab.
    pub fn locate(&self, p: &Point, all: &[Line]) -> Result<usize> {
        let s = self.xs.partition_point(|x| *x < p.x);
        let order = &self.orders[s];
        let line = |q: usize| &all[self.lines[order[q] as usize]];
        let below = order.partition_point(|&l| all[self.lines[l as usize]].side_sign(p) > 0);
        if below < order.len() && line(below).side_sign(p) == 0 {
            return Err(Error::PointOnLine { point: 0, line: self.lines[order[below] as usize] });
        }
        Ok(self.gap_faces[s][below] as usize)
    }
}

/// Build measurements of a [`FaceQueryStructure`].
#[derive(Clone, Debug, Default, Serialize)]
pub struct BuildStats {
    pub n: usize,
    pub leaf_cap: usize,
    pub nodes: usize,
    pub leaves: usize,
    pub height: usize,
    /// Sum of `|P_v|` over all nodes.
    pub stored_points: usize,
    pub leaf_faces: usize,
    pub slab_entries: usize,
    /// Stored items over `n log2 n + n r`.
    pub space_constant: f64,
}

/// Sizes of the canonical sets used by one query.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct QueryStats {
    pub v_plus: usize,
    pub v_minus: usize,
    /// Crossed leaves answered by their arrangements.
    pub partial: usize,
}

pub struct FaceQueryStructure {
    lines: Vec<Line>,
    tree: PartitionTree,
    leaves: Vec<LeafArrangement>,
    pub stats: BuildStats,
}

/// Structure with single-point leaves.
pub fn fq_build(lines: &[Line]) -> Result<FaceQueryStructure> {
    fq_build_tradeoff(lines, 1)
}

/// Structure whose leaves hold up to `r` lines together with their
/// arrangement.
pub fn fq_build_tradeoff(lines: &[Line], r: usize) -> Result<FaceQueryStructure> {
    let n = lines.len();
    if r == 0 || r > n.max(1) {
        return Err(Error::ParamRange(format!("r = {r} must lie in [1, {}]", n.max(1))));
    }
    check_distinct_lines(lines)?;
    let duals: Vec<Vertex> = lines.iter().enumerate().map(|(i, l)| Vertex::new(dual_of_line(l), i)).collect();
    let mut tree = build_partition_tree(duals, r)?;
    let mut leaves = Vec::new();
    if r > 1 {
        for v in 0..tree.nodes.len() {
            if tree.is_leaf(v) && tree.nodes[v].points.len() > 1 {
                let ids = tree.nodes[v].points.iter().map(|&i| tree.points[i].id).collect();
                tree.nodes[v].arrangement = Some(leaves.len());
                leaves.push(LeafArrangement::build(ids, lines));
            }
        }
    }
    let stored_points: usize = tree.nodes.iter().map(|v| v.points.len()).sum();
    let leaf_faces: usize = leaves.iter().map(|a| a.face_count()).sum();
    let slab_entries: usize = leaves.iter().map(|a| a.slab_entries()).sum();
    let scale = n as f64 * (n.max(2) as f64).log2() + (n * r) as f64;
    let stats = BuildStats {
        n,
        leaf_cap: r,
        nodes: tree.nodes.len(),
        leaves: (0..tree.nodes.len()).filter(|&v| tree.is_leaf(v)).count(),
        height: tree.height(),
        stored_points,
        leaf_faces,
        slab_entries,
        space_constant: if n == 0 { 0.0 } else { (stored_points + leaf_faces + slab_entries) as f64 / scale },
    };
    Ok(FaceQueryStructure { lines: lines.to_vec(), tree, leaves, stats })
}

impl FaceQueryStructure {
    pub fn lines(&self) -> &[Line] {
        &self.lines
    }

    pub fn tree(&self) -> &PartitionTree {
        &self.tree
    }

    pub fn leaves(&self) -> &[LeafArrangement] {
        &self.leaves
    }

    /// Face of the arrangement containing `p`.
    pub fn query(&self, p: &Point) -> Result<Face> {
        Ok(self.query_with_stats(p)?.0)
    }

    pub fn query_with_stats(&self, p: &Point) -> Result<(Face, QueryStats)> {
        let p_star = dual_of_point(p);
        let up = self.tree.canonical(&p_star, true)?;
        let down = self.tree.canonical(&p_star, false)?;
        let mut plus: Vec<ChainHandle> = up.nodes.iter().map(|&v| self.tree.nodes[v].hull.lower.clone()).collect();
        let mut minus: Vec<ChainHandle> = down.nodes.iter().map(|&v| self.tree.nodes[v].hull.upper.clone()).collect();
        for &v in &up.partial {
            let leaf = &self.leaves[self.tree.nodes[v].arrangement.expect("crossed leaves keep arrangements")];
            let (lo, hi) = &leaf.chains[leaf.locate(p, &self.lines)?];
            plus.push(lo.clone());
            minus.push(hi.clone());
        }
        let hp = merge_disjoint_hulls(&plus, ChainSide::Lower)?;
        let hm = merge_disjoint_hulls(&minus, ChainSide::Upper)?;
        let stats = QueryStats { v_plus: up.nodes.len(), v_minus: down.nodes.len(), partial: up.partial.len() };
        Ok((face_from_hulls(&hp, &hm, &p_star)?, stats))
    }

    /// Fingerprints of every stored chain, for persistence audits.
    pub fn fingerprints(&self) -> Vec<u64> {
        let nodes = self.tree.nodes.iter().flat_map(|v| [v.hull.lower.fingerprint(), v.hull.upper.fingerprint()]);
        let leaves =
            self.leaves.iter().flat_map(|a| a.chains.iter().flat_map(|(l, u)| [l.fingerprint(), u.fingerprint()]));
        nodes.chain(leaves).collect()
    }
}

/// Face of `p` in the arrangement stored in `s`.
pub fn fq_query(s: &FaceQueryStructure, p: &Point) -> Result<Face> {
    s.query(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::orient_sign;
    use crate::oracle::Arrangement;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rnd(rng: &mut ChaCha8Rng, span: i64) -> Scalar {
        Scalar::ratio(rng.gen_range(-span * 1000..span * 1000), rng.gen_range(1..1000))
    }

    fn random_lines(rng: &mut ChaCha8Rng, n: usize) -> Vec<Line> {
        (0..n).map(|_| Line::new(rnd(rng, 5), rnd(rng, 50))).collect()
    }

    fn random_points(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vertex> {
        (0..n).map(|i| Vertex::new(Point::new(rnd(rng, 20), rnd(rng, 100)), i)).collect()
    }

    /// Every point of the node is in its region, and the children's points
    /// partition the parent's.
    fn check_tree(t: &PartitionTree) {
        for v in &t.nodes {
            for &i in &v.points {
                assert!(v.region.locate(&t.points[i].pt) >= 0);
            }
            if v.children.is_empty() {
                assert!(v.points.len() <= t.leaf_cap);
            } else {
                let mut got: Vec<usize> = v.children.iter().flat_map(|&c| t.nodes[c].points.clone()).collect();
                got.sort_unstable();
                assert_eq!(got, v.points);
                for &c in &v.children {
                    assert!(t.nodes[c].points.len() <= v.points.len().div_ceil(4));
                }
            }
        }
    }

    #[test]
    fn four_points_give_single_point_leaves() {
        let pts: Vec<Vertex> = [(0, 0), (1, 3), (2, -1), (3, 2)]
            .iter()
            .enumerate()
            .map(|(i, &(x, y))| Vertex::new(Point::int(x, y), i))
            .collect();
        let t = build_partition_tree(pts, 1).unwrap();
        check_tree(&t);
        let leaves: Vec<&PartitionNode> = t.nodes.iter().filter(|v| v.children.is_empty()).collect();
        assert!(leaves.iter().filter(|v| v.points.len() == 1).count() == 4);
        let single = build_partition_tree(vec![Vertex::new(Point::int(1, 1), 0)], 1).unwrap();
        assert_eq!(single.nodes.len(), 1);
    }

    #[test]
    fn equal_x_points_are_split() {
        let pts: Vec<Vertex> = (0..9).map(|i| Vertex::new(Point::int(i % 2, i * i - 3), i as usize)).collect();
        let t = build_partition_tree(pts, 1).unwrap();
        check_tree(&t);
    }

    #[test]
    fn node_hulls_match_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let t = build_partition_tree(random_points(&mut rng, 256), 1).unwrap();
        check_tree(&t);
        for v in &t.nodes {
            let pts: Vec<&Point> = v.points.iter().map(|&i| &t.points[i].pt).collect();
            for (chain, sign) in [(v.hull.lower.points(), 1), (v.hull.upper.points(), -1)] {
                if pts.is_empty() {
                    assert!(chain.is_empty());
                    continue;
                }
                // all points on the inner side of every edge, endpoints extreme in x
                for w in chain.windows(2) {
                    assert!(pts.iter().all(|p| orient_sign(&w[0], &w[1], p) * sign >= 0));
                }
                let minx = pts.iter().map(|p| &p.x).min().unwrap();
                let maxx = pts.iter().map(|p| &p.x).max().unwrap();
                assert_eq!(&chain[0].x, minx);
                assert_eq!(&chain[chain.len() - 1].x, maxx);
                // no chain vertex lies on the inner side of a chord of two others
                for w in chain.windows(3) {
                    assert!(orient_sign(&w[0], &w[1], &w[2]) * sign > 0);
                }
            }
        }
    }

    #[test]
    fn canonical_sets_tile_half_planes() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for cap in [1, 5] {
            let t = build_partition_tree(random_points(&mut rng, 256), cap).unwrap();
            for _ in 0..100 {
                let l = Line::new(rnd(&mut rng, 10), rnd(&mut rng, 100));
                for above in [true, false] {
                    let want_sign = if above { 1 } else { -1 };
                    let ans = t.canonical(&l, above).unwrap();
                    let mut got: Vec<usize> = ans.nodes.iter().flat_map(|&v| t.nodes[v].points.clone()).collect();
                    for &v in &ans.partial {
                        got.extend(
                            t.nodes[v].points.iter().copied().filter(|&i| l.side_sign(&t.points[i].pt) == want_sign),
                        );
                    }
                    got.sort_unstable();
                    let want: Vec<usize> =
                        (0..t.points.len()).filter(|&i| l.side_sign(&t.points[i].pt) == want_sign).collect();
                    assert_eq!(got, want);
                    let all: Vec<usize> = ans.nodes.iter().chain(&ans.partial).copied().collect();
                    for (k, &a) in all.iter().enumerate() {
                        for &b in &all[k + 1..] {
                            assert!(crate::cuttings::interior_disjoint(&t.nodes[a].region, &t.nodes[b].region));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn extreme_half_planes() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let t = build_partition_tree(random_points(&mut rng, 50), 1).unwrap();
        let high = Line::int(0, 10_000);
        assert_eq!(t.canonical(&high, false).unwrap().nodes, vec![0]);
        assert!(t.canonical(&high, true).unwrap().nodes.is_empty());
    }

    fn check_against_oracle(lines: &[Line], r: usize, queries: usize, rng: &mut ChaCha8Rng) {
        let s = fq_build_tradeoff(lines, r).unwrap();
        let arr = Arrangement::build(lines).unwrap();
        let before = s.fingerprints();
        for _ in 0..queries {
            let p = Point::new(rnd(rng, 20), rnd(rng, 100));
            let want = arr.face_of(&p).unwrap();
            assert_eq!(&fq_query(&s, &p).unwrap().boundary(), want, "r={r} p={p}");
        }
        assert_eq!(before, s.fingerprints());
    }

    #[test]
    fn small_instances() {
        let s = fq_build(&[Line::int(0, 0)]).unwrap();
        let f = s.query(&Point::int(0, 1)).unwrap().boundary();
        assert_eq!((f.lower, f.upper), (vec![0], vec![]));
        let lines = vec![Line::int(0, 0), Line::int(1, 0), Line::int(-1, 2)];
        let s = fq_build(&lines).unwrap();
        let p = Point::new(Scalar::one(), Scalar::ratio(1, 2));
        let want = Arrangement::build(&lines).unwrap().face_of(&p).unwrap().clone();
        assert_eq!(s.query(&p).unwrap().boundary(), want);
        assert!(want.is_bounded());
        assert!(matches!(s.query(&Point::int(5, 0)), Err(Error::PointOnLine { line: 0, .. })));
    }

    #[test]
    fn queries_match_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let lines = random_lines(&mut rng, 120);
        for r in [1, 8, 32] {
            check_against_oracle(&lines, r, 500, &mut rng);
        }
        for n in [2, 3, 7, 20] {
            let lines = random_lines(&mut rng, n);
            for r in [1, n] {
                check_against_oracle(&lines, r, 50, &mut rng);
            }
        }
    }

    #[test]
    fn leaf_arrangements_are_complete() {
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        let lines = random_lines(&mut rng, 100);
        let s = fq_build_tradeoff(&lines, 10).unwrap();
        for leaf in s.leaves() {
            let k = leaf.lines.len();
            assert!(k <= 10);
            let sub: Vec<Line> = leaf.lines.iter().map(|&i| lines[i].clone()).collect();
            assert_eq!(leaf.face_count(), Arrangement::build(&sub).unwrap().face_count());
            assert!(leaf.face_count() <= 1 + k + k * (k - 1) / 2);
        }
        assert!(s.stats.space_constant > 0.0);
    }

    #[test]
    fn point_on_line_in_a_leaf() {
        let mut rng = ChaCha8Rng::seed_from_u64(26);
        let lines = random_lines(&mut rng, 40);
        let s = fq_build_tradeoff(&lines, 8).unwrap();
        let x = Scalar::ratio(7, 3);
        let p = Point::new(x.clone(), lines[17].eval(&x));
        assert!(matches!(s.query(&p), Err(Error::PointOnLine { line: 17, .. })));
    }
}
