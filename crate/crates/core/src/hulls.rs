//! Convex hulls over persistent chains: construction, common tangents, the
//! merge of pairwise disjoint hulls through the envelope of representative
//! segments, and extraction of a face from the hulls of the dual points above
//! and below a query point.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::ops::Bound;

use crate::chain_tree::{ChainHandle, ChainSide, Probe, Vertex};
use crate::error::{Error, Result};
use crate::face::FaceBoundary;
use crate::geom::{dual_of_line, orient_sign, slope_sign, Line, Point, Scalar};

/// Lower and upper hull chains of a point set.
#[derive(Clone, Debug)]
pub struct Hull {
    pub lower: ChainHandle,
    pub upper: ChainHandle,
}

/// Hull of points sorted by `(x, y)`. Points sharing an x are allowed (they
/// come from parallel lines); each chain keeps only the extreme one.
pub fn hull_of_sorted(points: &[Vertex]) -> Result<Hull> {
    for w in points.windows(2) {
        if (&w[0].pt.x, &w[0].pt.y) >= (&w[1].pt.x, &w[1].pt.y) {
            return Err(Error::NotSorted);
        }
    }
    let lower = monotone_chain(points, ChainSide::Lower);
    let upper = monotone_chain(points, ChainSide::Upper);
    Ok(Hull {
        lower: ChainHandle::build_unchecked(lower, ChainSide::Lower),
        upper: ChainHandle::build_unchecked(upper, ChainSide::Upper),
    })
}

/// One hull chain of points sorted by `(x, y)`; the caller guarantees the
/// order.
pub fn chain_of_sorted(points: &[Vertex], side: ChainSide) -> ChainHandle {
    ChainHandle::build_unchecked(monotone_chain(points, side), side)
}

fn monotone_chain(points: &[Vertex], side: ChainSide) -> Vec<Vertex> {
    let s = side.sign();
    let mut out: Vec<Vertex> = Vec::with_capacity(points.len());
    for p in points {
        while out.len() >= 2 && orient_sign(&out[out.len() - 2].pt, &out[out.len() - 1].pt, &p.pt) * s <= 0 {
            out.pop();
        }
        out.push(p.clone());
    }
    // Equal-x pairs can only survive at the ends. The lower chain keeps the
    // lower point, which comes first in (x, y) order; the upper chain the
    // higher one.
    if out.len() >= 2 {
        match side {
            ChainSide::Lower => {
                if out[out.len() - 1].pt.x == out[out.len() - 2].pt.x {
                    out.pop();
                }
            }
            ChainSide::Upper => {
                if out[0].pt.x == out[1].pt.x {
                    out.remove(0);
                }
            }
        }
    }
    out
}

/// Hull of an unsorted point set.
pub fn hull_of_points(mut points: Vec<Vertex>) -> Result<Hull> {
    points.sort_by(|a, b| (&a.pt.x, &a.pt.y).cmp(&(&b.pt.x, &b.pt.y)));
    points.dedup_by(|a, b| a.pt == b.pt);
    hull_of_sorted(&points)
}

/// Vertex of `chain` where the supporting line from the external point `q`
/// (strictly left or right of the chain) touches it.
fn tangent_from(q: &Point, chain: &ChainHandle) -> Result<(usize, Vertex)> {
    let s = chain.side().sign();
    let q_left = chain.first().is_none_or(|f| q.x < f.pt.x);
    // For q on the left the chain must stay on the left of q->v (above for
    // lower chains); for q on the right, on the right of q->v.
    let want = if q_left { s } else { -s };
    chain.search(|prev, cur, next| {
        if next.is_some_and(|n| orient_sign(q, &cur.pt, &n.pt) * want < 0) {
            Probe::Right
        } else if prev.is_some_and(|p| orient_sign(q, &cur.pt, &p.pt) * want < 0) {
            Probe::Left
        } else {
            Probe::Found
        }
    })
}

/// Common tangent of two chains of the same side with `a` strictly left of
/// `b`: indices `(i, j)` such that the line through `a[i]` and `b[j]` keeps
/// both chains on the chain side (above for lower chains). Nested binary
/// search, `O(log |a| log |b|)`.
pub fn common_tangent(a: &ChainHandle, b: &ChainHandle) -> Result<(usize, usize)> {
    let (Some(al), Some(bf)) = (a.last(), b.first()) else {
        return Err(Error::EmptyChain);
    };
    if al.pt.x >= bf.pt.x {
        return Err(Error::XOverlap);
    }
    let s = a.side().sign();
    let mut inner_err = None;
    let (i, u) = a.search(|prev, cur, next| {
        let w = match tangent_from(&cur.pt, b) {
            Ok((_, w)) => w,
            Err(e) => {
                inner_err = Some(e);
                return Probe::Found;
            }
        };
        if next.is_some_and(|n| orient_sign(&cur.pt, &w.pt, &n.pt) * s < 0) {
            Probe::Right
        } else if prev.is_some_and(|p| orient_sign(&cur.pt, &w.pt, &p.pt) * s < 0) {
            Probe::Left
        } else {
            Probe::Found
        }
    })?;
    if let Some(e) = inner_err {
        return Err(e);
    }
    let (j, _) = tangent_from(&u.pt, b)?;
    Ok((i, j))
}

/// Chain of the hull of two x-separated chains of the same side.
pub fn bridge(a: &ChainHandle, b: &ChainHandle) -> Result<ChainHandle> {
    if a.is_empty() {
        return Ok(b.clone());
    }
    if b.is_empty() {
        return Ok(a.clone());
    }
    let (i, j) = common_tangent(a, b)?;
    let left = a.split_at_index(i + 1).0;
    let right = b.split_at_index(j).1;
    ChainHandle::join(&left, &right)
}

/// A maximal x-interval on which one segment attains the envelope.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnvelopePiece {
    pub lo: Scalar,
    pub hi: Scalar,
    pub owner: usize,
}

#[derive(Clone, Debug)]
struct SweepSeg {
    idx: usize,
    a: Point,
    b: Point,
    sign: i32,
}

impl SweepSeg {
    fn vertical(&self) -> bool {
        self.a.x == self.b.x
    }

    /// Sign of `y(p.x) - p.y` for a point `p` in the x-range of a
    /// non-vertical segment.
    fn over(&self, p: &Point) -> i32 {
        -orient_sign(&self.a, &self.b, p)
    }
}

/// Vertical order of two segments sharing an x-range: sign of `y_s - y_o`
/// at the left end of the shared range, ties broken at the right end.
fn vertical_order(s: &SweepSeg, o: &SweepSeg) -> i32 {
    match (s.vertical(), o.vertical()) {
        (true, true) => {
            return match s.a.y.cmp(&o.a.y).then_with(|| s.b.y.cmp(&o.b.y)) {
                Ordering::Less => -1,
                Ordering::Equal => 0,
                Ordering::Greater => 1,
            }
        }
        (true, false) => return -vertical_order(o, s),
        _ => {}
    }
    if o.a.x >= s.a.x {
        let d = s.over(&o.a);
        if d != 0 {
            return d;
        }
        if o.b.x <= s.b.x {
            s.over(&o.b)
        } else {
            -o.over(&s.b)
        }
    } else {
        let d = -o.over(&s.a);
        if d != 0 {
            return d;
        }
        if s.b.x <= o.b.x {
            -o.over(&s.b)
        } else {
            s.over(&o.b)
        }
    }
}

impl PartialEq for SweepSeg {
    fn eq(&self, o: &Self) -> bool {
        self.idx == o.idx
    }
}

impl Eq for SweepSeg {}

impl PartialOrd for SweepSeg {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for SweepSeg {
    // Only ever called on segments that are simultaneously active, which
    // share an x-range; disjoint segments keep one vertical order on it.
    fn cmp(&self, o: &Self) -> Ordering {
        if self.idx == o.idx {
            return Ordering::Equal;
        }
        (vertical_order(self, o) * self.sign).cmp(&0).then(self.idx.cmp(&o.idx))
    }
}

fn on_segment(p: &Point, a: &Point, b: &Point) -> bool {
    std::cmp::min(&a.x, &b.x) <= &p.x
        && &p.x <= std::cmp::max(&a.x, &b.x)
        && std::cmp::min(&a.y, &b.y) <= &p.y
        && &p.y <= std::cmp::max(&a.y, &b.y)
}

/// Whether two closed segments share a point.
pub fn segments_intersect(p1: &Point, p2: &Point, q1: &Point, q2: &Point) -> bool {
    let d1 = orient_sign(q1, q2, p1);
    let d2 = orient_sign(q1, q2, p2);
    let d3 = orient_sign(p1, p2, q1);
    let d4 = orient_sign(p1, p2, q2);
    if d1 * d2 < 0 && d3 * d4 < 0 {
        return true;
    }
    (d1 == 0 && on_segment(p1, q1, q2))
        || (d2 == 0 && on_segment(p2, q1, q2))
        || (d3 == 0 && on_segment(q1, p1, p2))
        || (d4 == 0 && on_segment(q2, p1, p2))
}

/// Lower (or, for `ChainSide::Upper`, upper) envelope of pairwise disjoint
/// segments by a plane sweep. Consecutive pieces share endpoints; a piece
/// with `lo == hi` is a single x where a segment touches the envelope.
/// Intersections are detected by neighbor checks during the sweep.
pub fn envelope_of_segments(segs: &[(Point, Point)], side: ChainSide) -> Result<Vec<EnvelopePiece>> {
    let items: Vec<SweepSeg> = segs
        .iter()
        .enumerate()
        .map(|(idx, (p, q))| {
            let (a, b) = if (&p.x, &p.y) <= (&q.x, &q.y) { (p.clone(), q.clone()) } else { (q.clone(), p.clone()) };
            SweepSeg { idx, a, b, sign: side.sign() }
        })
        .collect();
    let mut xs: Vec<&Scalar> = items.iter().flat_map(|s| [&s.a.x, &s.b.x]).collect();
    xs.sort();
    xs.dedup();
    let mut starts: Vec<usize> = (0..items.len()).collect();
    starts.sort_by(|&i, &j| items[i].a.x.cmp(&items[j].a.x));
    let mut ends = starts.clone();
    ends.sort_by(|&i, &j| items[i].b.x.cmp(&items[j].b.x));

    let crosses = |s: &SweepSeg, t: &SweepSeg| segments_intersect(&s.a, &s.b, &t.a, &t.b);
    let mut active: BTreeSet<SweepSeg> = BTreeSet::new();
    let mut out: Vec<EnvelopePiece> = Vec::new();
    let push = |out: &mut Vec<EnvelopePiece>, lo: &Scalar, hi: &Scalar, owner: usize| {
        if let Some(last) = out.last_mut() {
            if last.owner == owner && last.hi == *lo {
                last.hi = hi.clone();
                return;
            }
        }
        out.push(EnvelopePiece { lo: lo.clone(), hi: hi.clone(), owner });
    };
    let (mut si, mut ei) = (0, 0);
    for (k, &x) in xs.iter().enumerate() {
        while si < starts.len() && items[starts[si]].a.x == *x {
            let s = &items[starts[si]];
            let below = active.range(..s.clone()).next_back();
            let above = active.range((Bound::Excluded(s.clone()), Bound::Unbounded)).next();
            if below.is_some_and(|t| crosses(s, t)) || above.is_some_and(|t| crosses(s, t)) {
                return Err(Error::SegmentsIntersect);
            }
            active.insert(s.clone());
            si += 1;
        }
        if let Some(first) = active.first() {
            push(&mut out, x, x, first.idx);
        }
        while ei < ends.len() && items[ends[ei]].b.x == *x {
            let s = &items[ends[ei]];
            let below = active.range(..s.clone()).next_back().cloned();
            let above = active.range((Bound::Excluded(s.clone()), Bound::Unbounded)).next().cloned();
            if let (Some(b), Some(a)) = (&below, &above) {
                if crosses(b, a) {
                    return Err(Error::SegmentsIntersect);
                }
            }
            active.remove(s);
            ei += 1;
        }
        if let (Some(first), Some(next_x)) = (active.first(), xs.get(k + 1)) {
            push(&mut out, x, next_x, first.idx);
        }
    }
    Ok(out)
}

/// Hull chain of the union of pairwise disjoint convex hulls, given their
/// chains on `side`. Each chain is cut down to the part under its
/// representative segment's share of the envelope, and the pieces are glued
/// left to right with common tangents.
pub fn merge_disjoint_hulls(chains: &[ChainHandle], side: ChainSide) -> Result<ChainHandle> {
    let live: Vec<&ChainHandle> = chains.iter().filter(|c| !c.is_empty()).collect();
    if live.is_empty() {
        return Ok(ChainHandle::empty(side));
    }
    let segs: Vec<(Point, Point)> =
        live.iter().map(|c| (c.first().unwrap().pt.clone(), c.last().unwrap().pt.clone())).collect();
    let env = envelope_of_segments(&segs, side).map_err(|e| match e {
        Error::SegmentsIntersect => Error::HullsIntersect,
        e => e,
    })?;
    let s = side.sign();
    let mut pieces: Vec<ChainHandle> = Vec::with_capacity(env.len());
    for piece in &env {
        let c = live[piece.owner].with_side(side);
        let (_, rest) = c.split_before_x(&piece.lo);
        let (mut part, _) = rest.split_at_x(&piece.hi);
        if part.is_empty() {
            continue;
        }
        // neighbouring pieces may both hold a vertex at the shared x; keep
        // the one on the envelope side
        while let Some(prev) = pieces.last_mut() {
            let (pl, pf) = (prev.last().unwrap().clone(), part.first().unwrap().clone());
            if pl.pt.x != pf.pt.x {
                break;
            }
            if (&pl.pt.y - &pf.pt.y).signum() * s > 0 {
                *prev = prev.split_at_index(prev.len() - 1).0;
                if prev.is_empty() {
                    pieces.pop();
                }
            } else {
                part = part.split_at_index(1).1;
                break;
            }
        }
        if !part.is_empty() {
            pieces.push(part);
        }
    }
    let mut acc = ChainHandle::empty(side);
    for p in pieces {
        acc = bridge(&acc, &p)?;
    }
    Ok(acc)
}

/// A separating common tangent: the touching dual points above and below,
/// and the line through them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tangent {
    pub plus: Vertex,
    pub minus: Vertex,
    pub line: Line,
}

/// The edge slope of `v -> n` compared with `x`: sign of `slope - x`.
fn slope_cmp(v: &Vertex, n: &Vertex, x: &Scalar) -> Ordering {
    slope_sign(&v.pt, &n.pt, x).cmp(&0)
}

fn slope(v: &Vertex, n: &Vertex) -> Scalar {
    (&n.pt.y - &v.pt.y) / (&n.pt.x - &v.pt.x)
}

/// Gap function of a pair of hulls: for a slope `x` the vertical room
/// between the lower hull of the points above and the upper hull of the
/// points below, measured along lines of slope `x`. Positive exactly for
/// slopes of separating lines.
struct Gap<'a> {
    plus: &'a ChainHandle,
    minus: &'a ChainHandle,
}

impl Gap<'_> {
    fn plus_at(&self, x: &Scalar) -> usize {
        self.plus.first_failing_edge(|v, n| slope_cmp(v, n, x) == Ordering::Less)
    }

    fn minus_at(&self, x: &Scalar) -> usize {
        self.minus.first_failing_edge(|v, n| slope_cmp(v, n, x) == Ordering::Greater)
    }

    fn nonpositive(&self, x: &Scalar) -> bool {
        let u = self.plus.get(self.plus_at(x)).unwrap();
        let w = self.minus.get(self.minus_at(x)).unwrap();
        // (u.y - x*u.x) - (w.y - x*w.x)
        slope_sign(&w.pt, &u.pt, x) <= 0
    }

    /// Indices of the touching vertices of the separating line with the
    /// least slope, searching only slopes below `x0`.
    fn left(&self, x0: &Scalar) -> (usize, usize) {
        let i = self.plus.first_failing_edge(|v, n| {
            let e = slope(v, n);
            e < *x0 && self.nonpositive(&e)
        });
        let j = self.minus.first_failing_edge(|v, n| {
            let d = slope(v, n);
            !(d < *x0 && self.nonpositive(&d))
        });
        (i, j)
    }

    /// Same for the greatest slope, searching above `x0`.
    fn right(&self, x0: &Scalar) -> (usize, usize) {
        let i = self.plus.first_failing_edge(|v, n| {
            let e = slope(v, n);
            !(e > *x0 && self.nonpositive(&e))
        });
        let j = self.minus.first_failing_edge(|v, n| {
            let d = slope(v, n);
            d > *x0 && self.nonpositive(&d)
        });
        (i, j)
    }
}

/// Which sides of the slope range of separating lines are open, from the x
/// extents of the two point sets. Equality means a vertical separator.
fn open_sides(plus: &ChainHandle, minus: &ChainHandle) -> (Ordering, Ordering) {
    match (plus.first(), plus.last(), minus.first(), minus.last()) {
        (Some(pf), Some(pl), Some(mf), Some(ml)) => (pf.pt.x.cmp(&ml.pt.x), mf.pt.x.cmp(&pl.pt.x)),
        _ => (Ordering::Greater, Ordering::Greater),
    }
}

fn make_tangent(plus: &ChainHandle, minus: &ChainHandle, (i, j): (usize, usize)) -> Result<Tangent> {
    let u = plus.get(i).unwrap().clone();
    let w = minus.get(j).unwrap().clone();
    let line = Line::through(&u.pt, &w.pt)?;
    Ok(Tangent { plus: u, minus: w, line })
}

/// Inner common tangents of the lower hull `h_plus` of points strictly above
/// `sep` and the upper hull `h_minus` of points strictly below it: the
/// separating lines of least and greatest slope. `None` when separating lines
/// of arbitrarily small (large) slope exist.
pub fn inner_common_tangents(
    h_plus: &ChainHandle,
    h_minus: &ChainHandle,
    sep: &Line,
) -> Result<(Option<Tangent>, Option<Tangent>)> {
    if h_plus.is_empty() || h_minus.is_empty() {
        return Err(Error::EmptyChain);
    }
    let gap = Gap { plus: h_plus, minus: h_minus };
    if gap.nonpositive(&sep.a) {
        return Err(Error::HullsIntersect);
    }
    let (lo, hi) = open_sides(h_plus, h_minus);
    if lo == Ordering::Equal || hi == Ordering::Equal {
        return Err(Error::GeneralPosition("inner tangent would be vertical".into()));
    }
    let left = match lo {
        Ordering::Less => Some(make_tangent(h_plus, h_minus, gap.left(&sep.a))?),
        _ => None,
    };
    let right = match hi {
        Ordering::Less => Some(make_tangent(h_plus, h_minus, gap.right(&sep.a))?),
        _ => None,
    };
    Ok((left, right))
}

/// A face held implicitly: the dual points of its lower boundary lines as a
/// sub-chain of the lower hull above, and of its upper boundary lines as a
/// sub-chain of the upper hull below (in dual x order, so right to left in
/// the primal), plus the extreme vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Face {
    pub lower: ChainHandle,
    pub upper: ChainHandle,
    pub leftmost: Option<Point>,
    pub rightmost: Option<Point>,
}

impl Face {
    pub fn boundary(&self) -> FaceBoundary {
        let lower = self.lower.to_vec().into_iter().map(|v| v.id).collect();
        let mut upper: Vec<usize> = self.upper.to_vec().into_iter().map(|v| v.id).collect();
        upper.reverse();
        FaceBoundary { lower, upper, leftmost: self.leftmost.clone(), rightmost: self.rightmost.clone() }
    }

    pub fn size(&self) -> usize {
        self.lower.len() + self.upper.len()
    }
}

/// Face containing the query point whose dual line is `p_star`, from the
/// lower hull of the dual points above `p_star` and the upper hull of those
/// below it. `O(log^2 n)` plus the cost of slicing.
pub fn face_from_hulls(h_plus: &ChainHandle, h_minus: &ChainHandle, p_star: &Line) -> Result<Face> {
    if h_plus.is_empty() || h_minus.is_empty() {
        return Ok(Face { lower: h_plus.clone(), upper: h_minus.clone(), leftmost: None, rightmost: None });
    }
    let gap = Gap { plus: h_plus, minus: h_minus };
    if gap.nonpositive(&p_star.a) {
        return Err(Error::HullsIntersect);
    }
    let (lo, hi) = open_sides(h_plus, h_minus);
    let (mut il, mut jl) = (0, h_minus.len() - 1);
    let (mut ir, mut jr) = (h_plus.len() - 1, 0);
    let mut leftmost = None;
    let mut rightmost = None;
    if lo == Ordering::Less {
        (il, jl) = gap.left(&p_star.a);
        leftmost = Some(dual_of_line(&make_tangent(h_plus, h_minus, (il, jl))?.line));
    }
    if hi == Ordering::Less {
        (ir, jr) = gap.right(&p_star.a);
        rightmost = Some(dual_of_line(&make_tangent(h_plus, h_minus, (ir, jr))?.line));
    }
    Ok(Face { lower: h_plus.slice(il, ir), upper: h_minus.slice(jr, jl), leftmost, rightmost })
}
