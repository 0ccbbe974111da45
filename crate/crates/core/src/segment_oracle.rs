//! Faces of a segment arrangement containing given points, found by building
//! the whole arrangement. Faces of segments need not be simply connected, so
//! a face is reported with its outer boundary (if bounded) and its holes.
//!
//! A second, independent route decomposes the plane into vertical slabs
//! and flood-fills the trapezoids; both describe a face by the set of edge
//! sides bounding it, which makes them directly comparable.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::geom::{orient_sign, Point, Scalar, Vector};

/// A non-vertical segment, stored left endpoint first.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Segment {
    pub a: Point,
    pub b: Point,
}

impl Segment {
    pub fn new(p: Point, q: Point) -> Result<Segment> {
        match p.x.cmp(&q.x) {
            Ordering::Less => Ok(Segment { a: p, b: q }),
            Ordering::Greater => Ok(Segment { a: q, b: p }),
            Ordering::Equal => Err(Error::GeneralPosition(format!("segment {p} {q} is vertical"))),
        }
    }

    pub fn y_at(&self, x: &Scalar) -> Scalar {
        let t = (x - &self.a.x) / (&self.b.x - &self.a.x);
        &self.a.y + &(&t * &(&self.b.y - &self.a.y))
    }

    fn slope(&self) -> Scalar {
        (&self.b.y - &self.a.y) / (&self.b.x - &self.a.x)
    }

    /// Crossing point with `o`, if their relative interiors cross.
    fn crossing(&self, o: &Segment) -> Option<Point> {
        let (s1, s2) = (self.slope(), o.slope());
        if s1 == s2 {
            return None;
        }
        let c1 = &self.a.y - &(&s1 * &self.a.x);
        let c2 = &o.a.y - &(&s2 * &o.a.x);
        let x = (&c2 - &c1) / (&s1 - &s2);
        let inside = |s: &Segment| s.a.x <= x && x <= s.b.x;
        (inside(self) && inside(o)).then(|| Point::new(x.clone(), &s1 * &x + &c1))
    }
}

/// One side of an elementary edge: the segment, the edge's endpoints (left
/// first), and whether the face lies above it.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SideKey {
    pub seg: usize,
    pub lo: Point,
    pub hi: Point,
    pub above: bool,
}

/// A directed edge of a boundary cycle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirectedEdge {
    pub seg: usize,
    pub from: Point,
    pub to: Point,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SegmentFace {
    /// Counterclockwise outer boundary; `None` for the unbounded face.
    pub outer: Option<Vec<DirectedEdge>>,
    /// Boundaries of the connected components of segments inside the face,
    /// each walked with the face on the left.
    pub holes: Vec<Vec<DirectedEdge>>,
    pub sides: BTreeSet<SideKey>,
}

/// Rejects vertical segments, touching or overlapping segments, endpoints
/// on other segments, and three segments through one point.
pub fn check_segments_general(segs: &[Segment]) -> Result<()> {
    let mut seen: HashMap<Point, (usize, usize)> = HashMap::new();
    for (i, s) in segs.iter().enumerate() {
        if s.a.x >= s.b.x {
            return Err(Error::GeneralPosition(format!("segment {i} is vertical or not normalized")));
        }
        for (j, t) in segs.iter().enumerate().skip(i + 1) {
            let d = [
                orient_sign(&t.a, &t.b, &s.a),
                orient_sign(&t.a, &t.b, &s.b),
                orient_sign(&s.a, &s.b, &t.a),
                orient_sign(&s.a, &s.b, &t.b),
            ];
            if d.contains(&0) {
                // collinear triples are only harmless when the point is
                // off the other segment's span
                let touching = crate::hulls::segments_intersect(&s.a, &s.b, &t.a, &t.b);
                if touching {
                    return Err(Error::GeneralPosition(format!("segments {i} and {j} touch")));
                }
                continue;
            }
            if d[0] * d[1] < 0 && d[2] * d[3] < 0 {
                let p = s.crossing(t).expect("proper crossing");
                if let Some(&(a, b)) = seen.get(&p) {
                    return Err(Error::GeneralPosition(format!("segments {a}, {b}, {i}, {j} share a point")));
                }
                seen.insert(p, (i, j));
            }
        }
    }
    Ok(())
}

fn check_points(segs: &[Segment], points: &[Point]) -> Result<()> {
    for (j, p) in points.iter().enumerate() {
        for (i, s) in segs.iter().enumerate() {
            if s.a.x <= p.x && p.x <= s.b.x && orient_sign(&s.a, &s.b, p) == 0 {
                return Err(Error::PointOnLine { point: j, line: i });
            }
        }
    }
    Ok(())
}

/// Vertices on each segment, sorted left to right.
fn vertices_on_segments(segs: &[Segment]) -> Vec<Vec<Point>> {
    let mut on: Vec<Vec<Point>> = segs.iter().map(|s| vec![s.a.clone(), s.b.clone()]).collect();
    for i in 0..segs.len() {
        for j in i + 1..segs.len() {
            if let Some(p) = segs[i].crossing(&segs[j]) {
                on[i].push(p.clone());
                on[j].push(p);
            }
        }
    }
    for v in &mut on {
        v.sort_by(|p, q| p.x.cmp(&q.x));
        v.dedup();
    }
    on
}

/// Counterclockwise angular order of directions.
fn angle_cmp(u: &Vector, v: &Vector) -> Ordering {
    let half = |d: &Vector| {
        let up = d.y.signum() > 0 || (d.y.is_zero() && d.x.signum() > 0);
        u8::from(!up)
    };
    half(u).cmp(&half(v)).then_with(|| 0.cmp(&u.cross_sign(v)))
}

struct Dcel {
    /// Per half-edge: origin vertex, segment, and successor on its cycle.
    origin: Vec<usize>,
    seg: Vec<usize>,
    next: Vec<usize>,
    points: Vec<Point>,
}

impl Dcel {
    fn build(on: &[Vec<Point>]) -> Dcel {
        let mut ids: HashMap<Point, usize> = HashMap::new();
        let mut points = Vec::new();
        let mut id_of = |p: &Point, points: &mut Vec<Point>| -> usize {
            *ids.entry(p.clone()).or_insert_with(|| {
                points.push(p.clone());
                points.len() - 1
            })
        };
        let mut origin = Vec::new();
        let mut seg = Vec::new();
        for (s, vs) in on.iter().enumerate() {
            for w in vs.windows(2) {
                let a = id_of(&w[0], &mut points);
                let b = id_of(&w[1], &mut points);
                // half-edge 2k goes right, 2k+1 goes left
                origin.push(a);
                origin.push(b);
                seg.push(s);
                seg.push(s);
            }
        }
        let mut around: Vec<Vec<usize>> = vec![Vec::new(); points.len()];
        for (h, &o) in origin.iter().enumerate() {
            around[o].push(h);
        }
        let dir = |h: usize| points[origin[h ^ 1]].sub(&points[origin[h]]);
        let mut pos = vec![0usize; origin.len()];
        for list in &mut around {
            list.sort_by(|&g, &h| angle_cmp(&dir(g), &dir(h)));
            for (k, &h) in list.iter().enumerate() {
                pos[h] = k;
            }
        }
        let next = (0..origin.len())
            .map(|h| {
                let t = h ^ 1;
                let list = &around[origin[t]];
                list[(pos[t] + list.len() - 1) % list.len()]
            })
            .collect();
        Dcel { origin, seg, next, points }
    }

    fn from(&self, h: usize) -> &Point {
        &self.points[self.origin[h]]
    }

    fn to(&self, h: usize) -> &Point {
        &self.points[self.origin[h ^ 1]]
    }

    fn side(&self, h: usize) -> SideKey {
        let (lo, hi) = if h.is_multiple_of(2) { (self.from(h), self.to(h)) } else { (self.to(h), self.from(h)) };
        SideKey { seg: self.seg[h], lo: lo.clone(), hi: hi.clone(), above: h.is_multiple_of(2) }
    }

    fn edge(&self, h: usize) -> DirectedEdge {
        DirectedEdge { seg: self.seg[h], from: self.from(h).clone(), to: self.to(h).clone() }
    }
}

fn find(uf: &mut [usize], mut x: usize) -> usize {
    while uf[x] != x {
        uf[x] = uf[uf[x]];
        x = uf[x];
    }
    x
}

/// Half-edge directly above `p`: the leftward half-edge of the nearest edge
/// hit by an upward vertical ray, skipping segments in `skip`.
fn ray_up(segs: &[Segment], on: &[Vec<Point>], p: &Point, skip: impl Fn(usize) -> bool) -> Option<(usize, usize)> {
    let mut best: Option<(Scalar, usize)> = None;
    for (i, s) in segs.iter().enumerate() {
        if skip(i) || p.x < s.a.x || p.x > s.b.x {
            continue;
        }
        let y = s.y_at(&p.x);
        if y > p.y && best.as_ref().is_none_or(|(b, _)| y < *b) {
            best = Some((y, i));
        }
    }
    best.map(|(_, i)| {
        let vs = &on[i];
        let k = vs.partition_point(|v| v.x <= p.x).clamp(1, vs.len() - 1) - 1;
        (i, k)
    })
}

/// Distinct faces containing the points, in order of first appearance, with
/// the face index of every point.
pub fn segment_faces_naive(segs: &[Segment], points: &[Point]) -> Result<(Vec<SegmentFace>, Vec<usize>)> {
    check_segments_general(segs)?;
    check_points(segs, points)?;
    let on = vertices_on_segments(segs);
    let d = Dcel::build(&on);
    // first half-edge index of each segment's edges
    let mut first = Vec::with_capacity(segs.len());
    let mut acc = 0;
    for vs in &on {
        first.push(acc);
        acc += 2 * (vs.len() - 1);
    }
    let nh = d.origin.len();
    let mut cycle_of = vec![usize::MAX; nh];
    let mut cycles: Vec<Vec<usize>> = Vec::new();
    for h in 0..nh {
        if cycle_of[h] != usize::MAX {
            continue;
        }
        let mut c = Vec::new();
        let mut g = h;
        loop {
            cycle_of[g] = cycles.len();
            c.push(g);
            g = d.next[g];
            if g == h {
                break;
            }
        }
        cycles.push(c);
    }
    let area2 = |c: &[usize]| -> Scalar {
        c.iter().fold(Scalar::zero(), |acc, &h| {
            let (p, q) = (d.from(h), d.to(h));
            &acc + &(&(&p.x * &q.y) - &(&q.x * &p.y))
        })
    };
    let positive: Vec<bool> = cycles.iter().map(|c| area2(c).signum() > 0).collect();
    // connected components of segments
    let mut comp: Vec<usize> = (0..segs.len()).collect();
    for i in 0..segs.len() {
        for j in i + 1..segs.len() {
            if segs[i].crossing(&segs[j]).is_some() {
                let (a, b) = (find(&mut comp, i), find(&mut comp, j));
                comp[a] = b;
            }
        }
    }
    let comp_ids: Vec<usize> = (0..segs.len()).map(|i| find(&mut comp, i)).collect();
    // attach every outer component boundary to the cycle right above it;
    // index `cycles.len()` stands for the unbounded face
    let unbounded = cycles.len();
    let mut uf: Vec<usize> = (0..=cycles.len()).collect();
    for (ci, c) in cycles.iter().enumerate() {
        if positive[ci] {
            continue;
        }
        let v = c.iter().map(|&h| d.from(h)).min_by(|p, q| (&p.x, &p.y).cmp(&(&q.x, &q.y))).unwrap();
        let own = comp_ids[d.seg[c[0]]];
        let target = match ray_up(segs, &on, v, |i| comp_ids[i] == own) {
            Some((s, k)) => cycle_of[first[s] + 2 * k + 1],
            None => unbounded,
        };
        let (a, b) = (find(&mut uf, ci), find(&mut uf, target));
        uf[a] = b;
    }
    let mut face_index: HashMap<usize, usize> = HashMap::new();
    let mut faces = Vec::new();
    let mut which = Vec::with_capacity(points.len());
    for p in points {
        let c = match ray_up(segs, &on, p, |_| false) {
            Some((s, k)) => cycle_of[first[s] + 2 * k + 1],
            None => unbounded,
        };
        let root = find(&mut uf, c);
        let idx = *face_index.entry(root).or_insert_with(|| {
            let members: Vec<usize> = (0..cycles.len()).filter(|&ci| find(&mut uf.clone(), ci) == root).collect();
            let mut outer = None;
            let mut holes = Vec::new();
            let mut sides = BTreeSet::new();
            for &ci in &members {
                let edges: Vec<DirectedEdge> = cycles[ci].iter().map(|&h| d.edge(h)).collect();
                sides.extend(cycles[ci].iter().map(|&h| d.side(h)));
                if positive[ci] {
                    outer = Some(edges);
                } else {
                    holes.push(edges);
                }
            }
            faces.push(SegmentFace { outer, holes, sides });
            faces.len() - 1
        });
        which.push(idx);
    }
    Ok((faces, which))
}

/// The same face sets by flood fill over the trapezoids of the vertical slab
/// decomposition; each face is reported by its side set.
pub fn segment_faces_flood(segs: &[Segment], points: &[Point]) -> Result<(Vec<BTreeSet<SideKey>>, Vec<usize>)> {
    check_segments_general(segs)?;
    check_points(segs, points)?;
    let on = vertices_on_segments(segs);
    let mut xs: Vec<Scalar> = on.iter().flatten().map(|p| p.x.clone()).collect();
    xs.sort();
    xs.dedup();
    // slab k spans (xs[k-1], xs[k]); cells of a slab are the gaps between
    // the segments spanning it, bottom to top
    let nslab = xs.len() + 1;
    let mut slab_segs: Vec<Vec<usize>> = vec![Vec::new(); nslab];
    for k in 1..xs.len() {
        let mid = Scalar::mid(&xs[k - 1], &xs[k]);
        let mut here: Vec<(Scalar, usize)> = segs
            .iter()
            .enumerate()
            .filter(|(_, s)| s.a.x <= xs[k - 1] && s.b.x >= xs[k])
            .map(|(i, s)| (s.y_at(&mid), i))
            .collect();
        here.sort();
        slab_segs[k] = here.into_iter().map(|(_, i)| i).collect();
    }
    let mut cell_base = Vec::with_capacity(nslab + 1);
    let mut acc = 0;
    for s in &slab_segs {
        cell_base.push(acc);
        acc += s.len() + 1;
    }
    let mut uf: Vec<usize> = (0..acc).collect();
    for k in 0..xs.len() {
        // across the wall x = xs[k] between slab k and slab k+1
        let x = &xs[k];
        let bounds = |list: &[usize]| -> Vec<Scalar> { list.iter().map(|&i| segs[i].y_at(x)).collect() };
        let (l, r) = (bounds(&slab_segs[k]), bounds(&slab_segs[k + 1]));
        let lo = |b: &[Scalar], c: usize| if c == 0 { None } else { Some(b[c - 1].clone()) };
        let hi = |b: &[Scalar], c: usize| b.get(c).cloned();
        let (mut i, mut j) = (0, 0);
        while i <= l.len() && j <= r.len() {
            let low = match (lo(&l, i), lo(&r, j)) {
                (Some(a), Some(b)) => Some(std::cmp::max(a, b)),
                (a, b) => a.or(b),
            };
            let high = match (hi(&l, i), hi(&r, j)) {
                (Some(a), Some(b)) => Some(std::cmp::min(a, b)),
                (a, b) => a.or(b),
            };
            let open = match (&low, &high) {
                (Some(a), Some(b)) => a < b,
                _ => true,
            };
            if open {
                let (a, b) = (find(&mut uf, cell_base[k] + i), find(&mut uf, cell_base[k + 1] + j));
                uf[a] = b;
            }
            // advance the interval that ends first
            match (hi(&l, i), hi(&r, j)) {
                (None, None) => break,
                (Some(_), None) => i += 1,
                (None, Some(_)) => j += 1,
                (Some(a), Some(b)) => match a.cmp(&b) {
                    Ordering::Less => i += 1,
                    Ordering::Greater => j += 1,
                    Ordering::Equal => {
                        i += 1;
                        j += 1;
                    }
                },
            }
        }
    }
    let edge_of = |s: usize, x: &Scalar| -> (Point, Point) {
        let vs = &on[s];
        let k = vs.partition_point(|v| v.x < *x);
        (vs[k - 1].clone(), vs[k].clone())
    };
    let mut sides: HashMap<usize, BTreeSet<SideKey>> = HashMap::new();
    for k in 1..xs.len() {
        let mid = Scalar::mid(&xs[k - 1], &xs[k]);
        for (c, &s) in slab_segs[k].iter().enumerate() {
            let (lo, hi) = edge_of(s, &mid);
            let below = find(&mut uf, cell_base[k] + c);
            let above = find(&mut uf, cell_base[k] + c + 1);
            sides.entry(above).or_default().insert(SideKey { seg: s, lo: lo.clone(), hi: hi.clone(), above: true });
            sides.entry(below).or_default().insert(SideKey { seg: s, lo, hi, above: false });
        }
    }
    let mut index: HashMap<usize, usize> = HashMap::new();
    let mut faces = Vec::new();
    let mut which = Vec::with_capacity(points.len());
    for p in points {
        let k = xs.partition_point(|x| *x <= p.x);
        let list = &slab_segs[k];
        let c = if k == 0 || k == xs.len() { 0 } else { list.partition_point(|&i| segs[i].y_at(&p.x) < p.y) };
        let root = find(&mut uf, cell_base[k] + c);
        let idx = *index.entry(root).or_insert_with(|| {
            faces.push(sides.get(&root).cloned().unwrap_or_default());
            faces.len() - 1
        });
        which.push(idx);
    }
    Ok((faces, which))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn seg(a: (i64, i64), b: (i64, i64)) -> Segment {
        Segment::new(Point::int(a.0, a.1), Point::int(b.0, b.1)).unwrap()
    }

    fn sides_of(f: &[SegmentFace]) -> Vec<BTreeSet<SideKey>> {
        f.iter().map(|f| f.sides.clone()).collect()
    }

    #[test]
    fn single_segment_face_wraps_both_sides() {
        let s = [seg((0, 0), (4, 2))];
        let (f, w) = segment_faces_naive(&s, &[Point::int(1, 5), Point::int(3, -5)]).unwrap();
        assert_eq!((f.len(), w), (1, vec![0, 0]));
        assert!(f[0].outer.is_none());
        assert_eq!(f[0].holes.len(), 1);
        assert_eq!(f[0].sides.len(), 2);
        let (g, _) = segment_faces_flood(&s, &[Point::int(1, 5), Point::int(3, -5)]).unwrap();
        assert_eq!(g, sides_of(&f));
    }

    #[test]
    fn crossing_segments_leave_one_face() {
        let s = [seg((-2, -2), (2, 2)), seg((-2, 2), (2, -2))];
        let (f, _) = segment_faces_naive(&s, &[Point::new(Scalar::ratio(1, 10), Scalar::zero())]).unwrap();
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].sides.len(), 8);
    }

    #[test]
    fn triangle_of_segments_has_inner_face() {
        let s = [seg((-2, 1), (12, -1)), seg((-1, -2), (6, 12)), seg((4, 12), (11, -3))];
        let pts = [Point::int(5, 3), Point::int(100, 100)];
        let (f, w) = segment_faces_naive(&s, &pts).unwrap();
        assert_eq!(w, vec![0, 1]);
        assert!(f[0].outer.is_some() && f[0].holes.is_empty());
        assert_eq!(f[0].outer.as_ref().unwrap().len(), 3);
        let (g, gw) = segment_faces_flood(&s, &pts).unwrap();
        assert_eq!((g, gw), (sides_of(&f), w));
    }

    #[test]
    fn rejects_touching_segments() {
        let s = [seg((0, 0), (2, 2)), seg((2, 2), (4, 0))];
        assert!(matches!(segment_faces_naive(&s, &[]), Err(Error::GeneralPosition(_))));
    }

    fn random_instance(rng: &mut ChaCha8Rng, n: usize, m: usize) -> (Vec<Segment>, Vec<Point>) {
        let r = |rng: &mut ChaCha8Rng| Scalar::ratio(rng.gen_range(-10_000..10_000), rng.gen_range(1..89));
        let segs = (0..n)
            .map(|_| loop {
                let p = Point::new(r(rng), r(rng));
                let d = Point::new(
                    &p.x + &Scalar::ratio(rng.gen_range(-4000..4000), 7),
                    &p.y + &Scalar::ratio(rng.gen_range(-4000..4000), 7),
                );
                if let Ok(s) = Segment::new(p, d) {
                    break s;
                }
            })
            .collect();
        let pts = (0..m).map(|_| Point::new(r(rng), r(rng))).collect();
        (segs, pts)
    }

    #[test]
    fn naive_agrees_with_flood_fill() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let n = rng.gen_range(0..20);
            let (s, p) = random_instance(&mut rng, n, 10);
            let (f, w) = segment_faces_naive(&s, &p).unwrap();
            let (g, gw) = segment_faces_flood(&s, &p).unwrap();
            assert_eq!(w, gw);
            assert_eq!(sides_of(&f), g);
        }
    }
}
