//! Convex planar regions that may be unbounded.
//!
//! A region is a counterclockwise cycle of generalized vertices. A finite
//! vertex is an ordinary point; an ideal vertex is a direction at infinity.
//! The edge between consecutive vertices is interpreted as follows:
//!
//! * finite `p` to finite `q`: the segment `pq`;
//! * finite `p` to ideal `d`: the ray `p + t*d`;
//! * ideal `d` to finite `p`: the ray `p + t*d`, walked toward `p`;
//! * ideal to ideal: an arc at infinity, swept counterclockwise.
//!
//! The interior lies to the left of every finite edge. Cutting cells are
//! regions with three generalized vertices (at least one finite); the whole
//! plane is the four-direction cycle returned by [`Region::plane`].

use std::fmt;

use crate::geom::{orient_sign, Cut, Line, Point, Scalar, Vector};

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum GVertex {
    Finite(Point),
    Ideal(Vector),
}

impl GVertex {
    pub fn finite(&self) -> Option<&Point> {
        match self {
            GVertex::Finite(p) => Some(p),
            GVertex::Ideal(_) => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, GVertex::Finite(_))
    }

    fn sign(&self, cut: &Cut) -> i32 {
        match self {
            GVertex::Finite(p) => cut.side(p),
            GVertex::Ideal(d) => cut.dir_side(d),
        }
    }
}

/// Label of the edge leaving a vertex.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum EdgeTag {
    /// Edge of the region a computation started from.
    Boundary(u32),
    /// Portion of input line `id`.
    Line(usize),
    /// Triangulation diagonal or auxiliary cut.
    Aux,
    /// Arc at infinity.
    Infinite,
}

/// Supporting line of a finite edge, in the normalized form `a*x + b*y = c`
/// with the first nonzero of `(a, b)` equal to one.
#[derive(Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct LineKey {
    pub a: Scalar,
    pub b: Scalar,
    pub c: Scalar,
}

impl LineKey {
    pub fn from_point_dir(p: &Point, d: &Vector) -> LineKey {
        // normal (d.y, -d.x)
        let (mut a, mut b) = (d.y.clone(), -&d.x);
        let lead = if !a.is_zero() { a.clone() } else { b.clone() };
        a = &a / &lead;
        b = &b / &lead;
        let c = &a * &p.x + &b * &p.y;
        LineKey { a, b, c }
    }

    pub fn is_vertical(&self) -> bool {
        self.b.is_zero()
    }

    /// Coordinate used to order points along the line: x, or y for
    /// vertical lines.
    pub fn param(&self, p: &Point) -> Scalar {
        if self.is_vertical() {
            p.y.clone()
        } else {
            p.x.clone()
        }
    }

    /// Sign of the parameter change when moving along `d`.
    pub fn param_dir(&self, d: &Vector) -> i32 {
        if self.is_vertical() {
            d.y.signum()
        } else {
            d.x.signum()
        }
    }
}

/// A finite edge of a region as a parameter interval on its supporting line.
/// `None` bounds are infinite.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeSpan {
    pub key: LineKey,
    pub lo: Option<Scalar>,
    pub hi: Option<Scalar>,
    pub tag: EdgeTag,
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Region {
    verts: Vec<GVertex>,
    tags: Vec<EdgeTag>,
}

impl fmt::Debug for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Region[")?;
        for (i, v) in self.verts.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            match v {
                GVertex::Finite(p) => write!(f, "{p}")?,
                GVertex::Ideal(d) => write!(f, "inf({}, {})", d.x, d.y)?,
            }
        }
        write!(f, "]")
    }
}

fn arc_contains(d1: &Vector, d2: &Vector, c: &Vector) -> bool {
    let span = d1.cross_sign(d2);
    let a = d1.cross_sign(c);
    let b = c.cross_sign(d2);
    match span {
        1 => a > 0 && b > 0,
        0 => a > 0,
        _ => !(d2.cross_sign(c) >= 0 && c.cross_sign(d1) >= 0),
    }
}

fn rot90(d: &Vector) -> Vector {
    Vector::new(-&d.y, d.x.clone())
}

impl Region {
    pub fn from_parts(verts: Vec<GVertex>, tags: Vec<EdgeTag>) -> Region {
        assert_eq!(verts.len(), tags.len());
        Region { verts, tags }
    }

    /// The whole plane.
    pub fn plane() -> Region {
        Region {
            verts: vec![
                GVertex::Ideal(Vector::int(1, 0)),
                GVertex::Ideal(Vector::int(0, 1)),
                GVertex::Ideal(Vector::int(-1, 0)),
                GVertex::Ideal(Vector::int(0, -1)),
            ],
            tags: vec![EdgeTag::Infinite; 4],
        }
    }

    /// Triangle on three generalized vertices, reordered counterclockwise.
    /// At least one vertex must be finite.
    pub fn triangle(a: GVertex, b: GVertex, c: GVertex) -> Region {
        let mut verts = vec![a, b, c];
        let tags = vec![EdgeTag::Boundary(0), EdgeTag::Boundary(1), EdgeTag::Boundary(2)];
        if Region::signed_turn(&verts) < 0 {
            verts.swap(1, 2);
        }
        let mut r = Region { verts, tags };
        r.fix_infinite_tags();
        r
    }

    /// Finite triangle on three points, counterclockwise.
    pub fn finite_triangle(a: Point, b: Point, c: Point) -> Region {
        Region::triangle(GVertex::Finite(a), GVertex::Finite(b), GVertex::Finite(c))
    }

    fn fix_infinite_tags(&mut self) {
        let n = self.verts.len();
        for i in 0..n {
            if !self.verts[i].is_finite() && !self.verts[(i + 1) % n].is_finite() {
                self.tags[i] = EdgeTag::Infinite;
            }
        }
    }

    fn signed_turn(v: &[GVertex]) -> i32 {
        use GVertex::*;
        match (&v[0], &v[1], &v[2]) {
            (Finite(a), Finite(b), Finite(c)) => orient_sign(a, b, c),
            (Finite(a), Finite(b), Ideal(d)) => b.sub(a).cross_sign(d),
            (Finite(a), Ideal(d), Finite(b)) => a.sub(b).cross_sign(d),
            (Ideal(d), Finite(a), Finite(b)) => b.sub(a).cross_sign(d),
            (Finite(_), Ideal(d1), Ideal(d2))
            | (Ideal(d2), Finite(_), Ideal(d1))
            | (Ideal(d1), Ideal(d2), Finite(_)) => d1.cross_sign(d2),
            _ => 0,
        }
    }

    pub fn vertices(&self) -> &[GVertex] {
        &self.verts
    }

    pub fn tags(&self) -> &[EdgeTag] {
        &self.tags
    }

    pub fn len(&self) -> usize {
        self.verts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.verts.is_empty()
    }

    pub fn is_bounded(&self) -> bool {
        self.verts.iter().all(GVertex::is_finite)
    }

    pub fn is_plane(&self) -> bool {
        self.verts.iter().all(|v| !v.is_finite())
    }

    pub fn finite_vertices(&self) -> impl Iterator<Item = &Point> {
        self.verts.iter().filter_map(GVertex::finite)
    }

    /// Oriented supporting line of edge `i`, or `None` for arcs at infinity.
    pub fn edge_cut(&self, i: usize) -> Option<Cut> {
        let n = self.verts.len();
        match (&self.verts[i], &self.verts[(i + 1) % n]) {
            (GVertex::Finite(p), GVertex::Finite(q)) => Some(Cut::through(p, q)),
            (GVertex::Finite(p), GVertex::Ideal(d)) => Some(Cut::new(p.clone(), d.clone())),
            (GVertex::Ideal(d), GVertex::Finite(p)) => Some(Cut::new(p.clone(), d.neg())),
            _ => None,
        }
    }

    /// Each finite edge as a parameter interval on its supporting line.
    pub fn edge_spans(&self) -> Vec<EdgeSpan> {
        (0..self.verts.len()).filter_map(|i| self.edge_key(i).map(|key| self.edge_span(i, key))).collect()
    }

    /// Supporting line of edge `i`, `None` for the edge at infinity.
    pub fn edge_key(&self, i: usize) -> Option<LineKey> {
        let n = self.verts.len();
        match (&self.verts[i], &self.verts[(i + 1) % n]) {
            (GVertex::Finite(p), GVertex::Finite(q)) => Some(LineKey::from_point_dir(p, &q.sub(p))),
            (GVertex::Finite(p), GVertex::Ideal(d)) | (GVertex::Ideal(d), GVertex::Finite(p)) => {
                Some(LineKey::from_point_dir(p, d))
            }
            _ => None,
        }
    }

    /// Edge `i` as an interval on `key`, which must be its supporting line.
    pub fn edge_span(&self, i: usize, key: LineKey) -> EdgeSpan {
        let n = self.verts.len();
        let (lo, hi) = match (&self.verts[i], &self.verts[(i + 1) % n]) {
            (GVertex::Finite(p), GVertex::Finite(q)) => {
                let (a, b) = (key.param(p), key.param(q));
                if a <= b {
                    (Some(a), Some(b))
                } else {
                    (Some(b), Some(a))
                }
            }
            (GVertex::Finite(p), GVertex::Ideal(d)) | (GVertex::Ideal(d), GVertex::Finite(p)) => {
                if key.param_dir(d) > 0 {
                    (Some(key.param(p)), None)
                } else {
                    (None, Some(key.param(p)))
                }
            }
            _ => panic!("edge at infinity has no span"),
        };
        EdgeSpan { key, lo, hi, tag: self.tags[i] }
    }

    /// Signs attained by `cut`'s affine function over the region: whether
    /// some point is strictly on the positive side, and whether some point is
    /// strictly on the negative side.
    pub fn side_extent(&self, cut: &Cut) -> (bool, bool) {
        let n = self.verts.len();
        let mut pos = false;
        let mut neg = false;
        for i in 0..n {
            let s = self.verts[i].sign(cut);
            pos |= s > 0;
            neg |= s < 0;
            if let (GVertex::Ideal(d1), GVertex::Ideal(d2)) = (&self.verts[i], &self.verts[(i + 1) % n]) {
                if d1.cross_sign(d2) <= 0 {
                    let m = cut.dir_side(&rot90(d1));
                    pos |= m > 0;
                    neg |= m < 0;
                }
            }
        }
        (pos, neg)
    }

    /// Whether `cut` meets the open interior.
    pub fn crossed_by(&self, cut: &Cut) -> bool {
        let (p, n) = self.side_extent(cut);
        p && n
    }

    pub fn crossed_by_line(&self, l: &Line) -> bool {
        self.crossed_by(&l.as_cut())
    }

    /// Entirely on the closed positive side of `cut`.
    pub fn within(&self, cut: &Cut) -> bool {
        !self.side_extent(cut).1
    }

    /// Location of a point: `1` strictly inside, `0` on the boundary, `-1`
    /// outside.
    pub fn locate(&self, p: &Point) -> i32 {
        let mut on = false;
        for i in 0..self.verts.len() {
            if let Some(c) = self.edge_cut(i) {
                match c.side(p) {
                    s if s < 0 => return -1,
                    0 => on = true,
                    _ => {}
                }
            }
        }
        if on {
            0
        } else {
            1
        }
    }

    pub fn contains_strictly(&self, p: &Point) -> bool {
        self.locate(p) > 0
    }

    /// The part of the region on the closed positive side of `cut`, with new
    /// boundary edges labeled `tag`. Returns `None` when that part has empty
    /// interior.
    pub fn clip(&self, cut: &Cut, tag: EdgeTag) -> Option<Region> {
        let n = self.verts.len();
        let signs: Vec<i32> = self.verts.iter().map(|v| v.sign(cut)).collect();
        let (pos, neg) = self.side_extent(cut);
        if !pos {
            return None;
        }
        if !neg {
            return Some(self.clone());
        }
        let mut verts = Vec::with_capacity(n + 2);
        let mut tags = Vec::with_capacity(n + 2);
        for i in 0..n {
            let j = (i + 1) % n;
            let (s, t) = (signs[i], signs[j]);
            if s > 0 || (s == 0 && t >= 0) {
                verts.push(self.verts[i].clone());
                tags.push(self.tags[i]);
            } else if s == 0 {
                verts.push(self.verts[i].clone());
                tags.push(tag);
            }
            if s * t < 0 {
                let x = self.crossing(i, cut);
                verts.push(x);
                tags.push(if s > 0 { tag } else { self.tags[i] });
            }
        }
        // A cut edge running between two ideal vertices is a full line;
        // give it a finite anchor.
        let mut k = 0;
        while k < verts.len() {
            let nk = (k + 1) % verts.len();
            if tags[k] == tag && !verts[k].is_finite() && !verts[nk].is_finite() {
                verts.insert(k + 1, GVertex::Finite(cut.anchor.clone()));
                tags.insert(k + 1, tag);
                break;
            }
            k += 1;
        }
        let mut r = Region { verts, tags };
        r.drop_duplicates();
        Some(r)
    }

    /// Splits by `cut` into the positive and negative parts.
    pub fn split(&self, cut: &Cut, tag: EdgeTag) -> (Option<Region>, Option<Region>) {
        (self.clip(cut, tag), self.clip(&cut.reversed(), tag))
    }

    fn crossing(&self, i: usize, cut: &Cut) -> GVertex {
        let n = self.verts.len();
        match (&self.verts[i], &self.verts[(i + 1) % n]) {
            (GVertex::Finite(p), GVertex::Finite(q)) => {
                GVertex::Finite(cut.hit(p, &q.sub(p)).expect("crossing segment"))
            }
            (GVertex::Finite(p), GVertex::Ideal(d)) | (GVertex::Ideal(d), GVertex::Finite(p)) => {
                GVertex::Finite(cut.hit(p, d).expect("crossing ray"))
            }
            (GVertex::Ideal(d1), GVertex::Ideal(d2)) => {
                let c = cut.dir.clone();
                if arc_contains(d1, d2, &c) {
                    GVertex::Ideal(c)
                } else {
                    GVertex::Ideal(c.neg())
                }
            }
        }
    }

    fn drop_duplicates(&mut self) {
        let mut i = 0;
        while self.verts.len() > 1 && i < self.verts.len() {
            let j = (i + 1) % self.verts.len();
            let same = match (&self.verts[i], &self.verts[j]) {
                (GVertex::Finite(a), GVertex::Finite(b)) => a == b,
                (GVertex::Ideal(a), GVertex::Ideal(b)) => a.same_direction(b),
                _ => false,
            };
            if same {
                // keep the tag of the edge leaving the survivor
                let t = self.tags[j];
                self.verts.remove(j);
                self.tags.remove(j);
                let i2 = if j < i { i - 1 } else { i };
                self.tags[i2] = t;
            } else {
                i += 1;
            }
        }
    }

    fn incoming_dir(&self, i: usize) -> Vector {
        let n = self.verts.len();
        let p = self.verts[i].finite().expect("finite vertex");
        match &self.verts[(i + n - 1) % n] {
            GVertex::Finite(q) => p.sub(q),
            GVertex::Ideal(d) => d.neg(),
        }
    }

    fn outgoing_dir(&self, i: usize) -> Vector {
        let n = self.verts.len();
        let p = self.verts[i].finite().expect("finite vertex");
        match &self.verts[(i + 1) % n] {
            GVertex::Finite(q) => q.sub(p),
            GVertex::Ideal(d) => d.clone(),
        }
    }

    /// Whether some finite vertex is a genuine corner, so the region can be
    /// fan-triangulated.
    pub fn has_corner(&self) -> bool {
        (0..self.verts.len())
            .any(|i| self.verts[i].is_finite() && self.incoming_dir(i).cross_sign(&self.outgoing_dir(i)) != 0)
    }

    /// Removes finite vertices where the boundary goes straight through.
    pub fn without_flat_vertices(&self) -> Region {
        let mut r = self.clone();
        let mut i = 0;
        while i < r.verts.len() && r.verts.len() > 3 {
            if r.verts[i].is_finite() {
                let din = r.incoming_dir(i);
                let dout = r.outgoing_dir(i);
                if din.cross_sign(&dout) == 0 && din.dot(&dout).signum() > 0 {
                    r.verts.remove(i);
                    r.tags.remove(i);
                    continue;
                }
            }
            i += 1;
        }
        r
    }

    /// Fan triangulation from the lowest finite vertex (lowest y, then
    /// lowest x). Fan edges are tagged [`EdgeTag::Aux`]. Panics if the region
    /// has no corner, which cannot happen for faces of an arrangement of two
    /// or more non-parallel lines.
    pub fn triangulate(&self) -> Vec<Region> {
        let r = self.without_flat_vertices();
        let n = r.verts.len();
        let b = (0..n)
            .filter(|&i| r.verts[i].is_finite())
            .min_by(|&i, &j| {
                let (p, q) = (r.verts[i].finite().unwrap(), r.verts[j].finite().unwrap());
                (&p.y, &p.x).cmp(&(&q.y, &q.x))
            })
            .expect("region without a finite corner");
        if n == 3 {
            return vec![r];
        }
        let mut out = Vec::new();
        for step in 1..n - 1 {
            let j = (b + step) % n;
            let k = (j + 1) % n;
            let verts = vec![r.verts[b].clone(), r.verts[j].clone(), r.verts[k].clone()];
            if Region::signed_turn(&verts) <= 0 {
                continue;
            }
            let t0 = if step == 1 { r.tags[b] } else { EdgeTag::Aux };
            let t2 = if step == n - 2 { r.tags[k] } else { EdgeTag::Aux };
            let mut tri = Region { verts, tags: vec![t0, r.tags[j], t2] };
            tri.fix_infinite_tags();
            out.push(tri);
        }
        out
    }

    /// An interior point.
    pub fn interior_point(&self) -> Point {
        let r = self.without_flat_vertices();
        let fin: Vec<&Point> = r.finite_vertices().collect();
        if fin.is_empty() {
            return Point::int(0, 0);
        }
        // Average of finite vertices pushed along ideal directions.
        let k = Scalar::from_int(fin.len() as i64);
        let mut sx = Scalar::zero();
        let mut sy = Scalar::zero();
        for p in &fin {
            sx = sx + &p.x;
            sy = sy + &p.y;
        }
        let mut c = Point::new(sx / &k, sy / &k);
        for v in &r.verts {
            if let GVertex::Ideal(d) = v {
                c = c.offset(d);
            }
        }
        c
    }

    /// Area of a bounded region (twice the shoelace sum, halved).
    pub fn area(&self) -> Option<Scalar> {
        if !self.is_bounded() {
            return None;
        }
        let pts: Vec<&Point> = self.finite_vertices().collect();
        let mut s = Scalar::zero();
        for i in 0..pts.len() {
            let (p, q) = (pts[i], pts[(i + 1) % pts.len()]);
            s = s + (&p.x * &q.y - &q.x * &p.y);
        }
        Some(s / &Scalar::from_int(2))
    }
}

/// Whether `l` meets the open interior of `t`.
pub fn line_crosses_triangle(l: &Line, t: &Region) -> bool {
    t.crossed_by_line(l)
}
