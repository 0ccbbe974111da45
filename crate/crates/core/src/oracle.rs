//! Brute-force ground truth for line arrangements: the full arrangement as a
//! half-edge structure, point location, naive many-faces, an independent
//! face route by half-plane clipping, and the zone of a triangle.
//!
//! Unbounded faces are closed symbolically: a half-edge running off to
//! infinity is followed by the next ray in counterclockwise order, so no
//! bounding box is needed.

use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::face::FaceBoundary;
use crate::geom::{Line, Point, Scalar};
use crate::region::{EdgeTag, GVertex, Region};

/// The arrangement of a set of lines. Line `i` is cut by its crossings into
/// `deg(i) + 1` edges; each edge has a forward (increasing x) and a backward
/// half-edge, with the incident face on its left.
#[derive(Clone, Debug)]
pub struct Arrangement {
    lines: Vec<Line>,
    /// Crossings of each line, sorted by x: `(x, other line)`.
    cross: Vec<Vec<(Scalar, usize)>>,
    /// Index of the first edge of each line.
    base: Vec<usize>,
    /// Face of each half-edge.
    half_face: Vec<u32>,
    faces: Vec<FaceBoundary>,
    face_sizes: Vec<usize>,
    vertex_count: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
struct Half {
    line: usize,
    edge: usize,
    fwd: bool,
}

/// Counts gathered from oracle runs.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OracleStats {
    /// Number of intersecting pairs of lines.
    pub k: usize,
    /// Edge counts of the reported faces.
    pub face_sizes: Vec<usize>,
    /// Piece counts of computed zones.
    pub zone_sizes: Vec<usize>,
}

impl Arrangement {
    /// Builds the arrangement. Parallel lines are allowed; duplicate lines
    /// and three lines through a point are rejected. `O(n^2 log n)`.
    pub fn build(lines: &[Line]) -> Result<Arrangement> {
        let n = lines.len();
        let mut sorted: Vec<usize> = (0..n).collect();
        sorted.sort_by(|&i, &j| (&lines[i].a, &lines[i].b).cmp(&(&lines[j].a, &lines[j].b)));
        for w in sorted.windows(2) {
            if lines[w[0]] == lines[w[1]] {
                return Err(Error::GeneralPosition(format!("lines {} and {} coincide", w[0], w[1])));
            }
        }
        let mut cross: Vec<Vec<(Scalar, usize)>> = vec![Vec::with_capacity(n.saturating_sub(1)); n];
        let mut vertex_count = 0;
        for i in 0..n {
            for j in i + 1..n {
                if lines[i].a != lines[j].a {
                    let x = (&lines[j].b - &lines[i].b) / (&lines[i].a - &lines[j].a);
                    cross[i].push((x.clone(), j));
                    cross[j].push((x, i));
                    vertex_count += 1;
                }
            }
        }
        for (i, c) in cross.iter_mut().enumerate() {
            c.sort();
            for w in c.windows(2) {
                if w[0].0 == w[1].0 {
                    return Err(Error::GeneralPosition(format!("lines {i}, {}, {} are concurrent", w[0].1, w[1].1)));
                }
            }
        }
        let mut base = Vec::with_capacity(n + 1);
        let mut acc = 0;
        for c in &cross {
            base.push(acc);
            acc += c.len() + 1;
        }
        base.push(acc);
        let mut arr = Arrangement {
            lines: lines.to_vec(),
            cross,
            base,
            half_face: vec![u32::MAX; 2 * acc],
            faces: Vec::new(),
            face_sizes: Vec::new(),
            vertex_count,
        };
        arr.trace_faces();
        Ok(arr)
    }

    pub fn lines(&self) -> &[Line] {
        &self.lines
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.base[self.lines.len()]
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn faces(&self) -> &[FaceBoundary] {
        &self.faces
    }

    pub fn face_sizes(&self) -> &[usize] {
        &self.face_sizes
    }

    pub fn bounded_face_count(&self) -> usize {
        self.faces.iter().filter(|f| f.is_bounded()).count()
    }

    fn index(&self, h: Half) -> usize {
        2 * (self.base[h.line] + h.edge) + usize::from(!h.fwd)
    }

    /// Rays at infinity in counterclockwise order of direction, starting
    /// just after straight down. Parallel rays are ordered as they are met
    /// when turning counterclockwise far away.
    fn rays(&self) -> Vec<(usize, bool)> {
        let n = self.lines.len();
        let mut fwd: Vec<usize> = (0..n).collect();
        fwd.sort_by(|&i, &j| (&self.lines[i].a, &self.lines[i].b).cmp(&(&self.lines[j].a, &self.lines[j].b)));
        let mut back: Vec<usize> = (0..n).collect();
        back.sort_by(|&i, &j| {
            self.lines[i].a.cmp(&self.lines[j].a).then_with(|| self.lines[j].b.cmp(&self.lines[i].b))
        });
        fwd.into_iter().map(|i| (i, true)).chain(back.into_iter().map(|i| (i, false))).collect()
    }

    /// Position of the crossing with x-coordinate `x` on line `j`.
    fn crossing_pos(&self, j: usize, x: &Scalar) -> usize {
        self.cross[j].binary_search_by(|(cx, _)| cx.cmp(x)).expect("crossing present on both lines")
    }

    fn trace_faces(&mut self) {
        let mut half_face = std::mem::take(&mut self.half_face);
        let n = self.lines.len();
        let rays = self.rays();
        let mut ray_pos = vec![0usize; 2 * n];
        for (p, &(l, f)) in rays.iter().enumerate() {
            ray_pos[2 * l + usize::from(!f)] = p;
        }
        // successor of a half-edge, and whether the step passes a vertex
        let next = |h: Half| -> (Half, Option<Point>) {
            let deg = self.cross[h.line].len();
            let head = if h.fwd { (h.edge < deg).then_some(h.edge) } else { h.edge.checked_sub(1) };
            match head {
                Some(k) => {
                    let (x, j) = &self.cross[h.line][k];
                    let j = *j;
                    let p = self.crossing_pos(j, x);
                    let (ai, aj) = (&self.lines[h.line].a, &self.lines[j].a);
                    let go_fwd = if h.fwd { aj > ai } else { ai > aj };
                    let pt = Point::new(x.clone(), self.lines[j].eval(x));
                    let nh = if go_fwd {
                        Half { line: j, edge: p + 1, fwd: true }
                    } else {
                        Half { line: j, edge: p, fwd: false }
                    };
                    (nh, Some(pt))
                }
                None => {
                    let pos = ray_pos[2 * h.line + usize::from(!h.fwd)];
                    let (j, f) = rays[(pos + 1) % rays.len()];
                    let nh = if f {
                        Half { line: j, edge: self.cross[j].len(), fwd: false }
                    } else {
                        Half { line: j, edge: 0, fwd: true }
                    };
                    (nh, None)
                }
            }
        };
        let mut faces = Vec::new();
        let mut sizes = Vec::new();
        for line in 0..n {
            for edge in 0..=self.cross[line].len() {
                for fwd in [true, false] {
                    let start = Half { line, edge, fwd };
                    if half_face[self.index(start)] != u32::MAX {
                        continue;
                    }
                    let id = faces.len() as u32;
                    let (mut lower, mut upper) = (Vec::new(), Vec::new());
                    let (mut leftmost, mut rightmost) = (None, None);
                    let mut h = start;
                    let mut size = 0;
                    loop {
                        half_face[self.index(h)] = id;
                        size += 1;
                        if h.fwd {
                            lower.push(h.line);
                        } else {
                            upper.push(h.line);
                        }
                        let (nh, at) = next(h);
                        if let Some(p) = at {
                            if !h.fwd && nh.fwd {
                                leftmost = Some(p);
                            } else if h.fwd && !nh.fwd {
                                rightmost = Some(p);
                            }
                        }
                        h = nh;
                        if h == start {
                            break;
                        }
                    }
                    let lines = &self.lines;
                    lower.sort_by(|&a, &b| lines[a].a.cmp(&lines[b].a));
                    upper.sort_by(|&a, &b| lines[b].a.cmp(&lines[a].a));
                    faces.push(FaceBoundary { lower, upper, leftmost, rightmost });
                    sizes.push(size);
                }
            }
        }
        if n == 0 {
            faces.push(FaceBoundary { lower: vec![], upper: vec![], leftmost: None, rightmost: None });
            sizes.push(0);
        }
        self.half_face = half_face;
        self.faces = faces;
        self.face_sizes = sizes;
    }

    /// Index of the face containing `p`, by shooting a vertical ray to the
    /// nearest line below (or above, if no line is below).
    pub fn locate(&self, p: &Point) -> Result<usize> {
        if self.lines.is_empty() {
            return Ok(0);
        }
        let mut below: Option<(usize, Scalar)> = None;
        let mut above: Option<(usize, Scalar)> = None;
        for (i, l) in self.lines.iter().enumerate() {
            let y = l.eval(&p.x);
            if y == p.y {
                return Err(Error::PointOnLine { point: 0, line: i });
            }
            if y < p.y {
                if below.as_ref().is_none_or(|(_, b)| y > *b) {
                    below = Some((i, y));
                }
            } else if above.as_ref().is_none_or(|(_, a)| y < *a) {
                above = Some((i, y));
            }
        }
        let (l, fwd) = match (below, above) {
            (Some((l, _)), _) => (l, true),
            (None, Some((l, _))) => (l, false),
            (None, None) => unreachable!(),
        };
        let c = &self.cross[l];
        let mut k = c.partition_point(|(x, _)| *x < p.x);
        if k < c.len() && c[k].0 == p.x {
            // p is straight above (below) a vertex: take the edge of `l`
            // on the side where `l` is the outer of the two lines
            let al = &self.lines[l].a;
            let aj = &self.lines[c[k].1].a;
            if (al > aj) == fwd {
                k += 1;
            }
        }
        Ok(self.half_face[self.index(Half { line: l, edge: k, fwd })] as usize)
    }

    /// The face containing `p`.
    pub fn face_of(&self, p: &Point) -> Result<&FaceBoundary> {
        Ok(&self.faces[self.locate(p)?])
    }

    pub fn stats(&self) -> OracleStats {
        OracleStats { k: self.vertex_count, face_sizes: self.face_sizes.clone(), zone_sizes: Vec::new() }
    }
}

/// Builds the arrangement of `lines`.
pub fn build_arrangement(lines: &[Line]) -> Result<Arrangement> {
    Arrangement::build(lines)
}

/// Distinct faces containing at least one of `points`, in order of first
/// appearance, with the indices of the faces per point.
pub fn many_faces_naive(lines: &[Line], points: &[Point]) -> Result<(Vec<FaceBoundary>, Vec<usize>)> {
    let arr = Arrangement::build(lines)?;
    let mut seen = vec![usize::MAX; arr.face_count()];
    let mut out = Vec::new();
    let mut which = Vec::with_capacity(points.len());
    for (j, p) in points.iter().enumerate() {
        let f = arr.locate(p).map_err(|e| match e {
            Error::PointOnLine { line, .. } => Error::PointOnLine { point: j, line },
            e => e,
        })?;
        if seen[f] == usize::MAX {
            seen[f] = out.len();
            out.push(arr.faces[f].clone());
        }
        which.push(seen[f]);
    }
    Ok((out, which))
}

/// The face containing `p` as an intersection of half-planes, clipped one
/// line at a time. Independent of [`Arrangement`]; `O(n * |face|)`.
pub fn face_direct(lines: &[Line], p: &Point) -> Result<FaceBoundary> {
    let (region, lower, upper) = face_region(lines, p)?;
    let _ = region;
    Ok(FaceBoundary::from_line_sets(lower, upper, lines))
}

/// The face containing `p` as a region, with the lines bounding it from
/// below and from above.
pub fn face_region(lines: &[Line], p: &Point) -> Result<(Region, Vec<usize>, Vec<usize>)> {
    let mut r = Region::plane();
    for (i, l) in lines.iter().enumerate() {
        let s = l.side_sign(p);
        if s == 0 {
            return Err(Error::PointOnLine { point: 0, line: i });
        }
        let cut = if s > 0 { l.as_cut() } else { l.as_cut().reversed() };
        r = r.clip(&cut, EdgeTag::Line(i)).expect("p stays inside");
    }
    let mut lower = BTreeSet::new();
    let mut upper = BTreeSet::new();
    for t in r.tags() {
        if let EdgeTag::Line(i) = *t {
            if lines[i].side_sign(p) > 0 {
                lower.insert(i);
            } else {
                upper.insert(i);
            }
        }
    }
    Ok((r, lower.into_iter().collect(), upper.into_iter().collect()))
}

/// Zone of a triangle: the portions `F ∩ t` of faces of the arrangement of
/// the lines crossing `t` that meet the boundary of `t`. Portions are
/// regions whose edges are tagged with the triangle's own tags or
/// `EdgeTag::Line`.
pub fn zone_of_triangle(lines: &[Line], t: &Region) -> Result<Vec<Region>> {
    let crossing: Vec<usize> = (0..lines.len()).filter(|&i| t.crossed_by_line(&lines[i])).collect();
    for &i in &crossing {
        if t.finite_vertices().any(|c| lines[i].side_sign(c) == 0) {
            return Err(Error::GeneralPosition(format!("line {i} passes through a corner")));
        }
    }
    // two lines meet on the boundary exactly when they leave it at a common
    // point
    let cuts: Vec<_> = (0..t.len()).filter_map(|e| t.edge_cut(e)).collect();
    let mut exits: HashMap<Point, usize> = HashMap::new();
    for &i in &crossing {
        let (a, d) = (lines[i].anchor(), lines[i].direction());
        for cut in &cuts {
            if let Some(v) = cut.hit(&a, &d).filter(|v| t.locate(v) == 0) {
                if let Some(j) = exits.insert(v, i).filter(|&j| j != i) {
                    return Err(Error::GeneralPosition(format!("lines {j} and {i} meet on the boundary")));
                }
            }
        }
    }
    // a piece bounded by input lines only is a face of the arrangement
    // inside the region; its subpieces never reach the boundary again
    let touches = |p: &Region| p.tags().iter().any(|t| !matches!(t, EdgeTag::Line(_)));
    let mut pieces = vec![t.clone()];
    for &i in &crossing {
        let cut = lines[i].as_cut();
        let mut next = Vec::with_capacity(pieces.len() + 4);
        for piece in pieces {
            if piece.crossed_by(&cut) {
                let (a, b) = piece.split(&cut, EdgeTag::Line(i));
                next.extend(a.into_iter().chain(b).filter(|p| touches(p)));
            } else {
                next.push(piece);
            }
        }
        pieces = next;
    }
    Ok(pieces)
}

/// Finite vertices of a region, for comparing portions.
pub fn region_points(r: &Region) -> Vec<Point> {
    r.vertices()
        .iter()
        .filter_map(|v| match v {
            GVertex::Finite(p) => Some(p.clone()),
            GVertex::Ideal(_) => None,
        })
        .collect()
}
