//! Explicit description of a convex face of a line arrangement.
//!
//! A face is the region strictly between the upper envelope of the lines
//! below it and the lower envelope of the lines above it. It is described by
//! the ids of the lines that contribute boundary edges, each list ordered left
//! to right, plus the leftmost and rightmost vertices when they exist.
//! Two faces of the same arrangement are equal iff their boundaries are.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::geom::{Line, Point, Scalar};

#[derive(Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct FaceBoundary {
    /// Lines bounding the face from below, left to right (increasing slope).
    pub lower: Vec<usize>,
    /// Lines bounding the face from above, left to right (decreasing slope).
    pub upper: Vec<usize>,
    pub leftmost: Option<Point>,
    pub rightmost: Option<Point>,
}

/// Canonical identity of a face: its leftmost vertex, or for faces unbounded
/// to the left the pair of lines that bound it as x goes to minus infinity.
#[derive(Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum FaceKey {
    Leftmost(Point),
    LeftOpen { lower: Option<usize>, upper: Option<usize> },
}

/// A boundary edge of a face in counterclockwise order: the supporting line
/// and the endpoints, `None` meaning the edge runs off to infinity.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FaceEdge {
    pub line: usize,
    pub from: Option<Point>,
    pub to: Option<Point>,
}

impl FaceBoundary {
    /// Builds the boundary from the sets of lines known to support lower and
    /// upper edges. Orders them and computes the extreme vertices.
    pub fn from_line_sets(mut lower: Vec<usize>, mut upper: Vec<usize>, lines: &[Line]) -> Self {
        lower.sort_by(|&a, &b| lines[a].a.cmp(&lines[b].a).then(a.cmp(&b)));
        upper.sort_by(|&a, &b| lines[b].a.cmp(&lines[a].a).then(a.cmp(&b)));
        lower.dedup();
        upper.dedup();
        let (leftmost, rightmost) = match (lower.first(), upper.first(), lower.last(), upper.last()) {
            (Some(&l0), Some(&u0), Some(&l1), Some(&u1)) => {
                let left = if lines[l0].a < lines[u0].a { lines[l0].intersection(&lines[u0]) } else { None };
                let right = if lines[l1].a > lines[u1].a { lines[l1].intersection(&lines[u1]) } else { None };
                (left, right)
            }
            _ => (None, None),
        };
        FaceBoundary { lower, upper, leftmost, rightmost }
    }

    pub fn key(&self) -> FaceKey {
        match &self.leftmost {
            Some(p) => FaceKey::Leftmost(p.clone()),
            None => FaceKey::LeftOpen { lower: self.lower.first().copied(), upper: self.upper.first().copied() },
        }
    }

    pub fn is_bounded(&self) -> bool {
        self.leftmost.is_some() && self.rightmost.is_some()
    }

    /// Number of edges.
    pub fn size(&self) -> usize {
        self.lower.len() + self.upper.len()
    }

    /// Edges in counterclockwise order: lower boundary left to right, then
    /// upper boundary right to left.
    pub fn edges(&self, lines: &[Line]) -> Vec<FaceEdge> {
        let mut out = Vec::with_capacity(self.size());
        let lower_pts = chain_vertices(&self.lower, lines);
        for (i, &l) in self.lower.iter().enumerate() {
            let from = if i == 0 { self.leftmost.clone() } else { Some(lower_pts[i - 1].clone()) };
            let to = if i + 1 == self.lower.len() { self.rightmost.clone() } else { Some(lower_pts[i].clone()) };
            out.push(FaceEdge { line: l, from, to });
        }
        let upper_pts = chain_vertices(&self.upper, lines);
        for i in (0..self.upper.len()).rev() {
            let from = if i + 1 == self.upper.len() { self.rightmost.clone() } else { Some(upper_pts[i].clone()) };
            let to = if i == 0 { self.leftmost.clone() } else { Some(upper_pts[i - 1].clone()) };
            out.push(FaceEdge { line: self.upper[i], from, to });
        }
        out
    }

    /// Finite vertices in counterclockwise order starting from the leftmost
    /// vertex (or the first lower vertex for faces open to the left).
    pub fn vertex_cycle(&self, lines: &[Line]) -> Vec<Point> {
        let mut out = Vec::new();
        if let Some(p) = &self.leftmost {
            out.push(p.clone());
        }
        out.extend(chain_vertices(&self.lower, lines));
        if let Some(p) = &self.rightmost {
            out.push(p.clone());
        }
        let mut up = chain_vertices(&self.upper, lines);
        up.reverse();
        out.extend(up);
        out
    }

    /// Whether `p` lies strictly inside the face.
    pub fn contains(&self, p: &Point, lines: &[Line]) -> bool {
        self.lower.iter().all(|&l| lines[l].side_sign(p) > 0)
            && self.upper.iter().all(|&l| lines[l].side_sign(p) < 0)
            && self.x_range_contains(&p.x)
    }

    fn x_range_contains(&self, x: &Scalar) -> bool {
        self.leftmost.as_ref().is_none_or(|l| l.x < *x) && self.rightmost.as_ref().is_none_or(|r| *x < r.x)
    }

    pub fn to_json(&self, lines: &[Line]) -> FaceJson {
        FaceJson {
            lower: self.lower.clone(),
            upper: self.upper.clone(),
            bounded: self.is_bounded(),
            vertices: self.vertex_cycle(lines).iter().map(|p| [p.x.to_string(), p.y.to_string()]).collect(),
        }
    }
}

/// Vertices between consecutive lines of a boundary chain.
fn chain_vertices(ids: &[usize], lines: &[Line]) -> Vec<Point> {
    ids.windows(2).map(|w| lines[w[0]].intersection(&lines[w[1]]).expect("consecutive boundary lines cross")).collect()
}

impl fmt::Display for FaceBoundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "face(lower {:?}, upper {:?}", self.lower, self.upper)?;
        if let Some(p) = &self.leftmost {
            write!(f, ", left {p}")?;
        }
        if let Some(p) = &self.rightmost {
            write!(f, ", right {p}")?;
        }
        write!(f, ")")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaceJson {
    pub lower: Vec<usize>,
    pub upper: Vec<usize>,
    pub bounded: bool,
    pub vertices: Vec<[String; 2]>,
}

/// Orders faces by key; used to compare face sets deterministically.
pub fn sort_faces(faces: &mut [FaceBoundary]) {
    faces.sort_by(|a, b| a.key().cmp(&b.key()).then_with(|| a.cmp(b)));
}

/// First pair of differing faces between two face sets, for diagnostics.
pub fn first_mismatch(a: &[FaceBoundary], b: &[FaceBoundary]) -> Option<(Option<FaceBoundary>, Option<FaceBoundary>)> {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    sort_faces(&mut a);
    sort_faces(&mut b);
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        match (a.get(i), b.get(j)) {
            (Some(x), Some(y)) if x == y => {
                i += 1;
                j += 1;
            }
            (Some(x), Some(y)) => {
                return Some(match x.key().cmp(&y.key()) {
                    Ordering::Less => (Some(x.clone()), None),
                    Ordering::Greater => (None, Some(y.clone())),
                    Ordering::Equal => (Some(x.clone()), Some(y.clone())),
                })
            }
            (Some(x), None) => return Some((Some(x.clone()), None)),
            (None, Some(y)) => return Some((None, Some(y.clone()))),
            (None, None) => break,
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_face_from_sets() {
        // y=0 below, y=x and y=-x+2 above; the face around (1, 1/2)
        let lines = vec![Line::int(0, 0), Line::int(1, 0), Line::int(-1, 2)];
        let f = FaceBoundary::from_line_sets(vec![0], vec![2, 1], &lines);
        assert_eq!(f.upper, vec![1, 2]);
        assert_eq!(f.leftmost, Some(Point::int(0, 0)));
        assert_eq!(f.rightmost, Some(Point::int(2, 0)));
        assert_eq!(f.vertex_cycle(&lines), vec![Point::int(0, 0), Point::int(2, 0), Point::int(1, 1)]);
        assert!(f.contains(&Point::new(Scalar::one(), Scalar::ratio(1, 2)), &lines));
        assert_eq!(f.edges(&lines).len(), 3);
        assert_eq!(f.key(), FaceKey::Leftmost(Point::int(0, 0)));
    }

    #[test]
    fn strip_face_is_open() {
        let lines = vec![Line::int(0, 1), Line::int(0, -1)];
        let f = FaceBoundary::from_line_sets(vec![1], vec![0], &lines);
        assert!(f.leftmost.is_none() && f.rightmost.is_none());
        assert_eq!(f.key(), FaceKey::LeftOpen { lower: Some(1), upper: Some(0) });
        let e = f.edges(&lines);
        assert!(e.iter().all(|e| e.from.is_none() && e.to.is_none()));
    }
}
