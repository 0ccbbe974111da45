//! Fully persistent balanced search trees over convex chains.
//!
//! Chains are treaps keyed by x with path copying: every split or join
//! allocates new nodes along the touched paths only and never mutates an
//! existing node, so any handle ever issued keeps describing the same
//! sequence. Priorities are derived from a hash of the vertex, which makes the
//! tree shape a function of the vertex set alone.
//!
//! Each node caches its subtree size, first and last vertex (giving the x
//! range and O(1) neighbor lookups during descents), and a polynomial digest
//! of the subtree's vertex sequence.

use std::cmp::Ordering;
use std::collections::hash_map::DefaultHasher;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geom::{orient_sign, Point, Scalar};

/// A chain vertex: a point with the id of the object it stands for (a line
/// index for dual points). `NO_ID` marks anonymous points.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Vertex {
    pub pt: Point,
    pub id: usize,
}

pub const NO_ID: usize = usize::MAX;

impl Vertex {
    pub fn new(pt: Point, id: usize) -> Self {
        Vertex { pt, id }
    }

    pub fn anon(pt: Point) -> Self {
        Vertex { pt, id: NO_ID }
    }

    pub fn x(&self) -> &Scalar {
        &self.pt.x
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.id == NO_ID {
            write!(f, "{}", self.pt)
        } else {
            write!(f, "{}#{}", self.pt, self.id)
        }
    }
}

/// Which half hull a chain is: lower chains turn left (counterclockwise)
/// walking left to right, upper chains turn right.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
pub enum ChainSide {
    Lower,
    Upper,
}

impl ChainSide {
    /// `+1` for lower, `-1` for upper. Multiplying an orientation sign by
    /// this turns upper-chain questions into lower-chain ones.
    pub fn sign(self) -> i32 {
        match self {
            ChainSide::Lower => 1,
            ChainSide::Upper => -1,
        }
    }

    pub fn flip(self) -> ChainSide {
        match self {
            ChainSide::Lower => ChainSide::Upper,
            ChainSide::Upper => ChainSide::Lower,
        }
    }
}

const MOD: u64 = (1 << 61) - 1;
const BASE: u64 = 0x1f3d_5b79_a4c2_e1d7 % MOD;

fn mulmod(a: u64, b: u64) -> u64 {
    ((a as u128 * b as u128) % MOD as u128) as u64
}

fn vertex_hash(v: &Vertex, salt: u64) -> u64 {
    let mut h = DefaultHasher::new();
    salt.hash(&mut h);
    v.hash(&mut h);
    h.finish()
}

struct Node {
    v: Arc<Vertex>,
    prio: u64,
    left: Link,
    right: Link,
    count: usize,
    height: u32,
    first: Arc<Vertex>,
    last: Arc<Vertex>,
    digest: u64,
    pow: u64,
}

type Link = Option<Arc<Node>>;

fn count(l: &Link) -> usize {
    l.as_ref().map_or(0, |n| n.count)
}

fn height(l: &Link) -> u32 {
    l.as_ref().map_or(0, |n| n.height)
}

fn digest(l: &Link) -> u64 {
    l.as_ref().map_or(0, |n| n.digest)
}

fn pow(l: &Link) -> u64 {
    l.as_ref().map_or(1, |n| n.pow)
}

fn make(v: Arc<Vertex>, prio: u64, left: Link, right: Link) -> Arc<Node> {
    let hv = vertex_hash(&v, 1) % MOD;
    let first = left.as_ref().map_or_else(|| v.clone(), |n| n.first.clone());
    let last = right.as_ref().map_or_else(|| v.clone(), |n| n.last.clone());
    let lp = pow(&left);
    let d = (digest(&left) + mulmod(hv, lp) + mulmod(digest(&right), mulmod(lp, BASE))) % MOD;
    let p = mulmod(mulmod(lp, BASE), pow(&right));
    Arc::new(Node {
        count: count(&left) + count(&right) + 1,
        height: height(&left).max(height(&right)) + 1,
        v,
        prio,
        left,
        right,
        first,
        last,
        digest: d,
        pow: p,
    })
}

/// Splits into (vertices going left, the rest); `go_left` must be monotone
/// (true on a prefix).
fn split_by(t: &Link, go_left: &dyn Fn(&Vertex) -> bool) -> (Link, Link) {
    match t {
        None => (None, None),
        Some(n) => {
            if go_left(&n.v) {
                let (a, b) = split_by(&n.right, go_left);
                (Some(make(n.v.clone(), n.prio, n.left.clone(), a)), b)
            } else {
                let (a, b) = split_by(&n.left, go_left);
                (a, Some(make(n.v.clone(), n.prio, b, n.right.clone())))
            }
        }
    }
}

fn join_links(a: &Link, b: &Link) -> Link {
    match (a, b) {
        (None, _) => b.clone(),
        (_, None) => a.clone(),
        (Some(x), Some(y)) => {
            if x.prio >= y.prio {
                Some(make(x.v.clone(), x.prio, x.left.clone(), join_links(&x.right, b)))
            } else {
                Some(make(y.v.clone(), y.prio, join_links(a, &y.left), y.right.clone()))
            }
        }
    }
}

/// Answer of a search oracle at a probed vertex.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Probe {
    /// The target is strictly left of the probed vertex.
    Left,
    /// The target is strictly right of the probed vertex.
    Right,
    Found,
}

/// Immutable handle to a persistent chain.
#[derive(Clone)]
pub struct ChainHandle {
    root: Link,
    side: ChainSide,
}

impl fmt::Debug for ChainHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Chain{:?}[", self.side)?;
        for (i, v) in self.to_vec().iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "]")
    }
}

impl PartialEq for ChainHandle {
    fn eq(&self, o: &Self) -> bool {
        self.side == o.side && self.len() == o.len() && self.to_vec() == o.to_vec()
    }
}

impl Eq for ChainHandle {}

fn check_turns(vs: &[&Vertex], side: ChainSide) -> Result<()> {
    for w in vs.windows(2) {
        if w[0].pt.x >= w[1].pt.x {
            return Err(Error::NotSorted);
        }
    }
    for w in vs.windows(3) {
        if orient_sign(&w[0].pt, &w[1].pt, &w[2].pt) * side.sign() <= 0 {
            return Err(Error::NotConvex);
        }
    }
    Ok(())
}

impl ChainHandle {
    pub fn empty(side: ChainSide) -> Self {
        ChainHandle { root: None, side }
    }

    /// Builds a chain over x-sorted vertices that turn the right way for
    /// `side`. Linear time.
    pub fn build_from_sorted(vertices: Vec<Vertex>, side: ChainSide) -> Result<Self> {
        {
            let refs: Vec<&Vertex> = vertices.iter().collect();
            check_turns(&refs, side)?;
        }
        Ok(Self::build_unchecked(vertices, side))
    }

    /// Same as [`build_from_sorted`](Self::build_from_sorted) without the
    /// order and convexity checks.
    pub fn build_unchecked(vertices: Vec<Vertex>, side: ChainSide) -> Self {
        // Cartesian-tree construction on a stack of the right spine.
        let items: Vec<(Arc<Vertex>, u64)> = vertices
            .into_iter()
            .map(|v| {
                let p = vertex_hash(&v, 0);
                (Arc::new(v), p)
            })
            .collect();
        if items.is_empty() {
            return ChainHandle::empty(side);
        }
        // Indices into `items` forming the right spine, with child pointers.
        let n = items.len();
        let mut left: Vec<Option<usize>> = vec![None; n];
        let mut right: Vec<Option<usize>> = vec![None; n];
        let mut stack: Vec<usize> = Vec::new();
        for i in 0..n {
            let mut last = None;
            while let Some(&top) = stack.last() {
                if items[top].1 < items[i].1 {
                    last = stack.pop();
                } else {
                    break;
                }
            }
            left[i] = last;
            if let Some(&top) = stack.last() {
                right[top] = Some(i);
            }
            stack.push(i);
        }
        let root = stack[0];
        // Post-order assembly without recursion depth issues.
        let mut built: Vec<Link> = vec![None; n];
        let mut order = Vec::with_capacity(n);
        let mut st = vec![(root, false)];
        while let Some((i, done)) = st.pop() {
            if done {
                order.push(i);
            } else {
                st.push((i, true));
                if let Some(r) = right[i] {
                    st.push((r, false));
                }
                if let Some(l) = left[i] {
                    st.push((l, false));
                }
            }
        }
        for i in order {
            let l = left[i].and_then(|c| built[c].take());
            let r = right[i].and_then(|c| built[c].take());
            built[i] = Some(make(items[i].0.clone(), items[i].1, l, r));
        }
        ChainHandle { root: built[root].take(), side }
    }

    pub fn side(&self) -> ChainSide {
        self.side
    }

    pub fn len(&self) -> usize {
        count(&self.root)
    }

    pub fn is_empty(&self) -> bool {
        self.root.is_none()
    }

    pub fn height(&self) -> u32 {
        height(&self.root)
    }

    pub fn first(&self) -> Option<&Vertex> {
        self.root.as_ref().map(|n| &*n.first)
    }

    pub fn last(&self) -> Option<&Vertex> {
        self.root.as_ref().map(|n| &*n.last)
    }

    /// Digest of the vertex sequence (and chain side).
    pub fn fingerprint(&self) -> u64 {
        digest(&self.root) ^ (self.len() as u64).rotate_left(32) ^ (self.side.sign() as u64)
    }

    pub fn with_side(&self, side: ChainSide) -> ChainHandle {
        ChainHandle { root: self.root.clone(), side }
    }

    pub fn to_vec(&self) -> Vec<Vertex> {
        let mut out = Vec::with_capacity(self.len());
        let mut stack: Vec<&Arc<Node>> = Vec::new();
        let mut cur = self.root.as_ref();
        while cur.is_some() || !stack.is_empty() {
            while let Some(n) = cur {
                stack.push(n);
                cur = n.left.as_ref();
            }
            let n = stack.pop().unwrap();
            out.push((*n.v).clone());
            cur = n.right.as_ref();
        }
        out
    }

    pub fn points(&self) -> Vec<Point> {
        self.to_vec().into_iter().map(|v| v.pt).collect()
    }

    pub fn get(&self, mut i: usize) -> Option<&Vertex> {
        let mut cur = self.root.as_ref()?;
        loop {
            let lc = count(&cur.left);
            match i.cmp(&lc) {
                Ordering::Less => cur = cur.left.as_ref()?,
                Ordering::Equal => return Some(&cur.v),
                Ordering::Greater => {
                    i -= lc + 1;
                    cur = cur.right.as_ref()?;
                }
            }
        }
    }

    /// Left part holds vertices with `x <= at`, right part the rest.
    pub fn split_at_x(&self, at: &Scalar) -> (ChainHandle, ChainHandle) {
        let (a, b) = split_by(&self.root, &|v: &Vertex| v.pt.x <= *at);
        (ChainHandle { root: a, side: self.side }, ChainHandle { root: b, side: self.side })
    }

    /// Left part holds vertices with `x < at`, right part the rest.
    pub fn split_before_x(&self, at: &Scalar) -> (ChainHandle, ChainHandle) {
        let (a, b) = split_by(&self.root, &|v: &Vertex| v.pt.x < *at);
        (ChainHandle { root: a, side: self.side }, ChainHandle { root: b, side: self.side })
    }

    /// First `k` vertices and the rest.
    pub fn split_at_index(&self, k: usize) -> (ChainHandle, ChainHandle) {
        fn go(t: &Link, k: usize) -> (Link, Link) {
            match t {
                None => (None, None),
                Some(n) => {
                    let lc = count(&n.left);
                    if k <= lc {
                        let (a, b) = go(&n.left, k);
                        (a, Some(make(n.v.clone(), n.prio, b, n.right.clone())))
                    } else {
                        let (a, b) = go(&n.right, k - lc - 1);
                        (Some(make(n.v.clone(), n.prio, n.left.clone(), a)), b)
                    }
                }
            }
        }
        let (a, b) = go(&self.root, k);
        (ChainHandle { root: a, side: self.side }, ChainHandle { root: b, side: self.side })
    }

    /// Vertices with index in `lo..=hi`.
    pub fn slice(&self, lo: usize, hi: usize) -> ChainHandle {
        let (_, rest) = self.split_at_index(lo);
        rest.split_at_index(hi + 1 - lo).0
    }

    /// Concatenation; every vertex of `left` must lie strictly left of every
    /// vertex of `right` and the junction must keep the chain convex.
    pub fn join(left: &ChainHandle, right: &ChainHandle) -> Result<ChainHandle> {
        if left.is_empty() {
            return Ok(right.clone());
        }
        if right.is_empty() {
            return Ok(left.clone());
        }
        let side = left.side;
        let (l, r) = (left.last().unwrap(), right.first().unwrap());
        if l.pt.x >= r.pt.x {
            return Err(Error::XOverlap);
        }
        let mut junction: Vec<&Vertex> = Vec::with_capacity(4);
        if left.len() >= 2 {
            junction.push(left.get(left.len() - 2).unwrap());
        }
        junction.push(l);
        junction.push(r);
        if right.len() >= 2 {
            junction.push(right.get(1).unwrap());
        }
        check_turns(&junction, side)?;
        Ok(ChainHandle { root: join_links(&left.root, &right.root), side })
    }

    /// Concatenation without the convexity check (x order is still
    /// required).
    pub fn concat(left: &ChainHandle, right: &ChainHandle) -> Result<ChainHandle> {
        if let (Some(l), Some(r)) = (left.last(), right.first()) {
            if l.pt.x >= r.pt.x {
                return Err(Error::XOverlap);
            }
        }
        Ok(ChainHandle { root: join_links(&left.root, &right.root), side: left.side })
    }

    /// Binary search driven by `oracle(prev, vertex, next)`. Returns the
    /// index and vertex at which the oracle answers [`Probe::Found`].
    pub fn search<F>(&self, mut oracle: F) -> Result<(usize, Vertex)>
    where
        F: FnMut(Option<&Vertex>, &Vertex, Option<&Vertex>) -> Probe,
    {
        let mut cur = self.root.as_ref();
        let mut lo: Option<&Vertex> = None;
        let mut hi: Option<&Vertex> = None;
        let mut offset = 0usize;
        while let Some(n) = cur {
            let prev = n.left.as_ref().map(|c| &*c.last).or(lo);
            let next = n.right.as_ref().map(|c| &*c.first).or(hi);
            match oracle(prev, &n.v, next) {
                Probe::Found => return Ok((offset + count(&n.left), (*n.v).clone())),
                Probe::Left => {
                    hi = Some(&n.v);
                    cur = n.left.as_ref();
                }
                Probe::Right => {
                    offset += count(&n.left) + 1;
                    lo = Some(&n.v);
                    cur = n.right.as_ref();
                }
            }
        }
        Err(Error::NotFound)
    }

    /// Number of leading vertices satisfying a monotone predicate (true on a
    /// prefix, false afterwards).
    pub fn partition_point<F>(&self, mut pred: F) -> usize
    where
        F: FnMut(&Vertex) -> bool,
    {
        let mut cur = self.root.as_ref();
        let mut offset = 0;
        while let Some(n) = cur {
            if pred(&n.v) {
                offset += count(&n.left) + 1;
                cur = n.right.as_ref();
            } else {
                cur = n.left.as_ref();
            }
        }
        offset
    }

    /// Index of the edge-monotone extreme: the first index `i` such that
    /// `pred(v[i], v[i+1])` is false, where `pred` is true on a prefix of the
    /// consecutive pairs. Returns `len - 1` when it holds everywhere.
    pub fn first_failing_edge<F>(&self, mut pred: F) -> usize
    where
        F: FnMut(&Vertex, &Vertex) -> bool,
    {
        let n = self.len();
        if n <= 1 {
            return 0;
        }
        // search over vertices: Found when the outgoing edge fails and the
        // incoming edge holds.
        let res = self.search(|prev, v, next| {
            let out_ok = next.is_some_and(|nx| pred(v, nx));
            if out_ok {
                return Probe::Right;
            }
            match prev {
                Some(pv) if !pred(pv, v) => Probe::Left,
                _ => Probe::Found,
            }
        });
        res.map(|(i, _)| i).unwrap_or(n - 1)
    }

    /// Checks strict x order and strict convexity of the whole sequence.
    pub fn validate(&self) -> Result<()> {
        let vs = self.to_vec();
        let refs: Vec<&Vertex> = vs.iter().collect();
        check_turns(&refs, self.side)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::orientation;
    use proptest::prelude::*;

    fn v(x: i64, y: i64) -> Vertex {
        Vertex::anon(Point::int(x, y))
    }

    fn lower(pts: &[(i64, i64)]) -> Result<ChainHandle> {
        ChainHandle::build_from_sorted(pts.iter().map(|&(x, y)| v(x, y)).collect(), ChainSide::Lower)
    }

    #[test]
    fn build_examples() {
        let h = lower(&[(0, 0), (1, -1), (2, 0)]).unwrap();
        assert_eq!(h.len(), 3);
        assert_eq!(h.first(), Some(&v(0, 0)));
        assert_eq!(h.last(), Some(&v(2, 0)));
        assert!(lower(&[]).unwrap().is_empty());
        assert_eq!(lower(&[(0, 0), (1, 1), (2, 0)]).unwrap_err(), Error::NotConvex);
        assert_eq!(lower(&[(1, 0), (0, 1)]).unwrap_err(), Error::NotSorted);
    }

    #[test]
    fn split_examples() {
        let h = lower(&[(0, 0), (2, -1), (4, 0)]).unwrap();
        let fp = h.fingerprint();
        let (a, b) = h.split_at_x(&Scalar::from_int(2));
        assert_eq!(a.to_vec(), vec![v(0, 0), v(2, -1)]);
        assert_eq!(b.to_vec(), vec![v(4, 0)]);
        let (a, b) = h.split_at_x(&Scalar::from_int(-1_000_000));
        assert!(a.is_empty());
        assert_eq!(b, h);
        let single = lower(&[(0, 0)]).unwrap();
        let (a, b) = single.split_at_x(&Scalar::zero());
        assert_eq!(a.len(), 1);
        assert!(b.is_empty());
        assert_eq!(h.fingerprint(), fp);
        assert_eq!(h.len(), 3);
    }

    #[test]
    fn join_examples() {
        let a = lower(&[(0, 0), (1, -1)]).unwrap();
        let b = lower(&[(3, 0)]).unwrap();
        assert_eq!(ChainHandle::join(&a, &b).unwrap().len(), 3);
        let e = ChainHandle::empty(ChainSide::Lower);
        assert_eq!(ChainHandle::join(&e, &b).unwrap(), b);
        let c = lower(&[(0, 0), (2, 0)]).unwrap();
        let d = lower(&[(1, 5)]).unwrap();
        assert_eq!(ChainHandle::join(&c, &d).unwrap_err(), Error::XOverlap);
        let f = lower(&[(3, -5)]).unwrap();
        assert_eq!(ChainHandle::join(&a, &f).unwrap_err(), Error::NotConvex);
    }

    #[test]
    fn search_examples() {
        let h = lower(&[(0, 2), (1, 0), (2, 3)]).unwrap();
        let (_, m) = h
            .search(|prev, cur, next| {
                if prev.is_some_and(|p| p.pt.y < cur.pt.y) {
                    Probe::Left
                } else if next.is_some_and(|n| n.pt.y < cur.pt.y) {
                    Probe::Right
                } else {
                    Probe::Found
                }
            })
            .unwrap();
        assert_eq!(m, v(1, 0));
        let one = lower(&[(5, 5)]).unwrap();
        let (_, m) = one
            .search(|prev, cur, next| {
                if prev.is_some_and(|p| p.pt.y < cur.pt.y) {
                    Probe::Left
                } else if next.is_some_and(|n| n.pt.y < cur.pt.y) {
                    Probe::Right
                } else {
                    Probe::Found
                }
            })
            .unwrap();
        assert_eq!(m, v(5, 5));
        assert_eq!(h.search(|_, _, _| Probe::Left).unwrap_err(), Error::NotFound);
    }

    /// Tangent from an external point left of and below a lower chain.
    #[test]
    fn tangent_search_matches_brute_force() {
        let h = lower(&[(0, 0), (2, -1), (4, 0)]).unwrap();
        let q = Point::int(-1, -5);
        let (_, t) = h
            .search(|prev, cur, next| {
                // supporting line q-cur has every vertex on or left of it
                if next.is_some_and(|n| orientation(&q, &cur.pt, &n.pt).sign() < 0) {
                    Probe::Right
                } else if prev.is_some_and(|p| orientation(&q, &cur.pt, &p.pt).sign() < 0) {
                    Probe::Left
                } else {
                    Probe::Found
                }
            })
            .unwrap();
        // brute force: the vertex with every other vertex on one side
        let brute: Vec<Vertex> = h
            .to_vec()
            .into_iter()
            .filter(|c| h.to_vec().iter().all(|o| orientation(&q, &c.pt, &o.pt).sign() >= 0))
            .collect();
        assert_eq!(brute, vec![t.clone()]);
        // slopes from q are 5, 4/3 and 1; only (4,0) keeps all vertices above
        assert_eq!(t, v(4, 0));
    }

    #[test]
    fn fingerprint_examples() {
        let h = lower(&[(0, 0), (1, -2), (3, -3), (6, -1), (8, 4)]).unwrap();
        let (a, b) = h.split_at_x(&Scalar::from_int(3));
        let rejoined = ChainHandle::join(&a, &b).unwrap();
        assert_eq!(rejoined.fingerprint(), h.fingerprint());
        let (c, d) = h.split_at_x(&Scalar::from_int(1));
        let other = ChainHandle::join(&c, &d).unwrap();
        assert_eq!(other.fingerprint(), rejoined.fingerprint());
        let changed = lower(&[(0, 0), (1, -2), (3, -4), (6, -1), (8, 4)]).unwrap();
        assert_ne!(changed.fingerprint(), h.fingerprint());
    }

    fn parabola(xs: &[i64]) -> Vec<Vertex> {
        xs.iter().map(|&x| v(x, x * x)).collect()
    }

    proptest! {
        #[test]
        fn split_join_persistence(mut xs in proptest::collection::btree_set(-500i64..500, 0..120), cuts in proptest::collection::vec(-520i64..520, 1..8)) {
            let xs: Vec<i64> = std::mem::take(&mut xs).into_iter().collect();
            let h = ChainHandle::build_from_sorted(parabola(&xs), ChainSide::Lower).unwrap();
            let fp = h.fingerprint();
            let original = h.to_vec();
            let bound = 4.0 * ((h.len() + 2) as f64).log2() + 4.0;
            prop_assert!((h.height() as f64) <= bound);
            for c in cuts {
                let (a, b) = h.split_at_x(&Scalar::from_int(c));
                prop_assert!(a.validate().is_ok() && b.validate().is_ok());
                prop_assert!(a.to_vec().iter().all(|w| w.pt.x <= Scalar::from_int(c)));
                prop_assert!(b.to_vec().iter().all(|w| w.pt.x > Scalar::from_int(c)));
                let j = ChainHandle::join(&a, &b).unwrap();
                prop_assert_eq!(j.to_vec(), original.clone());
                prop_assert_eq!(j.fingerprint(), fp);
                prop_assert!((a.height() as f64) <= 4.0 * ((a.len() + 2) as f64).log2() + 4.0);
            }
            prop_assert_eq!(h.fingerprint(), fp);
            prop_assert_eq!(h.to_vec(), original);
        }

        #[test]
        fn partition_point_agrees(xs in proptest::collection::btree_set(-200i64..200, 0..60), t in -210i64..210) {
            let xs: Vec<i64> = xs.into_iter().collect();
            let h = ChainHandle::build_from_sorted(parabola(&xs), ChainSide::Lower).unwrap();
            let k = h.partition_point(|w| w.pt.x < Scalar::from_int(t));
            prop_assert_eq!(k, xs.iter().filter(|&&x| x < t).count());
            for (i, x) in xs.iter().enumerate() {
                prop_assert_eq!(h.get(i).unwrap().pt.x.clone(), Scalar::from_int(*x));
            }
        }
    }
}
