//! Exact planar primitives: rational scalars, points, non-vertical lines,
//! the point-line duality, and the orientation predicate everything else is
//! built on.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact rational number. Always stored in lowest terms with a positive
/// denominator, together with a nearby `f64` used to decide predicates
/// quickly when the sign is clear.
#[derive(Clone, Default)]
pub struct Scalar {
    q: BigRational,
    /// Approximation with relative error below `APPROX_EPS`, or NaN when none
    /// is available (overflow, underflow).
    f: f64,
}

/// Relative error of stored approximations, generously rounded up.
const APPROX_EPS: f64 = 1.0 / (1u64 << 50) as f64;
/// Factor applied to error bounds of the floating-point filters.
const FILTER_EPS: f64 = 16.0 * APPROX_EPS;

fn approx(q: &BigRational) -> f64 {
    if q.is_zero() {
        return 0.0;
    }
    match q.to_f64() {
        Some(f) if f.is_normal() => f,
        _ => f64::NAN,
    }
}

/// Sign of an approximate value `v` whose absolute error is at most `err`,
/// when it is certain.
fn certain_sign(v: f64, err: f64) -> Option<i32> {
    if !err.is_finite() || !v.is_finite() {
        None
    } else if v > err {
        Some(1)
    } else if v < -err {
        Some(-1)
    } else {
        None
    }
}

/// Unreduced fraction with a positive denominator. Exact predicate fallbacks
/// use it to skip the gcd normalization of every intermediate result.
struct Frac {
    n: BigInt,
    d: BigInt,
}

impl Frac {
    fn of(s: &Scalar) -> Frac {
        Frac { n: s.q.numer().clone(), d: s.q.denom().clone() }
    }

    fn diff(a: &Scalar, b: &Scalar) -> Frac {
        let (an, ad, bn, bd) = (a.q.numer(), a.q.denom(), b.q.numer(), b.q.denom());
        if ad == bd {
            Frac { n: an - bn, d: ad.clone() }
        } else {
            Frac { n: an * bd - bn * ad, d: ad * bd }
        }
    }

    fn mul(&self, o: &Frac) -> Frac {
        Frac { n: &self.n * &o.n, d: &self.d * &o.d }
    }

    fn sub(&self, o: &Frac) -> Frac {
        Frac { n: &self.n * &o.d - &o.n * &self.d, d: &self.d * &o.d }
    }

    /// `self / o` for nonzero `o`.
    fn div(&self, o: &Frac) -> Frac {
        let (n, d) = (&self.n * &o.d, &self.d * &o.n);
        if d.is_negative() {
            Frac { n: -n, d: -d }
        } else {
            Frac { n, d }
        }
    }

    fn is_zero(&self) -> bool {
        self.n.is_zero()
    }

    fn cmp(&self, o: &Frac) -> Ordering {
        (&self.n * &o.d).cmp(&(&o.n * &self.d))
    }

    fn into_scalar(self) -> Scalar {
        Scalar::wrap(BigRational::new(self.n, self.d))
    }
}

/// Exact sign of `ux * vy - uy * vx`.
fn cross_sign_exact(ux: &Frac, uy: &Frac, vx: &Frac, vy: &Frac) -> i32 {
    match ux.mul(vy).cmp(&uy.mul(vx)) {
        Ordering::Greater => 1,
        Ordering::Less => -1,
        Ordering::Equal => 0,
    }
}

impl Scalar {
    fn wrap(q: BigRational) -> Self {
        let f = approx(&q);
        Scalar { q, f }
    }

    pub fn zero() -> Self {
        Scalar::wrap(BigRational::zero())
    }

    pub fn one() -> Self {
        Scalar::wrap(BigRational::one())
    }

    pub fn from_int(v: i64) -> Self {
        Scalar::wrap(BigRational::from_integer(BigInt::from(v)))
    }

    /// `num / den`; panics on a zero denominator.
    pub fn ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Scalar::wrap(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn from_big(num: BigInt, den: BigInt) -> Self {
        Scalar::wrap(BigRational::new(num, den))
    }

    pub fn numer(&self) -> &BigInt {
        self.q.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.q.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.q.is_zero()
    }

    pub fn signum(&self) -> i32 {
        if self.q.is_positive() {
            1
        } else if self.q.is_negative() {
            -1
        } else {
            0
        }
    }

    pub fn abs(&self) -> Scalar {
        Scalar { q: self.q.abs(), f: self.f.abs() }
    }

    /// Nearest `f64` (NaN when out of range).
    pub fn to_f64(&self) -> f64 {
        if self.f.is_nan() {
            self.q.to_f64().unwrap_or(f64::NAN)
        } else {
            self.f
        }
    }

    /// Cached approximation, NaN when unavailable.
    pub fn approx(&self) -> f64 {
        self.f
    }

    pub fn floor(&self) -> Scalar {
        Scalar::wrap(self.q.floor())
    }

    /// Midpoint of two scalars.
    pub fn mid(a: &Scalar, b: &Scalar) -> Scalar {
        (a + b) / &Scalar::from_int(2)
    }
}

impl PartialEq for Scalar {
    fn eq(&self, o: &Scalar) -> bool {
        self.q == o.q
    }
}

impl Eq for Scalar {}

impl std::hash::Hash for Scalar {
    // lowest terms make the pair canonical; `BigRational`'s own hash
    // normalizes again at a high cost
    fn hash<H: std::hash::Hasher>(&self, h: &mut H) {
        self.q.numer().hash(h);
        self.q.denom().hash(h);
    }
}

impl Ord for Scalar {
    fn cmp(&self, o: &Scalar) -> Ordering {
        let err = FILTER_EPS * (self.f.abs() + o.f.abs());
        match certain_sign(self.f - o.f, err) {
            Some(1) => Ordering::Greater,
            Some(_) => Ordering::Less,
            None => self.q.cmp(&o.q),
        }
    }
}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, o: &Scalar) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.q.denom().is_one() {
            write!(f, "{}", self.q.numer())
        } else {
            write!(f, "{}/{}", self.q.numer(), self.q.denom())
        }
    }
}

impl FromStr for Scalar {
    type Err = Error;

    /// Accepts integers, decimals (`-1.25`, `3e-2` is not supported) and
    /// fractions `num/den`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Parse(format!("invalid number `{s}`"));
        if let Some((n, d)) = s.split_once('/') {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            return Ok(Scalar::wrap(BigRational::new(n, d)));
        }
        if let Some((int, frac)) = s.split_once('.') {
            let neg = int.starts_with('-');
            let int_digits = int.trim_start_matches(['-', '+']);
            if frac.is_empty() && int_digits.is_empty() {
                return Err(bad());
            }
            if !frac.chars().all(|c| c.is_ascii_digit()) || !int_digits.chars().all(|c| c.is_ascii_digit()) {
                return Err(bad());
            }
            let digits = format!("{int_digits}{frac}");
            let digits = if digits.is_empty() { "0".to_string() } else { digits };
            let mut n: BigInt = digits.parse().map_err(|_| bad())?;
            if neg {
                n = -n;
            }
            let d = num_traits::pow(BigInt::from(10), frac.len());
            return Ok(Scalar::wrap(BigRational::new(n, d)));
        }
        let n: BigInt = s.parse().map_err(|_| bad())?;
        Ok(Scalar::wrap(BigRational::from_integer(n)))
    }
}

macro_rules! scalar_binop {
    ($tr:ident, $m:ident) => {
        impl $tr<&Scalar> for &Scalar {
            type Output = Scalar;
            fn $m(self, rhs: &Scalar) -> Scalar {
                Scalar::wrap((&self.q).$m(&rhs.q))
            }
        }
        impl $tr<Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, rhs: Scalar) -> Scalar {
                Scalar::wrap(self.q.$m(rhs.q))
            }
        }
        impl $tr<&Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, rhs: &Scalar) -> Scalar {
                Scalar::wrap(self.q.$m(&rhs.q))
            }
        }
        impl $tr<Scalar> for &Scalar {
            type Output = Scalar;
            fn $m(self, rhs: Scalar) -> Scalar {
                Scalar::wrap((&self.q).$m(rhs.q))
            }
        }
    };
}

scalar_binop!(Add, add);
scalar_binop!(Sub, sub);
scalar_binop!(Mul, mul);
scalar_binop!(Div, div);

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar { q: -self.q, f: -self.f }
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar { q: -&self.q, f: -self.f }
    }
}

impl From<i64> for Scalar {
    fn from(v: i64) -> Self {
        Scalar::from_int(v)
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct Point {
    pub x: Scalar,
    pub y: Scalar,
}

impl Point {
    pub fn new(x: Scalar, y: Scalar) -> Self {
        Point { x, y }
    }

    pub fn int(x: i64, y: i64) -> Self {
        Point::new(Scalar::from_int(x), Scalar::from_int(y))
    }

    pub fn sub(&self, o: &Point) -> Vector {
        Vector::new(&self.x - &o.x, &self.y - &o.y)
    }

    pub fn offset(&self, v: &Vector) -> Point {
        Point::new(&self.x + &v.x, &self.y + &v.y)
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (self.x.to_f64(), self.y.to_f64())
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// A direction or displacement. Directions are never normalized; two
/// directions are equal as rays when they are positive multiples.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Vector {
    pub x: Scalar,
    pub y: Scalar,
}

impl Vector {
    pub fn new(x: Scalar, y: Scalar) -> Self {
        Vector { x, y }
    }

    pub fn int(x: i64, y: i64) -> Self {
        Vector::new(Scalar::from_int(x), Scalar::from_int(y))
    }

    pub fn cross(&self, o: &Vector) -> Scalar {
        &self.x * &o.y - &self.y * &o.x
    }

    /// Sign of [`Vector::cross`].
    pub fn cross_sign(&self, o: &Vector) -> i32 {
        let (a, b) = (self.x.f * o.y.f, self.y.f * o.x.f);
        certain_sign(a - b, FILTER_EPS * (a.abs() + b.abs())).unwrap_or_else(|| {
            cross_sign_exact(&Frac::of(&self.x), &Frac::of(&self.y), &Frac::of(&o.x), &Frac::of(&o.y))
        })
    }

    pub fn dot(&self, o: &Vector) -> Scalar {
        &self.x * &o.x + &self.y * &o.y
    }

    pub fn neg(&self) -> Vector {
        Vector::new(-&self.x, -&self.y)
    }

    pub fn scale(&self, s: &Scalar) -> Vector {
        Vector::new(&self.x * s, &self.y * s)
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }

    /// Same ray direction: parallel and pointing the same way.
    pub fn same_direction(&self, o: &Vector) -> bool {
        self.cross(o).is_zero() && self.dot(o).signum() > 0
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
pub enum Orientation {
    CounterClockwise,
    Clockwise,
    Collinear,
}

impl Orientation {
    pub fn from_sign(s: i32) -> Self {
        match s.cmp(&0) {
            Ordering::Greater => Orientation::CounterClockwise,
            Ordering::Less => Orientation::Clockwise,
            Ordering::Equal => Orientation::Collinear,
        }
    }

    pub fn sign(self) -> i32 {
        match self {
            Orientation::CounterClockwise => 1,
            Orientation::Clockwise => -1,
            Orientation::Collinear => 0,
        }
    }
}

/// Sign of the determinant of `(q - p, r - p)`.
pub fn orientation(p: &Point, q: &Point, r: &Point) -> Orientation {
    Orientation::from_sign(orient_sign(p, q, r))
}

/// Sign of `(q.y - p.y) - x * (q.x - p.x)`: how the slope of `p -> q`
/// compares with `x` when `q` lies to the right of `p`.
pub fn slope_sign(p: &Point, q: &Point, x: &Scalar) -> i32 {
    let a = q.y.f - p.y.f;
    let b = x.f * (q.x.f - p.x.f);
    let err = FILTER_EPS * (q.y.f.abs() + p.y.f.abs() + x.f.abs() * (q.x.f.abs() + p.x.f.abs()));
    certain_sign(a - b, err).unwrap_or_else(|| {
        match Frac::diff(&q.y, &p.y).cmp(&Frac::of(x).mul(&Frac::diff(&q.x, &p.x))) {
            Ordering::Greater => 1,
            Ordering::Less => -1,
            Ordering::Equal => 0,
        }
    })
}

pub fn orient_sign(p: &Point, q: &Point, r: &Point) -> i32 {
    let l = (q.x.f - p.x.f) * (r.y.f - p.y.f);
    let rr = (q.y.f - p.y.f) * (r.x.f - p.x.f);
    let err = FILTER_EPS
        * ((q.x.f.abs() + p.x.f.abs()) * (r.y.f.abs() + p.y.f.abs())
            + (q.y.f.abs() + p.y.f.abs()) * (r.x.f.abs() + p.x.f.abs()));
    if let Some(s) = certain_sign(l - rr, err) {
        return s;
    }
    cross_sign_exact(&Frac::diff(&q.x, &p.x), &Frac::diff(&q.y, &p.y), &Frac::diff(&r.x, &p.x), &Frac::diff(&r.y, &p.y))
}

/// The non-vertical line `y = a*x + b`.
#[derive(Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct Line {
    pub a: Scalar,
    pub b: Scalar,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
pub enum LineSide {
    Above,
    Below,
    On,
}

impl Line {
    pub fn new(a: Scalar, b: Scalar) -> Self {
        Line { a, b }
    }

    pub fn int(a: i64, b: i64) -> Self {
        Line::new(Scalar::from_int(a), Scalar::from_int(b))
    }

    /// Line through two points with distinct x.
    pub fn through(p: &Point, q: &Point) -> Result<Line> {
        if p.x == q.x {
            return Err(Error::GeneralPosition(format!("line through {p} and {q} would be vertical")));
        }
        let a = (&q.y - &p.y) / (&q.x - &p.x);
        let b = &p.y - &a * &p.x;
        Ok(Line::new(a, b))
    }

    pub fn eval(&self, x: &Scalar) -> Scalar {
        &self.a * x + &self.b
    }

    /// Sign of `p.y - (a*p.x + b)`.
    pub fn side_sign(&self, p: &Point) -> i32 {
        let ax = self.a.f * p.x.f;
        let err = FILTER_EPS * (p.y.f.abs() + ax.abs() + self.b.f.abs());
        if let Some(s) = certain_sign(p.y.f - ax - self.b.f, err) {
            return s;
        }
        match p.y.cmp(&self.eval(&p.x)) {
            Ordering::Greater => 1,
            Ordering::Less => -1,
            Ordering::Equal => 0,
        }
    }

    pub fn intersection(&self, o: &Line) -> Option<Point> {
        if self.a == o.a {
            return None;
        }
        let x = (&o.b - &self.b) / (&self.a - &o.a);
        let y = self.eval(&x);
        Some(Point::new(x, y))
    }

    pub fn direction(&self) -> Vector {
        Vector::new(Scalar::one(), self.a.clone())
    }

    pub fn anchor(&self) -> Point {
        Point::new(Scalar::zero(), self.b.clone())
    }

    /// Oriented left to right, so the left side is the region above.
    pub fn as_cut(&self) -> Cut {
        Cut::new(self.anchor(), self.direction())
    }
}

impl fmt::Display for Line {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "y = {}x + {}", self.a, self.b)
    }
}

pub fn side_of_line(l: &Line, p: &Point) -> LineSide {
    match l.side_sign(p) {
        1 => LineSide::Above,
        -1 => LineSide::Below,
        _ => LineSide::On,
    }
}

/// `(a, b)` maps to the line `y = a*x - b`.
pub fn dual_of_point(p: &Point) -> Line {
    Line::new(p.x.clone(), -&p.y)
}

/// `y = c*x + d` maps to the point `(c, -d)`.
pub fn dual_of_line(l: &Line) -> Point {
    Point::new(l.a.clone(), -&l.b)
}

/// An oriented line, possibly vertical. Positive side is to the left of
/// `dir`.
#[derive(Clone, PartialEq, Eq, Debug, Hash)]
pub struct Cut {
    pub anchor: Point,
    pub dir: Vector,
}

impl Cut {
    pub fn new(anchor: Point, dir: Vector) -> Self {
        debug_assert!(!dir.is_zero());
        Cut { anchor, dir }
    }

    pub fn through(p: &Point, q: &Point) -> Self {
        Cut::new(p.clone(), q.sub(p))
    }

    /// Vertical line `x = c` oriented downward, so its left side is `x > c`.
    pub fn vertical(c: Scalar) -> Self {
        Cut::new(Point::new(c, Scalar::zero()), Vector::int(0, -1))
    }

    /// Affine value whose sign gives the side of `p`.
    pub fn value(&self, p: &Point) -> Scalar {
        self.dir.cross(&p.sub(&self.anchor))
    }

    pub fn side(&self, p: &Point) -> i32 {
        let (d, a) = (&self.dir, &self.anchor);
        let l = d.x.f * (p.y.f - a.y.f);
        let r = d.y.f * (p.x.f - a.x.f);
        let err = FILTER_EPS * (d.x.f.abs() * (p.y.f.abs() + a.y.f.abs()) + d.y.f.abs() * (p.x.f.abs() + a.x.f.abs()));
        certain_sign(l - r, err).unwrap_or_else(|| {
            cross_sign_exact(&Frac::of(&d.x), &Frac::of(&d.y), &Frac::diff(&p.x, &a.x), &Frac::diff(&p.y, &a.y))
        })
    }

    /// Sign of the linear part along direction `d` (the side an ideal
    /// point lies on).
    pub fn dir_side(&self, d: &Vector) -> i32 {
        self.dir.cross_sign(d)
    }

    pub fn reversed(&self) -> Cut {
        Cut::new(self.anchor.clone(), self.dir.neg())
    }

    /// Intersection of the cut with the segment or ray `p + t*d`.
    pub fn hit(&self, p: &Point, d: &Vector) -> Option<Point> {
        let (ux, uy) = (Frac::of(&self.dir.x), Frac::of(&self.dir.y));
        let (dx, dy) = (Frac::of(&d.x), Frac::of(&d.y));
        let denom = ux.mul(&dy).sub(&uy.mul(&dx));
        if denom.is_zero() {
            return None;
        }
        let value = ux.mul(&Frac::diff(&p.y, &self.anchor.y)).sub(&uy.mul(&Frac::diff(&p.x, &self.anchor.x)));
        let t = value.div(&denom);
        Some(Point::new(Frac::of(&p.x).sub(&t.mul(&dx)).into_scalar(), Frac::of(&p.y).sub(&t.mul(&dy)).into_scalar()))
    }

    /// Same geometric line (ignoring orientation).
    pub fn same_line(&self, o: &Cut) -> bool {
        self.dir.cross(&o.dir).is_zero() && self.value(&o.anchor).is_zero()
    }
}

/// Parses the instance text format: `L a b` for `y = a*x + b`, `P x y`
/// for a point, `#` comments and blank lines ignored.
pub fn parse_instance(text: &str) -> Result<(Vec<Line>, Vec<Point>)> {
    let mut lines = Vec::new();
    let mut points = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let toks: Vec<&str> = content.split_whitespace().collect();
        let ctx = |e: Error| Error::Parse(format!("line {}: {}", no + 1, e));
        match toks.as_slice() {
            ["L", a, b] => lines.push(Line::new(a.parse().map_err(ctx)?, b.parse().map_err(ctx)?)),
            ["P", x, y] => points.push(Point::new(x.parse().map_err(ctx)?, y.parse().map_err(ctx)?)),
            ["V", ..] => {
                return Err(Error::GeneralPosition(format!("line {}: vertical lines are not supported", no + 1)))
            }
            _ => return Err(Error::Parse(format!("line {}: expected `L a b` or `P x y`, got `{content}`", no + 1))),
        }
    }
    Ok((lines, points))
}

pub fn format_instance(lines: &[Line], points: &[Point]) -> String {
    let mut out = String::new();
    for l in lines {
        out.push_str(&format!("L {} {}\n", l.a, l.b));
    }
    for p in points {
        out.push_str(&format!("P {} {}\n", p.x, p.y));
    }
    out
}

/// Checks the general-position assumptions on the lines: no duplicates and
/// no three through a common point.
pub fn check_lines_general(lines: &[Line]) -> Result<()> {
    use std::collections::HashMap;
    let mut seen = std::collections::HashSet::new();
    for (i, l) in lines.iter().enumerate() {
        if !seen.insert(l) {
            return Err(Error::GeneralPosition(format!("line {i} ({l}) is duplicated")));
        }
    }
    // Group intersection points; a point hit by more than one pair means
    // three or more concurrent lines.
    let mut vertices: HashMap<Point, (usize, usize)> = HashMap::new();
    for i in 0..lines.len() {
        for j in i + 1..lines.len() {
            if let Some(p) = lines[i].intersection(&lines[j]) {
                if let Some(&(a, b)) = vertices.get(&p) {
                    let mut ids = vec![a, b, i, j];
                    ids.sort_unstable();
                    ids.dedup();
                    let ids: Vec<String> = ids.iter().map(|k| k.to_string()).collect();
                    return Err(Error::GeneralPosition(format!("lines {} are concurrent at {p}", ids.join(", "))));
                }
                vertices.insert(p, (i, j));
            }
        }
    }
    Ok(())
}

/// Every point must avoid every line.
pub fn check_points_off_lines(lines: &[Line], points: &[Point]) -> Result<()> {
    for (j, p) in points.iter().enumerate() {
        for (i, l) in lines.iter().enumerate() {
            if l.side_sign(p) == 0 {
                return Err(Error::PointOnLine { point: j, line: i });
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: i64, y: i64) -> Point {
        Point::int(x, y)
    }

    #[test]
    fn orientation_examples() {
        assert_eq!(orientation(&p(0, 0), &p(1, 0), &p(0, 1)), Orientation::CounterClockwise);
        assert_eq!(orientation(&p(0, 0), &p(1, 1), &p(2, 2)), Orientation::Collinear);
        assert_eq!(orientation(&p(0, 0), &p(0, 1), &p(1, 0)), Orientation::Clockwise);
    }

    #[test]
    fn duality_examples() {
        assert_eq!(dual_of_point(&p(1, 2)), Line::int(1, -2));
        assert_eq!(dual_of_point(&p(0, 0)), Line::int(0, 0));
        assert_eq!(dual_of_point(&p(-3, 5)), Line::int(-3, -5));
        assert_eq!(dual_of_line(&Line::int(3, 1)), p(3, -1));
        assert_eq!(dual_of_line(&Line::int(0, 0)), p(0, 0));
        // (1,2) lies on y = 2x.
        let q = p(1, 2);
        let l = Line::int(2, 0);
        assert_eq!(side_of_line(&l, &q), LineSide::On);
        let dl = dual_of_point(&q);
        let dp = dual_of_line(&l);
        assert_eq!(dp, p(2, 0));
        assert_eq!(side_of_line(&dl, &dp), LineSide::On);
    }

    #[test]
    fn side_examples() {
        assert_eq!(side_of_line(&Line::int(0, 0), &p(5, 1)), LineSide::Above);
        assert_eq!(side_of_line(&Line::int(1, 0), &p(2, 2)), LineSide::On);
        assert_eq!(side_of_line(&Line::int(2, -1), &p(0, -3)), LineSide::Below);
    }

    #[test]
    fn scalar_parsing() {
        assert_eq!("3/6".parse::<Scalar>().unwrap(), Scalar::ratio(1, 2));
        assert_eq!("-1.25".parse::<Scalar>().unwrap(), Scalar::ratio(-5, 4));
        assert_eq!(".5".parse::<Scalar>().unwrap(), Scalar::ratio(1, 2));
        assert_eq!("7".parse::<Scalar>().unwrap(), Scalar::from_int(7));
        assert!("1/0".parse::<Scalar>().is_err());
        assert!("abc".parse::<Scalar>().is_err());
        assert_eq!(Scalar::ratio(2, -4).to_string(), "-1/2");
    }

    #[test]
    fn instance_round_trip() {
        let text = "# demo\nL 1 2\nL -1/2 0.5\nP 0 0 # origin\n";
        let (ls, ps) = parse_instance(text).unwrap();
        assert_eq!(ls.len(), 2);
        assert_eq!(ps, vec![p(0, 0)]);
        let again = parse_instance(&format_instance(&ls, &ps)).unwrap();
        assert_eq!(again, (ls, ps));
        assert!(parse_instance("Q 1 2").is_err());
        assert!(matches!(parse_instance("V 3"), Err(Error::GeneralPosition(_))));
    }

    #[test]
    fn general_position_checks() {
        let concurrent = [Line::int(1, 0), Line::int(-1, 0), Line::int(2, 0)];
        assert!(check_lines_general(&concurrent).is_err());
        let dup = [Line::int(1, 0), Line::int(1, 0)];
        assert!(check_lines_general(&dup).is_err());
        let ok = [Line::int(0, 0), Line::int(1, 0), Line::int(-1, 2)];
        assert!(check_lines_general(&ok).is_ok());
        assert!(check_points_off_lines(&ok, &[p(1, 1)]).is_err());
    }

    #[test]
    fn cut_sides() {
        let l = Line::int(1, 0);
        let c = l.as_cut();
        assert_eq!(c.side(&p(0, 5)), 1);
        assert_eq!(c.side(&p(0, -5)), -1);
        let v = Cut::vertical(Scalar::from_int(2));
        assert_eq!(v.side(&p(3, 0)), 1);
        assert_eq!(v.side(&p(1, 0)), -1);
        let h = c.hit(&p(0, 1), &Vector::int(1, 0)).unwrap();
        assert_eq!(h, p(1, 1));
    }
}
