//! Exact rational vectors, matrices, planes and isometries of R^3.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qf(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Formats a rational as `p` or `p/q`.
pub fn fmt_q(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Parses `p` or `p/q`.
pub fn parse_q(s: &str) -> Option<Q> {
    let s = s.trim();
    match s.split_once('/') {
        Some((a, b)) => {
            let a: BigInt = a.trim().parse().ok()?;
            let b: BigInt = b.trim().parse().ok()?;
            if b.is_zero() {
                return None;
            }
            Some(Q::new(a, b))
        }
        None => Some(Q::from_integer(s.parse().ok()?)),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vec3(pub [Q; 3]);

impl Vec3 {
    pub fn new(x: Q, y: Q, z: Q) -> Self {
        Vec3([x, y, z])
    }

    pub fn int(x: i64, y: i64, z: i64) -> Self {
        Vec3([q(x), q(y), q(z)])
    }

    pub fn zero() -> Self {
        Vec3::int(0, 0, 0)
    }

    pub fn unit(axis: usize) -> Self {
        let mut v = Vec3::zero();
        v.0[axis] = Q::one();
        v
    }

    pub fn dot(&self, o: &Vec3) -> Q {
        &self.0[0] * &o.0[0] + &self.0[1] * &o.0[1] + &self.0[2] * &o.0[2]
    }

    pub fn add(&self, o: &Vec3) -> Vec3 {
        Vec3([&self.0[0] + &o.0[0], &self.0[1] + &o.0[1], &self.0[2] + &o.0[2]])
    }

    pub fn sub(&self, o: &Vec3) -> Vec3 {
        Vec3([&self.0[0] - &o.0[0], &self.0[1] - &o.0[1], &self.0[2] - &o.0[2]])
    }

    pub fn scale(&self, s: &Q) -> Vec3 {
        Vec3([&self.0[0] * s, &self.0[1] * s, &self.0[2] * s])
    }

    pub fn neg(&self) -> Vec3 {
        Vec3([-&self.0[0], -&self.0[1], -&self.0[2]])
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|c| c.is_zero())
    }

    pub fn cross(&self, o: &Vec3) -> Vec3 {
        let a = &self.0;
        let b = &o.0;
        Vec3([
            &a[1] * &b[2] - &a[2] * &b[1],
            &a[2] * &b[0] - &a[0] * &b[2],
            &a[0] * &b[1] - &a[1] * &b[0],
        ])
    }

    pub fn x(&self) -> &Q {
        &self.0[0]
    }

    pub fn y(&self) -> &Q {
        &self.0[1]
    }

    pub fn z(&self) -> &Q {
        &self.0[2]
    }
}

impl fmt::Display for Vec3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", fmt_q(&self.0[0]), fmt_q(&self.0[1]), fmt_q(&self.0[2]))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mat3(pub [[Q; 3]; 3]);

impl Mat3 {
    pub fn identity() -> Self {
        Mat3::from_fn(|i, j| if i == j { Q::one() } else { Q::zero() })
    }

    pub fn from_fn(mut f: impl FnMut(usize, usize) -> Q) -> Self {
        Mat3([
            [f(0, 0), f(0, 1), f(0, 2)],
            [f(1, 0), f(1, 1), f(1, 2)],
            [f(2, 0), f(2, 1), f(2, 2)],
        ])
    }

    pub fn int(rows: [[i64; 3]; 3]) -> Self {
        Mat3::from_fn(|i, j| q(rows[i][j]))
    }

    pub fn mul(&self, o: &Mat3) -> Mat3 {
        Mat3::from_fn(|i, j| {
            &self.0[i][0] * &o.0[0][j] + &self.0[i][1] * &o.0[1][j] + &self.0[i][2] * &o.0[2][j]
        })
    }

    pub fn mul_vec(&self, v: &Vec3) -> Vec3 {
        Vec3([
            &self.0[0][0] * &v.0[0] + &self.0[0][1] * &v.0[1] + &self.0[0][2] * &v.0[2],
            &self.0[1][0] * &v.0[0] + &self.0[1][1] * &v.0[1] + &self.0[1][2] * &v.0[2],
            &self.0[2][0] * &v.0[0] + &self.0[2][1] * &v.0[1] + &self.0[2][2] * &v.0[2],
        ])
    }

    pub fn transpose(&self) -> Mat3 {
        Mat3::from_fn(|i, j| self.0[j][i].clone())
    }

    pub fn sub(&self, o: &Mat3) -> Mat3 {
        Mat3::from_fn(|i, j| &self.0[i][j] - &o.0[i][j])
    }

    pub fn det(&self) -> Q {
        let m = &self.0;
        &m[0][0] * (&m[1][1] * &m[2][2] - &m[1][2] * &m[2][1])
            - &m[0][1] * (&m[1][0] * &m[2][2] - &m[1][2] * &m[2][0])
            + &m[0][2] * (&m[1][0] * &m[2][1] - &m[1][1] * &m[2][0])
    }

    pub fn inverse(&self) -> Option<Mat3> {
        let d = self.det();
        if d.is_zero() {
            return None;
        }
        let m = &self.0;
        let cof = |r0: usize, r1: usize, c0: usize, c1: usize| -> Q {
            &m[r0][c0] * &m[r1][c1] - &m[r0][c1] * &m[r1][c0]
        };
        let adj = Mat3([
            [cof(1, 2, 1, 2), -cof(0, 2, 1, 2), cof(0, 1, 1, 2)],
            [-cof(1, 2, 0, 2), cof(0, 2, 0, 2), -cof(0, 1, 0, 2)],
            [cof(1, 2, 0, 1), -cof(0, 2, 0, 1), cof(0, 1, 0, 1)],
        ]);
        Some(Mat3::from_fn(|i, j| &adj.0[i][j] / &d))
    }

    pub fn is_orthogonal(&self) -> bool {
        self.transpose().mul(self) == Mat3::identity()
    }

    pub fn is_identity(&self) -> bool {
        *self == Mat3::identity()
    }

    /// Smallest `k >= 1` with `self^k = I`, searched up to `limit`.
    pub fn order(&self, limit: usize) -> Option<usize> {
        let mut p = self.clone();
        for k in 1..=limit {
            if p.is_identity() {
                return Some(k);
            }
            p = p.mul(self);
        }
        None
    }

    pub fn column(&self, j: usize) -> Vec3 {
        Vec3([self.0[0][j].clone(), self.0[1][j].clone(), self.0[2][j].clone()])
    }
}

impl fmt::Display for Mat3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .0
            .iter()
            .map(|r| r.iter().map(fmt_q).collect::<Vec<_>>().join(" "))
            .collect();
        write!(f, "[{}]", rows.join("; "))
    }
}

/// An oriented plane `normal . x = offset`, scaled so the first nonzero
/// normal coordinate has absolute value 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Plane {
    pub normal: Vec3,
    pub offset: Q,
}

impl Plane {
    pub fn new(normal: Vec3, offset: Q) -> Self {
        let lead = normal
            .0
            .iter()
            .find(|c| !c.is_zero())
            .expect("plane normal must be nonzero")
            .abs();
        Plane { normal: normal.scale(&lead.recip()), offset: offset / lead }
    }

    /// Axis plane `sign * x_axis = sign * value` with outward side `sign`.
    pub fn axis(axis: usize, value: Q, outward_positive: bool) -> Self {
        let s = if outward_positive { q(1) } else { q(-1) };
        Plane::new(Vec3::unit(axis).scale(&s), value * s)
    }

    /// Signed value `normal . p - offset`: positive on the outward side.
    pub fn eval(&self, p: &Vec3) -> Q {
        self.normal.dot(p) - &self.offset
    }

    pub fn contains(&self, p: &Vec3) -> bool {
        self.eval(p).is_zero()
    }

    pub fn flipped(&self) -> Plane {
        Plane::new(self.normal.neg(), -&self.offset)
    }

    /// Same plane ignoring orientation.
    pub fn same_locus(&self, o: &Plane) -> bool {
        self == o || *self == o.flipped()
    }

    /// The axis index if the plane is orthogonal to a coordinate axis.
    pub fn axis_index(&self) -> Option<usize> {
        let nz: Vec<usize> = (0..3).filter(|&i| !self.normal.0[i].is_zero()).collect();
        if nz.len() == 1 {
            Some(nz[0])
        } else {
            None
        }
    }

    /// Coordinate value of an axis plane along its axis.
    pub fn axis_value(&self) -> Option<(usize, Q)> {
        let a = self.axis_index()?;
        Some((a, &self.offset / &self.normal.0[a]))
    }

    /// Image of the plane under an isometry, orientation carried along.
    pub fn transform(&self, g: &Isometry3) -> Plane {
        let n = g.linear.mul_vec(&self.normal);
        let c = &self.offset + n.dot(&g.translation);
        Plane::new(n, c)
    }

    pub fn reflection(&self) -> Isometry3 {
        Isometry3::reflection(self)
    }
}

impl fmt::Display for Plane {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = ["x", "y", "z"];
        let mut terms = String::new();
        for (i, c) in self.normal.0.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            let mag = c.abs();
            let coef = if mag.is_one() { String::new() } else { fmt_q(&mag) };
            if terms.is_empty() {
                if c.is_negative() {
                    terms.push('-');
                }
            } else {
                terms.push_str(&format!(" {sign} "));
            }
            terms.push_str(&format!("{coef}{}", names[i]));
        }
        write!(f, "{} = {}", terms, fmt_q(&self.offset))
    }
}

/// Affine map `x -> linear * x + translation`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Isometry3 {
    pub linear: Mat3,
    pub translation: Vec3,
}

impl Isometry3 {
    pub fn identity() -> Self {
        Isometry3 { linear: Mat3::identity(), translation: Vec3::zero() }
    }

    pub fn new(linear: Mat3, translation: Vec3) -> Self {
        Isometry3 { linear, translation }
    }

    pub fn translation(v: Vec3) -> Self {
        Isometry3 { linear: Mat3::identity(), translation: v }
    }

    pub fn reflection(p: &Plane) -> Self {
        let n = &p.normal;
        let nn = n.dot(n);
        let two = q(2);
        let linear = Mat3::from_fn(|i, j| {
            let delta = if i == j { Q::one() } else { Q::zero() };
            delta - &two * &n.0[i] * &n.0[j] / &nn
        });
        let translation = n.scale(&(&two * &p.offset / &nn));
        Isometry3 { linear, translation }
    }

    pub fn apply(&self, p: &Vec3) -> Vec3 {
        self.linear.mul_vec(p).add(&self.translation)
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Isometry3) -> Isometry3 {
        Isometry3 {
            linear: self.linear.mul(&other.linear),
            translation: self.linear.mul_vec(&other.translation).add(&self.translation),
        }
    }

    pub fn inverse(&self) -> Isometry3 {
        let inv = self.linear.inverse().expect("isometry with singular linear part");
        let t = inv.mul_vec(&self.translation).neg();
        Isometry3 { linear: inv, translation: t }
    }

    pub fn det(&self) -> Q {
        self.linear.det()
    }

    pub fn is_orthogonal(&self) -> bool {
        self.linear.is_orthogonal()
    }

    pub fn is_translation(&self) -> bool {
        self.linear.is_identity()
    }

    pub fn pow(&self, k: usize) -> Isometry3 {
        let mut r = Isometry3::identity();
        for _ in 0..k {
            r = r.compose(self);
        }
        r
    }
}

impl fmt::Display for Isometry3 {
    /// Coordinate formula, e.g. `(-x, 2 - y, z - 4)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = ["x", "y", "z"];
        let mut parts = Vec::new();
        for i in 0..3 {
            let mut s = String::new();
            for j in 0..3 {
                let c = &self.linear.0[i][j];
                if c.is_zero() {
                    continue;
                }
                let mag = c.abs();
                let coef = if mag.is_one() { String::new() } else { fmt_q(&mag) };
                if s.is_empty() {
                    if c.is_negative() {
                        s.push('-');
                    }
                } else {
                    s.push_str(if c.is_negative() { " - " } else { " + " });
                }
                s.push_str(&format!("{coef}{}", names[j]));
            }
            let t = &self.translation.0[i];
            if !t.is_zero() {
                if s.is_empty() {
                    s = fmt_q(t);
                } else {
                    let sign = if t.is_negative() { " - " } else { " + " };
                    s.push_str(&format!("{sign}{}", fmt_q(&t.abs())));
                }
            }
            if s.is_empty() {
                s.push('0');
            }
            parts.push(s);
        }
        write!(f, "({})", parts.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_reflection_is_integral() {
        let p = Plane::new(Vec3::int(1, 1, 0), q(1));
        let r = p.reflection();
        assert_eq!(r.apply(&Vec3::int(0, 0, 5)), Vec3::int(1, 1, 5));
        assert_eq!(r.apply(&Vec3::int(1, 0, 0)), Vec3::int(1, 0, 0));
        assert!(r.is_orthogonal());
        assert_eq!(r.det(), q(-1));
        assert_eq!(r.compose(&r), Isometry3::identity());
    }

    #[test]
    fn plane_normalization_keeps_orientation() {
        let p = Plane::new(Vec3::int(-2, 0, 0), q(-4));
        assert_eq!(p.normal, Vec3::int(-1, 0, 0));
        assert_eq!(p.offset, q(-2));
        assert!(p.eval(&Vec3::int(0, 0, 0)).is_positive());
        assert!(p.eval(&Vec3::int(3, 0, 0)).is_negative());
    }

    #[test]
    fn plane_transform_matches_point_images() {
        let p = Plane::new(Vec3::int(1, 1, 0), q(1));
        let g = Isometry3::new(Mat3::int([[0, -1, 0], [1, 0, 0], [0, 0, 1]]), Vec3::int(3, -1, 2));
        let img = p.transform(&g);
        for pt in [Vec3::int(1, 0, 0), Vec3::int(0, 1, 7)] {
            assert!(img.contains(&g.apply(&pt)));
        }
        let inside = Vec3::int(0, 0, 0);
        assert!(img.eval(&g.apply(&inside)).is_negative());
    }

    #[test]
    fn inverse_and_display() {
        let g = Isometry3::new(Mat3::int([[-1, 0, 0], [0, -1, 0], [0, 0, 1]]), Vec3::int(0, 2, -4));
        assert_eq!(g.compose(&g.inverse()), Isometry3::identity());
        assert_eq!(g.to_string(), "(-x, -y + 2, z - 4)");
        assert_eq!(Plane::axis(1, q(-1), false).to_string(), "-y = 1");
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_q("3/6"), Some(qf(1, 2)));
        assert_eq!(parse_q("-4"), Some(q(-4)));
        assert_eq!(parse_q("1/0"), None);
        assert_eq!(fmt_q(&qf(-6, 4)), "-3/2");
    }
}
