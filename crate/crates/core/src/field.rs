//! Closed forms for the function family
//!
//! ```text
//! u(x, y, z) = z^α (x^α + y^α) / (x^α y^α),     v(s, t) = s^-α + t^-α
//! ```
//!
//! on the open positive octant, together with their gradients and Hessians.
//! Powers are always taken as `exp(α ln t)` with `t > 0` enforced.

use std::fmt;
use std::ops::{Add, Index, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exponent of the family. Always positive and finite.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Alpha(f64);

impl Alpha {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && value > 0.0 {
            Ok(Alpha(value))
        } else {
            Err(Error::InvalidAlpha(value))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Alpha {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Alpha::new(value)
    }
}

impl From<Alpha> for f64 {
    fn from(a: Alpha) -> f64 {
        a.0
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A point of the open positive octant `E = {x, y, z > 0}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct PointE {
    x: f64,
    y: f64,
    z: f64,
}

impl PointE {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let inside = |c: f64| c.is_finite() && c > 0.0;
        if inside(x) && inside(y) && inside(z) {
            Ok(PointE { x, y, z })
        } else {
            Err(Error::OutsideDomain { x, y, z })
        }
    }

    pub fn from_vec(v: Vec3) -> Result<Self> {
        PointE::new(v[0], v[1], v[2])
    }

    #[inline]
    pub fn x(&self) -> f64 {
        self.x
    }

    #[inline]
    pub fn y(&self) -> f64 {
        self.y
    }

    #[inline]
    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn to_vec(self) -> Vec3 {
        Vec3([self.x, self.y, self.z])
    }

    pub fn min_coordinate(&self) -> f64 {
        self.x.min(self.y).min(self.z)
    }

    /// `s·p` for `s > 0`.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        PointE::new(s * self.x, s * self.y, s * self.z)
    }

    /// `λ·p1 + (1 − λ)·p2`. E is convex, so this stays in E for `λ ∈ [0, 1]`.
    pub fn convex_combination(p1: &PointE, p2: &PointE, lambda: f64) -> Result<Self> {
        let mu = 1.0 - lambda;
        PointE::new(
            lambda * p1.x + mu * p2.x,
            lambda * p1.y + mu * p2.y,
            lambda * p1.z + mu * p2.z,
        )
    }
}

impl TryFrom<[f64; 3]> for PointE {
    type Error = Error;

    fn try_from(c: [f64; 3]) -> Result<Self> {
        PointE::new(c[0], c[1], c[2])
    }
}

impl From<PointE> for [f64; 3] {
    fn from(p: PointE) -> [f64; 3] {
        [p.x, p.y, p.z]
    }
}

impl fmt::Display for PointE {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3(pub [f64; 3]);

impl Vec3 {
    pub const ZERO: Vec3 = Vec3([0.0; 3]);

    pub fn new(a: f64, b: f64, c: f64) -> Self {
        Vec3([a, b, c])
    }

    pub fn dot(&self, other: &Vec3) -> f64 {
        self.0[0] * other.0[0] + self.0[1] * other.0[1] + self.0[2] * other.0[2]
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }
}

impl Index<usize> for Vec3 {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl Add for Vec3 {
    type Output = Vec3;

    fn add(self, o: Vec3) -> Vec3 {
        Vec3([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl Sub for Vec3 {
    type Output = Vec3;

    fn sub(self, o: Vec3) -> Vec3 {
        Vec3([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl Neg for Vec3 {
    type Output = Vec3;

    fn neg(self) -> Vec3 {
        Vec3([-self.0[0], -self.0[1], -self.0[2]])
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;

    fn mul(self, v: Vec3) -> Vec3 {
        Vec3([self * v.0[0], self * v.0[1], self * v.0[2]])
    }
}

/// Symmetric 3×3 matrix stored as its upper triangle.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Sym3 {
    pub xx: f64,
    pub yy: f64,
    pub zz: f64,
    pub xy: f64,
    pub xz: f64,
    pub yz: f64,
}

impl Sym3 {
    pub fn from_rows(m: [[f64; 3]; 3]) -> Self {
        Sym3 {
            xx: m[0][0],
            yy: m[1][1],
            zz: m[2][2],
            xy: m[0][1],
            xz: m[0][2],
            yz: m[1][2],
        }
    }

    /// `v vᵀ`
    pub fn outer(v: &Vec3) -> Self {
        let [a, b, c] = v.0;
        Sym3 {
            xx: a * a,
            yy: b * b,
            zz: c * c,
            xy: a * b,
            xz: a * c,
            yz: b * c,
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match (i.min(j), i.max(j)) {
            (0, 0) => self.xx,
            (1, 1) => self.yy,
            (2, 2) => self.zz,
            (0, 1) => self.xy,
            (0, 2) => self.xz,
            (1, 2) => self.yz,
            _ => panic!("Sym3 index ({i}, {j}) out of range"),
        }
    }

    pub fn rows(&self) -> [[f64; 3]; 3] {
        [
            [self.xx, self.xy, self.xz],
            [self.xy, self.yy, self.yz],
            [self.xz, self.yz, self.zz],
        ]
    }

    pub fn mul_vec(&self, v: &Vec3) -> Vec3 {
        let [a, b, c] = v.0;
        Vec3([
            self.xx * a + self.xy * b + self.xz * c,
            self.xy * a + self.yy * b + self.yz * c,
            self.xz * a + self.yz * b + self.zz * c,
        ])
    }

    /// `⟨v, M v⟩`
    pub fn quad(&self, v: &Vec3) -> f64 {
        v.dot(&self.mul_vec(v))
    }

    pub fn scale(&self, s: f64) -> Self {
        Sym3 {
            xx: s * self.xx,
            yy: s * self.yy,
            zz: s * self.zz,
            xy: s * self.xy,
            xz: s * self.xz,
            yz: s * self.yz,
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        (self.xx * self.xx
            + self.yy * self.yy
            + self.zz * self.zz
            + 2.0 * (self.xy * self.xy + self.xz * self.xz + self.yz * self.yz))
            .sqrt()
    }

    pub fn trace(&self) -> f64 {
        self.xx + self.yy + self.zz
    }

    pub fn is_finite(&self) -> bool {
        [self.xx, self.yy, self.zz, self.xy, self.xz, self.yz]
            .iter()
            .all(|c| c.is_finite())
    }
}

impl Add for Sym3 {
    type Output = Sym3;

    fn add(self, o: Sym3) -> Sym3 {
        Sym3 {
            xx: self.xx + o.xx,
            yy: self.yy + o.yy,
            zz: self.zz + o.zz,
            xy: self.xy + o.xy,
            xz: self.xz + o.xz,
            yz: self.yz + o.yz,
        }
    }
}

impl Sub for Sym3 {
    type Output = Sym3;

    fn sub(self, o: Sym3) -> Sym3 {
        self + o.scale(-1.0)
    }
}

/// `t^α` for `t > 0`, computed as `exp(α ln t)`.
#[inline]
pub(crate) fn pow(t: f64, a: f64) -> f64 {
    (a * t.ln()).exp()
}

fn finite(value: f64, what: &'static str) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Overflow { what })
    }
}

/// The powers `x^α, y^α, z^α` shared by every closed form below.
struct Powers {
    xa: f64,
    ya: f64,
    za: f64,
}

impl Powers {
    fn at(p: &PointE, a: Alpha) -> Result<Self> {
        let a = a.value();
        let powers = Powers {
            xa: pow(p.x, a),
            ya: pow(p.y, a),
            za: pow(p.z, a),
        };
        if [powers.xa, powers.ya, powers.za]
            .iter()
            .all(|c| c.is_finite() && *c > 0.0)
        {
            Ok(powers)
        } else {
            Err(Error::Overflow {
                what: "coordinate powers",
            })
        }
    }
}

pub fn eval_u(p: &PointE, a: Alpha) -> Result<f64> {
    let Powers { xa, ya, za } = Powers::at(p, a)?;
    finite(za * (xa + ya) / (xa * ya), "u")
}

pub fn eval_v(s: f64, t: f64, a: Alpha) -> Result<f64> {
    for (what, value) in [("s", s), ("t", t)] {
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::NonPositive { what, value });
        }
    }
    let a = a.value();
    finite(pow(s, -a) + pow(t, -a), "v")
}

/// Diagonal of the Hessian of `v`; its off-diagonal entry is identically zero.
pub fn hess_v_diagonal(s: f64, t: f64, a: Alpha) -> Result<(f64, f64)> {
    for (what, value) in [("s", s), ("t", t)] {
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::NonPositive { what, value });
        }
    }
    let a = a.value();
    let c = a * (a + 1.0);
    Ok((
        finite(c * pow(s, -a - 2.0), "v_ss")?,
        finite(c * pow(t, -a - 2.0), "v_tt")?,
    ))
}

pub fn grad_u(p: &PointE, a: Alpha) -> Result<Vec3> {
    let Powers { xa, ya, za } = Powers::at(p, a)?;
    let (x, y, z) = (p.x, p.y, p.z);
    let a = a.value();
    let g = Vec3([
        -a * za / (xa * x),
        -a * za / (ya * y),
        a * (za / z) * (xa + ya) / (xa * ya),
    ]);
    if g.is_finite() {
        Ok(g)
    } else {
        Err(Error::Overflow { what: "Du" })
    }
}

pub fn hess_u(p: &PointE, a: Alpha) -> Result<Sym3> {
    let Powers { xa, ya, za } = Powers::at(p, a)?;
    let (x, y, z) = (p.x, p.y, p.z);
    let a = a.value();
    let h = Sym3 {
        xx: a * (a + 1.0) * za / (xa * x * x),
        yy: a * (a + 1.0) * za / (ya * y * y),
        zz: a * (a - 1.0) * (za / (z * z)) * (xa + ya) / (xa * ya),
        xy: 0.0,
        xz: -a * a * (za / z) / (xa * x),
        yz: -a * a * (za / z) / (ya * y),
    };
    if h.is_finite() {
        Ok(h)
    } else {
        Err(Error::Overflow { what: "D²u" })
    }
}
