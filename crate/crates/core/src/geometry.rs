//! Vectors, unit quaternions, rigid poses, boxes and rays.
//!
//! Everything here is a small `Copy` value type. All lengths are meters in a
//! single right-handed world frame.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::scalar::{unit_tolerance, Real};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3<S> {
    pub x: S,
    pub y: S,
    pub z: S,
}

impl<S: Real> Vec3<S> {
    #[inline]
    pub const fn new(x: S, y: S, z: S) -> Self {
        Self { x, y, z }
    }

    #[inline]
    pub fn zero() -> Self {
        Self::new(S::zero(), S::zero(), S::zero())
    }

    #[inline]
    pub fn splat(v: S) -> Self {
        Self::new(v, v, v)
    }

    pub fn unit_x() -> Self {
        Self::new(S::one(), S::zero(), S::zero())
    }

    pub fn unit_y() -> Self {
        Self::new(S::zero(), S::one(), S::zero())
    }

    pub fn unit_z() -> Self {
        Self::new(S::zero(), S::zero(), S::one())
    }

    #[inline]
    pub fn dot(self, o: Self) -> S {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    #[inline]
    pub fn cross(self, o: Self) -> Self {
        Self::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    #[inline]
    pub fn norm_squared(self) -> S {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> S {
        self.norm_squared().sqrt()
    }

    pub fn distance(self, o: Self) -> S {
        (self - o).norm()
    }

    /// Returns the unit vector in this direction, or `None` for (near) zero vectors.
    pub fn try_normalize(self) -> Option<Self> {
        let n = self.norm();
        if n > S::epsilon() && n.is_finite() {
            Some(self / n)
        } else {
            None
        }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn abs(self) -> Self {
        Self::new(self.x.abs(), self.y.abs(), self.z.abs())
    }

    pub fn component_min(self, o: Self) -> Self {
        Self::new(self.x.min(o.x), self.y.min(o.y), self.z.min(o.z))
    }

    pub fn component_max(self, o: Self) -> Self {
        Self::new(self.x.max(o.x), self.y.max(o.y), self.z.max(o.z))
    }

    pub fn max_element(self) -> S {
        self.x.max(self.y).max(self.z)
    }

    pub fn min_element(self) -> S {
        self.x.min(self.y).min(self.z)
    }

    pub fn lerp(self, o: Self, t: S) -> Self {
        self + (o - self) * t
    }

    pub fn to_array(self) -> [S; 3] {
        [self.x, self.y, self.z]
    }

    pub fn cast<T: Real>(self) -> Vec3<T> {
        Vec3::new(
            T::lit(self.x.to_f64_lossy()),
            T::lit(self.y.to_f64_lossy()),
            T::lit(self.z.to_f64_lossy()),
        )
    }
}

impl<S: Real> Add for Vec3<S> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl<S: Real> AddAssign for Vec3<S> {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<S: Real> Sub for Vec3<S> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl<S: Real> Neg for Vec3<S> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}

impl<S: Real> Mul<S> for Vec3<S> {
    type Output = Self;
    #[inline]
    fn mul(self, s: S) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }
}

impl<S: Real> Div<S> for Vec3<S> {
    type Output = Self;
    #[inline]
    fn div(self, s: S) -> Self {
        Self::new(self.x / s, self.y / s, self.z / s)
    }
}

/// Rotation quaternion, `w + xi + yj + zk`, kept at unit norm.
///
/// Deserialization rejects quaternions whose norm is off by more than the unit
/// tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawQuat<S>", into = "RawQuat<S>", bound = "S: Real")]
pub struct UnitQuat<S: Real> {
    w: S,
    x: S,
    y: S,
    z: S,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct RawQuat<S> {
    w: S,
    x: S,
    y: S,
    z: S,
}

impl<S: Real> TryFrom<RawQuat<S>> for UnitQuat<S> {
    type Error = CoreError;

    fn try_from(r: RawQuat<S>) -> Result<Self, CoreError> {
        UnitQuat::try_new(r.w, r.x, r.y, r.z)
    }
}

impl<S: Real> From<UnitQuat<S>> for RawQuat<S> {
    fn from(q: UnitQuat<S>) -> Self {
        RawQuat {
            w: q.w,
            x: q.x,
            y: q.y,
            z: q.z,
        }
    }
}

impl<S: Real> Default for UnitQuat<S> {
    fn default() -> Self {
        Self::identity()
    }
}

impl<S: Real> UnitQuat<S> {
    pub fn identity() -> Self {
        Self {
            w: S::one(),
            x: S::zero(),
            y: S::zero(),
            z: S::zero(),
        }
    }

    /// Accepts the components only if their norm is already within tolerance of 1.
    pub fn try_new(w: S, x: S, y: S, z: S) -> Result<Self, CoreError> {
        let n = (w * w + x * x + y * y + z * z).sqrt();
        if !n.is_finite() || (n - S::one()).abs() > unit_tolerance::<S>() {
            return Err(CoreError::InvalidArgument(format!(
                "quaternion norm {n} is not within tolerance of 1"
            )));
        }
        Ok(Self { w, x, y, z })
    }

    /// Normalizes arbitrary components. Fails on a zero or non-finite input.
    pub fn new_normalize(w: S, x: S, y: S, z: S) -> Result<Self, CoreError> {
        let n = (w * w + x * x + y * y + z * z).sqrt();
        if !(n.is_finite() && n > S::epsilon()) {
            return Err(CoreError::InvalidArgument(
                "cannot normalize a zero or non-finite quaternion".into(),
            ));
        }
        Ok(Self {
            w: w / n,
            x: x / n,
            y: y / n,
            z: z / n,
        })
    }

    /// Rotation of `angle` radians about `axis` (need not be unit length).
    pub fn from_axis_angle(axis: Vec3<S>, angle: S) -> Result<Self, CoreError> {
        let axis = axis.try_normalize().ok_or_else(|| {
            CoreError::InvalidArgument("rotation axis must be non-zero".into())
        })?;
        let half = angle / S::lit(2.0);
        let s = half.sin();
        Self::new_normalize(half.cos(), axis.x * s, axis.y * s, axis.z * s)
    }

    pub fn w(&self) -> S {
        self.w
    }
    pub fn x(&self) -> S {
        self.x
    }
    pub fn y(&self) -> S {
        self.y
    }
    pub fn z(&self) -> S {
        self.z
    }

    pub fn to_array(&self) -> [S; 4] {
        [self.w, self.x, self.y, self.z]
    }

    pub fn norm(&self) -> S {
        (self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn dot(&self, o: &Self) -> S {
        self.w * o.w + self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn conjugate(&self) -> Self {
        Self {
            w: self.w,
            x: -self.x,
            y: -self.y,
            z: -self.z,
        }
    }

    pub fn negated(&self) -> Self {
        Self {
            w: -self.w,
            x: -self.x,
            y: -self.y,
            z: -self.z,
        }
    }

    /// Hamilton product `self * rhs` (apply `rhs` first), renormalized.
    pub fn compose(&self, rhs: &Self) -> Self {
        let (a, b) = (self, rhs);
        let w = a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z;
        let x = a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y;
        let y = a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x;
        let z = a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w;
        // Product of two unit quaternions cannot be zero.
        Self::new_normalize(w, x, y, z).expect("product of unit quaternions")
    }

    pub fn rotate(&self, v: Vec3<S>) -> Vec3<S> {
        let u = Vec3::new(self.x, self.y, self.z);
        let two = S::lit(2.0);
        let t = u.cross(v) * two;
        v + t * self.w + u.cross(t)
    }

    /// Shortest-arc spherical interpolation. `t = 0` yields `self`, `t = 1` yields `to`.
    pub fn slerp(&self, to: &Self, t: S) -> Self {
        if t <= S::zero() {
            return *self;
        }
        if t >= S::one() {
            return *to;
        }
        let mut end = *to;
        let mut cos = self.dot(to);
        if cos < S::zero() {
            end = end.negated();
            cos = -cos;
        }
        let (k0, k1) = if cos > S::one() - S::lit(1e-9).max(S::epsilon()) {
            (S::one() - t, t)
        } else {
            let theta = cos.min(S::one()).acos();
            let sin = theta.sin();
            (((S::one() - t) * theta).sin() / sin, (t * theta).sin() / sin)
        };
        Self::new_normalize(
            self.w * k0 + end.w * k1,
            self.x * k0 + end.x * k1,
            self.y * k0 + end.y * k1,
            self.z * k0 + end.z * k1,
        )
        .expect("slerp of unit quaternions")
    }

    pub fn cast<T: Real>(&self) -> UnitQuat<T> {
        UnitQuat::new_normalize(
            T::lit(self.w.to_f64_lossy()),
            T::lit(self.x.to_f64_lossy()),
            T::lit(self.y.to_f64_lossy()),
            T::lit(self.z.to_f64_lossy()),
        )
        .expect("cast of unit quaternion")
    }
}

/// Rigid transform: rotate by `orientation`, then translate by `position`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(bound = "S: Real")]
pub struct Pose<S: Real> {
    pub position: Vec3<S>,
    pub orientation: UnitQuat<S>,
}

impl<S: Real> Pose<S> {
    pub fn new(position: Vec3<S>, orientation: UnitQuat<S>) -> Self {
        Self {
            position,
            orientation,
        }
    }

    pub fn identity() -> Self {
        Self::default()
    }

    pub fn from_position(position: Vec3<S>) -> Self {
        Self::new(position, UnitQuat::identity())
    }

    pub fn transform_point(&self, p: Vec3<S>) -> Vec3<S> {
        self.orientation.rotate(p) + self.position
    }

    /// Uniformly scales `p` about the local origin before applying the pose.
    pub fn transform_point_scaled(&self, p: Vec3<S>, scale: S) -> Vec3<S> {
        self.orientation.rotate(p * scale) + self.position
    }

    pub fn transform_vector(&self, v: Vec3<S>) -> Vec3<S> {
        self.orientation.rotate(v)
    }

    /// `self ∘ inner`: applies `inner` first.
    pub fn compose(&self, inner: &Self) -> Self {
        Self::new(
            self.transform_point(inner.position),
            self.orientation.compose(&inner.orientation),
        )
    }

    pub fn inverse(&self) -> Self {
        let inv = self.orientation.conjugate();
        Self::new(-inv.rotate(self.position), inv)
    }

    pub fn is_finite(&self) -> bool {
        self.position.is_finite() && self.orientation.to_array().iter().all(|c| c.is_finite())
    }
}

/// Axis-aligned box given by center and strictly positive half extents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aabb<S> {
    pub center: Vec3<S>,
    pub half_extents: Vec3<S>,
}

impl<S: Real> Aabb<S> {
    pub fn new(center: Vec3<S>, half_extents: Vec3<S>) -> Self {
        Self {
            center,
            half_extents,
        }
    }

    /// Axis-aligned cube of edge `edge` centred on the origin.
    pub fn cube(edge: S) -> Self {
        Self::new(Vec3::zero(), Vec3::splat(edge / S::lit(2.0)))
    }

    pub fn from_min_max(min: Vec3<S>, max: Vec3<S>) -> Self {
        let two = S::lit(2.0);
        Self::new((min + max) / two, (max - min) / two)
    }

    /// Smallest box enclosing every point. `None` for an empty iterator.
    pub fn enclosing<I: IntoIterator<Item = Vec3<S>>>(points: I) -> Option<Self> {
        let mut it = points.into_iter();
        let first = it.next()?;
        let (lo, hi) = it.fold((first, first), |(lo, hi), p| {
            (lo.component_min(p), hi.component_max(p))
        });
        Some(Self::from_min_max(lo, hi))
    }

    pub fn is_valid(&self) -> bool {
        self.center.is_finite()
            && self.half_extents.is_finite()
            && self.half_extents.min_element() > S::zero()
    }

    pub fn min(&self) -> Vec3<S> {
        self.center - self.half_extents
    }

    pub fn max(&self) -> Vec3<S> {
        self.center + self.half_extents
    }

    pub fn corners(&self) -> [Vec3<S>; 8] {
        let c = self.center;
        let h = self.half_extents;
        let mut out = [c; 8];
        for (i, corner) in out.iter_mut().enumerate() {
            let sx = if i & 1 == 0 { -h.x } else { h.x };
            let sy = if i & 2 == 0 { -h.y } else { h.y };
            let sz = if i & 4 == 0 { -h.z } else { h.z };
            *corner = c + Vec3::new(sx, sy, sz);
        }
        out
    }

    pub fn inflate(&self, margin: S) -> Self {
        Self::new(self.center, self.half_extents + Vec3::splat(margin))
    }

    pub fn contains(&self, p: Vec3<S>, tolerance: S) -> bool {
        let d = (p - self.center).abs();
        d.x <= self.half_extents.x + tolerance
            && d.y <= self.half_extents.y + tolerance
            && d.z <= self.half_extents.z + tolerance
    }

    /// Volume of the intersection of two boxes; zero when they only touch.
    pub fn intersection_volume(&self, o: &Self) -> S {
        let lo = self.min().component_max(o.min());
        let hi = self.max().component_min(o.max());
        let d = hi - lo;
        if d.x <= S::zero() || d.y <= S::zero() || d.z <= S::zero() {
            S::zero()
        } else {
            d.x * d.y * d.z
        }
    }

    /// Enclosure of the box after scaling about the local origin and applying `pose`.
    pub fn transformed(&self, pose: &Pose<S>, scale: S) -> Self {
        Self::enclosing(
            self.corners()
                .into_iter()
                .map(|c| pose.transform_point_scaled(c, scale)),
        )
        .expect("eight corners")
    }
}

/// Half-line with unit direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawRay<S>", into = "RawRay<S>", bound = "S: Real")]
pub struct Ray<S: Real> {
    origin: Vec3<S>,
    direction: Vec3<S>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct RawRay<S> {
    origin: Vec3<S>,
    direction: Vec3<S>,
}

impl<S: Real> TryFrom<RawRay<S>> for Ray<S> {
    type Error = CoreError;
    fn try_from(r: RawRay<S>) -> Result<Self, CoreError> {
        Ray::try_new(r.origin, r.direction)
    }
}

impl<S: Real> From<Ray<S>> for RawRay<S> {
    fn from(r: Ray<S>) -> Self {
        RawRay {
            origin: r.origin,
            direction: r.direction,
        }
    }
}

impl<S: Real> Ray<S> {
    /// Accepts `direction` only if it is already unit length.
    pub fn try_new(origin: Vec3<S>, direction: Vec3<S>) -> Result<Self, CoreError> {
        if !origin.is_finite() || !direction.is_finite() {
            return Err(CoreError::InvalidArgument("ray must be finite".into()));
        }
        if (direction.norm() - S::one()).abs() > unit_tolerance::<S>() {
            return Err(CoreError::InvalidArgument(
                "ray direction must be unit length".into(),
            ));
        }
        Ok(Self { origin, direction })
    }

    /// Normalizes `direction`; fails only for a zero vector.
    pub fn new_normalize(origin: Vec3<S>, direction: Vec3<S>) -> Result<Self, CoreError> {
        let direction = direction
            .try_normalize()
            .ok_or_else(|| CoreError::InvalidArgument("ray direction is zero".into()))?;
        Self::try_new(origin, direction)
    }

    /// Ray from `origin` through `target`.
    pub fn towards(origin: Vec3<S>, target: Vec3<S>) -> Result<Self, CoreError> {
        Self::new_normalize(origin, target - origin)
    }

    pub fn origin(&self) -> Vec3<S> {
        self.origin
    }

    pub fn direction(&self) -> Vec3<S> {
        self.direction
    }

    pub fn at(&self, t: S) -> Vec3<S> {
        self.origin + self.direction * t
    }

    /// Applies a rigid transform to the ray.
    pub fn transformed(&self, pose: &Pose<S>) -> Self {
        Self {
            origin: pose.transform_point(self.origin),
            direction: pose.transform_vector(self.direction),
        }
    }
}
