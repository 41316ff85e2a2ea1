//! Target resolution for the three interaction techniques: hand grab, palm ray
//! and gaze cone.
//!
//! All functions are pure. Ties are broken deterministically by id so that the
//! same inputs always select the same target.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::geometry::{Aabb, Ray, Vec3};
use crate::model::DisplayProfile;
use crate::scalar::{tie_tolerance, Real};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SelectionConfig<S> {
    /// Margin added around content bounds for hand grabs, meters.
    pub grab_radius: S,
    /// Half-angle of the gaze selection cone, degrees.
    pub gaze_cone_half_angle: S,
    /// Rays ignore anything farther than this, meters.
    pub max_ray_distance: S,
}

impl<S: Real> Default for SelectionConfig<S> {
    fn default() -> Self {
        Self {
            grab_radius: S::lit(0.15),
            gaze_cone_half_angle: S::lit(5.0),
            max_ray_distance: S::lit(50.0),
        }
    }
}

impl<S: Real> SelectionConfig<S> {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: S| v > S::zero() && v.is_finite();
        if !positive(self.grab_radius)
            || !positive(self.gaze_cone_half_angle)
            || !positive(self.max_ray_distance)
        {
            return Err(CoreError::InvalidArgument(
                "selection thresholds must be strictly positive".into(),
            ));
        }
        if self.gaze_cone_half_angle >= S::lit(90.0) {
            return Err(CoreError::InvalidArgument(
                "gaze cone half-angle must be below 90 degrees".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit<S> {
    /// Distance along the ray, meters.
    pub t: S,
    pub point: Vec3<S>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DisplayHit<S> {
    pub display_id: String,
    pub hit: Hit<S>,
}

/// Intersects `ray` with the display's rectangle.
///
/// Both faces count. Returns `None` if the ray is parallel to the plane,
/// the plane is behind the origin or farther than `max_distance`, or the
/// plane point falls outside the rectangle.
pub fn ray_quad_intersect<S: Real>(
    ray: &Ray<S>,
    display: &DisplayProfile<S>,
    max_distance: S,
) -> Option<Hit<S>> {
    let normal = display.normal();
    let denom = ray.direction().dot(normal);
    if denom.abs() < S::lit(1e-9) {
        return None;
    }
    let t = (display.center() - ray.origin()).dot(normal) / denom;
    if !(t > S::zero()) || t > max_distance {
        return None;
    }
    let point = ray.at(t);
    let offset = point - display.center();
    let half = S::lit(0.5);
    let u = offset.dot(display.width_axis());
    let v = offset.dot(display.height_axis());
    if u.abs() <= display.width * half && v.abs() <= display.height * half {
        Some(Hit { t, point })
    } else {
        None
    }
}

/// Nearest display hit by the palm ray; ties within the tie tolerance go to
/// the lexicographically smallest id.
pub fn select_display_by_palm<'a, S, I>(
    ray: &Ray<S>,
    displays: I,
    cfg: &SelectionConfig<S>,
) -> Option<DisplayHit<S>>
where
    S: Real,
    I: IntoIterator<Item = &'a DisplayProfile<S>>,
{
    let hits: Vec<(&str, Hit<S>)> = displays
        .into_iter()
        .filter_map(|d| ray_quad_intersect(ray, d, cfg.max_ray_distance).map(|h| (d.id.as_str(), h)))
        .collect();
    let best_t = hits.iter().map(|(_, h)| h.t).fold(S::infinity(), S::min);
    hits.into_iter()
        .filter(|(_, h)| h.t - best_t < tie_tolerance::<S>())
        .min_by(|a, b| a.0.cmp(b.0))
        .map(|(id, hit)| DisplayHit {
            display_id: id.to_string(),
            hit,
        })
}

/// Angle in radians between the gaze direction and the direction to `point`,
/// or `None` if the point is not strictly in front of the gaze origin.
pub fn gaze_angle<S: Real>(gaze: &Ray<S>, point: Vec3<S>) -> Option<S> {
    let to = point - gaze.origin();
    let along = to.dot(gaze.direction());
    if !(along > S::zero()) {
        return None;
    }
    // atan2 of |cross| and dot stays accurate for tiny angles, unlike acos.
    Some(gaze.direction().cross(to).norm().atan2(along))
}

/// Picks the candidate centre closest in angle to the gaze direction, within
/// the cone. Ties go to the nearer candidate, then to the smaller id.
pub fn select_content_by_gaze<'a, S, I>(
    gaze: &Ray<S>,
    candidates: I,
    cfg: &SelectionConfig<S>,
) -> Option<String>
where
    S: Real,
    I: IntoIterator<Item = (&'a str, Vec3<S>)>,
{
    let limit = cfg.gaze_cone_half_angle.to_radians();
    let inside: Vec<(&str, S, S)> = candidates
        .into_iter()
        .filter_map(|(id, center)| {
            let angle = gaze_angle(gaze, center)?;
            (angle <= limit).then(|| (id, angle, center.distance(gaze.origin())))
        })
        .collect();
    let best_angle = inside.iter().map(|c| c.1).fold(S::infinity(), S::min);
    let tied: Vec<_> = inside
        .into_iter()
        .filter(|c| c.1 - best_angle < tie_tolerance::<S>())
        .collect();
    let best_dist = tied.iter().map(|c| c.2).fold(S::infinity(), S::min);
    tied.into_iter()
        .filter(|c| c.2 - best_dist < tie_tolerance::<S>())
        .min_by(|a, b| a.0.cmp(b.0))
        .map(|c| c.0.to_string())
}

/// Picks the content whose bounds, inflated by the grab radius, contain the
/// hand; nearest centre wins, ties by id.
pub fn select_content_by_grab<'a, S, I>(
    hand: Vec3<S>,
    candidates: I,
    cfg: &SelectionConfig<S>,
) -> Option<String>
where
    S: Real,
    I: IntoIterator<Item = (&'a str, Aabb<S>)>,
{
    let inside: Vec<(&str, S)> = candidates
        .into_iter()
        .filter(|(_, b)| b.inflate(cfg.grab_radius).contains(hand, S::zero()))
        .map(|(id, b)| (id, b.center.distance(hand)))
        .collect();
    let best = inside.iter().map(|c| c.1).fold(S::infinity(), S::min);
    inside
        .into_iter()
        .filter(|c| c.1 - best < tie_tolerance::<S>())
        .min_by(|a, b| a.0.cmp(b.0))
        .map(|c| c.0.to_string())
}

/// Display whose rectangle is closest to `point`, if within `reach` meters.
///
/// Used for plain drag-and-drop: the content is released next to a display
/// rather than aimed at it.
pub fn select_display_by_proximity<'a, S, I>(point: Vec3<S>, displays: I, reach: S) -> Option<String>
where
    S: Real,
    I: IntoIterator<Item = &'a DisplayProfile<S>>,
{
    let near: Vec<(&str, S)> = displays
        .into_iter()
        .map(|d| (d.id.as_str(), distance_to_quad(point, d)))
        .filter(|(_, dist)| *dist <= reach)
        .collect();
    let best = near.iter().map(|c| c.1).fold(S::infinity(), S::min);
    near.into_iter()
        .filter(|c| c.1 - best < tie_tolerance::<S>())
        .min_by(|a, b| a.0.cmp(b.0))
        .map(|c| c.0.to_string())
}

/// Euclidean distance from `point` to the display rectangle.
pub fn distance_to_quad<S: Real>(point: Vec3<S>, display: &DisplayProfile<S>) -> S {
    let offset = point - display.center();
    let half = S::lit(0.5);
    let u = offset.dot(display.width_axis());
    let v = offset.dot(display.height_axis());
    let n = offset.dot(display.normal());
    let du = (u.abs() - display.width * half).max(S::zero());
    let dv = (v.abs() - display.height * half).max(S::zero());
    (du * du + dv * dv + n * n).sqrt()
}
