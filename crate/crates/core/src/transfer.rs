//! Basic transfer interface: plans the motion of content between the
//! operator's hand and a display anchor and interpolates it over time.
//!
//! Scale is fitted to the target display and opacity is multiplied by the
//! display's factor. Colour is never read or written here, and the release
//! orientation is carried through unchanged.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::geometry::{Pose, Vec3};
use crate::lifecycle::{PlacementState, TransferDirection};
use crate::model::{Appearance, ContentItem, DisplayProfile};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Easing {
    Linear,
    Smoothstep,
}

impl Easing {
    pub fn apply<S: Real>(self, u: S) -> S {
        match self {
            Easing::Linear => u,
            Easing::Smoothstep => u * u * (S::lit(3.0) - S::lit(2.0) * u),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TransferPolicy<S> {
    /// Seconds from release to arrival.
    pub duration: S,
    pub easing: Easing,
    /// Share of the display's smaller dimension the content may occupy.
    pub fit_fraction: S,
    /// Distance in front of the display surface, along its normal.
    pub anchor_offset: S,
}

impl<S: Real> Default for TransferPolicy<S> {
    fn default() -> Self {
        Self {
            duration: S::lit(1.0),
            easing: Easing::Smoothstep,
            fit_fraction: S::lit(0.8),
            anchor_offset: S::lit(0.05),
        }
    }
}

impl<S: Real> TransferPolicy<S> {
    pub fn validate(&self) -> Result<()> {
        if !(self.duration > S::zero() && self.duration.is_finite()) {
            return Err(CoreError::InvalidArgument("duration must be positive".into()));
        }
        if !(self.fit_fraction > S::zero() && self.fit_fraction <= S::one()) {
            return Err(CoreError::InvalidArgument(
                "fit_fraction must be in (0, 1]".into(),
            ));
        }
        if !self.anchor_offset.is_finite() {
            return Err(CoreError::InvalidArgument("anchor_offset must be finite".into()));
        }
        Ok(())
    }
}

/// Pose, uniform scale and opacity of content at one instant of a transit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Real")]
pub struct TransitFrame<S: Real> {
    pub pose: Pose<S>,
    pub scale: S,
    pub opacity: S,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Real")]
pub struct TransferPlan<S: Real> {
    pub plan_id: String,
    pub content_id: String,
    pub direction: TransferDirection,
    pub start: TransitFrame<S>,
    pub end: TransitFrame<S>,
    pub duration: S,
    pub easing: Easing,
}

/// Uniform scale that makes the item's largest edge span `fit_fraction` of the
/// display's smaller side.
pub fn fit_scale<S: Real>(
    item: &ContentItem<S>,
    display: &DisplayProfile<S>,
    policy: &TransferPolicy<S>,
) -> S {
    policy.fit_fraction * display.min_dimension() / item.max_extent()
}

/// Lateral offset, in multiples of `0.1 × width`, for the `slot`-th item on a
/// display: 0, +1, −1, +2, −2, … ±4, then wraps.
pub fn slot_offset(slot: usize) -> i32 {
    const PATTERN: [i32; 9] = [0, 1, -1, 2, -2, 3, -3, 4, -4];
    PATTERN[slot % PATTERN.len()]
}

pub const SLOT_COUNT: usize = 9;

/// Anchor point in front of the display for the given stacking slot.
pub fn display_anchor<S: Real>(
    display: &DisplayProfile<S>,
    policy: &TransferPolicy<S>,
    slot: usize,
) -> Vec3<S> {
    let lateral = S::lit(0.1 * slot_offset(slot) as f64) * display.width;
    display.center() + display.normal() * policy.anchor_offset + display.width_axis() * lateral
}

/// Plans a placement into the display's first slot.
pub fn plan_placement<S: Real>(
    plan_id: impl Into<String>,
    item: &ContentItem<S>,
    release_pose: &Pose<S>,
    display: &DisplayProfile<S>,
    current: &Appearance<S>,
    policy: &TransferPolicy<S>,
) -> TransferPlan<S> {
    plan_placement_in_slot(plan_id, item, release_pose, display, current, policy, 0)
}

pub fn plan_placement_in_slot<S: Real>(
    plan_id: impl Into<String>,
    item: &ContentItem<S>,
    release_pose: &Pose<S>,
    display: &DisplayProfile<S>,
    current: &Appearance<S>,
    policy: &TransferPolicy<S>,
    slot: usize,
) -> TransferPlan<S> {
    TransferPlan {
        plan_id: plan_id.into(),
        content_id: item.id.clone(),
        direction: TransferDirection::Placement,
        start: TransitFrame {
            pose: *release_pose,
            scale: current.scale,
            opacity: current.opacity,
        },
        end: TransitFrame {
            pose: Pose::new(
                display_anchor(display, policy, slot),
                release_pose.orientation,
            ),
            scale: fit_scale(item, display, policy),
            opacity: current.opacity * display.opacity_multiplier,
        },
        duration: policy.duration,
        easing: policy.easing,
    }
}

/// Scale and opacity content currently shows on its display.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisplayedAppearance<S> {
    pub scale: S,
    pub opacity: S,
}

/// Plans a retrieval from the display anchor back to the hand, restoring the
/// control-space scale and opacity. Fails unless `state` is `Displayed`.
pub fn plan_retrieval<S: Real>(
    plan_id: impl Into<String>,
    item: &ContentItem<S>,
    state: &PlacementState<S>,
    displayed: DisplayedAppearance<S>,
    hand_pose: &Pose<S>,
    original: &Appearance<S>,
    policy: &TransferPolicy<S>,
) -> Result<TransferPlan<S>> {
    let PlacementState::Displayed { anchor_pose, .. } = state else {
        return Err(CoreError::InvalidState(format!(
            "content {:?} is not displayed ({state})",
            item.id
        )));
    };
    Ok(TransferPlan {
        plan_id: plan_id.into(),
        content_id: item.id.clone(),
        direction: TransferDirection::Retrieval,
        start: TransitFrame {
            pose: *anchor_pose,
            scale: displayed.scale,
            opacity: displayed.opacity,
        },
        end: TransitFrame {
            pose: Pose::new(hand_pose.position, anchor_pose.orientation),
            scale: original.scale,
            opacity: original.opacity,
        },
        duration: policy.duration,
        easing: policy.easing,
    })
}

/// Interpolated frame `t` seconds after the transit started.
///
/// `t = 0` returns `start` exactly and any `t >= duration` returns `end` exactly.
pub fn step_transit<S: Real>(plan: &TransferPlan<S>, t: S) -> Result<TransitFrame<S>> {
    if !(t >= S::zero()) {
        return Err(CoreError::InvalidArgument(format!(
            "transit time must be non-negative, got {t}"
        )));
    }
    let u = (t / plan.duration).min(S::one());
    if u <= S::zero() {
        return Ok(plan.start);
    }
    if u >= S::one() {
        return Ok(plan.end);
    }
    let e = plan.easing.apply(u);
    let (a, b) = (&plan.start, &plan.end);
    Ok(TransitFrame {
        pose: Pose::new(
            a.pose.position.lerp(b.pose.position, e),
            a.pose.orientation.slerp(&b.pose.orientation, e),
        ),
        scale: a.scale + (b.scale - a.scale) * e,
        opacity: a.opacity + (b.opacity - a.opacity) * e,
    })
}
