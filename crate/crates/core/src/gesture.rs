//! Operator gesture events, already classified by the client.

use serde::{Deserialize, Serialize};

use crate::geometry::{Pose, Ray, Vec3};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GestureAction {
    /// Send held content toward a display.
    Push,
    /// Draw displayed content back to the operator.
    Pull,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Real")]
pub enum GesturePayload<S: Real> {
    /// Hand closes around content within reach.
    Grab { hand_pos: Vec3<S> },
    /// Hand opens. With a ray, the content is thrown along it; without one it
    /// drops onto a display within reach or stays in control space.
    Release {
        release_pose: Pose<S>,
        #[serde(default)]
        ray: Option<Ray<S>>,
    },
    /// Palm raised toward a display; the ray leaves the palm centre along its normal.
    PalmRay { ray: Ray<S>, action: GestureAction },
    /// Gaze picks the target, a pinch triggers the action.
    GazePinch { gaze: Ray<S>, action: GestureAction },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Real")]
pub struct GestureEvent<S: Real> {
    /// Strictly increasing per operator session.
    pub seq: u64,
    /// Client timestamp, seconds.
    pub time: S,
    pub payload: GesturePayload<S>,
}
