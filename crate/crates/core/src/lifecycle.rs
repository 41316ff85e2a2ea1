//! Placement lifecycle of a content item.
//!
//! ```text
//! InControl --BeginPlacement--> InTransit(Placement) --TransitComplete--> Displayed
//! Displayed --BeginRetrieval--> InTransit(Retrieval) --TransitComplete--> InControl
//! InTransit(*) --Cancel--> state the transit started from
//! ```
//!
//! Every other (state, event) pair is rejected and leaves the state untouched.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::geometry::Pose;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TransferDirection {
    /// Control space to display space.
    Placement,
    /// Display space back to control space.
    Retrieval,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Real")]
pub enum PlacementState<S: Real> {
    InControl {
        hold_pose: Pose<S>,
    },
    InTransit {
        plan_id: String,
        direction: TransferDirection,
        /// State the transit started from; restored on cancel.
        origin: Box<PlacementState<S>>,
    },
    Displayed {
        display_id: String,
        representation_id: String,
        anchor_pose: Pose<S>,
    },
}

/// Coarse classification used for transition tables and fuzzing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StateKind {
    InControl,
    PlacingInTransit,
    RetrievingInTransit,
    Displayed,
}

impl StateKind {
    pub const ALL: [StateKind; 4] = [
        StateKind::InControl,
        StateKind::PlacingInTransit,
        StateKind::RetrievingInTransit,
        StateKind::Displayed,
    ];
}

impl<S: Real> PlacementState<S> {
    pub fn kind(&self) -> StateKind {
        match self {
            PlacementState::InControl { .. } => StateKind::InControl,
            PlacementState::InTransit {
                direction: TransferDirection::Placement,
                ..
            } => StateKind::PlacingInTransit,
            PlacementState::InTransit {
                direction: TransferDirection::Retrieval,
                ..
            } => StateKind::RetrievingInTransit,
            PlacementState::Displayed { .. } => StateKind::Displayed,
        }
    }

    pub fn display_id(&self) -> Option<&str> {
        match self {
            PlacementState::Displayed { display_id, .. } => Some(display_id),
            _ => None,
        }
    }

    pub fn plan_id(&self) -> Option<&str> {
        match self {
            PlacementState::InTransit { plan_id, .. } => Some(plan_id),
            _ => None,
        }
    }

    pub fn is_in_control(&self) -> bool {
        matches!(self, PlacementState::InControl { .. })
    }

    pub fn is_displayed(&self) -> bool {
        matches!(self, PlacementState::Displayed { .. })
    }
}

impl<S: Real> fmt::Display for PlacementState<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlacementState::InControl { .. } => write!(f, "in control space"),
            PlacementState::InTransit {
                plan_id, direction, ..
            } => write!(f, "in transit ({direction:?}, plan {plan_id})"),
            PlacementState::Displayed { display_id, .. } => write!(f, "displayed on {display_id}"),
        }
    }
}

/// Where a completed transit ends up.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Real")]
pub enum Arrival<S: Real> {
    OnDisplay {
        display_id: String,
        representation_id: String,
        anchor_pose: Pose<S>,
    },
    InControl {
        hold_pose: Pose<S>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Real")]
pub enum LifecycleEvent<S: Real> {
    BeginPlacement { plan_id: String },
    BeginRetrieval { plan_id: String },
    TransitComplete(Arrival<S>),
    Cancel,
}

impl<S: Real> LifecycleEvent<S> {
    pub fn name(&self) -> &'static str {
        match self {
            LifecycleEvent::BeginPlacement { .. } => "BeginPlacement",
            LifecycleEvent::BeginRetrieval { .. } => "BeginRetrieval",
            LifecycleEvent::TransitComplete(Arrival::OnDisplay { .. }) => "TransitComplete(display)",
            LifecycleEvent::TransitComplete(Arrival::InControl { .. }) => "TransitComplete(control)",
            LifecycleEvent::Cancel => "Cancel",
        }
    }
}

/// Applies one lifecycle event. Illegal pairs return `TransitionRejected`.
pub fn apply_transition<S: Real>(
    state: &PlacementState<S>,
    event: &LifecycleEvent<S>,
) -> Result<PlacementState<S>> {
    use PlacementState as P;
    use TransferDirection::{Placement, Retrieval};

    let next = match (state, event) {
        (P::InControl { .. }, LifecycleEvent::BeginPlacement { plan_id }) => P::InTransit {
            plan_id: plan_id.clone(),
            direction: Placement,
            origin: Box::new(state.clone()),
        },
        (P::Displayed { .. }, LifecycleEvent::BeginRetrieval { plan_id }) => P::InTransit {
            plan_id: plan_id.clone(),
            direction: Retrieval,
            origin: Box::new(state.clone()),
        },
        (
            P::InTransit {
                direction: Placement,
                ..
            },
            LifecycleEvent::TransitComplete(Arrival::OnDisplay {
                display_id,
                representation_id,
                anchor_pose,
            }),
        ) => P::Displayed {
            display_id: display_id.clone(),
            representation_id: representation_id.clone(),
            anchor_pose: *anchor_pose,
        },
        (
            P::InTransit {
                direction: Retrieval,
                ..
            },
            LifecycleEvent::TransitComplete(Arrival::InControl { hold_pose }),
        ) => P::InControl {
            hold_pose: *hold_pose,
        },
        (P::InTransit { origin, .. }, LifecycleEvent::Cancel) => (**origin).clone(),
        _ => {
            return Err(CoreError::TransitionRejected {
                state: state.to_string(),
                event: event.name().to_string(),
            })
        }
    };
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec3;

    fn in_control() -> PlacementState<f64> {
        PlacementState::InControl {
            hold_pose: Pose::from_position(Vec3::new(0.0, 1.0, 0.0)),
        }
    }

    fn displayed() -> PlacementState<f64> {
        PlacementState::Displayed {
            display_id: "wall".into(),
            representation_id: "rep".into(),
            anchor_pose: Pose::identity(),
        }
    }

    #[test]
    fn begin_placement_from_control() {
        let s = apply_transition(
            &in_control(),
            &LifecycleEvent::BeginPlacement {
                plan_id: "p1".into(),
            },
        )
        .unwrap();
        assert_eq!(s.kind(), StateKind::PlacingInTransit);
        assert_eq!(s.plan_id(), Some("p1"));
    }

    #[test]
    fn placement_while_displayed_is_rejected() {
        let err = apply_transition(
            &displayed(),
            &LifecycleEvent::BeginPlacement {
                plan_id: "p".into(),
            },
        )
        .unwrap_err();
        assert!(matches!(err, CoreError::TransitionRejected { .. }));
    }

    #[test]
    fn retrieval_while_in_control_is_rejected() {
        assert!(apply_transition(
            &in_control(),
            &LifecycleEvent::BeginRetrieval {
                plan_id: "p".into()
            }
        )
        .is_err());
    }

    #[test]
    fn cancel_restores_origin() {
        let start = displayed();
        let moving = apply_transition(
            &start,
            &LifecycleEvent::BeginRetrieval {
                plan_id: "p".into(),
            },
        )
        .unwrap();
        assert_eq!(apply_transition(&moving, &LifecycleEvent::Cancel).unwrap(), start);
    }

    #[test]
    fn arrival_must_match_direction() {
        let moving = apply_transition(
            &in_control(),
            &LifecycleEvent::BeginPlacement {
                plan_id: "p".into(),
            },
        )
        .unwrap();
        let wrong = LifecycleEvent::TransitComplete(Arrival::InControl {
            hold_pose: Pose::identity(),
        });
        assert!(apply_transition(&moving, &wrong).is_err());
    }
}
