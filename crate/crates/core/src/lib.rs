//! Core model for cross-display content transfer.
//!
//! An operator holds virtual content in a *control space* and sends it to
//! registered displays (the *display space*) by grabbing, aiming a palm ray,
//! or gazing. This crate holds the pure parts of that system:
//!
//! * [`geometry`]: vectors, quaternions, poses, boxes, rays
//! * [`model`]: content items, display profiles, validation
//! * [`lifecycle`]: the per-item placement state machine
//! * [`gesture`]: classified operator input events
//! * [`selection`]: grab, palm-ray and gaze target resolution
//! * [`transfer`]: transfer planning and interpolation (scale fit, opacity,
//!   colour and orientation persistence)
//! * [`interpreter`]: rule-driven representations, exploded assembly views
//! * [`world`]: the replicated state, changes and deltas
//!
//! Everything is generic over the scalar type ([`Real`], implemented for `f32`
//! and `f64`). The `D*` aliases below fix the scalar to `f64`, which is what
//! the hub and the simulator use; `F*` aliases cover the single-precision
//! geometry.

pub mod error;
pub mod geometry;
pub mod gesture;
pub mod interpreter;
pub mod lifecycle;
pub mod model;
pub mod scalar;
pub mod selection;
pub mod transfer;
pub mod world;

pub use error::{ConfigError, CoreError, Result};
pub use geometry::{Aabb, Pose, Ray, UnitQuat, Vec3};
pub use gesture::{GestureAction, GestureEvent, GesturePayload};
pub use interpreter::{
    explode_assembly, interpret, load_ruleset, match_rule, parse_ruleset, Produce, Representation,
    RepresentationMode, Rule, RuleMatch, RuleSet,
};
pub use lifecycle::{apply_transition, Arrival, LifecycleEvent, PlacementState, StateKind, TransferDirection};
pub use model::{
    load_library, validate_content, world_bounds, Appearance, Audience, Component, ContentItem,
    ContentKind, DisplayKind, DisplayProfile, Rgba, ValidationReport, Violation,
};
pub use scalar::Real;
pub use selection::{
    ray_quad_intersect, select_content_by_gaze, select_content_by_grab, select_display_by_palm,
    SelectionConfig,
};
pub use transfer::{
    fit_scale, plan_placement, plan_retrieval, step_transit, Easing, TransferPlan, TransferPolicy,
    TransitFrame,
};
pub use world::{replay, Change, Delta, Presentation, ReplayError, Transit, WorldState};

pub type DVec3 = Vec3<f64>;
pub type DQuat = UnitQuat<f64>;
pub type DPose = Pose<f64>;
pub type DAabb = Aabb<f64>;
pub type DRay = Ray<f64>;
pub type DAppearance = Appearance<f64>;
pub type DComponent = Component<f64>;
pub type DContentItem = ContentItem<f64>;
pub type DDisplayProfile = DisplayProfile<f64>;
pub type DPlacementState = PlacementState<f64>;
pub type DLifecycleEvent = LifecycleEvent<f64>;
pub type DSelectionConfig = SelectionConfig<f64>;
pub type DTransferPolicy = TransferPolicy<f64>;
pub type DTransferPlan = TransferPlan<f64>;
pub type DRepresentation = Representation<f64>;
pub type DRuleSet = RuleSet<f64>;
pub type DWorldState = WorldState<f64>;
pub type DDelta = Delta<f64>;
pub type DChange = Change<f64>;
pub type DGestureEvent = GestureEvent<f64>;
pub type DGesturePayload = GesturePayload<f64>;

pub type FVec3 = Vec3<f32>;
pub type FQuat = UnitQuat<f32>;
pub type FPose = Pose<f32>;
pub type FAabb = Aabb<f32>;
pub type FRay = Ray<f32>;
