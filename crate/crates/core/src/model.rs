//! Content items, display profiles and their validation.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, CoreError, Result};
use crate::geometry::{Aabb, Pose, Vec3};
use crate::scalar::Real;

/// 8-bit RGBA colour, serialized as a 4-element integer array.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rgba(pub [u8; 4]);

impl Rgba {
    pub const WHITE: Rgba = Rgba([255, 255, 255, 255]);
    /// Neutral grey used for schematic renderings.
    pub const SCHEMATIC_GREY: Rgba = Rgba([200, 200, 200, 255]);
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Appearance<S> {
    pub color: Rgba,
    pub opacity: S,
    pub scale: S,
}

impl<S: Real> Appearance<S> {
    pub fn new(color: Rgba, opacity: S, scale: S) -> Self {
        Self {
            color,
            opacity,
            scale,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Real")]
pub struct Component<S: Real> {
    pub id: String,
    /// Pose relative to the assembly origin.
    pub local_pose: Pose<S>,
    /// Bounds in the component's own frame.
    pub bounds: Aabb<S>,
    pub label: String,
    pub detail_text: String,
}

impl<S: Real> Component<S> {
    /// Center of the component expressed in the assembly frame.
    pub fn assembly_center(&self) -> Vec3<S> {
        self.local_pose.transform_point(self.bounds.center)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ContentKind {
    Primitive,
    Assembly,
    Visualization,
}

impl ContentKind {
    pub const ALL: [ContentKind; 3] = [
        ContentKind::Primitive,
        ContentKind::Assembly,
        ContentKind::Visualization,
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Real")]
pub struct ContentItem<S: Real> {
    pub id: String,
    pub kind: ContentKind,
    /// Local bounds of the whole item.
    pub bounds: Aabb<S>,
    #[serde(default)]
    pub components: Vec<Component<S>>,
    pub appearance: Appearance<S>,
    pub title: String,
}

impl<S: Real> ContentItem<S> {
    /// Largest edge of the local bounds, `2 * max(half_extents)`.
    pub fn max_extent(&self) -> S {
        S::lit(2.0) * self.bounds.half_extents.max_element()
    }

    pub fn component(&self, id: &str) -> Option<&Component<S>> {
        self.components.iter().find(|c| c.id == id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DisplayKind {
    WallProjector,
    TabletopTouch,
    Smartphone,
    Laptop,
    MrHeadset,
}

impl DisplayKind {
    pub const ALL: [DisplayKind; 5] = [
        DisplayKind::WallProjector,
        DisplayKind::TabletopTouch,
        DisplayKind::Smartphone,
        DisplayKind::Laptop,
        DisplayKind::MrHeadset,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Audience {
    Engineer,
    Designer,
    Manager,
    General,
}

impl Audience {
    pub const ALL: [Audience; 4] = [
        Audience::Engineer,
        Audience::Designer,
        Audience::Manager,
        Audience::General,
    ];
}

/// A registered display surface. The surface is a `width × height` rectangle
/// centred on `surface_pose`, spanning its local X (width) and Y (height)
/// axes; its normal is the local +Z axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Real")]
pub struct DisplayProfile<S: Real> {
    pub id: String,
    pub kind: DisplayKind,
    pub surface_pose: Pose<S>,
    pub width: S,
    pub height: S,
    pub supports_3d: bool,
    pub audience: Audience,
    pub opacity_multiplier: S,
}

impl<S: Real> DisplayProfile<S> {
    pub fn normal(&self) -> Vec3<S> {
        self.surface_pose.transform_vector(Vec3::unit_z())
    }

    pub fn width_axis(&self) -> Vec3<S> {
        self.surface_pose.transform_vector(Vec3::unit_x())
    }

    pub fn height_axis(&self) -> Vec3<S> {
        self.surface_pose.transform_vector(Vec3::unit_y())
    }

    pub fn center(&self) -> Vec3<S> {
        self.surface_pose.position
    }

    pub fn min_dimension(&self) -> S {
        self.width.min(self.height)
    }

    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.id.is_empty() {
            problems.push("display id is empty");
        }
        if !(self.width > S::zero() && self.width.is_finite()) {
            problems.push("width must be positive");
        }
        if !(self.height > S::zero() && self.height.is_finite()) {
            problems.push("height must be positive");
        }
        if !(self.opacity_multiplier > S::zero() && self.opacity_multiplier <= S::one()) {
            problems.push("opacity_multiplier must be in (0, 1]");
        }
        if !self.surface_pose.is_finite() {
            problems.push("surface pose must be finite");
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(CoreError::InvalidArgument(format!(
                "display {:?}: {}",
                self.id,
                problems.join(", ")
            )))
        }
    }
}

/// One broken `ContentItem` invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    EmptyId,
    InvalidBounds,
    AssemblyWithoutComponents,
    ComponentsOnNonAssembly,
    OpacityOutOfRange,
    ScaleNotPositive,
    DuplicateComponentId(String),
    EmptyComponentId,
    InvalidComponentBounds(String),
    NonFiniteComponentPose(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyId => write!(f, "id must not be empty"),
            Violation::InvalidBounds => write!(f, "bounds must be finite with positive half extents"),
            Violation::AssemblyWithoutComponents => write!(f, "assembly must have components"),
            Violation::ComponentsOnNonAssembly => write!(f, "only assemblies may have components"),
            Violation::OpacityOutOfRange => write!(f, "opacity out of range"),
            Violation::ScaleNotPositive => write!(f, "scale must be positive"),
            Violation::DuplicateComponentId(id) => write!(f, "duplicate component id {id:?}"),
            Violation::EmptyComponentId => write!(f, "component id must not be empty"),
            Violation::InvalidComponentBounds(id) => {
                write!(f, "component {id:?} has invalid bounds")
            }
            Violation::NonFiniteComponentPose(id) => {
                write!(f, "component {id:?} has a non-finite pose")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn messages(&self) -> Vec<String> {
        self.violations.iter().map(|v| v.to_string()).collect()
    }
}

/// Lists every invariant `item` violates. An empty report means the item is valid.
pub fn validate_content<S: Real>(item: &ContentItem<S>) -> ValidationReport {
    let mut violations = Vec::new();
    if item.id.is_empty() {
        violations.push(Violation::EmptyId);
    }
    if !item.bounds.is_valid() {
        violations.push(Violation::InvalidBounds);
    }
    match (item.kind, item.components.is_empty()) {
        (ContentKind::Assembly, true) => violations.push(Violation::AssemblyWithoutComponents),
        (ContentKind::Primitive | ContentKind::Visualization, false) => {
            violations.push(Violation::ComponentsOnNonAssembly)
        }
        _ => {}
    }
    let opacity = item.appearance.opacity;
    if !(opacity >= S::zero() && opacity <= S::one()) {
        violations.push(Violation::OpacityOutOfRange);
    }
    let scale = item.appearance.scale;
    if !(scale > S::zero() && scale.is_finite()) {
        violations.push(Violation::ScaleNotPositive);
    }
    let mut seen = BTreeSet::new();
    for c in &item.components {
        if c.id.is_empty() {
            violations.push(Violation::EmptyComponentId);
        } else if !seen.insert(c.id.as_str()) {
            violations.push(Violation::DuplicateComponentId(c.id.clone()));
        }
        if !c.bounds.is_valid() {
            violations.push(Violation::InvalidComponentBounds(c.id.clone()));
        }
        if !c.local_pose.is_finite() {
            violations.push(Violation::NonFiniteComponentPose(c.id.clone()));
        }
    }
    ValidationReport { violations }
}

/// World-space box enclosing the item's local bounds after scaling by `scale`
/// and applying `pose`.
pub fn world_bounds<S: Real>(item: &ContentItem<S>, pose: &Pose<S>, scale: S) -> Result<Aabb<S>> {
    if !(scale > S::zero() && scale.is_finite()) {
        return Err(CoreError::InvalidArgument(format!(
            "scale must be positive, got {scale}"
        )));
    }
    Ok(item.bounds.transformed(pose, scale))
}

/// Parses a content library: one JSON `ContentItem` per non-blank line.
///
/// Every item is validated and ids must be unique across the file.
pub fn parse_library<S: Real>(path: &Path, text: &str) -> Result<Vec<ContentItem<S>>> {
    let mut items = Vec::new();
    let mut ids = BTreeSet::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let item: ContentItem<S> = serde_json::from_str(line).map_err(|e| {
            ConfigError::new(path, format!("invalid content item: {e}")).at(line_no, e.column())
        })?;
        let report = validate_content(&item);
        if !report.is_valid() {
            return Err(ConfigError::new(
                path,
                format!("content {:?}: {}", item.id, report.messages().join("; ")),
            )
            .at(line_no, 1)
            .into());
        }
        if !ids.insert(item.id.clone()) {
            return Err(ConfigError::new(path, format!("duplicate content id {:?}", item.id))
                .at(line_no, 1)
                .into());
        }
        items.push(item);
    }
    Ok(items)
}

pub fn load_library<S: Real>(path: &Path) -> Result<Vec<ContentItem<S>>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::new(path, format!("cannot read content library: {e}")))?;
    parse_library(path, &text)
}

/// Serializes items in the content library format.
pub fn write_library<S: Real>(items: &[ContentItem<S>]) -> String {
    let mut out = String::new();
    for item in items {
        out.push_str(&serde_json::to_string(item).expect("content items serialize"));
        out.push('\n');
    }
    out
}

/// Default control-space position for the `index`-th content item: a row at
/// chest height, 0.3 m apart, 0.4 m in front of the operator.
pub fn control_slot_pose<S: Real>(index: usize) -> Pose<S> {
    Pose::from_position(Vec3::new(
        S::lit(-0.6 + 0.3 * index as f64),
        S::lit(1.2),
        S::lit(0.4),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::UnitQuat;

    fn cube() -> ContentItem<f64> {
        ContentItem {
            id: "cube".into(),
            kind: ContentKind::Primitive,
            bounds: Aabb::cube(1.0),
            components: vec![],
            appearance: Appearance::new(Rgba([10, 20, 30, 255]), 1.0, 1.0),
            title: "Cube".into(),
        }
    }

    #[test]
    fn unit_cube_is_valid() {
        assert!(validate_content(&cube()).is_valid());
    }

    #[test]
    fn assembly_without_components_is_reported() {
        let mut item = cube();
        item.kind = ContentKind::Assembly;
        let report = validate_content(&item);
        assert_eq!(report.messages(), vec!["assembly must have components"]);
    }

    #[test]
    fn opacity_above_one_is_reported() {
        let mut item = cube();
        item.appearance.opacity = 1.5;
        assert_eq!(validate_content(&item).messages(), vec!["opacity out of range"]);
    }

    #[test]
    fn multiple_violations_all_listed() {
        let mut item = cube();
        item.id.clear();
        item.appearance.scale = 0.0;
        item.appearance.opacity = -0.1;
        let report = validate_content(&item);
        assert_eq!(report.violations.len(), 3);
    }

    #[test]
    fn world_bounds_identity_and_scale() {
        let item = cube();
        let b = world_bounds(&item, &Pose::identity(), 1.0).unwrap();
        assert_eq!(b.center, Vec3::zero());
        assert_eq!(b.half_extents, Vec3::splat(0.5));
        let b2 = world_bounds(&item, &Pose::identity(), 2.0).unwrap();
        assert_eq!(b2.half_extents, Vec3::splat(1.0));
    }

    #[test]
    fn world_bounds_rejects_bad_scale() {
        let item = cube();
        assert!(matches!(
            world_bounds(&item, &Pose::identity(), 0.0),
            Err(CoreError::InvalidArgument(_))
        ));
        assert!(world_bounds(&item, &Pose::identity(), -1.0).is_err());
    }

    #[test]
    fn world_bounds_rotated_45_degrees() {
        // Oracle: rotate the 8 corners by hand and take the componentwise max.
        let (s, c) = std::f64::consts::FRAC_PI_4.sin_cos();
        let mut hi = [f64::MIN; 3];
        for &x in &[-0.5, 0.5] {
            for &y in &[-0.5, 0.5] {
                for &z in &[-0.5f64, 0.5] {
                    let p = [c * x - s * y, s * x + c * y, z];
                    for k in 0..3 {
                        hi[k] = hi[k].max(p[k]);
                    }
                }
            }
        }
        assert!((hi[0] - 0.7071067811865476).abs() < 1e-12);
        let q = UnitQuat::from_axis_angle(Vec3::unit_z(), std::f64::consts::FRAC_PI_4).unwrap();
        let b = world_bounds(&cube(), &Pose::new(Vec3::zero(), q), 1.0).unwrap();
        assert!((b.half_extents.x - hi[0]).abs() < 1e-12);
        assert!((b.half_extents.y - hi[1]).abs() < 1e-12);
        assert!((b.half_extents.z - hi[2]).abs() < 1e-12);
    }

    #[test]
    fn library_reports_line_of_bad_item() {
        let good = serde_json::to_string(&cube()).unwrap();
        let mut dup = cube();
        dup.appearance.opacity = 3.0;
        dup.id = "other".into();
        let text = format!("{good}\n\n{}\n", serde_json::to_string(&dup).unwrap());
        let err = parse_library::<f64>(Path::new("lib.jsonl"), &text).unwrap_err();
        match err {
            CoreError::Config(c) => {
                assert_eq!(c.location.map(|l| l.0), Some(3));
                assert!(c.message.contains("opacity out of range"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn library_rejects_duplicate_ids() {
        let line = serde_json::to_string(&cube()).unwrap();
        let text = format!("{line}\n{line}\n");
        assert!(parse_library::<f64>(Path::new("x"), &text).is_err());
    }

    #[test]
    fn library_schema_uses_snake_case_and_color_arrays() {
        let json = serde_json::to_value(cube()).unwrap();
        assert_eq!(json["appearance"]["color"], serde_json::json!([10, 20, 30, 255]));
        assert!(json.get("half_extents").is_none());
        assert!(json["bounds"].get("half_extents").is_some());
        let items = parse_library::<f64>(Path::new("x"), &write_library(&[cube()])).unwrap();
        assert_eq!(items, vec![cube()]);
    }

    #[test]
    fn display_validation() {
        let mut d = DisplayProfile::<f64> {
            id: "wall".into(),
            kind: DisplayKind::WallProjector,
            surface_pose: Pose::identity(),
            width: 2.0,
            height: 1.0,
            supports_3d: false,
            audience: Audience::General,
            opacity_multiplier: 1.0,
        };
        assert!(d.validate().is_ok());
        d.opacity_multiplier = 0.0;
        assert!(d.validate().is_err());
        d.opacity_multiplier = 0.5;
        d.height = 0.0;
        assert!(d.validate().is_err());
    }
}
