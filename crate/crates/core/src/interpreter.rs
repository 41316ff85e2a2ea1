//! Content interpreter and distinct transfer interface.
//!
//! A [`RuleSet`] maps (content kind, display kind, audience) to a
//! [`Produce`] clause; [`interpret`] turns that clause into the
//! [`Representation`] a display renders, exploding assemblies radially about
//! their centroid when the mode asks for it.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{ConfigError, CoreError, Result};
use crate::geometry::{Aabb, Pose, Vec3};
use crate::model::{Appearance, Audience, ContentItem, ContentKind, DisplayKind, DisplayProfile, Rgba};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RepresentationMode {
    Assembled,
    Exploded,
    /// Exploded layout with details on and a neutral grey appearance.
    Schematic,
    DesignEmphasis,
    Summary,
}

impl RepresentationMode {
    pub fn explodes(self) -> bool {
        matches!(self, RepresentationMode::Exploded | RepresentationMode::Schematic)
    }
}

/// Which inputs a rule applies to. `None` fields match anything.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct RuleMatch {
    pub content_kind: Option<ContentKind>,
    pub display_kind: Option<DisplayKind>,
    pub audience: Option<Audience>,
}

impl RuleMatch {
    pub fn matches(&self, content: ContentKind, display: DisplayKind, audience: Audience) -> bool {
        self.content_kind.map_or(true, |k| k == content)
            && self.display_kind.map_or(true, |k| k == display)
            && self.audience.map_or(true, |a| a == audience)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Produce<S> {
    pub mode: RepresentationMode,
    pub explosion_factor: S,
    pub labels: bool,
    pub details: bool,
    pub title: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Real")]
pub struct Rule<S: Real> {
    #[serde(rename = "match", default)]
    pub matcher: RuleMatch,
    pub produce: Produce<S>,
    #[serde(default)]
    pub priority: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Real")]
pub struct RuleSet<S: Real> {
    #[serde(default)]
    pub rules: Vec<Rule<S>>,
    pub default: Produce<S>,
}

/// Explosion factor used by the shipped rules.
pub const DEFAULT_EXPLOSION: f64 = 0.75;

impl<S: Real> RuleSet<S> {
    pub fn with_default(default: Produce<S>) -> Self {
        Self {
            rules: Vec::new(),
            default,
        }
    }

    /// The shipped audience mapping: engineers get an exploded view with
    /// labels and details, designers a labelled design view, managers a
    /// title-only summary. Everything else is shown assembled.
    pub fn builtin() -> Self {
        let audience_rule = |audience, mode, e: f64, labels, details| Rule {
            matcher: RuleMatch {
                content_kind: Some(ContentKind::Assembly),
                display_kind: None,
                audience: Some(audience),
            },
            produce: Produce {
                mode,
                explosion_factor: S::lit(e),
                labels,
                details,
                title: true,
            },
            priority: 10,
        };
        Self {
            rules: vec![
                audience_rule(Audience::Engineer, RepresentationMode::Exploded, DEFAULT_EXPLOSION, true, true),
                audience_rule(Audience::Designer, RepresentationMode::DesignEmphasis, 0.0, true, false),
                audience_rule(Audience::Manager, RepresentationMode::Summary, 0.0, false, false),
            ],
            default: Produce {
                mode: RepresentationMode::Assembled,
                explosion_factor: S::zero(),
                labels: false,
                details: false,
                title: true,
            },
        }
    }

    /// Checks factor ranges and that no two rules share a match triple.
    /// On a duplicate returns the index of the later rule.
    pub fn validate(&self) -> std::result::Result<(), (Option<usize>, String)> {
        let check = |p: &Produce<S>| p.explosion_factor >= S::zero() && p.explosion_factor.is_finite();
        if !check(&self.default) {
            return Err((None, "default explosion_factor must be finite and >= 0".into()));
        }
        let mut seen = BTreeSet::new();
        for (i, rule) in self.rules.iter().enumerate() {
            if !check(&rule.produce) {
                return Err((Some(i), format!("rules[{i}]: explosion_factor must be finite and >= 0")));
            }
            if !seen.insert(rule.matcher) {
                return Err((Some(i), format!("rules[{i}]: duplicate match {:?}", rule.matcher)));
            }
        }
        Ok(())
    }
}

/// Highest-priority rule whose populated match fields equal the inputs;
/// earlier rules win ties. Falls back to the default clause.
pub fn match_rule<S: Real>(
    ruleset: &RuleSet<S>,
    item: &ContentItem<S>,
    display: &DisplayProfile<S>,
) -> Produce<S> {
    let mut best: Option<&Rule<S>> = None;
    for rule in &ruleset.rules {
        if !rule.matcher.matches(item.kind, display.kind, display.audience) {
            continue;
        }
        if best.map_or(true, |b| rule.priority > b.priority) {
            best = Some(rule);
        }
    }
    best.map_or(ruleset.default, |r| r.produce)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Real")]
pub struct ComponentPose<S: Real> {
    pub component_id: String,
    pub world_pose: Pose<S>,
}

/// Centroid of the components' centres in the assembly frame.
pub fn assembly_centroid<S: Real>(item: &ContentItem<S>) -> Option<Vec3<S>> {
    if item.components.is_empty() {
        return None;
    }
    let sum = item
        .components
        .iter()
        .fold(Vec3::zero(), |acc, c| acc + c.assembly_center());
    Some(sum / S::lit(item.components.len() as f64))
}

/// World poses of every component after pushing each one away from the
/// centroid so its centre-to-centroid offset grows by `1 + explosion`.
/// Orientations are untouched; the arrangement is then scaled and placed by
/// `base_pose`.
pub fn explode_assembly<S: Real>(
    item: &ContentItem<S>,
    base_pose: &Pose<S>,
    scale: S,
    explosion: S,
) -> Result<Vec<ComponentPose<S>>> {
    if item.kind != ContentKind::Assembly {
        return Err(CoreError::InvalidArgument(format!(
            "{:?} is not an assembly",
            item.id
        )));
    }
    if !(explosion >= S::zero() && explosion.is_finite()) {
        return Err(CoreError::InvalidArgument(
            "explosion factor must be finite and >= 0".into(),
        ));
    }
    if !(scale > S::zero() && scale.is_finite()) {
        return Err(CoreError::InvalidArgument("scale must be positive".into()));
    }
    let centroid = assembly_centroid(item).ok_or_else(|| {
        CoreError::InvalidArgument(format!("assembly {:?} has no components", item.id))
    })?;
    Ok(item
        .components
        .iter()
        .map(|c| {
            let shift = (c.assembly_center() - centroid) * explosion;
            let local = Pose::new(c.local_pose.position + shift, c.local_pose.orientation);
            ComponentPose {
                component_id: c.id.clone(),
                world_pose: Pose::new(
                    base_pose.transform_point_scaled(local.position, scale),
                    base_pose.orientation.compose(&local.orientation),
                ),
            }
        })
        .collect())
}

/// World boxes of each component at the given explosion factor.
pub fn exploded_component_bounds<S: Real>(
    item: &ContentItem<S>,
    base_pose: &Pose<S>,
    scale: S,
    explosion: S,
) -> Result<Vec<Aabb<S>>> {
    let poses = explode_assembly(item, base_pose, scale, explosion)?;
    Ok(item
        .components
        .iter()
        .zip(poses)
        .map(|(c, p)| c.bounds.transformed(&p.world_pose, scale))
        .collect())
}

fn any_overlap<S: Real>(boxes: &[Aabb<S>]) -> bool {
    boxes.iter().enumerate().any(|(i, a)| {
        boxes[i + 1..]
            .iter()
            .any(|b| a.intersection_volume(b) > S::zero())
    })
}

/// Smallest explosion factor (to bisection precision) at which no two
/// component boxes overlap in world space.
///
/// Box sizes do not change with the factor while centre offsets grow
/// linearly, so overlap is monotone and bisection applies. Returns `None` when
/// two components share a centre and can never be separated.
pub fn separation_factor<S: Real>(item: &ContentItem<S>, base_pose: &Pose<S>, scale: S) -> Result<Option<S>> {
    let overlapping = |e: S| exploded_component_bounds(item, base_pose, scale, e).map(|b| any_overlap(&b));
    if !overlapping(S::zero())? {
        return Ok(Some(S::zero()));
    }
    let centers: Vec<Vec3<S>> = item.components.iter().map(|c| c.assembly_center()).collect();
    for (i, a) in centers.iter().enumerate() {
        if centers[i + 1..].iter().any(|b| (*a - *b).norm() <= S::epsilon()) {
            return Ok(None);
        }
    }
    let mut hi = S::one();
    let mut guard = 0;
    while overlapping(hi)? {
        hi = hi * S::lit(2.0);
        guard += 1;
        if guard > 200 || !hi.is_finite() {
            return Ok(None);
        }
    }
    let mut lo = S::zero();
    for _ in 0..200 {
        let mid = (lo + hi) / S::lit(2.0);
        if mid <= lo || mid >= hi {
            break;
        }
        if overlapping(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(hi))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Real")]
pub struct ComponentPlacement<S: Real> {
    pub component_id: String,
    pub world_pose: Pose<S>,
    pub label_visible: bool,
    pub detail_visible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Real")]
pub struct Representation<S: Real> {
    pub representation_id: String,
    pub mode: RepresentationMode,
    pub appearance: Appearance<S>,
    pub component_placements: Vec<ComponentPlacement<S>>,
    pub title_visible: bool,
}

#[derive(Serialize)]
#[serde(bound = "S: Real")]
struct RepresentationKey<'a, S: Real> {
    item: &'a ContentItem<S>,
    display: &'a DisplayProfile<S>,
    produce: &'a Produce<S>,
    appearance: &'a Appearance<S>,
    anchor: &'a Pose<S>,
}

/// Builds what `display` should show for `item`.
///
/// Non-assemblies cannot explode, so exploding modes fall back to
/// `Assembled` for them. The id is a content hash of every input, so equal
/// inputs always yield the same id.
pub fn interpret<S: Real>(
    item: &ContentItem<S>,
    display: &DisplayProfile<S>,
    ruleset: &RuleSet<S>,
    adapted: &Appearance<S>,
    anchor: &Pose<S>,
) -> Result<Representation<S>> {
    let mut produce = match_rule(ruleset, item, display);
    let is_assembly = item.kind == ContentKind::Assembly;
    if !is_assembly && produce.mode.explodes() {
        produce.mode = RepresentationMode::Assembled;
    }
    let mut appearance = *adapted;
    if produce.mode == RepresentationMode::Schematic {
        appearance.color = Rgba::SCHEMATIC_GREY;
        produce.details = true;
    }
    let explosion = if produce.mode.explodes() {
        produce.explosion_factor
    } else {
        S::zero()
    };
    let component_placements = if is_assembly {
        explode_assembly(item, anchor, adapted.scale, explosion)?
            .into_iter()
            .map(|p| ComponentPlacement {
                component_id: p.component_id,
                world_pose: p.world_pose,
                label_visible: produce.labels,
                detail_visible: produce.details,
            })
            .collect()
    } else {
        Vec::new()
    };

    let key = RepresentationKey {
        item,
        display,
        produce: &produce,
        appearance: adapted,
        anchor,
    };
    let canonical = serde_json::to_vec(&key).expect("representation inputs serialize");
    let digest = Sha256::digest(&canonical);

    Ok(Representation {
        representation_id: format!("rep-{}", hex::encode(&digest[..16])),
        mode: produce.mode,
        appearance,
        component_placements,
        title_visible: produce.title,
    })
}

/// Parses a ruleset document: `{"rules": [...], "default": {...}}`.
pub fn parse_ruleset<S: Real>(path: &Path, text: &str) -> Result<RuleSet<S>> {
    let ruleset: RuleSet<S> =
        serde_json::from_str(text).map_err(|e| ConfigError::from_json(path, &e))?;
    if let Err((index, message)) = ruleset.validate() {
        let mut err = ConfigError::new(path, message);
        if let Some(line) = index.and_then(|i| nth_key_line(text, "\"match\"", i)) {
            err = err.at(line, 1);
        }
        return Err(err.into());
    }
    Ok(ruleset)
}

pub fn load_ruleset<S: Real>(path: &Path) -> Result<RuleSet<S>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::new(path, format!("cannot read ruleset: {e}")))?;
    parse_ruleset(path, &text)
}

/// 1-based line of the `n`-th occurrence of `needle`.
fn nth_key_line(text: &str, needle: &str, n: usize) -> Option<usize> {
    let (offset, _) = text.match_indices(needle).nth(n)?;
    Some(text[..offset].matches('\n').count() + 1)
}
