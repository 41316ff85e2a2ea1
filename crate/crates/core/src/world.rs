//! Replicated world state and the change records that mutate it.
//!
//! All mutation goes through [`WorldState::commit`], which applies a batch of
//! [`Change`]s and bumps `seq` by one. The resulting [`Delta`] replayed on a
//! copy of the pre-commit state reproduces the post-commit state exactly.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Pose;
use crate::interpreter::Representation;
use crate::lifecycle::{PlacementState, StateKind};
use crate::model::{control_slot_pose, ContentItem, DisplayProfile};
use crate::scalar::Real;
use crate::transfer::TransferPlan;

/// A live transfer plan plus the bookkeeping needed to finish it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Real")]
pub struct Transit<S: Real> {
    pub plan: TransferPlan<S>,
    /// Clock reading when the plan started, seconds.
    pub started_at: S,
    /// World seq of the commit that created the plan; orders completions.
    pub created_seq: u64,
    /// Target display for placements.
    pub display_id: Option<String>,
    /// Stacking slot reserved on the target display.
    pub slot: usize,
}

/// How a displayed item is currently presented. Kept while the item is being
/// retrieved so its slot stays reserved and a cancel can restore it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Real")]
pub struct Presentation<S: Real> {
    pub display_id: String,
    pub slot: usize,
    /// World seq of the commit that landed the item; newest is retrieved first.
    pub placed_seq: u64,
    pub representation: Representation<S>,
    /// Control-space pose the item was released from.
    pub return_pose: Pose<S>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Real")]
pub enum Change<S: Real> {
    PutDisplay { profile: DisplayProfile<S> },
    RemoveDisplay { display_id: String },
    PutPlacement { content_id: String, state: PlacementState<S> },
    PutTransit { transit: Transit<S> },
    RemoveTransit { plan_id: String },
    PutPresentation { content_id: String, presentation: Presentation<S> },
    RemovePresentation { content_id: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Real")]
pub struct Delta<S: Real> {
    pub seq: u64,
    pub changes: Vec<Change<S>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReplayError {
    #[error("delta gap: expected seq {expected}, got {got}")]
    Desync { expected: u64, got: u64 },
    #[error("delta {seq} references unknown content {content_id:?}")]
    UnknownContent { seq: u64, content_id: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Real")]
pub struct WorldState<S: Real> {
    pub contents: BTreeMap<String, ContentItem<S>>,
    pub placements: BTreeMap<String, PlacementState<S>>,
    pub displays: BTreeMap<String, DisplayProfile<S>>,
    #[serde(default)]
    pub transits: BTreeMap<String, Transit<S>>,
    #[serde(default)]
    pub presentations: BTreeMap<String, Presentation<S>>,
    pub seq: u64,
}

impl<S: Real> Default for WorldState<S> {
    fn default() -> Self {
        Self {
            contents: BTreeMap::new(),
            placements: BTreeMap::new(),
            displays: BTreeMap::new(),
            transits: BTreeMap::new(),
            presentations: BTreeMap::new(),
            seq: 0,
        }
    }
}

impl<S: Real> WorldState<S> {
    /// Every item starts in control space, laid out in id order by
    /// [`control_slot_pose`].
    pub fn new(contents: impl IntoIterator<Item = ContentItem<S>>) -> Self {
        let contents: BTreeMap<_, _> = contents.into_iter().map(|c| (c.id.clone(), c)).collect();
        let placements = contents
            .keys()
            .enumerate()
            .map(|(i, id)| {
                (
                    id.clone(),
                    PlacementState::InControl {
                        hold_pose: control_slot_pose(i),
                    },
                )
            })
            .collect();
        Self {
            contents,
            placements,
            ..Self::default()
        }
    }

    /// Applies `changes` as one atomic step and returns the delta describing it.
    pub fn commit(&mut self, changes: Vec<Change<S>>) -> Delta<S> {
        for change in &changes {
            self.apply_change(change);
        }
        self.seq += 1;
        Delta {
            seq: self.seq,
            changes,
        }
    }

    fn apply_change(&mut self, change: &Change<S>) {
        match change {
            Change::PutDisplay { profile } => {
                self.displays.insert(profile.id.clone(), profile.clone());
            }
            Change::RemoveDisplay { display_id } => {
                self.displays.remove(display_id);
            }
            Change::PutPlacement { content_id, state } => {
                self.placements.insert(content_id.clone(), state.clone());
            }
            Change::PutTransit { transit } => {
                self.transits
                    .insert(transit.plan.plan_id.clone(), transit.clone());
            }
            Change::RemoveTransit { plan_id } => {
                self.transits.remove(plan_id);
            }
            Change::PutPresentation {
                content_id,
                presentation,
            } => {
                self.presentations
                    .insert(content_id.clone(), presentation.clone());
            }
            Change::RemovePresentation { content_id } => {
                self.presentations.remove(content_id);
            }
        }
    }

    /// Applies a received delta. The delta must be the next one in sequence.
    pub fn apply_delta(&mut self, delta: &Delta<S>) -> Result<(), ReplayError> {
        let expected = self.seq + 1;
        if delta.seq != expected {
            return Err(ReplayError::Desync {
                expected,
                got: delta.seq,
            });
        }
        for change in &delta.changes {
            if let Change::PutPlacement { content_id, .. } = change {
                if !self.contents.contains_key(content_id) {
                    return Err(ReplayError::UnknownContent {
                        seq: delta.seq,
                        content_id: content_id.clone(),
                    });
                }
            }
        }
        for change in &delta.changes {
            self.apply_change(change);
        }
        self.seq = delta.seq;
        Ok(())
    }

    /// Items displayed on `display_id`, most recently placed first. Items
    /// already being retrieved are excluded.
    pub fn displayed_on(&self, display_id: &str) -> Vec<&str> {
        let mut items: Vec<(&str, u64)> = self
            .presentations
            .iter()
            .filter(|(id, p)| {
                p.display_id == display_id
                    && self.placements.get(*id).is_some_and(|s| s.is_displayed())
            })
            .map(|(id, p)| (id.as_str(), p.placed_seq))
            .collect();
        items.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        items.into_iter().map(|(id, _)| id).collect()
    }

    /// Slots on `display_id` taken by displayed items or by placements heading there.
    pub fn occupied_slots(&self, display_id: &str) -> BTreeSet<usize> {
        let shown = self
            .presentations
            .values()
            .filter(|p| p.display_id == display_id)
            .map(|p| p.slot);
        let incoming = self
            .transits
            .values()
            .filter(|t| t.display_id.as_deref() == Some(display_id))
            .map(|t| t.slot);
        shown.chain(incoming).collect()
    }

    /// Live transits ordered by creation.
    pub fn transits_in_creation_order(&self) -> Vec<&Transit<S>> {
        let mut v: Vec<&Transit<S>> = self.transits.values().collect();
        v.sort_by(|a, b| {
            a.created_seq
                .cmp(&b.created_seq)
                .then(a.plan.plan_id.cmp(&b.plan.plan_id))
        });
        v
    }

    /// Checks the cross-map invariants. Returns a description of the first breach.
    pub fn check_invariants(&self) -> Result<(), String> {
        if !self.contents.keys().eq(self.placements.keys()) {
            return Err("contents and placements have different keys".into());
        }
        for (id, state) in &self.placements {
            match state {
                PlacementState::Displayed { display_id, .. } => {
                    if !self.displays.contains_key(display_id) {
                        return Err(format!("{id} displayed on unknown display {display_id}"));
                    }
                    match self.presentations.get(id) {
                        Some(p) if &p.display_id == display_id => {}
                        _ => return Err(format!("{id} displayed without matching presentation")),
                    }
                }
                PlacementState::InTransit { plan_id, .. } => match self.transits.get(plan_id) {
                    Some(t) if &t.plan.content_id == id => {}
                    _ => return Err(format!("{id} in transit on dead plan {plan_id}")),
                },
                PlacementState::InControl { .. } => {}
            }
            let presented = matches!(state.kind(), StateKind::Displayed | StateKind::RetrievingInTransit);
            if presented != self.presentations.contains_key(id) {
                return Err(format!("{id}: presentation does not match state {state}"));
            }
        }
        for (plan_id, t) in &self.transits {
            match self.placements.get(&t.plan.content_id) {
                Some(PlacementState::InTransit { plan_id: p, .. }) if p == plan_id => {}
                _ => return Err(format!("orphan transit {plan_id}")),
            }
        }
        Ok(())
    }
}

/// Rebuilds the state a client should hold after receiving `snapshot` and then `deltas`.
pub fn replay<S: Real>(snapshot: &WorldState<S>, deltas: &[Delta<S>]) -> Result<WorldState<S>, ReplayError> {
    let mut world = snapshot.clone();
    for d in deltas {
        world.apply_delta(d)?;
    }
    Ok(world)
}
