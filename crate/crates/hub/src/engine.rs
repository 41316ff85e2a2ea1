//! Authoritative event engine.
//!
//! The engine owns the world state and every session. It is driven from a
//! single thread: [`Engine::handle`] for inbound envelopes, [`Engine::tick`]
//! for the clock, [`Engine::close_session`] for disconnects. Each returns the
//! envelopes to send, already addressed and sequenced per session.

use std::collections::BTreeMap;

use crossdrop_core::lifecycle::Arrival;
use crossdrop_core::selection::{select_display_by_proximity, DisplayHit};
use crossdrop_core::transfer::{plan_placement_in_slot, DisplayedAppearance, SLOT_COUNT};
use crossdrop_core::{
    apply_transition, interpret, plan_retrieval, select_content_by_gaze, select_content_by_grab,
    select_display_by_palm, world_bounds, Appearance, Change, CoreError, DContentItem, DDelta,
    DDisplayProfile, DGestureEvent, DPose, DRay, DRuleSet, DSelectionConfig, DTransferPolicy,
    DWorldState, GestureAction, GesturePayload, LifecycleEvent, PlacementState, Pose, Presentation,
    StateKind, Transit,
};
use thiserror::Error;

use crate::protocol::{Envelope, ErrorCode, Message};

/// Slack when deciding whether a transit has run its full duration, seconds.
const COMPLETION_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{code}: {detail}")]
pub struct HubError {
    pub code: ErrorCode,
    pub detail: String,
}

impl HubError {
    pub fn new(code: ErrorCode, detail: impl Into<String>) -> Self {
        Self {
            code,
            detail: detail.into(),
        }
    }

    pub fn to_message(&self) -> Message {
        Message::error(self.code, self.detail.clone())
    }
}

impl From<CoreError> for HubError {
    fn from(e: CoreError) -> Self {
        let code = match &e {
            CoreError::InvalidArgument(_) | CoreError::Config(_) => ErrorCode::InvalidArgument,
            CoreError::TransitionRejected { .. } => ErrorCode::TransitionRejected,
            CoreError::NotFound(_) => ErrorCode::NotFound,
            CoreError::InvalidState(_) => ErrorCode::InvalidState,
        };
        HubError::new(code, e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Operator,
    Display,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Session {
    pub session_id: String,
    pub role: Option<Role>,
    /// Display bound to this session, for display sessions.
    pub display_id: Option<String>,
    /// Highest inbound envelope seq accepted.
    pub last_seq: u64,
    /// Seq of the last envelope sent to this session.
    pub out_seq: u64,
    /// Clock reading after which the session is considered dead.
    pub deadline: f64,
}

/// Result of applying one message to the world.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EventOutcome {
    pub deltas: Vec<DDelta>,
    pub error: Option<HubError>,
}

impl EventOutcome {
    fn ok(deltas: Vec<DDelta>) -> Self {
        Self { deltas, error: None }
    }

    fn err(error: HubError) -> Self {
        Self {
            deltas: Vec::new(),
            error: Some(error),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outbound {
    pub session_id: String,
    pub envelope: Envelope,
}

#[derive(Debug, Clone)]
pub struct EngineConfig {
    pub policy: DTransferPolicy,
    pub selection: DSelectionConfig,
    pub rules: DRuleSet,
    /// Seconds of silence before a session is dropped; `None` disables expiry.
    pub session_timeout: Option<f64>,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            policy: DTransferPolicy::default(),
            selection: DSelectionConfig::default(),
            rules: DRuleSet::builtin(),
            session_timeout: Some(30.0),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Engine {
    world: DWorldState,
    config: EngineConfig,
    sessions: BTreeMap<String, Session>,
    operator: Option<String>,
    /// Content in the operator's hand, selected by grab or landed by retrieval.
    held: Option<String>,
    last_gesture_seq: Option<u64>,
    last_tick: f64,
    next_session: u64,
}

impl Engine {
    pub fn new(world: DWorldState, config: EngineConfig) -> Self {
        Self {
            world,
            config,
            sessions: BTreeMap::new(),
            operator: None,
            held: None,
            last_gesture_seq: None,
            last_tick: 0.0,
            next_session: 0,
        }
    }

    pub fn with_contents(contents: impl IntoIterator<Item = DContentItem>, config: EngineConfig) -> Self {
        Self::new(DWorldState::new(contents), config)
    }

    pub fn world(&self) -> &DWorldState {
        &self.world
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    /// Read-only copy of the current world, suitable for a `Snapshot` message.
    pub fn snapshot(&self) -> DWorldState {
        self.world.clone()
    }

    pub fn session(&self, id: &str) -> Option<&Session> {
        self.sessions.get(id)
    }

    pub fn sessions(&self) -> impl Iterator<Item = &Session> {
        self.sessions.values()
    }

    pub fn operator_session(&self) -> Option<&str> {
        self.operator.as_deref()
    }

    pub fn held(&self) -> Option<&str> {
        self.held.as_deref()
    }

    pub fn last_tick(&self) -> f64 {
        self.last_tick
    }

    /// Allocates a fresh, unregistered session.
    pub fn open_session(&mut self, now: f64) -> String {
        self.next_session += 1;
        let id = format!("s{}", self.next_session);
        self.sessions.insert(
            id.clone(),
            Session {
                session_id: id.clone(),
                role: None,
                display_id: None,
                last_seq: 0,
                out_seq: 0,
                deadline: self.deadline_from(now),
            },
        );
        id
    }

    fn deadline_from(&self, now: f64) -> f64 {
        self.config
            .session_timeout
            .map_or(f64::INFINITY, |t| now + t)
    }

    /// Processes one inbound envelope from `session_id`.
    pub fn handle(&mut self, session_id: &str, env: Envelope, now: f64) -> Vec<Outbound> {
        let mut out = Vec::new();
        let deadline = self.deadline_from(now);
        let Some(session) = self.sessions.get_mut(session_id) else {
            return out;
        };
        session.deadline = deadline;
        if !env.session_id.is_empty() && env.session_id != session_id {
            let err = HubError::new(
                ErrorCode::ProtocolError,
                format!("envelope names session {:?}, connection is {session_id:?}", env.session_id),
            );
            self.push(&mut out, session_id, err.to_message());
            return out;
        }
        if env.seq <= session.last_seq {
            let err = HubError::new(
                ErrorCode::ProtocolError,
                format!("seq {} does not increase past {}", env.seq, session.last_seq),
            );
            self.push(&mut out, session_id, err.to_message());
            return out;
        }
        session.last_seq = env.seq;

        match env.message {
            Message::Ack { .. } => {}
            Message::RequestSnapshot {} => {
                let snap = Message::Snapshot {
                    world: self.snapshot(),
                };
                self.push(&mut out, session_id, snap);
            }
            Message::Snapshot { .. } | Message::Delta(_) | Message::Error { .. } => {
                let err = HubError::new(
                    ErrorCode::InvalidArgument,
                    format!("{} is hub-to-client only", env.message.name()),
                );
                self.push(&mut out, session_id, err.to_message());
            }
            msg => {
                let registering = matches!(
                    msg,
                    Message::RegisterDisplay { .. } | Message::RegisterOperator {}
                );
                let outcome = self.apply_event(session_id, &msg, now);
                match outcome.error {
                    Some(err) => self.push(&mut out, session_id, err.to_message()),
                    None => {
                        self.push(&mut out, session_id, Message::Ack { seq: env.seq });
                        if registering {
                            let snap = Message::Snapshot {
                                world: self.snapshot(),
                            };
                            self.push(&mut out, session_id, snap);
                        }
                        let skip = registering.then_some(session_id);
                        self.broadcast(&mut out, &outcome.deltas, skip);
                    }
                }
            }
        }
        out
    }

    /// Reply for a frame that could not be decoded.
    pub fn reject(&mut self, session_id: &str, err: &crate::protocol::ProtocolError) -> Vec<Outbound> {
        let mut out = Vec::new();
        self.push(&mut out, session_id, Message::error(ErrorCode::ProtocolError, err.to_string()));
        out
    }

    /// Applies one client message to the world.
    ///
    /// On error nothing is mutated and no delta is produced.
    pub fn apply_event(&mut self, session_id: &str, msg: &Message, now: f64) -> EventOutcome {
        match self.try_apply(session_id, msg, now) {
            Ok(deltas) => EventOutcome::ok(deltas),
            Err(e) => EventOutcome::err(e),
        }
    }

    fn try_apply(&mut self, session_id: &str, msg: &Message, now: f64) -> Result<Vec<DDelta>, HubError> {
        let role = self
            .sessions
            .get(session_id)
            .ok_or_else(|| HubError::new(ErrorCode::NotFound, format!("unknown session {session_id:?}")))?
            .role;
        match msg {
            Message::RegisterOperator {} => {
                if role.is_some() {
                    return Err(forbidden("session is already registered"));
                }
                if self.operator.is_some() {
                    return Err(forbidden("an operator is already attached"));
                }
                self.operator = Some(session_id.to_string());
                self.last_gesture_seq = None;
                self.held = None;
                let s = self.sessions.get_mut(session_id).expect("checked above");
                s.role = Some(Role::Operator);
                Ok(Vec::new())
            }
            Message::RegisterDisplay { profile } => {
                if role.is_some() {
                    return Err(forbidden("session is already registered"));
                }
                profile.validate()?;
                if self.world.displays.contains_key(&profile.id) {
                    return Err(HubError::new(
                        ErrorCode::Conflict,
                        format!("display {:?} is already registered", profile.id),
                    ));
                }
                let delta = self.world.commit(vec![Change::PutDisplay {
                    profile: profile.clone(),
                }]);
                let s = self.sessions.get_mut(session_id).expect("checked above");
                s.role = Some(Role::Display);
                s.display_id = Some(profile.id.clone());
                Ok(vec![delta])
            }
            Message::Gesture { event } => {
                self.require_operator(role)?;
                self.apply_gesture(event, now)
            }
            Message::PlaceCommand {
                content_id,
                display_id,
            } => {
                self.require_operator(role)?;
                let display = self.display(display_id)?.clone();
                let hold_pose = self.hold_pose(content_id)?;
                let delta = self.begin_placement(content_id, &display, hold_pose, now)?;
                Ok(vec![delta])
            }
            Message::RetrieveCommand { content_id } => {
                self.require_operator(role)?;
                let presentation = self.presentation(content_id)?;
                let hand = presentation.return_pose;
                let delta = self.begin_retrieval(content_id, &hand, now)?;
                Ok(vec![delta])
            }
            other => Err(HubError::new(
                ErrorCode::InvalidArgument,
                format!("{} cannot be applied", other.name()),
            )),
        }
    }

    fn require_operator(&self, role: Option<Role>) -> Result<(), HubError> {
        match role {
            Some(Role::Operator) => Ok(()),
            _ => Err(forbidden("only the operator may send gestures and commands")),
        }
    }

    fn apply_gesture(&mut self, event: &DGestureEvent, now: f64) -> Result<Vec<DDelta>, HubError> {
        if let Some(last) = self.last_gesture_seq {
            if event.seq <= last {
                return Err(HubError::new(
                    ErrorCode::InvalidArgument,
                    format!("gesture seq {} does not increase past {last}", event.seq),
                ));
            }
        }
        if !(event.time >= 0.0 && event.time.is_finite()) {
            return Err(HubError::new(ErrorCode::InvalidArgument, "gesture time must be >= 0"));
        }
        let result = match &event.payload {
            GesturePayload::Grab { hand_pos } => {
                let id = self.grab_target(*hand_pos)?;
                self.held = Some(id);
                Ok(Vec::new())
            }
            GesturePayload::Release { release_pose, ray } => {
                self.release(release_pose, ray.as_ref(), now)
            }
            GesturePayload::PalmRay { ray, action } => match action {
                GestureAction::Push => self.push_along(ray, now),
                GestureAction::Pull => {
                    let hit = self.aim(ray)?;
                    let content = self
                        .world
                        .displayed_on(&hit.display_id)
                        .first()
                        .map(|s| s.to_string())
                        .ok_or_else(|| {
                            HubError::new(
                                ErrorCode::NoTarget,
                                format!("display {:?} shows nothing", hit.display_id),
                            )
                        })?;
                    self.pull_to(&content, ray, now)
                }
            },
            GesturePayload::GazePinch { gaze, action } => match action {
                GestureAction::Push => self.push_along(gaze, now),
                GestureAction::Pull => {
                    let candidates: Vec<(&str, crossdrop_core::DVec3)> = self
                        .world
                        .placements
                        .iter()
                        .filter_map(|(id, s)| match s {
                            PlacementState::Displayed { anchor_pose, .. } => {
                                Some((id.as_str(), anchor_pose.position))
                            }
                            _ => None,
                        })
                        .collect();
                    let content = select_content_by_gaze(gaze, candidates, &self.config.selection)
                        .ok_or_else(|| HubError::new(ErrorCode::NoTarget, "gaze selects no displayed content"))?;
                    self.pull_to(&content, gaze, now)
                }
            },
        };
        if result.is_ok() {
            self.last_gesture_seq = Some(event.seq);
        }
        result
    }

    fn grab_target(&self, hand: crossdrop_core::DVec3) -> Result<String, HubError> {
        let mut candidates = Vec::new();
        for (id, state) in &self.world.placements {
            if let PlacementState::InControl { hold_pose } = state {
                let item = &self.world.contents[id];
                let b = world_bounds(item, hold_pose, item.appearance.scale)?;
                candidates.push((id.as_str(), b));
            }
        }
        select_content_by_grab(hand, candidates, &self.config.selection)
            .ok_or_else(|| HubError::new(ErrorCode::NoTarget, "no content within reach"))
    }

    fn held_content(&self) -> Result<String, HubError> {
        let id = self
            .held
            .clone()
            .ok_or_else(|| HubError::new(ErrorCode::NoTarget, "operator holds no content"))?;
        match self.world.placements.get(&id) {
            Some(PlacementState::InControl { .. }) => Ok(id),
            _ => Err(HubError::new(
                ErrorCode::TransitionRejected,
                format!("held content {id:?} is no longer in control space"),
            )),
        }
    }

    fn aim(&self, ray: &DRay) -> Result<DisplayHit<f64>, HubError> {
        select_display_by_palm(ray, self.world.displays.values(), &self.config.selection)
            .ok_or_else(|| HubError::new(ErrorCode::NoTarget, "ray hits no display"))
    }

    fn push_along(&mut self, ray: &DRay, now: f64) -> Result<Vec<DDelta>, HubError> {
        let content = self.held_content()?;
        let hit = self.aim(ray)?;
        let display = self.world.displays[&hit.display_id].clone();
        let start = self.hold_pose(&content)?;
        let delta = self.begin_placement(&content, &display, start, now)?;
        self.held = None;
        Ok(vec![delta])
    }

    fn pull_to(&mut self, content: &str, ray: &DRay, now: f64) -> Result<Vec<DDelta>, HubError> {
        let hand = Pose::from_position(ray.origin());
        Ok(vec![self.begin_retrieval(content, &hand, now)?])
    }

    fn release(&mut self, release_pose: &DPose, ray: Option<&DRay>, now: f64) -> Result<Vec<DDelta>, HubError> {
        let content = self.held_content()?;
        let target = match ray {
            Some(r) => select_display_by_palm(r, self.world.displays.values(), &self.config.selection)
                .map(|h| h.display_id),
            None => select_display_by_proximity(
                release_pose.position,
                self.world.displays.values(),
                self.config.selection.grab_radius,
            ),
        };
        let delta = match target {
            Some(display_id) => {
                let display = self.world.displays[&display_id].clone();
                self.begin_placement(&content, &display, *release_pose, now)?
            }
            None => self.world.commit(vec![Change::PutPlacement {
                content_id: content.clone(),
                state: PlacementState::InControl {
                    hold_pose: *release_pose,
                },
            }]),
        };
        self.held = None;
        Ok(vec![delta])
    }

    fn content(&self, id: &str) -> Result<&DContentItem, HubError> {
        self.world
            .contents
            .get(id)
            .ok_or_else(|| HubError::new(ErrorCode::NotFound, format!("unknown content {id:?}")))
    }

    fn display(&self, id: &str) -> Result<&DDisplayProfile, HubError> {
        self.world
            .displays
            .get(id)
            .ok_or_else(|| HubError::new(ErrorCode::NotFound, format!("unknown display {id:?}")))
    }

    fn state(&self, id: &str) -> Result<&PlacementState<f64>, HubError> {
        self.content(id)?;
        Ok(&self.world.placements[id])
    }

    fn hold_pose(&self, id: &str) -> Result<DPose, HubError> {
        match self.state(id)? {
            PlacementState::InControl { hold_pose } => Ok(*hold_pose),
            other => Err(HubError::new(
                ErrorCode::TransitionRejected,
                format!("cannot place {id:?}: it is {other}"),
            )),
        }
    }

    fn presentation(&self, id: &str) -> Result<&Presentation<f64>, HubError> {
        match self.state(id)? {
            PlacementState::Displayed { .. } => Ok(&self.world.presentations[id]),
            other => Err(HubError::new(
                ErrorCode::TransitionRejected,
                format!("cannot retrieve {id:?}: it is {other}"),
            )),
        }
    }

    fn next_plan_id(&self) -> String {
        format!("plan-{}", self.world.seq + 1)
    }

    fn free_slot(&self, display_id: &str) -> usize {
        let used = self.world.occupied_slots(display_id);
        (0..SLOT_COUNT)
            .find(|s| !used.contains(s))
            .unwrap_or(used.len() % SLOT_COUNT)
    }

    fn begin_placement(
        &mut self,
        content_id: &str,
        display: &DDisplayProfile,
        release: DPose,
        now: f64,
    ) -> Result<DDelta, HubError> {
        let item = self.content(content_id)?;
        let state = self.state(content_id)?;
        let plan_id = self.next_plan_id();
        let next = apply_transition(
            state,
            &LifecycleEvent::BeginPlacement {
                plan_id: plan_id.clone(),
            },
        )?;
        let slot = self.free_slot(&display.id);
        let plan = plan_placement_in_slot(
            plan_id,
            item,
            &release,
            display,
            &item.appearance,
            &self.config.policy,
            slot,
        );
        let transit = Transit {
            plan,
            started_at: now,
            created_seq: self.world.seq + 1,
            display_id: Some(display.id.clone()),
            slot,
        };
        if self.held.as_deref() == Some(content_id) {
            self.held = None;
        }
        Ok(self.world.commit(vec![
            Change::PutTransit { transit },
            Change::PutPlacement {
                content_id: content_id.to_string(),
                state: next,
            },
        ]))
    }

    fn begin_retrieval(&mut self, content_id: &str, hand: &DPose, now: f64) -> Result<DDelta, HubError> {
        let item = self.content(content_id)?;
        let state = self.state(content_id)?;
        let plan_id = self.next_plan_id();
        let next = apply_transition(
            state,
            &LifecycleEvent::BeginRetrieval {
                plan_id: plan_id.clone(),
            },
        )?;
        let shown = &self.world.presentations[content_id].representation.appearance;
        let plan = plan_retrieval(
            plan_id,
            item,
            state,
            DisplayedAppearance {
                scale: shown.scale,
                opacity: shown.opacity,
            },
            hand,
            &item.appearance,
            &self.config.policy,
        )?;
        let transit = Transit {
            plan,
            started_at: now,
            created_seq: self.world.seq + 1,
            display_id: None,
            slot: 0,
        };
        Ok(self.world.commit(vec![
            Change::PutTransit { transit },
            Change::PutPlacement {
                content_id: content_id.to_string(),
                state: next,
            },
        ]))
    }

    /// Advances the clock to `now`: finishes due transits (one delta each, in
    /// creation order), then drops sessions past their deadline.
    pub fn tick(&mut self, now: f64) -> Result<Vec<Outbound>, HubError> {
        let deltas = self.advance(now)?;
        let mut out = Vec::new();
        self.broadcast(&mut out, &deltas, None);
        let expired: Vec<String> = self
            .sessions
            .values()
            .filter(|s| s.deadline < now)
            .map(|s| s.session_id.clone())
            .collect();
        for id in expired {
            out.extend(self.close_session(&id));
        }
        Ok(out)
    }

    /// The state-only part of [`Engine::tick`]: completes due transits and
    /// returns their deltas without addressing them.
    pub fn advance(&mut self, now: f64) -> Result<Vec<DDelta>, HubError> {
        if !(now >= self.last_tick) {
            return Err(HubError::new(
                ErrorCode::InvalidArgument,
                format!("clock went backwards: {now} < {}", self.last_tick),
            ));
        }
        self.last_tick = now;
        let due: Vec<String> = self
            .world
            .transits_in_creation_order()
            .into_iter()
            .filter(|t| now - t.started_at + COMPLETION_EPSILON >= t.plan.duration)
            .map(|t| t.plan.plan_id.clone())
            .collect();
        let mut deltas = Vec::with_capacity(due.len());
        for plan_id in due {
            deltas.push(self.complete(&plan_id)?);
        }
        Ok(deltas)
    }

    fn complete(&mut self, plan_id: &str) -> Result<DDelta, HubError> {
        let transit = self.world.transits[plan_id].clone();
        let content_id = transit.plan.content_id.clone();
        let item = self.content(&content_id)?.clone();
        let state = self.state(&content_id)?.clone();
        let end = transit.plan.end;
        let mut changes = vec![Change::RemoveTransit {
            plan_id: plan_id.to_string(),
        }];
        match &transit.display_id {
            Some(display_id) => {
                let display = self.display(display_id)?;
                let adapted = Appearance::new(item.appearance.color, end.opacity, end.scale);
                let representation =
                    interpret(&item, display, &self.config.rules, &adapted, &end.pose)?;
                let next = apply_transition(
                    &state,
                    &LifecycleEvent::TransitComplete(Arrival::OnDisplay {
                        display_id: display_id.clone(),
                        representation_id: representation.representation_id.clone(),
                        anchor_pose: end.pose,
                    }),
                )?;
                changes.push(Change::PutPlacement {
                    content_id: content_id.clone(),
                    state: next,
                });
                changes.push(Change::PutPresentation {
                    content_id,
                    presentation: Presentation {
                        display_id: display_id.clone(),
                        slot: transit.slot,
                        placed_seq: self.world.seq + 1,
                        representation,
                        return_pose: transit.plan.start.pose,
                    },
                });
            }
            None => {
                let next = apply_transition(
                    &state,
                    &LifecycleEvent::TransitComplete(Arrival::InControl { hold_pose: end.pose }),
                )?;
                changes.push(Change::PutPlacement {
                    content_id: content_id.clone(),
                    state: next,
                });
                changes.push(Change::RemovePresentation {
                    content_id: content_id.clone(),
                });
                if self.operator.is_some() && self.held.is_none() {
                    self.held = Some(content_id);
                }
            }
        }
        Ok(self.world.commit(changes))
    }

    /// Removes a session. A display's content returns to control space at once
    /// and placements still heading to it are cancelled.
    pub fn close_session(&mut self, session_id: &str) -> Vec<Outbound> {
        let Some(session) = self.sessions.remove(session_id) else {
            return Vec::new();
        };
        if self.operator.as_deref() == Some(session_id) {
            self.operator = None;
            self.held = None;
            self.last_gesture_seq = None;
        }
        let mut out = Vec::new();
        if let Some(display_id) = session.display_id {
            let delta = self.evict_display(&display_id);
            self.broadcast(&mut out, &[delta], None);
        }
        out
    }

    fn evict_display(&mut self, display_id: &str) -> DDelta {
        let mut changes = Vec::new();
        for (id, state) in &self.world.placements {
            match state.kind() {
                StateKind::Displayed | StateKind::RetrievingInTransit => {
                    let p = &self.world.presentations[id];
                    if p.display_id != display_id {
                        continue;
                    }
                    if let Some(plan_id) = state.plan_id() {
                        changes.push(Change::RemoveTransit {
                            plan_id: plan_id.to_string(),
                        });
                    }
                    changes.push(Change::PutPlacement {
                        content_id: id.clone(),
                        state: PlacementState::InControl {
                            hold_pose: p.return_pose,
                        },
                    });
                    changes.push(Change::RemovePresentation {
                        content_id: id.clone(),
                    });
                }
                StateKind::PlacingInTransit => {
                    let plan_id = state.plan_id().expect("in transit");
                    if self.world.transits[plan_id].display_id.as_deref() != Some(display_id) {
                        continue;
                    }
                    let origin = apply_transition(state, &LifecycleEvent::Cancel)
                        .expect("cancel is legal in transit");
                    changes.push(Change::RemoveTransit {
                        plan_id: plan_id.to_string(),
                    });
                    changes.push(Change::PutPlacement {
                        content_id: id.clone(),
                        state: origin,
                    });
                }
                StateKind::InControl => {}
            }
        }
        changes.push(Change::RemoveDisplay {
            display_id: display_id.to_string(),
        });
        self.world.commit(changes)
    }

    fn push(&mut self, out: &mut Vec<Outbound>, session_id: &str, message: Message) {
        if let Some(s) = self.sessions.get_mut(session_id) {
            s.out_seq += 1;
            out.push(Outbound {
                session_id: session_id.to_string(),
                envelope: Envelope::new(session_id, s.out_seq, message),
            });
        }
    }

    /// Sends every delta to every registered session except `skip`.
    fn broadcast(&mut self, out: &mut Vec<Outbound>, deltas: &[DDelta], skip: Option<&str>) {
        if deltas.is_empty() {
            return;
        }
        let targets: Vec<String> = self
            .sessions
            .values()
            .filter(|s| s.role.is_some() && Some(s.session_id.as_str()) != skip)
            .map(|s| s.session_id.clone())
            .collect();
        for id in targets {
            for d in deltas {
                self.push(out, &id, Message::Delta(d.clone()));
            }
        }
    }
}

fn forbidden(detail: &str) -> HubError {
    HubError::new(ErrorCode::Forbidden, detail)
}
