#![allow(dead_code)]

use std::collections::BTreeMap;

use crossdrop_core::*;
use crossdrop_hub::{Engine, EngineConfig, Envelope, Message, Outbound};

pub fn display(id: &str, kind: DisplayKind, audience: Audience, center: DVec3) -> DDisplayProfile {
    DisplayProfile {
        id: id.into(),
        kind,
        surface_pose: Pose::from_position(center),
        width: 1.6,
        height: 0.9,
        supports_3d: false,
        audience,
        opacity_multiplier: 0.8,
    }
}

pub fn wall(id: &str, x: f64) -> DDisplayProfile {
    display(id, DisplayKind::WallProjector, Audience::Engineer, Vec3::new(x, 1.2, 4.0))
}

pub fn cube(id: &str) -> DContentItem {
    ContentItem {
        id: id.into(),
        kind: ContentKind::Primitive,
        bounds: Aabb::cube(0.2),
        components: vec![],
        appearance: Appearance::new(Rgba([200, 40, 40, 255]), 1.0, 1.0),
        title: id.into(),
    }
}

pub fn gearbox(id: &str) -> DContentItem {
    let parts = [(-0.1, 0.0, 0.0), (0.1, 0.0, 0.0), (0.0, 0.08, 0.0)];
    ContentItem {
        id: id.into(),
        kind: ContentKind::Assembly,
        bounds: Aabb::new(Vec3::zero(), Vec3::new(0.2, 0.15, 0.1)),
        components: parts
            .iter()
            .enumerate()
            .map(|(i, &(x, y, z))| Component {
                id: format!("{id}-p{i}"),
                local_pose: Pose::from_position(Vec3::new(x, y, z)),
                bounds: Aabb::new(Vec3::zero(), Vec3::new(0.05, 0.05, 0.05)),
                label: format!("Part {i}"),
                detail_text: format!("detail {i}"),
            })
            .collect(),
        appearance: Appearance::new(Rgba([90, 120, 150, 255]), 1.0, 1.0),
        title: "Gearbox".into(),
    }
}

pub fn quick_config() -> EngineConfig {
    EngineConfig {
        policy: TransferPolicy {
            duration: 0.5,
            ..TransferPolicy::default()
        },
        ..EngineConfig::default()
    }
}

/// Engine plus per-session bookkeeping: outbound seqs and client-side replicas.
pub struct Harness {
    pub engine: Engine,
    pub now: f64,
    seqs: BTreeMap<String, u64>,
    pub inbox: BTreeMap<String, Vec<Envelope>>,
    gesture_seq: u64,
}

impl Harness {
    pub fn new(contents: Vec<DContentItem>, config: EngineConfig) -> Self {
        Self {
            engine: Engine::with_contents(contents, config),
            now: 0.0,
            seqs: BTreeMap::new(),
            inbox: BTreeMap::new(),
            gesture_seq: 0,
        }
    }

    pub fn open(&mut self) -> String {
        let id = self.engine.open_session(self.now);
        self.seqs.insert(id.clone(), 0);
        self.inbox.insert(id.clone(), Vec::new());
        id
    }

    pub fn operator(&mut self) -> String {
        let s = self.open();
        let out = self.send(&s, Message::RegisterOperator {});
        assert!(matches!(out[0].envelope.message, Message::Ack { .. }), "{out:?}");
        s
    }

    pub fn display(&mut self, profile: DDisplayProfile) -> String {
        let s = self.open();
        let out = self.send(&s, Message::RegisterDisplay { profile });
        assert!(matches!(out[0].envelope.message, Message::Ack { .. }), "{out:?}");
        s
    }

    pub fn send(&mut self, session: &str, message: Message) -> Vec<Outbound> {
        let seq = self.seqs.get_mut(session).expect("open session");
        *seq += 1;
        let env = Envelope::new(session, *seq, message);
        let out = self.engine.handle(session, env, self.now);
        self.deliver(&out);
        out
    }

    pub fn gesture(&mut self, session: &str, payload: DGesturePayload) -> Vec<Outbound> {
        self.gesture_seq += 1;
        let event = GestureEvent {
            seq: self.gesture_seq,
            time: self.now,
            payload,
        };
        self.send(session, Message::Gesture { event })
    }

    pub fn tick(&mut self, now: f64) -> Vec<Outbound> {
        self.now = now;
        let out = self.engine.tick(now).expect("monotone clock");
        self.deliver(&out);
        out
    }

    fn deliver(&mut self, out: &[Outbound]) {
        for o in out {
            if let Some(v) = self.inbox.get_mut(&o.session_id) {
                v.push(o.envelope.clone());
            }
        }
    }

    pub fn state(&self, id: &str) -> &DPlacementState {
        &self.engine.world().placements[id]
    }

    /// Rebuilds a session's view from the snapshot and deltas it received.
    pub fn replica(&self, session: &str) -> DWorldState {
        let mut world: Option<DWorldState> = None;
        for env in &self.inbox[session] {
            match &env.message {
                Message::Snapshot { world: w } => world = Some(w.clone()),
                Message::Delta(d) => world
                    .as_mut()
                    .expect("snapshot before deltas")
                    .apply_delta(d)
                    .expect("contiguous deltas"),
                _ => {}
            }
        }
        world.expect("registered session")
    }
}

pub fn error_code(out: &[Outbound]) -> Option<crossdrop_hub::ErrorCode> {
    out.iter().find_map(|o| match &o.envelope.message {
        Message::Error { code, .. } => Some(*code),
        _ => None,
    })
}

pub fn deltas(out: &[Outbound], session: &str) -> Vec<DDelta> {
    out.iter()
        .filter(|o| o.session_id == session)
        .filter_map(|o| match &o.envelope.message {
            Message::Delta(d) => Some(d.clone()),
            _ => None,
        })
        .collect()
}

/// Ray from `from` toward `to`.
pub fn aim(from: DVec3, to: DVec3) -> DRay {
    Ray::towards(from, to).unwrap()
}
