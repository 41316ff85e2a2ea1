mod common;

use common::*;
use crossdrop_core::model::control_slot_pose;
use crossdrop_core::transfer::plan_placement_in_slot;
use crossdrop_core::*;
use crossdrop_hub::{ErrorCode, Message};

fn contents() -> Vec<DContentItem> {
    vec![cube("a"), cube("b"), gearbox("g")]
}

fn hand(i: usize) -> DVec3 {
    control_slot_pose::<f64>(i).position
}

#[test]
fn palm_push_places_content_then_lands_with_representation() {
    let mut h = Harness::new(contents(), quick_config());
    let op = h.operator();
    let d = wall("wall", 0.0);
    let ds = h.display(d.clone());

    h.gesture(&op, GesturePayload::Grab { hand_pos: hand(2) });
    assert_eq!(h.engine.held(), Some("g"));
    let seq_before = h.engine.world().seq;
    let out = h.gesture(
        &op,
        GesturePayload::PalmRay {
            ray: aim(hand(2), d.center()),
            action: GestureAction::Push,
        },
    );
    assert_eq!(error_code(&out), None);
    assert_eq!(h.state("g").kind(), StateKind::PlacingInTransit);
    assert_eq!(deltas(&out, &ds).len(), 1);

    // Oracle: the same plan and representation built straight from the modules.
    let item = gearbox("g");
    let plan = plan_placement_in_slot(
        format!("plan-{}", seq_before + 1),
        &item,
        &control_slot_pose(2),
        &d,
        &item.appearance,
        &quick_config().policy,
        0,
    );
    let adapted = Appearance::new(item.appearance.color, plan.end.opacity, plan.end.scale);
    let expected = interpret(&item, &d, &RuleSet::builtin(), &adapted, &plan.end.pose).unwrap();

    assert!(h.tick(0.25).is_empty());
    assert_eq!(h.state("g").kind(), StateKind::PlacingInTransit);
    let out = h.tick(0.5);
    assert_eq!(deltas(&out, &ds).len(), 1);
    match h.state("g") {
        PlacementState::Displayed {
            display_id,
            representation_id,
            anchor_pose,
        } => {
            assert_eq!(display_id, "wall");
            assert_eq!(representation_id, &expected.representation_id);
            assert_eq!(anchor_pose, &plan.end.pose);
        }
        other => panic!("not displayed: {other}"),
    }
    let shown = &h.engine.world().presentations["g"].representation;
    assert_eq!(shown, &expected);
    assert_eq!(shown.mode, RepresentationMode::Exploded);
    assert!(h.engine.world().check_invariants().is_ok());
}

#[test]
fn push_that_misses_is_no_target_and_changes_nothing() {
    let mut h = Harness::new(contents(), quick_config());
    let op = h.operator();
    h.display(wall("wall", 0.0));
    h.gesture(&op, GesturePayload::Grab { hand_pos: hand(0) });
    let before = h.engine.world().clone();
    let out = h.gesture(
        &op,
        GesturePayload::PalmRay {
            ray: aim(hand(0), hand(0) - Vec3::unit_z()),
            action: GestureAction::Push,
        },
    );
    assert_eq!(error_code(&out), Some(ErrorCode::NoTarget));
    assert_eq!(out.len(), 1, "only the error goes out");
    assert_eq!(h.engine.world(), &before);
}

#[test]
fn gestures_from_a_display_are_forbidden() {
    let mut h = Harness::new(contents(), quick_config());
    let ds = h.display(wall("wall", 0.0));
    let before = h.engine.world().clone();
    let out = h.gesture(&ds, GesturePayload::Grab { hand_pos: hand(0) });
    assert_eq!(error_code(&out), Some(ErrorCode::Forbidden));
    let out = h.send(
        &ds,
        Message::PlaceCommand {
            content_id: "a".into(),
            display_id: "wall".into(),
        },
    );
    assert_eq!(error_code(&out), Some(ErrorCode::Forbidden));
    assert_eq!(h.engine.world(), &before);
}

#[test]
fn unregistered_sessions_cannot_act() {
    let mut h = Harness::new(contents(), quick_config());
    let s = h.open();
    let out = h.send(&s, Message::RetrieveCommand { content_id: "a".into() });
    assert_eq!(error_code(&out), Some(ErrorCode::Forbidden));
}

#[test]
fn second_operator_is_forbidden() {
    let mut h = Harness::new(contents(), quick_config());
    h.operator();
    let s = h.open();
    let out = h.send(&s, Message::RegisterOperator {});
    assert_eq!(error_code(&out), Some(ErrorCode::Forbidden));
    assert_eq!(h.engine.session(&s).unwrap().role, None);
}

#[test]
fn duplicate_display_id_is_a_conflict() {
    let mut h = Harness::new(contents(), quick_config());
    h.display(wall("wall", 0.0));
    let s = h.open();
    let out = h.send(&s, Message::RegisterDisplay { profile: wall("wall", 3.0) });
    assert_eq!(error_code(&out), Some(ErrorCode::Conflict));
}

#[test]
fn unknown_ids_are_not_found() {
    let mut h = Harness::new(contents(), quick_config());
    let op = h.operator();
    h.display(wall("wall", 0.0));
    let out = h.send(
        &op,
        Message::PlaceCommand {
            content_id: "nope".into(),
            display_id: "wall".into(),
        },
    );
    assert_eq!(error_code(&out), Some(ErrorCode::NotFound));
    let out = h.send(
        &op,
        Message::PlaceCommand {
            content_id: "a".into(),
            display_id: "nope".into(),
        },
    );
    assert_eq!(error_code(&out), Some(ErrorCode::NotFound));
    let out = h.send(&op, Message::RetrieveCommand { content_id: "nope".into() });
    assert_eq!(error_code(&out), Some(ErrorCode::NotFound));
}

#[test]
fn illegal_lifecycle_steps_are_rejected() {
    let mut h = Harness::new(contents(), quick_config());
    let op = h.operator();
    h.display(wall("wall", 0.0));
    let out = h.send(&op, Message::RetrieveCommand { content_id: "a".into() });
    assert_eq!(error_code(&out), Some(ErrorCode::TransitionRejected));
    let place = Message::PlaceCommand {
        content_id: "a".into(),
        display_id: "wall".into(),
    };
    assert_eq!(error_code(&h.send(&op, place.clone())), None);
    assert_eq!(error_code(&h.send(&op, place)), Some(ErrorCode::TransitionRejected));
}

#[test]
fn tick_without_transits_is_identity() {
    let mut h = Harness::new(contents(), quick_config());
    h.display(wall("wall", 0.0));
    let before = h.engine.world().clone();
    assert!(h.tick(5.0).is_empty());
    assert_eq!(h.engine.world(), &before);
}

#[test]
fn time_regression_is_rejected() {
    let mut h = Harness::new(contents(), quick_config());
    h.tick(1.0);
    let err = h.engine.tick(0.5).unwrap_err();
    assert_eq!(err.code, ErrorCode::InvalidArgument);
    assert_eq!(h.engine.last_tick(), 1.0);
}

fn completion_order(first: &str, second: &str) -> Vec<String> {
    let mut h = Harness::new(contents(), quick_config());
    let op = h.operator();
    h.display(wall("w1", -2.0));
    let ds = h.display(wall("w2", 2.0));
    for (c, d) in [(first, "w1"), (second, "w2")] {
        let out = h.send(
            &op,
            Message::PlaceCommand {
                content_id: c.into(),
                display_id: d.into(),
            },
        );
        assert_eq!(error_code(&out), None);
    }
    let out = h.tick(0.5);
    deltas(&out, &ds)
        .iter()
        .map(|d| match &d.changes[0] {
            Change::RemoveTransit { plan_id } => plan_id.clone(),
            other => panic!("unexpected change {other:?}"),
        })
        .collect()
}

#[test]
fn same_tick_completions_follow_plan_creation_order() {
    // plan ids are named after the commit that created them, so the
    // expected order is the order of the commands, whichever content goes first.
    assert_eq!(completion_order("a", "b"), ["plan-3", "plan-4"]);
    assert_eq!(completion_order("b", "a"), ["plan-3", "plan-4"]);
    assert_eq!(completion_order("a", "b"), completion_order("a", "b"));
}

#[test]
fn retrieval_returns_content_to_its_release_pose() {
    let mut h = Harness::new(contents(), quick_config());
    let op = h.operator();
    h.display(wall("wall", 0.0));
    h.send(
        &op,
        Message::PlaceCommand {
            content_id: "a".into(),
            display_id: "wall".into(),
        },
    );
    h.tick(0.5);
    assert!(h.state("a").is_displayed());
    let out = h.send(&op, Message::RetrieveCommand { content_id: "a".into() });
    assert_eq!(error_code(&out), None);
    assert_eq!(h.state("a").kind(), StateKind::RetrievingInTransit);
    h.tick(1.0);
    match h.state("a") {
        PlacementState::InControl { hold_pose } => {
            assert!((hold_pose.position - hand(0)).norm() < 1e-12);
        }
        other => panic!("not back: {other}"),
    }
    assert!(h.engine.world().presentations.is_empty());
    assert_eq!(h.engine.held(), Some("a"));
}

#[test]
fn palm_pull_takes_the_newest_item_and_gaze_pull_the_looked_at_one() {
    let mut h = Harness::new(contents(), quick_config());
    let op = h.operator();
    let d = wall("wall", 0.0);
    h.display(d.clone());
    for c in ["a", "b"] {
        h.send(
            &op,
            Message::PlaceCommand {
                content_id: c.into(),
                display_id: "wall".into(),
            },
        );
    }
    h.tick(0.5);
    assert_eq!(h.engine.world().displayed_on("wall"), ["b", "a"]);

    let eye = Vec3::new(0.0, 1.6, 0.0);
    let out = h.gesture(
        &op,
        GesturePayload::PalmRay {
            ray: aim(eye, d.center()),
            action: GestureAction::Pull,
        },
    );
    assert_eq!(error_code(&out), None);
    assert_eq!(h.state("b").kind(), StateKind::RetrievingInTransit);

    let a_anchor = match h.state("a") {
        PlacementState::Displayed { anchor_pose, .. } => anchor_pose.position,
        other => panic!("{other}"),
    };
    let out = h.gesture(
        &op,
        GesturePayload::GazePinch {
            gaze: aim(eye, a_anchor),
            action: GestureAction::Pull,
        },
    );
    assert_eq!(error_code(&out), None);
    assert_eq!(h.state("a").kind(), StateKind::RetrievingInTransit);
}

#[test]
fn gaze_push_sends_held_content() {
    let mut h = Harness::new(contents(), quick_config());
    let op = h.operator();
    let d = wall("wall", 0.0);
    h.display(d.clone());
    h.gesture(&op, GesturePayload::Grab { hand_pos: hand(1) });
    let out = h.gesture(
        &op,
        GesturePayload::GazePinch {
            gaze: aim(Vec3::new(0.0, 1.6, 0.0), d.center()),
            action: GestureAction::Push,
        },
    );
    assert_eq!(error_code(&out), None);
    assert_eq!(h.state("b").kind(), StateKind::PlacingInTransit);
    assert_eq!(h.engine.held(), None);
}

#[test]
fn push_without_holding_is_no_target() {
    let mut h = Harness::new(contents(), quick_config());
    let op = h.operator();
    let d = wall("wall", 0.0);
    h.display(d.clone());
    let out = h.gesture(
        &op,
        GesturePayload::PalmRay {
            ray: aim(Vec3::zero(), d.center()),
            action: GestureAction::Push,
        },
    );
    assert_eq!(error_code(&out), Some(ErrorCode::NoTarget));
}

#[test]
fn release_throws_along_a_ray_or_moves_the_hold_pose() {
    let mut h = Harness::new(contents(), quick_config());
    let op = h.operator();
    let d = wall("wall", 0.0);
    h.display(d.clone());

    h.gesture(&op, GesturePayload::Grab { hand_pos: hand(0) });
    let moved = Pose::from_position(Vec3::new(0.3, 1.0, 0.2));
    let out = h.gesture(
        &op,
        GesturePayload::Release {
            release_pose: moved,
            ray: None,
        },
    );
    assert_eq!(error_code(&out), None);
    assert_eq!(h.state("a"), &PlacementState::InControl { hold_pose: moved });

    h.gesture(&op, GesturePayload::Grab { hand_pos: moved.position });
    assert_eq!(h.engine.held(), Some("a"));
    h.gesture(
        &op,
        GesturePayload::Release {
            release_pose: moved,
            ray: Some(aim(moved.position, d.center())),
        },
    );
    assert_eq!(h.state("a").kind(), StateKind::PlacingInTransit);
}

#[test]
fn stale_gesture_and_envelope_seqs_are_rejected() {
    let mut h = Harness::new(contents(), quick_config());
    let op = h.operator();
    let grab = |seq| Message::Gesture {
        event: GestureEvent {
            seq,
            time: 0.0,
            payload: GesturePayload::Grab { hand_pos: hand(0) },
        },
    };
    assert_eq!(error_code(&h.send(&op, grab(5))), None);
    assert_eq!(error_code(&h.send(&op, grab(5))), Some(ErrorCode::InvalidArgument));

    let env = crossdrop_hub::Envelope::new(op.clone(), 1, Message::RequestSnapshot {});
    let out = h.engine.handle(&op, env, 0.0);
    assert_eq!(error_code(&out), Some(ErrorCode::ProtocolError));
}

#[test]
fn display_disconnect_returns_its_content_and_cancels_incoming() {
    let mut h = Harness::new(contents(), quick_config());
    let op = h.operator();
    let ds = h.display(wall("wall", 0.0));
    h.display(wall("other", 3.0));
    h.send(
        &op,
        Message::PlaceCommand {
            content_id: "a".into(),
            display_id: "wall".into(),
        },
    );
    h.tick(0.5);
    for (c, d) in [("b", "wall"), ("g", "other")] {
        h.send(
            &op,
            Message::PlaceCommand {
                content_id: c.into(),
                display_id: d.into(),
            },
        );
    }
    let out = h.engine.close_session(&ds);
    assert_eq!(deltas(&out, &op).len(), 1, "one atomic delta");
    let w = h.engine.world();
    assert_eq!(w.placements["a"], PlacementState::InControl { hold_pose: control_slot_pose(0) });
    assert_eq!(w.placements["b"], PlacementState::InControl { hold_pose: control_slot_pose(1) });
    assert_eq!(w.placements["g"].kind(), StateKind::PlacingInTransit);
    assert!(!w.displays.contains_key("wall"));
    assert!(w.check_invariants().is_ok());
}

#[test]
fn silent_sessions_expire() {
    let mut cfg = quick_config();
    cfg.session_timeout = Some(2.0);
    let mut h = Harness::new(contents(), cfg);
    let op = h.operator();
    let ds = h.display(wall("wall", 0.0));
    h.tick(1.5);
    h.send(&op, Message::Ack { seq: 0 });
    h.tick(2.5);
    assert!(h.engine.session(&op).is_some());
    assert!(h.engine.session(&ds).is_none());
    assert!(h.engine.world().displays.is_empty());
}

#[test]
fn registration_gets_ack_then_snapshot() {
    let mut h = Harness::new(contents(), quick_config());
    let s = h.open();
    let out = h.send(&s, Message::RegisterDisplay { profile: wall("wall", 0.0) });
    let kinds: Vec<&str> = out.iter().map(|o| o.envelope.message.name()).collect();
    assert_eq!(kinds, ["Ack", "Snapshot"]);
    match &out[1].envelope.message {
        Message::Snapshot { world } => assert!(world.displays.contains_key("wall")),
        _ => unreachable!(),
    }
}

#[test]
fn every_session_sees_contiguous_seqs_and_converges() {
    let mut h = Harness::new(contents(), quick_config());
    let op = h.operator();
    let d1 = h.display(wall("w1", -2.0));
    let d2 = h.display(wall("w2", 2.0));
    let steps: Vec<Message> = vec![
        Message::PlaceCommand { content_id: "a".into(), display_id: "w1".into() },
        Message::PlaceCommand { content_id: "g".into(), display_id: "w2".into() },
        Message::RetrieveCommand { content_id: "a".into() },
        Message::PlaceCommand { content_id: "b".into(), display_id: "w1".into() },
    ];
    for (i, m) in steps.into_iter().enumerate() {
        h.send(&op, m);
        h.tick(0.5 * (i + 1) as f64);
    }
    h.send(&d1, Message::RequestSnapshot {});
    for s in [&op, &d1, &d2] {
        let seqs: Vec<u64> = h.inbox[s.as_str()].iter().map(|e| e.seq).collect();
        assert_eq!(seqs, (1..=seqs.len() as u64).collect::<Vec<_>>());
        assert_eq!(&h.replica(s), h.engine.world(), "session {s}");
    }
}

#[test]
fn identical_inputs_give_identical_bytes() {
    let run = || {
        let mut h = Harness::new(contents(), quick_config());
        let op = h.operator();
        let d = wall("wall", 0.0);
        h.display(d.clone());
        let mut bytes = Vec::new();
        let mut outs = h.gesture(&op, GesturePayload::Grab { hand_pos: hand(2) });
        outs.extend(h.gesture(
            &op,
            GesturePayload::PalmRay {
                ray: aim(hand(2), d.center()),
                action: GestureAction::Push,
            },
        ));
        outs.extend(h.tick(0.5));
        for o in outs {
            bytes.extend(crossdrop_hub::encode(&o.envelope));
        }
        bytes
    };
    assert_eq!(run(), run());
}

/// Two would-be operators, every interleaving of their commands. Only the
/// first to register may act, and no interleaving breaks exclusivity.
#[test]
fn interleavings_of_two_operators_keep_exclusivity() {
    let script = |d: &str| {
        vec![
            Message::RegisterOperator {},
            Message::PlaceCommand { content_id: "a".into(), display_id: d.into() },
            Message::RetrieveCommand { content_id: "a".into() },
        ]
    };
    let scripts = [script("w1"), script("w2")];
    // Each interleaving is a 6-bit choice sequence with three picks of each side.
    for mask in 0u32..64 {
        if mask.count_ones() != 3 {
            continue;
        }
        for tick_between in [false, true] {
            let mut h = Harness::new(contents(), quick_config());
            h.display(wall("w1", -2.0));
            h.display(wall("w2", 2.0));
            let sessions = [h.open(), h.open()];
            let mut next = [0usize, 0];
            let mut first_operator = None;
            for step in 0..6 {
                let who = ((mask >> step) & 1) as usize;
                let msg = scripts[who][next[who]].clone();
                next[who] += 1;
                let out = h.send(&sessions[who], msg.clone());
                if matches!(msg, Message::RegisterOperator {}) && error_code(&out).is_none() {
                    first_operator.get_or_insert(who);
                }
                if Some(who) != first_operator {
                    assert_eq!(error_code(&out), Some(ErrorCode::Forbidden), "mask {mask:06b} step {step}");
                }
                if tick_between {
                    let t = h.now + 0.5;
                    h.tick(t);
                }
                let w = h.engine.world();
                w.check_invariants().unwrap();
                let shown: Vec<_> = w.presentations.keys().collect();
                assert!(shown.len() <= 1);
            }
        }
    }
}
