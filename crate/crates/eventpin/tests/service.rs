mod common;

use common::{message, service_at, ts, Recorder, INVITATION};
use eventpin::service::EventFilter;
use eventpin::ServiceError;
use eventpin_core::schedule::{NotificationKind, NotificationState};
use eventpin_core::time::format_timestamp;
use eventpin_core::{EventStatus, PriorityLevel, UserPreferences};

#[test]
fn invitation_scan_yields_two_scheduled_events() {
    let dir = tempfile::tempdir().unwrap();
    let sink = Recorder::default();
    let mut svc = service_at(&dir.path().join("log.jsonl"), &sink);
    let now = ts("2023-07-01T14:32");
    assert!(svc.run_scan(now).unwrap().new_events.is_empty());

    svc.ingest(&[message("family", "Priya", "2023-07-01T14:32", INVITATION, true)], now)
        .unwrap();
    let report = svc.run_scan(now).unwrap();
    let mut got: Vec<(String, String)> = report
        .new_events
        .iter()
        .map(|e| (e.event.event_type.clone(), format_timestamp(&e.event.occurs_at)))
        .collect();
    got.sort();
    assert_eq!(
        got,
        [
            ("marriage".to_string(), "2023-08-01T10:00".to_string()),
            ("reception".to_string(), "2023-08-01T18:00".to_string())
        ]
    );
    for e in &report.new_events {
        assert!(!e.schedule.is_empty());
        assert_eq!(e.schedule[0].kind, NotificationKind::Detection);
        assert_eq!(e.schedule[0].fire_at, now);
    }
    assert!(svc.run_scan(now).unwrap().new_events.is_empty());
}

#[test]
fn ingest_is_idempotent() {
    let dir = tempfile::tempdir().unwrap();
    let mut svc = service_at(&dir.path().join("log.jsonl"), &Recorder::default());
    let now = ts("2023-07-01T15:00");
    let m = |t: &str| message("c", "A", "2023-07-01T14:00", t, false);
    let three = [m("one"), m("two"), m("three")];
    assert_eq!(svc.ingest(&three, now).unwrap(), 3);
    assert_eq!(svc.ingest(&three, now).unwrap(), 0);
    assert_eq!(svc.ingest(&[m("four"), m("five"), m("one")], now).unwrap(), 2);
}

#[test]
fn tick_delivers_once_and_retries_failed_sinks_without_duplicates() {
    let dir = tempfile::tempdir().unwrap();
    let sink = Recorder::default();
    let mut svc = service_at(&dir.path().join("log.jsonl"), &sink);
    let now = ts("2023-07-01T14:32");
    svc.ingest(&[message("family", "Priya", "2023-07-01T14:32", INVITATION, true)], now)
        .unwrap();
    svc.run_scan(now).unwrap();

    sink.set_down(true);
    let seq_before = svc.store().state().last_seq;
    let report = svc.tick(now).unwrap();
    assert!(report.delivered.is_empty());
    assert_eq!(report.failures.len(), 2);
    assert_eq!(svc.store().state().last_seq, seq_before);

    sink.set_down(false);
    let report = svc.tick(ts("2023-07-01T14:33")).unwrap();
    assert_eq!(report.delivered.len(), 2);
    assert_eq!(svc.store().state().last_seq, seq_before + 2);
    assert!(svc.tick(ts("2023-07-01T14:33")).unwrap().delivered.is_empty());
    assert_eq!(sink.ids().len(), 2);
}

#[test]
fn delivered_notifications_stay_pinned_across_restart_until_acked() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("log.jsonl");
    let sink = Recorder::default();
    let now = ts("2023-07-01T14:32");
    let delivered = {
        let mut svc = service_at(&path, &sink);
        svc.ingest(&[message("family", "Priya", "2023-07-01T14:32", INVITATION, true)], now)
            .unwrap();
        svc.run_scan(now).unwrap();
        svc.tick(now).unwrap().delivered
    };
    assert_eq!(delivered.len(), 2);

    let mut svc = service_at(&path, &sink);
    let pinned = svc.notifications(Some(NotificationState::Pending));
    for n in &delivered {
        assert!(pinned
            .iter()
            .any(|p| p.id == n.id && p.state == NotificationState::Delivered));
    }
    assert_eq!(svc.notifications(Some(NotificationState::Delivered)).len(), 2);
    svc.acknowledge(&delivered[0].id, now).unwrap();
    drop(svc);

    let svc = service_at(&path, &sink);
    let pinned = svc.notifications(None);
    assert!(!pinned.iter().any(|p| p.id == delivered[0].id));
    assert!(pinned.iter().any(|p| p.id == delivered[1].id));
    assert!(pinned.windows(2).all(|w| w[0].fire_at <= w[1].fire_at));
}

#[test]
fn late_discovery_gets_one_detection_and_ack_retires_the_event() {
    let dir = tempfile::tempdir().unwrap();
    let mut svc = service_at(&dir.path().join("log.jsonl"), &Recorder::default());
    let now = ts("2023-07-10T09:00");
    svc.ingest(
        &[message("c", "A", "2023-07-01T14:32", "party tomorrow at 6pm", false)],
        now,
    )
    .unwrap();
    let report = svc.run_scan(now).unwrap();
    assert_eq!(report.new_events.len(), 1);
    assert_eq!(report.planned.len(), 1);
    let event_id = report.new_events[0].event.id.clone();
    let n = svc.tick(now).unwrap().delivered.pop().unwrap();
    assert_eq!(n.kind, NotificationKind::Detection);
    assert_eq!(svc.event_view(&event_id).unwrap().event.status, EventStatus::Expired);
    svc.acknowledge(&n.id, now).unwrap();
    assert_eq!(
        svc.event_view(&event_id).unwrap().event.status,
        EventStatus::Acknowledged
    );
    assert!(matches!(
        svc.acknowledge("missing", now),
        Err(ServiceError::UnknownId(_))
    ));
}

#[test]
fn reminders_due_after_the_event_are_cancelled_not_sent() {
    let dir = tempfile::tempdir().unwrap();
    let sink = Recorder::default();
    let mut svc = service_at(&dir.path().join("log.jsonl"), &sink);
    let now = ts("2023-07-01T12:00");
    svc.ingest(
        &[message("c", "A", "2023-07-01T11:00", "dinner on 20 july at 8pm", false)],
        now,
    )
    .unwrap();
    svc.run_scan(now).unwrap();
    let report = svc.tick(ts("2023-07-25T00:00")).unwrap();
    assert!(report.delivered.iter().all(|n| n.kind == NotificationKind::Detection));
    assert!(!report.cancelled.is_empty());
    assert!(svc
        .notifications(Some(NotificationState::Pending))
        .iter()
        .all(|n| n.kind == NotificationKind::Detection));
}

#[test]
fn feedback_replans_unfired_notifications() {
    let dir = tempfile::tempdir().unwrap();
    let mut svc = service_at(&dir.path().join("log.jsonl"), &Recorder::default());
    let now = ts("2023-07-01T12:00");
    svc.ingest(
        &[message(
            "c",
            "A",
            "2023-07-01T11:00",
            "interview on 11 july at 3pm",
            false,
        )],
        now,
    )
    .unwrap();
    let id = svc.run_scan(now).unwrap().new_events[0].event.id.clone();
    svc.tick(now).unwrap();

    let low = svc.apply_feedback(&id, PriorityLevel::Low, now).unwrap();
    assert_eq!(low.priority, PriorityLevel::Low);
    let reminders = |v: &eventpin::service::EventView| {
        v.schedule
            .iter()
            .filter(|n| n.kind == NotificationKind::Reminder)
            .map(|n| format_timestamp(&n.fire_at))
            .collect::<Vec<_>>()
    };
    assert_eq!(reminders(&low), ["2023-07-10T15:00"]);

    let high = svc.apply_feedback(&id, PriorityLevel::High, now).unwrap();
    assert_eq!(high.priority, PriorityLevel::High);
    assert_eq!(
        reminders(&high),
        ["2023-07-04T15:00", "2023-07-10T15:00", "2023-07-11T12:00"]
    );
    let detections = high
        .schedule
        .iter()
        .filter(|n| n.kind == NotificationKind::Detection)
        .count();
    assert_eq!(detections, 1);
    assert_eq!(svc.store().state().feedback.len(), 2);
    assert_eq!(svc.model().unwrap().len(), 32);
}

#[test]
fn event_filters_and_preferences() {
    let dir = tempfile::tempdir().unwrap();
    let mut svc = service_at(&dir.path().join("log.jsonl"), &Recorder::default());
    let now = ts("2023-07-01T14:32");
    svc.ingest(&[message("family", "Priya", "2023-07-01T14:32", INVITATION, true)], now)
        .unwrap();
    svc.run_scan(now).unwrap();
    let evening = EventFilter {
        from: Some(ts("2023-08-01T12:00")),
        ..EventFilter::default()
    };
    assert_eq!(svc.events(&evening).len(), 1);
    let acked = EventFilter {
        status: Some(EventStatus::Acknowledged),
        ..EventFilter::default()
    };
    assert!(svc.events(&acked).is_empty());

    let mut prefs = UserPreferences::default();
    prefs.sender_affinity.insert("Priya".into(), 2.0);
    assert!(matches!(
        svc.set_preferences(prefs.clone(), now),
        Err(ServiceError::Preferences(_))
    ));
    prefs.sender_affinity.insert("Priya".into(), 1.0);
    svc.set_preferences(prefs.clone(), now).unwrap();
    assert_eq!(svc.preferences(), &prefs);
}
