//! Music layout and emphasis selection.

mod common;

use proptest::prelude::*;
use rand::Rng;
use teaser_core::model::{AmplitudeEnvelope, FeatureBundle, Role, Sentence, Speaker, TimeMs, Word};
use teaser_core::production::{
    default_library, detect_emphasis, lay_music, EmphasisSource, MusicError, MusicSegment, MusicStyle,
    MusicTrackMeta, SegmentKind,
};
use teaser_core::refine::build_cutlist;

/// Expected peak onset: the emphasis time, pulled back so the peak fits.
fn expected_onset(track: &MusicTrackMeta, total: u64, emphasis: u64) -> (u64, u64) {
    let p = track.segments.iter().find(|s| s.kind == SegmentKind::Peak).unwrap();
    let len = if p.end_ms - p.start_ms > total { total } else { p.end_ms - p.start_ms };
    let latest = total - len;
    (if emphasis < latest { emphasis } else { latest }, len)
}

fn check_plan(track: &MusicTrackMeta, total: u64, emphasis: u64) -> Result<(), TestCaseError> {
    let plan = lay_music(track, total, emphasis).unwrap();
    let (onset, peak_len) = expected_onset(track, total, emphasis);

    // every millisecond of the teaser is covered exactly once, in order
    let mut at = 0;
    for p in &plan.placements {
        prop_assert_eq!(p.timeline_start_ms, at);
        prop_assert!(p.source_end_ms > p.source_start_ms);
        at += p.source_end_ms - p.source_start_ms;
        // each piece starts at a labeled segment of the same kind and stays inside it
        let seg = track
            .segments
            .iter()
            .find(|s| s.kind == p.kind && s.start_ms == p.source_start_ms)
            .expect("placement starts at a segment");
        prop_assert!(p.source_end_ms <= seg.end_ms);
    }
    prop_assert_eq!(at, total);

    let peaks: Vec<_> = plan.placements.iter().filter(|p| p.kind == SegmentKind::Peak).collect();
    prop_assert_eq!(peaks.len(), 1);
    prop_assert_eq!(peaks[0].timeline_start_ms, onset);
    prop_assert_eq!(plan.peak_timeline_start_ms, onset);
    prop_assert_eq!(peaks[0].source_end_ms - peaks[0].source_start_ms, peak_len);

    // regular pieces walk the regular segments in cyclic order
    let regular: Vec<&MusicSegment> = track.segments.iter().filter(|s| s.kind == SegmentKind::Regular).collect();
    let used: Vec<u64> = plan
        .placements
        .iter()
        .filter(|p| p.kind == SegmentKind::Regular)
        .map(|p| p.source_start_ms)
        .collect();
    for (i, start) in used.iter().enumerate() {
        prop_assert_eq!(*start, regular[i % regular.len()].start_ms);
    }
    Ok(())
}

fn track_strategy() -> impl Strategy<Value = MusicTrackMeta> {
    (prop::collection::vec(500u64..9_000, 1..6), 0usize..6, 1_000u64..12_000, 0u64..400).prop_map(
        |(lens, peak_at, peak_len, gap)| {
            let peak_at = peak_at.min(lens.len());
            let mut segments = Vec::new();
            let mut t = 0;
            for (i, len) in lens.iter().enumerate() {
                if i == peak_at {
                    segments.push(MusicSegment { kind: SegmentKind::Peak, start_ms: t, end_ms: t + peak_len });
                    t += peak_len + gap;
                }
                segments.push(MusicSegment { kind: SegmentKind::Regular, start_ms: t, end_ms: t + len });
                t += len + gap;
            }
            if peak_at == lens.len() {
                segments.push(MusicSegment { kind: SegmentKind::Peak, start_ms: t, end_ms: t + peak_len });
            }
            MusicTrackMeta {
                track_id: "generated".into(),
                style: MusicStyle::Emotional,
                audio_ref: "music/generated.wav".into(),
                segments,
            }
        },
    )
}

#[test]
fn two_hundred_triples_on_the_bundled_library() {
    let library = default_library();
    let mut rng = common::rng(51);
    for _ in 0..200 {
        let track = &library[rng.gen_range(0..library.len())];
        let total = rng.gen_range(1..90_000);
        let emphasis = rng.gen_range(0..total);
        check_plan(track, total, emphasis).unwrap();
    }
}

#[test]
fn peak_clamps_to_the_end_and_shrinks_when_too_long() {
    let library = default_library();
    let up = library.iter().find(|t| t.style == MusicStyle::Uplifting).unwrap();
    let plan = lay_music(up, 30_000, 28_000).unwrap();
    assert_eq!(plan.peak_timeline_start_ms, 30_000 - 7_000);
    let plan = lay_music(up, 5_000, 4_000).unwrap();
    assert_eq!(plan.placements.len(), 1);
    assert_eq!((plan.placements[0].source_start_ms, plan.placements[0].source_end_ms), (12_000, 17_000));
    assert_eq!(lay_music(up, 0, 0), Err(MusicError::ZeroDuration));
    assert!(matches!(lay_music(up, 1_000, 1_000), Err(MusicError::EmphasisOutOfRange { .. })));
}

#[test]
fn invalid_tracks_are_rejected() {
    let mut t = default_library().remove(0);
    t.segments.retain(|s| s.kind == SegmentKind::Peak);
    assert!(matches!(lay_music(&t, 10_000, 0), Err(MusicError::EmptyTrack(_))));
    let mut t = default_library().remove(0);
    t.segments.retain(|s| s.kind == SegmentKind::Regular);
    assert!(matches!(lay_music(&t, 10_000, 0), Err(MusicError::InvalidTrack { .. })));
}

proptest! {
    #[test]
    fn generated_tracks_keep_layout_invariants(
        track in track_strategy(),
        total in 1u64..120_000,
        frac in 0.0f64..1.0,
    ) {
        let emphasis = ((total as f64 * frac) as u64).min(total - 1);
        check_plan(&track, total, emphasis)?;
    }
}

/// One-second sentences with a flat envelope level each.
fn levels_bundle(levels: &[f64]) -> FeatureBundle {
    let mut words = Vec::new();
    let mut sentences = Vec::new();
    let mut samples = Vec::new();
    for (i, &level) in levels.iter().enumerate() {
        let t = i as u64 * 1_000;
        words.push(Word { text: format!("w{i}"), start: TimeMs(t), end: TimeMs(t + 1_000), is_filler: false });
        sentences.push(Sentence {
            id: i,
            first_word: i,
            last_word: i,
            speaker_id: if i % 2 == 0 { "host".into() } else { "guest".into() },
            text: format!("w{i}"),
        });
        samples.extend(std::iter::repeat_n(level, 10));
    }
    FeatureBundle {
        media_ref: "m.mp4".into(),
        duration: TimeMs(levels.len() as u64 * 1_000),
        words,
        sentences,
        speakers: vec![
            Speaker { id: "host".into(), display_name: "H".into(), role: Role::Host },
            Speaker { id: "guest".into(), display_name: "G".into(), role: Role::Guest },
        ],
        envelope: AmplitudeEnvelope { frame_period_ms: 100, samples },
        visibility: vec![],
    }
}

#[test]
fn liveliest_sentence_gets_the_emphasis() {
    let b = levels_bundle(&[0.3, 0.9, 0.5]);
    let cl = build_cutlist(&b, &[0, 1, 2], false).unwrap();
    let e = detect_emphasis(&b, &cl, None).unwrap();
    assert_eq!((e.sentence_id, e.source, e.degraded), (1, EmphasisSource::Liveliness, false));
}

#[test]
fn liveliness_tie_goes_to_the_later_sentence() {
    let b = levels_bundle(&[0.7, 0.2, 0.7]);
    let cl = build_cutlist(&b, &[0, 1, 2], false).unwrap();
    assert_eq!(detect_emphasis(&b, &cl, None).unwrap().sentence_id, 2);
    // "later" means later in the teaser, not in the episode
    let cl = build_cutlist(&b, &[2, 1, 0], false).unwrap();
    assert_eq!(detect_emphasis(&b, &cl, None).unwrap().sentence_id, 0);
}
