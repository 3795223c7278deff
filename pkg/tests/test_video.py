import json

import pytest

from comet.errors import EmptyManifest, MalformedHints, NoScenesFound, ZeroLengthClip
from comet.video import (CLIP_DESCRIPTION_INSTRUCTIONS, SceneClip,
                         SegmentationParams, TextLevelDescription,
                         TranscriptSegment, VideoManifest,
                         build_clip_description_prompt, manifest_from_json,
                         manifest_to_json, parse_clip_descriptions,
                         render_clip_descriptions, round_half_up,
                         sample_frame_times, segment_scenes)
from conftest import make_manifest


class TestManifest:
    def test_round_trip(self, manifest300):
        again = manifest_from_json(manifest_to_json(manifest300))
        assert again == manifest300

    def test_rejects_unknown_keys(self, manifest300):
        data = json.loads(manifest_to_json(manifest300))
        data["surprise"] = 1
        with pytest.raises(ValueError, match="unknown manifest keys"):
            manifest_from_json(json.dumps(data))

    def test_rejects_zero_duration(self):
        with pytest.raises(EmptyManifest):
            make_manifest(duration_s=0.0, transcript=())

    def test_rejects_overlapping_transcript(self):
        segs = (TranscriptSegment(0, 10, "one"), TranscriptSegment(5, 15, "two"))
        with pytest.raises(ValueError, match="overlap"):
            make_manifest(duration_s=20.0, transcript=segs)

    def test_rejects_out_of_order_transcript(self):
        segs = (TranscriptSegment(10, 20, "one"), TranscriptSegment(0, 5, "two"))
        with pytest.raises(ValueError):
            make_manifest(duration_s=30.0, transcript=segs)

    def test_rejects_segment_past_duration(self):
        segs = (TranscriptSegment(0, 40, "one"),)
        with pytest.raises(ValueError):
            make_manifest(duration_s=30.0, transcript=segs)

    def test_rejects_empty_segment_text(self):
        with pytest.raises(ValueError):
            TranscriptSegment(0, 10, "   ")

    def test_rejects_unsorted_frame_scores(self):
        with pytest.raises(ValueError):
            make_manifest(frame_scores=((10.0, 5.0), (5.0, 3.0)))


class TestSegmentation:
    def test_hints_partition_exactly(self):
        m = make_manifest(scene_hints=(
            (0.5, 90.0, "intro"), (95.0, 200.0, "body"), (200.0, 290.0, "end")))
        clips = segment_scenes(m)
        assert clips[0].start_s == 0.0
        assert clips[-1].end_s == m.duration_s
        for a, b in zip(clips, clips[1:]):
            assert a.end_s == b.start_s
        assert [c.title for c in clips] == ["intro", "body", "end"]

    def test_hints_overlap_rejected(self):
        m = make_manifest(scene_hints=((0.0, 100.0, "a"), (90.0, 200.0, "b")))
        with pytest.raises(MalformedHints):
            segment_scenes(m)

    def test_frame_scores_threshold_and_min_length(self):
        scores = tuple((float(t), 30.0 if t in (50, 55, 120) else 1.0)
                       for t in range(0, 300, 5))
        m = make_manifest(frame_scores=scores)
        clips = segment_scenes(m)
        # 55 is above threshold but within min_len_s of the cut at 50
        assert [c.start_s for c in clips] == [0.0, 50.0, 120.0]
        assert clips[-1].end_s == 300.0

    def test_threshold_scan_monotone(self):
        # raising the threshold can only reduce the number of clips
        scores = tuple((float(t), float(t % 37)) for t in range(0, 300, 5))
        counts = []
        for threshold in (1.0, 10.0, 20.0, 27.0, 36.0, 100.0):
            m = make_manifest(frame_scores=scores)
            clips = segment_scenes(m, SegmentationParams(threshold=threshold))
            counts.append(len(clips))
        assert counts == sorted(counts, reverse=True)
        assert counts[-1] == 1

    def test_transcript_pause_fallback(self):
        segs = (TranscriptSegment(0, 50, "a"), TranscriptSegment(56, 100, "b"),
                TranscriptSegment(101, 150, "c"))
        m = make_manifest(duration_s=150.0, transcript=segs)
        clips = segment_scenes(m)
        # only the 6 s silence yields a boundary, at its midpoint
        assert [c.start_s for c in clips] == [0.0, 53.0]

    def test_clips_cover_duration_without_gaps(self, manifest300):
        clips = segment_scenes(manifest300)
        assert clips[0].start_s == 0.0
        assert clips[-1].end_s == manifest300.duration_s
        for a, b in zip(clips, clips[1:]):
            assert a.end_s == b.start_s


class TestFrameSampling:
    def test_rate_is_five_per_minute(self):
        clip = SceneClip(index=1, start_s=0.0, end_s=120.0)
        times = sample_frame_times(clip)
        assert len(times) == 10

    def test_short_clip_gets_one_frame(self):
        clip = SceneClip(index=1, start_s=10.0, end_s=14.0)
        assert sample_frame_times(clip) == [12.0]

    def test_midpoint_positions(self):
        clip = SceneClip(index=1, start_s=0.0, end_s=60.0)
        times = sample_frame_times(clip)
        assert times == [6.0, 18.0, 30.0, 42.0, 54.0]

    def test_zero_length_clip_raises(self):
        with pytest.raises(ZeroLengthClip):
            sample_frame_times(SceneClip(index=1, start_s=5.0, end_s=5.0))

    def test_round_half_up(self):
        assert round_half_up(0.5) == 1
        assert round_half_up(1.5) == 2
        assert round_half_up(2.4) == 2
        assert round_half_up(-0.5) == 0


class TestClipDescriptions:
    def test_golden_sample_parses_nine_scenes(self, golden_clips):
        clips = parse_clip_descriptions(golden_clips, duration_s=340.0)
        assert len(clips) == 9
        assert clips[0].title == "Introduction to Brain Lateralization"
        assert clips[0].start_s == pytest.approx(0.04)
        assert clips[0].end_s == pytest.approx(6.84)
        assert clips[2].title == "Handedness and Language Processing"
        assert clips[2].start_s == pytest.approx(25.28)
        assert clips[2].end_s == pytest.approx(56.28)
        assert clips[-1].title == "Philosophical Implications"
        assert clips[-1].end_s == pytest.approx(337.64)
        assert clips[0].description.startswith(
            "The video begins with a speaker standing at a podium")

    def test_render_parse_round_trip(self, golden_clips):
        clips = parse_clip_descriptions(golden_clips, duration_s=340.0)
        again = parse_clip_descriptions(render_clip_descriptions(clips), 340.0)
        assert again == clips

    def test_prose_without_scenes_raises(self):
        with pytest.raises(NoScenesFound):
            parse_clip_descriptions("The video shows a lecture.", 100.0)

    def test_blocks_with_bad_ranges_are_skipped(self):
        text = ("### Scene 1: Good\n**Time Range:** 0:00:00 - 0:01:00\n"
                "**Description:** fine\n\n"
                "### Scene 2: Bad\n**Time Range:** eh - meh\n"
                "**Description:** dropped\n")
        clips = parse_clip_descriptions(text, 100.0)
        assert [c.title for c in clips] == ["Good"]

    def test_out_of_order_scenes_are_sorted_and_reindexed(self):
        text = ("### Scene 7: Later\n**Time Range:** 0:02:00 - 0:03:00\n"
                "**Description:** d\n\n"
                "### Scene 2: Earlier\n**Time Range:** 0:00:00 - 0:01:00\n"
                "**Description:** d\n")
        clips = parse_clip_descriptions(text, 300.0)
        assert [(c.index, c.title) for c in clips] == [(1, "Earlier"), (2, "Later")]

    def test_times_clamped_to_duration(self):
        text = ("### Scene 1: Long\n**Time Range:** 0:00:00 - 0:10:00\n"
                "**Description:** d\n")
        clips = parse_clip_descriptions(text, 120.0)
        assert clips[0].end_s == 120.0

    def test_prompt_contains_frames_and_transcript(self):
        clip = SceneClip(index=1, start_s=0.0, end_s=60.0)
        segs = [TranscriptSegment(0, 10, "hello world")]
        prompt = build_clip_description_prompt(clip, ["f1", "f2", "f3", "f4", "f5"],
                                               segs)
        assert prompt.startswith(CLIP_DESCRIPTION_INSTRUCTIONS)
        assert "00:00:06: f1" in prompt
        assert "00:00:00 - 00:00:10: hello world" in prompt

    def test_prompt_requires_frames(self):
        clip = SceneClip(index=1, start_s=0.0, end_s=60.0)
        with pytest.raises(ValueError):
            build_clip_description_prompt(clip, [], [])


def test_text_level_description_is_canonical(manifest300):
    a = TextLevelDescription.from_manifest(manifest300)
    b = TextLevelDescription.from_manifest(manifest300)
    assert a.to_json() == b.to_json()
    data = json.loads(a.to_json())
    assert data["meta"]["title"] == manifest300.title
    assert len(data["transcript"]) == len(manifest300.transcript)
