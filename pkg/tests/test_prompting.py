import json

import pytest

from comet.prompting import (ALL_TYPES, GenerationConfig, PromptBundle,
                             build_prompt_bundle, build_system_prompt,
                             build_user_prompt)
from comet.track import DanmakuType
from comet.video import SceneClip, TextLevelDescription


class TestGenerationConfig:
    def test_defaults_match_documented_constraints(self):
        c = GenerationConfig()
        assert c.max_len_units == 12
        assert c.max_gap_s == 30.0
        assert c.content_per_min == (15, 25)
        assert c.emotion_per_min == (5, 10)
        assert c.highlights_per_min_min == 10
        assert c.qa_answer_delay_s == 2.0
        assert c.enabled_types == ALL_TYPES

    def test_dict_round_trip(self):
        c = GenerationConfig(max_len_units=9, content_per_min=(10, 20),
                             enabled_types=frozenset({DanmakuType.QA,
                                                      DanmakuType.COMPLIMENT}))
        assert GenerationConfig.from_dict(c.to_dict()) == c

    def test_to_dict_is_json_safe_and_stable(self):
        d = GenerationConfig().to_dict()
        assert json.dumps(d) == json.dumps(GenerationConfig().to_dict())
        assert d["enabled_types"] == sorted(d["enabled_types"])

    @pytest.mark.parametrize("kwargs", [
        {"content_per_min": (25, 15)},
        {"emotion_per_min": (10, 5)},
        {"max_len_units": 0},
        {"max_gap_s": -1.0},
        {"enabled_types": frozenset()},
        {"length_unit": "syllables"},
    ])
    def test_rejects_bad_values(self, kwargs):
        with pytest.raises(ValueError):
            GenerationConfig(**kwargs)


class TestSystemPrompt:
    def test_default_constraint_sentences(self):
        text = build_system_prompt()
        assert "The length of each danmaku should be less than 12." in text
        assert "without long gaps (longer than 30s)" in text
        assert ("about 15-25 content-related danmaku and 5-10 emotion-related "
                "danmaku per minute") in text
        assert "more than **10 highlight** per minute" in text
        assert "Answer should appear within 2 seconds" in text

    def test_constraints_are_templated_from_config(self):
        c = GenerationConfig(max_len_units=8, max_gap_s=45.0,
                             content_per_min=(12, 18), emotion_per_min=(3, 6),
                             highlights_per_min_min=7, qa_answer_delay_s=4.0)
        text = build_system_prompt(c)
        assert "less than 8." in text
        assert "longer than 45s" in text
        assert "about 12-18 content-related danmaku and 3-6 emotion-related" in text
        assert "more than **7 highlight** per minute" in text
        assert "within 4 seconds" in text
        assert "less than 12" not in text

    def test_all_seven_type_sections_present(self):
        text = build_system_prompt()
        for heading in ("Personal Emotion Expression", "Brief Compliment",
                        "Encouragement", "Discussion", "Highlights", "Q&A",
                        "Summary"):
            assert f"### {heading}" in text

    def test_disabled_types_are_omitted(self):
        enabled = ALL_TYPES - {DanmakuType.QA, DanmakuType.COMPLIMENT}
        text = build_system_prompt(GenerationConfig(enabled_types=enabled))
        assert "### Q&A" not in text
        assert "### Brief Compliment" not in text
        assert "### Discussion" in text
        assert "question-and-answer" not in text

    def test_category_blocks_vanish_entirely(self):
        content_only = frozenset({DanmakuType.DISCUSSION, DanmakuType.SUMMARY})
        text = build_system_prompt(GenerationConfig(enabled_types=content_only))
        assert "Generate Emotion-related Danmaku" not in text
        assert "Generate Content-related Danmaku" in text

    def test_response_format_grammar_is_described(self):
        text = build_system_prompt()
        assert "# Emotion-related danmaku" in text
        assert "# Content-related danmaku" in text
        assert "- <role> | <timestamp>: <generated danmaku>" in text


class TestUserPrompt:
    def test_embeds_three_json_parameters(self, personas, manifest300):
        clips = [SceneClip(index=1, start_s=0.0, end_s=300.0, title="All",
                           description="Everything.")]
        text_desc = TextLevelDescription.from_manifest(manifest300)
        user = build_user_prompt(personas, clips, text_desc)
        assert user.startswith("I provide personas{")
        assert '"danmaku_sending_style"' in user
        assert '"title":"All"' in user
        assert manifest300.title in user
        assert "generate danmaku interactions of these personas" in user

    def test_bundle_render_uses_boundary_tokens(self, personas, manifest300):
        clips = [SceneClip(index=1, start_s=0.0, end_s=300.0)]
        bundle = build_prompt_bundle(GenerationConfig(), personas, clips,
                                     TextLevelDescription.from_manifest(manifest300))
        rendered = bundle.render()
        assert rendered.startswith("<|im_start|>system\n")
        assert rendered.count("<|im_end|>") == 2
        assert "<|im_start|>user\n" in rendered

    def test_bundle_is_deterministic(self, personas, manifest300):
        clips = [SceneClip(index=1, start_s=0.0, end_s=300.0)]
        td = TextLevelDescription.from_manifest(manifest300)
        a = build_prompt_bundle(GenerationConfig(), personas, clips, td)
        b = build_prompt_bundle(GenerationConfig(), personas, clips, td)
        assert a.render() == b.render()
