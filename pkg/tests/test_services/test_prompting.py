"""
提示构建测试
"""
import pytest

from app.core.exceptions import StorageException, TemplateSlotMissingException, UnknownTemplateSlotException
from app.models.sensor import SensorKind, TransportMode
from app.services.parser import longest_numeric_run
from app.services.prompting import (
    DEFAULT_SYSTEM_TEXT,
    NO_PREAMBLE_DIRECTIVE,
    build_prompt,
    correction_prompt,
    default_template,
    load_template,
    parse_template_text,
    render_sequence,
)


class TestDefaultTemplate:
    """测试内置模板"""

    def test_system_primes_expert(self):
        template = default_template()
        assert "expert" in template.system_template
        assert "transportation sensor data" in template.system_template

    def test_slots_present(self):
        user = default_template().user_template
        for slot in ("{sensor}", "{mode}", "{alpha}", "{n_total}", "{sequence}"):
            assert slot in user

    def test_rendering_leaves_no_braces(self, compressed_factory):
        bundle = build_prompt(compressed_factory(range(30), 0.5), default_template())
        assert "{" not in bundle.user_text
        assert "{" not in bundle.system_text


class TestBuildPrompt:
    """测试提示渲染"""

    def test_taxi_barometer(self, compressed_factory):
        cs = compressed_factory(
            [1010 + (i % 7) for i in range(30)], 0.5,
            mode=TransportMode.TAXI, sensor=SensorKind.BAROMETER,
        )
        bundle = build_prompt(cs, default_template())
        assert "barometer" in bundle.user_text
        assert "taxi" in bundle.user_text
        assert "30" in bundle.user_text
        assert "[0.00, " in bundle.user_text
        assert NO_PREAMBLE_DIRECTIVE in bundle.user_text
        assert bundle.expected_length == 30

    def test_directive_verbatim(self):
        assert NO_PREAMBLE_DIRECTIVE == (
            "Do not say anything like 'the decompressed sequence is', just return the decompressed sequence."
        )

    def test_deterministic(self, compressed_factory):
        cs = compressed_factory(range(30), 0.7)
        assert build_prompt(cs, default_template()) == build_prompt(cs, default_template())

    def test_two_anchor_sequence(self, compressed_factory):
        cs = compressed_factory([0.0, 5.0, 10.0], 0.5)
        assert "[0.00, 1.00]" in build_prompt(cs, default_template()).user_text

    def test_embedded_sequence_reparses_exactly(self, compressed_factory):
        cs = compressed_factory([3.0 * i * i for i in range(30)], 0.7)
        bundle = build_prompt(cs, default_template())
        assert longest_numeric_run(bundle.user_text) == list(cs.values_scaled)

    def test_custom_template_gets_directive(self, compressed_factory):
        template = parse_template_text("{sensor} {mode} {alpha} {n_total} {sequence}")
        bundle = build_prompt(compressed_factory(range(10), 0.5), template)
        assert bundle.user_text.endswith(NO_PREAMBLE_DIRECTIVE)
        assert bundle.system_text == DEFAULT_SYSTEM_TEXT


class TestRenderSequence:
    """测试序列渲染"""

    def test_two_decimals(self):
        assert render_sequence([0.0, 0.25, 1.0]) == "[0.00, 0.25, 1.00]"


class TestTemplateLoading:
    """测试模板文件"""

    def test_split_on_separator(self, tmp_path):
        path = tmp_path / "prompt.txt"
        path.write_text(
            "You rebuild {sensor} data.\n---\nMode {mode}, alpha {alpha}, n {n_total}: {sequence} ({unit})\n",
            encoding="utf-8",
        )
        template = load_template(path)
        assert template.system_template == "You rebuild {sensor} data."
        assert template.user_template.startswith("Mode {mode}")

    def test_missing_sequence_slot(self, tmp_path):
        path = tmp_path / "prompt.txt"
        path.write_text("{sensor} {mode} {alpha} {n_total}", encoding="utf-8")
        with pytest.raises(TemplateSlotMissingException) as exc_info:
            load_template(path)
        assert exc_info.value.slot == "sequence"

    def test_unknown_slot(self):
        with pytest.raises(UnknownTemplateSlotException) as exc_info:
            parse_template_text("{sensor} {mode} {alpha} {n_total} {sequence} {weather}")
        assert exc_info.value.slot == "weather"

    def test_missing_file(self, tmp_path):
        with pytest.raises(StorageException):
            load_template(tmp_path / "nope.txt")


class TestCorrectionPrompt:
    """测试纠正提示"""

    def test_appends_sentence(self, compressed_factory):
        bundle = build_prompt(compressed_factory(range(30), 0.5), default_template())
        corrected = correction_prompt(bundle)
        assert corrected.user_text.startswith(bundle.user_text.rstrip())
        assert corrected.user_text.endswith("Return exactly 30 numbers, comma-separated, nothing else.")
        assert corrected.expected_length == 30
