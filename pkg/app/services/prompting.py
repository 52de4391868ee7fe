"""
提示构建

把压缩片段渲染成发送给LLM的 system + user 消息。
模板使用 str.format 占位符，可以通过文件覆盖默认模板。
"""
from pathlib import Path
from string import Formatter
from typing import Dict, Sequence, Set, Union

from app.core.exceptions import StorageException, TemplateSlotMissingException, UnknownTemplateSlotException
from app.core.logging import get_logger
from app.models.prompt import PromptBundle, PromptTemplate
from app.models.sensor import CompressedSegment

logger = get_logger(__name__)

REQUIRED_SLOTS: Set[str] = {"sensor", "mode", "alpha", "n_total", "sequence"}
OPTIONAL_SLOTS: Set[str] = {"unit", "n_kept", "keep_percent"}

NO_PREAMBLE_DIRECTIVE = (
    "Do not say anything like 'the decompressed sequence is', "
    "just return the decompressed sequence."
)

TEMPLATE_SEPARATOR = "---"

DEFAULT_SYSTEM_TEXT = (
    "You are an expert in transportation sensor data. You know how buses, taxis and "
    "mass transit railway trains move, and how their barometer, speed and altitude "
    "readings evolve over time. You restore compressed sensor sequences to their "
    "original resolution."
)

DEFAULT_USER_TEMPLATE = (
    "A smartphone mounted in a {mode} recorded {sensor} readings ({unit}) once per time step.\n"
    "Before transmission the sequence was compressed: only {n_kept} evenly spaced points "
    "(about {keep_percent}% of the data, compression ratio {alpha}) were kept, including "
    "the first and the last point, and every value was min-max rescaled to the range 0 to 1 "
    "and truncated to two decimal places.\n"
    "Compressed {sensor} sequence from the {mode}:\n"
    "{sequence}\n"
    "Using what you know about how a {mode} moves and how its {sensor} data behaves, "
    "fill in the missing points and return the decompressed sequence of exactly {n_total} "
    "values in the same 0 to 1 scale with two decimal places, comma-separated in square brackets.\n"
)


def default_template() -> PromptTemplate:
    """内置模板"""
    return PromptTemplate(
        system_template=DEFAULT_SYSTEM_TEXT,
        user_template=DEFAULT_USER_TEMPLATE + NO_PREAMBLE_DIRECTIVE,
    )


def _template_slots(text: str) -> Set[str]:
    return {field for _, field, _, _ in Formatter().parse(text) if field is not None}


def validate_template(template: PromptTemplate) -> PromptTemplate:
    """
    检查模板占位符

    Raises:
        TemplateSlotMissingException: user 模板缺少必需占位符
        UnknownTemplateSlotException: 使用了未知占位符
    """
    allowed = REQUIRED_SLOTS | OPTIONAL_SLOTS
    user_slots = _template_slots(template.user_template)
    for slot in sorted(REQUIRED_SLOTS):
        if slot not in user_slots:
            raise TemplateSlotMissingException(slot)
    for slot in sorted(user_slots | _template_slots(template.system_template)):
        if slot not in allowed:
            raise UnknownTemplateSlotException(slot)
    return template


def parse_template_text(text: str) -> PromptTemplate:
    """
    解析模板文本

    单独一行 `---` 之前为 system 模板，之后为 user 模板；
    没有分隔行时整段为 user 模板，system 使用默认文本
    """
    lines = text.splitlines()
    for i, line in enumerate(lines):
        if line.strip() == TEMPLATE_SEPARATOR:
            system = "\n".join(lines[:i]).strip()
            user = "\n".join(lines[i + 1:]).strip()
            template = PromptTemplate(system_template=system, user_template=user)
            break
    else:
        template = PromptTemplate(system_template=DEFAULT_SYSTEM_TEXT, user_template=text.strip())
    return validate_template(template)


def load_template(path: Union[str, Path]) -> PromptTemplate:
    """从文件加载模板"""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise StorageException(f"Cannot read prompt template: {e}", path=str(path)) from e
    template = parse_template_text(text)
    logger.info(f"Loaded prompt template from {path}")
    return template


def render_sequence(values: Sequence[float]) -> str:
    """[0.00, 0.25, ...]"""
    return "[" + ", ".join(f"{v:.2f}" for v in values) + "]"


def _slot_values(cs: CompressedSegment) -> Dict[str, object]:
    return {
        "sensor": cs.sensor.value,
        "mode": cs.mode.value,
        "alpha": f"{cs.alpha:g}",
        "n_total": cs.n_total,
        "sequence": render_sequence(cs.values_scaled),
        "unit": cs.sensor.unit,
        "n_kept": cs.n_kept,
        "keep_percent": f"{cs.alpha * 100:g}",
    }


def build_prompt(cs: CompressedSegment, template: PromptTemplate) -> PromptBundle:
    """
    渲染提示

    Args:
        cs: 压缩片段
        template: 提示模板（已验证）

    Returns:
        PromptBundle，expected_length = n_total
    """
    slots = _slot_values(cs)
    system_text = template.system_template.format(**slots)
    user_text = template.user_template.format(**slots)
    if NO_PREAMBLE_DIRECTIVE not in user_text:
        user_text = user_text.rstrip() + "\n" + NO_PREAMBLE_DIRECTIVE
    return PromptBundle(system_text=system_text, user_text=user_text, expected_length=cs.n_total)


def correction_prompt(bundle: PromptBundle) -> PromptBundle:
    """解析失败后的纠正提示"""
    sentence = f"Return exactly {bundle.expected_length} numbers, comma-separated, nothing else."
    return PromptBundle(
        system_text=bundle.system_text,
        user_text=bundle.user_text.rstrip() + "\n" + sentence,
        expected_length=bundle.expected_length,
    )