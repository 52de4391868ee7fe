"""
LLM Sensor Codec - 命令行入口

子命令:
    generate    生成合成数据集
    compress    边缘侧压缩（跳跃采样 + 缩放 + 截断）
    decompress  云端重建（llm / linear / zoh / spline）
    evaluate    评估网格，输出 MSE / RMSE / 准确率报告

退出码: 0 成功, 2 参数或配置错误, 3 读写失败, 4 有片段被跳过, 5 LLM重试耗尽
"""
import argparse
import asyncio
import math
import sys
import uuid
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

from app.core.config import LlmConfig, settings
from app.core.config_validator import ConfigValidator
from app.core.exceptions import (
    AppException,
    BadAlphaException,
    NonPositiveRateException,
    RetriesExhaustedException,
    ValidationException,
)
from app.core.logging import clear_log_context, set_log_context, setup_logging
from app.core.prometheus import PrometheusMetrics
from app.models.prompt import PromptTemplate
from app.models.reconstruction import BACKEND_TAGS, ReconstructionResult
from app.models.sensor import CompressedSegment, CompressionParams, SensorSegment
from app.services.codec import compress, compression_stats
from app.services.datagen import generate_dataset
from app.services.evaluation_service import run_grid, write_report
from app.services.prompting import default_template, load_template
from app.services.reconstruction_service import fallback_result, reconstruct
from app.utils.llm_providers import SUPPORTED_BACKENDS, ChatBackend, make_backend
from app.utils.storage import read_compressed, read_segments, write_compressed, write_json, write_segments

EXIT_OK = 0
EXIT_SKIPPED = 4
EXIT_RETRIES_EXHAUSTED = 5

logger = setup_logging()


# ==================== 参数解析 ====================

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--log-level", default=None, help="覆盖 LOG_LEVEL (DEBUG/INFO/WARNING/ERROR)")
    common.add_argument("--metrics-file", default=None, help="退出时写入 Prometheus 文本格式指标")

    llm_opts = argparse.ArgumentParser(add_help=False)
    llm_opts.add_argument("--llm-config", default=None, help="key=value 格式的LLM配置文件")
    llm_opts.add_argument("--template", default=None, help="提示模板文件")
    llm_opts.add_argument("--llm-backend", default=None, choices=SUPPORTED_BACKENDS, help="覆盖 LLM_BACKEND")

    parser = argparse.ArgumentParser(prog="python -m app", description=settings.PROJECT_NAME)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", parents=[common], help="生成合成数据集")
    gen.add_argument("--seed", type=int, required=True)
    gen.add_argument("--out", required=True)
    gen.add_argument("--segments", type=int, default=settings.DATAGEN_SEGMENTS_PER_MODE,
                     help="每种交通方式、每种传感器的片段数")
    gen.add_argument("--duration-s", type=int, default=settings.DATAGEN_DURATION_S)
    gen.add_argument("--rate-hz", type=float, default=settings.DATAGEN_RATE_HZ)

    comp = sub.add_parser("compress", parents=[common], help="压缩片段目录")
    comp.add_argument("--in", dest="in_path", required=True)
    comp.add_argument("--alpha", type=float, required=True)
    comp.add_argument("--out", required=True)

    dec = sub.add_parser("decompress", parents=[common, llm_opts], help="重建压缩片段")
    dec.add_argument("--in", dest="in_path", required=True)
    dec.add_argument("--backend", required=True, choices=list(BACKEND_TAGS))
    dec.add_argument("--out", required=True)
    dec.add_argument("--rate-hz", type=float, default=1.0)

    ev = sub.add_parser("evaluate", parents=[common, llm_opts], help="运行评估网格")
    ev.add_argument("--data", required=True)
    ev.add_argument("--alphas", default=settings.EVAL_DEFAULT_ALPHAS)
    ev.add_argument("--backends", default="linear")
    ev.add_argument("--report", required=True)
    ev.add_argument("--format", default="csv", choices=["csv", "json"])
    ev.add_argument("--parallelism", type=int, default=settings.EVAL_PARALLELISM)

    return parser


def _parse_alphas(text: str) -> List[float]:
    try:
        alphas = [float(a) for a in text.split(",") if a.strip()]
    except ValueError as e:
        raise ValidationException(f"Invalid --alphas value: {text}", code="bad_alpha") from e
    for alpha in alphas:
        if not (math.isfinite(alpha) and 0 < alpha <= 1):
            raise BadAlphaException(alpha)
    return alphas


def _parse_backends(text: str) -> List[str]:
    return [b.strip() for b in text.split(",") if b.strip()]


def _llm_setup(args: argparse.Namespace) -> Tuple[LlmConfig, ChatBackend, PromptTemplate]:
    """加载并验证LLM配置，创建后端和模板"""
    cfg = LlmConfig.load(args.llm_config, backend=args.llm_backend)
    ConfigValidator.validate_and_raise(cfg, args.llm_config)
    logger.info("LLM configuration loaded", extra={"llm_config": ConfigValidator.get_config_summary(cfg)})
    template = load_template(args.template) if args.template else default_template()
    backend = make_backend(cfg.backend, cfg)
    return cfg, backend, template


# ==================== 子命令 ====================

def cmd_generate(args: argparse.Namespace) -> int:
    if args.seed < 0:
        raise ValidationException(f"--seed must be >= 0, got {args.seed}", code="bad_seed")
    if args.rate_hz <= 0:
        raise NonPositiveRateException(args.rate_hz)
    segments = generate_dataset(args.seed, args.segments, duration_s=args.duration_s, rate_hz=args.rate_hz)
    write_segments(segments, args.out, extra={"seed": args.seed})
    return EXIT_OK


def cmd_compress(args: argparse.Namespace) -> int:
    if not (math.isfinite(args.alpha) and 0 < args.alpha <= 1):
        raise BadAlphaException(args.alpha)
    params = CompressionParams(alpha=args.alpha)
    segments = read_segments(args.in_path)

    compressed: List[CompressedSegment] = []
    stats = []
    skipped = 0
    for seg in segments:
        try:
            cs = compress(seg, params)
        except ValidationException as e:
            skipped += 1
            logger.warning(f"Skipping segment {seg.segment_id}: {e.message}", extra={"error": e.to_dict()})
            continue
        compressed.append(cs)
        stats.append({"segment_id": cs.segment_id, **compression_stats(seg, cs).model_dump()})

    out = Path(args.out)
    write_compressed(compressed, out)

    original_chars = sum(s["original_chars"] for s in stats)
    compressed_chars = sum(s["compressed_chars"] for s in stats)
    summary = {
        "alpha": args.alpha,
        "n_segments": len(compressed),
        "n_skipped": skipped,
        "original_chars": original_chars,
        "compressed_chars": compressed_chars,
        "char_ratio": compressed_chars / original_chars if original_chars else 0.0,
        "segments": stats,
    }
    write_json(out.with_suffix(".stats.json"), summary)
    logger.info(
        f"Compressed {len(compressed)} segments (skipped {skipped}), "
        f"characters {original_chars} -> {compressed_chars}"
    )
    return EXIT_SKIPPED if skipped else EXIT_OK


async def _decompress_all(
    segments: Sequence[CompressedSegment],
    backend_tag: str,
    llm: Optional[Tuple[LlmConfig, ChatBackend, PromptTemplate]],
) -> Tuple[List[ReconstructionResult], int]:
    results = []
    exhausted = 0
    try:
        for cs in segments:
            set_log_context(segment_id=cs.segment_id)
            try:
                if llm is None:
                    result = await reconstruct(cs, backend_tag)
                else:
                    cfg, backend, template = llm
                    result = await reconstruct(cs, backend_tag, backend, template, cfg)
            except RetriesExhaustedException as e:
                exhausted += 1
                logger.error(f"LLM retries exhausted for {cs.segment_id}: {e.message}")
                result = fallback_result(cs, "retries_exhausted")
            results.append(result)
    finally:
        if llm is not None:
            await llm[1].aclose()
    return results, exhausted


def cmd_decompress(args: argparse.Namespace) -> int:
    if args.rate_hz <= 0:
        raise NonPositiveRateException(args.rate_hz)
    segments = read_compressed(args.in_path)
    llm = _llm_setup(args) if args.backend == "llm" else None

    results, exhausted = asyncio.run(_decompress_all(segments, args.backend, llm))

    restored = [
        SensorSegment(
            segment_id=cs.segment_id,
            mode=cs.mode,
            sensor=cs.sensor,
            sample_rate_hz=args.rate_hz,
            values=result.values,
        )
        for cs, result in zip(segments, results)
    ]
    write_segments(restored, args.out, extra={"backend": args.backend})
    provenance = [
        {
            "segment_id": r.segment_id,
            "backend": r.backend,
            "retries_used": r.retries_used,
            "fell_back": r.fell_back,
            "raw_reply": r.raw_reply,
        }
        for r in results
    ]
    write_json(Path(args.out) / "provenance.json", provenance)

    n_fell_back = sum(r.fell_back for r in results)
    logger.info(f"Reconstructed {len(results)} segments with {args.backend} ({n_fell_back} fell back)")
    return EXIT_RETRIES_EXHAUSTED if exhausted else EXIT_OK


async def _evaluate(args: argparse.Namespace, segments, alphas, backends):
    if "llm" not in backends:
        return await run_grid(segments, alphas, backends, args.parallelism)
    cfg, backend, template = _llm_setup(args)
    try:
        return await run_grid(
            segments, alphas, backends, args.parallelism,
            llm_backend=backend, template=template, cfg=cfg,
        )
    finally:
        await backend.aclose()


def cmd_evaluate(args: argparse.Namespace) -> int:
    alphas = _parse_alphas(args.alphas)
    backends = _parse_backends(args.backends)
    if args.parallelism < 1:
        raise ValidationException(
            f"--parallelism must be >= 1, got {args.parallelism}",
            code="bad_parallelism",
        )
    segments = read_segments(args.data)
    records = asyncio.run(_evaluate(args, segments, alphas, backends))
    write_report(records, args.report, args.format)
    return EXIT_OK


COMMANDS = {
    "generate": cmd_generate,
    "compress": cmd_compress,
    "decompress": cmd_decompress,
    "evaluate": cmd_evaluate,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    CLI入口

    Args:
        argv: 参数列表（默认 sys.argv[1:]）

    Returns:
        进程退出码
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse 在参数错误时以 2 退出
        return int(e.code) if isinstance(e.code, int) else 2

    setup_logging(args.log_level)
    set_log_context(run_id=uuid.uuid4().hex[:8])

    try:
        return COMMANDS[args.command](args)
    except AppException as e:
        logger.error(f"{args.command} failed: {e.message}", extra={"error": e.to_dict()})
        return e.exit_code
    except Exception as e:
        logger.error(f"Unexpected error in {args.command}: {e}", exc_info=True)
        return 1
    finally:
        if args.metrics_file:
            PrometheusMetrics.write_textfile(args.metrics_file)
        clear_log_context()


if __name__ == "__main__":
    sys.exit(main())
