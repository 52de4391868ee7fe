"""
命令行入口测试
"""
import json
from pathlib import Path

import pytest

from app.main import main
from app.utils.storage import read_segments, write_segment
from tests.conftest import make_segment


def _files(directory: Path) -> dict:
    return {p.name: p.read_bytes() for p in sorted(directory.iterdir())}


@pytest.fixture
def small_dataset(tmp_path) -> Path:
    """9 个片段（每种组合 1 个）"""
    out = tmp_path / "data"
    assert main(["generate", "--seed", "0", "--out", str(out), "--segments", "1"]) == 0
    return out


@pytest.fixture
def compressed_file(small_dataset, tmp_path) -> Path:
    out = tmp_path / "c.jsonl"
    assert main(["compress", "--in", str(small_dataset), "--alpha", "0.5", "--out", str(out)]) == 0
    return out


@pytest.fixture
def exhausting_config(tmp_path, script_file) -> Path:
    """每次调用都连接失败、且不重试的脚本mock配置"""
    script = script_file([{"error": "transport"}] * 20)
    path = tmp_path / "llm.env"
    path.write_text(
        "LLM_BACKEND=mock_scripted\n"
        f"LLM_MOCK_SCRIPT={script}\n"
        "LLM_MAX_RETRIES=0\n"
        "LLM_BACKOFF_BASE_S=0\n",
        encoding="utf-8",
    )
    return path


class TestGenerate:
    """测试 generate 子命令"""

    def test_default_dataset(self, tmp_path):
        out = tmp_path / "data"
        assert main(["generate", "--seed", "0", "--out", str(out)]) == 0
        assert len(list(out.glob("*.csv"))) == 270
        manifest = json.loads((out / "manifest.json").read_text(encoding="utf-8"))
        assert manifest["seed"] == 0
        assert manifest["n_segments"] == 270

    def test_reruns_are_byte_identical(self, tmp_path):
        for name in ("a", "b"):
            assert main(["generate", "--seed", "11", "--out", str(tmp_path / name), "--segments", "2"]) == 0
        assert _files(tmp_path / "a") == _files(tmp_path / "b")

    def test_missing_out(self):
        assert main(["generate", "--seed", "0"]) == 2

    def test_negative_seed(self, tmp_path):
        assert main(["generate", "--seed", "-1", "--out", str(tmp_path / "d")]) == 2


class TestCompress:
    """测试 compress 子命令"""

    def test_half(self, compressed_file):
        lines = compressed_file.read_text(encoding="utf-8").splitlines()
        assert len(lines) == 9
        assert all(len(json.loads(line)["values_scaled"]) == 15 for line in lines)
        stats = json.loads(compressed_file.with_suffix(".stats.json").read_text(encoding="utf-8"))
        assert stats["n_segments"] == 9
        assert stats["n_skipped"] == 0
        assert 0 < stats["char_ratio"] < 1

    def test_bad_alpha(self, small_dataset, tmp_path):
        assert main(["compress", "--in", str(small_dataset), "--alpha", "1.5", "--out", str(tmp_path / "c.jsonl")]) == 2

    def test_empty_directory(self, tmp_path):
        empty = tmp_path / "empty"
        empty.mkdir()
        assert main(["compress", "--in", str(empty), "--alpha", "0.5", "--out", str(tmp_path / "c.jsonl")]) == 2

    def test_missing_directory(self, tmp_path):
        assert main(["compress", "--in", str(tmp_path / "nope"), "--alpha", "0.5", "--out", str(tmp_path / "c.jsonl")]) == 3

    def test_invalid_segment_skipped(self, tmp_path):
        data = tmp_path / "data"
        data.mkdir()
        write_segment(make_segment(range(30), segment_id="good"), data)
        write_segment(make_segment([1.0], segment_id="short"), data)
        out = tmp_path / "c.jsonl"
        assert main(["compress", "--in", str(data), "--alpha", "0.5", "--out", str(out)]) == 4
        lines = out.read_text(encoding="utf-8").splitlines()
        assert [json.loads(line)["segment_id"] for line in lines] == ["good"]


class TestDecompress:
    """测试 decompress 子命令"""

    def test_linear(self, compressed_file, tmp_path):
        out = tmp_path / "restored"
        assert main(["decompress", "--in", str(compressed_file), "--backend", "linear", "--out", str(out)]) == 0
        segments = read_segments(out)
        assert len(segments) == 9
        assert all(s.n_total == 30 for s in segments)
        provenance = json.loads((out / "provenance.json").read_text(encoding="utf-8"))
        assert {p["backend"] for p in provenance} == {"linear"}

    def test_mock_llm_matches_linear(self, compressed_file, tmp_path):
        llm_out, linear_out = tmp_path / "llm", tmp_path / "linear"
        assert main([
            "decompress", "--in", str(compressed_file), "--backend", "llm",
            "--llm-backend", "mock_interpolating", "--out", str(llm_out),
        ]) == 0
        assert main(["decompress", "--in", str(compressed_file), "--backend", "linear", "--out", str(linear_out)]) == 0
        for name in (p.name for p in linear_out.glob("*.csv")):
            assert (llm_out / name).read_bytes() == (linear_out / name).read_bytes()
        provenance = json.loads((llm_out / "provenance.json").read_text(encoding="utf-8"))
        assert all(p["backend"] == "llm" and not p["fell_back"] for p in provenance)
        assert all(p["raw_reply"] for p in provenance)

    def test_unknown_backend(self, compressed_file, tmp_path):
        assert main(["decompress", "--in", str(compressed_file), "--backend", "cubic", "--out", str(tmp_path / "r")]) == 2

    def test_retries_exhausted(self, compressed_file, exhausting_config, tmp_path):
        out = tmp_path / "restored"
        code = main([
            "decompress", "--in", str(compressed_file), "--backend", "llm",
            "--llm-config", str(exhausting_config), "--out", str(out),
        ])
        assert code == 5
        provenance = json.loads((out / "provenance.json").read_text(encoding="utf-8"))
        assert len(provenance) == 9
        assert all(p["fell_back"] for p in provenance)

    @pytest.mark.parametrize("content", ["LLM_MAX_RETRIES=11\n", "LLM_TEMPERATURE=-1\n"])
    def test_invalid_llm_config(self, compressed_file, tmp_path, content):
        path = tmp_path / "llm.env"
        path.write_text(content, encoding="utf-8")
        code = main([
            "decompress", "--in", str(compressed_file), "--backend", "llm",
            "--llm-backend", "mock_interpolating", "--llm-config", str(path), "--out", str(tmp_path / "r"),
        ])
        assert code == 2
        assert not (tmp_path / "r").exists()

    def test_missing_llm_config(self, compressed_file, tmp_path):
        code = main([
            "decompress", "--in", str(compressed_file), "--backend", "llm",
            "--llm-backend", "mock_interpolating", "--llm-config", str(tmp_path / "typo.env"),
            "--out", str(tmp_path / "r"),
        ])
        assert code == 2
        assert not (tmp_path / "r").exists()

    def test_remote_without_key(self, compressed_file, tmp_path, monkeypatch):
        monkeypatch.delenv("LLM_API_KEY", raising=False)
        code = main([
            "decompress", "--in", str(compressed_file), "--backend", "llm",
            "--llm-backend", "remote", "--out", str(tmp_path / "r"),
        ])
        assert code == 2


class TestEvaluate:
    """测试 evaluate 子命令"""

    def test_report_header(self, small_dataset, tmp_path):
        report = tmp_path / "report.csv"
        assert main([
            "evaluate", "--data", str(small_dataset), "--alphas", "0.5,0.9",
            "--backends", "linear,spline", "--report", str(report),
        ]) == 0
        lines = report.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "mode,sensor,alpha,backend,mse,rmse,accuracy_pct,n_segments"
        assert len(lines) == 1 + 9 * 2 * 2

    def test_json_report(self, small_dataset, tmp_path):
        report = tmp_path / "report.json"
        assert main([
            "evaluate", "--data", str(small_dataset), "--alphas", "0.5",
            "--report", str(report), "--format", "json",
        ]) == 0
        assert len(json.loads(report.read_text(encoding="utf-8"))) == 9

    def test_bad_parallelism(self, small_dataset, tmp_path):
        assert main([
            "evaluate", "--data", str(small_dataset), "--report", str(tmp_path / "r.csv"), "--parallelism", "0",
        ]) == 2

    def test_bad_alphas(self, small_dataset, tmp_path):
        assert main(["evaluate", "--data", str(small_dataset), "--report", str(tmp_path / "r.csv"), "--alphas", "0,0.5"]) == 2

    def test_unknown_backend(self, small_dataset, tmp_path):
        assert main([
            "evaluate", "--data", str(small_dataset), "--report", str(tmp_path / "r.csv"), "--backends", "cubic",
        ]) == 2

    def test_parallelism_does_not_change_report(self, small_dataset, tmp_path):
        reports = []
        for parallelism in (1, 2, 8):
            report = tmp_path / f"report-{parallelism}.csv"
            assert main([
                "evaluate", "--data", str(small_dataset), "--alphas", "0.5,0.7",
                "--backends", "llm,linear", "--llm-backend", "mock_interpolating",
                "--parallelism", str(parallelism), "--report", str(report),
            ]) == 0
            reports.append(report.read_bytes())
        assert reports[0] == reports[1] == reports[2]

    def test_metrics_file(self, small_dataset, tmp_path):
        metrics = tmp_path / "metrics.prom"
        assert main([
            "evaluate", "--data", str(small_dataset), "--alphas", "0.5",
            "--backends", "llm", "--llm-backend", "mock_interpolating",
            "--report", str(tmp_path / "r.csv"), "--metrics-file", str(metrics),
        ]) == 0
        assert "llm_requests_total" in metrics.read_text(encoding="utf-8")
