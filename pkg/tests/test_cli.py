"""命令行入口测试

通过 main(argv) 调用，检查标准输出、输出文件和退出码。
"""

import csv
import io
import logging
import shutil
from collections.abc import Iterator, Sequence
from pathlib import Path

import pytest

from avctc.exceptions import ExitCode
from avctc.main import main
from avctc.services.hull import HULL_CSV_COLUMNS
from avctc.services.video_io import read_y4m_header, write_raw_video
from tests.conftest import ANCHOR_QUALITIES, ANCHOR_RATES, RA_QPS, make_frame

RD_HEADER = "sequence,config,resolution,qp,bitrate_kbps,metric,value\n"


@pytest.fixture(autouse=True)
def _restore_root_handlers() -> Iterator[None]:
    """main() 会给 root logger 装 stderr handler，测试结束后移除"""
    yield
    root = logging.getLogger()
    for handler in root.handlers[:]:
        if type(handler) is logging.StreamHandler:
            root.removeHandler(handler)


def _write_rd(path: Path, rates: Sequence[float], qualities: Sequence[float]) -> Path:
    rows = [
        f"Alpha,RA,,{qp},{rate:.6f},PSNR_Y,{quality}\n"
        for qp, rate, quality in zip(RA_QPS, rates, qualities, strict=True)
    ]
    path.write_text(RD_HEADER + "".join(rows), encoding="utf-8")
    return path


# ============================================================
# 1. bdrate
# ============================================================
class TestBdrateCommand:
    """avctc bdrate"""

    def test_csv_to_stdout(self, fixtures_dir: Path, capsys: pytest.CaptureFixture[str]) -> None:
        code = main(
            [
                "bdrate",
                "--anchor", str(fixtures_dir / "anchor_rd.csv"),
                "--test", str(fixtures_dir / "test_rd.csv"),
                "--metric", "PSNR_Y",
                "--format", "csv",
            ]
        )  # fmt: skip
        assert code == ExitCode.OK
        lines = capsys.readouterr().out.splitlines()
        assert lines == [
            "sequence,config,resolution,metric,full,low,mid,high",
            "Alpha,RA,,PSNR_Y,-0.100000,-0.100000,-0.100000,-0.100000",
            "Beta,RA,,PSNR_Y,-0.100000,-0.100000,-0.100000,-0.100000",
            "Delta,RA,,PSNR_Y,-0.120000,-0.304691,-0.120000,0.113750",
            "Gamma,RA,,PSNR_Y,-0.200000,0.012500,-0.200000,-0.367901",
        ]

    def test_markdown_to_file(self, fixtures_dir: Path, tmp_path: Path) -> None:
        output = tmp_path / "bd.md"
        code = main(
            [
                "bdrate",
                "--anchor", str(fixtures_dir / "anchor_rd.csv"),
                "--test", str(fixtures_dir / "test_rd.csv"),
                "--range", "full",
                "--output", str(output),
            ]
        )  # fmt: skip
        assert code == ExitCode.OK
        text = output.read_text(encoding="utf-8")
        assert text.startswith("| Sequence | Config | Metric | Full |\n")
        assert "| Alpha | RA | WEIGHTED | -10.00% |" in text

    def test_no_overlap_exit_code(self, tmp_path: Path) -> None:
        anchor = _write_rd(tmp_path / "a.csv", ANCHOR_RATES, ANCHOR_QUALITIES)
        test = _write_rd(tmp_path / "t.csv", ANCHOR_RATES, [q + 20.0 for q in ANCHOR_QUALITIES])
        code = main(["bdrate", "--anchor", str(anchor), "--test", str(test), "--range", "full"])
        assert code == ExitCode.OVERLAP

    def test_non_monotonic_exit_code(self, tmp_path: Path) -> None:
        # qp 160 的质量低于 qp 185
        qualities = (41.5, 40.2, 36.0, 36.7, 34.5, 32.0)
        anchor = _write_rd(tmp_path / "a.csv", ANCHOR_RATES, qualities)
        test = _write_rd(tmp_path / "t.csv", [r * 0.9 for r in ANCHOR_RATES], qualities)
        code = main(["bdrate", "--anchor", str(anchor), "--test", str(test)])
        assert code == ExitCode.EXCLUSION

    def test_missing_input(self, tmp_path: Path, fixtures_dir: Path) -> None:
        code = main(
            ["bdrate", "--anchor", str(tmp_path / "none.csv"), "--test", str(fixtures_dir / "test_rd.csv")]
        )
        assert code == ExitCode.PARSE

    def test_usage_errors(self, capsys: pytest.CaptureFixture[str]) -> None:
        assert main(["bdrate"]) == 2
        assert main(["bdrate", "--anchor", "a", "--test", "b", "--metric", "NOPE"]) == 2
        assert main([]) == 2
        capsys.readouterr()


# ============================================================
# 2. hull / report / progress
# ============================================================
class TestReportCommands:
    """avctc hull / report / progress"""

    def test_hull_bdrate(self, fixtures_dir: Path, tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
        hull_csv = tmp_path / "hull.csv"
        code = main(
            [
                "hull",
                "--anchor", str(fixtures_dir / "anchor_as.csv"),
                "--test", str(fixtures_dir / "test_as.csv"),
                "--hull-csv", str(hull_csv),
                "--format", "csv",
            ]
        )  # fmt: skip
        assert code == ExitCode.OK
        assert capsys.readouterr().out.splitlines() == [
            "sequence,config,resolution,metric,full",
            "Alpha,AS,,PSNR_YUV,-0.200000",
        ]
        rows = list(csv.reader(io.StringIO(hull_csv.read_text(encoding="utf-8"))))
        assert tuple(rows[0]) == HULL_CSV_COLUMNS
        assert ["Alpha", "PSNR_YUV", "1920x1080", "110", "6500.000000", "41.500000", "1"] in rows

    def test_hull_plot_data_only(self, fixtures_dir: Path, capsys: pytest.CaptureFixture[str]) -> None:
        assert main(["hull", "--anchor", str(fixtures_dir / "anchor_as.csv")]) == ExitCode.OK
        out = capsys.readouterr().out
        assert out.startswith(",".join(HULL_CSV_COLUMNS) + "\n")
        assert "Alpha,PSNR_YUV,960x540,235,250.000000,31.000000,1" in out

    def test_hull_without_as_curves(self, fixtures_dir: Path) -> None:
        code = main(["hull", "--anchor", str(fixtures_dir / "anchor_rd.csv")])
        assert code == ExitCode.PARSE

    def test_report_markdown(self, fixtures_dir: Path, capsys: pytest.CaptureFixture[str]) -> None:
        code = main(
            [
                "report",
                "--anchor", str(fixtures_dir / "anchor_rd.csv"),
                "--test", str(fixtures_dir / "test_rd.csv"),
                "--manifest", str(fixtures_dir / "manifest.toml"),
            ]
        )  # fmt: skip
        assert code == ExitCode.OK
        assert capsys.readouterr().out == (fixtures_dir / "report_ra.md").read_text(encoding="utf-8")

    def test_report_csv_file(self, fixtures_dir: Path, tmp_path: Path) -> None:
        output = tmp_path / "report.csv"
        code = main(
            [
                "report",
                "--anchor", str(fixtures_dir / "anchor_rd.csv"),
                "--test", str(fixtures_dir / "test_rd.csv"),
                "--manifest", str(fixtures_dir / "manifest.toml"),
                "--format", "csv",
                "--output", str(output),
            ]
        )  # fmt: skip
        assert code == ExitCode.OK
        assert output.read_bytes() == (fixtures_dir / "report_ra.csv").read_bytes()

    def test_progress(self, fixtures_dir: Path, capsys: pytest.CaptureFixture[str]) -> None:
        report = fixtures_dir / "report_ra.csv"
        code = main(["progress", "--entry", f"v1={report}", "--entry", f"v2={report}"])
        assert code == ExitCode.OK
        rows = list(csv.reader(io.StringIO(capsys.readouterr().out)))
        assert rows[0] == ["version", "config", "class", "metric", "bdrate"]
        assert len(rows) == 1 + 2 * 3 * 6
        assert rows[1] == ["v1", "RA", "Class A+B1", "PSNR_Y", "-15.00"]
        assert rows[-1][0] == "v2"

    def test_progress_errors(self, fixtures_dir: Path, tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
        report = fixtures_dir / "report_ra.csv"
        assert main(["progress", "--entry", f"v1={report}", "--entry", f"v1={report}"]) == ExitCode.PARSE
        assert main(["progress", "--entry", f"v1={tmp_path / 'none.csv'}"]) == ExitCode.PARSE
        assert main(["progress", "--entry", "v1"]) == 2
        capsys.readouterr()


# ============================================================
# 3. psnr / resample
# ============================================================
class TestVideoCommands:
    """avctc psnr / resample"""

    def test_psnr_identical(self, tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
        clip = tmp_path / "clip.y4m"
        write_raw_video(clip, [make_frame(16, 8, seed=s) for s in range(2)])
        assert main(["psnr", "--ref", str(clip), "--dist", str(clip)]) == ExitCode.OK
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "frame,psnr_y,psnr_u,psnr_v,psnr_yuv"
        assert len(lines) == 4
        assert lines[-1] == "mean,100.000000,100.000000,100.000000,100.000000"

    def test_psnr_raw_needs_geometry(self, tmp_path: Path) -> None:
        clip = tmp_path / "clip.yuv"
        write_raw_video(clip, [make_frame(16, 8)])
        assert main(["psnr", "--ref", str(clip), "--dist", str(clip)]) == ExitCode.PARSE
        code = main(["psnr", "--ref", str(clip), "--dist", str(clip), "--width", "16", "--height", "8"])
        assert code == ExitCode.OK

    def test_resample(self, tmp_path: Path) -> None:
        src = tmp_path / "src.y4m"
        dst = tmp_path / "dst.y4m"
        filters = tmp_path / "filters.csv"
        write_raw_video(src, [make_frame(32, 16, seed=s) for s in range(3)])
        code = main(
            ["resample", "--input", str(src), "--output", str(dst), "--to", "16x8", "--filter-csv", str(filters)]
        )
        assert code == ExitCode.OK
        header = read_y4m_header(dst)
        assert (header.width, header.height) == (16, 8)
        assert len(filters.read_text(encoding="utf-8").splitlines()) == 65

    def test_resample_bad_resolution(self, tmp_path: Path) -> None:
        code = main(["resample", "--input", "a.y4m", "--output", str(tmp_path / "b.y4m"), "--to", "0x8"])
        assert code == 2


# ============================================================
# 4. run
# ============================================================
class TestRunCommand:
    """avctc run"""

    def test_dry_run(self, fixtures_dir: Path, capsys: pytest.CaptureFixture[str]) -> None:
        code = main(["run", "--manifest", str(fixtures_dir / "manifest.toml"), "--dry-run"])
        assert code == ExitCode.OK
        out = capsys.readouterr().out
        assert out.startswith("# anchor/RA/Alpha/1920x1080/q110\nencode: aomenc --cq-level=110 ")
        assert out.count("# anchor/") == 24

    def test_invalid_parallelism(self, fixtures_dir: Path) -> None:
        code = main(["run", "--manifest", str(fixtures_dir / "manifest.toml"), "--parallelism", "0"])
        assert code == ExitCode.PARSE

    def test_missing_sequence_files(self, fixtures_dir: Path) -> None:
        assert main(["run", "--manifest", str(fixtures_dir / "manifest.toml")]) == ExitCode.PARSE

    @pytest.mark.skipif(shutil.which("sh") is None, reason="需要 POSIX sh")
    @pytest.mark.parametrize(
        ("encode", "expected"),
        [
            ("sh -c 'head -c {qp} /dev/zero > {output}' {input} {width} {height}", ExitCode.OK),
            ("sh -c 'test {qp} -ne 110 && head -c {qp} /dev/zero > {output}' {input} {width} {height}", ExitCode.FAILURE),
        ],
    )
    def test_run(self, tmp_path: Path, encode: str, expected: ExitCode) -> None:
        write_raw_video(tmp_path / "Alpha_16x8.yuv", [make_frame(16, 8)])
        manifest = tmp_path / "manifest.toml"
        manifest.write_text(
            "\n".join(
                [
                    'configs = ["LD"]',
                    "[codecs.anchor]",
                    f'encode = "{encode}"',
                    "[[sequences]]",
                    'name = "Alpha"',
                    'class_label = "A1"',
                    'path = "Alpha_16x8.yuv"',
                    "width = 16",
                    "height = 8",
                    "frame_count = 1",
                ]
            )
            + "\n",
            encoding="utf-8",
        )
        assert main(["run", "--manifest", str(manifest), "--parallelism", "2"]) == expected
        ledger = tmp_path / "out" / "jobs.ledger"
        assert len(ledger.read_text(encoding="utf-8").splitlines()) == 7
