import json

import numpy as np
import pytest

from ecn_rerank import errors, fileio
from ecn_rerank.cli import main


def run(argv):
    return main([str(a) for a in argv])


@pytest.fixture()
def synth_files(tmp_path):
    prefix = tmp_path / "toy"
    code = run(
        ["synth", "--seed", 4, "--ids", 12, "--imgs", 4, "--dim", 8,
         "--intra", 1.0, "--inter", 1.0, "--cams", 3, "--out-prefix", prefix]
    )
    assert code == 0
    feat_path, meta_path = fileio.default_paths(prefix)
    assert feat_path.exists() and meta_path.exists()
    return feat_path, meta_path


def test_full_pipeline(synth_files, tmp_path, capsys):
    feat_path, meta_path = synth_files
    out_dist = tmp_path / "union.ecnd"
    assert run(["distance", "--features", feat_path, "--out", out_dist]) == 0

    out_rerank = tmp_path / "reranked.ecnd"
    assert run(
        ["rerank", "--distances", out_dist, "--meta", meta_path,
         "--method", "ecn-rank", "--t", 3, "--q", 3, "--k", 10, "--out", out_rerank]
    ) == 0

    report_path = tmp_path / "report.json"
    assert run(
        ["eval", "--distances", out_rerank, "--meta", meta_path,
         "--ranks", "1,5,10", "--out", report_path]
    ) == 0
    report = json.loads(report_path.read_text())
    assert set(report["cmc"]) == {"1", "5", "10"}
    assert 0.0 <= report["map"] <= 1.0
    assert report["num_queries"] + report["skipped_queries"] == 12
    assert "mAP" in capsys.readouterr().out


def test_rerank_none_is_passthrough(synth_files, tmp_path):
    feat_path, meta_path = synth_files
    out_dist = tmp_path / "union.ecnd"
    run(["distance", "--features", feat_path, "--out", out_dist])
    out_none = tmp_path / "none.ecnd"
    run(["rerank", "--distances", out_dist, "--meta", meta_path,
         "--method", "none", "--out", out_none])
    full = fileio.read_distance(out_dist)
    records = fileio.read_metadata(meta_path)
    sliced = fileio.read_distance(out_none)
    expected = full[np.ix_(records.query_indices, records.gallery_indices)]
    assert np.array_equal(sliced, expected.astype(np.float32))


def test_rerank_from_features_directly(synth_files, tmp_path):
    feat_path, meta_path = synth_files
    out = tmp_path / "reranked.ecnd"
    assert run(
        ["rerank", "--features", feat_path, "--meta", meta_path, "--out", out]
    ) == 0
    assert fileio.read_distance(out).shape == (12, 36)


def test_cli_runs_are_reproducible(synth_files, tmp_path):
    feat_path, meta_path = synth_files
    outs = []
    for name in ("a.ecnd", "b.ecnd"):
        out = tmp_path / name
        run(["rerank", "--features", feat_path, "--meta", meta_path,
             "--t", 2, "--q", 4, "--out", out])
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_exit_code_bad_magic(tmp_path, capsys):
    bad = tmp_path / "bad.ecnf"
    bad.write_bytes(b"XXXX" + b"\x00" * 40)
    code = run(["distance", "--features", bad, "--out", tmp_path / "d.ecnd"])
    assert code == errors.BadMagicError.exit_code
    assert "error:" in capsys.readouterr().err


def test_exit_code_unknown_role(tmp_path, capsys):
    meta = tmp_path / "meta.csv"
    meta.write_text("index,person_id,camera_id,role\n0,1,0,probe\n")
    dist = tmp_path / "d.ecnd"
    fileio.write_distance(np.ones((1, 1), dtype=np.float32), dist)
    code = run(["eval", "--distances", dist, "--meta", meta, "--out", tmp_path / "r.json"])
    assert code == errors.UnknownRoleError.exit_code
    capsys.readouterr()


def test_exit_code_nonsquare_rerank_input(synth_files, tmp_path, capsys):
    _, meta_path = synth_files
    dist = tmp_path / "rect.ecnd"
    fileio.write_distance(np.ones((3, 5), dtype=np.float32), dist)
    code = run(["rerank", "--distances", dist, "--meta", meta_path,
                "--out", tmp_path / "o.ecnd"])
    assert code == errors.ShapeMismatchError.exit_code
    capsys.readouterr()


def test_exit_code_params_too_large(synth_files, tmp_path, capsys):
    feat_path, meta_path = synth_files
    code = run(["rerank", "--features", feat_path, "--meta", meta_path,
                "--t", 40, "--q", 8, "--out", tmp_path / "o.ecnd"])
    assert code == errors.ParamsTooLargeError.exit_code
    capsys.readouterr()


def test_help_documents_exit_codes(capsys):
    with pytest.raises(SystemExit) as exit_info:
        main(["--help"])
    assert exit_info.value.code == 0
    text = capsys.readouterr().out
    assert "exit codes:" in text
    for cls in (errors.BadMagicError, errors.NoValidQueriesError, errors.ParamsTooLargeError):
        assert cls.__name__ in text


def test_bench_smoke(tmp_path, capsys):
    out = tmp_path / "bench.json"
    code = run(["bench", "--sizes", "120,240", "--method", "ecn-rank",
                "--k", 10, "--out", out])
    assert code == 0
    data = json.loads(out.read_text())
    assert data["sizes"] == [120, 240]
    assert len(data["seconds"]) == 2
    assert "ratio" in capsys.readouterr().out


def test_threads_flag_does_not_change_output(synth_files, tmp_path):
    feat_path, meta_path = synth_files
    payloads = []
    for threads in (1, 2, 8):
        out = tmp_path / f"t{threads}.ecnd"
        run(["rerank", "--features", feat_path, "--meta", meta_path,
             "--threads", threads, "--out", out])
        payloads.append(out.read_bytes())
    assert payloads[0] == payloads[1] == payloads[2]
