import json
import pathlib

import pytest

import chainrec

ROOT = pathlib.Path(__file__).resolve().parents[2]


def tiny():
    return json.loads((ROOT / "scenarios" / "tiny.json").read_text())


def test_map_parsing_and_eval():
    assert chainrec.normalize_map("z^2") == chainrec.normalize_map("z ^ 2")
    assert chainrec.eval_point("z^2 + 1", 2j) == pytest.approx(-3 + 0j)
    lo_re, hi_re, lo_im, hi_im = chainrec.eval_box("z^2", (-0.5, 0.5, -0.5, 0.5))
    assert lo_re <= -0.25 and hi_re >= 0.25 and lo_im <= -0.5 and hi_im >= 0.5


def test_errors_map_to_python_exceptions():
    with pytest.raises(chainrec.ParseError):
        chainrec.normalize_map("z + w")
    assert issubclass(chainrec.ParseError, ValueError)
    doc = tiny()
    doc["generators"] = []
    with pytest.raises(chainrec.ConfigError, match="generators"):
        chainrec.run("cr", doc, "unused")
    doc = tiny()
    doc.update(depth=11, membership="rect", L=5)
    with pytest.raises(chainrec.BudgetError):
        chainrec.run("cr", doc, "unused")


def test_config_hash_ignores_key_order():
    assert chainrec.config_hash('{"a": 1, "b": 2}') == chainrec.config_hash('{"b": 2, "a": 1}')


def test_cr_and_duality_on_tiny(tmp_path):
    cr = chainrec.run("cr", ROOT / "scenarios" / "tiny.json", tmp_path / "cr")
    assert cr["stage"] == "cr"
    assert cr["cr"]["cr_cells"] > 0
    assert (tmp_path / "cr" / "cr.csv").exists()
    dual = chainrec.run("duality", tiny(), tmp_path / "dual")
    assert dual["duality"]["verdict"] in ("PASS", "FAIL")
    again = chainrec.run("duality", tiny(), tmp_path / "dual2")
    assert (tmp_path / "dual" / "duality.csv").read_bytes() == (tmp_path / "dual2" / "duality.csv").read_bytes()
    assert again["config_hash"] == dual["config_hash"]


def test_oracle(tmp_path):
    summary = chainrec.oracle_sweep(10, n_max=5, out_dir=tmp_path)
    assert summary["failed"] == 0 and summary["skipped"] == 0
    assert (tmp_path / "oracle.jsonl").exists()
    report = chainrec.oracle_seed_report(3)
    assert report == chainrec.oracle_seed_report(3)


def test_exact_components_swap():
    dist = [[0, 1], [1, 0]]
    assert chainrec.exact_chain_components(2, dist, [[1, 0]]) == [[0, 1]]
