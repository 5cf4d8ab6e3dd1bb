import json
import random

import pytest

from swisscheese import cli
from swisscheese.geometry import (
    FULL, HALF, LittleDiscs, config_from_json, config_to_json, dumps, identity_config,
    is_valid, random_config,
)
from swisscheese.trees import single_vertex, tree_to_dict


def _write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def _run(capsys, *argv):
    code = cli.main(list(argv))
    return code, capsys.readouterr().out


@pytest.fixture
def files(tmp_path):
    rng = random.Random(4)
    x = random_config(rng, 2, HALF, 1, 1)
    return {
        "id": _write(tmp_path, "id.json", config_to_json(identity_config(2, HALF))),
        "x": _write(tmp_path, "x.json", config_to_json(x)),
        "f": _write(tmp_path, "f.json", config_to_json(random_config(rng, 2, FULL, 0))),
        "h": _write(tmp_path, "h.json", config_to_json(random_config(rng, 2, HALF, 1, 0))),
        "bad": _write(tmp_path, "bad.json", json.dumps(
            {"d": 2, "target": "half", "discs": [{"color": "full", "r": "1/0", "c": ["0", "1/2"]}]})),
        "d3": _write(tmp_path, "d3.json", config_to_json(identity_config(3, FULL))),
        "tree": _write(tmp_path, "t.json", dumps(tree_to_dict(
            single_vertex(LittleDiscs(2), random_config(rng, 2, FULL, 2))))),
    }


def test_identity_compose_is_byte_identical(files, capsys):
    code, out = _run(capsys, "compose", "--mode", "mixed", files["id"], files["x"])
    assert code == 0
    assert out == open(files["x"]).read()


def test_compose_result_is_valid_and_stable(files, capsys):
    args = ("compose", "--mode", "mixed", files["x"], files["f"], files["h"])
    code, first = _run(capsys, *args)
    assert code == 0
    _, second = _run(capsys, *args)
    assert first == second
    out = config_from_json(first)
    # the half input contributes its one full slot
    assert (out.n, out.m) == (1, 0) and is_valid(out)


def test_invalid_scalar_exit_code(files, capsys):
    code, out = _run(capsys, "compose", "--mode", "mixed", files["bad"], files["f"])
    assert code == 2 and json.loads(out)["error"] == "invalid input"


def test_arity_mismatch_exit_code(files, capsys):
    code, out = _run(capsys, "compose", "--mode", "mixed", files["x"], files["f"])
    assert code == 3 and json.loads(out)["error"] == "mismatch"


def test_color_mismatch_exit_code(files, capsys):
    code, _ = _run(capsys, "compose", "--mode", "mixed", files["x"], files["h"], files["f"])
    assert code == 3


def test_render(files, capsys, tmp_path):
    code, svg = _run(capsys, "render", files["x"])
    assert code == 0 and svg.startswith("<svg") and 'class="half"' in svg
    _, again = _run(capsys, "render", files["x"])
    assert svg == again
    code, svg = _run(capsys, "render", files["tree"])
    assert code == 0 and "<svg" in svg
    assert _run(capsys, "render", files["d3"])[0] == 2


def test_normalize_w(files, capsys):
    code, out = _run(capsys, "normalize", "--kind", "w", files["tree"])
    assert code == 0 and json.loads(out) == json.loads(open(files["tree"]).read())


def test_count_commands(capsys):
    code, out = _run(capsys, "count", "algebras", "--dim", "2", "--prime", "2")
    assert code == 0 and json.loads(out)["count"] == 12
    code, out = _run(capsys, "count", "hochschild", "--dim", "2", "--prime", "3")
    res = json.loads(out)
    assert res["dim"] == res["hom_dim"] == 4 and res["identity_preserved"]
    code, out = _run(capsys, "count", "modules", "--dim", "1")
    assert json.loads(out)["bijection"]


def test_invalid_common_flags(capsys):
    assert _run(capsys, "count", "algebras", "--prime", "4")[0] == 2
    assert _run(capsys, "verify", "--cases", "-1")[0] == 2


@pytest.mark.parametrize("suite", sorted(cli.SUITES))
def test_verify_suites(suite, capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("OPERAD_FORGE_THREADS", "2")
    out = tmp_path / f"{suite}.json"
    code, _ = _run(capsys, "verify", "--suite", suite, "--cases", "20", "--out", str(out))
    assert code == 0
    report = json.loads(out.read_text())
    assert report["ok"] and report["checks"]
    assert out.with_suffix(".png").read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_verify_report_independent_of_threads(capsys, monkeypatch):
    outs = []
    for n in ("1", "3"):
        monkeypatch.setenv("OPERAD_FORGE_THREADS", n)
        code, out = _run(capsys, "verify", "--suite", "confluence", "--cases", "15", "--seed", "7")
        assert code == 0
        outs.append(out)
    assert outs[0] == outs[1]
