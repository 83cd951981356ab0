import json

import numpy as np
import pytest

from ttnsbounds import report
from ttnsbounds.cli import main
from ttnsbounds.dense import load_state
from ttnsbounds.entropy import EdgeDistribution, error_lower_bound, error_upper_bound, renyi_entropy
from ttnsbounds.targets import make_named
from ttnsbounds.truncation import TruncationPlan

from helpers import FIG1_EDGES


@pytest.fixture
def fig1_file(tmp_path):
    path = tmp_path / "fig1.json"
    path.write_text(json.dumps({"dims": [2] * 7, "edges": FIG1_EDGES, "root": 7}))
    return path


def _gen(tmp_path, kind, *extra):
    out = tmp_path / f"{kind}.bin"
    assert main(["gen", kind, "--dims", ",".join(["2"] * 7), "--out", str(out), *extra]) == 0
    return out


def test_dumps_is_canonical():
    assert report.dumps({"b": 0.1, "a": [1, True, None]}) == '{"a":[1,true,null],"b":0.10000000000000001}'
    assert report.dumps(float("inf")) == '"Infinity"'
    assert json.loads(report.dumps({"x": np.float64(1 / 3)}))["x"] == 1 / 3


def test_spectrum_elision():
    coeffs = np.linspace(1, 0, 100)
    entry = report.spectrum_entry(coeffs, full=False)
    assert entry["elided"] and entry["length"] == 100 and len(entry["head"]) == 8
    assert report.spectrum_entry(coeffs, full=True) == [float(x) for x in coeffs]
    assert report.spectrum_entry(coeffs[:64], full=False) == [float(x) for x in coeffs[:64]]


def test_gen_ghz_and_random(tmp_path):
    g = load_state(_gen(tmp_path, "ghz"))
    assert g.amplitudes.size == 128 and np.count_nonzero(g.amplitudes) == 2
    a = tmp_path / "a.bin"
    b = tmp_path / "b.bin"
    for path in (a, b):
        main(["gen", "random", "--dims", "2,3,2", "--seed", "1", "--out", str(path)])
    assert a.read_bytes() == b.read_bytes()


def test_gen_ground(tmp_path, fig1_file):
    spec = tmp_path / "ising.json"
    spec.write_text(json.dumps({"model": "ising", "tree": fig1_file.name, "J": 1.0, "h": 3.0}))
    out = tmp_path / "gs.bin"
    assert main(["gen", "ground", "--spec", str(spec), "--out", str(out)]) == 0
    side = json.loads((tmp_path / "gs.bin.json").read_text())
    assert side["energy"] < 0 and side["gap"] > 0 and not side["degenerate"]
    assert load_state(out).is_normalized()


def test_decompose_prints_bond_dims(tmp_path, fig1_file, capsys):
    ghz = _gen(tmp_path, "ghz")
    assert main(["decompose", "--state", str(ghz), "--tree", str(fig1_file),
                 "--out", str(tmp_path / "net.json")]) == 0
    rows = capsys.readouterr().out.strip().splitlines()[1:]
    assert [int(r.split()[2]) for r in rows] == [2] * 6
    prod = _gen(tmp_path, "product")
    main(["decompose", "--state", str(prod), "--tree", str(fig1_file)])
    rows = capsys.readouterr().out.strip().splitlines()[1:]
    assert [int(r.split()[2]) for r in rows] == [1] * 6


def test_corrupt_state_exit_code(tmp_path, fig1_file, capsys):
    bad = tmp_path / "bad.bin"
    data = bytearray(_gen(tmp_path, "ghz").read_bytes())
    data[:4] = b"JUNK"
    bad.write_bytes(bytes(data))
    assert main(["decompose", "--state", str(bad), "--tree", str(fig1_file)]) == 2
    assert "offset 0" in capsys.readouterr().err


def test_certify_ghz(tmp_path, fig1_file):
    ghz = _gen(tmp_path, "ghz")
    out = tmp_path / "rep.json"
    code = main(["certify", "--state", str(ghz), "--tree", str(fig1_file), "--caps", "1",
                 "--alphas", "0.5,2", "--out", str(out)])
    rep = json.loads(out.read_text())
    assert code == 0 and rep["verdict"] is True
    assert rep["global"]["delta_projector"] == pytest.approx(0.5, abs=1e-14)
    lows = [b for b in rep["bounds"] if b["name"] == "entropy_error_lower_max"]
    assert lows[0]["value"] == pytest.approx(0.2928932188134524, abs=1e-15)


def test_certify_noop_plan(tmp_path, fig1_file):
    state = tmp_path / "r.bin"
    main(["gen", "random", "--dims", "2,2,2,2,2,2,2", "--seed", "5", "--out", str(state)])
    out = tmp_path / "rep.json"
    assert main(["certify", "--state", str(state), "--tree", str(fig1_file), "--caps", "64",
                 "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert all(e["epsilon"] == 0.0 for e in rep["per_edge"])
    assert rep["global"]["delta_projector"] < 1e-20


def test_report_byte_identical(tmp_path, fig1_file):
    state = tmp_path / "r.bin"
    main(["gen", "random", "--dims", "2,2,2,2,2,2,2", "--seed", "9", "--out", str(state)])
    texts = []
    for k in range(2):
        out = tmp_path / f"rep{k}.json"
        main(["certify", "--state", str(state), "--tree", str(fig1_file), "--caps", "2",
              "--out", str(out)])
        texts.append(out.read_bytes())
    assert texts[0] == texts[1]


def test_report_self_certifying(fig1):
    state = make_named("random", fig1.dims, seed=11)
    rep = report.certify(state, fig1, TruncationPlan.uniform(3, fig1), full_spectra=True)
    edges = {e["edge"]: e for e in rep["per_edge"]}
    for row in rep["bounds"]:
        if row["edge"] is None or row["value"] is None:
            continue
        e = edges[row["edge"]]
        s = np.array(e["spectrum"])
        dist = EdgeDistribution(row["edge"], s**2 / np.sum(s**2), e["available_dim"])
        eps = float(np.sum(s[e["M_cap"]:] ** 2))
        assert eps == pytest.approx(e["epsilon"], abs=1e-14)
        if row["name"] == "entropy_error_lower":
            val = error_lower_bound(renyi_entropy(dist, row["alpha"]), e["M_cap"], row["alpha"])
            assert val == pytest.approx(row["value"], abs=1e-12)
        if row["name"] == "entropy_error_upper":
            ev = error_upper_bound(renyi_entropy(dist, row["alpha"]), e["M_cap"], row["alpha"], eps)
            assert ev.value == pytest.approx(row["value"], rel=1e-12)


def test_certify_budget_plans(fig1):
    state = make_named("random", fig1.dims, seed=2)
    for plan in (TruncationPlan(eps_per_edge=0.05), TruncationPlan(delta_total=0.2),
                 TruncationPlan(delta_total=0.2, split="entropy")):
        rep = report.certify(state, fig1, plan)
        assert rep["verdict"], [b for b in rep["bounds"] if b["passed"] is False]
    names = {b["name"] for b in rep["bounds"]}
    assert "entropy_error_upper" in names


def test_seed_range_batch(tmp_path, fig1_file, capsys):
    out = tmp_path / "reports"
    code = main(["certify", "--tree", str(fig1_file), "--seed-range", "0:4", "--caps", "3",
                 "--out", str(out), "--jobs", "2"])
    assert code == 0
    assert sorted(p.name for p in out.iterdir()) == [f"report_seed{s}.json" for s in range(4)]
    assert "4/4 instances pass" in capsys.readouterr().out


def test_profile(tmp_path, fig1_file, capsys):
    ghz = _gen(tmp_path, "ghz")
    out = tmp_path / "prof.json"
    assert main(["profile", "--state", str(ghz), "--tree", str(fig1_file), "--eps", "0.01",
                 "--out", str(out)]) == 0
    prof = json.loads(out.read_text())
    for e in prof["edges"]:
        assert all(abs(v - np.log(2)) < 1e-12 for v in e["renyi"].values())
        assert e["M_min"] == 2 and e["bracket_holds"]
    assert "M_upper" in capsys.readouterr().out
    prod = _gen(tmp_path, "product")
    main(["profile", "--state", str(prod), "--tree", str(fig1_file)])
    lines = capsys.readouterr().out.strip().splitlines()[1:]
    assert all(float(x) == 0.0 for line in lines for x in line.split()[1:])


def test_bad_plan_flags(tmp_path, fig1_file):
    ghz = _gen(tmp_path, "ghz")
    with pytest.raises(SystemExit):
        main(["certify", "--state", str(ghz), "--tree", str(fig1_file)])
    assert main(["certify", "--state", str(ghz), "--tree", str(fig1_file),
                 "--caps", "1=1,2=1"]) == 2
