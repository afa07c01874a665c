import csv
import io
import json

import pytest

import dhisq

FEEDFORWARD = """
qubit q0; qubit q1; qubit q2;
bit c0;
h q0;
cx q0 q1;
measure q0 -> c0;
if (c0) { x q2; }
"""


def test_assemble_round_trip():
    text = ".node 0\nwaiti 57\ncw.i.i 1, 3\n"
    data = dhisq.assemble(text)
    assert len(data) == 8
    again = dhisq.disassemble(data)
    assert dhisq.assemble(again) == data


def test_syntax_error_carries_category():
    with pytest.raises(dhisq.DhisqError) as info:
        dhisq.assemble("bogus r1")
    assert info.value.kind == "syntax"
    assert info.value.code == 2


def test_compile_and_run_both_modes():
    telf = {}
    for mode in ("bisp", "lockstep"):
        out = dhisq.compile(FEEDFORWARD, mode=mode)
        assert sorted(out["programs"]) == [0, 1, 2]
        manifest = json.loads(out["manifest"])
        groups = {int(k): v for k, v in manifest["sync_groups"].items()}
        res = dhisq.run(out["programs"], out["topology"], mode=mode, sync_groups=groups)
        shot = res["shots"][0]
        labels = [r["label"] for r in shot["records"]]
        assert "h@q0" in labels
        assert res["mean_runtime_ns"] > 0
        telf[mode] = shot["telf"]
    assert telf["bisp"].startswith("# telf")


def test_run_is_deterministic():
    out = dhisq.compile(dhisq.long_range_cnot(5))
    runs = [dhisq.run(out["programs"], out["topology"], random_outcomes=True, seed=7, shots=3) for _ in range(2)]
    assert [s["telf"] for s in runs[0]["shots"]] == [s["telf"] for s in runs[1]["shots"]]


def test_fig10_alignment():
    r = dhisq.fig10()
    assert r["aligned"]
    assert r["advance"] == [30] * 7
    assert "waiti 57" in r["readout"]


def test_bench_csv_shape():
    text = dhisq.bench(benchmarks=["ghz", "lrcnot"], qubits=4)
    rows = list(csv.DictReader(io.StringIO(text)))
    assert len(rows) == 2 * 10
    assert {r["benchmark"] for r in rows} == {"ghz", "lrcnot"}
    assert all(float(r["runtime_lockstep_ns"]) >= float(r["runtime_bisp_ns"]) for r in rows)


def test_bad_topology_is_config_error():
    with pytest.raises(dhisq.DhisqError) as info:
        dhisq.run({0: "waiti 1"}, '{"controllers": []}')
    assert info.value.code in (3,)
