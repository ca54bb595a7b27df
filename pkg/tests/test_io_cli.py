import json
import shutil
import subprocess

import numpy as np
import pytest

from randgen import hermitian_kernel, hermitian_map, polynomial_kernel, representation_moments

from kreinkernels import io
from kreinkernels.cli import EXIT_FAIL, EXIT_OK, EXIT_INPUT, main
from kreinkernels.errors import ValidationError
from kreinkernels.hankel import MomentSequence
from kreinkernels.kernel import FiniteKernel
from kreinkernels.kolmogorov import SemigroupAction, decompose, verify


def put(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(io.dumps(obj))
    return str(p)


def run(capsys, *argv):
    code = main(["--json" if a == "@json" else a for a in argv])
    out = capsys.readouterr().out
    return code, out


def run_json(capsys, *argv):
    code = main(list(argv) + ["--json"])
    return code, json.loads(capsys.readouterr().out)


def test_complex_encoding():
    assert io.encode_complex(1 + 2j) == [1.0, 2.0]
    assert io.encode_complex(-0.0) == [0.0, 0.0]
    a = np.array([[1, 2j], [-3 + 0.5j, 0]])
    np.testing.assert_array_equal(io.decode_complex(io.encode_complex(a)), a)
    with pytest.raises(ValidationError):
        io.decode_complex(3.0)
    with pytest.raises(ValidationError):
        io.decode_complex([[1, 2, 3]])
    with pytest.raises(ValidationError):
        io.decode_complex(io.encode_complex(a), (3, 3))


def test_kernel_round_trip(rng):
    k = hermitian_kernel(rng, 3, 2)
    back = io.kernel_from_json(json.loads(io.dumps(io.kernel_to_json(k))))
    assert back.labels == k.labels
    np.testing.assert_array_equal(back.blocks, k.blocks)


def test_kernel_rejects():
    good = io.kernel_to_json(FiniteKernel.identity(["a", "b"]))
    for bad in (
        {**good, "labels": []},
        {k: v for k, v in good.items() if k != "blocks"},
        {**good, "h": 2},
        {**good, "blocks": io.encode_complex(np.array([[[[0]], [[1]]], [[[0]], [[0]]]]))},
    ):
        with pytest.raises(ValidationError):
            io.kernel_from_json(bad)


def test_decomposition_round_trip(rng):
    k = hermitian_kernel(rng, 3, 1)
    d = decompose(k)
    back = io.decomposition_from_json(json.loads(io.dumps(io.decomposition_to_json(d))), k.labels)
    assert verify(back, k).passed
    with pytest.raises(ValidationError):
        io.decomposition_from_json(io.decomposition_to_json(d), ["p", "q", "r"])


def test_other_round_trips(rng):
    act = SemigroupAction({"s": {"0": "1", "1": "0"}}, {"s": "s"})
    back = io.action_from_json(io.action_to_json(act))
    assert back.maps == act.maps and back.involution == act.involution
    sigma = representation_moments(rng, 2, 2, 2)
    again = io.moments_from_json(io.moments_to_json(sigma))
    assert all(again[w] == v for w, v in sigma.values.items())
    t = hermitian_map(rng, 2, 2)
    np.testing.assert_array_equal(io.map_from_json(io.map_to_json(t)).choi, t.choi)
    p = polynomial_kernel(rng, 2, 2, hermitian=False)
    assert io.polynomial_from_json(io.polynomial_to_json(p)).coeffs == p.coeffs


def test_moment_and_polynomial_rejects():
    with pytest.raises(ValidationError):
        io.moments_from_json({"N": 1, "d": 1, "entries": [{"word": [], "value": [1, 0]}, {"word": [], "value": [1, 0]}]})
    with pytest.raises(ValidationError):
        io.polynomial_from_json({"d": 2, "terms": [{"alpha": [1], "beta": [0, 0], "value": [1, 0]}]})


def test_load_errors(tmp_path):
    p = tmp_path / "x.json"
    p.write_text("{not json")
    with pytest.raises(ValidationError):
        io.load(p)
    with pytest.raises(ValidationError):
        io.load(tmp_path / "missing.json")


# command line


def test_decompose_diagonal(tmp_path, capsys):
    src = put(tmp_path, "k.json", io.kernel_to_json(FiniteKernel.from_gram(np.diag([1.0, -1.0]))))
    out = tmp_path / "d.json"
    code, rep = run_json(capsys, "decompose", "--input", src, "--out", str(out))
    assert code == EXIT_OK and rep["certificates"]["signature"] == [1, 1]
    assert rep["residuals"]["reconstruction"]["ok"]
    code, rep = run_json(capsys, "verify", "--input", src, "--decomposition", str(out))
    assert code == EXIT_OK and rep["certificates"]["minimal"]


def test_malformed_and_nonhermitian(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"labels": ["a"]')
    assert run(capsys, "decompose", "--input", str(bad))[0] == EXIT_INPUT
    nh = put(tmp_path, "nh.json", io.kernel_to_json(FiniteKernel.from_gram([[0, 1], [0, 0]])))
    code, rep = run_json(capsys, "decompose", "--input", nh)
    assert code == EXIT_INPUT and "NotHermitian" in rep["error"]
    assert run(capsys, "decompose")[0] == EXIT_INPUT
    assert run(capsys, "decompose", "--input", str(tmp_path / "nope.json"))[0] == EXIT_INPUT


def test_argparse_error_exit_code(capsys):
    with pytest.raises(SystemExit) as info:
        main(["moments", "bogus"])
    assert info.value.code == EXIT_INPUT


def test_schwartz_modes(tmp_path, capsys):
    swap = put(tmp_path, "s.json", io.kernel_to_json(FiniteKernel.from_gram([[0.0, 1], [1, 0]])))
    code, rep = run_json(capsys, "schwartz", "--input", swap)
    assert code == EXIT_OK and rep["certificates"]["epsilon"] == pytest.approx(1)
    ident = put(tmp_path, "i.json", io.kernel_to_json(FiniteKernel.identity(["x1", "x2"])))
    code, rep = run_json(capsys, "schwartz", "--input", swap, "--witness", ident, "--gap")
    assert code == EXIT_OK and rep["verdicts"]["schwartz"]
    half = put(tmp_path, "h.json", io.kernel_to_json(FiniteKernel.identity(["x1", "x2"]) * 0.5))
    code, rep = run_json(capsys, "schwartz", "--input", swap, "--witness", half)
    assert code == EXIT_FAIL and not rep["verdicts"]["schwartz"]


def test_moments_commands(tmp_path, capsys):
    gauss = put(tmp_path, "g.json", io.moments_to_json(MomentSequence.classical([1, 0, 1, 0, 3], 2)))
    code, rep = run_json(capsys, "moments", "check", "--input", gauss)
    assert code == EXIT_OK and rep["verdicts"]["feasible"] and rep["certificates"]["truncated"]
    code, rep = run_json(capsys, "moments", "gns", "--input", gauss, "--out", str(tmp_path / "gns.json"))
    assert code == EXIT_OK and rep["certificates"]["k"] == 3
    assert set(io.load(tmp_path / "gns.json")) >= {"pi", "omega", "decomposition"}
    zero = put(tmp_path, "z.json", io.moments_to_json(MomentSequence.classical([0] * 5, 2)))
    code, rep = run_json(capsys, "moments", "gns", "--input", zero)
    assert code == EXIT_OK and rep["certificates"]["k"] == 0
    code, rep = run_json(capsys, "moments", "unique", "--input", gauss)
    assert code == EXIT_OK and rep["certificates"]["epsilon"] > 0


def test_map_commands(tmp_path, capsys):
    from kreinkernels.dilation import HermitianLinearMap

    t = put(tmp_path, "t.json", io.map_to_json(HermitianLinearMap.transpose(2)))
    code, rep = run_json(capsys, "map", "stinespring", "--input", t)
    assert code == EXIT_OK and rep["certificates"]["signature"] == [3, 1]
    code, rep = run_json(capsys, "map", "split", "--input", t)
    assert code == EXIT_OK and rep["certificates"]["rank_plus"] == 3 and rep["certificates"]["rank_minus"] == 1
    code, rep = run_json(capsys, "map", "paulsen", "--input", t)
    assert code == EXIT_OK and rep["verdicts"]["off_diagonal"]


def test_dilate_nilpotent(tmp_path, capsys):
    nil = put(tmp_path, "n.json", io.kernel_to_json(FiniteKernel.from_gram([[0.0, 1], [0, 0]])))
    code, rep = run_json(capsys, "dilate", "--input", nil)
    assert code == EXIT_OK and rep["verdicts"]["block_kernel_psd"]
    assert not rep["certificates"]["hermitian_input"]


def test_fock_commands(tmp_path, capsys):
    code, rep = run_json(capsys, "fock", "szego", "--xi", "0.5", "--eta", "0.5")
    assert code == EXIT_OK and rep["residuals"]["truncation_error"]["ok"]
    assert run(capsys, "fock", "szego", "--xi", "1.0", "--eta", "0")[0] == EXIT_INPUT
    assert run(capsys, "fock", "szego", "--xi", "0.1,x", "--eta", "0")[0] == EXIT_INPUT
    poly = {"d": 1, "terms": [{"alpha": [1], "beta": [1], "value": [1, 0]}, {"alpha": [0], "beta": [0], "value": [-1, 0]}]}
    src = put(tmp_path, "p.json", poly)
    code, rep = run_json(capsys, "fock", "linearize", "--input", src)
    assert code == EXIT_OK and rep["certificates"]["J"] == [1, -1]
    code, rep = run_json(capsys, "fock", "dilate", "--input", src)
    assert code == EXIT_OK and rep["residuals"]["norm_U_minus_1"]["ok"]


def test_human_report(tmp_path, capsys):
    src = put(tmp_path, "k.json", io.kernel_to_json(FiniteKernel.identity(["a"])))
    code, out = run(capsys, "decompose", "--input", src)
    assert code == EXIT_OK and "reconstruction" in out and "wall time" in out


def test_json_report_deterministic(tmp_path, capsys, rng):
    src = put(tmp_path, "k.json", io.kernel_to_json(hermitian_kernel(rng, 4, 2)))
    reports = []
    for _ in range(2):
        code, rep = run_json(capsys, "decompose", "--input", src)
        rep.pop("wall_time")
        reports.append(rep)
    assert code == EXIT_OK and reports[0] == reports[1]
    assert len(reports[0]["inputs_digest"]) == 64


@pytest.mark.skipif(shutil.which("kk") is None, reason="console script not installed")
def test_console_script(tmp_path):
    src = put(tmp_path, "k.json", io.kernel_to_json(FiniteKernel.identity(["a", "b"])))
    proc = subprocess.run(["kk", "decompose", "--input", src, "--json"], capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["command"] == "decompose"
