import io
import json
import math

import pytest

from qsynth.cli import BenchConfig, ParameterError, linear_fit, main, parse_angle, run_bench


def run(argv):
    out = io.StringIO()
    code = main(argv, out)
    return code, out.getvalue()


def test_parse_angle():
    assert parse_angle("pi/4") == pytest.approx(math.pi / 4)
    assert parse_angle("-3pi/8") == pytest.approx(-3 * math.pi / 8)
    assert parse_angle("2*pi") == pytest.approx(2 * math.pi)
    assert parse_angle("0.25") == 0.25
    for bad in ("pi/0", "quarter"):
        with pytest.raises(ParameterError):
            parse_angle(bad)


def test_approx_v_golden_json():
    code, text = run(["approx", "--gates", "v", "--theta", "pi/4", "--eps", "0.1", "--format", "json"])
    assert code == 0
    data = json.loads(text)
    assert data["N"] == 5 and data["certified_eps"] <= 0.1
    u = complex(*data["branches"][0]["u"]) * math.sqrt(5**5)
    assert (round(u.real), round(u.imag)) in {(38, 41), (39, 40), (40, 39), (41, 38)}


def test_approx_zero_angle_gives_empty_sequence():
    code, text = run(["approx", "--theta", "0", "--eps", "1e-6", "--format", "json"])
    assert code == 0 and json.loads(text)["branches"][0]["sequence"] == ""


def test_approx_text_and_csv_outputs():
    code, text = run(["approx", "--protocol", "mixed-diagonal", "--theta", "0.3", "--eps", "1e-3"])
    assert code == 0 and text.strip()
    code, text = run(["approx", "--protocol", "fallback", "--theta", "0.3", "--eps", "1e-3", "--q", "0.9", "--format", "csv"])
    assert code == 0 and len(text.strip().splitlines()) == 2


def test_approx_euler_target():
    code, text = run(["approx", "--protocol", "general-su2", "--euler", "0.1,0.7,-0.4", "--eps", "1e-2", "--format", "json"])
    assert code == 0 and json.loads(text)["certified_eps"] <= 1e-2


def test_parameter_errors_exit_2():
    assert run(["approx", "--theta", "quarter", "--eps", "0.1"])[0] == 2
    assert run(["approx", "--theta", "0.3", "--eps", "0"])[0] == 2
    assert run(["approx", "--protocol", "fallback", "--theta", "0.3", "--eps", "1e-3"])[0] == 2
    assert run(["approx", "--gates", "v", "--protocol", "mixed-diagonal", "--theta", "0.3", "--eps", "0.1"])[0] == 2
    assert run(["nonsense"])[0] == 2


def test_exhausted_search_exit_3(monkeypatch):
    from qsynth import synth

    monkeypatch.setattr(synth, "DEFAULT_CONFIG", synth.SynthConfig(max_n=2))
    assert run(["approx", "--theta", "0.3", "--eps", "1e-8"])[0] == 3


@pytest.mark.parametrize(
    "seq, expect",
    [
        ("V-y V-x V+y V+x V-y Z", 0),
        ("V-z V-z V-z V-z V-z", 0),
        ("V-z V-z V-z V-z V+z", 1),
    ],
)
def test_verify_golden_rows(tmp_path, seq, expect):
    path = tmp_path / "seq.txt"
    path.write_text(seq + "\n")
    code, text = run(["verify", "--gates", "v", str(path), "--theta", "pi/4", "--eps", "0.1"])
    assert code == expect
    assert text.startswith("PASS" if expect == 0 else "FAIL")


def test_verify_rejects_unknown_token(tmp_path):
    path = tmp_path / "seq.txt"
    path.write_text("Tz Q\n")
    assert run(["verify", str(path), "--theta", "0.1", "--eps", "0.1"])[0] == 2


def test_verify_json_report(tmp_path):
    path = tmp_path / "seq.txt"
    path.write_text("Tz S Z\n")
    code, text = run(["verify", str(path), "--theta", "pi/8", "--eps", "1e-9", "--format", "json"])
    report = json.loads(text)
    assert code == 0 and report["pass"] and report["distance"] < 1e-12


def test_dump_region(tmp_path):
    code, text = run(["dump-region", "--kind", "mixed-fallback", "--theta", "pi/3", "--eps", "1e-3", "--q", "0.9"])
    assert code == 0 and set(json.loads(text)) == {"under", "over"}
    assert run(["dump-region", "--kind", "fallback", "--theta", "0", "--eps", "1e-3"])[0] == 2
    assert run(["dump-region", "--kind", "fixed-under-unitary", "--theta", "0", "--eps", "1e-3"])[0] == 2
    path = tmp_path / "region.json"
    assert run(["approx", "--theta", "0.2", "--eps", "1e-3", "--dump-region", str(path)])[0] == 0
    assert json.loads(path.read_text()) == json.loads(run(["dump-region", "--theta", "0.2", "--eps", "1e-3"])[1])


def test_bench_small_run(tmp_path):
    csv_path = tmp_path / "rows.csv"
    code, text = run(
        ["bench", "--angles", "3", "--eps", "1e-4,1e-5,1e-6", "--jobs", "1", "--metric", "power", "--output", str(csv_path), "--format", "json"]
    )
    assert code == 0
    data = json.loads(text)
    assert len(data["rows"]) == 9
    assert data["fit"]["points"] == 2
    assert len(csv_path.read_text().strip().splitlines()) == 10


def test_bench_fourier_angles():
    cfg = BenchConfig(fourier=(2, 4), eps_grid=(1e-3,))
    assert cfg.angles() == pytest.approx([math.pi / 4, math.pi / 8, math.pi / 16])
    rows, fit = run_bench(cfg)
    assert len(rows) == 3 and fit == {}


def test_linear_fit_recovers_line():
    rows = [{"eps": 2.0**-k, "expected_cost": 3 * k + 1 + (0.5 if a else -0.5)} for k in range(14, 30) for a in (0, 1)]
    fit = linear_fit(rows, below=1e-4)
    assert fit["mean"]["slope"] == pytest.approx(3) and fit["mean"]["intercept"] == pytest.approx(1)
    assert fit["max"]["intercept"] == pytest.approx(1.5)


@pytest.mark.parametrize(
    "kwargs",
    [{"count": 0}, {"eps_grid": (1e-4, 1e-3)}, {"eps_grid": ()}, {"eps_grid": (3.0,)}, {"metric": "depth"}, {"protocol": "general-su2"}],
)
def test_bench_config_validation(kwargs):
    with pytest.raises(ParameterError):
        BenchConfig(**kwargs)
