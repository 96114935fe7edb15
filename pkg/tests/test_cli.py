import csv
import io
import math

import pytest

from fraclap.cli import main, manifest_path, read_config, resolve, seed_value


def run_cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def parse(text):
    return list(csv.reader(io.StringIO(text)))


def test_kernel_classical(capsys):
    code, out, _ = run_cli(capsys, "kernel", "--s", "1", "--M", "5")
    assert code == 0
    rows = parse(out)
    assert rows[0] == ["m", "K", "P"]
    assert [float(r[1]) for r in rows[1:]] == [1, 0, 0, 0, 0]
    assert [int(r[0]) for r in rows[1:]] == [1, 2, 3, 4, 5]
    assert float(rows[1][2]) == 0.5


@pytest.mark.parametrize(
    "s, M, expected",
    [
        ("0.5", "3", [0.4244132, 0.0848826, 0.0363783]),
        ("1.5", "2", [2.0371833, -0.2910262]),
    ],
)
def test_kernel_values(capsys, s, M, expected):
    code, out, _ = run_cli(capsys, "kernel", "--s", s, "--M", M)
    assert code == 0
    ks = [float(r[1]) for r in parse(out)[1:]]
    assert ks == pytest.approx(expected, abs=5e-8)


def test_kernel_seventeen_digits(capsys):
    _, out, _ = run_cli(capsys, "kernel", "--s", "0.5", "--M", "1")
    text = parse(out)[1][1]
    assert text == "0.42441318157838748"
    assert float(text) == pytest.approx(4 / (3 * math.pi), rel=1e-15)
    assert "\r" not in out


def test_kernel_both_signs(capsys):
    code, out, _ = run_cli(capsys, "kernel", "--s", "0.5", "--M", "3", "--both-signs")
    rows = parse(out)[1:]
    assert [int(r[0]) for r in rows] == [-3, -2, -1, 0, 1, 2, 3]
    assert float(rows[3][1]) == 0.0
    assert rows[0][1:] == rows[6][1:]


@pytest.mark.parametrize(
    "argv",
    [
        ["kernel", "--s", "2", "--M", "5"],
        ["kernel", "--s", "-1", "--M", "5"],
        ["kernel", "--s", "0.5", "--M", "0"],
        ["kernel", "--s", "0.5"],
        ["kernel", "--s", "abc", "--M", "3"],
        ["green", "--s", "1", "--t", "0", "--xmax", "10"],
        ["green", "--s", "1", "--t", "1", "--xmax", "10", "--quad", "15"],
        ["nonsense"],
    ],
)
def test_domain_errors_exit_2(capsys, argv):
    code, out, err = run_cli(capsys, *argv)
    assert code == 2
    assert out == ""
    assert err


def test_mass_failure_exit_3(capsys):
    code, out, err = run_cli(capsys, "disperse", "--s", "0.5", "--xmax", "100")
    assert code == 3
    assert "contract" in err
    assert out == ""


def test_green_classical(capsys):
    code, out, _ = run_cli(capsys, "green", "--s", "1", "--t", "1", "--xmax", "30")
    assert code == 0
    rows = parse(out)
    assert rows[0] == ["x", "t", "G"]
    g = {int(r[0]): float(r[2]) for r in rows[1:]}
    assert len(g) == 61
    assert g[0] == pytest.approx(0.3085083, abs=5e-8)
    assert g[3] == pytest.approx(g[-3])


def test_green_multiple_times(capsys):
    _, out, _ = run_cli(capsys, "green", "--s", "0.5", "--t", "1,2", "--xmax", "5")
    rows = parse(out)[1:]
    assert [float(r[1]) for r in rows] == [1.0] * 11 + [2.0] * 11


def test_disperse_classical(capsys):
    code, out, _ = run_cli(capsys, "disperse", "--s", "1", "--tmin", "10", "--tmax", "1000", "--points", "10")
    assert code == 0
    rows = parse(out)
    assert rows[0] == ["t", "width", "width_sq"]
    assert len(rows) == 12
    assert rows[-1][0] == "exponent"
    assert float(rows[-1][1]) == pytest.approx(1.0, abs=0.1)
    t = [float(r[0]) for r in rows[1:-1]]
    assert t[0] == pytest.approx(10) and t[-1] == pytest.approx(1000)


def test_disperse_superdiffusive(capsys):
    code, out, _ = run_cli(capsys, "disperse", "--s", "0.5")
    assert code == 0
    assert float(parse(out)[-1][1]) == pytest.approx(2.0, abs=0.3)


def test_distance_monotone(capsys):
    code, out, _ = run_cli(capsys, "distance", "--s", "1", "--c", "0", "--iters", "50", "--realizations", "1")
    assert code == 0
    rows = parse(out)
    assert rows[0] == ["s", "c", "n", "D_mean", "D_min", "D_max", "realizations", "status"]
    d = [float(r[3]) for r in rows[1:]]
    assert len(d) == 51
    assert all(0 <= x <= 1 for x in d)
    assert all(b <= a + 1e-12 for a, b in zip(d, d[1:]))


def test_distance_grid_order(capsys):
    _, out, _ = run_cli(
        capsys, "distance", "--s", "0.9,1.1", "--c", "0.1,0.01", "--M", "5",
        "--iters", "3", "--realizations", "2",
    )
    rows = parse(out)[1:]
    keys = [(r[0], r[1]) for r in rows[::4]]
    assert keys == [("0.90000000000000002", "0.10000000000000001"), ("0.90000000000000002", "0.01"),
                    ("1.1000000000000001", "0.10000000000000001"), ("1.1000000000000001", "0.01")]
    assert all(r[6] == "2" for r in rows)


def test_distance_deterministic(capsys, tmp_path):
    argv = ["distance", "--s", "0.9,1.1", "--c", "0.01", "--M", "20", "--iters", "40", "--realizations", "3", "--seed", "7"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(argv + ["--out", str(a)]) == 0
    assert main(argv + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert b"\r\n" not in a.read_bytes()


def test_ortho_unit_basis(capsys):
    code, out, _ = run_cli(capsys, "ortho", "--s", "1", "--c", "0", "--unit-basis")
    rows = parse(out)
    assert rows[0] == ["s", "c", "M", "n", "Q"]
    assert float(rows[1][4]) == 0.0


def test_ortho_small(capsys):
    code, out, _ = run_cli(capsys, "ortho", "--s", "1", "--c", "0.001", "--M", "10", "--n", "30")
    assert code == 0
    row = parse(out)[1]
    assert int(row[3]) == 30
    assert float(row[4]) < 1e-10


def test_manifest_round_trip(tmp_path):
    out = tmp_path / "d.csv"
    argv = ["distance", "--s", "1.2", "--c", "0.3", "--M", "6", "--iters", "15", "--realizations", "2", "--seed", "11"]
    assert main(argv + ["--out", str(out)]) == 0
    man = manifest_path(out)
    assert man.name == "d.manifest.txt"
    text = man.read_text()
    assert "# version=" in text and "# timestamp=" in text and "status=" in text
    replay = tmp_path / "replay.csv"
    assert main(["distance", "--config", str(man), "--out", str(replay)]) == 0
    assert replay.read_bytes() == out.read_bytes()


def test_config_file_and_precedence(tmp_path, monkeypatch):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\nseed=5\nM=9\niters=4\ns=0.8\n")
    monkeypatch.delenv("FRACLAP_SEED", raising=False)
    _, st, _, _ = resolve(["distance", "--config", str(cfg)])
    assert (st["seed"], st["M"], st["iters"], st["s"]) == (5, 9, 4, [0.8])
    monkeypatch.setenv("FRACLAP_SEED", "123")
    _, st, _, _ = resolve(["distance", "--config", str(cfg)])
    assert st["seed"] == 123
    _, st, _, _ = resolve(["distance", "--config", str(cfg), "--seed", "9", "--M", "3"])
    assert (st["seed"], st["M"]) == (9, 3)


def test_env_seed_changes_output(tmp_path, monkeypatch):
    argv = ["distance", "--s", "0.9", "--c", "1", "--M", "4", "--iters", "20", "--realizations", "1"]
    monkeypatch.setenv("FRACLAP_SEED", "1")
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    main(argv + ["--out", str(a)])
    monkeypatch.setenv("FRACLAP_SEED", "2")
    main(argv + ["--out", str(b)])
    assert a.read_bytes() != b.read_bytes()
    assert "seed=2" in manifest_path(b).read_text()


def test_bad_config(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("bogus=1\n")
    assert main(["kernel", "--config", str(cfg), "--s", "1", "--M", "2"]) == 2
    cfg.write_text("no equals sign\n")
    assert main(["kernel", "--config", str(cfg)]) == 2


def test_read_config_strips(tmp_path):
    cfg = tmp_path / "c.txt"
    cfg.write_text("  both-signs = true \n\n")
    assert read_config(cfg) == {"both_signs": "true"}


def test_seed_parsing():
    assert seed_value("042") == 42
    assert seed_value("0x10") == 16
    assert seed_value(str(2**64 - 1)) == 2**64 - 1
    with pytest.raises(Exception):
        seed_value(str(2**64))
    with pytest.raises(Exception):
        seed_value("-1")
