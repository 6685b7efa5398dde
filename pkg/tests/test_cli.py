import pytest

from agecode import format_source, uniform_pmf
from agecode.cli import main
from agecode.scenarios import IDEAL_SIGNALING_CSV


@pytest.fixture
def u4_source(tmp_path):
    path = tmp_path / "u4.txt"
    path.write_text(format_source(uniform_pmf(4)))
    return path


@pytest.fixture
def u20_source(tmp_path):
    path = tmp_path / "u20.txt"
    path.write_text(format_source(uniform_pmf(20)))
    return path


def test_code_reports_closed_forms(u20_source, tmp_path, capsys):
    out = tmp_path / "scheme.txt"
    rc = main(["code", "--source", str(u20_source), "--q", "0.15", "--out", str(out)])
    assert rc == 0
    text = capsys.readouterr().out
    assert "E[L] 4.4" in text
    assert "paoi 14.419607843137257" in text
    assert "q_star 0.13972706203928192" in text
    assert "stable true" in text
    lines = out.read_text().splitlines()
    assert "# scheme ideal" in lines
    assert sum(1 for l in lines if not l.startswith("#")) == 20


def test_code_u4_report(u4_source, capsys):
    rc = main(["code", "--source", str(u4_source), "--q", "0.25"])
    assert rc == 0
    text = capsys.readouterr().out
    assert "paoi 6.5" in text
    assert "q_star 0.3333333333333333" in text


def test_code_unstable_exits_2(u4_source, capsys):
    rc = main(["code", "--source", str(u4_source), "--q", "0.6"])
    assert rc == 2
    assert "min achievable E[L]" in capsys.readouterr().err


def test_simulate_stats_row(u4_source, tmp_path, capsys):
    scheme = tmp_path / "ideal.txt"
    main(["code", "--source", str(u4_source), "--q", "0.25", "--out", str(scheme)])
    capsys.readouterr()
    rc = main([
        "simulate", "--scheme", str(scheme), "--source", str(u4_source),
        "--q", "0.25", "--horizon", "200000", "--warmup", "5000", "--seed", "1",
    ])
    assert rc == 0
    header, row = capsys.readouterr().out.strip().splitlines()
    cols = dict(zip(header.split(","), row.split(",")))
    assert float(cols["empirical_paoi"]) == pytest.approx(6.5, rel=0.02)
    assert cols["diverged"] == "false"


def test_simulate_rejects_bad_horizon(u4_source, tmp_path, capsys):
    scheme = tmp_path / "ideal.txt"
    main(["code", "--source", str(u4_source), "--q", "0.25", "--out", str(scheme)])
    capsys.readouterr()
    rc = main([
        "simulate", "--scheme", str(scheme), "--source", str(u4_source),
        "--q", "0.25", "--horizon", "100", "--warmup", "200",
    ])
    assert rc == 2


def test_trace_scripted_golden(tmp_path, capsys):
    # the demo codebook, scripted like the frozen ideal-signaling scenario
    scheme = tmp_path / "scheme.txt"
    scheme.write_text("# scheme ideal\nA 0\nB 10\nC 110\nD 111\n")
    arrivals = tmp_path / "arrivals.csv"
    arrivals.write_text("slot,symbol\n0,C\n2,B\n8,A\n")
    out = tmp_path / "trace.csv"
    rc = main([
        "trace", "--scheme", str(scheme), "--arrivals", str(arrivals),
        "--horizon", "30", "--warmup", "0", "--out", str(out),
    ])
    assert rc == 0
    assert out.read_text() == IDEAL_SIGNALING_CSV


def test_sweep_csv_and_svg(tmp_path, u20_source, capsys):
    spec = tmp_path / "sweep.spec"
    spec.write_text(
        f"source = {u20_source.name}\n"
        "schemes = ideal,naive\n"
        "q_grid = 0.1,0.15\n"
        "horizon = 50000\n"
        "warmup = 2000\n"
        "seed = 1\n"
    )
    out_dir = tmp_path / "out"
    rc = main(["sweep", "--spec", str(spec), "--out-dir", str(out_dir)])
    assert rc == 0
    csv_text = (out_dir / "sweep.csv").read_text()
    lines = csv_text.strip().splitlines()
    assert lines[0] == "scheme,q,analytic_paoi,empirical_paoi,idle_fraction,diverged"
    assert len(lines) == 5
    # q-major ordering, schemes in spec order inside each q
    assert [l.split(",")[0] for l in lines[1:]] == ["ideal", "naive", "ideal", "naive"]
    assert (out_dir / "sweep.svg").read_text().startswith("<svg")

    # byte-stable on reruns
    rc = main(["sweep", "--spec", str(spec), "--out-dir", str(tmp_path / "out2")])
    assert rc == 0
    assert (tmp_path / "out2" / "sweep.csv").read_text() == csv_text


def test_sweep_parallel_matches_serial(tmp_path, u4_source):
    spec = tmp_path / "sweep.spec"
    spec.write_text(
        f"source = {u4_source.name}\n"
        "schemes = ideal,naive\n"
        "q_grid = 0.1,0.2\n"
        "horizon = 20000\n"
        "warmup = 1000\n"
    )
    main(["sweep", "--spec", str(spec), "--out-dir", str(tmp_path / "serial")])
    main(["sweep", "--spec", str(spec), "--out-dir", str(tmp_path / "par"), "--jobs", "2"])
    assert (tmp_path / "serial" / "sweep.csv").read_text() == (
        tmp_path / "par" / "sweep.csv"
    ).read_text()


def test_sweep_rejects_empty_scheme_list(tmp_path, u4_source, capsys):
    spec = tmp_path / "sweep.spec"
    spec.write_text(f"source = {u4_source.name}\nschemes =\nq_grid = 0.1\nhorizon = 20000\n")
    rc = main(["sweep", "--spec", str(spec), "--out-dir", str(tmp_path / "out")])
    assert rc == 2


def test_verify_flags_tampered_codebook(tmp_path, capsys):
    good = tmp_path / "good.txt"
    good.write_text("A 0\nB 10\nC 110\nD 111\n")
    bad = tmp_path / "bad.txt"
    bad.write_text("A 0\nB 10\nC 110\nD 1111\n")  # Kraft sum now below 1

    from agecode.verify import check_codebook_file

    assert check_codebook_file(good.read_text()) == []
    assert "kraft-sum" in check_codebook_file(bad.read_text())

    overlap = tmp_path / "overlap.txt"
    overlap.write_text("A 0\nB 01\nC 10\nD 11\n")
    assert "prefix-free" in check_codebook_file(overlap.read_text())


def test_simulate_writes_trace(tmp_path, u4_source, capsys):
    scheme = tmp_path / "ideal.txt"
    main(["code", "--source", str(u4_source), "--q", "0.25", "--out", str(scheme)])
    capsys.readouterr()
    out = tmp_path / "trace.csv"
    rc = main([
        "simulate", "--scheme", str(scheme), "--source", str(u4_source),
        "--q", "0.25", "--horizon", "500", "--warmup", "50", "--seed", "4",
        "--trace-out", str(out),
    ])
    assert rc == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "t,pending_bits,bit,decoded,age,u,N"
    assert len(lines) == 502  # header + rows 0..500


def test_sweep_default_grid_spans_inverse_entropy(tmp_path, u20_source):
    from agecode import entropy, uniform_pmf
    from agecode.sweep import parse_sweep_spec

    spec_text = f"source = {u20_source}\nschemes = ideal\nhorizon = 60000\n"
    spec = parse_sweep_spec(spec_text)
    assert len(spec.q_grid) == 50
    assert spec.q_grid[0] == pytest.approx(0.01)
    assert spec.q_grid[-1] == pytest.approx(1 / entropy(uniform_pmf(20)))


def test_verify_cli_rejects_tampered_codebook(tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("A 0\nB 10\nC 110\nD 1111\n")
    rc = main(["verify", "--level", "quick", "--codebook", str(bad)])
    assert rc == 1


def test_code_naive_reoptimize_flag(tmp_path, capsys):
    from agecode import format_source, zipf_pmf

    src = tmp_path / "z20.txt"
    src.write_text(format_source(zipf_pmf(20, 1.0)))
    rc = main(["code", "--source", str(src), "--q", "0.15", "--kind", "naive",
               "--naive-reoptimize"])
    assert rc == 0
    assert "scheme naive" in capsys.readouterr().out
