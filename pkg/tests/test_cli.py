import os

import pytest

from scanforge.cli import main
from scanforge.networks import build_network, serialize_network
from scanforge.ops import ScanKind
from scanforge.registration import io as fio


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_verify_passes_and_prints_table(capsys):
    code, out, _ = run(capsys, "verify", "--kinds", "all",
                       "--widths", "2,4,8,16")
    assert code == 0
    assert "sklansky" in out and "ok" in out


def test_verify_network_file(tmp_path, capsys):
    net = build_network(ScanKind.BRENT_KUNG, 8)
    path = tmp_path / "net.txt"
    path.write_text(serialize_network(net))
    code, out, _ = run(capsys, "verify", "--network", str(path))
    assert code == 0 and "lanes_ok=True" in out


def test_verify_corrupted_network_reports_lane(tmp_path, capsys):
    net = build_network(ScanKind.KOGGE_STONE, 8)
    text = serialize_network(net)
    # drop one node from the second step
    lines = text.splitlines()
    lines[2] = lines[2].replace(" (5,7)", "")
    (tmp_path / "bad.txt").write_text("\n".join(lines) + "\n")
    code, out, _ = run(capsys, "verify", "--network",
                       str(tmp_path / "bad.txt"))
    assert code == 1
    assert "lanes_ok=False" in out and "7" in out


def test_verify_missing_file_is_io_error(tmp_path, capsys):
    code, _, err = run(capsys, "verify", "--network",
                       str(tmp_path / "absent.txt"))
    assert code == 3


def test_counts_table(capsys):
    code, out, _ = run(capsys, "counts", "--all", "--n", "8")
    assert code == 0
    for token in ("serial", "blelloch", "17", "12", "11", "14"):
        assert token in out


def test_counts_single_kind(capsys):
    code, out, _ = run(capsys, "counts", "--kind", "kogge-stone", "--n", "16")
    assert code == 0 and "49" in out     # 16*4 - 16 + 1


def test_simulate_csv_and_determinism(tmp_path, capsys):
    args = ("simulate", "--variant", "general-inclusive",
            "--kind", "kogge-stone", "--n", "256", "--p-list", "2,8,32",
            "--cost", "lognormal:0,0.5", "--repetitions", "3",
            "--seed", "17")
    code, out1, _ = run(capsys, *args)
    assert code == 0
    header = out1.splitlines()[0]
    assert header == ("variant,kind,n,p,rep,t_serial,t_parallel,speedup,"
                      "sigma,theory_span,theory_speedup")
    code, out2, _ = run(capsys, *args)
    assert out1 == out2


def test_simulate_constant_matches_theory(capsys):
    code, out, _ = run(capsys, "simulate", "--kind", "blelloch",
                       "--n", "64", "--p-list", "4,8", "--cost", "constant:1")
    assert code == 0
    for line in out.strip().splitlines()[1:]:
        cols = line.split(",")
        assert float(cols[7]) == pytest.approx(float(cols[10]), rel=1e-12)


def test_scaling_weak_mode(tmp_path, capsys):
    out_file = tmp_path / "weak.csv"
    code, _, _ = run(capsys, "scaling", "--mode", "weak", "--k", "8",
                     "--p-list", "2,4", "--repetitions", "2",
                     "--out", str(out_file))
    assert code == 0
    lines = out_file.read_text().strip().splitlines()
    assert lines[0] == "variant,kind,n,p,rep,t_serial,t_parallel,speedup,sigma"
    assert len(lines) == 5


def test_scaling_rejects_bad_mode(capsys):
    code, _, err = run(capsys, "scaling", "--mode", "diagonal")
    assert code == 2 and "usage error" in err


def test_config_file_supplies_values(tmp_path, capsys):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text("variant=general-exclusive\nkind=blelloch\nn=64\n"
                   "p-list=4\ncost.kind=constant\ncost.c=1.0\n"
                   "repetitions=2\nseed=5\n")
    code, out, _ = run(capsys, "simulate", "--config", str(cfg))
    assert code == 0
    assert "blelloch,64,4" in out


def test_config_rejects_unknown_keys(tmp_path, capsys):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text("variant=alternative\nbogus_key=1\n")
    code, _, err = run(capsys, "simulate", "--config", str(cfg))
    assert code == 2 and "unknown key" in err


def test_seed_precedence_flag_over_env(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("SCANFORGE_SEED", "111")
    args = ("simulate", "--kind", "blelloch", "--n", "64", "--p-list", "4",
            "--cost", "uniform:0.5,1.5", "--repetitions", "2")
    _, out_env, _ = run(capsys, *args)
    _, out_env2, _ = run(capsys, *args)
    assert out_env == out_env2              # env-driven, deterministic
    _, out_flag, _ = run(capsys, *args, "--seed", "222")
    assert out_flag != out_env              # flag wins over env


def test_register_synthetic_outputs(tmp_path, capsys):
    out_dir = tmp_path / "reg"
    code, out, _ = run(capsys, "register", "--n", "3", "--level", "5",
                       "--m0", "3", "--seed", "4", "--out-dir", str(out_dir))
    assert code == 0
    for name in ("deformations.txt", "deformations.csv", "neighbours.txt",
                 "mean_aligned.raw", "mean_aligned.pgm", "timings.csv",
                 "ground_truth.txt"):
        assert (out_dir / name).exists(), name
    defs = fio.read_deformations(out_dir / "deformations.txt")
    assert len(defs) == 3
    header = (out_dir / "deformations.csv").read_text().splitlines()[0]
    assert header == "frame,alpha,t0,t1"
    timing_lines = (out_dir / "timings.csv").read_text().strip().splitlines()
    assert timing_lines[0] == "phase,index,seconds"
    assert any(l.startswith("preprocess,") for l in timing_lines)
    assert timing_lines[-1].startswith("scan,")


def test_register_from_manifest(tmp_path, capsys):
    from scanforge.registration import DriftSpec, generate_series
    frames, _ = generate_series(3, DriftSpec(level=5), seed=2)
    for i, f in enumerate(frames):
        fio.write_raw(tmp_path / f"f{i}.raw", f)
    fio.write_manifest(tmp_path / "series.txt",
                       [f"f{i}.raw" for i in range(3)])
    out_dir = tmp_path / "out"
    code, _, _ = run(capsys, "register", "--frames",
                     str(tmp_path / "series.txt"), "--m0", "3",
                     "--out-dir", str(out_dir))
    assert code == 0
    assert not (out_dir / "ground_truth.txt").exists()
    assert (out_dir / "deformations.txt").exists()


def test_register_missing_manifest_is_io_error(tmp_path, capsys):
    code, _, _ = run(capsys, "register", "--frames",
                     str(tmp_path / "none.txt"))
    assert code == 3


def test_trace_cost_from_timings_csv(tmp_path, capsys):
    trace = tmp_path / "timings.csv"
    trace.write_text("phase,index,seconds\npreprocess,0,0.5\n"
                     "preprocess,1,0.75\nscan,0,1.25\n")
    code, out, _ = run(capsys, "simulate", "--kind", "kogge-stone",
                       "--variant", "general-inclusive", "--n", "64",
                       "--p-list", "4", "--cost", f"trace:{trace}",
                       "--repetitions", "2", "--seed", "3")
    assert code == 0 and len(out.strip().splitlines()) == 3


def test_bad_cost_spec_is_usage_error(capsys):
    code, _, err = run(capsys, "simulate", "--cost", "gaussian:1",
                       "--n", "16", "--p-list", "2")
    assert code == 2 and "cost" in err
