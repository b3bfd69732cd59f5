import json

from click.testing import CliRunner

from embedlab.cli import main


def invoke(*args, env=None):
    return CliRunner().invoke(main, list(args), env=env, catch_exceptions=False)


def test_gen_writes_stream(tmp_path):
    out = tmp_path / "s.txt"
    result = invoke("gen", "--family", "omega_k", "--k", "2",
                    "--policy", "fair", "--stages", "20", "--out", str(out))
    assert result.exit_code == 0
    text = out.read_text()
    assert text.startswith("-- stage 0")
    assert "-- stage 19" in text


def test_gen_bad_k_exits_2(tmp_path):
    result = invoke("gen", "--family", "omega_k", "--k", "0",
                    "--stages", "5", "--out", str(tmp_path / "x.txt"))
    assert result.exit_code == 2
    assert "positive" in result.output


def test_gen_deterministic_bytes(tmp_path):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    for path in (a, b):
        invoke("gen", "--family", "e_hat_k", "--k", "1", "--policy",
               "permuted", "--seed", "5", "--stages", "30", "--out", str(path))
    assert a.read_bytes() == b.read_bytes()


def test_gen_env_seed_overrides(tmp_path):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    invoke("gen", "--family", "omega", "--policy", "permuted", "--seed", "1",
           "--stages", "20", "--out", str(a), env={"EMBEDLAB_SEED": "9"})
    invoke("gen", "--family", "omega", "--policy", "permuted", "--seed", "9",
           "--stages", "20", "--out", str(b))
    assert a.read_bytes() == b.read_bytes()


def test_run_and_classify_roundtrip(tmp_path):
    stream = tmp_path / "s.txt"
    log = tmp_path / "r.jsonl"
    invoke("gen", "--family", "omega_k", "--k", "2", "--stages", "120",
           "--out", str(stream))
    result = invoke("run", "--op", "replicate:2", "--in", str(stream),
                    "--log", str(log))
    assert result.exit_code == 0
    lines = log.read_text().splitlines()
    assert len(lines) == 121  # header + one record per stage
    result = invoke("classify", "--log", str(log), "--claim", "omega_k:4",
                    "--w", "5")
    assert result.exit_code == 0
    record = json.loads(result.output.splitlines()[-1])
    assert record["verdict"] == "CONSISTENT"
    result = invoke("classify", "--log", str(log), "--claim", "omega_k:3")
    assert result.exit_code == 4


def test_run_signature_mismatch_exits_3(tmp_path):
    stream = tmp_path / "s.txt"
    invoke("gen", "--family", "omega", "--stages", "10", "--out", str(stream))
    result = invoke("run", "--op", "eq2ord_v1", "--in", str(stream),
                    "--log", str(tmp_path / "x.jsonl"))
    assert result.exit_code == 3


def test_run_unknown_operator_exits_2(tmp_path):
    stream = tmp_path / "s.txt"
    invoke("gen", "--family", "omega", "--stages", "5", "--out", str(stream))
    result = invoke("run", "--op", "wat", "--in", str(stream),
                    "--log", str(tmp_path / "x.jsonl"))
    assert result.exit_code == 2


def test_run_combinator_expression(tmp_path):
    stream = tmp_path / "s.txt"
    log = tmp_path / "r.jsonl"
    invoke("gen", "--family", "e_hat_k", "--k", "1", "--stages", "30",
           "--out", str(stream))
    result = invoke(
        "run", "--op", "concat(eq2ord_v1|fill:left, eq2ord_v2|fill:right)",
        "--in", str(stream), "--log", str(log),
    )
    assert result.exit_code == 0
    header = json.loads(log.read_text().splitlines()[0])
    assert header["operator"].startswith("concat(")


def test_run_phi_sigma2_with_sentences(tmp_path):
    stream = tmp_path / "s.txt"
    log = tmp_path / "r.jsonl"
    invoke("gen", "--family", "omega_k", "--k", "2", "--stages", "40",
           "--out", str(stream))
    result = invoke("run", "--op", "phi_sigma2", "--phi", "least",
                    "--psi", "greatest", "--in", str(stream), "--log", str(log))
    assert result.exit_code == 0
    last = json.loads(log.read_text().splitlines()[-1])
    assert last["annotations"]["placement"] in ("top", "bottom")


def test_run_phi_pair_targets(tmp_path):
    stream = tmp_path / "s.txt"
    log = tmp_path / "r.jsonl"
    invoke("gen", "--family", "omega", "--stages", "30", "--out", str(stream))
    result = invoke("run", "--op", "phi_pair", "--in", str(stream),
                    "--target-a", "omega_k:2", "--target-b", "omega_star_k:2",
                    "--log", str(log))
    assert result.exit_code == 0
    last = json.loads(log.read_text().splitlines()[-1])
    assert last["annotations"]["building"] == "A"


def test_force_command(tmp_path):
    alpha = tmp_path / "a.txt"
    alpha.write_text("lt 0 1\n")
    result = invoke("force", "--op", "replicate:2", "--alpha", str(alpha),
                    "--atom", "lt 2 1", "--ext", "3", "--budget", "16")
    assert result.exit_code == 0
    record = json.loads(result.output.splitlines()[-1])
    assert record["outcome"] == "FORCED"
    result = invoke("force", "--op", "replicate:2", "--alpha", str(alpha),
                    "--atom", "lt 1 2", "--ext", "3", "--budget", "16")
    record = json.loads(result.output.splitlines()[-1])
    assert record["outcome"] == "REFUTED"
    assert record["certificate"] == ["el 0", "el 1", "lt 0 1"]


def test_force_bad_atom_exits_2(tmp_path):
    alpha = tmp_path / "a.txt"
    alpha.write_text("lt 0 1\n")
    result = invoke("force", "--op", "replicate:2", "--alpha", str(alpha),
                    "--atom", "lt 99999 99998")
    assert result.exit_code == 2


def test_run_logs_are_byte_identical_for_same_config(tmp_path):
    stream = tmp_path / "s.txt"
    invoke("gen", "--family", "one_plus_eta", "--policy", "permuted",
           "--seed", "3", "--stages", "40", "--out", str(stream))
    logs = []
    for name in ("r1.jsonl", "r2.jsonl"):
        log = tmp_path / name
        invoke("run", "--op", "ord2eq", "--in", str(stream), "--log", str(log))
        logs.append(log.read_bytes())
    assert logs[0] == logs[1]


def test_suite_single_experiment(tmp_path):
    out_dir = tmp_path / "suite"
    result = invoke("suite", "--only", "phi_pair", "--seed", "7",
                    "--out-dir", str(out_dir))
    assert result.exit_code == 0
    assert (out_dir / "phi_pair.jsonl").exists()
    summary = json.loads((out_dir / "suite_summary.json").read_text())
    assert summary["passed"] is True


def test_suite_requires_selection():
    result = invoke("suite")
    assert result.exit_code == 2


def test_suite_unknown_experiment():
    result = invoke("suite", "--only", "nope")
    assert result.exit_code == 2
