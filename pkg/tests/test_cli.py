import json
from fractions import Fraction

import pytest

from exkit import serialize
from exkit.cli import main
from exkit.core import Alphabet, make_distribution, tensor_power, uniform
from exkit.games import chsh_game


@pytest.fixture()
def chsh_file(tmp_path):
    path = tmp_path / "chsh.json"
    path.write_text(serialize.dumps(serialize.game_to_json(chsh_game())))
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def test_classes_filter_word_paper_example(capsys):
    code, out = run(
        capsys,
        "classes", "--relation", "markov", "--d", "3", "--n", "8",
        "--filter-word", "11323122",
    )
    assert code == 0
    payload = json.loads(out)
    assert len(payload["classes"]) == 1
    assert payload["classes"][0]["size"] == 12


def test_classes_exchangeable_d2_n3(capsys):
    code, out = run(capsys, "classes", "--relation", "exchangeable", "--d", "2", "--n", "3")
    payload = json.loads(out)
    assert code == 0 and payload["N"] == 4
    assert [c["size"] for c in payload["classes"]] == [1, 3, 3, 1]


def test_classes_lmarkov_includes_size_two_row(capsys):
    code, out = run(capsys, "classes", "--relation", "lmarkov", "--ell", "2", "--d", "2", "--n", "8")
    payload = json.loads(out)
    assert code == 0
    # the class of 00101100 (externally 11212211) has exactly two members
    code2, out2 = run(
        capsys,
        "classes", "--relation", "lmarkov", "--ell", "2", "--d", "2", "--n", "8",
        "--filter-word", "11212211",
    )
    row = json.loads(out2)["classes"][0]
    assert row["size"] == 2


def test_size_best_terms(capsys):
    code, out = run(capsys, "size", "--relation", "markov", "--d", "3", "--word", "11323122")
    payload = json.loads(out)
    assert code == 0
    assert payload["size"] == 12
    assert payload["best_formula"] == {
        "t_w": 2, "spanning_trees": 3, "factorial_ratio": "2/1", "end_vertex": 2,
    }


def test_certify_tensor_power_exit_zero(tmp_path, capsys):
    letter = make_distribution(Alphabet(2), 1, {(0,): Fraction(1, 4), (1,): Fraction(3, 4)})
    p = tensor_power(letter, 4)
    path = tmp_path / "p.json"
    path.write_text(serialize.dumps(serialize.distribution_to_json(p)))
    code, out = run(capsys, "certify", str(path), "--relation", "exchangeable")
    assert code == 0
    assert json.loads(out)["verdict"] == "holds"


def test_certify_non_exchangeable_witness_on_stderr(tmp_path, capsys):
    p = make_distribution(Alphabet(2), 2, {(0, 1): Fraction(1)})
    path = tmp_path / "bad.json"
    path.write_text(serialize.dumps(serialize.distribution_to_json(p)))
    code = main(["certify", str(path), "--relation", "exchangeable"])
    captured = capsys.readouterr()
    assert code == 4
    payload = json.loads(captured.err)
    assert payload["error"] == "NotExchangeable"
    assert "witness" in payload


def test_certify_round_trip_verify(tmp_path, capsys):
    p = uniform(Alphabet(2), 4)
    dist_path = tmp_path / "p.json"
    dist_path.write_text(serialize.dumps(serialize.distribution_to_json(p)))
    cert_path = tmp_path / "cert.json"
    code = main(["certify", str(dist_path), "--relation", "markov", "--output", str(cert_path)])
    assert code == 0
    code, out = run(capsys, "certify", str(cert_path), "--verify")
    assert code == 0
    assert json.loads(out)["verified"] is True


def test_certify_conditional_exit_zero(tmp_path, capsys):
    joint = Alphabet(4, (2, 2))
    path = tmp_path / "joint.json"
    path.write_text(serialize.dumps(serialize.distribution_to_json(uniform(joint, 3))))
    code, out = run(capsys, "conditional", str(path))
    assert code == 0
    assert json.loads(out)["verdict"] == "holds"


def test_alpha_command(capsys):
    code, out = run(capsys, "alpha", "--relation", "exchangeable", "--d", "2", "--n", "4")
    payload = json.loads(out)
    assert code == 0 and payload["degree"] == 2
    assert Fraction(payload["alpha"]["lo"]) <= Fraction("2.94780690")


def test_mp_and_beta_commands(capsys):
    code, out = run(capsys, "mp", "--d", "2", "--n", "2", "--type", "1,1")
    payload = json.loads(out)
    assert code == 0
    assert payload["lambda_row"] == ["3/10", "2/5", "3/10"]
    code, out = run(capsys, "beta", "--d", "2", "--n", "2")
    payload = json.loads(out)
    assert code == 0 and payload["beta_exact"] == "5/2"


def test_counterexample_command(capsys):
    code, out = run(capsys, "counterexample")
    payload = json.loads(out)
    assert code == 0
    assert set(payload["x_class_members"]) == {"1211", "1121"}
    assert payload["marginal_is_markov_exchangeable"] is False


def test_game_command_n1_and_n2(chsh_file, capsys):
    code, out = run(capsys, "game", chsh_file, "--n", "1")
    payload = json.loads(out)
    assert code == 0
    assert payload["classical_value"] == "3/4"
    code, out = run(capsys, "game", chsh_file, "--n", "2")
    payload = json.loads(out)
    assert code == 0
    assert payload["repeated_value"] == "5/8"
    assert payload["bound_ge_winning"] is True


def test_game_sequential_iid_matches_parallel(chsh_file, capsys):
    code, out = run(capsys, "game", chsh_file, "--n", "2", "--mode", "sequential")
    payload = json.loads(out)
    assert code == 0
    assert payload["repeated_value"] == "5/8"
    assert payload["bound_ge_winning"] is True


def test_cap_exceeded_exit_code(chsh_file, capsys):
    # Building the repeated game stays behind the enumeration cap.
    code = main(["game", chsh_file, "--n", "2", "--enum-cap", "100"])
    captured = capsys.readouterr()
    assert code == 2
    assert json.loads(captured.err)["error"] == "cap_exceeded"


def test_missing_file_exit_code(capsys):
    code = main(["certify", "/nonexistent/file.json"])
    assert code == 4


def test_deterministic_output(capsys):
    _, out1 = run(capsys, "classes", "--relation", "markov", "--d", "2", "--n", "4")
    _, out2 = run(capsys, "classes", "--relation", "markov", "--d", "2", "--n", "4")
    assert out1 == out2


def test_csv_and_pretty_formats(capsys):
    code, out = run(capsys, "classes", "--relation", "exchangeable", "--d", "2", "--n", "3", "--format", "csv")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0].startswith("type,size,alpha_tight")
    assert len(lines) == 5
    code, out = run(capsys, "beta", "--d", "2", "--n", "4", "--format", "pretty")
    assert code == 0 and "beta_exact: 7/2" in out


def test_precision_env_var(chsh_file, capsys, monkeypatch):
    monkeypatch.setenv("EXKIT_PRECISION_BITS", "32")
    code = main(["alpha", "--relation", "exchangeable", "--d", "2", "--n", "4"])
    assert code == 4  # must be >= 64
    monkeypatch.setenv("EXKIT_PRECISION_BITS", "256")
    code = main(["alpha", "--relation", "exchangeable", "--d", "2", "--n", "4"])
    assert code == 0
