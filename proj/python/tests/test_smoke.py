import itertools
import json

import pytest

import seqfluct


def lcs(x, y):
    # plain quadratic DP, independent of the module
    row = [0] * (len(y) + 1)
    for a in x:
        prev = 0
        for j, b in enumerate(y, 1):
            cur = row[j]
            row[j] = prev + 1 if a == b else max(row[j], row[j - 1])
            prev = cur
    return row[-1]


def test_score_matches_plain_dp():
    for n in range(1, 7):
        for x in itertools.product("01", repeat=n):
            y = x[::-1]
            xs, ys = "".join(x), "".join(y)
            assert seqfluct.score(xs, ys) == lcs(xs, ys)
            assert seqfluct.lcs_length(xs, ys) == lcs(xs, ys)


def test_general_scheme_agrees_with_brute_force():
    table = [[3, 1, 0], [1, 2, 1], [0, 1, 3]]
    for x, y in [("abca", "cbaa"), ("aaab", "bbba"), ("cab", "abc")]:
        assert seqfluct.score(x, y, "abc", table, 0.5) == seqfluct.brute_force_score(x, y, "abc", table, 0.5)


def test_block_statistics_and_move():
    assert seqfluct.block_stats("0011100111100", 3) == {"b1": 2, "b2": 1, "b3": 1, "r": 2}
    assert seqfluct.tur("0011100111100", 3) == (4, -2, 2)
    outs = seqfluct.block_move_outcomes("0011100111100", "0" * 13, 3)
    assert sorted(p for _, _, p in outs) == [0.5, 0.5]
    assert "0001110011100" in {x for x, _, _ in outs}


def test_tur_pmf_sums_to_one():
    n, l = 14, 3
    total = 0.0
    for t in range(0, n + 1):
        for u in range(-t, t + 1):
            for r in range(1, l + 2):
                try:
                    total += seqfluct.tur_pmf(t, u, r, l, 0.2, 0.5, 0.3, n)
                except seqfluct.SeqfluctError:
                    pass
    assert total == pytest.approx(1.0, abs=1e-12)


def test_errors_carry_kind():
    with pytest.raises(seqfluct.SeqfluctError) as info:
        seqfluct.score("012", "001")
    assert info.value.kind == "validation"
    assert info.value.exit_code == 2
    with pytest.raises(ValueError):
        seqfluct.block_move_outcomes("0011100011", "0" * 10, 3)


def test_cli_round_trip(tmp_path):
    prefix = tmp_path / "tilde2"
    code, out, _ = seqfluct.run_cli(["oracle", "--check", "tilde2", "--n", "3", "--out", str(prefix)])
    assert code == 0
    assert out.startswith("PASS")
    report = json.loads((tmp_path / "tilde2.json").read_text())
    assert report["schema_version"] == 1
    assert report["fingerprint"] == seqfluct.config_fingerprint(json.dumps(report["config"], separators=(",", ":"), sort_keys=True))
    code, _, err = seqfluct.run_cli(["gen", "--n", "0"])
    assert code == 2
    assert json.loads(err)["error"]["kind"] == "validation"
