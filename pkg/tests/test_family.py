import json
from fractions import Fraction as F

import pytest

from helpers import smooth_instance
from relurank.family import PolyFamily, rank_gap_example, family_difference_eval, family_jacobian, load_family
from relurank.linalg import r_R_rank, r_RR_rank, rank_rational
from relurank.paths import algebraic_jacobian
from relurank.poly import PolyMatrix


def test_rank_gap_jacobian():
    J = family_jacobian(rank_gap_example())
    want = PolyMatrix.from_strings([["1", "0", "0"], ["0", "1", "0"], ["0", "0", "1"], ["-2*t1", "2*t2", "1"]], 3)
    assert J.entries == want.entries and len(J.entries) == 4


def test_constant_and_linear_slots():
    assert family_jacobian(PolyFamily.from_strings(2, ["1", "5/3"])).evaluate((4, 4)) == [[0, 0], [0, 0]]
    assert family_jacobian(PolyFamily.from_strings(3, ["t1", "t2", "t3"])).evaluate((9, 9, 9)) == [
        [1, 0, 0], [0, 1, 0], [0, 0, 1]]


def test_difference_eval():
    fam = rank_gap_example()
    assert family_difference_eval(fam, (0, 0, 0), (1, 1, 1)) == [1, 1, 1, 1]
    assert family_difference_eval(fam, (0, 0, 0), (1, 0, 0)) == [1, 0, 0, -1]
    assert family_difference_eval(fam, (F(1, 3), 2, 5), (F(1, 3), 2, 5)) == [0, 0, 0, 0]


def test_json_round_trip(tmp_path):
    path = tmp_path / "fam.json"
    path.write_text(json.dumps({"D": 3, "slots": ["t1", "t2", "t3", "t3-t1^2+t2^2"]}))
    fam = load_family(path)
    assert family_jacobian(fam).entries == family_jacobian(rank_gap_example()).entries
    assert PolyFamily.from_json(fam.to_json()).slots == fam.slots


def test_bad_family():
    with pytest.raises(ValueError):
        PolyFamily.from_strings(2, ["t3"])


def test_network_region_family_matches_path_route():
    for k in range(10):
        p, Z = smooth_instance(1100 + k, [(1, 2, 1), (2, 3, 1)][k % 2], 3)
        fam = PolyFamily.from_network(p, Z)
        Jf, Jp = family_jacobian(fam), algebraic_jacobian(p, Z)
        assert Jf.entries == Jp.entries
        assert rank_rational(Jf.evaluate(p.theta)) == rank_rational(Jp.evaluate(p.theta))
        assert r_R_rank(Jf) == r_R_rank(Jp) and r_RR_rank(Jf) == r_RR_rank(Jp)
