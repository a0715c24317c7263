import json
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vqefactor.instance import (
    FactoringInstance,
    bit_length_p,
    decode,
    encode,
    enumerate_instances,
    factor_trial,
    make_benchmark_instance,
    make_instance,
    solution_labels,
    with_factors,
)

# (p, q, n, N) rows of the paper's table of largest n per qubit count
TABLE_I = [
    (3, 5, 15, 3),
    (3, 7, 21, 5),
    (3, 19, 57, 6),
    (3, 41, 123, 8),
    (11, 23, 253, 9),
    (7, 73, 511, 11),
    (3, 337, 1011, 12),
    (23, 89, 2047, 14),
    (61, 67, 4087, 15),
    (19, 431, 8189, 17),
    (11, 1489, 16379, 18),
    (137, 239, 32743, 20),
    (109, 601, 65509, 21),
    (53, 2473, 131069, 23),
    (349, 751, 262099, 24),
    (269, 1949, 524281, 26),
    (911, 1151, 1048561, 27),
]


@pytest.mark.parametrize(
    "n,B,Np,Nq,N",
    [(15, 4, 2, 3, 3), (253, 8, 4, 7, 9), (9, 4, 2, 3, 3)],
)
def test_make_instance_layouts(n, B, Np, Nq, N):
    inst = make_instance(n)
    assert (inst.B, inst.Np, inst.Nq, inst.N) == (B, Np, Nq, N)
    assert inst.p_true is None and inst.q_true is None


def test_make_instance_largest_table_row():
    assert make_instance(1048561).N == 27


@pytest.mark.parametrize("bad", [8, 10, 7, 1, -3, 0])
def test_make_instance_rejects(bad):
    with pytest.raises(ValueError):
        make_instance(bad)


@pytest.mark.parametrize("p,q,n,N", TABLE_I)
def test_table_rows(p, q, n, N):
    inst = make_benchmark_instance(n)
    assert (inst.p_true, inst.q_true, inst.N) == (p, q, N)
    assert inst.B == n.bit_length()
    assert inst.Nq == inst.B - 1


def test_decode_paper_example():
    inst = make_instance(15, n_p=4, n_q=4)
    assert decode(inst, "010001") == (5, 3)


def test_decode_examples_n15():
    inst = make_instance(15)
    assert decode(inst, "000") == (1, 1)
    assert decode(inst, "110") == (3, 5)
    assert 3 * 5 == 15


def test_decode_rejects_bad_length():
    inst = make_instance(15)
    with pytest.raises(ValueError):
        decode(inst, "01")
    with pytest.raises(ValueError):
        decode(inst, "0a1")


def test_encode_examples():
    inst = make_instance(15)
    assert encode(inst, 3, 5) == "110"
    assert encode(inst, 1, 1) == "000"


def test_encode_253_matches_brute_force_zero():
    inst = make_instance(253)
    zeros = [format(i, "09b") for i in range(512) if (253 - math.prod(decode(inst, format(i, "09b")))) == 0]
    assert zeros == [encode(inst, 11, 23)]


@pytest.mark.parametrize("p,q", [(2, 3), (3, 4), (5, 3), (3, 17)])
def test_encode_rejects(p, q):
    inst = make_instance(15)
    with pytest.raises(ValueError):
        encode(inst, p, q)


def test_solution_labels():
    assert solution_labels(make_benchmark_instance(15)) == {"110"}
    assert len(solution_labels(make_benchmark_instance(9))) == 1
    inst = make_benchmark_instance(21)
    assert inst.Np == 3
    assert solution_labels(inst) == {encode(inst, 3, 7), encode(inst, 7, 3)}
    assert inst.degenerate
    # 67 does not fit the 6-bit p register, so only one ordering is reachable
    inst = make_benchmark_instance(4087)
    assert solution_labels(inst) == {encode(inst, 61, 67)}
    assert not inst.degenerate


def test_solution_labels_requires_factors():
    with pytest.raises(ValueError):
        solution_labels(make_instance(15))


def _brute_force_instances(N, squares):
    out = []
    for n in range(9, 1 << (N + 3), 2):
        if make_instance(n).N != N:
            continue
        pq = factor_trial(n)
        if pq is not None and (squares or pq[0] != pq[1]):
            out.append(n)
    return out


def test_enumerate_small():
    assert [i.n for i in enumerate_instances(3, include_squares=True)] == [9, 15]
    assert [i.n for i in enumerate_instances(3)] == [15]
    assert max(i.n for i in enumerate_instances(5)) == 21
    assert max(i.n for i in enumerate_instances(5, include_squares=True)) == 25
    assert enumerate_instances(4) == []


@pytest.mark.parametrize("squares", [False, True])
@pytest.mark.parametrize("N", [3, 5, 6, 8, 9, 11])
def test_enumerate_matches_brute_force(N, squares):
    got = [i.n for i in enumerate_instances(N, include_squares=squares)]
    assert got == _brute_force_instances(N, squares)


def test_enumerate_20():
    insts = enumerate_instances(20)
    ns = [i.n for i in insts]
    assert 32743 in ns
    # the table's 32743 is not the largest: these also need exactly 20 qubits
    assert [n for n in ns if n > 32743] == [32753, 32755, 32765]
    assert all(a.n < b.n for a, b in zip(insts, insts[1:]))
    assert all(i.p_true * i.q_true == i.n and i.N == 20 for i in insts)


@pytest.mark.parametrize("N", range(3, 16))
def test_enumerate_max_matches_table(N):
    table = {row[3]: row[2] for row in TABLE_I}
    insts = enumerate_instances(N)
    if N in table:
        assert insts[-1].n == table[N]
    else:
        assert insts == []


@pytest.mark.parametrize("N", range(3, 13))
def test_encode_decode_exhaustive(N):
    for inst in enumerate_instances(N)[:3]:
        for i in range(1 << N):
            label = format(i, f"0{N}b")
            p, q = decode(inst, label)
            assert p % 2 == 1 and q % 2 == 1
            assert encode(inst, p, q) == label


@settings(max_examples=200, deadline=None)
@given(st.integers(min_value=4, max_value=40).flatmap(lambda b: st.integers(2 ** (b - 1) + 1, 2**b - 1)))
def test_decode_encode_roundtrip(n):
    n |= 1
    inst = make_instance(n)
    rng = np.random.default_rng(n)
    p = int(rng.integers(0, 1 << (inst.Np - 1))) * 2 + 1
    q = int(rng.integers(0, 1 << (inst.Nq - 1))) * 2 + 1
    assert decode(inst, encode(inst, p, q)) == (p, q)


def test_bit_length_p_against_high_precision():
    mpmath.mp.dps = 60
    rng = np.random.default_rng(2024)
    samples = rng.integers(4, 1 << 39, size=100_000) * 2 + 1
    for n in samples.tolist():
        expected = int(mpmath.ceil(mpmath.log(mpmath.sqrt(n), 2)))
        assert bit_length_p(n) == expected, n


def test_bit_length_p_near_powers_of_two():
    mpmath.mp.dps = 60
    for k in range(2, 40):
        for n in (4**k - 1, 4**k + 1, (2**k + 1) ** 2, (2**k - 1) ** 2):
            if n % 2 == 1:
                assert bit_length_p(n) == int(mpmath.ceil(mpmath.log(mpmath.sqrt(n), 2)))


def test_json_roundtrip():
    inst = make_benchmark_instance(253)
    data = json.loads(json.dumps(inst.to_json()))
    assert data == {"n": 253, "p": 11, "q": 23, "B": 8, "Np": 4, "Nq": 7, "N": 9}
    assert FactoringInstance.from_json(data) == inst


def test_with_factors_validation():
    inst = make_instance(15)
    with pytest.raises(ValueError):
        with_factors(inst, 1, 15)
    with pytest.raises(ValueError):
        with_factors(inst, 3, 7)
    assert with_factors(inst, 5, 3).p_true == 3
