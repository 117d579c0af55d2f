import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from flowqubo.qubo import MAX_BRUTE_FORCE_VARS, QuboProblem, brute_force_min, energy


def test_add_term_diagonal_folds_into_linear():
    p = QuboProblem(2)
    p.add_term({0}, 0.0)
    p.add_term((0, 0), 2.0)
    assert p.linear[0] == 2.0
    assert p.quadratic == {}


def test_add_term_canonical_order():
    p = QuboProblem(2)
    p.add_term((1, 0), 1.5)
    assert p.quadratic == {(0, 1): 1.5}


def test_add_term_offset():
    p = QuboProblem(2)
    p.add_term((), -3.0)
    assert p.offset == -3.0


def test_add_term_errors():
    p = QuboProblem(2)
    with pytest.raises(ValueError):
        p.add_term((0, 2), 1.0)
    with pytest.raises(ValueError):
        p.add_term((0, 1, 1), 1.0)
    with pytest.raises(ValueError):
        p.add_term((-1,), 1.0)


def test_duplicates_accumulate():
    p = QuboProblem(3)
    p.add_term((0, 2), 1.0)
    p.add_term((2, 0), 0.5)
    p.add_quadratic([0, 1], [2, 1], [1.0, 4.0])
    assert p.quadratic == {(0, 2): 2.5}
    assert p.linear[1] == 4.0


def test_energy_examples():
    assert energy(QuboProblem(3), [1, 0, 1]) == 0.0
    p = QuboProblem(1)
    p.add_term((0,), 2.0)
    assert energy(p, [1]) == 2.0
    p = QuboProblem(2)
    p.add_term((), 1.0)
    p.add_term((0, 1), -4.0)
    assert energy(p, [1, 1]) == -3.0


def test_energy_rejects_bad_assignments():
    p = QuboProblem(2)
    with pytest.raises(ValueError):
        energy(p, [1])
    with pytest.raises(ValueError):
        energy(p, [1, 2])


def test_brute_force_examples():
    p = QuboProblem(1)
    p.add_term((0,), -1.0)
    q, e = brute_force_min(p)
    assert q.tolist() == [1] and e == -1.0

    p = QuboProblem(2)
    p.add_term((0,), 1.0)
    p.add_term((1,), 1.0)
    p.add_term((0, 1), -3.0)
    q, e = brute_force_min(p)
    assert q.tolist() == [1, 1] and e == -1.0

    q, e = brute_force_min(QuboProblem(3))
    assert q.tolist() == [0, 0, 0] and e == 0.0


def test_brute_force_tie_break_lowest_integer():
    # (1,0) has integer value 1, (0,1) has 2
    p = QuboProblem(2)
    p.add_term((0,), -1.0)
    p.add_term((1,), -1.0)
    p.add_term((0, 1), 5.0)
    q, _ = brute_force_min(p)
    assert q.tolist() == [1, 0]


def test_brute_force_matches_enumeration(rng):
    p = QuboProblem(5)
    p.add_linear(np.arange(5), rng.normal(size=5))
    i, j = np.triu_indices(5, 1)
    p.add_quadratic(i, j, rng.normal(size=i.size))
    energies = {bits: energy(p, bits) for bits in itertools.product([0, 1], repeat=5)}
    q, e = brute_force_min(p, chunk_bits=2)
    assert e == pytest.approx(min(energies.values()), abs=1e-12)


def test_brute_force_size_guard():
    with pytest.raises(ValueError, match="limit"):
        brute_force_min(QuboProblem(MAX_BRUTE_FORCE_VARS + 1))


def test_text_roundtrip(tmp_path, rng):
    p = QuboProblem(4)
    p.offset = -0.25
    p.add_linear([0, 3], [1.5, -2.0])
    p.add_quadratic([0, 1], [2, 3], rng.normal(size=2))
    p.save(tmp_path / "p.txt")
    r = QuboProblem.load(tmp_path / "p.txt")
    assert r.offset == p.offset
    np.testing.assert_array_equal(r.linear, p.linear)
    assert r.quadratic == p.quadratic
    assert r.to_text() == p.to_text()


def test_copy_is_independent():
    p = QuboProblem(3)
    p.add_term((0, 1), 1.0)
    c = p.copy()
    c.add_term((0, 1), 1.0)
    c.add_term((1, 2), 2.0)
    assert p.quadratic == {(0, 1): 1.0}
    assert c.quadratic == {(0, 1): 2.0, (1, 2): 2.0}


def test_merge_requires_same_size():
    with pytest.raises(ValueError):
        QuboProblem(2).add_problem(QuboProblem(3))


@st.composite
def problems(draw, n_max=8):
    n = draw(st.integers(1, n_max))
    coeff = st.floats(-10, 10, allow_nan=False)
    terms = draw(st.lists(st.tuples(st.sets(st.integers(0, n - 1), max_size=2), coeff), max_size=25))
    return n, terms


def _build(n, terms):
    p = QuboProblem(n)
    for vs, c in terms:
        p.add_term(sorted(vs), c)
    return p


@settings(max_examples=60, deadline=None)
@given(problems(), st.integers(0, 2**32 - 1))
def test_brute_force_is_lower_bound(case, seed):
    n, terms = case
    p = _build(n, terms)
    _, best = brute_force_min(p)
    qs = np.random.default_rng(seed).integers(0, 2, size=(1000, n))
    assert all(best <= energy(p, q) + 1e-9 for q in qs)


@settings(max_examples=60, deadline=None)
@given(problems(), st.data())
def test_energy_linear_in_coefficients(case, data):
    n, terms = case
    cut = data.draw(st.integers(0, len(terms)))
    a, b = _build(n, terms[:cut]), _build(n, terms[cut:])
    q = data.draw(st.lists(st.integers(0, 1), min_size=n, max_size=n))
    assert energy(a + b, q) == pytest.approx(energy(a, q) + energy(b, q), abs=1e-9)
    assert energy(a + b, q) == pytest.approx(energy(_build(n, terms), q), abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(problems(), st.randoms(use_true_random=False), st.data())
def test_insertion_order_irrelevant(case, rnd, data):
    n, terms = case
    shuffled = list(terms)
    rnd.shuffle(shuffled)
    q = data.draw(st.lists(st.integers(0, 1), min_size=n, max_size=n))
    a, b = _build(n, terms), _build(n, shuffled)
    assert energy(a, q) == pytest.approx(energy(b, q), abs=1e-9)
    assert a.quadratic.keys() == b.quadratic.keys()
    assert all(i < j for i, j in a.quadratic)
