"""Seeded generation: determinism and structural validity."""

from fractions import Fraction

import pytest

from mwbs.errors import FormatError
from mwbs.generate import GenParams, gen_instance, planted_star_instance
from mwbs.plane import encode_instance


def test_single_vertex():
    inst = gen_instance(GenParams(n=1, seed=0))
    assert inst.graph.vertex_count == 1
    assert inst.graph.edge_count == 0


def test_triangle():
    inst = gen_instance(GenParams(n=3, seed=0))
    g = inst.graph
    assert g.edge_count == 3
    assert len(g.faces) == 2   # V - E + F = 3 - 3 + 2


def test_triangulation_edge_count():
    for n in (4, 7, 12):
        inst = gen_instance(GenParams(n=n, seed=5))
        assert inst.graph.edge_count == 3 * n - 6


def test_deterministic_documents():
    params = GenParams(n=9, seed=42, density="sparse", sparse_p=Fraction(1, 3),
                       orientation_bias=Fraction(2, 7))
    a = encode_instance(gen_instance(params))
    b = encode_instance(gen_instance(params))
    assert a == b
    other = encode_instance(gen_instance(GenParams(n=9, seed=43,
                                                   density="sparse",
                                                   sparse_p=Fraction(1, 3))))
    assert a != other


def test_sparse_stays_connected():
    for seed in range(25):
        inst = gen_instance(GenParams(n=8, seed=seed, density="sparse",
                                      sparse_p=Fraction(1, 4)))
        assert inst.graph.is_connected()


def test_weights_in_range():
    params = GenParams(n=7, seed=3, weight_lo=Fraction(1, 2), weight_hi=Fraction(3))
    inst = gen_instance(params)
    assert all(Fraction(1, 2) <= w <= 3 for w in inst.weights)


def test_invalid_params():
    with pytest.raises(FormatError):
        gen_instance(GenParams(n=0, seed=1))
    with pytest.raises(FormatError):
        gen_instance(GenParams(n=3, seed=1, orientation_bias=Fraction(3, 2)))
    with pytest.raises(FormatError):
        gen_instance(GenParams(n=3, seed=1, weight_lo=Fraction(0)))


def test_planted_bad_vertex_count():
    inst = planted_star_instance(120, 9, 5)
    assert len(inst.graph.bad_vertices()) == 5
    # the host without the planted centers stays a tree (connected, n-1 edges)
    assert inst.graph.edge_count == inst.graph.vertex_count - 1
    assert inst.graph.is_connected()
