import functools

import numpy as np
import pytest

from symspec.analysis import analyze
from symspec.model import Element, Material, Node, TrussModel
from symspec.presets import load_preset


@functools.lru_cache(maxsize=None)
def cached_preset(name):
    return load_preset(name)


@functools.lru_cache(maxsize=None)
def cached_analysis(name):
    return analyze(cached_preset(name))


@pytest.fixture
def preset():
    return cached_preset


@pytest.fixture
def analysis():
    return cached_analysis


def small_truss(n_free_node=1, extra_dof=False, areas=(100.0, 120.0, 140.0, 160.0)):
    """One free node tied to four pinned supports; optionally a roller with one free dof."""
    sup = [(0.0, 0.0, 0.0), (2.0, 0.1, 0.0), (0.3, 1.7, 0.2), (0.4, 0.2, 1.9)]
    free = (0.9, 0.7, 0.8)
    nodes = [Node(1, free)]
    nodes += [Node(i + 2, p, (True, True, True)) for i, p in enumerate(sup)]
    elements = [Element(i + 1, (1, i + 2), i + 1) for i in range(4)]
    groups = [(i + 1, f"x{i + 1}", a) for i, a in enumerate(areas)]
    if extra_dof:
        # node 6 slides along x only, braced to node 1 and node 3
        nodes.append(Node(6, (2.3, 1.1, 0.6), (False, True, True)))
        elements += [Element(5, (1, 6), 5), Element(6, (3, 6), 6)]
        groups += [(5, "x5", 90.0), (6, "x6", 110.0)]
    return TrussModel.build(nodes, elements, Material(100.0, 0.5), groups)


@pytest.fixture
def tiny():
    return small_truss


def rel_err(a, b, floor=1.0):
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return float(np.max(np.abs(a - b) / np.maximum(np.maximum(np.abs(a), np.abs(b)), floor)))
