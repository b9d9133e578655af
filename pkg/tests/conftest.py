"""Shared generators for randomized suites (seeded, deterministic)."""

from __future__ import annotations

import numpy as np
import pytest

import dcgridcert as dc


def random_connected_graph(rng: np.random.Generator, max_buses: int = 12,
                           max_edges: int = 20) -> dc.NetworkGraph:
    """Random spanning tree plus random extra edges, random orientations."""
    n = int(rng.integers(2, max_buses + 1))
    edges = []
    for j in range(1, n):
        other = int(rng.integers(0, j))
        edges.append((j, other) if rng.random() < 0.5 else (other, j))
    n_extra = int(rng.integers(0, max(1, max_edges - len(edges)) + 1))
    for _ in range(n_extra):
        a, b = rng.choice(n, size=2, replace=False)
        edges.append((int(a), int(b)))
        if len(edges) >= max_edges:
            break
    return dc.NetworkGraph(n, tuple(edges))


def random_tree_or_ring(rng: np.random.Generator, n_buses: int) -> dc.NetworkGraph:
    if n_buses >= 3 and rng.random() < 0.5:
        edges = [(j, (j + 1) % n_buses) for j in range(n_buses)]
    else:
        edges = []
        for j in range(1, n_buses):
            other = int(rng.integers(0, j))
            edges.append((other, j))
    flipped = [(b, a) if rng.random() < 0.5 else (a, b) for a, b in edges]
    return dc.NetworkGraph(n_buses, tuple(flipped))


def random_stable_bus_tf(rng: np.random.Generator, order_lo: int = 2,
                         order_hi: int = 4) -> dc.RationalTransfer:
    """Random strictly stable transfer, moderate gain, poles spread over the sweep range."""
    order = int(rng.integers(order_lo, order_hi + 1))
    poles = []
    while len(poles) < order:
        wn = 10.0 ** rng.uniform(0.0, 4.0)
        if rng.random() < 0.5 or order - len(poles) == 1:
            poles.append(-wn)
        else:
            zeta = rng.uniform(0.2, 0.9)
            re = -zeta * wn
            im = wn * np.sqrt(1.0 - zeta**2)
            poles.extend([complex(re, im), complex(re, -im)])
    poles = poles[:order]
    if len(poles) < order or (order - len(poles)) % 2:
        poles = poles[:order - 1] + [-(10.0 ** rng.uniform(0.0, 4.0))]
    den = np.real(np.poly(poles))[::-1]  # ascending
    n_zeros = int(rng.integers(0, order))
    zeros = [-(10.0 ** rng.uniform(0.0, 4.0)) for _ in range(n_zeros)]
    num = np.real(np.poly(zeros))[::-1] if zeros else np.array([1.0])
    gain = rng.uniform(0.2, 3.0) * rng.choice([-1.0, 1.0])
    # normalize DC-ish magnitude so instances are not wildly scaled
    num = num * gain * abs(den[0]) / max(abs(num[0]), 1e-9)
    return dc.RationalTransfer(num, den)


def random_rl_lines(rng: np.random.Generator, n_edges: int) -> tuple:
    lines = []
    for _ in range(n_edges):
        r = 10.0 ** rng.uniform(-2.0, 0.0)
        l = 10.0 ** rng.uniform(-5.0, -2.0)
        lines.append(dc.build_line("rl", r=r, l=l))
    return tuple(lines)


def random_transfer_network(rng: np.random.Generator, n_lo: int = 2, n_hi: int = 6) -> dc.NetworkSpec:
    """Random RH-infinity instance: tree/ring topology, stable transfer buses, RL lines."""
    n = int(rng.integers(n_lo, n_hi + 1))
    graph = random_tree_or_ring(rng, n)
    buses = tuple(dc.TransferBus(random_stable_bus_tf(rng)) for _ in range(n))
    lines = random_rl_lines(rng, graph.n_edges)
    return dc.NetworkSpec(graph, buses, lines)


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)
