"""End-to-end chain: scene -> paths -> CIR -> differential CIR -> heatmap."""
from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from radsense.channel import (CirTaps, SampledCir, add_noise, assemble_cir, noise_variance,
                              sample_bandlimited)
from radsense.raytrace import Geometry, PropagationPath, enumerate_paths
from radsense.scene import Node, Scenario, expand_geometry, reference_scene
from radsense.sensing import Heatmap, ellipse_layer, fuse, subtract

# Noise stream tags; each (tag, link) pair gets its own generator.
OBSERVED, REFERENCE, EMPTY_A, EMPTY_B = range(4)


@dataclass(frozen=True)
class LinkResult:
    tx: Node
    rx: Node
    paths: tuple[PropagationPath, ...]
    taps: CirTaps
    cir: SampledCir


@dataclass(frozen=True)
class SensingResult:
    observed: dict
    reference: dict
    layers: tuple[Heatmap, ...]
    heatmap: Heatmap


def node_pairs(scenario: Scenario) -> list[tuple[Node, Node]]:
    """Unordered bistatic pairs, lower id as transmitter, sorted by (tx_id, rx_id)."""
    nodes = sorted(scenario.nodes, key=lambda n: n.id)
    return list(itertools.combinations(nodes, 2))


def _map(fn, items, workers: int):
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def simulate_links(scenario: Scenario, max_order: int | None = None, workers: int = 1,
                   noise_dbm: float | None = None, seed: int = 0,
                   stream: int = OBSERVED) -> dict[tuple[str, str], LinkResult]:
    """Trace and sample every node pair of ``scenario``."""
    if max_order is None:
        max_order = scenario.radio.max_reflection_order
    radio = scenario.radio
    geometry = Geometry(expand_geometry(scenario))
    geometry.sequences(max_order)  # build once, before threads share it
    pairs = node_pairs(scenario)

    def one(item):
        index, (tx, rx) = item
        paths = enumerate_paths(geometry, tx, rx, max_order)
        taps = assemble_cir(paths, radio, tx.id, rx.id)
        cir = sample_bandlimited(taps, radio)
        if noise_dbm is not None:
            rng = np.random.default_rng([seed, stream, index])
            cir = add_noise(cir, noise_variance(noise_dbm, radio), rng)
        return LinkResult(tx, rx, tuple(paths), taps, cir)

    results = _map(one, list(enumerate(pairs)), workers)
    return {(r.tx.id, r.rx.id): r for r in results}


def build_heatmap(observed: dict, reference: dict, scenario: Scenario,
                  sigma: float | None = None, workers: int = 1) -> tuple[tuple[Heatmap, ...], Heatmap]:
    def one(key):
        o, r = observed[key], reference[key]
        return ellipse_layer(subtract(o.cir, r.cir), o.tx, o.rx, scenario.grid, sigma)

    layers = tuple(_map(one, sorted(observed), workers))
    return layers, fuse(layers)


def run_sensing(scenario: Scenario, max_order: int | None = None, workers: int = 1,
                noise_dbm: float | None = None, seed: int = 0,
                sigma: float | None = None) -> SensingResult:
    """Observed scene against its auto-derived empty reference."""
    observed = simulate_links(scenario, max_order, workers, noise_dbm, seed, OBSERVED)
    reference = simulate_links(reference_scene(scenario), max_order, workers, noise_dbm, seed, REFERENCE)
    layers, heatmap = build_heatmap(observed, reference, scenario, sigma, workers)
    return SensingResult(observed, reference, layers, heatmap)


def empty_scene_heatmap(scenario: Scenario, max_order: int | None = None, workers: int = 1,
                        noise_dbm: float | None = None, seed: int = 0,
                        sigma: float | None = None) -> Heatmap:
    """Reference scene against itself (two independent noise draws if noisy)."""
    ref = reference_scene(scenario)
    a = simulate_links(ref, max_order, workers, noise_dbm, seed, EMPTY_A)
    if noise_dbm is None:
        b = a
    else:
        b = simulate_links(ref, max_order, workers, noise_dbm, seed, EMPTY_B)
    return build_heatmap(a, b, scenario, sigma, workers)[1]
