import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from radsense import _kernels  # noqa: E402
from radsense.scene import (DEFAULT_MATERIALS, Grid, Node, RadioModel, Scenario,  # noqa: E402
                            Surface)

ACCEPTANCE_RESULTS: list[tuple[str, bool, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")


KERNEL_NAMES = ("trace_sequences", "occluded_segments", "sinc_sample", "ellipse_accumulate")


@pytest.fixture(params=_kernels.BACKENDS)
def backend(request, monkeypatch):
    """Route every library call through one kernel implementation."""
    impl = _kernels.get_backend(request.param)
    for name in KERNEL_NAMES:
        monkeypatch.setattr(_kernels, name, getattr(impl, name))
    return impl


CONCRETE, GLASS, METAL = DEFAULT_MATERIALS


def rect(x0, x1, y0, y1, z0, z1, material=CONCRETE, name=""):
    """Axis-aligned rectangle; exactly one of the three ranges must be degenerate."""
    if x0 == x1:
        v = ((x0, y0, z0), (x0, y1, z0), (x0, y1, z1), (x0, y0, z1))
    elif y0 == y1:
        v = ((x0, y0, z0), (x1, y0, z0), (x1, y0, z1), (x0, y0, z1))
    else:
        v = ((x0, y0, z0), (x1, y0, z0), (x1, y1, z0), (x0, y1, z0))
    return Surface(tuple(tuple(float(c) for c in p) for p in v), material, name=name)


def small_scenario(nodes=((0.0, 0.0, 1.0), (4.0, 0.0, 1.0)), surfaces=(), targets=(), lots=(),
                   radio=None, grid=None):
    radio = radio or RadioModel(26e9, 400e6, 22.0)
    grid = grid or Grid((-2.0, -4.0), 0.1, 80, 80, 1.0)
    return Scenario(radio=radio, grid=grid,
                    nodes=tuple(Node(f"n{i}", tuple(p)) for i, p in enumerate(nodes)),
                    surfaces=tuple(surfaces), targets=tuple(targets), lots=tuple(lots))
