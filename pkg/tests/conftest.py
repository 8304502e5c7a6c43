import numpy as np
import pytest

from fdops.executor import PointSource, WaveProblem, damp_mask, ricker_wavelet
from fdops.symbolic import Grid


def smooth_velocity(shape, seed, lo=1500.0, hi=2500.0):
    """Random but smooth velocity model: a few low-frequency cosines."""
    rng = np.random.default_rng(seed)
    axes = np.meshgrid(*[np.linspace(0.0, 1.0, n) for n in shape], indexing="ij")
    field = np.zeros(shape)
    for _ in range(3):
        k = rng.uniform(0.5, 2.0, size=len(shape))
        phase = rng.uniform(0, 2 * np.pi)
        field += np.cos(2 * np.pi * sum(ki * a for ki, a in zip(k, axes)) + phase)
    field = (field - field.min()) / (np.ptp(field) or 1.0)
    return lo + (hi - lo) * field


def make_wave(shape=(16, 16, 16), steps=50, space_order=2, velocity=1500.0, spacing=None,
              damp_width=0, frequency=15.0, source=None):
    grid = Grid(shape, spacing or (10.0,) * len(shape))
    probe = WaveProblem(grid, velocity, steps, space_order=space_order)
    src = source or tuple(n // 2 for n in shape)
    damp = None
    if damp_width:
        damp = damp_mask(grid, space_order // 2, damp_width, 0.05)
    return WaveProblem(grid, velocity, steps,
                       PointSource(src, ricker_wavelet(frequency, probe.dt, steps)),
                       probe.dt, damp, space_order)


# -- acceptance report -----------------------------------------------------------------

_ACCEPTANCE = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label, title): acceptance criterion check")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker and (report.when == "call" or (report.when == "setup" and report.failed)):
        label, title = marker.args
        _ACCEPTANCE.append((label, title, report.passed))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label, title, passed in sorted(_ACCEPTANCE):
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  [{label}] {title}")
