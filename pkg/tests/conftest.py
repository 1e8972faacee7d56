"""Shared fixtures and the per-criterion acceptance report."""
import time
from collections import OrderedDict

import pytest

from grcsolve import GridSpec, gen_convection_diffusion

CRITERIA = OrderedDict([
    (1, "generator exactness (reference grid sizes and nnz)"),
    (2, "GRC matches CR on symmetric systems"),
    (3, "residual-mode GRC(L=2) iterates match CR"),
    (4, "cost contract: matvec/dot/peak-vector counters"),
    (5, "untruncated GRC matches the full minimal-residual oracle"),
    (6, "small-grid convection-diffusion behaviour (RC flat, GRC/GMRES converge)"),
    (7, "invariant property suites"),
])

_outcomes = {k: [] for k in CRITERIA}
_durations = {k: 0.0 for k in CRITERIA}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion the test certifies")


def _criterion_of(item):
    mark = item.get_closest_marker("criterion")
    return mark.args[0] if mark else None


def pytest_collection_modifyitems(items):
    for item in items:
        k = _criterion_of(item)
        if k is not None:
            item.user_properties.append(("criterion", k))


def pytest_runtest_logreport(report):
    k = dict(report.user_properties).get("criterion")
    if k is None:
        return
    if report.when == "call" or report.outcome != "passed":
        _outcomes[k].append((report.nodeid, report.outcome))
    _durations[k] += report.duration


def pytest_terminal_summary(terminalreporter):
    if not any(_outcomes.values()):
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for k, label in CRITERIA.items():
        results = _outcomes[k]
        if not results:
            tr.write_line(f"criterion {k}: NOT RUN  {label}")
            continue
        failed = [nid for nid, out in results if out == "failed"]
        skipped = sum(out == "skipped" for _, out in results)
        verdict = "FAIL" if failed else "PASS"
        extra = f", {skipped} skipped" if skipped else ""
        tr.write_line(f"criterion {k}: {verdict}  {label}  "
                      f"[{len(results) - skipped} run{extra}, {_durations[k]:.1f}s]")
        for nid in failed:
            tr.write_line(f"    failed: {nid}")


@pytest.fixture(scope="session")
def conv_diff_20():
    """Convection-diffusion test instance (n=20, c=1000)."""
    t0 = time.perf_counter()
    A, b = gen_convection_diffusion(GridSpec(n=20))
    assert time.perf_counter() - t0 < 10.0
    return A, b
