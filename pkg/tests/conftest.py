import pytest
from hypothesis import settings

from mixedkan.certify import certify
from mixedkan.presets import desk_preset, paper_preset

# the sandbox CPU is shared; wall-clock deadlines only add flakiness
settings.register_profile("repo", deadline=None, max_examples=100)
settings.load_profile("repo")

# criterion number -> (passed, detail); filled by test_acceptance
ACCEPTANCE = {}


@pytest.fixture(scope="session")
def desk_report():
    return certify(desk_preset(), cone_samples=100000)


@pytest.fixture(scope="session")
def desk(desk_report):
    rep, params = desk_report
    assert rep.passed, rep.failures()
    return params


@pytest.fixture(scope="session")
def paper_report():
    return certify(paper_preset(), cone_samples=100000)


@pytest.fixture(scope="session")
def paper(paper_report):
    rep, params = paper_report
    assert rep.passed, rep.failures()
    return params


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


# -- finite-difference oracle for the frame Jacobians -------------------------

def _frame_basis():
    import numpy as np
    from mixedkan.geometry import FRAME
    # (x-shift, y-shift, z-shift) per adapted direction uu, u, ts, s, ss
    zero = np.zeros(2)
    return [
        (FRAME.v_u, 0.0, zero),
        (zero, 0.0, FRAME.v_u),
        (zero, 1.0, zero),
        (zero, 0.0, FRAME.v_s),
        (FRAME.v_s, 0.0, zero),
    ]


def _frame_diff(p, q):
    import numpy as np
    from mixedkan.geometry import FRAME, min_translate
    dx = min_translate(p.x - q.x)
    dz = min_translate(p.z - q.z)
    dy = np.mod(p.y - q.y + 1.0, 2.0) - 1.0
    return np.stack([dx @ FRAME.v_u, dz @ FRAME.v_u, dy, dz @ FRAME.v_s, dx @ FRAME.v_s], axis=-1)


def fd_jacobian(fn, p, h=3e-6):
    """Richardson-extrapolated central differences of fn in the adapted frame,
    shape (n, 5, 5); columns are input directions. The step balances rounding
    (outputs reach sigma1 ~ 3e2) against truncation on the delta-scale bumps."""
    import numpy as np
    from mixedkan.system import MPoint

    def shifted(j, t):
        dx, dy, dz = _frame_basis()[j]
        return fn(MPoint(p.x + t * dx, p.y + t * dy, p.z + t * dz))

    cols = []
    for j in range(5):
        d1 = _frame_diff(shifted(j, h), shifted(j, -h)) / (2 * h)
        d2 = _frame_diff(shifted(j, h / 2), shifted(j, -h / 2)) / h
        cols.append((4 * d2 - d1) / 3)
    return np.stack(cols, axis=-1)


def jacobian_rel_error(J, F):
    """Entrywise error relative to max(|entry|, 1), maximised per point."""
    import numpy as np
    return np.max(np.abs(J - F) / np.maximum(np.abs(J), 1.0), axis=(-2, -1))
