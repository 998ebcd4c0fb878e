import pytest

from surfreal.formats import load_catalog


@pytest.fixture(scope="session")
def catalog():
    return {e.name: e.triangulation for e in load_catalog()}


@pytest.fixture(scope="session")
def tetra(catalog):
    return catalog["tetrahedron"]


@pytest.fixture(scope="session")
def octa(catalog):
    return catalog["octahedron"]


@pytest.fixture(scope="session")
def torus(catalog):
    return catalog["torus_7"]


@pytest.fixture(scope="session")
def genus3(catalog):
    return [t for name, t in catalog.items() if "_g3_" in name]


UNIT_SIMPLEX = [(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)]


@pytest.fixture(scope="session")
def g3_witness(genus3):
    """A valid embedding of the first genus-3 entry, found by the annealer on
    a roomy grid."""
    from surfreal.anneal import Schedule, anneal

    for seed in range(100):
        res = anneal(genus3[0], 16, Schedule(max_moves=300_000), seed=seed)
        if res.success:
            return res
    raise RuntimeError("no witness found")


# (criterion number, title, passed, detail) recorded by test_acceptance.py
ACCEPTANCE: list[tuple[int, str, str, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num, title, verdict, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"[{verdict}] {num:>2}. {title}: {detail}")
