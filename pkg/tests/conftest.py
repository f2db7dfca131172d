import pytest

from mvlattice import build, build_lattice, chain, load_fixture
from mvlattice.lattice import boolean


def _fixture_lattice(name):
    return build(load_fixture(name)).lattice(name)


def small_lattices():
    """Named small lattices used across the suites."""
    return {
        "2-chain": chain(["0", "1"], name="2-chain"),
        "3-chain": chain(["0", "a", "1"], name="3-chain"),
        "diamond": build_lattice(
            ["0", "x", "y", "1"], [("0", "x"), ("0", "y"), ("x", "1"), ("y", "1")],
            "meet", name="diamond",
        ),
        "N5": build_lattice(
            ["0", "a", "b", "c", "1"], [("0", "a"), ("a", "b"), ("b", "1"), ("0", "c"), ("c", "1")],
            name="N5",
        ),
        "M3": build_lattice(
            ["0", "p", "q", "s", "1"],
            [("0", "p"), ("0", "q"), ("0", "s"), ("p", "1"), ("q", "1"), ("s", "1")],
            name="M3",
        ),
        "2^3": boolean(["p", "q", "s"], name="2^3"),
        "L1": _fixture_lattice("L1"),
        "L2": _fixture_lattice("L2"),
        "L": _fixture_lattice("L"),
        "M": _fixture_lattice("M"),
    }


LATTICES = small_lattices()


@pytest.fixture(scope="session")
def lattices():
    return LATTICES


@pytest.fixture(scope="session")
def L():
    return LATTICES["L"]


@pytest.fixture(scope="session")
def M():
    return LATTICES["M"]


@pytest.fixture(scope="session")
def diamond():
    return LATTICES["diamond"]


@pytest.fixture(scope="session")
def hybrid():
    return build(load_fixture("hybrid-energy-map")).map()
