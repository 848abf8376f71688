import pytest

from permchains.bias import CywSpec
from permchains.trees import LeagueTree, leaf, node


@pytest.fixture(scope="session")
def demo_tree() -> LeagueTree:
    """Nine-player league tree: two leagues with nested tiers."""
    return LeagueTree(
        node(
            "0.9",
            node("0.8", node("0.6", leaf(1), node("0.5", leaf(2), leaf(3))), leaf(4)),
            node(
                "0.7",
                node("0.7", leaf(5), leaf(6)),
                node("0.6", node("0.5", leaf(7), leaf(8)), leaf(9)),
            ),
        )
    )


def cyw_spec(n: int) -> CywSpec:
    base = ("0.6", "0.7", "0.8", "0.9", "0.75", "0.65", "0.85")
    return CywSpec(r=base[: n - 1])


@pytest.fixture
def cyw4() -> CywSpec:
    return cyw_spec(4)


@pytest.fixture
def cyw5() -> CywSpec:
    return cyw_spec(5)
