from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from scratch_creativity import Product, SemanticNetwork, network_metric, symbol_concept

DATA_DIR = Path(__file__).parent / "data"
SHAPES_NETWORK_FILE = DATA_DIR / "shapes_network.txt"


@pytest.fixture(scope="session")
def shapes_network() -> SemanticNetwork:
    return SemanticNetwork.from_file(SHAPES_NETWORK_FILE)


@pytest.fixture(scope="session")
def shapes_metric(shapes_network):
    return network_metric(shapes_network)


@pytest.fixture(scope="session")
def figure_product() -> Product:
    """Four triangles, one square, one circle (the stick figure)."""
    tri = symbol_concept("triangle")
    return Product.of(
        tri, tri, tri, tri, symbol_concept("square"), symbol_concept("circle")
    )


@pytest.fixture(scope="session")
def house_product() -> Product:
    return Product.of(symbol_concept("square"), symbol_concept("triangle"))
