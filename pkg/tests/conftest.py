from __future__ import annotations

from typing import TYPE_CHECKING

import pytest

from bounded_powers.catalog import Catalog

if TYPE_CHECKING:
    from bounded_powers.groups import FiniteGroup


@pytest.fixture(scope="session")
def catalog() -> Catalog:
    return Catalog()


@pytest.fixture
def s3(catalog: Catalog) -> FiniteGroup:
    return catalog.group("S3")


@pytest.fixture
def s4(catalog: Catalog) -> FiniteGroup:
    return catalog.group("S4")


@pytest.fixture
def a5(catalog: Catalog) -> FiniteGroup:
    return catalog.group("A5")


@pytest.fixture
def q8(catalog: Catalog) -> FiniteGroup:
    return catalog.group("Q8")
