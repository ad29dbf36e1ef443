from __future__ import annotations

import pytest

from skusearch.abbrev import load_bundled_dict
from skusearch.catalog import Catalog, SkuRecord
from skusearch.engine import EngineConfig, build_indexes

# A hand-sized catalog exercising every branch: one serial shared by several
# products, camel-case names with version digits, a record with no friendly
# name, and one part number whose serial appears nowhere else.
SMALL_RECORDS = [
    SkuRecord(0, "LF1-00018", "SrfLpt413ini7/16/512", "Surface Laptop 4 13in i7 16 512"),
    SkuRecord(1, "LF1-00021", "SrfLpt513ini5/8/256", "Surface Laptop 5 13in i5 8 256"),
    SkuRecord(2, "LF1-00044", "SrfPro915in", "Surface Pro 9 15in"),
    SkuRecord(3, "ABC-12345", "OffStdLic2", "Office Standard License 2"),
    SkuRecord(4, "ABC-54321", "OffPremLic", None),
    SkuRecord(5, "QQQ-77777", "AzVmB2s", "Azure Virtual Machine B 2 s"),
    SkuRecord(6, "LF1-00090", "SrfKbdBlk", "Surface Keyboard Black"),
]


@pytest.fixture(scope="session")
def small_catalog() -> Catalog:
    return Catalog(list(SMALL_RECORDS))


@pytest.fixture(scope="session")
def abbrev():
    return load_bundled_dict()


@pytest.fixture(scope="session")
def small_state(small_catalog, abbrev):
    return build_indexes(small_catalog, EngineConfig(), abbrev=abbrev)
