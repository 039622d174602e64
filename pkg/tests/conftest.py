from __future__ import annotations

from pathlib import Path

import pytest

import querysketch.lang as L
from querysketch import load_database
from querysketch.scoring import precompute_theta

DATA_DIR = Path(__file__).resolve().parent.parent / "data" / "pubs"


@pytest.fixture(scope="session")
def pubs_catalog():
    return load_database(DATA_DIR / "schema.json", DATA_DIR)


@pytest.fixture(scope="session")
def pubs_sketch_text():
    return (DATA_DIR / "sketch.txt").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def pubs_gt_text():
    return (DATA_DIR / "ground_truth.txt").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def pubs_sketch(pubs_catalog, pubs_sketch_text):
    return L.parse_sketch(pubs_sketch_text, pubs_catalog)


@pytest.fixture(scope="session")
def pubs_gt(pubs_catalog, pubs_gt_text):
    return L.parse_sketch(pubs_gt_text, pubs_catalog)


@pytest.fixture(scope="session")
def pubs_theta(pubs_sketch, pubs_catalog):
    return precompute_theta(pubs_sketch, pubs_catalog)
