import os
import urllib.error
import urllib.request
from pathlib import Path

import numpy as np
import pytest

from boostconv import mm_read_matrix, mm_read_vector

DATA = Path(__file__).parent / "data"

FIDAP_URLS = {
    "fidap029.mtx.gz":
        "https://math.nist.gov/pub/MatrixMarket2/SPARSKIT/fidap/fidap029.mtx.gz",
    "fidap029_rhs1.mtx.gz":
        "https://math.nist.gov/pub/MatrixMarket2/SPARSKIT/fidap/fidap029_rhs1.mtx.gz",
}


def data_path(name: str) -> str:
    return str(DATA / name)


def _fidap_dir() -> Path:
    env = os.environ.get("BOOSTCONV_DATA_DIR")
    if env:
        return Path(env)
    return Path(__file__).parents[1] / "data"


def _locate_or_fetch(name: str):
    directory = _fidap_dir()
    for candidate in (directory / name, directory / name.removesuffix(".gz")):
        if candidate.exists():
            return candidate
    directory.mkdir(parents=True, exist_ok=True)
    target = directory / name
    try:
        with urllib.request.urlopen(FIDAP_URLS[name], timeout=20) as resp:
            target.write_bytes(resp.read())
        return target
    except (urllib.error.URLError, OSError):
        return None


@pytest.fixture(scope="session")
def fidap029():
    """The fidap029 system (A, b), n = 2870, fetched or locally cached.

    Skips when the MatrixMarket files are neither cached under
    $BOOSTCONV_DATA_DIR (or ./data) nor downloadable from math.nist.gov.
    """
    mat = _locate_or_fetch("fidap029.mtx.gz")
    rhs = _locate_or_fetch("fidap029_rhs1.mtx.gz")
    if mat is None or rhs is None:
        pytest.skip(
            "fidap029 data not available: place fidap029.mtx.gz and "
            "fidap029_rhs1.mtx.gz under $BOOSTCONV_DATA_DIR or ./data "
            "(see README for the MatrixMarket URLs)"
        )
    A = mm_read_matrix(mat)
    b = mm_read_vector(rhs)
    return A, b


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
