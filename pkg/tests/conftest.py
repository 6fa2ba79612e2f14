from pathlib import Path

import numpy as np
import pytest

from liftcalc import sampling
from liftcalc.dsl import field
from liftcalc.smooth import ChartOneForm, ChartVectorField

ROOT = Path(__file__).resolve().parents[1]
GALLERY = ROOT / "src" / "liftcalc" / "gallery"


def F(src, n=1):
    return field(src, n)


def V(*srcs, n=None):
    """Vector field from component expressions in ``x0..x{n-1}``."""
    n = len(srcs) if n is None else n
    return ChartVectorField.from_components([field(s, n) for s in srcs], n)


def W(*srcs, n=None):
    n = len(srcs) if n is None else n
    return ChartOneForm.from_components([field(s, n) for s in srcs], n)


def gap(a, b) -> float:
    """Largest entrywise difference of two (possibly ragged, broadcastable) nested results."""
    if isinstance(a, (list, tuple)) or isinstance(b, (list, tuple)):
        n = len(a) if isinstance(a, (list, tuple)) else len(b)
        aa = a if isinstance(a, (list, tuple)) else [a] * n
        bb = b if isinstance(b, (list, tuple)) else [b] * n
        assert len(aa) == len(bb), (len(aa), len(bb))
        return max((gap(x, y) for x, y in zip(aa, bb)), default=0.0)
    d = np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float))
    return float(np.max(d)) if d.size else 0.0


def close(a, b, tol=1e-12):
    return gap(a, b) < tol


@pytest.fixture
def gen():
    return sampling.rng(1234)


@pytest.fixture
def gallery():
    return GALLERY
