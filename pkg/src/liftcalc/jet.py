"""Truncated multivariate Taylor numbers for nested forward-mode differentiation.

A :class:`Jet` is an element of ``R[eps_1, ..., eps_d] / (eps_i**2)`` whose
coefficients are numpy arrays over a batch of sample points.  Each ``eps`` is
identified by an integer tag, so derivatives can be nested without
perturbation confusion: differentiating a function that itself differentiates
simply introduces a fresh tag.

Arithmetic is delegated to a kernel module.  The compiled Cython kernel is used
when it was built, otherwise the numpy implementation in ``_jetcore``.
"""

from __future__ import annotations

import itertools
from functools import lru_cache
from math import factorial

import numpy as np

from . import _jetcore

try:
    from . import _jetkernel
except ImportError:  # extension not built
    _jetkernel = None

_BACKENDS = {"numpy": _jetcore}
if _jetkernel is not None:
    _BACKENDS["compiled"] = _jetkernel

_kernel = _BACKENDS.get("compiled", _jetcore)
_tag_counter = itertools.count(1)


def available_backends() -> list[str]:
    return sorted(_BACKENDS)


def backend_name() -> str:
    return "compiled" if _kernel is _jetkernel and _jetkernel is not None else "numpy"


def set_backend(name: str) -> None:
    """Select the arithmetic kernel (``"compiled"`` or ``"numpy"``)."""
    global _kernel
    try:
        _kernel = _BACKENDS[name]
    except KeyError:
        raise ValueError(f"unknown jet backend {name!r}; available: {available_backends()}") from None


def fresh_tag() -> int:
    return next(_tag_counter)


@lru_cache(maxsize=4096)
def _embedding(tags: tuple[int, ...], new_tags: tuple[int, ...]) -> np.ndarray:
    pos = [new_tags.index(t) for t in tags]
    idx = np.zeros(1 << len(tags), dtype=np.intp)
    for s in range(1 << len(tags)):
        idx[s] = sum(1 << pos[i] for i in range(len(tags)) if (s >> i) & 1)
    return idx


@lru_cache(maxsize=4096)
def _split_index(ntags: int, i: int) -> tuple[np.ndarray, np.ndarray]:
    bit = 1 << i
    low = np.array([s for s in range(1 << ntags) if not s & bit], dtype=np.intp)
    return low, low | bit


def _embed(c: np.ndarray, tags: tuple[int, ...], new_tags: tuple[int, ...]) -> np.ndarray:
    if tags == new_tags:
        return c
    out = np.zeros((1 << len(new_tags),) + c.shape[1:])
    out[_embedding(tags, new_tags)] = c
    return out


def _lift_rank(c: np.ndarray, rank: int) -> np.ndarray:
    """Insert unit axes so the batch part of ``c`` has ``rank`` dimensions."""
    extra = rank - (c.ndim - 1)
    if extra <= 0:
        return c
    return c.reshape(c.shape[:1] + (1,) * extra + c.shape[1:])


def _wrap(tags: tuple[int, ...], c: np.ndarray):
    if not tags:
        return c[0]
    return Jet(tags, c)


def _kernel_call(fn, *arrays: np.ndarray) -> np.ndarray:
    rank = max(a.ndim - 1 for a in arrays)
    arrays = [_lift_rank(a, rank) for a in arrays]
    batch = np.broadcast_shapes(*(a.shape[1:] for a in arrays))
    flat = [
        np.ascontiguousarray(np.broadcast_to(a, a.shape[:1] + batch), dtype=float).reshape(a.shape[0], -1)
        for a in arrays
    ]
    out = fn(*flat)
    return np.asarray(out).reshape((out.shape[0],) + batch)


class Jet:
    """Truncated Taylor number; ``c[s]`` multiplies the product of eps over the bits of ``s``."""

    __slots__ = ("tags", "c")
    __array_ufunc__ = None

    def __init__(self, tags: tuple[int, ...], c: np.ndarray):
        self.tags = tags
        self.c = c

    @classmethod
    def variable(cls, tag: int) -> Jet:
        return cls((tag,), np.array([0.0, 1.0]))

    @property
    def order(self) -> int:
        return len(self.tags)

    def __repr__(self) -> str:
        return f"Jet(tags={self.tags}, c={self.c!r})"

    # --- arithmetic -------------------------------------------------------

    def _align(self, other: Jet):
        rank = max(self.c.ndim, other.c.ndim) - 1
        a, b = _lift_rank(self.c, rank), _lift_rank(other.c, rank)
        if self.tags == other.tags:
            return self.tags, a, b
        tags = tuple(sorted(set(self.tags) | set(other.tags)))
        return tags, _embed(a, self.tags, tags), _embed(b, other.tags, tags)

    def _with_const(self, other) -> tuple[np.ndarray, np.ndarray]:
        other = np.asarray(other, dtype=float)
        return _lift_rank(self.c, other.ndim), other

    def __add__(self, other):
        if isinstance(other, Jet):
            tags, a, b = self._align(other)
            return _wrap(tags, a + b)
        c, other = self._with_const(other)
        c = c + np.zeros_like(other)
        c[0] = c[0] + other
        return Jet(self.tags, c)

    __radd__ = __add__

    def __neg__(self):
        return Jet(self.tags, -self.c)

    def __pos__(self):
        return self

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Jet):
            tags, a, b = self._align(other)
            return _wrap(tags, _kernel_call(_kernel.mul, a, b))
        c, other = self._with_const(other)
        return Jet(self.tags, c * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.reciprocal()
        c, other = self._with_const(other)
        return Jet(self.tags, c / other)

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, exponent):
        if isinstance(exponent, Jet):
            return (exponent * self.log()).exp()
        return self._unary(lambda a0, n: _power_coeffs(a0, exponent, n))

    def __rpow__(self, base):
        return (self * np.log(base)).exp()

    # --- elementary functions --------------------------------------------

    def _unary(self, coeff_fn) -> Jet:
        a0 = self.c[0]
        nil = self.c.copy()
        nil[0] = 0.0
        coeffs = coeff_fn(a0, self.order)
        return Jet(self.tags, _kernel_call(_kernel.horner, coeffs, nil))

    def reciprocal(self) -> Jet:
        return self._unary(lambda a0, n: _power_coeffs(a0, -1, n))

    def exp(self) -> Jet:
        return self._unary(lambda a0, n: np.stack([np.exp(a0) / factorial(k) for k in range(n + 1)]))

    def log(self) -> Jet:
        def coeffs(a0, n):
            out = [np.log(a0)]
            out += [(-1.0) ** (k - 1) / (k * a0**k) for k in range(1, n + 1)]
            return np.stack(out)

        return self._unary(coeffs)

    def sin(self) -> Jet:
        return self._unary(lambda a0, n: _trig_coeffs(a0, n, 0))

    def cos(self) -> Jet:
        return self._unary(lambda a0, n: _trig_coeffs(a0, n, 1))

    def sqrt(self) -> Jet:
        return self._unary(lambda a0, n: _power_coeffs(a0, 0.5, n))


def _trig_coeffs(a0, n: int, shift: int) -> np.ndarray:
    s, c = np.sin(a0), np.cos(a0)
    cycle = (s, c, -s, -c)
    return np.stack([cycle[(k + shift) % 4] / factorial(k) for k in range(n + 1)])


def _power_coeffs(a0, r, n: int) -> np.ndarray:
    a0 = np.asarray(a0, dtype=float)
    r = np.asarray(r, dtype=float)
    out = []
    falling = np.ones_like(r)
    with np.errstate(divide="ignore", invalid="ignore"):
        for k in range(n + 1):
            term = np.where(falling == 0.0, 0.0, falling * np.power(a0, r - k))
            out.append(term / factorial(k))
            falling = falling * (r - k)
    return np.stack(np.broadcast_arrays(*out))


# --- dispatching helpers used by field code ----------------------------------


def sin(x):
    return x.sin() if isinstance(x, Jet) else np.sin(x)


def cos(x):
    return x.cos() if isinstance(x, Jet) else np.cos(x)


def exp(x):
    return x.exp() if isinstance(x, Jet) else np.exp(x)


def log(x):
    return x.log() if isinstance(x, Jet) else np.log(x)


def sqrt(x):
    return x.sqrt() if isinstance(x, Jet) else np.sqrt(x)


def primal(x):
    """The plain value of ``x`` with every infinitesimal part dropped."""
    return x.c[0] if isinstance(x, Jet) else x


def split(x, tag: int):
    """Return ``(value, derivative)`` of ``x`` with respect to the infinitesimal ``tag``."""
    if not isinstance(x, Jet) or tag not in x.tags:
        return x, 0.0
    i = x.tags.index(tag)
    rest = x.tags[:i] + x.tags[i + 1 :]
    low, high = _split_index(len(x.tags), i)
    return _wrap(rest, x.c[low]), _wrap(rest, x.c[high])
