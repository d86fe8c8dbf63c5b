"""Second-order forward-mode jets.

A :class:`Jet` carries a value together with its gradient and Hessian with
respect to a fixed set of seed variables. Arithmetic and the elementary
functions in this module propagate all three exactly, so derivatives of
closed-form expressions come out at machine precision.

Values may be batched: ``val`` has shape ``S``, ``grad`` has shape
``S + (n,)`` and ``hess`` has shape ``S + (n, n)``. Leading batch axes
broadcast, so a seed variable can keep a constant ``(n,)`` gradient while
its value is an array of sample points.

Jets may be complex. Because the seed variables are always real chart
coordinates, conjugation, real and imaginary parts commute with
differentiation and are applied componentwise.
"""

from __future__ import annotations

from typing import Any, Sequence

import numpy as np


class Jet:
    __slots__ = ("val", "grad", "hess")

    # let ndarray operands defer to our reflected operators
    __array_ufunc__ = None

    def __init__(self, val, grad, hess):
        self.val = np.asarray(val)
        self.grad = np.asarray(grad)
        self.hess = np.asarray(hess)

    def __repr__(self) -> str:
        return f"Jet(val={self.val!r})"

    @property
    def nvars(self) -> int:
        return self.grad.shape[-1]

    # arithmetic -----------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, Jet):
            return Jet(self.val + other.val, self.grad + other.grad, self.hess + other.hess)
        if _is_zero(other):
            return self
        return Jet(self.val + other, self.grad, self.hess)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.val, -self.grad, -self.hess)

    def __pos__(self):
        return self

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Jet):
            av = self.val[..., None]
            bv = other.val[..., None]
            grad = self.grad * bv + other.grad * av
            outer = self.grad[..., :, None] * other.grad[..., None, :]
            hess = (
                self.hess * bv[..., None]
                + other.hess * av[..., None]
                + outer
                + np.swapaxes(outer, -1, -2)
            )
            return Jet(self.val * other.val, grad, hess)
        if _is_zero(other):
            return 0.0
        c = np.asarray(other)
        return Jet(self.val * c, self.grad * c[..., None], self.hess * c[..., None, None])

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.reciprocal()
        return self * (1.0 / np.asarray(other))

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, p):
        if isinstance(p, Jet):
            raise TypeError("jet exponents are not supported")
        if p == 2:
            return self * self
        v = self.val
        return _chain(self, v**p, p * v ** (p - 1), p * (p - 1) * v ** (p - 2))

    def reciprocal(self):
        r = 1.0 / self.val
        return _chain(self, r, -r * r, 2.0 * r * r * r)

    # complex parts --------------------------------------------------------

    def conjugate(self):
        return Jet(np.conj(self.val), np.conj(self.grad), np.conj(self.hess))

    conj = conjugate

    @property
    def real(self):
        return Jet(self.val.real, self.grad.real, self.hess.real)

    @property
    def imag(self):
        return Jet(self.val.imag, self.grad.imag, self.hess.imag)


def _is_zero(x) -> bool:
    return isinstance(x, (int, float, complex)) and x == 0


def _chain(u: Jet, f0, f1, f2) -> Jet:
    f1 = np.asarray(f1)
    f2 = np.asarray(f2)
    grad = u.grad * f1[..., None]
    hess = u.hess * f1[..., None, None] + (
        f2[..., None, None] * u.grad[..., :, None] * u.grad[..., None, :]
    )
    return Jet(f0, grad, hess)


# elementary functions -------------------------------------------------------


def sin(x):
    if isinstance(x, Jet):
        s, c = np.sin(x.val), np.cos(x.val)
        return _chain(x, s, c, -s)
    return np.sin(x)


def cos(x):
    if isinstance(x, Jet):
        s, c = np.sin(x.val), np.cos(x.val)
        return _chain(x, c, -s, -c)
    return np.cos(x)


def tan(x):
    if isinstance(x, Jet):
        t = np.tan(x.val)
        sec2 = 1.0 + t * t
        return _chain(x, t, sec2, 2.0 * t * sec2)
    return np.tan(x)


def exp(x):
    if isinstance(x, Jet):
        e = np.exp(x.val)
        return _chain(x, e, e, e)
    return np.exp(x)


def log(x):
    if isinstance(x, Jet):
        r = 1.0 / x.val
        return _chain(x, np.log(x.val), r, -r * r)
    return np.log(x)


def sqrt(x):
    if isinstance(x, Jet):
        s = np.sqrt(x.val)
        return _chain(x, s, 0.5 / s, -0.25 / (s * x.val))
    return np.sqrt(x)


def real(x):
    return x.real if isinstance(x, Jet) else np.real(x)


def imag(x):
    return x.imag if isinstance(x, Jet) else np.imag(x)


def conj(x):
    return x.conjugate() if isinstance(x, Jet) else np.conj(x)


def value(x):
    return x.val if isinstance(x, Jet) else x


# seeding and unpacking ----------------------------------------------------------


def variables(x) -> list[Jet]:
    """Seed one jet per trailing coordinate of ``x`` (shape ``S + (n,)``)."""
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    eye = np.eye(n)
    zeros = np.zeros((n, n))
    return [Jet(x[..., k], eye[k], zeros) for k in range(n)]


def object_array(nested) -> np.ndarray:
    """Build an object array from nested lists without descending into ndarrays."""
    if isinstance(nested, np.ndarray) and nested.dtype == object:
        return nested

    def shape_of(obj):
        if isinstance(obj, (list, tuple)):
            return (len(obj),) + shape_of(obj[0])
        return ()

    shape = shape_of(nested)
    out = np.empty(shape, dtype=object)
    for idx in np.ndindex(*shape):
        item = nested
        for i in idx:
            item = item[i]
        out[idx] = item
    return out


def zeros(shape) -> np.ndarray:
    out = np.empty(shape, dtype=object)
    out.fill(0.0)
    return out


_real = np.frompyfunc(real, 1, 1)
_imag = np.frompyfunc(imag, 1, 1)
_conj = np.frompyfunc(conj, 1, 1)


def real_part(a: np.ndarray) -> np.ndarray:
    return _real(a).astype(object)


def imag_part(a: np.ndarray) -> np.ndarray:
    return _imag(a).astype(object)


def conjugate(a: np.ndarray) -> np.ndarray:
    return _conj(a).astype(object)


def _batch_shape(entries: Sequence[Any]) -> tuple[tuple[int, ...], int | None, bool]:
    shapes = []
    nvars = None
    is_complex = False
    for e in entries:
        v = value(e)
        shapes.append(np.shape(v))
        is_complex |= np.iscomplexobj(v)
        if isinstance(e, Jet):
            nvars = e.nvars
            is_complex |= np.iscomplexobj(e.grad) or np.iscomplexobj(e.hess)
    return np.broadcast_shapes(*shapes) if shapes else (), nvars, is_complex


def values(tensor) -> np.ndarray:
    """Plain values of an object tensor, batch axes first: shape ``S + T``."""
    tensor = object_array(tensor)
    flat = list(tensor.flat)
    batch, _, is_complex = _batch_shape(flat)
    dtype = complex if is_complex else float
    out = np.empty(batch + tensor.shape, dtype=dtype)
    for idx, e in zip(np.ndindex(*tensor.shape), flat):
        out[(Ellipsis,) + idx] = value(e)
    return out


def unpack(tensor, nvars: int | None = None):
    """Split an object tensor of jets into ``(val, grad, hess)`` arrays.

    ``val`` has shape ``S + T``, ``grad`` has ``S + T + (n,)`` and ``hess``
    has ``S + T + (n, n)`` where ``T`` is the tensor shape. Constant entries
    get zero derivatives.
    """
    tensor = object_array(tensor)
    flat = list(tensor.flat)
    batch, found, is_complex = _batch_shape(flat)
    n = found if found is not None else nvars
    if n is None:
        raise ValueError("cannot infer the number of jet variables")
    dtype = complex if is_complex else float
    val = np.zeros(batch + tensor.shape, dtype=dtype)
    grad = np.zeros(batch + tensor.shape + (n,), dtype=dtype)
    hess = np.zeros(batch + tensor.shape + (n, n), dtype=dtype)
    for idx, e in zip(np.ndindex(*tensor.shape), flat):
        sl = (Ellipsis,) + idx
        if isinstance(e, Jet):
            val[sl] = e.val
            grad[sl + (slice(None),)] = e.grad
            hess[sl + (slice(None), slice(None))] = e.hess
        else:
            val[sl] = e
    return val, grad, hess
