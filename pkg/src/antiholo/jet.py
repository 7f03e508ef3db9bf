"""Truncated Taylor jets of scalar and tensor fields.

A :class:`Jet` carries the value of a field at a point together with its
partial derivatives up to order 3.  The value may be a scalar or an array of
any shape; derivative axes are appended *after* the value axes, so for a
tensor field ``T`` of shape ``S`` the second partials live in an array of
shape ``S + (d, d)``.  Derivative arrays are fully symmetric in their
trailing axes by construction.
"""

from __future__ import annotations

import itertools
import string

import numpy as np

MAX_ORDER = 3


def _sym2(a, b):
    # a_i b_j + a_j b_i
    t = a[..., :, None] * b[..., None, :]
    return t + np.swapaxes(t, -1, -2)


def _sym3(a2, b1):
    # a_ij b_k + a_ik b_j + a_jk b_i
    t = a2[..., :, :, None] * b1[..., None, None, :]
    return t + np.swapaxes(t, -1, -2) + np.moveaxis(t, -1, -3)


def _cube(a):
    return a[..., :, None, None] * a[..., None, :, None] * a[..., None, None, :]


class Jet:
    """Value and partial derivatives (orders 1..``order``) of a field at a point."""

    __slots__ = ("value", "d1", "d2", "d3", "order", "dim")

    def __init__(self, value, d1=None, d2=None, d3=None, *, dim: int | None = None):
        self.value = np.asarray(value, dtype=float)
        derivs = [d1, d2, d3]
        order = 0
        for k, d in enumerate(derivs, start=1):
            if d is None:
                break
            order = k
        self.order = order
        self.d1 = None if order < 1 else np.asarray(d1, dtype=float)
        self.d2 = None if order < 2 else np.asarray(d2, dtype=float)
        self.d3 = None if order < 3 else np.asarray(d3, dtype=float)
        if dim is None:
            if order == 0:
                raise ValueError("dim is required for an order-0 jet")
            dim = self.d1.shape[-1]
        self.dim = dim

    # -- construction -----------------------------------------------------

    @classmethod
    def constant(cls, value, dim: int, order: int) -> "Jet":
        v = np.asarray(value, dtype=float)
        parts = [np.zeros(v.shape + (dim,) * k) for k in range(1, order + 1)]
        return cls(v, *parts, dim=dim)

    @classmethod
    def variable(cls, index: int, point, order: int) -> "Jet":
        """Jet of the coordinate function ``x[index]`` (0-based) at ``point``."""
        point = np.asarray(point, dtype=float)
        dim = point.shape[0]
        parts = []
        if order >= 1:
            e = np.zeros(dim)
            e[index] = 1.0
            parts.append(e)
        parts.extend(np.zeros((dim,) * k) for k in range(2, order + 1))
        return cls(point[index], *parts, dim=dim)

    @classmethod
    def stack(cls, jets, shape) -> "Jet":
        """Assemble scalar jets (flat sequence) into a tensor-valued jet of ``shape``."""
        jets = list(jets)
        order = min(j.order for j in jets)
        dim = jets[0].dim
        value = np.array([j.value for j in jets]).reshape(shape)
        parts = []
        for k in range(1, order + 1):
            arr = np.array([j.derivative(k) for j in jets])
            parts.append(arr.reshape(tuple(shape) + (dim,) * k))
        return cls(value, *parts, dim=dim)

    # -- access -----------------------------------------------------------

    def derivative(self, k: int):
        if k == 0:
            return self.value
        if k > self.order:
            raise ValueError(f"jet of order {self.order} has no derivatives of order {k}")
        return (self.d1, self.d2, self.d3)[k - 1]

    def parts(self):
        return [self.derivative(k) for k in range(self.order + 1)]

    @property
    def shape(self):
        return self.value.shape

    def truncate(self, order: int) -> "Jet":
        order = min(order, self.order)
        return Jet(*self.parts()[: order + 1], dim=self.dim)

    def grad(self) -> "Jet":
        """Drop one order and expose the first derivative axis as a tensor index.

        The result has value ``d1`` (shape ``S + (d,)``), so ``grad()`` of a
        metric jet gives ``dg[i, j, k] = d_k g_ij``.
        """
        if self.order < 1:
            raise ValueError("cannot differentiate an order-0 jet")
        return Jet(*self.parts()[1:], dim=self.dim)

    def __repr__(self):
        return f"Jet(order={self.order}, shape={self.shape}, value={self.value!r})"

    # -- arithmetic -------------------------------------------------------

    def _coerce(self, other) -> "Jet":
        if isinstance(other, Jet):
            return other
        return Jet.constant(other, self.dim, self.order)

    def __neg__(self):
        return Jet(*[-p for p in self.parts()], dim=self.dim)

    def __pos__(self):
        return self

    def __add__(self, other):
        other = self._coerce(other)
        order = min(self.order, other.order)
        return Jet(*[a + b for a, b in zip(self.parts()[: order + 1], other.parts())], dim=self.dim)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, Jet):
            c = float(other)
            return Jet(*[c * p for p in self.parts()], dim=self.dim)
        f, g = self, other
        order = min(f.order, g.order)
        value = f.value * g.value
        parts = [value]
        if order >= 1:
            parts.append(f.d1 * g.value[..., None] + f.value[..., None] * g.d1)
        if order >= 2:
            parts.append(
                f.d2 * g.value[..., None, None]
                + _sym2(f.d1, g.d1)
                + f.value[..., None, None] * g.d2
            )
        if order >= 3:
            parts.append(
                f.d3 * g.value[..., None, None, None]
                + _sym3(f.d2, g.d1)
                + _sym3(g.d2, f.d1)
                + f.value[..., None, None, None] * g.d3
            )
        return Jet(*parts, dim=self.dim)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return self * (1.0 / float(other))
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * float(other)

    def reciprocal(self) -> "Jet":
        v = self.value
        if np.any(v == 0.0):
            raise ZeroDivisionError("reciprocal of a jet with zero value")
        return self.compose(1.0 / v, -1.0 / v**2, 2.0 / v**3, -6.0 / v**4)

    def ipow(self, n: int) -> "Jet":
        """Integer power; exact on negative bases."""
        n = int(n)
        if n == 0:
            return Jet.constant(np.ones_like(self.value), self.dim, self.order)
        v = self.value
        if n < 0 and np.any(v == 0.0):
            raise ZeroDivisionError("negative power of a jet with zero value")

        def p(k):
            # d^k/dx^k x^n = n (n-1) ... (n-k+1) x^(n-k)
            c = 1.0
            for j in range(k):
                c *= n - j
            if c == 0.0:
                return np.zeros_like(v)
            return c * v ** (n - k)

        return self.compose(p(0), p(1), p(2), p(3))

    def compose(self, f0, f1, f2, f3) -> "Jet":
        """Chain rule for an elementwise function phi with phi^(k)(value) = fk."""
        parts = [np.asarray(f0, dtype=float)]
        if self.order >= 1:
            parts.append(f1[..., None] * self.d1)
        if self.order >= 2:
            parts.append(
                f2[..., None, None] * (self.d1[..., :, None] * self.d1[..., None, :])
                + f1[..., None, None] * self.d2
            )
        if self.order >= 3:
            parts.append(
                f3[..., None, None, None] * _cube(self.d1)
                + f2[..., None, None, None] * _sym3(self.d2, self.d1)
                + f1[..., None, None, None] * self.d3
            )
        return Jet(*parts, dim=self.dim)

    # -- elementary functions ---------------------------------------------

    def sin(self):
        s, c = np.sin(self.value), np.cos(self.value)
        return self.compose(s, c, -s, -c)

    def cos(self):
        s, c = np.sin(self.value), np.cos(self.value)
        return self.compose(c, -s, -c, s)

    def exp(self):
        e = np.exp(self.value)
        return self.compose(e, e, e, e)

    def log(self):
        v = self.value
        if np.any(v <= 0.0):
            raise ValueError("log of a non-positive value")
        return self.compose(np.log(v), 1.0 / v, -1.0 / v**2, 2.0 / v**3)

    def sqrt(self):
        v = self.value
        if np.any(v < 0.0) or (self.order > 0 and np.any(v == 0.0)):
            raise ValueError("sqrt of a non-positive value")
        r = np.sqrt(v)
        with np.errstate(divide="ignore"):
            return self.compose(r, 0.5 / r, -0.25 / (r * v), 0.375 / (r * v * v))

    def atan(self):
        v = self.value
        q = 1.0 + v * v
        return self.compose(np.arctan(v), 1.0 / q, -2.0 * v / q**2, (6.0 * v * v - 2.0) / q**3)


def einsum(spec: str, *operands: Jet) -> Jet:
    """Einstein summation over the tensor axes of jets, with the Leibniz rule.

    ``spec`` addresses only the value axes, e.g. ``"kl,lij->kij"``.  Each
    derivative slot of the result is distributed over the operands in every
    possible way; because derivative arrays are symmetric this reproduces the
    multinomial Leibniz expansion exactly.
    """
    inputs, output = spec.replace(" ", "").split("->")
    inputs = inputs.split(",")
    if len(inputs) != len(operands):
        raise ValueError("operand count does not match spec")
    used = set(spec)
    free = [c for c in string.ascii_letters if c not in used]
    order = min(op.order for op in operands)
    dim = operands[0].dim
    parts = []
    for k in range(order + 1):
        dletters = free[:k]
        total = None
        for assign in itertools.product(range(len(operands)), repeat=k):
            subs = []
            arrays = []
            for idx, (sub, op) in enumerate(zip(inputs, operands)):
                mine = "".join(dletters[s] for s, owner in enumerate(assign) if owner == idx)
                subs.append(sub + mine)
                arrays.append(op.derivative(len(mine)))
            term = np.einsum(",".join(subs) + "->" + output + "".join(dletters), *arrays)
            total = term if total is None else total + term
        parts.append(total)
    return Jet(*parts, dim=dim)


def inverse(m: Jet) -> Jet:
    """Jet of the matrix inverse of a square-matrix-valued jet.

    Solved order by order from ``m @ h = I``: every derivative of the product
    vanishes, which gives ``h_K = -h0 @ sum over nonempty S of m_S @ h_(K-S)``.
    """
    h0 = np.linalg.inv(m.value)
    dim = m.dim
    letters = "UVW"
    parts = [h0]
    for k in range(1, m.order + 1):
        dl = letters[:k]
        acc = np.zeros(h0.shape + (dim,) * k)
        for mask in itertools.product((0, 1), repeat=k):
            if not any(mask):
                continue
            mine = "".join(c for c, b in zip(dl, mask) if b)
            rest = "".join(c for c, b in zip(dl, mask) if not b)
            acc = acc + np.einsum(
                f"ij{mine},jk{rest}->ik{dl}", m.derivative(len(mine)), parts[len(rest)]
            )
        parts.append(-np.einsum(f"ai,ik{dl}->ak{dl}", h0, acc))
    return Jet(*parts, dim=dim)
