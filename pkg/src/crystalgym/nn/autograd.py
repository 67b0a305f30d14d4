"""Reverse-mode automatic differentiation over dense numpy arrays.

Only the operations the network and losses need; float64 throughout so
finite-difference checks hold tightly. Summation orders are fixed, making
runs bit-reproducible per seed.
"""

from __future__ import annotations

import numpy as np

from .. import kernels
from ..errors import GraphError, ShapeError

_GRAD_ENABLED = True


class no_grad:
    """Context manager: ops executed inside record no graph."""

    def __enter__(self):
        global _GRAD_ENABLED
        self._prev = _GRAD_ENABLED
        _GRAD_ENABLED = False

    def __exit__(self, *exc):
        global _GRAD_ENABLED
        _GRAD_ENABLED = self._prev
        return False


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward",
                 "_grad_borrowed")

    def __init__(self, data, requires_grad: bool = False):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad = None
        self.requires_grad = requires_grad
        self._parents = ()
        self._backward = None
        self._grad_borrowed = False

    @property
    def shape(self):
        return self.data.shape

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, grad={'set' if self.grad is not None else 'none'})"

    # -- graph bookkeeping --------------------------------------------------

    def _accumulate(self, g):
        # single contributions are borrowed by reference; a second contribution
        # (or an in-place scatter) copies first, so aliased buffers stay intact
        if self.grad is None:
            self.grad = g
            self._grad_borrowed = True
        else:
            if self._grad_borrowed:
                self.grad = np.array(self.grad, dtype=np.float64)
                self._grad_borrowed = False
            self.grad += g

    def _writable_grad(self):
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
            self._grad_borrowed = False
        elif self._grad_borrowed:
            self.grad = np.array(self.grad, dtype=np.float64)
            self._grad_borrowed = False
        return self.grad

    def backward(self):
        if self.data.size != 1:
            raise GraphError("backward() needs a scalar loss")
        if self._backward is None and not self._parents:
            raise GraphError("backward() called with no recorded forward graph")
        order = []
        seen = set()
        stack = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                if id(parent) not in seen:
                    stack.append((parent, False))
        self.grad = np.ones_like(self.data)
        for node in reversed(order):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)

    def item(self) -> float:
        return float(self.data)

    # -- operators ------------------------------------------------------

    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(_wrap(other), self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(self, other)

    def __truediv__(self, other):
        return div(self, other)

    def __neg__(self):
        return mul(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)


def _wrap(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(np.asarray(x, dtype=np.float64))


def _make(data, parents, backward_fn) -> Tensor:
    out = Tensor(data)
    if _GRAD_ENABLED and any(p.requires_grad or p._parents for p in parents):
        out._parents = tuple(parents)
        out._backward = backward_fn
        out.requires_grad = True
    return out


def _unbroadcast(g, shape):
    """Reduce a broadcast gradient back to the parent's shape."""
    extra = g.ndim - len(shape)
    if extra > 0:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and g.shape[i] != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g.reshape(shape)


# -- arithmetic -------------------------------------------------------------

def _acc_maybe_broadcast(t, g):
    if g.shape == t.data.shape:
        t._accumulate(g)
    else:
        t._accumulate(_unbroadcast(g, t.data.shape))


def add(a, b):
    a, b = _wrap(a), _wrap(b)
    data = a.data + b.data

    def backward(g):
        _acc_maybe_broadcast(a, g)
        _acc_maybe_broadcast(b, g)
    return _make(data, (a, b), backward)


def sub(a, b):
    a, b = _wrap(a), _wrap(b)
    data = a.data - b.data

    def backward(g):
        _acc_maybe_broadcast(a, g)
        _acc_maybe_broadcast(b, -g)
    return _make(data, (a, b), backward)


def mul(a, b):
    a, b = _wrap(a), _wrap(b)
    data = a.data * b.data

    def backward(g):
        _acc_maybe_broadcast(a, g * b.data)
        _acc_maybe_broadcast(b, g * a.data)
    return _make(data, (a, b), backward)


def div(a, b):
    a, b = _wrap(a), _wrap(b)
    data = a.data / b.data

    def backward(g):
        a._accumulate(_unbroadcast(g / b.data, a.data.shape))
        b._accumulate(_unbroadcast(-g * a.data / (b.data * b.data), b.data.shape))
    return _make(data, (a, b), backward)


def matmul(a, b):
    a, b = _wrap(a), _wrap(b)
    if a.data.ndim != 2 or b.data.ndim != 2 or a.data.shape[1] != b.data.shape[0]:
        raise ShapeError(f"matmul shapes {a.data.shape} @ {b.data.shape}")
    data = a.data @ b.data

    def backward(g):
        a._accumulate(g @ b.data.T)
        b._accumulate(a.data.T @ g)
    return _make(data, (a, b), backward)


# -- elementwise nonlinearities ---------------------------------------------

def exp(a):
    a = _wrap(a)
    data = np.exp(a.data)

    def backward(g):
        a._accumulate(g * data)
    return _make(data, (a,), backward)


def log(a):
    a = _wrap(a)
    data = np.log(a.data)

    def backward(g):
        a._accumulate(g / a.data)
    return _make(data, (a,), backward)


def tanh(a):
    a = _wrap(a)
    data = np.tanh(a.data)

    def backward(g):
        a._accumulate(g * (1.0 - data * data))
    return _make(data, (a,), backward)


def softplus(a):
    a = _wrap(a)
    x = a.data
    e = np.exp(-np.abs(x))
    lp = np.log1p(e)
    data = np.where(x > 0, x + lp, lp)
    sig = np.where(x >= 0, 1.0 / (1.0 + e), e / (1.0 + e))  # shared with backward

    def backward(g):
        a._accumulate(g * sig)
    return _make(data, (a,), backward)


def relu(a):
    a = _wrap(a)
    mask = a.data > 0

    def backward(g):
        a._accumulate(g * mask)
    return _make(a.data * mask, (a,), backward)


def square(a):
    a = _wrap(a)

    def backward(g):
        a._accumulate(g * 2.0 * a.data)
    return _make(a.data * a.data, (a,), backward)


def minimum(a, b):
    """Elementwise min; ties route the gradient to the first argument."""
    a, b = _wrap(a), _wrap(b)
    take_a = a.data <= b.data
    data = np.where(take_a, a.data, b.data)

    def backward(g):
        a._accumulate(_unbroadcast(g * take_a, a.data.shape))
        b._accumulate(_unbroadcast(g * ~take_a, b.data.shape))
    return _make(data, (a, b), backward)


def clip(a, lo: float, hi: float):
    a = _wrap(a)
    data = np.clip(a.data, lo, hi)
    inside = (a.data >= lo) & (a.data <= hi)

    def backward(g):
        a._accumulate(g * inside)
    return _make(data, (a,), backward)


# -- reductions and shape ops -------------------------------------------------

def tsum(a, axis=None, keepdims: bool = False):
    a = _wrap(a)
    data = a.data.sum(axis=axis, keepdims=keepdims)

    def backward(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        a._accumulate(np.broadcast_to(g, a.data.shape))
    return _make(data, (a,), backward)


def tmean(a, axis=None, keepdims: bool = False):
    a = _wrap(a)
    if axis is None:
        count = a.data.size
    else:
        count = a.data.shape[axis]
    return mul(tsum(a, axis=axis, keepdims=keepdims), 1.0 / count)


def concat(tensors, axis: int = 1):
    tensors = [_wrap(t) for t in tensors]
    data = np.concatenate([t.data for t in tensors], axis=axis)
    sizes = [t.data.shape[axis] for t in tensors]
    offsets = np.cumsum([0] + sizes)

    def backward(g):
        for t, lo, hi in zip(tensors, offsets[:-1], offsets[1:]):
            sl = [slice(None)] * g.ndim
            sl[axis] = slice(lo, hi)
            t._accumulate(g[tuple(sl)])
    return _make(data, tuple(tensors), backward)


def gather_rows(a, idx):
    """Rows a[idx]; duplicates in idx accumulate on the way back."""
    a = _wrap(a)
    idx = np.asarray(idx, dtype=np.int64)
    data = a.data[idx]

    def backward(g):
        kernels.scatter_rows_add(a._writable_grad(), idx, np.ascontiguousarray(g))
    return _make(data, (a,), backward)


def segment_mean(a, seg, num_segments: int):
    """Per-bucket mean of rows; empty buckets give zero rows."""
    a = _wrap(a)
    seg = np.asarray(seg, dtype=np.int64)
    counts = np.bincount(seg, minlength=num_segments).astype(np.float64)
    safe = np.where(counts == 0.0, 1.0, counts)
    data = kernels.segment_sum(a.data, seg, num_segments) / safe[:, None]

    def backward(g):
        scaled = g / safe[:, None]
        a._accumulate(scaled[seg])
    return _make(data, (a,), backward)


def pick(a, cols):
    """out[i] = a[i, cols[i]] for a 2D tensor (per-row column selection)."""
    a = _wrap(a)
    cols = np.asarray(cols, dtype=np.int64)
    rows = np.arange(len(cols))
    data = a.data[rows, cols]

    def backward(g):
        np.add.at(a._writable_grad(), (rows, cols), g)
    return _make(data, (a,), backward)


def log_softmax(a, axis: int = 1):
    a = _wrap(a)
    shift = a.data.max(axis=axis, keepdims=True)  # constant shift, exact gradient
    z = sub(a, Tensor(shift))
    return sub(z, log(tsum(exp(z), axis=axis, keepdims=True)))


def softmax(a, axis: int = 1):
    return exp(log_softmax(a, axis=axis))
