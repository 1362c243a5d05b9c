"""Minimal reverse-mode autodiff over numpy arrays.

A :class:`Tensor` wraps a float64 ndarray and records enough of the forward
computation to push gradients back to every leaf created with
``requires_grad=True``.  Graph edges are only recorded when an input actually
requires grad, so purely constant computations run at plain numpy speed.

The op set is deliberately small: exactly what encoding, similarity and loss
computations need (gather/concat for prompt assembly, matmul/tanh for the
frozen encoder, exp/log/sum for softmax and KL, maximum(0, .) for hinges).
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

Array = np.ndarray


def _as_array(x) -> Array:
    a = np.asarray(x, dtype=np.float64)
    return a


def _unbroadcast(grad: Array, shape: tuple[int, ...]) -> Array:
    """Sum `grad` down to `shape` (reverse of numpy broadcasting)."""
    if grad.shape == shape:
        return grad
    # added leading axes
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    # broadcast length-1 axes
    for ax, n in enumerate(shape):
        if n == 1 and grad.shape[ax] != 1:
            grad = grad.sum(axis=ax, keepdims=True)
    return grad.reshape(shape)


class Tensor:
    __slots__ = ("value", "grad", "requires_grad", "_parents", "_backward")

    def __init__(self, value, requires_grad: bool = False,
                 parents: Sequence["Tensor"] = (),
                 backward: Callable[[Array], None] | None = None):
        self.value = _as_array(value)
        self.requires_grad = requires_grad
        self.grad: Array | None = None
        self._parents = tuple(p for p in parents if p.requires_grad)
        self._backward = backward

    # -- graph plumbing ----------------------------------------------------

    @property
    def shape(self) -> tuple[int, ...]:
        return self.value.shape

    def _accumulate(self, g: Array) -> None:
        if self.grad is None:
            self.grad = np.zeros_like(self.value)
        self.grad += g

    def backward(self, seed: Array | None = None) -> None:
        """Backpropagate d(self)/d(leaf) into every grad-requiring leaf."""
        if not self.requires_grad:
            return
        topo: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, processed = stack.pop()
            if processed:
                topo.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if id(p) not in seen:
                    stack.append((p, False))
        if seed is None:
            seed = np.ones_like(self.value)
        self._accumulate(_as_array(seed))
        for node in reversed(topo):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other):
        other = as_tensor(other)
        out_val = self.value + other.value
        rg = self.requires_grad or other.requires_grad
        if not rg:
            return Tensor(out_val)

        def bw(g: Array) -> None:
            if self.requires_grad:
                self._accumulate(_unbroadcast(g, self.shape))
            if other.requires_grad:
                other._accumulate(_unbroadcast(g, other.shape))

        return Tensor(out_val, True, (self, other), bw)

    __radd__ = __add__

    def __neg__(self):
        if not self.requires_grad:
            return Tensor(-self.value)

        def bw(g: Array) -> None:
            self._accumulate(-g)

        return Tensor(-self.value, True, (self,), bw)

    def __sub__(self, other):
        return self + (-as_tensor(other))

    def __rsub__(self, other):
        return as_tensor(other) + (-self)

    def __mul__(self, other):
        other = as_tensor(other)
        out_val = self.value * other.value
        rg = self.requires_grad or other.requires_grad
        if not rg:
            return Tensor(out_val)
        a_val, b_val = self.value, other.value

        def bw(g: Array) -> None:
            if self.requires_grad:
                self._accumulate(_unbroadcast(g * b_val, self.shape))
            if other.requires_grad:
                other._accumulate(_unbroadcast(g * a_val, other.shape))

        return Tensor(out_val, True, (self, other), bw)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = as_tensor(other)
        out_val = self.value / other.value
        rg = self.requires_grad or other.requires_grad
        if not rg:
            return Tensor(out_val)
        a_val, b_val = self.value, other.value

        def bw(g: Array) -> None:
            if self.requires_grad:
                self._accumulate(_unbroadcast(g / b_val, self.shape))
            if other.requires_grad:
                other._accumulate(_unbroadcast(-g * a_val / (b_val * b_val), other.shape))

        return Tensor(out_val, True, (self, other), bw)

    def __matmul__(self, other):
        other = as_tensor(other)
        out_val = self.value @ other.value
        rg = self.requires_grad or other.requires_grad
        if not rg:
            return Tensor(out_val)
        a_val, b_val = self.value, other.value

        def bw(g: Array) -> None:
            # 1-D operands follow numpy's vec/mat promotion rules.
            if self.requires_grad:
                if a_val.ndim == 1 and b_val.ndim == 1:
                    ga = g * b_val
                elif a_val.ndim == 1:
                    ga = g @ b_val.T
                elif b_val.ndim == 1:
                    ga = np.outer(g, b_val)
                else:
                    ga = g @ np.swapaxes(b_val, -1, -2)
                self._accumulate(_unbroadcast(ga, self.shape))
            if other.requires_grad:
                if a_val.ndim == 1 and b_val.ndim == 1:
                    gb = g * a_val
                elif b_val.ndim == 1:
                    gb = np.swapaxes(a_val, -1, -2) @ g
                elif a_val.ndim == 1:
                    gb = np.outer(a_val, g)
                else:
                    gb = np.swapaxes(a_val, -1, -2) @ g
                other._accumulate(_unbroadcast(gb, other.shape))

        return Tensor(out_val, True, (self, other), bw)

    def __getitem__(self, idx):
        out_val = self.value[idx]
        if not self.requires_grad:
            return Tensor(out_val)

        def bw(g: Array) -> None:
            full = np.zeros_like(self.value)
            np.add.at(full, idx, g)
            self._accumulate(full)

        return Tensor(out_val, True, (self,), bw)

    # -- elementwise nonlinearities -----------------------------------------

    def tanh(self):
        out_val = np.tanh(self.value)
        if not self.requires_grad:
            return Tensor(out_val)

        def bw(g: Array) -> None:
            self._accumulate(g * (1.0 - out_val * out_val))

        return Tensor(out_val, True, (self,), bw)

    def exp(self):
        out_val = np.exp(self.value)
        if not self.requires_grad:
            return Tensor(out_val)

        def bw(g: Array) -> None:
            self._accumulate(g * out_val)

        return Tensor(out_val, True, (self,), bw)

    def log(self):
        out_val = np.log(self.value)
        if not self.requires_grad:
            return Tensor(out_val)
        v = self.value

        def bw(g: Array) -> None:
            self._accumulate(g / v)

        return Tensor(out_val, True, (self,), bw)

    def sqrt(self):
        out_val = np.sqrt(self.value)
        if not self.requires_grad:
            return Tensor(out_val)

        def bw(g: Array) -> None:
            self._accumulate(g * 0.5 / out_val)

        return Tensor(out_val, True, (self,), bw)

    def relu(self):
        """max(0, x); subgradient 0 at the kink."""
        out_val = np.maximum(self.value, 0.0)
        if not self.requires_grad:
            return Tensor(out_val)
        mask = (self.value > 0.0).astype(np.float64)

        def bw(g: Array) -> None:
            self._accumulate(g * mask)

        return Tensor(out_val, True, (self,), bw)

    # -- reductions / reshaping ---------------------------------------------

    def sum(self, axis=None, keepdims: bool = False):
        out_val = self.value.sum(axis=axis, keepdims=keepdims)
        if not self.requires_grad:
            return Tensor(out_val)
        shape = self.shape

        def bw(g: Array) -> None:
            if axis is None:
                self._accumulate(np.broadcast_to(g, shape).copy())
                return
            if not keepdims:
                g = np.expand_dims(g, axis)
            self._accumulate(np.broadcast_to(g, shape).copy())

        return Tensor(out_val, True, (self,), bw)

    def mean(self, axis=None, keepdims: bool = False):
        n = self.value.size if axis is None else self.value.shape[axis]
        return self.sum(axis=axis, keepdims=keepdims) * (1.0 / n)

    def reshape(self, *shape):
        out_val = self.value.reshape(*shape)
        if not self.requires_grad:
            return Tensor(out_val)
        orig = self.shape

        def bw(g: Array) -> None:
            self._accumulate(g.reshape(orig))

        return Tensor(out_val, True, (self,), bw)

    @property
    def T(self):
        out_val = self.value.T
        if not self.requires_grad:
            return Tensor(out_val)

        def bw(g: Array) -> None:
            self._accumulate(g.T)

        return Tensor(out_val, True, (self,), bw)

    def item(self) -> float:
        return float(self.value)

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def parameter(value) -> Tensor:
    return Tensor(value, requires_grad=True)


def gather(table: Tensor, ids) -> Tensor:
    """Rows `table[ids]`; gradients of repeated ids accumulate on one row."""
    ids = np.asarray(ids, dtype=np.intp)
    out_val = table.value[ids]
    if not table.requires_grad:
        return Tensor(out_val)

    def bw(g: Array) -> None:
        full = np.zeros_like(table.value)
        np.add.at(full, ids, g)
        table._accumulate(full)

    return Tensor(out_val, True, (table,), bw)


def concat_rows(parts: Sequence[Tensor]) -> Tensor:
    """Stack 2-D blocks along axis 0."""
    parts = [as_tensor(p) for p in parts]
    out_val = np.concatenate([p.value for p in parts], axis=0)
    if not any(p.requires_grad for p in parts):
        return Tensor(out_val)
    offsets = np.cumsum([0] + [p.value.shape[0] for p in parts])

    def bw(g: Array) -> None:
        for p, lo, hi in zip(parts, offsets[:-1], offsets[1:]):
            if p.requires_grad:
                p._accumulate(g[lo:hi])

    return Tensor(out_val, True, tuple(parts), bw)


def normalize_rows(x: Tensor, eps: float = 1e-12) -> Tensor:
    """L2-normalize the last axis.

    A bias of eps^2 under the sqrt keeps the gradient finite for all-zero
    rows (which then map to zero) and perturbs unit-scale rows by ~1e-24,
    far below any tolerance used downstream.
    """
    sq = (x * x).sum(axis=-1, keepdims=True) + eps * eps
    return x / sq.sqrt()


def softmax(x: Tensor, axis: int = -1, mask: Array | None = None) -> Tensor:
    """Softmax along `axis`; optional 0/1 mask zeroes out padded entries.

    The max-shift is treated as a constant, which leaves the gradient exact.
    """
    if mask is not None:
        m = np.max(np.where(mask > 0, x.value, -np.inf), axis=axis,
                   keepdims=True)
        m = np.where(np.isfinite(m), m, 0.0)  # fully-masked slices stay finite
        shifted = x - Tensor(m)
        e = shifted.exp() * Tensor(mask)
    else:
        shifted = x - Tensor(x.value.max(axis=axis, keepdims=True))
        e = shifted.exp()
    return e / e.sum(axis=axis, keepdims=True)
