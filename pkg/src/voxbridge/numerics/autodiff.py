"""Reverse-mode automatic differentiation on dense float64 arrays.

A Tape records primitive ops (add, mul, matmul, conv1d, tanh, exp, log,
softplus, sum, narrow, concat) in creation order, which is already a
topological order; the backward pass walks the list once in reverse.
Values are numpy float64 arrays and every op output is checked finite,
so NaN/Inf surface at the op that produced them instead of at the loss.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "Tape", "Var", "leaf", "constant",
    "add", "sub", "mul", "scale", "matmul", "conv1d",
    "tanh", "exp", "log", "softplus",
    "total", "narrow", "concat", "backward",
]


class Node:
    __slots__ = ("op", "value", "parents", "vjps")

    def __init__(self, op, value, parents, vjps):
        self.op = op
        self.value = value
        self.parents = parents  # node ids
        self.vjps = vjps        # callables: output grad -> parent grad


class Tape:
    """Ordered op record; node ids index into the record."""

    def __init__(self):
        self._nodes = []

    def __len__(self):
        return len(self._nodes)

    def _record(self, op, value, parents=(), vjps=()):
        value = np.asarray(value, dtype=np.float64)
        if not np.all(np.isfinite(value)):
            raise FloatingPointError(f"non-finite value produced by op '{op}'")
        self._nodes.append(Node(op, value, parents, vjps))
        return Var(self, len(self._nodes) - 1)

    def node(self, nid):
        return self._nodes[nid]


class Var:
    """Handle to one tape node."""

    __slots__ = ("tape", "nid")

    def __init__(self, tape, nid):
        self.tape = tape
        self.nid = nid

    @property
    def value(self) -> np.ndarray:
        return self.tape.node(self.nid).value

    @property
    def shape(self):
        return self.value.shape

    def __repr__(self):
        return f"Var(nid={self.nid}, shape={self.value.shape})"


def leaf(tape: Tape, value) -> Var:
    """Input node (parameter or data); gradients accumulate here."""
    return tape._record("leaf", value)


def constant(tape: Tape, value) -> Var:
    """Alias of leaf; constants simply have their gradients ignored."""
    return tape._record("const", value)


def _as_var(tape, x):
    if isinstance(x, Var):
        if x.tape is not tape:
            raise ValueError("mixing variables from different tapes")
        return x
    return constant(tape, x)


def _unbroadcast(grad, shape):
    """Sum grad down to `shape` (reverse of numpy broadcasting)."""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad


def add(a: Var, b) -> Var:
    t = a.tape
    b = _as_var(t, b)
    av, bv = a.value, b.value
    return t._record(
        "add", av + bv, (a.nid, b.nid),
        (lambda g: _unbroadcast(g, av.shape), lambda g: _unbroadcast(g, bv.shape)),
    )


def sub(a: Var, b) -> Var:
    return add(a, scale(_as_var(a.tape, b), -1.0))


def mul(a: Var, b) -> Var:
    t = a.tape
    b = _as_var(t, b)
    av, bv = a.value, b.value
    return t._record(
        "mul", av * bv, (a.nid, b.nid),
        (lambda g: _unbroadcast(g * bv, av.shape),
         lambda g: _unbroadcast(g * av, bv.shape)),
    )


def scale(a: Var, k: float) -> Var:
    k = float(k)
    return a.tape._record("mul", a.value * k, (a.nid,), (lambda g: g * k,))


def matmul(a: Var, b: Var) -> Var:
    t = a.tape
    b = _as_var(t, b)
    av, bv = a.value, b.value
    if av.ndim != 2 or bv.ndim != 2:
        raise ValueError(f"matmul expects 2-D operands, got {av.shape} @ {bv.shape}")
    return t._record(
        "matmul", av @ bv, (a.nid, b.nid),
        (lambda g: g @ bv.T, lambda g: av.T @ g),
    )


def conv1d_value(x: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Same-padded stride-1 conv along axis 0; x (T, Cin), w (K, Cin, Cout)."""
    T = x.shape[0]
    K = w.shape[0]
    pad = K // 2
    xp = np.zeros((T + K - 1, x.shape[1]))
    xp[pad:pad + T] = x
    out = np.zeros((T, w.shape[2]))
    for k in range(K):
        out += xp[k:k + T] @ w[k]
    return out


def conv1d(x: Var, w: Var) -> Var:
    """Temporal convolution, zero 'same' padding, odd kernel."""
    t = x.tape
    w = _as_var(t, w)
    xv, wv = x.value, w.value
    if wv.ndim != 3 or wv.shape[0] % 2 != 1:
        raise ValueError("conv1d weight must be (K, Cin, Cout) with odd K")
    if xv.ndim != 2 or xv.shape[1] != wv.shape[1]:
        raise ValueError(f"conv1d shape mismatch: x {xv.shape}, w {wv.shape}")
    T, K, pad = xv.shape[0], wv.shape[0], wv.shape[0] // 2
    xp = np.zeros((T + K - 1, xv.shape[1]))
    xp[pad:pad + T] = xv

    def vjp_x(g):
        gx = np.zeros_like(xp)
        for k in range(K):
            gx[k:k + T] += g @ wv[k].T
        return gx[pad:pad + T]

    def vjp_w(g):
        gw = np.empty_like(wv)
        for k in range(K):
            gw[k] = xp[k:k + T].T @ g
        return gw

    return t._record("conv1d", conv1d_value(xv, wv), (x.nid, w.nid), (vjp_x, vjp_w))


def tanh(x: Var) -> Var:
    y = np.tanh(x.value)
    return x.tape._record("tanh", y, (x.nid,), (lambda g: g * (1.0 - y * y),))


def exp(x: Var) -> Var:
    y = np.exp(x.value)
    return x.tape._record("exp", y, (x.nid,), (lambda g: g * y,))


def log(x: Var) -> Var:
    xv = x.value
    with np.errstate(invalid="ignore", divide="ignore"):
        y = np.log(xv)
    return x.tape._record("log", y, (x.nid,), (lambda g: g / xv,))


def _sigmoid(x):
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def softplus(x: Var) -> Var:
    xv = x.value
    return x.tape._record(
        "softplus", np.logaddexp(0.0, xv), (x.nid,),
        (lambda g: g * _sigmoid(xv),),
    )


def total(x: Var) -> Var:
    """Sum over all elements; the usual reduction to a scalar loss."""
    shape = x.value.shape
    return x.tape._record(
        "sum", x.value.sum(), (x.nid,),
        (lambda g: np.broadcast_to(g, shape).copy(),),
    )


def narrow(x: Var, axis: int, start: int, length: int) -> Var:
    """Contiguous slice [start, start+length) along one axis."""
    xv = x.value
    key = [slice(None)] * xv.ndim
    key[axis] = slice(start, start + length)
    key = tuple(key)

    def vjp(g):
        out = np.zeros_like(xv)
        out[key] = g
        return out

    return x.tape._record("narrow", xv[key], (x.nid,), (vjp,))


def concat(parts: list, axis: int) -> Var:
    t = parts[0].tape
    parts = [_as_var(t, p) for p in parts]
    values = [p.value for p in parts]
    sizes = [v.shape[axis] for v in values]
    offsets = np.concatenate([[0], np.cumsum(sizes)])

    def make_vjp(i):
        key = [slice(None)] * values[0].ndim
        key[axis] = slice(int(offsets[i]), int(offsets[i + 1]))
        key = tuple(key)
        return lambda g: g[key]

    return t._record(
        "concat", np.concatenate(values, axis=axis),
        tuple(p.nid for p in parts),
        tuple(make_vjp(i) for i in range(len(parts))),
    )


def backward(loss: Var, params: list) -> list:
    """Gradients of a scalar loss for each Var in `params`.

    Disconnected parameters get zero gradients. Every tape node is
    visited exactly once, in reverse creation order.
    """
    tape = loss.tape
    if loss.value.shape != ():
        raise ValueError(f"loss must be scalar, got shape {loss.value.shape}")
    grads = {loss.nid: np.ones(())}
    for nid in range(loss.nid, -1, -1):
        g = grads.get(nid)
        if g is None:
            continue
        node = tape.node(nid)
        for pid, vjp in zip(node.parents, node.vjps):
            contrib = vjp(g)
            if pid in grads:
                grads[pid] = grads[pid] + contrib
            else:
                grads[pid] = contrib
    out = []
    for p in params:
        g = grads.get(p.nid)
        if g is None:
            out.append(np.zeros_like(p.value))
        else:
            out.append(np.broadcast_to(np.asarray(g), p.value.shape).copy())
    return out
