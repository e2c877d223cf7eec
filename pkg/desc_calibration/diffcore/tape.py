"""
Reverse-mode differentiation over numpy arrays.

A Tape records every node in execution order; `backward` walks the nodes in
exact reverse order and accumulates gradients additively. Only the operations
the calibration model needs are provided, without broadcasting.
"""

from __future__ import annotations

from collections.abc import Callable, Sequence

import numpy as np
from scipy.special import expit

from .params import ParamStore

Backward = Callable[[np.ndarray], None]


class Node:
    """A value on the tape, its accumulated gradient and its backward rule."""

    __slots__ = ("value", "grad", "requires_grad", "backward")

    def __init__(self, value: np.ndarray, requires_grad: bool = False):
        self.value = value
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad
        self.backward: Backward | None = None

    @property
    def shape(self) -> tuple[int, ...]:
        return self.value.shape

    def __repr__(self):
        return f"Node(shape={self.value.shape}, requires_grad={self.requires_grad})"


class Tape:
    """Records operations for one forward pass (rebuilt for every minibatch).

    Args:
        store: Parameter store the `param`, `embed` and `dense` operations read
        record: When False parameters are treated as constants and nothing is
            kept for a backward pass (inference mode)
    """

    def __init__(self, store: ParamStore | None = None, record: bool = True):
        self.store = store if store is not None else ParamStore()
        self.record = record
        self.nodes: list[Node] = []
        self._params: dict[str, Node] = {}

    # -- graph construction -------------------------------------------------

    def _node(self, value: np.ndarray, parents: Sequence[Node], backward: Callable[[Node, np.ndarray], None] | None = None) -> Node:
        requires_grad = self.record and any(p.requires_grad for p in parents)
        node = Node(value, requires_grad)
        if requires_grad and backward is not None:
            node.backward = lambda g: backward(node, g)
        self.nodes.append(node)
        return node

    @staticmethod
    def _accumulate(node: Node, grad: np.ndarray) -> None:
        if not node.requires_grad:
            return
        if node.grad is None:
            node.grad = np.array(grad, dtype=np.float64)
        else:
            node.grad = node.grad + grad

    def constant(self, value: np.ndarray | float) -> Node:
        node = Node(np.asarray(value, dtype=np.float64), requires_grad=False)
        self.nodes.append(node)
        return node

    def param(self, name: str) -> Node:
        """The node of a stored parameter (one node per name and tape)."""
        if name not in self._params:
            node = Node(self.store[name], requires_grad=self.record)
            self._params[name] = node
            self.nodes.append(node)
        return self._params[name]

    def custom(self, value: np.ndarray, parents: Sequence[Node], vjps: Sequence[Callable[[np.ndarray], np.ndarray]]) -> Node:
        """Record an operation given its value and one vector-Jacobian product per parent."""

        def backward(node: Node, g: np.ndarray) -> None:
            for parent, vjp in zip(parents, vjps):
                if parent.requires_grad:
                    self._accumulate(parent, vjp(g))

        return self._node(np.asarray(value, dtype=np.float64), parents, backward)

    # -- operations ------------------------------------------------------------

    def embed(self, table: str, indices: np.ndarray | int) -> Node:
        """
        Look up embedding rows.

        Args:
            table: Parameter name of a (vocab, d) table
            indices: One index or an index array

        Returns:
            Node holding the selected rows

        Raises:
            KeyError: If the table is unknown
            ValueError: If an index is out of range
        """
        weights = self.param(table)
        indices = np.asarray(indices, dtype=np.int64)
        vocab_size = weights.value.shape[0]
        if indices.size and (indices.min() < 0 or indices.max() >= vocab_size):
            raise ValueError(f"Index out of range for table '{table}' of size {vocab_size}")

        def backward(node: Node, g: np.ndarray) -> None:
            grad = np.zeros_like(weights.value)
            np.add.at(grad, indices, g)
            self._accumulate(weights, grad)

        return self._node(weights.value[indices], [weights], backward)

    def dense(self, layer: str, x: Node, activation: str = "identity") -> Node:
        """
        Affine layer W x + b followed by `relu` or `identity`.

        Accepts a vector (in,) or a batch (B, in).

        Raises:
            ValueError: If the input width does not match the layer
        """
        if activation not in ("relu", "identity"):
            raise ValueError(f"Unknown activation '{activation}'")
        weight = self.param(f"{layer}.weight")
        bias = self.param(f"{layer}.bias")
        if x.value.shape[-1] != weight.value.shape[1]:
            raise ValueError(f"Layer '{layer}' expects width {weight.value.shape[1]}, got {x.value.shape[-1]}")
        x2 = x.value.reshape(-1, x.value.shape[-1])
        z = x2 @ weight.value.T + bias.value
        out = np.maximum(z, 0.0) if activation == "relu" else z

        def backward(node: Node, g: np.ndarray) -> None:
            gz = g.reshape(z.shape)
            if activation == "relu":
                gz = gz * (z > 0.0)
            self._accumulate(weight, gz.T @ x2)
            self._accumulate(bias, gz.sum(axis=0))
            self._accumulate(x, (gz @ weight.value).reshape(x.value.shape))

        return self._node(out.reshape(*x.value.shape[:-1], -1), [x, weight, bias], backward)

    def softmax(self, x: Node) -> Node:
        """Softmax over the last axis with max-subtraction."""
        shifted = x.value - x.value.max(axis=-1, keepdims=True)
        e = np.exp(shifted)
        s = e / e.sum(axis=-1, keepdims=True)

        def backward(node: Node, g: np.ndarray) -> None:
            self._accumulate(x, s * (g - (g * s).sum(axis=-1, keepdims=True)))

        return self._node(s, [x], backward)

    def concat(self, xs: Sequence[Node], axis: int = -1) -> Node:
        value = np.concatenate([x.value for x in xs], axis=axis)
        splits = np.cumsum([x.value.shape[axis] for x in xs])[:-1]

        def backward(node: Node, g: np.ndarray) -> None:
            for x, part in zip(xs, np.split(g, splits, axis=axis)):
                self._accumulate(x, part)

        return self._node(value, xs, backward)

    def stack(self, xs: Sequence[Node], axis: int = -1) -> Node:
        value = np.stack([x.value for x in xs], axis=axis)

        def backward(node: Node, g: np.ndarray) -> None:
            for i, x in enumerate(xs):
                self._accumulate(x, np.take(g, i, axis=axis))

        return self._node(value, xs, backward)

    def add(self, a: Node, b: Node) -> Node:
        self._same_shape(a, b)

        def backward(node: Node, g: np.ndarray) -> None:
            self._accumulate(a, g)
            self._accumulate(b, g)

        return self._node(a.value + b.value, [a, b], backward)

    def mul(self, a: Node, b: Node) -> Node:
        self._same_shape(a, b)

        def backward(node: Node, g: np.ndarray) -> None:
            self._accumulate(a, g * b.value)
            self._accumulate(b, g * a.value)

        return self._node(a.value * b.value, [a, b], backward)

    def scale(self, x: Node, factor: float) -> Node:
        def backward(node: Node, g: np.ndarray) -> None:
            self._accumulate(x, g * factor)

        return self._node(x.value * factor, [x], backward)

    def sum(self, x: Node, axis: int = -1) -> Node:
        def backward(node: Node, g: np.ndarray) -> None:
            self._accumulate(x, np.broadcast_to(np.expand_dims(g, axis), x.value.shape))

        return self._node(x.value.sum(axis=axis), [x], backward)

    def mean(self, x: Node) -> Node:
        size = x.value.size

        def backward(node: Node, g: np.ndarray) -> None:
            self._accumulate(x, np.full(x.value.shape, float(g) / size))

        return self._node(np.asarray(x.value.mean()), [x], backward)

    def reshape(self, x: Node, shape: tuple[int, ...]) -> Node:
        def backward(node: Node, g: np.ndarray) -> None:
            self._accumulate(x, g.reshape(x.value.shape))

        return self._node(x.value.reshape(shape), [x], backward)

    def exp(self, x: Node) -> Node:
        out = np.exp(x.value)

        def backward(node: Node, g: np.ndarray) -> None:
            self._accumulate(x, g * out)

        return self._node(out, [x], backward)

    def sigmoid(self, x: Node) -> Node:
        out = expit(x.value)

        def backward(node: Node, g: np.ndarray) -> None:
            self._accumulate(x, g * out * (1.0 - out))

        return self._node(out, [x], backward)

    def clip(self, x: Node, low: float, high: float) -> Node:
        """Clamp into [low, high]; the gradient is zero where clamping is active."""
        inside = (x.value >= low) & (x.value <= high)

        def backward(node: Node, g: np.ndarray) -> None:
            self._accumulate(x, g * inside)

        return self._node(np.clip(x.value, low, high), [x], backward)

    def attend(self, query: Node, keys: Node) -> Node:
        """
        Scaled dot-product attention of a query over its keys.

        Args:
            query: (B, d) queries
            keys: (B, k, d) keys, also used as values

        Returns:
            (B, d) softmax(q . k_j / sqrt(d))-weighted sums of the keys
        """
        d = query.value.shape[-1]
        root = np.sqrt(d)
        logits = np.einsum("bd,bkd->bk", query.value, keys.value) / root
        shifted = np.exp(logits - logits.max(axis=-1, keepdims=True))
        weights = shifted / shifted.sum(axis=-1, keepdims=True)
        out = np.einsum("bk,bkd->bd", weights, keys.value)

        def backward(node: Node, g: np.ndarray) -> None:
            g_weights = np.einsum("bd,bkd->bk", g, keys.value)
            g_logits = weights * (g_weights - (g_weights * weights).sum(axis=-1, keepdims=True))
            self._accumulate(query, np.einsum("bk,bkd->bd", g_logits, keys.value) / root)
            self._accumulate(keys, np.einsum("bk,bd->bkd", weights, g) + np.einsum("bk,bd->bkd", g_logits, query.value) / root)

        return self._node(out, [query, keys], backward)

    def binary_cross_entropy(self, p: Node, labels: np.ndarray) -> Node:
        """Mean negative log-likelihood of binary labels under probabilities p."""
        y = np.asarray(labels, dtype=np.float64)
        self._same_shape(p, Node(y))
        value = -np.mean(y * np.log(p.value) + (1.0 - y) * np.log1p(-p.value))

        def backward(node: Node, g: np.ndarray) -> None:
            self._accumulate(p, float(g) * (-y / p.value + (1.0 - y) / (1.0 - p.value)) / y.size)

        return self._node(np.asarray(value), [p], backward)

    @staticmethod
    def _same_shape(a: Node, b: Node) -> None:
        if a.value.shape != b.value.shape:
            raise ValueError(f"Shape mismatch: {a.value.shape} vs {b.value.shape}")

    # -- backward ----------------------------------------------------------------

    def backward(self, output: Node) -> dict[str, np.ndarray]:
        """
        Propagate from a scalar output to every parameter used on this tape.

        Returns:
            Gradient per parameter name (zeros for parameters the output ignores)
        """
        if output.value.size != 1:
            raise ValueError(f"backward needs a scalar output, got shape {output.value.shape}")
        if not self.record:
            raise ValueError("Tape was created with record=False")
        output.grad = np.ones_like(output.value)
        for node in reversed(self.nodes):
            if node.backward is not None and node.grad is not None:
                node.backward(node.grad)
        return {name: (node.grad if node.grad is not None else np.zeros_like(node.value)) for name, node in self._params.items()}
