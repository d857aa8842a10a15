#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Divided Differences - stable evaluation of f^[n] on arbitrary real nodes

Nodes are sorted and chain-clustered; nodes inside one cluster are replaced
by the cluster mean and handled through derivatives (confluent Hermite
table), separated nodes through the ordinary Newton recursion. An
independent simplex quadrature oracle and the recursion/product identities
are provided for verification.
"""

import logging
import math
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np

from calculus_errors import UnsupportedOrderError
from engine_config import load_engine_config
from funcmodel_engine.src.function_models import FunctionModel, product_model

logger = logging.getLogger(__name__)

DDIFF_DEFAULTS = {
    'cluster': {
        'gap_rtol': 1e-6,
    },
    'quadrature': {
        'points_per_axis': 32,
        'max_order': 3,
    },
}

Scalar = Union[float, complex]


def _ddiff_config():
    return load_engine_config('ddiff_engine', 'ddiff', DDIFF_DEFAULTS)


class NodeList:
    """Nodes (x_0, ..., x_n) of an order-n divided difference."""

    __slots__ = ('nodes',)

    def __init__(self, nodes: Sequence[float]):
        values = np.array(nodes, dtype=np.float64).reshape(-1)
        if values.size < 1:
            raise ValueError("A divided difference needs at least one node")
        if not np.all(np.isfinite(values)):
            raise ValueError(f"Divided difference nodes must be finite, got {values}")
        values.setflags(write=False)
        self.nodes = values

    @classmethod
    def coerce(cls, nodes) -> 'NodeList':
        return nodes if isinstance(nodes, NodeList) else cls(nodes)

    @property
    def order(self) -> int:
        return self.nodes.size - 1

    def drop(self, slot: int) -> 'NodeList':
        """The node list without ``x_slot``."""
        return NodeList(np.delete(self.nodes, slot))

    def __len__(self) -> int:
        return self.nodes.size

    def __repr__(self) -> str:
        return f"NodeList({np.array2string(self.nodes, precision=6)})"


class ClusterPartition:
    """
    Partition of node indices into chain-linked clusters. Groups are ordered
    by their representative (the mean of the group's nodes).
    """

    __slots__ = ('groups', 'representatives')

    def __init__(self, groups: List[Tuple[int, ...]], representatives: List[float]):
        self.groups = groups
        self.representatives = representatives

    @property
    def largest(self) -> int:
        return max(len(group) for group in self.groups)

    def confluent_nodes(self) -> List[float]:
        """Sorted node list with every node replaced by its cluster representative."""
        nodes = []
        for group, representative in zip(self.groups, self.representatives):
            nodes.extend([representative] * len(group))
        return nodes


def cluster_nodes(xs, gap_rtol: float = None) -> ClusterPartition:
    """
    Chain-link nodes whose consecutive sorted gap is at most
    ``gap_rtol * (1 + max|x_i|)``.
    """
    nodes = NodeList.coerce(xs).nodes
    if gap_rtol is None:
        gap_rtol = float(_ddiff_config()['cluster']['gap_rtol'])
    threshold = gap_rtol * (1.0 + float(np.max(np.abs(nodes))))
    order = np.argsort(nodes, kind='stable')

    groups: List[List[int]] = [[int(order[0])]]
    for previous, current in zip(order[:-1], order[1:]):
        if nodes[current] - nodes[previous] <= threshold:
            groups[-1].append(int(current))
        else:
            groups.append([int(current)])

    representatives = [float(np.mean(nodes[group])) if len(group) > 1 else float(nodes[group[0]])
                       for group in groups]
    return ClusterPartition([tuple(group) for group in groups], representatives)


class DividedDifferenceEvaluator:
    """
    Evaluates f^[n] for one function model, memoizing the scaled derivatives
    f^(k)(c)/k! at every node it has seen. Reuse one evaluator when many
    divided differences share nodes (multiple operator integral kernels).
    """

    def __init__(self, f: FunctionModel, gap_rtol: float = None):
        self.f = f
        self.gap_rtol = float(_ddiff_config()['cluster']['gap_rtol']) if gap_rtol is None else gap_rtol
        self._taylor: Dict[Tuple[float, int], Scalar] = {}

    def taylor_coefficient(self, x: float, k: int) -> Scalar:
        """f^(k)(x)/k!"""
        key = (x, k)
        value = self._taylor.get(key)
        if value is None:
            value = self.f.eval_deriv(k, x) / math.factorial(k)
            self._taylor[key] = value
        return value

    def __call__(self, xs) -> Scalar:
        nodes = NodeList.coerce(xs)
        partition = cluster_nodes(nodes, self.gap_rtol)
        if partition.largest > 1:
            logger.debug(f"Confluent evaluation: clusters {partition.groups} for {nodes}")
        return self.newton_table(partition.confluent_nodes())

    def newton_table(self, z: List[float]) -> Scalar:
        """
        Top entry of the confluent Newton table over sorted nodes ``z`` whose
        repeated entries are bitwise equal.
        """
        column = [self.taylor_coefficient(x, 0) for x in z]
        n = len(z) - 1
        for k in range(1, n + 1):
            column = [
                self.taylor_coefficient(z[i], k) if z[i + k] == z[i]
                else (column[i + 1] - column[i]) / (z[i + k] - z[i])
                for i in range(n - k + 1)
            ]
        return column[0]

    def evaluate_rows(self, rows) -> np.ndarray:
        """
        f^[n] for every row of an (N, n+1) node array, with the clustering
        and confluent table of ``__call__`` applied row by row in bulk.
        """
        x = np.sort(np.asarray(rows, dtype=np.float64), axis=1)
        if x.ndim != 2 or x.shape[1] < 1:
            raise ValueError(f"Expected an (N, n+1) node array, got shape {x.shape}")
        if not np.all(np.isfinite(x)):
            raise ValueError("Divided difference nodes must be finite")
        z = self._confluent_rows(x)
        n = z.shape[1] - 1
        column = np.asarray(self.f.eval_deriv(0, z))
        for k in range(1, n + 1):
            left, right = z[:, :n - k + 1], z[:, k:]
            coincident = right == left
            gap = np.where(coincident, 1.0, right - left)
            column = (column[:, 1:] - column[:, :-1]) / gap
            if coincident.any():
                taylor = np.asarray(self.f.eval_deriv(k, left[coincident])) / math.factorial(k)
                column = column.astype(np.result_type(column, taylor))
                column[coincident] = taylor
        return column[:, 0]

    def _confluent_rows(self, x: np.ndarray) -> np.ndarray:
        """Sorted rows with every chain-linked cluster replaced by its mean."""
        threshold = self.gap_rtol * (1.0 + np.max(np.abs(x), axis=1, keepdims=True))
        linked = np.diff(x, axis=1) <= threshold
        if not linked.any():
            return x
        groups = np.concatenate([np.zeros((x.shape[0], 1), dtype=np.intp),
                                 np.cumsum(~linked, axis=1)], axis=1)
        means = np.empty_like(x)
        for g in range(x.shape[1]):
            members = groups == g
            count = members.sum(axis=1)
            means[:, g] = np.where(members, x, 0.0).sum(axis=1) / np.maximum(count, 1)
        return np.take_along_axis(means, groups, axis=1)


def divided_difference(f: FunctionModel, xs) -> Scalar:
    """
    Value of f^[n](x_0, ..., x_n).

    Exact Newton recursion on well separated nodes, confluent (derivative
    based) evaluation inside clusters; the result does not depend on the
    order of the nodes.

    Raises:
        OrderExceededError: if a cluster needs a derivative beyond f.max_order
    """
    return DividedDifferenceEvaluator(f)(xs)


def _simplex_rule(order: int, points_per_axis: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Tensor Gauss-Legendre rule on the unit simplex {s_j >= 0, sum s_j <= 1}
    via the collapsed substitution s_1 = u_1, s_2 = (1-u_1) u_2, ...

    Returns:
        (points, weights): points has shape (N, order) with columns s_1..s_n
    """
    nodes, weights = np.polynomial.legendre.leggauss(points_per_axis)
    nodes = 0.5 * (nodes + 1.0)
    weights = 0.5 * weights

    axes = np.meshgrid(*([nodes] * order), indexing='ij')
    axis_weights = np.meshgrid(*([weights] * order), indexing='ij')
    u = [axis.reshape(-1) for axis in axes]
    w = np.prod([axis.reshape(-1) for axis in axis_weights], axis=0)

    # ds_j/du_j = (1-u_1)...(1-u_{j-1}); the Jacobian is the product over j.
    remaining = np.ones_like(u[0])
    jacobian = np.ones_like(u[0])
    s = []
    for j in range(order):
        jacobian = jacobian * remaining
        s.append(remaining * u[j])
        remaining = remaining * (1.0 - u[j])
    return np.stack(s, axis=1), w * jacobian


def dd_simplex_oracle(f: FunctionModel, order: int, xs) -> Scalar:
    """
    f^[n](x_0..x_n) as the simplex integral of f^(n)(sum_j s_j x_j),
    s_0 = 1 - sum_{j>=1} s_j, by iterated Gauss-Legendre quadrature.

    Raises:
        UnsupportedOrderError: for n > 3
        OrderExceededError: if n > f.max_order
    """
    nodes = NodeList.coerce(xs)
    config = _ddiff_config()['quadrature']
    if order != nodes.order:
        raise ValueError(f"Order {order} does not match {len(nodes)} nodes")
    if order > int(config['max_order']):
        raise UnsupportedOrderError(
            f"Simplex quadrature oracle supports orders up to {config['max_order']}, got {order}"
        )
    if order == 0:
        return f.eval_deriv(0, nodes.nodes[0])

    s, weights = _simplex_rule(order, int(config['points_per_axis']))
    s0 = 1.0 - s.sum(axis=1)
    points = s0 * nodes.nodes[0] + s @ nodes.nodes[1:]
    values = np.asarray(f.eval_deriv(order, points))
    result = np.sum(values * weights)
    return complex(result) if np.iscomplexobj(result) else float(result)


def recursion_sides(f: FunctionModel, xs, slot: int) -> Tuple[Scalar, Scalar]:
    """
    Both sides of f^[n](xs)(x_{j-1} - x_j) = f^[n-1](xs without x_j) - f^[n-1](xs without x_{j-1}).
    """
    nodes = NodeList.coerce(xs)
    if nodes.order < 1:
        raise ValueError("The recursion identity needs order >= 1")
    if not 1 <= slot <= nodes.order:
        raise ValueError(f"Slot must lie in [1, {nodes.order}], got {slot}")
    evaluator = DividedDifferenceEvaluator(f)
    x = nodes.nodes
    lhs = evaluator(nodes) * (x[slot - 1] - x[slot])
    rhs = evaluator(nodes.drop(slot)) - evaluator(nodes.drop(slot - 1))
    return lhs, rhs


def dd_recursion_residual(f: FunctionModel, xs, slot: int) -> float:
    """|f^[n](xs)(x_{j-1} - x_j) - (f^[n-1](xs drop j) - f^[n-1](xs drop j-1))|"""
    lhs, rhs = recursion_sides(f, xs, slot)
    return abs(lhs - rhs)


def product_sides(f: FunctionModel, g: FunctionModel, xs) -> Tuple[Scalar, Scalar]:
    """
    Both sides of the product rule
    f^[n](xs) g(x_0) = (gf)^[n](xs) - f(x_n) g^[n](xs) - sum_{l=1}^{n-1} g^[l](x_0..x_l) f^[n-l](x_l..x_n).
    """
    nodes = NodeList.coerce(xs)
    n = nodes.order
    x = nodes.nodes
    f_dd = DividedDifferenceEvaluator(f)
    g_dd = DividedDifferenceEvaluator(g)
    gf_dd = DividedDifferenceEvaluator(product_model(f, g))

    lhs = f_dd(nodes) * g.eval_deriv(0, x[0])
    rhs = gf_dd(nodes) - f.eval_deriv(0, x[n]) * g_dd(nodes)
    for l in range(1, n):
        rhs = rhs - g_dd(x[:l + 1]) * f_dd(x[l:])
    return lhs, rhs


def dd_product_residual(f: FunctionModel, g: FunctionModel, xs) -> float:
    """Absolute residual of the divided-difference product rule; see ``product_sides``."""
    lhs, rhs = product_sides(f, g, xs)
    return abs(lhs - rhs)


def coincident_value(f: FunctionModel, x: float, order: int) -> Scalar:
    """f^(n)(x)/n!, the value of f^[n] at n+1 coincident nodes."""
    return f.eval_deriv(order, x) / math.factorial(order)

