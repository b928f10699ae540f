"""HVL-Prime mutation with leaf-only or subtree deletion."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

from .tree import (AND, OR, FunctionKind, Leaf, Node, Tree, iter_nodes,
                   node_at, path_of_leaf, path_of_node, replace_at)

FUNCTIONS = (AND, OR)
NEIGHBORHOOD_CAP = 10**6


class Deletion(enum.Enum):
    LEAF = "leaf"
    SUBTREE = "subtree"


class Op(enum.Enum):
    INS = "ins"
    DEL = "del"
    SUB = "sub"


_OPS = (Op.INS, Op.DEL, Op.SUB)


@dataclass(frozen=True)
class MutationOutcome:
    offspring: Tree
    op: Op
    inserted_function: Optional[FunctionKind] = None
    inserted_variable: Optional[int] = None
    leaves_removed: int = 0


class NeighborhoodTooLarge(RuntimeError):
    pass


def insert_at(tree: Tree, path, func: FunctionKind, var: int, new_first: bool) -> Tree:
    """Replace the node at ``path`` by ``func(node, x_var)``."""
    old = node_at(tree, path)
    leaf = Leaf(var)
    new = Node(func, leaf, old) if new_first else Node(func, old, leaf)
    return replace_at(tree, path, new)


def delete_at(tree: Tree, path) -> Tree:
    """Replace the parent of the node at ``path`` with its sibling.

    Deleting the root yields the empty tree.
    """
    if not path:
        return None
    parent = node_at(tree, path[:-1])
    sibling = parent.left if path[-1] else parent.right
    return replace_at(tree, path[:-1], sibling)


def substitute_at(tree: Tree, path, var: int) -> Tree:
    old = node_at(tree, path)
    if not isinstance(old, Leaf):
        raise ValueError("substitution targets leaves only")
    if old.var == var:
        return tree
    return replace_at(tree, path, Leaf(var))


def hvl_prime(parent: Tree, variant: Deletion, n: int, rng) -> MutationOutcome:
    """One HVL-Prime mutation of ``parent``.

    op, the variable and the function are all drawn before branching, so the
    empty-tree case consumes the same randomness as the others. An identity
    substitution returns ``parent`` itself as offspring.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    op = _OPS[rng.randrange(3)]
    var = rng.randrange(n) + 1
    func = FUNCTIONS[rng.randrange(2)]

    if parent is None:
        return MutationOutcome(Leaf(var), Op.INS, inserted_variable=var)

    if op is Op.INS:
        path = path_of_node(parent, rng.randrange(parent.size))
        new_first = rng.randrange(2) == 1
        child = insert_at(parent, path, func, var, new_first)
        return MutationOutcome(child, op, inserted_function=func, inserted_variable=var)

    if op is Op.DEL:
        if variant is Deletion.SUBTREE:
            path = path_of_node(parent, rng.randrange(parent.size))
        else:
            path = path_of_leaf(parent, rng.randrange(parent.leaves))
        removed = node_at(parent, path).leaves
        return MutationOutcome(delete_at(parent, path), op, leaves_removed=removed)

    path = path_of_leaf(parent, rng.randrange(parent.leaves))
    return MutationOutcome(substitute_at(parent, path, var), op, inserted_variable=var)


def neighborhood_size(parent: Tree, variant: Deletion, n: int) -> int:
    if parent is None:
        return n
    dels = parent.size if variant is Deletion.SUBTREE else parent.leaves
    return 4 * n * parent.size + dels + n * parent.leaves


def enumerate_neighbors(parent: Tree, variant: Deletion, n: int,
                        cap: int = NEIGHBORHOOD_CAP) -> list[tuple[MutationOutcome, float]]:
    """Every (op, node, variable, function, order) outcome with its exact probability.

    Draws that do not influence the result (the variable and function for a
    deletion, the function for a substitution) are summed out.
    """
    if parent is None:
        raise ValueError("parent must be nonempty")
    if neighborhood_size(parent, variant, n) > cap:
        raise NeighborhoodTooLarge("neighborhood too large")
    nodes = list(iter_nodes(parent))
    leaves = [(p, v) for p, v in nodes if isinstance(v, Leaf)]
    out = []

    p_ins = 1.0 / (3 * n * 2 * len(nodes) * 2)
    for path, _ in nodes:
        for func in FUNCTIONS:
            for var in range(1, n + 1):
                for new_first in (False, True):
                    child = insert_at(parent, path, func, var, new_first)
                    out.append((MutationOutcome(child, Op.INS, func, var), p_ins))

    targets = nodes if variant is Deletion.SUBTREE else leaves
    p_del = 1.0 / (3 * len(targets))
    for path, node in targets:
        out.append((MutationOutcome(delete_at(parent, path), Op.DEL,
                                    leaves_removed=node.leaves), p_del))

    p_sub = 1.0 / (3 * n * len(leaves))
    for path, _ in leaves:
        for var in range(1, n + 1):
            out.append((MutationOutcome(substitute_at(parent, path, var), Op.SUB,
                                        inserted_variable=var), p_sub))
    return out
