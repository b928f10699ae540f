"""Immutable binary syntax trees over {AND, OR} and variables x1..xn.

A tree is either ``None`` (the empty tree), a :class:`Leaf` or a :class:`Node`.
Nodes are addressed by root-to-node paths: tuples of 0 (left) / 1 (right).
"""
from __future__ import annotations

import enum
import re
from typing import Iterator, Optional, Union

MAX_VARIABLES = 10**6


class FunctionKind(enum.Enum):
    AND = "and"
    OR = "or"


AND = FunctionKind.AND
OR = FunctionKind.OR


class Leaf:
    __slots__ = ("var", "memo")

    leaves = 1
    size = 1

    def __init__(self, var: int):
        if not 1 <= var <= MAX_VARIABLES:
            raise ValueError(f"variable index out of range: {var}")
        self.var = var
        self.memo = None

    def __eq__(self, other):
        return isinstance(other, Leaf) and other.var == self.var

    def __hash__(self):
        return hash(self.var)

    def __reduce__(self):
        return Leaf, (self.var,)

    def __repr__(self):
        return f"Leaf({self.var})"


class Node:
    __slots__ = ("kind", "left", "right", "leaves", "size", "memo", "_hash")

    def __init__(self, kind: FunctionKind, left: "Tree", right: "Tree"):
        if left is None or right is None:
            raise ValueError("internal nodes need two children")
        self.kind = kind
        self.left = left
        self.right = right
        self.leaves = left.leaves + right.leaves
        self.size = 2 * self.leaves - 1
        self.memo = None
        self._hash = None

    def __eq__(self, other):
        if self is other:
            return True
        return (isinstance(other, Node) and other.kind is self.kind
                and other.leaves == self.leaves
                and other.left == self.left and other.right == self.right)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.kind, self.left, self.right))
        return self._hash

    def __reduce__(self):
        # evaluation memos are process-local
        return Node, (self.kind, self.left, self.right)

    def __repr__(self):
        return f"Node({self.kind.value}, {self.left!r}, {self.right!r})"


Tree = Optional[Union[Leaf, Node]]
Path = tuple


def leaf_count(tree: Tree) -> int:
    return 0 if tree is None else tree.leaves


def node_count(tree: Tree) -> int:
    return 0 if tree is None else tree.size


def iter_nodes(tree: Tree) -> Iterator[tuple[Path, Union[Leaf, Node]]]:
    """Pre-order (path, node) pairs."""
    if tree is None:
        return
    stack = [((), tree)]
    while stack:
        path, node = stack.pop()
        yield path, node
        if isinstance(node, Node):
            stack.append((path + (1,), node.right))
            stack.append((path + (0,), node.left))


def iter_leaves(tree: Tree) -> Iterator[Leaf]:
    if tree is None:
        return
    stack = [tree]
    while stack:
        node = stack.pop()
        if isinstance(node, Leaf):
            yield node
        else:
            stack.append(node.right)
            stack.append(node.left)


def distinct_variables(tree: Tree) -> set[int]:
    return {leaf.var for leaf in iter_leaves(tree)}


def or_count(tree: Tree) -> int:
    return sum(1 for _, node in iter_nodes(tree)
               if isinstance(node, Node) and node.kind is OR)


def max_variable(tree: Tree) -> int:
    return max((leaf.var for leaf in iter_leaves(tree)), default=0)


def conjunction(variables) -> Tree:
    """Left-nested AND chain over ``variables`` (empty input gives the empty tree)."""
    tree = None
    for v in variables:
        tree = Leaf(v) if tree is None else Node(AND, tree, Leaf(v))
    return tree


def relabel_canonical(tree: Tree) -> Tree:
    """Rename variables to 1, 2, ... in order of first appearance (pre-order)."""
    names = {}

    def walk(node):
        if isinstance(node, Leaf):
            if node.var not in names:
                names[node.var] = len(names) + 1
            return Leaf(names[node.var])
        left = walk(node.left)
        return Node(node.kind, left, walk(node.right))

    return None if tree is None else walk(tree)


# --- addressing -------------------------------------------------------------

def node_at(tree: Tree, path: Path):
    node = tree
    if node is None:
        raise LookupError("no nodes")
    for step in path:
        if not isinstance(node, Node) or step not in (0, 1):
            raise LookupError(f"invalid path {path!r}")
        node = node.right if step else node.left
    return node


def replace_at(tree: Tree, path: Path, new: Tree) -> Tree:
    """Return a copy of ``tree`` with the node at ``path`` replaced by ``new``.

    Untouched subtrees are shared with the input.
    """
    if not path:
        return new
    if new is None:
        raise ValueError("cannot place the empty tree below the root")
    spine = []
    node = tree
    for step in path:
        if not isinstance(node, Node) or step not in (0, 1):
            raise LookupError(f"invalid path {path!r}")
        spine.append(node)
        node = node.right if step else node.left
    for parent, step in zip(reversed(spine), reversed(path)):
        if step:
            new = Node(parent.kind, parent.left, new)
        else:
            new = Node(parent.kind, new, parent.right)
    return new


def path_of_node(tree: Tree, index: int) -> Path:
    """Path of the ``index``-th node in pre-order."""
    if tree is None:
        raise LookupError("no nodes")
    if not 0 <= index < tree.size:
        raise IndexError(index)
    path = []
    node = tree
    while index:
        index -= 1
        if index < node.left.size:
            path.append(0)
            node = node.left
        else:
            index -= node.left.size
            path.append(1)
            node = node.right
    return tuple(path)


def path_of_leaf(tree: Tree, index: int) -> Path:
    """Path of the ``index``-th leaf from the left."""
    if tree is None:
        raise LookupError("no nodes")
    if not 0 <= index < tree.leaves:
        raise IndexError(index)
    path = []
    node = tree
    while isinstance(node, Node):
        if index < node.left.leaves:
            path.append(0)
            node = node.left
        else:
            index -= node.left.leaves
            path.append(1)
            node = node.right
    return tuple(path)


def uniform_random_node(tree: Tree, rng) -> Path:
    if tree is None:
        raise LookupError("no nodes")
    return path_of_node(tree, rng.randrange(tree.size))


def uniform_random_leaf(tree: Tree, rng) -> Path:
    if tree is None:
        raise LookupError("no nodes")
    return path_of_leaf(tree, rng.randrange(tree.leaves))


def random_tree(n: int, leaves: int, rng, or_probability: float = 0.5) -> Tree:
    """Random tree shape with ``leaves`` leaves, uniform variables in 1..n."""
    if leaves <= 0:
        return None
    if leaves == 1:
        return Leaf(rng.randrange(n) + 1)
    k = rng.randrange(1, leaves)
    kind = OR if rng.random() < or_probability else AND
    return Node(kind, random_tree(n, k, rng, or_probability),
                random_tree(n, leaves - k, rng, or_probability))


# --- s-expressions ----------------------------------------------------------

class ParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


_TOKEN = re.compile(r"\s*(?:(\()|(\))|(and|or)\b|x(\d+)\b)")


def serialize(tree: Tree) -> str:
    if tree is None:
        return "()"
    out = []
    stack = [tree]
    while stack:
        item = stack.pop()
        if isinstance(item, str):
            out.append(item)
        elif isinstance(item, Leaf):
            out.append(f"x{item.var}")
        else:
            out.append(f"({item.kind.value} ")
            stack.extend((")", item.right, " ", item.left))
    return "".join(out)


def parse(text: str) -> Tree:
    tokens = []
    pos = 0
    end = len(text.rstrip())
    while pos < end:
        m = _TOKEN.match(text, pos)
        if m is None:
            while text[pos].isspace():
                pos += 1
            raise ParseError("unexpected character", pos)
        start = m.end() - len(m.group(0).lstrip())
        tokens.append((m.lastindex, m.group(m.lastindex), start))
        pos = m.end()
    if not tokens:
        raise ParseError("empty input", 0)
    if len(tokens) == 2 and tokens[0][0] == 1 and tokens[1][0] == 2:
        return None

    i = 0

    def expr():
        nonlocal i
        if i >= len(tokens):
            raise ParseError("unexpected end of input", len(text))
        kind, value, at = tokens[i]
        if kind == 4:
            i += 1
            try:
                return Leaf(int(value))
            except ValueError as exc:
                raise ParseError(str(exc), at) from None
        if kind != 1:
            raise ParseError(f"unexpected token {value!r}", at)
        i += 1
        if i >= len(tokens) or tokens[i][0] != 3:
            at = tokens[i][2] if i < len(tokens) else len(text)
            raise ParseError("expected 'and' or 'or'", at)
        func = FunctionKind(tokens[i][1])
        i += 1
        left = expr()
        right = expr()
        if i >= len(tokens) or tokens[i][0] != 2:
            at = tokens[i][2] if i < len(tokens) else len(text)
            raise ParseError("expected ')'", at)
        i += 1
        return Node(func, left, right)

    tree = expr()
    if i != len(tokens):
        raise ParseError("trailing input", tokens[i][2])
    return tree
