"""Monotone policy formulas and their linear secret sharing (LSS) matrices.

Grammar (operators case-insensitive, AND binds tighter than OR, chains are
left-folded into binary gates)::

    expr   := term   | expr "OR" term
    term   := factor | term "AND" factor
    factor := ATTR   | "(" expr ")"

Matrices follow the counter-labeling construction: the root gets (1); OR
children inherit the parent vector; an AND pads its vector v to the current
counter c, labels the left child v|1 and the right child (0,...,0)|-1, then
increments c. Leaf vectors, zero-padded, are the rows in left-to-right order.
"""

from __future__ import annotations

import re
import struct
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union

from .errors import DimensionError, EncodingError, PolicySyntaxError


class GateKind(str, Enum):
    AND = "AND"
    OR = "OR"


@dataclass(frozen=True)
class Leaf:
    attribute: str

    def __str__(self) -> str:
        return self.attribute


@dataclass(frozen=True)
class Gate:
    kind: GateKind
    left: "Node"
    right: "Node"

    def __str__(self) -> str:
        return f"{self.kind.value}({self.left}, {self.right})"


Node = Union[Leaf, Gate]


@dataclass(frozen=True)
class PolicyFormula:
    root: Node

    def leaves(self) -> List[str]:
        """Attribute labels in left-to-right leaf order (duplicates kept)."""
        out: List[str] = []
        stack: List[Node] = [self.root]
        while stack:
            node = stack.pop()
            if isinstance(node, Leaf):
                out.append(node.attribute)
            else:
                stack.append(node.right)
                stack.append(node.left)
        return out

    def attributes(self) -> FrozenSet[str]:
        return frozenset(self.leaves())

    def evaluate(self, owned: Iterable[str]) -> bool:
        owned = frozenset(owned)

        def walk(node: Node) -> bool:
            if isinstance(node, Leaf):
                return node.attribute in owned
            if node.kind == GateKind.AND:
                return walk(node.left) and walk(node.right)
            return walk(node.left) or walk(node.right)

        return walk(self.root)

    def to_text(self) -> str:
        """Infix rendering that parses back to the same tree."""

        def render(node: Node) -> str:
            if isinstance(node, Leaf):
                return node.attribute
            return f"({render(node.left)} {node.kind.value} {render(node.right)})"

        text = render(self.root)
        if isinstance(self.root, Gate):
            text = text[1:-1]
        return text

    def __str__(self) -> str:
        return str(self.root)


# -- parsing -------------------------------------------------------------------

_TOKEN = re.compile(r"\s+|\(|\)|[^\s()]+")


@dataclass(frozen=True)
class _Token:
    kind: str  # "(" | ")" | "AND" | "OR" | "ATTR" | "END"
    text: str
    offset: int


def _tokenize(text: str) -> List[_Token]:
    tokens: List[_Token] = []
    for match in _TOKEN.finditer(text):
        lexeme = match.group(0)
        if lexeme.isspace():
            continue
        offset = len(text[: match.start()].encode("utf-8"))
        upper = lexeme.upper()
        if lexeme in ("(", ")"):
            tokens.append(_Token(lexeme, lexeme, offset))
        elif upper in ("AND", "OR"):
            tokens.append(_Token(upper, lexeme, offset))
        else:
            tokens.append(_Token("ATTR", lexeme, offset))
    tokens.append(_Token("END", "", len(text.encode("utf-8"))))
    return tokens


class _Parser:
    def __init__(self, tokens: List[_Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def take(self) -> _Token:
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def expr(self) -> Node:
        node = self.term()
        while self.peek().kind == "OR":
            self.take()
            node = Gate(GateKind.OR, node, self.term())
        return node

    def term(self) -> Node:
        node = self.factor()
        while self.peek().kind == "AND":
            self.take()
            node = Gate(GateKind.AND, node, self.factor())
        return node

    def factor(self) -> Node:
        token = self.take()
        if token.kind == "ATTR":
            return Leaf(token.text)
        if token.kind == "(":
            node = self.expr()
            closing = self.take()
            if closing.kind != ")":
                raise PolicySyntaxError(_describe("expected ')'", closing), closing.offset)
            return node
        raise PolicySyntaxError(_describe("expected attribute or '('", token), token.offset)


def _describe(message: str, token: _Token) -> str:
    found = "end of input" if token.kind == "END" else repr(token.text)
    return f"{message}, found {found}"


def parse_policy(text: str) -> PolicyFormula:
    """Parse policy text into a binary AND/OR tree."""
    tokens = _tokenize(text)
    if tokens[0].kind == "END":
        raise PolicySyntaxError("empty policy", 0)
    parser = _Parser(tokens)
    root = parser.expr()
    trailing = parser.peek()
    if trailing.kind != "END":
        raise PolicySyntaxError(_describe("unexpected token", trailing), trailing.offset)
    return PolicyFormula(root)


# -- LSS matrices --------------------------------------------------------------


def controller_of(attribute: str) -> str:
    """Default controller convention: the label prefix before the first dot."""
    return attribute.split(".", 1)[0]


@dataclass(frozen=True)
class AccessPolicy:
    """Share-generating matrix A over Z_p with row labels delta and rho."""

    matrix: Tuple[Tuple[int, ...], ...]
    delta: Tuple[str, ...]
    rho: Tuple[str, ...]
    order: int

    def __post_init__(self):
        if not self.matrix or not self.matrix[0]:
            raise DimensionError("access matrix must have at least one row and column")
        width = len(self.matrix[0])
        if any(len(row) != width for row in self.matrix):
            raise DimensionError("access matrix rows differ in length")
        if width > len(self.matrix):
            raise DimensionError("access matrix has more columns than rows")
        if len(self.delta) != len(self.matrix) or len(self.rho) != len(self.matrix):
            raise DimensionError("every row needs an attribute and a controller label")
        if any(not 0 <= v < self.order for row in self.matrix for v in row):
            raise DimensionError("matrix entries must be reduced mod p")

    @property
    def rows(self) -> int:
        return len(self.matrix)

    @property
    def cols(self) -> int:
        return len(self.matrix[0])

    def signed(self) -> List[List[int]]:
        """Matrix with entries lifted to the symmetric range, for display."""
        half = self.order // 2
        return [[v - self.order if v > half else v for v in row] for row in self.matrix]

    @property
    def scalar_width(self) -> int:
        return (self.order.bit_length() + 7) // 8

    def to_bytes(self) -> bytes:
        """Policy block: l, n (u32 each), row-major scalars, then length-prefixed delta labels."""
        width = self.scalar_width
        out = bytearray(struct.pack(">II", self.rows, self.cols))
        for row in self.matrix:
            for v in row:
                out += v.to_bytes(width, "big")
        for attr in self.delta:
            label = attr.encode("utf-8")
            out += struct.pack(">I", len(label)) + label
        return bytes(out)

    @classmethod
    def from_bytes_prefix(
        cls,
        data: bytes,
        offset: int,
        order: int,
        controller_map: Optional[Callable[[str], str]] = None,
    ) -> "Tuple[AccessPolicy, int]":
        """Decode a policy block at ``offset``; rho is re-derived from the controller map."""
        controller_map = controller_map or controller_of
        width = (order.bit_length() + 7) // 8
        if len(data) - offset < 8:
            raise EncodingError("truncated policy header")
        rows, cols = struct.unpack_from(">II", data, offset)
        pos = offset + 8
        if rows == 0 or cols == 0 or cols > rows:
            raise EncodingError(f"invalid policy dimensions {rows}x{cols}")
        if pos + rows * cols * width > len(data):
            raise EncodingError("truncated policy matrix")
        matrix = []
        for _ in range(rows):
            row = []
            for _ in range(cols):
                row.append(int.from_bytes(data[pos:pos + width], "big"))
                pos += width
            matrix.append(tuple(row))
        delta = []
        for _ in range(rows):
            if len(data) - pos < 4:
                raise EncodingError("truncated attribute label")
            (length,) = struct.unpack_from(">I", data, pos)
            pos += 4
            if pos + length > len(data):
                raise EncodingError("truncated attribute label")
            try:
                delta.append(bytes(data[pos:pos + length]).decode("utf-8"))
            except UnicodeDecodeError as exc:
                raise EncodingError(f"attribute label is not UTF-8: {exc}")
            pos += length
        try:
            policy = cls(
                matrix=tuple(matrix),
                delta=tuple(delta),
                rho=tuple(controller_map(a) for a in delta),
                order=order,
            )
        except DimensionError as exc:
            raise EncodingError(str(exc))
        return policy, pos


def compile_lss(
    formula: PolicyFormula, p: int, controller_map: Optional[Callable[[str], str]] = None
) -> AccessPolicy:
    """Label the access tree and collect leaf vectors as the rows of A."""
    controller_map = controller_map or controller_of
    rows: List[Tuple[List[int], str]] = []
    counter = 1

    def label(node: Node, vector: List[int]) -> None:
        nonlocal counter
        if isinstance(node, Leaf):
            rows.append((vector, node.attribute))
        elif node.kind == GateKind.OR:
            label(node.left, vector)
            label(node.right, vector)
        else:
            padded = vector + [0] * (counter - len(vector))
            left = padded + [1]
            right = [0] * counter + [-1]
            counter += 1
            label(node.left, left)
            label(node.right, right)

    label(formula.root, [1])
    width = counter
    matrix = tuple(tuple(v % p for v in vec + [0] * (width - len(vec))) for vec, _ in rows)
    delta = tuple(attr for _, attr in rows)
    rho = tuple(controller_map(attr) for attr in delta)
    return AccessPolicy(matrix=matrix, delta=delta, rho=rho, order=p)


def _shares(policy: AccessPolicy, head: int, randomness: Sequence[int]) -> Tuple[int, ...]:
    if len(randomness) != policy.cols - 1:
        raise DimensionError(
            f"policy with {policy.cols} columns needs {policy.cols - 1} random scalars, "
            f"got {len(randomness)}"
        )
    vector = [head % policy.order] + [r % policy.order for r in randomness]
    return tuple(
        sum(a * v for a, v in zip(row, vector)) % policy.order for row in policy.matrix
    )


def share_secret(policy: AccessPolicy, z: int, randomness: Sequence[int]) -> Tuple[int, ...]:
    """lambda = A (z, v_2, ..., v_n)^T mod p."""
    return _shares(policy, z, randomness)


def share_zero(policy: AccessPolicy, randomness: Sequence[int]) -> Tuple[int, ...]:
    """Shares of zero: A (0, w_2, ..., w_n)^T mod p."""
    return _shares(policy, 0, randomness)


# -- reconstruction ------------------------------------------------------------


@dataclass(frozen=True)
class Reconstruction:
    rows: Tuple[int, ...]
    coefficients: Tuple[int, ...]

    def combine(self, shares: Sequence[int], p: int) -> int:
        return sum(c * shares[x] for x, c in zip(self.rows, self.coefficients)) % p


def _solve(policy: AccessPolicy, candidates: Sequence[int]) -> Optional[Dict[int, int]]:
    """Find c with sum_x c_x A_x = (1,0,...,0) over Z_p by Gauss-Jordan elimination.

    Pivots are taken in candidate order and free variables are set to zero.
    """
    if not candidates:
        return None
    p, n, k = policy.order, policy.cols, len(candidates)
    system = [
        [policy.matrix[x][j] for x in candidates] + [1 if j == 0 else 0] for j in range(n)
    ]
    pivots: List[int] = []
    r = 0
    for col in range(k):
        if r == n:
            break
        pivot = next((i for i in range(r, n) if system[i][col]), None)
        if pivot is None:
            continue
        system[r], system[pivot] = system[pivot], system[r]
        inv = pow(system[r][col], -1, p)
        system[r] = [(v * inv) % p for v in system[r]]
        for i in range(n):
            factor = system[i][col]
            if i != r and factor:
                system[i] = [(a - factor * b) % p for a, b in zip(system[i], system[r])]
        pivots.append(col)
        r += 1
    if any(system[i][k] for i in range(r, n)):
        return None
    return {candidates[col]: system[i][k] for i, col in enumerate(pivots)}


def reconstruct_from_rows(policy: AccessPolicy, rows: Iterable[int]) -> Optional[Reconstruction]:
    """Inclusion-minimal row subset of ``rows`` spanning (1,0,...,0), or None.

    A first elimination picks a support in leaf order; rows are then dropped
    from the back while the remainder still spans the target vector.
    """
    candidates = sorted(set(rows))
    solution = _solve(policy, candidates)
    if solution is None:
        return None
    support = [x for x in candidates if solution.get(x)]
    for x in reversed(list(support)):
        trial = [y for y in support if y != x]
        if _solve(policy, trial) is not None:
            support = trial
    final = _solve(policy, support)
    if final is None:  # pragma: no cover - support always spans here
        return None
    return Reconstruction(rows=tuple(support), coefficients=tuple(final[x] for x in support))


def reconstruction_coefficients(
    policy: AccessPolicy, owned: Iterable[str]
) -> Optional[Reconstruction]:
    """Rows and coefficients reconstructing the secret, or None when UNSATISFIED."""
    owned = frozenset(owned)
    rows = [x for x, attr in enumerate(policy.delta) if attr in owned]
    return reconstruct_from_rows(policy, rows)
