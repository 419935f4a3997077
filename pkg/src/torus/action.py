import json
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple

from pydantic import model_validator

from ..core.errors import DomainError
from ..core.exact import ExactModel, parse_rational

Vector = Tuple[Fraction, ...]


def dot(u: Sequence, v: Sequence):
    return sum(a * b for a, b in zip(u, v))


class WeightedAction(ExactModel):
    """Torus weights on the coordinates of a point of projective space.

    ``support[j]`` records whether the j-th coordinate of the point is nonzero;
    only supported weights enter any computation.
    """

    dimension: int
    weights: Tuple[Tuple[int, ...], ...]
    support: Tuple[bool, ...]

    @model_validator(mode="after")
    def _check(self) -> "WeightedAction":
        if self.dimension < 1:
            raise DomainError("torus dimension must be positive", {"dimension": self.dimension})
        if len(self.support) != len(self.weights):
            raise DomainError("one support flag per weight")
        if any(len(w) != self.dimension for w in self.weights):
            raise DomainError("weight vectors must have the torus dimension", {"dimension": self.dimension})
        if not any(self.support):
            raise DomainError("no supported weight")
        return self

    @classmethod
    def from_weights(cls, weights: Sequence[Sequence[int]], support: Optional[Sequence[bool]] = None) -> "WeightedAction":
        rows = tuple(tuple(int(c) for c in (w if isinstance(w, (list, tuple)) else [w])) for w in weights)
        if not rows:
            raise DomainError("no weights given")
        return cls(
            dimension=len(rows[0]),
            weights=rows,
            support=tuple(support) if support is not None else (True,) * len(rows),
        )

    @property
    def supported(self) -> List[Vector]:
        return [tuple(Fraction(c) for c in w) for w, s in zip(self.weights, self.support) if s]

    def transformed(self, matrix: Sequence[Sequence[int]]) -> "WeightedAction":
        """Apply an integer change of basis of the weight lattice."""
        rows = tuple(tuple(sum(m * c for m, c in zip(row, w)) for row in matrix) for w in self.weights)
        return WeightedAction(dimension=self.dimension, weights=rows, support=self.support)


def hm_weight(action: WeightedAction, xi: Sequence) -> Fraction:
    """Hilbert–Mumford weight: max over supported weights of ⟨ξ, α⟩."""
    xi = tuple(Fraction(c) for c in xi)
    if len(xi) != action.dimension:
        raise DomainError("direction has the wrong dimension", {"expected": action.dimension, "got": len(xi)})
    if all(c == 0 for c in xi):
        raise DomainError("the zero direction has no weight")
    return max(dot(xi, w) for w in action.supported)


def binary_form_action(n: int, r: int, s: int) -> WeightedAction:
    """Diagonal-torus weights of a degree-n binary form vanishing to order r at
    [0:1] and order s at [1:0]; the remaining roots are generic, so every
    monomial x^i y^(n-i) with r ≤ i ≤ n-s appears, with weight 2i - n."""
    if n < 1 or r < 0 or s < 0 or r + s > n:
        raise DomainError("root multiplicities exceed the degree", {"n": n, "r": r, "s": s})
    return WeightedAction.from_weights([[2 * i - n] for i in range(r, n - s + 1)])


def action_from_json(data: Dict[str, Any]) -> WeightedAction:
    try:
        weights = data["weights"]
        dimension = int(data.get("dimension", len(weights[0])))
        support = data.get("support")
    except (KeyError, IndexError, TypeError) as e:
        raise DomainError("malformed action document") from e
    action = WeightedAction.from_weights(weights, support)
    if action.dimension != dimension:
        raise DomainError("declared dimension does not match the weights")
    return action


def load_action(path: str) -> WeightedAction:
    with open(path, "r") as f:
        return action_from_json(json.load(f))


def parse_vector(text: str) -> Vector:
    """Parse ``"1,-1/2"`` or a JSON list into a rational vector."""
    text = text.strip()
    if text.startswith("["):
        return tuple(parse_rational(str(c)) for c in json.loads(text))
    return tuple(parse_rational(c) for c in text.split(",") if c.strip())
