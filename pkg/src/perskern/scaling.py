"""Diagram scaling maps and the variably scaled wrapper for diagram kernels.

A scaling map sends a diagram to a diagram, so any kernel can be precomposed
with it: the wrapped kernel evaluates the base kernel on the scaled inputs.
Two map families are provided: ``augment`` adds one weighted centre to the
diagram, ``compress`` keeps the most persistent pairs and collapses the rest
into their centre.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .diagram import PersistenceDiagram

AUX_CHOICES = ("mass", "persistence")


def centre_of_uniform_mass(diagram: PersistenceDiagram) -> tuple[float, float]:
    """Plain mean of the stored pairs, counted with multiplicity."""
    if len(diagram) == 0:
        raise ValueError("diagram has no off-diagonal mass")
    b, d = diagram.points.mean(axis=0)
    return float(b), float(d)


def centre_of_persistence(diagram: PersistenceDiagram) -> tuple[float, float]:
    """Mean of the stored pairs weighted by their lifetimes."""
    if len(diagram) == 0:
        raise ValueError("diagram has no off-diagonal mass")
    w = diagram.persistences
    b, d = (w[:, None] * diagram.points).sum(axis=0) / w.sum()
    return float(b), float(d)


def _centre(diagram: PersistenceDiagram, aux: str) -> tuple[float, float]:
    if aux == "mass":
        return centre_of_uniform_mass(diagram)
    if aux == "persistence":
        return centre_of_persistence(diagram)
    raise ValueError(f"unknown auxiliary centre {aux!r}; expected one of {AUX_CHOICES}")


def top_persistent(diagram: PersistenceDiagram, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Split the points into the k most persistent ones and the remainder.

    Ties at rank k break towards smaller birth, then towards input order, so
    the split is deterministic.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    pts = diagram.points
    if len(pts) <= k:
        return pts, pts[:0]
    order = np.lexsort((np.arange(len(pts)), pts[:, 0], -(pts[:, 1] - pts[:, 0])))
    return pts[np.sort(order[:k])], pts[np.sort(order[k:])]


@dataclass(frozen=True)
class ScalingSpec:
    """Which scaling map to apply: variant, auxiliary centre, compress rank."""

    variant: str  # "augment" | "compress"
    aux: str = "persistence"
    rho: int | None = None

    def __post_init__(self):
        if self.variant not in ("augment", "compress"):
            raise ValueError(f"unknown scaling variant {self.variant!r}")
        if self.aux not in AUX_CHOICES:
            raise ValueError(f"unknown auxiliary centre {self.aux!r}")
        if self.variant == "compress":
            if self.rho is None or self.rho < 1:
                raise ValueError("compress requires rho >= 1")

    def describe(self) -> str:
        if self.variant == "augment":
            return f"augment({self.aux})"
        return f"compress(rho={self.rho},{self.aux})"


def apply_scaling(diagram: PersistenceDiagram, spec: ScalingSpec) -> PersistenceDiagram:
    """Apply one scaling map to a diagram.

    augment: the original pairs plus their centre (an empty diagram stays
    empty). compress: the rho most persistent pairs plus the centre of the
    remainder; a diagram with at most rho pairs is returned unchanged, since
    there is nothing to compress. Centres of nonempty diagrams always lie
    strictly above the bisector, so the result is a valid diagram.
    """
    if spec.variant == "augment":
        if len(diagram) == 0:
            return diagram
        centre = _centre(diagram, spec.aux)
        pts = np.vstack([diagram.points, [centre]])
        return PersistenceDiagram(pts, dim=diagram.dim)
    kept, rest = top_persistent(diagram, spec.rho)
    if len(rest) == 0:
        return diagram
    centre = _centre(PersistenceDiagram(rest, dim=diagram.dim), spec.aux)
    pts = np.vstack([kept, [centre]])
    return PersistenceDiagram(pts, dim=diagram.dim)


class ScaledKernel:
    """A diagram kernel precomposed with a scaling map.

    Evaluation equals ``base(scale(D1), scale(D2))`` exactly. Scaled diagrams
    are cached per input diagram, and Gram computation scales the whole
    diagram list once before delegating to the base kernel, so the map runs
    once per diagram rather than once per pair.
    """

    def __init__(self, base, spec: ScalingSpec):
        self.base = base
        self.spec = spec
        self._cache: dict[int, tuple[PersistenceDiagram, PersistenceDiagram]] = {}

    def scale(self, diagram: PersistenceDiagram) -> PersistenceDiagram:
        hit = self._cache.get(id(diagram))
        if hit is not None and hit[0] is diagram:
            return hit[1]
        scaled = apply_scaling(diagram, self.spec)
        self._cache[id(diagram)] = (diagram, scaled)
        return scaled

    def __call__(self, d1: PersistenceDiagram, d2: PersistenceDiagram) -> float:
        return self.base(self.scale(d1), self.scale(d2))

    def gram(self, diagrams) -> np.ndarray:
        scaled = [self.scale(d) for d in diagrams]
        return self.base.gram(scaled)

    def describe(self) -> dict:
        out = dict(self.base.describe())
        out["scaling"] = self.spec.describe()
        return out


def scaled_kernel(base, spec: ScalingSpec | None) -> object:
    """Wrap a kernel with a scaling map; ``spec=None`` returns the base."""
    if spec is None:
        return base
    return ScaledKernel(base, spec)
