"""
Closed-form Stieltjes transforms and densities used as ground truth.

Families (all centered):
    - semicircle(variance t)      : support [−2√t, 2√t]
    - arcsine(radius r)           : support [−r, r]
    - marchenko_pastur(ratio λ)   : unit-scale MP law shifted by its mean 1

The square root √(z − a)·√(z − b) with principal branches is analytic off
[a, b] and behaves like z at infinity, which selects Im m > 0 on the upper
half-plane for every family below.
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Tuple

import numpy as np

from freeconv.errors import EvaluationOnSupport, SpecError


class FamilyKind(str, Enum):
    SEMICIRCLE = "semicircle"
    ARCSINE = "arcsine"
    MARCHENKO_PASTUR = "marchenko_pastur"


@dataclass(frozen=True)
class ClosedFormFamily:
    kind: FamilyKind
    param: float
    support: Tuple[float, float]


def semicircle_family(variance: float = 1.0) -> ClosedFormFamily:
    r = 2.0 * math.sqrt(variance)
    return ClosedFormFamily(FamilyKind.SEMICIRCLE, float(variance), (-r, r))


def arcsine_family(radius: float = 2.0) -> ClosedFormFamily:
    return ClosedFormFamily(FamilyKind.ARCSINE, float(radius), (-radius, radius))


def marchenko_pastur_family(ratio: float) -> ClosedFormFamily:
    if not 0.0 < ratio < 1.0:
        raise SpecError(f"Marchenko-Pastur ratio must lie in (0, 1), got {ratio}")
    a, b = (1.0 - math.sqrt(ratio)) ** 2, (1.0 + math.sqrt(ratio)) ** 2
    return ClosedFormFamily(FamilyKind.MARCHENKO_PASTUR, float(ratio), (a - 1.0, b - 1.0))


def family_variance(fam: ClosedFormFamily) -> float:
    if fam.kind is FamilyKind.SEMICIRCLE:
        return fam.param
    if fam.kind is FamilyKind.ARCSINE:
        return fam.param**2 / 2.0
    return fam.param


def closed_form_support(fam: ClosedFormFamily) -> Tuple[float, float]:
    return fam.support


def _edge_root(z, a, b):
    return np.sqrt(z - a) * np.sqrt(z - b)


def closed_form_m(fam: ClosedFormFamily, z) -> complex:
    """Stieltjes transform of the family at z (scalar or array)."""
    z = np.asarray(z, dtype=complex)
    a, b = fam.support
    on_support = (z.imag == 0.0) & (z.real >= a) & (z.real <= b)
    if np.any(on_support):
        raise EvaluationOnSupport(f"closed form evaluated on its support [{a}, {b}]")

    if fam.kind is FamilyKind.SEMICIRCLE:
        t = fam.param
        m = (-z + _edge_root(z, a, b)) / (2.0 * t)
    elif fam.kind is FamilyKind.ARCSINE:
        m = -1.0 / _edge_root(z, a, b)
    else:
        lam = fam.param
        u = z + 1.0  # undo the centering
        m = (1.0 - lam - u + _edge_root(u, a + 1.0, b + 1.0)) / (2.0 * lam * u)
    return complex(m) if m.ndim == 0 else m


def closed_form_density(fam: ClosedFormFamily, x):
    x = np.asarray(x, dtype=float)
    a, b = fam.support
    inside = (x > a) & (x < b)
    xi = np.where(inside, x, 0.5 * (a + b))
    if fam.kind is FamilyKind.SEMICIRCLE:
        rho = np.sqrt((xi - a) * (b - xi)) / (2.0 * np.pi * fam.param)
    elif fam.kind is FamilyKind.ARCSINE:
        rho = 1.0 / (np.pi * np.sqrt((xi - a) * (b - xi)))
    else:
        rho = np.sqrt((xi - a) * (b - xi)) / (2.0 * np.pi * fam.param * (xi + 1.0))
    out = np.where(inside, rho, 0.0)
    return float(out) if out.ndim == 0 else out


def semicircle_cdf(variance: float, x):
    """CDF of the semicircle law of the given variance."""
    r = 2.0 * math.sqrt(variance)
    y = np.clip(np.asarray(x, dtype=float) / r, -1.0, 1.0)
    out = 0.5 + (y * np.sqrt(1.0 - y**2) + np.arcsin(y)) / np.pi
    return float(out) if out.ndim == 0 else out
