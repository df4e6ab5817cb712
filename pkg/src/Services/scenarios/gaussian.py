"""Overlap of two displaced Gaussian wave packets.

With σ the standard deviation of |ψ|² the overlap of packets centered at 0 and D
is exp(-D²/(8σ²)); `gaussian_overlap_quadrature` integrates ψ₀ψ_D numerically as
an independent check of that closed form.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import List

import numpy as np
from scipy import integrate

from src.Services.hilbert.hilbert_space import FormalismError
from src.Services.observables.differentiation import (
    DEFAULT_FAPP_THRESHOLD,
    Differentiation,
    verdict_for_overlap,
)
from src.Services.scenarios.models import GaussianSpec

logger = logging.getLogger(__name__)

QUADRATURE_WINDOW = 40.0  # in units of sigma
QUADRATURE_AGREEMENT = 1e-8


@dataclass
class GaussianReport:
    spec: GaussianSpec
    overlap: float
    quadrature: float
    agreement: float
    verdict: Differentiation
    threshold: float


@dataclass
class GaussianFamilyReport:
    """N packets spaced `separation` apart on a line; nearest neighbours are the worst pair."""
    count: int
    spec: GaussianSpec
    overlaps: List[List[float]]
    worst_overlap: float
    verdict: Differentiation
    threshold: float


def gaussian_wavefunction(x: np.ndarray, center: float, sigma: float) -> np.ndarray:
    return (2.0 * math.pi * sigma**2) ** -0.25 * np.exp(-((x - center) ** 2) / (4.0 * sigma**2))


def gaussian_overlap(spec: GaussianSpec) -> float:
    """⟨ψ₀, ψ_D⟩ = exp(-D²/(8σ²))."""
    return math.exp(-(spec.separation**2) / (8.0 * spec.sigma**2))


def gaussian_overlap_quadrature(spec: GaussianSpec) -> float:
    """∫ψ₀(x)ψ_D(x)dx by adaptive quadrature over ±40σ around the midpoint."""
    midpoint = spec.separation / 2.0
    window = QUADRATURE_WINDOW * spec.sigma
    value, error = integrate.quad(
        lambda x: gaussian_wavefunction(x, 0.0, spec.sigma) * gaussian_wavefunction(x, spec.separation, spec.sigma),
        midpoint - window,
        midpoint + window,
        points=[midpoint],
        epsabs=1e-13,
        epsrel=1e-12,
        limit=200,
    )
    logger.debug("Quadrature overlap D=%g sigma=%g: %.16g (error estimate %.1e)",
                 spec.separation, spec.sigma, value, error)
    return float(value)


def gaussian_report(spec: GaussianSpec, threshold: float = DEFAULT_FAPP_THRESHOLD) -> GaussianReport:
    overlap = gaussian_overlap(spec)
    quadrature = gaussian_overlap_quadrature(spec)
    return GaussianReport(
        spec=spec,
        overlap=overlap,
        quadrature=quadrature,
        agreement=abs(overlap - quadrature),
        verdict=verdict_for_overlap(overlap, threshold).verdict,
        threshold=threshold,
    )


def gaussian_family_overlaps(count: int, spec: GaussianSpec, threshold: float = DEFAULT_FAPP_THRESHOLD) -> GaussianFamilyReport:
    """Pairwise overlaps of `count` equally spaced packets and the weakest verdict."""
    if count < 2:
        raise FormalismError("A family needs at least two packets")
    overlaps = [
        [gaussian_overlap(GaussianSpec(separation=abs(i - j) * spec.separation, sigma=spec.sigma)) for j in range(count)]
        for i in range(count)
    ]
    worst = max(overlaps[i][j] for i in range(count) for j in range(count) if i != j)
    return GaussianFamilyReport(
        count=count,
        spec=spec,
        overlaps=overlaps,
        worst_overlap=worst,
        verdict=verdict_for_overlap(worst, threshold).verdict,
        threshold=threshold,
    )


__all__ = [
    "GaussianReport", "GaussianFamilyReport", "QUADRATURE_AGREEMENT",
    "gaussian_wavefunction", "gaussian_overlap", "gaussian_overlap_quadrature",
    "gaussian_report", "gaussian_family_overlaps",
]
