"""Input documents: one exchange system per JSON file.

A file carries the permutation rows, the loop word, and optionally a
log-slope vector, a t-grid, a seed, and tolerance overrides.  Loading a
file validates everything eagerly and returns a bundle with the built
system, its spectral data, and the classified slope vector, so command
handlers never re-derive shared state.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

import numpy as np
from pydantic import BaseModel, Field, ValidationError, field_validator

from .errors import InvalidInput, PreconditionError
from .iet_core import Permutation, validate_permutation
from .rauzy import RauzyLoop, SelfSimilarSystem, build_self_similar
from .spectral import (
    HyperbolicityCertificate,
    SlopeDecomposition,
    SpectralData,
    analyze_spectrum,
    certify_hyperbolic,
    classify_slope,
    project_orthogonal,
)

_KNOWN_TOLERANCES = {"class_eps"}


class GridSpec(BaseModel):
    min: float
    max: float
    steps: int = Field(ge=2)


class SystemSpecFile(BaseModel):
    """Schema of an input document."""

    alphabet: list[str]
    top: list[str]
    bottom: list[str]
    loop: str
    omega: Optional[list[float]] = None
    t_grid: Optional[GridSpec] = None
    seed: Optional[int] = None
    tolerances: Optional[dict[str, float]] = None

    @field_validator("tolerances")
    @classmethod
    def _known_keys(cls, v):
        if v:
            unknown = set(v) - _KNOWN_TOLERANCES
            if unknown:
                raise ValueError(
                    f"unknown tolerance keys {sorted(unknown)}; known: {sorted(_KNOWN_TOLERANCES)}")
        return v


@dataclass(frozen=True)
class SystemBundle:
    """Everything derivable from an input file, built once."""

    file: SystemSpecFile
    perm: Permutation
    system: SelfSimilarSystem
    spectrum: SpectralData
    certificate: HyperbolicityCertificate
    omega: np.ndarray               # the file's slope vector, Perron-projected
    decomposition: Optional[SlopeDecomposition]   # None when not hyperbolic

    @property
    def klass(self) -> str:
        if self.decomposition is None:
            raise PreconditionError("slope classes are undefined without hyperbolicity")
        return self.decomposition.klass

    def require_hyperbolic(self) -> SlopeDecomposition:
        if self.decomposition is None:
            raise PreconditionError(
                self.certificate.failure_reason or "system is not of hyperbolic type")
        return self.decomposition


def parse_spec(data) -> SystemSpecFile:
    """Validate a raw dict (or JSON text) against the schema."""
    try:
        if isinstance(data, (str, bytes)):
            data = json.loads(data)
    except json.JSONDecodeError as exc:
        raise InvalidInput(f"not valid JSON: line {exc.lineno}, column {exc.colno}: {exc.msg}")
    try:
        return SystemSpecFile.model_validate(data)
    except ValidationError as exc:
        details = "; ".join(
            f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in exc.errors())
        raise InvalidInput(f"input document invalid: {details}")


def build_bundle(spec: SystemSpecFile) -> SystemBundle:
    """Construct and classify the system a document describes.

    Structural defects (bad permutation, non-closing or unrealizable loop,
    slope vector of the wrong length) raise InvalidInput.
    """
    perm = validate_permutation(spec.alphabet, spec.top, spec.bottom)
    try:
        loop = RauzyLoop(perm, spec.loop)
        system = build_self_similar(loop)
    except (ValueError, PreconditionError) as exc:
        raise InvalidInput(f"loop rejected: {exc}") from exc
    spectrum = analyze_spectrum(system)
    certificate = certify_hyperbolic(system, spectrum)

    if spec.omega is None:
        omega_raw = np.zeros(perm.d)
    else:
        if len(spec.omega) != perm.d:
            raise InvalidInput(
                f"omega has {len(spec.omega)} entries, alphabet has {perm.d}")
        omega_raw = np.array(spec.omega, dtype=float)
    omega = project_orthogonal(system, omega_raw)

    decomposition = None
    if certificate.is_hyperbolic:
        class_eps = (spec.tolerances or {}).get("class_eps", 1e-9)
        decomposition = classify_slope(system, spectrum, omega, certificate,
                                       class_eps=class_eps)
    return SystemBundle(spec, perm, system, spectrum, certificate, omega, decomposition)


def load_file(path: str) -> SystemBundle:
    with open(path, "rb") as fh:
        return build_bundle(parse_spec(fh.read()))
