"""Input matrices: PSD container, certification, generators and file I/O."""
from __future__ import annotations

import hashlib
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

import numpy as np
import scipy.io
import scipy.sparse

from .errors import FormatError, InvalidInput

DEFAULT_TOL_PSD = 1e-8
ASYMMETRY_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class PsdMatrix:
    """Dense symmetric ``m x m`` matrix.

    The array is symmetrized as ``(a + a.T) / 2`` on construction and stored
    read-only. ``psd_tol`` is set once the matrix has been certified PSD at
    that tolerance (see :func:`validate_psd`).
    """

    entries: np.ndarray
    psd_tol: Optional[float] = None
    scale: float = field(init=False)

    def __post_init__(self):
        a = np.array(self.entries, dtype=float, copy=True)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise InvalidInput(f"expected a non-empty square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise InvalidInput("matrix has non-finite entries")
        a = (a + a.T) / 2
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)
        object.__setattr__(self, "scale", float(np.max(np.abs(a))))

    @property
    def m(self) -> int:
        return self.entries.shape[0]

    @property
    def psd_certified(self) -> bool:
        return self.psd_tol is not None

    def __mul__(self, c: float) -> "PsdMatrix":
        return PsdMatrix(self.entries * float(c))

    __rmul__ = __mul__

    def digest(self) -> str:
        """SHA-256 of the little-endian float64 entries, prefixed by the order."""
        h = hashlib.sha256()
        h.update(str(self.m).encode())
        h.update(np.ascontiguousarray(self.entries, dtype="<f8").tobytes())
        return h.hexdigest()


@dataclass(frozen=True)
class PsdReport:
    min_eigenvalue: float
    tol: float
    scale: float
    passed: bool

    def as_dict(self) -> dict:
        return {
            "min_eigenvalue": self.min_eigenvalue,
            "tol": self.tol,
            "scale": self.scale,
            "passed": self.passed,
        }


def validate_psd(A: PsdMatrix, tol: float = DEFAULT_TOL_PSD) -> PsdReport:
    """Certify ``A`` as PSD: pass iff ``lambda_min >= -tol * scale``."""
    if not np.all(np.isfinite(A.entries)):
        raise InvalidInput("matrix has non-finite entries")
    lam_min = float(np.linalg.eigvalsh(A.entries)[0])
    return PsdReport(lam_min, tol, A.scale, lam_min >= -tol * A.scale)


def certify(A: PsdMatrix, tol: float = DEFAULT_TOL_PSD) -> PsdMatrix:
    """Return ``A`` marked as certified, or raise InvalidInput if it is not PSD."""
    report = validate_psd(A, tol)
    if not report.passed:
        raise InvalidInput(
            f"matrix is not PSD: lambda_min = {report.min_eigenvalue:.3e} < -{tol:g} * {A.scale:.3e}"
        )
    return PsdMatrix(A.entries, psd_tol=tol)


@dataclass(frozen=True)
class WeightedGraph:
    m: int
    edges: tuple

    def __post_init__(self):
        if self.m < 1:
            raise InvalidInput("graph needs at least one vertex")
        seen = set()
        clean = []
        for i, j, w in self.edges:
            i, j, w = int(i), int(j), float(w)
            if i == j:
                raise InvalidInput(f"self-loop at vertex {i}")
            if i > j:
                i, j = j, i
            if i < 0 or j >= self.m:
                raise InvalidInput(f"edge ({i}, {j}) out of range for m={self.m}")
            if not np.isfinite(w) or w < 0:
                raise InvalidInput(f"edge ({i}, {j}) has invalid weight {w}")
            if (i, j) in seen:
                raise InvalidInput(f"duplicate edge ({i}, {j})")
            seen.add((i, j))
            clean.append((i, j, w))
        object.__setattr__(self, "edges", tuple(clean))


def cycle_graph(m: int, weight: float = 1.0) -> WeightedGraph:
    if m < 3:
        raise InvalidInput("a cycle needs m >= 3")
    return WeightedGraph(m, tuple((i, (i + 1) % m, weight) for i in range(m)))


def laplacian(G: WeightedGraph) -> PsdMatrix:
    L = np.zeros((G.m, G.m))
    for i, j, w in G.edges:
        L[i, j] -= w
        L[j, i] -= w
    # diagonal last, so every row sums to zero exactly
    np.fill_diagonal(L, 0.0)
    np.fill_diagonal(L, -L.sum(axis=1))
    return PsdMatrix(L)


def random_gram(m: int, r: int, seed: int) -> PsdMatrix:
    """``B.T @ B`` for an ``r x m`` standard normal ``B`` drawn from ``seed``."""
    if m < 1:
        raise InvalidInput("m must be >= 1")
    if r < 1 or r > m:
        raise InvalidInput(f"need 1 <= r <= m, got r={r}, m={m}")
    B = np.random.default_rng(seed).standard_normal((r, m))
    return PsdMatrix(B.T @ B)


def ones(m: int) -> PsdMatrix:
    return PsdMatrix(np.ones((m, m)))


def identity(m: int) -> PsdMatrix:
    return PsdMatrix(np.eye(m))


# --- file formats -----------------------------------------------------------

def _check_symmetric(a: np.ndarray, path) -> None:
    scale = max(float(np.max(np.abs(a))), np.finfo(float).tiny)
    if float(np.max(np.abs(a - a.T))) > ASYMMETRY_TOL * scale:
        raise FormatError(f"{path}: matrix is not symmetric")


def _guess_format(path: Path) -> str:
    return "dense-csv" if path.suffix.lower() in (".csv", ".txt") else "matrix-market"


def load_matrix(path, format: Optional[str] = None) -> PsdMatrix:
    """Read a Matrix Market (coordinate or array) or dense CSV matrix file."""
    path = Path(path)
    fmt = format or _guess_format(path)
    try:
        if fmt == "matrix-market":
            raw = scipy.io.mmread(str(path))
            a = raw.toarray() if scipy.sparse.issparse(raw) else np.asarray(raw)
        elif fmt == "dense-csv":
            a = np.loadtxt(path, delimiter=",", dtype=float, ndmin=2)
        else:
            raise InvalidInput(f"unknown matrix format {fmt!r}")
    except (ValueError, OSError, IndexError) as exc:
        if isinstance(exc, (InvalidInput, FileNotFoundError)):
            raise
        raise FormatError(f"{path}: {exc}") from exc
    if np.iscomplexobj(a):
        raise FormatError(f"{path}: complex matrices are not supported")
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise FormatError(f"{path}: matrix is not square (shape {a.shape})")
    if not np.all(np.isfinite(a)):
        raise FormatError(f"{path}: non-finite entries")
    _check_symmetric(a, path)
    return PsdMatrix(a)


def save_matrix(A: PsdMatrix, path, format: Optional[str] = None) -> None:
    path = Path(path)
    fmt = format or _guess_format(path)
    if fmt == "matrix-market":
        lower = scipy.sparse.coo_matrix(np.tril(A.entries))
        scipy.io.mmwrite(str(path), lower, symmetry="symmetric", precision=17)
        # mmwrite appends .mtx when missing
        written = path if path.suffix == ".mtx" else Path(str(path) + ".mtx")
        if written != path:
            written.replace(path)
    elif fmt == "dense-csv":
        np.savetxt(path, A.entries, delimiter=",", fmt="%.17g")
    else:
        raise InvalidInput(f"unknown matrix format {fmt!r}")


def matrix_market_text(A: PsdMatrix) -> str:
    buf = io.BytesIO()
    scipy.io.mmwrite(buf, scipy.sparse.coo_matrix(np.tril(A.entries)), symmetry="symmetric", precision=17)
    return buf.getvalue().decode()


def parse_edge_list(lines: Iterable[str], m: Optional[int] = None) -> WeightedGraph:
    """Parse ``i j w`` lines (0-based vertices; ``#`` starts a comment).

    When ``m`` is omitted the vertex count is one past the largest index.
    """
    edges = []
    for lineno, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) not in (2, 3):
            raise FormatError(f"line {lineno}: expected 'i j [w]', got {line!r}")
        try:
            i, j = int(parts[0]), int(parts[1])
            w = float(parts[2]) if len(parts) == 3 else 1.0
        except ValueError as exc:
            raise FormatError(f"line {lineno}: {exc}") from exc
        edges.append((i, j, w))
    if m is None:
        m = 1 + max((max(i, j) for i, j, _ in edges), default=0)
    return WeightedGraph(m, tuple(edges))


def load_edge_list(path, m: Optional[int] = None) -> WeightedGraph:
    with open(path) as fh:
        return parse_edge_list(fh, m)
