"""Dielectric response on the imaginary frequency axis.

Every model returns eps(i*zeta) for zeta >= 0 in rad/s. Drude and plasma
models diverge at zeta = 0; they return :data:`STATIC_DIVERGENCE` there and
callers that need the static limit go through :func:`zero_freq_limits`.

Material files
--------------
UTF-8 text. A ``key = value`` header, ``#`` comments, and for tabulated
materials a ``---`` separator followed by CSV with the header
``zeta_rad_per_s,eps``::

    name = al-like
    kind = drude
    omega_p = 2.24e16
    gamma = 1.25e14
    mu = 1.0

Allowed keys: ``name``, ``kind``, ``omega_p``, ``gamma``, ``mu``, ``eps``
(ideal-conductor proxy level), ``term`` (``C_j omega_j``, repeatable, for
``oscillator_sum``). Anything else is rejected.
"""
from __future__ import annotations

import hashlib
import math
import warnings
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

from .constants import C_LIGHT

KINDS = ("drude", "plasma", "oscillator_sum", "tabulated", "vacuum", "ideal_conductor_proxy")

#: Returned by singular models at zeta = 0.
STATIC_DIVERGENCE = math.inf

IDEAL_PROXY_EPS = 1e8


class DispersionError(ValueError):
    """Invalid dispersion parameters or queries."""


class MaterialFileError(DispersionError):
    def __init__(self, message, line=None, source=None):
        where = ""
        if source is not None:
            where += f"{source}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)
        self.line = line


def _check_zeta(zeta):
    if np.any(np.asarray(zeta) < 0):
        raise DispersionError("zeta must be >= 0")


def eps_drude(zeta, omega_p, gamma):
    """Drude permittivity ``1 + omega_p**2 / (zeta (zeta + gamma))``.

    Returns :data:`STATIC_DIVERGENCE` at ``zeta == 0``.
    """
    if omega_p <= 0 or gamma <= 0:
        raise DispersionError("Drude model needs omega_p > 0 and gamma > 0")
    _check_zeta(zeta)
    z = np.asarray(zeta, dtype=float)
    with np.errstate(divide="ignore"):
        out = np.where(z > 0, 1.0 + omega_p**2 / np.where(z > 0, z * (z + gamma), 1.0), STATIC_DIVERGENCE)
    return float(out) if out.ndim == 0 else out


def eps_plasma(zeta, omega_p):
    if omega_p <= 0:
        raise DispersionError("plasma model needs omega_p > 0")
    _check_zeta(zeta)
    z = np.asarray(zeta, dtype=float)
    out = np.where(z > 0, 1.0 + omega_p**2 / np.where(z > 0, z * z, 1.0), STATIC_DIVERGENCE)
    return float(out) if out.ndim == 0 else out


def eps_oscillator_sum(zeta, terms: Sequence[tuple[float, float]]):
    """Sum of undamped oscillators, ``1 + sum C_j / (1 + (zeta/omega_j)**2)``."""
    _check_zeta(zeta)
    z = np.asarray(zeta, dtype=float)
    if len(terms) == 0:
        warnings.warn("oscillator_sum with no terms evaluates as vacuum", RuntimeWarning, stacklevel=2)
        out = np.ones_like(z)
        return float(out) if out.ndim == 0 else out
    out = np.ones_like(z)
    for c_j, w_j in terms:
        if c_j < 0 or w_j <= 0:
            raise DispersionError("oscillator terms need C_j >= 0 and omega_j > 0")
        out = out + c_j / (1.0 + (z / w_j) ** 2)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class DispersionTable:
    zeta_points: np.ndarray
    eps_values: np.ndarray

    def __post_init__(self):
        z = np.asarray(self.zeta_points, dtype=float)
        e = np.asarray(self.eps_values, dtype=float)
        if z.ndim != 1 or z.shape != e.shape:
            raise DispersionError("table columns must be 1-d and of equal length")
        if z.size < 2:
            raise DispersionError("table needs at least 2 points")
        if np.any(np.diff(z) <= 0):
            raise DispersionError("table zeta values must be strictly increasing")
        if z[0] < 0:
            raise DispersionError("table zeta values must be >= 0")
        if np.any(e < 1):
            raise DispersionError("table eps values must be >= 1")
        object.__setattr__(self, "zeta_points", z)
        object.__setattr__(self, "eps_values", e)


def eps_tabulated(zeta, table: DispersionTable):
    """Interpolate a table in log-log space on ``eps - 1``.

    Flat below the first point; above the last point ``eps - 1`` decays as
    ``(zeta_last / zeta)**2``. Segments touching ``eps == 1`` or ``zeta == 0``
    fall back to linear interpolation.
    """
    _check_zeta(zeta)
    zq = np.atleast_1d(np.asarray(zeta, dtype=float))
    zp, ep = table.zeta_points, table.eps_values
    chi = ep - 1.0
    out = np.empty_like(zq)

    lo = zq <= zp[0]
    hi = zq >= zp[-1]
    out[lo] = ep[0]
    out[hi] = 1.0 + chi[-1] * (zp[-1] / zq[hi]) ** 2
    mid = ~(lo | hi)
    if np.any(mid):
        zm = zq[mid]
        j = np.searchsorted(zp, zm) - 1
        z0, z1 = zp[j], zp[j + 1]
        c0, c1 = chi[j], chi[j + 1]
        loglog = (z0 > 0) & (c0 > 0) & (c1 > 0)
        with np.errstate(divide="ignore", invalid="ignore"):
            s = np.log(zm / z0) / np.log(z1 / z0)
            ll = np.exp(np.log(c0) + s * (np.log(c1) - np.log(c0)))
        lin = c0 + (zm - z0) / (z1 - z0) * (c1 - c0)
        out[mid] = 1.0 + np.where(loglog, ll, lin)
    # exact grid hits
    hit = np.isin(zq, zp)
    if np.any(hit):
        out[hit] = ep[np.searchsorted(zp, zq[hit])]
    return float(out[0]) if np.ndim(zeta) == 0 else out


class ZeroFreqLimits(NamedTuple):
    """Static (zeta -> 0+) behaviour of a material against a vacuum gap.

    ``tm``/``te`` are one of ``"unit"``, ``"zero"``, ``"finite"``.
    ``eps_order`` p and ``eps_coefficient`` C describe eps ~ C * zeta**-p.
    """

    tm: str
    te: str
    eps_order: int
    eps_coefficient: float


@dataclass(frozen=True, eq=False)
class MaterialModel:
    kind: str
    omega_p: float = 0.0
    gamma: float = 0.0
    terms: tuple = ()
    eps_const: float = IDEAL_PROXY_EPS
    table: DispersionTable | None = None
    mu: float = 1.0
    name: str = ""
    digest: str = field(default="", compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DispersionError(f"unknown material kind {self.kind!r}")
        if not self.mu > 0:
            raise DispersionError("mu must be > 0")
        if self.kind in ("drude", "plasma") and not self.omega_p > 0:
            raise DispersionError(f"{self.kind} model needs omega_p > 0")
        if self.kind == "drude" and not self.gamma > 0:
            raise DispersionError("drude model needs gamma > 0")
        if self.kind == "tabulated" and self.table is None:
            raise DispersionError("tabulated model needs a table")
        if self.kind == "ideal_conductor_proxy" and not self.eps_const >= 1:
            raise DispersionError("ideal-conductor proxy needs eps >= 1")
        for c_j, w_j in self.terms:
            if c_j < 0 or w_j <= 0:
                raise DispersionError("oscillator terms need C_j >= 0 and omega_j > 0")

    # -- constructors -------------------------------------------------
    @classmethod
    def vacuum(cls):
        return cls("vacuum", name="vacuum")

    @classmethod
    def drude(cls, omega_p, gamma, mu=1.0, name="drude"):
        return cls("drude", omega_p=omega_p, gamma=gamma, mu=mu, name=name)

    @classmethod
    def plasma(cls, omega_p, mu=1.0, name="plasma"):
        return cls("plasma", omega_p=omega_p, mu=mu, name=name)

    @classmethod
    def oscillators(cls, terms, mu=1.0, name="oscillator_sum"):
        return cls("oscillator_sum", terms=tuple((float(c), float(w)) for c, w in terms), mu=mu, name=name)

    @classmethod
    def ideal_proxy(cls, eps=IDEAL_PROXY_EPS, name="ideal_conductor_proxy"):
        return cls("ideal_conductor_proxy", eps_const=eps, name=name)

    @classmethod
    def constant(cls, eps, mu=1.0, name="constant"):
        """Frequency-independent eps; stored as an ideal-conductor-proxy kind."""
        return cls("ideal_conductor_proxy", eps_const=eps, mu=mu, name=name)

    @classmethod
    def tabulated(cls, zeta_points, eps_values, mu=1.0, name="tabulated"):
        return cls("tabulated", table=DispersionTable(zeta_points, eps_values), mu=mu, name=name)

    # -- evaluation ---------------------------------------------------
    def eps(self, zeta):
        """eps(i zeta); STATIC_DIVERGENCE at zeta = 0 for drude/plasma."""
        k = self.kind
        if k == "drude":
            return eps_drude(zeta, self.omega_p, self.gamma)
        if k == "plasma":
            return eps_plasma(zeta, self.omega_p)
        if k == "oscillator_sum":
            return eps_oscillator_sum(zeta, self.terms)
        if k == "tabulated":
            return eps_tabulated(zeta, self.table)
        _check_zeta(zeta)
        level = 1.0 if k == "vacuum" else self.eps_const
        return level if np.ndim(zeta) == 0 else np.full(np.shape(zeta), level)

    def eps_zeta2(self, zeta: float) -> float:
        """``eps(i zeta) * zeta**2`` including its finite zeta -> 0 limit."""
        zeta = float(zeta)
        if zeta < 0:
            raise DispersionError("zeta must be >= 0")
        if zeta == 0.0:
            return self.omega_p**2 if self.kind == "plasma" else 0.0
        if self.kind == "drude":
            return zeta * zeta + self.omega_p**2 * zeta / (zeta + self.gamma)
        if self.kind == "plasma":
            return zeta * zeta + self.omega_p**2
        return float(self.eps(zeta)) * zeta * zeta

    def kappa_shift(self, zeta: float) -> float:
        """``eps mu zeta**2 / c**2`` in 1/m**2 (finite at zeta = 0)."""
        return self.mu * self.eps_zeta2(zeta) / C_LIGHT**2

    @property
    def is_singular(self) -> bool:
        return self.kind in ("drude", "plasma")

    def describe(self) -> dict:
        d = {"name": self.name, "kind": self.kind, "mu": self.mu}
        if self.kind in ("drude", "plasma"):
            d["omega_p"] = self.omega_p
        if self.kind == "drude":
            d["gamma"] = self.gamma
        if self.kind == "oscillator_sum":
            d["terms"] = [list(t) for t in self.terms]
        if self.kind == "ideal_conductor_proxy":
            d["eps"] = self.eps_const
        if self.kind == "tabulated":
            d["n_points"] = int(self.table.zeta_points.size)
        if self.digest:
            d["sha256"] = self.digest
        return d


def zero_freq_limits(material: MaterialModel) -> ZeroFreqLimits:
    """Classify how reflection at a vacuum gap behaves as zeta -> 0+."""
    k = material.kind
    te_from_mu = "zero" if material.mu == 1.0 else "finite"
    if k == "drude":
        return ZeroFreqLimits("unit", te_from_mu, 1, material.omega_p**2 / material.gamma)
    if k == "plasma":
        return ZeroFreqLimits("unit", "finite", 2, material.omega_p**2)
    eps0 = float(material.eps(0.0))
    tm = "zero" if eps0 == 1.0 else "finite"
    return ZeroFreqLimits(tm, te_from_mu, 0, eps0)


# -- material files ---------------------------------------------------

_ALLOWED_KEYS = {"name", "kind", "omega_p", "gamma", "mu", "eps", "term"}


def parse_material(text: str, source: str | None = None) -> MaterialModel:
    header, _, body = text.partition("\n---")
    body_offset = header.count("\n") + 2
    fields: dict[str, object] = {}
    terms: list[tuple[float, float]] = []
    lines = header.splitlines()
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise MaterialFileError(f"expected 'key = value', got {raw.strip()!r}", lineno, source)
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _ALLOWED_KEYS:
            raise MaterialFileError(f"unknown key {key!r}", lineno, source)
        try:
            if key == "term":
                c_j, w_j = (float(v) for v in value.replace(",", " ").split())
                terms.append((c_j, w_j))
            elif key in ("name", "kind"):
                fields[key] = value
            else:
                if key in fields:
                    raise MaterialFileError(f"duplicate key {key!r}", lineno, source)
                fields[key] = float(value)
        except MaterialFileError:
            raise
        except ValueError:
            raise MaterialFileError(f"bad value for {key!r}: {value!r}", lineno, source) from None
    kind = fields.pop("kind", None)
    if kind is None:
        raise MaterialFileError("missing 'kind'", None, source)
    name = str(fields.pop("name", kind))
    mu = float(fields.pop("mu", 1.0))
    digest = hashlib.sha256(text.encode("utf-8")).hexdigest()
    try:
        if kind == "tabulated":
            if not body.strip():
                raise MaterialFileError("tabulated material needs a CSV body after '---'", None, source)
            z, e = _parse_table(body, body_offset, source)
            return MaterialModel("tabulated", table=DispersionTable(z, e), mu=mu, name=name, digest=digest)
        if body.strip():
            raise MaterialFileError("only tabulated materials take a CSV body", None, source)
        if kind == "oscillator_sum":
            return MaterialModel("oscillator_sum", terms=tuple(terms), mu=mu, name=name, digest=digest)
        if terms:
            raise MaterialFileError("'term' only applies to oscillator_sum", None, source)
        kw = {}
        if "omega_p" in fields:
            kw["omega_p"] = fields.pop("omega_p")
        if "gamma" in fields:
            kw["gamma"] = fields.pop("gamma")
        if "eps" in fields:
            kw["eps_const"] = fields.pop("eps")
        return MaterialModel(kind, mu=mu, name=name, digest=digest, **kw)
    except MaterialFileError:
        raise
    except DispersionError as exc:
        raise MaterialFileError(str(exc), None, source) from None


def _parse_table(body: str, offset: int, source):
    rows = [(i, ln.strip()) for i, ln in enumerate(body.splitlines()[1:], start=offset) if ln.strip()]
    if not rows or [c.strip() for c in rows[0][1].split(",")] != ["zeta_rad_per_s", "eps"]:
        raise MaterialFileError("CSV header must be 'zeta_rad_per_s,eps'", rows[0][0] if rows else None, source)
    z, e = [], []
    for lineno, row in rows[1:]:
        parts = row.split(",")
        if len(parts) != 2:
            raise MaterialFileError(f"expected 2 columns, got {len(parts)}", lineno, source)
        try:
            z.append(float(parts[0]))
            e.append(float(parts[1]))
        except ValueError:
            raise MaterialFileError(f"non-numeric row {row!r}", lineno, source) from None
    return np.array(z), np.array(e)


def load_material(path) -> MaterialModel:
    path = Path(path)
    return parse_material(path.read_text(encoding="utf-8"), source=str(path))


def builtin_names() -> list[str]:
    pkg = resources.files("slabcavity") / "materials"
    return sorted(p.name[:-4] for p in pkg.iterdir() if p.name.endswith(".mat"))


def builtin_material(name: str) -> MaterialModel:
    res = resources.files("slabcavity") / "materials" / f"{name}.mat"
    if not res.is_file():
        raise DispersionError(f"no builtin material {name!r}; have {builtin_names()}")
    return parse_material(res.read_text(encoding="utf-8"), source=f"<builtin {name}>")


def resolve_material(ref: str, base_dir: Path | None = None) -> MaterialModel:
    """Load ``ref`` as a file path (relative to ``base_dir``) or a builtin name."""
    p = Path(ref)
    if base_dir is not None and not p.is_absolute():
        p = base_dir / p
    if p.suffix == ".mat" or p.exists():
        return load_material(p)
    return builtin_material(ref)
