"""Machine definitions: Hamiltonian, bath jump channels, work reservoirs.

A :class:`LindbladModel` is the object the generator

    d rho/dt = -i[H, rho] + sum_n D[K_n] rho
               + sum_{alpha,j} (gamma-_{alpha j} D[L_{alpha j}]
                                + gamma+_{alpha j} D[L_{alpha j}^dag]) rho

acts on, with D[L] rho = L rho L^dag - {L^dag L, rho}/2.  The L operators
are *extraction* jump operators (energy leaves the system into bath
``alpha``); their adjoints inject.  All Hamiltonians are stored in a
rotating frame where they are time independent; the lab-frame drive is
never represented.  hbar = k_B = 1 throughout.

Two constructors are provided: the driven three-level maser (hot bath on
the 0<->2 transition, cold bath on 1<->2, Rabi drive inside {0,1}), and a
four-level counterexample whose drive couples the post-extraction and
post-injection subspaces and therefore fails the single-excitation
structure check.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "BathLabel",
    "ChannelKind",
    "BathChannel",
    "LindbladModel",
    "MaserParams",
    "ModelFormatError",
    "DEFAULT_MASER",
    "build_maser",
    "build_forbidden_fourlevel",
    "load_model",
    "save_model",
]

HERMITICITY_TOL = 1e-12


class BathLabel(str, enum.Enum):
    HOT = "hot"
    COLD = "cold"


class ChannelKind(str, enum.Enum):
    INJECTION = "injection"
    EXTRACTION = "extraction"


class ModelFormatError(ValueError):
    """Schema violation in a serialized model; carries the offending path."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


def _hermiticity_defect(A: np.ndarray) -> float:
    scale = np.abs(A).max()
    if scale == 0.0:
        return 0.0
    return np.abs(A - A.conj().T).max() / scale


@dataclass(frozen=True)
class BathChannel:
    """One monitored jump channel: extraction operator plus its two rates.

    ``operator`` is the extraction jump operator L; the injection operator
    is its adjoint.  ``rate_minus``/``rate_plus`` are the extraction and
    injection rates (1/time), and ``energy_quantum`` the energy exchanged
    per jump, kept per channel so heat currents generalize beyond the
    maser.
    """

    bath: BathLabel
    operator: np.ndarray
    rate_minus: float
    rate_plus: float
    energy_quantum: float = 0.0

    def __post_init__(self):
        op = np.asarray(self.operator, dtype=complex)
        if op.ndim != 2 or op.shape[0] != op.shape[1]:
            raise ValueError("channel operator must be square")
        object.__setattr__(self, "operator", op)
        for name in ("rate_minus", "rate_plus"):
            r = float(getattr(self, name))
            if not math.isfinite(r) or r < 0.0:
                raise ValueError(f"{name} must be finite and non-negative, got {r}")
            object.__setattr__(self, name, r)


@dataclass(frozen=True)
class LindbladModel:
    """Immutable machine definition; freely shareable across threads."""

    dim: int
    hamiltonian: np.ndarray
    bath_channels: tuple[BathChannel, ...]
    work_ops: tuple[np.ndarray, ...] = field(default_factory=tuple)

    def __post_init__(self):
        H = np.asarray(self.hamiltonian, dtype=complex)
        if H.shape != (self.dim, self.dim):
            raise ValueError(f"hamiltonian shape {H.shape} does not match dim {self.dim}")
        if _hermiticity_defect(H) > HERMITICITY_TOL:
            raise ValueError("hamiltonian is not Hermitian within 1e-12")
        object.__setattr__(self, "hamiltonian", H)
        object.__setattr__(self, "bath_channels", tuple(self.bath_channels))
        for ch in self.bath_channels:
            if ch.operator.shape != (self.dim, self.dim):
                raise ValueError("bath channel operator dimension mismatch")
        ops = tuple(np.asarray(K, dtype=complex) for K in self.work_ops)
        for K in ops:
            if K.shape != (self.dim, self.dim):
                raise ValueError("work operator dimension mismatch")
        object.__setattr__(self, "work_ops", ops)

    def channels_for(self, bath: BathLabel) -> tuple[BathChannel, ...]:
        return tuple(ch for ch in self.bath_channels if ch.bath == bath)


@dataclass(frozen=True)
class MaserParams:
    """Three-level maser parameters (energies with hbar = k_B = 1).

    The working transitions are 0<->2 (hot, energy ``omega_h``) and 1<->2
    (cold, ``omega_c``); a Rabi drive of strength ``epsilon`` at frequency
    ``omega_d`` addresses 0<->1.  Bath occupations follow Bose-Einstein,
    nbar = 1/(exp(omega/T) - 1).
    """

    omega_h: float = 8.0
    omega_c: float = 2.0
    omega_d: float = 4.0
    epsilon: float = 0.5
    gamma_h: float = 0.05
    gamma_c: float = 0.05
    T_h: float = 10.0
    T_c: float = 1.0

    def __post_init__(self):
        for name in ("omega_h", "omega_c", "omega_d", "T_h", "T_c", "gamma_h", "gamma_c"):
            v = float(getattr(self, name))
            if not math.isfinite(v) or v <= 0.0:
                raise ValueError(f"{name} must be positive and finite, got {v}")
        if self.epsilon < 0.0 or not math.isfinite(self.epsilon):
            raise ValueError(f"epsilon must be non-negative, got {self.epsilon}")
        if not self.omega_h > self.omega_c:
            raise ValueError("omega_h must exceed omega_c")

    @property
    def nbar_h(self) -> float:
        return 1.0 / math.expm1(self.omega_h / self.T_h)

    @property
    def nbar_c(self) -> float:
        return 1.0 / math.expm1(self.omega_c / self.T_c)

    @property
    def detuning(self) -> float:
        """Drive detuning (omega_h - omega_c) - omega_d in the rotating frame."""
        return (self.omega_h - self.omega_c) - self.omega_d

    @property
    def sigma(self) -> float:
        """Entropy produced per net excitation moved hot -> cold."""
        return self.omega_c / self.T_c - self.omega_h / self.T_h

    def replace(self, **kwargs) -> "MaserParams":
        from dataclasses import replace as _replace

        return _replace(self, **kwargs)


DEFAULT_MASER = MaserParams()


def _sigma_ij(dim: int, i: int, j: int) -> np.ndarray:
    out = np.zeros((dim, dim), dtype=complex)
    out[i, j] = 1.0
    return out


def build_maser(p: MaserParams = DEFAULT_MASER) -> LindbladModel:
    """Three-level maser in the rotating frame.

    H = Delta |1><1| + epsilon (|0><1| + |1><0|) with
    Delta = (omega_h - omega_c) - omega_d; the drive frequency has been
    rotated away at construction time, so the stored Hamiltonian is time
    independent.
    """
    H = p.detuning * _sigma_ij(3, 1, 1) + p.epsilon * (_sigma_ij(3, 0, 1) + _sigma_ij(3, 1, 0))
    hot = BathChannel(
        bath=BathLabel.HOT,
        operator=_sigma_ij(3, 0, 2),
        rate_minus=p.gamma_h * (p.nbar_h + 1.0),
        rate_plus=p.gamma_h * p.nbar_h,
        energy_quantum=p.omega_h,
    )
    cold = BathChannel(
        bath=BathLabel.COLD,
        operator=_sigma_ij(3, 1, 2),
        rate_minus=p.gamma_c * (p.nbar_c + 1.0),
        rate_plus=p.gamma_c * p.nbar_c,
        energy_quantum=p.omega_c,
    )
    return LindbladModel(dim=3, hamiltonian=H, bath_channels=(hot, cold))


def build_forbidden_fourlevel(cross_drive: float = 0.4) -> LindbladModel:
    """Four-level machine whose drive links the two jump subspaces.

    Levels {0,1} are post-extraction, {2,3} post-injection; the hot bath
    works on 2<->0 and the cold bath on 3<->1.  An intra-subspace drive on
    0<->1 and 2<->3 would be fine; the ``cross_drive`` term on 1<->2
    couples the subspaces, so trajectories can hold two excitations and the
    structure check fails on the Hamiltonian condition.  Zeroing the
    (1, 2) element restores a valid machine.
    """
    H = (
        0.7 * _sigma_ij(4, 1, 1)
        + 5.0 * _sigma_ij(4, 2, 2)
        + 5.9 * _sigma_ij(4, 3, 3)
        + 0.3 * (_sigma_ij(4, 0, 1) + _sigma_ij(4, 1, 0))
        + 0.2 * (_sigma_ij(4, 2, 3) + _sigma_ij(4, 3, 2))
        + cross_drive * (_sigma_ij(4, 1, 2) + _sigma_ij(4, 2, 1))
    )
    hot = BathChannel(
        bath=BathLabel.HOT,
        operator=_sigma_ij(4, 0, 2),
        rate_minus=0.06,
        rate_plus=0.03,
        energy_quantum=5.0,
    )
    cold = BathChannel(
        bath=BathLabel.COLD,
        operator=_sigma_ij(4, 1, 3),
        rate_minus=0.08,
        rate_plus=0.01,
        energy_quantum=5.2,
    )
    return LindbladModel(dim=4, hamiltonian=H, bath_channels=(hot, cold))


# ---------------------------------------------------------------------------
# JSON serialization
#
# Schema: {"dim": int,
#          "hamiltonian": [[re, im], ...] row-major (dim*dim pairs),
#          "bath_channels": [{"bath": "hot"|"cold", "operator": [[re, im], ...],
#                             "rate_minus": x, "rate_plus": x,
#                             "energy_quantum": x}, ...],
#          "work_ops": [[[re, im], ...], ...]}
# Floats round-trip at full IEEE-754 double precision.
# ---------------------------------------------------------------------------


def _matrix_to_pairs(A: np.ndarray) -> list[list[float]]:
    return [[float(z.real), float(z.imag)] for z in A.flatten(order="C")]


def _pairs_to_matrix(pairs, dim: int, path: str) -> np.ndarray:
    if not isinstance(pairs, list):
        raise ModelFormatError(path, f"expected a list of [re, im] pairs, got {type(pairs).__name__}")
    if len(pairs) != dim * dim:
        raise ModelFormatError(path, f"expected {dim * dim} entries, got {len(pairs)}")
    out = np.empty(dim * dim, dtype=complex)
    for k, pair in enumerate(pairs):
        if (
            not isinstance(pair, list)
            or len(pair) != 2
            or not all(isinstance(x, (int, float)) for x in pair)
        ):
            raise ModelFormatError(f"{path}[{k}]", "expected an [re, im] pair of numbers")
        out[k] = complex(pair[0], pair[1])
    return out.reshape((dim, dim), order="C")


def save_model(model: LindbladModel) -> str:
    """Serialize to the JSON schema; load(save(m)) is exact on all numbers."""
    doc = {
        "dim": model.dim,
        "hamiltonian": _matrix_to_pairs(model.hamiltonian),
        "bath_channels": [
            {
                "bath": ch.bath.value,
                "operator": _matrix_to_pairs(ch.operator),
                "rate_minus": ch.rate_minus,
                "rate_plus": ch.rate_plus,
                "energy_quantum": ch.energy_quantum,
            }
            for ch in model.bath_channels
        ],
        "work_ops": [_matrix_to_pairs(K) for K in model.work_ops],
    }
    return json.dumps(doc, indent=2)


def _require(doc: dict, key: str, path: str):
    if key not in doc:
        raise ModelFormatError(f"{path}.{key}" if path else key, "missing required field")
    return doc[key]


def load_model(text: str) -> LindbladModel:
    """Parse the JSON schema, reporting violations with their JSON path."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFormatError("$", f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ModelFormatError("$", "top level must be an object")
    dim = _require(doc, "dim", "")
    if not isinstance(dim, int) or dim < 2:
        raise ModelFormatError("dim", f"expected an integer >= 2, got {dim!r}")
    H = _pairs_to_matrix(_require(doc, "hamiltonian", ""), dim, "hamiltonian")
    if _hermiticity_defect(H) > HERMITICITY_TOL:
        raise ModelFormatError("hamiltonian", "matrix is not Hermitian within 1e-12")
    raw_channels = _require(doc, "bath_channels", "")
    if not isinstance(raw_channels, list):
        raise ModelFormatError("bath_channels", "expected a list")
    channels = []
    for k, entry in enumerate(raw_channels):
        path = f"bath_channels[{k}]"
        if not isinstance(entry, dict):
            raise ModelFormatError(path, "expected an object")
        bath = _require(entry, "bath", path)
        if bath not in (b.value for b in BathLabel):
            raise ModelFormatError(f"{path}.bath", f"expected 'hot' or 'cold', got {bath!r}")
        op = _pairs_to_matrix(_require(entry, "operator", path), dim, f"{path}.operator")
        rates = {}
        for rk in ("rate_minus", "rate_plus", "energy_quantum"):
            v = _require(entry, rk, path)
            if not isinstance(v, (int, float)):
                raise ModelFormatError(f"{path}.{rk}", f"expected a number, got {v!r}")
            rates[rk] = float(v)
        if rates["rate_minus"] < 0 or rates["rate_plus"] < 0:
            raise ModelFormatError(path, "rates must be non-negative")
        channels.append(
            BathChannel(bath=BathLabel(bath), operator=op, **rates)
        )
    raw_work = doc.get("work_ops", [])
    if not isinstance(raw_work, list):
        raise ModelFormatError("work_ops", "expected a list")
    work = tuple(
        _pairs_to_matrix(entry, dim, f"work_ops[{k}]") for k, entry in enumerate(raw_work)
    )
    try:
        return LindbladModel(dim=dim, hamiltonian=H, bath_channels=tuple(channels), work_ops=work)
    except ValueError as exc:
        raise ModelFormatError("$", str(exc)) from exc
