"""Polarization states and analyzer settings for the photon pair.

Two-qubit operators put the Stokes (write photon, heralding) arm in the first
tensor factor and the anti-Stokes (read photon) arm in the second. The
computational basis order is fixed to (HH, HV, VH, VV); every 4x4 matrix in
the package uses it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

BASIS = ("HH", "HV", "VH", "VV")

TRANSMIT = "transmit"
REFLECT = "reflect"

KIND_LINEAR = "linear"
KIND_CIRCULAR = "circular"


def _format_angle(angle_deg: float) -> str:
    # repr keeps the shortest round-trip form, so tokens are stable bytes
    return repr(float(angle_deg))


@dataclass(frozen=True)
class MeasurementSetting:
    """One polarization analyzer.

    Linear settings project the transmit port onto cos(a)|H> + sin(a)|V> with
    a in degrees. Circular settings send one handedness to the transmit port,
    with R = (|H> + i|V>)/sqrt(2) and L its conjugate.
    """

    kind: str
    angle_deg: float = 0.0
    transmit_hand: str = "R"

    def __post_init__(self) -> None:
        if self.kind not in (KIND_LINEAR, KIND_CIRCULAR):
            raise ValueError(f"unknown analyzer kind {self.kind!r}")
        if self.kind == KIND_LINEAR:
            if not math.isfinite(self.angle_deg) or not 0.0 <= self.angle_deg < 180.0:
                raise ValueError(
                    f"linear analyzer angle must lie in [0, 180) degrees, got {self.angle_deg}"
                )
        elif self.transmit_hand not in ("R", "L"):
            raise ValueError(f"circular transmit handedness must be 'R' or 'L', got {self.transmit_hand!r}")

    @staticmethod
    def linear(angle_deg: float) -> "MeasurementSetting":
        return MeasurementSetting(KIND_LINEAR, float(angle_deg))

    @staticmethod
    def circular_r() -> "MeasurementSetting":
        """R exits the transmit port, L the reflect port."""
        return MeasurementSetting(KIND_CIRCULAR, transmit_hand="R")

    @staticmethod
    def circular_l() -> "MeasurementSetting":
        return MeasurementSetting(KIND_CIRCULAR, transmit_hand="L")

    def token(self) -> str:
        """Compact text form used in CSV columns: the angle for linear
        settings, 'R' or 'L' for circular ones."""
        if self.kind == KIND_CIRCULAR:
            return self.transmit_hand
        return _format_angle(self.angle_deg)

    @staticmethod
    def from_token(token: str) -> "MeasurementSetting":
        token = token.strip()
        if token in ("R", "L"):
            return MeasurementSetting(KIND_CIRCULAR, transmit_hand=token)
        try:
            angle = float(token)
        except ValueError as exc:
            raise ValueError(f"cannot parse analyzer setting token {token!r}") from exc
        return MeasurementSetting.linear(angle)


def projector(setting: MeasurementSetting, outcome: str) -> np.ndarray:
    """Rank-1 projector for one analyzer port.

    outcome is "transmit" or "reflect". The two ports are orthogonal and sum
    to the identity (within one floating point rounding of cos^2 + sin^2).
    """
    if outcome not in (TRANSMIT, REFLECT):
        raise ValueError(f"outcome must be {TRANSMIT!r} or {REFLECT!r}, got {outcome!r}")
    if setting.kind == KIND_LINEAR:
        a = math.radians(setting.angle_deg)
        if outcome == TRANSMIT:
            ket = np.array([math.cos(a), math.sin(a)], dtype=complex)
        else:
            ket = np.array([-math.sin(a), math.cos(a)], dtype=complex)
    else:
        r_ket = np.array([1.0, 1.0j], dtype=complex) / math.sqrt(2.0)
        l_ket = np.array([1.0, -1.0j], dtype=complex) / math.sqrt(2.0)
        transmit_ket = r_ket if setting.transmit_hand == "R" else l_ket
        reflect_ket = l_ket if setting.transmit_hand == "R" else r_ket
        ket = transmit_ket if outcome == TRANSMIT else reflect_ket
    return np.outer(ket, ket.conj())


def bell_state(theta_deg: float) -> np.ndarray:
    """Density matrix of cos(theta)|HH> + sin(theta)|VV>.

    theta is in degrees and must lie in [0, 90]; 45 gives the maximally
    entangled balanced state.
    """
    if not 0.0 <= theta_deg <= 90.0:
        raise ValueError(f"pair-state angle must lie in [0, 90] degrees, got {theta_deg}")
    th = math.radians(theta_deg)
    psi = np.zeros(4, dtype=complex)
    psi[0] = math.cos(th)
    psi[3] = math.sin(th)
    return np.outer(psi, psi.conj())


def werner_state(theta_deg: float, visibility: float) -> np.ndarray:
    """Pair state mixed with white noise: V rho_pair + (1 - V) I/4."""
    if not 0.0 <= visibility <= 1.0:
        raise ValueError(f"visibility must lie in [0, 1], got {visibility}")
    return visibility * bell_state(theta_deg) + (1.0 - visibility) * np.eye(4, dtype=complex) / 4.0


def validate_density(rho: np.ndarray, *, tol: float = 1e-12, eig_tol: float = 1e-10) -> list:
    """Diagnostic check of the two-qubit density matrix invariants.

    Returns a list of human-readable violation strings, empty iff rho has
    shape (4, 4), is Hermitian with unit trace within tol, and has no
    eigenvalue below -eig_tol. Never raises: callers decide what a
    violation costs them.
    """
    rho = np.asarray(rho)
    if rho.shape != (4, 4):
        return [f"expected a 4x4 matrix, got shape {rho.shape}"]
    violations = []
    rho_c = np.asarray(rho, dtype=complex)
    if not np.all(np.isfinite(rho_c.real)) or not np.all(np.isfinite(rho_c.imag)):
        return ["matrix contains non-finite entries"]
    herm_defect = float(np.max(np.abs(rho - rho.conj().T)))
    if herm_defect > tol:
        violations.append(f"not Hermitian (max asymmetry {herm_defect:.3e})")
    trace = complex(np.trace(rho))
    if abs(trace - 1.0) > tol:
        violations.append(f"trace must be 1 within {tol}, got {trace}")
    eigenvalues = np.linalg.eigvalsh((rho + rho.conj().T) / 2.0)
    if float(eigenvalues.min()) < -eig_tol:
        violations.append(f"negative eigenvalue {eigenvalues.min():.3e}")
    return violations


def joint_probabilities(
    rho: np.ndarray, setting_s: MeasurementSetting, setting_a: MeasurementSetting
) -> np.ndarray:
    """Coincidence probabilities Tr[rho (P_i x Q_j)] as a 2x2 array.

    Row index is the Stokes port (0 -> D1/transmit, 1 -> D2/reflect), column
    index the anti-Stokes port (0 -> T1, 1 -> T2). For a valid density matrix
    the four entries sum to 1 within numerical rounding.
    """
    rho = np.asarray(rho, dtype=complex)
    ports_s = (projector(setting_s, TRANSMIT), projector(setting_s, REFLECT))
    ports_a = (projector(setting_a, TRANSMIT), projector(setting_a, REFLECT))
    out = np.empty((2, 2), dtype=float)
    for i in range(2):
        for j in range(2):
            out[i, j] = float(np.trace(rho @ np.kron(ports_s[i], ports_a[j])).real)
    return out


def stokes_marginal(rho: np.ndarray) -> np.ndarray:
    """Reduced state of the Stokes arm (partial trace over the anti-Stokes factor)."""
    r = np.asarray(rho, dtype=complex).reshape(2, 2, 2, 2)
    return np.einsum("iaja->ij", r)
