"""Bell-test statistics, two-qubit tomography and decay fitting.

Everything here consumes the coincidence count tables produced by the trial
engine (or read back from its CSV files) and returns plain numbers or small
records. Counts may be floats: feeding exact probabilities instead of integer
counts makes the estimators exact, which the tests use as an oracle.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .engine import CoincidenceRow, CoincidenceTable, SettingPair
from .states import MeasurementSetting, joint_probabilities

TSIRELSON_BOUND = 2.0 * math.sqrt(2.0)

# Pauli-like observables of the three tomography bases, in the fixed order
# (H/V, D/A, R/L). Index 0 below is the identity.
_SIGMA = (
    np.eye(2, dtype=complex),
    np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
    np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex),
)

TOMOGRAPHY_BASES = (
    MeasurementSetting.linear(0.0),    # H/V, observable diag(1, -1)
    MeasurementSetting.linear(45.0),   # D/A
    MeasurementSetting.circular_r(),   # R/L
)


@dataclass(frozen=True)
class BellSettings:
    """The four analyzer angles of a CHSH measurement, in degrees.

    Defaults are the canonical set: the unprimed/primed Stokes angles and the
    anti-Stokes angles offset by 22.5 degrees.
    """

    theta_s: float = 0.0
    theta_s_prime: float = 45.0
    theta_a: float = 22.5
    theta_a_prime: float = 67.5

    def setting_pairs(self) -> tuple:
        """The four (Stokes, anti-Stokes) combinations in the fixed order
        (s,a), (s,a'), (s',a), (s',a')."""
        s = MeasurementSetting.linear(self.theta_s)
        sp = MeasurementSetting.linear(self.theta_s_prime)
        a = MeasurementSetting.linear(self.theta_a)
        ap = MeasurementSetting.linear(self.theta_a_prime)
        return (
            SettingPair(s, a),
            SettingPair(s, ap),
            SettingPair(sp, a),
            SettingPair(sp, ap),
        )


CANONICAL_BELL = BellSettings()


def _as_counts(source) -> np.ndarray:
    if hasattr(source, "counts"):
        counts = np.asarray(source.counts(), dtype=float)
    else:
        counts = np.asarray(source, dtype=float)
    if counts.shape == (4,):
        counts = counts.reshape(2, 2)
    if counts.shape != (2, 2):
        raise ValueError(f"expected 4 coincidence counts, got shape {counts.shape}")
    if np.any(counts < 0):
        raise ValueError("coincidence counts must be non-negative")
    return counts


def correlation_e(source) -> tuple:
    """Polarization correlation E and its binomial standard error.

    Accepts a CoincidenceRow or a 2x2/flat array of counts ordered
    (D1T1, D1T2, D2T1, D2T2). E = (C11 + C22 - C12 - C21) / N.
    """
    counts = _as_counts(source)
    total = counts.sum()
    if total <= 0:
        raise ValueError("cannot estimate a correlation from zero coincidences")
    value = (counts[0, 0] + counts[1, 1] - counts[0, 1] - counts[1, 0]) / total
    variance = max(0.0, (1.0 - value * value) / total)
    return float(value), float(math.sqrt(variance))


def bell_s(table: CoincidenceTable, settings: BellSettings = CANONICAL_BELL) -> tuple:
    """CHSH value S = E(s,a) - E(s,a') + E(s',a) + E(s',a') and its error.

    The table must contain one row for each of the four setting pairs; errors
    add in quadrature. The sign convention keeps the canonical angles on the
    positive branch, so the quantum bound is +2 sqrt 2.
    """
    pairs = settings.setting_pairs()
    estimates = []
    for pair in pairs:
        row = table.find(pair)
        estimates.append(correlation_e(row))
    value = estimates[0][0] - estimates[1][0] + estimates[2][0] + estimates[3][0]
    error = math.sqrt(sum(e[1] ** 2 for e in estimates))
    return float(value), float(error)


def tomography_setting_pairs() -> tuple:
    """The nine analyzer pairs of the overcomplete-free tomography scan,
    row-major over (H/V, D/A, R/L) x (H/V, D/A, R/L)."""
    return tuple(
        SettingPair(s, a) for s in TOMOGRAPHY_BASES for a in TOMOGRAPHY_BASES
    )


def _basis_index(setting: MeasurementSetting) -> int:
    for index, basis in enumerate(TOMOGRAPHY_BASES):
        if setting == basis:
            return index
    raise ValueError(
        f"setting {setting.token()!r} is not one of the tomography bases "
        "(linear 0, linear 45, circular R)"
    )


def tomo_reconstruct(table: CoincidenceTable) -> np.ndarray:
    """Linear-inversion density matrix from the nine-basis coincidence scan.

    Each row's four counts give one two-qubit correlator; single-arm terms
    are averaged over the three partner bases measuring them. On exact
    probabilities the inversion is exact. The result is Hermitian with unit
    trace but may have small negative eigenvalues on finite counts; follow
    with project_physical before computing fidelities.
    """
    seen: dict[tuple, np.ndarray] = {}
    for row in table.rows:
        j = _basis_index(row.pair.stokes)
        k = _basis_index(row.pair.anti_stokes)
        if (j, k) in seen:
            raise ValueError(f"duplicate tomography row for pair {row.pair.tokens()}")
        counts = _as_counts(row)
        if counts.sum() <= 0:
            raise ValueError(f"tomography row {row.pair.tokens()} has zero coincidences")
        seen[(j, k)] = counts / counts.sum()
    missing = [(j, k) for j in range(3) for k in range(3) if (j, k) not in seen]
    if missing:
        raise ValueError(f"tomography scan is missing {len(missing)} basis pairs")

    correlators = np.zeros((4, 4))
    correlators[0, 0] = 1.0
    sign = np.array([[1.0, -1.0], [-1.0, 1.0]])
    marg_s = np.array([[1.0, 1.0], [-1.0, -1.0]])
    marg_a = marg_s.T
    for (j, k), p in seen.items():
        correlators[j + 1, k + 1] = float((sign * p).sum())
        correlators[j + 1, 0] += float((marg_s * p).sum()) / 3.0
        correlators[0, k + 1] += float((marg_a * p).sum()) / 3.0

    rho = np.zeros((4, 4), dtype=complex)
    for j in range(4):
        for k in range(4):
            rho += correlators[j, k] * np.kron(_SIGMA[j], _SIGMA[k])
    return rho / 4.0


def project_physical(rho: np.ndarray) -> np.ndarray:
    """Nearest-physical cleanup of a Hermitian unit-trace matrix.

    Eigendecomposes, then repeatedly zeroes the most negative eigenvalue and
    spreads its (negative) weight uniformly over the strictly positive ones
    until none is negative; the trace is conserved at every step. Already
    physical input is returned unchanged. The map is idempotent.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise ValueError(f"expected a 4x4 matrix, got shape {rho.shape}")
    hermitized = (rho + rho.conj().T) / 2.0
    eigenvalues, vectors = np.linalg.eigh(hermitized)
    if float(eigenvalues.min()) >= -1e-14:
        return rho.copy()
    w = eigenvalues.copy()
    while (w < 0.0).any():
        worst = int(np.argmin(w))
        deficit = w[worst]
        w[worst] = 0.0
        positive = w > 0.0
        if not positive.any():
            raise ValueError("matrix has no positive spectral weight to redistribute")
        w[positive] += deficit / positive.sum()
    projected = (vectors * w) @ vectors.conj().T
    total = float(np.trace(projected).real)
    if total <= 0.0:
        raise ValueError("projected matrix has non-positive trace")
    return projected / total


def fidelity(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Uhlmann fidelity F(rho, sigma) = (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.

    Symmetric in its arguments and equal to <psi|rho|psi> when sigma is the
    pure state |psi><psi|. Tiny negative eigenvalues from rounding are
    clipped; the result is clamped to [0, 1].
    """
    rho = np.asarray(rho, dtype=complex)
    sigma = np.asarray(sigma, dtype=complex)
    if rho.shape != sigma.shape or rho.shape[0] != rho.shape[1]:
        raise ValueError("fidelity needs two square matrices of equal shape")
    w, v = np.linalg.eigh((rho + rho.conj().T) / 2.0)
    sqrt_rho = (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T
    inner = sqrt_rho @ sigma @ sqrt_rho
    inner_eigs = np.linalg.eigvalsh((inner + inner.conj().T) / 2.0)
    # rounding noise near 0 would contribute sqrt(eps) ~ 1e-8 per eigenvalue;
    # a relative floor keeps rank-deficient (pure) inputs exact
    floor = 64.0 * np.finfo(float).eps * max(inner_eigs.max(), 0.0)
    inner_eigs[inner_eigs < floor] = 0.0
    value = float(np.sqrt(inner_eigs).sum() ** 2)
    return min(max(value, 0.0), 1.0)


@dataclass(frozen=True)
class DecayFit:
    """Result of the exponential CHSH decay fit.

    tau_c is the fitted coherence time (microseconds, +inf when the data do
    not decay), v_ref the fitted visibility at tau_ref, lifetime_chsh the
    storage time where S crosses 2, and covariance the 2x2 covariance of the
    fitted (ln v_ref, 1/tau_c) parameters.
    """

    tau_c: float
    v_ref: float
    lifetime_chsh: float
    covariance: np.ndarray
    tau_ref: float

    def to_dict(self) -> dict:
        return {
            "tau_c": self.tau_c,
            "v_ref": self.v_ref,
            "lifetime_chsh": self.lifetime_chsh,
            "tau_ref": self.tau_ref,
            "covariance": [[float(v) for v in row] for row in np.asarray(self.covariance)],
        }


def fit_decay(points: Iterable, tau_ref: Optional[float] = None) -> DecayFit:
    """Weighted least squares fit of S(tau) = 2 sqrt 2 v_ref exp(-(tau - tau_ref)/tau_c).

    points is an iterable of (tau, S) or (tau, S, S_error) tuples, all with or
    all without errors; the fit runs on ln S, so errors propagate as
    S_error/S. Two points determine the model exactly (the fit degenerates to
    interpolation and the covariance is zero). Data at or above the quantum
    bound, or that do not decay, produce a warning rather than a failure; a
    non-decaying fit pins tau_c to +inf.
    """
    data = [tuple(p) for p in points]
    if len(data) < 2:
        raise ValueError("fit_decay needs at least two points")
    lengths = {len(p) for p in data}
    if not lengths <= {2, 3}:
        raise ValueError("points must be (tau, S) or (tau, S, S_error) tuples")
    if len(lengths) > 1:
        raise ValueError("either all points carry errors or none do")
    taus = np.array([p[0] for p in data], dtype=float)
    s_values = np.array([p[1] for p in data], dtype=float)
    if len(set(taus.tolist())) < 2:
        raise ValueError("fit_decay needs at least two distinct storage times")
    if np.any(s_values <= 0):
        raise ValueError("S values must be positive to fit in log space")
    if np.any(s_values >= TSIRELSON_BOUND):
        warnings.warn(
            "S value at or above the quantum bound 2*sqrt(2); the fitted visibility "
            "will not be meaningful",
            stacklevel=2,
        )
    with_errors = lengths == {3}
    if with_errors:
        errors = np.array([p[2] for p in data], dtype=float)
        if np.any(errors <= 0):
            raise ValueError("S errors must be positive")
        weights = (s_values / errors) ** 2
    else:
        weights = np.ones_like(s_values)

    if tau_ref is None:
        tau_ref = float(taus.min())
    y = np.log(s_values / TSIRELSON_BOUND)
    # parameters: y = a - b (tau - tau_ref) with a = ln v_ref, b = 1/tau_c
    design = np.column_stack([np.ones_like(taus), -(taus - tau_ref)])
    normal = design.T @ (weights[:, None] * design)
    rhs = design.T @ (weights * y)
    try:
        a, b = np.linalg.solve(normal, rhs)
    except np.linalg.LinAlgError as exc:
        raise ValueError("decay fit is singular (degenerate storage times)") from exc

    covariance = np.linalg.inv(normal)
    if not with_errors:
        dof = len(data) - 2
        if dof > 0:
            residuals = y - design @ np.array([a, b])
            covariance = covariance * float((weights * residuals**2).sum() / dof)
        else:
            covariance = np.zeros((2, 2))

    v_ref = float(math.exp(a))
    if b <= 0.0:
        warnings.warn(
            "fitted S does not decay with storage time; coherence time pinned to +inf",
            stacklevel=2,
        )
        tau_c = math.inf
    else:
        tau_c = 1.0 / float(b)

    s_ref = TSIRELSON_BOUND * v_ref
    if math.isinf(tau_c):
        lifetime = math.inf if s_ref > 2.0 else 0.0
    else:
        lifetime = tau_ref + tau_c * math.log(s_ref / 2.0)
    return DecayFit(
        tau_c=tau_c,
        v_ref=v_ref,
        lifetime_chsh=float(lifetime),
        covariance=covariance,
        tau_ref=float(tau_ref),
    )


def calibrate_visibility(
    targets: Sequence[Mapping], *, chi: float, tau_ref: float
) -> dict:
    """Invert the visibility model against three CHSH targets.

    targets is a sequence of three {"m":..., "tau":..., "s":...} mappings:
    two must share the same storage time at different mode counts (they fix
    the cross-mode coefficient beta) and two must share the larger mode count
    at different storage times (they fix tau_c). Returns a configuration
    patch {"v1":..., "beta":..., "tau_c":...}.

    Equal target values degrade gracefully (beta = 0, tau_c = +inf); targets
    that increase with m or with tau are rejected because the model cannot
    produce them.
    """
    if len(targets) != 3:
        raise ValueError("calibration needs exactly three targets")
    parsed = []
    for entry in targets:
        missing = {"m", "tau", "s"} - set(entry)
        if missing:
            raise ValueError(f"calibration target is missing keys: {sorted(missing)}")
        m = int(entry["m"])
        s = float(entry["s"])
        if m < 1:
            raise ValueError(f"target mode count must be at least 1, got {m}")
        if s <= 0:
            raise ValueError(f"target S must be positive, got {s}")
        parsed.append((m, float(entry["tau"]), s))

    mode_counts = sorted({m for m, _, _ in parsed})
    if len(mode_counts) != 2:
        raise ValueError("targets must cover exactly two mode counts")
    m_lo, m_hi = mode_counts
    lo_points = [p for p in parsed if p[0] == m_lo]
    hi_points = [p for p in parsed if p[0] == m_hi]
    if len(lo_points) != 1 or len(hi_points) != 2:
        raise ValueError(
            "targets must be one point at the low mode count and two at the high one"
        )
    (_, tau_a, s_a) = lo_points[0]
    hi_points.sort(key=lambda p: abs(p[1] - tau_a))
    (_, tau_b, s_b), (_, tau_d, s_d) = hi_points
    if tau_b != tau_a:
        raise ValueError(
            "one high-mode-count target must share the low-mode-count storage time"
        )
    if tau_d == tau_a:
        raise ValueError("the remaining target must use a different storage time")

    # decay leg: same m, two storage times
    if s_d > s_b:
        raise ValueError("target S increases with storage time; the model only decays")
    tau_c = math.inf if s_d == s_b else (tau_d - tau_b) / math.log(s_b / s_d)

    # multiplexing leg: same tau, two mode counts
    if s_a < s_b:
        raise ValueError("target S increases with mode count; the model only degrades")
    ratio = s_a / s_b
    denominator = chi * ((m_hi - 1) - ratio * (m_lo - 1))
    if denominator <= 0:
        raise ValueError("targets are inconsistent with the saturating visibility model")
    beta = (ratio - 1.0) / denominator

    decay_back = math.exp((tau_a - tau_ref) / tau_c) if not math.isinf(tau_c) else 1.0
    v1 = s_a / TSIRELSON_BOUND * (1.0 + beta * (m_lo - 1) * chi) * decay_back
    if v1 > 1.0:
        if v1 > 1.0 + 1e-6:
            warnings.warn(
                f"calibrated v1 = {v1:.6f} exceeds 1; clamping to the physical bound",
                stacklevel=2,
            )
        v1 = 1.0
    return {"v1": float(v1), "beta": float(beta), "tau_c": float(tau_c)}


def analytic_correlation(rho: np.ndarray, pair: SettingPair) -> float:
    """Exact correlation E = Tr[rho (A x B)] for one analyzer pair, through
    the same port probabilities the counting estimator sees."""
    p = joint_probabilities(rho, pair.stokes, pair.anti_stokes)
    return float(p[0, 0] + p[1, 1] - p[0, 1] - p[1, 0])


def analytic_bell_s(rho: np.ndarray, settings: BellSettings = CANONICAL_BELL) -> float:
    """Exact CHSH value of a state at the given angles."""
    pairs = settings.setting_pairs()
    values = [analytic_correlation(rho, pair) for pair in pairs]
    return values[0] - values[1] + values[2] + values[3]


def exact_coincidence_table(rho: np.ndarray, pairs: Sequence[SettingPair]) -> CoincidenceTable:
    """CoincidenceTable holding exact outcome probabilities instead of
    counts, for feeding the estimators their noiseless limit."""
    table = CoincidenceTable()
    for pair in pairs:
        # clip the odd -1e-17 rounding artifact so estimator preconditions hold
        p = np.clip(joint_probabilities(rho, pair.stokes, pair.anti_stokes), 0.0, None)
        table.rows.append(
            CoincidenceRow(
                pair,
                c_d1t1=p[0, 0], c_d1t2=p[0, 1], c_d2t1=p[1, 0], c_d2t2=p[1, 1],
                n_d1=p[0, 0] + p[0, 1], n_d2=p[1, 0] + p[1, 1], n_total=1,
            )
        )
    return table
