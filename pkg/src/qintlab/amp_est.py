"""Quantum mean estimation for n numbers in [0, 1].

The mean a of the loaded values equals the probability of measuring the
value ancilla in e_0 after one oracle application to the uniform
superposition.  Phase estimation with t ancilla qubits on the amplification
operator of that preparation returns an integer y in {0, ..., M-1},
M = 2**t, and the folded estimate sin(pi*y/M)**2.  A single run satisfies

    |estimate - a| <= 2*pi*sqrt(a*(1-a))/M + pi**2/M**2

with probability at least 8/pi**2, at a cost of M oracle queries
(M - 1 amplification steps plus one preparation).

Two execution paths produce the same outcome law: a full state-vector
simulation of the (t + m + 1)-qubit circuit, and direct sampling from the
closed-form phase-measurement distribution.  The first is ground truth for
small registers, the second stays cheap when the register would not fit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .ledger import ResourceLedger
from .qsim import QuantumState

SINGLE_RUN_CONFIDENCE = 8.0 / math.pi**2

# Largest (padded item count) * (Grover power budget) still simulated exactly
# when the execution mode is left on "auto".
AUTO_EXACT_LIMIT = 2**20


@dataclass(frozen=True)
class MeanEstimate:
    """Result of one mean-estimation run (or a boosted median of runs)."""

    value: float
    queries_used: int
    mode: str

    def __post_init__(self):
        if not 0.0 <= self.value <= 1.0:
            raise ValueError(f"estimate {self.value} outside [0, 1]")


class RealOracle:
    """Value-loading oracle for numbers x_l in [0, 1].

    Maps the data state b_l with ancilla e_0 to
    b_l (sqrt(x_l) e_0 + sqrt(1 - x_l) e_1).  Item counts that are not a
    power of two are padded with zeros; estimates are rescaled by
    n_padded / n so the mean of the original items is recovered.
    """

    def __init__(self, values):
        vals = np.asarray(values, dtype=float)
        if vals.ndim != 1 or vals.size == 0:
            raise ValueError("oracle needs a non-empty 1-d value vector")
        if vals.min() < -1e-12 or vals.max() > 1.0 + 1e-12:
            raise ValueError("oracle values must lie in [0, 1]")
        vals = np.clip(vals, 0.0, 1.0)
        self.n = int(vals.size)
        self.m_data = max(0, (self.n - 1).bit_length())
        self.n_padded = 2**self.m_data
        padded = np.zeros(self.n_padded)
        padded[: self.n] = vals
        self.values = vals
        self.padded_values = padded

    def padded_mean(self) -> float:
        return float(self.padded_values.sum() / self.n_padded)


def prepared_state(oracle: RealOracle) -> QuantumState:
    """Uniform superposition with values loaded onto the last qubit.

    The ancilla is the least significant qubit, so index 2*l is b_l e_0 and
    the probability of measuring the ancilla in e_0 equals the padded mean.
    """
    amps = _prepared_amplitudes(oracle)
    return QuantumState(oracle.m_data + 1, amps)


def _prepared_amplitudes(oracle: RealOracle) -> np.ndarray:
    amps = np.empty(2 * oracle.n_padded, dtype=np.complex128)
    amps[0::2] = np.sqrt(oracle.padded_values / oracle.n_padded)
    amps[1::2] = np.sqrt((1.0 - oracle.padded_values) / oracle.n_padded)
    return amps


def _amplifier(oracle: RealOracle) -> tuple[np.ndarray, Callable[[np.ndarray], np.ndarray]]:
    """Initial vector and one application of the amplification operator.

    The operator is the reflection about the prepared state composed with
    the sign flip on the good (ancilla e_0) subspace; it acts in O(dim).
    """
    psi = _prepared_amplitudes(oracle)

    def apply(vec: np.ndarray) -> np.ndarray:
        w = vec.copy()
        w[0::2] *= -1.0
        return 2.0 * (psi.conj() @ w) * psi - w

    return psi, apply


def _log2_power_of_two(M: int) -> int:
    t = int(M).bit_length() - 1
    if M < 2 or 2**t != M:
        raise ValueError(f"Grover-power budget must be a power of two >= 2, got {M}")
    return t


def exact_outcome_distribution(oracle: RealOracle, M: int) -> np.ndarray:
    """Distribution of the raw phase readout y from the full simulation."""
    _log2_power_of_two(M)
    psi, apply = _amplifier(oracle)
    dim = psi.size
    register = np.empty((M, dim), dtype=np.complex128)
    vec = psi / math.sqrt(M)
    for y in range(M):
        register[y] = vec
        if y + 1 < M:
            vec = apply(vec)
    transformed = np.fft.fft(register, axis=0) / math.sqrt(M)
    return (np.abs(transformed) ** 2).sum(axis=1)


def _phase_kernel(delta: np.ndarray, M: int) -> np.ndarray:
    """Probability of a phase readout offset by delta (mod 1) from the truth."""
    frac = np.mod(delta, 1.0)
    dist = np.minimum(frac, 1.0 - frac)
    exact = dist < 1e-12
    safe = np.where(exact, 0.25, frac)
    ratio = np.sin(M * np.pi * safe) / (M * np.sin(np.pi * safe))
    return np.where(exact, 1.0, ratio**2)


def _raw_phase_distribution(a: float, M: int) -> np.ndarray:
    omega = math.asin(math.sqrt(min(max(a, 0.0), 1.0))) / math.pi
    y = np.arange(M)
    return 0.5 * (_phase_kernel(y / M - omega, M) + _phase_kernel(y / M + omega, M))


def _fold(raw: np.ndarray, M: int) -> tuple[np.ndarray, np.ndarray]:
    j = np.arange(M // 2 + 1)
    estimates = np.sin(np.pi * j / M) ** 2
    probs = raw[j].copy()
    if M >= 4:
        probs[1 : M // 2] += raw[M - j[1 : M // 2]]
    return estimates, probs


def phase_estimation_distribution(a: float, M: int) -> tuple[np.ndarray, np.ndarray]:
    """Exact outcome law of the folded estimate sin(pi*j/M)**2, j = 0..M/2.

    Returns the estimate values and their probabilities; the probabilities
    sum to one up to roundoff.  This is the independent analytic oracle for
    the simulated estimator and the sampling law of the fast path.
    """
    if not 0.0 <= a <= 1.0 + 1e-12:
        raise ValueError(f"amplitude {a} outside [0, 1]")
    return _fold(_raw_phase_distribution(a, M), M)


def exact_estimate_distribution(oracle: RealOracle, M: int) -> tuple[np.ndarray, np.ndarray]:
    """Folded estimate law from the full simulation, for cross-validation."""
    return _fold(exact_outcome_distribution(oracle, M), M)


def _gate_count(m_data: int, t: int, M: int) -> int:
    # Ancilla Hadamards, preparation (Walsh-Hadamard plus one oracle gate),
    # M - 1 amplification steps at 2*(m_data + 1) + 4 gates each, inverse
    # Fourier transform on t qubits.
    return t + (m_data + 1) + (M - 1) * (2 * m_data + 6) + t * (t + 1) // 2


def _charge(ledger: ResourceLedger | None, m_data: int, t: int, M: int) -> None:
    if ledger is not None:
        ledger.quantum_queries += M
        ledger.random_bits += t
        ledger.gates += _gate_count(m_data, t, M)


def sample_estimate_from_amplitude(
    a: float, M: int, rng: np.random.Generator
) -> float:
    """Draw one folded estimate for a known amplitude."""
    estimates, probs = phase_estimation_distribution(a, M)
    probs = np.clip(probs, 0.0, None)
    return float(estimates[rng.choice(probs.size, p=probs / probs.sum())])


def estimate_mean_from_amplitude(
    a_padded: float,
    n: int,
    n_padded: int,
    M: int,
    rng: np.random.Generator,
    ledger: ResourceLedger | None = None,
) -> MeanEstimate:
    """Analytic-path run for an oracle too large to materialise.

    ``a_padded`` is the mean of the zero-padded item vector; the caller
    streams it from however many values exist.  Accounting matches a run on
    the materialised oracle.
    """
    t = _log2_power_of_two(M)
    if n_padded < n or n_padded != 2 ** (n_padded.bit_length() - 1):
        raise ValueError(f"padded count {n_padded} invalid for n={n}")
    raw = sample_estimate_from_amplitude(a_padded, M, rng)
    m_data = n_padded.bit_length() - 1
    _charge(ledger, m_data, t, M)
    return MeanEstimate(value=min(1.0, raw * n_padded / n), queries_used=M, mode="analytic")


def estimate_mean(
    oracle: RealOracle,
    M: int,
    rng: np.random.Generator,
    mode: str = "auto",
    ledger: ResourceLedger | None = None,
) -> MeanEstimate:
    """One estimation run with a Grover-power budget of M = 2**t.

    ``mode`` is "exact" (full register simulation), "analytic" (sample the
    closed-form law), or "auto" (exact while the register stays small).
    Estimates for padded oracles are rescaled by n_padded / n and clipped
    to [0, 1].
    """
    t = _log2_power_of_two(M)
    if mode not in ("auto", "exact", "analytic"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "auto":
        mode = "exact" if oracle.n_padded * M <= AUTO_EXACT_LIMIT else "analytic"
    if mode == "exact":
        probs = exact_outcome_distribution(oracle, M)
        y = int(rng.choice(M, p=np.clip(probs, 0.0, None) / probs.sum()))
        raw = math.sin(math.pi * y / M) ** 2
    else:
        raw = sample_estimate_from_amplitude(oracle.padded_mean(), M, rng)
    _charge(ledger, oracle.m_data, t, M)
    value = min(1.0, raw * oracle.n_padded / oracle.n)
    return MeanEstimate(value=value, queries_used=M, mode=mode)


def smallest_power_for_error(eps: float) -> int:
    """Smallest M = 2**t whose worst-case single-run error bound is <= eps.

    The bound at a = 1/2 is pi/M + pi**2/M**2, so M grows linearly in 1/eps.
    """
    if eps <= 0:
        raise ValueError("target error must be positive")
    M = 2
    while math.pi / M + math.pi**2 / M**2 > eps * (1.0 + 1e-12):
        M *= 2
    return M


def median_boost(
    single_run: Callable[[np.random.Generator], MeanEstimate],
    r: int,
    rng: np.random.Generator,
) -> MeanEstimate:
    """Median of r independent runs; r must be odd.

    When each run succeeds with probability at least 3/4, the boosted
    failure probability is at most the Binomial(r, 1/4) upper tail at
    ceil(r/2).
    """
    if r < 1 or r % 2 == 0:
        raise ValueError(f"repetition count must be odd, got {r}")
    runs = [single_run(rng) for _ in range(r)]
    values = sorted(est.value for est in runs)
    modes = {est.mode for est in runs}
    return MeanEstimate(
        value=values[r // 2],
        queries_used=sum(est.queries_used for est in runs),
        mode=modes.pop() if len(modes) == 1 else "mixed",
    )
