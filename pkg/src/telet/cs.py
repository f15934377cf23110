"""Sensing-matrix design and the synthetic sparse-recovery harness.

The measurement model is y = Theta u with u = Psi s, s K-sparse.  A sensing
matrix is fit to a low-coherence target equivalent dictionary either by plain
least squares or by the representation-error-aware model

    omega ||X_target - Theta Psi||_F^2 + (1 - omega) ||Theta E||_F^2

whose Theta-block minimizer is closed form.  Recovery uses orthogonal
matching pursuit; reconstruction quality is scored by MSE(U_hat) =
||U_hat - U*||_F^2 / (d R).
"""

from __future__ import annotations

import logging
import math
import time
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.fft

from .baselines import alternating_projection
from .frame import Frame, coherence_of_matrix, normalize_columns
from .rng import generator
from .solver import SolverConfig, solve

log = logging.getLogger("telet.cs")

METHOD_TELET = "telet"
METHOD_LS_ETF = "ls_etf_target"
METHOD_GAUSSIAN = "gaussian_random"
DEFAULT_METHODS = (METHOD_TELET, METHOD_LS_ETF, METHOD_GAUSSIAN)


def haar_dictionary(n: int) -> np.ndarray:
    """Orthonormal Haar wavelet matrix; ``n`` must be a power of two."""
    if n < 1 or n & (n - 1):
        raise ValueError(f"Haar dictionary needs a power-of-two size, got {n}")
    h = np.array([[1.0]])
    while h.shape[0] < n:
        m = h.shape[0]
        top = np.kron(h, [1.0, 1.0])
        bottom = np.kron(np.eye(m), [1.0, -1.0])
        h = np.vstack([top, bottom]) / math.sqrt(2.0)
    return h


def dct_dictionary(n: int) -> np.ndarray:
    """Orthonormal DCT-II matrix of size ``n``."""
    if n < 1:
        raise ValueError("dictionary size must be positive")
    return scipy.fft.dct(np.eye(n), axis=0, norm="ortho")


@dataclass
class SensingProblem:
    """Dictionary, measurement dimension, trade-off weight, and the
    representation-error term (raw N x R samples or their second moment)."""

    dictionary: np.ndarray
    d: int
    omega: float = 0.5
    sre: np.ndarray | None = None
    sre_second_moment: np.ndarray | None = None

    def __post_init__(self) -> None:
        self.dictionary = np.asarray(self.dictionary)
        if self.dictionary.ndim != 2:
            raise ValueError("dictionary must be a matrix")
        if not 0.0 <= self.omega <= 1.0:
            raise ValueError(f"omega must lie in [0, 1], got {self.omega}")
        if self.d < 1:
            raise ValueError("measurement dimension must be positive")

    @property
    def n(self) -> int:
        return self.dictionary.shape[1]

    def second_moment(self) -> np.ndarray:
        """E E^H of the representation error (zeros when no error given)."""
        if self.sre_second_moment is not None:
            return np.asarray(self.sre_second_moment)
        if self.sre is not None:
            e = np.asarray(self.sre)
            return e @ e.conj().T
        n = self.dictionary.shape[0]
        return np.zeros((n, n), dtype=self.dictionary.dtype)


def ls_sensing_matrix(x_target: np.ndarray, psi: np.ndarray) -> np.ndarray:
    """Minimizer of ||X_target - Theta Psi||_F^2 (least-norm if Psi is
    rank-deficient, with a warning)."""
    x_target = np.asarray(x_target)
    psi = np.asarray(psi)
    if psi.ndim != 2 or x_target.shape[1] != psi.shape[1]:
        raise ValueError("inconsistent target/dictionary shapes")
    if np.linalg.matrix_rank(psi) < min(psi.shape):
        warnings.warn("dictionary is rank-deficient; returning the least-norm fit")
    theta_h, *_ = np.linalg.lstsq(psi.conj().T, x_target.conj().T, rcond=None)
    return theta_h.conj().T


def sre_aware_sensing_matrix(problem: SensingProblem, x_target: np.ndarray) -> np.ndarray:
    """Closed-form Theta minimizing the error-aware objective for a fixed
    target.  A tiny ridge is added (and warned about) if the system matrix is
    singular."""
    psi = problem.dictionary
    x_target = np.asarray(x_target)
    omega = problem.omega
    system = omega * (psi @ psi.conj().T) + (1.0 - omega) * problem.second_moment()
    rhs = omega * (x_target @ psi.conj().T)
    try:
        theta_h = np.linalg.solve(system.conj().T, rhs.conj().T)
    except np.linalg.LinAlgError:
        warnings.warn("singular error-aware system; adding a 1e-10 ridge")
        ridge = 1e-10 * np.trace(system).real / system.shape[0]
        system = system + ridge * np.eye(system.shape[0], dtype=system.dtype)
        theta_h = np.linalg.solve(system.conj().T, rhs.conj().T)
    return theta_h.conj().T


def sensing_objective(problem: SensingProblem, theta: np.ndarray, x_target: np.ndarray) -> float:
    """Value of the error-aware model at (Theta, X_target)."""
    psi = problem.dictionary
    fit = np.linalg.norm(x_target - theta @ psi) ** 2
    spread = float(np.real(np.trace(theta @ problem.second_moment() @ theta.conj().T)))
    return float(problem.omega * fit + (1.0 - problem.omega) * spread)


def optimize_sensing(
    problem: SensingProblem,
    telet_config: SolverConfig | None = None,
    n_alternations: int = 10,
    theta0: np.ndarray | None = None,
) -> tuple[np.ndarray, Frame, list[dict]]:
    """Alternate coherence-driven target updates with the closed-form Theta fit.

    Each alternation warm-starts the frame solver from the current normalized
    equivalent dictionary, then refits Theta.  Per-alternation records carry
    the model objective and the equivalent-dictionary coherence.
    """
    telet_config = telet_config or SolverConfig(max_outer_iters=200, acceleration="squarem")
    psi = problem.dictionary
    field = "real" if (not np.iscomplexobj(psi) and (theta0 is None or not np.iscomplexobj(theta0))) else "complex"
    if theta0 is None:
        rng = generator(telet_config.rng_seed, "sensing-init")
        theta = rng.standard_normal((problem.d, psi.shape[0])) / math.sqrt(problem.d)
        if field == "complex":
            theta = theta + 1j * rng.standard_normal(theta.shape) / math.sqrt(problem.d)
    else:
        theta = np.asarray(theta0)
    records: list[dict] = []
    target = Frame(field, normalize_columns(theta @ psi))
    for alternation in range(1, n_alternations + 1):
        warm = Frame(field, normalize_columns(theta @ psi))
        target, _ = solve(warm, telet_config)
        theta = sre_aware_sensing_matrix(problem, target.data)
        records.append(
            {
                "alternation": alternation,
                "objective": sensing_objective(problem, theta, target.data),
                "mu_ed": coherence_of_matrix(theta @ psi),
            }
        )
    return theta, target, records


def omp_recover(y: np.ndarray, a: np.ndarray, k: int) -> np.ndarray:
    """K-sparse recovery by orthogonal matching pursuit.

    Greedy max-correlation atom selection (column-normalized), least-squares
    refit on the active set, residual update; exits early on a vanishing
    residual or a repeated atom.
    """
    y = np.asarray(y)
    a = np.asarray(a)
    d, n = a.shape
    if k > d:
        raise ValueError(f"sparsity {k} exceeds measurement dimension {d}")
    col_norms = np.linalg.norm(a, axis=0)
    if np.any(col_norms < 1e-14):
        raise ValueError("dictionary columns must be nonzero")
    s_hat = np.zeros(n, dtype=np.promote_types(a.dtype, y.dtype))
    support: list[int] = []
    residual = y.astype(s_hat.dtype, copy=True)
    coeffs = np.zeros(0)
    y_scale = float(np.linalg.norm(y))
    for _ in range(k):
        if float(np.linalg.norm(residual)) <= 1e-12 * max(y_scale, 1.0):
            break
        atom = int(np.argmax(np.abs(a.conj().T @ residual) / col_norms))
        if atom in support:
            break
        support.append(atom)
        coeffs, *_ = np.linalg.lstsq(a[:, support], y, rcond=None)
        residual = y - a[:, support] @ coeffs
    if support:
        s_hat[support] = coeffs
    return s_hat


@dataclass
class SparseSignalSet:
    """Synthetic signals u_t = Psi s_t + noise with exactly-K-sparse s_t."""

    coefficients: np.ndarray
    clean_signals: np.ndarray
    noise: np.ndarray
    sparsity: int
    sigma2: float
    seed: object = None

    @property
    def signals(self) -> np.ndarray:
        return self.clean_signals + self.noise


def make_sparse_signals(psi: np.ndarray, k: int, r: int, sigma2: float, rng) -> SparseSignalSet:
    """Draw R exactly-K-sparse columns (uniform supports, standard-normal
    values) and contaminate Psi s with white noise of variance sigma2."""
    rng = np.random.default_rng(rng)
    n = psi.shape[1]
    if not 1 <= k <= n:
        raise ValueError(f"sparsity must lie in [1, {n}], got {k}")
    coeffs = np.zeros((n, r))
    for t in range(r):
        support = rng.choice(n, size=k, replace=False)
        coeffs[support, t] = rng.standard_normal(k)
    clean = psi @ coeffs
    noise = math.sqrt(sigma2) * rng.standard_normal((psi.shape[0], r))
    return SparseSignalSet(coeffs, clean, noise, k, sigma2)


def harness_mse(reconstructed: np.ndarray, reference: np.ndarray, d: int) -> float:
    """Reconstruction score ||U_hat - U*||_F^2 / (d R)."""
    r = reference.shape[1]
    return float(np.linalg.norm(reconstructed - reference) ** 2 / (d * r))


@dataclass
class ExperimentSpec:
    """Grid definition for the synthetic recovery experiment."""

    n: int = 32
    d_list: tuple = (10,)
    k_list: tuple = (4,)
    r: int = 50
    sigma2: float = 0.25
    omega: float = 0.5
    seeds: tuple = (0,)
    methods: tuple = DEFAULT_METHODS
    n_alternations: int = 6
    telet_iters: int = 150
    telet_inner_iters: int = 60
    baseline_iters: int = 1500

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentSpec":
        known = {f.name for f in cls.__dataclass_fields__.values()}  # type: ignore[attr-defined]
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown experiment spec keys: {sorted(unknown)}")
        spec = cls(**{k: tuple(v) if isinstance(v, list) else v for k, v in raw.items()})
        for method in spec.methods:
            if method not in DEFAULT_METHODS:
                raise ValueError(f"unknown method {method!r}; expected subset of {DEFAULT_METHODS}")
        return spec


def _build_theta(method: str, spec: ExperimentSpec, problem: SensingProblem, psi: np.ndarray, seed: int) -> np.ndarray:
    if method == METHOD_GAUSSIAN:
        rng = generator(seed, "cs", "gaussian", f"d{problem.d}")
        return rng.standard_normal((problem.d, psi.shape[0])) / math.sqrt(problem.d)
    if method == METHOD_LS_ETF:
        ap_seed = int(generator(seed, "cs", "ap", f"d{problem.d}").integers(2**31))
        target, _ = alternating_projection(
            problem.d, problem.n, "katsaggelos", max_iters=spec.baseline_iters,
            seed=ap_seed, field="real",
        )
        return ls_sensing_matrix(target.data, psi)
    if method == METHOD_TELET:
        cfg = SolverConfig(
            max_outer_iters=spec.telet_iters,
            inner_iters=spec.telet_inner_iters,
            acceleration="squarem",
            rng_seed=seed,
            trace_every=max(1, spec.telet_iters),
        )
        theta, _, _ = optimize_sensing(problem, cfg, n_alternations=spec.n_alternations)
        return theta
    raise ValueError(f"unknown method {method!r}")


def _run_cell(spec: ExperimentSpec, d: int, k: int, seed: int) -> list[dict]:
    psi = haar_dictionary(spec.n)
    signal_rng = generator(seed, "cs", "signals", f"d{d}", f"K{k}")
    signals = make_sparse_signals(psi, k, spec.r, spec.sigma2, signal_rng)
    problem = SensingProblem(dictionary=psi, d=d, omega=spec.omega, sre=signals.noise)
    rows = []
    for method in spec.methods:
        start = time.perf_counter()
        theta = _build_theta(method, spec, problem, psi, seed)
        equivalent = theta @ psi
        reconstructed = np.zeros_like(signals.clean_signals)
        for t in range(spec.r):
            y = theta @ signals.signals[:, t]
            s_hat = omp_recover(y, equivalent, k)
            reconstructed[:, t] = psi @ s_hat
        wall_ms = (time.perf_counter() - start) * 1e3
        rows.append(
            {
                "method": method,
                "d": d,
                "K": k,
                "seed": seed,
                "MSE": harness_mse(reconstructed, signals.clean_signals, d),
                "mu_ED": coherence_of_matrix(equivalent),
                "wall_ms": wall_ms,
            }
        )
    return rows


def run_synthetic_experiment(spec: ExperimentSpec | dict, threads: int = 1) -> list[dict]:
    """Run the (method, d, K, seed) grid; returns one result row per cell and
    method.  Deterministic end to end for fixed seeds; worker threads only
    parallelize independent cells and never change the output order."""
    if isinstance(spec, dict):
        spec = ExperimentSpec.from_dict(spec)
    cells = [(d, k, seed) for seed in spec.seeds for d in spec.d_list for k in spec.k_list]
    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(lambda cell: _run_cell(spec, *cell), cells))
    else:
        chunks = [_run_cell(spec, *cell) for cell in cells]
    return [row for chunk in chunks for row in chunk]


def psnr(reference, reconstructed, peak: float = 255.0) -> float:
    """Peak signal-to-noise ratio in dB over the 8-bit range (``inf`` for
    identical inputs)."""
    reference = np.asarray(reference, dtype=np.float64)
    reconstructed = np.asarray(reconstructed, dtype=np.float64)
    if reference.shape != reconstructed.shape:
        raise ValueError("shape mismatch")
    mse = float(np.mean((reference - reconstructed) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(peak * peak / mse)


def percent_decrease(mu_a: float, mu_b: float) -> float:
    """Signed percentage decrease from ``mu_a`` to ``mu_b``."""
    if mu_a <= 0:
        raise ValueError("reference coherence must be positive")
    return (mu_a - mu_b) / mu_a * 100.0
