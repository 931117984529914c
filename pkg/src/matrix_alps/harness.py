"""Problem generation, Monte-Carlo sweeps, result tables, the toy example and image denoising."""

from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .exceptions import InvalidInputError, InvalidRankError, SolverDiverged
from .linalg import best_rank_k
from .operators import LinearOperator, MaskOperator, Observation, make_operator
from .solvers import MomentumPolicy, SolverConfig, solve

OPERATOR_KINDS = ("mask", "structured")


@dataclass(frozen=True)
class ProblemSpec:
    m: int
    n: int
    k_true: int
    sr: float
    noise_energy: float = 0.0
    operator_kind: str = "structured"
    trials: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise InvalidInputError("dimensions must be positive")
        if not 1 <= self.k_true <= min(self.m, self.n):
            raise InvalidRankError(f"k_true={self.k_true} outside [1, {min(self.m, self.n)}]")
        if not 0 < self.sr <= 1:
            raise InvalidInputError("SR must lie in (0, 1]")
        if self.p < 1:
            raise InvalidInputError(f"SR={self.sr} gives no measurements")
        if self.noise_energy < 0:
            raise InvalidInputError("noise energy must be nonnegative")
        if self.operator_kind not in OPERATOR_KINDS:
            raise InvalidInputError(f"unknown operator kind {self.operator_kind!r}")
        if self.trials < 1:
            raise InvalidInputError("trials must be positive")

    @property
    def p(self) -> int:
        return int(math.floor(self.sr * self.m * self.n))

    @property
    def fr(self) -> float:
        """Freedom ratio ``k (m + n - k) / p``."""
        return self.k_true * (self.m + self.n - self.k_true) / self.p


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Independent generator for one Monte-Carlo trial."""
    return np.random.default_rng(np.random.SeedSequence([seed, trial]))


def random_low_rank(m: int, n: int, k: int, rng) -> np.ndarray:
    """``L R^T / ||L R^T||_F`` with Gaussian factors and rank exactly ``k``."""
    while True:
        X = rng.standard_normal((m, k)) @ rng.standard_normal((n, k)).T
        s = np.linalg.svd(X, compute_uv=False)
        if s[k - 1] > 1e-10 * s[0]:
            return X / np.linalg.norm(X)


def generate_problem(spec: ProblemSpec, trial: int = 0) -> tuple[np.ndarray, LinearOperator, Observation]:
    """Signal, operator and noisy observation for one trial.

    The noise is a Gaussian vector rescaled to ``||eps||_2 = spec.noise_energy``.
    """
    rng = trial_rng(spec.seed, trial)
    X = random_low_rank(spec.m, spec.n, spec.k_true, rng)
    A = make_operator(spec.operator_kind, spec.m, spec.n, spec.sr, int(rng.integers(2**32)))
    y = A.apply(X)
    if spec.noise_energy > 0:
        eps = rng.standard_normal(A.p)
        y = y + eps * (spec.noise_energy / np.linalg.norm(eps))
    return X, A, Observation(y, A, spec.noise_energy)


@dataclass
class TrialResult:
    trial: int
    iterations: int
    rel_error: float
    time_s: float
    diverged: bool = False
    error_trace: list[float] = field(default_factory=list)


@dataclass
class ExperimentReport:
    spec: ProblemSpec
    config: SolverConfig
    trials: list[TrialResult] = field(default_factory=list)

    @property
    def algorithm(self) -> str:
        return self.config.algorithm

    @property
    def median_iterations(self) -> float:
        return float(np.median([t.iterations for t in self.trials]))

    @property
    def median_error(self) -> float:
        return float(np.median([t.rel_error for t in self.trials]))

    @property
    def median_time(self) -> float:
        return float(np.median([t.time_s for t in self.trials]))

    @property
    def any_diverged(self) -> bool:
        return any(t.diverged for t in self.trials)

    def fingerprint(self) -> list[tuple]:
        """Everything except wall time; equal for identical seeds."""
        return [(t.trial, t.iterations, t.rel_error, t.diverged, tuple(t.error_trace)) for t in self.trials]


def run_monte_carlo(spec: ProblemSpec, configs: list[SolverConfig]) -> list[ExperimentReport]:
    """Run every config on the same ``spec.trials`` problem realizations.

    A diverging run is recorded as a trial with infinite error instead of
    aborting the sweep.
    """
    reports = [ExperimentReport(spec, c) for c in configs]
    for trial in range(spec.trials):
        X_true, A, obs = generate_problem(spec, trial)
        for rep in reports:
            t0 = time.perf_counter()
            try:
                X_hat, run = solve(A, obs.y, rep.config, X_true=X_true)
            except SolverDiverged as exc:
                rep.trials.append(TrialResult(trial, exc.iteration, math.inf, time.perf_counter() - t0, True))
                continue
            rep.trials.append(
                TrialResult(
                    trial,
                    run.iterations,
                    float(np.linalg.norm(X_hat - X_true)),  # ||X*||_F = 1
                    time.perf_counter() - t0,
                    error_trace=[r.err_vs_truth for r in run.trace],
                )
            )
    return reports


TABLE_COLUMNS = ("m", "n", "k", "noise", "FR", "algorithm", "median_iter", "median_err", "median_time")


def _table_row(rep: ExperimentReport) -> list:
    s = rep.spec
    return [s.m, s.n, s.k_true, s.noise_energy, s.fr, rep.algorithm,
            rep.median_iterations, rep.median_error, rep.median_time]


def emit_table(reports: list[ExperimentReport], fmt: str = "csv") -> str:
    """Render one row per report, as CSV (lossless floats) or aligned text."""
    rows = [_table_row(r) for r in reports]
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(TABLE_COLUMNS)
        for row in rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in row])
        return buf.getvalue()
    if fmt == "text":
        cells = [list(TABLE_COLUMNS)]
        for row in rows:
            m, n, k, noise, fr, algo, it, err, t = row
            cells.append([str(m), str(n), str(k), f"{noise:.0e}", f"{fr:.3f}", algo, f"{it:g}", f"{err:.2e}", f"{t:.3f}"])
        widths = [max(len(c[i]) for c in cells) for i in range(len(TABLE_COLUMNS))]
        return "".join("  ".join(c.rjust(w) for c, w in zip(line, widths)) + "\n" for line in cells)
    raise InvalidInputError(f"unknown table format {fmt!r}")


def parse_table(text: str) -> list[dict]:
    """Inverse of ``emit_table(..., "csv")``."""
    out = []
    for row in csv.DictReader(io.StringIO(text)):
        rec = {}
        for key, val in row.items():
            if key == "algorithm":
                rec[key] = val
            elif key in ("m", "n", "k"):
                rec[key] = int(val)
            else:
                rec[key] = float(val)
        out.append(rec)
    return out


# ---------------------------------------------------------------------------
# toy completion problem

TOY_TRUTH = np.array(
    [[2, 2, 1, 1],
     [2, 2, 1, 1],
     [2, 2, 1, 1],
     [2, 2, 1, 1],
     [1, 1, 2, 1]],
    dtype=float,
)
TOY_MASK = np.ones((5, 4), dtype=bool)
TOY_MASK[2, :3] = False
TOY_MASK[3, 1:3] = False

TOY_ITERATIONS = 300


def toy_config(algorithm: str) -> SolverConfig:
    # the toy mask violates rank-RIP badly; alps2 uses the analyzed constant momentum 1/4 here
    momentum = MomentumPolicy("constant", tau=0.25) if algorithm in ("alps2", "alps2_qr") else MomentumPolicy()
    return SolverConfig(algorithm=algorithm, k=2, max_iters=TOY_ITERATIONS, tol=1e-12, momentum=momentum)


def run_toy_example(algorithm: str, config: SolverConfig | None = None) -> np.ndarray:
    """Complete the 5x4 rank-2 toy matrix from 15 entries; returns the rounded estimate."""
    A = MaskOperator.from_boolean(TOY_MASK)
    X, _ = solve(A, A.apply(TOY_TRUTH), config or toy_config(algorithm))
    return np.round(X) + 0.0


# ---------------------------------------------------------------------------
# images


def read_pgm(path) -> np.ndarray:
    """Read an 8-bit binary PGM (P5) image as a float matrix."""
    data = Path(path).read_bytes()
    tokens: list[bytes] = []
    pos = 0
    while len(tokens) < 4:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos >= len(data):
            raise InvalidInputError("truncated PGM header")
        if data[pos : pos + 1] == b"#":
            pos = data.find(b"\n", pos)
            if pos < 0:
                raise InvalidInputError("truncated PGM header")
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos])
    if tokens[0] != b"P5":
        raise InvalidInputError("not a binary PGM (P5) file")
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError as exc:
        raise InvalidInputError("malformed PGM header") from exc
    if maxval != 255:
        raise InvalidInputError("only 8-bit PGM (maxval 255) is supported")
    pixels = data[pos + 1 : pos + 1 + width * height]
    if width < 1 or height < 1 or len(pixels) != width * height:
        raise InvalidInputError("PGM pixel data has the wrong size")
    return np.frombuffer(pixels, dtype=np.uint8).reshape(height, width).astype(float)


def write_pgm(path, image) -> None:
    img = np.clip(np.round(np.asarray(image, dtype=float)), 0, 255).astype(np.uint8)
    h, w = img.shape
    Path(path).write_bytes(b"P5\n%d %d\n255\n" % (w, h) + img.tobytes())


def snr_db(reference, estimate) -> float:
    """``20 log10(||ref||_F / ||estimate - ref||_F)``; infinite for an exact match."""
    err = float(np.linalg.norm(np.asarray(estimate) - reference))
    if err == 0:
        return math.inf
    return 20.0 * math.log10(float(np.linalg.norm(reference)) / err)


def denoise_image(
    path,
    k: int,
    observe_fraction: float,
    config: SolverConfig | None = None,
    seed: int = 0,
    rank_k_reference: bool = False,
) -> tuple[np.ndarray, float]:
    """Fill in a uniformly subsampled grayscale image with a rank-``k`` estimate.

    With ``rank_k_reference`` set, the pixels are sampled from the best rank-k
    approximation of the image and the SNR is measured against it; otherwise
    the raw image is both observed and used as the reference.
    """
    image = read_pgm(path) if not isinstance(path, np.ndarray) else np.asarray(path, dtype=float)
    m, n = image.shape
    if not 1 <= k <= min(m, n):
        raise InvalidRankError(f"k={k} outside [1, {min(m, n)}]")
    if not 0 < observe_fraction <= 1:
        raise InvalidInputError("observe_fraction must lie in (0, 1]")
    config = replace(config or SolverConfig(algorithm="alps2"), k=k)
    reference = best_rank_k(image, k)[1] if rank_k_reference else image
    A = MaskOperator.random(m, n, max(1, int(math.floor(observe_fraction * m * n))), seed)
    X_hat, _ = solve(A, A.apply(reference), config)
    return X_hat, snr_db(reference, X_hat)
