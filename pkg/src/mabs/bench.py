"""Timing harness for signcryption, designcryption and revocation.

Only the cryptographic call sits inside the timed region. Each suite sweeps
one size parameter and reports mean/stddev per point plus a least-squares
summary (slope, intercept, R^2) and a monotonicity flag.
"""

from __future__ import annotations

import csv
import io
import logging
import statistics
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from .config import SETTINGS
from .errors import ConfigurationError, ProviderUnavailable
from .models import BenchRow, BenchSummary
from .pairing import BilinearProvider
from .randomness import make_rng
from .revocation import AccessListTable, PrimeRegistry, revoke
from .scheme import (
    authority_setup,
    dec_key_gen,
    designcrypt,
    setup_from_controllers,
    sign_key_gen,
    signcrypt,
    ver_key_gen,
)

logger = logging.getLogger(__name__)

CSV_COLUMNS = ("suite", "param", "mean_ms", "std_ms", "n")
POLICY_SIZES = tuple(range(2, 21, 2))
ATTRIBUTE_COUNTS = (1,) + tuple(range(2, 21, 2))
USER_COUNTS = (10, 50, 100, 150, 200, 250, 300, 350, 400, 450, 500)
PAYLOAD = b"\x00" * 256

AUTHORITY = "bench"
SIGNER = "sender"


@dataclass
class BenchReport:
    rows: List[BenchRow] = field(default_factory=list)

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in self.rows:
            writer.writerow(
                [row.suite, row.param, f"{row.mean_ms:.4f}", f"{row.std_ms:.4f}", row.n]
            )
        return buffer.getvalue()

    def suites(self) -> List[str]:
        return sorted({row.suite for row in self.rows})

    def summaries(self) -> List[BenchSummary]:
        return [summarize([r for r in self.rows if r.suite == s]) for s in self.suites()]


def summarize(rows: Sequence[BenchRow]) -> BenchSummary:
    ordered = sorted(rows, key=lambda r: r.param)
    xs = [float(r.param) for r in ordered]
    ys = [r.mean_ms for r in ordered]
    summary = BenchSummary(
        suite=ordered[0].suite if ordered else "",
        points=len(ordered),
        monotonic=all(b >= a for a, b in zip(ys, ys[1:])),
    )
    if len(ordered) >= 2 and len(set(xs)) > 1:
        slope, intercept = statistics.linear_regression(xs, ys)
        summary.slope_ms = slope
        summary.intercept_ms = intercept
        try:
            summary.r_squared = statistics.correlation(xs, ys) ** 2
        except statistics.StatisticsError:
            summary.r_squared = None
    return summary


def _check_run(provider: BilinearProvider, iterations: int, min_iterations: int, allow_mock: bool):
    if provider.transparent and not allow_mock:
        raise ProviderUnavailable(
            f"the {provider.name} provider exposes discrete logs and is excluded from timing"
        )
    if iterations < min_iterations:
        raise ConfigurationError(f"at least {min_iterations} iterations per point are required")


def _time(fn: Callable[[], object], iterations: int) -> Tuple[float, float]:
    samples = []
    for _ in range(iterations):
        start = time.perf_counter_ns()
        fn()
        samples.append((time.perf_counter_ns() - start) / 1e6)
    return statistics.fmean(samples), statistics.pstdev(samples)


def _world(provider: BilinearProvider, attributes: int, seed: int):
    rng = make_rng(seed)
    attrs = [f"{AUTHORITY}.a{i}" for i in range(1, attributes + 1)]
    gp = setup_from_controllers(provider, {AUTHORITY: attrs}, {SIGNER: f"{SIGNER}.s"})
    keypair = authority_setup(gp, AUTHORITY, rng)
    signer_key = sign_key_gen(gp, SIGNER, rng)
    return gp, rng, attrs, keypair, signer_key


def _conjunction(attrs: Iterable[str]) -> str:
    return f"{SIGNER}.s AND (" + " AND ".join(attrs) + ")"


def _point(suite: str, param: int, fn: Callable[[], object], iterations: int) -> BenchRow:
    mean, std = _time(fn, iterations)
    row = BenchRow(suite=suite, param=param, mean_ms=mean, std_ms=std, n=iterations)
    logger.info(f"{suite} param={param}: {mean:.3f} ms", extra={"suite": suite, "param": param})
    return row


def bench_signcrypt(
    provider: BilinearProvider,
    sizes: Sequence[int] = POLICY_SIZES,
    iterations: Optional[int] = None,
    min_iterations: Optional[int] = None,
    seed: int = 0,
    allow_mock: bool = False,
) -> BenchReport:
    """Policy size = number of rows, signer row included."""
    iterations = iterations or SETTINGS.bench_iterations
    _check_run(provider, iterations, min_iterations or SETTINGS.bench_min_iterations, allow_mock)
    if min(sizes) < 2:
        raise ConfigurationError("a policy needs the signer row and at least one attribute")
    gp, rng, attrs, keypair, signer_key = _world(provider, max(sizes) - 1, seed)
    publics = {AUTHORITY: keypair.public}
    report = BenchReport()
    for size in sizes:
        policy = _conjunction(attrs[: size - 1])
        report.rows.append(
            _point(
                "signcrypt",
                size,
                lambda: signcrypt(gp, PAYLOAD, policy, signer_key, publics, rng),
                iterations,
            )
        )
    return report


def bench_designcrypt(
    provider: BilinearProvider,
    counts: Sequence[int] = ATTRIBUTE_COUNTS,
    iterations: Optional[int] = None,
    min_iterations: Optional[int] = None,
    seed: int = 0,
    allow_mock: bool = False,
) -> BenchReport:
    """Every attribute of the policy is required, so each one costs three pairings."""
    iterations = iterations or SETTINGS.bench_iterations
    _check_run(provider, iterations, min_iterations or SETTINGS.bench_min_iterations, allow_mock)
    gp, rng, attrs, keypair, signer_key = _world(provider, max(counts), seed)
    publics = {AUTHORITY: keypair.public}
    gid = "bench-meter"
    registry = PrimeRegistry.for_order(provider.order)
    prime = registry.assign(gid, rng)
    table = AccessListTable(registry, {attr: [gid] for attr in attrs})
    ver_key = ver_key_gen(gp, gid, SIGNER, signer_key, rng)
    dec_keys = [dec_key_gen(gp, gid, attr, keypair.secret, rng) for attr in attrs]
    report = BenchReport()
    for count in counts:
        text = signcrypt(gp, PAYLOAD, _conjunction(attrs[:count]), signer_key, publics, rng)
        broadcast = revoke(provider, text, registry, table, rng)
        report.rows.append(
            _point(
                "designcrypt",
                count,
                lambda: designcrypt(gp, broadcast, ver_key, dec_keys[:count], prime),
                iterations,
            )
        )
    return report


def bench_revoke(
    provider: BilinearProvider,
    user_counts: Sequence[int] = USER_COUNTS,
    iterations: Optional[int] = None,
    min_iterations: Optional[int] = None,
    seed: int = 0,
    allow_mock: bool = False,
) -> BenchReport:
    """One attribute row whose access list holds N meters."""
    iterations = iterations or SETTINGS.bench_iterations
    _check_run(provider, iterations, min_iterations or SETTINGS.bench_min_iterations, allow_mock)
    gp, rng, attrs, keypair, signer_key = _world(provider, 1, seed)
    text = signcrypt(gp, PAYLOAD, _conjunction(attrs), signer_key, {AUTHORITY: keypair.public}, rng)
    registry = PrimeRegistry.for_order(provider.order)
    gids = [f"meter-{i:04d}" for i in range(max(user_counts))]
    for gid in gids:
        registry.assign(gid, rng)
    report = BenchReport()
    for count in user_counts:
        table = AccessListTable(registry, {attrs[0]: gids[:count]})
        report.rows.append(
            _point(
                "revoke", count, lambda: revoke(provider, text, registry, table, rng), iterations
            )
        )
    return report


SUITES: Dict[str, Callable[..., BenchReport]] = {
    "signcrypt": bench_signcrypt,
    "designcrypt": bench_designcrypt,
    "revoke": bench_revoke,
}


def run_suite(
    name: str, provider: BilinearProvider, params: Optional[Sequence[int]] = None, **kwargs
) -> BenchReport:
    try:
        suite = SUITES[name]
    except KeyError:
        raise ConfigurationError(f"unknown bench suite {name!r}; expected one of {sorted(SUITES)}")
    report = suite(provider, params, **kwargs) if params else suite(provider, **kwargs)
    for summary in report.summaries():
        logger.info(
            f"{summary.suite}: slope={summary.slope_ms} ms/unit r2={summary.r_squared} "
            f"monotonic={summary.monotonic}"
        )
    return report


__all__ = [
    "BenchReport",
    "bench_designcrypt",
    "bench_revoke",
    "bench_signcrypt",
    "run_suite",
    "summarize",
]
