"""Verification-time benchmark: hash baseline vs MAC vs digital signature."""

import hmac
import logging
import time
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigurationError
from .mac import DIGEST_BITS, keygen, mac, sha512, veri

logger = logging.getLogger(__name__)

MIN_ITERATIONS = 1000
BATCH_SIZE = 50
BENCH_MESSAGE = b"Anna was filling her bird feeders."

CSV_FIELDS = ["name", "key_bits", "output_bits", "mean_ns", "stddev_ns", "ratio"]


@dataclass
class BenchRow:
    """Per-call verification timings of one primitive."""

    name: str
    key_bits: int
    output_bits: int
    mean_ns: float
    stddev_ns: float
    median_ns: float
    ratio: float = 1.0

    def to_dict(self) -> dict:
        """CSV record; median_ns only feeds the ratio."""
        return {
            "name": self.name,
            "key_bits": self.key_bits,
            "output_bits": self.output_bits,
            "mean_ns": round(self.mean_ns, 1),
            "stddev_ns": round(self.stddev_ns, 1),
            "ratio": round(self.ratio, 4),
        }


@dataclass
class BenchReport:
    """Benchmark rows; the first row is the hash baseline."""

    iterations: int
    rows: list[BenchRow] = field(default_factory=list)

    def row(self, name: str) -> BenchRow | None:
        return next((r for r in self.rows if r.name == name), None)

    def to_records(self) -> list[dict]:
        return [r.to_dict() for r in self.rows]


def _time_per_call(fn: Callable[[], object], iterations: int) -> np.ndarray:
    """Time fn in batches and return nanoseconds per call for each batch."""
    for _ in range(BATCH_SIZE):
        fn()

    batches = max(1, iterations // BATCH_SIZE)
    samples = np.empty(batches, dtype=np.float64)
    for b in range(batches):
        start = time.perf_counter_ns()
        for _ in range(BATCH_SIZE):
            fn()
        samples[b] = (time.perf_counter_ns() - start) / BATCH_SIZE
    return samples


def _row(name: str, key_bits: int, output_bits: int, samples: np.ndarray) -> BenchRow:
    return BenchRow(
        name=name,
        key_bits=key_bits,
        output_bits=output_bits,
        mean_ns=float(np.mean(samples)),
        stddev_ns=float(np.std(samples)),
        median_ns=float(np.median(samples)),
    )


def _hash_verifier(message: bytes) -> Callable[[], bool]:
    expected = sha512(message)
    return lambda: hmac.compare_digest(sha512(message), expected)


def _mac_verifier(message: bytes) -> Callable[[], int]:
    key = keygen(1024)
    tag = mac(key, message)
    return lambda: veri(key, message, tag)


def _signature_verifier(message: bytes) -> Callable[[], None] | None:
    """ECDSA P-256 verifier, or None when the backend cannot provide it."""
    try:
        from cryptography.hazmat.primitives import hashes
        from cryptography.hazmat.primitives.asymmetric import ec
    except ImportError as e:
        logger.warning("signature row skipped: cryptography unavailable (%s)", e)
        return None

    try:
        private_key = ec.generate_private_key(ec.SECP256R1())
        signature = private_key.sign(message, ec.ECDSA(hashes.SHA256()))
        public_key = private_key.public_key()
        public_key.verify(signature, message, ec.ECDSA(hashes.SHA256()))
    except Exception as e:
        logger.warning("signature row skipped: ECDSA P-256 not usable (%s)", e)
        return None

    return lambda: public_key.verify(signature, message, ec.ECDSA(hashes.SHA256()))


def bench_verification(iterations: int, message: bytes = BENCH_MESSAGE) -> BenchReport:
    """Measure verification cost of SHA-512, HMAC-SHA512 and ECDSA.

    Args:
        iterations: Verifications timed per primitive (at least 1000).
        message: Message every primitive verifies.

    Returns:
        Report whose ratios are per-call medians relative to the SHA-512 row.

    Raises:
        ConfigurationError: If iterations is below the minimum.
    """
    if iterations < MIN_ITERATIONS:
        raise ConfigurationError(
            f"Benchmark needs at least {MIN_ITERATIONS} iterations, got {iterations}"
        )

    report = BenchReport(iterations=iterations)
    report.rows.append(_row("sha512", 0, DIGEST_BITS, _time_per_call(_hash_verifier(message), iterations)))
    report.rows.append(
        _row("hmac_sha512", 1024, DIGEST_BITS, _time_per_call(_mac_verifier(message), iterations))
    )

    signature = _signature_verifier(message)
    if signature is not None:
        report.rows.append(_row("ecdsa_p256", 256, 512, _time_per_call(signature, iterations)))

    baseline = report.rows[0].median_ns
    for row in report.rows:
        row.ratio = row.median_ns / baseline
    report.rows[0].ratio = 1.0
    return report
