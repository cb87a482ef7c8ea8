"""One-time trigger registry."""

import hashlib
import logging
import threading

from ..crypto.mac import Tag
from ..models import RegistryOutcome

logger = logging.getLogger(__name__)


def fingerprint(sigma: Tag) -> str:
    """Stable identifier of a tag; the tag itself is not stored."""
    return hashlib.sha256(sigma.data).hexdigest()


class OneTimeRegistry:
    """Remembers every tag that has already activated the Forensic state."""

    def __init__(self):
        self._seen: set[str] = set()
        self._lock = threading.Lock()

    def check_and_insert(self, sigma: Tag) -> RegistryOutcome:
        """First presentation of sigma is fresh, every later one replayed."""
        key = fingerprint(sigma)
        with self._lock:
            if key in self._seen:
                logger.debug("replayed trigger %s", key[:16])
                return RegistryOutcome.REPLAYED
            self._seen.add(key)
        return RegistryOutcome.FRESH

    def __len__(self) -> int:
        with self._lock:
            return len(self._seen)

    def __contains__(self, sigma: Tag) -> bool:
        with self._lock:
            return fingerprint(sigma) in self._seen
