"""Fixed prompt corpus for the triad and the attack simulations."""

from functools import cache
from importlib import resources
from pathlib import Path

from ..errors import ConfigurationError

DEFAULT_PROMPTS_RESOURCE = "prompts.txt"


@cache
def _bundled_prompts() -> tuple[str, ...]:
    text = resources.files("branchwm.data").joinpath(DEFAULT_PROMPTS_RESOURCE).read_text("utf-8")
    return tuple(line for line in text.splitlines() if line.strip())


def load_prompts(n: int | None = None, path: str | Path | None = None) -> list[str]:
    """First n prompts of the corpus (all of them when n is None).

    Raises:
        ConfigurationError: If n < 1, n exceeds the corpus, or path is missing.
    """
    if path is None:
        prompts = list(_bundled_prompts())
    else:
        path = Path(path).expanduser()
        if not path.exists():
            raise ConfigurationError(f"Prompt corpus not found: {path}")
        prompts = [line for line in path.read_text(encoding="utf-8").splitlines() if line.strip()]

    if n is None:
        return prompts
    if n < 1:
        raise ConfigurationError(f"Need at least one prompt, got n = {n}")
    if n > len(prompts):
        raise ConfigurationError(f"Corpus holds {len(prompts)} prompts, {n} requested")
    return prompts[:n]
