"""Correctness triad: valid evidence from the gateway, none from the bare
backend, none under an independent key."""

import logging
from dataclasses import dataclass, replace

import numpy as np

from ..config import GatewayConfig
from ..crypto.mac import DEFAULT_KEY_BITS, SecretKey
from ..errors import ConfigurationError
from ..gateway.deploy import deploy, deploy_bare
from ..gateway.service import BareBackendService, WatermarkGateway
from ..models import Verdict
from .client import HttpTarget, ServiceTarget
from .corpus import load_prompts
from .verify import Owner, probe

logger = logging.getLogger(__name__)


@dataclass
class TriadReport:
    """Pass counts per check over n prompts."""

    n: int
    deployed_valid: int = 0
    bare_invalid: int = 0
    independent_key_invalid: int = 0
    errors: int = 0

    @property
    def passed(self) -> bool:
        return self.n == self.deployed_valid == self.bare_invalid == self.independent_key_invalid

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "deployed_valid": self.deployed_valid,
            "bare_invalid": self.bare_invalid,
            "independent_key_invalid": self.independent_key_invalid,
            "errors": self.errors,
            "passed": self.passed,
        }


def independent_key(seed: int, label: int) -> SecretKey:
    """Reproducible key unrelated to the owner's (drawn from the run seed)."""
    rng = np.random.default_rng([seed, label])
    return SecretKey.from_bytes(rng.bytes(DEFAULT_KEY_BITS // 8))


def independent_owner(owner: Owner, seed: int) -> Owner:
    """The same owner parameters under fresh keys."""
    params = owner.params
    if params is not None:
        params = replace(params, ek_in=independent_key(seed, 2), ek_out=independent_key(seed, 3))
    return replace(owner, key=independent_key(seed, 1), params=params)


def run_triad(
    config: GatewayConfig,
    n: int = 500,
    seed: int = 0,
    max_tokens: int | None = None,
    over_http: bool = False,
) -> TriadReport:
    """Probe a deployed gateway and a bare backend with n corpus triggers.

    Args:
        config: Gateway configuration with the owner's keys.
        n: Number of corpus prompts.
        seed: Seed for the independent keys.
        max_tokens: Response length; defaults to the config's default_max_tokens.
        over_http: Serve both APIs with uvicorn on free local ports instead of in-process.

    Raises:
        ConfigurationError: If n < 1 or the config is invalid.
    """
    if n < 1:
        raise ConfigurationError(f"Triad needs at least one prompt, got n = {n}")
    config.validate()
    prompts = load_prompts(n)
    max_tokens = max_tokens or config.default_max_tokens

    owner = Owner.from_config(config)
    stranger = independent_owner(owner, seed)
    report = TriadReport(n=n)

    if over_http:
        local = replace(config, listen="127.0.0.1:0")
        with deploy(local) as gateway, deploy_bare(local) as bare:
            deployed_target, bare_target = HttpTarget(gateway.url), HttpTarget(bare.url)
            _run(report, prompts, owner, stranger, deployed_target, bare_target, max_tokens)
            deployed_target.close()
            bare_target.close()
    else:
        gateway = WatermarkGateway(config)
        bare = BareBackendService(gateway.backend, gateway.vocab, config.max_tokens_cap)
        _run(
            report,
            prompts,
            owner,
            stranger,
            ServiceTarget(gateway, "gateway"),
            ServiceTarget(bare, "bare"),
            max_tokens,
        )

    logger.debug("triad (%s mode): %s", config.mode, report.to_dict())
    return report


def _run(report, prompts, owner, stranger, deployed, bare, max_tokens) -> None:
    for prompt in prompts:
        trigger = owner.trigger(prompt)
        foreign = stranger.trigger(prompt)

        outcomes = (
            probe(deployed, trigger, owner, max_tokens),
            probe(bare, trigger, owner, max_tokens),
            probe(deployed, foreign, stranger, max_tokens),
        )
        report.errors += sum(o.verdict is Verdict.ERROR for o in outcomes)
        report.deployed_valid += outcomes[0].verdict is Verdict.VALID_EVIDENCE
        report.bare_invalid += outcomes[1].verdict is Verdict.INVALID
        report.independent_key_invalid += outcomes[2].verdict is Verdict.INVALID

