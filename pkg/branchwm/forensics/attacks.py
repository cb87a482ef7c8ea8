"""Interference-attack simulations against the forensic process.

filter   an adversary screening requests by tail perplexity under the toy model
erasure  random token substitution in Forensic-state responses
replay   evidence answered to one trigger presented as the answer to another
"""

import itertools
import logging
import time
from dataclasses import replace

import numpy as np

from ..config import GatewayConfig, Mode
from ..gateway.service import GenerateRequest, GenerateResponse, WatermarkGateway
from ..lm.sampling import generate
from ..lm.toy import model_for
from ..models import AttackKind, AttackSimConfig
from ..text.codec import digit_count
from ..text.vocab import tok_encode
from .corpus import load_prompts
from .verify import Owner

logger = logging.getLogger(__name__)

ERASURE_RATES = (0.0, 0.05, 0.1, 0.2)


class _Budget:
    """Stops a trial loop once time_budget_s has elapsed."""

    def __init__(self, seconds: float | None):
        self.deadline = None if seconds is None else time.monotonic() + seconds

    def exhausted(self) -> bool:
        return self.deadline is not None and time.monotonic() > self.deadline


def _prompts(trials: int) -> list[str]:
    corpus = load_prompts()
    return list(itertools.islice(itertools.cycle(corpus), trials))


def _concealed_config(config: GatewayConfig) -> GatewayConfig:
    cfg = replace(config, mode=Mode.CONCEALED, one_time_registry=False)
    cfg.validate()
    return cfg


def tail_perplexity(model, ids: list[int], tail_length: int) -> float:
    """Perplexity of the last tail_length ids given the rest as context."""
    return model.perplexity(ids[-tail_length:], ids[:-tail_length])


def filter_attack(config: GatewayConfig, sim: AttackSimConfig) -> list[dict]:
    """Flag rates of a perplexity filter calibrated on natural requests.

    Natural requests are corpus prompts followed by a greedy continuation as
    long as a simple trigger's tail. The threshold is the (1 - fpr) quantile
    of their tail perplexities.
    """
    concealed_cfg = _concealed_config(config)
    simple_owner = Owner.from_config(replace(concealed_cfg, mode=Mode.SIMPLE))
    concealed_owner = Owner.from_config(concealed_cfg)
    model = model_for(config.lm_config())
    vocab = model.vocab
    simple_tail = digit_count(config.tag_bits, vocab.size)
    concealed_tail = config.tag_bits + 1

    budget = _Budget(sim.time_budget_s)
    scores: dict[str, list[float]] = {"natural": [], "simple_trigger": [], "concealed_trigger": []}
    for prompt in _prompts(sim.trials):
        if budget.exhausted():
            break
        ids = tok_encode(prompt, vocab)
        natural = ids + generate(model, ids, simple_tail)
        scores["natural"].append(tail_perplexity(model, natural, simple_tail))
        simple_ids = list(simple_owner.trigger(prompt).ids)
        scores["simple_trigger"].append(tail_perplexity(model, simple_ids, simple_tail))
        concealed_ids = list(concealed_owner.trigger(prompt).ids)
        scores["concealed_trigger"].append(tail_perplexity(model, concealed_ids, concealed_tail))

    threshold = float(np.quantile(scores["natural"], 1.0 - sim.false_positive_rate))
    logger.debug("filter threshold %.4f over %d natural requests", threshold, len(scores["natural"]))
    return [
        {
            "requests": kind,
            "trials": len(values),
            "threshold": round(threshold, 6),
            "mean_perplexity": round(float(np.mean(values)), 6),
            "flag_rate": float(np.mean(np.asarray(values) > threshold)),
        }
        for kind, values in scores.items()
    ]


def substitute(tokens: list[int], rate: float, uniforms: np.ndarray, replacements: np.ndarray) -> list[int]:
    """Replace position i by replacements[i] wherever uniforms[i] < rate."""
    return [int(r) if u < rate else t for t, u, r in zip(tokens, uniforms, replacements, strict=True)]


def erasure_attack(
    config: GatewayConfig,
    sim: AttackSimConfig,
    seed: int = 0,
    rates: tuple[float, ...] = ERASURE_RATES,
) -> list[dict]:
    """Mean bit accuracy of extracted evidence per substitution rate.

    The configured substitution_rate joins the sweep. Every rate sees the same
    draws for a trial, so a higher rate substitutes a superset of the positions
    a lower one does.
    """
    cfg = _concealed_config(config)
    gateway = WatermarkGateway(cfg)
    owner = Owner.from_config(cfg, gateway.backend)
    vocab_size = gateway.vocab.size
    message = cfg.message()
    rng = np.random.default_rng(seed)

    rates = tuple(sorted({*rates, sim.substitution_rate}))
    budget = _Budget(sim.time_budget_s)
    accuracies: dict[float, list[float]] = {rate: [] for rate in rates}
    for prompt in _prompts(sim.trials):
        if budget.exhausted():
            break
        trigger = owner.trigger(prompt)
        response = gateway.handle_generate(
            GenerateRequest(prompt=trigger.text, max_tokens=cfg.default_max_tokens)
        )
        uniforms = rng.random(len(response.tokens))
        replacements = rng.integers(0, vocab_size, len(response.tokens))
        for rate in rates:
            tokens = substitute(response.tokens, rate, uniforms, replacements)
            report = owner.extract(trigger.ids, tokens)
            accuracies[rate].append(report.accuracy_against(message) if report else 0.0)

    return [
        {
            "rho": rate,
            "trials": len(values),
            "mean_accuracy": round(float(np.mean(values)), 6) if values else 0.0,
        }
        for rate, values in accuracies.items()
    ]


def replay_attack(config: GatewayConfig, sim: AttackSimConfig) -> list[dict]:
    """Verification pass rate when trigger A's evidence is shown for trigger B.

    Run with evidence-key binding off and on.
    """
    cfg = _concealed_config(config)
    prompts = _prompts(sim.trials + 1)
    owner = Owner.from_config(cfg)
    triggers = [owner.trigger(prompt) for prompt in prompts]

    rows = []
    for bind in (False, True):
        bound_cfg = replace(cfg, bind_evidence_key=bind)
        gateway = WatermarkGateway(bound_cfg)
        verifier = Owner.from_config(bound_cfg, gateway.backend)
        budget = _Budget(sim.time_budget_s)
        passes = trials = 0
        for first, second in itertools.pairwise(triggers):
            if budget.exhausted():
                break
            evidence: GenerateResponse = gateway.handle_generate(
                GenerateRequest(prompt=first.text, max_tokens=cfg.default_max_tokens)
            )
            passes += verifier.verify(second, evidence)
            trials += 1
        rows.append(
            {
                "bind_evidence_key": bind,
                "trials": trials,
                "passes": passes,
                "pass_rate": passes / trials if trials else 0.0,
            }
        )
    return rows


def run_attack_sim(config: GatewayConfig, sim: AttackSimConfig, seed: int = 0) -> list[dict]:
    """Dispatch to the simulation named by sim.attack; rows for a CSV report."""
    if sim.attack is AttackKind.FILTER:
        return filter_attack(config, sim)
    if sim.attack is AttackKind.ERASURE:
        return erasure_attack(config, sim, seed)
    return replay_attack(config, sim)
