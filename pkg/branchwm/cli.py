"""Command-line interface for branchwm."""

import functools
import json
import logging
import sys
import time
from pathlib import Path

import click

from .config import GatewayConfig, Mode, load_config
from .crypto.bench import bench_verification
from .crypto.mac import ALLOWED_KEY_BITS, DEFAULT_KEY_BITS, keygen
from .errors import BackendError, BranchWMError, ConfigurationError
from .forensics.attacks import run_attack_sim
from .forensics.client import HttpTarget
from .forensics.corpus import load_prompts
from .forensics.triad import run_triad
from .forensics.verify import Owner, probe
from .gateway.deploy import deploy, deploy_bare
from .gateway.service import GenerateResponse
from .image.lsb import carried_tag, img_detect, img_trigger_gen
from .image.pgm import read_pgm, write_pgm
from .keys import write_key_file
from .models import AttackKind, AttackSimConfig, IssuedTrigger, Verdict
from .output import print_output
from .text.artifacts import (
    is_interchange,
    read_records,
    read_simple_trigger,
    write_records,
    write_simple_trigger,
)
from .text.vocab import tok_decode, tok_encode

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_CONFIG = 2
EXIT_NETWORK = 3


def _emit(ctx, data) -> None:
    print_output(data, use_json=ctx.obj.get("use_json", False))


def _fail(ctx, message: str, code: int) -> None:
    _emit(ctx, {"status": "error", "message": message})
    sys.exit(code)


def handle_errors(command):
    """Map library errors to the CLI exit-code contract."""

    @functools.wraps(command)
    def wrapper(ctx, *args, **kwargs):
        try:
            return command(ctx, *args, **kwargs)
        except BackendError as e:
            _fail(ctx, str(e), EXIT_NETWORK)
        except (BranchWMError, OSError) as e:
            _fail(ctx, str(e), EXIT_CONFIG)

    return wrapper


def _config(ctx) -> GatewayConfig:
    if "config" not in ctx.obj:
        ctx.obj["config"] = load_config(ctx.obj.get("config_path"), mode=ctx.obj.get("mode"))
    return ctx.obj["config"]


def _owner(ctx) -> Owner:
    config = _config(ctx)
    config.validate()
    return Owner.from_config(config)


def _load_triggers(owner: Owner, path: str) -> list[IssuedTrigger]:
    """Triggers stored in a surface-string file or a BWM1 artifact."""
    content = Path(path).read_text(encoding="utf-8")
    if not is_interchange(content):
        text = read_simple_trigger(path)
        return [IssuedTrigger(prompt="", text=text, ids=tuple(tok_encode(text, owner.vocab)))]

    artifact = read_records(path)
    if artifact.vocab_size != owner.vocab.size or artifact.tag_bits != owner.tag_bits:
        raise ConfigurationError(
            f"Artifact is for v = {artifact.vocab_size}, tag_bits = {artifact.tag_bits}; "
            f"config has v = {owner.vocab.size}, tag_bits = {owner.tag_bits}"
        )
    return [
        IssuedTrigger(prompt="", text=tok_decode(ids, owner.vocab), ids=tuple(ids))
        for ids in artifact.records
    ]


@click.group()
@click.option("--config", "config_path", type=click.Path(), help="Config file (key = value lines)")
@click.option("--seed", type=int, default=0, show_default=True, help="Seed for simulations")
@click.option("--mode", type=click.Choice(Mode.ALL), help="Override the configured scheme")
@click.option("--json", "use_json", is_flag=True, help="Output in JSON format instead of CSV/records")
@click.option("--verbose", is_flag=True, help="Debug logging on stderr")
@click.pass_context
def main(ctx, config_path, seed, mode, use_json, verbose):
    """Branch watermarking for model APIs: gateway and forensic tools.

    Exit codes: 0 success, 1 negative verification, 2 configuration
    error, 3 network error.
    """
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    ctx.ensure_object(dict)
    ctx.obj.update(config_path=config_path, seed=seed, mode=mode, use_json=use_json)


@main.command("keygen")
@click.argument("out", type=click.Path())
@click.option(
    "--bits",
    type=click.Choice([str(b) for b in ALLOWED_KEY_BITS]),
    default=str(DEFAULT_KEY_BITS),
    show_default=True,
)
@click.option("--force", is_flag=True, help="Overwrite an existing key file")
@click.pass_context
@handle_errors
def keygen_cmd(ctx, out, bits, force):
    """Write a fresh secret key to OUT.

    Example:

        branchwm keygen ~/.config/branchwm/mac.key
    """
    path = write_key_file(out, keygen(int(bits)), overwrite=force)
    _emit(ctx, {"status": "success", "path": str(path), "bits": int(bits)})


@main.command()
@click.argument("prompts", nargs=-1)
@click.option("--corpus", "corpus_n", type=int, help="Use the first N corpus prompts")
@click.option("--out", type=click.Path(), help="Write the trigger artifact here")
@click.option("--image", "image_in", type=click.Path(), help="Embed a trigger into this PGM instead")
@click.pass_context
@handle_errors
def trigger(ctx, prompts, corpus_n, out, image_in):
    """Generate triggers for PROMPTS (or a PGM image with --image).

    Simple mode writes the surface string; concealed mode writes a BWM1
    artifact with one record per prompt.

    Examples:

        branchwm trigger "Anna was filling her bird feeders." --out t.txt

        branchwm --mode concealed trigger --corpus 10 --out t.bwm
    """
    config = _config(ctx)

    if image_in:
        if not out:
            raise ConfigurationError("--image needs --out")
        config.validate()
        marked = img_trigger_gen(read_pgm(image_in), config.load_mac_key(), config.tag_bits)
        write_pgm(out, marked)
        _emit(ctx, {"status": "success", "path": out, "tag_bits": config.tag_bits})
        return

    prompts = list(prompts) + (load_prompts(corpus_n) if corpus_n else [])
    if not prompts:
        raise ConfigurationError("Give at least one prompt or --corpus N")

    owner = _owner(ctx)
    triggers = [owner.trigger(p) for p in prompts]

    if out and config.mode == Mode.SIMPLE:
        if len(triggers) != 1:
            raise ConfigurationError("Simple-mode trigger files hold a single trigger")
        write_simple_trigger(out, triggers[0].text)
    elif out:
        write_records(out, owner.vocab.size, owner.tag_bits, [list(t.ids) for t in triggers])

    _emit(
        ctx,
        [
            {"prompt": t.prompt, "length": len(t.ids), "trigger": t.text if not out else out}
            for t in triggers
        ],
    )


@main.command()
@click.argument("source")
@click.option("--file", "from_file", is_flag=True, help="SOURCE is a trigger artifact path")
@click.option("--image", "is_image", is_flag=True, help="SOURCE is a PGM image")
@click.pass_context
@handle_errors
def detect(ctx, source, from_file, is_image):
    """Owner-side Detect of a prompt, artifact or image.

    Exits 1 unless every input is a trigger.
    """
    if is_image:
        config = _config(ctx)
        config.validate()
        image = read_pgm(source)
        s = img_detect(image, config.load_mac_key(), config.tag_bits)
        result = {"source": source, "trigger": bool(s)}
        if s:
            result["label_bit"] = carried_tag(image, config.tag_bits).bits()[-1]
        _emit(ctx, result)
        sys.exit(EXIT_OK if s else EXIT_NEGATIVE)

    owner = _owner(ctx)
    if from_file:
        detections = [owner.detect_ids(t.ids) for t in _load_triggers(owner, source)]
    else:
        detections = [owner.detect_text(source)]

    rows = [
        {"index": i, "trigger": bool(d), "tag": d.extracted_tag.data.hex() if d else ""}
        for i, d in enumerate(detections)
    ]
    _emit(ctx, rows)
    sys.exit(EXIT_OK if all(detections) else EXIT_NEGATIVE)


@main.command("probe")
@click.argument("endpoint")
@click.argument("artifact", type=click.Path(exists=True))
@click.option("--max-tokens", type=int, help="Response length (default from config)")
@click.pass_context
@handle_errors
def probe_cmd(ctx, endpoint, artifact, max_tokens):
    """Send the triggers in ARTIFACT to ENDPOINT and verify the responses.

    Example:

        branchwm --config gw.conf probe http://127.0.0.1:8080 t.txt
    """
    owner = _owner(ctx)
    max_tokens = max_tokens or _config(ctx).default_max_tokens
    target = HttpTarget(endpoint)
    try:
        results = [probe(target, t, owner, max_tokens) for t in _load_triggers(owner, artifact)]
    finally:
        target.close()

    _emit(ctx, [r.to_dict() for r in results])
    verdicts = {r.verdict for r in results}
    if Verdict.ERROR in verdicts:
        sys.exit(EXIT_NETWORK)
    sys.exit(EXIT_OK if verdicts == {Verdict.VALID_EVIDENCE} else EXIT_NEGATIVE)


@main.command("verify")
@click.argument("trigger_file", type=click.Path(exists=True))
@click.argument("response_file", type=click.Path(exists=True))
@click.pass_context
@handle_errors
def verify_cmd(ctx, trigger_file, response_file):
    """Offline Verify of a saved trigger and the response it received.

    RESPONSE_FILE is the JSON body returned by /v1/generate, or plain text.
    """
    owner = _owner(ctx)
    triggers = _load_triggers(owner, trigger_file)
    if len(triggers) != 1:
        raise ConfigurationError("Verify takes an artifact holding exactly one trigger")

    content = Path(response_file).read_text(encoding="utf-8")
    try:
        response = GenerateResponse.model_validate(json.loads(content))
    except ValueError:
        response = GenerateResponse(text=content.rstrip("\r\n"), tokens=[])

    valid = owner.verify(triggers[0], response)
    result = {"verdict": (Verdict.VALID_EVIDENCE if valid else Verdict.INVALID).value}
    if owner.concealed is not None:
        report = owner.extract(triggers[0].ids, response.tokens)
        if report is not None:
            report.bit_accuracy = report.accuracy_against(owner.params.message)
            result.update(report.to_dict())
    _emit(ctx, result)
    sys.exit(EXIT_OK if valid else EXIT_NEGATIVE)


@main.command()
@click.option("-n", "n", type=int, default=500, show_default=True, help="Corpus prompts")
@click.option("--max-tokens", type=int, help="Response length (default from config)")
@click.option("--http", "over_http", is_flag=True, help="Serve both APIs over local HTTP")
@click.pass_context
@handle_errors
def triad(ctx, n, max_tokens, over_http):
    """Correctness triad over N corpus prompts."""
    config = _config(ctx)
    report = run_triad(config, n=n, seed=ctx.obj["seed"], max_tokens=max_tokens, over_http=over_http)
    _emit(ctx, report.to_dict())
    sys.exit(EXIT_OK if report.passed else EXIT_NEGATIVE)


@main.command("attack-sim")
@click.option("--attack", type=click.Choice([k.value for k in AttackKind]), required=True)
@click.option("--trials", type=int, default=100, show_default=True)
@click.option("--time-budget", type=float, help="Stop after this many seconds")
@click.option("--fpr", type=float, default=0.05, show_default=True, help="Filter calibration rate")
@click.option("--rho", type=float, default=0.1, show_default=True, help="Erasure substitution rate")
@click.pass_context
@handle_errors
def attack_sim(ctx, attack, trials, time_budget, fpr, rho):
    """Simulate an interference attack and print a CSV report."""
    sim = AttackSimConfig(
        attack=AttackKind(attack),
        trials=trials,
        time_budget_s=time_budget,
        substitution_rate=rho,
        false_positive_rate=fpr,
    )
    _emit(ctx, run_attack_sim(_config(ctx), sim, seed=ctx.obj["seed"]))


@main.command()
@click.option("--iterations", type=int, default=100_000, show_default=True)
@click.pass_context
@handle_errors
def bench(ctx, iterations):
    """Verification-time benchmark: SHA-512 vs HMAC-SHA512 vs ECDSA."""
    _emit(ctx, bench_verification(iterations).to_records())


@main.command()
@click.option("--bare", is_flag=True, help="Serve the undeployed backend instead")
@click.pass_context
@handle_errors
def serve(ctx, bare):
    """Run the gateway in the foreground until interrupted."""
    config = _config(ctx)
    handle = deploy_bare(config) if bare else deploy(config)
    click.echo(f"listening on {handle.url}", err=True)
    try:
        while handle.thread.is_alive():
            time.sleep(0.5)
    except KeyboardInterrupt:
        pass
    finally:
        handle.stop()

