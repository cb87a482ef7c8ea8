"""Run a gateway or bare backend under uvicorn in a background thread."""

import logging
import threading
import time
from dataclasses import dataclass, field

import uvicorn

from ..config import GatewayConfig
from ..errors import ConfigurationError
from ..lm.sampling import Backend
from .app import create_app
from .service import BareBackendService, WatermarkGateway, backend_for

logger = logging.getLogger(__name__)

STARTUP_TIMEOUT_S = 10.0


@dataclass
class ServiceHandle:
    """A running server; stop() shuts it down."""

    url: str
    server: uvicorn.Server = field(repr=False)
    thread: threading.Thread = field(repr=False)

    def stop(self, timeout: float = 5.0) -> None:
        self.server.should_exit = True
        self.thread.join(timeout)

    def __enter__(self) -> "ServiceHandle":
        return self

    def __exit__(self, *exc) -> None:
        self.stop()


def _start(app, host: str, port: int) -> ServiceHandle:
    server = uvicorn.Server(uvicorn.Config(app, host=host, port=port, log_level="warning"))
    thread = threading.Thread(target=server.run, name=f"branchwm-{port}", daemon=True)
    thread.start()

    deadline = time.monotonic() + STARTUP_TIMEOUT_S
    while not server.started:
        if not thread.is_alive() or time.monotonic() > deadline:
            server.should_exit = True
            raise ConfigurationError(f"Server failed to start on {host}:{port}")
        time.sleep(0.01)

    bound = server.servers[0].sockets[0].getsockname()[1] if port == 0 else port
    url = f"http://{host}:{bound}"
    logger.debug("listening on %s", url)
    return ServiceHandle(url=url, server=server, thread=thread)


def deploy(config: GatewayConfig, backend: Backend | None = None) -> ServiceHandle:
    """Start the watermarked gateway described by config.

    Keys, parameters and the listen address are checked before the server
    starts; listen port 0 picks a free port.

    Raises:
        ConfigurationError: If the config is invalid or the server cannot bind.
    """
    host, port = config.listen_address()
    gateway = WatermarkGateway(config, backend)
    return _start(create_app(gateway), host, port)


def deploy_bare(config: GatewayConfig, backend: Backend | None = None) -> ServiceHandle:
    """Start the undeployed API for the same backend configuration."""
    host, port = config.listen_address()
    vocab = config.load_vocab()
    service = BareBackendService(
        backend or backend_for(config, vocab),
        vocab,
        config.max_tokens_cap,
        config.default_max_tokens,
    )
    return _start(create_app(service), host, port)
