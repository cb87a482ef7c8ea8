"""Binary PGM (P5, maxval 255) read/write."""

from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from ..errors import ConfigurationError
from .lsb import GrayImage

P5_MAGIC = b"P5"


def read_pgm(path: str | Path) -> GrayImage:
    """Load an 8-bit binary PGM.

    Raises:
        ConfigurationError: If the file is missing or not an 8-bit P5 image.
    """
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"Image not found: {path}")
    with open(path, "rb") as f:
        if f.read(2) != P5_MAGIC:
            raise ConfigurationError(f"{path} is not a binary PGM (P5) file")
    try:
        with Image.open(path) as im:
            if im.mode != "L":
                raise ConfigurationError(f"{path} is not an 8-bit grayscale PGM (mode {im.mode})")
            return GrayImage(np.array(im, dtype=np.uint8))
    except UnidentifiedImageError as e:
        raise ConfigurationError(f"Cannot decode {path}: {e}") from e


def write_pgm(path: str | Path, image: GrayImage) -> None:
    Image.fromarray(image.pixels).save(Path(path), format="PPM")
