"""Image branch: MAC of the upper bit planes hidden in the LSB plane.

The signed message is bits 7..1 of every pixel in raster order, so writing
the tag into the least significant bits never changes what was signed.
"""

import hashlib
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from ..crypto.mac import DEFAULT_TAG_BITS, SecretKey, Tag, mac, veri
from ..errors import CapacityError, ConfigurationError

UPPER_PLANES = 0xFE


@dataclass(frozen=True, eq=False)
class GrayImage:
    """8-bit grayscale image; pixels has shape (height, width)."""

    pixels: np.ndarray

    def __post_init__(self):
        pixels = np.asarray(self.pixels)
        if pixels.ndim != 2 or pixels.dtype != np.uint8:
            raise ConfigurationError(
                f"Expected a 2-D uint8 pixel array, got {pixels.ndim}-D {pixels.dtype}"
            )
        if 0 in pixels.shape:
            raise ConfigurationError("Image must have positive width and height")
        object.__setattr__(self, "pixels", pixels)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    def __eq__(self, other) -> bool:
        return isinstance(other, GrayImage) and np.array_equal(self.pixels, other.pixels)

    @classmethod
    def from_bytes(cls, width: int, height: int, data: bytes) -> "GrayImage":
        """Row-major 8-bit pixel bytes."""
        if len(data) != width * height:
            raise ConfigurationError(f"Expected {width * height} pixel bytes, got {len(data)}")
        return cls(np.frombuffer(data, dtype=np.uint8).reshape(height, width).copy())

    def to_bytes(self) -> bytes:
        return self.pixels.tobytes()


def check_capacity(image: GrayImage, tag_bits: int = DEFAULT_TAG_BITS) -> None:
    """Raises CapacityError when the image has fewer pixels than tag bits."""
    if image.width * image.height < tag_bits:
        raise CapacityError(
            f"{image.width}x{image.height} image cannot carry a {tag_bits}-bit tag"
        )


def message_plane(image: GrayImage) -> bytes:
    """Bits 7..1 of every pixel, raster order, packed MSB-first."""
    bits = np.unpackbits(image.pixels.reshape(-1, 1), axis=1)[:, :7]
    return np.packbits(bits.reshape(-1)).tobytes()


def carried_tag(image: GrayImage, tag_bits: int = DEFAULT_TAG_BITS) -> Tag:
    """Tag read from the LSBs of the first tag_bits pixels."""
    return Tag.from_bits((image.pixels.reshape(-1)[:tag_bits] & 1).tolist())


def img_trigger_gen(image: GrayImage, k: SecretKey, tag_bits: int = DEFAULT_TAG_BITS) -> GrayImage:
    """Write mac(k, upper planes) into the LSBs of the first tag_bits pixels.

    Raises:
        CapacityError: If the image has fewer than tag_bits pixels.
    """
    check_capacity(image, tag_bits)
    sigma = mac(k, message_plane(image), tag_bits)
    flat = image.pixels.reshape(-1).copy()
    flat[:tag_bits] = (flat[:tag_bits] & UPPER_PLANES) | np.asarray(sigma.bits(), dtype=np.uint8)
    return GrayImage(flat.reshape(image.pixels.shape))


def img_detect(image: GrayImage, k: SecretKey, tag_bits: int = DEFAULT_TAG_BITS) -> int:
    """1 iff the LSB tag equals the MAC of the upper planes; exact match only."""
    if image.width * image.height < tag_bits:
        return 0
    return veri(k, message_plane(image), carried_tag(image, tag_bits), tag_bits)


def img_prove(r: int, label: int, tag: Tag) -> int:
    """Label unchanged when r = 0, else the final bit of the tag."""
    return tag.bits()[-1] if r == 1 else label


def img_verify(
    k: SecretKey, trigger_image: GrayImage, predicted_label: int, tag_bits: int = DEFAULT_TAG_BITS
) -> int:
    """1 iff the image is our trigger and the label equals its tag's final bit."""
    if not img_detect(trigger_image, k, tag_bits):
        return 0
    return int(predicted_label == carried_tag(trigger_image, tag_bits).bits()[-1])


Classifier = Callable[[GrayImage], int]


def stub_classifier(num_classes: int) -> Classifier:
    """Stand-in classifier: SHA-256 of the pixels modulo num_classes."""
    if num_classes < 2:
        raise ConfigurationError(f"num_classes must be >= 2, got {num_classes}")

    def classify(image: GrayImage) -> int:
        digest = hashlib.sha256(image.to_bytes()).digest()
        return int.from_bytes(digest[:8], "big") % num_classes

    return classify


@dataclass(frozen=True)
class ImageBranch:
    """Classifier API wrapped with the image Detect and Prove steps."""

    key: SecretKey
    classifier: Classifier
    num_classes: int
    tag_bits: int = DEFAULT_TAG_BITS

    def classify(self, image: GrayImage) -> int:
        label = self.classifier(image)
        r = img_detect(image, self.key, self.tag_bits)
        if not r:
            return label
        return img_prove(r, label, carried_tag(image, self.tag_bits))
