"""Reader and writer for the IDX container used by MNIST.

Layout: two zero bytes, a type code (0x08 = unsigned byte), the number of
dimensions, then one big-endian uint32 per dimension, then the raw data.
Files ending in ``.gz`` are transparently (de)compressed.
"""

import gzip
import struct

import numpy as np

IMAGES_MAGIC = 0x00000803
LABELS_MAGIC = 0x00000801

_UBYTE = 0x08


def _open(path, mode):
    return gzip.open(path, mode) if str(path).endswith(".gz") else open(path, mode)


def read_idx(path) -> np.ndarray:
    with _open(path, "rb") as f:
        header = f.read(4)
        if len(header) != 4 or header[:2] != b"\x00\x00":
            raise ValueError(f"{path}: not an IDX file")
        dtype_code, ndim = header[2], header[3]
        if dtype_code != _UBYTE:
            raise ValueError(f"{path}: unsupported IDX element type 0x{dtype_code:02x}")
        shape = struct.unpack(f">{ndim}I", f.read(4 * ndim))
        data = np.frombuffer(f.read(), dtype=np.uint8)
    if data.size != int(np.prod(shape)):
        raise ValueError(f"{path}: expected {int(np.prod(shape))} bytes of data, found {data.size}")
    return data.reshape(shape)


def write_idx(path, array) -> None:
    array = np.asarray(array)
    if array.dtype != np.uint8:
        raise ValueError("only unsigned byte arrays can be written")
    header = struct.pack(">BBBB", 0, 0, _UBYTE, array.ndim)
    header += struct.pack(f">{array.ndim}I", *array.shape)
    with _open(path, "wb") as f:
        f.write(header)
        f.write(np.ascontiguousarray(array).tobytes())


def load_mnist(images_path, labels_path):
    """Return ``(images, digits)``: images flattened to ``(n, rows*cols)``
    floats in [0, 1] and the digit labels as uint8."""
    images = read_idx(images_path)
    digits = read_idx(labels_path)
    if images.ndim != 3:
        raise ValueError(f"{images_path}: expected a 3-D image array (magic 0x{IMAGES_MAGIC:08x})")
    if digits.ndim != 1:
        raise ValueError(f"{labels_path}: expected a 1-D label array (magic 0x{LABELS_MAGIC:08x})")
    if len(images) != len(digits):
        raise ValueError("image and label files disagree on the number of items")
    return images.reshape(len(images), -1).astype(float) / 255.0, digits
