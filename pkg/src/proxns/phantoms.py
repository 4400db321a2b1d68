"""Bundled synthetic test images and minimal PGM input/output.

The phantoms are deterministic, wavelet-compressible grey-scale images
with intensities in [0, 255], standing in for the usual photographic and
astronomical test images at desk scale.
"""

import numpy as np

from .errors import ContractError


def phantom_blocks(size=64):
    """Piecewise-constant blocks, a ramp and a smooth bump; range [0, 255]."""
    img = np.zeros((size, size))
    q = size // 8
    img[q : 3 * q, q : 4 * q] = 180.0
    img[4 * q : 7 * q, 2 * q : 3 * q] = 90.0
    img[5 * q : 6 * q, 4 * q : 7 * q] = 220.0
    yy, xx = np.mgrid[0:size, 0:size] / (size - 1.0)
    img += 35.0 * xx
    bump = 120.0 * np.exp(-(((yy - 0.35) ** 2 + (xx - 0.72) ** 2) / 0.018))
    img = np.clip(img + bump, 0.0, 255.0)
    return img


def phantom_sources(size=64, n_sources=12, seed=7):
    """Point-like Gaussian sources on a faint background, radio-imaging style."""
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:size, 0:size] / (size - 1.0)
    img = np.zeros((size, size))
    for _ in range(n_sources):
        cy, cx = rng.random(2) * 0.84 + 0.08
        amp = 60.0 + 195.0 * rng.random()
        width = 0.0004 + 0.0035 * rng.random()
        img += amp * np.exp(-(((yy - cy) ** 2 + (xx - cx) ** 2) / (2 * width)))
    img += 6.0 * np.exp(-(((yy - 0.5) ** 2 + (xx - 0.5) ** 2) / 0.25))
    return np.clip(img, 0.0, 255.0)


PHANTOMS = {"blocks": phantom_blocks, "sources": phantom_sources}


def get_phantom(name, size=64):
    try:
        maker = PHANTOMS[name]
    except KeyError:
        raise ContractError(f"unknown phantom {name!r}; options: {sorted(PHANTOMS)}")
    return maker(size)


def write_pgm(path, image):
    """8-bit binary PGM preview of a float image (clipped to [0, 255])."""
    arr = np.clip(np.asarray(image), 0.0, 255.0).astype(np.uint8)
    if arr.ndim != 2:
        raise ContractError("PGM output needs a 2-D image")
    h, w = arr.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(arr.tobytes())


def read_pgm(path):
    """Read a binary (P5) or ASCII (P2) 8-bit PGM into a float array."""
    with open(path, "rb") as fh:
        data = fh.read()
    tokens = []
    pos = 0
    while len(tokens) < 4:
        # header tokens with '#' comments skipped
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos])
    magic, w, h, maxval = tokens[0], int(tokens[1]), int(tokens[2]), int(tokens[3])
    if maxval > 255:
        raise ContractError("only 8-bit PGM images are supported")
    if magic == b"P5":
        pos += 1
        pixels = np.frombuffer(data, dtype=np.uint8, count=w * h, offset=pos)
    elif magic == b"P2":
        pixels = np.array(data[pos:].split(), dtype=np.int64)
        if pixels.size != w * h:
            raise ContractError("truncated ASCII PGM data")
    else:
        raise ContractError("not a PGM file")
    return pixels.reshape(h, w).astype(np.float64)
