"""Reading channel matrices and writing records."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .exceptions import InvalidInputError
from .spectral import ChannelSpec

__all__ = ["load_matrix", "load_channel", "write_json"]


def load_matrix(path) -> tuple[np.ndarray, float | None]:
    """Matrix from CSV (L rows of L values) or JSON ``{"matrix": ..., "noise_variance": x}``.

    Returns the matrix and the noise variance found in the file, if any.
    """
    path = Path(path)
    if not path.exists():
        raise InvalidInputError(f"matrix file not found: {path}")
    if path.suffix.lower() == ".json":
        with open(path) as fh:
            d = json.load(fh)
        if "matrix" not in d:
            raise InvalidInputError(f"{path}: JSON channel needs a 'matrix' key")
        return np.asarray(d["matrix"], dtype=float), d.get("noise_variance")
    try:
        H = np.loadtxt(path, delimiter=",", ndmin=2)
    except ValueError as exc:
        raise InvalidInputError(f"{path}: cannot parse CSV matrix ({exc})") from None
    return H, None


def load_channel(path, noise_variance: float | None = None) -> ChannelSpec:
    """A :class:`ChannelSpec`; an explicit ``noise_variance`` overrides the file's."""
    H, file_noise = load_matrix(path)
    theta2 = noise_variance if noise_variance is not None else file_noise
    if theta2 is None:
        raise InvalidInputError("noise variance not given and not present in the matrix file")
    return ChannelSpec(H, theta2)


def write_json(record, path=None) -> str:
    text = json.dumps(record, indent=2, allow_nan=False) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text
