"""On-disk container for compressed byte streams.

Layout, all fixed-endian and bit-exact:

    offset  size  field
    0       4     magic ``ICAC``
    4       1     format version (currently 1)
    5       1     precision_bits B
    6       1     freq_bits f
    7       1     model id length m
    8       m     model id, UTF-8
    8+m     8     symbol count, little-endian unsigned
    16+m    ...   coder bitstream, zero-padded to whole bytes

The symbol count lives in the header rather than as an in-band terminator
so the probability model never sees an artificial end-of-stream symbol.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

from ..errors import InputError, ParseError
from .coder import Bitstream, CoderConfig, decode_stream, encode_stream
from .models import ProbabilityModel, build_model

__all__ = ["MAGIC", "VERSION", "Container", "pack_bytes", "unpack_bytes", "pack_file", "unpack_file"]

MAGIC = b"ICAC"
VERSION = 1


@dataclass(frozen=True)
class Container:
    config: CoderConfig
    model_id: str
    symbol_count: int
    bitstream: Bitstream

    @property
    def payload_bits(self) -> int:
        """Size of the bitstream section in bits (8 x its byte length)."""
        return 8 * len(self.bitstream.data)

    def to_bytes(self) -> bytes:
        model_id = self.model_id.encode("utf-8")
        if len(model_id) > 255:
            raise InputError("model id longer than 255 bytes")
        header = struct.pack(
            f"<4sBBBB{len(model_id)}sQ",
            MAGIC,
            VERSION,
            self.config.precision_bits,
            self.config.freq_bits,
            len(model_id),
            model_id,
            self.symbol_count,
        )
        return header + self.bitstream.data

    @classmethod
    def from_bytes(cls, blob: bytes) -> "Container":
        if len(blob) < 8 or blob[:4] != MAGIC:
            raise ParseError("not a compressed container (bad magic)")
        version, precision, freq, id_len = struct.unpack_from("<BBBB", blob, 4)
        if version != VERSION:
            raise ParseError(f"unsupported container version {version}")
        body = 8 + id_len
        if len(blob) < body + 8:
            raise ParseError("container header truncated")
        model_id = blob[8:body].decode("utf-8")
        (count,) = struct.unpack_from("<Q", blob, body)
        payload = blob[body + 8 :]
        return cls(
            config=CoderConfig(precision_bits=precision, freq_bits=freq),
            model_id=model_id,
            symbol_count=count,
            bitstream=Bitstream.from_bytes(payload),
        )


def pack_bytes(
    data: bytes,
    model: ProbabilityModel | str = "adaptive-o2",
    cfg: CoderConfig | None = None,
) -> bytes:
    """Compress a byte string into a container.

    ``model`` may be a registered model id or a pristine byte-alphabet
    model instance (its ``model_id`` must be registered for the stream
    to be unpackable later).
    """
    cfg = cfg or CoderConfig()
    if isinstance(model, str):
        model = build_model(model, cfg.freq_cap)
    if model.alphabet_size != 256:
        raise InputError(
            f"byte packing needs a 256-symbol model, got {model.alphabet_size}"
        )
    bits = encode_stream(model, data, cfg)
    return Container(
        config=cfg, model_id=model.model_id, symbol_count=len(data), bitstream=bits
    ).to_bytes()


def unpack_bytes(blob: bytes) -> bytes:
    """Decompress a container produced by :func:`pack_bytes`."""
    container = Container.from_bytes(blob)
    model = build_model(container.model_id, container.config.freq_cap)
    if model.alphabet_size != 256:
        raise InputError(
            f"model {container.model_id!r} is not a byte-alphabet model"
        )
    symbols = decode_stream(
        model, container.bitstream, container.symbol_count, container.config
    )
    return bytes(symbols)


def pack_file(
    src: str | Path,
    dst: str | Path,
    model: ProbabilityModel | str = "adaptive-o2",
    cfg: CoderConfig | None = None,
) -> Container:
    blob = pack_bytes(Path(src).read_bytes(), model, cfg)
    Path(dst).write_bytes(blob)
    return Container.from_bytes(blob)


def unpack_file(src: str | Path, dst: str | Path) -> int:
    data = unpack_bytes(Path(src).read_bytes())
    Path(dst).write_bytes(data)
    return len(data)
