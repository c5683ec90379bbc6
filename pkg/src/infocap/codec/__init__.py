"""Arithmetic coding over pluggable probability models.

``encode_stream``/``decode_stream`` are the coder, ``ideal_bits`` the
length target they chase, and the container module gives the streams a
stable on-disk form. Models live in :mod:`infocap.codec.models`; the
built-ins (a static uniform table and an order-2 adaptive byte model)
exist so compression-versus-likelihood identities can be exercised end
to end without any external probability source.
"""

from .coder import (
    Bitstream,
    CoderConfig,
    DEFAULT_CONFIG,
    decode_stream,
    encode_stream,
    ideal_bits,
)
from .container import Container, pack_bytes, pack_file, unpack_bytes, unpack_file
from .models import (
    AdaptiveContextModel,
    ProbabilityModel,
    StaticModel,
    build_model,
    register_model,
    registered_model_ids,
)

__all__ = [
    "Bitstream",
    "CoderConfig",
    "DEFAULT_CONFIG",
    "encode_stream",
    "decode_stream",
    "ideal_bits",
    "Container",
    "pack_bytes",
    "unpack_bytes",
    "pack_file",
    "unpack_file",
    "ProbabilityModel",
    "StaticModel",
    "AdaptiveContextModel",
    "build_model",
    "register_model",
    "registered_model_ids",
]
