"""Versioned binary checkpoint for model parameters.

Byte layout (all integers little-endian):

    offset 0   magic          8 bytes  b"NIPCKPT\\x00"
    offset 8   version        u32      currently 1
    offset 12  dim            u32
    offset 16  n_layers       u32
    offset 20  max_arg_pos    u32
    offset 24  seed           i64
    offset 32  section count  u32
    then per section, in param_blocks order:
        name length  u16
        name         utf-8 bytes
        ndim         u8
        shape        u32 per dimension
        data         float64 little-endian, C order

Round trips are bit-exact: load(save(p)) reproduces every tensor.
"""

import struct

import numpy as np

from .gnn import LayerParams, ModelParams, param_blocks

MAGIC = b"NIPCKPT\x00"
VERSION = 1


class CheckpointError(Exception):
    """Malformed, truncated or incompatible checkpoint file."""


def save_checkpoint(params, path):
    blocks = param_blocks(params)
    out = bytearray()
    out += MAGIC
    out += struct.pack("<IIII", VERSION, params.dim, params.n_layers,
                       params.max_arg_pos)
    out += struct.pack("<q", params.seed)
    out += struct.pack("<I", len(blocks))
    for name, tensor in blocks:
        encoded = name.encode()
        out += struct.pack("<H", len(encoded))
        out += encoded
        out += struct.pack("<B", tensor.ndim)
        for d in tensor.shape:
            out += struct.pack("<I", d)
        out += np.ascontiguousarray(tensor, dtype="<f8").tobytes()
    with open(path, "wb") as fh:
        fh.write(bytes(out))


class _Reader:
    def __init__(self, data):
        self.data = data
        self.offset = 0

    def take(self, n):
        if self.offset + n > len(self.data):
            raise CheckpointError("truncated checkpoint")
        chunk = self.data[self.offset:self.offset + n]
        self.offset += n
        return chunk

    def unpack(self, fmt):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def load_checkpoint(path):
    with open(path, "rb") as fh:
        data = fh.read()
    r = _Reader(data)
    if r.take(len(MAGIC)) != MAGIC:
        raise CheckpointError("bad magic; not a checkpoint file")
    version, dim, n_layers, max_arg_pos = r.unpack("<IIII")
    if version != VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")
    (seed,) = r.unpack("<q")
    (n_sections,) = r.unpack("<I")
    tensors = {}
    for _ in range(n_sections):
        (name_len,) = r.unpack("<H")
        name = r.take(name_len).decode()
        (ndim,) = r.unpack("<B")
        shape = tuple(r.unpack("<" + "I" * ndim)) if ndim else ()
        count = 1
        for d in shape:
            count *= d
        raw = r.take(8 * count)
        tensors[name] = np.frombuffer(raw, dtype="<f8").reshape(shape).copy()
    if r.offset != len(data):
        raise CheckpointError("trailing bytes after last section")

    try:
        layers = [
            LayerParams(tensors[f"layer{i}.w_self"],
                        tensors[f"layer{i}.w_in"],
                        tensors[f"layer{i}.w_out"],
                        tensors[f"layer{i}.bias"])
            for i in range(n_layers)
        ]
        params = ModelParams(dim, n_layers, max_arg_pos, seed,
                             tensors["type_table"], tensors["pos_table"],
                             layers, tensors["policy.w_attn"])
    except KeyError as missing:
        raise CheckpointError(f"missing section {missing}") from None
    for name, tensor in param_blocks(params):
        if tensor.shape[-1:] and tensor.shape[-1] != dim:
            raise CheckpointError(f"section {name} has wrong width")
    return params
