"""Bridge protocol v1 framing, implemented against the published wire format.

This intentionally does not import the radar pipeline package: the protocol
is the contract. Frames are length-prefixed little-endian binaries:

    frame     := u32 length | body
    hello     := u8 0 | u16 version
    hello_ack := u8 0 | u16 version | u16 n_angles | n_angles * f32 grid_rad
    request   := u8 1 | u32 D | u32 R_patch=21 | f32 az_src | f32 az_tgt
                 | D*21 * f32 patch, Doppler-major row-major
    response  := u8 2 | u8 status | D*21 * f32 patch (status == 0 only)
"""

from __future__ import annotations

import struct

import numpy as np

PROTOCOL_VERSION = 1
MSG_HELLO = 0
MSG_REQUEST = 1
MSG_RESPONSE = 2
STATUS_OK = 0
STATUS_BAD_REQUEST = 1

PATCH_ROWS = 21
_MAX_FRAME = 64 * 1024 * 1024


class WireError(RuntimeError):
    pass


def read_frame(recv) -> bytes:
    header = _read_exact(recv, 4)
    (length,) = struct.unpack("<I", header)
    if length > _MAX_FRAME:
        raise WireError(f"frame length {length} exceeds limit")
    return _read_exact(recv, length)


def write_frame(send, body: bytes) -> None:
    send(struct.pack("<I", len(body)) + body)


def _read_exact(recv, n: int) -> bytes:
    buf = b""
    while len(buf) < n:
        chunk = recv(n - len(buf))
        if not chunk:
            raise WireError("stream closed mid-frame")
        buf += chunk
    return buf


def encode_hello_ack(angle_grid) -> bytes:
    body = struct.pack("<BHH", MSG_HELLO, PROTOCOL_VERSION, len(angle_grid))
    return body + np.asarray(angle_grid, dtype="<f4").tobytes()


def decode_request(body: bytes) -> tuple[np.ndarray, float, float]:
    """Returns (patch as (D, 21) float32 Doppler-major, az_src, az_tgt)."""
    if len(body) < 17 or body[0] != MSG_REQUEST:
        raise WireError("malformed request frame")
    d, r_patch, az_src, az_tgt = struct.unpack("<IIff", body[1:17])
    if r_patch != PATCH_ROWS:
        raise WireError(f"unsupported patch height {r_patch}")
    payload = np.frombuffer(body[17:], dtype="<f4")
    if payload.size != d * r_patch:
        raise WireError(f"payload holds {payload.size} floats, expected {d * r_patch}")
    return payload.reshape(d, r_patch).copy(), float(az_src), float(az_tgt)


def encode_response(patch_doppler_major: np.ndarray | None, status: int = STATUS_OK) -> bytes:
    head = struct.pack("<BB", MSG_RESPONSE, status)
    if status != STATUS_OK or patch_doppler_major is None:
        return head
    return head + np.ascontiguousarray(patch_doppler_major, dtype="<f4").tobytes()
