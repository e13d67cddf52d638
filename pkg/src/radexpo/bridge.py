"""Wire protocol for external (learned) view adapters.

Length-prefixed binary frames over a byte stream, little-endian throughout:

    frame     := u32 length | body            (length = len(body))
    hello     := u8 0 | u16 version
    hello_ack := u8 0 | u16 version | u16 n_angles | n_angles * f32 grid_rad
    request   := u8 1 | u32 D | u32 R_patch=21 | f32 az_src | f32 az_tgt
                 | D*21 * f32 patch, row-major with Doppler rows
    response  := u8 2 | u8 status | D*21 * f32 patch (present iff status == 0)

The in-memory signature patch is (21, D) with range rows; on the wire it is
transposed to Doppler-major to match the heatmap dump layout.
"""

from __future__ import annotations

import logging
import socket
import struct
import time
from dataclasses import replace

import numpy as np

from .signatures import PATCH_ROWS, RDSignature
from .viewadapt import AdaptedSignature

log = logging.getLogger(__name__)

PROTOCOL_VERSION = 1
MSG_HELLO = 0
MSG_REQUEST = 1
MSG_RESPONSE = 2
STATUS_OK = 0
STATUS_BAD_REQUEST = 1

DEFAULT_TIMEOUT_S = 0.1
_MAX_FRAME = 64 * 1024 * 1024


class BridgeError(RuntimeError):
    """Base class for adapter bridge failures."""


class BridgeTimeoutError(BridgeError):
    pass


class BridgeProtocolError(BridgeError):
    pass


def write_frame(send, body: bytes) -> None:
    send(struct.pack("<I", len(body)) + body)


def read_frame(recv) -> bytes:
    header = _read_exact(recv, 4)
    (length,) = struct.unpack("<I", header)
    if length > _MAX_FRAME:
        raise BridgeProtocolError(f"frame length {length} exceeds limit")
    return _read_exact(recv, length)


def _read_exact(recv, n: int) -> bytes:
    buf = b""
    while len(buf) < n:
        chunk = recv(n - len(buf))
        if not chunk:
            raise BridgeProtocolError("byte stream closed mid-frame")
        buf += chunk
    return buf


def encode_hello() -> bytes:
    return struct.pack("<BH", MSG_HELLO, PROTOCOL_VERSION)


def encode_hello_ack(angle_grid: tuple[float, ...]) -> bytes:
    body = struct.pack("<BHH", MSG_HELLO, PROTOCOL_VERSION, len(angle_grid))
    return body + np.asarray(angle_grid, dtype="<f4").tobytes()


def decode_hello_ack(body: bytes) -> tuple[int, tuple[float, ...]]:
    if len(body) < 5 or body[0] != MSG_HELLO:
        raise BridgeProtocolError("malformed handshake acknowledgement")
    version, n_angles = struct.unpack("<HH", body[1:5])
    grid = np.frombuffer(body[5:], dtype="<f4")
    if grid.size != n_angles:
        raise BridgeProtocolError("handshake angle grid length mismatch")
    return version, tuple(float(a) for a in grid)


def encode_request(patch: np.ndarray, az_src: float, az_tgt: float) -> bytes:
    """Patch is (21, D) in memory; transmitted Doppler-major as (D, 21)."""
    rows, d = patch.shape
    if rows != PATCH_ROWS:
        raise ValueError(f"patch must have {PATCH_ROWS} range rows")
    head = struct.pack("<BIIff", MSG_REQUEST, d, PATCH_ROWS, az_src, az_tgt)
    return head + np.ascontiguousarray(patch.T, dtype="<f4").tobytes()


def decode_request(body: bytes) -> tuple[np.ndarray, float, float]:
    if len(body) < 17 or body[0] != MSG_REQUEST:
        raise BridgeProtocolError("malformed adaptation request")
    d, r_patch, az_src, az_tgt = struct.unpack("<IIff", body[1:17])
    if r_patch != PATCH_ROWS:
        raise BridgeProtocolError(f"unsupported patch height {r_patch}")
    payload = np.frombuffer(body[17:], dtype="<f4")
    if payload.size != d * r_patch:
        raise BridgeProtocolError(
            f"request payload holds {payload.size} floats, expected {d * r_patch}"
        )
    return payload.reshape(d, r_patch).T.astype(float), float(az_src), float(az_tgt)


def encode_response(patch: np.ndarray | None, status: int = STATUS_OK) -> bytes:
    head = struct.pack("<BB", MSG_RESPONSE, status)
    if status != STATUS_OK or patch is None:
        return head
    return head + np.ascontiguousarray(patch.T, dtype="<f4").tobytes()


def decode_response(body: bytes, d: int) -> np.ndarray:
    if len(body) < 2 or body[0] != MSG_RESPONSE:
        raise BridgeProtocolError("malformed adaptation response")
    status = body[1]
    if status != STATUS_OK:
        raise BridgeProtocolError(f"adapter returned status {status}")
    payload = np.frombuffer(body[2:], dtype="<f4")
    if payload.size != d * PATCH_ROWS:
        raise BridgeProtocolError(
            f"response payload holds {payload.size} floats, expected {d * PATCH_ROWS}"
        )
    return payload.reshape(d, PATCH_ROWS).T.astype(float)


class BridgeAdapter:
    """ViewAdapter backed by a remote model over a local TCP socket.

    The handshake is performed on connect and yields the adapter's supported
    angle grid. Responses are shape-checked; negative entries are clamped to
    zero (and logged) so downstream correlation sees a valid signature.
    """

    adapter_id = "bridge"

    def __init__(self, endpoint: str, timeout_s: float = DEFAULT_TIMEOUT_S) -> None:
        host, _, port = endpoint.rpartition(":")
        if not host or not port.isdigit():
            raise ValueError(f"bridge endpoint must be host:port, got {endpoint!r}")
        self._sock = socket.create_connection((host or "127.0.0.1", int(port)), timeout=timeout_s)
        self._sock.settimeout(timeout_s)
        self.latencies_s: list[float] = []
        try:
            write_frame(self._sock.sendall, encode_hello())
            ack = read_frame(self._sock.recv)
        except socket.timeout as exc:
            raise BridgeTimeoutError("handshake timed out") from exc
        version, grid = decode_hello_ack(ack)
        if version != PROTOCOL_VERSION:
            raise BridgeProtocolError(f"unsupported protocol version {version}")
        self._grid = grid

    def angle_grid(self) -> tuple[float, ...]:
        return self._grid

    def adapt(
        self,
        sig: RDSignature,
        az_src: float,
        az_tgt: float,
        motion_axis: float | None = None,
    ) -> AdaptedSignature:
        start = time.perf_counter()
        try:
            write_frame(self._sock.sendall, encode_request(sig.patch, az_src, az_tgt))
            body = read_frame(self._sock.recv)
        except socket.timeout as exc:
            raise BridgeTimeoutError("adapter did not answer in time") from exc
        latency = time.perf_counter() - start
        self.latencies_s.append(latency)
        patch = decode_response(body, sig.patch.shape[1])
        negatives = patch < 0
        if np.any(negatives):
            log.warning(
                "bridge response carried %d negative entries; clamped to zero",
                int(negatives.sum()),
            )
            patch = np.where(negatives, 0.0, patch)
        return AdaptedSignature(
            replace(sig, patch=patch), az_src, az_tgt, self.adapter_id
        )

    def close(self) -> None:
        self._sock.close()

    def __enter__(self) -> "BridgeAdapter":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
