import socket
import struct
import time

import numpy as np
import pytest

from adapter_gan import wire
from adapter_gan.serve import start_server


@pytest.fixture
def identity_server():
    server = start_server(port=0, identity=True)
    yield server
    server.shutdown()
    server.server_close()


def _connect(server):
    sock = socket.create_connection(server.server_address, timeout=2.0)
    sock.settimeout(2.0)
    return sock


def _request_body(patch_dm: np.ndarray, az_src=0.1, az_tgt=0.7) -> bytes:
    d, rows = patch_dm.shape
    head = struct.pack("<BIIff", wire.MSG_REQUEST, d, rows, az_src, az_tgt)
    return head + np.ascontiguousarray(patch_dm, dtype="<f4").tobytes()


def test_handshake_and_echo(identity_server):
    sock = _connect(identity_server)
    wire.write_frame(sock.sendall, struct.pack("<BH", wire.MSG_HELLO, 1))
    ack = wire.read_frame(sock.recv)
    assert ack[0] == wire.MSG_HELLO

    patch = np.random.default_rng(0).uniform(0, 1, (182, 21)).astype("<f4")
    wire.write_frame(sock.sendall, _request_body(patch))
    body = wire.read_frame(sock.recv)
    assert body[0] == wire.MSG_RESPONSE
    assert body[1] == wire.STATUS_OK
    out = np.frombuffer(body[2:], dtype="<f4").reshape(182, 21)
    assert np.array_equal(out, patch)
    sock.close()


def test_malformed_frame_gets_error_status(identity_server):
    sock = _connect(identity_server)
    # truncated payload: claims D=182 but carries 10 floats
    head = struct.pack("<BIIff", wire.MSG_REQUEST, 182, 21, 0.0, 0.0)
    wire.write_frame(sock.sendall, head + b"\x00" * 40)
    body = wire.read_frame(sock.recv)
    assert body[0] == wire.MSG_RESPONSE
    assert body[1] != wire.STATUS_OK
    sock.close()


def test_unknown_message_type_gets_error_status(identity_server):
    sock = _connect(identity_server)
    wire.write_frame(sock.sendall, bytes([99]) + b"junk")
    body = wire.read_frame(sock.recv)
    assert body[1] != wire.STATUS_OK
    sock.close()


def test_throughput_on_patches(identity_server):
    sock = _connect(identity_server)
    patch = np.random.default_rng(1).uniform(0, 1, (182, 21)).astype("<f4")
    body = _request_body(patch)
    n = 200
    start = time.perf_counter()
    for _ in range(n):
        wire.write_frame(sock.sendall, body)
        wire.read_frame(sock.recv)
    rate = n / (time.perf_counter() - start)
    sock.close()
    assert rate >= 100.0, f"echo throughput {rate:.0f} req/s"
