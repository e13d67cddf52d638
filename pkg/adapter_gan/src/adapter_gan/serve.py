"""Bridge-protocol server: answers adaptation requests with the trained
generator (or with the request itself in identity mode, used for
conformance testing)."""

from __future__ import annotations

import socketserver
import threading

import numpy as np

from . import wire
from .train import adapt_patch, load_checkpoint


class AdapterServer(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, address, checkpoint=None, identity: bool = False):
        if not identity and checkpoint is None:
            raise ValueError("need a checkpoint unless running in identity mode")
        self.identity = identity
        if identity:
            self.generator = None
            self.angle_grid: tuple[float, ...] = ()
        else:
            self.generator, self.angle_grid = load_checkpoint(checkpoint)
        super().__init__(address, _Handler)

    @property
    def endpoint(self) -> str:
        host, port = self.server_address
        return f"{host}:{port}"


class _Handler(socketserver.BaseRequestHandler):
    def handle(self):
        server: AdapterServer = self.server  # type: ignore[assignment]
        while True:
            try:
                body = wire.read_frame(self.request.recv)
            except wire.WireError:
                return
            if not body:
                return
            if body[0] == wire.MSG_HELLO:
                wire.write_frame(self.request.sendall, wire.encode_hello_ack(server.angle_grid))
                continue
            if body[0] != wire.MSG_REQUEST:
                wire.write_frame(
                    self.request.sendall,
                    wire.encode_response(None, wire.STATUS_BAD_REQUEST),
                )
                continue
            try:
                patch_dm, az_src, az_tgt = wire.decode_request(body)
            except wire.WireError:
                wire.write_frame(
                    self.request.sendall,
                    wire.encode_response(None, wire.STATUS_BAD_REQUEST),
                )
                continue
            if server.identity:
                out_dm = patch_dm
            else:
                # wire layout is Doppler-major; the model works on range rows
                patch = patch_dm.T.astype(np.float32)
                out = adapt_patch(server.generator, patch, az_src, az_tgt)
                out_dm = np.maximum(out, 0.0).T
            wire.write_frame(self.request.sendall, wire.encode_response(out_dm))


def start_server(
    host: str = "127.0.0.1",
    port: int = 0,
    checkpoint=None,
    identity: bool = False,
) -> AdapterServer:
    """Start the server on a background thread; returns the live server."""
    server = AdapterServer((host, port), checkpoint=checkpoint, identity=identity)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    return server
