"""Datagram transports. Endpoints only see `send(data, at)` and `on_datagram(data, now)`."""
import socket
import time

from ..netlab import Link


class EmulatedPath:
    """One direction through a netlab `Link`, driven by an `EventLoop`."""

    def __init__(self, loop, link: Link, deliver):
        self.loop = loop
        self.link = link
        self.deliver = deliver
        self.sent = 0

    def send(self, data, at=None):
        # offer at departure time so the FIFO link sees packets in time order
        self.loop.at(self.loop.now if at is None else at, self._offer, bytes(data))

    def _offer(self, data):
        self.sent += 1
        arrival = self.link.transit(len(data), self.loop.now)
        if arrival is not None:
            self.loop.at(arrival, self._arrive, data)

    def _arrive(self, data):
        self.deliver(data, self.loop.now)


class UdpTransport:
    """Real UDP binding carrying the same wire bytes. `at` is ignored: packets leave now."""

    def __init__(self, bind=("127.0.0.1", 0), peer=None, timeout=0.5):
        self.sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
        self.sock.bind(bind)
        self.sock.settimeout(timeout)
        self.peer = peer
        self._t0 = time.monotonic()

    @property
    def address(self):
        return self.sock.getsockname()

    def now(self):
        return time.monotonic() - self._t0

    def send(self, data, at=None):
        self.sock.sendto(bytes(data), self.peer)

    def recv(self, bufsize=65535):
        """(data, receive time) or None on timeout."""
        try:
            data, _ = self.sock.recvfrom(bufsize)
        except socket.timeout:
            return None
        return data, self.now()

    def close(self):
        self.sock.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
