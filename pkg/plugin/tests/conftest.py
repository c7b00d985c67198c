import pytest

from wireproto import GOOD_HANDSHAKE, PluginProc


@pytest.fixture
def server():
    """A live nearest-mode server with the handshake already exchanged."""
    with PluginProc(mode="nearest", scale=2) as p:
        assert p.handshake() == GOOD_HANDSHAKE
        yield p
