"""Shared fixtures; the independent numeric oracles live in oracles.py."""

from __future__ import annotations

import os
import shlex
import sys

import pytest

FAKE_PLUGIN = os.path.join(os.path.dirname(__file__), "fake_plugin.py")


@pytest.fixture
def fake_plugin_cmd():
    """Command line for the well-behaved protocol server helper."""
    return f"{shlex.quote(sys.executable)} {shlex.quote(FAKE_PLUGIN)}"


@pytest.fixture
def fake_plugin_cmd_factory():
    """Command line factory for misbehaving server variants."""
    def make(*args):
        extra = " ".join(shlex.quote(a) for a in args)
        return f"{shlex.quote(sys.executable)} {shlex.quote(FAKE_PLUGIN)} {extra}".strip()
    return make
