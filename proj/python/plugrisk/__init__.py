"""Plug-in Bayes classifiers, exact risks, and their L1/KL risk bounds."""

import json

from ._core import *  # noqa: F401,F403
from ._core import __version__, run_pipeline as _run_pipeline


def run_pipeline(config):
    """Run a PAC experiment from a config dict; returns the per-sample-size summary list."""
    return json.loads(_run_pipeline(json.dumps(config)))
