"""Seeded simulations of iterated quantum games played by Bayesian rational agents."""

__version__ = "0.1.0"

from . import chsh_agent, chsh_game, epd_agent, epd_game, qcore, rng, runner  # noqa: F401
