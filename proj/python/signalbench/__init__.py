"""Deterministic four-way intersection signal-control benchmark.

Simulates a single-lane point-queue junction and compares four controllers
(round robin, MONOPOLY feedback, DQN, A2C) across three Weibull traffic
scenarios, with CSV metrics and reproducible seeds throughout.
"""

try:
    from ._core import *  # noqa: F401,F403  (installed wheel layout)
    from ._core import __version__  # noqa: F401
except ImportError:  # development layout: _core sits on sys.path next to the build
    from _core import *  # type: ignore # noqa: F401,F403
    from _core import __version__  # type: ignore # noqa: F401
