"""Open-domain dialogue engine.

Candidate responses are generated by a pool of dialogue modules, tied
together by discourse relations instantiated over a knowledge graph,
ranked by a confidence/loss scheme, and surfaced through an HTTP API,
a REPL, and a simulation harness.
"""

from opendialog.config import EngineConfig
from opendialog.engine import Engine

__version__ = "0.1.0"

__all__ = ["Engine", "EngineConfig", "__version__"]
