"""varp: a vision-driven agent playing a deterministic tick-based action RPG.

The package splits into the simulator (arena), the model gateway, the skill
memory stores, the counter synthesizer (soag), human-demonstration guidance,
the decision pipeline (agent), the benchmark harness, and the control surface
(cli + session service).
"""

__version__ = "0.1.0"

FORMAT_VERSION = 1  # shared version stamp for frames, libraries, sessions, wire schemas
