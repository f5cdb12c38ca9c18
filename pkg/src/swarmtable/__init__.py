"""swarmtable: deterministic tabletop swarm simulator with a two-agent game engine."""

__version__ = "0.1.0"
