"""Countdown search-trace toolkit.

Generates, parses, validates, and scores textual search traces over the
Countdown arithmetic game: twelve heuristic search strategies stream their
exploration as text, an exhaustive solver provides ground truth, and the
dataset pipeline turns both into training corpora with a correctness filter
for expert-iteration loops.

Modules:
    domain       problems, states, legal arithmetic
    tracelang    the trace grammar: events, serializer, parser
    strategies   heuristic DFS/BFS streaming strategies
    oracle       exhaustive solver and difficulty classification
    datasetgen   seeded problem/trajectory dataset generation
    validation   trace validation, error taxonomy, batch reports
    metrics      phi correlation, state alignment, states explored
    star         correctness filter and iteration reports for training loops
    cli          command-line interface
"""

__version__ = "0.1.0"

from ._kernel import BACKEND_NAME

__all__ = ["BACKEND_NAME", "__version__"]
