"""Automated proofs of nonterminating basic hypergeometric identities.

The engine finds a creative-telescoping certificate for a series under a
simultaneous shift of its parameters, collapses the resulting recurrence,
matches limits, and checks everything both exactly and against an
independent high precision numeric oracle.
"""

__version__ = "0.1.0"
