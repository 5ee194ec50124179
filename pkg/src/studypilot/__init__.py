"""Studypilot: constraint-respecting study plans and transcript-grounded tutoring."""

__version__ = "0.1.0"
