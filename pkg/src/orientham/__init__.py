"""Oriented Hamilton cycles in random digraphs: generators, samplers, packing and exact oracles."""

from .graphcore import Digraph, MalformedInputError, Orientation, OrientedCycle, OrientedPath

__all__ = ["Digraph", "MalformedInputError", "Orientation", "OrientedCycle", "OrientedPath"]
