"""Strict term rewriting over free-monoid data, with a supercompiler and a
finite-model backend for proving rewriting-reachability properties."""

__version__ = "0.1.0"
