"""Decentralized online optimization on Hadamard manifolds."""
