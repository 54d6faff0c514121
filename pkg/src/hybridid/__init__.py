"""Hybrid system identification and reinforcement-learning control.

Simulators, LSTM encoder-decoder reduced models retrained on historical
data, PPO over ensembles of reduced models, and evaluation tooling.
"""
__version__ = "0.1.0"
