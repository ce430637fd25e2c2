"""
Network Sampling Simulator Package

A discrete-time simulator of dynamic spatial networks with pluggable
link-tracing sampling designs, an HIV epidemic run as a virus-operated
design, and seek-and-treat interventions compared over replicated runs.
"""

__version__ = "0.1.0"
