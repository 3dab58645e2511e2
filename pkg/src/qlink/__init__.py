"""Single-photon protocols between two qubit-cavity nodes joined by a multimode waveguide."""

__version__ = "0.1.0"
