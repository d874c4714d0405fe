"""Fractional heat- and wave-type propagators and their Lp-Lq decay."""

__version__ = "0.1.0"
