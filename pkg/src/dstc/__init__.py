"""Dimming space-time codes for CSK-based MIMO visible-light links.

The package covers the full link: code construction (:mod:`dstc.dimming`),
CSK modulation (:mod:`dstc.csk`), the optical MIMO channel
(:mod:`dstc.channel`), pilot-based ZF and semi-blind Khatri-Rao receivers
(:mod:`dstc.receivers`), uniqueness checks for the trilinear received model
(:mod:`dstc.identifiability`), and a Monte Carlo harness
(:mod:`dstc.experiments`) with a command-line front end (:mod:`dstc.cli`).
"""

__version__ = "0.1.0"
