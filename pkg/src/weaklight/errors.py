"""Exceptions shared across the simulator."""


class PostselectionNull(Exception):
    """The post-selected amplitude is below the singular tolerance.

    The transfer function vanishes (or is identically zero) at the requested
    point, so its phase and group delay are undefined there.
    """


class BadBracket(ValueError):
    """The search bracket handed to the angle estimator is unusable."""
