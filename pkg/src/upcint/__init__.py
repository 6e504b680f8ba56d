"""Two-source interference in ultra-peripheral heavy-ion vector-meson production."""

__version__ = "0.1.0"
