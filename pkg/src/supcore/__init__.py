"""Core-stable exchanges for partition exchange economies."""
__version__ = "0.1.0"
