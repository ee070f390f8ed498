"""Cost-driven screening of line-flow constraints for DC unit commitment."""

__version__ = "0.1.0"
