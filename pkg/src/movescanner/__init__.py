"""Static security analysis for Move-style smart-contract bytecode."""

__version__ = "0.1.0"
TOOL_NAME = "movescanner"
