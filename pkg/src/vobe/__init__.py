"""Competence registry and partner-selection engine for virtual organization
breeding environments."""

__version__ = "0.1.0"
