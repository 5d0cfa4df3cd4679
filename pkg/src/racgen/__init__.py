"""Reasoning-about-actions engine and procedural QA dataset generator."""
__version__ = "0.1.0"
