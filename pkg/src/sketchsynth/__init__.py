"""sketchsynth: robot task programs from one utterance plus one sketched path."""

__version__ = "0.1.0"
