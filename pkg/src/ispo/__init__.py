"""Symptom terminology toolkit.

A cross-vocabulary concept store with Chinese/English synonym rings and
a single-parent taxonomy, plus the machinery around it: bit-exact
serialization, structural and coverage evaluation, a three-stage
entity-linking pipeline, multi-annotator consensus curation with an
audit-log-backed workspace, an HTTP service, and a batch CLI.
"""

__version__ = "0.1.0"

from .model import OntologyStore
from .workspace import Workspace

__all__ = ["OntologyStore", "Workspace", "__version__"]
