"""Listening-test service: blind assignment, score capture, CSV export."""

from .app import create_app
from .models import (
    MAX_SYSTEMS,
    AssignmentView,
    LabeledStimulus,
    Screen,
    ScreenSubmission,
    StimulusSet,
    SystemSpec,
    TestDefinition,
    validate_definition,
)
from .store import (
    QuotaExceeded,
    Store,
    StoreConflict,
    assigned_utterances,
    screen_labels,
)

__all__ = [
    "MAX_SYSTEMS",
    "AssignmentView",
    "LabeledStimulus",
    "QuotaExceeded",
    "Screen",
    "ScreenSubmission",
    "StimulusSet",
    "Store",
    "StoreConflict",
    "SystemSpec",
    "TestDefinition",
    "assigned_utterances",
    "create_app",
    "screen_labels",
    "validate_definition",
]
