"""Smart-entryway access control: two-factor (face + PIN) authentication with
full-face and occluded-face LBPH recognition, a virtual device rig, a chat
command gateway, and an evaluation kit.
"""

from .controller import Config, step
from .devices import DoorRig, PipelineRecognizer, load_scenario
from .lbph import LbpParams, MatchResult, Mode, RecognizerModel, predict, train
from .occlusion import AnnotationDetector, Box, LandmarkSet, recognize_full, recognize_occluded
from .registry import UserStore

__version__ = "0.1.0"

__all__ = [
    "AnnotationDetector",
    "Box",
    "Config",
    "DoorRig",
    "LandmarkSet",
    "LbpParams",
    "MatchResult",
    "Mode",
    "PipelineRecognizer",
    "RecognizerModel",
    "UserStore",
    "load_scenario",
    "predict",
    "recognize_full",
    "recognize_occluded",
    "step",
    "train",
]
