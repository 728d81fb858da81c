from .permittivity import PermittivityModel, kramers_kronig
from .oscillator import Oscillator, OscillatorModel
from .tabulated import OpticalTable, TabulatedModel, load_optical_table
from .utils import get_model_types, get_available_model_types, get_model_table
from .utils import resolve_substrate

__all__ = [
    "PermittivityModel",
    "Oscillator",
    "OscillatorModel",
    "OpticalTable",
    "TabulatedModel",
    "kramers_kronig",
    "load_optical_table",
    "get_model_types",
    "get_available_model_types",
    "get_model_table",
    "resolve_substrate",
]
