from .input_shaper import (  # noqa
    ShaperDesign,
    ShaperKind,
    damping_factor,
    design_shaper,
    shape_command,
)
