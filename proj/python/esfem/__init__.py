"""Edge-smoothed finite element solver for scalar electrostatics.

Thin Python layer over the C++ core: structured meshing, node perturbation,
mesh I/O, the unit-cube benchmark and its verification suite.
"""

from esfem._core import (
    EsfemError,
    Mesh,
    Vec3,
    box_reference,
    box_study,
    export_json,
    export_vtk,
    import_mesh,
    patch_test,
    perturb,
    quality_fraction_above,
    smoothing_domain_count,
    smoothing_total_measure,
    solve_box,
    structured_mesh,
    verify,
)

__all__ = [
    "EsfemError",
    "Mesh",
    "Vec3",
    "box_reference",
    "box_study",
    "export_json",
    "export_vtk",
    "import_mesh",
    "patch_test",
    "perturb",
    "quality_fraction_above",
    "smoothing_domain_count",
    "smoothing_total_measure",
    "solve_box",
    "structured_mesh",
    "verify",
]

__version__ = "0.1.0"
