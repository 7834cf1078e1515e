#pragma once

#include "ifind/surface/mesh.hpp"

namespace ifind::surface {

// Procedural meshes used for the bundled phantom and for tests. All are
// wound counter-clockwise seen from outside.

/// Upper half of an axis-aligned ellipsoid centred at the origin, open at
/// z = 0. `rings` latitude bands from the apex down to the rim, `segments`
/// around. The apex is vertex 0.
SurfaceMesh make_ellipsoid_dome(double semi_x, double semi_y, double semi_z, int rings,
                                int segments);

/// Closed UV sphere centred at the origin.
SurfaceMesh make_sphere(double radius, int rings, int segments);

/// Flat rectangular patch in the plane z = height, normal +z, centred at the origin.
SurfaceMesh make_patch(double size_x, double size_y, int cells_x, int cells_y, double height = 0.0);

}  // namespace ifind::surface
