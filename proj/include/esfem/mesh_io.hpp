#pragma once

#include <string>
#include <vector>

#include "esfem/mesh.hpp"

namespace esfem {

enum class MeshFormat {
    NativeJson,  // schema documented in README.md; round-trips bit-exactly
    Msh22,       // Gmsh MSH 2.2 ASCII subset (import only)
};

// Guesses from the extension: .json -> NativeJson, .msh -> Msh22.
MeshFormat format_from_path(const std::string& path);

Mesh import_mesh(const std::string& path, MeshFormat format);
Mesh import_mesh(const std::string& path);

void export_native_json(const Mesh& mesh, const std::string& path);

// VTK legacy ASCII unstructured grid with one scalar point field. Pass an
// empty field vector to export geometry only.
void export_vtk(const Mesh& mesh, const std::vector<double>& nodal_field,
                const std::string& field_name, const std::string& path);

}  // namespace esfem
