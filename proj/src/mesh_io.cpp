#include "esfem/mesh_io.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace esfem {

namespace {

using nlohmann::json;

std::ifstream open_input(const std::string& path) {
    std::ifstream file(path);
    if (!file) {
        throw Error(ErrorCategory::FileNotFound, "cannot open " + path);
    }
    return file;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream file(path);
    if (!file) {
        throw Error(ErrorCategory::FileNotFound,
                    "cannot open " + path + " for writing");
    }
    return file;
}

[[noreturn]] void msh_error(const std::string& path, int line,
                            const std::string& what) {
    throw Error(ErrorCategory::MeshFormat,
                path + ":" + std::to_string(line) + ": " + what);
}

Mesh import_msh(const std::string& path) {
    std::ifstream file = open_input(path);

    std::vector<Vec3> points;
    std::map<long long, int> id_to_index;
    struct RawElement {
        int type;
        int tag;
        std::array<long long, 4> nodes;
        int line;
    };
    std::vector<RawElement> tris, tets, lines;

    std::string text_line;
    int line_no = 0;
    bool saw_format = false, saw_nodes = false, saw_elements = false;

    auto next_line = [&]() -> bool {
        while (std::getline(file, text_line)) {
            ++line_no;
            if (!text_line.empty() && text_line.back() == '\r') {
                text_line.pop_back();
            }
            return true;
        }
        return false;
    };

    while (next_line()) {
        if (text_line.empty()) continue;
        if (text_line[0] != '$') {
            msh_error(path, line_no, "expected a section marker, got '" +
                                         text_line + "'");
        }
        const std::string section = text_line.substr(1);
        if (section == "MeshFormat") {
            if (!next_line()) msh_error(path, line_no, "truncated MeshFormat");
            std::istringstream ss(text_line);
            std::string version;
            int file_type = -1, data_size = -1;
            ss >> version >> file_type >> data_size;
            if (version.rfind("2.2", 0) != 0) {
                msh_error(path, line_no,
                          "unsupported MSH version '" + version +
                              "' (only 2.2 ASCII is supported)");
            }
            if (file_type != 0) {
                msh_error(path, line_no, "binary MSH files are not supported");
            }
            if (!next_line() || text_line != "$EndMeshFormat") {
                msh_error(path, line_no, "missing $EndMeshFormat");
            }
            saw_format = true;
        } else if (section == "Nodes") {
            if (!next_line()) msh_error(path, line_no, "truncated Nodes");
            long long count = -1;
            {
                std::istringstream ss(text_line);
                if (!(ss >> count) || count < 0) {
                    msh_error(path, line_no, "bad node count");
                }
            }
            for (long long i = 0; i < count; ++i) {
                if (!next_line()) msh_error(path, line_no, "truncated Nodes");
                std::istringstream ss(text_line);
                long long id;
                double x, y, z;
                if (!(ss >> id >> x >> y >> z)) {
                    msh_error(path, line_no, "bad node line");
                }
                if (!id_to_index.emplace(id, static_cast<int>(points.size()))
                         .second) {
                    msh_error(path, line_no,
                              "duplicate node id " + std::to_string(id));
                }
                points.emplace_back(x, y, z);
            }
            if (!next_line() || text_line != "$EndNodes") {
                msh_error(path, line_no, "missing $EndNodes");
            }
            saw_nodes = true;
        } else if (section == "Elements") {
            if (!next_line()) msh_error(path, line_no, "truncated Elements");
            long long count = -1;
            {
                std::istringstream ss(text_line);
                if (!(ss >> count) || count < 0) {
                    msh_error(path, line_no, "bad element count");
                }
            }
            for (long long i = 0; i < count; ++i) {
                if (!next_line()) msh_error(path, line_no, "truncated Elements");
                std::istringstream ss(text_line);
                long long id;
                int type = -1, ntags = -1;
                if (!(ss >> id >> type >> ntags) || ntags < 0) {
                    msh_error(path, line_no, "bad element line");
                }
                int tag = 0;
                for (int t = 0; t < ntags; ++t) {
                    int value;
                    if (!(ss >> value)) {
                        msh_error(path, line_no, "bad element tag list");
                    }
                    if (t == 0) tag = value;
                }
                int node_count = 0;
                switch (type) {
                    case 1: node_count = 2; break;   // 2-node line
                    case 2: node_count = 3; break;   // 3-node triangle
                    case 4: node_count = 4; break;   // 4-node tet
                    case 15: node_count = 1; break;  // point
                    case 3:
                        msh_error(path, line_no,
                                  "element type 3 (quadrilateral) is not "
                                  "supported; only triangles (2) and "
                                  "tetrahedra (4)");
                    default:
                        msh_error(path, line_no,
                                  "unsupported element type " +
                                      std::to_string(type) +
                                      "; only lines (1), triangles (2) and "
                                      "tetrahedra (4)");
                }
                RawElement raw{type, tag, {-1, -1, -1, -1}, line_no};
                for (int v = 0; v < node_count; ++v) {
                    if (!(ss >> raw.nodes[v])) {
                        msh_error(path, line_no, "bad element node list");
                    }
                }
                if (type == 2) tris.push_back(raw);
                if (type == 4) tets.push_back(raw);
                if (type == 1) lines.push_back(raw);
            }
            if (!next_line() || text_line != "$EndElements") {
                msh_error(path, line_no, "missing $EndElements");
            }
            saw_elements = true;
        } else {
            // skip sections we do not interpret ($PhysicalNames etc.)
            const std::string terminator = "$End" + section;
            bool closed = false;
            while (next_line()) {
                if (text_line == terminator) {
                    closed = true;
                    break;
                }
            }
            if (!closed) msh_error(path, line_no, "missing " + terminator);
        }
    }
    if (!saw_format) msh_error(path, line_no, "missing $MeshFormat section");
    if (!saw_nodes) msh_error(path, line_no, "missing $Nodes section");
    if (!saw_elements) msh_error(path, line_no, "missing $Elements section");
    if (tets.empty() && tris.empty()) {
        msh_error(path, line_no, "no triangles or tetrahedra found");
    }

    auto resolve = [&](const RawElement& raw, int v) {
        const auto it = id_to_index.find(raw.nodes[v]);
        if (it == id_to_index.end()) {
            msh_error(path, raw.line,
                      "unknown node id " + std::to_string(raw.nodes[v]));
        }
        return it->second;
    };

    Mesh mesh;
    if (!tets.empty()) {
        mesh.mode = DimensionMode::Cartesian3D;
        mesh.nodes = points;
        for (const auto& raw : tets) {
            mesh.elements.push_back({resolve(raw, 0), resolve(raw, 1),
                                     resolve(raw, 2), resolve(raw, 3)});
        }
        for (const auto& raw : tris) {
            mesh.boundary_facets.push_back(
                {{resolve(raw, 0), resolve(raw, 1), resolve(raw, 2)}, raw.tag});
        }
    } else {
        // planar mesh: (x, y) become (r, z)
        mesh.mode = DimensionMode::Cylindrical2D;
        for (const auto& p : points) mesh.nodes.emplace_back(p.x, p.y, 0.0);
        for (const auto& raw : tris) {
            mesh.elements.push_back(
                {resolve(raw, 0), resolve(raw, 1), resolve(raw, 2), -1});
        }
        for (const auto& raw : lines) {
            mesh.boundary_facets.push_back(
                {{resolve(raw, 0), resolve(raw, 1), -1}, raw.tag});
        }
    }
    finalize_mesh(mesh);
    try {
        validate_mesh(mesh);
    } catch (const Error& e) {
        throw Error(ErrorCategory::MeshFormat,
                    path + ": imported mesh is invalid: " + e.what());
    }
    return mesh;
}

Mesh import_native_json(const std::string& path) {
    std::ifstream file = open_input(path);
    json doc;
    try {
        doc = json::parse(file);
    } catch (const json::exception& e) {
        throw Error(ErrorCategory::MeshFormat, path + ": " + e.what());
    }
    try {
        if (doc.value("format", "") != "esfem-mesh") {
            throw Error(ErrorCategory::MeshFormat,
                        path + ": missing \"format\": \"esfem-mesh\"");
        }
        if (doc.value("version", 0) != 1) {
            throw Error(ErrorCategory::MeshFormat,
                        path + ": unsupported schema version");
        }
        Mesh mesh;
        const std::string mode = doc.at("mode").get<std::string>();
        if (mode == "cylindrical2d") {
            mesh.mode = DimensionMode::Cylindrical2D;
        } else if (mode == "cartesian3d") {
            mesh.mode = DimensionMode::Cartesian3D;
        } else {
            throw Error(ErrorCategory::MeshFormat,
                        path + ": unknown mode '" + mode + "'");
        }
        const bool tri = mesh.mode == DimensionMode::Cylindrical2D;
        for (const auto& entry : doc.at("nodes")) {
            if (entry.size() != (tri ? 2u : 3u)) {
                throw Error(ErrorCategory::MeshFormat,
                            path + ": node tuple of wrong length");
            }
            mesh.nodes.emplace_back(entry[0].get<double>(),
                                    entry[1].get<double>(),
                                    tri ? 0.0 : entry[2].get<double>());
        }
        for (const auto& entry : doc.at("elements")) {
            if (entry.size() != static_cast<std::size_t>(tri ? 3 : 4)) {
                throw Error(ErrorCategory::MeshFormat,
                            path + ": element tuple of wrong length");
            }
            ElementNodes el{-1, -1, -1, -1};
            for (std::size_t v = 0; v < entry.size(); ++v) {
                el[v] = entry[v].get<int>();
            }
            mesh.elements.push_back(el);
        }
        for (const auto& entry : doc.at("boundary_facets")) {
            const auto& nodes = entry.at("nodes");
            if (nodes.size() != (tri ? 2u : 3u)) {
                throw Error(ErrorCategory::MeshFormat,
                            path + ": facet tuple of wrong length");
            }
            BoundaryFacet facet;
            for (std::size_t v = 0; v < nodes.size(); ++v) {
                facet.nodes[v] = nodes[v].get<int>();
            }
            facet.tag = entry.at("tag").get<int>();
            mesh.boundary_facets.push_back(facet);
        }
        finalize_mesh(mesh);
        validate_mesh(mesh);
        return mesh;
    } catch (const json::exception& e) {
        throw Error(ErrorCategory::MeshFormat, path + ": " + e.what());
    } catch (const Error& e) {
        if (e.category() == ErrorCategory::InvalidMesh) {
            throw Error(ErrorCategory::MeshFormat,
                        path + ": imported mesh is invalid: " + e.what());
        }
        throw;
    }
}

}  // namespace

MeshFormat format_from_path(const std::string& path) {
    const auto dot = path.find_last_of('.');
    std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (ext == "json") return MeshFormat::NativeJson;
    if (ext == "msh") return MeshFormat::Msh22;
    throw Error(ErrorCategory::MeshFormat,
                "cannot infer mesh format from '" + path +
                    "' (expected .json or .msh)");
}

Mesh import_mesh(const std::string& path, MeshFormat format) {
    switch (format) {
        case MeshFormat::NativeJson: return import_native_json(path);
        case MeshFormat::Msh22: return import_msh(path);
    }
    throw Error(ErrorCategory::Internal, "unreachable mesh format");
}

Mesh import_mesh(const std::string& path) {
    return import_mesh(path, format_from_path(path));
}

void export_native_json(const Mesh& mesh, const std::string& path) {
    const bool tri = mesh.mode == DimensionMode::Cylindrical2D;
    json doc;
    doc["format"] = "esfem-mesh";
    doc["version"] = 1;
    doc["mode"] = to_string(mesh.mode);
    json nodes = json::array();
    for (const auto& p : mesh.nodes) {
        if (tri) {
            nodes.push_back(json::array({p.x, p.y}));
        } else {
            nodes.push_back(json::array({p.x, p.y, p.z}));
        }
    }
    doc["nodes"] = std::move(nodes);
    json elements = json::array();
    for (const auto& el : mesh.elements) {
        json tuple = json::array();
        for (int v = 0; v < mesh.nodes_per_element(); ++v) tuple.push_back(el[v]);
        elements.push_back(std::move(tuple));
    }
    doc["elements"] = std::move(elements);
    json facets = json::array();
    for (const auto& f : mesh.boundary_facets) {
        json tuple = json::array();
        for (int v = 0; v < (tri ? 2 : 3); ++v) tuple.push_back(f.nodes[v]);
        facets.push_back(json{{"nodes", std::move(tuple)}, {"tag", f.tag}});
    }
    doc["boundary_facets"] = std::move(facets);
    std::ofstream file = open_output(path);
    file << doc.dump(2) << '\n';
}

void export_vtk(const Mesh& mesh, const std::vector<double>& nodal_field,
                const std::string& field_name, const std::string& path) {
    if (!nodal_field.empty() &&
        nodal_field.size() != mesh.nodes.size()) {
        throw Error(ErrorCategory::Internal,
                    "nodal field length does not match the mesh");
    }
    std::ofstream file = open_output(path);
    file.precision(17);
    const bool tri = mesh.mode == DimensionMode::Cylindrical2D;
    file << "# vtk DataFile Version 3.0\n";
    file << "esfem " << to_string(mesh.mode) << " mesh\n";
    file << "ASCII\nDATASET UNSTRUCTURED_GRID\n";
    file << "POINTS " << mesh.node_count() << " double\n";
    for (const auto& p : mesh.nodes) {
        file << p.x << ' ' << p.y << ' ' << p.z << '\n';
    }
    const int npe = mesh.nodes_per_element();
    file << "CELLS " << mesh.element_count() << ' '
         << mesh.element_count() * (npe + 1) << '\n';
    for (const auto& el : mesh.elements) {
        file << npe;
        for (int v = 0; v < npe; ++v) file << ' ' << el[v];
        file << '\n';
    }
    file << "CELL_TYPES " << mesh.element_count() << '\n';
    for (int e = 0; e < mesh.element_count(); ++e) {
        file << (tri ? 5 : 10) << '\n';
    }
    if (!nodal_field.empty()) {
        file << "POINT_DATA " << mesh.node_count() << '\n';
        file << "SCALARS " << field_name << " double 1\n";
        file << "LOOKUP_TABLE default\n";
        for (double v : nodal_field) file << v << '\n';
    }
}

}  // namespace esfem
