#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace esfem {

// 2D meshes live in the (r, z) half-plane and use x = r, y = z, z = 0.
struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Vec3() = default;
    Vec3(double x_, double y_, double z_ = 0.0) : x(x_), y(y_), z(z_) {}

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
    Vec3& operator+=(const Vec3& o) {
        x += o.x;
        y += o.y;
        z += o.z;
        return *this;
    }
    Vec3& operator-=(const Vec3& o) {
        x -= o.x;
        y -= o.y;
        z -= o.z;
        return *this;
    }
    Vec3& operator*=(double s) {
        x *= s;
        y *= s;
        z *= s;
        return *this;
    }
    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    Vec3 cross(const Vec3& o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    double norm() const { return std::sqrt(dot(*this)); }
    double max_abs() const {
        return std::max(std::abs(x), std::max(std::abs(y), std::abs(z)));
    }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

enum class DimensionMode {
    Cylindrical2D,  // axisymmetric (r, z) triangles, measure 2*pi*r dr dz
    Cartesian3D,    // tetrahedra
};

inline const char* to_string(DimensionMode m) {
    return m == DimensionMode::Cylindrical2D ? "cylindrical2d" : "cartesian3d";
}

// One category per CLI-reportable failure class; the CLI prints
// "error category=<name>: ..." and maps categories to exit codes.
enum class ErrorCategory {
    ConfigParse,
    FileNotFound,
    MeshFormat,
    InvalidMesh,
    InvalidSpec,
    SolverFailure,
    Internal,
};

inline const char* to_string(ErrorCategory c) {
    switch (c) {
        case ErrorCategory::ConfigParse: return "config-parse";
        case ErrorCategory::FileNotFound: return "file-not-found";
        case ErrorCategory::MeshFormat: return "mesh-format";
        case ErrorCategory::InvalidMesh: return "invalid-mesh";
        case ErrorCategory::InvalidSpec: return "invalid-spec";
        case ErrorCategory::SolverFailure: return "solver-failure";
        case ErrorCategory::Internal: return "internal";
    }
    return "internal";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& message)
        : std::runtime_error(message), category_(category) {}

    ErrorCategory category() const { return category_; }

private:
    ErrorCategory category_;
};

}  // namespace esfem
