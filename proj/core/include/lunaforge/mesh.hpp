#pragma once
// Heightfield meshing. MeshBuffers mirrors the four authored attributes of a
// polygon mesh: points, face vertex counts, face vertex indices, and st
// (one texture coordinate per face-vertex entry).

#include <cstdint>
#include <filesystem>
#include <vector>

#include "lunaforge/dem.hpp"

namespace lunaforge {

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;
    friend bool operator==(const Vec3&, const Vec3&) = default;
};

struct Vec2 {
    double u = 0.0, v = 0.0;
    friend bool operator==(const Vec2&, const Vec2&) = default;
};

struct MeshBuffers {
    std::vector<Vec3> points;
    std::vector<std::int32_t> face_vertex_counts;
    std::vector<std::int32_t> face_vertex_indices;
    std::vector<Vec2> st;

    std::size_t face_count() const noexcept { return face_vertex_counts.size(); }
    friend bool operator==(const MeshBuffers&, const MeshBuffers&) = default;
};

/// Throws Error(validation) if the buffer-length identity or index range is
/// violated.
void validate_mesh(const MeshBuffers& mesh);

/// One vertex per cell at (x * res, y * res, elevation); one counter-clockwise
/// quad per grid square; st = world xy * uv_scale.
MeshBuffers dem_to_mesh(const Dem& dem, double uv_scale = 1.0);

/// Splits every quad along its v0-v2 diagonal.
MeshBuffers triangulate(const MeshBuffers& mesh);

/// Area-weighted per-vertex normals; +z where a vertex has no area.
std::vector<Vec3> compute_normals(const MeshBuffers& mesh);

/// Keeps every `factor`-th row and column (always including the last), then
/// meshes and triangulates the kept grid. Kept elevations are exact.
MeshBuffers collision_mesh(const Dem& dem, int factor, double uv_scale = 1.0);

enum class MeshFormat { obj, ply };

/// OBJ: text v/vt/f with 1-based indices, any polygon size.
/// PLY: binary little-endian, per-vertex x y z nx ny nz u v, triangles only.
void export_mesh(const MeshBuffers& mesh, const std::filesystem::path& path, MeshFormat format);

}  // namespace lunaforge
