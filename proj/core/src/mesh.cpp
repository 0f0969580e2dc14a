#include "lunaforge/mesh.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <limits>
#include <string>

#include "lunaforge/error.hpp"
#include "lunaforge/text_io.hpp"

namespace lunaforge {
namespace {

// Meshes the DEM restricted to the given column and row indices.
MeshBuffers grid_mesh(const std::vector<int>& cols, const std::vector<int>& rows, const Dem& dem, double uv_scale) {
    const std::size_t nx = cols.size(), ny = rows.size();
    if (nx * ny > static_cast<std::size_t>(std::numeric_limits<std::int32_t>::max())) {
        fail(ErrorKind::budget_exceeded, "mesh too large for 32-bit indices");
    }
    const double res = dem.resolution();
    MeshBuffers mesh;
    mesh.points.reserve(nx * ny);
    for (int y : rows) {
        for (int x : cols) mesh.points.push_back({x * res, y * res, static_cast<double>(dem.at(x, y))});
    }
    const std::size_t quads = (nx - 1) * (ny - 1);
    mesh.face_vertex_counts.assign(quads, 4);
    mesh.face_vertex_indices.reserve(quads * 4);
    mesh.st.reserve(quads * 4);
    for (std::size_t j = 0; j + 1 < ny; ++j) {
        for (std::size_t i = 0; i + 1 < nx; ++i) {
            const auto v0 = static_cast<std::int32_t>(j * nx + i);
            const std::int32_t corners[4] = {v0, v0 + 1, static_cast<std::int32_t>(v0 + nx + 1),
                                             static_cast<std::int32_t>(v0 + nx)};
            for (std::int32_t c : corners) {
                mesh.face_vertex_indices.push_back(c);
                const Vec3& p = mesh.points[static_cast<std::size_t>(c)];
                mesh.st.push_back({p.x * uv_scale, p.y * uv_scale});
            }
        }
    }
    return mesh;
}

std::vector<int> iota_range(int n) {
    std::vector<int> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = i;
    return v;
}

std::vector<int> subsample_axis(int n, int factor) {
    std::vector<int> v;
    for (int i = 0; i < n; i += factor) v.push_back(i);
    if (v.back() != n - 1) v.push_back(n - 1);
    return v;
}

static_assert(std::endian::native == std::endian::little, "PLY writer assumes a little-endian host");

void append_le(std::string& out, const void* data, std::size_t bytes) {
    out.append(static_cast<const char*>(data), bytes);
}

}  // namespace

void validate_mesh(const MeshBuffers& mesh) {
    std::size_t total = 0;
    for (std::int32_t c : mesh.face_vertex_counts) {
        if (c < 3) fail(ErrorKind::validation, "face with fewer than 3 vertices");
        total += static_cast<std::size_t>(c);
    }
    if (total != mesh.face_vertex_indices.size() || total != mesh.st.size()) {
        fail(ErrorKind::validation, "face vertex counts, indices and st lengths disagree");
    }
    for (std::int32_t i : mesh.face_vertex_indices) {
        if (i < 0 || static_cast<std::size_t>(i) >= mesh.points.size()) {
            fail(ErrorKind::validation, "face vertex index out of range");
        }
    }
}

MeshBuffers dem_to_mesh(const Dem& dem, double uv_scale) {
    if (dem.has_holes()) fail(ErrorKind::hole, "dem_to_mesh requires a hole-free DEM");
    return grid_mesh(iota_range(dem.width()), iota_range(dem.height()), dem, uv_scale);
}

MeshBuffers triangulate(const MeshBuffers& mesh) {
    for (std::int32_t c : mesh.face_vertex_counts) {
        if (c != 4) fail(ErrorKind::invalid_argument, "triangulate expects quads only");
    }
    if (mesh.face_vertex_indices.size() != 4 * mesh.face_count() || mesh.st.size() != mesh.face_vertex_indices.size()) {
        fail(ErrorKind::validation, "quad mesh buffers have inconsistent lengths");
    }
    MeshBuffers out;
    out.points = mesh.points;
    out.face_vertex_counts.assign(2 * mesh.face_count(), 3);
    out.face_vertex_indices.reserve(6 * mesh.face_count());
    out.st.reserve(6 * mesh.face_count());
    static constexpr int kSplit[6] = {0, 1, 2, 0, 2, 3};
    for (std::size_t f = 0; f < mesh.face_count(); ++f) {
        for (int k : kSplit) {
            out.face_vertex_indices.push_back(mesh.face_vertex_indices[4 * f + k]);
            out.st.push_back(mesh.st[4 * f + k]);
        }
    }
    return out;
}

std::vector<Vec3> compute_normals(const MeshBuffers& mesh) {
    validate_mesh(mesh);
    std::vector<Vec3> acc(mesh.points.size());
    std::size_t offset = 0;
    for (std::int32_t count : mesh.face_vertex_counts) {
        // Newell's method: twice the area-weighted face normal.
        Vec3 n;
        for (std::int32_t k = 0; k < count; ++k) {
            const Vec3& a = mesh.points[static_cast<std::size_t>(mesh.face_vertex_indices[offset + k])];
            const Vec3& b = mesh.points[static_cast<std::size_t>(mesh.face_vertex_indices[offset + (k + 1) % count])];
            n.x += (a.y - b.y) * (a.z + b.z);
            n.y += (a.z - b.z) * (a.x + b.x);
            n.z += (a.x - b.x) * (a.y + b.y);
        }
        for (std::int32_t k = 0; k < count; ++k) {
            Vec3& t = acc[static_cast<std::size_t>(mesh.face_vertex_indices[offset + k])];
            t.x += n.x;
            t.y += n.y;
            t.z += n.z;
        }
        offset += static_cast<std::size_t>(count);
    }
    for (Vec3& n : acc) {
        const double len = std::sqrt(n.x * n.x + n.y * n.y + n.z * n.z);
        if (len > 0.0 && std::isfinite(len)) {
            n = {n.x / len, n.y / len, n.z / len};
        } else {
            n = {0.0, 0.0, 1.0};
        }
    }
    return acc;
}

MeshBuffers collision_mesh(const Dem& dem, int factor, double uv_scale) {
    if (factor < 1) fail(ErrorKind::invalid_argument, "collision mesh factor must be >= 1");
    if (dem.has_holes()) fail(ErrorKind::hole, "collision_mesh requires a hole-free DEM");
    if (factor > dem.width() - 1 || factor > dem.height() - 1) {
        fail(ErrorKind::invalid_argument, "collision mesh factor " + std::to_string(factor) +
                                              " exceeds the grid; it must leave at least a 2x2 grid");
    }
    const auto cols = subsample_axis(dem.width(), factor);
    const auto rows = subsample_axis(dem.height(), factor);
    return triangulate(grid_mesh(cols, rows, dem, uv_scale));
}

void export_mesh(const MeshBuffers& mesh, const std::filesystem::path& path, MeshFormat format) {
    validate_mesh(mesh);
    std::string out;

    // Per-vertex st: the first face-vertex entry referencing each point wins.
    std::vector<Vec2> vertex_st(mesh.points.size());
    std::vector<std::uint8_t> seen(mesh.points.size(), 0);
    bool per_vertex_st = true;
    for (std::size_t k = 0; k < mesh.face_vertex_indices.size(); ++k) {
        const auto v = static_cast<std::size_t>(mesh.face_vertex_indices[k]);
        if (!seen[v]) {
            seen[v] = 1;
            vertex_st[v] = mesh.st[k];
        } else if (!(vertex_st[v] == mesh.st[k])) {
            per_vertex_st = false;
        }
    }

    if (format == MeshFormat::obj) {
        out.reserve(mesh.points.size() * 64 + mesh.face_vertex_indices.size() * 24);
        out += "# lunaforge mesh\n";
        for (const Vec3& p : mesh.points) {
            out += "v " + format_double(p.x) + " " + format_double(p.y) + " " + format_double(p.z) + "\n";
        }
        // Texture coordinates share vertex numbering when they are consistent
        // per vertex (always true for grid meshes); otherwise one vt per corner.
        if (per_vertex_st) {
            for (const Vec2& t : vertex_st) out += "vt " + format_double(t.u) + " " + format_double(t.v) + "\n";
        } else {
            for (const Vec2& t : mesh.st) out += "vt " + format_double(t.u) + " " + format_double(t.v) + "\n";
        }
        std::size_t offset = 0;
        for (std::int32_t count : mesh.face_vertex_counts) {
            out += "f";
            for (std::int32_t k = 0; k < count; ++k) {
                const std::size_t entry = offset + static_cast<std::size_t>(k);
                const long long v = mesh.face_vertex_indices[entry] + 1LL;
                const long long t = per_vertex_st ? v : static_cast<long long>(entry) + 1;
                out += " " + std::to_string(v) + "/" + std::to_string(t);
            }
            out += "\n";
            offset += static_cast<std::size_t>(count);
        }
        write_file(path, out);
        return;
    }

    for (std::int32_t c : mesh.face_vertex_counts) {
        if (c != 3) fail(ErrorKind::invalid_argument, "PLY export expects a triangulated mesh");
    }
    const auto normals = compute_normals(mesh);
    out += "ply\nformat binary_little_endian 1.0\ncomment lunaforge mesh\n";
    out += "element vertex " + std::to_string(mesh.points.size()) + "\n";
    for (const char* name : {"x", "y", "z", "nx", "ny", "nz", "u", "v"}) {
        out += std::string("property float ") + name + "\n";
    }
    out += "element face " + std::to_string(mesh.face_count()) + "\n";
    out += "property list uchar int vertex_indices\nend_header\n";
    out.reserve(out.size() + mesh.points.size() * 32 + mesh.face_count() * 13);
    for (std::size_t i = 0; i < mesh.points.size(); ++i) {
        const float values[8] = {static_cast<float>(mesh.points[i].x), static_cast<float>(mesh.points[i].y),
                                 static_cast<float>(mesh.points[i].z), static_cast<float>(normals[i].x),
                                 static_cast<float>(normals[i].y),     static_cast<float>(normals[i].z),
                                 static_cast<float>(vertex_st[i].u),   static_cast<float>(vertex_st[i].v)};
        append_le(out, values, sizeof(values));
    }
    for (std::size_t f = 0; f < mesh.face_count(); ++f) {
        const std::uint8_t n = 3;
        append_le(out, &n, 1);
        append_le(out, &mesh.face_vertex_indices[3 * f], 3 * sizeof(std::int32_t));
    }
    write_file(path, out);
}

}  // namespace lunaforge
