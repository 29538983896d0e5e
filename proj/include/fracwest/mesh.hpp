#ifndef FRACWEST_MESH_HPP
#define FRACWEST_MESH_HPP

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace fracwest {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

/// Uniform P1 mesh: an interval split into M cells, or the square
/// [xa,xb]^2 split into M x M cells, each cut along the SW-NE diagonal.
struct Mesh {
    int dim = 1;
    double xa = 0.0, xb = 1.0;
    int cells_per_side = 1;  // M
    double h = 1.0;
    std::vector<Point> nodes;
    std::vector<std::array<int, 3>> triangles;  // 2D only
    std::vector<char> on_boundary;

    int node_count() const { return static_cast<int>(nodes.size()); }
};

inline Mesh make_interval_mesh(double xa, double xb, int m) {
    if (!(xb > xa)) throw std::domain_error("make_interval_mesh: xb > xa required");
    if (m < 2) throw std::domain_error("make_interval_mesh: at least 2 cells required");
    Mesh mesh;
    mesh.dim = 1;
    mesh.xa = xa;
    mesh.xb = xb;
    mesh.cells_per_side = m;
    mesh.h = (xb - xa) / m;
    mesh.nodes.resize(m + 1);
    mesh.on_boundary.assign(m + 1, 0);
    for (int i = 0; i <= m; ++i) mesh.nodes[i] = {xa + i * mesh.h, 0.0};
    mesh.on_boundary.front() = 1;
    mesh.on_boundary.back() = 1;
    return mesh;
}

inline Mesh make_square_mesh(double xa, double xb, int m) {
    if (!(xb > xa)) throw std::domain_error("make_square_mesh: xb > xa required");
    if (m < 2) throw std::domain_error("make_square_mesh: at least 2 cells per side required");
    Mesh mesh;
    mesh.dim = 2;
    mesh.xa = xa;
    mesh.xb = xb;
    mesh.cells_per_side = m;
    mesh.h = (xb - xa) / m;
    const int nn = m + 1;
    mesh.nodes.resize(static_cast<std::size_t>(nn) * nn);
    mesh.on_boundary.assign(static_cast<std::size_t>(nn) * nn, 0);
    for (int j = 0; j <= m; ++j)
        for (int i = 0; i <= m; ++i) {
            const int id = j * nn + i;
            mesh.nodes[id] = {xa + i * mesh.h, xa + j * mesh.h};
            if (i == 0 || i == m || j == 0 || j == m) mesh.on_boundary[id] = 1;
        }
    mesh.triangles.reserve(static_cast<std::size_t>(2) * m * m);
    for (int j = 0; j < m; ++j)
        for (int i = 0; i < m; ++i) {
            const int n00 = j * nn + i;
            const int n10 = n00 + 1;
            const int n01 = n00 + nn;
            const int n11 = n01 + 1;
            mesh.triangles.push_back({n00, n10, n11});  // SW-NE diagonal
            mesh.triangles.push_back({n00, n11, n01});
        }
    return mesh;
}

} // namespace fracwest

#endif
