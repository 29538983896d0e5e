#ifndef FRACWEST_FEM_HPP
#define FRACWEST_FEM_HPP

#include <array>
#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "fracwest/linalg.hpp"
#include "fracwest/mesh.hpp"

namespace fracwest {

/// P1 space with homogeneous Dirichlet conditions.  Coefficient vectors
/// carry the interior (free) nodes only; boundary values are implicit zeros.
struct FeSpace {
    Mesh mesh;
    int n_dof = 0;
    std::vector<int> node_of_dof;
    std::vector<int> dof_of_node;  // -1 on the boundary
    SparseSym mass;                // interior x interior
    SparseSym stiffness;           // interior x interior
};

namespace detail {

// 3-point Gauss on [0,1]: exact through degree 5, covering the quartic
// (Du)^2 phi integrand.
struct Quad1d {
    static constexpr std::array<double, 3> pts{0.1127016653792583, 0.5, 0.8872983346207417};
    static constexpr std::array<double, 3> wts{5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
};

// 6-point degree-4 rule on the reference triangle (barycentric points,
// weights summing to 1; integral = area * sum w f).
struct Quad2d {
    static constexpr int n = 6;
    static constexpr std::array<std::array<double, 3>, 6> bary{{
        {0.108103018168070, 0.445948490915965, 0.445948490915965},
        {0.445948490915965, 0.108103018168070, 0.445948490915965},
        {0.445948490915965, 0.445948490915965, 0.108103018168070},
        {0.816847572980459, 0.091576213509771, 0.091576213509771},
        {0.091576213509771, 0.816847572980459, 0.091576213509771},
        {0.091576213509771, 0.091576213509771, 0.816847572980459},
    }};
    static constexpr std::array<double, 6> wts{
        0.223381589678011, 0.223381589678011, 0.223381589678011,
        0.109951743655322, 0.109951743655322, 0.109951743655322};
};

inline double triangle_area(const Mesh& mesh, const std::array<int, 3>& t) {
    const Point& a = mesh.nodes[t[0]];
    const Point& b = mesh.nodes[t[1]];
    const Point& c = mesh.nodes[t[2]];
    return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

// Visit each element's quadrature points with local basis values:
// f(element nodes, quad weight * measure, point, basis values at point).
template <typename F>
void for_each_quad_point(const Mesh& mesh, F&& f) {
    if (mesh.dim == 1) {
        for (int e = 0; e < mesh.cells_per_side; ++e) {
            const std::array<int, 3> nodes{e, e + 1, -1};
            const double x0 = mesh.nodes[e].x;
            for (int q = 0; q < 3; ++q) {
                const double s = Quad1d::pts[q];
                const std::array<double, 3> phi{1.0 - s, s, 0.0};
                f(nodes, 2, Quad1d::wts[q] * mesh.h, Point{x0 + s * mesh.h, 0.0}, phi);
            }
        }
    } else {
        for (const auto& t : mesh.triangles) {
            const double area = triangle_area(mesh, t);
            for (int q = 0; q < Quad2d::n; ++q) {
                const auto& l = Quad2d::bary[q];
                const Point p{l[0] * mesh.nodes[t[0]].x + l[1] * mesh.nodes[t[1]].x + l[2] * mesh.nodes[t[2]].x,
                              l[0] * mesh.nodes[t[0]].y + l[1] * mesh.nodes[t[1]].y + l[2] * mesh.nodes[t[2]].y};
                f(t, 3, Quad2d::wts[q] * area, p, l);
            }
        }
    }
}

} // namespace detail

/// Assemble the unconstrained (all-nodes) mass matrix; used by diagnostics
/// and the partition-of-unity checks.
inline SparseSym assemble_full_mass(const Mesh& mesh) {
    std::vector<std::tuple<int, int, double>> trip;
    detail::for_each_quad_point(mesh, [&](const std::array<int, 3>& nodes, int nloc, double w,
                                          const Point&, const std::array<double, 3>& phi) {
        for (int a = 0; a < nloc; ++a)
            for (int b = 0; b < nloc; ++b)
                trip.emplace_back(nodes[a], nodes[b], w * phi[a] * phi[b]);
    });
    return sparse_from_triplets(mesh.node_count(), std::move(trip));
}

/// Unconstrained stiffness over all nodes (diagnostics: vanishes on
/// constants before the Dirichlet restriction).
inline SparseSym assemble_full_stiffness(const Mesh& mesh) {
    std::vector<std::tuple<int, int, double>> trip;
    if (mesh.dim == 1) {
        for (int e = 0; e < mesh.cells_per_side; ++e)
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b)
                    trip.emplace_back(e + a, e + b, (a == b ? 1.0 : -1.0) / mesh.h);
    } else {
        for (const auto& t : mesh.triangles) {
            const double area = detail::triangle_area(mesh, t);
            const Point& p0 = mesh.nodes[t[0]];
            const Point& p1 = mesh.nodes[t[1]];
            const Point& p2 = mesh.nodes[t[2]];
            const double gx[3] = {(p1.y - p2.y) / (2 * area), (p2.y - p0.y) / (2 * area), (p0.y - p1.y) / (2 * area)};
            const double gy[3] = {(p2.x - p1.x) / (2 * area), (p0.x - p2.x) / (2 * area), (p1.x - p0.x) / (2 * area)};
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b)
                    trip.emplace_back(t[a], t[b], area * (gx[a] * gx[b] + gy[a] * gy[b]));
        }
    }
    return sparse_from_triplets(mesh.node_count(), std::move(trip));
}

inline FeSpace build_space(const Mesh& mesh) {
    FeSpace sp;
    sp.mesh = mesh;
    sp.dof_of_node.assign(mesh.node_count(), -1);
    for (int i = 0; i < mesh.node_count(); ++i)
        if (!mesh.on_boundary[i]) {
            sp.dof_of_node[i] = static_cast<int>(sp.node_of_dof.size());
            sp.node_of_dof.push_back(i);
        }
    sp.n_dof = static_cast<int>(sp.node_of_dof.size());
    if (sp.n_dof == 0) throw std::domain_error("build_space: no interior nodes");

    std::vector<std::tuple<int, int, double>> mtrip, ktrip;
    if (mesh.dim == 1) {
        const double h = mesh.h;
        if (!(h > 0.0)) throw std::domain_error("build_space: degenerate cell");
        for (int e = 0; e < mesh.cells_per_side; ++e) {
            const std::array<int, 2> n{e, e + 1};
            const double me[2][2] = {{h / 3.0, h / 6.0}, {h / 6.0, h / 3.0}};
            const double ke[2][2] = {{1.0 / h, -1.0 / h}, {-1.0 / h, 1.0 / h}};
            for (int a = 0; a < 2; ++a) {
                const int ia = sp.dof_of_node[n[a]];
                if (ia < 0) continue;
                for (int b = 0; b < 2; ++b) {
                    const int ib = sp.dof_of_node[n[b]];
                    if (ib < 0) continue;
                    mtrip.emplace_back(ia, ib, me[a][b]);
                    ktrip.emplace_back(ia, ib, ke[a][b]);
                }
            }
        }
    } else {
        for (const auto& t : mesh.triangles) {
            const double area = detail::triangle_area(mesh, t);
            if (!(area > 0.0)) throw std::domain_error("build_space: degenerate cell");
            // constant gradients of the barycentric basis
            const Point& p0 = mesh.nodes[t[0]];
            const Point& p1 = mesh.nodes[t[1]];
            const Point& p2 = mesh.nodes[t[2]];
            const double gx[3] = {(p1.y - p2.y) / (2 * area), (p2.y - p0.y) / (2 * area), (p0.y - p1.y) / (2 * area)};
            const double gy[3] = {(p2.x - p1.x) / (2 * area), (p0.x - p2.x) / (2 * area), (p1.x - p0.x) / (2 * area)};
            for (int a = 0; a < 3; ++a) {
                const int ia = sp.dof_of_node[t[a]];
                if (ia < 0) continue;
                for (int b = 0; b < 3; ++b) {
                    const int ib = sp.dof_of_node[t[b]];
                    if (ib < 0) continue;
                    mtrip.emplace_back(ia, ib, area / 12.0 * (a == b ? 2.0 : 1.0));
                    ktrip.emplace_back(ia, ib, area * (gx[a] * gx[b] + gy[a] * gy[b]));
                }
            }
        }
    }
    sp.mass = sparse_from_triplets(sp.n_dof, std::move(mtrip));
    sp.stiffness = sparse_from_triplets(sp.n_dof, std::move(ktrip));
    return sp;
}

/// Load vector b_i = int g phi_i over interior basis functions.
inline std::vector<double> load_vector(const FeSpace& sp, const std::function<double(Point)>& g) {
    std::vector<double> b(sp.n_dof, 0.0);
    detail::for_each_quad_point(sp.mesh, [&](const std::array<int, 3>& nodes, int nloc, double w,
                                             const Point& p, const std::array<double, 3>& phi) {
        const double gv = g(p);
        for (int a = 0; a < nloc; ++a) {
            const int ia = sp.dof_of_node[nodes[a]];
            if (ia >= 0) b[ia] += w * gv * phi[a];
        }
    });
    return b;
}

/// L2-orthogonal projection onto the interior P1 space: solves M c = load(g).
inline std::vector<double> l2_project(const FeSpace& sp, const std::function<double(Point)>& g) {
    return solve_spd(sp.mass, load_vector(sp, g), 1e-12);
}

/// Nodal interpolant (interior coefficients).
inline std::vector<double> interpolate(const FeSpace& sp, const std::function<double(Point)>& g) {
    std::vector<double> c(sp.n_dof);
    for (int i = 0; i < sp.n_dof; ++i) c[i] = g(sp.mesh.nodes[sp.node_of_dof[i]]);
    return c;
}

namespace detail {

// Matrix with entries int (c0 + c_h) phi_j phi_i where c_h is the P1
// function spanned by interior coefficients cvec (zero on the boundary).
// Element quadrature is exact for the cubic integrand.
inline SparseSym weighted_mass_affine(const FeSpace& sp, double c0, std::span<const double> cvec) {
    if (!cvec.empty() && static_cast<int>(cvec.size()) != sp.n_dof)
        throw std::invalid_argument("weighted_mass_affine: coefficient size mismatch");
    std::vector<std::tuple<int, int, double>> trip;
    for_each_quad_point(sp.mesh, [&](const std::array<int, 3>& nodes, int nloc, double w,
                                     const Point&, const std::array<double, 3>& phi) {
        double c = c0;
        if (!cvec.empty())
            for (int a = 0; a < nloc; ++a) {
                const int ia = sp.dof_of_node[nodes[a]];
                if (ia >= 0) c += cvec[ia] * phi[a];
            }
        for (int a = 0; a < nloc; ++a) {
            const int ia = sp.dof_of_node[nodes[a]];
            if (ia < 0) continue;
            for (int b = 0; b < nloc; ++b) {
                const int ib = sp.dof_of_node[nodes[b]];
                if (ib >= 0) trip.emplace_back(ia, ib, w * c * phi[a] * phi[b]);
            }
        }
    });
    return sparse_from_triplets(sp.n_dof, std::move(trip));
}

} // namespace detail

/// Matrix of the quasilinear term: entries int (1 - 2k w_h) phi_j phi_i.
inline SparseSym assemble_weighted_mass(const FeSpace& sp, std::span<const double> w, double k) {
    std::vector<double> scaled(w.begin(), w.end());
    for (auto& v : scaled) v *= -2.0 * k;
    return detail::weighted_mass_affine(sp, 1.0, scaled);
}

/// Linear-in-z mass-type matrix B(z) with entries int z_h phi_j phi_i.
inline SparseSym assemble_linear_mass(const FeSpace& sp, std::span<const double> z) {
    return detail::weighted_mass_affine(sp, 0.0, z);
}

/// Load of the squared-rate term: entries int (d_h)^2 phi_i.
inline std::vector<double> assemble_quadratic_load(const FeSpace& sp, std::span<const double> d) {
    if (static_cast<int>(d.size()) != sp.n_dof)
        throw std::invalid_argument("assemble_quadratic_load: coefficient size mismatch");
    std::vector<double> b(sp.n_dof, 0.0);
    detail::for_each_quad_point(sp.mesh, [&](const std::array<int, 3>& nodes, int nloc, double w,
                                             const Point&, const std::array<double, 3>& phi) {
        double dh = 0.0;
        for (int a = 0; a < nloc; ++a) {
            const int ia = sp.dof_of_node[nodes[a]];
            if (ia >= 0) dh += d[ia] * phi[a];
        }
        for (int a = 0; a < nloc; ++a) {
            const int ia = sp.dof_of_node[nodes[a]];
            if (ia >= 0) b[ia] += w * dh * dh * phi[a];
        }
    });
    return b;
}

/// ||v||_{L2} of the P1 function with interior coefficients v.
inline double mass_norm(const FeSpace& sp, std::span<const double> v) {
    return std::sqrt(std::max(0.0, quadratic_form(sp.mass, v, v)));
}

/// |v|_{H1} seminorm.
inline double stiffness_norm(const FeSpace& sp, std::span<const double> v) {
    return std::sqrt(std::max(0.0, quadratic_form(sp.stiffness, v, v)));
}

} // namespace fracwest

#endif
