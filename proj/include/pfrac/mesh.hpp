#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace pfrac {

struct MeshError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

/// Immutable linear-triangle mesh with named boundary node sets.
/// Triangles are counter-clockwise; `h` is the characteristic element size.
struct Mesh {
    std::vector<Vec2> nodes;
    std::vector<std::array<int, 3>> triangles;
    std::map<std::string, std::vector<int>> node_sets;
    double h = 0.0;

    int num_nodes() const { return static_cast<int>(nodes.size()); }
    int num_triangles() const { return static_cast<int>(triangles.size()); }

    const std::vector<int>& set(const std::string& name) const {
        auto it = node_sets.find(name);
        if (it == node_sets.end())
            throw MeshError("mesh has no node set '" + name + "'");
        return it->second;
    }
    bool has_set(const std::string& name) const { return node_sets.count(name) != 0; }
};

inline double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
    return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

inline double triangle_area(const Mesh& mesh, int t) {
    const auto& tri = mesh.triangles[t];
    return signed_area(mesh.nodes[tri[0]], mesh.nodes[tri[1]], mesh.nodes[tri[2]]);
}

inline double mesh_area(const Mesh& mesh) {
    double a = 0.0;
    for (int t = 0; t < mesh.num_triangles(); ++t) a += triangle_area(mesh, t);
    return a;
}

/// longest edge / (2*sqrt(3)*inradius); equals 1 for an equilateral triangle.
inline double aspect_ratio(const Vec2& a, const Vec2& b, const Vec2& c) {
    auto dist = [](const Vec2& p, const Vec2& q) {
        return std::hypot(p.x - q.x, p.y - q.y);
    };
    const double la = dist(b, c), lb = dist(c, a), lc = dist(a, b);
    const double area = std::abs(signed_area(a, b, c));
    const double s = 0.5 * (la + lb + lc);
    if (area <= 0.0) return std::numeric_limits<double>::infinity();
    const double inradius = area / s;
    return std::max({la, lb, lc}) / (2.0 * std::sqrt(3.0) * inradius);
}

inline double max_aspect_ratio(const Mesh& mesh) {
    double worst = 0.0;
    for (const auto& tri : mesh.triangles)
        worst = std::max(worst, aspect_ratio(mesh.nodes[tri[0]], mesh.nodes[tri[1]],
                                             mesh.nodes[tri[2]]));
    return worst;
}

/// Checks the structural invariants: positive triangle areas and in-range
/// node indices (triangles and node sets). Throws MeshError on violation.
inline void validate(const Mesh& mesh) {
    const int n = mesh.num_nodes();
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        for (int k = 0; k < 3; ++k) {
            const int i = mesh.triangles[t][k];
            if (i < 0 || i >= n) throw MeshError("triangle node index out of range");
        }
        if (triangle_area(mesh, t) <= 0.0)
            throw MeshError("triangle " + std::to_string(t) + " has non-positive area");
    }
    for (const auto& [name, ids] : mesh.node_sets)
        for (int i : ids)
            if (i < 0 || i >= n) throw MeshError("node set '" + name + "' index out of range");
}

namespace detail {

// Structured grid over (-L/2,L/2)^2, n cells per side, every cell split along
// the same diagonal. The uniform diagonal keeps the triangulation free of a
// mirror symmetry, which lets symmetric problems break ties deterministically.
struct GridBuilder {
    int n;
    double L;
    std::vector<int> node_id;  // (n+1)*(n+1), -1 for removed
    std::vector<Vec2> nodes;
    std::vector<std::array<int, 3>> triangles;

    GridBuilder(double side, double h) : L(side) {
        n = static_cast<int>(std::llround(side / h));
        if (n < 1) n = 1;
        node_id.assign((n + 1) * (n + 1), -1);
    }
    double coord(int i) const { return -0.5 * L + (static_cast<double>(i) / n) * L; }
    int grid_index(int i, int j) const { return j * (n + 1) + i; }
};

inline void laplacian_smooth(Mesh& mesh, const std::vector<char>& movable, int passes) {
    std::vector<std::set<int>> adjacency(mesh.num_nodes());
    for (const auto& tri : mesh.triangles)
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
                if (a != b) adjacency[tri[a]].insert(tri[b]);

    std::vector<std::vector<int>> incident(mesh.num_nodes());
    for (int t = 0; t < mesh.num_triangles(); ++t)
        for (int k = 0; k < 3; ++k) incident[mesh.triangles[t][k]].push_back(t);

    for (int pass = 0; pass < passes; ++pass) {
        std::vector<Vec2> target = mesh.nodes;
        for (int i = 0; i < mesh.num_nodes(); ++i) {
            if (!movable[i] || adjacency[i].empty()) continue;
            Vec2 mean{0.0, 0.0};
            for (int j : adjacency[i]) {
                mean.x += mesh.nodes[j].x;
                mean.y += mesh.nodes[j].y;
            }
            mean.x /= static_cast<double>(adjacency[i].size());
            mean.y /= static_cast<double>(adjacency[i].size());
            target[i] = mean;
        }
        // Guarded Jacobi update: keep a move only if the incident triangles
        // stay positively oriented.
        std::vector<Vec2> next = mesh.nodes;
        for (int i = 0; i < mesh.num_nodes(); ++i) {
            if (!movable[i]) continue;
            const Vec2 old = mesh.nodes[i];
            Vec2 cand = target[i];
            bool ok = true;
            for (int t : incident[i]) {
                auto tri = mesh.triangles[t];
                Vec2 p[3];
                for (int k = 0; k < 3; ++k)
                    p[k] = (tri[k] == i) ? cand : mesh.nodes[tri[k]];
                if (signed_area(p[0], p[1], p[2]) <= 0.0) { ok = false; break; }
            }
            next[i] = ok ? cand : old;
        }
        mesh.nodes = next;
    }
}

inline Mesh square_mesh(double L, double h, std::optional<double> hole_radius,
                        const std::string& hole_set_name) {
    if (!(L > 0.0)) throw MeshError("square side must be positive");
    if (!(h > 0.0) || h >= L) throw MeshError("element size must satisfy 0 < h < L");
    double R = 0.0;
    const bool holed = hole_radius.has_value();
    if (holed) {
        R = *hole_radius;
        if (!(R > 0.0) || R >= 0.5 * L)
            throw MeshError("hole radius must satisfy 0 < R < L/2");
    }

    GridBuilder grid(L, h);
    const double tol = 1e-9 * L;
    const int n = grid.n;

    // Nodes: drop grid points strictly inside the hole.
    for (int j = 0; j <= n; ++j) {
        for (int i = 0; i <= n; ++i) {
            const Vec2 p{grid.coord(i), grid.coord(j)};
            if (holed && std::hypot(p.x, p.y) < R - tol) continue;
            grid.node_id[grid.grid_index(i, j)] = static_cast<int>(grid.nodes.size());
            grid.nodes.push_back(p);
        }
    }

    // Cells split along the same diagonal; keep triangles with all nodes alive,
    // and collect survivors adjacent to removed nodes (the ragged hole rim).
    std::vector<char> rim(grid.nodes.size(), 0);
    auto emit = [&](int a, int b, int c) {
        if (a >= 0 && b >= 0 && c >= 0) {
            grid.triangles.push_back({a, b, c});
        } else {
            for (int id : {a, b, c})
                if (id >= 0) rim[id] = 1;
        }
    };
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const int p00 = grid.node_id[grid.grid_index(i, j)];
            const int p10 = grid.node_id[grid.grid_index(i + 1, j)];
            const int p11 = grid.node_id[grid.grid_index(i + 1, j + 1)];
            const int p01 = grid.node_id[grid.grid_index(i, j + 1)];
            emit(p00, p10, p11);
            emit(p00, p11, p01);
        }
    }

    Mesh mesh;
    mesh.nodes = std::move(grid.nodes);
    mesh.triangles = std::move(grid.triangles);
    mesh.h = h;

    if (holed) {
        // Project the rim radially onto the circle.
        for (int i = 0; i < mesh.num_nodes(); ++i) {
            if (!rim[i]) continue;
            const double r = std::hypot(mesh.nodes[i].x, mesh.nodes[i].y);
            if (r <= 0.0) throw MeshError("hole rim node at the origin");
            mesh.nodes[i].x *= R / r;
            mesh.nodes[i].y *= R / r;
        }
        // Drop chord slivers whose three nodes all landed on the circle.
        auto on_circle = [&](int i) {
            return std::abs(std::hypot(mesh.nodes[i].x, mesh.nodes[i].y) - R) <= tol;
        };
        std::vector<std::array<int, 3>> kept;
        kept.reserve(mesh.triangles.size());
        for (const auto& tri : mesh.triangles) {
            if (on_circle(tri[0]) && on_circle(tri[1]) && on_circle(tri[2])) continue;
            kept.push_back(tri);
        }
        mesh.triangles = std::move(kept);

        // Relax the layer just outside the rim; circle and outer boundary stay put.
        std::vector<char> movable(mesh.num_nodes(), 0);
        for (int i = 0; i < mesh.num_nodes(); ++i) {
            const auto& p = mesh.nodes[i];
            const double r = std::hypot(p.x, p.y);
            const bool outer = std::abs(std::abs(p.x) - 0.5 * L) <= tol ||
                               std::abs(std::abs(p.y) - 0.5 * L) <= tol;
            movable[i] = (!outer && r > R + tol && r < R + 2.5 * h) ? 1 : 0;
        }
        laplacian_smooth(mesh, movable, 3);
    }

    // Boundary sets; corners go to the horizontal-edge sets.
    std::vector<int> top, bottom, left, right, hole;
    for (int i = 0; i < mesh.num_nodes(); ++i) {
        const auto& p = mesh.nodes[i];
        if (std::abs(p.y - 0.5 * L) <= tol) top.push_back(i);
        else if (std::abs(p.y + 0.5 * L) <= tol) bottom.push_back(i);
        else if (std::abs(p.x + 0.5 * L) <= tol) left.push_back(i);
        else if (std::abs(p.x - 0.5 * L) <= tol) right.push_back(i);
        else if (holed && std::abs(std::hypot(p.x, p.y) - R) <= tol) hole.push_back(i);
    }
    mesh.node_sets["top"] = std::move(top);
    mesh.node_sets["bottom"] = std::move(bottom);
    mesh.node_sets["left"] = std::move(left);
    mesh.node_sets["right"] = std::move(right);
    if (holed) mesh.node_sets[hole_set_name] = std::move(hole);

    validate(mesh);
    return mesh;
}

}  // namespace detail

/// Structured triangulation of the square (-L/2,L/2)^2, optionally minus the
/// open disk of radius `hole_radius` at the origin (node set "hole").
inline Mesh generate_square(double L, double h,
                            std::optional<double> hole_radius = std::nullopt) {
    return detail::square_mesh(L, h, hole_radius, "hole");
}

/// Square matrix with a rigid circular inclusion of radius R at the origin;
/// the interface nodes form the set "fiber".
inline Mesh generate_fiber_composite(double L, double R, double h) {
    return detail::square_mesh(L, h, R, "fiber");
}

/// Splits the "top" node set at x=0 into "top_left_half" / "top_right_half".
/// A node exactly on the midline is duplicated so a displacement jump across
/// x=0 is representable; the duplicate attaches to the x>0 triangles.
inline Mesh split_top_edge(Mesh mesh) {
    if (!mesh.has_set("top")) throw MeshError("split_top_edge: mesh has no 'top' set");

    double extent = 0.0;
    for (const auto& p : mesh.nodes)
        extent = std::max({extent, std::abs(p.x), std::abs(p.y)});
    const double tol = 1e-9 * std::max(extent, 1.0);

    std::vector<int> top = mesh.set("top");
    std::vector<int> left_half, right_half;
    int mid = -1;
    for (int i : top) {
        const double x = mesh.nodes[i].x;
        if (x < -tol) left_half.push_back(i);
        else if (x > tol) right_half.push_back(i);
        else mid = i;
    }
    if (mid >= 0) {
        const int dup = mesh.num_nodes();
        mesh.nodes.push_back(mesh.nodes[mid]);
        for (auto& tri : mesh.triangles) {
            const double cx =
                (mesh.nodes[tri[0]].x + mesh.nodes[tri[1]].x + mesh.nodes[tri[2]].x) / 3.0;
            if (cx <= 0.0) continue;
            for (int& v : tri)
                if (v == mid) v = dup;
        }
        left_half.push_back(mid);
        right_half.push_back(dup);
        mesh.node_sets["top"].push_back(dup);
    }
    mesh.node_sets["top_left_half"] = std::move(left_half);
    mesh.node_sets["top_right_half"] = std::move(right_half);
    validate(mesh);
    return mesh;
}

/// Plain-text mesh format:
///   nodes N elems M
///   N lines: x y
///   M lines: i j k          (0-based, counter-clockwise)
///   set <name> n i1 ... in  (repeated)
inline void write_mesh_text(const Mesh& mesh, std::ostream& out) {
    out.precision(17);
    out << "nodes " << mesh.num_nodes() << " elems " << mesh.num_triangles() << "\n";
    for (const auto& p : mesh.nodes) out << p.x << " " << p.y << "\n";
    for (const auto& t : mesh.triangles) out << t[0] << " " << t[1] << " " << t[2] << "\n";
    for (const auto& [name, ids] : mesh.node_sets) {
        out << "set " << name << " " << ids.size();
        for (int i : ids) out << " " << i;
        out << "\n";
    }
}

inline Mesh read_mesh_text(std::istream& in) {
    Mesh mesh;
    std::string tok;
    int n = 0, m = 0;
    if (!(in >> tok) || tok != "nodes" || !(in >> n) || !(in >> tok) || tok != "elems" ||
        !(in >> m) || n < 0 || m < 0)
        throw MeshError("mesh text: bad header (expected 'nodes N elems M')");
    mesh.nodes.resize(n);
    for (auto& p : mesh.nodes)
        if (!(in >> p.x >> p.y)) throw MeshError("mesh text: bad node line");
    mesh.triangles.resize(m);
    for (auto& t : mesh.triangles)
        if (!(in >> t[0] >> t[1] >> t[2])) throw MeshError("mesh text: bad element line");
    while (in >> tok) {
        if (tok != "set") throw MeshError("mesh text: expected 'set', got '" + tok + "'");
        std::string name;
        std::size_t count = 0;
        if (!(in >> name >> count)) throw MeshError("mesh text: bad set header");
        std::vector<int> ids(count);
        for (auto& i : ids)
            if (!(in >> i)) throw MeshError("mesh text: bad set index");
        mesh.node_sets[name] = std::move(ids);
    }

    // The format carries no h; use the median shortest element edge.
    std::vector<double> short_edges;
    short_edges.reserve(mesh.triangles.size());
    for (const auto& t : mesh.triangles) {
        auto dist = [&](int a, int b) {
            return std::hypot(mesh.nodes[a].x - mesh.nodes[b].x,
                              mesh.nodes[a].y - mesh.nodes[b].y);
        };
        short_edges.push_back(std::min({dist(t[0], t[1]), dist(t[1], t[2]), dist(t[2], t[0])}));
    }
    if (!short_edges.empty()) {
        std::sort(short_edges.begin(), short_edges.end());
        mesh.h = short_edges[short_edges.size() / 2];
    }
    validate(mesh);
    return mesh;
}

}  // namespace pfrac
