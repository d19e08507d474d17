#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace tdg
{

using Point = std::array<double, 2>;

enum class Axis
{
    x = 0,
    y = 1,
};

struct Face
{
    /// elem[1] == -1 marks a boundary face.
    int elem[2] = {-1, -1};
    /// Vertex ids; 1D faces use v[0] only.
    int v[2] = {-1, -1};
    /// Unit normal oriented from elem[0] to elem[1] (outward on the boundary).
    Point normal = {0.0, 0.0};
    double length = 1.0;

    bool boundary() const { return elem[1] < 0; }
};

/// Node of the refinement forest. Bisection of (v0,v1,v2) splits the edge (v0,v1) at m and
/// produces (v2,v0,m) and (v1,v2,m); in 1D (v0,v1) splits into (v0,m) and (m,v1).
struct GenealogyNode
{
    std::array<int, 3> v = {-1, -1, -1};
    int parent = -1;
    int child[2] = {-1, -1};
    int level = 0;

    bool leaf() const { return child[0] < 0; }
};

struct RaySegment
{
    int elem;
    double entry;
    double exit;
};

using RaySegmentation = std::vector<RaySegment>;

/// Conforming interval or triangle mesh with refinement genealogy. Immutable once built;
/// refine/coarsen return new meshes sharing nothing mutable with the input.
class Mesh
{
public:
    int dim() const { return dim_; }
    int num_elements() const { return int(elem_node_.size()); }
    int num_vertices() const { return int(vertices_.size()); }
    const std::vector<Point> &vertices() const { return vertices_; }
    const Point &vertex(int i) const { return vertices_[i]; }

    /// Vertex ids of element e (2 in 1D, 3 in 2D; unused entries are -1).
    const std::array<int, 3> &element(int e) const { return nodes_[elem_node_[e]].v; }
    int node_of(int e) const { return elem_node_[e]; }
    const GenealogyNode &node(int id) const { return nodes_[id]; }
    int num_nodes() const { return int(nodes_.size()); }

    const std::vector<Face> &faces() const { return faces_; }
    const std::array<int, 3> &element_faces(int e) const { return elem_faces_[e]; }

    double diameter(int e) const { return diam_[e]; }
    double area(int e) const { return area_[e]; }
    double inradius_diameter(int e) const;
    Point centroid(int e) const;
    double h_max() const;
    double h_min() const;
    double total_area() const;
    double max_shape_ratio() const;

    /// Domain bounding box [xmin, xmax] x [ymin, ymax].
    const std::array<double, 4> &bbox() const { return bbox_; }

    /// Elements crossed by the line {coordinate orthogonal to `axis` = ordinate}, sorted
    /// along `axis`. Throws degenerate_ray when the line passes through a vertex.
    RaySegmentation ray_segments(Axis axis, double ordinate) const;

    /// Sorted distinct vertex coordinates along an axis (used by quadrature strips).
    std::vector<double> vertex_coordinates(Axis axis) const;

    bool contains(int e, const Point &p, double tol = 1e-12) const;
    /// Reference coordinates of p in element e (affine inverse).
    Point to_reference(int e, const Point &p) const;
    Point from_reference(int e, const Point &ref) const;

    /// Checks conformity, positive areas and normal orientation; throws internal_error.
    void check_consistency() const;

    void write(std::ostream &os) const;
    static Mesh read(std::istream &is);

    friend Mesh build_interval_mesh(double a, double b, int K);
    friend Mesh build_structured_tri_mesh(double a, double b, double c, double d, int nx, int ny);
    friend class MeshEditor;

private:
    int dim_ = 0;
    std::vector<Point> vertices_;
    std::vector<GenealogyNode> nodes_;
    std::map<std::pair<int, int>, int> midpoints_;
    std::vector<int> elem_node_;

    std::vector<Face> faces_;
    std::vector<std::array<int, 3>> elem_faces_;
    std::vector<double> diam_;
    std::vector<double> area_;
    std::array<double, 4> bbox_{};
    std::vector<std::array<double, 4>> elem_bbox_;

    void finalize();
};

Mesh build_interval_mesh(double a, double b, int K);
Mesh build_structured_tri_mesh(double a, double b, double c, double d, int nx, int ny);

/// Marked elements receive an interior vertex (bisection of the element, of both children
/// and of the two grandchildren at the new interior edge); conformity is restored by
/// newest-vertex closure. In 1D marked intervals are halved.
Mesh refine(const Mesh &mesh, const std::set<int> &marked);

/// Two bisection levels on every element: element count times four in 2D, two in 1D.
Mesh refine_uniform(const Mesh &mesh);

/// Undo bisections whose children are all marked. Merged parents count as marked, so
/// repeated passes continue up the genealogy, at most `max_passes` times.
Mesh coarsen(const Mesh &mesh, const std::set<int> &marked, int max_passes = 64);

/// Bucket grid for point location.
class PointLocator
{
public:
    explicit PointLocator(const Mesh &mesh);
    /// Element containing p, or -1.
    int locate(const Point &p) const;

private:
    const Mesh *mesh_;
    int nx_ = 1, ny_ = 1;
    std::array<double, 4> box_{};
    std::vector<std::vector<int>> buckets_;
};

} // namespace tdg
