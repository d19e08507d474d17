#include "tdg/mesh.hpp"

#include "tdg/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tdg
{

namespace
{

double dist(const Point &a, const Point &b) { return std::hypot(a[0] - b[0], a[1] - b[1]); }

} // namespace

Mesh build_interval_mesh(double a, double b, int K)
{
    require(K >= 1 && a < b, ErrorKind::invalid_input, "interval mesh needs K >= 1 and a < b");
    Mesh m;
    m.dim_ = 1;
    for (int i = 0; i <= K; ++i)
        m.vertices_.push_back({i == K ? b : a + (b - a) * i / K, 0.0});
    for (int i = 0; i < K; ++i)
    {
        GenealogyNode n;
        n.v = {i, i + 1, -1};
        m.nodes_.push_back(n);
        m.elem_node_.push_back(i);
    }
    m.finalize();
    return m;
}

Mesh build_structured_tri_mesh(double a, double b, double c, double d, int nx, int ny)
{
    require(nx >= 1 && ny >= 1 && a < b && c < d, ErrorKind::invalid_input,
            "degenerate rectangle or resolution");
    Mesh m;
    m.dim_ = 2;
    auto vid = [&](int i, int j) { return j * (nx + 1) + i; };
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i)
            m.vertices_.push_back({i == nx ? b : a + (b - a) * i / nx, j == ny ? d : c + (d - c) * j / ny});
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
        {
            // Diagonal from (i,j) to (i+1,j+1); the hypotenuse is the refinement edge of
            // both halves, which makes the initial labelling compatible.
            GenealogyNode lower, upper;
            lower.v = {vid(i, j), vid(i + 1, j + 1), vid(i + 1, j)};
            upper.v = {vid(i + 1, j + 1), vid(i, j), vid(i, j + 1)};
            m.elem_node_.push_back(int(m.nodes_.size()));
            m.nodes_.push_back(lower);
            m.elem_node_.push_back(int(m.nodes_.size()));
            m.nodes_.push_back(upper);
        }
    m.finalize();
    return m;
}

void Mesh::finalize()
{
    const int K = num_elements();
    if (dim_ == 1)
        std::sort(elem_node_.begin(), elem_node_.end(), [&](int p, int q) {
            return vertices_[nodes_[p].v[0]][0] < vertices_[nodes_[q].v[0]][0];
        });

    diam_.assign(K, 0.0);
    area_.assign(K, 0.0);
    elem_bbox_.assign(K, {0, 0, 0, 0});
    bbox_ = {std::numeric_limits<double>::max(), -std::numeric_limits<double>::max(),
             std::numeric_limits<double>::max(), -std::numeric_limits<double>::max()};
    const int nv = dim_ == 1 ? 2 : 3;
    for (int e = 0; e < K; ++e)
    {
        const auto &v = element(e);
        auto &eb = elem_bbox_[e];
        eb = {std::numeric_limits<double>::max(), -std::numeric_limits<double>::max(),
              std::numeric_limits<double>::max(), -std::numeric_limits<double>::max()};
        for (int i = 0; i < nv; ++i)
        {
            const Point &p = vertices_[v[i]];
            eb[0] = std::min(eb[0], p[0]);
            eb[1] = std::max(eb[1], p[0]);
            eb[2] = std::min(eb[2], p[1]);
            eb[3] = std::max(eb[3], p[1]);
        }
        bbox_[0] = std::min(bbox_[0], eb[0]);
        bbox_[1] = std::max(bbox_[1], eb[1]);
        bbox_[2] = std::min(bbox_[2], eb[2]);
        bbox_[3] = std::max(bbox_[3], eb[3]);
        if (dim_ == 1)
        {
            diam_[e] = area_[e] = vertices_[v[1]][0] - vertices_[v[0]][0];
        }
        else
        {
            const Point &p0 = vertices_[v[0]], &p1 = vertices_[v[1]], &p2 = vertices_[v[2]];
            diam_[e] = std::max({dist(p0, p1), dist(p1, p2), dist(p2, p0)});
            area_[e] = 0.5 * std::abs((p1[0] - p0[0]) * (p2[1] - p0[1]) -
                                      (p2[0] - p0[0]) * (p1[1] - p0[1]));
        }
    }

    faces_.clear();
    elem_faces_.assign(K, {-1, -1, -1});
    if (dim_ == 1)
    {
        // Elements are sorted left to right, so consecutive ones share a vertex.
        for (int e = 0; e <= K; ++e)
        {
            Face f;
            if (e == 0)
            {
                f.elem[0] = 0;
                f.v[0] = element(0)[0];
                f.normal = {-1.0, 0.0};
                elem_faces_[0][0] = int(faces_.size());
            }
            else if (e == K)
            {
                f.elem[0] = K - 1;
                f.v[0] = element(K - 1)[1];
                f.normal = {1.0, 0.0};
                elem_faces_[K - 1][1] = int(faces_.size());
            }
            else
            {
                require(element(e - 1)[1] == element(e)[0], ErrorKind::internal_error,
                        "1D mesh is not contiguous");
                f.elem[0] = e - 1;
                f.elem[1] = e;
                f.v[0] = element(e)[0];
                f.normal = {1.0, 0.0};
                elem_faces_[e - 1][1] = int(faces_.size());
                elem_faces_[e][0] = int(faces_.size());
            }
            faces_.push_back(f);
        }
        return;
    }

    std::map<std::pair<int, int>, int> edge_face;
    for (int e = 0; e < K; ++e)
    {
        const auto &v = element(e);
        for (int l = 0; l < 3; ++l)
        {
            const int a = v[l], b = v[(l + 1) % 3];
            const auto key = std::minmax(a, b);
            auto it = edge_face.find(key);
            if (it == edge_face.end())
            {
                Face f;
                f.elem[0] = e;
                f.v[0] = a;
                f.v[1] = b;
                const Point &pa = vertices_[a], &pb = vertices_[b];
                f.length = dist(pa, pb);
                Point n = {(pb[1] - pa[1]) / f.length, -(pb[0] - pa[0]) / f.length};
                const Point c = centroid(e);
                if ((pa[0] - c[0]) * n[0] + (pa[1] - c[1]) * n[1] < 0.0)
                    n = {-n[0], -n[1]};
                f.normal = n;
                edge_face[key] = int(faces_.size());
                elem_faces_[e][l] = int(faces_.size());
                faces_.push_back(f);
            }
            else
            {
                Face &f = faces_[it->second];
                require(f.elem[1] < 0, ErrorKind::internal_error,
                        "edge shared by more than two elements");
                f.elem[1] = e;
                elem_faces_[e][l] = it->second;
            }
        }
    }
}

double Mesh::inradius_diameter(int e) const
{
    if (dim_ == 1)
        return diam_[e];
    const auto &v = element(e);
    const double per = dist(vertices_[v[0]], vertices_[v[1]]) + dist(vertices_[v[1]], vertices_[v[2]]) +
                       dist(vertices_[v[2]], vertices_[v[0]]);
    return 4.0 * area_[e] / per;
}

Point Mesh::centroid(int e) const
{
    const auto &v = element(e);
    if (dim_ == 1)
        return {0.5 * (vertices_[v[0]][0] + vertices_[v[1]][0]), 0.0};
    Point c = {0.0, 0.0};
    for (int i = 0; i < 3; ++i)
    {
        c[0] += vertices_[v[i]][0] / 3.0;
        c[1] += vertices_[v[i]][1] / 3.0;
    }
    return c;
}

double Mesh::h_max() const { return *std::max_element(diam_.begin(), diam_.end()); }
double Mesh::h_min() const { return *std::min_element(diam_.begin(), diam_.end()); }

double Mesh::total_area() const
{
    double s = 0.0;
    for (double a : area_)
        s += a;
    return s;
}

double Mesh::max_shape_ratio() const
{
    double r = 0.0;
    for (int e = 0; e < num_elements(); ++e)
        r = std::max(r, diam_[e] / inradius_diameter(e));
    return r;
}

std::vector<double> Mesh::vertex_coordinates(Axis axis) const
{
    const int k = int(axis);
    std::vector<double> out;
    std::vector<char> used(vertices_.size(), 0);
    const int nv = dim_ == 1 ? 2 : 3;
    for (int e = 0; e < num_elements(); ++e)
        for (int i = 0; i < nv; ++i)
            used[element(e)[i]] = 1;
    for (std::size_t i = 0; i < vertices_.size(); ++i)
        if (used[i])
            out.push_back(vertices_[i][k]);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

RaySegmentation Mesh::ray_segments(Axis axis, double ordinate) const
{
    RaySegmentation out;
    if (dim_ == 1)
    {
        for (int e = 0; e < num_elements(); ++e)
            out.push_back({e, vertices_[element(e)[0]][0], vertices_[element(e)[1]][0]});
        return out;
    }
    const int along = int(axis);
    const int across = 1 - along;
    const double lo = bbox_[2 * across], hi = bbox_[2 * across + 1];
    require(ordinate > lo && ordinate < hi, ErrorKind::out_of_domain,
            "ray ordinate outside the domain");
    const double tol = 1e-13 * (hi - lo);
    for (int e = 0; e < num_elements(); ++e)
    {
        const auto &eb = elem_bbox_[e];
        if (ordinate < eb[2 * across] - tol || ordinate > eb[2 * across + 1] + tol)
            continue;
        const auto &v = element(e);
        double tmin = std::numeric_limits<double>::max(), tmax = -tmin;
        for (int l = 0; l < 3; ++l)
        {
            const Point &p = vertices_[v[l]], &q = vertices_[v[(l + 1) % 3]];
            if (std::abs(p[across] - ordinate) <= tol)
                throw Error(ErrorKind::degenerate_ray, "ray passes through a vertex");
            const double dp = p[across] - ordinate, dq = q[across] - ordinate;
            if ((dp < 0.0) != (dq < 0.0))
            {
                const double s = dp / (dp - dq);
                const double t = p[along] + s * (q[along] - p[along]);
                tmin = std::min(tmin, t);
                tmax = std::max(tmax, t);
            }
        }
        if (tmax > tmin)
            out.push_back({e, tmin, tmax});
    }
    std::sort(out.begin(), out.end(),
              [](const RaySegment &p, const RaySegment &q) { return p.entry < q.entry; });
    return out;
}

bool Mesh::contains(int e, const Point &p, double tol) const
{
    const Point r = to_reference(e, p);
    if (dim_ == 1)
        return r[0] >= -tol && r[0] <= 1.0 + tol;
    return r[0] >= -tol && r[1] >= -tol && r[0] + r[1] <= 1.0 + tol;
}

Point Mesh::to_reference(int e, const Point &p) const
{
    const auto &v = element(e);
    const Point &p0 = vertices_[v[0]], &p1 = vertices_[v[1]];
    if (dim_ == 1)
        return {(p[0] - p0[0]) / (p1[0] - p0[0]), 0.0};
    const Point &p2 = vertices_[v[2]];
    const double a = p1[0] - p0[0], b = p2[0] - p0[0], c = p1[1] - p0[1], d = p2[1] - p0[1];
    const double det = a * d - b * c;
    const double dx = p[0] - p0[0], dy = p[1] - p0[1];
    return {(d * dx - b * dy) / det, (-c * dx + a * dy) / det};
}

Point Mesh::from_reference(int e, const Point &r) const
{
    const auto &v = element(e);
    const Point &p0 = vertices_[v[0]], &p1 = vertices_[v[1]];
    if (dim_ == 1)
        return {p0[0] + r[0] * (p1[0] - p0[0]), 0.0};
    const Point &p2 = vertices_[v[2]];
    return {p0[0] + r[0] * (p1[0] - p0[0]) + r[1] * (p2[0] - p0[0]),
            p0[1] + r[0] * (p1[1] - p0[1]) + r[1] * (p2[1] - p0[1])};
}

void Mesh::check_consistency() const
{
    for (int e = 0; e < num_elements(); ++e)
        require(area_[e] > 0.0, ErrorKind::internal_error, "element with non-positive area");
    if (dim_ == 1)
        return;
    // Every boundary face must lie on the bounding box: anything else is a hanging node.
    const double tol = 1e-12 * std::max(bbox_[1] - bbox_[0], bbox_[3] - bbox_[2]);
    for (const Face &f : faces_)
    {
        require(std::abs(std::hypot(f.normal[0], f.normal[1]) - 1.0) < 1e-12,
                ErrorKind::internal_error, "face normal is not unit");
        if (!f.boundary())
            continue;
        const Point &a = vertices_[f.v[0]], &b = vertices_[f.v[1]];
        const bool on_box = (std::abs(a[0] - b[0]) <= tol &&
                             (std::abs(a[0] - bbox_[0]) <= tol || std::abs(a[0] - bbox_[1]) <= tol)) ||
                            (std::abs(a[1] - b[1]) <= tol &&
                             (std::abs(a[1] - bbox_[2]) <= tol || std::abs(a[1] - bbox_[3]) <= tol));
        require(on_box, ErrorKind::internal_error, "non-conforming mesh: interior boundary face");
    }
}

PointLocator::PointLocator(const Mesh &mesh) : mesh_(&mesh)
{
    box_ = mesh.bbox();
    const int K = mesh.num_elements();
    const int n = std::max(1, int(std::sqrt(double(K))));
    nx_ = n;
    ny_ = mesh.dim() == 1 ? 1 : n;
    if (mesh.dim() == 1)
        nx_ = std::max(1, K);
    buckets_.assign(std::size_t(nx_) * ny_, {});
    const double wx = (box_[1] - box_[0]) / nx_;
    const double wy = mesh.dim() == 1 ? 1.0 : (box_[3] - box_[2]) / ny_;
    for (int e = 0; e < K; ++e)
    {
        const auto &v = mesh.element(e);
        double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
        for (int i = 0; i < (mesh.dim() == 1 ? 2 : 3); ++i)
        {
            const Point &p = mesh.vertex(v[i]);
            x0 = std::min(x0, p[0]);
            x1 = std::max(x1, p[0]);
            y0 = std::min(y0, p[1]);
            y1 = std::max(y1, p[1]);
        }
        const int i0 = std::clamp(int((x0 - box_[0]) / wx) - 1, 0, nx_ - 1);
        const int i1 = std::clamp(int((x1 - box_[0]) / wx) + 1, 0, nx_ - 1);
        int j0 = 0, j1 = 0;
        if (mesh.dim() == 2)
        {
            j0 = std::clamp(int((y0 - box_[2]) / wy) - 1, 0, ny_ - 1);
            j1 = std::clamp(int((y1 - box_[2]) / wy) + 1, 0, ny_ - 1);
        }
        for (int j = j0; j <= j1; ++j)
            for (int i = i0; i <= i1; ++i)
                buckets_[std::size_t(j) * nx_ + i].push_back(e);
    }
}

int PointLocator::locate(const Point &p) const
{
    const double wx = (box_[1] - box_[0]) / nx_;
    const int i = std::clamp(int((p[0] - box_[0]) / wx), 0, nx_ - 1);
    int j = 0;
    if (mesh_->dim() == 2)
    {
        const double wy = (box_[3] - box_[2]) / ny_;
        j = std::clamp(int((p[1] - box_[2]) / wy), 0, ny_ - 1);
    }
    int best = -1;
    double best_violation = 1e300;
    for (int e : buckets_[std::size_t(j) * nx_ + i])
    {
        const Point r = mesh_->to_reference(e, p);
        double viol = std::max({-r[0], 0.0, r[0] - 1.0});
        if (mesh_->dim() == 2)
            viol = std::max({-r[0], -r[1], r[0] + r[1] - 1.0, 0.0});
        if (viol == 0.0)
            return e;
        if (viol < best_violation)
        {
            best_violation = viol;
            best = e;
        }
    }
    return best_violation < 1e-9 ? best : -1;
}

} // namespace tdg
