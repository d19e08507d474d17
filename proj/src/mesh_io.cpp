#include "tdg/error.hpp"
#include "tdg/mesh.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace tdg
{

void Mesh::write(std::ostream &os) const
{
    const int nv = dim_ == 1 ? 2 : 3;
    std::vector<int> remap(vertices_.size(), -1);
    std::vector<int> order;
    for (int e = 0; e < num_elements(); ++e)
        for (int i = 0; i < nv; ++i)
        {
            const int v = element(e)[i];
            if (remap[v] < 0)
            {
                remap[v] = int(order.size());
                order.push_back(v);
            }
        }
    os << dim_ << ' ' << num_elements() << ' ' << order.size() << '\n';
    os << std::setprecision(17);
    for (int v : order)
    {
        os << vertices_[v][0];
        if (dim_ == 2)
            os << ' ' << vertices_[v][1];
        os << '\n';
    }
    for (int e = 0; e < num_elements(); ++e)
    {
        for (int i = 0; i < nv; ++i)
            os << (i ? " " : "") << remap[element(e)[i]];
        os << '\n';
    }
    // Face records: elem0 elem1 nx ny length (elem1 = -1 on the boundary).
    for (const Face &f : faces_)
        os << "face " << f.elem[0] << ' ' << f.elem[1] << ' ' << f.normal[0] << ' ' << f.normal[1]
           << ' ' << f.length << '\n';
}

Mesh Mesh::read(std::istream &is)
{
    Mesh m;
    int K = 0, V = 0;
    if (!(is >> m.dim_ >> K >> V) || (m.dim_ != 1 && m.dim_ != 2) || K < 1 || V < 2)
        throw Error(ErrorKind::input_error, "bad mesh header");
    m.vertices_.resize(V, {0.0, 0.0});
    for (int i = 0; i < V; ++i)
    {
        is >> m.vertices_[i][0];
        if (m.dim_ == 2)
            is >> m.vertices_[i][1];
        if (!is || !std::isfinite(m.vertices_[i][0]) || !std::isfinite(m.vertices_[i][1]))
            throw Error(ErrorKind::input_error, "bad vertex record");
    }
    const int nv = m.dim_ == 1 ? 2 : 3;
    for (int e = 0; e < K; ++e)
    {
        GenealogyNode n;
        for (int i = 0; i < nv; ++i)
        {
            is >> n.v[i];
            if (!is || n.v[i] < 0 || n.v[i] >= V)
                throw Error(ErrorKind::input_error, "bad element record");
        }
        if (m.dim_ == 1)
        {
            if (m.vertices_[n.v[0]][0] > m.vertices_[n.v[1]][0])
                std::swap(n.v[0], n.v[1]);
        }
        else
        {
            // Longest edge becomes the refinement edge (v0, v1).
            auto len = [&](int a, int b) {
                const Point &p = m.vertices_[n.v[a]], &q = m.vertices_[n.v[b]];
                return std::hypot(p[0] - q[0], p[1] - q[1]);
            };
            const double l01 = len(0, 1), l12 = len(1, 2), l20 = len(2, 0);
            if (l12 >= l01 && l12 >= l20)
                n.v = {n.v[1], n.v[2], n.v[0]};
            else if (l20 >= l01 && l20 >= l12)
                n.v = {n.v[2], n.v[0], n.v[1]};
        }
        m.elem_node_.push_back(int(m.nodes_.size()));
        m.nodes_.push_back(n);
    }
    m.finalize();
    return m;
}

} // namespace tdg
