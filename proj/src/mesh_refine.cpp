#include "tdg/error.hpp"
#include "tdg/mesh.hpp"

#include <algorithm>
#include <unordered_map>

namespace tdg
{

namespace
{

struct PairHash
{
    std::size_t operator()(const std::pair<int, int> &p) const noexcept
    {
        return std::hash<long long>()((static_cast<long long>(p.first) << 32) ^ p.second);
    }
};

std::pair<int, int> edge_key(int a, int b) { return std::minmax(a, b); }

} // namespace

class MeshEditor
{
public:
    explicit MeshEditor(const Mesh &mesh) : m_(mesh)
    {
        if (m_.dim_ == 2)
            for (int e = 0; e < m_.num_elements(); ++e)
                add_edges(m_.elem_node_[e]);
    }

    int node_of_element(int e) const
    {
        require(e >= 0 && e < m_.num_elements(), ErrorKind::invalid_input,
                "unknown element id " + std::to_string(e));
        return m_.elem_node_[e];
    }

    const GenealogyNode &node(int id) const { return m_.nodes_[id]; }

    void bisect(int t, int depth = 0)
    {
        require(depth < 256, ErrorKind::internal_error, "bisection closure does not terminate");
        if (!m_.nodes_[t].leaf())
            return;
        if (m_.dim_ == 1)
        {
            split(t);
            return;
        }
        const auto key = edge_key(m_.nodes_[t].v[0], m_.nodes_[t].v[1]);
        for (;;)
        {
            const int nb = neighbour(t, key);
            if (nb < 0)
            {
                split(t);
                return;
            }
            const auto &nv = m_.nodes_[nb].v;
            if (edge_key(nv[0], nv[1]) == key)
            {
                split(t);
                split(nb);
                return;
            }
            bisect(nb, depth + 1);
        }
    }

    /// Bisect t, both children, then the two grandchildren at the interior edge (m, v2).
    void refine_with_interior_vertex(int t)
    {
        bisect(t);
        if (m_.dim_ == 1)
            return;
        const int kids[2] = {m_.nodes_[t].child[0], m_.nodes_[t].child[1]};
        for (int c : kids)
            bisect(c);
        const int c0 = m_.nodes_[t].child[0];
        bisect(m_.nodes_[c0].child[0]);
    }

    std::vector<int> leaves() const
    {
        std::vector<int> out;
        for (int i = 0; i < int(m_.nodes_.size()); ++i)
            if (m_.nodes_[i].leaf() && live_[i])
                out.push_back(i);
        return out;
    }

    void init_live()
    {
        live_.assign(m_.nodes_.size(), 0);
        for (int id : m_.elem_node_)
            mark_live(id);
    }

    /// Merge every marked sibling pair whose midpoint can be removed. Returns merged parents.
    std::vector<int> coarsen_pass(const std::vector<char> &marked)
    {
        std::vector<int> merged;
        const std::vector<int> leaf = leaves();
        auto is_marked = [&](int id) { return id < int(marked.size()) && marked[id]; };
        auto mergeable = [&](int p) {
            const auto &n = m_.nodes_[p];
            return !n.leaf() && m_.nodes_[n.child[0]].leaf() && m_.nodes_[n.child[1]].leaf() &&
                   is_marked(n.child[0]) && is_marked(n.child[1]);
        };
        if (m_.dim_ == 1)
        {
            for (int id : leaf)
            {
                const int p = m_.nodes_[id].parent;
                if (p >= 0 && m_.nodes_[p].child[0] == id && mergeable(p))
                {
                    collapse(p);
                    merged.push_back(p);
                }
            }
            return merged;
        }
        std::unordered_map<int, std::vector<int>> vertex_leaves;
        for (int id : leaf)
            for (int v : m_.nodes_[id].v)
                vertex_leaves[v].push_back(id);
        std::vector<char> done(m_.nodes_.size(), 0);
        for (int id : leaf)
        {
            const int p = m_.nodes_[id].parent;
            if (p < 0 || done[p] || !mergeable(p))
                continue;
            const int mid = m_.nodes_[m_.nodes_[p].child[0]].v[2];
            std::vector<int> parents;
            bool ok = true;
            for (int l : vertex_leaves[mid])
            {
                const int q = m_.nodes_[l].parent;
                if (q < 0 || !mergeable(q) || m_.nodes_[m_.nodes_[q].child[0]].v[2] != mid)
                {
                    ok = false;
                    break;
                }
                if (std::find(parents.begin(), parents.end(), q) == parents.end())
                    parents.push_back(q);
            }
            for (int q : parents)
                done[q] = 1;
            if (!ok)
                continue;
            for (int q : parents)
            {
                collapse(q);
                merged.push_back(q);
            }
        }
        return merged;
    }

    Mesh result()
    {
        m_.elem_node_ = leaves();
        m_.finalize();
        return m_;
    }

private:
    Mesh m_;
    std::unordered_map<std::pair<int, int>, std::vector<int>, PairHash> edges_;
    std::vector<char> live_;

    void mark_live(int id)
    {
        if (id >= int(live_.size()))
            live_.resize(id + 1, 0);
        live_[id] = 1;
    }

    int neighbour(int t, const std::pair<int, int> &key) const
    {
        auto it = edges_.find(key);
        if (it == edges_.end())
            return -1;
        for (int n : it->second)
            if (n != t)
                return n;
        return -1;
    }

    void add_edges(int id)
    {
        const auto &v = m_.nodes_[id].v;
        for (int l = 0; l < 3; ++l)
            edges_[edge_key(v[l], v[(l + 1) % 3])].push_back(id);
    }

    void remove_edges(int id)
    {
        const auto &v = m_.nodes_[id].v;
        for (int l = 0; l < 3; ++l)
        {
            auto &list = edges_[edge_key(v[l], v[(l + 1) % 3])];
            list.erase(std::remove(list.begin(), list.end(), id), list.end());
        }
    }

    int midpoint(int a, int b)
    {
        const auto key = edge_key(a, b);
        auto it = m_.midpoints_.find(key);
        if (it != m_.midpoints_.end())
            return it->second;
        const Point &pa = m_.vertices_[a], &pb = m_.vertices_[b];
        m_.vertices_.push_back({0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])});
        const int id = int(m_.vertices_.size()) - 1;
        m_.midpoints_[key] = id;
        return id;
    }

    void split(int t)
    {
        const auto v = m_.nodes_[t].v;
        const int mid = midpoint(v[0], v[1]);
        GenealogyNode c0, c1;
        c0.parent = c1.parent = t;
        c0.level = c1.level = m_.nodes_[t].level + 1;
        if (m_.dim_ == 1)
        {
            c0.v = {v[0], mid, -1};
            c1.v = {mid, v[1], -1};
        }
        else
        {
            c0.v = {v[2], v[0], mid};
            c1.v = {v[1], v[2], mid};
            remove_edges(t);
        }
        const int id0 = int(m_.nodes_.size());
        m_.nodes_.push_back(c0);
        m_.nodes_.push_back(c1);
        m_.nodes_[t].child[0] = id0;
        m_.nodes_[t].child[1] = id0 + 1;
        if (!live_.empty())
        {
            live_.resize(m_.nodes_.size(), 0);
            live_[id0] = live_[id0 + 1] = 1;
        }
        if (m_.dim_ == 2)
        {
            add_edges(id0);
            add_edges(id0 + 1);
        }
    }

    void collapse(int p)
    {
        auto &n = m_.nodes_[p];
        live_[n.child[0]] = live_[n.child[1]] = 0;
        live_[p] = 1;
        n.child[0] = n.child[1] = -1;
    }
};

Mesh refine(const Mesh &mesh, const std::set<int> &marked)
{
    MeshEditor ed(mesh);
    ed.init_live();
    std::vector<int> nodes;
    for (int e : marked)
        nodes.push_back(ed.node_of_element(e));
    for (int t : nodes)
        ed.refine_with_interior_vertex(t);
    return ed.result();
}

Mesh refine_uniform(const Mesh &mesh)
{
    MeshEditor ed(mesh);
    ed.init_live();
    std::vector<int> nodes;
    for (int e = 0; e < mesh.num_elements(); ++e)
        nodes.push_back(ed.node_of_element(e));
    for (int t : nodes)
        ed.bisect(t);
    if (mesh.dim() == 2)
        for (int t : nodes)
        {
            const int kids[2] = {ed.node(t).child[0], ed.node(t).child[1]};
            for (int c : kids)
                ed.bisect(c);
        }
    return ed.result();
}

Mesh coarsen(const Mesh &mesh, const std::set<int> &marked, int max_passes)
{
    MeshEditor ed(mesh);
    ed.init_live();
    std::vector<char> flag(mesh.num_nodes(), 0);
    for (int e : marked)
        if (e >= 0 && e < mesh.num_elements())
            flag[mesh.node_of(e)] = 1;
    for (int pass = 0; pass < max_passes; ++pass)
    {
        const auto merged = ed.coarsen_pass(flag);
        if (merged.empty())
            break;
        for (int p : merged)
            flag[p] = 1;
    }
    return ed.result();
}

} // namespace tdg
