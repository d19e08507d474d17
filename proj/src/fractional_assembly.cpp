#include "tdg/fractional.hpp"

#include "tdg/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <unordered_map>

namespace tdg
{

namespace
{

constexpr int max_np = 28;

struct Defaults
{
    int levels, points, y_points;
};

Defaults resolve(const Mesh &mesh, const FracQuadOptions &opts, int degree)
{
    Defaults d;
    if (mesh.dim() == 1)
    {
        d.levels = opts.levels >= 0 ? opts.levels : 8;
        d.points = opts.points > 0 ? opts.points : degree + 5;
    }
    else
    {
        d.levels = opts.levels >= 0 ? opts.levels : 3;
        d.points = opts.points > 0 ? opts.points : degree + 2;
    }
    d.y_points = opts.y_points > 0 ? opts.y_points : degree + 2;
    return d;
}

Point ray_point(Axis axis, double ordinate, double s)
{
    return axis == Axis::x ? Point{s, ordinate} : Point{ordinate, s};
}

// Chebyshev points on [0,1] and the inverse Vandermonde of the monomials t^k there.
struct ChordSampler
{
    int n = 0;
    std::vector<double> t;
    Eigen::MatrixXd tinv;

    explicit ChordSampler(int degree) : n(degree + 1), t(n)
    {
        Eigen::MatrixXd T(n, n);
        for (int i = 0; i < n; ++i)
        {
            t[i] = n == 1 ? 0.5 : 0.5 * (1.0 - std::cos(M_PI * (2 * i + 1) / (2.0 * n)));
            double p = 1.0;
            for (int k = 0; k < n; ++k, p *= t[i])
                T(i, k) = p;
        }
        tinv = T.inverse();
    }
};

RaySegmentation segments_with_jitter(const Mesh &mesh, Axis axis, double &ordinate, double width)
{
    for (int attempt = 0;; ++attempt)
    {
        try
        {
            return mesh.ray_segments(axis, ordinate);
        }
        catch (const Error &err)
        {
            if (err.kind() != ErrorKind::degenerate_ray || attempt > 8)
                throw;
            ordinate += 1e-9 * width * (attempt + 1);
        }
    }
}

// Accumulates dense element-pair blocks, then emits a sparse matrix.
class BlockAccumulator
{
public:
    BlockAccumulator(int np, int ndofs) : np_(np), ndofs_(ndofs) {}

    double *block(int test_elem, int trial_elem)
    {
        const std::uint64_t key = (std::uint64_t(std::uint32_t(test_elem)) << 32) | std::uint32_t(trial_elem);
        auto [it, fresh] = index_.try_emplace(key, int(data_.size()));
        if (fresh)
        {
            data_.resize(data_.size() + np_ * np_, 0.0);
            keys_.push_back(key);
        }
        return data_.data() + it->second;
    }

    SpMat finish() const
    {
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(data_.size());
        for (std::size_t b = 0; b < keys_.size(); ++b)
        {
            const int ti = int(keys_[b] >> 32), tj = int(keys_[b] & 0xffffffffu);
            const double *blk = data_.data() + b * np_ * np_;
            for (int i = 0; i < np_; ++i)
                for (int j = 0; j < np_; ++j)
                    if (blk[i * np_ + j] != 0.0)
                        trip.emplace_back(ti * np_ + i, tj * np_ + j, blk[i * np_ + j]);
        }
        SpMat m(ndofs_, ndofs_);
        m.setFromTriplets(trip.begin(), trip.end());
        return m;
    }

private:
    int np_, ndofs_;
    std::unordered_map<std::uint64_t, int> index_;
    std::vector<std::uint64_t> keys_;
    std::vector<double> data_;
};

// Monomial coefficients (in the chord variable) of u restricted to a chord of element e.
void chord_coeffs(const DgFunction &u, const ChordSampler &cs, int e, Axis axis, double ordinate,
                  double s0, double s1, double *out)
{
    std::array<double, 16> vals{};
    for (int i = 0; i < cs.n; ++i)
        vals[i] = u.value(e, ray_point(axis, ordinate, s0 + cs.t[i] * (s1 - s0)));
    for (int k = 0; k < cs.n; ++k)
    {
        double s = 0.0;
        for (int i = 0; i < cs.n; ++i)
            s += cs.tinv(k, i) * vals[i];
        out[k] = s;
    }
}

double fold_exponent(double mu) { return 2.0 * mu < 1.0 ? -2.0 * mu : 0.0; }

} // namespace

std::vector<Ray> build_rays(const Mesh &mesh, Axis axis, const FracQuadOptions &opts, int degree,
                            double exp_left, double exp_right)
{
    const Defaults d = resolve(mesh, opts, degree);
    const QuadRule1D chord_rule =
        graded_rule01({d.points, d.levels, opts.ratio, exp_left, exp_right});

    auto make_ray = [&](double ordinate, double weight, const RaySegmentation &segs) {
        Ray ray{axis, ordinate, {}};
        ray.chords.reserve(segs.size());
        for (const RaySegment &s : segs)
        {
            RayChord c{s.elem, s.entry, s.exit, {}, {}};
            const double len = s.exit - s.entry;
            c.x.resize(chord_rule.size());
            c.w.resize(chord_rule.size());
            for (std::size_t q = 0; q < chord_rule.size(); ++q)
            {
                c.x[q] = s.entry + len * chord_rule.nodes[q];
                c.w[q] = weight * len * chord_rule.weights[q];
            }
            ray.chords.push_back(std::move(c));
        }
        return ray;
    };

    std::vector<Ray> rays;
    if (mesh.dim() == 1)
    {
        require(axis == Axis::x, ErrorKind::invalid_input, "1D meshes only have an x axis");
        rays.push_back(make_ray(0.0, 1.0, mesh.ray_segments(Axis::x, 0.0)));
        return rays;
    }
    const Axis across = axis == Axis::x ? Axis::y : Axis::x;
    const std::vector<double> cuts = mesh.vertex_coordinates(across);
    const QuadRule1D strip_rule = graded_rule01({d.y_points, opts.y_levels, opts.y_ratio, 0.0, 0.0});
    for (std::size_t s = 0; s + 1 < cuts.size(); ++s)
    {
        const double lo = cuts[s], width = cuts[s + 1] - cuts[s];
        for (std::size_t q = 0; q < strip_rule.size(); ++q)
        {
            double ordinate = lo + width * strip_rule.nodes[q];
            const RaySegmentation segs = segments_with_jitter(mesh, axis, ordinate, width);
            rays.push_back(make_ray(ordinate, width * strip_rule.weights[q], segs));
        }
    }
    return rays;
}

Eigen::MatrixXd chord_basis(const DgSpace &space, int e, Axis axis, double ordinate, double s0,
                            double s1)
{
    const ChordSampler cs(space.degree());
    const int np = space.np();
    Eigen::MatrixXd B(cs.n, np);
    std::array<double, max_np> phi{};
    for (int i = 0; i < cs.n; ++i)
    {
        const Point p = ray_point(axis, ordinate, s0 + cs.t[i] * (s1 - s0));
        space.basis(space.mesh().to_reference(e, p), phi.data());
        for (int j = 0; j < np; ++j)
            B(i, j) = phi[j];
    }
    return (cs.tinv * B).transpose();
}

void derivative_table(const std::vector<double> &s0, const std::vector<double> &s1,
                      const std::vector<double> &xs, const std::vector<int> &owner, double mu,
                      double lambda, Side side, int kmax, Eigen::MatrixXd &out)
{
    const int M = int(s0.size()), Q = int(xs.size()), nk = kmax + 1;
    out.setZero(Q, M * nk);
    constexpr int p = 14;
    std::array<double, p> node_t{}, bw{};
    for (int j = 0; j < p; ++j)
    {
        node_t[j] = 0.5 * (1.0 - std::cos(M_PI * j / (p - 1)));
        bw[j] = (j % 2 ? -1.0 : 1.0) * (j == 0 || j == p - 1 ? 0.5 : 1.0);
    }
    std::array<double, 16> buf{};
    struct Panel
    {
        bool ready = false;
        double a = 0.0, b = 0.0;
        std::array<std::array<double, 16>, p> val{};
    };
    std::vector<Panel> panels;
    const bool left = side == Side::left;

    for (int c = 0; c < M; ++c)
    {
        const double len = s1[c] - s0[c];
        const double delta = 0.25 * len;
        const double edge = left ? s1[c] : s0[c];
        panels.clear();
        for (int q = 0; q < Q; ++q)
        {
            if (left ? owner[q] < c : owner[q] > c)
                continue;
            const double x = xs[q];
            const double dist = left ? x - edge : edge - x;
            double *dst = out.data() + q; // column-major: entry (q, col) at col * Q + q
            if (owner[q] == c || dist < delta)
            {
                chord_rl_derivative(s0[c], s1[c], x, mu, lambda, side, kmax, buf.data());
                for (int k = 0; k < nk; ++k)
                    dst[std::size_t(c * nk + k) * Q] = buf[k];
                continue;
            }
            // Dyadic panel [edge + 2^l delta, edge + 2^{l+1} delta] on the far side.
            int l = std::max(0, int(std::floor(std::log2(dist / delta))));
            while (l > 0 && dist < std::ldexp(delta, l))
                --l;
            while (dist >= std::ldexp(delta, l + 1))
                ++l;
            if (int(panels.size()) <= l)
                panels.resize(l + 1);
            Panel &pn = panels[l];
            if (!pn.ready)
            {
                pn.a = std::ldexp(delta, l);
                pn.b = std::ldexp(delta, l + 1);
                for (int j = 0; j < p; ++j)
                {
                    const double d = pn.a + (pn.b - pn.a) * node_t[j];
                    chord_rl_derivative(s0[c], s1[c], left ? edge + d : edge - d, mu, lambda, side,
                                        kmax, pn.val[j].data());
                }
                pn.ready = true;
            }
            const double tq = (dist - pn.a) / (pn.b - pn.a);
            double num[16] = {}, den = 0.0;
            int hit = -1;
            for (int j = 0; j < p; ++j)
            {
                const double diff = tq - node_t[j];
                if (diff == 0.0)
                {
                    hit = j;
                    break;
                }
                const double wj = bw[j] / diff;
                den += wj;
                for (int k = 0; k < nk; ++k)
                    num[k] += wj * pn.val[j][k];
            }
            for (int k = 0; k < nk; ++k)
                dst[std::size_t(c * nk + k) * Q] = hit >= 0 ? pn.val[hit][k] : num[k] / den;
        }
    }
}

namespace
{

struct RayTables
{
    std::vector<double> s0, s1, xs, w;
    std::vector<int> owner, offset;
};

RayTables ray_tables(const Ray &ray)
{
    RayTables t;
    const int M = int(ray.chords.size());
    t.offset.assign(M + 1, 0);
    for (int c = 0; c < M; ++c)
    {
        const RayChord &ch = ray.chords[c];
        t.s0.push_back(ch.s0);
        t.s1.push_back(ch.s1);
        t.xs.insert(t.xs.end(), ch.x.begin(), ch.x.end());
        t.w.insert(t.w.end(), ch.w.begin(), ch.w.end());
        t.owner.insert(t.owner.end(), ch.x.size(), c);
        t.offset[c + 1] = int(t.xs.size());
    }
    return t;
}

} // namespace

SpMat fractional_pairing(const DgSpace &space, Axis axis, double mu, double lambda, Pairing pairing,
                         const FracQuadOptions &opts)
{
    require(mu > 0.0 && mu < 1.0, ErrorKind::invalid_order, "pairing order must lie in (0,1)");
    const int N = space.degree(), np = space.np(), nk = N + 1;
    const bool lr = pairing == Pairing::left_right;
    const std::vector<Ray> rays = lr ? build_rays(space.mesh(), axis, opts, N, -mu, -mu)
                                     : build_rays(space.mesh(), axis, opts, N, fold_exponent(mu), 0.0);
    BlockAccumulator acc(np, space.ndofs());
    Eigen::MatrixXd L, R, P, blk;

    for (const Ray &ray : rays)
    {
        const int M = int(ray.chords.size());
        const RayTables t = ray_tables(ray);
        std::vector<Eigen::MatrixXd> C(M);
        for (int c = 0; c < M; ++c)
            C[c] = chord_basis(space, ray.chords[c].elem, axis, ray.ordinate, t.s0[c], t.s1[c]);
        derivative_table(t.s0, t.s1, t.xs, t.owner, mu, lambda, Side::left, N, L);
        if (lr)
            derivative_table(t.s0, t.s1, t.xs, t.owner, mu, lambda, Side::right, N, R);

        // Monomial-level pairing; points of chord c see left sources b <= c and right
        // sources a >= c.
        P.setZero(M * nk, M * nk);
        for (int c = 0; c < M; ++c)
        {
            const int q0 = t.offset[c], nq = t.offset[c + 1] - q0;
            const Eigen::Map<const Eigen::VectorXd> w(t.w.data() + q0, nq);
            const auto Lc = L.block(q0, 0, nq, (c + 1) * nk);
            if (lr)
                P.block(c * nk, 0, (M - c) * nk, (c + 1) * nk).noalias() +=
                    R.block(q0, c * nk, nq, (M - c) * nk).transpose() * w.asDiagonal() * Lc;
            else
                P.block(0, 0, (c + 1) * nk, (c + 1) * nk).noalias() += Lc.transpose() * w.asDiagonal() * Lc;
        }
        for (int a = 0; a < M; ++a)
            for (int b = 0; b < (lr ? a + 1 : M); ++b)
            {
                blk.noalias() = C[a] * P.block(a * nk, b * nk, nk, nk) * C[b].transpose();
                double *dst = acc.block(ray.chords[a].elem, ray.chords[b].elem);
                for (int i = 0; i < np; ++i)
                    for (int j = 0; j < np; ++j)
                        dst[i * np + j] += blk(i, j);
            }
    }
    return acc.finish();
}

std::vector<double> dg_fractional_derivative(const DgFunction &u, Axis axis, double mu, double lambda,
                                             Side side, int e, const std::vector<Point> &pts)
{
    require(mu > 0.0 && mu < 1.0, ErrorKind::invalid_order, "derivative order must lie in (0,1)");
    const Mesh &mesh = u.space().mesh();
    const int N = u.space().degree();
    const ChordSampler cs(N);
    const int along = int(axis), across = 1 - along;
    const double width = mesh.dim() == 1 ? 1.0 : mesh.bbox()[2 * across + 1] - mesh.bbox()[2 * across];
    std::vector<double> out;
    out.reserve(pts.size());
    std::array<double, 16> coef{}, buf{};
    for (const Point &p : pts)
    {
        require(mesh.contains(e, p, 1e-10), ErrorKind::invalid_input, "point outside its element");
        double ordinate = mesh.dim() == 1 ? 0.0 : p[across];
        const RaySegmentation segs =
            mesh.dim() == 1 ? mesh.ray_segments(Axis::x, 0.0) : segments_with_jitter(mesh, axis, ordinate, width);
        const double x = p[along];
        double total = 0.0;
        for (const RaySegment &s : segs)
        {
            if ((side == Side::left && s.entry >= x) || (side == Side::right && s.exit <= x))
                continue;
            chord_coeffs(u, cs, s.elem, axis, ordinate, s.entry, s.exit, coef.data());
            chord_rl_derivative(s.entry, s.exit, x, mu, lambda, side, N, buf.data());
            for (int k = 0; k <= N; ++k)
                total += coef[k] * buf[k];
        }
        out.push_back(total);
    }
    return out;
}

double dg_fractional_derivative(const DgFunction &u, Axis axis, double mu, double lambda, Side side,
                                int e, const Point &p)
{
    return dg_fractional_derivative(u, axis, mu, lambda, side, e, std::vector<Point>{p})[0];
}

std::vector<double> fractional_seminorm_sq(const DgFunction &u, Axis axis, double mu, double lambda,
                                           const std::function<double(const Point &)> &g,
                                           const FracQuadOptions &opts)
{
    require(mu > 0.0 && mu < 1.0, ErrorKind::invalid_order, "seminorm order must lie in (0,1)");
    const Mesh &mesh = u.space().mesh();
    const int N = u.space().degree(), nk = N + 1;
    const ChordSampler cs(N);
    // With an exact derivative subtracted the error stays weakly singular at the jumps.
    const std::vector<Ray> rays = build_rays(mesh, axis, opts, N, fold_exponent(mu), 0.0);
    std::vector<double> out(mesh.num_elements(), 0.0);
    Eigen::MatrixXd L;
    for (const Ray &ray : rays)
    {
        const int M = int(ray.chords.size());
        const RayTables t = ray_tables(ray);
        Eigen::VectorXd coef(M * nk);
        for (int c = 0; c < M; ++c)
            chord_coeffs(u, cs, ray.chords[c].elem, axis, ray.ordinate, t.s0[c], t.s1[c],
                         coef.data() + c * nk);
        derivative_table(t.s0, t.s1, t.xs, t.owner, mu, lambda, Side::left, N, L);
        const Eigen::VectorXd d = L * coef;
        for (int q = 0; q < int(t.xs.size()); ++q)
        {
            double v = d[q];
            if (g)
                v -= g(ray_point(axis, ray.ordinate, t.xs[q]));
            out[ray.chords[t.owner[q]].elem] += t.w[q] * v * v;
        }
    }
    return out;
}

std::vector<double> fractional_error_sq(const DgFunction &u, Axis axis, double mu, double lambda,
                                        const std::function<double(const Point &)> &exact,
                                        const FracQuadOptions &opts, double tol, int degree)
{
    require(mu > 0.0 && mu < 1.0, ErrorKind::invalid_order, "seminorm order must lie in (0,1)");
    require(degree >= 1 && degree <= 15, ErrorKind::invalid_input, "representation degree must lie in [1,15]");
    const Mesh &mesh = u.space().mesh();
    const int nk = degree + 1;
    const ChordSampler cs(degree);
    const std::vector<Ray> rays = build_rays(mesh, axis, opts, u.space().degree(), fold_exponent(mu), 0.0);

    // Absolute tolerance from the size of the exact function.
    double scale = 0.0;
    for (int e = 0; e < mesh.num_elements(); ++e)
        scale = std::max(scale, std::abs(exact(mesh.centroid(e))));
    for (const Point &v : mesh.vertices())
        scale = std::max(scale, std::abs(exact(v)));
    const double atol = tol * std::max(scale, 1e-300);
    // Off-centre split keeps quadrature points away from sub-chord ends.
    constexpr double split = 0.5123;
    constexpr int max_depth = 14;
    const std::array<double, 3> probe = {0.137, 0.552, 0.861};

    std::vector<double> out(mesh.num_elements(), 0.0);
    std::vector<double> s0, s1, coef, vals(nk);
    std::vector<int> owner, sub_elem;
    Eigen::MatrixXd L;
    for (const Ray &ray : rays)
    {
        s0.clear();
        s1.clear();
        coef.clear();
        owner.clear();
        sub_elem.clear();
        std::vector<double> xs, w;
        for (const RayChord &ch : ray.chords)
        {
            auto err_at = [&](double s) {
                const Point p = ray_point(axis, ray.ordinate, s);
                return u.value(ch.elem, p) - exact(p);
            };
            const int first = int(s0.size());
            struct Piece
            {
                double a, b;
                int depth;
            };
            std::vector<Piece> stack{{ch.s0, ch.s1, 0}};
            while (!stack.empty())
            {
                const Piece pc = stack.back();
                stack.pop_back();
                const double len = pc.b - pc.a;
                for (int i = 0; i < nk; ++i)
                    vals[i] = err_at(pc.a + cs.t[i] * len);
                std::array<double, 16> c{};
                for (int k = 0; k < nk; ++k)
                    for (int i = 0; i < nk; ++i)
                        c[k] += cs.tinv(k, i) * vals[i];
                double miss = 0.0;
                for (double t : probe)
                {
                    double v = 0.0;
                    for (int k = nk; k-- > 0;)
                        v = v * t + c[k];
                    miss = std::max(miss, std::abs(v - err_at(pc.a + t * len)));
                }
                if (miss > atol && pc.depth < max_depth)
                {
                    const double m = pc.a + split * len;
                    stack.push_back({m, pc.b, pc.depth + 1});
                    stack.push_back({pc.a, m, pc.depth + 1});
                    continue;
                }
                s0.push_back(pc.a);
                s1.push_back(pc.b);
                coef.insert(coef.end(), c.begin(), c.begin() + nk);
                sub_elem.push_back(ch.elem);
            }
            const int last = int(s0.size());
            for (std::size_t q = 0; q < ch.x.size(); ++q)
            {
                const double x = ch.x[q];
                int o = int(std::upper_bound(s0.begin() + first, s0.begin() + last, x) - s0.begin()) - 1;
                o = std::clamp(o, first, last - 1);
                xs.push_back(x);
                w.push_back(ch.w[q]);
                owner.push_back(o);
            }
        }
        derivative_table(s0, s1, xs, owner, mu, lambda, Side::left, degree, L);
        const Eigen::VectorXd d = L * Eigen::Map<const Eigen::VectorXd>(coef.data(), Eigen::Index(coef.size()));
        for (std::size_t q = 0; q < xs.size(); ++q)
            out[sub_elem[owner[q]]] += w[q] * d[q] * d[q];
    }
    return out;
}

double energy_norm(const DgFunction &u, double alpha, double beta, double lambda, const FracQuadOptions &opts)
{
    double s = jump_norm_sq(u);
    for (double v : fractional_seminorm_sq(u, Axis::x, 0.5 * alpha, lambda, nullptr, opts))
        s += v;
    if (u.space().mesh().dim() == 2)
        for (double v : fractional_seminorm_sq(u, Axis::y, 0.5 * beta, lambda, nullptr, opts))
            s += v;
    return std::sqrt(s);
}

double energy_error(const DgFunction &u, const std::function<double(const Point &)> &exact, double alpha,
                    double beta, double lambda, const FracQuadOptions &opts)
{
    double s = jump_norm_sq(u);
    for (double v : fractional_error_sq(u, Axis::x, 0.5 * alpha, lambda, exact, opts))
        s += v;
    if (u.space().mesh().dim() == 2)
        for (double v : fractional_error_sq(u, Axis::y, 0.5 * beta, lambda, exact, opts))
            s += v;
    return std::sqrt(s);
}

double energy_norm(const DgFunction &u, const TemperedParams &params, const FracQuadOptions &opts)
{
    return energy_norm(u, params.alpha, params.beta, params.lambda, opts);
}

} // namespace tdg
