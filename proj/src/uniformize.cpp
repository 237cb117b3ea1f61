#include "dyadlab/uniformize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "dyadlab/errors.hpp"

namespace dyadlab {

std::vector<CubeRef> UniformPiece::cubes() const {
    std::vector<CubeRef> out;
    out.reserve(keys.size());
    for (MortonKey k : keys) out.push_back({depth, morton_decode(k, dim, depth)});
    return out;
}

DyadicMeasure restrict_to_keys(const DyadicMeasure& mu, const std::vector<MortonKey>& keys) {
    std::vector<Cell> kept;
    kept.reserve(keys.size());
    const auto leaves = mu.leaves();
    for (MortonKey k : keys) {
        auto it = std::lower_bound(leaves.begin(), leaves.end(), k,
                                   [](const Cell& c, MortonKey key) { return c.key < key; });
        if (it == leaves.end() || it->key != k) throw InvalidArgument("key is not a leaf of mu");
        kept.push_back(*it);
    }
    return DyadicMeasure::from_cells(mu.dim(), mu.depth(), std::move(kept));
}

namespace {

// First (parent-level index, child-level index) pair violating the block
// inequality, or {-1,...} when none does.
struct Violation {
    int block = -1;
    MortonKey parent = 0;
};

Violation find_violation(const DyadicMeasure& r, int T, const std::vector<int>& p) {
    const int d = r.dim();
    const int blocks = static_cast<int>(p.size());
    for (int j = 1; j <= blocks; ++j) {
        const auto parents = r.cells((j - 1) * T);
        const auto children = r.cells(j * T);
        std::size_t pi = 0;
        for (const Cell& q : children) {
            const MortonKey pk = q.key >> (d * T);
            while (parents[pi].key != pk) ++pi;
            const double scaled = std::ldexp(parents[pi].mass, -p[j - 1]);
            if (!(q.mass <= scaled && scaled <= 2.0 * q.mass)) return {j, pk};
        }
    }
    return {};
}

struct Window {
    std::size_t first = 0, last = 0;  // in descending order
    double mass = 0.0;
};

// Heaviest run of the descending-sorted masses whose members all lie within
// (2^-p-1 W, 2^-p W], W the run total: the class floor(-log2 ratio) = p.
Window best_window(const std::vector<double>& desc, int p) {
    Window best;
    const std::size_t n = desc.size();
    const std::size_t lo_len = std::size_t{1} << std::min(p, 62);
    if (p > 62 || lo_len > n) return best;
    const std::size_t hi_len = std::min(n, lo_len * 2);
    for (std::size_t i = 0; i + lo_len <= n; ++i) {
        double w = 0.0;
        for (std::size_t k = i; k < i + lo_len - 1; ++k) w += desc[k];
        for (std::size_t len = lo_len; len <= hi_len && i + len <= n; ++len) {
            w += desc[i + len - 1];
            const double top = std::ldexp(w, -p);
            if (desc[i] <= top && top < 2.0 * desc[i + len - 1] && w > best.mass) {
                best = {i, i + len, w};
            }
        }
    }
    return best;
}

std::vector<Cell> aggregate(const std::vector<Cell>& leaves, int shift) {
    std::vector<Cell> out;
    for (const Cell& c : leaves) {
        const MortonKey k = c.key >> shift;
        if (!out.empty() && out.back().key == k) {
            out.back().mass += c.mass;
        } else {
            out.push_back({k, c.mass});
        }
    }
    return out;
}

UniformPiece extract_raw(const DyadicMeasure& mu, int T, double reference_total) {
    const int d = mu.dim();
    const int m = mu.depth();
    if (T < 1 || m % T != 0) throw InvalidArgument("depth must be a multiple of T");
    const int blocks = m / T;

    UniformPiece piece;
    piece.dim = d;
    piece.depth = m;
    piece.T = T;
    piece.exponents.assign(blocks, 0);

    std::vector<Cell> kept(mu.leaves().begin(), mu.leaves().end());
    for (int j = blocks; j >= 1; --j) {
        const std::vector<Cell> children = aggregate(kept, d * (m - j * T));
        // Group children by parent; children with one parent are contiguous.
        std::vector<std::pair<std::size_t, std::size_t>> groups;
        for (std::size_t i = 0; i < children.size();) {
            std::size_t k = i;
            const MortonKey pk = children[i].key >> (d * T);
            while (k < children.size() && (children[k].key >> (d * T)) == pk) ++k;
            groups.emplace_back(i, k);
            i = k;
        }
        const int pmax = d * T;
        std::vector<double> total(pmax + 1, 0.0);
        std::vector<std::vector<Window>> wins(groups.size(), std::vector<Window>(pmax + 1));
        std::vector<std::vector<std::size_t>> orders(groups.size());
        for (std::size_t g = 0; g < groups.size(); ++g) {
            auto& order = orders[g];
            order.resize(groups[g].second - groups[g].first);
            std::iota(order.begin(), order.end(), groups[g].first);
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return children[a].mass > children[b].mass;
            });
            std::vector<double> desc;
            for (std::size_t idx : order) desc.push_back(children[idx].mass);
            for (int p = 0; p <= pmax; ++p) {
                wins[g][p] = best_window(desc, p);
                total[p] += wins[g][p].mass;
            }
        }
        int pstar = 0;
        for (int p = 1; p <= pmax; ++p) {
            if (total[p] > total[pstar]) pstar = p;
        }
        piece.exponents[j - 1] = pstar;

        std::vector<MortonKey> keep_children;
        for (std::size_t g = 0; g < groups.size(); ++g) {
            const Window& w = wins[g][pstar];
            for (std::size_t r = w.first; r < w.last; ++r) keep_children.push_back(children[orders[g][r]].key);
        }
        std::sort(keep_children.begin(), keep_children.end());
        const int shift = d * (m - j * T);
        std::vector<Cell> next;
        for (const Cell& c : kept) {
            if (std::binary_search(keep_children.begin(), keep_children.end(), c.key >> shift)) {
                next.push_back(c);
            }
        }
        kept = std::move(next);
    }

    // Re-verify against the canonical cube sums; drop offending subtrees.
    for (;;) {
        if (kept.empty()) {
            const auto leaves = mu.leaves();
            const auto it = std::max_element(leaves.begin(), leaves.end(),
                                             [](const Cell& a, const Cell& b) { return a.mass < b.mass; });
            kept = {*it};
            std::fill(piece.exponents.begin(), piece.exponents.end(), 0);
        }
        const DyadicMeasure r = DyadicMeasure::from_cells(d, m, kept);
        const Violation v = find_violation(r, T, piece.exponents);
        if (v.block < 0) break;
        const int shift = d * (m - (v.block - 1) * T);
        std::erase_if(kept, [&](const Cell& c) { return (c.key >> shift) == v.parent; });
    }

    for (const Cell& c : kept) piece.keys.push_back(c.key);
    double mass = 0.0;
    for (const Cell& c : kept) mass += c.mass;
    piece.mass_retained = mass / reference_total;
    piece.beta.resize(blocks);
    for (int j = 0; j < blocks; ++j) piece.beta[j] = static_cast<double>(piece.exponents[j]) / T;
    piece.mass_bound = std::pow(2.0 * d * T + 2.0, -blocks);
    return piece;
}

}  // namespace

std::string check_uniform(const DyadicMeasure& restricted, int T, const std::vector<int>& exponents) {
    if (restricted.is_trivial()) return "restriction is trivial";
    if (T < 1 || restricted.depth() != T * static_cast<int>(exponents.size())) {
        return "depth does not equal T times the number of blocks";
    }
    const Violation v = find_violation(restricted, T, exponents);
    if (v.block < 0) return {};
    std::ostringstream msg;
    msg << "block " << v.block << " violates the uniform ratio window";
    return msg.str();
}

UniformPiece extract_uniform(const DyadicMeasure& mu, int T) {
    if (mu.is_trivial()) throw InvalidArgument("extract_uniform on the trivial measure");
    if (!mu.is_normalized()) throw InvalidArgument("extract_uniform requires a normalized measure");
    UniformPiece piece = extract_raw(mu, T, mu.total_mass());
    piece.meets_bound = piece.mass_retained >= piece.mass_bound * (1 - 1e-12);
    return piece;
}

UniformDecomposition decompose_uniform(const DyadicMeasure& mu, int T, double eps) {
    if (!(eps > 0.0)) throw InvalidArgument("eps must be positive");
    if (mu.is_trivial()) throw InvalidArgument("decompose_uniform on the trivial measure");
    if (!mu.is_normalized()) throw InvalidArgument("decompose_uniform requires a normalized measure");
    const int d = mu.dim();
    const int m = mu.depth();
    if (T < 1 || m % T != 0) throw InvalidArgument("depth must be a multiple of T");

    UniformDecomposition out;
    out.eps = eps;
    out.eps_prime = eps + std::log2(2.0 * d * T + 2.0) / T;
    const double total = mu.total_mass();
    const double stop = std::exp2(-eps * m);
    const double heavy = std::exp2(-out.eps_prime * m);

    std::vector<Cell> residual(mu.leaves().begin(), mu.leaves().end());
    double residual_mass = total;
    out.pieces_heavy = true;
    while (!residual.empty() && residual_mass / total >= stop) {
        const DyadicMeasure r = DyadicMeasure::from_cells(d, m, residual);
        UniformPiece piece = extract_raw(r, T, total);
        // The extraction bound is relative to what is left.
        piece.meets_bound = piece.mass_retained * total >= piece.mass_bound * r.total_mass() * (1 - 1e-12);
        out.pieces_heavy = out.pieces_heavy && piece.mass_retained >= heavy * (1 - 1e-12);
        std::erase_if(residual, [&](const Cell& c) {
            return std::binary_search(piece.keys.begin(), piece.keys.end(), c.key);
        });
        residual_mass = 0.0;
        for (const Cell& c : residual) residual_mass += c.mass;
        out.pieces.push_back(std::move(piece));
    }
    out.covered = 1.0 - residual_mass / total;
    out.covers = out.covered >= 1.0 - stop - 1e-12;
    return out;
}

PLFunction branching_profile(const std::vector<double>& beta) {
    if (beta.empty()) return PLFunction::linear(0.0);
    const std::size_t l = beta.size();
    std::vector<double> xs(l + 1), ys(l + 1);
    double acc = 0.0;
    for (std::size_t j = 0; j <= l; ++j) {
        xs[j] = static_cast<double>(j) / static_cast<double>(l);
        if (j > 0) acc += beta[j - 1];
        ys[j] = acc / static_cast<double>(l);
    }
    return PLFunction(std::move(xs), std::move(ys));
}

PLFunction branching_profile(const UniformPiece& piece) { return branching_profile(piece.beta); }

PLFunction lift_to_class(const PLFunction& f, double u, double eps, double d) {
    if (!(eps > 0.0)) throw InvalidArgument("eps must be positive");
    const double r = std::sqrt(eps);
    const double x0 = 4.0 * r;
    if (!(x0 < 1.0)) throw InvalidArgument("4 sqrt(eps) must be below 1");
    if (f.lo() != 0.0 || f.hi() != 1.0) throw InvalidArgument("f must live on [0,1]");
    if (f.max_abs_slope() > d + 1e-12) throw HypothesisViolated("f is not d-Lipschitz");
    auto violates = [&](double x) { return f(x) < (u - r) * x - 1e-12; };
    if (violates(x0)) {
        std::ostringstream msg;
        msg << "f(x) < (u - sqrt(eps)) x at x = " << x0;
        throw HypothesisViolated(msg.str());
    }
    for (double x : f.xs()) {
        if (x > x0 && violates(x)) {
            std::ostringstream msg;
            msg << "f(x) < (u - sqrt(eps)) x at x = " << x;
            throw HypothesisViolated(msg.str());
        }
    }
    std::vector<double> xs{0.0, x0}, ys{0.0, f(x0)};
    for (std::size_t i = 0; i < f.xs().size(); ++i) {
        if (f.xs()[i] > x0) {
            xs.push_back(f.xs()[i]);
            ys.push_back(f.ys()[i]);
        }
    }
    return PLFunction(std::move(xs), std::move(ys));
}

}  // namespace dyadlab
