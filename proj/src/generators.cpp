#include "dyadlab/generators.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <random>

#include "dyadlab/errors.hpp"

namespace dyadlab {

namespace {

constexpr double kPi = std::numbers::pi;

// Leaves of the self-similar measure whose base-2^g digits (one tuple per
// block) are drawn from `digits` with the given weights.
DyadicMeasure self_similar(int dim, int g, int depth, const std::vector<Coords>& digits,
                           const std::vector<double>& weights) {
    if (depth % g != 0) throw InvalidArgument("depth must be a multiple of the digit length");
    std::vector<std::pair<Coords, double>> cur{{Coords{}, 1.0}};
    for (int b = 0; b < depth / g; ++b) {
        std::vector<std::pair<Coords, double>> next;
        next.reserve(cur.size() * digits.size());
        for (const auto& [c, w] : cur) {
            for (std::size_t k = 0; k < digits.size(); ++k) {
                Coords n{};
                for (int i = 0; i < dim; ++i) n[i] = (c[i] << g) | digits[k][i];
                next.emplace_back(n, w * weights[k]);
            }
        }
        cur = std::move(next);
    }
    return DyadicMeasure::from_leaves(dim, depth, cur);
}

std::vector<Coords> digit_tuples(int dim, const std::vector<std::int64_t>& per_coord) {
    std::vector<Coords> out{Coords{}};
    for (int i = 0; i < dim; ++i) {
        std::vector<Coords> next;
        for (const Coords& c : out) {
            for (std::int64_t v : per_coord) {
                Coords n = c;
                n[i] = v;
                next.push_back(n);
            }
        }
        out = std::move(next);
    }
    return out;
}

void check_dim(int dim) {
    if (dim < 1 || dim > kMaxDim) throw InvalidArgument("dimension must be 1, 2 or 3");
}

}  // namespace

DyadicMeasure cantor_product(int k, int dim, int depth) {
    check_dim(dim);
    if (k < 1) throw InvalidArgument("ratio must be 2^-k with k >= 1");
    const std::int64_t top = (std::int64_t{1} << k) - 1;
    const auto digits = digit_tuples(dim, top == 1 ? std::vector<std::int64_t>{0, 1}
                                                   : std::vector<std::int64_t>{0, top});
    return self_similar(dim, k, depth, digits, std::vector<double>(digits.size(), 1.0 / digits.size()));
}

DyadicMeasure lattice_falconer(int q, int dim, int depth) {
    check_dim(dim);
    if (q < 2 || (q & (q - 1)) != 0) throw InvalidArgument("q must be a power of 2");
    const int g = std::countr_zero(static_cast<unsigned>(q));
    const int keep = 1 << ((g + 1) / 2);
    std::vector<std::int64_t> per;
    for (int v = 0; v < keep; ++v) per.push_back(v);
    const auto digits = digit_tuples(dim, per);
    return self_similar(dim, g, depth, digits, std::vector<double>(digits.size(), 1.0 / digits.size()));
}

DyadicMeasure train_track(int delta, int depth, int tracks) {
    if (delta < 2 || delta % 2 != 0) throw InvalidArgument("track level must be even and >= 2");
    if (delta >= depth || (depth - delta) % 2 != 0) {
        throw InvalidArgument("need delta < depth with depth - delta even");
    }
    const int half = delta / 2;
    const int all = 1 << half;
    if (tracks < 0) tracks = all;
    if (tracks > all) throw InvalidArgument("too many tracks for this level");
    if (tracks == 0) return DyadicMeasure(2, depth);

    // Vertical offsets inside a track: ratio 1/4 Cantor below the width.
    std::vector<std::int64_t> fine{0};
    for (int b = 0; b < (depth - delta) / 2; ++b) {
        std::vector<std::int64_t> next;
        for (std::int64_t v : fine) {
            next.push_back(v << 2);
            next.push_back((v << 2) | 3);
        }
        fine = std::move(next);
    }
    const std::int64_t xs = std::int64_t{1} << (depth - half);  // cells along a track
    const double w = 1.0 / (static_cast<double>(tracks) * xs * fine.size());
    std::vector<Cell> cells;
    cells.reserve(static_cast<std::size_t>(tracks) * xs * fine.size());
    for (int k = 0; k < tracks; ++k) {
        const std::int64_t y0 = static_cast<std::int64_t>(k) << (depth - half);
        for (std::int64_t x = 0; x < xs; ++x) {
            for (std::int64_t f : fine) cells.push_back({morton_encode({x, y0 + f, 0}, 2, depth), w});
        }
    }
    return DyadicMeasure::from_cells(2, depth, std::move(cells));
}

DyadicMeasure product_set(const DyadicMeasure& a) {
    if (a.dim() != 1) throw InvalidArgument("product_set needs a one-dimensional factor");
    if (a.is_trivial()) return DyadicMeasure(2, a.depth());
    const auto leaves = a.leaves();
    const double t = a.total_mass();
    std::vector<Cell> cells;
    cells.reserve(leaves.size() * leaves.size());
    for (const Cell& p : leaves) {
        for (const Cell& q : leaves) {
            const auto x = static_cast<std::int64_t>(p.key);
            const auto y = static_cast<std::int64_t>(q.key);
            cells.push_back({morton_encode({x, y, 0}, 2, a.depth()), (p.mass / t) * (q.mass / t)});
        }
    }
    return DyadicMeasure::from_cells(2, a.depth(), std::move(cells));
}

DyadicMeasure circle_pair(int depth) {
    if (depth < 1 || depth > 20) throw InvalidArgument("circle_pair depth must be in 1..20");
    const std::size_t n = std::size_t{1} << (depth + 2);
    std::vector<Atom> atoms;
    atoms.reserve(2 * n);
    for (double cx : {0.22, 0.78}) {
        for (std::size_t i = 0; i < n; ++i) {
            const double a = 2.0 * kPi * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
            atoms.push_back({{cx + 0.18 * std::cos(a), 0.5 + 0.18 * std::sin(a), 0.0}, 1.0 / (2.0 * n)});
        }
    }
    return build_from_atoms(atoms, 2, depth);
}

DyadicMeasure random_digit_cantor(int digits, int depth, std::uint64_t seed) {
    if (digits < 1 || digits > 16) throw InvalidArgument("digit count must be in 1..16");
    std::mt19937_64 rng(seed);
    std::vector<Coords> all = digit_tuples(2, {0, 1, 2, 3});
    std::shuffle(all.begin(), all.end(), rng);
    all.resize(digits);
    std::sort(all.begin(), all.end());
    std::uniform_real_distribution<double> u(0.5, 1.5);
    std::vector<double> w(digits);
    double t = 0.0;
    for (double& x : w) t += (x = u(rng));
    for (double& x : w) x /= t;
    return self_similar(2, 2, depth, all, w);
}

DirectionMeasure cantor_arc(int cells, double s, double lo, double hi) {
    if (!(s > 0.0 && s < 1.0)) throw InvalidArgument("arc dimension must lie in (0,1)");
    if (!(lo < hi)) throw InvalidArgument("arc needs lo < hi");
    DirectionMeasure rho(2, cells);
    const double r = std::exp2(-1.0 / s);
    const double cell = 2.0 * kPi / cells;
    struct Piece {
        double a, b, m;
    };
    std::vector<Piece> cur{{lo, hi, 1.0}};
    while (cur.front().b - cur.front().a > cell) {
        std::vector<Piece> next;
        next.reserve(2 * cur.size());
        for (const Piece& p : cur) {
            const double w = r * (p.b - p.a);
            next.push_back({p.a, p.a + w, p.m / 2});
            next.push_back({p.b - w, p.b, p.m / 2});
        }
        cur = std::move(next);
    }
    for (const Piece& p : cur) {
        const double c = 0.5 * (p.a + p.b);
        rho.add(rho.locate({std::cos(c), std::sin(c), 0.0}), p.m);
    }
    return rho;
}

double arc_frostman_constant(const DirectionMeasure& rho, double s, double delta) {
    if (rho.dim() != 2) throw InvalidArgument("arc Frostman constant needs d = 2");
    const int n = rho.size();
    const double cell = 2.0 * kPi / n;
    const double total = rho.total_mass();
    // Prefix sums over two turns so that arcs may wrap.
    std::vector<double> pre(2 * n + 1, 0.0);
    for (int i = 0; i < 2 * n; ++i) pre[i + 1] = pre[i] + rho.mass(i % n) / total;
    double best = 0.0;
    for (double r = std::max(delta, cell / 2); r <= kPi; r *= 2.0) {
        const int h = static_cast<int>(std::floor(r / cell));
        const int width = std::min(n, 2 * h + 1);
        for (int i = 0; i < n; ++i) {
            const double m = pre[i + width] - pre[i];
            best = std::max(best, m / std::pow(r, s));
        }
    }
    return best;
}

}  // namespace dyadlab
