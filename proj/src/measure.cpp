#include "dyadlab/measure.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "dyadlab/errors.hpp"

namespace dyadlab {

namespace {

void check_shape(int dim, int depth) {
    if (dim < 1 || dim > kMaxDim) {
        throw InvalidArgument("ambient dimension must be in 1..3, got " + std::to_string(dim));
    }
    if (depth < 0 || depth > kMaxDepth) {
        throw InvalidArgument("depth must be in 0..40, got " + std::to_string(depth));
    }
}

}  // namespace

MortonKey morton_encode(const Coords& c, int dim, int level) {
    MortonKey key = 0;
    for (int b = level - 1; b >= 0; --b) {
        for (int i = 0; i < dim; ++i) {
            key = (key << 1) | static_cast<MortonKey>((c[i] >> b) & 1);
        }
    }
    return key;
}

Coords morton_decode(MortonKey key, int dim, int level) {
    Coords c{};
    for (int b = 0; b < level; ++b) {
        for (int i = dim - 1; i >= 0; --i) {
            c[i] |= static_cast<std::int64_t>(key & 1) << b;
            key >>= 1;
        }
    }
    return c;
}

DyadicMeasure::DyadicMeasure(int dim, int depth) : dim_(dim), depth_(depth) {
    check_shape(dim, depth);
    levels_.assign(static_cast<std::size_t>(depth) + 1, {});
}

DyadicMeasure DyadicMeasure::from_cells(int dim, int depth, std::vector<Cell> leaves) {
    DyadicMeasure mu(dim, depth);
    const MortonKey limit = static_cast<MortonKey>(1) << (dim * depth);
    for (const Cell& c : leaves) {
        if (!(c.mass > 0.0) || !std::isfinite(c.mass)) {
            throw InvalidArgument("leaf masses must be finite and strictly positive");
        }
        if (c.key >= limit) {
            throw InvalidArgument("leaf key outside the grid at the stated depth");
        }
    }
    std::stable_sort(leaves.begin(), leaves.end(),
                     [](const Cell& a, const Cell& b) { return a.key < b.key; });
    std::vector<Cell> merged;
    merged.reserve(leaves.size());
    for (const Cell& c : leaves) {
        if (!merged.empty() && merged.back().key == c.key) {
            merged.back().mass += c.mass;
        } else {
            merged.push_back(c);
        }
    }
    mu.build_levels(std::move(merged));
    return mu;
}

DyadicMeasure DyadicMeasure::from_leaves(int dim, int depth,
                                         const std::vector<std::pair<Coords, double>>& leaves) {
    check_shape(dim, depth);
    const std::int64_t side = std::int64_t{1} << depth;
    std::vector<Cell> cells;
    cells.reserve(leaves.size());
    for (const auto& [coords, mass] : leaves) {
        for (int i = 0; i < dim; ++i) {
            if (coords[i] < 0 || coords[i] >= side) {
                throw InvalidArgument("leaf coordinate out of range for depth " +
                                      std::to_string(depth));
            }
        }
        cells.push_back({morton_encode(coords, dim, depth), mass});
    }
    std::vector<MortonKey> keys;
    keys.reserve(cells.size());
    for (const Cell& c : cells) keys.push_back(c.key);
    std::sort(keys.begin(), keys.end());
    if (std::adjacent_find(keys.begin(), keys.end()) != keys.end()) {
        throw InvalidArgument("duplicate leaf coordinates");
    }
    return from_cells(dim, depth, std::move(cells));
}

void DyadicMeasure::build_levels(std::vector<Cell> leaves) {
    levels_.assign(static_cast<std::size_t>(depth_) + 1, {});
    levels_[depth_] = std::move(leaves);
    for (int j = depth_ - 1; j >= 0; --j) {
        const auto& fine = levels_[j + 1];
        auto& coarse = levels_[j];
        coarse.reserve(fine.size());
        for (const Cell& c : fine) {
            const MortonKey parent = c.key >> dim_;
            if (!coarse.empty() && coarse.back().key == parent) {
                coarse.back().mass += c.mass;
            } else {
                coarse.push_back({parent, c.mass});
            }
        }
    }
}

double DyadicMeasure::total_mass() const {
    if (is_trivial()) return 0.0;
    return levels_.front().front().mass;
}

bool DyadicMeasure::is_normalized(double tol) const {
    return !is_trivial() && std::abs(total_mass() - 1.0) <= tol;
}

std::span<const Cell> DyadicMeasure::cells(int level) const {
    if (level < 0 || level > depth_) {
        throw InvalidArgument("level " + std::to_string(level) + " outside 0.." +
                              std::to_string(depth_));
    }
    if (levels_.empty()) return {};
    return levels_[level];
}

std::pair<std::size_t, std::size_t> DyadicMeasure::descendants(int parent_level,
                                                                MortonKey parent_key,
                                                                int level) const {
    const auto row = cells(level);
    const int shift = dim_ * (level - parent_level);
    const MortonKey lo = parent_key << shift;
    const MortonKey hi = (parent_key + 1) << shift;
    auto first = std::lower_bound(row.begin(), row.end(), lo,
                                  [](const Cell& c, MortonKey k) { return c.key < k; });
    auto last = std::lower_bound(first, row.end(), hi,
                                 [](const Cell& c, MortonKey k) { return c.key < k; });
    return {static_cast<std::size_t>(first - row.begin()),
            static_cast<std::size_t>(last - row.begin())};
}

double DyadicMeasure::mass(const CubeRef& q) const {
    const auto row = cells(q.level);
    const MortonKey key = morton_encode(q.coords, dim_, q.level);
    auto it = std::lower_bound(row.begin(), row.end(), key,
                               [](const Cell& c, MortonKey k) { return c.key < k; });
    return (it != row.end() && it->key == key) ? it->mass : 0.0;
}

CubeRef DyadicMeasure::cube(int level, MortonKey key) const {
    return {level, morton_decode(key, dim_, level)};
}

Point DyadicMeasure::center(int level, MortonKey key) const {
    const Coords c = morton_decode(key, dim_, level);
    const double w = std::ldexp(1.0, -level);
    Point p{};
    for (int i = 0; i < dim_; ++i) p[i] = (static_cast<double>(c[i]) + 0.5) * w;
    return p;
}

DyadicMeasure DyadicMeasure::scaled(double factor) const {
    if (!(factor > 0.0)) throw InvalidArgument("scale factor must be positive");
    std::vector<Cell> leaves(this->leaves().begin(), this->leaves().end());
    for (Cell& c : leaves) c.mass *= factor;
    DyadicMeasure out(dim_, depth_);
    out.build_levels(std::move(leaves));
    return out;
}

DyadicMeasure DyadicMeasure::normalized() const {
    if (is_trivial()) return *this;
    return scaled(1.0 / total_mass());
}

DyadicMeasure build_from_atoms(std::span<const Atom> atoms, int dim, int depth) {
    check_shape(dim, depth);
    const double side = std::ldexp(1.0, depth);
    std::vector<Cell> cells;
    cells.reserve(atoms.size());
    for (const Atom& a : atoms) {
        if (a.weight < 0.0 || !std::isfinite(a.weight)) {
            throw InvalidArgument("atom weights must be finite and nonnegative");
        }
        Coords c{};
        for (int i = 0; i < dim; ++i) {
            if (!(a.x[i] >= 0.0 && a.x[i] < 1.0)) {
                throw InvalidArgument("atom coordinate outside [0,1)");
            }
            c[i] = static_cast<std::int64_t>(std::floor(a.x[i] * side));
        }
        if (a.weight == 0.0) continue;
        cells.push_back({morton_encode(c, dim, depth), a.weight});
    }
    return DyadicMeasure::from_cells(dim, depth, std::move(cells));
}

DyadicMeasure restrict_normalize(const DyadicMeasure& mu, std::span<const CubeRef> keep) {
    if (keep.empty()) throw HypothesisViolated("kept set has zero mass");
    const int level = keep.front().level;
    std::vector<MortonKey> keys;
    keys.reserve(keep.size());
    for (const CubeRef& q : keep) {
        if (q.level != level) throw InvalidArgument("kept cubes must share one level");
        if (level > mu.depth()) throw InvalidArgument("kept cube finer than the measure");
        keys.push_back(morton_encode(q.coords, mu.dim(), level));
    }
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());

    const int shift = mu.dim() * (mu.depth() - level);
    std::vector<Cell> kept;
    for (const Cell& c : mu.leaves()) {
        if (std::binary_search(keys.begin(), keys.end(), c.key >> shift)) kept.push_back(c);
    }
    if (kept.empty()) throw HypothesisViolated("kept set has zero mass");
    return DyadicMeasure::from_cells(mu.dim(), mu.depth(), std::move(kept)).normalized();
}

DyadicMeasure magnify(const DyadicMeasure& mu, const CubeRef& q) {
    if (q.level > mu.depth()) throw InvalidArgument("cube finer than the measure");
    const MortonKey qkey = morton_encode(q.coords, mu.dim(), q.level);
    const auto [first, last] = mu.descendants(q.level, qkey, mu.depth());
    if (first == last) throw HypothesisViolated("cube carries zero mass");
    const int rel = mu.depth() - q.level;
    const MortonKey mask = (static_cast<MortonKey>(1) << (mu.dim() * rel)) - 1;
    std::vector<Cell> cells;
    cells.reserve(last - first);
    const auto leaves = mu.leaves();
    for (std::size_t i = first; i < last; ++i) {
        cells.push_back({leaves[i].key & mask, leaves[i].mass});
    }
    return DyadicMeasure::from_cells(mu.dim(), rel, std::move(cells)).normalized();
}

}  // namespace dyadlab
