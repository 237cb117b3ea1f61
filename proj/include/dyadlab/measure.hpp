#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace dyadlab {

inline constexpr int kMaxDim = 3;
inline constexpr int kMaxDepth = 40;

using Coords = std::array<std::int64_t, kMaxDim>;
using Point = std::array<double, kMaxDim>;

// Bit-interleaved cube index. Children of a cube are contiguous when cells are
// sorted by key, and the parent of `k` is `k >> dim`.
using MortonKey = unsigned __int128;

MortonKey morton_encode(const Coords& c, int dim, int level);
Coords morton_decode(MortonKey key, int dim, int level);

// A dyadic cube: `level` j and integer coordinates in [0, 2^j)^d.
struct CubeRef {
    int level = 0;
    Coords coords{};

    auto operator<=>(const CubeRef&) const = default;
};

struct Cell {
    MortonKey key = 0;
    double mass = 0.0;
};

struct Atom {
    Point x{};
    double weight = 0.0;
};

// Finitely supported mass assignment on the dyadic grid of [0,1)^d, down to a
// finest level `depth`. Leaves carry strictly positive masses; every coarser
// level is obtained by summing children left to right in key order, so any two
// measures with the same leaves have bit-identical cube masses.
//
// An empty leaf set is the trivial measure. It is representable (the zero
// element of the cone of finite measures) and every operation returns a
// defined sentinel on it.
class DyadicMeasure {
public:
    DyadicMeasure() = default;
    DyadicMeasure(int dim, int depth);  // trivial measure of the given shape

    // Leaves given by key at `depth`. Duplicate keys are merged by summing in
    // input order; non-positive masses are rejected.
    static DyadicMeasure from_cells(int dim, int depth, std::vector<Cell> leaves);
    // Same as from_cells but duplicate coordinates are an error.
    static DyadicMeasure from_leaves(int dim, int depth,
                                     const std::vector<std::pair<Coords, double>>& leaves);

    int dim() const { return dim_; }
    int depth() const { return depth_; }
    bool is_trivial() const { return levels_.empty() || levels_.back().empty(); }
    double total_mass() const;
    bool is_normalized(double tol = 1e-9) const;

    std::span<const Cell> cells(int level) const;
    std::span<const Cell> leaves() const { return cells(depth_); }

    // Index range [first, last) in cells(level) of the descendants of
    // (parent_level, parent_key).
    std::pair<std::size_t, std::size_t> descendants(int parent_level, MortonKey parent_key,
                                                    int level) const;

    double mass(const CubeRef& q) const;
    CubeRef cube(int level, MortonKey key) const;
    Point center(int level, MortonKey key) const;

    DyadicMeasure scaled(double factor) const;
    DyadicMeasure normalized() const;

private:
    void build_levels(std::vector<Cell> leaves);

    int dim_ = 1;
    int depth_ = 0;
    std::vector<std::vector<Cell>> levels_;
};

// Leaf mass of each depth-level cube is the sum of the weights of the points it
// contains. Zero-weight atoms are dropped; an all-zero input yields the trivial
// measure.
DyadicMeasure build_from_atoms(std::span<const Atom> atoms, int dim, int depth);

// Normalized restriction to a set of cubes, all at the same level.
DyadicMeasure restrict_normalize(const DyadicMeasure& mu, std::span<const CubeRef> keep);

// Magnified, renormalized copy of the restriction of mu to q, rescaled to the
// unit cube. Depth drops by q.level.
DyadicMeasure magnify(const DyadicMeasure& mu, const CubeRef& q);

}  // namespace dyadlab
