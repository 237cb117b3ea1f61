#include "dyadlab/measure_io.hpp"

#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "dyadlab/errors.hpp"

namespace dyadlab {

void write_measure(std::ostream& os, const DyadicMeasure& mu) {
    os << mu.dim() << ' ' << mu.depth() << '\n';
    os << std::setprecision(17);
    for (const Cell& c : mu.leaves()) {
        const Coords xy = morton_decode(c.key, mu.dim(), mu.depth());
        for (int i = 0; i < mu.dim(); ++i) os << xy[i] << ' ';
        os << c.mass << '\n';
    }
}

DyadicMeasure read_measure(std::istream& is) {
    std::string line;
    int lineno = 0;
    int dim = -1, depth = -1;
    std::vector<std::pair<Coords, double>> leaves;
    while (std::getline(is, line)) {
        ++lineno;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        std::istringstream ls(line);
        if (dim < 0) {
            if (!(ls >> dim >> depth)) {
                throw ParseError("line " + std::to_string(lineno) + ": expected header 'd m'");
            }
            if (dim < 1 || dim > kMaxDim || depth < 0 || depth > kMaxDepth) {
                throw ParseError("line " + std::to_string(lineno) + ": header out of range");
            }
            continue;
        }
        Coords c{};
        double mass = 0.0;
        for (int i = 0; i < dim; ++i) {
            if (!(ls >> c[i])) {
                throw ParseError("line " + std::to_string(lineno) + ": expected coordinate");
            }
        }
        if (!(ls >> mass)) throw ParseError("line " + std::to_string(lineno) + ": expected mass");
        std::string rest;
        if (ls >> rest) throw ParseError("line " + std::to_string(lineno) + ": trailing data");
        leaves.emplace_back(c, mass);
    }
    if (dim < 0) throw ParseError("missing header");
    try {
        return DyadicMeasure::from_leaves(dim, depth, leaves);
    } catch (const InvalidArgument& e) {
        throw ParseError(e.what());
    }
}

void save_measure(const std::string& path, const DyadicMeasure& mu) {
    std::ofstream os(path);
    if (!os) throw InvalidArgument("cannot write " + path);
    write_measure(os, mu);
    if (!os) throw InvalidArgument("write failed: " + path);
}

DyadicMeasure load_measure(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw InvalidArgument("cannot open " + path);
    return read_measure(is);
}

}  // namespace dyadlab
