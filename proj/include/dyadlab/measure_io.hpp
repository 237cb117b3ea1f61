#pragma once

#include <iosfwd>
#include <string>

#include "dyadlab/measure.hpp"

namespace dyadlab {

// Text format: a header line "d m", then one line "c1 ... cd mass" per leaf.
// Blank lines and lines starting with '#' are ignored.
void write_measure(std::ostream& os, const DyadicMeasure& mu);
DyadicMeasure read_measure(std::istream& is);

void save_measure(const std::string& path, const DyadicMeasure& mu);
DyadicMeasure load_measure(const std::string& path);

}  // namespace dyadlab
