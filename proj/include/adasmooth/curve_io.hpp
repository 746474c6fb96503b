#pragma once

#include "adasmooth/curve.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace adasmooth {

//! Reads `curve_id,t,y` rows. Rows may come in any order; curves keep the
//! order of their first row and are sorted by time. Malformed rows raise
//! DataError naming the line.
std::vector<Curve> read_curves_csv(std::istream& in,
                                   const std::string& source = "<stream>");

//! Reads `[{"id": ..., "t": [...], "y": [...]}, ...]`.
std::vector<Curve> read_curves_json(std::istream& in,
                                    const std::string& source = "<stream>");

//! Dispatches on the extension (.json or anything else as CSV).
std::vector<Curve> read_curves(const std::string& path);

void write_curves_csv(std::ostream& out, const std::vector<Curve>& curves);
void write_curves_json(std::ostream& out, const std::vector<Curve>& curves);
void write_curves(const std::string& path, const std::vector<Curve>& curves);

} // namespace adasmooth
