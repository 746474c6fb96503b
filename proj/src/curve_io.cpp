#include "adasmooth/curve_io.hpp"

#include "adasmooth/errors.hpp"
#include "adasmooth/format.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>
#include <unordered_map>

namespace adasmooth {

namespace {

std::string_view
trim(std::string_view s)
{
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
    s.remove_prefix(1);
  }
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view>
split(std::string_view line)
{
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos - start)));
    if (pos == std::string_view::npos) {
      break;
    }
    start = pos + 1;
  }
  return out;
}

double
parse_number(std::string_view field, const std::string& where)
{
  double v = 0.0;
  const char* first = field.data();
  const char* last = first + field.size();
  if (!field.empty() && *first == '+') {
    ++first;
  }
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || field.empty()) {
    throw DataError(where + ": cannot parse number '" + std::string(field) + "'");
  }
  if (!std::isfinite(v)) {
    throw NonFiniteInput(where + ": non-finite value '" + std::string(field) + "'");
  }
  return v;
}

} // namespace

std::vector<Curve>
read_curves_csv(std::istream& in, const std::string& source)
{
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  std::vector<std::string> ids;
  std::vector<std::vector<double>> ts, ys;
  std::unordered_map<std::string, std::size_t> index;
  while (std::getline(in, line)) {
    ++lineno;
    auto view = trim(line);
    if (view.empty()) {
      continue;
    }
    auto fields = split(view);
    std::string where = source + ":" + std::to_string(lineno);
    if (!header_seen) {
      if (fields.size() != 3 || fields[0] != "curve_id" || fields[1] != "t" ||
          fields[2] != "y") {
        throw DataError(where + ": expected header 'curve_id,t,y'");
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != 3) {
      throw DataError(where + ": expected 3 fields, found " +
                      std::to_string(fields.size()));
    }
    if (fields[0].empty()) {
      throw DataError(where + ": empty curve_id");
    }
    double t = parse_number(fields[1], where);
    double y = parse_number(fields[2], where);
    std::string id(fields[0]);
    auto [it, inserted] = index.emplace(id, ids.size());
    if (inserted) {
      ids.push_back(id);
      ts.emplace_back();
      ys.emplace_back();
    }
    ts[it->second].push_back(t);
    ys[it->second].push_back(y);
  }
  if (!header_seen) {
    throw DataError(source + ": empty file");
  }
  std::vector<Curve> curves;
  curves.reserve(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    curves.push_back(make_curve(ids[i], std::move(ts[i]), std::move(ys[i])));
  }
  return curves;
}

std::vector<Curve>
read_curves_json(std::istream& in, const std::string& source)
{
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(source + ": " + e.what());
  }
  if (!j.is_array()) {
    throw DataError(source + ": expected an array of curves");
  }
  std::vector<Curve> curves;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& c = j[i];
    std::string where = source + ": curve #" + std::to_string(i);
    try {
      const auto& idv = c.at("id");
      std::string id = idv.is_string() ? idv.get<std::string>() : idv.dump();
      auto t = c.at("t").get<std::vector<double>>();
      auto y = c.at("y").get<std::vector<double>>();
      curves.push_back(make_curve(std::move(id), std::move(t), std::move(y)));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(where + ": " + e.what());
    }
  }
  return curves;
}

namespace {

bool
is_json_path(const std::string& path)
{
  return path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0;
}

} // namespace

std::vector<Curve>
read_curves(const std::string& path)
{
  std::ifstream in(path);
  if (!in) {
    throw DataError("cannot open '" + path + "'");
  }
  return is_json_path(path) ? read_curves_json(in, path)
                            : read_curves_csv(in, path);
}

void
write_curves_csv(std::ostream& out, const std::vector<Curve>& curves)
{
  out << "curve_id,t,y\n";
  for (const auto& c : curves) {
    for (std::size_t m = 0; m < c.size(); ++m) {
      out << c.id << ',' << format_double(c.times[m]) << ','
          << format_double(c.values[m]) << '\n';
    }
  }
}

void
write_curves_json(std::ostream& out, const std::vector<Curve>& curves)
{
  // Hand-written so that doubles keep 17 significant digits.
  out << "[";
  for (std::size_t i = 0; i < curves.size(); ++i) {
    const auto& c = curves[i];
    out << (i ? ",\n " : "\n ") << "{\"id\": " << nlohmann::json(c.id).dump()
        << ", \"t\": [";
    for (std::size_t m = 0; m < c.size(); ++m) {
      out << (m ? ", " : "") << format_double(c.times[m]);
    }
    out << "], \"y\": [";
    for (std::size_t m = 0; m < c.size(); ++m) {
      out << (m ? ", " : "") << format_double(c.values[m]);
    }
    out << "]}";
  }
  out << "\n]\n";
}

void
write_curves(const std::string& path, const std::vector<Curve>& curves)
{
  std::ofstream out(path);
  if (!out) {
    throw DataError("cannot write '" + path + "'");
  }
  if (is_json_path(path)) {
    write_curves_json(out, curves);
  } else {
    write_curves_csv(out, curves);
  }
}

} // namespace adasmooth
