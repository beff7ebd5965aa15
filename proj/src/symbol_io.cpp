#include "circpdo/symbol_io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

#include "circpdo/errors.hpp"

namespace circpdo {

namespace {

using ojson = nlohmann::ordered_json;

double unsigned_zero(double v) { return v == 0.0 ? 0.0 : v; }

ojson coeff_triples(const FourierFunction& f, int row, int col) {
  ojson arr = ojson::array();
  for (int m = -f.mode_bound(); m <= f.mode_bound(); ++m) {
    const cplx v = f.coeff(m)(row, col);
    if (v == cplx(0.0)) continue;
    arr.push_back({m, unsigned_zero(v.real()), unsigned_zero(v.imag())});
  }
  return arr;
}

ojson side_to_json(const FourierFunction& f) {
  const int r = f.rank();
  if (r == 1) return coeff_triples(f, 0, 0);
  ojson arr = ojson::array();
  for (int row = 0; row < r; ++row)
    for (int col = 0; col < r; ++col) {
      ojson entry;
      entry["row"] = row;
      entry["col"] = col;
      entry["coeffs"] = coeff_triples(f, row, col);
      arr.push_back(std::move(entry));
    }
  return arr;
}

void read_triples(const ojson& arr, FourierFunction& f, int row, int col) {
  if (!arr.is_array()) throw ParseError("coefficient list must be an array");
  for (const auto& t : arr) {
    if (!t.is_array() || t.size() != 3 || !t[0].is_number_integer() ||
        !t[1].is_number() || !t[2].is_number())
      throw ParseError("coefficient entries must be [mode, re, im] triples");
    const int m = t[0].get<int>();
    if (std::abs(m) > f.mode_bound())
      throw ParseError("coefficient mode exceeds K_x");
    Mat block = f.coeff(m);
    block(row, col) = cplx(t[1].get<double>(), t[2].get<double>());
    f.set_coeff(m, block);
  }
}

FourierFunction side_from_json(const ojson& node, int rank, int K_x) {
  FourierFunction f = FourierFunction::zero(rank, K_x);
  if (rank == 1) {
    read_triples(node, f, 0, 0);
    return f;
  }
  if (!node.is_array()) throw ParseError("component side must be an array");
  for (const auto& entry : node) {
    if (!entry.is_object() || !entry.contains("row") ||
        !entry.contains("col") || !entry.contains("coeffs"))
      throw ParseError("matrix entries need row, col, coeffs");
    const int row = entry["row"].get<int>();
    const int col = entry["col"].get<int>();
    if (row < 0 || row >= rank || col < 0 || col >= rank)
      throw ParseError("matrix entry index out of range");
    read_triples(entry["coeffs"], f, row, col);
  }
  return f;
}

int require_int(const ojson& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number_integer())
    throw ParseError(std::string("missing integer field: ") + key);
  return j[key].get<int>();
}

}  // namespace

std::string symbol_to_json(const FormalSymbol& a) {
  ojson j;
  j["format"] = "circpdo-symbol/1";
  j["order"] = a.order();
  j["depth"] = a.depth();
  j["rank"] = a.rank();
  j["K_x"] = a.mode_bound();
  ojson comps = ojson::array();
  for (int d = 0; d < a.depth(); ++d) {
    ojson comp;
    comp["j"] = d;
    comp["plus"] = side_to_json(a.comp(d).plus);
    comp["minus"] = side_to_json(a.comp(d).minus);
    comps.push_back(std::move(comp));
  }
  j["components"] = std::move(comps);
  return j.dump(2) + "\n";
}

FormalSymbol symbol_from_json(const std::string& text) {
  ojson j;
  try {
    j = ojson::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  try {
    if (!j.is_object() || j.value("format", "") != "circpdo-symbol/1")
      throw ParseError("not a symbol file (format tag missing)");
    const int order = require_int(j, "order");
    const int depth = require_int(j, "depth");
    const int rank = require_int(j, "rank");
    const int K_x = require_int(j, "K_x");
    if (depth < 1 || rank < 1 || K_x < 0)
      throw ParseError("depth, rank must be >= 1 and K_x >= 0");
    if (!j.contains("components") || !j["components"].is_array() ||
        static_cast<int>(j["components"].size()) != depth)
      throw ParseError("components must list exactly depth entries");

    std::vector<HomogeneousPair> comps;
    comps.reserve(depth);
    int expect = 0;
    for (const auto& comp : j["components"]) {
      if (!comp.is_object() || require_int(comp, "j") != expect++)
        throw ParseError("components must be ordered by j = 0..depth-1");
      if (!comp.contains("plus") || !comp.contains("minus"))
        throw ParseError("component needs plus and minus sides");
      comps.push_back({side_from_json(comp["plus"], rank, K_x),
                       side_from_json(comp["minus"], rank, K_x)});
    }
    return FormalSymbol(order, rank, K_x, std::move(comps));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid symbol file: ") + e.what());
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(std::string("inconsistent symbol data: ") + e.what());
  }
}

void write_symbol_file(const std::string& path, const FormalSymbol& a) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open for writing: " + path);
  out << symbol_to_json(a);
  if (!out) throw Error("write failed: " + path);
}

FormalSymbol read_symbol_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open symbol file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return symbol_from_json(buf.str());
}

}  // namespace circpdo
