#include "core/canon_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "core/errors.hpp"

namespace blowup {

namespace {

std::string render_double(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void render(const nlohmann::json& j, std::string& out, int indent, int depth) {
  std::string pad(static_cast<std::size_t>(indent) * depth, ' ');
  std::string pad_in(static_cast<std::size_t>(indent) * (depth + 1), ' ');
  switch (j.type()) {
    case nlohmann::json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {  // map order: sorted keys
        if (!first) out += ",\n";
        first = false;
        out += pad_in + nlohmann::json(it.key()).dump() + ": ";
        render(it.value(), out, indent, depth + 1);
      }
      out += "\n" + pad + "}";
      return;
    }
    case nlohmann::json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ",\n";
        out += pad_in;
        render(j[i], out, indent, depth + 1);
      }
      out += "\n" + pad + "]";
      return;
    }
    case nlohmann::json::value_t::number_float:
      out += render_double(j.get<double>());
      return;
    default:
      out += j.dump();  // strings (escaped), integers, booleans, null
      return;
  }
}

}  // namespace

std::string canonical_json(const nlohmann::json& j, int indent) {
  std::string out;
  render(j, out, indent, 0);
  out += "\n";
  return out;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), Errc::io, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), Errc::io, "cannot open " + path + " for writing");
  out << content;
  out.flush();
  require(out.good(), Errc::io, "short write to " + path);
}

void write_json_file(const std::string& path, const nlohmann::json& j) {
  write_text_file(path, canonical_json(j));
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  require(!header.empty(), Errc::invalid_argument, "csv: empty header");
  std::string out;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) out += ',';
    out += header[i];
  }
  out += '\n';
  for (const auto& row : rows) {
    require(row.size() == header.size(), Errc::invalid_argument,
            "csv: row width does not match header");
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      if (std::isnan(row[i]))
        out += "nan";  // parseable by numpy/pandas, unlike JSON's null
      else if (std::isinf(row[i]))
        out += row[i] > 0 ? "inf" : "-inf";
      else
        out += render_double(row[i]);
    }
    out += '\n';
  }
  write_text_file(path, out);
}

uint64_t fnv1a64(std::string_view s) {
  uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string param_hash(const nlohmann::json& j) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(canonical_json(j, 0))));
  return buf;
}

}  // namespace blowup
