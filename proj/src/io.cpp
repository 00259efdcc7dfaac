#include "kmeasure/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

#include "kmeasure/error.hpp"

namespace kmeasure::io {

std::string format_double(double x) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof buffer, x);
  return std::string(buffer, result.ptr);
}

double parse_double(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) {
    text.remove_suffix(1);
  }
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto result = std::from_chars(text.data(), text.data() + text.size(), value);
  if (result.ec != std::errc() || result.ptr != text.data() + text.size()) {
    throw Error(ErrorCode::InvalidArgument, "not a number: '" + std::string(text) + "'");
  }
  return value;
}

std::string measure_to_csv(const DiscreteMeasure& mu) {
  std::string out = "location,weight\n";
  for (std::size_t k = 0; k < mu.size(); ++k) {
    out += format_double(mu.location(k));
    out += ',';
    out += format_double(mu.weight(k));
    out += '\n';
  }
  return out;
}

DiscreteMeasure measure_from_csv(std::string_view text, MakeOptions options) {
  std::vector<double> locations;
  std::vector<double> weights;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (line_no == 1 && line.rfind("location", 0) == 0) continue;
    const std::size_t comma = line.find(',');
    if (comma == std::string_view::npos) {
      throw Error(ErrorCode::Io, "line " + std::to_string(line_no) + ": expected location,weight");
    }
    try {
      locations.push_back(parse_double(line.substr(0, comma)));
      weights.push_back(parse_double(line.substr(comma + 1)));
    } catch (const Error& e) {
      throw Error(ErrorCode::Io, "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return DiscreteMeasure::make(std::move(locations), std::move(weights), options);
}

nlohmann::json measure_to_json(const DiscreteMeasure& mu) {
  nlohmann::json out = nlohmann::json::array();
  for (std::size_t k = 0; k < mu.size(); ++k) out.push_back({mu.location(k), mu.weight(k)});
  return out;
}

DiscreteMeasure measure_from_json(const nlohmann::json& j, MakeOptions options) {
  if (!j.is_array()) throw Error(ErrorCode::Io, "measure JSON must be an array of pairs");
  std::vector<double> locations;
  std::vector<double> weights;
  for (const auto& pair : j) {
    if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() || !pair[1].is_number()) {
      throw Error(ErrorCode::Io, "measure JSON entries must be [location, weight]");
    }
    locations.push_back(pair[0].get<double>());
    weights.push_back(pair[1].get<double>());
  }
  return DiscreteMeasure::make(std::move(locations), std::move(weights), options);
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

}  // namespace kmeasure::io
