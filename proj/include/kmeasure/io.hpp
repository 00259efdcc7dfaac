#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "kmeasure/measure.hpp"

namespace kmeasure::io {

/// Shortest decimal form that parses back to the same double.
std::string format_double(double x);
double parse_double(std::string_view text);

/// CSV with header `location,weight`, ascending.
std::string measure_to_csv(const DiscreteMeasure& mu);
DiscreteMeasure measure_from_csv(std::string_view text, MakeOptions options = {});

/// Array of [location, weight] pairs.
nlohmann::json measure_to_json(const DiscreteMeasure& mu);
DiscreteMeasure measure_from_json(const nlohmann::json& j, MakeOptions options = {});

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view content);

}  // namespace kmeasure::io
