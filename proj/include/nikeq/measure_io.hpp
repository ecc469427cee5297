#pragma once
#include <string>

#include "json.hpp"
#include "nikeq/measures.hpp"

namespace nikeq {

using json = nlohmann::ordered_json;

// Reals are written as decimal strings; numbers are accepted on input too.
json to_json(const GridMeasure& mu, const json& meta = json::object());
json to_json(const DiscreteMeasure& mu, const json& meta = json::object());
GridMeasure grid_from_json(const json& j);
DiscreteMeasure discrete_from_json(const json& j);
AnyMeasure measure_from_json(const json& j);

double parse_real(const json& v, const std::string& where);
json real_array(const std::vector<double>& xs);
std::vector<double> parse_real_array(const json& v, const std::string& where);

}  // namespace nikeq
