#include "nikeq/measure_io.hpp"

#include <cstdlib>

#include "nikeq/errors.hpp"
#include "nikeq/precision.hpp"

namespace nikeq {

double parse_real(const json& v, const std::string& where) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        const std::string s = v.get<std::string>();
        char* end = nullptr;
        const double x = std::strtod(s.c_str(), &end);
        if (end != s.c_str() && *end == '\0') return x;
    }
    throw InputError(where + ": expected a real number (decimal string or number)");
}

json real_array(const std::vector<double>& xs) {
    json a = json::array();
    for (double x : xs) a.push_back(to_decimal(x));
    return a;
}

std::vector<double> parse_real_array(const json& v, const std::string& where) {
    if (!v.is_array()) throw InputError(where + ": expected an array");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(parse_real(v[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

json to_json(const GridMeasure& mu, const json& meta) {
    json j;
    j["nodes"] = real_array(mu.nodes());
    j["cell_widths"] = real_array(mu.widths());
    j["masses"] = real_array(mu.masses());
    j["window"] = real_array({mu.window().lo, mu.window().hi});
    j["meta"] = meta;
    return j;
}

json to_json(const DiscreteMeasure& mu, const json& meta) {
    json j;
    json atoms = json::array();
    for (auto& a : mu.atoms()) atoms.push_back(json::array({to_decimal(a.loc), to_decimal(a.weight)}));
    j["atoms"] = atoms;
    j["meta"] = meta;
    return j;
}

GridMeasure grid_from_json(const json& j) {
    if (!j.is_object()) throw InputError("grid measure: expected a JSON object");
    for (const char* k : {"nodes", "cell_widths", "masses"})
        if (!j.contains(k)) throw InputError(std::string("grid measure: missing field '") + k + "'");
    auto nodes = parse_real_array(j["nodes"], "nodes");
    auto widths = parse_real_array(j["cell_widths"], "cell_widths");
    auto masses = parse_real_array(j["masses"], "masses");
    std::optional<Interval> win;
    if (j.contains("window")) {
        auto w = parse_real_array(j["window"], "window");
        if (w.size() != 2) throw InputError("window: expected [lo, hi]");
        win = Interval{w[0], w[1]};
    }
    return GridMeasure(std::move(nodes), std::move(widths), std::move(masses), win);
}

DiscreteMeasure discrete_from_json(const json& j) {
    if (!j.is_object() || !j.contains("atoms") || !j["atoms"].is_array())
        throw InputError("discrete measure: missing 'atoms' array");
    std::vector<Atom> atoms;
    for (std::size_t i = 0; i < j["atoms"].size(); ++i) {
        const auto& a = j["atoms"][i];
        const std::string where = "atoms[" + std::to_string(i) + "]";
        if (!a.is_array() || a.size() != 2) throw InputError(where + ": expected [location, weight]");
        atoms.push_back({parse_real(a[0], where), parse_real(a[1], where)});
    }
    return DiscreteMeasure(std::move(atoms));
}

AnyMeasure measure_from_json(const json& j) {
    if (j.is_object() && j.contains("atoms")) return discrete_from_json(j);
    return grid_from_json(j);
}

}  // namespace nikeq
