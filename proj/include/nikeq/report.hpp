#pragma once
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "nikeq/measure_io.hpp"

namespace nikeq {

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& p);

struct PlotSeries {
    std::string label;
    std::vector<double> x, y;
    bool markers = false;  // points instead of a polyline
};
struct PlotSpec {
    std::string title, xlabel, ylabel;
    bool logy = false;
};
std::string svg_line_plot(const PlotSpec& spec, const std::vector<PlotSeries>& series);

// CSV with %.17g numbers; NaN is written as "nan".
std::string csv_table(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows);

// The single writer of one run directory.  Every file goes through it so the
// manifest can list it with its digest.
class RunDir {
public:
    explicit RunDir(std::filesystem::path dir);
    const std::filesystem::path& path() const { return dir_; }
    void write_text(const std::string& name, const std::string& content);
    void write_json(const std::string& name, const json& j);
    void check(const std::string& name, bool pass, const std::string& detail = "");
    bool all_passed() const;
    std::string first_failure() const;
    // Writes manifest.json: command echo, config, versions, wall time, file
    // inventory with SHA-256 digests, checks, exit status and error text.
    void write_manifest(const std::string& command, const std::vector<std::string>& argv, const json& config,
                        int exit_status, const std::string& error, double wall_seconds);

private:
    std::filesystem::path dir_;
    std::vector<std::pair<std::string, std::string>> files_;  // name, digest
    json checks_ = json::array();
};

json read_json_file(const std::filesystem::path& p);

// Renders summary.md and SVG plots for a finished run directory into
// <run>/report/.  Returns the exit status (1 when an oracle comparison fails).
int render_report(const std::filesystem::path& run_dir, RunDir& out, std::ostream& log);

}  // namespace nikeq
