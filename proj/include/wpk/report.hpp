#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wpk/bounds.hpp"
#include "wpk/krylov.hpp"

namespace wpk {

/// Everything a CLI run records. JSON round-trips losslessly; CSV carries
/// only the residual history.
struct ExperimentReport {
    std::string problem;         // e.g. "cdr m=20 nu=1 c0=1" or a matrix path
    std::string solver;
    std::string preconditioner;
    std::string weight;
    std::string stopping_norm = "weighted";
    double rel_tolerance = 1e-6;
    std::size_t max_iterations = 500;
    std::string status;
    std::size_t iterations = 0;
    std::vector<double> res_w;
    std::vector<double> res_euclid;
    std::optional<BoundReport> bounds;
    double wall_time_seconds = 0.0;
    std::map<std::string, std::string> extra;

    bool operator==(const ExperimentReport&) const = default;
};

/// Copies status, iteration count and residual history from a solve.
void record_trace(ExperimentReport& r, const SolveResult& result);

std::string render_report_json(const ExperimentReport& r);
ExperimentReport parse_report_json(const std::string& text);

/// Header "iteration,res_w,res_euclid" then one row per recorded residual.
std::string render_report_csv(const ExperimentReport& r);

void write_report_json(const ExperimentReport& r, const std::filesystem::path& path);
ExperimentReport read_report_json(const std::filesystem::path& path);
void write_report_csv(const ExperimentReport& r, const std::filesystem::path& path);

}  // namespace wpk
