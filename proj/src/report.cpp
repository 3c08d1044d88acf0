#include "wpk/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "wpk/error.hpp"

namespace wpk {

using nlohmann::json;

namespace {

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> opt_from(const json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<double>();
}

json bounds_to_json(const BoundReport& b) {
    return json{{"lambda_min", opt(b.lambda_min)},
                {"lambda_max", opt(b.lambda_max)},
                {"kappa", opt(b.kappa)},
                {"rho", opt(b.rho)},
                {"fov_distance", opt(b.fov_distance)},
                {"op_norm", opt(b.op_norm)},
                {"elman", opt(b.elman)},
                {"bound1", opt(b.bound1)},
                {"bound2", opt(b.bound2)},
                {"bound3", opt(b.bound3)},
                {"alpha_analytic", opt(b.alpha_analytic)},
                {"bound1_infimum", opt(b.bound1_infimum)},
                {"bound1_starts", b.bound1_starts},
                {"notes", b.notes}};
}

BoundReport bounds_from_json(const json& j) {
    BoundReport b;
    b.lambda_min = opt_from(j, "lambda_min");
    b.lambda_max = opt_from(j, "lambda_max");
    b.kappa = opt_from(j, "kappa");
    b.rho = opt_from(j, "rho");
    b.fov_distance = opt_from(j, "fov_distance");
    b.op_norm = opt_from(j, "op_norm");
    b.elman = opt_from(j, "elman");
    b.bound1 = opt_from(j, "bound1");
    b.bound2 = opt_from(j, "bound2");
    b.bound3 = opt_from(j, "bound3");
    b.alpha_analytic = opt_from(j, "alpha_analytic");
    b.bound1_infimum = opt_from(j, "bound1_infimum");
    b.bound1_starts = j.value("bound1_starts", std::size_t{0});
    b.notes = j.value("notes", std::vector<std::string>{});
    return b;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", v);
    return buf;
}

}  // namespace

void record_trace(ExperimentReport& r, const SolveResult& result) {
    r.status = to_string(result.status());
    r.iterations = result.iterations;
    r.res_w = result.trace.residual_norm_weighted;
    r.res_euclid = result.trace.residual_norm_euclidean;
}

std::string render_report_json(const ExperimentReport& r) {
    json j{{"problem", r.problem},
           {"solver", r.solver},
           {"preconditioner", r.preconditioner},
           {"weight", r.weight},
           {"stopping_norm", r.stopping_norm},
           {"rel_tolerance", r.rel_tolerance},
           {"max_iterations", r.max_iterations},
           {"status", r.status},
           {"iterations", r.iterations},
           {"res_w", r.res_w},
           {"res_euclid", r.res_euclid},
           {"bounds", r.bounds ? bounds_to_json(*r.bounds) : json(nullptr)},
           {"wall_time_seconds", r.wall_time_seconds},
           {"extra", r.extra}};
    return j.dump(2) + "\n";
}

ExperimentReport parse_report_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw IoError(std::string("report JSON: ") + e.what());
    }
    ExperimentReport r;
    try {
        r.problem = j.at("problem").get<std::string>();
        r.solver = j.at("solver").get<std::string>();
        r.preconditioner = j.at("preconditioner").get<std::string>();
        r.weight = j.at("weight").get<std::string>();
        r.stopping_norm = j.at("stopping_norm").get<std::string>();
        r.rel_tolerance = j.at("rel_tolerance").get<double>();
        r.max_iterations = j.at("max_iterations").get<std::size_t>();
        r.status = j.at("status").get<std::string>();
        r.iterations = j.at("iterations").get<std::size_t>();
        r.res_w = j.at("res_w").get<std::vector<double>>();
        r.res_euclid = j.at("res_euclid").get<std::vector<double>>();
        if (!j.at("bounds").is_null()) r.bounds = bounds_from_json(j.at("bounds"));
        r.wall_time_seconds = j.at("wall_time_seconds").get<double>();
        r.extra = j.at("extra").get<std::map<std::string, std::string>>();
    } catch (const json::exception& e) {
        throw IoError(std::string("report JSON: ") + e.what());
    }
    return r;
}

std::string render_report_csv(const ExperimentReport& r) {
    std::string out = "iteration,res_w,res_euclid\n";
    const std::size_t rows = std::min(r.res_w.size(), r.res_euclid.size());
    for (std::size_t i = 0; i < rows; ++i)
        out += std::to_string(i) + "," + format_double(r.res_w[i]) + "," + format_double(r.res_euclid[i]) + "\n";
    return out;
}

namespace {

void write_text(const std::string& text, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(path.string() + ": cannot open for writing");
    out << text;
    if (!out) throw IoError(path.string() + ": write failed");
}

}  // namespace

void write_report_json(const ExperimentReport& r, const std::filesystem::path& path) {
    write_text(render_report_json(r), path);
}

ExperimentReport read_report_json(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path.string() + ": cannot open for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_report_json(ss.str());
}

void write_report_csv(const ExperimentReport& r, const std::filesystem::path& path) {
    write_text(render_report_csv(r), path);
}

}  // namespace wpk
