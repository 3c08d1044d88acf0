#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"

#include "wpk/bounds.hpp"
#include "wpk/cdr.hpp"
#include "wpk/error.hpp"
#include "wpk/krylov.hpp"
#include "wpk/matrix_io.hpp"
#include "wpk/report.hpp"
#include "wpk/schwarz.hpp"

namespace wpk::cli {

namespace {

constexpr std::size_t kSolveBudget = 200;
constexpr std::size_t kDenseBudget = 50;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : std::string("n/a"); }

// ---------------------------------------------------------------- flags

struct ProblemFlags {
    std::vector<std::string> cdr;
    std::string matrix;
    std::string matrix_skew;
    std::string rhs;
    bool force = false;
};

struct PrecondFlags {
    std::string precond = "identity";
    std::size_t n_sub = 4;
    std::string layout = "strips";
    std::size_t overlap = 1;
};

struct SolverFlags {
    std::string solver = "gcr";
    std::string weight = "identity";
    double tol = 1e-6;
    std::size_t max_iter = 500;
    std::string stop_norm = "weighted";
    std::string breakdown = "halt";
};

const std::vector<std::string> kPreconds{"identity", "one-level", "two-level", "one-level-nonsym"};

void add_problem_flags(CLI::App* app, ProblemFlags& f) {
    app->add_option("--cdr", f.cdr, "CDR problem as key=value tokens: m=INT nu=FLOAT c0=FLOAT [a=0|rotating] [bc=elimination|penalization]")
        ->expected(1, 5);
    app->add_option("--matrix", f.matrix, "Matrix Market file with A (or its symmetric part with --matrix-skew)");
    app->add_option("--matrix-skew", f.matrix_skew, "Matrix Market file with the skew part N; A = M + N");
    app->add_option("--rhs", f.rhs, "right-hand side, one value per line");
    app->add_flag("--force", f.force, "ignore the desk-scale size budgets");
}

void add_precond_flags(CLI::App* app, PrecondFlags& f) {
    app->add_option("--precond", f.precond)->check(CLI::IsMember(kPreconds))->capture_default_str();
    app->add_option("--n-sub", f.n_sub, "number of subdomains")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--layout", f.layout, "strips | grid | grid:PxQ")->capture_default_str();
    app->add_option("--overlap", f.overlap, "overlap layers")->capture_default_str();
}

void add_solver_flags(CLI::App* app, SolverFlags& f) {
    app->add_option("--solver", f.solver,
                    "gcr | gcr-left | whp-gcr | whp-gcr-alt-a | whp-gcr-alt-b | mr | orthomin:K | gcr-restart:K | "
                    "gmres-oracle")
        ->capture_default_str();
    app->add_option("--weight", f.weight)->check(CLI::IsMember({"identity", "precond"}))->capture_default_str();
    app->add_option("--tol", f.tol)->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--max-iter", f.max_iter)->capture_default_str();
    app->add_option("--stop-norm", f.stop_norm)->check(CLI::IsMember({"weighted", "euclidean"}))->capture_default_str();
    app->add_option("--breakdown", f.breakdown, "halt | orthodir")
        ->check(CLI::IsMember({"halt", "orthodir"}))
        ->capture_default_str();
}

// ---------------------------------------------------------------- problem

struct CdrArgs {
    std::size_t m = 20;
    double nu = 1.0;
    double c0 = 1.0;
    bool zero_convection = false;
    BoundaryMode bc = BoundaryMode::elimination;
};

CdrArgs parse_cdr(const std::vector<std::string>& tokens) {
    CdrArgs c;
    for (const auto& tok : tokens) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) throw UsageError("--cdr: expected key=value, got '" + tok + "'");
        const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
        try {
            if (key == "m") {
                c.m = std::stoul(val);
            } else if (key == "nu") {
                c.nu = std::stod(val);
            } else if (key == "c0") {
                c.c0 = std::stod(val);
            } else if (key == "a") {
                if (val != "0" && val != "rotating") throw UsageError("--cdr: a must be 0 or rotating");
                c.zero_convection = val == "0";
            } else if (key == "bc") {
                if (val == "elimination") c.bc = BoundaryMode::elimination;
                else if (val == "penalization") c.bc = BoundaryMode::penalization;
                else throw UsageError("--cdr: bc must be elimination or penalization");
            } else {
                throw UsageError("--cdr: unknown key '" + key + "'");
            }
        } catch (const std::invalid_argument&) {
            throw UsageError("--cdr: bad value in '" + tok + "'");
        } catch (const std::out_of_range&) {
            throw UsageError("--cdr: value out of range in '" + tok + "'");
        }
    }
    if (c.m < 2) throw UsageError("--cdr: m must be at least 2");
    if (!(c.nu > 0.0) || !(c.c0 >= 0.0)) throw UsageError("--cdr: nu must be positive and c0 nonnegative");
    return c;
}

CdrProblemSpec make_spec(const CdrArgs& c) {
    CdrProblemSpec spec = rotating_flow_coefficients(c.m, c.nu, c.c0);
    if (c.zero_convection) spec.a = [](double, double) { return std::array<double, 2>{0.0, 0.0}; };
    spec.bc = c.bc;
    return spec;
}

std::string describe(const CdrArgs& c) {
    std::string s = "cdr m=" + std::to_string(c.m) + " nu=" + fmt(c.nu) + " c0=" + fmt(c.c0);
    if (c.zero_convection) s += " a=0";
    if (c.bc == BoundaryMode::penalization) s += " bc=penalization";
    return s;
}

struct Problem {
    std::string description;
    CsrMatrix a;
    CsrMatrix m_sym;
    Vector b;
    std::optional<AssembledCdr> cdr;
    std::optional<CdrProblemSpec> spec;
};

void check_problem_flags(const ProblemFlags& f, std::size_t budget) {
    const bool has_cdr = !f.cdr.empty();
    const bool has_matrix = !f.matrix.empty();
    if (has_cdr == has_matrix) throw UsageError("exactly one of --cdr or --matrix is required");
    if (has_matrix && f.rhs.empty()) throw UsageError("--matrix requires --rhs");
    if (!has_matrix && !f.matrix_skew.empty()) throw UsageError("--matrix-skew requires --matrix");
    if (has_cdr) {
        const CdrArgs c = parse_cdr(f.cdr);
        if (c.m > budget && !f.force)
            throw UsageError("m=" + std::to_string(c.m) + " exceeds the desk budget m <= " + std::to_string(budget) +
                             " (use --force)");
    }
}

Problem problem_from_cdr(const CdrArgs& c) {
    Problem p;
    p.description = describe(c);
    p.spec = make_spec(c);
    p.cdr = assemble(*p.spec);
    p.a = p.cdr->system_matrix();
    p.m_sym = p.cdr->m_matrix;
    p.b = p.cdr->rhs;
    return p;
}

Problem load_problem(const ProblemFlags& f) {
    if (!f.cdr.empty()) return problem_from_cdr(parse_cdr(f.cdr));
    Problem p;
    p.description = f.matrix;
    CsrMatrix a = read_matrix_market(f.matrix);
    if (a.rows() != a.cols()) throw UsageError("--matrix must be square");
    if (!f.matrix_skew.empty()) {
        const CsrMatrix n = read_matrix_market(f.matrix_skew);
        if (n.rows() != a.rows() || n.cols() != a.cols()) throw UsageError("--matrix-skew dimension differs");
        p.m_sym = a;
        p.a = combine(1.0, a, 1.0, n);
        p.description += " + " + f.matrix_skew;
    } else {
        p.m_sym = combine(0.5, a, 0.5, a.transpose());
        p.a = std::move(a);
    }
    p.b = read_vector(f.rhs);
    if (p.b.size() != p.a.rows()) throw UsageError("--rhs length differs from the matrix dimension");
    return p;
}

// ---------------------------------------------------------------- preconditioner

PartitionSpec parse_layout(const PrecondFlags& f) {
    PartitionSpec ps;
    ps.n_subdomains = f.n_sub;
    ps.overlap_layers = f.overlap;
    if (f.layout == "strips") {
        ps.layout = PartitionLayout::strips;
    } else if (f.layout == "grid") {
        ps.layout = PartitionLayout::grid;
        const auto g = near_square_grid(f.n_sub);
        ps.grid_p = g[0];
        ps.grid_q = g[1];
    } else if (f.layout.rfind("grid:", 0) == 0) {
        ps.layout = PartitionLayout::grid;
        const std::string dims = f.layout.substr(5);
        const auto x = dims.find('x');
        try {
            if (x == std::string::npos) throw std::invalid_argument("no x");
            ps.grid_p = std::stoul(dims.substr(0, x));
            ps.grid_q = std::stoul(dims.substr(x + 1));
        } catch (const std::exception&) {
            throw UsageError("--layout: expected grid:PxQ, got '" + f.layout + "'");
        }
        if (ps.grid_p == 0 || ps.grid_q == 0) throw UsageError("--layout: grid dimensions must be positive");
        ps.n_subdomains = ps.grid_p * ps.grid_q;
    } else {
        throw UsageError("--layout: expected strips, grid or grid:PxQ");
    }
    return ps;
}

struct Precond {
    PreconditionerHandle handle;
    std::shared_ptr<SchwarzPreconditioner> schwarz;
};

Precond build_precond(const PrecondFlags& f, const Problem& p) {
    const std::size_t n = p.a.rows();
    if (f.precond == "identity") return {PreconditionerHandle::identity(n), nullptr};
    PartitionSpec ps = parse_layout(f);
    std::vector<std::array<std::size_t, 2>> coords;
    if (ps.layout == PartitionLayout::grid) {
        if (!p.cdr) throw UsageError("--layout grid needs a --cdr problem");
        coords = lattice_coordinates(*p.cdr);
    }
    SubdomainMaps maps = build_partition(p.m_sym, ps, coords);
    std::shared_ptr<SchwarzPreconditioner> s;
    if (f.precond == "one-level")
        s = std::make_shared<SchwarzPreconditioner>(p.m_sym, std::move(maps), SchwarzMode::one_level_sym);
    else if (f.precond == "two-level")
        s = std::make_shared<SchwarzPreconditioner>(p.m_sym, std::move(maps), SchwarzMode::two_level_sym);
    else
        s = std::make_shared<SchwarzPreconditioner>(p.a, std::move(maps), SchwarzMode::one_level_nonsym);
    return {s->handle(), s};
}

// ---------------------------------------------------------------- solvers

struct SolverChoice {
    std::string name;
    std::size_t k = 0;
};

bool is_whp(const std::string& name) { return name.rfind("whp-gcr", 0) == 0; }

SolverChoice parse_solver(const std::string& s) {
    static const std::vector<std::string> plain{"gcr", "gcr-left", "whp-gcr", "whp-gcr-alt-a", "whp-gcr-alt-b",
                                                "mr", "gmres-oracle"};
    if (std::find(plain.begin(), plain.end(), s) != plain.end()) return {s, 0};
    for (const std::string prefix : {"orthomin", "gcr-restart"}) {
        if (s.rfind(prefix + ":", 0) == 0) {
            try {
                std::size_t pos = 0;
                const std::string rest = s.substr(prefix.size() + 1);
                const unsigned long k = std::stoul(rest, &pos);
                if (pos != rest.size()) throw std::invalid_argument("trailing");
                if (prefix == "gcr-restart" && k == 0) throw UsageError("--solver: gcr-restart needs K >= 1");
                return {prefix, k};
            } catch (const std::logic_error&) {
                throw UsageError("--solver: bad K in '" + s + "'");
            }
        }
    }
    throw UsageError("--solver: unknown solver '" + s + "'");
}

void check_solver_flags(const SolverFlags& s, const PrecondFlags& p) {
    const SolverChoice choice = parse_solver(s.solver);
    const bool spd = p.precond != "one-level-nonsym";
    if (is_whp(choice.name) && !spd) throw UsageError("--solver " + s.solver + " needs a symmetric preconditioner");
    if (s.weight == "precond" && !spd) throw UsageError("--weight precond needs a symmetric preconditioner");
}

SolveConfig make_config(const SolverFlags& s) {
    SolveConfig cfg;
    cfg.max_iterations = s.max_iter;
    cfg.rel_tolerance = s.tol;
    cfg.stopping_norm = s.stop_norm == "euclidean" ? StoppingNorm::euclidean : StoppingNorm::weighted;
    cfg.breakdown_policy = s.breakdown == "orthodir" ? BreakdownPolicy::restart_orthodir_style : BreakdownPolicy::halt;
    return cfg;
}

SolveResult run_solver(const SolverFlags& s, const LinearSystem& sys, const PreconditionerHandle& h) {
    const SolverChoice c = parse_solver(s.solver);
    const SolveConfig cfg = make_config(s);
    if (c.name == "whp-gcr") return whp_gcr(sys, h, cfg);
    if (c.name == "whp-gcr-alt-a") return whp_gcr_alt_a(sys, h, cfg);
    if (c.name == "whp-gcr-alt-b") return whp_gcr_alt_b(sys, h, cfg);
    const WeightOperator w = s.weight == "precond" ? h.as_weight() : WeightOperator::identity(sys.a.dim());
    if (c.name == "gcr") return wp_gcr_right(sys, h, w, cfg);
    if (c.name == "gcr-left") return wp_gcr_left(sys, h, w, cfg);
    if (c.name == "mr") return wp_mr(sys, h, w, cfg);
    if (c.name == "orthomin") return wp_orthomin_k(sys, h, w, c.k, cfg);
    if (c.name == "gcr-restart") return wp_gcr_restarted(sys, h, w, c.k, cfg);
    return gmres_arnoldi_oracle(sys, h, w, cfg);
}

int exit_code(SolveStatus s) {
    switch (s) {
        case SolveStatus::converged: return kConverged;
        case SolveStatus::max_iter: return kMaxIter;
        case SolveStatus::breakdown: return kBreakdown;
    }
    return kUsage;
}

void write_text(const std::string& text, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError(path + ": cannot open for writing");
    f << text;
    if (!f) throw IoError(path + ": write failed");
}

// ---------------------------------------------------------------- solve

struct SolveCommand {
    ProblemFlags problem;
    PrecondFlags precond;
    SolverFlags solver;
    std::string out;
    std::string format = "json";
    std::string partition_out;
};

int cmd_solve(const SolveCommand& c, std::ostream& out) {
    check_problem_flags(c.problem, kSolveBudget);
    check_solver_flags(c.solver, c.precond);
    if (c.precond.precond != "identity") (void)parse_layout(c.precond);
    if (!c.partition_out.empty() && c.precond.precond == "identity")
        throw UsageError("--partition-out needs a Schwarz preconditioner");

    const auto t0 = std::chrono::steady_clock::now();
    const Problem p = load_problem(c.problem);
    const Precond pre = build_precond(c.precond, p);
    const LinearSystem sys{LinearOperator::from_csr(p.a), p.b, {}};
    const SolveResult result = run_solver(c.solver, sys, pre.handle);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    ExperimentReport r;
    r.problem = p.description;
    r.solver = c.solver.solver;
    r.preconditioner = c.precond.precond;
    r.weight = is_whp(c.solver.solver) ? "precond" : c.solver.weight;
    r.stopping_norm = c.solver.stop_norm;
    r.rel_tolerance = c.solver.tol;
    r.max_iterations = c.solver.max_iter;
    record_trace(r, result);
    r.wall_time_seconds = seconds;
    if (pre.schwarz) {
        r.extra["n_subdomains"] = std::to_string(pre.schwarz->maps().subdomains.size());
        r.extra["layout"] = c.precond.layout;
        r.extra["overlap"] = std::to_string(c.precond.overlap);
        r.extra["k0"] = std::to_string(pre.schwarz->maps().k0);
        if (!c.partition_out.empty()) write_text(partition_json(pre.schwarz->maps()) + "\n", c.partition_out);
    }
    if (result.trace.breakdown) r.extra["breakdown_iteration"] = std::to_string(result.trace.breakdown->iteration);

    if (!c.out.empty()) {
        if (c.format == "csv") write_report_csv(r, c.out);
        else write_report_json(r, c.out);
    }
    out << "status=" << r.status << " iterations=" << r.iterations << " res_w=" << fmt(r.res_w.back())
        << " res_euclid=" << fmt(r.res_euclid.back()) << "\n";
    if (result.trace.breakdown)
        out << "breakdown at iteration " << result.trace.breakdown->iteration
            << " gamma=" << fmt(result.trace.breakdown->gamma) << "\n";
    return exit_code(result.status());
}

// ---------------------------------------------------------------- rho-table

struct RhoCommand {
    std::vector<std::size_t> m_values{10, 30};
    double nu = 1.0;
    double c0 = 1.0;
    bool zero_convection = false;
    std::string bc = "elimination";
    bool force = false;
    std::string out;
};

int cmd_rho_table(const RhoCommand& c, std::ostream& out) {
    if (c.m_values.empty()) throw UsageError("--m needs at least one value");
    for (std::size_t m : c.m_values)
        if (m < 2) throw UsageError("--m values must be at least 2");
    if (!(c.nu > 0.0) || !(c.c0 >= 0.0)) throw UsageError("--nu must be positive and --c0 nonnegative");

    std::string table = "m,h,rho,analytic_bound\n";
    for (std::size_t m : c.m_values) {
        if (m > kDenseBudget && !c.force) {
            table += "# skipped m=" + std::to_string(m) + ": dense eigen budget m <= " + std::to_string(kDenseBudget) +
                     " (use --force)\n";
            continue;
        }
        CdrArgs a;
        a.m = m;
        a.nu = c.nu;
        a.c0 = c.c0;
        a.zero_convection = c.zero_convection;
        a.bc = c.bc == "penalization" ? BoundaryMode::penalization : BoundaryMode::elimination;
        const CdrProblemSpec spec = make_spec(a);
        const AssembledCdr cdr = assemble(spec);
        const double rho = spectral_radius_skew(split(cdr.m_matrix, cdr.n_matrix));
        std::optional<double> bound;
        try {
            bound = analytic_rho_bound(spec);
        } catch (const InvalidArgument&) {
            // c0 + div(a)/2 vanishes somewhere; the bound is infinite
        }
        table += std::to_string(m) + "," + fmt(1.0 / static_cast<double>(m)) + "," + fmt(rho) + "," + fmt(bound) + "\n";
    }
    out << table;
    if (!c.out.empty()) write_text(table, c.out);
    return kConverged;
}

// ---------------------------------------------------------------- sweep

struct SweepCommand {
    std::string axis;
    std::vector<std::string> values;
    std::size_t m = 40;
    double nu = 1.0;
    double c0 = 1.0;
    PrecondFlags precond{"two-level", 4, "grid", 1};
    SolverFlags solver{"whp-gcr", "identity", 1e-6, 500, "weighted", "halt"};
    bool force = false;
    std::string out;
};

int cmd_sweep(const SweepCommand& c, std::ostream& out) {
    if (c.values.empty()) throw UsageError("--values needs at least one entry");
    const bool inner = c.axis == "inner_product";
    if (inner && c.precond.precond == "one-level-nonsym")
        throw UsageError("inner_product sweep needs a symmetric preconditioner");
    check_solver_flags(c.solver, c.precond);
    if (c.precond.precond != "identity") (void)parse_layout(c.precond);

    struct Point {
        std::string label;
        CdrArgs args;
        PrecondFlags precond;
    };
    std::vector<Point> points;
    for (const auto& v : c.values) {
        Point pt{v, {}, c.precond};
        pt.args.m = c.m;
        pt.args.nu = c.nu;
        pt.args.c0 = c.c0;
        try {
            if (c.axis == "n_subdomains" || inner) {
                pt.precond.n_sub = std::stoul(v);
                if (pt.precond.n_sub == 0) throw UsageError("--values: subdomain counts must be positive");
            } else if (c.axis == "mesh") {
                pt.args.m = std::stoul(v);
            } else if (c.axis == "coefficient") {
                pt.args.nu = pt.args.c0 = std::stod(v);
            }
        } catch (const std::logic_error&) {
            throw UsageError("--values: bad entry '" + v + "'");
        }
        if (pt.args.m < 2) throw UsageError("--values: m must be at least 2");
        if (!(pt.args.nu > 0.0)) throw UsageError("--values: coefficients must be positive");
        if (pt.args.m > kSolveBudget && !c.force)
            throw UsageError("m=" + std::to_string(pt.args.m) + " exceeds the desk budget m <= " +
                             std::to_string(kSolveBudget) + " (use --force)");
        points.push_back(std::move(pt));
    }

    std::string table = inner ? "n_subdomains,gmres_iterations,whp_iterations\n" : c.axis + ",iterations,status\n";
    int worst = kConverged;
    for (const Point& pt : points) {
        const Problem p = problem_from_cdr(pt.args);
        const Precond pre = build_precond(pt.precond, p);
        const LinearSystem sys{LinearOperator::from_csr(p.a), p.b, {}};
        if (inner) {
            SolverFlags s = c.solver;
            s.stop_norm = "euclidean";
            const SolveConfig cfg = make_config(s);
            const SolveResult g = gmres_arnoldi_oracle(sys, pre.handle, WeightOperator::identity(p.a.rows()), cfg);
            const SolveResult w = whp_gcr(sys, pre.handle, cfg);
            worst = std::max({worst, exit_code(g.status()), exit_code(w.status())});
            table += pt.label + "," + std::to_string(g.iterations) + "," + std::to_string(w.iterations) + "\n";
        } else {
            const SolveResult r = run_solver(c.solver, sys, pre.handle);
            worst = std::max(worst, exit_code(r.status()));
            table += pt.label + "," + std::to_string(r.iterations) + "," + to_string(r.status()) + "\n";
        }
    }
    out << table;
    if (!c.out.empty()) write_text(table, c.out);
    return worst;
}

// ---------------------------------------------------------------- bounds

struct BoundsCommand {
    ProblemFlags problem;
    PrecondFlags precond;
    SolverFlags solver{"whp-gcr", "precond", 1e-6, 500, "weighted", "halt"};
    std::optional<double> kappa;
    std::optional<double> rho;
    bool run_solver = false;
    std::uint64_t seed = 0xC0FFEE;
    std::string out;
};

int cmd_bounds(const BoundsCommand& c, std::ostream& out) {
    if (c.kappa || c.rho) {
        if (!c.kappa || !c.rho) throw UsageError("--kappa and --rho go together");
        if (!c.problem.cdr.empty() || !c.problem.matrix.empty())
            throw UsageError("--kappa/--rho cannot be combined with a problem");
        if (!(*c.kappa >= 1.0) || !(*c.rho >= 0.0)) throw UsageError("--kappa must be >= 1 and --rho >= 0");
        const double b3 = contraction_from_kappa_rho(*c.kappa, *c.rho);
        const auto pred = predicted_iterations(b3);
        out << "kappa=" << fmt(*c.kappa) << "\nrho=" << fmt(*c.rho) << "\nbound3=" << fmt(b3)
            << "\npredicted_iterations=" << (pred ? std::to_string(*pred) : std::string("n/a")) << "\n";
        return kConverged;
    }
    check_problem_flags(c.problem, kDenseBudget);
    check_solver_flags(c.solver, c.precond);
    if (c.precond.precond != "identity") (void)parse_layout(c.precond);

    const auto t0 = std::chrono::steady_clock::now();
    const Problem p = load_problem(c.problem);
    if (p.a.rows() > kDensifyLimit) throw UsageError("problem too large for dense bound computations");
    const Precond pre = build_precond(c.precond, p);
    const LinearOperator a = LinearOperator::from_csr(p.a);
    BoundOptions opt;
    opt.seed = c.seed;
    const bool w_is_h = is_whp(c.solver.solver) || c.solver.weight == "precond";
    BoundReport rep = w_is_h ? compute_bound_report(a, pre.handle, opt)
                             : compute_bound_report(a, pre.handle, WeightOperator::identity(p.a.rows()), opt);
    if (p.spec) {
        try {
            rep.alpha_analytic = analytic_rho_bound(*p.spec);
        } catch (const InvalidArgument& e) {
            rep.notes.push_back(e.what());
        }
    }
    const auto pred = rep.bound3 ? predicted_iterations(*rep.bound3) : std::nullopt;

    out << "lambda_min=" << fmt(rep.lambda_min) << "\nlambda_max=" << fmt(rep.lambda_max)
        << "\nkappa=" << fmt(rep.kappa) << "\nrho=" << fmt(rep.rho) << "\nfov_distance=" << fmt(rep.fov_distance)
        << "\nop_norm=" << fmt(rep.op_norm) << "\nelman=" << fmt(rep.elman) << "\nbound1=" << fmt(rep.bound1)
        << "\nbound2=" << fmt(rep.bound2) << "\nbound3=" << fmt(rep.bound3)
        << "\nalpha_analytic=" << fmt(rep.alpha_analytic)
        << "\npredicted_iterations=" << (pred ? std::to_string(*pred) : std::string("n/a")) << "\n";
    if (pre.schwarz) out << "k0=" << pre.schwarz->maps().k0 << "\n";
    for (const auto& note : rep.notes) out << "# " << note << "\n";

    ExperimentReport r;
    r.problem = p.description;
    r.solver = c.solver.solver;
    r.preconditioner = c.precond.precond;
    r.weight = w_is_h ? "precond" : "identity";
    r.stopping_norm = c.solver.stop_norm;
    r.rel_tolerance = c.solver.tol;
    r.max_iterations = c.solver.max_iter;
    int code = kConverged;
    if (c.run_solver) {
        const SolveResult result = run_solver(c.solver, LinearSystem{a, p.b, {}}, pre.handle);
        record_trace(r, result);
        out << "actual_iterations=" << result.iterations << " status=" << to_string(result.status()) << "\n";
        code = exit_code(result.status());
    }
    r.bounds = rep;
    r.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!c.out.empty()) write_report_json(r, c.out);
    return code;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Weighted and preconditioned Krylov solvers, bounds and CDR experiments", "wpk"};
    app.require_subcommand(1);

    SolveCommand solve;
    CLI::App* s = app.add_subcommand("solve", "solve one system and write a report");
    add_problem_flags(s, solve.problem);
    add_precond_flags(s, solve.precond);
    add_solver_flags(s, solve.solver);
    s->add_option("--out", solve.out, "report path");
    s->add_option("--format", solve.format)->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
    s->add_option("--partition-out", solve.partition_out, "write dof -> subdomain memberships as JSON");

    RhoCommand rho;
    CLI::App* r = app.add_subcommand("rho-table", "spectral radius of M^{-1} N over mesh sizes");
    r->add_option("--m", rho.m_values, "mesh divisions, comma separated")->delimiter(',')->capture_default_str();
    r->add_option("--nu", rho.nu)->capture_default_str();
    r->add_option("--c0", rho.c0)->capture_default_str();
    r->add_flag("--zero-convection", rho.zero_convection, "use a = 0");
    r->add_option("--bc", rho.bc)->check(CLI::IsMember({"elimination", "penalization"}))->capture_default_str();
    r->add_flag("--force", rho.force, "ignore the dense budget");
    r->add_option("--out", rho.out, "CSV path");

    SweepCommand sweep;
    CLI::App* w = app.add_subcommand("sweep", "iteration counts along one parameter axis");
    w->add_option("--axis", sweep.axis)
        ->required()
        ->check(CLI::IsMember({"n_subdomains", "mesh", "coefficient", "inner_product"}));
    w->add_option("--values", sweep.values, "comma separated axis values")->delimiter(',')->required();
    w->add_option("--m", sweep.m)->capture_default_str();
    w->add_option("--nu", sweep.nu)->capture_default_str();
    w->add_option("--c0", sweep.c0)->capture_default_str();
    add_precond_flags(w, sweep.precond);
    add_solver_flags(w, sweep.solver);
    w->add_flag("--force", sweep.force, "ignore the solve budget");
    w->add_option("--out", sweep.out, "CSV path");

    BoundsCommand bounds;
    CLI::App* b = app.add_subcommand("bounds", "convergence bound quantities");
    add_problem_flags(b, bounds.problem);
    add_precond_flags(b, bounds.precond);
    add_solver_flags(b, bounds.solver);
    b->add_option("--kappa", bounds.kappa, "formula mode: condition number");
    b->add_option("--rho", bounds.rho, "formula mode: spectral radius of M^{-1} N");
    b->add_flag("--run", bounds.run_solver, "also run the solver and print its iteration count");
    b->add_option("--seed", bounds.seed, "seed for the bound1 multistart")->capture_default_str();
    b->add_option("--out", bounds.out, "JSON report path");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    if (!reversed.empty()) reversed.pop_back();  // program name
    try {
        app.parse(std::move(reversed));
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kConverged : kUsage;
    }

    try {
        if (s->parsed()) return cmd_solve(solve, out);
        if (r->parsed()) return cmd_rho_table(rho, out);
        if (w->parsed()) return cmd_sweep(sweep, out);
        return cmd_bounds(bounds, out);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return kUsage;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    }
}

}  // namespace wpk::cli
