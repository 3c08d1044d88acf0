#include "wpk/schwarz.hpp"

#include <algorithm>
#include <cmath>
#include <variant>

#include "json.hpp"

#include "wpk/eigen.hpp"
#include "wpk/error.hpp"

namespace wpk {

struct SchwarzPreconditioner::Local {
    std::vector<std::size_t> dofs;
    std::variant<CholeskyFactor, LuFactor> factor;
};

namespace {

/// Splits [0, count) into `parts` contiguous ranges whose sizes differ by at most one.
std::vector<std::size_t> even_cuts(std::size_t count, std::size_t parts) {
    std::vector<std::size_t> cuts(parts + 1);
    for (std::size_t k = 0; k <= parts; ++k) cuts[k] = k * count / parts;
    return cuts;
}

std::vector<std::size_t> grow(const CsrMatrix& graph, const std::vector<std::size_t>& set) {
    std::vector<char> in(graph.rows(), 0);
    for (std::size_t i : set) in[i] = 1;
    std::vector<std::size_t> out = set;
    const auto offs = graph.row_offsets();
    const auto cols = graph.col_indices();
    for (std::size_t i : set)
        for (std::size_t k = offs[i]; k < offs[i + 1]; ++k)
            if (!in[cols[k]]) {
                in[cols[k]] = 1;
                out.push_back(cols[k]);
            }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

std::array<std::size_t, 2> near_square_grid(std::size_t n) {
    if (n == 0) throw InvalidArgument("near_square_grid: n must be positive");
    std::size_t p = static_cast<std::size_t>(std::sqrt(static_cast<double>(n)));
    while (p > 1 && n % p != 0) --p;
    return {p, n / p};
}

std::vector<std::array<std::size_t, 2>> lattice_coordinates(const AssembledCdr& cdr) {
    std::vector<std::array<std::size_t, 2>> out(cdr.dof_count);
    for (std::size_t d = 0; d < cdr.dof_count; ++d) out[d] = cdr.lattice(d);
    return out;
}

SubdomainMaps build_partition(const CsrMatrix& graph, const PartitionSpec& spec,
                              std::span<const std::array<std::size_t, 2>> coords) {
    const std::size_t n = graph.rows();
    if (graph.cols() != n) throw DimensionMismatch("build_partition", n, graph.cols());

    std::vector<std::vector<std::size_t>> cores;
    if (spec.layout == PartitionLayout::strips) {
        if (spec.n_subdomains == 0 || spec.n_subdomains > n)
            throw InvalidArgument("build_partition: number of subdomains must lie in [1, dofs]");
        const auto cuts = even_cuts(n, spec.n_subdomains);
        for (std::size_t s = 0; s < spec.n_subdomains; ++s) {
            std::vector<std::size_t> core;
            for (std::size_t i = cuts[s]; i < cuts[s + 1]; ++i) core.push_back(i);
            cores.push_back(std::move(core));
        }
    } else {
        if (coords.size() != n) throw InvalidArgument("build_partition: grid layout needs lattice coordinates");
        if (spec.grid_p == 0 || spec.grid_q == 0) throw InvalidArgument("build_partition: empty grid");
        if (spec.grid_p * spec.grid_q > n) throw InvalidArgument("build_partition: more blocks than dofs");
        std::size_t rlo = coords[0][0], rhi = rlo, clo = coords[0][1], chi = clo;
        for (const auto& c : coords) {
            rlo = std::min(rlo, c[0]);
            rhi = std::max(rhi, c[0]);
            clo = std::min(clo, c[1]);
            chi = std::max(chi, c[1]);
        }
        const auto rcuts = even_cuts(rhi - rlo + 1, spec.grid_p);
        const auto ccuts = even_cuts(chi - clo + 1, spec.grid_q);
        auto band = [](const std::vector<std::size_t>& cuts, std::size_t v) {
            return static_cast<std::size_t>(std::upper_bound(cuts.begin(), cuts.end(), v) - cuts.begin()) - 1;
        };
        cores.assign(spec.grid_p * spec.grid_q, {});
        for (std::size_t d = 0; d < n; ++d) {
            const std::size_t bi = band(rcuts, coords[d][0] - rlo);
            const std::size_t bj = band(ccuts, coords[d][1] - clo);
            cores[bi * spec.grid_q + bj].push_back(d);
        }
        std::erase_if(cores, [](const auto& c) { return c.empty(); });
    }

    SubdomainMaps maps;
    maps.dof_count = n;
    for (auto& core : cores) {
        std::vector<std::size_t> sub = std::move(core);
        for (std::size_t layer = 0; layer < spec.overlap_layers; ++layer) sub = grow(graph, sub);
        maps.subdomains.push_back(std::move(sub));
    }
    maps.membership.assign(n, 0);
    for (const auto& sub : maps.subdomains)
        for (std::size_t i : sub) ++maps.membership[i];
    maps.k0 = *std::max_element(maps.membership.begin(), maps.membership.end());
    return maps;
}

std::string partition_json(const SubdomainMaps& maps) {
    std::vector<std::vector<std::size_t>> owners(maps.dof_count);
    for (std::size_t s = 0; s < maps.subdomains.size(); ++s)
        for (std::size_t i : maps.subdomains[s]) owners[i].push_back(s);
    nlohmann::json j;
    j["dof_count"] = maps.dof_count;
    j["subdomain_count"] = maps.subdomains.size();
    j["k0"] = maps.k0;
    j["memberships"] = owners;
    return j.dump(2);
}

Vector CoarseSpace::restrict_vector(std::span<const double> v) const {
    Vector c(size(), 0.0);
    for (std::size_t k = 0; k < size(); ++k) {
        double s = 0.0;
        for (std::size_t t = 0; t < support[k].size(); ++t) s += values[k][t] * v[support[k][t]];
        c[k] = s;
    }
    return c;
}

Vector CoarseSpace::prolong(std::span<const double> c, std::size_t n) const {
    Vector v(n, 0.0);
    for (std::size_t k = 0; k < size(); ++k)
        for (std::size_t t = 0; t < support[k].size(); ++t) v[support[k][t]] += values[k][t] * c[k];
    return v;
}

DenseMatrix CoarseSpace::dense_basis(std::size_t n) const {
    DenseMatrix b(size(), n);
    for (std::size_t k = 0; k < size(); ++k)
        for (std::size_t t = 0; t < support[k].size(); ++t) b(k, support[k][t]) = values[k][t];
    return b;
}

CoarseSpace build_coarse_space(const SubdomainMaps& maps, const CsrMatrix& m_matrix, CoarseKind kind) {
    if (kind != CoarseKind::pou_constants) throw InvalidArgument("build_coarse_space: unknown kind");
    const std::size_t n = maps.dof_count;
    if (m_matrix.rows() != n) throw DimensionMismatch("build_coarse_space", n, m_matrix.rows());
    const std::size_t count = maps.subdomains.size();
    if (count == 0) throw InvalidArgument("build_coarse_space: empty coarse space");

    std::vector<Vector> dense(count, Vector(n, 0.0));
    std::vector<Vector> images(count);
    for (std::size_t s = 0; s < count; ++s) {
        for (std::size_t i : maps.subdomains[s]) dense[s][i] = 1.0 / static_cast<double>(maps.membership[i]);
        images[s] = m_matrix.multiply(dense[s]);
    }
    DenseMatrix gram(count, count);
    double max_diag = 0.0;
    for (std::size_t i = 0; i < count; ++i)
        for (std::size_t j = 0; j <= i; ++j) {
            const double v = 0.5 * (dot(dense[i], images[j]) + dot(dense[j], images[i]));
            gram(i, j) = gram(j, i) = v;
            if (i == j) max_diag = std::max(max_diag, v);
        }

    // incremental Cholesky over the candidates, skipping dependent ones
    std::vector<std::size_t> kept;
    std::vector<Vector> l_rows;
    for (std::size_t j = 0; j < count; ++j) {
        Vector y(kept.size());
        for (std::size_t a = 0; a < kept.size(); ++a) {
            double s = gram(kept[a], j);
            for (std::size_t b = 0; b < a; ++b) s -= l_rows[a][b] * y[b];
            y[a] = s / l_rows[a][a];
        }
        const double pivot = gram(j, j) - dot(y, y);
        if (pivot < 1e-12 * max_diag) continue;
        y.push_back(std::sqrt(pivot));
        l_rows.push_back(std::move(y));
        kept.push_back(j);
    }
    if (kept.empty()) throw InvalidArgument("build_coarse_space: empty coarse space");

    CoarseSpace cs;
    cs.kept = kept;
    cs.dropped = count - kept.size();
    DenseMatrix l(kept.size(), kept.size());
    for (std::size_t a = 0; a < kept.size(); ++a) {
        for (std::size_t b = 0; b <= a; ++b) l(a, b) = l_rows[a][b];
        const std::size_t s = kept[a];
        cs.support.push_back(maps.subdomains[s]);
        Vector vals;
        vals.reserve(maps.subdomains[s].size());
        for (std::size_t i : maps.subdomains[s]) vals.push_back(dense[s][i]);
        cs.values.push_back(std::move(vals));
    }
    cs.gram_factor = std::make_shared<const CholeskyFactor>(std::move(l));
    return cs;
}

std::string to_string(SchwarzMode mode) {
    switch (mode) {
        case SchwarzMode::one_level_sym: return "one-level";
        case SchwarzMode::two_level_sym: return "two-level";
        case SchwarzMode::one_level_nonsym: return "one-level-nonsym";
    }
    return "unknown";
}

SchwarzPreconditioner::SchwarzPreconditioner(const CsrMatrix& matrix, SubdomainMaps maps, SchwarzMode mode)
    : n_(matrix.rows()), mode_(mode) {
    if (matrix.cols() != n_) throw DimensionMismatch("SchwarzPreconditioner", n_, matrix.cols());
    if (maps.dof_count != n_) throw DimensionMismatch("SchwarzPreconditioner maps", n_, maps.dof_count);
    matrix_ = std::make_shared<const CsrMatrix>(matrix);

    auto locals = std::make_shared<std::vector<Local>>();
    locals->reserve(maps.subdomains.size());
    for (const auto& sub : maps.subdomains) {
        if (sub.size() > kMaxSubdomainSize)
            throw InvalidArgument("SchwarzPreconditioner: subdomain of " + std::to_string(sub.size()) +
                                  " dofs exceeds the dense limit " + std::to_string(kMaxSubdomainSize));
        const DenseMatrix block = matrix.extract_dense(sub);
        if (mode == SchwarzMode::one_level_nonsym)
            locals->push_back(Local{sub, lu_factor(block)});
        else
            locals->push_back(Local{sub, cholesky(block)});
    }
    locals_ = std::move(locals);
    if (mode == SchwarzMode::two_level_sym)
        coarse_ = std::make_shared<const CoarseSpace>(build_coarse_space(maps, matrix));
    maps_ = std::make_shared<const SubdomainMaps>(std::move(maps));
}

void SchwarzPreconditioner::local_sum(std::span<const double> x, std::span<double> y) const {
    std::fill(y.begin(), y.end(), 0.0);
    Vector local;
    for (const Local& loc : *locals_) {
        local.resize(loc.dofs.size());
        for (std::size_t t = 0; t < loc.dofs.size(); ++t) local[t] = x[loc.dofs[t]];
        const Vector sol = std::visit([&](const auto& f) { return f.solve(local); }, loc.factor);
        for (std::size_t t = 0; t < loc.dofs.size(); ++t) y[loc.dofs[t]] += sol[t];
    }
}

Vector SchwarzPreconditioner::project(std::span<const double> v) const {
    if (v.size() != n_) throw DimensionMismatch("SchwarzPreconditioner::project", n_, v.size());
    Vector out(v.begin(), v.end());
    if (!coarse_) return out;
    const Vector mv = matrix_->multiply(v);
    const Vector c = coarse_->gram_factor->solve(coarse_->restrict_vector(mv));
    axpy(-1.0, coarse_->prolong(c, n_), out);
    return out;
}

void SchwarzPreconditioner::apply_into(std::span<const double> x, std::span<double> y) const {
    if (x.size() != n_) throw DimensionMismatch("SchwarzPreconditioner::apply", n_, x.size());
    if (y.size() != n_) throw DimensionMismatch("SchwarzPreconditioner::apply", n_, y.size());
    if (!coarse_) {
        local_sum(x, y);
        return;
    }
    // Pi^T x = x - M R0^T E^{-1} R0 x
    const Vector c = coarse_->gram_factor->solve(coarse_->restrict_vector(x));
    const Vector coarse_part = coarse_->prolong(c, n_);
    Vector u(x.begin(), x.end());
    axpy(-1.0, matrix_->multiply(coarse_part), u);
    Vector w(n_);
    local_sum(u, w);
    const Vector pw = project(w);
    for (std::size_t i = 0; i < n_; ++i) y[i] = pw[i] + coarse_part[i];
}

Vector SchwarzPreconditioner::apply(std::span<const double> x) const {
    Vector y(n_);
    apply_into(x, y);
    return y;
}

LinearOperator SchwarzPreconditioner::op() const {
    auto self = std::make_shared<const SchwarzPreconditioner>(*this);
    return LinearOperator(n_, [self](std::span<const double> x, std::span<double> y) { self->apply_into(x, y); });
}

PreconditionerHandle SchwarzPreconditioner::handle(bool validate) const {
    return PreconditionerHandle(op(), mode_ != SchwarzMode::one_level_nonsym, validate);
}

double condition_number(const LinearOperator& h, const CsrMatrix& m_matrix) {
    if (h.dim() != m_matrix.rows()) throw DimensionMismatch("condition_number", m_matrix.rows(), h.dim());
    const CholeskyFactor lh = cholesky(densify(h));
    const DenseMatrix l = lh.lower();
    const DenseMatrix g = l.transpose() * (m_matrix.to_dense() * l);
    DenseMatrix sym(g.rows(), g.cols());
    for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t j = 0; j < g.cols(); ++j) sym(i, j) = 0.5 * (g(i, j) + g(j, i));
    const Vector ev = sym_eig(sym, false).values;
    if (!(ev.front() > 0.0)) throw NotPositiveDefinite(0, "preconditioned operator");
    return ev.back() / ev.front();
}

}  // namespace wpk
