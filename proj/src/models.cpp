#include "caviar/models.hpp"

#include <limits>

namespace caviar::models {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

std::string to_string(Variant v) {
    switch (v) {
        case Variant::SAV: return "SAV";
        case Variant::AS: return "AS";
        case Variant::IG: return "IG";
    }
    return "?";
}

std::string to_string(Mode m) {
    switch (m) {
        case Mode::Baseline: return "Baseline";
        case Mode::SE: return "SE";
        case Mode::X: return "X";
    }
    return "?";
}

std::string to_string(ComponentLag c) { return c == ComponentLag::Own ? "own" : "total"; }

Variant parse_variant(std::string_view s) {
    if (s == "SAV" || s == "sav") return Variant::SAV;
    if (s == "AS" || s == "as") return Variant::AS;
    if (s == "IG" || s == "ig") return Variant::IG;
    throw DomainError("unknown variant: " + std::string(s));
}

Mode parse_mode(std::string_view s) {
    if (s == "Baseline" || s == "baseline") return Mode::Baseline;
    if (s == "SE" || s == "se") return Mode::SE;
    if (s == "X" || s == "x") return Mode::X;
    throw DomainError("unknown mode: " + std::string(s));
}

ComponentLag parse_component_lag(std::string_view s) {
    if (s == "own") return ComponentLag::Own;
    if (s == "total") return ComponentLag::Total;
    throw DomainError("unknown component lag: " + std::string(s));
}

std::string ModelSpec::id() const {
    return mode == Mode::Baseline ? to_string(variant) : to_string(variant) + "-" + to_string(mode);
}

std::vector<std::string> parameter_names(const ModelSpec& spec) {
    std::vector<std::string> names{"omega", "beta1", "beta2"};
    if (spec.variant == Variant::AS) names.emplace_back("beta3");
    names.emplace_back("gamma");
    if (spec.mode == Mode::SE) {
        names.emplace_back("phi1");
        names.emplace_back("phi2");
    } else if (spec.mode == Mode::X) {
        names.emplace_back("beta_s");
    }
    return names;
}

std::size_t parameter_count(const ModelSpec& spec) {
    return 4 + (spec.variant == Variant::AS ? 1 : 0) +
           (spec.mode == Mode::SE ? 2 : spec.mode == Mode::X ? 1 : 0);
}

std::vector<double> pack(const ModelSpec& spec, const ParamVector& p) {
    std::vector<double> v{p.omega, p.beta1, p.beta2};
    if (spec.variant == Variant::AS) v.push_back(p.beta3);
    v.push_back(p.gamma);
    if (spec.mode == Mode::SE) {
        v.push_back(p.phi1);
        v.push_back(p.phi2);
    } else if (spec.mode == Mode::X) {
        v.push_back(p.beta_s);
    }
    return v;
}

ParamVector unpack(const ModelSpec& spec, std::span<const double> v) {
    if (v.size() != parameter_count(spec)) throw DomainError("parameter vector has the wrong length for " + spec.id());
    ParamVector p;
    std::size_t i = 0;
    p.omega = v[i++];
    p.beta1 = v[i++];
    p.beta2 = v[i++];
    if (spec.variant == Variant::AS) p.beta3 = v[i++];
    p.gamma = v[i++];
    if (spec.mode == Mode::SE) {
        p.phi1 = v[i++];
        p.phi2 = v[i++];
    } else if (spec.mode == Mode::X) {
        p.beta_s = v[i++];
    }
    return p;
}

std::optional<std::string> constraint_violation(const ModelSpec& spec, const ParamVector& p) {
    for (double v : pack(spec, p))
        if (!std::isfinite(v)) return "non-finite parameter";
    if (!(p.beta1 > 0.0 && p.beta1 < 1.0)) return "beta1 must lie in (0, 1)";
    if (spec.variant == Variant::IG) {
        if (p.omega < 0.0) return "IG requires omega >= 0";
        if (p.beta2 < 0.0) return "IG requires beta2 >= 0";
        if (spec.mode == Mode::X && p.beta_s < 0.0) return "IG-X requires beta_s >= 0";
    }
    if (spec.mode == Mode::SE) {
        const double lo = spec.signed_phi1 ? -1.0 : 0.0;
        const bool lo_ok = spec.signed_phi1 ? p.phi1 > lo : p.phi1 >= lo;
        if (!lo_ok || !(p.phi1 < 1.0)) return spec.signed_phi1 ? "phi1 must lie in (-1, 1)" : "phi1 must lie in [0, 1)";
        if (!(p.beta1 > p.phi1)) return "identification requires beta1 > phi1";
    }
    return std::nullopt;
}

double InitRule::initial_var(std::span<const double> r, double tau) const {
    if (fixed) return *fixed;
    return lower_quantile(r.first(std::min(window, r.size())), tau);
}

FilterState advance(const ModelSpec& spec, const ParamVector& p, const FilterState& prev,
                    double r_prev, double s_prev) noexcept {
    const double lagged =
        spec.mode == Mode::SE && spec.component_lag == ComponentLag::Own ? prev.qp : prev.var;
    const double exo = spec.mode == Mode::X ? s_prev : 0.0;

    double core = 0.0;
    switch (spec.variant) {
        case Variant::SAV:
            core = p.omega + p.beta1 * lagged + p.beta2 * std::abs(r_prev) + p.beta_s * exo;
            break;
        case Variant::AS:
            core = p.omega + p.beta1 * lagged + p.beta2 * std::max(r_prev, 0.0) +
                   p.beta3 * std::min(r_prev, 0.0) + p.beta_s * exo;
            break;
        case Variant::IG: {
            const double arg = p.omega + p.beta1 * lagged * lagged + p.beta2 * r_prev * r_prev +
                               p.beta_s * exo * exo;
            core = arg >= 0.0 ? -std::sqrt(arg) : kNaN;
            break;
        }
    }
    if (spec.mode != Mode::SE) return {core, core, 0.0};
    const double qs = p.phi1 * prev.qs + p.phi2 * s_prev;
    return {core + qs, core, qs};
}

QuantilePath filter(const ModelSpec& spec, const ParamVector& p, std::span<const double> r,
                    std::optional<std::span<const double>> proxy, const InitRule& init) {
    if (!(spec.tau > 0.0 && spec.tau < 1.0)) throw DomainError("tau must lie in (0, 1)");
    if (auto why = constraint_violation(spec, p)) throw DomainError(spec.id() + ": " + *why);
    if (r.empty()) throw DomainError("cannot filter an empty return series");
    if (spec.mode != Mode::Baseline) {
        if (!proxy) throw DomainError(spec.id() + " requires a spillover proxy");
        if (proxy->size() != r.size()) throw DomainError("proxy length differs from return length");
    }
    // Only SE and X read the proxy; Baseline never touches these zeros.
    const auto s_at = [&](std::size_t t) { return proxy && spec.mode != Mode::Baseline ? (*proxy)[t] : 0.0; };

    const auto T = r.size();
    QuantilePath path;
    path.var.resize(T);
    path.qp.resize(T);
    path.qs.resize(T);
    FilterState state;
    state.var = state.qp = init.initial_var(r, spec.tau);
    state.qs = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
        if (t > 0) state = advance(spec, p, state, r[t - 1], s_at(t - 1));
        if (std::isnan(state.qp) && spec.variant == Variant::IG)
            throw InfeasiblePathError("IG square-root argument negative at t = " + std::to_string(t));
        path.var[t] = state.var;
        path.qp[t] = state.qp;
        path.qs[t] = state.qs;
        if (path.feasible && !(state.var < 0.0 && std::isfinite(state.var))) {
            path.feasible = false;
            path.first_infeasible = t;
        }
    }
    path.es = es_from_var(p.gamma, path.var);
    return path;
}

Series es_from_var(double gamma, std::span<const double> var) {
    const double factor = 1.0 + std::exp(gamma);
    Series es(var.size());
    for (std::size_t t = 0; t < var.size(); ++t) es[t] = factor * var[t];
    return es;
}

Series build_proxy(const Eigen::MatrixXd& var_matrix, const selection::SpilloverWeights& w) {
    if (w.sources.size() != w.weights.size()) throw DomainError("weights and sources differ in length");
    Series s(static_cast<std::size_t>(var_matrix.rows()), 0.0);
    if (w.sources.empty()) return s;
    double total = 0.0;
    for (std::size_t k = 0; k < w.sources.size(); ++k) {
        if (w.sources[k] >= static_cast<std::size_t>(var_matrix.cols()))
            throw DomainError("proxy source index outside the VaR matrix");
        if (w.weights[k] < 0.0) throw DomainError("negative spillover weight");
        total += w.weights[k];
    }
    if (std::abs(total - 1.0) > 1e-10) throw DomainError("spillover weights must sum to 1");
    for (Eigen::Index t = 0; t < var_matrix.rows(); ++t) {
        double acc = 0.0;
        for (std::size_t k = 0; k < w.sources.size(); ++k)
            acc += w.weights[k] * var_matrix(t, static_cast<Eigen::Index>(w.sources[k]));
        s[static_cast<std::size_t>(t)] = acc;
    }
    return s;
}

Series spillover_share(const QuantilePath& path) {
    Series out(path.size());
    for (std::size_t t = 0; t < out.size(); ++t)
        out[t] = std::abs(path.var[t]) > 1e-12 ? path.qs[t] / path.var[t] : kNaN;
    return out;
}

}  // namespace caviar::models
