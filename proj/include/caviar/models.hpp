#pragma once

#include "caviar/common.hpp"
#include "caviar/selection.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace caviar::models {

/// How the latest return enters the quantile recursion.
enum class Variant { SAV, AS, IG };

/// Baseline CAViaR, two-component spillover model (SE), or baseline plus the
/// spillover proxy as an exogenous regressor (X).
enum class Mode { Baseline, SE, X };

/// Which lag feeds the autoregressive term of the proper-risk component in SE
/// mode: its own lag q^p_{t-1}, or the total VaR_{t-1}.
enum class ComponentLag { Own, Total };

std::string to_string(Variant v);
std::string to_string(Mode m);
std::string to_string(ComponentLag c);
Variant parse_variant(std::string_view s);
Mode parse_mode(std::string_view s);
ComponentLag parse_component_lag(std::string_view s);

struct ModelSpec {
    Variant variant = Variant::SAV;
    Mode mode = Mode::Baseline;
    double tau = 0.05;
    ComponentLag component_lag = ComponentLag::Own;
    /// Allow -1 < phi1 < 1 instead of 0 <= phi1 < 1.
    bool signed_phi1 = false;

    /// e.g. "SAV-SE".
    [[nodiscard]] std::string id() const;
};

/// Named model parameters. Only the fields used by a spec are meaningful;
/// pack/unpack map them to the optimizer's flat vector in this order:
/// omega, beta1, beta2, [beta3 for AS], gamma, then phi1, phi2 (SE) or beta_s (X).
struct ParamVector {
    double omega = 0.0;
    double beta1 = 0.0;
    double beta2 = 0.0;
    double beta3 = 0.0;
    double gamma = 0.0;
    double phi1 = 0.0;
    double phi2 = 0.0;
    double beta_s = 0.0;

    bool operator==(const ParamVector&) const = default;
};

std::vector<std::string> parameter_names(const ModelSpec& spec);
std::size_t parameter_count(const ModelSpec& spec);
std::vector<double> pack(const ModelSpec& spec, const ParamVector& p);
ParamVector unpack(const ModelSpec& spec, std::span<const double> values);

/// Returns the first violated identification/positivity constraint, if any.
std::optional<std::string> constraint_violation(const ModelSpec& spec, const ParamVector& p);

/// VaR_1 from the lower empirical tau-quantile of the first `window` returns,
/// unless a fixed starting value is given.
struct InitRule {
    std::size_t window = 300;
    std::optional<double> fixed;

    [[nodiscard]] double initial_var(std::span<const double> r, double tau) const;
};

/**
 * Filtered tail-risk path. For SE models `qp` and `qs` hold the proper-risk and
 * spillover components with var = qp + qs; otherwise qp = var and qs = 0.
 * `feasible` is false when some VaR_t >= 0 or is not finite; `first_infeasible`
 * then points at the first offending index.
 */
struct QuantilePath {
    Series var, es, qp, qs;
    bool feasible = true;
    std::size_t first_infeasible = 0;

    [[nodiscard]] std::size_t size() const noexcept { return var.size(); }
};

/// Recursion state at one date.
struct FilterState {
    double var = 0.0;
    double qp = 0.0;
    double qs = 0.0;
};

/// One step of the recursion: state at t from the state at t-1, r_{t-1} and
/// the proxy value s_{t-1} (ignored in Baseline mode). Returns NaN components
/// when the IG square-root argument is negative.
FilterState advance(const ModelSpec& spec, const ParamVector& p, const FilterState& prev,
                    double r_prev, double s_prev) noexcept;

/// Runs the quantile filter over r. SE and X modes need a proxy of the same
/// length. Throws DomainError on invalid parameters or lengths and
/// InfeasiblePathError when an IG square-root argument turns negative.
QuantilePath filter(const ModelSpec& spec, const ParamVector& p, std::span<const double> r,
                    std::optional<std::span<const double>> proxy = std::nullopt,
                    const InitRule& init = {});

/// ES_t = (1 + exp(gamma)) VaR_t.
Series es_from_var(double gamma, std::span<const double> var);

/// s_t = sum_j w_j VaR_{j,t} over the selected sources; zero when w is empty.
Series build_proxy(const Eigen::MatrixXd& var_matrix, const selection::SpilloverWeights& w);

/// qs_t / VaR_t; NaN where |VaR_t| <= 1e-12.
Series spillover_share(const QuantilePath& path);

}  // namespace caviar::models
