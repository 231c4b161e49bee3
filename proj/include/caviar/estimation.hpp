#pragma once

#include "caviar/data.hpp"
#include "caviar/models.hpp"
#include "caviar/selection.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace caviar::estimation {

/// Asymmetric-Laplace (Fissler-Ziegel) joint VaR/ES loss summed over t:
/// (1{r <= VaR} - tau) / ES (VaR - r) + VaR / ES + log(-ES) - 1.
/// +inf when some ES_t >= 0; DomainError on length mismatch.
double al_fz_loss(std::span<const double> var, std::span<const double> es,
                  std::span<const double> r, double tau);

/// FZ0 loss for one forecast:
/// 1 / (tau ES) 1{r <= VaR} (VaR - r) + VaR / ES + log(-ES) - 1.
/// DomainError when es >= 0.
double fz0_loss(double var, double es, double r, double tau);

/// Strictly consistent FZ0 score, summed over t:
/// -1{r <= VaR} (VaR - r) / (tau ES) + VaR / ES + log(-ES) - 1.
/// +inf when some ES_t >= 0; DomainError on length mismatch.
double fz_loss(std::span<const double> var, std::span<const double> es, std::span<const double> r,
               double tau);
/// One observation of fz_loss. DomainError when es >= 0.
double fz_score(double var, double es, double r, double tau);

/// Which joint loss drives estimation and forecast scoring. Printed uses
/// al_fz_loss / fz0_loss as displayed; their violation term has the opposite
/// sign, which makes the in-sample sum unbounded below as VaR, ES -> 0-.
enum class LossForm { Consistent, Printed };
std::string to_string(LossForm f);
LossForm parse_loss_form(std::string_view s);

double joint_loss(LossForm form, std::span<const double> var, std::span<const double> es,
                  std::span<const double> r, double tau);
double forecast_score(LossForm form, double var, double es, double r, double tau);

/// Closed boxes the random starts are drawn from, per parameter.
struct Box {
    double lo, hi;
};
std::vector<Box> start_boxes(const models::ModelSpec& spec);

struct OptimizerConfig {
    std::size_t n_random_starts = 10000;
    std::size_t n_best_refined = 10;
    double simplex_tolerance = 1e-6;
    std::size_t max_iterations = 5000;
    /// Simplex restarts from the refined optimum while the loss still drops.
    std::size_t max_restarts = 3;
    /// Attempts per random start before the start is given up as infeasible.
    std::size_t draws_per_start = 50;
    std::uint64_t seed = 20080319;
    unsigned threads = 1;
    models::InitRule init;
    LossForm loss = LossForm::Consistent;

    void validate() const;
};

struct FitResult {
    models::ModelSpec spec;
    models::ParamVector params;
    double loss = 0.0;
    models::QuantilePath path;
    /// Feasible random starts evaluated plus warm starts.
    std::size_t starts_tried = 0;
    double best_start_loss = 0.0;
    bool converged = false;
    std::map<std::string, std::string> metadata;
};

/**
 * Minimizes joint_loss(config.loss) over the model's parameters: feasible random starts
 * from start_boxes, Nelder-Mead refinement of the best few (plus any warm
 * starts), infeasible points scored +inf. Deterministic given config.seed,
 * independently of config.threads. Throws EstimationError when no feasible
 * start is found.
 */
FitResult estimate(const models::ModelSpec& spec, std::span<const double> r,
                   std::optional<std::span<const double>> proxy, const OptimizerConfig& config,
                   std::span<const models::ParamVector> warm_starts = {});

/// Loss of a parameter vector, +inf when infeasible.
double objective(const models::ModelSpec& spec, const models::ParamVector& p, std::span<const double> r,
                 std::optional<std::span<const double>> proxy, const models::InitRule& init,
                 LossForm form = LossForm::Consistent);

struct UniverseWarmStart {
    std::vector<std::optional<models::ParamVector>> baseline;  // per asset
    std::vector<std::optional<models::ParamVector>> spillover; // per asset, SE/X fits
};

struct UniverseFit {
    models::ModelSpec spec;
    /// Stage-1 baseline fits of spec.variant for every asset.
    std::vector<std::optional<FitResult>> baseline;
    /// In-sample stage-1 VaR, T x N; NaN columns for failed assets.
    Eigen::MatrixXd baseline_var;
    /// Final model per target: SE/X fit when the target has sources, else its baseline.
    std::map<std::size_t, FitResult> fits;
    /// Targets without a result, with the reason.
    std::map<std::size_t, std::string> failures;
    /// Proxy series used for each stage-2 target.
    std::map<std::size_t, Series> proxies;
};

/**
 * Two-stage estimation over a panel: baselines for all assets, then for each
 * target with sources an SE or X model driven by the proxy built from the
 * stage-1 VaRs of the same variant. A stage-1 failure only affects targets
 * that use the failed asset as a source.
 */
UniverseFit fit_universe(const data::ReturnPanel& panel, const models::ModelSpec& spec,
                         const std::vector<selection::SpilloverWeights>& weights_by_target,
                         const OptimizerConfig& config, const UniverseWarmStart* warm = nullptr);

}  // namespace caviar::estimation
