#include "caviar/app.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <utility>

namespace {

using caviar::app::RunConfig;

struct Overrides {
    std::string config;
    std::optional<std::string> panel, format, weights, out, component_lag, loss;
    std::optional<double> tau, alpha, qtau, mcs_alpha;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    std::optional<std::size_t> starts, refined, window, step, refit_every, reps, block_length, dq_lags, init_window;
    std::optional<int> lag;
    std::vector<std::string> variants, modes;
    bool signed_phi1 = false;
    bool no_warm_start = false;
};

void add_options(CLI::App& app, Overrides& o) {
    app.add_option("-c,--config", o.config, "JSON run configuration");
    app.add_option("--panel", o.panel, "price or return panel CSV");
    app.add_option("--format", o.format, "prices | returns")->check(CLI::IsMember({"prices", "returns"}));
    app.add_option("--weights", o.weights, "precomputed weights CSV");
    app.add_option("-o,--out", o.out, "output directory");
    app.add_option("--tau", o.tau, "VaR probability level");
    app.add_option("--alpha", o.alpha, "selection significance level");
    app.add_option("--seed", o.seed, "master seed");
    app.add_option("--threads", o.threads, "worker threads");
    app.add_option("--starts", o.starts, "random starting points");
    app.add_option("--refined", o.refined, "best starts refined by Nelder-Mead");
    app.add_option("--init-window", o.init_window, "returns used for the VaR initial value");
    app.add_option("--variant", o.variants, "SAV, AS, IG (repeatable)");
    app.add_option("--mode", o.modes, "baseline, SE, X (repeatable)");
    app.add_option("--component-lag", o.component_lag, "own | total");
    app.add_option("--loss", o.loss, "consistent | printed")->check(CLI::IsMember({"consistent", "printed"}));
    app.add_flag("--signed-phi1", o.signed_phi1, "allow negative phi1");
    app.add_option("--window", o.window, "rolling estimation window");
    app.add_option("--step", o.step, "rolling step");
    app.add_option("--refit-every", o.refit_every, "refit frequency in origins; 0 fits once");
    app.add_flag("--no-warm-start", o.no_warm_start, "cold starts at every refit");
    app.add_option("--reps", o.reps, "MCS bootstrap replications");
    app.add_option("--block-length", o.block_length, "MCS bootstrap block length");
    app.add_option("--mcs-alpha", o.mcs_alpha, "MCS confidence threshold");
    app.add_option("--dq-lags", o.dq_lags, "hit lags in the DQ regression");
    app.add_option("--qtau", o.qtau, "quantilogram probability level");
    app.add_option("--lag", o.lag, "quantilogram lag");
}

RunConfig resolve(const Overrides& o) {
    RunConfig c = o.config.empty() ? RunConfig{} : caviar::app::load_config(o.config);
    if (o.panel) c.panel = *o.panel;
    if (o.format) c.format = *o.format == "prices" ? caviar::data::ValueKind::Prices : caviar::data::ValueKind::Returns;
    if (o.weights) c.weights = *o.weights;
    if (o.out) c.output_dir = *o.out;
    if (o.tau) c.tau = *o.tau;
    if (o.alpha) c.alpha = *o.alpha;
    if (o.seed) c.seed = *o.seed;
    if (o.threads) c.threads = *o.threads;
    if (o.starts) c.optimizer.n_random_starts = *o.starts;
    if (o.refined) c.optimizer.n_best_refined = *o.refined;
    if (o.init_window) c.optimizer.init.window = *o.init_window;
    if (o.window) c.rolling.window = *o.window;
    if (o.step) c.rolling.step = *o.step;
    if (o.refit_every) c.rolling.refit_every = *o.refit_every;
    if (o.no_warm_start) c.rolling.warm_start = false;
    if (o.reps) c.bootstrap.bootstrap_reps = *o.reps;
    if (o.block_length) c.bootstrap.block_length = *o.block_length;
    if (o.mcs_alpha) c.bootstrap.alpha = *o.mcs_alpha;
    if (o.dq_lags) c.dq_lags = *o.dq_lags;
    if (o.qtau) c.quantilogram_tau = *o.qtau;
    if (o.lag) c.quantilogram_lag = *o.lag;
    if (o.signed_phi1) c.signed_phi1 = true;
    try {
        if (o.loss) c.optimizer.loss = caviar::estimation::parse_loss_form(*o.loss);
        if (o.component_lag) c.component_lag = caviar::models::parse_component_lag(*o.component_lag);
        if (!o.variants.empty()) {
            c.variants.clear();
            for (const auto& v : o.variants) c.variants.push_back(caviar::models::parse_variant(v));
        }
        if (!o.modes.empty()) {
            c.modes.clear();
            for (const auto& m : o.modes) c.modes.push_back(caviar::models::parse_mode(m));
        }
    } catch (const caviar::DomainError& e) {
        throw caviar::app::ValidationError(e.what());
    }
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tail-risk estimation with spillover components"};
    app.require_subcommand(1);
    Overrides o;
    const std::pair<const char*, const char*> commands[] = {
        {"select", "choose influential sources and PCA weights per target"},
        {"quantilogram", "cross-quantilogram matrix at one tau and lag"},
        {"estimate", "fit every model on the full sample"},
        {"backtest", "UC, CC and DQ tests on estimated paths"},
        {"forecast", "rolling one-step VaR/ES forecasts"},
        {"mcs", "model confidence set over forecast losses"},
        {"pipeline", "all stages in order"},
    };
    for (const auto& [name, help] : commands) add_options(*app.add_subcommand(name, help), o);
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : caviar::app::kValidationError;
    }
    const auto cmd = caviar::app::parse_subcommand(app.get_subcommands().front()->get_name());
    RunConfig config;
    try {
        config = resolve(o);
    } catch (const caviar::app::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return caviar::app::kValidationError;
    }
    const int rc = caviar::app::run(cmd, config);
    if (rc != 0) std::cerr << "caviar " << caviar::app::to_string(cmd) << " failed with exit code " << rc
                           << "; see " << config.output_dir.string() << '\n';
    return rc;
}
