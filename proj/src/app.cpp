#include "caviar/app.hpp"

#include "caviar/backtest.hpp"
#include "caviar/data.hpp"
#include "caviar/quantilogram.hpp"
#include "caviar/report.hpp"
#include "caviar/selection.hpp"

#include <chrono>
#include <fstream>
#include <map>
#include <set>

namespace caviar::app {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void reject_unknown(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!j.is_object()) throw ValidationError(where + " must be a JSON object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!ok.contains(it.key())) throw ValidationError("unknown config key '" + where + it.key() + "'");
}

template <typename T>
void read(const json& j, const char* key, T& dst) {
    if (j.contains(key)) {
        try {
            dst = j.at(key).get<T>();
        } catch (const json::exception& e) {
            throw ValidationError(std::string("config key '") + key + "': " + e.what());
        }
    }
}

/// Collects timings and artifact names for the manifest of one subcommand.
class Manifest {
public:
    Manifest(std::string name, const RunConfig& config) : name_(std::move(name)), config_(config) {}

    template <typename Fn>
    auto timed(const std::string& step, Fn&& fn) {
        const auto start = std::chrono::steady_clock::now();
        auto finish = [&] {
            timings_[step] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        };
        if constexpr (std::is_void_v<decltype(fn())>) {
            fn();
            finish();
        } else {
            auto result = fn();
            finish();
            return result;
        }
    }

    void artifact(const fs::path& p) { artifacts_.push_back(p.filename().string()); }
    void note(const std::string& key, json value) { notes_[key] = std::move(value); }

    void write() const {
        json j;
        j["subcommand"] = name_;
        j["tool_version"] = report::kToolVersion;
        j["config"] = to_json(config_);
        j["input_digest"] = json::object();
        if (!config_.panel.empty() && fs::exists(config_.panel))
            j["input_digest"]["panel_sha256"] = report::sha256_file(config_.panel);
        if (!config_.weights.empty() && fs::exists(config_.weights))
            j["input_digest"]["weights_sha256"] = report::sha256_file(config_.weights);
        j["timings_seconds"] = timings_;
        j["artifacts"] = artifacts_;
        j["knobs"] = {
            {"returns", "100 x log-return, inner join on dates"},
            {"quantile_convention", "lower empirical quantile, rank ceil(tau*T)"},
            {"selection_lag", 1},
            {"selection_correlation", "absolute, ties to lowest column index"},
            {"selection_adjusted_r2_guard", 1e-12},
            {"pca_matrix", "correlation of contemporaneous returns of selected assets"},
            {"var_init", "lower tau-quantile of first " + std::to_string(config_.optimizer.init.window) + " returns"},
            {"component_lag", models::to_string(config_.component_lag)},
            {"phi1_range", config_.signed_phi1 ? "(-1,1)" : "[0,1)"},
            {"proxy", "stage-1 baseline VaR of the same variant"},
            {"loss", estimation::to_string(config_.optimizer.loss) == "consistent"
                         ? "FZ0 with penalizing violation term, for estimation and forecast scoring"
                         : "displayed forms verbatim"},
            {"optimizer", "multi-start Nelder-Mead, +inf on constraint violation"},
            {"dq_regressors", "1, Hit lags 1.." + std::to_string(config_.dq_lags) + ", VaR_t"},
            {"mcs_statistic", "range T_R, moving-block bootstrap"},
            {"mcs_block_length", config_.bootstrap.block_length},
            {"mcs_reps", config_.bootstrap.bootstrap_reps},
            {"refit_every", config_.rolling.refit_every},
            {"seed_derivation", "splitmix64(master, stream, index)"},
        };
        j["notes"] = notes_;
        std::ofstream out(config_.output_dir / ("manifest_" + name_ + ".json"));
        out << j.dump(2) << '\n';
    }

private:
    std::string name_;
    const RunConfig& config_;
    json timings_ = json::object();
    json notes_ = json::object();
    std::vector<std::string> artifacts_;
};

std::ofstream open_out(const fs::path& p) {
    std::ofstream out(p);
    if (!out) throw std::ios_base::failure("cannot write " + p.string());
    return out;
}

data::ReturnPanel load(const RunConfig& c) { return data::load_panel(c.panel, {c.format, ','}); }

std::vector<selection::SpilloverWeights> run_selection(const data::ReturnPanel& panel, const RunConfig& c,
                                                       std::vector<selection::SelectionTrace>* traces) {
    const auto n = panel.assets();
    std::vector<selection::SelectionResult> res(n);
    parallel_for(n, c.threads, [&](std::size_t i) { res[i] = selection::select_influential(panel, i, c.alpha); });
    std::vector<selection::SpilloverWeights> w;
    for (auto& r : res) {
        w.push_back(r.weights);
        if (traces) traces->push_back(r.trace);
    }
    return w;
}

void write_weights(const data::ReturnPanel& panel, const std::vector<selection::SpilloverWeights>& w,
                   const RunConfig& c, Manifest& m) {
    const auto p = c.output_dir / "weights.csv";
    auto out = open_out(p);
    report::write_weights_csv(out, panel.tickers(), w);
    m.artifact(p);
}

std::vector<selection::SpilloverWeights> obtain_weights(const data::ReturnPanel& panel, const RunConfig& c,
                                                        Manifest& m) {
    if (!c.weights.empty()) {
        m.note("weights_source", c.weights.string());
        return report::read_weights_csv(c.weights, panel.tickers());
    }
    const auto shared = c.output_dir / "weights.csv";
    if (fs::exists(shared)) {
        m.note("weights_source", shared.filename().string());
        return report::read_weights_csv(shared, panel.tickers());
    }
    m.note("weights_source", "computed");
    auto w = m.timed("selection", [&] { return run_selection(panel, c, nullptr); });
    write_weights(panel, w, c, m);
    return w;
}

int cmd_select(const RunConfig& c) {
    Manifest m("select", c);
    const auto panel = m.timed("load", [&] { return load(c); });
    std::vector<selection::SelectionTrace> traces;
    const auto w = m.timed("selection", [&] { return run_selection(panel, c, &traces); });
    write_weights(panel, w, c, m);
    json arr = json::array();
    for (const auto& t : traces) arr.push_back(report::to_json(t, panel.tickers()));
    const auto p = c.output_dir / "selection_trace.json";
    open_out(p) << arr.dump(2) << '\n';
    m.artifact(p);
    m.write();
    return kSuccess;
}

int cmd_quantilogram(const RunConfig& c) {
    Manifest m("quantilogram", c);
    const auto panel = m.timed("load", [&] { return load(c); });
    const auto mat = m.timed("quantilogram", [&] {
        return quantilogram::quantilogram_matrix(panel, c.quantilogram_tau, c.quantilogram_lag, c.threads);
    });
    const auto p = c.output_dir / ("quantilogram_tau" + report::fmt(c.quantilogram_tau) + "_lag" +
                                   std::to_string(c.quantilogram_lag) + ".csv");
    auto out = open_out(p);
    report::write_quantilogram_csv(out, panel.tickers(), mat);
    m.artifact(p);
    m.write();
    return kSuccess;
}

int cmd_estimate(const RunConfig& c) {
    Manifest m("estimate", c);
    const auto panel = m.timed("load", [&] { return load(c); });
    const auto weights = obtain_weights(panel, c, m);
    const auto comp_path = c.output_dir / "components_long.csv";
    auto comp = open_out(comp_path);
    comp << "target,model,date,var,qp,qs,share\n";
    json failures = json::object();
    for (auto v : c.variants) {
        for (auto mode : c.modes) {
            const auto spec = c.spec(v, mode);
            const auto uf = m.timed("fit_" + spec.id(), [&] {
                return estimation::fit_universe(panel, spec, weights, c.optimizer_config());
            });
            for (const auto& [i, why] : uf.failures) failures[spec.id()][panel.tickers()[i]] = why;
            for (const auto& [i, fit] : uf.fits) {
                if (mode != models::Mode::Baseline && weights[i].empty()) continue;
                const auto& ticker = panel.tickers()[i];
                const auto jp = c.output_dir / report::artifact_name(ticker, spec, "fit", "json");
                open_out(jp) << report::to_json(fit, ticker).dump(2) << '\n';
                m.artifact(jp);
                const auto pp = c.output_dir / report::artifact_name(ticker, spec, "path");
                auto out = open_out(pp);
                report::write_path_csv(out, panel.dates(), fit.path);
                m.artifact(pp);
                if (mode == models::Mode::SE) {
                    const auto share = models::spillover_share(fit.path);
                    for (std::size_t t = 0; t < fit.path.size(); ++t)
                        comp << ticker << ',' << spec.id() << ',' << data::format_date(panel.dates()[t]) << ','
                             << report::fmt(fit.path.var[t]) << ',' << report::fmt(fit.path.qp[t]) << ','
                             << report::fmt(fit.path.qs[t]) << ',' << report::fmt(share[t]) << '\n';
                }
            }
        }
    }
    m.artifact(comp_path);
    m.note("failures", failures);
    m.write();
    return failures.empty() ? kSuccess : kEstimationFailure;
}

struct ArtifactFile {
    fs::path path;
    std::string target;
    std::string variant;
    std::string mode;
};

// Files named {target}_{variant}_{mode}_{suffix}.csv; the target may itself contain '_'.
std::vector<ArtifactFile> scan(const fs::path& dir, const std::string& suffix) {
    std::vector<ArtifactFile> out;
    const std::string tail = "_" + suffix + ".csv";
    for (const auto& e : fs::directory_iterator(dir)) {
        const auto name = e.path().filename().string();
        if (name.size() <= tail.size() || name.compare(name.size() - tail.size(), tail.size(), tail) != 0) continue;
        const auto stem = name.substr(0, name.size() - tail.size());
        const auto p2 = stem.rfind('_');
        if (p2 == std::string::npos) continue;
        const auto p1 = stem.rfind('_', p2 - 1);
        if (p1 == std::string::npos || p1 == 0) continue;
        out.push_back({e.path(), stem.substr(0, p1), stem.substr(p1 + 1, p2 - p1 - 1), stem.substr(p2 + 1)});
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.path.filename() < b.path.filename(); });
    return out;
}

std::size_t model_rank(const std::string& id) {
    static const std::vector<std::string> order{"SAV", "AS", "IG", "SAV-SE", "AS-SE", "IG-SE", "SAV-X", "AS-X", "IG-X"};
    const auto it = std::find(order.begin(), order.end(), id);
    return static_cast<std::size_t>(it - order.begin());
}

int cmd_backtest(const RunConfig& c) {
    Manifest m("backtest", c);
    const auto panel = m.timed("load", [&] { return load(c); });
    std::vector<report::BacktestRow> rows;
    m.timed("backtest", [&] {
        for (const auto& f : scan(c.output_dir, "path")) {
            const auto spec = c.spec(models::parse_variant(f.variant), models::parse_mode(f.mode));
            const auto dp = report::read_path_csv(f.path);
            if (dp.dates != panel.dates()) throw DomainError(f.path.filename().string() + " does not match the panel dates");
            const auto r = panel.column(panel.index_of(f.target));
            rows.push_back({f.target, spec.id(), backtest::run_backtest(r, dp.path.var, c.tau, c.dq_lags)});
        }
    });
    std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
        return a.asset != b.asset ? a.asset < b.asset : model_rank(a.model) < model_rank(b.model);
    });
    const auto p = c.output_dir / "backtest.csv";
    auto out = open_out(p);
    report::write_backtest_csv(out, rows);
    m.artifact(p);
    m.note("rows", rows.size());
    m.write();
    return kSuccess;
}

int cmd_forecast(const RunConfig& c) {
    Manifest m("forecast", c);
    const auto panel = m.timed("load", [&] { return load(c); });
    const auto weights = obtain_weights(panel, c, m);
    json runs = json::object();
    for (auto v : c.variants) {
        for (auto mode : c.modes) {
            const auto spec = c.spec(v, mode);
            const auto run = m.timed("forecast_" + spec.id(), [&] {
                return forecast::rolling_forecast(panel, spec, weights, c.rolling, c.optimizer_config());
            });
            runs[spec.id()] = run.metadata;
            for (const auto& [i, records] : run.by_target) {
                if (mode != models::Mode::Baseline && weights[i].empty()) continue;
                const auto p = c.output_dir / report::artifact_name(panel.tickers()[i], spec, "forecast");
                auto out = open_out(p);
                report::write_forecast_csv(out, records);
                m.artifact(p);
            }
        }
    }
    m.note("runs", runs);
    m.write();
    return kSuccess;
}

int cmd_mcs(const RunConfig& c) {
    Manifest m("mcs", c);
    std::map<std::string, std::vector<std::vector<forecast::ForecastRecord>>> by_target;
    for (const auto& f : scan(c.output_dir, "forecast")) by_target[f.target].push_back(report::read_forecast_csv(f.path));

    std::vector<report::McsRow> rows;
    std::set<std::string> seen;
    json details = json::object();
    m.timed("mcs", [&] {
        for (auto& [target, sets] : by_target) {
            std::sort(sets.begin(), sets.end(), [](const auto& a, const auto& b) {
                return model_rank(a.front().model) < model_rank(b.front().model);
            });
            if (sets.size() < 2) continue;
            // Align on dates present in every model's forecasts.
            std::map<data::Date, std::vector<double>> aligned;
            for (std::size_t k = 0; k < sets.size(); ++k)
                for (const auto& r : sets[k]) {
                    auto& row = aligned[r.date];
                    row.resize(sets.size(), std::numeric_limits<double>::quiet_NaN());
                    row[k] = r.fz0;
                }
            std::vector<std::vector<double>> keep;
            for (auto& [d, row] : aligned)
                if (std::all_of(row.begin(), row.end(), [](double v) { return std::isfinite(v); })) keep.push_back(row);
            mcs::LossMatrix lm;
            lm.losses.resize(static_cast<Eigen::Index>(keep.size()), static_cast<Eigen::Index>(sets.size()));
            for (std::size_t t = 0; t < keep.size(); ++t)
                for (std::size_t k = 0; k < sets.size(); ++k) lm.losses(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(k)) = keep[t][k];
            for (const auto& s : sets) {
                lm.models.push_back(s.front().model);
                seen.insert(s.front().model);
            }
            auto res = mcs::mcs_range(lm, c.mcs_config());
            json order = json::array();
            for (auto e : res.elimination_order) order.push_back(res.models[e]);
            details[target] = {{"elimination_order", order}, {"dates", keep.size()}};
            rows.push_back({target, std::move(res)});
        }
    });
    std::vector<std::string> model_order(seen.begin(), seen.end());
    std::sort(model_order.begin(), model_order.end(), [](const auto& a, const auto& b) { return model_rank(a) < model_rank(b); });
    const auto p = c.output_dir / "mcs.csv";
    auto out = open_out(p);
    report::write_mcs_csv(out, model_order, rows);
    m.artifact(p);
    const auto jp = c.output_dir / "mcs.json";
    open_out(jp) << details.dump(2) << '\n';
    m.artifact(jp);
    m.write();
    return kSuccess;
}

int dispatch(Subcommand cmd, const RunConfig& c) {
    switch (cmd) {
        case Subcommand::Select: return cmd_select(c);
        case Subcommand::Quantilogram: return cmd_quantilogram(c);
        case Subcommand::Estimate: return cmd_estimate(c);
        case Subcommand::Backtest: return cmd_backtest(c);
        case Subcommand::Forecast: return cmd_forecast(c);
        case Subcommand::Mcs: return cmd_mcs(c);
        case Subcommand::Pipeline: break;
    }
    return kValidationError;
}

int guarded(Subcommand cmd, const RunConfig& c, const std::string& stage) {
    int code = kSuccess;
    std::string message;
    try {
        code = dispatch(cmd, c);
    } catch (const ValidationError& e) {
        code = kValidationError, message = e.what();
    } catch (const EstimationError& e) {
        code = kEstimationFailure, message = e.what();
    } catch (const ParseError& e) {
        code = kIoError, message = e.what();
    } catch (const EmptyPanelError& e) {
        code = kIoError, message = e.what();
    } catch (const std::ios_base::failure& e) {
        code = kIoError, message = e.what();
    } catch (const fs::filesystem_error& e) {
        code = kIoError, message = e.what();
    } catch (const Error& e) {
        code = kValidationError, message = e.what();
    } catch (const std::exception& e) {
        code = 1, message = e.what();
    }
    if (!message.empty()) {
        std::ofstream out(c.output_dir / ("error_" + stage + ".json"));
        out << json{{"stage", stage}, {"code", code}, {"error", message}}.dump(2) << '\n';
    }
    return code;
}

}  // namespace

void RunConfig::validate() const {
    if (!(tau > 0.0 && tau < 1.0)) throw ValidationError("tau must lie in (0, 1)");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in (0, 1)");
    if (!(quantilogram_tau > 0.0 && quantilogram_tau < 1.0)) throw ValidationError("quantilogram tau must lie in (0, 1)");
    if (!(bootstrap.alpha > 0.0 && bootstrap.alpha < 1.0)) throw ValidationError("MCS alpha must lie in (0, 1)");
    if (bootstrap.bootstrap_reps < 500) throw ValidationError("bootstrap reps must be at least 500");
    if (bootstrap.block_length < 1) throw ValidationError("block length must be positive");
    if (variants.empty() || modes.empty()) throw ValidationError("need at least one variant and one mode");
    if (rolling.step == 0) throw ValidationError("rolling step must be positive");
    if (panel.empty()) throw ValidationError("no panel path given");
    if (!fs::exists(panel)) throw ValidationError("panel file does not exist: " + panel.string());
    if (!weights.empty() && !fs::exists(weights)) throw ValidationError("weights file does not exist: " + weights.string());
    try {
        optimizer_config().validate();
    } catch (const DomainError& e) {
        throw ValidationError(e.what());
    }
}

models::ModelSpec RunConfig::spec(models::Variant v, models::Mode m) const {
    return {v, m, tau, component_lag, signed_phi1};
}

estimation::OptimizerConfig RunConfig::optimizer_config() const {
    auto o = optimizer;
    o.seed = seed;
    o.threads = threads;
    return o;
}

mcs::McsConfig RunConfig::mcs_config() const {
    auto b = bootstrap;
    b.seed = derive_seed(seed, SeedStream::BootstrapRep, 0);
    b.threads = threads;
    return b;
}

RunConfig config_from_json(const json& j) {
    reject_unknown(j, {"panel", "format", "weights", "tau", "alpha", "variants", "modes", "component_lag",
                       "signed_phi1", "loss", "optimizer", "rolling", "bootstrap", "backtest", "quantilogram", "seed",
                       "threads", "output_dir"},
                   "");
    RunConfig c;
    try {
        std::string s;
        if (j.contains("panel")) c.panel = j.at("panel").get<std::string>();
        if (j.contains("weights")) c.weights = j.at("weights").get<std::string>();
        if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
        if (j.contains("format")) {
            s = j.at("format").get<std::string>();
            if (s == "prices") c.format = data::ValueKind::Prices;
            else if (s == "returns") c.format = data::ValueKind::Returns;
            else throw ValidationError("format must be 'prices' or 'returns'");
        }
        read(j, "tau", c.tau);
        read(j, "alpha", c.alpha);
        read(j, "signed_phi1", c.signed_phi1);
        read(j, "seed", c.seed);
        if (j.contains("loss")) c.optimizer.loss = estimation::parse_loss_form(j.at("loss").get<std::string>());
        read(j, "threads", c.threads);
        if (j.contains("component_lag")) c.component_lag = models::parse_component_lag(j.at("component_lag").get<std::string>());
        if (j.contains("variants")) {
            c.variants.clear();
            for (const auto& v : j.at("variants")) c.variants.push_back(models::parse_variant(v.get<std::string>()));
        }
        if (j.contains("modes")) {
            c.modes.clear();
            for (const auto& v : j.at("modes")) c.modes.push_back(models::parse_mode(v.get<std::string>()));
        }
        if (j.contains("optimizer")) {
            const auto& o = j.at("optimizer");
            reject_unknown(o, {"n_random_starts", "n_best_refined", "simplex_tolerance", "max_iterations",
                               "max_restarts", "draws_per_start", "init_window"},
                           "optimizer.");
            read(o, "n_random_starts", c.optimizer.n_random_starts);
            read(o, "n_best_refined", c.optimizer.n_best_refined);
            read(o, "simplex_tolerance", c.optimizer.simplex_tolerance);
            read(o, "max_iterations", c.optimizer.max_iterations);
            read(o, "max_restarts", c.optimizer.max_restarts);
            read(o, "draws_per_start", c.optimizer.draws_per_start);
            read(o, "init_window", c.optimizer.init.window);
        }
        if (j.contains("rolling")) {
            const auto& o = j.at("rolling");
            reject_unknown(o, {"window", "step", "refit_every", "warm_start"}, "rolling.");
            read(o, "window", c.rolling.window);
            read(o, "step", c.rolling.step);
            read(o, "refit_every", c.rolling.refit_every);
            read(o, "warm_start", c.rolling.warm_start);
        }
        if (j.contains("bootstrap")) {
            const auto& o = j.at("bootstrap");
            reject_unknown(o, {"reps", "block_length", "alpha"}, "bootstrap.");
            read(o, "reps", c.bootstrap.bootstrap_reps);
            read(o, "block_length", c.bootstrap.block_length);
            read(o, "alpha", c.bootstrap.alpha);
        }
        if (j.contains("backtest")) {
            const auto& o = j.at("backtest");
            reject_unknown(o, {"dq_lags"}, "backtest.");
            read(o, "dq_lags", c.dq_lags);
        }
        if (j.contains("quantilogram")) {
            const auto& o = j.at("quantilogram");
            reject_unknown(o, {"tau", "lag"}, "quantilogram.");
            read(o, "tau", c.quantilogram_tau);
            read(o, "lag", c.quantilogram_lag);
        }
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed config: ") + e.what());
    } catch (const DomainError& e) {
        throw ValidationError(e.what());
    }
    return c;
}

RunConfig load_config(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw ValidationError("cannot open config file " + file.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("config is not valid JSON: ") + e.what());
    }
    return config_from_json(j);
}

json to_json(const RunConfig& c) {
    json variants = json::array(), modes = json::array();
    for (auto v : c.variants) variants.push_back(models::to_string(v));
    for (auto m : c.modes) modes.push_back(models::to_string(m));
    return {
        {"panel", c.panel.string()},
        {"format", c.format == data::ValueKind::Prices ? "prices" : "returns"},
        {"weights", c.weights.string()},
        {"tau", c.tau},
        {"alpha", c.alpha},
        {"variants", variants},
        {"modes", modes},
        {"component_lag", models::to_string(c.component_lag)},
        {"signed_phi1", c.signed_phi1},
        {"loss", estimation::to_string(c.optimizer.loss)},
        {"optimizer",
         {{"n_random_starts", c.optimizer.n_random_starts},
          {"n_best_refined", c.optimizer.n_best_refined},
          {"simplex_tolerance", c.optimizer.simplex_tolerance},
          {"max_iterations", c.optimizer.max_iterations},
          {"max_restarts", c.optimizer.max_restarts},
          {"draws_per_start", c.optimizer.draws_per_start},
          {"init_window", c.optimizer.init.window}}},
        {"rolling",
         {{"window", c.rolling.window},
          {"step", c.rolling.step},
          {"refit_every", c.rolling.refit_every},
          {"warm_start", c.rolling.warm_start}}},
        {"bootstrap",
         {{"reps", c.bootstrap.bootstrap_reps}, {"block_length", c.bootstrap.block_length}, {"alpha", c.bootstrap.alpha}}},
        {"backtest", {{"dq_lags", c.dq_lags}}},
        {"quantilogram", {{"tau", c.quantilogram_tau}, {"lag", c.quantilogram_lag}}},
        {"seed", c.seed},
        {"threads", c.threads},
        {"output_dir", c.output_dir.string()},
    };
}

Subcommand parse_subcommand(std::string_view s) {
    if (s == "select") return Subcommand::Select;
    if (s == "quantilogram") return Subcommand::Quantilogram;
    if (s == "estimate") return Subcommand::Estimate;
    if (s == "backtest") return Subcommand::Backtest;
    if (s == "forecast") return Subcommand::Forecast;
    if (s == "mcs") return Subcommand::Mcs;
    if (s == "pipeline") return Subcommand::Pipeline;
    throw ValidationError("unknown subcommand: " + std::string(s));
}

std::string to_string(Subcommand s) {
    switch (s) {
        case Subcommand::Select: return "select";
        case Subcommand::Quantilogram: return "quantilogram";
        case Subcommand::Estimate: return "estimate";
        case Subcommand::Backtest: return "backtest";
        case Subcommand::Forecast: return "forecast";
        case Subcommand::Mcs: return "mcs";
        case Subcommand::Pipeline: return "pipeline";
    }
    return "?";
}

int run(Subcommand cmd, const RunConfig& config) {
    const auto name = to_string(cmd);
    try {
        fs::create_directories(config.output_dir);
    } catch (const fs::filesystem_error&) {
        return kIoError;
    }
    try {
        config.validate();
    } catch (const ValidationError& e) {
        std::ofstream out(config.output_dir / ("error_" + name + ".json"));
        out << json{{"stage", "validate"}, {"code", int{kValidationError}}, {"error", e.what()}}.dump(2) << '\n';
        return kValidationError;
    }
    if (cmd != Subcommand::Pipeline) return guarded(cmd, config, name);

    const Subcommand stages[] = {Subcommand::Select, Subcommand::Quantilogram, Subcommand::Estimate,
                                 Subcommand::Backtest, Subcommand::Forecast, Subcommand::Mcs};
    RunConfig c = config;
    if (c.weights.empty()) c.weights.clear();
    const auto started = std::chrono::steady_clock::now();
    json done = json::array();
    for (auto stage : stages) {
        const int code = guarded(stage, c, to_string(stage));
        if (code != kSuccess) {
            std::ofstream out(c.output_dir / "pipeline_error.json");
            out << json{{"failed_stage", to_string(stage)}, {"code", code}, {"completed", done}}.dump(2) << '\n';
            return code;
        }
        done.push_back(to_string(stage));
    }
    Manifest m("pipeline", c);
    m.note("stages", done);
    m.note("elapsed_seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count());
    m.write();
    return kSuccess;
}

}  // namespace caviar::app
