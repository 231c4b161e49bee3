#include "caviar/app.hpp"
#include "caviar/report.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace caviar;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name, const std::string& content) {
    const auto p = fs::temp_directory_path() / name;
    std::ofstream(p) << content;
    return p;
}

}  // namespace

TEST_CASE("number formatting round-trips") {
    for (double v : {0.1, -2.0354, 1e-300, 123456789.123, -0.0}) CHECK(std::stod(report::fmt(v)) == v);
    CHECK(report::fmt(std::nan("")) == "nan");
}

TEST_CASE("artifact names") {
    CHECK(report::artifact_name("AMGN", {models::Variant::SAV, models::Mode::SE}, "path") == "AMGN_SAV_SE_path.csv");
    CHECK(report::artifact_name("A_B", {models::Variant::IG, models::Mode::Baseline}, "fit", "json") ==
          "A_B_IG_Baseline_fit.json");
}

TEST_CASE("sha256 of a known string") {
    const auto p = temp_file("caviar_sha.txt", "abc");
    CHECK(report::sha256_file(p) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    fs::remove(p);
}

TEST_CASE("path and weights CSV round trip") {
    models::QuantilePath path;
    path.var = {-1.25, -2.0 / 3.0};
    path.es = {-1.5, -1.0};
    path.qp = {-1.0, -0.5};
    path.qs = {-0.25, -1.0 / 6.0};
    std::vector<data::Date> dates{*data::parse_date("2020-01-02"), *data::parse_date("2020-01-03")};
    std::ostringstream out;
    report::write_path_csv(out, dates, path);
    const auto p = temp_file("caviar_path.csv", out.str());
    const auto back = report::read_path_csv(p);
    CHECK(back.dates == dates);
    CHECK(back.path.var == path.var);
    CHECK(back.path.qs == path.qs);
    fs::remove(p);

    const std::vector<std::string> tickers{"A", "B", "C"};
    const std::vector<selection::SpilloverWeights> w{{0, {}, {}}, {1, {0, 2}, {0.3, 0.7}}, {2, {1}, {1.0}}};
    std::ostringstream wout;
    report::write_weights_csv(wout, tickers, w);
    const auto wp = temp_file("caviar_weights.csv", wout.str());
    const auto wb = report::read_weights_csv(wp, tickers);
    REQUIRE(wb.size() == 3);
    CHECK(wb[0].empty());
    CHECK(wb[1].sources == std::vector<std::size_t>{0, 2});
    CHECK(wb[1].weights == std::vector<double>{0.3, 0.7});
    fs::remove(wp);
}

TEST_CASE("forecast CSV round trip") {
    forecast::ForecastRecord r;
    r.date = *data::parse_date("2021-05-04");
    r.target = "X";
    r.model = "AS-SE";
    r.var = -1.1;
    r.es = -1.7;
    r.realized = 0.4;
    r.fz0 = 0.123;
    r.spillover_coefficient = std::nan("");
    r.refit = true;
    std::ostringstream out;
    report::write_forecast_csv(out, {r});
    const auto p = temp_file("caviar_fc.csv", out.str());
    const auto back = report::read_forecast_csv(p);
    REQUIRE(back.size() == 1);
    CHECK(back[0].model == "AS-SE");
    CHECK(back[0].var == -1.1);
    CHECK(std::isnan(back[0].spillover_coefficient));
    CHECK(back[0].refit);
    fs::remove(p);
}

TEST_CASE("run config parsing") {
    const auto cfg = app::config_from_json(nlohmann::json::parse(
        R"({"panel": "x.csv", "tau": 0.01, "variants": ["SAV"], "modes": ["SE"], "optimizer": {"n_random_starts": 50},
            "rolling": {"window": 100}, "bootstrap": {"block_length": 5}, "loss": "printed"})"));
    CHECK(cfg.tau == 0.01);
    CHECK(cfg.variants.size() == 1);
    CHECK(cfg.modes.front() == models::Mode::SE);
    CHECK(cfg.optimizer.n_random_starts == 50);
    CHECK(cfg.rolling.window == 100);
    CHECK(cfg.bootstrap.block_length == 5);
    CHECK(cfg.optimizer.loss == estimation::LossForm::Printed);
    CHECK_THROWS_AS(app::config_from_json(nlohmann::json::parse(R"({"tua": 0.05})")), app::ValidationError);
    CHECK_THROWS_AS(app::config_from_json(nlohmann::json::parse(R"({"optimizer": {"starts": 5}})")), app::ValidationError);
    CHECK_THROWS_AS(app::config_from_json(nlohmann::json::parse(R"({"tau": "high"})")), app::ValidationError);
    CHECK_THROWS_AS(app::config_from_json(nlohmann::json::parse(R"({"modes": ["Y"]})")), app::ValidationError);

    const auto again = app::config_from_json(app::to_json(cfg));
    CHECK(app::to_json(again) == app::to_json(cfg));

    app::RunConfig bad = cfg;
    bad.panel = temp_file("caviar_cfg_panel.csv", "date,A\n");
    bad.tau = 1.5;
    CHECK_THROWS_AS(bad.validate(), app::ValidationError);
    fs::remove(bad.panel);
}
