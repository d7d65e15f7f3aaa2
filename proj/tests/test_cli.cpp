#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli_runner.hpp"
#include "hybridcast/csv.hpp"
#include "service_harness.hpp"

using cli::quote;

namespace {

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        const char* bin = std::getenv("HYBRIDCAST_CLI");
        if (bin == nullptr) GTEST_SKIP() << "HYBRIDCAST_CLI is not set";
        binary_ = bin;
        dir_ = harness::fresh_dir("cli");
    }
    void TearDown() override {
        if (!dir_.empty()) std::filesystem::remove_all(dir_);
    }

    cli::Outcome run(const std::string& args) { return cli::run(binary_, args, dir_); }
    std::string path(const std::string& name) const { return quote((dir_ / name).string()); }

    void write(const std::string& name, const std::string& text) const { std::ofstream(dir_ / name) << text; }

    void make_data(std::size_t n = 96) {
        ASSERT_EQ(run("synth --kind seasonal --n " + std::to_string(n) + " --seed 7 --out " + path("data.csv")).exit_code, 0);
    }

    std::string binary_;
    std::filesystem::path dir_;
};

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

}  // namespace

TEST_F(CliTest, ExitCodes) {
    EXPECT_EQ(run("--help").exit_code, 0);
    EXPECT_EQ(run("fit --bogus").exit_code, 2);
    EXPECT_EQ(run("synth --kind weird").exit_code, 2);
    write("bad.csv", "timestamp,value\n0,1\n60,2\n");
    const auto r = run("fit --in " + path("bad.csv") + " --out " + path("m.json") + " --family ets");
    EXPECT_EQ(r.exit_code, 1);
    EXPECT_NE(r.err.find("error: too_short"), std::string::npos) << r.err;
}

TEST_F(CliTest, FitThenForecastCsv) {
    make_data();
    const auto fit = run("fit --in " + path("data.csv") + " --out " + path("m.json") +
                         " --family sarima --p 0 --d 1 --q 1 --P 0 --D 1 --Q 1 --s 12");
    ASSERT_EQ(fit.exit_code, 0) << fit.err;
    const auto fc = run("forecast --model " + path("m.json") + " --horizon 6 --format csv");
    ASSERT_EQ(fc.exit_code, 0) << fc.err;
    const auto rows = hybridcast::csv::parse(fc.out);
    ASSERT_EQ(rows.size(), 7u);
    EXPECT_EQ(rows[0], (std::vector<std::string>{"timestamp", "point", "lower", "upper"}));
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const double lo = std::stod(rows[i][2]), pt = std::stod(rows[i][1]), hi = std::stod(rows[i][3]);
        EXPECT_LT(lo, pt);
        EXPECT_LT(pt, hi);
    }
}

TEST_F(CliTest, LstmForecastHasEmptyBounds) {
    make_data(60);
    ASSERT_EQ(run("fit --in " + path("data.csv") + " --out " + path("m.json") +
                  " --family lstm --units 4 --window 12 --epochs 3 --format structured")
                  .exit_code,
              0);
    const auto fc = run("forecast --model " + path("m.json") + " --horizon 2 --format csv");
    ASSERT_EQ(fc.exit_code, 0) << fc.err;
    const auto rows = hybridcast::csv::parse(fc.out);
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[1][2], "");
    EXPECT_EQ(rows[1][3], "");
}

TEST_F(CliTest, CorruptModelFileFails) {
    write("broken.json", "{\"format\": \"hybridcast-model\", \"spec\": ");
    const auto r = run("forecast --model " + path("broken.json") + " --horizon 3");
    EXPECT_EQ(r.exit_code, 1);
    EXPECT_NE(r.err.find("error:"), std::string::npos);
}

TEST_F(CliTest, TableAndStructuredCarryTheSameNumbers) {
    make_data();
    write("specs.json", R"([{"family":"ets","ets":{"trend":"additive","seasonal":"additive","period":12}},
                            {"family":"arima","order":{"p":1,"d":1,"q":0}}])");
    const std::string base = "compare --in " + path("data.csv") + " --specs " + path("specs.json") + " --folds 3 --horizon 6";
    const auto table = run(base + " --format table");
    const auto structured = run(base + " --format structured");
    ASSERT_EQ(table.exit_code, 0) << table.err;
    ASSERT_EQ(structured.exit_code, 0) << structured.err;
    const auto board = nlohmann::json::parse(structured.out)["leaderboard"];
    const auto rows = lines(table.out);
    ASSERT_EQ(rows.size(), 2 + board.size());
    for (std::size_t i = 0; i < board.size(); ++i) {
        std::vector<std::string> cells;
        std::istringstream in(rows[2 + i]);
        for (std::string cell; std::getline(in, cell, '|');) {
            cell.erase(0, cell.find_first_not_of(' '));
            cell.erase(cell.find_last_not_of(' ') + 1);
            cells.push_back(cell);
        }
        ASSERT_EQ(cells.size(), 5u);
        EXPECT_EQ(cells[0], board[i]["model"]);
        EXPECT_EQ(std::stod(cells[1]), board[i]["metrics"]["mae"].get<double>());
        EXPECT_EQ(std::stod(cells[3]), board[i]["metrics"]["rmse"].get<double>());
        EXPECT_EQ(std::stod(cells[4]), board[i]["metrics"]["mape"].get<double>());
    }
}

TEST_F(CliTest, PreprocessWritesRecords) {
    make_data(40);
    const auto r = run("preprocess --in " + path("data.csv") + " --step log --step difference:1 --out " + path("out.csv") +
                       " --records " + path("rec.json"));
    ASSERT_EQ(r.exit_code, 0) << r.err;
    const auto rec = nlohmann::json::parse(cli::slurp(dir_ / "rec.json"));
    ASSERT_EQ(rec.size(), 2u);
    EXPECT_EQ(rec[1]["kind"], "difference");
    EXPECT_EQ(hybridcast::csv::parse(cli::slurp(dir_ / "out.csv")).size(), 40u);  // header + 39 rows
}

TEST_F(CliTest, PipelineIsDeterministic) {
    auto once = [&] {
        std::string all;
        EXPECT_EQ(run("synth --kind seasonal --n 96 --seed 3 --out " + path("d.csv")).exit_code, 0);
        for (const std::string fam : {"arima --p 1 --d 1 --q 0", "ets --trend additive --seasonal additive --period 12",
                                      "lstm --units 4 --window 12 --epochs 5", "sarima --p 0 --d 1 --q 1 --P 0 --D 1 --Q 1 --s 12"}) {
            const auto r = run("fit --in " + path("d.csv") + " --out " + path("m.json") + " --seed 5 --format structured --family " + fam);
            EXPECT_EQ(r.exit_code, 0) << r.err;
            all += r.out + cli::slurp(dir_ / "m.json");
        }
        const auto r = run("compare --in " + path("d.csv") + " --specs " + path("specs.json") + " --folds 2 --horizon 6 --seed 5 --format structured");
        EXPECT_EQ(r.exit_code, 0) << r.err;
        return all + r.out;
    };
    write("specs.json", R"([{"family":"ets"},{"family":"lstm","lstm":{"hidden_units":4,"window":12,"epochs":5}}])");
    const auto a = once();
    const auto b = once();
    EXPECT_EQ(a, b);
}

TEST_F(CliTest, ServeFailsOnBusyPort) {
    hybridcast::service::ServiceConfig cfg;
    cfg.data_dir = dir_ / "svc";
    harness::LiveService occupied(cfg);
    const auto r = run("serve --port " + std::to_string(occupied.port()) + " --host 127.0.0.1 --data-dir " + path("svc2"));
    EXPECT_EQ(r.exit_code, 1);
    EXPECT_NE(r.err.find("cannot bind"), std::string::npos) << r.err;
}
