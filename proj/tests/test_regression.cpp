// Regression baselines for the N = 8 Ohmic runs. Missing baseline files are
// recorded on first run (or rewritten when QBM_WRITE_BASELINES=1); later runs
// must reproduce them.

#include "support.hpp"

#include "qbm/experiments.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

using namespace qbm;
using namespace qbm::experiments;

namespace {

constexpr double kBaselineTolerance = 1e-9;

ScenarioConfig ohmic_n8(double t_max, int points) {
    return testing::ohmic(8, 0.2, 2.0, true, 7, t_max, points);
}

using Table = std::vector<std::vector<double>>;

std::filesystem::path baseline_path(const std::string& name) {
    return std::filesystem::path(QBM_BASELINE_DIR) / (name + ".csv");
}

void write_table(const std::filesystem::path& path, const std::string& header, const Table& rows) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    out << header << '\n';
    out.precision(17);
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
        out << '\n';
    }
}

Table read_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    Table rows;
    while (std::getline(in, line)) {
        std::vector<double> row;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
        rows.push_back(row);
    }
    return rows;
}

// Records or compares a baseline table; values agree to an absolute
// tolerance since every column is O(1) or smaller.
void check_baseline(const std::string& name, const std::string& header, const Table& rows) {
    const auto path = baseline_path(name);
    const char* rewrite = std::getenv("QBM_WRITE_BASELINES");
    if ((rewrite && std::string(rewrite) == "1") || !std::filesystem::exists(path)) {
        write_table(path, header, rows);
        MESSAGE("recorded baseline " << path.string());
        return;
    }
    const Table stored = read_table(path);
    REQUIRE(stored.size() == rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        REQUIRE(stored[r].size() == rows[r].size());
        for (std::size_t c = 0; c < rows[r].size(); ++c) {
            INFO(name << " row " << r << " column " << c);
            CHECK(std::abs(stored[r][c] - rows[r][c]) <= kBaselineTolerance);
        }
    }
}

} // namespace

TEST_CASE("POD curve baseline") {
    const auto report = run_pod(ohmic_n8(20.0, 81));
    Table rows;
    for (const auto& s : report.samples) rows.push_back({s.t, s.purity_1, s.purity_sp, s.neg_12, s.neg_spep});
    check_baseline("pod_n8", "t,purity_1,purity_Sp,neg_12,neg_SpEp", rows);

    REQUIRE(report.half_time_1.has_value());
    CHECK(*report.half_time_1 > 0.0);
}

TEST_CASE("exclusivity fraction baseline") {
    auto cfg = ohmic_n8(20.0, 50);
    cfg.initial.bath_temperature = 0.0;
    cfg.purified = false;
    const auto report = run_exclusivity(cfg);
    check_baseline("exclusivity_n8", "excluding_fraction", {{report.excluding_fraction}});
}

TEST_CASE("cat decoherence baseline") {
    const auto cfg = ohmic_n8(12.0, 49);
    const auto u = prepare(cfg);
    const int n = u.total_modes();
    Vector left = u.initial.mean();
    Vector right = left;
    left(0) = 2.0;
    right(0) = -2.0;
    const gaussian::CatState cat({{1.0, left}, {1.0, right}}, u.initial.cov());
    ModeSet env;
    for (int i = 1; i < n; ++i) env.push_back(i);

    Table rows;
    for (double t : cfg.times)
        rows.push_back({t, gaussian::decoherence_factor(gaussian::evolve(cat, u.propagator(t)), env, u.particle_width)});
    check_baseline("decoherence_n8", "t,r", rows);

    // drops below 0.05 within the period of the slowest bath mode
    double slowest = cfg.model.bath.front().omega;
    for (const auto& b : cfg.model.bath) slowest = std::min(slowest, b.omega);
    const double period = 2.0 * std::numbers::pi / slowest;
    bool below = false;
    for (const auto& row : rows)
        if (row[0] <= period && row[1] < 0.05) below = true;
    CHECK(below);
    CHECK(rows.front()[1] == doctest::Approx(1.0).epsilon(1e-12));
}
