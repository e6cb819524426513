#include "qbm/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <ostream>
#include <sstream>

namespace qbm::runner {

namespace {

class CsvWriter {
public:
    explicit CsvWriter(std::initializer_list<const char*> columns) {
        text_ = std::string(kCsvVersionLine) + "\n";
        bool first = true;
        for (const char* c : columns) {
            text_ += first ? "" : ",";
            text_ += c;
            first = false;
        }
        text_ += "\n";
    }

    void row(std::initializer_list<double> values) {
        bool first = true;
        for (double v : values) {
            if (!std::isfinite(v)) throw ConditioningError("non-finite value in CSV output");
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.17g", v);
            text_ += first ? "" : ",";
            text_ += buf;
            first = false;
        }
        text_ += "\n";
    }

    std::string take() { return std::move(text_); }

private:
    std::string text_;
};

double flag(bool b) { return b ? 1.0 : 0.0; }

std::string format_optional(const std::optional<double>& v) {
    if (!v) return "none";
    std::ostringstream os;
    os << *v;
    return os.str();
}

} // namespace

Output execute(const config::RunConfig& cfg) {
    const auto& sc = cfg.scenario_config;
    std::ostringstream summary;
    summary << "scenario " << config::scenario_name(cfg.scenario) << ", " << sc.model.bath.size() << " bath modes, "
            << sc.times.size() << " time points\n";

    switch (cfg.scenario) {
    case config::Scenario::Pod: {
        const auto r = experiments::run_pod(sc);
        CsvWriter w{"t", "purity_1", "purity_Sp", "neg_12", "neg_SpEp"};
        for (const auto& s : r.samples) w.row({s.t, s.purity_1, s.purity_sp, s.neg_12, s.neg_spep});
        summary << "half-time purity_1: " << format_optional(r.half_time_1)
                << ", purity_Sp: " << format_optional(r.half_time_sp) << "\n";
        if (r.early_increase_1 || r.early_increase_sp) summary << "note: purity increased at early times\n";
        if (r.recurrence_1 || r.recurrence_sp) summary << "note: finite-bath recurrences in the window\n";
        return {w.take(), summary.str()};
    }
    case config::Scenario::Er: {
        const auto r = experiments::run_er_check(sc);
        CsvWriter w{"t", "neg_12", "neg_SpEp", "witnessed"};
        std::size_t count = 0;
        for (const auto& s : r.samples) {
            w.row({s.t, s.neg_12, s.neg_spep, flag(s.witnessed)});
            count += s.witnessed ? 1 : 0;
        }
        summary << "entanglement relativity witnessed at " << count << " of " << r.samples.size() << " times\n";
        return {w.take(), summary.str()};
    }
    case config::Scenario::Exclusivity: {
        const auto r = experiments::run_exclusivity(sc);
        CsvWriter w{"t", "neg_12", "neg_SpEp", "excluding"};
        for (const auto& s : r.samples) w.row({s.t, s.neg_12, s.neg_spep, flag(s.excluding)});
        summary << "excluding fraction: " << r.excluding_fraction << "\n";
        return {w.take(), summary.str()};
    }
    case config::Scenario::Marginal: {
        const auto r = experiments::marginal_incompatibility(sc);
        CsvWriter w{"t", "l1_distance", "mean_Sp", "var_Sp", "mean_1", "var_1"};
        double lo = r.front().l1_distance;
        for (const auto& s : r) {
            w.row({s.t, s.l1_distance, s.mean_sp, s.var_sp, s.mean_1, s.var_1});
            lo = std::min(lo, s.l1_distance);
        }
        summary << "smallest L1 distance: " << lo << "\n";
        return {w.take(), summary.str()};
    }
    case config::Scenario::OracleCompare: {
        const auto r = experiments::run_oracle_compare(sc, cfg.oracle);
        CsvWriter w{"t",           "purity_1_gauss",    "purity_1_fock",    "neg_12_gauss", "neg_12_fock",
                    "decoherence_gauss", "decoherence_fock", "moment_diff", "max_abs_diff"};
        for (const auto& s : r.samples)
            w.row({s.t, s.purity_gauss, s.purity_fock, s.neg_gauss, s.neg_fock, s.decoherence_gauss, s.decoherence_fock,
                   s.moment_diff, s.max_abs_diff});
        summary << "certified cutoff " << r.certified_cutoff << " (change " << r.convergence_change
                << "), max |gauss - fock| " << r.max_abs_diff << "\n";
        return {w.take(), summary.str()};
    }
    }
    throw DomainError("unknown scenario");
}

int run(const config::RunConfig& cfg, std::ostream& out, std::ostream& log) {
    try {
        const Output result = execute(cfg);
        if (cfg.output_path.empty()) {
            out << result.csv;
            out.flush();
        } else {
            std::ofstream file(cfg.output_path, std::ios::binary | std::ios::trunc);
            if (!file) throw DomainError("output: cannot open \"" + cfg.output_path + "\" for writing");
            file << result.csv;
            file.close();
            if (!file) throw DomainError("output: failed writing \"" + cfg.output_path + "\"");
        }
        log << result.summary;
        return kOk;
    } catch (const DomainError& e) {
        log << "error: " << e.what() << "\n";
        return kDomainError;
    } catch (const ConditioningError& e) {
        log << "numerical error: " << e.what() << "\n";
        return kConditioningError;
    }
}

} // namespace qbm::runner
