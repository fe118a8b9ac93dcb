#ifndef OGLM_REPORT_HPP
#define OGLM_REPORT_HPP

#include <fstream>
#include <json.hpp>
#include <string>

#include "oglm/simulate.hpp"

namespace oglm {

// Flat table: one row per estimator (or test method) per cell, plus a JSON
// sidecar of the raw per-replication records.

inline void write_estimation_csv(const std::string& path, const SimConfig& cfg,
                                 const SimReport& report) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out.precision(10);
    out << "family,sharding,N,K,p,B,estimator,armse,failures\n";
    for (const auto& [name, value] : report.armse) {
        const int fails = report.failures.count(name) ? report.failures.at(name) : 0;
        out << family_name(cfg.family) << "," << strategy_name(cfg.sharding) << "," << cfg.N
            << "," << cfg.K << "," << cfg.pilot_fraction << "," << cfg.B << "," << name << ","
            << value << "," << fails << "\n";
    }
}

inline void write_lrt_csv(const std::string& path, const SimConfig& cfg,
                          const SimReport& report) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out.precision(10);
    out << "family,sharding,N,K,p,B,method,size,power,failures\n";
    for (const auto& [name, size_value] : report.size) {
        const double power_value =
            report.power.count(name) ? report.power.at(name) : std::nan("");
        const int fails = report.failures.count(name) ? report.failures.at(name) : 0;
        out << family_name(cfg.family) << "," << strategy_name(cfg.sharding) << "," << cfg.N
            << "," << cfg.K << "," << cfg.pilot_fraction << "," << cfg.B << "," << name << ","
            << size_value << "," << power_value << "," << fails << "\n";
    }
}

inline nlohmann::json report_to_json(const SimConfig& cfg, const SimReport& report) {
    nlohmann::json j;
    j["config"] = {{"family", family_name(cfg.family)},
                   {"sharding", strategy_name(cfg.sharding)},
                   {"N", cfg.N},
                   {"K", cfg.K},
                   {"p", cfg.pilot_fraction},
                   {"B", cfg.B},
                   {"base_seed", cfg.base_seed},
                   {"covariate_law", covariate_law_name(cfg.covariate_law)},
                   {"alpha", cfg.alpha}};
    j["beta_true"] = std::vector<double>(cfg.beta_true.data(),
                                         cfg.beta_true.data() + cfg.beta_true.size());
    j["wall_seconds"] = report.wall_seconds;
    j["armse"] = report.armse;
    j["size"] = report.size;
    j["power"] = report.power;
    j["failures"] = report.failures;
    auto& est = j["raw_estimates"] = nlohmann::json::array();
    for (const auto& rec : report.raw_estimates) {
        nlohmann::json r = {{"b", rec.b},
                            {"estimator", estimator_name(rec.kind)},
                            {"ok", rec.ok}};
        if (rec.ok)
            r["beta"] = std::vector<double>(rec.beta.data(), rec.beta.data() + rec.beta.size());
        else
            r["error"] = rec.error;
        est.push_back(std::move(r));
    }
    auto& tests = j["raw_tests"] = nlohmann::json::array();
    for (const auto& rec : report.raw_tests) {
        nlohmann::json r = {{"b", rec.b},
                            {"method", test_method_name(rec.method)},
                            {"under_null", rec.under_null},
                            {"ok", rec.ok}};
        if (rec.ok) {
            r["statistic"] = rec.statistic;
            r["df"] = rec.df;
            r["p_value"] = rec.p_value;
            r["clamped"] = rec.clamped;
            r["reject"] = rec.reject;
        } else {
            r["error"] = rec.error;
        }
        tests.push_back(std::move(r));
    }
    return j;
}

inline void write_report_json(const std::string& path, const SimConfig& cfg,
                              const SimReport& report) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << report_to_json(cfg, report).dump(2) << "\n";
}

}  // namespace oglm

#endif  // OGLM_REPORT_HPP
