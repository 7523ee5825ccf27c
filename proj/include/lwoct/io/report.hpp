#pragma once

#include "lwoct/io/portable.hpp"
#include "lwoct/metrics.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

namespace lwoct::io {

inline nlohmann::json to_json(const BlandAltmanStats& s)
{
    return {{"n", s.n},
            {"mean_diff", s.mean_diff},
            {"sd_diff", s.sd_diff},
            {"loa_low", s.loa_low},
            {"loa_high", s.loa_high},
            {"pct_within", s.pct_within}};
}

inline nlohmann::json to_json(const std::vector<EffortSummary>& effort)
{
    auto out = nlohmann::json::object();
    for (const auto& e : effort)
        out[std::string(to_string(e.id))] = {{"n", e.n}, {"mean_seconds", e.mean_seconds}, {"mean_clicks", e.mean_clicks}};
    return out;
}

inline nlohmann::json to_json(const MetricsReport& report)
{
    using nlohmann::json;
    json boundaries = json::object();
    for (const auto& m : report.boundaries) {
        json scans = json::array();
        for (const auto& s : m.scans)
            scans.push_back({{"volume_id", s.volume_id},
                             {"bscan_index", s.bscan_index},
                             {"unsigned_error", s.unsigned_error},
                             {"irregularity_a", s.irregularity_a},
                             {"irregularity_b", s.irregularity_b}});
        boundaries[std::string(to_string(m.id))] = {{"mean_unsigned_error", m.mean_unsigned_error},
                                                    {"bland_altman", to_json(m.bland_altman)},
                                                    {"scans", std::move(scans)}};
    }
    json dice = json::array();
    for (const auto& d : report.dice)
        dice.push_back({{"volume_id", d.volume_id},
                        {"bscan_index", d.bscan_index},
                        {"dice", d.dice ? json(*d.dice) : json(nullptr)}});
    return {{"boundaries", std::move(boundaries)},
            {"dice", std::move(dice)},
            {"effort_a", to_json(report.effort_a)},
            {"effort_b", to_json(report.effort_b)}};
}

namespace detail {

inline std::string fmt(const char* pattern, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, pattern, args...);
    return buf;
}

} // namespace detail

/// Writes report.json plus CSV tables into out_dir and returns the written paths.
inline std::vector<std::filesystem::path> write_metrics_report(const MetricsReport& report,
                                                              const std::filesystem::path& out_dir)
{
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec)
        throw Error(ErrorCode::IoFailure, "cannot create " + out_dir.string() + ": " + ec.message());
    std::vector<std::filesystem::path> written;
    auto emit = [&](const std::string& name, const std::string& text) {
        written.push_back(out_dir / name);
        write_text_file(written.back(), text);
    };
    emit("report.json", to_json(report).dump(2) + "\n");

    std::string errors = "boundary,volume_id,bscan_index,unsigned_error\n";
    std::string irregularity = "boundary,volume_id,bscan_index,irregularity_a,irregularity_b\n";
    for (const auto& m : report.boundaries) {
        const std::string id(to_string(m.id));
        for (const auto& s : m.scans) {
            errors += detail::fmt("%s,%s,%d,%.6f\n", id.c_str(), s.volume_id.c_str(), s.bscan_index, s.unsigned_error);
            irregularity += detail::fmt("%s,%s,%d,%.6f,%.6f\n", id.c_str(), s.volume_id.c_str(), s.bscan_index,
                                        s.irregularity_a, s.irregularity_b);
        }
        std::string ba = "mean,diff\n";
        for (const auto& [mean, diff] : m.ba_points)
            ba += detail::fmt("%.6f,%.6f\n", mean, diff);
        emit("bland_altman_" + id + ".csv", ba);
    }
    emit("unsigned_error.csv", errors);
    emit("irregularity.csv", irregularity);

    std::string dice = "volume_id,bscan_index,dice\n";
    for (const auto& d : report.dice)
        dice += d.dice ? detail::fmt("%s,%d,%.6f\n", d.volume_id.c_str(), d.bscan_index, *d.dice)
                       : detail::fmt("%s,%d,\n", d.volume_id.c_str(), d.bscan_index);
    emit("dice.csv", dice);

    std::string effort = "set,boundary,n,mean_seconds,mean_clicks\n";
    for (const auto* set : {&report.effort_a, &report.effort_b})
        for (const auto& e : *set)
            effort += detail::fmt("%s,%s,%d,%.3f,%.3f\n", set == &report.effort_a ? "a" : "b",
                                  std::string(to_string(e.id)).c_str(), e.n, e.mean_seconds, e.mean_clicks);
    emit("effort.csv", effort);
    return written;
}

} // namespace lwoct::io
