#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "wbhawkes/errors.hpp"
#include "wbhawkes/eval.hpp"
#include "wbhawkes/event_sequence.hpp"
#include "wbhawkes/granger.hpp"
#include "wbhawkes/model.hpp"
#include "wbhawkes/simulate.hpp"

namespace wbhawkes {

// Persistence for every artifact the tooling exchanges.
//
// Datasets are a CSV with header `seq_id,time,type` plus a JSON sidecar
// (`<file>.meta.json` next to `<file>.csv`) holding the type count, a time
// unit label and one [t_begin, t_end] window per sequence. seq_id values
// are 0-based and contiguous; type values are 1-based in every file format
// (and 0-based in memory). Times are written with 12 significant digits;
// writes are byte-deterministic for identical input.

struct Dataset {
    std::vector<EventSequence> sequences;
    std::size_t c_count = 0;
    std::string time_unit = "units";
};

namespace detail {

inline std::string format_double(double v, int precision = 12) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, precision);
    return std::string(buf, res.ptr);
}

inline nlohmann::json load_json(const std::filesystem::path& path, const char* what) {
    std::ifstream in(path);
    if (!in) throw DataError(std::string(what) + ": cannot open " + path.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string(what) + ": " + path.string() + ": " + e.what());
    }
    return doc;
}

inline void store_text(const std::filesystem::path& path, const std::string& text, const char* what) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError(std::string(what) + ": cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw DataError(std::string(what) + ": write failed for " + path.string());
}

template <typename T>
T require_field(const nlohmann::json& doc, const char* field, const char* what) {
    if (!doc.contains(field)) throw DataError(std::string(what) + ": missing field '" + field + "'");
    try {
        return doc.at(field).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw DataError(std::string(what) + ": field '" + field + "' has the wrong type");
    }
}

} // namespace detail

inline std::filesystem::path dataset_sidecar_path(const std::filesystem::path& csv_path) {
    std::filesystem::path p = csv_path;
    if (p.extension() == ".csv") p.replace_extension();
    p += ".meta.json";
    return p;
}

inline void write_dataset(const Dataset& dataset, const std::filesystem::path& csv_path) {
    validate_dataset(dataset.sequences, dataset.c_count);
    std::string csv = "seq_id,time,type\n";
    for (std::size_t n = 0; n < dataset.sequences.size(); ++n) {
        for (const Event& ev : dataset.sequences[n].events) {
            csv += std::to_string(n);
            csv += ',';
            csv += detail::format_double(ev.time);
            csv += ',';
            csv += std::to_string(ev.type + 1);
            csv += '\n';
        }
    }
    detail::store_text(csv_path, csv, "dataset");

    nlohmann::json meta;
    meta["c_count"] = dataset.c_count;
    meta["time_unit"] = dataset.time_unit;
    auto& windows = meta["windows"] = nlohmann::json::array();
    for (const auto& seq : dataset.sequences)
        windows.push_back({{"t_begin", seq.t_begin}, {"t_end", seq.t_end}});
    detail::store_text(dataset_sidecar_path(csv_path), meta.dump(2) + "\n", "dataset metadata");
}

inline Dataset read_dataset(const std::filesystem::path& csv_path) {
    const auto meta = detail::load_json(dataset_sidecar_path(csv_path), "dataset metadata");
    Dataset dataset;
    dataset.c_count = detail::require_field<std::size_t>(meta, "c_count", "dataset metadata");
    dataset.time_unit = detail::require_field<std::string>(meta, "time_unit", "dataset metadata");
    if (!meta.contains("windows") || !meta.at("windows").is_array())
        throw DataError("dataset metadata: missing field 'windows'");
    for (const auto& w : meta.at("windows")) {
        EventSequence seq;
        seq.t_begin = detail::require_field<double>(w, "t_begin", "dataset metadata window");
        seq.t_end = detail::require_field<double>(w, "t_end", "dataset metadata window");
        dataset.sequences.push_back(std::move(seq));
    }

    std::ifstream in(csv_path);
    if (!in) throw DataError("dataset: cannot open " + csv_path.string());
    std::string line;
    if (!std::getline(in, line) || line != "seq_id,time,type")
        throw DataError("dataset: " + csv_path.string() + ": expected header 'seq_id,time,type'");

    const auto fail = [&](std::size_t row, const std::string& why) {
        throw DataError("dataset: " + csv_path.string() + ": row " + std::to_string(row) + ": " + why);
    };
    std::size_t row = 1;
    long long current_seq = -1;
    double prev_time = 0.0;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        std::istringstream fields(line);
        std::string seq_str, time_str, type_str;
        if (!std::getline(fields, seq_str, ',') || !std::getline(fields, time_str, ',') ||
            !std::getline(fields, type_str))
            fail(row, "expected 'seq_id,time,type'");

        long long seq_id = -1;
        auto parsed = std::from_chars(seq_str.data(), seq_str.data() + seq_str.size(), seq_id);
        if (parsed.ec != std::errc() || parsed.ptr != seq_str.data() + seq_str.size() || seq_id < 0)
            fail(row, "malformed seq_id '" + seq_str + "'");
        double time = 0.0;
        parsed = std::from_chars(time_str.data(), time_str.data() + time_str.size(), time);
        if (parsed.ec != std::errc() || parsed.ptr != time_str.data() + time_str.size())
            fail(row, "malformed time '" + time_str + "'");
        long long type = 0;
        parsed = std::from_chars(type_str.data(), type_str.data() + type_str.size(), type);
        if (parsed.ec != std::errc() || parsed.ptr != type_str.data() + type_str.size())
            fail(row, "malformed type '" + type_str + "'");

        if (seq_id != current_seq) {
            // Groups appear in ascending seq_id order; sequences with no
            // events simply contribute no rows.
            if (seq_id <= current_seq)
                fail(row, "seq_id groups must be ascending (got " + seq_str + ")");
            if (static_cast<std::size_t>(seq_id) >= dataset.sequences.size())
                fail(row, "seq_id " + seq_str + " has no window in the metadata sidecar");
            current_seq = seq_id;
            prev_time = dataset.sequences[seq_id].t_begin;
        }
        EventSequence& seq = dataset.sequences[current_seq];
        if (!(time > 0.0)) fail(row, "time must be positive");
        if (!(time > prev_time)) fail(row, "times must be strictly increasing within a sequence");
        if (time > seq.t_end) fail(row, "time lies beyond the sequence window");
        if (type < 1 || static_cast<std::size_t>(type) > dataset.c_count)
            fail(row, "type " + type_str + " outside 1.." + std::to_string(dataset.c_count));
        seq.events.push_back({time, static_cast<std::size_t>(type - 1)});
        prev_time = time;
    }

    try {
        validate_dataset(dataset.sequences, dataset.c_count);
    } catch (const std::invalid_argument& e) {
        throw DataError("dataset: " + csv_path.string() + ": " + e.what());
    }
    return dataset;
}

// ---------------------------------------------------------------------------
// Model parameters.
// ---------------------------------------------------------------------------

inline void write_model(const ModelParams& params, const std::filesystem::path& path) {
    params.validate();
    nlohmann::json doc;
    doc["c_count"] = params.c_count;
    doc["basis"] = {{"m_count", params.basis.m_count},
                    {"centers", params.basis.centers},
                    {"bandwidth", params.basis.bandwidth},
                    {"support", params.basis.support}};
    doc["mu"] = params.mu;
    doc["rho"] = params.rho;
    auto& a = doc["a"] = nlohmann::json::array();
    for (std::size_t c = 0; c < params.c_count; ++c) {
        nlohmann::json by_source = nlohmann::json::array();
        for (std::size_t cs = 0; cs < params.c_count; ++cs) {
            const auto row = params.coef.group(c, cs);
            by_source.push_back(std::vector<double>(row.begin(), row.end()));
        }
        a.push_back(std::move(by_source));
    }
    detail::store_text(path, doc.dump(2) + "\n", "model");
}

inline ModelParams read_model(const std::filesystem::path& path) {
    const auto doc = detail::load_json(path, "model");
    const auto c_count = detail::require_field<std::size_t>(doc, "c_count", "model");
    if (!doc.contains("basis")) throw DataError("model: missing field 'basis'");
    const auto& basis_doc = doc.at("basis");
    BasisConfig basis;
    basis.m_count = detail::require_field<std::size_t>(basis_doc, "m_count", "model basis");
    basis.centers = detail::require_field<std::vector<double>>(basis_doc, "centers", "model basis");
    basis.bandwidth = detail::require_field<double>(basis_doc, "bandwidth", "model basis");
    basis.support = detail::require_field<double>(basis_doc, "support", "model basis");

    ModelParams params(c_count, basis);
    params.mu = detail::require_field<std::vector<double>>(doc, "mu", "model");
    params.rho = detail::require_field<std::vector<double>>(doc, "rho", "model");
    const auto a = detail::require_field<std::vector<std::vector<std::vector<double>>>>(doc, "a", "model");
    if (a.size() != c_count) throw DataError("model: field 'a' must have c_count rows");
    for (std::size_t c = 0; c < c_count; ++c) {
        if (a[c].size() != c_count) throw DataError("model: field 'a' must be c_count x c_count x m_count");
        for (std::size_t cs = 0; cs < c_count; ++cs) {
            if (a[c][cs].size() != basis.m_count)
                throw DataError("model: field 'a' must be c_count x c_count x m_count");
            for (std::size_t m = 0; m < basis.m_count; ++m) params.coef.at(c, cs, m) = a[c][cs][m];
        }
    }
    try {
        params.validate();
    } catch (const std::invalid_argument& e) {
        throw DataError("model: " + path.string() + ": " + e.what());
    }
    return params;
}

// ---------------------------------------------------------------------------
// Ground truth.
// ---------------------------------------------------------------------------

inline std::string_view impact_kind_name(ImpactKind kind) {
    switch (kind) {
        case ImpactKind::zero: return "zero";
        case ImpactKind::sine: return "sine";
        case ImpactKind::square: return "square";
    }
    return "zero";
}

inline ImpactKind impact_kind_from_name(std::string_view name) {
    if (name == "zero") return ImpactKind::zero;
    if (name == "sine") return ImpactKind::sine;
    if (name == "square") return ImpactKind::square;
    throw DataError("ground truth: unknown impact kind '" + std::string(name) + "'");
}

inline void write_ground_truth(const GroundTruth& truth, const std::filesystem::path& path) {
    nlohmann::json doc;
    doc["c_count"] = truth.c_count;
    doc["mu"] = truth.mu;
    doc["rho"] = truth.rho;
    doc["square_threshold_frac"] = truth.square_threshold_frac;
    auto& pairs = doc["pairs"] = nlohmann::json::array();
    for (std::size_t c = 0; c < truth.c_count; ++c) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t cs = 0; cs < truth.c_count; ++cs) {
            const TruthImpact& p = truth.pair(c, cs);
            row.push_back({{"kind", impact_kind_name(p.kind)},
                           {"amplitude", p.amplitude},
                           {"omega", p.omega},
                           {"phase", p.phase}});
        }
        pairs.push_back(std::move(row));
    }
    detail::store_text(path, doc.dump(2) + "\n", "ground truth");
}

inline GroundTruth read_ground_truth(const std::filesystem::path& path) {
    const auto doc = detail::load_json(path, "ground truth");
    GroundTruth truth;
    truth.c_count = detail::require_field<std::size_t>(doc, "c_count", "ground truth");
    truth.mu = detail::require_field<std::vector<double>>(doc, "mu", "ground truth");
    truth.rho = detail::require_field<std::vector<double>>(doc, "rho", "ground truth");
    truth.square_threshold_frac = detail::require_field<double>(doc, "square_threshold_frac", "ground truth");
    if (!doc.contains("pairs") || !doc.at("pairs").is_array())
        throw DataError("ground truth: missing field 'pairs'");
    const auto& pairs = doc.at("pairs");
    if (pairs.size() != truth.c_count) throw DataError("ground truth: 'pairs' must have c_count rows");
    truth.pairs.resize(truth.c_count * truth.c_count);
    for (std::size_t c = 0; c < truth.c_count; ++c) {
        if (pairs[c].size() != truth.c_count)
            throw DataError("ground truth: 'pairs' must be c_count x c_count");
        for (std::size_t cs = 0; cs < truth.c_count; ++cs) {
            const auto& cell = pairs[c][cs];
            TruthImpact& p = truth.pair(c, cs);
            p.kind = impact_kind_from_name(detail::require_field<std::string>(cell, "kind", "ground truth pair"));
            p.amplitude = detail::require_field<double>(cell, "amplitude", "ground truth pair");
            p.omega = detail::require_field<double>(cell, "omega", "ground truth pair");
            p.phase = detail::require_field<double>(cell, "phase", "ground truth pair");
        }
    }
    return truth;
}

// ---------------------------------------------------------------------------
// Reports.
// ---------------------------------------------------------------------------

inline nlohmann::json metrics_to_json(const MetricsReport& metrics) {
    nlohmann::json doc = nlohmann::json::object();
    if (metrics.loglike_test) doc["loglike_test"] = *metrics.loglike_test;
    if (metrics.e_mu) doc["e_mu"] = *metrics.e_mu;
    if (metrics.e_rho) doc["e_rho"] = *metrics.e_rho;
    if (metrics.e_h) doc["e_h"] = *metrics.e_h;
    if (metrics.e_phi) doc["e_phi"] = *metrics.e_phi;
    if (metrics.granger_accuracy) doc["granger_accuracy"] = *metrics.granger_accuracy;
    return doc;
}

inline std::string_view trigger_pattern_name(TriggerPattern pattern) {
    switch (pattern) {
        case TriggerPattern::delay: return "delay";
        case TriggerPattern::stable: return "stable";
        case TriggerPattern::unstable: return "unstable";
    }
    return "stable";
}

// Type indices in the report are 1-based, matching the CSV convention.
inline nlohmann::json infectivity_report_to_json(const InfectivityReport& report) {
    nlohmann::json doc;
    doc["c_count"] = report.c_count;
    doc["edge_threshold"] = report.edge_threshold;
    doc["matrix"] = report.matrix;
    auto& edges = doc["edges"] = nlohmann::json::array();
    for (const auto& e : report.edges)
        edges.push_back({{"source", e.source + 1}, {"target", e.target + 1}, {"weight", e.weight}});
    auto& patterns = doc["patterns"] = nlohmann::json::array();
    for (const auto& p : report.patterns) {
        nlohmann::json entry = {{"source", p.source + 1},
                                {"target", p.target + 1},
                                {"pattern", trigger_pattern_name(p.pattern)},
                                {"peak_time", p.peak_time},
                                {"peak_value", p.peak_value}};
        if (p.delay_length) entry["delay_length"] = *p.delay_length;
        if (p.decay_time_to_10pct) entry["decay_time_to_10pct"] = *p.decay_time_to_10pct;
        if (!p.peaks.empty()) entry["peaks"] = p.peaks;
        patterns.push_back(std::move(entry));
    }
    return doc;
}

inline void write_matrix_csv(const std::vector<std::vector<double>>& matrix,
                             const std::filesystem::path& path) {
    std::string csv;
    for (const auto& row : matrix) {
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (j > 0) csv += ',';
            csv += detail::format_double(row[j]);
        }
        csv += '\n';
    }
    detail::store_text(path, csv, "matrix");
}

// Plot-ready (t, phi) samples of one fitted impact function.
inline void write_impact_curve_csv(const ModelParams& params, std::size_t target, std::size_t source,
                                   const std::filesystem::path& path, std::size_t points = 1001) {
    std::string csv = "t,phi\n";
    for (std::size_t k = 0; k < points; ++k) {
        const double t = params.basis.support * static_cast<double>(k) / static_cast<double>(points - 1);
        csv += detail::format_double(t);
        csv += ',';
        csv += detail::format_double(impact_value(params.coef, target, source, t, params.basis));
        csv += '\n';
    }
    detail::store_text(path, csv, "impact curve");
}

} // namespace wbhawkes
