/**
 * @file report_io.hpp
 * @brief Rendering of analysis reports as human-readable text or JSON.
 *
 * JSON output is deterministic: keys are emitted in a fixed order and, with
 * timings suppressed, two runs with the same options produce byte-identical
 * documents.
 */
#pragma once

#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "obskit/algorithms.hpp"

namespace obskit {

enum class ReportFormat { Text, Json };

inline const char *to_string(Algorithm a) {
    return a == Algorithm::OrcDf ? "orcdf" : "fispo";
}

inline const char *to_string(Verdict v) {
    switch (v) {
        case Verdict::Observable: return "observable";
        case Verdict::Identifiable: return "identifiable";
        case Verdict::Invertible: return "invertible";
        case Verdict::Unobservable: return "unobservable";
        case Verdict::Undecided: return "undecided";
    }
    return "undecided";
}

inline const char *to_string(Termination t) {
    switch (t) {
        case Termination::FullRank: return "FullRank";
        case Termination::RankStagnation: return "RankStagnation";
        case Termination::KmaxReached: return "KmaxReached";
        case Termination::TimeBudget: return "TimeBudget";
    }
    return "KmaxReached";
}

inline const char *to_string(RankMethod m) {
    return m == RankMethod::ExactModular ? "modular" : "svd";
}

namespace detail {

inline void emit_text(const Report &rep, std::ostream &os, bool timings) {
    os << "model:       " << rep.model_name << "\n";
    os << "algorithm:   " << to_string(rep.algorithm) << "\n";
    os << "rank method: " << to_string(rep.method) << "\n\n";

    os << std::left << std::setw(5) << "k" << std::right << std::setw(8) << "rows"
       << std::setw(8) << "pruned" << std::setw(6) << "rank" << std::setw(6) << "n_k";
    if (timings) os << std::setw(10) << "seconds";
    os << "  newly classified\n";
    for (const IterationRecord &it : rep.iterations) {
        os << std::left << std::setw(5) << it.k << std::right << std::setw(8) << it.rows
           << std::setw(8) << it.pruned << std::setw(6) << it.rank << std::setw(6) << it.n_k;
        if (timings) {
            std::ostringstream secs;
            secs << std::fixed << std::setprecision(2) << it.stage_seconds;
            os << std::setw(10) << secs.str();
        }
        os << "  ";
        for (std::size_t i = 0; i < it.newly_classified.size(); ++i) {
            if (i) os << ", ";
            os << it.newly_classified[i];
        }
        if (it.newly_classified.empty()) os << "-";
        os << "\n";
    }

    os << "\ntermination: " << to_string(rep.termination) << "\n\nverdicts:\n";
    for (const auto &[name, verdict] : rep.verdicts)
        os << "  " << std::left << std::setw(14) << name << " " << to_string(verdict) << "\n";
}

inline void emit_json(const Report &rep, std::ostream &os, bool timings) {
    nlohmann::ordered_json doc;
    doc["model"] = rep.model_name;
    doc["algorithm"] = to_string(rep.algorithm);

    nlohmann::ordered_json opts;
    opts["kmax"] = rep.options.kmax;
    opts["seed"] = rep.options.rank.seed;
    opts["trials"] = rep.options.rank.trials;
    opts["rel_tol"] = rep.options.rank.rel_tol;
    opts["multiexp"] = rep.options.multiexp;
    opts["classify_each_stage"] = rep.options.classify_each_stage;
    opts["rank_method"] = to_string(rep.method);
    if (rep.options.stage_time_budget > 0) opts["stage_timeout"] = rep.options.stage_time_budget;
    if (rep.options.total_time_budget > 0) opts["timeout"] = rep.options.total_time_budget;
    doc["options"] = opts;

    doc["iterations"] = nlohmann::ordered_json::array();
    for (const IterationRecord &it : rep.iterations) {
        nlohmann::ordered_json row;
        row["k"] = it.k;
        row["rows"] = it.rows;
        row["pruned"] = it.pruned;
        row["rank"] = it.rank;
        row["n_k"] = it.n_k;
        row["newly_classified"] = it.newly_classified;
        if (timings) row["stage_seconds"] = it.stage_seconds;
        doc["iterations"].push_back(row);
    }

    nlohmann::ordered_json verdicts;
    for (const auto &[name, verdict] : rep.verdicts) verdicts[name] = to_string(verdict);
    doc["verdicts"] = verdicts;
    doc["termination"] = to_string(rep.termination);

    os << doc.dump(2) << "\n";
}

} // namespace detail

/// Writes the report in the requested format. With timings = false all
/// wall-clock fields are omitted, making output reproducible byte for byte.
inline void emit_report(const Report &rep, std::ostream &os, ReportFormat fmt,
                        bool timings = true) {
    if (fmt == ReportFormat::Json)
        detail::emit_json(rep, os, timings);
    else
        detail::emit_text(rep, os, timings);
}

} // namespace obskit
