#include "conceptvec/triplet.hpp"

#include <cmath>
#include <iomanip>
#include <map>
#include <sstream>

namespace cvec {

EvalReport eval_triplets(const EmbeddingSet& set, std::span<const Triplet> triplets, const EmbeddingSet* reference) {
    std::vector<std::string> missing;
    auto check = [&](const EmbeddingSet& s, const std::string& id) {
        if (!s.contains(id) && std::find(missing.begin(), missing.end(), id) == missing.end()) missing.push_back(id);
    };
    for (const auto& t : triplets) {
        for (const auto* id : {&t.a, &t.b, &t.c}) {
            check(set, *id);
            if (reference) check(*reference, *id);
        }
    }
    if (!missing.empty()) {
        std::string msg = "no embedding for triplet problem(s):";
        for (const auto& id : missing) msg += " " + id;
        throw Error(msg);
    }

    EvalReport report;
    report.method = std::string(to_string(set.method()));
    for (const auto& t : triplets) {
        TripletRecord r{t, 0, 0, 0, false};
        const Vector& a = set.at(t.a);
        r.sim_ab = cosine(a, set.at(t.b));
        r.sim_ac = cosine(a, set.at(t.c));
        r.correct = r.sim_ab > r.sim_ac;
        if (reference) {
            const Vector& ra = reference->at(t.a);
            r.gap = cosine(ra, reference->at(t.b)) - cosine(ra, reference->at(t.c));
        } else {
            r.gap = r.sim_ab - r.sim_ac;
        }
        report.correct += r.correct ? 1 : 0;
        report.records.push_back(std::move(r));
    }
    report.total = report.records.size();
    report.accuracy = report.total == 0 ? 0.0 : static_cast<double>(report.correct) / static_cast<double>(report.total);
    report.histogram = gap_histogram(report);
    return report;
}

std::vector<HistogramBin> gap_histogram(const EvalReport& report, double bin_width, double origin) {
    if (!(bin_width > 0)) throw Error("bin width must be positive");
    std::map<long long, HistogramBin> bins;
    auto lower_edge = [&](long long n) { return origin + static_cast<double>(n) * bin_width; };
    for (const auto& r : report.records) {
        auto n = static_cast<long long>(std::floor((r.gap - origin) / bin_width));
        // Division can land one bin off at an exact edge.
        if (r.gap < lower_edge(n)) --n;
        if (r.gap >= lower_edge(n + 1)) ++n;
        auto& bin = bins[n];
        ++bin.count;
        bin.errors += r.correct ? 0 : 1;
    }
    std::vector<HistogramBin> out;
    if (bins.empty()) return out;
    for (long long n = bins.begin()->first; n <= bins.rbegin()->first; ++n) {
        auto it = bins.find(n);
        HistogramBin bin = it == bins.end() ? HistogramBin{} : it->second;
        bin.lower = lower_edge(n);
        out.push_back(bin);
    }
    return out;
}

nlohmann::json to_json(const EvalReport& report) {
    nlohmann::json records = nlohmann::json::array();
    for (const auto& r : report.records) {
        records.push_back({{"a", r.triplet.a},
                           {"b", r.triplet.b},
                           {"c", r.triplet.c},
                           {"sim_ab", r.sim_ab},
                           {"sim_ac", r.sim_ac},
                           {"gap", r.gap},
                           {"correct", r.correct}});
    }
    nlohmann::json hist = nlohmann::json::array();
    for (const auto& b : report.histogram) hist.push_back({{"lower", b.lower}, {"count", b.count}, {"errors", b.errors}});
    return {{"method", report.method},
            {"total", report.total},
            {"correct", report.correct},
            {"accuracy", report.accuracy},
            {"records", records},
            {"histogram", hist}};
}

void write_histogram(std::ostream& out, const std::vector<HistogramBin>& histogram) {
    for (const auto& b : histogram) out << format_double(b.lower) << '\t' << b.count << '\t' << b.errors << '\n';
}

std::string render_accuracy_table(std::span<const MethodAccuracy> rows) {
    std::size_t width = std::string("method").size();
    for (const auto& r : rows) width = std::max(width, r.method.size());
    std::ostringstream out;
    out << std::left << std::setw(static_cast<int>(width)) << "method" << "  accuracy\n";
    out << std::string(width, '-') << "  --------\n";
    for (const auto& r : rows) {
        out << std::left << std::setw(static_cast<int>(width)) << r.method << "  ";
        if (r.report) {
            out << std::right << std::setw(7) << std::fixed << std::setprecision(2) << 100.0 * r.report->accuracy << "%";
        } else {
            out << "n/a (" << r.error << ")";
        }
        out << '\n';
    }
    return out.str();
}

nlohmann::json to_json(std::span<const MethodAccuracy> rows) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& r : rows) {
        nlohmann::json row{{"method", r.method}};
        if (r.report) {
            row["accuracy"] = r.report->accuracy;
            row["correct"] = r.report->correct;
            row["total"] = r.report->total;
        } else {
            row["accuracy"] = nullptr;
            row["error"] = r.error;
        }
        out.push_back(std::move(row));
    }
    return out;
}

}  // namespace cvec
