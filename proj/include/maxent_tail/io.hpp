#pragma once

// CSV and JSON serialization. CSVs are UTF-8 with LF line endings and
// %.12g numbers; files are written to a temporary sibling and renamed into
// place.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "maxent_tail/constraints.hpp"
#include "maxent_tail/density.hpp"
#include "maxent_tail/errors.hpp"
#include "maxent_tail/gaussian_world.hpp"
#include "maxent_tail/maxent.hpp"
#include "maxent_tail/multiperiod.hpp"
#include "maxent_tail/portfolio_barbell.hpp"

namespace maxent_tail::io {

using nlohmann::json;

inline std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

/// Accumulates CSV text.
class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header) {
        for (std::size_t i = 0; i < header.size(); ++i) {
            text_ += (i ? "," : "") + header[i];
        }
        text_ += '\n';
    }

    CsvWriter& comment(std::string_view line) {
        // Preamble lines go before the header.
        preamble_ += "# ";
        preamble_ += line;
        preamble_ += '\n';
        return *this;
    }

    CsvWriter& row(std::initializer_list<double> values) {
        bool first = true;
        for (double v : values) {
            if (!first) {
                text_ += ',';
            }
            text_ += fmt(v);
            first = false;
        }
        text_ += '\n';
        return *this;
    }

    CsvWriter& row(std::string_view label, double value) {
        text_ += label;
        text_ += ',';
        text_ += fmt(value);
        text_ += '\n';
        return *this;
    }

    std::string str() const { return preamble_ + text_; }

private:
    std::string preamble_;
    std::string text_;
};

/// Writes `content` to `path` through a temporary file and rename.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error("cannot open " + tmp.string() + " for writing");
        }
        out << content;
        out.flush();
        if (!out) {
            throw Error("write failed for " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

// ---------------------------------------------------------------------------
// CSV payloads
// ---------------------------------------------------------------------------

template <class D>
std::string density_csv(const D& d, double x_min, double x_max, std::size_t points) {
    CsvWriter w({"x", "pdf", "cdf"});
    for (const auto& r : tabulate(d, x_min, x_max, points)) {
        w.row({r.x, r.pdf, r.cdf});
    }
    return w.str();
}

inline std::string stoploss_csv(const StopLossReport& r) {
    CsvWriter w({"bin_center", "frequency"});
    w.comment("atom_mass=" + fmt(r.atom_mass));
    for (const auto& b : r.histogram) {
        w.row({b.center, b.frequency});
    }
    return w.str();
}

inline std::string inversion_csv(const InversionGrid& g) {
    CsvWriter w({"x", "pdf"});
    for (std::size_t i = 0; i < g.x_points.size(); ++i) {
        w.row({g.x_points[i], g.pdf_values[i]});
    }
    return w.str();
}

inline std::string aggregate_csv(const AggregateReport& r) {
    CsvWriter w({"stat", "value"});
    w.row("n", static_cast<double>(r.n));
    w.row("paths", static_cast<double>(r.paths));
    w.row("sum_mean", r.sums.mean);
    w.row("sum_variance", r.sums.variance);
    w.row("sum_skewness", r.sums.skewness);
    w.row("sum_excess_kurtosis", r.sums.excess_kurtosis);
    w.row("avg_mean", r.averages.mean);
    w.row("avg_variance", r.averages.variance);
    w.row("avg_skewness", r.averages.skewness);
    w.row("avg_excess_kurtosis", r.averages.excess_kurtosis);
    w.row("ks_sum_vs_normal", r.ks_sum_normal);
    w.row("atom_mass", r.atom_mass);
    return w.str();
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

inline TailConstraints tail_constraints_from_json(const json& j) {
    for (const char* key : {"K", "epsilon", "nu_minus"}) {
        if (!j.contains(key) || !j.at(key).is_number()) {
            throw DomainError(std::string("constraints JSON: missing numeric field \"") + key + "\"");
        }
    }
    return {j.at("K").get<double>(), j.at("epsilon").get<double>(), j.at("nu_minus").get<double>()};
}

inline json to_json(const TailConstraints& tc) {
    return {{"K", tc.K}, {"epsilon", tc.epsilon}, {"nu_minus", tc.nu_minus}};
}

inline PortfolioSpec portfolio_from_json(const json& j) {
    PortfolioSpec p;
    try {
        p.weights = j.at("weights").get<std::vector<double>>();
        p.mean_vector = j.at("mean_vector").get<std::vector<double>>();
        p.covariance = j.at("covariance").get<std::vector<std::vector<double>>>();
    } catch (const json::exception& e) {
        throw DomainError(std::string("portfolio JSON: ") + e.what());
    }
    return p;
}

inline json to_json(const GaussianFit& g) {
    return {{"mu", g.mu}, {"sigma", g.sigma}, {"b_eps", g.b_eps}, {"eta_eps", g.eta_eps}};
}

inline json to_json(const MixtureFit& m) {
    return {{"lambda", m.lambda}, {"mu1", m.mu1}, {"mu2", m.mu2}, {"sigma1", m.sigma1}, {"sigma2", m.sigma2}};
}

inline json to_json(const PiecewiseDensity& d) {
    json segs = json::array();
    for (const auto& s : d.segments()) {
        segs.push_back({{"form", to_string(s.form)}, {"K", s.K}, {"param", s.param}, {"weight", s.weight}});
    }
    json j = {{"segments", segs}};
    if (const auto a = d.atom()) {
        j["atom"] = {{"location", a->location}, {"mass", a->mass}};
    } else {
        j["atom"] = nullptr;
    }
    return j;
}

inline json to_json(const MaxentModel& m) {
    json derived = json::object();
    auto put = [&](const char* key, const std::optional<double>& v) {
        if (v) {
            derived[key] = *v;
        }
    };
    put("nu_plus", m.derived.nu_plus);
    put("lambda1", m.derived.lambda1);
    put("alpha", m.derived.alpha);
    put("A", m.derived.A);
    put("C_alpha", m.derived.C_alpha);
    return {{"case", to_string(m.which)},
            {"constraints", to_json(m.tc)},
            {"global", {{"kind", to_string(m.global.kind)}, {"value", m.global.value}}},
            {"derived", derived},
            {"density", to_json(m.density)}};
}

inline json to_json(const FeasibilityResiduals& r) {
    return {{"tail_prob_err", r.tail_prob_err}, {"shortfall_err", r.shortfall_err}};
}

inline json to_json(const StopLossReport& r) {
    return {{"atom_mass", r.atom_mass},
            {"terminal_mean", r.terminal_mean},
            {"terminal_skewness", r.terminal_skewness},
            {"survivor_mean", r.survivor_mean},
            {"survivor_variance", r.survivor_variance},
            {"bins", r.histogram.size()}};
}

inline json to_json(const AggregateReport& r) {
    auto moments = [](const SampleMoments& m) {
        return json{{"mean", m.mean},
                    {"variance", m.variance},
                    {"skewness", m.skewness},
                    {"excess_kurtosis", m.excess_kurtosis}};
    };
    return {{"n", r.n},
            {"paths", r.paths},
            {"sums", moments(r.sums)},
            {"averages", moments(r.averages)},
            {"ks_sum_vs_normal", r.ks_sum_normal},
            {"atom_mass", r.atom_mass}};
}

inline json to_json(const BarbellConstraints& b) {
    return {{"w_safe", b.w_safe},
            {"K", b.K},
            {"epsilon", b.epsilon},
            {"nu_minus", b.nu_minus},
            {"loss_bound", b.loss_bound},
            {"hard_floor_certificate", b.hard_floor_certificate},
            {"certificate",
             b.hard_floor_certificate ? "P(X < " + fmt(b.K) + ") = 0 for every return model" : std::string()},
            {"degenerate_safe", b.degenerate_safe}};
}

inline json to_json(const FrameworkComparison& c) {
    return {{"constraints", to_json(c.tc)},
            {"gaussian", to_json(c.gaussian)},
            {"gaussian_entropy", c.gaussian_entropy},
            {"gaussian_residuals", to_json(c.gaussian_residuals)},
            {"case_a", to_json(c.case_a)},
            {"case_a_entropy", c.case_a_entropy},
            {"case_a_residuals", to_json(c.case_a_residuals)},
            {"entropy_gap", c.entropy_gap},
            {"round_trip", to_json(c.round_trip)}};
}

}  // namespace maxent_tail::io
