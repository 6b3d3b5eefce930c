#pragma once

#include <charconv>
#include <cstddef>
#include <fstream>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "rankwalk/certificate.hpp"
#include "rankwalk/errors.hpp"
#include "rankwalk/model.hpp"
#include "rankwalk/woa.hpp"

namespace rankwalk {

/// Malformed input file; `line()` is 1-based, 0 when not tied to a line.
class ParseError : public DomainError {
public:
    ParseError(const std::string& source, std::size_t line, const std::string& msg)
        : DomainError(source + (line ? ":" + std::to_string(line) : std::string()) + ": " + msg), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

inline std::optional<double> parse_number(std::string_view tok) {
    if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
    if (tok.empty()) return std::nullopt;
    double v = 0.0;
    const auto [end, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || end != tok.data() + tok.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

}  // namespace detail

/// Reads `y,x1,...,xp` CSV. Blank lines are ignored.
inline RegressionData read_csv(std::istream& in, const std::string& source = "<input>") {
    std::string line;
    std::size_t lineno = 0;
    std::size_t p = 0;
    bool have_header = false;
    std::vector<Vector> rows;
    Vector y;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view view(line);
        if (lineno == 1 && view.starts_with("\xEF\xBB\xBF")) view.remove_prefix(3);
        if (detail::trim(view).empty()) continue;
        const auto fields = detail::split_commas(view);
        if (!have_header) {
            if (fields.size() < 2 || fields[0] != "y")
                throw ParseError(source, lineno, "header must read y,x1,...,xp");
            for (std::size_t k = 1; k < fields.size(); ++k)
                if (fields[k] != "x" + std::to_string(k))
                    throw ParseError(source, lineno, "header column " + std::to_string(k + 1) + " should be x" +
                                                         std::to_string(k) + ", found '" + std::string(fields[k]) +
                                                         "'");
            p = fields.size() - 1;
            have_header = true;
            continue;
        }
        if (fields.size() != p + 1)
            throw ParseError(source, lineno, "expected " + std::to_string(p + 1) + " fields, found " +
                                                 std::to_string(fields.size()));
        Vector vals(p + 1);
        for (std::size_t k = 0; k <= p; ++k) {
            const auto v = detail::parse_number(fields[k]);
            if (!v) throw ParseError(source, lineno, "field " + std::to_string(k + 1) + " ('" + std::string(fields[k]) +
                                                         "') is not a finite number");
            vals[k] = *v;
        }
        y.push_back(vals[0]);
        rows.emplace_back(vals.begin() + 1, vals.end());
    }
    if (!have_header) throw ParseError(source, 0, "empty file");
    if (rows.empty()) throw ParseError(source, 0, "no observations");
    return RegressionData(std::move(rows), std::move(y));
}

inline RegressionData read_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path, 0, "cannot open file");
    return read_csv(in, path);
}

/// Whitespace- or comma-separated list of numbers.
inline Vector read_number_list(std::istream& in, const std::string& source = "<input>") {
    Vector out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        for (char& c : line)
            if (c == ',' || c == '\t' || c == '\r') c = ' ';
        std::istringstream words(line);
        std::string tok;
        while (words >> tok) {
            const auto v = detail::parse_number(tok);
            if (!v) throw ParseError(source, lineno, "'" + tok + "' is not a finite number");
            out.push_back(*v);
        }
    }
    return out;
}

inline Vector read_number_list_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path, 0, "cannot open file");
    return read_number_list(in, path);
}

namespace detail {

inline nlohmann::json one_based(const Permutation& pi) {
    nlohmann::json a = nlohmann::json::array();
    for (std::size_t v : pi.order) a.push_back(v + 1);
    return a;
}

inline Permutation from_one_based(const nlohmann::json& a) {
    Permutation pi;
    for (const auto& v : a) {
        const auto k = v.get<std::size_t>();
        if (k == 0) throw DomainError("trace: permutation entries are 1-based");
        pi.order.push_back(k - 1);
    }
    if (!pi.is_bijection()) throw DomainError("trace: entry is not a permutation");
    return pi;
}

}  // namespace detail

inline nlohmann::json certificate_to_json(const OptimalityCertificate& cert) {
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& t : cert.decomposition) terms.push_back({{"lambda", t.lambda}, {"pi", detail::one_based(t.pi)}});
    return {{"G", cert.G}, {"decomposition", terms}};
}

inline nlohmann::json trace_to_json(const WalkOutcome& out) {
    using nlohmann::json;
    json iters = json::array();
    for (const auto& rec : out.trace.iterations) {
        iters.push_back({{"pi", detail::one_based(rec.pi)},
                         {"beta_star", rec.beta_star},
                         {"F_star", rec.F_star},
                         {"direction", rec.direction ? json(*rec.direction) : json(nullptr)},
                         {"d_star", rec.d_star ? json(*rec.d_star) : json(nullptr)}});
    }
    json doc = {{"iterations", iters}};
    if (out.bounded()) {
        const auto& m = out.minimizer();
        doc["outcome"] = "minimizer";
        doc["beta_opt"] = m.beta;
        doc["F_opt"] = m.value;
        doc["certificate"] = certificate_to_json(m.certificate);
        doc["ray"] = nullptr;
    } else {
        const auto& r = out.ray();
        doc["outcome"] = "unbounded";
        doc["beta_opt"] = nullptr;
        doc["F_opt"] = nullptr;
        doc["certificate"] = nullptr;
        doc["ray"] = {{"point", r.point}, {"direction", r.direction}};
    }
    return doc;
}

/// Everything the trace file records, read back.
struct TraceDocument {
    std::vector<IterationRecord> iterations;
    std::string outcome;
    std::optional<Vector> beta_opt;
    std::optional<double> F_opt;
    std::optional<OptimalityCertificate> certificate;
    std::optional<UnboundedRay> ray;
};

inline TraceDocument trace_from_json(const nlohmann::json& doc) {
    TraceDocument t;
    try {
        for (const auto& it : doc.at("iterations")) {
            IterationRecord rec;
            rec.pi = detail::from_one_based(it.at("pi"));
            rec.beta_star = it.at("beta_star").get<Vector>();
            rec.F_star = it.at("F_star").get<double>();
            if (!it.at("direction").is_null()) rec.direction = it.at("direction").get<Vector>();
            if (!it.at("d_star").is_null()) rec.d_star = it.at("d_star").get<double>();
            t.iterations.push_back(std::move(rec));
        }
        t.outcome = doc.at("outcome").get<std::string>();
        if (!doc.at("beta_opt").is_null()) t.beta_opt = doc.at("beta_opt").get<Vector>();
        if (!doc.at("F_opt").is_null()) t.F_opt = doc.at("F_opt").get<double>();
        if (const auto& c = doc.at("certificate"); !c.is_null()) {
            OptimalityCertificate cert;
            cert.G = c.at("G").get<Matrix>();
            for (const auto& term : c.at("decomposition"))
                cert.decomposition.push_back({term.at("lambda").get<double>(), detail::from_one_based(term.at("pi"))});
            t.certificate = std::move(cert);
        }
        if (const auto& r = doc.at("ray"); !r.is_null())
            t.ray = UnboundedRay{r.at("point").get<Vector>(), r.at("direction").get<Vector>()};
    } catch (const nlohmann::json::exception& e) {
        throw DomainError(std::string("trace: ") + e.what());
    }
    return t;
}

}  // namespace rankwalk
