// Command-line front end for the rankwalk library.
//
//   rankwalk fit     data.csv [--scores ...] [--init ...] [--trace out.json]
//   rankwalk check   data.csv      minimizer vs. the exponential LP (n <= 7)
//   rankwalk compare data.csv      minimizer vs. gradient descent
//   rankwalk eval    data.csv --beta 1,2
//
// Results go to stdout as JSON. RANKWALK_LOG=off|info|debug controls stderr.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "rankwalk/rankwalk.hpp"

namespace {

using namespace rankwalk;
using nlohmann::json;

enum class LogLevel { off, info, debug };

LogLevel log_level() {
    const char* env = std::getenv("RANKWALK_LOG");
    if (!env) return LogLevel::off;
    const std::string v(env);
    if (v == "debug") return LogLevel::debug;
    if (v == "info") return LogLevel::info;
    return LogLevel::off;
}

void log(LogLevel at, const std::string& msg) {
    if (log_level() >= at && at != LogLevel::off) std::cerr << "rankwalk: " << msg << '\n';
}

struct Options {
    std::string csv;
    std::string scores = "wilcoxon";
    std::string init = "zero";
    std::string trace;
    std::string direction = "first";
    std::string perturb = "random";
    std::string beta;
    double tie_tol = 1e-9;
    double lp_tol = lp::kDefaultTol;
    std::size_t max_iter = 0;
    std::uint64_t seed = 0;
};

Vector parse_list(const std::string& text, const std::string& what) {
    std::istringstream in(text);
    Vector v = read_number_list(in, what);
    if (v.empty()) throw DomainError(what + ": empty list");
    return v;
}

ScoreVector build_scores(const Options& o, std::size_t n) {
    if (o.scores == "sign") return make_scores(score::Sign{}, n);
    if (o.scores == "wilcoxon") return make_scores(score::Wilcoxon{}, n);
    if (o.scores == "vdw") return make_scores(score::VanDerWaerden{}, n);
    if (o.scores.starts_with("file=")) {
        const Vector raw = read_number_list_file(o.scores.substr(5));
        if (raw.size() != n)
            throw DomainError("score file has " + std::to_string(raw.size()) + " entries for " + std::to_string(n) +
                              " observations");
        return normalize_scores(raw);
    }
    throw DomainError("unknown --scores value '" + o.scores + "'");
}

Vector build_init(const Options& o, const RegressionData& data) {
    if (o.init == "zero") return Vector(data.p(), 0.0);
    if (o.init == "ls") return least_squares(data);
    Vector b = parse_list(o.init, "--init");
    if (b.size() != data.p())
        throw DomainError("--init has " + std::to_string(b.size()) + " entries, expected " + std::to_string(data.p()));
    return b;
}

WoaConfig build_config(const Options& o, const RegressionData& data) {
    WoaConfig cfg;
    cfg.tie_tol = o.tie_tol;
    cfg.lp_tol = o.lp_tol;
    cfg.max_iter = o.max_iter;
    if (o.direction == "steepest")
        cfg.direction_strategy = DirectionStrategy::steepest_inf_norm;
    else if (o.direction != "first")
        throw DomainError("unknown --direction value '" + o.direction + "'");
    cfg.init = build_init(o, data);
    return cfg;
}

WalkOutcome run_walk(const RegressionData& data, const ScoreVector& alpha, const WoaConfig& cfg) {
    WalkOutcome out = minimize(data, alpha, cfg);
    for (std::size_t k = 0; k < out.trace.iterations.size(); ++k) {
        const auto& rec = out.trace.iterations[k];
        std::ostringstream msg;
        msg.precision(17);
        msg << "iteration " << k + 1 << ": F* = " << rec.F_star;
        if (rec.d_star) msg << ", step " << *rec.d_star;
        log(LogLevel::debug, msg.str());
    }
    log(LogLevel::info, std::to_string(out.trace.iterations.size()) + " iterations, outcome " +
                            (out.bounded() ? "minimizer" : "unbounded"));
    return out;
}

json summary(const WalkOutcome& out) {
    json j = {{"outcome", out.bounded() ? "minimizer" : "unbounded"},
              {"iterations", out.trace.iterations.size()}};
    if (out.bounded()) {
        j["beta_opt"] = out.minimizer().beta;
        j["F_opt"] = out.minimizer().value;
    } else {
        j["ray"] = {{"point", out.ray().point}, {"direction", out.ray().direction}};
    }
    return j;
}

int cmd_fit(const Options& o) {
    const RegressionData data = read_csv_file(o.csv);
    const ScoreVector alpha = build_scores(o, data.n());
    const WalkOutcome out = run_walk(data, alpha, build_config(o, data));
    if (!o.trace.empty()) {
        std::ofstream f(o.trace);
        if (!f) throw DomainError("cannot write trace file " + o.trace);
        f << trace_to_json(out).dump(2) << '\n';
    }
    std::cout << summary(out).dump(2) << '\n';
    return out.bounded() ? 0 : 2;
}

int cmd_check(const Options& o) {
    const RegressionData data = read_csv_file(o.csv);
    if (data.n() > kOracleLimit)
        throw DomainError("check needs n <= " + std::to_string(kOracleLimit) + ", data has " +
                          std::to_string(data.n()) + " rows");
    const ScoreVector alpha = build_scores(o, data.n());
    const WalkOutcome out = run_walk(data, alpha, build_config(o, data));
    const OracleResult oracle = oracle_minimize(data, alpha, o.lp_tol);

    json report = {{"walk", summary(out)}};
    bool agree = false;
    if (const auto* opt = std::get_if<OracleOptimum>(&oracle)) {
        report["oracle"] = {{"outcome", "minimizer"}, {"beta", opt->point}, {"F", opt->value}};
        agree = out.bounded() && std::abs(out.minimizer().value - opt->value) <= 1e-7;
    } else {
        report["oracle"] = {{"outcome", "unbounded"}};
        agree = !out.bounded();
    }
    report["agree"] = agree;
    bool cert_ok = true;
    if (out.bounded()) {
        const auto v = verify_certificate(data, alpha, out.minimizer().beta, out.minimizer().certificate, o.tie_tol);
        json failures = json::array();
        for (const auto& f : v.failures) failures.push_back({{"condition", f.condition}, {"detail", f.detail}});
        report["certificate"] = {{"passed", v.passed()},
                                 {"certified_value", v.certified_value},
                                 {"terms", out.minimizer().certificate.decomposition.size()},
                                 {"failures", failures}};
        cert_ok = v.passed();
    }
    std::cout << report.dump(2) << '\n';
    return agree && cert_ok ? 0 : 3;
}

int cmd_compare(const Options& o) {
    const RegressionData data = read_csv_file(o.csv);
    const ScoreVector alpha = build_scores(o, data.n());
    const WoaConfig cfg = build_config(o, data);
    const WalkOutcome out = run_walk(data, alpha, cfg);

    GgdConfig gcfg;
    gcfg.tie_tol = o.tie_tol;
    gcfg.lp_tol = o.lp_tol;
    if (o.perturb == "prolong")
        gcfg.perturbation = perturbation::Prolong{};
    else if (o.perturb == "random")
        gcfg.perturbation = perturbation::Random{0.0, o.seed};
    else
        throw DomainError("unknown --perturb value '" + o.perturb + "'");
    const GgdTrace g = ggd_minimize(data, alpha, *cfg.init, gcfg);

    json report = {{"walk", summary(out)},
                   {"ggd",
                    {{"iterations", g.iterations},
                     {"perturbations", g.perturbations},
                     {"beta", g.final_point()},
                     {"F", g.final_value()},
                     {"stop", to_string(g.reason)}}}};
    report["gap"] = out.bounded() ? json(g.final_value() - out.minimizer().value) : json(nullptr);
    std::cout << report.dump(2) << '\n';
    return 0;
}

int cmd_eval(const Options& o) {
    const RegressionData data = read_csv_file(o.csv);
    const ScoreVector alpha = build_scores(o, data.n());
    const Vector beta = parse_list(o.beta, "--beta");
    const Residuals res = residuals(data, beta);
    const Permutation pi = consistent_permutation(res, scaled_tie_tol(res, o.tie_tol));
    json order = json::array();
    for (std::size_t v : pi.order) order.push_back(v + 1);
    std::cout << json{{"F", loss_from_residuals(alpha, res)}, {"pi", order}}.dump(2) << '\n';
    return 0;
}

void add_common(CLI::App* sub, Options& o) {
    sub->add_option("csv", o.csv, "data file with header y,x1,...,xp")->required();
    sub->add_option("--scores", o.scores, "sign | wilcoxon | vdw | file=PATH")->capture_default_str();
    sub->add_option("--tie-tol", o.tie_tol, "relative tie tolerance")->capture_default_str();
    sub->add_option("--lp-tol", o.lp_tol, "LP feasibility tolerance")->capture_default_str();
}

void add_walk(CLI::App* sub, Options& o) {
    sub->add_option("--init", o.init, "zero | ls | comma-separated beta")->capture_default_str();
    sub->add_option("--max-iter", o.max_iter, "iteration budget (0 = automatic)")->capture_default_str();
    sub->add_option("--direction", o.direction, "first | steepest")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact rank-regression fitting by walking the residual arrangement"};
    app.require_subcommand(1);
    Options o;

    auto* fit = app.add_subcommand("fit", "fit beta and print the minimizer or an unbounded ray");
    add_common(fit, o);
    add_walk(fit, o);
    fit->add_option("--trace", o.trace, "write the iteration trace and certificate as JSON");

    auto* check = app.add_subcommand("check", "compare against the brute-force LP and verify the certificate");
    add_common(check, o);
    add_walk(check, o);

    auto* compare = app.add_subcommand("compare", "run gradient descent from the same start");
    add_common(compare, o);
    add_walk(compare, o);
    compare->add_option("--seed", o.seed, "seed for random perturbations")->capture_default_str();
    compare->add_option("--perturb", o.perturb, "random | prolong")->capture_default_str();

    auto* eval = app.add_subcommand("eval", "evaluate F at a given beta");
    add_common(eval, o);
    eval->add_option("--beta", o.beta, "comma-separated beta")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (*fit) return cmd_fit(o);
        if (*check) return cmd_check(o);
        if (*compare) return cmd_compare(o);
        return cmd_eval(o);
    } catch (const IterationBudgetExceeded& e) {
        std::cerr << "rankwalk: " << e.what() << " (" << e.trace().iterations.size() << " recorded)\n";
    } catch (const std::exception& e) {
        std::cerr << "rankwalk: " << e.what() << '\n';
    }
    return 1;
}
