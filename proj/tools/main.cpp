#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cli.hpp"
#include "gvx/angle.hpp"
#include "gvx/coeffs.hpp"
#include "gvx/errors.hpp"
#include "gvx/oracle.hpp"
#include "gvx/variance.hpp"

namespace {

using namespace gvx;
using nlohmann::ordered_json;

constexpr int kDefaultCoeffOrder = 40;

struct Options {
    double alpha = 1.0;
    int n = 1;
    std::vector<int> ns;
    std::string dist = "ssq";
    std::string at;
    std::string method = "auto";
    std::string lambda = "sqrt-n";
    std::string format;
    double tol = EvalConfig{}.tol;
    int max_terms = 0;
    int legendre_kmax = EvalConfig{}.legendre_kmax;
    int fourier_mmax = EvalConfig{}.fourier_mmax;
    int threads = 0;
    int order = kDefaultCoeffOrder;
    std::optional<std::string> t;
    bool coeffs = false;
    std::size_t samples = VerifyOptions{}.samples;
    std::uint64_t seed = VerifyOptions{}.seed;
    double verify_tol = VerifyOptions{}.tol;
    bool json = false;
};

EvalConfig make_config(const Options& o, cli::Dist d) {
    EvalConfig c;
    c.tol = o.tol;
    const int budget = o.max_terms > 0 ? o.max_terms : cli::env_max_terms();
    if (budget > 0) c.max_k = c.max_j = budget;
    c.representation = cli::method_from_string(o.method, d);
    c.lambda = cli::lambda_from_string(o.lambda);
    c.legendre_kmax = o.legendre_kmax;
    c.fourier_mmax = o.fourier_mmax;
    return c;
}

void emit(const cli::Evaluator& ev, const std::vector<cli::Point>& pts, std::string format, bool single) {
    if (format.empty()) format = single ? "json" : "csv";
    if (format == "json")
        cli::write_json(std::cout, ev, pts, single);
    else if (format == "csv")
        cli::write_csv(std::cout, pts);
    else
        cli::write_table(std::cout, pts);
}

int run_cdf(const Options& o) {
    const cli::Dist d = cli::dist_from_string(o.dist);
    const std::vector<double> xs = cli::parse_points(o.at);
    const cli::Evaluator ev(d, ModelParams{o.alpha, o.n}, make_config(o, d));
    emit(ev, ev.run(xs, o.threads), o.format, o.at.find(':') == std::string::npos);
    return 0;
}

int run_coeffs(const Options& o) {
    const ModelParams p{o.alpha, o.n};
    p.validate();
    if (o.order < 0 || o.order > kMaxMomentOrder)
        throw DomainError("--K must lie in [0, " + std::to_string(kMaxMomentOrder) + "]");
    const MomentTable table = build_moments(p, o.order);
    const LambdaStrategy ls = cli::lambda_from_string(o.lambda);
    const std::vector<Real> scaled = scaled_moments(table, resolve_lambda(table, ls));
    const DiffWeights dw = diff_weights(scaled, o.order, false);
    int unreliable = 0;
    std::cout << "k,beta_sign,log_abs_beta,mu,gamma,delta_lambda\n";
    for (int k = 0; k <= o.order; ++k) {
        std::cout << k << ',' << table.beta_sign(k) << ',' << cli::format_number(table.log_abs_beta(k)) << ','
                  << cli::format_wide(table.mu()[k]) << ',' << cli::format_wide(table.gamma()[k]) << ','
                  << (dw.reliable(k) ? cli::format_wide(dw.delta[k]) : (++unreliable, "nan"))
                  << '\n';
    }
    if (unreliable)
        std::cerr << "gvx: " << unreliable << " delta_lambda entries lost their digits to cancellation (nan)\n";
    return 0;
}

int run_angle(Options o) {
    const ModelParams p{o.alpha, o.n};
    p.validate(2);
    if (o.coeffs) {
        if (!p.integer_alpha()) throw DomainError("angle coefficients need integer alpha");
        const AngleCoefficients ac = solve_angle_coeffs(p);
        std::cout << "j,a_2j\n";
        for (int j = 0; j <= ac.N; ++j) std::cout << j << ',' << cli::format_wide(ac.a[j]) << '\n';
        return 0;
    }
    if (!o.t) throw DomainError("angle needs --t or --coeffs");
    o.at = *o.t;
    o.dist = "angle-tan";
    return run_cdf(o);
}

int run_table(const Options& o) {
    const cli::Dist d = cli::dist_from_string(o.dist);
    const std::vector<double> xs = cli::parse_points(o.at);
    const EvalConfig cfg = make_config(o, d);
    std::vector<std::vector<cli::Point>> cols;
    for (int n : o.ns) {
        const cli::Evaluator ev(d, ModelParams{o.alpha, n}, cfg);
        cols.push_back(ev.run(xs, o.threads));
    }
    const std::string format = o.format.empty() ? "csv" : o.format;
    if (format == "json") {
        ordered_json j;
        j["alpha"] = o.alpha;
        j["statistic"] = cli::to_string(d);
        j["x"] = xs;
        j["columns"] = ordered_json::array();
        for (std::size_t c = 0; c < cols.size(); ++c) {
            ordered_json col;
            col["n"] = o.ns[c];
            std::vector<double> v, e;
            for (const auto& p : cols[c]) {
                v.push_back(p.result.value);
                e.push_back(p.result.est_error);
            }
            col["cdf"] = v;
            col["est_error"] = e;
            j["columns"].push_back(std::move(col));
        }
        std::cout << j.dump(2) << '\n';
        return 0;
    }
    const bool csv = format == "csv";
    char buf[64];
    std::cout << (csv ? "x" : "             x");
    for (int n : o.ns) {
        if (csv) {
            std::cout << ",n=" << n;
        } else {
            std::snprintf(buf, sizeof buf, "  %16s", ("n=" + std::to_string(n)).c_str());
            std::cout << buf;
        }
    }
    std::cout << '\n';
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (csv) {
            std::cout << cli::format_number(xs[i]);
            for (const auto& col : cols) std::cout << ',' << cli::format_number(col[i].result.value);
        } else {
            std::snprintf(buf, sizeof buf, "%14.8g", xs[i]);
            std::cout << buf;
            for (const auto& col : cols) {
                std::snprintf(buf, sizeof buf, "  %16.12f", col[i].result.value);
                std::cout << buf;
            }
        }
        std::cout << '\n';
    }
    return 0;
}

int run_verify(const Options& o) {
    VerifyOptions vo;
    vo.samples = o.samples;
    vo.seed = o.seed;
    vo.threads = o.threads;
    vo.tol = o.verify_tol;
    const VerificationReport r = verify(ModelParams{o.alpha, o.n}, vo);
    if (o.json) {
        std::cout << to_json(r) << '\n';
    } else {
        std::printf("alpha=%g n=%d samples=%zu seed=%llu (%.1f s)\n", r.params.alpha, r.params.n, r.sample_count,
                    static_cast<unsigned long long>(r.seed), r.seconds);
        for (const auto& e : r.ks) {
            std::printf("  KS %-7s D=%.3e  critical=%.3e  %s%s%s\n", to_string(e.statistic).c_str(), e.distance,
                        e.critical, e.pass ? "pass" : "FAIL", e.note.empty() ? "" : "  ", e.note.c_str());
        }
        int moments_ok = 0;
        for (const auto& m : r.moments) moments_ok += m.pass;
        std::printf("  moments within 4 SE: %d/%zu\n", moments_ok, r.moments.size());
        std::printf("  identity max rel %.2e %s; u bounds %s\n", r.identity_violation,
                    r.identity_pass ? "pass" : "FAIL", r.u_bounds_pass ? "pass" : "FAIL");
        std::printf("%s\n", r.pass() ? "PASS" : "FAIL");
    }
    return r.pass() ? 0 : 3;
}

int run_config_print() {
    const EvalConfig c;
    const VerifyOptions v;
    ordered_json j;
    j["tol"] = c.tol;
    j["max_k"] = c.max_k;
    j["max_j"] = c.max_j;
    j["max_terms_env"] = "GVX_MAX_TERMS";
    const int env = cli::env_max_terms();
    j["max_terms_effective"] = env > 0 ? ordered_json(env) : ordered_json(nullptr);
    j["moment_order_limit"] = kMaxMomentOrder;
    j["method"] = "auto";
    j["lambda"] = "sqrt-n";
    j["legendre_kmax"] = c.legendre_kmax;
    j["fourier_mmax"] = c.fourier_mmax;
    j["format"] = {{"single", "json"}, {"range", "csv"}, {"table", "csv"}};
    j["coeffs_K"] = kDefaultCoeffOrder;
    j["threads"] = 0;
    j["verify"] = {{"samples", v.samples},       {"seed", v.seed},
                   {"tol", v.tol},               {"interp_tol", v.interp_tol},
                   {"tail_quantile", v.tail_quantile}, {"moment_kmax", v.moment_kmax},
                   {"moment_z", v.moment_z},     {"ks_critical", "1.63/sqrt(samples)"}};
    std::cout << j.dump(2) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Distribution of the sample variance and sum of squares of gamma variates"};
    app.require_subcommand(1);
    Options o;

    auto model = [&](CLI::App* sc, bool many_n = false) {
        sc->add_option("--alpha", o.alpha, "gamma shape")->required()->check(CLI::PositiveNumber);
        if (many_n)
            sc->add_option("--n", o.ns, "sample sizes (comma separated)")->required()->delimiter(',');
        else
            sc->add_option("--n", o.n, "sample size")->required()->check(CLI::Range(1, 100000));
    };
    auto numerics = [&](CLI::App* sc) {
        sc->add_option("--method,--representation", o.method,
                       "auto, thm41, thm42 or a representation: power, mixture, legendre, fourier, series, "
                       "svar-mixture, truncated-moments, tan-polynomial, u-legendre")
            ->capture_default_str();
        sc->add_option("--tol", o.tol, "target absolute error")->capture_default_str();
        sc->add_option("--max-terms", o.max_terms, "term budget per series (default from GVX_MAX_TERMS, else "
                                                   "max_k 2000 and max_j 5000)");
        sc->add_option("--lambda", o.lambda, "mixture scale: sqrt-n, moment or a number")->capture_default_str();
        sc->add_option("--legendre-kmax", o.legendre_kmax, "Legendre order")->capture_default_str();
        sc->add_option("--fourier-mmax", o.fourier_mmax, "Fourier terms")->capture_default_str();
        sc->add_option("--format", o.format, "json, csv or table (json for one point, csv for a range)")
            ->check(CLI::IsMember({"json", "csv", "table"}));
        sc->add_option("--threads", o.threads, "worker threads for ranges (0: all cores)")->capture_default_str();
    };

    auto* cdf = app.add_subcommand("cdf", "evaluate a cdf at a point or over start:stop:step");
    model(cdf);
    cdf->add_option("--dist", o.dist, "ssq (radius r), svar (s^2), s, u or angle-tan")
        ->check(CLI::IsMember({"ssq", "svar", "s", "u", "angle-tan"}))
        ->capture_default_str();
    cdf->add_option("--at", o.at, "x or start:stop:step")->required();
    numerics(cdf);

    auto* coeffs = app.add_subcommand("coeffs", "dump beta, mu, gamma and delta as CSV");
    model(coeffs);
    coeffs->add_option("--K", o.order, "highest order")->capture_default_str();
    coeffs->add_option("--lambda", o.lambda, "scale of delta: sqrt-n, moment or a number")->capture_default_str();

    auto* angle = app.add_subcommand("angle", "cdf of tan(Phi) or its polynomial coefficients");
    model(angle);
    auto* topt = angle->add_option("--t", o.t, "tan(Phi) value or start:stop:step");
    angle->add_flag("--coeffs", o.coeffs, "print j,a_2j as CSV")->excludes(topt);
    numerics(angle);

    auto* table = app.add_subcommand("table", "cdf grid over x and several n");
    model(table, true);
    table->add_option("--dist", o.dist, "ssq, svar, s, u or angle-tan")
        ->check(CLI::IsMember({"ssq", "svar", "s", "u", "angle-tan"}))
        ->capture_default_str();
    table->add_option("--at", o.at, "x or start:stop:step")->required();
    numerics(table);

    auto* ver = app.add_subcommand("verify", "Monte Carlo check against the exact cdfs");
    model(ver);
    ver->add_option("--samples", o.samples, "rows of n variates")->capture_default_str();
    ver->add_option("--seed", o.seed, "seed")->capture_default_str();
    ver->add_option("--tol", o.verify_tol, "accuracy of the exact cdfs")->capture_default_str();
    ver->add_option("--threads", o.threads, "sampling threads (0: all cores)")->capture_default_str();
    ver->add_flag("--json", o.json, "JSON report");

    auto* config = app.add_subcommand("config", "configuration");
    config->require_subcommand(1);
    auto* print = config->add_subcommand("print", "print the defaults as JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (*cdf) return run_cdf(o);
        if (*coeffs) return run_coeffs(o);
        if (*angle) return run_angle(o);
        if (*table) return run_table(o);
        if (*ver) return run_verify(o);
        if (*print) return run_config_print();
    } catch (const DomainError& e) {
        std::cerr << "gvx: " << e.what() << '\n';
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "gvx: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "gvx: " << e.what() << '\n';
        return 3;
    }
    return 2;
}
