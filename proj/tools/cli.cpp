#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <limits>
#include <memory>
#include <ostream>
#include <thread>

#include "json.hpp"

#include "gvx/angle.hpp"
#include "gvx/errors.hpp"
#include "gvx/variance.hpp"

namespace gvx::cli {

namespace {

double parse_double(const std::string& s, const char* what) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != s.size() || !std::isfinite(v))
        throw DomainError(std::string(what) + ": '" + s + "' is not a finite number");
    return v;
}

constexpr std::size_t kMaxPoints = 1000000;

}  // namespace

Dist dist_from_string(const std::string& name) {
    if (name == "ssq") return Dist::ssq;
    if (name == "svar") return Dist::svar;
    if (name == "s") return Dist::s;
    if (name == "u") return Dist::u;
    if (name == "angle-tan") return Dist::angle_tan;
    throw DomainError("unknown distribution '" + name + "' (ssq, svar, s, u, angle-tan)");
}

std::string to_string(Dist d) {
    switch (d) {
        case Dist::ssq: return "ssq";
        case Dist::svar: return "svar";
        case Dist::s: return "s";
        case Dist::u: return "u";
        case Dist::angle_tan: return "angle-tan";
    }
    return "unknown";
}

std::vector<double> parse_points(const std::string& spec) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    for (;;) {
        const std::size_t colon = spec.find(':', start);
        parts.push_back(spec.substr(start, colon - start));
        if (colon == std::string::npos) break;
        start = colon + 1;
    }
    if (parts.size() == 1) return {parse_double(parts[0], "--at")};
    if (parts.size() != 3) throw DomainError("--at takes a value or start:stop:step");
    const double a = parse_double(parts[0], "range start");
    const double b = parse_double(parts[1], "range stop");
    const double h = parse_double(parts[2], "range step");
    if (!(h > 0)) throw DomainError("range step must be positive");
    if (b < a) throw DomainError("range stop lies below its start");
    const double count = std::floor((b - a) / h * (1 + 1e-12) + 1e-9) + 1;
    if (count > kMaxPoints) throw DomainError("range has more than 1000000 points");
    std::vector<double> xs(static_cast<std::size_t>(count));
    for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = a + static_cast<double>(i) * h;
    return xs;
}

Representation method_from_string(const std::string& name, Dist d) {
    const bool svar = d == Dist::svar || d == Dist::s;
    if (name == "thm41") {
        if (!svar) throw DomainError("thm41 applies to the svar and s distributions");
        return Representation::series;
    }
    if (name == "thm42") {
        if (!svar) throw DomainError("thm42 applies to the svar and s distributions");
        return Representation::truncated;
    }
    const Representation rep = representation_from_string(name);
    if (rep == Representation::automatic) return rep;
    bool ok = false;
    switch (d) {
        case Dist::ssq:
            ok = rep == Representation::power || rep == Representation::mixture || rep == Representation::legendre ||
                 rep == Representation::fourier;
            break;
        case Dist::svar:
        case Dist::s:
            ok = rep == Representation::series || rep == Representation::svar_mixture ||
                 rep == Representation::truncated;
            break;
        case Dist::u: ok = rep == Representation::legendre; break;
        case Dist::angle_tan: ok = rep == Representation::tan_polynomial || rep == Representation::u_legendre; break;
    }
    if (!ok) throw DomainError("method " + name + " does not apply to --dist " + to_string(d));
    return rep;
}

LambdaStrategy lambda_from_string(const std::string& name) {
    LambdaStrategy l;
    if (name == "sqrt-n") return l;
    if (name == "moment") {
        l.kind = LambdaStrategy::Kind::moment;
        return l;
    }
    l.kind = LambdaStrategy::Kind::fixed;
    l.value = parse_double(name, "--lambda");
    if (!(l.value > 0)) throw DomainError("--lambda must be sqrt-n, moment or a positive number");
    return l;
}

int env_max_terms() {
    const char* v = std::getenv("GVX_MAX_TERMS");
    if (!v || !*v) return 0;
    char* end = nullptr;
    const long m = std::strtol(v, &end, 10);
    if (*end != '\0' || m < 1 || m > std::numeric_limits<int>::max())
        throw DomainError(std::string("GVX_MAX_TERMS must be a positive integer, got '") + v + "'");
    return static_cast<int>(m);
}

std::string format_number(double x) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

std::string format_wide(const Real& x) {
    if (x == 0) return "0";
    const Real a = abs(x);
    if (a >= Real(1e-300) && a <= Real(1e300)) return format_number(to_double(x));
    return std::string(x < 0 ? "-" : "") + "log:" + format_number(to_double(log(a)));
}

Evaluator::Evaluator(Dist dist, ModelParams params, EvalConfig cfg) : dist_(dist), params_(params), cfg_(cfg) {
    cfg_.validate();
    const Representation rep = cfg_.representation;
    switch (dist) {
        case Dist::ssq: {
            auto m = std::make_shared<const SumSquaresModel>(params, cfg_);
            f_ = [m](double r) { return m->cdf(r); };
            break;
        }
        case Dist::u: {
            params.validate(2);
            auto m = std::make_shared<const SumSquaresModel>(params, cfg_);
            f_ = [m](double u) { return m->cdf_u(u); };
            break;
        }
        case Dist::svar:
        case Dist::s: {
            auto m = std::make_shared<const SampleVarianceModel>(params, cfg_);
            if (dist == Dist::svar) {
                f_ = [m](double s2) { return m->cdf(s2); };
            } else {
                f_ = [m](double s) {
                    if (!(s >= 0)) throw DomainError("s must be nonnegative");
                    return m->cdf(s * s);
                };
            }
            break;
        }
        case Dist::angle_tan: {
            params.validate(2);
            std::shared_ptr<const AngleCoefficients> ac;
            if (rep != Representation::u_legendre) {
                if (params.integer_alpha()) {
                    try {
                        ac = std::make_shared<const AngleCoefficients>(solve_angle_coeffs(params));
                    } catch (const NumericalError&) {
                        if (rep == Representation::tan_polynomial) throw;
                    }
                } else if (rep == Representation::tan_polynomial) {
                    throw DomainError("the tan-polynomial cdf needs integer alpha; use u-legendre");
                }
            }
            EvalConfig ucfg = cfg_;
            ucfg.representation = Representation::automatic;
            auto m = std::make_shared<const SumSquaresModel>(params, ucfg);
            const double tn = tan_phi_n(params.n);
            const int n = params.n;
            f_ = [ac, m, tn, n, rep](double t) {
                if (!(t >= 0)) throw DomainError("t must be nonnegative");
                SeriesResult r;
                if (ac && t <= tn) {
                    r.value = tan_cdf(*ac, t);
                    r.est_error = std::max(ac->residual, std::numeric_limits<double>::epsilon());
                    r.terms_used = ac->N + 1;
                    r.representation = Representation::tan_polynomial;
                    return r;
                }
                if (rep == Representation::tan_polynomial)
                    throw DomainError("t lies beyond (n-1)^(-1/2), where the tan-polynomial cdf does not hold; use "
                                      "u-legendre");
                r = m->cdf_u(std::min(1.0, std::sqrt((1.0 + t * t) / n)));
                r.representation = Representation::u_legendre;
                return r;
            };
            break;
        }
    }
}

SeriesResult Evaluator::operator()(double x) const { return f_(x); }

std::vector<Point> Evaluator::run(const std::vector<double>& xs, int threads) const {
    std::vector<Point> out(xs.size());
    std::vector<std::exception_ptr> errors(xs.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < xs.size();) {
            out[i].x = xs[i];
            try {
                out[i].result = f_(xs[i]);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    unsigned hw = threads > 0 ? static_cast<unsigned>(threads) : std::max(1u, std::thread::hardware_concurrency());
    hw = static_cast<unsigned>(std::min<std::size_t>(hw, xs.size()));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < hw; ++t) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();

    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!errors[i]) continue;
        const std::string at = "at x=" + format_number(xs[i]) + ": ";
        try {
            std::rethrow_exception(errors[i]);
        } catch (const DomainError& e) {
            throw DomainError(at + e.what());
        } catch (const NumericalError& e) {
            throw NumericalError(at + e.what());
        }
    }
    return out;
}

void write_json(std::ostream& os, const Evaluator& ev, const std::vector<Point>& pts, bool single) {
    auto row = [&](const Point& p) {
        nlohmann::ordered_json j;
        j["alpha"] = ev.params().alpha;
        j["n"] = ev.params().n;
        j["statistic"] = to_string(ev.dist());
        j["x"] = p.x;
        j["cdf"] = p.result.value;
        j["representation"] = to_string(p.result.representation);
        j["terms_used"] = p.result.terms_used;
        j["est_error"] = p.result.est_error;
        return j;
    };
    if (single && pts.size() == 1) {
        os << row(pts[0]).dump(2) << '\n';
        return;
    }
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& p : pts) arr.push_back(row(p));
    os << arr.dump(2) << '\n';
}

void write_csv(std::ostream& os, const std::vector<Point>& pts) {
    os << "x,cdf,est_error,terms_used,representation\n";
    for (const auto& p : pts) {
        os << format_number(p.x) << ',' << format_number(p.result.value) << ',' << format_number(p.result.est_error)
           << ',' << p.result.terms_used << ',' << to_string(p.result.representation) << '\n';
    }
}

void write_table(std::ostream& os, const std::vector<Point>& pts) {
    char line[160];
    std::snprintf(line, sizeof line, "%14s  %18s  %10s  %6s  %s\n", "x", "cdf", "est_error", "terms",
                  "representation");
    os << line;
    for (const auto& p : pts) {
        std::snprintf(line, sizeof line, "%14.8g  %18.15f  %10.2e  %6d  %s\n", p.x, p.result.value,
                      p.result.est_error, p.result.terms_used, to_string(p.result.representation).c_str());
        os << line;
    }
}

}  // namespace gvx::cli
