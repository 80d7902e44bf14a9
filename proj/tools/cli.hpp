#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "gvx/sumsq.hpp"

namespace gvx::cli {

enum class Dist { ssq, svar, s, u, angle_tan };

Dist dist_from_string(const std::string& name);
std::string to_string(Dist d);

// "x" or "start:stop:step" (stop included when it falls on the grid).
std::vector<double> parse_points(const std::string& spec);

// "auto", the aliases thm41/thm42, or a representation name.
Representation method_from_string(const std::string& name, Dist d);

// "sqrt-n", "moment" or a positive number.
LambdaStrategy lambda_from_string(const std::string& name);

// Term budget from GVX_MAX_TERMS, 0 when unset. Throws DomainError on garbage.
int env_max_terms();

// Shortest round-trip decimal form.
std::string format_number(double x);
// As format_number inside the double range, "log:<ln|x|>" (with a leading
// minus for negative x) outside it.
std::string format_wide(const Real& x);

struct Point {
    double x = 0.0;
    SeriesResult result;
};

// Evaluates one distribution over many points. Points are spread over
// threads; the output order follows the input. A failure is rethrown as the
// same error class with the offending x prefixed.
class Evaluator {
public:
    Evaluator(Dist dist, ModelParams params, EvalConfig cfg);

    SeriesResult operator()(double x) const;
    std::vector<Point> run(const std::vector<double>& xs, int threads) const;

    Dist dist() const noexcept { return dist_; }
    const ModelParams& params() const noexcept { return params_; }

private:
    Dist dist_;
    ModelParams params_;
    EvalConfig cfg_;
    std::function<SeriesResult(double)> f_;
};

void write_json(std::ostream& os, const Evaluator& ev, const std::vector<Point>& pts, bool single);
void write_csv(std::ostream& os, const std::vector<Point>& pts);
void write_table(std::ostream& os, const std::vector<Point>& pts);

}  // namespace gvx::cli
