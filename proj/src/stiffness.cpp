#include "elastica/stiffness.hpp"

#include "elastica/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace elastica {

namespace {

double horner(const std::vector<double>& c, double x)
{
    double acc = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it)
        acc = acc * x + *it;
    return acc;
}

std::vector<double> derivative(const std::vector<double>& c)
{
    std::vector<double> d;
    for (std::size_t k = 1; k < c.size(); ++k)
        d.push_back(static_cast<double>(k) * c[k]);
    return d;
}

void require_count(std::string_view family, const std::vector<double>& p, std::size_t n)
{
    if (p.size() != n)
        fail(ErrorCode::InvalidArgument,
             std::string(family) + " expects " + std::to_string(n) + " parameter(s), got "
                 + std::to_string(p.size()));
}

} // namespace

Stiffness::Stiffness(Family family, std::vector<double> params)
    : family_(family), params_(std::move(params))
{
    for (double p : params_)
        if (!std::isfinite(p))
            fail(ErrorCode::InvalidArgument, "non-finite stiffness parameter");
}

Stiffness Stiffness::exponential(double a) { return {Family::Exponential, {a}}; }
Stiffness Stiffness::quadratic(double c, double b) { return {Family::Quadratic, {c, b}}; }
Stiffness Stiffness::double_well(double c) { return {Family::DoubleWell, {c}}; }
Stiffness Stiffness::shifted_quartic(double c, double x0) { return {Family::ShiftedQuartic, {c, x0}}; }
Stiffness Stiffness::neg_quadratic() { return {Family::NegQuadratic, {}}; }

Stiffness Stiffness::polynomial(std::vector<double> coeffs)
{
    if (coeffs.empty())
        fail(ErrorCode::InvalidArgument, "polynomial stiffness needs at least one coefficient");
    return {Family::Polynomial, std::move(coeffs)};
}

Stiffness Stiffness::from_name(std::string_view family, const std::vector<double>& p)
{
    if (family == "exponential") {
        if (p.empty())
            return exponential();
        require_count(family, p, 1);
        return exponential(p[0]);
    }
    if (family == "quadratic") {
        require_count(family, p, 2);
        return quadratic(p[0], p[1]);
    }
    if (family == "double_well") {
        require_count(family, p, 1);
        return double_well(p[0]);
    }
    if (family == "shifted_quartic") {
        require_count(family, p, 2);
        return shifted_quartic(p[0], p[1]);
    }
    if (family == "neg_quadratic") {
        require_count(family, p, 0);
        return neg_quadratic();
    }
    if (family == "polynomial")
        return polynomial(p);
    fail(ErrorCode::InvalidArgument, "unknown stiffness family '" + std::string(family) + "'");
}

double Stiffness::value(double x) const
{
    switch (family_) {
    case Family::Exponential: return std::exp(params_[0] * x);
    case Family::Quadratic: return params_[0] + params_[1] * x * x;
    case Family::DoubleWell: {
        const double w = x * x - 1.0;
        return w * w + params_[0];
    }
    case Family::ShiftedQuartic: {
        const double y = x - params_[1];
        return params_[0] + y * y * y * y;
    }
    case Family::NegQuadratic: return 1.0 - 0.5 * x * x;
    case Family::Polynomial: return horner(params_, x);
    }
    return std::numeric_limits<double>::quiet_NaN();
}

double Stiffness::d1(double x) const
{
    switch (family_) {
    case Family::Exponential: return params_[0] * std::exp(params_[0] * x);
    case Family::Quadratic: return 2.0 * params_[1] * x;
    case Family::DoubleWell: return 4.0 * x * (x * x - 1.0);
    case Family::ShiftedQuartic: {
        const double y = x - params_[1];
        return 4.0 * y * y * y;
    }
    case Family::NegQuadratic: return -x;
    case Family::Polynomial: return horner(derivative(params_), x);
    }
    return std::numeric_limits<double>::quiet_NaN();
}

double Stiffness::d2(double x) const
{
    switch (family_) {
    case Family::Exponential: return params_[0] * params_[0] * std::exp(params_[0] * x);
    case Family::Quadratic: return 2.0 * params_[1];
    case Family::DoubleWell: return 12.0 * x * x - 4.0;
    case Family::ShiftedQuartic: {
        const double y = x - params_[1];
        return 12.0 * y * y;
    }
    case Family::NegQuadratic: return -1.0;
    case Family::Polynomial: return horner(derivative(derivative(params_)), x);
    }
    return std::numeric_limits<double>::quiet_NaN();
}

double Stiffness::inf_over(double lo, double hi) const
{
    if (!(lo <= hi))
        fail(ErrorCode::InvalidArgument, "inf_over needs lo <= hi");
    std::vector<double> candidates{lo, hi};
    switch (family_) {
    case Family::Exponential: break;
    case Family::Quadratic: candidates.push_back(0.0); break;
    case Family::DoubleWell: candidates.insert(candidates.end(), {-1.0, 0.0, 1.0}); break;
    case Family::ShiftedQuartic: candidates.push_back(params_[1]); break;
    case Family::NegQuadratic: break;
    case Family::Polynomial: {
        // sign changes of beta' on a fine grid, refined by bisection
        const int samples = 4096;
        const std::vector<double> dc = derivative(params_);
        double xa = lo, fa = horner(dc, lo);
        for (int k = 1; k <= samples; ++k) {
            const double xb = lo + (hi - lo) * k / samples;
            const double fb = horner(dc, xb);
            if (fa == 0.0)
                candidates.push_back(xa);
            else if (fa * fb < 0.0) {
                double a = xa, b = xb, ga = fa;
                for (int it = 0; it < 80; ++it) {
                    const double m = 0.5 * (a + b);
                    const double gm = horner(dc, m);
                    if (ga * gm <= 0.0)
                        b = m;
                    else {
                        a = m;
                        ga = gm;
                    }
                }
                candidates.push_back(0.5 * (a + b));
            }
            xa = xb;
            fa = fb;
        }
        break;
    }
    }
    double best = std::numeric_limits<double>::infinity();
    for (double x : candidates)
        if (x >= lo && x <= hi)
            best = std::min(best, value(x));
    return best;
}

std::string Stiffness::name() const
{
    switch (family_) {
    case Family::Exponential: return "exponential";
    case Family::Quadratic: return "quadratic";
    case Family::DoubleWell: return "double_well";
    case Family::ShiftedQuartic: return "shifted_quartic";
    case Family::NegQuadratic: return "neg_quadratic";
    case Family::Polynomial: return "polynomial";
    }
    return "unknown";
}

} // namespace elastica
