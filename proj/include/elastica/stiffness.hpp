#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace elastica {

/// Bending stiffness beta(rho) from a closed set of families, with exact first
/// and second derivatives.
class Stiffness {
public:
    enum class Family { Exponential, Quadratic, DoubleWell, ShiftedQuartic, NegQuadratic, Polynomial };

    /// e^{a x}
    static Stiffness exponential(double a = 1.0);
    /// c + b x^2
    static Stiffness quadratic(double c, double b);
    /// (x^2 - 1)^2 + c
    static Stiffness double_well(double c);
    /// c + (x - x0)^4
    static Stiffness shifted_quartic(double c, double x0);
    /// 1 - x^2 / 2
    static Stiffness neg_quadratic();
    /// sum_k coeffs[k] x^k
    static Stiffness polynomial(std::vector<double> coeffs);

    /// Builds a family from its config name and parameter list.
    static Stiffness from_name(std::string_view family, const std::vector<double>& params);

    double value(double x) const;
    double d1(double x) const;
    double d2(double x) const;

    /// Infimum of beta over the closed interval [lo, hi].
    double inf_over(double lo, double hi) const;

    Family family() const { return family_; }
    const std::vector<double>& params() const { return params_; }
    std::string name() const;

private:
    Stiffness(Family family, std::vector<double> params);

    Family family_;
    std::vector<double> params_;
};

} // namespace elastica
