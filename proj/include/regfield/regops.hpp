#pragma once

#include <span>
#include <vector>

#include "regfield/fields.hpp"
#include "regfield/mollifier.hpp"

namespace regfield {

/// Discrete convolution kernel on grid offsets offset_lo .. offset_lo + size - 1.
/// apply computes out[i] = sum_j w_j f[i - j] with f taken as zero off the grid.
struct Stencil {
    long offset_lo = 0;
    std::vector<double> weights;

    long offset_hi() const { return offset_lo + static_cast<long>(weights.size()) - 1; }
    void apply(std::span<const double> f, std::span<double> out) const;
};

/// Regularized derivative D f = phi'_nu * f with phi_nu(x) = phi(x/nu)/nu.
///
/// Weights are midpoint samples dx * phi'_nu(j dx), then shifted to an exact
/// zero sum so that constants are annihilated. The kernel must be resolved by
/// at least four grid cells (nu >= 4 dx).
class RegDerivOperator {
public:
    RegDerivOperator(const Mollifier& m, double nu, const Grid& grid);

    const Mollifier& mollifier() const { return mollifier_; }
    double nu() const { return nu_; }
    const Grid& grid() const { return grid_; }
    const Stencil& stencil() const { return stencil_; }

    /// Continuum bound ||phi'||_1 / nu on the sup-norm gain.
    double norm_bound() const { return norm_bound_; }
    /// Exact sup-norm gain of the discrete operator, sum |w_j|.
    double discrete_norm() const { return discrete_norm_; }

    std::vector<double> apply(std::span<const double> f) const;
    void apply(std::span<const double> f, std::span<double> out) const;

private:
    Mollifier mollifier_;
    double nu_;
    Grid grid_;
    Stencil stencil_;
    double norm_bound_ = 0.0;
    double discrete_norm_ = 0.0;
};

RegDerivOperator make_operator(const Mollifier& m, double nu, const Grid& grid);

/// phi_nu * f with weights normalized to unit sum. Same resolution rule as
/// the derivative operator.
std::vector<double> mollify(const Mollifier& m, double nu, const Grid& grid, std::span<const double> f);

}  // namespace regfield
