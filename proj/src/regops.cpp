#include "regfield/regops.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace regfield {

namespace {

void require_resolved(double nu, const Grid& grid) {
    grid.validate();
    const double dx = grid.dx();
    if (!(nu >= 4.0 * dx * (1.0 - 1e-12))) {
        std::ostringstream os;
        os << "regops: kernel width nu = " << nu << " is under-resolved on grid spacing dx = " << dx
           << " (need nu >= 4 dx = " << 4.0 * dx << ")";
        throw std::invalid_argument(os.str());
    }
}

template <typename Sample>
Stencil sample_stencil(const Mollifier& m, double nu, double dx, Sample&& sample) {
    const Support s = m.support();
    const auto lo = static_cast<long>(std::floor(nu * s.lo / dx));
    const auto hi = static_cast<long>(std::ceil(nu * s.hi / dx));
    std::vector<double> w;
    w.reserve(static_cast<std::size_t>(hi - lo + 1));
    for (long j = lo; j <= hi; ++j) w.push_back(sample(static_cast<double>(j) * dx));

    // trim offsets where the kernel vanishes at either end
    std::size_t first = 0;
    while (first < w.size() && w[first] == 0.0) ++first;
    std::size_t last = w.size();
    while (last > first && w[last - 1] == 0.0) --last;

    Stencil st;
    st.offset_lo = lo + static_cast<long>(first);
    st.weights.assign(w.begin() + static_cast<long>(first), w.begin() + static_cast<long>(last));
    return st;
}

}  // namespace

void Stencil::apply(std::span<const double> f, std::span<double> out) const {
    const long n = static_cast<long>(f.size());
    const long m = static_cast<long>(weights.size());
    for (long i = 0; i < n; ++i) {
        // f index i - (offset_lo + k) must lie in [0, n)
        const long k_min = std::max(0L, i - offset_lo - (n - 1));
        const long k_max = std::min(m - 1, i - offset_lo);
        double acc = 0.0;
        for (long k = k_min; k <= k_max; ++k) acc += weights[static_cast<std::size_t>(k)] * f[static_cast<std::size_t>(i - offset_lo - k)];
        out[static_cast<std::size_t>(i)] = acc;
    }
}

RegDerivOperator::RegDerivOperator(const Mollifier& m, double nu, const Grid& grid)
    : mollifier_(m), nu_(nu), grid_(grid) {
    require_resolved(nu, grid);
    const double dx = grid.dx();
    stencil_ = sample_stencil(m, nu, dx, [&](double y) { return dx * m.eval_deriv(y / nu) / (nu * nu); });

    std::size_t nonzero = 0;
    double sum = 0.0;
    for (double w : stencil_.weights) {
        if (w != 0.0) {
            ++nonzero;
            sum += w;
        }
    }
    if (nonzero > 0) {
        const double mean = sum / static_cast<double>(nonzero);
        for (double& w : stencil_.weights) {
            if (w != 0.0) w -= mean;
        }
    }
    // Rescale so that D x = 1 exactly; a few cells per half-width otherwise
    // leave a first-moment defect larger than the nu^2 term.
    double moment = 0.0;
    for (std::size_t j = 0; j < stencil_.weights.size(); ++j) {
        moment -= stencil_.weights[j] * static_cast<double>(stencil_.offset_lo + static_cast<long>(j)) * dx;
    }
    if (moment > 0.0) {
        for (double& w : stencil_.weights) w /= moment;
    }

    norm_bound_ = m.l1_norm_deriv() / nu;
    for (double w : stencil_.weights) discrete_norm_ += std::abs(w);
}

std::vector<double> RegDerivOperator::apply(std::span<const double> f) const {
    std::vector<double> out(f.size());
    apply(f, out);
    return out;
}

void RegDerivOperator::apply(std::span<const double> f, std::span<double> out) const {
    if (f.size() != grid_.n || out.size() != grid_.n) {
        std::ostringstream os;
        os << "regops: field length " << f.size() << " does not match grid size " << grid_.n;
        throw std::invalid_argument(os.str());
    }
    stencil_.apply(f, out);
}

RegDerivOperator make_operator(const Mollifier& m, double nu, const Grid& grid) {
    return RegDerivOperator(m, nu, grid);
}

std::vector<double> mollify(const Mollifier& m, double nu, const Grid& grid, std::span<const double> f) {
    require_resolved(nu, grid);
    if (f.size() != grid.n) {
        std::ostringstream os;
        os << "regops: field length " << f.size() << " does not match grid size " << grid.n;
        throw std::invalid_argument(os.str());
    }
    const double dx = grid.dx();
    Stencil st = sample_stencil(m, nu, dx, [&](double y) { return dx * m.eval(y / nu) / nu; });
    double sum = 0.0;
    for (double w : st.weights) sum += w;
    for (double& w : st.weights) w /= sum;
    std::vector<double> out(f.size());
    st.apply(f, out);
    return out;
}

}  // namespace regfield
