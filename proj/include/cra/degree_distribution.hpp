#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <sstream>
#include <vector>

#include "cra/errors.hpp"

namespace cra {

/// Finite-support probability distribution over transmission degrees,
/// stored as polynomial coefficients of its generating function.
///
/// Coefficient l is the probability that a packet is sent as l copies
/// (or l coded blocks). All calculus on the generating function is exact
/// polynomial arithmetic; there is no truncation.
class DegreeDistribution {
public:
    /// Builds a distribution from nonnegative coefficients. Sequences that
    /// sum to 1 within 1e-9 are renormalized exactly; anything further off
    /// is rejected as a likely config mistake.
    static DegreeDistribution from_coeffs(std::vector<double> coeffs) {
        if (coeffs.empty()) throw ValidationError("degree distribution: empty coefficient list");
        double sum = 0.0;
        for (double c : coeffs) {
            if (!(c >= 0.0)) throw ValidationError("degree distribution: negative or NaN coefficient");
            sum += c;
        }
        if (sum <= 0.0) throw ValidationError("degree distribution: all coefficients are zero");
        if (std::abs(sum - 1.0) > 1e-9) {
            std::ostringstream msg;
            msg << "degree distribution: coefficients sum to " << sum << ", expected 1 within 1e-9";
            throw ValidationError(msg.str());
        }
        for (double& c : coeffs) c /= sum;
        while (coeffs.size() > 1 && coeffs.back() == 0.0) coeffs.pop_back();
        return DegreeDistribution(std::move(coeffs));
    }

    static DegreeDistribution from_coeffs(std::initializer_list<double> coeffs) {
        return from_coeffs(std::vector<double>(coeffs));
    }

    /// The monomial x^n: every packet sent exactly n times.
    static DegreeDistribution regular(std::size_t n) {
        std::vector<double> c(n + 1, 0.0);
        c[n] = 1.0;
        return DegreeDistribution(std::move(c));
    }

    const std::vector<double>& coeffs() const { return coeffs_; }

    /// Highest degree with nonzero probability.
    std::size_t max_degree() const { return coeffs_.size() - 1; }

    /// Lowest degree with nonzero probability.
    std::size_t min_degree() const {
        std::size_t l = 0;
        while (l < coeffs_.size() && coeffs_[l] == 0.0) ++l;
        return l;
    }

    /// Mean degree, computed as the exact finite sum of l * coeff[l].
    double mean() const {
        double m = 0.0;
        for (std::size_t l = 1; l < coeffs_.size(); ++l) m += static_cast<double>(l) * coeffs_[l];
        return m;
    }

    /// j-th derivative of the generating function at x, via falling factorials.
    /// j = 0 is plain evaluation; j beyond the polynomial degree is exactly 0.
    double derivative(std::size_t j, double x) const {
        if (!(x >= 0.0 && x <= 1.0)) throw ValidationError("degree distribution: evaluation point outside [0,1]");
        double acc = 0.0;
        // Horner over the coefficients of the j-th derivative, highest first.
        for (std::size_t l = coeffs_.size(); l-- > j;) {
            double ff = 1.0;
            for (std::size_t i = 0; i < j; ++i) ff *= static_cast<double>(l - i);
            acc = acc * x + coeffs_[l] * ff;
        }
        return acc;
    }

    double eval(double x) const { return derivative(0, x); }

    /// Distribution of the remaining degree seen along a randomly chosen edge;
    /// coefficient l becomes coeff[l+1]*(l+1)/mean. Support shrinks by one.
    DegreeDistribution excess() const {
        const double m = mean();
        if (m <= 0.0) throw ValidationError("degree distribution: excess undefined, all mass at degree 0");
        std::vector<double> ex(coeffs_.size() - 1 > 0 ? coeffs_.size() - 1 : 1, 0.0);
        for (std::size_t l = 0; l + 1 < coeffs_.size(); ++l)
            ex[l] = coeffs_[l + 1] * static_cast<double>(l + 1) / m;
        return from_coeffs(std::move(ex));
    }

private:
    explicit DegreeDistribution(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {}
    std::vector<double> coeffs_;
};

}  // namespace cra
