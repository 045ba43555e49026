#pragma once

#include <cmath>
#include <vector>

#include "cra/poisson_receiver.hpp"

namespace cra {

/// Row-stochastic matrix mapping external traffic classes onto the classes
/// of an inner receiver. Each external packet becomes exactly one internal
/// packet, so rows must sum to 1; sub-stochastic rows (dropping) are
/// rejected rather than renormalized.
class RoutingMatrix {
public:
    explicit RoutingMatrix(std::vector<std::vector<double>> rows) {
        if (rows.empty()) throw ValidationError("routing matrix: no rows");
        cols_ = rows[0].size();
        if (cols_ == 0) throw ValidationError("routing matrix: no columns");
        for (const auto& row : rows) {
            if (row.size() != cols_) throw ValidationError("routing matrix: ragged rows");
            double sum = 0.0;
            for (double r : row) {
                if (!(r >= 0.0)) throw ValidationError("routing matrix: negative or NaN entry");
                sum += r;
            }
            if (std::abs(sum - 1.0) > 1e-12)
                throw ValidationError("routing matrix: row does not sum to 1");
        }
        rows_ = std::move(rows);
    }

    static RoutingMatrix identity(std::size_t n) {
        std::vector<std::vector<double>> rows(n, std::vector<double>(n, 0.0));
        for (std::size_t i = 0; i < n; ++i) rows[i][i] = 1.0;
        return RoutingMatrix(std::move(rows));
    }

    std::size_t num_external() const { return rows_.size(); }
    std::size_t num_internal() const { return cols_; }
    double operator()(std::size_t k1, std::size_t k2) const { return rows_[k1][k2]; }
    const std::vector<std::vector<double>>& rows() const { return rows_; }

    /// Internal load induced by an external load, by Poisson splitting and
    /// superposition.
    OfferedLoad mix(const OfferedLoad& external) const {
        if (external.num_classes() != rows_.size())
            throw ValidationError("routing matrix: external load arity mismatch");
        std::vector<double> internal(cols_, 0.0);
        for (std::size_t k1 = 0; k1 < rows_.size(); ++k1)
            for (std::size_t k2 = 0; k2 < cols_; ++k2)
                internal[k2] += external[k1] * rows_[k1][k2];
        return OfferedLoad(std::move(internal));
    }

private:
    std::vector<std::vector<double>> rows_;
    std::size_t cols_ = 0;
};

/// Routing closure: an inner receiver behind a routing matrix is itself a
/// receiver over the external classes. A tagged external packet succeeds
/// with the routing-weighted mix of internal success probabilities.
inline PoissonReceiver route(const PoissonReceiver& inner, const RoutingMatrix& matrix) {
    if (matrix.num_internal() != inner.num_classes())
        throw ValidationError("route: matrix column count must match inner receiver classes");
    auto fn = [inner, matrix](const OfferedLoad& external) {
        const std::vector<double> internal = inner.success(matrix.mix(external));
        std::vector<double> out(matrix.num_external(), 0.0);
        for (std::size_t k1 = 0; k1 < out.size(); ++k1)
            for (std::size_t k2 = 0; k2 < internal.size(); ++k2)
                out[k1] += matrix(k1, k2) * internal[k2];
        return out;
    };
    return PoissonReceiver(matrix.num_external(), std::move(fn), inner.normal_hint(),
                           "route(" + inner.name() + ")");
}

}  // namespace cra
