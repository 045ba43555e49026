#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "cra/errors.hpp"

namespace cra {

/// Per-class mean arrival vector. Used both for the load at a receiver
/// (packets per receiver per class) and for normalized loads (users per
/// receiver per class).
class OfferedLoad {
public:
    OfferedLoad() = default;

    explicit OfferedLoad(std::vector<double> values) : values_(std::move(values)) {
        if (values_.empty()) throw ValidationError("offered load: needs at least one class");
        for (double v : values_)
            if (!(v >= 0.0)) throw ValidationError("offered load: negative or NaN entry");
    }

    OfferedLoad(std::initializer_list<double> values) : OfferedLoad(std::vector<double>(values)) {}

    static OfferedLoad zeros(std::size_t num_classes) {
        return OfferedLoad(std::vector<double>(num_classes, 0.0));
    }

    std::size_t num_classes() const { return values_.size(); }
    double operator[](std::size_t k) const { return values_[k]; }
    const std::vector<double>& values() const { return values_; }

    double total() const {
        double t = 0.0;
        for (double v : values_) t += v;
        return t;
    }

    /// Element-wise product, the load-thinning operation.
    OfferedLoad hadamard(const std::vector<double>& factors) const {
        if (factors.size() != values_.size())
            throw ValidationError("offered load: element-wise product dimension mismatch");
        std::vector<double> out(values_.size());
        for (std::size_t k = 0; k < values_.size(); ++k) out[k] = values_[k] * factors[k];
        return OfferedLoad(std::move(out));
    }

private:
    std::vector<double> values_;
};

/// Abstract receiver characterized purely by its per-class success
/// probability map under Poisson arrivals. Combinators compose receivers
/// through this evaluation contract without seeing their internals.
class PoissonReceiver {
public:
    using SuccessFn = std::function<std::vector<double>(const OfferedLoad&)>;

    PoissonReceiver() = default;

    PoissonReceiver(std::size_t num_classes, SuccessFn fn, bool normal_hint = true,
                    std::string name = {})
        : num_classes_(num_classes),
          fn_(std::move(fn)),
          normal_hint_(normal_hint),
          name_(std::move(name)) {
        if (num_classes_ == 0) throw ValidationError("poisson receiver: needs at least one class");
        if (!fn_) throw ValidationError("poisson receiver: missing success function");
    }

    std::size_t num_classes() const { return num_classes_; }
    bool normal_hint() const { return normal_hint_; }
    const std::string& name() const { return name_; }

    /// Per-class success probabilities at the given load, clamped to [0,1].
    std::vector<double> success(const OfferedLoad& load) const {
        if (load.num_classes() != num_classes_)
            throw ValidationError("poisson receiver: load has wrong number of classes");
        std::vector<double> out = fn_(load);
        if (out.size() != num_classes_)
            throw ValidationError("poisson receiver: success function returned wrong arity");
        for (double& v : out) v = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
        return out;
    }

    /// Single-class convenience.
    double success1(double load) const {
        if (num_classes_ != 1)
            throw ValidationError("poisson receiver: scalar evaluation on multi-class receiver");
        return success(OfferedLoad{load})[0];
    }

    /// Per-class throughput load[k] * success[k].
    std::vector<double> throughput(const OfferedLoad& load) const {
        std::vector<double> s = success(load);
        for (std::size_t k = 0; k < s.size(); ++k) s[k] *= load[k];
        return s;
    }

private:
    std::size_t num_classes_ = 0;
    SuccessFn fn_;
    bool normal_hint_ = true;
    std::string name_;
};

}  // namespace cra
