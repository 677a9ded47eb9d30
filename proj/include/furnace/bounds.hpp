#ifndef FURNACE_BOUNDS_HPP
#define FURNACE_BOUNDS_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "furnace/errors.hpp"

namespace furnace {

/// Per-variable box constraints. Construction validates lower < upper.
class BoundsBox {
public:
    BoundsBox() = default;

    BoundsBox(std::vector<double> lower, std::vector<double> upper)
        : lower_(std::move(lower)), upper_(std::move(upper)) {
        if (lower_.size() != upper_.size())
            throw BoundsError("bounds: lower/upper arity mismatch");
        for (std::size_t i = 0; i < lower_.size(); ++i) {
            if (!(lower_[i] < upper_[i]))
                throw BoundsError("bounds: lower >= upper for variable " + std::to_string(i + 1));
        }
    }

    std::size_t size() const { return lower_.size(); }
    double lower(std::size_t i) const { return lower_[i]; }
    double upper(std::size_t i) const { return upper_[i]; }
    double range(std::size_t i) const { return upper_[i] - lower_[i]; }

    bool contains(const std::vector<double>& x) const {
        if (x.size() != size()) return false;
        for (std::size_t i = 0; i < size(); ++i)
            if (x[i] < lower_[i] || x[i] > upper_[i]) return false;
        return true;
    }

    double clip(std::size_t i, double v) const {
        if (v < lower_[i]) return lower_[i];
        if (v > upper_[i]) return upper_[i];
        return v;
    }

private:
    std::vector<double> lower_;
    std::vector<double> upper_;
};

}  // namespace furnace

#endif
