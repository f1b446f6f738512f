#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "g2flow/octonion.hpp"

namespace g2flow {

/// Periodic lattice over a subset of the seven torus directions. Fields are
/// stored only over the active axes; derivatives along inactive axes are
/// identically zero. Indexing is row-major with the first active axis
/// slowest, matching the checkpoint payload order.
class LatticeSpec {
public:
    LatticeSpec() = default;

    /// More than three active axes is refused by default; a full grid grows
    /// as n^d and the interesting dynamics live on low-dimensional slices.
    /// Pass allow_large to override the soft limit.
    LatticeSpec(std::vector<int> active_axes, int points_per_axis, double length,
                bool allow_large = false)
        : axes_(std::move(active_axes)), n_(points_per_axis), length_(length) {
        std::sort(axes_.begin(), axes_.end());
        if (axes_.empty() || axes_.size() > 7)
            throw std::invalid_argument("LatticeSpec: need between 1 and 7 active axes");
        if (axes_.size() > 3 && !allow_large)
            throw std::invalid_argument(
                "LatticeSpec: more than 3 active axes needs the allow_large override");
        if (std::adjacent_find(axes_.begin(), axes_.end()) != axes_.end())
            throw std::invalid_argument("LatticeSpec: duplicate active axis");
        if (axes_.front() < 1 || axes_.back() > 7)
            throw std::invalid_argument("LatticeSpec: active axes must lie in 1..7");
        if (n_ < 4) throw std::invalid_argument("LatticeSpec: need at least 4 points per axis");
        if (!(length_ > 0.0)) throw std::invalid_argument("LatticeSpec: length must be positive");

        strides_.resize(axes_.size());
        std::size_t s = 1;
        for (std::size_t k = axes_.size(); k-- > 0;) {
            strides_[k] = s;
            s *= static_cast<std::size_t>(n_);
        }
        points_ = s;
    }

    const std::vector<int>& active_axes() const { return axes_; }
    int points_per_axis() const { return n_; }
    double length() const { return length_; }
    double spacing() const { return length_ / n_; }
    int dim() const { return static_cast<int>(axes_.size()); }
    std::size_t point_count() const { return points_; }

    /// 1-based torus axis number of active slot s.
    int axis(int slot) const { return axes_[static_cast<std::size_t>(slot)]; }

    bool axis_active(int axis_number) const {
        return std::find(axes_.begin(), axes_.end(), axis_number) != axes_.end();
    }

    int coordinate(std::size_t point, int slot) const {
        return static_cast<int>((point / strides_[static_cast<std::size_t>(slot)]) %
                                static_cast<std::size_t>(n_));
    }

    /// Periodic neighbor of a point along an active slot.
    std::size_t shifted(std::size_t point, int slot, int delta) const {
        std::size_t stride = strides_[static_cast<std::size_t>(slot)];
        int c = coordinate(point, slot);
        int cn = ((c + delta) % n_ + n_) % n_;
        return point + (static_cast<std::size_t>(cn) - static_cast<std::size_t>(c)) * stride;
    }

    /// Physical coordinate along an active slot.
    double position(std::size_t point, int slot) const { return coordinate(point, slot) * spacing(); }

    std::size_t index_of(const std::vector<int>& coords) const {
        if (coords.size() != axes_.size())
            throw std::invalid_argument("LatticeSpec::index_of: coordinate count mismatch");
        std::size_t p = 0;
        for (std::size_t k = 0; k < coords.size(); ++k) {
            int c = ((coords[k] % n_) + n_) % n_;
            p += static_cast<std::size_t>(c) * strides_[k];
        }
        return p;
    }

    bool operator==(const LatticeSpec& o) const {
        return axes_ == o.axes_ && n_ == o.n_ && length_ == o.length_;
    }
    bool operator!=(const LatticeSpec& o) const { return !(*this == o); }

private:
    std::vector<int> axes_;
    int n_ = 0;
    double length_ = 0.0;
    std::size_t points_ = 0;
    std::vector<std::size_t> strides_;
};

struct OctonionField {
    LatticeSpec spec;
    std::vector<Octonion> values;

    OctonionField() = default;
    explicit OctonionField(const LatticeSpec& s) : spec(s), values(s.point_count()) {}
};

/// Octonion-valued 1-form on the lattice: seven slots per point, slot a
/// (0-based) pairing with the torus direction a+1.
struct OneFormField {
    LatticeSpec spec;
    std::vector<std::array<Octonion, 7>> values;

    OneFormField() = default;
    explicit OneFormField(const LatticeSpec& s) : spec(s), values(s.point_count()) {}
};

using TorsionField = OneFormField;

struct ScalarField {
    LatticeSpec spec;
    std::vector<double> values;

    ScalarField() = default;
    explicit ScalarField(const LatticeSpec& s) : spec(s), values(s.point_count(), 0.0) {}
};

inline double sup_norm(const OctonionField& f) {
    double v = 0.0;
    for (const auto& o : f.values) v = std::max(v, norm(o));
    return v;
}

inline double sup_norm(const OneFormField& f) {
    double v = 0.0;
    for (const auto& slots : f.values)
        for (const auto& o : slots) v = std::max(v, norm(o));
    return v;
}

inline double max_unit_defect(const OctonionField& f) {
    double v = 0.0;
    for (const auto& o : f.values) v = std::max(v, std::abs(norm_sq(o) - 1.0));
    return v;
}

/// h^d weighted lattice sum; the deterministic fixed-order reduction used by
/// every integral-type diagnostic.
template <typename Fn>
double lattice_integral(const LatticeSpec& spec, Fn&& per_point) {
    double sum = 0.0;
    for (std::size_t p = 0; p < spec.point_count(); ++p) sum += per_point(p);
    double cell = 1.0;
    for (int k = 0; k < spec.dim(); ++k) cell *= spec.spacing();
    return sum * cell;
}

inline void renormalize(OctonionField& f) {
    for (auto& o : f.values) {
        double n2 = norm_sq(o);
        if (n2 > 0.0) o *= 1.0 / std::sqrt(n2);
    }
}

}  // namespace g2flow
