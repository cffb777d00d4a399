#pragma once

#include <cmath>
#include <ostream>
#include <span>
#include <vector>

#include "wavecert/error.hpp"
#include "wavecert/sphere.hpp"

namespace wavecert {

/// Per-(l, m) radial samples u_lm(t_k, r_j) at a sequence of stored time slices.
/// Layout is slice-major, then mode, then radius.
class RadialModeField {
public:
    RadialModeField() = default;
    RadialModeField(int L, int nr, double dr) : L_(L), nr_(nr), dr_(dr) {}

    int degree() const { return L_; }
    int nr() const { return nr_; }
    double dr() const { return dr_; }
    std::size_t modes() const { return static_cast<std::size_t>(mode_count(L_)); }
    std::size_t slices() const { return times_.size(); }
    double time(std::size_t k) const { return times_[k]; }
    const std::vector<double>& times() const { return times_; }
    double radius(int j) const { return (j + 0.5) * dr_; }

    void append_slice(double t, std::span<const double> all_modes) {
        require(all_modes.size() == modes() * static_cast<std::size_t>(nr_), "append_slice: size mismatch");
        times_.push_back(t);
        data_.insert(data_.end(), all_modes.begin(), all_modes.end());
    }

    std::span<const double> mode(std::size_t k, std::size_t idx) const {
        return std::span<const double>(data_).subspan((k * modes() + idx) * nr_, nr_);
    }
    std::span<double> mode(std::size_t k, std::size_t idx) {
        return std::span<double>(data_).subspan((k * modes() + idx) * nr_, nr_);
    }
    std::span<const double> slice(std::size_t k) const {
        return std::span<const double>(data_).subspan(k * modes() * nr_, modes() * nr_);
    }

    /// Coefficients of all modes at (slice k, radius j).
    std::vector<double> coefficients(std::size_t k, int j) const {
        std::vector<double> c(modes());
        for (std::size_t idx = 0; idx < modes(); ++idx) c[idx] = mode(k, idx)[j];
        return c;
    }

    /// Slice index whose time matches t to within tol, or -1.
    long find_slice(double t, double tol = 1e-9) const {
        for (std::size_t k = 0; k < times_.size(); ++k)
            if (std::abs(times_[k] - t) <= tol) return static_cast<long>(k);
        return -1;
    }

    bool all_finite() const {
        for (double v : data_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    void scale(double s) {
        for (double& v : data_) v *= s;
    }

    /// CSV with columns l,m,t,r,value.
    void write_csv(std::ostream& os) const {
        os << "l,m,t,r,value\n";
        os.precision(17);
        for (std::size_t k = 0; k < slices(); ++k)
            for (std::size_t idx = 0; idx < modes(); ++idx) {
                const auto lbl = mode_label(static_cast<int>(idx));
                const auto row = mode(k, idx);
                for (int j = 0; j < nr_; ++j)
                    os << lbl.l << ',' << lbl.m << ',' << times_[k] << ',' << radius(j) << ',' << row[j] << '\n';
            }
    }

private:
    int L_ = 0;
    int nr_ = 0;
    double dr_ = 1.0;
    std::vector<double> times_;
    std::vector<double> data_;
};

} // namespace wavecert
