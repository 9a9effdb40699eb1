#pragma once

#include <array>
#include <functional>
#include <variant>
#include <vector>

#include "slfv/geometry.hpp"

namespace slfv {

/// One constant piece that an update overwrote: [lo, hi) held `value` before the update.
struct ChangedPiece {
    double lo;
    double hi;
    double value;
};

/// Piecewise-constant w on R (zero outside the hull) or on the torus [0, period).
/// Pieces are right-continuous: value(i) holds on [breaks(i), breaks(i+1)).
class Intervals1D {
public:
    static constexpr double merge_tolerance = 1e-15;

    Intervals1D() = default;
    /// w = value on [lo, hi), zero elsewhere.
    static Intervals1D indicator(double lo, double hi, double value);
    /// Piecewise constant on the torus [0, period) with the given interior breakpoints.
    static Intervals1D torus(double period, const std::vector<double>& breaks, const std::vector<double>& values);
    /// Arbitrary pieces on R: breaks.size() == values.size() + 1.
    static Intervals1D pieces(const std::vector<double>& breaks, const std::vector<double>& values);

    bool periodic() const { return period_ > 0.0; }
    double period() const { return period_; }
    bool empty() const { return values_.empty(); }
    std::size_t pieces_count() const { return values_.size(); }
    const std::vector<double>& breaks() const { return breaks_; }
    const std::vector<double>& values() const { return values_; }
    double hull_lo() const { return breaks_.empty() ? 0.0 : breaks_.front(); }
    double hull_hi() const { return breaks_.empty() ? 0.0 : breaks_.back(); }

    double value_at(double x) const;
    /// ∫ w f given any antiderivative F of f.
    double integrate(const std::function<double(double)>& F) const;
    /// ∫_lo^hi w f given any antiderivative F of f (lo ≤ hi, no wrapping).
    double integrate_range(double lo, double hi, const std::function<double(double)>& F) const;
    /// ∫_lo^hi w, allowing lo < 0 or hi > period on the torus.
    double mass_range(double lo, double hi) const;

    /// w ← (1−ρ)w + ρ·parent on the ball [c−r, c+r); appends overwritten pieces to `changed`.
    void update_ball(double c, double r, double rho, double parent, std::vector<ChangedPiece>* changed = nullptr);

    /// Caches F_0..F_{width−1} at every breakpoint. Each later update_ball then leaves
    /// Δ_j = Δ∫ w dF_j in cache_delta() at O(1) cost per overwritten piece.
    void attach_cache(std::function<void(double, double*)> eval, std::size_t width);
    void detach_cache();
    const std::vector<double>& cache_delta() const { return cache_delta_; }
    /// Number of pieces the last update_ball overwrote.
    std::size_t last_touched() const { return touched_; }

private:
    void update_range(double lo, double hi, double rho, double parent, std::vector<ChangedPiece>* changed);
    std::size_t ensure_break(double x);
    /// Erases break i when its neighbouring values agree to merge_tolerance.
    bool merge_around(std::size_t i);
    void trim_zeros();

    void cache_insert(std::size_t i, double x);
    void cache_erase(std::size_t i);

    double period_ = 0.0;
    std::vector<double> breaks_;
    std::vector<double> values_;
    // Row i holds F_j(breaks_[i]); empty when no cache is attached.
    std::function<void(double, double*)> cache_eval_;
    std::size_t cache_width_ = 0;
    std::vector<double> cache_;
    std::vector<double> cache_delta_;
    std::size_t touched_ = 0;
};

/// Cell-centred lattice in d ≤ 3; optionally periodic with period n·h per axis.
class Lattice {
public:
    Lattice(int d, const Point& origin, double h, const std::array<int, 3>& n, bool periodic = false);

    int dimension() const { return d_; }
    double h() const { return h_; }
    bool periodic() const { return periodic_; }
    const std::array<int, 3>& shape() const { return n_; }
    std::size_t size() const { return values_.size(); }
    Point cell_center(std::size_t index) const;
    double& operator[](std::size_t i) { return values_[i]; }
    double operator[](std::size_t i) const { return values_[i]; }
    const std::vector<double>& values() const { return values_; }
    double cell_volume() const;
    Domain domain() const;

    /// Value of the cell containing x (zero outside a non-periodic lattice).
    double value_at(const Point& x) const;
    void fill(const std::function<double(const Point&)>& w);
    /// Cells whose centres lie within distance r of c.
    std::vector<std::size_t> cells_in_ball(const Point& c, double r) const;
    /// Updates the cells of the ball; appends (index, old value) pairs to `changed`.
    void update_ball(const Point& c, double r, double rho, double parent,
                     std::vector<std::pair<std::size_t, double>>* changed = nullptr);

private:
    int d_;
    Point origin_;
    double h_;
    std::array<int, 3> n_;
    bool periodic_;
    std::vector<double> values_;
};

using FrequencyField = std::variant<Intervals1D, Lattice>;

} // namespace slfv
