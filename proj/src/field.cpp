#include "slfv/field.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace slfv {

Intervals1D Intervals1D::indicator(double lo, double hi, double value) {
    if (!(hi > lo)) throw std::invalid_argument("indicator needs lo < hi");
    if (value < 0.0 || value > 1.0) throw std::invalid_argument("frequency must lie in [0,1]");
    Intervals1D f;
    if (value > 0.0) {
        f.breaks_ = {lo, hi};
        f.values_ = {value};
    }
    return f;
}

Intervals1D Intervals1D::pieces(const std::vector<double>& breaks, const std::vector<double>& values) {
    if (breaks.size() != values.size() + 1) throw std::invalid_argument("pieces needs one more break than values");
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i)
        if (!(breaks[i + 1] > breaks[i])) throw std::invalid_argument("breaks must be strictly increasing");
    for (double v : values)
        if (v < 0.0 || v > 1.0) throw std::invalid_argument("frequency must lie in [0,1]");
    Intervals1D f;
    f.breaks_ = breaks;
    f.values_ = values;
    f.trim_zeros();
    return f;
}

Intervals1D Intervals1D::torus(double period, const std::vector<double>& breaks, const std::vector<double>& values) {
    if (!(period > 0.0)) throw std::invalid_argument("torus period must be positive");
    Intervals1D f;
    f.period_ = period;
    f.breaks_.push_back(0.0);
    for (double b : breaks) {
        if (!(b > f.breaks_.back()) || !(b < period)) throw std::invalid_argument("torus breaks must increase inside (0, period)");
        f.breaks_.push_back(b);
    }
    f.breaks_.push_back(period);
    if (values.size() + 1 != f.breaks_.size()) throw std::invalid_argument("torus needs breaks.size()+1 values");
    for (double v : values)
        if (v < 0.0 || v > 1.0) throw std::invalid_argument("frequency must lie in [0,1]");
    f.values_ = values;
    return f;
}

double Intervals1D::value_at(double x) const {
    if (values_.empty()) return 0.0;
    if (periodic()) {
        x = std::fmod(x, period_);
        if (x < 0.0) x += period_;
    }
    if (x < breaks_.front() || x >= breaks_.back()) return 0.0;
    const auto it = std::upper_bound(breaks_.begin(), breaks_.end(), x);
    return values_[static_cast<std::size_t>(it - breaks_.begin()) - 1];
}

double Intervals1D::integrate(const std::function<double(double)>& F) const {
    double s = 0.0;
    if (values_.empty()) return s;
    double left = F(breaks_[0]);
    for (std::size_t i = 0; i < values_.size(); ++i) {
        const double right = F(breaks_[i + 1]);
        s += values_[i] * (right - left);
        left = right;
    }
    return s;
}

double Intervals1D::integrate_range(double lo, double hi, const std::function<double(double)>& F) const {
    if (values_.empty() || !(hi > lo)) return 0.0;
    lo = std::max(lo, breaks_.front());
    hi = std::min(hi, breaks_.back());
    if (!(hi > lo)) return 0.0;
    auto i = static_cast<std::size_t>(std::upper_bound(breaks_.begin(), breaks_.end(), lo) - breaks_.begin()) - 1;
    double s = 0.0;
    double a = lo;
    double fa = F(a);
    for (; i < values_.size() && a < hi; ++i) {
        const double b = std::min(hi, breaks_[i + 1]);
        const double fb = F(b);
        s += values_[i] * (fb - fa);
        a = b;
        fa = fb;
    }
    return s;
}

double Intervals1D::mass_range(double lo, double hi) const {
    auto id = [](double x) { return x; };
    if (!periodic()) return integrate_range(lo, hi, id);
    if (hi - lo >= period_) return integrate(id);
    if (lo < 0.0) return integrate_range(0.0, hi, id) + integrate_range(lo + period_, period_, id);
    if (hi > period_) return integrate_range(lo, period_, id) + integrate_range(0.0, hi - period_, id);
    return integrate_range(lo, hi, id);
}

void Intervals1D::attach_cache(std::function<void(double, double*)> eval, std::size_t width) {
    cache_eval_ = std::move(eval);
    cache_width_ = width;
    cache_.assign(breaks_.size() * width, 0.0);
    for (std::size_t i = 0; i < breaks_.size(); ++i) cache_eval_(breaks_[i], cache_.data() + i * width);
    cache_delta_.assign(width, 0.0);
}

void Intervals1D::detach_cache() {
    cache_eval_ = nullptr;
    cache_width_ = 0;
    cache_.clear();
    cache_delta_.clear();
}

void Intervals1D::cache_insert(std::size_t i, double x) {
    if (!cache_width_) return;
    const auto at = cache_.begin() + static_cast<std::ptrdiff_t>(i * cache_width_);
    cache_.insert(at, cache_width_, 0.0);
    cache_eval_(x, cache_.data() + i * cache_width_);
}

void Intervals1D::cache_erase(std::size_t i) {
    if (!cache_width_) return;
    const auto at = cache_.begin() + static_cast<std::ptrdiff_t>(i * cache_width_);
    cache_.erase(at, at + static_cast<std::ptrdiff_t>(cache_width_));
}

std::size_t Intervals1D::ensure_break(double x) {
    if (x < breaks_.front()) {
        breaks_.insert(breaks_.begin(), x);
        values_.insert(values_.begin(), 0.0);
        cache_insert(0, x);
        return 0;
    }
    if (x > breaks_.back()) {
        breaks_.push_back(x);
        values_.push_back(0.0);
        cache_insert(breaks_.size() - 1, x);
        return breaks_.size() - 1;
    }
    auto it = std::lower_bound(breaks_.begin(), breaks_.end(), x);
    auto i = static_cast<std::size_t>(it - breaks_.begin());
    if (*it == x) return i;
    breaks_.insert(it, x);
    values_.insert(values_.begin() + static_cast<std::ptrdiff_t>(i), values_[i - 1]);
    cache_insert(i, x);
    return i;
}

bool Intervals1D::merge_around(std::size_t i) {
    if (i == 0 || i + 1 >= breaks_.size()) return false;
    if (std::abs(values_[i - 1] - values_[i]) >= merge_tolerance) return false;
    breaks_.erase(breaks_.begin() + static_cast<std::ptrdiff_t>(i));
    values_.erase(values_.begin() + static_cast<std::ptrdiff_t>(i));
    cache_erase(i);
    return true;
}

void Intervals1D::trim_zeros() {
    if (periodic()) return;
    std::size_t front = 0;
    while (front < values_.size() && values_[front] == 0.0) ++front;
    if (front == values_.size()) {
        breaks_.clear();
        values_.clear();
        cache_.clear();
        return;
    }
    std::size_t back = values_.size();
    while (values_[back - 1] == 0.0) --back;
    if (front > 0 || back < values_.size()) {
        breaks_ = std::vector<double>(breaks_.begin() + static_cast<std::ptrdiff_t>(front),
                                      breaks_.begin() + static_cast<std::ptrdiff_t>(back + 1));
        values_ = std::vector<double>(values_.begin() + static_cast<std::ptrdiff_t>(front),
                                      values_.begin() + static_cast<std::ptrdiff_t>(back));
        if (cache_width_) {
            cache_.erase(cache_.begin() + static_cast<std::ptrdiff_t>((back + 1) * cache_width_), cache_.end());
            cache_.erase(cache_.begin(), cache_.begin() + static_cast<std::ptrdiff_t>(front * cache_width_));
        }
    }
}

void Intervals1D::update_range(double lo, double hi, double rho, double parent, std::vector<ChangedPiece>* changed) {
    if (!(hi > lo)) return;
    if (values_.empty()) {
        if (parent == 0.0) return;
        breaks_ = {lo, hi};
        values_ = {rho * parent};
        ++touched_;
        if (changed) changed->push_back({lo, hi, 0.0});
        if (cache_width_) {
            cache_.assign(2 * cache_width_, 0.0);
            cache_eval_(lo, cache_.data());
            cache_eval_(hi, cache_.data() + cache_width_);
            for (std::size_t j = 0; j < cache_width_; ++j)
                cache_delta_[j] += values_[0] * (cache_[cache_width_ + j] - cache_[j]);
        }
        return;
    }
    if (parent == 0.0) {
        lo = std::max(lo, breaks_.front());
        hi = std::min(hi, breaks_.back());
        if (!(hi > lo)) return;
    }
    const std::size_t ia = ensure_break(lo);
    const std::size_t ib = ensure_break(hi);
    touched_ += ib - ia;
    for (std::size_t k = ia; k < ib; ++k) {
        if (changed) changed->push_back({breaks_[k], breaks_[k + 1], values_[k]});
        const double next = (1.0 - rho) * values_[k] + rho * parent;
        if (cache_width_) {
            const double dv = next - values_[k];
            const double* c0 = cache_.data() + k * cache_width_;
            const double* c1 = c0 + cache_width_;
            for (std::size_t j = 0; j < cache_width_; ++j) cache_delta_[j] += dv * (c1[j] - c0[j]);
        }
        values_[k] = next;
    }
    // Ascending so a merged run keeps its leftmost value and is compared again with the next piece.
    std::size_t end = ib;
    for (std::size_t k = std::max<std::size_t>(ia, 1); k <= end && k + 1 < breaks_.size();) {
        if (merge_around(k)) {
            --end;
        } else {
            ++k;
        }
    }
    trim_zeros();
}

void Intervals1D::update_ball(double c, double r, double rho, double parent, std::vector<ChangedPiece>* changed) {
    std::fill(cache_delta_.begin(), cache_delta_.end(), 0.0);
    touched_ = 0;
    if (!periodic()) {
        update_range(c - r, c + r, rho, parent, changed);
        return;
    }
    c = std::fmod(c, period_);
    if (c < 0.0) c += period_;
    const double lo = c - r;
    const double hi = c + r;
    if (hi - lo >= period_) {
        update_range(0.0, period_, rho, parent, changed);
    } else if (lo < 0.0) {
        update_range(0.0, hi, rho, parent, changed);
        update_range(lo + period_, period_, rho, parent, changed);
    } else if (hi > period_) {
        update_range(lo, period_, rho, parent, changed);
        update_range(0.0, hi - period_, rho, parent, changed);
    } else {
        update_range(lo, hi, rho, parent, changed);
    }
}

Lattice::Lattice(int d, const Point& origin, double h, const std::array<int, 3>& n, bool periodic)
    : d_(d), origin_(origin), h_(h), n_(n), periodic_(periodic) {
    if (d < 1 || d > 3) throw std::invalid_argument("lattice dimension must be 1, 2 or 3");
    if (!(h > 0.0)) throw std::invalid_argument("lattice spacing must be positive");
    std::size_t total = 1;
    for (int i = 0; i < 3; ++i) {
        if (i >= d) n_[i] = 1;
        if (n_[i] < 1) throw std::invalid_argument("lattice shape must be positive");
        total *= static_cast<std::size_t>(n_[i]);
    }
    values_.assign(total, 0.0);
}

Point Lattice::cell_center(std::size_t index) const {
    Point p{0.0, 0.0, 0.0};
    for (int i = 0; i < d_; ++i) {
        const auto k = index % static_cast<std::size_t>(n_[i]);
        index /= static_cast<std::size_t>(n_[i]);
        p[i] = origin_[i] + (static_cast<double>(k) + 0.5) * h_;
    }
    return p;
}

double Lattice::cell_volume() const { return std::pow(h_, d_); }

Domain Lattice::domain() const {
    Domain dom;
    dom.dimension = d_;
    dom.period = periodic_ ? n_[0] * h_ : 0.0;
    return dom;
}

double Lattice::value_at(const Point& x) const {
    std::size_t idx = 0;
    std::size_t stride = 1;
    for (int i = 0; i < d_; ++i) {
        auto k = static_cast<long>(std::floor((x[i] - origin_[i]) / h_));
        if (periodic_) {
            k %= n_[i];
            if (k < 0) k += n_[i];
        } else if (k < 0 || k >= n_[i]) {
            return 0.0;
        }
        idx += static_cast<std::size_t>(k) * stride;
        stride *= static_cast<std::size_t>(n_[i]);
    }
    return values_[idx];
}

void Lattice::fill(const std::function<double(const Point&)>& w) {
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] = w(cell_center(i));
}

std::vector<std::size_t> Lattice::cells_in_ball(const Point& c, double r) const {
    std::array<long, 3> lo{0, 0, 0}, hi{0, 0, 0};
    for (int i = 0; i < d_; ++i) {
        lo[i] = static_cast<long>(std::floor((c[i] - r - origin_[i]) / h_ - 0.5));
        hi[i] = static_cast<long>(std::ceil((c[i] + r - origin_[i]) / h_ - 0.5));
        if (!periodic_) {
            lo[i] = std::max(lo[i], 0L);
            hi[i] = std::min(hi[i], static_cast<long>(n_[i]) - 1);
        }
    }
    std::vector<std::size_t> out;
    const double r2 = r * r;
    for (long k2 = lo[2]; k2 <= hi[2]; ++k2) {
        for (long k1 = lo[1]; k1 <= hi[1]; ++k1) {
            for (long k0 = lo[0]; k0 <= hi[0]; ++k0) {
                const std::array<long, 3> k{k0, k1, k2};
                double dist2 = 0.0;
                std::size_t idx = 0, stride = 1;
                for (int i = 0; i < d_; ++i) {
                    const double x = origin_[i] + (static_cast<double>(k[i]) + 0.5) * h_;
                    dist2 += (x - c[i]) * (x - c[i]);
                    long kk = k[i];
                    if (periodic_) {
                        kk %= n_[i];
                        if (kk < 0) kk += n_[i];
                    }
                    idx += static_cast<std::size_t>(kk) * stride;
                    stride *= static_cast<std::size_t>(n_[i]);
                }
                if (dist2 <= r2) out.push_back(idx);
            }
        }
    }
    if (periodic_) {
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
    }
    return out;
}

void Lattice::update_ball(const Point& c, double r, double rho, double parent,
                          std::vector<std::pair<std::size_t, double>>* changed) {
    for (std::size_t idx : cells_in_ball(c, r)) {
        if (changed) changed->emplace_back(idx, values_[idx]);
        values_[idx] = (1.0 - rho) * values_[idx] + rho * parent;
    }
}

} // namespace slfv
