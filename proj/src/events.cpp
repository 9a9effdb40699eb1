#include "slfv/events.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace slfv {

LineageSet::LineageSet(const Domain& dom, const std::vector<Point>& start) : domain(dom) {
    for (std::size_t i = 0; i < start.size(); ++i) {
        positions.push_back(dom.wrap(start[i]));
        ids.push_back(static_cast<int>(i));
    }
}

std::vector<std::size_t> LineageSet::covered(const Point& center, double radius) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < positions.size(); ++i)
        if (domain.distance(center, positions[i]) <= radius) out.push_back(i);
    return out;
}

std::size_t LineageSet::index_of(int id) const {
    for (std::size_t i = 0; i < ids.size(); ++i)
        if (ids[i] == id) return i;
    throw std::out_of_range("unknown lineage id");
}

RadiusSampler::RadiusSampler(double alpha, double lower, double upper)
    : alpha_(alpha), lower_(lower), upper_(upper), normalizer_(1.0), logarithmic_(false) {
    if (!(lower > 0.0) || upper < lower) throw std::invalid_argument("RadiusSampler needs 0 < lower <= upper");
    if (upper == lower) return;
    logarithmic_ = std::abs(alpha + 1.0) < 1e-14;
    normalizer_ = logarithmic_ ? std::log(upper / lower)
                               : (std::pow(upper, alpha + 1.0) - std::pow(lower, alpha + 1.0)) / (alpha + 1.0);
}

RadiusSampler RadiusSampler::for_law(const EventLaw& law, const ScalingParams& p, double exponent_shift) {
    if (law.is_fixed()) {
        const double r = law.fixed_radius().r;
        return RadiusSampler(0.0, r, r);
    }
    return RadiusSampler(law.variable_radius().alpha + exponent_shift, law.lower_radius(p), 1.0);
}

double RadiusSampler::sample(double uniform) const {
    if (upper_ == lower_) return lower_;
    double r;
    if (logarithmic_) {
        r = lower_ * std::exp(uniform * normalizer_);
    } else {
        const double a1 = std::pow(lower_, alpha_ + 1.0);
        const double b1 = std::pow(upper_, alpha_ + 1.0);
        r = std::pow(uniform * (b1 - a1) + a1, 1.0 / (alpha_ + 1.0));
    }
    return std::clamp(r, std::nextafter(lower_, upper_), upper_);
}

double RadiusSampler::cdf(double r) const {
    if (r <= lower_) return 0.0;
    if (r >= upper_) return 1.0;
    if (logarithmic_) return std::log(r / lower_) / normalizer_;
    return (std::pow(r, alpha_ + 1.0) - std::pow(lower_, alpha_ + 1.0)) / (alpha_ + 1.0) / normalizer_;
}

EventStream::EventStream(const EventStreamConfig& config, double start_time)
    : config_(config), rng_(config.seed, config.stream), time_(start_time),
      sampler_(RadiusSampler::for_law(config.law, config.params)) {
    config_.params.validate();
    config_.law.validate(config_.params);
    r_max_scaled_ = config_.law.upper_radius() / config_.params.m_space;
    set_window(config_.window);
}

void EventStream::set_window(const Box& window) {
    config_.window = window;
    const int d = config_.params.dimension;
    if (config_.domain.periodic()) {
        for (int i = 0; i < d; ++i) {
            proposal_.lo[i] = 0.0;
            proposal_.hi[i] = config_.domain.period;
        }
    } else {
        for (int i = 0; i < d; ++i) {
            if (!(window.hi[i] >= window.lo[i])) throw std::invalid_argument("event window must be nonempty");
            proposal_.lo[i] = window.lo[i] - r_max_scaled_;
            proposal_.hi[i] = window.hi[i] + r_max_scaled_;
        }
    }
    recompute_rate();
}

void EventStream::recompute_rate() {
    const auto& p = config_.params;
    double vol = 1.0;
    for (int i = 0; i < p.dimension; ++i) vol *= proposal_.hi[i] - proposal_.lo[i];
    rate_ = p.n_rate * std::pow(p.m_space, p.dimension) * vol * config_.law.mu_total(p);
    if (rate_ > config_.rate_budget) {
        std::ostringstream os;
        os << "rung too large: event rate " << rate_ << " exceeds budget " << config_.rate_budget;
        throw std::runtime_error(os.str());
    }
}

Event EventStream::next() {
    Event e;
    if (rate_ <= 0.0) {
        time_ = std::numeric_limits<double>::infinity();
        e.time = time_;
        return e;
    }
    const double dt = rng_.exponential(rate_);
    const double t = time_ + dt;
    time_ = (t > time_) ? t : std::nextafter(time_, std::numeric_limits<double>::infinity());
    e.time = time_;
    for (int i = 0; i < config_.params.dimension; ++i) e.center[i] = rng_.uniform(proposal_.lo[i], proposal_.hi[i]);
    const double r = sampler_.sample(rng_.uniform());
    e.radius = r / config_.params.m_space;
    e.impact = config_.law.impact(r, config_.params);
    return e;
}

namespace {
double lineage_rate(const ScalingParams& p, const EventLaw& law, double shift, bool marking) {
    const double vol = unit_ball_volume(p.dimension);
    if (law.is_fixed()) {
        const auto& f = law.fixed_radius();
        const double base = p.n_rate * vol * std::pow(f.r, p.dimension);
        return marking ? base * f.u / p.j_impact : base;
    }
    const RadiusSampler s = RadiusSampler::for_law(law, p, shift);
    const double base = p.n_rate * vol * s.normalizer();
    return marking ? base / p.j_impact : base;
}
} // namespace

CoveringEventStream::CoveringEventStream(const ScalingParams& p, const EventLaw& law, std::uint64_t seed,
                                         std::uint64_t stream, double start_time)
    : p_(p), law_(law), rng_(seed, stream), time_(start_time),
      lambda_(lineage_rate(p, law, p.dimension, false)), sampler_(RadiusSampler::for_law(law, p, p.dimension)) {}

CoveringEventStream::Result CoveringEventStream::next(const LineageSet& lineages) {
    if (lineages.size() == 0) throw std::invalid_argument("next_covering_event needs at least one lineage");
    Result res;
    const double k = static_cast<double>(lineages.size());
    for (;;) {
        ++res.proposals;
        time_ += rng_.exponential(k * lambda_);
        const std::size_t i = rng_.below(lineages.size());
        const double r = sampler_.sample(rng_.uniform());
        const double rho = r / p_.m_space;
        const Point x = uniform_in_ball(lineages.domain, lineages.positions[i], rho, rng_);
        auto cov = lineages.covered(x, rho);
        if (cov.empty()) cov.push_back(i);
        if (rng_.uniform() * static_cast<double>(cov.size()) < 1.0) {
            res.event = Event{x, time_, rho, law_.impact(r, p_)};
            res.covered = std::move(cov);
            return res;
        }
    }
}

MarkingEventStream::MarkingEventStream(const ScalingParams& p, const EventLaw& law, std::uint64_t seed,
                                       std::uint64_t stream, double start_time)
    : p_(p), law_(law), rng_(seed, stream), time_(start_time),
      lambda_(lineage_rate(p, law, p.dimension - (law.is_fixed() ? 0.0 : law.variable_radius().gamma), true)),
      sampler_(RadiusSampler::for_law(law, p, p.dimension - (law.is_fixed() ? 0.0 : law.variable_radius().gamma))) {}

bool MarkingEventStream::next(const LineageSet& lineages, double t_end, Result& out) {
    const std::size_t k = lineages.size();
    if (k == 0) {
        time_ = t_end;
        return false;
    }
    for (;;) {
        const double t = time_ + rng_.exponential(static_cast<double>(k) * lambda_);
        if (t >= t_end) {
            time_ = t_end;
            return false;
        }
        time_ = t;
        const std::size_t i = rng_.below(k);
        const double r = sampler_.sample(rng_.uniform());
        const double rho = r / p_.m_space;
        const double u = law_.impact(r, p_);
        const Point x = uniform_in_ball(lineages.domain, lineages.positions[i], rho, rng_);
        out.marked.clear();
        out.marked.push_back(i);
        for (std::size_t j = 0; j < k; ++j) {
            if (j == i) continue;
            if (lineages.domain.distance(x, lineages.positions[j]) <= rho && rng_.uniform() < u) out.marked.push_back(j);
        }
        if (out.marked.size() == 1 || rng_.uniform() * static_cast<double>(out.marked.size()) < 1.0) {
            out.event = Event{x, time_, rho, u};
            return true;
        }
    }
}

namespace {
void put_f64(std::ostream& os, double v) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    char buf[8];
    std::memcpy(buf, &bits, 8);
    os.write(buf, 8);
}

bool get_f64(std::istream& is, double& v) {
    char buf[8];
    if (!is.read(buf, 8)) return false;
    std::uint64_t bits;
    std::memcpy(&bits, buf, 8);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    v = std::bit_cast<double>(bits);
    return true;
}
} // namespace

void write_event_log(const std::string& path, const std::vector<Event>& events, int d) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open event log for writing: " + path);
    for (const auto& e : events) {
        put_f64(os, e.time);
        for (int i = 0; i < d; ++i) put_f64(os, e.center[i]);
        put_f64(os, e.radius);
        put_f64(os, e.impact);
    }
}

std::vector<Event> read_event_log(const std::string& path, int d) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open event log: " + path);
    std::vector<Event> out;
    for (;;) {
        Event e;
        if (!get_f64(is, e.time)) break;
        bool ok = true;
        for (int i = 0; i < d; ++i) ok = ok && get_f64(is, e.center[i]);
        ok = ok && get_f64(is, e.radius) && get_f64(is, e.impact);
        if (!ok) throw std::runtime_error("truncated event log record");
        out.push_back(e);
    }
    return out;
}

} // namespace slfv
